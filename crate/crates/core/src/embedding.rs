//! Identification with the upwards skip-free Lévy chain `Y_t = h X_{N_t}`,
//! `N` a Poisson process of rate `γ`.
//!
//! `Y` jumps up by `h` at rate `γ p_0` and down by `(k-1) h` at rate
//! `γ p_k`, `k >= 2`; claims of size 1 leave it in place. Its `q`-scale
//! functions are those of the walk with discount `v = γ/(γ+q)`.

use crate::error::{domain, Result};
use crate::model::{ClaimDistribution, DiscountedModel};
use crate::scale::ScaleTable;

#[derive(Debug, Clone, PartialEq)]
pub struct LevyChainParams {
    pub gamma: f64,
    pub h: f64,
    pub dist: ClaimDistribution,
}

impl LevyChainParams {
    pub fn new(dist: ClaimDistribution, gamma: f64, h: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite() && h > 0.0 && h.is_finite()) {
            return domain(format!("need γ > 0 and h > 0 (γ = {gamma}, h = {h})"));
        }
        Ok(LevyChainParams { gamma, h, dist })
    }

    /// Discount factor of the walk matching killing rate `q`.
    pub fn discount(&self, q: f64) -> f64 {
        self.gamma / (self.gamma + q)
    }

    /// Total mass of the Lévy measure, `γ (1 - p_1)`.
    pub fn levy_mass(&self) -> f64 {
        self.gamma * (1.0 - self.dist.pmf(1))
    }

    /// Atoms `(jump, rate)` of the Lévy measure with claims up to `k_max`.
    pub fn levy_measure(&self, k_max: usize) -> Vec<(f64, f64)> {
        (0..=k_max)
            .filter(|&k| k != 1)
            .map(|k| ((1.0 - k as f64) * self.h, self.gamma * self.dist.pmf(k)))
            .filter(|&(_, rate)| rate > 0.0)
            .collect()
    }
}

fn check_nonneg(name: &str, t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        domain(format!("{name} = {t} must be a finite nonnegative number"))
    }
}

/// `ψ(β) = γ (e^{βh} p̃(e^{-βh}) - 1)`, so that `E e^{β Y_t} = e^{t ψ(β)}`.
pub fn laplace_exponent(params: &LevyChainParams, beta: f64) -> Result<f64> {
    check_nonneg("β", beta)?;
    let s = (-beta * params.h).exp();
    Ok(params.gamma * (params.dist.pgf_unchecked(s) / s - 1.0))
}

/// `ψ'(β) = γ h (e^{βh} p̃(e^{-βh}) - p̃'(e^{-βh}))`.
pub fn laplace_exponent_derivative(params: &LevyChainParams, beta: f64) -> Result<f64> {
    check_nonneg("β", beta)?;
    let s = (-beta * params.h).exp();
    let d = &params.dist;
    Ok(params.gamma * params.h * (d.pgf_unchecked(s) / s - d.pgf_derivative(s)))
}

/// Right inverse `Φ(q) = -ln(φ_{γ/(γ+q)})/h`.
pub fn phi_q(params: &LevyChainParams, q: f64) -> Result<f64> {
    check_nonneg("q", q)?;
    let phi = crate::lundberg::phi(&params.dist, params.discount(q))?;
    Ok(-phi.ln() / params.h)
}

/// Lévy-chain scale functions at one `q`, on the lattice `{0, h, ..., m_max h}`.
#[derive(Debug, Clone)]
pub struct LevyScale {
    params: LevyChainParams,
    q: f64,
    table: ScaleTable,
}

impl LevyScale {
    pub fn new(params: LevyChainParams, q: f64, m_max: usize) -> Result<Self> {
        check_nonneg("q", q)?;
        let model = DiscountedModel::new(params.dist.clone(), params.discount(q))?;
        let table = ScaleTable::rescaled(model, m_max)?;
        Ok(LevyScale { params, q, table })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn table(&self) -> &ScaleTable {
        &self.table
    }

    pub fn m_max(&self) -> usize {
        self.table.x_max()
    }

    /// `W^{(q)}(mh) = W_v(m)/(γh)`.
    pub fn wq(&self, m: i64) -> Result<f64> {
        self.table.check(m)?;
        Ok(self.table.w(m) / (self.params.gamma * self.params.h))
    }

    /// `Z^{(q)}(mh) = Z_v(m)`.
    pub fn zq(&self, m: i64) -> Result<f64> {
        self.table.check(m)?;
        Ok(self.table.z(m))
    }

    /// `W^{(q)}(mh) e^{-Φ(q)(m+1)h}`, which tends to `1/ψ'(Φ(q)+)`.
    pub fn wq_normalized(&self, m: i64) -> Result<f64> {
        self.table.check(m)?;
        Ok(self.table.w_scaled(m, m + 1) / (self.params.gamma * self.params.h))
    }
}

pub fn wq(params: &LevyChainParams, q: f64, m: usize) -> Result<f64> {
    LevyScale::new(params.clone(), q, m)?.wq(m as i64)
}

pub fn zq(params: &LevyChainParams, q: f64, m: usize) -> Result<f64> {
    LevyScale::new(params.clone(), q, m)?.zq(m as i64)
}
