//! First-passage laws: two-sided exit, deficit at ruin, discounted and
//! eventual ruin, finite-time ruin, the killed resolvent and the
//! downcrossing identity.
//!
//! Negative starting points are accepted everywhere and resolved by the
//! boundary conventions of the scale functions.

use crate::error::{domain, Error, Result};
use crate::model::ClaimDistribution;
use crate::scale::{ScaleTable, ZwTable};

/// Relative change of `Z_v(b, w) / W_v(b)` between the last two table rows
/// below which the ratio counts as converged.
pub const RATIO_TOL: f64 = 1e-10;

fn require_le(x: i64, b: i64) -> Result<()> {
    if x > b {
        domain(format!("starting point {x} lies above the upper level {b}"))
    } else {
        Ok(())
    }
}

fn require_level(table: &ScaleTable, b: i64) -> Result<()> {
    if b < 0 {
        return domain(format!("level {b} must be nonnegative"));
    }
    table.check(b)
}

/// Two-sided exit upwards: `E_x[v^{τ_N^+}; τ_N^+ < τ_{-1}^-] = W_v(x)/W_v(N)`.
pub fn two_sided_up(table: &ScaleTable, x: i64, n: i64) -> Result<f64> {
    require_level(table, n)?;
    require_le(x, n)?;
    Ok(table.w_ratio(x, n))
}

/// `E_x[v^τ w^{-X_τ}; τ < τ_b^+]` with `τ = τ_{-1}^-`:
/// `Z_v(x, w) - W_v(x)/W_v(b) Z_v(b, w)`.
pub fn deficit_gf_two_sided(table: &ScaleTable, zw: &ZwTable, x: i64, b: i64) -> Result<f64> {
    require_level(table, b)?;
    require_le(x, b)?;
    if x < 0 {
        return Ok(zw.value(x));
    }
    let e = x;
    let scaled = zw.scaled(x, e) - table.w_ratio(x, b) * zw.scaled(b, e);
    Ok(scaled * table.phi().powi(-(e as i32)))
}

/// `E_x[X_τ v^τ; τ < τ_b^+] = Z_{1,v}(x) - W_v(x)/W_v(b) Z_{1,v}(b)`; never
/// positive.
pub fn expected_deficit_two_sided(table: &ScaleTable, x: i64, b: i64) -> Result<f64> {
    require_level(table, b)?;
    require_le(x, b)?;
    if !table.dist().mean().is_finite() {
        return Err(Error::InfiniteMean);
    }
    if x < 0 {
        return Ok(x as f64);
    }
    let scaled = table.z1_scaled(x, x) - table.w_ratio(x, b) * table.z1_scaled(b, x);
    Ok(scaled * table.phi().powi(-(x as i32)))
}

/// `α_v = φ_v (1 - v) / (v (1 - φ_v))`, for `v < 1`.
pub fn discounted_ruin_coefficient(table: &ScaleTable) -> Result<f64> {
    let v = table.v();
    if v >= 1.0 {
        return domain("discounted ruin needs v < 1; use eventual_ruin");
    }
    let phi = table.phi();
    Ok(phi * (1.0 - v) / (v * (1.0 - phi)))
}

/// `E_x[v^τ; τ < ∞] = Z_v(x) - α_v W_v(x)`, and 1 for `x < 0`.
pub fn discounted_ruin(table: &ScaleTable, x: i64) -> Result<f64> {
    let alpha = discounted_ruin_coefficient(table)?;
    if x < 0 {
        return Ok(1.0);
    }
    table.check(x)?;
    Ok(table.z(x) - alpha * table.w(x))
}

/// `Ψ(x) = 1 - W(x)(1 - min(E C_1, 1))`, on a table with `v = 1`.
pub fn eventual_ruin(table: &ScaleTable, x: i64) -> Result<f64> {
    if table.v() != 1.0 {
        return domain("eventual ruin needs a table with v = 1");
    }
    if x < 0 {
        return Ok(1.0);
    }
    table.check(x)?;
    Ok(1.0 - table.w(x) * (1.0 - table.dist().mean().min(1.0)))
}

/// `α_v(w) = lim_b Z_v(b, w)/W_v(b)`, read off at the end of the table.
///
/// Fails with `NoConvergence` when the last two ratios still differ by more
/// than [`RATIO_TOL`] relatively.
pub fn alpha_vw(table: &ScaleTable, zw: &ZwTable) -> Result<f64> {
    let b = zw.x_max().min(table.x_max()) as i64;
    if b < 1 {
        return Err(Error::NoConvergence("table too short for the ratio limit".into()));
    }
    let ratio = |b: i64| zw.scaled(b, b) / table.w_scaled(b, b);
    let (last, prev) = (ratio(b), ratio(b - 1));
    if (last - prev).abs() > RATIO_TOL * last.abs() {
        return Err(Error::NoConvergence(format!(
            "Z(b, w)/W(b) moved from {prev} to {last} at b = {b}; enlarge x_max"
        )));
    }
    Ok(last)
}

/// Closed form `α_v(w) = (p̃(w) - w/v) φ_v / (φ_v - w)`, valid for `w < φ_v`.
pub fn alpha_vw_closed_form(table: &ScaleTable, w: f64) -> Result<f64> {
    let phi = table.phi();
    if !(w > 0.0 && w < phi) {
        return domain(format!("closed form needs 0 < w < φ_v = {phi}"));
    }
    Ok((table.dist().pgf_unchecked(w) - w / table.v()) * phi / (phi - w))
}

/// `E_x[v^τ w^{-X_τ}; τ < ∞] = Z_v(x, w) - α_v(w) W_v(x)`.
pub fn psi_vw(table: &ScaleTable, zw: &ZwTable, x: i64) -> Result<f64> {
    if x < 0 {
        return Ok(zw.value(x));
    }
    table.check(x)?;
    let alpha = alpha_vw(table, zw)?;
    let scaled = zw.scaled(x, x) - alpha * table.w_scaled(x, x);
    Ok(scaled * table.phi().powi(-(x as i32)))
}

/// Finite-horizon ruin probabilities `Ψ(m; x) = P_x(τ_{-1}^- <= m)` and
/// their complements `S̄(m; x)`, for `m <= horizon`, `0 <= x <= x_max`.
#[derive(Debug, Clone)]
pub struct RuinDP {
    horizon: usize,
    x_max: usize,
    psi: Vec<Vec<f64>>,
    survival: Vec<Vec<f64>>,
}

/// Fills both recursions independently, so that their sum doubles as a
/// tail-mass check.
pub fn finite_time_ruin(dist: &ClaimDistribution, horizon: usize, x_max: usize) -> RuinDP {
    // Step m needs states up to x_max + (horizon - m); beyond that the
    // values are never read.
    let width = x_max + horizon + 1;
    let support = dist.support_max().unwrap_or(width + 1);
    let pmf = dist.pmf_prefix(support.min(width + 1) + 1);
    let tails: Vec<f64> = (0..=width + 1).map(|k| dist.tail(k)).collect();
    let mut prev_s = vec![1.0; width + 1];
    let mut prev_p = vec![0.0; width + 1];
    let mut psi = vec![prev_p[..=x_max].to_vec()];
    let mut survival = vec![prev_s[..=x_max].to_vec()];
    for m in 1..=horizon {
        let limit = x_max + horizon - m;
        let mut s = vec![0.0; limit + 1];
        let mut p = vec![0.0; limit + 1];
        for x in 0..=limit {
            let top = (x + 1).min(pmf.len() - 1);
            let (mut acc_s, mut acc_p) = (0.0, tails[x + 1]);
            for i in 0..=top {
                acc_s += pmf[i] * prev_s[x + 1 - i];
                acc_p += pmf[i] * prev_p[x + 1 - i];
            }
            s[x] = acc_s;
            p[x] = acc_p;
        }
        psi.push(p[..=x_max].to_vec());
        survival.push(s[..=x_max].to_vec());
        prev_s = s;
        prev_p = p;
    }
    RuinDP { horizon, x_max, psi, survival }
}

impl RuinDP {
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn x_max(&self) -> usize {
        self.x_max
    }

    /// `Ψ(m; x)`; 1 for `x < 0`.
    pub fn psi(&self, m: usize, x: i64) -> f64 {
        if x < 0 {
            1.0
        } else {
            self.psi[m][x as usize]
        }
    }

    /// `S̄(m; x)`; 0 for `x < 0`.
    pub fn survival(&self, m: usize, x: i64) -> f64 {
        if x < 0 {
            0.0
        } else {
            self.survival[m][x as usize]
        }
    }

    /// `max |Ψ + S̄ - 1|` over the grid.
    pub fn max_complement_defect(&self) -> f64 {
        self.psi
            .iter()
            .flatten()
            .zip(self.survival.iter().flatten())
            .map(|(p, s)| (p + s - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `sum_{m <= horizon} v^m (Ψ(m; x) - Ψ(m-1; x))`, a truncation of
    /// `E_x[v^τ; τ < ∞]`.
    pub fn discounted_ruin(&self, v: f64, x: i64) -> f64 {
        let mut acc = 0.0;
        let mut vm = 1.0;
        for m in 1..=self.horizon {
            vm *= v;
            acc += vm * (self.psi(m, x) - self.psi(m - 1, x));
        }
        acc
    }

    /// `sum_{m, x} v^m z^x S̄(m; x)` over the grid.
    pub fn survival_double_sum(&self, v: f64, z: f64) -> f64 {
        double_sum(&self.survival, v, z)
    }

    /// `sum_{m, x} v^m z^x Ψ(m; x)` over the grid.
    pub fn ruin_double_sum(&self, v: f64, z: f64) -> f64 {
        double_sum(&self.psi, v, z)
    }
}

fn double_sum(grid: &[Vec<f64>], v: f64, z: f64) -> f64 {
    let mut acc = 0.0;
    let mut vm = 1.0;
    for row in grid {
        let mut zx = 1.0;
        let mut inner = 0.0;
        for f in row {
            inner += zx * f;
            zx *= z;
        }
        acc += vm * inner;
        vm *= v;
    }
    acc
}

fn check_transform_args(v: f64, z: f64, phi: f64) -> Result<()> {
    if !(v > 0.0 && v < 1.0 && z > 0.0 && z < 1.0) || z == phi {
        return domain(format!("transform needs v, z in (0, 1) and z != φ_v (v = {v}, z = {z})"));
    }
    Ok(())
}

/// `sum_x z^x S̄(x) = ((1 - E C_1) ∨ 0) / (p̃(z) - z)` for `z` in `(0, 1)`.
pub fn perpetual_survival_transform(dist: &ClaimDistribution, z: f64) -> Result<f64> {
    if !(z > 0.0 && z < 1.0) {
        return domain(format!("transform needs z in (0, 1), got {z}"));
    }
    Ok((1.0 - dist.mean()).max(0.0) / (dist.pgf_unchecked(z) - z))
}

/// `sum_{n, x} v^n z^x S̄(n; x) = (z/(1-z) - φ_v/(1-φ_v)) / (z - v p̃(z))`.
pub fn survival_double_transform(dist: &ClaimDistribution, v: f64, z: f64) -> Result<f64> {
    let phi = crate::lundberg::phi(dist, v)?;
    check_transform_args(v, z, phi)?;
    Ok((z / (1.0 - z) - phi / (1.0 - phi)) / (z - v * dist.pgf_unchecked(z)))
}

/// `sum_{n, x} v^n z^x Ψ(n; x)`.
pub fn ruin_double_transform(dist: &ClaimDistribution, v: f64, z: f64) -> Result<f64> {
    let phi = crate::lundberg::phi(dist, v)?;
    check_transform_args(v, z, phi)?;
    let pz = dist.pgf_unchecked(z);
    Ok((v * (z - pz) / ((1.0 - v) * (1.0 - z)) + phi / (1.0 - phi)) / (z - v * pz))
}

/// Expected discounted occupation of `j` before leaving `{0, ..., N-1}`,
/// started at `i`: `v^{-1} (W_v(N-1-j) W_v(i)/W_v(N) - W_v(i-j-1))`.
pub fn killed_resolvent(table: &ScaleTable, i: i64, j: i64, n: i64) -> Result<f64> {
    require_level(table, n)?;
    if !(0..n).contains(&i) || !(0..n).contains(&j) {
        return domain(format!("need 0 <= i, j <= N-1 (i = {i}, j = {j}, N = {n})"));
    }
    let first = table.w(n - 1 - j) * table.w_ratio(i, n);
    Ok((first - table.w(i - j - 1)) / table.v())
}

/// `E_x[W_v(X_σ) v^σ; σ < τ_N^+]` with `σ = τ_{b-1}^-`:
/// `W_v(x) - W_v(x-b)/W_v(N-b) W_v(N)`.
pub fn w_at_downcrossing(table: &ScaleTable, x: i64, b: i64, n: i64) -> Result<f64> {
    require_level(table, n)?;
    require_le(x, n)?;
    if !(0..=n).contains(&b) {
        return domain(format!("need 0 <= b <= N (b = {b}, N = {n})"));
    }
    if x < b {
        return Ok(table.w(x));
    }
    Ok(table.w(x) - table.w_ratio(x - b, n - b) * table.w(n))
}

/// The `N → ∞` limit `W_v(x) - W_v(x-b) φ_v^{-b}` (since
/// `W_v(N)/W_v(N-b) → φ_v^{-b}`).
pub fn w_at_downcrossing_infinite(table: &ScaleTable, x: i64, b: i64) -> Result<f64> {
    table.check(x)?;
    if b < 0 {
        return domain(format!("level {b} must be nonnegative"));
    }
    Ok(table.w(x) - table.w(x - b) * table.phi().powi(-(b as i32)))
}
