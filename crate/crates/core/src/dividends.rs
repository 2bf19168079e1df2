//! Dividend, capital-injection and bailout objectives under barrier
//! policies, their barrier influence functions, and a window-scan
//! optimizer with multi-band diagnostics.
//!
//! All formulas go through the `*_scaled` table accessors so that they
//! remain finite on rescaled tables.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::scale::{ScaleTable, ZwTable};

/// Relative tolerance under which two influence values count as tied.
pub const TIE_TOL: f64 = 1e-12;

fn phi_pow(table: &ScaleTable, n: i64) -> f64 {
    table.phi().powf(n as f64)
}

fn require_barrier(table: &ScaleTable, b: i64) -> Result<()> {
    if b < 0 {
        return domain(format!("barrier {b} must be nonnegative"));
    }
    table.check(b + 1)
}

fn require_nondegenerate(table: &ScaleTable) -> Result<()> {
    let d = table.dist();
    if table.v() == 1.0 && d.p0() + d.pmf(1) >= 1.0 {
        return Err(Error::Degenerate(
            "p0 + p1 = 1 and v = 1: the reflected process is never ruined".into(),
        ));
    }
    Ok(())
}

fn require_finite_mean(table: &ScaleTable) -> Result<()> {
    if table.dist().mean().is_finite() {
        Ok(())
    } else {
        Err(Error::InfiniteMean)
    }
}

/// Evaluates `f(e)`, an expression scaled by `φ_v^e`, at `e = max(x, 0)`
/// and undoes the scaling.
fn at_scale(table: &ScaleTable, x: i64, f: impl Fn(i64) -> f64) -> f64 {
    let e = x.max(0);
    f(e) * phi_pow(table, -e)
}

/// `W_v(x)/ΔW_v(b)`-type ratio `num(b+1)/ΔW_v(b)` at matching scale.
fn over_delta_w(table: &ScaleTable, b: i64, num: f64) -> f64 {
    num / table.delta_w_scaled(b, b + 1)
}

/// De Finetti value of the barrier policy at `b`:
/// `W_v(x)/ΔW_v(b)` for `x <= b`, `x - b + W_v(b)/ΔW_v(b)` above.
pub fn definetti_value(table: &ScaleTable, b: i64, x: i64) -> Result<f64> {
    require_barrier(table, b)?;
    require_nondegenerate(table)?;
    let at = |y: i64| over_delta_w(table, b, table.w_scaled(y, b + 1));
    Ok(if x <= b { at(x) } else { (x - b) as f64 + at(b) })
}

/// `1/ΔW_v(b)`.
pub fn definetti_influence(table: &ScaleTable, b: i64) -> Result<f64> {
    require_barrier(table, b)?;
    require_nondegenerate(table)?;
    Ok(over_delta_w(table, b, phi_pow(table, b + 1)))
}

/// Strict local minima of `b ↦ ΔW_v(b)` on `{0, ..., b_max}`.
///
/// A plateau counts by its left endpoint; a minimum touching `b_max`
/// is not reported since the window cannot confirm it.
pub fn multiband_diagnostics(table: &ScaleTable, b_max: usize) -> Result<Vec<usize>> {
    let h = influence_trace(table, Objective::Definetti, 0.0, b_max)?;
    Ok(strict_local_maxima(&h))
}

fn strict_local_maxima(h: &[f64]) -> Vec<usize> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < h.len() {
        let mut j = i;
        while j + 1 < h.len() && h[j + 1] == h[i] {
            j += 1;
        }
        let left = i == 0 || h[i - 1] < h[i];
        let right = j + 1 < h.len() && h[j + 1] < h[j];
        if left && right {
            out.push(i);
        }
        i = j + 1;
    }
    out
}

/// `B_v^b(x, w) = E_x[v^{τ̃_b^+} w^{R_*(τ̃_b^+)}]`, the joint transform of
/// the entrance time to `[b, ∞)` and the capital injected so far:
/// `Z_v(x, w)/Z_v(b, w)` for `x <= b`, 1 above.
pub fn injections_mgf(table: &ScaleTable, zw: &ZwTable, b: i64, x: i64) -> Result<f64> {
    if b < 0 {
        return domain(format!("barrier {b} must be nonnegative"));
    }
    table.check(b)?;
    if x > b {
        return Ok(1.0);
    }
    Ok(zw.scaled(x, b) / zw.scaled(b, b))
}

/// Joint transform of the ruin time, deficit at ruin and cumulative
/// dividends under the barrier policy at `b`.
pub fn joint_dividends_deficit(
    table: &ScaleTable,
    zw: &ZwTable,
    b: i64,
    x: i64,
    z: f64,
) -> Result<f64> {
    require_barrier(table, b)?;
    if !(z > 0.0 && z <= 1.0) {
        return domain(format!("z = {z} outside (0, 1]"));
    }
    if x > b {
        return Ok(z.powf((x - b) as f64) * joint_dividends_deficit(table, zw, b, b, z)?);
    }
    let e = b + 1;
    let ratio = (zw.scaled(b + 1, e) - z * zw.scaled(b, e))
        / (table.w_scaled(b + 1, e) - z * table.w_scaled(b, e));
    Ok(at_scale(table, x, |e| zw.scaled(x, e) - ratio * table.w_scaled(x, e)))
}

/// `E_x[v^T̃ w^{-X̃(T̃)}; T̃ < ∞]` under the barrier policy at `b`:
/// `Z_v(x, w) - ΔZ_v(b, w)/ΔW_v(b) W_v(x)`.
pub fn reflected_ruin_gf(table: &ScaleTable, zw: &ZwTable, b: i64, x: i64) -> Result<f64> {
    require_barrier(table, b)?;
    let x = x.min(b);
    let e = b + 1;
    let ratio = (zw.scaled(b + 1, e) - zw.scaled(b, e)) / table.delta_w_scaled(b, e);
    Ok(at_scale(table, x, |e| zw.scaled(x, e) - ratio * table.w_scaled(x, e)))
}

/// Success parameter `ΔW_v(b)/W_v(b+1)` of the geometric law (on
/// `{0, 1, ...}`) of the killed cumulative dividends started at `b`.
pub fn dividends_law_at_barrier(table: &ScaleTable, b: i64) -> Result<f64> {
    require_barrier(table, b)?;
    Ok(table.delta_w_scaled(b, b + 1) / table.w_scaled(b + 1, b + 1))
}

/// Probability generating function of that geometric law.
pub fn dividends_pgf_at_barrier(table: &ScaleTable, b: i64, z: f64) -> Result<f64> {
    let q = 1.0 - dividends_law_at_barrier(table, b)?;
    Ok((1.0 - q) / (1.0 - z * q))
}

/// Expected discounted deficit at ruin under the barrier policy at `b`:
/// `W_v(x) ΔZ_{1,v}(b)/ΔW_v(b) - Z_{1,v}(x)` for `x <= b`.
pub fn bailout_value_reflected(table: &ScaleTable, b: i64, x: i64) -> Result<f64> {
    require_finite_mean(table)?;
    require_barrier(table, b)?;
    require_nondegenerate(table)?;
    let x = x.min(b);
    let ratio = table.delta_z1_scaled(b, b + 1) / table.delta_w_scaled(b, b + 1);
    Ok(at_scale(table, x, |e| ratio * table.w_scaled(x, e) - table.z1_scaled(x, e)))
}

/// `H(b) = (1 - k ΔZ_{1,v}(b))/ΔW_v(b)`.
pub fn modified_definetti_influence(table: &ScaleTable, b: i64, k: f64) -> Result<f64> {
    require_finite_mean(table)?;
    require_barrier(table, b)?;
    require_nondegenerate(table)?;
    let e = b + 1;
    Ok((phi_pow(table, e) - k * table.delta_z1_scaled(b, e)) / table.delta_w_scaled(b, e))
}

/// The same influence written with `ΔZ_{1,v}(b) = Z_{1,v}(b+1) - Z_{1,v}(b)`.
pub fn modified_definetti_influence_differenced(table: &ScaleTable, b: i64, k: f64) -> Result<f64> {
    require_finite_mean(table)?;
    require_barrier(table, b)?;
    let dz1 = table.z1(b + 1) - table.z1(b);
    Ok((1.0 - k * dz1) / table.delta_w(b))
}

/// `V_D^b(x) - k V_B^b(x)`.
pub fn modified_definetti_value(table: &ScaleTable, b: i64, k: f64, x: i64) -> Result<f64> {
    Ok(definetti_value(table, b, x)? - k * bailout_value_reflected(table, b, x)?)
}

fn require_discounted(table: &ScaleTable) -> Result<()> {
    if table.v() >= 1.0 {
        return domain("doubly reflected objectives need v < 1 (ΔZ_v vanishes at v = 1)");
    }
    Ok(())
}

/// Expected discounted dividends and bailouts of the process reflected
/// at 0 and at `b`.
pub fn doubly_reflected_values(table: &ScaleTable, b: i64, x: i64) -> Result<(f64, f64)> {
    require_finite_mean(table)?;
    require_discounted(table)?;
    require_barrier(table, b)?;
    let y = x.min(b);
    let c = 1.0 / table.v() - 1.0;
    // ΔZ_v(b) = (1/v - 1) W_v(b)
    let dz = |e: i64| c * table.w_scaled(b, e);
    let dividends = table.z_scaled(y, b) / dz(b);
    let ratio = table.delta_z1_scaled(b, b) / dz(b);
    let bailouts = at_scale(table, y, |e| ratio * table.z_scaled(y, e) - table.z1_scaled(y, e));
    let overshoot = (x - y) as f64;
    Ok((overshoot + dividends, bailouts))
}

/// `H(b) = (1 - k ΔZ_{1,v}(b))/ΔZ_v(b)` for the doubly reflected objective.
pub fn doubly_reflected_influence(table: &ScaleTable, b: i64, k: f64) -> Result<f64> {
    require_finite_mean(table)?;
    require_discounted(table)?;
    if b < 0 {
        return domain(format!("barrier {b} must be nonnegative"));
    }
    table.check(b)?;
    let c = 1.0 / table.v() - 1.0;
    Ok((phi_pow(table, b) - k * table.delta_z1_scaled(b, b)) / (c * table.w_scaled(b, b)))
}

/// The same influence with both differences taken literally on the tables.
pub fn doubly_reflected_influence_differenced(table: &ScaleTable, b: i64, k: f64) -> Result<f64> {
    require_finite_mean(table)?;
    require_discounted(table)?;
    require_barrier(table, b)?;
    let dz1 = table.z1(b + 1) - table.z1(b);
    Ok((1.0 - k * dz1) / table.delta_z(b))
}

/// `H̄(b) = (1 - k Z_v(b))/W_v(b)`, a positive affine transform of `H`.
pub fn doubly_reflected_influence_bar(table: &ScaleTable, b: i64, k: f64) -> Result<f64> {
    require_discounted(table)?;
    table.check(b)?;
    Ok((phi_pow(table, b) - k * table.z_scaled(b, b)) / table.w_scaled(b, b))
}

/// `V_D^b(x) - k V_B^b(x)` for the doubly reflected process.
pub fn doubly_reflected_value(table: &ScaleTable, b: i64, k: f64, x: i64) -> Result<f64> {
    let (d, i) = doubly_reflected_values(table, b, x)?;
    Ok(d - k * i)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    Definetti,
    ModifiedDefinetti,
    DoublyReflected,
}

/// Which optimality argument backs the reported barrier at the queried
/// reserve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LemmaCase {
    /// `x <= b*` with the maximum attained: optimal among barrier policies.
    BelowBarrier,
    /// De Finetti, `x > b*`, influence unimodal on the window.
    Unimodal,
    /// Doubly reflected with a unique maximizer: optimal for every reserve.
    UniqueMaximizer,
    /// None of the above; `b*` is reported without a guarantee.
    Heuristic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub b: usize,
    #[serde(rename = "H")]
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarrierResult {
    pub objective: Objective,
    pub k: Option<f64>,
    pub x: i64,
    pub b_star: usize,
    pub value: f64,
    pub attained: bool,
    pub lemma_case: LemmaCase,
    /// Every barrier whose influence ties the maximum.
    pub ties: Vec<usize>,
    /// Strict local maxima of the influence over the window.
    pub local_maxima: Vec<usize>,
    pub trace: Vec<TracePoint>,
}

pub fn influence(table: &ScaleTable, objective: Objective, k: f64, b: i64) -> Result<f64> {
    match objective {
        Objective::Definetti => definetti_influence(table, b),
        Objective::ModifiedDefinetti => modified_definetti_influence(table, b, k),
        Objective::DoublyReflected => doubly_reflected_influence(table, b, k),
    }
}

pub fn objective_value(table: &ScaleTable, objective: Objective, k: f64, b: i64, x: i64) -> Result<f64> {
    match objective {
        Objective::Definetti => definetti_value(table, b, x),
        Objective::ModifiedDefinetti => modified_definetti_value(table, b, k, x),
        Objective::DoublyReflected => doubly_reflected_value(table, b, k, x),
    }
}

/// Influence values for `b = 0..=b_max`.
pub fn influence_trace(table: &ScaleTable, objective: Objective, k: f64, b_max: usize) -> Result<Vec<f64>> {
    table.check(b_max as i64 + 1)?;
    (0..=b_max as i64).map(|b| influence(table, objective, k, b)).collect()
}

fn check_k(objective: Objective, k: Option<f64>) -> Result<f64> {
    match (objective, k) {
        (Objective::Definetti, _) => Ok(0.0),
        (Objective::ModifiedDefinetti, Some(k)) if k > 0.0 => Ok(k),
        (Objective::DoublyReflected, Some(k)) if k > 1.0 => Ok(k),
        (Objective::ModifiedDefinetti, _) => domain("modified objective needs k > 0"),
        (Objective::DoublyReflected, _) => domain("doubly reflected objective needs k > 1"),
    }
}

/// Scans the influence over `{0, ..., b_max}` and reports its smallest
/// maximizer.
///
/// `attained` is false only when the maximizer sits in the final rim of
/// `max(5, b_max/5)` barriers and the influence is strictly increasing
/// there, i.e. when the window cannot rule out a larger value beyond it.
pub fn optimize_barrier(
    table: &ScaleTable,
    objective: Objective,
    k: Option<f64>,
    x: i64,
    b_max: usize,
) -> Result<BarrierResult> {
    let kv = check_k(objective, k)?;
    let h = influence_trace(table, objective, kv, b_max)?;
    let best = h.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !best.is_finite() {
        return Err(Error::Degenerate(format!("influence maximum is {best}")));
    }
    let tol = TIE_TOL * best.abs().max(f64::MIN_POSITIVE);
    let ties: Vec<usize> = (0..h.len()).filter(|&b| best - h[b] <= tol).collect();
    let b_star = ties[0];

    let rim = (b_max / 5).max(5).min(b_max);
    let tail_increasing = h[b_max - rim..].windows(2).all(|p| p[1] > p[0]);
    let attained = !(b_star >= b_max - rim && tail_increasing);

    let unimodal = h[..=b_star].windows(2).all(|p| p[1] >= p[0])
        && h[b_star..].windows(2).all(|p| p[1] <= p[0]);
    let lemma_case = if !attained {
        LemmaCase::Heuristic
    } else if x <= b_star as i64 {
        LemmaCase::BelowBarrier
    } else {
        match objective {
            Objective::Definetti if unimodal => LemmaCase::Unimodal,
            Objective::DoublyReflected if ties.len() == 1 => LemmaCase::UniqueMaximizer,
            _ => LemmaCase::Heuristic,
        }
    };

    let value = objective_value(table, objective, kv, b_star as i64, x)?;
    Ok(BarrierResult {
        objective,
        k: match objective {
            Objective::Definetti => None,
            _ => Some(kv),
        },
        x,
        b_star,
        value,
        attained,
        lemma_case,
        ties,
        local_maxima: strict_local_maxima(&h),
        trace: h.iter().enumerate().map(|(b, &h)| TracePoint { b, h }).collect(),
    })
}

pub fn optimize_definetti(table: &ScaleTable, x: i64, b_max: usize) -> Result<BarrierResult> {
    optimize_barrier(table, Objective::Definetti, None, x, b_max)
}
