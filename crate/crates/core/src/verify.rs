//! Analytic-versus-simulation registry: every first-passage and dividend
//! formula paired with a Monte Carlo estimator of the same quantity.

use serde::Serialize;

use crate::dividends;
use crate::error::Result;
use crate::mc::{self, Functional, McConfig, Policy};
use crate::model::{ClaimDistribution, DiscountedModel};
use crate::passage;
use crate::scale::ScaleTable;

/// Acceptance band in standard errors.
pub const Z_BAND: f64 = 4.0;
/// Below this many paths a report is flagged as low power.
pub const LOW_POWER_PATHS: usize = 10_000;
pub const DEFAULT_PATHS: usize = 1_000_000;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub analytic: f64,
    pub dist: ClaimDistribution,
    pub x0: i64,
    pub policy: Policy,
    pub v: f64,
    pub functional: Functional,
    pub horizon_cap: Option<usize>,
}

impl Check {
    /// Replaces the analytic value, e.g. to confirm that a wrong formula
    /// is detected.
    pub fn with_analytic(mut self, analytic: f64) -> Self {
        self.analytic = analytic;
        self
    }

    pub fn run(&self, n_paths: usize, seed: u64) -> Result<CheckReport> {
        let config = McConfig { n_paths, seed, horizon_cap: self.horizon_cap };
        let est = mc::simulate(&self.dist, self.x0, self.policy, self.v, &self.functional, &config)?;
        let diff = est.mean - self.analytic;
        let z_score = if est.std_error > 0.0 {
            diff / est.std_error
        } else if diff == 0.0 {
            0.0
        } else {
            diff.signum() * f64::INFINITY
        };
        Ok(CheckReport {
            functional: self.name.clone(),
            analytic: self.analytic,
            mc_mean: est.mean,
            mc_se: est.std_error,
            z_score,
            n_paths,
            seed,
            capped_fraction: est.capped_fraction,
            low_power: n_paths < LOW_POWER_PATHS,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub functional: String,
    pub analytic: f64,
    pub mc_mean: f64,
    pub mc_se: f64,
    pub z_score: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub capped_fraction: f64,
    pub low_power: bool,
}

impl CheckReport {
    pub fn pass(&self) -> bool {
        self.z_score.abs() <= Z_BAND
    }
}

fn three_point() -> ClaimDistribution {
    ClaimDistribution::from_strs(&["2/3", "2/9", "0", "1/9"]).unwrap()
}

fn gsy() -> ClaimDistribution {
    ClaimDistribution::from_strs(&["3/4", "1/20", "1/10", "0", "0", "0", "0", "1/10"]).unwrap()
}

fn check(
    name: &str,
    analytic: f64,
    table: &ScaleTable,
    x0: i64,
    policy: Policy,
    functional: Functional,
) -> Check {
    Check {
        name: name.to_string(),
        analytic,
        dist: table.dist().clone(),
        x0,
        policy,
        v: table.v(),
        functional,
        horizon_cap: None,
    }
}

/// The registered pairs. Discount factors are moderate so that paths are
/// short and the horizon truncation stays below 1e-10.
pub fn registry() -> Result<Vec<Check>> {
    let tp = ScaleTable::new(DiscountedModel::new(three_point(), 0.9)?, 400)?;
    let g = ScaleTable::new(DiscountedModel::new(gsy(), 0.9)?, 400)?;
    let zw = tp.z_w(0.6)?;
    let zw_g = g.z_w(0.7)?;
    let z1 = tp.z_w(1.0)?;
    let mut out = vec![
        check(
            "upcrossing_transform",
            tp.phi().powi(3),
            &tp,
            0,
            Policy::Free,
            Functional::UpcrossingTransform { level: 3 },
        ),
        check(
            "two_sided_up",
            passage::two_sided_up(&tp, 2, 6)?,
            &tp,
            2,
            Policy::Free,
            Functional::TwoSidedUp { level: 6 },
        ),
        check(
            "deficit_gf_two_sided",
            passage::deficit_gf_two_sided(&g, &zw_g, 3, 8)?,
            &g,
            3,
            Policy::Free,
            Functional::DeficitTransform { w: 0.7, upper: Some(8) },
        ),
        check(
            "expected_deficit_two_sided",
            passage::expected_deficit_two_sided(&g, 3, 8)?,
            &g,
            3,
            Policy::Free,
            Functional::ExpectedDeficit { upper: Some(8) },
        ),
        check("discounted_ruin", passage::discounted_ruin(&g, 4)?, &g, 4, Policy::Free, Functional::Ruin),
        check(
            "psi_vw",
            passage::psi_vw(&tp, &zw, 1)?,
            &tp,
            1,
            Policy::Free,
            Functional::DeficitTransform { w: 0.6, upper: None },
        ),
        check(
            "killed_resolvent",
            passage::killed_resolvent(&tp, 2, 1, 5)?,
            &tp,
            2,
            Policy::Free,
            Functional::KilledOccupation { j: 1, level: 5 },
        ),
        check(
            "w_at_downcrossing",
            passage::w_at_downcrossing(&tp, 4, 2, 7)?,
            &tp,
            4,
            Policy::Free,
            Functional::DowncrossingWeighted { b: 2, level: 7, weights: tp.w_values() },
        ),
        check(
            "definetti_value",
            dividends::definetti_value(&tp, 3, 1)?,
            &tp,
            1,
            Policy::ReflectUpper(3),
            Functional::Dividends,
        ),
        check(
            "injections_mgf",
            dividends::injections_mgf(&g, &zw_g, 5, -1)?,
            &g,
            -1,
            Policy::ReflectLower,
            Functional::InjectionsTransform { w: 0.7, level: 5 },
        ),
        check(
            "joint_dividends_deficit",
            dividends::joint_dividends_deficit(&tp, &zw, 2, 4, 0.8)?,
            &tp,
            4,
            Policy::ReflectUpper(2),
            Functional::DividendsDeficit { w: 0.6, z: 0.8 },
        ),
        check(
            "reflected_ruin_gf",
            dividends::reflected_ruin_gf(&tp, &z1, 2, 1)?,
            &tp,
            1,
            Policy::ReflectUpper(2),
            Functional::Ruin,
        ),
        check(
            "bailout_value_reflected",
            dividends::bailout_value_reflected(&g, 4, 2)?,
            &g,
            2,
            Policy::ReflectUpper(4),
            Functional::Bailout,
        ),
        check(
            "doubly_reflected_dividends",
            dividends::doubly_reflected_values(&g, 5, 2)?.0,
            &g,
            2,
            Policy::DoublyReflected(5),
            Functional::Dividends,
        ),
        check(
            "doubly_reflected_injections",
            dividends::doubly_reflected_values(&g, 5, 2)?.1,
            &g,
            2,
            Policy::DoublyReflected(5),
            Functional::Injections,
        ),
    ];
    // finite-horizon ruin: undiscounted, the horizon is the time limit
    let horizon = 20;
    let dp = passage::finite_time_ruin(&three_point(), horizon, 10);
    let mut finite = check("finite_time_ruin", dp.psi(horizon, 2), &tp, 2, Policy::Free, Functional::Ruin);
    finite.v = 1.0;
    finite.horizon_cap = Some(horizon);
    out.push(finite);
    Ok(out)
}

/// Chi-square fit of simulated killed dividends at the barrier against
/// the analytic geometric law.
pub fn dividends_law_check(n_paths: usize, seed: u64) -> Result<mc::ChiSquareReport> {
    let v = 0.9;
    let b = 2;
    let t = ScaleTable::new(DiscountedModel::new(three_point(), v)?, 10)?;
    let p = dividends::dividends_law_at_barrier(&t, b)?;
    let sample = mc::killed_dividends_sample(t.dist(), b, v, n_paths, seed)?;
    mc::geometric_chi_square(&sample, p)
}

/// Runs the whole registry.
pub fn run_registry(n_paths: usize, seed: u64) -> Result<Vec<CheckReport>> {
    registry()?.iter().map(|c| c.run(n_paths, seed)).collect()
}
