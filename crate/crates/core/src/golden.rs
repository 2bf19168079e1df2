//! Reference values for the worked examples: the three-point claim law,
//! modified geometric claims, Morrill's example and the Gerber–Shiu–Yang
//! example, plus generating-function residual checks.
//!
//! Each item compares a computed quantity with a published value under a
//! fixed tolerance; items never adjust to the computation.

use serde::Serialize;

use crate::dividends::{self, Objective};
use crate::error::Result;
use crate::lundberg;
use crate::model::{ClaimDistribution, DiscountedModel};
use crate::passage;
use crate::scale::{self, ScaleTable};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoldenItem {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl GoldenItem {
    fn new(name: &str, pass: bool, detail: String) -> Self {
        GoldenItem { name: name.to_string(), pass, detail }
    }

    pub fn line(&self) -> String {
        format!("{} {}: {}", if self.pass { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

/// The claim laws of the examples; any of them may be swapped out, e.g. to
/// check that a perturbed law is caught.
#[derive(Debug, Clone)]
pub struct GoldenModels {
    pub three_point: ClaimDistribution,
    pub morrill: ClaimDistribution,
    pub gsy: ClaimDistribution,
}

impl GoldenModels {
    pub fn published() -> Self {
        GoldenModels {
            three_point: ClaimDistribution::from_strs(&["2/3", "2/9", "0", "1/9"]).unwrap(),
            morrill: ClaimDistribution::from_strs(&["12/13", "0", "0", "1/13"]).unwrap(),
            gsy: ClaimDistribution::from_strs(&["3/4", "1/20", "1/10", "0", "0", "0", "0", "1/10"]).unwrap(),
        }
    }
}

impl Default for GoldenModels {
    fn default() -> Self {
        Self::published()
    }
}

pub const THREE_POINT_V: f64 = 150.0 / 169.0;
pub const MORRILL_V: f64 = 65.0 / 72.0;
pub const GSY_V: f64 = 0.999;

pub const THREE_POINT_W: [f64; 13] = [
    1.5, 2.035, 2.76082, 3.49551, 4.40307, 5.51337, 6.89721, 8.62338, 10.7802, 13.4755, 16.8446, 21.0558, 26.3198,
];
pub const THREE_POINT_DW: [f64; 12] = [
    0.535, 0.725817, 0.734691, 0.907565, 1.11029, 1.38385, 1.72616, 2.15678, 2.69539, 3.36905, 4.21121, 5.26398,
];
pub const MORRILL_W: [f64; 11] = [
    1.08333, 1.3, 1.56, 1.78172, 2.02973, 2.30568, 2.61834, 2.97286, 3.3753, 3.83216, 4.35085,
];
pub const MORRILL_DW: [f64; 9] = [0.216667, 0.26, 0.221722, 0.248011, 0.275947, 0.312659, 0.354523, 0.402433, 0.456864];
pub const GSY_DOUBLY_H: [f64; 7] = [-89.91, -59.1845, -43.5339, -30.8171, -19.8565, -10.3512, -2.10264];

/// Absolute tolerance for values printed to six significant digits.
pub const PRINTED_TOL: f64 = 5e-5;

/// Modified geometric triples `(p0, p1, α, v)` used for closed-form checks.
pub const MODIFIED_GEOMETRIC_CASES: [(f64, f64, f64, f64); 5] = [
    (0.6, 0.3, 0.0, 0.9),
    (0.6, 0.1, 0.5, 0.95),
    (0.7, 0.2, 0.3, 1.0),
    (0.5, 0.45, 0.8, 0.99),
    (0.8, 0.05, 0.6, 0.7),
];

/// `W_v(x)` from the two Lundberg roots of a modified geometric law.
///
/// Writing `p̃(z) - z/v = k_v (z - φ_v)(z - R_v)/(1 - αz)`, partial fractions
/// give `W_v(x) = (φ^{-x-1}(1 - αφ) - R^{-x-1}(1 - αR)) / (k_v (R - φ))`.
pub fn modified_geometric_w(dist: &ClaimDistribution, v: f64, x: i64) -> Result<f64> {
    let lundberg::RootPair { phi, r, k } = lundberg::root_pair_modified_geometric(dist, v)?;
    let (_, _, alpha) = dist.modified_geometric_params().ok_or(crate::Error::WrongKind)?;
    if x < 0 {
        return Ok(0.0);
    }
    let e = -(x as f64) - 1.0;
    Ok((phi.powf(e) * (1.0 - alpha * phi) - r.powf(e) * (1.0 - alpha * r)) / (k * (r - phi)))
}

/// `Z_v(x) = 1 + (1/v - 1) sum_{y<x} W_v(y)`, summed in closed form.
pub fn modified_geometric_z(dist: &ClaimDistribution, v: f64, x: i64) -> Result<f64> {
    let lundberg::RootPair { phi, r, k } = lundberg::root_pair_modified_geometric(dist, v)?;
    let (_, _, alpha) = dist.modified_geometric_params().ok_or(crate::Error::WrongKind)?;
    if x <= 0 || v >= 1.0 {
        return Ok(1.0);
    }
    let c = 1.0 / v - 1.0;
    let n = -(x as f64);
    let from_phi = (1.0 - alpha * phi) * (phi.powf(n) - 1.0) / (1.0 - phi);
    let from_r = (1.0 - alpha * r) * (1.0 - r.powf(n)) / (r - 1.0);
    Ok(1.0 + c / (k * (r - phi)) * (from_phi - from_r))
}

fn table(dist: &ClaimDistribution, v: f64, x_max: usize) -> Result<ScaleTable> {
    ScaleTable::new(DiscountedModel::new(dist.clone(), v)?, x_max)
}

fn max_gap(computed: impl IntoIterator<Item = f64>, printed: &[f64]) -> f64 {
    computed.into_iter().zip(printed).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

fn item(name: &str, f: impl FnOnce() -> Result<(bool, String)>) -> GoldenItem {
    match f() {
        Ok((pass, detail)) => GoldenItem::new(name, pass, detail),
        Err(e) => GoldenItem::new(name, false, format!("error: {e}")),
    }
}

fn three_point_items(d: &ClaimDistribution) -> Vec<GoldenItem> {
    vec![
        item("three-point eventual ruin closed form", || {
            let t = table(d, 1.0, 10)?;
            let mut gap: f64 = 0.0;
            for x in 0..=10 {
                let want = 0.4 * 0.5f64.powi(x) - (-1.0f64 / 3.0).powi(x) / 15.0;
                gap = gap.max((passage::eventual_ruin(&t, x as i64)? - want).abs());
            }
            Ok((gap <= 1e-10, format!("max gap {gap:.3e} over x = 0..10 (tol 1e-10)")))
        }),
        item("three-point ruin and survival z-transforms", || {
            let t = table(d, 1.0, 400)?;
            let mut gap: f64 = 0.0;
            for z in [0.2f64, 0.5, 0.8] {
                let mut sum = 0.0;
                for x in 0..=400 {
                    sum += z.powi(x) * passage::eventual_ruin(&t, x as i64)?;
                }
                gap = gap.max((sum - (z + 2.0) / ((z + 3.0) * (2.0 - z))).abs());
                let surv = passage::perpetual_survival_transform(d, z)?;
                gap = gap.max((surv - 4.0 / (6.0 - 7.0 * z + z * z * z)).abs());
            }
            Ok((gap <= 1e-10, format!("max gap {gap:.3e} (tol 1e-10)")))
        }),
        item("three-point W_v table, v = 150/169", || {
            let t = table(d, THREE_POINT_V, 13)?;
            let gap = max_gap((0..13).map(|x| t.w(x)), &THREE_POINT_W);
            Ok((gap <= PRINTED_TOL, format!("max gap {gap:.3e} (tol {PRINTED_TOL:e})")))
        }),
        item("three-point ΔW_v nondecreasing and printed", || {
            let t = table(d, THREE_POINT_V, 13)?;
            let dw: Vec<f64> = (0..12).map(|b| t.delta_w(b)).collect();
            let gap = max_gap(dw.iter().copied(), &THREE_POINT_DW);
            let monotone = dw.windows(2).all(|p| p[1] >= p[0]);
            Ok((gap <= PRINTED_TOL && monotone, format!("max gap {gap:.3e}, nondecreasing: {monotone}")))
        }),
        item("three-point optimal de Finetti barrier 0", || {
            let t = table(d, THREE_POINT_V, 13)?;
            let r = dividends::optimize_definetti(&t, 0, 11)?;
            Ok((r.b_star == 0, format!("b* = {}", r.b_star)))
        }),
    ]
}

fn modified_geometric_items() -> Vec<GoldenItem> {
    vec![
        item("modified geometric closed forms for W_v and Z_v", || {
            let mut worst: f64 = 0.0;
            for (p0, p1, alpha, v) in MODIFIED_GEOMETRIC_CASES {
                let d = ClaimDistribution::modified_geometric(p0, p1, alpha)?;
                let t = ScaleTable::new(DiscountedModel::new(d.clone(), v)?, 100)?;
                for x in 0..=100 {
                    let w = modified_geometric_w(&d, v, x)?;
                    worst = worst.max((w - t.w(x)).abs() / t.w(x));
                    if v < 1.0 {
                        let z = modified_geometric_z(&d, v, x)?;
                        worst = worst.max((z - t.z(x)).abs() / t.z(x));
                    }
                }
            }
            Ok((worst <= 1e-10, format!("max relative gap {worst:.3e} (tol 1e-10)")))
        }),
        item("gambler's ruin", || {
            let (p0, p2) = (0.6, 0.1);
            let d = ClaimDistribution::modified_geometric(p0, 0.3, 0.0)?;
            let t = ScaleTable::new(DiscountedModel::new(d, 1.0)?, 60)?;
            let mut gap: f64 = 0.0;
            for x in 0..=60 {
                let want = (p2 / p0).powi(x as i32 + 1);
                gap = gap.max((passage::eventual_ruin(&t, x)? - want).abs());
            }
            Ok((gap <= 1e-12, format!("max gap {gap:.3e} (tol 1e-12)")))
        }),
    ]
}

fn morrill_items(d: &ClaimDistribution) -> Vec<GoldenItem> {
    vec![
        item("Morrill W_v table, v = 65/72", || {
            let t = table(d, MORRILL_V, 11)?;
            let gap = max_gap((0..11).map(|x| t.w(x)), &MORRILL_W);
            Ok((gap <= PRINTED_TOL, format!("max gap {gap:.3e} (tol {PRINTED_TOL:e})")))
        }),
        item("Morrill ΔW_v table", || {
            let t = table(d, MORRILL_V, 11)?;
            let gap = max_gap((0..9).map(|b| t.delta_w(b)), &MORRILL_DW);
            Ok((gap <= PRINTED_TOL, format!("max gap {gap:.3e} (tol {PRINTED_TOL:e})")))
        }),
        item("Morrill multi-band diagnostics [0, 2]", || {
            let t = table(d, MORRILL_V, 210)?;
            let bands = dividends::multiband_diagnostics(&t, 200)?;
            Ok((bands == [0, 2], format!("local maxima {bands:?}")))
        }),
        item("Morrill modified influence, k = 3.2: unique maximum at 2", || {
            let t = table(d, MORRILL_V, 210)?;
            let r = dividends::optimize_barrier(&t, Objective::ModifiedDefinetti, Some(3.2), 0, 200)?;
            let pass = r.b_star == 2 && r.local_maxima == [2] && r.ties == [2];
            Ok((pass, format!("b* = {}, local maxima {:?}", r.b_star, r.local_maxima)))
        }),
    ]
}

fn gsy_items(d: &ClaimDistribution) -> Vec<GoldenItem> {
    vec![
        item("GSY de Finetti influence maxima {1, 7, 38}, global 1", || {
            let t = table(d, GSY_V, 210)?;
            let r = dividends::optimize_definetti(&t, 0, 200)?;
            let pass = r.b_star == 1 && r.local_maxima == [1, 7, 38];
            Ok((pass, format!("b* = {}, local maxima {:?}", r.b_star, r.local_maxima)))
        }),
        item("GSY modified influence, k = 1.2: global maximum at 41", || {
            let t = table(d, GSY_V, 210)?;
            let r = dividends::optimize_barrier(&t, Objective::ModifiedDefinetti, Some(1.2), 0, 200)?;
            let h = |b: usize| r.trace[b].h;
            Ok((
                r.b_star == 41,
                format!("b* = {} (H(40) = {:.7}, H(41) = {:.7})", r.b_star, h(40), h(41)),
            ))
        }),
        item("GSY doubly reflected influence, k = 1.2: global maximum at 25", || {
            let t = table(d, GSY_V, 210)?;
            let r = dividends::optimize_barrier(&t, Objective::DoublyReflected, Some(1.2), 0, 200)?;
            let h = |b: usize| r.trace[b].h;
            Ok((
                r.b_star == 25,
                format!("b* = {} (H(24) = {:.7}, H(25) = {:.7})", r.b_star, h(24), h(25)),
            ))
        }),
        item("GSY doubly reflected influence H(0..6)", || {
            let t = table(d, GSY_V, 10)?;
            let mut worst: f64 = 0.0;
            for (b, want) in GSY_DOUBLY_H.iter().enumerate() {
                let h = dividends::doubly_reflected_influence(&t, b as i64, 1.2)?;
                worst = worst.max(((h - want) / want).abs());
            }
            Ok((worst <= 1e-3, format!("max relative gap {worst:.3e} (tol 1e-3)")))
        }),
    ]
}

fn residual_items(models: &GoldenModels) -> Vec<GoldenItem> {
    let laws = [
        ("three-point", &models.three_point, THREE_POINT_V),
        ("Morrill", &models.morrill, MORRILL_V),
        ("GSY", &models.gsy, GSY_V),
    ];
    let mut out = Vec::new();
    for (name, d, v) in laws {
        out.push(item(&format!("{name} W and Z generating-function residuals"), || {
            let t = ScaleTable::rescaled(DiscountedModel::new(d.clone(), v)?, 400)?;
            let phi = t.phi();
            let mut worst: f64 = 0.0;
            for z in [phi / 4.0, phi / 2.0, 0.75 * phi] {
                worst = worst.max(scale::gf_residual(&t, z)?).max(scale::z_gf_residual(&t, z)?);
            }
            Ok((worst <= 1e-10, format!("max residual {worst:.3e} (tol 1e-10)")))
        }));
        out.push(item(&format!("{name} finite-time ruin double transform"), || {
            let (v, z) = (0.95, 0.5);
            let want = passage::ruin_double_transform(d, v, z)?;
            let mut residuals = Vec::new();
            for n in [50, 100, 200, 400] {
                let dp = passage::finite_time_ruin(d, n, n);
                residuals.push((dp.ruin_double_sum(v, z) - want).abs());
            }
            let monotone = residuals.windows(2).all(|r| r[1] < r[0]);
            let last = residuals[3];
            Ok((last <= 1e-4 && monotone, format!("residual {last:.3e} at N = X = 400, decaying: {monotone}")))
        }));
    }
    out
}

/// Runs every golden item against the given claim laws, in a fixed order.
pub fn run_examples_with(models: &GoldenModels) -> Vec<GoldenItem> {
    let mut out = three_point_items(&models.three_point);
    out.extend(modified_geometric_items());
    out.extend(morrill_items(&models.morrill));
    out.extend(gsy_items(&models.gsy));
    out.extend(residual_items(models));
    out
}

pub fn run_examples() -> Vec<GoldenItem> {
    run_examples_with(&GoldenModels::published())
}
