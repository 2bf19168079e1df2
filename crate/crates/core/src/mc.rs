//! Monte Carlo oracle for the walk `X_n = x + n - (C_1 + ... + C_n)` and
//! its reflections.
//!
//! Every path draws its claims from its own ChaCha8 stream: the generator is
//! seeded with `seed` and switched to stream `path_index`, and claims are
//! obtained by inverting the claim CDF at a uniform from `[0, 1)`. Results
//! are therefore bit-reproducible and independent of the thread count.
//! Discounting is applied analytically (`v^n` weights), never by sampling a
//! killing time.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::model::ClaimDistribution;

/// Target bound on the truncation error of discounted functionals.
pub const TRUNCATION_TOL: f64 = 1e-10;
/// Horizon used for undiscounted functionals unless overridden.
pub const DEFAULT_UNDISCOUNTED_CAP: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "b")]
pub enum Policy {
    Free,
    /// Dividends: every excess over `b` is paid out; ruined below 0.
    ReflectUpper(i64),
    /// Capital injections: every shortfall below 0 is covered; no ruin.
    ReflectLower,
    DoublyReflected(i64),
}

/// Path functionals. Ruin means entering `{-1, -2, ...}`; `level`s are
/// upward passage levels, reached exactly thanks to skip-freeness.
#[derive(Debug, Clone, PartialEq)]
pub enum Functional {
    /// `v^{τ_level^+}` on `{τ_level^+ < ∞}` (ruin ignored).
    UpcrossingTransform { level: i64 },
    /// `v^{τ_level^+}` on `{τ_level^+ < τ^-}`.
    TwoSidedUp { level: i64 },
    /// `v^{τ^-} w^{-X_{τ^-}}` on `{τ^- < τ_upper^+}` (or `{τ^- < ∞}`).
    DeficitTransform { w: f64, upper: Option<i64> },
    /// `v^{τ^-} X_{τ^-}` on `{τ^- < τ_upper^+}`.
    ExpectedDeficit { upper: Option<i64> },
    /// `v^{τ^-}` on `{τ^- < ∞}`, for the free or dividend-reflected walk.
    Ruin,
    /// `sum_{n < exit} v^n 1(X_n = j)` for the exit from `{0, ..., level-1}`.
    KilledOccupation { j: i64, level: i64 },
    /// `weight(X_σ) v^σ` on `{σ < τ_level^+}`, `σ` the first time below `b`;
    /// `weights[y]` for `y >= 0`, zero below.
    DowncrossingWeighted { b: i64, level: i64, weights: Vec<f64> },
    /// `sum_n v^n r(n)`, dividends paid until ruin.
    Dividends,
    /// `v^T̃ w^{-X̃_T̃} z^{R(T̃)}` on `{T̃ < ∞}`.
    DividendsDeficit { w: f64, z: f64 },
    /// `v^T̃ (-X̃_T̃)` on `{T̃ < ∞}`.
    Bailout,
    /// `sum_n v^n r_*(n)`, capital injected.
    Injections,
    /// `v^{τ̃_level^+} w^{R_*(τ̃_level^+)}` on `{τ̃_level^+ < ∞}`.
    InjectionsTransform { w: f64, level: i64 },
}

impl Functional {
    pub fn name(&self) -> &'static str {
        match self {
            Functional::UpcrossingTransform { .. } => "upcrossing_transform",
            Functional::TwoSidedUp { .. } => "two_sided_up",
            Functional::DeficitTransform { .. } => "deficit_transform",
            Functional::ExpectedDeficit { .. } => "expected_deficit",
            Functional::Ruin => "ruin",
            Functional::KilledOccupation { .. } => "killed_occupation",
            Functional::DowncrossingWeighted { .. } => "downcrossing_weighted",
            Functional::Dividends => "dividends",
            Functional::DividendsDeficit { .. } => "dividends_deficit",
            Functional::Bailout => "bailout",
            Functional::Injections => "injections",
            Functional::InjectionsTransform { .. } => "injections_transform",
        }
    }

    fn allows(&self, policy: Policy) -> bool {
        use Functional::*;
        match self {
            UpcrossingTransform { .. }
            | TwoSidedUp { .. }
            | DeficitTransform { .. }
            | ExpectedDeficit { .. }
            | KilledOccupation { .. }
            | DowncrossingWeighted { .. } => policy == Policy::Free,
            Ruin => matches!(policy, Policy::Free | Policy::ReflectUpper(_)),
            DividendsDeficit { .. } | Bailout => matches!(policy, Policy::ReflectUpper(_)),
            Dividends => matches!(policy, Policy::ReflectUpper(_) | Policy::DoublyReflected(_)),
            Injections => matches!(policy, Policy::ReflectLower | Policy::DoublyReflected(_)),
            InjectionsTransform { .. } => policy == Policy::ReflectLower,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub n_paths: usize,
    pub seed: u64,
    /// Overrides the automatic horizon.
    pub horizon_cap: Option<usize>,
}

impl McConfig {
    pub fn new(n_paths: usize, seed: u64) -> Self {
        McConfig { n_paths, seed, horizon_cap: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(n_paths)`; infinite for one path.
    pub std_error: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub horizon_cap: usize,
    /// Fraction of paths still running when the horizon was reached.
    pub capped_fraction: f64,
}

/// Inverse-CDF claim sampler.
#[derive(Debug, Clone)]
enum Sampler {
    Table(Vec<f64>),
    ModifiedGeometric { p0: f64, p01: f64, r: f64, ln_alpha: f64 },
}

impl Sampler {
    fn new(dist: &ClaimDistribution) -> Self {
        if let Some((p0, p1, alpha)) = dist.modified_geometric_params() {
            return Sampler::ModifiedGeometric {
                p0,
                p01: p0 + p1,
                r: 1.0 - p0 - p1,
                ln_alpha: alpha.ln(),
            };
        }
        let n = dist.support_max().expect("table claim laws have finite support");
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = dist
            .pmf_prefix(n + 1)
            .into_iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        *cdf.last_mut().unwrap() = f64::INFINITY;
        Sampler::Table(cdf)
    }

    fn draw(&self, u: f64) -> i64 {
        match *self {
            Sampler::Table(ref cdf) => cdf.partition_point(|&c| c <= u) as i64,
            Sampler::ModifiedGeometric { p0, p01, r, ln_alpha } => {
                if u < p0 {
                    0
                } else if u < p01 || r <= 0.0 {
                    1
                } else {
                    let u = ((u - p01) / r).min(1.0 - f64::EPSILON);
                    let extra = (1.0 - u).ln() / ln_alpha;
                    if extra.is_finite() { 2 + extra.floor() as i64 } else { 2 }
                }
            }
        }
    }
}

/// The reserve under a policy, one period at a time.
#[derive(Debug, Clone, Copy)]
struct Walker {
    x: i64,
    upper: Option<i64>,
    lower: bool,
}

impl Walker {
    /// Applies the time-0 adjustments; returns `(walker, dividend, injection)`.
    fn start(policy: Policy, x0: i64) -> (Self, i64, i64) {
        let (upper, lower) = match policy {
            Policy::Free => (None, false),
            Policy::ReflectUpper(b) => (Some(b), false),
            Policy::ReflectLower => (None, true),
            Policy::DoublyReflected(b) => (Some(b), true),
        };
        let mut w = Walker { x: x0, upper, lower };
        let (d, i) = w.regulate();
        (w, d, i)
    }

    fn regulate(&mut self) -> (i64, i64) {
        let mut injection = 0;
        if self.lower && self.x < 0 {
            injection = -self.x;
            self.x = 0;
        }
        let mut dividend = 0;
        if let Some(b) = self.upper {
            if self.x > b {
                dividend = self.x - b;
                self.x = b;
            }
        }
        (dividend, injection)
    }

    fn step(&mut self, claim: i64) -> (i64, i64) {
        self.x += 1 - claim;
        self.regulate()
    }

    fn ruined(&self) -> bool {
        !self.lower && self.x < 0
    }
}

/// One recorded period of a replayed path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Step {
    pub claim: i64,
    pub reserve: i64,
    pub dividend: i64,
    pub injection: i64,
}

fn path_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Replays `steps` periods of path `index` (stopping at ruin); the first
/// entry records the time-0 adjustments with `claim = 0`.
pub fn replay_path(
    dist: &ClaimDistribution,
    x0: i64,
    policy: Policy,
    steps: usize,
    seed: u64,
    index: u64,
) -> Vec<Step> {
    let sampler = Sampler::new(dist);
    let mut rng = path_rng(seed, index);
    let (mut walker, dividend, injection) = Walker::start(policy, x0);
    let mut out = vec![Step { claim: 0, reserve: walker.x, dividend, injection }];
    for _ in 0..steps {
        if walker.ruined() {
            break;
        }
        let claim = sampler.draw(rng.random());
        let (dividend, injection) = walker.step(claim);
        out.push(Step { claim, reserve: walker.x, dividend, injection });
    }
    out
}

/// Horizon making the discounted tail beyond it smaller than
/// [`TRUNCATION_TOL`], or [`DEFAULT_UNDISCOUNTED_CAP`] for `v = 1`.
pub fn default_horizon(dist: &ClaimDistribution, v: f64) -> usize {
    if v >= 1.0 {
        return DEFAULT_UNDISCOUNTED_CAP;
    }
    let mean = dist.mean();
    let scale = if mean.is_finite() { mean.max(1.0) } else { 1.0 };
    let n = (TRUNCATION_TOL * (1.0 - v) / scale).ln() / v.ln();
    n.ceil().max(1.0) as usize
}

struct PathRun<'a> {
    sampler: &'a Sampler,
    x0: i64,
    policy: Policy,
    v: f64,
    functional: &'a Functional,
    cap: usize,
}

impl PathRun<'_> {
    /// Returns the functional on this path and whether it hit the horizon.
    fn run(&self, rng: &mut ChaCha8Rng) -> (f64, bool) {
        use Functional::*;
        let (mut walker, mut div, mut inj) = Walker::start(self.policy, self.x0);
        let (mut total_div, mut total_inj) = (0i64, 0i64);
        let mut disc = 1.0;
        let mut acc = 0.0;
        let mut n = 0usize;
        loop {
            total_div += div;
            total_inj += inj;
            let x = walker.x;
            match *self.functional {
                UpcrossingTransform { level } => {
                    if x >= level {
                        return (disc, false);
                    }
                }
                TwoSidedUp { level } => {
                    if x >= level {
                        return (disc, false);
                    }
                    if x < 0 {
                        return (0.0, false);
                    }
                }
                DeficitTransform { w, upper } => {
                    if x < 0 {
                        return (disc * w.powf(-x as f64), false);
                    }
                    if upper.is_some_and(|u| x >= u) {
                        return (0.0, false);
                    }
                }
                ExpectedDeficit { upper } => {
                    if x < 0 {
                        return (disc * x as f64, false);
                    }
                    if upper.is_some_and(|u| x >= u) {
                        return (0.0, false);
                    }
                }
                Ruin => {
                    if x < 0 {
                        return (disc, false);
                    }
                }
                KilledOccupation { j, level } => {
                    if x < 0 || x >= level {
                        return (acc, false);
                    }
                    if x == j {
                        acc += disc;
                    }
                }
                DowncrossingWeighted { b, level, ref weights } => {
                    if x < b {
                        let weight = if x < 0 { 0.0 } else { weights[x as usize] };
                        return (disc * weight, false);
                    }
                    if x >= level {
                        return (0.0, false);
                    }
                }
                Dividends => {
                    acc += disc * div as f64;
                    if walker.ruined() {
                        return (acc, false);
                    }
                }
                DividendsDeficit { w, z } => {
                    if x < 0 {
                        return (disc * w.powf(-x as f64) * z.powf(total_div as f64), false);
                    }
                }
                Bailout => {
                    if x < 0 {
                        return (disc * -x as f64, false);
                    }
                }
                Injections => acc += disc * inj as f64,
                InjectionsTransform { w, level } => {
                    if x >= level {
                        return (disc * w.powf(total_inj as f64), false);
                    }
                }
            }
            if n == self.cap {
                return (acc, true);
            }
            n += 1;
            disc *= self.v;
            let claim = self.sampler.draw(rng.random());
            (div, inj) = walker.step(claim);
        }
    }
}

/// Pairwise (cascade) summation.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 64 {
        return values.iter().sum();
    }
    let (a, b) = values.split_at(values.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// Mean and standard error (sample standard deviation over `sqrt(n)`).
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = pairwise_sum(values) / n;
    if values.len() < 2 {
        return (mean, f64::INFINITY);
    }
    let sq: Vec<f64> = values.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&sq) / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Estimates `E_{x0}[functional]` for the walk under `policy`, with
/// per-step discount `v`.
pub fn simulate(
    dist: &ClaimDistribution,
    x0: i64,
    policy: Policy,
    v: f64,
    functional: &Functional,
    config: &McConfig,
) -> Result<McEstimate> {
    if config.n_paths == 0 || config.horizon_cap == Some(0) {
        return Err(Error::InvalidFunctional("need at least one path and one step".into()));
    }
    if !(v > 0.0 && v <= 1.0) {
        return Err(Error::Domain(format!("discount v = {v} outside (0, 1]")));
    }
    if !functional.allows(policy) {
        return Err(Error::InvalidFunctional(format!(
            "{} is not defined under policy {policy:?}",
            functional.name()
        )));
    }
    match *functional {
        Functional::DeficitTransform { w, .. } | Functional::InjectionsTransform { w, .. }
            if !(w > 0.0 && w <= 1.0) =>
        {
            return Err(Error::Domain(format!("w = {w} outside (0, 1]")));
        }
        Functional::DividendsDeficit { w, z } if !(w > 0.0 && w <= 1.0 && z > 0.0 && z <= 1.0) => {
            return Err(Error::Domain(format!("w = {w}, z = {z} must lie in (0, 1]")));
        }
        _ => {}
    }
    let cap = config.horizon_cap.unwrap_or_else(|| default_horizon(dist, v));
    let sampler = Sampler::new(dist);
    let run = PathRun { sampler: &sampler, x0, policy, v, functional, cap };
    let results: Vec<(f64, bool)> = (0..config.n_paths as u64)
        .into_par_iter()
        .map(|i| run.run(&mut path_rng(config.seed, i)))
        .collect();
    let values: Vec<f64> = results.iter().map(|r| r.0).collect();
    let capped = results.iter().filter(|r| r.1).count();
    let (mean, std_error) = mean_and_se(&values);
    Ok(McEstimate {
        mean,
        std_error,
        n_paths: config.n_paths,
        seed: config.seed,
        horizon_cap: cap,
        capped_fraction: capped as f64 / config.n_paths as f64,
    })
}

/// Samples the cumulative dividends `R(T̃ ∧ E_v - 1)` of the walk reflected
/// at `b` and started there, `E_v` an independent geometric time on
/// `{1, 2, ...}` with `P(E_v > n) = v^n`. Here killing is sampled, since a
/// law rather than a mean is wanted.
pub fn killed_dividends_sample(
    dist: &ClaimDistribution,
    b: i64,
    v: f64,
    n_paths: usize,
    seed: u64,
) -> Result<Vec<u64>> {
    if !(v > 0.0 && v < 1.0) || b < 0 {
        return Err(Error::Domain(format!("need v in (0, 1) and b >= 0 (v = {v}, b = {b})")));
    }
    let sampler = Sampler::new(dist);
    Ok((0..n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(seed, i);
            let (mut walker, _, _) = Walker::start(Policy::ReflectUpper(b), b);
            let mut total = 0u64;
            loop {
                if rng.random::<f64>() >= v {
                    return total;
                }
                let (div, _) = walker.step(sampler.draw(rng.random()));
                if walker.ruined() {
                    return total;
                }
                total += div as u64;
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiSquareReport {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson goodness-of-fit of `sample` against the geometric law
/// `P(k) = p (1 - p)^k` on `{0, 1, ...}`; cells with expected count below 5
/// are pooled into the tail cell.
pub fn geometric_chi_square(sample: &[u64], p: f64) -> Result<ChiSquareReport> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("geometric parameter {p} outside (0, 1)")));
    }
    let n = sample.len() as f64;
    let mut cells = 0usize;
    while n * p * (1.0 - p).powi(cells as i32 + 1) >= 5.0 {
        cells += 1;
    }
    // cells 0..cells-1 are single values; the last pools {cells, cells+1, ...}
    let mut observed = vec![0.0; cells + 1];
    for &k in sample {
        observed[(k as usize).min(cells)] += 1.0;
    }
    let mut statistic = 0.0;
    for (k, &o) in observed.iter().enumerate() {
        let prob = if k < cells { p * (1.0 - p).powi(k as i32) } else { (1.0 - p).powi(cells as i32) };
        let e = n * prob;
        statistic += (o - e) * (o - e) / e;
    }
    let dof = cells.max(1);
    let chi = ChiSquared::new(dof as f64).map_err(|e| Error::Domain(e.to_string()))?;
    Ok(ChiSquareReport { statistic, dof, p_value: 1.0 - chi.cdf(statistic) })
}
