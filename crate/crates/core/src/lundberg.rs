//! The Lundberg root `φ_v` (smallest solution of `ξ = v p̃(ξ)` in `(0, 1]`),
//! the closed-form root pair of the modified geometric family, and the law
//! of the upward passage time.

use crate::error::{domain, Error, Result};
use crate::model::ClaimDistribution;

const BISECT_TOL: f64 = 1e-15;
const BISECT_MAX_ITER: usize = 200;

/// Bisection for a root of an increasing-through-zero `f` with
/// `f(lo) < 0 <= f(hi)`.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..BISECT_MAX_ITER {
        if hi - lo <= BISECT_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if f(hi).abs() <= f(lo).abs() {
        hi
    } else {
        lo
    }
}

/// `φ_v = E[v^{τ_1^+}; τ_1^+ < ∞]`.
pub fn phi(dist: &ClaimDistribution, v: f64) -> Result<f64> {
    if !(v > 0.0 && v <= 1.0) {
        return domain(format!("discount factor {v} outside (0, 1]"));
    }
    let g = |xi: f64| xi - v * dist.pgf_unchecked(xi);
    if v < 1.0 {
        return Ok(bisect(g, 0.0, v));
    }
    if dist.mean() <= 1.0 {
        return Ok(1.0);
    }
    // Supercritical at v = 1: the concave g peaks where p̃'(ξ*) = 1 and the
    // smaller fixed point lies to the left of the peak.
    let peak = bisect(|xi| dist.pgf_derivative(xi) - 1.0, 0.0, 1.0);
    Ok(bisect(g, 0.0, peak))
}

/// Roots `φ_v <= 1 < R_v` of `p̃(z) - z/v = k_v (z - φ_v)(z - R_v)` for the
/// modified geometric family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootPair {
    pub phi: f64,
    pub r: f64,
    pub k: f64,
}

pub fn root_pair_modified_geometric(dist: &ClaimDistribution, v: f64) -> Result<RootPair> {
    let (p0, p1, alpha) = dist.modified_geometric_params().ok_or(Error::WrongKind)?;
    if !(v > 0.0 && v <= 1.0) {
        return domain(format!("discount factor {v} outside (0, 1]"));
    }
    let k = (1.0 - alpha) * (1.0 - p0) - p1 + alpha / v;
    if !(k > 0.0) {
        return domain("quadratic Lundberg equation degenerates (p0 + p1 = 1)");
    }
    let b = p1 - alpha * p0 - 1.0 / v;
    let disc = (b * b - 4.0 * k * p0).max(0.0);
    // b < 0, so the larger root comes without cancellation; Vieta gives the other.
    let q = 0.5 * (-b + disc.sqrt());
    let r = q / k;
    let phi = p0 / q;
    Ok(RootPair { phi, r, k })
}

/// Truncated convolution powers `p^{n*}` restricted to indices `< len`.
struct ConvolutionPowers {
    base: Vec<f64>,
    current: Vec<f64>,
}

impl ConvolutionPowers {
    fn new(dist: &ClaimDistribution, len: usize) -> Self {
        let mut current = vec![0.0; len];
        if len > 0 {
            current[0] = 1.0;
        }
        Self { base: dist.pmf_prefix(len), current }
    }

    /// Advances from `p^{n*}` to `p^{(n+1)*}`.
    fn step(&mut self) -> &[f64] {
        let len = self.current.len();
        let mut next = vec![0.0; len];
        for (i, &a) in self.current.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in self.base[..len - i].iter().enumerate() {
                next[i + j] += a * b;
            }
        }
        self.current = next;
        &self.current
    }
}

/// Kemperman: `P[τ_b^+ = n] = (b/n) p^{n*}(n - b)`, for `n = 0..=n_max`.
pub fn upcrossing_pmf(dist: &ClaimDistribution, b: usize, n_max: usize) -> Result<Vec<f64>> {
    if b < 1 || n_max < b {
        return domain(format!("need 1 <= b <= n_max (b = {b}, n_max = {n_max})"));
    }
    let mut out = vec![0.0; n_max + 1];
    let mut powers = ConvolutionPowers::new(dist, n_max - b + 1);
    for n in 1..=n_max {
        let pn = powers.step();
        if n >= b {
            out[n] = b as f64 / n as f64 * pn[n - b];
        }
    }
    Ok(out)
}

/// Lagrange series `sum_{n=1}^{n_max} (v^n/n) p^{n*}(n-1)`; a cross-check
/// for [`phi`].
pub fn lagrange_series_phi(dist: &ClaimDistribution, v: f64, n_max: usize) -> Result<f64> {
    if !(v > 0.0 && v < 1.0) {
        return domain(format!("series requires v in (0, 1), got {v}"));
    }
    let mut powers = ConvolutionPowers::new(dist, n_max);
    let mut vn = 1.0;
    let mut acc = 0.0;
    for n in 1..=n_max {
        let pn = powers.step();
        vn *= v;
        acc += vn / n as f64 * pn[n - 1];
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn three_point() -> ClaimDistribution {
        ClaimDistribution::from_strs(&["2/3", "2/9", "0", "1/9"]).unwrap()
    }

    fn morrill() -> ClaimDistribution {
        ClaimDistribution::from_strs(&["12/13", "0", "0", "1/13"]).unwrap()
    }

    fn residual(d: &ClaimDistribution, v: f64, xi: f64) -> f64 {
        (xi - v * d.pgf_unchecked(xi)).abs()
    }

    #[test]
    fn subcritical_unit_discount_is_one() {
        assert_eq!(phi(&three_point(), 1.0).unwrap(), 1.0);
        let critical = ClaimDistribution::from_pmf(&[0.5, 0.0, 0.5]).unwrap();
        assert_eq!(phi(&critical, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn supercritical_unit_discount() {
        // p̃(ξ) = 0.4 + 0.6 ξ^2 -> roots 2/3 and 1
        let d = ClaimDistribution::from_pmf(&[0.4, 0.0, 0.6]).unwrap();
        let f = phi(&d, 1.0).unwrap();
        assert!((f - 2.0 / 3.0).abs() < 1e-14, "{f}");
    }

    #[test]
    fn morrill_root_and_lagrange() {
        let d = morrill();
        let v = 65.0 / 72.0;
        let f = phi(&d, v).unwrap();
        assert!(residual(&d, v, f) < 1e-14);
        assert!(f < v);
        let series = lagrange_series_phi(&d, v, 200).unwrap();
        assert!((series - f).abs() < 1e-10, "{series} vs {f}");
    }

    #[test]
    fn lagrange_series_small_cases() {
        let d = three_point();
        assert!((lagrange_series_phi(&d, 0.3, 1).unwrap() - 0.3 * 2.0 / 3.0).abs() < 1e-16);
        let f = phi(&d, 0.5).unwrap();
        assert!((lagrange_series_phi(&d, 0.5, 100).unwrap() - f).abs() < 1e-10);
        let tiny = 1e-6;
        assert!((phi(&d, tiny).unwrap() / (tiny * 2.0 / 3.0) - 1.0).abs() < 1e-5);
        assert!(lagrange_series_phi(&d, 1.0, 10).is_err());
    }

    #[test]
    fn kemperman_small_cases() {
        let d = three_point();
        let pmf = upcrossing_pmf(&d, 1, 2).unwrap();
        assert!((pmf[1] - 2.0 / 3.0).abs() < 1e-16);
        assert!((pmf[2] - 4.0 / 27.0).abs() < 1e-16);
        let pmf3 = upcrossing_pmf(&d, 3, 5).unwrap();
        assert_eq!(&pmf3[..3], &[0.0, 0.0, 0.0]);
        assert!(upcrossing_pmf(&d, 0, 5).is_err());
        assert!(upcrossing_pmf(&d, 4, 3).is_err());
    }

    #[test]
    fn kemperman_generating_function_is_phi_power() {
        let d = three_point();
        let v = 0.8;
        let f = phi(&d, v).unwrap();
        for b in 1..4 {
            let pmf = upcrossing_pmf(&d, b, 400).unwrap();
            let gf: f64 = pmf.iter().enumerate().map(|(n, p)| v.powi(n as i32) * p).sum();
            assert!((gf - f.powi(b as i32)).abs() < 1e-12, "b={b}: {gf}");
        }
    }

    #[test]
    fn kemperman_additivity() {
        let d = morrill();
        let n = 60;
        let a = upcrossing_pmf(&d, 2, n).unwrap();
        let b = upcrossing_pmf(&d, 3, n).unwrap();
        let ab = upcrossing_pmf(&d, 5, n).unwrap();
        for m in 0..=n {
            let conv: f64 = (0..=m).map(|i| a[i] * b[m - i]).sum();
            assert!((conv - ab[m]).abs() < 1e-12);
        }
        assert!(ab.iter().all(|p| (0.0..=1.0).contains(p)));
        assert!(ab.iter().sum::<f64>() <= 1.0 + 1e-12);
    }

    #[test]
    fn root_pair_gamblers_ruin() {
        // alpha = 0: claims in {0, 1, 2}
        let d = ClaimDistribution::modified_geometric(0.6, 0.1, 0.0).unwrap();
        let rp = root_pair_modified_geometric(&d, 1.0).unwrap();
        assert!((rp.phi - 1.0).abs() < 1e-15);
        assert!((1.0 / rp.r - 0.3 / 0.6).abs() < 1e-15);
    }

    #[test]
    fn root_pair_unit_discount_subcritical() {
        let (p0, p1, alpha) = (0.6, 0.1, 0.5);
        let d = ClaimDistribution::modified_geometric(p0, p1, alpha).unwrap();
        let rp = root_pair_modified_geometric(&d, 1.0).unwrap();
        assert!((rp.phi - 1.0).abs() < 1e-14);
        assert!((rp.r - p0 / (1.0 - p1 - (1.0 - alpha) * p0)).abs() < 1e-13);
        assert_eq!(root_pair_modified_geometric(&three_point(), 0.5), Err(Error::WrongKind));
    }

    fn mg_params() -> impl Strategy<Value = (f64, f64, f64, f64)> {
        (0.05f64..0.95, 0.0f64..0.98, 0.0f64..0.95, 0.05f64..0.999)
            .prop_map(|(p0, s, alpha, v)| (p0, s * (1.0 - p0), alpha, v))
    }

    proptest! {
        #[test]
        fn root_pair_matches_bisection((p0, p1, alpha, v) in mg_params()) {
            let d = ClaimDistribution::modified_geometric(p0, p1, alpha).unwrap();
            let rp = root_pair_modified_geometric(&d, v).unwrap();
            let f = phi(&d, v).unwrap();
            prop_assert!((rp.phi - f).abs() < 1e-12, "{} vs {}", rp.phi, f);
            prop_assert!(rp.phi <= 1.0 + 1e-12 && rp.r > 1.0);
            prop_assert!((rp.phi * rp.r - p0 / rp.k).abs() < 1e-12 * (1.0 + p0 / rp.k));
        }

        #[test]
        fn phi_monotone_and_bounded(
            masses in proptest::collection::vec(0.0f64..1.0, 1..6),
            p0 in 0.05f64..1.0,
            v1 in 0.01f64..0.99,
            dv in 0.001f64..0.5,
        ) {
            let mut raw = vec![p0];
            raw.extend(masses);
            let total: f64 = raw.iter().sum();
            let raw: Vec<f64> = raw.iter().map(|p| p / total).collect();
            let d = ClaimDistribution::from_pmf(&raw).unwrap();
            let v2 = (v1 + dv).min(1.0);
            let f1 = phi(&d, v1).unwrap();
            let f2 = phi(&d, v2).unwrap();
            prop_assert!(f1 < f2);
            prop_assert!(f1 <= v1);
            prop_assert!(residual(&d, v1, f1) <= 1e-14);
            prop_assert!(residual(&d, v2, f2) <= 1e-14);
        }
    }
}
