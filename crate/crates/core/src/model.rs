//! Claim distributions of the compound binomial model and their discounted
//! pairing with a factor `v`.
//!
//! Two representations are supported: a dense finite table, and the
//! three-parameter modified geometric family (the only infinite-support law
//! the library deals with).

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::lundberg;

const SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClaimKind {
    Table,
    ModifiedGeometric,
}

#[derive(Debug, Clone, PartialEq)]
enum Law {
    /// `tails[k] = P(C > k)`, computed as suffix sums.
    Table { pmf: Vec<f64>, tails: Vec<f64> },
    ModifiedGeometric { p0: f64, p1: f64, alpha: f64 },
}

/// Law of a single claim `C_1` on the nonnegative integers, with `p_0 > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClaimDistribution {
    law: Law,
    mean: f64,
}

impl ClaimDistribution {
    /// Validates and normalizes a dense pmf `p_0, p_1, ...`.
    pub fn from_pmf(raw: &[f64]) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::NotADistribution("empty pmf".into()));
        }
        if !(raw[0] > 0.0) {
            return Err(Error::NonPositiveP0(raw[0]));
        }
        if let Some((k, p)) = raw.iter().enumerate().find(|(_, p)| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::NotADistribution(format!("p_{k} = {p}")));
        }
        let total: f64 = raw.iter().sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::NotADistribution(format!("masses sum to {total}")));
        }
        let mut pmf: Vec<f64> = raw.iter().map(|p| p / total).collect();
        while pmf.len() > 1 && pmf[pmf.len() - 1] == 0.0 {
            pmf.pop();
        }
        let mut tails = vec![0.0; pmf.len()];
        for k in (0..pmf.len().saturating_sub(1)).rev() {
            tails[k] = tails[k + 1] + pmf[k + 1];
        }
        let mean = pmf.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
        Ok(Self { law: Law::Table { pmf, tails }, mean })
    }

    /// Like [`from_pmf`](Self::from_pmf), but parses each mass from a
    /// rational (`"2/9"`) or decimal string first.
    pub fn from_strs<S: AsRef<str>>(raw: &[S]) -> Result<Self> {
        let pmf = raw
            .iter()
            .map(|s| parse_probability(s.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Self::from_pmf(&pmf)
    }

    /// `p_k = (1-alpha) alpha^{k-2} (1-p0-p1)` for `k >= 2`.
    pub fn modified_geometric(p0: f64, p1: f64, alpha: f64) -> Result<Self> {
        if !(p0 > 0.0) {
            return Err(Error::NonPositiveP0(p0));
        }
        if !(p0 < 1.0 + SUM_TOL && (0.0..1.0).contains(&p1) && (0.0..1.0).contains(&alpha)) {
            return Err(Error::NotADistribution(format!(
                "modified geometric parameters p0={p0}, p1={p1}, alpha={alpha}"
            )));
        }
        let r = 1.0 - p0 - p1;
        if r < -SUM_TOL {
            return Err(Error::NotADistribution(format!("p0 + p1 = {} exceeds 1", p0 + p1)));
        }
        let r = r.max(0.0);
        let mean = (1.0 - p0) + r / (1.0 - alpha);
        Ok(Self { law: Law::ModifiedGeometric { p0, p1, alpha }, mean })
    }

    pub fn kind(&self) -> ClaimKind {
        match self.law {
            Law::Table { .. } => ClaimKind::Table,
            Law::ModifiedGeometric { .. } => ClaimKind::ModifiedGeometric,
        }
    }

    /// `(p0, p1, alpha)` for the modified geometric family.
    pub fn modified_geometric_params(&self) -> Option<(f64, f64, f64)> {
        match self.law {
            Law::ModifiedGeometric { p0, p1, alpha } => Some((p0, p1, alpha)),
            Law::Table { .. } => None,
        }
    }

    pub fn p0(&self) -> f64 {
        self.pmf(0)
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Largest claim with positive mass, `None` for infinite support.
    pub fn support_max(&self) -> Option<usize> {
        match &self.law {
            Law::Table { pmf, .. } => Some(pmf.len() - 1),
            Law::ModifiedGeometric { p0, p1, .. } if p0 + p1 >= 1.0 => Some(1),
            Law::ModifiedGeometric { .. } => None,
        }
    }

    pub fn pmf(&self, k: usize) -> f64 {
        match &self.law {
            Law::Table { pmf, .. } => pmf.get(k).copied().unwrap_or(0.0),
            &Law::ModifiedGeometric { p0, p1, alpha } => match k {
                0 => p0,
                1 => p1,
                _ => (1.0 - alpha) * alpha.powi((k - 2) as i32) * (1.0 - p0 - p1).max(0.0),
            },
        }
    }

    /// `p_0, ..., p_{len-1}`.
    pub fn pmf_prefix(&self, len: usize) -> Vec<f64> {
        match &self.law {
            Law::Table { pmf, .. } => (0..len).map(|k| pmf.get(k).copied().unwrap_or(0.0)).collect(),
            &Law::ModifiedGeometric { alpha, .. } => {
                let mut out = Vec::with_capacity(len);
                for k in 0..len {
                    let p = if k < 3 { self.pmf(k) } else { out[k - 1] * alpha };
                    out.push(p);
                }
                out
            }
        }
    }

    /// `P(C_1 > k)`.
    pub fn tail(&self, k: usize) -> f64 {
        match &self.law {
            Law::Table { tails, .. } => tails.get(k).copied().unwrap_or(0.0),
            &Law::ModifiedGeometric { p0, p1, alpha } => {
                let r = (1.0 - p0 - p1).max(0.0);
                if k == 0 {
                    p1 + r
                } else {
                    r * alpha.powi((k - 1) as i32)
                }
            }
        }
    }

    /// `T(x, w) = sum_{k > x} w^{k-x} p_{k+1}`, the tail term of the
    /// `Z(., w)` recursion.
    pub fn weighted_tail(&self, x: usize, w: f64) -> f64 {
        match &self.law {
            Law::Table { pmf, .. } => {
                let mut acc = 0.0;
                let mut wp = 1.0;
                for p in pmf.iter().skip(x + 2) {
                    wp *= w;
                    acc += wp * p;
                }
                acc
            }
            &Law::ModifiedGeometric { p0, p1, alpha } => {
                let r = (1.0 - p0 - p1).max(0.0);
                (1.0 - alpha) * r * alpha.powi(x as i32) * w / (1.0 - alpha * w)
            }
        }
    }

    /// `p̃(z)` for `z` in `(0, 1]`.
    pub fn pgf(&self, z: f64) -> Result<f64> {
        if !(z > 0.0 && z <= 1.0) {
            return domain(format!("pgf argument {z} outside (0, 1]"));
        }
        Ok(self.pgf_unchecked(z))
    }

    /// `p̃(z)` without the domain check; valid on `[0, 1]` and, for finite
    /// tables, everywhere. Modified geometric requires `alpha z < 1`.
    pub fn pgf_unchecked(&self, z: f64) -> f64 {
        match &self.law {
            Law::Table { pmf, .. } => pmf.iter().rev().fold(0.0, |acc, p| acc * z + p),
            &Law::ModifiedGeometric { p0, p1, alpha } => {
                let c2 = (1.0 - alpha) * (1.0 - p0) - p1;
                (p0 + z * (p1 - alpha * p0) + z * z * c2) / (1.0 - alpha * z)
            }
        }
    }

    /// `p̃'(z)`.
    pub fn pgf_derivative(&self, z: f64) -> f64 {
        match &self.law {
            Law::Table { pmf, .. } => pmf
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (k, p)| acc * z + k as f64 * p),
            &Law::ModifiedGeometric { p0, p1, alpha } => {
                let c1 = p1 - alpha * p0;
                let c2 = (1.0 - alpha) * (1.0 - p0) - p1;
                let num = p0 + z * c1 + z * z * c2;
                let den = 1.0 - alpha * z;
                ((c1 + 2.0 * z * c2) * den + alpha * num) / (den * den)
            }
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ModelSpec =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        spec.build()
    }
}

/// Parses `"a/b"`, a decimal string, or anything `f64` understands.
///
/// Rationals and plain decimals are read as exact integers and converted with
/// a single division, so `"2/3"` carries one rounding only.
pub fn parse_probability(text: &str) -> Result<f64> {
    let s = text.trim();
    let bad = || Error::Parse(text.to_string());
    if let Some((num, den)) = s.split_once('/') {
        let (n, ns) = parse_exact_decimal(num.trim()).ok_or_else(bad)?;
        let (d, ds) = parse_exact_decimal(den.trim()).ok_or_else(bad)?;
        if d == 0 {
            return Err(bad());
        }
        // n/10^ns ÷ d/10^ds
        let (n, d) = if ns >= ds {
            (n, d.checked_mul(10i128.checked_pow(ns - ds).ok_or_else(bad)?).ok_or_else(bad)?)
        } else {
            (n.checked_mul(10i128.checked_pow(ds - ns).ok_or_else(bad)?).ok_or_else(bad)?, d)
        };
        return Ok(n as f64 / d as f64);
    }
    if let Some((n, scale)) = parse_exact_decimal(s) {
        let d = 10i128.checked_pow(scale).ok_or_else(bad)?;
        return Ok(n as f64 / d as f64);
    }
    s.parse::<f64>().map_err(|_| bad())
}

/// `"-12.345"` -> `(-12345, 3)`; `None` for exponents or overflow.
fn parse_exact_decimal(s: &str) -> Option<(i128, u32)> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let mut n: i128 = 0;
    for c in int.chars().chain(frac.chars()) {
        n = n.checked_mul(10)?.checked_add(c.to_digit(10)? as i128)?;
    }
    Some((if neg { -n } else { n }, frac.len() as u32))
}

/// A probability as it appears in a model file: string or bare number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Probability {
    Text(String),
    Number(f64),
}

impl Probability {
    pub fn value(&self) -> Result<f64> {
        match self {
            Probability::Text(s) => parse_probability(s),
            Probability::Number(x) => Ok(*x),
        }
    }
}

/// Model file schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Table {
        pmf: Vec<Probability>,
    },
    ModifiedGeometric {
        p0: Probability,
        p1: Probability,
        alpha: Probability,
    },
}

impl ModelSpec {
    pub fn build(&self) -> Result<ClaimDistribution> {
        match self {
            ModelSpec::Table { pmf } => {
                let raw = pmf.iter().map(Probability::value).collect::<Result<Vec<_>>>()?;
                ClaimDistribution::from_pmf(&raw)
            }
            ModelSpec::ModifiedGeometric { p0, p1, alpha } => {
                ClaimDistribution::modified_geometric(p0.value()?, p1.value()?, alpha.value()?)
            }
        }
    }
}

/// A claim law paired with a discount factor and its Lundberg root.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscountedModel {
    dist: ClaimDistribution,
    v: f64,
    phi: f64,
}

impl DiscountedModel {
    pub fn new(dist: ClaimDistribution, v: f64) -> Result<Self> {
        if !(v > 0.0 && v <= 1.0) {
            return domain(format!("discount factor {v} outside (0, 1]"));
        }
        let phi = lundberg::phi(&dist, v)?;
        Ok(Self { dist, v, phi })
    }

    pub fn dist(&self) -> &ClaimDistribution {
        &self.dist
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    /// Cached `φ_v`.
    pub fn phi(&self) -> f64 {
        self.phi
    }
}
