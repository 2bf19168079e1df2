//! Scale-function tables `W_v`, `Z_v`, `Z_{1,v}` and `Z_v(., w)`, built by
//! forward recursion, plus the independent oracles used to check them.
//!
//! Tables can be stored plainly or rescaled: in rescaled mode entry `x`
//! holds `f(x) φ_v^x`, which stays bounded where `W_v` itself would
//! overflow. The `*_scaled(x, e)` accessors return `f(x) φ_v^e` in either
//! mode; with `e` close to `x` they are overflow-free, and every ratio
//! computed downstream goes through them.

use crate::error::{domain, Error, Result};
use crate::model::{ClaimDistribution, DiscountedModel};

#[derive(Debug, Clone)]
pub struct ScaleTable {
    model: DiscountedModel,
    x_max: usize,
    rescaled: bool,
    w: Vec<f64>,
    w_bar: Vec<f64>,
    z: Vec<f64>,
    z_bar: Vec<f64>,
    z1: Vec<f64>,
}

/// `base^n` for possibly huge `|n|`.
fn pow(base: f64, n: i64) -> f64 {
    if base == 1.0 || n == 0 {
        1.0
    } else if let Ok(n) = i32::try_from(n) {
        base.powi(n)
    } else {
        base.powf(n as f64)
    }
}

/// Forward solve of the harmonic recursion in storage space, where
/// `s` is the per-step scale (1 or `φ_v`).
fn harmonic_recursion(dist: &ClaimDistribution, v: f64, s: f64, x_max: usize) -> Vec<f64> {
    let p0 = dist.p0();
    let support = dist.support_max().map_or(x_max + 1, |m| m.min(x_max + 1));
    let q: Vec<f64> = dist
        .pmf_prefix(support + 1)
        .iter()
        .enumerate()
        .map(|(j, p)| p * pow(s, j as i64))
        .collect();
    let mut w = Vec::with_capacity(x_max + 1);
    w.push(1.0 / p0);
    for x in 0..x_max {
        let mut acc = w[x] * s / v;
        for y in 0..=x.min(support - 1) {
            acc -= w[x - y] * q[y + 1];
        }
        w.push(acc / p0);
    }
    w
}

/// Positive-coefficient form `W(n+1) = W(0) + sum_k c_k W(n+1-k)` with
/// `c_k = (1/v - F(k))/p_0`, in storage space.
fn alternative_recursion(dist: &ClaimDistribution, v: f64, s: f64, x_max: usize) -> Vec<f64> {
    let p0 = dist.p0();
    let pmf = dist.pmf_prefix(x_max + 1);
    let mut c = Vec::with_capacity(x_max + 1);
    c.push(0.0);
    let mut cdf = p0;
    for (k, p) in pmf.iter().enumerate().skip(1) {
        cdf += p;
        c.push((1.0 / v - cdf.min(1.0)).max(0.0) / p0 * pow(s, k as i64));
    }
    let mut w = Vec::with_capacity(x_max + 1);
    w.push(1.0 / p0);
    for n in 1..=x_max {
        let mut acc = pow(s, n as i64) / p0;
        for k in 1..=n {
            acc += c[k] * w[n - k];
        }
        w.push(acc);
    }
    w
}

fn exclusive_cumsum(values: &[f64], s: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    for &f in values {
        out.push(acc);
        acc = s * (acc + f);
    }
    out
}

impl ScaleTable {
    /// Plain table on `{0, ..., x_max}`; fails with `Overflow` if `W_v`
    /// leaves the floating-point range.
    pub fn new(model: DiscountedModel, x_max: usize) -> Result<Self> {
        Self::build(model, x_max, false)
    }

    /// Table storing `f(x) φ_v^x`.
    pub fn rescaled(model: DiscountedModel, x_max: usize) -> Result<Self> {
        Self::build(model, x_max, true)
    }

    pub fn build(model: DiscountedModel, x_max: usize, rescaled: bool) -> Result<Self> {
        let dist = model.dist();
        if !dist.mean().is_finite() {
            return Err(Error::InfiniteMean);
        }
        let v = model.v();
        let s = if rescaled { model.phi() } else { 1.0 };
        let w = harmonic_recursion(dist, v, s, x_max);
        let w_bar = exclusive_cumsum(&w, s);
        let c = 1.0 / v - 1.0;
        let z: Vec<f64> = (0..=x_max)
            .map(|x| pow(s, x as i64) + c * w_bar[x])
            .collect();
        let z_bar = exclusive_cumsum(&z, s);
        let drift = 1.0 - dist.mean();
        let z1: Vec<f64> = z_bar.iter().zip(&w_bar).map(|(zb, wb)| zb - drift * wb).collect();
        for series in [&w, &z, &z1] {
            if let Some(x) = series.iter().position(|f| !f.is_finite()) {
                return Err(Error::Overflow { x });
            }
        }
        Ok(Self { model, x_max, rescaled, w, w_bar, z, z_bar, z1 })
    }

    pub fn model(&self) -> &DiscountedModel {
        &self.model
    }

    pub fn dist(&self) -> &ClaimDistribution {
        self.model.dist()
    }

    pub fn v(&self) -> f64 {
        self.model.v()
    }

    pub fn phi(&self) -> f64 {
        self.model.phi()
    }

    pub fn x_max(&self) -> usize {
        self.x_max
    }

    pub fn is_rescaled(&self) -> bool {
        self.rescaled
    }

    /// `Err(OutOfTable)` unless `x <= x_max`.
    pub fn check(&self, x: i64) -> Result<()> {
        if x > self.x_max as i64 {
            Err(Error::OutOfTable { index: x, x_max: self.x_max })
        } else {
            Ok(())
        }
    }

    fn stored(&self, series: &[f64], x: usize, e: i64) -> f64 {
        let shift = if self.rescaled { e - x as i64 } else { e };
        series[x] * pow(self.phi(), shift)
    }

    fn index(&self, x: i64) -> usize {
        assert!(
            x <= self.x_max as i64,
            "index {x} beyond scale table (x_max = {})",
            self.x_max
        );
        x as usize
    }

    /// `W_v(x) φ_v^e`.
    ///
    /// # Panics
    /// If `x > x_max`; the `check` method gives the fallible version.
    pub fn w_scaled(&self, x: i64, e: i64) -> f64 {
        if x < 0 {
            return 0.0;
        }
        self.stored(&self.w, self.index(x), e)
    }

    /// `Z_v(x) φ_v^e`, with `Z_v(x) = 1` for `x < 0`.
    pub fn z_scaled(&self, x: i64, e: i64) -> f64 {
        if x < 0 {
            return pow(self.phi(), e);
        }
        self.stored(&self.z, self.index(x), e)
    }

    /// `Z_{1,v}(x) φ_v^e`, with `Z_{1,v}(x) = x` for `x < 0`.
    pub fn z1_scaled(&self, x: i64, e: i64) -> f64 {
        if x < 0 {
            return x as f64 * pow(self.phi(), e);
        }
        self.stored(&self.z1, self.index(x), e)
    }

    pub fn w(&self, x: i64) -> f64 {
        self.w_scaled(x, 0)
    }

    pub fn z(&self, x: i64) -> f64 {
        self.z_scaled(x, 0)
    }

    pub fn z1(&self, x: i64) -> f64 {
        self.z1_scaled(x, 0)
    }

    /// `W̄_v(x) = sum_{y < x} W_v(y)`, for `0 <= x <= x_max`.
    pub fn w_bar(&self, x: i64) -> f64 {
        if x <= 0 {
            return 0.0;
        }
        self.stored(&self.w_bar, self.index(x), 0)
    }

    /// `Z̄_v(x) = sum_{y < x} Z_v(y)`, for `0 <= x <= x_max`.
    pub fn z_bar(&self, x: i64) -> f64 {
        if x <= 0 {
            return 0.0;
        }
        self.stored(&self.z_bar, self.index(x), 0)
    }

    /// `W_v(x) / W_v(y)`, overflow-free.
    pub fn w_ratio(&self, x: i64, y: i64) -> f64 {
        self.w_scaled(x, y) / self.w_scaled(y, y)
    }

    /// `ΔW_v(b) φ_v^e`.
    pub fn delta_w_scaled(&self, b: i64, e: i64) -> f64 {
        self.w_scaled(b + 1, e) - self.w_scaled(b, e)
    }

    /// `ΔZ_{1,v}(b) φ_v^e`, where `ΔZ_{1,v}(b) = Z_v(b) - (1 - E C_1) W_v(b)`.
    pub fn delta_z1_scaled(&self, b: i64, e: i64) -> f64 {
        self.z_scaled(b, e) - (1.0 - self.dist().mean()) * self.w_scaled(b, e)
    }

    pub fn delta_w(&self, b: i64) -> f64 {
        self.delta_w_scaled(b, 0)
    }

    pub fn delta_z(&self, b: i64) -> f64 {
        self.z(b + 1) - self.z(b)
    }

    pub fn delta_z1(&self, b: i64) -> f64 {
        self.delta_z1_scaled(b, 0)
    }

    /// Plain `W_v(0..=x_max)`.
    pub fn w_values(&self) -> Vec<f64> {
        (0..=self.x_max as i64).map(|x| self.w(x)).collect()
    }

    pub fn z_values(&self) -> Vec<f64> {
        (0..=self.x_max as i64).map(|x| self.z(x)).collect()
    }

    pub fn z1_values(&self) -> Vec<f64> {
        (0..=self.x_max as i64).map(|x| self.z1(x)).collect()
    }

    /// Largest relative gap between the harmonic recursion and its
    /// positive-coefficient alternative.
    pub fn self_check(&self) -> f64 {
        let s = if self.rescaled { self.phi() } else { 1.0 };
        let alt = alternative_recursion(self.dist(), self.v(), s, self.x_max);
        self.w
            .iter()
            .zip(&alt)
            .map(|(a, b)| ((a - b) / b).abs())
            .fold(0.0, f64::max)
    }

    /// `Z_v(., w)` on the same range.
    pub fn z_w(&self, w: f64) -> Result<ZwTable> {
        ZwTable::new(self, w)
    }
}

/// Plain `W_v(0..=x_max)` via the positive-coefficient recursion.
pub fn w_table_alternative(model: &DiscountedModel, x_max: usize) -> Vec<f64> {
    alternative_recursion(model.dist(), model.v(), 1.0, x_max)
}

/// `Z_v(., w)` on `{0, ..., x_max}`, with `Z_v(x, w) = w^{-x}` for `x < 0`.
#[derive(Debug, Clone)]
pub struct ZwTable {
    w: f64,
    phi: f64,
    rescaled: bool,
    values: Vec<f64>,
}

impl ZwTable {
    pub fn new(table: &ScaleTable, w: f64) -> Result<Self> {
        if !(w > 0.0 && w <= 1.0) {
            return domain(format!("w = {w} outside (0, 1]"));
        }
        let dist = table.dist();
        let v = table.v();
        let s = if table.rescaled { table.phi() } else { 1.0 };
        let x_max = table.x_max;
        let p0 = dist.p0();
        let support = dist.support_max().map_or(x_max + 1, |m| m.min(x_max + 1));
        let q: Vec<f64> = dist
            .pmf_prefix(support + 1)
            .iter()
            .enumerate()
            .map(|(j, p)| p * pow(s, j as i64))
            .collect();
        let mut values = Vec::with_capacity(x_max + 1);
        values.push(1.0);
        for x in 0..x_max {
            let mut acc = values[x] * s / v;
            for k in 0..=x.min(support - 1) {
                acc -= q[k + 1] * values[x - k];
            }
            let tail = if w == 1.0 { dist.tail(x + 1) } else { dist.weighted_tail(x, w) };
            acc -= tail * pow(s, x as i64 + 1);
            values.push(acc / p0);
        }
        if let Some(x) = values.iter().position(|f| !f.is_finite()) {
            return Err(Error::Overflow { x });
        }
        Ok(Self { w, phi: table.phi(), rescaled: table.rescaled, values })
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn x_max(&self) -> usize {
        self.values.len() - 1
    }

    /// `Z_v(x, w) φ_v^e`.
    ///
    /// # Panics
    /// If `x > x_max`.
    pub fn scaled(&self, x: i64, e: i64) -> f64 {
        if x < 0 {
            return pow(self.w, -x) * pow(self.phi, e);
        }
        let shift = if self.rescaled { e - x } else { e };
        self.values[x as usize] * pow(self.phi, shift)
    }

    pub fn value(&self, x: i64) -> f64 {
        self.scaled(x, 0)
    }

    pub fn values(&self) -> Vec<f64> {
        (0..=self.x_max() as i64).map(|x| self.value(x)).collect()
    }
}

/// `lim W_v(x) φ_v^{x+1} = v / (1 - v p̃'(φ_v))`; `+∞` in the critical case.
pub fn asymptotic_constant(model: &DiscountedModel) -> f64 {
    let den = 1.0 - model.v() * model.dist().pgf_derivative(model.phi());
    if den <= 1e-14 {
        f64::INFINITY
    } else {
        model.v() / den
    }
}

/// Dickson–Hipp series `(p̃(w) - w/v) sum_k w^k W_v(x+k)` for `w < φ_v`,
/// truncated once the geometric remainder bound drops below `1e-12`
/// (relative to the partial sum when that exceeds one).
pub fn dickson_hipp_z(table: &ScaleTable, w: f64, x: usize) -> Result<f64> {
    let phi = table.phi();
    if !(w > 0.0 && w < phi) {
        return domain(format!("Dickson–Hipp series needs 0 < w < φ_v = {phi}, got {w}"));
    }
    let a = asymptotic_constant(table.model());
    if !a.is_finite() {
        return domain("critical model: no geometric bound for the Dickson–Hipp remainder");
    }
    let coef = table.dist().pgf_unchecked(w) - w / table.v();
    let ratio = w / phi;
    let mut acc = 0.0;
    let mut wk = 1.0;
    let mut k = 0usize;
    loop {
        let y = x + k;
        table.check(y as i64)?;
        acc += wk * table.w(y as i64);
        // remaining terms: sum_{j>k} w^j W(x+j) <= a φ^{-x-1} ratio^{k+1} / (1 - ratio)
        let bound = coef.abs() * a * pow(phi, -(x as i64) - 1) * pow(ratio, k as i64 + 1)
            / (1.0 - ratio);
        if bound < 1e-12 * (coef * acc).abs().max(1.0) {
            return Ok(coef * acc);
        }
        wk *= w;
        k += 1;
    }
}

/// `|(p̃(z) - z/v) sum_{x <= x_max} z^x W_v(x) - 1|` for `0 < z < φ_v`.
pub fn gf_residual(table: &ScaleTable, z: f64) -> Result<f64> {
    let phi = table.phi();
    if !(z > 0.0 && z < phi) {
        return domain(format!("need 0 < z < φ_v = {phi}, got {z}"));
    }
    let sum = tilted_sum(table.x_max, z / phi, |x| table.w_scaled(x, x));
    Ok(((table.dist().pgf_unchecked(z) - z / table.v()) * sum - 1.0).abs())
}

/// Residual of `sum z^x Z_v(x) = (p̃(z) - z) / ((p̃(z) - z/v)(1 - z))`,
/// cleared of denominators: `|(p̃(z) - z/v)(1 - z) sum z^x Z_v(x) - (p̃(z) - z)|`.
pub fn z_gf_residual(table: &ScaleTable, z: f64) -> Result<f64> {
    let phi = table.phi();
    if !(z > 0.0 && z < phi) {
        return domain(format!("need 0 < z < φ_v = {phi}, got {z}"));
    }
    let sum = tilted_sum(table.x_max, z / phi, |x| table.z_scaled(x, x));
    let pz = table.dist().pgf_unchecked(z);
    Ok(((pz - z / table.v()) * (1.0 - z) * sum - (pz - z)).abs())
}

/// Residual of `sum z^x Z_v(x, w) = (z p̃(w) - w p̃(z)) / ((z - w)(p̃(z) - z/v))`,
/// cleared of denominators.
pub fn zw_gf_residual(table: &ScaleTable, zw: &ZwTable, z: f64) -> Result<f64> {
    let phi = table.phi();
    if !(z > 0.0 && z < phi) || z == zw.w() {
        return domain(format!("need 0 < z < φ_v = {phi}, z != w, got {z}"));
    }
    let w = zw.w();
    let sum = tilted_sum(zw.x_max(), z / phi, |x| zw.scaled(x, x));
    let d = table.dist();
    let pz = d.pgf_unchecked(z);
    Ok(((z - w) * (pz - z / table.v()) * sum - (z * d.pgf_unchecked(w) - w * pz)).abs())
}

/// `sum_{x <= n} ratio^x g(x)`.
fn tilted_sum(n: usize, ratio: f64, g: impl Fn(i64) -> f64) -> f64 {
    let mut acc = 0.0;
    let mut rx = 1.0;
    for x in 0..=n as i64 {
        acc += rx * g(x);
        rx *= ratio;
    }
    acc
}

/// `W_v(0..=n)` via `p_0^{-1} (p_0 v)^{-i} det(I - v Q_i)`, where `Q_i` is
/// the transition matrix of the walk restricted to `{0, ..., i-1}`.
pub fn w_determinant_oracle(model: &DiscountedModel, n: usize) -> Result<Vec<f64>> {
    if !(1..=12).contains(&n) {
        return domain(format!("determinant oracle needs 1 <= N <= 12, got {n}"));
    }
    let v = model.v();
    if v >= 1.0 {
        return domain("determinant oracle needs v < 1");
    }
    let p = model.dist().pmf_prefix(n + 1);
    let p0 = p[0];
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let mut m = vec![vec![0.0; i]; i];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, entry) in row.iter_mut().enumerate() {
                let q = if c <= r + 1 { p[r + 1 - c] } else { 0.0 };
                *entry = f64::from(u8::from(r == c)) - v * q;
            }
        }
        out.push(determinant(m) / p0 / (p0 * v).powi(i as i32));
    }
    Ok(out)
}

/// Gaussian elimination with partial pivoting.
fn determinant(mut m: Vec<Vec<f64>>) -> f64 {
    let n = m.len();
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap();
        if m[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        det *= m[col][col];
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            for c in col..n {
                m[r][c] -= f * m[col][c];
            }
        }
    }
    det
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

    fn gsy() -> ClaimDistribution {
        ClaimDistribution::from_strs(&["3/4", "1/20", "1/10", "0", "0", "0", "0", "1/10"]).unwrap()
    }

    fn table(d: ClaimDistribution, v: f64, x_max: usize) -> ScaleTable {
        ScaleTable::new(DiscountedModel::new(d, v).unwrap(), x_max).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn first_entries_closed_form() {
        for (d, v) in [(three_point(), 0.7), (morrill(), 65.0 / 72.0), (gsy(), 0.999)] {
            let p0 = d.p0();
            let p1 = d.pmf(1);
            let t = table(d, v, 3);
            assert!((t.w(0) - 1.0 / p0).abs() < 1e-15);
            assert!(rel(t.w(1), (1.0 / v - p1) / (p0 * p0)) < 1e-14);
            assert_eq!(t.w(-1), 0.0);
            assert_eq!(t.z(0), 1.0);
            assert_eq!(t.z(-3), 1.0);
            assert_eq!(t.z1(0), 0.0);
            assert_eq!(t.z1(-3), -3.0);
        }
    }

    #[test]
    fn three_point_z_values() {
        let t = table(three_point(), 150.0 / 169.0, 12);
        let c = 169.0 / 150.0 - 1.0;
        assert!((t.z(1) - (1.0 + c * 1.5)).abs() < 1e-14);
        assert!((t.z(1) - 1.19).abs() < 1e-14);
        assert!((t.z(2) - (1.0 + c * (t.w(0) + t.w(1)))).abs() < 1e-14);
        assert!((t.z(2) - 1.44777).abs() < 1e-5);
        assert!((t.z1(1) - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn unit_discount_z_is_one() {
        let t = table(three_point(), 1.0, 50);
        assert!(t.z_values().iter().all(|&z| z == 1.0));
        let zw = t.z_w(1.0).unwrap();
        assert!(zw.values().iter().all(|z| (z - 1.0).abs() < 1e-12));
    }

    #[test]
    fn z_recursion_matches_representation() {
        for (d, v) in [(three_point(), 150.0 / 169.0), (morrill(), 65.0 / 72.0), (gsy(), 0.999)] {
            let t = table(d, v, 200);
            let zw = t.z_w(1.0).unwrap();
            for x in 0..=200 {
                assert!(rel(zw.value(x), t.z(x)) < 1e-10, "x={x}");
            }
        }
    }

    #[test]
    fn z_w_boundary() {
        let t = table(morrill(), 0.9, 10);
        let zw = t.z_w(0.6).unwrap();
        assert_eq!(zw.value(0), 1.0);
        assert!((zw.value(-2) - 0.36).abs() < 1e-15);
        assert!(t.z_w(0.0).is_err());
        assert!(t.z_w(1.2).is_err());
    }

    #[test]
    fn alternative_recursion_agrees() {
        for (d, v) in [
            (three_point(), 150.0 / 169.0),
            (three_point(), 1.0),
            (morrill(), 65.0 / 72.0),
            (gsy(), 0.999),
            (ClaimDistribution::modified_geometric(0.6, 0.1, 0.5).unwrap(), 0.95),
        ] {
            let t = table(d, v, 500);
            assert!(t.self_check() < 1e-10, "{}", t.self_check());
        }
    }

    #[test]
    fn strictly_increasing_w() {
        let t = table(gsy(), 0.999, 300);
        let w = t.w_values();
        assert!(w.windows(2).all(|p| p[1] > p[0]));
        let z = t.z_values();
        assert!(z.windows(2).all(|p| p[1] >= p[0]));
    }

    #[test]
    fn overflow_and_rescaled_mode() {
        let model = DiscountedModel::new(morrill(), 0.3).unwrap();
        assert!(matches!(ScaleTable::new(model.clone(), 2000), Err(Error::Overflow { .. })));
        let big = ScaleTable::rescaled(model.clone(), 2000).unwrap();
        let small = ScaleTable::new(model, 200).unwrap();
        for x in 0..=200 {
            assert!(rel(big.w(x), small.w(x)) < 1e-12);
            assert!(rel(big.z(x), small.z(x)) < 1e-12);
            assert!((big.z1(x) - small.z1(x)).abs() <= 1e-12 * small.z1(x).abs().max(1.0));
        }
        assert!(big.w_scaled(2000, 2000).is_finite());
        let ratio = big.w_ratio(1990, 2000);
        assert!(ratio > 0.0 && ratio < 1.0);
        assert!(big.self_check() < 1e-10);
    }

    #[test]
    fn killing_equivalence() {
        let v = 0.85;
        let x_max = 40;
        let d = gsy();
        let mut killed: Vec<f64> = d.pmf_prefix(x_max + 4).iter().map(|p| v * p).collect();
        killed[x_max + 3] += 1.0 - v;
        let undiscounted = table(ClaimDistribution::from_pmf(&killed).unwrap(), 1.0, x_max);
        let discounted = table(d, v, x_max);
        for x in 0..=x_max as i64 {
            assert!(rel(discounted.w(x) / v, undiscounted.w(x)) < 1e-10);
        }
    }

    #[test]
    fn esscher_tilt_monotone() {
        for (d, v) in [(three_point(), 0.9), (morrill(), 65.0 / 72.0), (gsy(), 0.999)] {
            let model = DiscountedModel::new(d, v).unwrap();
            let a = asymptotic_constant(&model);
            let t = ScaleTable::rescaled(model, 3000).unwrap();
            let tilted: Vec<f64> = (0..=3000).map(|x| t.w_scaled(x, x + 1) / v).collect();
            assert!(tilted.windows(2).all(|p| p[1] >= p[0] * (1.0 - 1e-12)));
            let gaps: Vec<f64> = tilted.iter().map(|x| (a / v - x).abs()).collect();
            assert!(gaps.windows(2).all(|p| p[1] <= p[0] * (1.0 + 1e-9) + 1e-13));
            assert!(gaps[3000] < 1e-6 * a, "{}", gaps[3000]);
        }
    }

    #[test]
    fn asymptotic_constant_cases() {
        let m = DiscountedModel::new(three_point(), 1.0).unwrap();
        assert!((asymptotic_constant(&m) - 9.0 / 4.0).abs() < 1e-14);
        let critical = DiscountedModel::new(ClaimDistribution::from_pmf(&[0.5, 0.0, 0.5]).unwrap(), 1.0)
            .unwrap();
        assert_eq!(asymptotic_constant(&critical), f64::INFINITY);
    }

    #[test]
    fn dickson_hipp_matches_recursion() {
        for (d, v) in [
            (three_point(), 0.9),
            (morrill(), 65.0 / 72.0),
            (gsy(), 0.999),
            (ClaimDistribution::modified_geometric(0.6, 0.1, 0.5).unwrap(), 0.95),
        ] {
            let t = ScaleTable::rescaled(DiscountedModel::new(d, v).unwrap(), 2000).unwrap();
            let phi = t.phi();
            for w in [phi / 4.0, phi / 2.0, 0.75 * phi] {
                let zw = t.z_w(w).unwrap();
                for x in 0..=50 {
                    let dh = dickson_hipp_z(&t, w, x).unwrap();
                    assert!(rel(dh, zw.value(x as i64)) < 1e-10, "w={w} x={x}");
                }
            }
            assert!(dickson_hipp_z(&t, phi, 0).is_err());
            let tiny = dickson_hipp_z(&t, 1e-8, 3).unwrap();
            assert!(rel(tiny, t.dist().p0() * t.w(3)) < 1e-6);
        }
    }

    #[test]
    fn generating_function_residuals() {
        let t = table(morrill(), 65.0 / 72.0, 200);
        let phi = t.phi();
        assert!(gf_residual(&t, phi / 2.0).unwrap() < 1e-12);
        assert!(z_gf_residual(&t, phi / 2.0).unwrap() < 1e-12);
        let zw = t.z_w(0.5).unwrap();
        assert!(zw_gf_residual(&t, &zw, phi / 3.0).unwrap() < 1e-12);
        assert!(gf_residual(&t, phi).is_err());
        let t0 = table(morrill(), 65.0 / 72.0, 0);
        let z = 1e-6;
        assert!(gf_residual(&t0, z).unwrap() < 1e-5);
    }

    #[test]
    fn determinant_oracle() {
        for (d, v) in [(three_point(), 0.9), (morrill(), 65.0 / 72.0), (gsy(), 0.999)] {
            let model = DiscountedModel::new(d, v).unwrap();
            let det = w_determinant_oracle(&model, 12).unwrap();
            let t = ScaleTable::new(model.clone(), 12).unwrap();
            for (i, value) in det.iter().enumerate() {
                assert!(rel(*value, t.w(i as i64)) < 1e-9, "i={i}");
            }
            assert!(w_determinant_oracle(&model, 13).is_err());
        }
        let unit = DiscountedModel::new(morrill(), 1.0).unwrap();
        assert!(w_determinant_oracle(&unit, 5).is_err());
    }

    /// `E_x[v^{n∧τ} f(X_{n∧τ})]` by exhaustive dynamic programming, where
    /// `f` already carries the stopped value below zero.
    fn stopped_expectation(d: &ClaimDistribution, v: f64, x: i64, n: usize, f: &dyn Fn(i64) -> f64) -> f64 {
        let support = d.support_max().unwrap();
        let hi = x + n as i64;
        let lo = x - (n * support) as i64;
        let mut values: Vec<f64> = (lo..=hi).map(f).collect();
        for _ in 0..n {
            let mut next = values.clone();
            for (idx, y) in (lo..=hi).enumerate() {
                if y < 0 || y + 1 > hi {
                    continue;
                }
                let mut acc = 0.0;
                for k in 0..=support {
                    let target = y + 1 - k as i64;
                    if target >= lo {
                        acc += d.pmf(k) * values[(target - lo) as usize];
                    }
                }
                next[idx] = v * acc;
            }
            values = next;
        }
        values[(x - lo) as usize]
    }

    #[test]
    fn martingale_property() {
        for (d, v) in [(three_point(), 0.8), (morrill(), 65.0 / 72.0)] {
            let t = table(d.clone(), v, 40);
            let zw = t.z_w(0.7).unwrap();
            for x in 0..6 {
                let ew = stopped_expectation(&d, v, x, 10, &|y| t.w(y));
                assert!((ew - t.w(x)).abs() < 1e-12 * t.w(x).max(1.0));
                let ez = stopped_expectation(&d, v, x, 10, &|y| zw.value(y));
                assert!((ez - zw.value(x)).abs() < 1e-12 * zw.value(x).max(1.0));
            }
        }
    }

    proptest! {
        #[test]
        fn recursions_agree_on_random_laws(
            masses in proptest::collection::vec(0.0f64..1.0, 1..6),
            p0 in 0.2f64..1.0,
            v in 0.5f64..=1.0,
        ) {
            let mut raw = vec![p0];
            raw.extend(masses);
            let total: f64 = raw.iter().sum();
            let raw: Vec<f64> = raw.iter().map(|p| p / total).collect();
            let d = ClaimDistribution::from_pmf(&raw).unwrap();
            let model = DiscountedModel::new(d, v).unwrap();
            let t = ScaleTable::rescaled(model, 300).unwrap();
            prop_assert!(t.self_check() < 1e-10);
            let z = t.z_w(1.0).unwrap();
            for x in 0..=300 {
                let a = z.scaled(x, x);
                let b = t.z_scaled(x, x);
                prop_assert!((a - b).abs() <= 1e-9 * (b.abs() + t.w_scaled(x, x)));
            }
        }
    }
}
