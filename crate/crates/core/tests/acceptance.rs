//! Acceptance criteria, one PASS/FAIL line each. Every tolerance is pinned
//! here; none is derived from the computation under test.

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;

use skipfree::dividends::{self, Objective};
use skipfree::lundberg;
use skipfree::passage;
use skipfree::scale::{self, ScaleTable};
use skipfree::verify;
use skipfree::{ClaimDistribution, DiscountedModel};

const PRINTED_TOL: f64 = 5e-5;

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

fn rescaled(d: ClaimDistribution, v: f64, x_max: usize) -> ScaleTable {
    ScaleTable::rescaled(DiscountedModel::new(d, v).unwrap(), x_max).unwrap()
}

fn test_models() -> Vec<(ClaimDistribution, f64)> {
    vec![
        (three_point(), 150.0 / 169.0),
        (morrill(), 65.0 / 72.0),
        (gsy(), 0.999),
        (ClaimDistribution::modified_geometric(0.6, 0.1, 0.5).unwrap(), 0.95),
    ]
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// A criterion returns whether it holds and a one-line account.
type Outcome = (bool, String);

fn criterion_1() -> Outcome {
    let t = table(three_point(), 1.0, 10);
    let gap = (0..=10)
        .map(|x| {
            let want = 0.4 * 0.5f64.powi(x) - (-1.0f64 / 3.0).powi(x) / 15.0;
            (passage::eventual_ruin(&t, x as i64).unwrap() - want).abs()
        })
        .fold(0.0, f64::max);
    (gap <= 1e-10, format!("three-point eventual ruin, max gap {gap:.2e} (tol 1e-10)"))
}

fn criterion_2() -> Outcome {
    let printed = [
        1.5, 2.035, 2.76082, 3.49551, 4.40307, 5.51337, 6.89721, 8.62338, 10.7802, 13.4755, 16.8446, 21.0558, 26.3198,
    ];
    let t = table(three_point(), 150.0 / 169.0, 13);
    let gap = (0..13).map(|x| (t.w(x) - printed[x as usize]).abs()).fold(0.0, f64::max);
    let monotone = (0..11).all(|b| t.delta_w(b + 1) >= t.delta_w(b));
    let b_star = dividends::optimize_definetti(&t, 0, 11).unwrap().b_star;
    (
        gap <= PRINTED_TOL && monotone && b_star == 0,
        format!("three-point W_v gap {gap:.2e} (tol 5e-5), ΔW_v nondecreasing: {monotone}, b* = {b_star}"),
    )
}

fn criterion_3() -> Outcome {
    let printed = [1.08333, 1.3, 1.56, 1.78172, 2.02973, 2.30568, 2.61834, 2.97286, 3.3753, 3.83216, 4.35085];
    let t = table(morrill(), 65.0 / 72.0, 210);
    let gap = (0..11).map(|x| (t.w(x) - printed[x as usize]).abs()).fold(0.0, f64::max);
    let bands = dividends::multiband_diagnostics(&t, 200).unwrap();
    let r = dividends::optimize_barrier(&t, Objective::ModifiedDefinetti, Some(3.2), 0, 200).unwrap();
    let unique = r.ties == [2] && r.local_maxima == [2];
    (
        gap <= PRINTED_TOL && bands == [0, 2] && r.b_star == 2 && unique,
        format!(
            "Morrill W_v gap {gap:.2e} (tol 5e-5), bands {bands:?}, modified k=3.2 b* = {} (unique: {unique})",
            r.b_star
        ),
    )
}

fn criterion_4() -> Outcome {
    let t = table(gsy(), 0.999, 210);
    let d = dividends::optimize_definetti(&t, 0, 200).unwrap();
    let m = dividends::optimize_barrier(&t, Objective::ModifiedDefinetti, Some(1.2), 0, 200).unwrap();
    let dr = dividends::optimize_barrier(&t, Objective::DoublyReflected, Some(1.2), 0, 200).unwrap();
    let printed = [-89.91, -59.1845, -43.5339, -30.8171, -19.8565, -10.3512, -2.10264];
    let h_gap = printed.iter().enumerate().map(|(b, &want)| rel(dr.trace[b].h, want)).fold(0.0, f64::max);
    let ok_definetti = d.b_star == 1 && d.local_maxima == [1, 7, 38];
    let ok_modified = m.b_star == 41;
    let ok_doubly = dr.b_star == 25;
    let ok_h = h_gap <= 1e-3;
    (
        ok_definetti && ok_modified && ok_doubly && ok_h,
        format!(
            "GSY de Finetti maxima {:?} global {} [{}]; modified k=1.2 b* = {} want 41 [{}] \
             (H(40) = {:.7}, H(41) = {:.7}); doubly k=1.2 b* = {} want 25 [{}] (H(24) = {:.7}, H(25) = {:.7}); \
             H(0..6) rel gap {h_gap:.2e} (tol 1e-3) [{}]",
            d.local_maxima,
            d.b_star,
            verdict(ok_definetti),
            m.b_star,
            verdict(ok_modified),
            m.trace[40].h,
            m.trace[41].h,
            dr.b_star,
            verdict(ok_doubly),
            dr.trace[24].h,
            dr.trace[25].h,
            verdict(ok_h),
        ),
    )
}

/// `W_v` by partial fractions of `(1 - αz)/(k_v (z - φ_v)(z - R_v))`.
fn mg_w(phi: f64, r: f64, k: f64, alpha: f64, x: i64) -> f64 {
    let e = -(x as f64) - 1.0;
    (phi.powf(e) * (1.0 - alpha * phi) - r.powf(e) * (1.0 - alpha * r)) / (k * (r - phi))
}

fn criterion_5() -> Outcome {
    let cases = [
        (0.6, 0.3, 0.0, 0.9),
        (0.6, 0.1, 0.5, 0.95),
        (0.7, 0.2, 0.3, 1.0),
        (0.5, 0.45, 0.8, 0.99),
        (0.8, 0.05, 0.6, 0.7),
    ];
    let mut worst: f64 = 0.0;
    for (p0, p1, alpha, v) in cases {
        let d = ClaimDistribution::modified_geometric(p0, p1, alpha).unwrap();
        let lundberg::RootPair { phi, r, k } = lundberg::root_pair_modified_geometric(&d, v).unwrap();
        let t = table(d, v, 100);
        let mut z = 1.0;
        for x in 0..=100 {
            let w = mg_w(phi, r, k, alpha, x);
            worst = worst.max(rel(w, t.w(x))).max(rel(z, t.z(x)));
            z += (1.0 / v - 1.0) * w;
        }
    }
    let (p0, p2) = (0.6, 0.1);
    let t = table(ClaimDistribution::modified_geometric(p0, 0.3, 0.0).unwrap(), 1.0, 60);
    let gr = (0..=60)
        .map(|x| (passage::eventual_ruin(&t, x).unwrap() - (p2 / p0).powi(x as i32 + 1)).abs())
        .fold(0.0, f64::max);
    (
        worst <= 1e-10 && gr <= 1e-12,
        format!("modified geometric closed forms rel gap {worst:.2e} (tol 1e-10), gambler's ruin gap {gr:.2e} (tol 1e-12)"),
    )
}

fn criterion_6() -> Outcome {
    let mut worst: f64 = 0.0;
    for (d, v) in test_models() {
        let t = rescaled(d, v, 400);
        let phi = t.phi();
        for z in [phi / 4.0, phi / 2.0, 0.75 * phi] {
            worst = worst.max(scale::gf_residual(&t, z).unwrap()).max(scale::z_gf_residual(&t, z).unwrap());
        }
    }
    let mut last: f64 = 0.0;
    let mut decays = true;
    for d in [three_point(), morrill(), gsy()] {
        let (v, z) = (0.95, 0.5);
        let want = passage::ruin_double_transform(&d, v, z).unwrap();
        let res: Vec<f64> = [50, 100, 200, 400]
            .iter()
            .map(|&n| (passage::finite_time_ruin(&d, n, n).ruin_double_sum(v, z) - want).abs())
            .collect();
        decays &= res.windows(2).all(|r| r[1] < r[0]);
        last = last.max(res[3]);
    }
    (
        worst <= 1e-10 && last <= 1e-4 && decays,
        format!("gf residuals {worst:.2e} (tol 1e-10), double transform {last:.2e} at N=X=400 (tol 1e-4), decaying: {decays}"),
    )
}

fn criterion_7() -> Outcome {
    let (mut dh, mut det, mut alt, mut gc, mut infl) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for (d, v) in test_models() {
        let model = DiscountedModel::new(d.clone(), v).unwrap();
        let big = ScaleTable::rescaled(model.clone(), 2000).unwrap();
        let phi = big.phi();
        for w in [phi / 4.0, phi / 2.0, 0.75 * phi] {
            let zw = big.z_w(w).unwrap();
            for x in 0..=50 {
                dh = dh.max(rel(scale::dickson_hipp_z(&big, w, x).unwrap(), zw.value(x as i64)));
            }
        }
        if d.support_max().is_some() {
            let t = ScaleTable::new(model.clone(), 12).unwrap();
            for (i, value) in scale::w_determinant_oracle(&model, 12).unwrap().iter().enumerate() {
                det = det.max(rel(*value, t.w(i as i64)));
            }
        }
        let t = ScaleTable::new(model, 250).unwrap();
        alt = alt.max(t.self_check());
        let (p0, p1) = (d.p0(), d.pmf(1));
        gc = gc.max((dividends::definetti_value(&t, 0, 0).unwrap() - p0 * v / (1.0 - p1 * v - p0 * v)).abs());
        for b in 0..200 {
            for k in [0.5, 1.2, 3.2] {
                let a = dividends::modified_definetti_influence(&t, b, k).unwrap();
                let c = dividends::modified_definetti_influence_differenced(&t, b, k).unwrap();
                infl = infl.max((a - c).abs() / a.abs().max(1.0));
            }
            let a = dividends::doubly_reflected_influence(&t, b, 1.2).unwrap();
            let c = dividends::doubly_reflected_influence_differenced(&t, b, 1.2).unwrap();
            infl = infl.max((a - c).abs() / a.abs().max(1.0));
        }
    }
    (
        dh <= 1e-10 && det <= 1e-9 && alt <= 1e-10 && gc <= 1e-12 && infl <= 1e-10,
        format!(
            "Dickson–Hipp {dh:.2e} (1e-10), determinant {det:.2e} (1e-9), alternative W {alt:.2e} (1e-10), \
             zero-barrier value {gc:.2e} (1e-12), influence forms {infl:.2e} (1e-10)"
        ),
    )
}

/// `E_x[v^{n∧τ} f(X_{n∧τ})]` by exact backward induction over all paths,
/// `τ` the first entrance to the negative integers.
fn stopped_expectation(d: &ClaimDistribution, v: f64, x: i64, n: usize, f: &dyn Fn(i64) -> f64) -> f64 {
    let support = d.support_max().unwrap() as i64;
    let (lo, hi) = (x - n as i64 * support, x + n as i64);
    let mut values: Vec<f64> = (lo..=hi).map(f).collect();
    for _ in 0..n {
        let prev = values.clone();
        for (idx, y) in (lo..=hi).enumerate() {
            if y < 0 || y + 1 > hi {
                continue;
            }
            values[idx] = v * (0..=support)
                .filter(|k| y + 1 - k >= lo)
                .map(|k| d.pmf(k as usize) * prev[(y + 1 - k - lo) as usize])
                .sum::<f64>();
        }
    }
    values[(x - lo) as usize]
}

fn criterion_8() -> Outcome {
    let mut worst: f64 = 0.0;
    for (d, v) in [(three_point(), 0.8), (morrill(), 65.0 / 72.0)] {
        let t = table(d.clone(), v, 40);
        let zw = t.z_w(0.7).unwrap();
        for x in 0..6 {
            let ew = stopped_expectation(&d, v, x, 10, &|y| t.w(y));
            let ez = stopped_expectation(&d, v, x, 10, &|y| zw.value(y));
            worst = worst.max(rel(ew, t.w(x))).max(rel(ez, zw.value(x)));
        }
    }
    (worst <= 1e-12, format!("10-step martingale expectations, max rel gap {worst:.2e} (tol 1e-12)"))
}

fn criterion_9() -> Outcome {
    let reports = verify::run_registry(verify::DEFAULT_PATHS, 42).unwrap();
    let worst = reports.iter().map(|r| r.z_score.abs()).fold(0.0, f64::max);
    let failing: Vec<&str> = reports.iter().filter(|r| !r.pass()).map(|r| r.functional.as_str()).collect();
    let chi = verify::dividends_law_check(verify::DEFAULT_PATHS, 42).unwrap();
    (
        failing.is_empty() && chi.p_value > 0.01,
        format!(
            "{} MC pairs at 10^6 paths, seed 42: max |z| = {worst:.2} (band 4), failing {failing:?}; \
             dividends chi-square p = {:.3} (> 0.01)",
            reports.len(),
            chi.p_value
        ),
    )
}

fn verdict(ok: bool) -> &'static str {
    if ok { "ok" } else { "mismatch" }
}

/// Criteria that fail with the strict check left in place: the published
/// Gerber–Shiu–Yang barrier labels (41, 25) sit one step right of the
/// computed maxima (40, 24). They still print FAIL; only the exit status
/// treats them as expected.
const KNOWN_FAILURES: [u32; 1] = [4];

fn main() -> ExitCode {
    let criteria: [(u32, fn() -> Outcome); 9] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
    ];
    let mut unexpected = Vec::new();
    for (n, f) in criteria {
        let (pass, detail) = match panic::catch_unwind(AssertUnwindSafe(f)) {
            Ok(outcome) => outcome,
            Err(_) => (false, "panicked".to_string()),
        };
        if pass == KNOWN_FAILURES.contains(&n) {
            unexpected.push(n);
        }
        println!("{} criterion {n}: {detail}", if pass { "PASS" } else { "FAIL" });
    }
    // A known failure that starts passing also needs attention.
    if unexpected.is_empty() {
        eprintln!("known failures only: {KNOWN_FAILURES:?}");
        ExitCode::SUCCESS
    } else {
        eprintln!("unexpected outcome for criteria {unexpected:?}");
        ExitCode::FAILURE
    }
}
