//! Monte Carlo, spectral and subordination results checked against each other.

use nlpearson::bernstein::BernsteinDescriptor;
use nlpearson::montecarlo::{
    histogram, jackknife_correlation, l1_to_density, simulate_nonlocal, Scheme, SimParams, Start,
};
use nlpearson::pearson::{make_family, FamilySpec, PearsonFamily};
use nlpearson::relaxation::RelaxationEvaluator;
use nlpearson::spectral::SpectralExpansion;
use nlpearson::subordination::InverseSubordinatorDensity;
use std::f64::consts::PI;

fn ou() -> PearsonFamily {
    make_family(FamilySpec::Ou { theta: 1.0, mu: 0.0, sigma: 1.0 }).unwrap()
}

fn ou_kernel(s: f64, x: f64, x0: f64) -> f64 {
    let m = x0 * (-s).exp();
    let v = -(-2.0 * s).exp_m1();
    (-(x - m) * (x - m) / (2.0 * v)).exp() / (2.0 * PI * v).sqrt()
}

#[test]
fn time_changed_ou_follows_the_subordination_law() {
    let d = BernsteinDescriptor::stable(0.5).unwrap();
    let p =
        SimParams { horizon: 1.0, n_obs: 1, n_paths: 100_000, seed: 5, scheme: Scheme::Exact, ..SimParams::default() };
    let ts = simulate_nonlocal(&ou(), &d, Start::Point { x: 1.0 }, &p).unwrap();
    let inv = InverseSubordinatorDensity::new(d);
    let h = histogram(ts.marginal(1), -3.0, 4.0, 35);
    let l1 =
        l1_to_density(&h, |xs| xs.iter().map(|&x| inv.subordinate(|s| ou_kernel(s, x, 1.0), 1.0)).collect()).unwrap();
    assert!(l1 <= 0.03, "L1 {l1}");
}

#[test]
fn spectral_density_at_the_start_point_matches_monte_carlo() {
    // fraction of paths within ±w of x₀, against ∫ p_Φ over the same window
    let d = BernsteinDescriptor::stable(0.5).unwrap();
    let p =
        SimParams { horizon: 1.0, n_obs: 1, n_paths: 100_000, seed: 9, scheme: Scheme::Exact, ..SimParams::default() };
    let ts = simulate_nonlocal(&ou(), &d, Start::Point { x: 0.0 }, &p).unwrap();
    let w = 0.05;
    let hits: Vec<f64> = ts.marginal(1).iter().map(|x| if x.abs() < w { 1.0 } else { 0.0 }).collect();
    let n = hits.len() as f64;
    let frac = hits.iter().sum::<f64>() / n;
    let se = (frac * (1.0 - frac) / n).sqrt();
    let spec = SpectralExpansion::nonlocal(&ou(), d).unwrap();
    let xs: Vec<f64> = (0..20).map(|k| -w + 2.0 * w * (k as f64 + 0.5) / 20.0).collect();
    let mass: f64 = spec.density_grid(1.0, &xs, 0.0).unwrap().iter().map(|p| p.value * 2.0 * w / 20.0).sum();
    assert!((frac - mass).abs() < 3.0 * se + 1e-4, "{frac} vs {mass} (se {se})");
}

#[test]
fn gamma_correlations_are_summable_and_stable_ones_are_not() {
    let partial = |d: BernsteinDescriptor, n: usize| {
        let ev = RelaxationEvaluator::new(d);
        (1..=n).map(|k| ev.eigenfunction(k as f64, 1.0).unwrap()).sum::<f64>()
    };
    let g = |n| partial(BernsteinDescriptor::gamma(), n);
    assert!((g(200) - g(100)).abs() < 1e-3 * g(100));
    let s = |n| partial(BernsteinDescriptor::stable(0.5).unwrap(), n);
    assert!(s(200) - s(100) > 0.1 * s(100));
}

#[test]
fn gamma_clock_correlations_follow_the_relaxation_function() {
    let d = BernsteinDescriptor::gamma();
    let p =
        SimParams { horizon: 3.0, n_obs: 3, n_paths: 50_000, seed: 17, scheme: Scheme::Exact, ..SimParams::default() };
    let ts = simulate_nonlocal(&ou(), &d, Start::Stationary, &p).unwrap();
    let ev = RelaxationEvaluator::new(d);
    for n in 1..=3 {
        let (r, se) = jackknife_correlation(ts.marginal(n), ts.marginal(0), 100);
        let th = ev.eigenfunction(n as f64, 1.0).unwrap();
        assert!((r - th).abs() < 3.5 * se, "lag {n}: {r} vs {th} (se {se})");
    }
}

#[test]
fn cli_density_job_matches_the_library() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("density.csv");
    let code = nlpearson::cli::run([
        "nlpearson",
        "density",
        "--family",
        r#"{"kind":"ou","theta":1,"mu":0,"sigma":1}"#,
        "--phi",
        r#"{"kind":"stable","alpha":0.5}"#,
        "--t",
        "1",
        "--x0",
        "0",
        "--x-grid=-3:3:121",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,x,x0,value,abs_err_bound"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 121);
    let spec = SpectralExpansion::nonlocal(&ou(), BernsteinDescriptor::stable(0.5).unwrap()).unwrap();
    let xs: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    for (r, p) in rows.iter().zip(spec.density_grid(1.0, &xs, 0.0).unwrap()) {
        assert_eq!(r[3], p.value);
        assert!(r[4] >= 0.0);
    }
    assert!(!text.contains('\r'));
}
