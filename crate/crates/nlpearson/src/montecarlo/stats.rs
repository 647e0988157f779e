//! Estimators on simulated marginals.

use super::{simulate_nonlocal, ProcessKind, SimParams, Start, TrajectorySet};
use crate::bernstein::BernsteinDescriptor;
use crate::error::{Error, Result};
use crate::pearson::PearsonFamily;
use crate::quad::gauss_legendre;
use crate::spectral::SpectralExpansion;
use crate::subordination::InverseSubordinatorDensity;

/// Normalized histogram on [lo, hi] with the escaped mass on either side.
#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub density: Vec<f64>,
    pub below: f64,
    pub above: f64,
}

impl Histogram {
    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }
}

pub fn histogram(samples: &[f64], lo: f64, hi: f64, bins: usize) -> Histogram {
    let n = samples.len() as f64;
    let w = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    let (mut below, mut above) = (0usize, 0usize);
    for &x in samples {
        if x < lo {
            below += 1;
        } else if x >= hi {
            above += 1;
        } else {
            counts[(((x - lo) / w) as usize).min(bins - 1)] += 1;
        }
    }
    Histogram {
        edges: (0..=bins).map(|k| lo + w * k as f64).collect(),
        density: counts.iter().map(|&c| c as f64 / (n * w)).collect(),
        below: below as f64 / n,
        above: above as f64 / n,
    }
}

/// L1 distance between a histogram and a density at the histogram's
/// resolution: each bin is compared with the bin average of p (8 Gauss nodes
/// per bin, evaluated in one batch). Mass outside the range enters through the
/// difference of escaped masses.
pub fn l1_to_density(h: &Histogram, p: impl Fn(&[f64]) -> Result<Vec<f64>>) -> Result<f64> {
    let (gx, gw) = gauss_legendre(8);
    let mut nodes = Vec::with_capacity(8 * h.density.len());
    for e in h.edges.windows(2) {
        for u in &gx {
            nodes.push(e[0] + 0.5 * (e[1] - e[0]) * (u + 1.0));
        }
    }
    let v = p(&nodes)?;
    let mut l1 = 0.0;
    let mut inside = 0.0;
    for (b, e) in h.edges.windows(2).enumerate() {
        let width = e[1] - e[0];
        let mass: f64 = (0..8).map(|k| 0.5 * width * gw[k] * v[8 * b + k]).sum();
        l1 += (h.density[b] * width - mass).abs();
        inside += mass;
    }
    Ok(l1 + ((1.0 - inside) - (h.below + h.above)).abs())
}

pub fn mean_se(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let v = x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

/// Sample Pearson correlation.
pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (u, v) = (x - ma, y - mb);
        sab += u * v;
        saa += u * u;
        sbb += v * v;
    }
    sab / (saa * sbb).sqrt()
}

/// Correlation with a delete-one-group jackknife standard error over
/// contiguous groups of paths.
pub fn jackknife_correlation(a: &[f64], b: &[f64], groups: usize) -> (f64, f64) {
    let n = a.len();
    let g = groups.clamp(2, n);
    // per-group raw sums so each leave-one-out estimate is O(1)
    let mut sums = vec![[0.0f64; 6]; g];
    for i in 0..n {
        let k = i * g / n;
        let (x, y) = (a[i], b[i]);
        let s = &mut sums[k];
        s[0] += 1.0;
        s[1] += x;
        s[2] += y;
        s[3] += x * x;
        s[4] += y * y;
        s[5] += x * y;
    }
    let total = sums.iter().fold([0.0; 6], |mut t, s| {
        for (a, b) in t.iter_mut().zip(s) {
            *a += b;
        }
        t
    });
    let corr = |s: &[f64; 6]| {
        let (n, mx, my) = (s[0], s[1] / s[0], s[2] / s[0]);
        let cxy = s[5] - n * mx * my;
        let cxx = s[3] - n * mx * mx;
        let cyy = s[4] - n * my * my;
        cxy / (cxx * cyy).sqrt()
    };
    let full = correlation(a, b);
    let loo: Vec<f64> = sums
        .iter()
        .map(|s| {
            let mut r = total;
            for (a, b) in r.iter_mut().zip(s) {
                *a -= b;
            }
            corr(&r)
        })
        .collect();
    let gm = loo.iter().sum::<f64>() / g as f64;
    let var = (g as f64 - 1.0) / g as f64 * loo.iter().map(|v| (v - gm) * (v - gm)).sum::<f64>();
    (full, var.sqrt())
}

/// Corr(X_Φ(t), X_Φ(s)) across paths of a stationary-start set.
pub fn estimate_correlation(ts: &TrajectorySet, t: f64, s: f64) -> Result<(f64, f64)> {
    let p = ts.provenance();
    if p.start != Start::Stationary || p.process == ProcessKind::InverseSubordinator {
        return Err(Error::Misuse("correlation estimates need paths started from the stationary law".into()));
    }
    if !(t >= s && s >= 0.0) {
        return Err(Error::Domain(format!("need t >= s >= 0, got t = {t}, s = {s}")));
    }
    let (jt, js) = (ts.time_index(t)?, ts.time_index(s)?);
    if jt == js {
        return Ok((1.0, 0.0));
    }
    Ok(jackknife_correlation(ts.marginal(jt), ts.marginal(js), 100))
}

/// Least-squares slope of ln y against ln x.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Histogram of X(L_Φ(t)) built from classical paths: the marginal
/// histograms at each grid time s are mixed with trapezoid weights of
/// f_Φ(s;t), renormalized over the simulated range.
pub fn subordinated_histogram(
    ts: &TrajectorySet,
    inv: &InverseSubordinatorDensity,
    t: f64,
    lo: f64,
    hi: f64,
    bins: usize,
) -> Result<Histogram> {
    if ts.provenance().process != ProcessKind::Pearson {
        return Err(Error::Misuse("subordinated histograms need classical paths".into()));
    }
    let s = ts.time_grid();
    let f = inv.density_grid(s, t)?;
    let mut w = vec![0.0; s.len()];
    for k in 0..s.len() - 1 {
        let h = 0.5 * (s[k + 1] - s[k]);
        w[k] += h * f[k];
        w[k + 1] += h * f[k + 1];
    }
    let tot: f64 = w.iter().sum();
    let mut out = histogram(&[], lo, hi, bins);
    out.density.iter_mut().for_each(|d| *d = 0.0);
    out.below = 0.0;
    out.above = 0.0;
    for (j, wj) in w.iter().enumerate() {
        if *wj == 0.0 {
            continue;
        }
        let h = histogram(ts.marginal(j), lo, hi, bins);
        let c = wj / tot;
        for (a, b) in out.density.iter_mut().zip(&h.density) {
            *a += c * b;
        }
        out.below += c * h.below;
        out.above += c * h.above;
    }
    Ok(out)
}

/// Bin averages of p_Φ(t,·;x₀) minus its discrete spectral part, estimated
/// from simulated paths. This is the part a category-III expansion leaves out.
#[derive(Clone, Debug, PartialEq)]
pub struct Remainder {
    pub edges: Vec<f64>,
    pub value: Vec<f64>,
    pub std_err: Vec<f64>,
}

/// Monte Carlo estimate of the continuous-spectrum remainder on `bins` equal
/// bins of [lo, hi]. `p.horizon` is replaced by `t`.
pub fn continuous_remainder(
    f: &PearsonFamily,
    desc: &BernsteinDescriptor,
    x0: f64,
    t: f64,
    (lo, hi, bins): (f64, f64, usize),
    p: &SimParams,
) -> Result<Remainder> {
    if !(hi > lo) || bins == 0 {
        return Err(Error::Domain(format!("bad histogram range [{lo}, {hi}] with {bins} bins")));
    }
    let p = SimParams { horizon: t, n_obs: 1, ..p.clone() };
    let ts = simulate_nonlocal(f, desc, Start::Point { x: x0 }, &p)?;
    let h = histogram(ts.marginal(1), lo, hi, bins);
    let se = SpectralExpansion::nonlocal(f, desc.clone())?;
    let (gx, gw) = gauss_legendre(8);
    let mut nodes = Vec::with_capacity(8 * bins);
    for e in h.edges.windows(2) {
        nodes.extend(gx.iter().map(|u| e[0] + 0.5 * (e[1] - e[0]) * (u + 1.0)));
    }
    let d = se.density_grid(t, &nodes, x0)?;
    let n = ts.n_paths() as f64;
    let width = (hi - lo) / bins as f64;
    let mut value = Vec::with_capacity(bins);
    let mut std_err = Vec::with_capacity(bins);
    for (b, hd) in h.density.iter().enumerate() {
        let avg: f64 = (0..8).map(|k| 0.5 * gw[k] * d[8 * b + k].value).sum();
        value.push(hd - avg);
        let q = hd * width;
        std_err.push((q * (1.0 - q) / n).sqrt() / width);
    }
    Ok(Remainder { edges: h.edges, value, std_err })
}
