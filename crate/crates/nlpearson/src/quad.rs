//! Quadrature: Gauss–Legendre, adaptive Gauss–Kronrod, double-exponential
//! rules and Gauss rules from three-term recurrences.

use crate::error::{numeric, Result};
use std::collections::BinaryHeap;
use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = fc * WGK[7];
    let mut rg = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        rk += WGK[j] * s;
        if j % 2 == 1 {
            rg += WG[j / 2] * s;
        }
    }
    (rk * h, ((rk - rg) * h).abs())
}

struct Seg {
    a: f64,
    b: f64,
    val: f64,
    err: f64,
}
impl PartialEq for Seg {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl Eq for Seg {}
impl PartialOrd for Seg {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Seg {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&o.err)
    }
}

/// Tolerances for adaptive integration.
#[derive(Clone, Copy, Debug)]
pub struct Tol {
    pub abs: f64,
    pub rel: f64,
    pub max_segments: usize,
}

impl Default for Tol {
    fn default() -> Self {
        Tol { abs: 1e-12, rel: 1e-10, max_segments: 2000 }
    }
}

impl Tol {
    pub fn new(abs: f64, rel: f64) -> Self {
        Tol { abs, rel, ..Default::default() }
    }
}

/// Globally adaptive G7–K15 on a finite interval.
pub fn gauss_kronrod<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tol) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (v, e) = gk15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Seg { a, b, val: v, err: e });
    let mut total = v;
    let mut err = e;
    let mut n = 1;
    while err > tol.abs.max(tol.rel * total.abs()) {
        if n >= tol.max_segments {
            if err <= 1e3 * tol.abs.max(tol.rel * total.abs()) {
                break;
            }
            return numeric(format!(
                "adaptive quadrature on [{a}, {b}] stopped at {n} segments, error estimate {err:.3e}"
            ));
        }
        let s = heap.pop().expect("heap is never empty");
        let m = 0.5 * (s.a + s.b);
        let (v1, e1) = gk15(&f, s.a, m);
        let (v2, e2) = gk15(&f, m, s.b);
        total += v1 + v2 - s.val;
        err += e1 + e2 - s.err;
        heap.push(Seg { a: s.a, b: m, val: v1, err: e1 });
        heap.push(Seg { a: m, b: s.b, val: v2, err: e2 });
        n += 1;
        if !total.is_finite() {
            return numeric(format!("non-finite integrand on [{a}, {b}]"));
        }
    }
    // re-sum to shed accumulated rounding from the running updates
    Ok(heap.iter().map(|s| s.val).sum())
}

/// Adaptive integration on an interval whose ends may be infinite.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tol) -> Result<f64> {
    match (a.is_finite(), b.is_finite()) {
        (true, true) => gauss_kronrod(f, a, b, tol),
        (true, false) => gauss_kronrod(
            |u| {
                if u >= 1.0 {
                    return 0.0;
                }
                let x = a + u / (1.0 - u);
                let v = f(x) / ((1.0 - u) * (1.0 - u));
                if v.is_finite() {
                    v
                } else {
                    0.0
                }
            },
            0.0,
            1.0,
            tol,
        ),
        (false, true) => gauss_kronrod(
            |u| {
                if u >= 1.0 {
                    return 0.0;
                }
                let x = b - u / (1.0 - u);
                let v = f(x) / ((1.0 - u) * (1.0 - u));
                if v.is_finite() {
                    v
                } else {
                    0.0
                }
            },
            0.0,
            1.0,
            tol,
        ),
        (false, false) => {
            let g: &dyn Fn(f64) -> f64 = &f;
            let l = integrate(g, f64::NEG_INFINITY, 0.0, tol)?;
            let r = integrate(g, 0.0, f64::INFINITY, tol)?;
            Ok(l + r)
        }
    }
}

#[derive(Clone, Copy)]
#[allow(clippy::enum_variant_names)]
enum DeMap {
    TanhSinh { a: f64, b: f64 },
    ExpSinh { a: f64 },
    SinhSinh,
}

impl DeMap {
    /// Returns (x, dx/dt) or None where the node degenerates to an endpoint.
    fn node(self, t: f64) -> Option<(f64, f64)> {
        let u = 0.5 * PI * t.sinh();
        let du = 0.5 * PI * t.cosh();
        match self {
            DeMap::TanhSinh { a, b } => {
                let half = 0.5 * (b - a);
                // distance to the nearer endpoint computed without cancellation
                let e = (-2.0 * u.abs()).exp();
                let dist = 2.0 * half * e / (1.0 + e);
                let x = if u >= 0.0 { b - dist } else { a + dist };
                if x <= a || x >= b {
                    return None;
                }
                let sech2 = 4.0 * e / ((1.0 + e) * (1.0 + e));
                Some((x, half * sech2 * du))
            }
            DeMap::ExpSinh { a } => {
                if u > 700.0 {
                    return None;
                }
                let ex = u.exp();
                if ex == 0.0 {
                    return None;
                }
                Some((a + ex, ex * du))
            }
            DeMap::SinhSinh => {
                if u.abs() > 700.0 {
                    return None;
                }
                Some((u.sinh(), u.cosh() * du))
            }
        }
    }
}

fn de_integrate<F: Fn(f64) -> f64>(f: F, map: DeMap, tmax: f64, tol: Tol) -> Result<f64> {
    let eval = |t: f64| -> f64 {
        match map.node(t) {
            Some((x, dx)) => {
                let v = f(x) * dx;
                if v.is_finite() {
                    v
                } else {
                    0.0
                }
            }
            None => 0.0,
        }
    };
    let mut h = 0.5;
    let n0 = (tmax / h).ceil() as i64;
    let mut sum: f64 = (-n0..=n0).map(|j| eval(j as f64 * h)).sum();
    let mut est = sum * h;
    for _level in 0..9 {
        h *= 0.5;
        let n = (tmax / h).ceil() as i64;
        let mut add = 0.0;
        let mut j = -n + if n % 2 == 0 { 1 } else { 0 };
        while j <= n {
            add += eval(j as f64 * h);
            j += 2;
        }
        sum += add;
        let new = sum * h;
        let diff = (new - est).abs();
        est = new;
        if diff <= tol.abs.max(tol.rel * est.abs()) {
            return Ok(est);
        }
    }
    numeric(format!("double-exponential quadrature did not converge (estimate {est:.6e})"))
}

/// Tanh–sinh rule on a finite interval; tolerant of endpoint singularities.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tol) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    de_integrate(f, DeMap::TanhSinh { a, b }, 3.5, tol)
}

/// Exp–sinh rule on [a, ∞); handles algebraic decay.
pub fn exp_sinh<F: Fn(f64) -> f64>(f: F, a: f64, tol: Tol) -> Result<f64> {
    de_integrate(f, DeMap::ExpSinh { a }, 6.0, tol)
}

/// Sinh–sinh rule on (−∞, ∞).
pub fn sinh_sinh<F: Fn(f64) -> f64>(f: F, tol: Tol) -> Result<f64> {
    de_integrate(f, DeMap::SinhSinh, 6.0, tol)
}

/// Double-exponential integration over (l, r) where either end may be infinite.
pub fn de_interval<F: Fn(f64) -> f64>(f: F, l: f64, r: f64, tol: Tol) -> Result<f64> {
    match (l.is_finite(), r.is_finite()) {
        (true, true) => tanh_sinh(f, l, r, tol),
        (true, false) => exp_sinh(f, l, tol),
        (false, true) => exp_sinh(|y| f(-y), -r, tol),
        (false, false) => sinh_sinh(f, tol),
    }
}

/// Gauss rule from the monic recurrence p_{k+1} = (x − b_k) p_k − c_k p_{k−1}.
///
/// `b` holds b_0..b_{n−1}, `c` holds c_1..c_{n−1} (c_0 is the total mass `mu0`).
/// Eigenvalues of the Jacobi matrix and the first components of its
/// eigenvectors come from implicit QL sweeps.
pub fn golub_welsch(b: &[f64], c: &[f64], mu0: f64) -> (Vec<f64>, Vec<f64>) {
    let n = b.len();
    assert_eq!(c.len() + 1, n, "golub_welsch needs n−1 off-diagonal terms");
    let mut d = b.to_vec();
    let mut e: Vec<f64> = c.iter().map(|v| v.sqrt()).chain(std::iter::once(0.0)).collect();
    let mut z = vec![0.0; n];
    z[0] = mu0.sqrt();
    implicit_ql(&mut d, &mut e, &mut z);
    let mut pairs: Vec<(f64, f64)> = d.into_iter().zip(z.into_iter().map(|v| v * v)).collect();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    pairs.into_iter().unzip()
}

fn implicit_ql(d: &mut [f64], e: &mut [f64], z: &mut [f64]) {
    let n = d.len();
    if n == 1 {
        return;
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                if e[m].abs() <= f64::EPSILON * (d[m].abs() + d[m + 1].abs()) {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            assert!(iter <= 60, "implicit QL did not converge");
            let p0 = d[l];
            let mut g = (d[l + 1] - p0) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - p0 + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            for i in (l..m).rev() {
                let f = s * e[i];
                let bb = c * e[i];
                if g.abs() <= f.abs() {
                    c = g / f;
                    r = c.hypot(1.0);
                    e[i + 1] = f * r;
                    s = 1.0 / r;
                    c *= s;
                } else {
                    s = f / g;
                    r = s.hypot(1.0);
                    e[i + 1] = g * r;
                    c = 1.0 / r;
                    s *= c;
                }
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * bb;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - bb;
                let zf = z[i + 1];
                z[i + 1] = s * z[i] + c * zf;
                z[i] = c * z[i] - s * zf;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(10);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(18)).sum();
        assert_relative_eq!(s, 2.0 / 19.0, max_relative = 1e-13);
        assert_relative_eq!(w.iter().sum::<f64>(), 2.0, max_relative = 1e-14);
    }

    #[test]
    fn kronrod_handles_peaks_and_infinite_ranges() {
        let v = integrate(|x| (-x * x).exp(), f64::NEG_INFINITY, f64::INFINITY, Tol::default()).unwrap();
        assert_relative_eq!(v, PI.sqrt(), max_relative = 1e-10);
        let v = gauss_kronrod(|x| 1.0 / (1e-4 + (x - 0.3).powi(2)), 0.0, 1.0, Tol::default()).unwrap();
        let expect = 100.0 * ((0.7f64 / 0.01).atan() + (0.3f64 / 0.01).atan());
        assert_relative_eq!(v, expect, max_relative = 1e-10);
    }

    #[test]
    fn double_exponential_rules() {
        let v = tanh_sinh(|x| 1.0 / x.sqrt(), 0.0, 1.0, Tol::new(1e-13, 1e-12)).unwrap();
        assert_relative_eq!(v, 2.0, max_relative = 1e-11);
        let v = exp_sinh(|x| 1.0 / (1.0 + x).powf(1.5), 0.0, Tol::new(1e-13, 1e-12)).unwrap();
        assert_relative_eq!(v, 2.0, max_relative = 1e-10);
        let v = sinh_sinh(|x| 1.0 / (1.0 + x * x), Tol::new(1e-13, 1e-12)).unwrap();
        assert_relative_eq!(v, PI, max_relative = 1e-10);
    }

    #[test]
    fn golub_welsch_reproduces_hermite_rule() {
        // probabilists' Hermite: b_k = 0, c_k = k, μ0 = 1 for the N(0,1) weight
        let n = 20;
        let b = vec![0.0; n];
        let c: Vec<f64> = (1..n).map(|k| k as f64).collect();
        let (x, w) = golub_welsch(&b, &c, 1.0);
        let m4: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(4)).sum();
        let m10: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(10)).sum();
        assert_relative_eq!(m4, 3.0, max_relative = 1e-12);
        assert_relative_eq!(m10, 945.0, max_relative = 1e-11);
    }
}
