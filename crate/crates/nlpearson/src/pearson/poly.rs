//! Orthonormal polynomial eigenfunctions of the Pearson generators.

use super::{Category, PearsonFamily};
use crate::error::{Error, Result};
use crate::quad::{de_interval, golub_welsch, Tol};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

/// Real polynomial with ascending monomial coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    c: Vec<f64>,
}

impl Poly {
    pub fn new(c: Vec<f64>) -> Self {
        let mut p = Poly { c };
        if p.c.is_empty() {
            p.c.push(0.0);
        }
        p
    }

    pub fn constant(v: f64) -> Self {
        Poly { c: vec![v] }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    pub fn degree(&self) -> usize {
        self.c.iter().rposition(|&v| v != 0.0).unwrap_or(0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.c.iter().rev().fold(0.0, |acc, &v| acc * x + v)
    }

    pub fn deriv(&self) -> Poly {
        if self.c.len() <= 1 {
            return Poly::constant(0.0);
        }
        Poly { c: self.c.iter().enumerate().skip(1).map(|(k, &v)| k as f64 * v).collect() }
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let n = self.c.len().max(o.c.len());
        let c = (0..n).map(|k| self.c.get(k).unwrap_or(&0.0) + o.c.get(k).unwrap_or(&0.0)).collect();
        Poly { c }
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let mut c = vec![0.0; self.c.len() + o.c.len() - 1];
        for (i, &a) in self.c.iter().enumerate() {
            for (j, &b) in o.c.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Poly { c }
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly { c: self.c.iter().map(|v| v * s).collect() }
    }
}

type RPoly = Vec<BigRational>;

fn rat(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite coefficient")
}

fn rmul(a: &RPoly, b: &RPoly) -> RPoly {
    let mut c = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            c[i + j] += x * y;
        }
    }
    c
}

fn radd(a: &mut RPoly, b: &RPoly) {
    if b.len() > a.len() {
        a.resize(b.len(), BigRational::zero());
    }
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
}

fn rderiv(a: &RPoly) -> RPoly {
    if a.len() <= 1 {
        return vec![BigRational::zero()];
    }
    a.iter().enumerate().skip(1).map(|(k, v)| v * BigRational::from_integer(BigInt::from(k))).collect()
}

/// Monic P_n ∝ (1/m) dⁿ/dxⁿ [Dⁿ m] in exact rational arithmetic, using
/// P^{(k+1)} = ρP^{(k)} + (n−k)D′P^{(k)} + D P^{(k)′} with ρ = μ − D′.
fn rodrigues_monic(f: &PearsonFamily, n: usize) -> RPoly {
    let (a0, a1) = f.drift_coeffs();
    let [d0, d1, d2] = f.diffusion_coeffs();
    let dd: RPoly = vec![rat(d0), rat(d1), rat(d2)];
    let dp: RPoly = rderiv(&dd);
    let rho: RPoly = vec![rat(a0) - rat(d1), rat(a1) - rat(2.0) * rat(d2)];
    let mut p: RPoly = vec![BigRational::from_integer(1.into())];
    for k in 0..n {
        let mut next = rmul(&rho, &p);
        let w = BigRational::from_integer(BigInt::from(n - k));
        let t: RPoly = rmul(&dp, &p).into_iter().map(|v| v * &w).collect();
        radd(&mut next, &t);
        radd(&mut next, &rmul(&dd, &rderiv(&p)));
        p = next;
    }
    p.truncate(n + 1);
    let lead = p[n].clone();
    p.into_iter().map(|v| v / &lead).collect()
}

fn to_f64(p: &RPoly) -> Vec<f64> {
    p.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect()
}

/// Number of Gauss nodes used for category-I families.
pub const GAUSS_NODES: usize = 200;
/// Largest degree whose monomial coefficients are cached at construction.
const MONO_CACHE: usize = 20;

/// Orthonormal system Q_0, Q_1, … in L²(m dx) with its three-term recurrence
/// x Q_n = √C_{n+1} Q_{n+1} + B_n Q_n + √C_n Q_{n−1}.
#[derive(Clone, Debug)]
pub struct PolynomialSystem {
    family: PearsonFamily,
    max_n: usize,
    b: Vec<f64>,
    sc: Vec<f64>,
    coeffs: Vec<Poly>,
    eigen: Vec<f64>,
    rule: Option<(Vec<f64>, Vec<f64>)>,
}

impl PolynomialSystem {
    /// Category I: Q_0..Q_cap. Categories II/III: Q_0 up to the largest
    /// square-integrable degree, further capped by `cap`.
    pub fn new(family: &PearsonFamily, cap: usize) -> Result<Self> {
        match family.category() {
            Category::I => Self::classical(family, cap),
            _ => Self::heavy_tailed(family, cap),
        }
    }

    fn classical(family: &PearsonFamily, cap: usize) -> Result<Self> {
        let (a0, a1) = family.drift_coeffs();
        let [d0, d1, d2] = family.diffusion_coeffs();
        let len = cap.max(GAUSS_NODES) + 2;
        // leading subdiagonal coefficients of the monic P_n: x^n + s_n x^{n−1} + t_n x^{n−2}
        let mut s = vec![0.0; len + 1];
        let mut t = vec![0.0; len + 1];
        for n in 1..=len {
            let nf = n as f64;
            s[n] = (d1 * nf * (nf - 1.0) + a0 * nf) / (2.0 * d2 * (nf - 1.0) + a1);
            if n >= 2 {
                t[n] = (d1 * s[n] * (nf - 1.0) * (nf - 2.0) + d0 * nf * (nf - 1.0) + a0 * s[n] * (nf - 1.0))
                    / (d2 * (4.0 * nf - 6.0) + 2.0 * a1);
            }
        }
        let b: Vec<f64> = (0..len).map(|n| s[n] - s[n + 1]).collect();
        let c: Vec<f64> = (0..len).map(|n| if n == 0 { 0.0 } else { t[n] - t[n + 1] - b[n] * s[n] }).collect();
        if let Some(k) = c.iter().skip(1).position(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::Numeric(format!("recurrence coefficient C_{} is not positive", k + 1)));
        }
        let (nodes, weights) = golub_welsch(&b[..GAUSS_NODES], &c[1..GAUSS_NODES], 1.0);
        let sc = c.iter().map(|v| v.sqrt()).collect();
        let mut sys = PolynomialSystem {
            family: family.clone(),
            max_n: cap,
            b,
            sc,
            coeffs: Vec::new(),
            eigen: (0..=cap).map(|n| family.eigenvalue_unchecked(n)).collect(),
            rule: Some((nodes, weights)),
        };
        for n in 0..=cap.min(MONO_CACHE) {
            let q = sys.normalized(n)?;
            sys.coeffs.push(q);
        }
        Ok(sys)
    }

    fn heavy_tailed(family: &PearsonFamily, cap: usize) -> Result<Self> {
        let max_n = family.admissible_n().unwrap_or(cap).min(cap);
        let monic: Vec<Vec<f64>> = (0..=max_n).map(|n| to_f64(&rodrigues_monic(family, n))).collect();
        let (l, r) = family.interval();
        let mut h = Vec::with_capacity(max_n + 1);
        for p in &monic {
            let p = Poly::new(p.clone());
            let v = de_interval(|x| p.eval(x).powi(2) * family.m(x), l, r, Tol::new(1e-300, 1e-12))?;
            h.push(v);
        }
        let coeffs: Vec<Poly> =
            monic.iter().zip(&h).map(|(p, hn)| Poly::new(p.clone()).scale(1.0 / hn.sqrt())).collect();
        let sub = |n: usize| if n == 0 { 0.0 } else { monic[n][n - 1] };
        let b = (0..max_n).map(|n| sub(n) - sub(n + 1)).collect();
        let sc = (0..=max_n).map(|n| if n == 0 { 0.0 } else { (h[n] / h[n - 1]).sqrt() }).collect();
        Ok(PolynomialSystem {
            family: family.clone(),
            max_n,
            b,
            sc,
            coeffs,
            eigen: (0..=max_n).map(|n| family.eigenvalue_unchecked(n)).collect(),
            rule: None,
        })
    }

    /// Q_n from the Rodrigues formula, normalized with the Gauss rule.
    fn normalized(&self, n: usize) -> Result<Poly> {
        if n == 0 {
            return Ok(Poly::constant(1.0));
        }
        let p = Poly::new(to_f64(&rodrigues_monic(&self.family, n)));
        let (x, w) = self.rule.as_ref().expect("classical system has a rule");
        let h: f64 = x.iter().zip(w).map(|(&xi, &wi)| wi * p.eval(xi).powi(2)).sum();
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Numeric(format!("norm of Q_{n} is not finite")));
        }
        Ok(p.scale(1.0 / h.sqrt()))
    }

    pub fn family(&self) -> &PearsonFamily {
        &self.family
    }

    pub fn max_n(&self) -> usize {
        self.max_n
    }

    /// Monomial coefficients of Q_n.
    pub fn polynomial(&self, n: usize) -> Result<Poly> {
        if n > self.max_n {
            return Err(self.bound_error(n));
        }
        if let Some(p) = self.coeffs.get(n) {
            return Ok(p.clone());
        }
        if n >= GAUSS_NODES {
            return Err(Error::Parameter(format!("monomial form of Q_{n} is beyond the quadrature degree")));
        }
        self.normalized(n)
    }

    fn bound_error(&self, n: usize) -> Error {
        match self.family.category() {
            Category::I => Error::Parameter(format!("Q_{n} requested from a system built up to {}", self.max_n)),
            _ => Error::SpectrumBound(format!(
                "Q_{n} is not square integrable; largest admissible degree is {}",
                self.max_n
            )),
        }
    }

    pub fn eigenvalue(&self, n: usize) -> Result<f64> {
        self.eigen.get(n).copied().ok_or_else(|| self.bound_error(n))
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigen
    }

    /// Recurrence coefficients (B_n, √C_n).
    pub fn recurrence(&self) -> (&[f64], &[f64]) {
        (&self.b, &self.sc)
    }

    /// Gauss rule for m (category I only).
    pub fn gauss_rule(&self) -> Option<(&[f64], &[f64])> {
        self.rule.as_ref().map(|(x, w)| (x.as_slice(), w.as_slice()))
    }

    /// Q_n(x) by the three-term recurrence.
    pub fn eval(&self, n: usize, x: f64) -> f64 {
        let mut out = vec![0.0; n + 1];
        self.eval_all(x, &mut out);
        out[n]
    }

    /// Fills out[k] = Q_k(x) for k < out.len().
    pub fn eval_all(&self, x: f64, out: &mut [f64]) {
        assert!(out.len() <= self.max_n + 1, "degree beyond the system size");
        if out.is_empty() {
            return;
        }
        out[0] = 1.0;
        if out.len() > 1 {
            out[1] = (x - self.b[0]) / self.sc[1];
        }
        for n in 1..out.len().saturating_sub(1) {
            out[n + 1] = ((x - self.b[n]) * out[n] - self.sc[n] * out[n - 1]) / self.sc[n + 1];
        }
    }
}
