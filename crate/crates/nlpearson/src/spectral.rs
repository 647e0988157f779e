//! Spectral assembly of the classical transition density p(t,x;x₀) and of its
//! time-changed counterpart p_Φ(t,x;x₀).
//!
//! Both are written as m(x)·S with
//!   S = 1 + c₁G(x,x₀) + Σ_{n≥1} (r_n − c₁/λ_n) Q_n(x)Q_n(x₀)
//!         + (1/π) ∫₀^∞ (r(λ) − c₁/λ) a(κ) f(x;κ) f(x₀;κ) 2κ dκ,
//! where r(λ) is e^{−λt} or ℰ_Φ(t;−λ), c₁ = ν̄_Φ(t) is the leading 1/λ
//! coefficient of ℰ_Φ (zero in the classical case) and G is the Green kernel.
//! Subtracting c₁/λ_n turns an O(n^{−1/2}) tail into an O(λ_n^{−2}) one.

use crate::bernstein::BernsteinDescriptor;
use crate::error::{domain, Error, Result};
use crate::pearson::{Category, ContinuousSpectrumData, GreenKernel, PearsonFamily, PolynomialSystem};
use crate::quad::gauss_legendre;
use crate::relaxation::RelaxationEvaluator;
use rayon::prelude::*;
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralOptions {
    /// Largest number of discrete terms for category I.
    pub max_terms: usize,
    /// Target bound on the absolute truncation error of the density.
    pub tail_tol: f64,
    /// Upper end of the κ integration for the continuous part.
    pub kappa_max: f64,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        SpectralOptions { max_terms: 8000, tail_tol: 1e-6, kappa_max: 120.0 }
    }
}

/// One density value with its truncation bound and diagnostics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityPoint {
    pub x: f64,
    pub value: f64,
    /// Estimated absolute error bound; `None` when part of the spectrum is
    /// not evaluated.
    pub bound: Option<f64>,
    /// Terms used in the discrete sum.
    pub terms: usize,
    /// A small negative value from truncation was set to zero.
    pub clamped: bool,
    /// The continuous spectral part was omitted (Student family).
    pub remainder_omitted: bool,
}

#[derive(Clone, Debug)]
pub struct SpectralExpansion {
    family: PearsonFamily,
    relax: Option<RelaxationEvaluator>,
    system: PolynomialSystem,
    continuous: Option<ContinuousSpectrumData>,
    green: GreenKernel,
    opts: SpectralOptions,
}

const MIN_TERMS: usize = 64;

impl SpectralExpansion {
    /// Classical expansion (no time change).
    pub fn classical(family: &PearsonFamily) -> Result<Self> {
        Self::new(family, None, SpectralOptions::default())
    }

    /// Expansion of the density time-changed by the inverse subordinator of Φ.
    pub fn nonlocal(family: &PearsonFamily, phi: BernsteinDescriptor) -> Result<Self> {
        Self::new(family, Some(phi), SpectralOptions::default())
    }

    pub fn new(family: &PearsonFamily, phi: Option<BernsteinDescriptor>, opts: SpectralOptions) -> Result<Self> {
        let cap = match family.category() {
            Category::I => opts.max_terms,
            _ => usize::MAX,
        };
        let system = PolynomialSystem::new(family, cap)?;
        let continuous = match family.category() {
            Category::II => Some(ContinuousSpectrumData::new(family)?),
            _ => None,
        };
        Ok(SpectralExpansion {
            family: family.clone(),
            relax: phi.map(RelaxationEvaluator::new),
            system,
            continuous,
            green: GreenKernel::new(family),
            opts,
        })
    }

    pub fn family(&self) -> &PearsonFamily {
        &self.family
    }

    pub fn phi(&self) -> Option<&BernsteinDescriptor> {
        self.relax.as_ref().map(|r| r.descriptor())
    }

    pub fn options(&self) -> SpectralOptions {
        self.opts
    }

    /// Classical p(t,x;x₀).
    pub fn transition_density(&self, t: f64, x: f64, x0: f64) -> Result<f64> {
        if self.relax.is_some() {
            return Err(Error::Misuse("expansion carries a time change; use nonlocal_transition_density".into()));
        }
        Ok(self.density_grid(t, &[x], x0)?[0].value)
    }

    /// p_Φ(t,x;x₀).
    pub fn nonlocal_transition_density(&self, t: f64, x: f64, x0: f64) -> Result<f64> {
        if self.relax.is_none() {
            return Err(Error::Misuse("expansion has no time change; use transition_density".into()));
        }
        Ok(self.density_grid(t, &[x], x0)?[0].value)
    }

    /// r(λ_i) = e^{−λ_i t} or ℰ_Φ(t;−λ_i).
    fn relaxation(&self, t: f64, lambdas: &[f64]) -> Result<Vec<f64>> {
        match &self.relax {
            None => Ok(lambdas.iter().map(|l| (-l * t).exp()).collect()),
            Some(r) => {
                let chunks: Vec<Result<Vec<f64>>> = lambdas.par_chunks(128).map(|c| r.eigenfunctions(t, c)).collect();
                let mut out = Vec::with_capacity(lambdas.len());
                for c in chunks {
                    out.extend(c?);
                }
                Ok(out)
            }
        }
    }

    /// (c₁, |c₂|) of the large-λ expansion of r.
    fn tail_coefficients(&self, t: f64) -> (f64, f64) {
        match &self.relax {
            None => (0.0, 0.0),
            Some(r) => {
                let (c1, c2) = r.descriptor().relaxation_tail_coefficients(t);
                (c1, c2.abs())
            }
        }
    }

    /// Density values on a grid of x for a fixed t and starting point x₀.
    pub fn density_grid(&self, t: f64, xs: &[f64], x0: f64) -> Result<Vec<DensityPoint>> {
        if !(t > 0.0 && t.is_finite()) {
            return domain(format!("transition density needs t > 0, got {t}"));
        }
        self.family.check(x0)?;
        for &x in xs {
            self.family.check(x)?;
        }
        let (c1, c2) = self.tail_coefficients(t);
        let green = if c1 > 0.0 && self.family.category() != Category::III {
            self.green.eval_column(xs, x0)?
        } else {
            vec![0.0; xs.len()]
        };
        let mut pts = match self.family.category() {
            Category::I => self.discrete_adaptive(t, xs, x0, c1, c2, &green)?,
            _ => self.discrete_fixed(t, xs, x0, c1, &green)?,
        };
        if let Some(cs) = &self.continuous {
            let (cont, err) = self.continuous_part(cs, t, xs, x0, c1)?;
            for ((p, v), e) in pts.iter_mut().zip(cont).zip(err) {
                p.0 += v;
                p.1 = p.1.map(|b| b + e);
            }
        }
        let terms = match self.family.category() {
            Category::I => pts.first().map(|p| p.2).unwrap_or(0),
            _ => self.system.max_n() + 1,
        };
        let omitted = self.family.category() == Category::III;
        let mut out = Vec::with_capacity(xs.len());
        for (&x, (s, b, _)) in xs.iter().zip(pts) {
            let m = self.family.m(x);
            let mut value = m * s;
            let bound = b.map(|b| m * b);
            let mut clamped = false;
            if value < 0.0 && !omitted {
                if value < -self.opts.tail_tol.max(bound.unwrap_or(0.0)) {
                    return Err(Error::Numeric(format!(
                        "density {value} at x = {x} is negative beyond the truncation bound"
                    )));
                }
                value = 0.0;
                clamped = true;
            }
            out.push(DensityPoint { x, value, bound, terms, clamped, remainder_omitted: omitted });
        }
        Ok(out)
    }

    /// Category I: doubles the number of terms until the calibrated tail
    /// bound on the density is below the tolerance at every x.
    fn discrete_adaptive(
        &self,
        t: f64,
        xs: &[f64],
        x0: f64,
        c1: f64,
        c2: f64,
        green: &[f64],
    ) -> Result<Vec<(f64, Option<f64>, usize)>> {
        let lam = self.system.eigenvalues();
        let nmax = self.system.max_n();
        let mut n = MIN_TERMS.min(nmax);
        let mut r: Vec<f64> = Vec::new();
        loop {
            if r.len() < n + 1 {
                let more = self.relaxation(t, &lam[r.len()..=n])?;
                r.extend(more);
            }
            // coefficient of Q_k(x)Q_k(x₀), with the 1/λ part removed
            let coef: Vec<f64> = (0..=n).map(|k| if k == 0 { 0.0 } else { r[k] - c1 / lam[k] }).collect();
            let tail_r = self.remainder_sum(t, n, &coef, c2);
            let mut q0 = vec![0.0; n + 1];
            self.system.eval_all(x0, &mut q0);
            let res: Vec<(f64, f64)> = xs
                .par_iter()
                .zip(green)
                .map(|(&x, &g)| {
                    let mut q = vec![0.0; n + 1];
                    self.system.eval_all(x, &mut q);
                    let mut s = 1.0 + c1 * g;
                    let mut env = 0.0f64;
                    for k in 1..=n {
                        let pq = q[k] * q0[k];
                        s += coef[k] * pq;
                        if 2 * k >= n {
                            env = env.max(pq.abs());
                        }
                    }
                    (s, env * tail_r)
                })
                .collect();
            let worst = xs.iter().zip(&res).map(|(&x, (_, b))| self.family.m(x) * b).fold(0.0f64, f64::max);
            if worst <= self.opts.tail_tol || n >= nmax {
                if worst > self.opts.tail_tol {
                    return Err(Error::Numeric(format!(
                        "spectral tail bound {worst:.3e} exceeds {:.1e} with {n} terms; raise max_terms",
                        self.opts.tail_tol
                    )));
                }
                return Ok(res.into_iter().map(|(s, b)| (s, Some(b), n + 1)).collect());
            }
            n = (2 * n).min(nmax);
        }
    }

    /// Bound on Σ_{k>n} |coef_k|: geometric in the classical case, otherwise
    /// C Σ_{k>n} λ_k^{−2} with C calibrated on k ∈ [n/2, n].
    fn remainder_sum(&self, t: f64, n: usize, coef: &[f64], c2: f64) -> f64 {
        let lam_at = |k: usize| self.family.eigenvalue_unchecked(k);
        if self.relax.is_none() {
            let mut s = 0.0;
            let mut k = n + 1;
            loop {
                let v = (-lam_at(k) * t).exp();
                s += v;
                if v < 1e-18 * s.max(1e-300) || k > n + 100_000 {
                    break;
                }
                k += 1;
            }
            return s;
        }
        let mut c = c2;
        for (k, v) in coef.iter().enumerate().skip((n / 2).max(1)) {
            c = c.max(v.abs() * lam_at(k).powi(2));
        }
        // Σ_{k>n} λ_k^{−2} by direct summation plus an integral tail
        let mut s = 0.0;
        for k in n + 1..=4 * n + 1 {
            s += lam_at(k).powi(-2);
        }
        let k_end = (4 * n + 1) as f64;
        let l_end = lam_at(4 * n + 1);
        // λ grows at least linearly, so the rest is below k λ(k)^{−2}
        s += k_end / (l_end * l_end);
        c * s
    }

    /// Categories II and III: all square-integrable polynomial eigenfunctions.
    fn discrete_fixed(
        &self,
        t: f64,
        xs: &[f64],
        x0: f64,
        c1: f64,
        green: &[f64],
    ) -> Result<Vec<(f64, Option<f64>, usize)>> {
        let n = self.system.max_n();
        let lam = self.system.eigenvalues();
        let r = self.relaxation(t, lam)?;
        let subtract = if self.family.category() == Category::II { c1 } else { 0.0 };
        let mut q0 = vec![0.0; n + 1];
        self.system.eval_all(x0, &mut q0);
        let omitted = self.family.category() == Category::III;
        Ok(xs
            .iter()
            .zip(green)
            .map(|(&x, &g)| {
                let mut q = vec![0.0; n + 1];
                self.system.eval_all(x, &mut q);
                let mut s = 1.0 + subtract * g;
                for k in 1..=n {
                    s += (r[k] - subtract / lam[k]) * q[k] * q0[k];
                }
                (s, if omitted { None } else { Some(0.0) }, n + 1)
            })
            .collect())
    }

    /// Continuous part for category II, integrated in κ over unit panels.
    fn continuous_part(
        &self,
        cs: &ContinuousSpectrumData,
        t: f64,
        xs: &[f64],
        x0: f64,
        c1: f64,
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        let (gx, gw) = gauss_legendre(16);
        let mut pts: Vec<f64> = xs.to_vec();
        pts.push(x0);
        let npts = pts.len();
        let panel = |k0: f64| -> Result<Vec<f64>> {
            let nodes: Vec<f64> = gx.iter().map(|u| k0 + 0.5 * (u + 1.0)).collect();
            let lams: Vec<f64> = nodes.iter().map(|&k| cs.lambda_of_kappa(k)).collect();
            let r = self.relaxation(t, &lams)?;
            let per_node: Vec<Result<Vec<f64>>> = nodes
                .par_iter()
                .zip(&lams)
                .zip(&r)
                .zip(&gw)
                .map(|(((&k, &l), &rv), &w)| {
                    let f = cs.eigenfunctions_kappa(&pts, k)?;
                    let a = cs.printed_weight_kappa(k);
                    let coef = 0.5 * w * (rv - c1 / l) * a * 2.0 * k / PI;
                    Ok((0..npts - 1).map(|i| coef * f[i] * f[npts - 1]).collect())
                })
                .collect();
            let mut acc = vec![0.0; npts - 1];
            for v in per_node {
                for (a, b) in acc.iter_mut().zip(v?) {
                    *a += b;
                }
            }
            Ok(acc)
        };
        let mx: Vec<f64> = xs.iter().map(|&x| self.family.m(x)).collect();
        let mut total = vec![0.0; xs.len()];
        let mut err = vec![0.0; xs.len()];
        let mut k0 = 0.0;
        let mut quiet = 0;
        while k0 < self.opts.kappa_max {
            let v = panel(k0)?;
            for (t, c) in total.iter_mut().zip(&v) {
                *t += c;
            }
            k0 += 1.0;
            // the subtracted integrand decays like κ^{−3}, so the rest of
            // the integral is about κ/2 times the last panel
            for (e, c) in err.iter_mut().zip(&v) {
                *e = 0.5 * k0 * c.abs();
            }
            let worst = err.iter().zip(&mx).map(|(e, m)| e * m).fold(0.0f64, f64::max);
            quiet = if worst < 0.1 * self.opts.tail_tol { quiet + 1 } else { 0 };
            if quiet >= 2 && k0 >= 4.0 {
                break;
            }
        }
        if quiet < 2 {
            return Err(Error::Numeric(format!(
                "continuous spectral integral not converged at kappa = {}",
                self.opts.kappa_max
            )));
        }
        Ok((total, err))
    }
}
