//! Strong solutions of the non-local backward and forward Kolmogorov
//! equations by expansion in the orthonormal eigenpolynomials:
//!   u(t,y) = Σ ℰ_Φ(t;−λ_n) g_n Q_n(y),   v(t,x) = m(x) Σ ℰ_Φ(t;−λ_n) f_n Q_n(x).

use crate::bernstein::BernsteinDescriptor;
use crate::error::{domain, Error, Result};
use crate::interp::Hermite;
use crate::pearson::{Category, PearsonFamily, Poly, PolynomialSystem};
use crate::quad::{de_interval, Tol};
use crate::relaxation::{derivative_grid, nonlocal_derivative, RelaxationEvaluator, Sampled};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Backward,
    Forward,
}

/// Initial data accepted by the command line front-end.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatumSpec {
    /// Q_n; in forward mode the density m·Q_n.
    Basis { n: usize },
    /// Σ c_k x^k, taken literally in both modes.
    Polynomial { coeffs: Vec<f64> },
    /// Monotone cubic through the samples, zero outside their range.
    Tabulated { x: Vec<f64>, y: Vec<f64> },
    /// Point mass; has no L² expansion.
    Dirac { x: f64 },
}

impl DatumSpec {
    /// Parses `Q2`, `Q0`, ... or a JSON descriptor.
    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim();
        if let Some(n) = t.strip_prefix('Q').or_else(|| t.strip_prefix('q')) {
            return n.parse().map(|n| DatumSpec::Basis { n }).map_err(|_| Error::Config(format!("bad datum '{s}'")));
        }
        serde_json::from_str(t).map_err(|e| Error::Config(format!("bad datum '{s}': {e}")))
    }
}

#[derive(Clone, Debug)]
pub struct CoefficientExpansion {
    family: PearsonFamily,
    system: PolynomialSystem,
    mode: Mode,
    coeffs: Vec<f64>,
    l2_norm: f64,
    l2_tail: f64,
}

const QTOL: Tol = Tol { abs: 1e-13, rel: 1e-11, max_segments: 2000 };

fn l2_integral(family: &PearsonFamily, h: impl Fn(f64) -> f64) -> Result<f64> {
    let (l, r) = family.interval();
    let v = de_interval(h, l, r, QTOL).map_err(|e| Error::Datum(format!("datum is not square integrable: {e}")))?;
    if !v.is_finite() {
        return Err(Error::Datum("datum is not square integrable".into()));
    }
    Ok(v)
}

impl CoefficientExpansion {
    /// Coefficients of a datum against Q_0..Q_n. Backward mode expands g,
    /// forward mode expands f/m.
    pub fn new(family: &PearsonFamily, datum: impl Fn(f64) -> f64 + Sync, n: usize, mode: Mode) -> Result<Self> {
        if let Some(nj) = family.admissible_n() {
            if n > nj {
                return Err(Error::SpectrumBound(format!(
                    "{} family has discrete eigenpolynomials up to n = {nj}, requested {n}",
                    family.spec().name()
                )));
            }
        }
        let system = PolynomialSystem::new(family, n.max(1))?;
        // h = datum/m in forward mode, handled so that m never divides zero
        let ratio = |x: f64| {
            let v = datum(x);
            match mode {
                Mode::Backward => v,
                Mode::Forward if v == 0.0 => 0.0,
                Mode::Forward => v / family.m(x),
            }
        };
        let norm2 = match mode {
            Mode::Backward => l2_integral(family, |x| {
                let v = datum(x);
                if v == 0.0 {
                    0.0
                } else {
                    v * v * family.m(x)
                }
            })?,
            Mode::Forward => l2_integral(family, |x| {
                let v = datum(x);
                if v == 0.0 {
                    0.0
                } else {
                    v * v / family.m(x)
                }
            })?,
        };
        let coeffs: Vec<f64> = match system.gauss_rule() {
            Some((xs, ws)) => {
                let mut c = vec![0.0; n + 1];
                let mut q = vec![0.0; n + 1];
                for (&x, &w) in xs.iter().zip(ws) {
                    let h = ratio(x);
                    if h == 0.0 {
                        continue;
                    }
                    system.eval_all(x, &mut q);
                    for (ck, qk) in c.iter_mut().zip(&q) {
                        *ck += w * h * qk;
                    }
                }
                c
            }
            None => (0..=n)
                .into_par_iter()
                .map(|k| {
                    let q = system.polynomial(k)?;
                    l2_integral(family, |x| {
                        let v = datum(x);
                        if v == 0.0 {
                            return 0.0;
                        }
                        match mode {
                            Mode::Backward => v * q.eval(x) * family.m(x),
                            Mode::Forward => v * q.eval(x),
                        }
                    })
                })
                .collect::<Result<_>>()?,
        };
        let sum2: f64 = coeffs.iter().map(|c| c * c).sum();
        if sum2 > norm2 * (1.0 + 1e-8) + 1e-8 {
            return Err(Error::Numeric(format!("Parseval violated: sum of squares {sum2} exceeds norm {norm2}")));
        }
        let l2_tail = (norm2 - sum2).max(0.0).sqrt();
        if family.category() != Category::I && l2_tail > 1e-6 * norm2.sqrt().max(1.0) {
            return Err(Error::Datum(format!(
                "datum has an L2 component of size {l2_tail:.3e} outside the discrete span; \
                 evaluate it through the subordination integral of a simulated classical density instead"
            )));
        }
        Ok(CoefficientExpansion { family: family.clone(), system, mode, coeffs, l2_norm: norm2.sqrt(), l2_tail })
    }

    /// Expansion of a datum descriptor.
    pub fn from_spec(family: &PearsonFamily, datum: &DatumSpec, n: usize, mode: Mode) -> Result<Self> {
        match datum {
            DatumSpec::Dirac { x } => Err(Error::Datum(format!(
                "a point mass at {x} has no L2 expansion; use the spectral transition density instead"
            ))),
            DatumSpec::Basis { n: k } => {
                let q = PolynomialSystem::new(family, *k)?.polynomial(*k)?;
                match mode {
                    Mode::Backward => Self::new(family, |x| q.eval(x), n, mode),
                    Mode::Forward => Self::new(family, |x| q.eval(x) * family.m(x), n, mode),
                }
            }
            DatumSpec::Polynomial { coeffs } => {
                let p = Poly::new(coeffs.clone());
                Self::new(family, |x| p.eval(x), n, mode)
            }
            DatumSpec::Tabulated { x, y } => {
                if x.len() < 2 || x.len() != y.len() || !x.windows(2).all(|w| w[1] > w[0]) {
                    return Err(Error::Config("tabulated datum needs increasing x and matching y".into()));
                }
                let (lo, hi) = (x[0], *x.last().unwrap());
                let h = Hermite::pchip(x.clone(), y.clone());
                Self::new(family, |s| if s < lo || s > hi { 0.0 } else { h.eval(s) }, n, mode)
            }
        }
    }

    pub fn family(&self) -> &PearsonFamily {
        &self.family
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn truncation(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm
    }

    /// ‖h − Σ h_n Q_n‖ in L²(m dx) by Parseval.
    pub fn l2_tail(&self) -> f64 {
        self.l2_tail
    }

    /// Σ h_n Q_n(x).
    pub fn reconstruct(&self, x: f64) -> f64 {
        let mut q = vec![0.0; self.coeffs.len()];
        self.system.eval_all(x, &mut q);
        self.coeffs.iter().zip(&q).map(|(c, q)| c * q).sum()
    }
}

#[derive(Clone, Debug)]
pub struct SolutionField {
    expansion: CoefficientExpansion,
    relax: RelaxationEvaluator,
    lambdas: Vec<f64>,
}

impl SolutionField {
    pub fn new(expansion: CoefficientExpansion, phi: BernsteinDescriptor) -> Self {
        let lambdas = expansion.system.eigenvalues()[..expansion.coeffs.len()].to_vec();
        SolutionField { expansion, relax: RelaxationEvaluator::new(phi), lambdas }
    }

    pub fn expansion(&self) -> &CoefficientExpansion {
        &self.expansion
    }

    pub fn mode(&self) -> Mode {
        self.expansion.mode
    }

    pub fn phi(&self) -> &BernsteinDescriptor {
        self.relax.descriptor()
    }

    fn weights(&self, t: f64) -> Result<Vec<f64>> {
        if !(t >= 0.0 && t.is_finite()) {
            return domain(format!("solution needs t >= 0, got {t}"));
        }
        let r = self.relax.eigenfunctions(t, &self.lambdas)?;
        Ok(r.iter().zip(&self.expansion.coeffs).map(|(r, c)| r * c).collect())
    }

    fn combine(&self, w: &[f64], x: f64) -> f64 {
        let s = {
            let mut q = vec![0.0; w.len()];
            self.expansion.system.eval_all(x, &mut q);
            w.iter().zip(&q).map(|(a, b)| a * b).sum::<f64>()
        };
        match self.mode() {
            Mode::Backward => s,
            Mode::Forward => self.expansion.family.m(x) * s,
        }
    }

    /// u(t,y) or v(t,x), whichever this field holds.
    pub fn value(&self, t: f64, x: f64) -> Result<f64> {
        self.expansion.family.check(x)?;
        Ok(self.combine(&self.weights(t)?, x))
    }

    pub fn values(&self, t: f64, xs: &[f64]) -> Result<Vec<f64>> {
        for &x in xs {
            self.expansion.family.check(x)?;
        }
        let w = self.weights(t)?;
        Ok(xs.iter().map(|&x| self.combine(&w, x)).collect())
    }

    pub fn backward_solution(&self, t: f64, y: f64) -> Result<f64> {
        if self.mode() != Mode::Backward {
            return Err(Error::Misuse("field holds a forward solution".into()));
        }
        self.value(t, y)
    }

    pub fn forward_solution(&self, t: f64, x: f64) -> Result<f64> {
        if self.mode() != Mode::Forward {
            return Err(Error::Misuse("field holds a backward solution".into()));
        }
        self.value(t, x)
    }

    /// max |∂_t^Φ w − 𝒜w| over the grid, with 𝒜 the generator (backward) or
    /// the Fokker–Planck operator (forward) applied by finite differences.
    pub fn residual(&self, t_grid: &[f64], x_grid: &[f64]) -> Result<f64> {
        let per_t: Vec<Result<f64>> = t_grid
            .par_iter()
            .map(|&t| {
                if !(t > 0.0) {
                    return domain(format!("residual needs t > 0, got {t}"));
                }
                // ∂^Φ acts on the time factors only
                let tau = derivative_grid(t, 400);
                let n = self.lambdas.len();
                let mut e = vec![Vec::with_capacity(tau.len()); n];
                for &s in &tau {
                    let r = self.relax.eigenfunctions(s, &self.lambdas)?;
                    for (row, v) in e.iter_mut().zip(r) {
                        row.push(v);
                    }
                }
                let mut dw = Vec::with_capacity(n);
                for (row, c) in e.into_iter().zip(&self.expansion.coeffs) {
                    let d = nonlocal_derivative(self.phi(), &Sampled::new(tau.clone(), row)?, t)?;
                    dw.push(d * c);
                }
                let w = self.weights(t)?;
                let mut worst = 0.0f64;
                for &x in x_grid {
                    let lhs = self.combine(&dw, x);
                    let rhs = self.apply_operator(|y| self.combine(&w, y), x)?;
                    worst = worst.max((lhs - rhs).abs());
                }
                Ok(worst)
            })
            .collect();
        per_t.into_iter().try_fold(0.0f64, |a, r| Ok(a.max(r?)))
    }

    fn apply_operator(&self, g: impl Fn(f64) -> f64, x: f64) -> Result<f64> {
        match self.mode() {
            Mode::Backward => self.expansion.family.generator_apply(g, x),
            Mode::Forward => self.expansion.family.fokker_planck_apply(g, x),
        }
    }
}

/// Residual of an arbitrary field w(t,x) against the non-local backward or
/// forward equation, sampling w in time on the derivative grid.
pub fn residual_of(
    family: &PearsonFamily,
    phi: &BernsteinDescriptor,
    mode: Mode,
    w: impl Fn(f64, f64) -> f64 + Sync,
    t_grid: &[f64],
    x_grid: &[f64],
) -> Result<f64> {
    let mut worst = 0.0f64;
    for &t in t_grid {
        let tau = derivative_grid(t, 400);
        for &x in x_grid {
            let s = Sampled::from_fn(tau.clone(), |s| w(s, x))?;
            let lhs = nonlocal_derivative(phi, &s, t)?;
            let rhs = match mode {
                Mode::Backward => family.generator_apply(|y| w(t, y), x)?,
                Mode::Forward => family.fokker_planck_apply(|y| w(t, y), x)?,
            };
            worst = worst.max((lhs - rhs).abs());
        }
    }
    Ok(worst)
}

/// Log-spaced time grid on [t0, t1].
pub fn log_grid(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![t1];
    }
    (0..n).map(|i| t0 * (t1 / t0).powf(i as f64 / (n - 1) as f64)).collect()
}
