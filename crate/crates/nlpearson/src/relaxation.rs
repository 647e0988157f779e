//! Relaxation eigenfunction ℰ_Φ(t;−λ) = E[e^{−λ L_Φ(t)}] and the non-local
//! convolution derivative ∂_t^Φ.

use crate::bernstein::BernsteinDescriptor;
use crate::error::{domain, numeric, Error, Result};
use crate::laplace::{check_agreement, stehfest_nodes, stehfest_values, InversionParams, TalbotRule, STEHFEST_N};
use crate::mittag_leffler::ml_neg;
use crate::quad::{tanh_sinh, Tol};
use crate::subordination::RenewalFunction;
use num_complex::Complex64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RelaxationMethod {
    /// E_α(−λ t^α).
    MittagLeffler(f64),
    /// Talbot inversion of Φ(z) / (z (Φ(z) + λ)).
    LaplaceInversion(InversionParams),
}

#[derive(Clone, Debug)]
pub struct RelaxationEvaluator {
    desc: BernsteinDescriptor,
    method: RelaxationMethod,
}

impl RelaxationEvaluator {
    pub fn new(desc: BernsteinDescriptor) -> Self {
        Self::with_params(desc, InversionParams::default())
    }

    /// Mittag-Leffler for stable descriptors; otherwise inversion with `params`.
    pub fn with_params(desc: BernsteinDescriptor, params: InversionParams) -> Self {
        let method = match desc.stable_alpha() {
            Some(a) => RelaxationMethod::MittagLeffler(a),
            None => RelaxationMethod::LaplaceInversion(params),
        };
        RelaxationEvaluator { desc, method }
    }

    /// Always inverts numerically, also for stable descriptors.
    pub fn laplace(desc: BernsteinDescriptor, params: InversionParams) -> Self {
        RelaxationEvaluator { desc, method: RelaxationMethod::LaplaceInversion(params) }
    }

    pub fn descriptor(&self) -> &BernsteinDescriptor {
        &self.desc
    }

    pub fn method(&self) -> RelaxationMethod {
        self.method
    }

    /// ℰ_Φ(t;−λ) for t, λ ≥ 0.
    pub fn eigenfunction(&self, t: f64, lambda: f64) -> Result<f64> {
        Ok(self.eigenfunctions(t, &[lambda])?[0])
    }

    /// ℰ_Φ(t;−λ_i) for several λ at one time, sharing the inversion nodes.
    pub fn eigenfunctions(&self, t: f64, lambdas: &[f64]) -> Result<Vec<f64>> {
        if !(t >= 0.0) {
            return domain(format!("relaxation needs t >= 0, got {t}"));
        }
        if let Some(l) = lambdas.iter().find(|l| !(**l >= 0.0)) {
            return domain(format!("relaxation needs lambda >= 0, got {l}"));
        }
        if t == 0.0 {
            return Ok(vec![1.0; lambdas.len()]);
        }
        match self.method {
            RelaxationMethod::MittagLeffler(a) => Ok(lambdas.iter().map(|&l| ml_neg(a, l * t.powf(a))).collect()),
            RelaxationMethod::LaplaceInversion(p) => {
                let rule = TalbotRule::new(t, p.talbot_nodes);
                let phis: Vec<Complex64> = rule.nodes.iter().map(|z| self.desc.phi_complex(*z)).collect();
                let base: Vec<Complex64> = rule.nodes.iter().zip(&phis).map(|(z, ph)| ph.ln() - z.ln()).collect();
                let (sx, sphi) = if p.cross_check {
                    let x = stehfest_nodes(t);
                    let ph: [f64; STEHFEST_N] = std::array::from_fn(|k| self.desc.phi(x[k]));
                    (x, ph)
                } else {
                    ([0.0; STEHFEST_N], [0.0; STEHFEST_N])
                };
                let mut out = Vec::with_capacity(lambdas.len());
                for &l in lambdas {
                    if l == 0.0 {
                        out.push(1.0);
                        continue;
                    }
                    let lv: Vec<Complex64> = base.iter().zip(&phis).map(|(b, ph)| b - (ph + l).ln()).collect();
                    let v = rule.apply_log_values(&lv);
                    if !v.is_finite() {
                        return numeric(format!("relaxation inversion produced {v} at t = {t}, lambda = {l}"));
                    }
                    if p.cross_check {
                        let vals: [f64; STEHFEST_N] = std::array::from_fn(|k| sphi[k] / (sx[k] * (sphi[k] + l)));
                        check_agreement(v, stehfest_values(&vals, t), t, &p)?;
                    }
                    out.push(v.clamp(0.0, 1.0));
                }
                Ok(out)
            }
        }
    }

    /// Theoretical stationary correlation Corr(X_Φ(t), X_Φ(s)), t ≥ s ≥ 0,
    /// for a process with first nonzero eigenvalue λ₁:
    /// ℰ(t;−λ₁) + λ₁ ∫₀ˢ ℰ(t−τ;−λ₁) dU_Φ(τ).
    pub fn stationary_correlation(&self, renewal: &RenewalFunction, lambda1: f64, t: f64, s: f64) -> Result<f64> {
        if !(s >= 0.0 && t >= s) {
            return domain(format!("correlation needs t >= s >= 0, got t = {t}, s = {s}"));
        }
        let base = self.eigenfunction(t, lambda1)?;
        if s == 0.0 {
            return Ok(base);
        }
        // below τ₀ the integrand is ℰ(t) dU to first order; renewal densities
        // such as 1/(τ ln²τ) are only integrable in the log variable
        let tau0 = 1e-6 * s;
        let head = self.eigenfunction(t - 0.5 * tau0, lambda1)? * renewal.renewal(tau0)?;
        let err = std::cell::Cell::new(None::<Error>);
        let f = |w: f64| -> f64 {
            let tau = w.exp();
            let e = self.eigenfunction((t - tau).max(0.0), lambda1);
            let u = renewal.renewal_density(tau);
            match (e, u) {
                (Ok(e), Ok(u)) => e * u * tau,
                (Err(x), _) | (_, Err(x)) => {
                    err.set(Some(x));
                    0.0
                }
            }
        };
        let i = tanh_sinh(f, tau0.ln(), s.ln(), Tol::new(1e-10, 1e-8))?;
        if let Some(e) = err.take() {
            return Err(e);
        }
        Ok(base + lambda1 * (head + i))
    }
}

/// A function sampled at increasing times starting from 0.
#[derive(Clone, Debug)]
pub struct Sampled {
    pub t: Vec<f64>,
    pub u: Vec<f64>,
}

impl Sampled {
    pub fn new(t: Vec<f64>, u: Vec<f64>) -> Result<Self> {
        if t.len() != u.len() || t.len() < 2 {
            return Err(Error::Resolution("sampled function needs matching grids with at least two points".into()));
        }
        if t[0] != 0.0 || !t.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::Resolution("sample times must start at 0 and increase".into()));
        }
        Ok(Sampled { t, u })
    }

    pub fn from_fn(t: Vec<f64>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let u = t.iter().map(|&x| f(x)).collect();
        Self::new(t, u)
    }
}

/// Sample grid resolving both the singular start and the kernel's
/// singularity at τ = t: geometric on [10⁻¹⁶t, t/10], uniform on [t/10, t].
pub fn derivative_grid(t: f64, n_uniform: usize) -> Vec<f64> {
    let mut g = vec![0.0];
    let per_decade = 40;
    for i in 0..15 * per_decade {
        g.push(t * 10f64.powf(-16.0 + i as f64 / per_decade as f64));
    }
    for i in 0..=n_uniform {
        g.push(t * (0.1 + 0.9 * i as f64 / n_uniform as f64));
    }
    g
}

/// ∂_t^Φ u(t) = d/dt ∫₀ᵗ (u(τ) − u(0)) ν̄_Φ(t−τ) dτ for a piecewise-linear
/// interpolant of the samples. Product integration against ν̄ uses the exact
/// moments ℐ_Φ, so no sample is differentiated twice.
pub fn nonlocal_derivative(desc: &BernsteinDescriptor, u: &Sampled, t: f64) -> Result<f64> {
    let n_in = u.t.iter().take_while(|&&x| x < t).count();
    if !(t > 0.0) || t > *u.t.last().unwrap() {
        return domain(format!("derivative point {t} outside the sampled range (0, {}]", u.t.last().unwrap()));
    }
    if n_in < 8 {
        return Err(Error::Resolution(format!("only {n_in} samples in [0, {t}); at least 8 are needed")));
    }
    let mut acc = 0.0;
    for j in 0..n_in {
        let a = u.t[j];
        let (b, ub) = if j + 1 < u.t.len() && u.t[j + 1] <= t {
            (u.t[j + 1], u.u[j + 1])
        } else {
            let b1 = u.t[j + 1];
            let w = (t - a) / (b1 - a);
            (t, u.u[j] + w * (u.u[j + 1] - u.u[j]))
        };
        if b <= a {
            continue;
        }
        let slope = (ub - u.u[j]) / (b - a);
        let w = if b - a < 1e-3 * (t - b) {
            // narrow segment far from τ = t: differencing ℐ would cancel
            let m = 0.5 * (a + b);
            (b - a) / 6.0 * (desc.tail(t - a) + 4.0 * desc.tail(t - m) + desc.tail(t - b))
        } else {
            desc.itail(t - a) - desc.itail(t - b)
        };
        acc += slope * w;
    }
    Ok(acc)
}

/// Non-local derivative of an analytic function, sampled on [`derivative_grid`].
pub fn nonlocal_derivative_fn(desc: &BernsteinDescriptor, f: impl Fn(f64) -> f64, t: f64) -> Result<f64> {
    let s = Sampled::from_fn(derivative_grid(t, 400), f)?;
    nonlocal_derivative(desc, &s, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn catalogue() -> Vec<BernsteinDescriptor> {
        vec![
            BernsteinDescriptor::stable(0.5).unwrap(),
            BernsteinDescriptor::tempered_stable(0.5, 1.0).unwrap(),
            BernsteinDescriptor::geometric_stable(0.5).unwrap(),
            BernsteinDescriptor::gamma(),
        ]
    }

    #[test]
    fn mittag_leffler_values() {
        let ev = RelaxationEvaluator::new(BernsteinDescriptor::stable(0.5).unwrap());
        assert_eq!(ev.eigenfunction(0.0, 7.0).unwrap(), 1.0);
        assert!((ev.eigenfunction(1.0, 1.0).unwrap() - 0.427_583_576_155_807).abs() < 1e-13);
        assert!((ev.eigenfunction(1.0, 4.0).unwrap() - 0.136_999_457_625_061_4).abs() < 1e-13);
        // scaling: depends on λt^α only
        let a = ev.eigenfunction(4.0, 1.0).unwrap();
        let b = ev.eigenfunction(1.0, 2.0).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-14);
    }

    #[test]
    fn inversion_matches_mittag_leffler() {
        for &a in &[0.3, 0.5, 0.7] {
            let d = BernsteinDescriptor::stable(a).unwrap();
            let ml = RelaxationEvaluator::new(d.clone());
            let inv = RelaxationEvaluator::laplace(d, InversionParams::default());
            for &t in &[0.1, 1.0, 3.0] {
                for &l in &[0.5, 1.0, 2.0, 5.0] {
                    let x = ml.eigenfunction(t, l).unwrap();
                    let y = inv.eigenfunction(t, l).unwrap();
                    assert!((x - y).abs() < 1e-8, "alpha {a} t {t} lambda {l}");
                }
            }
        }
    }

    #[test]
    fn monotone_and_uniformly_bounded() {
        for d in catalogue() {
            let ev = RelaxationEvaluator::new(d);
            let ls: Vec<f64> = (0..=40).map(|i| 10f64.powf(-2.0 + 0.15 * i as f64)).collect();
            let e = ev.eigenfunctions(1.0, &ls).unwrap();
            assert!(e.windows(2).all(|w| w[1] <= w[0] + 1e-12));
            let k = ls.iter().zip(&e).map(|(l, v)| l * v).fold(0.0, f64::max);
            assert!(k < 10.0);
            let ts: Vec<f64> = (1..30).map(|i| 0.1 * i as f64).collect();
            let et: Vec<f64> = ts.iter().map(|&t| ev.eigenfunction(t, 1.0).unwrap()).collect();
            assert!(et.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        }
    }

    #[test]
    fn derivative_of_constant_and_identity() {
        let d = BernsteinDescriptor::stable(0.5).unwrap();
        assert_eq!(nonlocal_derivative_fn(&d, |_| 3.0, 1.0).unwrap(), 0.0);
        let v = nonlocal_derivative_fn(&d, |x| x, 1.0).unwrap();
        assert_relative_eq!(v, 2.0 / std::f64::consts::PI.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn relaxation_equation_residual() {
        for d in catalogue() {
            let ev = RelaxationEvaluator::new(d.clone());
            for &l in &[0.5, 1.0, 2.0] {
                for &t in &[0.1, 1.0, 3.0] {
                    let lhs = nonlocal_derivative_fn(&d, |x| ev.eigenfunction(x, l).unwrap(), t).unwrap();
                    let rhs = -l * ev.eigenfunction(t, l).unwrap();
                    assert!((lhs - rhs).abs() < 1e-3, "{d:?} lambda {l} t {t}: {lhs} vs {rhs}");
                }
            }
        }
    }

    #[test]
    fn too_few_samples() {
        let d = BernsteinDescriptor::gamma();
        let s = Sampled::from_fn(vec![0.0, 0.5, 1.0], |x| x).unwrap();
        assert!(matches!(nonlocal_derivative(&d, &s, 1.0), Err(Error::Resolution(_))));
    }

    #[test]
    fn correlation_identities() {
        for d in catalogue() {
            let ev = RelaxationEvaluator::new(d.clone());
            let r = RenewalFunction::new(d, 5.0).unwrap();
            // renewal identity makes the correlation one on the diagonal
            let c = ev.stationary_correlation(&r, 1.0, 1.5, 1.5).unwrap();
            assert!((c - 1.0).abs() < 1e-6, "{c}");
            let c0 = ev.stationary_correlation(&r, 1.0, 1.5, 0.0).unwrap();
            assert_eq!(c0, ev.eigenfunction(1.5, 1.0).unwrap());
        }
    }
}
