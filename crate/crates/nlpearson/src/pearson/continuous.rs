//! Continuous-spectrum eigenfunctions and spectral weights of the
//! Fisher–Snedecor and reciprocal gamma diffusions.
//!
//! Above the cut-off Λ write λ = Λ + cκ² with κ > 0. The eigenfunctions are
//!   FS: f(x) = ₂F₁(−β/4+iκ, −β/4−iκ; α/2; −αx/β),
//!   RG: f(x) = α^{(β+1)/2} ₂F₀(−β/2+iκ, −β/2−iκ;; −x/α),
//! both real. They are summed as series near the origin and continued
//! outward by integrating 𝒢f + λf = 0 in ξ = ln x.

use super::{FamilySpec, PearsonFamily};
use crate::error::{Error, Result};
use crate::special::{ln_abs_gamma_sq, ln_gamma};
use num_complex::Complex64;
use statrs::function::beta::ln_beta;

#[derive(Clone, Copy, Debug)]
enum Kind {
    Fs { alpha: f64, beta: f64 },
    Rg { alpha: f64, beta: f64 },
}

#[derive(Clone, Debug)]
pub struct ContinuousSpectrumData {
    family: PearsonFamily,
    kind: Kind,
    cutoff: f64,
    c: f64,
}

impl ContinuousSpectrumData {
    pub fn new(family: &PearsonFamily) -> Result<Self> {
        let th = family.theta();
        let (kind, cutoff, c) = match family.spec() {
            FamilySpec::Fs { alpha, beta, .. } => {
                (Kind::Fs { alpha, beta }, th * beta * beta / (8.0 * (beta - 2.0)), 2.0 * th / (beta - 2.0))
            }
            FamilySpec::Rg { alpha, beta, .. } => {
                (Kind::Rg { alpha, beta }, th * beta * beta / (4.0 * (beta - 1.0)), th / (beta - 1.0))
            }
            FamilySpec::Student { .. } => {
                return Err(Error::Unsupported("continuous eigenfunctions of the Student diffusion".into()))
            }
            _ => return Err(Error::Unsupported("family has a purely discrete spectrum".into())),
        };
        Ok(ContinuousSpectrumData { family: family.clone(), kind, cutoff, c })
    }

    pub fn family(&self) -> &PearsonFamily {
        &self.family
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    /// Δ²(λ); negative above the cut-off.
    pub fn delta_sq(&self, lambda: f64) -> f64 {
        let th = self.family.theta();
        match self.kind {
            Kind::Fs { beta, .. } => beta * beta / 16.0 - lambda * (beta - 2.0) / (2.0 * th),
            Kind::Rg { beta, .. } => 0.25 * (beta * beta - 4.0 * lambda * (beta - 1.0) / th),
        }
    }

    /// κ = |Δ(λ)| for λ above the cut-off.
    pub fn kappa(&self, lambda: f64) -> Result<f64> {
        if !(lambda > self.cutoff) {
            return Err(Error::Domain(format!("lambda = {lambda} is not above the cut-off {}", self.cutoff)));
        }
        Ok((-self.delta_sq(lambda)).max(0.0).sqrt())
    }

    /// λ as a function of κ: Λ + cκ².
    pub fn lambda_of_kappa(&self, kappa: f64) -> f64 {
        self.cutoff + self.c * kappa * kappa
    }

    /// dλ/d(κ²).
    pub fn curvature(&self) -> f64 {
        self.c
    }

    /// The weight a(λ) in the form κ·|…|², with the factor (−iΔ) = κ.
    pub fn printed_weight(&self, lambda: f64) -> Result<f64> {
        let k = self.kappa(lambda)?;
        Ok(self.printed_weight_kappa(k))
    }

    pub(crate) fn printed_weight_kappa(&self, k: f64) -> f64 {
        if k == 0.0 {
            return 0.0;
        }
        let z = |re: f64, im: f64| Complex64::new(re, im);
        let ln = match self.kind {
            Kind::Fs { alpha, beta } => {
                ln_beta(alpha / 2.0, beta / 2.0)
                    + ln_abs_gamma_sq(z(-beta / 4.0, k))
                    + ln_abs_gamma_sq(z(alpha / 2.0 + beta / 4.0, k))
                    - 2.0 * ln_gamma(alpha / 2.0)
                    - ln_abs_gamma_sq(z(1.0, 2.0 * k))
            }
            Kind::Rg { alpha, beta } => {
                ln_gamma(beta) + ln_abs_gamma_sq(z(-beta / 2.0, k))
                    - (beta + 1.0) * alpha.ln()
                    - ln_abs_gamma_sq(z(1.0, 2.0 * k))
            }
        };
        k * ln.exp()
    }

    /// Spectral weight per unit λ, so that the continuous part of the
    /// transition density is (m(x)/π) ∫_Λ^∞ e^{−λt} w(λ) f(x;λ) f(x₀;λ) dλ.
    pub fn continuous_weight(&self, lambda: f64) -> Result<f64> {
        Ok(self.printed_weight(lambda)? / self.c)
    }

    /// f(x; λ).
    pub fn eigenfunction(&self, x: f64, lambda: f64) -> Result<f64> {
        Ok(self.eigenfunctions(&[x], lambda)?[0])
    }

    /// f(x_i; λ) for many points with one outward sweep.
    pub fn eigenfunctions(&self, xs: &[f64], lambda: f64) -> Result<Vec<f64>> {
        let k = self.kappa(lambda)?;
        self.eigenfunctions_kappa(xs, k)
    }

    pub(crate) fn eigenfunctions_kappa(&self, xs: &[f64], k: f64) -> Result<Vec<f64>> {
        for &x in xs {
            self.family.check(x)?;
        }
        let lambda = self.lambda_of_kappa(k);
        let x_s = self.series_limit(k);
        let mut order: Vec<usize> = (0..xs.len()).collect();
        order.sort_by(|&i, &j| xs[i].total_cmp(&xs[j]));
        let mut out = vec![0.0; xs.len()];
        let mut targets = Vec::new();
        for &i in &order {
            if xs[i] <= x_s {
                out[i] = self.series(xs[i], k)?.0;
            } else {
                targets.push(i);
            }
        }
        if targets.is_empty() {
            return Ok(out);
        }
        let (f0, g0) = self.series(x_s, k)?;
        let xi: Vec<f64> = targets.iter().map(|&i| xs[i].ln()).collect();
        let fam = &self.family;
        let rhs = |xi: f64, y: [f64; 2]| -> [f64; 2] {
            let x = xi.exp();
            let d = fam.diffusion(x);
            [y[1], y[1] - (x * fam.drift(x) * y[1] + x * x * lambda * y[0]) / d]
        };
        let ys = dopri(rhs, x_s.ln(), [f0, g0], &xi, 1e-11)?;
        for (&i, y) in targets.iter().zip(ys) {
            out[i] = y[0];
        }
        Ok(out)
    }

    /// Largest x where the local series is summed directly.
    fn series_limit(&self, k: f64) -> f64 {
        match self.kind {
            Kind::Fs { alpha, beta } => {
                let growth = (k * k + beta * beta / 16.0 + 1.0) / (alpha / 2.0);
                (0.5f64).min(0.25 / growth) * beta / alpha
            }
            Kind::Rg { alpha, beta } => 0.1 * alpha / (k * k + beta * beta / 4.0 + 1.0),
        }
    }

    /// (f, x f′) at x by the local series.
    fn series(&self, x: f64, k: f64) -> Result<(f64, f64)> {
        match self.kind {
            Kind::Fs { alpha, beta } => {
                let z = -alpha * x / beta;
                let (mut term, mut s, mut ds) = (1.0, 1.0, 0.0);
                for j in 0..5000 {
                    let jf = j as f64;
                    let a = jf - beta / 4.0;
                    term *= (a * a + k * k) / ((jf + alpha / 2.0) * (jf + 1.0)) * z;
                    s += term;
                    ds += (jf + 1.0) * term;
                    if term.abs() < 1e-17 * s.abs().max(1e-300) && j > 2 {
                        return Ok((s, ds));
                    }
                }
                Err(Error::Numeric("hypergeometric series did not converge".into()))
            }
            Kind::Rg { alpha, beta } => {
                // asymptotic series, truncated at its smallest term
                let z = -x / alpha;
                let pre = alpha.powf(0.5 * (beta + 1.0));
                let (mut term, mut s, mut ds) = (1.0f64, 1.0, 0.0);
                let mut last = 1.0f64;
                for j in 0..100_000 {
                    let jf = j as f64;
                    let a = jf - beta / 2.0;
                    let next = term * (a * a + k * k) / (jf + 1.0) * z;
                    if next.abs() > last && j > 2 {
                        break;
                    }
                    term = next;
                    last = term.abs();
                    s += term;
                    ds += (jf + 1.0) * term;
                    if term.abs() < 1e-17 * s.abs() {
                        break;
                    }
                }
                if last > 1e-12 * s.abs() {
                    return Err(Error::Numeric("asymptotic series did not reach tolerance".into()));
                }
                Ok((pre * s, pre * ds))
            }
        }
    }
}

/// Dormand–Prince 5(4) for a 2-vector system, reporting the solution at
/// increasing abscissae.
fn dopri<F: Fn(f64, [f64; 2]) -> [f64; 2]>(
    f: F,
    t0: f64,
    y0: [f64; 2],
    ts: &[f64],
    rtol: f64,
) -> Result<Vec<[f64; 2]>> {
    const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
    const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const E: [f64; 7] =
        [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0];
    let mut t = t0;
    let mut y = y0;
    let mut h = 1e-3f64;
    let mut out = Vec::with_capacity(ts.len());
    let mut steps = 0usize;
    for &target in ts {
        while t < target {
            steps += 1;
            if steps > 5_000_000 {
                return Err(Error::Numeric("eigenfunction integration exceeded the step budget".into()));
            }
            let hh = h.min(target - t);
            let mut k = [[0.0; 2]; 7];
            k[0] = f(t, y);
            for s in 1..7 {
                let mut ys = y;
                for (j, kj) in k.iter().enumerate().take(s) {
                    ys[0] += hh * A[s][j] * kj[0];
                    ys[1] += hh * A[s][j] * kj[1];
                }
                k[s] = f(t + C[s] * hh, ys);
            }
            let mut yn = y;
            let mut err = 0.0f64;
            for i in 0..2 {
                let incr: f64 = (0..6).map(|s| A[6][s] * k[s][i]).sum();
                let e: f64 = (0..7).map(|s| E[s] * k[s][i]).sum();
                yn[i] = y[i] + hh * incr;
                let sc = rtol * (y[i].abs().max(yn[i].abs()) + (y[0].abs() + y[1].abs()) * 1e-3 + 1e-300);
                err = err.max((hh * e).abs() / sc);
            }
            if err <= 1.0 || hh < 1e-14 {
                t += hh;
                y = yn;
            }
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = hh * fac;
        }
        out.push(y);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::make_family;
    use super::*;
    use approx::assert_relative_eq;

    fn fs(alpha: f64, beta: f64) -> ContinuousSpectrumData {
        ContinuousSpectrumData::new(&make_family(FamilySpec::Fs { theta: 1.0, alpha, beta }).unwrap()).unwrap()
    }

    #[test]
    fn cutoff_and_discriminant() {
        let c = fs(4.0, 6.0);
        assert_eq!(c.delta_sq(c.cutoff()), 0.0);
        let r =
            ContinuousSpectrumData::new(&make_family(FamilySpec::Rg { theta: 1.3, alpha: 2.0, beta: 9.0 }).unwrap())
                .unwrap();
        assert!(r.delta_sq(r.cutoff()).abs() < 1e-14);
        assert!(c.kappa(c.cutoff()).is_err());
        for &k in &[0.1, 1.0, 7.0] {
            assert_relative_eq!(c.kappa(c.lambda_of_kappa(k)).unwrap(), k, max_relative = 1e-12);
            assert_relative_eq!(r.kappa(r.lambda_of_kappa(k)).unwrap(), k, max_relative = 1e-12);
        }
    }

    #[test]
    fn boundary_values() {
        let c = fs(4.0, 6.0);
        assert_eq!(c.series(0.0, 1.0).unwrap().0, 1.0);
        let r =
            ContinuousSpectrumData::new(&make_family(FamilySpec::Rg { theta: 1.0, alpha: 2.0, beta: 9.0 }).unwrap())
                .unwrap();
        assert_relative_eq!(r.eigenfunction(1e-6, 3.0).unwrap(), 2f64.powf(5.0), max_relative = 1e-4);
    }

    #[test]
    fn weight_vanishes_at_cutoff_and_is_positive() {
        let c = fs(4.0, 6.0);
        let near = c.printed_weight(c.cutoff() * (1.0 + 1e-12)).unwrap();
        assert!(near < 1e-5);
        for j in 1..50 {
            let lam = c.cutoff() + 0.3 * j as f64;
            assert!(c.continuous_weight(lam).unwrap() > 0.0);
        }
    }

    #[test]
    fn eigenvalue_equation_residual() {
        for c in [
            fs(5.0, 17.0),
            ContinuousSpectrumData::new(&make_family(FamilySpec::Rg { theta: 1.0, alpha: 2.0, beta: 9.0 }).unwrap())
                .unwrap(),
        ] {
            let lam = c.cutoff() + 2.0;
            for &x in &[0.7, 2.0, 5.0] {
                let f = |y: f64| c.eigenfunction(y, lam).unwrap();
                let g = c.family().generator_apply(f, x).unwrap();
                let v = f(x);
                let scale = v.abs() + (f(x * 1.1) - f(x * 0.9)).abs();
                assert!((g + lam * v).abs() < 1e-6 * scale * (1.0 + lam), "x = {x}: {g} vs {}", -lam * v);
            }
        }
    }

    #[test]
    fn sweep_matches_pointwise() {
        let c = fs(5.0, 17.0);
        let xs = [3.0, 0.01, 1.0, 40.0, 0.3];
        let lam = c.lambda_of_kappa(12.0);
        let all = c.eigenfunctions(&xs, lam).unwrap();
        for (x, v) in xs.iter().zip(all) {
            assert_relative_eq!(c.eigenfunction(*x, lam).unwrap(), v, max_relative = 1e-8, epsilon = 1e-10);
        }
    }
}
