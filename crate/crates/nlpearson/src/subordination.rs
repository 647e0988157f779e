//! Inverse subordinator L_Φ(t): its density f_Φ(s;t), the renewal function
//! U_Φ(t) = E[L_Φ(t)] and integrals of kernels against f_Φ(·;t).

use crate::bernstein::BernsteinDescriptor;
use crate::error::{domain, numeric, Error, Result};
use crate::interp::Hermite;
use crate::laplace::{check_agreement, invert, stehfest, InversionParams, TalbotRule};
use crate::quad::{gauss_kronrod, tanh_sinh, Tol};
use crate::special::{ln_gamma, rgamma};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

/// How f_Φ(s;t) is evaluated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Inversion {
    /// Wright series / Kanter integral for Φ(λ) = λ^α.
    ClosedFormStable,
    NumericLaplace(InversionParams),
}

/// Mass beyond the truncation point of subordination integrals.
pub const TAIL_MASS: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct InverseSubordinatorDensity {
    desc: BernsteinDescriptor,
    inversion: Inversion,
}

impl InverseSubordinatorDensity {
    /// Closed form for stable descriptors, Talbot inversion otherwise.
    ///
    /// The Stehfest cross-check is off by default here: its 14-term sum is
    /// only good to about 10⁻³ on these transforms.
    pub fn new(desc: BernsteinDescriptor) -> Self {
        let inversion = if desc.stable_alpha().is_some() {
            Inversion::ClosedFormStable
        } else {
            Inversion::NumericLaplace(InversionParams::default().without_cross_check())
        };
        InverseSubordinatorDensity { desc, inversion }
    }

    /// Forces numeric inversion with the given settings.
    pub fn with_inversion(desc: BernsteinDescriptor, params: InversionParams) -> Self {
        InverseSubordinatorDensity { desc, inversion: Inversion::NumericLaplace(params) }
    }

    pub fn descriptor(&self) -> &BernsteinDescriptor {
        &self.desc
    }

    pub fn inversion(&self) -> Inversion {
        self.inversion
    }

    /// f_Φ(s;t) for s ≥ 0, t > 0.
    pub fn density(&self, s: f64, t: f64) -> Result<f64> {
        if !(t > 0.0) || !(s >= 0.0) {
            return domain(format!("inverse subordinator density needs s >= 0 and t > 0, got s = {s}, t = {t}"));
        }
        match self.inversion {
            Inversion::ClosedFormStable => {
                let a = self.desc.stable_alpha().ok_or_else(|| {
                    Error::Misuse("closed-form inversion requested for a non-stable descriptor".into())
                })?;
                let ta = t.powf(-a);
                Ok(ta * mainardi(a, s * ta))
            }
            Inversion::NumericLaplace(p) => {
                let d = &self.desc;
                let rule = TalbotRule::new(t, p.talbot_nodes);
                let v = rule.apply_log(|z| {
                    let ph = d.phi_complex(z);
                    ph.ln() - z.ln() - s * ph
                });
                if !v.is_finite() {
                    return numeric(format!("Talbot inversion produced {v} at s = {s}, t = {t}"));
                }
                if p.cross_check {
                    let sv = stehfest(
                        |x| {
                            let ph = d.phi(x);
                            ph / x * (-s * ph).exp()
                        },
                        t,
                    );
                    check_agreement(v, sv, t, &p)?;
                }
                Ok(v.max(0.0))
            }
        }
    }

    /// f_Φ(s_i;t) over a grid of s, sharing the Talbot nodes.
    pub fn density_grid(&self, s: &[f64], t: f64) -> Result<Vec<f64>> {
        if let Inversion::NumericLaplace(p) = self.inversion {
            if !p.cross_check && t > 0.0 && s.iter().all(|v| *v >= 0.0) {
                let rule = TalbotRule::new(t, p.talbot_nodes);
                let phis: Vec<Complex64> = rule.nodes.iter().map(|z| self.desc.phi_complex(*z)).collect();
                let base: Vec<Complex64> = rule.nodes.iter().zip(&phis).map(|(z, ph)| ph.ln() - z.ln()).collect();
                return s
                    .par_iter()
                    .map(|&sv| {
                        let lv: Vec<Complex64> = base.iter().zip(&phis).map(|(b, ph)| b - sv * ph).collect();
                        let v = rule.apply_log_values(&lv);
                        if v.is_finite() {
                            Ok(v.max(0.0))
                        } else {
                            numeric(format!("Talbot inversion produced {v} at s = {sv}, t = {t}"))
                        }
                    })
                    .collect();
            }
        }
        s.par_iter().map(|&sv| self.density(sv, t)).collect()
    }

    /// Chernoff bound P(L(t) > s) = P(σ(s) < t) ≤ inf_λ exp(λt − sΦ(λ)).
    pub fn tail_bound(&self, s: f64, t: f64) -> f64 {
        let mut best: f64 = 0.0;
        for i in 0..=120 {
            let l = 10f64.powf(-4.0 + 0.1 * i as f64) / t;
            best = best.min(l * t - s * self.desc.phi(l));
        }
        best.exp()
    }

    /// Smallest doubling point s* with P(L(t) > s*) ≤ `mass`.
    pub fn truncation_point(&self, t: f64, mass: f64) -> f64 {
        let mut s = 1.0 / self.desc.phi(1.0 / t).max(1e-300);
        for _ in 0..200 {
            if self.tail_bound(s, t) <= mass {
                return s;
            }
            s *= 1.5;
        }
        s
    }

    /// ∫₀^∞ k(s) f_Φ(s;t) ds, truncated where the Chernoff bound drops below
    /// [`TAIL_MASS`].
    pub fn subordinate<K: Fn(f64) -> f64 + Sync>(&self, kernel: K, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return domain(format!("subordination needs t > 0, got {t}"));
        }
        let s_star = self.truncation_point(t, TAIL_MASS);
        // kernel growth must not outrun the decay of the mass bound
        let w1 = kernel(s_star).abs() * self.tail_bound(s_star, t);
        let w2 = kernel(2.0 * s_star).abs() * self.tail_bound(2.0 * s_star, t);
        let w4 = kernel(4.0 * s_star).abs() * self.tail_bound(4.0 * s_star, t);
        if !(w1.is_finite() && w2.is_finite() && w4.is_finite()) || (w4 > w2 && w2 > w1 && w2 > 1e-6) {
            return Err(Error::Datum(format!(
                "kernel is not integrable against the inverse subordinator density at t = {t}"
            )));
        }
        let integrand = |s: f64| -> f64 {
            match self.density(s, t) {
                Ok(f) => kernel(s) * f,
                Err(_) => f64::NAN,
            }
        };
        let tol = Tol::new(1e-12, 1e-9);
        let v = match tanh_sinh(integrand, 0.0, s_star, tol) {
            Ok(v) if v.is_finite() => v,
            _ => gauss_kronrod(integrand, 0.0, s_star, Tol::new(1e-11, 1e-8))?,
        };
        if !v.is_finite() {
            return numeric(format!("subordination integral is not finite at t = {t}"));
        }
        Ok(v)
    }
}

/// Mainardi function M_α(z), so that f(s;t) = t^{−α} M_α(s t^{−α}) when
/// Φ(λ) = λ^α.
pub fn mainardi(alpha: f64, z: f64) -> f64 {
    if z <= 1.0 {
        mainardi_series(alpha, z)
    } else {
        mainardi_kanter(alpha, z)
    }
}

fn mainardi_series(alpha: f64, z: f64) -> f64 {
    let mut sum = rgamma(1.0 - alpha);
    let mut zk = 1.0;
    let mut fact = 1.0;
    for k in 1..400 {
        zk *= -z;
        fact *= k as f64;
        let y = alpha * (k + 1) as f64;
        sum += zk / fact * rgamma(1.0 - y);
        // |1/Γ(1−y)| ≤ Γ(y)/π bounds terms that vanish exactly at poles
        if k > 10 && zk.abs() / fact * (ln_gamma(y).exp() / PI) < 1e-18 {
            break;
        }
    }
    sum
}

/// Kanter's integral representation of the one-sided stable density,
/// rewritten in the Mainardi variable.
fn mainardi_kanter(alpha: f64, z: f64) -> f64 {
    let q = 1.0 / (1.0 - alpha);
    let c = z.powf(q);
    let f = |phi: f64| {
        if phi <= 0.0 || phi >= PI {
            return 0.0;
        }
        let ln_a = alpha * q * (alpha * phi).sin().ln() + ((1.0 - alpha) * phi).sin().ln() - q * phi.sin().ln();
        let a = ln_a.exp();
        a * (-c * a).exp()
    };
    let i = gauss_kronrod(f, 0.0, PI, Tol::new(0.0, 1e-13)).unwrap_or(f64::NAN);
    z.powf(alpha * q) * q * i / PI
}

/// U_Φ(t) = E[L_Φ(t)], eagerly tabulated for non-stable descriptors.
#[derive(Clone, Debug)]
pub struct RenewalFunction {
    desc: BernsteinDescriptor,
    table: Option<RenewalTable>,
    params: InversionParams,
}

/// ln U against ln t with exact slopes t U′/U.
#[derive(Clone, Debug)]
struct RenewalTable {
    w0: f64,
    w1: f64,
    ln_u: Hermite,
}

impl RenewalFunction {
    const T_MIN: f64 = 1e-8;
    const PER_DECADE: usize = 16;

    /// Builds the cache over (0, t_max]; larger t are inverted on demand.
    pub fn new(desc: BernsteinDescriptor, t_max: f64) -> Result<Self> {
        Self::with_params(desc, t_max, InversionParams::default())
    }

    pub fn with_params(desc: BernsteinDescriptor, t_max: f64, params: InversionParams) -> Result<Self> {
        if !(t_max > 0.0) {
            return domain(format!("renewal cache needs a positive horizon, got {t_max}"));
        }
        let mut r = RenewalFunction { desc, table: None, params };
        if r.desc.stable_alpha().is_none() {
            let w0 = Self::T_MIN.ln();
            let w1 = t_max.max(1.0).ln();
            let n = (((w1 - w0) / std::f64::consts::LN_10) * Self::PER_DECADE as f64).ceil() as usize;
            let ws: Vec<f64> = (0..=n).map(|i| w0 + (w1 - w0) * i as f64 / n as f64).collect();
            let pts: Vec<(f64, f64)> = ws
                .par_iter()
                .map(|&w| {
                    let t = w.exp();
                    Ok((r.invert_mean(t)?, r.invert_density(t)?))
                })
                .collect::<Result<_>>()?;
            let ln_u: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
            let slope: Vec<f64> = ws.iter().zip(&pts).map(|(w, p)| w.exp() * p.1 / p.0).collect();
            r.table = Some(RenewalTable { w0, w1, ln_u: Hermite::new(ws, ln_u, slope) });
        }
        Ok(r)
    }

    pub fn descriptor(&self) -> &BernsteinDescriptor {
        &self.desc
    }

    fn invert_mean(&self, t: f64) -> Result<f64> {
        let d = &self.desc;
        invert(&|z: Complex64| 1.0 / (z * d.phi_complex(z)), t, &self.params)
    }

    fn invert_density(&self, t: f64) -> Result<f64> {
        let d = &self.desc;
        // the Stehfest cross-check is unreliable on this singular transform
        invert(&|z: Complex64| 1.0 / d.phi_complex(z), t, &self.params.without_cross_check())
    }

    /// U_Φ(t), t ≥ 0.
    pub fn renewal(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return domain(format!("renewal function needs t >= 0, got {t}"));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        if let Some(a) = self.desc.stable_alpha() {
            return Ok(t.powf(a) * rgamma(1.0 + a));
        }
        let tab = self.table.as_ref().expect("table built for non-stable kinds");
        let w = t.ln();
        if w > tab.w1 {
            return self.invert_mean(t);
        }
        if w < tab.w0 {
            // continue with the local power law at the first node
            let rho = tab.ln_u.deriv(tab.w0);
            return Ok((tab.ln_u.eval(tab.w0) + rho * (w - tab.w0)).exp());
        }
        Ok(tab.ln_u.eval(w).exp())
    }

    /// Renewal density U′_Φ(t), t > 0.
    pub fn renewal_density(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return domain(format!("renewal density needs t > 0, got {t}"));
        }
        if let Some(a) = self.desc.stable_alpha() {
            return Ok(t.powf(a - 1.0) * rgamma(a));
        }
        let tab = self.table.as_ref().expect("table built for non-stable kinds");
        let w = t.ln();
        if w > tab.w1 {
            return self.invert_density(t);
        }
        let u = self.renewal(t)?;
        Ok(u * tab.ln_u.deriv(w.max(tab.w0)) / t)
    }
}
