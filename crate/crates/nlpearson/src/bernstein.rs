//! Driftless Bernstein functions given by their Lévy measure.
//!
//! Every descriptor has a_Φ = b_Φ = 0 and an infinite Lévy measure, so that
//! the associated inverse subordinator has continuous paths.

use crate::error::{domain, param, Error, Result};
use crate::interp::Hermite;
use crate::mittag_leffler::ml_neg;
use crate::quad::{exp_sinh, gauss_legendre, tanh_sinh, Tol};
use crate::special::{e1, gamma_lr, gamma_ur, rgamma, upper_gamma_cf};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

/// Serializable catalogue identity, e.g. `{"kind":"stable","alpha":0.5}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PhiSpec {
    Stable { alpha: f64 },
    TemperedStable { alpha: f64, theta: f64 },
    GeometricStable { alpha: f64 },
    Gamma {},
}

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// User-supplied Lévy density with optional closed-form tails.
#[derive(Clone)]
pub struct CustomLevy {
    pub density: RealFn,
    pub tail: Option<RealFn>,
    pub integrated_tail: Option<RealFn>,
}

impl CustomLevy {
    pub fn new(density: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        CustomLevy { density: Arc::new(density), tail: None, integrated_tail: None }
    }

    pub fn with_tails(
        mut self,
        tail: impl Fn(f64) -> f64 + Send + Sync + 'static,
        integrated_tail: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.tail = Some(Arc::new(tail));
        self.integrated_tail = Some(Arc::new(integrated_tail));
        self
    }
}

#[derive(Clone)]
pub enum BernsteinKind {
    Stable { alpha: f64 },
    TemperedStable { alpha: f64, theta: f64 },
    GeometricStable { alpha: f64 },
    Gamma,
    Custom(CustomLevy),
}

impl fmt::Debug for BernsteinKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BernsteinKind::Stable { alpha } => write!(f, "Stable({alpha})"),
            BernsteinKind::TemperedStable { alpha, theta } => write!(f, "TemperedStable({alpha}, {theta})"),
            BernsteinKind::GeometricStable { alpha } => write!(f, "GeometricStable({alpha})"),
            BernsteinKind::Gamma => write!(f, "Gamma"),
            BernsteinKind::Custom(_) => write!(f, "Custom"),
        }
    }
}

/// Small-λ behaviour of Φ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RegularVariation {
    /// Φ regularly varying at 0⁺ with this index.
    Index(f64),
    /// Φ(λ)/λ → l ∈ (0, ∞).
    LinearLimit(f64),
    Unknown,
}

/// Dependence of the time-changed stationary process on its initial datum.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dependence {
    LongRange,
    ShortRange,
    Unknown,
}

impl fmt::Display for Dependence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dependence::LongRange => "long-range",
            Dependence::ShortRange => "short-range",
            Dependence::Unknown => "unknown",
        })
    }
}

/// A validated driftless Bernstein function.
#[derive(Clone)]
pub struct BernsteinDescriptor {
    kind: BernsteinKind,
    geo: Option<Arc<GeometricTails>>,
}

impl fmt::Debug for BernsteinDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.kind.fmt(f)
    }
}

impl BernsteinDescriptor {
    pub fn new(kind: BernsteinKind) -> Result<Self> {
        let check_alpha = |a: f64| {
            if a > 0.0 && a < 1.0 {
                Ok(())
            } else {
                param(format!("alpha must lie in (0, 1), got {a}"))
            }
        };
        let mut geo = None;
        match &kind {
            BernsteinKind::Stable { alpha } => check_alpha(*alpha)?,
            BernsteinKind::TemperedStable { alpha, theta } => {
                check_alpha(*alpha)?;
                if !(*theta > 0.0 && theta.is_finite()) {
                    return param(format!("tempering rate theta must be positive, got {theta}"));
                }
            }
            BernsteinKind::GeometricStable { alpha } => {
                check_alpha(*alpha)?;
                geo = Some(Arc::new(GeometricTails::build(*alpha)));
            }
            BernsteinKind::Gamma => {}
            BernsteinKind::Custom(c) => validate_custom(c)?,
        }
        Ok(BernsteinDescriptor { kind, geo })
    }

    pub fn stable(alpha: f64) -> Result<Self> {
        Self::new(BernsteinKind::Stable { alpha })
    }

    pub fn tempered_stable(alpha: f64, theta: f64) -> Result<Self> {
        Self::new(BernsteinKind::TemperedStable { alpha, theta })
    }

    pub fn geometric_stable(alpha: f64) -> Result<Self> {
        Self::new(BernsteinKind::GeometricStable { alpha })
    }

    pub fn gamma() -> Self {
        BernsteinDescriptor { kind: BernsteinKind::Gamma, geo: None }
    }

    pub fn custom(levy: CustomLevy) -> Result<Self> {
        Self::new(BernsteinKind::Custom(levy))
    }

    pub fn from_spec(spec: &PhiSpec) -> Result<Self> {
        match *spec {
            PhiSpec::Stable { alpha } => Self::stable(alpha),
            PhiSpec::TemperedStable { alpha, theta } => Self::tempered_stable(alpha, theta),
            PhiSpec::GeometricStable { alpha } => Self::geometric_stable(alpha),
            PhiSpec::Gamma {} => Ok(Self::gamma()),
        }
    }

    /// Catalogue identity; `None` for custom descriptors.
    pub fn spec(&self) -> Option<PhiSpec> {
        Some(match self.kind {
            BernsteinKind::Stable { alpha } => PhiSpec::Stable { alpha },
            BernsteinKind::TemperedStable { alpha, theta } => PhiSpec::TemperedStable { alpha, theta },
            BernsteinKind::GeometricStable { alpha } => PhiSpec::GeometricStable { alpha },
            BernsteinKind::Gamma => PhiSpec::Gamma {},
            BernsteinKind::Custom(_) => return None,
        })
    }

    pub fn kind(&self) -> &BernsteinKind {
        &self.kind
    }

    /// Stability index when Φ is exactly λ^α.
    pub fn stable_alpha(&self) -> Option<f64> {
        match self.kind {
            BernsteinKind::Stable { alpha } => Some(alpha),
            _ => None,
        }
    }

    /// Φ(λ) for λ ≥ 0.
    pub fn eval_phi(&self, lambda: f64) -> Result<f64> {
        if !(lambda >= 0.0) {
            return domain(format!("Phi is evaluated on [0, inf), got lambda = {lambda}"));
        }
        Ok(self.phi(lambda))
    }

    pub(crate) fn phi(&self, l: f64) -> f64 {
        if l == 0.0 {
            return 0.0;
        }
        match &self.kind {
            BernsteinKind::Stable { alpha } => l.powf(*alpha),
            BernsteinKind::TemperedStable { alpha, theta } => {
                theta.powf(*alpha) * (alpha * (l / theta).ln_1p()).exp_m1()
            }
            BernsteinKind::GeometricStable { alpha } => l.powf(*alpha).ln_1p(),
            BernsteinKind::Gamma => l.ln_1p(),
            BernsteinKind::Custom(c) => {
                let nu = &c.density;
                exp_sinh(|t| -(-l * t).exp_m1() * nu(t), 0.0, Tol::new(1e-14, 1e-10)).unwrap_or(f64::NAN)
            }
        }
    }

    /// Analytic continuation of Φ off the negative real axis.
    pub fn phi_complex(&self, z: Complex64) -> Complex64 {
        match &self.kind {
            BernsteinKind::Stable { alpha } => z.powf(*alpha),
            BernsteinKind::TemperedStable { alpha, theta } => (z + theta).powf(*alpha) - theta.powf(*alpha),
            BernsteinKind::GeometricStable { alpha } => (z.powf(*alpha) + 1.0).ln(),
            BernsteinKind::Gamma => (z + 1.0).ln(),
            BernsteinKind::Custom(c) => {
                let nu = &c.density;
                let tol = Tol::new(1e-14, 1e-10);
                let re = exp_sinh(|t| (1.0 - (-z.re * t).exp() * (z.im * t).cos()) * nu(t), 0.0, tol);
                let im = exp_sinh(|t| (-z.re * t).exp() * (z.im * t).sin() * nu(t), 0.0, tol);
                match (re, im) {
                    (Ok(a), Ok(b)) => Complex64::new(a, b),
                    _ => Complex64::new(f64::NAN, f64::NAN),
                }
            }
        }
    }

    /// Lévy density ν(t), t > 0.
    pub fn levy_density(&self, t: f64) -> f64 {
        match &self.kind {
            BernsteinKind::Stable { alpha } => alpha * t.powf(-1.0 - alpha) * rgamma(1.0 - alpha),
            BernsteinKind::TemperedStable { alpha, theta } => {
                alpha * t.powf(-1.0 - alpha) * (-theta * t).exp() * rgamma(1.0 - alpha)
            }
            BernsteinKind::GeometricStable { alpha } => alpha / t * ml_neg(*alpha, t.powf(*alpha)),
            BernsteinKind::Gamma => (-t).exp() / t,
            BernsteinKind::Custom(c) => (c.density)(t),
        }
    }

    /// ν̄(t) = ν(t, ∞) for t > 0.
    pub fn levy_tail(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return domain(format!("Levy tail needs t > 0, got {t}"));
        }
        Ok(self.tail(t))
    }

    pub(crate) fn tail(&self, t: f64) -> f64 {
        match &self.kind {
            BernsteinKind::Stable { alpha } => t.powf(-alpha) * rgamma(1.0 - alpha),
            BernsteinKind::TemperedStable { alpha, theta } => {
                let x = theta * t;
                let a = 1.0 - alpha;
                if x > 1.0 {
                    // α θ^α Γ(−α, θt) / Γ(1−α), free of cancellation
                    alpha * theta.powf(*alpha) * upper_gamma_cf(-alpha, x) * rgamma(a)
                } else {
                    t.powf(-alpha) * (-x).exp() * rgamma(a) - theta.powf(*alpha) * gamma_ur(a, x)
                }
            }
            BernsteinKind::GeometricStable { .. } => self.geo.as_ref().expect("cache built").tail(t),
            BernsteinKind::Gamma => e1(t),
            BernsteinKind::Custom(c) => match &c.tail {
                Some(f) => f(t),
                None => {
                    let nu = &c.density;
                    exp_sinh(|s| nu(s), t, Tol::new(1e-15, 1e-10)).unwrap_or(f64::NAN)
                }
            },
        }
    }

    /// ℐ(t) = ∫₀ᵗ ν̄(s) ds for t ≥ 0.
    pub fn integrated_tail(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return domain(format!("integrated tail needs t >= 0, got {t}"));
        }
        Ok(self.itail(t))
    }

    pub(crate) fn itail(&self, t: f64) -> f64 {
        if t == 0.0 {
            return 0.0;
        }
        match &self.kind {
            BernsteinKind::Stable { alpha } => t.powf(1.0 - alpha) * rgamma(2.0 - alpha),
            // ℐ(t) = ∫₀ᵗ r ν(r) dr + t ν̄(t)
            BernsteinKind::TemperedStable { alpha, theta } => {
                alpha * theta.powf(alpha - 1.0) * gamma_lr(1.0 - alpha, theta * t) + t * self.tail(t)
            }
            BernsteinKind::GeometricStable { .. } => self.geo.as_ref().expect("cache built").integrated(t),
            BernsteinKind::Gamma => -(-t).exp_m1() + t * e1(t),
            BernsteinKind::Custom(c) => match &c.integrated_tail {
                Some(f) => f(t),
                None => {
                    let nu = &c.density;
                    let head = tanh_sinh(|r| r * nu(r), 0.0, t, Tol::new(1e-15, 1e-10)).unwrap_or(f64::NAN);
                    head + t * self.tail(t)
                }
            },
        }
    }

    pub fn regular_variation_index(&self) -> RegularVariation {
        match self.kind {
            BernsteinKind::Stable { alpha } | BernsteinKind::GeometricStable { alpha } => {
                RegularVariation::Index(alpha)
            }
            BernsteinKind::TemperedStable { alpha, theta } => {
                RegularVariation::LinearLimit(alpha * theta.powf(alpha - 1.0))
            }
            BernsteinKind::Gamma => RegularVariation::LinearLimit(1.0),
            BernsteinKind::Custom(_) => RegularVariation::Unknown,
        }
    }

    pub fn classify_dependence(&self) -> Dependence {
        match self.regular_variation_index() {
            RegularVariation::Index(_) => Dependence::LongRange,
            RegularVariation::LinearLimit(_) => Dependence::ShortRange,
            RegularVariation::Unknown => Dependence::Unknown,
        }
    }

    /// Leading coefficients of the large-λ expansion
    /// E[e^{−λ L(t)}] = c₁/λ + c₂/λ² + O(λ^{−3}); c₁ = ν̄(t).
    pub(crate) fn relaxation_tail_coefficients(&self, t: f64) -> (f64, f64) {
        let c1 = self.tail(t);
        let c2 = match self.kind {
            BernsteinKind::Stable { alpha } => -t.powf(-2.0 * alpha) * rgamma(1.0 - 2.0 * alpha),
            _ => {
                // c₂ = ∂_s f_Φ(0⁺; t), the inverse transform of −Φ(z)²/z
                crate::laplace::talbot(|z| -self.phi_complex(z).powi(2) / z, t, 32)
            }
        };
        (c1, c2)
    }
}

fn validate_custom(c: &CustomLevy) -> Result<()> {
    let d = BernsteinDescriptor { kind: BernsteinKind::Custom(c.clone()), geo: None };
    let grid: Vec<f64> = (0..25).map(|i| 10f64.powf(-3.0 + 0.25 * i as f64)).collect();
    let mut vals = Vec::with_capacity(grid.len());
    for &l in &grid {
        let v = d.phi(l);
        if !v.is_finite() || v < 0.0 {
            return param(format!("custom Levy density gives Phi({l}) = {v}"));
        }
        vals.push(v);
    }
    for w in vals.windows(2) {
        if w[1] < w[0] * (1.0 - 1e-8) {
            return param("custom Levy density does not give a nondecreasing Phi");
        }
    }
    // concavity: chord slopes must decrease
    let slopes: Vec<f64> = (1..grid.len()).map(|i| (vals[i] - vals[i - 1]) / (grid[i] - grid[i - 1])).collect();
    for w in slopes.windows(2) {
        if w[1] > w[0] * (1.0 + 1e-6) + 1e-12 {
            return param("custom Levy density does not give a concave Phi");
        }
    }
    // infinite activity: the mass above ε must keep growing as ε → 0
    let m1 = d.tail(1e-6);
    let m2 = d.tail(1e-9);
    if !(m2 > m1 * (1.0 + 1e-3)) {
        return Err(Error::Parameter("custom Levy measure appears to be finite".into()));
    }
    Ok(())
}

/// Tabulated Lévy tail and integrated tail of the geometric stable Bernstein
/// function Φ(λ) = ln(1 + λ^α), whose Lévy density is α t^{−1} E_α(−t^α).
///
/// With u = t^α: ν̄ = ∫_u^∞ E_α(−v)/v dv and ℐ(t) = t ν̄(t) + α J(t) where
/// J(t) = ∫₀ᵗ E_α(−s^α) ds. Both are stored as log–log cubic Hermite
/// interpolants in w = ln u with exact slopes.
#[derive(Debug)]
struct GeometricTails {
    alpha: f64,
    w_min: f64,
    w_max: f64,
    ln_tail: Hermite,
    ln_j: Hermite,
    tail_min: f64,
    j_max: f64,
}

impl GeometricTails {
    const U_MIN: f64 = 1e-8;
    const U_MAX: f64 = 1e10;
    const PER_DECADE: usize = 64;

    fn build(alpha: f64) -> Self {
        let w_min = Self::U_MIN.ln();
        let w_max = Self::U_MAX.ln();
        let n = (18 * Self::PER_DECADE) as i64;
        let h = (w_max - w_min) / n as f64;
        let ws: Vec<f64> = (0..=n).map(|i| w_min + h * i as f64).collect();
        let e = |w: f64| ml_neg(alpha, w.exp());
        let (gx, gw) = gauss_legendre(10);
        let panel = |a: f64, b: f64, g: &dyn Fn(f64) -> f64| -> f64 {
            let c = 0.5 * (a + b);
            let r = 0.5 * (b - a);
            gx.iter().zip(&gw).map(|(x, w)| w * g(c + r * x)).sum::<f64>() * r
        };
        // tail, accumulated from the right end where the asymptotic series holds
        let u_top = Self::U_MAX;
        let mut tail = vec![0.0; ws.len()];
        tail[ws.len() - 1] = asym_tail(alpha, u_top);
        for i in (0..ws.len() - 1).rev() {
            tail[i] = tail[i + 1] + panel(ws[i], ws[i + 1], &e);
        }
        // J in terms of w: dJ = E_α(−e^w) e^{w/α} dw / α
        let dj = |w: f64| e(w) * (w / alpha).exp() / alpha;
        let mut j = vec![0.0; ws.len()];
        let t0 = Self::U_MIN.powf(1.0 / alpha);
        j[0] = t0 - t0.powf(1.0 + alpha) * rgamma(1.0 + alpha) / (1.0 + alpha);
        for i in 1..ws.len() {
            j[i] = j[i - 1] + panel(ws[i - 1], ws[i], &dj);
        }
        let ev: Vec<f64> = ws.iter().map(|&w| e(w)).collect();
        let ln_tail = Hermite::new(
            ws.clone(),
            tail.iter().map(|v| v.ln()).collect(),
            ev.iter().zip(&tail).map(|(e, t)| -e / t).collect(),
        );
        let ln_j = Hermite::new(
            ws.clone(),
            j.iter().map(|v| v.ln()).collect(),
            ws.iter().zip(&ev).zip(&j).map(|((w, e), jv)| e * (w / alpha).exp() / alpha / jv).collect(),
        );
        GeometricTails { alpha, w_min, w_max, ln_tail, ln_j, tail_min: tail[0], j_max: j[ws.len() - 1] }
    }

    fn tail(&self, t: f64) -> f64 {
        let w = self.alpha * t.ln();
        if w < self.w_min {
            // E_α(−v) ≈ 1 − v/Γ(1+α) below U_MIN
            let u = w.exp();
            let u0 = Self::U_MIN;
            self.tail_min + (u0 / u).ln() - (u0 - u) * rgamma(1.0 + self.alpha)
        } else if w > self.w_max {
            asym_tail(self.alpha, w.exp())
        } else {
            self.ln_tail.eval(w).exp()
        }
    }

    fn j(&self, t: f64) -> f64 {
        let a = self.alpha;
        let w = a * t.ln();
        if w < self.w_min {
            t - t.powf(1.0 + a) * rgamma(1.0 + a) / (1.0 + a)
        } else if w > self.w_max {
            // integrate the large-argument expansion of E_α(−s^α) beyond the table
            let t0 = Self::U_MAX.powf(1.0 / a);
            let mut add = 0.0;
            for k in 1..=3 {
                let c = if k % 2 == 1 { 1.0 } else { -1.0 } * rgamma(1.0 - k as f64 * a);
                let p = 1.0 - k as f64 * a;
                add += if p.abs() < 1e-12 { c * (t / t0).ln() } else { c * (t.powf(p) - t0.powf(p)) / p };
            }
            self.j_max + add
        } else {
            self.ln_j.eval(w).exp()
        }
    }

    fn integrated(&self, t: f64) -> f64 {
        t * self.tail(t) + self.alpha * self.j(t)
    }
}

/// ∫_u^∞ E_α(−v)/v dv from the large-argument expansion of E_α.
fn asym_tail(alpha: f64, u: f64) -> f64 {
    (1..=4)
        .map(|k| {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            sign * rgamma(1.0 - k as f64 * alpha) * u.powi(-k) / k as f64
        })
        .sum()
}

/// Helper for the Lévy–Khintchine check: ∫₀^∞ (1 − e^{−λt}) ν(t) dt.
pub fn levy_khintchine(desc: &BernsteinDescriptor, lambda: f64) -> Result<f64> {
    exp_sinh(|t| -(-lambda * t).exp_m1() * desc.levy_density(t), 0.0, Tol::new(1e-15, 1e-10))
}
