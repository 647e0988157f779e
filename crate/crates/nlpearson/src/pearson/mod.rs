//! The six Pearson diffusion families dX = μ(X)dt + √(2D(X)) dW with
//! μ(x) = a₀ + a₁x and D(x) = d₀ + d₁x + d₂x².

mod continuous;
mod green;
mod poly;

pub use continuous::ContinuousSpectrumData;
pub use green::GreenKernel;
pub use poly::{Poly, PolynomialSystem};

use crate::error::{domain, param, Error, Result};
use crate::quad::{de_interval, Tol};
use crate::special::{
    erfc, gamma_lr, gamma_ur, ln_gamma, ln_upper_gamma_cf, ln_upper_gamma_cf_scaled, student_normalizer,
};
use serde::{Deserialize, Serialize};
use statrs::function::beta::{beta_reg, ln_beta};
use std::f64::consts::PI;

/// Serializable family parameters, e.g. `{"kind":"jacobi","theta":1,"a":0,"b":0}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    Ou {
        theta: f64,
        mu: f64,
        sigma: f64,
    },
    Cir {
        theta: f64,
        a: f64,
        b: f64,
    },
    Jacobi {
        theta: f64,
        a: f64,
        b: f64,
    },
    #[serde(alias = "fisher_snedecor")]
    Fs {
        theta: f64,
        alpha: f64,
        beta: f64,
    },
    #[serde(alias = "reciprocal_gamma")]
    Rg {
        theta: f64,
        alpha: f64,
        beta: f64,
    },
    Student {
        theta: f64,
        delta: f64,
        nu: f64,
        mu: f64,
        mu_prime: f64,
    },
}

impl FamilySpec {
    pub fn name(&self) -> &'static str {
        match self {
            FamilySpec::Ou { .. } => "ou",
            FamilySpec::Cir { .. } => "cir",
            FamilySpec::Jacobi { .. } => "jacobi",
            FamilySpec::Fs { .. } => "fs",
            FamilySpec::Rg { .. } => "rg",
            FamilySpec::Student { .. } => "student",
        }
    }

    pub fn theta(&self) -> f64 {
        match *self {
            FamilySpec::Ou { theta, .. }
            | FamilySpec::Cir { theta, .. }
            | FamilySpec::Jacobi { theta, .. }
            | FamilySpec::Fs { theta, .. }
            | FamilySpec::Rg { theta, .. }
            | FamilySpec::Student { theta, .. } => theta,
        }
    }
}

/// Spectral category: I purely discrete, II discrete plus continuous with
/// known eigenfunctions, III discrete plus continuous (Student).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Category {
    I,
    II,
    III,
}

impl std::fmt::Display for Category {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Category::I => "I",
            Category::II => "II",
            Category::III => "III",
        })
    }
}

/// Category, number of discrete eigenvalues below the cut-off and the cut-off.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumMeta {
    pub category: Category,
    /// `None` for an unbounded discrete spectrum.
    pub n: Option<usize>,
    pub cutoff: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct PearsonFamily {
    spec: FamilySpec,
    a0: f64,
    a1: f64,
    d: [f64; 3],
    lower: f64,
    upper: f64,
    category: Category,
    ln_norm: f64,
    caveats: Vec<String>,
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        param(format!("{name} must be finite"))
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    finite(name, v)?;
    if v > 0.0 {
        Ok(())
    } else {
        param(format!("{name} > 0 required, got {v}"))
    }
}

impl PearsonFamily {
    pub fn new(spec: FamilySpec) -> Result<Self> {
        positive("theta", spec.theta())?;
        let th = spec.theta();
        let mut caveats = Vec::new();
        let (a0, a1, d, lower, upper, category, ln_norm) = match spec {
            FamilySpec::Ou { mu, sigma, .. } => {
                finite("mu", mu)?;
                positive("sigma", sigma)?;
                let ln_norm = -0.5 * (2.0 * PI * sigma * sigma).ln();
                (th * mu, -th, [th * sigma * sigma, 0.0, 0.0], f64::NEG_INFINITY, f64::INFINITY, Category::I, ln_norm)
            }
            FamilySpec::Cir { a, b, .. } => {
                positive("a", a)?;
                positive("b", b)?;
                let ln_norm = b * a.ln() - ln_gamma(b);
                (th * b / a, -th, [0.0, th / a, 0.0], 0.0, f64::INFINITY, Category::I, ln_norm)
            }
            FamilySpec::Jacobi { a, b, .. } => {
                finite("a", a)?;
                finite("b", b)?;
                if a <= -1.0 || b <= -1.0 {
                    return param(format!("jacobi requires a > -1 and b > -1, got a = {a}, b = {b}"));
                }
                let s = a + b + 2.0;
                let ln_norm = -(a + b + 1.0) * 2f64.ln() - ln_beta(a + 1.0, b + 1.0);
                (th * (b - a) / s, -th, [th / s, 0.0, -th / s], -1.0, 1.0, Category::I, ln_norm)
            }
            FamilySpec::Fs { alpha, beta, .. } => {
                positive("alpha", alpha)?;
                positive("beta", beta)?;
                if beta <= 2.0 {
                    return param(format!("fs requires beta > 2, got {beta}"));
                }
                if alpha <= 2.0 {
                    return param(format!("fs requires alpha > 2, got {alpha}"));
                }
                let h = alpha / 2.0 - 1.0;
                if h == h.round() {
                    caveats.push(format!(
                        "alpha = {alpha} is of the form 2(m+1); the continuous eigenfunction is still the regular solution at 0"
                    ));
                }
                let k = 2.0 * th / (alpha * (beta - 2.0));
                let ln_norm = -ln_beta(alpha / 2.0, beta / 2.0);
                (th * beta / (beta - 2.0), -th, [0.0, k * beta, k * alpha], 0.0, f64::INFINITY, Category::II, ln_norm)
            }
            FamilySpec::Rg { alpha, beta, .. } => {
                positive("alpha", alpha)?;
                positive("beta", beta)?;
                if beta <= 1.0 {
                    return param(format!("rg requires beta > 1, got {beta}"));
                }
                let ln_norm = beta * alpha.ln() - ln_gamma(beta);
                (
                    th * alpha / (beta - 1.0),
                    -th,
                    [0.0, 0.0, th / (beta - 1.0)],
                    0.0,
                    f64::INFINITY,
                    Category::II,
                    ln_norm,
                )
            }
            FamilySpec::Student { delta, nu, mu, mu_prime, .. } => {
                positive("delta", delta)?;
                finite("nu", nu)?;
                finite("mu", mu)?;
                finite("mu_prime", mu_prime)?;
                if nu <= 1.0 {
                    return param(format!("student requires nu > 1, got {nu}"));
                }
                if nu == nu.round() && (nu as i64) % 2 == 1 {
                    return param(format!("student requires nu != 2k-1, got {nu}"));
                }
                let k = th / (nu - 1.0);
                let d = [k * (delta * delta + mu_prime * mu_prime), -2.0 * k * mu_prime, k];
                let c = (mu - mu_prime) * (nu - 1.0) / delta;
                let ln_norm = student_normalizer(nu, delta, c).ln();
                (th * mu, -th, d, f64::NEG_INFINITY, f64::INFINITY, Category::III, ln_norm)
            }
        };
        Ok(PearsonFamily { spec, a0, a1, d, lower, upper, category, ln_norm, caveats })
    }

    pub fn spec(&self) -> FamilySpec {
        self.spec
    }

    pub fn theta(&self) -> f64 {
        self.spec.theta()
    }

    pub fn category(&self) -> Category {
        self.category
    }

    /// State space (l, L); infinite ends are ±∞.
    pub fn interval(&self) -> (f64, f64) {
        (self.lower, self.upper)
    }

    /// Drift coefficients (a₀, a₁) of μ(x) = a₀ + a₁x.
    pub fn drift_coeffs(&self) -> (f64, f64) {
        (self.a0, self.a1)
    }

    /// Diffusion coefficients (d₀, d₁, d₂) of D(x) = d₀ + d₁x + d₂x².
    pub fn diffusion_coeffs(&self) -> [f64; 3] {
        self.d
    }

    /// Warnings attached at construction (parameter edge cases accepted).
    pub fn caveats(&self) -> &[String] {
        &self.caveats
    }

    pub fn drift(&self, x: f64) -> f64 {
        self.a0 + self.a1 * x
    }

    pub fn diffusion(&self, x: f64) -> f64 {
        self.d[0] + x * (self.d[1] + x * self.d[2])
    }

    pub fn diffusion_deriv(&self, x: f64) -> f64 {
        self.d[1] + 2.0 * self.d[2] * x
    }

    /// Mean of the stationary law (the reversion level of the drift).
    pub fn mean(&self) -> f64 {
        -self.a0 / self.a1
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.lower && x < self.upper
    }

    pub(crate) fn check(&self, x: f64) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            domain(format!("x = {x} outside the state space ({}, {})", self.lower, self.upper))
        }
    }

    /// A length scale for finite differences and grids: the stationary
    /// standard deviation when it exists, otherwise the diffusion scale at
    /// the mean.
    pub fn scale(&self) -> f64 {
        let b1 = self.mean();
        let den = self.a1 + self.d[2];
        if den < 0.0 {
            let ex2 = -(self.a0 * b1 + self.d[0] + self.d[1] * b1) / den;
            let var = ex2 - b1 * b1;
            if var > 0.0 && var.is_finite() {
                return var.sqrt();
            }
        }
        (self.diffusion(b1) / -self.a1).sqrt()
    }

    /// ρ(x) = μ(x) − D′(x), so that m′/m = ρ/D.
    pub fn pearson_numerator(&self, x: f64) -> f64 {
        (self.a0 - self.d[1]) + (self.a1 - 2.0 * self.d[2]) * x
    }

    /// ln m(x); −∞ outside the state space.
    pub fn ln_stationary_density(&self, x: f64) -> f64 {
        if !self.contains(x) {
            return f64::NEG_INFINITY;
        }
        let core = match self.spec {
            FamilySpec::Ou { mu, sigma, .. } => -0.5 * ((x - mu) / sigma).powi(2),
            FamilySpec::Cir { a, b, .. } => (b - 1.0) * x.ln() - a * x,
            FamilySpec::Jacobi { a, b, .. } => a * (1.0 - x).ln() + b * (1.0 + x).ln(),
            FamilySpec::Fs { alpha, beta, .. } => {
                let s = alpha * x + beta;
                0.5 * alpha * (alpha * x / s).ln() + 0.5 * beta * (beta / s).ln() - x.ln()
            }
            FamilySpec::Rg { alpha, beta, .. } => -(beta + 1.0) * x.ln() - alpha / x,
            FamilySpec::Student { delta, nu, mu, mu_prime, .. } => {
                let u = (x - mu_prime) / delta;
                let c = (mu - mu_prime) * (nu - 1.0) / delta;
                -0.5 * (nu + 1.0) * u.mul_add(u, 1.0).ln() + c * u.atan()
            }
        };
        self.ln_norm + core
    }

    /// Stationary density m(x).
    pub fn stationary_density(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        Ok(self.ln_stationary_density(x).exp())
    }

    /// m(x) without the domain check; zero outside E.
    pub fn m(&self, x: f64) -> f64 {
        self.ln_stationary_density(x).exp()
    }

    /// Stationary distribution function M(x) = ∫_l^x m.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.lower {
            return 0.0;
        }
        if x >= self.upper {
            return 1.0;
        }
        match self.spec {
            FamilySpec::Ou { mu, sigma, .. } => 0.5 * erfc(-(x - mu) / (sigma * 2f64.sqrt())),
            FamilySpec::Cir { a, b, .. } => gamma_lr(b, a * x),
            FamilySpec::Jacobi { a, b, .. } => beta_reg(b + 1.0, a + 1.0, 0.5 * (1.0 + x)),
            FamilySpec::Fs { alpha, beta, .. } => beta_reg(0.5 * alpha, 0.5 * beta, alpha * x / (alpha * x + beta)),
            FamilySpec::Rg { alpha, beta, .. } => gamma_ur(beta, alpha / x),
            FamilySpec::Student { .. } => {
                if x <= self.mean() {
                    self.tail_integral(f64::NEG_INFINITY, x)
                } else {
                    1.0 - self.tail_integral(x, f64::INFINITY)
                }
            }
        }
    }

    /// Survival function 1 − M(x), computed without cancellation.
    pub fn sf(&self, x: f64) -> f64 {
        if x <= self.lower {
            return 1.0;
        }
        if x >= self.upper {
            return 0.0;
        }
        match self.spec {
            FamilySpec::Ou { mu, sigma, .. } => 0.5 * erfc((x - mu) / (sigma * 2f64.sqrt())),
            FamilySpec::Cir { a, b, .. } => gamma_ur(b, a * x),
            FamilySpec::Jacobi { a, b, .. } => beta_reg(a + 1.0, b + 1.0, 0.5 * (1.0 - x)),
            FamilySpec::Fs { alpha, beta, .. } => beta_reg(0.5 * beta, 0.5 * alpha, beta / (alpha * x + beta)),
            FamilySpec::Rg { alpha, beta, .. } => gamma_lr(beta, alpha / x),
            FamilySpec::Student { .. } => {
                if x >= self.mean() {
                    self.tail_integral(x, f64::INFINITY)
                } else {
                    1.0 - self.tail_integral(f64::NEG_INFINITY, x)
                }
            }
        }
    }

    /// ln M(x), accurate far into the lower tail.
    pub fn ln_cdf(&self, x: f64) -> f64 {
        match self.spec {
            FamilySpec::Ou { mu, sigma, .. } => {
                let u = -(x - mu) / (sigma * 2f64.sqrt());
                if u > 3.0 {
                    return ln_half_erfc(u);
                }
            }
            FamilySpec::Rg { alpha, beta, .. } if x > 0.0 && alpha / x > (beta + 1.0).max(2.0) => {
                return ln_upper_gamma_cf(beta, alpha / x) - ln_gamma(beta);
            }
            _ => {}
        }
        self.cdf(x).ln()
    }

    /// ln(1 − M(x)), accurate far into the upper tail.
    pub fn ln_sf(&self, x: f64) -> f64 {
        match self.spec {
            FamilySpec::Ou { mu, sigma, .. } => {
                let u = (x - mu) / (sigma * 2f64.sqrt());
                if u > 3.0 {
                    return ln_half_erfc(u);
                }
            }
            FamilySpec::Cir { a, b, .. } if a * x > (b + 1.0).max(2.0) => {
                return ln_upper_gamma_cf(b, a * x) - ln_gamma(b);
            }
            FamilySpec::Fs { alpha, beta, .. } => {
                // I_y(p, q) = y^p/(p B(p,q)) · (1 + p(1−q)y/(p+1) + O(y²))
                let y = beta / (alpha * x + beta);
                if y < 1e-12 {
                    let (p, q) = (0.5 * beta, 0.5 * alpha);
                    return p * y.ln() - p.ln() - ln_beta(p, q) + (p * (1.0 - q) * y / (p + 1.0)).ln_1p();
                }
            }
            _ => {}
        }
        self.sf(x).ln()
    }

    /// ln(M(x)/m(x)), with the exponential factors cancelled analytically
    /// far in the lower tail.
    pub fn ln_cdf_over_m(&self, x: f64) -> f64 {
        match self.spec {
            FamilySpec::Ou { mu, sigma, .. } => {
                let u = -(x - mu) / (sigma * 2f64.sqrt());
                if u > 3.0 {
                    return ln_half_erfc_scaled(u) + 0.5 * (2.0 * PI * sigma * sigma).ln();
                }
            }
            FamilySpec::Rg { alpha, beta, .. } if x > 0.0 && alpha / x > (beta + 1.0).max(2.0) => {
                let y = alpha / x;
                return ln_upper_gamma_cf_scaled(beta, y) - beta * alpha.ln() + (beta + 1.0) * x.ln();
            }
            _ => {}
        }
        self.ln_cdf(x) - self.ln_stationary_density(x)
    }

    /// ln((1 − M(x))/m(x)), the upper-tail analogue of [`Self::ln_cdf_over_m`].
    pub fn ln_sf_over_m(&self, x: f64) -> f64 {
        match self.spec {
            FamilySpec::Ou { mu, sigma, .. } => {
                let u = (x - mu) / (sigma * 2f64.sqrt());
                if u > 3.0 {
                    return ln_half_erfc_scaled(u) + 0.5 * (2.0 * PI * sigma * sigma).ln();
                }
            }
            FamilySpec::Cir { a, b, .. } if a * x > (b + 1.0).max(2.0) => {
                return ln_upper_gamma_cf_scaled(b, a * x) - b * a.ln() - (b - 1.0) * x.ln();
            }
            _ => {}
        }
        self.ln_sf(x) - self.ln_stationary_density(x)
    }

    fn tail_integral(&self, a: f64, b: f64) -> f64 {
        de_interval(|y| self.m(y), a, b, Tol::new(1e-300, 1e-13)).unwrap_or(f64::NAN)
    }

    pub fn spectrum_meta(&self) -> SpectrumMeta {
        let th = self.theta();
        let (n, cutoff) = match self.spec {
            FamilySpec::Ou { .. } | FamilySpec::Cir { .. } | FamilySpec::Jacobi { .. } => (None, None),
            FamilySpec::Fs { beta, .. } => {
                (Some((beta / 4.0).floor() as usize), Some(th * beta * beta / (8.0 * (beta - 2.0))))
            }
            FamilySpec::Rg { beta, .. } => {
                (Some((beta / 2.0).floor() as usize), Some(th * beta * beta / (4.0 * (beta - 1.0))))
            }
            FamilySpec::Student { nu, .. } => {
                (Some((nu / 2.0).floor() as usize), Some(th * nu * nu / (4.0 * (nu - 1.0))))
            }
        };
        SpectrumMeta { category: self.category, n, cutoff }
    }

    /// Largest n for which Q_n lies in L²(m dx): the stationary law must have
    /// a finite moment of order 2n. `None` when every n is admissible.
    pub fn admissible_n(&self) -> Option<usize> {
        // moment order k finite iff k < r
        let r = match self.spec {
            FamilySpec::Ou { .. } | FamilySpec::Cir { .. } | FamilySpec::Jacobi { .. } => return None,
            FamilySpec::Fs { beta, .. } => beta / 2.0,
            FamilySpec::Rg { beta, .. } => beta,
            FamilySpec::Student { nu, .. } => nu,
        };
        let half = r / 2.0;
        let n = if half == half.floor() { half as usize - 1 } else { half.floor() as usize };
        Some(n)
    }

    /// λ_n = −n(a₁ + (n−1)d₂).
    pub fn eigenvalue(&self, n: usize) -> Result<f64> {
        if let Some(nmax) = self.spectrum_meta().n {
            if n > nmax {
                return Err(Error::SpectrumBound(format!(
                    "eigenvalue index {n} exceeds the discrete spectrum bound {nmax}"
                )));
            }
        }
        Ok(self.eigenvalue_unchecked(n))
    }

    pub(crate) fn eigenvalue_unchecked(&self, n: usize) -> f64 {
        let n = n as f64;
        -n * (self.a1 + (n - 1.0) * self.d[2])
    }

    /// 𝒢g(x) = μ(x)g′(x) + D(x)g″(x) for a smooth function, by a fourth-order
    /// central difference.
    pub fn generator_apply<F: Fn(f64) -> f64>(&self, g: F, x: f64) -> Result<f64> {
        self.check(x)?;
        let (d1, d2) = self.derivatives(&g, x);
        Ok(self.drift(x) * d1 + self.diffusion(x) * d2)
    }

    /// 𝒢p(x) for a polynomial, exactly.
    pub fn generator_apply_poly(&self, p: &Poly, x: f64) -> Result<f64> {
        self.check(x)?;
        Ok(self.generator_poly(p).eval(x))
    }

    /// The polynomial 𝒢p.
    pub fn generator_poly(&self, p: &Poly) -> Poly {
        let mu = Poly::new(vec![self.a0, self.a1]);
        let dd = Poly::new(self.d.to_vec());
        let d1 = p.deriv();
        mu.mul(&d1).add(&dd.mul(&d1.deriv()))
    }

    /// ℱg(x) = −(μg)′(x) + (Dg)″(x) for a smooth function.
    pub fn fokker_planck_apply<F: Fn(f64) -> f64>(&self, g: F, x: f64) -> Result<f64> {
        self.check(x)?;
        let (g1, g2) = self.derivatives(&g, x);
        Ok(self.fp_from_derivatives(x, g(x), g1, g2))
    }

    /// ℱ(m·p)(x) for a polynomial p, with the derivatives of m taken from the
    /// Pearson equation.
    pub fn fokker_planck_apply_density(&self, p: &Poly, x: f64) -> Result<f64> {
        self.check(x)?;
        let m = self.m(x);
        let dd = self.diffusion(x);
        let dp = self.diffusion_deriv(x);
        let rho = self.pearson_numerator(x);
        let h = rho / dd;
        let hp = ((self.a1 - 2.0 * self.d[2]) * dd - rho * dp) / (dd * dd);
        let p1 = p.deriv();
        let (v, v1, v2) = (p.eval(x), p1.eval(x), p1.deriv().eval(x));
        let g1 = m * (v1 + h * v);
        let g2 = m * (v2 + 2.0 * h * v1 + (hp + h * h) * v);
        Ok(self.fp_from_derivatives(x, m * v, g1, g2))
    }

    fn fp_from_derivatives(&self, x: f64, g: f64, g1: f64, g2: f64) -> f64 {
        let dd = self.diffusion(x);
        let dp = self.diffusion_deriv(x);
        dd * g2 + (2.0 * dp - self.drift(x)) * g1 + (2.0 * self.d[2] - self.a1) * g
    }

    fn derivatives<F: Fn(f64) -> f64>(&self, g: &F, x: f64) -> (f64, f64) {
        let mut h = 1e-3 * self.scale().max(x.abs());
        let room = (x - self.lower).min(self.upper - x);
        h = h.min(room / 50.0);
        let (fm2, fm1, f0, fp1, fp2) = (g(x - 2.0 * h), g(x - h), g(x), g(x + h), g(x + 2.0 * h));
        let d1 = (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h);
        let d2 = (-fm2 + 16.0 * fm1 - 30.0 * f0 + 16.0 * fp1 - fp2) / (12.0 * h * h);
        (d1, d2)
    }

    /// Quantile of the stationary law by bracketing and bisection on `cdf`.
    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(1e-300, 1.0 - 1e-16);
        let s = self.scale();
        let c = self.mean();
        let mut lo = if self.lower.is_finite() { self.lower } else { c - s };
        let mut hi = if self.upper.is_finite() { self.upper } else { c + s };
        if !self.lower.is_finite() {
            let mut w = s;
            while self.cdf(lo) > u {
                w *= 2.0;
                lo = c - w;
            }
        }
        if !self.upper.is_finite() {
            let mut w = s;
            while self.cdf(hi) < u && w < 1e300 {
                w *= 2.0;
                hi = c + w;
            }
        }
        for _ in 0..200 {
            let mid = if self.lower == 0.0 && hi / lo.max(1e-300) > 4.0 && lo > 0.0 {
                (lo * hi).sqrt()
            } else {
                0.5 * (lo + hi)
            };
            if mid <= lo || mid >= hi {
                break;
            }
            if self.cdf(mid) < u {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi.abs().max(lo.abs()) {
                break;
            }
        }
        0.5 * (lo + hi)
    }
}

/// ln(erfc(u)/2) = ln Γ(1/2, u²) − ln(2√π) for u > 1.
fn ln_half_erfc(u: f64) -> f64 {
    ln_upper_gamma_cf(0.5, u * u) - (2.0 * PI.sqrt()).ln()
}

/// ln(e^{u²} erfc(u)/2).
fn ln_half_erfc_scaled(u: f64) -> f64 {
    ln_upper_gamma_cf_scaled(0.5, u * u) - (2.0 * PI.sqrt()).ln()
}

/// Builds a validated family.
pub fn make_family(spec: FamilySpec) -> Result<PearsonFamily> {
    PearsonFamily::new(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    pub(crate) fn all_families() -> Vec<PearsonFamily> {
        [
            FamilySpec::Ou { theta: 1.3, mu: 0.4, sigma: 0.8 },
            FamilySpec::Cir { theta: 0.7, a: 2.0, b: 3.0 },
            FamilySpec::Jacobi { theta: 1.0, a: 0.5, b: 1.5 },
            FamilySpec::Fs { theta: 1.0, alpha: 5.0, beta: 17.0 },
            FamilySpec::Rg { theta: 1.0, alpha: 2.0, beta: 9.0 },
            FamilySpec::Student { theta: 1.0, delta: 1.2, nu: 6.0, mu: 0.3, mu_prime: -0.2 },
        ]
        .into_iter()
        .map(|s| make_family(s).unwrap())
        .collect()
    }

    #[test]
    fn construction_and_categories() {
        let ou = make_family(FamilySpec::Ou { theta: 1.0, mu: 0.0, sigma: 1.0 }).unwrap();
        assert_eq!(ou.category(), Category::I);
        assert_eq!(ou.interval(), (f64::NEG_INFINITY, f64::INFINITY));
        assert!(matches!(
            make_family(FamilySpec::Fs { theta: 1.0, alpha: 2.0, beta: 6.0 }),
            Err(Error::Parameter(m)) if m.contains("alpha")
        ));
        assert!(matches!(
            make_family(FamilySpec::Student { theta: 1.0, delta: 1.0, nu: 3.0, mu: 0.0, mu_prime: 0.0 }),
            Err(Error::Parameter(m)) if m.contains("nu")
        ));
        assert!(make_family(FamilySpec::Jacobi { theta: 1.0, a: -1.0, b: 0.0 }).is_err());
        let fs4 = make_family(FamilySpec::Fs { theta: 1.0, alpha: 4.0, beta: 6.0 }).unwrap();
        assert_eq!(fs4.caveats().len(), 1);
    }

    #[test]
    fn json_round_trip() {
        let s: FamilySpec = serde_json::from_str(r#"{"kind":"jacobi","theta":1,"a":0,"b":0}"#).unwrap();
        assert_eq!(s, FamilySpec::Jacobi { theta: 1.0, a: 0.0, b: 0.0 });
        let s: FamilySpec = serde_json::from_str(r#"{"kind":"fisher_snedecor","theta":1,"alpha":4,"beta":6}"#).unwrap();
        assert_eq!(s.name(), "fs");
        assert!(serde_json::from_str::<FamilySpec>(r#"{"kind":"ou","theta":1,"mu":0,"sigma":1,"x":2}"#).is_err());
        let back: FamilySpec = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn stationary_density_values() {
        let ou = make_family(FamilySpec::Ou { theta: 1.0, mu: 0.0, sigma: 1.0 }).unwrap();
        assert_relative_eq!(ou.stationary_density(0.0).unwrap(), 1.0 / (2.0 * PI).sqrt(), max_relative = 1e-15);
        let cir = make_family(FamilySpec::Cir { theta: 1.0, a: 1.0, b: 1.0 }).unwrap();
        assert_relative_eq!(cir.stationary_density(1.0).unwrap(), (-1.0f64).exp(), max_relative = 1e-15);
        assert!(matches!(cir.stationary_density(-1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn densities_are_normalized_and_match_cdf() {
        for f in all_families() {
            let (l, r) = f.interval();
            let mass = de_interval(|x| f.m(x), l, r, Tol::new(1e-14, 1e-12)).unwrap();
            assert!((mass - 1.0).abs() < 1e-8, "{:?}: {mass}", f.spec());
            let x = f.mean() + 0.3 * f.scale();
            let direct = de_interval(|y| f.m(y), l, x, Tol::new(1e-14, 1e-12)).unwrap();
            assert_relative_eq!(f.cdf(x), direct, max_relative = 1e-9);
            assert_relative_eq!(f.cdf(x) + f.sf(x), 1.0, max_relative = 1e-12);
            let q = f.quantile(0.3);
            assert!((f.cdf(q) - 0.3).abs() < 1e-10, "{:?}", f.spec());
        }
    }

    #[test]
    fn log_tails() {
        for f in all_families() {
            for k in [-3.0, 0.0, 2.0] {
                let x = f.mean() + k * f.scale();
                if f.contains(x) {
                    assert_relative_eq!(f.ln_cdf(x), f.cdf(x).ln(), max_relative = 1e-10, epsilon = 1e-12);
                    assert_relative_eq!(f.ln_sf(x), f.sf(x).ln(), max_relative = 1e-10, epsilon = 1e-12);
                }
            }
        }
        // deep tails stay finite where the plain functions underflow
        let ou = make_family(FamilySpec::Ou { theta: 1.0, mu: 0.0, sigma: 1.0 }).unwrap();
        let v = ou.ln_sf(40.0);
        assert!(v.is_finite() && (v - (-800.0 - 40f64.ln() - 0.5 * (2.0 * PI).ln())).abs() < 1e-2);
        let cir = make_family(FamilySpec::Cir { theta: 1.0, a: 1.0, b: 2.0 }).unwrap();
        assert_relative_eq!(cir.ln_sf(900.0), -900.0 + 901f64.ln(), max_relative = 1e-12);
        for f in all_families() {
            for k in [-3.0, -1.0, 0.5, 2.0, 4.0] {
                let x = f.mean() + k * f.scale();
                if f.contains(x) {
                    let lm = f.ln_stationary_density(x);
                    assert_relative_eq!(f.ln_cdf_over_m(x), f.ln_cdf(x) - lm, max_relative = 1e-10, epsilon = 1e-10);
                    assert_relative_eq!(f.ln_sf_over_m(x), f.ln_sf(x) - lm, max_relative = 1e-10, epsilon = 1e-10);
                }
            }
        }
        // Mills ratio: (1 − M)/m → σ²/(x − μ)
        let x = 1e6;
        assert_relative_eq!(ou.ln_sf_over_m(x), -(x.ln()), max_relative = 1e-12);
    }

    #[test]
    fn pearson_equation() {
        for f in all_families() {
            for k in -3..=3 {
                let x = f.mean() + 0.2 * k as f64 * f.scale();
                if !f.contains(x) {
                    continue;
                }
                let h = 1e-5 * f.scale();
                let dl = (f.ln_stationary_density(x + h) - f.ln_stationary_density(x - h)) / (2.0 * h);
                let expect = f.pearson_numerator(x) / f.diffusion(x);
                assert!((dl - expect).abs() < 1e-6 * (1.0 + expect.abs()), "{:?} at {x}", f.spec());
            }
        }
    }

    #[test]
    fn eigenvalues_and_meta() {
        let ou = make_family(FamilySpec::Ou { theta: 2.0, mu: 0.0, sigma: 1.0 }).unwrap();
        assert_eq!(ou.eigenvalue(3).unwrap(), 6.0);
        let fs = make_family(FamilySpec::Fs { theta: 1.0, alpha: 4.0, beta: 6.0 }).unwrap();
        assert_relative_eq!(fs.eigenvalue(1).unwrap(), 1.0);
        let rg = make_family(FamilySpec::Rg { theta: 1.0, alpha: 1.0, beta: 5.0 }).unwrap();
        assert!(matches!(rg.eigenvalue(3), Err(Error::SpectrumBound(_))));
        let fs = make_family(FamilySpec::Fs { theta: 1.0, alpha: 5.0, beta: 17.0 }).unwrap();
        let meta = fs.spectrum_meta();
        assert_eq!(meta.n, Some(4));
        assert_relative_eq!(meta.cutoff.unwrap(), 289.0 / 120.0, max_relative = 1e-15);
        let st = make_family(FamilySpec::Student { theta: 1.0, delta: 1.0, nu: 6.0, mu: 0.0, mu_prime: 0.0 }).unwrap();
        assert_eq!(st.spectrum_meta().n, Some(3));
        assert_relative_eq!(st.spectrum_meta().cutoff.unwrap(), 1.8, max_relative = 1e-15);
        assert_eq!(st.admissible_n(), Some(2));
        assert_eq!(ou.spectrum_meta(), SpectrumMeta { category: Category::I, n: None, cutoff: None });
        // closed forms per family
        let j = make_family(FamilySpec::Jacobi { theta: 1.5, a: 0.5, b: 2.0 }).unwrap();
        assert_relative_eq!(j.eigenvalue(4).unwrap(), 4.0 * 1.5 * (4.0 + 3.5) / 4.5, max_relative = 1e-14);
        let rg = make_family(FamilySpec::Rg { theta: 2.0, alpha: 1.0, beta: 7.0 }).unwrap();
        assert_relative_eq!(rg.eigenvalue(2).unwrap(), 2.0 * 2.0 * 5.0 / 6.0, max_relative = 1e-14);
        assert_relative_eq!(st.eigenvalue(3).unwrap(), 1.8, max_relative = 1e-14);
    }

    #[test]
    fn generator_examples() {
        let ou = make_family(FamilySpec::Ou { theta: 1.7, mu: 0.0, sigma: 0.6 }).unwrap();
        assert_eq!(ou.generator_apply(|_| 3.0, 0.4).unwrap(), 0.0);
        assert_relative_eq!(ou.generator_apply(|x| x, 0.4).unwrap(), -1.7 * 0.4, max_relative = 1e-10);
        let (th, a, b) = (0.8, 2.0, 3.0);
        let cir = make_family(FamilySpec::Cir { theta: th, a, b }).unwrap();
        let x = 1.3;
        let expect = -2.0 * th * (x - b / a) * x + 2.0 * th * x / a;
        let p = Poly::new(vec![0.0, 0.0, 1.0]);
        assert_relative_eq!(cir.generator_apply_poly(&p, x).unwrap(), expect, max_relative = 1e-14);
        assert_relative_eq!(cir.generator_apply(|y| y * y, x).unwrap(), expect, max_relative = 1e-9);
        assert!(cir.generator_apply(|y| y, -0.5).is_err());
    }

    #[test]
    fn fokker_planck_annihilates_stationary_density() {
        for f in all_families() {
            let x = f.mean() + 0.37 * f.scale();
            let v = f.fokker_planck_apply(|y| f.m(y), x).unwrap();
            assert!(v.abs() < 1e-7 * f.m(x) / f.scale().powi(2), "{:?}: {v}", f.spec());
            let exact = f.fokker_planck_apply_density(&Poly::new(vec![1.0]), x).unwrap();
            assert!(exact.abs() < 1e-12 * f.m(x) / f.scale().powi(2), "{:?}: {exact}", f.spec());
        }
    }

    #[test]
    fn fokker_planck_on_a_bump() {
        let f = make_family(FamilySpec::Cir { theta: 1.0, a: 1.0, b: 2.0 }).unwrap();
        let bump = |x: f64| (-(x - 2.0) * (x - 2.0) * 4.0).exp();
        let x = 2.2;
        // closed-form derivatives of the bump
        let g = bump(x);
        let g1 = -8.0 * (x - 2.0) * g;
        let g2 = (64.0 * (x - 2.0).powi(2) - 8.0) * g;
        let mu = 2.0 - x;
        let d = x;
        let expect = -(-g + mu * g1) + (2.0 * g1 + d * g2);
        assert!((f.fokker_planck_apply(bump, x).unwrap() - expect).abs() < 1e-4);
    }
}
