//! Numerical inversion of Laplace transforms.
//!
//! The fixed Talbot contour (Abate–Valkó) is the workhorse; a Gaver–Stehfest
//! sum on the real axis can be enabled as an independent cross-check.

use crate::error::{numeric, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_2, PI};
use std::sync::OnceLock;

/// Settings for [`invert`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InversionParams {
    /// Number of Talbot nodes.
    pub talbot_nodes: usize,
    /// Re-evaluate with Gaver–Stehfest and fail on disagreement.
    pub cross_check: bool,
    /// Disagreement threshold, absolute for |f| ≤ 1 and relative above.
    pub tolerance: f64,
}

impl Default for InversionParams {
    fn default() -> Self {
        InversionParams { talbot_nodes: 32, cross_check: true, tolerance: 1e-4 }
    }
}

impl InversionParams {
    pub fn without_cross_check(self) -> Self {
        InversionParams { cross_check: false, ..self }
    }
}

/// Nodes and weights of the fixed Talbot rule at one time `t`, so that
/// f(t) ≈ Σ Re(w_k F(z_k)). Reusable across transforms sharing the nodes.
#[derive(Clone, Debug)]
pub struct TalbotRule {
    pub nodes: Vec<Complex64>,
    pub weights: Vec<Complex64>,
    /// Weights without the e^{zt} factor, for log-domain evaluation.
    pre: Vec<Complex64>,
    t: f64,
}

impl TalbotRule {
    pub fn new(t: f64, m: usize) -> Self {
        let r = 2.0 * m as f64 / (5.0 * t);
        let scale = r / m as f64;
        let mut nodes = Vec::with_capacity(m);
        let mut pre = Vec::with_capacity(m);
        nodes.push(Complex64::new(r, 0.0));
        pre.push(Complex64::new(0.5 * scale, 0.0));
        for k in 1..m {
            let th = k as f64 * PI / m as f64;
            let cot = th.cos() / th.sin();
            let z = Complex64::new(r * th * cot, r * th);
            let sigma = th + (th * cot - 1.0) * cot;
            nodes.push(z);
            pre.push(scale * Complex64::new(1.0, sigma));
        }
        let weights = nodes.iter().zip(&pre).map(|(z, p)| p * (z * t).exp()).collect();
        TalbotRule { nodes, weights, pre, t }
    }

    /// Applies the rule to transform values already sampled at the nodes.
    pub fn apply_values(&self, values: &[Complex64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| (w * v).re).sum()
    }

    pub fn apply<F: Fn(Complex64) -> Complex64>(&self, f: F) -> f64 {
        self.weights.iter().zip(&self.nodes).map(|(w, z)| (w * f(*z)).re).sum()
    }

    /// Log-domain counterpart of [`TalbotRule::apply_values`].
    pub fn apply_log_values(&self, ln_values: &[Complex64]) -> f64 {
        self.pre.iter().zip(&self.nodes).zip(ln_values).map(|((p, z), l)| (p * (z * self.t + l).exp()).re).sum()
    }

    /// Applies the rule to a transform given through its logarithm, which
    /// avoids 0·∞ where e^{zt} underflows and the transform overflows.
    pub fn apply_log<F: Fn(Complex64) -> Complex64>(&self, ln_f: F) -> f64 {
        self.pre.iter().zip(&self.nodes).map(|(p, z)| (p * (z * self.t + ln_f(*z)).exp()).re).sum()
    }
}

/// Fixed Talbot inversion of `f` at time `t > 0`.
pub fn talbot<F: Fn(Complex64) -> Complex64>(f: F, t: f64, m: usize) -> f64 {
    TalbotRule::new(t, m).apply(f)
}

pub const STEHFEST_N: usize = 14;

fn stehfest_weights() -> &'static [f64; STEHFEST_N] {
    static W: OnceLock<[f64; STEHFEST_N]> = OnceLock::new();
    W.get_or_init(|| {
        let fact = |n: usize| (1..=n).fold(1.0f64, |a, k| a * k as f64);
        let h = STEHFEST_N / 2;
        let mut v = [0.0; STEHFEST_N];
        for (idx, vk) in v.iter_mut().enumerate() {
            let k = idx + 1;
            let mut s = 0.0;
            for j in k.div_ceil(2)..=k.min(h) {
                s += (j as f64).powi(h as i32) * fact(2 * j)
                    / (fact(h - j) * fact(j) * fact(j - 1) * fact(k - j) * fact(2 * j - k));
            }
            *vk = if (k + h) % 2 == 0 { s } else { -s };
        }
        v
    })
}

/// Gaver–Stehfest inversion (14 terms) using real-axis samples only.
pub fn stehfest<F: Fn(f64) -> f64>(f: F, t: f64) -> f64 {
    let a = LN_2 / t;
    stehfest_weights().iter().enumerate().map(|(k, v)| v * f((k + 1) as f64 * a)).sum::<f64>() * a
}

/// Real abscissae used by [`stehfest`] at time `t`.
pub fn stehfest_nodes(t: f64) -> [f64; STEHFEST_N] {
    let a = LN_2 / t;
    std::array::from_fn(|k| (k + 1) as f64 * a)
}

/// Stehfest sum from values sampled at [`stehfest_nodes`].
pub fn stehfest_values(values: &[f64; STEHFEST_N], t: f64) -> f64 {
    stehfest_weights().iter().zip(values).map(|(w, v)| w * v).sum::<f64>() * LN_2 / t
}

/// Cross-check verdict shared by single and batched inversions.
pub(crate) fn check_agreement(v: f64, s: f64, t: f64, p: &InversionParams) -> Result<()> {
    let scale = v.abs().max(1.0);
    if !((v - s).abs() <= p.tolerance * scale) {
        return numeric(format!("Laplace inversion disagreement at t = {t}: Talbot {v:.12e}, Stehfest {s:.12e}"));
    }
    Ok(())
}

/// Inverts `f` at `t` with the configured method and optional cross-check.
pub fn invert<F: Fn(Complex64) -> Complex64>(f: &F, t: f64, p: &InversionParams) -> Result<f64> {
    let v = talbot(f, t, p.talbot_nodes);
    if !v.is_finite() {
        return numeric(format!("Talbot inversion produced {v} at t = {t}"));
    }
    if p.cross_check {
        let s = stehfest(|x| f(Complex64::new(x, 0.0)).re, t);
        check_agreement(v, s, t, p)?;
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn talbot_elementary_transforms() {
        let one = Complex64::new(1.0, 0.0);
        for &t in &[0.05, 1.0, 7.0] {
            assert!((talbot(|z| one / (z + 1.0), t, 32) - (-t).exp()).abs() < 1e-10);
            // z^{-1/2} ↔ 1/√(πt)
            assert_relative_eq!(talbot(|z| z.powf(-0.5), t, 32), 1.0 / (PI * t).sqrt(), max_relative = 1e-9);
        }
    }

    #[test]
    fn stehfest_is_a_rough_cross_check() {
        let v = stehfest(|x| 1.0 / (x + 1.0), 1.0);
        assert!((v - (-1.0f64).exp()).abs() < 1e-5);
    }

    #[test]
    fn invert_flags_disagreement() {
        // a transform Stehfest cannot follow: oscillatory sin(10 t)
        let f = |z: Complex64| Complex64::new(10.0, 0.0) / (z * z + 100.0);
        let p = InversionParams::default();
        assert!(invert(&f, 2.0, &p).is_err());
        assert!(invert(&f, 2.0, &p.without_cross_check()).is_ok());
    }
}
