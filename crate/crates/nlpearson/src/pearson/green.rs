//! Green kernel of −𝒢 on mean-zero functions in L²(m dx):
//! Σ_{n≥1} Q_n(x)Q_n(y)/λ_n plus, for category II, the continuous analogue.
//!
//! With M the stationary distribution function and s = 1/(D m),
//!   G(x,y) = ∫_l^{x∧y} M² s − ∫_{x∧y}^{x∨y} M(1−M) s + ∫_{x∨y}^L (1−M)² s.

use super::PearsonFamily;
use crate::error::Result;
use crate::quad::{de_interval, integrate, Tol};

#[derive(Clone, Debug)]
pub struct GreenKernel {
    family: PearsonFamily,
}

const TOL: Tol = Tol { abs: 1e-14, rel: 1e-11, max_segments: 4000 };

impl GreenKernel {
    pub fn new(family: &PearsonFamily) -> Self {
        GreenKernel { family: family.clone() }
    }

    /// M^i (1−M)^j s in log form; one factor of M or 1 − M is paired with
    /// 1/m so that the tail exponentials cancel exactly.
    fn w(&self, z: f64, i: i32, j: i32) -> f64 {
        let f = &self.family;
        let ln = match (i, j) {
            (2, 0) => f.ln_cdf(z) + f.ln_cdf_over_m(z),
            (0, 2) => f.ln_sf(z) + f.ln_sf_over_m(z),
            _ if z <= f.mean() => f.ln_cdf_over_m(z) + f.ln_sf(z),
            _ => f.ln_cdf(z) + f.ln_sf_over_m(z),
        };
        (ln - f.diffusion(z).ln()).exp()
    }

    /// ∫_l^x M² s.
    pub fn left(&self, x: f64) -> Result<f64> {
        let (l, _) = self.family.interval();
        de_interval(|z| self.w(z, 2, 0), l, x, TOL)
    }

    /// ∫_x^L (1−M)² s.
    pub fn right(&self, x: f64) -> Result<f64> {
        let (_, r) = self.family.interval();
        de_interval(|z| self.w(z, 0, 2), x, r, TOL)
    }

    /// ∫_a^b M(1−M) s for a ≤ b. Pieces beyond one scale from the mean are
    /// integrated in ln|z − mean|, since the integrand decays only like
    /// 1/|μ(z)| there.
    pub fn middle(&self, a: f64, b: f64) -> Result<f64> {
        if a >= b {
            return Ok(0.0);
        }
        let c = self.family.mean();
        let sc = self.family.scale();
        let mut cuts = vec![a];
        cuts.extend([c - sc, c, c + sc].into_iter().filter(|&p| p > a && p < b));
        cuts.push(b);
        let g = |z: f64| self.w(z, 1, 1);
        let mut sum = 0.0;
        for win in cuts.windows(2) {
            let (u, v) = (win[0], win[1]);
            sum += if u >= c + sc {
                integrate(
                    |w| {
                        let d = w.exp();
                        g(c + d) * d
                    },
                    (u - c).ln(),
                    (v - c).ln(),
                    TOL,
                )?
            } else if v <= c - sc {
                integrate(
                    |w| {
                        let d = w.exp();
                        g(c - d) * d
                    },
                    (c - v).ln(),
                    (c - u).ln(),
                    TOL,
                )?
            } else {
                integrate(g, u, v, TOL)?
            };
        }
        Ok(sum)
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        self.family.check(x)?;
        self.family.check(y)?;
        let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
        Ok(self.left(lo)? - self.middle(lo, hi)? + self.right(hi)?)
    }

    /// G(x_i, y) for a fixed y, sharing the y-dependent pieces.
    pub fn eval_column(&self, xs: &[f64], y: f64) -> Result<Vec<f64>> {
        self.family.check(y)?;
        let (ly, ry) = (self.left(y)?, self.right(y)?);
        xs.iter()
            .map(|&x| {
                self.family.check(x)?;
                if x <= y {
                    Ok(self.left(x)? - self.middle(x, y)? + ry)
                } else {
                    Ok(ly - self.middle(y, x)? + self.right(x)?)
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::super::{make_family, FamilySpec, PolynomialSystem};
    use super::*;

    #[test]
    fn inverts_the_generator_on_eigenfunctions() {
        for spec in [
            FamilySpec::Ou { theta: 1.3, mu: 0.4, sigma: 0.8 },
            FamilySpec::Cir { theta: 0.7, a: 2.0, b: 3.0 },
            FamilySpec::Jacobi { theta: 1.0, a: 0.5, b: 1.5 },
            FamilySpec::Fs { theta: 1.0, alpha: 5.0, beta: 17.0 },
        ] {
            let f = make_family(spec).unwrap();
            let g = GreenKernel::new(&f);
            let ps = PolynomialSystem::new(&f, 4).unwrap();
            let (l, r) = (f.quantile(1e-13), f.quantile(1.0 - 1e-13));
            let x = f.mean() + 0.3 * f.scale();
            for n in 0..=2 {
                let q = ps.polynomial(n).unwrap();
                let h = |y: f64| g.eval(x, y).unwrap() * q.eval(y) * f.m(y);
                let v = de_interval(h, l, x, Tol::new(1e-11, 1e-9)).unwrap()
                    + de_interval(h, x, r, Tol::new(1e-11, 1e-9)).unwrap();
                let expect = if n == 0 { 0.0 } else { q.eval(x) / ps.eigenvalue(n).unwrap() };
                assert!((v - expect).abs() < 1e-7, "{spec:?} n = {n}: {v} vs {expect}");
            }
        }
    }

    #[test]
    fn column_matches_pointwise_and_is_symmetric() {
        let f = make_family(FamilySpec::Cir { theta: 1.0, a: 1.0, b: 2.0 }).unwrap();
        let g = GreenKernel::new(&f);
        let xs = [0.3, 1.0, 2.0, 5.0];
        let col = g.eval_column(&xs, 1.7).unwrap();
        for (x, v) in xs.iter().zip(col) {
            assert!((g.eval(*x, 1.7).unwrap() - v).abs() < 1e-10);
            assert!((g.eval(1.7, *x).unwrap() - v).abs() < 1e-10);
        }
    }
}
