//! Piecewise cubic Hermite interpolation.

/// Cubic Hermite interpolant with given nodal slopes.
#[derive(Clone, Debug)]
pub struct Hermite {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl Hermite {
    /// Builds from nodes, values and exact derivatives. Nodes must increase.
    pub fn new(x: Vec<f64>, y: Vec<f64>, d: Vec<f64>) -> Self {
        assert!(x.len() >= 2 && x.len() == y.len() && y.len() == d.len());
        debug_assert!(x.windows(2).all(|w| w[0] < w[1]));
        Hermite { x, y, d }
    }

    /// Monotone interpolant with Fritsch–Carlson slopes.
    pub fn pchip(x: Vec<f64>, y: Vec<f64>) -> Self {
        let n = x.len();
        assert!(n >= 2 && n == y.len());
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        let mut d = vec![0.0; n];
        if n == 2 {
            d[0] = delta[0];
            d[1] = delta[0];
            return Hermite { x, y, d };
        }
        for i in 1..n - 1 {
            if delta[i - 1] * delta[i] > 0.0 {
                let w1 = 2.0 * h[i] + h[i - 1];
                let w2 = h[i] + 2.0 * h[i - 1];
                d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
        let end = |h0: f64, h1: f64, d0: f64, d1: f64| {
            let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
            if s * d0 <= 0.0 {
                0.0
            } else if d0 * d1 <= 0.0 && s.abs() > 3.0 * d0.abs() {
                3.0 * d0
            } else {
                s
            }
        };
        d[0] = end(h[0], h[1], delta[0], delta[1]);
        d[n - 1] = end(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        Hermite { x, y, d }
    }

    pub fn range(&self) -> (f64, f64) {
        (self.x[0], *self.x.last().unwrap())
    }

    /// Evaluates; arguments outside the node range are clamped.
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        if t <= self.x[0] {
            return self.y[0];
        }
        if t >= self.x[n - 1] {
            return self.y[n - 1];
        }
        let i = match self.x.binary_search_by(|v| v.total_cmp(&t)) {
            Ok(i) => return self.y[i],
            Err(i) => i - 1,
        };
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.y[i] + h10 * h * self.d[i] + h01 * self.y[i + 1] + h11 * h * self.d[i + 1]
    }
}

impl Hermite {
    /// First derivative of the interpolant; clamped to the end slopes outside.
    pub fn deriv(&self, t: f64) -> f64 {
        let n = self.x.len();
        if t <= self.x[0] {
            return self.d[0];
        }
        if t >= self.x[n - 1] {
            return self.d[n - 1];
        }
        let i = match self.x.binary_search_by(|v| v.total_cmp(&t)) {
            Ok(i) => return self.d[i],
            Err(i) => i - 1,
        };
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let s2 = s * s;
        let d00 = (6.0 * s2 - 6.0 * s) / h;
        let d10 = 3.0 * s2 - 4.0 * s + 1.0;
        let d01 = (-6.0 * s2 + 6.0 * s) / h;
        let d11 = 3.0 * s2 - 2.0 * s;
        d00 * self.y[i] + d10 * self.d[i] + d01 * self.y[i + 1] + d11 * self.d[i + 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_is_exact_for_cubics() {
        let x: Vec<f64> = (0..6).map(|i| i as f64 * 0.4).collect();
        let f = |t: f64| t * t * t - 2.0 * t + 1.0;
        let df = |t: f64| 3.0 * t * t - 2.0;
        let h = Hermite::new(x.clone(), x.iter().map(|&t| f(t)).collect(), x.iter().map(|&t| df(t)).collect());
        for &t in &[0.1, 0.77, 1.3, 1.99] {
            assert!((h.eval(t) - f(t)).abs() < 1e-13);
            assert!((h.deriv(t) - df(t)).abs() < 1e-12);
        }
    }

    #[test]
    fn pchip_preserves_monotonicity() {
        let x = vec![0.0, 1.0, 2.0, 3.0, 4.0];
        let y = vec![0.0, 0.0, 1.0, 1.0, 5.0];
        let p = Hermite::pchip(x, y);
        let mut prev = p.eval(0.0);
        for i in 1..=400 {
            let v = p.eval(i as f64 * 0.01);
            assert!(v >= prev - 1e-15);
            prev = v;
        }
    }
}
