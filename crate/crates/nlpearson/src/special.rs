//! Special functions not covered by `statrs`.

use num_complex::Complex64;
use std::f64::consts::PI;

pub use statrs::function::erf::erfc;
pub use statrs::function::gamma::{gamma, gamma_lr, gamma_ur, ln_gamma};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Principal-ish complex log-gamma (Lanczos, g = 7, with reflection).
///
/// The real part is exact to near machine precision; the imaginary part may
/// differ from the principal branch by a multiple of 2π.
pub fn ln_gamma_c(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        // ln Γ(z) = ln π − ln sin(πz) − ln Γ(1 − z)
        let w = z * PI;
        return Complex64::new(PI.ln(), 0.0) - ln_sin(w) - ln_gamma_c(Complex64::new(1.0, 0.0) - z);
    }
    let z = z - 1.0;
    let mut x = Complex64::new(LANCZOS[0], 0.0);
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        x += *c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + x.ln()
}

/// ln sin(w) without overflow for large |Im w|.
fn ln_sin(w: Complex64) -> Complex64 {
    let i = Complex64::i();
    if w.im.abs() < 1.0 {
        return w.sin().ln();
    }
    if w.im > 0.0 {
        -i * w + ((2.0 * i * w).exp() - 1.0).ln() - (2.0 * i).ln()
    } else {
        i * w + (1.0 - (-2.0 * i * w).exp()).ln() - (2.0 * i).ln()
    }
}

/// 1/Γ(y), entire; exactly zero at the poles of Γ.
pub fn rgamma(y: f64) -> f64 {
    if y <= 0.0 && y == y.floor() {
        return 0.0;
    }
    if y < 0.5 {
        // reflection: 1/Γ(y) = Γ(1 − y) sin(πy) / π
        return gamma(1.0 - y) * (PI * y).sin() / PI;
    }
    1.0 / gamma(y)
}

/// Non-regularized upper incomplete gamma Γ(a, x) for x > 1 and any real a,
/// by the Legendre continued fraction.
pub fn upper_gamma_cf(a: f64, x: f64) -> f64 {
    ln_upper_gamma_cf(a, x).exp()
}

/// ln Γ(a, x) for x > 1, free of underflow.
pub fn ln_upper_gamma_cf(a: f64, x: f64) -> f64 {
    ln_upper_gamma_cf_scaled(a, x) - x
}

/// ln(eˣ Γ(a, x)) for x > 1.
pub fn ln_upper_gamma_cf_scaled(a: f64, x: f64) -> f64 {
    assert!(x > 1.0, "continued fraction is used for x > 1");
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..1000 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    a * x.ln() + h.ln()
}

/// |Γ(z)|² computed in log space, returned as a logarithm.
pub fn ln_abs_gamma_sq(z: Complex64) -> f64 {
    2.0 * ln_gamma_c(z).re
}

/// Exponential integral E₁(x) for x > 0.
pub fn e1(x: f64) -> f64 {
    assert!(x > 0.0, "e1 requires x > 0");
    const EULER: f64 = 0.577_215_664_901_532_9;
    if x <= 1.0 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..200 {
            term *= -x / k as f64;
            let add = -term / k as f64;
            sum += add;
            if add.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        -EULER - x.ln() + sum
    } else {
        // modified Lentz continued fraction
        let tiny = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let a = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (a * d + b);
            c = b + a / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h * (-x).exp()
    }
}

/// Normalizing constant of the Student stationary law with skewness parameter
/// c = (μ − μ′)(ν − 1)/δ: returns 1 / ∫ (1+u²)^{−(ν+1)/2} e^{c·atan u} δ du.
pub fn student_normalizer(nu: f64, delta: f64, c: f64) -> f64 {
    // ∫_{−π/2}^{π/2} cos^{ν−1}φ e^{cφ} dφ = π Γ(ν) / (2^{ν−1} |Γ((ν+1+ic)/2)|²)
    let ln_z =
        PI.ln() + ln_gamma(nu) - (nu - 1.0) * 2f64.ln() - ln_abs_gamma_sq(Complex64::new(0.5 * (nu + 1.0), 0.5 * c));
    1.0 / (delta * ln_z.exp())
}
