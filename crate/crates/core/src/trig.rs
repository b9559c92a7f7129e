//! Trigonometry in units of turns and half-turns, with exact zeros at the
//! lattice points where the true value vanishes.

use num_complex::Complex64;
use std::f64::consts::PI;

/// `sin(πx)`; exactly 0 at integers.
pub fn sin_pi(x: f64) -> f64 {
    if !x.is_finite() {
        return f64::NAN;
    }
    // reduce to r ∈ [−1, 1], r ≡ x (mod 2)
    let r = x - 2.0 * (x / 2.0).round();
    if r == 0.0 || r.abs() == 1.0 {
        return 0.0;
    }
    if r.abs() <= 0.5 {
        (PI * r).sin()
    } else {
        (PI * (r.signum() - r)).sin()
    }
}

/// `cos(πx)`; exactly 0 at half-integers and ±1 at integers.
pub fn cos_pi(x: f64) -> f64 {
    if !x.is_finite() {
        return f64::NAN;
    }
    let r = (x - 2.0 * (x / 2.0).round()).abs();
    if r == 0.0 {
        1.0
    } else if r == 1.0 {
        -1.0
    } else if r == 0.5 {
        0.0
    } else if r < 0.5 {
        (PI * r).cos()
    } else {
        -(PI * (1.0 - r)).cos()
    }
}

/// `sin(πx)/(πx)`, equal to 1 at 0.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else if x.abs() < 1e-4 {
        let y = PI * x;
        1.0 - y * y / 6.0 + y.powi(4) / 120.0
    } else {
        sin_pi(x) / (PI * x)
    }
}

/// `e(x) = exp(2πix)`.
pub fn e(x: f64) -> Complex64 {
    Complex64::new(cos_pi(2.0 * x), sin_pi(2.0 * x))
}
