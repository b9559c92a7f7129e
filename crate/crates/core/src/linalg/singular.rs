//! Certified smallest singular values.
//!
//! `σ(M)² = λ_min(MᵀM)`. The characteristic polynomial of the Gram matrix is
//! computed exactly; its smallest root is bracketed by dyadic bisection using
//! Sturm counts, so every decision (is the value above 1? above K?) is exact.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::poly::{char_poly, SturmSequence};
use super::{IntMatrix, RationalMatrix};

pub const DEFAULT_SINGULAR_TOL: f64 = 1e-12;

const MAX_BISECTIONS: usize = 512;

/// An interval certified to contain a smallest singular value.
#[derive(Clone, Debug, PartialEq)]
pub struct SingularInterval {
    pub lower: f64,
    pub upper: f64,
    /// Exact bracket `(lo, hi]` for the squared singular value.
    pub squared_lo: BigRational,
    pub squared_hi: BigRational,
}

impl SingularInterval {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

fn rat_from_f64(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite float")
}

/// Largest f64 whose square is `<= q` (q ≥ 0).
fn sqrt_down(q: &BigRational) -> f64 {
    if q.is_zero() {
        return 0.0;
    }
    let mut s = q.to_f64().unwrap_or(f64::MAX).sqrt();
    while s > 0.0 && rat_from_f64(s) * rat_from_f64(s) > *q {
        s = s.next_down();
    }
    loop {
        let up = s.next_up();
        if rat_from_f64(up) * rat_from_f64(up) <= *q {
            s = up;
        } else {
            return s;
        }
    }
}

/// Smallest f64 whose square is `>= q` (q ≥ 0).
fn sqrt_up(q: &BigRational) -> f64 {
    if q.is_zero() {
        return 0.0;
    }
    let mut s = q.to_f64().unwrap_or(f64::MAX).sqrt();
    while rat_from_f64(s) * rat_from_f64(s) < *q {
        s = s.next_up();
    }
    loop {
        let down = s.next_down();
        if down > 0.0 && rat_from_f64(down) * rat_from_f64(down) >= *q {
            s = down;
        } else {
            return s;
        }
    }
}

/// Bracket the smallest root of the char. polynomial of `gram`, divided by
/// `scale2`, then take square roots.
fn certify(gram: &IntMatrix, scale2: &BigInt, tol: f64) -> SingularInterval {
    let sturm: SturmSequence = char_poly(gram).sturm_sequence();
    let zero = BigRational::zero();
    let scale = BigRational::from_integer(scale2.clone());
    if sturm.count_at_most(&zero) > 0 {
        // Singular: the Gram matrix is PSD, so 0 is the smallest eigenvalue.
        return SingularInterval {
            lower: 0.0,
            upper: 0.0,
            squared_lo: zero.clone(),
            squared_hi: zero,
        };
    }
    // Eigenvalues are positive; λ_min ≤ trace.
    let mut lo = zero;
    let mut hi = BigRational::from_integer(gram.trace());
    let two = BigRational::from_integer(BigInt::from(2));
    let mut out = bracket(&lo, &hi, &scale);
    for _ in 0..MAX_BISECTIONS {
        if out.width() <= tol {
            break;
        }
        // Past this point the f64 endpoints can no longer move.
        let resolution = &hi * rat_from_f64(f64::EPSILON * f64::EPSILON);
        if &hi - &lo < resolution {
            break;
        }
        let mid = (&lo + &hi) / &two;
        if sturm.count_at_most(&mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
        out = bracket(&lo, &hi, &scale);
    }
    out
}

fn bracket(lo: &BigRational, hi: &BigRational, scale: &BigRational) -> SingularInterval {
    let slo = lo / scale;
    let shi = hi / scale;
    SingularInterval {
        lower: sqrt_down(&slo),
        upper: sqrt_up(&shi),
        squared_lo: slo,
        squared_hi: shi,
    }
}

/// Certified enclosure of `σ(M) = min ‖Mx‖₂/‖x‖₂` of width at most `tol`
/// (or the limit of `f64` resolution, whichever is larger).
pub fn smallest_singular_value(m: &IntMatrix, tol: f64) -> SingularInterval {
    certify(&m.gram(), &BigInt::one(), tol)
}

/// As [`smallest_singular_value`] for a rational matrix: `σ(R) = σ(qR)/q`.
pub fn smallest_singular_value_rational(m: &RationalMatrix, tol: f64) -> SingularInterval {
    let (scaled, q) = m.clear_denominators();
    certify(&scaled.gram(), &(&q * &q), tol)
}

/// True iff every singular value of `m` exceeds 1, decided exactly.
pub fn is_expanding(m: &IntMatrix) -> bool {
    let sturm = char_poly(&m.gram()).sturm_sequence();
    sturm.count_at_most(&BigRational::one()) == 0
}

/// True iff every singular value of the rational matrix exceeds 1.
pub fn is_expanding_rational(m: &RationalMatrix) -> bool {
    let (scaled, q) = m.clear_denominators();
    let sturm = char_poly(&scaled.gram()).sturm_sequence();
    sturm.count_at_most(&BigRational::from_integer(&q * &q)) == 0
}
