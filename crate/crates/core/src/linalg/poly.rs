//! Univariate rational polynomials, characteristic polynomials and Sturm
//! root counting.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::IntMatrix;

/// Polynomial with rational coefficients, lowest degree first.
///
/// The zero polynomial has an empty coefficient list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    coeffs: Vec<BigRational>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn from_integers(coeffs: &[BigInt]) -> Self {
        Self::new(coeffs.iter().map(|c| BigRational::from_integer(c.clone())).collect())
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    fn leading(&self) -> Option<&BigRational> {
        self.coeffs.last()
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        self.coeffs.iter().rev().fold(BigRational::zero(), |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i)))
                .collect(),
        )
    }

    /// Euclidean division, returning `(quotient, remainder)`.
    ///
    /// Panics when dividing by the zero polynomial.
    pub fn div_rem(&self, divisor: &Poly) -> (Poly, Poly) {
        let dd = divisor.degree().expect("division by zero polynomial");
        let lead = divisor.leading().unwrap();
        let mut rem = self.coeffs.clone();
        let Some(nd) = self.degree() else {
            return (Poly::new(vec![]), Poly::new(vec![]));
        };
        if nd < dd {
            return (Poly::new(vec![]), self.clone());
        }
        let mut quot = vec![BigRational::zero(); nd - dd + 1];
        for k in (0..=nd - dd).rev() {
            let c = &rem[k + dd] / lead;
            if !c.is_zero() {
                for (j, dc) in divisor.coeffs.iter().enumerate() {
                    rem[k + j] -= &c * dc;
                }
            }
            quot[k] = c;
        }
        rem.truncate(dd);
        (Poly::new(quot), Poly::new(rem))
    }

    fn monic(&self) -> Poly {
        match self.leading() {
            Some(l) => Poly::new(self.coeffs.iter().map(|c| c / l).collect()),
            None => self.clone(),
        }
    }

    pub fn gcd(&self, other: &Poly) -> Poly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// The square-free part `p / gcd(p, p')`, which has the same distinct roots.
    pub fn square_free(&self) -> Poly {
        if self.degree().unwrap_or(0) == 0 {
            return self.clone();
        }
        let g = self.gcd(&self.derivative());
        self.div_rem(&g).0
    }

    /// Sturm sequence of the square-free part.
    pub fn sturm_sequence(&self) -> SturmSequence {
        let p0 = self.square_free();
        let mut seq = vec![p0.clone()];
        if p0.degree().unwrap_or(0) > 0 {
            let mut prev = p0;
            let mut cur = prev.derivative();
            while !cur.is_zero() {
                let (_, r) = prev.div_rem(&cur);
                let next = Poly::new(r.coeffs.into_iter().map(|c| -c).collect());
                seq.push(cur.clone());
                prev = cur;
                cur = next;
            }
        }
        SturmSequence { polys: seq }
    }
}

/// A Sturm chain; counts distinct real roots in half-open intervals.
#[derive(Clone, Debug)]
pub struct SturmSequence {
    polys: Vec<Poly>,
}

fn sign_changes(signs: impl Iterator<Item = i8>) -> usize {
    let mut last = 0i8;
    let mut changes = 0;
    for s in signs.filter(|&s| s != 0) {
        if last != 0 && s != last {
            changes += 1;
        }
        last = s;
    }
    changes
}

fn sign_of(q: &BigRational) -> i8 {
    if q.is_positive() {
        1
    } else if q.is_negative() {
        -1
    } else {
        0
    }
}

impl SturmSequence {
    fn changes_at(&self, x: &BigRational) -> usize {
        sign_changes(self.polys.iter().map(|p| sign_of(&p.eval(x))))
    }

    fn changes_at_neg_inf(&self) -> usize {
        sign_changes(self.polys.iter().map(|p| match (p.degree(), p.leading()) {
            (Some(deg), Some(l)) => {
                let s = sign_of(l);
                if deg % 2 == 1 {
                    -s
                } else {
                    s
                }
            }
            _ => 0,
        }))
    }

    fn changes_at_pos_inf(&self) -> usize {
        sign_changes(self.polys.iter().map(|p| p.leading().map_or(0, sign_of)))
    }

    /// Number of distinct real roots in `(-∞, c]`.
    pub fn count_at_most(&self, c: &BigRational) -> usize {
        self.changes_at_neg_inf() - self.changes_at(c)
    }

    /// Number of distinct real roots.
    pub fn count_real(&self) -> usize {
        self.changes_at_neg_inf() - self.changes_at_pos_inf()
    }
}

/// Characteristic polynomial `det(λI − M)` by Faddeev–LeVerrier; every
/// division in the recurrence is exact over the integers.
pub fn char_poly(m: &IntMatrix) -> Poly {
    let d = m.dim();
    let mut coeffs = vec![BigInt::zero(); d + 1];
    coeffs[d] = BigInt::one();
    let mut mk = IntMatrix::identity(d);
    for k in 1..=d {
        let am = m.mul(&mk);
        let c = -(am.trace()) / BigInt::from(k);
        coeffs[d - k] = c.clone();
        if k < d {
            mk = am;
            mk.add_diagonal(&c);
        }
    }
    Poly::from_integers(&coeffs)
}
