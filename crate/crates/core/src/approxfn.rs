//! Trapezoid majorants and minorants of a box indicator, their Fourier
//! coefficients, and the ε(n) schedules that shrink the ramps.
//!
//! A trapezoid with plateau half-width `p` and support half-width `s` is the
//! convolution of boxes of half-widths `a = (p+s)/2` and `b = (s−p)/2`,
//! scaled by `1/(2b)`, hence its transform is `2a·sinc(2ak)·sinc(2bk)`.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{LabError, Result};
use crate::lattice::Overlattice;
use crate::linalg::IntMatrix;
use crate::orbit::TorusPoint;
use crate::trig::{e, sinc};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Upper,
    Lower,
}

impl Side {
    pub fn name(self) -> &'static str {
        match self {
            Side::Upper => "upper",
            Side::Lower => "lower",
        }
    }

    /// `+1` for the majorant, `−1` for the minorant.
    pub fn sign(self) -> f64 {
        match self {
            Side::Upper => 1.0,
            Side::Lower => -1.0,
        }
    }
}

/// One-dimensional trapezoid `X±` around `[−r, r]` with ramp width `rε`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrapezoidSpec {
    r: f64,
    eps: f64,
    side: Side,
}

impl TrapezoidSpec {
    pub fn new(r: f64, eps: f64, side: Side) -> Result<Self> {
        if !(r > 0.0 && r <= 0.5) {
            return Err(LabError::invalid("r", "radius must lie in (0, 1/2]"));
        }
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(LabError::invalid("eps", "eps must lie in (0, 1]"));
        }
        Ok(TrapezoidSpec { r, eps, side })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn plateau(&self) -> f64 {
        match self.side {
            Side::Upper => self.r,
            Side::Lower => (1.0 - self.eps) * self.r,
        }
    }

    pub fn support(&self) -> f64 {
        match self.side {
            Side::Upper => self.r * (1.0 + self.eps),
            Side::Lower => self.r,
        }
    }
}

/// `X±(x)`.
pub fn chi_eval(spec: &TrapezoidSpec, x: f64) -> f64 {
    let ax = x.abs();
    let (p, s) = (spec.plateau(), spec.support());
    if ax <= p {
        1.0
    } else if ax >= s {
        0.0
    } else {
        let ramp = 1.0 / (spec.r * spec.eps);
        match spec.side {
            Side::Upper => 1.0 + ramp * (spec.r - ax),
            Side::Lower => ramp * (spec.r - ax),
        }
    }
}

/// `∫ X±(x) e(−kx) dx` (real, since `X±` is even).
pub fn trapezoid_fourier_1d(spec: &TrapezoidSpec, k: f64) -> f64 {
    let (p, s) = (spec.plateau(), spec.support());
    let a = 0.5 * (p + s);
    let b = 0.5 * (s - p);
    2.0 * a * sinc(2.0 * a * k) * sinc(2.0 * b * k)
}

/// `min{p + s, 1/(π²k²rε)}`, which `|X̂±(k)|` never exceeds.
pub fn trapezoid_envelope(spec: &TrapezoidSpec, k: f64) -> f64 {
    let head = spec.plateau() + spec.support();
    if k == 0.0 {
        return head;
    }
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    head.min(1.0 / (pi2 * k * k * spec.r * spec.eps))
}

/// `h±` for the target `A⁻¹(y + ℛ(r)) (mod 1)`: its coefficients live on
/// `AᵀZᵈ` and equal `e(−⟨k′,y⟩)·Π X̂ᵢ(k′ᵢ)` at `k = Aᵀk′`.
#[derive(Clone, Debug)]
pub struct Approximant {
    lattice: Overlattice,
    center: TorusPoint,
    specs: Vec<TrapezoidSpec>,
}

impl Approximant {
    pub fn new(a: IntMatrix, center: TorusPoint, radii: &[f64], eps: f64, side: Side) -> Result<Self> {
        let d = a.dim();
        for got in [center.dim(), radii.len()] {
            if got != d {
                return Err(LabError::DimensionMismatch { expected: d, got });
            }
        }
        let specs = radii
            .iter()
            .map(|&r| TrapezoidSpec::new(r, eps, side))
            .collect::<Result<Vec<_>>>()?;
        Ok(Approximant {
            lattice: Overlattice::new(a)?,
            center,
            specs,
        })
    }

    pub fn dim(&self) -> usize {
        self.specs.len()
    }

    pub fn lattice(&self) -> &Overlattice {
        &self.lattice
    }

    pub fn center(&self) -> &TorusPoint {
        &self.center
    }

    pub fn specs(&self) -> &[TrapezoidSpec] {
        &self.specs
    }

    pub fn side(&self) -> Side {
        self.specs[0].side
    }

    /// `ĥ(0) = ψ·(1 ± ε/2)ᵈ`.
    pub fn mean(&self) -> f64 {
        self.specs.iter().map(|s| s.plateau() + s.support()).product()
    }

    /// Coefficient at `k = Aᵀk′` given `k′` directly.
    pub fn fourier_dual(&self, k_prime: &[BigInt]) -> Complex64 {
        let mut amp = 1.0;
        for (spec, kp) in self.specs.iter().zip(k_prime) {
            let kf: f64 = num_traits::ToPrimitive::to_f64(kp).unwrap_or(f64::INFINITY);
            amp *= trapezoid_fourier_1d(spec, kf);
            if amp == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
        }
        if k_prime.iter().all(|k| k.is_zero()) {
            return Complex64::new(amp, 0.0);
        }
        e(-self.center.phase(k_prime)) * amp
    }

    /// `ĥ±(k)`; zero off `AᵀZᵈ`.
    pub fn fourier(&self, k: &[BigInt]) -> Result<Complex64> {
        match self.lattice.dual_coordinates(k)? {
            None => Ok(Complex64::new(0.0, 0.0)),
            Some(kp) => Ok(self.fourier_dual(&kp)),
        }
    }
}

/// `ĥ±(k)` for the approximant of `A⁻¹(y + ℛ(r))`.
pub fn h_fourier(
    a: &IntMatrix,
    y: &TorusPoint,
    radii: &[f64],
    eps: f64,
    side: Side,
    k: &[BigInt],
) -> Result<Complex64> {
    Approximant::new(a.clone(), y.clone(), radii, eps, side)?.fourier(k)
}

/// `ĥ±(0)` in exact arithmetic, built from the plateau and support widths.
pub fn h_fourier_zero_exact(radii: &[BigRational], eps: &BigRational, side: Side) -> BigRational {
    let one = BigRational::one();
    radii
        .iter()
        .map(|r| {
            let (p, s) = match side {
                Side::Upper => (r.clone(), r * (&one + eps)),
                Side::Lower => ((&one - eps) * r, r.clone()),
            };
            p + s
        })
        .product()
}

/// `ψ·(1 ± ε/2)ᵈ` in exact arithmetic.
pub fn psi_times_ramp_factor(radii: &[BigRational], eps: &BigRational, side: Side) -> BigRational {
    let two = BigRational::from_integer(BigInt::from(2));
    let psi: BigRational = radii.iter().map(|r| &two * r).product();
    let half = eps / &two;
    let factor = match side {
        Side::Upper => BigRational::one() + half,
        Side::Lower => BigRational::one() - half,
    };
    let mut out = psi;
    for _ in 0..radii.len() {
        out *= &factor;
    }
    out
}

/// Outcome of [`fourier_l1_check`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct L1Check {
    /// `Σ_{|k′|_∞ ≤ T} |ĥ(Aᵀk′)|`.
    pub sum: f64,
    /// `2^{2d} + ε^{−d/2}`.
    pub reference: f64,
    /// Bound on the omitted terms.
    pub tail_bound: f64,
}

impl L1Check {
    pub fn ratio(&self) -> f64 {
        self.sum / self.reference
    }
}

/// Smallest admissible truncation `T = ⌈4/(√ε·min rᵢ)⌉`.
pub fn min_truncation(radii: &[f64], eps: f64) -> u64 {
    let rmin = radii.iter().cloned().fold(f64::INFINITY, f64::min);
    (4.0 / (eps.sqrt() * rmin)).ceil() as u64
}

/// Truncated `Σ_k |ĥ±(k)|`. Only `k ∈ AᵀZᵈ` contribute, and `|ĥ(Aᵀk′)|`
/// factors over the coordinates of `k′`, so the sum is a product of
/// one-dimensional sums.
pub fn fourier_l1_check(a: &IntMatrix, radii: &[f64], eps: f64, side: Side, truncation: u64) -> Result<L1Check> {
    let d = a.dim();
    if radii.len() != d {
        return Err(LabError::DimensionMismatch {
            expected: d,
            got: radii.len(),
        });
    }
    if a.determinant().is_zero() {
        return Err(LabError::SingularMatrix);
    }
    let need = min_truncation(radii, eps);
    if truncation < need {
        return Err(LabError::invalid(
            "truncation",
            format!("truncation must be at least {need}"),
        ));
    }
    let pi2 = std::f64::consts::PI.powi(2);
    let mut sum = 1.0;
    let mut full_upper = 1.0;
    for &r in radii {
        let spec = TrapezoidSpec::new(r, eps, side)?;
        let mut s = trapezoid_fourier_1d(&spec, 0.0).abs();
        for j in 1..=truncation {
            s += 2.0 * trapezoid_fourier_1d(&spec, j as f64).abs();
        }
        // Σ_{j>T} 2/(π²j²rε) ≤ 2/(π²Trε)
        let tail = 2.0 / (pi2 * truncation as f64 * r * eps);
        sum *= s;
        full_upper *= s + tail;
    }
    Ok(L1Check {
        sum,
        reference: 4f64.powi(d as i32) + eps.powf(-(d as f64) / 2.0),
        tail_bound: full_upper - sum,
    })
}

/// The two ε(n) schedules.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ApproxParams {
    /// `ε(n) = min{1, Ψ(n)^{−(1−ξ)}}`.
    Expectation { xi: f64 },
    /// `ε(n) = min{1, Ψ_a(n)^{−δ}}` with `Ψ_a(n) = Σ_{a ≤ k ≤ n} ψ(k)`.
    Overlap { delta: f64, start: usize },
}

impl ApproxParams {
    pub const DEFAULT_XI: f64 = 0.1;

    pub fn expectation_default() -> Self {
        ApproxParams::Expectation { xi: Self::DEFAULT_XI }
    }

    /// `δ = 2/(d+1)`, summing from `a = 1`.
    pub fn overlap_default(dim: usize) -> Self {
        ApproxParams::Overlap {
            delta: 2.0 / (dim as f64 + 1.0),
            start: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ApproxParams::Expectation { xi } if !(xi > 0.0 && xi <= 1.0) => {
                Err(LabError::invalid("xi", "xi must lie in (0, 1]"))
            }
            ApproxParams::Overlap { delta, .. } if !(delta > 0.0 && delta <= 1.0) => {
                Err(LabError::invalid("delta", "delta must lie in (0, 1]"))
            }
            ApproxParams::Overlap { start: 0, .. } => Err(LabError::invalid("start", "start index is 1-based")),
            _ => Ok(()),
        }
    }

    fn exponent(&self) -> f64 {
        match *self {
            ApproxParams::Expectation { xi } => 1.0 - xi,
            ApproxParams::Overlap { delta, .. } => delta,
        }
    }

    /// `ε` from an already accumulated `Ψ`.
    pub fn epsilon_from_cumulative(&self, cumulative: f64) -> f64 {
        if cumulative <= 1.0 {
            1.0
        } else {
            cumulative.powf(-self.exponent()).min(1.0)
        }
    }
}

/// `ε(n)` for `n = 1, …, len(psi)`, where `psi[n−1] = ψ(n)`.
pub fn epsilon_schedule(params: &ApproxParams, psi: &[f64]) -> Result<Vec<f64>> {
    params.validate()?;
    if psi.iter().any(|&p| !(p > 0.0)) {
        return Err(LabError::invalid("psi", "psi values must be positive"));
    }
    let start = match *params {
        ApproxParams::Expectation { .. } => 1,
        ApproxParams::Overlap { start, .. } => start,
    };
    let mut acc = 0.0;
    Ok(psi
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            if i + 1 >= start {
                acc += p;
            }
            params.epsilon_from_cumulative(acc)
        })
        .collect())
}
