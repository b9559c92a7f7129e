//! Probability measures on `[0,1)ᵈ` with exact samplers and Fourier
//! transforms `μ̂(t) = ∫ e(−⟨t,x⟩) dμ(x)`.
//!
//! All three models are product measures, so transforms factor over
//! coordinates:
//!
//! * Lebesgue: `e^{−πit} sinc(t)`;
//! * smooth density `1 − cos 2πx`: `B(t) − ½B(t−1) − ½B(t+1)` with `B` the
//!   Lebesgue factor;
//! * middle-third Cantor: `Π_{k≥1} e(−t/3ᵏ) cos(2πt/3ᵏ)`.

use num_bigint::{BigInt, BigUint, Sign};
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

use crate::error::{LabError, Result};
use crate::orbit::TorusPoint;
use crate::trig::{cos_pi, e, sin_pi, sinc};

/// Extra Cantor factors kept past `⌈log₃|t|⌉`.
pub const CANTOR_GUARD_FACTORS: usize = 40;

/// Values below this are treated as zero by [`decay_fit`].
pub const DEGENERATE_FLOOR: f64 = 1e-15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MeasureKind {
    Lebesgue,
    Smooth,
    Cantor,
}

impl MeasureKind {
    pub fn name(self) -> &'static str {
        match self {
            MeasureKind::Lebesgue => "lebesgue",
            MeasureKind::Smooth => "smooth",
            MeasureKind::Cantor => "cantor",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "lebesgue" => Some(MeasureKind::Lebesgue),
            "smooth" => Some(MeasureKind::Smooth),
            "cantor" => Some(MeasureKind::Cantor),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecayClass {
    Polylog,
    Polynomial,
    None,
}

/// Claimed decay `|μ̂(t)| ≪ g(|t|_∞)^{−s}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayClaim {
    pub class: DecayClass,
    pub exponent: Option<f64>,
}

/// A product measure on `[0,1)ᵈ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasureModel {
    kind: MeasureKind,
    dim: usize,
}

impl MeasureModel {
    pub fn new(kind: MeasureKind, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(LabError::invalid("dim", "dimension must be at least 1"));
        }
        Ok(MeasureModel { kind, dim })
    }

    pub fn lebesgue(dim: usize) -> Self {
        Self::new(MeasureKind::Lebesgue, dim).expect("dim >= 1")
    }

    /// Density `Π (1 − cos 2πxᵢ)`.
    pub fn smooth(dim: usize) -> Self {
        Self::new(MeasureKind::Smooth, dim).expect("dim >= 1")
    }

    pub fn cantor(dim: usize) -> Self {
        Self::new(MeasureKind::Cantor, dim).expect("dim >= 1")
    }

    pub fn kind(&self) -> MeasureKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn decay_claim(&self) -> DecayClaim {
        match self.kind {
            MeasureKind::Lebesgue => DecayClaim {
                class: DecayClass::Polynomial,
                exponent: Some(1.0),
            },
            MeasureKind::Smooth => DecayClaim {
                class: DecayClass::Polynomial,
                exponent: Some(3.0),
            },
            MeasureKind::Cantor => DecayClaim {
                class: DecayClass::None,
                exponent: None,
            },
        }
    }

    /// Density with respect to Lebesgue measure, if absolutely continuous.
    pub fn density(&self, x: &[f64]) -> Option<f64> {
        match self.kind {
            MeasureKind::Lebesgue => Some(1.0),
            MeasureKind::Smooth => Some(x.iter().map(|&xi| 1.0 - cos_pi(2.0 * xi)).product()),
            MeasureKind::Cantor => None,
        }
    }

    /// One-dimensional density factor.
    pub fn density_1d(&self, x: f64) -> Option<f64> {
        match self.kind {
            MeasureKind::Lebesgue => Some(1.0),
            MeasureKind::Smooth => Some(1.0 - cos_pi(2.0 * x)),
            MeasureKind::Cantor => None,
        }
    }

    /// Nonzero values of the one-dimensional transform at integers, when
    /// there are finitely many.
    pub fn integer_fourier_support(&self) -> Option<Vec<(i64, f64)>> {
        match self.kind {
            MeasureKind::Lebesgue => Some(vec![(0, 1.0)]),
            MeasureKind::Smooth => Some(vec![(-1, -0.5), (0, 1.0), (1, -0.5)]),
            MeasureKind::Cantor => None,
        }
    }

    pub fn fourier_1d(&self, t: f64) -> Complex64 {
        match self.kind {
            MeasureKind::Lebesgue => lebesgue_1d(t),
            MeasureKind::Smooth => lebesgue_1d(t) - 0.5 * lebesgue_1d(t - 1.0) - 0.5 * lebesgue_1d(t + 1.0),
            MeasureKind::Cantor => cantor_1d(t),
        }
    }

    /// `μ̂(t)`.
    pub fn fourier(&self, t: &[f64]) -> Result<Complex64> {
        self.check_dim(t.len())?;
        Ok(t.iter().map(|&ti| self.fourier_1d(ti)).product())
    }

    /// One-dimensional transform at an integer of any size.
    pub fn fourier_int_1d(&self, k: &BigInt) -> Complex64 {
        match self.kind {
            MeasureKind::Lebesgue | MeasureKind::Smooth => {
                let support = self.integer_fourier_support().unwrap();
                let v = k
                    .to_i64()
                    .and_then(|k| support.iter().find(|(j, _)| *j == k).map(|&(_, v)| v))
                    .unwrap_or(0.0);
                Complex64::new(v, 0.0)
            }
            MeasureKind::Cantor => cantor_int_1d(k),
        }
    }

    /// `μ̂(k)` at an integer vector; exact zeros where the transform vanishes.
    pub fn fourier_int(&self, k: &[BigInt]) -> Result<Complex64> {
        self.check_dim(k.len())?;
        Ok(k.iter().map(|ki| self.fourier_int_1d(ki)).product())
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.dim {
            return Err(LabError::DimensionMismatch {
                expected: self.dim,
                got,
            });
        }
        Ok(())
    }

    /// Draw a point with coordinates on a common grid of at least `bits`
    /// binary digits of resolution.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, bits: u64) -> TorusPoint {
        let bits = bits.max(1);
        match self.kind {
            MeasureKind::Lebesgue => {
                let den = BigInt::one() << bits;
                let nums = (0..self.dim).map(|_| random_bits(rng, bits)).collect();
                TorusPoint::new(nums, den).expect("valid dyadic point")
            }
            MeasureKind::Smooth => {
                let den = BigInt::one() << bits;
                let nums = (0..self.dim).map(|_| smooth_numerator(rng, bits)).collect();
                TorusPoint::new(nums, den).expect("valid dyadic point")
            }
            MeasureKind::Cantor => {
                let digits = cantor_digits_for_bits(bits);
                let den = BigInt::from(3u32).pow(digits as u32);
                let nums = (0..self.dim).map(|_| cantor_numerator(rng, digits)).collect();
                TorusPoint::new(nums, den).expect("valid triadic point")
            }
        }
    }
}

fn lebesgue_1d(t: f64) -> Complex64 {
    // e^{−πit} sinc(t)
    let s = sinc(t);
    if s == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    Complex64::new(cos_pi(t), -sin_pi(t)) * s
}

fn cantor_1d(t: f64) -> Complex64 {
    let a = t.abs();
    let levels = if a <= 1.0 {
        0
    } else {
        (a.ln() / 3f64.ln()).ceil() as usize
    } + CANTOR_GUARD_FACTORS;
    let mut prod = 1.0;
    let mut scale = 1.0;
    for _ in 0..levels {
        scale /= 3.0;
        prod *= cos_pi(2.0 * t * scale);
    }
    // Π e(−t/3ᵏ) = e(−t/2) for the full product.
    e(-t / 2.0) * prod
}

fn cantor_int_1d(k: &BigInt) -> Complex64 {
    if k.is_zero() {
        return Complex64::new(1.0, 0.0);
    }
    // factor k: cos(2π (|k| mod 3ᵏ)/3ᵏ), evaluated from the trailing base-3
    // digits of |k|; 40 digits resolve the phase to 3⁻⁴⁰.
    let mut digits = Vec::new();
    let mut m = k.abs();
    let three = BigInt::from(3u32);
    let chunk = BigInt::from(3u64.pow(39));
    while !m.is_zero() {
        let (q, mut r) = m.div_rem(&chunk);
        for _ in 0..39 {
            let (rq, rr) = r.div_rem(&three);
            digits.push(rr.to_u8().unwrap());
            r = rq;
        }
        m = q;
    }
    while digits.last() == Some(&0) {
        digits.pop();
    }
    let total = digits.len() + CANTOR_GUARD_FACTORS;
    let mut prod = 1.0;
    for level in 1..=total {
        let lo = level.saturating_sub(CANTOR_GUARD_FACTORS);
        let f: f64 = (lo..level.min(digits.len()))
            .map(|j| digits[j] as f64 * 3f64.powi(j as i32 - level as i32))
            .sum();
        prod *= cos_pi(2.0 * f);
        if prod == 0.0 {
            break;
        }
    }
    // e(−k/2) = (−1)^k
    let sign = if k.is_odd() { -1.0 } else { 1.0 };
    Complex64::new(sign * prod, 0.0)
}

fn random_bits<R: Rng + ?Sized>(rng: &mut R, bits: u64) -> BigInt {
    let words = bits.div_ceil(32) as usize;
    let mut v: Vec<u32> = (0..words).map(|_| rng.next_u32()).collect();
    let extra = (words as u64 * 32 - bits) as u32;
    if extra > 0 {
        if let Some(top) = v.last_mut() {
            *top >>= extra;
        }
    }
    BigInt::from_biguint(Sign::Plus, BigUint::new(v))
}

/// CDF of the density `1 − cos 2πx` on `[0, 1/2]`, with a series near 0.
fn smooth_cdf_low(x: f64) -> f64 {
    if x < 0.02 {
        let y = 2.0 * PI * x;
        // x − sin(y)/(2π) = (y³/6 − y⁵/120 + y⁷/5040 − …)/(2π)
        let y2 = y * y;
        y * y2 / (2.0 * PI) * (1.0 / 6.0 - y2 / 120.0 + y2 * y2 / 5040.0 - y2 * y2 * y2 / 362_880.0)
    } else {
        x - sin_pi(2.0 * x) / (2.0 * PI)
    }
}

fn smooth_inverse_cdf(u: f64) -> f64 {
    let (target, flip) = if u <= 0.5 { (u, false) } else { (1.0 - u, true) };
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if smooth_cdf_low(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x = 0.5 * (lo + hi);
    if flip {
        1.0 - x
    } else {
        x
    }
}

fn smooth_numerator<R: Rng + ?Sized>(rng: &mut R, bits: u64) -> BigInt {
    let x = smooth_inverse_cdf(rng.random::<f64>());
    let head_bits = bits.min(53);
    let scale = (head_bits as f64).exp2();
    let head = ((x * scale).floor() as u64).min((1u64 << head_bits) - 1);
    let mut num = BigInt::from(head);
    if bits > head_bits {
        num = (num << (bits - head_bits)) + random_bits(rng, bits - head_bits);
    }
    num
}

/// Ternary digits needed to match `bits` binary digits of resolution.
pub fn cantor_digits_for_bits(bits: u64) -> u64 {
    ((bits as f64) * 2f64.ln() / 3f64.ln()).ceil() as u64
}

fn cantor_numerator<R: Rng + ?Sized>(rng: &mut R, digits: u64) -> BigInt {
    // blocks of 39 ternary digits fit in u64
    let mut num = BigInt::zero();
    let mut left = digits;
    while left > 0 {
        let take = left.min(39);
        let mut block: u64 = 0;
        let mut bitsrc = rng.next_u64();
        for _ in 0..take {
            block = block * 3 + 2 * (bitsrc & 1);
            bitsrc >>= 1;
        }
        num = num * BigInt::from(3u64.pow(take as u32)) + block;
        left -= take;
    }
    num
}

/// Seed for sample `id` derived from a master seed (SplitMix64 finalizer).
pub fn derive_seed(master: u64, id: u64) -> u64 {
    let mut z = master ^ id.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic generator for sample `id`.
pub fn sample_rng(master: u64, id: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, id))
}

/// Monte Carlo estimate of `μ̂(t)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmpiricalFourier {
    pub estimate: Complex64,
    /// 95% confidence radius `2/√M`.
    pub radius: f64,
}

/// `(1/M) Σ e(−⟨t, xⱼ⟩)` over `M` samples drawn from `m`.
pub fn empirical_fourier(m: &MeasureModel, t: &[f64], samples: usize, seed: u64) -> Result<EmpiricalFourier> {
    m.check_dim(t.len())?;
    if samples < 100 {
        return Err(LabError::invalid("samples", "at least 100 samples are required"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = Complex64::new(0.0, 0.0);
    for _ in 0..samples {
        let x = m.sample(&mut rng, 64).to_f64();
        let phase: f64 = t.iter().zip(&x).map(|(a, b)| a * b).sum();
        acc += e(-phase);
    }
    Ok(EmpiricalFourier {
        estimate: acc / samples as f64,
        radius: 2.0 / (samples as f64).sqrt(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecayModel {
    /// `log|μ̂|` against `log log|t|`.
    Polylog,
    /// `log|μ̂|` against `log|t|`.
    Polynomial,
}

impl DecayModel {
    pub fn name(self) -> &'static str {
        match self {
            DecayModel::Polylog => "polylog",
            DecayModel::Polynomial => "polynomial",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub model: DecayModel,
    pub n_points: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DecayOutcome {
    Fit(DecayFit),
    /// Every value fell below [`DEGENERATE_FLOOR`]: decay too fast to fit.
    Degenerate {
        max_value: f64,
    },
}

/// Ordinary least squares `y ≈ slope·x + intercept`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let r2 = if syy > 0.0 && sxx > 0.0 {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    } else {
        1.0
    };
    (slope, intercept, r2)
}

/// `max |μ̂(s·e₁)|` over `s ∈ [t, t(1+window)]` (16 evenly spaced points);
/// `window = 0` gives the point value.
pub fn max_local(m: &MeasureModel, t: f64, window: f64) -> f64 {
    let steps = if window > 0.0 { 16 } else { 0 };
    (0..=steps)
        .map(|j| {
            let s = if steps == 0 {
                t
            } else {
                t * (1.0 + window * j as f64 / steps as f64)
            };
            m.fourier_1d(s).norm()
        })
        .fold(0.0, f64::max)
}

/// Fit the decay of `|μ̂|` along the first coordinate axis.
pub fn decay_fit(m: &MeasureModel, t_grid: &[f64], model: DecayModel, window: f64) -> Result<DecayOutcome> {
    if t_grid.len() < 20 {
        return Err(LabError::invalid("t_grid", "at least 20 grid points are required"));
    }
    if !t_grid.windows(2).all(|w| w[0] < w[1]) {
        return Err(LabError::invalid("t_grid", "grid must be strictly increasing"));
    }
    let min_t = match model {
        DecayModel::Polylog => std::f64::consts::E,
        DecayModel::Polynomial => 0.0,
    };
    if t_grid[0] <= min_t {
        return Err(LabError::invalid(
            "t_grid",
            "grid values too small for the chosen model",
        ));
    }
    if t_grid[t_grid.len() - 1] / t_grid[0] < 1e4 {
        return Err(LabError::invalid("t_grid", "grid must span at least 4 decades"));
    }
    if !(window >= 0.0) {
        return Err(LabError::invalid("window", "window must be nonnegative"));
    }
    let values: Vec<f64> = t_grid.iter().map(|&t| max_local(m, t, window)).collect();
    let max_value = values.iter().cloned().fold(0.0, f64::max);
    let (xs, ys): (Vec<f64>, Vec<f64>) = t_grid
        .iter()
        .zip(&values)
        .filter(|(_, &v)| v >= DEGENERATE_FLOOR)
        .map(|(&t, &v)| {
            let x = match model {
                DecayModel::Polylog => t.ln().ln(),
                DecayModel::Polynomial => t.ln(),
            };
            (x, v.ln())
        })
        .unzip();
    if xs.len() < 2 {
        return Ok(DecayOutcome::Degenerate { max_value });
    }
    let (slope, intercept, r_squared) = least_squares(&xs, &ys);
    Ok(DecayOutcome::Fit(DecayFit {
        slope,
        intercept,
        r_squared,
        model,
        n_points: xs.len(),
    }))
}

/// `count` log-spaced magnitudes from `lo` to `hi`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|j| (a + (b - a) * j as f64 / (count - 1) as f64).exp())
        .collect()
}
