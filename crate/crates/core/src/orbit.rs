//! Exact orbits `A_n x mod 1`, shrinking-target hits, and the counting
//! function `R(x, N)`.
//!
//! Points are stored with a common denominator. On the fast path every step
//! multiplies by an integral ratio matrix and reduces, which keeps the
//! denominator fixed: `A_{n+1}x ≡ (A_{n+1}A_n⁻¹)(A_n x mod 1) (mod 1)`.

use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{LabError, Result};
use crate::linalg::{IntMatrix, MatrixSequence};

/// Upper cap applied to regularized radii, just below 1/2.
pub const REGULARIZATION_CAP: f64 = 0.5 - 1.0 / 1_048_576.0;

/// A point of `[0,1)ᵈ` with exact rational coordinates `nums[i] / den`.
#[derive(Clone, Debug)]
pub struct TorusPoint {
    nums: Vec<BigInt>,
    den: BigInt,
}

impl TorusPoint {
    pub fn new(nums: Vec<BigInt>, den: BigInt) -> Result<Self> {
        if !den.is_positive() {
            return Err(LabError::invalid("den", "denominator must be positive"));
        }
        if nums.is_empty() {
            return Err(LabError::invalid("coords", "dimension must be at least 1"));
        }
        if nums.iter().any(|n| n.is_negative() || *n >= den) {
            return Err(LabError::invalid("coords", "coordinates must lie in [0, 1)"));
        }
        Ok(TorusPoint { nums, den })
    }

    pub fn zero(dim: usize) -> Self {
        TorusPoint {
            nums: vec![BigInt::zero(); dim],
            den: BigInt::one(),
        }
    }

    /// Build from rationals already in `[0,1)`.
    pub fn from_rationals(coords: &[BigRational]) -> Result<Self> {
        let den = coords.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
        let nums = coords.iter().map(|q| q.numer() * (&den / q.denom())).collect();
        Self::new(nums, den)
    }

    /// Convenience constructor from small fractions `(num, den)`.
    pub fn from_fractions(coords: &[(i64, i64)]) -> Result<Self> {
        let qs: Vec<BigRational> = coords
            .iter()
            .map(|&(n, d)| BigRational::new(BigInt::from(n), BigInt::from(d)))
            .collect();
        Self::from_rationals(&qs)
    }

    pub fn dim(&self) -> usize {
        self.nums.len()
    }

    pub fn numerators(&self) -> &[BigInt] {
        &self.nums
    }

    pub fn denominator(&self) -> &BigInt {
        &self.den
    }

    pub fn coord(&self, i: usize) -> BigRational {
        BigRational::new(self.nums[i].clone(), self.den.clone())
    }

    /// Coordinates in lowest terms.
    pub fn coords(&self) -> Vec<BigRational> {
        (0..self.dim()).map(|i| self.coord(i)).collect()
    }

    /// Coordinate `i` as `f64`, accurate to about 2⁻⁶⁰ for any denominator.
    pub fn approx(&self, i: usize) -> f64 {
        ratio_f64(&self.nums[i], &self.den)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.approx(i)).collect()
    }

    /// `⟨k, x⟩ mod 1` as `f64`, computed exactly before rounding.
    pub fn phase(&self, k: &[BigInt]) -> f64 {
        let dot: BigInt = k.iter().zip(&self.nums).map(|(a, b)| a * b).sum();
        ratio_f64(&dot.mod_floor(&self.den), &self.den)
    }

    /// `⟨k, x⟩` reduced into `[−1/2, 1/2]`; negating `k` negates the result
    /// exactly.
    pub fn signed_phase(&self, k: &[BigInt]) -> f64 {
        let dot: BigInt = k.iter().zip(&self.nums).map(|(a, b)| a * b).sum();
        let m = dot.mod_floor(&self.den);
        let twice: BigInt = &m << 1u32;
        if twice > self.den {
            -ratio_f64(&(&self.den - &m), &self.den)
        } else if twice == self.den {
            0.5
        } else {
            ratio_f64(&m, &self.den)
        }
    }
}

impl PartialEq for TorusPoint {
    fn eq(&self, other: &Self) -> bool {
        self.dim() == other.dim()
            && self
                .nums
                .iter()
                .zip(&other.nums)
                .all(|(a, b)| a * &other.den == b * &self.den)
    }
}

impl Eq for TorusPoint {}

impl fmt::Display for TorusPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords().iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// `⌊|x| / 2^shift⌋` as `f64`, reading only the limbs that matter.
fn top_f64(x: &BigInt, shift: u64) -> f64 {
    let skip = (shift / 64) as usize;
    let rem = (shift % 64) as i32;
    x.magnitude()
        .iter_u64_digits()
        .skip(skip)
        .take(3)
        .enumerate()
        .map(|(j, limb)| limb as f64 * 2f64.powi(64 * j as i32 - rem))
        .sum()
}

/// `num/den` as `f64` for `0 ≤ num < den` of any size.
pub(crate) fn ratio_f64(num: &BigInt, den: &BigInt) -> f64 {
    let shift = den.bits().saturating_sub(120);
    top_f64(num, shift) / top_f64(den, shift)
}

/// Componentwise fractional part, exact.
pub fn reduce_mod1(v: &[BigRational]) -> Result<TorusPoint> {
    let fracs: Vec<BigRational> = v.iter().map(|q| q - q.floor()).collect();
    TorusPoint::from_rationals(&fracs)
}

/// Reduce `v` into `[0, den)`. When `|v| < bound·den` for a small `bound`,
/// repeated add/subtract is cheaper than a long division.
#[inline]
fn reduce_into(v: &mut BigInt, den: &BigInt, small_bound: bool) {
    if small_bound {
        while v.sign() == Sign::Minus {
            *v += den;
        }
        while &*v >= den {
            *v -= den;
        }
    } else {
        *v = v.mod_floor(den);
    }
}

fn apply_integer_matrix(m: &IntMatrix, nums: &[BigInt], den: &BigInt) -> Vec<BigInt> {
    let d = m.dim();
    (0..d)
        .map(|i| {
            let row_sum = m.row_abs_sum(i);
            let small = row_sum <= BigInt::from(16);
            let mut acc = BigInt::zero();
            for (a, x) in m.row(i).iter().zip(nums) {
                if a.is_zero() {
                    continue;
                }
                if a.is_one() {
                    acc += x;
                } else {
                    acc += a * x;
                }
            }
            reduce_into(&mut acc, den, small);
            acc
        })
        .collect()
}

/// Radii schedules `n ↦ (r₁(n), …, r_d(n))`.
#[derive(Clone, Debug, PartialEq)]
pub enum Radii {
    /// Fixed per-coordinate radii.
    Constant(Vec<f64>),
    /// `rᵢ(n) = c·n^exponent` in every coordinate.
    Power { c: f64, exponent: f64 },
    /// `rᵢ(n) = c·e^{−rate·n}` in every coordinate.
    Exponential { c: f64, rate: f64 },
    /// Row `n−1` gives the radii at `n`; the last row repeats.
    Table(Vec<Vec<f64>>),
}

impl Radii {
    fn raw(&self, n: usize, dim: usize) -> Vec<f64> {
        let nf = n as f64;
        match self {
            Radii::Constant(v) => v.clone(),
            Radii::Power { c, exponent } => vec![c * nf.powf(*exponent); dim],
            Radii::Exponential { c, rate } => vec![c * (-rate * nf).exp(); dim],
            Radii::Table(rows) => rows[(n - 1).min(rows.len() - 1)].clone(),
        }
    }

    /// Returns a copy with every radius multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Radii {
        match self {
            Radii::Constant(v) => Radii::Constant(v.iter().map(|r| r * factor).collect()),
            Radii::Power { c, exponent } => Radii::Power {
                c: c * factor,
                exponent: *exponent,
            },
            Radii::Exponential { c, rate } => Radii::Exponential {
                c: c * factor,
                rate: *rate,
            },
            Radii::Table(rows) => Radii::Table(rows.iter().map(|r| r.iter().map(|x| x * factor).collect()).collect()),
        }
    }
}

fn valid_radius(r: f64) -> bool {
    r > 0.0 && r <= 0.5
}

/// The target data: center `y`, radii `r(n)`, optional regularization `τ`.
#[derive(Clone, Debug, PartialEq)]
pub struct TargetSpec {
    center: TorusPoint,
    center_f64: Vec<f64>,
    radii: Radii,
    tau: Option<f64>,
}

impl TargetSpec {
    pub fn new(center: TorusPoint, radii: Radii, tau: Option<f64>) -> Result<Self> {
        let d = center.dim();
        match &radii {
            Radii::Constant(v) => {
                if v.len() != d {
                    return Err(LabError::DimensionMismatch {
                        expected: d,
                        got: v.len(),
                    });
                }
                if !v.iter().all(|&r| valid_radius(r)) {
                    return Err(LabError::invalid("radii.values", "radii must lie in (0, 1/2]"));
                }
            }
            Radii::Power { c, exponent } => {
                if !valid_radius(*c) || !(*exponent <= 0.0) {
                    return Err(LabError::invalid(
                        "radii",
                        "power radii need c in (0, 1/2] and exponent <= 0",
                    ));
                }
            }
            Radii::Exponential { c, rate } => {
                if !valid_radius(*c) || !(*rate >= 0.0) {
                    return Err(LabError::invalid(
                        "radii",
                        "exponential radii need c in (0, 1/2] and rate >= 0",
                    ));
                }
            }
            Radii::Table(rows) => {
                if rows.is_empty() {
                    return Err(LabError::invalid("radii.table", "table must not be empty"));
                }
                for row in rows {
                    if row.len() != d {
                        return Err(LabError::DimensionMismatch {
                            expected: d,
                            got: row.len(),
                        });
                    }
                    if !row.iter().all(|&r| valid_radius(r)) {
                        return Err(LabError::invalid("radii.table", "radii must lie in (0, 1/2]"));
                    }
                }
            }
        }
        if let Some(t) = tau {
            if !(t > 1.0) {
                return Err(LabError::invalid("tau", "tau must exceed 1"));
            }
        }
        let center_f64 = center.to_f64();
        Ok(TargetSpec {
            center,
            center_f64,
            radii,
            tau,
        })
    }

    pub fn constant(center: TorusPoint, radii: Vec<f64>) -> Result<Self> {
        Self::new(center, Radii::Constant(radii), None)
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn center(&self) -> &TorusPoint {
        &self.center
    }

    pub fn radii(&self) -> &Radii {
        &self.radii
    }

    pub fn tau(&self) -> Option<f64> {
        self.tau
    }

    /// `r(n)`, regularized to `min{max{rᵢ(n), n^{−τ}}, 1/2 − 2⁻²⁰}` when `τ` is set.
    pub fn radii_at(&self, n: usize) -> Vec<f64> {
        let raw = self.radii.raw(n, self.dim());
        match self.tau {
            None => raw,
            Some(tau) => {
                let floor = (n as f64).powf(-tau);
                raw.into_iter().map(|r| r.max(floor).min(REGULARIZATION_CAP)).collect()
            }
        }
    }

    /// `ψ(n) = 2ᵈ Π rᵢ(n)`.
    pub fn psi(&self, n: usize) -> f64 {
        self.radii_at(n).iter().map(|r| 2.0 * r).product()
    }

    /// Same target with radii multiplied by `factor`.
    pub fn with_scaled_radii(&self, factor: f64) -> Result<Self> {
        Self::new(self.center.clone(), self.radii.scaled(factor), self.tau)
    }

    /// Same target centered at `y`.
    pub fn with_center(&self, y: TorusPoint) -> Result<Self> {
        Self::new(y, self.radii.clone(), self.tau)
    }
}

/// Replace the radii by their `τ`-regularization.
pub fn regularize_radii(target: &TargetSpec, tau: f64) -> Result<TargetSpec> {
    TargetSpec::new(target.center.clone(), target.radii.clone(), Some(tau))
}

const HIT_MARGIN: f64 = 1e-12;

fn coord_hit(p: &TorusPoint, i: usize, y: &TorusPoint, y_f64: f64, r: f64) -> bool {
    let diff = (p.approx(i) - y_f64).abs();
    let dist = diff.min(1.0 - diff);
    if dist < r - HIT_MARGIN {
        return true;
    }
    if dist > r + HIT_MARGIN {
        return false;
    }
    // Exact: a = |p·y_den − y·p_den|, D = p_den·y_den; torus distance is
    // min(a, D − a)/D.
    let a = (&p.nums[i] * &y.den - &y.nums[i] * &p.den).abs();
    let big_d = &p.den * &y.den;
    let other = &big_d - &a;
    let m = if a < other { a } else { other };
    let r = BigRational::from_float(r).expect("finite radius");
    m * r.denom() <= r.numer() * big_d
}

/// `‖pᵢ − yᵢ‖ ≤ rᵢ` for every `i`, decided exactly (closed condition).
pub fn hit_radii(p: &TorusPoint, target: &TargetSpec, radii: &[f64]) -> bool {
    debug_assert_eq!(p.dim(), target.dim());
    (0..p.dim()).all(|i| coord_hit(p, i, &target.center, target.center_f64[i], radii[i]))
}

/// Whether `p ∈ y + ℛ(r(n)) (mod 1)`.
pub fn hit(p: &TorusPoint, target: &TargetSpec, n: usize) -> Result<bool> {
    if p.dim() != target.dim() {
        return Err(LabError::DimensionMismatch {
            expected: target.dim(),
            got: p.dim(),
        });
    }
    Ok(hit_radii(p, target, &target.radii_at(n)))
}

enum Path {
    /// Multiply by integral ratios; `first` is `A_1`.
    Fast,
    /// Multiply `x` by `A_n` directly.
    Slow(Vec<IntMatrix>),
}

/// Streams `A_n x mod 1` for `n = 1, …, N`.
pub struct OrbitStream<'a> {
    seq: &'a MatrixSequence,
    x: TorusPoint,
    path: Path,
    n: usize,
    limit: usize,
    current: Option<TorusPoint>,
}

impl<'a> OrbitStream<'a> {
    /// Uses the fast path whenever all ratios up to `limit` are integral.
    pub fn new(x: TorusPoint, seq: &'a MatrixSequence, limit: usize) -> Result<Self> {
        Self::build(x, seq, limit, false)
    }

    /// Always multiplies by `A_n` directly.
    pub fn slow(x: TorusPoint, seq: &'a MatrixSequence, limit: usize) -> Result<Self> {
        Self::build(x, seq, limit, true)
    }

    fn build(x: TorusPoint, seq: &'a MatrixSequence, limit: usize, force_slow: bool) -> Result<Self> {
        if x.dim() != seq.dim() {
            return Err(LabError::DimensionMismatch {
                expected: seq.dim(),
                got: x.dim(),
            });
        }
        if let Some(len) = seq.len() {
            if limit > len {
                return Err(LabError::SequenceExhausted { index: limit, len });
            }
        }
        let path = if !force_slow && seq.has_integral_ratios(limit)? {
            Path::Fast
        } else {
            Path::Slow(seq.matrices(limit)?)
        };
        Ok(OrbitStream {
            seq,
            x,
            path,
            n: 0,
            limit,
            current: None,
        })
    }

    pub fn is_fast(&self) -> bool {
        matches!(self.path, Path::Fast)
    }

    /// Index of the point most recently produced.
    pub fn index(&self) -> usize {
        self.n
    }

    /// Advance and borrow the next orbit point.
    pub fn advance(&mut self) -> Option<&TorusPoint> {
        if self.n >= self.limit {
            return None;
        }
        self.n += 1;
        let n = self.n;
        let den = &self.x.den;
        let nums = match (&self.path, &self.current) {
            (Path::Fast, Some(prev)) => {
                let r = self
                    .seq
                    .integral_ratio(n - 1)
                    .ok()
                    .flatten()
                    .expect("checked integral at construction");
                apply_integer_matrix(&r, &prev.nums, den)
            }
            (Path::Fast, None) => {
                let a1 = self.seq.matrix(1).expect("index 1 exists");
                apply_integer_matrix(&a1, &self.x.nums, den)
            }
            (Path::Slow(mats), _) => apply_integer_matrix(&mats[n - 1], &self.x.nums, den),
        };
        self.current = Some(TorusPoint { nums, den: den.clone() });
        self.current.as_ref()
    }
}

impl Iterator for OrbitStream<'_> {
    type Item = TorusPoint;

    fn next(&mut self) -> Option<TorusPoint> {
        self.advance().cloned()
    }
}

pub fn orbit_stream(x: &TorusPoint, seq: &MatrixSequence, count: usize) -> Result<Vec<TorusPoint>> {
    Ok(OrbitStream::new(x.clone(), seq, count)?.collect())
}

/// Outcome of [`count_hits`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HitCount {
    /// `R(x, N)`.
    pub count: u64,
    /// `trace[n−1] = R(x, n)`.
    pub trace: Vec<u32>,
    pub last_hit: Option<usize>,
}

impl HitCount {
    pub fn at(&self, n: usize) -> u32 {
        self.trace[n - 1]
    }
}

/// `R(x, N) = #{1 ≤ n ≤ N : A_n x ∈ y + ℛ(r(n)) (mod 1)}` with its prefix trace.
pub fn count_hits(x: &TorusPoint, seq: &MatrixSequence, target: &TargetSpec, count: usize) -> Result<HitCount> {
    if target.dim() != seq.dim() {
        return Err(LabError::DimensionMismatch {
            expected: seq.dim(),
            got: target.dim(),
        });
    }
    let mut stream = OrbitStream::new(x.clone(), seq, count)?;
    let mut trace = Vec::with_capacity(count);
    let mut hits = 0u32;
    let mut last_hit = None;
    while let Some(p) = stream.advance() {
        let n = trace.len() + 1;
        if hit_radii(p, target, &target.radii_at(n)) {
            hits += 1;
            last_hit = Some(n);
        }
        trace.push(hits);
    }
    Ok(HitCount {
        count: hits as u64,
        trace,
        last_hit,
    })
}

/// `ψ(n)` and the running sums `Ψ(n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PsiSeries {
    pub psi: Vec<f64>,
    pub cumulative: Vec<f64>,
}

impl PsiSeries {
    /// `Ψ(N)`.
    pub fn total(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    /// `Ψ(n)` for `n ≥ 1`.
    pub fn at(&self, n: usize) -> f64 {
        self.cumulative[n - 1]
    }
}

/// Neumaier-compensated running sum.
#[derive(Default, Clone, Copy, Debug)]
pub(crate) struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// `Ψ(N) = Σ_{n ≤ N} 2ᵈ r₁(n)⋯r_d(n)` with compensated summation.
pub fn psi_cumulative(target: &TargetSpec, count: usize) -> PsiSeries {
    let mut acc = CompensatedSum::default();
    let mut psi = Vec::with_capacity(count);
    let mut cumulative = Vec::with_capacity(count);
    for n in 1..=count {
        let v = target.psi(n);
        acc.add(v);
        psi.push(v);
        cumulative.push(acc.value());
    }
    PsiSeries { psi, cumulative }
}
