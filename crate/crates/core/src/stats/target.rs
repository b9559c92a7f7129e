use num_bigint::BigInt;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::approxfn::{fourier_l1_check, min_truncation, Approximant, Side};
use crate::error::{LabError, Result};
use crate::linalg::{IntMatrix, MatrixSequence};
use crate::measures::{sample_rng, MeasureModel};
use crate::orbit::{hit_radii, OrbitStream, TargetSpec};

/// Cap on the number of dual frequencies summed for measures whose
/// transform has infinite integer support.
const FOURIER_TERM_CAP: u64 = 4_000_000;

/// `Σ_k ĥ±(k) μ̂(−k)` with a bound on the omitted terms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FourierMeasure {
    pub value: f64,
    pub truncation_bound: f64,
    pub terms: u64,
}

/// `∫ g± dμ` for the target at step `n`, via its Fourier series.
///
/// For Lebesgue and the smooth density `μ̂` is supported on `{−1,0,1}ᵈ`, so
/// the sum is finite and exact. Otherwise the sum runs over `k = Aᵀk′` with
/// `|k′|_∞` up to the admissible truncation.
pub fn measure_of_target_fourier(
    m: &MeasureModel,
    a: &IntMatrix,
    target: &TargetSpec,
    n: usize,
    eps: f64,
    side: Side,
) -> Result<FourierMeasure> {
    let d = a.dim();
    if m.dim() != d || target.dim() != d {
        return Err(LabError::DimensionMismatch {
            expected: d,
            got: if m.dim() != d { m.dim() } else { target.dim() },
        });
    }
    let radii = target.radii_at(n);
    let h = Approximant::new(a.clone(), target.center().clone(), &radii, eps, side)?;
    let (support, truncation, tail) = match m.integer_fourier_support() {
        Some(s) => (s.iter().map(|&(k, _)| k).collect::<Vec<i64>>(), None, 0.0),
        None => {
            let t = min_truncation(&radii, eps);
            let width = 2 * t + 1;
            let count = width.checked_pow(d as u32).unwrap_or(u64::MAX);
            if count > FOURIER_TERM_CAP {
                return Err(LabError::Capacity {
                    what: "Fourier terms".into(),
                    needed: count as u128,
                    cap: FOURIER_TERM_CAP as u128,
                });
            }
            let check = fourier_l1_check(a, &radii, eps, side, t)?;
            let range: Vec<i64> = (-(t as i64)..=t as i64).collect();
            (range, Some(a.transpose()), check.tail_bound)
        }
    };
    let mut idx = vec![0usize; d];
    let mut total = Complex64::new(0.0, 0.0);
    let mut terms = 0u64;
    loop {
        let v: Vec<BigInt> = idx.iter().map(|&i| BigInt::from(support[i])).collect();
        let (k, coeff) = match &truncation {
            // v is k itself
            None => {
                let c = h.fourier(&v)?;
                (v, c)
            }
            // v is k′, k = Aᵀk′
            Some(at) => {
                let c = h.fourier_dual(&v);
                (at.mul_vec(&v), c)
            }
        };
        if coeff.norm() != 0.0 {
            let neg: Vec<BigInt> = k.iter().map(|x| -x).collect();
            total += coeff * m.fourier_int(&neg)?;
        }
        terms += 1;
        let mut i = 0;
        loop {
            if i == d {
                return Ok(FourierMeasure {
                    value: total.re,
                    truncation_bound: tail,
                    terms,
                });
            }
            idx[i] += 1;
            if idx[i] < support.len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

/// Monte Carlo estimate with a 95% confidence radius.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    /// `2√(p̂(1−p̂)/M) + 2/M`.
    pub radius: f64,
    pub hits: u64,
    pub samples: u64,
}

impl McEstimate {
    fn from_counts(hits: u64, samples: u64) -> Self {
        let m = samples as f64;
        let p = hits as f64 / m;
        McEstimate {
            estimate: p,
            radius: 2.0 * (p * (1.0 - p) / m).sqrt() + 2.0 / m,
            hits,
            samples,
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        (v - self.estimate).abs() <= self.radius
    }
}

/// Bits needed so that `A x mod 1` keeps 64 bits of resolution.
fn bits_for(a: &IntMatrix) -> u64 {
    a.max_abs_bits() + a.dim() as u64 + 64
}

/// Fraction of `M` samples `x ~ μ` with `Ax ∈ y + ℛ(r(n)) (mod 1)`.
pub fn measure_of_target_mc(
    m: &MeasureModel,
    a: &IntMatrix,
    target: &TargetSpec,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    if samples < 1000 {
        return Err(LabError::invalid("samples", "at least 1000 samples are required"));
    }
    if m.dim() != a.dim() || target.dim() != a.dim() {
        return Err(LabError::DimensionMismatch {
            expected: a.dim(),
            got: m.dim(),
        });
    }
    let seq = MatrixSequence::list(vec![a.clone()])?;
    let radii = target.radii_at(n);
    let bits = bits_for(a);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0u64;
    for _ in 0..samples {
        let x = m.sample(&mut rng, bits);
        let mut s = OrbitStream::new(x, &seq, 1)?;
        let p = s.advance().expect("one step");
        if hit_radii(p, target, &radii) {
            hits += 1;
        }
    }
    Ok(McEstimate::from_counts(hits, samples as u64))
}

/// One row of a pair-correlation table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairRow {
    pub m: usize,
    pub n: usize,
    /// Estimate of `μ(E_m ∩ E_n)`.
    pub estimate: f64,
    pub radius: f64,
    pub psi_product: f64,
    /// `estimate / (ψ(m)ψ(n))`.
    pub ratio: f64,
}

/// Monte Carlo joint-hit frequencies for the given index pairs.
pub fn pair_correlation(
    m: &MeasureModel,
    seq: &MatrixSequence,
    target: &TargetSpec,
    pairs: &[(usize, usize)],
    samples: usize,
    seed: u64,
) -> Result<Vec<PairRow>> {
    if samples < 10_000 {
        return Err(LabError::invalid("samples", "at least 10000 samples are required"));
    }
    if pairs.iter().any(|&(a, b)| a == 0 || b == 0) {
        return Err(LabError::invalid("pairs", "indices are 1-based"));
    }
    if m.dim() != seq.dim() || target.dim() != seq.dim() {
        return Err(LabError::DimensionMismatch {
            expected: seq.dim(),
            got: m.dim(),
        });
    }
    let top = pairs.iter().map(|&(a, b)| a.max(b)).max().unwrap_or(0);
    if top == 0 {
        return Ok(Vec::new());
    }
    let bits = seq.matrix(top)?.max_abs_bits() + 2 * top as u64 + 64;
    // reject an unusable sequence before spawning work
    OrbitStream::new(crate::orbit::TorusPoint::zero(seq.dim()), seq, top)?;
    let radii: Vec<Vec<f64>> = (1..=top).map(|n| target.radii_at(n)).collect();
    let counts: Vec<u64> = (0..samples as u64)
        .into_par_iter()
        .map(|id| {
            let x = m.sample(&mut sample_rng(seed, id), bits);
            let mut s = OrbitStream::new(x, seq, top).expect("validated");
            let mut hit = vec![false; top + 1];
            let mut n = 0;
            while let Some(p) = s.advance() {
                n += 1;
                hit[n] = hit_radii(p, target, &radii[n - 1]);
            }
            pairs
                .iter()
                .map(|&(a, b)| (hit[a] && hit[b]) as u64)
                .collect::<Vec<u64>>()
        })
        .reduce(
            || vec![0u64; pairs.len()],
            |mut acc, v| {
                acc.iter_mut().zip(v).for_each(|(a, b)| *a += b);
                acc
            },
        );
    Ok(pairs
        .iter()
        .zip(counts)
        .map(|(&(a, b), c)| {
            let est = McEstimate::from_counts(c, samples as u64);
            let psi_product = target.psi(a) * target.psi(b);
            PairRow {
                m: a,
                n: b,
                estimate: est.estimate,
                radius: est.radius,
                psi_product,
                ratio: est.estimate / psi_product,
            }
        })
        .collect())
}
