use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{LabError, Result};
use crate::linalg::MatrixSequence;
use crate::measures::MeasureModel;
use crate::orbit::{OrbitStream, TorusPoint};
use crate::trig::e;

const SMALL_FREQUENCY: i64 = 1 << 20;

/// `(1/N) Σ_{n ≤ N} e(−⟨k, A_n x⟩)`. Conjugating `k` conjugates the result
/// exactly.
pub fn weyl_sum(x: &TorusPoint, seq: &MatrixSequence, k: &[BigInt], count: usize) -> Result<Complex64> {
    if k.len() != seq.dim() {
        return Err(LabError::DimensionMismatch {
            expected: seq.dim(),
            got: k.len(),
        });
    }
    if k.iter().all(|v| v.is_zero()) {
        return Err(LabError::invalid("k", "frequency must be nonzero"));
    }
    if count == 0 {
        return Err(LabError::invalid("N", "N must be at least 1"));
    }
    let small: Option<Vec<f64>> = k
        .iter()
        .map(|v| v.to_i64().filter(|v| v.abs() < SMALL_FREQUENCY).map(|v| v as f64))
        .collect();
    let mut stream = OrbitStream::new(x.clone(), seq, count)?;
    let mut acc = Complex64::new(0.0, 0.0);
    while let Some(p) = stream.advance() {
        let phase = match &small {
            Some(kf) => kf.iter().enumerate().map(|(i, ki)| ki * p.approx(i)).sum(),
            None => p.signed_phase(k),
        };
        acc += e(-phase);
    }
    Ok(acc / count as f64)
}

/// `(1/N³) Σ_{m,n ≤ N} μ̂((A_n − A_m)ᵀk)`, split as the diagonal `1/N²`
/// plus twice the real part of the strict upper triangle.
pub fn del_series_term(m: &MeasureModel, seq: &MatrixSequence, k: &[BigInt], count: usize) -> Result<f64> {
    if k.len() != seq.dim() || m.dim() != seq.dim() {
        return Err(LabError::DimensionMismatch {
            expected: seq.dim(),
            got: if k.len() != seq.dim() { k.len() } else { m.dim() },
        });
    }
    if k.iter().all(|v| v.is_zero()) {
        return Err(LabError::invalid("k", "frequency must be nonzero"));
    }
    if count == 0 {
        return Err(LabError::invalid("N", "N must be at least 1"));
    }
    let vs: Vec<Vec<BigInt>> = seq.matrices(count)?.iter().map(|a| a.transpose().mul_vec(k)).collect();
    let upper: f64 = (1..count)
        .into_par_iter()
        .map(|j| {
            let mut row = 0.0;
            for i in 0..j {
                let diff: Vec<BigInt> = vs[j].iter().zip(&vs[i]).map(|(a, b)| a - b).collect();
                row += m.fourier_int(&diff).expect("dimension checked").re;
            }
            row
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    let n = count as f64;
    Ok(1.0 / (n * n) + 2.0 * upper / (n * n * n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::IntMatrix;
    use crate::measures::sample_rng;
    use crate::oracle::ternary_shift_weyl;
    use num_bigint::BigInt;
    use rand::{Rng, SeedableRng};

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn zero_point_gives_one() {
        let seq = MatrixSequence::power(IntMatrix::from_i64([[2, 1], [0, 2]])).unwrap();
        let s = weyl_sum(&TorusPoint::zero(2), &seq, &big(&[1, 1]), 100).unwrap();
        assert_eq!(s, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn zero_frequency_rejected() {
        let seq = MatrixSequence::power(IntMatrix::from_i64([[2]])).unwrap();
        assert!(weyl_sum(&TorusPoint::zero(1), &seq, &big(&[0]), 10).is_err());
    }

    #[test]
    fn conjugation_is_exact() {
        let seq = MatrixSequence::power(IntMatrix::from_i64([[2, 1], [1, 3]])).unwrap();
        let m = MeasureModel::lebesgue(2);
        let x = m.sample(&mut sample_rng(3, 0), 300);
        for k in [[1i64, 0], [2, -3], [1 << 30, 5]] {
            let a = weyl_sum(&x, &seq, &big(&k), 100).unwrap();
            let neg: Vec<i64> = k.iter().map(|v| -v).collect();
            let b = weyl_sum(&x, &seq, &big(&neg), 100).unwrap();
            assert_eq!(a.conj(), b);
        }
    }

    #[test]
    fn cantor_weyl_matches_digit_shift() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let digits: Vec<u8> = (0..700).map(|_| if rng.random::<bool>() { 2 } else { 0 }).collect();
        let mut num = BigInt::zero();
        for &dg in &digits {
            num = num * 3 + dg;
        }
        let x = TorusPoint::new(vec![num], BigInt::from(3).pow(digits.len() as u32)).unwrap();
        let seq = MatrixSequence::power(IntMatrix::from_i64([[3]])).unwrap();
        let ours = weyl_sum(&x, &seq, &big(&[1]), 600).unwrap();
        let oracle = ternary_shift_weyl(&digits, 600);
        assert!((ours - oracle).norm() < 1e-10, "{ours} vs {oracle}");
    }

    #[test]
    fn del_term_examples() {
        let seq = MatrixSequence::power(IntMatrix::from_i64([[2, 1], [0, 2]])).unwrap();
        let leb = MeasureModel::lebesgue(2);
        for n in [1usize, 7, 64] {
            let v = del_series_term(&leb, &seq, &big(&[1, 0]), n).unwrap();
            assert!((v - 1.0 / (n * n) as f64).abs() <= 1e-15);
        }
        let three = MatrixSequence::power(IntMatrix::from_i64([[3]])).unwrap();
        let c = del_series_term(&MeasureModel::cantor(1), &three, &big(&[1]), 1).unwrap();
        assert_eq!(c, 1.0);
    }
}
