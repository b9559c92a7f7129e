use std::collections::BTreeMap;
use std::sync::Mutex;

use super::singular::{is_expanding, is_expanding_rational, smallest_singular_value_rational};
use super::{IntMatrix, RationalMatrix, DEFAULT_SINGULAR_TOL};
use crate::error::{LabError, Result};

/// How the matrices `A_1, A_2, …` are produced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SequenceKind {
    /// `A_n = Aⁿ`.
    Power(IntMatrix),
    /// An explicit finite list `A_1, …, A_L`.
    List(Vec<IntMatrix>),
    /// `A_1 = first`, `A_{n+1} = ratios[(n−1) mod L] · A_n`.
    Ratios { first: IntMatrix, ratios: Vec<IntMatrix> },
}

/// A sequence of nonsingular integer matrices with lazily certified gap.
#[derive(Debug)]
pub struct MatrixSequence {
    kind: SequenceKind,
    claimed_gap: Option<f64>,
    // ratio index -> certified lower endpoint of σ(A_{n+1}A_n⁻¹)
    gap_cache: Mutex<BTreeMap<usize, f64>>,
}

impl Clone for MatrixSequence {
    fn clone(&self) -> Self {
        MatrixSequence {
            kind: self.kind.clone(),
            claimed_gap: self.claimed_gap,
            gap_cache: Mutex::new(self.gap_cache.lock().unwrap().clone()),
        }
    }
}

impl PartialEq for MatrixSequence {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.claimed_gap == other.claimed_gap
    }
}

impl MatrixSequence {
    pub fn new(kind: SequenceKind) -> Result<Self> {
        let mats: Vec<&IntMatrix> = match &kind {
            SequenceKind::Power(a) => vec![a],
            SequenceKind::List(list) => list.iter().collect(),
            SequenceKind::Ratios { first, ratios } => std::iter::once(first).chain(ratios.iter()).collect(),
        };
        let Some(first) = mats.first() else {
            return Err(LabError::invalid("matrices", "sequence needs at least one matrix"));
        };
        let d = first.dim();
        for m in &mats {
            if m.dim() != d {
                return Err(LabError::DimensionMismatch {
                    expected: d,
                    got: m.dim(),
                });
            }
            if num_traits::Zero::is_zero(&m.determinant()) {
                return Err(LabError::SingularMatrix);
            }
        }
        if let SequenceKind::Ratios { ratios, .. } = &kind {
            if ratios.is_empty() {
                return Err(LabError::invalid("ratios", "ratio list must not be empty"));
            }
        }
        Ok(MatrixSequence {
            kind,
            claimed_gap: None,
            gap_cache: Mutex::new(BTreeMap::new()),
        })
    }

    pub fn power(a: IntMatrix) -> Result<Self> {
        Self::new(SequenceKind::Power(a))
    }

    pub fn list(matrices: Vec<IntMatrix>) -> Result<Self> {
        Self::new(SequenceKind::List(matrices))
    }

    pub fn ratios(first: IntMatrix, ratios: Vec<IntMatrix>) -> Result<Self> {
        Self::new(SequenceKind::Ratios { first, ratios })
    }

    pub fn with_claimed_gap(mut self, k: f64) -> Self {
        self.claimed_gap = Some(k);
        self
    }

    pub fn claimed_gap(&self) -> Option<f64> {
        self.claimed_gap
    }

    pub fn kind(&self) -> &SequenceKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            SequenceKind::Power(a) => a.dim(),
            SequenceKind::List(l) => l[0].dim(),
            SequenceKind::Ratios { first, .. } => first.dim(),
        }
    }

    /// Number of available matrices, `None` when unbounded.
    pub fn len(&self) -> Option<usize> {
        match &self.kind {
            SequenceKind::List(l) => Some(l.len()),
            _ => None,
        }
    }

    fn check_index(&self, n: usize) -> Result<()> {
        if n == 0 {
            return Err(LabError::invalid("n", "sequence indices start at 1"));
        }
        if let Some(len) = self.len() {
            if n > len {
                return Err(LabError::SequenceExhausted { index: n, len });
            }
        }
        Ok(())
    }

    /// `A_n` for `n ≥ 1`.
    pub fn matrix(&self, n: usize) -> Result<IntMatrix> {
        self.check_index(n)?;
        Ok(match &self.kind {
            SequenceKind::Power(a) => a.pow(n as u64),
            SequenceKind::List(l) => l[n - 1].clone(),
            SequenceKind::Ratios { first, ratios } => {
                let mut m = first.clone();
                for k in 1..n {
                    m = ratios[(k - 1) % ratios.len()].mul(&m);
                }
                m
            }
        })
    }

    /// `A_1, …, A_N`, built incrementally.
    pub fn matrices(&self, count: usize) -> Result<Vec<IntMatrix>> {
        if count == 0 {
            return Ok(Vec::new());
        }
        self.check_index(count)?;
        let mut out = Vec::with_capacity(count);
        match &self.kind {
            SequenceKind::Power(a) => {
                let mut m = a.clone();
                for _ in 0..count {
                    out.push(m.clone());
                    m = a.mul(&m);
                }
            }
            SequenceKind::List(l) => out.extend(l[..count].iter().cloned()),
            SequenceKind::Ratios { first, ratios } => {
                let mut m = first.clone();
                for k in 0..count {
                    out.push(m.clone());
                    m = ratios[k % ratios.len()].mul(&m);
                }
            }
        }
        Ok(out)
    }

    /// The integral ratio `A_{n+1}A_n⁻¹` when it is known to be integral
    /// without computation (power and ratio-generated sequences).
    fn structural_ratio(&self, n: usize) -> Option<&IntMatrix> {
        match &self.kind {
            SequenceKind::Power(a) => Some(a),
            SequenceKind::Ratios { ratios, .. } => Some(&ratios[(n - 1) % ratios.len()]),
            SequenceKind::List(_) => None,
        }
    }

    /// `A_{n+1}A_n⁻¹` exactly, with a flag that is true iff it is integral.
    pub fn ratio_matrix(&self, n: usize) -> Result<(RationalMatrix, bool)> {
        self.check_index(n)?;
        self.check_index(n + 1)?;
        if let Some(r) = self.structural_ratio(n) {
            return Ok((r.to_rational(), true));
        }
        let next = self.matrix(n + 1)?.to_rational();
        let inv = self.matrix(n)?.inverse_rational()?;
        let r = next.mul(&inv);
        let integral = r.is_integral();
        Ok((r, integral))
    }

    /// All ratios `A_{n+1}A_n⁻¹` for `1 ≤ n < count` if every one is integral.
    pub fn integral_ratios(&self, count: usize) -> Result<Option<Vec<IntMatrix>>> {
        let mut out = Vec::with_capacity(count.saturating_sub(1));
        for n in 1..count {
            if let Some(r) = self.structural_ratio(n) {
                out.push(r.clone());
                continue;
            }
            match self.ratio_matrix(n)?.0.to_integer() {
                Some(r) => out.push(r),
                None => return Ok(None),
            }
        }
        Ok(Some(out))
    }

    /// `A_{n+1}A_n⁻¹` as an integer matrix, or `None` if it is not integral.
    pub fn integral_ratio(&self, n: usize) -> Result<Option<IntMatrix>> {
        self.check_index(n)?;
        if let Some(r) = self.structural_ratio(n) {
            return Ok(Some(r.clone()));
        }
        Ok(self.ratio_matrix(n)?.0.to_integer())
    }

    /// True when `A_{n+1}A_n⁻¹` is integral for every `1 ≤ n < count`.
    pub fn has_integral_ratios(&self, count: usize) -> Result<bool> {
        match &self.kind {
            SequenceKind::List(_) => Ok(self.integral_ratios(count)?.is_some()),
            _ => Ok(true),
        }
    }

    /// Index at which ratio `n` repeats an earlier one, for deduplicating
    /// certification work.
    fn ratio_class(&self, n: usize) -> usize {
        match &self.kind {
            SequenceKind::Power(_) => 1,
            SequenceKind::Ratios { ratios, .. } => (n - 1) % ratios.len() + 1,
            SequenceKind::List(_) => n,
        }
    }

    fn certified_ratio_gap(&self, n: usize) -> Result<f64> {
        let class = self.ratio_class(n);
        if let Some(&g) = self.gap_cache.lock().unwrap().get(&class) {
            return Ok(g);
        }
        let (r, _) = self.ratio_matrix(class)?;
        if !is_expanding_rational(&r) {
            return Err(LabError::GapViolation { index: n });
        }
        let lower = smallest_singular_value_rational(&r, DEFAULT_SINGULAR_TOL).lower;
        self.gap_cache.lock().unwrap().insert(class, lower);
        Ok(lower)
    }

    /// Certified prefix gap: the minimum over `1 ≤ n < count` of the lower
    /// endpoint of `σ(A_{n+1}A_n⁻¹)`. Fails on the first non-expanding ratio.
    ///
    /// With fewer than two matrices there is no ratio and the result is `+∞`.
    pub fn gap_constant(&self, count: usize) -> Result<f64> {
        let mut k = f64::INFINITY;
        let mut seen = std::collections::BTreeSet::new();
        for n in 1..count {
            let class = self.ratio_class(n);
            if !seen.insert(class) {
                continue;
            }
            k = k.min(self.certified_ratio_gap(n)?);
        }
        Ok(k)
    }

    /// Checks that `A_1, …, A_count` are expanding and returns the prefix gap.
    ///
    /// For power and ratio-generated sequences it suffices that `A_1` and the
    /// ratios expand, since `σ(RA) ≥ σ(R)σ(A)`.
    pub fn validate_prefix(&self, count: usize) -> Result<f64> {
        let k = self.gap_constant(count)?;
        match &self.kind {
            SequenceKind::List(l) => {
                for (i, m) in l.iter().take(count).enumerate() {
                    if !is_expanding(m) {
                        return Err(LabError::invalid("matrices", format!("A_{} is not expanding", i + 1)));
                    }
                }
            }
            SequenceKind::Power(a) | SequenceKind::Ratios { first: a, .. } => {
                if !is_expanding(a) {
                    return Err(LabError::invalid("base", "A_1 is not expanding"));
                }
            }
        }
        Ok(k)
    }
}
