//! Overlattices `Γ = A⁻¹Zᵈ ⊇ Zᵈ`: coset representatives, dual membership,
//! exponential sums over `Γ/Zᵈ`, and kernel sums over discrete lattices.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{LabError, Result};
use crate::linalg::{smallest_singular_value_rational, IntMatrix, RationalMatrix, DEFAULT_SINGULAR_TOL};

/// Default cap on `|det A|` for coset enumeration.
pub const DEFAULT_ENUMERATION_CAP: u64 = 100_000;

/// Default cap on lattice points visited by [`kernel_sum`].
pub const DEFAULT_POINT_CAP: u64 = 50_000_000;

/// `Γ = A⁻¹Zᵈ` for a nonsingular integer matrix `A`.
///
/// Phases `⟨k, A⁻¹p⟩` are kept exact by working with the adjugate:
/// `A⁻¹ = adj(A)/det(A)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Overlattice {
    generator: IntMatrix,
    det: BigInt,
    adj: IntMatrix,
}

impl Overlattice {
    pub fn new(a: IntMatrix) -> Result<Self> {
        let det = a.determinant();
        if det.is_zero() {
            return Err(LabError::SingularMatrix);
        }
        let adj = a.adjugate()?;
        Ok(Overlattice { generator: a, det, adj })
    }

    pub fn generator(&self) -> &IntMatrix {
        &self.generator
    }

    pub fn dim(&self) -> usize {
        self.generator.dim()
    }

    /// `[Γ : Zᵈ] = |det A|`.
    pub fn index(&self) -> BigInt {
        self.det.abs()
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(LabError::DimensionMismatch {
                expected: self.dim(),
                got: len,
            });
        }
        Ok(())
    }

    /// `(Aᵀ)⁻¹k` when it is an integer vector.
    pub fn dual_coordinates(&self, k: &[BigInt]) -> Result<Option<Vec<BigInt>>> {
        self.check_dim(k.len())?;
        // (Aᵀ)⁻¹ = adj(A)ᵀ / det
        let num = self.adj.transpose().mul_vec(k);
        let mut out = Vec::with_capacity(num.len());
        for v in num {
            let (q, r) = v.div_rem(&self.det);
            if !r.is_zero() {
                return Ok(None);
            }
            out.push(q);
        }
        Ok(Some(out))
    }

    /// `k ∈ Γ*` iff `(Aᵀ)⁻¹k ∈ Zᵈ`.
    pub fn dual_contains(&self, k: &[BigInt]) -> Result<bool> {
        Ok(self.dual_coordinates(k)?.is_some())
    }

    /// Numerator `m` of `⟨k, A⁻¹p⟩ mod 1 = m / |det A|`, with `0 ≤ m < |det A|`.
    pub fn phase_numerator(&self, k: &[BigInt], p: &[BigInt]) -> BigInt {
        let adj_p = self.adj.mul_vec(p);
        let mut dot: BigInt = k.iter().zip(&adj_p).map(|(a, b)| a * b).sum();
        if self.det.is_negative() {
            dot = -dot;
        }
        dot.mod_floor(&self.index())
    }

    /// Exact membership test `A⁻¹p ∈ [0,1)ᵈ`.
    pub fn in_fundamental_cell(&self, p: &[BigInt]) -> bool {
        let adj_p = self.adj.mul_vec(p);
        let d = &self.det;
        adj_p.iter().all(|v| {
            // 0 ≤ v/d < 1
            if d.is_positive() {
                !v.is_negative() && v < d
            } else {
                !v.is_positive() && v > d
            }
        })
    }

    /// Coset representatives `𝒫 = {p ∈ Zᵈ : A⁻¹p ∈ [0,1)ᵈ}`.
    ///
    /// Scans the integer bounding box of `A·[0,1)ᵈ` with exact membership tests.
    pub fn coset_reps(&self, cap: u64) -> Result<CosetSet> {
        let index = self.index();
        if index > BigInt::from(cap) {
            return Err(LabError::Capacity {
                what: "coset enumeration (|det A|)".into(),
                needed: index.to_u128().unwrap_or(u128::MAX),
                cap: cap as u128,
            });
        }
        let d = self.dim();
        let mut lo = Vec::with_capacity(d);
        let mut hi = Vec::with_capacity(d);
        let mut box_size: u128 = 1;
        for i in 0..d {
            let row = self.generator.row(i);
            let min: BigInt = row.iter().filter(|v| v.is_negative()).sum();
            let max: BigInt = row.iter().filter(|v| v.is_positive()).sum();
            let (Some(min), Some(max)) = (min.to_i64(), max.to_i64()) else {
                return Err(LabError::Capacity {
                    what: "coset bounding box".into(),
                    needed: u128::MAX,
                    cap: cap as u128,
                });
            };
            box_size = box_size.saturating_mul((max - min + 1) as u128);
            lo.push(min);
            hi.push(max);
        }
        let box_cap = (cap as u128).saturating_mul(1 << 12);
        if box_size > box_cap {
            return Err(LabError::Capacity {
                what: "coset bounding box".into(),
                needed: box_size,
                cap: box_cap,
            });
        }
        let mut reps = Vec::with_capacity(index.to_usize().unwrap_or(0));
        let mut cur = lo.clone();
        loop {
            let p: Vec<BigInt> = cur.iter().map(|&v| BigInt::from(v)).collect();
            if self.in_fundamental_cell(&p) {
                reps.push(p);
            }
            // odometer increment
            let mut i = 0;
            loop {
                if i == d {
                    return Ok(CosetSet {
                        reps,
                        source: self.generator.clone(),
                    });
                }
                if cur[i] < hi[i] {
                    cur[i] += 1;
                    break;
                }
                cur[i] = lo[i];
                i += 1;
            }
        }
    }

    /// `Σ_{p ∈ reps} e(−⟨k, A⁻¹p⟩)`; each phase is reduced mod 1 exactly
    /// before the exponential is evaluated.
    pub fn exp_sum_over(&self, reps: &[Vec<BigInt>], k: &[BigInt]) -> Complex64 {
        let n = self.index().to_f64().unwrap_or(f64::INFINITY);
        reps.iter()
            .map(|p| {
                let m = self.phase_numerator(k, p);
                if m.is_zero() {
                    Complex64::new(1.0, 0.0)
                } else {
                    let theta = -2.0 * std::f64::consts::PI * (m.to_f64().unwrap() / n);
                    Complex64::from_polar(1.0, theta)
                }
            })
            .sum()
    }

    pub fn exp_sum(&self, k: &[BigInt], cap: u64) -> Result<Complex64> {
        self.check_dim(k.len())?;
        let reps = self.coset_reps(cap)?;
        Ok(self.exp_sum_over(&reps.reps, k))
    }
}

/// Representatives of `Γ/Zᵈ` as integer vectors `p` with `A⁻¹p ∈ [0,1)ᵈ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CosetSet {
    pub reps: Vec<Vec<BigInt>>,
    pub source: IntMatrix,
}

impl CosetSet {
    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }
}

pub fn coset_reps(a: &IntMatrix) -> Result<CosetSet> {
    Overlattice::new(a.clone())?.coset_reps(DEFAULT_ENUMERATION_CAP)
}

pub fn dual_contains(a: &IntMatrix, k: &[BigInt]) -> Result<bool> {
    Overlattice::new(a.clone())?.dual_contains(k)
}

pub fn exp_sum(a: &IntMatrix, k: &[BigInt]) -> Result<Complex64> {
    Overlattice::new(a.clone())?.exp_sum(k, DEFAULT_ENUMERATION_CAP)
}

/// A full-rank lattice `BZᵈ` with rational basis columns and a certified
/// lower bound on the length of its nonzero vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneralLattice {
    basis: RationalMatrix,
    discreteness: f64,
}

impl GeneralLattice {
    pub fn new(basis: RationalMatrix) -> Result<Self> {
        let (scaled, _) = basis.clear_denominators();
        if scaled.determinant().is_zero() {
            return Err(LabError::SingularMatrix);
        }
        let discreteness = smallest_singular_value_rational(&basis, DEFAULT_SINGULAR_TOL).lower;
        Ok(GeneralLattice { basis, discreteness })
    }

    /// `σZᵈ`.
    pub fn scaled_integer(dim: usize, sigma: i64) -> Result<Self> {
        Self::new(IntMatrix::scalar(dim, sigma).to_rational())
    }

    pub fn basis(&self) -> &RationalMatrix {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// Every nonzero vector `Bz` has `‖Bz‖₂ ≥ σ_min(B)‖z‖₂ ≥ σ_min(B)`.
    pub fn discreteness_lower_bound(&self) -> f64 {
        self.discreteness
    }
}

pub fn discreteness_lower_bound(lattice: &GeneralLattice) -> f64 {
    lattice.discreteness_lower_bound()
}

/// Result of a truncated kernel sum.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelSum {
    pub value: f64,
    /// Rigorous bound on the omitted mass beyond the truncation box.
    pub tail_bound: f64,
    pub points: u64,
}

impl KernelSum {
    /// `value · σ · ε^{d/2}`, the quantity bounded by a dimension constant.
    pub fn normalized(&self, sigma: f64, eps: f64, dim: usize) -> f64 {
        self.value * sigma * eps.powf(dim as f64 / 2.0)
    }
}

#[inline]
fn kernel_factor(t: f64, r: f64, eps: f64) -> f64 {
    if t == 0.0 {
        r
    } else {
        r.min(1.0 / (t * t * r * eps))
    }
}

/// `Σ_{j≥0} f(jh)` for `f(t) = min{r, 1/(t² r ε)}`, with an upper bound for
/// the infinite remainder. Returns `(partial sums up to j < count, full)`.
fn one_sided_cell_sums(h: f64, r: f64, eps: f64, inner_cells: u64) -> (f64, f64) {
    let crossover = (1.0 / (r * eps.sqrt() * h)).ceil() as u64;
    let explicit = inner_cells.max(crossover + 2).max(2);
    let mut inner = 0.0;
    let mut full = 0.0;
    for j in 0..explicit {
        let v = kernel_factor(j as f64 * h, r, eps);
        if j < inner_cells {
            inner += v;
        }
        full += v;
    }
    // Σ_{j ≥ J} 1/(j²h²rε) ≤ 1/((J−1) h² r ε)
    full += 1.0 / ((explicit - 1) as f64 * h * h * r * eps);
    (inner, full)
}

/// `Σ_{t ∈ Γ∖{0}, |t|_∞ ≤ R} Π_i min{rᵢ, 1/(tᵢ² rᵢ ε)}` with `1/0 = +∞`.
///
/// The tail bound partitions space into half-open cubes of side `σ/√d`;
/// each holds at most one lattice point, and on each cube the kernel is at
/// most its value at the point nearest the origin.
pub fn kernel_sum(
    lattice: &GeneralLattice,
    radii: &[f64],
    eps: f64,
    truncation_radius: f64,
    point_cap: u64,
) -> Result<KernelSum> {
    let d = lattice.dim();
    if radii.len() != d {
        return Err(LabError::DimensionMismatch {
            expected: d,
            got: radii.len(),
        });
    }
    if !radii.iter().all(|&r| r > 0.0 && r <= 1.0) {
        return Err(LabError::invalid("r", "radii must lie in (0, 1]"));
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(LabError::invalid("eps", "eps must lie in (0, 1]"));
    }
    let sigma = lattice.discreteness_lower_bound();
    if sigma <= 0.0 {
        return Err(LabError::invalid("lattice", "lattice is not discrete"));
    }
    if truncation_radius < 10.0 * sigma {
        return Err(LabError::invalid(
            "truncation_radius",
            format!("must be at least 10·σ = {}", 10.0 * sigma),
        ));
    }
    let z_bound = (truncation_radius * (d as f64).sqrt() / sigma).floor();
    let side = 2.0 * z_bound + 1.0;
    let count = side.powi(d as i32);
    if count > point_cap as f64 {
        return Err(LabError::Capacity {
            what: "kernel_sum lattice points (increase σ or decrease the radius)".into(),
            needed: count as u128,
            cap: point_cap as u128,
        });
    }
    let z_bound = z_bound as i64;
    let (scaled, q) = lattice.basis().clear_denominators();
    let q = q
        .to_f64()
        .ok_or_else(|| LabError::invalid("basis", "denominator too large"))?;
    let m: Vec<i64> = scaled
        .entries()
        .iter()
        .map(|v| v.to_i64())
        .collect::<Option<_>>()
        .ok_or_else(|| LabError::invalid("basis", "entries too large for enumeration"))?;

    let mut value = 0.0;
    let mut points = 0u64;
    let mut z = vec![-z_bound; d];
    let mut t = vec![0.0; d];
    'outer: loop {
        if z.iter().any(|&v| v != 0) {
            let mut inside = true;
            for i in 0..d {
                let num: i128 = (0..d).map(|j| m[i * d + j] as i128 * z[j] as i128).sum();
                t[i] = num as f64 / q;
                if t[i].abs() > truncation_radius {
                    inside = false;
                    break;
                }
            }
            if inside {
                points += 1;
                value += (0..d).map(|i| kernel_factor(t[i], radii[i], eps)).product::<f64>();
            }
        }
        let mut i = 0;
        loop {
            if i == d {
                break 'outer;
            }
            if z[i] < z_bound {
                z[i] += 1;
                break;
            }
            z[i] = -z_bound;
            i += 1;
        }
    }

    let h = sigma / (d as f64).sqrt();
    let inner_cells = (truncation_radius / h).floor() as u64;
    let mut inner = 1.0;
    let mut full = 1.0;
    for &r in radii {
        let (i1, f1) = one_sided_cell_sums(h, r, eps, inner_cells);
        inner *= 2.0 * i1;
        full *= 2.0 * f1;
    }
    Ok(KernelSum {
        value,
        tail_bound: (full - inner).max(0.0),
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn v(xs: &[i64]) -> Vec<BigInt> {
        xs.iter().map(|&x| BigInt::from(x)).collect()
    }

    /// Brute-force oracle: scan a generous box and keep points in [0,1)ᵈ
    /// after exact rational inversion.
    fn brute_reps(a: &IntMatrix) -> Vec<Vec<BigInt>> {
        let inv = a.inverse_rational().unwrap();
        let d = a.dim();
        let bound: i64 = a.entries().iter().map(|x| x.abs().to_i64().unwrap()).sum();
        let mut out = Vec::new();
        let mut cur = vec![-bound; d];
        loop {
            let p: Vec<BigRational> = cur.iter().map(|&x| BigRational::from_integer(x.into())).collect();
            let x = inv.mul_vec(&p);
            let zero = BigRational::zero();
            let one = BigRational::from_integer(1.into());
            if x.iter().all(|c| *c >= zero && *c < one) {
                out.push(cur.iter().map(|&x| BigInt::from(x)).collect());
            }
            let mut i = 0;
            loop {
                if i == d {
                    return out;
                }
                if cur[i] < bound {
                    cur[i] += 1;
                    break;
                }
                cur[i] = -bound;
                i += 1;
            }
        }
    }

    #[test]
    fn coset_examples() {
        assert_eq!(coset_reps(&IntMatrix::identity(2)).unwrap().reps, vec![v(&[0, 0])]);

        let mut reps = coset_reps(&IntMatrix::scalar(2, 2)).unwrap().reps;
        reps.sort();
        let mut expected = vec![v(&[0, 0]), v(&[1, 0]), v(&[0, 1]), v(&[1, 1])];
        expected.sort();
        assert_eq!(reps, expected);

        let a = IntMatrix::from_i64([[2, 1], [0, 3]]);
        let mut reps = coset_reps(&a).unwrap().reps;
        reps.sort();
        let mut brute = brute_reps(&a);
        brute.sort();
        assert_eq!(reps.len(), 6);
        assert_eq!(reps, brute);
    }

    #[test]
    fn coset_reps_match_brute_force_with_negative_entries() {
        for a in [
            IntMatrix::from_i64([[-3, 1], [2, 2]]),
            IntMatrix::from_i64([[0, -2], [3, 1]]),
            IntMatrix::from_i64([[1, 2, 0], [-1, 1, 3], [2, 0, -2]]),
            IntMatrix::from_i64([[-5]]),
        ] {
            let mut reps = coset_reps(&a).unwrap().reps;
            reps.sort();
            let mut brute = brute_reps(&a);
            brute.sort();
            assert_eq!(reps, brute, "{a}");
            assert_eq!(BigInt::from(reps.len()), a.determinant().abs());
        }
    }

    #[test]
    fn capacity_error() {
        let a = IntMatrix::scalar(2, 400);
        let lat = Overlattice::new(a).unwrap();
        assert!(matches!(
            lat.coset_reps(DEFAULT_ENUMERATION_CAP),
            Err(LabError::Capacity { .. })
        ));
    }

    #[test]
    fn dual_examples() {
        let two = IntMatrix::scalar(2, 2);
        assert!(dual_contains(&two, &v(&[2, 4])).unwrap());
        assert!(!dual_contains(&two, &v(&[1, 0])).unwrap());
        let a = IntMatrix::from_i64([[2, 1], [0, 3]]);
        let lat = Overlattice::new(a).unwrap();
        assert_eq!(lat.dual_coordinates(&v(&[2, 1])).unwrap(), Some(v(&[1, 0])));
    }

    #[test]
    fn exp_sum_examples() {
        let a = IntMatrix::from_i64([[2]]);
        let s = exp_sum(&a, &v(&[1])).unwrap();
        assert!(s.norm() < 1e-15);
        assert_eq!(exp_sum(&a, &v(&[2])).unwrap(), Complex64::new(2.0, 0.0));
        let a = IntMatrix::from_i64([[2, 1], [0, 3]]);
        assert_eq!(exp_sum(&a, &v(&[2, 1])).unwrap(), Complex64::new(6.0, 0.0));
    }

    #[test]
    fn exp_sum_shift_invariance() {
        let a = IntMatrix::from_i64([[2, 1], [-1, 3]]);
        let lat = Overlattice::new(a.clone()).unwrap();
        let reps = lat.coset_reps(DEFAULT_ENUMERATION_CAP).unwrap().reps;
        let shifted: Vec<Vec<BigInt>> = reps
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let m = a.mul_vec_i64(&[i as i64 - 3, 7 - 2 * i as i64]);
                p.iter().zip(&m).map(|(x, y)| x + y).collect()
            })
            .collect();
        for k in [[1, 0], [3, -2], [7, 7], [2, 1]] {
            let k = v(&k);
            assert_eq!(lat.exp_sum_over(&reps, &k), lat.exp_sum_over(&shifted, &k));
        }
    }

    #[test]
    fn discreteness_examples() {
        let l = GeneralLattice::scaled_integer(2, 3).unwrap();
        assert!((l.discreteness_lower_bound() - 3.0).abs() < 1e-12);
        let l = GeneralLattice::new(IntMatrix::from_i64([[2, 1], [0, 2]]).transpose().to_rational()).unwrap();
        assert!((l.discreteness_lower_bound() - 1.561553).abs() < 1e-6);
        let half = IntMatrix::scalar(2, 2).inverse_rational().unwrap();
        let l = GeneralLattice::new(half).unwrap();
        assert!((l.discreteness_lower_bound() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn kernel_sum_one_dimensional_closed_form() {
        let l = GeneralLattice::scaled_integer(1, 10).unwrap();
        let ks = kernel_sum(&l, &[0.1], 1.0, 1e4, DEFAULT_POINT_CAP).unwrap();
        // 2[0.1 + Σ_{k≥2} 1/(10k²)] = 2[0.1 + (ζ(2) − 1)/10]
        let zeta2 = std::f64::consts::PI.powi(2) / 6.0;
        let limit = 2.0 * (0.1 + (zeta2 - 1.0) / 10.0);
        assert!((limit - 0.32899).abs() < 1e-5);
        assert!(ks.value <= limit && limit <= ks.value + ks.tail_bound);
        assert!((ks.value - 0.32899).abs() < 5e-4);
    }

    #[test]
    fn kernel_sum_symmetric_under_negation() {
        let b = IntMatrix::from_i64([[3, 1], [1, 4]]).to_rational();
        let neg = IntMatrix::from_i64([[-3, -1], [-1, -4]]).to_rational();
        let a = kernel_sum(
            &GeneralLattice::new(b).unwrap(),
            &[0.1, 0.25],
            0.25,
            60.0,
            DEFAULT_POINT_CAP,
        )
        .unwrap();
        let c = kernel_sum(
            &GeneralLattice::new(neg).unwrap(),
            &[0.1, 0.25],
            0.25,
            60.0,
            DEFAULT_POINT_CAP,
        )
        .unwrap();
        assert!((a.value - c.value).abs() < 1e-12 * a.value);
        assert_eq!(a.points, c.points);
    }

    #[test]
    fn kernel_sum_monotone_with_dominating_tail() {
        let l = GeneralLattice::new(IntMatrix::from_i64([[2, 1], [0, 2]]).transpose().to_rational()).unwrap();
        let mut prev: Option<KernelSum> = None;
        for radius in [20.0, 40.0, 80.0, 160.0] {
            let ks = kernel_sum(&l, &[0.05, 0.1], 0.25, radius, DEFAULT_POINT_CAP).unwrap();
            if let Some(p) = &prev {
                assert!(ks.value >= p.value);
                assert!(ks.value - p.value <= p.tail_bound);
            }
            prev = Some(ks);
        }
    }

    #[test]
    fn kernel_sum_rejects_small_radius_and_huge_enumeration() {
        let l = GeneralLattice::scaled_integer(2, 4).unwrap();
        assert!(matches!(
            kernel_sum(&l, &[0.1, 0.1], 1.0, 10.0, DEFAULT_POINT_CAP),
            Err(LabError::InvalidArgument { .. })
        ));
        assert!(matches!(
            kernel_sum(&l, &[0.1, 0.1], 1.0, 1e6, 1000),
            Err(LabError::Capacity { .. })
        ));
    }
}
