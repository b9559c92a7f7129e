//! Coset representatives of Z^d / A Z^d and the exponential-sum dichotomy:
//! the sum is |det A| on the dual lattice and zero off it.

use num_bigint::BigInt;
use torus_lab::lattice::{Overlattice, DEFAULT_ENUMERATION_CAP};
use torus_lab::linalg::IntMatrix;

fn main() -> torus_lab::Result<()> {
    let lat = Overlattice::new(IntMatrix::from_i64([[2, 1], [0, 3]]))?;
    let reps = lat.coset_reps(DEFAULT_ENUMERATION_CAP)?;
    println!("index {} with {} coset representatives", lat.index(), reps.len());
    for k in [[0i64, 0], [2, 1], [1, 0], [0, 3], [3, 0]] {
        let kb: Vec<BigInt> = k.iter().map(|&x| BigInt::from(x)).collect();
        let s = lat.exp_sum_over(&reps.reps, &kb);
        println!("k = {k:?}: dual {:5}  sum = {:.3}", lat.dual_contains(&kb)?, s);
    }
    Ok(())
}
