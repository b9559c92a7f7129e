//! Exact integer linear algebra: determinant, rational inverse, characteristic
//! polynomial and a certified smallest singular value.

use torus_lab::linalg::{char_poly, is_expanding, smallest_singular_value, IntMatrix, MatrixSequence};

fn main() -> torus_lab::Result<()> {
    let a = IntMatrix::from_i64([[2, 1], [0, 2]]);
    println!("A = {a}");
    println!("det A = {}", a.determinant());
    println!("A^-1 = {:?}", a.inverse_rational()?.to_f64());
    println!("char poly of A^T A: {:?}", char_poly(&a.gram()).coeffs());

    let s = smallest_singular_value(&a, 1e-12);
    println!("sigma_min(A) in [{:.12}, {:.12}]", s.lower, s.upper);
    println!("expanding: {}", is_expanding(&a));

    let seq = MatrixSequence::power(a)?;
    println!("A^10 = {}", seq.matrix(10)?);
    println!("gap constant over 4096 terms: {:.6}", seq.gap_constant(4096)?);
    Ok(())
}
