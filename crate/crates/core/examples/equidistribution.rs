//! Weyl sums along orbits for Lebesgue and Cantor starting points, and the
//! star discrepancy of an orbit prefix.

use num_bigint::BigInt;
use torus_lab::linalg::{IntMatrix, MatrixSequence};
use torus_lab::measures::{sample_rng, MeasureModel};
use torus_lab::orbit::orbit_stream;
use torus_lab::stats::{del_series_term, star_discrepancy, weyl_sum};

fn main() -> torus_lab::Result<()> {
    let n = 4096;
    let bits = 2 * n as u64 + 64;
    let k = [BigInt::from(1)];

    let three = MatrixSequence::power(IntMatrix::from_i64([[3]]))?;
    for m in [MeasureModel::lebesgue(1), MeasureModel::cantor(1)] {
        let x = m.sample(&mut sample_rng(5, 0), bits);
        let s = weyl_sum(&x, &three, &k, n)?;
        // the mean-square term is a double sum, so keep it short
        let del = del_series_term(&m, &three, &k, 256)?;
        println!(
            "{:8} |S_N(1)| = {:.5}, mean-square term at N=256 {:.3e}",
            m.name(),
            s.norm(),
            del
        );
    }

    let two = MatrixSequence::power(IntMatrix::from_i64([[2]]))?;
    let x = MeasureModel::lebesgue(1).sample(&mut sample_rng(5, 1), bits);
    let pts = orbit_stream(&x, &two, n)?;
    let d = star_discrepancy(&pts)?;
    println!(
        "star discrepancy of {n} doubling-map points: {:.5} (+/- {})",
        d.value, d.grid_error
    );
    Ok(())
}
