//! Orbit of a random point under powers of an integer matrix, hits in a
//! constant target, and the counting experiment across samples.

use torus_lab::linalg::{IntMatrix, MatrixSequence};
use torus_lab::measures::{sample_rng, MeasureModel};
use torus_lab::orbit::{count_hits, orbit_stream, TargetSpec, TorusPoint};
use torus_lab::stats::{counting_experiment, ExperimentConfig};

fn main() -> torus_lab::Result<()> {
    let seq = MatrixSequence::power(IntMatrix::from_i64([[2, 1], [0, 2]]))?;
    let target = TargetSpec::constant(TorusPoint::zero(2), vec![0.25, 0.25])?;
    let m = MeasureModel::lebesgue(2);
    let n = 2048;

    let x = m.sample(&mut sample_rng(42, 0), 2 * n as u64 + 64);
    for (i, p) in orbit_stream(&x, &seq, 4)?.iter().enumerate() {
        println!("A^{} x = {:?}", i + 1, p.to_f64());
    }
    let hits = count_hits(&x, &seq, &target, n)?;
    println!("R(x, {n}) = {} (expected {})", hits.count, n / 4);

    let mut cfg = ExperimentConfig::new(m, seq, target, n, 40, 42);
    cfg.precision_bits = Some(cfg.required_bits());
    let rep = counting_experiment(&cfg)?;
    println!(
        "fit of log RMS|R - Psi| on log Psi: slope {:.3}, r^2 {:.3} over {} checkpoints",
        rep.fit.slope, rep.fit.r_squared, rep.fit.n_points
    );
    for row in rep.variance.iter().rev().take(3) {
        println!(
            "  N={:>5} Psi={:>7.1} mean sq err {:>8.1} ratio {:.3}",
            row.n,
            row.psi,
            row.mean_sq_err,
            row.ratio()
        );
    }
    Ok(())
}
