//! Convergent and divergent radius sequences under the doubling map.

use torus_lab::linalg::{IntMatrix, MatrixSequence};
use torus_lab::measures::MeasureModel;
use torus_lab::orbit::{Radii, TargetSpec, TorusPoint};
use torus_lab::stats::{dichotomy_experiment, ExperimentConfig, Regime};

fn main() -> torus_lab::Result<()> {
    let seq = MatrixSequence::power(IntMatrix::from_i64([[2]]))?;
    let y = TorusPoint::from_fractions(&[(1, 3)])?;
    let cases = [
        (Regime::Divergent, Radii::Power { c: 0.5, exponent: -1.0 }, 8192),
        (Regime::Convergent, Radii::Power { c: 0.5, exponent: -2.0 }, 20_000),
    ];
    for (regime, radii, n) in cases {
        let target = TargetSpec::new(y.clone(), radii, None)?;
        let cfg = ExperimentConfig::new(MeasureModel::lebesgue(1), seq.clone(), target, n, 40, 11);
        let s = dichotomy_experiment(&cfg, regime, None)?;
        println!(
            "{:10} N={n:>6} Psi={:.3} max R={} median R/Psi={:.3} settled={:.2} -> {}",
            regime.name(),
            s.psi,
            s.max_r,
            s.median_ratio,
            s.settled_fraction,
            s.verdict
        );
    }
    Ok(())
}
