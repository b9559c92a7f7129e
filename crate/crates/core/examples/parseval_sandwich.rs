//! Measure of the preimage of a box: Fourier series for both approximants
//! against a Monte Carlo estimate.

use torus_lab::approxfn::Side;
use torus_lab::linalg::IntMatrix;
use torus_lab::measures::MeasureModel;
use torus_lab::orbit::{TargetSpec, TorusPoint};
use torus_lab::stats::{measure_of_target_fourier, measure_of_target_mc};

fn main() -> torus_lab::Result<()> {
    let a = IntMatrix::from_i64([[2, 1], [1, 1]]);
    let target = TargetSpec::constant(TorusPoint::from_fractions(&[(1, 4), (2, 3)])?, vec![0.1, 0.2])?;
    for m in [MeasureModel::lebesgue(2), MeasureModel::smooth(2)] {
        let lo = measure_of_target_fourier(&m, &a, &target, 1, 0.2, Side::Lower)?;
        let hi = measure_of_target_fourier(&m, &a, &target, 1, 0.2, Side::Upper)?;
        let mc = measure_of_target_mc(&m, &a, &target, 1, 200_000, 9)?;
        println!(
            "{:8} lower {:.5}  monte carlo {:.5} +/- {:.5}  upper {:.5}",
            m.name(),
            lo.value,
            mc.estimate,
            mc.radius,
            hi.value
        );
    }
    Ok(())
}
