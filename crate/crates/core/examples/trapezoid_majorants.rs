//! Trapezoid minorant and majorant of an interval indicator, their closed-form
//! transforms against quadrature, and the periodised approximant on the torus.

use num_bigint::BigInt;
use torus_lab::approxfn::{
    fourier_l1_check, min_truncation, trapezoid_envelope, trapezoid_fourier_1d, Approximant, Side, TrapezoidSpec,
};
use torus_lab::linalg::IntMatrix;
use torus_lab::oracle::trapezoid_fourier_quadrature;
use torus_lab::orbit::TorusPoint;

fn main() -> torus_lab::Result<()> {
    for side in [Side::Lower, Side::Upper] {
        let spec = TrapezoidSpec::new(0.2, 0.25, side)?;
        println!(
            "{} plateau {:.4} support {:.4}",
            side.name(),
            spec.plateau(),
            spec.support()
        );
        for k in [0.0, 1.0, 7.0, 40.0] {
            println!(
                "  k={k:>4}: closed {:+.12} quadrature {:+.12} envelope {:.3e}",
                trapezoid_fourier_1d(&spec, k),
                trapezoid_fourier_quadrature(&spec, k),
                trapezoid_envelope(&spec, k)
            );
        }
    }

    let a = IntMatrix::from_i64([[2, 1], [1, 1]]);
    let y = TorusPoint::from_fractions(&[(1, 3), (1, 5)])?;
    let radii = [0.1, 0.15];
    let h = Approximant::new(a.clone(), y, &radii, 0.5, Side::Upper)?;
    let k: Vec<BigInt> = vec![BigInt::from(3), BigInt::from(2)];
    println!("mean of h+ = {:.6}, h^+(3,2) = {:.6}", h.mean(), h.fourier(&k)?);

    let t = min_truncation(&radii, 0.5);
    let l1 = fourier_l1_check(&a, &radii, 0.5, Side::Upper, t)?;
    println!(
        "l1 mass {:.3} (+ tail {:.2e}) against reference {:.3}",
        l1.sum, l1.tail_bound, l1.reference
    );
    Ok(())
}
