//! Kernel sums over scaled integer lattices with a rigorous tail bound.

use torus_lab::lattice::{kernel_sum, GeneralLattice, DEFAULT_POINT_CAP};

fn main() -> torus_lab::Result<()> {
    for d in [1usize, 2] {
        for sigma in [2i64, 8, 32] {
            let lattice = GeneralLattice::scaled_integer(d, sigma)?;
            let eps = 0.25;
            let ks = kernel_sum(&lattice, &vec![0.1; d], eps, 16.0 * sigma as f64, DEFAULT_POINT_CAP)?;
            println!(
                "d={d} sigma={sigma:>2}: sum {:.6e} tail {:.1e} normalised {:.4} ({} points)",
                ks.value,
                ks.tail_bound,
                ks.normalized(sigma as f64, eps, d),
                ks.points
            );
        }
    }
    Ok(())
}
