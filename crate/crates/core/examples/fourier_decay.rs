//! Fourier transforms of the three measure models and their decay fits.

use torus_lab::measures::{decay_fit, empirical_fourier, log_grid, DecayModel, DecayOutcome, MeasureModel};

fn main() -> torus_lab::Result<()> {
    let models = [
        MeasureModel::lebesgue(1),
        MeasureModel::smooth(1),
        MeasureModel::cantor(1),
    ];
    for m in &models {
        let vals: Vec<String> = [1.0, 3.0, 9.0, 27.5]
            .iter()
            .map(|&t| format!("{:.5}", m.fourier_1d(t).norm()))
            .collect();
        println!("{:8} |mu^(t)| at 1, 3, 9, 27.5: {}", m.name(), vals.join(" "));
    }

    let emp = empirical_fourier(&models[2], &[1.0], 20_000, 3)?;
    println!("cantor empirical mu^(1) = {:?}", emp);

    let smooth_grid = log_grid(10.5, 1e6, 40);
    if let DecayOutcome::Fit(f) = decay_fit(&models[1], &smooth_grid, DecayModel::Polynomial, 0.0)? {
        println!("smooth polynomial slope {:.3} (r^2 {:.4})", f.slope, f.r_squared);
    }
    // Cantor peaks sit at powers of three
    let cantor_grid: Vec<f64> = (1..=25).map(|k| 3f64.powi(k)).collect();
    if let DecayOutcome::Fit(f) = decay_fit(&models[2], &cantor_grid, DecayModel::Polynomial, 0.0)? {
        println!("cantor polynomial slope {:.2e} on the 3^k grid", f.slope);
    }
    Ok(())
}
