use crate::error::{LabError, Result};
use crate::orbit::TorusPoint;

/// Corner grid resolution per axis in two dimensions.
pub const GRID_2D: usize = 256;

const MAX_POINTS: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Discrepancy {
    pub value: f64,
    /// Zero in one dimension; bounds the grid approximation in two.
    pub grid_error: f64,
}

/// Star discrepancy `sup_b |#{x ∈ [0,b)}/N − vol[0,b)|`.
pub fn star_discrepancy(points: &[TorusPoint]) -> Result<Discrepancy> {
    if points.is_empty() {
        return Err(LabError::invalid("points", "need at least one point"));
    }
    if points.len() > MAX_POINTS {
        return Err(LabError::Capacity {
            what: "discrepancy points".into(),
            needed: points.len() as u128,
            cap: MAX_POINTS as u128,
        });
    }
    let d = points[0].dim();
    if let Some(p) = points.iter().find(|p| p.dim() != d) {
        return Err(LabError::DimensionMismatch {
            expected: d,
            got: p.dim(),
        });
    }
    match d {
        1 => Ok(Discrepancy {
            value: exact_1d(points.iter().map(|p| p.approx(0)).collect()),
            grid_error: 0.0,
        }),
        2 => Ok(grid_2d(points)),
        _ => Err(LabError::UnsupportedDimension(d)),
    }
}

fn exact_1d(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| ((i + 1) as f64 / n - x).max(x - i as f64 / n))
        .fold(0.0, f64::max)
}

fn grid_2d(points: &[TorusPoint]) -> Discrepancy {
    let g = GRID_2D;
    let n = points.len() as f64;
    // cell counts, then 2D prefix sums give #{x < i/g, y < j/g}
    let mut cells = vec![0u32; g * g];
    for p in points {
        let cx = ((p.approx(0) * g as f64) as usize).min(g - 1);
        let cy = ((p.approx(1) * g as f64) as usize).min(g - 1);
        cells[cx * g + cy] += 1;
    }
    let mut prefix = vec![0u32; (g + 1) * (g + 1)];
    for i in 0..g {
        for j in 0..g {
            prefix[(i + 1) * (g + 1) + j + 1] =
                cells[i * g + j] + prefix[i * (g + 1) + j + 1] + prefix[(i + 1) * (g + 1) + j]
                    - prefix[i * (g + 1) + j];
        }
    }
    let mut value: f64 = 0.0;
    for i in 1..=g {
        for j in 1..=g {
            let frac = prefix[i * (g + 1) + j] as f64 / n;
            let vol = (i * j) as f64 / (g * g) as f64;
            value = value.max((frac - vol).abs());
        }
    }
    Discrepancy {
        value,
        grid_error: 2.0 / g as f64,
    }
}
