use rayon::prelude::*;

use crate::error::{LabError, Result};
use crate::measures::{derive_seed, sample_rng};
use crate::orbit::{count_hits, psi_cumulative};

use super::{median, with_threads, ExperimentConfig};

/// Declared summability of `Σ r₁(n)⋯r_d(n)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    Convergent,
    Divergent,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::Convergent => "convergent",
            Regime::Divergent => "divergent",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "convergent" => Some(Regime::Convergent),
            "divergent" => Some(Regime::Divergent),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DichotomyRow {
    pub sample_id: u64,
    pub seed: u64,
    pub r: u64,
    pub last_hit: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DichotomySummary {
    pub regime: Regime,
    pub psi: f64,
    pub max_r: u64,
    pub median_ratio: f64,
    /// Samples with at least one hit.
    pub hit_fraction: f64,
    /// Stabilization index used for the convergent verdict.
    pub n0: usize,
    /// Samples whose last hit is at or before `n0`.
    pub settled_fraction: f64,
    pub verdict: String,
    pub rows: Vec<DichotomyRow>,
}

/// Sample starting points and classify the hit counts against the declared
/// regime. Convergent: at least 90% of samples have no hit after `n0`
/// (default `N/100`). Divergent: median `R/Ψ` lies in `[0.5, 1.5]`.
pub fn dichotomy_experiment(cfg: &ExperimentConfig, regime: Regime, n0: Option<usize>) -> Result<DichotomySummary> {
    cfg.validate()?;
    let bits = cfg.bits()?;
    cfg.sequence.validate_prefix(cfg.steps)?;
    let n0 = n0.unwrap_or((cfg.steps / 100).max(1));
    if n0 > cfg.steps {
        return Err(LabError::invalid("n0", "stabilization index exceeds N"));
    }
    let psi = psi_cumulative(&cfg.target, cfg.steps).total();
    let rows: Vec<Result<DichotomyRow>> = with_threads(cfg.threads, || {
        (0..cfg.samples as u64)
            .into_par_iter()
            .map(|id| {
                let x = cfg.measure.sample(&mut sample_rng(cfg.seed, id), bits);
                let h = count_hits(&x, &cfg.sequence, &cfg.target, cfg.steps)?;
                Ok(DichotomyRow {
                    sample_id: id,
                    seed: derive_seed(cfg.seed, id),
                    r: h.count,
                    last_hit: h.last_hit,
                })
            })
            .collect()
    })?;
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let m = rows.len() as f64;
    let max_r = rows.iter().map(|r| r.r).max().unwrap_or(0);
    let ratios: Vec<f64> = rows.iter().map(|r| r.r as f64 / psi).collect();
    let median_ratio = median(&ratios);
    let hit_fraction = rows.iter().filter(|r| r.r > 0).count() as f64 / m;
    let settled_fraction = rows.iter().filter(|r| r.last_hit.is_none_or(|l| l <= n0)).count() as f64 / m;
    let consistent = match regime {
        Regime::Convergent => settled_fraction >= 0.9,
        Regime::Divergent => (0.5..=1.5).contains(&median_ratio),
    };
    let verdict = format!(
        "{}-{}",
        regime.name(),
        if consistent { "consistent" } else { "inconsistent" }
    );
    Ok(DichotomySummary {
        regime,
        psi,
        max_r,
        median_ratio,
        hit_fraction,
        n0,
        settled_fraction,
        verdict,
        rows,
    })
}
