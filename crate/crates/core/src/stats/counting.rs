use rayon::prelude::*;

use crate::approxfn::ApproxParams;
use crate::error::{LabError, Result};
use crate::linalg::MatrixSequence;
use crate::measures::{derive_seed, least_squares, sample_rng, MeasureModel};
use crate::orbit::{count_hits, psi_cumulative, PsiSeries, TargetSpec, TorusPoint};

use super::with_threads;

/// Log power in the error normalization (`2 + ε` with `ε = 1/2`).
pub const DEFAULT_LOG_POWER: f64 = 2.5;

/// Everything a counting run needs.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub measure: MeasureModel,
    pub sequence: MatrixSequence,
    pub target: TargetSpec,
    /// `N`.
    pub steps: usize,
    /// `M`.
    pub samples: usize,
    pub seed: u64,
    /// `B`; defaults to `2N + 64`.
    pub precision_bits: Option<u64>,
    /// Permit `B < 2N + 64`.
    pub allow_low_precision: bool,
    pub schedule: ApproxParams,
    /// Defaults to `d/(d+1)`.
    pub error_exponent: Option<f64>,
    pub log_power: f64,
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(
        measure: MeasureModel,
        sequence: MatrixSequence,
        target: TargetSpec,
        steps: usize,
        samples: usize,
        seed: u64,
    ) -> Self {
        let d = sequence.dim();
        ExperimentConfig {
            measure,
            sequence,
            target,
            steps,
            samples,
            seed,
            precision_bits: None,
            allow_low_precision: false,
            schedule: ApproxParams::overlap_default(d),
            error_exponent: None,
            log_power: DEFAULT_LOG_POWER,
            threads: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.sequence.dim()
    }

    pub fn required_bits(&self) -> u64 {
        2 * self.steps as u64 + 64
    }

    /// `B`, refusing a shortfall unless overridden.
    pub fn bits(&self) -> Result<u64> {
        let required = self.required_bits();
        let have = self.precision_bits.unwrap_or(required);
        if have < required && !self.allow_low_precision {
            return Err(LabError::Precision { have, required });
        }
        Ok(have)
    }

    pub fn exponent(&self) -> f64 {
        self.error_exponent.unwrap_or_else(|| {
            let d = self.dim() as f64;
            d / (d + 1.0)
        })
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        for got in [self.measure.dim(), self.target.dim()] {
            if got != d {
                return Err(LabError::DimensionMismatch { expected: d, got });
            }
        }
        if self.steps == 0 {
            return Err(LabError::invalid("N", "N must be at least 1"));
        }
        if self.samples == 0 {
            return Err(LabError::invalid("samples", "sample count must be at least 1"));
        }
        if let Some(len) = self.sequence.len() {
            if len < self.steps {
                return Err(LabError::SequenceExhausted { index: self.steps, len });
            }
        }
        self.schedule.validate()?;
        self.bits()?;
        Ok(())
    }

    fn normalize(&self, err: f64, psi: f64) -> f64 {
        err / (psi.powf(self.exponent()) * (psi.ln() + 2.0).powf(self.log_power))
    }
}

/// One sampled starting point.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleRecord {
    pub sample_id: u64,
    pub seed: u64,
    pub n: usize,
    pub r: u64,
    pub psi: f64,
    pub err: f64,
    pub normalized_err: f64,
}

/// Log–log regression.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub n_points: usize,
}

/// Empirical squared error against the `φ` budget at one checkpoint.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VarianceRow {
    pub n: usize,
    pub psi: f64,
    pub mean_sq_err: f64,
    pub phi_sum: f64,
}

impl VarianceRow {
    pub fn ratio(&self) -> f64 {
        self.mean_sq_err / self.phi_sum
    }
}

#[derive(Clone, Debug)]
pub struct CountingReport {
    pub records: Vec<SampleRecord>,
    pub fit: FitResult,
    pub variance: Vec<VarianceRow>,
    pub checkpoints: Vec<usize>,
    /// `Ψ` at each checkpoint.
    pub checkpoint_psi: Vec<f64>,
    /// `R(x_s, n) − Ψ(n)` per sample and checkpoint.
    pub checkpoint_errors: Vec<Vec<f64>>,
    /// Certified gap constant of the prefix (`+∞` without ratios).
    pub gap: f64,
}

/// Half-octave checkpoints `⌊2^{j/2}⌋ ≥ 64` up to `N`, with `N` appended;
/// short runs fall back to twelve log-spaced indices.
pub fn checkpoints(n: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (12..)
        .map(|j| 2f64.powf(j as f64 / 2.0).floor() as usize)
        .take_while(|&c| c <= n)
        .collect();
    if out.len() < 8 {
        let lo = (n as f64 / 64.0).max(1.0);
        out = (0..12)
            .map(|j| (lo * (n as f64 / lo).powf(j as f64 / 11.0)).round() as usize)
            .collect();
    }
    if out.last() != Some(&n) {
        out.push(n);
    }
    out.dedup();
    out.retain(|&c| c >= 1 && c <= n);
    out
}

/// `φ(n) = ψ(n)Ψ(n)^{(d−1)/(d+1)}(log⁺Ψ(n) + 1) + 2ψ(n)`.
pub fn phi(psi: f64, cumulative: f64, dim: usize) -> f64 {
    let d = dim as f64;
    let logp = cumulative.ln().max(0.0);
    psi * cumulative.powf((d - 1.0) / (d + 1.0)) * (logp + 1.0) + 2.0 * psi
}

/// Count hits for a given starting point, returning the record and its
/// prefix trace.
pub fn run_sample(
    cfg: &ExperimentConfig,
    x: &TorusPoint,
    sample_id: u64,
    seed: u64,
    series: &PsiSeries,
) -> Result<(SampleRecord, Vec<u32>)> {
    let h = count_hits(x, &cfg.sequence, &cfg.target, cfg.steps)?;
    let psi = series.total();
    let err = h.count as f64 - psi;
    Ok((
        SampleRecord {
            sample_id,
            seed,
            n: cfg.steps,
            r: h.count,
            psi,
            err,
            normalized_err: cfg.normalize(err, psi),
        },
        h.trace,
    ))
}

/// Sample `M` starting points from `μ`, count hits up to `N`, and fit the
/// growth of `|R − Ψ|` against `Ψ` along checkpoints.
pub fn counting_experiment(cfg: &ExperimentConfig) -> Result<CountingReport> {
    cfg.validate()?;
    let bits = cfg.bits()?;
    let gap = cfg.sequence.validate_prefix(cfg.steps)?;
    let series = psi_cumulative(&cfg.target, cfg.steps);
    let cps = checkpoints(cfg.steps);
    let results: Vec<Result<(SampleRecord, Vec<f64>)>> = with_threads(cfg.threads, || {
        (0..cfg.samples as u64)
            .into_par_iter()
            .map(|id| {
                let seed = derive_seed(cfg.seed, id);
                let x = cfg.measure.sample(&mut sample_rng(cfg.seed, id), bits);
                let (rec, trace) = run_sample(cfg, &x, id, seed, &series)?;
                let errs = cps.iter().map(|&c| trace[c - 1] as f64 - series.at(c)).collect();
                Ok((rec, errs))
            })
            .collect()
    })?;
    let mut records = Vec::with_capacity(cfg.samples);
    let mut checkpoint_errors = Vec::with_capacity(cfg.samples);
    for r in results {
        let (rec, errs) = r?;
        records.push(rec);
        checkpoint_errors.push(errs);
    }
    let checkpoint_psi: Vec<f64> = cps.iter().map(|&c| series.at(c)).collect();

    // φ prefix sums at the checkpoints
    let d = cfg.dim();
    let mut phi_sum = 0.0;
    let mut phi_at = Vec::with_capacity(cps.len());
    let mut next = 0;
    for n in 1..=cfg.steps {
        phi_sum += phi(series.psi[n - 1], series.at(n), d);
        if next < cps.len() && cps[next] == n {
            phi_at.push(phi_sum);
            next += 1;
        }
    }
    let m = cfg.samples as f64;
    let mean_sq: Vec<f64> = (0..cps.len())
        .map(|j| checkpoint_errors.iter().map(|e| e[j] * e[j]).sum::<f64>() / m)
        .collect();
    let variance = cps
        .iter()
        .enumerate()
        .map(|(j, &n)| VarianceRow {
            n,
            psi: checkpoint_psi[j],
            mean_sq_err: mean_sq[j],
            phi_sum: phi_at[j],
        })
        .collect();

    // log RMS|R − Ψ| against log Ψ
    let (xs, ys): (Vec<f64>, Vec<f64>) = checkpoint_psi
        .iter()
        .zip(&mean_sq)
        .filter(|(&p, &v)| p > 0.0 && v > 0.0)
        .map(|(&p, &v)| (p.ln(), 0.5 * v.ln()))
        .unzip();
    let fit = if xs.len() >= 2 {
        let (slope, intercept, r_squared) = least_squares(&xs, &ys);
        FitResult {
            slope,
            intercept,
            r_squared,
            n_points: xs.len(),
        }
    } else {
        FitResult {
            slope: f64::NAN,
            intercept: f64::NAN,
            r_squared: f64::NAN,
            n_points: xs.len(),
        }
    };
    Ok(CountingReport {
        records,
        fit,
        variance,
        checkpoints: cps,
        checkpoint_psi,
        checkpoint_errors,
        gap,
    })
}
