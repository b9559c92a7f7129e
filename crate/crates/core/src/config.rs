//! JSON run configuration. Unknown fields are rejected; integers may be
//! given as JSON numbers or decimal strings, rationals as `"p/q"` strings.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Deserialize;
use std::str::FromStr;

use crate::approxfn::ApproxParams;
use crate::error::{LabError, Result};
use crate::linalg::{IntMatrix, MatrixSequence, SequenceKind};
use crate::measures::{DecayModel, MeasureKind, MeasureModel};
use crate::orbit::{Radii, TargetSpec, TorusPoint};
use crate::stats::{ExperimentConfig, Regime};

/// Integer literal: JSON number or decimal string.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum IntLit {
    Num(i64),
    Str(String),
}

impl IntLit {
    pub fn to_bigint(&self, field: &str) -> Result<BigInt> {
        match self {
            IntLit::Num(v) => Ok(BigInt::from(*v)),
            IntLit::Str(s) => {
                BigInt::from_str(s.trim()).map_err(|_| LabError::invalid(field, format!("`{s}` is not an integer")))
            }
        }
    }

    pub fn to_u64(&self, field: &str) -> Result<u64> {
        u64::try_from(self.to_bigint(field)?)
            .map_err(|_| LabError::invalid(field, "expected an unsigned 64-bit integer"))
    }
}

/// Rational literal: JSON number (taken exactly) or `"p/q"` string.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum RatLit {
    Int(i64),
    Float(f64),
    Str(String),
}

impl RatLit {
    pub fn to_rational(&self, field: &str) -> Result<BigRational> {
        match self {
            RatLit::Int(v) => Ok(BigRational::from_integer(BigInt::from(*v))),
            RatLit::Float(f) => {
                BigRational::from_float(*f).ok_or_else(|| LabError::invalid(field, "non-finite number"))
            }
            RatLit::Str(s) => BigRational::from_str(s.trim())
                .map_err(|_| LabError::invalid(field, format!("`{s}` is not a rational"))),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureConfig {
    pub kind: String,
    pub dim: usize,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SequenceConfig {
    Power {
        base: Vec<Vec<IntLit>>,
    },
    List {
        matrices: Vec<Vec<Vec<IntLit>>>,
    },
    Ratios {
        first: Vec<Vec<IntLit>>,
        ratios: Vec<Vec<Vec<IntLit>>>,
    },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum RadiiConfig {
    Constant { values: Vec<f64> },
    Power { c: f64, exponent: f64 },
    Exponential { c: f64, rate: f64 },
    Table { rows: Vec<Vec<f64>> },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetConfig {
    pub center: Vec<RatLit>,
    pub radii: RadiiConfig,
    #[serde(default)]
    pub tau: Option<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ScheduleConfig {
    Expectation { xi: f64 },
    Overlap { delta: f64, start: usize },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeylConfig {
    pub k: Vec<Vec<IntLit>>,
    /// Also report `del_series_term` for each `k`.
    #[serde(default)]
    pub del: bool,
}

/// Frequency grid for decay fits.
#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum GridConfig {
    /// `points` log-spaced values from `t_min` to `t_max`.
    Log { t_min: f64, t_max: f64, points: usize },
    /// `start·ratioʲ` for `j < points`.
    Geometric { start: f64, ratio: f64, points: usize },
}

impl GridConfig {
    pub fn values(&self) -> Result<Vec<f64>> {
        match *self {
            GridConfig::Log { t_min, t_max, points } => {
                if points < 2 || !(t_min > 0.0 && t_max > t_min) {
                    return Err(LabError::invalid(
                        "decay.grid",
                        "need 0 < t_min < t_max and at least 2 points",
                    ));
                }
                Ok(crate::measures::log_grid(t_min, t_max, points))
            }
            GridConfig::Geometric { start, ratio, points } => {
                if points < 2 || !(start > 0.0 && ratio > 1.0) {
                    return Err(LabError::invalid(
                        "decay.grid",
                        "need start > 0, ratio > 1 and at least 2 points",
                    ));
                }
                Ok((0..points).map(|j| start * ratio.powi(j as i32)).collect())
            }
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayConfig {
    pub grid: GridConfig,
    #[serde(default = "default_models")]
    pub models: Vec<String>,
    /// Relative width of the window searched for a local maximum.
    #[serde(default)]
    pub window: f64,
}

fn default_models() -> Vec<String> {
    vec!["polylog".into(), "polynomial".into()]
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DichotomyConfig {
    pub regime: String,
    #[serde(default)]
    pub n0: Option<usize>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairsConfig {
    #[serde(default)]
    pub pairs: Vec<(usize, usize)>,
    /// Adds every pair `1 ≤ m < n ≤ all_up_to`.
    #[serde(default)]
    pub all_up_to: Option<usize>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_dmax")]
    pub dmax: usize,
    #[serde(default = "default_detmax")]
    pub detmax: u64,
    /// Multiplies every numeric tolerance; `0` demands exact agreement.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

fn default_trials() -> usize {
    20
}
fn default_dmax() -> usize {
    3
}
fn default_detmax() -> u64 {
    60
}
fn default_tolerance() -> f64 {
    1.0
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            trials: default_trials(),
            dmax: default_dmax(),
            detmax: default_detmax(),
            tolerance: default_tolerance(),
        }
    }
}

/// Top-level configuration. Each command reads the sections it needs.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub measure: Option<MeasureConfig>,
    #[serde(default)]
    pub sequence: Option<SequenceConfig>,
    #[serde(default)]
    pub target: Option<TargetConfig>,
    #[serde(rename = "N", default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub seed: Option<IntLit>,
    #[serde(default)]
    pub precision_bits: Option<u64>,
    #[serde(default)]
    pub allow_low_precision: bool,
    #[serde(default)]
    pub schedule: Option<ScheduleConfig>,
    #[serde(default)]
    pub error_exponent: Option<f64>,
    #[serde(default)]
    pub log_power: Option<f64>,
    #[serde(default)]
    pub weyl: Option<WeylConfig>,
    #[serde(default)]
    pub decay: Option<DecayConfig>,
    #[serde(default)]
    pub dichotomy: Option<DichotomyConfig>,
    #[serde(default)]
    pub pairs: Option<PairsConfig>,
    #[serde(default)]
    pub verify: Option<VerifyConfig>,
}

fn require<'a, T>(v: &'a Option<T>, field: &str) -> Result<&'a T> {
    v.as_ref()
        .ok_or_else(|| LabError::invalid(field, "missing required section"))
}

fn matrix(rows: &[Vec<IntLit>], field: &str) -> Result<IntMatrix> {
    let big = rows
        .iter()
        .map(|r| r.iter().map(|v| v.to_bigint(field)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    IntMatrix::from_rows(big).map_err(|e| LabError::invalid(field, e.to_string()))
}

impl RunConfig {
    /// Parse JSON, naming the offending path on failure.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            LabError::InvalidArgument {
                field: if path == "." { "config".into() } else { path },
                reason: e.into_inner().to_string(),
            }
        })
    }

    pub fn seed(&self) -> Result<Option<u64>> {
        self.seed.as_ref().map(|s| s.to_u64("seed")).transpose()
    }

    pub fn measure(&self) -> Result<MeasureModel> {
        let m = require(&self.measure, "measure")?;
        let kind = MeasureKind::from_name(&m.kind)
            .ok_or_else(|| LabError::invalid("measure.kind", format!("unknown measure `{}`", m.kind)))?;
        MeasureModel::new(kind, m.dim)
    }

    pub fn sequence(&self) -> Result<MatrixSequence> {
        let kind = match require(&self.sequence, "sequence")? {
            SequenceConfig::Power { base } => SequenceKind::Power(matrix(base, "sequence.base")?),
            SequenceConfig::List { matrices } => SequenceKind::List(
                matrices
                    .iter()
                    .map(|m| matrix(m, "sequence.matrices"))
                    .collect::<Result<_>>()?,
            ),
            SequenceConfig::Ratios { first, ratios } => SequenceKind::Ratios {
                first: matrix(first, "sequence.first")?,
                ratios: ratios
                    .iter()
                    .map(|m| matrix(m, "sequence.ratios"))
                    .collect::<Result<_>>()?,
            },
        };
        MatrixSequence::new(kind)
    }

    pub fn target(&self) -> Result<TargetSpec> {
        let t = require(&self.target, "target")?;
        let coords = t
            .center
            .iter()
            .map(|c| c.to_rational("target.center"))
            .collect::<Result<Vec<_>>>()?;
        let center = TorusPoint::from_rationals(&coords)?;
        let radii = match &t.radii {
            RadiiConfig::Constant { values } => Radii::Constant(values.clone()),
            RadiiConfig::Power { c, exponent } => Radii::Power {
                c: *c,
                exponent: *exponent,
            },
            RadiiConfig::Exponential { c, rate } => Radii::Exponential { c: *c, rate: *rate },
            RadiiConfig::Table { rows } => Radii::Table(rows.clone()),
        };
        TargetSpec::new(center, radii, t.tau)
    }

    pub fn steps(&self) -> Result<usize> {
        self.n.ok_or_else(|| LabError::invalid("N", "missing required field"))
    }

    pub fn samples(&self) -> Result<usize> {
        self.samples
            .ok_or_else(|| LabError::invalid("samples", "missing required field"))
    }

    /// The counting configuration; `seed` overrides the file's seed.
    pub fn experiment(&self, seed: Option<u64>, threads: Option<usize>) -> Result<ExperimentConfig> {
        let sequence = self.sequence()?;
        let d = sequence.dim();
        let mut cfg = ExperimentConfig::new(
            self.measure()?,
            sequence,
            self.target()?,
            self.steps()?,
            self.samples()?,
            seed.or(self.seed()?).unwrap_or(0),
        );
        cfg.precision_bits = self.precision_bits;
        cfg.allow_low_precision = self.allow_low_precision;
        cfg.schedule = match self.schedule {
            None => ApproxParams::overlap_default(d),
            Some(ScheduleConfig::Expectation { xi }) => ApproxParams::Expectation { xi },
            Some(ScheduleConfig::Overlap { delta, start }) => ApproxParams::Overlap { delta, start },
        };
        cfg.error_exponent = self.error_exponent;
        if let Some(p) = self.log_power {
            cfg.log_power = p;
        }
        cfg.threads = threads;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn weyl_frequencies(&self, dim: usize) -> Result<Vec<Vec<BigInt>>> {
        let w = require(&self.weyl, "weyl")?;
        if w.k.is_empty() {
            return Err(LabError::invalid("weyl.k", "at least one frequency is required"));
        }
        w.k.iter()
            .enumerate()
            .map(|(i, k)| {
                let field = format!("weyl.k[{i}]");
                if k.len() != dim {
                    return Err(LabError::invalid(
                        &field,
                        format!("expected {dim} components, got {}", k.len()),
                    ));
                }
                let v = k.iter().map(|c| c.to_bigint(&field)).collect::<Result<Vec<_>>>()?;
                if v.iter().all(|c| c.sign() == num_bigint::Sign::NoSign) {
                    return Err(LabError::invalid(&field, "frequency must be nonzero"));
                }
                Ok(v)
            })
            .collect()
    }

    pub fn decay_models(&self) -> Result<Vec<DecayModel>> {
        require(&self.decay, "decay")?
            .models
            .iter()
            .map(|m| match m.as_str() {
                "polylog" => Ok(DecayModel::Polylog),
                "polynomial" => Ok(DecayModel::Polynomial),
                other => Err(LabError::invalid("decay.models", format!("unknown model `{other}`"))),
            })
            .collect()
    }

    pub fn regime(&self) -> Result<Regime> {
        let r = &require(&self.dichotomy, "dichotomy")?.regime;
        Regime::from_name(r).ok_or_else(|| LabError::invalid("dichotomy.regime", format!("unknown regime `{r}`")))
    }

    pub fn pair_list(&self) -> Result<Vec<(usize, usize)>> {
        let p = require(&self.pairs, "pairs")?;
        let mut out = p.pairs.clone();
        if let Some(top) = p.all_up_to {
            for n in 2..=top {
                for m in 1..n {
                    out.push((m, n));
                }
            }
        }
        if out.is_empty() {
            return Err(LabError::invalid("pairs.pairs", "no pairs requested"));
        }
        if out.iter().any(|&(m, n)| m == 0 || n == 0) {
            return Err(LabError::invalid("pairs.pairs", "indices are 1-based"));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const COUNT: &str = r#"{
        "measure": {"kind": "lebesgue", "dim": 2},
        "sequence": {"kind": "power", "base": [["2", 1], [0, 2]]},
        "target": {"center": ["1/3", 0], "radii": {"kind": "constant", "values": [0.25, 0.25]}},
        "N": 64, "samples": 4, "seed": "18446744073709551615"
    }"#;

    #[test]
    fn parses_counting_config() {
        let c = RunConfig::from_json(COUNT).unwrap();
        assert_eq!(c.seed().unwrap(), Some(u64::MAX));
        let e = c.experiment(None, None).unwrap();
        assert_eq!(e.dim(), 2);
        assert_eq!(e.target.center().coord(0), BigRational::new(1.into(), 3.into()));
        assert_eq!(c.experiment(Some(5), None).unwrap().seed, 5);
    }

    #[test]
    fn unknown_field_is_named() {
        let text = COUNT.replace("\"N\"", "\"steps\"");
        match RunConfig::from_json(&text).unwrap_err() {
            LabError::InvalidArgument { reason, .. } => assert!(reason.contains("steps"), "{reason}"),
            e => panic!("{e:?}"),
        }
        let bad = COUNT.replace("\"lebesgue\", \"dim\": 2", "\"lebesgue\", \"dims\": 2");
        match RunConfig::from_json(&bad).unwrap_err() {
            LabError::InvalidArgument { field, .. } => assert!(field.starts_with("measure"), "{field}"),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn zero_frequency_rejected() {
        let text = COUNT.replace("\"N\": 64", "\"N\": 64, \"weyl\": {\"k\": [[1, 0], [0, \"0\"]]}");
        let c = RunConfig::from_json(&text).unwrap();
        match c.weyl_frequencies(2).unwrap_err() {
            LabError::InvalidArgument { field, .. } => assert_eq!(field, "weyl.k[1]"),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let text = COUNT.replace("\"dim\": 2", "\"dim\": 1");
        let c = RunConfig::from_json(&text).unwrap();
        assert!(matches!(
            c.experiment(None, None),
            Err(LabError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn pair_expansion() {
        let text = COUNT.replace(
            "\"N\": 64",
            "\"N\": 64, \"pairs\": {\"pairs\": [[3, 3]], \"all_up_to\": 4}",
        );
        let p = RunConfig::from_json(&text).unwrap().pair_list().unwrap();
        assert_eq!(p.len(), 7);
    }
}
