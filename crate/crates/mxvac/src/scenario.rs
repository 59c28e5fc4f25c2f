//! Scenario files: a versioned TOML description of one model and its run settings.

use std::path::Path;

use mxvac_core::vacation::{
    BinomialReneging, DisasterCoupled, HypergeometricRatio, MarkovianBalking, MultipleVacations,
    MxG1Disaster, RateSequence,
};
use mxvac_core::{BatchLaw, Complex64, Pmf, ServiceLaw, VacationModelSpec, WorkingModeSpec};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub working: WorkingBlock,
    pub vacation: VacationBlock,
    #[serde(default)]
    pub run: RunBlock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkingBlock {
    pub lambda: f64,
    #[serde(default)]
    pub batch: BatchBlock,
    pub service: ServiceBlock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BatchBlock {
    Point { size: usize },
    Uniform { lo: usize, hi: usize },
    /// `weights[i]` is the probability of size `offset + i`.
    Pmf { offset: usize, weights: Vec<f64> },
    Geometric { p: f64 },
}

impl Default for BatchBlock {
    fn default() -> Self {
        Self::Point { size: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ServiceBlock {
    Exponential { rate: f64 },
    Erlang { phases: u32, rate: f64 },
    Deterministic { value: f64 },
    Hyperexponential { weights: Vec<f64>, rates: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RateBlock {
    Constant { value: f64 },
    /// Polynomial coefficients in ascending powers of `k`.
    Rational { numerator: Vec<f64>, denominator: Vec<f64> },
    Table { values: Vec<f64>, tail: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum VacationBlock {
    MultipleVacations {
        lambda_v: f64,
        #[serde(default)]
        batch: BatchBlock,
        vacation: ServiceBlock,
    },
    MarkovianBalking {
        lambda_v: f64,
        admit: RateBlock,
        exit: RateBlock,
        #[serde(default = "no_disasters")]
        disaster: RateBlock,
        #[serde(default)]
        batch: BatchBlock,
    },
    HypergeometricRatio {
        /// `[re, im]` pairs.
        numerator_roots: Vec<[f64; 2]>,
        denominator_roots: Vec<[f64; 2]>,
        scale: f64,
    },
    BinomialReneging {
        lambda_v: f64,
        xi: f64,
        gamma: f64,
        p: f64,
    },
    DisasterMm1 {
        lambda_v: f64,
        mu_v: f64,
        gamma: f64,
    },
    DisasterChainBdp {
        a: f64,
        gamma: f64,
    },
    DisasterMxg1 {
        lambda_v: f64,
        #[serde(default)]
        batch: BatchBlock,
        service: ServiceBlock,
        xi: f64,
        gamma: f64,
    },
}

fn no_disasters() -> RateBlock {
    RateBlock::Constant { value: 0.0 }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunBlock {
    pub j_max: usize,
    pub n_cycles: usize,
    pub seed: u64,
    pub replications: usize,
    pub truncation: usize,
    pub tolerances: Tolerances,
}

impl Default for RunBlock {
    fn default() -> Self {
        Self {
            j_max: 64,
            n_cycles: 6250,
            seed: 1,
            replications: 16,
            truncation: 400,
            tolerances: Tolerances::default(),
        }
    }
}

/// Pass thresholds for `compare`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Sup-norm between two exact sources.
    pub sup: f64,
    /// Total variation when a simulated source is involved.
    pub tv: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            sup: 1e-7,
            tv: 0.02,
        }
    }
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        let de = toml::Deserializer::parse(text).map_err(|e| CliError::Scenario(e.to_string()))?;
        let scenario: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
            CliError::Scenario(format!("at `{}`: {}", e.path(), e.inner()))
        })?;
        scenario.check()?;
        Ok(scenario)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Scenario(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Reloads the scenario embedded in a summary JSON written by a command.
    pub fn from_summary(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Scenario(format!("cannot read {}: {e}", path.display())))?;
        let mut de = serde_json::Deserializer::from_str(&text);
        let summary: SummaryScenario = serde_path_to_error::deserialize(&mut de)
            .map_err(|e| CliError::Scenario(format!("at `{}`: {}", e.path(), e.inner())))?;
        summary.scenario.check()?;
        Ok(summary.scenario)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    /// Schema version and model validation, including stability.
    pub fn check(&self) -> Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Scenario(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.working_spec()?;
        self.vacation_spec()?;
        Ok(())
    }

    pub fn working_spec(&self) -> Result<WorkingModeSpec, CliError> {
        let w = &self.working;
        Ok(WorkingModeSpec::new(w.lambda, w.batch.to_law()?, w.service.to_law()?)?)
    }

    pub fn vacation_spec(&self) -> Result<VacationModelSpec, CliError> {
        let spec = match &self.vacation {
            VacationBlock::MultipleVacations {
                lambda_v,
                batch,
                vacation,
            } => VacationModelSpec::MultipleVacations(MultipleVacations {
                lambda_v: *lambda_v,
                batch: batch.to_law()?,
                vacation: vacation.to_law()?,
            }),
            VacationBlock::MarkovianBalking {
                lambda_v,
                admit,
                exit,
                disaster,
                batch,
            } => VacationModelSpec::MarkovianBalking(MarkovianBalking {
                lambda_v: *lambda_v,
                admit: admit.to_sequence(),
                exit: exit.to_sequence(),
                disaster: disaster.to_sequence(),
                batch: batch.to_law()?,
            }),
            VacationBlock::HypergeometricRatio {
                numerator_roots,
                denominator_roots,
                scale,
            } => {
                let c = |v: &Vec<[f64; 2]>| v.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
                VacationModelSpec::HypergeometricRatio(HypergeometricRatio {
                    numerator_roots: c(numerator_roots),
                    denominator_roots: c(denominator_roots),
                    scale: *scale,
                })
            }
            VacationBlock::BinomialReneging {
                lambda_v,
                xi,
                gamma,
                p,
            } => VacationModelSpec::BinomialReneging(BinomialReneging {
                lambda_v: *lambda_v,
                xi: *xi,
                gamma: *gamma,
                p: *p,
            }),
            VacationBlock::DisasterMm1 {
                lambda_v,
                mu_v,
                gamma,
            } => VacationModelSpec::DisasterCoupled(DisasterCoupled::MM1 {
                lambda_v: *lambda_v,
                mu_v: *mu_v,
                gamma: *gamma,
            }),
            VacationBlock::DisasterChainBdp { a, gamma } => {
                VacationModelSpec::DisasterCoupled(DisasterCoupled::ChainBdp {
                    a: *a,
                    gamma: *gamma,
                })
            }
            VacationBlock::DisasterMxg1 {
                lambda_v,
                batch,
                service,
                xi,
                gamma,
            } => VacationModelSpec::DisasterCoupled(DisasterCoupled::MxG1Disaster(MxG1Disaster {
                lambda_v: *lambda_v,
                batch: batch.to_law()?,
                service: service.to_law()?,
                xi: *xi,
                gamma: *gamma,
            })),
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Deserialize)]
struct SummaryScenario {
    scenario: Scenario,
}

impl BatchBlock {
    pub fn to_law(&self) -> Result<BatchLaw, CliError> {
        Ok(match self {
            Self::Point { size } => BatchLaw::finite(Pmf::point(*size))?,
            Self::Uniform { lo, hi } => BatchLaw::finite(Pmf::uniform(*lo, *hi)?)?,
            Self::Pmf { offset, weights } => BatchLaw::finite(Pmf::new(*offset, weights.clone())?)?,
            Self::Geometric { p } => BatchLaw::geometric(*p)?,
        })
    }
}

impl ServiceBlock {
    pub fn to_law(&self) -> Result<ServiceLaw, CliError> {
        Ok(match self {
            Self::Exponential { rate } => ServiceLaw::exponential(*rate)?,
            Self::Erlang { phases, rate } => ServiceLaw::erlang(*phases, *rate)?,
            Self::Deterministic { value } => ServiceLaw::deterministic(*value)?,
            Self::Hyperexponential { weights, rates } => {
                ServiceLaw::hyperexponential(weights.clone(), rates.clone())?
            }
        })
    }
}

impl RateBlock {
    pub fn to_sequence(&self) -> RateSequence {
        match self {
            Self::Constant { value } => RateSequence::Constant(*value),
            Self::Rational {
                numerator,
                denominator,
            } => RateSequence::Rational {
                numerator: numerator.clone(),
                denominator: denominator.clone(),
            },
            Self::Table { values, tail } => RateSequence::Table {
                values: values.clone(),
                tail: *tail,
            },
        }
    }
}
