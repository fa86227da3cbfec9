//! TOML configuration schema of the command-line tool and its conversion
//! into library types.
//!
//! Matrices are given inline as arrays of rows or as `{ csv = "path" }`,
//! with relative paths resolved against the config file's directory.
//!
//! ```toml
//! [regularizer]
//! kind = "l1"            # l1 | group | nuclear | analysis | tv1d
//!
//! [problem]              # certify: gamma or x, plus beta0
//! gamma = [[1.0, 0.0], [0.0, 1.0]]
//! beta0 = [1.0, 0.0]
//! ```

use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::certificate::Tolerances;
use crate::error::{Error, Result};
use crate::experiments::{ExperimentConfig, ExperimentKind, MuRule, ScreenOptions, Sweep};
use crate::linalg::SymmetricOperator;
use crate::problems::{design_from_covariance, load_matrix_csv, DesignSpec, SignalKind, SignalSpec};
use crate::regularizer::{AnalysisProxOptions, Regularizer};
use crate::solver::{SolveOptions, StepSize};

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixSource {
    Inline(Vec<Vec<f64>>),
    Csv { csv: PathBuf },
}

impl MatrixSource {
    pub fn load(&self, base: &Path) -> Result<DMatrix<f64>> {
        match self {
            MatrixSource::Inline(rows) => {
                let ncols = rows.first().map_or(0, Vec::len);
                if rows.iter().any(|r| r.len() != ncols) {
                    return Err(config_err("inline matrix has ragged rows"));
                }
                Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
            }
            MatrixSource::Csv { csv } => load_matrix_csv(&base.join(csv)),
        }
    }
}

/// Dense `rows × cols` operator, `data` in row-major order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OperatorSource {
    Dense { rows: usize, cols: usize, data: Vec<f64> },
    Csv { csv: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegularizerName {
    L1,
    Group,
    Nuclear,
    Analysis,
    Tv1d,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegularizerSection {
    pub kind: RegularizerName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub groups: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix_shape: Option<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analysis_operator: Option<OperatorSource>,
    /// Ambient dimension for `tv1d`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
}

impl RegularizerSection {
    pub fn build(&self, base: &Path) -> Result<Regularizer> {
        match self.kind {
            RegularizerName::L1 => Ok(Regularizer::L1),
            RegularizerName::Group => {
                let groups = self.groups.clone().ok_or_else(|| config_err("group regularizer needs `groups`"))?;
                Regularizer::group(groups)
            }
            RegularizerName::Nuclear => match self.matrix_shape {
                Some([r, c]) if r == c => Regularizer::nuclear(r),
                Some(_) => Err(config_err("only square matrix_shape is supported")),
                None => Err(config_err("nuclear regularizer needs `matrix_shape`")),
            },
            RegularizerName::Analysis => {
                let d = match &self.analysis_operator {
                    Some(OperatorSource::Dense { rows, cols, data }) => {
                        if rows * cols != data.len() {
                            return Err(config_err(format!(
                                "analysis_operator has {} entries, expected {rows}×{cols}",
                                data.len()
                            )));
                        }
                        DMatrix::from_row_slice(*rows, *cols, data)
                    }
                    Some(OperatorSource::Csv { csv }) => load_matrix_csv(&base.join(csv))?,
                    None => return Err(config_err("analysis regularizer needs `analysis_operator`")),
                };
                Regularizer::analysis(d)
            }
            RegularizerName::Tv1d => {
                Regularizer::total_variation_1d(self.dim.ok_or_else(|| config_err("tv1d needs `dim`"))?)
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    /// Fixed step; `1.8/‖Γ‖` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fp_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace_models: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zero_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analysis_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analysis_max_iter: Option<usize>,
}

impl SolverSection {
    pub fn build(&self) -> SolveOptions {
        let d = SolveOptions::default();
        SolveOptions {
            step: self.step.map_or(StepSize::Auto, StepSize::Fixed),
            max_iter: self.max_iter.unwrap_or(d.max_iter),
            fp_tol: self.fp_tol.unwrap_or(d.fp_tol),
            trace_models: self.trace_models.unwrap_or(d.trace_models),
            zero_tol: self.zero_tol.unwrap_or(d.zero_tol),
            analysis: AnalysisProxOptions {
                tol: self.analysis_tol.unwrap_or(d.analysis.tol),
                max_iter: self.analysis_max_iter.unwrap_or(d.analysis.max_iter),
                ..d.analysis
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DesignSection {
    Explicit {
        matrix: MatrixSource,
    },
    /// Rows `N(0, covariance)`; identity covariance of size `p` when absent.
    GaussianRows {
        n: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        p: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        covariance: Option<MatrixSource>,
    },
    /// Deterministic `n`-row design with `XᵀX/n` equal to `covariance`.
    CovarianceRoot { n: usize, covariance: MatrixSource },
}

fn load_covariance(src: &Option<MatrixSource>, p: Option<usize>, base: &Path) -> Result<SymmetricOperator> {
    match (src, p) {
        (Some(m), _) => {
            let c = SymmetricOperator::new(m.load(base)?)?;
            if p.is_some_and(|p| p != c.dim()) {
                return Err(config_err("design `p` disagrees with the covariance size"));
            }
            Ok(c)
        }
        (None, Some(p)) => Ok(SymmetricOperator::identity(p)),
        (None, None) => Err(config_err("gaussian_rows design needs `p` or `covariance`")),
    }
}

impl DesignSection {
    pub fn build(&self, base: &Path) -> Result<DesignSpec> {
        match self {
            DesignSection::Explicit { matrix } => Ok(DesignSpec::Explicit { matrix: matrix.load(base)? }),
            DesignSection::GaussianRows { n, p, covariance } => {
                Ok(DesignSpec::GaussianRows { covariance: load_covariance(covariance, *p, base)?, n: *n })
            }
            DesignSection::CovarianceRoot { n, covariance } => {
                let cov = SymmetricOperator::new(covariance.load(base)?)?;
                Ok(DesignSpec::Explicit { matrix: design_from_covariance(&cov, *n)? })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SignalShape {
    Explicit { values: Vec<f64> },
    Sparse { support_size: usize },
    /// Uses the regularizer's groups.
    GroupSparse { active_groups: usize },
    LowRank { rank: usize },
    PiecewiseConstant { segments: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalSection {
    #[serde(flatten)]
    pub shape: SignalShape,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_amplitude: Option<f64>,
}

impl SignalSection {
    pub fn build(&self, regularizer: &Regularizer) -> Result<SignalSpec> {
        let kind = match &self.shape {
            SignalShape::Explicit { values } => SignalKind::Explicit(DVector::from_column_slice(values)),
            SignalShape::Sparse { support_size } => SignalKind::Sparse { support_size: *support_size },
            SignalShape::GroupSparse { active_groups } => match regularizer {
                Regularizer::GroupL1L2 { groups } => {
                    SignalKind::GroupSparse { groups: groups.clone(), active_groups: *active_groups }
                }
                _ => return Err(config_err("group_sparse signal needs a group regularizer")),
            },
            SignalShape::LowRank { rank } => SignalKind::LowRank { rank: *rank },
            SignalShape::PiecewiseConstant { segments } => SignalKind::PiecewiseConstant { segments: *segments },
        };
        let d = SignalSpec::new(kind);
        Ok(SignalSpec {
            min_amplitude: self.min_amplitude.unwrap_or(d.min_amplitude),
            max_amplitude: self.max_amplitude.unwrap_or(d.max_amplitude),
            ..d
        })
    }
}

/// Explicit problem data. `certify` needs `beta0` with `gamma` or `x`.
/// `solve` needs the canonical `gamma`/`u`/`mu` or raw `x`/`y` with `lambda`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<MatrixSource>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<MatrixSource>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta0: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    /// Noise level and seed when the instance is generated from
    /// `[design]` and `[signal]`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepSection {
    NoiseLevels(Vec<f64>),
    SampleSizes(Vec<usize>),
    MuValues(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MuRuleSection {
    Fixed {
        mu: f64,
    },
    Proportional {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c: Option<f64>,
    },
    Power {
        #[serde(default = "one")]
        c: f64,
        #[serde(default = "quarter")]
        gamma: f64,
    },
}

fn one() -> f64 {
    1.0
}

fn quarter() -> f64 {
    0.25
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub kind: ExperimentKind,
    pub trials: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub noise_sigma: f64,
    pub sweep: SweepSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_rule: Option<MuRuleSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub screen: Option<ScreenOptions>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub regularizer: RegularizerSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem: Option<ProblemSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub design: Option<DesignSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signal: Option<SignalSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentSection>,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| config_err(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| config_err(e.to_string()))
    }

    /// Reads a config file; the returned path is the base for relative
    /// CSV references.
    pub fn load(path: &Path) -> Result<(Self, PathBuf)> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((Self::parse(&text)?, base))
    }

    pub fn experiment_config(&self, base: &Path) -> Result<ExperimentConfig> {
        let exp = self.experiment.as_ref().ok_or_else(|| config_err("missing [experiment] section"))?;
        let regularizer = self.regularizer.build(base)?;
        let design = self.design.as_ref().ok_or_else(|| config_err("missing [design] section"))?.build(base)?;
        let signal = self.signal.as_ref().ok_or_else(|| config_err("missing [signal] section"))?.build(&regularizer)?;
        let sweep = match &exp.sweep {
            SweepSection::NoiseLevels(v) => Sweep::NoiseLevels(v.clone()),
            SweepSection::SampleSizes(v) => Sweep::SampleSizes(v.clone()),
            SweepSection::MuValues(v) => Sweep::MuValues(v.clone()),
        };
        let mu_rule = match &exp.mu_rule {
            Some(MuRuleSection::Fixed { mu }) => MuRule::Fixed(*mu),
            Some(MuRuleSection::Proportional { c }) => MuRule::Proportional { c: *c },
            Some(MuRuleSection::Power { c, gamma }) => MuRule::Power { c: *c, gamma: *gamma },
            None if exp.kind == ExperimentKind::Consistency => MuRule::DEFAULT_POWER,
            None => MuRule::Proportional { c: None },
        };
        Ok(ExperimentConfig {
            kind: exp.kind,
            regularizer,
            design,
            signal,
            sweep,
            noise_sigma: exp.noise_sigma,
            mu_rule,
            trials: exp.trials,
            base_seed: exp.base_seed,
            solver: self.solver.build(),
            tolerances: self.tolerances,
            screen: exp.screen,
            threads: exp.threads,
        })
    }
}
