//! Experiment configs: fully self-describing JSON. A config plus the binary
//! version reproduces any output byte for byte.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use mixprior_core::{Component, Hyper, MixturePrior};
use taskgen::{PhiKind, TaskKind, DEFAULT_HIDDEN_DIM};

/// A mixture prior without noise scales; the noise-level sweep fills those
/// in per level.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PriorTemplate {
    pub mixture_weights: Vec<f64>,
    pub input_means: Vec<Vec<f64>>,
    pub weight_centers: Vec<Vec<f64>>,
    #[serde(default)]
    pub strict_unit_norm: bool,
}

impl PriorTemplate {
    pub fn build(&self, hyper: Hyper) -> anyhow::Result<MixturePrior> {
        let comps: Vec<Component> = self
            .mixture_weights
            .iter()
            .zip(self.input_means.iter().zip(&self.weight_centers))
            .map(|(&pi, (mu, w))| {
                Component::new(
                    pi,
                    DVector::from_row_slice(mu),
                    DVector::from_row_slice(w),
                )
            })
            .collect::<Result<_, _>>()?;
        let prior = if self.strict_unit_norm {
            MixturePrior::new_strict(comps, hyper)?
        } else {
            MixturePrior::new(comps, hyper)?
        };
        Ok(prior)
    }
}

/// A full prior including noise scales, for experiments that do not sweep
/// them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PriorSpec {
    #[serde(flatten)]
    pub template: PriorTemplate,
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub sigma_mu: f64,
    pub sigma_w: f64,
}

impl PriorSpec {
    pub fn build(&self) -> anyhow::Result<MixturePrior> {
        let hyper = Hyper::new(self.sigma_x, self.sigma_y, self.sigma_mu, self.sigma_w)?;
        self.template.build(hyper)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TaskSpec {
    pub kind: TaskKind,
    pub dim: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub hidden_dim: Option<usize>,
    pub seed: u64,
}

impl TaskSpec {
    pub fn sample(&self) -> taskgen::Result<taskgen::TaskFunction> {
        let dp = if self.kind.is_network() {
            Some(self.hidden_dim.unwrap_or(DEFAULT_HIDDEN_DIM))
        } else {
            None
        };
        taskgen::sample_task(self.kind, self.dim, dp, self.seed)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DownstreamSpec {
    pub input_mean: Vec<f64>,
    #[serde(default = "one")]
    pub input_std: f64,
    pub task: TaskSpec,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PredictorSpec {
    Gd {
        kind: TaskKind,
        #[serde(default = "default_lr")]
        lr: f64,
        #[serde(default = "default_steps")]
        steps: usize,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        hidden_dim: Option<usize>,
    },
    OlsMinNorm,
    Ridge {
        lambda: f64,
    },
    ClosedForm {
        prior: PriorSpec,
    },
}

fn default_lr() -> f64 {
    1e-3
}
fn default_steps() -> usize {
    1000
}

/// The experiment variants; field sets mirror the module types they drive.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "snake_case")]
pub enum ExperimentConfig {
    /// Low-test-error preference sweep (weight centers differ).
    AlgoselectError(AlgoselectConfig),
    /// Similar-input-distribution preference sweep (input means differ).
    AlgoselectDistance(AlgoselectConfig),
    Curves {
        seed: u64,
        trials: usize,
        t_grid: Vec<usize>,
        task: TaskSpec,
        predictors: Vec<PredictorSpec>,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        output_dir: Option<String>,
    },
    DoubleDescent {
        seed: u64,
        trials: usize,
        t_grid: Vec<usize>,
        dim: usize,
        task_kind: TaskKind,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        output_dir: Option<String>,
    },
    RetrievalEval {
        seed: u64,
        instances: usize,
        n: usize,
        dim: usize,
        context_length: usize,
        s_range: (i64, i64),
        #[serde(default)]
        embedding_seed: u64,
        function_kind: PhiKind,
        estimator_phi: PhiKind,
        lambda: f64,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        output_dir: Option<String>,
    },
    TheoryCheck {
        seed: u64,
        trials: usize,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        output_dir: Option<String>,
    },
    OracleCheck {
        seed: u64,
        instances: usize,
        samples: usize,
        quadrature_instances: usize,
        grid_points: usize,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        output_dir: Option<String>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlgoselectConfig {
    pub seed: u64,
    pub trials: usize,
    pub context_length: usize,
    pub noise_levels: Vec<f64>,
    pub error_samples: usize,
    #[serde(default = "one")]
    pub sigma_x: f64,
    #[serde(default = "one")]
    pub sigma_y: f64,
    pub prior: PriorTemplate,
    pub downstream: DownstreamSpec,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub output_dir: Option<String>,
}

impl ExperimentConfig {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentConfig::AlgoselectError(_) => "algoselect_error",
            ExperimentConfig::AlgoselectDistance(_) => "algoselect_distance",
            ExperimentConfig::Curves { .. } => "curves",
            ExperimentConfig::DoubleDescent { .. } => "double_descent",
            ExperimentConfig::RetrievalEval { .. } => "retrieval_eval",
            ExperimentConfig::TheoryCheck { .. } => "theory_check",
            ExperimentConfig::OracleCheck { .. } => "oracle_check",
        }
    }

    pub fn output_dir(&self) -> Option<&str> {
        match self {
            ExperimentConfig::AlgoselectError(c) | ExperimentConfig::AlgoselectDistance(c) => {
                c.output_dir.as_deref()
            }
            ExperimentConfig::Curves { output_dir, .. }
            | ExperimentConfig::DoubleDescent { output_dir, .. }
            | ExperimentConfig::RetrievalEval { output_dir, .. }
            | ExperimentConfig::TheoryCheck { output_dir, .. }
            | ExperimentConfig::OracleCheck { output_dir, .. } => output_dir.as_deref(),
        }
    }
}

/// Semantic validation on top of the serde schema. Errors block a run;
/// warnings do not.
#[derive(Debug, Default)]
pub struct ValidationReport {
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.errors.is_empty()
    }
}

fn validate_prior_template(prefix: &str, p: &PriorTemplate, report: &mut ValidationReport) {
    let m = p.mixture_weights.len();
    if m == 0 {
        report
            .errors
            .push(format!("{prefix}.mixture_weights: need at least one component"));
        return;
    }
    if p.input_means.len() != m || p.weight_centers.len() != m {
        report.errors.push(format!(
            "{prefix}: mixture_weights ({m}), input_means ({}), weight_centers ({}) must have equal length",
            p.input_means.len(),
            p.weight_centers.len()
        ));
        return;
    }
    let sum: f64 = p.mixture_weights.iter().sum();
    if (sum - 1.0).abs() > mixprior_core::PI_SUM_TOL {
        report.errors.push(format!(
            "{prefix}.mixture_weights: sum {sum} differs from 1 by more than 1e-12"
        ));
    }
    let d = p.input_means[0].len();
    for (i, (mu, w)) in p.input_means.iter().zip(&p.weight_centers).enumerate() {
        if mu.len() != d || w.len() != d {
            report.errors.push(format!(
                "{prefix}: component {i} dims {}/{} differ from {d}",
                mu.len(),
                w.len()
            ));
        }
    }
    if p.strict_unit_norm {
        for (i, (mu, w)) in p.input_means.iter().zip(&p.weight_centers).enumerate() {
            let nm = DVector::from_row_slice(mu).norm();
            let nw = DVector::from_row_slice(w).norm();
            if (nm - 1.0).abs() > mixprior_core::UNIT_NORM_TOL
                || (nw - 1.0).abs() > mixprior_core::UNIT_NORM_TOL
            {
                report.warnings.push(format!(
                    "{prefix}: strict_unit_norm is set but component {i} has ‖mu‖ = {nm:.3}, ‖w‖ = {nw:.3}; the run will reject this prior"
                ));
            }
        }
    }
}

fn require_positive(report: &mut ValidationReport, field: &str, value: f64) {
    if !(value.is_finite() && value > 0.0) {
        report
            .errors
            .push(format!("{field}: must be positive and finite, got {value}"));
    }
}

pub fn validate(config: &ExperimentConfig) -> ValidationReport {
    let mut report = ValidationReport::default();
    match config {
        ExperimentConfig::AlgoselectError(c) | ExperimentConfig::AlgoselectDistance(c) => {
            if c.trials == 0 {
                report.errors.push("trials: must be at least 1".into());
            }
            if c.error_samples == 0 {
                report.errors.push("error_samples: must be at least 1".into());
            }
            if c.noise_levels.is_empty() {
                report.errors.push("noise_levels: must be nonempty".into());
            }
            for (i, &nl) in c.noise_levels.iter().enumerate() {
                require_positive(&mut report, &format!("noise_levels[{i}]"), nl);
            }
            require_positive(&mut report, "sigma_x", c.sigma_x);
            require_positive(&mut report, "sigma_y", c.sigma_y);
            validate_prior_template("prior", &c.prior, &mut report);
            require_positive(&mut report, "downstream.input_std", c.downstream.input_std);
            if !c.prior.input_means.is_empty()
                && c.downstream.input_mean.len() != c.prior.input_means[0].len()
            {
                report.errors.push(format!(
                    "downstream.input_mean: dim {} differs from prior dim {}",
                    c.downstream.input_mean.len(),
                    c.prior.input_means[0].len()
                ));
            }
            if c.downstream.task.dim != c.downstream.input_mean.len() {
                report.errors.push(format!(
                    "downstream.task.dim: {} differs from downstream.input_mean dim {}",
                    c.downstream.task.dim,
                    c.downstream.input_mean.len()
                ));
            }
        }
        ExperimentConfig::Curves {
            trials,
            t_grid,
            task,
            predictors,
            ..
        } => {
            if *trials == 0 {
                report.errors.push("trials: must be at least 1".into());
            }
            if t_grid.is_empty() || t_grid.iter().any(|&t| t == 0) {
                report
                    .errors
                    .push("t_grid: must be nonempty with positive lengths".into());
            }
            if task.dim == 0 {
                report.errors.push("task.dim: must be at least 1".into());
            }
            if predictors.is_empty() {
                report.errors.push("predictors: must be nonempty".into());
            }
            for (i, p) in predictors.iter().enumerate() {
                match p {
                    PredictorSpec::Gd { lr, steps: _, .. } => {
                        require_positive(&mut report, &format!("predictors[{i}].lr"), *lr);
                    }
                    PredictorSpec::Ridge { lambda } => {
                        require_positive(&mut report, &format!("predictors[{i}].lambda"), *lambda);
                    }
                    PredictorSpec::ClosedForm { prior } => {
                        require_positive(
                            &mut report,
                            &format!("predictors[{i}].prior.sigma_x"),
                            prior.sigma_x,
                        );
                        require_positive(
                            &mut report,
                            &format!("predictors[{i}].prior.sigma_y"),
                            prior.sigma_y,
                        );
                        require_positive(
                            &mut report,
                            &format!("predictors[{i}].prior.sigma_mu"),
                            prior.sigma_mu,
                        );
                        require_positive(
                            &mut report,
                            &format!("predictors[{i}].prior.sigma_w"),
                            prior.sigma_w,
                        );
                        validate_prior_template(
                            &format!("predictors[{i}].prior"),
                            &prior.template,
                            &mut report,
                        );
                    }
                    PredictorSpec::OlsMinNorm => {}
                }
            }
        }
        ExperimentConfig::DoubleDescent {
            trials,
            t_grid,
            dim,
            ..
        } => {
            if *trials == 0 {
                report.errors.push("trials: must be at least 1".into());
            }
            if t_grid.is_empty() || t_grid.iter().any(|&t| t == 0) {
                report
                    .errors
                    .push("t_grid: must be nonempty with positive lengths".into());
            }
            if *dim == 0 {
                report.errors.push("dim: must be at least 1".into());
            }
        }
        ExperimentConfig::RetrievalEval {
            instances,
            n,
            dim,
            context_length,
            s_range,
            lambda,
            function_kind,
            ..
        } => {
            if *instances == 0 {
                report.errors.push("instances: must be at least 1".into());
            }
            if *context_length == 0 {
                report.errors.push("context_length: must be at least 1".into());
            }
            require_positive(&mut report, "lambda", *lambda);
            let margin = taskgen::predict_retrieve_margin(*dim, *function_kind);
            if s_range.0 - margin < 0 || s_range.1 + margin >= *n as i64 {
                report.errors.push(format!(
                    "s_range: [{}, {}] with 8-sigma margin {margin} must fit in [0, {n})",
                    s_range.0, s_range.1
                ));
            }
        }
        ExperimentConfig::TheoryCheck { trials, .. } => {
            if *trials == 0 {
                report.errors.push("trials: must be at least 1".into());
            }
        }
        ExperimentConfig::OracleCheck {
            instances,
            samples,
            quadrature_instances: _,
            grid_points,
            ..
        } => {
            if *instances == 0 {
                report.errors.push("instances: must be at least 1".into());
            }
            if *samples < theory_verify::tolerances::MIN_MC_SAMPLES {
                report.errors.push(format!(
                    "samples: must be at least {}",
                    theory_verify::tolerances::MIN_MC_SAMPLES
                ));
            }
            if *grid_points < theory_verify::MIN_GRID_POINTS {
                report.errors.push(format!(
                    "grid_points: must be at least {}",
                    theory_verify::MIN_GRID_POINTS
                ));
            }
        }
    }
    report
}
