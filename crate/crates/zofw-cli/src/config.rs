//! TOML experiment configuration and the builders that turn it into
//! objectives, constraint sets, and solver configurations.
//!
//! Defaults that the config may omit (all printed by `run`):
//! * branch probability `p`: `sample_size / n` on convex tasks
//!   (logistic, quadratic), `1 / sqrt(n)` on non-convex tasks;
//! * `sample_size`: 1 on convex tasks, `round(sqrt(n))` otherwise;
//! * directions `b`: 1 on convex tasks, `round(sqrt(d))` otherwise;
//! * step schedule: `two_phase` (convex) / `inv_sqrt` (non-convex) for
//!   the variance-reduced solver, `harmonic` for the baselines;
//! * radius schedule: `gamma_scaled` (convex) / `horizon` (non-convex),
//!   `constant` 1e-5 for the baselines;
//! * `q` and `batch` for the epoch baseline: `ceil(sqrt(n))`.

use serde::Deserialize;
use std::path::{Path, PathBuf};
use zofw::constraints::{ConstraintSet, L1Ball, L2Ball};
use zofw::data::{parse_libsvm, scale_features_maxabs, scale_labels_pm1, Dataset};
use zofw::numerics::{DenseVector, GaussianSampler};
use zofw::objectives::{
    parse_attack_model, synth_logistic, CorrentropyObjective, FiniteSumObjective,
    LogisticObjective, QuadraticObjective, Smoothness, SoftmaxAttackObjective, WhiteBoxObjective,
};
use zofw::solvers::{GammaSchedule, MuSchedule, SolverConfig};

use crate::AppError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunFile {
    pub task: Task,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub trace_every: Option<usize>,
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default)]
    pub dataset: Option<DatasetCfg>,
    pub constraint: ConstraintCfg,
    pub solver: SolverCfg,
    #[serde(default)]
    pub quadratic: Option<QuadraticCfg>,
    #[serde(default)]
    pub attack: Option<AttackCfg>,
    #[serde(default)]
    pub pgd: PgdCfg,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareFile {
    pub task: Task,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub trace_every: Option<usize>,
    #[serde(default)]
    pub dataset: Option<DatasetCfg>,
    pub constraint: ConstraintCfg,
    pub solvers: Vec<SolverCfg>,
    #[serde(default)]
    pub quadratic: Option<QuadraticCfg>,
    #[serde(default)]
    pub attack: Option<AttackCfg>,
    #[serde(default)]
    pub pgd: PgdCfg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Logistic,
    Correntropy,
    Attack,
    Quadratic,
}

impl Task {
    pub fn is_convex(self) -> bool {
        matches!(self, Task::Logistic | Task::Quadratic)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetCfg {
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub declared_d: Option<usize>,
    #[serde(default)]
    pub synth: Option<SynthCfg>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthCfg {
    pub n: usize,
    pub d: usize,
    #[serde(default = "one")]
    pub sparsity: f64,
    #[serde(default)]
    pub label_noise: f64,
    #[serde(default = "synth_seed")]
    pub seed: u64,
    #[serde(default = "one")]
    pub feature_scale: f64,
}

fn one() -> f64 {
    1.0
}

fn synth_seed() -> u64 {
    42
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintCfg {
    pub kind: ConstraintKind,
    pub r: f64,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    L1,
    L2,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverCfg {
    pub kind: SolverKind,
    #[serde(default)]
    pub name: Option<String>,
    pub t_iters: usize,
    #[serde(default)]
    pub p: Option<f64>,
    #[serde(default)]
    pub b: Option<usize>,
    #[serde(default)]
    pub sample_size: Option<usize>,
    #[serde(default)]
    pub batch: Option<usize>,
    #[serde(default)]
    pub q: Option<usize>,
    #[serde(default)]
    pub gamma: Option<GammaKind>,
    #[serde(default)]
    pub lr: Option<f64>,
    #[serde(default)]
    pub gamma_constant: Option<f64>,
    #[serde(default)]
    pub mu: Option<MuKind>,
    #[serde(default)]
    pub mu0: Option<f64>,
    #[serde(default)]
    pub record_gap: bool,
    #[serde(default)]
    pub query_budget: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    ZsfwDvr,
    Zofwgd,
    Zofwsgd,
    AccSzofw,
}

impl SolverKind {
    pub fn label(self) -> &'static str {
        match self {
            SolverKind::ZsfwDvr => "zsfw_dvr",
            SolverKind::Zofwgd => "zofwgd",
            SolverKind::Zofwsgd => "zofwsgd",
            SolverKind::AccSzofw => "acc_szofw",
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaKind {
    TwoPhase,
    InvSqrt,
    Harmonic,
    Constant,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MuKind {
    GammaScaled,
    Horizon,
    Constant,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadraticCfg {
    pub a: f64,
    pub n: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackCfg {
    pub model: PathBuf,
    pub images: PathBuf,
    #[serde(default)]
    pub checkpoint_every: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PgdCfg {
    #[serde(default = "default_true")]
    pub enabled: bool,
    #[serde(default = "pgd_iters")]
    pub iters: usize,
    #[serde(default = "pgd_lr")]
    pub lr: f64,
}

impl Default for PgdCfg {
    fn default() -> Self {
        PgdCfg { enabled: true, iters: pgd_iters(), lr: pgd_lr() }
    }
}

fn default_true() -> bool {
    true
}

fn pgd_iters() -> usize {
    10_000
}

fn pgd_lr() -> f64 {
    0.5
}

pub fn load_toml<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, AppError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| AppError::Config(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| AppError::Config(format!("{}: {e}", path.display())))
}

/// A fully built task objective; owns its data.
pub enum BuiltObjective {
    Logistic(LogisticObjective),
    Correntropy(CorrentropyObjective),
    Quadratic(QuadraticObjective),
    Attack(SoftmaxAttackObjective),
}

impl BuiltObjective {
    pub fn as_finite(&self) -> &dyn FiniteSumObjective {
        match self {
            BuiltObjective::Logistic(o) => o,
            BuiltObjective::Correntropy(o) => o,
            BuiltObjective::Quadratic(o) => o,
            BuiltObjective::Attack(o) => o,
        }
    }

    pub fn as_whitebox(&self) -> &dyn WhiteBoxObjective {
        match self {
            BuiltObjective::Logistic(o) => o,
            BuiltObjective::Correntropy(o) => o,
            BuiltObjective::Quadratic(o) => o,
            BuiltObjective::Attack(o) => o,
        }
    }

    pub fn smoothness(&self) -> Smoothness {
        self.as_whitebox().smoothness()
    }

    pub fn attack(&self) -> Option<&SoftmaxAttackObjective> {
        match self {
            BuiltObjective::Attack(o) => Some(o),
            _ => None,
        }
    }
}

fn load_dataset(cfg: &DatasetCfg, scale_features: bool) -> Result<Dataset, AppError> {
    let ds = match (&cfg.path, &cfg.synth) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                AppError::Config(format!("cannot read dataset {}: {e}", path.display()))
            })?;
            let mut ds = parse_libsvm(&text, cfg.declared_d)
                .map_err(|e| AppError::Config(format!("{}: {e}", path.display())))?;
            ds.name = path.display().to_string();
            ds
        }
        (None, Some(sy)) => {
            let mut sampler = GaussianSampler::new(sy.seed);
            let (mut ds, _) = synth_logistic(sy.n, sy.d, sy.sparsity, sy.label_noise, &mut sampler);
            if sy.feature_scale != 1.0 {
                for row in &mut ds.rows {
                    let vals: Vec<f64> = row.values().iter().map(|v| v * sy.feature_scale).collect();
                    *row = zofw::numerics::SparseVector::new(row.indices().to_vec(), vals);
                }
            }
            ds
        }
        _ => {
            return Err(AppError::Config(
                "dataset: provide exactly one of `path` or `synth`".into(),
            ))
        }
    };
    Ok(if scale_features { scale_features_maxabs(&ds) } else { ds })
}

pub fn build_objective(
    task: Task,
    dataset: &Option<DatasetCfg>,
    quadratic: &Option<QuadraticCfg>,
    attack: &Option<AttackCfg>,
    scale_features: bool,
) -> Result<BuiltObjective, AppError> {
    match task {
        Task::Logistic => {
            let cfg = dataset.as_ref().ok_or_else(|| AppError::Config("task logistic needs [dataset]".into()))?;
            let ds = load_dataset(cfg, scale_features)?;
            let ds = scale_labels_pm1(&ds).map_err(|e| AppError::Config(e.to_string()))?;
            Ok(BuiltObjective::Logistic(
                LogisticObjective::new(ds).map_err(|e| AppError::Config(e.to_string()))?,
            ))
        }
        Task::Correntropy => {
            let cfg = dataset.as_ref().ok_or_else(|| AppError::Config("task correntropy needs [dataset]".into()))?;
            let ds = load_dataset(cfg, scale_features)?;
            Ok(BuiltObjective::Correntropy(
                CorrentropyObjective::new(ds).map_err(|e| AppError::Config(e.to_string()))?,
            ))
        }
        Task::Quadratic => {
            let cfg = quadratic.as_ref().ok_or_else(|| AppError::Config("task quadratic needs [quadratic]".into()))?;
            Ok(BuiltObjective::Quadratic(QuadraticObjective::new(cfg.a, cfg.n)))
        }
        Task::Attack => {
            let cfg = attack.as_ref().ok_or_else(|| AppError::Config("task attack needs [attack]".into()))?;
            let model_text = std::fs::read_to_string(&cfg.model).map_err(|e| {
                AppError::Config(format!("cannot read attack model {}: {e}", cfg.model.display()))
            })?;
            let model = parse_attack_model(&model_text)
                .map_err(|e| AppError::Config(format!("{}: {e}", cfg.model.display())))?;
            let images_text = std::fs::read_to_string(&cfg.images).map_err(|e| {
                AppError::Config(format!("cannot read attack images {}: {e}", cfg.images.display()))
            })?;
            let ds = parse_libsvm(&images_text, Some(model.dim))
                .map_err(|e| AppError::Config(format!("{}: {e}", cfg.images.display())))?;
            let mut labels = Vec::with_capacity(ds.len());
            for &l in &ds.labels {
                if l.fract() != 0.0 || l < 0.0 || l as usize >= model.classes {
                    return Err(AppError::Config(format!(
                        "attack image label {l} is not a class index below {}",
                        model.classes
                    )));
                }
                labels.push(l as usize);
            }
            let images: Vec<DenseVector> = ds
                .rows
                .iter()
                .map(|r| {
                    let mut v = vec![0.0; model.dim];
                    for (i, val) in r.iter() {
                        v[i] = val;
                    }
                    DenseVector::from_vec(v)
                })
                .collect();
            Ok(BuiltObjective::Attack(
                SoftmaxAttackObjective::new(model, images, labels)
                    .map_err(|e| AppError::Config(e.to_string()))?,
            ))
        }
    }
}

pub fn build_constraint(cfg: &ConstraintCfg) -> Result<Box<dyn ConstraintSet + Sync>, AppError> {
    if cfg.r <= 0.0 {
        return Err(AppError::Config(format!("constraint.r must be positive, got {}", cfg.r)));
    }
    Ok(match cfg.kind {
        ConstraintKind::L1 => Box::new(L1Ball::new(cfg.r)),
        ConstraintKind::L2 => Box::new(L2Ball::new(cfg.r)),
    })
}

/// Resolved, printable solver parameters.
pub struct ResolvedSolver {
    pub kind: SolverKind,
    pub name: String,
    pub config: SolverConfig,
    pub batch: usize,
    pub q: usize,
}

pub fn resolve_solver(
    cfg: &SolverCfg,
    task: Task,
    obj: &BuiltObjective,
    set: &dyn ConstraintSet,
    seed: u64,
    trace_every: usize,
) -> Result<ResolvedSolver, AppError> {
    let n = obj.as_finite().num_components();
    let d = obj.as_finite().dim();
    let convex = task.is_convex();
    let is_dvr = cfg.kind == SolverKind::ZsfwDvr;

    let sample_size = cfg.sample_size.unwrap_or(if convex { 1 } else { (n as f64).sqrt().round().max(1.0) as usize });
    if sample_size == 0 || sample_size > n {
        return Err(AppError::Config(format!("solver.sample_size must be in [1, {n}]")));
    }
    let p = cfg
        .p
        .unwrap_or(if convex { sample_size as f64 / n as f64 } else { 1.0 / (n as f64).sqrt() });
    if !(p > 0.0 && p <= 1.0) {
        return Err(AppError::Config(format!("solver.p must be in (0, 1], got {p}")));
    }
    let b = cfg.b.unwrap_or(if convex || !is_dvr { 1 } else { (d as f64).sqrt().round().max(1.0) as usize });
    if b == 0 {
        return Err(AppError::Config("solver.b must be at least 1".into()));
    }
    if cfg.t_iters == 0 {
        return Err(AppError::Config("solver.t_iters must be at least 1".into()));
    }

    let gamma_kind = cfg.gamma.unwrap_or(match (is_dvr, convex) {
        (true, true) => GammaKind::TwoPhase,
        (true, false) => GammaKind::InvSqrt,
        (false, _) => GammaKind::Harmonic,
    });
    let gamma = match gamma_kind {
        GammaKind::TwoPhase => GammaSchedule::two_phase(p, b, d, cfg.t_iters),
        GammaKind::InvSqrt => GammaSchedule::inv_sqrt(cfg.t_iters),
        GammaKind::Harmonic => GammaSchedule::harmonic(cfg.lr.unwrap_or(1.0)),
        GammaKind::Constant => {
            let g = cfg.gamma_constant.ok_or_else(|| {
                AppError::Config("gamma = \"constant\" needs solver.gamma_constant".into())
            })?;
            if !(0.0..=1.0).contains(&g) {
                return Err(AppError::Config(format!("solver.gamma_constant must be in [0, 1], got {g}")));
            }
            GammaSchedule::constant(g)
        }
    };

    let mu_kind = cfg.mu.unwrap_or(match (is_dvr, convex) {
        (true, true) => MuKind::GammaScaled,
        (true, false) => MuKind::Horizon,
        (false, _) => MuKind::Constant,
    });
    let mu = match mu_kind {
        MuKind::GammaScaled => {
            let sm = obj.smoothness();
            MuSchedule::gamma_scaled(sm.l_full, sm.l_hat, set.diameter(), p, sample_size, d)
        }
        MuKind::Horizon => MuSchedule::horizon_scaled(set.diameter(), p, sample_size, d, cfg.t_iters),
        MuKind::Constant => {
            let mu0 = cfg.mu0.unwrap_or(1e-5);
            if mu0 < zofw::estimators::MU_FLOOR {
                return Err(AppError::Config(format!(
                    "solver.mu0 must be at least {}",
                    zofw::estimators::MU_FLOOR
                )));
            }
            MuSchedule::constant(mu0)
        }
    };

    let q = cfg.q.unwrap_or((n as f64).sqrt().ceil() as usize).max(1);
    let batch = cfg.batch.unwrap_or(q).max(1);

    Ok(ResolvedSolver {
        kind: cfg.kind,
        name: cfg.name.clone().unwrap_or_else(|| cfg.kind.label().to_string()),
        config: SolverConfig {
            p,
            b,
            sample_size,
            t_iters: cfg.t_iters,
            seed,
            gamma,
            mu,
            record_gap: cfg.record_gap,
            trace_every,
            query_budget: cfg.query_budget,
        },
        batch,
        q,
    })
}
