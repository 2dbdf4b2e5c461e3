//! Experiment configuration: TOML schema, structural and range validation.
//!
//! `validate_config` parses the full tree, checks every declared range and
//! cross-field constraint, and only returns a config when nothing failed;
//! every error names the offending key.

use std::path::PathBuf;

use serde::Deserialize;

use metalab_core::capacity::{CoverMode, HeadPoint};
use metalab_core::env::{Environment, FiniteTask, LabeledExample};
use metalab_core::hypo::{FamilySpec, GridSpec, HypothesisFamily, LossFn};
use metalab_core::{Environment64, HypothesisFamily64, ProbeMeasure64};

/// What failed during config validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConfigErrorKind {
    Parse,
    UnknownKey,
    Missing,
    Range,
    Constraint,
}

impl ConfigErrorKind {
    fn label(self) -> &'static str {
        match self {
            Self::Parse => "parse",
            Self::UnknownKey => "unknown key",
            Self::Missing => "missing",
            Self::Range => "range",
            Self::Constraint => "constraint",
        }
    }
}

/// One validation failure, naming the offending key.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{key}: {message} ({} error)", kind.label())]
pub struct ConfigError {
    pub kind: ConfigErrorKind,
    pub key: String,
    pub message: String,
}

fn err(kind: ConfigErrorKind, key: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError {
        kind,
        key: key.into(),
        message: message.into(),
    }
}

// ---------------------------------------------------------------------------
// Raw TOML tree
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    kind: String,
    seed: Option<u64>,
    output: Option<String>,
    environment: RawEnvironment,
    target_environment: Option<RawEnvironment>,
    family: RawFamily,
    loss: RawLoss,
    params: Option<RawParams>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEnvironment {
    input_dim: usize,
    tasks: Vec<RawTask>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTask {
    p: f64,
    points: Vec<RawPoint>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPoint {
    x: Vec<f64>,
    y: f64,
    p: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFamily {
    v_dim: usize,
    weight_grid: RawGrid,
    bias_grid: RawGrid,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    lo: f64,
    step: f64,
    count: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLoss {
    kind: Option<String>,
    bound: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    alpha: Option<f64>,
    delta: Option<f64>,
    nu: Option<f64>,
    eps1: Option<f64>,
    eps2: Option<f64>,
    n: Option<usize>,
    m: Option<usize>,
    trials: Option<usize>,
    holdout_fraction: Option<f64>,
    eps_grid: Option<Vec<f64>>,
    eps_split: Option<f64>,
    fixed_tasks: Option<Vec<usize>>,
    probe_spec: Option<RawProbeSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProbeSpec {
    cover: Option<String>,
    extra_head_probes: Option<Vec<RawHeadProbe>>,
    extra_rep_probes: Option<Vec<RawRepProbe>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHeadProbe {
    atoms: Vec<RawHeadAtom>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHeadAtom {
    v: Vec<f64>,
    y: f64,
    p: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRepProbe {
    atoms: Vec<RawPoint>,
}

// ---------------------------------------------------------------------------
// Resolved configuration
// ---------------------------------------------------------------------------

/// Cover mode requested in config; `Auto` resolves per space size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoverChoice {
    Exact,
    Greedy,
    Auto,
}

impl CoverChoice {
    /// Exact search where it is allowed, greedy beyond the exact-cover cap.
    pub fn resolve(self, points: usize) -> CoverMode {
        match self {
            Self::Exact => CoverMode::Exact,
            Self::Greedy => CoverMode::Greedy,
            Self::Auto => {
                if points <= metalab_core::capacity::EXACT_COVER_MAX_POINTS {
                    CoverMode::Exact
                } else {
                    CoverMode::Greedy
                }
            }
        }
    }
}

/// Probe family settings: the standard single-atom plus uniform-pair probes
/// are always generated; extras from the config are appended.
#[derive(Debug, Clone)]
pub struct ProbeSettings {
    pub cover: CoverChoice,
    pub extra_head: Vec<ProbeMeasure64>,
    pub extra_rep: Vec<ProbeMeasure64>,
}

impl Default for ProbeSettings {
    fn default() -> Self {
        Self {
            cover: CoverChoice::Auto,
            extra_head: Vec::new(),
            extra_rep: Vec::new(),
        }
    }
}

/// Kind-specific experiment payload.
#[derive(Debug, Clone)]
pub enum ExperimentKind {
    MetaTrainEval {
        n: usize,
        m: usize,
        holdout_fraction: f64,
        target_env: Option<Environment64>,
    },
    CapacityTable {
        eps_grid: Vec<f64>,
        probes: ProbeSettings,
    },
    BoundsTable {
        alpha: f64,
        delta: f64,
        nu: f64,
        eps_split: f64,
        n: usize,
        probes: ProbeSettings,
    },
    ValidateThm1 {
        alpha: f64,
        nu: f64,
        delta: f64,
        n: usize,
        m: usize,
        trials: usize,
        fixed_tasks: Option<Vec<usize>>,
    },
    ValidateThm2 {
        alpha: f64,
        nu: f64,
        delta: f64,
        n: usize,
        m: usize,
        trials: usize,
    },
    TransferRisk {
        n: usize,
        m: usize,
        trials: usize,
    },
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::MetaTrainEval { .. } => "meta_train_eval",
            Self::CapacityTable { .. } => "capacity_table",
            Self::BoundsTable { .. } => "bounds_table",
            Self::ValidateThm1 { .. } => "validate_thm1",
            Self::ValidateThm2 { .. } => "validate_thm2",
            Self::TransferRisk { .. } => "transfer_risk",
        }
    }
}

/// A fully validated experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub env: Environment64,
    pub family: HypothesisFamily64,
    pub config_text: String,
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

fn classify_toml_error(e: toml::de::Error) -> ConfigError {
    let message = e.message().to_string();
    let kind = if message.contains("unknown field") {
        ConfigErrorKind::UnknownKey
    } else if message.contains("missing field") {
        ConfigErrorKind::Missing
    } else {
        ConfigErrorKind::Parse
    };
    err(kind, "(document)", message)
}

fn build_env(
    raw: &RawEnvironment,
    key: &str,
    errors: &mut Vec<ConfigError>,
) -> Option<Environment64> {
    let mut tasks = Vec::new();
    for (ti, task) in raw.tasks.iter().enumerate() {
        let mut support = Vec::new();
        let mut ok = true;
        for (pi, point) in task.points.iter().enumerate() {
            match LabeledExample::new(point.x.clone(), point.y) {
                Ok(z) => support.push((z, point.p)),
                Err(e) => {
                    errors.push(err(
                        ConfigErrorKind::Range,
                        format!("{key}.tasks[{ti}].points[{pi}]"),
                        e.to_string(),
                    ));
                    ok = false;
                }
            }
        }
        if !ok {
            continue;
        }
        match FiniteTask::new(support) {
            Ok(t) => tasks.push((t, task.p)),
            Err(e) => errors.push(err(
                ConfigErrorKind::Range,
                format!("{key}.tasks[{ti}]"),
                e.to_string(),
            )),
        }
    }
    if tasks.len() != raw.tasks.len() {
        return None;
    }
    match Environment::new(raw.input_dim, tasks) {
        Ok(env) => Some(env),
        Err(e) => {
            errors.push(err(ConfigErrorKind::Range, key, e.to_string()));
            None
        }
    }
}

fn build_family(
    raw: &RawFamily,
    loss: &RawLoss,
    input_dim: usize,
    errors: &mut Vec<ConfigError>,
) -> Option<HypothesisFamily64> {
    if let Some(kind) = &loss.kind {
        if kind != "clipped_squared" {
            errors.push(err(
                ConfigErrorKind::Range,
                "loss.kind",
                format!("unsupported loss kind `{kind}`; expected `clipped_squared`"),
            ));
            return None;
        }
    }
    let loss_fn = match LossFn::clipped_squared(loss.bound) {
        Ok(l) => l,
        Err(e) => {
            errors.push(err(ConfigErrorKind::Range, "loss.bound", e.to_string()));
            return None;
        }
    };
    let weight_grid = match GridSpec::new(raw.weight_grid.lo, raw.weight_grid.step, raw.weight_grid.count)
    {
        Ok(g) => g,
        Err(e) => {
            errors.push(err(ConfigErrorKind::Range, "family.weight_grid", e.to_string()));
            return None;
        }
    };
    let bias_grid = match GridSpec::new(raw.bias_grid.lo, raw.bias_grid.step, raw.bias_grid.count) {
        Ok(g) => g,
        Err(e) => {
            errors.push(err(ConfigErrorKind::Range, "family.bias_grid", e.to_string()));
            return None;
        }
    };
    match HypothesisFamily::enumerate(&FamilySpec {
        input_dim,
        v_dim: raw.v_dim,
        weight_grid,
        bias_grid,
        loss: loss_fn,
    }) {
        Ok(f) => Some(f),
        Err(e) => {
            errors.push(err(ConfigErrorKind::Range, "family", e.to_string()));
            None
        }
    }
}

fn build_probes(raw: Option<&RawProbeSpec>, errors: &mut Vec<ConfigError>) -> ProbeSettings {
    let mut settings = ProbeSettings::default();
    let Some(raw) = raw else {
        return settings;
    };
    if let Some(cover) = &raw.cover {
        settings.cover = match cover.as_str() {
            "exact" => CoverChoice::Exact,
            "greedy" => CoverChoice::Greedy,
            "auto" => CoverChoice::Auto,
            other => {
                errors.push(err(
                    ConfigErrorKind::Range,
                    "params.probe_spec.cover",
                    format!("unknown cover mode `{other}`; expected exact, greedy, or auto"),
                ));
                CoverChoice::Auto
            }
        };
    }
    for (i, probe) in raw.extra_head_probes.iter().flatten().enumerate() {
        let atoms = probe
            .atoms
            .iter()
            .map(|a| {
                (
                    HeadPoint {
                        v: a.v.clone(),
                        y: a.y,
                    },
                    a.p,
                )
            })
            .collect();
        match ProbeMeasure64::head_space(atoms) {
            Ok(p) => settings.extra_head.push(p),
            Err(e) => errors.push(err(
                ConfigErrorKind::Range,
                format!("params.probe_spec.extra_head_probes[{i}]"),
                e.to_string(),
            )),
        }
    }
    for (i, probe) in raw.extra_rep_probes.iter().flatten().enumerate() {
        let mut atoms = Vec::new();
        let mut ok = true;
        for (j, a) in probe.atoms.iter().enumerate() {
            match LabeledExample::new(a.x.clone(), a.y) {
                Ok(z) => atoms.push((z, a.p)),
                Err(e) => {
                    errors.push(err(
                        ConfigErrorKind::Range,
                        format!("params.probe_spec.extra_rep_probes[{i}].atoms[{j}]"),
                        e.to_string(),
                    ));
                    ok = false;
                }
            }
        }
        if !ok {
            continue;
        }
        match ProbeMeasure64::rep_space(atoms) {
            Ok(p) => settings.extra_rep.push(p),
            Err(e) => errors.push(err(
                ConfigErrorKind::Range,
                format!("params.probe_spec.extra_rep_probes[{i}]"),
                e.to_string(),
            )),
        }
    }
    settings
}

struct RangeChecker<'a> {
    errors: &'a mut Vec<ConfigError>,
}

impl RangeChecker<'_> {
    fn open_unit(&mut self, key: &str, v: Option<f64>) {
        if let Some(v) = v {
            if !v.is_finite() || v <= 0.0 || v >= 1.0 {
                self.errors.push(err(
                    ConfigErrorKind::Range,
                    format!("params.{key}"),
                    format!("{v} outside the declared range (0, 1)"),
                ));
            }
        }
    }

    fn positive(&mut self, key: &str, v: Option<f64>) {
        if let Some(v) = v {
            if !v.is_finite() || v <= 0.0 {
                self.errors.push(err(
                    ConfigErrorKind::Range,
                    format!("params.{key}"),
                    format!("{v} must be positive"),
                ));
            }
        }
    }

    fn at_least(&mut self, key: &str, v: Option<usize>, min: usize) {
        if let Some(v) = v {
            if v < min {
                self.errors.push(err(
                    ConfigErrorKind::Range,
                    format!("params.{key}"),
                    format!("{v} must be at least {min}"),
                ));
            }
        }
    }
}

fn require<T: Clone>(
    v: &Option<T>,
    key: &str,
    kind: &str,
    errors: &mut Vec<ConfigError>,
) -> Option<T> {
    if v.is_none() {
        errors.push(err(
            ConfigErrorKind::Missing,
            format!("params.{key}"),
            format!("required for kind {kind}"),
        ));
    }
    v.clone()
}

/// Radius identity eps1 + eps2 = alpha * nu / divisor, checked when both
/// radii are present.
fn check_eps_identity(
    p: &RawParams,
    divisor: f64,
    errors: &mut Vec<ConfigError>,
) {
    let (Some(eps1), Some(eps2)) = (p.eps1, p.eps2) else {
        if p.eps1.is_some() != p.eps2.is_some() {
            errors.push(err(
                ConfigErrorKind::Missing,
                "params.eps1/eps2",
                "eps1 and eps2 must be given together",
            ));
        }
        return;
    };
    let (Some(alpha), Some(nu)) = (p.alpha, p.nu) else {
        return; // presence errors reported separately
    };
    let want = alpha * nu / divisor;
    if (eps1 + eps2 - want).abs() > metalab_core::capacity::EPS_CONSTRAINT_TOL {
        errors.push(err(
            ConfigErrorKind::Constraint,
            "params.eps1/eps2",
            format!(
                "eps1 + eps2 = {} must equal alpha*nu/{divisor} = {want}",
                eps1 + eps2
            ),
        ));
    }
}

const KINDS: &str =
    "meta_train_eval, capacity_table, bounds_table, validate_thm1, validate_thm2, transfer_risk";

/// Trial count used when the config leaves it out.
pub const DEFAULT_TRIALS: usize = 1000;
/// Meta-sample shape used by meta_train_eval and transfer_risk when absent.
pub const DEFAULT_N: usize = 8;
pub const DEFAULT_M: usize = 8;

/// Parse and fully validate a config document. Returns either a resolved
/// config (defaults filled) or every collected error.
pub fn validate_config(text: &str) -> Result<ExperimentConfig, Vec<ConfigError>> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| vec![classify_toml_error(e)])?;
    let mut errors = Vec::new();

    let env = build_env(&raw.environment, "environment", &mut errors);
    let target_env = raw
        .target_environment
        .as_ref()
        .and_then(|t| build_env(t, "target_environment", &mut errors));
    if let (Some(env), Some(target)) = (&env, &target_env) {
        if target.input_dim() != env.input_dim() {
            errors.push(err(
                ConfigErrorKind::Constraint,
                "target_environment.input_dim",
                format!(
                    "target input dimension {} differs from source {}",
                    target.input_dim(),
                    env.input_dim()
                ),
            ));
        }
    }
    let family = build_family(&raw.family, &raw.loss, raw.environment.input_dim, &mut errors);

    let p = raw.params.unwrap_or_default();
    {
        let mut check = RangeChecker { errors: &mut errors };
        check.open_unit("alpha", p.alpha);
        check.open_unit("delta", p.delta);
        check.positive("nu", p.nu);
        check.positive("eps1", p.eps1);
        check.positive("eps2", p.eps2);
        check.open_unit("eps_split", p.eps_split);
        check.at_least("n", p.n, 1);
        check.at_least("m", p.m, 1);
        check.at_least("trials", p.trials, 2);
        if let Some(h) = p.holdout_fraction {
            if !h.is_finite() || !(0.0..1.0).contains(&h) {
                check.errors.push(err(
                    ConfigErrorKind::Range,
                    "params.holdout_fraction",
                    format!("{h} outside the declared range [0, 1)"),
                ));
            }
        }
        if let Some(grid) = &p.eps_grid {
            if grid.is_empty() {
                check.errors.push(err(
                    ConfigErrorKind::Range,
                    "params.eps_grid",
                    "must hold at least one radius",
                ));
            }
            for (i, e) in grid.iter().enumerate() {
                if !e.is_finite() || *e <= 0.0 {
                    check.errors.push(err(
                        ConfigErrorKind::Range,
                        format!("params.eps_grid[{i}]"),
                        format!("{e} must be positive"),
                    ));
                }
            }
        }
    }
    if p.fixed_tasks.is_some() && raw.kind != "validate_thm1" {
        errors.push(err(
            ConfigErrorKind::Constraint,
            "params.fixed_tasks",
            "only valid for kind validate_thm1",
        ));
    }
    if target_env.is_some() && raw.kind != "meta_train_eval" {
        errors.push(err(
            ConfigErrorKind::Constraint,
            "target_environment",
            "only valid for kind meta_train_eval",
        ));
    }

    let probes = build_probes(p.probe_spec.as_ref(), &mut errors);

    let kind = match raw.kind.as_str() {
        "meta_train_eval" => Some(ExperimentKind::MetaTrainEval {
            n: p.n.unwrap_or(DEFAULT_N),
            m: p.m.unwrap_or(DEFAULT_M),
            holdout_fraction: p.holdout_fraction.unwrap_or(0.0),
            target_env: target_env.clone(),
        }),
        "capacity_table" => {
            let eps_grid = require(&p.eps_grid, "eps_grid", "capacity_table", &mut errors);
            eps_grid.map(|eps_grid| ExperimentKind::CapacityTable {
                eps_grid,
                probes: probes.clone(),
            })
        }
        "bounds_table" => {
            let alpha = require(&p.alpha, "alpha", "bounds_table", &mut errors);
            let delta = require(&p.delta, "delta", "bounds_table", &mut errors);
            let nu = require(&p.nu, "nu", "bounds_table", &mut errors);
            match (alpha, delta, nu) {
                (Some(alpha), Some(delta), Some(nu)) => Some(ExperimentKind::BoundsTable {
                    alpha,
                    delta,
                    nu,
                    eps_split: p.eps_split.unwrap_or(0.5),
                    n: p.n.unwrap_or(1),
                    probes: probes.clone(),
                }),
                _ => None,
            }
        }
        "validate_thm1" | "validate_thm2" => {
            let kname = raw.kind.as_str();
            let alpha = require(&p.alpha, "alpha", kname, &mut errors);
            let nu = require(&p.nu, "nu", kname, &mut errors);
            let delta = require(&p.delta, "delta", kname, &mut errors);
            let n = require(&p.n, "n", kname, &mut errors);
            let m = require(&p.m, "m", kname, &mut errors);
            let trials = p.trials.unwrap_or(DEFAULT_TRIALS);
            if trials < 100 {
                errors.push(err(
                    ConfigErrorKind::Range,
                    "params.trials",
                    format!("{trials} must be at least 100 for guarantee validation"),
                ));
            }
            check_eps_identity(&p, if kname == "validate_thm1" { 8.0 } else { 16.0 }, &mut errors);
            match (alpha, nu, delta, n, m) {
                (Some(alpha), Some(nu), Some(delta), Some(n), Some(m)) => {
                    if kname == "validate_thm1" {
                        if let Some(tasks) = &p.fixed_tasks {
                            if tasks.len() != n {
                                errors.push(err(
                                    ConfigErrorKind::Constraint,
                                    "params.fixed_tasks",
                                    format!("must list exactly n = {n} task indices"),
                                ));
                            }
                        }
                        Some(ExperimentKind::ValidateThm1 {
                            alpha,
                            nu,
                            delta,
                            n,
                            m,
                            trials,
                            fixed_tasks: p.fixed_tasks.clone(),
                        })
                    } else {
                        Some(ExperimentKind::ValidateThm2 {
                            alpha,
                            nu,
                            delta,
                            n,
                            m,
                            trials,
                        })
                    }
                }
                _ => None,
            }
        }
        "transfer_risk" => Some(ExperimentKind::TransferRisk {
            n: p.n.unwrap_or(DEFAULT_N),
            m: p.m.unwrap_or(DEFAULT_M),
            trials: p.trials.unwrap_or(DEFAULT_TRIALS),
        }),
        other => {
            errors.push(err(
                ConfigErrorKind::Range,
                "kind",
                format!("unknown kind `{other}`; expected one of: {KINDS}"),
            ));
            None
        }
    };

    match (kind, env, family, errors.is_empty()) {
        (Some(kind), Some(env), Some(family), true) => Ok(ExperimentConfig {
            kind,
            seed: raw.seed,
            output: raw.output.map(PathBuf::from),
            env,
            family,
            config_text: text.to_string(),
        }),
        _ => Err(errors),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
kind = "meta_train_eval"

[environment]
input_dim = 1
[[environment.tasks]]
p = 1.0
points = [ { x = [1.0], y = 1.0, p = 0.5 }, { x = [-1.0], y = -1.0, p = 0.5 } ]

[family]
v_dim = 1
weight_grid = { lo = -1.0, step = 1.0, count = 3 }
bias_grid = { lo = 0.0, step = 1.0, count = 1 }

[loss]
bound = 1.0
"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = validate_config(MINIMAL).unwrap();
        match cfg.kind {
            ExperimentKind::MetaTrainEval {
                n,
                m,
                holdout_fraction,
                target_env,
            } => {
                assert_eq!((n, m), (DEFAULT_N, DEFAULT_M));
                assert_eq!(holdout_fraction, 0.0);
                assert!(target_env.is_none());
            }
            other => panic!("wrong kind {other:?}"),
        }
        assert_eq!(cfg.seed, None);
        assert_eq!(cfg.family.heads().len(), 3);
    }

    #[test]
    fn alpha_out_of_range_names_the_key() {
        let text = format!("{MINIMAL}\n[params]\nalpha = 1.5\n");
        let errs = validate_config(&text).unwrap_err();
        assert!(errs
            .iter()
            .any(|e| e.key == "params.alpha" && e.kind == ConfigErrorKind::Range));
    }

    #[test]
    fn eps_identity_violation_cites_the_identity() {
        let text = MINIMAL.replace("meta_train_eval", "validate_thm1")
            + "\n[params]\nalpha = 0.5\nnu = 1.0\ndelta = 0.1\nn = 1\nm = 4\neps1 = 0.5\neps2 = 0.5\n";
        let errs = validate_config(&text).unwrap_err();
        let e = errs
            .iter()
            .find(|e| e.kind == ConfigErrorKind::Constraint)
            .expect("constraint error");
        assert_eq!(e.key, "params.eps1/eps2");
        assert!(e.message.contains("alpha*nu/8"), "{}", e.message);
    }

    #[test]
    fn matching_eps_identity_accepted() {
        let text = MINIMAL.replace("meta_train_eval", "validate_thm1")
            + "\n[params]\nalpha = 0.5\nnu = 1.0\ndelta = 0.1\nn = 1\nm = 4\neps1 = 0.03125\neps2 = 0.03125\n";
        assert!(validate_config(&text).is_ok());
    }

    #[test]
    fn unknown_key_reported() {
        let text = format!("{MINIMAL}\nbogus = 1\n");
        let errs = validate_config(&text).unwrap_err();
        assert_eq!(errs[0].kind, ConfigErrorKind::UnknownKey);
    }

    #[test]
    fn missing_required_field_reported() {
        let text = MINIMAL.replace("meta_train_eval", "validate_thm2");
        let errs = validate_config(&text).unwrap_err();
        assert!(errs.iter().all(|e| e.kind == ConfigErrorKind::Missing));
        let keys: Vec<_> = errs.iter().map(|e| e.key.as_str()).collect();
        for want in ["params.alpha", "params.nu", "params.delta", "params.n", "params.m"] {
            assert!(keys.contains(&want), "missing {want} in {keys:?}");
        }
    }

    #[test]
    fn bad_probabilities_name_the_task() {
        let text = MINIMAL.replace("p = 0.5 }", "p = 0.6 }");
        let errs = validate_config(&text).unwrap_err();
        assert!(errs[0].key.starts_with("environment.tasks[0]"), "{errs:?}");
    }

    #[test]
    fn parse_error_reported_as_parse() {
        let errs = validate_config("kind = [unterminated").unwrap_err();
        assert_eq!(errs[0].kind, ConfigErrorKind::Parse);
    }

    #[test]
    fn multiple_errors_collected() {
        let text = MINIMAL.replace("meta_train_eval", "validate_thm2")
            + "\n[params]\nalpha = 1.5\nnu = -1.0\ndelta = 0.1\nn = 2\nm = 2\n";
        let errs = validate_config(&text).unwrap_err();
        assert!(errs.len() >= 2, "{errs:?}");
    }
}
