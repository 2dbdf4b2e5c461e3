//! Experiment dispatch: build the pipeline for a validated config, write
//! deterministic CSV payloads plus a JSON run report, and surface the
//! pass/fail outcome for guarantee validations.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use metalab_core::capacity::{
    head_capacity, head_probe_points, rep_capacity, rep_probe_points, standard_head_probes,
    standard_rep_probes, BoundParams, CoverMode,
};
use metalab_core::env::{sample_m, sample_meta, SamplingMode};
use metalab_core::hypo::true_risk;
use metalab_core::learner::{
    env_optimal_loss, meta_test, meta_train_holdout, transfer_risk, RepresentationLearner,
};
use metalab_core::validate::{estimate_violation, GuaranteeConfig, Theorem};
use metalab_core::{learner::OuterStrategy, rng, Environment64, HypothesisFamily64, ProbeMeasure64};

use crate::config::{ExperimentConfig, ExperimentKind, ProbeSettings};

/// Failures after configuration was accepted.
#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("io error at {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] metalab_core::Error),
}

/// Invocation-level settings resolved from flags, config, and environment.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub seed: u64,
    pub output_dir: PathBuf,
    pub trials_override: Option<usize>,
}

/// Everything a run leaves behind besides its CSV payloads.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub kind: String,
    pub seed: u64,
    pub config_hash: String,
    pub duration_secs: f64,
    pub outputs: Vec<String>,
    pub summary: serde_json::Value,
    /// Guarantee outcome for the validate kinds, absent otherwise.
    pub pass: Option<bool>,
    pub config: String,
}

/// Content hash of the raw config text (SHA-256, hex).
pub fn config_hash(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    let mut hex = String::with_capacity(64);
    for byte in digest {
        let _ = write!(hex, "{byte:02x}");
    }
    hex
}

fn write_file(dir: &Path, name: &str, content: &str) -> Result<(), ExperimentError> {
    let path = dir.join(name);
    std::fs::write(&path, content).map_err(|source| ExperimentError::Io { path, source })
}

fn csv(header: &str, rows: &[String]) -> String {
    let mut out = String::with_capacity(header.len() + 1 + rows.iter().map(|r| r.len() + 1).sum::<usize>());
    out.push_str(header);
    out.push('\n');
    for row in rows {
        out.push_str(row);
        out.push('\n');
    }
    out
}

struct Emitted {
    files: Vec<(String, String)>,
    summary: serde_json::Value,
    pass: Option<bool>,
}

/// Run the experiment and write its CSV payloads, summary, and report.json
/// under the output directory. Deterministic given the seed: re-running an
/// identical config produces byte-identical CSV files.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    opts: &RunOptions,
) -> Result<RunReport, ExperimentError> {
    let started = Instant::now();
    let emitted = match &cfg.kind {
        ExperimentKind::MetaTrainEval {
            n,
            m,
            holdout_fraction,
            target_env,
        } => meta_train_eval(cfg, opts, *n, *m, *holdout_fraction, target_env.as_ref())?,
        ExperimentKind::CapacityTable { eps_grid, probes } => {
            capacity_table(cfg, eps_grid, probes)?
        }
        ExperimentKind::BoundsTable {
            alpha,
            delta,
            nu,
            eps_split,
            n,
            probes,
        } => bounds_table(cfg, *alpha, *delta, *nu, *eps_split, *n, probes)?,
        ExperimentKind::ValidateThm1 {
            alpha,
            nu,
            delta,
            n,
            m,
            trials,
            fixed_tasks,
        } => validate_theorem(
            cfg,
            opts,
            Theorem::One,
            *alpha,
            *nu,
            *delta,
            *n,
            *m,
            opts.trials_override.unwrap_or(*trials),
            fixed_tasks.clone(),
        )?,
        ExperimentKind::ValidateThm2 {
            alpha,
            nu,
            delta,
            n,
            m,
            trials,
        } => validate_theorem(
            cfg,
            opts,
            Theorem::Two,
            *alpha,
            *nu,
            *delta,
            *n,
            *m,
            opts.trials_override.unwrap_or(*trials),
            None,
        )?,
        ExperimentKind::TransferRisk { n, m, trials } => {
            transfer_table(cfg, opts, *n, *m, opts.trials_override.unwrap_or(*trials))?
        }
    };

    std::fs::create_dir_all(&opts.output_dir).map_err(|source| ExperimentError::Io {
        path: opts.output_dir.clone(),
        source,
    })?;
    let mut outputs = Vec::new();
    for (name, content) in &emitted.files {
        write_file(&opts.output_dir, name, content)?;
        outputs.push(name.clone());
    }
    let report = RunReport {
        kind: cfg.kind.name().to_string(),
        seed: opts.seed,
        config_hash: config_hash(&cfg.config_text),
        duration_secs: started.elapsed().as_secs_f64(),
        outputs,
        summary: emitted.summary,
        pass: emitted.pass,
        config: cfg.config_text.clone(),
    };
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    write_file(&opts.output_dir, "report.json", &(json + "\n"))?;
    Ok(report)
}

fn meta_train_eval(
    cfg: &ExperimentConfig,
    opts: &RunOptions,
    n: usize,
    m: usize,
    holdout_fraction: f64,
    target_env: Option<&Environment64>,
) -> Result<Emitted, ExperimentError> {
    let mut stream = rng::from_seed(opts.seed);
    let meta = sample_meta(&cfg.env, n, m, SamplingMode::EnvironmentDrawn, &mut stream)?;
    let learner = RepresentationLearner::new(&cfg.family);
    let (mk, trained) = meta_train_holdout(&learner, &meta, holdout_fraction)?;
    let f = cfg.family.rep(mk.rep_index())?;
    let env_opt = env_optimal_loss(f, &cfg.family, &cfg.env)?;

    let train_rows: Vec<String> = meta
        .rows()
        .iter()
        .zip(&trained)
        .enumerate()
        .map(|(i, (row, t))| {
            format!(
                "{i},{},{},{}",
                row.origin_task_index().map_or(String::new(), |o| o.to_string()),
                t.head_index(),
                t.empirical_value()
            )
        })
        .collect();

    let mut files = vec![(
        "train.csv".to_string(),
        csv("row_index,origin_task,head_index,empirical_value", &train_rows),
    )];

    let mut mean_target = None;
    if let Some(target) = target_env {
        let mut rows = Vec::new();
        let mut total = 0.0;
        for (ti, (task, _)) in target.tasks().iter().enumerate() {
            let sample = sample_m(task, m, &mut stream)?;
            let t = meta_test(&mk, &cfg.family, &sample)?;
            let risk = true_risk(f, cfg.family.head(t.head_index())?, cfg.family.loss(), task)?;
            total += risk;
            rows.push(format!(
                "{ti},{},{},{risk}",
                t.head_index(),
                t.empirical_value()
            ));
        }
        mean_target = Some(total / target.num_tasks() as f64);
        files.push((
            "target.csv".to_string(),
            csv("task_index,head_index,empirical_value,true_risk", &rows),
        ));
    }

    let summary_row = format!(
        "{},{},{env_opt},{}",
        mk.rep_index(),
        mk.outer_value(),
        mean_target.map_or(String::new(), |v| v.to_string())
    );
    files.push((
        "summary.csv".to_string(),
        csv(
            "rep_index,outer_value,env_optimal_loss,mean_target_true_risk",
            &[summary_row],
        ),
    ));

    Ok(Emitted {
        files,
        summary: serde_json::json!({
            "rep_index": mk.rep_index(),
            "outer_value": mk.outer_value(),
            "env_optimal_loss": env_opt,
            "mean_target_true_risk": mean_target,
            "n": n,
            "m": m,
            "holdout_fraction": holdout_fraction,
        }),
        pass: None,
    })
}

/// The standard probe families for the configured environment plus any
/// config-supplied extras.
fn assemble_probes(
    env: &Environment64,
    family: &HypothesisFamily64,
    settings: &ProbeSettings,
) -> Result<(Vec<ProbeMeasure64>, Vec<ProbeMeasure64>), metalab_core::Error> {
    let mut head = standard_head_probes(&head_probe_points(env, family)?)?;
    head.extend(settings.extra_head.iter().cloned());
    let mut rep = standard_rep_probes(&rep_probe_points(env))?;
    rep.extend(settings.extra_rep.iter().cloned());
    Ok((head, rep))
}

fn mode_name(mode: CoverMode) -> &'static str {
    match mode {
        CoverMode::Exact => "exact",
        CoverMode::Greedy => "greedy",
    }
}

fn capacity_table(
    cfg: &ExperimentConfig,
    eps_grid: &[f64],
    probes: &ProbeSettings,
) -> Result<Emitted, ExperimentError> {
    let (head_probes, rep_probes) = assemble_probes(&cfg.env, &cfg.family, probes)?;
    let head_mode = probes.cover.resolve(cfg.family.heads().len());
    let rep_mode = probes.cover.resolve(cfg.family.reps().len());

    let mut head_rows = Vec::new();
    let mut rep_rows = Vec::new();
    for &eps in eps_grid {
        let c = head_capacity(&cfg.family, eps, &head_probes, head_mode)?;
        head_rows.push(format!(
            "{eps},{},{},{c}",
            head_probes.len(),
            mode_name(head_mode)
        ));
        let c = rep_capacity(&cfg.family, eps, &rep_probes, rep_mode)?;
        rep_rows.push(format!(
            "{eps},{},{},{c}",
            rep_probes.len(),
            mode_name(rep_mode)
        ));
    }

    let files = vec![
        (
            "capacity_heads.csv".to_string(),
            csv("eps,probe_count,cover_mode,value", &head_rows),
        ),
        (
            "capacity_reps.csv".to_string(),
            csv("eps,probe_count,cover_mode,value", &rep_rows),
        ),
    ];
    Ok(Emitted {
        files,
        summary: serde_json::json!({
            "heads": cfg.family.heads().len(),
            "reps": cfg.family.reps().len(),
            "head_probes": head_probes.len(),
            "rep_probes": rep_probes.len(),
            "eps_grid": eps_grid,
        }),
        pass: None,
    })
}

/// Capacities feeding the bound formulas, computed from the probe families
/// at the radii the formulas pair together.
struct ProbeCapacities {
    eps1: f64,
    eps2: f64,
    cap_heads: usize,
    cap_reps: usize,
    cap_reps_coarse: usize,
}

fn probe_capacities(
    cfg: &ExperimentConfig,
    probes: &ProbeSettings,
    alpha: f64,
    nu: f64,
    divisor: f64,
    eps_split: f64,
) -> Result<ProbeCapacities, metalab_core::Error> {
    let (head_probes, rep_probes) = assemble_probes(&cfg.env, &cfg.family, probes)?;
    let head_mode = probes.cover.resolve(cfg.family.heads().len());
    let rep_mode = probes.cover.resolve(cfg.family.reps().len());
    let radius = alpha * nu / divisor;
    let eps1 = eps_split * radius;
    let eps2 = radius - eps1;
    Ok(ProbeCapacities {
        eps1,
        eps2,
        cap_heads: head_capacity(&cfg.family, eps1, &head_probes, head_mode)?,
        cap_reps: rep_capacity(&cfg.family, eps2, &rep_probes, rep_mode)?,
        cap_reps_coarse: rep_capacity(&cfg.family, radius, &rep_probes, rep_mode)?,
    })
}

fn bounds_table(
    cfg: &ExperimentConfig,
    alpha: f64,
    delta: f64,
    nu: f64,
    eps_split: f64,
    n: usize,
    probes: &ProbeSettings,
) -> Result<Emitted, ExperimentError> {
    let m_bound = cfg.family.loss().bound();

    let c1 = probe_capacities(cfg, probes, alpha, nu, 8.0, eps_split)?;
    let params1 = BoundParams {
        loss_bound: m_bound,
        alpha,
        delta,
        nu,
        eps1: c1.eps1,
        eps2: c1.eps2,
        n,
        cap_heads: c1.cap_heads,
        cap_reps: c1.cap_reps,
        cap_reps_coarse: None,
    };
    let m1 = metalab_core::capacity::theorem1_m(&params1)?;

    let c2 = probe_capacities(cfg, probes, alpha, nu, 16.0, eps_split)?;
    let params2 = BoundParams {
        loss_bound: m_bound,
        alpha,
        delta,
        nu,
        eps1: c2.eps1,
        eps2: c2.eps2,
        n,
        cap_heads: c2.cap_heads,
        cap_reps: c2.cap_reps,
        cap_reps_coarse: Some(c2.cap_reps_coarse),
    };
    let (n2, m2) = metalab_core::capacity::theorem2_nm(&params2)?;

    let rows = vec![
        format!(
            "one,{m_bound},{alpha},{delta},{nu},{},{},{},{},,{n},{m1}",
            c1.eps1, c1.eps2, c1.cap_heads, c1.cap_reps
        ),
        format!(
            "two,{m_bound},{alpha},{delta},{nu},{},{},{},{},{},{n2},{m2}",
            c2.eps1, c2.eps2, c2.cap_heads, c2.cap_reps, c2.cap_reps_coarse
        ),
    ];
    let files = vec![
        (
            "bounds.csv".to_string(),
            csv(
                "theorem,loss_bound,alpha,delta,nu,eps1,eps2,cap_heads,cap_reps,cap_reps_coarse,n,m",
                &rows,
            ),
        ),
        (
            "summary.csv".to_string(),
            csv("thm1_m,thm2_n,thm2_m", &[format!("{m1},{n2},{m2}")]),
        ),
    ];
    Ok(Emitted {
        files,
        summary: serde_json::json!({
            "thm1_m": m1,
            "thm2_n": n2,
            "thm2_m": m2,
            "thm1_caps": [c1.cap_heads, c1.cap_reps],
            "thm2_caps": [c2.cap_heads, c2.cap_reps, c2.cap_reps_coarse],
        }),
        pass: None,
    })
}

#[allow(clippy::too_many_arguments)]
fn validate_theorem(
    cfg: &ExperimentConfig,
    opts: &RunOptions,
    theorem: Theorem,
    alpha: f64,
    nu: f64,
    delta: f64,
    n: usize,
    m: usize,
    trials: usize,
    fixed_tasks: Option<Vec<usize>>,
) -> Result<Emitted, ExperimentError> {
    let gcfg = GuaranteeConfig {
        theorem,
        env: &cfg.env,
        family: &cfg.family,
        strategy: OuterStrategy::ExhaustiveOuter,
        alpha,
        nu,
        delta,
        n,
        m,
        trials,
        base_seed: opts.seed,
        fixed_tasks,
    };
    let (report, outcomes) = estimate_violation(&gcfg)?;

    let trial_rows: Vec<String> = outcomes
        .iter()
        .map(|o| {
            format!(
                "{},{},{},{},{}",
                o.trial_index, o.empirical, o.true_value, o.deviation, o.exceeded
            )
        })
        .collect();
    let summary_row = format!(
        "{},{},{},{},{},{}",
        report.violations,
        report.trials,
        report.frequency,
        report.wilson_upper_95,
        report.delta,
        report.pass
    );
    let files = vec![
        (
            "trials.csv".to_string(),
            csv(
                "trial_index,empirical_value,true_value,deviation,exceeded",
                &trial_rows,
            ),
        ),
        (
            "summary.csv".to_string(),
            csv(
                "violations,trials,frequency,wilson_upper_95,delta,pass",
                &[summary_row],
            ),
        ),
    ];
    Ok(Emitted {
        files,
        summary: serde_json::json!({
            "violations": report.violations,
            "trials": report.trials,
            "frequency": report.frequency,
            "wilson_upper_95": report.wilson_upper_95,
            "delta": report.delta,
            "pass": report.pass,
            "n": n,
            "m": m,
        }),
        pass: Some(report.pass),
    })
}

fn transfer_table(
    cfg: &ExperimentConfig,
    opts: &RunOptions,
    n: usize,
    m: usize,
    trials: usize,
) -> Result<Emitted, ExperimentError> {
    let mut stream = rng::from_seed(opts.seed);
    let meta = sample_meta(&cfg.env, n, m, SamplingMode::EnvironmentDrawn, &mut stream)?;
    let learner = RepresentationLearner::new(&cfg.family);
    let (mk, _) = metalab_core::learner::meta_train(&learner, &meta)?;

    // paired trials: every representation sees the same task and sample draws
    let base_seed = opts.seed.wrapping_add(1);
    let mut rows = Vec::new();
    let mut worst: Option<(usize, f64)> = None;
    let mut learned_estimate = 0.0;
    for f in cfg.family.reps() {
        let (estimate, std_error) = transfer_risk(&cfg.family, f, &cfg.env, m, trials, base_seed)?;
        let learned = f.index() == mk.rep_index();
        if learned {
            learned_estimate = estimate;
        }
        if worst.is_none_or(|(_, w)| estimate > w) {
            worst = Some((f.index(), estimate));
        }
        rows.push(format!("{},{learned},{estimate},{std_error}", f.index()));
    }
    let (worst_index, worst_estimate) = worst.expect("nonempty family");

    let files = vec![
        (
            "transfer.csv".to_string(),
            csv("rep_index,learned,estimate,std_error", &rows),
        ),
        (
            "summary.csv".to_string(),
            csv(
                "learned_rep_index,learned_estimate,worst_rep_index,worst_estimate",
                &[format!(
                    "{},{learned_estimate},{worst_index},{worst_estimate}",
                    mk.rep_index()
                )],
            ),
        ),
    ];
    Ok(Emitted {
        files,
        summary: serde_json::json!({
            "learned_rep_index": mk.rep_index(),
            "learned_estimate": learned_estimate,
            "worst_rep_index": worst_index,
            "worst_estimate": worst_estimate,
            "n": n,
            "m": m,
            "trials": trials,
        }),
        pass: None,
    })
}
