//! Deviation metric and Monte Carlo validation of the guarantee statements.
//!
//! A guarantee says: with probability at least 1 - delta over the meta-sample
//! draw, the nu-scaled deviation between the empirical and true sides of the
//! meta objective stays at or below alpha. [`estimate_violation`] replays
//! that event over seeded trials and compares the observed violation
//! frequency (through a one-sided 95% Wilson upper bound) against delta.

use crate::env::{sample_meta, Environment, SamplingMode};
use crate::error::{Error, Result};
use crate::hypo::{true_risk, HypothesisFamily};
use crate::learner::{
    env_optimal_loss, meta_train, OuterStrategy, RepresentationLearner,
};
use crate::rng;
use crate::scalar::Scalar;

/// Scaled discrepancy between two nonnegative losses:
///
/// d_nu(a, b) = |a - b| / (nu + a + b)
///
/// Symmetric, zero iff a = b, and always below 1. The guarantee statements
/// compare this deviation against their level alpha; the definition is kept
/// behind this single function so an alternative scaling can be swapped in.
pub fn d_nu<T: Scalar>(a: T, b: T, nu: T) -> Result<T> {
    if !a.is_finite() || !b.is_finite() || a < T::zero() || b < T::zero() {
        return Err(Error::Parameter {
            name: "d_nu inputs",
            reason: "losses must be finite and nonnegative".into(),
        });
    }
    if !nu.is_finite() || nu <= T::zero() {
        return Err(Error::Parameter {
            name: "nu",
            reason: "must be positive".into(),
        });
    }
    // grouping a + b first keeps the value exactly symmetric in (a, b)
    Ok((a - b).abs() / (nu + (a + b)))
}

/// Which guarantee statement a validation run replays.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Theorem {
    /// Fixed task list: rows are drawn from configured tasks; the deviation
    /// compares the trained hypotheses' average empirical loss on the drawn
    /// rows against their average exact risk on those tasks.
    One,
    /// Environment-drawn rows: the deviation compares the learned
    /// representation's empirical meta loss against its environment version.
    Two,
}

/// Inputs for a guarantee validation run.
#[derive(Debug, Clone)]
pub struct GuaranteeConfig<'a, T> {
    pub theorem: Theorem,
    pub env: &'a Environment<T>,
    pub family: &'a HypothesisFamily<T>,
    pub strategy: OuterStrategy,
    pub alpha: T,
    pub nu: T,
    pub delta: T,
    pub n: usize,
    pub m: usize,
    pub trials: usize,
    pub base_seed: u64,
    /// Task list for [`Theorem::One`]; rows cycle through the environment's
    /// tasks when absent. Ignored by [`Theorem::Two`].
    pub fixed_tasks: Option<Vec<usize>>,
}

impl<'a, T: Scalar> GuaranteeConfig<'a, T> {
    fn validate(&self) -> Result<()> {
        if self.trials < 100 {
            return Err(Error::Parameter {
                name: "trials",
                reason: "need at least 100 trials".into(),
            });
        }
        if self.n == 0 || self.m == 0 {
            return Err(Error::Parameter {
                name: "n/m",
                reason: "meta-sample shape must be at least 1 by 1".into(),
            });
        }
        if !self.alpha.is_finite() || self.alpha <= T::zero() {
            return Err(Error::Parameter {
                name: "alpha",
                reason: "must be positive".into(),
            });
        }
        if !self.nu.is_finite() || self.nu <= T::zero() {
            return Err(Error::Parameter {
                name: "nu",
                reason: "must be positive".into(),
            });
        }
        if !self.delta.is_finite() || self.delta <= T::zero() || self.delta >= T::one() {
            return Err(Error::Parameter {
                name: "delta",
                reason: "must lie in (0, 1)".into(),
            });
        }
        if let Some(tasks) = &self.fixed_tasks {
            if tasks.len() != self.n {
                return Err(Error::DimensionMismatch {
                    context: "fixed task list",
                    expected: self.n,
                    got: tasks.len(),
                });
            }
            for &i in tasks {
                if i >= self.env.num_tasks() {
                    return Err(Error::IndexOutOfRange {
                        what: "fixed task",
                        index: i,
                        len: self.env.num_tasks(),
                    });
                }
            }
        }
        Ok(())
    }

    fn fixed_task_list(&self) -> Vec<usize> {
        self.fixed_tasks.clone().unwrap_or_else(|| {
            (0..self.n).map(|i| i % self.env.num_tasks()).collect()
        })
    }
}

/// One replay of the guarantee event.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome<T> {
    pub trial_index: usize,
    pub empirical: T,
    pub true_value: T,
    pub deviation: T,
    pub exceeded: bool,
}

/// Run one seeded trial: draw a meta-sample, meta-train, and measure the
/// deviation between the empirical and true sides of the replayed statement.
pub fn guarantee_trial<T: Scalar>(
    cfg: &GuaranteeConfig<'_, T>,
    trial_index: usize,
) -> Result<TrialOutcome<T>> {
    cfg.validate()?;
    let mut stream = rng::for_trial(cfg.base_seed, trial_index as u64);
    let learner = RepresentationLearner::new(cfg.family);
    let (empirical, true_value) = match cfg.theorem {
        Theorem::One => {
            let tasks = cfg.fixed_task_list();
            let meta = sample_meta(
                cfg.env,
                cfg.n,
                cfg.m,
                SamplingMode::FixedTasks(tasks.clone()),
                &mut stream,
            )?;
            let (mk, trained) = meta_train(&learner, &meta)?;
            let f = cfg.family.rep(mk.rep_index())?;
            let count = T::from_usize(cfg.n).unwrap();
            let empirical = trained
                .iter()
                .fold(T::zero(), |a, t| a + t.empirical_value())
                / count;
            let mut exact = T::zero();
            for (t, &task_index) in trained.iter().zip(&tasks) {
                let g = cfg.family.head(t.head_index())?;
                exact = exact + true_risk(f, g, cfg.family.loss(), cfg.env.task(task_index)?)?;
            }
            (empirical, exact / count)
        }
        Theorem::Two => {
            let meta = sample_meta(
                cfg.env,
                cfg.n,
                cfg.m,
                SamplingMode::EnvironmentDrawn,
                &mut stream,
            )?;
            let (mk, _) = meta_train(&learner, &meta)?;
            let f = cfg.family.rep(mk.rep_index())?;
            (mk.outer_value(), env_optimal_loss(f, cfg.family, cfg.env)?)
        }
    };
    let deviation = d_nu(empirical, true_value, cfg.nu)?;
    Ok(TrialOutcome {
        trial_index,
        empirical,
        true_value,
        deviation,
        exceeded: deviation > cfg.alpha,
    })
}

/// One-sided 95% Wilson score upper bound for a binomial proportion.
///
/// With p = successes / trials and z the 95th standard normal percentile:
/// (p + z^2/2n + z sqrt(p(1-p)/n + z^2/4n^2)) / (1 + z^2/n).
pub fn wilson_upper_95(successes: usize, trials: usize) -> f64 {
    const Z: f64 = 1.644_853_626_951_472_2;
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z * Z;
    let center = p + z2 / (2.0 * n);
    let radius = Z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center + radius) / (1.0 + z2 / n)).min(1.0)
}

/// Aggregate violation statistics over all trials.
#[derive(Debug, Clone, PartialEq)]
pub struct GuaranteeReport {
    pub violations: usize,
    pub trials: usize,
    pub frequency: f64,
    pub wilson_upper_95: f64,
    pub delta: f64,
    pub pass: bool,
}

/// Replay the guarantee event for trials 0..trials with derived seeds and
/// report the violation frequency; pass iff the Wilson upper bound stays at
/// or below delta. Returns the per-trial outcomes alongside the report.
pub fn estimate_violation<T: Scalar>(
    cfg: &GuaranteeConfig<'_, T>,
) -> Result<(GuaranteeReport, Vec<TrialOutcome<T>>)> {
    cfg.validate()?;
    let outcomes = (0..cfg.trials)
        .map(|t| guarantee_trial(cfg, t))
        .collect::<Result<Vec<_>>>()?;
    let violations = outcomes.iter().filter(|o| o.exceeded).count();
    let frequency = violations as f64 / cfg.trials as f64;
    let wilson = wilson_upper_95(violations, cfg.trials);
    let delta = cfg.delta.to_f64().unwrap();
    Ok((
        GuaranteeReport {
            violations,
            trials: cfg.trials,
            frequency,
            wilson_upper_95: wilson,
            delta,
            pass: wilson <= delta,
        },
        outcomes,
    ))
}
