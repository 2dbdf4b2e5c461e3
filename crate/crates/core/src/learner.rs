//! The bi-level loop: outer minimization over representations, inner
//! minimization over heads per task, meta-testing on target samples, and
//! Monte Carlo transfer-risk estimation.

use crate::env::{sample_m, sample_task, Environment, MetaSample, TaskSample};
use crate::error::{Error, Result};
use crate::hypo::{
    empirical_risk_points, inner_minimize_points, true_risk, HypothesisFamily, Representation,
};
use crate::rng;
use crate::scalar::Scalar;

/// The learned how-to-learn component: the chosen representation together
/// with the attained outer objective value.
#[derive(Debug, Clone, PartialEq)]
pub struct MetaKnowledge<T> {
    rep_index: usize,
    outer_value: T,
}

impl<T: Scalar> MetaKnowledge<T> {
    pub fn rep_index(&self) -> usize {
        self.rep_index
    }

    pub fn outer_value(&self) -> T {
        self.outer_value
    }
}

/// One task's trained head and the empirical value it attained.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedTask<T> {
    head_index: usize,
    empirical_value: T,
}

impl<T: Scalar> TrainedTask<T> {
    pub fn head_index(&self) -> usize {
        self.head_index
    }

    pub fn empirical_value(&self) -> T {
        self.empirical_value
    }
}

/// Outer-minimization strategies. Only the exhaustive scan over the finite
/// representation enumeration is implemented.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OuterStrategy {
    ExhaustiveOuter,
}

/// Maps meta-samples to representations by exhaustively scanning the family.
#[derive(Debug, Clone)]
pub struct RepresentationLearner<'a, T> {
    family: &'a HypothesisFamily<T>,
    strategy: OuterStrategy,
}

impl<'a, T: Scalar> RepresentationLearner<'a, T> {
    pub fn new(family: &'a HypothesisFamily<T>) -> Self {
        Self {
            family,
            strategy: OuterStrategy::ExhaustiveOuter,
        }
    }

    pub fn family(&self) -> &'a HypothesisFamily<T> {
        self.family
    }

    pub fn strategy(&self) -> OuterStrategy {
        self.strategy
    }
}

/// Split a row for holdout training: heads are fit on the leading part and
/// scored on the trailing `floor(fraction * m)` points. A zero fraction
/// scores on the training points themselves.
fn split_row<T: Scalar>(
    row: &TaskSample<T>,
    fraction: f64,
) -> (&[crate::env::LabeledExample<T>], &[crate::env::LabeledExample<T>]) {
    let m = row.len();
    let holdout = (fraction * m as f64).floor() as usize;
    let cut = m - holdout;
    let points = row.examples();
    if holdout == 0 {
        (points, points)
    } else {
        (&points[..cut], &points[cut..])
    }
}

/// Average over rows of the per-row head fit/score pair for one candidate
/// representation.
fn scan_rows<T: Scalar>(
    f: &Representation,
    family: &HypothesisFamily<T>,
    meta: &MetaSample<T>,
    holdout_fraction: f64,
) -> Result<(T, Vec<TrainedTask<T>>)> {
    let mut rows = Vec::with_capacity(meta.n());
    let mut total = T::zero();
    for row in meta.rows() {
        let (train, eval) = split_row(row, holdout_fraction);
        let (head_index, _) = inner_minimize_points(f, family, train)?;
        let value = empirical_risk_points(f, family.head(head_index)?, family.loss(), eval)?;
        total = total + value;
        rows.push(TrainedTask {
            head_index,
            empirical_value: value,
        });
    }
    Ok((total / T::from_usize(meta.n()).unwrap(), rows))
}

/// Bi-level meta-training: for every candidate representation, fit each row's
/// head by inner minimization and average the attained values; return the
/// minimizing representation (lowest index on ties) with its per-row heads.
pub fn meta_train<T: Scalar>(
    learner: &RepresentationLearner<'_, T>,
    meta: &MetaSample<T>,
) -> Result<(MetaKnowledge<T>, Vec<TrainedTask<T>>)> {
    meta_train_holdout(learner, meta, 0.0)
}

/// [`meta_train`] with an optional per-row holdout: with a positive fraction
/// the inner fit uses the leading points of each row and the outer average
/// uses the held-out tail.
pub fn meta_train_holdout<T: Scalar>(
    learner: &RepresentationLearner<'_, T>,
    meta: &MetaSample<T>,
    holdout_fraction: f64,
) -> Result<(MetaKnowledge<T>, Vec<TrainedTask<T>>)> {
    if !(0.0..1.0).contains(&holdout_fraction) {
        return Err(Error::Parameter {
            name: "holdout_fraction",
            reason: "must lie in [0, 1)".into(),
        });
    }
    let OuterStrategy::ExhaustiveOuter = learner.strategy();
    let family = learner.family();
    let mut best: Option<(MetaKnowledge<T>, Vec<TrainedTask<T>>)> = None;
    for f in family.reps() {
        let (outer_value, rows) = scan_rows(f, family, meta, holdout_fraction)?;
        // strict comparison keeps the lowest representation index on ties
        if best.as_ref().is_none_or(|(mk, _)| outer_value < mk.outer_value) {
            best = Some((
                MetaKnowledge {
                    rep_index: f.index(),
                    outer_value,
                },
                rows,
            ));
        }
    }
    best.ok_or(Error::Empty("representation enumeration"))
}

/// Train a target task with the learned representation frozen.
pub fn meta_test<T: Scalar>(
    mk: &MetaKnowledge<T>,
    family: &HypothesisFamily<T>,
    target_sample: &TaskSample<T>,
) -> Result<TrainedTask<T>> {
    let f = family.rep(mk.rep_index())?;
    let (head_index, empirical_value) = inner_minimize_points(f, family, target_sample.examples())?;
    Ok(TrainedTask {
        head_index,
        empirical_value,
    })
}

/// Average over rows of the best-head empirical loss under a fixed
/// representation: (1/n) sum_i min_g <loss of g . f>_{row i}.
pub fn empirical_meta_loss<T: Scalar>(
    f: &Representation,
    family: &HypothesisFamily<T>,
    meta: &MetaSample<T>,
) -> Result<T> {
    let mut total = T::zero();
    for row in meta.rows() {
        let (_, value) = inner_minimize_points(f, family, row.examples())?;
        total = total + value;
    }
    Ok(total / T::from_usize(meta.n()).unwrap())
}

/// Environment version of the meta loss: the task-probability-weighted sum of
/// per-task best-head true risks under a fixed representation. Exact.
pub fn env_optimal_loss<T: Scalar>(
    f: &Representation,
    family: &HypothesisFamily<T>,
    env: &Environment<T>,
) -> Result<T> {
    let mut total = T::zero();
    for (task, p) in env.tasks() {
        let mut best: Option<T> = None;
        for g in family.heads() {
            let r = true_risk(f, g, family.loss(), task)?;
            if best.is_none_or(|b| r < b) {
                best = Some(r);
            }
        }
        total = total + *p * best.ok_or(Error::Empty("head enumeration"))?;
    }
    Ok(total)
}

/// Monte Carlo estimate of the transfer risk of the inner minimizer under a
/// fixed representation: draw a task, draw an m-sample, train the head, and
/// score the exact true risk; average over trials.
///
/// Trial t uses the stream derived from `base_seed + t`, so estimates for
/// different representations at the same seed are paired draw for draw.
/// Returns (estimate, standard error of the mean).
pub fn transfer_risk<T: Scalar>(
    family: &HypothesisFamily<T>,
    f: &Representation,
    env: &Environment<T>,
    m: usize,
    trials: usize,
    base_seed: u64,
) -> Result<(T, T)> {
    if trials < 2 {
        return Err(Error::Parameter {
            name: "trials",
            reason: "need at least 2 trials for a standard error".into(),
        });
    }
    let mut values = Vec::with_capacity(trials);
    for t in 0..trials {
        let mut stream = rng::for_trial(base_seed, t as u64);
        let task_index = sample_task(env, &mut stream);
        let task = env.task(task_index)?;
        let sample = sample_m(task, m, &mut stream)?;
        let (head_index, _) = inner_minimize_points(f, family, sample.examples())?;
        values.push(true_risk(f, family.head(head_index)?, family.loss(), task)?);
    }
    let k = T::from_usize(trials).unwrap();
    let mean = values.iter().fold(T::zero(), |a, &v| a + v) / k;
    let var = values
        .iter()
        .fold(T::zero(), |a, &v| a + (v - mean) * (v - mean))
        / T::from_usize(trials - 1).unwrap();
    Ok((mean, (var / k).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{
        relevant_coordinate_env, sample_meta, FiniteTask, LabeledExample, SamplingMode,
    };
    use crate::hypo::{FamilySpec, GridSpec, LossFn};
    use crate::rng;

    fn ex(x: Vec<f64>, y: f64) -> LabeledExample<f64> {
        LabeledExample::new(x, y).unwrap()
    }

    fn grid_family(input_dim: usize) -> HypothesisFamily<f64> {
        HypothesisFamily::enumerate(&FamilySpec {
            input_dim,
            v_dim: 1,
            weight_grid: GridSpec::new(-1.0, 1.0, 3).unwrap(),
            bias_grid: GridSpec::new(0.0, 1.0, 1).unwrap(),
            loss: LossFn::clipped_squared(1.0).unwrap(),
        })
        .unwrap()
    }

    fn single_head_family(weight: f64) -> HypothesisFamily<f64> {
        HypothesisFamily::enumerate(&FamilySpec {
            input_dim: 1,
            v_dim: 1,
            weight_grid: GridSpec::new(weight, 1.0, 1).unwrap(),
            bias_grid: GridSpec::new(0.0, 1.0, 1).unwrap(),
            loss: LossFn::clipped_squared(1.0).unwrap(),
        })
        .unwrap()
    }

    #[test]
    fn meta_train_single_row_reduces_to_inner_minimize() {
        let family = grid_family(2);
        let learner = RepresentationLearner::new(&family);
        let row = TaskSample::new(vec![ex(vec![1.0, -1.0], 1.0)], None).unwrap();
        let meta = MetaSample::new(vec![row.clone()], SamplingMode::EnvironmentDrawn).unwrap();
        let (mk, rows) = meta_train(&learner, &meta).unwrap();
        let mut want: Option<(usize, f64)> = None;
        for f in family.reps() {
            let (_, v) = crate::hypo::inner_minimize(f, &family, &row).unwrap();
            if want.is_none_or(|(_, wv)| v < wv) {
                want = Some((f.index(), v));
            }
        }
        assert_eq!(Some((mk.rep_index(), mk.outer_value())), want);
        assert_eq!(rows.len(), 1);
    }

    #[test]
    fn meta_train_selects_relevant_coordinate() {
        let env = relevant_coordinate_env(3, 1, &[1.0, -1.0], 0.0).unwrap();
        let family = grid_family(3);
        let learner = RepresentationLearner::new(&family);
        let meta = sample_meta(
            &env,
            6,
            4,
            SamplingMode::EnvironmentDrawn,
            &mut rng::from_seed(21),
        )
        .unwrap();
        let (mk, rows) = meta_train(&learner, &meta).unwrap();
        assert_eq!(family.rep(mk.rep_index()).unwrap().coords(), &[1]);
        assert_eq!(mk.outer_value(), 0.0);
        for (row, trained) in meta.rows().iter().zip(&rows) {
            assert_eq!(trained.empirical_value(), 0.0);
            // the trained head reproduces every label in its row
            let f = family.rep(mk.rep_index()).unwrap();
            let g = family.head(trained.head_index()).unwrap();
            for z in row.examples() {
                assert_eq!(crate::hypo::predict(f, g, z.x()).unwrap(), z.y());
            }
        }
    }

    #[test]
    fn meta_train_identical_rows_attain_zero() {
        let family = grid_family(1);
        let learner = RepresentationLearner::new(&family);
        let row = TaskSample::new(vec![ex(vec![1.0], 1.0), ex(vec![-1.0], -1.0)], None).unwrap();
        for n in [1usize, 3, 5] {
            let meta =
                MetaSample::new(vec![row.clone(); n], SamplingMode::EnvironmentDrawn).unwrap();
            let (mk, _) = meta_train(&learner, &meta).unwrap();
            assert_eq!(mk.outer_value(), 0.0);
        }
    }

    #[test]
    fn meta_train_outer_value_matches_per_rep_meta_loss() {
        let family = grid_family(2);
        let learner = RepresentationLearner::new(&family);
        let env = relevant_coordinate_env(2, 0, &[1.0, -1.0], 0.2).unwrap();
        let meta = sample_meta(
            &env,
            5,
            3,
            SamplingMode::EnvironmentDrawn,
            &mut rng::from_seed(33),
        )
        .unwrap();
        let (mk, _) = meta_train(&learner, &meta).unwrap();
        let mut best: Option<(usize, f64)> = None;
        for f in family.reps() {
            let v = empirical_meta_loss(f, &family, &meta).unwrap();
            if best.is_none_or(|(_, bv)| v < bv) {
                best = Some((f.index(), v));
            }
        }
        assert_eq!(Some((mk.rep_index(), mk.outer_value())), best);
    }

    #[test]
    fn meta_train_outer_value_monotone_in_head_grid() {
        // Enlarging the head grid (superset of grid points) cannot raise the
        // attained outer value.
        let env = relevant_coordinate_env(2, 0, &[1.0], 0.3).unwrap();
        let meta = sample_meta(
            &env,
            4,
            4,
            SamplingMode::EnvironmentDrawn,
            &mut rng::from_seed(44),
        )
        .unwrap();
        let mut prev = f64::INFINITY;
        for (lo, count) in [(0.0, 2), (-1.0, 3), (-2.0, 5)] {
            let family = HypothesisFamily::enumerate(&FamilySpec {
                input_dim: 2,
                v_dim: 1,
                weight_grid: GridSpec::new(lo, 1.0, count).unwrap(),
                bias_grid: GridSpec::new(0.0, 1.0, 1).unwrap(),
                loss: LossFn::clipped_squared(1.0).unwrap(),
            })
            .unwrap();
            let learner = RepresentationLearner::new(&family);
            let (mk, _) = meta_train(&learner, &meta).unwrap();
            assert!(mk.outer_value() <= prev + 1e-15);
            prev = mk.outer_value();
        }
    }

    #[test]
    fn meta_test_realizable_target_attains_zero() {
        let family = grid_family(2);
        let learner = RepresentationLearner::new(&family);
        let row = TaskSample::new(vec![ex(vec![1.0, 0.5], 1.0)], None).unwrap();
        let meta = MetaSample::new(vec![row], SamplingMode::EnvironmentDrawn).unwrap();
        let (mk, _) = meta_train(&learner, &meta).unwrap();
        let target =
            TaskSample::new(vec![ex(vec![-1.0, 0.0], -1.0), ex(vec![1.0, 0.0], 1.0)], None)
                .unwrap();
        let trained = meta_test(&mk, &family, &target).unwrap();
        assert_eq!(trained.empirical_value(), 0.0);
    }

    #[test]
    fn meta_test_matches_training_row() {
        let family = grid_family(2);
        let learner = RepresentationLearner::new(&family);
        let row = TaskSample::new(
            vec![ex(vec![1.0, -0.5], 0.9), ex(vec![-1.0, 0.25], -0.7)],
            None,
        )
        .unwrap();
        let meta = MetaSample::new(vec![row.clone()], SamplingMode::EnvironmentDrawn).unwrap();
        let (mk, rows) = meta_train(&learner, &meta).unwrap();
        let trained = meta_test(&mk, &family, &row).unwrap();
        assert_eq!(trained, rows[0]);
    }

    #[test]
    fn meta_test_matches_exhaustive_scan() {
        let family = grid_family(2);
        let mk = {
            let learner = RepresentationLearner::new(&family);
            let row = TaskSample::new(vec![ex(vec![0.0, 1.0], 1.0)], None).unwrap();
            let meta = MetaSample::new(vec![row], SamplingMode::EnvironmentDrawn).unwrap();
            meta_train(&learner, &meta).unwrap().0
        };
        let target = TaskSample::new(
            vec![ex(vec![0.7, -0.2], 0.4), ex(vec![-0.3, 0.8], -0.6)],
            None,
        )
        .unwrap();
        let trained = meta_test(&mk, &family, &target).unwrap();
        let f = family.rep(mk.rep_index()).unwrap();
        let mut want: Option<(usize, f64)> = None;
        for g in family.heads() {
            let v = crate::hypo::empirical_risk(f, g, family.loss(), &target).unwrap();
            if want.is_none_or(|(_, wv)| v < wv) {
                want = Some((g.index(), v));
            }
        }
        assert_eq!(Some((trained.head_index(), trained.empirical_value())), want);
    }

    #[test]
    fn empirical_meta_loss_hand_mean() {
        // Rows engineered so the single head attains values 0.2 and 0.4.
        let family = single_head_family(0.0);
        let f = family.rep(0).unwrap();
        let r1 = TaskSample::new(vec![ex(vec![0.0], 0.2_f64.sqrt())], None).unwrap();
        let r2 = TaskSample::new(vec![ex(vec![0.0], 0.4_f64.sqrt())], None).unwrap();
        let meta = MetaSample::new(vec![r1, r2], SamplingMode::EnvironmentDrawn).unwrap();
        let v = empirical_meta_loss(f, &family, &meta).unwrap();
        assert!((v - 0.3).abs() < 1e-15);
    }

    #[test]
    fn env_optimal_loss_hand_mean() {
        // Two equiprobable tasks with per-task optima 0.1 and 0.3.
        let family = single_head_family(0.0);
        let f = family.rep(0).unwrap();
        let t1 = FiniteTask::uniform(vec![ex(vec![0.0], 0.1_f64.sqrt())]).unwrap();
        let t2 = FiniteTask::uniform(vec![ex(vec![0.0], 0.3_f64.sqrt())]).unwrap();
        let env = Environment::uniform(1, vec![t1, t2]).unwrap();
        let v = env_optimal_loss(f, &family, &env).unwrap();
        assert!((v - 0.2).abs() < 1e-15);
    }

    #[test]
    fn env_optimal_loss_realizable_env_is_zero() {
        let env = relevant_coordinate_env(2, 1, &[1.0, -1.0], 0.0).unwrap();
        let family = grid_family(2);
        let f = family.rep(1).unwrap();
        assert_eq!(f.coords(), &[1]);
        assert_eq!(env_optimal_loss(f, &family, &env).unwrap(), 0.0);
    }

    #[test]
    fn empirical_meta_loss_approaches_env_optimal() {
        // The gap between the sample meta loss and its environment version
        // shrinks from (4, 4) to (64, 64) in at least 90 of 100 seeded runs.
        let env = relevant_coordinate_env(2, 0, &[1.0, -1.0], 0.2).unwrap();
        let family = grid_family(2);
        let f = family.rep(0).unwrap();
        let exact = env_optimal_loss(f, &family, &env).unwrap();
        let mut shrank = 0;
        for rep in 0..100u64 {
            let gap = |n: usize, m: usize, seed: u64| {
                let meta = sample_meta(
                    &env,
                    n,
                    m,
                    SamplingMode::EnvironmentDrawn,
                    &mut rng::from_seed(seed),
                )
                .unwrap();
                (empirical_meta_loss(f, &family, &meta).unwrap() - exact).abs()
            };
            let coarse = gap(4, 4, 9000 + rep);
            let fine = gap(64, 64, 19_000 + rep);
            if fine < coarse {
                shrank += 1;
            }
        }
        assert!(shrank >= 90, "gap shrank in only {shrank} of 100 runs");
    }

    #[test]
    fn transfer_risk_deterministic_realizable_task() {
        let env = relevant_coordinate_env(1, 0, &[1.0], 0.0).unwrap();
        let family = grid_family(1);
        let f = family.rep(0).unwrap();
        let (est, se) = transfer_risk(&family, f, &env, 2, 50, 7).unwrap();
        assert_eq!(est, 0.0);
        assert_eq!(se, 0.0);
    }

    #[test]
    fn transfer_risk_estimate_within_loss_range() {
        let env = relevant_coordinate_env(2, 0, &[1.0, -1.0], 0.3).unwrap();
        let family = grid_family(2);
        for f in family.reps() {
            let (est, se) = transfer_risk(&family, f, &env, 3, 64, 11).unwrap();
            assert!((0.0..=1.0).contains(&est));
            assert!(se >= 0.0);
        }
    }

    #[test]
    fn transfer_risk_learned_rep_beats_worst_on_same_seeds() {
        let env = relevant_coordinate_env(3, 2, &[1.0, -1.0], 0.1).unwrap();
        let family = grid_family(3);
        let learner = RepresentationLearner::new(&family);
        let meta = sample_meta(
            &env,
            8,
            6,
            SamplingMode::EnvironmentDrawn,
            &mut rng::from_seed(55),
        )
        .unwrap();
        let (mk, _) = meta_train(&learner, &meta).unwrap();
        let base_seed = 123;
        let (learned, _) =
            transfer_risk(&family, family.rep(mk.rep_index()).unwrap(), &env, 4, 200, base_seed)
                .unwrap();
        let worst = family
            .reps()
            .iter()
            .map(|f| transfer_risk(&family, f, &env, 4, 200, base_seed).unwrap().0)
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(learned <= worst);
    }

    #[test]
    fn holdout_fraction_splits_rows() {
        // With a 0.5 holdout on rows of length 2, the head is fit on the
        // first point and scored on the second.
        let family = grid_family(1);
        let learner = RepresentationLearner::new(&family);
        let row = TaskSample::new(vec![ex(vec![1.0], 1.0), ex(vec![1.0], -1.0)], None).unwrap();
        let meta = MetaSample::new(vec![row], SamplingMode::EnvironmentDrawn).unwrap();
        let (train_only, _) = meta_train(&learner, &meta).unwrap();
        let (held_out, rows) = meta_train_holdout(&learner, &meta, 0.5).unwrap();
        // train-only: the best head splits the contradictory labels, value 1/2
        assert!((train_only.outer_value() - 0.5).abs() < 1e-15);
        // holdout: fit on y = +1 picks the slope-1 head, which misses y = -1
        assert_eq!(held_out.outer_value(), 1.0);
        assert_eq!(rows[0].empirical_value(), 1.0);
        assert!(meta_train_holdout(&learner, &meta, 1.0).is_err());
    }
}
