//! Finite task environments and sampling.
//!
//! A task is a finitely supported distribution over labeled examples; an
//! environment is a finite distribution over such tasks. Keeping everything
//! finite closes every expectation in the crate analytically: true risks,
//! optimal losses, and marginal sample probabilities are exact sums.
//!
//! All types are immutable after construction and safe to share across
//! threads; sampling is pure given an explicit [`Prng`] value.

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::rng::Prng;
use crate::scalar::Scalar;

/// Tolerance for validating that declared probabilities sum to 1.
pub const PROB_SUM_TOL: f64 = 1e-12;

/// Validate a probability vector and renormalize it exactly once, so decimal
/// config literals stay consistent downstream.
pub(crate) fn normalize_probs<T: Scalar, A>(
    atoms: &mut [(A, T)],
    what: &'static str,
) -> Result<()> {
    if atoms.is_empty() {
        return Err(Error::Empty(what));
    }
    let mut sum = T::zero();
    for (_, p) in atoms.iter() {
        let pf = p.to_f64().unwrap_or(f64::NAN);
        if !pf.is_finite() || !(0.0..=1.0 + PROB_SUM_TOL).contains(&pf) {
            return Err(Error::ProbabilityRange { what, value: pf });
        }
        sum = sum + *p;
    }
    let sum_f = sum.to_f64().unwrap_or(f64::NAN);
    if !sum_f.is_finite() || (sum_f - 1.0).abs() > PROB_SUM_TOL {
        return Err(Error::ProbabilitySum {
            what,
            sum: sum_f,
            tol: PROB_SUM_TOL,
        });
    }
    for (_, p) in atoms.iter_mut() {
        *p = *p / sum;
    }
    Ok(())
}

/// Draw an index with probability proportional to the weights. The walk runs
/// in double precision regardless of `T`; weights are assumed normalized.
pub(crate) fn draw_index<T: Scalar>(
    weights: impl Iterator<Item = T>,
    rng: &mut Prng,
) -> usize {
    let u: f64 = rng.random();
    let mut cum = 0.0;
    let mut last = 0;
    for (i, w) in weights.enumerate() {
        last = i;
        cum += w.to_f64().unwrap_or(0.0);
        if u < cum {
            return i;
        }
    }
    last
}

/// One data point z = (x, y): an input vector paired with a scalar output.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledExample<T> {
    x: Vec<T>,
    y: T,
}

impl<T: Scalar> LabeledExample<T> {
    pub fn new(x: Vec<T>, y: T) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::Empty("input vector"));
        }
        if x.iter().any(|c| !c.is_finite()) || !y.is_finite() {
            return Err(Error::NonFinite("labeled example"));
        }
        Ok(Self { x, y })
    }

    pub fn x(&self) -> &[T] {
        &self.x
    }

    pub fn y(&self) -> T {
        self.y
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }
}

/// A task: a finitely supported distribution over labeled examples.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteTask<T> {
    support: Vec<(LabeledExample<T>, T)>,
}

impl<T: Scalar> FiniteTask<T> {
    /// Probabilities must lie in [0, 1] and sum to 1 within [`PROB_SUM_TOL`];
    /// they are renormalized once at construction. Zero-mass atoms are kept
    /// in the support but never drawn.
    pub fn new(mut support: Vec<(LabeledExample<T>, T)>) -> Result<Self> {
        normalize_probs(&mut support, "task support")?;
        let dim = support[0].0.dim();
        if support.iter().any(|(z, _)| z.dim() != dim) {
            return Err(Error::DimensionMismatch {
                context: "task support",
                expected: dim,
                got: support.iter().map(|(z, _)| z.dim()).find(|&d| d != dim).unwrap_or(dim),
            });
        }
        Ok(Self { support })
    }

    /// Uniform distribution over the given examples.
    pub fn uniform(examples: Vec<LabeledExample<T>>) -> Result<Self> {
        if examples.is_empty() {
            return Err(Error::Empty("task support"));
        }
        let p = T::one() / T::from_usize(examples.len()).unwrap();
        Self::new(examples.into_iter().map(|z| (z, p)).collect())
    }

    pub fn support(&self) -> &[(LabeledExample<T>, T)] {
        &self.support
    }

    pub fn input_dim(&self) -> usize {
        self.support[0].0.dim()
    }

    /// Probability mass of a single point. Duplicate atoms with the same
    /// value contribute jointly.
    pub fn prob_of(&self, z: &LabeledExample<T>) -> T {
        self.support
            .iter()
            .filter(|(atom, _)| atom == z)
            .fold(T::zero(), |acc, (_, p)| acc + *p)
    }
}

/// A finite distribution over finitely many tasks sharing one input dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Environment<T> {
    tasks: Vec<(FiniteTask<T>, T)>,
    input_dim: usize,
}

impl<T: Scalar> Environment<T> {
    pub fn new(input_dim: usize, mut tasks: Vec<(FiniteTask<T>, T)>) -> Result<Self> {
        if input_dim == 0 {
            return Err(Error::Parameter {
                name: "input_dim",
                reason: "must be positive".into(),
            });
        }
        normalize_probs(&mut tasks, "environment tasks")?;
        for (task, _) in &tasks {
            if task.input_dim() != input_dim {
                return Err(Error::DimensionMismatch {
                    context: "environment tasks",
                    expected: input_dim,
                    got: task.input_dim(),
                });
            }
        }
        Ok(Self { tasks, input_dim })
    }

    /// Uniform distribution over the given tasks.
    pub fn uniform(input_dim: usize, tasks: Vec<FiniteTask<T>>) -> Result<Self> {
        if tasks.is_empty() {
            return Err(Error::Empty("environment tasks"));
        }
        let p = T::one() / T::from_usize(tasks.len()).unwrap();
        Self::new(input_dim, tasks.into_iter().map(|t| (t, p)).collect())
    }

    pub fn tasks(&self) -> &[(FiniteTask<T>, T)] {
        &self.tasks
    }

    pub fn num_tasks(&self) -> usize {
        self.tasks.len()
    }

    pub fn task(&self, index: usize) -> Result<&FiniteTask<T>> {
        self.tasks
            .get(index)
            .map(|(t, _)| t)
            .ok_or(Error::IndexOutOfRange {
                what: "task",
                index,
                len: self.tasks.len(),
            })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }
}

/// An ordered m-sample drawn from one task.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskSample<T> {
    examples: Vec<LabeledExample<T>>,
    origin_task_index: Option<usize>,
}

impl<T: Scalar> TaskSample<T> {
    pub fn new(examples: Vec<LabeledExample<T>>, origin_task_index: Option<usize>) -> Result<Self> {
        if examples.is_empty() {
            return Err(Error::Empty("task sample"));
        }
        let dim = examples[0].dim();
        if let Some(bad) = examples.iter().find(|z| z.dim() != dim) {
            return Err(Error::DimensionMismatch {
                context: "task sample",
                expected: dim,
                got: bad.dim(),
            });
        }
        Ok(Self {
            examples,
            origin_task_index,
        })
    }

    pub fn examples(&self) -> &[LabeledExample<T>] {
        &self.examples
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn origin_task_index(&self) -> Option<usize> {
        self.origin_task_index
    }
}

/// How a meta-sample's rows were assigned to tasks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SamplingMode {
    /// Row i is drawn from the listed task index i (one index per row).
    FixedTasks(Vec<usize>),
    /// Each row's task is drawn independently from the environment.
    EnvironmentDrawn,
}

/// An n-by-m matrix of labeled examples: n rows, each an m-sample from one
/// task, plus the sampling mode that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct MetaSample<T> {
    rows: Vec<TaskSample<T>>,
    mode: SamplingMode,
}

impl<T: Scalar> MetaSample<T> {
    pub fn new(rows: Vec<TaskSample<T>>, mode: SamplingMode) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Empty("meta-sample rows"));
        }
        let m = rows[0].len();
        if let Some(bad) = rows.iter().find(|r| r.len() != m) {
            return Err(Error::DimensionMismatch {
                context: "meta-sample rows",
                expected: m,
                got: bad.len(),
            });
        }
        if let SamplingMode::FixedTasks(indices) = &mode {
            if indices.len() != rows.len() {
                return Err(Error::DimensionMismatch {
                    context: "fixed task indices",
                    expected: rows.len(),
                    got: indices.len(),
                });
            }
        }
        Ok(Self { rows, mode })
    }

    pub fn rows(&self) -> &[TaskSample<T>] {
        &self.rows
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn m(&self) -> usize {
        self.rows[0].len()
    }

    pub fn mode(&self) -> &SamplingMode {
        &self.mode
    }
}

/// Draw a task index with the environment's probabilities.
pub fn sample_task<T: Scalar>(env: &Environment<T>, rng: &mut Prng) -> usize {
    draw_index(env.tasks().iter().map(|(_, p)| *p), rng)
}

/// Draw m i.i.d. points from the task, order preserved.
pub fn sample_m<T: Scalar>(task: &FiniteTask<T>, m: usize, rng: &mut Prng) -> Result<TaskSample<T>> {
    sample_m_from(task, m, rng, None)
}

fn sample_m_from<T: Scalar>(
    task: &FiniteTask<T>,
    m: usize,
    rng: &mut Prng,
    origin: Option<usize>,
) -> Result<TaskSample<T>> {
    if m == 0 {
        return Err(Error::Parameter {
            name: "m",
            reason: "sample size must be at least 1".into(),
        });
    }
    let examples = (0..m)
        .map(|_| {
            let i = draw_index(task.support().iter().map(|(_, p)| *p), rng);
            task.support()[i].0.clone()
        })
        .collect();
    TaskSample::new(examples, origin)
}

/// Draw an n-by-m meta-sample in the requested mode.
pub fn sample_meta<T: Scalar>(
    env: &Environment<T>,
    n: usize,
    m: usize,
    mode: SamplingMode,
    rng: &mut Prng,
) -> Result<MetaSample<T>> {
    if n == 0 {
        return Err(Error::Parameter {
            name: "n",
            reason: "row count must be at least 1".into(),
        });
    }
    let rows = match &mode {
        SamplingMode::EnvironmentDrawn => (0..n)
            .map(|_| {
                let i = sample_task(env, rng);
                sample_m_from(env.task(i)?, m, rng, Some(i))
            })
            .collect::<Result<Vec<_>>>()?,
        SamplingMode::FixedTasks(indices) => {
            if indices.len() != n {
                return Err(Error::DimensionMismatch {
                    context: "fixed task indices",
                    expected: n,
                    got: indices.len(),
                });
            }
            indices
                .iter()
                .map(|&i| sample_m_from(env.task(i)?, m, rng, Some(i)))
                .collect::<Result<Vec<_>>>()?
        }
    };
    MetaSample::new(rows, mode)
}

/// Marginal probability of an m-sample under the environment:
/// sum over tasks of p_i times the product of the task's point masses.
pub fn sample_marginal_prob<T: Scalar>(env: &Environment<T>, sample: &TaskSample<T>) -> T {
    env.tasks().iter().fold(T::zero(), |acc, (task, p)| {
        let prod = sample
            .examples()
            .iter()
            .fold(T::one(), |prod, z| prod * task.prob_of(z));
        acc + *p * prod
    })
}

/// Environment whose labels depend on a single shared input coordinate.
///
/// Inputs range over all sign patterns in {-1, +1}^input_dim, uniformly. One
/// task per slope s: the label is `s * x[relevant_coord]`, flipped in sign
/// with probability `label_flip`. With `label_flip = 0` every task is exactly
/// realizable by the matching coordinate projection and a unit-slope head;
/// the remaining coordinates carry no information about the label.
pub fn relevant_coordinate_env<T: Scalar>(
    input_dim: usize,
    relevant_coord: usize,
    slopes: &[T],
    label_flip: T,
) -> Result<Environment<T>> {
    if input_dim == 0 || input_dim > 16 {
        return Err(Error::Parameter {
            name: "input_dim",
            reason: "must be in 1..=16".into(),
        });
    }
    if relevant_coord >= input_dim {
        return Err(Error::IndexOutOfRange {
            what: "relevant coordinate",
            index: relevant_coord,
            len: input_dim,
        });
    }
    if slopes.is_empty() {
        return Err(Error::Empty("slopes"));
    }
    let flip = label_flip.to_f64().unwrap_or(f64::NAN);
    if !flip.is_finite() || !(0.0..1.0).contains(&flip) {
        return Err(Error::Parameter {
            name: "label_flip",
            reason: "must lie in [0, 1)".into(),
        });
    }

    let patterns = 1usize << input_dim;
    let base = T::one() / T::from_usize(patterns).unwrap();
    let keep = T::one() - label_flip;
    let mut tasks = Vec::with_capacity(slopes.len());
    for &slope in slopes {
        let mut support = Vec::new();
        for bits in 0..patterns {
            let x: Vec<T> = (0..input_dim)
                .map(|c| if bits >> c & 1 == 1 { T::one() } else { -T::one() })
                .collect();
            let clean = slope * x[relevant_coord];
            support.push((LabeledExample::new(x.clone(), clean)?, base * keep));
            if label_flip > T::zero() {
                support.push((LabeledExample::new(x, -clean)?, base * label_flip));
            }
        }
        tasks.push(FiniteTask::new(support)?);
    }
    Environment::uniform(input_dim, tasks)
}
