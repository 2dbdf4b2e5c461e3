//! Hypothesis spaces split into shared representations and per-task heads.
//!
//! A hypothesis is the composition h = g . f of a representation f (a 0/1
//! coordinate-selection projection of the input) and a head g (an affine map
//! with grid-quantized coefficients). Both families are finite and
//! enumerable, so every infimum in the crate is an exact minimum and every
//! risk closes in finitely many terms.

use crate::env::{FiniteTask, LabeledExample, TaskSample};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Coordinate-selection projection from the input space to a lower
/// dimensional view. Row r of the selection matrix has its single 1 at
/// column `coords[r]`, so applying the map picks `coords.len()` input
/// coordinates in order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Representation {
    index: usize,
    input_dim: usize,
    coords: Vec<usize>,
}

impl Representation {
    pub fn new(index: usize, input_dim: usize, coords: Vec<usize>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Empty("selection coordinates"));
        }
        if coords.len() > input_dim {
            return Err(Error::Parameter {
                name: "v_dim",
                reason: format!(
                    "selection dimension {} exceeds input dimension {}",
                    coords.len(),
                    input_dim
                ),
            });
        }
        if let Some(&c) = coords.iter().find(|&&c| c >= input_dim) {
            return Err(Error::IndexOutOfRange {
                what: "selected coordinate",
                index: c,
                len: input_dim,
            });
        }
        Ok(Self {
            index,
            input_dim,
            coords,
        })
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn v_dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[usize] {
        &self.coords
    }

    /// Project the input onto the selected coordinates.
    pub fn apply<T: Scalar>(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.input_dim {
            return Err(Error::DimensionMismatch {
                context: "representation input",
                expected: self.input_dim,
                got: x.len(),
            });
        }
        Ok(self.coords.iter().map(|&c| x[c]).collect())
    }
}

/// Affine head g(v) = <weights, v> + bias with grid-quantized coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Head<T> {
    index: usize,
    weights: Vec<T>,
    bias: T,
}

impl<T: Scalar> Head<T> {
    pub fn new(index: usize, weights: Vec<T>, bias: T) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Empty("head weights"));
        }
        if weights.iter().any(|w| !w.is_finite()) || !bias.is_finite() {
            return Err(Error::NonFinite("head coefficients"));
        }
        Ok(Self {
            index,
            weights,
            bias,
        })
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn bias(&self) -> T {
        self.bias
    }

    pub fn v_dim(&self) -> usize {
        self.weights.len()
    }

    /// Evaluate the head on a point of the representation space.
    pub fn apply(&self, v: &[T]) -> Result<T> {
        if v.len() != self.weights.len() {
            return Err(Error::DimensionMismatch {
                context: "head input",
                expected: self.weights.len(),
                got: v.len(),
            });
        }
        Ok(self
            .weights
            .iter()
            .zip(v)
            .fold(self.bias, |acc, (w, vi)| acc + *w * *vi))
    }
}

/// Loss kinds. Only clipped squared error is implemented; the enum leaves
/// room for other bounded losses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    ClippedSquared,
}

/// Bounded loss l(y, w) with values in [0, M].
///
/// Clipped squared error: l(y, w) = min((y - w)^2, M). Symmetric in (y, w).
#[derive(Debug, Clone, PartialEq)]
pub struct LossFn<T> {
    kind: LossKind,
    bound: T,
}

impl<T: Scalar> LossFn<T> {
    pub fn new(kind: LossKind, bound: T) -> Result<Self> {
        if !bound.is_finite() || bound <= T::zero() {
            return Err(Error::Parameter {
                name: "loss bound",
                reason: "must be positive and finite".into(),
            });
        }
        Ok(Self { kind, bound })
    }

    pub fn clipped_squared(bound: T) -> Result<Self> {
        Self::new(LossKind::ClippedSquared, bound)
    }

    pub fn kind(&self) -> LossKind {
        self.kind
    }

    /// The bound M.
    pub fn bound(&self) -> T {
        self.bound
    }

    pub fn eval(&self, y: T, w: T) -> T {
        match self.kind {
            LossKind::ClippedSquared => {
                let d = y - w;
                (d * d).min(self.bound)
            }
        }
    }
}

/// Arithmetic grid {lo + k * step | k = 0..count}.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec<T> {
    pub lo: T,
    pub step: T,
    pub count: usize,
}

impl<T: Scalar> GridSpec<T> {
    pub fn new(lo: T, step: T, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::Parameter {
                name: "grid count",
                reason: "must be at least 1".into(),
            });
        }
        if !lo.is_finite() || !step.is_finite() {
            return Err(Error::NonFinite("grid"));
        }
        if count > 1 && step <= T::zero() {
            return Err(Error::Parameter {
                name: "grid step",
                reason: "must be positive when count > 1".into(),
            });
        }
        Ok(Self { lo, step, count })
    }

    pub fn points(&self) -> Vec<T> {
        (0..self.count)
            .map(|k| self.lo + self.step * T::from_usize(k).unwrap())
            .collect()
    }
}

/// Everything needed to enumerate a hypothesis family.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilySpec<T> {
    pub input_dim: usize,
    pub v_dim: usize,
    pub weight_grid: GridSpec<T>,
    pub bias_grid: GridSpec<T>,
    pub loss: LossFn<T>,
}

/// The finite hypothesis space H = { g . f | g in heads, f in reps } with its
/// bounded loss.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisFamily<T> {
    reps: Vec<Representation>,
    heads: Vec<Head<T>>,
    loss: LossFn<T>,
}

impl<T: Scalar> HypothesisFamily<T> {
    /// Both enumerations must be nonempty and duplicate-free under exact
    /// coefficient equality; indices must match positions.
    pub fn new(reps: Vec<Representation>, heads: Vec<Head<T>>, loss: LossFn<T>) -> Result<Self> {
        if reps.is_empty() {
            return Err(Error::Empty("representation enumeration"));
        }
        if heads.is_empty() {
            return Err(Error::Empty("head enumeration"));
        }
        for (i, r) in reps.iter().enumerate() {
            if r.index() != i {
                return Err(Error::Parameter {
                    name: "representation index",
                    reason: format!("index {} at position {i}", r.index()),
                });
            }
        }
        for (i, h) in heads.iter().enumerate() {
            if h.index() != i {
                return Err(Error::Parameter {
                    name: "head index",
                    reason: format!("index {} at position {i}", h.index()),
                });
            }
        }
        for i in 0..reps.len() {
            for j in i + 1..reps.len() {
                if reps[i].coords() == reps[j].coords() {
                    return Err(Error::Parameter {
                        name: "representations",
                        reason: format!("duplicate selection at indices {i} and {j}"),
                    });
                }
            }
        }
        for i in 0..heads.len() {
            for j in i + 1..heads.len() {
                if heads[i].weights() == heads[j].weights() && heads[i].bias() == heads[j].bias() {
                    return Err(Error::Parameter {
                        name: "heads",
                        reason: format!("duplicate coefficients at indices {i} and {j}"),
                    });
                }
            }
        }
        let v_dim = reps[0].v_dim();
        if reps.iter().any(|r| r.v_dim() != v_dim)
            || heads.iter().any(|h| h.v_dim() != v_dim)
        {
            return Err(Error::DimensionMismatch {
                context: "family view dimension",
                expected: v_dim,
                got: heads
                    .iter()
                    .map(Head::v_dim)
                    .chain(reps.iter().map(Representation::v_dim))
                    .find(|&d| d != v_dim)
                    .unwrap_or(v_dim),
            });
        }
        Ok(Self { reps, heads, loss })
    }

    /// Enumerate the full family from a spec: representations are all
    /// strictly increasing coordinate selections of size v_dim, heads are all
    /// weight-grid tuples crossed with the bias grid.
    pub fn enumerate(spec: &FamilySpec<T>) -> Result<Self> {
        if spec.v_dim == 0 || spec.v_dim > spec.input_dim {
            return Err(Error::Parameter {
                name: "v_dim",
                reason: format!("must lie in 1..={}", spec.input_dim),
            });
        }
        let mut reps = Vec::new();
        for combo in combinations(spec.input_dim, spec.v_dim) {
            reps.push(Representation::new(reps.len(), spec.input_dim, combo)?);
        }

        let wpoints = spec.weight_grid.points();
        let bpoints = spec.bias_grid.points();
        let mut heads = Vec::new();
        let mut widx = vec![0usize; spec.v_dim];
        loop {
            let weights: Vec<T> = widx.iter().map(|&k| wpoints[k]).collect();
            for &b in &bpoints {
                heads.push(Head::new(heads.len(), weights.clone(), b)?);
            }
            // odometer over weight tuples, last coordinate fastest
            let mut k = spec.v_dim;
            loop {
                if k == 0 {
                    break;
                }
                k -= 1;
                widx[k] += 1;
                if widx[k] < wpoints.len() {
                    break;
                }
                widx[k] = 0;
                if k == 0 {
                    k = usize::MAX;
                    break;
                }
            }
            if k == usize::MAX {
                break;
            }
        }
        Self::new(reps, heads, spec.loss.clone())
    }

    pub fn reps(&self) -> &[Representation] {
        &self.reps
    }

    pub fn heads(&self) -> &[Head<T>] {
        &self.heads
    }

    pub fn loss(&self) -> &LossFn<T> {
        &self.loss
    }

    pub fn rep(&self, index: usize) -> Result<&Representation> {
        self.reps.get(index).ok_or(Error::IndexOutOfRange {
            what: "representation",
            index,
            len: self.reps.len(),
        })
    }

    pub fn head(&self, index: usize) -> Result<&Head<T>> {
        self.heads.get(index).ok_or(Error::IndexOutOfRange {
            what: "head",
            index,
            len: self.heads.len(),
        })
    }
}

/// All strictly increasing k-subsets of 0..n in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(n, k, i + 1, cur, out);
            cur.pop();
        }
    }
    rec(n, k, 0, &mut cur, &mut out);
    out
}

/// Prediction w = g(f(x)).
pub fn predict<T: Scalar>(f: &Representation, g: &Head<T>, x: &[T]) -> Result<T> {
    g.apply(&f.apply(x)?)
}

/// Mean loss of g . f over a slice of points.
pub fn empirical_risk_points<T: Scalar>(
    f: &Representation,
    g: &Head<T>,
    loss: &LossFn<T>,
    points: &[LabeledExample<T>],
) -> Result<T> {
    if points.is_empty() {
        return Err(Error::Empty("sample"));
    }
    let mut total = T::zero();
    for z in points {
        total = total + loss.eval(z.y(), predict(f, g, z.x())?);
    }
    Ok(total / T::from_usize(points.len()).unwrap())
}

/// Mean loss of g . f over the sample, in [0, M].
pub fn empirical_risk<T: Scalar>(
    f: &Representation,
    g: &Head<T>,
    loss: &LossFn<T>,
    sample: &TaskSample<T>,
) -> Result<T> {
    empirical_risk_points(f, g, loss, sample.examples())
}

/// Exact risk of g . f under the task distribution, in [0, M].
pub fn true_risk<T: Scalar>(
    f: &Representation,
    g: &Head<T>,
    loss: &LossFn<T>,
    task: &FiniteTask<T>,
) -> Result<T> {
    let mut total = T::zero();
    for (z, p) in task.support() {
        total = total + *p * loss.eval(z.y(), predict(f, g, z.x())?);
    }
    Ok(total)
}

/// Exhaustive scan over the head enumeration on a slice of points.
pub fn inner_minimize_points<T: Scalar>(
    f: &Representation,
    family: &HypothesisFamily<T>,
    points: &[LabeledExample<T>],
) -> Result<(usize, T)> {
    let mut best: Option<(usize, T)> = None;
    for g in family.heads() {
        let value = empirical_risk_points(f, g, family.loss(), points)?;
        match best {
            // strict comparison keeps the lowest head index on ties
            Some((_, b)) if value >= b => {}
            _ => best = Some((g.index(), value)),
        }
    }
    best.ok_or(Error::Empty("head enumeration"))
}

/// Best head for the representation on the sample: exhaustive minimum over
/// the finite head enumeration, ties broken by lowest head index.
pub fn inner_minimize<T: Scalar>(
    f: &Representation,
    family: &HypothesisFamily<T>,
    sample: &TaskSample<T>,
) -> Result<(usize, T)> {
    inner_minimize_points(f, family, sample.examples())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::LabeledExample;
    use proptest::prelude::*;

    fn ex(x: Vec<f64>, y: f64) -> LabeledExample<f64> {
        LabeledExample::new(x, y).unwrap()
    }

    fn small_family(input_dim: usize, bound: f64) -> HypothesisFamily<f64> {
        HypothesisFamily::enumerate(&FamilySpec {
            input_dim,
            v_dim: 1,
            weight_grid: GridSpec::new(-1.0, 1.0, 3).unwrap(),
            bias_grid: GridSpec::new(0.0, 1.0, 1).unwrap(),
            loss: LossFn::clipped_squared(bound).unwrap(),
        })
        .unwrap()
    }

    #[test]
    fn predict_identity_selection_picks_coordinate() {
        let f = Representation::new(0, 2, vec![0, 1]).unwrap();
        let g = Head::new(0, vec![1.0, 0.0], 0.0).unwrap();
        assert_eq!(predict(&f, &g, &[3.0, 5.0]).unwrap(), 3.0);
    }

    #[test]
    fn predict_zero_head_is_constant_zero() {
        let f = Representation::new(0, 2, vec![0, 1]).unwrap();
        let g = Head::new(0, vec![0.0, 0.0], 0.0).unwrap();
        for x in [[1.0, 2.0], [-7.0, 0.5]] {
            assert_eq!(predict(&f, &g, &x).unwrap(), 0.0);
        }
    }

    #[test]
    fn predict_hand_value() {
        // f selects the second coordinate, a = (2), b = 1, x = (3, 5) -> 11.
        let f = Representation::new(0, 2, vec![1]).unwrap();
        let g = Head::new(0, vec![2.0], 1.0).unwrap();
        assert_eq!(predict(&f, &g, &[3.0, 5.0]).unwrap(), 11.0);
    }

    #[test]
    fn predict_rejects_dimension_mismatch() {
        let f = Representation::new(0, 2, vec![1]).unwrap();
        let g = Head::new(0, vec![2.0], 1.0).unwrap();
        assert!(predict(&f, &g, &[3.0]).is_err());
    }

    #[test]
    fn loss_values() {
        let l = LossFn::clipped_squared(1.0).unwrap();
        assert_eq!(l.eval(2.0, 2.0), 0.0);
        assert_eq!(l.eval(2.0, 0.0), 1.0); // clipping active
        assert_eq!(l.eval(1.0, 0.5), 0.25);
    }

    #[test]
    fn empirical_risk_perfect_predictor() {
        let f = Representation::new(0, 1, vec![0]).unwrap();
        let g = Head::new(0, vec![1.0], 0.0).unwrap();
        let l = LossFn::clipped_squared(1.0).unwrap();
        let s = TaskSample::new(vec![ex(vec![0.5], 0.5), ex(vec![-0.25], -0.25)], None).unwrap();
        assert_eq!(empirical_risk(&f, &g, &l, &s).unwrap(), 0.0);
    }

    #[test]
    fn empirical_risk_mixed_losses() {
        // One perfect point and one clipped point: mean is M/2.
        let f = Representation::new(0, 1, vec![0]).unwrap();
        let g = Head::new(0, vec![1.0], 0.0).unwrap();
        let l = LossFn::clipped_squared(1.0).unwrap();
        let s = TaskSample::new(vec![ex(vec![0.5], 0.5), ex(vec![0.0], 5.0)], None).unwrap();
        assert_eq!(empirical_risk(&f, &g, &l, &s).unwrap(), 0.5);
    }

    #[test]
    fn empirical_risk_constant_sample() {
        let f = Representation::new(0, 1, vec![0]).unwrap();
        let g = Head::new(0, vec![0.0], 0.0).unwrap();
        let l = LossFn::clipped_squared(1.0).unwrap();
        let s = TaskSample::new(vec![ex(vec![1.0], 0.3); 4], None).unwrap();
        let single = l.eval(0.3, 0.0);
        assert!((empirical_risk(&f, &g, &l, &s).unwrap() - single).abs() < 1e-15);
    }

    #[test]
    fn true_risk_hand_mean() {
        // Uniform task over 3 points with losses 0, 0.3, 0.6 under w = 0.
        let f = Representation::new(0, 1, vec![0]).unwrap();
        let g = Head::new(0, vec![0.0], 0.0).unwrap();
        let l = LossFn::clipped_squared(1.0).unwrap();
        let task = FiniteTask::uniform(vec![
            ex(vec![0.0], 0.0),
            ex(vec![0.0], 0.3_f64.sqrt()),
            ex(vec![0.0], 0.6_f64.sqrt()),
        ])
        .unwrap();
        assert!((true_risk(&f, &g, &l, &task).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn true_risk_realizable_task_is_zero() {
        let f = Representation::new(0, 1, vec![0]).unwrap();
        let g = Head::new(0, vec![1.0], 0.0).unwrap();
        let l = LossFn::clipped_squared(1.0).unwrap();
        let task = FiniteTask::uniform(vec![ex(vec![0.5], 0.5), ex(vec![-1.0], -1.0)]).unwrap();
        assert_eq!(true_risk(&f, &g, &l, &task).unwrap(), 0.0);
    }

    #[test]
    fn inner_minimize_finds_zero_loss_head() {
        let family = small_family(1, 1.0);
        let f = family.rep(0).unwrap();
        let s = TaskSample::new(vec![ex(vec![1.0], 1.0), ex(vec![-1.0], -1.0)], None).unwrap();
        let (g, v) = inner_minimize(f, &family, &s).unwrap();
        assert_eq!(v, 0.0);
        assert_eq!(family.head(g).unwrap().weights(), &[1.0]);
    }

    #[test]
    fn inner_minimize_breaks_ties_by_lowest_index() {
        // Every head has the same loss on a zero point: y = 0, x = 0 gives
        // w = b = 0 for all three heads. Lowest index must win.
        let family = small_family(1, 1.0);
        let f = family.rep(0).unwrap();
        let s = TaskSample::new(vec![ex(vec![0.0], 0.0)], None).unwrap();
        let (g, v) = inner_minimize(f, &family, &s).unwrap();
        assert_eq!((g, v), (0, 0.0));
    }

    #[test]
    fn inner_minimize_matches_exhaustive_scan() {
        let family = HypothesisFamily::enumerate(&FamilySpec {
            input_dim: 2,
            v_dim: 1,
            weight_grid: GridSpec::new(-2.0, 0.5, 9).unwrap(),
            bias_grid: GridSpec::new(-1.0, 1.0, 3).unwrap(),
            loss: LossFn::clipped_squared(2.0).unwrap(),
        })
        .unwrap();
        let s = TaskSample::new(
            vec![ex(vec![0.3, -1.2], 0.7), ex(vec![-0.8, 0.1], -0.2)],
            None,
        )
        .unwrap();
        for f in family.reps() {
            let (got_g, got_v) = inner_minimize(f, &family, &s).unwrap();
            let mut want: Option<(usize, f64)> = None;
            for g in family.heads() {
                let v = empirical_risk(f, g, family.loss(), &s).unwrap();
                if want.is_none_or(|(_, wv)| v < wv) {
                    want = Some((g.index(), v));
                }
            }
            assert_eq!(Some((got_g, got_v)), want);
        }
    }

    #[test]
    fn inner_minimize_value_lower_bounds_every_head() {
        let family = HypothesisFamily::enumerate(&FamilySpec {
            input_dim: 1,
            v_dim: 1,
            weight_grid: GridSpec::new(-3.0, 0.05, 121).unwrap(),
            bias_grid: GridSpec::new(0.0, 1.0, 1).unwrap(),
            loss: LossFn::clipped_squared(1.0).unwrap(),
        })
        .unwrap();
        assert!(family.heads().len() <= 200);
        let f = family.rep(0).unwrap();
        let s = TaskSample::new(vec![ex(vec![0.4], 0.9), ex(vec![-1.1], 0.2)], None).unwrap();
        let (_, v) = inner_minimize(f, &family, &s).unwrap();
        for g in family.heads() {
            assert!(v <= empirical_risk(f, g, family.loss(), &s).unwrap() + 1e-18);
        }
    }

    #[test]
    fn enumerate_counts_and_order() {
        let family = HypothesisFamily::enumerate(&FamilySpec {
            input_dim: 3,
            v_dim: 2,
            weight_grid: GridSpec::new(-1.0, 1.0, 2).unwrap(),
            bias_grid: GridSpec::new(0.0, 0.5, 2).unwrap(),
            loss: LossFn::clipped_squared(1.0).unwrap(),
        })
        .unwrap();
        // C(3, 2) = 3 selections, 2^2 weight tuples x 2 biases = 8 heads.
        assert_eq!(family.reps().len(), 3);
        assert_eq!(family.heads().len(), 8);
        assert_eq!(family.rep(0).unwrap().coords(), &[0, 1]);
        assert_eq!(family.rep(2).unwrap().coords(), &[1, 2]);
        assert_eq!(family.head(0).unwrap().weights(), &[-1.0, -1.0]);
        assert_eq!(family.head(0).unwrap().bias(), 0.0);
        assert_eq!(family.head(1).unwrap().bias(), 0.5);
    }

    #[test]
    fn duplicate_heads_rejected() {
        let loss = LossFn::clipped_squared(1.0).unwrap();
        let reps = vec![Representation::new(0, 1, vec![0]).unwrap()];
        let heads = vec![
            Head::new(0, vec![1.0], 0.0).unwrap(),
            Head::new(1, vec![1.0], 0.0).unwrap(),
        ];
        assert!(HypothesisFamily::new(reps, heads, loss).is_err());
    }

    #[test]
    fn risk_converges_to_true_risk() {
        // Mean over growing samples approaches the exact risk within the
        // 3 M / sqrt(m) envelope.
        use crate::env::sample_m;
        use crate::rng;
        let task = FiniteTask::new(vec![
            (ex(vec![1.0], 1.0), 0.6),
            (ex(vec![1.0], -1.0), 0.4),
        ])
        .unwrap();
        let f = Representation::new(0, 1, vec![0]).unwrap();
        let g = Head::new(0, vec![1.0], 0.0).unwrap();
        let l = LossFn::clipped_squared(1.0).unwrap();
        let exact = true_risk(&f, &g, &l, &task).unwrap();
        for (m, seed0) in [(100usize, 500u64), (10_000, 600)] {
            let envelope = 3.0 / (m as f64).sqrt();
            for k in 0..5 {
                let s = sample_m(&task, m, &mut rng::for_trial(seed0, k)).unwrap();
                let emp = empirical_risk(&f, &g, &l, &s).unwrap();
                assert!(
                    (emp - exact).abs() <= envelope,
                    "m {m} rep {k}: |{emp} - {exact}| > {envelope}"
                );
            }
        }
    }

    #[test]
    fn true_risk_matches_monte_carlo() {
        use crate::env::sample_m;
        use crate::rng;
        let task = FiniteTask::new(vec![
            (ex(vec![0.5], 0.2), 0.3),
            (ex(vec![-1.0], 0.9), 0.45),
            (ex(vec![2.0], -0.4), 0.25),
        ])
        .unwrap();
        let f = Representation::new(0, 1, vec![0]).unwrap();
        let g = Head::new(0, vec![0.5], 0.1).unwrap();
        let l = LossFn::clipped_squared(1.0).unwrap();
        let exact = true_risk(&f, &g, &l, &task).unwrap();
        let draws = 10_000;
        let s = sample_m(&task, draws, &mut rng::from_seed(77)).unwrap();
        let losses: Vec<f64> = s
            .examples()
            .iter()
            .map(|z| l.eval(z.y(), predict(&f, &g, z.x()).unwrap()))
            .collect();
        let mean = losses.iter().sum::<f64>() / draws as f64;
        let var = losses.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (draws - 1) as f64;
        let se = (var / draws as f64).sqrt();
        assert!((mean - exact).abs() <= 4.0 * se, "|{mean} - {exact}| vs 4se {se}");
    }

    proptest! {
        #[test]
        fn loss_is_symmetric_and_bounded(y in -10.0f64..10.0, w in -10.0f64..10.0, m in 0.01f64..5.0) {
            let l = LossFn::clipped_squared(m).unwrap();
            prop_assert_eq!(l.eval(y, w), l.eval(w, y));
            prop_assert!(l.eval(y, w) >= 0.0);
            prop_assert!(l.eval(y, w) <= m);
        }

        #[test]
        fn risks_stay_in_loss_range(
            ys in proptest::collection::vec(-5.0f64..5.0, 1..8),
            xs in proptest::collection::vec(-5.0f64..5.0, 1..8),
            a in -3.0f64..3.0,
            b in -3.0f64..3.0,
            m in 0.1f64..4.0,
        ) {
            let k = ys.len().min(xs.len());
            let points: Vec<_> = (0..k).map(|i| ex(vec![xs[i]], ys[i])).collect();
            let s = TaskSample::new(points.clone(), None).unwrap();
            let task = FiniteTask::uniform(points).unwrap();
            let f = Representation::new(0, 1, vec![0]).unwrap();
            let g = Head::new(0, vec![a], b).unwrap();
            let l = LossFn::clipped_squared(m).unwrap();
            let er = empirical_risk(&f, &g, &l, &s).unwrap();
            let tr = true_risk(&f, &g, &l, &task).unwrap();
            prop_assert!((0.0..=m + 1e-12).contains(&er));
            prop_assert!((0.0..=m + 1e-12).contains(&tr));
        }
    }
}
