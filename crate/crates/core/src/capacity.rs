//! Pseudo-metrics on heads and representations, epsilon-covers and
//! epsilon-capacities, and the two sample-size bound evaluators.
//!
//! The capacity of a loss class is defined through a supremum over all
//! probability measures on the underlying space. That supremum is not
//! computable, so [`capacity`] evaluates a finite probe family and reports
//! the max over probes. The result is a lower bound on the true capacity;
//! with greedy covers each per-probe cover size additionally upper-bounds
//! that probe's minimal cover.

use crate::env::{normalize_probs, Environment, LabeledExample};
use crate::error::{Error, Result};
use crate::hypo::{Head, HypothesisFamily, LossFn, Representation};
use crate::scalar::{lit, Scalar};

/// Tolerance for the pseudo-metric space checks (symmetry, zero diagonal,
/// triangle inequality).
pub const METRIC_TOL: f64 = 1e-9;

/// Tolerance for the bound-parameter radius identities.
pub const EPS_CONSTRAINT_TOL: f64 = 1e-12;

/// Largest space the exact minimal-cover search accepts (4096 subsets).
pub const EXACT_COVER_MAX_POINTS: usize = 12;

/// A point of the head probe space: a representation-space value paired with
/// an output.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadPoint<T> {
    pub v: Vec<T>,
    pub y: T,
}

/// A finitely supported probe measure on one of the two probe spaces.
#[derive(Debug, Clone, PartialEq)]
pub enum ProbeMeasure<T> {
    /// Measure on V x Y, probing head losses.
    Head(Vec<(HeadPoint<T>, T)>),
    /// Measure on Z = X x Y, probing representation losses.
    Rep(Vec<(LabeledExample<T>, T)>),
}

impl<T: Scalar> ProbeMeasure<T> {
    pub fn head_space(mut atoms: Vec<(HeadPoint<T>, T)>) -> Result<Self> {
        normalize_probs(&mut atoms, "head probe atoms")?;
        Ok(Self::Head(atoms))
    }

    pub fn rep_space(mut atoms: Vec<(LabeledExample<T>, T)>) -> Result<Self> {
        normalize_probs(&mut atoms, "rep probe atoms")?;
        Ok(Self::Rep(atoms))
    }

    pub fn len(&self) -> usize {
        match self {
            Self::Head(a) => a.len(),
            Self::Rep(a) => a.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Integral of |l_g - l_g'| under a probe measure on V x Y, in [0, M].
pub fn head_pseudo_dist<T: Scalar>(
    g: &Head<T>,
    g2: &Head<T>,
    loss: &LossFn<T>,
    probe: &ProbeMeasure<T>,
) -> Result<T> {
    let atoms = match probe {
        ProbeMeasure::Head(atoms) => atoms,
        ProbeMeasure::Rep(_) => return Err(Error::ProbeSpace { expected: "head space (V x Y)" }),
    };
    let mut total = T::zero();
    for (pt, p) in atoms {
        let a = loss.eval(pt.y, g.apply(&pt.v)?);
        let b = loss.eval(pt.y, g2.apply(&pt.v)?);
        total = total + *p * (a - b).abs();
    }
    Ok(total)
}

/// Integral over Z of the worst head's loss gap between two representations,
/// in [0, M]. The sup over the infinite head space is realized as a max over
/// the family's finite head enumeration.
pub fn rep_pseudo_dist<T: Scalar>(
    f: &Representation,
    f2: &Representation,
    family: &HypothesisFamily<T>,
    probe: &ProbeMeasure<T>,
) -> Result<T> {
    let atoms = match probe {
        ProbeMeasure::Rep(atoms) => atoms,
        ProbeMeasure::Head(_) => return Err(Error::ProbeSpace { expected: "rep space (Z)" }),
    };
    let loss = family.loss();
    let mut total = T::zero();
    for (z, p) in atoms {
        let v1 = f.apply(z.x())?;
        let v2 = f2.apply(z.x())?;
        let mut sup = T::zero();
        for g in family.heads() {
            let gap = (loss.eval(z.y(), g.apply(&v1)?) - loss.eval(z.y(), g.apply(&v2)?)).abs();
            if gap > sup {
                sup = gap;
            }
        }
        total = total + *p * sup;
    }
    Ok(total)
}

/// A finite pseudo-metric space: element ids plus a symmetric nonnegative
/// distance matrix with zero diagonal satisfying the triangle inequality
/// within [`METRIC_TOL`]. Distinct elements at distance zero are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct FinitePseudoMetricSpace<T> {
    ids: Vec<usize>,
    dist: Vec<Vec<T>>,
}

impl<T: Scalar> FinitePseudoMetricSpace<T> {
    pub fn new(ids: Vec<usize>, dist: Vec<Vec<T>>) -> Result<Self> {
        let n = ids.len();
        if n == 0 {
            return Err(Error::Empty("pseudo-metric space"));
        }
        if dist.len() != n || dist.iter().any(|row| row.len() != n) {
            return Err(Error::DimensionMismatch {
                context: "distance matrix",
                expected: n,
                got: dist.len(),
            });
        }
        let tol = lit::<T>(METRIC_TOL);
        for i in 0..n {
            if dist[i][i].abs() > tol {
                return Err(Error::PseudoMetric(format!("d({i},{i}) = {} != 0", dist[i][i])));
            }
            for j in 0..n {
                if !dist[i][j].is_finite() || dist[i][j] < T::zero() {
                    return Err(Error::PseudoMetric(format!(
                        "d({i},{j}) = {} is negative or non-finite",
                        dist[i][j]
                    )));
                }
                if (dist[i][j] - dist[j][i]).abs() > tol {
                    return Err(Error::PseudoMetric(format!(
                        "asymmetric: d({i},{j}) = {} vs d({j},{i}) = {}",
                        dist[i][j], dist[j][i]
                    )));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if dist[i][k] > dist[i][j] + dist[j][k] + tol {
                        return Err(Error::PseudoMetric(format!(
                            "triangle violated at ({i},{j},{k})"
                        )));
                    }
                }
            }
        }
        Ok(Self { ids, dist })
    }

    /// Build the space from elements with ids 0..n and a pairwise distance
    /// function (evaluated once per unordered pair).
    pub fn from_elements<E>(
        elements: &[E],
        mut dist_fn: impl FnMut(&E, &E) -> Result<T>,
    ) -> Result<Self> {
        let n = elements.len();
        let mut dist = vec![vec![T::zero(); n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let d = dist_fn(&elements[i], &elements[j])?;
                dist[i][j] = d;
                dist[j][i] = d;
            }
        }
        Self::new((0..n).collect(), dist)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    /// Distance by matrix position (not by id).
    pub fn dist(&self, i: usize, j: usize) -> T {
        self.dist[i][j]
    }
}

/// Cover search modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoverMode {
    /// Minimum-cardinality cover by exhaustive subset search; the space may
    /// hold at most [`EXACT_COVER_MAX_POINTS`] points.
    Exact,
    /// Feasible cover: repeatedly pick the point covering the most uncovered
    /// points, ties by lowest id. Size is at least the exact minimum.
    Greedy,
}

/// Centers whose closed eps-balls cover the space. Returns element ids.
pub fn epsilon_cover<T: Scalar>(
    space: &FinitePseudoMetricSpace<T>,
    eps: T,
    mode: CoverMode,
) -> Result<Vec<usize>> {
    if !eps.is_finite() || eps <= T::zero() {
        return Err(Error::Parameter {
            name: "eps",
            reason: "cover radius must be positive".into(),
        });
    }
    let n = space.len();
    let covers = |center: usize, point: usize| space.dist(center, point) <= eps;
    let centers: Vec<usize> = match mode {
        CoverMode::Exact => {
            if n > EXACT_COVER_MAX_POINTS {
                return Err(Error::ExactCoverTooLarge {
                    got: n,
                    max: EXACT_COVER_MAX_POINTS,
                });
            }
            let mut masks: Vec<u32> = (1..(1u32 << n)).collect();
            masks.sort_by_key(|m| (m.count_ones(), *m));
            let mut found = None;
            'search: for mask in masks {
                for point in 0..n {
                    let covered = (0..n).any(|c| mask >> c & 1 == 1 && covers(c, point));
                    if !covered {
                        continue 'search;
                    }
                }
                found = Some((0..n).filter(|c| mask >> c & 1 == 1).collect());
                break;
            }
            // every point covers itself, so the full set always covers
            found.expect("full point set is a cover")
        }
        CoverMode::Greedy => {
            let mut uncovered: Vec<bool> = vec![true; n];
            let mut remaining = n;
            let mut centers = Vec::new();
            while remaining > 0 {
                let mut best: Option<(usize, usize)> = None; // (count, position)
                for c in 0..n {
                    let count = (0..n).filter(|&p| uncovered[p] && covers(c, p)).count();
                    let better = match best {
                        None => true,
                        Some((bc, bp)) => {
                            count > bc || (count == bc && space.ids()[c] < space.ids()[bp])
                        }
                    };
                    if better {
                        best = Some((count, c));
                    }
                }
                let (count, c) = best.expect("nonempty space");
                debug_assert!(count > 0, "greedy step must cover the center itself");
                centers.push(c);
                for p in 0..n {
                    if uncovered[p] && covers(c, p) {
                        uncovered[p] = false;
                        remaining -= 1;
                    }
                }
            }
            centers
        }
    };
    debug_assert!(
        (0..n).all(|p| centers.iter().any(|&c| covers(c, p))),
        "cover validity check failed"
    );
    Ok(centers.into_iter().map(|c| space.ids()[c]).collect())
}

/// Max over the probe list of the eps-cover size of the elements under that
/// probe's pseudo-metric. A probe lower bound on the measure-sup capacity.
pub fn capacity<T: Scalar, E>(
    elements: &[E],
    mut dist_fn: impl FnMut(&E, &E, &ProbeMeasure<T>) -> Result<T>,
    eps: T,
    probes: &[ProbeMeasure<T>],
    mode: CoverMode,
) -> Result<usize> {
    if probes.is_empty() {
        return Err(Error::Empty("probe list"));
    }
    if elements.is_empty() {
        return Err(Error::Empty("capacity elements"));
    }
    let mut worst = 0;
    for probe in probes {
        let space =
            FinitePseudoMetricSpace::from_elements(elements, |a, b| dist_fn(a, b, probe))?;
        worst = worst.max(epsilon_cover(&space, eps, mode)?.len());
    }
    Ok(worst)
}

/// Probe capacity of the head loss class at radius eps.
pub fn head_capacity<T: Scalar>(
    family: &HypothesisFamily<T>,
    eps: T,
    probes: &[ProbeMeasure<T>],
    mode: CoverMode,
) -> Result<usize> {
    capacity(
        family.heads(),
        |g, g2, probe| head_pseudo_dist(g, g2, family.loss(), probe),
        eps,
        probes,
        mode,
    )
}

/// Probe capacity of the representation family at radius eps.
pub fn rep_capacity<T: Scalar>(
    family: &HypothesisFamily<T>,
    eps: T,
    probes: &[ProbeMeasure<T>],
    mode: CoverMode,
) -> Result<usize> {
    capacity(
        family.reps(),
        |f, f2, probe| rep_pseudo_dist(f, f2, family, probe),
        eps,
        probes,
        mode,
    )
}

/// Candidate head-space probe points harvested from the environment: every
/// support point mapped through every representation, deduplicated.
pub fn head_probe_points<T: Scalar>(
    env: &Environment<T>,
    family: &HypothesisFamily<T>,
) -> Result<Vec<HeadPoint<T>>> {
    let mut points: Vec<HeadPoint<T>> = Vec::new();
    for (task, _) in env.tasks() {
        for (z, _) in task.support() {
            for f in family.reps() {
                let pt = HeadPoint {
                    v: f.apply(z.x())?,
                    y: z.y(),
                };
                if !points.contains(&pt) {
                    points.push(pt);
                }
            }
        }
    }
    Ok(points)
}

/// Candidate rep-space probe points: the environment's support points,
/// deduplicated.
pub fn rep_probe_points<T: Scalar>(env: &Environment<T>) -> Vec<LabeledExample<T>> {
    let mut points: Vec<LabeledExample<T>> = Vec::new();
    for (task, _) in env.tasks() {
        for (z, _) in task.support() {
            if !points.contains(z) {
                points.push(z.clone());
            }
        }
    }
    points
}

/// The standard probe family over candidate points: all single-atom measures
/// plus all uniform two-atom measures.
pub fn standard_head_probes<T: Scalar>(points: &[HeadPoint<T>]) -> Result<Vec<ProbeMeasure<T>>> {
    let mut probes = Vec::new();
    let half = lit::<T>(0.5);
    for i in 0..points.len() {
        probes.push(ProbeMeasure::head_space(vec![(points[i].clone(), T::one())])?);
        for j in i + 1..points.len() {
            probes.push(ProbeMeasure::head_space(vec![
                (points[i].clone(), half),
                (points[j].clone(), half),
            ])?);
        }
    }
    if probes.is_empty() {
        return Err(Error::Empty("head probe points"));
    }
    Ok(probes)
}

/// See [`standard_head_probes`].
pub fn standard_rep_probes<T: Scalar>(
    points: &[LabeledExample<T>],
) -> Result<Vec<ProbeMeasure<T>>> {
    let mut probes = Vec::new();
    let half = lit::<T>(0.5);
    for i in 0..points.len() {
        probes.push(ProbeMeasure::rep_space(vec![(points[i].clone(), T::one())])?);
        for j in i + 1..points.len() {
            probes.push(ProbeMeasure::rep_space(vec![
                (points[i].clone(), half),
                (points[j].clone(), half),
            ])?);
        }
    }
    if probes.is_empty() {
        return Err(Error::Empty("rep probe points"));
    }
    Ok(probes)
}

/// Inputs to the two sample-size bounds.
///
/// `cap_heads` is the head-class capacity at radius `eps1` and `cap_reps` the
/// representation capacity at radius `eps2`. `cap_reps_coarse` is the
/// representation capacity at radius `alpha * nu / 16` (the task-count
/// bound's own radius); when absent, `cap_reps` stands in, which can only
/// enlarge the resulting task count.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundParams<T> {
    pub loss_bound: T,
    pub alpha: T,
    pub delta: T,
    pub nu: T,
    pub eps1: T,
    pub eps2: T,
    pub n: usize,
    pub cap_heads: usize,
    pub cap_reps: usize,
    pub cap_reps_coarse: Option<usize>,
}

impl<T: Scalar> BoundParams<T> {
    pub fn validate(&self) -> Result<()> {
        let check = |name: &'static str, ok: bool, reason: &str| -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(Error::Parameter {
                    name,
                    reason: reason.into(),
                })
            }
        };
        let fin = |v: T| v.is_finite();
        check("loss_bound", fin(self.loss_bound) && self.loss_bound > T::zero(), "M must be positive")?;
        check(
            "alpha",
            fin(self.alpha) && self.alpha > T::zero() && self.alpha <= T::one(),
            "must lie in (0, 1]",
        )?;
        check(
            "delta",
            fin(self.delta) && self.delta > T::zero() && self.delta < T::one(),
            "must lie in (0, 1)",
        )?;
        check("nu", fin(self.nu) && self.nu > T::zero(), "must be positive")?;
        check("eps1", fin(self.eps1) && self.eps1 > T::zero(), "must be positive")?;
        check("eps2", fin(self.eps2) && self.eps2 > T::zero(), "must be positive")?;
        check("n", self.n >= 1, "task count must be at least 1")?;
        check("cap_heads", self.cap_heads >= 1, "capacity must be at least 1")?;
        check("cap_reps", self.cap_reps >= 1, "capacity must be at least 1")?;
        check(
            "cap_reps_coarse",
            self.cap_reps_coarse.is_none_or(|c| c >= 1),
            "capacity must be at least 1",
        )?;
        Ok(())
    }

    fn check_radius_identity(&self, divisor: f64) -> Result<()> {
        let sum = self.eps1.to_f64().unwrap() + self.eps2.to_f64().unwrap();
        let want = self.alpha.to_f64().unwrap() * self.nu.to_f64().unwrap() / divisor;
        if (sum - want).abs() > EPS_CONSTRAINT_TOL {
            return Err(Error::BoundConstraint(format!(
                "eps1 + eps2 = {sum} must equal alpha*nu/{divisor} = {want} within {EPS_CONSTRAINT_TOL}"
            )));
        }
        Ok(())
    }

    /// eps1 + eps2 = alpha * nu / 8.
    pub fn check_m_bound_identity(&self) -> Result<()> {
        self.check_radius_identity(8.0)
    }

    /// eps1 + eps2 = alpha * nu / 16.
    pub fn check_nm_bound_identity(&self) -> Result<()> {
        self.check_radius_identity(16.0)
    }
}

/// Per-task sample size sufficient for the fixed-task guarantee:
///
/// m >= (8 M / (alpha^2 nu)) * (ln(cap_heads) + (1/n) ln(4 cap_reps / delta))
///
/// under eps1 + eps2 = alpha * nu / 8. Evaluated in double precision,
/// rounded up, clamped to at least 1.
pub fn theorem1_m<T: Scalar>(params: &BoundParams<T>) -> Result<usize> {
    params.validate()?;
    params.check_m_bound_identity()?;
    let m = params.loss_bound.to_f64().unwrap();
    let alpha = params.alpha.to_f64().unwrap();
    let nu = params.nu.to_f64().unwrap();
    let delta = params.delta.to_f64().unwrap();
    let c1 = params.cap_heads as f64;
    let c2 = params.cap_reps as f64;
    let rhs = 8.0 * m / (alpha * alpha * nu)
        * (c1.ln() + (4.0 * c2 / delta).ln() / params.n as f64);
    Ok((rhs.ceil().max(1.0)) as usize)
}

/// Task count and per-task sample size sufficient for the environment-drawn
/// guarantee:
///
/// n >= (32 M / alpha^2) * ln(8 cap_reps_coarse / delta)
/// m >= (32 M / (alpha^2 nu)) * (ln(cap_heads) + (1/n) ln(8 cap_reps / delta))
///
/// under eps1 + eps2 = alpha * nu / 16, with the head capacity read at
/// radius eps1. The m bound is evaluated at the returned n.
pub fn theorem2_nm<T: Scalar>(params: &BoundParams<T>) -> Result<(usize, usize)> {
    params.validate()?;
    params.check_nm_bound_identity()?;
    let m = params.loss_bound.to_f64().unwrap();
    let alpha = params.alpha.to_f64().unwrap();
    let nu = params.nu.to_f64().unwrap();
    let delta = params.delta.to_f64().unwrap();
    let c1 = params.cap_heads as f64;
    let c2 = params.cap_reps as f64;
    let c2_coarse = params.cap_reps_coarse.unwrap_or(params.cap_reps) as f64;

    let n_rhs = 32.0 * m / (alpha * alpha) * (8.0 * c2_coarse / delta).ln();
    let n_req = (n_rhs.ceil().max(1.0)) as usize;
    let m_rhs = 32.0 * m / (alpha * alpha * nu)
        * (c1.ln() + (8.0 * c2 / delta).ln() / n_req as f64);
    let m_req = (m_rhs.ceil().max(1.0)) as usize;
    Ok((n_req, m_req))
}
