//! Average kernel size, Bayesian posteriors and the average-case optimal
//! decoders, with the bound `kersize_a / 2 <= c_opt_a <= kersize_a`.
//!
//! The optimal decoder minimizes `z ↦ ∫ d(x, z)^p dμ^y` per measurement;
//! for `p = ∞` it minimizes the essential supremum instead, which on a
//! discrete posterior is the Chebyshev problem on the posterior support.

use rayon::prelude::*;
use serde::Serialize;

use crate::chebyshev::{near_minimal, grid_candidates, DEFAULT_TIE_TOL};
use crate::decoder::SetValuedDecoder;
use crate::error::{Error, Result};
use crate::measure::{disintegrate, err_a, residual, DiscreteMeasure, Disintegration, Order};
use crate::median::{weighted_geometric_median, weighted_mean, DEFAULT_MEDIAN_TOL};
use crate::metric::{hausdorff_point_set, Metric, Point};
use crate::problem::{Group, GroupKey, MeasurementTable, Problem};
use crate::worst_case::{chebyshev_of_points, CandidatePolicy, LOWER_BOUND_TOL, UPPER_BOUND_TOL};

/// `μ_{X|Y=y}`: the conditional `μ^y` with the noise marginalized out.
///
/// Weights of group `g` are aligned with `groups()[g].x_points()`;
/// groups of zero pushforward mass have no posterior.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorDistribution {
    weights: Vec<Option<Vec<f64>>>,
}

impl PosteriorDistribution {
    pub fn group(&self, g: usize) -> Option<&[f64]> {
        self.weights[g].as_deref()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

pub fn posterior_distribution(dis: &Disintegration, table: &MeasurementTable) -> PosteriorDistribution {
    let weights = table
        .groups()
        .iter()
        .enumerate()
        .map(|(gi, g)| {
            let cond = dis.conditional(gi)?;
            let mut w = vec![0.0; g.x_points().len()];
            for (a, c) in g.members().iter().zip(cond) {
                w[g.x_position(a.x).expect("member x")] += c;
            }
            Some(w)
        })
        .collect();
    PosteriorDistribution { weights }
}

fn pairwise(metric: &Metric, points: &[Point]) -> Result<Vec<Vec<f64>>> {
    points
        .iter()
        .map(|a| points.iter().map(|b| metric.dist(a, b)).collect())
        .collect()
}

/// Average kernel size of order `p`.
pub fn kersize_average(
    problem: &Problem,
    table: &MeasurementTable,
    dis: &Disintegration,
    order: Order,
) -> Result<f64> {
    let posterior = posterior_distribution(dis, table);
    let masses = dis.pushforward().masses();
    if !masses.iter().any(|m| *m > 0.0) {
        return Err(Error::ZeroMass);
    }
    let per_group = table
        .groups()
        .par_iter()
        .enumerate()
        .map(|(gi, g)| {
            let Some(w) = posterior.group(gi) else {
                return Ok(0.0);
            };
            let d = pairwise(problem.metric_x(), g.x_points())?;
            let n = w.len();
            Ok(match order {
                Order::Infinity => {
                    let mut m = 0.0_f64;
                    for i in 0..n {
                        for j in 0..n {
                            if w[i] > 0.0 && w[j] > 0.0 {
                                m = m.max(d[i][j]);
                            }
                        }
                    }
                    m
                }
                Order::Finite(_) => {
                    let mut s = 0.0;
                    for i in 0..n {
                        for j in 0..n {
                            s += w[i] * w[j] * order.pow(d[i][j]);
                        }
                    }
                    masses[gi] * s
                }
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(match order {
        Order::Infinity => per_group.into_iter().fold(0.0, f64::max),
        Order::Finite(_) => order.root(per_group.into_iter().sum()),
    })
}

/// Candidate domain for the argmin decoder.
#[derive(Debug, Clone, PartialEq)]
pub enum Candidates {
    /// The group's feasible points.
    Feasible,
    /// Feasible points plus a lattice over their bounding box.
    FeasiblePlusGrid { step: f64 },
    /// A fixed list, shared by every group.
    Explicit(Vec<Point>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum AveragePolicy {
    /// Posterior mean; `p = 2`, Euclidean.
    Mean,
    /// Weighted geometric median; `p = 1`, Euclidean.
    Median,
    /// All candidates within the tie tolerance of the minimal objective.
    CandidateArgmin(Candidates),
    /// Chebyshev centers of the posterior support; `p = ∞`.
    SupportChebyshev,
}

impl AveragePolicy {
    /// The exact solver for `order` on `metric`, if one exists, else the
    /// feasible-point argmin.
    pub fn default_for(metric: &Metric, order: Order) -> Self {
        match order {
            Order::Infinity => AveragePolicy::SupportChebyshev,
            Order::Finite(p) if p == 2.0 && metric.is_euclidean() => AveragePolicy::Mean,
            Order::Finite(p) if p == 1.0 && metric.is_euclidean() => AveragePolicy::Median,
            Order::Finite(_) => AveragePolicy::CandidateArgmin(Candidates::Feasible),
        }
    }

    pub fn name(&self) -> String {
        match self {
            AveragePolicy::Mean => "mean".into(),
            AveragePolicy::Median => "median".into(),
            AveragePolicy::SupportChebyshev => "support_chebyshev".into(),
            AveragePolicy::CandidateArgmin(Candidates::Feasible) => "candidate_argmin:feasible".into(),
            AveragePolicy::CandidateArgmin(Candidates::FeasiblePlusGrid { step }) => {
                format!("candidate_argmin:grid:{step}")
            }
            AveragePolicy::CandidateArgmin(Candidates::Explicit(c)) => {
                format!("candidate_argmin:explicit:{}", c.len())
            }
        }
    }

    fn check(&self, metric: &Metric, order: Order) -> Result<()> {
        let fail = |msg: &str| Err(Error::PolicyMismatch(msg.into()));
        match self {
            AveragePolicy::Mean if !metric.is_euclidean() => fail("mean requires a Euclidean metric"),
            AveragePolicy::Mean if order != Order::Finite(2.0) => fail("mean requires p = 2"),
            AveragePolicy::Median if !metric.is_euclidean() => {
                fail("median requires a Euclidean metric")
            }
            AveragePolicy::Median if order != Order::Finite(1.0) => fail("median requires p = 1"),
            AveragePolicy::SupportChebyshev if order != Order::Infinity => {
                fail("support_chebyshev requires p = inf")
            }
            AveragePolicy::CandidateArgmin(Candidates::FeasiblePlusGrid { .. })
                if metric.dimension().is_none() =>
            {
                fail("grid candidates need a coordinate metric")
            }
            AveragePolicy::CandidateArgmin(Candidates::Explicit(c)) if c.is_empty() => {
                fail("explicit candidate list is empty")
            }
            _ => Ok(()),
        }
    }
}

/// `∫ d(x, z)^p dμ^y` for finite `p`, or the max over the support for `∞`.
pub fn posterior_objective(
    metric: &Metric,
    points: &[Point],
    weights: &[f64],
    z: &Point,
    order: Order,
) -> Result<f64> {
    let mut acc = 0.0_f64;
    for (x, &w) in points.iter().zip(weights) {
        if w <= 0.0 {
            continue;
        }
        let d = metric.dist(x, z)?;
        acc = match order {
            Order::Infinity => acc.max(d),
            Order::Finite(_) => acc + w * order.pow(d),
        };
    }
    Ok(acc)
}

fn decode_group(
    metric: &Metric,
    group: &Group,
    weights: Option<&[f64]>,
    order: Order,
    policy: &AveragePolicy,
) -> Result<Vec<Point>> {
    let points = group.x_points();
    let Some(w) = weights else {
        // null group: any output is optimal, use the worst-case center
        let fallback = CandidatePolicy::default_for(metric);
        return Ok(chebyshev_of_points(metric, points, &fallback)?.centers);
    };
    match policy {
        AveragePolicy::Mean => Ok(vec![weighted_mean(points, &normalized(w))?]),
        AveragePolicy::Median => Ok(vec![weighted_geometric_median(
            points,
            &normalized(w),
            DEFAULT_MEDIAN_TOL,
        )?]),
        AveragePolicy::SupportChebyshev => {
            let support: Vec<Point> = points
                .iter()
                .zip(w)
                .filter(|(_, w)| **w > 0.0)
                .map(|(x, _)| x.clone())
                .collect();
            let inner = if metric.is_euclidean() {
                CandidatePolicy::EuclideanMeb
            } else {
                CandidatePolicy::FeasiblePoints
            };
            if metric.is_euclidean() {
                Ok(chebyshev_of_points(metric, &support, &inner)?.centers)
            } else {
                // candidates range over the whole feasible set
                let values = points
                    .iter()
                    .map(|z| Ok((hausdorff_point_set(metric, z, &support)?, z)))
                    .collect::<Result<Vec<_>>>()?;
                Ok(near_minimal(values, DEFAULT_TIE_TOL)?.1)
            }
        }
        AveragePolicy::CandidateArgmin(c) => {
            let owned;
            let candidates: &[Point] = match c {
                Candidates::Feasible => points,
                Candidates::FeasiblePlusGrid { step } => {
                    let mut all = points.to_vec();
                    all.extend(grid_candidates(points, *step)?);
                    owned = all;
                    &owned
                }
                Candidates::Explicit(list) => list,
            };
            let values = candidates
                .iter()
                .map(|z| Ok((posterior_objective(metric, points, w, z, order)?, z)))
                .collect::<Result<Vec<_>>>()?;
            Ok(near_minimal(values, DEFAULT_TIE_TOL)?.1)
        }
    }
}

/// Posterior weights sum to one up to rounding; renormalize so the solvers'
/// input check sees a probability vector.
fn normalized(w: &[f64]) -> Vec<f64> {
    let s: f64 = w.iter().sum();
    w.iter().map(|v| v / s).collect()
}

/// The average-case optimal decoder under `policy`.
///
/// Groups of zero pushforward mass get the worst-case Chebyshev center so
/// the decoder stays total.
pub fn optimal_decoder_average(
    problem: &Problem,
    table: &MeasurementTable,
    dis: &Disintegration,
    order: Order,
    policy: &AveragePolicy,
) -> Result<SetValuedDecoder> {
    policy.check(problem.metric_x(), order)?;
    let posterior = posterior_distribution(dis, table);
    let outputs = decode_all(problem, table, &posterior, order, policy)?;
    SetValuedDecoder::new(
        table
            .groups()
            .iter()
            .map(|g| g.key().clone())
            .zip(outputs)
            .collect::<Vec<_>>(),
    )
}

fn decode_all(
    problem: &Problem,
    table: &MeasurementTable,
    posterior: &PosteriorDistribution,
    order: Order,
    policy: &AveragePolicy,
) -> Result<Vec<Vec<Point>>> {
    table
        .groups()
        .par_iter()
        .enumerate()
        .map(|(gi, g)| decode_group(problem.metric_x(), g, posterior.group(gi), order, policy))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AverageGroupRow {
    pub key: GroupKey,
    /// `(F_* μ)(y)`.
    pub mass: f64,
    /// Number of feasible points with positive posterior weight.
    pub posterior_support: usize,
    pub outputs: Vec<Point>,
    /// `mass * ∫ r^p dμ^y` for finite `p`; the posterior ess-sup of the
    /// residual for `p = ∞`.
    pub error_contribution: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AverageReport {
    pub order: Order,
    pub policy: String,
    pub kersize: f64,
    pub decoder_error: f64,
    /// `kersize / 2 - tol <= decoder_error`.
    pub lower_bound_holds: bool,
    /// `decoder_error <= kersize + tol`; `None` when the policy carries no
    /// such guarantee.
    pub upper_bound_holds: Option<bool>,
    pub groups: Vec<AverageGroupRow>,
    #[serde(skip)]
    pub decoder: SetValuedDecoder,
}

impl AverageReport {
    /// True unless an asserted verdict failed.
    pub fn verdicts_hold(&self) -> bool {
        self.lower_bound_holds && self.upper_bound_holds != Some(false)
    }
}

/// Whether the upper bound is guaranteed for this policy and these outputs.
///
/// Exact solvers always qualify. A candidate argmin qualifies when its
/// candidates contain the feasible set, and, for finite `p`, it picked a
/// single point per group: the sup convention charges every tied output,
/// so a tie set can exceed the kernel size.
fn upper_asserted(policy: &AveragePolicy, order: Order, outputs: &[Vec<Point>], posterior: &PosteriorDistribution) -> bool {
    match policy {
        AveragePolicy::Mean | AveragePolicy::Median | AveragePolicy::SupportChebyshev => true,
        AveragePolicy::CandidateArgmin(Candidates::Explicit(_)) => false,
        AveragePolicy::CandidateArgmin(_) => {
            order == Order::Infinity
                || outputs
                    .iter()
                    .enumerate()
                    .all(|(gi, out)| posterior.group(gi).is_none() || out.len() == 1)
        }
    }
}

/// Average kernel size, the optimal decoder, its error and the verdicts.
pub fn average_report(
    problem: &Problem,
    table: &MeasurementTable,
    mu: &DiscreteMeasure,
    order: Order,
    policy: &AveragePolicy,
) -> Result<AverageReport> {
    policy.check(problem.metric_x(), order)?;
    let dis = disintegrate(mu, table)?;
    let kersize = kersize_average(problem, table, &dis, order)?;
    let posterior = posterior_distribution(&dis, table);
    let outputs = decode_all(problem, table, &posterior, order, policy)?;
    let metric = problem.metric_x();
    let groups = table
        .groups()
        .iter()
        .zip(&outputs)
        .enumerate()
        .map(|(gi, (g, out))| {
            let mass = dis.pushforward().mass(gi);
            let (support, contribution) = match posterior.group(gi) {
                None => (0, 0.0),
                Some(w) => {
                    let mut acc = 0.0_f64;
                    for (x, &wx) in g.x_points().iter().zip(w) {
                        if wx > 0.0 {
                            let r = hausdorff_point_set(metric, x, out)?;
                            acc = match order {
                                Order::Infinity => acc.max(r),
                                Order::Finite(_) => acc + wx * order.pow(r),
                            };
                        }
                    }
                    let contribution = match order {
                        Order::Infinity => acc,
                        Order::Finite(_) => mass * acc,
                    };
                    (w.iter().filter(|v| **v > 0.0).count(), contribution)
                }
            };
            Ok(AverageGroupRow {
                key: g.key().clone(),
                mass,
                posterior_support: support,
                outputs: out.clone(),
                error_contribution: contribution,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let asserted = upper_asserted(policy, order, &outputs, &posterior);
    let decoder = SetValuedDecoder::new(
        table
            .groups()
            .iter()
            .map(|g| g.key().clone())
            .zip(outputs)
            .collect::<Vec<_>>(),
    )?;
    let decoder_error = err_a(&residual(problem, table, &decoder)?, mu, order)?;
    Ok(AverageReport {
        order,
        policy: policy.name(),
        kersize,
        decoder_error,
        lower_bound_holds: kersize / 2.0 - LOWER_BOUND_TOL <= decoder_error,
        upper_bound_holds: asserted.then_some(decoder_error <= kersize + UPPER_BOUND_TOL),
        groups,
        decoder,
    })
}
