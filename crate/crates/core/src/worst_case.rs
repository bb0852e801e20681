//! Worst-case kernel size, the worst-case optimal decoder and the bound
//! `kersize / 2 <= c_opt <= kersize`.
//!
//! The optimal decoder maps each measurement `y` to the Chebyshev centers of
//! its feasible set `F_y`. Its worst-case error is the largest Chebyshev
//! radius, which is at least half and at most the whole diameter of `F_y`.

use rayon::prelude::*;
use serde::Serialize;

use crate::chebyshev::{
    chebyshev_center_candidates, chebyshev_center_euclidean, grid_candidates, ChebyshevResult,
    Solver, DEFAULT_TIE_TOL,
};
use crate::decoder::SetValuedDecoder;
use crate::error::{Error, Result};
use crate::metric::{diameter, hausdorff_point_set, Metric, Point};
use crate::problem::{Group, GroupKey, MeasurementTable, Problem};

/// Slack on the lower bound `kersize / 2 <= error`.
pub const LOWER_BOUND_TOL: f64 = 1e-9;
/// Slack on the upper bound `error <= kersize`.
pub const UPPER_BOUND_TOL: f64 = 1e-6;

/// Where the worst-case decoder looks for Chebyshev centers.
#[derive(Debug, Clone, PartialEq)]
pub enum CandidatePolicy {
    /// Exact minimum enclosing ball; Euclidean `d_X` only.
    EuclideanMeb,
    /// Argmin over the feasible points themselves.
    FeasiblePoints,
    /// Argmin over the feasible points plus a lattice covering their
    /// bounding box.
    FeasiblePlusGrid { step: f64 },
}

impl CandidatePolicy {
    /// MEB for Euclidean metrics, feasible points otherwise.
    pub fn default_for(metric: &Metric) -> Self {
        if metric.is_euclidean() {
            CandidatePolicy::EuclideanMeb
        } else {
            CandidatePolicy::FeasiblePoints
        }
    }

    pub fn name(&self) -> String {
        match self {
            CandidatePolicy::EuclideanMeb => "euclidean_meb".into(),
            CandidatePolicy::FeasiblePoints => "feasible_points".into(),
            CandidatePolicy::FeasiblePlusGrid { step } => format!("feasible_plus_grid:{step}"),
        }
    }
}

/// `sup_y diam F_y`.
pub fn kersize_worst(problem: &Problem, table: &MeasurementTable) -> Result<f64> {
    let diameters = group_diameters(problem, table)?;
    Ok(diameters.into_iter().fold(0.0, f64::max))
}

fn group_diameters(problem: &Problem, table: &MeasurementTable) -> Result<Vec<f64>> {
    table
        .groups()
        .par_iter()
        .map(|g| diameter(problem.metric_x(), g.x_points()))
        .collect()
}

/// Chebyshev center of a single group's feasible set under `policy`.
pub fn chebyshev_for_group(
    metric: &Metric,
    group: &Group,
    policy: &CandidatePolicy,
) -> Result<ChebyshevResult> {
    chebyshev_of_points(metric, group.x_points(), policy)
}

pub(crate) fn chebyshev_of_points(
    metric: &Metric,
    points: &[Point],
    policy: &CandidatePolicy,
) -> Result<ChebyshevResult> {
    if let CandidatePolicy::EuclideanMeb = policy {
        return chebyshev_center_euclidean(metric, points, DEFAULT_TIE_TOL);
    }
    if let [single] = points {
        return Ok(ChebyshevResult::singleton(
            single.clone(),
            Solver::CandidateArgmin,
            DEFAULT_TIE_TOL,
        ));
    }
    match policy {
        CandidatePolicy::FeasiblePoints => {
            chebyshev_center_candidates(metric, points, points, DEFAULT_TIE_TOL)
        }
        CandidatePolicy::FeasiblePlusGrid { step } => {
            if metric.dimension().is_none() {
                return Err(Error::PolicyMismatch(
                    "grid candidates need a coordinate metric".into(),
                ));
            }
            let mut candidates = points.to_vec();
            candidates.extend(grid_candidates(points, *step)?);
            chebyshev_center_candidates(metric, points, &candidates, DEFAULT_TIE_TOL)
        }
        CandidatePolicy::EuclideanMeb => unreachable!(),
    }
}

fn check_policy(problem: &Problem, policy: &CandidatePolicy) -> Result<()> {
    if matches!(policy, CandidatePolicy::EuclideanMeb) && !problem.metric_x().is_euclidean() {
        return Err(Error::PolicyMismatch(
            "euclidean_meb requires a Euclidean metric on X".into(),
        ));
    }
    Ok(())
}

/// Chebyshev centers of every feasible set, in group order.
pub fn chebyshev_per_group(
    problem: &Problem,
    table: &MeasurementTable,
    policy: &CandidatePolicy,
) -> Result<Vec<ChebyshevResult>> {
    check_policy(problem, policy)?;
    table
        .groups()
        .par_iter()
        .map(|g| chebyshev_for_group(problem.metric_x(), g, policy))
        .collect()
}

/// The worst-case optimal decoder: `y ↦ argmin_z sup_{x in F_y} d(x, z)`.
pub fn optimal_decoder_worst(
    problem: &Problem,
    table: &MeasurementTable,
    policy: &CandidatePolicy,
) -> Result<SetValuedDecoder> {
    let results = chebyshev_per_group(problem, table, policy)?;
    decoder_from_results(table, results)
}

fn decoder_from_results(
    table: &MeasurementTable,
    results: Vec<ChebyshevResult>,
) -> Result<SetValuedDecoder> {
    SetValuedDecoder::new(
        table
            .groups()
            .iter()
            .zip(results)
            .map(|(g, r)| (g.key().clone(), r.centers))
            .collect::<Vec<_>>(),
    )
}

/// `sup_{(x, e)} d^H(x, φ(F(x, e)))`, charging every output point.
pub fn worst_case_error(
    problem: &Problem,
    table: &MeasurementTable,
    decoder: &SetValuedDecoder,
) -> Result<f64> {
    Ok(per_group_worst_error(problem, table, decoder)?
        .into_iter()
        .fold(0.0, f64::max))
}

pub(crate) fn per_group_worst_error(
    problem: &Problem,
    table: &MeasurementTable,
    decoder: &SetValuedDecoder,
) -> Result<Vec<f64>> {
    table
        .groups()
        .par_iter()
        .map(|g| {
            let out = decoder.output(g.key())?;
            g.x_points().iter().try_fold(0.0_f64, |acc, x| {
                Ok(acc.max(hausdorff_point_set(problem.metric_x(), x, out)?))
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorstGroupRow {
    pub key: GroupKey,
    pub feasible_size: usize,
    pub diameter: f64,
    pub radius: f64,
    pub centers: Vec<Point>,
    pub solver: Solver,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorstCaseReport {
    pub policy: String,
    pub kersize: f64,
    pub decoder_error: f64,
    /// `kersize / 2 - tol <= decoder_error`.
    pub lower_bound_holds: bool,
    /// `decoder_error <= kersize + tol`.
    pub upper_bound_holds: bool,
    pub groups: Vec<WorstGroupRow>,
    #[serde(skip)]
    pub decoder: SetValuedDecoder,
}

impl WorstCaseReport {
    pub fn verdicts_hold(&self) -> bool {
        self.lower_bound_holds && self.upper_bound_holds
    }
}

/// Kernel size, optimal decoder, its error and both bound verdicts.
///
/// Every candidate policy searches a domain containing `F_y`, so the upper
/// bound is asserted for all of them.
pub fn worst_case_report(
    problem: &Problem,
    table: &MeasurementTable,
    policy: &CandidatePolicy,
) -> Result<WorstCaseReport> {
    let diameters = group_diameters(problem, table)?;
    let results = chebyshev_per_group(problem, table, policy)?;
    let groups: Vec<WorstGroupRow> = table
        .groups()
        .iter()
        .zip(&diameters)
        .zip(&results)
        .map(|((g, &diameter), r)| WorstGroupRow {
            key: g.key().clone(),
            feasible_size: g.x_points().len(),
            diameter,
            radius: r.radius,
            centers: r.centers.clone(),
            solver: r.solver,
        })
        .collect();
    let kersize = diameters.into_iter().fold(0.0, f64::max);
    let decoder = decoder_from_results(table, results)?;
    let decoder_error = worst_case_error(problem, table, &decoder)?;
    Ok(WorstCaseReport {
        policy: policy.name(),
        kersize,
        decoder_error,
        lower_bound_holds: kersize / 2.0 - LOWER_BOUND_TOL <= decoder_error,
        upper_bound_holds: decoder_error <= kersize + UPPER_BOUND_TOL,
        groups,
        decoder,
    })
}
