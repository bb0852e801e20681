//! Robust null-space property: the kernel-size consequence
//! `kersize <= D2 · η` and a sampling falsifier for the hypothesis
//! `|||h|||₁ <= D1 · dist(h, M1 − M1) + D2 · |||A h|||₃`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::{diameter, Metric, Point};
use crate::problem::{ForwardModel, Matrix, MeasurementTable, Problem};
use crate::worst_case::kersize_worst;

/// Slack on `kersize <= D2 · η`.
pub const RNSP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RnspCertificate {
    pub d1: f64,
    pub d2: f64,
    /// Diameter of `E` in the measurement metric.
    pub eta: f64,
}

impl RnspCertificate {
    pub fn new(d1: f64, d2: f64, eta: f64) -> Result<Self> {
        if !(d1.is_finite() && d1 > 0.0 && d2.is_finite() && d2 > 0.0) {
            return Err(Error::InvalidProblem(format!(
                "rNSP constants must be positive, got D1 = {d1}, D2 = {d2}"
            )));
        }
        if !(eta.is_finite() && eta >= 0.0) {
            return Err(Error::InvalidProblem(format!("eta = {eta} must be >= 0")));
        }
        Ok(RnspCertificate { d1, d2, eta })
    }

    /// Certificate with `η = diam E` under the problem's `Y` metric.
    pub fn for_problem(problem: &Problem, d1: f64, d2: f64) -> Result<Self> {
        let eta = diameter(problem.metric_y(), problem.noise_class().points())?;
        RnspCertificate::new(d1, d2, eta)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RnspVerdict {
    pub kersize: f64,
    /// `D2 · η`.
    pub bound: f64,
    pub passes: bool,
}

/// Checks `kersize_worst <= D2 · η + tol` on a linear additive problem.
pub fn check_rnsp_bound(
    problem: &Problem,
    table: &MeasurementTable,
    cert: &RnspCertificate,
) -> Result<RnspVerdict> {
    if !matches!(problem.forward(), ForwardModel::LinearAdditive(_)) {
        return Err(Error::PolicyMismatch(format!(
            "rNSP check needs a linear_additive forward model, found {}",
            problem.forward().kind()
        )));
    }
    let kersize = kersize_worst(problem, table)?;
    let bound = cert.d2 * cert.eta;
    Ok(RnspVerdict {
        kersize,
        bound,
        passes: kersize <= bound + RNSP_TOL,
    })
}

/// The three norms of the property, each taken as the distance to the
/// origin in a metric. All default to Euclidean.
#[derive(Debug, Clone, PartialEq)]
pub struct RnspNorms {
    /// `|||·|||₁` on `X`.
    pub lhs: Metric,
    /// `|||·|||₂`, used for `dist(h, M1 − M1)`.
    pub dist: Metric,
    /// `|||·|||₃` on `Y`.
    pub measurement: Metric,
}

impl RnspNorms {
    pub fn euclidean(x_dim: usize, y_dim: usize) -> Result<Self> {
        Ok(RnspNorms {
            lhs: Metric::euclidean(x_dim)?,
            dist: Metric::euclidean(x_dim)?,
            measurement: Metric::euclidean(y_dim)?,
        })
    }
}

fn norm(metric: &Metric, v: &[f64]) -> Result<f64> {
    metric.dist(&Point::new(v.to_vec())?, &Point::zeros(v.len())?)
}

/// Searches for `h` violating the property; `None` is inconclusive.
///
/// Probes cycle through differences of model points, perturbed differences
/// and pure Gaussian vectors, all scaled to the model class.
pub fn rnsp_falsify(
    matrix: &Matrix,
    model: &[Point],
    cert: &RnspCertificate,
    norms: &RnspNorms,
    probes: usize,
    seed: u64,
) -> Result<Option<Vec<f64>>> {
    let first = model.first().ok_or(Error::EmptySet("model class"))?;
    let dim = first.dim();
    if matrix.cols() != dim {
        return Err(Error::DimensionMismatch {
            expected: matrix.cols(),
            found: dim,
        });
    }
    let mut differences: Vec<Vec<f64>> = Vec::with_capacity(model.len() * model.len());
    for a in model {
        for b in model {
            differences.push(a.coords().iter().zip(b.coords()).map(|(u, v)| u - v).collect());
        }
    }
    let scale = differences
        .iter()
        .map(|d| d.iter().fold(0.0_f64, |m, c| m.max(c.abs())))
        .fold(0.0, f64::max)
        .max(1.0);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gaussian = |rng: &mut ChaCha8Rng, s: f64| -> Vec<f64> {
        (0..dim).map(|_| s * rng.sample::<f64, _>(StandardNormal)).collect()
    };
    for k in 0..probes {
        let h: Vec<f64> = match k % 3 {
            0 => differences[rng.random_range(0..differences.len())].clone(),
            1 => {
                let base = &differences[rng.random_range(0..differences.len())];
                let noise = gaussian(&mut rng, 0.1 * scale);
                base.iter().zip(noise).map(|(b, n)| b + n).collect()
            }
            _ => gaussian(&mut rng, scale),
        };
        let lhs = norm(&norms.lhs, &h)?;
        let mut dist = f64::INFINITY;
        for d in &differences {
            let diff: Vec<f64> = h.iter().zip(d).map(|(u, v)| u - v).collect();
            dist = dist.min(norm(&norms.dist, &diff)?);
        }
        let rhs = cert.d1 * dist + cert.d2 * norm(&norms.measurement, &matrix.apply(&h))?;
        // relative slack keeps rounding noise from reporting false violations
        if lhs > rhs * (1.0 + 1e-12) + 1e-300 {
            return Ok(Some(h));
        }
    }
    Ok(None)
}
