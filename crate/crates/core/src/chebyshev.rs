//! Chebyshev centers of finite sets.
//!
//! In Euclidean space the Chebyshev center is the center of the minimum
//! enclosing ball, computed exactly with Welzl's move-to-front recursion in
//! any dimension. For other metrics the argmin is taken over a finite set of
//! candidate points and every near-minimal candidate is kept.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::{hausdorff_point_set, Metric, Point};

/// Default tolerance for declaring two objective values tied.
pub const DEFAULT_TIE_TOL: f64 = 1e-9;

/// Upper limit on the number of grid candidates generated per feasible set.
pub const MAX_GRID_CANDIDATES: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    MebEuclidean,
    CandidateArgmin,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChebyshevResult {
    /// All minimizers found, sorted lexicographically.
    pub centers: Vec<Point>,
    /// `min_z max_x d(x, z)` over the searched domain.
    pub radius: f64,
    pub solver: Solver,
    pub tie_tol: f64,
}

impl ChebyshevResult {
    /// Lexicographically smallest center.
    pub fn selected(&self) -> &Point {
        &self.centers[0]
    }

    pub(crate) fn singleton(point: Point, solver: Solver, tie_tol: f64) -> Self {
        ChebyshevResult {
            centers: vec![point],
            radius: 0.0,
            solver,
            tie_tol,
        }
    }
}

/// Minimum enclosing ball of a finite Euclidean point set.
#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

/// Exact minimum enclosing ball of `points` (all of equal dimension).
///
/// The returned radius is recomputed as the largest distance from the center
/// to the input, so it is the true objective value at the returned center.
pub fn minimum_enclosing_ball(points: &[Point]) -> Result<Ball> {
    let first = points.first().ok_or(Error::EmptySet("point set"))?;
    let dim = first.dim();
    if let Some(bad) = points.iter().find(|p| p.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: bad.dim(),
        });
    }
    let mut pts: Vec<&[f64]> = points.iter().map(Point::coords).collect();
    let scale = bounding_diagonal(&pts);
    let eps = 1e-12 * scale.max(f64::MIN_POSITIVE);
    let mut boundary = Vec::with_capacity(dim + 1);
    let end = pts.len();
    let ball = move_to_front(&mut pts, end, &mut boundary, dim, eps)
        .expect("non-empty input always yields a ball");
    let radius = points
        .iter()
        .map(|p| crate::metric::euclidean(p.coords(), &ball.center))
        .fold(0.0, f64::max);
    Ok(Ball {
        center: ball.center,
        radius,
    })
}

fn bounding_diagonal(pts: &[&[f64]]) -> f64 {
    let dim = pts[0].len();
    (0..dim)
        .map(|k| {
            let (lo, hi) = pts
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                    (lo.min(p[k]), hi.max(p[k]))
                });
            (hi - lo) * (hi - lo)
        })
        .sum::<f64>()
        .sqrt()
}

struct Sphere {
    center: Vec<f64>,
    radius: f64,
}

impl Sphere {
    fn contains(&self, p: &[f64], eps: f64) -> bool {
        crate::metric::euclidean(p, &self.center) <= self.radius + eps
    }
}

fn move_to_front<'a>(
    pts: &mut [&'a [f64]],
    end: usize,
    boundary: &mut Vec<&'a [f64]>,
    dim: usize,
    eps: f64,
) -> Option<Sphere> {
    let mut ball = circumsphere(boundary);
    if boundary.len() == dim + 1 {
        return ball;
    }
    for i in 0..end {
        let p = pts[i];
        let inside = ball.as_ref().is_some_and(|b| b.contains(p, eps));
        if !inside {
            boundary.push(p);
            ball = move_to_front(pts, i, boundary, dim, eps);
            boundary.pop();
            pts[..=i].rotate_right(1);
        }
    }
    ball
}

/// Smallest sphere through every boundary point, centered in their affine
/// hull. Affinely dependent points fall back to the sphere of an
/// independent subset, with the radius widened to cover all of them.
fn circumsphere(boundary: &[&[f64]]) -> Option<Sphere> {
    let (&p0, rest) = boundary.split_first()?;
    let k = rest.len();
    if k == 0 {
        return Some(Sphere {
            center: p0.to_vec(),
            radius: 0.0,
        });
    }
    let v: Vec<Vec<f64>> = rest
        .iter()
        .map(|p| p.iter().zip(p0).map(|(a, b)| a - b).collect())
        .collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    // 2 <v_j, v_l> alpha_l = |v_j|^2
    let mut gram = vec![vec![0.0; k + 1]; k];
    for j in 0..k {
        for l in 0..k {
            gram[j][l] = 2.0 * dot(&v[j], &v[l]);
        }
        gram[j][k] = dot(&v[j], &v[j]);
    }
    let alpha = solve_dropping_dependent(gram);
    let mut center = p0.to_vec();
    for (a, vj) in alpha.iter().zip(&v) {
        for (c, x) in center.iter_mut().zip(vj) {
            *c += a * x;
        }
    }
    let radius = boundary
        .iter()
        .map(|p| crate::metric::euclidean(p, &center))
        .fold(0.0, f64::max);
    Some(Sphere { center, radius })
}

/// Gaussian elimination with partial pivoting on an augmented `k x (k+1)`
/// system; columns whose pivot vanishes are pinned to zero.
fn solve_dropping_dependent(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let k = a.len();
    let scale = a
        .iter()
        .flat_map(|r| r[..k].iter())
        .fold(0.0_f64, |m, v| m.max(v.abs()));
    let tiny = 1e-12 * scale.max(f64::MIN_POSITIVE);
    let mut pivot_row = vec![usize::MAX; k];
    let mut row = 0;
    for col in 0..k {
        let Some(best) = (row..k).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
        else {
            break;
        };
        if a[best][col].abs() <= tiny {
            continue;
        }
        a.swap(row, best);
        for i in 0..k {
            if i != row {
                let f = a[i][col] / a[row][col];
                if f != 0.0 {
                    let pivot = a[row].clone();
                    for (x, y) in a[i][col..=k].iter_mut().zip(&pivot[col..=k]) {
                        *x -= f * y;
                    }
                }
            }
        }
        pivot_row[col] = row;
        row += 1;
    }
    (0..k)
        .map(|col| match pivot_row[col] {
            usize::MAX => 0.0,
            r => a[r][k] / a[r][col],
        })
        .collect()
}

/// Chebyshev center of `points` under `metric`, which must be Euclidean.
pub fn chebyshev_center_euclidean(
    metric: &Metric,
    points: &[Point],
    tie_tol: f64,
) -> Result<ChebyshevResult> {
    if !metric.is_euclidean() {
        return Err(Error::PolicyMismatch(
            "minimum enclosing ball requires the Euclidean metric".into(),
        ));
    }
    for p in points {
        metric.validate_point(p)?;
    }
    if let [single] = points {
        return Ok(ChebyshevResult::singleton(
            single.clone(),
            Solver::MebEuclidean,
            tie_tol,
        ));
    }
    let ball = minimum_enclosing_ball(points)?;
    Ok(ChebyshevResult {
        centers: vec![Point::new(ball.center)?],
        radius: ball.radius,
        solver: Solver::MebEuclidean,
        tie_tol,
    })
}

/// Minimizes `f(z) = max_{x in feasible} d(x, z)` over `candidates` and
/// returns every candidate within `tie_tol` of the minimum.
pub fn chebyshev_center_candidates(
    metric: &Metric,
    feasible: &[Point],
    candidates: &[Point],
    tie_tol: f64,
) -> Result<ChebyshevResult> {
    if feasible.is_empty() {
        return Err(Error::EmptySet("feasible set"));
    }
    let centers_with_values = candidates
        .iter()
        .map(|z| Ok((hausdorff_point_set(metric, z, feasible)?, z)))
        .collect::<Result<Vec<_>>>()?;
    let (radius, centers) = near_minimal(centers_with_values, tie_tol)?;
    Ok(ChebyshevResult {
        centers,
        radius,
        solver: Solver::CandidateArgmin,
        tie_tol,
    })
}

/// Minimum objective value and the sorted, deduplicated set of candidates
/// within `tie_tol` of it.
pub(crate) fn near_minimal(values: Vec<(f64, &Point)>, tie_tol: f64) -> Result<(f64, Vec<Point>)> {
    let min = values
        .iter()
        .map(|(v, _)| *v)
        .fold(f64::INFINITY, f64::min);
    if values.is_empty() {
        return Err(Error::EmptySet("candidate set"));
    }
    let mut centers: Vec<Point> = values
        .into_iter()
        .filter(|(v, _)| *v <= min + tie_tol)
        .map(|(_, z)| z.clone())
        .collect();
    centers.sort();
    centers.dedup();
    Ok((min, centers))
}

/// Lattice points `lo + k * step` covering the bounding box of `points`.
pub fn grid_candidates(points: &[Point], step: f64) -> Result<Vec<Point>> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::PolicyMismatch(format!("grid step {step} must be positive")));
    }
    let first = points.first().ok_or(Error::EmptySet("point set"))?;
    let dim = first.dim();
    let mut axes = Vec::with_capacity(dim);
    let mut total: usize = 1;
    for k in 0..dim {
        let lo = points.iter().map(|p| p.coords()[k]).fold(f64::INFINITY, f64::min);
        let hi = points.iter().map(|p| p.coords()[k]).fold(f64::NEG_INFINITY, f64::max);
        let n = ((hi - lo) / step).floor() as usize + 1;
        total = total.saturating_mul(n);
        if total > MAX_GRID_CANDIDATES {
            return Err(Error::PolicyMismatch(format!(
                "grid step {step} yields more than {MAX_GRID_CANDIDATES} candidates"
            )));
        }
        axes.push((0..n).map(|i| lo + i as f64 * step).collect::<Vec<_>>());
    }
    let mut out = Vec::with_capacity(total);
    let mut idx = vec![0usize; dim];
    loop {
        out.push(Point::new((0..dim).map(|k| axes[k][idx[k]]).collect())?);
        let mut k = dim;
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < axes[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
}
