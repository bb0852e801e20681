//! Weighted mean and weighted geometric median of a finite point set.

use crate::error::{Error, Result};
use crate::metric::{euclidean, Point};

/// Default stopping tolerance on the (sub)gradient norm.
pub const DEFAULT_MEDIAN_TOL: f64 = 1e-10;
/// Iteration cap of the Weiszfeld loop.
pub const MAX_MEDIAN_ITERATIONS: usize = 100_000;

fn check_weighted(points: &[Point], weights: &[f64]) -> Result<usize> {
    let first = points.first().ok_or(Error::EmptySet("point set"))?;
    if weights.len() != points.len() {
        return Err(Error::DimensionMismatch {
            expected: points.len(),
            found: weights.len(),
        });
    }
    let dim = first.dim();
    if let Some(bad) = points.iter().find(|p| p.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: bad.dim(),
        });
    }
    if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::InvalidMeasure(format!(
            "weight {i} must be finite and non-negative"
        )));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidMeasure(format!(
            "weights sum to {total}, expected 1"
        )));
    }
    Ok(dim)
}

/// Coordinatewise weighted average; weights must sum to one.
pub fn weighted_mean(points: &[Point], weights: &[f64]) -> Result<Point> {
    let dim = check_weighted(points, weights)?;
    let mut mean = vec![0.0; dim];
    for (p, w) in points.iter().zip(weights) {
        for (m, c) in mean.iter_mut().zip(p.coords()) {
            *m += w * c;
        }
    }
    Point::new(mean)
}

/// `Σ w_i ‖x_i − z‖`.
pub fn fermat_objective(points: &[Point], weights: &[f64], z: &[f64]) -> f64 {
    points
        .iter()
        .zip(weights)
        .map(|(p, w)| w * euclidean(p.coords(), z))
        .sum()
}

/// Minimizer of `Σ w_i ‖x_i − z‖` by Weiszfeld iteration with the
/// Vardi–Zhang modification at data points.
///
/// Every data point is first tested for optimality: `x_k` is a minimizer
/// iff the pull of the other points, `‖Σ_{i≠k} w_i u_i‖`, does not exceed
/// `w_k`. When several minimizers exist (equal-weight collinear points)
/// one of them is returned.
pub fn weighted_geometric_median(points: &[Point], weights: &[f64], tol: f64) -> Result<Point> {
    check_weighted(points, weights)?;
    let (atoms, masses) = merge_coincident(points, weights);
    if atoms.len() == 1 {
        return Ok(atoms[0].clone());
    }
    let scale = atoms
        .iter()
        .map(|a| a.coords().iter().fold(0.0_f64, |m, c| m.max(c.abs())))
        .fold(0.0, f64::max)
        .max(1.0);
    let coincide = 1e-12 * scale;

    let mut start = 0;
    let mut best = f64::INFINITY;
    for (k, a) in atoms.iter().enumerate() {
        let step = pull(&atoms, &masses, a.coords(), coincide);
        if step.resultant_norm <= step.anchor_mass {
            return Ok(a.clone());
        }
        let value = fermat_objective(&atoms, &masses, a.coords());
        if value < best {
            best = value;
            start = k;
        }
    }

    let mut y = atoms[start].coords().to_vec();
    for _ in 0..MAX_MEDIAN_ITERATIONS {
        let step = pull(&atoms, &masses, &y, coincide);
        let gradient = step.resultant_norm - step.anchor_mass;
        if gradient <= tol {
            return Point::new(y);
        }
        let keep = (step.anchor_mass / step.resultant_norm).min(1.0);
        let next: Vec<f64> = step
            .weiszfeld
            .iter()
            .zip(&y)
            .map(|(t, c)| (1.0 - keep) * t + keep * c)
            .collect();
        let moved = euclidean(&next, &y);
        y = next;
        if moved <= 1e-15 * scale {
            return Point::new(y);
        }
    }
    Err(Error::NonConvergence(MAX_MEDIAN_ITERATIONS))
}

fn merge_coincident(points: &[Point], weights: &[f64]) -> (Vec<Point>, Vec<f64>) {
    let mut order: Vec<usize> = (0..points.len()).filter(|&i| weights[i] > 0.0).collect();
    order.sort_by(|&a, &b| points[a].cmp(&points[b]).then(a.cmp(&b)));
    let mut atoms: Vec<Point> = Vec::new();
    let mut masses: Vec<f64> = Vec::new();
    for i in order {
        if atoms.last() == Some(&points[i]) {
            *masses.last_mut().expect("paired") += weights[i];
        } else {
            atoms.push(points[i].clone());
            masses.push(weights[i]);
        }
    }
    (atoms, masses)
}

struct Pull {
    /// Weiszfeld map `T(y)` over the atoms not coinciding with `y`.
    weiszfeld: Vec<f64>,
    /// `‖Σ_{x_i ≠ y} w_i (x_i − y) / ‖x_i − y‖‖`.
    resultant_norm: f64,
    /// Total weight of atoms coinciding with `y`.
    anchor_mass: f64,
}

fn pull(atoms: &[Point], masses: &[f64], y: &[f64], coincide: f64) -> Pull {
    let dim = y.len();
    let mut num = vec![0.0; dim];
    let mut resultant = vec![0.0; dim];
    let mut den = 0.0;
    let mut anchor_mass = 0.0;
    for (a, &w) in atoms.iter().zip(masses) {
        let d = euclidean(a.coords(), y);
        if d <= coincide {
            anchor_mass += w;
            continue;
        }
        den += w / d;
        for k in 0..dim {
            num[k] += w * a.coords()[k] / d;
            resultant[k] += w * (a.coords()[k] - y[k]) / d;
        }
    }
    let weiszfeld = if den > 0.0 {
        num.iter().map(|v| v / den).collect()
    } else {
        y.to_vec()
    };
    Pull {
        weiszfeld,
        resultant_norm: resultant.iter().map(|v| v * v).sum::<f64>().sqrt(),
        anchor_mass,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[f64]) -> Point {
        Point::new(c.to_vec()).unwrap()
    }

    #[test]
    fn mean_examples() {
        assert_eq!(
            weighted_mean(&[p(&[0.0, 0.0]), p(&[0.0, 1.0])], &[0.25, 0.75]).unwrap(),
            p(&[0.0, 0.75])
        );
        assert_eq!(weighted_mean(&[p(&[4.0, 2.0])], &[1.0]).unwrap(), p(&[4.0, 2.0]));
        assert_eq!(
            weighted_mean(&[p(&[0.0]), p(&[1.0])], &[0.25, 0.75]).unwrap(),
            p(&[0.75])
        );
        assert!(matches!(
            weighted_mean(&[p(&[0.0]), p(&[1.0])], &[0.5, 0.6]),
            Err(Error::InvalidMeasure(_))
        ));
    }

    #[test]
    fn majority_atom_is_the_median() {
        let m = weighted_geometric_median(&[p(&[0.0]), p(&[1.0])], &[0.3, 0.7], 1e-10).unwrap();
        assert_eq!(m, p(&[1.0]));
    }

    #[test]
    fn point_mass_median() {
        let m = weighted_geometric_median(&[p(&[2.0, 2.0]), p(&[5.0, 1.0])], &[1.0, 0.0], 1e-10)
            .unwrap();
        assert_eq!(m, p(&[2.0, 2.0]));
    }

    #[test]
    fn fermat_point_of_right_triangle() {
        // All angles < 120°, so the minimizer is interior and the three unit
        // vectors toward the vertices sum to zero there.
        let pts = [p(&[0.0, 0.0]), p(&[1.0, 0.0]), p(&[0.0, 1.0])];
        let w = [1.0 / 3.0; 3];
        let m = weighted_geometric_median(&pts, &w, 1e-12).unwrap();
        let mut resultant = [0.0; 2];
        for x in &pts {
            let d = euclidean(x.coords(), m.coords());
            for (r, (a, b)) in resultant.iter_mut().zip(x.coords().iter().zip(m.coords())) {
                *r += (a - b) / d;
            }
        }
        assert!(resultant.iter().all(|r| r.abs() < 1e-9));
        // symmetric about the diagonal
        assert!((m.coords()[0] - m.coords()[1]).abs() < 1e-9);
    }

    #[test]
    fn obtuse_vertex_is_optimal() {
        // angle at the origin exceeds 120°
        let pts = [p(&[0.0, 0.0]), p(&[1.0, 0.1]), p(&[-1.0, 0.1])];
        let m = weighted_geometric_median(&pts, &[1.0 / 3.0; 3], 1e-10).unwrap();
        assert_eq!(m, p(&[0.0, 0.0]));
    }

    #[test]
    fn coincident_points_merge() {
        let pts = [p(&[0.0]), p(&[0.0]), p(&[1.0])];
        let m = weighted_geometric_median(&pts, &[0.3, 0.3, 0.4], 1e-10).unwrap();
        assert_eq!(m, p(&[0.0]));
    }
}
