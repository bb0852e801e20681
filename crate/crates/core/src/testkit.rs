//! Seeded random problem ensembles and brute-force oracles for the test
//! suites. Nothing here is used by the solvers.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::measure::DiscreteMeasure;
use crate::metric::Point;
use crate::problem::{Matrix, ModelClass, NoiseClass, Problem};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn round_to(v: f64, decimals: i32) -> f64 {
    let s = 10f64.powi(decimals);
    (v * s).round() / s
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Random linear additive problem with `dim <= 4`, `|M1| <= 12`,
/// `|E| <= 4` and Gaussian matrix entries rounded to 6 decimals.
///
/// Most draws get an integer kernel vector `v` (the last column is solved
/// for it) and a model class containing lattice lines `s + k v`, so that
/// feasible sets have several points. Noise points of the form
/// `A (x_a - x_b)` make additional atoms collide.
pub fn random_additive_problem(seed: u64) -> Problem {
    let mut rng = rng(seed);
    let n = rng.random_range(1..=4usize);
    let m = rng.random_range(1..=n);
    let mut a: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..n).map(|_| round_to(gaussian(&mut rng), 6)).collect())
        .collect();
    let with_kernel = rng.random_range(0..4) != 0;
    let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-2..=2) as f64).collect();
    v[n - 1] = 1.0;
    if with_kernel {
        for row in &mut a {
            let s: f64 = row[..n - 1].iter().zip(&v).map(|(x, y)| x * y).sum();
            row[n - 1] = round_to(-s, 6);
        }
    }
    let matrix = Matrix::from_rows(a).expect("rectangular");

    let target = rng.random_range(1..=12usize);
    let mut points: Vec<Vec<f64>> = Vec::new();
    while points.len() < target {
        let seed_point: Vec<f64> = (0..n).map(|_| round_to(gaussian(&mut rng), 3)).collect();
        let line = with_kernel && rng.random_range(0..3) != 0;
        let steps: &[i32] = if line { &[0, 1, -1, 2, -2] } else { &[0] };
        let take = rng.random_range(1..=steps.len());
        for &k in &steps[..take] {
            let p: Vec<f64> = seed_point.iter().zip(&v).map(|(s, d)| s + k as f64 * d).collect();
            if points.len() < target && !points.contains(&p) {
                points.push(p);
            }
        }
    }
    let model = ModelClass::new(points.iter().map(|p| Point::new(p.clone()).unwrap()).collect())
        .expect("distinct points");

    let n_e = rng.random_range(1..=4usize);
    let mut noise = vec![vec![0.0; m]];
    while noise.len() < n_e {
        let e = if points.len() > 1 && rng.random_range(0..2) == 0 {
            let i = rng.random_range(0..points.len());
            let j = rng.random_range(0..points.len());
            let d: Vec<f64> = points[i].iter().zip(&points[j]).map(|(x, y)| x - y).collect();
            matrix.apply(&d)
        } else {
            (0..m).map(|_| round_to(0.5 * gaussian(&mut rng), 3)).collect()
        };
        noise.push(e);
    }
    let noise = NoiseClass::new(noise.into_iter().map(|e| Point::new(e).unwrap()).collect())
        .expect("consistent noise");
    Problem::linear_additive(matrix, model, noise).expect("consistent problem")
}

/// Random measure on the problem's atoms: uniform, or independent
/// exponential weights with about a fifth of the atoms zeroed.
pub fn random_measure(problem: &Problem, seed: u64, uniform: bool) -> DiscreteMeasure {
    if uniform {
        return DiscreteMeasure::uniform_for(problem).expect("non-empty");
    }
    let mut rng = rng(seed ^ 0x9e37_79b9_7f4a_7c15);
    let (n_x, n_e) = (problem.model_class().len(), problem.noise_class().len());
    loop {
        let w: Vec<f64> = (0..n_x * n_e)
            .map(|_| {
                if rng.random_range(0..5) == 0 {
                    0.0
                } else {
                    -rng.random::<f64>().max(1e-12).ln()
                }
            })
            .collect();
        let total: f64 = w.iter().sum();
        if total > 0.0 {
            let w = w.iter().map(|x| x / total).collect();
            return DiscreteMeasure::new(n_x, n_e, w).expect("valid weights");
        }
    }
}

/// `n` points with coordinates uniform in `[-1, 1]`.
pub fn random_points(rng: &mut ChaCha8Rng, dim: usize, n: usize) -> Vec<Point> {
    (0..n)
        .map(|_| Point::new((0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect()).unwrap())
        .collect()
}

/// Probability weights bounded away from zero.
pub fn random_weights(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = w.iter().sum();
    w.iter().map(|x| x / total).collect()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Distance from `p` to the axis-aligned box `lo..hi`.
fn dist_to_box(p: &[f64], lo: &[f64], hi: &[f64]) -> f64 {
    let mut s = 0.0;
    for k in 0..p.len() {
        let d = if p[k] < lo[k] {
            lo[k] - p[k]
        } else if p[k] > hi[k] {
            p[k] - hi[k]
        } else {
            0.0
        };
        s += d * d;
    }
    s.sqrt()
}

struct Cell {
    bound: f64,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.bound == other.bound
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    // min-heap on the lower bound
    fn cmp(&self, other: &Self) -> Ordering {
        other.bound.total_cmp(&self.bound)
    }
}

/// Result of a grid oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub argmin: Vec<f64>,
    pub value: f64,
    /// Number of cells examined.
    pub cells: usize,
}

/// Lower bound of the objective over the cell `[lo, hi]` with center `c`
/// and center value `f(c)`.
type CellBound<'a> = dyn Fn(&[f64], &[f64], &[f64], f64) -> f64 + 'a;

/// Exhaustive search over a dyadic grid on the bounding box of `points`,
/// refined until cells have half-diagonal at most `resolution`.
///
/// Cells are discarded only when a rigorous lower bound of `objective`
/// over the cell is no better than the best grid value found, so the
/// result equals the minimum over every cell center of the finest grid.
fn branch_and_bound(
    points: &[Vec<f64>],
    resolution: f64,
    objective: &dyn Fn(&[f64]) -> f64,
    lower_bound: &CellBound,
    budget: usize,
) -> OracleResult {
    let dim = points[0].len();
    let mut lo: Vec<f64> = (0..dim)
        .map(|k| points.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min))
        .collect();
    let mut hi: Vec<f64> = (0..dim)
        .map(|k| points.iter().map(|p| p[k]).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    // pad degenerate extents so the root cell is a proper box
    let span = (0..dim).map(|k| hi[k] - lo[k]).fold(0.0, f64::max).max(1e-3);
    for k in 0..dim {
        let w = hi[k] - lo[k];
        let pad = (span - w) / 2.0;
        lo[k] -= pad;
        hi[k] += pad;
    }

    let mut best_x = points[0].clone();
    let mut best = objective(&best_x);
    for p in points {
        let v = objective(p);
        if v < best {
            best = v;
            best_x = p.clone();
        }
    }

    let mut heap = BinaryHeap::new();
    let center = |lo: &[f64], hi: &[f64]| -> Vec<f64> {
        lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect()
    };
    let c = center(&lo, &hi);
    let fc = objective(&c);
    if fc < best {
        best = fc;
        best_x = c.clone();
    }
    heap.push(Cell {
        bound: lower_bound(&lo, &hi, &c, fc),
        lo,
        hi,
    });
    let mut cells = 1;
    while let Some(cell) = heap.pop() {
        if cell.bound >= best {
            break;
        }
        let half_diag = 0.5 * dist(&cell.lo, &cell.hi);
        if half_diag <= resolution {
            continue;
        }
        // split every axis in half
        for mask in 0..(1usize << dim) {
            let mut lo = cell.lo.clone();
            let mut hi = cell.hi.clone();
            for k in 0..dim {
                let mid = 0.5 * (cell.lo[k] + cell.hi[k]);
                if mask >> k & 1 == 0 {
                    hi[k] = mid;
                } else {
                    lo[k] = mid;
                }
            }
            let c = center(&lo, &hi);
            let fc = objective(&c);
            cells += 1;
            if fc < best {
                best = fc;
                best_x = c.clone();
            }
            let bound = lower_bound(&lo, &hi, &c, fc);
            if bound < best {
                heap.push(Cell { bound, lo, hi });
            }
        }
        assert!(cells <= budget, "grid oracle exceeded {budget} cells");
    }
    OracleResult {
        argmin: best_x,
        value: best,
        cells,
    }
}

/// Grid oracle for `min_z max_i |x_i - z|`.
///
/// The cell bound is the larger of `max_i dist(x_i, cell)` and, for every
/// pair, `sqrt(dist(m_ij, cell)^2 + |x_i - x_j|^2 / 4)` with `m_ij` the
/// pair's midpoint; the latter follows from
/// `max(a, b)^2 >= (a^2 + b^2) / 2` and keeps flat ridges cheap.
pub fn grid_minimax_oracle(points: &[Point], resolution: f64) -> OracleResult {
    let pts: Vec<Vec<f64>> = points.iter().map(|p| p.coords().to_vec()).collect();
    let mut pairs = Vec::new();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let mid: Vec<f64> = pts[i].iter().zip(&pts[j]).map(|(a, b)| 0.5 * (a + b)).collect();
            let half = 0.5 * dist(&pts[i], &pts[j]);
            pairs.push((mid, half * half));
        }
    }
    let objective = |z: &[f64]| pts.iter().map(|p| dist(p, z)).fold(0.0, f64::max);
    let bound = |lo: &[f64], hi: &[f64], _c: &[f64], _fc: f64| {
        let mut b = pts.iter().map(|p| dist_to_box(p, lo, hi)).fold(0.0, f64::max);
        for (mid, h2) in &pairs {
            let d = dist_to_box(mid, lo, hi);
            b = b.max((d * d + h2).sqrt());
        }
        b
    };
    branch_and_bound(&pts, resolution, &objective, &bound, 50_000_000)
}

/// Grid oracle for `min_z Σ_i w_i |x_i - z|`.
///
/// The cell bound is the larger of `Σ_i w_i dist(x_i, cell)` and the
/// tangent-plane bound `f(c) - Σ_k |∂_k f(c)| h_k` at the cell center,
/// valid by convexity wherever the gradient exists.
pub fn grid_median_oracle(points: &[Point], weights: &[f64], resolution: f64) -> OracleResult {
    let pts: Vec<Vec<f64>> = points.iter().map(|p| p.coords().to_vec()).collect();
    let objective = |z: &[f64]| pts.iter().zip(weights).map(|(p, w)| w * dist(p, z)).sum::<f64>();
    let bound = |lo: &[f64], hi: &[f64], c: &[f64], fc: f64| {
        let by_box: f64 = pts
            .iter()
            .zip(weights)
            .map(|(p, w)| w * dist_to_box(p, lo, hi))
            .sum();
        let dim = c.len();
        let mut grad = vec![0.0; dim];
        for (p, w) in pts.iter().zip(weights) {
            let d = dist(p, c);
            if d == 0.0 {
                return by_box;
            }
            for k in 0..dim {
                grad[k] += w * (c[k] - p[k]) / d;
            }
        }
        let tangent = fc
            - (0..dim)
                .map(|k| grad[k].abs() * 0.5 * (hi[k] - lo[k]))
                .sum::<f64>();
        by_box.max(tangent)
    };
    branch_and_bound(&pts, resolution, &objective, &bound, 50_000_000)
}

/// Exact minimum enclosing radius by enumerating every subset of at most
/// `dim + 1` points, taking the smallest circumscribed ball of the subset
/// (centered in its affine hull) that encloses all points.
pub fn enumerated_min_radius(points: &[Point]) -> f64 {
    let pts: Vec<Vec<f64>> = points.iter().map(|p| p.coords().to_vec()).collect();
    let dim = pts[0].len();
    let mut best = f64::INFINITY;
    let max_size = (dim + 1).min(pts.len());
    let mut subset = Vec::new();
    fn rec(
        start: usize,
        max_size: usize,
        subset: &mut Vec<usize>,
        pts: &[Vec<f64>],
        best: &mut f64,
    ) {
        if !subset.is_empty() {
            if let Some(c) = circumcenter(subset.iter().map(|&i| &pts[i]).collect()) {
                let r = pts.iter().map(|p| dist(p, &c)).fold(0.0, f64::max);
                let on_sphere = dist(&pts[subset[0]], &c);
                if r <= on_sphere * (1.0 + 1e-9) + 1e-12 && r < *best {
                    *best = r;
                }
            }
        }
        if subset.len() == max_size {
            return;
        }
        for i in start..pts.len() {
            subset.push(i);
            rec(i + 1, max_size, subset, pts, best);
            subset.pop();
        }
    }
    rec(0, max_size, &mut subset, &pts, &mut best);
    best
}

/// Point of the affine hull of `s` equidistant from all of `s`, when the
/// points are affinely independent.
fn circumcenter(s: Vec<&Vec<f64>>) -> Option<Vec<f64>> {
    let k = s.len() - 1;
    let base = s[0];
    if k == 0 {
        return Some(base.clone());
    }
    let u: Vec<Vec<f64>> = s[1..]
        .iter()
        .map(|p| p.iter().zip(base).map(|(a, b)| a - b).collect())
        .collect();
    // solve G λ = b with G_ij = u_i·u_j, b_i = |u_i|^2 / 2
    let mut g: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            let mut row: Vec<f64> = (0..k)
                .map(|j| u[i].iter().zip(&u[j]).map(|(a, b)| a * b).sum())
                .collect();
            row.push(0.5 * u[i].iter().map(|a| a * a).sum::<f64>());
            row
        })
        .collect();
    for col in 0..k {
        let piv = (col..k).max_by(|&a, &b| g[a][col].abs().total_cmp(&g[b][col].abs()))?;
        if g[piv][col].abs() < 1e-12 {
            return None;
        }
        g.swap(col, piv);
        for r in 0..k {
            if r != col {
                let f = g[r][col] / g[col][col];
                let pivot = g[col].clone();
                for (x, y) in g[r][col..=k].iter_mut().zip(&pivot[col..=k]) {
                    *x -= f * y;
                }
            }
        }
    }
    let lambda: Vec<f64> = (0..k).map(|i| g[i][k] / g[i][i]).collect();
    let mut c = base.clone();
    for (l, ui) in lambda.iter().zip(&u) {
        for (ck, uk) in c.iter_mut().zip(ui) {
            *ck += l * uk;
        }
    }
    Some(c)
}
