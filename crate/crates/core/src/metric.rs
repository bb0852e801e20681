//! Points, metric spaces and distances between finite point sets.
//!
//! Every set handled here is finite, so suprema and infima are plain maxima
//! and minima. Two conventions coexist and are easy to confuse:
//!
//! - [`dist_point_set`] is the usual distance `inf_{b in B} d(a, b)`;
//! - [`hausdorff_point_set`] is `sup_{b in B} d(a, b)`, the Hausdorff
//!   distance between `{a}` and `B`. It is the one used to charge a
//!   set-valued decoder: every output point counts.
//!
//! Complex vectors are handled by interleaving real and imaginary parts,
//! `(re_0, im_0, re_1, im_1, ...)`. The Euclidean metric on the embedding is
//! the complex modulus metric.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of a finite-dimensional real coordinate space.
///
/// Coordinates are finite and there is at least one of them, so points are
/// totally ordered (lexicographically) and can be used as deterministic
/// tie-breakers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::EmptySet("point coordinates"));
        }
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Point(coords))
    }

    /// Builds a point from complex coordinates given as `(re, im)` pairs.
    pub fn from_complex(coords: &[(f64, f64)]) -> Result<Self> {
        Point::new(coords.iter().flat_map(|&(re, im)| [re, im]).collect())
    }

    /// The origin of `R^dim`.
    pub fn zeros(dim: usize) -> Result<Self> {
        Point::new(vec![0.0; dim])
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    /// Multiplies every coordinate by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Point::new(self.0.iter().map(|c| c * factor).collect())
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = Error;

    fn try_from(coords: Vec<f64>) -> Result<Self> {
        Point::new(coords)
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Self {
        p.0
    }
}

impl Eq for Point {}

impl PartialOrd for Point {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Point {
    fn cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.0.iter().zip(&other.0) {
            // finite by construction
            match a.partial_cmp(b).unwrap_or(Ordering::Equal) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        self.0.len().cmp(&other.0.len())
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Explicit symmetric distance matrix over an indexed point list.
///
/// Points of a table space are one-dimensional and carry their index as the
/// only coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceTable {
    n: usize,
    dists: Vec<f64>,
}

impl DistanceTable {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.dists[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.dists.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    /// The point standing for table entry `index`.
    pub fn point(index: usize) -> Point {
        Point(vec![index as f64])
    }

    fn index_of(&self, p: &Point) -> Result<usize> {
        if p.dim() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: p.dim(),
            });
        }
        let c = p.0[0];
        if c < 0.0 || c.fract() != 0.0 || c >= self.n as f64 {
            return Err(Error::IndexOutOfRange {
                what: "distance table",
                index: if c < 0.0 { usize::MAX } else { c as usize },
                len: self.n,
            });
        }
        Ok(c as usize)
    }
}

/// A metric on points: Euclidean, weighted `l^q`, or an explicit table.
#[derive(Debug, Clone, PartialEq)]
pub enum Metric {
    Euclidean { dim: usize },
    WeightedLp { exponent: f64, weights: Vec<f64> },
    Table(DistanceTable),
}

impl Metric {
    pub fn euclidean(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidMetric("dimension must be positive".into()));
        }
        Ok(Metric::Euclidean { dim })
    }

    pub fn weighted_lp(exponent: f64, weights: Vec<f64>) -> Result<Self> {
        if !(exponent.is_finite() && exponent >= 1.0) {
            return Err(Error::InvalidMetric(format!(
                "exponent {exponent} must be finite and >= 1"
            )));
        }
        if weights.is_empty() {
            return Err(Error::InvalidMetric("weights must be non-empty".into()));
        }
        if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidMetric(format!(
                "weight {i} must be finite and positive"
            )));
        }
        Ok(Metric::WeightedLp { exponent, weights })
    }

    /// Builds a table metric and verifies all metric axioms exhaustively.
    pub fn table(rows: Vec<Vec<f64>>) -> Result<Self> {
        let metric = Metric::table_unchecked(rows)?;
        let n = match &metric {
            Metric::Table(t) => t.n,
            _ => unreachable!(),
        };
        let sample: Vec<Point> = (0..n).map(DistanceTable::point).collect();
        match check_metric_axioms(&metric, &sample)? {
            AxiomVerdict::Pass => Ok(metric),
            AxiomVerdict::Violation { axiom, triple } => Err(Error::InvalidMetric(format!(
                "{axiom} axiom fails on entries {triple:?}"
            ))),
        }
    }

    /// Builds a table metric checking only its shape and entry signs.
    pub fn table_unchecked(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidMetric("distance table is empty".into()));
        }
        let mut dists = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidMetric(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            if let Some(j) = row.iter().position(|d| !(d.is_finite() && *d >= 0.0)) {
                return Err(Error::InvalidMetric(format!(
                    "entry ({i}, {j}) must be finite and non-negative"
                )));
            }
            dists.extend(row);
        }
        Ok(Metric::Table(DistanceTable { n, dists }))
    }

    /// Coordinate dimension of the space; `None` for table metrics.
    pub fn dimension(&self) -> Option<usize> {
        match self {
            Metric::Euclidean { dim } => Some(*dim),
            Metric::WeightedLp { weights, .. } => Some(weights.len()),
            Metric::Table(_) => None,
        }
    }

    pub fn is_euclidean(&self) -> bool {
        matches!(self, Metric::Euclidean { .. })
    }

    /// Same kind of metric on a space of a different dimension, when that
    /// makes sense (Euclidean only).
    pub fn with_dimension(&self, dim: usize) -> Option<Self> {
        match self {
            Metric::Euclidean { .. } => Metric::euclidean(dim).ok(),
            other if other.dimension() == Some(dim) => Some(other.clone()),
            _ => None,
        }
    }

    /// Checks that `p` belongs to the space.
    pub fn validate_point(&self, p: &Point) -> Result<()> {
        match self {
            Metric::Table(t) => t.index_of(p).map(|_| ()),
            _ => {
                let dim = self.dimension().expect("coordinate metric");
                if p.dim() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: p.dim(),
                    });
                }
                Ok(())
            }
        }
    }

    /// Distance between two points.
    ///
    /// The evaluation order only depends on coordinate positions, so
    /// `dist(a, b)` and `dist(b, a)` agree bit for bit.
    pub fn dist(&self, a: &Point, b: &Point) -> Result<f64> {
        match self {
            Metric::Table(t) => Ok(t.get(t.index_of(a)?, t.index_of(b)?)),
            Metric::Euclidean { .. } => {
                self.validate_point(a)?;
                self.validate_point(b)?;
                Ok(euclidean(a.coords(), b.coords()))
            }
            Metric::WeightedLp { exponent, weights } => {
                self.validate_point(a)?;
                self.validate_point(b)?;
                let terms = a.0.iter().zip(&b.0).zip(weights);
                let d = if *exponent == 1.0 {
                    terms.map(|((x, y), w)| w * (x - y).abs()).sum()
                } else if *exponent == 2.0 {
                    terms
                        .map(|((x, y), w)| w * (x - y) * (x - y))
                        .sum::<f64>()
                        .sqrt()
                } else {
                    terms
                        .map(|((x, y), w)| w * (x - y).abs().powf(*exponent))
                        .sum::<f64>()
                        .powf(exponent.recip())
                };
                Ok(d)
            }
        }
    }
}

/// Plain Euclidean distance between coordinate slices of equal length.
pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn non_empty<'a>(set: &'a [Point], what: &'static str) -> Result<&'a [Point]> {
    if set.is_empty() {
        Err(Error::EmptySet(what))
    } else {
        Ok(set)
    }
}

/// Largest pairwise distance in `set`; zero for singletons.
pub fn diameter(metric: &Metric, set: &[Point]) -> Result<f64> {
    let set = non_empty(set, "set")?;
    let mut best = 0.0_f64;
    for (i, a) in set.iter().enumerate() {
        for b in &set[i + 1..] {
            best = best.max(metric.dist(a, b)?);
        }
    }
    Ok(best)
}

/// `sup_{b in set} d(a, b)`.
pub fn hausdorff_point_set(metric: &Metric, a: &Point, set: &[Point]) -> Result<f64> {
    let set = non_empty(set, "set")?;
    set.iter()
        .try_fold(0.0_f64, |acc, b| Ok(acc.max(metric.dist(a, b)?)))
}

/// `inf_{b in set} d(a, b)`.
pub fn dist_point_set(metric: &Metric, a: &Point, set: &[Point]) -> Result<f64> {
    let set = non_empty(set, "set")?;
    set.iter()
        .try_fold(f64::INFINITY, |acc, b| Ok(acc.min(metric.dist(a, b)?)))
}

fn directed_hausdorff(metric: &Metric, from: &[Point], to: &[Point]) -> Result<f64> {
    from.iter()
        .try_fold(0.0_f64, |acc, a| Ok(acc.max(dist_point_set(metric, a, to)?)))
}

/// Hausdorff distance between two finite sets.
pub fn hausdorff_set_set(metric: &Metric, a: &[Point], b: &[Point]) -> Result<f64> {
    let a = non_empty(a, "first operand")?;
    let b = non_empty(b, "second operand")?;
    Ok(directed_hausdorff(metric, a, b)?.max(directed_hausdorff(metric, b, a)?))
}

/// The metric axiom a counterexample violates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    Symmetry,
    Identity,
    Triangle,
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axiom::Symmetry => "symmetry",
            Axiom::Identity => "identity",
            Axiom::Triangle => "triangle",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "verdict")]
pub enum AxiomVerdict {
    Pass,
    /// Indices into the sample. Symmetry and identity failures repeat the
    /// last index: `(i, j, j)`. A triangle failure `(i, j, k)` means
    /// `d(i, k) > d(i, j) + d(j, k)`.
    Violation { axiom: Axiom, triple: [usize; 3] },
}

/// Checks symmetry, identity of indiscernibles and the triangle inequality
/// over every pair and triple drawn from `sample`.
pub fn check_metric_axioms(metric: &Metric, sample: &[Point]) -> Result<AxiomVerdict> {
    let sample = non_empty(sample, "sample")?;
    let n = sample.len();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            d[i * n + j] = metric.dist(&sample[i], &sample[j])?;
        }
    }
    for i in 0..n {
        for j in 0..n {
            let dij = d[i * n + j];
            if dij != d[j * n + i] {
                return Ok(AxiomVerdict::Violation {
                    axiom: Axiom::Symmetry,
                    triple: [i, j, j],
                });
            }
            if (sample[i] == sample[j]) != (dij == 0.0) {
                return Ok(AxiomVerdict::Violation {
                    axiom: Axiom::Identity,
                    triple: [i, j, j],
                });
            }
        }
    }
    let scale = d.iter().fold(0.0_f64, |m, v| m.max(*v));
    let slack = 1e-12 * scale;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if d[i * n + k] > d[i * n + j] + d[j * n + k] + slack {
                    return Ok(AxiomVerdict::Violation {
                        axiom: Axiom::Triangle,
                        triple: [i, j, k],
                    });
                }
            }
        }
    }
    Ok(AxiomVerdict::Pass)
}
