//! Inverse problems `y = F(x, e)` over a finite model class and noise class,
//! and the partition of `M1 x E` into groups of equal measurement.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{Metric, Point};

/// Default quantization step used to decide when two measurements are equal.
pub const DEFAULT_GROUPING_TOL: f64 = 1e-9;

/// Dense row-major real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_rows = rows.len();
        if n_rows == 0 {
            return Err(Error::EmptySet("matrix"));
        }
        let cols = rows[0].len();
        if cols == 0 {
            return Err(Error::EmptySet("matrix row"));
        }
        let mut data = Vec::with_capacity(n_rows * cols);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != cols {
                return Err(Error::spec(
                    format!("matrix[{i}]"),
                    format!("row has {} entries, expected {cols}", row.len()),
                ));
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::spec(format!("matrix[{i}][{j}]"), "entry is not finite"));
            }
            data.extend(row);
        }
        Ok(Matrix {
            rows: n_rows,
            cols,
            data,
        })
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Matrix {
            rows: n,
            cols: n,
            data,
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.cols).map(<[f64]>::to_vec).collect()
    }

    /// `A x`, summed in column order.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// The finite model class `M1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelClass {
    points: Vec<Point>,
}

impl ModelClass {
    /// Rejects empty classes, mixed dimensions and duplicated points.
    pub fn new(points: Vec<Point>) -> Result<Self> {
        let points = consistent_points(points, "model class")?;
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&a, &b| points[a].cmp(&points[b]).then(a.cmp(&b)));
        for w in order.windows(2) {
            if points[w[0]] == points[w[1]] {
                let (i, j) = (w[0].min(w[1]), w[0].max(w[1]));
                return Err(Error::spec(
                    format!("model_class.points[{j}]"),
                    format!("duplicates model_class.points[{i}]"),
                ));
            }
        }
        Ok(ModelClass { points })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }
}

/// The finite noise class `E`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseClass {
    points: Vec<Point>,
}

impl NoiseClass {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        Ok(NoiseClass {
            points: consistent_points(points, "noise class")?,
        })
    }

    /// `E = {0}` in `R^dim`.
    pub fn noiseless(dim: usize) -> Result<Self> {
        NoiseClass::new(vec![Point::zeros(dim)?])
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }
}

fn consistent_points(points: Vec<Point>, what: &'static str) -> Result<Vec<Point>> {
    let first = points.first().ok_or(Error::EmptySet(what))?;
    let dim = first.dim();
    if let Some(bad) = points.iter().find(|p| p.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: bad.dim(),
        });
    }
    Ok(points)
}

/// The forward map `F`.
#[derive(Debug, Clone, PartialEq)]
pub enum ForwardModel {
    /// `A x + e`.
    LinearAdditive(Matrix),
    /// `A x ⊙ e`.
    LinearMultiplicative(Matrix),
    /// `A x ⊙ e1 + e2`, where `e1` is the first `split` noise coordinates
    /// and `e2` the remaining ones. `split` equals the number of rows.
    Mixed { matrix: Matrix, split: usize },
    /// Explicit outputs, indexed `[x_index][e_index]`.
    Table(Vec<Vec<Point>>),
}

impl ForwardModel {
    pub fn kind(&self) -> &'static str {
        match self {
            ForwardModel::LinearAdditive(_) => "linear_additive",
            ForwardModel::LinearMultiplicative(_) => "linear_multiplicative",
            ForwardModel::Mixed { .. } => "mixed",
            ForwardModel::Table(_) => "table",
        }
    }

    pub fn matrix(&self) -> Option<&Matrix> {
        match self {
            ForwardModel::LinearAdditive(a)
            | ForwardModel::LinearMultiplicative(a)
            | ForwardModel::Mixed { matrix: a, .. } => Some(a),
            ForwardModel::Table(_) => None,
        }
    }

    /// Checks the model against the classes and returns the dimension of `Y`.
    fn validate(&self, model: &ModelClass, noise: &NoiseClass) -> Result<usize> {
        let expect = |expected: usize, found: usize| {
            if expected == found {
                Ok(())
            } else {
                Err(Error::DimensionMismatch { expected, found })
            }
        };
        match self {
            ForwardModel::LinearAdditive(a) | ForwardModel::LinearMultiplicative(a) => {
                expect(a.cols(), model.dim())?;
                expect(a.rows(), noise.dim())?;
                Ok(a.rows())
            }
            ForwardModel::Mixed { matrix, split } => {
                expect(matrix.cols(), model.dim())?;
                if *split != matrix.rows() {
                    return Err(Error::InvalidProblem(format!(
                        "mixed split {split} must equal the number of rows {}",
                        matrix.rows()
                    )));
                }
                expect(2 * matrix.rows(), noise.dim())?;
                Ok(matrix.rows())
            }
            ForwardModel::Table(rows) => {
                if rows.len() != model.len() {
                    return Err(Error::InvalidProblem(format!(
                        "forward table has {} rows, model class has {} points",
                        rows.len(),
                        model.len()
                    )));
                }
                let mut dim = None;
                for (i, row) in rows.iter().enumerate() {
                    if row.len() != noise.len() {
                        return Err(Error::InvalidProblem(format!(
                            "forward table row {i} has {} entries, noise class has {} points",
                            row.len(),
                            noise.len()
                        )));
                    }
                    for y in row {
                        match dim {
                            None => dim = Some(y.dim()),
                            Some(d) => expect(d, y.dim())?,
                        }
                    }
                }
                Ok(dim.expect("non-empty classes"))
            }
        }
    }

    fn eval(&self, x: &Point, e: &Point, x_index: usize, e_index: usize) -> Result<Point> {
        match self {
            ForwardModel::LinearAdditive(a) => {
                let ax = a.apply(x.coords());
                Point::new(ax.iter().zip(e.coords()).map(|(u, v)| u + v).collect())
            }
            ForwardModel::LinearMultiplicative(a) => {
                let ax = a.apply(x.coords());
                Point::new(ax.iter().zip(e.coords()).map(|(u, v)| u * v).collect())
            }
            ForwardModel::Mixed { matrix, split } => {
                let ax = matrix.apply(x.coords());
                let (e1, e2) = e.coords().split_at(*split);
                Point::new(
                    ax.iter()
                        .zip(e1)
                        .zip(e2)
                        .map(|((u, m), a)| u * m + a)
                        .collect(),
                )
            }
            ForwardModel::Table(rows) => rows
                .get(x_index)
                .and_then(|r| r.get(e_index))
                .cloned()
                .ok_or(Error::IndexOutOfRange {
                    what: "forward table",
                    index: x_index,
                    len: rows.len(),
                }),
        }
    }
}

/// An inverse problem `(F, M1, E)` together with the metrics on `X` and `Y`.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    metric_x: Metric,
    metric_y: Metric,
    model_class: ModelClass,
    noise_class: NoiseClass,
    forward: ForwardModel,
    grouping_tol: f64,
    y_dim: usize,
}

impl Problem {
    pub fn new(
        metric_x: Metric,
        metric_y: Metric,
        model_class: ModelClass,
        noise_class: NoiseClass,
        forward: ForwardModel,
    ) -> Result<Self> {
        for x in model_class.points() {
            metric_x.validate_point(x)?;
        }
        let y_dim = forward.validate(&model_class, &noise_class)?;
        match &metric_y {
            Metric::Table(_) => {
                let ForwardModel::Table(rows) = &forward else {
                    return Err(Error::InvalidProblem(
                        "a table metric on Y requires a table forward model".into(),
                    ));
                };
                for y in rows.iter().flatten() {
                    metric_y.validate_point(y)?;
                }
            }
            m => {
                let d = m.dimension().expect("coordinate metric");
                if d != y_dim {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        found: y_dim,
                    });
                }
            }
        }
        Ok(Problem {
            metric_x,
            metric_y,
            model_class,
            noise_class,
            forward,
            grouping_tol: DEFAULT_GROUPING_TOL,
            y_dim,
        })
    }

    /// Additive linear problem with Euclidean metrics on both sides.
    pub fn linear_additive(
        matrix: Matrix,
        model_class: ModelClass,
        noise_class: NoiseClass,
    ) -> Result<Self> {
        Problem::new(
            Metric::euclidean(matrix.cols())?,
            Metric::euclidean(matrix.rows())?,
            model_class,
            noise_class,
            ForwardModel::LinearAdditive(matrix),
        )
    }

    pub fn with_grouping_tol(mut self, tol: f64) -> Result<Self> {
        if !(tol.is_finite() && tol > 0.0) {
            return Err(Error::InvalidProblem(format!(
                "grouping_tol {tol} must be positive"
            )));
        }
        self.grouping_tol = tol;
        Ok(self)
    }

    /// Same classes and metrics with another forward model.
    pub fn with_forward(&self, forward: ForwardModel) -> Result<Self> {
        let y_dim = forward.validate(&self.model_class, &self.noise_class)?;
        let metric_y = self.metric_y.with_dimension(y_dim).ok_or_else(|| {
            Error::InvalidProblem(format!(
                "forward model output dimension {y_dim} is incompatible with the Y metric"
            ))
        })?;
        Problem::new(
            self.metric_x.clone(),
            metric_y,
            self.model_class.clone(),
            self.noise_class.clone(),
            forward,
        )?
        .with_grouping_tol(self.grouping_tol)
    }

    pub fn metric_x(&self) -> &Metric {
        &self.metric_x
    }

    pub fn metric_y(&self) -> &Metric {
        &self.metric_y
    }

    pub fn model_class(&self) -> &ModelClass {
        &self.model_class
    }

    pub fn noise_class(&self) -> &NoiseClass {
        &self.noise_class
    }

    pub fn forward(&self) -> &ForwardModel {
        &self.forward
    }

    pub fn grouping_tol(&self) -> f64 {
        self.grouping_tol
    }

    pub fn y_dim(&self) -> usize {
        self.y_dim
    }

    /// Number of atoms `|M1| * |E|`.
    pub fn atom_count(&self) -> usize {
        self.model_class.len() * self.noise_class.len()
    }

    /// `F(x_i, e_j)`.
    pub fn forward_eval(&self, x_index: usize, e_index: usize) -> Result<Point> {
        let x = self
            .model_class
            .points()
            .get(x_index)
            .ok_or(Error::IndexOutOfRange {
                what: "model class",
                index: x_index,
                len: self.model_class.len(),
            })?;
        let e = self
            .noise_class
            .points()
            .get(e_index)
            .ok_or(Error::IndexOutOfRange {
                what: "noise class",
                index: e_index,
                len: self.noise_class.len(),
            })?;
        self.forward.eval(x, e, x_index, e_index)
    }

    /// Grouping key of a measurement under this problem's tolerance.
    pub fn quantize(&self, y: &Point) -> Result<GroupKey> {
        if y.dim() != self.y_dim {
            return Err(Error::DimensionMismatch {
                expected: self.y_dim,
                found: y.dim(),
            });
        }
        GroupKey::quantize(y, self.grouping_tol)
    }
}

/// Per-coordinate integer bucket `floor(y_i / tol + 0.5)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupKey(pub Vec<i64>);

impl GroupKey {
    pub fn quantize(y: &Point, tol: f64) -> Result<Self> {
        // i64 range with headroom; beyond it distinct measurements would collapse
        const LIMIT: f64 = 9.0e18;
        y.coords()
            .iter()
            .map(|&v| {
                let q = (v / tol + 0.5).floor();
                if q.abs() < LIMIT {
                    Ok(q as i64)
                } else {
                    Err(Error::KeyOverflow(v))
                }
            })
            .collect::<Result<Vec<_>>>()
            .map(GroupKey)
    }
}

impl fmt::Display for GroupKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, k) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ";")?;
            }
            write!(f, "{k}")?;
        }
        write!(f, "]")
    }
}

/// An element `(x_i, e_j)` of `M1 x E`, by index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Atom {
    pub x: usize,
    pub e: usize,
}

/// One measurement `y` and its preimage in `M1 x E`.
#[derive(Debug, Clone, PartialEq)]
pub struct Group {
    key: GroupKey,
    representative: Point,
    members: Vec<Atom>,
    x_indices: Vec<usize>,
    x_points: Vec<Point>,
}

impl Group {
    pub fn key(&self) -> &GroupKey {
        &self.key
    }

    /// Forward value of the first member.
    pub fn representative(&self) -> &Point {
        &self.representative
    }

    /// Members in ascending atom order.
    pub fn members(&self) -> &[Atom] {
        &self.members
    }

    /// Distinct model indices of the members, ascending.
    pub fn x_indices(&self) -> &[usize] {
        &self.x_indices
    }

    /// The feasible set `F_y` projected onto `X`, aligned with
    /// [`Group::x_indices`].
    pub fn x_points(&self) -> &[Point] {
        &self.x_points
    }

    /// Position of model index `x` within [`Group::x_indices`].
    pub fn x_position(&self, x: usize) -> Option<usize> {
        self.x_indices.binary_search(&x).ok()
    }
}

/// The measurement set `M2^E` as a partition of `M1 x E`, sorted by key.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementTable {
    n_x: usize,
    n_e: usize,
    groups: Vec<Group>,
    atom_group: Vec<usize>,
}

impl MeasurementTable {
    /// Evaluates `F` on every atom and groups atoms by quantized measurement.
    ///
    /// Values straddling a bucket boundary land in different groups even if
    /// they are closer than the tolerance.
    pub fn build(problem: &Problem) -> Result<Self> {
        let n_x = problem.model_class().len();
        let n_e = problem.noise_class().len();
        let mut buckets: BTreeMap<GroupKey, (Point, Vec<Atom>)> = BTreeMap::new();
        for x in 0..n_x {
            for e in 0..n_e {
                let y = problem.forward_eval(x, e)?;
                let key = problem.quantize(&y)?;
                buckets
                    .entry(key)
                    .or_insert_with(|| (y, Vec::new()))
                    .1
                    .push(Atom { x, e });
            }
        }
        let points = problem.model_class().points();
        let mut atom_group = vec![0; n_x * n_e];
        let groups = buckets
            .into_iter()
            .enumerate()
            .map(|(gi, (key, (representative, members)))| {
                let mut x_indices: Vec<usize> = members.iter().map(|a| a.x).collect();
                x_indices.dedup(); // members are x-major, so equal x are adjacent
                for a in &members {
                    atom_group[a.x * n_e + a.e] = gi;
                }
                let x_points = x_indices.iter().map(|&i| points[i].clone()).collect();
                Group {
                    key,
                    representative,
                    members,
                    x_indices,
                    x_points,
                }
            })
            .collect();
        Ok(MeasurementTable {
            n_x,
            n_e,
            groups,
            atom_group,
        })
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn n_e(&self) -> usize {
        self.n_e
    }

    /// Row-major position of an atom.
    pub fn atom_index(&self, atom: Atom) -> usize {
        atom.x * self.n_e + atom.e
    }

    /// Index of the group containing `atom`.
    pub fn group_of(&self, atom: Atom) -> usize {
        self.atom_group[self.atom_index(atom)]
    }

    pub fn position(&self, key: &GroupKey) -> Option<usize> {
        self.groups.binary_search_by(|g| g.key.cmp(key)).ok()
    }

    /// The feasible set for the measurement with the given key.
    pub fn feasible_set(&self, key: &GroupKey) -> Result<&Group> {
        self.position(key)
            .map(|i| &self.groups[i])
            .ok_or_else(|| Error::UnknownGroup(key.clone()))
    }
}
