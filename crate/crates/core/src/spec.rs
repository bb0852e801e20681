//! JSON problem specifications and forward-model family files.
//!
//! ```json
//! {
//!   "metric": {"kind": "euclidean"},
//!   "model_class": {"points": [[0, 0], [0, 1]]},
//!   "noise_class": {"points": [[0]]},
//!   "forward": {"kind": "linear_additive", "matrix": [[1, 0]]},
//!   "measure": {"weights": [[0.25], [0.75]]},
//!   "grouping_tol": 1e-9
//! }
//! ```
//!
//! `metric` applies to `X`. The optional `metric_y` defaults to the
//! Euclidean metric on the measurement space. `measure` defaults to the
//! uniform probability on `M1 x E`.

use serde::{Deserialize, Serialize};

use crate::decoder::{DecoderTable, SetValuedDecoder};
use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use crate::metric::{Metric, Point};
use crate::problem::{ForwardModel, Matrix, ModelClass, NoiseClass, Problem};
use crate::sweep::default_ids;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MetricSpec {
    Euclidean,
    WeightedLp { exponent: f64, weights: Vec<f64> },
    Table { distances: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointsSpec {
    pub points: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ForwardSpec {
    LinearAdditive { matrix: Vec<Vec<f64>> },
    LinearMultiplicative { matrix: Vec<Vec<f64>> },
    Mixed { matrix: Vec<Vec<f64>>, split: usize },
    /// `outputs[i][j] = F(x_i, e_j)`.
    Table { outputs: Vec<Vec<Vec<f64>>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    /// Row-major `|M1| x |E|`.
    pub weights: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub metric: MetricSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric_y: Option<MetricSpec>,
    pub model_class: PointsSpec,
    pub noise_class: PointsSpec,
    pub forward: ForwardSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grouping_tol: Option<f64>,
}

/// A validated problem with its measure.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedProblem {
    pub spec: ProblemSpec,
    pub problem: Problem,
    /// The given measure, or the uniform one.
    pub measure: DiscreteMeasure,
}

/// Prepends `prefix` to the path of positioned errors.
fn under(prefix: &str, err: Error) -> Error {
    match err {
        Error::Spec { path, message } => Error::spec(format!("{prefix}.{path}"), message),
        other => Error::spec(prefix, other.to_string()),
    }
}

fn points(path: &str, raw: &[Vec<f64>]) -> Result<Vec<Point>> {
    raw.iter()
        .enumerate()
        .map(|(i, c)| Point::new(c.clone()).map_err(|e| Error::spec(format!("{path}[{i}]"), e.to_string())))
        .collect()
}

fn matrix(raw: &[Vec<f64>]) -> Result<Matrix> {
    Matrix::from_rows(raw.to_vec()).map_err(|e| under("forward", e))
}

impl MetricSpec {
    fn build(&self, dim: usize, path: &str) -> Result<Metric> {
        match self {
            MetricSpec::Euclidean => Metric::euclidean(dim),
            MetricSpec::WeightedLp { exponent, weights } => {
                Metric::weighted_lp(*exponent, weights.clone())
            }
            MetricSpec::Table { distances } => Metric::table(distances.clone()),
        }
        .map_err(|e| Error::spec(path, e.to_string()))
    }

    pub fn from_metric(metric: &Metric) -> Self {
        match metric {
            Metric::Euclidean { .. } => MetricSpec::Euclidean,
            Metric::WeightedLp { exponent, weights } => MetricSpec::WeightedLp {
                exponent: *exponent,
                weights: weights.clone(),
            },
            Metric::Table(t) => MetricSpec::Table {
                distances: t.rows(),
            },
        }
    }
}

impl ForwardSpec {
    pub fn build(&self) -> Result<ForwardModel> {
        Ok(match self {
            ForwardSpec::LinearAdditive { matrix: m } => ForwardModel::LinearAdditive(matrix(m)?),
            ForwardSpec::LinearMultiplicative { matrix: m } => {
                ForwardModel::LinearMultiplicative(matrix(m)?)
            }
            ForwardSpec::Mixed { matrix: m, split } => ForwardModel::Mixed {
                matrix: matrix(m)?,
                split: *split,
            },
            ForwardSpec::Table { outputs } => ForwardModel::Table(
                outputs
                    .iter()
                    .enumerate()
                    .map(|(i, row)| points(&format!("forward.outputs[{i}]"), row))
                    .collect::<Result<_>>()?,
            ),
        })
    }

    pub fn from_forward(forward: &ForwardModel) -> Self {
        match forward {
            ForwardModel::LinearAdditive(a) => ForwardSpec::LinearAdditive { matrix: a.to_rows() },
            ForwardModel::LinearMultiplicative(a) => ForwardSpec::LinearMultiplicative {
                matrix: a.to_rows(),
            },
            ForwardModel::Mixed { matrix, split } => ForwardSpec::Mixed {
                matrix: matrix.to_rows(),
                split: *split,
            },
            ForwardModel::Table(rows) => ForwardSpec::Table {
                outputs: rows
                    .iter()
                    .map(|r| r.iter().map(|p| p.coords().to_vec()).collect())
                    .collect(),
            },
        }
    }

    fn output_dim(&self) -> Option<usize> {
        match self {
            ForwardSpec::LinearAdditive { matrix }
            | ForwardSpec::LinearMultiplicative { matrix }
            | ForwardSpec::Mixed { matrix, .. } => Some(matrix.len()),
            ForwardSpec::Table { outputs } => outputs.iter().flatten().next().map(Vec::len),
        }
    }
}

impl ProblemSpec {
    /// Spec describing `problem`, with an explicit measure if given.
    pub fn from_problem(problem: &Problem, measure: Option<&DiscreteMeasure>) -> Self {
        let coords = |ps: &[Point]| ps.iter().map(|p| p.coords().to_vec()).collect();
        let metric_y = MetricSpec::from_metric(problem.metric_y());
        ProblemSpec {
            metric: MetricSpec::from_metric(problem.metric_x()),
            metric_y: (metric_y != MetricSpec::Euclidean).then_some(metric_y),
            model_class: PointsSpec {
                points: coords(problem.model_class().points()),
            },
            noise_class: PointsSpec {
                points: coords(problem.noise_class().points()),
            },
            forward: ForwardSpec::from_forward(problem.forward()),
            measure: measure.map(|m| MeasureSpec { weights: m.to_rows() }),
            grouping_tol: Some(problem.grouping_tol()),
        }
    }

    pub fn load(&self) -> Result<LoadedProblem> {
        let model = points("model_class.points", &self.model_class.points)?;
        let x_dim = model.first().map_or(0, Point::dim);
        let model = ModelClass::new(model).map_err(|e| match e {
            Error::Spec { .. } => e,
            other => Error::spec("model_class.points", other.to_string()),
        })?;
        let noise = NoiseClass::new(points("noise_class.points", &self.noise_class.points)?)
            .map_err(|e| Error::spec("noise_class.points", e.to_string()))?;
        let forward = self.forward.build()?;
        let metric_x = self.metric.build(x_dim, "metric")?;
        let y_dim = self.forward.output_dim().unwrap_or(0);
        let metric_y = self
            .metric_y
            .as_ref()
            .unwrap_or(&MetricSpec::Euclidean)
            .build(y_dim, "metric_y")?;
        let mut problem = Problem::new(metric_x, metric_y, model, noise, forward)
            .map_err(|e| match e {
                Error::Spec { .. } => e,
                other => Error::spec("forward", other.to_string()),
            })?;
        if let Some(tol) = self.grouping_tol {
            problem = problem
                .with_grouping_tol(tol)
                .map_err(|e| Error::spec("grouping_tol", e.to_string()))?;
        }
        let measure = match &self.measure {
            None => DiscreteMeasure::uniform_for(&problem)?,
            Some(m) => self.measure_from(m, &problem)?,
        };
        Ok(LoadedProblem {
            spec: self.clone(),
            problem,
            measure,
        })
    }

    fn measure_from(&self, m: &MeasureSpec, problem: &Problem) -> Result<DiscreteMeasure> {
        let (n_x, n_e) = (problem.model_class().len(), problem.noise_class().len());
        if m.weights.len() != n_x {
            return Err(Error::spec(
                "measure.weights",
                format!("expected {n_x} rows, found {}", m.weights.len()),
            ));
        }
        for (i, row) in m.weights.iter().enumerate() {
            if row.len() != n_e {
                return Err(Error::spec(
                    format!("measure.weights[{i}]"),
                    format!("expected {n_e} weights, found {}", row.len()),
                ));
            }
            if let Some(j) = row.iter().position(|w| !(w.is_finite() && *w >= 0.0)) {
                return Err(Error::spec(
                    format!("measure.weights[{i}][{j}]"),
                    "weight must be finite and non-negative",
                ));
            }
        }
        DiscreteMeasure::from_rows(&m.weights).map_err(|e| Error::spec("measure.weights", e.to_string()))
    }

    /// Canonical JSON: sorted keys, shortest round-trip floats, no
    /// whitespace.
    pub fn to_canonical_json(&self) -> String {
        canonical_json(self)
    }
}

/// Serializes through `serde_json::Value`, whose maps are key-sorted.
pub fn canonical_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("plain data serializes");
    serde_json::to_string(&v).expect("value serializes")
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::spec(if path == "." { "$".into() } else { path }, e.into_inner().to_string())
    })
}

/// Parses and validates a problem spec; applies the defaults.
pub fn parse_problem_spec(text: &str) -> Result<LoadedProblem> {
    parse_json::<ProblemSpec>(text)?.load()
}

/// Parses a decoder table `{"outputs": [{"key": [..], "points": [..]}]}`.
pub fn parse_decoder_table(text: &str) -> Result<SetValuedDecoder> {
    SetValuedDecoder::try_from(parse_json::<DecoderTable>(text)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(flatten)]
    pub forward: ForwardSpec,
}

/// Parses a JSON list of forward models; missing ids become
/// `model_<index>`.
pub fn parse_model_family(text: &str) -> Result<Vec<(String, ForwardModel)>> {
    let entries: Vec<FamilyEntry> = parse_json(text)?;
    let defaults = default_ids(entries.len());
    let mut out = Vec::with_capacity(entries.len());
    for (i, entry) in entries.into_iter().enumerate() {
        let forward = entry.forward.build().map_err(|e| under(&format!("[{i}]"), e))?;
        let id = entry.id.unwrap_or_else(|| defaults[i].clone());
        if out.iter().any(|(other, _): &(String, ForwardModel)| *other == id) {
            return Err(Error::spec(format!("[{i}].id"), format!("duplicate id {id:?}")));
        }
        out.push((id, forward));
    }
    Ok(out)
}
