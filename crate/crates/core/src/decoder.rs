//! Set-valued decoders `M2^E ⇉ X` and the baseline decoders used for
//! comparison.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::Point;
use crate::problem::{GroupKey, MeasurementTable};

/// A decoder given by a finite output set per measurement group.
///
/// Output sets are kept sorted and deduplicated; the selector picks the
/// lexicographically smallest point.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SetValuedDecoder {
    outputs: BTreeMap<GroupKey, Vec<Point>>,
}

impl SetValuedDecoder {
    pub fn new(outputs: impl IntoIterator<Item = (GroupKey, Vec<Point>)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (key, mut points) in outputs {
            if points.is_empty() {
                return Err(Error::EmptySet("decoder output"));
            }
            points.sort();
            points.dedup();
            map.insert(key, points);
        }
        Ok(SetValuedDecoder { outputs: map })
    }

    pub fn get(&self, key: &GroupKey) -> Option<&[Point]> {
        self.outputs.get(key).map(Vec::as_slice)
    }

    /// Output for `key`, or [`Error::MissingGroup`].
    pub fn output(&self, key: &GroupKey) -> Result<&[Point]> {
        self.get(key).ok_or_else(|| Error::MissingGroup(key.clone()))
    }

    /// Single-valued selection: the lexicographic minimum of the output.
    pub fn select(&self, key: &GroupKey) -> Option<&Point> {
        self.outputs.get(key).map(|v| &v[0])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&GroupKey, &[Point])> {
        self.outputs.iter().map(|(k, v)| (k, v.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }

    /// Fails with the first group of `table` the decoder does not cover.
    pub fn check_total(&self, table: &MeasurementTable) -> Result<()> {
        match table.groups().iter().find(|g| !self.outputs.contains_key(g.key())) {
            Some(g) => Err(Error::MissingGroup(g.key().clone())),
            None => Ok(()),
        }
    }

    pub fn to_table(&self) -> DecoderTable {
        DecoderTable {
            outputs: self
                .outputs
                .iter()
                .map(|(key, points)| DecoderEntry {
                    key: key.clone(),
                    points: points.clone(),
                })
                .collect(),
        }
    }
}

/// JSON shape of a decoder: `{"outputs": [{"key": [..], "points": [[..]]}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecoderTable {
    pub outputs: Vec<DecoderEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecoderEntry {
    pub key: GroupKey,
    pub points: Vec<Point>,
}

impl TryFrom<DecoderTable> for SetValuedDecoder {
    type Error = Error;

    fn try_from(table: DecoderTable) -> Result<Self> {
        let mut seen = BTreeMap::new();
        for (i, entry) in table.outputs.iter().enumerate() {
            if entry.points.is_empty() {
                return Err(Error::spec(format!("outputs[{i}].points"), "must be non-empty"));
            }
            if let Some(j) = seen.insert(entry.key.clone(), i) {
                return Err(Error::spec(
                    format!("outputs[{i}].key"),
                    format!("duplicates outputs[{j}].key"),
                ));
            }
        }
        SetValuedDecoder::new(table.outputs.into_iter().map(|e| (e.key, e.points)))
    }
}

/// Comparison decoders.
#[derive(Debug, Clone, PartialEq)]
pub enum Baseline {
    /// Lexicographically smallest feasible point.
    FirstFeasible,
    /// The same point for every measurement.
    Constant(Point),
    /// The whole feasible set.
    FullFeasible,
    /// One feasible point drawn per group from a seeded generator.
    RandomFeasible { seed: u64 },
}

impl Baseline {
    pub fn name(&self) -> &'static str {
        match self {
            Baseline::FirstFeasible => "first_feasible",
            Baseline::Constant(_) => "constant",
            Baseline::FullFeasible => "full_feasible",
            Baseline::RandomFeasible { .. } => "random_feasible",
        }
    }
}

/// Builds a baseline decoder defined on every group of `table`.
pub fn make_baseline(kind: &Baseline, table: &MeasurementTable) -> Result<SetValuedDecoder> {
    let mut rng = match kind {
        Baseline::RandomFeasible { seed } => Some(ChaCha8Rng::seed_from_u64(*seed)),
        _ => None,
    };
    let outputs = table.groups().iter().map(|g| {
        let feasible = g.x_points();
        let out = match kind {
            Baseline::FirstFeasible => vec![feasible.iter().min().expect("non-empty").clone()],
            Baseline::Constant(point) => vec![point.clone()],
            Baseline::FullFeasible => feasible.to_vec(),
            Baseline::RandomFeasible { .. } => {
                let rng = rng.as_mut().expect("seeded");
                vec![feasible[rng.random_range(0..feasible.len())].clone()]
            }
        };
        (g.key().clone(), out)
    });
    // groups are visited in key order, so the random draws are reproducible
    SetValuedDecoder::new(outputs.collect::<Vec<_>>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{Matrix, ModelClass, NoiseClass, Problem};

    fn p(c: &[f64]) -> Point {
        Point::new(c.to_vec()).unwrap()
    }

    fn two_point_table() -> MeasurementTable {
        let problem = Problem::linear_additive(
            Matrix::from_rows(vec![vec![1.0, 0.0]]).unwrap(),
            ModelClass::new(vec![p(&[0.0, 1.0]), p(&[0.0, 0.0])]).unwrap(),
            NoiseClass::noiseless(1).unwrap(),
        )
        .unwrap();
        MeasurementTable::build(&problem).unwrap()
    }

    #[test]
    fn outputs_sorted_and_selector_is_min() {
        let d = SetValuedDecoder::new([(GroupKey(vec![0]), vec![p(&[1.0]), p(&[0.0]), p(&[1.0])])])
            .unwrap();
        assert_eq!(d.get(&GroupKey(vec![0])).unwrap(), &[p(&[0.0]), p(&[1.0])]);
        assert_eq!(d.select(&GroupKey(vec![0])), Some(&p(&[0.0])));
        assert!(SetValuedDecoder::new([(GroupKey(vec![0]), vec![])]).is_err());
    }

    #[test]
    fn baselines_on_two_point_fixture() {
        let t = two_point_table();
        let key = GroupKey(vec![0]);
        let first = make_baseline(&Baseline::FirstFeasible, &t).unwrap();
        assert_eq!(first.get(&key).unwrap(), &[p(&[0.0, 0.0])]);
        let full = make_baseline(&Baseline::FullFeasible, &t).unwrap();
        assert_eq!(full.get(&key).unwrap(), &[p(&[0.0, 0.0]), p(&[0.0, 1.0])]);
        let c = make_baseline(&Baseline::Constant(p(&[5.0, 5.0])), &t).unwrap();
        assert_eq!(c.get(&key).unwrap(), &[p(&[5.0, 5.0])]);
        let r1 = make_baseline(&Baseline::RandomFeasible { seed: 7 }, &t).unwrap();
        let r2 = make_baseline(&Baseline::RandomFeasible { seed: 7 }, &t).unwrap();
        assert_eq!(r1, r2);
        assert!(r1.check_total(&t).is_ok());
    }

    #[test]
    fn totality_check() {
        let t = two_point_table();
        let d = SetValuedDecoder::new([(GroupKey(vec![3]), vec![p(&[0.0, 0.0])])]).unwrap();
        assert_eq!(d.check_total(&t), Err(Error::MissingGroup(GroupKey(vec![0]))));
    }

    #[test]
    fn decoder_table_json() {
        let json = r#"{"outputs":[{"key":[0],"points":[[0.0,0.5]]}]}"#;
        let table: DecoderTable = serde_json::from_str(json).unwrap();
        let d = SetValuedDecoder::try_from(table).unwrap();
        assert_eq!(d.select(&GroupKey(vec![0])), Some(&p(&[0.0, 0.5])));
        assert_eq!(serde_json::to_string(&d.to_table()).unwrap(), json);

        let dup = r#"{"outputs":[{"key":[0],"points":[[0.0]]},{"key":[0],"points":[[1.0]]}]}"#;
        let err = SetValuedDecoder::try_from(serde_json::from_str::<DecoderTable>(dup).unwrap());
        assert!(matches!(err, Err(Error::Spec { ref path, .. }) if path == "outputs[1].key"));
    }
}
