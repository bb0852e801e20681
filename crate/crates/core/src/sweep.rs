//! Worst-case kernel size over a finite family of forward models sharing
//! `M1` and `E`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::problem::{ForwardModel, MeasurementTable, Problem};
use crate::worst_case::kersize_worst;

/// Kernel sizes within this distance of the minimum count as ties.
pub const SWEEP_TIE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub id: String,
    pub kind: &'static str,
    pub kersize: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    /// Ids of all minimizers, sorted.
    pub minimizers: Vec<String>,
    /// The lexicographically smallest minimizer id.
    pub best: String,
    pub best_kersize: f64,
}

/// Default ids, zero-padded so that string order matches family order.
pub fn default_ids(n: usize) -> Vec<String> {
    let width = n.saturating_sub(1).to_string().len();
    (0..n).map(|i| format!("model_{i:0width$}")).collect()
}

pub fn forward_model_sweep(
    base: &Problem,
    family: &[(String, ForwardModel)],
) -> Result<SweepReport> {
    if family.is_empty() {
        return Err(Error::EmptySet("forward model family"));
    }
    let rows = family
        .par_iter()
        .map(|(id, forward)| {
            let problem = base.with_forward(forward.clone())?;
            let table = MeasurementTable::build(&problem)?;
            Ok(SweepRow {
                id: id.clone(),
                kind: forward.kind(),
                kersize: kersize_worst(&problem, &table)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let min = rows.iter().map(|r| r.kersize).fold(f64::INFINITY, f64::min);
    let mut minimizers: Vec<String> = rows
        .iter()
        .filter(|r| r.kersize <= min + SWEEP_TIE_TOL)
        .map(|r| r.id.clone())
        .collect();
    minimizers.sort();
    let best = minimizers[0].clone();
    let best_kersize = rows.iter().find(|r| r.id == best).expect("listed").kersize;
    debug_assert!(rows.iter().all(|r| best_kersize <= r.kersize + SWEEP_TIE_TOL));
    Ok(SweepReport {
        rows,
        minimizers,
        best,
        best_kersize,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::Point;
    use crate::problem::{Matrix, ModelClass, NoiseClass};

    fn base() -> Problem {
        Problem::linear_additive(
            Matrix::from_rows(vec![vec![1.0, 0.0]]).unwrap(),
            ModelClass::new(vec![
                Point::new(vec![0.0, 0.0]).unwrap(),
                Point::new(vec![0.0, 1.0]).unwrap(),
            ])
            .unwrap(),
            NoiseClass::noiseless(1).unwrap(),
        )
        .unwrap()
    }

    fn row(a: f64, b: f64) -> ForwardModel {
        ForwardModel::LinearAdditive(Matrix::from_rows(vec![vec![a, b]]).unwrap())
    }

    #[test]
    fn picks_the_informative_row() {
        let ids = default_ids(2);
        let family = vec![(ids[0].clone(), row(1.0, 0.0)), (ids[1].clone(), row(0.0, 1.0))];
        let r = forward_model_sweep(&base(), &family).unwrap();
        assert_eq!(r.rows[0].kersize, 1.0);
        assert_eq!(r.rows[1].kersize, 0.0);
        assert_eq!(r.best, "model_1");
        assert_eq!(r.minimizers, vec!["model_1"]);
    }

    #[test]
    fn singleton_and_ties() {
        let r = forward_model_sweep(&base(), &[("only".into(), row(1.0, 0.0))]).unwrap();
        assert_eq!(r.best, "only");
        let ids = default_ids(12);
        assert_eq!(ids[2], "model_02");
        let family: Vec<_> = ids.iter().map(|id| (id.clone(), row(1.0, 0.0))).collect();
        let r = forward_model_sweep(&base(), &family).unwrap();
        assert_eq!(r.minimizers.len(), 12);
        assert_eq!(r.best, "model_00");
    }

    #[test]
    fn incompatible_and_empty() {
        let wide = ForwardModel::LinearAdditive(Matrix::identity(3));
        assert!(forward_model_sweep(&base(), &[("w".into(), wide)]).is_err());
        assert_eq!(
            forward_model_sweep(&base(), &[]),
            Err(Error::EmptySet("forward model family"))
        );
    }
}
