//! Optimality-gap evaluation of arbitrary decoders.

use serde::Serialize;

use crate::average::kersize_average;
use crate::decoder::SetValuedDecoder;
use crate::error::Result;
use crate::measure::{disintegrate, err_a, residual, DiscreteMeasure, Order};
use crate::problem::{MeasurementTable, Problem};
use crate::worst_case::{kersize_worst, worst_case_error, LOWER_BOUND_TOL};

/// Error of one decoder at one order, next to the average kernel size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderGap {
    pub order: Order,
    pub err_a: f64,
    pub kersize: f64,
    /// `err_a / kersize`, when `kersize > 0`.
    pub ratio: Option<f64>,
    /// `err_a / (kersize / 2)`, the distance to the lower floor.
    pub floor_ratio: Option<f64>,
    /// `err_a >= kersize / 2 - tol`; holds for every decoder.
    pub lower_bound_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapReport {
    pub worst_error: f64,
    pub kersize_worst: f64,
    pub worst_ratio: Option<f64>,
    pub worst_floor_ratio: Option<f64>,
    /// `worst_error >= kersize / 2 - tol`; holds for every decoder.
    pub lower_bound_holds: bool,
    pub orders: Vec<OrderGap>,
}

impl GapReport {
    pub fn verdicts_hold(&self) -> bool {
        self.lower_bound_holds && self.orders.iter().all(|o| o.lower_bound_holds)
    }
}

fn ratios(error: f64, kersize: f64) -> (Option<f64>, Option<f64>) {
    if kersize > 0.0 {
        (Some(error / kersize), Some(error / (kersize / 2.0)))
    } else {
        (None, None)
    }
}

/// Worst-case and average errors of `decoder` against the kernel sizes.
pub fn evaluate_decoder(
    problem: &Problem,
    table: &MeasurementTable,
    mu: &DiscreteMeasure,
    decoder: &SetValuedDecoder,
    orders: &[Order],
) -> Result<GapReport> {
    decoder.check_total(table)?;
    let worst_error = worst_case_error(problem, table, decoder)?;
    let kersize_w = kersize_worst(problem, table)?;
    let (worst_ratio, worst_floor_ratio) = ratios(worst_error, kersize_w);
    let dis = disintegrate(mu, table)?;
    let residuals = residual(problem, table, decoder)?;
    let orders = orders
        .iter()
        .map(|&order| {
            let e = err_a(&residuals, mu, order)?;
            let k = kersize_average(problem, table, &dis, order)?;
            let (ratio, floor_ratio) = ratios(e, k);
            Ok(OrderGap {
                order,
                err_a: e,
                kersize: k,
                ratio,
                floor_ratio,
                lower_bound_holds: k / 2.0 - LOWER_BOUND_TOL <= e,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GapReport {
        worst_error,
        kersize_worst: kersize_w,
        worst_ratio,
        worst_floor_ratio,
        lower_bound_holds: kersize_w / 2.0 - LOWER_BOUND_TOL <= worst_error,
        orders,
    })
}
