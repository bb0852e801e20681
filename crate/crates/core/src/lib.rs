//! Kernel sizes, optimal set-valued decoders and accuracy bounds for
//! finite inverse problems `y = F(x, e)` with `x ∈ M1`, `e ∈ E`.
//!
//! A [`Problem`] is enumerated into a [`MeasurementTable`] that groups the
//! atoms `(x, e)` by measurement. Worst-case and average-case analyses run
//! on that table.

pub mod average;
pub mod chebyshev;
pub mod decoder;
pub mod error;
pub mod eval;
pub mod fixtures;
pub mod measure;
pub mod median;
pub mod metric;
pub mod problem;
pub mod rnsp;
pub mod spec;
pub mod sweep;
pub mod worst_case;

#[cfg(any(test, feature = "testkit"))]
pub mod testkit;

pub use average::{
    average_report, kersize_average, optimal_decoder_average, posterior_distribution,
    AverageGroupRow, AveragePolicy, AverageReport, Candidates, PosteriorDistribution,
};
pub use chebyshev::{minimum_enclosing_ball, Ball, ChebyshevResult, Solver};
pub use decoder::{make_baseline, Baseline, DecoderTable, SetValuedDecoder};
pub use error::{Error, Result};
pub use eval::{evaluate_decoder, GapReport, OrderGap};
pub use measure::{
    disintegrate, err_a, pushforward, residual, DiscreteMeasure, Disintegration, Order,
    PushforwardMeasure, ResidualMap,
};
pub use median::{weighted_geometric_median, weighted_mean};
pub use metric::{diameter, hausdorff_point_set, hausdorff_set_set, Metric, Point};
pub use problem::{
    ForwardModel, Group, GroupKey, Matrix, MeasurementTable, ModelClass, NoiseClass, Problem,
};
pub use rnsp::{check_rnsp_bound, rnsp_falsify, RnspCertificate, RnspNorms, RnspVerdict};
pub use spec::{parse_decoder_table, parse_model_family, parse_problem_spec, LoadedProblem, ProblemSpec};
pub use sweep::{forward_model_sweep, SweepReport, SweepRow};
pub use worst_case::{
    kersize_worst, optimal_decoder_worst, worst_case_error, worst_case_report, CandidatePolicy,
    WorstCaseReport,
};
