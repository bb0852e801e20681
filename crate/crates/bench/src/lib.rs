//! Fixtures shared by the benchmarks.

use kersize_core::measure::DiscreteMeasure;
use kersize_core::metric::Point;
use kersize_core::problem::{MeasurementTable, Problem};
use kersize_core::testkit::{random_additive_problem, random_measure, random_points, rng};

/// `n` uniform points in `[-1, 1]^dim`, fixed by `seed`.
pub fn point_cloud(seed: u64, dim: usize, n: usize) -> Vec<Point> {
    random_points(&mut rng(seed), dim, n)
}

/// A batch of random problems with their tables and non-uniform measures.
pub fn problem_batch(count: u64) -> Vec<(Problem, MeasurementTable, DiscreteMeasure)> {
    (0..count)
        .map(|seed| {
            let p = random_additive_problem(seed);
            let t = MeasurementTable::build(&p).expect("valid problem");
            let mu = random_measure(&p, seed, false);
            (p, t, mu)
        })
        .collect()
}
