//! Acceptance criteria 1 to 11. Runs without the libtest harness so every
//! criterion prints one PASS/FAIL line; exits non-zero if any fails.

// `!(a <= b)` is deliberate: a NaN must fail the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use kersize_core::average::{average_report, kersize_average, posterior_distribution, posterior_objective, AveragePolicy};
use kersize_core::chebyshev::minimum_enclosing_ball;
use kersize_core::decoder::{make_baseline, Baseline};
use kersize_core::fixtures::two_point;
use kersize_core::measure::{disintegrate, err_a, ess_sup_discrete, residual, Order};
use kersize_core::median::{fermat_objective, weighted_geometric_median, DEFAULT_MEDIAN_TOL};
use kersize_core::metric::{diameter, hausdorff_set_set, Metric, Point};
use kersize_core::problem::{Matrix, MeasurementTable, ModelClass, NoiseClass, Problem};
use kersize_core::rnsp::{check_rnsp_bound, rnsp_falsify, RnspCertificate, RnspNorms};
use kersize_core::spec::ProblemSpec;
use kersize_core::testkit::{
    grid_median_oracle, grid_minimax_oracle, random_additive_problem, random_measure,
    random_points, random_weights, rng,
};
use kersize_core::worst_case::{
    kersize_worst, optimal_decoder_worst, worst_case_error, worst_case_report, CandidatePolicy,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::Rng;

const ENSEMBLE: u64 = 200;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn p(c: &[f64]) -> Point {
    Point::new(c.to_vec()).unwrap()
}

fn ensemble() -> impl Iterator<Item = (u64, Problem, MeasurementTable)> {
    (0..ENSEMBLE).map(|seed| {
        let p = random_additive_problem(seed);
        let t = MeasurementTable::build(&p).unwrap();
        (seed, p, t)
    })
}

fn within_time(start: Instant, limit: Duration) -> Result<(), String> {
    let took = start.elapsed();
    if took > limit {
        return Err(format!("took {took:.2?}, limit {limit:?}"));
    }
    Ok(())
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let (problem, _) = two_point(0.5).unwrap();
    let t = MeasurementTable::build(&problem).unwrap();
    let k = kersize_worst(&problem, &t).unwrap();
    let psi = optimal_decoder_worst(&problem, &t, &CandidatePolicy::EuclideanMeb).unwrap();
    let key = problem.quantize(&p(&[0.0])).unwrap();
    let out = psi.output(&key).unwrap();
    let e = worst_case_error(&problem, &t, &psi).unwrap();
    ensure!((k - 1.0).abs() <= 1e-9, "kersize {k}");
    ensure!(out.len() == 1, "Ψ(0) = {out:?}");
    ensure!(
        (out[0].coords()[0]).abs() <= 1e-9 && (out[0].coords()[1] - 0.5).abs() <= 1e-9,
        "Ψ(0) = {}",
        out[0]
    );
    ensure!((e - 0.5).abs() <= 1e-9, "error {e}");
    within_time(start, Duration::from_secs(1))?;
    Ok(format!("kersize {k}, Ψ(0) = {}, error {e}", out[0]))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut checks = 0;
    for i in 0..=10 {
        let alpha = i as f64 / 10.0;
        let (problem, mu) = two_point(alpha).unwrap();
        let t = MeasurementTable::build(&problem).unwrap();
        let dis = disintegrate(&mu, &t).unwrap();
        let expected = 2.0 * alpha * (1.0 - alpha);
        for q in [1.0, 2.0, 4.0] {
            let k = kersize_average(&problem, &t, &dis, Order::Finite(q)).unwrap();
            ensure!((k.powf(q) - expected).abs() <= 1e-9, "α={alpha} p={q}: k^p = {}", k.powf(q));
            checks += 1;
        }
        let r = average_report(&problem, &t, &mu, Order::Finite(2.0), &AveragePolicy::Mean).unwrap();
        let out = &r.groups[0].outputs;
        ensure!(out.len() == 1, "α={alpha}: Ψ(0) = {out:?}");
        let c = out[0].coords();
        ensure!(
            c[0].abs() <= 1e-9 && (c[1] - (1.0 - alpha)).abs() <= 1e-9,
            "α={alpha}: Ψ(0) = {}",
            out[0]
        );
        let e2 = r.decoder_error * r.decoder_error;
        ensure!((e2 - alpha * (1.0 - alpha)).abs() <= 1e-9, "α={alpha}: err² = {e2}");
        let k_inf = kersize_average(&problem, &t, &dis, Order::Infinity).unwrap();
        let want = if alpha > 0.0 && alpha < 1.0 { 1.0 } else { 0.0 };
        ensure!(k_inf == want, "α={alpha}: k_inf = {k_inf}");
        checks += 3;
    }
    within_time(start, Duration::from_secs(2))?;
    Ok(format!("{checks} checks over 11 values of α"))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut max_ratio = 0.0_f64;
    for (seed, p, t) in ensemble() {
        let r = worst_case_report(&p, &t, &CandidatePolicy::EuclideanMeb).unwrap();
        ensure!(r.kersize / 2.0 - 1e-9 <= r.decoder_error, "seed {seed}: lower bound, {} vs {}", r.decoder_error, r.kersize);
        ensure!(r.decoder_error <= r.kersize + 1e-6, "seed {seed}: upper bound, {} vs {}", r.decoder_error, r.kersize);
        if r.kersize > 0.0 {
            max_ratio = max_ratio.max(r.decoder_error / r.kersize);
        }
    }
    within_time(start, Duration::from_secs(30))?;
    Ok(format!("{ENSEMBLE} problems, max error/kersize {max_ratio:.4}"))
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut runs = 0;
    for (seed, p, t) in ensemble() {
        for uniform in [true, false] {
            let mu = random_measure(&p, seed, uniform);
            for order in [Order::Finite(1.0), Order::Finite(2.0), Order::Infinity] {
                let policy = AveragePolicy::default_for(p.metric_x(), order);
                let r = average_report(&p, &t, &mu, order, &policy).unwrap();
                let res = residual(&p, &t, &r.decoder).unwrap();
                let e = err_a(&res, &mu, order).unwrap();
                ensure!((e - r.decoder_error).abs() <= 1e-12 * (1.0 + e), "seed {seed}: report error mismatch");
                ensure!(r.kersize / 2.0 - 1e-9 <= e, "seed {seed} p={order}: lower, {e} vs {}", r.kersize);
                ensure!(e <= r.kersize + 1e-6, "seed {seed} p={order}: upper, {e} vs {}", r.kersize);
                runs += 1;
            }
        }
    }
    within_time(start, Duration::from_secs(60))?;
    Ok(format!("{runs} (problem, measure, p) runs"))
}

fn criterion_5() -> Outcome {
    let mut groups = 0;
    for (seed, p, t) in ensemble() {
        let mu = random_measure(&p, seed, false);
        let dis = disintegrate(&mu, &t).unwrap();
        let pf = dis.pushforward();
        ensure!((pf.total() - mu.total_mass()).abs() <= 1e-12, "seed {seed}: pushforward total");
        for (gi, g) in t.groups().iter().enumerate() {
            groups += 1;
            // concentration: every member measures into this group
            for a in g.members() {
                ensure!(t.group_of(*a) == gi, "seed {seed}: atom outside its fiber");
            }
            let Some(cond) = dis.conditional(gi) else {
                ensure!(pf.mass(gi) == 0.0, "seed {seed}: missing conditional");
                continue;
            };
            ensure!((cond.iter().sum::<f64>() - 1.0).abs() <= 1e-12, "seed {seed}: normalization");
            for (a, c) in g.members().iter().zip(cond) {
                ensure!((pf.mass(gi) * c - mu.weight(*a)).abs() <= 1e-12, "seed {seed}: reconstruction");
            }
        }
        let post = posterior_distribution(&dis, &t);
        for gi in 0..post.len() {
            if let Some(w) = post.group(gi) {
                ensure!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-12, "seed {seed}: posterior");
            }
        }
        let first = make_baseline(&Baseline::FirstFeasible, &t).unwrap();
        let f = residual(&p, &t, &first).unwrap();
        let flat = ess_sup_discrete(f.values(), mu.weights()).unwrap();
        let mut nested = f64::NEG_INFINITY;
        for (gi, g) in t.groups().iter().enumerate() {
            if let Some(cond) = dis.conditional(gi) {
                let vals: Vec<f64> = g.members().iter().map(|a| f.get(*a)).collect();
                nested = nested.max(ess_sup_discrete(&vals, cond).unwrap());
            }
        }
        ensure!(flat == nested, "seed {seed}: nested ess-sup {nested} vs {flat}");
    }
    Ok(format!("{ENSEMBLE} problems, {groups} groups"))
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let mut r = rng(6);
    let mut worst_radius_gap = 0.0_f64;
    let mut worst_center_gap = 0.0_f64;
    for i in 0..100 {
        let dim = r.random_range(1..=3);
        let n = r.random_range(1..=10);
        let pts = random_points(&mut r, dim, n);
        let ball = minimum_enclosing_ball(&pts).unwrap();
        let oracle = grid_minimax_oracle(&pts, 1e-7);
        let gap = (ball.radius - oracle.value).abs();
        ensure!(gap <= 1e-6, "MEB set {i}: radius {} vs oracle {}", ball.radius, oracle.value);
        worst_radius_gap = worst_radius_gap.max(gap);
        for (a, b) in ball.center.iter().zip(&oracle.argmin) {
            ensure!((a - b).abs() <= 2e-3, "MEB set {i}: center {a} vs {b}");
            worst_center_gap = worst_center_gap.max((a - b).abs());
        }
    }
    let mut worst_median_gap = 0.0_f64;
    for i in 0..100 {
        let dim = r.random_range(1..=3);
        let n = r.random_range(1..=8);
        let pts = random_points(&mut r, dim, n);
        let w = random_weights(&mut r, n);
        let m = weighted_geometric_median(&pts, &w, DEFAULT_MEDIAN_TOL).unwrap();
        let f = fermat_objective(&pts, &w, m.coords());
        let oracle = grid_median_oracle(&pts, &w, 1e-7);
        let gap = (f - oracle.value).abs();
        ensure!(gap <= 1e-6, "median set {i}: {f} vs oracle {}", oracle.value);
        worst_median_gap = worst_median_gap.max(gap);
    }
    Ok(format!(
        "radius gap {worst_radius_gap:.1e}, center gap {worst_center_gap:.1e}, median gap {worst_median_gap:.1e}, {:.2?}",
        start.elapsed()
    ))
}

fn criterion_7() -> Outcome {
    let mut groups = 0;
    let mut probes = 0usize;
    for seed in 0..50 {
        let p = random_additive_problem(seed);
        let t = MeasurementTable::build(&p).unwrap();
        let mu = random_measure(&p, seed, false);
        let r = average_report(&p, &t, &mu, Order::Finite(2.0), &AveragePolicy::Mean).unwrap();
        let post = posterior_distribution(&disintegrate(&mu, &t).unwrap(), &t);
        let mut prng = rng(1000 + seed);
        for (gi, g) in t.groups().iter().enumerate() {
            let Some(w) = post.group(gi) else { continue };
            groups += 1;
            let pts = g.x_points();
            let dim = pts[0].dim();
            let (mut lo, mut hi) = (vec![f64::INFINITY; dim], vec![f64::NEG_INFINITY; dim]);
            for x in pts {
                for k in 0..dim {
                    lo[k] = lo[k].min(x.coords()[k]);
                    hi[k] = hi[k].max(x.coords()[k]);
                }
            }
            let mean = &r.groups[gi].outputs[0];
            let best = posterior_objective(p.metric_x(), pts, w, mean, Order::Finite(2.0)).unwrap();
            for _ in 0..10_000 {
                // probes over the padded bounding box, half of them near the mean
                let z: Vec<f64> = (0..dim)
                    .map(|k| {
                        let pad = 0.5 * (hi[k] - lo[k]) + 0.1;
                        if prng.random::<bool>() {
                            prng.random_range(lo[k] - pad..=hi[k] + pad)
                        } else {
                            mean.coords()[k] + 1e-3 * prng.random_range(-1.0..=1.0)
                        }
                    })
                    .collect();
                let f = posterior_objective(p.metric_x(), pts, w, &Point::new(z).unwrap(), Order::Finite(2.0)).unwrap();
                ensure!(best <= f + 1e-9, "seed {seed} group {gi}: mean {best} > probe {f}");
                probes += 1;
            }
        }
    }
    Ok(format!("50 problems, {groups} groups, {probes} probes"))
}

fn criterion_8() -> Outcome {
    let mut comparisons = 0;
    for (seed, p, t) in ensemble() {
        let psi = optimal_decoder_worst(&p, &t, &CandidatePolicy::EuclideanMeb).unwrap();
        let psi_err = worst_case_error(&p, &t, &psi).unwrap();
        let baselines = [
            Baseline::FirstFeasible,
            Baseline::Constant(Point::zeros(p.model_class().dim()).unwrap()),
            Baseline::FullFeasible,
            Baseline::RandomFeasible { seed },
        ];
        let decoders: Vec<_> = baselines.iter().map(|b| make_baseline(b, &t).unwrap()).collect();
        for (b, d) in baselines.iter().zip(&decoders) {
            let e = worst_case_error(&p, &t, d).unwrap();
            ensure!(psi_err <= e + 1e-9, "seed {seed} {}: worst {psi_err} > {e}", b.name());
            comparisons += 1;
        }
        for uniform in [true, false] {
            let mu = random_measure(&p, seed, uniform);
            for order in [Order::Finite(1.0), Order::Finite(2.0), Order::Infinity] {
                let policy = AveragePolicy::default_for(p.metric_x(), order);
                let r = average_report(&p, &t, &mu, order, &policy).unwrap();
                for (b, d) in baselines.iter().zip(&decoders) {
                    let e = err_a(&residual(&p, &t, d).unwrap(), &mu, order).unwrap();
                    ensure!(
                        r.decoder_error <= e + 1e-9,
                        "seed {seed} {} p={order}: {} > {e}",
                        b.name(),
                        r.decoder_error
                    );
                    comparisons += 1;
                }
            }
        }
    }
    Ok(format!("{comparisons} comparisons"))
}

fn point_set(dim: usize) -> impl Strategy<Value = Vec<Point>> {
    prop::collection::vec(prop::collection::vec(-10.0..10.0f64, dim), 1..=8)
        .prop_map(|v| v.into_iter().map(|c| Point::new(c).unwrap()).collect())
}

fn criterion_9() -> Outcome {
    let mut runner = TestRunner::new(Config {
        cases: 1000,
        failure_persistence: None,
        ..Config::default()
    });
    let strategy = (1usize..=3).prop_flat_map(|d| (Just(d), point_set(d), point_set(d), point_set(d)));
    runner
        .run(&strategy, |(dim, a, b, c)| {
            let m = Metric::euclidean(dim).unwrap();
            let h = |u: &[Point], v: &[Point]| hausdorff_set_set(&m, u, v).unwrap();
            let (ab, ba, bc, ac) = (h(&a, &b), h(&b, &a), h(&b, &c), h(&a, &c));
            prop_assert_eq!(h(&a, &a), 0.0);
            prop_assert!(ab >= 0.0);
            prop_assert_eq!(ab, ba);
            prop_assert!(ac <= ab + bc + 1e-12 * (1.0 + ab + bc));
            let (mut sa, mut sb) = (a.clone(), b.clone());
            sa.sort();
            sa.dedup();
            sb.sort();
            sb.dedup();
            prop_assert_eq!(ab == 0.0, sa == sb);
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok("1000 cases: identity, symmetry, triangle, separation".into())
}

fn criterion_10() -> Outcome {
    let model = vec![p(&[0.0, 0.0]), p(&[1.0, 0.0]), p(&[0.0, 1.0]), p(&[2.0, 3.0])];
    let injective = Problem::linear_additive(
        Matrix::from_rows(vec![vec![2.0, 1.0], vec![0.5, 1.5]]).unwrap(),
        ModelClass::new(model.clone()).unwrap(),
        NoiseClass::noiseless(2).unwrap(),
    )
    .unwrap();
    let t = MeasurementTable::build(&injective).unwrap();
    let cert = RnspCertificate::for_problem(&injective, 1.0, 1.0).unwrap();
    let v = check_rnsp_bound(&injective, &t, &cert).unwrap();
    ensure!(v.passes && v.kersize == 0.0, "injective: {v:?}");

    let zero = Problem::linear_additive(
        Matrix::zeros(2, 2),
        ModelClass::new(model.clone()).unwrap(),
        NoiseClass::noiseless(2).unwrap(),
    )
    .unwrap();
    let t = MeasurementTable::build(&zero).unwrap();
    let cert = RnspCertificate::for_problem(&zero, 1.0, 1.0).unwrap();
    let v = check_rnsp_bound(&zero, &t, &cert).unwrap();
    let diam = diameter(zero.metric_x(), &model).unwrap();
    ensure!(!v.passes && v.kersize == diam, "zero matrix: {v:?}, diam {diam}");
    let norms = RnspNorms::euclidean(2, 2).unwrap();
    let h = rnsp_falsify(&Matrix::zeros(2, 2), &model, &cert, &norms, 10_000, 0).unwrap();
    ensure!(h.is_some(), "falsifier found nothing in 10^4 probes");
    Ok(format!("injective kersize 0; zero matrix kersize {diam}; counterexample {:?}", h.unwrap()))
}

fn run_cli(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_kersize"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)));
    }
    Ok(out.stdout)
}

fn criterion_11() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut compared = 0;
    for seed in [3u64, 17, 42] {
        let problem = random_additive_problem(seed);
        let mu = random_measure(&problem, seed, false);
        let path = dir.path().join(format!("problem_{seed}.json"));
        std::fs::write(&path, ProblemSpec::from_problem(&problem, Some(&mu)).to_canonical_json())
            .map_err(|e| e.to_string())?;
        let spec = path.to_str().unwrap();
        for analysis in [
            vec!["analyze", "worst"],
            vec!["analyze", "average", "--p", "1"],
            vec!["analyze", "average", "--p", "2"],
            vec!["analyze", "average", "--p", "inf"],
        ] {
            let with = |threads: &str| {
                let mut a = vec!["--problem", spec, "--threads", threads];
                a.extend(&analysis);
                run_cli(&a)
            };
            let one = with("1")?;
            let four = with("4")?;
            let again = with("4")?;
            ensure!(one == four, "seed {seed} {analysis:?}: differs across thread counts");
            ensure!(four == again, "seed {seed} {analysis:?}: differs across runs");
            compared += 1;
        }
    }
    check_example(dir.path())?;
    Ok(format!("{compared} analyses byte-identical for threads 1, 4 and a repeat"))
}

fn check_example(dir: &Path) -> Result<(), String> {
    let out = dir.join("two_point.json");
    let path = out.to_str().unwrap();
    let args = ["example", "two-point", "--alpha", "0.25", "--p", "2", "--out", path];
    run_cli(&args)?;
    let first = std::fs::read(&out).map_err(|e| e.to_string())?;
    run_cli(&args)?;
    let second = std::fs::read(&out).map_err(|e| e.to_string())?;
    ensure!(first == second, "example output differs across runs");
    Ok(())
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("two-point worst-case exactness", criterion_1),
        ("two-point average-case exactness", criterion_2),
        ("worst-case sandwich, 200 problems", criterion_3),
        ("average sandwich, p in {1, 2, inf}", criterion_4),
        ("disintegration identities", criterion_5),
        ("solvers vs grid oracles", criterion_6),
        ("posterior mean optimality", criterion_7),
        ("dominance over baselines", criterion_8),
        ("Hausdorff metric axioms", criterion_9),
        ("rNSP consequence check and falsifier", criterion_10),
        ("determinism across threads and runs", criterion_11),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let took = start.elapsed();
        match outcome {
            Ok(detail) => println!("[PASS] criterion {:>2} {name}: {detail} ({took:.2?})", i + 1),
            Err(why) => {
                failed += 1;
                println!("[FAIL] criterion {:>2} {name}: {why} ({took:.2?})", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
