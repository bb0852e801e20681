use kersize_core::average::{average_report, kersize_average, posterior_distribution, AveragePolicy};
use kersize_core::decoder::{make_baseline, Baseline};
use kersize_core::measure::{disintegrate, err_a, pushforward, residual, ess_sup_discrete, Order};
use kersize_core::metric::{hausdorff_set_set, Metric, Point};
use kersize_core::problem::{MeasurementTable, Problem};
use kersize_core::spec::{parse_problem_spec, ProblemSpec};
use kersize_core::testkit::{random_additive_problem, random_measure};
use kersize_core::worst_case::{
    kersize_worst, optimal_decoder_worst, worst_case_error, worst_case_report, CandidatePolicy,
};
use proptest::prelude::*;

fn ensemble(range: std::ops::Range<u64>) -> impl Iterator<Item = (u64, Problem, MeasurementTable)> {
    range.map(|seed| {
        let p = random_additive_problem(seed);
        let t = MeasurementTable::build(&p).unwrap();
        (seed, p, t)
    })
}

fn point_set(dim: usize) -> impl Strategy<Value = Vec<Point>> {
    prop::collection::vec(prop::collection::vec(-10.0..10.0f64, dim), 1..=8)
        .prop_map(|v| v.into_iter().map(|c| Point::new(c).unwrap()).collect())
}

fn three_sets() -> impl Strategy<Value = (usize, Vec<Point>, Vec<Point>, Vec<Point>)> {
    (1usize..=3).prop_flat_map(|d| (Just(d), point_set(d), point_set(d), point_set(d)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn hausdorff_is_a_metric_on_finite_sets((dim, a, b, c) in three_sets()) {
        let m = Metric::euclidean(dim).unwrap();
        let ab = hausdorff_set_set(&m, &a, &b).unwrap();
        let ba = hausdorff_set_set(&m, &b, &a).unwrap();
        let bc = hausdorff_set_set(&m, &b, &c).unwrap();
        let ac = hausdorff_set_set(&m, &a, &c).unwrap();
        prop_assert_eq!(hausdorff_set_set(&m, &a, &a).unwrap(), 0.0);
        prop_assert_eq!(ab, ba);
        prop_assert!(ac <= ab + bc + 1e-12 * (1.0 + ab + bc));
        let mut sa = a.clone();
        let mut sb = b.clone();
        sa.sort();
        sa.dedup();
        sb.sort();
        sb.dedup();
        prop_assert_eq!(ab == 0.0, sa == sb);
    }

    #[test]
    fn duplicated_points_do_not_change_the_distance((dim, a, b, _c) in three_sets()) {
        let m = Metric::euclidean(dim).unwrap();
        let mut doubled = a.clone();
        doubled.extend(a.iter().cloned());
        prop_assert_eq!(
            hausdorff_set_set(&m, &a, &b).unwrap(),
            hausdorff_set_set(&m, &doubled, &b).unwrap()
        );
    }
}

#[test]
fn worst_case_sandwich_and_lower_bound_universality() {
    for (seed, p, t) in ensemble(0..60) {
        let r = worst_case_report(&p, &t, &CandidatePolicy::EuclideanMeb).unwrap();
        assert!(r.verdicts_hold(), "seed {seed}: {} vs {}", r.decoder_error, r.kersize);
        for kind in [
            Baseline::FirstFeasible,
            Baseline::FullFeasible,
            Baseline::RandomFeasible { seed },
            Baseline::Constant(Point::zeros(p.model_class().dim()).unwrap()),
        ] {
            let d = make_baseline(&kind, &t).unwrap();
            let e = worst_case_error(&p, &t, &d).unwrap();
            assert!(e >= r.kersize / 2.0 - 1e-9, "seed {seed} {}", kind.name());
            assert!(r.decoder_error <= e + 1e-9, "seed {seed} {}", kind.name());
        }
    }
}

#[test]
fn feasible_point_policy_dominates_restricted_baselines() {
    for (seed, p, t) in ensemble(0..40) {
        let r = worst_case_report(&p, &t, &CandidatePolicy::FeasiblePoints).unwrap();
        assert!(r.verdicts_hold(), "seed {seed}");
        let first = make_baseline(&Baseline::FirstFeasible, &t).unwrap();
        assert!(r.decoder_error <= worst_case_error(&p, &t, &first).unwrap() + 1e-9);
    }
}

#[test]
fn average_case_sandwich() {
    for (seed, p, t) in ensemble(0..60) {
        for uniform in [true, false] {
            let mu = random_measure(&p, seed, uniform);
            for order in [Order::Finite(1.0), Order::Finite(2.0), Order::Infinity] {
                let policy = AveragePolicy::default_for(p.metric_x(), order);
                let r = average_report(&p, &t, &mu, order, &policy).unwrap();
                assert_eq!(r.upper_bound_holds, Some(r.decoder_error <= r.kersize + 1e-6));
                assert!(
                    r.verdicts_hold(),
                    "seed {seed} p={order}: {} vs {}",
                    r.decoder_error,
                    r.kersize
                );
            }
        }
    }
}

#[test]
fn disintegration_identities() {
    for (seed, p, t) in ensemble(0..60) {
        let mu = random_measure(&p, seed, false);
        let dis = disintegrate(&mu, &t).unwrap();
        let pf = dis.pushforward();
        assert!((pf.total() - mu.total_mass()).abs() < 1e-12);
        for (gi, g) in t.groups().iter().enumerate() {
            let Some(cond) = dis.conditional(gi) else {
                assert_eq!(pf.mass(gi), 0.0);
                continue;
            };
            assert!((cond.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            // reconstruction: mu(atom) = F_*mu(y) mu^y(atom)
            for (a, c) in g.members().iter().zip(cond) {
                assert!((pf.mass(gi) * c - mu.weight(*a)).abs() < 1e-12);
            }
        }
        // concentration: each conditional lives on its own fiber
        for (gi, g) in t.groups().iter().enumerate() {
            for a in g.members() {
                assert_eq!(t.group_of(*a), gi);
            }
        }
        let post = posterior_distribution(&dis, &t);
        for gi in 0..post.len() {
            if let Some(w) = post.group(gi) {
                assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
        // nested ess-sup of an arbitrary function
        let f: Vec<f64> = (0..t.n_x() * t.n_e()).map(|i| ((i * 7919) % 13) as f64).collect();
        let flat = ess_sup_discrete(&f, mu.weights()).unwrap();
        let nested = t
            .groups()
            .iter()
            .enumerate()
            .filter_map(|(gi, g)| {
                let cond = dis.conditional(gi)?;
                let vals: Vec<f64> = g.members().iter().map(|a| f[t.atom_index(*a)]).collect();
                Some(ess_sup_discrete(&vals, cond).unwrap())
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(flat, nested, "seed {seed}");
        let _ = pushforward(&mu, &t).unwrap();
    }
}

#[test]
fn monotone_in_p_and_infinity_limit() {
    for (seed, p, t) in ensemble(0..60) {
        let mu = random_measure(&p, seed, true);
        let dis = disintegrate(&mu, &t).unwrap();
        let ks: Vec<f64> = [1.0, 1.5, 2.0, 3.0, 4.0]
            .iter()
            .map(|&q| kersize_average(&p, &t, &dis, Order::Finite(q)).unwrap())
            .collect();
        for w in ks.windows(2) {
            assert!(w[0] <= w[1] + 1e-12, "seed {seed}: {ks:?}");
        }
        let k_inf = kersize_average(&p, &t, &dis, Order::Infinity).unwrap();
        assert!(ks[4] <= k_inf + 1e-12);
        assert_eq!(k_inf, kersize_worst(&p, &t).unwrap());
    }
}

#[test]
fn infinity_decoder_reproduces_worst_case() {
    for (seed, p, t) in ensemble(0..60) {
        let mu = random_measure(&p, seed, true);
        let r = average_report(&p, &t, &mu, Order::Infinity, &AveragePolicy::SupportChebyshev)
            .unwrap();
        let worst = optimal_decoder_worst(&p, &t, &CandidatePolicy::EuclideanMeb).unwrap();
        assert_eq!(r.decoder, worst, "seed {seed}");
    }
}

#[test]
fn ess_sup_error_below_worst_error() {
    for (seed, p, t) in ensemble(0..60) {
        let first = make_baseline(&Baseline::FirstFeasible, &t).unwrap();
        let res = residual(&p, &t, &first).unwrap();
        let worst = worst_case_error(&p, &t, &first).unwrap();
        let partial = random_measure(&p, seed, false);
        assert!(err_a(&res, &partial, Order::Infinity).unwrap() <= worst);
        let full = random_measure(&p, seed, true);
        assert_eq!(err_a(&res, &full, Order::Infinity).unwrap(), worst);
    }
}

#[test]
fn scaling_the_measure_keeps_decoders() {
    for (seed, p, t) in ensemble(0..30) {
        let mu = random_measure(&p, seed, false);
        let scaled = mu.scaled(8.0).unwrap();
        for order in [Order::Finite(1.0), Order::Finite(2.0), Order::Infinity] {
            let policy = AveragePolicy::default_for(p.metric_x(), order);
            let a = average_report(&p, &t, &mu, order, &policy).unwrap();
            let b = average_report(&p, &t, &scaled, order, &policy).unwrap();
            assert_eq!(a.decoder, b.decoder, "seed {seed} p={order}");
        }
    }
}

#[test]
fn spec_round_trip_on_ensemble() {
    for (seed, p, _) in ensemble(0..60) {
        let mu = random_measure(&p, seed, false);
        let text = ProblemSpec::from_problem(&p, Some(&mu)).to_canonical_json();
        let loaded = parse_problem_spec(&text).unwrap();
        assert_eq!(loaded.problem, p, "seed {seed}");
        assert_eq!(loaded.measure, mu);
        assert_eq!(loaded.spec.to_canonical_json(), text);
    }
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    for (seed, p, t) in ensemble(0..30) {
        let mu = random_measure(&p, seed, false);
        let run = || {
            let w = worst_case_report(&p, &t, &CandidatePolicy::EuclideanMeb).unwrap();
            let a = average_report(&p, &t, &mu, Order::Finite(1.0), &AveragePolicy::Median).unwrap();
            (w, a)
        };
        assert_eq!(one.install(run), four.install(run));
    }
}
