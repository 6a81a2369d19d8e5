//! Property tests for the invariants that hold across the whole input
//! space: parser totality and round-tripping, feasibility closure of
//! Frank-Wolfe iterates, oracle optimality, and gap nonnegativity.

use proptest::prelude::*;
use zofw::constraints::{ConstraintSet, L1Ball, L2Ball};
use zofw::data::{parse_libsvm, write_libsvm};
use zofw::numerics::{DenseVector, GaussianSampler};
use zofw::objectives::{synth_logistic, LogisticObjective, WhiteBoxObjective};
use zofw::solvers::fw_gap;

fn finite_vec(d: usize, scale: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-scale..scale, d..=d)
}

proptest! {
    /// The parser is total: any input either yields a dataset or a
    /// positioned error; it never panics.
    #[test]
    fn parse_is_total_over_arbitrary_text(text in ".{0,200}") {
        let _ = parse_libsvm(&text, None);
        let _ = parse_libsvm(&text, Some(8));
    }

    /// Structured fuzz closer to the format: random labels and pairs.
    #[test]
    fn parse_is_total_over_almost_libsvm_lines(
        label in "[+-]?[0-9a-z.]{1,4}",
        pairs in prop::collection::vec(("[0-9]{1,3}", "-?[0-9.e]{1,6}"), 0..6),
    ) {
        let mut line = label;
        for (i, v) in pairs {
            line.push_str(&format!(" {i}:{v}"));
        }
        line.push('\n');
        let _ = parse_libsvm(&line, None);
    }

    /// Round-trip: serialize(parse(text)) reproduces an equivalent
    /// dataset (same rows, labels, and dimension).
    #[test]
    fn serialization_round_trips(
        rows in prop::collection::vec(
            (prop::collection::btree_set(0u32..40, 1..8), -1e6f64..1e6),
            1..12,
        )
    ) {
        let text: String = rows
            .iter()
            .enumerate()
            .map(|(k, (idx, v))| {
                let label = if k % 2 == 0 { 1.0 } else { -1.0 };
                let feats: Vec<String> = idx.iter().map(|i| format!("{}:{}", i + 1, v)).collect();
                format!("{label} {}\n", feats.join(" "))
            })
            .collect();
        let ds = parse_libsvm(&text, Some(40)).unwrap();
        let back = parse_libsvm(&write_libsvm(&ds), Some(40)).unwrap();
        prop_assert_eq!(&ds.rows, &back.rows);
        prop_assert_eq!(&ds.labels, &back.labels);
        let stats_a = zofw::data::dataset_stats(&ds);
        let stats_b = zofw::data::dataset_stats(&back);
        prop_assert_eq!(stats_a.nnz, stats_b.nnz);
    }

    /// Feasibility closure: x_{t+1} = (1-gamma) x_t + gamma lmo(g) stays
    /// in the set from x_0 = 0, for any gamma sequence in (0,1).
    #[test]
    fn frank_wolfe_updates_stay_feasible(
        seed in 0u64..1000,
        gammas in prop::collection::vec(0.001f64..0.999, 1..40),
        r in 0.1f64..5.0,
    ) {
        let mut s = GaussianSampler::new(seed);
        let l1 = L1Ball::new(r);
        let l2 = L2Ball::new(r);
        let mut x1 = l1.origin(6);
        let mut x2 = l2.origin(6);
        for &gamma in &gammas {
            let g = DenseVector::from_vec((0..6).map(|_| s.normal()).collect());
            x1.combine(gamma, &l1.lmo(&g));
            x2.combine(gamma, &l2.lmo(&g));
            prop_assert!(l1.contains(&x1, 1e-9));
            prop_assert!(l2.contains(&x2, 1e-9));
        }
    }

    /// LMO optimality against brute force over the l1 vertices.
    #[test]
    fn l1_lmo_beats_every_vertex(g in finite_vec(6, 10.0), r in 0.1f64..4.0) {
        let g = DenseVector::from_vec(g);
        let ball = L1Ball::new(r);
        let s = ball.lmo(&g);
        let best = s.dot(&g);
        for i in 0..6 {
            let mut v = DenseVector::zeros(6);
            v[i] = r;
            prop_assert!(best <= v.dot(&g) + 1e-9);
            v[i] = -r;
            prop_assert!(best <= v.dot(&g) + 1e-9);
        }
    }

    /// Projection returns a feasible point at least as close as any
    /// sampled feasible candidate.
    #[test]
    fn projection_is_no_farther_than_candidates(
        x in finite_vec(5, 6.0),
        seed in 0u64..1000,
        r in 0.5f64..2.0,
    ) {
        let x = DenseVector::from_vec(x);
        let mut s = GaussianSampler::new(seed);
        for set in [&L1Ball::new(r) as &dyn ConstraintSet, &L2Ball::new(r)] {
            let px = set.project(&x);
            prop_assert!(set.contains(&px, 1e-9));
            let base = x.sub(&px).norm2();
            for _ in 0..50 {
                let cand = set.project(&DenseVector::from_vec((0..5).map(|_| 3.0 * s.normal()).collect()));
                prop_assert!(base <= x.sub(&cand).norm2() + 1e-9);
            }
        }
    }
}

#[test]
fn fw_gap_is_nonnegative_on_random_feasible_points() {
    let mut s = GaussianSampler::new(404);
    let (ds, _) = synth_logistic(40, 8, 1.0, 0.2, &mut s);
    let obj = LogisticObjective::new(ds).unwrap();
    let l1 = L1Ball::new(1.5);
    let l2 = L2Ball::new(1.5);
    for _ in 0..1000 {
        let raw = DenseVector::from_vec((0..8).map(|_| 2.0 * s.normal()).collect());
        for set in [&l1 as &dyn ConstraintSet, &l2] {
            let x = set.project(&raw);
            let gap = fw_gap(&obj.gradient(&x), &x, set);
            assert!(gap >= -1e-9, "gap {gap} negative beyond tolerance");
        }
    }
}

#[test]
fn gradient_matches_central_differences_on_all_builtins() {
    // Finite-difference oracle: central difference with h = 1e-6 agrees
    // with the analytic gradient to 1e-5 in the max norm on random
    // feasible points.
    let mut s = GaussianSampler::new(505);
    let (ds, _) = synth_logistic(25, 7, 0.8, 0.2, &mut s);
    let logistic = LogisticObjective::new(ds).unwrap();

    let (ds2, _) = synth_logistic(25, 7, 0.8, 0.0, &mut s);
    let mut reg = ds2;
    for l in reg.labels.iter_mut() {
        *l *= 2.5; // real-valued targets for the robust loss
    }
    let corr = zofw::objectives::CorrentropyObjective::new(reg).unwrap();

    let quad = zofw::objectives::QuadraticObjective::new(1.3, 7);

    let (model, images, labels) = zofw::objectives::synth_attack_toy(&mut s, 3, 7, 6);
    let attack = zofw::objectives::SoftmaxAttackObjective::new(model, images, labels).unwrap();

    let objs: [&dyn WhiteBoxObjective; 4] = [&logistic, &corr, &quad, &attack];
    let ball = L1Ball::new(2.0);
    for obj in objs {
        for trial in 0..100 {
            let raw = DenseVector::from_vec((0..7).map(|_| s.normal()).collect());
            let x = ball.project(&raw);
            let analytic = obj.gradient(&x);
            let h = 1e-6;
            let mut worst = 0.0f64;
            for i in 0..7 {
                let mut xp = x.clone();
                xp[i] += h;
                let mut xm = x.clone();
                xm[i] -= h;
                let fd = (obj.full_value(&xp) - obj.full_value(&xm)) / (2.0 * h);
                worst = worst.max((fd - analytic[i]).abs());
            }
            assert!(worst <= 1e-5, "trial {trial}: max FD deviation {worst}");
        }
    }
}
