use proptest::prelude::*;

use vbscd::bregman::{step_limit, BregmanGenerator, BregmanSchedule, StepSchedule, WeightSchedule};
use vbscd::model::{make_quadratic_problem, BlockPartition, DenseMatrix, ProblemInstance, Regularizer};
use vbscd::prox::{scalar_prox, ProxQuery};
use vbscd::solver::{run, SolverConfig};

fn regularizer(kind: usize, lambda: f64) -> Regularizer {
    match kind {
        0 => Regularizer::Zero,
        1 => Regularizer::l1(lambda).unwrap(),
        2 => Regularizer::scad(lambda, 3.7).unwrap(),
        3 => Regularizer::mcp(lambda, 2.5).unwrap(),
        _ => Regularizer::squared_l2(lambda).unwrap(),
    }
}

#[derive(Debug, Clone)]
struct Case {
    problem: ProblemInstance,
    weights: Vec<f64>,
    eps: f64,
    x: Vec<f64>,
}

fn case() -> impl Strategy<Value = Case> {
    prop::collection::vec((1usize..=3, 0usize..5, 0.05f64..1.0), 1..=4)
        .prop_flat_map(|blocks| {
            let n: usize = blocks.iter().map(|b| b.0).sum();
            (
                Just(blocks),
                prop::collection::vec(-1.0f64..1.0, (n + 2) * n),
                prop::collection::vec(-2.0f64..2.0, n + 2),
                prop::collection::vec(0.5f64..2.0, n),
                prop::collection::vec(-3.0f64..3.0, n),
                0.1f64..0.95,
            )
        })
        .prop_map(|(blocks, a, b, weights, x, fraction)| {
            let n = x.len();
            let a = DenseMatrix::new(n + 2, n, a).unwrap();
            let regs = blocks.iter().map(|&(_, k, l)| regularizer(k, l)).collect();
            let part = BlockPartition::new(blocks.iter().map(|b| b.0).collect()).unwrap();
            let problem = make_quadratic_problem(a, b, regs, part).unwrap();
            let m = weights.iter().cloned().fold(f64::INFINITY, f64::min);
            let limit = step_limit(m, problem.lipschitz(), problem.rho_max());
            let eps = fraction * if limit.is_finite() { limit } else { 1.0 };
            Case { problem, weights, eps, x }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn full_map_restricted_to_a_block_is_the_coordinate_map(c in case()) {
        let gen = BregmanGenerator::new(c.weights.clone()).unwrap();
        let q = ProxQuery::new(&c.problem, &gen, c.eps, &c.x).unwrap();
        let full = q.full();
        for i in 0..c.problem.num_blocks() {
            let coord = q.coordinate(i);
            let r = c.problem.partition().range(i);
            prop_assert_eq!(&coord[r.clone()], &full[r.clone()]);
            for j in (0..c.x.len()).filter(|j| !r.contains(j)) {
                prop_assert_eq!(coord[j], c.x[j]);
            }
        }
    }

    #[test]
    fn coordinate_map_satisfies_its_optimality_condition(c in case()) {
        let gen = BregmanGenerator::new(c.weights.clone()).unwrap();
        let q = ProxQuery::new(&c.problem, &gen, c.eps, &c.x).unwrap();
        let grad = c.problem.gradient(&c.x).unwrap();
        let part = c.problem.partition();
        for i in 0..c.problem.num_blocks() {
            let y = q.coordinate(i);
            let reg = c.problem.regularizer(i);
            for j in part.range(i) {
                let (lo, hi) = reg.subdifferential(y[j]);
                let rest = grad[j] + c.weights[j] * (y[j] - c.x[j]) / c.eps;
                let tol = 1e-8 * (1.0 + rest.abs());
                prop_assert!(-rest >= lo - tol && -rest <= hi + tol, "block {} coord {}: {} not in [{}, {}]", i, j, -rest, lo, hi);
            }
        }
    }

    #[test]
    fn envelope_never_exceeds_objective(c in case()) {
        let gen = BregmanGenerator::new(c.weights.clone()).unwrap();
        let q = ProxQuery::new(&c.problem, &gen, c.eps, &c.x).unwrap();
        let f = c.problem.objective(&c.x).unwrap();
        prop_assert!(q.envelope() <= f + 1e-12 * (1.0 + f.abs()));
    }

    #[test]
    fn quadratic_bregman_distance_is_symmetric(
        w in prop::collection::vec(0.1f64..5.0, 1..6),
        seed in prop::collection::vec(-5.0f64..5.0, 12),
    ) {
        let n = w.len();
        let gen = BregmanGenerator::new(w).unwrap();
        let (x, y) = (&seed[..n], &seed[6..6 + n]);
        let d = gen.distance(x, y).unwrap();
        prop_assert!((d - gen.distance(y, x).unwrap()).abs() <= 1e-12 * (1.0 + d));
        prop_assert!(d >= 0.0);
    }

    #[test]
    fn solver_never_increases_the_objective(c in case(), seed in any::<u64>()) {
        let sched = BregmanSchedule::new(
            c.x.len(),
            WeightSchedule::Constant(c.weights.clone()),
            StepSchedule::Constant(c.eps),
        ).unwrap();
        let config = SolverConfig::new(sched, c.problem.num_blocks(), 200, 1e-10, seed);
        let t = run(&c.problem, &config, &c.x).unwrap();
        for w in t.values().windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12 * (1.0 + w[0].abs()));
        }
    }

    #[test]
    fn soft_threshold_shrinks_toward_zero(lambda in 0.0f64..3.0, w in 0.2f64..5.0, v in -10.0f64..10.0) {
        let reg = Regularizer::l1(lambda).unwrap();
        let x = scalar_prox(&reg, w, v).unwrap();
        let expected = v.signum() * (v.abs() - lambda / w).max(0.0);
        prop_assert!((x - expected).abs() <= 1e-12 * (1.0 + v.abs()));
        prop_assert!(x.abs() <= v.abs());
        prop_assert!(x == 0.0 || x.signum() == v.signum());
    }

    #[test]
    fn convex_prox_is_nonexpansive(kind in 0usize..5, lambda in 0.01f64..2.0, w in 0.5f64..5.0, u in -10.0f64..10.0, v in -10.0f64..10.0) {
        let reg = regularizer(kind, lambda);
        prop_assume!(reg.is_convex());
        let (pu, pv) = (scalar_prox(&reg, w, u).unwrap(), scalar_prox(&reg, w, v).unwrap());
        prop_assert!((pu - pv).abs() <= (u - v).abs() + 1e-12);
    }

    #[test]
    fn semiconvex_prox_is_monotone(kind in 0usize..5, lambda in 0.01f64..2.0, extra in 0.1f64..5.0, u in -10.0f64..10.0, v in -10.0f64..10.0) {
        let reg = regularizer(kind, lambda);
        let w = reg.semiconvex_rho() + extra;
        let (pu, pv) = (scalar_prox(&reg, w, u).unwrap(), scalar_prox(&reg, w, v).unwrap());
        prop_assert!((pu - pv) * (u - v) >= -1e-12);
    }
}
