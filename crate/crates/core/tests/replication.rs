use std::path::Path;

use vbscd::harness::{run_replications, run_with_seeds, Experiment, ExperimentConfig, MeanTrajectory};

fn lasso50() -> Experiment {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/lasso50.cfg");
    Experiment::new(ExperimentConfig::load(&path).unwrap()).unwrap()
}

fn variance(xs: &[f64]) -> f64 {
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

/// The spread of the mean gap across independent batches scales like `1/R`.
#[test]
fn mean_gap_variance_shrinks_like_inverse_replications() {
    let mut exp = lasso50();
    let f_bar = exp.reference().unwrap().value;
    let x0 = exp.x0().unwrap();
    let start = move |_: usize| x0.clone();
    let mut base = exp.solver_config();
    base.max_iters = 120;
    base.keep_iterates = false;
    let batches = 30;
    let probe_iters = [40, 60, 80, 100, 120];

    let mut spread = Vec::new();
    for reps in [50usize, 100, 200] {
        let means: Vec<MeanTrajectory> = (0..batches)
            .map(|b| {
                let mut c = base.clone();
                c.seed = 1_000 * reps as u64 + b as u64;
                run_replications(&exp.problem, &c, &start, reps, f_bar).unwrap().mean
            })
            .collect();
        let total: f64 = probe_iters
            .iter()
            .map(|&k| variance(&means.iter().map(|m| m.mean_gap[k]).collect::<Vec<_>>()))
            .sum();
        spread.push(total);
    }
    for w in spread.windows(2) {
        let ratio = w[0] / w[1];
        assert!((1.0..=4.0).contains(&ratio), "doubling R changed the variance by {ratio}, spread {spread:?}");
    }
}

#[test]
fn single_replication_mean_is_the_trajectory() {
    let mut exp = lasso50();
    let f_bar = exp.reference().unwrap().value;
    let x0 = exp.x0().unwrap();
    let set = run_replications(&exp.problem, &exp.solver_config(), &move |_| x0.clone(), 1, f_bar).unwrap();
    let gaps: Vec<f64> = set.trajectories[0].values().iter().map(|v| v - f_bar).collect();
    assert_eq!(set.mean.mean_gap, gaps);
    assert!(set.mean.var_gap.iter().all(|v| *v == 0.0));
}

#[test]
fn duplicated_seed_has_zero_variance() {
    let mut exp = lasso50();
    let f_bar = exp.reference().unwrap().value;
    let x0 = exp.x0().unwrap();
    let set = run_with_seeds(&exp.problem, &exp.solver_config(), &move |_| x0.clone(), &[7, 7], f_bar).unwrap();
    assert!(set.mean.var_gap.iter().all(|v| *v == 0.0));
    assert_eq!(set.trajectories[0].blocks(), set.trajectories[1].blocks());
}

#[test]
fn replications_do_not_depend_on_thread_count() {
    let mut exp = lasso50();
    let f_bar = exp.reference().unwrap().value;
    let x0 = exp.x0().unwrap();
    let start = move |_: usize| x0.clone();
    let parallel = run_replications(&exp.problem, &exp.solver_config(), &start, 16, f_bar).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let serial = pool.install(|| run_replications(&exp.problem, &exp.solver_config(), &start, 16, f_bar).unwrap());
    assert_eq!(parallel.mean.mean_gap, serial.mean.mean_gap);
    assert_eq!(parallel.mean.seeds, serial.mean.seeds);
}
