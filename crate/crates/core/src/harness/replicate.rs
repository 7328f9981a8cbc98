use rayon::prelude::*;

use super::config::ReferenceSource;
use crate::bregman::BregmanSchedule;
use crate::error::{Error, Result};
use crate::model::ProblemInstance;
use crate::prox::ProxQuery;
use crate::solver::{replication_seed, run, SolverConfig, Trajectory};

/// Step budget of the deterministic reference run.
pub const REFERENCE_MAX_STEPS: usize = 100_000;
/// Residual at which the reference run stops.
pub const REFERENCE_TOL: f64 = 1e-12;

/// The value `F_bar` gaps are measured against.
#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    pub value: f64,
    pub point: Vec<f64>,
    /// Obtained from a long full-proximal run, not a declared optimum.
    pub best_found: bool,
    pub steps: usize,
    pub residual: f64,
}

/// Known optimum when available (and allowed), otherwise the end point of a
/// deterministic full proximal-gradient run from `x0`.
pub fn resolve_reference_value(
    p: &ProblemInstance,
    schedule: &BregmanSchedule,
    x0: &[f64],
    source: ReferenceSource,
) -> Result<Reference> {
    match (source, p.known_optimum()) {
        (ReferenceSource::Known | ReferenceSource::Auto, Some(opt)) => {
            return Ok(Reference {
                value: opt.value,
                point: opt.point.clone(),
                best_found: false,
                steps: 0,
                residual: 0.0,
            })
        }
        (ReferenceSource::Known, None) => {
            return Err(Error::Config("reference = known but the instance declares no optimum".into()))
        }
        _ => {}
    }
    let gen = schedule.generator(0);
    let eps = schedule.step(0);
    let mut x = x0.to_vec();
    let mut value = p.objective(&x)?;
    let mut residual = f64::INFINITY;
    let mut steps = 0;
    while steps < REFERENCE_MAX_STEPS {
        let q = ProxQuery::new(p, &gen, eps, &x)?;
        let next = q.full();
        residual = crate::dist(&x, &next);
        if residual <= REFERENCE_TOL {
            break;
        }
        let next_value = p.objective(&next)?;
        if !next_value.is_finite() || next_value > value + 1e-12 * (1.0 + value.abs()) {
            return Err(Error::Divergence { k: steps, before: value, after: next_value });
        }
        x = next;
        value = next_value;
        steps += 1;
    }
    Ok(Reference { value, point: x, best_found: true, steps, residual })
}

/// Per-iteration statistics of the gap `F(x^k) - F_bar` over replications.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanTrajectory {
    pub mean_gap: Vec<f64>,
    /// Population variance (divides by `R`).
    pub var_gap: Vec<f64>,
    pub replications: usize,
    pub seeds: Vec<u64>,
    pub f_bar: f64,
    /// `mean_r x_r^k`, when every replication kept its iterates.
    pub mean_points: Option<Vec<Vec<f64>>>,
    /// `mean_r x_r^final`
    pub mean_final: Vec<f64>,
}

impl MeanTrajectory {
    /// Truncates every trajectory to the shortest one.
    pub fn from_trajectories(trajs: &[Trajectory], f_bar: f64) -> Result<Self> {
        let r = trajs.len();
        if r == 0 {
            return Err(Error::Config("no replications to average".into()));
        }
        let values: Vec<Vec<f64>> = trajs.iter().map(Trajectory::values).collect();
        let len = values.iter().map(Vec::len).min().unwrap_or(0);
        let rf = r as f64;
        let mut mean_gap = Vec::with_capacity(len);
        let mut var_gap = Vec::with_capacity(len);
        for k in 0..len {
            let mean = values.iter().map(|v| v[k] - f_bar).sum::<f64>() / rf;
            let var = values.iter().map(|v| (v[k] - f_bar - mean).powi(2)).sum::<f64>() / rf;
            mean_gap.push(mean);
            var_gap.push(var);
        }
        let n = trajs[0].x0.len();
        let average = |pts: &mut dyn Iterator<Item = Option<&[f64]>>| -> Option<Vec<f64>> {
            let mut acc = vec![0.0; n];
            for p in pts {
                for (a, x) in acc.iter_mut().zip(p?) {
                    *a += x;
                }
            }
            Some(acc.into_iter().map(|a| a / rf).collect())
        };
        let mean_points = (0..len)
            .map(|k| average(&mut trajs.iter().map(|t| t.point(k))))
            .collect::<Option<Vec<_>>>();
        let mean_final = average(&mut trajs.iter().map(|t| Some(t.final_point.as_slice())))
            .expect("final points are always kept");
        Ok(Self {
            mean_gap,
            var_gap,
            replications: r,
            seeds: trajs.iter().map(|t| t.seed).collect(),
            f_bar,
            mean_points,
            mean_final,
        })
    }

    pub fn len(&self) -> usize {
        self.mean_gap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean_gap.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct ReplicationSet {
    pub trajectories: Vec<Trajectory>,
    pub mean: MeanTrajectory,
}

/// Runs one trajectory per seed, concurrently, merged in seed order.
pub fn run_with_seeds(
    p: &ProblemInstance,
    base: &SolverConfig,
    start: &(dyn Fn(usize) -> Vec<f64> + Sync),
    seeds: &[u64],
    f_bar: f64,
) -> Result<ReplicationSet> {
    let trajectories = seeds
        .par_iter()
        .enumerate()
        .map(|(id, &seed)| {
            let config = SolverConfig { seed, ..base.clone() };
            run(p, &config, &start(id)).map_err(|e| Error::Replication { id, source: Box::new(e) })
        })
        .collect::<Result<Vec<_>>>()?;
    let mean = MeanTrajectory::from_trajectories(&trajectories, f_bar)?;
    Ok(ReplicationSet { trajectories, mean })
}

/// `R` replications with seeds `replication_seed(base.seed, r)`.
pub fn run_replications(
    p: &ProblemInstance,
    base: &SolverConfig,
    start: &(dyn Fn(usize) -> Vec<f64> + Sync),
    replications: usize,
    f_bar: f64,
) -> Result<ReplicationSet> {
    let seeds: Vec<u64> = (0..replications).map(|r| replication_seed(base.seed, r)).collect();
    run_with_seeds(p, base, start, &seeds, f_bar)
}
