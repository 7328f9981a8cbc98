//! The randomized iteration: draw a block uniformly, apply the coordinate
//! Bregman proximal step under the schedule at `k`, record the result.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bregman::{validate_schedule, BregmanSchedule};
use crate::error::{Error, Result};
use crate::model::ProblemInstance;
use crate::prox::ProxQuery;

/// Generator used for block sampling and every seeded experiment.
pub type SolverRng = ChaCha8Rng;

const SEED_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;

/// Seed of replication `r`: `base ^ (r * 0x9E3779B97F4A7C15)` (wrapping).
pub fn replication_seed(base: u64, r: usize) -> u64 {
    base ^ (r as u64).wrapping_mul(SEED_STRIDE)
}

pub fn rng_from_seed(seed: u64) -> SolverRng {
    SolverRng::seed_from_u64(seed)
}

/// Uniform index in `0..n` from exactly one 64-bit draw (multiply-shift).
pub fn draw_block(rng: &mut impl RngCore, n: usize) -> usize {
    ((u128::from(rng.next_u64()) * n as u128) >> 64) as usize
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub schedule: BregmanSchedule,
    pub max_iters: usize,
    pub tolerance: f64,
    /// Full prox residual is measured every `check_period` iterations.
    pub check_period: usize,
    pub seed: u64,
    /// Store `x^{k+1}` in every record. Final points are always kept.
    pub keep_iterates: bool,
}

impl SolverConfig {
    /// Defaults: residual checked once per `N` steps, iterates kept.
    pub fn new(schedule: BregmanSchedule, num_blocks: usize, max_iters: usize, tolerance: f64, seed: u64) -> Self {
        Self {
            schedule,
            max_iters,
            tolerance,
            check_period: num_blocks.max(1),
            seed,
            keep_iterates: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be at least 1".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Config(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if self.check_period == 0 {
            return Err(Error::Config("check_period must be at least 1".into()));
        }
        Ok(())
    }
}

/// One step: `x^{k+1}` from `x^k` via block `i(k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IterateRecord {
    pub k: usize,
    pub block: usize,
    pub point: Option<Vec<f64>>,
    pub value: f64,
    pub step_norm: f64,
    pub prox_residual: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Tolerance,
    MaxIters,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Tolerance => "tolerance",
            Self::MaxIters => "max_iters",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub seed: u64,
    pub x0: Vec<f64>,
    pub initial_value: f64,
    pub records: Vec<IterateRecord>,
    pub final_point: Vec<f64>,
    pub termination: Termination,
}

impl Trajectory {
    /// `F(x^0), F(x^1), ...`
    pub fn values(&self) -> Vec<f64> {
        std::iter::once(self.initial_value)
            .chain(self.records.iter().map(|r| r.value))
            .collect()
    }

    /// The sampled index sequence `i(0), i(1), ...`.
    pub fn blocks(&self) -> Vec<usize> {
        self.records.iter().map(|r| r.block).collect()
    }

    /// `x^k` for `k = 0..=len`, when iterates were kept.
    pub fn point(&self, k: usize) -> Option<&[f64]> {
        if k == 0 {
            Some(&self.x0)
        } else {
            self.records.get(k - 1)?.point.as_deref()
        }
    }

    pub fn final_value(&self) -> f64 {
        self.records.last().map_or(self.initial_value, |r| r.value)
    }

    /// Largest `|x^k|` along the run.
    pub fn max_norm(&self) -> f64 {
        let mut m = crate::norm(&self.x0).max(crate::norm(&self.final_point));
        for r in &self.records {
            if let Some(p) = &r.point {
                m = m.max(crate::norm(p));
            }
        }
        m
    }

    pub fn last_residual(&self) -> Option<f64> {
        self.records.iter().rev().find_map(|r| r.prox_residual)
    }
}

/// Draws `i(k)` with one RNG draw and applies the coordinate map.
pub fn vbscd_step(
    p: &ProblemInstance,
    sched: &BregmanSchedule,
    k: usize,
    x: &[f64],
    rng: &mut impl RngCore,
) -> Result<(usize, Vec<f64>)> {
    let i = draw_block(rng, p.num_blocks());
    let gen = sched.generator(k);
    let q = ProxQuery::new(p, &gen, sched.step(k), x)?;
    Ok((i, q.coordinate(i)))
}

/// Full-map residual `|x - T_{D^k, eps^k}(x)|`.
pub fn residual_at(p: &ProblemInstance, sched: &BregmanSchedule, k: usize, x: &[f64]) -> Result<f64> {
    let gen = sched.generator(k);
    Ok(ProxQuery::new(p, &gen, sched.step(k), x)?.residual())
}

pub fn run(p: &ProblemInstance, config: &SolverConfig, x0: &[f64]) -> Result<Trajectory> {
    config.validate()?;
    validate_schedule(&config.schedule, p, config.max_iters + 1).into_result()?;
    let initial_value = p.objective(x0)?;
    if !initial_value.is_finite() {
        return Err(Error::NonFiniteObjective { k: 0 });
    }

    let mut rng = rng_from_seed(config.seed);
    let mut x = x0.to_vec();
    let mut records = Vec::new();
    let mut termination = Termination::MaxIters;
    for k in 0..config.max_iters {
        let (block, next) = vbscd_step(p, &config.schedule, k, &x, &mut rng)?;
        let value = p.objective(&next)?;
        if !value.is_finite() {
            return Err(Error::NonFiniteObjective { k: k + 1 });
        }
        let step_norm = crate::dist(&x, &next);
        let prox_residual = if (k + 1) % config.check_period == 0 {
            Some(residual_at(p, &config.schedule, k + 1, &next)?)
        } else {
            None
        };
        x = next;
        records.push(IterateRecord {
            k,
            block,
            point: config.keep_iterates.then(|| x.clone()),
            value,
            step_norm,
            prox_residual,
        });
        if prox_residual.is_some_and(|r| r <= config.tolerance) {
            termination = Termination::Tolerance;
            break;
        }
    }
    Ok(Trajectory {
        seed: config.seed,
        x0: x0.to_vec(),
        initial_value,
        records,
        final_point: x,
        termination,
    })
}
