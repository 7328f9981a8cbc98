//! The four experiment kinds driven by a config: a single solve, the
//! invariant suite, replicated rate estimation and error-bound probing.

use std::path::PathBuf;

use rand::Rng;

use super::config::{C0Spec, ExperimentConfig, OracleSpec, ReferenceSource, StartSpec};
use super::instances::{build_instance, build_schedule};
use super::output;
use super::replicate::{resolve_reference_value, run_replications, Reference, ReplicationSet};
use crate::bregman::BregmanSchedule;
use crate::diagnostics::{
    check_property_a, check_r_linear, check_value_proximity, compute_constants, envelope_checks,
    expectation_identities, probe_bp_eb, probe_kl, probe_ls_eb, probe_lt_eb, prox_oracle_checks,
    rate_report, sample_in_ball, sufficient_decrease_check, CheckRow, ConstantsInputs, ConstantsRecord,
    CoordinateSweep, CriticalSet, ErrorBoundEstimate, ErrorBoundKind, LtRegion, Neighborhood, RLinearReport,
    RateReport, SublevelOracle, INEQUALITY_SLACK, MAX_DRAWS, PROBE_INFLATION,
};
use crate::error::{Error, Result};
use crate::model::{ProblemInstance, Regularizer};
use crate::solver::{replication_seed, rng_from_seed, run, SolverConfig, Termination, Trajectory};

/// Number of halvings used when sampling points close to the reference.
const REGION_SCALES: u32 = 12;

/// A config with its instance and schedule built.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub problem: ProblemInstance,
    pub schedule: BregmanSchedule,
    reference: Option<Reference>,
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        let problem = build_instance(&config.instance)?;
        let schedule = build_schedule(&config.schedule, &problem)?;
        Ok(Self { config, problem, schedule, reference: None })
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::new(ExperimentConfig::load(path)?)
    }

    pub fn out_dir(&self) -> &PathBuf {
        &self.config.experiment.out
    }

    pub fn x0(&self) -> Result<Vec<f64>> {
        match &self.config.solver.x0 {
            StartSpec::Zero => Ok(vec![0.0; self.problem.dim()]),
            StartSpec::Point(x) => {
                self.problem.check_point(x)?;
                Ok(x.clone())
            }
        }
    }

    pub fn solver_config(&self) -> SolverConfig {
        let s = &self.config.solver;
        let mut c = SolverConfig::new(
            self.schedule.clone(),
            self.problem.num_blocks(),
            s.max_iters,
            s.tolerance,
            self.config.experiment.seed,
        );
        if let Some(p) = s.check_period {
            c.check_period = p;
        }
        c.keep_iterates = s.keep_iterates || self.config.experiment.near_start;
        c
    }

    /// Resolves `F_bar` once. A best-found point of a strongly convex
    /// instance is its unique minimizer, so it is attached as the known
    /// optimum when it passes the criticality check.
    pub fn reference(&mut self) -> Result<Reference> {
        if let Some(r) = &self.reference {
            return Ok(r.clone());
        }
        let r = resolve_reference_value(&self.problem, &self.schedule, &self.x0()?, self.config.experiment.reference)?;
        if r.best_found && self.problem.info().strongly_convex && self.problem.known_optimum().is_none() {
            if let Ok(p) = self.problem.clone().with_known_optimum(r.point.clone(), r.value) {
                self.problem = p;
            }
        }
        self.reference = Some(r.clone());
        Ok(r)
    }

    /// Reference only when it is free: a declared optimum, or an explicit
    /// request for the best-found value.
    fn cheap_reference(&mut self) -> Result<Option<Reference>> {
        match (self.config.experiment.reference, self.problem.known_optimum()) {
            (ReferenceSource::BestFound, _) | (_, Some(_)) => self.reference().map(Some),
            _ => Ok(None),
        }
    }

    pub fn sublevel_oracle(&self, reference: &Reference) -> Result<SublevelOracle> {
        let p = &self.problem;
        let probe = &self.config.probe;
        let grid = || SublevelOracle::grid(p, reference.value, &reference.point, probe.grid_half_width, probe.grid_cell);
        let interval = || SublevelOracle::interval_1d(p, reference.value, reference.point[0]);
        match probe.oracle {
            OracleSpec::Singleton => SublevelOracle::known_singleton(p, reference.value),
            OracleSpec::Grid => grid(),
            OracleSpec::Interval => interval(),
            OracleSpec::Auto => {
                if let Ok(o) = SublevelOracle::known_singleton(p, reference.value) {
                    Ok(o)
                } else if p.dim() == 1 {
                    interval()
                } else if p.dim() == 2 {
                    grid()
                } else {
                    Err(Error::UnsupportedInstance(format!(
                        "no sublevel oracle for n = {} without a strongly convex known optimum",
                        p.dim()
                    )))
                }
            }
        }
    }

    pub fn neighborhood(&self, reference: &Reference) -> Result<Neighborhood> {
        Neighborhood::with_level(reference.point.clone(), reference.value, self.config.probe.eta, self.config.probe.nu)
    }

    /// Constants for the schedule bounds with the given `c0`.
    pub fn constants(&self, c0: f64) -> Result<ConstantsRecord> {
        let b = self.schedule.bounds();
        compute_constants(ConstantsInputs {
            m: b.m,
            big_m: b.big_m,
            lipschitz: self.problem.lipschitz(),
            eps_lower: b.eps_lower,
            eps_upper: b.eps_upper,
            num_blocks: self.problem.num_blocks(),
            c0,
            eta: self.config.probe.eta,
            nu: self.config.probe.nu,
        })
    }

    /// `c0` from the config, or probed and inflated.
    pub fn c0(&mut self) -> Result<f64> {
        match self.config.verify.c0 {
            C0Spec::Value(c) => Ok(c),
            C0Spec::Probe => {
                let r = self.reference()?;
                let oracle = self.sublevel_oracle(&r)?;
                let nbhd = self.neighborhood(&r)?;
                let mut rng = rng_from_seed(replication_seed(self.config.experiment.seed, 1));
                let e = probe_ls_eb(&self.problem, &nbhd, &oracle, self.config.probe.samples, &mut rng)?;
                Ok(e.constant * PROBE_INFLATION)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub trajectory: Trajectory,
    pub f_bar: Option<f64>,
    pub path: PathBuf,
}

pub fn run_solve(exp: &mut Experiment) -> Result<SolveOutcome> {
    let reference = exp.cheap_reference()?;
    let f_bar = reference.map(|r| r.value);
    let trajectory = run(&exp.problem, &exp.solver_config(), &exp.x0()?)?;
    let path = exp.out_dir().join("trajectory.csv");
    output::write_trajectory(&path, &trajectory, f_bar)?;
    Ok(SolveOutcome { trajectory, f_bar, path })
}

/// How many near-start trajectories stayed within `eta / 2` of the reference.
#[derive(Debug, Clone, PartialEq)]
pub struct NearStartSummary {
    pub radius: f64,
    pub bound: f64,
    pub stayed: usize,
    pub replications: usize,
}

#[derive(Debug, Clone)]
pub struct RateOutcome {
    pub set: ReplicationSet,
    pub reference: Reference,
    pub report: RateReport,
    pub r_linear: Option<RLinearReport>,
    pub near_start: Option<NearStartSummary>,
    pub tolerance_terminations: usize,
}

pub fn run_rate(exp: &mut Experiment) -> Result<RateOutcome> {
    let reference = exp.reference()?;
    let base = exp.solver_config();
    let seed = exp.config.experiment.seed;
    let reps = exp.config.experiment.replications;
    let x0 = exp.x0()?;
    let near = exp.config.experiment.near_start;
    let radius = exp.config.experiment.near_start_radius.unwrap_or(exp.config.probe.eta / 4.0);
    let center = reference.point.clone();
    let start = move |r: usize| -> Vec<f64> {
        if near {
            let mut rng = rng_from_seed(replication_seed(replication_seed(seed, r), 1));
            sample_in_ball(&mut rng, &center, radius)
        } else {
            x0.clone()
        }
    };
    let set = run_replications(&exp.problem, &base, &start, reps, reference.value)?;

    // A theoretical contraction factor needs c0; skipped when no oracle fits.
    let beta = exp.c0().and_then(|c0| exp.constants(c0)).ok().map(|c| c.beta);
    let report = rate_report(set.mean.mean_gap.clone(), reference.value, beta, reference.best_found)?;
    let r_linear = match &set.mean.mean_points {
        Some(points) => check_r_linear(points, &set.mean.mean_final, report.window.clone(), report.factor()).ok(),
        None => None,
    };
    let near_start = near.then(|| {
        let bound = exp.config.probe.eta / 2.0;
        let stayed = set
            .trajectories
            .iter()
            .filter(|t| {
                (0..=t.records.len()).all(|k| t.point(k).is_some_and(|x| crate::dist(x, &reference.point) <= bound))
            })
            .count();
        NearStartSummary { radius, bound, stayed, replications: reps }
    });
    let tolerance_terminations = set.trajectories.iter().filter(|t| t.termination == Termination::Tolerance).count();

    let out = exp.out_dir().clone();
    if exp.config.experiment.write_trajectories {
        for (r, t) in set.trajectories.iter().enumerate() {
            output::write_trajectory(&out.join("trajectories").join(format!("rep_{r:04}.csv")), t, Some(reference.value))?;
        }
    }
    output::write_mean(&out.join("mean.csv"), &set.mean)?;
    let outcome = RateOutcome { set, reference, report, r_linear, near_start, tolerance_terminations };
    output::write_key_values(&out.join("rate_report.csv"), &rate_rows(exp, &outcome))?;
    Ok(outcome)
}

fn rate_rows(exp: &Experiment, o: &RateOutcome) -> Vec<(String, String)> {
    let num = output::num;
    let r = &o.report;
    let mut rows = vec![
        ("instance", exp.problem.info().name.clone()),
        ("label", r.label().to_string()),
        ("reference_value", num(o.reference.value)),
        ("best_found", o.reference.best_found.to_string()),
        ("replications", o.set.mean.replications.to_string()),
        ("seed", exp.config.experiment.seed.to_string()),
        ("length", o.set.mean.len().to_string()),
        ("tolerance_terminations", o.tolerance_terminations.to_string()),
        ("window_start", r.window.start.to_string()),
        ("window_end", r.window.end.to_string()),
        ("factor", num(r.factor())),
        ("r_squared", num(r.r_squared())),
        ("contracting", r.contracting().to_string()),
        ("theoretical_beta", r.theoretical_beta.map(num).unwrap_or_default()),
    ];
    if let Some(l) = &o.r_linear {
        rows.push(("r_linear_factor", num(l.fit.factor)));
        rows.push(("r_linear_bound", num(l.bound)));
        rows.push(("r_linear_pass", l.pass.to_string()));
    }
    if let Some(n) = &o.near_start {
        rows.push(("near_start_radius", num(n.radius)));
        rows.push(("near_start_bound", num(n.bound)));
        rows.push(("near_start_stayed", n.stayed.to_string()));
    }
    rows.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

/// Worst row of one check over all points it was evaluated at.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckSummary {
    pub worst: CheckRow,
    pub evaluated: usize,
    pub failed: usize,
}

#[derive(Debug, Default, Clone)]
pub struct Tally {
    pub summaries: Vec<CheckSummary>,
}

impl Tally {
    pub fn add(&mut self, row: CheckRow) {
        let failed = usize::from(!row.pass);
        match self.summaries.iter_mut().find(|s| s.worst.check == row.check && s.worst.name == row.name) {
            Some(s) => {
                s.evaluated += 1;
                s.failed += failed;
                s.worst = s.worst.clone().worst(row);
            }
            None => self.summaries.push(CheckSummary { worst: row, evaluated: 1, failed }),
        }
    }

    pub fn extend(&mut self, rows: impl IntoIterator<Item = CheckRow>) {
        for r in rows {
            self.add(r);
        }
    }

    pub fn evaluated(&self) -> usize {
        self.summaries.iter().map(|s| s.evaluated).sum()
    }

    pub fn failed(&self) -> usize {
        self.summaries.iter().map(|s| s.failed).sum()
    }

    pub fn all_pass(&self) -> bool {
        self.failed() == 0
    }

    pub fn rows(&self) -> Vec<CheckRow> {
        self.summaries.iter().map(|s| s.worst.clone()).collect()
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOutcome {
    pub tally: Tally,
    /// Sections that could not run, with the reason.
    pub skipped: Vec<String>,
    pub path: PathBuf,
}

/// Points of `B(x_bar; eta/2)` with `F_bar < F < F_bar + window`, drawn at
/// geometrically shrinking radii so that thin value windows are reachable.
pub fn sample_region_points<R: Rng + ?Sized>(
    p: &ProblemInstance,
    nbhd: &Neighborhood,
    window: f64,
    count: usize,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    let mut points = Vec::with_capacity(count);
    let mut draws = 0;
    while points.len() < count && draws < MAX_DRAWS {
        draws += 1;
        let scale = 0.5f64.powi(rng.random_range(0..REGION_SCALES) as i32);
        let x = sample_in_ball(rng, &nbhd.center, 0.5 * nbhd.eta * scale);
        let fx = p.objective(&x)?;
        if nbhd.contains_scaled(&x, fx, 0.5, window) {
            points.push(x);
        }
    }
    if points.is_empty() {
        return Err(Error::EmptyNeighborhood { draws });
    }
    Ok(points)
}

/// Identities and inequalities at one point, with the schedule at `k`.
pub fn point_checks(p: &ProblemInstance, schedule: &BregmanSchedule, k: usize, x: &[f64]) -> Result<Vec<CheckRow>> {
    let bounds = schedule.bounds();
    let a = crate::diagnostics::decrease_constant(&bounds, p.lipschitz());
    let sweep = CoordinateSweep::new(p, &schedule.generator(k), schedule.step(k), x)?;
    let mut rows = expectation_identities(p, &sweep);
    let mut decrease = sufficient_decrease_check(&sweep, a, INEQUALITY_SLACK);
    decrease.name = "every-block".into();
    rows.push(decrease);
    rows.extend(envelope_checks(&sweep, &bounds, p.lipschitz(), INEQUALITY_SLACK));
    Ok(rows)
}

fn distinct_regularizers(p: &ProblemInstance) -> Vec<Regularizer> {
    let mut regs: Vec<Regularizer> = Vec::new();
    for r in p.regularizers() {
        if !regs.contains(r) {
            regs.push(*r);
        }
    }
    regs
}

fn region_checks(exp: &mut Experiment, tally: &mut Tally) -> Result<()> {
    let reference = exp.reference()?;
    let oracle = exp.sublevel_oracle(&reference)?;
    let c0 = exp.c0()?;
    let constants = exp.constants(c0)?;
    let nbhd = exp.neighborhood(&reference)?;
    let p = &exp.problem;
    let gen = exp.schedule.generator(0);
    let eps = exp.schedule.step(0);
    let mut rng = rng_from_seed(replication_seed(exp.config.experiment.seed, 2));
    let points = sample_region_points(p, &nbhd, constants.value_window(), exp.config.verify.region_points, &mut rng)?;
    for x in &points {
        let prox = check_value_proximity(p, &gen, eps, x, &nbhd, &constants, &oracle)?;
        tally.extend(prox.rows);
        let a = check_property_a(p, &gen, eps, x, reference.value, Some((&nbhd, &constants)))?;
        tally.add(CheckRow::new("property-a", "coordinate-values-above-level", reference.value, a.min_value, 0.0));
        if let Some(l) = a.step_bounds {
            tally.add(CheckRow::new("property-a", "step-within-half-radius", l.max_step, l.step_bound, 0.0));
            let outside = if l.images_in_region { 0.0 } else { 1.0 };
            tally.add(CheckRow::new("property-a", "images-in-region", outside, 0.0, 0.0));
        }
    }
    Ok(())
}

pub fn run_verify(exp: &mut Experiment) -> Result<VerifyOutcome> {
    let mut tally = Tally::default();
    let mut skipped = Vec::new();
    let seed = exp.config.experiment.seed;
    let reference = exp.reference()?;

    let mut rng = rng_from_seed(seed);
    for k in 0..exp.config.verify.points {
        let x = sample_in_ball(&mut rng, &reference.point, exp.config.verify.radius);
        tally.extend(point_checks(&exp.problem, &exp.schedule, k, &x)?);
    }

    let mut rng = rng_from_seed(replication_seed(seed, 3));
    for reg in distinct_regularizers(&exp.problem) {
        tally.extend(prox_oracle_checks(&reg, exp.config.verify.prox_samples, &mut rng)?);
    }

    if let Err(e) = region_checks(exp, &mut tally) {
        match e {
            Error::UnsupportedInstance(_) | Error::EmptyNeighborhood { .. } => {
                skipped.push(format!("value proximity and property A: {e}"))
            }
            other => return Err(other),
        }
    }

    let path = exp.out_dir().join("verify_report.csv");
    output::write_checks(&path, &tally.rows())?;
    Ok(VerifyOutcome { tally, skipped, path })
}

#[derive(Debug, Clone)]
pub struct ProbeOutcome {
    pub estimates: Vec<ErrorBoundEstimate>,
    pub path: PathBuf,
}

pub fn run_probe(exp: &mut Experiment) -> Result<ProbeOutcome> {
    let reference = exp.reference()?;
    let nbhd = exp.neighborhood(&reference)?;
    let probe = exp.config.probe.clone();
    let seed = exp.config.experiment.seed;
    let mut estimates = Vec::new();
    for (idx, kind) in probe.kinds.iter().enumerate() {
        let mut rng = rng_from_seed(replication_seed(seed, idx));
        let p = &exp.problem;
        let e = match kind {
            ErrorBoundKind::LevelSet => {
                let oracle = exp.sublevel_oracle(&reference)?;
                probe_ls_eb(p, &nbhd, &oracle, probe.samples, &mut rng)?
            }
            ErrorBoundKind::Kl => probe_kl(p, &nbhd, probe.samples, &mut rng)?,
            ErrorBoundKind::BregmanProximal => {
                let crit = CriticalSet::from_instance(p)?;
                let gen = exp.schedule.generator(0);
                probe_bp_eb(p, &gen, exp.schedule.step(0), &nbhd, &crit, probe.samples, &mut rng)?
            }
            ErrorBoundKind::LuoTseng => {
                let crit = CriticalSet::from_instance(p)?;
                let region = LtRegion {
                    center: reference.point.clone(),
                    sample_radius: probe.lt_sample_radius.unwrap_or(probe.eta),
                    level: probe.lt_level.unwrap_or(reference.value + probe.nu),
                    residual_radius: probe.lt_residual_radius,
                };
                probe_lt_eb(p, exp.schedule.step(0), &region, &crit, probe.samples, &mut rng)?
            }
        };
        estimates.push(e);
    }
    let path = exp.out_dir().join("probe_eb.csv");
    output::write_probe(&path, &estimates)?;
    Ok(ProbeOutcome { estimates, path })
}
