//! Experiment definitions: `[section]` headers followed by `key = value`
//! lines. `#` starts a comment. Unknown sections and keys are errors.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::diagnostics::ErrorBoundKind;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// File the config was read from; relative data paths resolve against
    /// its directory.
    pub path: PathBuf,
    pub instance: InstanceSpec,
    pub schedule: ScheduleSpec,
    pub solver: SolverSpec,
    pub experiment: ExperimentSpec,
    pub probe: ProbeSpec,
    pub verify: VerifySpec,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InstanceKind {
    /// `f(x) = 1/2 (x - center)^2` in one dimension.
    Scalar { center: f64 },
    /// Least squares with design `[G; sqrt(ridge) I]`, Gaussian `G`.
    Synthetic {
        n: usize,
        rows: usize,
        ridge: f64,
        noise: f64,
        sparsity: usize,
        data_seed: u64,
    },
    /// Matrix and vector read from whitespace-separated text files.
    Files { matrix: PathBuf, vector: PathBuf, loss: Loss },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Loss {
    LeastSquares,
    Logistic,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BlockSpec {
    Uniform(usize),
    Sizes(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegularizerSpec {
    pub name: String,
    pub lambda: f64,
    pub scad_a: f64,
    pub mcp_gamma: f64,
    pub mu: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceSpec {
    pub name: String,
    pub kind: InstanceKind,
    pub blocks: BlockSpec,
    pub regularizer: RegularizerSpec,
    /// Declared strong convexity; `None` lets the builder decide.
    pub strongly_convex: Option<bool>,
    pub separated_critical_values: Option<bool>,
    pub growth_condition: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightSpec {
    Constant(f64),
    Alternating { lo: f64, hi: f64, period: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSize {
    Absolute(f64),
    /// Fraction of the largest admissible step `min(m/L, m/rho)`.
    Fraction(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepKind {
    Constant,
    HarmonicClipped,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleSpec {
    pub weights: WeightSpec,
    pub step_kind: StepKind,
    pub eps: StepSize,
    /// `eps_lower = lower_ratio * eps_upper` for the harmonic schedule.
    pub lower_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StartSpec {
    Zero,
    Point(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSpec {
    pub max_iters: usize,
    pub tolerance: f64,
    pub check_period: Option<usize>,
    pub keep_iterates: bool,
    pub x0: StartSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceSource {
    /// Known optimum when declared, otherwise best-found.
    Auto,
    Known,
    BestFound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Solve,
    Verify,
    Rate,
    ProbeEb,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Solve => "solve",
            Self::Verify => "verify",
            Self::Rate => "rate",
            Self::ProbeEb => "probe-eb",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub kind: Option<ExperimentKind>,
    pub replications: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub reference: ReferenceSource,
    pub near_start: bool,
    pub near_start_radius: Option<f64>,
    /// Write one trajectory CSV per replication.
    pub write_trajectories: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleSpec {
    Auto,
    Singleton,
    Grid,
    Interval,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSpec {
    pub kinds: Vec<ErrorBoundKind>,
    pub eta: f64,
    pub nu: f64,
    pub samples: usize,
    pub oracle: OracleSpec,
    pub grid_half_width: f64,
    pub grid_cell: f64,
    pub lt_level: Option<f64>,
    pub lt_residual_radius: f64,
    pub lt_sample_radius: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum C0Spec {
    Probe,
    Value(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifySpec {
    pub points: usize,
    pub radius: f64,
    pub prox_samples: usize,
    pub region_points: usize,
    pub c0: C0Spec,
}

struct Entry {
    value: String,
    line: usize,
}

struct Section<'a> {
    name: String,
    line: usize,
    path: &'a Path,
    entries: BTreeMap<String, Entry>,
}

impl<'a> Section<'a> {
    fn empty(name: &str, path: &'a Path) -> Self {
        Self { name: name.to_string(), line: 0, path, entries: BTreeMap::new() }
    }

    fn err(&self, line: usize, msg: impl Into<String>) -> Error {
        Error::Parse { path: self.path.to_path_buf(), line, msg: msg.into() }
    }

    fn raw(&mut self, key: &str) -> Option<Entry> {
        self.entries.remove(key)
    }

    fn get<T: FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some(e) => e.value.parse::<T>().map(Some).map_err(|_| {
                self.err(e.line, format!("[{}] {key}: cannot parse `{}`", self.name, e.value))
            }),
        }
    }

    fn or<T: FromStr>(&mut self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    fn required<T: FromStr>(&mut self, key: &str) -> Result<T> {
        let line = self.line;
        self.get(key)?
            .ok_or_else(|| self.err(line, format!("[{}] missing required key `{key}`", self.name)))
    }

    fn list<T: FromStr>(&mut self, key: &str) -> Result<Option<Vec<T>>> {
        let Some(e) = self.raw(key) else { return Ok(None) };
        e.value
            .split(',')
            .map(|s| s.trim().parse::<T>())
            .collect::<std::result::Result<Vec<T>, _>>()
            .map(Some)
            .map_err(|_| self.err(e.line, format!("[{}] {key}: cannot parse list `{}`", self.name, e.value)))
    }

    /// Parses a keyword with a fixed set of spellings.
    fn choice<T: Copy>(&mut self, key: &str, options: &[(&str, T)], default: Option<T>) -> Result<T> {
        let line = self.line;
        match self.raw(key) {
            None => default.ok_or_else(|| self.err(line, format!("[{}] missing required key `{key}`", self.name))),
            Some(e) => options.iter().find(|(s, _)| *s == e.value).map(|(_, v)| *v).ok_or_else(|| {
                let names: Vec<&str> = options.iter().map(|(s, _)| *s).collect();
                self.err(e.line, format!("[{}] {key}: expected one of {}, got `{}`", self.name, names.join(", "), e.value))
            }),
        }
    }

    fn finish(self) -> Result<()> {
        match self.entries.iter().min_by_key(|(_, e)| e.line) {
            None => Ok(()),
            Some((k, e)) => Err(self.err(e.line, format!("unknown key `{k}` in [{}]", self.name))),
        }
    }
}

const SECTIONS: [&str; 6] = ["instance", "schedule", "solver", "experiment", "probe", "verify"];

fn split_sections<'a>(text: &str, path: &'a Path) -> Result<BTreeMap<String, Section<'a>>> {
    let mut sections: BTreeMap<String, Section<'a>> = BTreeMap::new();
    let mut current: Option<String> = None;
    let err = |line: usize, msg: String| Error::Parse { path: path.to_path_buf(), line, msg };
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| err(line, format!("malformed section header `{content}`")))?
                .trim();
            if !SECTIONS.contains(&name) {
                return Err(err(line, format!("unknown section [{name}]")));
            }
            if sections.contains_key(name) {
                return Err(err(line, format!("duplicate section [{name}]")));
            }
            sections.insert(
                name.to_string(),
                Section { name: name.to_string(), line, path, entries: BTreeMap::new() },
            );
            current = Some(name.to_string());
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| err(line, format!("expected `key = value`, got `{content}`")))?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(err(line, "empty key".into()));
        }
        let section = current
            .as_ref()
            .and_then(|c| sections.get_mut(c))
            .ok_or_else(|| err(line, format!("key `{key}` outside of any section")))?;
        if section.entries.contains_key(key) {
            return Err(err(line, format!("duplicate key `{key}` in [{}]", section.name)));
        }
        section.entries.insert(key.to_string(), Entry { value: value.to_string(), line });
    }
    Ok(sections)
}

fn resolve(base: &Path, s: &Section, raw: Entry) -> Result<PathBuf> {
    let p = PathBuf::from(&raw.value);
    let p = if p.is_absolute() { p } else { base.join(p) };
    if !p.exists() {
        return Err(s.err(raw.line, format!("file not found: {}", p.display())));
    }
    Ok(p)
}

fn parse_instance(mut s: Section, base: &Path) -> Result<InstanceSpec> {
    let line = s.line;
    let name: String = s.or("name", String::new())?;
    let kind_name = s.choice(
        "kind",
        &[("scalar", 0u8), ("synthetic", 1), ("files", 2)],
        None,
    )?;
    let kind = match kind_name {
        0 => InstanceKind::Scalar { center: s.required("center")? },
        1 => {
            let n: usize = s.required("n")?;
            InstanceKind::Synthetic {
                n,
                rows: s.or("rows", n)?,
                ridge: s.or("ridge", 0.0)?,
                noise: s.or("noise", 0.0)?,
                sparsity: s.or("sparsity", n)?,
                data_seed: s.or("data_seed", 0)?,
            }
        }
        _ => {
            let loss = s.choice("loss", &[("least_squares", Loss::LeastSquares), ("logistic", Loss::Logistic)], Some(Loss::LeastSquares))?;
            let matrix = s.raw("matrix").ok_or_else(|| s.err(line, "[instance] missing required key `matrix`"))?;
            let matrix = resolve(base, &s, matrix)?;
            let vector = s.raw("vector").ok_or_else(|| s.err(line, "[instance] missing required key `vector`"))?;
            let vector = resolve(base, &s, vector)?;
            InstanceKind::Files { matrix, vector, loss }
        }
    };
    let blocks = match (s.get::<usize>("blocks")?, s.list::<usize>("block_sizes")?) {
        (Some(_), Some(_)) => return Err(s.err(line, "[instance] give either `blocks` or `block_sizes`, not both")),
        (Some(b), None) => BlockSpec::Uniform(b),
        (None, Some(sizes)) => BlockSpec::Sizes(sizes),
        (None, None) => BlockSpec::Uniform(1),
    };
    let regularizer = RegularizerSpec {
        name: s.or("regularizer", "zero".to_string())?,
        lambda: s.or("lambda", 0.0)?,
        scad_a: s.or("scad_a", crate::model::DEFAULT_SCAD_A)?,
        mcp_gamma: s.or("mcp_gamma", 3.0)?,
        mu: s.or("mu", 0.0)?,
    };
    let spec = InstanceSpec {
        name,
        kind,
        blocks,
        regularizer,
        strongly_convex: s.get("strongly_convex")?,
        separated_critical_values: s.get("separated_critical_values")?,
        growth_condition: s.get("growth_condition")?,
    };
    s.finish()?;
    Ok(spec)
}

fn parse_schedule(mut s: Section) -> Result<ScheduleSpec> {
    let line = s.line;
    let weights = match s.choice("weights", &[("constant", false), ("alternating", true)], Some(false))? {
        false => WeightSpec::Constant(s.or("q", 1.0)?),
        true => WeightSpec::Alternating {
            lo: s.required("q_lo")?,
            hi: s.required("q_hi")?,
            period: s.or("period", 1)?,
        },
    };
    let step_kind = s.choice(
        "step",
        &[("constant", StepKind::Constant), ("harmonic", StepKind::HarmonicClipped)],
        Some(StepKind::Constant),
    )?;
    let eps = match (s.get::<f64>("eps")?, s.get::<f64>("eps_fraction")?) {
        (Some(_), Some(_)) => return Err(s.err(line, "[schedule] give either `eps` or `eps_fraction`, not both")),
        (Some(e), None) => StepSize::Absolute(e),
        (None, Some(f)) => StepSize::Fraction(f),
        (None, None) => StepSize::Fraction(0.8),
    };
    let spec = ScheduleSpec { weights, step_kind, eps, lower_ratio: s.or("eps_lower_ratio", 0.1)? };
    s.finish()?;
    Ok(spec)
}

fn parse_solver(mut s: Section) -> Result<SolverSpec> {
    let x0 = match s.raw("x0") {
        None => StartSpec::Zero,
        Some(e) if e.value == "zero" => StartSpec::Zero,
        Some(e) => {
            let parsed: std::result::Result<Vec<f64>, _> = e.value.split(',').map(|t| t.trim().parse()).collect();
            StartSpec::Point(parsed.map_err(|_| s.err(e.line, format!("[solver] x0: cannot parse `{}`", e.value)))?)
        }
    };
    let spec = SolverSpec {
        max_iters: s.or("max_iters", 1000)?,
        tolerance: s.or("tolerance", 1e-10)?,
        check_period: s.get("check_period")?,
        keep_iterates: s.or("keep_iterates", true)?,
        x0,
    };
    s.finish()?;
    Ok(spec)
}

fn parse_experiment(mut s: Section) -> Result<ExperimentSpec> {
    let kind = match s.raw("kind") {
        None => None,
        Some(e) => Some(match e.value.as_str() {
            "solve" => ExperimentKind::Solve,
            "verify" => ExperimentKind::Verify,
            "rate" => ExperimentKind::Rate,
            "probe-eb" => ExperimentKind::ProbeEb,
            other => return Err(s.err(e.line, format!("[experiment] kind: unknown experiment `{other}`"))),
        }),
    };
    let spec = ExperimentSpec {
        kind,
        replications: s.or("replications", 1)?,
        seed: s.or("seed", 0)?,
        out: s.or("out", PathBuf::from("out"))?,
        reference: s.choice(
            "reference",
            &[("auto", ReferenceSource::Auto), ("known", ReferenceSource::Known), ("best_found", ReferenceSource::BestFound)],
            Some(ReferenceSource::Auto),
        )?,
        near_start: s.or("near_start", false)?,
        near_start_radius: s.get("near_start_radius")?,
        write_trajectories: s.or("write_trajectories", true)?,
    };
    if spec.replications == 0 {
        return Err(s.err(s.line, "[experiment] replications must be at least 1"));
    }
    s.finish()?;
    Ok(spec)
}

fn parse_probe(mut s: Section) -> Result<ProbeSpec> {
    let kinds = match s.raw("kinds") {
        None => vec![ErrorBoundKind::LevelSet, ErrorBoundKind::Kl],
        Some(e) => e
            .value
            .split(',')
            .map(|k| {
                ErrorBoundKind::parse(k.trim())
                    .ok_or_else(|| s.err(e.line, format!("[probe] kinds: unknown kind `{}`", k.trim())))
            })
            .collect::<Result<Vec<_>>>()?,
    };
    let spec = ProbeSpec {
        kinds,
        eta: s.or("eta", 1.0)?,
        nu: s.or("nu", 1.0)?,
        samples: s.or("samples", 10_000)?,
        oracle: s.choice(
            "oracle",
            &[
                ("auto", OracleSpec::Auto),
                ("known-singleton", OracleSpec::Singleton),
                ("grid", OracleSpec::Grid),
                ("projection-1d", OracleSpec::Interval),
            ],
            Some(OracleSpec::Auto),
        )?,
        grid_half_width: s.or("grid_half_width", 1.0)?,
        grid_cell: s.or("grid_cell", crate::diagnostics::GRID_CELL)?,
        lt_level: s.get("lt_level")?,
        lt_residual_radius: s.or("lt_residual_radius", 1.0)?,
        lt_sample_radius: s.get("lt_sample_radius")?,
    };
    s.finish()?;
    Ok(spec)
}

fn parse_verify(mut s: Section) -> Result<VerifySpec> {
    let c0 = match s.raw("c0") {
        None => C0Spec::Probe,
        Some(e) if e.value == "probe" => C0Spec::Probe,
        Some(e) => C0Spec::Value(
            e.value
                .parse()
                .map_err(|_| s.err(e.line, format!("[verify] c0: expected `probe` or a number, got `{}`", e.value)))?,
        ),
    };
    let spec = VerifySpec {
        points: s.or("points", 1000)?,
        radius: s.or("radius", 2.0)?,
        prox_samples: s.or("prox_samples", 1000)?,
        region_points: s.or("region_points", 200)?,
        c0,
    };
    s.finish()?;
    Ok(spec)
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let mut sections = split_sections(text, path)?;
        let mut take = |name: &str| sections.remove(name).unwrap_or_else(|| Section::empty(name, path));
        let instance = take("instance");
        if instance.line == 0 {
            return Err(Error::Parse { path: path.to_path_buf(), line: 0, msg: "missing [instance] section".into() });
        }
        let instance = parse_instance(instance, &base)?;
        let schedule = parse_schedule(take("schedule"))?;
        let solver = parse_solver(take("solver"))?;
        let experiment = parse_experiment(take("experiment"))?;
        let probe = parse_probe(take("probe"))?;
        let verify = parse_verify(take("verify"))?;
        Ok(Self { path: path.to_path_buf(), instance, schedule, solver, experiment, probe, verify })
    }
}
