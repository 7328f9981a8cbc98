//! Monte-Carlo estimates of error-bound constants. Each constant is an
//! extremum of a ratio over finitely many samples, so it under-estimates
//! the true supremum (over-estimates the infimum).

use rand::Rng;
use rand_distr::StandardNormal;

use super::sublevel::{CriticalSet, SublevelOracle};
use crate::bregman::BregmanGenerator;
use crate::error::{Error, Result};
use crate::model::ProblemInstance;
use crate::prox::ProxQuery;

/// Ratios whose denominator falls below this are skipped.
pub const DENOMINATOR_CUTOFF: f64 = 1e-12;
/// Draw budget before a region is declared empty.
pub const MAX_DRAWS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorBoundKind {
    /// Level-set subdifferential: `dist(x, [F <= F_bar]) <= c0 dist(0, dF(x))`.
    LevelSet,
    /// Kurdyka-Lojasiewicz with exponent 1/2: `dist(0, dF(x)) >= c2 (F(x) - F_bar)^(1/2)`.
    Kl,
    /// Bregman proximal: `dist(x, crit) <= c1 |x - T(x)|`.
    BregmanProximal,
    /// Luo-Tseng: as above with the Euclidean proximal map.
    LuoTseng,
}

impl ErrorBoundKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::LevelSet => "ls-eb",
            Self::Kl => "kl",
            Self::BregmanProximal => "bp-eb",
            Self::LuoTseng => "lt-eb",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "ls-eb" => Some(Self::LevelSet),
            "kl" => Some(Self::Kl),
            "bp-eb" => Some(Self::BregmanProximal),
            "lt-eb" => Some(Self::LuoTseng),
            _ => None,
        }
    }
}

/// `B(center; eta) intersected with {F_bar < F < F_bar + nu}`, `F_bar = F(center)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Neighborhood {
    pub center: Vec<f64>,
    pub f_bar: f64,
    pub eta: f64,
    pub nu: f64,
}

impl Neighborhood {
    pub fn new(p: &ProblemInstance, center: Vec<f64>, eta: f64, nu: f64) -> Result<Self> {
        let f_bar = p.objective(&center)?;
        Self::with_level(center, f_bar, eta, nu)
    }

    /// Same region but with an explicitly supplied reference value.
    pub fn with_level(center: Vec<f64>, f_bar: f64, eta: f64, nu: f64) -> Result<Self> {
        if !(eta > 0.0 && nu > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "neighborhood needs eta > 0 and nu > 0, got eta = {eta}, nu = {nu}"
            )));
        }
        Ok(Self { center, f_bar, eta, nu })
    }

    /// Membership in the region with radius `eta * radius_scale` and values
    /// in `(F_bar, F_bar + value_window)`.
    pub fn contains_scaled(&self, x: &[f64], fx: f64, radius_scale: f64, value_window: f64) -> bool {
        crate::dist(x, &self.center) <= self.eta * radius_scale
            && fx > self.f_bar
            && fx < self.f_bar + value_window
    }

    pub fn contains(&self, x: &[f64], fx: f64) -> bool {
        self.contains_scaled(x, fx, 1.0, self.nu)
    }
}

/// Sampling region for the Luo-Tseng probe.
#[derive(Debug, Clone, PartialEq)]
pub struct LtRegion {
    pub center: Vec<f64>,
    pub sample_radius: f64,
    /// Only points with `F(x) <= level` count.
    pub level: f64,
    /// Only points with Euclidean residual at most this count.
    pub residual_radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProbeRegion {
    Neighborhood(Neighborhood),
    LevelResidual(LtRegion),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorBoundEstimate {
    pub kind: ErrorBoundKind,
    pub constant: f64,
    pub region: ProbeRegion,
    /// Points accepted into the region.
    pub samples: usize,
    /// Accepted points whose ratio was defined.
    pub used: usize,
    pub draws: usize,
    pub extremal_point: Vec<f64>,
    pub oracle: String,
}

/// Uniform sample from the Euclidean ball `B(center; radius)`.
pub fn sample_in_ball<R: Rng + ?Sized>(rng: &mut R, center: &[f64], radius: f64) -> Vec<f64> {
    let n = center.len();
    let mut dir: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let len = crate::norm(&dir);
    let r = radius * rng.random::<f64>().powf(1.0 / n as f64);
    for (d, c) in dir.iter_mut().zip(center) {
        *d = c + *d / len * r;
    }
    dir
}

struct Extremum {
    value: f64,
    point: Vec<f64>,
    samples: usize,
    used: usize,
    draws: usize,
}

/// Draws until `samples` points land in the region (or the budget runs out)
/// and keeps the extremal defined ratio.
fn extremal_ratio<R: Rng + ?Sized>(
    rng: &mut R,
    center: &[f64],
    radius: f64,
    samples: usize,
    maximize: bool,
    mut ratio: impl FnMut(&[f64]) -> Result<Option<Option<f64>>>,
) -> Result<Extremum> {
    let mut best = Extremum {
        value: if maximize { f64::NEG_INFINITY } else { f64::INFINITY },
        point: Vec::new(),
        samples: 0,
        used: 0,
        draws: 0,
    };
    while best.samples < samples && best.draws < MAX_DRAWS {
        let x = sample_in_ball(rng, center, radius);
        best.draws += 1;
        // None: outside the region; Some(None): inside, ratio undefined.
        let Some(r) = ratio(&x)? else { continue };
        best.samples += 1;
        let Some(r) = r else { continue };
        best.used += 1;
        if (maximize && r > best.value) || (!maximize && r < best.value) {
            best.value = r;
            best.point = x;
        }
    }
    if best.used == 0 {
        return Err(Error::EmptyNeighborhood { draws: best.draws });
    }
    Ok(best)
}

fn defined(num: f64, den: f64) -> Option<f64> {
    (den >= DENOMINATOR_CUTOFF).then(|| num / den)
}

fn estimate(
    kind: ErrorBoundKind,
    e: Extremum,
    region: ProbeRegion,
    oracle: &str,
) -> ErrorBoundEstimate {
    ErrorBoundEstimate {
        kind,
        constant: e.value,
        region,
        samples: e.samples,
        used: e.used,
        draws: e.draws,
        extremal_point: e.point,
        oracle: oracle.to_string(),
    }
}

/// `c0 = max dist(x, [F <= F_bar]) / dist(0, dF(x))` over the neighborhood.
pub fn probe_ls_eb<R: Rng + ?Sized>(
    p: &ProblemInstance,
    nbhd: &Neighborhood,
    oracle: &SublevelOracle,
    samples: usize,
    rng: &mut R,
) -> Result<ErrorBoundEstimate> {
    p.check_point(&nbhd.center)?;
    if oracle.f_bar() != nbhd.f_bar {
        return Err(Error::UnsupportedInstance(format!(
            "oracle level {} differs from neighborhood level {}",
            oracle.f_bar(),
            nbhd.f_bar
        )));
    }
    let e = extremal_ratio(rng, &nbhd.center, nbhd.eta, samples, true, |x| {
        let fx = p.objective(x)?;
        if !nbhd.contains(x, fx) {
            return Ok(None);
        }
        let den = p.min_norm_subgradient_dist(x)?;
        Ok(Some(defined(oracle.distance(p, x)?, den)))
    })?;
    Ok(estimate(ErrorBoundKind::LevelSet, e, ProbeRegion::Neighborhood(nbhd.clone()), oracle.name()))
}

/// `c2 = min dist(0, dF(x)) / (F(x) - F_bar)^(1/2)` over the neighborhood.
pub fn probe_kl<R: Rng + ?Sized>(
    p: &ProblemInstance,
    nbhd: &Neighborhood,
    samples: usize,
    rng: &mut R,
) -> Result<ErrorBoundEstimate> {
    p.check_point(&nbhd.center)?;
    let e = extremal_ratio(rng, &nbhd.center, nbhd.eta, samples, false, |x| {
        let fx = p.objective(x)?;
        if !nbhd.contains(x, fx) {
            return Ok(None);
        }
        let den = (fx - nbhd.f_bar).sqrt();
        Ok(Some(defined(p.min_norm_subgradient_dist(x)?, den)))
    })?;
    Ok(estimate(ErrorBoundKind::Kl, e, ProbeRegion::Neighborhood(nbhd.clone()), "none"))
}

/// `c1 = max dist(x, crit) / |x - T(x)|` over the neighborhood.
pub fn probe_bp_eb<R: Rng + ?Sized>(
    p: &ProblemInstance,
    gen: &BregmanGenerator,
    eps: f64,
    nbhd: &Neighborhood,
    critical: &CriticalSet,
    samples: usize,
    rng: &mut R,
) -> Result<ErrorBoundEstimate> {
    p.check_point(&nbhd.center)?;
    let e = extremal_ratio(rng, &nbhd.center, nbhd.eta, samples, true, |x| {
        let fx = p.objective(x)?;
        if !nbhd.contains(x, fx) {
            return Ok(None);
        }
        let den = ProxQuery::new(p, gen, eps, x)?.residual();
        Ok(Some(defined(critical.distance(x), den)))
    })?;
    Ok(estimate(
        ErrorBoundKind::BregmanProximal,
        e,
        ProbeRegion::Neighborhood(nbhd.clone()),
        "critical-set",
    ))
}

/// `c3 = max dist(x, crit) / |x - prox(x - eps grad f(x))|` over points of
/// the sampling ball with `F(x) <= level` and small Euclidean residual.
pub fn probe_lt_eb<R: Rng + ?Sized>(
    p: &ProblemInstance,
    eps: f64,
    region: &LtRegion,
    critical: &CriticalSet,
    samples: usize,
    rng: &mut R,
) -> Result<ErrorBoundEstimate> {
    p.check_point(&region.center)?;
    if !(region.sample_radius > 0.0 && region.residual_radius > 0.0) {
        return Err(Error::InvalidParameter("sampling and residual radii must be positive".into()));
    }
    let euclid = BregmanGenerator::identity(p.dim());
    let e = extremal_ratio(rng, &region.center, region.sample_radius, samples, true, |x| {
        if p.objective(x)? > region.level {
            return Ok(None);
        }
        let res = ProxQuery::new(p, &euclid, eps, x)?.residual();
        if res > region.residual_radius {
            return Ok(None);
        }
        Ok(Some(defined(critical.distance(x), res)))
    })?;
    Ok(estimate(
        ErrorBoundKind::LuoTseng,
        e,
        ProbeRegion::LevelResidual(region.clone()),
        "critical-set",
    ))
}
