//! Diagonal quadratic Bregman generators `K(x) = 1/2 sum_j q_j x_j^2` and
//! per-iteration schedules `k -> (K^k, eps^k)`.

use crate::error::{check_dim, Error, Result};
use crate::model::ProblemInstance;

#[derive(Debug, Clone, PartialEq)]
pub struct BregmanGenerator {
    weights: Vec<f64>,
    m: f64,
    big_m: f64,
}

impl BregmanGenerator {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidParameter("generator needs at least one weight".into()));
        }
        if let Some(q) = weights.iter().find(|q| !(**q > 0.0) || !q.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "generator weights must be positive and finite, got {q}"
            )));
        }
        let m = weights.iter().copied().fold(f64::INFINITY, f64::min);
        let big_m = weights.iter().copied().fold(0.0, f64::max);
        Ok(Self { weights, m, big_m })
    }

    /// The Euclidean generator `1/2 |x|^2`.
    pub fn identity(n: usize) -> Self {
        Self::uniform(n, 1.0)
    }

    pub fn uniform(n: usize, q: f64) -> Self {
        Self::new(vec![q; n]).expect("uniform weight must be positive")
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// Strong convexity modulus `m = min_j q_j`.
    pub fn strong_convexity(&self) -> f64 {
        self.m
    }

    /// Gradient Lipschitz constant `M = max_j q_j`.
    pub fn gradient_lipschitz(&self) -> f64 {
        self.big_m
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        0.5 * self.weights.iter().zip(x).map(|(q, t)| q * t * t).sum::<f64>()
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.weights.iter().zip(x).map(|(q, t)| q * t).collect()
    }

    /// `D(x, y) = K(y) - K(x) - <grad K(x), y - x>`.
    pub fn distance(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        check_dim(self.dim(), y.len())?;
        Ok(self.distance_unchecked(x, y))
    }

    pub(crate) fn distance_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        0.5 * self
            .weights
            .iter()
            .zip(x.iter().zip(y))
            .map(|(q, (a, b))| q * (b - a) * (b - a))
            .sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum WeightSchedule {
    /// The same weights at every iteration.
    Constant(Vec<f64>),
    /// Coordinate `j` at iteration `k` gets `lo` when `(k / period + j)` is
    /// even and `hi` otherwise, so the geometry changes every `period` steps
    /// and is anisotropic within each step.
    Alternating { lo: f64, hi: f64, period: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum StepSchedule {
    Constant(f64),
    /// `eps^k = max(lo, hi / (k + 1))`.
    HarmonicClipped { lo: f64, hi: f64 },
}

impl StepSchedule {
    pub fn at(&self, k: usize) -> f64 {
        match *self {
            Self::Constant(e) => e,
            Self::HarmonicClipped { lo, hi } => (hi / (k as f64 + 1.0)).max(lo),
        }
    }

    /// `(eps_lower, eps_upper)` over all iterations.
    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            Self::Constant(e) => (e, e),
            Self::HarmonicClipped { lo, hi } => (lo, hi),
        }
    }
}

/// Uniform bounds `(m, M, eps_lower, eps_upper)` of a schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleBounds {
    pub m: f64,
    pub big_m: f64,
    pub eps_lower: f64,
    pub eps_upper: f64,
}

/// Largest admissible step: `min(m / L, m / rho)` with `m / 0 = inf`.
pub fn step_limit(m: f64, lipschitz: f64, rho: f64) -> f64 {
    let ratio = |d: f64| if d > 0.0 { m / d } else { f64::INFINITY };
    ratio(lipschitz).min(ratio(rho))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BregmanSchedule {
    dim: usize,
    weights: WeightSchedule,
    step: StepSchedule,
}

impl BregmanSchedule {
    pub fn new(dim: usize, weights: WeightSchedule, step: StepSchedule) -> Result<Self> {
        match &weights {
            WeightSchedule::Constant(q) => {
                check_dim(dim, q.len())?;
                BregmanGenerator::new(q.clone())?;
            }
            WeightSchedule::Alternating { lo, hi, period } => {
                if !(*lo > 0.0) || !(hi >= lo) || !hi.is_finite() || *period == 0 {
                    return Err(Error::InvalidParameter(format!(
                        "alternating({lo}, {hi}, {period}) needs 0 < lo <= hi and period >= 1"
                    )));
                }
            }
        }
        let (lo, hi) = step.bounds();
        if !(lo > 0.0) || !(hi >= lo) || !hi.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "step bounds need 0 < eps_lower <= eps_upper, got ({lo}, {hi})"
            )));
        }
        Ok(Self { dim, weights, step })
    }

    /// Identity generator scaled by `q` with a constant step.
    pub fn constant(dim: usize, q: f64, eps: f64) -> Result<Self> {
        Self::new(dim, WeightSchedule::Constant(vec![q; dim]), StepSchedule::Constant(eps))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weight_schedule(&self) -> &WeightSchedule {
        &self.weights
    }

    pub fn step_schedule(&self) -> &StepSchedule {
        &self.step
    }

    pub fn generator(&self, k: usize) -> BregmanGenerator {
        let weights = match &self.weights {
            WeightSchedule::Constant(q) => q.clone(),
            WeightSchedule::Alternating { lo, hi, period } => (0..self.dim)
                .map(|j| if (k / period + j).is_multiple_of(2) { *lo } else { *hi })
                .collect(),
        };
        BregmanGenerator::new(weights).expect("weights validated at construction")
    }

    pub fn step(&self, k: usize) -> f64 {
        self.step.at(k)
    }

    pub fn bounds(&self) -> ScheduleBounds {
        let (m, big_m) = match &self.weights {
            WeightSchedule::Constant(q) => (
                q.iter().copied().fold(f64::INFINITY, f64::min),
                q.iter().copied().fold(0.0, f64::max),
            ),
            WeightSchedule::Alternating { lo, hi, .. } => (*lo, *hi),
        };
        let (eps_lower, eps_upper) = self.step.bounds();
        ScheduleBounds {
            m,
            big_m,
            eps_lower,
            eps_upper,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleViolation {
    pub k: usize,
    pub quantity: String,
    pub value: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleReport {
    pub bounds: ScheduleBounds,
    /// `min(m / L, m / rho_max)` for the paired instance.
    pub step_limit: f64,
    pub horizon: usize,
    pub violation: Option<ScheduleViolation>,
}

impl ScheduleReport {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }

    pub fn into_result(self) -> Result<ScheduleBounds> {
        match self.violation {
            None => Ok(self.bounds),
            Some(v) => Err(Error::InvalidSchedule {
                k: v.k,
                quantity: v.quantity,
                value: v.value,
                bound: v.bound,
            }),
        }
    }
}

/// Checks the weight and step bounds for every `k < horizon` together with
/// `eps_upper < min(m / L, m / rho_max)`. Reports the first violation.
pub fn validate_schedule(
    sched: &BregmanSchedule,
    p: &ProblemInstance,
    horizon: usize,
) -> ScheduleReport {
    let bounds = sched.bounds();
    let limit = step_limit(bounds.m, p.lipschitz(), p.rho_max());
    let mut report = ScheduleReport {
        bounds,
        step_limit: limit,
        horizon,
        violation: None,
    };
    let violation = |k: usize, quantity: &str, value: f64, bound: f64| ScheduleViolation {
        k,
        quantity: quantity.to_string(),
        value,
        bound,
    };
    if sched.dim() != p.dim() {
        report.violation = Some(violation(0, "dimension", sched.dim() as f64, p.dim() as f64));
        return report;
    }
    for k in 0..horizon.max(1) {
        if !(bounds.eps_upper < limit) {
            report.violation = Some(violation(k, "eps_upper", bounds.eps_upper, limit));
            return report;
        }
        let gen = sched.generator(k);
        if gen.strong_convexity() < bounds.m {
            report.violation = Some(violation(k, "min weight", gen.strong_convexity(), bounds.m));
            return report;
        }
        if gen.gradient_lipschitz() > bounds.big_m {
            report.violation = Some(violation(k, "max weight", gen.gradient_lipschitz(), bounds.big_m));
            return report;
        }
        let eps = sched.step(k);
        if eps < bounds.eps_lower {
            report.violation = Some(violation(k, "eps", eps, bounds.eps_lower));
            return report;
        }
        if eps > bounds.eps_upper {
            report.violation = Some(violation(k, "eps", eps, bounds.eps_upper));
            return report;
        }
        // constant schedules have nothing left to check after k = 0
        if matches!(sched.weights, WeightSchedule::Constant(_))
            && matches!(sched.step, StepSchedule::Constant(_))
        {
            break;
        }
    }
    report
}
