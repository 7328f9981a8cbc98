//! Numeric certification of identities, inequalities, error-bound constants
//! and convergence rates. Index expectations are always exact averages over
//! the `N` blocks, never Monte-Carlo estimates.

mod constants;
mod expectation;
mod probes;
mod prox_oracle;
mod proximity;
mod rate;
mod sublevel;

pub use constants::{compute_constants, ConstantsInputs, ConstantsRecord};
pub use expectation::{
    decrease_constant, enumerate_expectation, envelope_checks, expectation_identities,
    expected_coordinate_prox, sufficient_decrease_check, CoordinateSweep,
};
pub use probes::{
    probe_bp_eb, probe_kl, probe_ls_eb, probe_lt_eb, sample_in_ball, ErrorBoundEstimate,
    ErrorBoundKind, LtRegion, Neighborhood, ProbeRegion, DENOMINATOR_CUTOFF, MAX_DRAWS,
};
pub use prox_oracle::{grid_prox, prox_objective, prox_oracle_checks, PROX_ARGMIN_TOL, PROX_VALUE_TOL};
pub use proximity::{check_property_a, check_value_proximity, StepBoundReport, PropertyAReport, ProximityReport};
pub use rate::{
    check_r_linear, fit_linear_rate, gap_floor, rate_report, select_fit_window, LinearFit,
    RLinearReport, RateReport, MIN_FIT_LEN,
};
pub use sublevel::{sublevel_distance, CriticalSet, SublevelOracle, GRID_CELL};

/// Absolute tolerance for the exact expectation identities.
pub const IDENTITY_TOL: f64 = 1e-12;
/// Slack allowed on the decrease and envelope inequalities.
pub const INEQUALITY_SLACK: f64 = 1e-9;
/// Factor applied to probed constants before they are consumed.
pub const PROBE_INFLATION: f64 = 1.1;

/// One certified inequality `lhs <= rhs` (or identity error `|err| <= tol`).
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub check: String,
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`; negative slack beyond the tolerance fails.
    pub slack: f64,
    pub pass: bool,
}

impl CheckRow {
    pub fn new(check: &str, name: &str, lhs: f64, rhs: f64, tol: f64) -> Self {
        let slack = rhs - lhs;
        Self {
            check: check.to_string(),
            name: name.to_string(),
            lhs,
            rhs,
            slack,
            pass: lhs <= rhs + tol,
        }
    }

    /// Keeps whichever of two rows for the same check has the smaller slack.
    pub fn worst(self, other: Self) -> Self {
        if !other.pass && self.pass {
            return other;
        }
        if !self.pass && other.pass {
            return self;
        }
        if other.slack < self.slack {
            other
        } else {
            self
        }
    }
}
