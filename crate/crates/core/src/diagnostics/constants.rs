use crate::error::{Error, Result};

/// Quantities the derived constants are computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantsInputs {
    pub m: f64,
    pub big_m: f64,
    pub lipschitz: f64,
    pub eps_lower: f64,
    pub eps_upper: f64,
    pub num_blocks: usize,
    /// Bounded-proximal error-bound constant.
    pub c0: f64,
    pub eta: f64,
    pub nu: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstantsRecord {
    pub inputs: ConstantsInputs,
    /// Per-step decrease constant `(m - eps_upper L) / (2 eps_upper)`.
    pub a: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub kappa: f64,
    pub b: f64,
    /// Contraction factor `(b - 1) / b` of the expected gap.
    pub beta: f64,
    /// Smallest admissible level divisor.
    pub n_min: f64,
}

impl ConstantsRecord {
    /// Level divisor actually used: `max(n_min, 1)`.
    pub fn level_divisor(&self) -> f64 {
        self.n_min.max(1.0)
    }

    /// Upper end `nu / level_divisor` of the value window above `F_bar`.
    pub fn value_window(&self) -> f64 {
        self.inputs.nu / self.level_divisor()
    }

    pub fn rows(&self) -> Vec<(&'static str, f64)> {
        let i = &self.inputs;
        vec![
            ("m", i.m),
            ("M", i.big_m),
            ("L", i.lipschitz),
            ("eps_lower", i.eps_lower),
            ("eps_upper", i.eps_upper),
            ("N", i.num_blocks as f64),
            ("c0", i.c0),
            ("eta", i.eta),
            ("nu", i.nu),
            ("a", self.a),
            ("theta1", self.theta1),
            ("theta2", self.theta2),
            ("kappa", self.kappa),
            ("b", self.b),
            ("beta", self.beta),
            ("n_min", self.n_min),
        ]
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")))
    }
}

pub fn compute_constants(inputs: ConstantsInputs) -> Result<ConstantsRecord> {
    let ConstantsInputs { m, big_m, lipschitz: l, eps_lower, eps_upper, num_blocks, c0, eta, nu } = inputs;
    positive("m", m)?;
    positive("M", big_m)?;
    positive("eps_lower", eps_lower)?;
    positive("eps_upper", eps_upper)?;
    positive("eta", eta)?;
    positive("nu", nu)?;
    if m > big_m {
        return Err(Error::InvalidParameter(format!("m = {m} exceeds M = {big_m}")));
    }
    if eps_lower > eps_upper {
        return Err(Error::InvalidParameter(format!(
            "eps_lower = {eps_lower} exceeds eps_upper = {eps_upper}"
        )));
    }
    if !(l.is_finite() && l >= 0.0) {
        return Err(Error::InvalidParameter(format!("L must be nonnegative, got {l}")));
    }
    if !(c0.is_finite() && c0 >= 0.0) {
        return Err(Error::InvalidParameter(format!("c0 must be nonnegative, got {c0}")));
    }
    if num_blocks == 0 {
        return Err(Error::InvalidParameter("N must be at least 1".into()));
    }
    let gap = m - eps_upper * l;
    if gap <= 0.0 {
        return Err(Error::InfeasibleStep(format!(
            "eps_upper = {eps_upper} must be below m/L = {}",
            m / l
        )));
    }

    let n = num_blocks as f64;
    let a = gap / (2.0 * eps_upper);
    let theta1 = 1.0 + c0 * (l + big_m / eps_lower);
    let theta2 = 1.5 * l + big_m / (2.0 * eps_lower);
    let kappa = theta1 * theta1 * theta2;
    let b = 2.0 * eps_upper * n * n * kappa / gap + n;
    let beta = (b - 1.0) / b;
    let n_min = (2.0 * eps_upper * nu / gap) / (eta / 2.0).powi(2);
    Ok(ConstantsRecord { inputs, a, theta1, theta2, kappa, b, beta, n_min })
}
