use crate::error::{Error, Result};

/// Coordinatewise penalty applied to every coordinate of a block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regularizer {
    Zero,
    /// `lambda * |t|`
    L1 { lambda: f64 },
    /// Smoothly clipped absolute deviation with `a > 2`.
    Scad { lambda: f64, a: f64 },
    /// Minimax concave penalty with `gamma > 1`.
    Mcp { lambda: f64, gamma: f64 },
    /// `(mu / 2) * t^2`
    SquaredL2 { mu: f64 },
}

pub const DEFAULT_SCAD_A: f64 = 3.7;

impl Regularizer {
    pub fn l1(lambda: f64) -> Result<Self> {
        nonneg("lambda", lambda)?;
        Ok(Self::L1 { lambda })
    }

    pub fn scad(lambda: f64, a: f64) -> Result<Self> {
        nonneg("lambda", lambda)?;
        if !(a > 2.0) || !a.is_finite() {
            return Err(Error::InvalidParameter(format!("SCAD requires a > 2, got {a}")));
        }
        Ok(Self::Scad { lambda, a })
    }

    pub fn mcp(lambda: f64, gamma: f64) -> Result<Self> {
        nonneg("lambda", lambda)?;
        if !(gamma > 1.0) || !gamma.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "MCP requires gamma > 1, got {gamma}"
            )));
        }
        Ok(Self::Mcp { lambda, gamma })
    }

    pub fn squared_l2(mu: f64) -> Result<Self> {
        nonneg("mu", mu)?;
        Ok(Self::SquaredL2 { mu })
    }

    /// Semi-convexity modulus: `g + (rho/2) t^2` is convex.
    pub fn semiconvex_rho(&self) -> f64 {
        match *self {
            Self::Zero | Self::L1 { .. } | Self::SquaredL2 { .. } => 0.0,
            Self::Scad { a, .. } => 1.0 / (a - 1.0),
            Self::Mcp { gamma, .. } => 1.0 / gamma,
        }
    }

    pub fn is_convex(&self) -> bool {
        self.semiconvex_rho() == 0.0
    }

    pub fn value(&self, t: f64) -> f64 {
        let at = t.abs();
        match *self {
            Self::Zero => 0.0,
            Self::L1 { lambda } => lambda * at,
            Self::Scad { lambda, a } => {
                if at <= lambda {
                    lambda * at
                } else if at <= a * lambda {
                    (2.0 * a * lambda * at - at * at - lambda * lambda) / (2.0 * (a - 1.0))
                } else {
                    lambda * lambda * (a + 1.0) / 2.0
                }
            }
            Self::Mcp { lambda, gamma } => {
                if at <= gamma * lambda {
                    lambda * at - at * at / (2.0 * gamma)
                } else {
                    gamma * lambda * lambda / 2.0
                }
            }
            Self::SquaredL2 { mu } => 0.5 * mu * t * t,
        }
    }

    /// Sum of the coordinate penalties over a block.
    pub fn block_value(&self, xs: &[f64]) -> f64 {
        match self {
            Self::Zero => 0.0,
            _ => xs.iter().map(|t| self.value(*t)).sum(),
        }
    }

    /// Limiting subdifferential at `t` as a closed interval `[lo, hi]`.
    /// Degenerate (a single point) wherever the penalty is differentiable.
    pub fn subdifferential(&self, t: f64) -> (f64, f64) {
        let s = t.signum();
        let at = t.abs();
        let d = match *self {
            Self::Zero => 0.0,
            Self::SquaredL2 { mu } => mu * t,
            Self::L1 { lambda } | Self::Scad { lambda, .. } | Self::Mcp { lambda, .. }
                if t == 0.0 =>
            {
                return (-lambda, lambda)
            }
            Self::L1 { lambda } => s * lambda,
            Self::Scad { lambda, a } => {
                if at <= lambda {
                    s * lambda
                } else if at <= a * lambda {
                    s * (a * lambda - at) / (a - 1.0)
                } else {
                    0.0
                }
            }
            Self::Mcp { lambda, gamma } => {
                if at <= gamma * lambda {
                    s * (lambda - at / gamma)
                } else {
                    0.0
                }
            }
        };
        (d, d)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Zero => "zero",
            Self::L1 { .. } => "l1",
            Self::Scad { .. } => "scad",
            Self::Mcp { .. } => "mcp",
            Self::SquaredL2 { .. } => "squared-l2",
        }
    }
}

fn nonneg(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be finite and non-negative, got {v}"
        )))
    }
}
