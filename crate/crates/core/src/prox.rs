//! Scalar proximal kernels and the Bregman proximal maps built on them.
//!
//! With a diagonal generator `K(y) = 1/2 sum_j q_j y_j^2` the subproblem
//!
//! ```text
//! min_y <grad_i f(x), (y - x)_i> + g_i(y_i) + (1/eps) D(x, y)
//! ```
//!
//! separates into one strongly convex scalar problem per coordinate of block
//! `i`: minimize `g(t) + (w/2)(t - v)^2` with `w = q_j / eps` and
//! `v = x_j - grad_j f(x) / w`. Coordinates outside block `i` stay at `x`.

use crate::bregman::BregmanGenerator;
use crate::error::{check_dim, Error, Result};
use crate::model::{ProblemInstance, Regularizer};

/// Unique minimizer of `g(t) + (w/2)(t - v)^2`; requires `w > rho(g)`.
pub fn scalar_prox(reg: &Regularizer, w: f64, v: f64) -> Result<f64> {
    let rho = reg.semiconvex_rho();
    if !(w > rho) || !w.is_finite() {
        return Err(Error::ProxPrecondition { weight: w, rho });
    }
    Ok(scalar_prox_unchecked(reg, w, v))
}

fn soft_threshold(v: f64, tau: f64) -> f64 {
    v.signum() * (v.abs() - tau).max(0.0)
}

pub(crate) fn scalar_prox_unchecked(reg: &Regularizer, w: f64, v: f64) -> f64 {
    match *reg {
        Regularizer::Zero => v,
        Regularizer::L1 { lambda } => soft_threshold(v, lambda / w),
        Regularizer::SquaredL2 { mu } => w * v / (w + mu),
        Regularizer::Mcp { lambda, gamma } => {
            let av = v.abs();
            let tau = lambda / w;
            if av <= tau {
                0.0
            } else if av <= gamma * lambda {
                v.signum() * (av - tau) / (1.0 - 1.0 / (gamma * w))
            } else {
                v
            }
        }
        Regularizer::Scad { lambda, a } => {
            let av = v.abs();
            let tau = lambda / w;
            if av <= tau {
                0.0
            } else if av <= lambda + tau {
                v.signum() * (av - tau)
            } else if av <= a * lambda {
                let t = ((a - 1.0) * w * av - a * lambda) / ((a - 1.0) * w - 1.0);
                v.signum() * t
            } else {
                v
            }
        }
    }
}

/// A point together with its gradient, for evaluating the coordinate maps
/// `T_i(x)`, the full map `T(x)` and the envelope `E(x)` at one `x`.
#[derive(Debug, Clone)]
pub struct ProxQuery<'a> {
    problem: &'a ProblemInstance,
    generator: &'a BregmanGenerator,
    eps: f64,
    x: &'a [f64],
    grad: Vec<f64>,
}

impl<'a> ProxQuery<'a> {
    pub fn new(
        problem: &'a ProblemInstance,
        generator: &'a BregmanGenerator,
        eps: f64,
        x: &'a [f64],
    ) -> Result<Self> {
        let grad = problem.gradient(x)?;
        Self::with_gradient(problem, generator, eps, x, grad)
    }

    pub(crate) fn with_gradient(
        problem: &'a ProblemInstance,
        generator: &'a BregmanGenerator,
        eps: f64,
        x: &'a [f64],
        grad: Vec<f64>,
    ) -> Result<Self> {
        check_dim(problem.dim(), generator.dim())?;
        check_dim(problem.dim(), x.len())?;
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::InvalidParameter(format!("step must be positive, got {eps}")));
        }
        let part = problem.partition();
        for i in 0..part.num_blocks() {
            let rho = problem.regularizer(i).semiconvex_rho();
            for j in part.range(i) {
                let w = generator.weights()[j] / eps;
                if !(w > rho) {
                    return Err(Error::ProxPrecondition { weight: w, rho });
                }
            }
        }
        Ok(Self {
            problem,
            generator,
            eps,
            x,
            grad,
        })
    }

    pub fn x(&self) -> &[f64] {
        self.x
    }

    pub fn gradient(&self) -> &[f64] {
        &self.grad
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// New values of block `i` under `T_i`.
    pub fn block_update(&self, i: usize) -> Vec<f64> {
        let reg = self.problem.regularizer(i);
        self.problem
            .partition()
            .range(i)
            .map(|j| {
                let w = self.generator.weights()[j] / self.eps;
                let v = self.x[j] - self.grad[j] / w;
                scalar_prox_unchecked(reg, w, v)
            })
            .collect()
    }

    /// `T_i(x)`: block `i` replaced, every other block equal to `x`.
    pub fn coordinate(&self, i: usize) -> Vec<f64> {
        let mut y = self.x.to_vec();
        let range = self.problem.partition().range(i);
        y[range].copy_from_slice(&self.block_update(i));
        y
    }

    /// `T(x)`: every block replaced by its coordinate update.
    pub fn full(&self) -> Vec<f64> {
        let mut y = Vec::with_capacity(self.x.len());
        for i in 0..self.problem.num_blocks() {
            y.extend(self.block_update(i));
        }
        y
    }

    /// `f(x) + <grad f(x), y - x> + g(y) + (1/eps) D(x, y)` at `y`.
    pub fn model_value(&self, y: &[f64]) -> f64 {
        let fx = self.problem.smooth().value(self.x);
        let lin: f64 = self
            .grad
            .iter()
            .zip(y.iter().zip(self.x))
            .map(|(g, (a, b))| g * (a - b))
            .sum();
        fx + lin + self.problem.reg_value(y) + self.generator.distance_unchecked(self.x, y) / self.eps
    }

    /// `E(x)`, the minimal model value, attained at `T(x)`.
    pub fn envelope(&self) -> f64 {
        self.model_value(&self.full())
    }

    /// `|x - T(x)|`.
    pub fn residual(&self) -> f64 {
        crate::dist(self.x, &self.full())
    }
}

pub fn coordinate_prox(
    p: &ProblemInstance,
    gen: &BregmanGenerator,
    eps: f64,
    x: &[f64],
    i: usize,
) -> Result<Vec<f64>> {
    if i >= p.num_blocks() {
        return Err(Error::InvalidParameter(format!(
            "block {i} out of range for {} blocks",
            p.num_blocks()
        )));
    }
    Ok(ProxQuery::new(p, gen, eps, x)?.coordinate(i))
}

pub fn full_prox(p: &ProblemInstance, gen: &BregmanGenerator, eps: f64, x: &[f64]) -> Result<Vec<f64>> {
    Ok(ProxQuery::new(p, gen, eps, x)?.full())
}

pub fn envelope_value(p: &ProblemInstance, gen: &BregmanGenerator, eps: f64, x: &[f64]) -> Result<f64> {
    Ok(ProxQuery::new(p, gen, eps, x)?.envelope())
}

pub fn prox_residual(p: &ProblemInstance, gen: &BregmanGenerator, eps: f64, x: &[f64]) -> Result<f64> {
    Ok(ProxQuery::new(p, gen, eps, x)?.residual())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{make_quadratic_problem, BlockPartition, DenseMatrix};

    /// 1-D grid search for `argmin g(t) + (w/2)(t - v)^2` on `[lo, hi]`.
    fn grid_argmin(reg: &Regularizer, w: f64, v: f64, lo: f64, hi: f64, step: f64) -> f64 {
        let n = ((hi - lo) / step).round() as usize;
        let obj = |t: f64| reg.value(t) + 0.5 * w * (t - v) * (t - v);
        (0..=n)
            .map(|k| lo + k as f64 * step)
            .min_by(|a, b| obj(*a).total_cmp(&obj(*b)))
            .unwrap()
    }

    fn scalar_instance(c: f64, reg: Regularizer) -> ProblemInstance {
        make_quadratic_problem(
            DenseMatrix::identity(1),
            vec![c],
            vec![reg],
            BlockPartition::single(1).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn scalar_prox_examples() {
        assert_eq!(scalar_prox(&Regularizer::Zero, 2.0, 7.0).unwrap(), 7.0);
        let l1 = Regularizer::l1(1.0).unwrap();
        assert_eq!(scalar_prox(&l1, 2.0, 2.0).unwrap(), 1.5);
        assert!((grid_argmin(&l1, 2.0, 2.0, -5.0, 5.0, 1e-5) - 1.5).abs() < 1e-3);

        let mcp = Regularizer::mcp(1.0, 2.0).unwrap();
        let closed = scalar_prox(&mcp, 2.0, 0.4).unwrap();
        let grid = grid_argmin(&mcp, 2.0, 0.4, -5.0, 5.0, 1e-5);
        assert!((closed - grid).abs() < 1e-3, "{closed} vs {grid}");
        assert_eq!(closed, 0.0);
    }

    #[test]
    fn scalar_prox_rejects_weak_weights() {
        let mcp = Regularizer::mcp(1.0, 2.0).unwrap();
        assert!(matches!(
            scalar_prox(&mcp, 0.5, 1.0),
            Err(Error::ProxPrecondition { .. })
        ));
        assert!(scalar_prox(&Regularizer::Zero, 0.0, 1.0).is_err());
        let scad = Regularizer::scad(1.0, 3.7).unwrap();
        assert!(scalar_prox(&scad, 1.0 / 2.7, 1.0).is_err());
    }

    #[test]
    fn scad_pieces_against_grid() {
        let scad = Regularizer::scad(1.0, 3.7).unwrap();
        // one center per piece of the closed form, weight 1 and a larger one
        for w in [1.0, 3.0] {
            for v in [0.3, -0.9, 1.6, -2.5, 3.0, 5.0, -7.0] {
                let closed = scalar_prox(&scad, w, v).unwrap();
                let grid = grid_argmin(&scad, w, v, -10.0, 10.0, 1e-4);
                assert!((closed - grid).abs() < 2e-4, "w={w} v={v}: {closed} vs {grid}");
            }
        }
    }

    #[test]
    fn coordinate_prox_examples() {
        let g = BregmanGenerator::identity(1);
        let p = scalar_instance(3.0, Regularizer::Zero);
        assert_eq!(coordinate_prox(&p, &g, 0.5, &[1.0], 0).unwrap(), vec![2.0]);
        let p = scalar_instance(3.0, Regularizer::l1(1.0).unwrap());
        assert_eq!(coordinate_prox(&p, &g, 0.5, &[1.0], 0).unwrap(), vec![1.5]);
        assert_eq!(coordinate_prox(&p, &g, 0.5, &[2.0], 0).unwrap(), vec![2.0]);
        assert!(coordinate_prox(&p, &g, 0.5, &[2.0], 1).is_err());
    }

    #[test]
    fn full_prox_examples() {
        let p = make_quadratic_problem(
            DenseMatrix::identity(2),
            vec![3.0, 3.0],
            vec![Regularizer::l1(1.0).unwrap(); 2],
            BlockPartition::uniform(2, 2).unwrap(),
        )
        .unwrap();
        let g = BregmanGenerator::identity(2);
        let x = [1.0, 1.0];
        assert_eq!(full_prox(&p, &g, 0.5, &x).unwrap(), vec![1.5, 1.5]);
        let q = ProxQuery::new(&p, &g, 0.5, &x).unwrap();
        let t = q.full();
        assert_eq!(t[0], q.coordinate(0)[0]);
        assert_eq!(t[1], q.coordinate(1)[1]);
        // the critical point (2, 2) is fixed
        assert_eq!(full_prox(&p, &g, 0.5, &[2.0, 2.0]).unwrap(), vec![2.0, 2.0]);
    }

    #[test]
    fn envelope_and_residual_examples() {
        let g = BregmanGenerator::identity(1);
        let p = scalar_instance(3.0, Regularizer::Zero);
        assert_eq!(envelope_value(&p, &g, 0.5, &[1.0]).unwrap(), 1.0);
        assert_eq!(prox_residual(&p, &g, 0.5, &[1.0]).unwrap(), 1.0);

        let p = scalar_instance(3.0, Regularizer::l1(1.0).unwrap());
        assert_eq!(prox_residual(&p, &g, 0.5, &[1.0]).unwrap(), 0.5);
        assert_eq!(prox_residual(&p, &g, 0.5, &[2.0]).unwrap(), 0.0);
        let e = envelope_value(&p, &g, 0.5, &[2.0]).unwrap();
        assert_eq!(e, p.objective(&[2.0]).unwrap());

        // grid check of the envelope as a minimum over y
        let q = ProxQuery::new(&p, &g, 0.5, &[1.0]).unwrap();
        let grid_min = (0..=20_000)
            .map(|k| -5.0 + k as f64 * 5e-4)
            .map(|y| q.model_value(&[y]))
            .fold(f64::INFINITY, f64::min);
        assert!((q.envelope() - grid_min).abs() < 1e-6);
    }

    #[test]
    fn rejects_steps_that_break_strong_convexity() {
        let p = scalar_instance(3.0, Regularizer::mcp(1.0, 2.0).unwrap());
        let g = BregmanGenerator::identity(1);
        // w = 1 / 2.5 = 0.4 < rho = 0.5
        assert!(full_prox(&p, &g, 2.5, &[1.0]).is_err());
        assert!(full_prox(&p, &g, 0.0, &[1.0]).is_err());
    }
}
