use super::{CheckRow, IDENTITY_TOL};
use crate::bregman::{BregmanGenerator, ScheduleBounds};
use crate::error::Result;
use crate::model::ProblemInstance;
use crate::prox::ProxQuery;

/// Every coordinate map `T_i(x)` at one point, with the values the
/// expectation identities and inequalities need.
#[derive(Debug, Clone)]
pub struct CoordinateSweep {
    pub x: Vec<f64>,
    pub value: f64,
    pub full: Vec<f64>,
    pub envelope: f64,
    /// `T_i(x)` for `i = 0..N`.
    pub points: Vec<Vec<f64>>,
    /// `F(T_i(x))`
    pub values: Vec<f64>,
    /// `|x - T_i(x)|^2`
    pub sq_steps: Vec<f64>,
}

impl CoordinateSweep {
    pub fn new(p: &ProblemInstance, gen: &BregmanGenerator, eps: f64, x: &[f64]) -> Result<Self> {
        let q = ProxQuery::new(p, gen, eps, x)?;
        let n_blocks = p.num_blocks();
        let mut points = Vec::with_capacity(n_blocks);
        let mut values = Vec::with_capacity(n_blocks);
        let mut sq_steps = Vec::with_capacity(n_blocks);
        for i in 0..n_blocks {
            let y = q.coordinate(i);
            values.push(p.objective(&y)?);
            sq_steps.push(crate::dist(x, &y).powi(2));
            points.push(y);
        }
        let full = q.full();
        let envelope = q.model_value(&full);
        Ok(Self {
            x: x.to_vec(),
            value: p.objective(x)?,
            full,
            envelope,
            points,
            values,
            sq_steps,
        })
    }

    pub fn num_blocks(&self) -> usize {
        self.points.len()
    }

    /// `E_i F(T_i(x))`
    pub fn mean_value(&self) -> f64 {
        mean(&self.values)
    }

    /// `E_i |x - T_i(x)|^2`
    pub fn mean_sq_step(&self) -> f64 {
        mean(&self.sq_steps)
    }

    /// `E_i T_i(x)`
    pub fn mean_point(&self) -> Vec<f64> {
        let n = self.num_blocks() as f64;
        (0..self.x.len())
            .map(|j| self.points.iter().map(|y| y[j]).sum::<f64>() / n)
            .collect()
    }

    /// `|x - T(x)|`
    pub fn residual(&self) -> f64 {
        crate::dist(&self.x, &self.full)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// `E_i phi(T_i(x))` by enumeration over the `N` blocks.
pub fn enumerate_expectation(
    p: &ProblemInstance,
    gen: &BregmanGenerator,
    eps: f64,
    x: &[f64],
    phi: impl Fn(&[f64]) -> f64,
) -> Result<f64> {
    let q = ProxQuery::new(p, gen, eps, x)?;
    let n = p.num_blocks();
    Ok((0..n).map(|i| phi(&q.coordinate(i))).sum::<f64>() / n as f64)
}

/// `E_i T_i(x)` by enumeration.
pub fn expected_coordinate_prox(
    p: &ProblemInstance,
    gen: &BregmanGenerator,
    eps: f64,
    x: &[f64],
) -> Result<Vec<f64>> {
    Ok(CoordinateSweep::new(p, gen, eps, x)?.mean_point())
}

/// The three identities relating the coordinate maps to the full map:
/// the mean point, the regularizer value and the squared step. Each row
/// carries the largest absolute error against [`IDENTITY_TOL`].
pub fn expectation_identities(p: &ProblemInstance, sweep: &CoordinateSweep) -> Vec<CheckRow> {
    let n = sweep.num_blocks() as f64;
    let x = &sweep.x;
    let part = p.partition();

    let mean_point = sweep.mean_point();
    let point_err = mean_point
        .iter()
        .zip(sweep.full.iter().zip(x))
        .map(|(m, (t, xj))| (m - (t / n + (1.0 - 1.0 / n) * xj)).abs())
        .fold(0.0, f64::max);

    // Block-wise form: N E_i g_j((T_i x)_j) - (N-1) g_j(x_j) = g_j((T x)_j),
    // then the same identity summed over blocks.
    let mut reg_err: f64 = 0.0;
    let mut lhs_total = 0.0;
    for j in 0..p.num_blocks() {
        let range = part.range(j);
        let gx = p.block_reg_value(j, &x[range.clone()]);
        let mean_g = sweep
            .points
            .iter()
            .map(|y| p.block_reg_value(j, &y[range.clone()]))
            .sum::<f64>()
            / n;
        let lhs = n * mean_g - (n - 1.0) * gx;
        let rhs = p.block_reg_value(j, &sweep.full[range]);
        reg_err = reg_err.max((lhs - rhs).abs());
        lhs_total += lhs;
    }
    reg_err = reg_err.max((lhs_total - p.reg_value(&sweep.full)).abs());

    let full_sq = crate::dist(x, &sweep.full).powi(2);
    let step_err = (full_sq - n * sweep.mean_sq_step()).abs();

    vec![
        CheckRow::new("expectation-identity", "mean-point", point_err, IDENTITY_TOL, 0.0),
        CheckRow::new("expectation-identity", "regularizer", reg_err, IDENTITY_TOL, 0.0),
        CheckRow::new("expectation-identity", "squared-step", step_err, IDENTITY_TOL, 0.0),
    ]
}

/// `a = (m - eps_upper L) / (2 eps_upper)`.
pub fn decrease_constant(bounds: &ScheduleBounds, lipschitz: f64) -> f64 {
    (bounds.m - bounds.eps_upper * lipschitz) / (2.0 * bounds.eps_upper)
}

/// Worst block of `F(T_i(x)) - F(x) <= -a |x - T_i(x)|^2`.
pub fn sufficient_decrease_check(sweep: &CoordinateSweep, a: f64, tol: f64) -> CheckRow {
    sweep
        .values
        .iter()
        .zip(&sweep.sq_steps)
        .enumerate()
        .map(|(i, (v, sq))| {
            CheckRow::new("sufficient-decrease", &format!("block-{i}"), v - sweep.value, -a * sq, tol)
        })
        .reduce(CheckRow::worst)
        .expect("at least one block")
}

/// The envelope inequality
/// `N E_i F(T_i x) - (N-1) F(x) <= E(x) - (N/2)(m/eps_upper - L) E_i |x - T_i x|^2`
/// and the upper bound `E(x) <= F(x)`.
pub fn envelope_checks(sweep: &CoordinateSweep, bounds: &ScheduleBounds, lipschitz: f64, tol: f64) -> Vec<CheckRow> {
    let n = sweep.num_blocks() as f64;
    let lhs = n * sweep.mean_value() - (n - 1.0) * sweep.value;
    let rhs = sweep.envelope - 0.5 * n * (bounds.m / bounds.eps_upper - lipschitz) * sweep.mean_sq_step();
    vec![
        CheckRow::new("envelope", "coordinate-envelope-inequality", lhs, rhs, tol),
        CheckRow::new("envelope", "envelope-below-objective", sweep.envelope, sweep.value, tol),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{make_quadratic_problem, BlockPartition, DenseMatrix, Regularizer};

    fn two_block() -> ProblemInstance {
        make_quadratic_problem(
            DenseMatrix::from_rows(&[vec![1.0, 0.5], vec![0.0, 1.0]]).unwrap(),
            vec![3.0, -1.0],
            vec![Regularizer::l1(0.5).unwrap(), Regularizer::mcp(0.5, 3.0).unwrap()],
            BlockPartition::uniform(2, 2).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn mean_point_identity_by_hand() {
        let p = two_block();
        let g = BregmanGenerator::identity(2);
        let x = [0.2, -0.7];
        let mean = expected_coordinate_prox(&p, &g, 0.3, &x).unwrap();
        let t = crate::prox::full_prox(&p, &g, 0.3, &x).unwrap();
        for j in 0..2 {
            assert!((mean[j] - (0.5 * t[j] + 0.5 * x[j])).abs() < 1e-15);
        }
        let sweep = CoordinateSweep::new(&p, &g, 0.3, &x).unwrap();
        for row in expectation_identities(&p, &sweep) {
            assert!(row.pass, "{row:?}");
        }
    }

    #[test]
    fn enumerate_matches_sweep() {
        let p = two_block();
        let g = BregmanGenerator::new(vec![1.0, 2.0]).unwrap();
        let x = [1.0, 1.0];
        let e = enumerate_expectation(&p, &g, 0.3, &x, |y| p.objective(y).unwrap()).unwrap();
        let s = CoordinateSweep::new(&p, &g, 0.3, &x).unwrap();
        assert_eq!(e, s.mean_value());
    }

    #[test]
    fn decrease_and_envelope_hold() {
        let p = two_block();
        let bounds = ScheduleBounds { m: 1.0, big_m: 1.0, eps_lower: 0.3, eps_upper: 0.3 };
        let a = decrease_constant(&bounds, p.lipschitz());
        assert!(a > 0.0);
        let g = BregmanGenerator::identity(2);
        for x in [[0.0, 0.0], [3.0, -2.0], [-1.0, 4.0]] {
            let s = CoordinateSweep::new(&p, &g, 0.3, &x).unwrap();
            assert!(sufficient_decrease_check(&s, a, 1e-9).pass);
            for row in envelope_checks(&s, &bounds, p.lipschitz(), 1e-9) {
                assert!(row.pass, "{row:?}");
            }
        }
    }
}
