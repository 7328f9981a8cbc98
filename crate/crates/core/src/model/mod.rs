//! Problem instances `F(x) = f(x) + sum_i g_i(x_i)`.

mod matrix;
mod partition;
mod regularizer;
mod smooth;

pub use matrix::{read_vector, DenseMatrix};
pub use partition::BlockPartition;
pub use regularizer::{Regularizer, DEFAULT_SCAD_A};
pub use smooth::{SmoothFunction, SmoothKind, SmoothTerm, LIPSCHITZ_SAFETY};

use crate::error::{check_dim, Error, Result};

/// Tolerance on the subgradient distance at a declared optimum.
pub const KNOWN_OPTIMUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct KnownOptimum {
    pub point: Vec<f64>,
    pub value: f64,
}

/// Declared (not verified) structural facts about an instance.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct InstanceInfo {
    pub name: String,
    /// `F` is strongly convex, so the critical set and `[F <= F*]` are `{x*}`.
    pub strongly_convex: bool,
    /// Critical points with distinct values are uniformly separated.
    pub separated_critical_values: Option<bool>,
    /// Local quadratic growth condition around the reference point.
    pub growth_condition: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct ProblemInstance {
    smooth: SmoothTerm,
    partition: BlockPartition,
    regularizers: Vec<Regularizer>,
    known_optimum: Option<KnownOptimum>,
    critical_points: Option<Vec<Vec<f64>>>,
    info: InstanceInfo,
}

impl ProblemInstance {
    pub fn new(
        smooth: SmoothTerm,
        partition: BlockPartition,
        regularizers: Vec<Regularizer>,
    ) -> Result<Self> {
        check_dim(partition.num_blocks(), regularizers.len())?;
        if let Some(n) = smooth.dim() {
            check_dim(n, partition.dim())?;
        }
        Ok(Self {
            smooth,
            partition,
            regularizers,
            known_optimum: None,
            critical_points: None,
            info: InstanceInfo::default(),
        })
    }

    /// Attaches a known minimizer; rejected unless it is critical to within
    /// [`KNOWN_OPTIMUM_TOL`] and its value matches.
    pub fn with_known_optimum(mut self, point: Vec<f64>, value: f64) -> Result<Self> {
        let d = self.min_norm_subgradient_dist(&point)?;
        if d > KNOWN_OPTIMUM_TOL {
            return Err(Error::InvalidParameter(format!(
                "declared optimum is not critical: dist(0, dF) = {d:e}"
            )));
        }
        let f = self.objective(&point)?;
        if (f - value).abs() > 1e-9 * (1.0 + value.abs()) {
            return Err(Error::InvalidParameter(format!(
                "declared optimal value {value} but F(x*) = {f}"
            )));
        }
        self.known_optimum = Some(KnownOptimum { point, value });
        Ok(self)
    }

    pub fn with_critical_points(mut self, points: Vec<Vec<f64>>) -> Result<Self> {
        for p in &points {
            check_dim(self.dim(), p.len())?;
        }
        self.critical_points = Some(points);
        Ok(self)
    }

    pub fn with_info(mut self, info: InstanceInfo) -> Self {
        self.info = info;
        self
    }

    pub fn smooth(&self) -> &SmoothTerm {
        &self.smooth
    }

    pub fn partition(&self) -> &BlockPartition {
        &self.partition
    }

    pub fn regularizers(&self) -> &[Regularizer] {
        &self.regularizers
    }

    pub fn regularizer(&self, block: usize) -> &Regularizer {
        &self.regularizers[block]
    }

    pub fn known_optimum(&self) -> Option<&KnownOptimum> {
        self.known_optimum.as_ref()
    }

    pub fn critical_points(&self) -> Option<&[Vec<f64>]> {
        self.critical_points.as_deref()
    }

    pub fn info(&self) -> &InstanceInfo {
        &self.info
    }

    pub fn dim(&self) -> usize {
        self.partition.dim()
    }

    pub fn num_blocks(&self) -> usize {
        self.partition.num_blocks()
    }

    pub fn lipschitz(&self) -> f64 {
        self.smooth.lipschitz()
    }

    /// Largest block semi-convexity modulus.
    pub fn rho_max(&self) -> f64 {
        self.regularizers
            .iter()
            .map(Regularizer::semiconvex_rho)
            .fold(0.0, f64::max)
    }

    pub fn check_point(&self, x: &[f64]) -> Result<()> {
        check_dim(self.dim(), x.len())
    }

    /// `g_i(x_i)` for a block slice.
    pub fn block_reg_value(&self, block: usize, xi: &[f64]) -> f64 {
        self.regularizers[block].block_value(xi)
    }

    pub fn reg_value(&self, x: &[f64]) -> f64 {
        (0..self.num_blocks())
            .map(|i| self.block_reg_value(i, &x[self.partition.range(i)]))
            .sum()
    }

    /// `F(x) = f(x) + sum_i g_i(x_i)`.
    pub fn objective(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        Ok(self.smooth.value(x) + self.reg_value(x))
    }

    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        Ok(self.smooth.gradient(x))
    }

    /// `dist(0, grad f(x) + dg(x))`, exact for coordinatewise interval
    /// subdifferentials.
    pub fn min_norm_subgradient_dist(&self, x: &[f64]) -> Result<f64> {
        let grad = self.gradient(x)?;
        Ok(self.min_norm_subgradient_dist_with(x, &grad))
    }

    pub(crate) fn min_norm_subgradient_dist_with(&self, x: &[f64], grad: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.num_blocks() {
            let reg = &self.regularizers[i];
            for j in self.partition.range(i) {
                let (lo, hi) = reg.subdifferential(x[j]);
                // min over xi in [lo, hi] of |grad_j + xi|
                let d = (grad[j] + lo).max(0.0) + (-(grad[j] + hi)).max(0.0);
                s += d * d;
            }
        }
        s.sqrt()
    }
}

/// `f(x) = 1/2 |A x - b|^2` with `L` from power iteration on `A^T A`.
pub fn make_quadratic_problem(
    a: DenseMatrix,
    b: Vec<f64>,
    regularizers: Vec<Regularizer>,
    partition: BlockPartition,
) -> Result<ProblemInstance> {
    check_dim(partition.dim(), a.cols())?;
    let smooth = SmoothTerm::least_squares(a, b)?;
    ProblemInstance::new(smooth, partition, regularizers)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `f = 1/2 (x - c)^2` in one dimension.
    fn scalar(c: f64, reg: Regularizer) -> ProblemInstance {
        make_quadratic_problem(
            DenseMatrix::identity(1),
            vec![c],
            vec![reg],
            BlockPartition::single(1).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn objective_examples() {
        let p = scalar(3.0, Regularizer::l1(1.0).unwrap());
        assert_eq!(p.objective(&[1.0]).unwrap(), 3.0);
        let p = scalar(3.0, Regularizer::Zero);
        assert_eq!(p.objective(&[3.0]).unwrap(), 0.0);

        let lasso = make_quadratic_problem(
            DenseMatrix::identity(2),
            vec![1.0, 0.0],
            vec![Regularizer::l1(1.0).unwrap(); 2],
            BlockPartition::uniform(2, 2).unwrap(),
        )
        .unwrap();
        assert_eq!(lasso.objective(&[0.0, 0.0]).unwrap(), 0.5);
    }

    #[test]
    fn objective_rejects_wrong_dimension() {
        let p = scalar(3.0, Regularizer::Zero);
        assert!(matches!(
            p.objective(&[1.0, 2.0]),
            Err(Error::DimensionMismatch { expected: 1, found: 2 })
        ));
    }

    #[test]
    fn subgradient_distance_examples() {
        let p = scalar(0.0, Regularizer::l1(1.0).unwrap());
        assert_eq!(p.min_norm_subgradient_dist(&[0.0]).unwrap(), 0.0);
        let p = scalar(3.0, Regularizer::l1(1.0).unwrap());
        assert_eq!(p.min_norm_subgradient_dist(&[0.0]).unwrap(), 2.0);
        assert_eq!(p.min_norm_subgradient_dist(&[2.0]).unwrap(), 0.0);
    }

    #[test]
    fn known_optimum_is_validated() {
        let p = scalar(3.0, Regularizer::l1(1.0).unwrap());
        assert!(p.clone().with_known_optimum(vec![2.0], 2.5).is_ok());
        assert!(p.clone().with_known_optimum(vec![1.9], 2.5).is_err());
        assert!(p.with_known_optimum(vec![2.0], 2.0).is_err());
    }

    #[test]
    fn construction_checks_shapes() {
        let smooth = SmoothTerm::least_squares(DenseMatrix::identity(3), vec![0.0; 3]).unwrap();
        let part = BlockPartition::new(vec![1, 2]).unwrap();
        assert!(ProblemInstance::new(smooth.clone(), part.clone(), vec![Regularizer::Zero]).is_err());
        assert!(ProblemInstance::new(smooth, BlockPartition::single(2).unwrap(), vec![Regularizer::Zero]).is_err());
        let smooth = SmoothTerm::least_squares(DenseMatrix::identity(3), vec![0.0; 3]).unwrap();
        assert!(ProblemInstance::new(smooth, part, vec![Regularizer::Zero; 2]).is_ok());
    }
}
