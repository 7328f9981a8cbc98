use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;

use super::config::{BlockSpec, InstanceKind, InstanceSpec, Loss, RegularizerSpec, ScheduleSpec, StepKind, StepSize, WeightSpec};
use crate::bregman::{step_limit, BregmanSchedule, StepSchedule, WeightSchedule};
use crate::error::{Error, Result};
use crate::model::{read_vector, BlockPartition, DenseMatrix, InstanceInfo, ProblemInstance, Regularizer, SmoothTerm};
use crate::solver::rng_from_seed;

pub fn build_regularizer(spec: &RegularizerSpec) -> Result<Regularizer> {
    match spec.name.as_str() {
        "zero" => Ok(Regularizer::Zero),
        "l1" => Regularizer::l1(spec.lambda),
        "scad" => Regularizer::scad(spec.lambda, spec.scad_a),
        "mcp" => Regularizer::mcp(spec.lambda, spec.mcp_gamma),
        "squared_l2" => Regularizer::squared_l2(spec.mu),
        other => Err(Error::Config(format!(
            "unknown regularizer `{other}` (expected zero, l1, scad, mcp or squared_l2)"
        ))),
    }
}

pub fn build_partition(blocks: &BlockSpec, n: usize) -> Result<BlockPartition> {
    match blocks {
        BlockSpec::Uniform(b) => BlockPartition::uniform(n, *b),
        BlockSpec::Sizes(sizes) => {
            let p = BlockPartition::new(sizes.clone())?;
            crate::error::check_dim(n, p.dim())?;
            Ok(p)
        }
    }
}

/// Gaussian design stacked on a ridge block, `A^T A >= ridge I`, with a
/// sparse planted signal.
fn synthetic_data(n: usize, rows: usize, ridge: f64, noise: f64, sparsity: usize, seed: u64) -> Result<(DenseMatrix, Vec<f64>)> {
    if sparsity > n {
        return Err(Error::Config(format!("sparsity {sparsity} exceeds dimension {n}")));
    }
    if !(ridge >= 0.0 && noise >= 0.0) {
        return Err(Error::Config("ridge and noise must be nonnegative".into()));
    }
    let mut rng = rng_from_seed(seed);
    let scale = 1.0 / (rows.max(1) as f64).sqrt();
    let g: Vec<f64> = (0..rows * n).map(|_| rng.sample::<f64, _>(StandardNormal) * scale).collect();
    let mut x_true = vec![0.0; n];
    for j in index::sample(&mut rng, n, sparsity) {
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        x_true[j] = sign * (1.0 + rng.random::<f64>());
    }
    let g = DenseMatrix::new(rows, n, g)?;
    let mut b = g.mul_vec(&x_true);
    for bi in &mut b {
        *bi += noise * rng.sample::<f64, _>(StandardNormal);
    }
    if ridge == 0.0 {
        return Ok((g, b));
    }
    let r = ridge.sqrt();
    let mut data = Vec::with_capacity((rows + n) * n);
    for i in 0..rows {
        data.extend_from_slice(g.row(i));
    }
    for j in 0..n {
        data.extend((0..n).map(|c| if c == j { r } else { 0.0 }));
    }
    b.extend(x_true.iter().map(|x| r * x));
    Ok((DenseMatrix::new(rows + n, n, data)?, b))
}

pub fn build_instance(spec: &InstanceSpec) -> Result<ProblemInstance> {
    let reg = build_regularizer(&spec.regularizer)?;
    let rho = reg.semiconvex_rho();
    let (smooth, n, default_name, curvature) = match &spec.kind {
        InstanceKind::Scalar { center } => {
            (SmoothTerm::least_squares(DenseMatrix::identity(1), vec![*center])?, 1, "scalar", 1.0)
        }
        InstanceKind::Synthetic { n, rows, ridge, noise, sparsity, data_seed } => {
            let (a, b) = synthetic_data(*n, *rows, *ridge, *noise, *sparsity, *data_seed)?;
            (SmoothTerm::least_squares(a, b)?, *n, "synthetic", *ridge)
        }
        InstanceKind::Files { matrix, vector, loss } => {
            let a = DenseMatrix::read(matrix)?;
            let v = read_vector(vector)?;
            let n = a.cols();
            let smooth = match loss {
                Loss::LeastSquares => SmoothTerm::least_squares(a, v)?,
                Loss::Logistic => SmoothTerm::logistic(a, v)?,
            };
            (smooth, n, "files", 0.0)
        }
    };
    let partition = build_partition(&spec.blocks, n)?;
    let regs = vec![reg; partition.num_blocks()];
    let mut p = ProblemInstance::new(smooth, partition, regs)?;

    // A quadratic with curvature above the semi-convexity modulus is
    // strongly convex; the scalar case has an explicit minimizer.
    let strongly_convex = spec.strongly_convex.unwrap_or(curvature > rho);
    if let InstanceKind::Scalar { center } = spec.kind {
        if rho < 1.0 {
            let x = crate::prox::scalar_prox(&reg, 1.0, center)?;
            let value = p.objective(&[x])?;
            p = p.with_known_optimum(vec![x], value)?;
        }
    }
    let name = if spec.name.is_empty() { default_name.to_string() } else { spec.name.clone() };
    Ok(p.with_info(InstanceInfo {
        name,
        strongly_convex,
        separated_critical_values: spec.separated_critical_values,
        growth_condition: spec.growth_condition,
    }))
}

pub fn build_schedule(spec: &ScheduleSpec, p: &ProblemInstance) -> Result<BregmanSchedule> {
    let (weights, m) = match spec.weights {
        WeightSpec::Constant(q) => (WeightSchedule::Constant(vec![q; p.dim()]), q),
        WeightSpec::Alternating { lo, hi, period } => (WeightSchedule::Alternating { lo, hi, period }, lo),
    };
    let eps = match spec.eps {
        StepSize::Absolute(e) => e,
        StepSize::Fraction(f) => {
            let limit = step_limit(m, p.lipschitz(), p.rho_max());
            if !limit.is_finite() {
                return Err(Error::Config(
                    "eps_fraction needs a finite step limit; give `eps` explicitly".into(),
                ));
            }
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::Config(format!("eps_fraction must lie in (0, 1), got {f}")));
            }
            f * limit
        }
    };
    let step = match spec.step_kind {
        StepKind::Constant => StepSchedule::Constant(eps),
        StepKind::HarmonicClipped => StepSchedule::HarmonicClipped { lo: spec.lower_ratio * eps, hi: eps },
    };
    BregmanSchedule::new(p.dim(), weights, step)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::ExperimentConfig;
    use std::path::Path;

    fn instance(text: &str) -> ProblemInstance {
        let c = ExperimentConfig::parse(text, Path::new("t.cfg")).unwrap();
        build_instance(&c.instance).unwrap()
    }

    #[test]
    fn scalar_lasso_has_known_optimum() {
        let p = instance("[instance]\nkind = scalar\ncenter = 3\nregularizer = l1\nlambda = 1\n");
        let opt = p.known_optimum().unwrap();
        assert_eq!(opt.point, vec![2.0]);
        assert_eq!(opt.value, 2.5);
        assert!(p.info().strongly_convex);
    }

    #[test]
    fn synthetic_is_seeded_and_ridged() {
        let text = "[instance]\nkind = synthetic\nn = 12\nrows = 8\nridge = 0.5\nblocks = 4\nsparsity = 3\nregularizer = l1\nlambda = 0.1\ndata_seed = 5\n";
        let a = instance(text);
        let b = instance(text);
        assert_eq!(a.lipschitz(), b.lipschitz());
        let x = vec![0.3; 12];
        assert_eq!(a.objective(&x).unwrap(), b.objective(&x).unwrap());
        assert!(a.info().strongly_convex);
        assert_eq!(a.num_blocks(), 4);
        // curvature along any direction is at least the ridge
        let g0 = a.gradient(&[0.0; 12]).unwrap();
        let e = (0..12).map(|j| if j == 0 { 1.0 } else { 0.0 }).collect::<Vec<_>>();
        let g1 = a.gradient(&e).unwrap();
        assert!(g1[0] - g0[0] >= 0.5 - 1e-12);
    }

    #[test]
    fn fraction_schedule_respects_limit() {
        let p = instance("[instance]\nkind = scalar\ncenter = 1\nregularizer = mcp\nlambda = 1\nmcp_gamma = 2\n");
        let c = ExperimentConfig::parse("[instance]\nkind = scalar\ncenter = 1\n[schedule]\neps_fraction = 0.5\n", Path::new("t.cfg")).unwrap();
        let s = build_schedule(&c.schedule, &p).unwrap();
        // limit = min(1 / 1.01, 1 / 0.5)
        assert!((s.step(0) - 0.5 / 1.01).abs() < 1e-15);
    }

    #[test]
    fn unknown_regularizer() {
        let c = ExperimentConfig::parse("[instance]\nkind = scalar\ncenter = 1\nregularizer = l0\n", Path::new("t.cfg")).unwrap();
        assert!(build_instance(&c.instance).is_err());
    }
}
