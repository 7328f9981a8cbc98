use super::constants::ConstantsRecord;
use super::expectation::CoordinateSweep;
use super::probes::Neighborhood;
use super::sublevel::SublevelOracle;
use super::{CheckRow, INEQUALITY_SLACK};
use crate::bregman::BregmanGenerator;
use crate::error::{Error, Result};
use crate::model::ProblemInstance;

#[derive(Debug, Clone, PartialEq)]
pub struct ProximityReport {
    pub hypothesis_met: bool,
    /// Empty when the hypothesis is not met.
    pub rows: Vec<CheckRow>,
}

impl ProximityReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

fn consistent(nbhd: &Neighborhood, constants: &ConstantsRecord) -> Result<()> {
    if nbhd.eta != constants.inputs.eta || nbhd.nu != constants.inputs.nu {
        return Err(Error::InvalidParameter(format!(
            "neighborhood (eta = {}, nu = {}) does not match constants (eta = {}, nu = {})",
            nbhd.eta, nbhd.nu, constants.inputs.eta, constants.inputs.nu
        )));
    }
    Ok(())
}

/// The uniform value-proximity estimates at `x`, each with its slack:
/// distance against residual, the two envelope bounds, the coordinate gap
/// against mean squared steps, the gap against expected decrease, and the
/// one-step expected contraction by `beta`.
pub fn check_value_proximity(
    p: &ProblemInstance,
    gen: &BregmanGenerator,
    eps: f64,
    x: &[f64],
    nbhd: &Neighborhood,
    constants: &ConstantsRecord,
    oracle: &SublevelOracle,
) -> Result<ProximityReport> {
    consistent(nbhd, constants)?;
    let fx = p.objective(x)?;
    if !nbhd.contains_scaled(x, fx, 0.5, constants.value_window()) {
        return Ok(ProximityReport { hypothesis_met: false, rows: Vec::new() });
    }
    let f_bar = nbhd.f_bar;
    let sweep = CoordinateSweep::new(p, gen, eps, x)?;
    let n = sweep.num_blocks() as f64;
    let dist = super::sublevel_distance(p, x, f_bar, oracle)?;
    let res = oracle.resolution();
    let c = constants;
    let tol = INEQUALITY_SLACK;

    let coord_gap = n * sweep.mean_value() - (n - 1.0) * fx - f_bar;
    let env_gap = sweep.envelope - f_bar;
    let gap = fx - f_bar;
    let rows = vec![
        CheckRow::new("value-proximity", "dist-vs-residual", dist, c.theta1 * sweep.residual(), tol + res),
        CheckRow::new("value-proximity", "coordinate-gap-vs-envelope", coord_gap, env_gap, tol),
        CheckRow::new(
            "value-proximity",
            "envelope-vs-dist",
            env_gap,
            c.theta2 * dist * dist,
            tol + c.theta2 * res * (2.0 * dist + res),
        ),
        CheckRow::new(
            "value-proximity",
            "coordinate-gap-vs-steps",
            coord_gap,
            n * n * c.kappa * sweep.mean_sq_step(),
            tol,
        ),
        CheckRow::new("value-proximity", "gap-vs-decrease", gap, c.b * (fx - sweep.mean_value()), tol),
        CheckRow::new("value-proximity", "expected-contraction", sweep.mean_value() - f_bar, c.beta * gap, tol),
    ];
    Ok(ProximityReport { hypothesis_met: true, rows })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepBoundReport {
    pub max_step: f64,
    pub step_bound: f64,
    pub steps_ok: bool,
    /// Every `T_i(x)` lies in the radius-`eta` region with value in
    /// `[F_bar, F_bar + window)`.
    pub images_in_region: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyAReport {
    /// `F(T_i(x)) >= F_bar` for every block.
    pub holds: bool,
    pub min_value: f64,
    /// Present when the property holds and `x` is in the half-radius region.
    pub step_bounds: Option<StepBoundReport>,
}

pub fn check_property_a(
    p: &ProblemInstance,
    gen: &BregmanGenerator,
    eps: f64,
    x: &[f64],
    f_bar: f64,
    region: Option<(&Neighborhood, &ConstantsRecord)>,
) -> Result<PropertyAReport> {
    let sweep = CoordinateSweep::new(p, gen, eps, x)?;
    let min_value = sweep.min_value();
    let holds = min_value >= f_bar;
    let mut step_bounds = None;
    if let (true, Some((nbhd, constants))) = (holds, region) {
        consistent(nbhd, constants)?;
        let window = constants.value_window();
        if nbhd.contains_scaled(x, sweep.value, 0.5, window) {
            let max_step = sweep.sq_steps.iter().copied().fold(0.0, f64::max).sqrt();
            let step_bound = nbhd.eta / 2.0;
            let images_in_region = sweep.points.iter().zip(&sweep.values).all(|(y, &fy)| {
                crate::dist(y, &nbhd.center) <= nbhd.eta && fy >= nbhd.f_bar && fy < nbhd.f_bar + window
            });
            step_bounds = Some(StepBoundReport {
                max_step,
                step_bound,
                steps_ok: max_step <= step_bound,
                images_in_region,
            });
        }
    }
    Ok(PropertyAReport { holds, min_value, step_bounds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::{compute_constants, ConstantsInputs};
    use crate::model::{make_quadratic_problem, BlockPartition, DenseMatrix, InstanceInfo, Regularizer};

    /// `F = 1/2 (x - 3)^2 + |x|`, minimizer 2, value 2.5.
    fn lasso1d() -> ProblemInstance {
        make_quadratic_problem(
            DenseMatrix::identity(1),
            vec![3.0],
            vec![Regularizer::l1(1.0).unwrap()],
            BlockPartition::single(1).unwrap(),
        )
        .unwrap()
        .with_known_optimum(vec![2.0], 2.5)
        .unwrap()
        .with_info(InstanceInfo { strongly_convex: true, ..Default::default() })
    }

    fn constants(p: &ProblemInstance, eps: f64, c0: f64, eta: f64, nu: f64) -> ConstantsRecord {
        compute_constants(ConstantsInputs {
            m: 1.0,
            big_m: 1.0,
            lipschitz: p.lipschitz(),
            eps_lower: eps,
            eps_upper: eps,
            num_blocks: p.num_blocks(),
            c0,
            eta,
            nu,
        })
        .unwrap()
    }

    #[test]
    fn strongly_convex_1d_all_hold() {
        // F = x^2 / 2 with LS-EB constant exactly 1.
        let p = make_quadratic_problem(
            DenseMatrix::identity(1),
            vec![0.0],
            vec![Regularizer::Zero],
            BlockPartition::single(1).unwrap(),
        )
        .unwrap()
        .with_known_optimum(vec![0.0], 0.0)
        .unwrap()
        .with_info(InstanceInfo { strongly_convex: true, ..Default::default() });
        let c = constants(&p, 0.5, 1.1, 1.0, 1.0);
        let nbhd = Neighborhood::new(&p, vec![0.0], 1.0, 1.0).unwrap();
        let o = SublevelOracle::known_singleton(&p, 0.0).unwrap();
        let g = BregmanGenerator::identity(1);
        // window nu / level_divisor is about 0.124 and admits F(0.3) = 0.045
        let r = check_value_proximity(&p, &g, 0.5, &[0.3], &nbhd, &c, &o).unwrap();
        assert!(r.hypothesis_met);
        assert_eq!(r.rows.len(), 6);
        for row in &r.rows {
            assert!(row.pass && row.slack >= 0.0, "{row:?}");
        }
    }

    #[test]
    fn hypothesis_not_met() {
        let p = lasso1d();
        let c = constants(&p, 0.5, 1.1, 1.0, 0.5);
        let nbhd = Neighborhood::new(&p, vec![2.0], 1.0, 0.5).unwrap();
        let o = SublevelOracle::known_singleton(&p, 2.5).unwrap();
        let g = BregmanGenerator::identity(1);
        let at_center = check_value_proximity(&p, &g, 0.5, &[2.0], &nbhd, &c, &o).unwrap();
        assert!(!at_center.hypothesis_met && at_center.rows.is_empty());
        // F(2.499) - F_bar = 0.1245 exceeds the window a (eta/2)^2 = 0.12375
        let high = check_value_proximity(&p, &g, 0.5, &[2.499], &nbhd, &c, &o).unwrap();
        assert!(!high.hypothesis_met);
    }

    #[test]
    fn property_a_at_optimum_level() {
        let p = lasso1d();
        let g = BregmanGenerator::identity(1);
        let c = constants(&p, 0.5, 1.1, 1.0, 1.0);
        let nbhd = Neighborhood::new(&p, vec![2.0], 1.0, 1.0).unwrap();
        for x in [-3.0, 0.3, 1.9, 2.2, 7.0] {
            assert!(check_property_a(&p, &g, 0.5, &[x], 2.5, None).unwrap().holds);
        }
        // x = 2.3: F - F_bar = 0.045 is inside the window
        let r = check_property_a(&p, &g, 0.5, &[2.3], 2.5, Some((&nbhd, &c))).unwrap();
        let bounds = r.step_bounds.unwrap();
        assert!(bounds.steps_ok && bounds.images_in_region, "{bounds:?}");
    }

    #[test]
    fn property_a_fails_above_image() {
        let p = lasso1d();
        let g = BregmanGenerator::identity(1);
        // T(0.3) = 0.3 - 0.5 * (0.3 - 3 + 1) = 1.15 with F(1.15) < F(0.3)
        let r = check_property_a(&p, &g, 0.5, &[0.3], 3.0, None).unwrap();
        assert!(!r.holds && r.step_bounds.is_none());
    }
}
