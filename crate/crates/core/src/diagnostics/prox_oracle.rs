//! Brute-force scalar prox: a coarse grid followed by a fine grid around the
//! coarse winner. Independent of the closed forms it is used to check.

use rand::Rng;

use super::CheckRow;
use crate::error::Result;
use crate::model::Regularizer;
use crate::prox::scalar_prox;

/// Allowed distance between closed-form and grid minimizers.
pub const PROX_ARGMIN_TOL: f64 = 1e-3;
/// Allowed difference between closed-form and grid objective values.
pub const PROX_VALUE_TOL: f64 = 1e-8;

const COARSE_CELL: f64 = 1e-3;
const FINE_CELL: f64 = 1e-7;

/// `g(x) + (w/2)(x - v)^2`
pub fn prox_objective(reg: &Regularizer, w: f64, v: f64, x: f64) -> f64 {
    reg.value(x) + 0.5 * w * (x - v) * (x - v)
}

fn scan(reg: &Regularizer, w: f64, v: f64, lo: f64, cell: f64, count: usize, best: &mut (f64, f64)) {
    for i in 0..=count {
        let x = lo + i as f64 * cell;
        let f = prox_objective(reg, w, v, x);
        if f < best.1 {
            *best = (x, f);
        }
    }
}

/// Grid minimizer of the scalar prox objective over `[min(0,v) - 1, max(0,v) + 1]`,
/// with `0` and `v` evaluated exactly.
pub fn grid_prox(reg: &Regularizer, w: f64, v: f64) -> (f64, f64) {
    let lo = v.min(0.0) - 1.0;
    let hi = v.max(0.0) + 1.0;
    let mut best = (0.0, prox_objective(reg, w, v, 0.0));
    let fv = prox_objective(reg, w, v, v);
    if fv < best.1 {
        best = (v, fv);
    }
    let coarse = ((hi - lo) / COARSE_CELL).ceil() as usize;
    scan(reg, w, v, lo, COARSE_CELL, coarse, &mut best);
    let center = best.0;
    let fine = (4.0 * COARSE_CELL / FINE_CELL) as usize;
    scan(reg, w, v, center - 2.0 * COARSE_CELL, FINE_CELL, fine, &mut best);
    best
}

/// Compares the closed-form prox with [`grid_prox`] on random `(w, v)` with
/// `w` in `(rho + 0.1, rho + 10.1)` and `v` in `[-10, 10]`. Returns the worst
/// argmin and objective errors as two rows.
pub fn prox_oracle_checks<R: Rng + ?Sized>(reg: &Regularizer, samples: usize, rng: &mut R) -> Result<Vec<CheckRow>> {
    let rho = reg.semiconvex_rho();
    let mut arg_err: f64 = 0.0;
    let mut val_err: f64 = 0.0;
    for _ in 0..samples {
        let w = rho + 0.1 + 10.0 * rng.random::<f64>();
        let v = 20.0 * rng.random::<f64>() - 10.0;
        let x = scalar_prox(reg, w, v)?;
        let (xg, fg) = grid_prox(reg, w, v);
        arg_err = arg_err.max((x - xg).abs());
        val_err = val_err.max((prox_objective(reg, w, v, x) - fg).abs());
    }
    let name = reg.name();
    Ok(vec![
        CheckRow::new("prox-oracle", &format!("{name}-argmin"), arg_err, PROX_ARGMIN_TOL, 0.0),
        CheckRow::new("prox-oracle", &format!("{name}-objective"), val_err, PROX_VALUE_TOL, 0.0),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::rng_from_seed;

    #[test]
    fn grid_finds_soft_threshold() {
        let (x, _) = grid_prox(&Regularizer::l1(1.0).unwrap(), 1.0, 3.0);
        assert!((x - 2.0).abs() < 1e-6);
        let (x, _) = grid_prox(&Regularizer::l1(1.0).unwrap(), 1.0, 0.5);
        assert_eq!(x, 0.0);
    }

    #[test]
    fn closed_forms_agree() {
        let mut rng = rng_from_seed(17);
        for reg in [
            Regularizer::l1(0.7).unwrap(),
            Regularizer::scad(0.7, 3.7).unwrap(),
            Regularizer::mcp(0.7, 2.5).unwrap(),
            Regularizer::squared_l2(0.4).unwrap(),
        ] {
            for row in prox_oracle_checks(&reg, 100, &mut rng).unwrap() {
                assert!(row.pass, "{row:?}");
            }
        }
    }
}
