use std::fmt;
use std::sync::Arc;

use super::matrix::DenseMatrix;
use crate::error::{Error, Result};

/// Safety factor applied to estimated Lipschitz constants.
pub const LIPSCHITZ_SAFETY: f64 = 1.01;
pub const POWER_ITER_TOL: f64 = 1e-8;
pub const POWER_ITER_MAX: usize = 10_000;

/// User-supplied smooth function.
pub trait SmoothFunction: Send + Sync {
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64], out: &mut [f64]);
}

#[derive(Clone)]
pub enum SmoothKind {
    /// `f(x) = 1/2 |A x - b|^2`
    LeastSquares { a: DenseMatrix, b: Vec<f64> },
    /// `f(x) = sum_r log(1 + exp(-y_r <a_r, x>))` with labels `y_r` in {-1, +1}
    Logistic { a: DenseMatrix, labels: Vec<f64> },
    Custom(Arc<dyn SmoothFunction>),
}

impl fmt::Debug for SmoothKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::LeastSquares { a, .. } => write!(f, "LeastSquares({}x{})", a.rows(), a.cols()),
            Self::Logistic { a, .. } => write!(f, "Logistic({}x{})", a.rows(), a.cols()),
            Self::Custom(_) => write!(f, "Custom"),
        }
    }
}

/// Smooth part `f` with an `L`-Lipschitz gradient.
#[derive(Debug, Clone)]
pub struct SmoothTerm {
    kind: SmoothKind,
    lipschitz: f64,
}

impl SmoothTerm {
    /// Least squares with `L` estimated by power iteration on `A^T A`.
    pub fn least_squares(a: DenseMatrix, b: Vec<f64>) -> Result<Self> {
        crate::error::check_dim(a.rows(), b.len())?;
        let lambda = a.gram_spectral_radius(POWER_ITER_TOL, POWER_ITER_MAX)?;
        Ok(Self {
            kind: SmoothKind::LeastSquares { a, b },
            lipschitz: lambda * LIPSCHITZ_SAFETY,
        })
    }

    /// Logistic loss; `L = lambda_max(A^T A) / 4`, inflated by the safety factor.
    pub fn logistic(a: DenseMatrix, labels: Vec<f64>) -> Result<Self> {
        crate::error::check_dim(a.rows(), labels.len())?;
        if labels.iter().any(|y| *y != 1.0 && *y != -1.0) {
            return Err(Error::InvalidParameter("logistic labels must be +1 or -1".into()));
        }
        let lambda = a.gram_spectral_radius(POWER_ITER_TOL, POWER_ITER_MAX)?;
        Ok(Self {
            kind: SmoothKind::Logistic { a, labels },
            lipschitz: 0.25 * lambda * LIPSCHITZ_SAFETY,
        })
    }

    pub fn custom(f: Arc<dyn SmoothFunction>, lipschitz: f64) -> Result<Self> {
        if !(lipschitz >= 0.0) || !lipschitz.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "Lipschitz constant must be finite and non-negative, got {lipschitz}"
            )));
        }
        Ok(Self {
            kind: SmoothKind::Custom(f),
            lipschitz,
        })
    }

    pub fn kind(&self) -> &SmoothKind {
        &self.kind
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    /// Input dimension when the kind knows it.
    pub fn dim(&self) -> Option<usize> {
        match &self.kind {
            SmoothKind::LeastSquares { a, .. } | SmoothKind::Logistic { a, .. } => Some(a.cols()),
            SmoothKind::Custom(_) => None,
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match &self.kind {
            SmoothKind::LeastSquares { a, b } => {
                let mut s = 0.0;
                for (r, br) in b.iter().enumerate() {
                    let res = crate::dot(a.row(r), x) - br;
                    s += res * res;
                }
                0.5 * s
            }
            SmoothKind::Logistic { a, labels } => labels
                .iter()
                .enumerate()
                .map(|(r, y)| log1p_exp(-y * crate::dot(a.row(r), x)))
                .sum(),
            SmoothKind::Custom(f) => f.value(x),
        }
    }

    pub fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        match &self.kind {
            SmoothKind::LeastSquares { a, b } => {
                let mut res = a.mul_vec(x);
                res.iter_mut().zip(b).for_each(|(r, br)| *r -= br);
                a.tr_mul_vec_into(&res, out);
            }
            SmoothKind::Logistic { a, labels } => {
                let w: Vec<f64> = labels
                    .iter()
                    .enumerate()
                    .map(|(r, y)| -y * sigmoid(-y * crate::dot(a.row(r), x)))
                    .collect();
                a.tr_mul_vec_into(&w, out);
            }
            SmoothKind::Custom(f) => f.gradient(x, out),
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; x.len()];
        self.gradient_into(x, &mut g);
        g
    }
}

fn log1p_exp(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn central_difference(f: &SmoothTerm, x: &[f64]) -> Vec<f64> {
        let h = 1e-6;
        (0..x.len())
            .map(|j| {
                let mut xp = x.to_vec();
                let mut xm = x.to_vec();
                xp[j] += h;
                xm[j] -= h;
                (f.value(&xp) - f.value(&xm)) / (2.0 * h)
            })
            .collect()
    }

    fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DenseMatrix {
        let data = (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect();
        DenseMatrix::new(rows, cols, data).unwrap()
    }

    fn terms(rng: &mut ChaCha8Rng) -> Vec<SmoothTerm> {
        let a = random_matrix(rng, 7, 4);
        let b = (0..7).map(|_| rng.random_range(-2.0..2.0)).collect();
        let labels = (0..7).map(|r| if r % 3 == 0 { 1.0 } else { -1.0 }).collect();
        vec![
            SmoothTerm::least_squares(a.clone(), b).unwrap(),
            SmoothTerm::logistic(a, labels).unwrap(),
        ]
    }

    #[test]
    fn lipschitz_estimates() {
        let f = SmoothTerm::least_squares(DenseMatrix::identity(2), vec![0.0; 2]).unwrap();
        assert!((f.lipschitz() - 1.01).abs() < 1e-7);
        let f = SmoothTerm::least_squares(DenseMatrix::diagonal(&[1.0, 2.0]), vec![0.0; 2]).unwrap();
        assert!((f.lipschitz() - 4.04).abs() < 1e-6);
        let f = SmoothTerm::least_squares(DenseMatrix::new(1, 1, vec![0.0]).unwrap(), vec![0.0]).unwrap();
        assert_eq!(f.lipschitz(), 0.0);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for f in terms(&mut rng) {
            for _ in 0..50 {
                let x: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();
                let g = f.gradient(&x);
                let fd = central_difference(&f, &x);
                let scale = crate::norm(&g).max(1.0);
                assert!(crate::dist(&g, &fd) <= 1e-5 * scale, "{:?}: {g:?} vs {fd:?}", f.kind());
            }
        }
    }

    #[test]
    fn descent_lemma_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for f in terms(&mut rng) {
            let l = f.lipschitz();
            for _ in 0..1000 {
                let x: Vec<f64> = (0..4).map(|_| rng.random_range(-3.0..3.0)).collect();
                let y: Vec<f64> = (0..4).map(|_| rng.random_range(-3.0..3.0)).collect();
                let g = f.gradient(&x);
                let d: Vec<f64> = y.iter().zip(&x).map(|(a, b)| a - b).collect();
                let lhs = f.value(&y) - f.value(&x) - crate::dot(&g, &d);
                assert!(lhs <= 0.5 * l * crate::dot(&d, &d) + 1e-9);
            }
        }
    }

    #[test]
    fn logistic_is_stable_for_large_margins() {
        let a = DenseMatrix::new(1, 1, vec![1.0]).unwrap();
        let f = SmoothTerm::logistic(a, vec![1.0]).unwrap();
        assert!(f.value(&[-800.0]).is_finite());
        assert!(f.value(&[800.0]) >= 0.0);
        assert!(f.gradient(&[-800.0])[0].is_finite());
    }
}
