use crate::error::{Error, Result};
use crate::model::ProblemInstance;

/// Default grid cell width.
pub const GRID_CELL: f64 = 1e-3;
const BISECTION_TOL: f64 = 1e-14;
const MAX_EXPANSIONS: usize = 200;

/// Distance oracle for one sublevel set `[F <= F_bar]`, built once per
/// `(instance, F_bar)` pair.
#[derive(Debug, Clone)]
pub struct SublevelOracle {
    f_bar: f64,
    kind: OracleKind,
}

#[derive(Debug, Clone)]
enum OracleKind {
    Singleton(Vec<f64>),
    /// Grid members of the set whose grid neighborhood leaves the set.
    Grid { cell: f64, boundary: Vec<Vec<f64>> },
    Interval { lo: f64, hi: f64 },
}

impl SublevelOracle {
    /// `[F <= F*] = {x*}` for a strongly convex instance with known optimum.
    pub fn known_singleton(p: &ProblemInstance, f_bar: f64) -> Result<Self> {
        let opt = p.known_optimum().ok_or_else(|| {
            Error::UnsupportedInstance("singleton oracle needs a known optimum".into())
        })?;
        if !p.info().strongly_convex {
            return Err(Error::UnsupportedInstance(
                "singleton oracle needs a strongly convex instance".into(),
            ));
        }
        if (f_bar - opt.value).abs() > 1e-12 * (1.0 + opt.value.abs()) {
            return Err(Error::UnsupportedInstance(format!(
                "singleton oracle needs F_bar = F* = {}, got {f_bar}",
                opt.value
            )));
        }
        Ok(Self { f_bar, kind: OracleKind::Singleton(opt.point.clone()) })
    }

    /// Brute force over the box `center +- half_width`, grid anchored at
    /// `center`. Only for `n <= 2`.
    pub fn grid(p: &ProblemInstance, f_bar: f64, center: &[f64], half_width: f64, cell: f64) -> Result<Self> {
        p.check_point(center)?;
        let n = p.dim();
        if n > 2 {
            return Err(Error::UnsupportedInstance(format!("grid oracle needs n <= 2, got n = {n}")));
        }
        if !(cell > 0.0 && half_width > 0.0) {
            return Err(Error::InvalidParameter("grid cell and half width must be positive".into()));
        }
        let k = (half_width / cell).ceil() as i64;
        let side = (2 * k + 1) as usize;
        let at = |idx: &[i64]| -> Vec<f64> {
            center.iter().zip(idx).map(|(c, &i)| c + i as f64 * cell).collect()
        };
        let total = side.pow(n as u32);
        let mut member = vec![false; total];
        let unflat = |mut f: usize| -> Vec<i64> {
            let mut idx = vec![0i64; n];
            for d in (0..n).rev() {
                idx[d] = (f % side) as i64 - k;
                f /= side;
            }
            idx
        };
        let flat = |idx: &[i64]| -> Option<usize> {
            let mut f = 0usize;
            for &i in idx {
                if i < -k || i > k {
                    return None;
                }
                f = f * side + (i + k) as usize;
            }
            Some(f)
        };
        for (f, m) in member.iter_mut().enumerate() {
            *m = p.objective(&at(&unflat(f)))? <= f_bar;
        }
        let mut boundary = Vec::new();
        for f in 0..total {
            if !member[f] {
                continue;
            }
            let idx = unflat(f);
            let interior = (0..n).all(|d| {
                [-1i64, 1].iter().all(|s| {
                    let mut nb = idx.clone();
                    nb[d] += s;
                    flat(&nb).is_some_and(|g| member[g])
                })
            });
            if !interior {
                boundary.push(at(&idx));
            }
        }
        Ok(Self { f_bar, kind: OracleKind::Grid { cell, boundary } })
    }

    /// One-dimensional sublevel interval around `anchor`, located by
    /// expansion then bisection. Requires `F(anchor) <= F_bar` and convex `F`.
    pub fn interval_1d(p: &ProblemInstance, f_bar: f64, anchor: f64) -> Result<Self> {
        if p.dim() != 1 {
            return Err(Error::UnsupportedInstance(format!(
                "interval oracle needs n = 1, got n = {}",
                p.dim()
            )));
        }
        let f = |t: f64| p.objective(&[t]);
        if f(anchor)? > f_bar {
            return Err(Error::InvalidParameter(format!(
                "interval anchor {anchor} lies outside the sublevel set"
            )));
        }
        let edge = |dir: f64| -> Result<f64> {
            let mut inside = anchor;
            let mut step = 1.0;
            let mut outside = anchor + dir * step;
            let mut expansions = 0;
            while f(outside)? <= f_bar {
                inside = outside;
                step *= 2.0;
                outside = anchor + dir * step;
                expansions += 1;
                if expansions > MAX_EXPANSIONS {
                    return Err(Error::UnsupportedInstance("sublevel set is unbounded".into()));
                }
            }
            while (outside - inside).abs() > BISECTION_TOL * (1.0 + inside.abs()) {
                let mid = 0.5 * (inside + outside);
                if mid == inside || mid == outside {
                    break;
                }
                if f(mid)? <= f_bar {
                    inside = mid;
                } else {
                    outside = mid;
                }
            }
            Ok(inside)
        };
        let lo = edge(-1.0)?;
        let hi = edge(1.0)?;
        Ok(Self { f_bar, kind: OracleKind::Interval { lo, hi } })
    }

    pub fn f_bar(&self) -> f64 {
        self.f_bar
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            OracleKind::Singleton(_) => "known-singleton",
            OracleKind::Grid { .. } => "grid",
            OracleKind::Interval { .. } => "projection-1d",
        }
    }

    /// Worst-case error of [`Self::distance`].
    pub fn resolution(&self) -> f64 {
        match &self.kind {
            OracleKind::Singleton(_) => 0.0,
            OracleKind::Grid { cell, boundary } => {
                let n = boundary.first().map_or(1, Vec::len) as f64;
                cell * n.sqrt()
            }
            OracleKind::Interval { lo, hi } => BISECTION_TOL * (1.0 + lo.abs().max(hi.abs())),
        }
    }

    pub fn distance(&self, p: &ProblemInstance, x: &[f64]) -> Result<f64> {
        if p.objective(x)? <= self.f_bar {
            return Ok(0.0);
        }
        Ok(match &self.kind {
            OracleKind::Singleton(opt) => crate::dist(x, opt),
            OracleKind::Grid { boundary, .. } => boundary
                .iter()
                .map(|y| crate::dist(x, y))
                .fold(f64::INFINITY, f64::min),
            OracleKind::Interval { lo, hi } => (lo - x[0]).max(x[0] - hi).max(0.0),
        })
    }
}

/// `dist(x, [F <= f_bar])` through an oracle built for the same level.
pub fn sublevel_distance(p: &ProblemInstance, x: &[f64], f_bar: f64, oracle: &SublevelOracle) -> Result<f64> {
    if oracle.f_bar != f_bar {
        return Err(Error::UnsupportedInstance(format!(
            "oracle was built for level {}, queried at {f_bar}",
            oracle.f_bar
        )));
    }
    oracle.distance(p, x)
}

/// A finite set of critical points; distance is to the nearest one.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalSet {
    points: Vec<Vec<f64>>,
}

impl CriticalSet {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParameter("critical set is empty".into()));
        }
        Ok(Self { points })
    }

    /// Declared critical points, or the optimum of a strongly convex instance.
    pub fn from_instance(p: &ProblemInstance) -> Result<Self> {
        if let Some(pts) = p.critical_points() {
            return Self::new(pts.to_vec());
        }
        match p.known_optimum() {
            Some(opt) if p.info().strongly_convex => Self::new(vec![opt.point.clone()]),
            _ => Err(Error::UnsupportedInstance(
                "no critical set declared and instance is not strongly convex with known optimum".into(),
            )),
        }
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn distance(&self, x: &[f64]) -> f64 {
        self.points
            .iter()
            .map(|y| crate::dist(x, y))
            .fold(f64::INFINITY, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{make_quadratic_problem, BlockPartition, DenseMatrix, InstanceInfo, Regularizer};

    fn scalar(reg: Regularizer) -> ProblemInstance {
        make_quadratic_problem(DenseMatrix::identity(1), vec![0.0], vec![reg], BlockPartition::single(1).unwrap())
            .unwrap()
            .with_known_optimum(vec![0.0], 0.0)
            .unwrap()
            .with_info(InstanceInfo { strongly_convex: true, ..Default::default() })
    }

    #[test]
    fn singleton_quadratic() {
        let p = scalar(Regularizer::Zero);
        let o = SublevelOracle::known_singleton(&p, 0.0).unwrap();
        assert_eq!(sublevel_distance(&p, &[0.3], 0.0, &o).unwrap(), 0.3);
        assert_eq!(sublevel_distance(&p, &[0.0], 0.0, &o).unwrap(), 0.0);
        assert!(SublevelOracle::known_singleton(&p, 1.0).is_err());
    }

    #[test]
    fn grid_lasso_point() {
        let p = scalar(Regularizer::l1(1.0).unwrap());
        let o = SublevelOracle::grid(&p, 0.0, &[0.0], 1.0, GRID_CELL).unwrap();
        assert_eq!(sublevel_distance(&p, &[0.5], 0.0, &o).unwrap(), 0.5);
    }

    #[test]
    fn grid_disc_matches_closed_form() {
        // F = |x|^2 / 2 in two dimensions, level 0.5: the unit disc.
        let p = make_quadratic_problem(
            DenseMatrix::identity(2),
            vec![0.0, 0.0],
            vec![Regularizer::Zero],
            BlockPartition::single(2).unwrap(),
        )
        .unwrap();
        let o = SublevelOracle::grid(&p, 0.5, &[0.0, 0.0], 1.5, 1e-2).unwrap();
        let d = o.distance(&p, &[1.5, 0.8]).unwrap();
        let exact = (1.5f64.hypot(0.8)) - 1.0;
        assert!((d - exact).abs() <= o.resolution(), "{d} vs {exact}");
        assert_eq!(o.distance(&p, &[0.1, 0.2]).unwrap(), 0.0);
    }

    #[test]
    fn grid_rejects_high_dimension() {
        let p = make_quadratic_problem(
            DenseMatrix::identity(3),
            vec![0.0; 3],
            vec![Regularizer::Zero],
            BlockPartition::single(3).unwrap(),
        )
        .unwrap();
        assert!(SublevelOracle::grid(&p, 0.0, &[0.0; 3], 1.0, 0.1).is_err());
        assert!(SublevelOracle::known_singleton(&p, 0.0).is_err());
    }

    #[test]
    fn interval_matches_closed_form() {
        // F = (x - 3)^2 / 2 + |x| at level 4.5 is the interval [0, 4].
        let p = make_quadratic_problem(
            DenseMatrix::identity(1),
            vec![3.0],
            vec![Regularizer::l1(1.0).unwrap()],
            BlockPartition::single(1).unwrap(),
        )
        .unwrap();
        let o = SublevelOracle::interval_1d(&p, 4.5, 2.0).unwrap();
        assert!((o.distance(&p, &[5.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((o.distance(&p, &[-0.25]).unwrap() - 0.25).abs() < 1e-12);
        assert_eq!(o.distance(&p, &[1.0]).unwrap(), 0.0);
    }

    #[test]
    fn critical_set_distance() {
        let c = CriticalSet::new(vec![vec![0.0], vec![2.0]]).unwrap();
        assert_eq!(c.distance(&[1.5]), 0.5);
        assert!(CriticalSet::new(vec![]).is_err());
    }
}
