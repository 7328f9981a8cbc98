//! CSV persistence. Every number is written with 17 significant digits so
//! values round-trip exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::replicate::MeanTrajectory;
use crate::diagnostics::{CheckRow, ErrorBoundEstimate, ProbeRegion};
use crate::error::{Error, Result};
use crate::solver::Trajectory;

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// `k,i_k,F,gap,step_norm,prox_residual`, one row per step; `gap` is empty
/// without a reference value.
pub fn trajectory_csv(t: &Trajectory, f_bar: Option<f64>) -> String {
    let mut s = String::from("k,i_k,F,gap,step_norm,prox_residual\n");
    for r in &t.records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            r.k,
            r.block,
            num(r.value),
            opt(f_bar.map(|f| r.value - f)),
            num(r.step_norm),
            opt(r.prox_residual)
        );
    }
    s
}

pub fn write_trajectory(path: &Path, t: &Trajectory, f_bar: Option<f64>) -> Result<()> {
    write(path, &trajectory_csv(t, f_bar))
}

/// `k,mean_gap,var_gap` with `k = 0` the starting point.
pub fn mean_csv(m: &MeanTrajectory) -> String {
    let mut s = String::from("k,mean_gap,var_gap\n");
    for (k, (g, v)) in m.mean_gap.iter().zip(&m.var_gap).enumerate() {
        let _ = writeln!(s, "{k},{},{}", num(*g), num(*v));
    }
    s
}

pub fn write_mean(path: &Path, m: &MeanTrajectory) -> Result<()> {
    write(path, &mean_csv(m))
}

pub fn checks_csv(rows: &[CheckRow]) -> String {
    let mut s = String::from("check,name,lhs,rhs,slack,pass\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{},{},{},{}", r.check, r.name, num(r.lhs), num(r.rhs), num(r.slack), r.pass);
    }
    s
}

pub fn write_checks(path: &Path, rows: &[CheckRow]) -> Result<()> {
    write(path, &checks_csv(rows))
}

/// Two-column `key,value` file.
pub fn write_key_values(path: &Path, rows: &[(String, String)]) -> Result<()> {
    let mut s = String::from("key,value\n");
    for (k, v) in rows {
        let _ = writeln!(s, "{k},{v}");
    }
    write(path, &s)
}

fn point(x: &[f64]) -> String {
    x.iter().map(|v| num(*v)).collect::<Vec<_>>().join(";")
}

pub fn probe_csv(estimates: &[ErrorBoundEstimate]) -> String {
    let mut s = String::from("kind,constant,samples,used,draws,oracle,radius,level,center,extremal_point\n");
    for e in estimates {
        let (center, radius, level) = match &e.region {
            ProbeRegion::Neighborhood(n) => (&n.center, n.eta, n.f_bar + n.nu),
            ProbeRegion::LevelResidual(r) => (&r.center, r.sample_radius, r.level),
        };
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{}",
            e.kind.as_str(),
            num(e.constant),
            e.samples,
            e.used,
            e.draws,
            e.oracle,
            num(radius),
            num(level),
            point(center),
            point(&e.extremal_point)
        );
    }
    s
}

pub fn write_probe(path: &Path, estimates: &[ErrorBoundEstimate]) -> Result<()> {
    write(path, &probe_csv(estimates))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        let s = num(0.1);
        assert_eq!(s, "1.0000000000000001e-1");
        assert_eq!(s.parse::<f64>().unwrap(), 0.1);
        let x = std::f64::consts::PI * 1e-7;
        assert_eq!(num(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn check_rows() {
        let rows = vec![CheckRow::new("c", "n", 1.0, 2.0, 0.0)];
        let text = checks_csv(&rows);
        assert_eq!(text.lines().nth(1).unwrap(), format!("c,n,{},{},{},true", num(1.0), num(2.0), num(1.0)));
    }
}
