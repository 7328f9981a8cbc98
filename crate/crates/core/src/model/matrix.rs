use std::path::Path;

use crate::error::{check_dim, Error, Result};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidParameter(format!(
                "matrix must be non-empty, got {rows}x{cols}"
            )));
        }
        check_dim(rows * cols, data.len())?;
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            check_dim(cols, row.len())?;
            data.extend_from_slice(row);
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for j in 0..n {
            data[j * n + j] = 1.0;
        }
        Self {
            rows: n,
            cols: n,
            data,
        }
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let mut m = Self::identity(d.len());
        for (j, v) in d.iter().enumerate() {
            m.data[j * d.len() + j] = *v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    /// `out = A x`
    pub fn mul_vec_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        for (r, o) in out.iter_mut().enumerate() {
            *o = crate::dot(self.row(r), x);
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        self.mul_vec_into(x, &mut out);
        out
    }

    /// `out = A^T y`
    pub fn tr_mul_vec_into(&self, y: &[f64], out: &mut [f64]) {
        debug_assert_eq!(y.len(), self.rows);
        out.iter_mut().for_each(|o| *o = 0.0);
        for (r, yr) in y.iter().enumerate() {
            if *yr == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.row(r)) {
                *o += a * yr;
            }
        }
    }

    pub fn tr_mul_vec(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        self.tr_mul_vec_into(y, &mut out);
        out
    }

    /// Parses whitespace-separated decimals, one row per line. Blank lines
    /// and lines starting with `#` are skipped.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let rows = parse_rows(text, path)?;
        if rows.is_empty() {
            return Err(parse_err(path, 0, "matrix file has no rows"));
        }
        let cols = rows[0].1.len();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (line, row) in &rows {
            if row.len() != cols {
                return Err(parse_err(
                    path,
                    *line,
                    format!("expected {cols} columns, found {}", row.len()),
                ));
            }
            data.extend_from_slice(row);
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    /// Largest eigenvalue of `A^T A` by power iteration, stopped when two
    /// successive Rayleigh quotients agree to relative tolerance `rel_tol`.
    pub fn gram_spectral_radius(&self, rel_tol: f64, max_iters: usize) -> Result<f64> {
        if self.data.iter().all(|v| *v == 0.0) {
            return Ok(0.0);
        }
        // Irregular start vector so it is not orthogonal to the top
        // eigenvector of structured matrices.
        let mut v: Vec<f64> = (0..self.cols)
            .map(|j| 1.0 + ((j as f64 + 1.0) * 0.618_033_988_749_895).fract())
            .collect();
        let nv = crate::norm(&v);
        v.iter_mut().for_each(|t| *t /= nv);

        let mut av = vec![0.0; self.rows];
        let mut w = vec![0.0; self.cols];
        let mut prev = 0.0;
        for _ in 0..max_iters {
            self.mul_vec_into(&v, &mut av);
            self.tr_mul_vec_into(&av, &mut w);
            // v is unit-norm, so <v, A^T A v> = |Av|^2.
            let lambda = crate::dot(&av, &av);
            let nw = crate::norm(&w);
            if nw == 0.0 {
                // v landed in the null space; the start vector was unlucky.
                return Ok(lambda);
            }
            if (lambda - prev).abs() <= rel_tol * lambda {
                return Ok(lambda);
            }
            prev = lambda;
            for (vi, wi) in v.iter_mut().zip(&w) {
                *vi = wi / nw;
            }
        }
        Err(Error::PowerIteration { iters: max_iters })
    }
}

pub(crate) fn parse_rows(text: &str, path: &Path) -> Result<Vec<(usize, Vec<f64>)>> {
    let mut rows = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|_| parse_err(path, idx + 1, format!("not a number: `{tok}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push((idx + 1, row));
    }
    Ok(rows)
}

/// Reads a vector stored either as one value per line or as a single row.
pub fn read_vector(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let rows = parse_rows(&text, path)?;
    Ok(rows.into_iter().flat_map(|(_, r)| r).collect())
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_iteration_diagonal() {
        let a = DenseMatrix::diagonal(&[1.0, 2.0]);
        let l = a.gram_spectral_radius(1e-8, 10_000).unwrap();
        assert!((l - 4.0).abs() < 1e-6);
        let i = DenseMatrix::identity(3);
        assert!((i.gram_spectral_radius(1e-8, 10_000).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn power_iteration_zero() {
        let z = DenseMatrix::new(1, 1, vec![0.0]).unwrap();
        assert_eq!(z.gram_spectral_radius(1e-8, 10_000).unwrap(), 0.0);
    }

    #[test]
    fn power_iteration_dense_against_closed_form() {
        // [[2,1],[1,2]] has eigenvalues 3 and 1, so A^T A has top eigenvalue 9.
        let a = DenseMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let l = a.gram_spectral_radius(1e-10, 10_000).unwrap();
        assert!((l - 9.0).abs() < 1e-8, "{l}");
    }

    #[test]
    fn parse_reports_line_numbers() {
        let p = Path::new("m.txt");
        let m = DenseMatrix::parse("# header\n1 2\n\n3 4\n", p).unwrap();
        assert_eq!((m.rows(), m.cols()), (2, 2));
        assert_eq!(m.get(1, 0), 3.0);
        let err = DenseMatrix::parse("1 2\n3\n", p).unwrap_err();
        assert!(err.to_string().contains("m.txt:2"), "{err}");
        let err = DenseMatrix::parse("1 x\n", p).unwrap_err();
        assert!(err.to_string().contains(":1:"), "{err}");
    }

    #[test]
    fn products() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]).unwrap();
        assert_eq!(a.mul_vec(&[1.0, 1.0]), vec![3.0, 7.0, 11.0]);
        assert_eq!(a.tr_mul_vec(&[1.0, 0.0, 1.0]), vec![6.0, 8.0]);
    }
}
