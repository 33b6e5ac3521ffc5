//! Small dense complex matrices with LU solves, used by the scattering and
//! composition machinery. Graphs here have at most a few dozen vertices, so
//! a straightforward partial-pivot factorization is all that is needed.

use num_complex::Complex64 as C64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix is singular (zero pivot at row {0})")]
    Singular(usize),
    #[error("dimension mismatch: {0}")]
    Shape(String),
}

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let r = rows.len();
        let c = if r > 0 { rows[0].len() } else { 0 };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        CMatrix { rows: r, cols: c, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn transpose(&self) -> CMatrix {
        let mut t = CMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn conj_transpose(&self) -> CMatrix {
        let mut t = CMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].conj();
            }
        }
        t
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self[(i, l)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(l, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "matvec shape mismatch");
        let mut out = vec![C64::new(0.0, 0.0); self.rows];
        for i in 0..self.rows {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..self.cols {
                acc += self[(i, j)] * v[j];
            }
            out[i] = acc;
        }
        out
    }

    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a -= b;
        }
        out
    }

    pub fn add(&self, other: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        out
    }

    pub fn scale(&self, s: C64) -> CMatrix {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a *= s;
        }
        out
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Operator norm (largest singular value) by power iteration on M^H M.
    pub fn operator_norm(&self) -> f64 {
        if self.rows == 0 || self.cols == 0 {
            return 0.0;
        }
        let mh = self.conj_transpose();
        let n = self.cols;
        // Deterministic start with nonuniform components so it is not
        // orthogonal to the dominant singular vector by symmetry.
        let mut v: Vec<C64> = (0..n)
            .map(|i| C64::new(1.0 + (i as f64) * 0.137, 0.03 * (i as f64 + 1.0)))
            .collect();
        normalize(&mut v);
        let mut lambda = 0.0f64;
        for _ in 0..10_000 {
            let w = mh.mul_vec(&self.mul_vec(&v));
            let new_lambda = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if new_lambda == 0.0 {
                return 0.0;
            }
            v = w;
            normalize(&mut v);
            if (new_lambda - lambda).abs() <= 1e-12 * new_lambda.max(1.0) {
                lambda = new_lambda;
                break;
            }
            lambda = new_lambda;
        }
        lambda.sqrt()
    }

    /// Solve `self * x = rhs` for each right-hand side column, returning the
    /// solutions and a rough condition estimate (pivot-magnitude ratio).
    pub fn lu_solve_many(&self, rhs: &[Vec<C64>]) -> Result<(Vec<Vec<C64>>, f64), LinalgError> {
        if self.rows != self.cols {
            return Err(LinalgError::Shape(format!(
                "square matrix required, got {}x{}",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        let mut lu = self.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut pivot_max = 0.0f64;
        let mut pivot_min = f64::INFINITY;
        for col in 0..n {
            let mut best = col;
            let mut best_mag = lu[perm[col] * n + col].norm();
            for row in col + 1..n {
                let mag = lu[perm[row] * n + col].norm();
                if mag > best_mag {
                    best = row;
                    best_mag = mag;
                }
            }
            if best_mag == 0.0 {
                return Err(LinalgError::Singular(col));
            }
            perm.swap(col, best);
            pivot_max = pivot_max.max(best_mag);
            pivot_min = pivot_min.min(best_mag);
            let p = perm[col];
            let pivot = lu[p * n + col];
            for row in col + 1..n {
                let r = perm[row];
                let factor = lu[r * n + col] / pivot;
                lu[r * n + col] = factor;
                for j in col + 1..n {
                    let v = lu[p * n + j];
                    lu[r * n + j] -= factor * v;
                }
            }
        }
        let cond = if pivot_min > 0.0 { pivot_max / pivot_min } else { f64::INFINITY };
        let mut solutions = Vec::with_capacity(rhs.len());
        for b in rhs {
            assert_eq!(b.len(), n, "rhs length mismatch");
            let mut y = vec![C64::new(0.0, 0.0); n];
            for i in 0..n {
                let mut acc = b[perm[i]];
                for j in 0..i {
                    acc -= lu[perm[i] * n + j] * y[j];
                }
                y[i] = acc;
            }
            for i in (0..n).rev() {
                let mut acc = y[i];
                for j in i + 1..n {
                    acc -= lu[perm[i] * n + j] * y[j];
                }
                y[i] = acc / lu[perm[i] * n + i];
            }
            solutions.push(y);
        }
        Ok((solutions, cond))
    }

    pub fn lu_solve(&self, rhs: &[C64]) -> Result<(Vec<C64>, f64), LinalgError> {
        let (mut sols, cond) = self.lu_solve_many(&[rhs.to_vec()])?;
        Ok((sols.pop().unwrap(), cond))
    }

    pub fn inverse(&self) -> Result<CMatrix, LinalgError> {
        let n = self.rows;
        let rhs: Vec<Vec<C64>> = (0..n)
            .map(|i| {
                let mut e = vec![C64::new(0.0, 0.0); n];
                e[i] = C64::new(1.0, 0.0);
                e
            })
            .collect();
        let (cols, _) = self.lu_solve_many(&rhs)?;
        let mut inv = CMatrix::zeros(n, n);
        for (j, col) in cols.iter().enumerate() {
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        Ok(inv)
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

fn normalize(v: &mut [C64]) {
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if n > 0.0 {
        for z in v.iter_mut() {
            *z /= n;
        }
    }
}

/// Determinant of a real matrix as (sign, log |det|), by partial-pivot LU.
/// Returns sign 0.0 for an exactly singular matrix. The log form keeps the
/// bound-state scan stable when determinants over- or underflow.
pub fn real_det_sign_log(a: &[f64], n: usize) -> (f64, f64) {
    assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    let mut sign = 1.0f64;
    let mut log_abs = 0.0f64;
    for col in 0..n {
        let mut best = col;
        let mut best_mag = m[col * n + col].abs();
        for row in col + 1..n {
            let mag = m[row * n + col].abs();
            if mag > best_mag {
                best = row;
                best_mag = mag;
            }
        }
        if best_mag == 0.0 {
            return (0.0, f64::NEG_INFINITY);
        }
        if best != col {
            for j in 0..n {
                m.swap(col * n + j, best * n + j);
            }
            sign = -sign;
        }
        let pivot = m[col * n + col];
        sign *= pivot.signum();
        log_abs += pivot.abs().ln();
        for row in col + 1..n {
            let factor = m[row * n + col] / pivot;
            for j in col + 1..n {
                m[row * n + j] -= factor * m[col * n + j];
            }
        }
    }
    (sign, log_abs)
}

/// Solve a real linear system in place (partial pivoting).
pub fn real_solve(a: &[f64], b: &[f64], n: usize) -> Result<Vec<f64>, LinalgError> {
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    for col in 0..n {
        let mut best = col;
        let mut best_mag = m[perm[col] * n + col].abs();
        for row in col + 1..n {
            let mag = m[perm[row] * n + col].abs();
            if mag > best_mag {
                best = row;
                best_mag = mag;
            }
        }
        if best_mag == 0.0 {
            return Err(LinalgError::Singular(col));
        }
        perm.swap(col, best);
        let p = perm[col];
        let pivot = m[p * n + col];
        for row in col + 1..n {
            let r = perm[row];
            let factor = m[r * n + col] / pivot;
            m[r * n + col] = factor;
            for j in col + 1..n {
                m[r * n + j] -= factor * m[p * n + j];
            }
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut acc = x[perm[i]];
        for j in 0..i {
            acc -= m[perm[i] * n + j] * y[j];
        }
        y[i] = acc;
    }
    for i in (0..n).rev() {
        let mut acc = y[i];
        for j in i + 1..n {
            acc -= m[perm[i] * n + j] * y[j];
        }
        y[i] = acc / m[perm[i] * n + i];
    }
    x.copy_from_slice(&y);
    Ok(x)
}
