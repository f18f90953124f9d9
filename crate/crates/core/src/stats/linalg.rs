//! Householder QR for least squares.

use alloc::vec;
use alloc::vec::Vec;

/// Relative size below which a column's residual norm marks it collinear.
pub const RANK_TOLERANCE: f64 = 1e-9;

/// QR factorization of a tall matrix stored column-major.
pub struct Qr {
    /// Householder vectors below the diagonal, `R` on and above it.
    cols: Vec<Vec<f64>>,
    /// Diagonal of `R`.
    diag: Vec<f64>,
    rows: usize,
}

/// A column found to be (numerically) a combination of earlier ones.
#[derive(Debug, Clone, PartialEq)]
pub struct Collinear {
    pub column: usize,
    /// Earlier columns taking part in the combination.
    pub with: Vec<usize>,
}

impl Qr {
    /// Factorizes `cols` (each of length `rows`), failing at the first
    /// column whose remaining norm is below [`RANK_TOLERANCE`] times its
    /// original norm.
    pub fn new(mut cols: Vec<Vec<f64>>, rows: usize) -> Result<Self, Collinear> {
        let k = cols.len();
        let mut diag = vec![0.0; k];
        for j in 0..k {
            let orig = norm(&cols[j]);
            let alpha = norm(&cols[j][j.min(rows)..]);
            if j >= rows || orig == 0.0 || alpha <= RANK_TOLERANCE * orig {
                return Err(Collinear { column: j, with: Self::combination(&cols, &diag, j, rows) });
            }
            let sign = if cols[j][j] >= 0.0 { 1.0 } else { -1.0 };
            let r_jj = -sign * alpha;
            // v = x - r_jj e_j, stored in place and scaled so that v_j = 1
            let v0 = cols[j][j] - r_jj;
            for i in j + 1..rows {
                cols[j][i] /= v0;
            }
            cols[j][j] = 1.0;
            let tau = -v0 / r_jj;
            let (head, tail) = cols.split_at_mut(j + 1);
            let v = &head[j];
            for c in tail.iter_mut() {
                let s: f64 = (j..rows).map(|i| v[i] * c[i]).sum::<f64>() * tau;
                for i in j..rows {
                    c[i] -= s * v[i];
                }
            }
            cols[j][j] = tau;
            diag[j] = r_jj;
        }
        Ok(Self { cols, diag, rows })
    }

    fn combination(cols: &[Vec<f64>], diag: &[f64], j: usize, rows: usize) -> Vec<usize> {
        // coefficients of column j on columns 0..j through the partial R
        let m = j.min(rows);
        let mut coef = vec![0.0; m];
        for i in (0..m).rev() {
            let mut s = cols[j][i];
            for l in i + 1..m {
                s -= cols[l][i] * coef[l];
            }
            coef[i] = s / diag[i];
        }
        let scale = coef.iter().fold(0.0f64, |a, c| a.max(c.abs()));
        (0..m).filter(|&i| coef[i].abs() > 1e-8 * scale.max(1e-300)).collect()
    }

    pub fn ncols(&self) -> usize {
        self.diag.len()
    }

    /// `Q^T y`.
    pub fn qt_mul(&self, y: &[f64]) -> Vec<f64> {
        let mut y = y.to_vec();
        for j in 0..self.ncols() {
            let v = &self.cols[j];
            let tau = v[j];
            let mut s = y[j];
            for i in j + 1..self.rows {
                s += v[i] * y[i];
            }
            s *= tau;
            y[j] -= s;
            for i in j + 1..self.rows {
                y[i] -= s * v[i];
            }
        }
        y
    }

    fn r(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.diag[i]
        } else {
            self.cols[j][i]
        }
    }

    /// Least-squares solution of `X b = y`.
    pub fn solve(&self, y: &[f64]) -> Vec<f64> {
        let qty = self.qt_mul(y);
        let k = self.ncols();
        let mut b = vec![0.0; k];
        for i in (0..k).rev() {
            let mut s = qty[i];
            for j in i + 1..k {
                s -= self.r(i, j) * b[j];
            }
            b[i] = s / self.diag[i];
        }
        b
    }

    /// Diagonal of `(X^T X)^{-1} = R^{-1} R^{-T}`.
    pub fn inverse_gram_diag(&self) -> Vec<f64> {
        let k = self.ncols();
        // columns of R^{-1}, upper triangular
        let mut rinv = vec![vec![0.0; k]; k];
        for c in 0..k {
            rinv[c][c] = 1.0 / self.diag[c];
            for i in (0..c).rev() {
                let mut s = 0.0;
                for l in i + 1..=c {
                    s += self.r(i, l) * rinv[c][l];
                }
                rinv[c][i] = -s / self.diag[i];
            }
        }
        (0..k).map(|i| (i..k).map(|c| rinv[c][i] * rinv[c][i]).sum()).collect()
    }
}

fn norm(x: &[f64]) -> f64 {
    let scale = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    scale * libm::sqrt(x.iter().map(|v| (v / scale) * (v / scale)).sum::<f64>())
}
