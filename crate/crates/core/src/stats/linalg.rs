//! Householder QR for tall dense systems.

/// Relative threshold on `|R_jj|` below which column `j` counts as dependent.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct Qr {
    rows: usize,
    cols: usize,
    /// Column-major; R in the upper triangle, Householder vectors below it.
    a: Vec<f64>,
    tau: Vec<f64>,
    diag: Vec<f64>,
    scale: f64,
}

impl Qr {
    /// Factorizes a row-major `n x p` matrix with `n >= p`.
    pub fn new(x: &[Vec<f64>]) -> Self {
        let rows = x.len();
        let cols = x.first().map_or(0, Vec::len);
        let mut a = vec![0.0; rows * cols];
        for (i, row) in x.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                a[j * rows + i] = v;
            }
        }
        let scale = (0..cols)
            .map(|j| {
                a[j * rows..(j + 1) * rows]
                    .iter()
                    .map(|v| v * v)
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max);
        let mut tau = vec![0.0; cols];
        let mut diag = vec![0.0; cols];
        for j in 0..cols.min(rows) {
            let col = j * rows;
            let norm = a[col + j..col + rows]
                .iter()
                .map(|v| v * v)
                .sum::<f64>()
                .sqrt();
            if norm == 0.0 {
                diag[j] = 0.0;
                continue;
            }
            let alpha = if a[col + j] > 0.0 { -norm } else { norm };
            let v0 = a[col + j] - alpha;
            // v = (1, a[j+1..]/v0), tau = -v0/alpha
            for i in (j + 1)..rows {
                a[col + i] /= v0;
            }
            tau[j] = -v0 / alpha;
            a[col + j] = alpha;
            diag[j] = alpha;
            for k in (j + 1)..cols {
                let ck = k * rows;
                let mut dot = a[ck + j];
                for i in (j + 1)..rows {
                    dot += a[col + i] * a[ck + i];
                }
                dot *= tau[j];
                a[ck + j] -= dot;
                for i in (j + 1)..rows {
                    a[ck + i] -= dot * a[col + i];
                }
            }
        }
        Self {
            rows,
            cols,
            a,
            tau,
            diag,
            scale,
        }
    }

    /// Columns whose pivot is negligible relative to the largest column norm.
    pub fn dependent_columns(&self) -> Vec<usize> {
        (0..self.cols)
            .filter(|&j| {
                j >= self.rows || self.diag[j].abs() <= RANK_TOL * self.scale.max(f64::MIN_POSITIVE)
            })
            .collect()
    }

    /// `Q^T y`.
    fn apply_qt(&self, y: &[f64]) -> Vec<f64> {
        let mut b = y.to_vec();
        for j in 0..self.cols.min(self.rows) {
            if self.tau[j] == 0.0 {
                continue;
            }
            let col = j * self.rows;
            let mut dot = b[j];
            for i in (j + 1)..self.rows {
                dot += self.a[col + i] * b[i];
            }
            dot *= self.tau[j];
            b[j] -= dot;
            for i in (j + 1)..self.rows {
                b[i] -= dot * self.a[col + i];
            }
        }
        b
    }

    fn r(&self, i: usize, j: usize) -> f64 {
        self.a[j * self.rows + i]
    }

    /// Least-squares solution of `X b = y` (assumes full column rank).
    pub fn solve(&self, y: &[f64]) -> Vec<f64> {
        let qty = self.apply_qt(y);
        let p = self.cols;
        let mut b = vec![0.0; p];
        for i in (0..p).rev() {
            let mut s = qty[i];
            for j in (i + 1)..p {
                s -= self.r(i, j) * b[j];
            }
            b[i] = s / self.r(i, i);
        }
        b
    }

    /// `(X^T X)^{-1} = R^{-1} R^{-T}`, row-major `p x p`.
    pub fn xtx_inverse(&self) -> Vec<Vec<f64>> {
        let p = self.cols;
        let mut rinv = vec![vec![0.0; p]; p];
        for c in 0..p {
            for i in (0..=c).rev() {
                let mut s = if i == c { 1.0 } else { 0.0 };
                for j in (i + 1)..=c {
                    s -= self.r(i, j) * rinv[j][c];
                }
                rinv[i][c] = s / self.r(i, i);
            }
        }
        let mut out = vec![vec![0.0; p]; p];
        for i in 0..p {
            for j in 0..p {
                out[i][j] = (i.max(j)..p).map(|k| rinv[i][k] * rinv[j][k]).sum();
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_square_and_tall() {
        let x = vec![vec![2.0, 1.0], vec![1.0, 3.0]];
        let b = Qr::new(&x).solve(&[5.0, 10.0]);
        assert!((b[0] - 1.0).abs() < 1e-12 && (b[1] - 3.0).abs() < 1e-12);

        let x = vec![
            vec![1.0, 0.0],
            vec![1.0, 1.0],
            vec![1.0, 2.0],
            vec![1.0, 3.0],
        ];
        let qr = Qr::new(&x);
        let inv = qr.xtx_inverse();
        // X^T X = [[4, 6], [6, 14]], det 20
        assert!((inv[0][0] - 14.0 / 20.0).abs() < 1e-12);
        assert!((inv[0][1] + 6.0 / 20.0).abs() < 1e-12);
        assert!((inv[1][1] - 4.0 / 20.0).abs() < 1e-12);
    }

    #[test]
    fn flags_dependent_column() {
        let x = vec![
            vec![1.0, 1.0, 2.0],
            vec![1.0, 2.0, 4.0],
            vec![1.0, 3.0, 6.0],
            vec![1.0, 5.0, 10.0],
        ];
        assert_eq!(Qr::new(&x).dependent_columns(), vec![2]);
    }
}
