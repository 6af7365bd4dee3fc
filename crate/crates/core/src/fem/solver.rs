//! Banded LU factorization (no pivoting) for the systems arising here: the
//! mass-plus-stiffness blocks are diagonally dominant or SPD-like, and the
//! lexicographic P1 numbering keeps the bandwidth at `M_s − 1` in 2D.

use super::sparse::SparseMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    bw: usize,
    /// Row `i` holds columns `i − bw ..= i + bw` at offsets `0 ..= 2 bw`.
    band: Vec<f64>,
}

impl BandedLu {
    pub fn factor(a: &SparseMatrix) -> Result<Self> {
        let n = a.dim();
        let bw = a.bandwidth();
        let width = 2 * bw + 1;
        let mut band = vec![0.0; n * width];
        for i in 0..n {
            for (j, v) in a.row(i) {
                band[i * width + j + bw - i] = v;
            }
        }
        let scale = a.max_abs().max(f64::MIN_POSITIVE);
        for k in 0..n {
            let pivot = band[k * width + bw];
            if !pivot.is_finite() || pivot.abs() <= 1e-14 * scale {
                return Err(Error::ZeroPivot { row: k, pivot });
            }
            let last = (k + bw).min(n - 1);
            for i in k + 1..=last {
                let lik = band[i * width + k + bw - i] / pivot;
                band[i * width + k + bw - i] = lik;
                if lik == 0.0 {
                    continue;
                }
                for j in k + 1..=last {
                    let ukj = band[k * width + j + bw - k];
                    band[i * width + j + bw - i] -= lik * ukj;
                }
            }
        }
        Ok(Self { n, bw, band })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        if rhs.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: rhs.len(),
            });
        }
        let (n, bw) = (self.n, self.bw);
        let width = 2 * bw + 1;
        let mut x = rhs.to_vec();
        for i in 0..n {
            let first = i.saturating_sub(bw);
            let mut acc = x[i];
            for j in first..i {
                acc -= self.band[i * width + j + bw - i] * x[j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let last = (i + bw).min(n - 1);
            let mut acc = x[i];
            for j in i + 1..=last {
                acc -= self.band[i * width + j + bw - i] * x[j];
            }
            x[i] = acc / self.band[i * width + bw];
        }
        Ok(x)
    }

    /// Solves `a x = rhs` with up to three steps of iterative refinement,
    /// and checks `‖a x − rhs‖∞ <= 1e-13 (1 + ‖rhs‖∞)`.
    pub fn solve_checked(&self, a: &SparseMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
        let bound = 1e-13 * (1.0 + inf_norm(rhs));
        let mut x = self.solve(rhs)?;
        let mut residual = residual_norm(a, &x, rhs);
        for _ in 0..3 {
            if residual <= bound {
                break;
            }
            let r: Vec<f64> = rhs.iter().zip(a.mul_vec(&x)).map(|(b, ax)| b - ax).collect();
            let dx = self.solve(&r)?;
            let candidate: Vec<f64> = x.iter().zip(&dx).map(|(xi, di)| xi + di).collect();
            let cand_res = residual_norm(a, &candidate, rhs);
            if cand_res >= residual {
                break;
            }
            x = candidate;
            residual = cand_res;
        }
        if residual > bound {
            return Err(Error::SolveAccuracy { residual, bound });
        }
        Ok(x)
    }
}

pub(crate) fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn residual_norm(a: &SparseMatrix, x: &[f64], rhs: &[f64]) -> f64 {
    a.mul_vec(x)
        .iter()
        .zip(rhs)
        .fold(0.0f64, |m, (ax, b)| m.max((ax - b).abs()))
}

/// Solves `a x = rhs`, with `‖a x − rhs‖∞ <= 1e-13 (1 + ‖rhs‖∞)` on success.
pub fn solve_sparse(a: &SparseMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    BandedLu::factor(a)?.solve_checked(a, rhs)
}
