//! L1 approximation of the Caputo derivative on a nonuniform grid.
//!
//! With `d_{n,k} = ((t_n − t_{n−k})^{1−α} − (t_n − t_{n−k+1})^{1−α}) / τ_{n−k+1}`
//! the discrete operator is
//!
//! ```text
//! D_N^α v^n = ( d_{n,1} v^n − d_{n,n} v^0 + Σ_{k=1}^{n−1} (d_{n,k+1} − d_{n,k}) v^{n−k} ) / Γ(2−α).
//! ```

use crate::error::{Error, Result};
use crate::meshes::TimeGrid;

/// Γ(x) for real `x`.
#[inline]
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// `(b + gap)^β − b^β` for `b >= 0`, `gap > 0`, without cancellation when
/// `gap << b`. The gap is passed separately because `t_n − t_{n−k}` and
/// `t_n − t_{n−k+1}` can round to the same float on strongly graded grids.
fn pow_diff(b: f64, gap: f64, beta: f64) -> f64 {
    if b > 0.0 && gap < b {
        b.powf(beta) * (beta * (gap / b).ln_1p()).exp_m1()
    } else {
        (b + gap).powf(beta) - b.powf(beta)
    }
}

/// Row `d_{n,1..n}` of the L1 weights at time level `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct L1Row {
    level: usize,
    alpha: f64,
    d: Vec<f64>,
}

impl L1Row {
    /// Weights for level `n` (`1 <= n <= N`) and order `0 < α < 1`.
    pub fn new(grid: &TimeGrid, n: usize, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if n == 0 || n > grid.steps() {
            return Err(Error::InvalidArgument(format!(
                "time level {n} outside 1..={}",
                grid.steps()
            )));
        }
        let beta = 1.0 - alpha;
        let tn = grid.t(n);
        let mut d = Vec::with_capacity(n);
        d.push(grid.tau(n).powf(-alpha));
        for k in 2..=n {
            let near = tn - grid.t(n - k + 1);
            let tau = grid.tau(n - k + 1);
            let dk = pow_diff(near, tau, beta) / tau;
            // Neighbouring weights can agree below one ulp on strongly graded
            // grids; keep the exact ordering d_{n,k} <= d_{n,k−1}.
            let prev = d[k - 2];
            debug_assert!(dk <= prev * (1.0 + 1e-12), "d_{{{n},{k}}} = {dk} > {prev}");
            d.push(dk.min(prev));
        }
        Ok(Self { level: n, alpha, d })
    }

    /// Builds a row from explicit weights; used to feed perturbed rows to the
    /// verification checks.
    pub fn from_weights(alpha: f64, d: Vec<f64>) -> Self {
        Self {
            level: d.len(),
            alpha,
            d,
        }
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `d_{n,k}` for `1 <= k <= n`.
    #[inline]
    pub fn d(&self, k: usize) -> f64 {
        self.d[k - 1]
    }

    pub fn weights(&self) -> &[f64] {
        &self.d
    }

    /// `D_N^α v^n` for a scalar history `v^0..v^n`.
    pub fn apply(&self, history: &[f64]) -> Result<f64> {
        let n = self.level;
        if history.len() != n + 1 {
            return Err(Error::LengthMismatch {
                expected: n + 1,
                got: history.len(),
            });
        }
        let mut acc = self.d(1) * history[n] - self.d(n) * history[0];
        for k in 1..n {
            acc += (self.d(k + 1) - self.d(k)) * history[n - k];
        }
        Ok(acc / gamma(2.0 - self.alpha))
    }

    /// Componentwise `D_N^α` for a history of equally sized vectors.
    pub fn apply_vec(&self, history: &[Vec<f64>]) -> Result<Vec<f64>> {
        let n = self.level;
        if history.len() != n + 1 {
            return Err(Error::LengthMismatch {
                expected: n + 1,
                got: history.len(),
            });
        }
        let len = history[0].len();
        if let Some(bad) = history.iter().find(|v| v.len() != len) {
            return Err(Error::LengthMismatch {
                expected: len,
                got: bad.len(),
            });
        }
        let g = gamma(2.0 - self.alpha);
        let mut out: Vec<f64> = history[n]
            .iter()
            .zip(&history[0])
            .map(|(vn, v0)| self.d(1) * vn - self.d(n) * v0)
            .collect();
        for k in 1..n {
            let w = self.d(k + 1) - self.d(k);
            for (o, v) in out.iter_mut().zip(&history[n - k]) {
                *o += w * v;
            }
        }
        out.iter_mut().for_each(|o| *o /= g);
        Ok(out)
    }
}

pub fn d_row(grid: &TimeGrid, n: usize, alpha: f64) -> Result<L1Row> {
    L1Row::new(grid, n, alpha)
}

/// `D_N^α v^n` where `values` holds `v^0..v^n`.
pub fn discrete_caputo(values: &[f64], row: &L1Row) -> Result<f64> {
    row.apply(values)
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "fractional order must lie in (0, 1), got {alpha}"
        )))
    }
}

/// Complementary convolution coefficients `p^{(n)}_{n−i}`, `i = 1..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct PCoefficients {
    level: usize,
    /// `p[j] = p^{(n)}_j` for `j = 0..n−1`.
    p: Vec<f64>,
}

impl PCoefficients {
    pub fn level(&self) -> usize {
        self.level
    }

    /// `p^{(n)}_j`, `0 <= j < n`.
    pub fn get(&self, j: usize) -> f64 {
        self.p[j]
    }

    pub fn values(&self) -> &[f64] {
        &self.p
    }

    /// `Σ_{s=1}^{n} p^{(n)}_{n−s} w(s)`.
    pub fn weighted_sum(&self, w: impl Fn(usize) -> f64) -> f64 {
        let n = self.level;
        (1..=n).map(|s| self.p[n - s] * w(s)).sum()
    }
}

/// Computes `p^{(n)}` for every level `n = 1..=N` of `grid`.
///
/// The recursion runs `i = n, n−1, …, 1`:
/// `p^{(n)}_{n−i} = Γ(2−α) τ_i^α Σ_{k=i+1}^{n} (b^{(k)}_{k−i−1} − b^{(k)}_{k−i}) p^{(n)}_{n−k}`
/// with `b^{(k)}_{k−j} = d_{k,k−j+1} / Γ(2−α)`, so the Γ factors cancel.
/// Cost is `O(N³)`; this is an analysis tool, not part of the solver.
pub fn p_coefficients_all(grid: &TimeGrid, alpha: f64) -> Result<Vec<PCoefficients>> {
    let rows = rows_upto(grid, alpha, grid.steps())?;
    Ok((1..=grid.steps()).map(|n| p_level(grid, &rows, n)).collect())
}

/// `p^{(n)}` for a single level.
pub fn p_coefficients(grid: &TimeGrid, alpha: f64, n: usize) -> Result<PCoefficients> {
    if n == 0 || n > grid.steps() {
        return Err(Error::InvalidArgument(format!(
            "time level {n} outside 1..={}",
            grid.steps()
        )));
    }
    let rows = rows_upto(grid, alpha, n)?;
    Ok(p_level(grid, &rows, n))
}

fn rows_upto(grid: &TimeGrid, alpha: f64, upto: usize) -> Result<Vec<L1Row>> {
    check_alpha(alpha)?;
    (1..=upto).map(|k| L1Row::new(grid, k, alpha)).collect()
}

fn p_level(grid: &TimeGrid, rows: &[L1Row], n: usize) -> PCoefficients {
    let alpha = rows[0].alpha;
    let mut p = vec![0.0; n];
    p[0] = gamma(2.0 - alpha) * grid.tau(n).powf(alpha);
    for i in (1..n).rev() {
        let mut acc = 0.0;
        for k in i + 1..=n {
            let row = &rows[k - 1];
            acc += (row.d(k - i) - row.d(k - i + 1)) * p[n - k];
        }
        p[n - i] = grid.tau(i).powf(alpha) * acc;
    }
    PCoefficients { level: n, p }
}

/// Local truncation errors `ζ^n = D^α u(t_n) − D_N^α u(t_n)` for `n = 1..=N`.
pub fn truncation_probe(
    exact_caputo: impl Fn(f64) -> f64,
    u: impl Fn(f64) -> f64,
    grid: &TimeGrid,
    alpha: f64,
) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    let samples: Vec<f64> = grid.nodes().iter().map(|&t| u(t)).collect();
    (1..=grid.steps())
        .map(|n| {
            let row = L1Row::new(grid, n, alpha)?;
            Ok(exact_caputo(grid.t(n)) - row.apply(&samples[..=n])?)
        })
        .collect()
}
