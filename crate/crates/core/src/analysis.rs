//! Error norms, observed orders and convergence-table records.

use crate::fem::{local_values, Element, QuadratureRule};
use crate::manufactured::ExactSolution;
use crate::meshes::{SpatialMesh, TimeGrid};

/// `‖u_ex(·, t) − U_h‖_{L²}` by the norm-quadrature rule.
pub fn l2_error(mesh: &SpatialMesh, u: &[f64], exact: impl Fn([f64; 2]) -> f64) -> f64 {
    let rule = QuadratureRule::norm_for(mesh);
    let mut acc = 0.0;
    for e in 0..mesh.num_elements() {
        let el = Element::new(mesh, e);
        let uloc = local_values(mesh, &el, u);
        for (r, w) in rule.iter() {
            let phi = el.basis(r);
            let uh: f64 = (0..el.count).map(|a| uloc[a] * phi[a]).sum();
            let diff = exact(el.map(r)) - uh;
            acc += w * el.det * diff * diff;
        }
    }
    acc.sqrt()
}

/// `‖∇(u_ex(·, t) − U_h)‖_{L²}`.
pub fn h1_semi_error(mesh: &SpatialMesh, u: &[f64], grad_exact: impl Fn([f64; 2]) -> [f64; 2]) -> f64 {
    let rule = QuadratureRule::norm_for(mesh);
    let mut acc = 0.0;
    for e in 0..mesh.num_elements() {
        let el = Element::new(mesh, e);
        let uloc = local_values(mesh, &el, u);
        let mut gh = [0.0; 2];
        for a in 0..el.count {
            gh[0] += uloc[a] * el.grads[a][0];
            gh[1] += uloc[a] * el.grads[a][1];
        }
        for (r, w) in rule.iter() {
            let g = grad_exact(el.map(r));
            let (dx, dy) = (g[0] - gh[0], g[1] - gh[1]);
            acc += w * el.det * (dx * dx + dy * dy);
        }
    }
    acc.sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SpatialNorm {
    L2,
    H1Semi,
}

/// `max_{1<=n<=N}` of the spatial error norm, with the maximizing level.
pub fn max_over_time<E: ExactSolution + ?Sized>(
    mesh: &SpatialMesh,
    grid: &TimeGrid,
    history: &[Vec<f64>],
    exact: &E,
    norm: SpatialNorm,
) -> (f64, usize) {
    let mut best = (0.0, 0);
    for (n, u) in history.iter().enumerate().skip(1) {
        let t = grid.t(n);
        let e = match norm {
            SpatialNorm::L2 => l2_error(mesh, u, |x| exact.value(x, t)),
            SpatialNorm::H1Semi => h1_semi_error(mesh, u, |x| exact.gradient(x, t)),
        };
        if e > best.0 || best.1 == 0 {
            best = (e, n);
        }
    }
    best
}

/// Largest entry with its index.
pub fn max_with_index(values: &[f64]) -> Option<(f64, usize)> {
    values
        .iter()
        .copied()
        .enumerate()
        .fold(None, |best, (i, v)| match best {
            Some((b, _)) if b >= v => best,
            _ => Some((v, i)),
        })
}

/// `order_i = ln(e_i/e_{i+1}) / ln(m_{i+1}/m_i)` for consecutive pairs;
/// `None` where an error is not positive or a ratio is degenerate.
pub fn observed_order(errors: &[f64], resolutions: &[f64]) -> Vec<Option<f64>> {
    assert_eq!(errors.len(), resolutions.len());
    errors
        .windows(2)
        .zip(resolutions.windows(2))
        .map(|(e, m)| {
            if e[0] > 0.0 && e[1] > 0.0 && m[1] > m[0] && m[0] > 0.0 {
                let p = (e[0] / e[1]).ln() / (m[1] / m[0]).ln();
                p.is_finite().then_some(p)
            } else {
                None
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NormTag {
    /// `max_n ‖e^n‖_{L²}` in a temporal sweep.
    LinfTimeL2,
    /// `max_n ‖e^n‖_{L²}` in a spatial sweep.
    L2FinalFamily,
    /// `max_n ‖∇e^n‖_{L²}`.
    H1Semi,
}

impl NormTag {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::LinfTimeL2 => "Linf_time_L2",
            Self::L2FinalFamily => "L2_final_family",
            Self::H1Semi => "H1_semi",
        }
    }

    pub fn spatial(self) -> SpatialNorm {
        match self {
            Self::H1Semi => SpatialNorm::H1Semi,
            _ => SpatialNorm::L2,
        }
    }
}

/// One row of a convergence table.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRecord {
    pub example: u8,
    pub alpha: f64,
    pub r: f64,
    pub n_steps: usize,
    pub cells: usize,
    pub norm: NormTag,
    pub error: f64,
    /// Order against the next finer row; `None` on the finest row.
    pub order: Option<f64>,
}

pub const CSV_HEADER: &str = "example,alpha,r,N,Ms,norm,error,order";

/// `{:.9e}`: ten significant digits.
pub fn fmt_sig10(v: f64) -> String {
    format!("{v:.9e}")
}

impl ErrorRecord {
    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.example,
            fmt_sig10(self.alpha),
            fmt_sig10(self.r),
            self.n_steps,
            self.cells,
            self.norm.as_str(),
            fmt_sig10(self.error),
            self.order.map(fmt_sig10).unwrap_or_default()
        )
    }
}

pub fn records_to_csv(records: &[ErrorRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.to_csv_row());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zero_solution_error_is_sine_norm() {
        let mesh = SpatialMesh::interval(PI, 64).unwrap();
        let u = vec![0.0; mesh.num_dofs()];
        let e = l2_error(&mesh, &u, |x| x[0].sin());
        assert!((e - (PI / 2.0).sqrt()).abs() < 1e-6);
        assert_eq!(l2_error(&mesh, &u, |_| 0.0), 0.0);
        assert_eq!(h1_semi_error(&mesh, &u, |_| [0.0, 0.0]), 0.0);
    }

    #[test]
    fn interpolation_error_rates() {
        let errs: Vec<(f64, f64)> = [16, 32, 64]
            .iter()
            .map(|&c| {
                let mesh = SpatialMesh::interval(PI, c).unwrap();
                let u = mesh.interpolate(|x| x[0].sin());
                (
                    l2_error(&mesh, &u, |x| x[0].sin()),
                    h1_semi_error(&mesh, &u, |x| [x[0].cos(), 0.0]),
                )
            })
            .collect();
        for w in errs.windows(2) {
            assert!(w[0].0 > 0.0 && w[0].1 > 0.0);
            assert!(((w[0].0 / w[1].0).log2() - 2.0).abs() < 0.05);
            assert!(((w[0].1 / w[1].1).log2() - 1.0).abs() < 0.05);
        }
        let errs2d: Vec<f64> = [8, 16]
            .iter()
            .map(|&c| {
                let mesh = SpatialMesh::unit_square(c).unwrap();
                let f = |x: [f64; 2]| (PI * x[0]).sin() * (PI * x[1]).sin();
                l2_error(&mesh, &mesh.interpolate(f), f)
            })
            .collect();
        assert!(((errs2d[0] / errs2d[1]).log2() - 2.0).abs() < 0.1);
    }

    #[test]
    fn orders() {
        let o = observed_order(&[4e-2, 1e-2], &[64.0, 128.0]);
        assert!((o[0].unwrap() - 2.0).abs() < 1e-14);
        let ms = [10.0, 17.0, 40.0];
        let e: Vec<f64> = ms.iter().map(|m: &f64| 3.7 * m.powf(-1.3)).collect();
        for p in observed_order(&e, &ms) {
            assert!((p.unwrap() - 1.3).abs() < 1e-12);
        }
        let o = observed_order(&[3.40e-4, 1.15e-4], &[64.0, 128.0]);
        assert!((o[0].unwrap() - 1.5639).abs() < 1e-3);
        assert_eq!(observed_order(&[0.0, 1.0], &[1.0, 2.0]), vec![None]);
    }

    #[test]
    fn max_helpers() {
        assert_eq!(max_with_index(&[0.0, 0.0]), Some((0.0, 0)));
        assert_eq!(max_with_index(&[0.0, 0.0, 5.0, 0.0]), Some((5.0, 2)));
        assert_eq!(max_with_index(&[]), None);
    }

    #[test]
    fn csv_row_format() {
        let r = ErrorRecord {
            example: 2,
            alpha: 0.5,
            r: 3.0,
            n_steps: 64,
            cells: 512,
            norm: NormTag::LinfTimeL2,
            error: 4.21e-3,
            order: None,
        };
        assert_eq!(
            r.to_csv_row(),
            "2,5.000000000e-1,3.000000000e0,64,512,Linf_time_L2,4.210000000e-3,"
        );
    }
}
