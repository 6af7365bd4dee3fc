use super::quadrature::QuadratureRule;
use super::solver::solve_sparse;
use super::sparse::SparseMatrix;
use crate::error::Result;
use crate::meshes::{MeshKind, SpatialMesh};

/// Affine P1 element: reference map, Jacobian determinant and (constant)
/// basis gradients. Unused slots are zero for 1D elements.
#[derive(Debug, Clone, Copy)]
pub struct Element {
    pub nodes: [usize; 3],
    pub count: usize,
    /// `|det J|`: element length in 1D, twice the area in 2D.
    pub det: f64,
    pub grads: [[f64; 2]; 3],
    origin: [f64; 2],
    jac: [[f64; 2]; 2],
}

impl Element {
    pub fn new(mesh: &SpatialMesh, e: usize) -> Self {
        let conn = mesh.element(e);
        let xy = mesh.coords();
        match mesh.kind() {
            MeshKind::Interval => {
                let (a, b) = (xy[conn[0]][0], xy[conn[1]][0]);
                let h = b - a;
                Self {
                    nodes: [conn[0], conn[1], usize::MAX],
                    count: 2,
                    det: h,
                    grads: [[-1.0 / h, 0.0], [1.0 / h, 0.0], [0.0, 0.0]],
                    origin: [a, 0.0],
                    jac: [[h, 0.0], [0.0, 0.0]],
                }
            }
            MeshKind::UnitSquare => {
                let p0 = xy[conn[0]];
                let p1 = xy[conn[1]];
                let p2 = xy[conn[2]];
                let (ax, ay) = (p1[0] - p0[0], p1[1] - p0[1]);
                let (bx, by) = (p2[0] - p0[0], p2[1] - p0[1]);
                let det = ax * by - bx * ay;
                // Rows of J⁻ᵀ applied to reference gradients (-1,-1), (1,0), (0,1).
                let g1 = [by / det, -bx / det];
                let g2 = [-ay / det, ax / det];
                let g0 = [-g1[0] - g2[0], -g1[1] - g2[1]];
                Self {
                    nodes: [conn[0], conn[1], conn[2]],
                    count: 3,
                    det: det.abs(),
                    grads: [g0, g1, g2],
                    origin: p0,
                    jac: [[ax, bx], [ay, by]],
                }
            }
        }
    }

    /// Physical point of reference coordinates `r`.
    #[inline]
    pub fn map(&self, r: [f64; 2]) -> [f64; 2] {
        [
            self.origin[0] + self.jac[0][0] * r[0] + self.jac[0][1] * r[1],
            self.origin[1] + self.jac[1][0] * r[0] + self.jac[1][1] * r[1],
        ]
    }

    #[inline]
    pub fn basis(&self, r: [f64; 2]) -> [f64; 3] {
        if self.count == 2 {
            [1.0 - r[0], r[0], 0.0]
        } else {
            [1.0 - r[0] - r[1], r[0], r[1]]
        }
    }

    /// Element length or area.
    pub fn measure(&self) -> f64 {
        if self.count == 2 {
            self.det
        } else {
            0.5 * self.det
        }
    }
}

/// Coefficients of `u` on the element's vertices (zero on the boundary).
#[inline]
pub fn local_values(mesh: &SpatialMesh, el: &Element, u: &[f64]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (a, slot) in out.iter_mut().enumerate().take(el.count) {
        if let Some(d) = mesh.node_dof(el.nodes[a]) {
            *slot = u[d];
        }
    }
    out
}

fn local_dofs(mesh: &SpatialMesh, el: &Element) -> [Option<usize>; 3] {
    let mut out = [None; 3];
    for (a, slot) in out.iter_mut().enumerate().take(el.count) {
        *slot = mesh.node_dof(el.nodes[a]);
    }
    out
}

fn pattern(mesh: &SpatialMesh) -> SparseMatrix {
    let mut cols: Vec<Vec<usize>> = vec![Vec::new(); mesh.num_dofs()];
    for e in 0..mesh.num_elements() {
        let el = Element::new(mesh, e);
        let dofs = local_dofs(mesh, &el);
        for i in dofs.iter().flatten() {
            for j in dofs.iter().flatten() {
                cols[*i].push(*j);
            }
        }
    }
    SparseMatrix::zeros_with_pattern(mesh.num_dofs(), &cols)
}

fn assemble_matrix(mesh: &SpatialMesh, local: impl Fn(&Element) -> [[f64; 3]; 3]) -> SparseMatrix {
    let mut m = pattern(mesh);
    for e in 0..mesh.num_elements() {
        let el = Element::new(mesh, e);
        let dofs = local_dofs(mesh, &el);
        let k = local(&el);
        for a in 0..el.count {
            let Some(i) = dofs[a] else { continue };
            for b in 0..el.count {
                if let Some(j) = dofs[b] {
                    m.add_at(i, j, k[a][b]);
                }
            }
        }
    }
    m
}

fn assemble_vector(mesh: &SpatialMesh, local: impl Fn(&Element) -> [f64; 3]) -> Vec<f64> {
    let mut v = vec![0.0; mesh.num_dofs()];
    for e in 0..mesh.num_elements() {
        let el = Element::new(mesh, e);
        let dofs = local_dofs(mesh, &el);
        let f = local(&el);
        for a in 0..el.count {
            if let Some(i) = dofs[a] {
                v[i] += f[a];
            }
        }
    }
    v
}

/// `M_ij = (φ_j, φ_i)`, integrated exactly.
pub fn assemble_mass(mesh: &SpatialMesh) -> SparseMatrix {
    assemble_matrix(mesh, |el| {
        let mut k = [[0.0; 3]; 3];
        let n = el.count;
        // ∫ λ_a λ_b = |T| (1 + δ_ab) / ((n)(n+1)) for simplices of n vertices
        let scale = el.measure() / (n * (n + 1)) as f64;
        for (a, row) in k.iter_mut().enumerate().take(n) {
            for (b, v) in row.iter_mut().enumerate().take(n) {
                *v = scale * if a == b { 2.0 } else { 1.0 };
            }
        }
        k
    })
}

/// `K_ij = (∇φ_j, ∇φ_i)`, integrated exactly.
pub fn assemble_stiffness(mesh: &SpatialMesh) -> SparseMatrix {
    assemble_matrix(mesh, |el| {
        let mut k = [[0.0; 3]; 3];
        let meas = el.measure();
        for a in 0..el.count {
            for b in 0..el.count {
                let (ga, gb) = (el.grads[a], el.grads[b]);
                k[a][b] = meas * (ga[0] * gb[0] + ga[1] * gb[1]);
            }
        }
        k
    })
}

/// `c_j = ∫_Ω φ_j`; `l(U) = c · U` for a P1 function with coefficients `U`.
pub fn assemble_nodal_integrals(mesh: &SpatialMesh) -> Vec<f64> {
    assemble_vector(mesh, |el| {
        let share = el.measure() / el.count as f64;
        [share; 3]
    })
}

/// `(g(·, t), φ_i)` by the quadrature `rule`.
pub fn assemble_load(
    mesh: &SpatialMesh,
    g: impl Fn([f64; 2], f64) -> f64,
    t: f64,
    rule: &QuadratureRule,
) -> Vec<f64> {
    assemble_vector(mesh, |el| {
        let mut f = [0.0; 3];
        for (r, w) in rule.iter() {
            let phi = el.basis(r);
            let gw = w * el.det * g(el.map(r), t);
            for a in 0..el.count {
                f[a] += gw * phi[a];
            }
        }
        f
    })
}

/// `(s(x, U_h), φ_i)` with `U_h` the P1 function of coefficients `u`.
pub fn assemble_reaction(
    mesh: &SpatialMesh,
    s: impl Fn([f64; 2], f64) -> f64,
    u: &[f64],
    rule: &QuadratureRule,
) -> Vec<f64> {
    assemble_vector(mesh, |el| {
        let uloc = local_values(mesh, el, u);
        let mut f = [0.0; 3];
        for (r, w) in rule.iter() {
            let phi = el.basis(r);
            let uh: f64 = (0..el.count).map(|a| uloc[a] * phi[a]).sum();
            let sw = w * el.det * s(el.map(r), uh);
            for a in 0..el.count {
                f[a] += sw * phi[a];
            }
        }
        f
    })
}

/// `(s'(x, U_h) φ_j, φ_i)`.
pub fn assemble_reaction_jacobian(
    mesh: &SpatialMesh,
    ds: impl Fn([f64; 2], f64) -> f64,
    u: &[f64],
    rule: &QuadratureRule,
) -> SparseMatrix {
    assemble_matrix(mesh, |el| {
        let uloc = local_values(mesh, el, u);
        let mut k = [[0.0; 3]; 3];
        for (r, w) in rule.iter() {
            let phi = el.basis(r);
            let uh: f64 = (0..el.count).map(|a| uloc[a] * phi[a]).sum();
            let sw = w * el.det * ds(el.map(r), uh);
            for a in 0..el.count {
                for b in 0..el.count {
                    k[a][b] += sw * phi[a] * phi[b];
                }
            }
        }
        k
    })
}

/// Coefficients of `R_h w`, defined by `(∇R_h w, ∇φ_i) = (∇w, ∇φ_i)`.
pub fn ritz_projection(
    mesh: &SpatialMesh,
    grad_w: impl Fn([f64; 2]) -> [f64; 2],
    rule: &QuadratureRule,
) -> Result<Vec<f64>> {
    let rhs = assemble_vector(mesh, |el| {
        let mut f = [0.0; 3];
        for (r, w) in rule.iter() {
            let g = grad_w(el.map(r));
            for a in 0..el.count {
                f[a] += w * el.det * (g[0] * el.grads[a][0] + g[1] * el.grads[a][1]);
            }
        }
        f
    });
    if rhs.iter().all(|&v| v == 0.0) {
        return Ok(rhs);
    }
    solve_sparse(&assemble_stiffness(mesh), &rhs)
}
