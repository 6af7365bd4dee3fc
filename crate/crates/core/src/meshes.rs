//! Graded temporal grids and structured P1 spatial meshes.

use crate::error::{Error, Result};

/// Temporal nodes `t_n = T (n/N)^r`, `n = 0..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    final_time: f64,
    steps: usize,
    grading: f64,
    nodes: Vec<f64>,
}

impl TimeGrid {
    pub fn new(final_time: f64, steps: usize, grading: f64) -> Result<Self> {
        if !(final_time > 0.0 && final_time.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "final time must be positive, got {final_time}"
            )));
        }
        if steps == 0 {
            return Err(Error::InvalidArgument("N must be at least 1".into()));
        }
        if !(grading >= 1.0 && grading.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "grading exponent must satisfy r >= 1, got {grading}"
            )));
        }
        let n_f = steps as f64;
        let mut nodes: Vec<f64> = (0..=steps)
            .map(|n| final_time * (n as f64 / n_f).powf(grading))
            .collect();
        nodes[steps] = final_time;
        Ok(Self {
            final_time,
            steps,
            grading,
            nodes,
        })
    }

    pub fn uniform(final_time: f64, steps: usize) -> Result<Self> {
        Self::new(final_time, steps, 1.0)
    }

    pub fn final_time(&self) -> f64 {
        self.final_time
    }

    /// Number of steps `N`.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn grading(&self) -> f64 {
        self.grading
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    #[inline]
    pub fn t(&self, n: usize) -> f64 {
        self.nodes[n]
    }

    /// Step `τ_n = t_n − t_{n−1}` for `1 <= n <= N`.
    #[inline]
    pub fn tau(&self, n: usize) -> f64 {
        self.nodes[n] - self.nodes[n - 1]
    }

    /// `τ_1..τ_N`.
    pub fn taus(&self) -> Vec<f64> {
        (1..=self.steps).map(|n| self.tau(n)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshKind {
    /// Uniform partition of `(0, b)`.
    Interval,
    /// Structured triangulation of `(0,1)²`.
    UnitSquare,
}

/// Uniform P1 mesh of an interval or of the unit square.
///
/// Nodes are stored as `[x, y]` pairs (`y = 0` on an interval). Boundary
/// nodes carry no degree of freedom; interior nodes are numbered
/// lexicographically (left to right, then bottom to top).
#[derive(Debug, Clone)]
pub struct SpatialMesh {
    kind: MeshKind,
    extent: f64,
    cells_per_side: usize,
    coords: Vec<[f64; 2]>,
    connectivity: Vec<usize>,
    nodes_per_element: usize,
    node_dof: Vec<Option<usize>>,
    dof_node: Vec<usize>,
}

impl SpatialMesh {
    /// `cells` uniform intervals on `(0, length)`.
    pub fn interval(length: f64, cells: usize) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "interval length must be positive, got {length}"
            )));
        }
        if cells < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 cells for an interior dof, got {cells}"
            )));
        }
        let h = length / cells as f64;
        let mut coords: Vec<[f64; 2]> = (0..=cells).map(|i| [i as f64 * h, 0.0]).collect();
        coords[cells][0] = length;
        let connectivity = (0..cells).flat_map(|e| [e, e + 1]).collect();
        let mut node_dof = vec![None; cells + 1];
        let mut dof_node = Vec::with_capacity(cells - 1);
        for (dof, node) in (1..cells).enumerate() {
            node_dof[node] = Some(dof);
            dof_node.push(node);
        }
        Ok(Self {
            kind: MeshKind::Interval,
            extent: length,
            cells_per_side: cells,
            coords,
            connectivity,
            nodes_per_element: 2,
            node_dof,
            dof_node,
        })
    }

    /// `2 cells²` triangles on `(0,1)²`; every square is cut along its
    /// lower-left to upper-right diagonal.
    pub fn unit_square(cells: usize) -> Result<Self> {
        if cells < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 cells per side for an interior dof, got {cells}"
            )));
        }
        let side = cells + 1;
        let h = 1.0 / cells as f64;
        let coord = |i: usize| if i == cells { 1.0 } else { i as f64 * h };
        let mut coords = Vec::with_capacity(side * side);
        for j in 0..side {
            for i in 0..side {
                coords.push([coord(i), coord(j)]);
            }
        }
        let node = |i: usize, j: usize| j * side + i;
        let mut connectivity = Vec::with_capacity(6 * cells * cells);
        for j in 0..cells {
            for i in 0..cells {
                let (sw, se, nw, ne) = (node(i, j), node(i + 1, j), node(i, j + 1), node(i + 1, j + 1));
                connectivity.extend_from_slice(&[sw, se, ne]);
                connectivity.extend_from_slice(&[sw, ne, nw]);
            }
        }
        let mut node_dof = vec![None; side * side];
        let mut dof_node = Vec::with_capacity((cells - 1) * (cells - 1));
        for j in 1..cells {
            for i in 1..cells {
                node_dof[node(i, j)] = Some(dof_node.len());
                dof_node.push(node(i, j));
            }
        }
        Ok(Self {
            kind: MeshKind::UnitSquare,
            extent: 1.0,
            cells_per_side: cells,
            coords,
            connectivity,
            nodes_per_element: 3,
            node_dof,
            dof_node,
        })
    }

    pub fn kind(&self) -> MeshKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            MeshKind::Interval => 1,
            MeshKind::UnitSquare => 2,
        }
    }

    /// Interval length `b`, or 1 for the unit square.
    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn cells_per_side(&self) -> usize {
        self.cells_per_side
    }

    pub fn h(&self) -> f64 {
        self.extent / self.cells_per_side as f64
    }

    pub fn domain_measure(&self) -> f64 {
        match self.kind {
            MeshKind::Interval => self.extent,
            MeshKind::UnitSquare => 1.0,
        }
    }

    pub fn coords(&self) -> &[[f64; 2]] {
        &self.coords
    }

    pub fn num_nodes(&self) -> usize {
        self.coords.len()
    }

    pub fn num_elements(&self) -> usize {
        self.connectivity.len() / self.nodes_per_element
    }

    pub fn nodes_per_element(&self) -> usize {
        self.nodes_per_element
    }

    pub fn element(&self, e: usize) -> &[usize] {
        let k = self.nodes_per_element;
        &self.connectivity[e * k..(e + 1) * k]
    }

    /// Number of interior degrees of freedom `M`.
    pub fn num_dofs(&self) -> usize {
        self.dof_node.len()
    }

    pub fn node_dof(&self, node: usize) -> Option<usize> {
        self.node_dof[node]
    }

    pub fn dof_node(&self, dof: usize) -> usize {
        self.dof_node[dof]
    }

    pub fn dof_coord(&self, dof: usize) -> [f64; 2] {
        self.coords[self.dof_node[dof]]
    }

    /// Length (1D) or area (2D) of element `e`.
    pub fn element_measure(&self, e: usize) -> f64 {
        let nodes = self.element(e);
        match self.kind {
            MeshKind::Interval => self.coords[nodes[1]][0] - self.coords[nodes[0]][0],
            MeshKind::UnitSquare => {
                let [x0, y0] = self.coords[nodes[0]];
                let [x1, y1] = self.coords[nodes[1]];
                let [x2, y2] = self.coords[nodes[2]];
                0.5 * ((x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0))
            }
        }
    }

    /// Nodal values of `g` at the interior dofs (P1 interpolant coefficients).
    pub fn interpolate(&self, g: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
        self.dof_node.iter().map(|&n| g(self.coords[n])).collect()
    }
}
