use crate::meshes::{MeshKind, SpatialMesh};

/// Quadrature on a reference element: `[0, 1]` (measure 1) in 1D or the
/// triangle `(0,0), (1,0), (0,1)` (measure 1/2) in 2D.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    dim: usize,
    degree: usize,
    points: Vec<[f64; 2]>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    /// 3-point Gauss–Legendre on `[0, 1]`, exact to degree 5.
    pub fn gauss3() -> Self {
        let a = (3.0f64 / 5.0).sqrt();
        Self::from_symmetric(&[(-a, 5.0 / 9.0), (0.0, 8.0 / 9.0), (a, 5.0 / 9.0)], 5)
    }

    /// 5-point Gauss–Legendre on `[0, 1]`, exact to degree 9.
    pub fn gauss5() -> Self {
        let s = (10.0f64 / 7.0).sqrt();
        let x1 = (5.0 - 2.0 * s).sqrt() / 3.0;
        let x2 = (5.0 + 2.0 * s).sqrt() / 3.0;
        let r70 = 70.0f64.sqrt();
        let w1 = (322.0 + 13.0 * r70) / 900.0;
        let w2 = (322.0 - 13.0 * r70) / 900.0;
        Self::from_symmetric(
            &[(-x2, w2), (-x1, w1), (0.0, 128.0 / 225.0), (x1, w1), (x2, w2)],
            9,
        )
    }

    /// Gauss–Legendre nodes on `[-1, 1]` mapped to `[0, 1]`.
    fn from_symmetric(nodes: &[(f64, f64)], degree: usize) -> Self {
        Self {
            dim: 1,
            degree,
            points: nodes.iter().map(|&(x, _)| [0.5 * (1.0 + x), 0.0]).collect(),
            weights: nodes.iter().map(|&(_, w)| 0.5 * w).collect(),
        }
    }

    /// Edge-midpoint rule on the reference triangle, exact to degree 2.
    pub fn triangle_midpoints() -> Self {
        Self {
            dim: 2,
            degree: 2,
            points: vec![[0.5, 0.0], [0.5, 0.5], [0.0, 0.5]],
            weights: vec![1.0 / 6.0; 3],
        }
    }

    /// 6-point symmetric rule on the reference triangle, exact to degree 4.
    #[allow(clippy::excessive_precision)]
    pub fn triangle_degree4() -> Self {
        let a = 0.445_948_490_915_964_886_32;
        let wa = 0.223_381_589_678_011_465_70;
        let b = 0.091_576_213_509_770_743_46;
        let wb = 0.109_951_743_655_321_867_64;
        let mut points = Vec::with_capacity(6);
        let mut weights = Vec::with_capacity(6);
        for (c, w) in [(a, wa), (b, wb)] {
            for p in [[c, c], [1.0 - 2.0 * c, c], [c, 1.0 - 2.0 * c]] {
                points.push(p);
                weights.push(0.5 * w);
            }
        }
        Self {
            dim: 2,
            degree: 4,
            points,
            weights,
        }
    }

    /// Rule used for system assembly on `mesh`.
    pub fn assembly_for(mesh: &SpatialMesh) -> Self {
        match mesh.kind() {
            MeshKind::Interval => Self::gauss3(),
            MeshKind::UnitSquare => Self::triangle_midpoints(),
        }
    }

    /// Higher-order rule used for error norms on `mesh`.
    pub fn norm_for(mesh: &SpatialMesh) -> Self {
        match mesh.kind() {
            MeshKind::Interval => Self::gauss5(),
            MeshKind::UnitSquare => Self::triangle_degree4(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Highest total polynomial degree integrated exactly.
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = ([f64; 2], f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }
}
