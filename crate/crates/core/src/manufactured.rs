//! Closed-form manufactured solutions for the three benchmark problems.
//!
//! | id | Ω        | u(x, t)                               |
//! |----|----------|---------------------------------------|
//! | 1  | (0, π)   | t³ sin x                              |
//! | 2  | (0, π)   | (t³ + t^α) sin x                      |
//! | 3  | (0, 1)²  | (t³ + t^α)(x − x²)(y − y²)            |
//!
//! All use `a(ξ) = 3 + sin ξ` and `u(·, 0) = 0`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::l1::{check_alpha, gamma};
use crate::meshes::{MeshKind, SpatialMesh};
use crate::stepper::ProblemSpec;

/// Caputo derivative of `t^p`: `Γ(p+1)/Γ(p+1−α) t^{p−α}`; zero for `p = 0`.
pub fn caputo_power(t: f64, alpha: f64, p: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if p == 0.0 {
        return Ok(0.0);
    }
    if p < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "power must be nonnegative, got {p}"
        )));
    }
    Ok(gamma(p + 1.0) / gamma(p + 1.0 - alpha) * t.powf(p - alpha))
}

/// How the right-hand side depends on `u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ForcingMode {
    /// `f(x, t, u) = g(x, t)`.
    #[default]
    Pure,
    /// `f(x, t, u) = u + g(x, t) − u_ex(x, t)`; same exact solution, `∂f/∂u = 1`.
    Reactive,
}

/// Exact solution and its derivatives, for error measurement.
pub trait ExactSolution: Sync {
    fn value(&self, x: [f64; 2], t: f64) -> f64;
    fn gradient(&self, x: [f64; 2], t: f64) -> [f64; 2];
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedCase {
    id: u8,
    alpha: f64,
    mode: ForcingMode,
}

impl ManufacturedCase {
    pub fn new(id: u8, alpha: f64, mode: ForcingMode) -> Result<Self> {
        if !(1..=3).contains(&id) {
            return Err(Error::UnknownExample(id.to_string()));
        }
        check_alpha(alpha)?;
        Ok(Self { id, alpha, mode })
    }

    pub fn id(&self) -> u8 {
        self.id
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn mode(&self) -> ForcingMode {
        self.mode
    }

    pub fn mesh_kind(&self) -> MeshKind {
        if self.id == 3 {
            MeshKind::UnitSquare
        } else {
            MeshKind::Interval
        }
    }

    /// Mesh of the case's domain with `cells` cells per side.
    pub fn mesh(&self, cells: usize) -> Result<SpatialMesh> {
        match self.mesh_kind() {
            MeshKind::Interval => SpatialMesh::interval(PI, cells),
            MeshKind::UnitSquare => SpatialMesh::unit_square(cells),
        }
    }

    fn time_factor(&self, t: f64) -> f64 {
        match self.id {
            1 => t.powi(3),
            _ => t.powi(3) + t.powf(self.alpha),
        }
    }

    fn time_factor_caputo(&self, t: f64) -> f64 {
        let a = self.alpha;
        let cubic = gamma(4.0) / gamma(4.0 - a) * t.powf(3.0 - a);
        match self.id {
            1 => cubic,
            _ => cubic + gamma(1.0 + a),
        }
    }

    fn profile(&self, x: [f64; 2]) -> f64 {
        match self.id {
            3 => (x[0] - x[0] * x[0]) * (x[1] - x[1] * x[1]),
            _ => x[0].sin(),
        }
    }

    fn profile_gradient(&self, x: [f64; 2]) -> [f64; 2] {
        match self.id {
            3 => {
                let (px, py) = (x[0] - x[0] * x[0], x[1] - x[1] * x[1]);
                [(1.0 - 2.0 * x[0]) * py, px * (1.0 - 2.0 * x[1])]
            }
            _ => [x[0].cos(), 0.0],
        }
    }

    fn profile_laplacian(&self, x: [f64; 2]) -> f64 {
        match self.id {
            3 => -2.0 * ((x[1] - x[1] * x[1]) + (x[0] - x[0] * x[0])),
            _ => -x[0].sin(),
        }
    }

    /// `∫_Ω` of the spatial profile.
    fn profile_integral(&self) -> f64 {
        match self.id {
            3 => 1.0 / 36.0,
            _ => 2.0,
        }
    }

    pub fn u(&self, x: [f64; 2], t: f64) -> f64 {
        self.time_factor(t) * self.profile(x)
    }

    pub fn grad_u(&self, x: [f64; 2], t: f64) -> [f64; 2] {
        let s = self.time_factor(t);
        let g = self.profile_gradient(x);
        [s * g[0], s * g[1]]
    }

    pub fn laplacian_u(&self, x: [f64; 2], t: f64) -> f64 {
        self.time_factor(t) * self.profile_laplacian(x)
    }

    pub fn caputo_u(&self, x: [f64; 2], t: f64) -> f64 {
        self.time_factor_caputo(t) * self.profile(x)
    }

    /// `l(u_ex(·, t)) = ∫_Ω u_ex(x, t) dx`.
    pub fn l_exact(&self, t: f64) -> f64 {
        self.time_factor(t) * self.profile_integral()
    }

    pub fn a(xi: f64) -> f64 {
        3.0 + xi.sin()
    }

    pub fn a_prime(xi: f64) -> f64 {
        xi.cos()
    }

    /// `g = D^α u_ex − a(l(u_ex)) Δu_ex`.
    pub fn g(&self, x: [f64; 2], t: f64) -> f64 {
        self.caputo_u(x, t) - Self::a(self.l_exact(t)) * self.laplacian_u(x, t)
    }

    pub fn f(&self, x: [f64; 2], t: f64, u: f64) -> f64 {
        match self.mode {
            ForcingMode::Pure => self.g(x, t),
            ForcingMode::Reactive => u + self.g(x, t) - self.u(x, t),
        }
    }
}

impl ExactSolution for ManufacturedCase {
    fn value(&self, x: [f64; 2], t: f64) -> f64 {
        self.u(x, t)
    }

    fn gradient(&self, x: [f64; 2], t: f64) -> [f64; 2] {
        self.grad_u(x, t)
    }
}

impl ProblemSpec for ManufacturedCase {
    fn diffusion(&self, xi: f64) -> f64 {
        Self::a(xi)
    }

    fn diffusion_derivative(&self, xi: f64) -> f64 {
        Self::a_prime(xi)
    }

    fn forcing(&self, x: [f64; 2], t: f64, u: f64) -> f64 {
        self.f(x, t, u)
    }

    fn forcing_du(&self, _x: [f64; 2], _t: f64, _u: f64) -> f64 {
        match self.mode {
            ForcingMode::Pure => 0.0,
            ForcingMode::Reactive => 1.0,
        }
    }

    fn forcing_depends_on_u(&self) -> bool {
        self.mode == ForcingMode::Reactive
    }

    fn initial(&self, x: [f64; 2]) -> f64 {
        self.u(x, 0.0)
    }

    fn initial_gradient(&self, x: [f64; 2]) -> [f64; 2] {
        self.grad_u(x, 0.0)
    }

    fn initial_is_zero(&self) -> bool {
        true
    }
}

/// `a(ξ) = 3 + sin ξ`, `f ≡ 0`, `u_0 ≡ 0` on `(0, π)`; the solution is zero.
#[derive(Debug, Clone, Copy, Default)]
pub struct HomogeneousProblem;

impl ProblemSpec for HomogeneousProblem {
    fn diffusion(&self, xi: f64) -> f64 {
        ManufacturedCase::a(xi)
    }

    fn diffusion_derivative(&self, xi: f64) -> f64 {
        ManufacturedCase::a_prime(xi)
    }

    fn forcing(&self, _x: [f64; 2], _t: f64, _u: f64) -> f64 {
        0.0
    }

    fn forcing_du(&self, _x: [f64; 2], _t: f64, _u: f64) -> f64 {
        0.0
    }

    fn forcing_depends_on_u(&self) -> bool {
        false
    }

    fn initial(&self, _x: [f64; 2]) -> f64 {
        0.0
    }

    fn initial_gradient(&self, _x: [f64; 2]) -> [f64; 2] {
        [0.0, 0.0]
    }

    fn initial_is_zero(&self) -> bool {
        true
    }
}

impl ExactSolution for HomogeneousProblem {
    fn value(&self, _x: [f64; 2], _t: f64) -> f64 {
        0.0
    }

    fn gradient(&self, _x: [f64; 2], _t: f64) -> [f64; 2] {
        [0.0, 0.0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{rngs::StdRng, Rng, SeedableRng};

    /// Caputo integral of `s^p` by Gauss–Legendre after `t − s = y^m`,
    /// `m = 1/(1−α)`, which removes the kernel singularity.
    fn caputo_power_quadrature(t: f64, alpha: f64, p: f64) -> f64 {
        let m = 1.0 / (1.0 - alpha);
        let upper = t.powf(1.0 / m);
        let nodes = [
            (-0.906_179_845_938_664, 0.236_926_885_056_189),
            (-0.538_469_310_105_683, 0.478_628_670_499_366),
            (0.0, 0.568_888_888_888_889),
            (0.538_469_310_105_683, 0.478_628_670_499_366),
            (0.906_179_845_938_664, 0.236_926_885_056_189),
        ];
        let panels = 400;
        let hp = upper / panels as f64;
        let mut acc = 0.0;
        for k in 0..panels {
            let mid = (k as f64 + 0.5) * hp;
            for (x, w) in nodes {
                let y = mid + 0.5 * hp * x;
                let s = t - y.powf(m);
                acc += 0.5 * hp * w * m * p * s.max(0.0).powf(p - 1.0);
            }
        }
        acc / gamma(1.0 - alpha)
    }

    #[test]
    fn caputo_power_values() {
        let v = caputo_power(1.0, 0.5, 1.0).unwrap();
        assert!((v - std::f64::consts::FRAC_2_SQRT_PI).abs() < 1e-12);
        for t in [0.1, 0.7, 3.0] {
            let v = caputo_power(t, 0.3, 0.3).unwrap();
            assert!((v - gamma(1.3)).abs() < 1e-14);
        }
        assert_eq!(caputo_power(0.4, 0.3, 0.0).unwrap(), 0.0);
        assert!(caputo_power(0.4, 0.3, -1.0).is_err());
        assert!(caputo_power(0.4, 1.3, 1.0).is_err());
    }

    #[test]
    fn caputo_power_matches_quadrature() {
        let closed = caputo_power(0.5, 0.3, 3.0).unwrap();
        let want = gamma(4.0) / gamma(3.7) * 0.5f64.powf(2.7);
        assert!((closed - want).abs() < 1e-15);
        let quad = caputo_power_quadrature(0.5, 0.3, 3.0);
        assert!((closed - quad).abs() < 1e-9, "{closed} vs {quad}");
    }

    #[test]
    fn unknown_case_rejected() {
        assert!(matches!(
            ManufacturedCase::new(4, 0.5, ForcingMode::Pure),
            Err(Error::UnknownExample(_))
        ));
        assert!(ManufacturedCase::new(1, 1.0, ForcingMode::Pure).is_err());
    }

    #[test]
    fn example_one_forcing_closed_form() {
        let c = ManufacturedCase::new(1, 0.4, ForcingMode::Pure).unwrap();
        for (x, t) in [(0.3f64, 0.2f64), (2.0, 0.9), (1.1, 1.0)] {
            let want = 6.0 / gamma(3.6) * t.powf(2.6) * x.sin() + (3.0 + (2.0 * t * t * t).sin()) * t.powi(3) * x.sin();
            assert!((c.g([x, 0.0], t) - want).abs() < 1e-13);
        }
    }

    #[test]
    fn initial_values_vanish() {
        for id in 1..=3 {
            let c = ManufacturedCase::new(id, 0.6, ForcingMode::Pure).unwrap();
            assert_eq!(c.u([0.4, 0.3], 0.0), 0.0);
            assert_eq!(c.l_exact(0.0), 0.0);
        }
    }

    #[test]
    fn boundary_values_vanish() {
        for id in 1..=3 {
            let c = ManufacturedCase::new(id, 0.6, ForcingMode::Pure).unwrap();
            let pts: Vec<[f64; 2]> = if id == 3 {
                vec![[0.0, 0.3], [1.0, 0.7], [0.2, 0.0], [0.5, 1.0]]
            } else {
                vec![[0.0, 0.0], [PI, 0.0]]
            };
            for p in pts {
                assert!(c.u(p, 0.8).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn pde_residual_vanishes() {
        let mut rng = StdRng::seed_from_u64(11);
        for id in 1..=3u8 {
            for _ in 0..50 {
                let alpha = rng.random_range(0.05..0.95);
                let c = ManufacturedCase::new(id, alpha, ForcingMode::Pure).unwrap();
                let x = [rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)];
                let t = rng.random_range(0.01..1.0);
                let res = c.caputo_u(x, t) - ManufacturedCase::a(c.l_exact(t)) * c.laplacian_u(x, t) - c.g(x, t);
                assert!(res.abs() < 1e-11);
                let r = ManufacturedCase::new(id, alpha, ForcingMode::Reactive).unwrap();
                assert!((r.f(x, t, c.u(x, t)) - c.g(x, t)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-5;
        for id in 1..=3u8 {
            let c = ManufacturedCase::new(id, 0.45, ForcingMode::Pure).unwrap();
            for (x, y, t) in [(0.3, 0.6, 0.7), (0.81, 0.2, 1.0)] {
                let p = [x, y];
                let gx = (c.u([x + h, y], t) - c.u([x - h, y], t)) / (2.0 * h);
                let gy = (c.u([x, y + h], t) - c.u([x, y - h], t)) / (2.0 * h);
                let g = c.grad_u(p, t);
                assert!((g[0] - gx).abs() < 1e-6 && (g[1] - gy).abs() < 1e-6);
                // Second differences need a wider step to stay above round-off.
                let hl = 1e-4;
                let lap = (c.u([x + hl, y], t) + c.u([x - hl, y], t) + c.u([x, y + hl], t) + c.u([x, y - hl], t)
                    - 4.0 * c.u(p, t))
                    / (hl * hl);
                assert!((c.laplacian_u(p, t) - lap).abs() < 1e-6, "id {id}: {} vs {lap}", c.laplacian_u(p, t));
            }
        }
    }

    #[test]
    fn nonlocal_functional_matches_quadrature() {
        // Tensor Gauss on 64 panels per direction.
        let g = crate::fem::QuadratureRule::gauss5();
        let integrate_1d = |f: &dyn Fn(f64) -> f64, b: f64| {
            let panels = 64;
            let hp = b / panels as f64;
            let mut acc = 0.0;
            for k in 0..panels {
                for (r, w) in g.iter() {
                    acc += hp * w * f((k as f64 + r[0]) * hp);
                }
            }
            acc
        };
        for id in 1..=3u8 {
            let c = ManufacturedCase::new(id, 0.35, ForcingMode::Pure).unwrap();
            let t = 0.63;
            let q = if id == 3 {
                integrate_1d(&|y| integrate_1d(&|x| c.u([x, y], t), 1.0), 1.0)
            } else {
                integrate_1d(&|x| c.u([x, 0.0], t), PI)
            };
            assert!((q - c.l_exact(t)).abs() < 1e-10);
        }
    }
}
