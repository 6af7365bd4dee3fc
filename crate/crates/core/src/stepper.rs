//! Time stepping: at each level `n` solve
//!
//! ```text
//! F̄(U, d)   = M(U + H^n) + κ a(d) K U − κ (f(·, t_n, U_h), φ) = 0
//! F_{M+1}   = c · U − d                                          = 0
//! ```
//!
//! with `κ = Γ(2−α)/d_{n,1}` and `H^n` the L1 history term, by Newton's
//! method on the bordered Jacobian `[[A, b], [c, −1]]`. Treating
//! `d = l(U)` as an unknown keeps `A` sparse; the border is eliminated with
//! two solves against `A` (Schur complement on the scalar).

use log::{debug, warn};

use crate::error::{Error, Result};
use crate::fem::{
    assemble_mass, assemble_nodal_integrals, assemble_reaction, assemble_reaction_jacobian,
    assemble_stiffness, ritz_projection, BandedLu, QuadratureRule, SparseMatrix,
};
use crate::l1::{check_alpha, gamma, L1Row};
use crate::meshes::{SpatialMesh, TimeGrid};

/// Problem data: diffusion `a(ξ)`, right-hand side `f(x, t, u)` and initial
/// datum `u_0`. `a` is expected to satisfy `0 < m₁ <= a <= m₂` and `a`, `f`
/// to be Lipschitz.
pub trait ProblemSpec: Sync {
    fn diffusion(&self, xi: f64) -> f64;
    fn diffusion_derivative(&self, xi: f64) -> f64;
    fn forcing(&self, x: [f64; 2], t: f64, u: f64) -> f64;
    fn forcing_du(&self, x: [f64; 2], t: f64, u: f64) -> f64;

    /// `false` when `∂f/∂u ≡ 0`, which skips assembling its Jacobian block.
    fn forcing_depends_on_u(&self) -> bool {
        true
    }

    fn initial(&self, x: [f64; 2]) -> f64;
    fn initial_gradient(&self, x: [f64; 2]) -> [f64; 2];

    fn initial_is_zero(&self) -> bool {
        false
    }
}

/// Mesh-dependent operators assembled once per run.
#[derive(Debug, Clone)]
pub struct SpaceOperators {
    pub mesh: SpatialMesh,
    pub mass: SparseMatrix,
    pub stiffness: SparseMatrix,
    /// `c_j = ∫ φ_j`.
    pub nodal_integrals: Vec<f64>,
    pub rule: QuadratureRule,
}

impl SpaceOperators {
    pub fn new(mesh: SpatialMesh) -> Self {
        let rule = QuadratureRule::assembly_for(&mesh);
        Self {
            mass: assemble_mass(&mesh),
            stiffness: assemble_stiffness(&mesh),
            nodal_integrals: assemble_nodal_integrals(&mesh),
            rule,
            mesh,
        }
    }

    pub fn num_dofs(&self) -> usize {
        self.mesh.num_dofs()
    }

    /// `l(U) = ∫_Ω U_h = c · U`.
    pub fn nonlocal(&self, u: &[f64]) -> f64 {
        dot(&self.nodal_integrals, u)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonConfig {
    /// Stop once `‖δU‖∞ + |δd| <= tol (1 + ‖U‖∞)`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 25,
        }
    }
}

/// Accepted levels `U^0..U^{n−1}` and the last nonlocal value.
#[derive(Debug, Clone)]
pub struct TimeLoopState {
    pub history: Vec<Vec<f64>>,
    pub d: f64,
}

impl TimeLoopState {
    pub fn new(initial: Vec<f64>, ops: &SpaceOperators) -> Self {
        let d = ops.nonlocal(&initial);
        Self {
            history: vec![initial],
            d,
        }
    }

    /// The level the next call to [`step`] computes.
    pub fn next_level(&self) -> usize {
        self.history.len()
    }

    pub fn last(&self) -> &[f64] {
        self.history.last().expect("history holds U^0")
    }
}

/// Newton system `[[A, b], [c, γ]] [δU; δd] = [F̄; F_{M+1}]`, `γ = −1`.
#[derive(Debug, Clone)]
pub struct BorderedSystem {
    pub a: SparseMatrix,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub gamma: f64,
    pub residual: Vec<f64>,
    pub residual_last: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepStats {
    pub level: usize,
    pub iterations: usize,
    /// `‖F̄‖∞ + |F_{M+1}|` at the start of each iteration.
    pub residuals: Vec<f64>,
    /// `‖δU‖∞ + |δd|` per iteration.
    pub updates: Vec<f64>,
    /// `|l(U^n) − d|` at acceptance.
    pub constraint_gap: f64,
    /// `‖F̄(U^n, l(U^n))‖∞`.
    pub unbordered_residual: f64,
    pub final_d: f64,
}

impl StepStats {
    /// Residuals decrease strictly until they reach round-off.
    pub fn residuals_decrease(&self) -> bool {
        let floor = 1e-13 * (1.0 + self.residuals.first().copied().unwrap_or(0.0));
        self.residuals
            .windows(2)
            .all(|w| w[1] < w[0] || w[1] <= floor)
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub history: Vec<Vec<f64>>,
    pub stats: Vec<StepStats>,
}

/// `H^n = (−d_{n,n} U^0 + Σ_{k=1}^{n−1} (d_{n,k+1} − d_{n,k}) U^{n−k}) / d_{n,1}`
/// for a history `U^0..U^{n−1}`.
pub fn history_term(row: &L1Row, history: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = row.level();
    if history.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: history.len(),
        });
    }
    let d1 = row.d(1);
    let mut h: Vec<f64> = history[0].iter().map(|v| -row.d(n) * v).collect();
    for k in 1..n {
        let w = row.d(k + 1) - row.d(k);
        let past = &history[n - k];
        if past.len() != h.len() {
            return Err(Error::LengthMismatch {
                expected: h.len(),
                got: past.len(),
            });
        }
        for (hi, v) in h.iter_mut().zip(past) {
            *hi += w * v;
        }
    }
    h.iter_mut().for_each(|v| *v /= d1);
    Ok(h)
}

/// Everything the residual needs at one time level.
pub struct LevelContext<'a, P: ProblemSpec + ?Sized> {
    pub problem: &'a P,
    pub ops: &'a SpaceOperators,
    pub t: f64,
    /// `Γ(2−α)/d_{n,1}`.
    pub kappa: f64,
    /// `M H^n`.
    pub mass_history: Vec<f64>,
}

impl<'a, P: ProblemSpec + ?Sized> LevelContext<'a, P> {
    pub fn new(problem: &'a P, ops: &'a SpaceOperators, t: f64, row: &L1Row, history: &[Vec<f64>]) -> Result<Self> {
        let h = history_term(row, history)?;
        Ok(Self {
            problem,
            ops,
            t,
            kappa: gamma(2.0 - row.alpha()) / row.d(1),
            mass_history: ops.mass.mul_vec(&h),
        })
    }

    fn reaction(&self, u: &[f64]) -> Vec<f64> {
        let t = self.t;
        let p = self.problem;
        assemble_reaction(&self.ops.mesh, |x, v| p.forcing(x, t, v), u, &self.ops.rule)
    }

    /// `(F̄, F_{M+1})` at `(u, d)`.
    pub fn residual(&self, u: &[f64], d: f64) -> (Vec<f64>, f64) {
        let ops = self.ops;
        let mu = ops.mass.mul_vec(u);
        let ku = ops.stiffness.mul_vec(u);
        let react = self.reaction(u);
        let diff = self.kappa * self.problem.diffusion(d);
        let fbar = (0..u.len())
            .map(|i| mu[i] + self.mass_history[i] + diff * ku[i] - self.kappa * react[i])
            .collect();
        (fbar, ops.nonlocal(u) - d)
    }

    pub fn jacobian(&self, u: &[f64], d: f64) -> Result<BorderedSystem> {
        let ops = self.ops;
        let (residual, residual_last) = self.residual(u, d);
        let diff = self.kappa * self.problem.diffusion(d);
        let a = if self.problem.forcing_depends_on_u() {
            let t = self.t;
            let p = self.problem;
            let jr = assemble_reaction_jacobian(&ops.mesh, |x, v| p.forcing_du(x, t, v), u, &ops.rule);
            SparseMatrix::linear_combination(&[(1.0, &ops.mass), (diff, &ops.stiffness), (-self.kappa, &jr)])?
        } else {
            SparseMatrix::linear_combination(&[(1.0, &ops.mass), (diff, &ops.stiffness)])?
        };
        let scale = self.kappa * self.problem.diffusion_derivative(d);
        let b = ops.stiffness.mul_vec(u).into_iter().map(|v| scale * v).collect();
        Ok(BorderedSystem {
            a,
            b,
            c: ops.nodal_integrals.clone(),
            gamma: -1.0,
            residual,
            residual_last,
        })
    }
}

/// `(F̄, F_{M+1})` for candidate `(u, d)` at level `row.level()`.
pub fn newton_residual<P: ProblemSpec + ?Sized>(
    problem: &P,
    ops: &SpaceOperators,
    history: &[Vec<f64>],
    row: &L1Row,
    t: f64,
    u: &[f64],
    d: f64,
) -> Result<(Vec<f64>, f64)> {
    Ok(LevelContext::new(problem, ops, t, row, history)?.residual(u, d))
}

pub fn newton_jacobian<P: ProblemSpec + ?Sized>(
    problem: &P,
    ops: &SpaceOperators,
    history: &[Vec<f64>],
    row: &L1Row,
    t: f64,
    u: &[f64],
    d: f64,
) -> Result<BorderedSystem> {
    LevelContext::new(problem, ops, t, row, history)?.jacobian(u, d)
}

/// Solves the bordered system for the Newton correction `(δU, δd)`:
/// `A z₁ = F̄`, `A z₂ = b`, `δd = (F_{M+1} − c·z₁)/(γ − c·z₂)`, `δU = z₁ − δd z₂`.
pub fn schur_solve(sys: &BorderedSystem) -> Result<(Vec<f64>, f64)> {
    let lu = BandedLu::factor(&sys.a)?;
    let z1 = lu.solve_checked(&sys.a, &sys.residual)?;
    let z2 = if sys.b.iter().all(|&v| v == 0.0) {
        vec![0.0; sys.b.len()]
    } else {
        lu.solve_checked(&sys.a, &sys.b)?
    };
    let schur = sys.gamma - dot(&sys.c, &z2);
    if schur.abs() < 1e-14 {
        return Err(Error::SingularBorder(schur));
    }
    let dd = (sys.residual_last - dot(&sys.c, &z1)) / schur;
    let du = z1.iter().zip(&z2).map(|(a, b)| a - dd * b).collect();
    Ok((du, dd))
}

/// Advances `state` by one level with Newton's method started from
/// `(U^{n−1}, l(U^{n−1}))`.
pub fn step<P: ProblemSpec + ?Sized>(
    problem: &P,
    ops: &SpaceOperators,
    grid: &TimeGrid,
    alpha: f64,
    state: &mut TimeLoopState,
    config: &NewtonConfig,
) -> Result<StepStats> {
    let n = state.next_level();
    let row = L1Row::new(grid, n, alpha)?;
    let ctx = LevelContext::new(problem, ops, grid.t(n), &row, &state.history)?;
    let mut u = state.last().to_vec();
    let mut d = ops.nonlocal(&u);
    let mut residuals = Vec::new();
    let mut updates = Vec::new();
    let mut converged = false;
    for _ in 0..config.max_iter {
        let sys = ctx.jacobian(&u, d)?;
        residuals.push(inf_norm(&sys.residual) + sys.residual_last.abs());
        let (du, dd) = schur_solve(&sys)?;
        u.iter_mut().zip(&du).for_each(|(ui, di)| *ui -= di);
        d -= dd;
        let update = inf_norm(&du) + dd.abs();
        updates.push(update);
        if update <= config.tol * (1.0 + inf_norm(&u)) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NewtonDivergence {
            level: n,
            iterations: updates.len(),
            last_update: updates.last().copied().unwrap_or(f64::NAN),
        });
    }
    let l = ops.nonlocal(&u);
    let constraint_gap = (l - d).abs();
    if constraint_gap > 1e-12 * (1.0 + d.abs()) {
        return Err(Error::ConstraintGap {
            level: n,
            gap: constraint_gap,
        });
    }
    let (unbordered, _) = ctx.residual(&u, l);
    let stats = StepStats {
        level: n,
        iterations: updates.len(),
        residuals,
        updates,
        constraint_gap,
        unbordered_residual: inf_norm(&unbordered),
        final_d: d,
    };
    if !stats.residuals_decrease() {
        warn!("level {n}: Newton residuals not monotone: {:?}", stats.residuals);
    }
    debug!("level {n}: {} Newton iterations, d = {d}", stats.iterations);
    state.history.push(u);
    state.d = d;
    Ok(stats)
}

/// Discrete initial value `U^0 = R_h u_0`.
pub fn initial_value<P: ProblemSpec + ?Sized>(problem: &P, ops: &SpaceOperators) -> Result<Vec<f64>> {
    if problem.initial_is_zero() {
        return Ok(vec![0.0; ops.num_dofs()]);
    }
    ritz_projection(&ops.mesh, |x| problem.initial_gradient(x), &ops.rule)
}

/// Runs the full time loop `n = 1..=N`.
pub fn solve<P: ProblemSpec + ?Sized>(
    problem: &P,
    ops: &SpaceOperators,
    grid: &TimeGrid,
    alpha: f64,
    config: &NewtonConfig,
) -> Result<Solution> {
    check_alpha(alpha)?;
    let mut state = TimeLoopState::new(initial_value(problem, ops)?, ops);
    let mut stats = Vec::with_capacity(grid.steps());
    for _ in 1..=grid.steps() {
        let level = state.next_level();
        let s = step(problem, ops, grid, alpha, &mut state, config).map_err(|e| match e {
            Error::ZeroPivot { .. } | Error::SolveAccuracy { .. } | Error::SingularBorder(_) => Error::AtLevel {
                level,
                source: Box::new(e),
            },
            other => other,
        })?;
        stats.push(s);
    }
    Ok(Solution {
        history: state.history,
        stats,
    })
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}
