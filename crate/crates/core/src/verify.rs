//! Property suites over the discretisation: L1 weights, complementary
//! coefficients, truncation error, quadrature, Ritz projection, Newton
//! Jacobian and formulation equivalence. Each check returns a
//! [`CheckReport`]; [`run_all`] runs the full set.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::analysis::{l2_error, max_over_time, SpatialNorm};
use crate::error::Result;
use crate::fem::{ritz_projection, Element, QuadratureRule};
use crate::l1::{gamma, p_coefficients_all, truncation_probe, L1Row};
use crate::manufactured::{ExactSolution, ForcingMode, ManufacturedCase};
use crate::meshes::{SpatialMesh, TimeGrid};
use crate::stepper::{newton_jacobian, newton_residual, solve, NewtonConfig, ProblemSpec, SpaceOperators};

const ALPHAS: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckReport {
    fn new(name: &'static str, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name,
            passed,
            detail: detail.into(),
        }
    }

    fn from_result(name: &'static str, r: Result<CheckReport>) -> Self {
        r.unwrap_or_else(|e| Self::new(name, false, format!("error: {e}")))
    }
}

/// Source of L1 rows; swapped out to inject faults.
pub type RowProvider<'a> = dyn Fn(&TimeGrid, usize, f64) -> Result<L1Row> + 'a;

pub fn run_all() -> Vec<CheckReport> {
    vec![
        check_d_rows(),
        check_coercivity(200, 7),
        check_linearity(50, 11),
        check_p_bounds(),
        check_p_stability(),
        check_truncation(),
        check_quadrature(),
        check_galerkin_orthogonality(),
        check_jacobian(1e-7, 1e-5, 3),
        check_formulation_equivalence(),
    ]
}

fn grading_set(alpha: f64) -> [f64; 3] {
    [1.0, 2.0, (2.0 - alpha) / alpha]
}

/// `d_{n,1} = τ_n^{−α}` (1e−13 relative), positivity and monotonicity of every
/// row up to `N = 2^10` on uniform, `r = 2` and optimally graded grids.
pub fn check_d_rows() -> CheckReport {
    check_d_rows_with(&|g, n, a| L1Row::new(g, n, a), 1024)
}

pub fn check_d_rows_with(rows: &RowProvider<'_>, steps: usize) -> CheckReport {
    const NAME: &str = "l1_row_identity_monotone";
    let run = || -> Result<CheckReport> {
        let mut count = 0usize;
        for alpha in ALPHAS {
            for r in grading_set(alpha) {
                let grid = TimeGrid::new(1.0, steps, r)?;
                for n in 1..=steps {
                    let row = rows(&grid, n, alpha)?;
                    let want = grid.tau(n).powf(-alpha);
                    if ((row.d(1) - want) / want).abs() > 1e-13 {
                        return Ok(CheckReport::new(
                            NAME,
                            false,
                            format!("alpha={alpha} r={r} n={n} k=1: d={} expected {want}", row.d(1)),
                        ));
                    }
                    for k in 1..=n {
                        let dk = row.d(k);
                        let bad_next = k < n && row.d(k + 1) > dk;
                        if !(dk > 0.0) || bad_next {
                            return Ok(CheckReport::new(
                                NAME,
                                false,
                                format!("alpha={alpha} r={r} n={n} k={k}: d_k={dk} not positive/nonincreasing"),
                            ));
                        }
                    }
                    count += 1;
                }
            }
        }
        Ok(CheckReport::new(NAME, true, format!("{count} rows")))
    };
    CheckReport::from_result(NAME, run())
}

/// `(D v^n) v^n >= ½ D (v^n)²` on random sequences and graded grids.
pub fn check_coercivity(cases: usize, seed: u64) -> CheckReport {
    const NAME: &str = "l1_coercivity";
    let mut rng = StdRng::seed_from_u64(seed);
    let run = |rng: &mut StdRng| -> Result<CheckReport> {
        let mut worst = f64::INFINITY;
        for case in 0..cases {
            let alpha = ALPHAS[case % ALPHAS.len()];
            let steps = rng.random_range(1..=40);
            let r = rng.random_range(1.0..5.0);
            let t_end = rng.random_range(0.1..3.0);
            let grid = TimeGrid::new(t_end, steps, r)?;
            let n = rng.random_range(1..=steps);
            let v: Vec<f64> = (0..=n).map(|_| rng.random_range(-2.0..2.0)).collect();
            let sq: Vec<f64> = v.iter().map(|x| x * x).collect();
            let row = L1Row::new(&grid, n, alpha)?;
            let lhs = row.apply(&v)? * v[n];
            let rhs = 0.5 * row.apply(&sq)?;
            let slack = (lhs - rhs) / (1.0 + lhs.abs() + rhs.abs());
            worst = worst.min(slack);
            if slack < -1e-12 {
                return Ok(CheckReport::new(
                    NAME,
                    false,
                    format!("case {case}: alpha={alpha} r={r:.3} n={n}: {lhs} < {rhs}"),
                ));
            }
        }
        Ok(CheckReport::new(NAME, true, format!("{cases} cases, min scaled slack {worst:.3e}")))
    };
    CheckReport::from_result(NAME, run(&mut rng))
}

/// `D(a v + b w) = a D v + b D w` within 1e−12 relative.
pub fn check_linearity(cases: usize, seed: u64) -> CheckReport {
    const NAME: &str = "l1_linearity";
    let mut rng = StdRng::seed_from_u64(seed);
    let run = |rng: &mut StdRng| -> Result<CheckReport> {
        for case in 0..cases {
            let alpha = ALPHAS[case % ALPHAS.len()];
            let steps = rng.random_range(1..=30);
            let grid = TimeGrid::new(1.0, steps, rng.random_range(1.0..4.0))?;
            let n = rng.random_range(1..=steps);
            let v: Vec<f64> = (0..=n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let w: Vec<f64> = (0..=n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let (a, b) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let combo: Vec<f64> = v.iter().zip(&w).map(|(x, y)| a * x + b * y).collect();
            let row = L1Row::new(&grid, n, alpha)?;
            let (dv, dw) = (row.apply(&v)?, row.apply(&w)?);
            let lhs = row.apply(&combo)?;
            let rhs = a * dv + b * dw;
            let scale = (a * dv).abs() + (b * dw).abs() + 1.0;
            if (lhs - rhs).abs() > 1e-12 * scale {
                return Ok(CheckReport::new(NAME, false, format!("case {case}: {lhs} vs {rhs}")));
            }
        }
        Ok(CheckReport::new(NAME, true, format!("{cases} cases")))
    };
    CheckReport::from_result(NAME, run(&mut rng))
}

/// `p ≥ 0`, `p_0 = Γ(2−α) τ_n^α` and `Σ_s p^{(n)}_{n−s} t_s^{−α}/Γ(1−α) <= 1`
/// for every level of every grid.
pub fn check_p_bounds() -> CheckReport {
    const NAME: &str = "p_coefficient_bound";
    let run = || -> Result<CheckReport> {
        let mut worst = 0.0f64;
        for alpha in ALPHAS {
            for r in [1.0, 2.0, 4.0] {
                for steps in [8, 64, 256] {
                    let grid = TimeGrid::new(1.0, steps, r)?;
                    let g1 = gamma(1.0 - alpha);
                    for p in p_coefficients_all(&grid, alpha)? {
                        let n = p.level();
                        let want0 = gamma(2.0 - alpha) * grid.tau(n).powf(alpha);
                        let tag = format!("alpha={alpha} r={r} N={steps} n={n}");
                        if ((p.get(0) - want0) / want0).abs() > 1e-12 {
                            return Ok(CheckReport::new(NAME, false, format!("{tag}: p_0={} expected {want0}", p.get(0))));
                        }
                        if let Some(j) = p.values().iter().position(|&v| v < 0.0) {
                            return Ok(CheckReport::new(NAME, false, format!("{tag}: p_{j} = {} < 0", p.get(j))));
                        }
                        let s = p.weighted_sum(|s| grid.t(s).powf(-alpha) / g1);
                        worst = worst.max(s);
                        if s > 1.0 + 1e-12 {
                            return Ok(CheckReport::new(NAME, false, format!("{tag}: sum {s} > 1")));
                        }
                    }
                }
            }
        }
        Ok(CheckReport::new(NAME, true, format!("max sum {worst:.15}")))
    };
    CheckReport::from_result(NAME, run())
}

/// `max_n N^β Σ_s p^{(n)}_{n−s} s^{−β}` for `β = min(2−α, rα)`.
pub fn p_stability_constant(alpha: f64, r: f64, steps: usize) -> Result<f64> {
    let grid = TimeGrid::new(1.0, steps, r)?;
    let beta = (2.0 - alpha).min(r * alpha);
    let scale = (steps as f64).powf(beta);
    Ok(p_coefficients_all(&grid, alpha)?
        .iter()
        .map(|p| scale * p.weighted_sum(|s| (s as f64).powf(-beta)))
        .fold(0.0, f64::max))
}

/// `Σ_s p^{(n)}_{n−s} s^{−β} <= C N^{−β}` with one `C` per `(α, r)`: the
/// constant fitted at `N = 8` must cover `N = 64, 256` up to a factor 2.
/// Skips the logarithmic case `rα = 2−α`.
pub fn check_p_stability() -> CheckReport {
    const NAME: &str = "p_coefficient_stability";
    let run = || -> Result<CheckReport> {
        let mut worst = 0.0f64;
        let mut cases = 0;
        for alpha in ALPHAS {
            for r in [1.0, 2.0, 4.0] {
                if (r * alpha - (2.0 - alpha)).abs() < 1e-9 {
                    continue;
                }
                let c8 = p_stability_constant(alpha, r, 8)?;
                for steps in [64, 256] {
                    let c = p_stability_constant(alpha, r, steps)?;
                    worst = worst.max(c / c8);
                    if c > 2.0 * c8 {
                        return Ok(CheckReport::new(
                            NAME,
                            false,
                            format!("alpha={alpha} r={r} N={steps}: C={c:.4e} vs fitted {c8:.4e}"),
                        ));
                    }
                }
                cases += 1;
            }
        }
        Ok(CheckReport::new(NAME, true, format!("{cases} (alpha, r) pairs, max C_N/C_8 = {worst:.4}")))
    };
    CheckReport::from_result(NAME, run())
}

/// `max_n n^{min(2−α, rα)} |ζ^n|` as a function of `N`.
pub fn truncation_scaled(alpha: f64, r: f64, steps: usize) -> Result<f64> {
    let grid = TimeGrid::new(1.0, steps, r)?;
    let beta = (2.0 - alpha).min(r * alpha);
    let exact = gamma(1.0 + alpha);
    let zeta = truncation_probe(|_| exact, |t| t.powf(alpha), &grid, alpha)?;
    Ok(zeta
        .iter()
        .enumerate()
        .map(|(i, z)| ((i + 1) as f64).powf(beta) * z.abs())
        .fold(0.0, f64::max))
}

/// For `u = t^α` on the optimal grading the scaled truncation error stays
/// within a factor 2 while `N` doubles from 64 to 512.
pub fn check_truncation() -> CheckReport {
    const NAME: &str = "truncation_scaled_bounded";
    let run = || -> Result<CheckReport> {
        let mut detail = Vec::new();
        for alpha in [0.3, 0.5, 0.7] {
            let r = (2.0 - alpha) / alpha;
            let vals = [64, 128, 256, 512]
                .iter()
                .map(|&n| truncation_scaled(alpha, r, n))
                .collect::<Result<Vec<_>>>()?;
            for w in vals.windows(2) {
                let ratio = w[1] / w[0];
                if !(0.5..=2.0).contains(&ratio) {
                    return Ok(CheckReport::new(NAME, false, format!("alpha={alpha}: scaled values {vals:?}")));
                }
            }
            detail.push(format!("alpha={alpha}: {:.4e}..{:.4e}", vals[0], vals[3]));
        }
        Ok(CheckReport::new(NAME, true, detail.join("; ")))
    };
    CheckReport::from_result(NAME, run())
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

/// Reference-element monomial exactness of every rule up to its degree.
pub fn check_quadrature() -> CheckReport {
    const NAME: &str = "quadrature_exactness";
    let rules = [
        ("gauss3", QuadratureRule::gauss3()),
        ("gauss5", QuadratureRule::gauss5()),
        ("triangle_midpoints", QuadratureRule::triangle_midpoints()),
        ("triangle_degree4", QuadratureRule::triangle_degree4()),
    ];
    for (label, rule) in &rules {
        let deg = rule.degree() as u32;
        for a in 0..=deg {
            for b in 0..=(deg - a) {
                if rule.dim() == 1 && b > 0 {
                    continue;
                }
                let got: f64 = rule.iter().map(|(p, w)| w * p[0].powi(a as i32) * p[1].powi(b as i32)).sum();
                let want = if rule.dim() == 1 {
                    1.0 / f64::from(a + 1)
                } else {
                    factorial(a) * factorial(b) / factorial(a + b + 2)
                };
                if (got - want).abs() > 1e-14 {
                    return CheckReport::new(NAME, false, format!("{label}: x^{a} y^{b}: {got} vs {want}"));
                }
            }
        }
    }
    CheckReport::new(NAME, true, format!("{} rules", rules.len()))
}

/// Max over interior dofs of `|(∇(w − R_h w), ∇φ_i)|`, evaluated element by
/// element with `rule`.
pub fn galerkin_residual(
    mesh: &SpatialMesh,
    proj: &[f64],
    grad_w: impl Fn([f64; 2]) -> [f64; 2],
    rule: &QuadratureRule,
) -> f64 {
    let mut res = vec![0.0; mesh.num_dofs()];
    for e in 0..mesh.num_elements() {
        let el = Element::new(mesh, e);
        let vals = crate::fem::local_values(mesh, &el, proj);
        let mut gh = [0.0; 2];
        for a in 0..el.count {
            gh[0] += vals[a] * el.grads[a][0];
            gh[1] += vals[a] * el.grads[a][1];
        }
        for (r, wq) in rule.iter() {
            let g = grad_w(el.map(r));
            let diff = [g[0] - gh[0], g[1] - gh[1]];
            for a in 0..el.count {
                if let Some(i) = mesh.node_dof(el.nodes[a]) {
                    res[i] += wq * el.det * (diff[0] * el.grads[a][0] + diff[1] * el.grads[a][1]);
                }
            }
        }
    }
    res.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Galerkin orthogonality of the Ritz projection, 1D and 2D, checked with the
/// refined (norm) quadrature on data the projection rule integrates exactly.
pub fn check_galerkin_orthogonality() -> CheckReport {
    const NAME: &str = "ritz_galerkin_orthogonality";
    let run = || -> Result<CheckReport> {
        let pi = std::f64::consts::PI;
        let line = SpatialMesh::interval(pi, 24)?;
        let square = SpatialMesh::unit_square(12)?;
        // 1D: w = x²(π − x), quadratic w'; 2D: w = x y (1−x)(1−y), cubic ∇w.
        let g1 = |x: [f64; 2]| [2.0 * pi * x[0] - 3.0 * x[0] * x[0], 0.0];
        let g2 = |x: [f64; 2]| {
            let (a, b) = (x[0] - x[0] * x[0], x[1] - x[1] * x[1]);
            [(1.0 - 2.0 * x[0]) * b, a * (1.0 - 2.0 * x[1])]
        };
        let mut worst = 0.0f64;
        for (mesh, grad) in [(&line, &g1 as &dyn Fn([f64; 2]) -> [f64; 2]), (&square, &g2)] {
            let rule = QuadratureRule::norm_for(mesh);
            let proj = ritz_projection(mesh, grad, &rule)?;
            let r = galerkin_residual(mesh, &proj, grad, &rule);
            worst = worst.max(r);
        }
        Ok(CheckReport::new(NAME, worst <= 1e-11, format!("max residual {worst:.3e}")))
    };
    CheckReport::from_result(NAME, run())
}

/// Problem with a genuinely nonlinear, `x`-dependent reaction, used to
/// exercise the `f′(U)` Jacobian block.
#[derive(Debug, Clone, Copy)]
pub struct NonlinearProbe;

impl ProblemSpec for NonlinearProbe {
    fn diffusion(&self, xi: f64) -> f64 {
        3.0 + xi.sin()
    }
    fn diffusion_derivative(&self, xi: f64) -> f64 {
        xi.cos()
    }
    fn forcing(&self, x: [f64; 2], t: f64, u: f64) -> f64 {
        (1.0 + x[0]) * u.cos() + t * u * u
    }
    fn forcing_du(&self, x: [f64; 2], t: f64, u: f64) -> f64 {
        -(1.0 + x[0]) * u.sin() + 2.0 * t * u
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

/// Largest deviation between the assembled `A`, `b` and forward differences
/// of the residual, on a random state of `problem`.
pub fn jacobian_fd_deviation<P: ProblemSpec + ?Sized>(
    problem: &P,
    mesh: SpatialMesh,
    alpha: f64,
    eps: f64,
    seed: u64,
) -> Result<f64> {
    let mut rng = StdRng::seed_from_u64(seed);
    let ops = SpaceOperators::new(mesh);
    let m = ops.num_dofs();
    let grid = TimeGrid::new(1.0, 4, 2.0)?;
    let n = 3;
    let row = L1Row::new(&grid, n, alpha)?;
    let history: Vec<Vec<f64>> = (0..n).map(|_| (0..m).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let u: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
    let d = rng.random_range(-1.0..1.0);
    let t = grid.t(n);
    let sys = newton_jacobian(problem, &ops, &history, &row, t, &u, d)?;
    let (f0, _) = newton_residual(problem, &ops, &history, &row, t, &u, d)?;
    let mut worst = 0.0f64;
    for j in 0..m {
        let mut up = u.clone();
        up[j] += eps;
        let (fj, _) = newton_residual(problem, &ops, &history, &row, t, &up, d)?;
        for i in 0..m {
            worst = worst.max(((fj[i] - f0[i]) / eps - sys.a.get(i, j)).abs());
        }
    }
    let (fd, _) = newton_residual(problem, &ops, &history, &row, t, &u, d + eps)?;
    for i in 0..m {
        worst = worst.max(((fd[i] - f0[i]) / eps - sys.b[i]).abs());
    }
    Ok(worst)
}

/// Finite-difference check of the `A` and `b` columns, 1D and 2D, for the
/// reactive Example 2/3 forcing and a nonlinear reaction.
pub fn check_jacobian(eps: f64, tol: f64, seed: u64) -> CheckReport {
    const NAME: &str = "jacobian_finite_difference";
    let run = || -> Result<CheckReport> {
        let alpha = 0.6;
        let ex2 = ManufacturedCase::new(2, alpha, ForcingMode::Reactive)?;
        let ex3 = ManufacturedCase::new(3, alpha, ForcingMode::Reactive)?;
        let cases: [(&str, f64); 4] = [
            ("example2-reactive", jacobian_fd_deviation(&ex2, ex2.mesh(7)?, alpha, eps, seed)?),
            ("example3-reactive", jacobian_fd_deviation(&ex3, ex3.mesh(4)?, alpha, eps, seed + 1)?),
            ("nonlinear-1d", jacobian_fd_deviation(&NonlinearProbe, SpatialMesh::interval(1.0, 8)?, alpha, eps, seed + 2)?),
            ("nonlinear-2d", jacobian_fd_deviation(&NonlinearProbe, SpatialMesh::unit_square(4)?, alpha, eps, seed + 3)?),
        ];
        let worst = cases.iter().map(|c| c.1).fold(0.0, f64::max);
        let detail = cases
            .iter()
            .map(|(l, v)| format!("{l}={v:.2e}"))
            .collect::<Vec<_>>()
            .join(" ");
        Ok(CheckReport::new(NAME, worst <= tol, detail))
    };
    CheckReport::from_result(NAME, run())
}

/// Every accepted step of small 1D/2D runs satisfies `|l(U^n) − d| <=
/// 1e−12 (1+|d|)`, `‖F̄(U^n, l(U^n))‖∞ <= 1e−10`, decreasing Newton
/// residuals and the boundedness estimate.
pub fn check_formulation_equivalence() -> CheckReport {
    const NAME: &str = "formulation_equivalence";
    let run = || -> Result<CheckReport> {
        let mut steps = 0usize;
        let mut worst_gap = 0.0f64;
        let mut worst_res = 0.0f64;
        let configs: [(u8, f64, ForcingMode, usize, usize); 4] = [
            (1, 0.5, ForcingMode::Pure, 16, 32),
            (2, 0.4, ForcingMode::Reactive, 16, 32),
            (3, 0.7, ForcingMode::Pure, 8, 6),
            (3, 0.5, ForcingMode::Reactive, 8, 6),
        ];
        for (id, alpha, mode, n_steps, cells) in configs {
            let case = ManufacturedCase::new(id, alpha, mode)?;
            let mesh = case.mesh(cells)?;
            let ops = SpaceOperators::new(mesh.clone());
            let grid = TimeGrid::new(1.0, n_steps, (2.0 - alpha) / alpha)?;
            let sol = solve(&case, &ops, &grid, alpha, &NewtonConfig::default())?;
            let tag = format!("example {id} alpha={alpha} {mode:?}");
            for s in &sol.stats {
                steps += 1;
                worst_gap = worst_gap.max(s.constraint_gap / (1.0 + s.final_d.abs()));
                worst_res = worst_res.max(s.unbordered_residual);
                if !s.residuals_decrease() {
                    return Ok(CheckReport::new(NAME, false, format!("{tag} level {}: residuals {:?}", s.level, s.residuals)));
                }
            }
            let u_norm = sol.history.iter().map(|u| l2_error(&mesh, u, |_| 0.0)).fold(0.0, f64::max);
            let exact_norm = (1..=n_steps)
                .map(|n| {
                    let t = grid.t(n);
                    l2_error(&mesh, &vec![0.0; mesh.num_dofs()], |x| case.value(x, t))
                })
                .fold(0.0, f64::max);
            let u0 = l2_error(&mesh, &sol.history[0], |_| 0.0);
            if u_norm > 10.0 * (u0 + exact_norm + 1.0) {
                return Ok(CheckReport::new(NAME, false, format!("{tag}: max ‖U^n‖ = {u_norm}")));
            }
            let (err, _) = max_over_time(&mesh, &grid, &sol.history, &case, SpatialNorm::L2);
            if !err.is_finite() {
                return Ok(CheckReport::new(NAME, false, format!("{tag}: non-finite error")));
            }
        }
        let passed = worst_gap <= 1e-12 && worst_res <= 1e-10;
        Ok(CheckReport::new(
            NAME,
            passed,
            format!("{steps} steps, max scaled gap {worst_gap:.2e}, max unbordered residual {worst_res:.2e}"),
        ))
    };
    CheckReport::from_result(NAME, run())
}
