#![allow(clippy::needless_range_loop)]

//! Acceptance suite: reproduces the convergence tables and the structural
//! checks at their stated tolerances and prints one PASS/FAIL line per
//! criterion. Exits nonzero if any criterion fails.

use std::time::{Duration, Instant};

use l1fem_core::experiment::{
    default_coupling_factor, run, sweep_space, sweep_time, RunOutcome, SpaceCoupling, Sweep,
};
use l1fem_core::l1::gamma;
use l1fem_core::verify;
use l1fem_core::{Example, ForcingMode, Grading, ManufacturedCase, RunConfig};

const LADDER: [usize; 4] = [64, 128, 256, 512];
const ALPHAS: [f64; 3] = [0.4, 0.5, 0.7];

/// Aggregated Newton statistics over every accepted step of criteria 1–5.
#[derive(Default)]
struct Equivalence {
    steps: usize,
    worst_gap: f64,
    worst_residual: f64,
    max_iterations: usize,
    non_monotone: usize,
}

impl Equivalence {
    fn absorb(&mut self, outcomes: &[RunOutcome]) {
        for o in outcomes {
            for s in o.stats() {
                self.steps += 1;
                self.worst_gap = self.worst_gap.max(s.constraint_gap / (1.0 + s.final_d.abs()));
                self.worst_residual = self.worst_residual.max(s.unbordered_residual);
                self.max_iterations = self.max_iterations.max(s.iterations);
                if !s.residuals_decrease() {
                    self.non_monotone += 1;
                }
            }
        }
    }
}

struct Verdict {
    passed: bool,
    summary: String,
    details: Vec<String>,
}

impl Verdict {
    fn new(passed: bool, summary: impl Into<String>, details: Vec<String>) -> Self {
        Self {
            passed,
            summary: summary.into(),
            details,
        }
    }
}

fn orders(sweep: &Sweep) -> Vec<f64> {
    sweep.records.iter().filter_map(|r| r.order).collect()
}

fn fmt_orders(v: &[f64]) -> String {
    v.iter().map(|o| format!("{o:.4}")).collect::<Vec<_>>().join(", ")
}

fn within(got: &[f64], want: &[f64], tol: f64) -> bool {
    got.len() == want.len() && got.iter().zip(want).all(|(g, w)| (g - w).abs() <= tol)
}

fn temporal(example: u8, alpha: f64, grading: Grading, cells: usize) -> Sweep {
    let base = RunConfig::new(Example::Manufactured(example), alpha, grading, LADDER[0], cells);
    sweep_time(&base, &LADDER, SpaceCoupling::Fixed, 1).expect("temporal sweep")
}

fn runtime_ok(start: Instant, limit: Duration, details: &mut Vec<String>) -> bool {
    let took = start.elapsed();
    details.push(format!("runtime {:.1}s (limit {}s)", took.as_secs_f64(), limit.as_secs()));
    took <= limit
}

fn criterion_1(eq: &mut Equivalence) -> Verdict {
    let start = Instant::now();
    let reference = [[1.5698, 1.5912, 1.6339], [1.4789, 1.4911, 1.5104], [1.2911, 1.2955, 1.3000]];
    let mut ok = true;
    let mut details = Vec::new();
    for (alpha, want) in ALPHAS.iter().zip(reference) {
        let sweep = temporal(1, *alpha, Grading::Uniform, 512);
        eq.absorb(&sweep.outcomes);
        let got = orders(&sweep);
        let last_ok = got.last().is_some_and(|&o| o >= 2.0 - alpha - 0.25);
        let pass = within(&got, &want, 0.15) && last_ok;
        ok &= pass;
        details.push(format!(
            "alpha={alpha}: orders [{}] reference [{}] e(64)={:.3e} {}",
            fmt_orders(&got),
            fmt_orders(&want),
            sweep.records[0].error,
            if pass { "ok" } else { "out of tolerance" }
        ));
    }
    ok &= runtime_ok(start, Duration::from_secs(120), &mut details);
    if !ok {
        // Same sweep at the reference spatial resolution, for diagnosis only.
        let sweep = temporal(1, 0.4, Grading::Uniform, 1000);
        details.push(format!(
            "diagnostic alpha=0.4 at Ms=1000 (reference resolution): orders [{}]",
            fmt_orders(&orders(&sweep))
        ));
    }
    Verdict::new(ok, "Example 1 uniform temporal orders within 0.15 of the reference table (Ms=512)", details)
}

fn criterion_2(eq: &mut Equivalence) -> Verdict {
    let reference = [[0.2463, 0.2860, 0.3163], [0.3830, 0.4207, 0.4461], [0.6384, 0.6638, 0.6784]];
    let mut ok = true;
    let mut details = Vec::new();
    for (alpha, want) in ALPHAS.iter().zip(reference) {
        let sweep = temporal(2, *alpha, Grading::Uniform, 512);
        eq.absorb(&sweep.outcomes);
        let got = orders(&sweep);
        let pass = within(&got, &want, 0.10) && got.iter().all(|&o| o < 1.0);
        ok &= pass;
        details.push(format!("alpha={alpha}: orders [{}] reference [{}]", fmt_orders(&got), fmt_orders(&want)));
    }
    Verdict::new(ok, "Example 2 uniform temporal orders within 0.10 of the reference table, all below 1", details)
}

fn criterion_3(eq: &mut Equivalence) -> Verdict {
    let reference = [[1.4771, 1.5210, 1.5530], [1.4157, 1.4498, 1.4735], [1.2649, 1.2815, 1.2921]];
    let mut ok = true;
    let mut details = Vec::new();
    for (alpha, want) in ALPHAS.iter().zip(reference) {
        let sweep = temporal(2, *alpha, Grading::Optimal, 512);
        eq.absorb(&sweep.outcomes);
        let got = orders(&sweep);
        let trending = got.windows(2).all(|w| w[1] >= w[0]) && got.iter().all(|&o| o <= 2.0 - alpha + 0.10);
        let pass = within(&got, &want, 0.10) && trending;
        ok &= pass;
        details.push(format!("alpha={alpha}: orders [{}] reference [{}]", fmt_orders(&got), fmt_orders(&want)));
    }
    Verdict::new(ok, "Example 2 graded temporal orders within 0.10 of the reference table, trending to 2-alpha", details)
}

fn criterion_4(eq: &mut Equivalence) -> Verdict {
    let start = Instant::now();
    let cells = [16, 32, 64, 128];
    let mut ok = true;
    let mut details = Vec::new();
    for example in [1u8, 2] {
        for alpha in ALPHAS {
            let base = RunConfig::new(Example::Manufactured(example), alpha, Grading::Optimal, 2048, cells[0]);
            let sweep = sweep_space(&base, &cells, false, 1).expect("spatial sweep");
            eq.absorb(&sweep.outcomes);
            let (l2, h1): (Vec<_>, Vec<_>) = sweep.records.iter().partition(|r| r.norm.as_str() == "L2_final_family");
            let l2o: Vec<f64> = l2.iter().filter_map(|r| r.order).collect();
            let h1o: Vec<f64> = h1.iter().filter_map(|r| r.order).collect();
            let pass = l2o.iter().all(|o| (1.95..=2.10).contains(o)) && h1o.iter().all(|o| (0.98..=1.01).contains(o));
            ok &= pass;
            details.push(format!(
                "example {example} alpha={alpha}: L2 [{}] H1 [{}] {}",
                fmt_orders(&l2o),
                fmt_orders(&h1o),
                if pass { "ok" } else { "out of range" }
            ));
        }
    }
    ok &= runtime_ok(start, Duration::from_secs(180), &mut details);
    Verdict::new(ok, "spatial L2 orders in [1.95, 2.10], H1 in [0.98, 1.01] (N=2048 graded)", details)
}

fn criterion_5(eq: &mut Equivalence) -> Verdict {
    let start = Instant::now();
    let mut ok = true;
    let mut details = Vec::new();
    for (alpha, want) in [(0.5, [1.4909, 1.4995]), (0.7, [1.2815, 1.3042])] {
        let base = RunConfig::new(Example::Manufactured(3), alpha, Grading::Optimal, 16, 4);
        let factor = default_coupling_factor(alpha);
        let time = sweep_time(&base, &[16, 81, 256], SpaceCoupling::Coupled { factor }, 1).expect("coupled sweep");
        eq.absorb(&time.outcomes);
        let got = orders(&time);
        let cells: Vec<usize> = time.records.iter().map(|r| r.cells).collect();
        let tpass = within(&got, &want, 0.10);

        let space = sweep_space(&base, &[4, 8, 16, 32], true, 1).expect("coupled spatial sweep");
        eq.absorb(&space.outcomes);
        let (l2, h1): (Vec<_>, Vec<_>) = space.records.iter().partition(|r| r.norm.as_str() == "L2_final_family");
        let l2o: Vec<f64> = l2.iter().filter_map(|r| r.order).collect();
        let h1o: Vec<f64> = h1.iter().filter_map(|r| r.order).collect();
        let spass = l2o.iter().all(|o| (1.90..=2.05).contains(o)) && h1o.iter().all(|o| (0.97..=1.01).contains(o));
        ok &= tpass && spass;
        details.push(format!(
            "alpha={alpha}: temporal [{}] reference [{}] (Ms {cells:?}) {}",
            fmt_orders(&got),
            fmt_orders(&want),
            if tpass { "ok" } else { "out of tolerance" }
        ));
        details.push(format!(
            "alpha={alpha}: spatial L2 [{}] H1 [{}] (H1 error at Ms=4: {:.4e}) {}",
            fmt_orders(&l2o),
            fmt_orders(&h1o),
            h1[0].error,
            if spass { "ok" } else { "out of range" }
        ));
    }
    ok &= runtime_ok(start, Duration::from_secs(600), &mut details);
    Verdict::new(ok, "2D coupled sweeps: temporal orders within 0.10, L2 in [1.90, 2.05], H1 in [0.97, 1.01]", details)
}

fn criterion_6() -> Verdict {
    let checks = [
        verify::check_d_rows(),
        verify::check_coercivity(200, 2024),
        verify::check_p_bounds(),
        verify::check_truncation(),
    ];
    let ok = checks.iter().all(|c| c.passed);
    let details = checks
        .iter()
        .map(|c| format!("{}: {} ({})", c.name, if c.passed { "ok" } else { "FAILED" }, c.detail))
        .collect();
    Verdict::new(ok, "d-row identity/monotonicity, coercivity, p-coefficient bound, truncation probe", details)
}

/// Gaussian elimination with partial pivoting on a dense copy.
fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

/// Independent dense implementation of the 1D scheme in the integral
/// (`w_{n,k}`) form of the L1 operator, solved by plain Newton on the
/// un-bordered system with the rank-one `a′` term in a dense Jacobian.
fn dense_oracle(case: &ManufacturedCase, steps: usize, r: f64, cells: usize) -> Vec<Vec<f64>> {
    let alpha = case.alpha();
    let pi = std::f64::consts::PI;
    let h = pi / cells as f64;
    let m = cells - 1;
    let t: Vec<f64> = (0..=steps).map(|n| (n as f64 / steps as f64).powf(r)).collect();
    let mut mass = vec![vec![0.0; m]; m];
    let mut stiff = vec![vec![0.0; m]; m];
    for i in 0..m {
        mass[i][i] = 4.0 * h / 6.0;
        stiff[i][i] = 2.0 / h;
        if i + 1 < m {
            mass[i][i + 1] = h / 6.0;
            mass[i + 1][i] = h / 6.0;
            stiff[i][i + 1] = -1.0 / h;
            stiff[i + 1][i] = -1.0 / h;
        }
    }
    let c = vec![h; m];
    let gauss = [
        (0.5 - 15f64.sqrt() / 10.0, 5.0 / 18.0),
        (0.5, 8.0 / 18.0),
        (0.5 + 15f64.sqrt() / 10.0, 5.0 / 18.0),
    ];
    let load = |tn: f64| {
        let mut f = vec![0.0; m];
        for e in 0..cells {
            for (xi, w) in gauss {
                let x = (e as f64 + xi) * h;
                let g = case.f([x, 0.0], tn, 0.0);
                // Left node e has hat 1 − xi, right node e+1 has xi; dof = node − 1.
                if e >= 1 {
                    f[e - 1] += w * h * g * (1.0 - xi);
                }
                if e < m {
                    f[e] += w * h * g * xi;
                }
            }
        }
        f
    };
    let g2 = gamma(2.0 - alpha);
    let mut hist = vec![vec![0.0; m]];
    for n in 1..=steps {
        let w = |k: usize| ((t[n] - t[k]).powf(1.0 - alpha) - (t[n] - t[k + 1]).powf(1.0 - alpha)) / (t[k + 1] - t[k]);
        let mut known = vec![0.0; m];
        for k in 0..n - 1 {
            for i in 0..m {
                known[i] += w(k) * (hist[k + 1][i] - hist[k][i]);
            }
        }
        let wl = w(n - 1);
        let f = load(t[n]);
        let mut u = hist[n - 1].clone();
        for _ in 0..50 {
            let l: f64 = c.iter().zip(&u).map(|(a, b)| a * b).sum();
            let caputo: Vec<f64> = (0..m).map(|i| (known[i] + wl * (u[i] - hist[n - 1][i])) / g2).collect();
            let ku: Vec<f64> = (0..m).map(|i| (0..m).map(|j| stiff[i][j] * u[j]).sum()).collect();
            let a = ManufacturedCase::a(l);
            let ap = ManufacturedCase::a_prime(l);
            let res: Vec<f64> = (0..m)
                .map(|i| (0..m).map(|j| mass[i][j] * caputo[j]).sum::<f64>() + a * ku[i] - f[i])
                .collect();
            let jac: Vec<Vec<f64>> = (0..m)
                .map(|i| (0..m).map(|j| mass[i][j] * wl / g2 + a * stiff[i][j] + ap * ku[i] * c[j]).collect())
                .collect();
            let du = dense_solve(jac, res);
            u.iter_mut().zip(&du).for_each(|(x, d)| *x -= d);
            if du.iter().fold(0.0f64, |s, d| s.max(d.abs())) < 1e-15 {
                break;
            }
        }
        hist.push(u);
    }
    hist
}

fn criterion_7() -> Verdict {
    let mut ok = true;
    let mut details = Vec::new();
    for (example, alpha, steps, r, cells) in [(1u8, 0.5, 2, 1.0, 3), (2, 0.5, 3, 2.0, 4), (2, 0.3, 3, 2.0, 4)] {
        let case = ManufacturedCase::new(example, alpha, ForcingMode::Pure).unwrap();
        let mut cfg = RunConfig::new(Example::Manufactured(example), alpha, Grading::Fixed(r), steps, cells);
        cfg.forcing = ForcingMode::Pure;
        let prod = run(&cfg).expect("production run");
        let oracle = dense_oracle(&case, steps, r, cells);
        let diff = prod
            .solution
            .history
            .iter()
            .zip(&oracle)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0f64, f64::max);
        let pass = diff <= 1e-10 && prod.solution.history.len() == oracle.len();
        ok &= pass;
        details.push(format!("example {example} alpha={alpha} N={steps} r={r} Ms={cells}: max coefficient diff {diff:.2e}"));
    }
    Verdict::new(ok, "production solver matches dense brute-force oracle within 1e-10", details)
}

fn criterion_8(eq: &Equivalence) -> Verdict {
    let ok = eq.steps > 0 && eq.worst_gap <= 1e-12 && eq.worst_residual <= 1e-10;
    Verdict::new(
        ok,
        "every accepted step: |l(U)-d| <= 1e-12(1+|d|), un-bordered residual <= 1e-10",
        vec![format!(
            "{} steps, max scaled gap {:.2e}, max un-bordered residual {:.2e}, max Newton iterations {}, non-monotone residual histories {}",
            eq.steps, eq.worst_gap, eq.worst_residual, eq.max_iterations, eq.non_monotone
        )],
    )
}

fn criterion_9() -> Verdict {
    let c = verify::check_jacobian(1e-7, 1e-5, 42);
    Verdict::new(c.passed, "finite-difference check of A and b columns, eps=1e-7, tol 1e-5", vec![c.detail])
}

fn main() {
    let mut eq = Equivalence::default();
    let mut results: Vec<(usize, Verdict)> = Vec::new();
    let report = |id: usize, v: Verdict, results: &mut Vec<(usize, Verdict)>| {
        println!("criterion {id}: {} - {}", if v.passed { "PASS" } else { "FAIL" }, v.summary);
        for d in &v.details {
            println!("    {d}");
        }
        results.push((id, v));
    };
    let v = criterion_1(&mut eq);
    report(1, v, &mut results);
    let v = criterion_2(&mut eq);
    report(2, v, &mut results);
    let v = criterion_3(&mut eq);
    report(3, v, &mut results);
    let v = criterion_4(&mut eq);
    report(4, v, &mut results);
    let v = criterion_5(&mut eq);
    report(5, v, &mut results);
    report(6, criterion_6(), &mut results);
    report(7, criterion_7(), &mut results);
    report(8, criterion_8(&eq), &mut results);
    report(9, criterion_9(), &mut results);

    let failed: Vec<usize> = results.iter().filter(|(_, v)| !v.passed).map(|(id, _)| *id).collect();
    println!("acceptance summary: {} passed, {} failed {:?}", results.len() - failed.len(), failed.len(), failed);
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
