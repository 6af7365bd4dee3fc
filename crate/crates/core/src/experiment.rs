//! Run configurations, single runs and convergence sweeps.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::analysis::{fmt_sig10, max_over_time, observed_order, ErrorRecord, NormTag, SpatialNorm};
use crate::error::{Error, Result};
use crate::l1::check_alpha;
use crate::manufactured::{ExactSolution, ForcingMode, HomogeneousProblem, ManufacturedCase};
use crate::meshes::{SpatialMesh, TimeGrid};
use crate::stepper::{solve, NewtonConfig, ProblemSpec, Solution, SpaceOperators, StepStats};

/// Temporal grading exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Grading {
    Uniform,
    /// `r = (2 − α)/α`.
    Optimal,
    Fixed(f64),
}

impl Grading {
    pub fn exponent(self, alpha: f64) -> f64 {
        match self {
            Self::Uniform => 1.0,
            Self::Optimal => (2.0 - alpha) / alpha,
            Self::Fixed(r) => r,
        }
    }
}

impl FromStr for Grading {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "optimal" => Ok(Self::Optimal),
            "uniform" => Ok(Self::Uniform),
            _ => s
                .parse::<f64>()
                .map(Self::Fixed)
                .map_err(|_| Error::InvalidArgument(format!("bad grading '{s}'"))),
        }
    }
}

impl FromStr for ForcingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pure" => Ok(Self::Pure),
            "reactive" => Ok(Self::Reactive),
            _ => Err(Error::InvalidArgument(format!("bad forcing mode '{s}'"))),
        }
    }
}

/// Which problem to solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Example {
    Manufactured(u8),
    /// `f ≡ 0`, `u_0 ≡ 0` on `(0, π)`.
    Homogeneous,
}

impl Example {
    /// Numeric id used in CSV output (0 for the homogeneous problem).
    pub fn id(self) -> u8 {
        match self {
            Self::Manufactured(id) => id,
            Self::Homogeneous => 0,
        }
    }
}

impl FromStr for Example {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero" | "0" => Ok(Self::Homogeneous),
            "1" | "2" | "3" => Ok(Self::Manufactured(s.parse().expect("digit"))),
            _ => Err(Error::UnknownExample(s.to_string())),
        }
    }
}

impl fmt::Display for Example {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Manufactured(id) => write!(f, "{id}"),
            Self::Homogeneous => f.write_str("zero"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub example: Example,
    pub alpha: f64,
    pub grading: Grading,
    pub n_steps: usize,
    pub cells: usize,
    pub forcing: ForcingMode,
    pub newton: NewtonConfig,
    pub final_time: f64,
}

impl RunConfig {
    pub fn new(example: Example, alpha: f64, grading: Grading, n_steps: usize, cells: usize) -> Self {
        Self {
            example,
            alpha,
            grading,
            n_steps,
            cells,
            forcing: ForcingMode::Pure,
            newton: NewtonConfig::default(),
            final_time: 1.0,
        }
    }

    pub fn r(&self) -> f64 {
        self.grading.exponent(self.alpha)
    }

    pub fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        let r = self.r();
        if !(r >= 1.0 && r.is_finite()) {
            return Err(Error::InvalidArgument(format!("grading r must be >= 1, got {r}")));
        }
        if self.n_steps < 1 {
            return Err(Error::InvalidArgument("N must be >= 1".into()));
        }
        if self.cells < 2 {
            return Err(Error::InvalidArgument("Ms must be >= 2".into()));
        }
        if !(self.newton.tol > 0.0) {
            return Err(Error::InvalidArgument("newton tolerance must be positive".into()));
        }
        Ok(())
    }

    fn with(&self, n_steps: usize, cells: usize) -> Self {
        Self {
            n_steps,
            cells,
            ..self.clone()
        }
    }
}

/// Result of one solve with its errors against the exact solution.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub config: RunConfig,
    pub mesh: SpatialMesh,
    pub grid: TimeGrid,
    pub solution: Solution,
    /// `(max_n ‖e^n‖_{L²}, argmax n)`.
    pub max_l2: (f64, usize),
    pub max_h1: (f64, usize),
}

impl RunOutcome {
    pub fn error(&self, norm: SpatialNorm) -> f64 {
        match norm {
            SpatialNorm::L2 => self.max_l2.0,
            SpatialNorm::H1Semi => self.max_h1.0,
        }
    }

    pub fn stats(&self) -> &[StepStats] {
        &self.solution.stats
    }

    pub fn summary(&self) -> String {
        let iters = self.stats().iter().map(|s| s.iterations).max().unwrap_or(0);
        format!(
            "example={} alpha={} r={} N={} Ms={} max_L2={} (n={}) max_H1={} (n={}) max_newton={}",
            self.config.example,
            self.config.alpha,
            fmt_sig10(self.config.r()),
            self.config.n_steps,
            self.config.cells,
            fmt_sig10(self.max_l2.0),
            self.max_l2.1,
            fmt_sig10(self.max_h1.0),
            self.max_h1.1,
            iters
        )
    }
}

fn solve_case<P: ProblemSpec + ExactSolution>(problem: &P, mesh: SpatialMesh, config: &RunConfig) -> Result<RunOutcome> {
    let grid = TimeGrid::new(config.final_time, config.n_steps, config.r())?;
    let ops = SpaceOperators::new(mesh);
    let solution = solve(problem, &ops, &grid, config.alpha, &config.newton)?;
    let max_l2 = max_over_time(&ops.mesh, &grid, &solution.history, problem, SpatialNorm::L2);
    let max_h1 = max_over_time(&ops.mesh, &grid, &solution.history, problem, SpatialNorm::H1Semi);
    Ok(RunOutcome {
        config: config.clone(),
        mesh: ops.mesh,
        grid,
        solution,
        max_l2,
        max_h1,
    })
}

pub fn run(config: &RunConfig) -> Result<RunOutcome> {
    config.validate()?;
    match config.example {
        Example::Manufactured(id) => {
            let case = ManufacturedCase::new(id, config.alpha, config.forcing)?;
            solve_case(&case, case.mesh(config.cells)?, config)
        }
        Example::Homogeneous => {
            solve_case(&HomogeneousProblem, SpatialMesh::interval(std::f64::consts::PI, config.cells)?, config)
        }
    }
}

/// Nodal values at `T`: `x[,y],numerical,exact` over all mesh nodes.
pub fn solution_csv(outcome: &RunOutcome) -> Result<String> {
    let mesh = &outcome.mesh;
    let t = outcome.grid.final_time();
    let last = outcome.solution.history.last().expect("U^0 present");
    let exact: Box<dyn Fn([f64; 2]) -> f64> = match outcome.config.example {
        Example::Manufactured(id) => {
            let case = ManufacturedCase::new(id, outcome.config.alpha, outcome.config.forcing)?;
            Box::new(move |x| case.u(x, t))
        }
        Example::Homogeneous => Box::new(|_| 0.0),
    };
    let two_d = mesh.dim() == 2;
    let mut out = String::from(if two_d { "x,y,numerical,exact\n" } else { "x,numerical,exact\n" });
    for (node, &p) in mesh.coords().iter().enumerate() {
        let num = mesh.node_dof(node).map_or(0.0, |d| last[d]);
        if two_d {
            out.push_str(&format!("{},{},", fmt_sig10(p[0]), fmt_sig10(p[1])));
        } else {
            out.push_str(&format!("{},", fmt_sig10(p[0])));
        }
        out.push_str(&format!("{},{}\n", fmt_sig10(num), fmt_sig10(exact(p))));
    }
    Ok(out)
}

/// `M_s = factor · ⌊N^{(2−α)/2}⌋`.
pub fn coupled_cells(n_steps: usize, alpha: f64, factor: usize) -> usize {
    factor * floor_pow(n_steps as f64, (2.0 - alpha) / 2.0)
}

/// `N = ⌊M_s^{2/(2−α)}⌋`.
pub fn coupled_steps(cells: usize, alpha: f64) -> usize {
    floor_pow(cells as f64, 2.0 / (2.0 - alpha))
}

/// Default space-coupling factor: 2 for α = 0.7, 1 otherwise.
pub fn default_coupling_factor(alpha: f64) -> usize {
    if (alpha - 0.7).abs() < 1e-9 {
        2
    } else {
        1
    }
}

/// `⌊x^p⌋`, robust to results that land a few ulps below an integer.
fn floor_pow(x: f64, p: f64) -> usize {
    let v = x.powf(p);
    (v * (1.0 + 1e-12)).floor() as usize
}

fn run_all(configs: &[RunConfig], jobs: usize) -> Result<Vec<RunOutcome>> {
    if jobs <= 1 {
        return configs.iter().map(run).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    pool.install(|| configs.par_iter().map(run).collect())
}

fn records_for(outcomes: &[RunOutcome], norm: NormTag, resolution: impl Fn(&RunConfig) -> f64) -> Vec<ErrorRecord> {
    let errors: Vec<f64> = outcomes.iter().map(|o| o.error(norm.spatial())).collect();
    let res: Vec<f64> = outcomes.iter().map(|o| resolution(&o.config)).collect();
    let orders = observed_order(&errors, &res);
    outcomes
        .iter()
        .enumerate()
        .map(|(i, o)| ErrorRecord {
            example: o.config.example.id(),
            alpha: o.config.alpha,
            r: o.config.r(),
            n_steps: o.config.n_steps,
            cells: o.config.cells,
            norm,
            error: errors[i],
            order: orders.get(i).copied().flatten(),
        })
        .collect()
}

/// Space coupling for a temporal sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceCoupling {
    /// Use `base.cells` for every `N`.
    Fixed,
    /// `M_s = factor · ⌊N^{(2−α)/2}⌋`.
    Coupled { factor: usize },
}

#[derive(Debug, Clone)]
pub struct Sweep {
    pub outcomes: Vec<RunOutcome>,
    pub records: Vec<ErrorRecord>,
}

/// Temporal sweep over `steps` (increasing); records `Linf_time_L2`.
pub fn sweep_time(base: &RunConfig, steps: &[usize], coupling: SpaceCoupling, jobs: usize) -> Result<Sweep> {
    if steps.len() < 2 || steps.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("need at least two increasing values of N".into()));
    }
    let configs: Vec<RunConfig> = steps
        .iter()
        .map(|&n| {
            let cells = match coupling {
                SpaceCoupling::Fixed => base.cells,
                SpaceCoupling::Coupled { factor } => coupled_cells(n, base.alpha, factor),
            };
            base.with(n, cells)
        })
        .collect();
    let outcomes = run_all(&configs, jobs)?;
    let records = records_for(&outcomes, NormTag::LinfTimeL2, |c| c.n_steps as f64);
    Ok(Sweep { outcomes, records })
}

/// Spatial sweep over `cells` (increasing); records `L2_final_family` and
/// `H1_semi` rows. With `couple_time`, `N = ⌊M_s^{2/(2−α)}⌋`.
pub fn sweep_space(base: &RunConfig, cells: &[usize], couple_time: bool, jobs: usize) -> Result<Sweep> {
    if cells.len() < 2 || cells.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("need at least two increasing values of Ms".into()));
    }
    let configs: Vec<RunConfig> = cells
        .iter()
        .map(|&m| {
            let n = if couple_time { coupled_steps(m, base.alpha) } else { base.n_steps };
            base.with(n, m)
        })
        .collect();
    let outcomes = run_all(&configs, jobs)?;
    let mut records = records_for(&outcomes, NormTag::L2FinalFamily, |c| c.cells as f64);
    records.extend(records_for(&outcomes, NormTag::H1Semi, |c| c.cells as f64));
    Ok(Sweep { outcomes, records })
}
