//! Shared fixtures for the criterion benches.

use l1fem_core::stepper::{initial_value, step};
use l1fem_core::{ForcingMode, ManufacturedCase, NewtonConfig, SpaceOperators, TimeGrid, TimeLoopState};

/// Example 1 state advanced to just before `level`, ready for one more step.
pub struct StepFixture {
    pub case: ManufacturedCase,
    pub ops: SpaceOperators,
    pub grid: TimeGrid,
    pub state: TimeLoopState,
}

impl StepFixture {
    pub fn new(id: u8, alpha: f64, cells: usize, steps: usize, level: usize) -> Self {
        let case = ManufacturedCase::new(id, alpha, ForcingMode::Pure).expect("valid case");
        let ops = SpaceOperators::new(case.mesh(cells).expect("valid mesh"));
        let grid = TimeGrid::new(1.0, steps, (2.0 - alpha) / alpha).expect("valid grid");
        let mut state = TimeLoopState::new(initial_value(&case, &ops).expect("initial value"), &ops);
        let config = NewtonConfig::default();
        while state.next_level() < level {
            step(&case, &ops, &grid, alpha, &mut state, &config).expect("step");
        }
        Self { case, ops, grid, state }
    }

    /// One Newton-solved time level on a copy of the stored state.
    pub fn advance_once(&self) -> usize {
        let mut state = self.state.clone();
        let stats = step(&self.case, &self.ops, &self.grid, self.case.alpha(), &mut state, &NewtonConfig::default())
            .expect("step");
        stats.iterations
    }
}
