use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use l1fem_bench::StepFixture;
use l1fem_core::fem::{assemble_mass, assemble_stiffness, solve_sparse};
use l1fem_core::stepper::history_term;
use l1fem_core::{L1Row, SparseMatrix, SpatialMesh, TimeGrid};

fn l1_rows(c: &mut Criterion) {
    let mut g = c.benchmark_group("l1_row");
    for n in [256usize, 1024, 4096] {
        let grid = TimeGrid::new(1.0, n, 3.0).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| L1Row::new(&grid, black_box(n), 0.5).unwrap())
        });
    }
    g.finish();
}

fn assembly(c: &mut Criterion) {
    let mut g = c.benchmark_group("assembly");
    let line = SpatialMesh::interval(std::f64::consts::PI, 1000).unwrap();
    let square = SpatialMesh::unit_square(64).unwrap();
    g.bench_function("stiffness_1d_1000", |b| b.iter(|| assemble_stiffness(black_box(&line))));
    g.bench_function("mass_2d_64", |b| b.iter(|| assemble_mass(black_box(&square))));
    g.bench_function("stiffness_2d_64", |b| b.iter(|| assemble_stiffness(black_box(&square))));
    // Newton-type matrix M + κ a K with κ a ~ τ^α at N = 256.
    let a = SparseMatrix::linear_combination(&[(1.0, &assemble_mass(&square)), (0.2, &assemble_stiffness(&square))]).unwrap();
    let rhs = vec![1e-3; a.dim()];
    g.bench_function("solve_2d_64", |b| b.iter(|| solve_sparse(&a, black_box(&rhs)).unwrap()));
    g.finish();
}

fn newton(c: &mut Criterion) {
    let mut g = c.benchmark_group("newton_step");
    g.sample_size(20);
    let one_d = StepFixture::new(1, 0.5, 512, 256, 128);
    g.bench_function("example1_ms512_level128", |b| b.iter(|| one_d.advance_once()));
    let two_d = StepFixture::new(3, 0.5, 32, 64, 32);
    g.bench_function("example3_ms32_level32", |b| b.iter(|| two_d.advance_once()));
    let row = L1Row::new(&one_d.grid, 128, 0.5).unwrap();
    g.bench_function("history_term_ms512_level128", |b| {
        b.iter(|| history_term(&row, black_box(&one_d.state.history)).unwrap())
    });
    g.finish();
}

criterion_group!(benches, l1_rows, assembly, newton);
criterion_main!(benches);
