//! Acceptance suite: one test per criterion, each printing a single
//! `criterion N ...: PASS|FAIL` line.
//!
//! Published table values are compared at the stated tolerances; meshes are
//! the desk-scale subsets of the shipped `configs/paper/` files.

use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Duration, Instant};

use momentfd::analysis::{
    characteristic_regime, cubic_discriminant, matrix_diagnostics, observed_orders,
    truncation_profile, Regime,
};
use momentfd::config::ExperimentConfig;
use momentfd::experiment::{run_convergence, RunOptions, TableArtifact};
use momentfd::grid::{DRectangle, Grid};
use momentfd::operators::{assemble, moment_matrix, BoundaryTreatment, StencilKind};
use momentfd::problems::{ExactSolution, LinearProblem, Problem};
use momentfd::schemes::{AuxiliaryBc, SchemeConfig, SchemeEvaluator};
use momentfd::solvers::{contraction_constants, fixed_point_map, solve, NewtonConfig};
use momentfd::sparse::SparseOperator;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Collects failed checks for one criterion and prints its verdict line.
struct Criterion {
    number: usize,
    name: &'static str,
    limit: Duration,
    start: Instant,
    failures: Vec<String>,
    checks: usize,
}

impl Criterion {
    fn new(number: usize, name: &'static str, limit_secs: u64) -> Self {
        Self {
            number,
            name,
            limit: Duration::from_secs(limit_secs),
            start: Instant::now(),
            failures: Vec::new(),
            checks: 0,
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    /// `|got − want| ≤ tol·|want|`.
    fn rel(&mut self, what: &str, got: f64, want: f64, tol: f64) {
        self.check((got - want).abs() <= tol * want.abs(), || {
            format!(
                "{what}: got {got:.4e}, expected {want:.4e} ± {:.0}%",
                100.0 * tol
            )
        });
    }

    /// `|got − want| ≤ tol`.
    fn abs(&mut self, what: &str, got: f64, want: f64, tol: f64) {
        self.check((got - want).abs() <= tol, || {
            format!("{what}: got {got:.4}, expected {want:.4} ± {tol}")
        });
    }

    fn finish(mut self) {
        let elapsed = self.start.elapsed();
        if elapsed > self.limit {
            self.failures
                .push(format!("runtime {elapsed:.2?} exceeds {:?}", self.limit));
        }
        let verdict = if self.failures.is_empty() {
            "PASS"
        } else {
            "FAIL"
        };
        println!(
            "criterion {} ({}): {verdict} [{} checks, {elapsed:.2?}]",
            self.number, self.name, self.checks
        );
        for f in &self.failures {
            println!("    {f}");
        }
        assert!(self.failures.is_empty(), "criterion {} failed", self.number);
    }
}

fn paper_config(file: &str, meshes: &[usize]) -> ExperimentConfig {
    let path: PathBuf = [
        env!("CARGO_MANIFEST_DIR"),
        "..",
        "..",
        "configs",
        "paper",
        file,
    ]
    .iter()
    .collect();
    let mut cfg = ExperimentConfig::load(&path).unwrap();
    cfg.meshes = meshes.to_vec();
    cfg.full_meshes.clear();
    cfg
}

fn run_table(file: &str, meshes: &[usize]) -> TableArtifact {
    run_convergence(&paper_config(file, meshes), &RunOptions::default()).unwrap()
}

/// Published values for one column: errors per row, orders from the second row on.
struct Published<'a> {
    label: &'a str,
    l2: &'a [f64],
    l2_orders: &'a [f64],
    linf: &'a [f64],
    linf_orders: &'a [f64],
}

fn compare_column(
    c: &mut Criterion,
    t: &TableArtifact,
    p: &Published,
    err_tol: f64,
    order_tol: f64,
) {
    let Some(col) = t.columns.iter().find(|col| col.label == p.label) else {
        c.check(false, || format!("column {} missing", p.label));
        return;
    };
    for (i, row) in col.rows.iter().enumerate() {
        let Some((l2, linf)) = row.errors() else {
            c.check(false, || {
                format!("{} J={} did not converge", p.label, row.nodes)
            });
            continue;
        };
        let at = |norm: &str| format!("{} {norm} J={}", p.label, row.nodes);
        if let Some(&want) = p.l2.get(i) {
            c.rel(&at("l2"), l2, want, err_tol);
        }
        if let Some(&want) = p.linf.get(i) {
            c.rel(&at("linf"), linf, want, err_tol);
        }
        if i > 0 {
            if let (Some(&want), Some(got)) = (p.l2_orders.get(i - 1), row.order_l2) {
                c.abs(&at("l2 order"), got, want, order_tol);
            }
            if let (Some(&want), Some(got)) = (p.linf_orders.get(i - 1), row.order_linf) {
                c.abs(&at("linf order"), got, want, order_tol);
            }
        }
    }
}

fn l2_orders(t: &TableArtifact, label: &str) -> Vec<f64> {
    let col = t.columns.iter().find(|c| c.label == label).unwrap();
    col.rows
        .iter()
        .skip(1)
        .map(|r| r.order_l2.unwrap_or(f64::NAN))
        .collect()
}

fn linf_orders(t: &TableArtifact, label: &str) -> Vec<f64> {
    let col = t.columns.iter().find(|c| c.label == label).unwrap();
    col.rows
        .iter()
        .skip(1)
        .map(|r| r.order_linf.unwrap_or(f64::NAN))
        .collect()
}

fn moment_variants() -> Vec<SchemeConfig> {
    let mut v = Vec::new();
    for bc in [AuxiliaryBc::Bc1, AuxiliaryBc::Bc2] {
        for p in [0.0, 1.0] {
            v.push(SchemeConfig::moment(bc, 1.0, 1.0, p));
        }
    }
    v
}

#[test]
fn criterion_01_linear_exactness() {
    let mut c = Criterion::new(1, "linear exactness", 5);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for trial in 0..20 {
        for d in [1usize, 2] {
            let coef: [f64; 3] = [
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            ];
            let eps = rng.gen_range(0.0..1.0);
            let (b0, b1) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let c0 = rng.gen_range(0.0..2.0);
            let exact = ExactSolution::new(move |x| {
                coef[0] + coef[1] * x[0] + coef[2] * x.get(1).copied().unwrap_or(0.0)
            })
            .with_derivatives(
                move |_| [coef[1], if d == 2 { coef[2] } else { 0.0 }],
                |_| 0.0,
            );
            let domain = DRectangle::unit(d).unwrap();
            let mut lp = LinearProblem::constant(domain, eps, [b0, b1], c0, |_| 0.0, |_| 0.0);
            // variable convection and reaction: exactness must not depend on them
            lp.b = Arc::new(move |x| [b0 + x[0], b1 - x.get(1).copied().unwrap_or(0.0)]);
            lp.constant_b = None;
            lp.c = Arc::new(move |x| c0 + x[0] * x[0]);
            let lp = lp.manufactured(exact.clone()).unwrap();
            let problem = Problem::Linear(lp);
            let n = if d == 1 {
                rng.gen_range(5..=25)
            } else {
                rng.gen_range(5..=12)
            };
            let grid = Grid::new(DRectangle::unit(d).unwrap(), &vec![n; d]).unwrap();
            for cfg in moment_variants() {
                let rep = solve(&problem, &cfg, &grid, &NewtonConfig::default()).unwrap();
                let err = (0..grid.num_nodes())
                    .map(|k| {
                        (rep.solution.values()[k] - exact.eval(&grid.node_point(k)[..d])).abs()
                    })
                    .fold(0.0, f64::max);
                c.check(err <= 1e-11, || {
                    format!(
                        "trial {trial} d={d} J={n} {}: nodal error {err:.3e}",
                        cfg.label()
                    )
                });
            }
        }
    }
    c.finish();
}

#[test]
fn criterion_02_table_1d_example_1() {
    let mut c = Criterion::new(2, "1D Example 1 table", 10);
    let t = run_table("1d-ex1.toml", &[7, 13, 23, 53]);
    let cols: [(&str, [f64; 4], [f64; 3]); 7] = [
        (
            "Upwind",
            [6.91e-1, 3.58e-1, 1.99e-1, 8.49e-2],
            [0.95, 0.97, 0.99],
        ),
        (
            "Lax-Friedrichs",
            [9.88e-1, 5.36e-1, 3.02e-1, 1.31e-1],
            [0.88, 0.95, 0.97],
        ),
        (
            "Central",
            [2.06e9, 1.31e8, 1.15e7, 3.65e5],
            [3.98, 4.01, 4.01],
        ),
        (
            "Moment BC1",
            [2.67e-1, 7.24e-2, 2.56e-2, 6.77e-3],
            [1.88, 1.72, 1.55],
        ),
        (
            "h*Moment BC1",
            [2.52e-1, 6.13e-2, 1.75e-2, 2.98e-3],
            [2.04, 2.07, 2.06],
        ),
        (
            "Moment BC2",
            [2.49e-1, 6.17e-2, 1.80e-2, 3.14e-3],
            [2.01, 2.03, 2.03],
        ),
        (
            "h*Moment BC2",
            [2.54e-1, 6.16e-2, 1.74e-2, 2.87e-3],
            [2.04, 2.09, 2.09],
        ),
    ];
    for (label, l2, orders) in &cols {
        let p = Published {
            label,
            l2,
            l2_orders: orders,
            linf: &[],
            linf_orders: &[],
        };
        compare_column(&mut c, &t, &p, 0.05, 0.15);
    }
    c.finish();
}

#[test]
fn criterion_03_table_1d_example_3() {
    let mut c = Criterion::new(3, "1D Example 3 degenerate", 30);
    let t = run_table("1d-ex3.toml", &[7, 10, 17, 22, 103, 1003, 10001]);
    for (i, o) in l2_orders(&t, "Lax-Friedrichs").into_iter().enumerate() {
        c.abs(
            &format!("Lax-Friedrichs l2 order row {}", i + 2),
            o,
            0.5,
            0.03,
        );
    }
    // plateau on the rows with h < 1e-2
    let bc2 = t
        .columns
        .iter()
        .find(|col| col.label == "Moment BC2")
        .unwrap();
    for row in bc2.rows.iter().filter(|r| r.h < 1e-2) {
        let (l2, _) = row.errors().unwrap();
        c.rel(
            &format!("Moment BC2 plateau J={}", row.nodes),
            l2,
            7.07e-1,
            0.05,
        );
        c.abs(
            &format!("Moment BC2 order J={}", row.nodes),
            row.order_l2.unwrap(),
            0.0,
            0.05,
        );
    }
    // finest three rows: orders between them tend to one half
    let hs = l2_orders(&t, "h*Moment BC1");
    for o in &hs[hs.len() - 2..] {
        c.abs("h*Moment BC1 l2 order (finest rows)", *o, 0.5, 0.05);
    }
    c.check(hs[hs.len() - 1] >= hs[hs.len() - 3] - 1e-3, || {
        format!("h*Moment BC1 orders not increasing: {hs:?}")
    });
    c.finish();
}

#[test]
fn criterion_04_table_1d_example_4() {
    let mut c = Criterion::new(4, "1D Example 4 nonlinear", 60);
    let t = run_table("1d-ex4.toml", &[100, 300, 600, 1000, 2000, 4000]);
    for o in l2_orders(&t, "Lax-Friedrichs") {
        c.abs("Lax-Friedrichs l2 order", o, 1.5, 0.05);
    }
    for o in linf_orders(&t, "Lax-Friedrichs") {
        c.abs("Lax-Friedrichs linf order", o, 1.0, 0.05);
    }
    let last = |v: Vec<f64>| *v.last().unwrap();
    c.abs(
        "Moment BC1 l2 order (finest)",
        last(l2_orders(&t, "Moment BC1")),
        1.0,
        0.05,
    );
    c.abs(
        "h*Moment BC1 l2 order (finest)",
        last(l2_orders(&t, "h*Moment BC1")),
        1.5,
        0.1,
    );
    c.abs(
        "h*Moment BC1 linf order (finest)",
        last(linf_orders(&t, "h*Moment BC1")),
        1.0,
        0.05,
    );
    for (label, l2, linf) in [
        ("Lax-Friedrichs", 2.26e-2, 7.07e-2),
        ("Moment BC1", 9.98e-3, 2.49e-2),
        ("h*Moment BC1", 1.91e-3, 8.47e-3),
    ] {
        let p = Published {
            label,
            l2: &[l2],
            l2_orders: &[],
            linf: &[linf],
            linf_orders: &[],
        };
        compare_column(&mut c, &t, &p, 0.10, f64::INFINITY);
    }
    c.finish();
}

#[test]
fn criterion_05_table_2d_example_1() {
    let mut c = Criterion::new(5, "2D Example 1 tables", 60);
    let meshes = [10, 20, 40, 60];
    let monotone = run_table("2d-ex1-monotone.toml", &meshes);
    let bc1 = run_table("2d-ex1-moment-bc1.toml", &meshes);
    let bc2 = run_table("2d-ex1-moment-bc2.toml", &meshes);
    let published = [
        (
            &monotone,
            Published {
                label: "Upwind",
                l2: &[1.25e-2, 6.60e-3, 3.37e-3, 2.26e-3],
                l2_orders: &[0.85, 0.94, 0.97],
                linf: &[4.73e-2, 2.76e-2, 1.48e-2, 1.01e-2],
                linf_orders: &[0.72, 0.87, 0.93],
            },
        ),
        (
            &monotone,
            Published {
                label: "Lax-Friedrichs",
                l2: &[1.94e-2, 1.15e-2, 6.27e-3, 4.30e-3],
                l2_orders: &[0.70, 0.85, 0.91],
                linf: &[5.06e-2, 3.69e-2, 2.27e-2, 1.65e-2],
                linf_orders: &[0.42, 0.68, 0.77],
            },
        ),
        (
            &bc1,
            Published {
                label: "Moment BC1",
                l2: &[2.40e-2, 7.86e-3, 2.80e-3, 1.54e-3],
                l2_orders: &[1.50, 1.43, 1.44],
                linf: &[5.05e-2, 2.52e-2, 1.26e-2, 8.09e-3],
                linf_orders: &[0.93, 0.96, 1.08],
            },
        ),
        (
            &bc1,
            Published {
                label: "h*Moment BC1",
                l2: &[6.74e-3, 1.49e-3, 3.21e-4, 1.33e-4],
                l2_orders: &[2.02, 2.13, 2.14],
                linf: &[2.22e-2, 7.96e-3, 2.42e-3, 1.15e-3],
                linf_orders: &[1.37, 1.66, 1.80],
            },
        ),
        (
            &bc2,
            Published {
                label: "Moment BC2",
                l2: &[6.90e-3, 3.27e-3, 1.16e-3, 6.06e-4],
                l2_orders: &[1.00, 1.44, 1.58],
                linf: &[2.01e-2, 1.37e-2, 7.65e-3, 5.22e-3],
                linf_orders: &[0.51, 0.81, 0.92],
            },
        ),
        (
            &bc2,
            Published {
                label: "h*Moment BC2",
                l2: &[5.36e-3, 1.22e-3, 2.48e-4, 9.85e-5],
                l2_orders: &[1.98, 2.21, 2.23],
                linf: &[1.96e-2, 8.12e-3, 2.54e-3, 1.21e-3],
                linf_orders: &[1.18, 1.62, 1.78],
            },
        ),
    ];
    for (t, p) in &published {
        compare_column(&mut c, t, p, 0.05, 0.15);
    }
    let finest = *l2_orders(&bc1, "h*Moment BC1").last().unwrap();
    c.check(finest >= 2.0, || {
        format!("h*Moment BC1 finest l2 order {finest:.3} < 2")
    });
    c.finish();
}

#[test]
fn criterion_06_2d_nonlinear_spot_checks() {
    let mut c = Criterion::new(6, "2D nonlinear spot checks", 300);
    let meshes = [40, 60, 80];
    let ex2 = run_table("2d-ex2-moment-bc1.toml", &meshes);
    let ex3 = run_table("2d-ex3-moment-bc1.toml", &meshes);
    for o in l2_orders(&ex2, "h*Moment BC1") {
        c.abs("Example 2 h*Moment BC1 l2 order", o, 2.0, 0.15);
    }
    for o in l2_orders(&ex3, "h*Moment BC1") {
        c.abs("Example 3 h*Moment BC1 l2 order", o, 1.0, 0.1);
    }
    let p2 = Published {
        label: "h*Moment BC1",
        l2: &[3.95e-4, 1.67e-4, 9.11e-5],
        l2_orders: &[],
        linf: &[2.81e-3, 1.36e-3, 7.99e-4],
        linf_orders: &[],
    };
    let p3 = Published {
        label: "h*Moment BC1",
        l2: &[2.19e-2, 1.41e-2, 1.04e-2],
        l2_orders: &[],
        linf: &[4.14e-2, 2.70e-2, 2.00e-2],
        linf_orders: &[],
    };
    compare_column(&mut c, &ex2, &p2, 0.10, f64::INFINITY);
    compare_column(&mut c, &ex3, &p3, 0.10, f64::INFINITY);
    c.finish();
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[test]
fn criterion_07_contraction() {
    let mut c = Criterion::new(7, "contraction of the fixed-point map", 30);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut cases = 0;
    for (d, n, b) in [(1usize, 17usize, [1.0, 0.0]), (2, 8, [1.0, -0.5])] {
        let grid = Grid::new(DRectangle::unit(d).unwrap(), &vec![n; d]).unwrap();
        for eps in [0.0, 0.1] {
            for c0 in [0.0, 1.0] {
                for gamma in [0.0, 1.0] {
                    for p in [0.0, 1.0] {
                        let lp = LinearProblem::constant(
                            DRectangle::unit(d).unwrap(),
                            eps,
                            b,
                            c0,
                            |x| x[0].sin(),
                            |x| x.iter().sum::<f64>(),
                        );
                        let cfg = SchemeConfig::moment(AuxiliaryBc::Bc1, 0.0, gamma, p);
                        let k = contraction_constants(&lp, &cfg, &grid).unwrap();
                        if k.beta == 0.0 {
                            // degenerate: no diffusion, reaction or moment
                            continue;
                        }
                        cases += 1;
                        let rho = 0.5 * k.rho_max();
                        let factor = 1.0 - rho * k.beta / 2.0;
                        let ev = SchemeEvaluator::new(&Problem::Linear(lp), &cfg, &grid).unwrap();
                        let boundary = ev.boundary_nodes().to_vec();
                        let g = ev.boundary_data().to_vec();
                        let mut worst: f64 = 0.0;
                        for _ in 0..50 {
                            let mut u: Vec<f64> = (0..grid.num_nodes())
                                .map(|_| rng.gen_range(-1.0..1.0))
                                .collect();
                            let mut v: Vec<f64> = (0..grid.num_nodes())
                                .map(|_| rng.gen_range(-1.0..1.0))
                                .collect();
                            for &k in &boundary {
                                u[k] = g[k];
                                v[k] = g[k];
                            }
                            let mu = fixed_point_map(&ev, rho, &u).unwrap();
                            let mv = fixed_point_map(&ev, rho, &v).unwrap();
                            let num: Vec<f64> = mu.iter().zip(&mv).map(|(a, b)| a - b).collect();
                            let den: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a - b).collect();
                            worst = worst.max(l2(&num) / l2(&den));
                        }
                        c.check(worst <= factor * (1.0 + 1e-12), || {
                            format!(
                                "d={d} eps={eps} c0={c0} gamma={gamma} p={p}: ratio {worst:.12} > bound {factor:.12}"
                            )
                        });
                    }
                }
            }
        }
    }
    // 16 parameter combinations per dimension, minus the two with beta = 0
    c.check(cases == 28, || {
        format!("expected 28 nondegenerate cases, ran {cases}")
    });
    c.finish();
}

fn dense_inverse_nonnegative(a: &SparseOperator) -> bool {
    match a.to_dense().try_inverse() {
        Some(inv) => inv.iter().all(|&x| x >= -1e-12 * inv.amax()),
        None => false,
    }
}

fn max_abs_diff(a: &SparseOperator, b: &SparseOperator) -> f64 {
    (a.to_dense() - b.to_dense()).amax()
}

#[test]
fn criterion_08_matrix_properties() {
    let mut c = Criterion::new(8, "matrix properties", 5);
    for d in [1usize, 2] {
        for n in 5..=9 {
            let grid = Grid::new(DRectangle::unit(d).unwrap(), &vec![n; d]).unwrap();
            let tag = |what: &str| format!("{what} (d={d}, J={n})");
            for axis in 0..d {
                let g = assemble(
                    StencilKind::Central(axis),
                    &grid,
                    BoundaryTreatment::DirichletRows,
                )
                .unwrap();
                let diag = matrix_diagnostics(&g, false).unwrap();
                c.check(diag.antisymmetric, || tag("central gradient antisymmetric"));
            }
            let lap = assemble(
                StencilKind::Laplacian,
                &grid,
                BoundaryTreatment::DirichletRows,
            )
            .unwrap();
            let diag = matrix_diagnostics(&lap, false).unwrap();
            c.check(
                diag.symmetric && diag.min_eig > 0.0 && diag.m_matrix,
                || tag("-Laplacian Dirichlet SPD M-matrix"),
            );

            for p in [0.0, 1.0] {
                // BC1: sum over axes of ¼ hᵢ^{p+2} (D²ᵢ,₀)²
                let m1 = moment_matrix(&grid, p, AuxiliaryBc::Bc1).unwrap();
                let mut expected: Option<SparseOperator> = None;
                for axis in 0..d {
                    let h = grid.spacing(axis);
                    let d0 = assemble(
                        StencilKind::Second(axis),
                        &grid,
                        BoundaryTreatment::DirichletRows,
                    )
                    .unwrap();
                    let term = d0.matmul(&d0).scaled(0.25 * h.powf(p + 2.0));
                    expected = Some(match expected {
                        None => term,
                        Some(e) => e.add_scaled(1.0, &term),
                    });
                }
                let expected = expected.unwrap();
                let scale = expected.to_dense().amax();
                c.check(max_abs_diff(&m1, &expected) <= 1e-12 * scale, || {
                    tag(&format!("BC1 moment equals 1/4 h^(p+2) (D0^2)^2, p={p}"))
                });
                let diag = matrix_diagnostics(&m1, false).unwrap();
                c.check(diag.symmetric && diag.min_eig > 0.0, || {
                    tag(&format!("BC1 moment SPD, p={p}"))
                });

                let m2 = moment_matrix(&grid, p, AuxiliaryBc::Bc2).unwrap();
                let diag = matrix_diagnostics(&m2, false).unwrap();
                c.check(diag.rank_deficiency >= 1, || {
                    tag(&format!("BC2 moment singular, p={p}"))
                });
            }

            if d == 1 {
                let h = grid.spacing(0);
                let d0 = assemble(
                    StencilKind::Second(0),
                    &grid,
                    BoundaryTreatment::DirichletRows,
                )
                .unwrap();
                let d1 = assemble(
                    StencilKind::Second(0),
                    &grid,
                    BoundaryTreatment::NeumannRows,
                )
                .unwrap();
                for p in [0.0, 1.0] {
                    // BC2 moment factors as ¼ h^{p+2} D²₁ D²₀
                    let m2 = moment_matrix(&grid, p, AuxiliaryBc::Bc2).unwrap();
                    let factored = d1.matmul(&d0).scaled(0.25 * h.powf(p + 2.0));
                    c.check(
                        max_abs_diff(&m2, &factored) <= 1e-12 * factored.to_dense().amax(),
                        || tag(&format!("BC2 moment equals 1/4 h^(p+2) D1^2 D0^2, p={p}")),
                    );
                    for sigma in [0.1, 1.0, 9.0] {
                        for gamma in [0.1, 1.0, 10.0] {
                            let eye = SparseOperator::identity(d0.row_nodes().to_vec());
                            let left = eye
                                .scaled(sigma * h * h)
                                .add_scaled(0.25 * gamma * h.powf(p + 2.0), &d1);
                            let product = left.matmul(&d0);
                            c.check(dense_inverse_nonnegative(&product), || {
                                tag(&format!("(sigma h^2 I + gamma/4 h^(p+2) D1^2) D0^2 monotone, sigma={sigma} gamma={gamma} p={p}"))
                            });
                        }
                    }
                }
            }
        }
    }
    c.finish();
}

#[test]
fn criterion_09_truncation_slopes() {
    let mut c = Criterion::new(9, "truncation slopes", 10);
    let exact = ExactSolution::new(|x| (3.0 * x[0]).sin()).with_derivatives(
        |x| [3.0 * (3.0 * x[0]).cos(), 0.0],
        |x| -9.0 * (3.0 * x[0]).sin(),
    );
    let lp = LinearProblem::constant(
        DRectangle::unit(1).unwrap(),
        0.5,
        [1.0, 0.0],
        1.0,
        |_| 0.0,
        |_| 0.0,
    )
    .manufactured(exact)
    .unwrap();
    let problem = Problem::Linear(lp);
    for bc in [AuxiliaryBc::Bc1, AuxiliaryBc::Bc2] {
        for p in [0.0, 1.0] {
            let cfg = SchemeConfig::moment(bc, 1.0, 1.0, p);
            // boundary order of the closure: p for BC1, p + 1 for BC2
            let q = if bc == AuxiliaryBc::Bc1 { p } else { p + 1.0 };
            let (mut deep, mut near, mut global) = (Vec::new(), Vec::new(), Vec::new());
            for n in [8usize, 16, 32, 64, 128] {
                let grid = Grid::uniform_1d(0.0, 1.0, n + 1).unwrap();
                let t = truncation_profile(&problem, &cfg, &grid).unwrap();
                deep.push((t.h, t.max_where(|k| k >= 3)));
                near.push((t.h, t.max_where(|k| k <= 2)));
                global.push((t.h, t.weighted_l2()));
            }
            let finest = |v: &[(f64, f64)]| observed_orders(v).last().copied().flatten().unwrap();
            let label = cfg.label();
            c.abs(
                &format!("{label} deep-interior slope"),
                finest(&deep),
                2.0,
                0.1,
            );
            let s = finest(&near);
            c.check(s >= q - 0.1, || {
                format!("{label} near-boundary slope {s:.3} < {}", q - 0.1)
            });
            let s = finest(&global);
            let want = (q + 0.5).min(2.0) - 0.1;
            c.check(s >= want, || {
                format!("{label} global weighted-l2 slope {s:.3} < {want}")
            });
        }
    }
    c.finish();
}

#[test]
fn criterion_10_root_regimes() {
    let mut c = Criterion::new(10, "characteristic root regimes", 1);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut classified = 0;
    for _ in 0..100 {
        let sigma = rng.gen_range(0.0..10.0);
        let eps = rng.gen_range(0.0..1.0);
        let gamma = rng.gen_range(0.0..10.0);
        let p = if rng.gen_bool(0.5) { 0.0 } else { 1.0 };
        let h = 10f64.powf(rng.gen_range(-3.0..0.5f64.log10()));
        let rr = characteristic_regime(sigma, eps, gamma, p, h).unwrap();
        let tag = format!("sigma={sigma:.3} eps={eps:.3} gamma={gamma:.3} p={p} h={h:.3e}");
        c.check((rr.eta_at_one - 4.0 * h).abs() <= 1e-12, || {
            format!(
                "{tag}: eta(1) = {:.15e}, 4h = {:.15e}",
                rr.eta_at_one,
                4.0 * h
            )
        });
        let Some(ratio) = rr.ratio else { continue };
        if (ratio + 4.0).abs() <= 0.5 || ratio.abs() <= 0.05 {
            continue;
        }
        // ground truth: discriminant sign, then Descartes' rule of signs. With
        // c₃ > 0, c₁ > 0, c₀ < 0 the sign of c₂ decides: c₂ > 0 leaves one
        // positive root, c₂ < 0 excludes negative roots.
        let coeffs = rr.coefficients();
        let disc = cubic_discriminant(coeffs);
        let truth = if disc < 0.0 {
            Regime::ComplexPair
        } else if coeffs[1] > 0.0 {
            Regime::TwoNegative
        } else {
            Regime::TwoPositive
        };
        classified += 1;
        c.check(rr.regime == truth, || {
            format!("{tag}: regime {} but discriminant says {truth}", rr.regime)
        });
    }
    c.check(classified >= 50, || {
        format!("only {classified} draws classified")
    });
    c.finish();
}
