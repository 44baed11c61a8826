//! Solvers for the discrete systems: direct banded LU for linear problems,
//! damped Newton with vanishing-viscosity continuation for Hamilton-Jacobi
//! problems, and the fixed-point map `Û = U − ρ R(U)` with its contraction
//! constants.

use std::time::Duration;

use log::{debug, info, warn};
use nalgebra::DMatrix;
use web_time::Instant;

use crate::analysis::DENSE_LIMIT;
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::operators::{assemble, moment_matrix, BoundaryTreatment, StencilKind};
use crate::problems::{HJProblem, LinearProblem, Problem};
use crate::schemes::{AuxiliaryBc, SchemeConfig, SchemeEvaluator};
use crate::sparse::solve_direct;

/// Settings of the fixed-point iteration `Û = U − ρ R(U)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointConfig {
    pub rho: f64,
    /// Stop when `‖R‖∞ ≤ tol`.
    pub tol: f64,
    pub max_iter: usize,
    /// Declare divergence after this many consecutive residual increases.
    pub growth_limit: usize,
}

impl FixedPointConfig {
    pub fn new(rho: f64) -> Self {
        Self {
            rho,
            tol: 1e-10,
            max_iter: 1_000_000,
            growth_limit: 20,
        }
    }
}

/// Viscosity stages `ε_h = C hᵠ` for `q` in `powers`, solved in order.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuationLadder {
    pub constant: f64,
    pub powers: Vec<f64>,
}

impl ContinuationLadder {
    /// `C = σ` and powers `{0, 1, r}` with duplicates removed, in increasing
    /// order so that the viscosity decreases along the ladder (`h < 1`).
    pub fn for_scheme(cfg: &SchemeConfig) -> Self {
        Self::new(cfg.sigma, vec![0.0, 1.0, cfg.r])
    }

    pub fn new(constant: f64, mut powers: Vec<f64>) -> Self {
        powers.sort_by(|a, b| a.total_cmp(b));
        powers.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        Self { constant, powers }
    }

    /// Stage viscosities on `grid`; equal consecutive values collapse into one
    /// stage. The last stage is always the scheme's own `ε_h`.
    pub fn stages(&self, grid: &Grid, target: f64) -> Vec<f64> {
        let h = grid.h_max();
        let mut out: Vec<f64> = self
            .powers
            .iter()
            .map(|&q| self.constant * h.powf(q))
            .filter(|&e| e > target)
            .collect();
        out.sort_by(|a, b| b.total_cmp(a));
        out.dedup();
        out.push(target);
        out
    }
}

/// Newton settings.
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonConfig {
    /// Relative tolerance: a stage converges when `‖R‖∞ ≤ tol (1 + data scale)`
    /// plus a rounding allowance proportional to `‖J‖∞ ‖U‖∞`.
    pub tol: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
    /// `None` uses [`ContinuationLadder::for_scheme`].
    pub ladder: Option<ContinuationLadder>,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 100,
            max_halvings: 30,
            ladder: None,
        }
    }
}

/// Outcome of a solve.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub solution: GridFunction,
    /// Iterations per stage (one entry of `1` for a direct solve).
    pub stage_iterations: Vec<usize>,
    /// Viscosity `ε_h` of each stage.
    pub stage_viscosity: Vec<f64>,
    /// Final `‖R‖∞` over the real nodes.
    pub residual: f64,
    pub converged: bool,
    /// Index of the stage that stopped without converging.
    pub failed_stage: Option<usize>,
    pub wall_time: Duration,
    pub diagnostics: Vec<String>,
}

impl SolveReport {
    pub fn total_iterations(&self) -> usize {
        self.stage_iterations.iter().sum()
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Solves the scheme on `grid`: directly for linear problems, by Newton
/// continuation for Hamilton-Jacobi problems.
pub fn solve(
    problem: &Problem,
    cfg: &SchemeConfig,
    grid: &Grid,
    newton: &NewtonConfig,
) -> Result<SolveReport> {
    let ev = SchemeEvaluator::new(problem, cfg, grid)?;
    if problem.is_linear() {
        solve_linear(&ev)
    } else {
        newton_continuation_with(&ev, cfg, newton, None)
    }
}

/// Direct banded-LU solve of a linear scheme.
pub fn solve_linear(ev: &SchemeEvaluator) -> Result<SolveReport> {
    let start = Instant::now();
    let eps_h = ev.params().eps_h;
    let (a, rhs) = ev.linear_system(eps_h)?;
    let x = solve_direct(&a, &rhs)?;
    let u = ev.expand(&x);
    let r = ev.interior_residual(&u, eps_h)?;
    let residual = inf_norm(&r);
    let solution = GridFunction::from_values(ev.grid(), u)?;
    Ok(SolveReport {
        solution,
        stage_iterations: vec![1],
        stage_viscosity: vec![eps_h],
        residual,
        converged: true,
        failed_stage: None,
        wall_time: start.elapsed(),
        diagnostics: vec![format!("direct solve, {} unknowns", a.nrows())],
    })
}

/// Default initial guess: secant line through the boundary data in 1D, zero
/// in the interior in 2D; boundary nodes carry `g`.
pub fn initial_guess(ev: &SchemeEvaluator) -> Vec<f64> {
    let grid = ev.grid();
    let g = ev.boundary_data();
    let mut u = g.to_vec();
    if grid.dim() == 1 {
        let n = grid.num_nodes();
        let (a, b) = (grid.domain().lower()[0], grid.domain().upper()[0]);
        let (ga, gb) = (g[0], g[n - 1]);
        for k in 1..n - 1 {
            let x = grid.node_point(k)[0];
            u[k] = ga + (gb - ga) * (x - a) / (b - a);
        }
    }
    u
}

/// Newton continuation for a Hamilton-Jacobi problem; see [`newton_continuation_with`].
pub fn newton_continuation_solve(
    problem: &HJProblem,
    cfg: &SchemeConfig,
    grid: &Grid,
    ladder: &ContinuationLadder,
    tol: f64,
) -> Result<SolveReport> {
    let ev = SchemeEvaluator::new(&Problem::HamiltonJacobi(problem.clone()), cfg, grid)?;
    let newton = NewtonConfig {
        tol,
        ladder: Some(ladder.clone()),
        ..NewtonConfig::default()
    };
    newton_continuation_with(&ev, cfg, &newton, None)
}

/// Damped Newton over the viscosity ladder. Each stage starts from the previous
/// stage's solution; a step is halved (up to `max_halvings` times) until
/// `‖R‖₂` decreases.
///
/// A stage that fails to converge stops the solve and the report carries
/// `converged = false`, the failing stage and the best iterate.
pub fn newton_continuation_with(
    ev: &SchemeEvaluator,
    cfg: &SchemeConfig,
    newton: &NewtonConfig,
    initial: Option<&[f64]>,
) -> Result<SolveReport> {
    let start = Instant::now();
    let grid = ev.grid();
    let ladder = newton
        .ladder
        .clone()
        .unwrap_or_else(|| ContinuationLadder::for_scheme(cfg));
    let stages = ladder.stages(grid, ev.params().eps_h);
    let mut u = match initial {
        Some(u0) => {
            if u0.len() != grid.num_nodes() {
                return Err(Error::DimensionMismatch {
                    expected: grid.num_nodes(),
                    found: u0.len(),
                });
            }
            let mut u = u0.to_vec();
            for &k in ev.boundary_nodes() {
                u[k] = ev.boundary_data()[k];
            }
            u
        }
        None => initial_guess(ev),
    };
    let rows = ev.discretization().rows().to_vec();
    let base_tol = newton.tol * (1.0 + ev.data_scale());
    let mut stage_iterations = Vec::new();
    let mut diagnostics = Vec::new();
    let mut failed_stage = None;
    let mut residual = f64::INFINITY;

    for (s, &eps_h) in stages.iter().enumerate() {
        let mut r = ev.interior_residual(&u, eps_h)?;
        let mut its = 0;
        let mut converged = false;
        loop {
            let jac = ev.jacobian(&u, eps_h)?;
            let tol = base_tol + 1e3 * f64::EPSILON * jac.norm_inf() * (1.0 + inf_norm(&u));
            residual = inf_norm(&r);
            if residual <= tol {
                converged = true;
                break;
            }
            if its >= newton.max_iter {
                break;
            }
            its += 1;
            let neg: Vec<f64> = r.iter().map(|v| -v).collect();
            let delta = solve_direct(&jac, &neg)?;
            let r0 = l2_norm(&r);
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..=newton.max_halvings {
                let mut trial = u.clone();
                for (row, &k) in rows.iter().enumerate() {
                    trial[k] += t * delta[row];
                }
                let rt = ev.interior_residual(&trial, eps_h)?;
                if l2_norm(&rt) < (1.0 - 1e-4 * t) * r0 {
                    u = trial;
                    r = rt;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                diagnostics.push(format!(
                    "stage {s}: line search failed after {} halvings (residual {:.3e})",
                    newton.max_halvings,
                    inf_norm(&r)
                ));
                break;
            }
            debug!(
                "stage {s} iteration {its}: residual {:.3e}, step {t}",
                inf_norm(&r)
            );
        }
        stage_iterations.push(its);
        diagnostics.push(format!(
            "stage {s}: eps_h = {eps_h:.3e}, {its} iteration(s), residual {residual:.3e}"
        ));
        if !converged {
            warn!(
                "newton stage {s} (eps_h = {eps_h:.3e}) did not converge: residual {residual:.3e}"
            );
            failed_stage = Some(s);
            break;
        }
    }
    info!(
        "newton: {} stage(s), {} iteration(s), residual {residual:.3e}",
        stage_iterations.len(),
        stage_iterations.iter().sum::<usize>()
    );
    Ok(SolveReport {
        solution: GridFunction::from_values(grid, u)?,
        stage_viscosity: stages[..stage_iterations.len()].to_vec(),
        stage_iterations,
        residual,
        converged: failed_stage.is_none(),
        failed_stage,
        wall_time: start.elapsed(),
        diagnostics,
    })
}

/// Fixed-point iteration for a linear problem starting from `u0`; see
/// [`fixed_point_with`]. A variable `b` is allowed but the report notes that
/// convergence is not guaranteed.
pub fn fixed_point_solve(
    problem: &LinearProblem,
    cfg: &SchemeConfig,
    fp: &FixedPointConfig,
    u0: &GridFunction,
) -> Result<SolveReport> {
    let ev = SchemeEvaluator::new(&Problem::Linear(problem.clone()), cfg, u0.grid())?;
    let mut rep = fixed_point_with(&ev, fp, Some(u0.real_values()))?;
    if problem.constant_b.is_none() {
        rep.diagnostics
            .push("no guarantee: b is not constant".into());
    }
    Ok(rep)
}

/// One application of the map: `M_ρU = U − ρ R(U)` on interior nodes, `g` on
/// the boundary.
pub fn fixed_point_map(ev: &SchemeEvaluator, rho: f64, u: &[f64]) -> Result<Vec<f64>> {
    let r = ev.interior_residual(u, ev.params().eps_h)?;
    let mut out = u.to_vec();
    for &k in ev.boundary_nodes() {
        out[k] = ev.boundary_data()[k];
    }
    for (row, &k) in ev.discretization().rows().iter().enumerate() {
        out[k] -= rho * r[row];
    }
    Ok(out)
}

/// Fixed-point iteration `Û = U − ρ R(U)` on interior nodes with `Û = g` on
/// the boundary, at the scheme's own `ε_h`.
///
/// Returns [`Error::Divergence`] after `growth_limit` consecutive residual
/// increases; running out of iterations gives a non-converged report.
pub fn fixed_point_with(
    ev: &SchemeEvaluator,
    fp: &FixedPointConfig,
    initial: Option<&[f64]>,
) -> Result<SolveReport> {
    if !(fp.rho > 0.0) || !fp.rho.is_finite() {
        return Err(Error::Configuration(format!(
            "fixed-point rho must be positive, got {}",
            fp.rho
        )));
    }
    let start = Instant::now();
    let eps_h = ev.params().eps_h;
    let rows = ev.discretization().rows().to_vec();
    let mut u = match initial {
        Some(u0) if u0.len() == ev.grid().num_nodes() => u0.to_vec(),
        Some(u0) => {
            return Err(Error::DimensionMismatch {
                expected: ev.grid().num_nodes(),
                found: u0.len(),
            })
        }
        None => initial_guess(ev),
    };
    for &k in ev.boundary_nodes() {
        u[k] = ev.boundary_data()[k];
    }
    let mut r = ev.interior_residual(&u, eps_h)?;
    let mut res = inf_norm(&r);
    let mut growth = 0;
    let mut its = 0;
    while res > fp.tol && its < fp.max_iter {
        for (row, &k) in rows.iter().enumerate() {
            u[k] -= fp.rho * r[row];
        }
        its += 1;
        r = ev.interior_residual(&u, eps_h)?;
        let next = inf_norm(&r);
        if next > res || !next.is_finite() {
            growth += 1;
            if growth >= fp.growth_limit || !next.is_finite() {
                return Err(Error::Divergence {
                    iterations: its,
                    residual: next,
                });
            }
        } else {
            growth = 0;
        }
        res = next;
    }
    let converged = res <= fp.tol;
    Ok(SolveReport {
        solution: GridFunction::from_values(ev.grid(), u)?,
        stage_iterations: vec![its],
        stage_viscosity: vec![eps_h],
        residual: res,
        converged,
        failed_stage: if converged { None } else { Some(0) },
        wall_time: start.elapsed(),
        diagnostics: vec![format!(
            "fixed point, rho = {:.3e}, {its} iteration(s)",
            fp.rho
        )],
    })
}

/// Constants of the contraction bound for the fixed-point map of a linear
/// scheme with interior matrix `G = G_s + G_a`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractionConstants {
    /// Smallest eigenvalue of the Dirichlet `−Δ_h`.
    pub lambda0: f64,
    /// Smallest eigenvalue of the `p = 0` BC1 moment matrix divided by `h²`.
    pub lambda_star: f64,
    /// `min c` over interior nodes.
    pub c0: f64,
    /// `λ_max(G_aᵀ G_a)`.
    pub kappa: f64,
    /// `(ε + ε_h) λ₀ + c₀ + h^{2+p} γ λ_*`.
    pub beta: f64,
    /// Largest `ρ` with `½I − ρ G_s` positive definite.
    pub r1: f64,
    /// `2β / (4κ − β²)`, infinite when `4κ ≤ β²`.
    pub r2: f64,
}

impl ContractionConstants {
    /// `min(R₁, R₂)`.
    pub fn rho_max(&self) -> f64 {
        self.r1.min(self.r2)
    }
}

/// Contraction constants of a linear scheme with constant `b` (dense; at most
/// [`DENSE_LIMIT`] unknowns).
pub fn contraction_constants(
    problem: &LinearProblem,
    cfg: &SchemeConfig,
    grid: &Grid,
) -> Result<ContractionConstants> {
    if problem.constant_b.is_none() {
        return Err(Error::UnsupportedAnalysis(format!(
            "contraction constants need a constant convection field; `{}` has a variable b",
            problem.name
        )));
    }
    if grid.num_interior() > DENSE_LIMIT {
        return Err(Error::UnsupportedAnalysis(format!(
            "contraction constants need a dense eigen-decomposition; {} unknowns exceed {DENSE_LIMIT}",
            grid.num_interior()
        )));
    }
    let ev = SchemeEvaluator::new(&Problem::Linear(problem.clone()), cfg, grid)?;
    let (g, _) = ev.linear_system(ev.params().eps_h)?;
    let gd = g.to_dense();
    let gs = (&gd + gd.transpose()) * 0.5;
    let ga = (&gd - gd.transpose()) * 0.5;
    let min_eig = |m: &DMatrix<f64>| m.clone().symmetric_eigen().eigenvalues.min();
    let max_eig = |m: &DMatrix<f64>| m.clone().symmetric_eigen().eigenvalues.max();

    let lap = assemble(
        StencilKind::Laplacian,
        grid,
        BoundaryTreatment::DirichletRows,
    )?
    .to_dense();
    let lambda0 = min_eig(&lap);
    let h = grid.h_max();
    let lambda_star = if grid.nodes_per_dim().iter().all(|&j| j >= 5) {
        let m = moment_matrix(grid, 0.0, AuxiliaryBc::Bc1)?.to_dense();
        min_eig(&((&m + m.transpose()) * 0.5)) / (h * h)
    } else {
        0.0
    };
    let d = grid.dim();
    let c0 = grid
        .interior_nodes()
        .into_iter()
        .map(|k| (problem.c)(&grid.node_point(k)[..d]))
        .fold(f64::INFINITY, f64::min);
    let kappa = max_eig(&(ga.transpose() * &ga)).max(0.0);
    let gamma = if ev.params().gamma_h != 0.0 {
        cfg.gamma
    } else {
        0.0
    };
    let beta = (problem.epsilon + ev.params().eps_h) * lambda0
        + c0
        + h.powf(2.0 + cfg.p) * gamma * lambda_star;
    let r2 = if 4.0 * kappa > beta * beta {
        2.0 * beta / (4.0 * kappa - beta * beta)
    } else {
        f64::INFINITY
    };
    let r1 = r1_bisection(&gs);
    Ok(ContractionConstants {
        lambda0,
        lambda_star,
        c0,
        kappa,
        beta,
        r1,
        r2,
    })
}

/// Largest `ρ` with `½I − ρ G_s ≻ 0`, by bisection on a Cholesky test.
fn r1_bisection(gs: &DMatrix<f64>) -> f64 {
    let n = gs.nrows();
    let pd = |rho: f64| {
        (DMatrix::identity(n, n) * 0.5 - gs * rho)
            .cholesky()
            .is_some()
    };
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut grow = 0;
    while pd(hi) {
        lo = hi;
        hi *= 2.0;
        grow += 1;
        if grow > 200 {
            return f64::INFINITY;
        }
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if pd(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    lo
}

/// `‖I − ρ G‖₂` for the interior matrix of a linear scheme (dense).
pub fn fixed_point_map_norm(
    problem: &LinearProblem,
    cfg: &SchemeConfig,
    grid: &Grid,
    rho: f64,
) -> Result<f64> {
    let ev = SchemeEvaluator::new(&Problem::Linear(problem.clone()), cfg, grid)?;
    let (g, _) = ev.linear_system(ev.params().eps_h)?;
    let gd = g.to_dense();
    let n = gd.nrows();
    let m = DMatrix::identity(n, n) - gd * rho;
    Ok(m.singular_values().max())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{linf_error, weighted_l2_error};
    use crate::problems::{get_example, ExampleId};

    #[test]
    fn ladder_stages() {
        let g = Grid::uniform_1d(0.0, 1.0, 11).unwrap();
        let cfg = SchemeConfig::moment(AuxiliaryBc::Bc1, 2.0, 1.0, 0.0);
        let st = ContinuationLadder::for_scheme(&cfg).stages(&g, cfg.eps_h(&g));
        assert_eq!(st.len(), 3);
        assert!(
            (st[0] - 2.0).abs() < 1e-15
                && (st[1] - 0.2).abs() < 1e-15
                && (st[2] - 0.02).abs() < 1e-15
        );
        let st = ContinuationLadder::new(0.0, vec![0.0, 1.0, 2.0]).stages(&g, 0.0);
        assert_eq!(st, vec![0.0]);
    }

    #[test]
    fn direct_solve_reproduces_table_entries() {
        let p = get_example(ExampleId::OneDEx1).unwrap();
        let g = Grid::uniform_1d(0.0, 1.0, 7).unwrap();
        let exact = p.exact().unwrap().clone();
        let rep = solve(&p, &SchemeConfig::upwind(), &g, &NewtonConfig::default()).unwrap();
        let e = weighted_l2_error(&rep.solution, &exact, &g);
        assert!((e - 6.91e-1).abs() < 5e-3, "upwind {e}");
        let cfg = SchemeConfig::moment(AuxiliaryBc::Bc1, 9.0, 1.0, 0.0);
        let rep = solve(&p, &cfg, &g, &NewtonConfig::default()).unwrap();
        let e = weighted_l2_error(&rep.solution, &exact, &g);
        assert!((e - 2.67e-1).abs() < 5e-3, "moment {e}");
        assert!(linf_error(&rep.solution, &exact, &g) >= e);
    }

    #[test]
    fn fixed_point_matches_direct_and_contracts() {
        let dom = crate::grid::DRectangle::interval(0.0, 1.0).unwrap();
        let lp = LinearProblem::constant(dom, 0.1, [1.0, 0.0], 0.1, |x| x[0], |x| x[0]);
        let p = Problem::Linear(lp.clone());
        let g = Grid::uniform_1d(0.0, 1.0, 9).unwrap();
        let cfg = SchemeConfig::moment(AuxiliaryBc::Bc1, 0.0, 1.0, 0.0);
        let cc = contraction_constants(&lp, &cfg, &g).unwrap();
        assert!(cc.beta > 0.0 && cc.r1.is_finite());
        let rho = 0.5 * cc.rho_max();
        let norm = fixed_point_map_norm(&lp, &cfg, &g, rho).unwrap();
        assert!(
            norm <= 1.0 - rho * cc.beta / 2.0,
            "{cc:?} rho={rho} norm={norm}"
        );
        let ev = SchemeEvaluator::new(&p, &cfg, &g).unwrap();
        let direct = solve_linear(&ev).unwrap();
        let mut fp = FixedPointConfig::new(rho);
        fp.tol = 1e-11;
        let it = fixed_point_with(&ev, &fp, None).unwrap();
        assert!(it.converged);
        let diff = it
            .solution
            .real_values()
            .iter()
            .zip(direct.solution.real_values())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(diff < 1e-8, "diff {diff}");
    }

    #[test]
    fn fixed_point_diverges_for_large_rho() {
        let p = get_example(ExampleId::OneDEx1).unwrap();
        let g = Grid::uniform_1d(0.0, 1.0, 13).unwrap();
        let ev = SchemeEvaluator::new(&p, &SchemeConfig::lax_friedrichs(1.0), &g).unwrap();
        let err = fixed_point_with(&ev, &FixedPointConfig::new(10.0), None).unwrap_err();
        assert!(matches!(err, Error::Divergence { .. }));
    }

    #[test]
    fn r1_matches_eigenvalue_formula() {
        let g = Grid::uniform_1d(0.0, 1.0, 9).unwrap();
        let gs = assemble(StencilKind::Second(0), &g, BoundaryTreatment::DirichletRows)
            .unwrap()
            .to_dense();
        let r1 = r1_bisection(&gs);
        let lmax = gs.clone().symmetric_eigen().eigenvalues.max();
        assert!((r1 - 0.5 / lmax).abs() < 1e-10 * r1);
    }

    #[test]
    fn newton_solves_hj_example() {
        let p = get_example(ExampleId::OneDEx4).unwrap();
        let g = Grid::uniform_1d(-1.0, 1.0, 100).unwrap();
        let exact = p.exact().unwrap().clone();
        let cfg = SchemeConfig::moment(AuxiliaryBc::Bc1, 4.0, 1.0, 0.0);
        let rep = solve(&p, &cfg, &g, &NewtonConfig::default()).unwrap();
        assert!(rep.converged, "{:?}", rep.diagnostics);
        assert_eq!(rep.stage_iterations.len(), 3);
        let (l2, li) = (
            weighted_l2_error(&rep.solution, &exact, &g),
            linf_error(&rep.solution, &exact, &g),
        );
        assert!(
            (l2 - 9.98e-3).abs() < 5e-5 && (li - 2.49e-2).abs() < 5e-4,
            "{l2} {li}"
        );
        let rep = solve(
            &p,
            &SchemeConfig::lax_friedrichs(4.0),
            &g,
            &NewtonConfig::default(),
        )
        .unwrap();
        let (l2, li) = (
            weighted_l2_error(&rep.solution, &exact, &g),
            linf_error(&rep.solution, &exact, &g),
        );
        assert!(
            (l2 - 2.26e-2).abs() < 5e-4 && (li - 7.07e-2).abs() < 5e-4,
            "{l2} {li}"
        );
    }

    #[test]
    fn contraction_constant_examples() {
        let dom = crate::grid::DRectangle::interval(0.0, 1.0).unwrap();
        let g = Grid::uniform_1d(0.0, 1.0, 5).unwrap();
        let pure = SchemeConfig::moment(AuxiliaryBc::Bc1, 0.0, 0.0, 0.0);
        let lp = LinearProblem::constant(dom.clone(), 0.0, [0.0, 0.0], 1.0, |_| 0.0, |_| 0.0);
        let cc = contraction_constants(&lp, &pure, &g).unwrap();
        assert!((cc.lambda0 - (2.0 - 2f64.sqrt()) / 0.0625).abs() < 1e-10);
        assert_eq!(cc.kappa, 0.0);
        assert!(cc.r2.is_infinite());
        assert!((cc.beta - 1.0).abs() < 1e-14);
        let ex2 = get_example(ExampleId::OneDEx2 { epsilon: 0.1 }).unwrap();
        let Problem::Linear(var) = ex2 else {
            unreachable!()
        };
        assert!(matches!(
            contraction_constants(&var, &pure, &g),
            Err(Error::UnsupportedAnalysis(_))
        ));
    }

    #[test]
    fn newton_is_exact_on_linear_hj_solution() {
        let dom = crate::grid::DRectangle::interval(0.0, 1.0).unwrap();
        let hj = HJProblem {
            name: "u_x - 1".into(),
            domain: dom,
            epsilon: 0.0,
            hamiltonian: std::sync::Arc::new(|q, _, _| q[0] - 1.0),
            partials: None,
            g: std::sync::Arc::new(|x| x[0]),
            slope_bounds: vec![1.0],
            exact: None,
        };
        let g = Grid::uniform_1d(0.0, 1.0, 11).unwrap();
        for cfg in [
            SchemeConfig::moment(AuxiliaryBc::Bc1, 1.0, 1.0, 0.0),
            SchemeConfig::moment(AuxiliaryBc::Bc2, 1.0, 1.0, 1.0),
            SchemeConfig::lax_friedrichs(1.0),
            SchemeConfig::central(),
        ] {
            let rep = newton_continuation_solve(
                &hj,
                &cfg,
                &g,
                &ContinuationLadder::new(cfg.sigma, vec![cfg.r]),
                1e-10,
            )
            .unwrap();
            assert!(rep.converged);
            assert_eq!(rep.stage_iterations.len(), 1);
            for (k, v) in rep.solution.real_values().iter().enumerate() {
                assert!((v - g.node_point(k)[0]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn fixed_point_map_of_equal_inputs_agrees() {
        let p = get_example(ExampleId::OneDEx3 { epsilon: 0.1 }).unwrap();
        let g = Grid::uniform_1d(0.0, 1.0, 9).unwrap();
        let ev = SchemeEvaluator::new(
            &p,
            &SchemeConfig::moment(AuxiliaryBc::Bc2, 1.0, 1.0, 1.0),
            &g,
        )
        .unwrap();
        let u: Vec<f64> = (0..9).map(|k| (k as f64).sin()).collect();
        assert_eq!(
            fixed_point_map(&ev, 0.01, &u).unwrap(),
            fixed_point_map(&ev, 0.01, &u.clone()).unwrap()
        );
    }
}
