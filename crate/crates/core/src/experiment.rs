//! Experiment runners behind the command-line front end: convergence tables,
//! solution dumps and diagnostics reports.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::analysis::{
    characteristic_regime, linf_error, matrix_diagnostics, observed_orders, weighted_l2_error,
};
use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::operators::{assemble, BoundaryTreatment, StencilKind};
use crate::problems::Problem;
use crate::schemes::{SchemeConfig, SchemeEvaluator, SchemeFamily};
use crate::solvers::{contraction_constants, fixed_point_with, initial_guess, solve, SolveReport};

/// Library version written into artifact headers.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Command-line adjustments to a config.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOptions {
    /// Include the config's `full-meshes` rows.
    pub full: bool,
    /// Run this single mesh instead of the config's list.
    pub mesh: Option<usize>,
    /// Use iterative estimates in matrix diagnostics.
    pub estimate: bool,
}

impl RunOptions {
    fn meshes(&self, cfg: &ExperimentConfig) -> Vec<usize> {
        match self.mesh {
            Some(j) => vec![j],
            None => cfg.mesh_list(self.full),
        }
    }
}

/// Scientific notation with three significant digits and a two-digit
/// exponent, as printed in the tables (`6.91e-01`).
pub fn sci3(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    let s = format!("{v:.2e}");
    let (mant, exp) = s.split_once('e').expect("exponent present");
    let e: i32 = exp.parse().expect("integer exponent");
    format!("{mant}e{}{:02}", if e < 0 { '-' } else { '+' }, e.abs())
}

/// Table mesh size: the cell diameter `(Σ hᵢ²)^{1/2}` (equal to `h` in 1D).
pub fn table_h(grid: &Grid) -> f64 {
    grid.spacings().iter().map(|h| h * h).sum::<f64>().sqrt()
}

fn slug(label: &str) -> String {
    let mut out = String::new();
    for ch in label.chars() {
        if ch.is_ascii_alphanumeric() {
            out.push(ch.to_ascii_lowercase());
        } else if !out.ends_with('-') && !out.is_empty() {
            out.push('-');
        }
    }
    out.trim_end_matches('-').to_string()
}

/// Result of one mesh in a sweep.
#[derive(Debug, Clone, PartialEq)]
pub enum RowOutcome {
    Solved {
        l2: f64,
        linf: f64,
        residual: f64,
        iterations: usize,
    },
    /// The solver stopped before converging; `stage` is the ladder stage reached.
    NotConverged { stage: usize, residual: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowResult {
    pub nodes: usize,
    pub h: f64,
    pub outcome: RowOutcome,
    pub order_l2: Option<f64>,
    pub order_linf: Option<f64>,
}

impl RowResult {
    pub fn errors(&self) -> Option<(f64, f64)> {
        match self.outcome {
            RowOutcome::Solved { l2, linf, .. } => Some((l2, linf)),
            RowOutcome::NotConverged { .. } => None,
        }
    }
}

/// One scheme column of a convergence table.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnResult {
    pub label: String,
    pub scheme: SchemeConfig,
    pub rows: Vec<RowResult>,
}

impl ColumnResult {
    pub fn any_not_converged(&self) -> bool {
        self.rows.iter().any(|r| r.errors().is_none())
    }
}

/// A convergence table: one CSV per column.
#[derive(Debug, Clone, PartialEq)]
pub struct TableArtifact {
    pub title: Option<String>,
    pub example: String,
    pub example_description: String,
    pub epsilon: f64,
    pub columns: Vec<ColumnResult>,
    /// RFC 3339 creation time (written only to the rounded CSV).
    pub timestamp: String,
}

impl TableArtifact {
    fn header(&self, col: &ColumnResult) -> String {
        let mut h = String::new();
        if let Some(t) = &self.title {
            let _ = writeln!(h, "# title: {t}");
        }
        let _ = writeln!(
            h,
            "# example: {} (epsilon = {:e}): {}",
            self.example, self.epsilon, self.example_description
        );
        let _ = writeln!(h, "# scheme: {}: {}", col.label, col.scheme);
        let _ = writeln!(h, "# parameters: {}", parameter_caption(&col.scheme));
        let _ = writeln!(h, "# h is the cell diameter; errors over interior nodes; l2 is weighted by prod(h_i)^(1/2)");
        let _ = writeln!(h, "# version: momentfd {VERSION}");
        h
    }

    /// Rounded table (3 significant digits) with a timestamped header.
    pub fn csv(&self, column: usize) -> String {
        let col = &self.columns[column];
        let mut s = self.header(col);
        let _ = writeln!(s, "# generated: {}", self.timestamp);
        s.push_str("h,l2,l2_order,linf,linf_order\n");
        for r in &col.rows {
            s.push_str(&row_line(r, sci3));
        }
        s
    }

    /// Full-precision table; byte-identical for identical config and version.
    pub fn full_csv(&self, column: usize) -> String {
        let col = &self.columns[column];
        let mut s = self.header(col);
        s.push_str("h,l2,l2_order,linf,linf_order\n");
        for r in &col.rows {
            s.push_str(&row_line(r, |v| format!("{v:.16e}")));
        }
        s
    }

    /// Writes `<stem>-<column>.csv` and `.full.csv` for every column.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut paths = Vec::new();
        for (i, col) in self.columns.iter().enumerate() {
            let base = format!("{stem}-{}", slug(&col.label));
            let p = dir.join(format!("{base}.csv"));
            fs::write(&p, self.csv(i))?;
            paths.push(p);
            let p = dir.join(format!("{base}.full.csv"));
            fs::write(&p, self.full_csv(i))?;
            paths.push(p);
        }
        Ok(paths)
    }

    pub fn any_not_converged(&self) -> bool {
        self.columns.iter().any(ColumnResult::any_not_converged)
    }

    /// Human-readable table of all columns.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        if let Some(t) = &self.title {
            let _ = writeln!(s, "{t}");
        }
        for col in &self.columns {
            let _ = writeln!(s, "\n{}  [{}]", col.label, parameter_caption(&col.scheme));
            let _ = writeln!(
                s,
                "{:>10} {:>10} {:>6} {:>10} {:>6}",
                "h", "l2", "order", "linf", "order"
            );
            for r in &col.rows {
                let o = |v: Option<f64>| v.map_or(String::new(), |v| format!("{v:.2}"));
                match r.errors() {
                    Some((l2, li)) => {
                        let _ = writeln!(
                            s,
                            "{:>10} {:>10} {:>6} {:>10} {:>6}",
                            sci3(r.h),
                            sci3(l2),
                            o(r.order_l2),
                            sci3(li),
                            o(r.order_linf)
                        );
                    }
                    None => {
                        let _ = writeln!(s, "{:>10} {}", sci3(r.h), nc_cell(r));
                    }
                }
            }
        }
        s
    }
}

fn nc_cell(r: &RowResult) -> String {
    match r.outcome {
        RowOutcome::NotConverged { stage, .. } => format!("NC(stage {stage})"),
        RowOutcome::Solved { .. } => String::new(),
    }
}

fn row_line(r: &RowResult, num: impl Fn(f64) -> String) -> String {
    let opt = |v: Option<f64>| v.map_or(String::new(), &num);
    match r.errors() {
        Some((l2, li)) => format!(
            "{},{},{},{},{}\n",
            num(r.h),
            num(l2),
            opt(r.order_l2),
            num(li),
            opt(r.order_linf)
        ),
        None => {
            let nc = nc_cell(r);
            format!("{},{nc},,{nc},\n", num(r.h))
        }
    }
}

/// Caption-style parameter string, e.g. `eps_h = 9h^2, gamma_h = 1h^1, BC2`.
pub fn parameter_caption(s: &SchemeConfig) -> String {
    let mut parts = Vec::new();
    match (&s.lf_beta, s.family) {
        (Some(b), _) => parts.push(format!("beta = {b:?}")),
        (None, SchemeFamily::LaxFriedrichs) if s.sigma == 0.0 => {
            parts.push("beta = slope bounds / 2".into())
        }
        _ => {}
    }
    if s.sigma != 0.0 {
        parts.push(format!("eps_h = {}h^{}", s.sigma, s.r));
    }
    if s.family == SchemeFamily::MomentCentral {
        parts.push(format!("gamma_h = {}h^{}", s.gamma, s.p));
        parts.push(s.bc.name().to_uppercase());
    }
    if parts.is_empty() {
        "no stabilization".into()
    } else {
        parts.join(", ")
    }
}

/// Solves one configuration on one grid with the config's solver knobs.
pub fn solve_one(
    cfg: &ExperimentConfig,
    problem: &Problem,
    scheme: &SchemeConfig,
    grid: &Grid,
) -> Result<SolveReport> {
    match (problem.is_linear(), cfg.solver.fixed_point()) {
        (true, Some(fp)) => {
            let ev = SchemeEvaluator::new(problem, scheme, grid)?;
            fixed_point_with(&ev, &fp, None)
        }
        _ => solve(problem, scheme, grid, &cfg.solver.newton(scheme)),
    }
}

/// Runs every column of `cfg` over its meshes and tabulates the errors.
///
/// Rows whose solver stops early are recorded as `NC`; other solver errors
/// abort the run. Columns run on separate threads.
pub fn run_convergence(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<TableArtifact> {
    let problem = cfg.problem()?;
    let exact = problem
        .exact()
        .ok_or_else(|| {
            Error::Configuration(format!(
                "example `{}` has no exact solution; error norms are unavailable",
                cfg.example
            ))
        })?
        .clone();
    let meshes = opts.meshes(cfg);
    let grids = meshes
        .iter()
        .map(|&j| cfg.grid(j))
        .collect::<Result<Vec<_>>>()?;
    let mut columns = Vec::new();
    for c in &cfg.columns {
        columns.push((c.label()?, c.scheme_config()?));
    }

    let results: Vec<Result<ColumnResult>> = std::thread::scope(|scope| {
        let handles: Vec<_> = columns
            .iter()
            .map(|(label, scheme)| {
                let (problem, exact, grids, meshes) = (&problem, &exact, &grids, &meshes);
                scope.spawn(move || -> Result<ColumnResult> {
                    let mut rows = Vec::new();
                    for (grid, &j) in grids.iter().zip(meshes) {
                        let h = table_h(grid);
                        log::info!("{label}: J = {j}, h = {}", sci3(h));
                        let outcome = match solve_one(cfg, problem, scheme, grid) {
                            Ok(rep) if rep.converged => RowOutcome::Solved {
                                l2: weighted_l2_error(&rep.solution, exact, grid),
                                linf: linf_error(&rep.solution, exact, grid),
                                residual: rep.residual,
                                iterations: rep.total_iterations(),
                            },
                            Ok(rep) => RowOutcome::NotConverged {
                                stage: rep.failed_stage.unwrap_or(0),
                                residual: rep.residual,
                            },
                            Err(Error::Divergence { residual, .. }) => {
                                RowOutcome::NotConverged { stage: 0, residual }
                            }
                            Err(e) => return Err(e),
                        };
                        rows.push(RowResult {
                            nodes: j,
                            h,
                            outcome,
                            order_l2: None,
                            order_linf: None,
                        });
                    }
                    fill_orders(&mut rows);
                    Ok(ColumnResult {
                        label: label.clone(),
                        scheme: scheme.clone(),
                        rows,
                    })
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("column worker panicked"))
            .collect()
    });
    let id = cfg.example_id()?;
    Ok(TableArtifact {
        title: cfg.title.clone(),
        example: cfg.example.clone(),
        example_description: id.description().into(),
        epsilon: problem.epsilon(),
        columns: results.into_iter().collect::<Result<Vec<_>>>()?,
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
    })
}

fn fill_orders(rows: &mut [RowResult]) {
    for k in 1..rows.len() {
        if let (Some(a), Some(b)) = (rows[k - 1].errors(), rows[k].errors()) {
            let (h0, h1) = (rows[k - 1].h, rows[k].h);
            rows[k].order_l2 = observed_orders(&[(h0, a.0), (h1, b.0)])[1];
            rows[k].order_linf = observed_orders(&[(h0, a.1), (h1, b.1)])[1];
        }
    }
}

/// Solution of one column on one grid.
#[derive(Debug, Clone)]
pub struct SolvedColumn {
    pub label: String,
    pub scheme: SchemeConfig,
    pub report: SolveReport,
}

/// Solution dumps for every column of a single-mesh run.
#[derive(Debug, Clone)]
pub struct SolveArtifact {
    pub example: String,
    pub nodes: usize,
    pub columns: Vec<SolvedColumn>,
}

impl SolveArtifact {
    /// `x[,y],u` rows over all real nodes, sorted lexicographically by coordinates.
    pub fn csv(&self, column: usize) -> String {
        let col = &self.columns[column];
        let u = &col.report.solution;
        let grid = u.grid();
        let d = grid.dim();
        let mut s = String::new();
        let _ = writeln!(
            s,
            "# example: {}, J = {}, scheme: {}: {}",
            self.example, self.nodes, col.label, col.scheme
        );
        let _ = writeln!(
            s,
            "# converged: {}, residual: {:e}, iterations: {:?}",
            col.report.converged, col.report.residual, col.report.stage_iterations
        );
        s.push_str(if d == 1 { "x,u\n" } else { "x,y,u\n" });
        for k in lexicographic_order(grid) {
            let x = grid.node_point(k);
            let v = u.real_values()[k];
            if d == 1 {
                let _ = writeln!(s, "{:e},{:e}", x[0], v);
            } else {
                let _ = writeln!(s, "{:e},{:e},{:e}", x[0], x[1], v);
            }
        }
        s
    }

    /// A gnuplot script plotting every column's dump.
    pub fn gnuplot(&self, files: &[String]) -> String {
        let mut s = String::from("set datafile separator ','\nset key outside\n");
        let d = self
            .columns
            .first()
            .map_or(1, |c| c.report.solution.grid().dim());
        let _ = writeln!(s, "set title '{} (J = {})'", self.example, self.nodes);
        let items: Vec<String> = self
            .columns
            .iter()
            .zip(files)
            .map(|(c, f)| {
                if d == 1 {
                    format!("'{f}' using 1:2 with linespoints title '{}'", c.label)
                } else {
                    format!(
                        "'{f}' using 1:2:3 with points pt 7 ps 0.5 title '{}'",
                        c.label
                    )
                }
            })
            .collect();
        let _ = writeln!(
            s,
            "{} {}",
            if d == 1 { "plot" } else { "splot" },
            items.join(", \\\n     ")
        );
        s
    }

    /// Writes `<stem>-<column>-solution.csv` per column and, if requested, `<stem>-solution.gp`.
    pub fn write(&self, dir: &Path, stem: &str, gnuplot: bool) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut paths = Vec::new();
        let mut names = Vec::new();
        for (i, c) in self.columns.iter().enumerate() {
            let name = format!("{stem}-{}-solution.csv", slug(&c.label));
            let p = dir.join(&name);
            fs::write(&p, self.csv(i))?;
            paths.push(p);
            names.push(name);
        }
        if gnuplot {
            let p = dir.join(format!("{stem}-solution.gp"));
            fs::write(&p, self.gnuplot(&names))?;
            paths.push(p);
        }
        Ok(paths)
    }

    pub fn any_not_converged(&self) -> bool {
        self.columns.iter().any(|c| !c.report.converged)
    }
}

fn lexicographic_order(grid: &Grid) -> Vec<usize> {
    let mut nodes: Vec<usize> = (0..grid.num_nodes()).collect();
    nodes.sort_by(|&a, &b| {
        let (pa, pb) = (grid.node_point(a), grid.node_point(b));
        pa[0].total_cmp(&pb[0]).then(pa[1].total_cmp(&pb[1]))
    });
    nodes
}

fn single_mesh(cfg: &ExperimentConfig, opts: &RunOptions, what: &str) -> Result<usize> {
    match (opts.mesh, cfg.meshes.as_slice()) {
        (Some(j), _) => Ok(j),
        (None, [j]) => Ok(*j),
        (None, _) => Err(Error::Configuration(format!(
            "{what} needs a single mesh: pass --mesh J or list one mesh in the config"
        ))),
    }
}

/// Solves every column on a single mesh.
pub fn run_solve(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<SolveArtifact> {
    let j = single_mesh(cfg, opts, "solve")?;
    let problem = cfg.problem()?;
    let grid = cfg.grid(j)?;
    let mut columns = Vec::new();
    for c in &cfg.columns {
        let scheme = c.scheme_config()?;
        let report = solve_one(cfg, &problem, &scheme, &grid)?;
        columns.push(SolvedColumn {
            label: c.label()?,
            scheme,
            report,
        });
    }
    Ok(SolveArtifact {
        example: cfg.example.clone(),
        nodes: j,
        columns,
    })
}

/// Text diagnostics of every column on one mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisReport {
    pub text: String,
    /// Set when part of the analysis is unavailable for this problem; the
    /// message is the library's error text.
    pub unsupported: Option<String>,
}

/// Matrix properties, contraction constants and the characteristic-root
/// regime of each column; the mesh is `--mesh` or the config's first mesh.
pub fn run_analyze(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<AnalysisReport> {
    let j = opts.mesh.unwrap_or(cfg.meshes[0]);
    let problem = cfg.problem()?;
    let grid = cfg.grid(j)?;
    let mut text = String::new();
    let mut unsupported = None;
    let _ = writeln!(
        text,
        "example {} ({}), J = {j}, h = {}",
        cfg.example,
        problem.name(),
        sci3(grid.h_max())
    );
    let grad = assemble(
        StencilKind::Central(0),
        &grid,
        BoundaryTreatment::DirichletRows,
    )?;
    let dg = matrix_diagnostics(&grad, opts.estimate)?;
    let _ = writeln!(
        text,
        "\ncentral gradient (axis 0, Dirichlet rows): antisymmetric = {}, symmetric = {}",
        dg.antisymmetric, dg.symmetric
    );
    for c in &cfg.columns {
        let scheme = c.scheme_config()?;
        let _ = writeln!(text, "\n== {} : {} ==", c.label()?, scheme);
        let ev = SchemeEvaluator::new(&problem, &scheme, &grid)?;
        let eps_h = ev.params().eps_h;
        let _ = writeln!(
            text,
            "eps_h = {:e}, gamma_h = {:e}",
            eps_h,
            ev.params().gamma_h
        );
        let matrix = match &problem {
            Problem::Linear(_) => {
                let _ = writeln!(text, "\n-- interior system matrix --");
                ev.linear_system(eps_h)?.0
            }
            Problem::HamiltonJacobi(_) => {
                let _ = writeln!(text, "\n-- Jacobian at the initial guess --");
                ev.jacobian(&initial_guess(&ev), eps_h)?
            }
        };
        let _ = writeln!(text, "{}", matrix_diagnostics(&matrix, opts.estimate)?);
        let _ = writeln!(text, "\n-- contraction constants --");
        match &problem {
            Problem::Linear(lp) => match contraction_constants(lp, &scheme, &grid) {
                Ok(cc) => {
                    let _ = writeln!(text, "lambda0      {:.6e}", cc.lambda0);
                    let _ = writeln!(text, "lambda_star  {:.6e}", cc.lambda_star);
                    let _ = writeln!(text, "c0           {:.6e}", cc.c0);
                    let _ = writeln!(text, "kappa        {:.6e}", cc.kappa);
                    let _ = writeln!(text, "beta         {:.6e}", cc.beta);
                    let _ = writeln!(text, "R1           {:.6e}", cc.r1);
                    let _ = writeln!(text, "R2           {}", fmt_bound(cc.r2));
                    let _ = writeln!(text, "rho (0.5 min(R1, R2))  {:.6e}", 0.5 * cc.rho_max());
                }
                Err(e @ Error::UnsupportedAnalysis(_)) => {
                    let _ = writeln!(text, "unsupported: {e}");
                    unsupported.get_or_insert(e.to_string());
                }
                Err(e) => return Err(e),
            },
            Problem::HamiltonJacobi(_) => {
                let _ = writeln!(
                    text,
                    "not applicable: the fixed-point analysis covers linear problems"
                );
            }
        }
        if grid.dim() == 1 {
            let _ = writeln!(
                text,
                "\n-- characteristic roots (model problem with b = 1) --"
            );
            let gamma = if scheme.family == SchemeFamily::MomentCentral {
                scheme.gamma
            } else {
                0.0
            };
            let rr = characteristic_regime(
                scheme.sigma,
                problem.epsilon(),
                gamma,
                scheme.p,
                grid.h_max(),
            )?;
            let _ = writeln!(text, "a = {:.6e}, b = {:.6e}", rr.a, rr.b);
            if let Some(ratio) = rr.ratio {
                let _ = writeln!(
                    text,
                    "ratio (4a - 2h)/b = {ratio:.6e}  (heuristic: {})",
                    rr.heuristic
                );
            }
            let roots: Vec<String> = rr
                .roots
                .iter()
                .map(|z| format!("{:.6e}{:+.6e}i", z.re, z.im))
                .collect();
            let _ = writeln!(text, "roots: {}", roots.join(", "));
            let _ = writeln!(
                text,
                "eta(1) = {:.6e} (4h = {:.6e})",
                rr.eta_at_one,
                4.0 * rr.h
            );
            let _ = writeln!(text, "regime: {}", rr.regime);
        }
    }
    Ok(AnalysisReport { text, unsupported })
}

fn fmt_bound(v: f64) -> String {
    if v.is_infinite() {
        "+inf".into()
    } else {
        format!("{v:.6e}")
    }
}

/// Convenience for tests and the web demo: the solution of one configuration
/// as `(coordinates, values)` over real nodes.
pub fn solution_points(u: &GridFunction) -> Vec<([f64; 2], f64)> {
    let grid = u.grid();
    lexicographic_order(grid)
        .into_iter()
        .map(|k| (grid.node_point(k), u.real_values()[k]))
        .collect()
}
