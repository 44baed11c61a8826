//! Scheme families, auxiliary boundary closures, residual evaluation and
//! linear-system assembly.
//!
//! All families share the uniform-mesh form
//!
//! ```text
//! R[U]_α = −(ε + ε_h) Δ_h U_α − Σᵢ βᵢ hᵢ δ²ᵢ U_α + H(∇U_α, U_α, x_α) + γ_h (Δ_{2h} − Δ_h) U_α
//! ```
//!
//! at interior nodes, with `R[U]_α = U_α − g(x_α)` at boundary nodes.
//! `ε_h = σ hʳ`, `γ_h = γ hᵖ` with `h = h_max`. The gradient inside `H` is
//! central except for the upwind family, which switches between `δ⁻`
//! (`bᵢ ≥ 0`) and `δ⁺` (`bᵢ < 0`) per node. The `β` term is only used by
//! Lax-Friedrichs when no explicit `σ` is given or when `lf_beta` is set.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid::{Ghost, Grid, GridFunction};
use crate::operators::{assemble_rows, column_map, stencil_row, BoundaryTreatment, StencilKind};
use crate::problems::{HJProblem, LinearProblem, Problem};
use crate::sparse::{Provenance, SparseOperator};

/// Auxiliary boundary condition supplying ghost values for the moment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AuxiliaryBc {
    /// `δ²U_b = 0`: ghost `G = 2U_b − U₁`.
    Bc1,
    /// `δ²U_b = δ²U₁`: ghost `G = 3U_b − 3U₁ + U₂`.
    Bc2,
}

impl AuxiliaryBc {
    /// Ghost coefficients on `(U_b, U₁, U₂)`, the boundary node and the first
    /// two nodes inward.
    pub fn coefficients(&self) -> [f64; 3] {
        match self {
            AuxiliaryBc::Bc1 => [2.0, -1.0, 0.0],
            AuxiliaryBc::Bc2 => [3.0, -3.0, 1.0],
        }
    }

    /// BC2 reaches two interior nodes inward, so every axis needs `J ≥ 4`.
    pub fn check_grid(&self, grid: &Grid) -> Result<()> {
        if *self == AuxiliaryBc::Bc2 {
            if let Some(j) = grid.nodes_per_dim().iter().find(|&&j| j < 4) {
                return Err(Error::Configuration(format!(
                    "BC2 needs two interior nodes inward from each boundary (J >= 4), got J = {j}"
                )));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            AuxiliaryBc::Bc1 => "bc1",
            AuxiliaryBc::Bc2 => "bc2",
        }
    }
}

/// Ghost closure of a grid: one formula per ghost node.
#[derive(Debug, Clone)]
pub struct GhostClosure {
    pub bc: AuxiliaryBc,
    pub ghosts: Vec<Ghost>,
}

impl GhostClosure {
    pub fn new(grid: &Grid, bc: AuxiliaryBc) -> Result<Self> {
        bc.check_grid(grid)?;
        Ok(Self {
            bc,
            ghosts: grid.enumerate_ghosts(),
        })
    }

    /// Ghost value for slot `s` from real-node values.
    pub fn value(&self, real: &[f64], s: usize) -> f64 {
        let g = &self.ghosts[s];
        let [cb, c1, c2] = self.bc.coefficients();
        cb * real[g.boundary] + c1 * real[g.inward[0]] + c2 * real[g.inward[1]]
    }
}

/// Returns `u` with every ghost set by the closure formula (idempotent).
pub fn ghost_fill(u: &GridFunction, bc: AuxiliaryBc) -> Result<GridFunction> {
    let closure = GhostClosure::new(u.grid(), bc)?;
    let mut out = u.clone();
    out.ensure_ghosts();
    let j = u.grid().num_nodes();
    let real = u.real_values().to_vec();
    for s in 0..closure.ghosts.len() {
        out.values_mut()[j + s] = closure.value(&real, s);
    }
    Ok(out)
}

/// Scheme family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeFamily {
    MomentCentral,
    LaxFriedrichs,
    Upwind,
    PureCentral,
}

/// Scheme selection and stabilization parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeConfig {
    pub family: SchemeFamily,
    /// `ε_h = σ hʳ`.
    pub sigma: f64,
    pub r: f64,
    /// `γ_h = γ hᵖ`.
    pub gamma: f64,
    pub p: f64,
    pub bc: AuxiliaryBc,
    /// Explicit Lax-Friedrichs `β`, one entry per dimension.
    pub lf_beta: Option<Vec<f64>>,
}

/// Names accepted by [`SchemeConfig::from_str`].
pub const SCHEME_NAMES: [&str; 5] = [
    "moment-bc1",
    "moment-bc2",
    "lax-friedrichs",
    "upwind",
    "central",
];

impl SchemeConfig {
    /// Moment-stabilized central scheme with `ε_h = σ h²`, `γ_h = γ hᵖ`.
    pub fn moment(bc: AuxiliaryBc, sigma: f64, gamma: f64, p: f64) -> Self {
        Self {
            family: SchemeFamily::MomentCentral,
            sigma,
            r: 2.0,
            gamma,
            p,
            bc,
            lf_beta: None,
        }
    }

    /// Lax-Friedrichs with `ε_h = σ h`.
    pub fn lax_friedrichs(sigma: f64) -> Self {
        Self {
            family: SchemeFamily::LaxFriedrichs,
            sigma,
            r: 1.0,
            gamma: 0.0,
            p: 0.0,
            bc: AuxiliaryBc::Bc1,
            lf_beta: None,
        }
    }

    /// Lax-Friedrichs with the numerical viscosity `Σ βᵢ hᵢ δ²ᵢ`.
    pub fn lax_friedrichs_beta(beta: Vec<f64>) -> Self {
        Self {
            lf_beta: Some(beta),
            ..Self::lax_friedrichs(0.0)
        }
    }

    pub fn upwind() -> Self {
        Self {
            family: SchemeFamily::Upwind,
            ..Self::central()
        }
    }

    pub fn central() -> Self {
        Self {
            family: SchemeFamily::PureCentral,
            sigma: 0.0,
            r: 1.0,
            gamma: 0.0,
            p: 0.0,
            bc: AuxiliaryBc::Bc1,
            lf_beta: None,
        }
    }

    /// Registry name of this configuration's family and closure.
    pub fn name(&self) -> &'static str {
        match (self.family, self.bc) {
            (SchemeFamily::MomentCentral, AuxiliaryBc::Bc1) => "moment-bc1",
            (SchemeFamily::MomentCentral, AuxiliaryBc::Bc2) => "moment-bc2",
            (SchemeFamily::LaxFriedrichs, _) => "lax-friedrichs",
            (SchemeFamily::Upwind, _) => "upwind",
            (SchemeFamily::PureCentral, _) => "central",
        }
    }

    /// Table-style label, e.g. `h*Moment BC1` for `p = 1`.
    pub fn label(&self) -> String {
        match self.family {
            SchemeFamily::MomentCentral => {
                let pre = if self.p == 0.0 {
                    String::new()
                } else if self.p == 1.0 {
                    "h*".into()
                } else {
                    format!("h^{}*", self.p)
                };
                format!("{pre}Moment {}", self.bc.name().to_uppercase())
            }
            SchemeFamily::LaxFriedrichs => "Lax-Friedrichs".into(),
            SchemeFamily::Upwind => "Upwind".into(),
            SchemeFamily::PureCentral => "Central".into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Configuration(m));
        for (name, v) in [("sigma", self.sigma), ("gamma", self.gamma)] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be finite and nonnegative, got {v}"));
            }
        }
        if !self.r.is_finite() {
            return bad(format!("r must be finite, got {}", self.r));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return bad(format!("p must lie in [0, 1], got {}", self.p));
        }
        if let Some(beta) = &self.lf_beta {
            if self.family != SchemeFamily::LaxFriedrichs {
                return bad("lf-beta only applies to lax-friedrichs".into());
            }
            if beta.iter().any(|b| !(b.is_finite() && *b >= 0.0)) {
                return bad("lf-beta entries must be finite and nonnegative".into());
            }
        }
        match self.family {
            SchemeFamily::LaxFriedrichs => {
                if self.gamma != 0.0 {
                    return bad("lax-friedrichs requires gamma = 0".into());
                }
                if self.sigma > 0.0 && self.r != 1.0 {
                    return bad(format!("lax-friedrichs requires r = 1, got {}", self.r));
                }
            }
            SchemeFamily::PureCentral => {
                if self.sigma != 0.0 || self.gamma != 0.0 {
                    return bad("central requires sigma = 0 and gamma = 0".into());
                }
            }
            SchemeFamily::Upwind => {
                if self.gamma != 0.0 {
                    return bad("upwind requires gamma = 0".into());
                }
            }
            SchemeFamily::MomentCentral => {}
        }
        Ok(())
    }

    /// `ε_h = σ hʳ` on `grid`.
    pub fn eps_h(&self, grid: &Grid) -> f64 {
        if self.sigma == 0.0 {
            0.0
        } else {
            self.sigma * grid.h_max().powf(self.r)
        }
    }

    /// `γ_h = γ hᵖ` on `grid` (zero outside the moment family).
    pub fn gamma_h(&self, grid: &Grid) -> f64 {
        if self.family == SchemeFamily::MomentCentral && self.gamma != 0.0 {
            self.gamma * grid.h_max().powf(self.p)
        } else {
            0.0
        }
    }

    fn uses_beta(&self) -> bool {
        self.family == SchemeFamily::LaxFriedrichs && (self.lf_beta.is_some() || self.sigma == 0.0)
    }
}

impl FromStr for SchemeConfig {
    type Err = Error;

    /// Parses a registry name with default parameters
    /// (`σ = 1`, `r = 2`, `γ = 1`, `p = 0` for the moment family; `σ = 1` for Lax-Friedrichs).
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "moment-bc1" => Self::moment(AuxiliaryBc::Bc1, 1.0, 1.0, 0.0),
            "moment-bc2" => Self::moment(AuxiliaryBc::Bc2, 1.0, 1.0, 0.0),
            "lax-friedrichs" => Self::lax_friedrichs(1.0),
            "upwind" => Self::upwind(),
            "central" => Self::central(),
            other => {
                return Err(Error::Configuration(format!(
                    "unknown scheme `{other}` (expected one of {})",
                    SCHEME_NAMES.join(", ")
                )))
            }
        })
    }
}

impl fmt::Display for SchemeConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (sigma={}, r={}", self.name(), self.sigma, self.r)?;
        if self.family == SchemeFamily::MomentCentral {
            write!(f, ", gamma={}, p={}", self.gamma, self.p)?;
        }
        if let Some(b) = &self.lf_beta {
            write!(f, ", beta={b:?}")?;
        }
        f.write_str(")")
    }
}

/// Precomputed operators of one scheme on one grid.
///
/// Every operator has the interior nodes as rows and all real nodes as
/// columns, with ghost values already eliminated through the closure.
#[derive(Debug, Clone)]
pub struct Discretization {
    grid: Grid,
    cfg: SchemeConfig,
    rows: Vec<usize>,
    points: Vec<[f64; 2]>,
    laplacian: SparseOperator,
    second: Vec<SparseOperator>,
    gradient: Vec<SparseOperator>,
    backward: Vec<SparseOperator>,
    forward: Vec<SparseOperator>,
    moment: Option<SparseOperator>,
    selector: SparseOperator,
    interior_cols: Vec<Option<usize>>,
}

impl Discretization {
    pub fn new(grid: &Grid, cfg: &SchemeConfig) -> Result<Self> {
        cfg.validate()?;
        let all = |kind: StencilKind| -> Result<SparseOperator> {
            crate::operators::assemble(kind, grid, BoundaryTreatment::None)
        };
        let d = grid.dim();
        let upwind = cfg.family == SchemeFamily::Upwind;
        let moment = if cfg.gamma_h(grid) != 0.0 {
            cfg.bc.check_grid(grid)?;
            // Eq. (7.1) form: γ_h Σᵢ (δ²_{2h} − δ²_h), i.e. the p = 0 stencil scaled by γ_h
            let kind = StencilKind::Moment(0.0);
            Some(assemble_rows(
                grid,
                BoundaryTreatment::None,
                Provenance::Moment {
                    p: 0.0,
                    closure: cfg.bc,
                },
                |k, out| stencil_row(grid, kind, k, Some(cfg.bc), false, out),
            )?)
        } else {
            None
        };
        let rows = grid.interior_nodes();
        let selector = assemble_rows(
            grid,
            BoundaryTreatment::None,
            Provenance::Other("node selector".into()),
            |k, out| {
                out.push((k, 1.0));
                Ok(())
            },
        )?;
        let per_axis = |make: fn(usize) -> StencilKind, on: bool| -> Result<Vec<SparseOperator>> {
            if on {
                (0..d).map(|i| all(make(i))).collect()
            } else {
                Ok(Vec::new())
            }
        };
        Ok(Self {
            points: rows.iter().map(|&k| grid.node_point(k)).collect(),
            // `assemble` stores Second/Laplacian as −δ², −Δ_h; flip back to +
            laplacian: all(StencilKind::Laplacian)?.scaled(-1.0),
            second: per_axis(StencilKind::Second, cfg.uses_beta())?
                .into_iter()
                .map(|a| a.scaled(-1.0))
                .collect(),
            gradient: per_axis(StencilKind::Central, true)?,
            backward: per_axis(StencilKind::Backward, upwind)?,
            forward: per_axis(StencilKind::Forward, upwind)?,
            moment,
            selector,
            interior_cols: column_map(grid, false),
            rows,
            grid: grid.clone(),
            cfg: cfg.clone(),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.cfg
    }

    /// Interior node indices, in row order.
    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    /// Coordinates of the interior nodes, in row order.
    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    /// Central-difference gradient operators, one per axis.
    pub fn gradient(&self) -> &[SparseOperator] {
        &self.gradient
    }

    /// Maps a real node to its interior column, if any.
    pub fn interior_columns(&self) -> &[Option<usize>] {
        &self.interior_cols
    }

    /// The `U`-linear stabilization and diffusion part
    /// `−(ε+ε_h)Δ_h − Σ βᵢhᵢδ²ᵢ + γ_h(Δ_{2h} − Δ_h)` as weighted terms.
    fn linear_terms<'a>(
        &'a self,
        diffusion: f64,
        beta: &'a Option<Vec<f64>>,
        gamma_h: f64,
    ) -> Vec<(f64, Option<&'a [f64]>, &'a SparseOperator)> {
        let mut terms = vec![(-diffusion, None, &self.laplacian)];
        if let Some(beta) = beta {
            for (i, s) in self.second.iter().enumerate() {
                terms.push((-beta[i] * self.grid.spacing(i), None, s));
            }
        }
        if let Some(m) = &self.moment {
            terms.push((gamma_h, None, m));
        }
        terms
    }

    /// Drops boundary columns of a full-column operator.
    pub fn interior_part(&self, full: &SparseOperator) -> SparseOperator {
        full.select_columns(&self.interior_cols, self.rows.clone())
    }
}

/// Scheme parameters resolved on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeParams {
    pub eps_h: f64,
    pub gamma_h: f64,
    /// Lax-Friedrichs `β` when the viscosity is given in `β` form.
    pub beta: Option<Vec<f64>>,
}

/// Resolves `ε_h`, `γ_h` and, for Lax-Friedrichs in `β` form, the `β` vector
/// (explicit, or half the slope bounds).
pub fn scheme_params(problem: &Problem, cfg: &SchemeConfig, grid: &Grid) -> Result<SchemeParams> {
    cfg.validate()?;
    let d = grid.dim();
    let beta = if cfg.uses_beta() {
        Some(match &cfg.lf_beta {
            Some(b) => {
                if b.len() != d {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        found: b.len(),
                    });
                }
                b.clone()
            }
            None => slope_bounds(problem, grid)?
                .iter()
                .map(|s| s / 2.0)
                .collect(),
        })
    } else {
        None
    };
    Ok(SchemeParams {
        eps_h: cfg.eps_h(grid),
        gamma_h: cfg.gamma_h(grid),
        beta,
    })
}

/// Per-dimension bounds on `|∂H/∂qᵢ|`: the problem's bounds for HJ, `max|bᵢ|`
/// over the grid nodes for linear problems.
pub fn slope_bounds(problem: &Problem, grid: &Grid) -> Result<Vec<f64>> {
    let d = grid.dim();
    match problem {
        Problem::HamiltonJacobi(p) => {
            if p.slope_bounds.len() != d {
                return Err(Error::Configuration(format!(
                    "lax-friedrichs needs {d} slope bound(s) for `{}`, found {}",
                    p.name,
                    p.slope_bounds.len()
                )));
            }
            Ok(p.slope_bounds.clone())
        }
        Problem::Linear(p) => {
            let mut m = vec![0.0f64; d];
            for k in 0..grid.num_nodes() {
                let b = (p.b)(&grid.node_point(k)[..d]);
                for i in 0..d {
                    m[i] = m[i].max(b[i].abs());
                }
            }
            Ok(m)
        }
    }
}

/// A scheme bound to a problem and a grid: residuals, Jacobians and, for
/// linear problems, the assembled system.
#[derive(Debug, Clone)]
pub struct SchemeEvaluator {
    problem: Problem,
    disc: Discretization,
    params: SchemeParams,
    boundary: Vec<usize>,
    g: Vec<f64>,
    /// Row weights: `bᵢ` (central), or `bᵢ⁺`, `bᵢ⁻` (upwind), and `c`, `f`.
    b: Vec<Vec<f64>>,
    b_pos: Vec<Vec<f64>>,
    b_neg: Vec<Vec<f64>>,
    c: Vec<f64>,
    f: Vec<f64>,
}

impl SchemeEvaluator {
    pub fn new(problem: &Problem, cfg: &SchemeConfig, grid: &Grid) -> Result<Self> {
        problem.validate()?;
        if problem.domain() != grid.domain() {
            return Err(Error::Configuration(format!(
                "grid domain {:?} differs from the domain of `{}`",
                grid.domain(),
                problem.name()
            )));
        }
        if cfg.family == SchemeFamily::Upwind && !problem.is_linear() {
            return Err(Error::Configuration(
                "upwind is only defined for linear problems".into(),
            ));
        }
        let params = scheme_params(problem, cfg, grid)?;
        let disc = Discretization::new(grid, cfg)?;
        let d = grid.dim();
        let boundary = grid.boundary_nodes();
        let gfun = problem.boundary();
        let mut g = vec![0.0; grid.num_nodes()];
        for &k in &boundary {
            g[k] = gfun(&grid.node_point(k)[..d]);
        }
        let mut ev = Self {
            problem: problem.clone(),
            params,
            boundary,
            g,
            b: Vec::new(),
            b_pos: Vec::new(),
            b_neg: Vec::new(),
            c: Vec::new(),
            f: Vec::new(),
            disc,
        };
        if let Problem::Linear(p) = problem {
            let pts = ev.disc.points().to_vec();
            let bs: Vec<[f64; 2]> = pts.iter().map(|x| (p.b)(&x[..d])).collect();
            ev.b = (0..d).map(|i| bs.iter().map(|b| b[i]).collect()).collect();
            ev.b_pos =
                ev.b.iter()
                    .map(|v| v.iter().map(|&b| if b >= 0.0 { b } else { 0.0 }).collect())
                    .collect();
            ev.b_neg =
                ev.b.iter()
                    .map(|v| v.iter().map(|&b| if b < 0.0 { b } else { 0.0 }).collect())
                    .collect();
            ev.c = pts.iter().map(|x| (p.c)(&x[..d])).collect();
            ev.f = pts.iter().map(|x| (p.f)(&x[..d])).collect();
        }
        Ok(ev)
    }

    pub fn problem(&self) -> &Problem {
        &self.problem
    }

    pub fn discretization(&self) -> &Discretization {
        &self.disc
    }

    pub fn params(&self) -> &SchemeParams {
        &self.params
    }

    pub fn grid(&self) -> &Grid {
        self.disc.grid()
    }

    /// Boundary data `g` on the real nodes (zero at interior nodes).
    pub fn boundary_data(&self) -> &[f64] {
        &self.g
    }

    pub fn boundary_nodes(&self) -> &[usize] {
        &self.boundary
    }

    /// Size of the data term: `‖f‖∞` (linear) or `max|H(0,0,x)|` (HJ) over interior nodes.
    pub fn data_scale(&self) -> f64 {
        match &self.problem {
            Problem::Linear(_) => self.f.iter().map(|v| v.abs()).fold(0.0, f64::max),
            Problem::HamiltonJacobi(p) => {
                let d = self.grid().dim();
                p.data_scale(self.disc.points().iter().map(|x| &x[..d]))
            }
        }
    }

    /// Full-column linear operator of a linear problem with viscosity `eps_h`.
    pub fn linear_operator(&self, eps_h: f64) -> Result<SparseOperator> {
        let Problem::Linear(p) = &self.problem else {
            return Err(Error::Configuration(
                "a linear operator is only available for linear problems".into(),
            ));
        };
        let disc = &self.disc;
        let mut terms =
            disc.linear_terms(p.epsilon + eps_h, &self.params.beta, self.params.gamma_h);
        if disc.cfg.family == SchemeFamily::Upwind {
            for i in 0..self.grid().dim() {
                terms.push((1.0, Some(&self.b_pos[i]), &disc.backward[i]));
                terms.push((1.0, Some(&self.b_neg[i]), &disc.forward[i]));
            }
        } else {
            for i in 0..self.grid().dim() {
                terms.push((1.0, Some(&self.b[i]), &disc.gradient[i]));
            }
        }
        terms.push((1.0, Some(&self.c), &disc.selector));
        Ok(SparseOperator::combine(
            &terms,
            Provenance::Scheme(disc.cfg.to_string()),
        ))
    }

    /// Interior residual at real-node values `u` (boundary values are read from `u`).
    pub fn interior_residual(&self, u: &[f64], eps_h: f64) -> Result<Vec<f64>> {
        let grid = self.grid();
        if u.len() != grid.num_nodes() {
            return Err(Error::DimensionMismatch {
                expected: grid.num_nodes(),
                found: u.len(),
            });
        }
        match &self.problem {
            Problem::Linear(_) => {
                let a = self.linear_operator(eps_h)?;
                let mut r = a.mul_vec(u);
                r.iter_mut().zip(&self.f).for_each(|(ri, fi)| *ri -= fi);
                Ok(r)
            }
            Problem::HamiltonJacobi(p) => Ok(self.hj_residual(p, u, eps_h)),
        }
    }

    fn hj_linear_part(&self, p: &HJProblem, eps_h: f64) -> SparseOperator {
        let terms =
            self.disc
                .linear_terms(p.epsilon + eps_h, &self.params.beta, self.params.gamma_h);
        SparseOperator::combine(&terms, Provenance::Scheme(self.disc.cfg.to_string()))
    }

    fn gradients(&self, u: &[f64]) -> Vec<Vec<f64>> {
        self.disc.gradient.iter().map(|g| g.mul_vec(u)).collect()
    }

    fn hj_residual(&self, p: &HJProblem, u: &[f64], eps_h: f64) -> Vec<f64> {
        let d = self.grid().dim();
        let mut r = self.hj_linear_part(p, eps_h).mul_vec(u);
        let q = self.gradients(u);
        for (row, &k) in self.disc.rows.iter().enumerate() {
            let qr = [q[0][row], if d > 1 { q[1][row] } else { 0.0 }];
            r[row] += (p.hamiltonian)(&qr[..d], u[k], &self.disc.points[row][..d]);
        }
        r
    }

    /// Interior-by-interior Jacobian of the interior residual at `u`.
    ///
    /// Uses the problem's analytic partials when present; otherwise forward
    /// differences of `H` in `(q, v)` with step `1e−7 (1 + |·|)`.
    pub fn jacobian(&self, u: &[f64], eps_h: f64) -> Result<SparseOperator> {
        let full = match &self.problem {
            Problem::Linear(_) => self.linear_operator(eps_h)?,
            Problem::HamiltonJacobi(p) => {
                let d = self.grid().dim();
                let q = self.gradients(u);
                let n = self.disc.rows.len();
                let mut dq = vec![vec![0.0; n]; d];
                let mut dv = vec![0.0; n];
                for (row, &k) in self.disc.rows.iter().enumerate() {
                    let x = &self.disc.points[row][..d];
                    let qr = [q[0][row], if d > 1 { q[1][row] } else { 0.0 }];
                    let (gq, gv) = match &p.partials {
                        Some(partials) => partials(&qr[..d], u[k], x),
                        None => fd_partials(&p.hamiltonian, &qr[..d], u[k], x),
                    };
                    for i in 0..d {
                        dq[i][row] = gq[i];
                    }
                    dv[row] = gv;
                }
                let lin = self.hj_linear_part(p, eps_h);
                let mut terms: Vec<(f64, Option<&[f64]>, &SparseOperator)> =
                    vec![(1.0, None, &lin)];
                for i in 0..d {
                    terms.push((1.0, Some(&dq[i]), &self.disc.gradient[i]));
                }
                terms.push((1.0, Some(&dv), &self.disc.selector));
                SparseOperator::combine(&terms, Provenance::Scheme("jacobian".into()))
            }
        };
        Ok(self.disc.interior_part(&full))
    }

    /// Full residual: scheme rows at interior nodes, `U − g` at boundary nodes.
    pub fn residual(&self, u: &GridFunction) -> Result<GridFunction> {
        let vals = u.real_values();
        let r_int = self.interior_residual(vals, self.params.eps_h)?;
        let mut out = vec![0.0; vals.len()];
        for &k in &self.boundary {
            out[k] = vals[k] - self.g[k];
        }
        for (row, &k) in self.disc.rows.iter().enumerate() {
            out[k] = r_int[row];
        }
        GridFunction::from_values(self.grid(), out)
    }

    /// Interior matrix and right-hand side with boundary data folded in.
    pub fn linear_system(&self, eps_h: f64) -> Result<(SparseOperator, Vec<f64>)> {
        let full = self.linear_operator(eps_h)?;
        let mut rhs = self.f.clone();
        for (r, rhs_r) in rhs.iter_mut().enumerate() {
            for (c, v) in full.row(r) {
                if self.disc.interior_cols[c].is_none() {
                    *rhs_r -= v * self.g[c];
                }
            }
        }
        Ok((self.disc.interior_part(&full), rhs))
    }

    /// Real-node vector with interior values `x` and boundary values `g`.
    pub fn expand(&self, x: &[f64]) -> Vec<f64> {
        let mut u = self.g.clone();
        for (row, &k) in self.disc.rows.iter().enumerate() {
            u[k] = x[row];
        }
        u
    }
}

fn fd_partials(
    h: &crate::problems::HamiltonianFn,
    q: &[f64],
    v: f64,
    x: &[f64],
) -> ([f64; 2], f64) {
    let base = h(q, v, x);
    let mut gq = [0.0; 2];
    let mut qq = [0.0; 2];
    qq[..q.len()].copy_from_slice(q);
    for i in 0..q.len() {
        let s = 1e-7 * (1.0 + q[i].abs());
        let mut qp = qq;
        qp[i] += s;
        gq[i] = (h(&qp[..q.len()], v, x) - base) / s;
    }
    let s = 1e-7 * (1.0 + v.abs());
    (gq, (h(q, v + s, x) - base) / s)
}

/// Residual of the scheme at `u`: scheme rows at interior nodes, `U − g` on the boundary.
pub fn residual(problem: &Problem, cfg: &SchemeConfig, u: &GridFunction) -> Result<GridFunction> {
    SchemeEvaluator::new(problem, cfg, u.grid())?.residual(u)
}

/// Interior system `A x = rhs` of a linear problem; Dirichlet data and ghost
/// closures are folded into `A` and `rhs`.
pub fn assemble_linear_system(
    problem: &LinearProblem,
    cfg: &SchemeConfig,
    grid: &Grid,
) -> Result<(SparseOperator, Vec<f64>)> {
    let ev = SchemeEvaluator::new(&Problem::Linear(problem.clone()), cfg, grid)?;
    ev.linear_system(ev.params.eps_h)
}
