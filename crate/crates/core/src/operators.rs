//! Difference operators: pointwise stencil application and sparse assembly.
//!
//! Sign convention: [`apply_stencil`] returns the operator as written
//! (`+δ²`, `+Δ_h`), while [`assemble`] represents `Second` and `Laplacian` in
//! the positive-definite orientation `−δ²`, `−Δ_h`. Every other kind is
//! assembled with the sign it is applied with.

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction, MultiIndex};
use crate::schemes::AuxiliaryBc;
use crate::sparse::{Provenance, SparseOperator};

/// The difference operators of the scheme. Axes are 0-based.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StencilKind {
    /// `δ⁺`: `(U(α+e) − U(α))/h`.
    Forward(usize),
    /// `δ⁻`: `(U(α) − U(α−e))/h`.
    Backward(usize),
    /// `δ`: `(U(α+e) − U(α−e))/(2h)`.
    Central(usize),
    /// `δ²_h`: `(U(α+e) − 2U(α) + U(α−e))/h²`.
    Second(usize),
    /// `δ²_{2h}`: `(U(α+2e) − 2U(α) + U(α−2e))/(4h²)`.
    StaggeredSecond(usize),
    /// `Δ_h = Σ δ²_h`.
    Laplacian,
    /// Numerical moment `M_h^p = Σ hᵢᵖ(δ²_{2h} − δ²_h)`.
    Moment(f64),
}

impl StencilKind {
    fn axis(&self) -> Option<usize> {
        match *self {
            StencilKind::Forward(i)
            | StencilKind::Backward(i)
            | StencilKind::Central(i)
            | StencilKind::Second(i)
            | StencilKind::StaggeredSecond(i) => Some(i),
            StencilKind::Laplacian | StencilKind::Moment(_) => None,
        }
    }

    fn validate(&self, grid: &Grid) -> Result<()> {
        if let Some(i) = self.axis() {
            if i >= grid.dim() {
                return Err(Error::Configuration(format!(
                    "stencil axis {i} out of range for a {}-dimensional grid",
                    grid.dim()
                )));
            }
        }
        if let StencilKind::Moment(p) = *self {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Configuration(format!(
                    "moment power p = {p} outside [0, 1]"
                )));
            }
        }
        Ok(())
    }

    /// Does assembly flip this operator into the `−` orientation?
    fn assembled_sign(&self) -> f64 {
        match self {
            StencilKind::Second(_) | StencilKind::Laplacian => -1.0,
            _ => 1.0,
        }
    }
}

/// How boundary rows and columns are handled by [`assemble`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryTreatment {
    /// Interior rows and interior columns; boundary columns are dropped
    /// (the caller moves the boundary data to the right-hand side).
    DirichletRows,
    /// Interior rows and columns with the zero one-sided-difference closure
    /// `U_b = U₁` at the boundary (only for `Second`).
    NeumannRows,
    /// Interior rows over all real columns, boundary columns kept.
    None,
}

/// Stencil of `kind` as `(axis, offset, coefficient)` triples, with the
/// application-level sign.
pub fn stencil_offsets(kind: StencilKind, grid: &Grid) -> Vec<(usize, i64, f64)> {
    let axis_terms = |i: usize, kind: StencilKind| -> Vec<(usize, i64, f64)> {
        let h = grid.spacing(i);
        match kind {
            StencilKind::Forward(_) => vec![(i, 1, 1.0 / h), (i, 0, -1.0 / h)],
            StencilKind::Backward(_) => vec![(i, 0, 1.0 / h), (i, -1, -1.0 / h)],
            StencilKind::Central(_) => {
                let w = 1.0 / (2.0 * h);
                vec![(i, 1, w), (i, -1, -w)]
            }
            StencilKind::Second(_) => {
                let w = 1.0 / (h * h);
                vec![(i, 1, w), (i, 0, -2.0 * w), (i, -1, w)]
            }
            StencilKind::StaggeredSecond(_) => {
                let w = 1.0 / (4.0 * h * h);
                vec![(i, 2, w), (i, 0, -2.0 * w), (i, -2, w)]
            }
            StencilKind::Moment(p) => {
                let w = 1.0 / (4.0 * h.powf(2.0 - p));
                vec![
                    (i, 2, w),
                    (i, 1, -4.0 * w),
                    (i, 0, 6.0 * w),
                    (i, -1, -4.0 * w),
                    (i, -2, w),
                ]
            }
            StencilKind::Laplacian => unreachable!(),
        }
    };
    match kind {
        StencilKind::Laplacian => (0..grid.dim())
            .flat_map(|i| axis_terms(i, StencilKind::Second(i)))
            .collect(),
        StencilKind::Moment(p) => (0..grid.dim())
            .flat_map(|i| axis_terms(i, StencilKind::Moment(p)))
            .collect(),
        k => axis_terms(k.axis().expect("axis-specific stencil"), k),
    }
}

/// Applies a stencil at `idx` using the values stored in `u`.
///
/// Ghost values are read from `u` when present; a neighbor that is neither a
/// real node nor a stored ghost gives [`Error::StencilOutOfDomain`].
pub fn apply_stencil(kind: StencilKind, u: &GridFunction, idx: &MultiIndex) -> Result<f64> {
    let grid = u.grid();
    kind.validate(grid)?;
    if idx.dim() != grid.dim() {
        return Err(Error::DimensionMismatch {
            expected: grid.dim(),
            found: idx.dim(),
        });
    }
    let mut acc = 0.0;
    for (axis, off, w) in stencil_offsets(kind, grid) {
        let n = idx.shifted(axis, off);
        let v = u.get(&n).ok_or_else(|| Error::StencilOutOfDomain {
            missing: n.comps().to_vec(),
        })?;
        acc += w * v;
    }
    Ok(acc)
}

/// Expresses node `idx + off·e_axis` as a combination of real nodes.
///
/// Real nodes map to themselves. A ghost node is replaced through its closure
/// (`closure` must be given); under `neumann`, a boundary neighbor along
/// `axis` is replaced by the row node `row` itself.
#[allow(clippy::too_many_arguments)]
pub(crate) fn resolve_neighbor(
    grid: &Grid,
    idx: &MultiIndex,
    axis: usize,
    off: i64,
    closure: Option<AuxiliaryBc>,
    neumann: bool,
    out: &mut Vec<(usize, f64)>,
    weight: f64,
) -> Result<()> {
    let n = idx.shifted(axis, off);
    let j = grid.nodes_per_dim()[axis] as i64;
    let c = n.get(axis);
    if (1..=j).contains(&c) {
        if neumann && (c == 1 || c == j) && off != 0 {
            out.push((grid.linear_index(idx).expect("row node"), weight));
        } else {
            out.push((grid.linear_index(&n).expect("real node"), weight));
        }
        return Ok(());
    }
    let bc = match (closure, c == 0 || c == j + 1) {
        (Some(bc), true) => bc,
        _ => {
            return Err(Error::StencilOutOfDomain {
                missing: n.comps().to_vec(),
            })
        }
    };
    // boundary node and the first two nodes inward from it
    let (b, step) = if c == 0 { (1, 1) } else { (j, -1) };
    let at = |k: i64| {
        let mut m = n;
        m = m.shifted(axis, k - c);
        grid.linear_index(&m).expect("closure node on grid")
    };
    for (node, coeff) in bc.coefficients().iter().enumerate() {
        if *coeff != 0.0 {
            out.push((at(b + step * node as i64), weight * coeff));
        }
    }
    Ok(())
}

/// Row of `kind` at real node `k`, resolved onto real nodes.
pub(crate) fn stencil_row(
    grid: &Grid,
    kind: StencilKind,
    k: usize,
    closure: Option<AuxiliaryBc>,
    neumann: bool,
    out: &mut Vec<(usize, f64)>,
) -> Result<()> {
    let idx = grid.multi_index(k);
    for (axis, off, w) in stencil_offsets(kind, grid) {
        resolve_neighbor(grid, &idx, axis, off, closure, neumann, out, w)?;
    }
    Ok(())
}

/// Assembles `kind` over the interior rows of `grid`.
///
/// `Moment` uses the first auxiliary closure for its ghost values under
/// `DirichletRows`; use [`moment_matrix`] to choose the closure.
pub fn assemble(
    kind: StencilKind,
    grid: &Grid,
    treatment: BoundaryTreatment,
) -> Result<SparseOperator> {
    kind.validate(grid)?;
    let closure = match (kind, treatment) {
        (StencilKind::Moment(_), BoundaryTreatment::DirichletRows) => Some(AuxiliaryBc::Bc1),
        (StencilKind::Moment(_), t) => {
            return Err(Error::Configuration(format!(
                "moment assembly needs an auxiliary boundary closure; {t:?} is not supported"
            )))
        }
        (StencilKind::Second(_), BoundaryTreatment::NeumannRows) => None,
        (_, BoundaryTreatment::NeumannRows) => {
            return Err(Error::Configuration(format!(
                "Neumann rows are only defined for Second, not {kind:?}"
            )))
        }
        _ => None,
    };
    let sign = kind.assembled_sign();
    let provenance = Provenance::Stencil { kind, treatment };
    assemble_rows(grid, treatment, provenance, |k, out| {
        let start = out.len();
        stencil_row(
            grid,
            kind,
            k,
            closure,
            treatment == BoundaryTreatment::NeumannRows,
            out,
        )?;
        out[start..].iter_mut().for_each(|e| e.1 *= sign);
        Ok(())
    })
}

/// Numerical moment matrix `Σᵢ hᵢᵖ(δ²_{2h} − δ²_h)` on interior nodes with the
/// given auxiliary closure substituted for ghost values.
pub fn moment_matrix(grid: &Grid, p: f64, bc: AuxiliaryBc) -> Result<SparseOperator> {
    let kind = StencilKind::Moment(p);
    kind.validate(grid)?;
    bc.check_grid(grid)?;
    assemble_rows(
        grid,
        BoundaryTreatment::DirichletRows,
        Provenance::Moment { p, closure: bc },
        |k, out| stencil_row(grid, kind, k, Some(bc), false, out),
    )
}

/// Shared row loop: `row_fn` pushes `(real node, coefficient)` pairs for the
/// interior node it is given; columns are then mapped per `treatment`.
pub(crate) fn assemble_rows(
    grid: &Grid,
    treatment: BoundaryTreatment,
    provenance: Provenance,
    mut row_fn: impl FnMut(usize, &mut Vec<(usize, f64)>) -> Result<()>,
) -> Result<SparseOperator> {
    let rows = grid.interior_nodes();
    let keep_boundary = treatment == BoundaryTreatment::None;
    let cols: Vec<usize> = if keep_boundary {
        (0..grid.num_nodes()).collect()
    } else {
        rows.clone()
    };
    let col_of = column_map(grid, keep_boundary);
    let mut triplets = Vec::with_capacity(rows.len() * 5 * grid.dim());
    let mut buf = Vec::with_capacity(16);
    for (r, &k) in rows.iter().enumerate() {
        buf.clear();
        row_fn(k, &mut buf)?;
        for &(node, w) in &buf {
            if let Some(c) = col_of[node] {
                triplets.push((r, c, w));
            }
        }
    }
    Ok(SparseOperator::from_triplets(
        rows.len(),
        cols.len(),
        triplets,
        rows,
        cols,
        provenance,
    ))
}

/// Maps a real node to its column: all nodes, or interior nodes only.
pub(crate) fn column_map(grid: &Grid, all_nodes: bool) -> Vec<Option<usize>> {
    let mut next = 0;
    (0..grid.num_nodes())
        .map(|k| {
            if all_nodes || !grid.is_boundary_node(k) {
                next += 1;
                Some(next - 1)
            } else {
                None
            }
        })
        .collect()
}
