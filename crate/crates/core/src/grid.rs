//! Uniform tensor-product grids on d-rectangles (d = 1 or 2).
//!
//! Node multi-indices are 1-based per dimension, so a real node has
//! `1 <= alpha[i] <= J[i]` and a ghost sits exactly one step outside
//! (`alpha[i] == 0` or `alpha[i] == J[i] + 1`). Axes are 0-based.
//!
//! Real nodes are stored lexicographically with dimension 1 fastest. Ghost
//! nodes are appended after the real nodes, ordered by (axis, side, in-face
//! lexicographic position). Ghosts exist only outward from boundary nodes
//! that have an interior neighbor along the same axis; rectangle corners
//! generate none.

use crate::error::{Error, Result};

/// Largest spatial dimension supported.
pub const MAX_DIM: usize = 2;

/// The open box `(lower[0], upper[0]) x ... x (lower[d-1], upper[d-1])`.
#[derive(Debug, Clone, PartialEq)]
pub struct DRectangle {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl DRectangle {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                found: upper.len(),
            });
        }
        if lower.is_empty() || lower.len() > MAX_DIM {
            return Err(Error::InvalidGrid(format!(
                "dimension {} not supported (1 <= d <= {MAX_DIM})",
                lower.len()
            )));
        }
        for (i, (a, b)) in lower.iter().zip(&upper).enumerate() {
            if !(a.is_finite() && b.is_finite() && b > a) {
                return Err(Error::InvalidGrid(format!(
                    "axis {i}: need finite bounds with upper > lower, got [{a}, {b}]"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The interval `(a, b)`.
    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Self::new(vec![a], vec![b])
    }

    /// The unit box `(0,1)^d`.
    pub fn unit(d: usize) -> Result<Self> {
        Self::new(vec![0.0; d], vec![1.0; d])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }
}

/// A grid multi-index. Components are 1-based; unused trailing components are 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    comps: [i64; MAX_DIM],
    dim: usize,
}

impl MultiIndex {
    pub fn new(comps: &[i64]) -> Self {
        assert!(
            !comps.is_empty() && comps.len() <= MAX_DIM,
            "multi-index dimension must be 1 or 2"
        );
        let mut c = [1; MAX_DIM];
        c[..comps.len()].copy_from_slice(comps);
        Self {
            comps: c,
            dim: comps.len(),
        }
    }

    pub fn d1(i: i64) -> Self {
        Self::new(&[i])
    }

    pub fn d2(i: i64, j: i64) -> Self {
        Self::new(&[i, j])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn comps(&self) -> &[i64] {
        &self.comps[..self.dim]
    }

    pub fn get(&self, axis: usize) -> i64 {
        self.comps[axis]
    }

    /// `alpha + k e_axis`.
    pub fn shifted(&self, axis: usize, k: i64) -> Self {
        let mut out = *self;
        out.comps[axis] += k;
        out
    }
}

/// Classification of a multi-index relative to the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeClass {
    /// Interior node whose axis neighbors are all interior.
    DeepInterior,
    /// Interior node with at least one axis neighbor on the boundary.
    NearBoundaryInterior,
    /// Boundary node; `s_flags[i]` is set when an axis-`i` neighbor is interior.
    Boundary { s_flags: [bool; MAX_DIM] },
    /// Node one step outside the boundary, outward from a flagged boundary node.
    Ghost,
}

/// Location of one ghost node together with the real nodes its closure uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ghost {
    pub index: MultiIndex,
    pub axis: usize,
    /// `false` for the lower face, `true` for the upper face.
    pub upper_side: bool,
    /// Linear index of the boundary node the ghost is attached to.
    pub boundary: usize,
    /// Linear indices of the first and second nodes inward from `boundary`.
    pub inward: [usize; 2],
}

/// Uniform tensor-product grid over a [`DRectangle`].
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    domain: DRectangle,
    nodes_per_dim: Vec<usize>,
    spacings: Vec<f64>,
    h_max: f64,
    h_min: f64,
    strides: Vec<usize>,
    ghost_offsets: Vec<[usize; 2]>,
    ghost_count: usize,
}

impl Grid {
    pub fn new(domain: DRectangle, nodes_per_dim: &[usize]) -> Result<Self> {
        let d = domain.dim();
        if nodes_per_dim.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: nodes_per_dim.len(),
            });
        }
        if let Some(&j) = nodes_per_dim.iter().find(|&&j| j < 3) {
            return Err(Error::InvalidGrid(format!(
                "each dimension needs at least 3 nodes, got {j}"
            )));
        }
        let spacings: Vec<f64> = (0..d)
            .map(|i| (domain.upper[i] - domain.lower[i]) / (nodes_per_dim[i] - 1) as f64)
            .collect();
        let h_max = spacings.iter().copied().fold(f64::MIN, f64::max);
        let h_min = spacings.iter().copied().fold(f64::MAX, f64::min);
        let mut strides = vec![1; d];
        for i in 1..d {
            strides[i] = strides[i - 1] * nodes_per_dim[i - 1];
        }
        let mut ghost_offsets = vec![[0; 2]; d];
        let mut offset = 0;
        for (i, slot) in ghost_offsets.iter_mut().enumerate() {
            let per_face: usize = (0..d)
                .filter(|&j| j != i)
                .map(|j| nodes_per_dim[j] - 2)
                .product();
            slot[0] = offset;
            slot[1] = offset + per_face;
            offset += 2 * per_face;
        }
        Ok(Self {
            domain,
            nodes_per_dim: nodes_per_dim.to_vec(),
            spacings,
            h_max,
            h_min,
            strides,
            ghost_offsets,
            ghost_count: offset,
        })
    }

    /// Uniform grid on `(a, b)` with `n` nodes.
    pub fn uniform_1d(a: f64, b: f64, n: usize) -> Result<Self> {
        Self::new(DRectangle::interval(a, b)?, &[n])
    }

    /// Grid on `(0,1)^2` with `n` nodes in each direction.
    pub fn unit_square(n: usize) -> Result<Self> {
        Self::new(DRectangle::unit(2)?, &[n, n])
    }

    pub fn domain(&self) -> &DRectangle {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn nodes_per_dim(&self) -> &[usize] {
        &self.nodes_per_dim
    }

    pub fn spacings(&self) -> &[f64] {
        &self.spacings
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.spacings[axis]
    }

    pub fn h_max(&self) -> f64 {
        self.h_max
    }

    pub fn h_min(&self) -> f64 {
        self.h_min
    }

    /// Total number of real nodes, `J = prod J_i`.
    pub fn num_nodes(&self) -> usize {
        self.nodes_per_dim.iter().product()
    }

    pub fn num_ghosts(&self) -> usize {
        self.ghost_count
    }

    pub fn num_interior(&self) -> usize {
        self.nodes_per_dim.iter().map(|j| j - 2).product()
    }

    /// Linear stride of axis `i` in the real-node ordering.
    pub fn stride(&self, axis: usize) -> usize {
        self.strides[axis]
    }

    /// Node coordinate `a_i + (alpha_i - 1) h_i`; ghosts are allowed.
    pub fn coordinate(&self, idx: &MultiIndex) -> [f64; MAX_DIM] {
        let mut x = [0.0; MAX_DIM];
        for (i, xi) in x.iter_mut().enumerate().take(self.dim()) {
            *xi = self.spacings[i].mul_add((idx.get(i) - 1) as f64, self.domain.lower[i]);
        }
        x
    }

    /// Coordinate of the real node with linear index `k`.
    pub fn node_point(&self, k: usize) -> [f64; MAX_DIM] {
        self.coordinate(&self.multi_index(k))
    }

    /// Nearest real node to `x`, if `x` lies on the grid within half a spacing.
    pub fn index_of(&self, x: &[f64]) -> Option<MultiIndex> {
        if x.len() != self.dim() {
            return None;
        }
        let mut comps = [1i64; MAX_DIM];
        for i in 0..self.dim() {
            let t = (x[i] - self.domain.lower[i]) / self.spacings[i];
            let k = t.round();
            if (t - k).abs() > 0.5 || k < 0.0 || k as usize >= self.nodes_per_dim[i] {
                return None;
            }
            comps[i] = k as i64 + 1;
        }
        Some(MultiIndex::new(&comps[..self.dim()]))
    }

    pub fn is_real(&self, idx: &MultiIndex) -> bool {
        (0..self.dim()).all(|i| idx.get(i) >= 1 && idx.get(i) <= self.nodes_per_dim[i] as i64)
    }

    /// Linear index of a real node.
    pub fn linear_index(&self, idx: &MultiIndex) -> Option<usize> {
        if idx.dim() != self.dim() || !self.is_real(idx) {
            return None;
        }
        Some(
            (0..self.dim())
                .map(|i| (idx.get(i) - 1) as usize * self.strides[i])
                .sum(),
        )
    }

    pub fn multi_index(&self, k: usize) -> MultiIndex {
        let mut comps = [1i64; MAX_DIM];
        let mut rem = k;
        for i in 0..self.dim() {
            comps[i] = (rem % self.nodes_per_dim[i]) as i64 + 1;
            rem /= self.nodes_per_dim[i];
        }
        MultiIndex::new(&comps[..self.dim()])
    }

    fn in_interior_range(&self, idx: &MultiIndex, axis: usize) -> bool {
        let a = idx.get(axis);
        a >= 2 && a < self.nodes_per_dim[axis] as i64
    }

    pub fn is_interior(&self, idx: &MultiIndex) -> bool {
        (0..self.dim()).all(|i| self.in_interior_range(idx, i))
    }

    /// True when real node `k` lies on the boundary.
    pub fn is_boundary_node(&self, k: usize) -> bool {
        !self.is_interior(&self.multi_index(k))
    }

    /// Linear indices of the interior nodes, in grid order.
    pub fn interior_nodes(&self) -> Vec<usize> {
        (0..self.num_nodes())
            .filter(|&k| !self.is_boundary_node(k))
            .collect()
    }

    /// Linear indices of the boundary nodes, in grid order.
    pub fn boundary_nodes(&self) -> Vec<usize> {
        (0..self.num_nodes())
            .filter(|&k| self.is_boundary_node(k))
            .collect()
    }

    pub fn classify(&self, idx: &MultiIndex) -> Result<NodeClass> {
        let out_of_range = || Error::OutOfRange {
            index: idx.comps().to_vec(),
            nodes: self.nodes_per_dim.clone(),
        };
        if idx.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: idx.dim(),
            });
        }
        for i in 0..self.dim() {
            let a = idx.get(i);
            if a < 0 || a > self.nodes_per_dim[i] as i64 + 1 {
                return Err(out_of_range());
            }
        }
        if !self.is_real(idx) {
            return match self.ghost_slot(idx) {
                Some(_) => Ok(NodeClass::Ghost),
                None => Err(out_of_range()),
            };
        }
        if self.is_interior(idx) {
            let deep = (0..self.dim()).all(|i| {
                let a = idx.get(i);
                a >= 3 && a <= self.nodes_per_dim[i] as i64 - 2
            });
            return Ok(if deep {
                NodeClass::DeepInterior
            } else {
                NodeClass::NearBoundaryInterior
            });
        }
        let mut s_flags = [false; MAX_DIM];
        for (i, flag) in s_flags.iter_mut().enumerate().take(self.dim()) {
            *flag = [1, -1].iter().any(|&k| {
                let n = idx.shifted(i, k);
                self.is_real(&n) && self.is_interior(&n)
            });
        }
        Ok(NodeClass::Boundary { s_flags })
    }

    /// Position of a ghost in the appended ghost block, if `idx` is a ghost.
    pub fn ghost_slot(&self, idx: &MultiIndex) -> Option<usize> {
        if idx.dim() != self.dim() {
            return None;
        }
        let mut outside = None;
        for i in 0..self.dim() {
            let a = idx.get(i);
            let j = self.nodes_per_dim[i] as i64;
            if a == 0 || a == j + 1 {
                if outside.is_some() {
                    return None;
                }
                outside = Some((i, a != 0));
            } else if a < 1 || a > j {
                return None;
            }
        }
        let (axis, upper) = outside?;
        let mut pos = 0;
        let mut mult = 1;
        for j in (0..self.dim()).filter(|&j| j != axis) {
            if !self.in_interior_range(idx, j) {
                return None;
            }
            pos += (idx.get(j) - 2) as usize * mult;
            mult *= self.nodes_per_dim[j] - 2;
        }
        Some(self.ghost_offsets[axis][upper as usize] + pos)
    }

    /// All ghost nodes in storage order.
    pub fn enumerate_ghosts(&self) -> Vec<Ghost> {
        let d = self.dim();
        let mut out = Vec::with_capacity(self.ghost_count);
        for axis in 0..d {
            let j_axis = self.nodes_per_dim[axis] as i64;
            for upper_side in [false, true] {
                let (ghost_c, bnd_c, step) = if upper_side {
                    (j_axis + 1, j_axis, -1)
                } else {
                    (0, 1, 1)
                };
                let face: Vec<usize> = (0..d).filter(|&j| j != axis).collect();
                let face_count: usize = face.iter().map(|&j| self.nodes_per_dim[j] - 2).product();
                for pos in 0..face_count {
                    let mut comps = [1i64; MAX_DIM];
                    let mut rem = pos;
                    for &j in &face {
                        let n = self.nodes_per_dim[j] - 2;
                        comps[j] = (rem % n) as i64 + 2;
                        rem /= n;
                    }
                    comps[axis] = ghost_c;
                    let index = MultiIndex::new(&comps[..d]);
                    let b = index.shifted(axis, bnd_c - ghost_c);
                    // on a 3-node axis the second inward node is the opposite boundary node
                    let lin = |m: MultiIndex| self.linear_index(&m).expect("inward node on grid");
                    out.push(Ghost {
                        index,
                        axis,
                        upper_side,
                        boundary: lin(b),
                        inward: [lin(b.shifted(axis, step)), lin(b.shifted(axis, 2 * step))],
                    });
                }
            }
        }
        out
    }
}

/// Real values over the grid nodes, optionally followed by ghost values.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
    has_ghosts: bool,
}

impl GridFunction {
    pub fn zeros(grid: &Grid) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![0.0; grid.num_nodes()],
            has_ghosts: false,
        }
    }

    /// Samples `f` at every real node.
    pub fn from_fn(grid: &Grid, f: impl Fn(&[f64]) -> f64) -> Self {
        let d = grid.dim();
        let values = (0..grid.num_nodes())
            .map(|k| f(&grid.node_point(k)[..d]))
            .collect();
        Self {
            grid: grid.clone(),
            values,
            has_ghosts: false,
        }
    }

    /// Wraps values for the real nodes (length `J`) or real plus ghost nodes (length `J'`).
    pub fn from_values(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        let j = grid.num_nodes();
        let has_ghosts = if values.len() == j {
            false
        } else if values.len() == j + grid.num_ghosts() {
            true
        } else {
            return Err(Error::DimensionMismatch {
                expected: j,
                found: values.len(),
            });
        };
        Ok(Self {
            grid: grid.clone(),
            values,
            has_ghosts,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn has_ghosts(&self) -> bool {
        self.has_ghosts
    }

    /// All stored values (real nodes, then ghosts when present).
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn real_values(&self) -> &[f64] {
        &self.values[..self.grid.num_nodes()]
    }

    pub fn real_values_mut(&mut self) -> &mut [f64] {
        let j = self.grid.num_nodes();
        &mut self.values[..j]
    }

    pub fn ghost_values(&self) -> &[f64] {
        if self.has_ghosts {
            &self.values[self.grid.num_nodes()..]
        } else {
            &[]
        }
    }

    /// Drops any ghost block.
    pub fn into_real(mut self) -> Self {
        self.values.truncate(self.grid.num_nodes());
        self.has_ghosts = false;
        self
    }

    /// Appends a zero ghost block if none is present.
    pub fn ensure_ghosts(&mut self) {
        if !self.has_ghosts {
            self.values
                .resize(self.grid.num_nodes() + self.grid.num_ghosts(), 0.0);
            self.has_ghosts = true;
        }
    }

    /// Value at a real node or, when ghosts are stored, a ghost node.
    pub fn get(&self, idx: &MultiIndex) -> Option<f64> {
        if let Some(k) = self.grid.linear_index(idx) {
            return Some(self.values[k]);
        }
        if self.has_ghosts {
            let slot = self.grid.ghost_slot(idx)?;
            return Some(self.values[self.grid.num_nodes() + slot]);
        }
        None
    }
}
