//! Compressed-row sparse operators and a banded LU factorization.

use std::fmt;
use std::io::Write;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::operators::{BoundaryTreatment, StencilKind};

/// Where an assembled operator came from.
#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    Stencil {
        kind: StencilKind,
        treatment: BoundaryTreatment,
    },
    Moment {
        p: f64,
        closure: crate::schemes::AuxiliaryBc,
    },
    Scheme(String),
    Other(String),
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Stencil { kind, treatment } => write!(f, "{kind:?} / {treatment:?}"),
            Provenance::Moment { p, closure } => write!(f, "Moment(p={p}) / {closure:?}"),
            Provenance::Scheme(s) | Provenance::Other(s) => f.write_str(s),
        }
    }
}

/// Sparse matrix in compressed-row form over an explicit node ordering.
///
/// `row_nodes[r]` and `col_nodes[c]` give the grid linear index that row `r`
/// and column `c` stand for. Entries are consolidated: no duplicate
/// coordinates, columns sorted within each row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    row_nodes: Vec<usize>,
    col_nodes: Vec<usize>,
    provenance: Provenance,
}

impl SparseOperator {
    /// Builds from unsorted triplets, summing duplicates and dropping exact zeros.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        mut triplets: Vec<(usize, usize, f64)>,
        row_nodes: Vec<usize>,
        col_nodes: Vec<usize>,
        provenance: Provenance,
    ) -> Self {
        assert_eq!(row_nodes.len(), nrows);
        assert_eq!(col_nodes.len(), ncols);
        triplets.sort_by_key(|a| (a.0, a.1));
        let mut row_ptr = vec![0; nrows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        let mut rows_of = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            assert!(
                r < nrows && c < ncols,
                "triplet ({r},{c}) outside {nrows}x{ncols}"
            );
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                rows_of.push(r);
                last = Some((r, c));
            }
        }
        let keep: Vec<bool> = values.iter().map(|&v| v != 0.0).collect();
        let mut ci = Vec::with_capacity(col_idx.len());
        let mut vi = Vec::with_capacity(values.len());
        for (k, &kept) in keep.iter().enumerate() {
            if kept {
                row_ptr[rows_of[k] + 1] += 1;
                ci.push(col_idx[k]);
                vi.push(values[k]);
            }
        }
        for r in 0..nrows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self {
            nrows,
            ncols,
            row_ptr,
            col_idx: ci,
            values: vi,
            row_nodes,
            col_nodes,
            provenance,
        }
    }

    /// Square operator whose rows and columns share one node ordering.
    pub fn square(
        n: usize,
        triplets: Vec<(usize, usize, f64)>,
        nodes: Vec<usize>,
        provenance: Provenance,
    ) -> Self {
        Self::from_triplets(n, n, triplets, nodes.clone(), nodes, provenance)
    }

    pub fn identity(nodes: Vec<usize>) -> Self {
        let n = nodes.len();
        let t = (0..n).map(|i| (i, i, 1.0)).collect();
        Self::square(n, t, nodes, Provenance::Other("identity".into()))
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_nodes(&self) -> &[usize] {
        &self.row_nodes
    }

    pub fn col_nodes(&self) -> &[usize] {
        &self.col_nodes
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    /// `(column, value)` pairs of row `r`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    /// All stored `(row, col, value)` entries in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.row(r).find(|&(cc, _)| cc == c).map_or(0.0, |(_, v)| v)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .map(|r| self.row(r).map(|(c, v)| v * x[c]).sum())
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let t = self.triplets().map(|(r, c, v)| (c, r, v)).collect();
        Self::from_triplets(
            self.ncols,
            self.nrows,
            t,
            self.col_nodes.clone(),
            self.row_nodes.clone(),
            self.provenance.clone(),
        )
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// `self + s * other`; both operators must share shape and ordering.
    pub fn add_scaled(&self, s: f64, other: &Self) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let t = self
            .triplets()
            .chain(other.triplets().map(|(r, c, v)| (r, c, s * v)))
            .collect();
        Self::from_triplets(
            self.nrows,
            self.ncols,
            t,
            self.row_nodes.clone(),
            self.col_nodes.clone(),
            self.provenance.clone(),
        )
    }

    /// `Σ_t s_t · diag(w_t) · A_t` over operators sharing shape and ordering.
    ///
    /// `w_t`, when given, scales row `r` of `A_t` by `w_t[r]`.
    pub fn combine(
        terms: &[(f64, Option<&[f64]>, &SparseOperator)],
        provenance: Provenance,
    ) -> Self {
        let first = terms.first().expect("at least one term").2;
        let mut t = Vec::with_capacity(terms.iter().map(|x| x.2.nnz()).sum());
        for &(s, w, a) in terms {
            assert_eq!((a.nrows, a.ncols), (first.nrows, first.ncols));
            if s == 0.0 {
                continue;
            }
            for r in 0..a.nrows {
                let wr = w.map_or(1.0, |w| w[r]) * s;
                if wr != 0.0 {
                    t.extend(a.row(r).map(|(c, v)| (r, c, wr * v)));
                }
            }
        }
        Self::from_triplets(
            first.nrows,
            first.ncols,
            t,
            first.row_nodes.clone(),
            first.col_nodes.clone(),
            provenance,
        )
    }

    /// Keeps the columns with `map[c] = Some(new)`, renumbered to `new`.
    pub fn select_columns(&self, map: &[Option<usize>], col_nodes: Vec<usize>) -> Self {
        assert_eq!(map.len(), self.ncols);
        let t = self
            .triplets()
            .filter_map(|(r, c, v)| map[c].map(|nc| (r, nc, v)))
            .collect();
        Self::from_triplets(
            self.nrows,
            col_nodes.len(),
            t,
            self.row_nodes.clone(),
            col_nodes,
            self.provenance.clone(),
        )
    }

    /// Sparse product `self * other`.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.ncols, other.nrows);
        let mut t = Vec::new();
        for r in 0..self.nrows {
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    t.push((r, c, a * b));
                }
            }
        }
        Self::from_triplets(
            self.nrows,
            other.ncols,
            t,
            self.row_nodes.clone(),
            other.col_nodes.clone(),
            Provenance::Other("product".into()),
        )
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for (r, c, v) in self.triplets() {
            m[(r, c)] += v;
        }
        m
    }

    /// Lower and upper bandwidths of the stored pattern.
    pub fn bandwidths(&self) -> (usize, usize) {
        let mut kl = 0;
        let mut ku = 0;
        for (r, c, _) in self.triplets() {
            if c < r {
                kl = kl.max(r - c);
            } else {
                ku = ku.max(c - r);
            }
        }
        (kl, ku)
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.nrows)
            .map(|r| self.row(r).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Writes `row col value` lines (0-based, 17 significant digits).
    pub fn write_coordinate<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "# {} x {} nnz {} ({})",
            self.nrows,
            self.ncols,
            self.nnz(),
            self.provenance
        )?;
        for (r, c, v) in self.triplets() {
            writeln!(w, "{r} {c} {v:.16e}")?;
        }
        Ok(())
    }
}

/// LU factorization with partial pivoting of a banded matrix.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    width: usize,
    ku_fill: usize,
    band: Vec<f64>,
    pivots: Vec<usize>,
    min_pivot: f64,
    max_pivot: f64,
}

impl BandedLu {
    /// Factors a square sparse operator.
    ///
    /// A pivot no larger than `n * eps * ||A||_inf` is treated as zero and
    /// reported as a singular system.
    pub fn factor(a: &SparseOperator) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch {
                expected: a.nrows(),
                found: a.ncols(),
            });
        }
        let n = a.nrows();
        let (kl, ku) = a.bandwidths();
        let ku_fill = ku + kl;
        let width = kl + ku_fill + 1;
        let mut band = vec![0.0; n * width];
        for (r, c, v) in a.triplets() {
            band[r * width + (c + kl - r)] += v;
        }
        let mut lu = Self {
            n,
            kl,
            width,
            ku_fill,
            band,
            pivots: vec![0; n],
            min_pivot: f64::INFINITY,
            max_pivot: 0.0,
        };
        let tol = n.max(1) as f64 * f64::EPSILON * a.norm_inf();
        let mut tiny = 0;
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let last_col = (k + ku_fill).min(n - 1);
            let mut p = k;
            let mut best = lu.at(k, k).abs();
            for i in k + 1..=last_row {
                let v = lu.at(i, k).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            lu.pivots[k] = p;
            lu.min_pivot = lu.min_pivot.min(best);
            lu.max_pivot = lu.max_pivot.max(best);
            if best <= tol {
                tiny += 1;
                continue;
            }
            if p != k {
                for j in k..=last_col {
                    let (ik, ip) = (lu.pos(k, j), lu.pos(p, j));
                    lu.band.swap(ik, ip);
                }
            }
            let pivot = lu.at(k, k);
            for i in k + 1..=last_row {
                let l = lu.at(i, k) / pivot;
                let ik = lu.pos(i, k);
                lu.band[ik] = l;
                if l != 0.0 {
                    for j in k + 1..=last_col {
                        let kj = lu.at(k, j);
                        let ij = lu.pos(i, j);
                        lu.band[ij] -= l * kj;
                    }
                }
            }
        }
        if tiny > 0 {
            return Err(Error::SingularSystem {
                rows: n,
                min_pivot: lu.min_pivot,
                pivot_ratio: lu.pivot_ratio(),
                tiny_pivots: tiny,
            });
        }
        Ok(lu)
    }

    #[inline]
    fn pos(&self, i: usize, j: usize) -> usize {
        i * self.width + (j + self.kl - i)
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.band[self.pos(i, j)]
    }

    /// Ratio of the smallest to the largest pivot magnitude, a cheap conditioning hint.
    pub fn pivot_ratio(&self) -> f64 {
        if self.max_pivot > 0.0 {
            self.min_pivot / self.max_pivot
        } else {
            0.0
        }
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        assert_eq!(rhs.len(), self.n);
        let n = self.n;
        let mut x = rhs.to_vec();
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                x.swap(k, p);
            }
            let xk = x[k];
            if xk != 0.0 {
                for i in k + 1..=(k + self.kl).min(n.saturating_sub(1)) {
                    x[i] -= self.at(i, k) * xk;
                }
            }
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..=(i + self.ku_fill).min(n - 1) {
                s -= self.at(i, j) * x[j];
            }
            x[i] = s / self.at(i, i);
        }
        x
    }
}

/// Solves `A x = b` with a banded LU factorization.
///
/// Fails with [`Error::SingularSystem`] when a pivot vanishes to working
/// precision. A residual above `1e-10 (1 + ||b||_inf)` is logged together
/// with the pivot ratio; the solution is still returned, since strongly
/// convection-dominated systems legitimately reach that regime.
pub fn solve_direct(a: &SparseOperator, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != a.nrows() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: b.len(),
        });
    }
    let lu = BandedLu::factor(a)?;
    let x = lu.solve(b);
    let r = a.mul_vec(&x);
    let res = r
        .iter()
        .zip(b)
        .map(|(ri, bi)| (ri - bi).abs())
        .fold(0.0, f64::max);
    let bnorm = b.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if !(res <= 1e-10 * (1.0 + bnorm)) {
        log::warn!(
            "direct solve residual {res:.3e} exceeds 1e-10(1+|b|); pivot ratio {:.3e}",
            lu.pivot_ratio()
        );
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri(n: usize, lo: f64, d: f64, up: f64) -> SparseOperator {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, d));
            if i > 0 {
                t.push((i, i - 1, lo));
            }
            if i + 1 < n {
                t.push((i, i + 1, up));
            }
        }
        SparseOperator::square(n, t, (0..n).collect(), Provenance::Other("tri".into()))
    }

    #[test]
    fn identity_returns_rhs() {
        let a = SparseOperator::identity((0..4).collect());
        let b = vec![1.0, -2.0, 3.5, 0.25];
        assert_eq!(solve_direct(&a, &b).unwrap(), b);
    }

    #[test]
    fn duplicates_are_summed_and_zeros_dropped() {
        let t = vec![
            (0, 0, 1.0),
            (0, 0, 2.0),
            (1, 0, 1.0),
            (1, 0, -1.0),
            (1, 1, 4.0),
        ];
        let a = SparseOperator::square(2, t, vec![0, 1], Provenance::Other("t".into()));
        assert_eq!(a.nnz(), 2);
        assert_eq!(a.get(0, 0), 3.0);
        assert_eq!(a.get(1, 0), 0.0);
    }

    #[test]
    fn banded_lu_matches_dense_solve_with_pivoting() {
        // zero diagonal forces row interchanges
        let a = tri(6, -1.0, 0.0, 2.0).add_scaled(1.0, &tri(6, 0.0, 1e-3, 0.0));
        let b: Vec<f64> = (0..6).map(|i| (i as f64).sin() + 1.0).collect();
        let x = solve_direct(&a, &b).unwrap();
        let dense = a
            .to_dense()
            .lu()
            .solve(&nalgebra::DVector::from_vec(b))
            .unwrap();
        for i in 0..6 {
            assert!((x[i] - dense[i]).abs() < 1e-10 * (1.0 + dense[i].abs()));
        }
    }

    #[test]
    fn odd_skew_tridiagonal_is_singular() {
        let a = tri(5, -3.0, 0.0, 3.0);
        let err = solve_direct(&a, &[1.0; 5]).unwrap_err();
        assert!(matches!(err, Error::SingularSystem { rows: 5, .. }));
        let even = tri(4, -3.0, 0.0, 3.0);
        assert!(solve_direct(&even, &[1.0; 4]).is_ok());
    }

    #[test]
    fn coordinate_dump_has_full_precision() {
        let a = tri(2, -1.0 / 3.0, 2.0, 0.1);
        let mut buf = Vec::new();
        a.write_coordinate(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let line = text.lines().find(|l| l.starts_with("1 0 ")).unwrap();
        let v: f64 = line.split_whitespace().nth(2).unwrap().parse().unwrap();
        assert_eq!(v, -1.0 / 3.0);
    }
}
