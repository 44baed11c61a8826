//! Error norms, observed orders, matrix diagnostics and the characteristic-root
//! classifier of the 1D model scheme.

use std::fmt;

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::problems::{ExactSolution, Problem};
use crate::schemes::{SchemeConfig, SchemeEvaluator};
use crate::sparse::{BandedLu, SparseOperator};

/// Largest system for which dense diagnostics are computed.
pub const DENSE_LIMIT: usize = 2500;

/// Errors of one solve in a convergence sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRecord {
    pub h: f64,
    pub l2_weighted: f64,
    pub linf: f64,
    pub order_l2: Option<f64>,
    pub order_linf: Option<f64>,
}

/// `(Π hᵢ^{1/2}) ‖u − exact‖` over interior nodes.
pub fn weighted_l2_error(u: &GridFunction, exact: &ExactSolution, grid: &Grid) -> f64 {
    let w: f64 = grid.spacings().iter().map(|h| h.sqrt()).product();
    w * interior_errors(u, exact, grid)
        .map(|e| e * e)
        .sum::<f64>()
        .sqrt()
}

/// `max |u − exact|` over interior nodes.
pub fn linf_error(u: &GridFunction, exact: &ExactSolution, grid: &Grid) -> f64 {
    interior_errors(u, exact, grid)
        .map(f64::abs)
        .fold(0.0, f64::max)
}

fn interior_errors<'a>(
    u: &'a GridFunction,
    exact: &'a ExactSolution,
    grid: &'a Grid,
) -> impl Iterator<Item = f64> + 'a {
    let d = grid.dim();
    let vals = u.real_values();
    grid.interior_nodes()
        .into_iter()
        .map(move |k| vals[k] - exact.eval(&grid.node_point(k)[..d]))
}

/// Orders `log(e_{k−1}/e_k)/log(h_{k−1}/h_k)`; the first entry is `None`, and
/// so is any entry involving a nonpositive or non-finite error.
pub fn observed_orders(records: &[(f64, f64)]) -> Vec<Option<f64>> {
    let mut out = Vec::with_capacity(records.len());
    for k in 0..records.len() {
        if k == 0 {
            out.push(None);
            continue;
        }
        let (h0, e0) = records[k - 1];
        let (h1, e1) = records[k];
        let ok = |e: f64| e.is_finite() && e > 0.0;
        out.push(if ok(e0) && ok(e1) && h0 != h1 {
            Some((e0 / e1).ln() / (h0 / h1).ln())
        } else {
            None
        });
    }
    out
}

/// Builds records with both order columns from `(h, ℓ², ℓ∞)` triples.
pub fn error_records(rows: &[(f64, f64, f64)]) -> Vec<ErrorRecord> {
    let l2 = observed_orders(&rows.iter().map(|r| (r.0, r.1)).collect::<Vec<_>>());
    let li = observed_orders(&rows.iter().map(|r| (r.0, r.2)).collect::<Vec<_>>());
    rows.iter()
        .enumerate()
        .map(|(k, &(h, a, b))| ErrorRecord {
            h,
            l2_weighted: a,
            linf: b,
            order_l2: l2[k],
            order_linf: li[k],
        })
        .collect()
}

/// Structural and spectral facts about a square operator.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixDiagnostics {
    pub size: usize,
    pub symmetric: bool,
    pub antisymmetric: bool,
    /// Positive diagonal, nonpositive off-diagonal and (dense mode) nonnegative inverse.
    pub m_matrix: bool,
    /// Eigenvalues when symmetric, singular values otherwise.
    pub spectrum: SpectrumKind,
    pub min_eig: f64,
    pub max_eig: f64,
    pub rank_deficiency: usize,
    /// Set when values come from iterative estimates instead of dense factorizations.
    pub estimated: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumKind {
    Eigenvalues,
    SingularValues,
}

impl fmt::Display for MatrixDiagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.spectrum {
            SpectrumKind::Eigenvalues => "eigenvalue",
            SpectrumKind::SingularValues => "singular value",
        };
        writeln!(f, "size              {}", self.size)?;
        writeln!(f, "symmetric         {}", self.symmetric)?;
        writeln!(f, "antisymmetric     {}", self.antisymmetric)?;
        writeln!(f, "M-matrix          {}", self.m_matrix)?;
        writeln!(f, "min {what:<13} {:.6e}", self.min_eig)?;
        writeln!(f, "max {what:<13} {:.6e}", self.max_eig)?;
        writeln!(f, "rank deficiency   {}", self.rank_deficiency)?;
        write!(f, "estimated         {}", self.estimated)
    }
}

/// Flags at `1e−12` relative entrywise tolerance; eigenvalues (symmetric) or
/// singular values otherwise. Above [`DENSE_LIMIT`] rows, or when `estimate` is
/// set, extreme values come from power and inverse iteration.
pub fn matrix_diagnostics(a: &SparseOperator, estimate: bool) -> Result<MatrixDiagnostics> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: a.ncols(),
        });
    }
    let n = a.nrows();
    let scale = a.triplets().map(|t| t.2.abs()).fold(0.0, f64::max);
    let tol = 1e-12 * scale.max(f64::MIN_POSITIVE);
    let mut symmetric = true;
    let mut antisymmetric = true;
    for (r, c, v) in a.triplets() {
        let w = a.get(c, r);
        symmetric &= (v - w).abs() <= tol;
        antisymmetric &= (v + w).abs() <= tol;
    }
    let z_pattern = a
        .triplets()
        .all(|(r, c, v)| if r == c { v > 0.0 } else { v <= tol })
        && (0..n).all(|r| a.get(r, r) > 0.0);

    if n > DENSE_LIMIT || estimate {
        let (lo, hi) = estimate_extremes(a, symmetric)?;
        return Ok(MatrixDiagnostics {
            size: n,
            symmetric,
            antisymmetric,
            m_matrix: z_pattern && lo > 0.0,
            spectrum: if symmetric {
                SpectrumKind::Eigenvalues
            } else {
                SpectrumKind::SingularValues
            },
            min_eig: lo,
            max_eig: hi,
            rank_deficiency: usize::from(lo == 0.0),
            estimated: true,
        });
    }

    let dense = a.to_dense();
    let svd = dense.clone().svd(false, false);
    let smax = svd.singular_values.max();
    let rank_tol = n as f64 * f64::EPSILON * smax;
    let rank_deficiency = svd
        .singular_values
        .iter()
        .filter(|&&s| s <= rank_tol)
        .count();
    let (spectrum, min_eig, max_eig) = if symmetric {
        let e = dense.clone().symmetric_eigen().eigenvalues;
        (SpectrumKind::Eigenvalues, e.min(), e.max())
    } else {
        (
            SpectrumKind::SingularValues,
            svd.singular_values.min(),
            smax,
        )
    };
    let m_matrix = z_pattern
        && rank_deficiency == 0
        && dense
            .try_inverse()
            .is_some_and(|inv| inv.iter().all(|&v| v >= -1e-12 * inv.amax()));
    Ok(MatrixDiagnostics {
        size: n,
        symmetric,
        antisymmetric,
        m_matrix,
        spectrum,
        min_eig,
        max_eig,
        rank_deficiency,
        estimated: false,
    })
}

/// Power iteration for the largest and inverse iteration for the smallest
/// eigenvalue (symmetric) or singular value (otherwise). A singular factor
/// gives a smallest value of zero.
fn estimate_extremes(a: &SparseOperator, symmetric: bool) -> Result<(f64, f64)> {
    let n = a.nrows();
    let at = a.transpose();
    let normal = |x: &[f64]| -> Vec<f64> {
        if symmetric {
            a.mul_vec(x)
        } else {
            at.mul_vec(&a.mul_vec(x))
        }
    };
    let start: Vec<f64> = (0..n)
        .map(|i| 1.0 + ((i * 7919) % 13) as f64 / 13.0)
        .collect();
    let norm = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut x = start.clone();
    let mut hi = 0.0;
    for _ in 0..500 {
        let y = normal(&x);
        let ny = norm(&y);
        let nx = norm(&x);
        if ny == 0.0 {
            break;
        }
        let est = x.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>() / (nx * nx);
        x = y.iter().map(|v| v / ny).collect();
        if (est - hi).abs() <= 1e-10 * est.abs() {
            hi = est;
            break;
        }
        hi = est;
    }
    let lu = match BandedLu::factor(a) {
        Ok(lu) => lu,
        Err(Error::SingularSystem { .. }) => return Ok((0.0, finish(hi, symmetric))),
        Err(e) => return Err(e),
    };
    let lu_t = if symmetric {
        None
    } else {
        Some(BandedLu::factor(&at)?)
    };
    let mut x = start;
    let mut lo_inv = 0.0;
    for _ in 0..500 {
        let mut y = lu.solve(&x);
        if let Some(lt) = &lu_t {
            // (AᵀA)⁻¹ x = A⁻¹ A⁻ᵀ x
            y = lu.solve(&lt.solve(&x));
        }
        let nx = norm(&x);
        let ny = norm(&y);
        let est = x.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>() / (nx * nx);
        x = y.iter().map(|v| v / ny).collect();
        if (est - lo_inv).abs() <= 1e-10 * est.abs() {
            lo_inv = est;
            break;
        }
        lo_inv = est;
    }
    let lo = if lo_inv != 0.0 { 1.0 / lo_inv } else { 0.0 };
    Ok((finish(lo, symmetric), finish(hi, symmetric)))
}

fn finish(v: f64, symmetric: bool) -> f64 {
    if symmetric {
        v
    } else {
        v.max(0.0).sqrt()
    }
}

/// Qualitative behavior of the non-unit roots `r₂`, `r₃`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    TwoNegative,
    ComplexPair,
    TwoPositive,
    /// `γ = 0`: no moment, `η` drops to a quadratic.
    Degenerate,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::TwoNegative => "two negative roots",
            Regime::ComplexPair => "complex pair",
            Regime::TwoPositive => "two positive roots",
            Regime::Degenerate => "degenerate (no moment)",
        })
    }
}

/// Roots of `η(x) = Bx³ + (2h−4a−3B)x² + (4a+3B+2h)x − B` for the 1D scheme
/// with `b ≡ 1`, where `a = σh² + ε` and `B = γhᵖ`.
#[derive(Debug, Clone, PartialEq)]
pub struct RootRegime {
    pub a: f64,
    pub b: f64,
    pub h: f64,
    /// `(4a − 2h)/B`; `None` when `B = 0`.
    pub ratio: Option<f64>,
    /// `r₁ ∈ (0, 1)`, then `r₂`, `r₃` (two entries when `B = 0`).
    pub roots: Vec<Complex<f64>>,
    /// Classification from the exact roots.
    pub regime: Regime,
    /// Classification from the ratio thresholds −4 and 0.
    pub heuristic: Regime,
    /// Cubic discriminant of `η`.
    pub discriminant: f64,
    /// `η(1)`, equal to `4h` in exact arithmetic.
    pub eta_at_one: f64,
}

impl RootRegime {
    /// Coefficients `[c₃, c₂, c₁, c₀]` of `η`.
    pub fn coefficients(&self) -> [f64; 4] {
        eta_coefficients(self.a, self.b, self.h)
    }

    pub fn eta(&self, x: Complex<f64>) -> Complex<f64> {
        let [c3, c2, c1, c0] = self.coefficients();
        ((x * c3 + c2) * x + c1) * x + c0
    }
}

fn eta_coefficients(a: f64, b: f64, h: f64) -> [f64; 4] {
    [
        b,
        2.0 * h - 4.0 * a - 3.0 * b,
        4.0 * a + 3.0 * b + 2.0 * h,
        -b,
    ]
}

/// Discriminant of `c₃x³ + c₂x² + c₁x + c₀`.
pub fn cubic_discriminant([a, b, c, d]: [f64; 4]) -> f64 {
    18.0 * a * b * c * d - 4.0 * b * b * b * d + b * b * c * c
        - 4.0 * a * c * c * c
        - 27.0 * a * a * d * d
}

/// Classifies the roots of the characteristic factor `η` of the 1D scheme
/// `−(σh²+ε)δ²U + δU + γhᵖ(δ²_{2h} − δ²_h)U = 0`.
///
/// `η(0) = −B < 0 < 4h = η(1)`, so a root `r₁ ∈ (0,1)` is found by bisection
/// and Newton polishing; the remaining quadratic gives `r₂`, `r₃`.
pub fn characteristic_regime(
    sigma: f64,
    eps: f64,
    gamma: f64,
    p: f64,
    h: f64,
) -> Result<RootRegime> {
    if !(h > 0.0) || !(gamma >= 0.0) || !(sigma >= 0.0) || !(eps >= 0.0) {
        return Err(Error::Configuration(format!(
            "need h > 0 and nonnegative sigma, eps, gamma (got h={h}, sigma={sigma}, eps={eps}, gamma={gamma})"
        )));
    }
    let a = sigma * h * h + eps;
    let b = if gamma == 0.0 { 0.0 } else { gamma * h.powf(p) };
    let coeffs = eta_coefficients(a, b, h);
    let [c3, c2, c1, c0] = coeffs;
    let eta_at_one = ((c3 + c2) + c1) + c0;
    let discriminant = cubic_discriminant(coeffs);
    if b == 0.0 {
        // (2h − 4a)x² + (4a + 2h)x: roots 0 and (4a+2h)/(4a−2h)
        let lead = 2.0 * h - 4.0 * a;
        let mut roots = vec![Complex::new(0.0, 0.0)];
        if lead != 0.0 {
            roots.push(Complex::new(-(4.0 * a + 2.0 * h) / lead, 0.0));
        }
        return Ok(RootRegime {
            a,
            b,
            h,
            ratio: None,
            roots,
            regime: Regime::Degenerate,
            heuristic: Regime::Degenerate,
            discriminant,
            eta_at_one,
        });
    }
    let eval = |x: f64| ((c3 * x + c2) * x + c1) * x + c0;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if eval(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut r1 = 0.5 * (lo + hi);
    for _ in 0..3 {
        let d = (3.0 * c3 * r1 + 2.0 * c2) * r1 + c1;
        if d != 0.0 {
            let next = r1 - eval(r1) / d;
            if next > 0.0 && next < 1.0 && eval(next).abs() <= eval(r1).abs() {
                r1 = next;
            }
        }
    }
    // deflate: η(x) = (x − r₁)(c₃x² + q₁x + q₀)
    let q1 = c2 + c3 * r1;
    let q0 = c1 + q1 * r1;
    let qd = q1 * q1 - 4.0 * c3 * q0;
    let (r2, r3) = if qd >= 0.0 {
        let s = qd.sqrt();
        // stable quadratic formula
        let t = -0.5 * (q1 + q1.signum() * s);
        let (x1, x2) = if t != 0.0 {
            (t / c3, q0 / t)
        } else {
            (0.0, 0.0)
        };
        let (x1, x2) = if x1 <= x2 { (x1, x2) } else { (x2, x1) };
        (Complex::new(x1, 0.0), Complex::new(x2, 0.0))
    } else {
        let re = -q1 / (2.0 * c3);
        let im = (-qd).sqrt() / (2.0 * c3);
        (Complex::new(re, -im.abs()), Complex::new(re, im.abs()))
    };
    let regime = if qd < 0.0 {
        Regime::ComplexPair
    } else if r2.re > 0.0 && r3.re > 0.0 {
        Regime::TwoPositive
    } else if r2.re < 0.0 && r3.re < 0.0 {
        Regime::TwoNegative
    } else {
        // a double root at zero cannot occur (product of roots is 1); fall back on the sum
        if r2.re + r3.re >= 0.0 {
            Regime::TwoPositive
        } else {
            Regime::TwoNegative
        }
    };
    let ratio = (4.0 * a - 2.0 * h) / b;
    let heuristic = if ratio <= -4.0 {
        Regime::TwoNegative
    } else if ratio <= 0.0 {
        Regime::ComplexPair
    } else {
        Regime::TwoPositive
    };
    Ok(RootRegime {
        a,
        b,
        h,
        ratio: Some(ratio),
        roots: vec![Complex::new(r1, 0.0), r2, r3],
        regime,
        heuristic,
        discriminant,
        eta_at_one,
    })
}

/// Interior residuals of a scheme applied to exact-solution samples: the local
/// truncation errors, tagged with each node's depth (index distance to the
/// nearest boundary node, 1 for the first interior layer).
#[derive(Debug, Clone, PartialEq)]
pub struct TruncationProfile {
    pub h: f64,
    /// Norm weight `Π hᵢ^{1/2}`.
    pub weight: f64,
    pub nodes: Vec<usize>,
    pub depth: Vec<usize>,
    pub values: Vec<f64>,
}

impl TruncationProfile {
    /// `max |τ|` over nodes whose depth satisfies `pred` (0 when none do).
    pub fn max_where(&self, pred: impl Fn(usize) -> bool) -> f64 {
        self.depth
            .iter()
            .zip(&self.values)
            .filter(|(d, _)| pred(**d))
            .fold(0.0, |m, (_, v)| m.max(v.abs()))
    }

    /// Weighted ℓ² norm of all interior truncation errors.
    pub fn weighted_l2(&self) -> f64 {
        self.weight * self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Truncation profile of `cfg` for a problem with a known exact solution.
pub fn truncation_profile(
    problem: &Problem,
    cfg: &SchemeConfig,
    grid: &Grid,
) -> Result<TruncationProfile> {
    let exact = problem.exact().ok_or_else(|| {
        Error::UnsupportedAnalysis(format!("`{}` has no exact solution", problem.name()))
    })?;
    let ev = SchemeEvaluator::new(problem, cfg, grid)?;
    let d = grid.dim();
    let u: Vec<f64> = (0..grid.num_nodes())
        .map(|k| exact.eval(&grid.node_point(k)[..d]))
        .collect();
    let values = ev.interior_residual(&u, ev.params().eps_h)?;
    let nodes = ev.discretization().rows().to_vec();
    let depth = nodes
        .iter()
        .map(|&k| {
            let idx = grid.multi_index(k);
            (0..d)
                .map(|i| {
                    let j = grid.nodes_per_dim()[i] as i64;
                    let c = idx.get(i);
                    (c - 1).min(j - c) as usize
                })
                .min()
                .unwrap_or(0)
        })
        .collect();
    Ok(TruncationProfile {
        h: grid.h_max(),
        weight: grid.spacings().iter().map(|h| h.sqrt()).product(),
        nodes,
        depth,
        values,
    })
}

/// Dense symmetric eigenvalues of a square operator (ascending).
pub fn symmetric_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let mut e: Vec<f64> = a
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .collect();
    e.sort_by(|x, y| x.total_cmp(y));
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{assemble, moment_matrix, BoundaryTreatment, StencilKind};
    use crate::schemes::AuxiliaryBc;

    #[test]
    fn norms_of_simple_fields() {
        let g = Grid::uniform_1d(0.0, 1.0, 3).unwrap();
        let exact = ExactSolution::new(|x| x[0]);
        let u = GridFunction::from_values(&g, vec![0.0, 0.5 + 0.2, 1.0]).unwrap();
        assert!((weighted_l2_error(&u, &exact, &g) - 0.5f64.sqrt() * 0.2).abs() < 1e-15);
        let g = Grid::uniform_1d(0.0, 1.0, 11).unwrap();
        let same = GridFunction::from_fn(&g, |x| x[0]);
        assert_eq!(weighted_l2_error(&same, &exact, &g), 0.0);
        assert_eq!(linf_error(&same, &exact, &g), 0.0);
        let off = GridFunction::from_fn(&g, |x| x[0] + 0.125);
        assert!((linf_error(&off, &exact, &g) - 0.125).abs() < 1e-15);
        let expect = 0.125 * (9.0f64 * 0.1).sqrt();
        assert!((weighted_l2_error(&off, &exact, &g) - expect).abs() < 1e-15);
    }

    #[test]
    fn orders() {
        let o = observed_orders(&[(0.1, 1e-1), (0.05, 2.5e-2), (0.025, 1.25e-2)]);
        assert_eq!(o[0], None);
        assert!((o[1].unwrap() - 2.0).abs() < 1e-12);
        assert!((o[2].unwrap() - 1.0).abs() < 1e-12);
        let paper = observed_orders(&[(1.0 / 6.0, 6.91e-1), (1.0 / 12.0, 3.58e-1)]);
        assert!((paper[1].unwrap() - 0.95).abs() < 0.005);
        assert_eq!(observed_orders(&[(0.1, 0.0), (0.05, 1.0)])[1], None);
    }

    #[test]
    fn diagnostics_of_reference_matrices() {
        let g = Grid::uniform_1d(0.0, 1.0, 9).unwrap();
        let c = assemble(
            StencilKind::Central(0),
            &g,
            BoundaryTreatment::DirichletRows,
        )
        .unwrap();
        assert!(matrix_diagnostics(&c, false).unwrap().antisymmetric);
        let s = assemble(StencilKind::Second(0), &g, BoundaryTreatment::DirichletRows).unwrap();
        let d = matrix_diagnostics(&s, false).unwrap();
        assert!(d.symmetric && d.m_matrix && d.min_eig > 0.0);
        let m2 = moment_matrix(&g, 0.0, AuxiliaryBc::Bc2).unwrap();
        assert!(matrix_diagnostics(&m2, false).unwrap().rank_deficiency >= 1);
        let est = matrix_diagnostics(&s, true).unwrap();
        assert!(est.estimated);
        assert!((est.min_eig - d.min_eig).abs() < 1e-6 * d.min_eig);
        assert!((est.max_eig - d.max_eig).abs() < 1e-3 * d.max_eig);
    }

    #[test]
    fn regime_examples() {
        let r = characteristic_regime(1.0, 0.0, 1.0, 1.0, 0.01).unwrap();
        assert!((r.ratio.unwrap() + 1.96).abs() < 1e-12);
        assert_eq!(r.regime, Regime::ComplexPair);
        assert!((r.eta_at_one - 0.04).abs() < 1e-15);
        let r = characteristic_regime(1.0, 0.1, 1.0, 0.0, 0.01).unwrap();
        assert!((r.ratio.unwrap() - 0.3804).abs() < 1e-12);
        assert_eq!(r.regime, Regime::TwoPositive);
        assert_eq!(
            characteristic_regime(1.0, 0.0, 0.0, 0.0, 0.1)
                .unwrap()
                .regime,
            Regime::Degenerate
        );
        for root in &r.roots {
            assert!(r.eta(*root).norm() < 1e-10 * (1.0 + root.norm().powi(3)));
        }
        let prod = r.roots.iter().fold(Complex::new(1.0, 0.0), |a, b| a * b);
        assert!((prod.re - 1.0).abs() < 1e-9 && prod.im.abs() < 1e-9);
    }
}
