//! Problem specifications and the registry of the seven benchmark examples.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::DRectangle;

/// Scalar field `x -> v`.
pub type ScalarField = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
/// Vector field `x -> (v₁, v₂)`; the second component is ignored in 1D.
pub type VectorField = Arc<dyn Fn(&[f64]) -> [f64; 2] + Send + Sync>;
/// Hamiltonian `H(q, v, x)`.
pub type HamiltonianFn = Arc<dyn Fn(&[f64], f64, &[f64]) -> f64 + Send + Sync>;
/// Partials `(∂H/∂q, ∂H/∂v)` of a Hamiltonian.
pub type HamiltonianPartials = Arc<dyn Fn(&[f64], f64, &[f64]) -> ([f64; 2], f64) + Send + Sync>;

/// Exact solution with optional analytic derivatives.
#[derive(Clone)]
pub struct ExactSolution {
    pub value: ScalarField,
    pub gradient: Option<VectorField>,
    pub laplacian: Option<ScalarField>,
}

impl ExactSolution {
    pub fn new(value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            value: Arc::new(value),
            gradient: None,
            laplacian: None,
        }
    }

    pub fn with_derivatives(
        mut self,
        gradient: impl Fn(&[f64]) -> [f64; 2] + Send + Sync + 'static,
        laplacian: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.gradient = Some(Arc::new(gradient));
        self.laplacian = Some(Arc::new(laplacian));
        self
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }
}

impl fmt::Debug for ExactSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExactSolution")
            .field("gradient", &self.gradient.is_some())
            .field("laplacian", &self.laplacian.is_some())
            .finish()
    }
}

/// `−εΔu + b·∇u + cu = f` in Ω, `u = g` on ∂Ω.
#[derive(Clone)]
pub struct LinearProblem {
    pub name: String,
    pub domain: DRectangle,
    pub epsilon: f64,
    pub b: VectorField,
    /// Set when `b` is constant; required by the contraction analysis.
    pub constant_b: Option<[f64; 2]>,
    pub c: ScalarField,
    pub f: ScalarField,
    pub g: ScalarField,
    pub exact: Option<ExactSolution>,
}

impl LinearProblem {
    /// Constant-coefficient problem with the given forcing and boundary data.
    pub fn constant(
        domain: DRectangle,
        epsilon: f64,
        b: [f64; 2],
        c: f64,
        f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        g: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: "constant-coefficient".into(),
            domain,
            epsilon,
            b: Arc::new(move |_| b),
            constant_b: Some(b),
            c: Arc::new(move |_| c),
            f: Arc::new(f),
            g: Arc::new(g),
            exact: None,
        }
    }

    /// Sets `exact`, and `f`, `g` from it by [`manufactured_forcing`].
    pub fn manufactured(mut self, exact: ExactSolution) -> Result<Self> {
        self.f = manufactured_forcing(&self, &exact)?;
        self.g = exact.value.clone();
        self.exact = Some(exact);
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0) {
            return Err(Error::Configuration(format!(
                "epsilon must be nonnegative, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

impl fmt::Debug for LinearProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LinearProblem")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("epsilon", &self.epsilon)
            .field("constant_b", &self.constant_b)
            .field("exact", &self.exact)
            .finish()
    }
}

/// `−εΔu + H(∇u, u, x) = 0` in Ω, `u = g` on ∂Ω.
#[derive(Clone)]
pub struct HJProblem {
    pub name: String,
    pub domain: DRectangle,
    pub epsilon: f64,
    pub hamiltonian: HamiltonianFn,
    /// Analytic partials; when absent the Newton solver differences `H`.
    pub partials: Option<HamiltonianPartials>,
    pub g: ScalarField,
    /// Per-dimension bounds on `|∂H/∂qᵢ|`.
    pub slope_bounds: Vec<f64>,
    pub exact: Option<ExactSolution>,
}

impl HJProblem {
    /// `max |H(0, 0, x)|` over the given points, the size of the data term.
    pub fn data_scale<'a>(&self, points: impl Iterator<Item = &'a [f64]>) -> f64 {
        let zero = [0.0; 2];
        let d = self.domain.dim();
        points
            .map(|x| (self.hamiltonian)(&zero[..d], 0.0, x).abs())
            .fold(0.0, f64::max)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0) {
            return Err(Error::Configuration(format!(
                "epsilon must be nonnegative, got {}",
                self.epsilon
            )));
        }
        if self
            .slope_bounds
            .iter()
            .any(|s| !(s.is_finite() && *s >= 0.0))
        {
            return Err(Error::Configuration(
                "slope bounds must be finite and nonnegative".into(),
            ));
        }
        Ok(())
    }
}

impl fmt::Debug for HJProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HJProblem")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("epsilon", &self.epsilon)
            .field("slope_bounds", &self.slope_bounds)
            .field("exact", &self.exact)
            .finish()
    }
}

/// Either problem class.
#[derive(Debug, Clone)]
pub enum Problem {
    Linear(LinearProblem),
    HamiltonJacobi(HJProblem),
}

impl Problem {
    pub fn name(&self) -> &str {
        match self {
            Problem::Linear(p) => &p.name,
            Problem::HamiltonJacobi(p) => &p.name,
        }
    }

    pub fn domain(&self) -> &DRectangle {
        match self {
            Problem::Linear(p) => &p.domain,
            Problem::HamiltonJacobi(p) => &p.domain,
        }
    }

    pub fn epsilon(&self) -> f64 {
        match self {
            Problem::Linear(p) => p.epsilon,
            Problem::HamiltonJacobi(p) => p.epsilon,
        }
    }

    pub fn boundary(&self) -> &ScalarField {
        match self {
            Problem::Linear(p) => &p.g,
            Problem::HamiltonJacobi(p) => &p.g,
        }
    }

    pub fn exact(&self) -> Option<&ExactSolution> {
        match self {
            Problem::Linear(p) => p.exact.as_ref(),
            Problem::HamiltonJacobi(p) => p.exact.as_ref(),
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, Problem::Linear(_))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Problem::Linear(p) => p.validate(),
            Problem::HamiltonJacobi(p) => p.validate(),
        }
    }
}

/// `f = −εΔu + b·∇u + cu` from an exact solution with analytic derivatives.
pub fn manufactured_forcing(problem: &LinearProblem, exact: &ExactSolution) -> Result<ScalarField> {
    let grad = exact
        .gradient
        .clone()
        .ok_or_else(|| Error::MissingDerivative("exact solution has no gradient".into()))?;
    let lap = exact
        .laplacian
        .clone()
        .ok_or_else(|| Error::MissingDerivative("exact solution has no Laplacian".into()))?;
    let u = exact.value.clone();
    let (b, c, eps) = (problem.b.clone(), problem.c.clone(), problem.epsilon);
    let d = problem.domain.dim();
    Ok(Arc::new(move |x: &[f64]| {
        let gu = grad(x);
        let bx = b(x);
        let conv: f64 = (0..d).map(|i| bx[i] * gu[i]).sum();
        -eps * lap(x) + conv + c(x) * u(x)
    }))
}

/// The registered benchmark examples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExampleId {
    OneDEx1,
    OneDEx2 { epsilon: f64 },
    OneDEx3 { epsilon: f64 },
    OneDEx4,
    TwoDEx1,
    TwoDEx2,
    TwoDEx3,
}

/// Registry names in listing order.
pub const EXAMPLE_NAMES: [&str; 7] = [
    "1d-ex1", "1d-ex2", "1d-ex3", "1d-ex4", "2d-ex1", "2d-ex2", "2d-ex3",
];

impl ExampleId {
    /// Looks up a registry name, overriding ε where the example has one.
    pub fn from_name(name: &str, epsilon: Option<f64>) -> Result<Self> {
        let id: ExampleId = name.parse()?;
        Ok(match (id, epsilon) {
            (ExampleId::OneDEx2 { .. }, Some(e)) => ExampleId::OneDEx2 { epsilon: e },
            (ExampleId::OneDEx3 { .. }, Some(e)) => ExampleId::OneDEx3 { epsilon: e },
            (id, Some(e)) if (e - id.default_epsilon()).abs() > 0.0 => {
                return Err(Error::Configuration(format!(
                    "example `{name}` has a fixed epsilon ({}); it cannot be overridden",
                    id.default_epsilon()
                )))
            }
            (id, _) => id,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            ExampleId::OneDEx1 => "1d-ex1",
            ExampleId::OneDEx2 { .. } => "1d-ex2",
            ExampleId::OneDEx3 { .. } => "1d-ex3",
            ExampleId::OneDEx4 => "1d-ex4",
            ExampleId::TwoDEx1 => "2d-ex1",
            ExampleId::TwoDEx2 => "2d-ex2",
            ExampleId::TwoDEx3 => "2d-ex3",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ExampleId::TwoDEx1 | ExampleId::TwoDEx2 | ExampleId::TwoDEx3 => 2,
            _ => 1,
        }
    }

    pub fn default_epsilon(&self) -> f64 {
        match self {
            ExampleId::OneDEx1 => 1e-11,
            ExampleId::OneDEx2 { epsilon } | ExampleId::OneDEx3 { epsilon } => *epsilon,
            _ => 0.0,
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            ExampleId::OneDEx1 => "linear, eps=1e-11, b=16sqrt(x)+sin(pi x)+2, c=0, u=(x^2+1)cos(pi x)e^x",
            ExampleId::OneDEx2 { .. } => "linear, b=16x-8+sin(pi x) (sign change), c=max(x-0.5,0)+1e-5, u=(x^2+1)cos(pi x)e^x",
            ExampleId::OneDEx3 { .. } => "linear, b=1, c=0, f=0, g(0)=0, g(1)=1 (boundary layer; u=0 at eps=0)",
            ExampleId::OneDEx4 => "Hamilton-Jacobi |u_x| - 1 = 0 on (-1,1), u=0 on boundary, u=1-|x|",
            ExampleId::TwoDEx1 => "linear, eps=0, b=(1,1), c=0, u=e^{xy}",
            ExampleId::TwoDEx2 => "Hamilton-Jacobi |grad u| + u = f, u=e^{xy}",
            ExampleId::TwoDEx3 => "Hamilton-Jacobi |u_x| + 2u_x = f (f=-1 for x<=0.2, 3 otherwise), u=|x-0.2|",
        }
    }
}

impl FromStr for ExampleId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "1d-ex1" => ExampleId::OneDEx1,
            "1d-ex2" => ExampleId::OneDEx2 { epsilon: 1e-1 },
            "1d-ex3" => ExampleId::OneDEx3 { epsilon: 0.0 },
            "1d-ex4" => ExampleId::OneDEx4,
            "2d-ex1" => ExampleId::TwoDEx1,
            "2d-ex2" => ExampleId::TwoDEx2,
            "2d-ex3" => ExampleId::TwoDEx3,
            _ => return Err(Error::UnknownExample(s.to_string())),
        })
    }
}

/// `sign` with the subgradient convention `sign(0) = 0`.
pub fn sign0(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `u(x) = (x²+1) cos(πx) eˣ` with analytic first and second derivatives.
fn smooth_1d_solution() -> ExactSolution {
    fn parts(x: f64) -> (f64, f64, f64) {
        let (p, dp, ddp) = (x * x + 1.0, 2.0 * x, 2.0);
        let (c, dc, ddc) = (
            (PI * x).cos(),
            -PI * (PI * x).sin(),
            -PI * PI * (PI * x).cos(),
        );
        let e = x.exp();
        let u = p * c * e;
        let du = (dp * c + p * dc + p * c) * e;
        let ddu = (ddp * c + p * ddc + p * c + 2.0 * dp * dc + 2.0 * dp * c + 2.0 * p * dc) * e;
        (u, du, ddu)
    }
    ExactSolution::new(|x| parts(x[0]).0)
        .with_derivatives(|x| [parts(x[0]).1, 0.0], |x| parts(x[0]).2)
}

/// `u(x, y) = e^{xy}`.
fn exp_xy_solution() -> ExactSolution {
    ExactSolution::new(|x| (x[0] * x[1]).exp()).with_derivatives(
        |x| {
            let e = (x[0] * x[1]).exp();
            [x[1] * e, x[0] * e]
        },
        |x| (x[0] * x[0] + x[1] * x[1]) * (x[0] * x[1]).exp(),
    )
}

/// Builds the problem for a registered example.
pub fn get_example(id: ExampleId) -> Result<Problem> {
    let unit1 = || DRectangle::interval(0.0, 1.0);
    Ok(match id {
        ExampleId::OneDEx1 => {
            let p = LinearProblem {
                name: id.name().into(),
                domain: unit1()?,
                epsilon: 1e-11,
                b: Arc::new(|x| [16.0 * x[0].sqrt() + (PI * x[0]).sin() + 2.0, 0.0]),
                constant_b: None,
                c: Arc::new(|_| 0.0),
                f: Arc::new(|_| 0.0),
                g: Arc::new(|_| 0.0),
                exact: None,
            };
            Problem::Linear(p.manufactured(smooth_1d_solution())?)
        }
        ExampleId::OneDEx2 { epsilon } => {
            let p = LinearProblem {
                name: id.name().into(),
                domain: unit1()?,
                epsilon,
                b: Arc::new(|x| [16.0 * x[0] - 8.0 + (PI * x[0]).sin(), 0.0]),
                constant_b: None,
                c: Arc::new(|x| (x[0] - 0.5).max(0.0) + 1e-5),
                f: Arc::new(|_| 0.0),
                g: Arc::new(|_| 0.0),
                exact: None,
            };
            p.validate()?;
            Problem::Linear(p.manufactured(smooth_1d_solution())?)
        }
        ExampleId::OneDEx3 { epsilon } => {
            let exact = if epsilon > 0.0 {
                let denom = -(-1.0 / epsilon).exp_m1();
                let e = epsilon;
                let u = move |x: &[f64]| (((x[0] - 1.0) / e).exp() - (-1.0 / e).exp()) / denom;
                let du = move |x: &[f64]| ((x[0] - 1.0) / e).exp() / (e * denom);
                ExactSolution::new(u).with_derivatives(move |x| [du(x), 0.0], move |x| du(x) / e)
            } else {
                // the viscosity solution; the boundary value g(1) = 1 is met only in the viscosity sense
                ExactSolution::new(|_| 0.0).with_derivatives(|_| [0.0; 2], |_| 0.0)
            };
            let p = LinearProblem {
                name: id.name().into(),
                domain: unit1()?,
                epsilon,
                b: Arc::new(|_| [1.0, 0.0]),
                constant_b: Some([1.0, 0.0]),
                c: Arc::new(|_| 0.0),
                f: Arc::new(|_| 0.0),
                g: Arc::new(|x| if x[0] > 0.5 { 1.0 } else { 0.0 }),
                exact: Some(exact),
            };
            p.validate()?;
            Problem::Linear(p)
        }
        ExampleId::OneDEx4 => Problem::HamiltonJacobi(HJProblem {
            name: id.name().into(),
            domain: DRectangle::interval(-1.0, 1.0)?,
            epsilon: 0.0,
            hamiltonian: Arc::new(|q, _, _| q[0].abs() - 1.0),
            partials: Some(Arc::new(|q, _, _| ([sign0(q[0]), 0.0], 0.0))),
            g: Arc::new(|_| 0.0),
            slope_bounds: vec![1.0],
            exact: Some(ExactSolution::new(|x| 1.0 - x[0].abs())),
        }),
        ExampleId::TwoDEx1 => {
            let p = LinearProblem {
                name: id.name().into(),
                domain: DRectangle::unit(2)?,
                epsilon: 0.0,
                b: Arc::new(|_| [1.0, 1.0]),
                constant_b: Some([1.0, 1.0]),
                c: Arc::new(|_| 0.0),
                f: Arc::new(|_| 0.0),
                g: Arc::new(|_| 0.0),
                exact: None,
            };
            Problem::Linear(p.manufactured(exp_xy_solution())?)
        }
        ExampleId::TwoDEx2 => {
            let f = |x: &[f64]| (x[0] * x[1]).exp() * ((x[0] * x[0] + x[1] * x[1]).sqrt() + 1.0);
            Problem::HamiltonJacobi(HJProblem {
                name: id.name().into(),
                domain: DRectangle::unit(2)?,
                epsilon: 0.0,
                hamiltonian: Arc::new(move |q, v, x| q[0].hypot(q[1]) + v - f(x)),
                partials: Some(Arc::new(|q, _, _| {
                    let n = q[0].hypot(q[1]);
                    if n > 0.0 {
                        ([q[0] / n, q[1] / n], 1.0)
                    } else {
                        ([0.0, 0.0], 1.0)
                    }
                })),
                g: Arc::new(|x| (x[0] * x[1]).exp()),
                slope_bounds: vec![1.0, 1.0],
                exact: Some(exp_xy_solution()),
            })
        }
        ExampleId::TwoDEx3 => Problem::HamiltonJacobi(HJProblem {
            name: id.name().into(),
            domain: DRectangle::unit(2)?,
            epsilon: 0.0,
            hamiltonian: Arc::new(|q, _, x| q[0].abs() + 2.0 * q[0] - two_d_ex3_forcing(x)),
            partials: Some(Arc::new(|q, _, _| ([sign0(q[0]) + 2.0, 0.0], 0.0))),
            g: Arc::new(|x| (x[0] - 0.2).abs()),
            slope_bounds: vec![3.0, 0.0],
            exact: Some(
                ExactSolution::new(|x| (x[0] - 0.2).abs())
                    .with_derivatives(|x| [sign0(x[0] - 0.2), 0.0], |_| 0.0),
            ),
        }),
    })
}

/// Piecewise forcing of the third 2D example; `x = 0.2` takes the first branch.
pub fn two_d_ex3_forcing(x: &[f64]) -> f64 {
    if x[0] <= 0.2 {
        -1.0
    } else {
        3.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear(id: ExampleId) -> LinearProblem {
        match get_example(id).unwrap() {
            Problem::Linear(p) => p,
            _ => panic!("expected linear"),
        }
    }

    #[test]
    fn names_round_trip() {
        for name in EXAMPLE_NAMES {
            assert_eq!(name.parse::<ExampleId>().unwrap().name(), name);
        }
        assert!(matches!(
            "3d-ex1".parse::<ExampleId>(),
            Err(Error::UnknownExample(_))
        ));
    }

    #[test]
    fn epsilon_override_only_where_parameterized() {
        let id = ExampleId::from_name("1d-ex2", Some(1e-3)).unwrap();
        assert_eq!(id, ExampleId::OneDEx2 { epsilon: 1e-3 });
        assert!(ExampleId::from_name("2d-ex1", Some(0.5)).is_err());
        assert!(ExampleId::from_name("1d-ex1", Some(1e-11)).is_ok());
    }

    #[test]
    fn example1_coefficients() {
        let p = linear(ExampleId::OneDEx1);
        assert_eq!(p.epsilon, 1e-11);
        let x = [0.25];
        let b = 16.0 * 0.5 + (PI * 0.25).sin() + 2.0;
        assert!(((p.b)(&x)[0] - b).abs() < 1e-15);
        let u = (0.0625 + 1.0) * (PI * 0.25).cos() * 0.25f64.exp();
        assert!((p.exact.as_ref().unwrap().eval(&x) - u).abs() < 1e-15);
    }

    #[test]
    fn example1_forcing_matches_finite_differences() {
        let p = linear(ExampleId::OneDEx1);
        let u = p.exact.clone().unwrap();
        let x = 0.5;
        let h = 1e-4;
        let du = (u.eval(&[x + h]) - u.eval(&[x - h])) / (2.0 * h);
        let ddu = (u.eval(&[x + h]) - 2.0 * u.eval(&[x]) + u.eval(&[x - h])) / (h * h);
        let expect = -1e-11 * ddu + (p.b)(&[x])[0] * du;
        assert!(((p.f)(&[x]) - expect).abs() < 1e-6 * expect.abs().max(1.0));
    }

    #[test]
    fn manufactured_trivial_cases() {
        let dom = DRectangle::interval(0.0, 1.0).unwrap();
        let p = LinearProblem::constant(dom.clone(), 0.3, [0.0; 2], 0.0, |_| 0.0, |_| 0.0);
        let k = ExactSolution::new(|_| 4.0).with_derivatives(|_| [0.0; 2], |_| 0.0);
        assert_eq!(manufactured_forcing(&p, &k).unwrap()(&[0.3]), 0.0);
        let p = LinearProblem::constant(dom, 0.7, [1.0, 0.0], 0.0, |_| 0.0, |_| 0.0);
        let lin = ExactSolution::new(|x| x[0]).with_derivatives(|_| [1.0, 0.0], |_| 0.0);
        assert_eq!(manufactured_forcing(&p, &lin).unwrap()(&[0.3]), 1.0);
        let bare = ExactSolution::new(|x| x[0]);
        assert!(matches!(
            manufactured_forcing(&p, &bare),
            Err(Error::MissingDerivative(_))
        ));
    }

    #[test]
    fn example2_reaction_is_positive() {
        let p = linear(ExampleId::OneDEx2 { epsilon: 1e-3 });
        for k in 0..=1000 {
            assert!((p.c)(&[k as f64 / 1000.0]) >= 1e-5);
        }
    }

    #[test]
    fn example3_degenerate_data() {
        let p = linear(ExampleId::OneDEx3 { epsilon: 0.0 });
        assert_eq!((p.g)(&[0.0]), 0.0);
        assert_eq!((p.g)(&[1.0]), 1.0);
        assert_eq!((p.f)(&[0.4]), 0.0);
        assert_eq!(p.exact.unwrap().eval(&[0.7]), 0.0);
    }

    #[test]
    fn example3_layer_solution_solves_ode() {
        let p = linear(ExampleId::OneDEx3 { epsilon: 0.1 });
        let u = p.exact.unwrap();
        assert!(u.eval(&[0.0]).abs() < 1e-15);
        assert!((u.eval(&[1.0]) - 1.0).abs() < 1e-15);
        let x = [0.6];
        let r = -0.1 * (u.laplacian.as_ref().unwrap())(&x) + (u.gradient.as_ref().unwrap())(&x)[0];
        assert!(r.abs() < 1e-12);
    }

    #[test]
    fn registry_forcing_matches_manufactured() {
        for id in [
            ExampleId::OneDEx1,
            ExampleId::OneDEx2 { epsilon: 0.1 },
            ExampleId::TwoDEx1,
        ] {
            let p = linear(id);
            let f = manufactured_forcing(&p, p.exact.as_ref().unwrap()).unwrap();
            for k in 0..20 {
                let x = [k as f64 / 19.0, 1.0 - k as f64 / 23.0];
                let a = (p.f)(&x);
                assert!((a - f(&x)).abs() <= 1e-12 * a.abs().max(1.0));
            }
        }
    }

    #[test]
    fn hj_examples_vanish_on_exact_solutions() {
        for id in [ExampleId::TwoDEx2, ExampleId::TwoDEx3] {
            let Problem::HamiltonJacobi(p) = get_example(id).unwrap() else {
                panic!()
            };
            let u = p.exact.clone().unwrap();
            for &x in &[[0.1, 0.7], [0.5, 0.5], [0.9, 0.3]] {
                let g = (u.gradient.as_ref().unwrap())(&x);
                assert!((p.hamiltonian)(&g, u.eval(&x), &x).abs() < 1e-12);
            }
        }
        assert_eq!(two_d_ex3_forcing(&[0.2, 0.5]), -1.0);
    }
}
