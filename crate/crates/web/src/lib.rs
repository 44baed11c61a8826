//! Browser bindings for the solver: single solves, small convergence studies
//! and the 1D characteristic-root classification, all returning JSON strings.
//!
//! Each `*_json` function is plain Rust (tested natively); the
//! `#[wasm_bindgen]` wrappers only turn errors into JavaScript exceptions.

use momentfd::analysis::{characteristic_regime, linf_error, observed_orders, weighted_l2_error};
use momentfd::config::{ColumnConfig, ExperimentConfig};
use momentfd::experiment::{solve_one, table_h};
use momentfd::problems::{ExampleId, EXAMPLE_NAMES};
use momentfd::schemes::SchemeConfig;
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest mesh accepted per dimension, to keep the page responsive.
pub const MAX_NODES_1D: usize = 4001;
pub const MAX_NODES_2D: usize = 81;

#[derive(Serialize)]
struct ExampleInfo {
    name: &'static str,
    dim: usize,
    default_epsilon: f64,
    description: &'static str,
}

#[derive(Serialize)]
struct Profile {
    example: String,
    scheme: String,
    dim: usize,
    nodes: usize,
    /// Node coordinates along each axis.
    axes: Vec<Vec<f64>>,
    /// Solution values, lexicographic with the first axis fastest.
    u: Vec<f64>,
    exact: Option<Vec<f64>>,
    l2: Option<f64>,
    linf: Option<f64>,
    converged: bool,
    residual: f64,
    iterations: usize,
}

#[derive(Serialize)]
struct Row {
    nodes: usize,
    h: f64,
    l2: Option<f64>,
    linf: Option<f64>,
    order_l2: Option<f64>,
    order_linf: Option<f64>,
    converged: bool,
}

#[derive(Serialize)]
struct Convergence {
    example: String,
    scheme: String,
    rows: Vec<Row>,
}

#[derive(Serialize)]
struct Roots {
    a: f64,
    b: f64,
    ratio: Option<f64>,
    regime: String,
    heuristic: String,
    discriminant: f64,
    eta_at_one: f64,
    /// `[re, im]` pairs.
    roots: Vec<[f64; 2]>,
}

/// Scheme parameters from the page; NaN means "use the scheme's default".
#[derive(Debug, Clone, Copy)]
pub struct Params {
    pub sigma: f64,
    pub gamma: f64,
    pub p: f64,
}

fn opt(v: f64) -> Option<f64> {
    (!v.is_nan()).then_some(v)
}

fn experiment(
    example: &str,
    epsilon: f64,
    scheme: &str,
    params: Params,
    meshes: Vec<usize>,
) -> Result<ExperimentConfig, String> {
    let mut cfg = ExperimentConfig::from_parts(example, opt(epsilon), scheme, meshes)
        .map_err(|e| e.to_string())?;
    cfg.columns = vec![ColumnConfig {
        sigma: opt(params.sigma),
        gamma: opt(params.gamma),
        p: opt(params.p),
        ..ColumnConfig::named_scheme(scheme)
    }];
    let limit = match cfg.example_id().map_err(|e| e.to_string())?.dim() {
        1 => MAX_NODES_1D,
        _ => MAX_NODES_2D,
    };
    if let Some(&j) = cfg.meshes.iter().find(|&&j| j > limit) {
        return Err(format!(
            "mesh {j} exceeds the demo limit of {limit} nodes per dimension"
        ));
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn scheme_of(cfg: &ExperimentConfig) -> Result<SchemeConfig, String> {
    cfg.columns[0].scheme_config().map_err(|e| e.to_string())
}

/// The built-in examples as a JSON array.
pub fn examples_json() -> String {
    let list: Vec<ExampleInfo> = EXAMPLE_NAMES
        .iter()
        .map(|name| {
            let id: ExampleId = name.parse().expect("registry names parse");
            ExampleInfo {
                name,
                dim: id.dim(),
                default_epsilon: id.default_epsilon(),
                description: id.description(),
            }
        })
        .collect();
    serde_json::to_string(&list).expect("serializable")
}

/// Solves `example` with one scheme on a `nodes`-per-dimension grid.
pub fn solve_profile_json(
    example: &str,
    epsilon: f64,
    scheme: &str,
    params: Params,
    nodes: usize,
) -> Result<String, String> {
    let cfg = experiment(example, epsilon, scheme, params, vec![nodes])?;
    let sc = scheme_of(&cfg)?;
    let problem = cfg.problem().map_err(|e| e.to_string())?;
    let grid = cfg.grid(nodes).map_err(|e| e.to_string())?;
    let rep = solve_one(&cfg, &problem, &sc, &grid).map_err(|e| e.to_string())?;
    let d = grid.dim();
    let axes = (0..d)
        .map(|i| {
            let (a, h) = (grid.domain().lower()[i], grid.spacing(i));
            (0..grid.nodes_per_dim()[i])
                .map(|k| a + k as f64 * h)
                .collect()
        })
        .collect();
    let exact = problem.exact();
    let profile = Profile {
        example: cfg.example.clone(),
        scheme: sc.label(),
        dim: d,
        nodes,
        axes,
        u: rep.solution.real_values().to_vec(),
        exact: exact.map(|e| {
            (0..grid.num_nodes())
                .map(|k| e.eval(&grid.node_point(k)[..d]))
                .collect()
        }),
        l2: exact.map(|e| weighted_l2_error(&rep.solution, e, &grid)),
        linf: exact.map(|e| linf_error(&rep.solution, e, &grid)),
        converged: rep.converged,
        residual: rep.residual,
        iterations: rep.total_iterations(),
    };
    serde_json::to_string(&profile).map_err(|e| e.to_string())
}

/// Errors and observed orders over a refining mesh list.
pub fn convergence_json(
    example: &str,
    epsilon: f64,
    scheme: &str,
    params: Params,
    meshes: Vec<usize>,
) -> Result<String, String> {
    let cfg = experiment(example, epsilon, scheme, params, meshes)?;
    let sc = scheme_of(&cfg)?;
    let problem = cfg.problem().map_err(|e| e.to_string())?;
    let exact = problem
        .exact()
        .ok_or_else(|| format!("`{}` has no exact solution", cfg.example))?
        .clone();
    let mut rows = Vec::new();
    for &j in &cfg.meshes {
        let grid = cfg.grid(j).map_err(|e| e.to_string())?;
        let rep = solve_one(&cfg, &problem, &sc, &grid).map_err(|e| e.to_string())?;
        let errs = rep.converged.then(|| {
            (
                weighted_l2_error(&rep.solution, &exact, &grid),
                linf_error(&rep.solution, &exact, &grid),
            )
        });
        rows.push(Row {
            nodes: j,
            h: table_h(&grid),
            l2: errs.map(|e| e.0),
            linf: errs.map(|e| e.1),
            order_l2: None,
            order_linf: None,
            converged: rep.converged,
        });
    }
    // orders between consecutive converged rows
    for i in 1..rows.len() {
        if let (Some(a), Some(b)) = (
            rows[i - 1].l2.zip(rows[i - 1].linf),
            rows[i].l2.zip(rows[i].linf),
        ) {
            let (h0, h1) = (rows[i - 1].h, rows[i].h);
            rows[i].order_l2 = observed_orders(&[(h0, a.0), (h1, b.0)])[1];
            rows[i].order_linf = observed_orders(&[(h0, a.1), (h1, b.1)])[1];
        }
    }
    let out = Convergence {
        example: cfg.example.clone(),
        scheme: sc.label(),
        rows,
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

/// Root regime of the 1D characteristic polynomial.
pub fn root_regime_json(
    sigma: f64,
    eps: f64,
    gamma: f64,
    p: f64,
    h: f64,
) -> Result<String, String> {
    let rr = characteristic_regime(sigma, eps, gamma, p, h).map_err(|e| e.to_string())?;
    let out = Roots {
        a: rr.a,
        b: rr.b,
        ratio: rr.ratio,
        regime: rr.regime.to_string(),
        heuristic: rr.heuristic.to_string(),
        discriminant: rr.discriminant,
        eta_at_one: rr.eta_at_one,
        roots: rr.roots.iter().map(|z| [z.re, z.im]).collect(),
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

fn js(r: Result<String, String>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn examples() -> String {
    examples_json()
}

/// `epsilon`, `sigma`, `gamma` and `p` accept NaN for the defaults.
#[wasm_bindgen]
pub fn solve_profile(
    example: &str,
    epsilon: f64,
    scheme: &str,
    sigma: f64,
    gamma: f64,
    p: f64,
    nodes: usize,
) -> Result<String, JsValue> {
    js(solve_profile_json(
        example,
        epsilon,
        scheme,
        Params { sigma, gamma, p },
        nodes,
    ))
}

#[wasm_bindgen]
pub fn convergence(
    example: &str,
    epsilon: f64,
    scheme: &str,
    sigma: f64,
    gamma: f64,
    p: f64,
    meshes: Vec<u32>,
) -> Result<String, JsValue> {
    let meshes = meshes.into_iter().map(|j| j as usize).collect();
    js(convergence_json(
        example,
        epsilon,
        scheme,
        Params { sigma, gamma, p },
        meshes,
    ))
}

#[wasm_bindgen]
pub fn root_regime(sigma: f64, eps: f64, gamma: f64, p: f64, h: f64) -> Result<String, JsValue> {
    js(root_regime_json(sigma, eps, gamma, p, h))
}
