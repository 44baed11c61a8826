//! Experiment configuration files (TOML, validated against a fixed schema).
//!
//! ```toml
//! title = "Example 1 in one dimension"
//! example = "1d-ex1"
//! meshes = [7, 13, 23, 53]          # nodes per dimension, strictly increasing
//! full-meshes = [103, 303]          # extra rows run only with --full
//!
//! [[columns]]
//! name = "Moment BC1"
//! scheme = "moment-bc1"
//! sigma = 9.0
//! gamma = 1.0
//! p = 0.0
//!
//! [solver]
//! newton-tol = 1e-10
//!
//! [output]
//! dir = "out"
//! gnuplot = true
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::problems::{get_example, ExampleId, Problem};
use crate::schemes::{SchemeConfig, SchemeFamily};
use crate::solvers::{ContinuationLadder, FixedPointConfig, NewtonConfig};

/// A parsed experiment: one example, one or more scheme columns, a mesh list.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ExperimentConfig {
    #[serde(default)]
    pub title: Option<String>,
    pub example: String,
    /// Overrides ε for examples that take it as a parameter.
    #[serde(default)]
    pub epsilon: Option<f64>,
    /// Nodes per dimension `J` for each table row.
    pub meshes: Vec<usize>,
    /// Additional finer rows, run only on request.
    #[serde(default)]
    pub full_meshes: Vec<usize>,
    pub columns: Vec<ColumnConfig>,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub output: OutputSection,
}

/// One scheme column; unset parameters take the scheme's defaults.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ColumnConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub scheme: String,
    #[serde(default)]
    pub sigma: Option<f64>,
    #[serde(default)]
    pub r: Option<f64>,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub p: Option<f64>,
    #[serde(default)]
    pub lf_beta: Option<Vec<f64>>,
}

impl ColumnConfig {
    /// Column with every parameter at its default.
    pub fn named_scheme(scheme: &str) -> Self {
        Self {
            name: None,
            scheme: scheme.into(),
            sigma: None,
            r: None,
            gamma: None,
            p: None,
            lf_beta: None,
        }
    }

    pub fn scheme_config(&self) -> Result<SchemeConfig> {
        let mut cfg: SchemeConfig = self.scheme.parse()?;
        if let Some(v) = self.sigma {
            cfg.sigma = v;
        }
        if let Some(v) = self.r {
            cfg.r = v;
        }
        if let Some(v) = self.gamma {
            cfg.gamma = v;
        }
        if let Some(v) = self.p {
            cfg.p = v;
        }
        if let Some(b) = &self.lf_beta {
            cfg.lf_beta = Some(b.clone());
        }
        if cfg.family == SchemeFamily::LaxFriedrichs
            && self.lf_beta.is_some()
            && self.sigma.is_none()
        {
            cfg.sigma = 0.0;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Display label: the explicit name, else the scheme's table label.
    pub fn label(&self) -> Result<String> {
        Ok(match &self.name {
            Some(n) => n.clone(),
            None => self.scheme_config()?.label(),
        })
    }
}

/// Solver knobs.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct SolverSection {
    /// When set, linear problems are solved by the fixed-point iteration with this `ρ`.
    #[serde(default)]
    pub rho: Option<f64>,
    #[serde(default = "default_newton_tol")]
    pub newton_tol: f64,
    #[serde(default = "default_newton_max_iter")]
    pub newton_max_iter: usize,
    /// Continuation powers `q_k`; default `{0, 1, r}`.
    #[serde(default)]
    pub ladder_powers: Option<Vec<f64>>,
    /// Continuation constant `C`; default `σ`.
    #[serde(default)]
    pub ladder_constant: Option<f64>,
}

fn default_newton_tol() -> f64 {
    1e-10
}

fn default_newton_max_iter() -> usize {
    100
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            rho: None,
            newton_tol: default_newton_tol(),
            newton_max_iter: default_newton_max_iter(),
            ladder_powers: None,
            ladder_constant: None,
        }
    }
}

impl SolverSection {
    /// Newton settings for `scheme`, with the ladder knobs applied.
    pub fn newton(&self, scheme: &SchemeConfig) -> NewtonConfig {
        let ladder = if self.ladder_powers.is_some() || self.ladder_constant.is_some() {
            let base = ContinuationLadder::for_scheme(scheme);
            Some(ContinuationLadder::new(
                self.ladder_constant.unwrap_or(base.constant),
                self.ladder_powers.clone().unwrap_or(base.powers),
            ))
        } else {
            None
        };
        NewtonConfig {
            tol: self.newton_tol,
            max_iter: self.newton_max_iter,
            ladder,
            ..NewtonConfig::default()
        }
    }

    pub fn fixed_point(&self) -> Option<FixedPointConfig> {
        self.rho.map(FixedPointConfig::new)
    }
}

/// Output settings.
#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct OutputSection {
    /// Output directory (relative paths resolve against the working directory).
    #[serde(default)]
    pub dir: Option<PathBuf>,
    /// File-name stem; defaults to the config file's stem or the example name.
    #[serde(default)]
    pub stem: Option<String>,
    /// Also write a gnuplot script next to solution dumps.
    #[serde(default)]
    pub gnuplot: bool,
}

impl ExperimentConfig {
    /// Parses and validates TOML text.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)
            .map_err(|e| Error::Configuration(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads, parses and validates a config file; the output stem defaults to
    /// the file stem.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Configuration(format!("cannot read config `{}`: {e}", path.display()))
        })?;
        let mut cfg = Self::from_toml_str(&text)?;
        if cfg.output.stem.is_none() {
            cfg.output.stem = path.file_stem().map(|s| s.to_string_lossy().into_owned());
        }
        Ok(cfg)
    }

    /// A one-column config built from command-line choices.
    pub fn from_parts(
        example: &str,
        epsilon: Option<f64>,
        scheme: &str,
        meshes: Vec<usize>,
    ) -> Result<Self> {
        let cfg = Self {
            title: None,
            example: example.into(),
            epsilon,
            meshes,
            full_meshes: Vec::new(),
            columns: vec![ColumnConfig::named_scheme(scheme)],
            solver: SolverSection::default(),
            output: OutputSection::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let id = self.example_id()?;
        if self.meshes.is_empty() {
            return Err(Error::Configuration(
                "`meshes` must list at least one mesh".into(),
            ));
        }
        let all: Vec<usize> = self
            .meshes
            .iter()
            .chain(&self.full_meshes)
            .copied()
            .collect();
        if all.iter().any(|&j| j < 3) {
            return Err(Error::Configuration(
                "every mesh needs at least 3 nodes per dimension".into(),
            ));
        }
        if all.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Configuration(
                "meshes (followed by full-meshes) must be strictly refining".into(),
            ));
        }
        if self.columns.is_empty() {
            return Err(Error::Configuration(
                "at least one [[columns]] entry is required".into(),
            ));
        }
        for c in &self.columns {
            let s = c.scheme_config()?;
            if let Some(b) = &s.lf_beta {
                if b.len() != id.dim() {
                    return Err(Error::Configuration(format!(
                        "lf-beta needs {} entries for `{}`",
                        id.dim(),
                        self.example
                    )));
                }
            }
        }
        if let Some(rho) = self.solver.rho {
            if !(rho > 0.0 && rho.is_finite()) {
                return Err(Error::Configuration(format!(
                    "rho must be positive, got {rho}"
                )));
            }
        }
        if !(self.solver.newton_tol > 0.0) {
            return Err(Error::Configuration("newton-tol must be positive".into()));
        }
        if let Some(p) = &self.solver.ladder_powers {
            if p.is_empty() || p.iter().any(|q| !q.is_finite()) {
                return Err(Error::Configuration(
                    "ladder-powers must be a nonempty list of numbers".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn example_id(&self) -> Result<ExampleId> {
        ExampleId::from_name(&self.example, self.epsilon)
    }

    pub fn problem(&self) -> Result<Problem> {
        get_example(self.example_id()?)
    }

    /// Mesh list, with the extra rows when `full` is set.
    pub fn mesh_list(&self, full: bool) -> Vec<usize> {
        let mut m = self.meshes.clone();
        if full {
            m.extend(&self.full_meshes);
        }
        m
    }

    /// Uniform grid with `j` nodes per dimension on the example's domain.
    pub fn grid(&self, j: usize) -> Result<Grid> {
        let problem = self.problem()?;
        let d = problem.domain().dim();
        Grid::new(problem.domain().clone(), &vec![j; d])
    }

    /// File-name stem for artifacts.
    pub fn stem(&self) -> String {
        self.output
            .stem
            .clone()
            .unwrap_or_else(|| self.example.clone())
    }

    /// Keeps only the column matching `sel` by name, label or scheme name; an
    /// unmatched registry scheme name replaces the columns with a default one.
    pub fn select_scheme(&mut self, sel: &str) -> Result<()> {
        let key = sel.trim().to_ascii_lowercase();
        let hits: Vec<ColumnConfig> = self
            .columns
            .iter()
            .filter(|c| {
                c.name.as_deref().map(str::to_ascii_lowercase).as_deref() == Some(key.as_str())
                    || c.label()
                        .map(|l| l.to_ascii_lowercase() == key)
                        .unwrap_or(false)
                    || c.scheme.to_ascii_lowercase() == key
            })
            .cloned()
            .collect();
        self.columns = if hits.is_empty() {
            let col = ColumnConfig::named_scheme(&key);
            col.scheme_config()?;
            vec![col]
        } else {
            hits
        };
        Ok(())
    }
}
