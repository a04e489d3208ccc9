//! Experiment configuration files (TOML).
//!
//! ```toml
//! seed = 0
//! preset = "example1"
//! grids = [64, 128, 256]
//! out = "runs/example1"
//!
//! [network]
//! width = 40
//! samples = 200
//! ```
//!
//! Without `preset`, a `[problem]` table gives the problem explicitly; see
//! [`ProblemSpec`].

use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use nnfd::expr::Expr;
use nnfd::geometry::{CustomShape, InterfaceGeometry, Shape};
use nnfd::hybrid::{NetConfig, PoissonInterfaceProblem};
use nnfd::problems::{self, ErrorMode};
use nnfd::stokes::{manufactured_stokes_example, StokesProblem};
use nnfd::training::LmConfig;
use serde::Deserialize;

pub const STOKES_PRESET: &str = "stokes";

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub preset: Option<String>,
    pub problem: Option<ProblemSpec>,
    #[serde(default)]
    pub network: NetworkSpec,
    #[serde(default)]
    pub lm: LmSpec,
    /// Cells per axis; each entry doubles the previous one.
    pub grids: Option<Vec<usize>>,
    pub mode: Option<ModeSpec>,
    #[serde(default)]
    pub retrain: bool,
    #[serde(default)]
    pub dump_fields: bool,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeSpec {
    Exact,
    Successive,
}

impl From<ModeSpec> for ErrorMode {
    fn from(m: ModeSpec) -> Self {
        match m {
            ModeSpec::Exact => ErrorMode::Exact,
            ModeSpec::Successive => ErrorMode::Successive,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    pub width: Option<usize>,
    pub samples: Option<usize>,
}

/// Overrides of the trainer defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LmSpec {
    pub lambda0: Option<f64>,
    pub up: Option<f64>,
    pub down: Option<f64>,
    pub max_epochs: Option<usize>,
    pub loss_tol: Option<f64>,
    pub geodesic: Option<bool>,
}

/// Explicit Poisson interface problem. Either `u_minus`/`u_plus` (a
/// manufactured solution; everything else is derived) or
/// `f_minus`/`f_plus`/`gamma`/`rho`/`u_b` with the jumps written in the curve
/// parameter `s`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub geometry: GeometrySpec,
    pub bounds: Vec<[f64; 2]>,
    pub u_minus: Option<String>,
    pub u_plus: Option<String>,
    pub f_minus: Option<String>,
    pub f_plus: Option<String>,
    pub gamma: Option<String>,
    pub rho: Option<String>,
    pub u_b: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeometrySpec {
    Circle { r: f64 },
    Ellipse { a: f64, b: f64 },
    SuperEllipse { a: f64, b: f64 },
    Ellipsoid { a: f64, b: f64, c: f64 },
    /// Level set in `x, y[, z]`, parameterization in `s[, t]`.
    Custom {
        level_set: String,
        param: Option<Vec<String>>,
        param_ranges: Option<Vec<[f64; 2]>>,
    },
}

const VARS: [&str; 3] = ["x", "y", "z"];
const PARAMS: [&str; 2] = ["s", "t"];

impl GeometrySpec {
    pub fn build(&self, dim: usize) -> Result<InterfaceGeometry> {
        let g = match self {
            GeometrySpec::Circle { r } => InterfaceGeometry::circle(*r),
            GeometrySpec::Ellipse { a, b } => InterfaceGeometry::ellipse(*a, *b),
            GeometrySpec::SuperEllipse { a, b } => InterfaceGeometry::super_ellipse(*a, *b),
            GeometrySpec::Ellipsoid { a, b, c } => InterfaceGeometry::ellipsoid(*a, *b, *c),
            GeometrySpec::Custom { level_set, param, param_ranges } => {
                let phi = Expr::parse(level_set, &VARS[..dim])?;
                let param = param
                    .as_ref()
                    .map(|p| p.iter().map(|e| Expr::parse(e, &PARAMS[..dim - 1])).collect::<Result<Vec<_>, _>>())
                    .transpose()?;
                let ranges = param_ranges
                    .as_ref()
                    .map(|r| r.iter().map(|&[a, b]| (a, b)).collect())
                    .unwrap_or_default();
                InterfaceGeometry::new(Shape::Custom(CustomShape::new(dim, phi, param, ranges)?))
            }
        };
        ensure!(g.dim() == dim, "geometry is {}D but bounds are {dim}D", g.dim());
        Ok(g)
    }
}

impl ProblemSpec {
    pub fn build(&self) -> Result<PoissonInterfaceProblem> {
        let dim = self.bounds.len();
        ensure!(dim == 2 || dim == 3, "bounds must have 2 or 3 axes");
        let geometry = self.geometry.build(dim)?;
        let bounds: Vec<(f64, f64)> = self.bounds.iter().map(|&[a, b]| (a, b)).collect();
        let vars = &VARS[..dim];
        let parse = |name: &str, src: &Option<String>, vars: &[&str]| -> Result<Expr> {
            let src = src.as_ref().with_context(|| format!("problem.{name} is missing"))?;
            Expr::parse(src, vars).with_context(|| format!("problem.{name}"))
        };
        let problem = if self.u_minus.is_some() || self.u_plus.is_some() {
            problems::manufactured(
                geometry,
                bounds,
                &parse("u_minus", &self.u_minus, vars)?,
                &parse("u_plus", &self.u_plus, vars)?,
            )?
        } else {
            problems::with_parametric_jumps(
                geometry,
                bounds,
                &parse("f_minus", &self.f_minus, vars)?,
                &parse("f_plus", &self.f_plus, vars)?,
                &parse("gamma", &self.gamma, &["s"])?,
                &parse("rho", &self.rho, &["s"])?,
                &parse("u_b", &self.u_b, vars)?,
            )?
        };
        Ok(problem)
    }
}

/// A fully resolved experiment.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub name: String,
    pub kind: ExperimentKind,
    pub width: usize,
    pub samples: usize,
    pub lm: LmConfig,
    pub grids: Vec<usize>,
    pub mode: ErrorMode,
    pub retrain: bool,
    pub dump_fields: bool,
    pub out: PathBuf,
}

#[derive(Debug, Clone)]
pub enum ExperimentKind {
    Poisson(Box<PoissonInterfaceProblem>),
    Stokes(Box<StokesProblem>),
}

impl Experiment {
    pub fn net_config(&self) -> NetConfig {
        NetConfig { width: self.width, samples: self.samples, lm: self.lm.clone() }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// Config running a named preset with its published settings.
    pub fn for_preset(name: &str, seed: u64) -> Self {
        ExperimentConfig {
            seed,
            preset: Some(name.to_string()),
            problem: None,
            network: NetworkSpec::default(),
            lm: LmSpec::default(),
            grids: None,
            mode: None,
            retrain: false,
            dump_fields: false,
            out: None,
        }
    }

    pub fn resolve(&self) -> Result<Experiment> {
        let (name, kind, width, samples, grids, mode) = match (&self.preset, &self.problem) {
            (Some(_), Some(_)) => bail!("give either `preset` or `[problem]`, not both"),
            (None, None) => bail!("config needs `preset` or a `[problem]` table"),
            (Some(p), None) if p == STOKES_PRESET => (
                p.clone(),
                ExperimentKind::Stokes(Box::new(manufactured_stokes_example())),
                50,
                200,
                vec![64, 128, 256],
                ErrorMode::Exact,
            ),
            (Some(p), None) => {
                let pr = problems::preset(p)?;
                (
                    p.clone(),
                    ExperimentKind::Poisson(Box::new(pr.problem)),
                    pr.net.width,
                    pr.net.samples,
                    pr.grids,
                    pr.mode,
                )
            }
            (None, Some(spec)) => {
                let problem = spec.build()?;
                let mode = if problem.exact.is_some() { ErrorMode::Exact } else { ErrorMode::Successive };
                let grids = if problem.dim() == 3 { vec![16, 32, 64] } else { vec![64, 128, 256, 512] };
                ("custom".to_string(), ExperimentKind::Poisson(Box::new(problem)), 40, 200, grids, mode)
            }
        };
        let lm = self.lm_config();
        let grids = self.grids.clone().unwrap_or(grids);
        let mode = self.mode.map(ErrorMode::from).unwrap_or(mode);
        check_grids(&grids, mode)?;
        if let ExperimentKind::Poisson(p) = &kind {
            if mode == ErrorMode::Exact {
                ensure!(p.exact.is_some(), "exact-error mode needs a closed-form solution");
            }
            p.check_interior(grid_h(p.bounds[0], grids[0]))?;
        }
        if let ExperimentKind::Stokes(_) = &kind {
            ensure!(mode == ErrorMode::Exact, "Stokes runs support exact errors only");
        }
        Ok(Experiment {
            out: self.out.clone().unwrap_or_else(|| PathBuf::from("runs").join(&name)),
            name,
            kind,
            width: self.network.width.unwrap_or(width),
            samples: self.network.samples.unwrap_or(samples),
            lm,
            grids,
            mode,
            retrain: self.retrain,
            dump_fields: self.dump_fields,
        })
    }

    fn lm_config(&self) -> LmConfig {
        let d = LmConfig::default();
        let l = &self.lm;
        LmConfig {
            lambda0: l.lambda0.unwrap_or(d.lambda0),
            up_factor: l.up.unwrap_or(d.up_factor),
            down_factor: l.down.unwrap_or(d.down_factor),
            max_epochs: l.max_epochs.unwrap_or(d.max_epochs),
            loss_tol: l.loss_tol.unwrap_or(d.loss_tol),
            geodesic: l.geodesic.unwrap_or(d.geodesic),
            seed: self.seed,
        }
    }
}

fn grid_h(axis: (f64, f64), n: usize) -> f64 {
    (axis.1 - axis.0) / n as f64
}

fn check_grids(grids: &[usize], mode: ErrorMode) -> Result<()> {
    let min = if mode == ErrorMode::Successive { 2 } else { 1 };
    ensure!(grids.len() >= min, "sweep needs at least {min} grid(s)");
    ensure!(grids[0] >= 2, "grids need at least 2 cells per axis");
    for w in grids.windows(2) {
        ensure!(w[1] == 2 * w[0], "grid sweep must double each step, got {} then {}", w[0], w[1]);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_is_mandatory() {
        assert!(ExperimentConfig::from_toml("preset = \"example1\"").is_err());
        assert!(ExperimentConfig::from_toml("seed = 1\npreset = \"example1\"").is_ok());
    }

    #[test]
    fn presets_keep_published_settings() {
        let e = ExperimentConfig::for_preset("example3", 0).resolve().unwrap();
        assert_eq!((e.width, e.samples), (150, 300));
        assert_eq!(e.mode, ErrorMode::Successive);
        let e = ExperimentConfig::for_preset(STOKES_PRESET, 0).resolve().unwrap();
        assert_eq!((e.width, e.samples), (50, 200));
        assert_eq!(e.lm.max_epochs, 1000);
        assert_eq!(e.lm.loss_tol, 1e-12);
    }

    #[test]
    fn grids_must_double() {
        let mut c = ExperimentConfig::for_preset("example1", 0);
        c.grids = Some(vec![64, 100]);
        assert!(c.resolve().is_err());
        c.grids = Some(vec![64, 128, 256]);
        assert!(c.resolve().is_ok());
        c.grids = Some(vec![]);
        assert!(c.resolve().is_err());
    }

    #[test]
    fn explicit_manufactured_problem() {
        let c = ExperimentConfig::from_toml(
            r#"
            seed = 3
            grids = [16, 32]
            [problem]
            bounds = [[-1, 1], [-1, 1]]
            u_minus = "x^2 + y^2"
            u_plus = "1"
            [problem.geometry]
            kind = "circle"
            r = 0.5
            "#,
        )
        .unwrap();
        let e = c.resolve().unwrap();
        assert_eq!(e.mode, ErrorMode::Exact);
        assert_eq!(e.lm.seed, 3);
        let ExperimentKind::Poisson(p) = e.kind else { panic!() };
        assert_eq!((p.f_minus)(&[0.1, 0.2]), 4.0);
    }

    #[test]
    fn custom_geometry_with_parametric_jumps() {
        let c = ExperimentConfig::from_toml(
            r#"
            seed = 0
            grids = [32, 64]
            [problem]
            bounds = [[-1, 1], [-1, 1]]
            f_minus = "1"
            f_plus = "0"
            gamma = "sin(s)"
            rho = "0"
            u_b = "0"
            [problem.geometry]
            kind = "custom"
            level_set = "x^2 + 4*y^2 - 0.25"
            param = ["0.5*cos(s)", "0.25*sin(s)"]
            param_ranges = [[0, 6.283185307179586]]
            "#,
        )
        .unwrap();
        let e = c.resolve().unwrap();
        assert_eq!(e.mode, ErrorMode::Successive);
    }

    #[test]
    fn unknown_keys_and_conflicts_are_errors() {
        assert!(ExperimentConfig::from_toml("seed = 0\npreset = \"example1\"\nbogus = 1").is_err());
        let c = ExperimentConfig::for_preset("nope", 0);
        assert!(c.resolve().is_err());
    }
}
