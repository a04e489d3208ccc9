//! Poisson interface problems built from closed-form expressions, and the
//! benchmark presets.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::geometry::{InterfaceGeometry, InterfaceSample};
use crate::hybrid::{ExactSolution, InterfaceFn, NetConfig, PoissonInterfaceProblem, ScalarFn};

fn scalar(e: Expr) -> ScalarFn {
    e.into_fn()
}

fn piecewise(geom: &InterfaceGeometry, inside: Expr, outside: Expr) -> ScalarFn {
    let geom = geom.clone();
    let (i, o) = (inside.into_fn(), outside.into_fn());
    Arc::new(move |x: &[f64]| if geom.is_inside(x) { i(x) } else { o(x) })
}

/// Problem with known solution `u_minus` inside and `u_plus` outside the
/// interface. Sources, jumps and the boundary data follow by differentiation;
/// the outer boundary is assumed to lie in `Ω⁺`.
pub fn manufactured(
    geometry: InterfaceGeometry,
    bounds: Vec<(f64, f64)>,
    u_minus: &Expr,
    u_plus: &Expr,
) -> Result<PoissonInterfaceProblem> {
    let dim = bounds.len();
    check_vars(dim, &[u_minus, u_plus])?;
    let f_minus = u_minus.laplacian(dim);
    let f_plus = u_plus.laplacian(dim);
    let jump = u_plus.clone() - u_minus.clone();
    let jump_grad: Vec<ScalarFn> = jump.gradient(dim).into_iter().map(scalar).collect();
    let fj = scalar(f_plus.clone() - f_minus.clone());
    let gamma = scalar(jump);
    let grads_m: Vec<ScalarFn> = u_minus.gradient(dim).into_iter().map(scalar).collect();
    let grads_p: Vec<ScalarFn> = u_plus.gradient(dim).into_iter().map(scalar).collect();
    let exact_grad = grads_m
        .into_iter()
        .zip(grads_p)
        .map(|(gm, gp)| {
            let geom = geometry.clone();
            Arc::new(move |x: &[f64]| if geom.is_inside(x) { gm(x) } else { gp(x) }) as ScalarFn
        })
        .collect();
    Ok(PoissonInterfaceProblem {
        exact: Some(ExactSolution {
            value: piecewise(&geometry, u_minus.clone(), u_plus.clone()),
            gradient: exact_grad,
        }),
        f_minus: scalar(f_minus),
        f_plus: scalar(f_plus),
        gamma: Arc::new(move |s: &InterfaceSample| gamma(&s.point)),
        rho: Arc::new(move |s: &InterfaceSample| {
            jump_grad.iter().zip(&s.normal).map(|(g, n)| g(&s.point) * n).sum()
        }),
        fjump: Arc::new(move |s: &InterfaceSample| fj(&s.point)),
        u_b: scalar(u_plus.clone()),
        geometry,
        bounds,
    })
}

/// Problem given by its sources and by jumps `γ(s)`, `ρ(s)` in the curve
/// parameter `s` (2D, parameterized interface). `[[f]]` is `f⁺ − f⁻` at the
/// interface point.
pub fn with_parametric_jumps(
    geometry: InterfaceGeometry,
    bounds: Vec<(f64, f64)>,
    f_minus: &Expr,
    f_plus: &Expr,
    gamma_s: &Expr,
    rho_s: &Expr,
    u_b: &Expr,
) -> Result<PoissonInterfaceProblem> {
    let dim = bounds.len();
    if dim != 2 || !geometry.has_parameterization() {
        return Err(Error::UnsupportedGeometry);
    }
    check_vars(dim, &[f_minus, f_plus, u_b])?;
    check_vars(1, &[gamma_s, rho_s])?;
    let fj = scalar(f_plus.clone() - f_minus.clone());
    let on_param = |e: &Expr| -> InterfaceFn {
        let f = e.clone().into_fn();
        Arc::new(move |s: &InterfaceSample| f(&[s.param.expect("2D samples carry s")]))
    };
    Ok(PoissonInterfaceProblem {
        f_minus: scalar(f_minus.clone()),
        f_plus: scalar(f_plus.clone()),
        gamma: on_param(gamma_s),
        rho: on_param(rho_s),
        fjump: Arc::new(move |s: &InterfaceSample| fj(&s.point)),
        u_b: scalar(u_b.clone()),
        exact: None,
        geometry,
        bounds,
    })
}

fn check_vars(dim: usize, exprs: &[&Expr]) -> Result<()> {
    for e in exprs {
        if let Some(v) = e.max_var() {
            if v >= dim {
                return Err(Error::Expr(format!("expression `{e}` uses variable {v} in {dim}D")));
            }
        }
    }
    Ok(())
}

/// How a preset measures its errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorMode {
    Exact,
    /// `‖u_h − u_{h/2}‖∞`; needs one extra finer grid.
    Successive,
}

#[derive(Debug, Clone)]
pub struct Preset {
    pub name: &'static str,
    pub problem: PoissonInterfaceProblem,
    pub net: NetConfig,
    /// Cells per axis, each twice the previous.
    pub grids: Vec<usize>,
    pub mode: ErrorMode,
}

pub const PRESET_NAMES: [&str; 4] = ["example1", "example2", "example3", "example4"];

const XY: &[&str] = &["x", "y"];
const XYZ: &[&str] = &["x", "y", "z"];

fn parse(src: &str, vars: &[&str]) -> Expr {
    Expr::parse(src, vars).expect("preset expressions are valid")
}

fn square() -> Vec<(f64, f64)> {
    vec![(-1.0, 1.0); 2]
}

/// Ellipse `(x/0.8)² + (y/0.2)² = 1` in `[−1,1]²`, `u = eˣ cos y` inside and
/// `e^{x²} cos y` outside.
pub fn example1() -> Preset {
    let problem = manufactured(
        InterfaceGeometry::ellipse(0.8, 0.2),
        square(),
        &parse("exp(x)*cos(y)", XY),
        &parse("exp(x^2)*cos(y)", XY),
    )
    .expect("valid preset");
    Preset {
        name: "example1",
        problem,
        net: NetConfig::new(40, 200),
        grids: vec![64, 128, 256, 512],
        mode: ErrorMode::Exact,
    }
}

/// Example 1's solution around the super-ellipse
/// `(x/√0.7)⁴ + (y/√0.1)⁴ = 1`.
pub fn example2() -> Preset {
    let problem = manufactured(
        InterfaceGeometry::super_ellipse(0.7f64.sqrt(), 0.1f64.sqrt()),
        square(),
        &parse("exp(x)*cos(y)", XY),
        &parse("exp(x^2)*cos(y)", XY),
    )
    .expect("valid preset");
    Preset {
        name: "example2",
        problem,
        net: NetConfig::new(40, 200),
        grids: vec![64, 128, 256, 512],
        mode: ErrorMode::Exact,
    }
}

/// No closed-form solution: ellipse `(√0.7 cos s, √0.1 sin s)`,
/// `f = e^{x sin y}` / `e^{y cos x}`, `γ = sin s`, `ρ = cos s`, `u = 0` on
/// the walls. Measured by successive errors.
pub fn example3() -> Preset {
    let problem = with_parametric_jumps(
        InterfaceGeometry::ellipse(0.7f64.sqrt(), 0.1f64.sqrt()),
        square(),
        &parse("exp(x*sin(y))", XY),
        &parse("exp(y*cos(x))", XY),
        &parse("sin(s)", &["s"]),
        &parse("cos(s)", &["s"]),
        &Expr::constant(0.0),
    )
    .expect("valid preset");
    Preset {
        name: "example3",
        problem,
        net: NetConfig::new(150, 300),
        grids: vec![40, 80, 160, 320, 640],
        mode: ErrorMode::Successive,
    }
}

/// Ellipsoid `(x/0.7)² + (y/0.5)² + (z/0.3)² = 1` in `[−1,1]³`,
/// `u = e^{x+y+z}` inside and `sin x sin y sin z` outside.
pub fn example4() -> Preset {
    let problem = manufactured(
        InterfaceGeometry::ellipsoid(0.7, 0.5, 0.3),
        vec![(-1.0, 1.0); 3],
        &parse("exp(x+y+z)", XYZ),
        &parse("sin(x)*sin(y)*sin(z)", XYZ),
    )
    .expect("valid preset");
    Preset {
        name: "example4",
        problem,
        net: NetConfig::new(40, 200),
        grids: vec![16, 32, 64],
        mode: ErrorMode::Exact,
    }
}

pub fn preset(name: &str) -> Result<Preset> {
    match name {
        "example1" => Ok(example1()),
        "example2" => Ok(example2()),
        "example3" => Ok(example3()),
        "example4" => Ok(example4()),
        other => Err(Error::InvalidArgument(format!(
            "unknown preset `{other}` (expected one of {PRESET_NAMES:?})"
        ))),
    }
}
