//! 2D Stokes flow with an interfacial force, solved on a MAC grid by the
//! jump reformulation: a pressure Poisson interface problem, then one
//! Poisson interface problem per velocity component.
//!
//! Channel order of the shared 3-output net is `(u1, u2, p)`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::fast_poisson::{
    solve_dirichlet_staggered, solve_neumann_cell, Alignment, GridField, GridSpec, WallData,
};
use crate::geometry::{InterfaceGeometry, InterfaceSample};
use crate::hybrid::ScalarFn;
use crate::shallow_net::ShallowNet;
use crate::training::{lm_fit, JumpDataset, JumpValues, LmConfig, TrainReport};

/// Function of the interface arclength `s`.
pub type CurveFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

pub const U1: usize = 0;
pub const U2: usize = 1;
pub const P: usize = 2;

/// Closed-form velocity and pressure (piecewise across the interface).
#[derive(Clone)]
pub struct StokesExact {
    pub u: [ScalarFn; 2],
    pub p: ScalarFn,
    pub grad_p: [ScalarFn; 2],
}

/// `−∇p + μΔu + g = 0`, `∇·u = 0` off the interface, `u = u_b` on the walls,
/// with `[[p]] = F_n`, `[[u]] = 0`, `[[∂ₙu]] = −F_τ τ / μ` on `Γ`.
///
/// The interface parameter must be arclength (checked on construction).
#[derive(Clone)]
pub struct StokesProblem {
    pub mu: f64,
    pub geometry: InterfaceGeometry,
    pub bounds: Vec<(f64, f64)>,
    pub f_tau: CurveFn,
    pub f_n: CurveFn,
    pub df_tau_ds: CurveFn,
    pub df_n_ds: CurveFn,
    pub g_minus: [ScalarFn; 2],
    pub g_plus: [ScalarFn; 2],
    pub div_g_minus: ScalarFn,
    pub div_g_plus: ScalarFn,
    pub u_b: [ScalarFn; 2],
    /// `∇p` on the walls, the source of the pressure Neumann data.
    pub wall_grad_p: [ScalarFn; 2],
    pub exact: Option<StokesExact>,
}

impl std::fmt::Debug for StokesProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StokesProblem")
            .field("mu", &self.mu)
            .field("geometry", &self.geometry)
            .field("bounds", &self.bounds)
            .field("has_exact", &self.exact.is_some())
            .finish_non_exhaustive()
    }
}

/// Closed forms of a manufactured Stokes problem.
#[derive(Debug, Clone)]
pub struct ManufacturedStokes {
    pub u_minus: [Expr; 2],
    pub u_plus: [Expr; 2],
    pub p_minus: Expr,
    pub p_plus: Expr,
    /// Force components in the variable `s`.
    pub f_tau: Expr,
    pub f_n: Expr,
}

impl StokesProblem {
    /// Builds the problem from closed forms, with `g = ∇p − μΔu` per region,
    /// wall data from the outer solution.
    pub fn manufactured(
        geometry: InterfaceGeometry,
        bounds: Vec<(f64, f64)>,
        mu: f64,
        forms: &ManufacturedStokes,
    ) -> Result<Self> {
        if !(mu > 0.0) {
            return Err(Error::InvalidArgument("viscosity must be > 0".into()));
        }
        if bounds.len() != 2 || geometry.dim() != 2 || !geometry.has_parameterization() {
            return Err(Error::UnsupportedGeometry);
        }
        check_arclength(&geometry)?;
        let g_of = |u: &[Expr; 2], p: &Expr| -> [Expr; 2] {
            [0, 1].map(|i| p.diff(i) - Expr::constant(mu) * u[i].laplacian(2))
        };
        let gm = g_of(&forms.u_minus, &forms.p_minus);
        let gp = g_of(&forms.u_plus, &forms.p_plus);
        let div = |g: &[Expr; 2]| (g[0].diff(0) + g[1].diff(1)).into_fn();
        let curve = |e: &Expr| -> CurveFn {
            let f = e.clone().into_fn();
            Arc::new(move |s| f(&[s]))
        };
        let piece = |inside: &Expr, outside: &Expr| -> ScalarFn {
            let geom = geometry.clone();
            let (i, o) = (inside.clone().into_fn(), outside.clone().into_fn());
            Arc::new(move |x: &[f64]| if geom.is_inside(x) { i(x) } else { o(x) })
        };
        let exact = StokesExact {
            u: [0, 1].map(|i| piece(&forms.u_minus[i], &forms.u_plus[i])),
            p: piece(&forms.p_minus, &forms.p_plus),
            grad_p: [0, 1].map(|i| piece(&forms.p_minus.diff(i), &forms.p_plus.diff(i))),
        };
        Ok(StokesProblem {
            mu,
            f_tau: curve(&forms.f_tau),
            f_n: curve(&forms.f_n),
            df_tau_ds: curve(&forms.f_tau.diff(0)),
            df_n_ds: curve(&forms.f_n.diff(0)),
            div_g_minus: div(&gm),
            div_g_plus: div(&gp),
            g_minus: gm.map(Expr::into_fn),
            g_plus: gp.map(Expr::into_fn),
            u_b: forms.u_plus.clone().map(Expr::into_fn),
            wall_grad_p: [forms.p_plus.diff(0).into_fn(), forms.p_plus.diff(1).into_fn()],
            exact: Some(exact),
            geometry,
            bounds,
        })
    }

    pub fn g(&self, x: &[f64]) -> [f64; 2] {
        let g = if self.geometry.is_inside(x) { &self.g_minus } else { &self.g_plus };
        [g[0](x), g[1](x)]
    }

    pub fn div_g(&self, x: &[f64]) -> f64 {
        if self.geometry.is_inside(x) {
            (self.div_g_minus)(x)
        } else {
            (self.div_g_plus)(x)
        }
    }

    fn g_jump(&self, x: &[f64]) -> [f64; 2] {
        [0, 1].map(|i| self.g_plus[i](x) - self.g_minus[i](x))
    }
}

fn check_arclength(geom: &InterfaceGeometry) -> Result<()> {
    for k in 0..16 {
        let s = k as f64 * std::f64::consts::PI / 8.0;
        let d = geom.param_derivative(s)?;
        if (d[0].hypot(d[1]) - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(
                "Stokes interface must be parameterized by arclength".into(),
            ));
        }
    }
    Ok(())
}

fn sample_s(s: &InterfaceSample) -> Result<(f64, [f64; 2])> {
    match (s.param, s.tangent) {
        (Some(p), Some(t)) => Ok((p, t)),
        _ => Err(Error::UnsupportedGeometry),
    }
}

/// `(γ_p, ρ_p) = (F_n, ∂ₛF_τ + [[g]]·n)` at an interface sample.
pub fn pressure_jump_data(problem: &StokesProblem, sample: &InterfaceSample) -> Result<(f64, f64)> {
    let (s, _) = sample_s(sample)?;
    let gj = problem.g_jump(&sample.point);
    let gn = gj[0] * sample.normal[0] + gj[1] * sample.normal[1];
    Ok(((problem.f_n)(s), (problem.df_tau_ds)(s) + gn))
}

/// `[[∇p]] = ∂ₛ[[p]] τ + [[∂ₙp]] n`.
pub fn pressure_gradient_jump(problem: &StokesProblem, sample: &InterfaceSample) -> Result<[f64; 2]> {
    let (s, t) = sample_s(sample)?;
    let (_, rho_p) = pressure_jump_data(problem, sample)?;
    let dfn = (problem.df_n_ds)(s);
    Ok([0, 1].map(|i| dfn * t[i] + rho_p * sample.normal[i]))
}

/// Jump targets of both velocity components: `γ = 0`, `ρ = −F_τ τᵢ / μ`,
/// `[[rhs]] = ([[∂ᵢp]] − [[gᵢ]]) / μ`.
pub fn velocity_jump_data(problem: &StokesProblem, sample: &InterfaceSample) -> Result<[JumpValues; 2]> {
    let (s, t) = sample_s(sample)?;
    let gp = pressure_gradient_jump(problem, sample)?;
    let gj = problem.g_jump(&sample.point);
    let ft = (problem.f_tau)(s);
    Ok([0, 1].map(|i| JumpValues {
        gamma: 0.0,
        rho: -ft * t[i] / problem.mu,
        fjump: (gp[i] - gj[i]) / problem.mu,
    }))
}

/// Joint dataset for the `(u1, u2, p)` net.
pub fn stokes_dataset(problem: &StokesProblem, m: usize, seed: u64) -> Result<JumpDataset> {
    let samples = problem.geometry.sample_interface(m, seed)?;
    let (mut gamma, mut rho, mut fjump) = (vec![], vec![], vec![]);
    for s in &samples {
        let (gp, rp) = pressure_jump_data(problem, s)?;
        let p = JumpValues {
            gamma: gp,
            rho: rp,
            fjump: (problem.div_g_plus)(&s.point) - (problem.div_g_minus)(&s.point),
        };
        let [a, b] = velocity_jump_data(problem, s)?;
        for t in [a, b, p] {
            gamma.push(t.gamma);
            rho.push(t.rho);
            fjump.push(t.fjump);
        }
    }
    JumpDataset::new(samples, 3, gamma, rho, fjump)
}

/// Staggered grids sharing `h` and bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct MacLayout {
    /// Cell centers.
    pub p: GridSpec,
    /// x-nodes, y-cells.
    pub u1: GridSpec,
    /// x-cells, y-nodes.
    pub u2: GridSpec,
}

impl MacLayout {
    pub fn new(bounds: &[(f64, f64)], n: usize) -> Result<Self> {
        use Alignment::{Cell, Node};
        Ok(MacLayout {
            p: GridSpec::new(bounds, n, &[Cell, Cell])?,
            u1: GridSpec::new(bounds, n, &[Node, Cell])?,
            u2: GridSpec::new(bounds, n, &[Cell, Node])?,
        })
    }

    pub fn velocity(&self, component: usize) -> &GridSpec {
        if component == U1 {
            &self.u1
        } else {
            &self.u2
        }
    }

    pub fn n(&self) -> usize {
        self.p.n()
    }

    pub fn h(&self) -> f64 {
        self.p.h()
    }
}

/// `∇·g` at cell centers and outward `∂ₙp` on the walls.
pub fn pressure_poisson_rhs(problem: &StokesProblem, layout: &MacLayout) -> Result<(GridField, WallData)> {
    let rhs = GridField::from_fn(layout.p.clone(), |x| problem.div_g(x))?;
    let flux = WallData::from_fn(&layout.p, |axis, x| {
        let sign = if x[axis] >= problem.bounds[axis].1 { 1.0 } else { -1.0 };
        sign * (problem.wall_grad_p[axis])(x)
    })?;
    Ok((rhs, flux))
}

/// Singular part of one net channel, `0` outside.
fn channel_field(net: &ShallowNet, o: usize, spec: &GridSpec, geom: &InterfaceGeometry) -> Result<GridField> {
    GridField::from_fn(spec.clone(), |x| if geom.is_inside(x) { net.eval_output(x, o) } else { 0.0 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PressureSolution {
    pub v: GridField,
    pub w: GridField,
    /// `v + w`, shifted to the exact mean when an exact solution is known.
    pub p: GridField,
    /// `∂₁p` on the u1 grid and `∂₂p` on the u2 grid (wall nodes hold 0).
    pub grad: [GridField; 2],
    /// Compatibility defect removed by the Neumann solve.
    pub defect: f64,
}

pub fn solve_pressure(problem: &StokesProblem, layout: &MacLayout, net: &ShallowNet) -> Result<PressureSolution> {
    let geom = &problem.geometry;
    let (mut rhs, flux) = pressure_poisson_rhs(problem, layout)?;
    let spec = &layout.p;
    let vals = rhs.values_mut();
    spec.for_each_point(|flat, _, x| {
        if geom.is_inside(x) {
            vals[flat] -= net.laplacian_output(x, P);
        }
    });
    let sol = solve_neumann_cell(spec, &rhs, &flux)?;
    let w = sol.field;
    let v = channel_field(net, P, spec, geom)?;
    let mut p: Vec<f64> = v.values().iter().zip(w.values()).map(|(a, b)| a + b).collect();
    if let Some(exact) = &problem.exact {
        let mut target = 0.0;
        spec.for_each_point(|_, _, x| target += (exact.p)(x));
        let shift = (target - p.iter().sum::<f64>()) / p.len() as f64;
        p.iter_mut().for_each(|q| *q += shift);
    }
    let p = GridField::new(spec.clone(), p)?;

    let h = layout.h();
    let grad = [U1, U2].map(|axis| {
        let vspec = layout.velocity(axis);
        let mut out = vec![0.0; vspec.len()];
        let mut g = [0.0; 2];
        vspec.for_each_point(|flat, idx, x| {
            if vspec.is_boundary(idx) {
                return;
            }
            // Velocity node `i` along `axis` sits between cells `i - 1` and `i`.
            let mut lo = [idx[0], idx[1]];
            lo[axis] -= 1;
            let hi = [idx[0], idx[1]];
            let mut d = (w.get(&hi) - w.get(&lo)) / h;
            if geom.is_inside(x) {
                net.gradient_output(x, P, &mut g);
                d += g[axis];
            }
            out[flat] = d;
        });
        GridField::new(vspec.clone(), out)
    });
    let [g1, g2] = grad;
    Ok(PressureSolution { v, w, p, grad: [g1?, g2?], defect: sol.defect })
}

#[derive(Debug, Clone, PartialEq)]
pub struct VelocityComponent {
    pub v: GridField,
    pub w: GridField,
    pub u: GridField,
}

/// Solves `Δuᵢ = (∂ᵢp − gᵢ)/μ` for both components with the given pressure
/// gradient on the velocity grids.
pub fn solve_velocity(
    problem: &StokesProblem,
    layout: &MacLayout,
    net: &ShallowNet,
    grad_p: &[GridField; 2],
) -> Result<[VelocityComponent; 2]> {
    let geom = &problem.geometry;
    let solve_one = |c: usize| -> Result<VelocityComponent> {
        let spec = layout.velocity(c);
        if grad_p[c].spec() != spec {
            return Err(Error::AlignmentMismatch("pressure gradient off the velocity grid".into()));
        }
        let gp = grad_p[c].values();
        let mut rhs = vec![0.0; spec.len()];
        spec.for_each_point(|flat, idx, x| {
            if spec.is_boundary(idx) {
                return;
            }
            let mut r = (gp[flat] - problem.g(x)[c]) / problem.mu;
            if geom.is_inside(x) {
                r -= net.laplacian_output(x, c);
            }
            rhs[flat] = r;
        });
        let rhs = GridField::new(spec.clone(), rhs)?;
        let walls = WallData::from_fn(spec, |_, x| (problem.u_b[c])(x))?;
        let w = solve_dirichlet_staggered(spec, &rhs, &walls)?;
        let v = channel_field(net, c, spec, geom)?;
        let u = v.values().iter().zip(w.values()).map(|(a, b)| a + b).collect();
        Ok(VelocityComponent { u: GridField::new(spec.clone(), u)?, v, w })
    };
    Ok([solve_one(U1)?, solve_one(U2)?])
}

/// Plain MAC divergence at cell centers.
pub fn divergence(u1: &GridField, u2: &GridField) -> Result<GridField> {
    let s1 = u1.spec();
    let s2 = u2.spec();
    use Alignment::{Cell, Node};
    if s1.alignments() != [Node, Cell] || s2.alignments() != [Cell, Node] || s1.n() != s2.n() || s1.bounds() != s2.bounds() {
        return Err(Error::AlignmentMismatch("divergence needs u1 on (node, cell) and u2 on (cell, node)".into()));
    }
    let spec = GridSpec::new(s1.bounds(), s1.n(), &[Cell, Cell])?;
    let h = spec.h();
    GridField::new(spec.clone(), {
        let mut out = vec![0.0; spec.len()];
        spec.for_each_point(|flat, idx, _| {
            let (i, j) = (idx[0], idx[1]);
            out[flat] = (u1.get(&[i + 1, j]) - u1.get(&[i, j])) / h + (u2.get(&[i, j + 1]) - u2.get(&[i, j])) / h;
        });
        out
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StokesSolution {
    pub layout: MacLayout,
    pub net: ShallowNet,
    pub report: TrainReport,
    pub pressure: PressureSolution,
    pub velocity: [VelocityComponent; 2],
}

impl StokesSolution {
    /// Divergence of `u` at cell centers: MAC divergence of the regular parts
    /// plus the analytic divergence of the singular parts inside.
    ///
    /// Differencing `u` itself across the interface picks up the jump of
    /// `∂ₙu`, an `O(1)` error at cut cells.
    pub fn divergence(&self, geom: &InterfaceGeometry) -> Result<GridField> {
        let mut d = divergence(&self.velocity[U1].w, &self.velocity[U2].w)?;
        let spec = d.spec().clone();
        let vals = d.values_mut();
        let mut g = [0.0; 2];
        spec.for_each_point(|flat, _, x| {
            if geom.is_inside(x) {
                self.net.gradient_output(x, U1, &mut g);
                let a = g[0];
                self.net.gradient_output(x, U2, &mut g);
                vals[flat] += a + g[1];
            }
        });
        Ok(d)
    }
}

/// Trains the `(u1, u2, p)` net on `samples` interface points.
pub fn train_stokes(
    problem: &StokesProblem,
    width: usize,
    samples: usize,
    cfg: &LmConfig,
) -> Result<(ShallowNet, TrainReport)> {
    let data = stokes_dataset(problem, samples, cfg.seed)?;
    let net0 = ShallowNet::random(2, width, 3, cfg.seed)?;
    lm_fit(&net0, &data, cfg)
}

/// Pressure then velocity on an `n × n` MAC grid with a trained net.
pub fn solve_stokes_with_net(
    problem: &StokesProblem,
    n: usize,
    net: &ShallowNet,
    report: &TrainReport,
) -> Result<StokesSolution> {
    if net.n_outputs() != 3 || net.input_dim() != 2 {
        return Err(Error::InvalidArgument("Stokes needs a 2D net with outputs (u1, u2, p)".into()));
    }
    let layout = MacLayout::new(&problem.bounds, n)?;
    let pressure = solve_pressure(problem, &layout, net)?;
    let velocity = solve_velocity(problem, &layout, net, &pressure.grad)?;
    Ok(StokesSolution { layout, net: net.clone(), report: report.clone(), pressure, velocity })
}

/// Max-norm errors; velocity and pressure gradient over interior nodes,
/// pressure and divergence over all cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StokesErrors {
    pub u1: f64,
    pub u2: f64,
    pub p: f64,
    pub div_u: f64,
    pub grad_p: f64,
}

impl StokesErrors {
    pub fn as_array(&self) -> [f64; 5] {
        [self.u1, self.u2, self.p, self.div_u, self.grad_p]
    }
}

pub fn stokes_errors(sol: &StokesSolution, problem: &StokesProblem) -> Result<StokesErrors> {
    let exact = problem
        .exact
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("problem has no exact solution".into()))?;
    let interior_err = |f: &GridField, e: &ScalarFn| {
        let spec = f.spec();
        let mut m = 0.0f64;
        spec.for_each_point(|flat, idx, x| {
            if !spec.is_boundary(idx) {
                m = m.max((f.values()[flat] - e(x)).abs());
            }
        });
        m
    };
    let u1 = interior_err(&sol.velocity[U1].u, &exact.u[0]);
    let u2 = interior_err(&sol.velocity[U2].u, &exact.u[1]);
    let p = interior_err(&sol.pressure.p, &exact.p);
    let div_u = sol.divergence(&problem.geometry)?.max_abs();
    let grad_p = interior_err(&sol.pressure.grad[0], &exact.grad_p[0])
        .max(interior_err(&sol.pressure.grad[1], &exact.grad_p[1]));
    Ok(StokesErrors { u1, u2, p, div_u, grad_p })
}

/// Closed forms of the benchmark: unit circle, `F = 2 sin 3s τ − cos³ s n`,
/// velocity from polar forms rewritten in `x, y`, pressure
/// `x³ + cos πx cos πy` inside and `cos πx cos πy` outside.
pub fn manufactured_stokes_forms() -> ManufacturedStokes {
    let xy = &["x", "y"];
    let e = |s: &str| Expr::parse(s, xy).expect("valid closed form");
    // q = r², c2 = r² cos 2θ, s2 = r² sin 2θ, c4 = r⁴ cos 4θ, s4 = r⁴ sin 4θ.
    let sub = |s: &str| {
        s.replace("c2", "(x^2-y^2)")
            .replace("s2", "(2*x*y)")
            .replace("c4", "(x^4-6*x^2*y^2+y^4)")
            .replace("s4", "(4*x^3*y-4*x*y^3)")
            .replace('q', "(x^2+y^2)")
    };
    ManufacturedStokes {
        u_minus: [
            e(&sub("c2/8 + c4/16 - q*c2/4")),
            e(&sub("-s2/8 + s4/16 + q*s2/4")),
        ],
        u_plus: [
            e(&sub("-c2/(8*q^2) + 5*c4/(16*q^4) - c4/(4*q^3)")),
            e(&sub("s2/(8*q^2) + 5*s4/(16*q^4) - s4/(4*q^3)")),
        ],
        p_minus: e("x^3 + cos(pi*x)*cos(pi*y)"),
        p_plus: e("cos(pi*x)*cos(pi*y)"),
        f_tau: Expr::parse("2*sin(3*s)", &["s"]).expect("valid"),
        f_n: Expr::parse("-cos(s)^3", &["s"]).expect("valid"),
    }
}

/// The benchmark on `[−2,2]²` with `μ = 1`.
pub fn manufactured_stokes_example() -> StokesProblem {
    let forms = manufactured_stokes_forms();
    StokesProblem::manufactured(InterfaceGeometry::circle(1.0), vec![(-2.0, 2.0); 2], 1.0, &forms)
        .expect("valid example")
}
