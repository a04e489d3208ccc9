//! Three-step hybrid solver for Poisson interface problems.
//!
//! 1. Fit a shallow net `V` to the interface jumps.
//! 2. Solve the regular problem `Δw = f − ΔV·1_{Ω⁻}` with a fast direct solver.
//! 3. Recover `u = v + w`, with `v = V` inside the interface and `0` outside.

use std::sync::Arc;

use crate::convergence::estimate_order;
use crate::error::{Error, Result};
use crate::fast_poisson::{solve_dirichlet, Alignment, GridField, GridSpec};
use crate::geometry::{InterfaceGeometry, InterfaceSample};
use crate::shallow_net::ShallowNet;
use crate::training::{lm_fit, JumpDataset, JumpValues, LmConfig, TrainReport};

pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
/// Jump data evaluated at an interface sample.
pub type InterfaceFn = Arc<dyn Fn(&InterfaceSample) -> f64 + Send + Sync>;

/// Closed-form solution (already piecewise across the interface).
#[derive(Clone)]
pub struct ExactSolution {
    pub value: ScalarFn,
    pub gradient: Vec<ScalarFn>,
}

/// `Δu = f` in `Ω \ Γ`, `[[u]] = γ`, `[[∂ₙu]] = ρ` on `Γ`, `u = u_b` on `∂Ω`.
/// Jumps are taken as outside minus inside, the normal points outward.
#[derive(Clone)]
pub struct PoissonInterfaceProblem {
    pub geometry: InterfaceGeometry,
    pub bounds: Vec<(f64, f64)>,
    pub f_minus: ScalarFn,
    pub f_plus: ScalarFn,
    pub gamma: InterfaceFn,
    pub rho: InterfaceFn,
    pub fjump: InterfaceFn,
    pub u_b: ScalarFn,
    pub exact: Option<ExactSolution>,
}

impl std::fmt::Debug for PoissonInterfaceProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PoissonInterfaceProblem")
            .field("geometry", &self.geometry)
            .field("bounds", &self.bounds)
            .field("has_exact", &self.exact.is_some())
            .finish_non_exhaustive()
    }
}

impl PoissonInterfaceProblem {
    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    /// Source term on the side of the interface containing `x`.
    pub fn source(&self, x: &[f64]) -> f64 {
        if self.geometry.is_inside(x) {
            (self.f_minus)(x)
        } else {
            (self.f_plus)(x)
        }
    }

    /// Node-aligned grid over the problem domain.
    pub fn grid(&self, n: usize) -> Result<GridSpec> {
        GridSpec::nodes(&self.bounds, n)
    }

    /// Checks that the interface keeps a distance of at least `2h` from the
    /// outer boundary, measured on a deterministic sample of `Γ`.
    pub fn check_interior(&self, h: f64) -> Result<()> {
        if self.geometry.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: self.geometry.dim() });
        }
        let samples = self.geometry.sample_interface(2000, 0)?;
        let mut dist = f64::INFINITY;
        for s in &samples {
            for (x, &(a, b)) in s.point.iter().zip(&self.bounds) {
                dist = dist.min(x - a).min(b - x);
            }
        }
        if dist < 2.0 * h {
            return Err(Error::InvalidArgument(format!(
                "interface comes within {dist:.3e} of the boundary (< 2h = {:.3e})",
                2.0 * h
            )));
        }
        Ok(())
    }

    /// Samples `m` interface points and their jump targets.
    pub fn jump_dataset(&self, m: usize, seed: u64) -> Result<JumpDataset> {
        let samples = self.geometry.sample_interface(m, seed)?;
        JumpDataset::from_fn(samples, 1, |s, _| JumpValues {
            gamma: (self.gamma)(s),
            rho: (self.rho)(s),
            fjump: (self.fjump)(s),
        })
    }
}

/// Size of `V` and its training set.
#[derive(Debug, Clone, PartialEq)]
pub struct NetConfig {
    /// Hidden width `m`.
    pub width: usize,
    /// Interface sample count `M`.
    pub samples: usize,
    pub lm: LmConfig,
}

impl NetConfig {
    pub fn new(width: usize, samples: usize) -> Self {
        NetConfig { width, samples, lm: LmConfig::default() }
    }
}

/// Step 1: fits `V` to the problem's jumps. Sampling and initialization both
/// use `cfg.lm.seed`.
pub fn train(problem: &PoissonInterfaceProblem, cfg: &NetConfig) -> Result<(ShallowNet, TrainReport)> {
    let data = problem.jump_dataset(cfg.samples, cfg.lm.seed)?;
    let net0 = ShallowNet::random(problem.dim(), cfg.width, 1, cfg.lm.seed)?;
    lm_fit(&net0, &data, &cfg.lm)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HybridSolution {
    pub net: ShallowNet,
    pub report: TrainReport,
    pub v: GridField,
    pub w: GridField,
    pub u: GridField,
}

impl HybridSolution {
    pub fn spec(&self) -> &GridSpec {
        self.u.spec()
    }
}

fn require_nodes(spec: &GridSpec) -> Result<()> {
    if spec.alignments().iter().any(|&a| a != Alignment::Node) {
        return Err(Error::AlignmentMismatch("hybrid solver needs a node-aligned grid".into()));
    }
    Ok(())
}

/// `V` at nodes inside the interface, `0` elsewhere.
pub fn build_singular_field(net: &ShallowNet, spec: &GridSpec, geom: &InterfaceGeometry) -> Result<GridField> {
    require_nodes(spec)?;
    GridField::from_fn(spec.clone(), |p| {
        if geom.is_inside(p) {
            net.eval_output(p, 0)
        } else {
            0.0
        }
    })
}

/// Right-hand side `f − ΔV` (inside) / `f` (outside) and the boundary field
/// carrying `u_b` on the walls.
pub fn assemble_regular_rhs(
    problem: &PoissonInterfaceProblem,
    net: &ShallowNet,
    spec: &GridSpec,
) -> Result<(GridField, GridField)> {
    require_nodes(spec)?;
    let rhs = GridField::from_fn(spec.clone(), |p| {
        if problem.geometry.is_inside(p) {
            (problem.f_minus)(p) - net.laplacian_output(p, 0)
        } else {
            (problem.f_plus)(p)
        }
    })?;
    let mut boundary = GridField::zeros(spec.clone());
    let vals = boundary.values_mut();
    spec.for_each_point(|flat, idx, p| {
        if spec.is_boundary(idx) {
            vals[flat] = (problem.u_b)(p);
        }
    });
    Ok((rhs, boundary))
}

/// Steps 2 and 3 with an already trained net.
pub fn solve_with_net(
    problem: &PoissonInterfaceProblem,
    net: &ShallowNet,
    report: &TrainReport,
    spec: &GridSpec,
) -> Result<HybridSolution> {
    let v = build_singular_field(net, spec, &problem.geometry)?;
    let (rhs, boundary) = assemble_regular_rhs(problem, net, spec)?;
    let w = solve_dirichlet(spec, &rhs, &boundary)?;
    let u_vals = v.values().iter().zip(w.values()).map(|(a, b)| a + b).collect();
    let u = GridField::new(spec.clone(), u_vals)?;
    Ok(HybridSolution { net: net.clone(), report: report.clone(), v, w, u })
}

/// Full pipeline. Non-convergence of the trainer is flagged in
/// `report.converged`, not raised.
pub fn solve(problem: &PoissonInterfaceProblem, cfg: &NetConfig, spec: &GridSpec) -> Result<HybridSolution> {
    let (net, report) = train(problem, cfg)?;
    solve_with_net(problem, &net, &report, spec)
}

/// `∇u` at interior nodes: central differences of `w` plus the analytic
/// gradient of `V` at inside nodes. Wall nodes hold `0`.
pub fn gradient(sol: &HybridSolution, geom: &InterfaceGeometry) -> Result<Vec<GridField>> {
    let spec = sol.spec();
    let dim = spec.dim();
    let shape = spec.shape();
    let mut strides = vec![1; dim];
    for a in (0..dim - 1).rev() {
        strides[a] = strides[a + 1] * shape[a + 1];
    }
    let two_h = 2.0 * spec.h();
    let w = sol.w.values();
    let mut out = vec![vec![0.0; spec.len()]; dim];
    let mut g = vec![0.0; dim];
    spec.for_each_point(|flat, idx, p| {
        if spec.is_boundary(idx) {
            return;
        }
        if geom.is_inside(p) {
            sol.net.gradient_output(p, 0, &mut g);
        } else {
            g.iter_mut().for_each(|x| *x = 0.0);
        }
        for a in 0..dim {
            out[a][flat] = (w[flat + strides[a]] - w[flat - strides[a]]) / two_h + g[a];
        }
    });
    out.into_iter().map(|v| GridField::new(spec.clone(), v)).collect()
}

/// Max-norm errors of `u` (all nodes) and of `∇u` (interior nodes, max over
/// components).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    pub u: f64,
    pub grad: f64,
}

/// Errors against the problem's closed-form solution.
pub fn exact_errors(sol: &HybridSolution, problem: &PoissonInterfaceProblem) -> Result<ErrorNorms> {
    let exact = problem
        .exact
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("problem has no exact solution".into()))?;
    let spec = sol.spec();
    let grad = gradient(sol, &problem.geometry)?;
    let u = sol.u.values();
    let (mut eu, mut eg) = (0.0f64, 0.0f64);
    spec.for_each_point(|flat, idx, p| {
        eu = eu.max((u[flat] - (exact.value)(p)).abs());
        if !spec.is_boundary(idx) {
            for (gf, ge) in grad.iter().zip(&exact.gradient) {
                eg = eg.max((gf.values()[flat] - ge(p)).abs());
            }
        }
    });
    Ok(ErrorNorms { u: eu, grad: eg })
}

/// Successive errors `‖u_h − u_{h/2}‖∞` over the coarse nodes (and the same
/// for `∇u` over coarse interior nodes).
pub fn successive_errors(
    coarse: &HybridSolution,
    fine: &HybridSolution,
    geom: &InterfaceGeometry,
) -> Result<ErrorNorms> {
    let cs = coarse.spec();
    let fs = fine.spec();
    if fs.n() != 2 * cs.n() || fs.bounds() != cs.bounds() || fs.alignments() != cs.alignments() {
        return Err(Error::NotNested { coarse: cs.n(), fine: fs.n() });
    }
    let gc = gradient(coarse, geom)?;
    let gf = gradient(fine, geom)?;
    let (mut eu, mut eg) = (0.0f64, 0.0f64);
    let mut fidx = vec![0; cs.dim()];
    cs.for_each_point(|flat, idx, _| {
        fidx.iter_mut().zip(idx).for_each(|(f, &c)| *f = 2 * c);
        let ff = fs.index(&fidx);
        eu = eu.max((coarse.u.values()[flat] - fine.u.values()[ff]).abs());
        if !cs.is_boundary(idx) {
            for (c, f) in gc.iter().zip(&gf) {
                eg = eg.max((c.values()[flat] - f.values()[ff]).abs());
            }
        }
    });
    Ok(ErrorNorms { u: eu, grad: eg })
}

/// Orders `log2(e_h / e_{h/2})` for the `u` and `∇u` columns of a halving
/// sequence of error norms.
pub fn error_orders(errors: &[ErrorNorms], hs: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let eu: Vec<f64> = errors.iter().map(|e| e.u).collect();
    let eg: Vec<f64> = errors.iter().map(|e| e.grad).collect();
    Ok((estimate_order(&eu, hs)?, estimate_order(&eg, hs)?))
}
