//! Oracle suites that need no training: solver round trips, linear
//! exactness, network derivative checks, manufactured Stokes consistency and
//! boundary satisfaction of hybrid solves.

use std::fmt;

use nnfd::fast_poisson::{
    apply_laplacian, solve_dirichlet, solve_dirichlet_staggered, solve_neumann_cell, Alignment, Boundary,
    GridField, GridSpec, WallData,
};
use nnfd::geometry::InterfaceSample;
use nnfd::hybrid;
use nnfd::problems::{preset, PRESET_NAMES};
use nnfd::shallow_net::ShallowNet;
use nnfd::stokes::{self, manufactured_stokes_example, manufactured_stokes_forms, MacLayout};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    /// Worst observed value of the checked quantity.
    pub value: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.value <= self.tolerance
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "{status} {}: {:.3e} (tol {:.0e})", self.name, self.value, self.tolerance)
    }
}

pub fn run_all() -> Vec<Check> {
    vec![
        round_trip_dirichlet(2),
        round_trip_dirichlet(3),
        round_trip_neumann(),
        round_trip_staggered(),
        linear_exactness(),
        mac_divergence_linear(),
        net_derivatives(),
        net_jacobian(),
        stokes_jumps(),
        stokes_tangential_identity(),
        hybrid_boundary(),
    ]
}

const N: usize = 64;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_field(spec: &GridSpec, r: &mut ChaCha8Rng) -> GridField {
    GridField::from_fn(spec.clone(), |_| r.gen_range(-1.0..1.0)).expect("finite")
}

fn random_walls(spec: &GridSpec, r: &mut ChaCha8Rng) -> WallData {
    WallData::from_fn(spec, |_, _| r.gen_range(-1.0..1.0)).expect("finite")
}

/// Max over interior points of `|a − b|`, relative to `max(1, ‖b‖∞)`.
fn interior_rel(a: &GridField, b: &GridField, shift: f64) -> f64 {
    let spec = a.spec();
    let mut m = 0.0f64;
    spec.for_each_point(|flat, idx, _| {
        if !spec.is_boundary(idx) {
            m = m.max((a.values()[flat] - (b.values()[flat] - shift)).abs());
        }
    });
    m / b.max_abs().max(1.0)
}

fn round_trip_dirichlet(dim: usize) -> Check {
    let mut r = rng(10 + dim as u64);
    let spec = GridSpec::nodes(&vec![(-1.0, 1.0); dim], N).expect("valid grid");
    let rhs = random_field(&spec, &mut r);
    let bnd = random_field(&spec, &mut r);
    let u = solve_dirichlet(&spec, &rhs, &bnd).expect("solve");
    let lap = apply_laplacian(&u, Boundary::Dirichlet).expect("apply");
    Check {
        name: if dim == 2 { "round trip, 2D Dirichlet" } else { "round trip, 3D Dirichlet" },
        value: interior_rel(&lap, &rhs, 0.0),
        tolerance: 1e-10,
    }
}

fn round_trip_neumann() -> Check {
    let mut r = rng(20);
    let spec = GridSpec::cells(&[(-2.0, 2.0); 2], N).expect("valid grid");
    let rhs = random_field(&spec, &mut r);
    let flux = random_walls(&spec, &mut r);
    let sol = solve_neumann_cell(&spec, &rhs, &flux).expect("solve");
    let lap = apply_laplacian(&sol.field, Boundary::Neumann(&flux)).expect("apply");
    let area = 16.0;
    let mean = sol.field.mean().abs();
    Check {
        name: "round trip, cell Neumann",
        value: interior_rel(&lap, &rhs, sol.defect / area).max(mean),
        tolerance: 1e-10,
    }
}

fn round_trip_staggered() -> Check {
    let mut r = rng(30);
    let mut worst = 0.0f64;
    for al in [[Alignment::Node, Alignment::Cell], [Alignment::Cell, Alignment::Node]] {
        let spec = GridSpec::new(&[(-2.0, 2.0); 2], N, &al).expect("valid grid");
        let rhs = random_field(&spec, &mut r);
        let walls = random_walls(&spec, &mut r);
        let u = solve_dirichlet_staggered(&spec, &rhs, &walls).expect("solve");
        let lap = apply_laplacian(&u, Boundary::Staggered(&walls)).expect("apply");
        worst = worst.max(interior_rel(&lap, &rhs, 0.0));
    }
    Check { name: "round trip, staggered Dirichlet", value: worst, tolerance: 1e-10 }
}

/// `u = 0.3 + 1.5x − 0.7y (+ 0.4z)` is reproduced by every solver.
fn linear_exactness() -> Check {
    let lin = |x: &[f64]| 0.3 + 1.5 * x[0] - 0.7 * x[1] + if x.len() > 2 { 0.4 * x[2] } else { 0.0 };
    let grad = [1.5, -0.7];
    let mut worst = 0.0f64;
    for dim in [2, 3] {
        let spec = GridSpec::nodes(&vec![(-1.0, 1.0); dim], 32).expect("valid grid");
        let exact = GridField::from_fn(spec.clone(), lin).expect("finite");
        let u = solve_dirichlet(&spec, &GridField::zeros(spec.clone()), &exact).expect("solve");
        worst = worst.max(u.max_diff(&exact).expect("same grid"));
    }
    let cells = GridSpec::cells(&[(-2.0, 2.0); 2], 32).expect("valid grid");
    let flux = WallData::from_fn(&cells, |axis, x| {
        let outward = if x[axis] > 0.0 { 1.0 } else { -1.0 };
        outward * grad[axis]
    })
    .expect("finite");
    let sol = solve_neumann_cell(&cells, &GridField::zeros(cells.clone()), &flux).expect("solve");
    let exact = GridField::from_fn(cells.clone(), lin).expect("finite");
    let mean = exact.mean();
    let shifted = GridField::from_fn(cells.clone(), |x| lin(x) - mean).expect("finite");
    worst = worst.max(sol.field.max_diff(&shifted).expect("same grid"));
    for al in [[Alignment::Node, Alignment::Cell], [Alignment::Cell, Alignment::Node]] {
        let spec = GridSpec::new(&[(-2.0, 2.0); 2], 32, &al).expect("valid grid");
        let walls = WallData::from_fn(&spec, |_, x| lin(x)).expect("finite");
        let u = solve_dirichlet_staggered(&spec, &GridField::zeros(spec.clone()), &walls).expect("solve");
        let exact = GridField::from_fn(spec.clone(), lin).expect("finite");
        worst = worst.max(u.max_diff(&exact).expect("same grid"));
    }
    Check { name: "linear exactness, all solvers", value: worst, tolerance: 1e-11 }
}

fn mac_divergence_linear() -> Check {
    let layout = MacLayout::new(&[(-2.0, 2.0); 2], 32).expect("valid grid");
    let u1 = GridField::from_fn(layout.u1.clone(), |x| 2.0 * x[0] - x[1] + 0.5).expect("finite");
    let u2 = GridField::from_fn(layout.u2.clone(), |x| 3.0 * x[0] - 0.5 * x[1]).expect("finite");
    let d = stokes::divergence(&u1, &u2).expect("MAC grids");
    let worst = d.values().iter().map(|v| (v - 1.5).abs()).fold(0.0, f64::max);
    Check { name: "linear exactness, MAC divergence", value: worst, tolerance: 1e-11 }
}

fn random_net(r: &mut ChaCha8Rng, d: usize) -> ShallowNet {
    let m = r.gen_range(3..12);
    let k = r.gen_range(1..4);
    let p: Vec<f64> = (0..m * d + m + k * m + k).map(|_| r.gen_range(-1.5..1.5)).collect();
    ShallowNet::from_params(d, m, k, &p).expect("sizes match")
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs())
}

/// Gradient and Laplacian against central differences, 100 instances.
fn net_derivatives() -> Check {
    let mut r = rng(40);
    let step = 1e-5;
    let mut worst = 0.0f64;
    for case in 0..100 {
        let d = 2 + case % 2;
        let net = random_net(&mut r, d);
        let x: Vec<f64> = (0..d).map(|_| r.gen_range(-1.0..1.0)).collect();
        let sd = net.spatial_derivatives(&x).expect("dims match");
        for o in 0..net.n_outputs() {
            let mut lap = 0.0;
            let mut g = vec![0.0; d];
            for i in 0..d {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += step;
                xm[i] -= step;
                let fd = (net.eval_output(&xp, o) - net.eval_output(&xm, o)) / (2.0 * step);
                worst = worst.max(rel(sd.gradient_of(o, d)[i], fd));
                net.gradient_output(&xp, o, &mut g);
                let gp = g[i];
                net.gradient_output(&xm, o, &mut g);
                lap += (gp - g[i]) / (2.0 * step);
            }
            worst = worst.max(rel(sd.laplacian[o], lap));
        }
    }
    Check { name: "net gradient/Laplacian vs FD (100 nets)", value: worst, tolerance: 1e-5 }
}

/// Parameter Jacobian rows against central differences, 100 instances.
fn net_jacobian() -> Check {
    let mut r = rng(50);
    let step = 1e-6;
    let mut worst = 0.0f64;
    for case in 0..100 {
        let d = 2 + case % 2;
        let net = random_net(&mut r, d);
        let x: Vec<f64> = (0..d).map(|_| r.gen_range(-1.0..1.0)).collect();
        let mut normal: Vec<f64> = (0..d).map(|_| r.gen_range(-1.0..1.0)).collect();
        let len = normal.iter().map(|v| v * v).sum::<f64>().sqrt();
        normal.iter_mut().for_each(|v| *v /= len);
        let o = case % net.n_outputs();
        let sample = InterfaceSample { point: x.clone(), normal: normal.clone(), tangent: None, param: None };
        let rows = net.parameter_jacobian_rows(&sample, o).expect("dims match");
        let quantities = |p: &[f64]| {
            let n = ShallowNet::from_params(d, net.width(), net.n_outputs(), p).expect("sizes match");
            let sd = n.spatial_derivatives(&x).expect("dims match");
            let dn: f64 = sd.gradient_of(o, d).iter().zip(&normal).map(|(a, b)| a * b).sum();
            [sd.value[o], dn, sd.laplacian[o]]
        };
        let p0 = net.params();
        for q in 0..p0.len() {
            let mut pp = p0.clone();
            let mut pm = p0.clone();
            pp[q] += step;
            pm[q] -= step;
            let (a, b) = (quantities(&pp), quantities(&pm));
            for k in 0..3 {
                worst = worst.max(rel(rows[k][q], (a[k] - b[k]) / (2.0 * step)));
            }
        }
    }
    Check { name: "net parameter Jacobian vs FD (100 nets)", value: worst, tolerance: 1e-5 }
}

/// Closed-form Stokes solution at 100 interface samples: `[[p]] = F_n`,
/// `[[u]] = 0`, `[[∂ₙu]] = −F_τ τ/μ`, using symbolic one-sided derivatives.
fn stokes_jumps() -> Check {
    let forms = manufactured_stokes_forms();
    let pr = manufactured_stokes_example();
    let mut worst = 0.0f64;
    for smp in pr.geometry.sample_interface(100, 60).expect("parameterized") {
        let x = &smp.point;
        let s = smp.param.expect("2D sample");
        let t = smp.tangent.expect("2D sample");
        let dn = |e: &nnfd::expr::Expr| e.diff(0).eval(x) * smp.normal[0] + e.diff(1).eval(x) * smp.normal[1];
        let ft = forms.f_tau.eval(&[s]);
        worst = worst.max((forms.p_plus.eval(x) - forms.p_minus.eval(x) - forms.f_n.eval(&[s])).abs());
        for i in 0..2 {
            worst = worst.max((forms.u_plus[i].eval(x) - forms.u_minus[i].eval(x)).abs());
            let jump = dn(&forms.u_plus[i]) - dn(&forms.u_minus[i]);
            worst = worst.max((jump + ft * t[i] / pr.mu).abs());
        }
    }
    Check { name: "Stokes interface conditions (100 samples)", value: worst, tolerance: 1e-8 }
}

/// `[[∇p]]·τ` from the jump identity against `d/ds [[p]](X(s))` by central
/// differences along the curve.
fn stokes_tangential_identity() -> Check {
    let forms = manufactured_stokes_forms();
    let pr = manufactured_stokes_example();
    let jump_p = |s: f64| {
        let x = pr.geometry.point_at(&[s]).expect("parameterized");
        forms.p_plus.eval(&x) - forms.p_minus.eval(&x)
    };
    let step = 1e-5;
    let mut worst = 0.0f64;
    for smp in pr.geometry.sample_interface(100, 61).expect("parameterized") {
        let s = smp.param.expect("2D sample");
        let t = smp.tangent.expect("2D sample");
        let gj = stokes::pressure_gradient_jump(&pr, &smp).expect("2D sample");
        let fd = (jump_p(s + step) - jump_p(s - step)) / (2.0 * step);
        worst = worst.max((gj[0] * t[0] + gj[1] * t[1] - fd).abs());
    }
    Check { name: "Stokes tangential-jump identity", value: worst, tolerance: 1e-6 }
}

/// Every preset solved with an untrained random net still matches `u_b` on
/// the walls.
fn hybrid_boundary() -> Check {
    let mut r = rng(70);
    let mut worst = 0.0f64;
    for name in PRESET_NAMES {
        let pr = preset(name).expect("known preset");
        let d = pr.problem.dim();
        let p: Vec<f64> = (0..8 * d + 8 + 8 + 1).map(|_| r.gen_range(-1.0..1.0)).collect();
        let net = ShallowNet::from_params(d, 8, 1, &p).expect("sizes match");
        let report = nnfd::training::TrainReport {
            final_loss: f64::NAN,
            epochs_used: 0,
            loss_history: vec![],
            converged: false,
        };
        let n = if d == 3 { 16 } else { 64 };
        let spec = pr.problem.grid(n).expect("valid grid");
        let sol = hybrid::solve_with_net(&pr.problem, &net, &report, &spec).expect("solve");
        spec.for_each_point(|flat, idx, x| {
            if spec.is_boundary(idx) {
                worst = worst.max((sol.u.values()[flat] - (pr.problem.u_b)(x)).abs());
            }
        });
    }
    Check { name: "hybrid boundary values", value: worst, tolerance: 1e-12 }
}
