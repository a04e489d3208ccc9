use std::f64::consts::PI;

use nnfd::expr::Expr;
use nnfd::fast_poisson::GridField;
use nnfd::geometry::InterfaceGeometry;
use nnfd::stokes::*;

fn angles(k: usize) -> impl Iterator<Item = f64> {
    (0..k).map(move |i| 2.0 * PI * (i as f64 + 0.37) / k as f64)
}

fn dn(e: &Expr, s: f64) -> f64 {
    let x = [s.cos(), s.sin()];
    e.diff(0).eval(&x) * x[0] + e.diff(1).eval(&x) * x[1]
}

/// The closed forms satisfy the interface conditions on the unit circle,
/// checked by symbolic one-sided derivatives.
#[test]
fn closed_forms_satisfy_interface_conditions() {
    let f = manufactured_stokes_forms();
    for s in angles(40) {
        let x = [s.cos(), s.sin()];
        let tau = [-s.sin(), s.cos()];
        let ft = f.f_tau.eval(&[s]);
        let fnn = f.f_n.eval(&[s]);
        for i in 0..2 {
            let jump = f.u_plus[i].eval(&x) - f.u_minus[i].eval(&x);
            assert!(jump.abs() <= 1e-12, "[[u{i}]] = {jump} at s={s}");
            let dnj = dn(&f.u_plus[i], s) - dn(&f.u_minus[i], s);
            assert!((dnj + ft * tau[i]).abs() <= 1e-8, "[[dn u{i}]] = {dnj} at s={s}");
        }
        let pj = f.p_plus.eval(&x) - f.p_minus.eval(&x);
        assert!((pj - fnn).abs() <= 1e-12);
        // Incompressible on both sides.
        for u in [&f.u_minus, &f.u_plus] {
            let div = u[0].diff(0).eval(&x) + u[1].diff(1).eval(&x);
            assert!(div.abs() <= 1e-12);
        }
    }
}

#[test]
fn closed_forms_are_divergence_free_everywhere() {
    let f = manufactured_stokes_forms();
    for (k, s) in angles(30).enumerate() {
        for r in [0.3, 0.8, 1.2, 1.9] {
            let x = [r * s.cos(), r * s.sin() + 0.01 * k as f64];
            let u = if r < 1.0 { &f.u_minus } else { &f.u_plus };
            let div = u[0].diff(0).eval(&x) + u[1].diff(1).eval(&x);
            assert!(div.abs() <= 1e-12, "div {div} at {x:?}");
        }
    }
}

/// Jump targets built from `F` and `g` alone agree with the one-sided
/// derivatives of the closed forms.
#[test]
fn jump_data_matches_closed_forms() {
    let f = manufactured_stokes_forms();
    let pr = manufactured_stokes_example();
    for s in angles(25) {
        let smp = pr.geometry.sample_at(&[s]).unwrap();
        let x = &smp.point;
        let vel = velocity_jump_data(&pr, &smp).unwrap();
        for i in 0..2 {
            let rho = dn(&f.u_plus[i], s) - dn(&f.u_minus[i], s);
            let lap = f.u_plus[i].laplacian(2).eval(x) - f.u_minus[i].laplacian(2).eval(x);
            assert_eq!(vel[i].gamma, 0.0);
            assert!((vel[i].rho - rho).abs() <= 1e-8, "rho{i}");
            assert!((vel[i].fjump - lap).abs() <= 1e-8, "fjump{i}: {} vs {lap}", vel[i].fjump);
        }
        let (gp, rp) = pressure_jump_data(&pr, &smp).unwrap();
        assert!((gp - (f.p_plus.eval(x) - f.p_minus.eval(x))).abs() <= 1e-12);
        assert!((rp - (dn(&f.p_plus, s) - dn(&f.p_minus, s))).abs() <= 1e-8);
        let gj = pressure_gradient_jump(&pr, &smp).unwrap();
        for i in 0..2 {
            let want = f.p_plus.diff(i).eval(x) - f.p_minus.diff(i).eval(x);
            assert!((gj[i] - want).abs() <= 1e-8);
        }
    }
}

#[test]
fn jump_data_at_the_top_of_the_circle() {
    let pr = manufactured_stokes_example();
    let smp = pr.geometry.sample_at(&[PI / 2.0]).unwrap();
    // tau = (-1, 0), F_tau = 2 sin(3 pi / 2) = -2.
    let vel = velocity_jump_data(&pr, &smp).unwrap();
    assert!((vel[0].rho + 2.0).abs() <= 1e-14);
    assert!(vel[1].rho.abs() <= 1e-14);
    let (gp, _) = pressure_jump_data(&pr, &smp).unwrap();
    assert!(gp.abs() <= 1e-14);
    let smp0 = pr.geometry.sample_at(&[0.0]).unwrap();
    assert!((pressure_jump_data(&pr, &smp0).unwrap().0 + 1.0).abs() <= 1e-15);
}

/// `g = ∇p − μΔu` against central differences of the closed forms.
#[test]
fn forcing_matches_finite_differences() {
    let f = manufactured_stokes_forms();
    let pr = manufactured_stokes_example();
    let (hg, hl) = (1e-5, 1e-3);
    for (k, s) in angles(20).enumerate() {
        for r in [0.5, 0.85, 1.15, 1.7] {
            let x = [r * s.cos(), r * s.sin()];
            let (u, p) = if r < 1.0 { (&f.u_minus, &f.p_minus) } else { (&f.u_plus, &f.p_plus) };
            let at = |e: &Expr, dx: f64, dy: f64| e.eval(&[x[0] + dx, x[1] + dy]);
            let g = pr.g(&x);
            for i in 0..2 {
                let (ex, ey) = if i == 0 { (hg, 0.0) } else { (0.0, hg) };
                let dp = (at(p, ex, ey) - at(p, -ex, -ey)) / (2.0 * hg);
                let lap = (at(&u[i], hl, 0.0) + at(&u[i], -hl, 0.0) + at(&u[i], 0.0, hl) + at(&u[i], 0.0, -hl)
                    - 4.0 * at(&u[i], 0.0, 0.0))
                    / (hl * hl);
                let want = dp - pr.mu * lap;
                assert!((g[i] - want).abs() <= 1e-5 * (1.0 + want.abs()), "case {k} r={r}: {} vs {want}", g[i]);
            }
            let div_fd = {
                let gx = |d: f64| pr.g(&[x[0] + d, x[1]])[0];
                let gy = |d: f64| pr.g(&[x[0], x[1] + d])[1];
                (gx(hg) - gx(-hg) + gy(hg) - gy(-hg)) / (2.0 * hg)
            };
            assert!((pr.div_g(&x) - div_fd).abs() <= 1e-5 * (1.0 + div_fd.abs()));
        }
    }
}

#[test]
fn velocity_is_continuous_across_the_circle() {
    let pr = manufactured_stokes_example();
    let ex = pr.exact.as_ref().unwrap();
    for s in angles(20) {
        let inner = [(1.0 - 1e-13) * s.cos(), (1.0 - 1e-13) * s.sin()];
        let outer = [(1.0 + 1e-13) * s.cos(), (1.0 + 1e-13) * s.sin()];
        for c in 0..2 {
            assert!(((ex.u[c])(&inner) - (ex.u[c])(&outer)).abs() <= 1e-12);
        }
    }
}

#[test]
fn mac_divergence_is_exact_on_linear_fields() {
    let layout = MacLayout::new(&[(-2.0, 2.0); 2], 16).unwrap();
    let rotation = |f1: fn(&[f64]) -> f64, f2: fn(&[f64]) -> f64| {
        let u1 = GridField::from_fn(layout.u1.clone(), f1).unwrap();
        let u2 = GridField::from_fn(layout.u2.clone(), f2).unwrap();
        divergence(&u1, &u2).unwrap()
    };
    let d = rotation(|x| x[1], |x| x[0]);
    assert!(d.max_abs() <= 1e-13);
    let d = rotation(|x| x[0], |_| 0.0);
    assert!(d.values().iter().all(|v| (v - 1.0).abs() <= 1e-13));
    let d = rotation(|x| 3.0 * x[0] - x[1], |x| 2.0 * x[1] + x[0]);
    assert!(d.values().iter().all(|v| (v - 5.0).abs() <= 1e-13));
    assert!(divergence(&GridField::zeros(layout.u2.clone()), &GridField::zeros(layout.u1.clone())).is_err());
}

/// Exact velocity sampled on the staggered grids has an `O(h²)` MAC
/// divergence at a fixed distance from the interface.
#[test]
fn sampled_exact_velocity_has_second_order_divergence() {
    let pr = manufactured_stokes_example();
    let ex = pr.exact.as_ref().unwrap();
    let err = |n: usize| {
        let layout = MacLayout::new(&pr.bounds, n).unwrap();
        let u1 = GridField::from_fn(layout.u1.clone(), |x| (ex.u[0])(x)).unwrap();
        let u2 = GridField::from_fn(layout.u2.clone(), |x| (ex.u[1])(x)).unwrap();
        let d = divergence(&u1, &u2).unwrap();
        let mut m = 0.0f64;
        d.spec().for_each_point(|flat, _, x| {
            if (x[0].hypot(x[1]) - 1.0).abs() > 0.1 {
                m = m.max(d.values()[flat].abs());
            }
        });
        m
    };
    let (e1, e2) = (err(64), err(128));
    let order = (e1 / e2).log2();
    assert!((1.8..2.2).contains(&order), "{e1} {e2} order {order}");
}

#[test]
fn mac_layout_staggering() {
    let l = MacLayout::new(&[(-2.0, 2.0); 2], 8).unwrap();
    assert_eq!(l.h(), 0.5);
    assert_eq!(l.p.shape(), vec![8, 8]);
    assert_eq!(l.u1.shape(), vec![9, 8]);
    assert_eq!(l.u2.shape(), vec![8, 9]);
    assert_eq!(l.u1.point(&[0, 0]), vec![-2.0, -1.75]);
    assert_eq!(l.u2.point(&[0, 0]), vec![-1.75, -2.0]);
    assert_eq!(l.velocity(U2), &l.u2);
}

#[test]
fn invalid_problems_are_rejected() {
    let forms = manufactured_stokes_forms();
    let sq = vec![(-2.0, 2.0); 2];
    // Not arclength-parameterized.
    assert!(StokesProblem::manufactured(InterfaceGeometry::ellipse(1.2, 0.8), sq.clone(), 1.0, &forms).is_err());
    assert!(StokesProblem::manufactured(InterfaceGeometry::circle(1.0), sq.clone(), 0.0, &forms).is_err());
    assert!(StokesProblem::manufactured(InterfaceGeometry::ellipsoid(1.0, 1.0, 1.0), sq, 1.0, &forms).is_err());
}

#[test]
fn dataset_layout_is_u1_u2_p() {
    let pr = manufactured_stokes_example();
    let data = stokes_dataset(&pr, 12, 5).unwrap();
    assert_eq!(data.n_outputs(), 3);
    assert_eq!(data.samples().len(), 12);
    for (i, smp) in data.samples().iter().enumerate() {
        let vel = velocity_jump_data(&pr, smp).unwrap();
        let (gp, rp) = pressure_jump_data(&pr, smp).unwrap();
        assert_eq!(data.targets(i, U1), vel[0]);
        assert_eq!(data.targets(i, U2), vel[1]);
        assert_eq!(data.targets(i, P).gamma, gp);
        assert_eq!(data.targets(i, P).rho, rp);
    }
}

/// `[[∇p]]·τ` from the jump identity equals `d/ds [[p]](X(s))`.
#[test]
fn tangential_jump_identity() {
    let f = manufactured_stokes_forms();
    let pr = manufactured_stokes_example();
    let jump = |s: f64| {
        let x = pr.geometry.point_at(&[s]).unwrap();
        f.p_plus.eval(&x) - f.p_minus.eval(&x)
    };
    for s in angles(50) {
        let smp = pr.geometry.sample_at(&[s]).unwrap();
        let t = smp.tangent.unwrap();
        let gj = pressure_gradient_jump(&pr, &smp).unwrap();
        let fd = (jump(s + 1e-5) - jump(s - 1e-5)) / 2e-5;
        assert!((gj[0] * t[0] + gj[1] * t[1] - fd).abs() <= 1e-6);
    }
}
