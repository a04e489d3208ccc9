use nnfd::geometry::InterfaceGeometry;
use nnfd::problems::example1;
use nnfd::shallow_net::ShallowNet;
use nnfd::training::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_dataset(k: usize, m: usize, seed: u64) -> JumpDataset {
    let g = InterfaceGeometry::ellipse(0.8, 0.2);
    let samples = g.sample_interface(m, seed).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = m * k;
    let mut draw = || (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect::<Vec<f64>>();
    let (a, b, c) = (draw(), draw(), draw());
    JumpDataset::new(samples, k, a, b, c).unwrap()
}

fn random_net(k: usize, seed: u64) -> ShallowNet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = 7;
    let p: Vec<f64> = (0..(2 * m + m + k * m + k)).map(|_| rng.gen_range(-1.0..1.0)).collect();
    ShallowNet::from_params(2, m, k, &p).unwrap()
}

#[test]
fn loss_equals_direct_sum() {
    for k in [1, 3] {
        let data = random_dataset(k, 25, 7);
        let net = random_net(k, 8);
        let mut direct = 0.0;
        for (i, s) in data.samples().iter().enumerate() {
            let sd = net.spatial_derivatives(&s.point).unwrap();
            for o in 0..k {
                let t = data.targets(i, o);
                let g = sd.gradient_of(o, 2);
                let dn = g[0] * s.normal[0] + g[1] * s.normal[1];
                direct += (sd.value[o] + t.gamma).powi(2)
                    + (dn + t.rho).powi(2)
                    + (sd.laplacian[o] + t.fjump).powi(2);
            }
        }
        direct /= data.len() as f64;
        let l = loss(&net, &data).unwrap();
        assert!((l - direct).abs() <= 1e-14 * direct, "{l} vs {direct}");
        assert_eq!(residuals(&net, &data).unwrap().len(), 3 * 25 * k);
    }
}

#[test]
fn jacobian_matches_residual_finite_differences() {
    let data = random_dataset(3, 10, 9);
    let net = random_net(3, 10);
    let jac = jacobian(&net, &data).unwrap();
    let p0 = net.params();
    let step = 1e-6;
    for q in 0..p0.len() {
        let mut pp = p0.clone();
        let mut pm = p0.clone();
        pp[q] += step;
        pm[q] -= step;
        let rp = residuals(&ShallowNet::from_params(2, 7, 3, &pp).unwrap(), &data).unwrap();
        let rm = residuals(&ShallowNet::from_params(2, 7, 3, &pm).unwrap(), &data).unwrap();
        for r in 0..rp.len() {
            let fd = (rp[r] - rm[r]) / (2.0 * step);
            assert!((jac[(r, q)] - fd).abs() / (1.0 + fd.abs()) <= 1e-5, "J[{r},{q}]");
        }
    }
}

#[test]
fn training_is_deterministic_and_monotone() {
    let data = random_dataset(1, 30, 3);
    let net0 = ShallowNet::random(2, 10, 1, 3).unwrap();
    let cfg = LmConfig { max_epochs: 60, ..LmConfig::default() };
    let (n1, r1) = lm_fit(&net0, &data, &cfg).unwrap();
    let (n2, r2) = lm_fit(&net0, &data, &cfg).unwrap();
    assert_eq!(r1, r2);
    assert_eq!(n1.to_text(), n2.to_text());
    assert!(r1.loss_history.windows(2).all(|w| w[1] <= w[0]));
    assert_eq!(r1.loss_history.len(), r1.epochs_used + 1);
    assert_eq!(r1.final_loss, *r1.loss_history.last().unwrap());
    assert!(r1.final_loss < r1.loss_history[0]);
}

#[test]
fn plain_levenberg_marquardt_also_descends() {
    let data = random_dataset(1, 30, 4);
    let net0 = ShallowNet::random(2, 10, 1, 4).unwrap();
    let cfg = LmConfig { max_epochs: 40, geodesic: false, up_factor: 10.0, down_factor: 10.0, ..LmConfig::default() };
    let (_, r) = lm_fit(&net0, &data, &cfg).unwrap();
    assert!(r.loss_history.windows(2).all(|w| w[1] <= w[0]));
    assert!(r.final_loss < r.loss_history[0]);
}

#[test]
fn invalid_configs_are_rejected() {
    let data = random_dataset(1, 5, 1);
    let net0 = ShallowNet::random(2, 4, 1, 1).unwrap();
    for cfg in [
        LmConfig { lambda0: 0.0, ..LmConfig::default() },
        LmConfig { up_factor: 1.0, ..LmConfig::default() },
        LmConfig { max_epochs: 0, ..LmConfig::default() },
        LmConfig { loss_tol: -1.0, ..LmConfig::default() },
    ] {
        assert!(lm_fit(&net0, &data, &cfg).is_err());
    }
    assert!(ShallowNet::zeros(2, 0, 1).is_err());
}

/// A net fit on 200 points keeps the jump constraints at fresh interface
/// points.
#[test]
fn trained_constraints_generalize_to_fresh_points() {
    let pr = example1();
    let data = pr.problem.jump_dataset(200, 0).unwrap();
    let net0 = ShallowNet::random(2, 40, 1, 0).unwrap();
    let (net, rep) = lm_fit(&net0, &data, &pr.net.lm).unwrap();
    assert!(rep.final_loss <= 1e-11, "loss {}", rep.final_loss);
    let fresh = pr.problem.jump_dataset(1000, 12345).unwrap();
    let worst = residuals(&net, &fresh)
        .unwrap()
        .iter()
        .map(|r| r.abs() * (fresh.len() as f64).sqrt())
        .fold(0.0, f64::max);
    assert!(worst <= 1e-4, "max fresh residual {worst}");
}
