//! Interface-jump least squares and a full-batch Levenberg–Marquardt fit.
//!
//! For every sample `i` and output `o` three residuals are formed,
//! scaled by `1/sqrt(M)`:
//!
//! ```text
//! V_o(x_i) + gamma_o(x_i),   dV_o/dn(x_i) + rho_o(x_i),   lap V_o(x_i) + [f]_o(x_i)
//! ```
//!
//! so the squared norm of the residual vector is the mean-squared jump loss.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::InterfaceSample;
use crate::shallow_net::ShallowNet;

/// Interface samples with jump targets, one value per sample and output
/// channel (row-major `M x k`).
#[derive(Debug, Clone, PartialEq)]
pub struct JumpDataset {
    samples: Vec<InterfaceSample>,
    n_outputs: usize,
    gamma: Vec<f64>,
    rho: Vec<f64>,
    fjump: Vec<f64>,
}

/// Jump of the solution, of its normal derivative and of the source term.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct JumpValues {
    pub gamma: f64,
    pub rho: f64,
    pub fjump: f64,
}

impl JumpDataset {
    pub fn new(
        samples: Vec<InterfaceSample>,
        n_outputs: usize,
        gamma: Vec<f64>,
        rho: Vec<f64>,
        fjump: Vec<f64>,
    ) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidArgument("dataset needs at least one sample".into()));
        }
        if n_outputs == 0 {
            return Err(Error::InvalidArgument("dataset needs at least one channel".into()));
        }
        let expected = samples.len() * n_outputs;
        for v in [&gamma, &rho, &fjump] {
            if v.len() != expected {
                return Err(Error::DimensionMismatch {
                    expected,
                    got: v.len(),
                });
            }
            if v.iter().any(|t| !t.is_finite()) {
                return Err(Error::NonFinite("jump targets"));
            }
        }
        let dim = samples[0].point.len();
        if samples.iter().any(|s| s.point.len() != dim || s.normal.len() != dim) {
            return Err(Error::InvalidArgument("samples of mixed dimension".into()));
        }
        Ok(JumpDataset {
            samples,
            n_outputs,
            gamma,
            rho,
            fjump,
        })
    }

    /// Evaluates `targets(sample, output)` for every sample and channel.
    pub fn from_fn(
        samples: Vec<InterfaceSample>,
        n_outputs: usize,
        targets: impl Fn(&InterfaceSample, usize) -> JumpValues,
    ) -> Result<Self> {
        let mut gamma = Vec::with_capacity(samples.len() * n_outputs);
        let mut rho = Vec::with_capacity(samples.len() * n_outputs);
        let mut fjump = Vec::with_capacity(samples.len() * n_outputs);
        for s in &samples {
            for o in 0..n_outputs {
                let t = targets(s, o);
                gamma.push(t.gamma);
                rho.push(t.rho);
                fjump.push(t.fjump);
            }
        }
        Self::new(samples, n_outputs, gamma, rho, fjump)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn n_outputs(&self) -> usize {
        self.n_outputs
    }

    pub fn dim(&self) -> usize {
        self.samples[0].point.len()
    }

    pub fn samples(&self) -> &[InterfaceSample] {
        &self.samples
    }

    pub fn targets(&self, i: usize, o: usize) -> JumpValues {
        let q = i * self.n_outputs + o;
        JumpValues {
            gamma: self.gamma[q],
            rho: self.rho[q],
            fjump: self.fjump[q],
        }
    }

    pub fn residual_count(&self) -> usize {
        3 * self.samples.len() * self.n_outputs
    }

    fn check(&self, net: &ShallowNet) -> Result<()> {
        if net.input_dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: net.input_dim(),
                got: self.dim(),
            });
        }
        if net.n_outputs() != self.n_outputs {
            return Err(Error::DimensionMismatch {
                expected: net.n_outputs(),
                got: self.n_outputs,
            });
        }
        Ok(())
    }
}

/// Residual vector of length `3 M k`; its squared norm is the loss.
pub fn residuals(net: &ShallowNet, data: &JumpDataset) -> Result<Vec<f64>> {
    data.check(net)?;
    let k = data.n_outputs;
    let scale = 1.0 / (data.len() as f64).sqrt();
    let mut r = Vec::with_capacity(data.residual_count());
    for (i, s) in data.samples.iter().enumerate() {
        let d = net.spatial_derivatives(&s.point)?;
        for o in 0..k {
            let t = data.targets(i, o);
            let dn: f64 = d
                .gradient_of(o, net.input_dim())
                .iter()
                .zip(&s.normal)
                .map(|(g, n)| g * n)
                .sum();
            r.push(scale * (d.value[o] + t.gamma));
            r.push(scale * (dn + t.rho));
            r.push(scale * (d.laplacian[o] + t.fjump));
        }
    }
    Ok(r)
}

pub fn loss(net: &ShallowNet, data: &JumpDataset) -> Result<f64> {
    Ok(residuals(net, data)?.iter().map(|v| v * v).sum())
}

fn jacobian_row_major(net: &ShallowNet, data: &JumpDataset, out: &mut [f64]) {
    let p = net.param_count();
    let k = data.n_outputs;
    let scale = 1.0 / (data.len() as f64).sqrt();
    for (i, s) in data.samples.iter().enumerate() {
        for o in 0..k {
            let base = 3 * (i * k + o) * p;
            let (r0, rest) = out[base..base + 3 * p].split_at_mut(p);
            let (r1, r2) = rest.split_at_mut(p);
            net.fill_jacobian_rows(&s.point, &s.normal, o, r0, r1, r2);
        }
    }
    out.iter_mut().for_each(|v| *v *= scale);
}

/// `(3 M k) x P` Jacobian of [`residuals`] with respect to the flattened
/// network parameters.
pub fn jacobian(net: &ShallowNet, data: &JumpDataset) -> Result<DMatrix<f64>> {
    data.check(net)?;
    let rows = data.residual_count();
    let mut buf = vec![0.0; rows * net.param_count()];
    jacobian_row_major(net, data, &mut buf);
    Ok(DMatrix::from_row_slice(rows, net.param_count(), &buf))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmConfig {
    pub lambda0: f64,
    pub up_factor: f64,
    pub down_factor: f64,
    pub max_epochs: usize,
    pub loss_tol: f64,
    /// Seed for the parameter initialization.
    pub seed: u64,
    /// Add the second-order geodesic correction to each trial step.
    pub geodesic: bool,
}

impl Default for LmConfig {
    fn default() -> Self {
        LmConfig {
            lambda0: 1e-3,
            up_factor: 1.5,
            down_factor: 1.5,
            max_epochs: 1000,
            loss_tol: 1e-12,
            seed: 0,
            geodesic: true,
        }
    }
}

impl LmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda0 > 0.0) {
            return Err(Error::InvalidArgument("lambda0 must be > 0".into()));
        }
        if !(self.up_factor > 1.0 && self.down_factor > 1.0) {
            return Err(Error::InvalidArgument("damping factors must be > 1".into()));
        }
        if self.max_epochs == 0 {
            return Err(Error::InvalidArgument("max_epochs must be >= 1".into()));
        }
        if !(self.loss_tol > 0.0) {
            return Err(Error::InvalidArgument("loss_tol must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub final_loss: f64,
    pub epochs_used: usize,
    /// Loss before training followed by the loss after every epoch.
    pub loss_history: Vec<f64>,
    pub converged: bool,
}

impl TrainReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("epoch,loss\n");
        for (e, l) in self.loss_history.iter().enumerate() {
            s.push_str(&format!("{e},{}\n", crate::convergence::format_e16(*l)));
        }
        s
    }
}

const LAMBDA_MAX: f64 = 1e16;
const LAMBDA_MIN: f64 = 1e-20;
/// Finite-difference probe length for the directional second derivative.
const GEODESIC_PROBE: f64 = 0.1;
/// Largest accepted `|a| / |v|` for the geodesic correction.
const GEODESIC_RATIO: f64 = 0.75;

/// Minimizes the jump loss starting from `net0`.
///
/// Each epoch solves `(J^T J + lambda I) v = -J^T r`. With `geodesic` set the
/// trial step becomes `v + a / 2`, where `a` solves the same damped system with
/// the residual's second directional derivative along `v` (estimated by a
/// finite difference) in place of `r`; trials with `|a| > 0.75 |v|` count as
/// rejected. A step is accepted only if it lowers the loss, after which
/// `lambda` shrinks by `down_factor`; otherwise `lambda` grows by `up_factor`
/// and the solve is retried. Failure to find a descent step before `lambda`
/// exceeds `1e16` ends training with `converged = false`.
pub fn lm_fit(
    net0: &ShallowNet,
    data: &JumpDataset,
    cfg: &LmConfig,
) -> Result<(ShallowNet, TrainReport)> {
    cfg.validate()?;
    data.check(net0)?;

    let n_params = net0.param_count();
    let n_rows = data.residual_count();
    let mut net = net0.clone();
    let mut params = net.params();
    let mut r = DVector::from_vec(residuals(&net, data)?);
    let mut loss = r.norm_squared();
    let mut history = vec![loss];
    let mut lambda = cfg.lambda0;
    let mut epochs = 0;
    let mut converged = loss <= cfg.loss_tol;
    let mut jbuf = vec![0.0; n_rows * n_params];
    let mut trial = net.clone();

    while !converged && epochs < cfg.max_epochs {
        epochs += 1;
        jacobian_row_major(&net, data, &mut jbuf);
        // The row-major Jacobian buffer is J^T in column-major order.
        let jt = DMatrix::from_column_slice(n_params, n_rows, &jbuf);
        let grad = &jt * &r;
        let normal = &jt * jt.transpose();

        let mut accepted = false;
        while lambda <= LAMBDA_MAX {
            let mut damped = normal.clone();
            for q in 0..n_params {
                damped[(q, q)] += lambda;
            }
            let Some(chol) = damped.cholesky() else {
                lambda *= cfg.up_factor;
                continue;
            };
            // `step` is the negated update: parameters move to `params - step`.
            let mut step = chol.solve(&grad);
            if cfg.geodesic {
                let h = GEODESIC_PROBE;
                let probe: Vec<f64> = params
                    .iter()
                    .zip(step.iter())
                    .map(|(p, d)| p - h * d)
                    .collect();
                if trial.set_params(&probe).is_ok() {
                    let r_probe = DVector::from_vec(residuals(&trial, data)?);
                    let second = (&r_probe - &r + jt.tr_mul(&step) * h) * (2.0 / (h * h));
                    let acc = chol.solve(&(&jt * &second));
                    if !(acc.norm() <= GEODESIC_RATIO * step.norm()) {
                        lambda *= cfg.up_factor;
                        continue;
                    }
                    step += acc * 0.5;
                }
            }
            let candidate: Vec<f64> = params
                .iter()
                .zip(step.iter())
                .map(|(p, d)| p - d)
                .collect();
            if trial.set_params(&candidate).is_err() {
                lambda *= cfg.up_factor;
                continue;
            }
            let r_new = DVector::from_vec(residuals(&trial, data)?);
            let loss_new = r_new.norm_squared();
            if loss_new.is_finite() && loss_new < loss {
                lambda = (lambda / cfg.down_factor).max(LAMBDA_MIN);
                params = candidate;
                std::mem::swap(&mut net, &mut trial);
                r = r_new;
                loss = loss_new;
                accepted = true;
                break;
            }
            lambda *= cfg.up_factor;
        }
        history.push(loss);
        if !accepted {
            break;
        }
        converged = loss <= cfg.loss_tol;
    }

    let report = TrainReport {
        final_loss: loss,
        epochs_used: epochs,
        loss_history: history,
        converged,
    };
    Ok((net, report))
}
