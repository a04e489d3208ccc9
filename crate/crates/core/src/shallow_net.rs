//! Single-hidden-layer sigmoid network with closed-form spatial derivatives
//! and closed-form parameter Jacobians.
//!
//! For hidden pre-activations `z_j = A_j . x + b_j` the outputs are
//! `V_o(x) = sum_j C_oj sigma(z_j) + c_o`. Since the architecture is fixed,
//! the gradient, Laplacian and their parameter derivatives follow from the
//! first three derivatives of the sigmoid:
//!
//! ```text
//! s1 = s (1 - s),   s2 = s1 (1 - 2 s),   s3 = s2 (1 - 2 s) - 2 s1^2
//! grad V_o = sum_j C_oj s1(z_j) A_j
//! lap  V_o = sum_j C_oj s2(z_j) |A_j|^2
//! ```
//!
//! Parameters are flattened as `A` (row-major, `m x d`), `b` (`m`), `C`
//! (row-major, `k x m`), `c` (`k`).

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::InterfaceSample;

const FORMAT_HEADER: &str = "shallow-net v1";

/// Logistic sigmoid, evaluated without overflow for large `|z|`.
#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `(sigma, sigma', sigma'', sigma''')` at `z`.
#[inline]
pub fn sigmoid_derivatives(z: f64) -> [f64; 4] {
    let s = sigmoid(z);
    let s1 = s * (1.0 - s);
    let s2 = s1 * (1.0 - 2.0 * s);
    let s3 = s2 * (1.0 - 2.0 * s) - 2.0 * s1 * s1;
    [s, s1, s2, s3]
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShallowNet {
    input_dim: usize,
    width: usize,
    n_outputs: usize,
    hidden_weights: Vec<f64>,
    hidden_biases: Vec<f64>,
    output_weights: Vec<f64>,
    output_biases: Vec<f64>,
    seed: u64,
}

/// Value, gradient (`k x d`, row-major) and Laplacian of every output.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialDerivatives {
    pub value: Vec<f64>,
    pub gradient: Vec<f64>,
    pub laplacian: Vec<f64>,
}

impl SpatialDerivatives {
    pub fn gradient_of(&self, output: usize, dim: usize) -> &[f64] {
        &self.gradient[output * dim..(output + 1) * dim]
    }
}

impl ShallowNet {
    /// All parameters zero.
    pub fn zeros(input_dim: usize, width: usize, n_outputs: usize) -> Result<Self> {
        if !(input_dim == 2 || input_dim == 3) {
            return Err(Error::InvalidArgument(format!(
                "input dimension {input_dim} not in {{2, 3}}"
            )));
        }
        if width == 0 || n_outputs == 0 {
            return Err(Error::InvalidArgument(
                "network needs at least one neuron and one output".into(),
            ));
        }
        Ok(ShallowNet {
            input_dim,
            width,
            n_outputs,
            hidden_weights: vec![0.0; width * input_dim],
            hidden_biases: vec![0.0; width],
            output_weights: vec![0.0; n_outputs * width],
            output_biases: vec![0.0; n_outputs],
            seed: 0,
        })
    }

    /// Hidden weights uniform in `[-1, 1] / sqrt(d)`, hidden biases uniform
    /// in `[-1, 1]`, output layer zero.
    pub fn random(input_dim: usize, width: usize, n_outputs: usize, seed: u64) -> Result<Self> {
        Self::random_scaled(input_dim, width, n_outputs, seed, 1.0, 1.0)
    }

    /// As [`ShallowNet::random`] with hidden weights uniform in
    /// `[-weight_scale, weight_scale] / sqrt(d)` and biases in
    /// `[-bias_scale, bias_scale]`.
    pub fn random_scaled(
        input_dim: usize,
        width: usize,
        n_outputs: usize,
        seed: u64,
        weight_scale: f64,
        bias_scale: f64,
    ) -> Result<Self> {
        let mut net = Self::zeros(input_dim, width, n_outputs)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scale = weight_scale / (input_dim as f64).sqrt();
        for w in &mut net.hidden_weights {
            *w = scale * rng.gen_range(-1.0..=1.0);
        }
        for b in &mut net.hidden_biases {
            *b = bias_scale * rng.gen_range(-1.0..=1.0);
        }
        net.seed = seed;
        Ok(net)
    }

    /// Builds a network from a flat parameter vector.
    pub fn from_params(
        input_dim: usize,
        width: usize,
        n_outputs: usize,
        params: &[f64],
    ) -> Result<Self> {
        let mut net = Self::zeros(input_dim, width, n_outputs)?;
        net.set_params(params)?;
        Ok(net)
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn n_outputs(&self) -> usize {
        self.n_outputs
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
    }

    pub fn param_count(&self) -> usize {
        self.width * self.input_dim + self.width + self.n_outputs * self.width + self.n_outputs
    }

    fn offsets(&self) -> (usize, usize, usize) {
        let b = self.width * self.input_dim;
        let c = b + self.width;
        let c0 = c + self.n_outputs * self.width;
        (b, c, c0)
    }

    pub fn params(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.param_count());
        p.extend_from_slice(&self.hidden_weights);
        p.extend_from_slice(&self.hidden_biases);
        p.extend_from_slice(&self.output_weights);
        p.extend_from_slice(&self.output_biases);
        p
    }

    pub fn set_params(&mut self, p: &[f64]) -> Result<()> {
        if p.len() != self.param_count() {
            return Err(Error::DimensionMismatch {
                expected: self.param_count(),
                got: p.len(),
            });
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("network parameters"));
        }
        let (ob, oc, oc0) = self.offsets();
        self.hidden_weights.copy_from_slice(&p[..ob]);
        self.hidden_biases.copy_from_slice(&p[ob..oc]);
        self.output_weights.copy_from_slice(&p[oc..oc0]);
        self.output_biases.copy_from_slice(&p[oc0..]);
        Ok(())
    }

    pub fn hidden_weight(&self, j: usize) -> &[f64] {
        &self.hidden_weights[j * self.input_dim..(j + 1) * self.input_dim]
    }

    pub fn hidden_bias(&self, j: usize) -> f64 {
        self.hidden_biases[j]
    }

    pub fn output_weight(&self, o: usize, j: usize) -> f64 {
        self.output_weights[o * self.width + j]
    }

    pub fn output_bias(&self, o: usize) -> f64 {
        self.output_biases[o]
    }

    /// Network with only output `o` kept; shares the hidden layer.
    pub fn output_slice(&self, o: usize) -> ShallowNet {
        ShallowNet {
            input_dim: self.input_dim,
            width: self.width,
            n_outputs: 1,
            hidden_weights: self.hidden_weights.clone(),
            hidden_biases: self.hidden_biases.clone(),
            output_weights: self.output_weights[o * self.width..(o + 1) * self.width].to_vec(),
            output_biases: vec![self.output_biases[o]],
            seed: self.seed,
        }
    }

    #[inline]
    fn pre_activation(&self, j: usize, x: &[f64]) -> f64 {
        let a = self.hidden_weight(j);
        let mut z = self.hidden_biases[j];
        for l in 0..self.input_dim {
            z += a[l] * x[l];
        }
        z
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        let mut out = self.output_biases.clone();
        for j in 0..self.width {
            let s = sigmoid(self.pre_activation(j, x));
            for (o, v) in out.iter_mut().enumerate() {
                *v += self.output_weight(o, j) * s;
            }
        }
        Ok(out)
    }

    /// Value of output `o` only; `x` must have `input_dim` entries.
    pub fn eval_output(&self, x: &[f64], o: usize) -> f64 {
        let row = &self.output_weights[o * self.width..(o + 1) * self.width];
        let mut v = self.output_biases[o];
        for (j, c) in row.iter().enumerate() {
            v += c * sigmoid(self.pre_activation(j, x));
        }
        v
    }

    /// Laplacian of output `o` only.
    pub fn laplacian_output(&self, x: &[f64], o: usize) -> f64 {
        let row = &self.output_weights[o * self.width..(o + 1) * self.width];
        let mut v = 0.0;
        for (j, c) in row.iter().enumerate() {
            let [_, _, s2, _] = sigmoid_derivatives(self.pre_activation(j, x));
            let a = self.hidden_weight(j);
            let a2: f64 = a.iter().map(|w| w * w).sum();
            v += c * s2 * a2;
        }
        v
    }

    /// Gradient of output `o` written into `grad`.
    pub fn gradient_output(&self, x: &[f64], o: usize, grad: &mut [f64]) {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let row = &self.output_weights[o * self.width..(o + 1) * self.width];
        for (j, c) in row.iter().enumerate() {
            let [_, s1, _, _] = sigmoid_derivatives(self.pre_activation(j, x));
            let a = self.hidden_weight(j);
            for l in 0..self.input_dim {
                grad[l] += c * s1 * a[l];
            }
        }
    }

    pub fn spatial_derivatives(&self, x: &[f64]) -> Result<SpatialDerivatives> {
        self.check_point(x)?;
        let (d, k) = (self.input_dim, self.n_outputs);
        let mut value = self.output_biases.clone();
        let mut gradient = vec![0.0; k * d];
        let mut laplacian = vec![0.0; k];
        for j in 0..self.width {
            let [s, s1, s2, _] = sigmoid_derivatives(self.pre_activation(j, x));
            let a = self.hidden_weight(j);
            let a2: f64 = a.iter().map(|w| w * w).sum();
            for o in 0..k {
                let c = self.output_weight(o, j);
                value[o] += c * s;
                laplacian[o] += c * s2 * a2;
                for l in 0..d {
                    gradient[o * d + l] += c * s1 * a[l];
                }
            }
        }
        Ok(SpatialDerivatives {
            value,
            gradient,
            laplacian,
        })
    }

    /// Parameter derivatives of `[V_o, n . grad V_o, lap V_o]` at the sample
    /// point, in flatten order.
    pub fn parameter_jacobian_rows(
        &self,
        sample: &InterfaceSample,
        o: usize,
    ) -> Result<[Vec<f64>; 3]> {
        self.check_point(&sample.point)?;
        self.check_point(&sample.normal)?;
        if o >= self.n_outputs {
            return Err(Error::InvalidArgument(format!("output index {o} out of range")));
        }
        let p = self.param_count();
        let mut rows = [vec![0.0; p], vec![0.0; p], vec![0.0; p]];
        let [r0, r1, r2] = &mut rows;
        self.fill_jacobian_rows(&sample.point, &sample.normal, o, r0, r1, r2);
        Ok(rows)
    }

    /// Writes the three parameter-derivative rows for output `o` into the
    /// given slices (each `param_count()` long). Entries for other outputs'
    /// output-layer parameters are set to zero.
    pub fn fill_jacobian_rows(
        &self,
        x: &[f64],
        normal: &[f64],
        o: usize,
        value_row: &mut [f64],
        normal_row: &mut [f64],
        lap_row: &mut [f64],
    ) {
        let d = self.input_dim;
        let (ob, oc, oc0) = self.offsets();
        for row in [&mut *value_row, &mut *normal_row, &mut *lap_row] {
            row.iter_mut().for_each(|v| *v = 0.0);
        }
        for j in 0..self.width {
            let a = self.hidden_weight(j);
            let [s, s1, s2, s3] = sigmoid_derivatives(self.pre_activation(j, x));
            let an: f64 = (0..d).map(|l| a[l] * normal[l]).sum();
            let a2: f64 = a.iter().map(|w| w * w).sum();
            let c = self.output_weight(o, j);

            // output weight C[o, j]
            let q = oc + o * self.width + j;
            value_row[q] = s;
            normal_row[q] = s1 * an;
            lap_row[q] = s2 * a2;

            // hidden bias b[j]
            value_row[ob + j] = c * s1;
            normal_row[ob + j] = c * s2 * an;
            lap_row[ob + j] = c * s3 * a2;

            // hidden weights A[j, l]
            for l in 0..d {
                let q = j * d + l;
                value_row[q] = c * s1 * x[l];
                normal_row[q] = c * (s2 * x[l] * an + s1 * normal[l]);
                lap_row[q] = c * (s3 * x[l] * a2 + 2.0 * s2 * a[l]);
            }
        }
        value_row[oc0 + o] = 1.0;
    }

    /// Versioned text record: header, shape line, one parameter per line.
    /// Floats are written in shortest round-trip form, so reading back is
    /// bit-exact.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "{FORMAT_HEADER}").unwrap();
        writeln!(
            s,
            "dim {} width {} outputs {} seed {}",
            self.input_dim, self.width, self.n_outputs, self.seed
        )
        .unwrap();
        for v in self.params() {
            writeln!(s, "{v:e}").unwrap();
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim() == FORMAT_HEADER => {}
            other => {
                return Err(Error::NetFormat(format!("bad header {other:?}")));
            }
        }
        let shape = lines
            .next()
            .ok_or_else(|| Error::NetFormat("missing shape line".into()))?;
        let fields: Vec<&str> = shape.split_whitespace().collect();
        let get = |key: &str| -> Result<u64> {
            let pos = fields
                .iter()
                .position(|f| *f == key)
                .ok_or_else(|| Error::NetFormat(format!("missing `{key}`")))?;
            fields
                .get(pos + 1)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::NetFormat(format!("bad value for `{key}`")))
        };
        let (d, m, k, seed) = (get("dim")?, get("width")?, get("outputs")?, get("seed")?);
        let params: Vec<f64> = lines
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                l.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::NetFormat(format!("bad parameter `{l}`")))
            })
            .collect::<Result<_>>()?;
        let mut net = Self::from_params(d as usize, m as usize, k as usize, &params)?;
        net.seed = seed;
        Ok(net)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}
