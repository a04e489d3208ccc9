//! Interface descriptions: a level set `phi` (negative inside) plus, where
//! available, a parameterization used to draw training points on the
//! interface.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::expr::Expr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    Inside,
    Outside,
}

/// Level set and parameterization given as expressions.
///
/// The level set is written in `x, y[, z]`; the parameterization in `s`
/// (curves) or `s, t` (surfaces), one expression per coordinate.
#[derive(Debug, Clone)]
pub struct CustomShape {
    dim: usize,
    level_set: Expr,
    gradient: Vec<Expr>,
    param: Option<Vec<Expr>>,
    param_derivative: Option<Vec<Expr>>,
    param_ranges: Vec<(f64, f64)>,
}

impl CustomShape {
    pub fn new(
        dim: usize,
        level_set: Expr,
        param: Option<Vec<Expr>>,
        param_ranges: Vec<(f64, f64)>,
    ) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidArgument(format!("dimension {dim} not in {{2, 3}}")));
        }
        if let Some(p) = &param {
            if p.len() != dim || param_ranges.len() != dim - 1 {
                return Err(Error::InvalidArgument(
                    "parameterization needs one expression per coordinate and d-1 ranges".into(),
                ));
            }
        }
        let gradient = level_set.gradient(dim);
        let param_derivative = match (&param, dim) {
            (Some(p), 2) => Some(p.iter().map(|e| e.diff(0)).collect()),
            _ => None,
        };
        Ok(CustomShape {
            dim,
            level_set,
            gradient,
            param,
            param_derivative,
            param_ranges,
        })
    }
}

#[derive(Debug, Clone)]
pub enum Shape {
    /// `(x/a)^2 + (y/b)^2 = 1`, parameterized by `(a cos s, b sin s)`.
    Ellipse { a: f64, b: f64 },
    /// `(x/a)^4 + (y/b)^4 = 1`, parameterized in polar angle.
    SuperEllipse { a: f64, b: f64 },
    /// `(x/a)^2 + (y/b)^2 + (z/c)^2 = 1`, parameterized by spherical angles.
    Ellipsoid { a: f64, b: f64, c: f64 },
    Custom(CustomShape),
}

#[derive(Debug, Clone)]
pub struct InterfaceGeometry {
    shape: Shape,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceSample {
    pub point: Vec<f64>,
    pub normal: Vec<f64>,
    /// Unit tangent `X'(s)/|X'(s)|`; 2D only.
    pub tangent: Option<[f64; 2]>,
    /// Curve parameter `s`; 2D only.
    pub param: Option<f64>,
}

impl InterfaceGeometry {
    pub fn new(shape: Shape) -> Self {
        InterfaceGeometry { shape }
    }

    pub fn ellipse(a: f64, b: f64) -> Self {
        Self::new(Shape::Ellipse { a, b })
    }

    pub fn circle(r: f64) -> Self {
        Self::new(Shape::Ellipse { a: r, b: r })
    }

    pub fn super_ellipse(a: f64, b: f64) -> Self {
        Self::new(Shape::SuperEllipse { a, b })
    }

    pub fn ellipsoid(a: f64, b: f64, c: f64) -> Self {
        Self::new(Shape::Ellipsoid { a, b, c })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        match &self.shape {
            Shape::Ellipse { .. } | Shape::SuperEllipse { .. } => 2,
            Shape::Ellipsoid { .. } => 3,
            Shape::Custom(c) => c.dim,
        }
    }

    pub fn level_set(&self, x: &[f64]) -> f64 {
        match &self.shape {
            Shape::Ellipse { a, b } => (x[0] / a).powi(2) + (x[1] / b).powi(2) - 1.0,
            Shape::SuperEllipse { a, b } => (x[0] / a).powi(4) + (x[1] / b).powi(4) - 1.0,
            Shape::Ellipsoid { a, b, c } => {
                (x[0] / a).powi(2) + (x[1] / b).powi(2) + (x[2] / c).powi(2) - 1.0
            }
            Shape::Custom(c) => c.level_set.eval(x),
        }
    }

    pub fn level_set_gradient(&self, x: &[f64]) -> Vec<f64> {
        match &self.shape {
            Shape::Ellipse { a, b } => vec![2.0 * x[0] / (a * a), 2.0 * x[1] / (b * b)],
            Shape::SuperEllipse { a, b } => vec![
                4.0 * x[0].powi(3) / a.powi(4),
                4.0 * x[1].powi(3) / b.powi(4),
            ],
            Shape::Ellipsoid { a, b, c } => vec![
                2.0 * x[0] / (a * a),
                2.0 * x[1] / (b * b),
                2.0 * x[2] / (c * c),
            ],
            Shape::Custom(c) => c.gradient.iter().map(|g| g.eval(x)).collect(),
        }
    }

    /// `phi = 0` counts as outside, so the singular part vanishes there.
    pub fn classify(&self, x: &[f64]) -> Region {
        if self.level_set(x) < 0.0 {
            Region::Inside
        } else {
            Region::Outside
        }
    }

    pub fn is_inside(&self, x: &[f64]) -> bool {
        self.classify(x) == Region::Inside
    }

    /// Outward unit normal `grad phi / |grad phi|`, pointing from inside to
    /// outside.
    pub fn unit_normal(&self, x: &[f64]) -> Result<Vec<f64>> {
        let g = self.level_set_gradient(x);
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm >= 1e-14) {
            return Err(Error::DegenerateGradient(norm));
        }
        Ok(g.into_iter().map(|v| v / norm).collect())
    }

    pub fn has_parameterization(&self) -> bool {
        match &self.shape {
            Shape::Custom(c) => c.param.is_some(),
            _ => true,
        }
    }

    /// Parameter domain per parameter: `[s0, s1)` for curves, `(theta, phi)`
    /// ranges for surfaces.
    pub fn param_ranges(&self) -> Vec<(f64, f64)> {
        match &self.shape {
            Shape::Ellipse { .. } | Shape::SuperEllipse { .. } => vec![(0.0, 2.0 * PI)],
            Shape::Ellipsoid { .. } => vec![(0.0, PI), (0.0, 2.0 * PI)],
            Shape::Custom(c) => c.param_ranges.clone(),
        }
    }

    /// Point `X(params)` on the interface.
    pub fn point_at(&self, params: &[f64]) -> Result<Vec<f64>> {
        Ok(match &self.shape {
            Shape::Ellipse { a, b } => vec![a * params[0].cos(), b * params[0].sin()],
            Shape::SuperEllipse { a, b } => {
                let (s, c) = params[0].sin_cos();
                let r = super_ellipse_radius(*a, *b, params[0]);
                vec![r * c, r * s]
            }
            Shape::Ellipsoid { a, b, c } => {
                let (st, ct) = params[0].sin_cos();
                let (sp, cp) = params[1].sin_cos();
                vec![a * st * cp, b * st * sp, c * ct]
            }
            Shape::Custom(c) => {
                let p = c.param.as_ref().ok_or(Error::UnsupportedGeometry)?;
                p.iter().map(|e| e.eval(params)).collect()
            }
        })
    }

    /// Derivative `X'(s)` of a 2D curve parameterization.
    pub fn param_derivative(&self, s: f64) -> Result<[f64; 2]> {
        match &self.shape {
            Shape::Ellipse { a, b } => Ok([-a * s.sin(), b * s.cos()]),
            Shape::SuperEllipse { a, b } => {
                let (sn, cs) = s.sin_cos();
                let q = cs.powi(4) / a.powi(4) + sn.powi(4) / b.powi(4);
                let dq = -4.0 * cs.powi(3) * sn / a.powi(4) + 4.0 * sn.powi(3) * cs / b.powi(4);
                let r = q.powf(-0.25);
                let dr = -0.25 * q.powf(-1.25) * dq;
                Ok([dr * cs - r * sn, dr * sn + r * cs])
            }
            Shape::Ellipsoid { .. } => Err(Error::UnsupportedGeometry),
            Shape::Custom(c) => {
                let d = c.param_derivative.as_ref().ok_or(Error::UnsupportedGeometry)?;
                Ok([d[0].eval(&[s]), d[1].eval(&[s])])
            }
        }
    }

    /// Full sample (point, normal, tangent) at the given parameters.
    pub fn sample_at(&self, params: &[f64]) -> Result<InterfaceSample> {
        let point = self.point_at(params)?;
        let normal = self.unit_normal(&point)?;
        let (tangent, param) = if self.dim() == 2 {
            let d = self.param_derivative(params[0])?;
            let len = d[0].hypot(d[1]);
            if !(len > 0.0) {
                return Err(Error::DegenerateGradient(len));
            }
            (Some([d[0] / len, d[1] / len]), Some(params[0]))
        } else {
            (None, None)
        };
        Ok(InterfaceSample {
            point,
            normal,
            tangent,
            param,
        })
    }

    /// Draws `m` interface samples with parameters i.i.d. uniform over the
    /// parameter domain. Deterministic in `seed`.
    pub fn sample_interface(&self, m: usize, seed: u64) -> Result<Vec<InterfaceSample>> {
        if m == 0 {
            return Err(Error::InvalidArgument("sample count must be >= 1".into()));
        }
        if !self.has_parameterization() {
            return Err(Error::UnsupportedGeometry);
        }
        let ranges = self.param_ranges();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = vec![0.0; ranges.len()];
        (0..m)
            .map(|_| {
                for (p, &(lo, hi)) in params.iter_mut().zip(&ranges) {
                    *p = rng.gen_range(lo..hi);
                }
                self.sample_at(&params)
            })
            .collect()
    }
}

fn super_ellipse_radius(a: f64, b: f64, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    (c.powi(4) / a.powi(4) + s.powi(4) / b.powi(4)).powf(-0.25)
}
