//! Direct FFT-based Poisson solvers on uniform Cartesian grids.
//!
//! Every solver diagonalizes the discrete Laplacian with a trigonometric
//! transform along each axis:
//!
//! * node-aligned Dirichlet axis: DST-I over the interior nodes,
//! * cell-aligned Neumann axis: DCT-II over the cells (ghost flux elimination),
//! * cell-aligned Dirichlet axis: DST-II over the cells (ghost reflection).

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Alignment {
    /// `n + 1` points at `a + i h`, including both walls.
    Node,
    /// `n` points at `a + (i + 1/2) h`.
    Cell,
}

/// Uniform grid with the same spacing `h` on every axis.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    bounds: Vec<(f64, f64)>,
    n: usize,
    alignment: Vec<Alignment>,
}

impl GridSpec {
    pub fn new(bounds: &[(f64, f64)], n: usize, alignment: &[Alignment]) -> Result<Self> {
        let dim = bounds.len();
        if !(2..=3).contains(&dim) {
            return Err(Error::InvalidArgument(format!("grid dimension {dim} not in {{2, 3}}")));
        }
        if alignment.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: alignment.len() });
        }
        if n < 2 {
            return Err(Error::InvalidArgument("grid needs n >= 2".into()));
        }
        let len0 = bounds[0].1 - bounds[0].0;
        for &(a, b) in bounds {
            if !(a.is_finite() && b.is_finite() && b > a) {
                return Err(Error::InvalidArgument(format!("bad interval [{a}, {b}]")));
            }
            if ((b - a) - len0).abs() > 1e-12 * len0.abs() {
                return Err(Error::InvalidArgument(
                    "all axes must have the same length (uniform h)".into(),
                ));
            }
        }
        Ok(GridSpec { bounds: bounds.to_vec(), n, alignment: alignment.to_vec() })
    }

    /// Node-aligned grid on every axis.
    pub fn nodes(bounds: &[(f64, f64)], n: usize) -> Result<Self> {
        Self::new(bounds, n, &vec![Alignment::Node; bounds.len()])
    }

    /// Cell-centered grid on every axis.
    pub fn cells(bounds: &[(f64, f64)], n: usize) -> Result<Self> {
        Self::new(bounds, n, &vec![Alignment::Cell; bounds.len()])
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        (self.bounds[0].1 - self.bounds[0].0) / self.n as f64
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn alignment(&self, axis: usize) -> Alignment {
        self.alignment[axis]
    }

    pub fn alignments(&self) -> &[Alignment] {
        &self.alignment
    }

    pub fn points_on_axis(&self, axis: usize) -> usize {
        match self.alignment[axis] {
            Alignment::Node => self.n + 1,
            Alignment::Cell => self.n,
        }
    }

    pub fn shape(&self) -> Vec<usize> {
        (0..self.dim()).map(|a| self.points_on_axis(a)).collect()
    }

    pub fn len(&self) -> usize {
        self.shape().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        let a = self.bounds[axis].0;
        match self.alignment[axis] {
            Alignment::Node => a + i as f64 * self.h(),
            Alignment::Cell => a + (i as f64 + 0.5) * self.h(),
        }
    }

    /// Row-major flat index (axis 0 slowest).
    pub fn index(&self, idx: &[usize]) -> usize {
        idx.iter()
            .enumerate()
            .fold(0, |acc, (a, &i)| acc * self.points_on_axis(a) + i)
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for a in (0..self.dim()).rev() {
            let p = self.points_on_axis(a);
            idx[a] = flat % p;
            flat /= p;
        }
        idx
    }

    pub fn point(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter().enumerate().map(|(a, &i)| self.coord(a, i)).collect()
    }

    /// Calls `f(flat, idx, point)` for every grid point in storage order.
    pub fn for_each_point(&self, mut f: impl FnMut(usize, &[usize], &[f64])) {
        let dim = self.dim();
        let shape = self.shape();
        let mut idx = vec![0; dim];
        let mut p: Vec<f64> = (0..dim).map(|a| self.coord(a, 0)).collect();
        for flat in 0..self.len() {
            f(flat, &idx, &p);
            for a in (0..dim).rev() {
                idx[a] += 1;
                if idx[a] < shape[a] {
                    p[a] = self.coord(a, idx[a]);
                    break;
                }
                idx[a] = 0;
                p[a] = self.coord(a, 0);
            }
        }
    }

    /// True for node-aligned wall points (index `0` or `n` on a node axis).
    pub fn is_boundary(&self, idx: &[usize]) -> bool {
        idx.iter().enumerate().any(|(a, &i)| {
            self.alignment[a] == Alignment::Node && (i == 0 || i == self.n)
        })
    }
}

/// Real values over the points of a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    spec: GridSpec,
    values: Vec<f64>,
}

impl GridField {
    pub fn new(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::DimensionMismatch { expected: spec.len(), got: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("grid field"));
        }
        Ok(GridField { spec, values })
    }

    pub fn zeros(spec: GridSpec) -> Self {
        let values = vec![0.0; spec.len()];
        GridField { spec, values }
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(spec: GridSpec, mut f: impl FnMut(&[f64]) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(spec.len());
        spec.for_each_point(|_, _, p| values.push(f(p)));
        Self::new(spec, values)
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.values[self.spec.index(idx)]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Max-norm of `self - other` over points where `mask(idx)` holds.
    pub fn max_diff_where(&self, other: &GridField, mask: impl Fn(&[usize]) -> bool) -> Result<f64> {
        self.check_same(other)?;
        let mut m = 0.0f64;
        self.spec.for_each_point(|flat, idx, _| {
            if mask(idx) {
                m = m.max((self.values[flat] - other.values[flat]).abs());
            }
        });
        Ok(m)
    }

    pub fn max_diff(&self, other: &GridField) -> Result<f64> {
        self.max_diff_where(other, |_| true)
    }

    fn check_same(&self, other: &GridField) -> Result<()> {
        if self.spec != other.spec {
            return Err(Error::AlignmentMismatch("fields live on different grids".into()));
        }
        Ok(())
    }
}

/// Per-wall data for 2D grids.
///
/// `low[axis]` and `high[axis]` hold values on the walls `x_axis = a` and
/// `x_axis = b`, listed along the other axis at that axis' grid points.
#[derive(Debug, Clone, PartialEq)]
pub struct WallData {
    pub low: [Vec<f64>; 2],
    pub high: [Vec<f64>; 2],
}

impl WallData {
    /// Evaluates `f(axis, point)` at the wall points of a 2D grid, where
    /// `point` lies on the wall and runs over the other axis' grid points.
    pub fn from_fn(spec: &GridSpec, mut f: impl FnMut(usize, &[f64]) -> f64) -> Result<Self> {
        if spec.dim() != 2 {
            return Err(Error::InvalidArgument("wall data is 2D only".into()));
        }
        let mut side = |axis: usize, wall: f64| {
            let other = 1 - axis;
            (0..spec.points_on_axis(other))
                .map(|j| {
                    let mut p = [0.0; 2];
                    p[axis] = wall;
                    p[other] = spec.coord(other, j);
                    f(axis, &p)
                })
                .collect::<Vec<f64>>()
        };
        let low = [side(0, spec.bounds[0].0), side(1, spec.bounds[1].0)];
        let high = [side(0, spec.bounds[0].1), side(1, spec.bounds[1].1)];
        let w = WallData { low, high };
        w.check(spec)?;
        Ok(w)
    }

    pub fn zeros(spec: &GridSpec) -> Self {
        let len = |axis: usize| vec![0.0; spec.points_on_axis(1 - axis)];
        WallData { low: [len(0), len(1)], high: [len(0), len(1)] }
    }

    fn check(&self, spec: &GridSpec) -> Result<()> {
        for axis in 0..2 {
            let want = spec.points_on_axis(1 - axis);
            for v in [&self.low[axis], &self.high[axis]] {
                if v.len() != want {
                    return Err(Error::DimensionMismatch { expected: want, got: v.len() });
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::NonFinite("wall data"));
                }
            }
        }
        Ok(())
    }
}

/// Boundary treatment for [`apply_laplacian`].
#[derive(Debug, Clone, Copy)]
pub enum Boundary<'a> {
    /// All axes node-aligned; wall values are the field's own boundary nodes.
    Dirichlet,
    /// All axes cell-aligned (2D); outward normal derivatives on the walls.
    Neumann(&'a WallData),
    /// One node axis and one cell axis (2D). Walls of the node axis take the
    /// field's boundary nodes; walls of the cell axis take these values.
    Staggered(&'a WallData),
}

/// Discrete Laplacian of `field`.
///
/// Dirichlet and staggered outputs are zero at node-aligned wall points.
/// Missing neighbors across a cell-aligned wall are ghost values: `u0 + h g`
/// for Neumann flux `g`, `2 b - u0` for Dirichlet value `b`.
pub fn apply_laplacian(field: &GridField, boundary: Boundary<'_>) -> Result<GridField> {
    let spec = field.spec();
    let walls = match boundary {
        Boundary::Dirichlet => {
            require_all(spec, Alignment::Node, "Dirichlet")?;
            None
        }
        Boundary::Neumann(w) => {
            require_2d(spec)?;
            require_all(spec, Alignment::Cell, "Neumann")?;
            w.check(spec)?;
            Some((w, CellWall::Flux))
        }
        Boundary::Staggered(w) => {
            staggered_axes(spec)?;
            w.check(spec)?;
            Some((w, CellWall::Value))
        }
    };
    let dim = spec.dim();
    let h2 = spec.h() * spec.h();
    let u = field.values();
    let mut out = vec![0.0; u.len()];
    let strides = strides(&spec.shape());
    spec.for_each_point(|flat, idx, _| {
        if spec.is_boundary(idx) {
            return;
        }
        let u0 = u[flat];
        let mut acc = 0.0;
        for axis in 0..dim {
            let i = idx[axis];
            let s = strides[axis];
            let last = spec.points_on_axis(axis) - 1;
            for (has_neighbor, high) in [(i > 0, false), (i < last, true)] {
                if has_neighbor {
                    acc += if high { u[flat + s] } else { u[flat - s] };
                    continue;
                }
                // Cell-aligned wall: eliminate the ghost.
                let (w, kind) = walls.expect("node axes always have neighbors off the wall");
                let along = idx[1 - axis];
                let g = if high { w.high[axis][along] } else { w.low[axis][along] };
                acc += match kind {
                    CellWall::Flux => u0 + spec.h() * g,
                    CellWall::Value => 2.0 * g - u0,
                };
            }
            acc -= 2.0 * u0;
        }
        out[flat] = acc / h2;
    });
    GridField::new(spec.clone(), out)
}

#[derive(Debug, Clone, Copy)]
enum CellWall {
    Flux,
    Value,
}

/// Solves `Δ_h w = rhs` at interior nodes with `w = boundary` on the walls.
///
/// `rhs` values on wall nodes and `boundary` values at interior nodes are
/// ignored. Works in 2D and 3D.
pub fn solve_dirichlet(spec: &GridSpec, rhs: &GridField, boundary: &GridField) -> Result<GridField> {
    require_all(spec, Alignment::Node, "Dirichlet")?;
    if rhs.spec() != spec || boundary.spec() != spec {
        return Err(Error::AlignmentMismatch("rhs/boundary grid differs from spec".into()));
    }
    let dim = spec.dim();
    let n = spec.n();
    let m = n - 1;
    let h2 = spec.h() * spec.h();
    let ishape = vec![m; dim];
    let mut work = vec![0.0; m.pow(dim as u32)];
    let b = boundary.values();
    let mut idx = vec![0; dim];
    let strides_full = strides(&spec.shape());
    for (k, wv) in work.iter_mut().enumerate() {
        unflatten(k, &ishape, &mut idx);
        idx.iter_mut().for_each(|i| *i += 1);
        let flat = spec.index(&idx);
        let mut r = rhs.values()[flat];
        for axis in 0..dim {
            if idx[axis] == 1 {
                r -= b[flat - strides_full[axis]] / h2;
            }
            if idx[axis] == n - 1 {
                r -= b[flat + strides_full[axis]] / h2;
            }
        }
        *wv = r;
    }
    let kinds = vec![Kind::DstI; dim];
    spectral_solve(&mut work, &ishape, &kinds, spec.h());

    let mut out = b.to_vec();
    for (k, wv) in work.iter().enumerate() {
        unflatten(k, &ishape, &mut idx);
        idx.iter_mut().for_each(|i| *i += 1);
        out[spec.index(&idx)] = *wv;
    }
    GridField::new(spec.clone(), out)
}

/// Result of [`solve_neumann_cell`].
#[derive(Debug, Clone, PartialEq)]
pub struct NeumannSolution {
    /// Zero-mean solution.
    pub field: GridField,
    /// Compatibility defect `Σ rhs h² − ∮ flux` removed from the rhs as a
    /// uniform shift of `defect / area`.
    pub defect: f64,
}

/// Cell-centered 2D Neumann solve; `flux` holds outward normal derivatives
/// at the boundary faces.
pub fn solve_neumann_cell(spec: &GridSpec, rhs: &GridField, flux: &WallData) -> Result<NeumannSolution> {
    require_2d(spec)?;
    require_all(spec, Alignment::Cell, "Neumann")?;
    if rhs.spec() != spec {
        return Err(Error::AlignmentMismatch("rhs grid differs from spec".into()));
    }
    flux.check(spec)?;
    let n = spec.n();
    let h = spec.h();
    let mut work = rhs.values().to_vec();
    let mut boundary_flux = 0.0;
    for axis in 0..2 {
        for along in 0..n {
            for (i, g) in [(0, flux.low[axis][along]), (n - 1, flux.high[axis][along])] {
                let idx = if axis == 0 { [i, along] } else { [along, i] };
                work[spec.index(&idx)] -= g / h;
                boundary_flux += g * h;
            }
        }
    }
    let defect = rhs.values().iter().sum::<f64>() * h * h - boundary_flux;
    let area = (n as f64 * h).powi(2);
    let shift = defect / area;
    work.iter_mut().for_each(|v| *v -= shift);

    spectral_solve(&mut work, &[n, n], &[Kind::DctII, Kind::DctII], h);
    let mean = work.iter().sum::<f64>() / work.len() as f64;
    work.iter_mut().for_each(|v| *v -= mean);
    Ok(NeumannSolution { field: GridField::new(spec.clone(), work)?, defect })
}

/// 2D solve with one node-aligned and one cell-aligned axis.
///
/// `boundary.low/high[node_axis]` are imposed exactly at the wall nodes;
/// `boundary.low/high[cell_axis]` enter through the ghost reflection
/// `u_ghost = 2 b − u_first`.
pub fn solve_dirichlet_staggered(spec: &GridSpec, rhs: &GridField, boundary: &WallData) -> Result<GridField> {
    let (node_axis, cell_axis) = staggered_axes(spec)?;
    if rhs.spec() != spec {
        return Err(Error::AlignmentMismatch("rhs grid differs from spec".into()));
    }
    boundary.check(spec)?;
    let n = spec.n();
    let h2 = spec.h() * spec.h();
    // Unknowns: interior nodes of the node axis times all cells.
    let mut ishape = [0usize; 2];
    ishape[node_axis] = n - 1;
    ishape[cell_axis] = n;
    let mut work = vec![0.0; (n - 1) * n];
    let mut idx = vec![0; 2];
    for (k, wv) in work.iter_mut().enumerate() {
        unflatten(k, &ishape, &mut idx);
        idx[node_axis] += 1;
        let i = idx[node_axis];
        let j = idx[cell_axis];
        let mut r = rhs.get(&idx);
        if i == 1 {
            r -= boundary.low[node_axis][j] / h2;
        }
        if i == n - 1 {
            r -= boundary.high[node_axis][j] / h2;
        }
        if j == 0 {
            r -= 2.0 * boundary.low[cell_axis][i] / h2;
        }
        if j == n - 1 {
            r -= 2.0 * boundary.high[cell_axis][i] / h2;
        }
        *wv = r;
    }
    let mut kinds = [Kind::DstI; 2];
    kinds[cell_axis] = Kind::DstII;
    spectral_solve(&mut work, &ishape, &kinds, spec.h());

    let mut out = vec![0.0; spec.len()];
    for j in 0..n {
        for (i, v) in [(0, boundary.low[node_axis][j]), (n, boundary.high[node_axis][j])] {
            let mut w = [0; 2];
            w[node_axis] = i;
            w[cell_axis] = j;
            out[spec.index(&w)] = v;
        }
    }
    for (k, wv) in work.iter().enumerate() {
        unflatten(k, &ishape, &mut idx);
        idx[node_axis] += 1;
        out[spec.index(&idx)] = *wv;
    }
    GridField::new(spec.clone(), out)
}

fn require_all(spec: &GridSpec, want: Alignment, what: &str) -> Result<()> {
    if spec.alignments().iter().any(|&a| a != want) {
        return Err(Error::AlignmentMismatch(format!(
            "{what} solver needs {want:?} alignment on every axis"
        )));
    }
    Ok(())
}

fn require_2d(spec: &GridSpec) -> Result<()> {
    if spec.dim() != 2 {
        return Err(Error::InvalidArgument("solver is 2D only".into()));
    }
    Ok(())
}

/// `(node_axis, cell_axis)` of a staggered 2D grid.
fn staggered_axes(spec: &GridSpec) -> Result<(usize, usize)> {
    require_2d(spec)?;
    match (spec.alignment(0), spec.alignment(1)) {
        (Alignment::Node, Alignment::Cell) => Ok((0, 1)),
        (Alignment::Cell, Alignment::Node) => Ok((1, 0)),
        _ => Err(Error::AlignmentMismatch(
            "staggered solver needs exactly one cell-aligned axis".into(),
        )),
    }
}

fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1; shape.len()];
    for a in (0..shape.len().saturating_sub(1)).rev() {
        s[a] = s[a + 1] * shape[a + 1];
    }
    s
}

fn unflatten(mut k: usize, shape: &[usize], idx: &mut [usize]) {
    for a in (0..shape.len()).rev() {
        idx[a] = k % shape[a];
        k /= shape[a];
    }
}

/// Inverts the separable Laplacian on `data` in place: forward transform on
/// every axis, divide by the eigenvalue sums, inverse transform. Zero
/// eigenvalue sums (the Neumann constant mode) map to zero.
fn spectral_solve(data: &mut [f64], shape: &[usize], kinds: &[Kind], h: f64) {
    let mut transforms: Vec<LineTransform> = shape
        .iter()
        .zip(kinds)
        .map(|(&len, &kind)| LineTransform::new(kind, len))
        .collect();
    for (axis, t) in transforms.iter_mut().enumerate() {
        map_lines(data, shape, axis, |line| t.forward(line));
    }
    let eig: Vec<Vec<f64>> = transforms.iter().map(|t| t.eigenvalues(h)).collect();
    let mut idx = vec![0; shape.len()];
    for (k, v) in data.iter_mut().enumerate() {
        unflatten(k, shape, &mut idx);
        let lam: f64 = idx.iter().zip(&eig).map(|(&i, e)| e[i]).sum();
        *v = if lam == 0.0 { 0.0 } else { *v / lam };
    }
    for (axis, t) in transforms.iter_mut().enumerate() {
        map_lines(data, shape, axis, |line| t.inverse(line));
    }
}

/// Applies `f` to every 1D line of `data` along `axis`.
fn map_lines(data: &mut [f64], shape: &[usize], axis: usize, mut f: impl FnMut(&mut [f64])) {
    let len = shape[axis];
    let stride: usize = shape[axis + 1..].iter().product();
    if stride == 1 {
        data.chunks_exact_mut(len).for_each(f);
        return;
    }
    let outer: usize = shape[..axis].iter().product();
    let mut line = vec![0.0; len];
    for o in 0..outer {
        for inner in 0..stride {
            let base = o * len * stride + inner;
            for (t, l) in line.iter_mut().enumerate() {
                *l = data[base + t * stride];
            }
            f(&mut line);
            for (t, l) in line.iter().enumerate() {
                data[base + t * stride] = *l;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    /// `X_k = Σ x_j sin(π (j+1)(k+1) / (N+1))`.
    DstI,
    /// `X_k = Σ x_j cos(π k (j+½) / N)`.
    DctII,
    /// `X_k = Σ x_j sin(π (k+1)(j+½) / N)`.
    DstII,
}

struct LineTransform {
    kind: Kind,
    len: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    buf: Vec<Complex<f64>>,
    scratch: Vec<Complex<f64>>,
    /// `exp(-iπk / 2N)` for the cosine kinds.
    twiddle: Vec<Complex<f64>>,
}

impl LineTransform {
    fn new(kind: Kind, len: usize) -> Self {
        let fft_len = match kind {
            Kind::DstI => 2 * len + 2,
            Kind::DctII | Kind::DstII => 2 * len,
        };
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(fft_len);
        let inv = planner.plan_fft_inverse(fft_len);
        let scratch_len = fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len());
        let twiddle = (0..len)
            .map(|k| Complex::from_polar(1.0, -std::f64::consts::PI * k as f64 / (2 * len) as f64))
            .collect();
        LineTransform {
            kind,
            len,
            fwd,
            inv,
            buf: vec![Complex::default(); fft_len],
            scratch: vec![Complex::default(); scratch_len],
            twiddle,
        }
    }

    fn eigenvalues(&self, h: f64) -> Vec<f64> {
        let n = self.len as f64;
        let c = -4.0 / (h * h);
        let half_angle = |k: f64, period: f64| {
            let s = (k * std::f64::consts::PI / (2.0 * period)).sin();
            c * s * s
        };
        (0..self.len)
            .map(|k| match self.kind {
                Kind::DstI => half_angle(k as f64 + 1.0, n + 1.0),
                Kind::DctII => half_angle(k as f64, n),
                Kind::DstII => half_angle(k as f64 + 1.0, n),
            })
            .collect()
    }

    fn forward(&mut self, x: &mut [f64]) {
        match self.kind {
            Kind::DstI => self.dst1(x),
            Kind::DctII => self.dct2(x),
            Kind::DstII => {
                flip_signs(x);
                self.dct2(x);
                x.reverse();
            }
        }
    }

    fn inverse(&mut self, x: &mut [f64]) {
        match self.kind {
            Kind::DstI => {
                self.dst1(x);
                let s = 2.0 / (self.len as f64 + 1.0);
                x.iter_mut().for_each(|v| *v *= s);
            }
            Kind::DctII => self.idct2(x),
            Kind::DstII => {
                x.reverse();
                self.idct2(x);
                flip_signs(x);
            }
        }
    }

    fn dst1(&mut self, x: &mut [f64]) {
        let n = self.len;
        let buf = &mut self.buf;
        buf[0] = Complex::default();
        buf[n + 1] = Complex::default();
        for (j, &v) in x.iter().enumerate() {
            buf[j + 1] = Complex::new(v, 0.0);
            buf[2 * n + 1 - j] = Complex::new(-v, 0.0);
        }
        self.fwd.process_with_scratch(buf, &mut self.scratch);
        for (k, v) in x.iter_mut().enumerate() {
            *v = -0.5 * buf[k + 1].im;
        }
    }

    fn dct2(&mut self, x: &mut [f64]) {
        let n = self.len;
        let buf = &mut self.buf;
        for (j, &v) in x.iter().enumerate() {
            buf[j] = Complex::new(v, 0.0);
            buf[2 * n - 1 - j] = Complex::new(v, 0.0);
        }
        self.fwd.process_with_scratch(buf, &mut self.scratch);
        for (k, v) in x.iter_mut().enumerate() {
            *v = 0.5 * (buf[k] * self.twiddle[k]).re;
        }
    }

    fn idct2(&mut self, x: &mut [f64]) {
        let n = self.len;
        let buf = &mut self.buf;
        for (k, &v) in x.iter().enumerate() {
            let w = if k == 0 { 1.0 } else { 2.0 };
            buf[k] = self.twiddle[k].conj() * (w * v);
        }
        buf[n..].iter_mut().for_each(|c| *c = Complex::default());
        self.inv.process_with_scratch(buf, &mut self.scratch);
        let s = 1.0 / n as f64;
        for (j, v) in x.iter_mut().enumerate() {
            *v = buf[j].re * s;
        }
    }
}

fn flip_signs(x: &mut [f64]) {
    x.iter_mut().skip(1).step_by(2).for_each(|v| *v = -*v);
}
