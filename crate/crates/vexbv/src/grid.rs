//! Discrete boxes in one and two dimensions, nodal functions on them, and the
//! finite-difference calculus the rest of the crate is built on.
//!
//! Conventions that everything else relies on:
//!
//! * Nodes live on the lattice `a_k + i_k h_k`, `i_k = 0..=N_k`, stored
//!   row-major with axis 0 slowest.
//! * Gradients are **forward differences anchored at the lower corner of each
//!   cell**, so a gradient field is a per-cell quantity.  Together with the
//!   backward-difference divergence in [`divergence`] this makes
//!   `∫ u div w = −∫ ∇u : w` an exact algebraic identity, not an O(h) one.
//! * Integration is the midpoint rule: per-cell values times the cell volume.

use crate::error::{Error, Result};

/// Discretized box `Ω = ∏ (a_k, b_k)` with `N_k` cells per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDomain {
    dim: usize,
    a: [f64; 2],
    b: [f64; 2],
    n: [usize; 2],
}

impl GridDomain {
    /// 1D interval `(a, b)` split into `n` cells.
    pub fn line(a: f64, b: f64, n: usize) -> Result<Self> {
        Self::build(1, [a, 0.0], [b, 1.0], [n, 0])
    }

    /// 2D rectangle `(a1, b1) × (a2, b2)` with `n1 × n2` cells.
    pub fn rect(x: (f64, f64), nx: usize, y: (f64, f64), ny: usize) -> Result<Self> {
        Self::build(2, [x.0, y.0], [x.1, y.1], [nx, ny])
    }

    fn build(dim: usize, a: [f64; 2], b: [f64; 2], n: [usize; 2]) -> Result<Self> {
        for k in 0..dim {
            if !(a[k].is_finite() && b[k].is_finite() && b[k] > a[k]) {
                return Err(Error::InvalidDomain(format!(
                    "axis {k}: need finite a < b, got [{}, {}]",
                    a[k], b[k]
                )));
            }
            if n[k] < 4 {
                return Err(Error::InvalidDomain(format!(
                    "axis {k}: need at least 4 cells, got {}",
                    n[k]
                )));
            }
        }
        Ok(Self { dim, a, b, n })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn extent(&self, axis: usize) -> (f64, f64) {
        (self.a[axis], self.b[axis])
    }

    pub fn cells_along(&self, axis: usize) -> usize {
        self.n[axis]
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        (self.b[axis] - self.a[axis]) / self.n[axis] as f64
    }

    pub fn min_spacing(&self) -> f64 {
        (0..self.dim)
            .map(|k| self.spacing(k))
            .fold(f64::MAX, f64::min)
    }

    pub fn node_count(&self) -> usize {
        (0..self.dim).map(|k| self.n[k] + 1).product()
    }

    pub fn cell_count(&self) -> usize {
        (0..self.dim).map(|k| self.n[k]).product()
    }

    /// Volume of one cell, `∏ h_k`.
    pub fn cell_volume(&self) -> f64 {
        (0..self.dim).map(|k| self.spacing(k)).product()
    }

    /// Lebesgue measure of the whole box.
    pub fn volume(&self) -> f64 {
        (0..self.dim).map(|k| self.b[k] - self.a[k]).product()
    }

    pub fn diameter(&self) -> f64 {
        (0..self.dim)
            .map(|k| (self.b[k] - self.a[k]).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn node_flat(&self, idx: [usize; 2]) -> usize {
        match self.dim {
            1 => idx[0],
            _ => idx[0] * (self.n[1] + 1) + idx[1],
        }
    }

    pub fn node_multi(&self, flat: usize) -> [usize; 2] {
        match self.dim {
            1 => [flat, 0],
            _ => [flat / (self.n[1] + 1), flat % (self.n[1] + 1)],
        }
    }

    pub fn cell_flat(&self, idx: [usize; 2]) -> usize {
        match self.dim {
            1 => idx[0],
            _ => idx[0] * self.n[1] + idx[1],
        }
    }

    pub fn cell_multi(&self, flat: usize) -> [usize; 2] {
        match self.dim {
            1 => [flat, 0],
            _ => [flat / self.n[1], flat % self.n[1]],
        }
    }

    pub fn node_coords(&self, flat: usize) -> [f64; 2] {
        let idx = self.node_multi(flat);
        let mut x = [0.0; 2];
        for k in 0..self.dim {
            x[k] = self.a[k] + idx[k] as f64 * self.spacing(k);
        }
        x
    }

    pub fn cell_center(&self, flat: usize) -> [f64; 2] {
        let idx = self.cell_multi(flat);
        let mut x = [0.0; 2];
        for k in 0..self.dim {
            x[k] = self.a[k] + (idx[k] as f64 + 0.5) * self.spacing(k);
        }
        x
    }

    pub fn is_boundary_node(&self, flat: usize) -> bool {
        let idx = self.node_multi(flat);
        (0..self.dim).any(|k| idx[k] == 0 || idx[k] == self.n[k])
    }

    /// Corner nodes of a cell (2 in 1D, 4 in 2D), lower corner first.
    pub fn cell_corners(&self, cell: usize) -> Vec<usize> {
        let c = self.cell_multi(cell);
        match self.dim {
            1 => vec![self.node_flat([c[0], 0]), self.node_flat([c[0] + 1, 0])],
            _ => vec![
                self.node_flat([c[0], c[1]]),
                self.node_flat([c[0] + 1, c[1]]),
                self.node_flat([c[0], c[1] + 1]),
                self.node_flat([c[0] + 1, c[1] + 1]),
            ],
        }
    }

    /// Whether the cell touches the boundary of the box.
    pub fn cell_touches_boundary(&self, cell: usize) -> bool {
        let c = self.cell_multi(cell);
        (0..self.dim).any(|k| c[k] == 0 || c[k] + 1 == self.n[k])
    }
}

/// Small dense matrix in `ℝ^{m×n}` with `m, n ≤ 2`; the value type for
/// gradients and integrand arguments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    a: [f64; 4],
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            a: [0.0; 4],
        }
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.a[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.a[r * self.cols + c] = v;
    }

    pub fn from_slice(rows: usize, cols: usize, s: &[f64]) -> Self {
        let mut a = [0.0; 4];
        a[..rows * cols].copy_from_slice(s);
        Self { rows, cols, a }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.a[..self.rows * self.cols]
    }

    /// Rank-one matrix `v ⊗ nu`, entry `(α,k) = v_α nu_k`.
    pub fn rank_one(v: &[f64], nu: &[f64]) -> Self {
        let mut m = Self::zeros(v.len(), nu.len());
        for (r, &vr) in v.iter().enumerate() {
            for (c, &nc) in nu.iter().enumerate() {
                m.set(r, c, vr * nc);
            }
        }
        m
    }

    pub fn frobenius(&self) -> f64 {
        self.as_slice().iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn scale(&self, t: f64) -> Self {
        let mut out = *self;
        for x in out.a.iter_mut() {
            *x *= t;
        }
        out
    }

    pub fn add(&self, other: &Mat) -> Self {
        let mut out = *self;
        for (x, y) in out.a.iter_mut().zip(other.a.iter()) {
            *x += y;
        }
        out
    }
}

/// Nodal `ℝ^m`-valued function on a [`GridDomain`].
#[derive(Debug, Clone)]
pub struct GridFunction {
    domain: GridDomain,
    m: usize,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn zeros(domain: &GridDomain, m: usize) -> Self {
        Self {
            domain: domain.clone(),
            m,
            values: vec![0.0; domain.node_count() * m],
        }
    }

    pub fn from_values(domain: &GridDomain, m: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.node_count() * m {
            return Err(Error::InvalidFunction(format!(
                "expected {} values, got {}",
                domain.node_count() * m,
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidFunction(format!("non-finite value {bad}")));
        }
        Ok(Self {
            domain: domain.clone(),
            m,
            values,
        })
    }

    /// Scalar function from a coordinate closure.
    pub fn from_scalar_fn(domain: &GridDomain, f: impl Fn(&[f64]) -> f64) -> Self {
        let mut values = Vec::with_capacity(domain.node_count());
        for node in 0..domain.node_count() {
            let x = domain.node_coords(node);
            values.push(f(&x[..domain.dim()]));
        }
        Self {
            domain: domain.clone(),
            m: 1,
            values,
        }
    }

    /// Vector-valued function from a coordinate closure filling `out`.
    pub fn from_fn(domain: &GridDomain, m: usize, f: impl Fn(&[f64], &mut [f64])) -> Self {
        let mut values = vec![0.0; domain.node_count() * m];
        for node in 0..domain.node_count() {
            let x = domain.node_coords(node);
            f(&x[..domain.dim()], &mut values[node * m..(node + 1) * m]);
        }
        Self {
            domain: domain.clone(),
            m,
            values,
        }
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    pub fn codim(&self) -> usize {
        self.m
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn node(&self, node: usize) -> &[f64] {
        &self.values[node * self.m..(node + 1) * self.m]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// `self + c * other`, componentwise.
    pub fn axpy(&self, c: f64, other: &GridFunction) -> GridFunction {
        assert_eq!(self.values.len(), other.values.len());
        let values = self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| a + c * b)
            .collect();
        GridFunction {
            domain: self.domain.clone(),
            m: self.m,
            values,
        }
    }

    pub fn scale(&self, c: f64) -> GridFunction {
        GridFunction {
            domain: self.domain.clone(),
            m: self.m,
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    pub fn sub(&self, other: &GridFunction) -> GridFunction {
        self.axpy(-1.0, other)
    }

    /// Extract one component as a scalar function.
    pub fn component(&self, alpha: usize) -> GridFunction {
        let values = (0..self.domain.node_count())
            .map(|n| self.values[n * self.m + alpha])
            .collect();
        GridFunction {
            domain: self.domain.clone(),
            m: 1,
            values,
        }
    }

    /// Euclidean norm of the corner-averaged value per cell (midpoint sample).
    pub fn cell_midpoint_norm(&self) -> CellField {
        let dom = &self.domain;
        let mut values = Vec::with_capacity(dom.cell_count());
        for cell in 0..dom.cell_count() {
            let corners = dom.cell_corners(cell);
            let inv = 1.0 / corners.len() as f64;
            let mut sq = 0.0;
            for alpha in 0..self.m {
                let mean: f64 = corners.iter().map(|&nd| self.node(nd)[alpha]).sum::<f64>() * inv;
                sq += mean * mean;
            }
            values.push(sq.sqrt());
        }
        CellField {
            domain: dom.clone(),
            values,
        }
    }

    /// Forward-difference gradient, one `ℝ^{m×n}` matrix per cell.
    pub fn gradient(&self) -> GradientField {
        let dom = &self.domain;
        let dim = dom.dim();
        let mut data = vec![0.0; dom.cell_count() * self.m * dim];
        for cell in 0..dom.cell_count() {
            let c = dom.cell_multi(cell);
            let base = dom.node_flat(c);
            for k in 0..dim {
                let mut step = c;
                step[k] += 1;
                let ahead = dom.node_flat(step);
                let inv_h = 1.0 / dom.spacing(k);
                for alpha in 0..self.m {
                    data[cell * self.m * dim + alpha * dim + k] =
                        (self.values[ahead * self.m + alpha] - self.values[base * self.m + alpha])
                            * inv_h;
                }
            }
        }
        GradientField {
            domain: dom.clone(),
            m: self.m,
            data,
        }
    }
}

/// Per-cell scalar field (cell-midpoint samples of an integrand).
#[derive(Debug, Clone)]
pub struct CellField {
    domain: GridDomain,
    values: Vec<f64>,
}

impl CellField {
    pub fn new(domain: &GridDomain, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.cell_count() {
            return Err(Error::InvalidFunction(format!(
                "expected {} cell values, got {}",
                domain.cell_count(),
                values.len()
            )));
        }
        Ok(Self {
            domain: domain.clone(),
            values,
        })
    }

    pub fn constant(domain: &GridDomain, c: f64) -> Self {
        Self {
            domain: domain.clone(),
            values: vec![c; domain.cell_count()],
        }
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Midpoint quadrature: `Σ values[c] · ∏ h_k`.  Exact on cell-wise
    /// constants, which is what gradient fields produce.
    pub fn integrate(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.domain.cell_volume()
    }
}

/// Per-cell `ℝ^{m×n}` matrices produced by [`GridFunction::gradient`].
#[derive(Debug, Clone)]
pub struct GradientField {
    domain: GridDomain,
    m: usize,
    data: Vec<f64>,
}

impl GradientField {
    pub fn zeros(domain: &GridDomain, m: usize) -> Self {
        Self {
            domain: domain.clone(),
            m,
            data: vec![0.0; domain.cell_count() * m * domain.dim()],
        }
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    pub fn codim(&self) -> usize {
        self.m
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn matrix(&self, cell: usize) -> Mat {
        let dim = self.domain.dim();
        Mat::from_slice(
            self.m,
            dim,
            &self.data[cell * self.m * dim..(cell + 1) * self.m * dim],
        )
    }

    pub fn set_matrix(&mut self, cell: usize, mat: &Mat) {
        let dim = self.domain.dim();
        self.data[cell * self.m * dim..(cell + 1) * self.m * dim].copy_from_slice(mat.as_slice());
    }

    /// Frobenius norm per cell.
    pub fn norm(&self) -> CellField {
        let dim = self.domain.dim();
        let values = (0..self.domain.cell_count())
            .map(|cell| {
                self.data[cell * self.m * dim..(cell + 1) * self.m * dim]
                    .iter()
                    .map(|x| x * x)
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        CellField {
            domain: self.domain.clone(),
            values,
        }
    }
}

/// Backward-difference divergence, the exact negative adjoint of
/// [`GridFunction::gradient`]:
///
/// `Σ_cells ∇u : w · vol  =  − Σ_nodes u · div w · vol`
///
/// holds to rounding for every cell field `w` (values outside the cell range
/// count as zero).  In particular `Σ_nodes div w = 0` exactly, so pairing
/// against constants vanishes.
pub fn divergence(w: &GradientField) -> GridFunction {
    let dom = w.domain().clone();
    let dim = dom.dim();
    let m = w.codim();
    let mut values = vec![0.0; dom.node_count() * m];
    for node in 0..dom.node_count() {
        let idx = dom.node_multi(node);
        for k in 0..dim {
            let inv_h = 1.0 / dom.spacing(k);
            // w anchored at this node, minus w anchored one cell back.
            let here = cell_index_or_none(w, idx);
            let mut back = idx;
            let prev = if idx[k] == 0 {
                None
            } else {
                back[k] -= 1;
                Some(back)
            };
            for alpha in 0..m {
                let a = here.map_or(0.0, |c| w.data[c * m * dim + alpha * dim + k]);
                let b = prev
                    .and_then(|p| cell_index_or_none(w, p))
                    .map_or(0.0, |c| w.data[c * m * dim + alpha * dim + k]);
                values[node * m + alpha] += (a - b) * inv_h;
            }
        }
    }
    GridFunction {
        domain: dom,
        m,
        values,
    }
}

fn cell_index_or_none(w: &GradientField, idx: [usize; 2]) -> Option<usize> {
    let dom = w.domain();
    for k in 0..dom.dim() {
        if idx[k] >= dom.cells_along(k) {
            return None;
        }
    }
    Some(dom.cell_flat(idx))
}

/// Discrete mollifier: bump-profile weights on the lattice ball of radius
/// `delta`.  The profile is stretched to radius `delta + h_min` so that every
/// included node carries strictly positive weight (a profile vanishing at the
/// rim would degenerate to the identity at `delta = h`).
#[derive(Debug, Clone)]
pub struct Mollifier {
    delta: f64,
    offsets: Vec<[isize; 2]>,
    weights: Vec<f64>,
}

impl Mollifier {
    pub fn new(domain: &GridDomain, delta: f64) -> Result<Self> {
        let min_h = domain.min_spacing();
        if !(delta.is_finite() && delta >= min_h) {
            return Err(Error::MollifierTooNarrow { delta, min_h });
        }
        let dim = domain.dim();
        let mut reach = [0isize; 2];
        for k in 0..dim {
            reach[k] = (delta / domain.spacing(k)).floor() as isize;
        }
        let stretch = delta + min_h;
        let mut offsets = Vec::new();
        let mut weights = Vec::new();
        let j_range = if dim == 2 {
            -reach[1]..=reach[1]
        } else {
            0..=0
        };
        for i in -reach[0]..=reach[0] {
            for j in j_range.clone() {
                let mut r2 = (i as f64 * domain.spacing(0)).powi(2);
                if dim == 2 {
                    r2 += (j as f64 * domain.spacing(1)).powi(2);
                }
                if r2.sqrt() > delta {
                    continue;
                }
                let s = r2.sqrt() / stretch;
                // standard bump profile exp(-1/(1-s^2))
                let w = (-1.0 / (1.0 - s * s)).exp();
                offsets.push([i, j]);
                weights.push(w);
            }
        }
        let total: f64 = weights.iter().sum();
        for w in weights.iter_mut() {
            *w /= total;
        }
        Ok(Self {
            delta,
            offsets,
            weights,
        })
    }

    pub fn radius(&self) -> f64 {
        self.delta
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn offsets(&self) -> &[[isize; 2]] {
        &self.offsets
    }
}

/// Convolve `u` with the mollifier kernel.  Beyond the boundary the function
/// is extended by its nearest node, which preserves constants exactly.
pub fn mollify(u: &GridFunction, eta: &Mollifier) -> GridFunction {
    let dom = u.domain().clone();
    let dim = dom.dim();
    let m = u.codim();
    let mut values = vec![0.0; dom.node_count() * m];
    for node in 0..dom.node_count() {
        let idx = dom.node_multi(node);
        for (off, w) in eta.offsets.iter().zip(eta.weights.iter()) {
            let mut shifted = [0usize; 2];
            for k in 0..dim {
                let raw = idx[k] as isize + off[k];
                shifted[k] = raw.clamp(0, dom.cells_along(k) as isize) as usize;
            }
            let src = dom.node_flat(shifted);
            for alpha in 0..m {
                values[node * m + alpha] += w * u.values[src * m + alpha];
            }
        }
    }
    GridFunction {
        domain: dom,
        m,
        values,
    }
}
