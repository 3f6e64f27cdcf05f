//! The dual variation
//!
//! `V_φ^m(u) = sup { Σ_α ∫ u_α div w_α dx : w per-cell test field, ‖w‖_{φ*} ≤ 1 }`
//!
//! and the dual modular
//!
//! `ρ_{V,φ}^m(u) = sup { ∫ (Σ_α u_α div w_α − φ*(x,|w|)) dx : w test field }`,
//!
//! together with the explicit piecewise representation of `BV^{p(·)}`
//! candidates (smooth part + rank-one jump data) and the classical modular
//! `ρ_old(u) = |Du|(Y) + ρ_{L^{p(·)}(Ω∖Y)}(∇u)`.
//!
//! Test fields live on cells and vanish on the boundary ring, the discrete
//! stand-in for `C¹₀`.  Because the divergence is the exact negative adjoint
//! of the forward-difference gradient, `∫ u div w = −Σ_c ∇u : w · vol` holds
//! to rounding, and every sup above reduces to an optimization over cell
//! magnitudes aligned with `∇u`.  The ascent is seeded at the aligned
//! KKT point (scalar multiplier bisection), then polished by the projected
//! gradient loop; any feasible iterate certifies a lower bound.

use crate::error::{Error, Result};
use crate::exponent::ExponentField;
use crate::grid::{CellField, GradientField, GridDomain, GridFunction, Mat};
use crate::modular::{luxemburg_norm_cells, modular_cells};
use crate::phi::PhiFunction;

/// Discrete analog of a `C¹₀` test field: one `ℝ^{m×n}` matrix per cell,
/// forced to zero on cells touching `∂Ω`.
#[derive(Debug, Clone)]
pub struct TestField {
    w: GradientField,
}

impl TestField {
    pub fn zeros(domain: &GridDomain, m: usize) -> Self {
        Self {
            w: GradientField::zeros(domain, m),
        }
    }

    pub fn from_field(mut w: GradientField) -> Self {
        zero_boundary_cells(&mut w);
        Self { w }
    }

    pub fn field(&self) -> &GradientField {
        &self.w
    }

    pub fn divergence(&self) -> GridFunction {
        crate::grid::divergence(&self.w)
    }

    /// Frobenius magnitude per cell.
    pub fn magnitude(&self) -> CellField {
        self.w.norm()
    }
}

fn zero_boundary_cells(w: &mut GradientField) {
    let dom = w.domain().clone();
    let block = w.codim() * dom.dim();
    for cell in 0..dom.cell_count() {
        if dom.cell_touches_boundary(cell) {
            for v in &mut w.data_mut()[cell * block..(cell + 1) * block] {
                *v = 0.0;
            }
        }
    }
}

/// Outcome of a dual-variation / dual-modular computation.  `value` comes
/// from a feasible test field, hence is always a certified lower bound for
/// the discrete supremum; `dual_gap` is the distance to the convex upper
/// bound used as a convergence certificate.
#[derive(Debug, Clone, Copy)]
pub struct AscentReport {
    pub value: f64,
    pub dual_gap: f64,
    pub converged: bool,
    pub iterations: usize,
    pub certified_lower_bound: bool,
}

/// Interior cell magnitudes of `∇u` (boundary ring zeroed to match the test
/// field constraint).
fn interior_gradient_magnitudes(u: &GridFunction) -> (GradientField, Vec<f64>) {
    let grad = u.gradient();
    let dom = grad.domain().clone();
    let mags = (0..dom.cell_count())
        .map(|c| {
            if dom.cell_touches_boundary(c) {
                0.0
            } else {
                grad.matrix(c).frobenius()
            }
        })
        .collect();
    (grad, mags)
}

/// Pointwise solve of `max_{s ≥ 0} a·s − μ·φ*(x_c, s)` by expanding ternary
/// search; concavity in `s` comes from the convexity of `φ*`.
fn pointwise_magnitude(phi_star: &PhiFunction, cell: usize, a: f64, mu: f64) -> f64 {
    if a <= 0.0 {
        return 0.0;
    }
    let h = |s: f64| -> f64 {
        let pen = phi_star.eval_cell(cell, s);
        if pen.is_infinite() {
            f64::NEG_INFINITY
        } else {
            a * s - mu * pen
        }
    };
    let mut hi = 1.0;
    while h(2.0 * hi) >= h(hi) && hi < 1e18 {
        hi *= 2.0;
    }
    hi *= 2.0;
    let mut lo = 0.0;
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if h(m1) >= h(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    // the maximizer may sit exactly on the edge of the ∞-branch; keep the
    // feasible side of the bracket
    let mid = 0.5 * (lo + hi);
    if h(mid) == f64::NEG_INFINITY {
        lo
    } else {
        mid
    }
}

/// Convex upper bound `inf_{μ>0} μ (1 + ρ_φ(a/μ))` for the constrained sup,
/// by golden-section on `ln μ` (Fenchel duality with Slater's point `w = 0`).
fn dual_upper_bound(phi: &PhiFunction, a: &CellField) -> (f64, f64) {
    let amax = a.values().iter().fold(0.0f64, |x, y| x.max(*y));
    if amax == 0.0 {
        return (0.0, 1.0);
    }
    let dom = a.domain().clone();
    let g = |ln_mu: f64| -> f64 {
        let mu = ln_mu.exp();
        let scaled: Vec<f64> = a.values().iter().map(|v| v / mu).collect();
        let field = CellField::new(&dom, scaled).expect("len");
        mu * (1.0 + modular_cells(phi, &field).value())
    };
    let (mut lo, mut hi) = (amax.ln() - 80.0, amax.ln() + 80.0);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..140 {
        let c = hi - inv_phi * (hi - lo);
        let d = lo + inv_phi * (hi - lo);
        if g(c) <= g(d) {
            hi = d;
        } else {
            lo = c;
        }
    }
    let ln_mu = 0.5 * (lo + hi);
    (g(ln_mu), ln_mu.exp())
}

fn aligned_field(grad: &GradientField, mags: &[f64], s: &[f64]) -> TestField {
    let dom = grad.domain().clone();
    let m = grad.codim();
    let mut w = GradientField::zeros(&dom, m);
    for cell in 0..dom.cell_count() {
        if mags[cell] > 0.0 && s[cell] > 0.0 {
            // align with −∇u so the pairing ∫ u div w is positive
            let dir = grad.matrix(cell).scale(-s[cell] / mags[cell]);
            w.set_matrix(cell, &dir);
        }
    }
    TestField::from_field(w)
}

fn pairing(u_grad: &GradientField, w: &TestField) -> f64 {
    let vol = u_grad.domain().cell_volume();
    -u_grad
        .data()
        .iter()
        .zip(w.field().data())
        .map(|(a, b)| a * b)
        .sum::<f64>()
        * vol
}

/// `V_φ^m(u)`: projected gradient ascent over the Luxemburg unit ball of
/// `φ*`, seeded at the aligned multiplier point.
pub fn dual_variation(u: &GridFunction, phi: &PhiFunction) -> Result<AscentReport> {
    let phi_star = phi.conjugate();
    let (grad, mags) = interior_gradient_magnitudes(u);
    let dom = grad.domain().clone();
    let a_field = CellField::new(&dom, mags.clone())?;
    if mags.iter().all(|&v| v == 0.0) {
        return Ok(AscentReport {
            value: 0.0,
            dual_gap: 0.0,
            converged: true,
            iterations: 0,
            certified_lower_bound: true,
        });
    }
    let (upper, mu) = dual_upper_bound(phi, &a_field);
    let s: Vec<f64> = (0..dom.cell_count())
        .map(|c| {
            pointwise_magnitude(
                &phi_star,
                c,
                mags[c] * dom.cell_volume(),
                mu * dom.cell_volume(),
            )
        })
        .collect();
    let mut w = aligned_field(&grad, &mags, &s);
    project_to_unit_ball(&phi_star, &mut w)?;
    let mut best = pairing(&grad, &w);

    // spec'd ascent loop; the constant gradient of the linear objective is −∇u
    let mut step = 1.0;
    let mut iterations = 0;
    let mut window: Vec<f64> = vec![best];
    let mut converged = false;
    for _ in 0..5000 {
        iterations += 1;
        let mut trial_field = w.field().clone();
        for (t, g) in trial_field.data_mut().iter_mut().zip(grad.data()) {
            *t -= step * g;
        }
        let mut trial = TestField::from_field(trial_field);
        project_to_unit_ball(&phi_star, &mut trial)?;
        let val = pairing(&grad, &trial);
        if val > best {
            w = trial;
            best = val;
            step *= 1.5;
        } else {
            step *= 0.5;
        }
        window.push(best);
        if window.len() > 10 {
            window.remove(0);
            let lo = window[0];
            if (best - lo).abs() <= 1e-8 * best.abs().max(1e-300) {
                converged = true;
                break;
            }
        }
    }
    Ok(AscentReport {
        value: best,
        dual_gap: (upper - best).max(0.0),
        converged: converged || (upper - best) <= 1e-7 * upper.abs().max(1e-300),
        iterations,
        certified_lower_bound: true,
    })
}

fn project_to_unit_ball(phi_star: &PhiFunction, w: &mut TestField) -> Result<()> {
    let norm = luxemburg_norm_cells(phi_star, &w.magnitude())?;
    if norm > 1.0 {
        for v in w.w.data_mut() {
            *v /= norm;
        }
    }
    Ok(())
}

/// `ρ_{V,φ}^m(u)`: pointwise Fenchel solve per cell (the objective decouples),
/// polished by backtracking gradient ascent.  On `Y` the `∞`-branch of `φ*`
/// keeps `|w| ≤ 1` as a hard constraint.
pub fn dual_modular(u: &GridFunction, phi: &PhiFunction) -> Result<AscentReport> {
    let phi_star = phi.conjugate();
    let (grad, mags) = interior_gradient_magnitudes(u);
    let dom = grad.domain().clone();
    if mags.iter().all(|&v| v == 0.0) {
        return Ok(AscentReport {
            value: 0.0,
            dual_gap: 0.0,
            converged: true,
            iterations: 0,
            certified_lower_bound: true,
        });
    }
    let s: Vec<f64> = (0..dom.cell_count())
        .map(|c| pointwise_magnitude(&phi_star, c, mags[c], 1.0))
        .collect();
    let objective = |w: &TestField| -> f64 {
        let lin = pairing(&grad, w);
        let pen = modular_cells(&phi_star, &w.magnitude()).value();
        lin - pen
    };
    let mut w = aligned_field(&grad, &mags, &s);
    let mut best = objective(&w);
    // Fenchel equality value Σ φ(x_c, |∇u|_c)·vol bounds the sup from above
    let upper = modular_cells(phi, &CellField::new(&dom, mags.clone())?).value();

    let mut step = 1.0;
    let mut iterations = 0;
    let mut window = vec![best];
    let mut converged = false;
    for _ in 0..5000 {
        iterations += 1;
        // ascent direction: −∇u − (φ*)'(|w|) ŵ, approximated by the finite
        // penalty difference; backtracking keeps the objective monotone
        let mut trial_field = w.field().clone();
        for (t, g) in trial_field.data_mut().iter_mut().zip(grad.data()) {
            *t -= step * g;
        }
        let mut trial = TestField::from_field(trial_field);
        clip_on_y(&phi_star, &mut trial);
        let val = objective(&trial);
        if val > best + 1e-4 * step * 1e-12 {
            w = trial;
            best = val;
            step *= 1.5;
        } else {
            step *= 0.5;
        }
        window.push(best);
        if window.len() > 10 {
            window.remove(0);
            if (best - window[0]).abs() <= 1e-8 * best.abs().max(1e-300) {
                converged = true;
                break;
            }
        }
    }
    Ok(AscentReport {
        value: best,
        dual_gap: (upper - best).max(0.0),
        converged,
        iterations,
        certified_lower_bound: true,
    })
}

/// Rescale cells where the `∞`-branch makes the objective `−∞`.
fn clip_on_y(phi_star: &PhiFunction, w: &mut TestField) {
    let dom = w.field().domain().clone();
    let m = w.field().codim();
    let dim = dom.dim();
    for cell in 0..dom.cell_count() {
        if phi_star.eval_cell(cell, 1.5).is_infinite() {
            let mat = w.field().matrix(cell);
            let norm = mat.frobenius();
            if norm > 1.0 {
                let scaled = mat.scale(1.0 / norm);
                w.w.data_mut()[cell * m * dim..(cell + 1) * m * dim]
                    .copy_from_slice(scaled.as_slice());
            }
        }
    }
}

/// Jump structures supported by the piecewise representation.
#[derive(Debug, Clone)]
pub enum JumpSet {
    /// 1D point jump at `x` with value gap `vector = u⁺ − u⁻`.
    Point { x: f64, vector: Vec<f64> },
    /// 2D jump across the full hyperplane `x_axis = offset`, normal `+e_axis`.
    AxisLine {
        axis: usize,
        offset: f64,
        vector: Vec<f64>,
    },
    /// Free 2D segment with unit normal; carries jump records but admits no
    /// nodal discretization (an open segment cannot bound a region).
    Segment {
        a: [f64; 2],
        b: [f64; 2],
        normal: [f64; 2],
        vector: Vec<f64>,
    },
}

/// One row of singular data: a piece of the jump set with its normal, jump
/// vector and `ℋ^{n−1}` length.
#[derive(Debug, Clone)]
pub struct JumpRecord {
    pub start: [f64; 2],
    pub end: [f64; 2],
    pub normal: [f64; 2],
    pub vector: Vec<f64>,
    pub length: f64,
}

impl JumpRecord {
    pub fn mass(&self) -> f64 {
        let v: f64 = self.vector.iter().map(|x| x * x).sum::<f64>().sqrt();
        v * self.length
    }

    /// Rank-one polar direction `v̂ ⊗ ν` of the singular measure.
    pub fn direction(&self) -> Mat {
        let norm: f64 = self.vector.iter().map(|x| x * x).sum::<f64>().sqrt();
        let v: Vec<f64> = self.vector.iter().map(|x| x / norm).collect();
        let n = if self.normal[1] == 0.0 && self.start == self.end {
            vec![self.normal[0]]
        } else {
            self.normal.to_vec()
        };
        Mat::rank_one(&v, &n)
    }

    /// Unnormalized rank-one matrix `vector ⊗ ν`.
    pub fn jump_matrix(&self) -> Mat {
        let n = if self.normal[1] == 0.0 && self.start == self.end {
            vec![self.normal[0]]
        } else {
            self.normal.to_vec()
        };
        Mat::rank_one(&self.vector, &n)
    }

    pub fn location_string(&self) -> String {
        if self.start == self.end {
            format!("x = {}", self.start[0])
        } else {
            format!(
                "segment ({}, {}) – ({}, {})",
                self.start[0], self.start[1], self.end[0], self.end[1]
            )
        }
    }
}

/// Explicit `BV^{p(·)}` candidate: nodal smooth part plus structured jumps.
#[derive(Debug, Clone)]
pub struct PiecewiseBvFunction {
    pub smooth: GridFunction,
    pub jumps: Vec<JumpSet>,
}

impl PiecewiseBvFunction {
    pub fn new(smooth: GridFunction, jumps: Vec<JumpSet>) -> Result<Self> {
        let dom = smooth.domain().clone();
        let m = smooth.codim();
        for j in &jumps {
            let (vector, inside) = match j {
                JumpSet::Point { x, vector } => {
                    if dom.dim() != 1 {
                        return Err(Error::DimMismatch("point jumps need a 1D domain".into()));
                    }
                    let (a, b) = dom.extent(0);
                    (vector, *x > a && *x < b)
                }
                JumpSet::AxisLine {
                    axis,
                    offset,
                    vector,
                } => {
                    if dom.dim() != 2 || *axis > 1 {
                        return Err(Error::DimMismatch("axis lines need a 2D domain".into()));
                    }
                    let (a, b) = dom.extent(*axis);
                    (vector, *offset > a && *offset < b)
                }
                JumpSet::Segment {
                    a,
                    b,
                    normal,
                    vector,
                } => {
                    let ok = (0..2).all(|k| {
                        let (lo, hi) = dom.extent(k);
                        a[k] >= lo && a[k] <= hi && b[k] >= lo && b[k] <= hi
                    });
                    let nn = (normal[0] * normal[0] + normal[1] * normal[1]).sqrt();
                    if (nn - 1.0).abs() > 1e-9 {
                        return Err(Error::UnrepresentableJumpSet(
                            "segment normal must be a unit vector".into(),
                        ));
                    }
                    (vector, ok && dom.dim() == 2)
                }
            };
            if !inside {
                return Err(Error::InvalidFunction(
                    "jump location must lie strictly inside the domain".into(),
                ));
            }
            if vector.len() != m {
                return Err(Error::DimMismatch(format!(
                    "jump vector has {} components, function has {m}",
                    vector.len()
                )));
            }
            let mag: f64 = vector.iter().map(|x| x * x).sum::<f64>().sqrt();
            if mag == 0.0 {
                return Err(Error::InvalidFunction("zero jump vector".into()));
            }
        }
        Ok(Self { smooth, jumps })
    }

    pub fn domain(&self) -> &GridDomain {
        self.smooth.domain()
    }

    pub fn codim(&self) -> usize {
        self.smooth.codim()
    }

    /// Flatten the structured jumps into per-segment records.
    pub fn records(&self) -> Vec<JumpRecord> {
        let dom = self.domain();
        self.jumps
            .iter()
            .map(|j| match j {
                JumpSet::Point { x, vector } => JumpRecord {
                    start: [*x, 0.0],
                    end: [*x, 0.0],
                    normal: [1.0, 0.0],
                    vector: vector.clone(),
                    length: 1.0,
                },
                JumpSet::AxisLine {
                    axis,
                    offset,
                    vector,
                } => {
                    let other = 1 - axis;
                    let (lo, hi) = dom.extent(other);
                    let mut start = [0.0; 2];
                    let mut end = [0.0; 2];
                    start[*axis] = *offset;
                    end[*axis] = *offset;
                    start[other] = lo;
                    end[other] = hi;
                    let mut normal = [0.0; 2];
                    normal[*axis] = 1.0;
                    JumpRecord {
                        start,
                        end,
                        normal,
                        vector: vector.clone(),
                        length: hi - lo,
                    }
                }
                JumpSet::Segment {
                    a,
                    b,
                    normal,
                    vector,
                } => JumpRecord {
                    start: *a,
                    end: *b,
                    normal: *normal,
                    vector: vector.clone(),
                    length: ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt(),
                },
            })
            .collect()
    }

    /// `|D^s u|(Ω) = Σ |jump vector| · length`.
    pub fn singular_mass(&self) -> f64 {
        self.records().iter().map(|r| r.mass()).sum()
    }

    /// Nodal function realizing the representation: smooth part plus
    /// half-space indicators.  Free segments are rejected — an open segment
    /// cannot be the full jump set of a function.
    pub fn discretize(&self) -> Result<GridFunction> {
        let dom = self.domain().clone();
        let m = self.codim();
        let mut values = self.smooth.values().to_vec();
        for j in &self.jumps {
            match j {
                JumpSet::Point { x, vector } => {
                    for node in 0..dom.node_count() {
                        if dom.node_coords(node)[0] >= *x {
                            for (alpha, v) in vector.iter().enumerate() {
                                values[node * m + alpha] += v;
                            }
                        }
                    }
                }
                JumpSet::AxisLine {
                    axis,
                    offset,
                    vector,
                } => {
                    for node in 0..dom.node_count() {
                        if dom.node_coords(node)[*axis] >= *offset {
                            for (alpha, v) in vector.iter().enumerate() {
                                values[node * m + alpha] += v;
                            }
                        }
                    }
                }
                JumpSet::Segment { .. } => {
                    return Err(Error::UnrepresentableJumpSet(
                        "free segments carry records only; use axis lines for nodal data".into(),
                    ))
                }
            }
        }
        GridFunction::from_values(&dom, m, values)
    }

    /// Nodes on the jump set (within one cell of it, measured along the
    /// normal and within the tangential extent).
    pub fn nodes_near_jumps(&self) -> Vec<Vec<usize>> {
        let dom = self.domain();
        self.records()
            .iter()
            .map(|r| {
                let mut nodes = Vec::new();
                for node in 0..dom.node_count() {
                    let x = dom.node_coords(node);
                    if dom.dim() == 1 {
                        if (x[0] - r.start[0]).abs() <= dom.spacing(0) + 1e-12 {
                            nodes.push(node);
                        }
                    } else {
                        let axis = if r.normal[0].abs() > 0.5 { 0 } else { 1 };
                        let other = 1 - axis;
                        let (t0, t1) = (
                            r.start[other].min(r.end[other]),
                            r.start[other].max(r.end[other]),
                        );
                        let off = (x[axis] - r.start[axis]).abs();
                        let tangential_ok = x[other] >= t0 - dom.spacing(other) - 1e-12
                            && x[other] <= t1 + dom.spacing(other) + 1e-12;
                        if off <= dom.spacing(axis) + 1e-12 && tangential_ok {
                            nodes.push(node);
                        }
                    }
                }
                nodes
            })
            .collect()
    }
}

/// Membership report for `BV^{p(·)} = BV ∩ W^{1,p(·)}(Ω∖Y)`.
#[derive(Debug, Clone)]
pub struct MembershipReport {
    pub member: bool,
    /// Indices into `records()` of jumps leaving `Y`.
    pub offending: Vec<usize>,
    pub gradient_modular: f64,
}

/// True iff every jump lies in `Y` and the `p(·)`-modular of the smooth
/// gradient is finite.
pub fn bv_membership(u: &PiecewiseBvFunction, p: &ExponentField) -> MembershipReport {
    let near = u.nodes_near_jumps();
    let mut offending = Vec::new();
    for (i, nodes) in near.iter().enumerate() {
        if nodes.iter().any(|&n| !p.node_in_y(n)) {
            offending.push(i);
        }
    }
    let phi = PhiFunction::variable_exponent(p.clone());
    let grad_mod = modular_cells(&phi, &u.smooth.gradient().norm()).value();
    MembershipReport {
        member: offending.is_empty() && grad_mod.is_finite(),
        offending,
        gradient_modular: grad_mod,
    }
}

/// `ρ_old(u) = |Du|(Y) + ρ_{L^{p(·)}(Ω∖Y)}(∇u)`: jump mass plus the exponent
/// modular of the smooth gradient (which degenerates to `∫_Y |∇u|` on `Y`).
pub fn rho_old(u: &PiecewiseBvFunction, p: &ExponentField) -> Result<f64> {
    let membership = bv_membership(u, p);
    if let Some(&i) = membership.offending.first() {
        let rec = &u.records()[i];
        return Err(Error::JumpOutsideY {
            location: rec.location_string(),
        });
    }
    let phi = PhiFunction::variable_exponent(p.clone());
    let smooth_part = modular_cells(&phi, &u.smooth.gradient().norm()).value();
    Ok(u.singular_mass() + smooth_part)
}
