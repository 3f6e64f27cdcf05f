//! The bulk energy `∫ f(∇u)^{p(x)} dx` and the closed-form relaxed
//! representation
//!
//! `F_qc(u, A) = ∫_A f(∇u)^{p(x)} dx
//!             + Σ_{jumps in A∩Y} f^∞(v̂ ⊗ ν) · |v| · length`,
//!
//! evaluated from the explicit jump records (1-homogeneity of `f^∞` folds the
//! mass into `f^∞(v ⊗ ν) · length`).  Restriction to open sub-boxes assigns
//! each cell by its midpoint and clips jump segments half-open, so partition
//! additivity is exact.

use crate::error::{Error, Result};
use crate::exponent::ExponentField;
use crate::grid::{GridDomain, GridFunction};
use crate::integrand::{recession, Integrand};
use crate::phi::PhiFunction;
use crate::variation::{bv_membership, dual_variation, PiecewiseBvFunction};

/// Axis-aligned open box, treated half-open `[lo, hi)` when assigning cells
/// and jump pieces so a partition covers everything exactly once.
#[derive(Debug, Clone, Copy)]
pub struct Rect {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl Rect {
    pub fn whole(domain: &GridDomain) -> Self {
        let mut lo = [0.0; 2];
        let mut hi = [0.0; 2];
        for k in 0..domain.dim() {
            let (a, b) = domain.extent(k);
            // inflate so every midpoint and jump is captured
            lo[k] = a - 1.0;
            hi[k] = b + 1.0;
        }
        Self { lo, hi }
    }

    pub fn new_1d(lo: f64, hi: f64) -> Self {
        Self {
            lo: [lo, 0.0],
            hi: [hi, 1.0],
        }
    }

    pub fn new_2d(lo: [f64; 2], hi: [f64; 2]) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, x: &[f64; 2], dim: usize) -> bool {
        (0..dim).all(|k| x[k] >= self.lo[k] && x[k] < self.hi[k])
    }

    pub fn measure(&self, domain: &GridDomain) -> f64 {
        (0..domain.dim())
            .map(|k| {
                let (a, b) = domain.extent(k);
                (self.hi[k].min(b) - self.lo[k].max(a)).max(0.0)
            })
            .product()
    }
}

/// The two parts of the representation; `total` is their sum by construction.
#[derive(Debug, Clone, Copy)]
pub struct EnergyBreakdown {
    pub bulk: f64,
    pub singular: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    fn new(bulk: f64, singular: f64) -> Self {
        Self {
            bulk,
            singular,
            total: bulk + singular,
        }
    }
}

/// `∫ f(∇u)^{p(x)} dx` with `p` sampled at cell centers (corner average).
pub fn bulk_energy(u: &GridFunction, f: &Integrand, p: &ExponentField) -> f64 {
    bulk_energy_in(u, f, p, &Rect::whole(u.domain()))
}

fn bulk_energy_in(u: &GridFunction, f: &Integrand, p: &ExponentField, area: &Rect) -> f64 {
    let dom = u.domain();
    let grad = u.gradient();
    let cell_p = p.cell_values();
    let mut sum = 0.0;
    for cell in 0..dom.cell_count() {
        let center = dom.cell_center(cell);
        if !area.contains(&center, dom.dim()) {
            continue;
        }
        sum += f.eval(&grad.matrix(cell)).powf(cell_p.values()[cell]);
    }
    sum * dom.cell_volume()
}

fn singular_energy_in(u: &PiecewiseBvFunction, f: &Integrand, area: &Rect, dim: usize) -> f64 {
    let mut sum = 0.0;
    for rec in u.records() {
        if dim == 1 {
            let x = [rec.start[0], 0.0];
            if area.contains(&x, 1) {
                // f^∞ at the rank-one matrix v ⊗ ν; 1-homogeneity carries |v|
                sum += recession(f, &rec.jump_matrix()).value * rec.length;
            }
        } else {
            let axis = if rec.normal[0].abs() > 0.5 { 0 } else { 1 };
            let other = 1 - axis;
            let offset = rec.start[axis];
            if offset < area.lo[axis] || offset >= area.hi[axis] {
                continue;
            }
            let (t0, t1) = (
                rec.start[other].min(rec.end[other]),
                rec.start[other].max(rec.end[other]),
            );
            let clipped = (t1.min(area.hi[other]) - t0.max(area.lo[other])).max(0.0);
            if clipped > 0.0 {
                sum += recession(f, &rec.jump_matrix()).value * clipped;
            }
        }
    }
    sum
}

/// The relaxed representation on an open sub-box (the whole domain when
/// `area` is `None`).  Errors when a jump leaves `Y` — the formula only
/// applies on `BV^{p(·)}`.
pub fn relaxed_energy(
    u: &PiecewiseBvFunction,
    f: &Integrand,
    p: &ExponentField,
    area: Option<&Rect>,
) -> Result<EnergyBreakdown> {
    let membership = bv_membership(u, p);
    if let Some(&i) = membership.offending.first() {
        let rec = &u.records()[i];
        return Err(Error::JumpOutsideY {
            location: rec.location_string(),
        });
    }
    let whole = Rect::whole(u.domain());
    let area = area.unwrap_or(&whole);
    let bulk = bulk_energy_in(&u.smooth, f, p, area);
    let singular = singular_energy_in(u, f, area, u.domain().dim());
    Ok(EnergyBreakdown::new(bulk, singular))
}

/// Restrict a nodal function to a sub-box whose corners sit on grid nodes.
pub fn restrict(u: &GridFunction, area: &Rect) -> Result<GridFunction> {
    let dom = u.domain();
    let dim = dom.dim();
    let m = u.codim();
    let mut lo_idx = [0usize; 2];
    let mut n_cells = [0usize; 2];
    let mut lo_coord = [0.0f64; 2];
    let mut hi_coord = [0.0f64; 2];
    for k in 0..dim {
        let (a, _) = dom.extent(k);
        let h = dom.spacing(k);
        let lo = area.lo[k].max(a);
        let hi = area.hi[k].min(dom.extent(k).1);
        let i0 = ((lo - a) / h).round() as isize;
        let i1 = ((hi - a) / h).round() as isize;
        if (a + i0 as f64 * h - lo).abs() > 1e-9 * h.max(1.0)
            || (a + i1 as f64 * h - hi).abs() > 1e-9 * h.max(1.0)
        {
            return Err(Error::InvalidDomain(format!(
                "sub-box edge on axis {k} is not aligned with cell boundaries"
            )));
        }
        if i1 - i0 < 4 {
            return Err(Error::InvalidDomain(format!(
                "sub-box on axis {k} has fewer than 4 cells"
            )));
        }
        lo_idx[k] = i0 as usize;
        n_cells[k] = (i1 - i0) as usize;
        lo_coord[k] = a + i0 as f64 * h;
        hi_coord[k] = a + i1 as f64 * h;
    }
    let sub = match dim {
        1 => GridDomain::line(lo_coord[0], hi_coord[0], n_cells[0])?,
        _ => GridDomain::rect(
            (lo_coord[0], hi_coord[0]),
            n_cells[0],
            (lo_coord[1], hi_coord[1]),
            n_cells[1],
        )?,
    };
    let mut values = vec![0.0; sub.node_count() * m];
    for node in 0..sub.node_count() {
        let idx = sub.node_multi(node);
        let mut src_idx = [0usize; 2];
        for k in 0..dim {
            src_idx[k] = lo_idx[k] + idx[k];
        }
        let src = dom.node_flat(src_idx);
        values[node * m..(node + 1) * m].copy_from_slice(u.node(src));
    }
    GridFunction::from_values(&sub, m, values)
}

/// Outcome of the Radon-measure probe: per-box energies, the additivity
/// defect, and the smallest constant in the growth estimate
/// `F(u,A) ≤ C (|A| + V(A) + V(A)^{p⁺})`.
#[derive(Debug, Clone)]
pub struct MeasureProbeReport {
    pub parts: Vec<f64>,
    pub whole: f64,
    pub additivity_error: f64,
    pub fitted_c: f64,
}

pub fn measure_probe(
    u: &PiecewiseBvFunction,
    f: &Integrand,
    p: &ExponentField,
    partition: &[Rect],
) -> Result<MeasureProbeReport> {
    let whole = relaxed_energy(u, f, p, None)?.total;
    let mut parts = Vec::with_capacity(partition.len());
    let mut fitted_c = 0.0f64;
    let discretized = u.discretize()?;
    let p_plus = p.p_plus();
    for area in partition {
        let part = relaxed_energy(u, f, p, Some(area))?.total;
        parts.push(part);

        let sub_u = restrict(&discretized, area)?;
        let sub_p = ExponentField::new(restrict(p.as_grid_function(), area)?)?;
        let phi = PhiFunction::variable_exponent(sub_p);
        let v = dual_variation(&sub_u, &phi)?.value;
        let denom = area.measure(u.domain()) + v + v.powf(p_plus);
        if denom > 0.0 {
            fitted_c = fitted_c.max(part / denom);
        }
    }
    let sum: f64 = parts.iter().sum();
    Ok(MeasureProbeReport {
        parts,
        whole,
        additivity_error: (sum - whole).abs(),
        fitted_c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::variation::JumpSet;
    use approx::assert_relative_eq;

    #[test]
    fn bulk_energy_of_constant_is_zero() {
        let dom = GridDomain::line(-1.0, 1.0, 32).unwrap();
        let u = GridFunction::from_scalar_fn(&dom, |_| 2.0);
        let f = Integrand::euclidean();
        let p = ExponentField::constant(&dom, 2.0).unwrap();
        assert_eq!(bulk_energy(&u, &f, &p), 0.0);
    }

    #[test]
    fn bulk_energy_of_linear_slope() {
        // ∫_{-1}^{1} a² dx = 2a² for p ≡ 2, f = |·|
        let dom = GridDomain::line(-1.0, 1.0, 128).unwrap();
        let a = 1.7;
        let u = GridFunction::from_scalar_fn(&dom, |x| a * x[0]);
        let f = Integrand::euclidean();
        let p = ExponentField::constant(&dom, 2.0).unwrap();
        assert_relative_eq!(bulk_energy(&u, &f, &p), 2.0 * a * a, max_relative = 1e-10);
    }

    #[test]
    fn unit_gradient_is_exponent_blind() {
        // 1^{p(x)} = 1 regardless of the ramp
        let dom = GridDomain::line(0.0, 1.0, 64).unwrap();
        let u = GridFunction::from_scalar_fn(&dom, |x| x[0]);
        let f = Integrand::euclidean();
        let p = ExponentField::from_fn(&dom, |x| 1.0 + x[0]).unwrap();
        assert_relative_eq!(bulk_energy(&u, &f, &p), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn relaxed_energy_of_pure_step() {
        let dom = GridDomain::line(-1.0, 1.0, 256).unwrap();
        let p = ExponentField::constant(&dom, 1.0).unwrap();
        let f = Integrand::euclidean();
        let u = PiecewiseBvFunction::new(
            GridFunction::from_scalar_fn(&dom, |_| -1.0),
            vec![JumpSet::Point {
                x: 0.0,
                vector: vec![2.0],
            }],
        )
        .unwrap();
        let e = relaxed_energy(&u, &f, &p, None).unwrap();
        assert_eq!(e.bulk, 0.0);
        assert_relative_eq!(e.singular, 2.0, max_relative = 1e-9);
        assert_eq!(e.total, e.bulk + e.singular);
    }

    #[test]
    fn smooth_candidate_has_no_singular_part() {
        let dom = GridDomain::line(0.0, 1.0, 64).unwrap();
        let p = ExponentField::constant(&dom, 1.5).unwrap();
        let f = Integrand::euclidean();
        let u = PiecewiseBvFunction::new(
            GridFunction::from_scalar_fn(&dom, |x| (2.0 * x[0]).sin()),
            vec![],
        )
        .unwrap();
        let e = relaxed_energy(&u, &f, &p, None).unwrap();
        assert_eq!(e.singular, 0.0);
        assert_relative_eq!(
            e.total,
            bulk_energy(&u.smooth, &f, &p),
            max_relative = 1e-14
        );
    }

    #[test]
    fn vertical_segment_contributes_height_times_length() {
        // jump vector of height 1 across a length-0.5 segment in Y → 0.5
        let dom = GridDomain::rect((-1.0, 1.0), 16, (-1.0, 1.0), 16).unwrap();
        let p = ExponentField::constant(&dom, 1.0).unwrap();
        let f = Integrand::euclidean();
        let u = PiecewiseBvFunction::new(
            GridFunction::zeros(&dom, 1),
            vec![JumpSet::Segment {
                a: [0.0, -0.25],
                b: [0.0, 0.25],
                normal: [1.0, 0.0],
                vector: vec![1.0],
            }],
        )
        .unwrap();
        let e = relaxed_energy(&u, &f, &p, None).unwrap();
        assert_relative_eq!(e.singular, 0.5, max_relative = 1e-9);
        assert_eq!(e.bulk, 0.0);
    }

    #[test]
    fn rejects_jump_outside_y() {
        let dom = GridDomain::line(-1.0, 1.0, 64).unwrap();
        let p = ExponentField::from_fn(&dom, |x| if x[0] <= 0.0 { 1.0 } else { 2.0 }).unwrap();
        let f = Integrand::euclidean();
        let u = PiecewiseBvFunction::new(
            GridFunction::zeros(&dom, 1),
            vec![JumpSet::Point {
                x: 0.5,
                vector: vec![1.0],
            }],
        )
        .unwrap();
        assert!(matches!(
            relaxed_energy(&u, &f, &p, None),
            Err(Error::JumpOutsideY { .. })
        ));
    }

    #[test]
    fn partition_additivity_is_exact() {
        let dom = GridDomain::line(-1.0, 1.0, 64).unwrap();
        let p = ExponentField::from_fn(&dom, |x| 1.0 + (4.0 * x[0]).clamp(0.0, 1.0)).unwrap();
        let f = Integrand::euclidean();
        let u = PiecewiseBvFunction::new(
            GridFunction::from_scalar_fn(&dom, |x| if x[0] > 0.0 { x[0] * x[0] } else { 0.0 }),
            vec![JumpSet::Point {
                x: -0.5,
                vector: vec![1.0],
            }],
        )
        .unwrap();
        let halves = [Rect::new_1d(-1.0, 0.0), Rect::new_1d(0.0, 1.0)];
        let report = measure_probe(&u, &f, &p, &halves).unwrap();
        assert!(
            report.additivity_error < 1e-12,
            "error {}",
            report.additivity_error
        );
        assert!(report.fitted_c.is_finite() && report.fitted_c > 0.0);
    }

    #[test]
    fn shrinking_boxes_localize_the_jump() {
        let dom = GridDomain::line(-1.0, 1.0, 256).unwrap();
        let p = ExponentField::constant(&dom, 1.0).unwrap();
        let f = Integrand::euclidean();
        let u = PiecewiseBvFunction::new(
            GridFunction::from_scalar_fn(&dom, |x| 0.2 * x[0]),
            vec![JumpSet::Point {
                x: 0.0,
                vector: vec![2.0],
            }],
        )
        .unwrap();
        let mut prev_total = f64::MAX;
        for half_width in [0.5, 0.25, 0.125, 0.0625] {
            let area = Rect::new_1d(-half_width, half_width);
            let e = relaxed_energy(&u, &f, &p, Some(&area)).unwrap();
            assert!(e.total <= prev_total + 1e-12);
            prev_total = e.total;
        }
        // in the limit only the jump mass remains
        assert_relative_eq!(prev_total, 2.0, max_relative = 0.05);
    }

    #[test]
    fn scaling_f_by_a_dyadic_constant_scales_total_exactly_at_p_one() {
        let dom = GridDomain::line(-1.0, 1.0, 64).unwrap();
        let p = ExponentField::constant(&dom, 1.0).unwrap();
        let u = PiecewiseBvFunction::new(
            GridFunction::from_scalar_fn(&dom, |x| 0.3 * x[0]),
            vec![JumpSet::Point {
                x: 0.25,
                vector: vec![1.0],
            }],
        )
        .unwrap();
        let f1 = Integrand::euclidean();
        let c = 2.0;
        let fc = Integrand::weighted(crate::grid::Mat::from_slice(1, 1, &[c])).unwrap();
        let e1 = relaxed_energy(&u, &f1, &p, None).unwrap();
        let ec = relaxed_energy(&u, &fc, &p, None).unwrap();
        assert_eq!(ec.total, c * e1.total);
    }

    #[test]
    fn restrict_extracts_exact_subgrid() {
        let dom = GridDomain::line(0.0, 1.0, 16).unwrap();
        let u = GridFunction::from_scalar_fn(&dom, |x| x[0]);
        let sub = restrict(&u, &Rect::new_1d(0.25, 0.75)).unwrap();
        assert_eq!(sub.domain().cells_along(0), 8);
        assert_relative_eq!(sub.values()[0], 0.25, max_relative = 1e-12);
        assert!(
            restrict(&u, &Rect::new_1d(0.3, 0.7)).is_err(),
            "misaligned box"
        );
    }
}
