//! Quasimodulars `ρ_φ(u) = ∫ φ(x, |u(x)|) dx`, Luxemburg norms
//! `inf { λ > 0 : ρ_φ(u/λ) ≤ 1 }` computed by bisection, and associate-space
//! norms `sup { ∫ v g : ‖g‖_φ ≤ 1 }`.

use crate::error::{Error, Result};
use crate::grid::{CellField, GridFunction};
use crate::phi::PhiFunction;

/// Value of a quasimodular, possibly `∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModularValue(pub f64);

impl ModularValue {
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }
}

/// `ρ_φ(u)` for a nodal function; `|u|` is the Euclidean norm of the
/// corner-averaged value, integrated by the midpoint rule.
pub fn modular(phi: &PhiFunction, u: &GridFunction) -> ModularValue {
    modular_cells(phi, &u.cell_midpoint_norm())
}

/// `ρ_φ(v)` for a per-cell scalar field (e.g. `|∇u|`).
pub fn modular_cells(phi: &PhiFunction, v: &CellField) -> ModularValue {
    let mut sum = 0.0;
    for (cell, &t) in v.values().iter().enumerate() {
        sum += phi.eval_cell(cell, t.abs());
    }
    ModularValue(sum * v.domain().cell_volume())
}

/// Shared bisection core.  `rho(λ)` must be the modular of `u/λ`, decreasing
/// in `λ`; `scale` is `sup|u|` so that absolute homogeneity of the returned
/// norm holds to rounding rather than to bisection tolerance.
fn luxemburg_bisect(rho: impl Fn(f64) -> f64, scale: f64, volume: f64) -> Result<f64> {
    if scale == 0.0 {
        return Ok(0.0);
    }
    // bracket init λ_hi = max(1, sup|û|)·|Ω| with û = u/scale, grown or
    // shrunk until it straddles 1; robust even when the modular is
    // positively homogeneous (p⁻ = 1).
    let mut hi = volume.max(1.0);
    let mut grow = 0;
    while rho(hi * scale) > 1.0 {
        hi *= 2.0;
        grow += 1;
        if grow > 200 {
            return Err(Error::NormBracket);
        }
    }
    let mut lo = hi * 1e-12;
    let mut shrink = 0;
    while rho(lo * scale) <= 1.0 {
        // modular already ≤ 1 arbitrarily far down: the norm is below lo
        lo *= 0.5;
        shrink += 1;
        if shrink > 100 {
            return Ok(lo * scale);
        }
    }
    // invariant: rho(lo·scale) > 1 ≥ rho(hi·scale)
    while hi - lo > 1e-10 * hi {
        let mid = 0.5 * (lo + hi);
        if rho(mid * scale) <= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi) * scale)
}

/// Luxemburg quasinorm of a nodal function.
pub fn luxemburg_norm(phi: &PhiFunction, u: &GridFunction) -> Result<f64> {
    let field = u.cell_midpoint_norm();
    luxemburg_norm_cells(phi, &field)
}

/// Luxemburg quasinorm of a per-cell scalar field.
pub fn luxemburg_norm_cells(phi: &PhiFunction, v: &CellField) -> Result<f64> {
    let scale = v.values().iter().fold(0.0f64, |a, b| a.max(b.abs()));
    if scale == 0.0 {
        return Ok(0.0);
    }
    let normalized: Vec<f64> = v.values().iter().map(|x| x.abs() / scale).collect();
    let dom = v.domain().clone();
    let vol = dom.volume();
    let rho = |lambda: f64| -> f64 {
        let mut sum = 0.0;
        for (cell, &t) in normalized.iter().enumerate() {
            sum += phi.eval_cell(cell, t * scale / lambda);
            if sum.is_infinite() {
                return f64::INFINITY;
            }
        }
        sum * dom.cell_volume()
    };
    luxemburg_bisect(rho, scale, vol)
}

/// Associate-space norm via the conjugate function:
/// `‖v‖ = ‖v‖_{L^{φ*}}`, which equals `sup_{‖g‖_φ ≤ 1} ∫ v g` up to the
/// classical factor-two norm equivalence.
pub fn associate_norm(phi: &PhiFunction, v: &CellField) -> Result<f64> {
    luxemburg_norm_cells(&phi.conjugate(), v)
}

/// Exact discrete supremum `sup { Σ v_c g_c vol : ‖g‖_φ ≤ 1 }` by projected
/// ascent over the Luxemburg unit ball (cross-check mode for
/// [`associate_norm`]).
pub fn associate_norm_exact_sup(phi: &PhiFunction, v: &CellField) -> Result<f64> {
    let dom = v.domain().clone();
    let vol = dom.cell_volume();
    let vabs: Vec<f64> = v.values().iter().map(|x| x.abs()).collect();
    if vabs.iter().all(|&x| x == 0.0) {
        return Ok(0.0);
    }
    let objective =
        |g: &[f64]| -> f64 { g.iter().zip(&vabs).map(|(a, b)| a * b).sum::<f64>() * vol };
    let project = |g: &mut Vec<f64>| -> Result<()> {
        let field = CellField::new(&dom, g.clone()).expect("len");
        let norm = luxemburg_norm_cells(phi, &field)?;
        if norm > 1.0 {
            for x in g.iter_mut() {
                *x /= norm;
            }
        }
        Ok(())
    };
    let mut g = vabs.clone();
    project(&mut g)?;
    let mut best = objective(&g);
    let mut step = 1.0;
    let mut stale = 0;
    for _ in 0..2000 {
        let mut trial: Vec<f64> = g.iter().zip(&vabs).map(|(x, d)| x + step * d).collect();
        project(&mut trial)?;
        let val = objective(&trial);
        if val > best {
            let gain = (val - best) / best.abs().max(1e-300);
            g = trial;
            best = val;
            step *= 2.0;
            if gain < 1e-10 {
                stale += 1;
            } else {
                stale = 0;
            }
        } else {
            step *= 0.5;
            stale += 1;
            if step < 1e-14 {
                break;
            }
        }
        if stale >= 10 {
            break;
        }
    }
    Ok(best)
}
