//! Variable exponents `p : Ω → [1, ∞)` and the continuity diagnostics the
//! relaxation theory rests on: the log-Hölder constant
//! `sup |p(x)−p(y)| · log(e + 1/|x−y|)`, the strong modulus
//! `ω(r) = sup_{y ∈ Y, |x−y| ≤ r} (p(x)−1) · log(e + 1/|x−y|)` over the
//! linear-growth set `Y = {p = 1}`, and the ball condition
//! `|B|^{p⁻_B − p⁺_B} ≤ C`.

use crate::error::{Error, Result};
use crate::grid::{CellField, GridDomain, GridFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BinaryHeap;

/// Largest number of nodes the O(n²) pairwise diagnostics scan directly;
/// larger grids are subsampled with a deterministic stride.
const PAIRWISE_NODE_CAP: usize = 512;

/// Values below this snap to exactly 1 at construction, so that membership in
/// `Y = {p = 1}` is a bit-exact predicate rather than a tolerance band.
const Y_SNAP: f64 = 1.0 + 1e-12;

/// Nodal exponent field with cached range and the exact `Y`-mask.
#[derive(Debug, Clone)]
pub struct ExponentField {
    values: GridFunction,
    p_minus: f64,
    p_plus: f64,
    y_mask: Vec<bool>,
}

impl ExponentField {
    pub fn new(values: GridFunction) -> Result<Self> {
        if values.codim() != 1 {
            return Err(Error::InvalidExponent(format!(
                "exponent fields are scalar, got m = {}",
                values.codim()
            )));
        }
        let mut snapped = values;
        for v in snapped.values_mut() {
            if *v < 1.0 {
                return Err(Error::InvalidExponent(format!("p = {v} < 1")));
            }
            if *v <= Y_SNAP {
                *v = 1.0;
            }
        }
        let p_minus = snapped.values().iter().cloned().fold(f64::MAX, f64::min);
        let p_plus = snapped.values().iter().cloned().fold(1.0, f64::max);
        if !p_plus.is_finite() {
            return Err(Error::InvalidExponent("p⁺ is not finite".into()));
        }
        let y_mask = snapped.values().iter().map(|&v| v == 1.0).collect();
        Ok(Self {
            values: snapped,
            p_minus,
            p_plus,
            y_mask,
        })
    }

    pub fn from_fn(domain: &GridDomain, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        Self::new(GridFunction::from_scalar_fn(domain, f))
    }

    pub fn constant(domain: &GridDomain, q: f64) -> Result<Self> {
        Self::from_fn(domain, |_| q)
    }

    pub fn domain(&self) -> &GridDomain {
        self.values.domain()
    }

    pub fn as_grid_function(&self) -> &GridFunction {
        &self.values
    }

    pub fn at_node(&self, node: usize) -> f64 {
        self.values.values()[node]
    }

    pub fn p_minus(&self) -> f64 {
        self.p_minus
    }

    pub fn p_plus(&self) -> f64 {
        self.p_plus
    }

    pub fn node_in_y(&self, node: usize) -> bool {
        self.y_mask[node]
    }

    pub fn y_mask(&self) -> &[bool] {
        &self.y_mask
    }

    pub fn y_is_empty(&self) -> bool {
        !self.y_mask.iter().any(|&b| b)
    }

    /// Corner-averaged exponent per cell.  Because `p ≥ 1` everywhere, the
    /// average equals 1 exactly iff every corner lies in `Y`, so the cell-level
    /// `Y`-mask stays exact.
    pub fn cell_values(&self) -> CellField {
        let dom = self.domain();
        let vals = (0..dom.cell_count())
            .map(|cell| {
                let corners = dom.cell_corners(cell);
                if corners.iter().all(|&n| self.y_mask[n]) {
                    return 1.0;
                }
                corners.iter().map(|&n| self.at_node(n)).sum::<f64>() / corners.len() as f64
            })
            .collect();
        CellField::new(dom, vals).expect("cell count matches")
    }

    pub fn cell_in_y(&self, cell: usize) -> bool {
        self.domain()
            .cell_corners(cell)
            .iter()
            .all(|&n| self.y_mask[n])
    }

    /// Shortest-path distance from every node to `Y` along grid edges
    /// (axis steps of length `h_k`).  `f64::INFINITY` when `Y` is empty.
    pub fn distance_to_y(&self) -> Vec<f64> {
        let dom = self.domain();
        let mut dist = vec![f64::INFINITY; dom.node_count()];
        // max-heap on negated distance
        let mut heap: BinaryHeap<(std::cmp::Reverse<OrdF64>, usize)> = BinaryHeap::new();
        for node in 0..dom.node_count() {
            if self.y_mask[node] {
                dist[node] = 0.0;
                heap.push((std::cmp::Reverse(OrdF64(0.0)), node));
            }
        }
        while let Some((std::cmp::Reverse(OrdF64(d)), node)) = heap.pop() {
            if d > dist[node] {
                continue;
            }
            let idx = dom.node_multi(node);
            for k in 0..dom.dim() {
                for step in [-1isize, 1] {
                    let raw = idx[k] as isize + step;
                    if raw < 0 || raw > dom.cells_along(k) as isize {
                        continue;
                    }
                    let mut nb = idx;
                    nb[k] = raw as usize;
                    let nbf = dom.node_flat(nb);
                    let nd = d + dom.spacing(k);
                    if nd < dist[nbf] {
                        dist[nbf] = nd;
                        heap.push((std::cmp::Reverse(OrdF64(nd)), nbf));
                    }
                }
            }
        }
        dist
    }
}

#[derive(PartialEq)]
struct OrdF64(f64);
impl Eq for OrdF64 {}
impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Diagnostics bundle emitted by `check-exponent`.
#[derive(Debug, Clone)]
pub struct LogHolderReport {
    pub constant: f64,
    /// `(r, ω(r))` rows, in the order the radii were requested.
    pub strong_modulus: Vec<(f64, f64)>,
    pub ball_constant: f64,
}

fn euclid(a: &[f64], b: &[f64], dim: usize) -> f64 {
    (0..dim).map(|k| (a[k] - b[k]).powi(2)).sum::<f64>().sqrt()
}

fn subsampled_nodes(dom: &GridDomain) -> Vec<usize> {
    let n = dom.node_count();
    if n <= PAIRWISE_NODE_CAP {
        return (0..n).collect();
    }
    let stride = n.div_ceil(PAIRWISE_NODE_CAP);
    (0..n).step_by(stride).collect()
}

/// Best constant in `|p(x)−p(y)| ≤ C / log(e + 1/|x−y|)`, i.e. the pairwise
/// sup of `|p(x)−p(y)| · log(e + 1/|x−y|)`.
pub fn log_holder_constant(p: &ExponentField) -> f64 {
    let dom = p.domain();
    let nodes = subsampled_nodes(dom);
    let coords: Vec<[f64; 2]> = nodes.iter().map(|&n| dom.node_coords(n)).collect();
    let mut best = 0.0f64;
    for i in 0..nodes.len() {
        for j in (i + 1)..nodes.len() {
            let d = euclid(&coords[i], &coords[j], dom.dim());
            let v = (p.at_node(nodes[i]) - p.at_node(nodes[j])).abs()
                * (std::f64::consts::E + 1.0 / d).ln();
            best = best.max(v);
        }
    }
    best
}

/// Strong log-Hölder modulus table: for each radius `r`,
/// `ω(r) = sup { (p(x)−1) · log(e + 1/d(x)) : 0 < d(x) ≤ r }` where `d` is the
/// grid distance to `Y`.  Empty when `Y` is empty.
pub fn strong_log_holder_modulus(p: &ExponentField, radii: &[f64]) -> Vec<(f64, f64)> {
    if p.y_is_empty() {
        return Vec::new();
    }
    let dist = p.distance_to_y();
    radii
        .iter()
        .map(|&r| {
            let mut sup = 0.0f64;
            for (node, &d) in dist.iter().enumerate() {
                if d > 0.0 && d <= r {
                    sup = sup.max((p.at_node(node) - 1.0) * (std::f64::consts::E + 1.0 / d).ln());
                }
            }
            (r, sup)
        })
        .collect()
}

/// Sup of `|B|^{p⁻_B − p⁺_B}` over `sample_count` balls with seeded centers
/// and radii.  Bounded for log-Hölder exponents, divergent under refinement
/// across a jump of `p`.
pub fn ball_condition_constant(p: &ExponentField, sample_count: usize, seed: u64) -> f64 {
    let dom = p.domain();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = dom.dim();
    let h = dom.min_spacing();
    let mut best = 0.0f64;
    for _ in 0..sample_count.max(1) {
        let mut center = [0.0f64; 2];
        for (k, c) in center.iter_mut().enumerate().take(dim) {
            let (a, b) = dom.extent(k);
            *c = rng.gen_range(a..b);
        }
        // log-uniform radius between one cell and a quarter diameter
        let r_lo = h.ln();
        let r_hi = (dom.diameter() / 4.0).ln();
        let r = (r_lo + rng.gen::<f64>() * (r_hi - r_lo)).exp();

        let mut p_lo = f64::MAX;
        let mut p_hi = f64::MIN;
        for node in 0..dom.node_count() {
            let x = dom.node_coords(node);
            if euclid(&x, &center, dim) <= r {
                p_lo = p_lo.min(p.at_node(node));
                p_hi = p_hi.max(p.at_node(node));
            }
        }
        if p_lo > p_hi {
            continue; // ball missed every node
        }
        let measure = match dim {
            1 => 2.0 * r,
            _ => std::f64::consts::PI * r * r,
        };
        best = best.max(measure.powf(p_lo - p_hi));
    }
    best
}

/// Full diagnostics for the `check-exponent` subcommand.
pub fn log_holder_report(
    p: &ExponentField,
    radii: &[f64],
    ball_samples: usize,
    seed: u64,
) -> LogHolderReport {
    LogHolderReport {
        constant: log_holder_constant(p),
        strong_modulus: strong_log_holder_modulus(p, radii),
        ball_constant: ball_condition_constant(p, ball_samples, seed),
    }
}
