//! Text file formats.
//!
//! Grid functions: line 1 is `dim m N_1 [N_2] a_1 b_1 [a_2 b_2]`, then one
//! node per line in row-major order (axis 0 slowest) with `m` decimals.
//! Exponent fields use the same format with `m = 1`.
//!
//! Jump sets: one jump per line — 1D `x j_1 … j_m`, 2D
//! `x1 y1 x2 y2 nu_x nu_y j_1 … j_m`.  A 2D segment spanning the full
//! extent of its tangential axis is recognized as a domain-splitting line
//! (the only kind with a nodal discretization).
//!
//! Experiment configs: `key = value` lines, `#` comments.

use crate::error::{Error, Result};
use crate::grid::{GridDomain, GridFunction};
use crate::variation::JumpSet;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        msg: msg.into(),
    }
}

pub fn write_grid_function(path: &Path, u: &GridFunction) -> Result<()> {
    let dom = u.domain();
    let mut out = String::new();
    match dom.dim() {
        1 => {
            let (a, b) = dom.extent(0);
            writeln!(out, "1 {} {} {} {}", u.codim(), dom.cells_along(0), a, b).unwrap();
        }
        _ => {
            let (a1, b1) = dom.extent(0);
            let (a2, b2) = dom.extent(1);
            writeln!(
                out,
                "2 {} {} {} {} {} {} {}",
                u.codim(),
                dom.cells_along(0),
                dom.cells_along(1),
                a1,
                b1,
                a2,
                b2
            )
            .unwrap();
        }
    }
    for node in 0..dom.node_count() {
        let vals = u.node(node);
        let line: Vec<String> = vals.iter().map(|v| format!("{v}")).collect();
        writeln!(out, "{}", line.join(" ")).unwrap();
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn read_grid_function(path: &Path) -> Result<GridFunction> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(path, 1, "empty file"))?;
    let tok: Vec<&str> = header.split_whitespace().collect();
    let need = |idx: usize| -> Result<f64> {
        tok.get(idx)
            .ok_or_else(|| parse_err(path, 1, format!("header needs ≥ {} fields", idx + 1)))?
            .parse::<f64>()
            .map_err(|e| parse_err(path, 1, format!("field {}: {e}", idx + 1)))
    };
    let dim = need(0)? as usize;
    let m = need(1)? as usize;
    if !(dim == 1 || dim == 2) || m == 0 {
        return Err(parse_err(path, 1, format!("bad dim {dim} or m {m}")));
    }
    let dom = match dim {
        1 => GridDomain::line(need(3)?, need(4)?, need(2)? as usize)?,
        _ => GridDomain::rect(
            (need(4)?, need(5)?),
            need(2)? as usize,
            (need(6)?, need(7)?),
            need(3)? as usize,
        )?,
    };
    let mut values = Vec::with_capacity(dom.node_count() * m);
    let mut count = 0usize;
    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != m {
            return Err(parse_err(
                path,
                lineno + 1,
                format!("expected {m} values, found {}", fields.len()),
            ));
        }
        for fstr in fields {
            let v: f64 = fstr
                .parse()
                .map_err(|e| parse_err(path, lineno + 1, format!("{e}: {fstr:?}")))?;
            values.push(v);
        }
        count += 1;
    }
    if count != dom.node_count() {
        return Err(parse_err(
            path,
            count + 1,
            format!("expected {} node lines, found {count}", dom.node_count()),
        ));
    }
    GridFunction::from_values(&dom, m, values)
}

pub fn write_jump_sets(path: &Path, domain: &GridDomain, jumps: &[JumpSet]) -> Result<()> {
    let mut out = String::new();
    for j in jumps {
        match j {
            JumpSet::Point { x, vector } => {
                let mut line = format!("{x}");
                for v in vector {
                    write!(line, " {v}").unwrap();
                }
                writeln!(out, "{line}").unwrap();
            }
            JumpSet::AxisLine {
                axis,
                offset,
                vector,
            } => {
                let other = 1 - axis;
                let (lo, hi) = domain.extent(other);
                let (mut a, mut b, mut nu) = ([0.0; 2], [0.0; 2], [0.0; 2]);
                a[*axis] = *offset;
                b[*axis] = *offset;
                a[other] = lo;
                b[other] = hi;
                nu[*axis] = 1.0;
                let mut line = format!("{} {} {} {} {} {}", a[0], a[1], b[0], b[1], nu[0], nu[1]);
                for v in vector {
                    write!(line, " {v}").unwrap();
                }
                writeln!(out, "{line}").unwrap();
            }
            JumpSet::Segment {
                a,
                b,
                normal,
                vector,
            } => {
                let mut line = format!(
                    "{} {} {} {} {} {}",
                    a[0], a[1], b[0], b[1], normal[0], normal[1]
                );
                for v in vector {
                    write!(line, " {v}").unwrap();
                }
                writeln!(out, "{line}").unwrap();
            }
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn read_jump_sets(path: &Path, domain: &GridDomain, m: usize) -> Result<Vec<JumpSet>> {
    let text = std::fs::read_to_string(path)?;
    let mut jumps = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Result<Vec<f64>> = line
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|e| parse_err(path, lineno + 1, format!("{e}: {t:?}")))
            })
            .collect();
        let fields = fields?;
        match domain.dim() {
            1 => {
                if fields.len() != 1 + m {
                    return Err(parse_err(
                        path,
                        lineno + 1,
                        format!("1D jump line needs 1+{m} fields, found {}", fields.len()),
                    ));
                }
                jumps.push(JumpSet::Point {
                    x: fields[0],
                    vector: fields[1..].to_vec(),
                });
            }
            _ => {
                if fields.len() != 6 + m {
                    return Err(parse_err(
                        path,
                        lineno + 1,
                        format!("2D jump line needs 6+{m} fields, found {}", fields.len()),
                    ));
                }
                let (a, b) = ([fields[0], fields[1]], [fields[2], fields[3]]);
                let nu = [fields[4], fields[5]];
                let vector = fields[6..].to_vec();
                jumps.push(classify_segment(
                    domain,
                    a,
                    b,
                    nu,
                    vector,
                    path,
                    lineno + 1,
                )?);
            }
        }
    }
    Ok(jumps)
}

/// Recognize full-span axis-aligned segments as domain-splitting lines.
fn classify_segment(
    domain: &GridDomain,
    a: [f64; 2],
    b: [f64; 2],
    nu: [f64; 2],
    vector: Vec<f64>,
    path: &Path,
    lineno: usize,
) -> Result<JumpSet> {
    let axis = if (nu[0].abs() - 1.0).abs() < 1e-12 && nu[1].abs() < 1e-12 {
        Some(0)
    } else if (nu[1].abs() - 1.0).abs() < 1e-12 && nu[0].abs() < 1e-12 {
        Some(1)
    } else {
        None
    };
    if let Some(axis) = axis {
        let other = 1 - axis;
        let aligned = (a[axis] - b[axis]).abs() < 1e-12;
        let (lo, hi) = domain.extent(other);
        let spans = (a[other].min(b[other]) - lo).abs() < 1e-9
            && (a[other].max(b[other]) - hi).abs() < 1e-9;
        if aligned && spans {
            let vector = if nu[axis] < 0.0 {
                vector.iter().map(|v| -v).collect()
            } else {
                vector
            };
            return Ok(JumpSet::AxisLine {
                axis,
                offset: a[axis],
                vector,
            });
        }
        if aligned {
            let mut normal = [0.0; 2];
            normal[axis] = nu[axis];
            return Ok(JumpSet::Segment {
                a,
                b,
                normal,
                vector,
            });
        }
    }
    Err(parse_err(
        path,
        lineno,
        "segment must be axis-aligned with a matching unit normal",
    ))
}

/// Line-oriented `key = value` configuration text.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!(
                "line {}: expected `key = value`, got {line:?}",
                lineno + 1
            ))
        })?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}
