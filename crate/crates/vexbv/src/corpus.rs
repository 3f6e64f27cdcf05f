//! Built-in test corpus: the fixtures the acceptance suite and the `corpus`
//! subcommand share, so file-driven runs and in-process runs see identical
//! data.

use crate::error::Result;
use crate::exponent::ExponentField;
use crate::grid::{GridDomain, GridFunction};
use crate::variation::{JumpSet, PiecewiseBvFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::Path;

/// One duality-suite case: a candidate and its exponent field.
pub struct CorpusCase {
    pub name: &'static str,
    pub u: PiecewiseBvFunction,
    pub p: ExponentField,
}

/// Step of height 2 at the origin on `(−1,1)` with `p ≡ 1`.
pub fn step_case(n: usize) -> Result<(PiecewiseBvFunction, ExponentField)> {
    let dom = GridDomain::line(-1.0, 1.0, n)?;
    let p = ExponentField::constant(&dom, 1.0)?;
    let u = PiecewiseBvFunction::new(
        GridFunction::from_scalar_fn(&dom, |_| -1.0),
        vec![JumpSet::Point {
            x: 0.0,
            vector: vec![2.0],
        }],
    )?;
    Ok((u, p))
}

/// Mixed case: `Y = (−1, 0]`, linear exponent taper to 2 across `(0, 0.25)`,
/// one jump of height 1 at `x = −0.5`, smooth part `x²` on `(0,1)`.
pub fn mixed_case(n: usize) -> Result<(PiecewiseBvFunction, ExponentField)> {
    let dom = GridDomain::line(-1.0, 1.0, n)?;
    let p = mixed_exponent(&dom)?;
    let u = PiecewiseBvFunction::new(
        GridFunction::from_scalar_fn(&dom, |x| if x[0] > 0.0 { x[0] * x[0] } else { 0.0 }),
        vec![JumpSet::Point {
            x: -0.5,
            vector: vec![1.0],
        }],
    )?;
    Ok((u, p))
}

pub fn mixed_exponent(dom: &GridDomain) -> Result<ExponentField> {
    ExponentField::from_fn(dom, |x| 1.0 + (4.0 * x[0]).clamp(0.0, 1.0))
}

/// Noisy step for the denoising case: `p = 1` in a band around the jump and
/// 2 in the flat tails.  Returns `(clean, noisy, p)`.
pub fn noisy_step(n: usize, seed: u64) -> Result<(GridFunction, GridFunction, ExponentField)> {
    let dom = GridDomain::line(-1.0, 1.0, n)?;
    let clean = GridFunction::from_scalar_fn(&dom, |x| if x[0] >= 0.0 { 1.0 } else { -1.0 });
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut noisy = clean.clone();
    for v in noisy.values_mut() {
        *v += rng.gen_range(-0.2..0.2);
    }
    let p = ExponentField::from_fn(&dom, |x| 1.0 + (4.0 * (x[0].abs() - 0.2)).clamp(0.0, 1.0))?;
    Ok((clean, noisy, p))
}

fn plateau_exponent_1d(dom: &GridDomain, radius: f64) -> Result<ExponentField> {
    ExponentField::from_fn(dom, |x| {
        1.0 + ((x[0].abs() - radius) / radius).clamp(0.0, 1.0)
    })
}

/// The twelve-case suite behind the gradient-norm equivalence and
/// `ρ_V ≤ ρ_old` envelopes: smooth / step-in-Y / 2D profiles crossed with
/// constant, ramp, and plateau exponents.  Jumps sit where the smooth
/// part is flat, so the representation and the discretized energies agree
/// to rounding.
pub fn duality_corpus() -> Result<Vec<CorpusCase>> {
    let mut cases = Vec::new();

    let line01 = GridDomain::line(0.0, 1.0, 128)?;
    let line11 = GridDomain::line(-1.0, 1.0, 128)?;
    let sq01 = GridDomain::rect((0.0, 1.0), 32, (0.0, 1.0), 32)?;
    let sq11 = GridDomain::rect((-1.0, 1.0), 32, (-1.0, 1.0), 32)?;

    let smooth = |dom: &GridDomain, f: fn(&[f64]) -> f64| -> Result<PiecewiseBvFunction> {
        PiecewiseBvFunction::new(GridFunction::from_scalar_fn(dom, f), vec![])
    };

    cases.push(CorpusCase {
        name: "1d-sin-const",
        u: smooth(&line01, |x| (std::f64::consts::PI * x[0]).sin())?,
        p: ExponentField::constant(&line01, 1.5)?,
    });
    cases.push(CorpusCase {
        name: "1d-sin-ramp",
        u: smooth(&line01, |x| (std::f64::consts::PI * x[0]).sin())?,
        p: ExponentField::from_fn(&line01, |x| 1.0 + x[0])?,
    });
    cases.push(CorpusCase {
        name: "1d-bump-plateau",
        u: smooth(&line11, |x| (1.0 - (2.0 * x[0]).abs()).max(0.0))?,
        p: plateau_exponent_1d(&line11, 0.25)?,
    });
    {
        let (u, p) = step_case(128)?;
        cases.push(CorpusCase {
            name: "1d-step-p1",
            u,
            p,
        });
    }
    {
        let (u, p) = mixed_case(128)?;
        cases.push(CorpusCase {
            name: "1d-mixed",
            u,
            p,
        });
    }
    cases.push(CorpusCase {
        name: "1d-two-steps-plateau",
        u: PiecewiseBvFunction::new(
            GridFunction::zeros(&line11, 1),
            vec![
                JumpSet::Point {
                    x: -0.25,
                    vector: vec![1.0],
                },
                JumpSet::Point {
                    x: 0.25,
                    vector: vec![-0.5],
                },
            ],
        )?,
        p: plateau_exponent_1d(&line11, 0.5)?,
    });
    cases.push(CorpusCase {
        name: "2d-affine-p2",
        u: smooth(&sq01, |x| 3.0 * x[0] - 2.0 * x[1])?,
        p: ExponentField::constant(&sq01, 2.0)?,
    });
    cases.push(CorpusCase {
        name: "2d-sincos-ramp",
        u: smooth(&sq01, |x| {
            0.5 * (std::f64::consts::PI * x[0]).sin() * (std::f64::consts::PI * x[1]).cos()
        })?,
        p: ExponentField::from_fn(&sq01, |x| 1.0 + 0.5 * (x[0] + x[1]))?,
    });
    cases.push(CorpusCase {
        name: "2d-bump-radial-plateau",
        u: smooth(&sq11, |x| {
            let r2 = x[0] * x[0] + x[1] * x[1];
            (1.0 - 4.0 * r2).max(0.0)
        })?,
        p: ExponentField::from_fn(&sq11, |x| {
            let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
            1.0 + ((r - 0.3) / 0.25).clamp(0.0, 1.0)
        })?,
    });
    cases.push(CorpusCase {
        name: "2d-line-jump-band",
        u: PiecewiseBvFunction::new(
            GridFunction::zeros(&sq11, 1),
            vec![JumpSet::AxisLine {
                axis: 0,
                offset: 0.0,
                vector: vec![1.0],
            }],
        )?,
        p: ExponentField::from_fn(&sq11, |x| 1.0 + (4.0 * (x[0].abs() - 0.2)).clamp(0.0, 1.0))?,
    });
    cases.push(CorpusCase {
        name: "2d-line-jump-p1",
        u: PiecewiseBvFunction::new(
            GridFunction::from_scalar_fn(&sq11, |x| 0.1 * x[0]),
            vec![JumpSet::AxisLine {
                axis: 0,
                offset: 0.25,
                vector: vec![1.5],
            }],
        )?,
        p: ExponentField::constant(&sq11, 1.0)?,
    });
    cases.push(CorpusCase {
        name: "1d-vector-step-plateau",
        u: PiecewiseBvFunction::new(
            GridFunction::from_fn(&line11, 2, |x, out| {
                out[0] = 0.3 * (x[0] + 1.0).powi(2) * f64::from(x[0] > 0.25);
                out[1] = 0.0;
            }),
            vec![JumpSet::Point {
                x: -0.3,
                vector: vec![1.0, 0.5],
            }],
        )?,
        p: plateau_exponent_1d(&line11, 0.5)?,
    });
    Ok(cases)
}

/// Materialize the fixtures as files: per case a smooth-part grid file, a
/// jump file (when jumps exist), the discretized nodal candidate, and an
/// exponent file, plus the noisy-step data.  Returns `(case, kind, path)`
/// manifest rows.
pub fn write_corpus(dir: &Path, seed: u64) -> Result<Vec<(String, String, String)>> {
    std::fs::create_dir_all(dir)?;
    let mut manifest = Vec::new();
    let mut emit = |case: &str, kind: &str, path: &Path| {
        manifest.push((
            case.to_string(),
            kind.to_string(),
            path.display().to_string(),
        ));
    };
    for case in duality_corpus()? {
        let base = dir.join(case.name);
        let grid_path = base.with_extension("grid");
        crate::io::write_grid_function(&grid_path, &case.u.smooth)?;
        emit(case.name, "smooth", &grid_path);
        if !case.u.jumps.is_empty() {
            let jump_path = base.with_extension("jumps");
            crate::io::write_jump_sets(&jump_path, case.u.domain(), &case.u.jumps)?;
            emit(case.name, "jumps", &jump_path);
            let disc_path = dir.join(format!("{}.disc.grid", case.name));
            crate::io::write_grid_function(&disc_path, &case.u.discretize()?)?;
            emit(case.name, "discretized", &disc_path);
        }
        let p_path = base.with_extension("exponent");
        crate::io::write_grid_function(&p_path, case.p.as_grid_function())?;
        emit(case.name, "exponent", &p_path);
    }
    {
        let (clean, noisy, p) = noisy_step(256, seed)?;
        let clean_path = dir.join("denoise-clean.grid");
        let noisy_path = dir.join("denoise-noisy.grid");
        let p_path = dir.join("denoise.exponent");
        crate::io::write_grid_function(&clean_path, &clean)?;
        crate::io::write_grid_function(&noisy_path, &noisy)?;
        crate::io::write_grid_function(&p_path, p.as_grid_function())?;
        emit("denoise", "clean", &clean_path);
        emit("denoise", "noisy", &noisy_path);
        emit("denoise", "exponent", &p_path);
    }
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::variation::bv_membership;

    #[test]
    fn every_case_is_a_valid_bv_candidate() {
        for case in duality_corpus().unwrap() {
            let report = bv_membership(&case.u, &case.p);
            assert!(
                report.member,
                "{} has jumps outside Y: {:?}",
                case.name, report.offending
            );
            case.u.discretize().unwrap();
        }
    }

    #[test]
    fn corpus_has_twelve_cases_with_unique_names() {
        let corpus = duality_corpus().unwrap();
        assert_eq!(corpus.len(), 12);
        let mut names: Vec<_> = corpus.iter().map(|c| c.name).collect();
        names.dedup();
        assert_eq!(names.len(), 12);
    }

    #[test]
    fn corpus_files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = write_corpus(dir.path(), 42).unwrap();
        assert!(manifest.len() > 24);
        for (_, _, path) in &manifest {
            assert!(std::path::Path::new(path).exists());
        }
        // reload one structured case through the readers
        let grid = crate::io::read_grid_function(&dir.path().join("1d-mixed.grid")).unwrap();
        let jumps = crate::io::read_jump_sets(&dir.path().join("1d-mixed.jumps"), grid.domain(), 1)
            .unwrap();
        assert_eq!(jumps.len(), 1);
    }
}
