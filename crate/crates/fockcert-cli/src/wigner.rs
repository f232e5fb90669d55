//! `fockcert wigner` — evaluate a state's Wigner function on a grid and
//! report its minimum.

use crate::family;
use crate::opts::{merge, merge_family, Config, Format, GlobalOpts, WignerArgs};
use crate::output::{fmt_sig, write_primary};
use fockcert::dist::fock_dist;
use fockcert::phasespace::{min_wigner, PhasePoint, WignerState};
use fockcert::{FockDistribution, StateFamily};
use num_complex::Complex64;
use serde::Serialize;

const CONFIG_KEYS: &[&str] = &[
    "family", "mu", "p", "k", "n", "ell", "xi", "n-max", "radius", "grid",
];

/// Grow the truncation until the missing tail is negligible for the
/// diagonal Wigner sum.
fn auto_truncated(family: &StateFamily, n_max: Option<usize>) -> Result<FockDistribution, String> {
    if let Some(n) = n_max {
        return family.distribution(n).map_err(|e| e.to_string());
    }
    let mut n = 64;
    loop {
        let dist = family.distribution(n).map_err(|e| e.to_string())?;
        if dist.tail_mass() < 1e-13 {
            return Ok(dist);
        }
        n *= 2;
        if n > 8192 {
            eprintln!(
                "warning: truncation 8192 still leaves tail mass {:.3e}; \
                 Wigner values carry that error bound",
                dist.tail_mass()
            );
            return family.distribution(8192).map_err(|e| e.to_string());
        }
    }
}

/// Map a family to an evaluatable Wigner state. Fock-diagonal families
/// use the diagonal sum; displaced families use their closed forms.
fn wigner_state(fam: &StateFamily, n_max: Option<usize>) -> Result<WignerState, String> {
    Ok(match fam {
        StateFamily::Fock { n } => {
            WignerState::Diagonal(fock_dist(*n, *n).map_err(|e| e.to_string())?)
        }
        StateFamily::Thermal { .. }
        | StateFamily::NoisyFock { .. }
        | StateFamily::BosonAddedThermal { .. }
        | StateFamily::MixedBosonAddedThermal { .. }
        | StateFamily::ThermallyAveragedFock1 { .. } => {
            WignerState::Diagonal(auto_truncated(fam, n_max)?)
        }
        StateFamily::Coherent { mu } => WignerState::Coherent(Complex64::new(mu.sqrt(), 0.0)),
        StateFamily::BosonAddedCoherent { mu, ell } => {
            if *ell != 1 {
                return Err("wigner supports boson-added-coherent only for --ell 1".into());
            }
            WignerState::BosonAddedCoherent(Complex64::new(mu.sqrt(), 0.0))
        }
        StateFamily::ProbBosonAddedCoherent { mu, p } => {
            WignerState::MixedBosonAddedCoherent {
                alpha: Complex64::new(mu.sqrt(), 0.0),
                p: *p,
            }
        }
        other => {
            return Err(format!(
                "family {} has no Wigner evaluator (not Fock-diagonal and no closed form here)",
                other.label()
            ));
        }
    })
}

#[derive(Serialize)]
struct WignerDoc<'a> {
    family: &'a str,
    radius: f64,
    grid: usize,
    report: fockcert::NegativityReport,
    kind: &'static str,
    rows: Vec<Vec<f64>>,
}

pub fn run(args: WignerArgs, config: &Config, global: &GlobalOpts) -> Result<u8, String> {
    config.check_keys(CONFIG_KEYS)?;
    let fam_args = merge_family(&args.family, config)?;
    let fam = family::build(&fam_args)?;
    let n_max = merge(args.n_max, config, "n-max")?;
    let state = wigner_state(&fam, n_max)?;
    let radius = merge(args.radius, config, "radius")?.unwrap_or(6.0);
    let radial = state.is_radial();
    let grid = merge(args.grid, config, "grid")?.unwrap_or(if radial { 2001 } else { 201 });

    let report = min_wigner(&state, radius, grid).map_err(|e| e.to_string())?;

    let (kind, rows): (&'static str, Vec<Vec<f64>>) = if radial {
        let rows = (0..grid)
            .map(|i| {
                let r = radius * i as f64 / (grid - 1) as f64;
                vec![r, state.evaluate(PhasePoint { x: r, p: 0.0 })]
            })
            .collect();
        ("radial", rows)
    } else {
        let coord = |i: usize| -radius + 2.0 * radius * i as f64 / (grid - 1) as f64;
        let mut rows = Vec::with_capacity(grid * grid);
        for i in 0..grid {
            for j in 0..grid {
                let (x, p) = (coord(i), coord(j));
                rows.push(vec![x, p, state.evaluate(PhasePoint { x, p })]);
            }
        }
        ("planar", rows)
    };

    match global.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut csv = String::from(if radial { "r,w\n" } else { "x,p,w\n" });
            for row in &rows {
                let cells: Vec<String> = row.iter().map(|&x| fmt_sig(x)).collect();
                csv.push_str(&cells.join(","));
                csv.push('\n');
            }
            write_primary(&global.out, &csv)?;
            eprintln!("{}", report.to_json());
        }
        Format::Json => {
            let doc = WignerDoc {
                family: fam.label(),
                radius,
                grid,
                report,
                kind,
                rows,
            };
            let mut text =
                serde_json::to_string(&doc).expect("wigner serialization cannot fail");
            text.push('\n');
            write_primary(&global.out, &text)?;
        }
    }
    Ok(0)
}
