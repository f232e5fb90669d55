//! `fockcert sweep` — criteria margins across a family parameter grid,
//! with root-refined detection intervals.

use crate::criteria_id::CriterionSpec;
use crate::family;
use crate::opts::{merge, merge_family, Config, Format, GlobalOpts, SweepArgs};
use crate::output::{csv_cell, fmt_sig, write_primary};
use fockcert::criteria::CriterionVerdict;
use fockcert::numeric::solve_bracketed;
use fockcert::StateFamily;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;

const CONFIG_KEYS: &[&str] = &[
    "family", "mu", "p", "k", "n", "ell", "xi", "n-max", "sweep", "start", "stop", "step",
    "sweep2", "start2", "stop2", "step2", "criteria",
];

struct Axis {
    name: String,
    values: Vec<f64>,
}

fn build_axis(
    name: String,
    start: Option<f64>,
    stop: Option<f64>,
    step: Option<f64>,
) -> Result<Axis, String> {
    let start = start.ok_or_else(|| format!("sweep over {name:?} needs --start"))?;
    let stop = stop.ok_or_else(|| format!("sweep over {name:?} needs --stop"))?;
    let step = step.ok_or_else(|| format!("sweep over {name:?} needs --step"))?;
    if !start.is_finite() || !stop.is_finite() || !step.is_finite() {
        return Err(format!("sweep range for {name:?} must be finite"));
    }
    if !(step > 0.0) {
        return Err(format!("--step must be > 0, got {step}"));
    }
    if start > stop {
        return Err(format!("--start {start} exceeds --stop {stop}"));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize;
    let values = (0..=count).map(|i| start + step * i as f64).collect();
    Ok(Axis { name, values })
}

/// Detection intervals of one criterion along the primary axis: maximal
/// runs where the margin is strictly positive, with interior endpoints
/// refined to 1e-9 by bracketed root finding on the margin itself.
fn detection_intervals(
    base: &StateFamily,
    param: &str,
    n_max: usize,
    spec: &CriterionSpec,
    values: &[f64],
    margins: &[Option<f64>],
) -> Vec<[f64; 2]> {
    let margin_at = |v: f64| -> f64 {
        family::with_param(base, param, v)
            .ok()
            .and_then(|fam| fam.distribution(n_max).ok())
            .and_then(|dist| spec.eval(&dist, 0.0).ok())
            .map_or(f64::NAN, |verdict| verdict.margin)
    };
    let detected: Vec<bool> = margins
        .iter()
        .map(|m| m.map_or(false, |m| m > 0.0))
        .collect();
    // Refine the sign change inside the cell [values[i], values[i+1]];
    // cells with an infinite or missing endpoint margin fall back to the
    // cell midpoint.
    let crossing = |i: usize| -> f64 {
        let (lo, hi) = (values[i], values[i + 1]);
        match (margins[i], margins[i + 1]) {
            (Some(a), Some(b)) if a.is_finite() && b.is_finite() => {
                solve_bracketed(margin_at, lo, hi, 1e-9).unwrap_or(0.5 * (lo + hi))
            }
            _ => 0.5 * (lo + hi),
        }
    };
    let mut out = Vec::new();
    let mut open: Option<f64> = None;
    for (i, &hit) in detected.iter().enumerate() {
        if hit && open.is_none() {
            open = Some(if i == 0 { values[0] } else { crossing(i - 1) });
        }
        if !hit {
            if let Some(lo) = open.take() {
                out.push([lo, crossing(i - 1)]);
            }
        }
    }
    if let Some(lo) = open {
        out.push([lo, *values.last().expect("axis is never empty")]);
    }
    out
}

#[derive(Serialize)]
struct RowOut<'a> {
    param: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    param2: Option<f64>,
    verdicts: Option<&'a [CriterionVerdict]>,
    error: Option<&'a str>,
}

#[derive(Serialize)]
struct SweepDoc<'a> {
    family: &'a str,
    n_max: usize,
    param: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    param2: Option<&'a str>,
    rows: Vec<RowOut<'a>>,
    intervals: &'a BTreeMap<String, Vec<[f64; 2]>>,
}

#[derive(Serialize)]
struct IntervalsDoc<'a> {
    intervals: &'a BTreeMap<String, Vec<[f64; 2]>>,
}

/// A swept parameter needs no base value: seed it with the axis start so
/// family construction succeeds, then every row overrides it.
fn seed_swept(args: &mut crate::opts::FamilyArgs, axis: &Axis) {
    match axis.name.as_str() {
        "mu" => {
            args.mu.get_or_insert(axis.values[0]);
        }
        "p" => {
            args.p.get_or_insert(axis.values[0]);
        }
        "xi" => {
            args.xi.get_or_insert(axis.values[0]);
        }
        _ => {}
    }
}

pub fn run(args: SweepArgs, config: &Config, global: &GlobalOpts) -> Result<u8, String> {
    config.check_keys(CONFIG_KEYS)?;
    let n_max = merge(args.n_max, config, "n-max")?.unwrap_or(8);

    let sweep_name = match args.sweep.clone().or_else(|| config.get_str("sweep")) {
        Some(name) => name,
        None => "mu".to_string(),
    };
    let axis1 = build_axis(
        sweep_name,
        merge(args.start, config, "start")?,
        merge(args.stop, config, "stop")?,
        merge(args.step, config, "step")?,
    )?;
    let sweep2_name = args.sweep2.clone().or_else(|| config.get_str("sweep2"));
    let axis2 = match sweep2_name {
        Some(name) => Some(build_axis(
            name,
            merge(args.start2, config, "start2")?,
            merge(args.stop2, config, "stop2")?,
            merge(args.step2, config, "step2")?,
        )?),
        None => None,
    };

    let mut fam_args = merge_family(&args.family, config)?;
    seed_swept(&mut fam_args, &axis1);
    if let Some(a2) = &axis2 {
        seed_swept(&mut fam_args, a2);
    }
    let base = family::build(&fam_args)?;

    // Probe the swept parameter names once so a typo fails fast instead
    // of marking every row.
    family::with_param(&base, &axis1.name, axis1.values[0])?;
    if let Some(a2) = &axis2 {
        family::with_param(&base, &a2.name, a2.values[0])?;
    }

    let mut id_texts = args.criteria.clone();
    if id_texts.is_empty() {
        if let Some(text) = config.get_str("criteria") {
            id_texts = text
                .split(';')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(str::to_string)
                .collect();
        }
    }
    if id_texts.is_empty() {
        id_texts = vec!["K1".to_string(), "Kinf:2".to_string()];
    }
    let specs: Vec<CriterionSpec> = id_texts
        .iter()
        .map(|t| CriterionSpec::parse(t))
        .collect::<Result<_, _>>()?;
    for spec in &specs {
        if spec.min_len() > n_max + 1 {
            return Err(format!(
                "criterion {} reads P_{}, but --n-max {n_max} stops earlier",
                spec.id(),
                spec.min_len() - 1
            ));
        }
    }

    let points: Vec<(f64, Option<f64>)> = match &axis2 {
        None => axis1.values.iter().map(|&v| (v, None)).collect(),
        Some(a2) => axis1
            .values
            .iter()
            .flat_map(|&v1| a2.values.iter().map(move |&v2| (v1, Some(v2))))
            .collect(),
    };
    let tol = global.tol;
    let results: Vec<Result<Vec<CriterionVerdict>, String>> = points
        .par_iter()
        .map(|&(v1, v2)| {
            let mut fam = family::with_param(&base, &axis1.name, v1)?;
            if let (Some(v2), Some(a2)) = (v2, &axis2) {
                fam = family::with_param(&fam, &a2.name, v2)?;
            }
            let dist = fam.distribution(n_max).map_err(|e| e.to_string())?;
            specs
                .iter()
                .map(|s| s.eval(&dist, tol).map_err(|e| e.to_string()))
                .collect()
        })
        .collect();

    // Detection intervals only make sense along a single axis.
    let mut intervals = BTreeMap::new();
    if axis2.is_none() {
        for (c, spec) in specs.iter().enumerate() {
            let margins: Vec<Option<f64>> = results
                .iter()
                .map(|r| r.as_ref().ok().map(|vs| vs[c].margin))
                .collect();
            intervals.insert(
                spec.id(),
                detection_intervals(&base, &axis1.name, n_max, spec, &axis1.values, &margins),
            );
        }
    }

    match global.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut csv = String::from("param");
            if axis2.is_some() {
                csv.push_str(",param2");
            }
            for spec in &specs {
                let id = spec.id();
                csv.push(',');
                csv.push_str(&csv_cell(&format!("{id}_margin")));
                csv.push(',');
                csv.push_str(&csv_cell(&format!("{id}_violated")));
            }
            csv.push_str(",error\n");
            for ((v1, v2), result) in points.iter().zip(&results) {
                csv.push_str(&fmt_sig(*v1));
                if let Some(v2) = v2 {
                    csv.push(',');
                    csv.push_str(&fmt_sig(*v2));
                }
                match result {
                    Ok(verdicts) => {
                        for v in verdicts {
                            csv.push(',');
                            csv.push_str(&fmt_sig(v.margin));
                            csv.push(',');
                            csv.push_str(if v.violated { "true" } else { "false" });
                        }
                        csv.push_str(",\n");
                    }
                    Err(msg) => {
                        for _ in &specs {
                            csv.push_str(",,");
                        }
                        csv.push(',');
                        csv.push_str(&csv_cell(msg));
                        csv.push('\n');
                    }
                }
            }
            write_primary(&global.out, &csv)?;
            if axis2.is_none() {
                let doc = IntervalsDoc {
                    intervals: &intervals,
                };
                eprintln!(
                    "{}",
                    serde_json::to_string(&doc).expect("interval serialization cannot fail")
                );
            }
        }
        Format::Json => {
            let rows: Vec<RowOut> = points
                .iter()
                .zip(&results)
                .map(|(&(v1, v2), result)| RowOut {
                    param: v1,
                    param2: v2,
                    verdicts: result.as_ref().ok().map(Vec::as_slice),
                    error: result.as_ref().err().map(String::as_str),
                })
                .collect();
            let doc = SweepDoc {
                family: base.label(),
                n_max,
                param: &axis1.name,
                param2: axis2.as_ref().map(|a| a.name.as_str()),
                rows,
                intervals: &intervals,
            };
            let mut text =
                serde_json::to_string(&doc).expect("sweep serialization cannot fail");
            text.push('\n');
            write_primary(&global.out, &text)?;
        }
    }
    Ok(0)
}
