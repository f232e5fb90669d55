//! `fockcert boundary` — sample the classical-region boundary of a
//! probability slice.

use crate::opts::{merge, BoundaryArgs, Config, Format, GlobalOpts};
use crate::output::{fmt_sig, write_primary};
use fockcert::geometry::{coherent_curve, convex_closure_p0k, p0k_curve, Slice};
use serde::Serialize;

const CONFIG_KEYS: &[&str] = &["slice", "samples", "rulings", "lambda-max"];

#[derive(Serialize)]
struct RowOut {
    kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda: Option<f64>,
    t: f64,
    point: Vec<f64>,
}

#[derive(Serialize)]
struct BoundaryDoc<'a> {
    slice: &'a [usize],
    rows: &'a [RowOut],
}

pub fn run(args: BoundaryArgs, config: &Config, global: &GlobalOpts) -> Result<u8, String> {
    config.check_keys(CONFIG_KEYS)?;
    let slice_text = args
        .slice
        .clone()
        .or_else(|| config.get_str("slice"))
        .unwrap_or_else(|| "0,1,2".to_string());
    let indices: Vec<usize> = slice_text
        .split(',')
        .map(|tok| {
            tok.trim()
                .parse::<usize>()
                .map_err(|_| format!("cannot parse slice index {tok:?}"))
        })
        .collect::<Result<_, _>>()?;
    let slice = Slice::new(&indices).map_err(|e| e.to_string())?;
    let samples = merge(args.samples, config, "samples")?.unwrap_or(200);
    let rulings = merge(args.rulings, config, "rulings")?.unwrap_or(21);
    let lambda_max = merge(args.lambda_max, config, "lambda-max")?.unwrap_or(8.0);
    if samples < 2 || rulings < 2 {
        return Err("--samples and --rulings must be at least 2".into());
    }
    if !(lambda_max > 0.0) || !lambda_max.is_finite() {
        return Err(format!("--lambda-max must be > 0, got {lambda_max}"));
    }

    let lambdas: Vec<f64> = (0..samples)
        .map(|i| lambda_max * i as f64 / (samples - 1) as f64)
        .collect();
    let ts: Vec<f64> = (0..rulings)
        .map(|j| j as f64 / (rulings - 1) as f64)
        .collect();

    let mut rows: Vec<RowOut> = Vec::new();
    match indices.as_slice() {
        // Planar slice (P_0, P_k): the coherent curve, plus the convex
        // closure's chord to the vacuum vertex when the curve dents.
        [0, k] => {
            for &lam in &lambdas {
                rows.push(RowOut {
                    kind: "curve",
                    lambda: Some(lam),
                    t: 1.0,
                    point: coherent_curve(&slice, lam).map_err(|e| e.to_string())?,
                });
            }
            if *k >= 2 {
                let closure = convex_closure_p0k(*k).map_err(|e| e.to_string())?;
                let a = [closure.p0_tangent, p0k_curve(*k, closure.p0_tangent)];
                let b = [1.0, 0.0];
                for &t in &ts {
                    rows.push(RowOut {
                        kind: "chord",
                        lambda: None,
                        t,
                        point: vec![
                            (1.0 - t) * a[0] + t * b[0],
                            (1.0 - t) * a[1] + t * b[1],
                        ],
                    });
                }
            }
        }
        // Spatial slice (P_0, P_1, P_2): the coherent curve plus the two
        // ruled boundary sheets — segments from the vacuum vertex and
        // from the origin to each curve point.
        [0, 1, 2] => {
            for &lam in &lambdas {
                let c = coherent_curve(&slice, lam).map_err(|e| e.to_string())?;
                rows.push(RowOut {
                    kind: "curve",
                    lambda: Some(lam),
                    t: 1.0,
                    point: c.clone(),
                });
                for &t in &ts {
                    rows.push(RowOut {
                        kind: "vacuum-segment",
                        lambda: Some(lam),
                        t,
                        point: vec![
                            (1.0 - t) + t * c[0],
                            t * c[1],
                            t * c[2],
                        ],
                    });
                    rows.push(RowOut {
                        kind: "origin-segment",
                        lambda: Some(lam),
                        t,
                        point: vec![t * c[0], t * c[1], t * c[2]],
                    });
                }
            }
        }
        _ => {
            return Err(format!(
                "unsupported slice {indices:?}: use 0,K for a planar slice or 0,1,2"
            ));
        }
    }

    match global.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut csv = String::from("kind,lambda,t");
            for &i in &indices {
                csv.push_str(&format!(",p{i}"));
            }
            csv.push('\n');
            for row in &rows {
                csv.push_str(row.kind);
                csv.push(',');
                if let Some(lam) = row.lambda {
                    csv.push_str(&fmt_sig(lam));
                }
                csv.push(',');
                csv.push_str(&fmt_sig(row.t));
                for &x in &row.point {
                    csv.push(',');
                    csv.push_str(&fmt_sig(x));
                }
                csv.push('\n');
            }
            write_primary(&global.out, &csv)?;
        }
        Format::Json => {
            let doc = BoundaryDoc {
                slice: &indices,
                rows: &rows,
            };
            let mut text =
                serde_json::to_string(&doc).expect("boundary serialization cannot fail");
            text.push('\n');
            write_primary(&global.out, &text)?;
        }
    }
    Ok(0)
}
