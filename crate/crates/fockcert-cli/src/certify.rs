//! `fockcert certify` — run the criteria battery on one distribution.

use crate::opts::{merge, merge_family, CertifyArgs, Config, Format, GlobalOpts};
use crate::output::{csv_cell, fmt_sig, write_primary};
use crate::family;
use fockcert::criteria::{certify, CertifyOptions};
use fockcert::FockDistribution;
use serde::Deserialize;

const CONFIG_KEYS: &[&str] = &[
    "probs",
    "input",
    "truncated",
    "family",
    "mu",
    "p",
    "k",
    "n",
    "ell",
    "xi",
    "n-max",
    "max-tuple-len",
    "majorization-n-max",
];

#[derive(Deserialize)]
struct DistFile {
    probs: Vec<f64>,
    #[serde(default)]
    truncated: bool,
}

fn dist_from_probs(text: &str, force_truncated: bool) -> Result<FockDistribution, String> {
    let probs: Vec<f64> = text
        .split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| format!("cannot parse probability {tok:?}"))
        })
        .collect::<Result<_, _>>()?;
    let sum: f64 = probs.iter().sum();
    // An inline vector that visibly misses mass is a truncated prefix.
    let truncated = force_truncated || sum < 1.0 - 1e-9;
    FockDistribution::new(probs, truncated).map_err(|e| e.to_string())
}

pub fn run(args: CertifyArgs, config: &Config, global: &GlobalOpts) -> Result<u8, String> {
    config.check_keys(CONFIG_KEYS)?;

    let probs = args.probs.clone().or_else(|| config.get_str("probs"));
    let input = args
        .input
        .clone()
        .or_else(|| config.get_str("input").map(std::path::PathBuf::from));
    let fam_args = merge_family(&args.family, config)?;
    let truncated = args.truncated || config.get_bool("truncated")?;

    let sources = [probs.is_some(), input.is_some(), fam_args.family.is_some()];
    if sources.iter().filter(|&&s| s).count() != 1 {
        return Err("choose exactly one input: --probs, --input, or --family".into());
    }

    let dist = if let Some(text) = probs {
        dist_from_probs(&text, truncated)?
    } else if let Some(path) = input {
        let text = std::fs::read_to_string(&path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        let file: DistFile = serde_json::from_str(&text)
            .map_err(|e| format!("{}: {e}", path.display()))?;
        FockDistribution::new(file.probs, file.truncated).map_err(|e| e.to_string())?
    } else {
        let fam = family::build(&fam_args)?;
        let n_max = merge(args.n_max, config, "n-max")?.unwrap_or(8);
        fam.distribution(n_max).map_err(|e| e.to_string())?
    };

    let options = CertifyOptions {
        max_tuple_len: merge(args.max_tuple_len, config, "max-tuple-len")?.unwrap_or(4),
        majorization_n_max: merge(args.majorization_n_max, config, "majorization-n-max")?,
        tol: global.tol,
    };
    let report = certify(&dist, &options).map_err(|e| e.to_string())?;

    let text = match global.format.unwrap_or(Format::Json) {
        Format::Json => format!("{}\n", report.to_json()),
        Format::Csv => {
            let mut out = String::from("id,margin,violated,diverged\n");
            for v in &report.verdicts {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    csv_cell(&v.id),
                    fmt_sig(v.margin),
                    v.violated,
                    v.diverged
                ));
            }
            out
        }
    };
    write_primary(&global.out, &text)?;
    Ok(u8::from(report.nonclassical))
}
