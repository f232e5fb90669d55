//! Output formatting shared by the subcommands.

use std::path::PathBuf;

/// 12 significant digits: stable for diffing, dense enough for plotting.
pub fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.11e}")
    }
}

/// Quote a CSV cell when it contains a delimiter, quote, or newline.
pub fn csv_cell(text: &str) -> String {
    if text.contains(',') || text.contains('"') || text.contains('\n') {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

/// Write the primary output to --out or stdout.
pub fn write_primary(out: &Option<PathBuf>, content: &str) -> Result<(), String> {
    match out {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}
