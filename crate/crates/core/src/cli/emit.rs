use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use super::config::OutputFormat;
use super::sweep::SweepRow;
use super::CliError;

/// Twelve significant digits; `-0` prints as `0`.
pub fn format_value(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.11e}")
}

/// CSV text. `provenance` lines are prefixed with `# ` ahead of the header.
pub fn render_csv(rows: &[SweepRow], provenance: &[String]) -> String {
    let mut out = String::new();
    for line in provenance {
        let _ = writeln!(out, "# {line}");
    }
    out.push_str(&SweepRow::COLUMNS.join(","));
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.values().iter().map(|&v| format_value(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn render_json(rows: &[SweepRow]) -> String {
    let mut text = serde_json::to_string_pretty(rows).expect("rows serialize");
    text.push('\n');
    text
}

pub fn render(rows: &[SweepRow], format: OutputFormat, provenance: &[String]) -> String {
    match format {
        OutputFormat::Csv => render_csv(rows, provenance),
        OutputFormat::Json => render_json(rows),
    }
}

/// Writes the artifact to `path`, or stdout when `path` is `None` or `-`.
pub fn emit(
    rows: &[SweepRow],
    format: OutputFormat,
    path: Option<&Path>,
    provenance: &[String],
) -> Result<(), CliError> {
    if rows.is_empty() {
        return Err(CliError::EmptyArtifact);
    }
    let text = render(rows, format, provenance);
    match path {
        Some(p) if p != Path::new("-") => std::fs::write(p, text).map_err(|e| CliError::Io {
            path: p.to_path_buf(),
            source: e,
        }),
        _ => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Io {
                    path: "<stdout>".into(),
                    source: e,
                })
        }
    }
}
