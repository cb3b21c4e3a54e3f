//! CSV tables and the JSON verdict block for `seq run`.

use std::path::Path;

use relent_core::sequence::{ConvergenceReport, IndexRow, Prediction};
use serde_json::{json, Value};

use crate::{fmt_extended, fmt_value, CliError};

pub const CSV_HEADER: [&str; 8] =
    ["n", "trace_dist", "lower", "upper", "gap", "mutual_information", "iterations", "converged"];

fn csv_error(e: csv::Error) -> CliError {
    CliError::Numerical(format!("writing CSV: {e}"))
}

/// Index rows in order, with the limit last as `n = 0`.
pub fn write_table(rows: &[IndexRow], limit: &IndexRow, path: &Path) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    w.write_record(CSV_HEADER).map_err(csv_error)?;
    for r in rows.iter().chain(std::iter::once(limit)) {
        let mi = r.mutual_information.map(fmt_value).unwrap_or_default();
        w.write_record([
            r.n.to_string(),
            fmt_value(r.trace_distance),
            fmt_extended(r.lower),
            fmt_extended(r.upper),
            fmt_value(r.gap()),
            mi,
            r.iterations.to_string(),
            r.converged.to_string(),
        ])
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `model-<k>.csv` per model and `verdict.json` into `dir`, and
/// returns the verdict block.
pub fn write_report(report: &ConvergenceReport, dir: &Path) -> Result<String, CliError> {
    std::fs::create_dir_all(dir)?;
    let mut models = Vec::new();
    for (k, m) in report.models.iter().enumerate() {
        let file = format!("model-{k}.csv");
        write_table(&m.rows, &m.limit, &dir.join(&file))?;
        let clauses: Vec<String> = match &m.predicted {
            Prediction::Converges(c) => c.iter().map(ToString::to_string).collect(),
            Prediction::NoPrediction => Vec::new(),
        };
        models.push(json!({
            "model": m.descriptor,
            "table": file,
            "predicted": m.predicted.to_string(),
            "clauses": clauses,
            "observed": m.observed.to_string(),
            "agreement": m.agreement.to_string(),
            "separation": fmt_value(m.separation),
            "lower_semicontinuity": m.lower_semicontinuity,
            "limit": [fmt_extended(m.limit.lower), fmt_extended(m.limit.upper)],
        }));
    }
    let implications: Vec<Value> = report
        .implications
        .iter()
        .map(|i| json!({"model": i.coarse, "separable": i.separable.to_string(), "observed": i.coarse_observed.to_string(), "holds": i.holds}))
        .collect();
    let verdict = json!({
        "family": report.family,
        "burn_in": report.burn_in,
        "tau": fmt_value(report.tau),
        "tail": report.tail,
        "models": models,
        "implications": implications,
        "nesting_violations": report.nesting_violations,
    });
    let text = serde_json::to_string_pretty(&verdict).expect("json values serialize");
    std::fs::write(dir.join("verdict.json"), format!("{text}\n"))?;
    Ok(text)
}
