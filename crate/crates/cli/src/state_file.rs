//! JSON state files: `{"dims": [..], "matrix": [[[re, im], ..], ..], "label": ..}`.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{Complex, DMatrix};
use relent_core::operator::HERMITIAN_REJECT_TOL;
use relent_core::{Density, SystemLayout};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub dims: Vec<usize>,
    pub matrix: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl StateFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("state file: {e}")))
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    pub fn from_density(rho: &Density, label: Option<String>) -> Self {
        let m = rho.matrix();
        let matrix = (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect();
        Self { dims: rho.layout().dims().to_vec(), matrix, label }
    }

    /// Checks shape and Hermiticity entry by entry, so the first offending
    /// row/column can be named, then hands over to the core validation.
    pub fn to_density(&self) -> Result<Density, CliError> {
        let layout = SystemLayout::new(self.dims.clone()).map_err(|e| CliError::Usage(e.to_string()))?;
        let d = layout.total();
        if self.matrix.len() != d {
            return Err(CliError::Usage(format!("matrix has {} rows, dims need {d}", self.matrix.len())));
        }
        if let Some((i, row)) = self.matrix.iter().enumerate().find(|(_, r)| r.len() != d) {
            return Err(CliError::Usage(format!("row {i} has {} entries, expected {d}", row.len())));
        }
        let m = DMatrix::from_fn(d, d, |i, j| Complex::new(self.matrix[i][j][0], self.matrix[i][j][1]));
        if let Some((i, j)) = first_non_finite(&m) {
            return Err(CliError::Usage(format!("entry ({i}, {j}) is not finite")));
        }
        let scale = m.iter().fold(1.0f64, |a, z| a.max(z.norm()));
        for i in 0..d {
            for j in i..d {
                if (m[(i, j)] - m[(j, i)].conj()).norm() > HERMITIAN_REJECT_TOL * scale {
                    return Err(CliError::Usage(format!("not Hermitian at row {i}, column {j}")));
                }
            }
        }
        Density::from_matrix(m, layout).map_err(|e| CliError::Usage(format!("not a density operator: {e}")))
    }

    /// Canonical text: one matrix row per line, shortest round-trip floats.
    pub fn emit(&self) -> String {
        let mut out = String::from("{\n");
        let dims: Vec<String> = self.dims.iter().map(|d| d.to_string()).collect();
        let _ = writeln!(out, "  \"dims\": [{}],", dims.join(", "));
        out.push_str("  \"matrix\": [\n");
        for (i, row) in self.matrix.iter().enumerate() {
            let cells: Vec<String> = row.iter().map(|[re, im]| format!("[{}, {}]", number(*re), number(*im))).collect();
            let sep = if i + 1 < self.matrix.len() { "," } else { "" };
            let _ = writeln!(out, "    [{}]{sep}", cells.join(", "));
        }
        match &self.label {
            Some(label) => {
                out.push_str("  ],\n");
                let _ = writeln!(out, "  \"label\": {}", serde_json::to_string(label).expect("strings serialize"));
            }
            None => out.push_str("  ]\n"),
        }
        out.push_str("}\n");
        out
    }
}

fn first_non_finite(m: &DMatrix<Complex<f64>>) -> Option<(usize, usize)> {
    (0..m.nrows())
        .flat_map(|i| (0..m.ncols()).map(move |j| (i, j)))
        .find(|&(i, j)| !m[(i, j)].re.is_finite() || !m[(i, j)].im.is_finite())
}

fn number(x: f64) -> String {
    let s = format!("{x:?}");
    s.strip_suffix(".0").map(str::to_string).unwrap_or(s)
}

pub fn read_state(path: &Path) -> Result<Density, CliError> {
    StateFile::read(path)?.to_density()
}
