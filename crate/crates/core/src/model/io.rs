//! JSON plant and controller files.
//!
//! Matrices are row-major arrays of rows. Floats are written in shortest
//! round-trip form and parsed with correct rounding, so `load(save(x)) == x`
//! bit for bit.

use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{Controller, Plant};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantFile {
    pub n: usize,
    pub epsilon: f64,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    pub b_diag: Vec<f64>,
    pub d_diag: Vec<f64>,
    pub x0: Vec<f64>,
    pub w0: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerFile {
    pub n_state: usize,
    #[serde(rename = "A_K")]
    pub a_k: Vec<Vec<f64>>,
    #[serde(rename = "B_K")]
    pub b_k: Vec<Vec<f64>>,
    #[serde(rename = "C_K")]
    pub c_k: Vec<Vec<f64>>,
    #[serde(rename = "D_K")]
    pub d_k: Vec<Vec<f64>>,
}

pub(crate) fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub(crate) fn rows_to_matrix(field: &str, rows: &[Vec<f64>], nrows: usize, ncols: usize) -> Result<DMatrix<f64>> {
    if rows.len() != nrows {
        return Err(Error::Dimension {
            field: field.into(),
            expected: nrows,
            found: rows.len(),
        });
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != ncols {
            return Err(Error::Dimension {
                field: format!("{field}[{i}]"),
                expected: ncols,
                found: row.len(),
            });
        }
        if let Some(j) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                field: format!("{field}[{i}][{j}]"),
            });
        }
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

fn vector(field: &str, v: &[f64], n: usize) -> Result<DVector<f64>> {
    if v.len() != n {
        return Err(Error::Dimension {
            field: field.into(),
            expected: n,
            found: v.len(),
        });
    }
    if let Some(i) = v.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite {
            field: format!("{field}[{i}]"),
        });
    }
    Ok(DVector::from_column_slice(v))
}

impl TryFrom<PlantFile> for Plant {
    type Error = Error;

    fn try_from(f: PlantFile) -> Result<Plant> {
        let n = f.n;
        Plant::new(
            rows_to_matrix("A", &f.a, n, n)?,
            vector("b_diag", &f.b_diag, n)?,
            vector("d_diag", &f.d_diag, n)?,
            vector("x0", &f.x0, n)?,
            vector("w0", &f.w0, n)?,
            f.epsilon,
        )
    }
}

impl From<&Plant> for PlantFile {
    fn from(p: &Plant) -> Self {
        PlantFile {
            n: p.n(),
            epsilon: p.epsilon,
            a: matrix_to_rows(&p.a),
            b_diag: p.b_diag.iter().copied().collect(),
            d_diag: p.d_diag.iter().copied().collect(),
            x0: p.x0.iter().copied().collect(),
            w0: p.w0.iter().copied().collect(),
        }
    }
}

impl TryFrom<ControllerFile> for Controller {
    type Error = Error;

    fn try_from(f: ControllerFile) -> Result<Controller> {
        let m = f.n_state;
        let n = f.d_k.len();
        Controller::new(
            rows_to_matrix("A_K", &f.a_k, m, m)?,
            rows_to_matrix("B_K", &f.b_k, m, n)?,
            rows_to_matrix("C_K", &f.c_k, n, m)?,
            rows_to_matrix("D_K", &f.d_k, n, n)?,
        )
    }
}

impl From<&Controller> for ControllerFile {
    fn from(k: &Controller) -> Self {
        ControllerFile {
            n_state: k.n_state(),
            a_k: matrix_to_rows(&k.a_k),
            b_k: matrix_to_rows(&k.b_k),
            c_k: matrix_to_rows(&k.c_k),
            d_k: matrix_to_rows(&k.d_k),
        }
    }
}

fn schema_error(e: serde_json::Error) -> Error {
    // serde reports structural problems (missing/unknown fields, wrong types)
    // as data errors; keep syntax errors as plain parse failures.
    if e.is_data() {
        let msg = e.to_string();
        let field = msg
            .split('`')
            .nth(1)
            .map(str::to_owned)
            .unwrap_or_else(|| "<root>".into());
        Error::Schema { field, reason: msg }
    } else {
        Error::Parse(e)
    }
}

pub fn plant_from_json(text: &str) -> Result<Plant> {
    let file: PlantFile = serde_json::from_str(text).map_err(schema_error)?;
    Plant::try_from(file)
}

pub fn plant_to_json(p: &Plant) -> String {
    serde_json::to_string_pretty(&PlantFile::from(p)).expect("plain data serializes")
}

pub fn controller_from_json(text: &str) -> Result<Controller> {
    let file: ControllerFile = serde_json::from_str(text).map_err(schema_error)?;
    Controller::try_from(file)
}

pub fn controller_to_json(k: &Controller) -> String {
    serde_json::to_string_pretty(&ControllerFile::from(k)).expect("plain data serializes")
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, format!("{text}\n")).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}

pub fn load_plant(path: impl AsRef<Path>) -> Result<Plant> {
    plant_from_json(&read(path.as_ref())?)
}

pub fn save_plant(p: &Plant, path: impl AsRef<Path>) -> Result<()> {
    write(path.as_ref(), &plant_to_json(p))
}

pub fn load_controller(path: impl AsRef<Path>) -> Result<Controller> {
    controller_from_json(&read(path.as_ref())?)
}

pub fn save_controller(k: &Controller, path: impl AsRef<Path>) -> Result<()> {
    write(path.as_ref(), &controller_to_json(k))
}
