//! Dataset representation, validation, and CSV ingestion.

use crate::error::Error;
use crate::estimators::Estimator;
use crate::solver::DEFAULT_SOLVER_TOL;
use indexmap::IndexMap;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

/// Name of the intercept column added by `add_intercept`.
pub const INTERCEPT_COL: &str = "intercept";

/// Immutable regression dataset: outcome, dense design matrix, named binary
/// group memberships, and opaque row ids. Column order is recorded so
/// coefficient reports are stable.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub y: DVector<f64>,
    pub x: DMatrix<f64>,
    pub feature_names: Vec<String>,
    pub groups: IndexMap<String, Vec<bool>>,
    pub ids: Vec<String>,
}

impl Dataset {
    /// Build a dataset and validate its invariants: consistent lengths,
    /// N >= 1, all values finite.
    pub fn new(
        y: Vec<f64>,
        x_rows: Vec<Vec<f64>>,
        feature_names: Vec<String>,
        groups: IndexMap<String, Vec<bool>>,
        ids: Vec<String>,
    ) -> Result<Self, Error> {
        let n = y.len();
        if n == 0 {
            return Err(Error::EmptyDataset("no observations".into()));
        }
        let p = feature_names.len();
        if x_rows.len() != n {
            return Err(Error::Schema(format!(
                "design matrix has {} rows but outcome has {n}",
                x_rows.len()
            )));
        }
        if ids.len() != n {
            return Err(Error::Schema(format!(
                "{} ids for {n} observations",
                ids.len()
            )));
        }
        for (label, mask) in &groups {
            if mask.len() != n {
                return Err(Error::Schema(format!(
                    "group `{label}` mask has length {} but N = {n}",
                    mask.len()
                )));
            }
        }
        let mut flat = Vec::with_capacity(n * p);
        for (i, row) in x_rows.iter().enumerate() {
            if row.len() != p {
                return Err(Error::Schema(format!(
                    "row {i} has {} features, expected {p}",
                    row.len()
                )));
            }
            for &v in row {
                if !v.is_finite() {
                    return Err(Error::NonFinite(format!("feature value in row {i}")));
                }
            }
            flat.extend_from_slice(row);
        }
        for (i, &v) in y.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("outcome value in row {i}")));
            }
        }
        Ok(Self {
            y: DVector::from_vec(y),
            x: DMatrix::from_row_slice(n, p, &flat),
            feature_names,
            groups,
            ids,
        })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    /// Validated view of one group.
    pub fn group_view(&self, label: &str) -> Result<GroupView, Error> {
        let mask = self
            .groups
            .get(label)
            .ok_or_else(|| Error::UnknownGroup(label.to_string()))?;
        let n_g = mask.iter().filter(|&&m| m).count();
        let n_c = self.n() - n_g;
        if n_g == 0 || n_c == 0 {
            return Err(Error::DegenerateGroup {
                label: label.to_string(),
                members: n_g,
                complement: n_c,
            });
        }
        Ok(GroupView {
            label: label.to_string(),
            mask: mask.clone(),
            n_g,
            n_c,
            p_hat: n_g as f64 / self.n() as f64,
        })
    }

    /// Row subset in the given order (used by the CV harness).
    pub fn select(&self, rows: &[usize]) -> Dataset {
        let p = self.p();
        let mut x = DMatrix::zeros(rows.len(), p);
        let mut y = DVector::zeros(rows.len());
        for (out, &r) in rows.iter().enumerate() {
            y[out] = self.y[r];
            for j in 0..p {
                x[(out, j)] = self.x[(r, j)];
            }
        }
        let groups = self
            .groups
            .iter()
            .map(|(label, mask)| (label.clone(), rows.iter().map(|&r| mask[r]).collect()))
            .collect();
        Dataset {
            y,
            x,
            feature_names: self.feature_names.clone(),
            groups,
            ids: rows.iter().map(|&r| self.ids[r].clone()).collect(),
        }
    }

    /// Drop binary feature columns with fewer than `min_count` nonzero
    /// entries. Off by default everywhere; opt-in preprocessing for sparse
    /// indicator sets.
    pub fn filter_min_count(&self, min_count: usize) -> Dataset {
        let keep: Vec<usize> = (0..self.p())
            .filter(|&j| {
                let col = self.x.column(j);
                let is_binary = col.iter().all(|&v| v == 0.0 || v == 1.0);
                if !is_binary {
                    return true;
                }
                col.iter().filter(|&&v| v != 0.0).count() >= min_count
            })
            .collect();
        let mut x = DMatrix::zeros(self.n(), keep.len());
        for (out, &j) in keep.iter().enumerate() {
            x.set_column(out, &self.x.column(j));
        }
        Dataset {
            y: self.y.clone(),
            x,
            feature_names: keep.iter().map(|&j| self.feature_names[j].clone()).collect(),
            groups: self.groups.clone(),
            ids: self.ids.clone(),
        }
    }

    /// Predictions `X theta`.
    pub fn predict(&self, theta: &DVector<f64>) -> DVector<f64> {
        &self.x * theta
    }

    /// Write the dataset in the same CSV dialect `load_csv` reads:
    /// header row, `.` decimal separator, groups as 0/1. Floats are written
    /// in shortest round-trip form so `load_csv . write_csv` is the
    /// identity on values.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), Error> {
        let mut wtr = csv::Writer::from_writer(w);
        let mut header = vec!["id".to_string(), "y".to_string()];
        header.extend(self.feature_names.iter().cloned());
        header.extend(self.groups.keys().cloned());
        wtr.write_record(&header)?;
        for i in 0..self.n() {
            let mut rec = vec![self.ids[i].clone(), format!("{}", self.y[i])];
            for j in 0..self.p() {
                rec.push(format!("{}", self.x[(i, j)]));
            }
            for mask in self.groups.values() {
                rec.push(if mask[i] { "1".into() } else { "0".into() });
            }
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn write_csv_path(&self, path: &Path) -> Result<(), Error> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

/// One group's membership summary.
#[derive(Clone, Debug)]
pub struct GroupView {
    pub label: String,
    pub mask: Vec<bool>,
    pub n_g: usize,
    pub n_c: usize,
    /// Empirical membership rate n_g / N.
    pub p_hat: f64,
}

/// What to fit: estimator (with its hyperparameters), protected group, and
/// solver tolerance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitSpec {
    pub estimator: Estimator,
    pub group_label: String,
    #[serde(default = "default_tol")]
    pub solver_tol: f64,
}

fn default_tol() -> f64 {
    DEFAULT_SOLVER_TOL
}

impl FitSpec {
    pub fn new(estimator: Estimator, group_label: impl Into<String>) -> Self {
        Self {
            estimator,
            group_label: group_label.into(),
            solver_tol: DEFAULT_SOLVER_TOL,
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !(self.solver_tol > 0.0) {
            return Err(Error::InvalidHyperparameter(format!(
                "solver_tol {} must be positive",
                self.solver_tol
            )));
        }
        self.estimator.validate()
    }
}

/// Fitted coefficients plus solver diagnostics.
#[derive(Clone, Debug)]
pub struct FitResult {
    pub theta: DVector<f64>,
    pub spec: FitSpec,
    pub constraint_active: bool,
    pub kkt_residual: f64,
    pub objective_value: f64,
    /// Multiplier of the active constraint row (0 when slack/absent).
    pub multiplier: f64,
    pub rank_deficient: bool,
    /// Human-readable notes, e.g. a vacuous covariance constraint.
    pub notes: Vec<String>,
}

/// Column selection for `load_csv`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CsvSchema {
    pub outcome_col: String,
    pub feature_cols: Vec<String>,
    pub group_cols: Vec<String>,
    #[serde(default)]
    pub id_col: Option<String>,
    #[serde(default)]
    pub add_intercept: bool,
}

/// Load a dataset from CSV. Group columns must contain only 0/1; any
/// non-numeric or non-finite cell is a parse error naming the row. Row ids
/// come from `id_col` when given, otherwise the 0-based row index.
pub fn load_csv<R: std::io::Read>(reader: R, schema: &CsvSchema) -> Result<Dataset, Error> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let col_idx = |name: &str| -> Result<usize, Error> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Schema(format!("column `{name}` not found in header")))
    };
    let y_idx = col_idx(&schema.outcome_col)?;
    let feat_idx: Vec<usize> = schema
        .feature_cols
        .iter()
        .map(|c| col_idx(c))
        .collect::<Result<_, _>>()?;
    let group_idx: Vec<usize> = schema
        .group_cols
        .iter()
        .map(|c| col_idx(c))
        .collect::<Result<_, _>>()?;
    let id_idx = schema.id_col.as_deref().map(col_idx).transpose()?;

    let parse_cell = |raw: &str, row: usize, col: &str| -> Result<f64, Error> {
        let v: f64 = raw.trim().parse().map_err(|_| Error::Parse {
            row,
            message: format!("column `{col}`: `{raw}` is not numeric"),
        })?;
        if !v.is_finite() {
            return Err(Error::Parse {
                row,
                message: format!("column `{col}`: non-finite value `{raw}`"),
            });
        }
        Ok(v)
    };

    let mut y = Vec::new();
    let mut rows = Vec::new();
    let mut group_masks: Vec<Vec<bool>> = vec![Vec::new(); group_idx.len()];
    let mut ids = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        y.push(parse_cell(&record[y_idx], row, &schema.outcome_col)?);
        let mut xr = Vec::with_capacity(feat_idx.len() + 1);
        if schema.add_intercept {
            xr.push(1.0);
        }
        for (k, &j) in feat_idx.iter().enumerate() {
            xr.push(parse_cell(&record[j], row, &schema.feature_cols[k])?);
        }
        rows.push(xr);
        for (k, &j) in group_idx.iter().enumerate() {
            let v = parse_cell(&record[j], row, &schema.group_cols[k])?;
            if v != 0.0 && v != 1.0 {
                return Err(Error::Parse {
                    row,
                    message: format!(
                        "group column `{}` must be 0/1, found `{v}`",
                        schema.group_cols[k]
                    ),
                });
            }
            group_masks[k].push(v == 1.0);
        }
        ids.push(match id_idx {
            Some(j) => record[j].to_string(),
            None => row.to_string(),
        });
    }
    if y.is_empty() {
        return Err(Error::EmptyDataset("CSV contains no data rows".into()));
    }
    let mut feature_names = Vec::new();
    if schema.add_intercept {
        feature_names.push(INTERCEPT_COL.to_string());
    }
    feature_names.extend(schema.feature_cols.iter().cloned());
    let groups = schema
        .group_cols
        .iter()
        .cloned()
        .zip(group_masks)
        .collect();
    Dataset::new(y, rows, feature_names, groups, ids)
}

pub fn load_csv_path(path: &Path, schema: &CsvSchema) -> Result<Dataset, Error> {
    let file = std::fs::File::open(path)?;
    load_csv(std::io::BufReader::new(file), schema)
}
