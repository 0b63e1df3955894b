//! Two-part synthetic health spending dataset.
//!
//! Pipeline per row: demographics (female, truncated-normal age) ->
//! 62 binary condition indicators (logit on female, age) -> 15 binary
//! protected-condition indicators (logit on age, female, and the six most
//! related condition indicators) -> group flag = any protected condition ->
//! any-spending stage `S ~ Bernoulli(logit^-1(Omega . X))` -> positive
//! spending `exp(Phi . X)` -> truncated-normal noise around the intermediate
//! outcome.
//!
//! The shipped coefficient table is calibrated to hit the documented summary
//! statistics (zero-spend share, group prevalence, right skew, group outcome
//! gap); it is not estimated from any real data. Edit `data/
//! analysis_coefficients.txt` or pass your own table to change the targets.

use crate::data::Dataset;
use crate::error::Error;
use crate::rng::CounterRng;
use indexmap::IndexMap;
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// Condition-category codes used as column names (a standard risk adjustment
/// indicator set).
pub const HCC_CODES: [u16; 62] = [
    1, 2, 6, 8, 9, 10, 11, 12, 17, 18, 19, 21, 22, 23, 27, 28, 29, 33, 34, 35, 39, 40, 46, 47,
    48, 54, 55, 57, 58, 72, 75, 77, 78, 79, 80, 84, 85, 86, 87, 88, 96, 99, 100, 103, 107, 108,
    111, 112, 114, 122, 134, 135, 136, 137, 161, 167, 169, 170, 173, 176, 186, 188,
];

pub const N_CCS: usize = 15;

/// The six condition indicators feeding the protected-condition logits
/// (behavioral-health related codes).
pub const TOP_HCCS: [u16; 6] = [54, 55, 57, 58, 79, 80];

const STREAM_FEMALE: u64 = 1;
const STREAM_AGE: u64 = 2;
const STREAM_HCC_BASE: u64 = 100;
const STREAM_CCS_BASE: u64 = 200;
const STREAM_SPEND_FLAG: u64 = 300;
const STREAM_NOISE: u64 = 301;

/// Coefficients for one binary condition indicator.
#[derive(Clone, Debug, PartialEq)]
pub struct LogitRow {
    pub intercept: f64,
    pub female: f64,
    pub age: f64,
}

/// Coefficients for one protected-condition indicator.
#[derive(Clone, Debug, PartialEq)]
pub struct CcsRow {
    pub intercept: f64,
    pub age: f64,
    pub female: f64,
    /// Effects of the `TOP_HCCS` indicators, in that order.
    pub hcc: [f64; 6],
}

/// A linear form over the full input vector {1, female, age, H, C}.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearForm {
    pub intercept: f64,
    pub female: f64,
    pub age: f64,
    pub hcc: Vec<f64>,
    pub ccs: Vec<f64>,
}

impl LinearForm {
    fn eval(&self, female: f64, age: f64, h: &[f64], c: &[f64]) -> f64 {
        let mut v = self.intercept + self.female * female + self.age * age;
        for (w, x) in self.hcc.iter().zip(h) {
            v += w * x;
        }
        for (w, x) in self.ccs.iter().zip(c) {
            v += w * x;
        }
        v
    }
}

/// Full coefficient set for the analysis generator.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalysisCoefficients {
    pub female_p: f64,
    pub age_mean: f64,
    pub age_sd: f64,
    pub age_lo: f64,
    pub age_hi: f64,
    pub hcc: Vec<LogitRow>,
    pub ccs: Vec<CcsRow>,
    /// Any-spending logit.
    pub omega: LinearForm,
    /// Log-linear spending level.
    pub phi: LinearForm,
    pub noise_sd: f64,
}

const TABLE_VERSION: &str = "fair-regression-coefficients v1";

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl AnalysisCoefficients {
    /// The shipped default table, embedded at compile time.
    pub fn shipped_default() -> Self {
        Self::from_table_str(include_str!("../../data/analysis_coefficients.txt"))
            .expect("embedded coefficient table parses")
    }

    /// Serialize as the documented plain-text `name value` table.
    pub fn to_table_string(&self) -> String {
        let mut s = String::new();
        writeln!(s, "# {TABLE_VERSION}").unwrap();
        writeln!(s, "# name value").unwrap();
        writeln!(s, "female_p {}", self.female_p).unwrap();
        writeln!(s, "age_mean {}", self.age_mean).unwrap();
        writeln!(s, "age_sd {}", self.age_sd).unwrap();
        writeln!(s, "age_lo {}", self.age_lo).unwrap();
        writeln!(s, "age_hi {}", self.age_hi).unwrap();
        writeln!(s, "noise_sd {}", self.noise_sd).unwrap();
        for (i, row) in self.hcc.iter().enumerate() {
            let code = HCC_CODES[i];
            writeln!(s, "hcc{code}.intercept {}", row.intercept).unwrap();
            writeln!(s, "hcc{code}.female {}", row.female).unwrap();
            writeln!(s, "hcc{code}.age {}", row.age).unwrap();
        }
        for (i, row) in self.ccs.iter().enumerate() {
            let c = i + 1;
            writeln!(s, "ccs{c}.intercept {}", row.intercept).unwrap();
            writeln!(s, "ccs{c}.age {}", row.age).unwrap();
            writeln!(s, "ccs{c}.female {}", row.female).unwrap();
            for (j, code) in TOP_HCCS.iter().enumerate() {
                writeln!(s, "ccs{c}.hcc{code} {}", row.hcc[j]).unwrap();
            }
        }
        for (prefix, form) in [("omega", &self.omega), ("phi", &self.phi)] {
            writeln!(s, "{prefix}.intercept {}", form.intercept).unwrap();
            writeln!(s, "{prefix}.female {}", form.female).unwrap();
            writeln!(s, "{prefix}.age {}", form.age).unwrap();
            for (i, w) in form.hcc.iter().enumerate() {
                writeln!(s, "{prefix}.hcc{} {}", HCC_CODES[i], w).unwrap();
            }
            for (i, w) in form.ccs.iter().enumerate() {
                writeln!(s, "{prefix}.ccs{} {}", i + 1, w).unwrap();
            }
        }
        s
    }

    /// Parse the plain-text table. Unknown keys are rejected.
    pub fn from_table_str(text: &str) -> Result<Self, Error> {
        let mut lines = text.lines();
        match lines.next() {
            Some(header) if header.trim_start_matches('#').trim() == TABLE_VERSION => {}
            other => {
                return Err(Error::Config(format!(
                    "coefficient table must start with `# {TABLE_VERSION}`, found {other:?}"
                )))
            }
        }
        let mut map: BTreeMap<String, f64> = BTreeMap::new();
        for (lineno, line) in lines.enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (name, value) = match (parts.next(), parts.next(), parts.next()) {
                (Some(n), Some(v), None) => (n, v),
                _ => {
                    return Err(Error::Config(format!(
                        "coefficient table line {}: expected `name value`, found `{line}`",
                        lineno + 2
                    )))
                }
            };
            let v: f64 = value.parse().map_err(|_| {
                Error::Config(format!("coefficient `{name}`: `{value}` is not numeric"))
            })?;
            if map.insert(name.to_string(), v).is_some() {
                return Err(Error::Config(format!("duplicate coefficient `{name}`")));
            }
        }
        let mut take = |key: &str| -> Result<f64, Error> {
            map.remove(key)
                .ok_or_else(|| Error::Config(format!("missing coefficient `{key}`")))
        };
        let female_p = take("female_p")?;
        let age_mean = take("age_mean")?;
        let age_sd = take("age_sd")?;
        let age_lo = take("age_lo")?;
        let age_hi = take("age_hi")?;
        let noise_sd = take("noise_sd")?;
        let mut hcc = Vec::with_capacity(HCC_CODES.len());
        for code in HCC_CODES {
            hcc.push(LogitRow {
                intercept: take(&format!("hcc{code}.intercept"))?,
                female: take(&format!("hcc{code}.female"))?,
                age: take(&format!("hcc{code}.age"))?,
            });
        }
        let mut ccs = Vec::with_capacity(N_CCS);
        for c in 1..=N_CCS {
            let mut top = [0.0; 6];
            for (j, code) in TOP_HCCS.iter().enumerate() {
                top[j] = take(&format!("ccs{c}.hcc{code}"))?;
            }
            ccs.push(CcsRow {
                intercept: take(&format!("ccs{c}.intercept"))?,
                age: take(&format!("ccs{c}.age"))?,
                female: take(&format!("ccs{c}.female"))?,
                hcc: top,
            });
        }
        let mut form = |prefix: &str| -> Result<LinearForm, Error> {
            let mut hcc_w = Vec::with_capacity(HCC_CODES.len());
            for code in HCC_CODES {
                hcc_w.push(take(&format!("{prefix}.hcc{code}"))?);
            }
            let mut ccs_w = Vec::with_capacity(N_CCS);
            for c in 1..=N_CCS {
                ccs_w.push(take(&format!("{prefix}.ccs{c}"))?);
            }
            Ok(LinearForm {
                intercept: take(&format!("{prefix}.intercept"))?,
                female: take(&format!("{prefix}.female"))?,
                age: take(&format!("{prefix}.age"))?,
                hcc: hcc_w,
                ccs: ccs_w,
            })
        };
        let omega = form("omega")?;
        let phi = form("phi")?;
        if let Some(extra) = map.keys().next() {
            return Err(Error::Config(format!("unknown coefficient `{extra}`")));
        }
        let out = AnalysisCoefficients {
            female_p,
            age_mean,
            age_sd,
            age_lo,
            age_hi,
            hcc,
            ccs,
            omega,
            phi,
            noise_sd,
        };
        out.validate()?;
        Ok(out)
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !(0.0 < self.female_p && self.female_p < 1.0) {
            return Err(Error::Config(format!(
                "female_p {} must lie strictly in (0, 1)",
                self.female_p
            )));
        }
        if !(self.noise_sd > 0.0) {
            return Err(Error::Config(format!(
                "noise_sd {} must be positive",
                self.noise_sd
            )));
        }
        if !(self.age_lo < self.age_hi) || !(self.age_sd > 0.0) {
            return Err(Error::Config("age distribution parameters invalid".into()));
        }
        if self.hcc.len() != HCC_CODES.len() || self.ccs.len() != N_CCS {
            return Err(Error::Config("coefficient table has wrong row counts".into()));
        }
        Ok(())
    }
}

fn checked_logistic(x: f64, what: &str) -> Result<f64, Error> {
    let p = logistic(x);
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Config(format!(
            "probability for `{what}` saturated at {p} (linear predictor {x}); adjust its coefficients"
        )));
    }
    Ok(p)
}

/// Summary statistics recorded alongside a generated dataset.
#[derive(Clone, Debug, serde::Serialize)]
pub struct AnalysisSummary {
    /// Share of rows with no spending before noise (S = 0).
    pub zero_spend_share: f64,
    /// Share of rows in the protected group.
    pub group_prevalence: f64,
    pub mean_y: f64,
    pub median_y: f64,
    pub group_mean_y: f64,
    pub complement_mean_y: f64,
    pub max_y: f64,
}

/// Generate the analysis dataset: `n` rows with features
/// {intercept, female, age, 62 condition indicators} and group `mhsud`.
/// The protected-condition indicators shape the outcome but are not
/// regressors.
pub fn generate_analysis_data(
    cfg: &AnalysisCoefficients,
    n: usize,
    seed: u64,
) -> Result<(Dataset, AnalysisSummary), Error> {
    cfg.validate()?;
    if n == 0 {
        return Err(Error::Config("row count must be >= 1".into()));
    }
    let mut female = Vec::with_capacity(n);
    let mut age = Vec::with_capacity(n);
    let mut hcc_cols: Vec<Vec<f64>> = vec![Vec::with_capacity(n); HCC_CODES.len()];
    let mut ccs_cols: Vec<Vec<f64>> = vec![Vec::with_capacity(n); N_CCS];
    let mut any_spend = Vec::with_capacity(n);
    let mut intermediate = Vec::with_capacity(n);
    let mut group = Vec::with_capacity(n);

    for row in 0..n {
        let r = row as u64;
        let f = CounterRng::at(seed, STREAM_FEMALE, r).bernoulli(cfg.female_p) as u8 as f64;
        let a = CounterRng::at(seed, STREAM_AGE, r).truncated_normal(
            cfg.age_mean,
            cfg.age_sd,
            cfg.age_lo,
            cfg.age_hi,
        )?;
        female.push(f);
        age.push(a);

        let mut h = Vec::with_capacity(HCC_CODES.len());
        for (i, coef) in cfg.hcc.iter().enumerate() {
            let p = checked_logistic(
                coef.intercept + coef.female * f + coef.age * a,
                &format!("hcc{}", HCC_CODES[i]),
            )?;
            let v = CounterRng::at(seed, STREAM_HCC_BASE + i as u64, r).bernoulli(p) as u8 as f64;
            h.push(v);
            hcc_cols[i].push(v);
        }

        let mut c = Vec::with_capacity(N_CCS);
        let mut any_ccs = false;
        for (i, coef) in cfg.ccs.iter().enumerate() {
            let mut lin = coef.intercept + coef.age * a + coef.female * f;
            for (j, code) in TOP_HCCS.iter().enumerate() {
                let idx = HCC_CODES.iter().position(|k| k == code).expect("top code listed");
                lin += coef.hcc[j] * h[idx];
            }
            let p = checked_logistic(lin, &format!("ccs{}", i + 1))?;
            let v = CounterRng::at(seed, STREAM_CCS_BASE + i as u64, r).bernoulli(p) as u8 as f64;
            any_ccs |= v == 1.0;
            c.push(v);
            ccs_cols[i].push(v);
        }
        group.push(any_ccs);

        let p_s = checked_logistic(cfg.omega.eval(f, a, &h, &c), "omega")?;
        let s = CounterRng::at(seed, STREAM_SPEND_FLAG, r).bernoulli(p_s);
        any_spend.push(s);
        let ydd = if s { cfg.phi.eval(f, a, &h, &c).exp() } else { 0.0 };
        if !ydd.is_finite() {
            return Err(Error::Config(
                "phi coefficients produce non-finite spending; reduce their magnitude".into(),
            ));
        }
        intermediate.push(ydd);
    }

    // the truncation cap is self-referential in the recipe; resolved as the
    // pre-noise maximum, computed in a separate pass
    let y_cap = intermediate.iter().cloned().fold(0.0_f64, f64::max);
    let mut y = Vec::with_capacity(n);
    for (row, &ydd) in intermediate.iter().enumerate() {
        let v = CounterRng::at(seed, STREAM_NOISE, row as u64).truncated_normal(
            ydd,
            cfg.noise_sd,
            0.0,
            y_cap,
        )?;
        y.push(v);
    }

    let mut names = vec!["intercept".to_string(), "female".to_string(), "age".to_string()];
    names.extend(HCC_CODES.iter().map(|c| format!("hcc{c}")));
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::with_capacity(names.len());
        row.push(1.0);
        row.push(female[i]);
        row.push(age[i]);
        for col in &hcc_cols {
            row.push(col[i]);
        }
        rows.push(row);
    }
    let mut groups = IndexMap::new();
    groups.insert("mhsud".to_string(), group.clone());

    let mean_y = y.iter().sum::<f64>() / n as f64;
    let mut sorted = y.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median_y = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    let n_g = group.iter().filter(|&&m| m).count();
    let group_mean_y = y
        .iter()
        .zip(&group)
        .filter(|(_, &m)| m)
        .map(|(v, _)| v)
        .sum::<f64>()
        / (n_g.max(1)) as f64;
    let complement_mean_y = y
        .iter()
        .zip(&group)
        .filter(|(_, &m)| !m)
        .map(|(v, _)| v)
        .sum::<f64>()
        / ((n - n_g).max(1)) as f64;
    let summary = AnalysisSummary {
        zero_spend_share: any_spend.iter().filter(|&&s| !s).count() as f64 / n as f64,
        group_prevalence: n_g as f64 / n as f64,
        mean_y,
        median_y,
        group_mean_y,
        complement_mean_y,
        max_y: sorted[n - 1],
    };
    let ds = Dataset::new(y, rows, names, groups, (0..n).map(|i| i.to_string()).collect())?;
    Ok((ds, summary))
}
