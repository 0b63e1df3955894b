//! Group fairness measures over (predictions, outcomes, group mask).
//!
//! Sign convention: all reported measures use the prediction-minus-outcome
//! residual, so undercompensation of the group shows up as a negative net
//! compensation. The residual covariance uses outcome-minus-prediction, so
//! systematic underprediction of the group gives a positive covariance.

use crate::error::Error;
use crate::rng::CounterRng;
use serde::{Deserialize, Serialize};

/// A metric value that may be undefined, with a machine-readable reason
/// instead of NaN.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MetricValue {
    Defined(f64),
    Undefined { undefined: String },
}

impl MetricValue {
    pub fn undefined(reason: impl Into<String>) -> Self {
        MetricValue::Undefined {
            undefined: reason.into(),
        }
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            MetricValue::Defined(v) => Some(*v),
            MetricValue::Undefined { .. } => None,
        }
    }

    /// CSV rendering: number or NA.
    pub fn to_csv_field(&self) -> String {
        match self {
            MetricValue::Defined(v) => format!("{v}"),
            MetricValue::Undefined { .. } => "NA".into(),
        }
    }
}

impl From<f64> for MetricValue {
    fn from(v: f64) -> Self {
        MetricValue::Defined(v)
    }
}

fn group_sums(yhat: &[f64], y: &[f64], mask: &[bool], member: bool) -> (f64, f64, usize) {
    let mut sum_yhat = 0.0;
    let mut sum_y = 0.0;
    let mut n = 0;
    for i in 0..y.len() {
        if mask[i] == member {
            sum_yhat += yhat[i];
            sum_y += y[i];
            n += 1;
        }
    }
    (sum_yhat, sum_y, n)
}

fn require_lengths(yhat: &[f64], y: &[f64], mask: &[bool]) -> Result<(), Error> {
    if yhat.len() != y.len() || mask.len() != y.len() {
        return Err(Error::Schema(format!(
            "length mismatch: yhat {}, y {}, mask {}",
            yhat.len(),
            y.len(),
            mask.len()
        )));
    }
    Ok(())
}

/// Group mean of (prediction - outcome). Negative means the group is
/// undercompensated.
pub fn net_compensation(yhat: &[f64], y: &[f64], mask: &[bool]) -> Result<f64, Error> {
    require_lengths(yhat, y, mask)?;
    let (sum_yhat, sum_y, n) = group_sums(yhat, y, mask, true);
    if n == 0 {
        return Err(Error::DegenerateGroup {
            label: "<mask>".into(),
            members: 0,
            complement: y.len(),
        });
    }
    Ok((sum_yhat - sum_y) / n as f64)
}

/// Group mean residual minus complement mean residual (prediction - outcome
/// orientation). Exactly `net_compensation(g) - net_compensation(g^c)`.
pub fn mean_residual_difference(yhat: &[f64], y: &[f64], mask: &[bool]) -> Result<f64, Error> {
    let complement: Vec<bool> = mask.iter().map(|&m| !m).collect();
    Ok(net_compensation(yhat, y, mask)? - net_compensation(yhat, y, &complement)?)
}

/// Sum of group predictions over sum of group outcomes; undefined when the
/// outcome sum is zero.
pub fn predictive_ratio(yhat: &[f64], y: &[f64], mask: &[bool]) -> Result<MetricValue, Error> {
    require_lengths(yhat, y, mask)?;
    let (sum_yhat, sum_y, n) = group_sums(yhat, y, mask, true);
    if n == 0 {
        return Err(Error::DegenerateGroup {
            label: "<mask>".into(),
            members: 0,
            complement: y.len(),
        });
    }
    if sum_y == 0.0 {
        return Ok(MetricValue::undefined("group outcome sum is zero"));
    }
    Ok(MetricValue::Defined(sum_yhat / sum_y))
}

/// Population covariance (divide by N) between the 0/1 group indicator and
/// the outcome-minus-prediction residual. Positive means the group is
/// systematically underpredicted.
pub fn fair_covariance(yhat: &[f64], y: &[f64], mask: &[bool]) -> Result<f64, Error> {
    require_lengths(yhat, y, mask)?;
    let n = y.len();
    if n < 2 {
        return Err(Error::Schema("fair covariance needs N >= 2".into()));
    }
    let nf = n as f64;
    let a_bar = mask.iter().filter(|&&m| m).count() as f64 / nf;
    let r_bar: f64 = (0..n).map(|i| y[i] - yhat[i]).sum::<f64>() / nf;
    let cov: f64 = (0..n)
        .map(|i| {
            let a = if mask[i] { 1.0 } else { 0.0 };
            (a - a_bar) * (y[i] - yhat[i] - r_bar)
        })
        .sum::<f64>()
        / nf;
    Ok(cov)
}

/// Fair covariance divided by a reference covariance `cstar` (typically the
/// OLS value), in [0, 1] when the fit lies between OLS and the fully
/// constrained solution. Undefined for `cstar = 0`.
pub fn fair_covariance_scaled(
    yhat: &[f64],
    y: &[f64],
    mask: &[bool],
    cstar: f64,
) -> Result<MetricValue, Error> {
    if cstar == 0.0 {
        return Ok(MetricValue::undefined("reference covariance is zero"));
    }
    Ok(MetricValue::Defined(fair_covariance(yhat, y, mask)? / cstar))
}

/// Classic coefficient of determination; may be negative for cross-validated
/// predictions. Undefined when the outcome is constant.
pub fn r_squared(yhat: &[f64], y: &[f64]) -> Result<MetricValue, Error> {
    if yhat.len() != y.len() {
        return Err(Error::Schema("length mismatch in r_squared".into()));
    }
    let n = y.len() as f64;
    let ybar: f64 = y.iter().sum::<f64>() / n;
    let ss_tot: f64 = y.iter().map(|&v| (v - ybar).powi(2)).sum();
    if ss_tot == 0.0 {
        return Ok(MetricValue::undefined("outcome is constant"));
    }
    let ss_res: f64 = y
        .iter()
        .zip(yhat)
        .map(|(&yi, &yh)| (yi - yh).powi(2))
        .sum();
    Ok(MetricValue::Defined(1.0 - ss_res / ss_tot))
}

/// Options for the pairwise group residual difference.
#[derive(Clone, Debug)]
pub struct GrdOptions {
    /// Refuse exhaustive evaluation beyond this many pairs.
    pub pair_cap: u128,
    /// Seeded uniform pair subsample used instead of refusing.
    pub sample: Option<GrdSample>,
}

#[derive(Clone, Copy, Debug)]
pub struct GrdSample {
    pub pairs: usize,
    pub seed: u64,
}

impl Default for GrdOptions {
    fn default() -> Self {
        Self {
            pair_cap: 100_000_000,
            sample: None,
        }
    }
}

/// Squared distance-weighted mean of pairwise residual gaps between group
/// and complement. Small-N only: cost is O(n_g * n_c) unless sampling is
/// requested.
pub fn group_residual_difference<D>(
    yhat: &[f64],
    y: &[f64],
    mask: &[bool],
    distance: D,
    opts: &GrdOptions,
) -> Result<f64, Error>
where
    D: Fn(f64, f64) -> f64,
{
    require_lengths(yhat, y, mask)?;
    let members: Vec<usize> = (0..y.len()).filter(|&i| mask[i]).collect();
    let others: Vec<usize> = (0..y.len()).filter(|&i| !mask[i]).collect();
    if members.is_empty() || others.is_empty() {
        return Err(Error::DegenerateGroup {
            label: "<mask>".into(),
            members: members.len(),
            complement: others.len(),
        });
    }
    let resid = |i: usize| y[i] - yhat[i];
    let mean = match opts.sample {
        None => {
            let pairs = members.len() as u128 * others.len() as u128;
            if pairs > opts.pair_cap {
                return Err(Error::PairCapExceeded {
                    pairs,
                    cap: opts.pair_cap,
                });
            }
            let mut acc = 0.0;
            for &i in &members {
                for &j in &others {
                    acc += distance(y[i], y[j]) * (resid(i) - resid(j));
                }
            }
            acc / pairs as f64
        }
        Some(sample) => {
            let mut rng = CounterRng::new(sample.seed, 0);
            let mut acc = 0.0;
            for _ in 0..sample.pairs {
                let i = members[rng.index(members.len())];
                let j = others[rng.index(others.len())];
                acc += distance(y[i], y[j]) * (resid(i) - resid(j));
            }
            acc / sample.pairs as f64
        }
    };
    Ok(mean * mean)
}

/// Default distance for the group residual difference.
pub fn abs_distance(yi: f64, yj: f64) -> f64 {
    (yi - yj).abs()
}

/// The full measure suite for one (predictions, outcomes, group) triple.
/// Column order of the serialized row is fixed:
/// R², PR_g, PR_c, NC_g, NC_c, MRD, FairCov (then the scaled covariance).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MetricsReport {
    pub r2: MetricValue,
    pub pred_ratio_g: MetricValue,
    pub pred_ratio_c: MetricValue,
    pub net_comp_g: f64,
    pub net_comp_c: f64,
    pub mean_resid_diff: f64,
    pub fair_cov: f64,
    pub fair_cov_scaled: MetricValue,
    pub n_g: usize,
    pub n_c: usize,
}

impl MetricsReport {
    /// Fixed column order matching the comparison-table layout.
    pub const CSV_HEADER: [&'static str; 8] = [
        "r2",
        "pred_ratio_g",
        "pred_ratio_c",
        "net_comp_g",
        "net_comp_c",
        "mean_resid_diff",
        "fair_cov",
        "fair_cov_scaled",
    ];

    pub fn csv_fields(&self) -> Vec<String> {
        vec![
            self.r2.to_csv_field(),
            self.pred_ratio_g.to_csv_field(),
            self.pred_ratio_c.to_csv_field(),
            format!("{}", self.net_comp_g),
            format!("{}", self.net_comp_c),
            format!("{}", self.mean_resid_diff),
            format!("{}", self.fair_cov),
            self.fair_cov_scaled.to_csv_field(),
        ]
    }
}

/// Assemble the full suite. `cstar` (reference covariance, usually from OLS)
/// enables the scaled covariance.
pub fn metrics_report(
    yhat: &[f64],
    y: &[f64],
    mask: &[bool],
    cstar: Option<f64>,
) -> Result<MetricsReport, Error> {
    require_lengths(yhat, y, mask)?;
    let complement: Vec<bool> = mask.iter().map(|&m| !m).collect();
    let net_comp_g = net_compensation(yhat, y, mask)?;
    let net_comp_c = net_compensation(yhat, y, &complement)?;
    let mean_resid_diff = net_comp_g - net_comp_c;
    debug_assert_eq!(
        mean_resid_diff,
        mean_residual_difference(yhat, y, mask)?,
        "report identity: MRD = NC_g - NC_c"
    );
    let fair_cov = fair_covariance(yhat, y, mask)?;
    let fair_cov_scaled = match cstar {
        Some(c) => fair_covariance_scaled(yhat, y, mask, c)?,
        None => MetricValue::undefined("no reference covariance supplied"),
    };
    Ok(MetricsReport {
        r2: r_squared(yhat, y)?,
        pred_ratio_g: predictive_ratio(yhat, y, mask)?,
        pred_ratio_c: predictive_ratio(yhat, y, &complement)?,
        net_comp_g,
        net_comp_c,
        mean_resid_diff,
        fair_cov,
        fair_cov_scaled,
        n_g: mask.iter().filter(|&&m| m).count(),
        n_c: mask.iter().filter(|&&m| !m).count(),
    })
}
