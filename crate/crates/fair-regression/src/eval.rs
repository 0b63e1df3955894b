//! k-fold cross-validation harness and grid experiment runner.
//!
//! Metrics are computed on pooled out-of-fold predictions by default (the
//! per-fold-averaged variant is available behind a flag), and all specs in a
//! grid share the same fold assignment so comparisons are paired.

use crate::data::{Dataset, FitResult, FitSpec};
use crate::error::Error;
use crate::estimators::{fit, Estimator};
use crate::metrics::{self, MetricsReport};
use crate::rng::CounterRng;
use crate::synth::population::{scenario_design, ScenarioSpec, SimPopulation};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// RNG stream id for fold assignment.
const FOLD_STREAM: u64 = 0xF01D;
/// RNG stream id for simulation draws.
const DRAW_STREAM: u64 = 0xD4A3;

/// Deterministic fold assignment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvPlan {
    pub k: usize,
    pub seed: u64,
    /// Fold label per observation, values in [0, k).
    pub assignment: Vec<usize>,
}

/// Uniform random partition into k folds whose sizes differ by at most 1;
/// a deterministic function of (seed, n, k). No stratification.
pub fn make_folds(n: usize, k: usize, seed: u64) -> Result<CvPlan, Error> {
    if k < 2 || k > n {
        return Err(Error::Config(format!(
            "fold count k = {k} must satisfy 2 <= k <= n = {n}"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    CounterRng::new(seed, FOLD_STREAM).shuffle(&mut order);
    let mut assignment = vec![0usize; n];
    for (pos, &idx) in order.iter().enumerate() {
        assignment[idx] = pos % k;
    }
    Ok(CvPlan { k, seed, assignment })
}

/// Stratified variant: folds balanced within group and complement
/// separately, for robustness experiments.
pub fn make_folds_stratified(
    mask: &[bool],
    k: usize,
    seed: u64,
) -> Result<CvPlan, Error> {
    let n = mask.len();
    if k < 2 || k > n {
        return Err(Error::Config(format!(
            "fold count k = {k} must satisfy 2 <= k <= n = {n}"
        )));
    }
    let mut assignment = vec![0usize; n];
    let mut rng = CounterRng::new(seed, FOLD_STREAM);
    for member in [true, false] {
        let mut idx: Vec<usize> = (0..n).filter(|&i| mask[i] == member).collect();
        rng.shuffle(&mut idx);
        for (pos, &i) in idx.iter().enumerate() {
            assignment[i] = pos % k;
        }
    }
    Ok(CvPlan { k, seed, assignment })
}

/// Cross-validation output for one spec.
#[derive(Clone, Debug)]
pub struct CvOutcome {
    /// Out-of-fold predictions assembled in original row order; every
    /// observation covered exactly once.
    pub pooled_yhat: Vec<f64>,
    pub per_fold_theta: Vec<nalgebra::DVector<f64>>,
}

/// Fit on each fold's complement and predict the held-out rows. Two-stage
/// estimators compute their OLS reference inside each training fold.
pub fn cross_validate(ds: &Dataset, spec: &FitSpec, cv: &CvPlan) -> Result<CvOutcome, Error> {
    if cv.assignment.len() != ds.n() {
        return Err(Error::Config(format!(
            "CV plan covers {} rows but dataset has {}",
            cv.assignment.len(),
            ds.n()
        )));
    }
    let mut pooled = vec![f64::NAN; ds.n()];
    let mut thetas = Vec::with_capacity(cv.k);
    for fold in 0..cv.k {
        let train: Vec<usize> = (0..ds.n()).filter(|&i| cv.assignment[i] != fold).collect();
        let test: Vec<usize> = (0..ds.n()).filter(|&i| cv.assignment[i] == fold).collect();
        let train_ds = ds.select(&train);
        let result = fit(&train_ds, spec).map_err(|e| Error::Fold {
            fold,
            source: Box::new(e),
        })?;
        for &i in &test {
            pooled[i] = ds.x.row(i).transpose().dot(&result.theta);
        }
        thetas.push(result.theta);
    }
    debug_assert!(pooled.iter().all(|v| v.is_finite()));
    Ok(CvOutcome {
        pooled_yhat: pooled,
        per_fold_theta: thetas,
    })
}

/// How cross-validated metrics are aggregated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricAggregation {
    /// One report over the pooled out-of-fold prediction vector (default).
    Pooled,
    /// Mean of per-fold reports over held-out rows.
    FoldAveraged,
}

impl Default for MetricAggregation {
    fn default() -> Self {
        MetricAggregation::Pooled
    }
}

/// A grid of specs evaluated under one shared CV plan.
#[derive(Clone, Debug)]
pub struct ExperimentGrid {
    pub specs: Vec<FitSpec>,
    pub cv: CvPlan,
    pub aggregation: MetricAggregation,
}

/// One grid cell's evaluation.
#[derive(Clone, Debug)]
pub struct ExperimentRow {
    pub spec: FitSpec,
    /// Cross-validated measures.
    pub cv_metrics: MetricsReport,
    /// Measures for the full-data fit evaluated in sample.
    pub in_sample_metrics: MetricsReport,
    /// Fit on the full dataset.
    pub full_fit: FitResult,
    /// Pooled out-of-fold predictions in original row order.
    pub pooled_yhat: Vec<f64>,
}

/// Grid result: evaluated rows (sorted on net compensation, descending) and
/// per-spec failures.
#[derive(Debug)]
pub struct ExperimentResult {
    pub rows: Vec<ExperimentRow>,
    pub failures: Vec<(FitSpec, Error)>,
}

fn fold_averaged_report(
    ds: &Dataset,
    mask: &[bool],
    cv: &CvPlan,
    pooled: &[f64],
    cstar: Option<f64>,
) -> Result<MetricsReport, Error> {
    let mut reports = Vec::with_capacity(cv.k);
    for fold in 0..cv.k {
        let rows: Vec<usize> = (0..ds.n()).filter(|&i| cv.assignment[i] == fold).collect();
        let yhat: Vec<f64> = rows.iter().map(|&i| pooled[i]).collect();
        let y: Vec<f64> = rows.iter().map(|&i| ds.y[i]).collect();
        let m: Vec<bool> = rows.iter().map(|&i| mask[i]).collect();
        reports.push(metrics::metrics_report(&yhat, &y, &m, cstar)?);
    }
    let k = reports.len() as f64;
    let mean_opt = |f: &dyn Fn(&MetricsReport) -> Option<f64>| -> metrics::MetricValue {
        let vals: Vec<f64> = reports.iter().filter_map(|r| f(r)).collect();
        if vals.len() == reports.len() {
            metrics::MetricValue::Defined(vals.iter().sum::<f64>() / k)
        } else {
            metrics::MetricValue::undefined("undefined in at least one fold")
        }
    };
    Ok(MetricsReport {
        r2: mean_opt(&|r| r.r2.value()),
        pred_ratio_g: mean_opt(&|r| r.pred_ratio_g.value()),
        pred_ratio_c: mean_opt(&|r| r.pred_ratio_c.value()),
        net_comp_g: reports.iter().map(|r| r.net_comp_g).sum::<f64>() / k,
        net_comp_c: reports.iter().map(|r| r.net_comp_c).sum::<f64>() / k,
        mean_resid_diff: reports.iter().map(|r| r.mean_resid_diff).sum::<f64>() / k,
        fair_cov: reports.iter().map(|r| r.fair_cov).sum::<f64>() / k,
        fair_cov_scaled: mean_opt(&|r| r.fair_cov_scaled.value()),
        n_g: reports.iter().map(|r| r.n_g).sum(),
        n_c: reports.iter().map(|r| r.n_c).sum(),
    })
}

fn evaluate_spec(
    ds: &Dataset,
    spec: &FitSpec,
    cv: &CvPlan,
    aggregation: MetricAggregation,
) -> Result<ExperimentRow, Error> {
    let mask = ds
        .groups
        .get(&spec.group_label)
        .ok_or_else(|| Error::UnknownGroup(spec.group_label.clone()))?
        .clone();
    let outcome = cross_validate(ds, spec, cv)?;
    let full_fit = fit(ds, spec)?;
    let in_sample_yhat = ds.predict(&full_fit.theta);

    // reference covariance for the scaled measure: OLS residual covariance
    let ols = fit(ds, &FitSpec::new(Estimator::Ols, spec.group_label.clone()))?;
    let ols_yhat = ds.predict(&ols.theta);
    let cstar = metrics::fair_covariance(ols_yhat.as_slice(), ds.y.as_slice(), &mask)?;

    let cv_metrics = match aggregation {
        MetricAggregation::Pooled => metrics::metrics_report(
            &outcome.pooled_yhat,
            ds.y.as_slice(),
            &mask,
            Some(cstar),
        )?,
        MetricAggregation::FoldAveraged => {
            fold_averaged_report(ds, &mask, cv, &outcome.pooled_yhat, Some(cstar))?
        }
    };
    let in_sample_metrics = metrics::metrics_report(
        in_sample_yhat.as_slice(),
        ds.y.as_slice(),
        &mask,
        Some(cstar),
    )?;
    Ok(ExperimentRow {
        spec: spec.clone(),
        cv_metrics,
        in_sample_metrics,
        full_fit,
        pooled_yhat: outcome.pooled_yhat,
    })
}

/// Evaluate every spec under the shared fold plan. Per-spec failures are
/// collected, not fatal. Rows come back sorted on cross-validated group net
/// compensation, descending (comparison-table convention).
pub fn run_experiment(ds: &Dataset, grid: &ExperimentGrid) -> Result<ExperimentResult, Error> {
    if grid.specs.is_empty() {
        return Err(Error::Config("experiment grid has no specs".into()));
    }
    let evaluated: Vec<(FitSpec, Result<ExperimentRow, Error>)> = grid
        .specs
        .par_iter()
        .map(|spec| (spec.clone(), evaluate_spec(ds, spec, &grid.cv, grid.aggregation)))
        .collect();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (spec, res) in evaluated {
        match res {
            Ok(row) => rows.push(row),
            Err(e) => failures.push((spec, e)),
        }
    }
    rows.sort_by(|a, b| {
        b.cv_metrics
            .net_comp_g
            .partial_cmp(&a.cv_metrics.net_comp_g)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(ExperimentResult { rows, failures })
}

/// Mean metrics for one spec across simulation draws.
#[derive(Clone, Debug, Serialize)]
pub struct SimulationRow {
    pub estimator: String,
    pub r2: f64,
    pub pred_ratio_g: f64,
    pub net_comp_g: f64,
    pub net_comp_g2: f64,
    pub fair_cov: f64,
    pub draws_used: usize,
}

/// Averaged simulation table across repeated subsamples of a generated
/// population. For each draw, `n` rows are sampled without replacement, the
/// grid is evaluated under pooled 5-fold CV, and metrics are averaged over
/// draws. `group` picks which protected class the grid targets;
/// `other_group` is reported alongside (second net compensation column).
#[allow(clippy::too_many_arguments)]
pub fn replicate_simulation(
    pop: &SimPopulation,
    scenario: &ScenarioSpec,
    specs: &[FitSpec],
    other_group: &str,
    n: usize,
    draws: usize,
    draw_seed: u64,
    k: usize,
) -> Result<Vec<SimulationRow>, Error> {
    let full = scenario_design(pop, scenario, true)?;
    if n > full.n() {
        return Err(Error::Config(format!(
            "sample size {n} exceeds population {}",
            full.n()
        )));
    }
    if draws == 0 {
        return Err(Error::Config("draws must be >= 1".into()));
    }
    let per_draw: Vec<Vec<(String, MetricsReport, f64)>> = (0..draws)
        .into_par_iter()
        .map(|draw| -> Result<_, Error> {
            let mut rng = CounterRng::new(draw_seed, DRAW_STREAM + draw as u64);
            let mut rows_idx = rng.sample_indices(full.n(), n);
            rows_idx.sort_unstable();
            let sample = full.select(&rows_idx);
            let cv = make_folds(n, k, draw_seed ^ (draw as u64).wrapping_mul(0x9E37))?;
            let grid = ExperimentGrid {
                specs: specs.to_vec(),
                cv,
                aggregation: MetricAggregation::Pooled,
            };
            let result = run_experiment(&sample, &grid)?;
            if let Some((spec, e)) = result.failures.into_iter().next() {
                return Err(Error::Config(format!(
                    "draw {draw}, spec {}: {e}",
                    spec.estimator.label()
                )));
            }
            let other_mask = sample
                .groups
                .get(other_group)
                .ok_or_else(|| Error::UnknownGroup(other_group.to_string()))?;
            result
                .rows
                .into_iter()
                .map(|row| {
                    let nc2 = metrics::net_compensation(
                        &row.pooled_yhat,
                        sample.y.as_slice(),
                        other_mask,
                    )?;
                    Ok((row.spec.estimator.label(), row.cv_metrics, nc2))
                })
                .collect::<Result<Vec<_>, Error>>()
        })
        .collect::<Result<_, _>>()?;

    // average by estimator label, keeping the grid's spec order
    let mut table = Vec::new();
    for spec in specs {
        let label = spec.estimator.label();
        let mut acc = SimulationRow {
            estimator: label.clone(),
            r2: 0.0,
            pred_ratio_g: 0.0,
            net_comp_g: 0.0,
            net_comp_g2: 0.0,
            fair_cov: 0.0,
            draws_used: 0,
        };
        for draw_rows in &per_draw {
            if let Some((_, rep, nc2)) = draw_rows.iter().find(|(l, _, _)| *l == label) {
                acc.r2 += rep.r2.value().unwrap_or(f64::NAN);
                acc.pred_ratio_g += rep.pred_ratio_g.value().unwrap_or(f64::NAN);
                acc.net_comp_g += rep.net_comp_g;
                acc.net_comp_g2 += nc2;
                acc.fair_cov += rep.fair_cov;
                acc.draws_used += 1;
            }
        }
        let d = acc.draws_used as f64;
        acc.r2 /= d;
        acc.pred_ratio_g /= d;
        acc.net_comp_g /= d;
        acc.net_comp_g2 /= d;
        acc.fair_cov /= d;
        table.push(acc);
    }
    table.sort_by(|a, b| {
        b.net_comp_g
            .partial_cmp(&a.net_comp_g)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(table)
}

/// The estimator grid evaluated in the simulation tables.
pub fn simulation_grid(group_label: &str) -> Vec<FitSpec> {
    let mut specs = vec![
        FitSpec::new(Estimator::Ols, group_label),
        FitSpec::new(Estimator::AvgConstrained, group_label),
        FitSpec::new(Estimator::CovConstrained { m: 0.2 }, group_label),
    ];
    for alpha in [0.2, 0.4, 0.6, 0.8] {
        specs.push(FitSpec::new(
            Estimator::WeightedAvgConstrained { alpha },
            group_label,
        ));
    }
    for lambda in [100.0, 1000.0, 5000.0] {
        specs.push(FitSpec::new(Estimator::MrdPenalized { lambda }, group_label));
        specs.push(FitSpec::new(
            Estimator::NetcompPenalized { lambda },
            group_label,
        ));
    }
    for z in [0.2, 0.6, 1.0] {
        specs.push(FitSpec::new(
            Estimator::NetcompConstrained {
                z,
                z_fraction_of_group_mean: true,
            },
            group_label,
        ));
    }
    specs
}
