//! Grid of estimators under shared k-fold cross-validation, printed as the
//! usual table sorted on out-of-fold net compensation.
//!
//!     cargo run --release --example cross_validation

use fair_regression::{
    estimators::{lambda_guideline, Estimator},
    eval::{make_folds, run_experiment, ExperimentGrid, MetricAggregation},
    synth::{generate_analysis_data, AnalysisCoefficients},
    FitSpec,
};

fn main() {
    let n = 10_000;
    let (ds, _) =
        generate_analysis_data(&AnalysisCoefficients::shipped_default(), n, 303).unwrap();
    let lambda = lambda_guideline(n);

    let specs = vec![
        FitSpec::new(Estimator::Ols, "mhsud"),
        FitSpec::new(Estimator::AvgConstrained, "mhsud"),
        FitSpec::new(Estimator::WeightedAvgConstrained { alpha: 0.2 }, "mhsud"),
        FitSpec::new(Estimator::CovConstrained { m: 0.5 }, "mhsud"),
        FitSpec::new(Estimator::MrdPenalized { lambda: 30.0 * lambda }, "mhsud"),
        FitSpec::new(Estimator::NetcompPenalized { lambda: 20.0 * lambda }, "mhsud"),
    ];
    let grid = ExperimentGrid {
        specs,
        cv: make_folds(n, 5, 1).unwrap(),
        aggregation: MetricAggregation::Pooled,
    };

    let result = run_experiment(&ds, &grid).unwrap();
    println!(
        "{:<42} {:>7} {:>7} {:>9} {:>9} {:>8}",
        "estimator", "r2", "pr_g", "nc_g", "mrd", "cov"
    );
    for row in &result.rows {
        let m = &row.cv_metrics;
        println!(
            "{:<42} {:>7.3} {:>7.3} {:>9.1} {:>9.1} {:>8.1}",
            row.spec.estimator.label(),
            m.r2.value().unwrap_or(f64::NAN),
            m.pred_ratio_g.value().unwrap_or(f64::NAN),
            m.net_comp_g,
            m.mean_resid_diff,
            m.fair_cov,
        );
    }
    for (spec, err) in &result.failures {
        eprintln!("failed: {} ({err})", spec.estimator.label());
    }
}
