//! The five fairness measures, side by side, for an unconstrained fit and a
//! group-fair one.
//!
//!     cargo run --release --example fairness_report

use fair_regression::{
    estimators::{fit, Estimator},
    metrics::{group_residual_difference, metrics_report, abs_distance, GrdOptions},
    synth::{generate_analysis_data, AnalysisCoefficients},
    FitSpec,
};

fn main() {
    let (ds, _) =
        generate_analysis_data(&AnalysisCoefficients::shipped_default(), 4_000, 11).unwrap();
    let mask = &ds.groups["mhsud"];

    for est in [Estimator::Ols, Estimator::AvgConstrained] {
        let spec = FitSpec::new(est, "mhsud");
        let res = fit(&ds, &spec).unwrap();
        let yhat = ds.predict(&res.theta);
        let rep = metrics_report(yhat.as_slice(), ds.y.as_slice(), mask, None).unwrap();

        // pairwise measure is O(n_g * n_c); fine at this size
        let grd = group_residual_difference(
            yhat.as_slice(),
            ds.y.as_slice(),
            mask,
            abs_distance,
            &GrdOptions::default(),
        )
        .unwrap();

        println!("--- {}", spec.estimator.label());
        println!("  r-squared              {}", rep.r2.to_csv_field());
        println!("  predictive ratio (g)   {}", rep.pred_ratio_g.to_csv_field());
        println!("  net compensation (g)   {:.2}", rep.net_comp_g);
        println!("  mean resid difference  {:.2}", rep.mean_resid_diff);
        println!("  fair covariance        {:.3}", rep.fair_cov);
        println!("  group resid difference {:.3e}", grd);
    }
}
