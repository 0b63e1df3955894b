//! Fit every estimator on one generated dataset and compare coefficients
//! and net compensation for the protected group.
//!
//!     cargo run --release --example fit_estimators

use fair_regression::{
    estimators::{fit, lambda_guideline, Estimator},
    metrics::net_compensation,
    synth::{generate_analysis_data, AnalysisCoefficients},
    FitSpec,
};

fn main() {
    let coefs = AnalysisCoefficients::shipped_default();
    let (ds, _) = generate_analysis_data(&coefs, 5_000, 7).unwrap();
    let lambda = lambda_guideline(ds.n());

    let grid = [
        Estimator::Ols,
        Estimator::AvgConstrained,
        Estimator::WeightedAvgConstrained { alpha: 0.5 },
        Estimator::CovConstrained { m: 0.5 },
        Estimator::MrdPenalized { lambda },
        Estimator::NetcompPenalized { lambda },
        Estimator::NetcompConstrained {
            z: 0.02,
            z_fraction_of_group_mean: true,
        },
    ];

    println!(
        "{:<42} {:>12} {:>12} {:>10}",
        "estimator", "intercept", "net comp", "active"
    );
    for est in grid {
        let spec = FitSpec::new(est, "mhsud");
        let res = fit(&ds, &spec).unwrap();
        let yhat = ds.predict(&res.theta);
        let nc = net_compensation(yhat.as_slice(), ds.y.as_slice(), &ds.groups["mhsud"]).unwrap();
        println!(
            "{:<42} {:>12.2} {:>12.2} {:>10}",
            spec.estimator.label(),
            res.theta[0],
            nc,
            res.constraint_active
        );
        for note in &res.notes {
            println!("    note: {note}");
        }
    }
}
