//! Constraint/penalty correspondence: when the net-compensation constraint
//! binds with multiplier nu, the penalized fit at lambda = 2*nu recovers the
//! same coefficients.
//!
//!     cargo run --release --example penalty_duality

use fair_regression::{
    estimators::{fit, Estimator},
    synth::{generate_analysis_data, AnalysisCoefficients},
    FitSpec,
};

fn main() {
    let (ds, _) =
        generate_analysis_data(&AnalysisCoefficients::shipped_default(), 3_000, 5).unwrap();

    // tight budget on group undercompensation so the constraint binds
    let con = fit(
        &ds,
        &FitSpec::new(
            Estimator::NetcompConstrained {
                z: 0.01,
                z_fraction_of_group_mean: true,
            },
            "mhsud",
        ),
    )
    .unwrap();
    assert!(con.constraint_active, "constraint did not bind");
    println!("constrained multiplier nu = {:.6}", con.multiplier);

    let pen = fit(
        &ds,
        &FitSpec::new(
            Estimator::NetcompPenalized {
                lambda: 2.0 * con.multiplier,
            },
            "mhsud",
        ),
    )
    .unwrap();

    let gap = (&con.theta - &pen.theta).amax();
    println!("max |theta_constrained - theta_penalized| = {gap:.3e}");
    assert!(gap < 1e-6);
}
