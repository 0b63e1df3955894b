//! Round-trip a dataset through CSV and fit from the file, the same path the
//! `fairreg` binary takes.
//!
//!     cargo run --release --example csv_workflow

use fair_regression::{
    data::{load_csv_path, CsvSchema},
    estimators::{fit, Estimator},
    synth::{generate_analysis_data, AnalysisCoefficients},
    FitSpec,
};

fn main() {
    let (ds, _) =
        generate_analysis_data(&AnalysisCoefficients::shipped_default(), 2_000, 1).unwrap();
    let path = std::path::Path::new("roundtrip.csv");
    ds.write_csv_path(path).unwrap();

    let schema = CsvSchema {
        outcome_col: "y".into(),
        feature_cols: ds.feature_names.clone(),
        group_cols: vec!["mhsud".into()],
        id_col: Some("id".into()),
        add_intercept: false, // the file already carries an intercept column
    };
    let loaded = load_csv_path(path, &schema).unwrap();
    assert_eq!(loaded.n(), ds.n());

    let res = fit(&loaded, &FitSpec::new(Estimator::Ols, "mhsud")).unwrap();
    println!("loaded {} rows, {} features", loaded.n(), loaded.p());
    for (name, coef) in loaded.feature_names.iter().zip(res.theta.iter()).take(5) {
        println!("{name:>10}  {coef:>12.3}");
    }
    println!("...");
    std::fs::remove_file(path).ok();
}
