//! Generate the claims-style analysis dataset and write it to CSV, plus the
//! coefficient table that produced it (edit and pass back via
//! `AnalysisCoefficients::from_table_str` to change the data-generating
//! process).
//!
//!     cargo run --release --example analysis_data

use fair_regression::synth::{generate_analysis_data, AnalysisCoefficients};

fn main() {
    let coefs = AnalysisCoefficients::shipped_default();
    let (ds, summary) = generate_analysis_data(&coefs, 20_000, 20_240_101).unwrap();

    println!("rows: {}   features: {}", ds.n(), ds.p());
    println!("zero-spend share:  {:.4}", summary.zero_spend_share);
    println!("group prevalence:  {:.4}", summary.group_prevalence);
    println!("mean / median y:   {:.1} / {:.1}", summary.mean_y, summary.median_y);
    println!(
        "group vs complement mean y: {:.1} vs {:.1}",
        summary.group_mean_y, summary.complement_mean_y
    );

    ds.write_csv_path(std::path::Path::new("analysis.csv")).unwrap();
    std::fs::write("analysis_coefficients.txt", coefs.to_table_string()).unwrap();
    println!("wrote analysis.csv and analysis_coefficients.txt");
}
