//! Repeated-subsample simulation: generate a 100k population, draw samples,
//! evaluate the default grid, and average across draws. Scenario 1 omits a
//! regressor that drives membership in group a1, so OLS undercompensates
//! that group while the constrained fits close the gap.
//!
//!     cargo run --release --example simulation_study

use fair_regression::eval::{replicate_simulation, simulation_grid};
use fair_regression::synth::{generate_population, ScenarioSpec};

fn main() {
    let pop = generate_population(100_000, 12345);
    let scenario = ScenarioSpec::new(1).unwrap();
    let specs = simulation_grid("a1");

    // 10 draws keeps this quick; more draws tighten the averages
    let table =
        replicate_simulation(&pop, &scenario, &specs, "a2", 10_000, 10, 99, 5).unwrap();

    println!(
        "{:<46} {:>7} {:>7} {:>9} {:>9}",
        "estimator", "r2", "pr_a1", "nc_a1", "nc_a2"
    );
    for row in &table {
        println!(
            "{:<46} {:>7.3} {:>7.3} {:>9.2} {:>9.2}",
            row.estimator, row.r2, row.pred_ratio_g, row.net_comp_g, row.net_comp_g2
        );
    }
}
