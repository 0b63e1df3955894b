//! Simulation population: nine covariates, two partially overlapping
//! protected classes, and two deterministic outcomes, generated column by
//! column from independent RNG substreams.

use crate::data::Dataset;
use crate::error::Error;
use crate::rng::CounterRng;
use indexmap::IndexMap;

/// Column generation streams; one per column so adding a column never
/// perturbs another.
const STREAM_X: [u64; 9] = [1, 2, 3, 4, 5, 6, 7, 8, 9];
const STREAM_A1: u64 = 10;
const STREAM_A2: u64 = 11;

/// Generated population.
///
/// * `x1 ~ Normal(70, 15)`, `x2 ~ Poisson(10)`, `x3 ~ Poisson(35)`
/// * `x4..x9 ~ Bernoulli(0.5, 0.1, 0.05, 0.8, 0.03, 0.2)`
/// * `a1 ~ Bernoulli(x4 * x9 / 2 + 0.01)`, `a2 ~ Bernoulli(x4 / 3 + 0.05)`
///   (`x4` is binary, so its square is itself)
/// * `y1 = x1*x2*x4 + a1*x2*x7 + x3*x5*x6 + 2^(x8*x9) + a1*x1*x5 + a2*x3*x5`
/// * `y2 = x1 + x2 + x3*x4*x5 + a1*x3 + a1*a2*x1`
#[derive(Clone, Debug)]
pub struct SimPopulation {
    pub x: [Vec<f64>; 9],
    pub a1: Vec<bool>,
    pub a2: Vec<bool>,
    pub y1: Vec<f64>,
    pub y2: Vec<f64>,
    pub seed: u64,
}

impl SimPopulation {
    pub fn size(&self) -> usize {
        self.y1.len()
    }
}

const BERNOULLI_P: [f64; 6] = [0.5, 0.1, 0.05, 0.8, 0.03, 0.2];

/// Generate `size` rows deterministically from `seed`.
pub fn generate_population(size: usize, seed: u64) -> SimPopulation {
    assert!(size >= 1, "population size must be >= 1");
    let mut x: [Vec<f64>; 9] = Default::default();
    for col in x.iter_mut() {
        col.reserve(size);
    }
    for row in 0..size as u64 {
        x[0].push(CounterRng::at(seed, STREAM_X[0], row).normal(70.0, 15.0));
        x[1].push(CounterRng::at(seed, STREAM_X[1], row).poisson(10.0) as f64);
        x[2].push(CounterRng::at(seed, STREAM_X[2], row).poisson(35.0) as f64);
        for j in 0..6 {
            let v = CounterRng::at(seed, STREAM_X[3 + j], row).bernoulli(BERNOULLI_P[j]);
            x[3 + j].push(if v { 1.0 } else { 0.0 });
        }
    }
    let mut a1 = Vec::with_capacity(size);
    let mut a2 = Vec::with_capacity(size);
    let mut y1 = Vec::with_capacity(size);
    let mut y2 = Vec::with_capacity(size);
    for row in 0..size {
        let p1 = x[3][row] * x[8][row] / 2.0 + 0.01;
        let p2 = x[3][row] / 3.0 + 0.05;
        let m1 = CounterRng::at(seed, STREAM_A1, row as u64).bernoulli(p1);
        let m2 = CounterRng::at(seed, STREAM_A2, row as u64).bernoulli(p2);
        a1.push(m1);
        a2.push(m2);
        let (a1f, a2f) = (m1 as u8 as f64, m2 as u8 as f64);
        let (x1, x2, x3, x4, x5, x6, x7, x8, x9) = (
            x[0][row], x[1][row], x[2][row], x[3][row], x[4][row], x[5][row], x[6][row],
            x[7][row], x[8][row],
        );
        y1.push(
            x1 * x2 * x4
                + a1f * x2 * x7
                + x3 * x5 * x6
                + 2f64.powf(x8 * x9)
                + a1f * x1 * x5
                + a2f * x3 * x5,
        );
        y2.push(x1 + x2 + x3 * x4 * x5 + a1f * x3 + a1f * a2f * x1);
    }
    SimPopulation {
        x,
        a1,
        a2,
        y1,
        y2,
        seed,
    }
}

/// Which outcome and regressor columns a scenario uses. All three scenarios
/// deliberately misspecify the true functional form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScenarioSpec {
    pub id: u8,
    /// 1-based covariate indices used as regressors.
    pub regressors: Vec<usize>,
    /// true selects y1, false selects y2.
    pub outcome_is_y1: bool,
}

impl ScenarioSpec {
    pub fn new(id: u8) -> Result<Self, Error> {
        match id {
            // complex outcome, x4 omitted
            1 => Ok(ScenarioSpec {
                id,
                regressors: vec![1, 2, 3, 5, 6, 7, 8, 9],
                outcome_is_y1: true,
            }),
            // simpler outcome, every covariate (noise variables included)
            2 => Ok(ScenarioSpec {
                id,
                regressors: (1..=9).collect(),
                outcome_is_y1: false,
            }),
            // simpler outcome, x2, x3, x5 omitted
            3 => Ok(ScenarioSpec {
                id,
                regressors: vec![1, 4, 6, 7, 8, 9],
                outcome_is_y1: false,
            }),
            other => Err(Error::Config(format!(
                "unknown scenario {other}; expected 1, 2, or 3"
            ))),
        }
    }
}

/// Materialize a scenario as a regression dataset with groups `a1` and `a2`.
pub fn scenario_design(
    pop: &SimPopulation,
    scenario: &ScenarioSpec,
    add_intercept: bool,
) -> Result<Dataset, Error> {
    let n = pop.size();
    let mut names = Vec::new();
    if add_intercept {
        names.push("intercept".to_string());
    }
    for &j in &scenario.regressors {
        names.push(format!("x{j}"));
    }
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::with_capacity(names.len());
        if add_intercept {
            row.push(1.0);
        }
        for &j in &scenario.regressors {
            row.push(pop.x[j - 1][i]);
        }
        rows.push(row);
    }
    let y = if scenario.outcome_is_y1 {
        pop.y1.clone()
    } else {
        pop.y2.clone()
    };
    let mut groups = IndexMap::new();
    groups.insert("a1".to_string(), pop.a1.clone());
    groups.insert("a2".to_string(), pop.a2.clone());
    Dataset::new(y, rows, names, groups, (0..n).map(|i| i.to_string()).collect())
}

/// Write the population as CSV in the shared dialect.
pub fn population_to_dataset(pop: &SimPopulation) -> Result<Dataset, Error> {
    let n = pop.size();
    let names: Vec<String> = (1..=9).map(|j| format!("x{j}")).collect();
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
    for i in 0..n {
        rows.push((0..9).map(|j| pop.x[j][i]).collect());
    }
    // outcome column: y1; y2 carried as a feature column so one CSV holds
    // the full population
    let mut with_y2 = names;
    with_y2.push("y2".to_string());
    for (i, row) in rows.iter_mut().enumerate() {
        row.push(pop.y2[i]);
    }
    let mut groups = IndexMap::new();
    groups.insert("a1".to_string(), pop.a1.clone());
    groups.insert("a2".to_string(), pop.a2.clone());
    Dataset::new(
        pop.y1.clone(),
        rows,
        with_y2,
        groups,
        (0..n).map(|i| i.to_string()).collect(),
    )
}
