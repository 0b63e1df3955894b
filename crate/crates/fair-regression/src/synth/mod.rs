//! Seeded synthetic data generators: the simulation population with two
//! protected classes and three misspecification scenarios, and the two-part
//! health spending analysis dataset.

pub mod analysis;
pub mod population;

pub use analysis::{generate_analysis_data, AnalysisCoefficients, AnalysisSummary};
pub use population::{generate_population, scenario_design, ScenarioSpec, SimPopulation};
