//! Scenario harness: parse a scenario file, execute its steps on the
//! logical clock with one seeded generator, and emit a trace plus a
//! machine-readable summary.

pub mod engine;
pub mod file;

pub use engine::{run_scenario_text, Engine, RunReport, Summary};
pub use file::{ScenarioError, ScenarioFile};
