//! The experimental grid: monolingual baseline, translate-train,
//! translate-test (optionally simulated by back-translation) and
//! multilingual transfer, each averaged over several seeds.

mod config;
mod grid;
mod plan;
mod run;

pub use config::{EncoderRoles, ExperimentCondition, ExperimentConfig};
pub use grid::{grid_table, run_grid, GridRow, GridTable};
pub use plan::{plan, DataRoute, ExperimentPlan, TranslationStep};
pub use run::{predictions_jsonl, run, ExperimentResult, Resources, RunRecord};
