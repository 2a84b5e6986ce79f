//! Seeded scenario harness: lake and workload generation, mode comparison
//! and read reports.

mod config;
mod generate;
mod scenario;

pub use config::{BenchConfig, IndexedColumns, WorkloadKind};
pub use generate::{bench_schema, generate_ladder, generate_lake, generate_lake_in_memory, generate_workload};
pub use scenario::{mode_context, run_scenario, QueryRow, ScenarioReport, ScenarioSummary};
