//! Benchmark records with stdin/stdout and starter-code problems, plus the
//! driver programs that let starter-code problems run as plain processes.

mod harness;
mod record;

pub use harness::{build_harness, build_harness_for, EntryPoint, HarnessSource};
pub use record::{filter_by_date, load_benchmark, BenchmarkRecord, LoadReport, Venue, BENCH_SCHEMA_ID};
