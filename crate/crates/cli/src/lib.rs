//! Workloads behind the `flowkit` binary: the song-statistics and build
//! pipelines, the benchmark harness and the law suite runner.

pub mod bench;
pub mod buildflow;
pub mod error;
pub mod songflow;

pub use error::CliError;

/// Runs the law suites and returns the printed report.
pub fn props(seed: u64, cases: usize) -> Result<String, CliError> {
    let report = flowkit::serial::laws::check_laws(seed, cases);
    if report.passed() {
        Ok(report.to_string())
    } else {
        Err(CliError::Failed(report.to_string()))
    }
}
