//! Seeded verification campaigns over `schatten-frames`, emitting a JSON
//! report and CSV tables per run.

pub mod campaigns;
pub mod config;
pub mod error;
pub mod report;

pub use campaigns::{run_bergman, run_counterexamples, run_norm_estimate, run_verify_theorems, Strategy};
pub use config::{CampaignConfig, Command, Overrides};
pub use error::{LabError, Result};
pub use report::{CampaignOutput, CampaignReport, CheckRecord};

/// Exit status: every record passed.
pub const EXIT_PASS: i32 = 0;
/// Exit status: at least one check failed.
pub const EXIT_CHECK_FAILURE: i32 = 1;
/// Exit status: bad usage, configuration or I/O.
pub const EXIT_USAGE: i32 = 2;

/// Runs a campaign other than norm estimation.
pub fn run(config: &CampaignConfig) -> Result<CampaignOutput> {
    match config.command {
        Command::VerifyTheorems => run_verify_theorems(config),
        Command::Counterexamples => run_counterexamples(config),
        Command::Bergman => run_bergman(config),
        Command::NormEstimate => Err(LabError::Config(
            "norm-estimate needs a matrix file, p and a strategy".into(),
        )),
    }
}
