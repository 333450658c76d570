//! The four campaigns. Trials fan out over rayon with seeds derived from the
//! campaign seed; results are collected in trial order, so reports do not
//! depend on the thread count.

mod bergman;
mod counterexamples;
mod norm_estimate;
mod verify;

use std::time::Instant;

use rayon::prelude::*;
use schatten_frames::criteria::{CertificateReport, Direction};
use schatten_frames::frames::{certify_synthesis, Frame};
use schatten_frames::sampling::trial_seed;

pub use bergman::run_bergman;
pub use counterexamples::run_counterexamples;
pub use norm_estimate::{run_norm_estimate, Strategy};
pub use verify::run_verify_theorems;

use crate::config::CampaignConfig;
use crate::error::Result;
use crate::report::{CampaignOutput, CampaignReport, CheckRecord, Table};

/// `f(trial_seed(seed, i))` for `i < n`, in trial order.
pub(crate) fn seeded<T: Send>(
    seed: u64,
    n: usize,
    f: impl Fn(usize, u64) -> schatten_frames::error::Result<T> + Sync + Send,
) -> Result<Vec<T>> {
    Ok((0..n)
        .into_par_iter()
        .map(|i| f(i, trial_seed(seed, i)))
        .collect::<schatten_frames::error::Result<Vec<T>>>()?)
}

pub(crate) fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

pub(crate) fn min_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(f64::INFINITY, f64::min)
}

/// Relative gap `|a - b| / max(|a|, |b|)`, zero when both vanish.
pub(crate) fn relative_gap(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// One record summarizing a certificate run on many operators. `max_excess` is
/// the largest raw amount by which a sampled sum crossed `||T||_p^p` in the
/// forbidden direction (negative when it never did).
pub(crate) fn certificate_record(tag: &str, p: f64, tol: f64, reports: &[CertificateReport]) -> CheckRecord {
    let excess = max_of(reports.iter().map(|r| match r.direction {
        Direction::SupBelow => r.extremal_value - r.norm_value,
        Direction::InfAbove => r.norm_value - r.extremal_value,
    }));
    let witness_gap = max_of(reports.iter().map(|r| (r.witness_value - r.norm_value).abs()));
    let violations: usize = reports.iter().map(|r| r.violations).sum();
    let witness_failures = reports.iter().filter(|r| !r.equality_witness).count();
    let note = reports
        .first()
        .map(|r| {
            let direction = match r.direction {
                Direction::SupBelow => "sup_below",
                Direction::InfAbove => "inf_above",
            };
            let ensemble = serde_json::to_value(r.ensemble).expect("enum serializes");
            format!(
                "{} {direction} over {}",
                r.formula,
                ensemble.as_str().unwrap_or_default()
            )
        })
        .unwrap_or_default();
    CheckRecord::new(tag, Some(p), tol)
        .count("operators", reports.len())
        .count("sums", reports.iter().map(|r| 2 * r.trials).sum())
        .count("violations", violations)
        .with("max_excess", excess)
        .with("max_witness_gap", witness_gap)
        .count("witness_mismatches", witness_failures)
        .note(note)
        .passed(reports.iter().all(|r| r.passed))
}

/// Synthesis-operator certificates for a batch of frames.
pub(crate) fn synthesis_record(tag: &str, frames: &[Frame], tol: f64) -> CheckRecord {
    let certs: Vec<_> = frames.par_iter().map(|f| certify_synthesis(f, tol)).collect();
    let failures: Vec<&str> = certs.iter().filter_map(|c| c.violation.as_deref()).collect();
    let mut record = CheckRecord::new(tag, None, tol)
        .count("frames", certs.len())
        .count("failures", failures.len())
        .with("min_lower_bound", min_of(certs.iter().map(|c| c.lower_bound)))
        .with("max_upper_bound", max_of(certs.iter().map(|c| c.upper_bound)))
        .with(
            "max_bound_gap",
            max_of(certs.iter().map(|c| {
                relative_gap(c.lambda_min_aat, c.lower_bound).max(relative_gap(c.lambda_max_aat, c.upper_bound))
            })),
        )
        .with(
            "max_analysis_defect",
            max_of(certs.iter().map(|c| c.max_analysis_defect)),
        )
        .passed(failures.is_empty());
    if let Some(first) = failures.first() {
        record = record.note(*first);
    }
    record
}

pub(crate) fn finish(
    config: &CampaignConfig,
    started: Instant,
    records: Vec<CheckRecord>,
    tables: Vec<Table>,
) -> CampaignOutput {
    CampaignOutput {
        report: CampaignReport::new(config, records, started.elapsed().as_secs_f64()),
        tables,
    }
}
