use std::fs;
use std::path::Path;
use std::time::Instant;

use clap::ValueEnum;
use schatten_frames::criteria::{sample_count, sample_frame, singular_basis, sum_norms, FrameEnsemble};
use schatten_frames::linalg::{schatten_norm_pow, ComplexMatrix};

use super::{finish, max_of, min_of, seeded};
use crate::config::CampaignConfig;
use crate::error::{LabError, Result};
use crate::report::{CampaignOutput, CheckRecord, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Strategy {
    /// Sum over the right singular vectors, which attains the norm.
    #[value(name = "singular_basis_exact")]
    SingularBasisExact,
    /// Extremal sum over sampled frames: upper bound at most one for `p >= 2`,
    /// Parseval for `p < 2`.
    #[value(name = "frame_ensemble")]
    FrameEnsemble,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::SingularBasisExact => "singular_basis_exact",
            Strategy::FrameEnsemble => "frame_ensemble",
        }
    }
}

pub fn read_matrix(path: &Path) -> Result<ComplexMatrix> {
    let text = fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
    Ok(ComplexMatrix::from_json(&text)?)
}

/// `||T||_p` from the SVD next to a frame-sum estimate. The estimate must sit
/// on the side the exponent dictates: at or below `||T||_p^p` over frames with
/// upper bound at most one when `p >= 2`, at or above it over Parseval frames
/// when `p < 2`, equal to it for the singular basis.
pub fn run_norm_estimate(
    matrix_file: &Path,
    p: f64,
    strategy: Strategy,
    config: &CampaignConfig,
) -> Result<CampaignOutput> {
    let started = Instant::now();
    if !(p.is_finite() && p > 0.0) {
        return Err(LabError::Config(format!("p must be positive, got {p}")));
    }
    let t = read_matrix(matrix_file)?;
    if !t.is_square() {
        return Err(LabError::Config(format!(
            "norm estimation needs a square matrix, got {}x{}",
            t.rows(),
            t.cols()
        )));
    }
    let tol = config.tolerances.equality;
    let exact_pow = schatten_norm_pow(&t, p)?;
    let slack = tol * exact_pow.max(1.0);
    let mut tables = Vec::new();

    let (estimate, gap_ok, note) = match strategy {
        Strategy::SingularBasisExact => {
            let estimate = sum_norms(&t, &singular_basis(&t)?, p)?.value;
            (
                estimate,
                (estimate - exact_pow).abs() <= slack,
                "singular basis sum equals the norm".to_string(),
            )
        }
        Strategy::FrameEnsemble => {
            let dim = t.rows();
            let ensemble = if p >= 2.0 {
                FrameEnsemble::UpperBoundOne
            } else {
                FrameEnsemble::Parseval
            };
            let sums = seeded(config.seed, config.trials, |_, s| {
                Ok((
                    sample_count(dim, s),
                    sum_norms(&t, &sample_frame(dim, ensemble, s)?, p)?.value,
                ))
            })?;
            let mut table = Table::new("norm_estimate_samples", &["trial", "frame_size", "sum"]);
            for (i, (size, sum)) in sums.iter().enumerate() {
                table.push(vec![i.to_string(), size.to_string(), sum.to_string()]);
            }
            tables.push(table);
            let values = sums.iter().map(|s| s.1);
            if p >= 2.0 {
                let sup = max_of(values);
                (
                    sup,
                    sup <= exact_pow + slack,
                    "supremum over frames with upper bound <= 1".to_string(),
                )
            } else {
                let inf = min_of(values);
                (
                    inf,
                    inf >= exact_pow - slack,
                    "infimum over Parseval frames".to_string(),
                )
            }
        }
    };
    let record = CheckRecord::new("norm_estimate", Some(p), tol)
        .count("dim", t.rows())
        .with("exact_norm", exact_pow.powf(1.0 / p))
        .with("exact_norm_pow", exact_pow)
        .with("estimate", estimate)
        .with("gap", estimate - exact_pow)
        .note(format!("{}: {note}", strategy.name()))
        .passed(gap_ok);
    Ok(finish(config, started, vec![record], tables))
}
