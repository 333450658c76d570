use std::time::Instant;

use schatten_frames::criteria::{
    certify_diag_formula, certify_double_formula, certify_norm_formula, double_sum_bounds, endpoint_suites,
    sample_count, sample_frame, singular_basis, sum_double, sum_norms, FrameEnsemble, SAMPLE_CONDITION,
};
use schatten_frames::frames::{random_frame, random_onb, random_parseval_frame, Frame};
use schatten_frames::linalg::{jensen_gap, schatten_norm_pow};
use schatten_frames::sampling::{random_hermitian, random_operator, random_psd, random_unit_vector};

use super::{certificate_record, finish, max_of, min_of, relative_gap, seeded, synthesis_record};
use crate::config::CampaignConfig;
use crate::error::Result;
use crate::report::{CampaignOutput, CheckRecord, Table};

/// Every frame-sum certificate over `trials` seeded operators per exponent,
/// the exact `p = 2` identities, the Jensen-type inequality and synthesis
/// certificates for every sampled frame.
pub fn run_verify_theorems(config: &CampaignConfig) -> Result<CampaignOutput> {
    let started = Instant::now();
    let (d, n, seed) = (config.dim, config.trials, config.seed);
    let tol = &config.tolerances;
    let mut records = Vec::new();

    for &p in &config.p_grid {
        let defects = seeded(seed, n, |_, s| {
            let t = random_operator(d, s);
            let exact = schatten_norm_pow(&t, p)?;
            let sum = sum_norms(&t, &singular_basis(&t)?, p)?.value;
            Ok(relative_gap(sum, exact))
        })?;
        let worst = max_of(defects.iter().copied());
        records.push(
            CheckRecord::new("singular_basis_exactness", Some(p), tol.equality)
                .count("operators", n)
                .with("max_relative_defect", worst)
                .passed(worst <= tol.equality),
        );

        let reports = seeded(seed, n, |_, s| {
            certify_norm_formula(&random_operator(d, s), p, 1, s, tol.equality)
        })?;
        records.push(certificate_record("norm_formula", p, tol.equality, &reports));

        if p <= 1.0 {
            let reports = seeded(seed, n, |_, s| {
                certify_diag_formula(&random_psd(d, s), p, 1, s, tol.equality)
            })?;
            records.push(certificate_record("diag_formula_positive", p, tol.equality, &reports));
        }
        if p >= 1.0 {
            let reports = seeded(seed, n, |_, s| {
                certify_diag_formula(&random_hermitian(d, s), p, 1, s, tol.equality)
            })?;
            records.push(certificate_record("diag_formula_hermitian", p, tol.equality, &reports));
        }

        let reports = seeded(seed, n, |_, s| {
            let t = if p >= 2.0 {
                random_operator(d, s)
            } else {
                random_hermitian(d, s)
            };
            certify_double_formula(&t, p, 1, s, tol.equality)
        })?;
        records.push(certificate_record("double_formula", p, tol.equality, &reports));

        let bounds = seeded(seed, n, |_, s| {
            let frame = random_frame(d, sample_count(d, s), SAMPLE_CONDITION, s)?;
            double_sum_bounds(&random_operator(d, s), &frame, p, tol.equality)
        })?;
        let margin = max_of(bounds.iter().map(|b| {
            let above = b.upper_side.map_or(f64::NEG_INFINITY, |u| b.double_sum - u);
            let below = b.lower_side.map_or(f64::NEG_INFINITY, |l| l - b.double_sum);
            above.max(below)
        }));
        let failures = bounds.iter().filter(|b| !b.passed).count();
        records.push(
            CheckRecord::new("double_sum_bounds", Some(p), tol.equality)
                .count("pairs", n)
                .count("violations", failures)
                .with("max_excess", margin)
                .note(if p == 2.0 {
                    "both sides at p = 2"
                } else if p > 2.0 {
                    "double sum <= C2^(p/2) norm sum"
                } else {
                    "double sum >= C1^(p/2) norm sum"
                })
                .passed(failures == 0),
        );
    }

    let gaps = seeded(seed, n, |_, s| {
        let t = random_operator(d, s);
        let frame = random_parseval_frame(d, sample_count(d, s), s)?;
        Ok(relative_gap(
            sum_double(&t, &frame, 2.0)?.value,
            sum_norms(&t, &frame, 2.0)?.value,
        ))
    })?;
    let worst = max_of(gaps.iter().copied());
    records.push(
        CheckRecord::new("double_sum_parseval_equality", Some(2.0), tol.identity)
            .count("pairs", n)
            .with("max_relative_gap", worst)
            .passed(worst <= tol.identity),
    );

    let endpoints = seeded(seed, n, |_, s| {
        endpoint_suites(&random_operator(d, s), 1, s, tol.identity)
    })?;
    let identity = max_of(endpoints.iter().map(|e| e.hs_identity_defect));
    let parseval = max_of(endpoints.iter().map(|e| e.hs_parseval_defect));
    let enclosure: usize = endpoints.iter().map(|e| e.hs_enclosure_violations).sum();
    records.push(
        CheckRecord::new("hs_trace_identity", Some(2.0), tol.identity)
            .count("pairs", n)
            .with("max_trace_identity_defect", identity)
            .with("max_parseval_defect", parseval)
            .count("enclosure_violations", enclosure)
            .passed(endpoints.iter().all(|e| e.passed)),
    );

    let endpoints = seeded(seed, n, |_, s| endpoint_suites(&random_psd(d, s), 1, s, tol.identity))?;
    let enclosure: usize = endpoints.iter().map(|e| e.trace_enclosure_violations).sum();
    records.push(
        CheckRecord::new("trace_class_enclosure", Some(1.0), tol.identity)
            .count("pairs", n)
            .count("enclosure_violations", enclosure)
            .passed(endpoints.iter().all(|e| e.passed && e.trace_norm.is_some())),
    );

    let mut jensen_table = Table::new("jensen", &["p", "min_gap", "violations"]);
    for &p in &config.jensen.p {
        let gaps = seeded(seed, config.jensen.trials, |_, s| {
            jensen_gap(&random_psd(d, s), &random_unit_vector(d, s), p)
        })?;
        let worst = min_of(gaps.iter().copied());
        let violations = gaps.iter().filter(|&&g| g < -tol.jensen).count();
        jensen_table.push(vec![p.to_string(), worst.to_string(), violations.to_string()]);
        records.push(
            CheckRecord::new("jensen", Some(p), tol.jensen)
                .count("pairs", gaps.len())
                .with("min_gap", worst)
                .count("violations", violations)
                .passed(violations == 0),
        );
    }

    let frames: Vec<Frame> = seeded(seed, n, |_, s| {
        let mut v = vec![
            random_onb(d, s),
            random_frame(d, sample_count(d, s), SAMPLE_CONDITION, s)?,
        ];
        for ensemble in [
            FrameEnsemble::UpperBoundOne,
            FrameEnsemble::LowerBoundOne,
            FrameEnsemble::Parseval,
        ] {
            v.push(sample_frame(d, ensemble, s)?);
        }
        Ok(v)
    })?
    .into_iter()
    .flatten()
    .collect();
    records.push(synthesis_record("synthesis_certificate", &frames, tol.certificate));

    Ok(finish(config, started, records, vec![jensen_table]))
}
