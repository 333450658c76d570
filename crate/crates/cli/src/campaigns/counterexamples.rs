use std::time::Instant;

use schatten_frames::constructions::{
    analysis_conjugate, compose_with_synthesis, control_series, divergence_demo_sum_norms, graded_reflection,
    graded_reflection_growth, gram_square, log_tail_diag_growth, log_tail_frame, log_weight_vector, positive_root,
    rank_one, scaled_copies_frame, scaled_copies_growth, shift_example, GrowthSeries, LambdaSpec, Verdict,
};
use schatten_frames::criteria::{sum_diag, sum_norms, SAMPLE_CONDITION};
use schatten_frames::frames::{random_frame, standard_basis, Frame};
use schatten_frames::linalg::{
    inner, norm, norm_sqr, power_sum, schatten_norm, schatten_norm_pow, singular_values, C64,
};
use schatten_frames::sampling::{random_operator, random_psd};

use super::{finish, max_of, min_of, relative_gap, synthesis_record};
use crate::config::CampaignConfig;
use crate::error::Result;
use crate::report::{CampaignOutput, CheckRecord, Table};

/// Exponent and excess of the scaled-copies demonstration.
const COPIES_P: f64 = 3.0;
const COPIES_EPSILON: f64 = 3.0;
/// Exponent of the graded-reflection and log-tail demonstrations.
const REFLECTION_P: f64 = 1.0;
const LOG_TAIL_P: f64 = 0.5;
/// Copies appended to the basis in the log-tail frame that is built explicitly.
const LOG_TAIL_COPIES: usize = 200;
/// Dimension of the explicit rank-one operator.
const RANK_ONE_DIM: usize = 64;

fn growth_record(tag: &str, p: Option<f64>, series: &GrowthSeries, expected: Verdict) -> CheckRecord {
    CheckRecord::new(tag, p, 0.0)
        .with("first", series.partial_sums[0])
        .with("last", series.last())
        .with("growth_ratio", series.growth_ratio())
        .with("min_increment_ratio", min_of(series.increment_ratios()))
        .note(format!("verdict {} (expected {expected})", series.verdict))
        .passed(series.verdict == expected)
}

fn p_label(p: f64) -> String {
    format!("p{p}")
}

/// The divergence and boundedness demonstrations, each checked against its
/// expected growth verdict, plus the exact identities behind the constructions.
pub fn run_counterexamples(config: &CampaignConfig) -> Result<CampaignOutput> {
    let started = Instant::now();
    let tol = &config.tolerances;
    let grid = &config.growth.grid;
    let mut records = Vec::new();
    let mut tables = Vec::new();

    let control = control_series(grid)?;
    records.push(growth_record(
        "control_series",
        Some(2.0),
        &control,
        Verdict::BoundedTrend,
    ));
    tables.push(Table::growth("growth_control", &control));

    let mut ratios = Vec::new();
    for &p in &config.growth.p {
        let series = divergence_demo_sum_norms(p, grid)?;
        records.push(growth_record(
            "rank_one_divergence",
            Some(p),
            &series,
            Verdict::DivergentTrend,
        ));
        tables.push(Table::growth(format!("growth_rank_one_{}", p_label(p)), &series));
        ratios.push((p, series.growth_ratio()));
    }
    ratios.sort_by(|a, b| a.0.total_cmp(&b.0));
    let ordered = ratios.windows(2).all(|w| w[1].1 <= w[0].1);
    records.push(
        ratios
            .iter()
            .fold(CheckRecord::new("rank_one_growth_ordering", None, 0.0), |r, (p, g)| {
                r.with(&format!("growth_ratio_{}", p_label(*p)), *g)
            })
            .note("growth ratio nonincreasing in p")
            .passed(ordered),
    );

    let h = log_weight_vector(RANK_ONE_DIM);
    let t = rank_one(&h)?;
    let h_sq = norm_sqr(&h);
    for &p in &config.p_grid {
        let value = schatten_norm(&t, p)?;
        let gap = relative_gap(value, h_sq);
        records.push(
            CheckRecord::new("rank_one_schatten", Some(p), tol.equality)
                .with("schatten_norm", value)
                .with("generator_norm_sq", h_sq)
                .with("relative_gap", gap)
                .passed(gap <= tol.equality),
        );
    }

    let copies = scaled_copies_frame(
        LambdaSpec::PowerLaw,
        COPIES_P,
        COPIES_EPSILON,
        config.growth.copies_terms,
    )?;
    let normalization = max_of(copies.normalizations().iter().map(|x| (x - 1.0).abs()));
    let (lhs, rhs) = copies.dual_evaluation();
    let dual_gap = relative_gap(lhs, rhs);
    let operator = copies.operator();
    let frame_sum = sum_norms(&operator, &copies.frame, COPIES_P)?.value;
    let frame_gap = relative_gap(frame_sum, lhs);
    let composed = compose_with_synthesis(&operator, &copies.frame)?;
    let column_sum = power_sum(
        &composed.columns().iter().map(|c| norm(c)).collect::<Vec<_>>(),
        COPIES_P,
    );
    let composed_gap = relative_gap(column_sum, frame_sum);
    let rank_ok = singular_values(&composed)?.iter().filter(|&&s| s > 0.0).count()
        <= singular_values(&copies.frame.synthesis().matrix)?
            .iter()
            .filter(|&&s| s > 0.0)
            .count();
    records.push(
        CheckRecord::new("scaled_copies_identity", Some(COPIES_P), tol.construction)
            .with("epsilon", COPIES_EPSILON)
            .count("terms", config.growth.copies_terms)
            .count("vectors", copies.frame.len())
            .with("max_normalization_defect", normalization)
            .with("dual_evaluation_gap", dual_gap)
            .with("frame_sum_gap", frame_gap)
            .with("composed_sum_gap", composed_gap)
            .note("N_n delta_n^2 = 1 with lambda_n = n^(-1/3)")
            .passed(
                normalization <= tol.construction
                    && dual_gap <= tol.construction
                    && frame_gap <= tol.identity
                    && composed_gap <= tol.identity
                    && rank_ok,
            ),
    );
    let (frame_trend, norm_trend) = scaled_copies_growth(LambdaSpec::PowerLaw, COPIES_P, COPIES_EPSILON, grid)?;
    records.push(growth_record(
        "scaled_copies_frame_trend",
        Some(COPIES_P),
        &frame_trend,
        Verdict::BoundedTrend,
    ));
    records.push(growth_record(
        "scaled_copies_norm_trend",
        Some(COPIES_P),
        &norm_trend,
        Verdict::DivergentTrend,
    ));
    tables.push(Table::growth("growth_scaled_copies_frame", &frame_trend));
    tables.push(Table::growth("growth_scaled_copies_norm", &norm_trend));

    let d = config.dim;
    let t = random_operator(d, config.seed);
    let tail = log_tail_frame(&t, LOG_TAIL_COPIES)?;
    let term_gap = max_of(
        tail.extra_diag_terms(&t)
            .iter()
            .zip(tail.closed_form_terms())
            .map(|(a, b)| (a - b).norm() / b.norm()),
    );
    let (lo, hi) = tail.closed_form_bounds();
    let (c1, c2) = tail.frame.bounds();
    let bound_gap = relative_gap(c1, lo).max(relative_gap(c2, hi));
    records.push(
        CheckRecord::new("log_tail_frame", None, tol.identity)
            .count("copies", LOG_TAIL_COPIES)
            .with("form_modulus", tail.form.norm())
            .with("max_term_gap", term_gap)
            .with("bound_gap", bound_gap)
            .passed(term_gap <= tol.identity && bound_gap <= tol.identity),
    );
    let tail_growth = log_tail_diag_growth(tail.form, LOG_TAIL_P, grid)?;
    records.push(growth_record(
        "log_tail_diag_growth",
        Some(LOG_TAIL_P),
        &tail_growth,
        Verdict::DivergentTrend,
    ));
    tables.push(Table::growth("growth_log_tail", &tail_growth));

    let ds = d.max(2);
    let shift = shift_example(ds)?;
    for &p in &config.p_grid {
        let diag = sum_diag(&shift, &standard_basis(ds), p)?.value;
        let norm_value = schatten_norm_pow(&shift, p)?;
        let expected = (ds - 1) as f64;
        records.push(
            CheckRecord::new("shift_example", Some(p), tol.equality)
                .count("dim", ds)
                .with("diag_sum", diag)
                .with("schatten_norm_pow", norm_value)
                .passed(diag == 0.0 && relative_gap(norm_value, expected) <= tol.equality),
        );
    }

    let reflection = graded_reflection(ds)?;
    let sv = singular_values(&reflection.operator)?;
    let sv_gap = max_of(
        sv.iter()
            .enumerate()
            .map(|(n, s)| relative_gap(*s, 0.5f64.powi(n as i32 + 1))),
    );
    let (double, norms) = graded_reflection_growth(REFLECTION_P, grid)?;
    records.push(
        CheckRecord::new("graded_reflection_spectrum", None, tol.equality)
            .count("dim", ds)
            .with("max_singular_value_gap", sv_gap)
            .with("unitarity_defect", reflection.unitary.unitarity_defect())
            .passed(sv_gap <= tol.equality && reflection.unitary.unitarity_defect() <= tol.equality),
    );
    records.push(growth_record(
        "graded_reflection_double",
        Some(REFLECTION_P),
        &double,
        Verdict::DivergentTrend,
    ));
    records.push(growth_record(
        "graded_reflection_norms",
        Some(REFLECTION_P),
        &norms,
        Verdict::BoundedTrend,
    ));
    tables.push(Table::growth("growth_graded_reflection_double", &double));
    tables.push(Table::growth("growth_graded_reflection_norms", &norms));

    let frame = random_frame(d, 2 * d + 1, SAMPLE_CONDITION, config.seed)?;
    let psd = random_psd(d, config.seed);
    let conj = analysis_conjugate(&t, &frame)?;
    let form = |m: &schatten_frames::linalg::ComplexMatrix, f: &[C64]| inner(&m.apply(f), f);
    let transfer = max_of(frame.vectors().iter().enumerate().map(|(n, f)| {
        let a = conj[(n, n)];
        let b = form(&t, f);
        (a - b).norm() / a.norm().max(b.norm()).max(f64::MIN_POSITIVE)
    }));
    let basis_gap = (&analysis_conjugate(&t, &standard_basis(d))? - &t).max_abs();
    let square = gram_square(&t);
    let root = positive_root(&psd)?;
    let routes = max_of(frame.vectors().iter().flat_map(|f| {
        let via_square = relative_gap(norm_sqr(&t.apply(f)).powf(1.5), form(&square, f).re.powf(1.5));
        let via_root = relative_gap(norm_sqr(&root.apply(f)), form(&psd, f).re);
        [via_square, via_root]
    }));
    records.push(
        CheckRecord::new("conjugation_identities", None, tol.identity)
            .with("max_transfer_gap", transfer)
            .with("basis_conjugate_gap", basis_gap)
            .with("max_route_gap", routes)
            .passed(transfer <= tol.identity && basis_gap <= tol.identity && routes <= tol.identity),
    );

    let constant = scaled_copies_frame(
        LambdaSpec::Constant,
        COPIES_P,
        COPIES_EPSILON,
        config.growth.copies_terms,
    )?;
    let frames: Vec<Frame> = vec![
        copies.frame.clone(),
        constant.frame,
        tail.frame.clone(),
        standard_basis(ds),
        frame,
    ];
    records.push(synthesis_record("synthesis_certificate", &frames, tol.certificate));

    Ok(finish(config, started, records, tables))
}
