use std::time::Instant;

use schatten_frames::bergman::{
    disk_quadrature, hs_identity_check, r_lattice, sampling_frame, subharmonicity_check_many,
};
use schatten_frames::linalg::ComplexMatrix;
use schatten_frames::sampling::random_operator;

use super::{finish, max_of, min_of, relative_gap, seeded, synthesis_record};
use crate::config::CampaignConfig;
use crate::error::Result;
use crate::report::{CampaignOutput, CheckRecord, Table};

/// Diagonal of the reference operator for the Hilbert-Schmidt identity.
const REFERENCE_DIAGONAL: [f64; 4] = [1.0, 0.5, 0.25, 0.125];
/// Entry of the one-dimensional operator whose integral is `t^2 rmax^2`.
const CONSTANT_MODE: f64 = 3.0;

fn degree_of(trial: usize, max_degree: usize) -> usize {
    1 + trial % max_degree
}

/// Hilbert-Schmidt identity with its refinement table, subharmonicity of
/// `||T K_w||^p`, separated lattices and their sampling frames.
pub fn run_bergman(config: &CampaignConfig) -> Result<CampaignOutput> {
    let started = Instant::now();
    let b = &config.bergman;
    let tol = &config.tolerances;
    let rmax = config.rmax;
    let mut records = Vec::new();
    let mut tables = Vec::new();

    let quad = disk_quadrature(b.n_radial, b.n_angular, rmax)?;
    let mass_gap = (quad.mass() - rmax * rmax).abs();
    let angular = max_of((1..=8u32).map(|n| quad.integrate_complex(|w| w.powu(n)).norm()));
    records.push(
        CheckRecord::new("quadrature_exactness", None, tol.pointwise)
            .with("mass_gap", mass_gap)
            .with("max_angular_moment", angular)
            .passed(mass_gap <= tol.pointwise && angular <= tol.pointwise),
    );

    let reference = ComplexMatrix::from_diag(&REFERENCE_DIAGONAL);
    let d = REFERENCE_DIAGONAL.len();
    let mut refinement = Table::new(
        "hs_refinement",
        &[
            "n_radial",
            "lambda_integral",
            "area_integral",
            "closed_form",
            "closed_form_gap",
            "pointwise_gap",
            "rmax_deficit",
        ],
    );
    for &nr in &b.refinement {
        let r = hs_identity_check(&reference, &disk_quadrature(nr, b.n_angular, rmax)?, d, tol.quadrature)?;
        refinement.push(vec![
            nr.to_string(),
            r.lambda_integral.to_string(),
            r.area_integral.to_string(),
            r.closed_form.to_string(),
            r.closed_form_gap.to_string(),
            r.pointwise_gap.to_string(),
            r.rmax_deficit.to_string(),
        ]);
    }
    tables.push(refinement);
    let r = hs_identity_check(&reference, &quad, d, tol.quadrature)?;
    records.push(
        CheckRecord::new("hs_identity_diagonal", Some(2.0), tol.quadrature)
            .count("n_radial", b.n_radial)
            .with("lambda_integral", r.lambda_integral)
            .with("closed_form", r.closed_form)
            .with("closed_form_gap", r.closed_form_gap)
            .with("pointwise_gap", r.pointwise_gap)
            .with("hs_norm_sq", r.hs_norm_sq)
            .with("rmax_deficit", r.rmax_deficit)
            .passed(r.passed && r.pointwise_gap <= tol.pointwise),
    );

    let r = hs_identity_check(&ComplexMatrix::from_diag(&[CONSTANT_MODE]), &quad, 1, tol.quadrature)?;
    let expected = CONSTANT_MODE * CONSTANT_MODE * rmax * rmax;
    let gap = relative_gap(r.lambda_integral, expected);
    records.push(
        CheckRecord::new("hs_identity_constant_mode", Some(2.0), tol.identity)
            .with("lambda_integral", r.lambda_integral)
            .with("expected", expected)
            .with("relative_gap", gap)
            .passed(r.passed && gap <= tol.identity),
    );

    let reports = seeded(config.seed, b.trials, |i, s| {
        let deg = degree_of(i, b.max_degree);
        hs_identity_check(&random_operator(deg, s), &quad, deg, tol.quadrature)
    })?;
    records.push(
        CheckRecord::new("hs_identity_random", Some(2.0), tol.quadrature)
            .count("operators", reports.len())
            .with("max_closed_form_gap", max_of(reports.iter().map(|r| r.closed_form_gap)))
            .with("max_pointwise_gap", max_of(reports.iter().map(|r| r.pointwise_gap)))
            .passed(reports.iter().all(|r| r.passed && r.pointwise_gap <= tol.pointwise)),
    );

    let ps = &b.subharmonic_p;
    let sub = seeded(config.seed, b.trials, |i, s| {
        let deg = degree_of(i, b.max_degree);
        subharmonicity_check_many(&random_operator(deg, s), ps, b.grid_step, b.subharmonic_rmax, deg)
    })?;
    let mut sub_table = Table::new(
        "subharmonicity",
        &[
            "trial",
            "degree",
            "p",
            "min_laplacian",
            "tolerance",
            "max_value",
            "min_re",
            "min_im",
            "passed",
        ],
    );
    for (i, reports) in sub.iter().enumerate() {
        for r in reports {
            sub_table.push(vec![
                i.to_string(),
                degree_of(i, b.max_degree).to_string(),
                r.p.to_string(),
                r.min_laplacian.to_string(),
                r.tolerance.to_string(),
                r.max_value.to_string(),
                r.min_location.0.to_string(),
                r.min_location.1.to_string(),
                r.passed.to_string(),
            ]);
        }
    }
    tables.push(sub_table);
    for (k, &p) in ps.iter().enumerate() {
        let column: Vec<_> = sub.iter().map(|reports| &reports[k]).collect();
        let failures = column.iter().filter(|r| !r.passed).count();
        records.push(
            CheckRecord::new("subharmonicity", Some(p), max_of(column.iter().map(|r| r.tolerance)))
                .count("operators", column.len())
                .count("grid_points", column.first().map_or(0, |r| r.points))
                .with("min_laplacian", min_of(column.iter().map(|r| r.min_laplacian)))
                .with(
                    "min_scaled_laplacian",
                    min_of(column.iter().map(|r| r.min_laplacian / r.tolerance)),
                )
                .count("violations", failures)
                .note("tolerance is 1e-6 (1 + max F)(1 + 1/h^2) per operator")
                .passed(failures == 0),
        );
    }
    let deg = b.max_degree;
    let identity = subharmonicity_check_many(
        &ComplexMatrix::identity(deg),
        &[2.0],
        b.grid_step,
        b.subharmonic_rmax,
        deg,
    )?
    .remove(0);
    records.push(
        CheckRecord::new("subharmonicity_identity", Some(2.0), identity.tolerance)
            .count("degree", deg)
            .with("min_laplacian", identity.min_laplacian)
            .passed(identity.passed),
    );

    let mut lattice_table = Table::new(
        "sampling_frames",
        &[
            "separation",
            "points",
            "min_pairwise",
            "lower_bound",
            "upper_bound",
            "condition",
            "max_tail",
        ],
    );
    let mut frames = Vec::new();
    let mut conditions = Vec::new();
    for &sep in &b.separations {
        let lattice = r_lattice(sep, rmax)?;
        records.push(
            CheckRecord::new("lattice_separation", None, 0.0)
                .with("separation", sep)
                .count("points", lattice.points.len())
                .with("min_pairwise", lattice.min_pairwise)
                .passed(lattice.is_separated()),
        );
        let report = sampling_frame(&lattice, b.lattice_degree)?;
        lattice_table.push(vec![
            sep.to_string(),
            report.points.to_string(),
            lattice.min_pairwise.to_string(),
            report.lower_bound.to_string(),
            report.upper_bound.to_string(),
            report.condition.to_string(),
            report.max_tail.to_string(),
        ]);
        records.push(
            CheckRecord::new("sampling_frame", None, 0.0)
                .with("separation", sep)
                .count("degree", b.lattice_degree)
                .with("lower_bound", report.lower_bound)
                .with("upper_bound", report.upper_bound)
                .with("condition", report.condition)
                .passed(report.lower_bound > 0.0),
        );
        conditions.push((sep, report.condition));
        frames.push(report.frame);
    }
    tables.push(lattice_table);
    conditions.sort_by(|a, b| a.0.total_cmp(&b.0));
    if let (Some(first), Some(last)) = (conditions.first(), conditions.last()) {
        records.push(
            CheckRecord::new("sampling_condition_trend", None, 0.0)
                .with("densest_condition", first.1)
                .with("sparsest_condition", last.1)
                .note("sparser lattices are no better conditioned")
                .passed(last.1 >= first.1),
        );
    }
    records.push(synthesis_record("synthesis_certificate", &frames, tol.certificate));

    Ok(finish(config, started, records, tables))
}
