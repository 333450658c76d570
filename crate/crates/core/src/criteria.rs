//! Frame-sum functionals and the Schatten-norm formulas built from them.
//!
//! In finite dimension every variational formula `||T||_p^p = sup/inf sum ...`
//! has an explicit extremal frame (the singular or eigen basis). Certificates
//! therefore evaluate that witness for equality and sample a seeded ensemble of
//! admissible frames to test the direction of the inequality.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::{
    make_frame, random_frame, random_onb, random_parseval_frame, rescale_lower_bound_one, rescale_upper_bound_one,
    Frame, SPANNING_TOL,
};
use crate::linalg::{
    check_exponent, hermitian_eigen, inner, is_psd, norm, norm_sqr, power_sum, svd, ComplexMatrix, C64, EIGEN_TOL,
    NULL_FLOOR, STRUCTURAL_TOL,
};
use crate::sampling::trial_seed;

/// Condition number used when sampling non-tight frames for certificates.
pub const SAMPLE_CONDITION: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SumKind {
    /// `sum ||T f_n||^p`
    Norms,
    /// `sum |<T f_n, f_n>|^p`
    Diag,
    /// `sum_n sum_k |<T f_n, f_k>|^p`
    Double,
    /// `sum ||f_n||^(2-p) ||T f_n||^p`, `0 < p <= 2`
    WeightedNorms,
    /// `sum ||f_n||^(2(1-p)) <T f_n, f_n>^p`, `T >= 0`, `0 < p <= 1`
    WeightedDiag,
    /// `sum_n ||f_n||^(2-p) sum_k |<T f_n, f_k>|^p`, `0 < p <= 2`
    WeightedDouble,
}

impl SumKind {
    pub fn name(self) -> &'static str {
        match self {
            SumKind::Norms => "norms",
            SumKind::Diag => "diag",
            SumKind::Double => "double",
            SumKind::WeightedNorms => "weighted_norms",
            SumKind::WeightedDiag => "weighted_diag",
            SumKind::WeightedDouble => "weighted_double",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SumReport {
    pub kind: SumKind,
    pub p: f64,
    pub value: f64,
    pub frame_id: String,
    pub operator_id: String,
}

fn check_dims(t: &ComplexMatrix, frame: &Frame) -> Result<()> {
    if !t.is_square() || t.cols() != frame.dim() {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{} but frame lives in dimension {}",
            t.rows(),
            t.cols(),
            frame.dim()
        )));
    }
    Ok(())
}

fn report(kind: SumKind, t: &ComplexMatrix, frame: &Frame, p: f64, value: f64) -> SumReport {
    SumReport {
        kind,
        p,
        value,
        frame_id: frame.id(),
        operator_id: t.fingerprint(),
    }
}

fn images(t: &ComplexMatrix, frame: &Frame) -> Vec<Vec<C64>> {
    frame.vectors().iter().map(|f| t.apply(f)).collect()
}

/// `||f||^e`, with zero vectors contributing zero weight.
fn weight(f: &[C64], exponent: f64) -> f64 {
    let n = norm(f);
    if n == 0.0 {
        0.0
    } else {
        n.powf(exponent)
    }
}

/// Magnitudes at or below `floor * ||f||` (times `||g||` for a form) are
/// rounding noise: a power `p < 1` would otherwise inflate them to `eps^p`.
fn rounding_floor(t: &ComplexMatrix) -> f64 {
    NULL_FLOOR * (t.rows().max(t.cols()) as f64) * t.frobenius_norm()
}

fn flushed(value: f64, scale: f64) -> f64 {
    if value <= scale {
        0.0
    } else {
        value
    }
}

fn norms_value(t: &ComplexMatrix, frame: &Frame, p: f64, weighted: bool) -> f64 {
    let floor = rounding_floor(t);
    frame
        .vectors()
        .iter()
        .map(|f| {
            let w = if weighted { weight(f, 2.0 - p) } else { 1.0 };
            let nf = norm(f);
            w * flushed(norm(&t.apply(f)), floor * nf).powf(p)
        })
        .sum()
}

fn double_value(t: &ComplexMatrix, frame: &Frame, p: f64, weighted: bool) -> f64 {
    let floor = rounding_floor(t);
    let tf = images(t, frame);
    let norms: Vec<f64> = frame.vectors().iter().map(|f| norm(f)).collect();
    frame
        .vectors()
        .iter()
        .zip(&tf)
        .zip(&norms)
        .map(|((f, g), nf)| {
            let w = if weighted { weight(f, 2.0 - p) } else { 1.0 };
            if w == 0.0 {
                return 0.0;
            }
            let row: f64 = frame
                .vectors()
                .iter()
                .zip(&norms)
                .map(|(h, nh)| flushed(inner(g, h).norm(), floor * nf * nh).powf(p))
                .sum();
            w * row
        })
        .sum()
}

pub fn sum_norms(t: &ComplexMatrix, frame: &Frame, p: f64) -> Result<SumReport> {
    check_exponent(p)?;
    check_dims(t, frame)?;
    Ok(report(SumKind::Norms, t, frame, p, norms_value(t, frame, p, false)))
}

pub fn sum_diag(t: &ComplexMatrix, frame: &Frame, p: f64) -> Result<SumReport> {
    check_exponent(p)?;
    check_dims(t, frame)?;
    let floor = rounding_floor(t);
    let value = frame
        .vectors()
        .iter()
        .map(|f| flushed(inner(&t.apply(f), f).norm(), floor * norm_sqr(f)).powf(p))
        .sum();
    Ok(report(SumKind::Diag, t, frame, p, value))
}

pub fn sum_double(t: &ComplexMatrix, frame: &Frame, p: f64) -> Result<SumReport> {
    check_exponent(p)?;
    check_dims(t, frame)?;
    Ok(report(SumKind::Double, t, frame, p, double_value(t, frame, p, false)))
}

fn check_range(kind: SumKind, p: f64) -> Result<()> {
    let (max, range, rule) = match kind {
        SumKind::WeightedDiag => (1.0, "(0, 1]", "the weighted diagonal sum"),
        SumKind::WeightedNorms => (2.0, "(0, 2]", "the weighted norm sum"),
        SumKind::WeightedDouble => (2.0, "(0, 2]", "the weighted double sum"),
        _ => return Ok(()),
    };
    if p > max {
        return Err(Error::ExponentOutOfRange { p, range, rule });
    }
    Ok(())
}

/// `<T f, f>` for PSD `T`, real part clamped at zero.
fn positive_form(t: &ComplexMatrix, f: &[C64]) -> f64 {
    let v = inner(&t.apply(f), f);
    debug_assert!(v.im.abs() <= 1e-10 * (1.0 + v.norm()));
    v.re.max(0.0)
}

/// Any of the six sums; the weighted kinds enforce their exponent ranges and
/// `weighted_diag` requires a positive semidefinite operator.
pub fn weighted_sum(kind: SumKind, t: &ComplexMatrix, frame: &Frame, p: f64) -> Result<SumReport> {
    check_exponent(p)?;
    check_dims(t, frame)?;
    check_range(kind, p)?;
    let value = match kind {
        SumKind::Norms => return sum_norms(t, frame, p),
        SumKind::Diag => return sum_diag(t, frame, p),
        SumKind::Double => return sum_double(t, frame, p),
        SumKind::WeightedNorms => norms_value(t, frame, p, true),
        SumKind::WeightedDouble => double_value(t, frame, p, true),
        SumKind::WeightedDiag => {
            require_psd(t)?;
            frame
                .vectors()
                .iter()
                .map(|f| weight(f, 2.0 * (1.0 - p)) * positive_form(t, f).powf(p))
                .sum()
        }
    };
    Ok(report(kind, t, frame, p, value))
}

fn require_hermitian(t: &ComplexMatrix) -> Result<()> {
    if !t.is_square() {
        return Err(Error::NotSquare {
            rows: t.rows(),
            cols: t.cols(),
        });
    }
    if !t.is_hermitian(STRUCTURAL_TOL) {
        return Err(Error::NotHermitian {
            defect: t.hermitian_defect(),
        });
    }
    Ok(())
}

fn require_psd(t: &ComplexMatrix) -> Result<()> {
    require_hermitian(t)?;
    let eig = hermitian_eigen(t, EIGEN_TOL)?;
    let scale = eig.values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    if eig.min() < -STRUCTURAL_TOL * scale {
        return Err(Error::NotPositive {
            min_eigenvalue: eig.min(),
        });
    }
    Ok(())
}

/// `tr(T* T S)` with `S` the frame operator; equals `sum ||T f_n||^2` for every frame.
pub fn frame_trace_identity(t: &ComplexMatrix, frame: &Frame) -> Result<f64> {
    check_dims(t, frame)?;
    let tt = &t.adjoint() * t;
    Ok((&tt * frame.frame_operator()).trace().re)
}

/// Both sides of the double-sum comparison
/// `sum sum |<T f_n, f_k>|^p  vs  C^(p/2) sum ||T f_n||^p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoubleSumBoundReport {
    pub p: f64,
    pub double_sum: f64,
    pub norm_sum: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    /// `C2^(p/2) * norm_sum`, checked as an upper bound when `p >= 2`.
    pub upper_side: Option<f64>,
    /// `C1^(p/2) * norm_sum`, checked as a lower bound when `p <= 2`.
    pub lower_side: Option<f64>,
    pub tolerance: f64,
    pub passed: bool,
}

/// For `p >= 2`: `sum sum |<T f_n, f_k>|^p <= C2^(p/2) sum ||T f_n||^p`.
/// For `p <= 2`: `sum sum |<T f_n, f_k>|^p >= C1^(p/2) sum ||T f_n||^p`.
/// Both are checked at `p = 2`. Slack is `tol * max(1, both sides)`.
pub fn double_sum_bounds(t: &ComplexMatrix, frame: &Frame, p: f64, tol: f64) -> Result<DoubleSumBoundReport> {
    let double_sum = sum_double(t, frame, p)?.value;
    let norm_sum = sum_norms(t, frame, p)?.value;
    let (c1, c2) = frame.bounds();
    let upper_side = (p >= 2.0).then(|| c2.powf(p / 2.0) * norm_sum);
    let lower_side = (p <= 2.0).then(|| c1.powf(p / 2.0) * norm_sum);
    let slack = |bound: f64| tol * double_sum.max(bound).max(1.0);
    let upper_ok = upper_side.is_none_or(|b| double_sum <= b + slack(b));
    let lower_ok = lower_side.is_none_or(|b| double_sum >= b - slack(b));
    Ok(DoubleSumBoundReport {
        p,
        double_sum,
        norm_sum,
        lower_bound: c1,
        upper_bound: c2,
        upper_side,
        lower_side,
        tolerance: tol,
        passed: upper_ok && lower_ok,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Every admissible frame sum stays below the norm.
    SupBelow,
    /// Every admissible frame sum stays above the norm.
    InfAbove,
}

/// Admissible frame families sampled by the certificates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameEnsemble {
    /// Random frames divided by the root of their upper bound.
    UpperBoundOne,
    /// Random frames divided by the root of their lower bound.
    LowerBoundOne,
    /// Canonical Parseval frames.
    Parseval,
}

/// Number of vectors in the sampled frame of a given seed: between `d + 1` and `3d`.
pub fn sample_count(dim: usize, seed: u64) -> usize {
    dim + 1 + (seed % (2 * dim as u64).max(1)) as usize
}

pub fn sample_frame(dim: usize, ensemble: FrameEnsemble, seed: u64) -> Result<Frame> {
    let count = sample_count(dim, seed);
    Ok(match ensemble {
        FrameEnsemble::UpperBoundOne => rescale_upper_bound_one(&random_frame(dim, count, SAMPLE_CONDITION, seed)?),
        FrameEnsemble::LowerBoundOne => rescale_lower_bound_one(&random_frame(dim, count, SAMPLE_CONDITION, seed)?),
        FrameEnsemble::Parseval => random_parseval_frame(dim, count, seed)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    /// Which sum the certificate is about, e.g. `norms` or `weighted_diag`.
    pub formula: String,
    pub p: f64,
    pub trials: usize,
    pub direction: Direction,
    pub ensemble: FrameEnsemble,
    /// Largest sampled sum for `sup_below`, smallest for `inf_above`.
    pub extremal_value: f64,
    /// `||T||_p^p`.
    pub norm_value: f64,
    /// The sum over the singular or eigen basis.
    pub witness_value: f64,
    pub equality_witness: bool,
    pub violations: usize,
    pub tolerance: f64,
    pub passed: bool,
}

struct Plan<'a> {
    formula: &'static str,
    kind: SumKind,
    direction: Direction,
    ensemble: FrameEnsemble,
    norm_value: f64,
    witness: &'a Frame,
    require_equality: bool,
}

fn run_plan(
    t: &ComplexMatrix,
    p: f64,
    trials: usize,
    seed: u64,
    tol: f64,
    plan: Plan<'_>,
) -> Result<CertificateReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let dim = t.rows();
    let kind = plan.kind;
    let samples: Vec<(f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let s = trial_seed(seed, i);
            let onb = random_onb(dim, s);
            let frame = sample_frame(dim, plan.ensemble, s)?;
            Ok((
                weighted_sum(kind, t, &onb, p)?.value,
                weighted_sum(kind, t, &frame, p)?.value,
            ))
        })
        .collect::<Result<_>>()?;

    let slack = tol * plan.norm_value.max(1.0);
    let values = samples.iter().flat_map(|&(a, b)| [a, b]);
    let (extremal_value, violations) = match plan.direction {
        Direction::SupBelow => (
            values.clone().fold(f64::NEG_INFINITY, f64::max),
            values.filter(|&v| !(v <= plan.norm_value + slack)).count(),
        ),
        Direction::InfAbove => (
            values.clone().fold(f64::INFINITY, f64::min),
            values.filter(|&v| !(v >= plan.norm_value - slack)).count(),
        ),
    };
    let witness_value = weighted_sum(kind, t, plan.witness, p)?.value;
    let equality_witness = (witness_value - plan.norm_value).abs() <= slack;
    Ok(CertificateReport {
        formula: plan.formula.to_string(),
        p,
        trials,
        direction: plan.direction,
        ensemble: plan.ensemble,
        extremal_value,
        norm_value: plan.norm_value,
        witness_value,
        equality_witness,
        violations,
        tolerance: tol,
        passed: violations == 0 && (equality_witness || !plan.require_equality),
    })
}

fn basis_frame(m: &ComplexMatrix) -> Frame {
    make_frame(m.columns(), m.rows(), SPANNING_TOL).expect("unitary columns span")
}

/// Right singular vectors of `T` as a frame.
pub fn singular_basis(t: &ComplexMatrix) -> Result<Frame> {
    Ok(basis_frame(&svd(t)?.right_vectors))
}

/// Eigenvectors of a Hermitian `T` as a frame.
pub fn eigen_basis(t: &ComplexMatrix) -> Result<Frame> {
    require_hermitian(t)?;
    Ok(basis_frame(&hermitian_eigen(t, EIGEN_TOL)?.vectors))
}

/// `sum ||T f_n||^p` against `||T||_p^p`: a supremum over frames with upper
/// bound at most one when `p >= 2`, an infimum over Parseval frames when `p < 2`.
pub fn certify_norm_formula(
    t: &ComplexMatrix,
    p: f64,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<CertificateReport> {
    check_exponent(p)?;
    if !t.is_square() {
        return Err(Error::NotSquare {
            rows: t.rows(),
            cols: t.cols(),
        });
    }
    let sd = svd(t)?;
    let witness = basis_frame(&sd.right_vectors);
    let (direction, ensemble) = if p >= 2.0 {
        (Direction::SupBelow, FrameEnsemble::UpperBoundOne)
    } else {
        (Direction::InfAbove, FrameEnsemble::Parseval)
    };
    run_plan(
        t,
        p,
        trials,
        seed,
        tol,
        Plan {
            formula: SumKind::Norms.name(),
            kind: SumKind::Norms,
            direction,
            ensemble,
            norm_value: power_sum(&sd.singular_values, p),
            witness: &witness,
            require_equality: true,
        },
    )
}

/// Diagonal sums of a Hermitian `T`. For PSD `T` and `p <= 1` the weighted sum
/// over frames with lower bound at least one is an infimum; for `p >= 1` the
/// plain sum over frames with upper bound at most one is a supremum.
pub fn certify_diag_formula(
    t: &ComplexMatrix,
    p: f64,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<CertificateReport> {
    check_exponent(p)?;
    require_hermitian(t)?;
    let eig = hermitian_eigen(t, EIGEN_TOL)?;
    let witness = basis_frame(&eig.vectors);
    let norm_value: f64 = eig.values.iter().map(|l| l.abs().powf(p)).sum();
    let positive = p <= 1.0 && require_psd(t).is_ok();
    let (kind, direction, ensemble) = if positive {
        (SumKind::WeightedDiag, Direction::InfAbove, FrameEnsemble::LowerBoundOne)
    } else if p >= 1.0 {
        (SumKind::Diag, Direction::SupBelow, FrameEnsemble::UpperBoundOne)
    } else {
        return Err(Error::ExponentOutOfRange {
            p,
            range: "[1, inf) unless the operator is positive",
            rule: "the diagonal-sum formula",
        });
    };
    run_plan(
        t,
        p,
        trials,
        seed,
        tol,
        Plan {
            formula: kind.name(),
            kind,
            direction,
            ensemble,
            norm_value,
            witness: &witness,
            require_equality: true,
        },
    )
}

/// Double sums `sum sum |<T f_n, f_k>|^p`: a supremum over frames with upper
/// bound at most one for `p >= 2` (any `T`), an infimum over Parseval frames for
/// `p < 2` (Hermitian `T`). The eigenbasis witnesses equality for Hermitian
/// `T`; for other operators the witness value is only recorded.
pub fn certify_double_formula(
    t: &ComplexMatrix,
    p: f64,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<CertificateReport> {
    check_exponent(p)?;
    if !t.is_square() {
        return Err(Error::NotSquare {
            rows: t.rows(),
            cols: t.cols(),
        });
    }
    let hermitian = t.is_hermitian(STRUCTURAL_TOL);
    if p < 2.0 && !hermitian {
        return Err(Error::NotHermitian {
            defect: t.hermitian_defect(),
        });
    }
    let sd = svd(t)?;
    let witness = if hermitian {
        eigen_basis(t)?
    } else {
        basis_frame(&sd.right_vectors)
    };
    let (direction, ensemble) = if p >= 2.0 {
        (Direction::SupBelow, FrameEnsemble::UpperBoundOne)
    } else {
        (Direction::InfAbove, FrameEnsemble::Parseval)
    };
    run_plan(
        t,
        p,
        trials,
        seed,
        tol,
        Plan {
            formula: SumKind::Double.name(),
            kind: SumKind::Double,
            direction,
            ensemble,
            norm_value: power_sum(&sd.singular_values, p),
            witness: &witness,
            require_equality: hermitian,
        },
    )
}

/// Trace-class (`p = 1`) and Hilbert-Schmidt (`p = 2`) checks over sampled frames.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointReport {
    pub trials: usize,
    pub hs_norm_sq: f64,
    /// Worst relative gap between `sum ||T f_n||^2` and `tr(T* T S)`.
    pub hs_identity_defect: f64,
    /// Worst relative gap between `sum ||T f_n||^2` and `||T||_2^2` over Parseval frames.
    pub hs_parseval_defect: f64,
    pub hs_enclosure_violations: usize,
    /// `None` when `T` is not positive semidefinite.
    pub trace_norm: Option<f64>,
    pub trace_enclosure_violations: usize,
    pub tolerance: f64,
    pub passed: bool,
}

/// For every sampled frame: `sum ||T f_n||^2 = tr(T* T S)` lies in
/// `[C1, C2] ||T||_2^2`, and for PSD `T`, `sum <T f_n, f_n>` lies in `[C1, C2] ||T||_1`.
pub fn endpoint_suites(t: &ComplexMatrix, trials: usize, seed: u64, tol: f64) -> Result<EndpointReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let dim = t.rows();
    let hs = svd(t)?.singular_values;
    let hs_norm_sq = power_sum(&hs, 2.0);
    let trace_norm = require_psd(t).is_ok().then(|| power_sum(&hs, 1.0));

    let rows: Vec<(f64, f64, bool, bool)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let s = trial_seed(seed, i);
            let frame = random_frame(dim, sample_count(dim, s), SAMPLE_CONDITION, s)?;
            let parseval = random_parseval_frame(dim, sample_count(dim, s), s)?;
            let (c1, c2) = frame.bounds();
            let lhs = sum_norms(t, &frame, 2.0)?.value;
            let rhs = frame_trace_identity(t, &frame)?;
            let identity = (lhs - rhs).abs() / rhs.abs().max(1e-300).max(lhs.abs());
            let ps = sum_norms(t, &parseval, 2.0)?.value;
            let pdefect = (ps - hs_norm_sq).abs() / hs_norm_sq.max(1e-300);
            let slack = tol * hs_norm_sq.max(1.0) * c2;
            let hs_ok = lhs >= c1 * hs_norm_sq - slack && lhs <= c2 * hs_norm_sq + slack;
            let trace_ok = match trace_norm {
                Some(tn) => {
                    let v: f64 = frame.vectors().iter().map(|f| positive_form(t, f)).sum();
                    let slack = tol * tn.max(1.0) * c2;
                    v >= c1 * tn - slack && v <= c2 * tn + slack
                }
                None => true,
            };
            Ok((
                if hs_norm_sq == 0.0 { lhs.abs() } else { identity },
                if hs_norm_sq == 0.0 { ps.abs() } else { pdefect },
                hs_ok,
                trace_ok,
            ))
        })
        .collect::<Result<_>>()?;

    let hs_identity_defect = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    let hs_parseval_defect = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let hs_enclosure_violations = rows.iter().filter(|r| !r.2).count();
    let trace_enclosure_violations = rows.iter().filter(|r| !r.3).count();
    let passed = hs_identity_defect <= tol
        && hs_parseval_defect <= tol
        && hs_enclosure_violations == 0
        && trace_enclosure_violations == 0;
    Ok(EndpointReport {
        trials,
        hs_norm_sq,
        hs_identity_defect,
        hs_parseval_defect,
        hs_enclosure_violations,
        trace_norm,
        trace_enclosure_violations,
        tolerance: tol,
        passed,
    })
}

/// Whether `T` is Hermitian positive semidefinite to structural tolerance.
pub fn is_positive(t: &ComplexMatrix) -> bool {
    t.is_hermitian(STRUCTURAL_TOL) && is_psd(t, STRUCTURAL_TOL)
}
