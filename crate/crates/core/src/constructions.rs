//! Explicit operators and frames that separate the Schatten classes, truncated
//! to finite dimension.
//!
//! Divergence of an infinite series cannot be observed at a fixed truncation,
//! so each construction exposes its partial sums on a grid of truncations as a
//! [`GrowthSeries`] with a trend verdict.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::{make_frame, standard_basis, union_frame, Frame, SPANNING_TOL};
use crate::linalg::{basis_vector, inner, norm, psd_sqrt, svd, ComplexMatrix, C64, STRUCTURAL_TOL};

/// Truncations used by the growth verdicts.
pub const DEFAULT_GRID: [usize; 4] = [100, 1_000, 10_000, 100_000];

/// Last-to-first ratio a divergent trend must exceed.
pub const DIVERGENT_RATIO: f64 = 1.5;
/// Successive increments of a divergent trend must not shrink faster than this.
pub const INCREMENT_RATIO: f64 = 0.5;
/// Relative size of the final increment below which a trend counts as bounded.
pub const BOUNDED_INCREMENT: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    BoundedTrend,
    DivergentTrend,
    /// Neither rule fires: the partial sums still grow, but too slowly or too
    /// irregularly to call at this grid.
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::BoundedTrend => "bounded_trend",
            Verdict::DivergentTrend => "divergent_trend",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// Partial sums of a nonnegative series at increasing truncations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthSeries {
    pub truncations: Vec<usize>,
    pub partial_sums: Vec<f64>,
    pub verdict: Verdict,
}

/// One CSV row: `N, partial_sum, increment_ratio` (the ratio is absent for the
/// first two truncations).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub partial_sum: f64,
    pub increment_ratio: Option<f64>,
}

impl GrowthSeries {
    pub fn new(truncations: Vec<usize>, partial_sums: Vec<f64>) -> Result<Self> {
        if truncations.len() != partial_sums.len() || truncations.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least two truncations with one sum each, got {} and {}",
                truncations.len(),
                partial_sums.len()
            )));
        }
        if truncations.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("truncations must increase".into()));
        }
        let verdict = classify(&partial_sums);
        Ok(GrowthSeries {
            truncations,
            partial_sums,
            verdict,
        })
    }

    pub fn increments(&self) -> Vec<f64> {
        self.partial_sums.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// `(S_k - S_{k-1}) / (S_{k-1} - S_{k-2})` for `k >= 2`.
    pub fn increment_ratios(&self) -> Vec<f64> {
        self.increments().windows(2).map(|w| w[1] / w[0]).collect()
    }

    pub fn growth_ratio(&self) -> f64 {
        self.partial_sums[self.partial_sums.len() - 1] / self.partial_sums[0]
    }

    pub fn last(&self) -> f64 {
        *self.partial_sums.last().expect("nonempty")
    }

    pub fn rows(&self) -> Vec<GrowthRow> {
        let ratios = self.increment_ratios();
        self.truncations
            .iter()
            .zip(&self.partial_sums)
            .enumerate()
            .map(|(k, (&n, &s))| GrowthRow {
                n,
                partial_sum: s,
                increment_ratio: k.checked_sub(2).map(|j| ratios[j]),
            })
            .collect()
    }
}

/// Divergent iff the sums grow by more than [`DIVERGENT_RATIO`] across the grid
/// and every increment ratio exceeds [`INCREMENT_RATIO`]; bounded iff the last
/// increment is below [`BOUNDED_INCREMENT`] of the previous sum.
pub fn classify(partial_sums: &[f64]) -> Verdict {
    let n = partial_sums.len();
    let first = partial_sums[0];
    let last = partial_sums[n - 1];
    let prev = partial_sums[n - 2];
    let increments: Vec<f64> = partial_sums.windows(2).map(|w| w[1] - w[0]).collect();
    let steady = increments
        .windows(2)
        .all(|w| w[0] > 0.0 && w[1] / w[0] > INCREMENT_RATIO);
    if first > 0.0 && last / first > DIVERGENT_RATIO && steady {
        Verdict::DivergentTrend
    } else if last - prev < BOUNDED_INCREMENT * prev || last == 0.0 {
        Verdict::BoundedTrend
    } else {
        Verdict::Inconclusive
    }
}

/// Running partial sums of `term(1) + term(2) + ...` recorded at each grid point.
pub fn growth_from_terms(grid: &[usize], term: impl Fn(usize) -> f64) -> Result<GrowthSeries> {
    let max = grid.iter().copied().max().unwrap_or(0);
    let mut sums = Vec::with_capacity(grid.len());
    let mut acc = 0.0;
    let mut next = 0;
    for n in 1..=max {
        acc += term(n);
        while next < grid.len() && grid[next] == n {
            sums.push(acc);
            next += 1;
        }
    }
    if sums.len() != grid.len() {
        return Err(Error::InvalidArgument(
            "grid must be increasing positive truncations".into(),
        ));
    }
    GrowthSeries::new(grid.to_vec(), sums)
}

/// `1 / (sqrt(n) ln(n + 1))`, the `n`-th entry (1-based) of the log-weight vector.
pub fn log_weight(n: usize) -> f64 {
    let x = n as f64;
    1.0 / (x.sqrt() * (x + 1.0).ln())
}

/// `h = sum e_n / (sqrt(n) ln(n+1))`, `n = 1..d`.
pub fn log_weight_vector(d: usize) -> Vec<C64> {
    (1..=d).map(|n| C64::new(log_weight(n), 0.0)).collect()
}

/// `||h_d||^2 = sum_{n<=d} 1/(n ln^2(n+1))`.
pub fn log_weight_norm_sq(d: usize) -> f64 {
    (1..=d).map(|n| log_weight(n).powi(2)).sum()
}

/// `T x = <x, h> h`.
pub fn rank_one(h: &[C64]) -> Result<ComplexMatrix> {
    if h.is_empty() || norm(h) == 0.0 {
        return Err(Error::InvalidArgument("rank-one generator must be nonzero".into()));
    }
    let d = h.len();
    Ok(ComplexMatrix::from_fn(d, d, |i, j| h[i] * h[j].conj()))
}

fn check_subquadratic(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 2.0) {
        return Err(Error::ExponentOutOfRange {
            p,
            range: "(0, 2)",
            rule: "the rank-one divergence example",
        });
    }
    Ok(())
}

/// `sum_{n<=d} ||T e_n||^p` for `T = h_d h_d*` at each `d` of the grid, where
/// `||T e_n|| = ||h_d|| |h_n|`.
pub fn divergence_demo_sum_norms(p: f64, grid: &[usize]) -> Result<GrowthSeries> {
    check_subquadratic(p)?;
    let max = grid.iter().copied().max().unwrap_or(0);
    let mut norm_sq = 0.0;
    let mut power = 0.0;
    let mut sums = Vec::with_capacity(grid.len());
    let mut next = 0;
    for n in 1..=max {
        let w = log_weight(n);
        norm_sq += w * w;
        power += w.powf(p);
        while next < grid.len() && grid[next] == n {
            sums.push(norm_sq.powf(p / 2.0) * power);
            next += 1;
        }
    }
    if sums.len() != grid.len() {
        return Err(Error::InvalidArgument(
            "grid must be increasing positive truncations".into(),
        ));
    }
    GrowthSeries::new(grid.to_vec(), sums)
}

/// The convergent comparison series `sum 1/(n ln^2(n+1))`.
pub fn control_series(grid: &[usize]) -> Result<GrowthSeries> {
    growth_from_terms(grid, |n| log_weight(n).powi(2))
}

/// Named singular-value sequences for the scaled-copies construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaSpec {
    /// `n^(-1/p)`: in `l^q` exactly for `q > p`.
    PowerLaw,
    /// Constant one.
    Constant,
    /// `(ln(n+1) / n)^(1/p)`.
    PowerLog,
}

impl LambdaSpec {
    pub fn value(self, n: usize, p: f64) -> f64 {
        let x = n as f64;
        match self {
            LambdaSpec::PowerLaw => x.powf(-1.0 / p),
            LambdaSpec::Constant => 1.0,
            LambdaSpec::PowerLog => ((x + 1.0).ln() / x).powf(1.0 / p),
        }
    }
}

impl FromStr for LambdaSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "power_law" => Ok(LambdaSpec::PowerLaw),
            "constant" => Ok(LambdaSpec::Constant),
            "power_log" => Ok(LambdaSpec::PowerLog),
            other => Err(Error::InvalidArgument(format!("unknown lambda spec {other:?}"))),
        }
    }
}

/// Lower and upper constants for `N_n delta_n^2`.
pub const COPIES_CONSTANTS: (f64, f64) = (0.5, 2.0);

/// `N_n` copies of `delta_n e_n` with `delta_n^(p-2) = lambda_n^epsilon` and
/// `N_n delta_n^2` close to one. Against `T = diag(lambda)` the frame sum
/// `sum ||T f||^p` behaves like `sum lambda_n^(p+epsilon)`, not `sum lambda_n^p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaledCopiesFrame {
    pub spec: LambdaSpec,
    pub p: f64,
    pub epsilon: f64,
    pub lambda: Vec<f64>,
    pub delta: Vec<f64>,
    pub counts: Vec<usize>,
    pub frame: Frame,
}

pub fn scaled_copies_frame(spec: LambdaSpec, p: f64, epsilon: f64, n_terms: usize) -> Result<ScaledCopiesFrame> {
    if !(p > 2.0 && p.is_finite()) {
        return Err(Error::ExponentOutOfRange {
            p,
            range: "(2, inf)",
            rule: "the scaled-copies frame",
        });
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    if n_terms == 0 {
        return Err(Error::InvalidArgument("n_terms must be at least 1".into()));
    }
    let lambda: Vec<f64> = (1..=n_terms).map(|n| spec.value(n, p)).collect();
    let delta: Vec<f64> = lambda.iter().map(|l| l.powf(epsilon / (p - 2.0))).collect();
    let counts: Vec<usize> = delta
        .iter()
        .map(|d| ((1.0 / (d * d)).round() as usize).max(1))
        .collect();
    let mut vectors = Vec::with_capacity(counts.iter().sum());
    for (k, (&count, &dk)) in counts.iter().zip(&delta).enumerate() {
        let v: Vec<C64> = basis_vector(n_terms, k).into_iter().map(|z| z * dk).collect();
        vectors.extend(std::iter::repeat_n(v, count));
    }
    let frame = make_frame(vectors, n_terms, SPANNING_TOL)?;
    Ok(ScaledCopiesFrame {
        spec,
        p,
        epsilon,
        lambda,
        delta,
        counts,
        frame,
    })
}

impl ScaledCopiesFrame {
    /// `N_n delta_n^2` per `n`.
    pub fn normalizations(&self) -> Vec<f64> {
        self.counts
            .iter()
            .zip(&self.delta)
            .map(|(&c, d)| c as f64 * d * d)
            .collect()
    }

    pub fn within_constants(&self) -> bool {
        let (c, big_c) = COPIES_CONSTANTS;
        self.normalizations().iter().all(|&x| c <= x && x <= big_c)
    }

    /// The operator `diag(lambda)` whose singular values the frame is tuned to.
    pub fn operator(&self) -> ComplexMatrix {
        ComplexMatrix::from_diag(&self.lambda)
    }

    /// `(sum N_n delta_n^p lambda_n^p, sum (N_n delta_n^2) lambda_n^(p+epsilon))`,
    /// evaluated independently.
    pub fn dual_evaluation(&self) -> (f64, f64) {
        let p = self.p;
        let lhs = self
            .counts
            .iter()
            .zip(&self.delta)
            .zip(&self.lambda)
            .map(|((&c, d), l)| c as f64 * d.powf(p) * l.powf(p))
            .sum();
        let rhs = self
            .normalizations()
            .iter()
            .zip(&self.lambda)
            .map(|(nd, l)| nd * l.powf(p + self.epsilon))
            .sum();
        (lhs, rhs)
    }
}

/// Partial sums of `sum lambda_n^(p+epsilon)` (the frame-sum trend) and of
/// `sum lambda_n^p` (the Schatten-p trend) over a grid.
pub fn scaled_copies_growth(
    spec: LambdaSpec,
    p: f64,
    epsilon: f64,
    grid: &[usize],
) -> Result<(GrowthSeries, GrowthSeries)> {
    let frame_trend = growth_from_terms(grid, |n| spec.value(n, p).powf(p + epsilon))?;
    let norm_trend = growth_from_terms(grid, |n| spec.value(n, p).powf(p))?;
    Ok((frame_trend, norm_trend))
}

/// `S = T A` with `A` the synthesis matrix of `frame`; its columns are `T f_n`,
/// so `sum ||S e_n||^p = sum ||T f_n||^p`.
pub fn compose_with_synthesis(t: &ComplexMatrix, frame: &Frame) -> Result<ComplexMatrix> {
    t.try_mul(&frame.synthesis().matrix)
}

/// An orthonormal basis extended by the vectors `h / (sqrt(n) ln(n+1))`, where
/// `h` is a unit vector with `<T h, h> != 0`. The diagonal terms of the extra
/// vectors are `<T h, h> / (n ln^2(n+1))`, which lie in `l^1` but not in `l^p`
/// for `p < 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogTailFrame {
    pub frame: Frame,
    pub h: Vec<C64>,
    pub form: C64,
    pub copies: usize,
}

fn form(t: &ComplexMatrix, h: &[C64]) -> C64 {
    inner(&t.apply(h), h)
}

/// Unit vector with `|<T h, h>|` clearly nonzero: the top left singular vector
/// when it works, otherwise the first hit among `e_i`, `(e_i +- e_j)/sqrt2`
/// and `(e_i +- i e_j)/sqrt2`.
pub fn nondegenerate_direction(t: &ComplexMatrix) -> Result<Vec<C64>> {
    let sd = svd(t)?;
    let scale = sd.singular_values[0];
    if scale == 0.0 {
        return Err(Error::InvalidArgument("operator is zero".into()));
    }
    let threshold = 1e-8 * scale;
    let top = sd.left_vectors.column(0);
    if form(t, &top).norm() > threshold {
        return Ok(top);
    }
    let d = t.rows();
    let mut candidates: Vec<Vec<C64>> = (0..d).map(|i| basis_vector(d, i)).collect();
    for i in 0..d {
        for j in i + 1..d {
            for phase in [
                C64::new(1.0, 0.0),
                C64::new(-1.0, 0.0),
                C64::new(0.0, 1.0),
                C64::new(0.0, -1.0),
            ] {
                let mut v = vec![C64::new(0.0, 0.0); d];
                v[i] = C64::new(FRAC_1_SQRT_2, 0.0);
                v[j] = phase * FRAC_1_SQRT_2;
                candidates.push(v);
            }
        }
    }
    candidates
        .into_iter()
        .find(|v| form(t, v).norm() > threshold)
        .ok_or_else(|| Error::InvalidArgument("no direction with <Th, h> != 0".into()))
}

pub fn log_tail_frame(t: &ComplexMatrix, copies: usize) -> Result<LogTailFrame> {
    if !t.is_square() {
        return Err(Error::NotSquare {
            rows: t.rows(),
            cols: t.cols(),
        });
    }
    let h = nondegenerate_direction(t)?;
    let extra: Vec<Vec<C64>> = (1..=copies)
        .map(|n| h.iter().map(|z| z * log_weight(n)).collect())
        .collect();
    let frame = union_frame(&standard_basis(t.rows()), &extra)?;
    Ok(LogTailFrame {
        form: form(t, &h),
        frame,
        h,
        copies,
    })
}

impl LogTailFrame {
    /// `(1, 1 + sum_{n<=copies} 1/(n ln^2(n+1)))`; for `d = 1` both bounds are the larger value.
    pub fn closed_form_bounds(&self) -> (f64, f64) {
        let upper = 1.0 + log_weight_norm_sq(self.copies);
        if self.frame.dim() == 1 {
            (upper, upper)
        } else {
            (1.0, upper)
        }
    }

    /// `<T f, f>` over the appended vectors, evaluated from the frame.
    pub fn extra_diag_terms(&self, t: &ComplexMatrix) -> Vec<C64> {
        let d = self.frame.dim();
        self.frame.vectors()[d..].iter().map(|f| form(t, f)).collect()
    }

    /// `<T h, h> / (n ln^2(n+1))`.
    pub fn closed_form_terms(&self) -> Vec<C64> {
        (1..=self.copies).map(|n| self.form * log_weight(n).powi(2)).collect()
    }
}

/// Partial sums of `|<T f'_n, f'_n>|^p = |<Th,h>|^p / (n ln^2(n+1))^p` over a
/// grid of copy counts.
pub fn log_tail_diag_growth(form_value: C64, p: f64, grid: &[usize]) -> Result<GrowthSeries> {
    let a = form_value.norm().powf(p);
    growth_from_terms(grid, |n| a * log_weight(n).powf(2.0 * p))
}

/// Truncated unilateral shift, `T e_n = e_{n+1}` and `T e_d = 0`.
pub fn shift_example(d: usize) -> Result<ComplexMatrix> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("shift needs d >= 2, got {d}")));
    }
    Ok(ComplexMatrix::from_fn(d, d, |i, j| {
        if i == j + 1 {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    }))
}

/// Householder reflection `U = I - 2 w w* / ||w||^2`, `w = e_1 - h_1`, with
/// `h_1` the normalized log-weight vector, so `U e_1 = h_1`. The operator
/// `T x = sum_n 2^(-n) <x, h_n> e_n` (with `h_n = U e_n`) has singular values
/// `2^(-n)`, yet its double sum over the standard basis is dominated by
/// `2^(-p) sum_k |h_1(k)|^p`, which diverges for `p < 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradedReflection {
    pub h1: Vec<f64>,
    pub unitary: ComplexMatrix,
    pub operator: ComplexMatrix,
}

fn reflector_vector(d: usize) -> (Vec<f64>, Vec<f64>, f64) {
    let norm_h = log_weight_norm_sq(d).sqrt();
    let h1: Vec<f64> = (1..=d).map(|n| log_weight(n) / norm_h).collect();
    let mut w: Vec<f64> = h1.iter().map(|x| -x).collect();
    w[0] += 1.0;
    let w_sq = w.iter().map(|x| x * x).sum();
    (h1, w, w_sq)
}

pub fn graded_reflection(d: usize) -> Result<GradedReflection> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("need d >= 2, got {d}")));
    }
    let (h1, w, w_sq) = reflector_vector(d);
    let unitary = ComplexMatrix::from_fn(d, d, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        C64::new(delta - 2.0 * w[i] * w[j] / w_sq, 0.0)
    });
    let operator = ComplexMatrix::from_fn(d, d, |n, k| unitary[(k, n)].conj() * 0.5f64.powi(n as i32 + 1));
    Ok(GradedReflection { h1, unitary, operator })
}

/// `sum_n 2^(-np) sum_k |U_kn|^p` at dimension `d`, evaluated column by column
/// from the reflector without forming `U`. Columns are dropped once
/// `2^(-np) d^(1-p/2)` (a bound on the rest) falls below `1e-17` of the sum.
pub fn graded_reflection_double_sum(d: usize, p: f64) -> Result<f64> {
    check_subquadratic(p)?;
    if d < 2 {
        return Err(Error::InvalidArgument(format!("need d >= 2, got {d}")));
    }
    let (_, w, w_sq) = reflector_vector(d);
    let tail_bound = (d as f64).powf(1.0 - p / 2.0);
    let mut total = 0.0;
    for n in 0..d {
        let weight = 0.5f64.powf(p * (n as f64 + 1.0));
        if n > 0 && weight * tail_bound < 1e-17 * total {
            break;
        }
        let c = 2.0 * w[n] / w_sq;
        let column: f64 = w
            .iter()
            .enumerate()
            .map(|(k, wk)| {
                let delta = if k == n { 1.0 } else { 0.0 };
                (delta - c * wk).abs().powf(p)
            })
            .sum();
        total += weight * column;
    }
    Ok(total)
}

/// Double-sum and Schatten-norm trends of the graded reflection operator.
pub fn graded_reflection_growth(p: f64, grid: &[usize]) -> Result<(GrowthSeries, GrowthSeries)> {
    check_subquadratic(p)?;
    let double = grid
        .iter()
        .map(|&d| graded_reflection_double_sum(d, p))
        .collect::<Result<Vec<_>>>()?;
    let norms = grid
        .iter()
        .map(|&d| (1..=d).map(|n| 0.5f64.powf(p * n as f64)).sum())
        .collect();
    Ok((
        GrowthSeries::new(grid.to_vec(), double)?,
        GrowthSeries::new(grid.to_vec(), norms)?,
    ))
}

/// `A* T A` on coefficient space: `<(A*TA) e_n, e_n> = <T f_n, f_n>`.
pub fn analysis_conjugate(t: &ComplexMatrix, frame: &Frame) -> Result<ComplexMatrix> {
    let a = frame.synthesis().matrix;
    a.adjoint().try_mul(&t.try_mul(&a)?)
}

/// `A S A*` for an operator `S` on coefficient space.
pub fn synthesis_conjugate(s: &ComplexMatrix, frame: &Frame) -> Result<ComplexMatrix> {
    let a = frame.synthesis().matrix;
    a.try_mul(&s.try_mul(&a.adjoint())?)
}

/// `T* T`, for which `<T*T f, f> = ||T f||^2`.
pub fn gram_square(t: &ComplexMatrix) -> ComplexMatrix {
    &t.adjoint() * t
}

/// `sqrt(T)` for PSD `T`, for which `||sqrt(T) f||^2 = <T f, f>`.
pub fn positive_root(t: &ComplexMatrix) -> Result<ComplexMatrix> {
    psd_sqrt(t, STRUCTURAL_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criteria::{sum_diag, sum_double, sum_norms};
    use crate::linalg::{power_sum, schatten_norm_pow};

    #[test]
    fn log_weight_examples() {
        let h = log_weight_vector(1);
        assert!((h[0].re - 1.0 / 2f64.ln()).abs() < 1e-15);
        assert!((h[0].re - 1.0 / std::f64::consts::LN_2).abs() < 1e-15);
        let h = log_weight_vector(2);
        assert_eq!(h[1].re, 1.0 / (2f64.sqrt() * 3f64.ln()));
        let norms: Vec<f64> = [1, 10, 100, 1000].iter().map(|&d| log_weight_norm_sq(d)).collect();
        assert!(norms.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn rank_one_examples() {
        let t = rank_one(&basis_vector(3, 0)).unwrap();
        assert_eq!(t, ComplexMatrix::from_diag(&[1.0, 0.0, 0.0]));
        let r = FRAC_1_SQRT_2;
        let t = rank_one(&[C64::new(r, 0.0), C64::new(r, 0.0)]).unwrap();
        assert!(t.data().iter().all(|z| (z.re - 0.5).abs() < 1e-15 && z.im == 0.0));
        let h = log_weight_vector(6);
        let t = rank_one(&h).unwrap();
        let nh = norm(&h).powi(2);
        for p in [0.5, 1.0, 3.0] {
            let v = schatten_norm_pow(&t, p).unwrap().powf(1.0 / p);
            assert!((v - nh).abs() < 1e-12);
        }
        assert!(rank_one(&[C64::new(0.0, 0.0)]).is_err());
    }

    #[test]
    fn divergence_series_matches_dense_sum() {
        for d in [3usize, 7, 12] {
            let t = rank_one(&log_weight_vector(d)).unwrap();
            let dense = sum_norms(&t, &standard_basis(d), 1.3).unwrap().value;
            let series = divergence_demo_sum_norms(1.3, &[1, d]).unwrap();
            assert!((series.last() - dense).abs() < 1e-12 * dense);
        }
    }

    #[test]
    fn divergence_verdicts() {
        let one = divergence_demo_sum_norms(1.0, &DEFAULT_GRID).unwrap();
        assert_eq!(one.verdict, Verdict::DivergentTrend);
        assert!(one.partial_sums.windows(2).all(|w| w[0] < w[1]));
        for p in [0.5, 1.5] {
            assert_eq!(
                divergence_demo_sum_norms(p, &DEFAULT_GRID).unwrap().verdict,
                Verdict::DivergentTrend
            );
        }
        let slow = divergence_demo_sum_norms(1.9, &DEFAULT_GRID).unwrap();
        assert!(slow.growth_ratio() < one.growth_ratio());
        assert_eq!(control_series(&DEFAULT_GRID).unwrap().verdict, Verdict::BoundedTrend);
        assert!(divergence_demo_sum_norms(2.0, &DEFAULT_GRID).is_err());
    }

    #[test]
    fn classify_rules() {
        assert_eq!(classify(&[1.0, 2.0, 3.0, 4.0]), Verdict::DivergentTrend);
        assert_eq!(classify(&[1.0, 1.5, 1.6, 1.601]), Verdict::BoundedTrend);
        assert_eq!(classify(&[1.0, 1.1, 1.2, 1.3]), Verdict::Inconclusive);
        assert_eq!(classify(&[0.0, 0.0]), Verdict::BoundedTrend);
        let s = GrowthSeries::new(vec![1, 2, 3], vec![1.0, 2.0, 4.0]).unwrap();
        let rows = s.rows();
        assert_eq!(rows[0].increment_ratio, None);
        assert_eq!(rows[2].increment_ratio, Some(2.0));
        assert!(GrowthSeries::new(vec![2, 1], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn scaled_copies_examples() {
        let f = scaled_copies_frame(LambdaSpec::Constant, 3.0, 1.0, 5).unwrap();
        assert_eq!(f.counts, vec![1; 5]);
        assert_eq!(f.frame.bounds(), (1.0, 1.0));

        let f = scaled_copies_frame(LambdaSpec::PowerLaw, 3.0, 3.0, 12).unwrap();
        for (k, (&c, d)) in f.counts.iter().zip(&f.delta).enumerate() {
            let n = k + 1;
            assert_eq!(c, n * n);
            assert!((d - 1.0 / n as f64).abs() < 1e-15);
        }
        assert!(f.normalizations().iter().all(|x| (x - 1.0).abs() < 1e-12));
        let (lhs, rhs) = f.dual_evaluation();
        assert!((lhs - rhs).abs() <= 1e-12 * rhs);
        let (c1, c2) = f.frame.bounds();
        assert!(c1 >= 0.5 && c2 <= 2.0);

        let frame_sum = sum_norms(&f.operator(), &f.frame, 3.0).unwrap().value;
        assert!((frame_sum - lhs).abs() < 1e-12 * lhs);

        for spec in [LambdaSpec::PowerLaw, LambdaSpec::PowerLog] {
            let g = scaled_copies_frame(spec, 2.5, 0.7, 30).unwrap();
            assert!(g.within_constants());
        }
        assert!(scaled_copies_frame(LambdaSpec::PowerLaw, 2.0, 1.0, 4).is_err());
        assert_eq!("power_log".parse::<LambdaSpec>().unwrap(), LambdaSpec::PowerLog);
    }

    #[test]
    fn scaled_copies_growth_verdicts() {
        let (frame_trend, norm_trend) = scaled_copies_growth(LambdaSpec::PowerLaw, 3.0, 3.0, &DEFAULT_GRID).unwrap();
        assert_eq!(frame_trend.verdict, Verdict::BoundedTrend);
        assert_eq!(norm_trend.verdict, Verdict::DivergentTrend);
    }

    #[test]
    fn composed_operator_carries_frame_sums() {
        let onb = standard_basis(3);
        let t = crate::sampling::random_operator(3, 1);
        assert_eq!(compose_with_synthesis(&t, &onb).unwrap(), t);

        let f = scaled_copies_frame(LambdaSpec::PowerLaw, 3.0, 3.0, 5).unwrap();
        let s = compose_with_synthesis(&f.operator(), &f.frame).unwrap();
        let coeff = standard_basis(s.cols());
        let lhs: f64 = coeff.vectors().iter().map(|e| norm(&s.apply(e)).powf(3.0)).sum();
        let rhs = sum_norms(&f.operator(), &f.frame, 3.0).unwrap().value;
        assert!((lhs - rhs).abs() < 1e-10 * rhs);
        let rank = svd(&s).unwrap().singular_values.iter().filter(|&&x| x > 1e-10).count();
        assert!(rank <= f.frame.dim());
    }

    #[test]
    fn log_tail_examples() {
        let ltf = log_tail_frame(&ComplexMatrix::identity(2), 3).unwrap();
        let extra = ltf.extra_diag_terms(&ComplexMatrix::identity(2));
        for (n, z) in extra.iter().enumerate() {
            let expected = log_weight(n + 1).powi(2);
            assert!((z.re - expected).abs() < 1e-12 && z.im.abs() < 1e-12);
        }
        let (c1, c2) = ltf.closed_form_bounds();
        assert!((ltf.frame.lower_bound() - c1).abs() < 1e-10);
        assert!((ltf.frame.upper_bound() - c2).abs() < 1e-10);
        assert!((ltf.frame.lower_bound() - 1.0).abs() < 1e-12);

        let t = crate::sampling::random_operator(4, 3);
        let ltf = log_tail_frame(&t, 20).unwrap();
        for (a, b) in ltf.extra_diag_terms(&t).iter().zip(ltf.closed_form_terms()) {
            assert!((a - b).norm() < 1e-12);
        }
        let g = log_tail_diag_growth(ltf.form, 0.5, &DEFAULT_GRID).unwrap();
        assert_eq!(g.verdict, Verdict::DivergentTrend);
    }

    #[test]
    fn fallback_direction_for_traceless_operators() {
        let pauli = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let h = nondegenerate_direction(&pauli).unwrap();
        assert!(form(&pauli, &h).norm() > 0.5);
        let shift = shift_example(3).unwrap();
        let h = nondegenerate_direction(&shift).unwrap();
        assert!(form(&shift, &h).norm() > 0.1);
        assert!(nondegenerate_direction(&ComplexMatrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn shift_examples() {
        assert_eq!(
            shift_example(2).unwrap(),
            ComplexMatrix::from_real(2, 2, &[0.0, 0.0, 1.0, 0.0]).unwrap()
        );
        let t = shift_example(6).unwrap();
        for p in [0.3, 1.0, 2.5] {
            assert_eq!(sum_diag(&t, &standard_basis(6), p).unwrap().value, 0.0);
            assert!((schatten_norm_pow(&t, p).unwrap() - 5.0).abs() < 1e-12);
        }
        assert!((crate::linalg::operator_norm(&t).unwrap() - 1.0).abs() < 1e-15);
        assert!(shift_example(1).is_err());
    }

    #[test]
    fn graded_reflection_structure() {
        let g = graded_reflection(10).unwrap();
        assert!(g.unitary.unitarity_defect() < 1e-12);
        let ue1 = g.unitary.column(0);
        for (a, b) in ue1.iter().zip(&g.h1) {
            assert!((a.re - b).abs() < 1e-12 && a.im == 0.0);
        }
        let s = svd(&g.operator).unwrap().singular_values;
        for (n, x) in s.iter().enumerate() {
            assert!((x - 0.5f64.powi(n as i32 + 1)).abs() < 1e-14);
        }
        for p in [0.5, 1.0, 1.5] {
            let dense = sum_double(&g.operator, &standard_basis(10), p).unwrap().value;
            let structural = graded_reflection_double_sum(10, p).unwrap();
            assert!((dense - structural).abs() < 1e-12 * dense);
            let norm = power_sum(&s, p);
            assert!(norm <= 1.0 / (2f64.powf(p) - 1.0));
        }
    }

    #[test]
    fn graded_reflection_growth_p1() {
        let (double, norms) = graded_reflection_growth(1.0, &DEFAULT_GRID).unwrap();
        assert_eq!(double.verdict, Verdict::DivergentTrend);
        assert!(double.partial_sums.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(norms.verdict, Verdict::BoundedTrend);
        assert!(norms.last() <= 1.0);
    }

    #[test]
    fn conjugation_transfer_identities() {
        let t = crate::sampling::random_operator(3, 5);
        let frame = crate::frames::random_frame(3, 5, 4.0, 2).unwrap();
        let c = analysis_conjugate(&t, &frame).unwrap();
        for (n, f) in frame.vectors().iter().enumerate() {
            assert!((c[(n, n)] - form(&t, f)).norm() < 1e-14);
        }
        let onb = standard_basis(3);
        assert!((&analysis_conjugate(&t, &onb).unwrap() - &t).max_abs() < 1e-15);

        let s = gram_square(&t);
        for f in frame.vectors() {
            assert!((form(&s, f).re - norm(&t.apply(f)).powi(2)).abs() < 1e-14);
        }
        let psd = crate::sampling::random_psd(3, 6);
        let root = positive_root(&psd).unwrap();
        for k in 0..3 {
            let e = basis_vector(3, k);
            assert!((norm(&root.apply(&e)).powi(2) - psd[(k, k)].re).abs() < 1e-10);
        }
        assert!(positive_root(&ComplexMatrix::from_diag(&[1.0, -1.0])).is_err());
        let back = synthesis_conjugate(&ComplexMatrix::identity(5), &frame).unwrap();
        assert!((&back - frame.frame_operator()).max_abs() < 1e-14);
    }
}
