//! Finite frames.
//!
//! A frame is an ordered family `f_1..f_N` in `C^d` (repeats allowed) whose
//! frame operator `S = sum f_n f_n*` is invertible. The optimal frame bounds
//! are the extreme eigenvalues of `S`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, hermitian_eigen, inner, norm_sqr, orthonormal_completion, ComplexMatrix, C64, EIGEN_TOL};
use crate::sampling::{self, gaussian_matrix, gaussian_vector, rng_for, Stream};

/// Relative spanning threshold: a family is a frame when
/// `lambda_min(S) > SPANNING_TOL * lambda_max(S)`.
pub const SPANNING_TOL: f64 = 1e-10;

/// Attempts made by [`random_frame`] before giving up on a condition target.
pub const MAX_CONDITION_ATTEMPTS: usize = 50;

const PROBES: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FrameJson", into = "FrameJson")]
pub struct Frame {
    dim: usize,
    vectors: Vec<Vec<C64>>,
    frame_operator: ComplexMatrix,
    lower: f64,
    upper: f64,
}

/// Wire format: `{"dim": d, "vectors": [matrix, ...]}` with each vector a `d x 1` matrix.
#[derive(Serialize, Deserialize)]
struct FrameJson {
    dim: usize,
    vectors: Vec<ComplexMatrix>,
}

impl TryFrom<FrameJson> for Frame {
    type Error = Error;

    fn try_from(j: FrameJson) -> Result<Self> {
        let vectors = j
            .vectors
            .iter()
            .map(|m| {
                if m.cols() != 1 {
                    return Err(Error::Parse(format!(
                        "frame vectors must be column matrices, got {}x{}",
                        m.rows(),
                        m.cols()
                    )));
                }
                Ok(m.column(0))
            })
            .collect::<Result<Vec<_>>>()?;
        make_frame(vectors, j.dim, SPANNING_TOL)
    }
}

impl From<Frame> for FrameJson {
    fn from(f: Frame) -> Self {
        FrameJson {
            dim: f.dim,
            vectors: f
                .vectors
                .iter()
                .map(|v| ComplexMatrix::from_columns(std::slice::from_ref(v)).expect("nonempty"))
                .collect(),
        }
    }
}

/// `S = sum f_n f_n*`.
pub fn frame_operator(vectors: &[Vec<C64>], dim: usize) -> ComplexMatrix {
    let mut s = ComplexMatrix::zeros(dim, dim);
    for f in vectors {
        for i in 0..dim {
            if f[i] == C64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..dim {
                s[(i, j)] += f[i] * f[j].conj();
            }
        }
    }
    s
}

/// Builds a frame, caching its operator and bounds. Rejects families whose
/// smallest frame-operator eigenvalue is not above `tol * lambda_max`.
pub fn make_frame(vectors: Vec<Vec<C64>>, dim: usize, tol: f64) -> Result<Frame> {
    if dim == 0 || vectors.is_empty() {
        return Err(Error::EmptyMatrix {
            rows: dim,
            cols: vectors.len(),
        });
    }
    if let Some(v) = vectors.iter().find(|v| v.len() != dim) {
        return Err(Error::DimensionMismatch(format!(
            "frame vector of length {} in dimension {dim}",
            v.len()
        )));
    }
    if vectors.iter().flatten().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidArgument("frame vector has a non-finite entry".into()));
    }
    let s = frame_operator(&vectors, dim);
    let eig = hermitian_eigen(&s, EIGEN_TOL)?;
    let (lower, upper) = (eig.min(), eig.max());
    let threshold = tol * upper;
    if !(lower > threshold) {
        return Err(Error::NotSpanning {
            lambda_min: lower,
            threshold,
        });
    }
    Ok(Frame {
        dim,
        vectors,
        frame_operator: s,
        lower,
        upper,
    })
}

impl Frame {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[Vec<C64>] {
        &self.vectors
    }

    pub fn frame_operator(&self) -> &ComplexMatrix {
        &self.frame_operator
    }

    /// `(C1, C2)`.
    pub fn bounds(&self) -> (f64, f64) {
        (self.lower, self.upper)
    }

    pub fn lower_bound(&self) -> f64 {
        self.lower
    }

    pub fn upper_bound(&self) -> f64 {
        self.upper
    }

    pub fn condition(&self) -> f64 {
        self.upper / self.lower
    }

    pub fn is_parseval(&self, tol: f64) -> bool {
        (self.lower - 1.0).abs() <= tol && (self.upper - 1.0).abs() <= tol
    }

    /// `sum_n |<f, f_n>|^2`.
    pub fn analysis_energy(&self, f: &[C64]) -> f64 {
        self.vectors.iter().map(|v| inner(f, v).norm_sqr()).sum()
    }

    pub fn synthesis(&self) -> SynthesisOperator {
        synthesis(self)
    }

    /// Content hash of the ordered family.
    pub fn id(&self) -> String {
        self.synthesis().matrix.fingerprint()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("frame serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    fn scaled(&self, c: f64) -> Frame {
        let vectors = self.vectors.iter().map(|v| v.iter().map(|z| z * c).collect()).collect();
        Frame {
            dim: self.dim,
            vectors,
            frame_operator: self.frame_operator.scale_real(c * c),
            lower: self.lower * c * c,
            upper: self.upper * c * c,
        }
    }
}

/// The `d x N` matrix `A` with `A e_k = f_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisOperator {
    pub matrix: ComplexMatrix,
}

impl SynthesisOperator {
    pub fn apply(&self, coefficients: &[C64]) -> Vec<C64> {
        self.matrix.apply(coefficients)
    }

    /// Analysis map `f -> (<f, f_n>)_n`, i.e. `A*`.
    pub fn analysis(&self, f: &[C64]) -> Vec<C64> {
        self.matrix.adjoint().apply(f)
    }
}

pub fn synthesis(frame: &Frame) -> SynthesisOperator {
    SynthesisOperator {
        matrix: ComplexMatrix::from_columns(&frame.vectors).expect("frames are nonempty"),
    }
}

/// Measured quantities behind the synthesis-operator certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisCertificate {
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub synthesis_norm_sq: f64,
    pub lambda_min_aat: f64,
    pub lambda_max_aat: f64,
    pub rank: usize,
    pub nullity: usize,
    pub max_analysis_defect: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub violation: Option<String>,
}

/// Checks `C1 <= ||A||^2 <= C2`, `lambda_min(AA*) = C1 > 0` and the analysis
/// identity `||A* f||^2 = sum |<f, f_n>|^2` on seeded probes. Comparisons use
/// `tol * max(1, C2)`.
pub fn certify_synthesis(frame: &Frame, tol: f64) -> SynthesisCertificate {
    let a = frame.synthesis();
    let (c1, c2) = frame.bounds();
    let slack = tol * c2.max(1.0);
    let mut violations = Vec::new();

    let spectral = linalg::singular_values(&a.matrix);
    let (norm_sq, rank) = match &spectral {
        Ok(values) => {
            let s1 = values[0];
            let rank = values.iter().filter(|&&s| s > 1e-10 * s1).count();
            (s1 * s1, rank)
        }
        Err(e) => {
            violations.push(format!("svd of A failed: {e}"));
            (f64::NAN, 0)
        }
    };
    let aat = &a.matrix * &a.matrix.adjoint();
    let (lmin, lmax) = match hermitian_eigen(&aat, EIGEN_TOL) {
        Ok(e) => (e.min(), e.max()),
        Err(e) => {
            violations.push(format!("eigendecomposition of AA* failed: {e}"));
            (f64::NAN, f64::NAN)
        }
    };

    if !(norm_sq >= c1 - slack && norm_sq <= c2 + slack) {
        violations.push(format!("||A||^2 = {norm_sq} outside [{c1}, {c2}]"));
    }
    if !((lmin - c1).abs() <= slack && (lmax - c2).abs() <= slack) {
        violations.push(format!(
            "spectrum of AA* [{lmin}, {lmax}] differs from bounds [{c1}, {c2}]"
        ));
    }
    if !(lmin > 0.0) {
        violations.push(format!("AA* not invertible: lambda_min = {lmin}"));
    }

    let mut rng = rng_for(0, Stream::Probe);
    let mut defect = 0.0f64;
    for _ in 0..PROBES {
        let f = gaussian_vector(&mut rng, frame.dim);
        let lhs = norm_sqr(&a.analysis(&f));
        let rhs = frame.analysis_energy(&f);
        defect = defect.max((lhs - rhs).abs() / rhs.abs().max(1e-300));
    }
    if defect > tol {
        violations.push(format!("analysis identity defect {defect:e}"));
    }

    let passed = violations.is_empty();
    SynthesisCertificate {
        lower_bound: c1,
        upper_bound: c2,
        synthesis_norm_sq: norm_sq,
        lambda_min_aat: lmin,
        lambda_max_aat: lmax,
        rank,
        nullity: frame.len() - rank,
        max_analysis_defect: defect,
        tolerance: tol,
        passed,
        violation: (!passed).then(|| violations.join("; ")),
    }
}

/// `{S^{-1/2} f_n}`, the canonical Parseval frame.
pub fn canonical_parseval(frame: &Frame) -> Result<Frame> {
    let eig = hermitian_eigen(&frame.frame_operator, EIGEN_TOL)?;
    let inv_sqrt = eig.map(|m| 1.0 / m.sqrt());
    let vectors = frame.vectors.iter().map(|v| inv_sqrt.apply(v)).collect();
    make_frame(vectors, frame.dim, SPANNING_TOL)
}

/// Divides every vector by `sqrt(C2)`; new bounds `(C1/C2, 1)`.
pub fn rescale_upper_bound_one(frame: &Frame) -> Frame {
    let mut f = frame.scaled(1.0 / frame.upper.sqrt());
    f.upper = 1.0;
    f
}

/// Divides every vector by `sqrt(C1)`; new bounds `(1, C2/C1)`.
pub fn rescale_lower_bound_one(frame: &Frame) -> Frame {
    let mut f = frame.scaled(1.0 / frame.lower.sqrt());
    f.lower = 1.0;
    f
}

pub fn standard_basis(dim: usize) -> Frame {
    let vectors = (0..dim).map(|k| linalg::basis_vector(dim, k)).collect();
    make_frame(vectors, dim, SPANNING_TOL).expect("standard basis spans")
}

/// Multiplies `v` by the unimodular scalar making its first nonzero entry real positive.
fn fix_phase(v: &mut [C64]) {
    if let Some(k) = v.iter().position(|z| z.norm() > 0.0) {
        let r = v[k].norm();
        let u = v[k].conj() / r;
        v.iter_mut().for_each(|x| *x *= u);
        v[k] = C64::new(r, 0.0);
    }
}

/// Unitary matrix from Gram-Schmidt on a complex Gaussian matrix, columns
/// phase-normalized.
pub fn random_unitary(dim: usize, seed: u64) -> ComplexMatrix {
    let mut rng = rng_for(seed, Stream::Basis);
    let g = gaussian_matrix(&mut rng, dim, dim);
    let q = orthonormal_completion(&g.columns(), dim);
    let mut cols = q.columns();
    cols.iter_mut().for_each(|c| fix_phase(c));
    ComplexMatrix::from_columns(&cols).expect("nonempty")
}

pub fn random_onb(dim: usize, seed: u64) -> Frame {
    let vectors = random_unitary(dim, seed).columns();
    make_frame(vectors, dim, SPANNING_TOL).expect("unitary columns span")
}

/// Random frame of `count` vectors with `C2/C1 <= condition_target`.
///
/// Starts from a Parseval multiset of a random orthonormal basis (vector `k`
/// is basis vector `k mod dim`, scaled by one over the root of its
/// multiplicity) and adds a Gaussian perturbation, halving its size until the
/// condition target holds. A target of exactly 1 returns the canonical
/// Parseval frame of the first attempt.
pub fn random_frame(dim: usize, count: usize, condition_target: f64, seed: u64) -> Result<Frame> {
    if dim == 0 || count < dim {
        return Err(Error::InvalidArgument(format!(
            "need count >= dim >= 1, got dim {dim}, count {count}"
        )));
    }
    if condition_target.is_nan() || condition_target < 1.0 {
        return Err(Error::InvalidArgument(format!(
            "condition target {condition_target} is below 1"
        )));
    }
    let basis = random_unitary(dim, seed).columns();
    let base: Vec<Vec<C64>> = (0..count)
        .map(|k| {
            let j = k % dim;
            let mult = count / dim + usize::from(j < count % dim);
            let c = 1.0 / (mult as f64).sqrt();
            basis[j].iter().map(|z| z * c).collect()
        })
        .collect();
    let mut rng = rng_for(seed, Stream::Frame);
    let noise: Vec<Vec<C64>> = (0..count).map(|_| gaussian_vector(&mut rng, dim)).collect();
    let scale = 1.0 / (dim as f64).sqrt();

    let mut best = f64::INFINITY;
    let mut eps = 0.5;
    for attempt in 0..MAX_CONDITION_ATTEMPTS {
        let vectors: Vec<Vec<C64>> = base
            .iter()
            .zip(&noise)
            .map(|(b, g)| b.iter().zip(g).map(|(x, y)| x + y * (eps * scale)).collect())
            .collect();
        if let Ok(frame) = make_frame(vectors, dim, SPANNING_TOL) {
            if condition_target == 1.0 {
                return canonical_parseval(&frame);
            }
            let cond = frame.condition();
            if cond <= condition_target {
                return Ok(frame);
            }
            best = best.min(cond);
        }
        if attempt + 1 < MAX_CONDITION_ATTEMPTS {
            eps *= 0.5;
        }
    }
    Err(Error::ConditionUnattainable {
        target: condition_target,
        attempts: MAX_CONDITION_ATTEMPTS,
        best,
    })
}

/// Parseval frame drawn by [`random_frame`] then canonically normalized.
pub fn random_parseval_frame(dim: usize, count: usize, seed: u64) -> Result<Frame> {
    random_frame(dim, count, 1.0, seed)
}

/// Frame followed by an extra family; `S = S_a + S_b`.
pub fn union_frame(a: &Frame, extra: &[Vec<C64>]) -> Result<Frame> {
    if let Some(v) = extra.iter().find(|v| v.len() != a.dim) {
        return Err(Error::DimensionMismatch(format!(
            "cannot join a vector of length {} to a frame in dimension {}",
            v.len(),
            a.dim
        )));
    }
    let mut vectors = a.vectors.clone();
    vectors.extend_from_slice(extra);
    make_frame(vectors, a.dim, SPANNING_TOL)
}

/// Random unit probe vectors used by the frame inequality checks.
pub fn probe_vectors(dim: usize, count: usize, seed: u64) -> Vec<Vec<C64>> {
    (0..count)
        .map(|k| sampling::random_unit_vector(dim, sampling::trial_seed(seed, k)))
        .collect()
}
