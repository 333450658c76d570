//! Dense complex linear algebra.
//!
//! Everything here is small and dense: Hermitian eigendecomposition by cyclic
//! Jacobi rotations, an SVD built on top of it, Schatten norms, positive
//! square roots and the self-adjoint splittings `T = T1 + i T2` and
//! `S = (S1 - S2) + i (S3 - S4)`.
//!
//! Inner products are linear in the first argument: `<x, y> = sum x_i conj(y_i)`.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Relative tolerance used for equality-type checks.
pub const EQUALITY_TOL: f64 = 1e-9;
/// Absolute tolerance used for structural checks (Hermitian, unitary).
pub const STRUCTURAL_TOL: f64 = 1e-12;
/// Jacobi stopping threshold on the relative off-diagonal Frobenius mass.
pub const EIGEN_TOL: f64 = 1e-14;
/// Singular values below `NULL_FLOOR * max(rows, cols) * lambda_1` are
/// indistinguishable from rounding and reported as exact zeros.
pub const NULL_FLOOR: f64 = 4.0 * f64::EPSILON;
/// Sweep cap for the Jacobi eigensolver.
pub const MAX_SWEEPS: usize = 100;

const I: C64 = C64::new(0.0, 1.0);

/// Dense row-major complex matrix.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

/// Wire format: `{"rows": r, "cols": c, "re": [...], "im": [...]}`, row-major.
#[derive(Serialize, Deserialize)]
struct MatrixJson {
    rows: usize,
    cols: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl TryFrom<MatrixJson> for ComplexMatrix {
    type Error = Error;

    fn try_from(m: MatrixJson) -> Result<Self> {
        if m.re.len() != m.im.len() {
            return Err(Error::Parse(format!(
                "re has {} entries but im has {}",
                m.re.len(),
                m.im.len()
            )));
        }
        let data = m.re.iter().zip(&m.im).map(|(&re, &im)| C64::new(re, im)).collect();
        ComplexMatrix::new(m.rows, m.cols, data)
    }
}

impl From<ComplexMatrix> for MatrixJson {
    fn from(m: ComplexMatrix) -> Self {
        MatrixJson {
            rows: m.rows,
            cols: m.cols,
            re: m.data.iter().map(|z| z.re).collect(),
            im: m.data.iter().map(|z| z.im).collect(),
        }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.6e}{:+.6e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries, rejecting empty shapes and
    /// non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyMatrix { rows, cols });
        }
        if data.len() != rows * cols {
            return Err(Error::BadLength {
                len: data.len(),
                expected: rows * cols,
            });
        }
        if let Some(k) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite {
                row: k / cols,
                col: k % cols,
            });
        }
        Ok(ComplexMatrix { rows, cols, data })
    }

    /// Real-valued row-major constructor, convenient for literals.
    pub fn from_real(rows: usize, cols: usize, re: &[f64]) -> Result<Self> {
        Self::new(rows, cols, re.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix shape must be nonempty");
        ComplexMatrix {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diag(&vec![1.0; n])
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &x) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(x, 0.0);
        }
        m
    }

    pub fn from_complex_diag(diag: &[C64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &x) in diag.iter().enumerate() {
            m[(i, i)] = x;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Matrix whose `k`-th column is `columns[k]`.
    pub fn from_columns(columns: &[Vec<C64>]) -> Result<Self> {
        let Some(first) = columns.first() else {
            return Err(Error::EmptyMatrix { rows: 0, cols: 0 });
        };
        let rows = first.len();
        if let Some(bad) = columns.iter().find(|c| c.len() != rows) {
            return Err(Error::DimensionMismatch(format!(
                "column of length {} among columns of length {rows}",
                bad.len()
            )));
        }
        let cols = columns.len();
        let mut data = vec![C64::new(0.0, 0.0); rows * cols];
        for (j, c) in columns.iter().enumerate() {
            for (i, &z) in c.iter().enumerate() {
                data[i * cols + j] = z;
            }
        }
        Self::new(rows, cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn columns(&self) -> Vec<Vec<C64>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, c: C64) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * c).collect(),
        }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(C64::new(c, 0.0))
    }

    /// Matrix-vector product.
    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.cols, "vector length must equal column count");
        (0..self.rows)
            .map(|i| {
                let row = &self.data[i * self.cols..(i + 1) * self.cols];
                row.iter().zip(x).map(|(&a, &b)| a * b).sum()
            })
            .collect()
    }

    pub fn try_mul(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(self * other)
    }

    pub fn trace(&self) -> C64 {
        self.diagonal().into_iter().sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |H_ij - conj(H_ji)|`; infinite for non-square input.
    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Hermitian within `tol` scaled by `max(1, max|H_ij|)`.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_defect() <= tol * self.max_abs().max(1.0)
    }

    /// `max |(U*U - I)_ij|`.
    pub fn unitarity_defect(&self) -> f64 {
        let g = &self.adjoint() * self;
        (&g - &ComplexMatrix::identity(g.rows)).max_abs()
    }

    /// Short content hash used to reference operators and frames in reports.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update((self.rows as u64).to_le_bytes());
        hasher.update((self.cols as u64).to_le_bytes());
        for z in &self.data {
            hasher.update(z.re.to_bits().to_le_bytes());
            hasher.update(z.im.to_bits().to_le_bytes());
        }
        let digest = hasher.finalize();
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("matrix serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "inner dimensions must agree");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// `<x, y> = sum x_i conj(y_i)`.
pub fn inner(x: &[C64], y: &[C64]) -> C64 {
    assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a * b.conj()).sum()
}

pub fn norm(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn norm_sqr(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum()
}

/// Standard basis vector `e_k` of length `dim`.
pub fn basis_vector(dim: usize, k: usize) -> Vec<C64> {
    let mut e = vec![C64::new(0.0, 0.0); dim];
    e[k] = C64::new(1.0, 0.0);
    e
}

/// Eigenpairs of a Hermitian matrix, eigenvalues nonincreasing and
/// eigenvectors stored as the columns of a unitary matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn min(&self) -> f64 {
        *self.values.last().expect("nonempty spectrum")
    }

    pub fn max(&self) -> f64 {
        self.values[0]
    }

    /// `V diag(f(mu)) V*`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let fv: Vec<f64> = self.values.iter().map(|&m| f(m)).collect();
        let v = &self.vectors;
        ComplexMatrix::from_fn(n, n, |i, j| (0..n).map(|k| v[(i, k)] * v[(j, k)].conj() * fv[k]).sum())
    }
}

fn off_diagonal_mass(a: &ComplexMatrix) -> f64 {
    let n = a.rows;
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
///
/// Stops once the off-diagonal Frobenius mass drops below `tol * ||H||_F`.
/// Input must be Hermitian to `STRUCTURAL_TOL` (relative to its largest entry).
pub fn hermitian_eigen(h: &ComplexMatrix, tol: f64) -> Result<HermitianEigen> {
    if !h.is_square() {
        return Err(Error::NotSquare {
            rows: h.rows,
            cols: h.cols,
        });
    }
    let defect = h.hermitian_defect();
    if defect > STRUCTURAL_TOL * h.max_abs().max(1.0) {
        return Err(Error::NotHermitian { defect });
    }
    let n = h.rows;
    // symmetrize so rounding asymmetry cannot leak into the rotations
    let mut a = ComplexMatrix::from_fn(n, n, |i, j| (h[(i, j)] + h[(j, i)].conj()) * 0.5);
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm();

    let mut sweeps = 0;
    if scale > 0.0 && n > 1 {
        loop {
            let off = off_diagonal_mass(&a);
            if off <= tol * scale {
                break;
            }
            if sweeps == MAX_SWEEPS {
                return Err(Error::NoConvergence {
                    sweeps,
                    residual: off / scale,
                });
            }
            sweeps += 1;
            for p in 0..n - 1 {
                for q in p + 1..n {
                    rotate(&mut a, &mut v, p, q);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[j].total_cmp(&diag[i]));
    let values = order.iter().map(|&i| diag[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(HermitianEigen { values, vectors })
}

/// One Jacobi rotation annihilating `a[p][q]`; accumulates into `v`.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let g = a[(p, q)];
    let r = g.norm();
    if r == 0.0 {
        return;
    }
    let phase = g / r;
    let alpha = a[(p, p)].re;
    let beta = a[(q, q)].re;
    let tau = (beta - alpha) / (2.0 * r);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    // G = [[c, s e^{i phi}], [-s e^{-i phi}, c]] on the (p, q) plane
    let g_pq = phase * s;
    let g_qp = -phase.conj() * s;
    let n = a.rows;

    // A <- A G
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c + akq * g_qp;
        a[(k, q)] = akp * g_pq + akq * c;
    }
    // A <- G* A
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c + aqk * g_qp.conj();
        a[(q, k)] = apk * g_pq.conj() + aqk * c;
    }
    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
    // V <- V G
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c + vkq * g_qp;
        v[(k, q)] = vkp * g_pq + vkq * c;
    }
}

/// Orthonormalizes `vectors` (modified Gram-Schmidt, two passes) and completes
/// them to a unitary `dim x dim` matrix with standard basis vectors.
/// Vectors that are numerically dependent on earlier ones are dropped.
pub fn orthonormal_completion(vectors: &[Vec<C64>], dim: usize) -> ComplexMatrix {
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(dim);
    let push = |mut x: Vec<C64>, basis: &mut Vec<Vec<C64>>, floor: f64| {
        let start = norm(&x);
        if start == 0.0 {
            return;
        }
        for _ in 0..2 {
            for b in basis.iter() {
                let c = inner(&x, b);
                for (xi, bi) in x.iter_mut().zip(b) {
                    *xi -= c * bi;
                }
            }
        }
        let nx = norm(&x);
        if nx > floor * start {
            x.iter_mut().for_each(|z| *z /= nx);
            basis.push(x);
        }
    };
    for x in vectors {
        if basis.len() == dim {
            break;
        }
        push(x.clone(), &mut basis, 1e-8);
    }
    for k in 0..dim {
        if basis.len() == dim {
            break;
        }
        push(basis_vector(dim, k), &mut basis, 1e-3);
    }
    debug_assert_eq!(basis.len(), dim);
    ComplexMatrix::from_columns(&basis).expect("nonempty basis")
}

/// Canonical decomposition `T = sum_n s_n <., e_n> sigma_n`.
///
/// `left_vectors` holds the `sigma_n` and `right_vectors` the `e_n` as columns.
/// There are `min(rows, cols)` singular values, zeros included.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub singular_values: Vec<f64>,
    pub left_vectors: ComplexMatrix,
    pub right_vectors: ComplexMatrix,
}

impl SpectralData {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let rows = self.left_vectors.rows();
        let cols = self.right_vectors.rows();
        let u = &self.left_vectors;
        let v = &self.right_vectors;
        ComplexMatrix::from_fn(rows, cols, |i, j| {
            self.singular_values
                .iter()
                .enumerate()
                .map(|(k, &s)| u[(i, k)] * v[(j, k)].conj() * s)
                .sum()
        })
    }

    /// Right singular vectors as a family of columns.
    pub fn right_basis(&self) -> Vec<Vec<C64>> {
        self.right_vectors.columns()
    }
}

struct TallSpectrum {
    values: Vec<f64>,
    vectors: ComplexMatrix,
    images: Vec<Vec<C64>>,
}

/// Right singular vectors of a tall or square `T` with their images `T v_k`,
/// sorted by `lambda_k = ||T v_k||`. That norm is accurate to rounding in `T`
/// itself, whereas `sqrt(mu_k)` only resolves values above `sqrt(eps) ||T||`.
fn tall_spectrum(t: &ComplexMatrix) -> Result<TallSpectrum> {
    let gram = &t.adjoint() * t;
    let eig = hermitian_eigen(&gram, EIGEN_TOL)?;
    let n = t.cols;
    let mut images: Vec<Option<Vec<C64>>> = (0..n).map(|k| Some(t.apply(&eig.vectors.column(k)))).collect();
    let raw: Vec<f64> = images.iter().map(|v| norm(v.as_ref().expect("present"))).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| raw[j].total_cmp(&raw[i]));
    let floor = NULL_FLOOR * (t.rows.max(t.cols) as f64) * raw[order[0]];
    Ok(TallSpectrum {
        values: order
            .iter()
            .map(|&k| if raw[k] <= floor { 0.0 } else { raw[k] })
            .collect(),
        vectors: ComplexMatrix::from_fn(n, n, |i, j| eig.vectors[(i, order[j])]),
        images: order.iter().map(|&k| images[k].take().expect("each once")).collect(),
    })
}

/// Singular value decomposition via the eigendecomposition of the Gram matrix
/// `T*T` (or `T T*` for wide input).
pub fn svd(t: &ComplexMatrix) -> Result<SpectralData> {
    if t.rows < t.cols {
        let s = svd(&t.adjoint())?;
        return Ok(SpectralData {
            singular_values: s.singular_values,
            left_vectors: s.right_vectors,
            right_vectors: s.left_vectors,
        });
    }
    let spec = tall_spectrum(t)?;
    let rank_tol = 1e-12 * spec.values[0];
    let lefts: Vec<Vec<C64>> = spec
        .values
        .iter()
        .zip(&spec.images)
        .take_while(|(&v, _)| v > rank_tol && v > 0.0)
        .map(|(&v, image)| image.iter().map(|z| z / v).collect())
        .collect();
    Ok(SpectralData {
        left_vectors: orthonormal_completion(&lefts, t.rows),
        singular_values: spec.values,
        right_vectors: spec.vectors,
    })
}

/// The `min(rows, cols)` singular values, without forming singular vectors on
/// the long side.
pub fn singular_values(t: &ComplexMatrix) -> Result<Vec<f64>> {
    if t.rows < t.cols {
        Ok(tall_spectrum(&t.adjoint())?.values)
    } else {
        Ok(tall_spectrum(t)?.values)
    }
}

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if p.is_finite() && p > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidExponent(p))
    }
}

/// `sum_n s_n^p` over a list of singular values.
pub fn power_sum(values: &[f64], p: f64) -> f64 {
    values.iter().map(|&s| s.powf(p)).sum()
}

/// `||T||_p^p`.
pub fn schatten_norm_pow(t: &ComplexMatrix, p: f64) -> Result<f64> {
    check_exponent(p)?;
    Ok(power_sum(&singular_values(t)?, p))
}

/// `||T||_p = (sum s_n^p)^(1/p)`.
pub fn schatten_norm(t: &ComplexMatrix, p: f64) -> Result<f64> {
    Ok(schatten_norm_pow(t, p)?.powf(1.0 / p))
}

/// Largest singular value.
pub fn operator_norm(t: &ComplexMatrix) -> Result<f64> {
    Ok(singular_values(t)?[0])
}

fn spectral_floor(eig: &HermitianEigen, tol: f64) -> Result<()> {
    let min = eig.min();
    let scale = eig.values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    if min < -tol * scale {
        return Err(Error::NotPositive { min_eigenvalue: min });
    }
    Ok(())
}

/// Whether a Hermitian matrix is PSD up to `tol` (relative to its spectral radius).
pub fn is_psd(h: &ComplexMatrix, tol: f64) -> bool {
    hermitian_eigen(h, EIGEN_TOL)
        .map(|e| spectral_floor(&e, tol).is_ok())
        .unwrap_or(false)
}

/// Positive square root of a PSD matrix. Eigenvalues in `[-tol, 0)` (relative to
/// the spectral radius) are clamped to zero.
pub fn psd_sqrt(s: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix> {
    psd_power(s, 0.5, tol)
}

/// `S^p` for PSD `S`, formed in the eigenbasis.
pub fn psd_power(s: &ComplexMatrix, p: f64, tol: f64) -> Result<ComplexMatrix> {
    check_exponent(p)?;
    let eig = hermitian_eigen(s, EIGEN_TOL)?;
    spectral_floor(&eig, tol)?;
    Ok(eig.map(|m| m.max(0.0).powf(p)))
}

/// `<T e, e>^p - <T^p e, e>` for PSD `T`, unit `e` and `0 < p <= 1`; nonnegative
/// by operator concavity of `x^p`.
pub fn jensen_gap(t: &ComplexMatrix, e: &[C64], p: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::ExponentOutOfRange {
            p,
            range: "(0, 1]",
            rule: "the Jensen-type inequality",
        });
    }
    if e.len() != t.cols {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} against a {}x{} operator",
            e.len(),
            t.rows,
            t.cols
        )));
    }
    let tp = psd_power(t, p, STRUCTURAL_TOL)?;
    let lhs = inner(&tp.apply(e), e).re;
    let rhs = inner(&t.apply(e), e).re.max(0.0).powf(p);
    Ok(rhs - lhs)
}

/// `T = T1 + i T2` with `T1 = (T + T*)/2`, `T2 = (T - T*)/(2i)`, both Hermitian.
#[derive(Debug, Clone)]
pub struct SelfAdjointParts {
    pub t1: ComplexMatrix,
    pub t2: ComplexMatrix,
}

impl SelfAdjointParts {
    pub fn recombine(&self) -> ComplexMatrix {
        &self.t1 + &self.t2.scale(I)
    }
}

pub fn self_adjoint_parts(t: &ComplexMatrix) -> Result<SelfAdjointParts> {
    if !t.is_square() {
        return Err(Error::NotSquare {
            rows: t.rows,
            cols: t.cols,
        });
    }
    let n = t.rows;
    let t1 = ComplexMatrix::from_fn(n, n, |i, j| (t[(i, j)] + t[(j, i)].conj()) * 0.5);
    let t2 = ComplexMatrix::from_fn(n, n, |i, j| (t[(i, j)] - t[(j, i)].conj()) * (-0.5 * I));
    Ok(SelfAdjointParts { t1, t2 })
}

/// `S = (S1 - S2) + i (S3 - S4)` with every part PSD: the positive and
/// negative spectral halves of the two self-adjoint parts.
#[derive(Debug, Clone)]
pub struct PositiveParts {
    pub real_pos: ComplexMatrix,
    pub real_neg: ComplexMatrix,
    pub imag_pos: ComplexMatrix,
    pub imag_neg: ComplexMatrix,
}

impl PositiveParts {
    pub fn as_array(&self) -> [&ComplexMatrix; 4] {
        [&self.real_pos, &self.real_neg, &self.imag_pos, &self.imag_neg]
    }

    pub fn recombine(&self) -> ComplexMatrix {
        let re = &self.real_pos - &self.real_neg;
        let im = &self.imag_pos - &self.imag_neg;
        &re + &im.scale(I)
    }
}

pub fn positive_four_parts(s: &ComplexMatrix) -> Result<PositiveParts> {
    let parts = self_adjoint_parts(s)?;
    let split = |h: &ComplexMatrix| -> Result<(ComplexMatrix, ComplexMatrix)> {
        let eig = hermitian_eigen(h, EIGEN_TOL)?;
        Ok((eig.map(|m| m.max(0.0)), eig.map(|m| (-m).max(0.0))))
    };
    let (real_pos, real_neg) = split(&parts.t1)?;
    let (imag_pos, imag_neg) = split(&parts.t2)?;
    Ok(PositiveParts {
        real_pos,
        real_neg,
        imag_pos,
        imag_neg,
    })
}

/// `tr(TS) = sum_n <T S e_n, e_n>`.
pub fn trace_pairing(t: &ComplexMatrix, s: &ComplexMatrix) -> Result<C64> {
    if !t.is_square() || t.cols != s.rows || s.cols != t.rows {
        return Err(Error::DimensionMismatch(format!(
            "trace pairing of {}x{} with {}x{}",
            t.rows, t.cols, s.rows, s.cols
        )));
    }
    Ok(t.try_mul(s)?.trace())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn rejects_bad_shapes_and_nan() {
        assert!(matches!(
            ComplexMatrix::new(0, 2, vec![]),
            Err(Error::EmptyMatrix { .. })
        ));
        assert!(matches!(
            ComplexMatrix::new(2, 2, vec![c(0.0, 0.0); 3]),
            Err(Error::BadLength { .. })
        ));
        assert_eq!(
            ComplexMatrix::new(1, 2, vec![c(0.0, 0.0), c(f64::NAN, 0.0)]),
            Err(Error::NonFinite { row: 0, col: 1 })
        );
    }

    #[test]
    fn eigen_diagonal_is_permuted_identity() {
        let h = ComplexMatrix::from_diag(&[1.0, 2.0, 3.0]);
        let e = hermitian_eigen(&h, EIGEN_TOL).unwrap();
        assert_eq!(e.values, vec![3.0, 2.0, 1.0]);
        for (j, k) in [2usize, 1, 0].into_iter().enumerate() {
            assert!((e.vectors[(k, j)].norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn eigen_two_by_two_examples() {
        let h = ComplexMatrix::from_real(2, 2, &[2.0, 1.0, 1.0, 2.0]).unwrap();
        let e = hermitian_eigen(&h, 1e-12).unwrap();
        assert!(close(e.values[0], 3.0, 1e-14) && close(e.values[1], 1.0, 1e-14));

        let pauli = ComplexMatrix::new(2, 2, vec![c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]).unwrap();
        let e = hermitian_eigen(&pauli, 1e-12).unwrap();
        assert!(close(e.values[0], 1.0, 1e-14) && close(e.values[1], -1.0, 1e-14));
        for j in 0..2 {
            let v = e.vectors.column(j);
            let hv = pauli.apply(&v);
            for (a, b) in hv.iter().zip(&v) {
                assert!((a - b * e.values[j]).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn eigen_rejects_non_hermitian() {
        let t = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        match hermitian_eigen(&t, 1e-12) {
            Err(Error::NotHermitian { defect }) => assert_eq!(defect, 1.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn eigen_reports_non_convergence() {
        // tolerance zero with a nontrivial matrix may converge exactly; force
        // a failure with a negative tolerance instead
        let h = ComplexMatrix::from_real(2, 2, &[2.0, 1.0, 1.0, 2.0]).unwrap();
        assert!(matches!(
            hermitian_eigen(&h, -1.0),
            Err(Error::NoConvergence { sweeps: MAX_SWEEPS, .. })
        ));
    }

    #[test]
    fn svd_examples() {
        let s = singular_values(&ComplexMatrix::identity(3)).unwrap();
        assert_eq!(s, vec![1.0; 3]);
        let s = singular_values(&ComplexMatrix::from_real(2, 2, &[0.0, 2.0, 0.0, 0.0]).unwrap()).unwrap();
        assert!(close(s[0], 2.0, 1e-15) && s[1] == 0.0);
        let s = singular_values(&ComplexMatrix::from_real(2, 2, &[3.0, 0.0, 4.0, 0.0]).unwrap()).unwrap();
        assert!(close(s[0], 5.0, 1e-15) && s[1] == 0.0);
    }

    #[test]
    fn svd_wide_and_tall_agree() {
        let t = ComplexMatrix::from_fn(2, 3, |i, j| c((i + 2 * j) as f64, (i * j) as f64 - 1.0));
        let a = svd(&t).unwrap();
        let b = svd(&t.adjoint()).unwrap();
        for (x, y) in a.singular_values.iter().zip(&b.singular_values) {
            assert!(close(*x, *y, 1e-13));
        }
        let r = a.reconstruct();
        assert!((&r - &t).frobenius_norm() < 1e-12 * t.frobenius_norm());
        assert!(a.left_vectors.unitarity_defect() < 1e-12);
        assert!(a.right_vectors.unitarity_defect() < 1e-12);
    }

    #[test]
    fn schatten_examples() {
        let t = ComplexMatrix::from_diag(&[3.0, 4.0]);
        assert!(close(schatten_norm(&t, 2.0).unwrap(), 5.0, 1e-15));
        for p in [0.5, 1.0, 3.0, 7.5] {
            let id = ComplexMatrix::identity(4);
            assert!(close(schatten_norm(&id, p).unwrap(), 4f64.powf(1.0 / p), 1e-14));
        }
        let t = ComplexMatrix::from_diag(&[1.0, 0.5, 0.25]);
        assert!(close(schatten_norm(&t, 1.0).unwrap(), 1.75, 1e-15));
        assert_eq!(schatten_norm(&t, 0.0), Err(Error::InvalidExponent(0.0)));
        assert!(schatten_norm(&t, -1.0).is_err());
        assert_eq!(schatten_norm(&ComplexMatrix::zeros(3, 3), 2.0).unwrap(), 0.0);
    }

    #[test]
    fn operator_norm_examples() {
        assert!(close(
            operator_norm(&ComplexMatrix::from_diag(&[2.0, 7.0, 1.0])).unwrap(),
            7.0,
            1e-15
        ));
        assert_eq!(operator_norm(&ComplexMatrix::zeros(3, 3)).unwrap(), 0.0);
        let t = ComplexMatrix::from_real(2, 2, &[0.0, 2.0, 0.0, 0.0]).unwrap();
        assert!(close(operator_norm(&t).unwrap(), 2.0, 1e-15));
    }

    #[test]
    fn psd_sqrt_examples() {
        let r = psd_sqrt(&ComplexMatrix::from_diag(&[4.0, 9.0]), 1e-12).unwrap();
        assert!((&r - &ComplexMatrix::from_diag(&[2.0, 3.0])).max_abs() < 1e-15);
        let r = psd_sqrt(&ComplexMatrix::identity(3), 1e-12).unwrap();
        assert!((&r - &ComplexMatrix::identity(3)).max_abs() < 1e-15);

        // [[2,1],[1,2]] = Q diag(3,1) Q* with Q = [[1,1],[1,-1]]/sqrt2
        let s = ComplexMatrix::from_real(2, 2, &[2.0, 1.0, 1.0, 2.0]).unwrap();
        let r = psd_sqrt(&s, 1e-12).unwrap();
        let (a, b) = (3f64.sqrt(), 1.0);
        let expected =
            ComplexMatrix::from_real(2, 2, &[(a + b) / 2.0, (a - b) / 2.0, (a - b) / 2.0, (a + b) / 2.0]).unwrap();
        assert!((&r - &expected).max_abs() < 1e-14);
        assert!((&(&r * &r) - &s).frobenius_norm() < 1e-13 * s.frobenius_norm());
    }

    #[test]
    fn psd_sqrt_rejects_negative() {
        let s = ComplexMatrix::from_diag(&[1.0, -0.5]);
        assert_eq!(psd_sqrt(&s, 1e-12), Err(Error::NotPositive { min_eigenvalue: -0.5 }));
        // tiny negative rounding is clamped
        let s = ComplexMatrix::from_diag(&[1.0, -1e-15]);
        assert!(psd_sqrt(&s, 1e-12).is_ok());
    }

    #[test]
    fn self_adjoint_parts_examples() {
        let h = ComplexMatrix::from_real(2, 2, &[1.0, 2.0, 2.0, -3.0]).unwrap();
        let parts = self_adjoint_parts(&h).unwrap();
        assert_eq!(parts.t1, h);
        assert_eq!(parts.t2.max_abs(), 0.0);

        let it = ComplexMatrix::identity(3).scale(I);
        let parts = self_adjoint_parts(&it).unwrap();
        assert_eq!(parts.t1.max_abs(), 0.0);
        assert!((&parts.t2 - &ComplexMatrix::identity(3)).max_abs() < 1e-16);

        // oracle: T1 = [[0,1/2],[1/2,0]], T2 = (T - T*)/(2i) = [[0,-i/2],[i/2,0]]
        let t = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        let parts = self_adjoint_parts(&t).unwrap();
        let t1 = ComplexMatrix::from_real(2, 2, &[0.0, 0.5, 0.5, 0.0]).unwrap();
        let t2 = ComplexMatrix::new(2, 2, vec![c(0.0, 0.0), c(0.0, -0.5), c(0.0, 0.5), c(0.0, 0.0)]).unwrap();
        assert_eq!(parts.t1, t1);
        assert_eq!(parts.t2, t2);
        assert_eq!(parts.recombine(), t);
        assert!(matches!(
            self_adjoint_parts(&ComplexMatrix::zeros(2, 3)),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn four_parts_examples() {
        let s = ComplexMatrix::from_real(2, 2, &[2.0, 1.0, 1.0, 2.0]).unwrap();
        let parts = positive_four_parts(&s).unwrap();
        assert!((&parts.real_pos - &s).max_abs() < 1e-14);
        for z in [&parts.real_neg, &parts.imag_pos, &parts.imag_neg] {
            assert!(z.max_abs() < 1e-14);
        }

        let s = ComplexMatrix::from_diag(&[1.0, -1.0]);
        let parts = positive_four_parts(&s).unwrap();
        assert_eq!(parts.real_pos, ComplexMatrix::from_diag(&[1.0, 0.0]));
        assert_eq!(parts.real_neg, ComplexMatrix::from_diag(&[0.0, 1.0]));

        let s = ComplexMatrix::from_diag(&[1.0, -1.0]).scale(I);
        let parts = positive_four_parts(&s).unwrap();
        assert!(parts.real_pos.max_abs() < 1e-16 && parts.real_neg.max_abs() < 1e-16);
        assert!((&parts.imag_pos - &ComplexMatrix::from_diag(&[1.0, 0.0])).max_abs() < 1e-15);
        assert!((&parts.imag_neg - &ComplexMatrix::from_diag(&[0.0, 1.0])).max_abs() < 1e-15);
        assert!((&parts.recombine() - &s).max_abs() < 1e-15);
    }

    #[test]
    fn trace_pairing_examples() {
        let id = ComplexMatrix::identity(3);
        assert_eq!(trace_pairing(&id, &id).unwrap(), c(3.0, 0.0));
        let t = ComplexMatrix::from_diag(&[1.0, 2.0]);
        let s = ComplexMatrix::from_diag(&[3.0, 4.0]);
        assert_eq!(trace_pairing(&t, &s).unwrap(), c(11.0, 0.0));
        assert!(matches!(
            trace_pairing(&t, &ComplexMatrix::identity(3)),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let t = ComplexMatrix::new(
            1,
            3,
            vec![
                c(0.1, -0.0),
                c(1e-310, 123_456_789.123_456_79),
                c(-2.0f64.sqrt(), f64::MAX),
            ],
        )
        .unwrap();
        let s = t.to_json();
        let back = ComplexMatrix::from_json(&s).unwrap();
        for (a, b) in t.data().iter().zip(back.data()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
        assert!(s.starts_with(r#"{"rows":1,"cols":3,"re":["#));
    }

    #[test]
    fn json_rejects_malformed() {
        assert!(ComplexMatrix::from_json(r#"{"rows":2,"cols":2,"re":[1,2,3,4],"im":[0]}"#).is_err());
        assert!(ComplexMatrix::from_json(r#"{"rows":2,"cols":2,"re":[1],"im":[0]}"#).is_err());
        assert!(ComplexMatrix::from_json("not json").is_err());
    }
}
