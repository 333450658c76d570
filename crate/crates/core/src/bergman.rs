//! The Bergman space of the unit disk, truncated to polynomials of degree `< d`.
//!
//! Functions are represented by coefficients in the orthonormal monomial basis
//! `e_n(z) = sqrt(n+1) z^n`, so `K_w` has coefficients `sqrt(n+1) conj(w)^n`
//! and the normalized kernel is `k_w = (1 - |w|^2) K_w`. The area measure `dA`
//! is normalized to total mass one and `d lambda = dA / (1 - |w|^2)^2`.

use std::f64::consts::PI;

use gauss_quad::legendre::GaussLegendre;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::{make_frame, Frame, SPANNING_TOL};
use crate::linalg::{norm, norm_sqr, ComplexMatrix, C64};

/// Default radial cutoff for quadrature.
pub const DEFAULT_RMAX: f64 = 0.995;
/// Default stencil spacing for the subharmonicity check.
pub const DEFAULT_GRID_STEP: f64 = 0.01;

fn check_disk(z: C64) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() && z.norm() < 1.0 {
        Ok(())
    } else {
        Err(Error::OutsideDisk(format!("{z}")))
    }
}

/// `K(z, w) = 1 / (1 - z conj(w))^2`.
pub fn bergman_kernel(z: C64, w: C64) -> Result<C64> {
    check_disk(z)?;
    check_disk(w)?;
    let q = C64::new(1.0, 0.0) - z * w.conj();
    Ok(C64::new(1.0, 0.0) / (q * q))
}

/// Coefficients of the normalized kernel `k_w` together with the squared norm
/// of the discarded tail, `||k_w||^2 - sum_{n<d} |c_n|^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelCoefficients {
    pub coefficients: Vec<C64>,
    pub tail: f64,
}

/// `(1 - |w|^2) sqrt(n+1) conj(w)^n`, `n < d`. With `x = |w|^2` the tail is
/// `(1-x)^2 sum_{n>=d} (n+1) x^n = (d+1) x^d - d x^(d+1)`.
pub fn kernel_coefficients(w: C64, d: usize) -> Result<KernelCoefficients> {
    check_disk(w)?;
    let x = w.norm_sqr();
    let coefficients = unnormalized_coefficients(w, d)
        .into_iter()
        .map(|c| c * (1.0 - x))
        .collect();
    let dd = d as f64;
    let tail = (x.powi(d as i32) * ((dd + 1.0) - dd * x)).max(0.0);
    Ok(KernelCoefficients { coefficients, tail })
}

/// `sqrt(n+1) conj(w)^n`, `n < d`: the coefficients of `K_w`.
pub fn unnormalized_coefficients(w: C64, d: usize) -> Vec<C64> {
    let cw = w.conj();
    let mut power = C64::new(1.0, 0.0);
    (0..d)
        .map(|n| {
            let c = power * ((n + 1) as f64).sqrt();
            power *= cw;
            c
        })
        .collect()
}

/// Evaluates `sum c_n sqrt(n+1) z^n`.
pub fn evaluate(coefficients: &[C64], z: C64) -> C64 {
    let mut power = C64::new(1.0, 0.0);
    let mut acc = C64::new(0.0, 0.0);
    for (n, c) in coefficients.iter().enumerate() {
        acc += c * power * ((n + 1) as f64).sqrt();
        power *= z;
    }
    acc
}

/// `|z - w| / |1 - conj(z) w|`.
pub fn pseudo_hyperbolic(z: C64, w: C64) -> Result<f64> {
    check_disk(z)?;
    check_disk(w)?;
    Ok(((z - w) / (C64::new(1.0, 0.0) - z.conj() * w)).norm())
}

/// `beta(z, w) = atanh(rho(z, w)) = 1/2 log((1 + rho) / (1 - rho))`.
pub fn bergman_metric(z: C64, w: C64) -> Result<f64> {
    Ok(pseudo_hyperbolic(z, w)?.min(1.0).atanh())
}

/// Disk automorphism `w -> (w - a) / (1 - conj(a) w)`.
pub fn mobius(a: C64, w: C64) -> Result<C64> {
    check_disk(a)?;
    check_disk(w)?;
    Ok((w - a) / (C64::new(1.0, 0.0) - a.conj() * w))
}

/// Truncated Bergman space of polynomials of degree `< degree`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TruncatedBergman {
    pub degree: usize,
}

impl TruncatedBergman {
    pub fn new(degree: usize) -> Result<Self> {
        if degree == 0 {
            return Err(Error::InvalidArgument("degree must be at least 1".into()));
        }
        Ok(TruncatedBergman { degree })
    }

    /// `sqrt(n+1)`, `n < degree`.
    pub fn onb_scaling(&self) -> Vec<f64> {
        (0..self.degree).map(|n| ((n + 1) as f64).sqrt()).collect()
    }

    /// `[<e_m, e_n>]` computed with the quadrature rule.
    pub fn monomial_gram(&self, quad: &DiskQuadrature) -> ComplexMatrix {
        let d = self.degree;
        let scaling = self.onb_scaling();
        ComplexMatrix::from_fn(d, d, |m, n| {
            let terms: Vec<C64> = quad
                .nodes
                .iter()
                .zip(&quad.weights_da)
                .map(|(z, wt)| z.powu(m as u32) * z.conj().powu(n as u32) * *wt)
                .collect();
            let re: Vec<f64> = terms.iter().map(|t| t.re).collect();
            let im: Vec<f64> = terms.iter().map(|t| t.im).collect();
            C64::new(pairwise_sum(&re), pairwise_sum(&im)) * (scaling[m] * scaling[n])
        })
    }
}

/// Pairwise (cascade) summation; deterministic for a given slice order.
pub fn pairwise_sum(x: &[f64]) -> f64 {
    if x.len() <= 16 {
        return x.iter().sum();
    }
    let (a, b) = x.split_at(x.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// Tensor rule on `|w| <= rmax`: Gauss-Legendre in `u = r^2` times the
/// trapezoid rule in angle, weighted for the normalized area measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiskQuadrature {
    pub nodes: Vec<C64>,
    pub weights_da: Vec<f64>,
    pub rmax: f64,
    pub n_radial: usize,
    pub n_angular: usize,
}

pub fn disk_quadrature(n_radial: usize, n_angular: usize, rmax: f64) -> Result<DiskQuadrature> {
    if n_radial == 0 || n_angular == 0 {
        return Err(Error::InvalidArgument("quadrature counts must be at least 1".into()));
    }
    if !(rmax > 0.0 && rmax < 1.0) {
        return Err(Error::InvalidArgument(format!("rmax must lie in (0, 1), got {rmax}")));
    }
    let pairs: Vec<(f64, f64)> = if n_radial == 1 {
        vec![(0.0, 2.0)]
    } else {
        GaussLegendre::new(n_radial)
            .map_err(|e| Error::InvalidArgument(e.to_string()))?
            .as_node_weight_pairs()
            .to_vec()
    };
    let u_max = rmax * rmax;
    let mut nodes = Vec::with_capacity(n_radial * n_angular);
    let mut weights_da = Vec::with_capacity(n_radial * n_angular);
    for (x, gw) in pairs {
        let u = 0.5 * u_max * (x + 1.0);
        let r = u.sqrt();
        let w = gw * 0.5 * u_max / n_angular as f64;
        for j in 0..n_angular {
            let theta = 2.0 * PI * j as f64 / n_angular as f64;
            nodes.push(C64::from_polar(r, theta));
            weights_da.push(w);
        }
    }
    Ok(DiskQuadrature {
        nodes,
        weights_da,
        rmax,
        n_radial,
        n_angular,
    })
}

impl DiskQuadrature {
    /// `weights_da / (1 - |w|^2)^2`.
    pub fn weights_dlambda(&self) -> Vec<f64> {
        self.nodes
            .iter()
            .zip(&self.weights_da)
            .map(|(z, w)| w / (1.0 - z.norm_sqr()).powi(2))
            .collect()
    }

    pub fn mass(&self) -> f64 {
        pairwise_sum(&self.weights_da)
    }

    /// `integral f dA` over `|w| <= rmax`; node evaluations run in parallel.
    pub fn integrate(&self, f: impl Fn(C64) -> f64 + Sync) -> f64 {
        let terms: Vec<f64> = self
            .nodes
            .par_iter()
            .zip(self.weights_da.par_iter())
            .map(|(z, w)| f(*z) * w)
            .collect();
        pairwise_sum(&terms)
    }

    /// Complex-valued `integral f dA`.
    pub fn integrate_complex(&self, f: impl Fn(C64) -> C64 + Sync) -> C64 {
        let terms: Vec<C64> = self
            .nodes
            .par_iter()
            .zip(self.weights_da.par_iter())
            .map(|(z, w)| f(*z) * *w)
            .collect();
        let re: Vec<f64> = terms.iter().map(|t| t.re).collect();
        let im: Vec<f64> = terms.iter().map(|t| t.im).collect();
        C64::new(pairwise_sum(&re), pairwise_sum(&im))
    }
}

fn check_operator(t: &ComplexMatrix, d: usize) -> Result<()> {
    if t.rows() != d || t.cols() != d {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{} but the truncation degree is {d}",
            t.rows(),
            t.cols()
        )));
    }
    Ok(())
}

/// `integral ||T k_w||^p d lambda(w)` over `|w| <= rmax`.
pub fn integral_criterion(t: &ComplexMatrix, p: f64, quad: &DiskQuadrature, d: usize) -> Result<f64> {
    crate::linalg::check_exponent(p)?;
    check_operator(t, d)?;
    Ok(quad.integrate(|w| {
        let x = w.norm_sqr();
        let k: Vec<C64> = unnormalized_coefficients(w, d)
            .into_iter()
            .map(|c| c * (1.0 - x))
            .collect();
        norm(&t.apply(&k)).powf(p) / (1.0 - x).powi(2)
    }))
}

/// `sum_n ||T k_{w_n}||^p` over the lattice points.
pub fn lattice_sum(t: &ComplexMatrix, p: f64, lattice: &SamplingLattice, d: usize) -> Result<f64> {
    crate::linalg::check_exponent(p)?;
    check_operator(t, d)?;
    let terms = lattice
        .points
        .iter()
        .map(|&w| Ok(norm(&t.apply(&kernel_coefficients(w, d)?.coefficients)).powf(p)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(pairwise_sum(&terms))
}

/// `integral ||T K_w||^2 dA` over `|w| <= rmax` in closed form:
/// `sum_n ||T e_n||^2 rmax^(2n+2)`.
pub fn hs_closed_form(t: &ComplexMatrix, rmax: f64) -> f64 {
    (0..t.cols())
        .map(|n| norm_sqr(&t.column(n)) * rmax.powi(2 * n as i32 + 2))
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HsIdentityReport {
    pub rmax: f64,
    pub n_radial: usize,
    /// `integral ||T k_w||^2 d lambda`.
    pub lambda_integral: f64,
    /// `integral ||T K_w||^2 dA`.
    pub area_integral: f64,
    /// Largest relative gap between the two integrands at a node.
    pub pointwise_gap: f64,
    pub closed_form: f64,
    pub closed_form_gap: f64,
    /// `||T||_2^2 = sum ||T e_n||^2`.
    pub hs_norm_sq: f64,
    /// `||T||_2^2 - closed_form`, the mass outside `|w| <= rmax`.
    pub rmax_deficit: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Compares the two Hilbert-Schmidt integrands node by node (an algebraic
/// identity) and the quadrature value with its per-mode closed form (within
/// `tol` relative).
pub fn hs_identity_check(t: &ComplexMatrix, quad: &DiskQuadrature, d: usize, tol: f64) -> Result<HsIdentityReport> {
    check_operator(t, d)?;
    let rows: Vec<(f64, f64, f64)> = quad
        .nodes
        .par_iter()
        .zip(quad.weights_da.par_iter())
        .map(|(&w, &wt)| {
            let x = w.norm_sqr();
            let big = t.apply(&unnormalized_coefficients(w, d));
            let small = t.apply(&kernel_coefficients(w, d)?.coefficients);
            let a = norm_sqr(&small) / (1.0 - x).powi(2);
            let b = norm_sqr(&big);
            let gap = (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
            Ok((a * wt, b * wt, if a == b { 0.0 } else { gap }))
        })
        .collect::<Result<_>>()?;
    let lambda_integral = pairwise_sum(&rows.iter().map(|r| r.0).collect::<Vec<_>>());
    let area_integral = pairwise_sum(&rows.iter().map(|r| r.1).collect::<Vec<_>>());
    let pointwise_gap = rows.iter().map(|r| r.2).fold(0.0, f64::max);
    let closed_form = hs_closed_form(t, quad.rmax);
    let hs_norm_sq: f64 = (0..d).map(|n| norm_sqr(&t.column(n))).sum();
    let closed_form_gap = if closed_form == 0.0 {
        lambda_integral.abs()
    } else {
        (lambda_integral - closed_form).abs() / closed_form
    };
    let integrals_agree =
        (lambda_integral - area_integral).abs() <= 1e-10 * lambda_integral.abs().max(f64::MIN_POSITIVE);
    Ok(HsIdentityReport {
        rmax: quad.rmax,
        n_radial: quad.n_radial,
        lambda_integral,
        area_integral,
        pointwise_gap,
        closed_form,
        closed_form_gap,
        hs_norm_sq,
        rmax_deficit: hs_norm_sq - closed_form,
        tolerance: tol,
        passed: pointwise_gap <= 1e-12 && integrals_agree && closed_form_gap <= tol,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubharmonicityReport {
    pub p: f64,
    pub grid_step: f64,
    pub rmax: f64,
    pub points: usize,
    pub min_laplacian: f64,
    pub min_location: (f64, f64),
    pub max_value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// `1e-6 (1 + max F) (1 + 1/h^2)`.
pub fn subharmonic_tolerance(max_value: f64, grid_step: f64) -> f64 {
    1e-6 * (1.0 + max_value) * (1.0 + 1.0 / (grid_step * grid_step))
}

/// Five-point Laplacian of `F(w) = ||T K_w||^p` on the square grid of spacing
/// `grid_step`, at every grid point with `|w| <= rmax - grid_step` (so each
/// stencil stays inside `|w| <= rmax`). One report per exponent; `||T K_w||^2`
/// is computed once and shared.
pub fn subharmonicity_check_many(
    t: &ComplexMatrix,
    ps: &[f64],
    grid_step: f64,
    rmax: f64,
    d: usize,
) -> Result<Vec<SubharmonicityReport>> {
    for &p in ps {
        crate::linalg::check_exponent(p)?;
    }
    check_operator(t, d)?;
    if !(grid_step > 0.0 && rmax < 1.0 && rmax - grid_step >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "stencil of step {grid_step} does not fit inside |w| <= {rmax} < 1"
        )));
    }
    let m = (rmax / grid_step).floor() as i64;
    let side = (2 * m + 1) as usize;
    let at = |i: i64, j: i64| C64::new(i as f64 * grid_step, j as f64 * grid_step);
    let g: Vec<f64> = (0..side * side)
        .into_par_iter()
        .map(|k| {
            let w = at((k / side) as i64 - m, (k % side) as i64 - m);
            if w.norm() <= rmax {
                norm_sqr(&t.apply(&unnormalized_coefficients(w, d)))
            } else {
                f64::NAN
            }
        })
        .collect();
    let idx = |i: i64, j: i64| ((i + m) as usize) * side + (j + m) as usize;
    let inner_radius = rmax - grid_step;
    let centers: Vec<(i64, i64)> = (-m..=m)
        .flat_map(|i| (-m..=m).map(move |j| (i, j)))
        .filter(|&(i, j)| at(i, j).norm() <= inner_radius)
        .collect();
    let h2 = grid_step * grid_step;

    Ok(ps
        .iter()
        .map(|&p| {
            let f = |i: i64, j: i64| g[idx(i, j)].powf(p / 2.0);
            let max_value = g
                .iter()
                .filter(|v| !v.is_nan())
                .fold(0.0f64, |a, &v| a.max(v.powf(p / 2.0)));
            let mut min_laplacian = f64::INFINITY;
            let mut min_location = (0.0, 0.0);
            for &(i, j) in &centers {
                let lap = (f(i + 1, j) + f(i - 1, j) + f(i, j + 1) + f(i, j - 1) - 4.0 * f(i, j)) / h2;
                if lap < min_laplacian {
                    min_laplacian = lap;
                    let w = at(i, j);
                    min_location = (w.re, w.im);
                }
            }
            let tolerance = subharmonic_tolerance(max_value, grid_step);
            SubharmonicityReport {
                p,
                grid_step,
                rmax,
                points: centers.len(),
                min_laplacian,
                min_location,
                max_value,
                tolerance,
                passed: min_laplacian >= -tolerance,
            }
        })
        .collect())
}

pub fn subharmonicity_check(
    t: &ComplexMatrix,
    p: f64,
    grid_step: f64,
    rmax: f64,
    d: usize,
) -> Result<SubharmonicityReport> {
    Ok(subharmonicity_check_many(t, &[p], grid_step, rmax, d)?.remove(0))
}

/// Points of the disk pairwise separated in the Bergman metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingLattice {
    pub points: Vec<C64>,
    pub separation: f64,
    pub rmax: f64,
    /// Smallest pairwise Bergman distance, by brute force (infinite for one point).
    pub min_pairwise: f64,
}

impl SamplingLattice {
    pub fn is_separated(&self) -> bool {
        self.min_pairwise >= self.separation * (1.0 - 1e-12)
    }
}

/// Concentric rings at Bergman radius `k * separation` (Euclidean radius
/// `tanh(k s)`) inside `|w| <= rmax`; each ring holds the most equally spaced
/// points whose neighbours stay `separation` apart, alternate rings rotated by
/// half a step.
pub fn r_lattice(separation: f64, rmax: f64) -> Result<SamplingLattice> {
    if !(separation > 0.0 && separation.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "separation must be positive, got {separation}"
        )));
    }
    if !(0.0..1.0).contains(&rmax) {
        return Err(Error::InvalidArgument(format!("rmax must lie in [0, 1), got {rmax}")));
    }
    let target = separation.tanh();
    let mut points = vec![C64::new(0.0, 0.0)];
    for k in 1.. {
        let r = (k as f64 * separation).tanh();
        if r > rmax {
            break;
        }
        let rho = |m: usize| {
            let z = C64::from_polar(r, 2.0 * PI / m as f64);
            (C64::new(r, 0.0) - z).norm() / (C64::new(1.0, 0.0) - r * z).norm()
        };
        let mut m = 1;
        while rho(m + 1) >= target {
            m += 1;
        }
        let offset = if k % 2 == 0 { 0.0 } else { PI / m as f64 };
        points.extend((0..m).map(|j| C64::from_polar(r, offset + 2.0 * PI * j as f64 / m as f64)));
    }
    let min_pairwise = min_pairwise_distance(&points);
    Ok(SamplingLattice {
        points,
        separation,
        rmax,
        min_pairwise,
    })
}

/// Brute-force minimum of `beta(w_i, w_j)` over `i < j`.
pub fn min_pairwise_distance(points: &[C64]) -> f64 {
    (0..points.len())
        .into_par_iter()
        .map(|i| {
            points[i + 1..]
                .iter()
                .map(|&w| bergman_metric(points[i], w).unwrap_or(f64::INFINITY))
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplingFrameReport {
    pub frame: Frame,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub condition: f64,
    pub points: usize,
    /// Largest truncation tail `||k_w||^2 - ||P_d k_w||^2` over the lattice.
    pub max_tail: f64,
}

/// The normalized kernels at the lattice points, truncated to degree `d`.
pub fn sampling_frame(lattice: &SamplingLattice, d: usize) -> Result<SamplingFrameReport> {
    if lattice.points.is_empty() || d == 0 {
        return Err(Error::InvalidArgument("need a nonempty lattice and d >= 1".into()));
    }
    let kernels = lattice
        .points
        .iter()
        .map(|&w| kernel_coefficients(w, d))
        .collect::<Result<Vec<_>>>()?;
    let max_tail = kernels.iter().map(|k| k.tail).fold(0.0, f64::max);
    let frame = make_frame(kernels.into_iter().map(|k| k.coefficients).collect(), d, SPANNING_TOL)?;
    let (lower_bound, upper_bound) = frame.bounds();
    Ok(SamplingFrameReport {
        condition: upper_bound / lower_bound,
        points: lattice.points.len(),
        lower_bound,
        upper_bound,
        max_tail,
        frame,
    })
}
