//! Seeded random ensembles.
//!
//! Every generator takes an explicit `seed`; independent purposes draw from
//! separate ChaCha streams so adding a probe never perturbs an operator draw.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{norm, ComplexMatrix, C64};

/// Independent random streams, one per purpose.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Basis = 1,
    Frame = 2,
    Operator = 3,
    Probe = 4,
    Vector = 5,
}

pub fn rng_for(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

/// Seed of trial `index` in a campaign seeded with `seed`.
pub fn trial_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_add(index as u64)
}

/// Standard complex Gaussian: real and imaginary parts `N(0, 1/2)`.
pub fn complex_gaussian(rng: &mut ChaCha8Rng) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<C64> {
    (0..dim).map(|_| complex_gaussian(rng)).collect()
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Uniformly distributed unit vector in `C^dim`.
pub fn random_unit_vector(dim: usize, seed: u64) -> Vec<C64> {
    let mut rng = rng_for(seed, Stream::Vector);
    loop {
        let v = gaussian_vector(&mut rng, dim);
        let n = norm(&v);
        if n > 0.0 {
            return v.into_iter().map(|z| z / n).collect();
        }
    }
}

/// Ginibre matrix scaled to unit Frobenius norm.
pub fn random_operator(dim: usize, seed: u64) -> ComplexMatrix {
    let mut rng = rng_for(seed, Stream::Operator);
    let g = gaussian_matrix(&mut rng, dim, dim);
    let f = g.frobenius_norm();
    g.scale_real(1.0 / f)
}

/// `(G + G*)/2` scaled to unit Frobenius norm.
pub fn random_hermitian(dim: usize, seed: u64) -> ComplexMatrix {
    let g = random_operator(dim, seed);
    let h = &g + &g.adjoint();
    let f = h.frobenius_norm();
    h.scale_real(1.0 / f)
}

/// `G G*` scaled to unit trace.
pub fn random_psd(dim: usize, seed: u64) -> ComplexMatrix {
    let g = random_operator(dim, seed);
    let s = &g * &g.adjoint();
    let t = s.trace().re;
    let mut s = s.scale_real(1.0 / t);
    for i in 0..dim {
        s[(i, i)] = C64::new(s[(i, i)].re, 0.0);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_independent_and_reproducible() {
        let a = random_operator(4, 7);
        assert_eq!(a, random_operator(4, 7));
        assert_ne!(a, random_operator(4, 8));
        let mut x = rng_for(7, Stream::Operator);
        let mut y = rng_for(7, Stream::Probe);
        assert_ne!(complex_gaussian(&mut x), complex_gaussian(&mut y));
    }

    #[test]
    fn ensembles_have_their_structure() {
        let h = random_hermitian(5, 1);
        assert!(h.hermitian_defect() == 0.0);
        let s = random_psd(5, 2);
        assert!(s.is_hermitian(1e-14));
        assert!((s.trace().re - 1.0).abs() < 1e-14);
        assert!(crate::linalg::is_psd(&s, 1e-12));
        let v = random_unit_vector(6, 3);
        assert!((norm(&v) - 1.0).abs() < 1e-15);
    }
}
