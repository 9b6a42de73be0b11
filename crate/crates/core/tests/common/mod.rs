#![allow(dead_code)]

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use nalgebra::DMatrix;
use rkhcm::linalg::{CMatrix, C64};
use rkhcm::Signature;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn signature() -> impl Strategy<Value = Signature> {
    prop_oneof![Just(vec![1]), Just(vec![2]), Just(vec![1, 2]), Just(vec![1, 1])]
        .prop_map(|b| Signature::new(b).unwrap())
}

pub fn scalar_signature() -> impl Strategy<Value = Signature> {
    Just(Signature::scalar())
}

/// Positive semidefiniteness by attempting a real Cholesky factorization of
/// the shifted real embedding `[[Re H, -Im H], [Im H, Re H]]`: an oracle
/// independent of eigen-decompositions.
pub fn cholesky_psd(m: &CMatrix, shift: f64) -> bool {
    let n = m.nrows();
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let real = DMatrix::<f64>::from_fn(2 * n, 2 * n, |i, j| {
        let z = h[(i % n, j % n)];
        let v = match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        };
        if i == j { v + shift } else { v }
    });
    real.cholesky().is_some()
}

/// Eigenvalues of a 2×2 Hermitian matrix from the characteristic polynomial.
pub fn eig2(m: &CMatrix) -> (f64, f64) {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let b = m[(0, 1)].norm();
    let mid = (a + d) / 2.0;
    let rad = (((a - d) / 2.0).powi(2) + b * b).sqrt();
    (mid - rad, mid + rad)
}
