//! Dense complex linear algebra helpers shared by the algebra and module layers.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Relative singular value cutoff used for every rank decision.
pub const RANK_CUTOFF: f64 = 1e-10;

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    m.clone().svd(false, false).singular_values.iter().copied().collect()
}

/// Largest singular value; zero for empty matrices.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    singular_values(m).into_iter().fold(0.0, f64::max)
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues sorted ascending.
/// Only the Hermitian part of `m` is used.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigen(m).0.first().copied().unwrap_or(0.0)
}

/// `V f(Λ) V*` for a Hermitian matrix.
pub fn hermitian_apply(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (values, vectors) = hermitian_eigen(m);
    let n = values.len();
    let mut scaled = vectors.clone();
    for (j, &v) in values.iter().enumerate() {
        let fv = f(v);
        for i in 0..n {
            scaled[(i, j)] *= fv;
        }
    }
    &scaled * vectors.adjoint()
}

/// Least-squares solution `x = A⁺ b` using a relative singular value cutoff.
pub fn pinv_solve(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (rows, cols) = a.shape();
    if rows == 0 || cols == 0 {
        return CMatrix::zeros(cols, b.ncols());
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return CMatrix::zeros(cols, b.ncols());
    }
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let cut = RANK_CUTOFF * smax;
    let mut ub = u.adjoint() * b;
    for (i, &s) in svd.singular_values.iter().enumerate() {
        let inv = if s > cut { 1.0 / s } else { 0.0 };
        for j in 0..ub.ncols() {
            ub[(i, j)] *= inv;
        }
    }
    v_t.adjoint() * ub
}

/// Numerical rank with the relative cutoff.
pub fn rank(m: &CMatrix) -> usize {
    let sv = singular_values(m);
    let smax = sv.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_CUTOFF * smax).count()
}

pub fn block(m: &CMatrix, row: usize, col: usize, n: usize) -> CMatrix {
    m.view((row * n, col * n), (n, n)).into_owned()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_sorted() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0), c(2.0), c(2.0), c(1.0)]);
        let (vals, _) = hermitian_eigen(&m);
        assert!((vals[0] + 1.0).abs() < 1e-12);
        assert!((vals[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn pinv_of_singular() {
        let a = CMatrix::from_row_slice(2, 2, &[c(1.0), c(1.0), c(1.0), c(1.0)]);
        let b = CMatrix::from_row_slice(2, 1, &[c(2.0), c(2.0)]);
        let x = pinv_solve(&a, &b);
        assert!((x[(0, 0)].re - 1.0).abs() < 1e-12);
        assert!((x[(1, 0)].re - 1.0).abs() < 1e-12);
        assert_eq!(rank(&a), 1);
    }

    #[test]
    fn empty_matrices() {
        assert_eq!(spectral_norm(&CMatrix::zeros(0, 3)), 0.0);
        assert_eq!(pinv_solve(&CMatrix::zeros(0, 2), &CMatrix::zeros(0, 1)).shape(), (2, 1));
    }
}
