//! Small dense helpers shared by every module: Pauli matrices, Kronecker
//! products of 2x2 blocks and the Minkowski metric.

use nalgebra::{Matrix2, Matrix4, SymmetricEigen, Vector3};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix2 = Matrix2<C64>;
pub type CMatrix4 = Matrix4<C64>;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// Pauli basis in the order (1, x, y, z).
pub fn pauli(index: usize) -> CMatrix2 {
    match index {
        0 => Matrix2::new(ONE, ZERO, ZERO, ONE),
        1 => Matrix2::new(ZERO, ONE, ONE, ZERO),
        2 => Matrix2::new(ZERO, -I, I, ZERO),
        3 => Matrix2::new(ONE, ZERO, ZERO, -ONE),
        _ => panic!("Pauli index {index} out of range"),
    }
}

/// `v . sigma` for a real Bloch vector.
pub fn bloch_operator(v: &Vector3<f64>) -> CMatrix2 {
    pauli(1) * C64::from(v.x) + pauli(2) * C64::from(v.y) + pauli(3) * C64::from(v.z)
}

pub fn kron(a: &CMatrix2, b: &CMatrix2) -> CMatrix4 {
    let mut out = CMatrix4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[(2 * i + k, 2 * j + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    out
}

/// diag(1, -1, -1, -1)
pub fn minkowski() -> Matrix4<f64> {
    Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, -1.0, -1.0, -1.0))
}

pub fn hermitian_part(m: &CMatrix4) -> CMatrix4 {
    (m + m.adjoint()) * C64::from(0.5)
}

/// Largest singular value.
pub fn operator_norm2(m: &CMatrix2) -> f64 {
    m.singular_values().max()
}

/// Principal square root of a Hermitian positive semidefinite matrix;
/// negative round-off eigenvalues are clamped to zero.
pub fn psd_sqrt2(m: &CMatrix2) -> CMatrix2 {
    let h = (m + m.adjoint()) * C64::from(0.5);
    let eig = SymmetricEigen::new(h);
    let roots = eig.eigenvalues.map(|e| C64::from(e.max(0.0).sqrt()));
    eig.eigenvectors * Matrix2::from_diagonal(&roots) * eig.eigenvectors.adjoint()
}

pub fn psd_sqrt4(m: &CMatrix4) -> CMatrix4 {
    let eig = SymmetricEigen::new(hermitian_part(m));
    let roots = eig.eigenvalues.map(|e| C64::from(e.max(0.0).sqrt()));
    eig.eigenvectors * Matrix4::from_diagonal(&roots) * eig.eigenvectors.adjoint()
}

pub(crate) fn max_abs_c4(m: &CMatrix4) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub(crate) fn max_abs4(m: &Matrix4<f64>) -> f64 {
    m.iter().map(|x| x.abs()).fold(0.0, f64::max)
}
