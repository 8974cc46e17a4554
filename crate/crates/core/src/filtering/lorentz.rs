//! The SL(2,C) -> SO+(3,1) double cover acting on Mueller matrices.
//!
//! A local operator `f` acts on the Mueller matrix as
//! `M -> L(f) M L(g)^T` (up to normalisation) with
//! `L(f) = V (f (x) f*) V^dagger / |det f|`.

use nalgebra::{Matrix4, SymmetricEigen, Vector4};

use crate::error::{Error, Result};
use crate::linalg::{kron, max_abs4, minkowski, CMatrix2, CMatrix4, C64, I, ONE, ZERO};

/// Tolerance for `L G L^T = G`, `det L = 1` and `L_00 >= 1`.
pub const LORENTZ_TOL: f64 = 1e-9;
const IMAG_TOL: f64 = 1e-10;

/// A proper orthochronous Lorentz transform.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LorentzTransform(Matrix4<f64>);

impl LorentzTransform {
    pub fn new(l: Matrix4<f64>) -> Result<Self> {
        check_lorentz(&l)?;
        Ok(Self(l))
    }

    pub(crate) fn new_unchecked(l: Matrix4<f64>) -> Self {
        Self(l)
    }

    pub fn identity() -> Self {
        Self(Matrix4::identity())
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.0
    }

    /// `G L^T G`
    pub fn inverse(&self) -> Self {
        let g = minkowski();
        Self(g * self.0.transpose() * g)
    }

    pub fn check(&self) -> Result<()> {
        check_lorentz(&self.0)
    }
}

fn check_lorentz(l: &Matrix4<f64>) -> Result<()> {
    let g = minkowski();
    let metric_dev = max_abs4(&(l * g * l.transpose() - g));
    if metric_dev > LORENTZ_TOL {
        return Err(Error::NotLorentz(format!("L G L^T deviates from G by {metric_dev:e}")));
    }
    let det = l.determinant();
    if (det - 1.0).abs() > LORENTZ_TOL {
        return Err(Error::NotLorentz(format!("det = {det}")));
    }
    if l[(0, 0)] < 1.0 - LORENTZ_TOL {
        return Err(Error::NotLorentz(format!("L_00 = {} < 1", l[(0, 0)])));
    }
    Ok(())
}

fn cover_basis() -> CMatrix4 {
    let h = C64::from(std::f64::consts::FRAC_1_SQRT_2);
    #[rustfmt::skip]
    let v = CMatrix4::new(
        ONE, ZERO, ZERO, ONE,
        ZERO, ONE, ONE, ZERO,
        ZERO, I, -I, ZERO,
        ONE, ZERO, ZERO, -ONE,
    );
    v * h
}

pub fn filter_to_lorentz(f: &CMatrix2) -> Result<LorentzTransform> {
    let det = f.determinant().norm();
    if det <= 1e-12 {
        return Err(Error::SingularFilter(det));
    }
    let v = cover_basis();
    let l = v * kron(f, &f.map(|z| z.conj())) * v.adjoint() / C64::from(det);
    let imag = l.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if imag > IMAG_TOL * l.iter().map(|z| z.norm()).fold(1.0, f64::max) {
        return Err(Error::NotLorentz(format!("image has imaginary residue {imag:e}")));
    }
    LorentzTransform::new(l.map(|z| z.re))
}

/// Inverts the double cover: returns `f` with unit operator norm such that
/// `filter_to_lorentz(f) = l`. The overall phase is fixed by making the
/// largest-magnitude entry (first in row-major order on ties) real positive.
pub fn lorentz_to_filter(l: &LorentzTransform) -> Result<CMatrix2> {
    l.check()?;
    let v = cover_basis();
    let k = v.adjoint() * l.0.map(C64::from) * v;
    // K[(2i+k),(2j+l)] = f_ij conj(f_kl) / |det f|; reshuffled it is the
    // rank-one Hermitian matrix vec(f) vec(f)^dagger.
    let mut r = CMatrix4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    r[(2 * i + j, 2 * a + b)] = k[(2 * i + a, 2 * j + b)];
                }
            }
        }
    }
    // Hermitian PSD, so the dominant eigenpair is the dominant singular pair.
    let eig = SymmetricEigen::new((r + r.adjoint()) * C64::from(0.5));
    let top = eig.eigenvalues.imax();
    let vec_f: Vector4<C64> = eig.eigenvectors.column(top).into_owned() * C64::from(eig.eigenvalues[top].max(0.0).sqrt());
    let f = CMatrix2::new(vec_f[0], vec_f[1], vec_f[2], vec_f[3]);
    Ok(normalize_filter(&f))
}

/// Unit operator norm, canonical phase.
pub(crate) fn normalize_filter(f: &CMatrix2) -> CMatrix2 {
    let norm = f.singular_values().max();
    let f = f / C64::from(norm);
    let max = f.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let pivot = f
        .iter()
        .position(|z| z.norm() >= max * (1.0 - 1e-9))
        .expect("non-empty matrix");
    let p = f.as_slice()[pivot];
    let phase = p.conj() / C64::from(p.norm());
    let mut out = f * phase;
    out.as_mut_slice()[pivot] = C64::from(out.as_slice()[pivot].re);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli;
    use nalgebra::Matrix2;

    fn cmax(m: &CMatrix2) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn identity_maps_to_identity() {
        let l = filter_to_lorentz(&CMatrix2::identity()).unwrap();
        assert!(max_abs4(&(l.matrix() - Matrix4::identity())) < 1e-15);
        let f = lorentz_to_filter(&LorentzTransform::identity()).unwrap();
        assert!(cmax(&(f - CMatrix2::identity())) < 1e-12);
    }

    #[test]
    fn diagonal_filter_is_z_boost() {
        let s = 2f64.sqrt();
        let f = Matrix2::new(C64::from(s), ZERO, ZERO, C64::from(1.0 / s));
        let l = filter_to_lorentz(&f).unwrap();
        #[rustfmt::skip]
        let expect = Matrix4::new(
            1.25, 0.0, 0.0, 0.75,
            0.0, 1.0, 0.0, 0.0,
            0.0, 0.0, 1.0, 0.0,
            0.75, 0.0, 0.0, 1.25,
        );
        assert!(max_abs4(&(l.matrix() - expect)) < 1e-14);

        let back = lorentz_to_filter(&l).unwrap();
        let expect = Matrix2::new(ONE, ZERO, ZERO, C64::from(0.5));
        assert!(cmax(&(back - expect)) < 1e-12);
    }

    #[test]
    fn unitary_filter_is_rotation() {
        let l = filter_to_lorentz(&pauli(1)).unwrap();
        let expect = Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, 1.0, -1.0, -1.0));
        assert!(max_abs4(&(l.matrix() - expect)) < 1e-15);
    }

    #[test]
    fn singular_filter_rejected() {
        let f = Matrix2::new(ONE, ZERO, ZERO, ZERO);
        assert!(matches!(filter_to_lorentz(&f), Err(Error::SingularFilter(_))));
    }

    #[test]
    fn improper_transform_rejected() {
        let parity = Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, -1.0, -1.0, -1.0));
        assert!(LorentzTransform::new(parity).is_err());
        let time_flip = Matrix4::from_diagonal(&nalgebra::Vector4::new(-1.0, -1.0, 1.0, 1.0));
        assert!(LorentzTransform::new(time_flip).is_err());
    }

    #[test]
    fn normalized_filter_phase_convention() {
        let f = Matrix2::new(C64::new(0.0, 2.0), ZERO, ZERO, C64::new(0.0, 1.0));
        let g = normalize_filter(&f);
        assert!(cmax(&(g - Matrix2::new(ONE, ZERO, ZERO, C64::from(0.5)))) < 1e-15);
    }
}
