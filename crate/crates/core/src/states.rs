//! Two-qubit states and their Pauli (Hilbert-Schmidt) and Mueller
//! representations.
//!
//! Conventions used throughout the crate: the local basis is ordered
//! (1, sigma_x, sigma_y, sigma_z) and tensor products are Alice (x) Bob, so
//! basis index `2*a + b` holds `|a b>`.

use nalgebra::{Matrix3, Matrix4, SymmetricEigen, Vector3, Vector4};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_part, kron, max_abs_c4, pauli, CMatrix4, C64};

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = -1e-9;

/// A 4x4 density operator. Construction does not validate; call
/// [`TwoQubitState::validate`] or [`TwoQubitState::checked`].
#[derive(Clone, Debug, PartialEq)]
pub struct TwoQubitState {
    rho: CMatrix4,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidityReport {
    pub hermitian: bool,
    pub hermitian_dev: f64,
    pub trace_dev: f64,
    pub min_eig: f64,
    pub ok: bool,
}

impl ValidityReport {
    /// Names of the violated invariants, empty when `ok`.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.hermitian {
            out.push(format!("not Hermitian (max deviation {:e})", self.hermitian_dev));
        }
        if self.trace_dev > TRACE_TOL {
            out.push(format!("trace != 1 (deviation {:e})", self.trace_dev));
        }
        if self.min_eig < PSD_TOL {
            out.push(format!("not positive semidefinite (min eigenvalue {:e})", self.min_eig));
        }
        out
    }
}

/// Real 4x4 matrix `M_ij = Tr(rho sigma_i (x) sigma_j)`.
///
/// Column 0 below the corner is Alice's Bloch vector `r`, row 0 right of the
/// corner is Bob's `s`, and the lower-right 3x3 block is the correlation
/// matrix `T`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MuellerMatrix(pub Matrix4<f64>);

impl MuellerMatrix {
    pub fn new(m: Matrix4<f64>) -> Self {
        Self(m)
    }

    pub fn from_parts(r: &Vector3<f64>, s: &Vector3<f64>, t: &Matrix3<f64>) -> Self {
        let mut m = Matrix4::zeros();
        m[(0, 0)] = 1.0;
        for i in 0..3 {
            m[(i + 1, 0)] = r[i];
            m[(0, i + 1)] = s[i];
            for j in 0..3 {
                m[(i + 1, j + 1)] = t[(i, j)];
            }
        }
        Self(m)
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.0
    }

    pub fn alice_bloch(&self) -> Vector3<f64> {
        Vector3::new(self.0[(1, 0)], self.0[(2, 0)], self.0[(3, 0)])
    }

    pub fn bob_bloch(&self) -> Vector3<f64> {
        Vector3::new(self.0[(0, 1)], self.0[(0, 2)], self.0[(0, 3)])
    }

    pub fn correlations(&self) -> Matrix3<f64> {
        self.0.fixed_view::<3, 3>(1, 1).into_owned()
    }
}

impl TwoQubitState {
    pub fn from_matrix(rho: CMatrix4) -> Self {
        Self { rho }
    }

    pub fn matrix(&self) -> &CMatrix4 {
        &self.rho
    }

    /// `rho = 1/4 [1(x)1 + r.sigma(x)1 + 1(x)s.sigma + sum T_ij sigma_i(x)sigma_j]`.
    pub fn from_pauli(r: &Vector3<f64>, s: &Vector3<f64>, t: &Matrix3<f64>) -> Self {
        Self::from_mueller_unchecked(&MuellerMatrix::from_parts(r, s, t))
    }

    fn from_mueller_unchecked(m: &MuellerMatrix) -> Self {
        let mut rho = CMatrix4::zeros();
        for i in 0..4 {
            for j in 0..4 {
                let c = m.0[(i, j)];
                if c != 0.0 {
                    rho += kron(&pauli(i), &pauli(j)) * C64::from(0.25 * c);
                }
            }
        }
        Self { rho }
    }

    pub fn from_mueller(m: &MuellerMatrix) -> Result<Self> {
        let corner = m.0[(0, 0)];
        if (corner - 1.0).abs() > TRACE_TOL {
            return Err(Error::MuellerNormalization(corner));
        }
        Ok(Self::from_mueller_unchecked(m))
    }

    pub fn to_mueller(&self) -> MuellerMatrix {
        let mut m = Matrix4::zeros();
        for i in 0..4 {
            for j in 0..4 {
                m[(i, j)] = (self.rho * kron(&pauli(i), &pauli(j))).trace().re;
            }
        }
        MuellerMatrix(m)
    }

    pub fn maximally_mixed() -> Self {
        Self { rho: CMatrix4::identity() * C64::from(0.25) }
    }

    pub fn bell(label: BellLabel) -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let ket = match label {
            BellLabel::PhiPlus => Vector4::new(h, 0.0, 0.0, h),
            BellLabel::PhiMinus => Vector4::new(h, 0.0, 0.0, -h),
            BellLabel::PsiPlus => Vector4::new(0.0, h, h, 0.0),
            BellLabel::PsiMinus => Vector4::new(0.0, h, -h, 0.0),
        };
        let ket = ket.map(C64::from);
        Self { rho: ket * ket.adjoint() }
    }

    pub fn singlet() -> Self {
        Self::bell(BellLabel::PsiMinus)
    }

    /// `p rho + (1 - p)/4 1(x)1`
    pub fn depolarize(&self, p: f64) -> Result<Self> {
        check_range("p", p, 0.0, 1.0, "[0, 1]")?;
        let rho = self.rho * C64::from(p) + CMatrix4::identity() * C64::from(0.25 * (1.0 - p));
        Ok(Self { rho })
    }

    pub fn validate(&self) -> ValidityReport {
        let hermitian_dev = max_abs_c4(&(self.rho - self.rho.adjoint()));
        let trace_dev = (self.rho.trace() - C64::from(1.0)).norm();
        let eig = SymmetricEigen::new(hermitian_part(&self.rho));
        let min_eig = eig.eigenvalues.min();
        let hermitian = hermitian_dev <= HERMITIAN_TOL;
        ValidityReport {
            hermitian,
            hermitian_dev,
            trace_dev,
            min_eig,
            ok: hermitian && trace_dev <= TRACE_TOL && min_eig >= PSD_TOL,
        }
    }

    pub fn checked(self) -> Result<Self> {
        let report = self.validate();
        if report.ok {
            Ok(self)
        } else {
            Err(Error::InvalidState(report.violations().join("; ")))
        }
    }

    /// Draws a full-rank state from the Hilbert-Schmidt measure
    /// (`G G^dagger / Tr` with `G` a complex Ginibre matrix).
    pub fn random_mixed<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let g = CMatrix4::from_fn(|_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
        let w = g * g.adjoint();
        let tr = w.trace();
        Self { rho: hermitian_part(&(w / tr)) }
    }

    /// Haar-random pure state.
    pub fn random_pure<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let v = Vector4::from_fn(|_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
        let v = v.normalize();
        Self { rho: v * v.adjoint() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BellLabel {
    #[serde(rename = "phi+")]
    PhiPlus,
    #[serde(rename = "phi-")]
    PhiMinus,
    #[serde(rename = "psi+")]
    PsiPlus,
    #[serde(rename = "psi-")]
    PsiMinus,
}

/// Parametric families. The Gisin family takes `alpha` only; `beta` is
/// always `sqrt(1 - alpha^2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "lowercase")]
pub enum Family {
    Bell { label: BellLabel },
    Werner { p: f64 },
    Gisin { alpha: f64, mu: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FamilySpec {
    pub family: Family,
    pub depolarize: Option<f64>,
}

impl From<Family> for FamilySpec {
    fn from(family: Family) -> Self {
        Self { family, depolarize: None }
    }
}

pub fn werner(p: f64) -> Result<TwoQubitState> {
    check_range("p", p, 0.0, 1.0, "[0, 1]")?;
    TwoQubitState::singlet().depolarize(p)
}

/// The filtering benchmark family
/// `1/4 [1 + mu(a^2-b^2)(s_z(x)1 - 1(x)s_z) + (1-2mu) s_z(x)s_z - 2 mu a b (s_x(x)s_x + s_y(x)s_y)]`,
/// built strictly from its Pauli expansion.
pub fn gisin(alpha: f64, mu: f64) -> Result<TwoQubitState> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::OutOfRange { name: "alpha", value: alpha, range: "(0, 1)" });
    }
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(Error::OutOfRange { name: "mu", value: mu, range: "(0, 1]" });
    }
    let beta = (1.0 - alpha * alpha).sqrt();
    let local = mu * (alpha * alpha - beta * beta);
    let transverse = -2.0 * mu * alpha * beta;
    let r = Vector3::new(0.0, 0.0, local);
    let t = Matrix3::from_diagonal(&Vector3::new(transverse, transverse, 1.0 - 2.0 * mu));
    Ok(TwoQubitState::from_pauli(&r, &(-r), &t))
}

pub fn make_family(spec: &FamilySpec) -> Result<TwoQubitState> {
    let state = match spec.family {
        Family::Bell { label } => TwoQubitState::bell(label),
        Family::Werner { p } => werner(p)?,
        Family::Gisin { alpha, mu } => gisin(alpha, mu)?,
    };
    match spec.depolarize {
        Some(p) => state.depolarize(p),
        None => Ok(state),
    }
}

fn check_range(name: &'static str, value: f64, lo: f64, hi: f64, range: &'static str) -> Result<()> {
    if value >= lo && value <= hi {
        Ok(())
    } else {
        Err(Error::OutOfRange { name, value, range })
    }
}
