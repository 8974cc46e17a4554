//! Local filtering of two-qubit states through the Lorentz normal form of
//! the Mueller matrix.

mod entanglement;
mod lorentz;
mod normal_form;

pub use entanglement::{concurrence, entanglement_of_formation, EntanglementReport};
pub use lorentz::{filter_to_lorentz, lorentz_to_filter, LorentzTransform, LORENTZ_TOL};
pub use normal_form::{normal_form, NormalForm, NormalFormKind, XFormParams, COMPLEX_EIG_TOL};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_part, kron, operator_norm2, psd_sqrt2, CMatrix2, C64};
use crate::metrics::{
    chsh_max, classify, correlation_spectrum, key_rate_symmetric, qber, CorrelationSpectrum, KeyMetrics, Region,
};
use crate::states::TwoQubitState;

pub const FILTER_NORM_TOL: f64 = 1e-12;
pub const MIN_SUCCESS: f64 = 1e-12;

/// Success elements `(M1, N1)` of the local two-outcome filters.
#[derive(Clone, Debug, PartialEq)]
pub struct FilterPair {
    m1: CMatrix2,
    n1: CMatrix2,
}

impl FilterPair {
    pub fn new(m1: CMatrix2, n1: CMatrix2) -> Result<Self> {
        for f in [&m1, &n1] {
            let norm = operator_norm2(f);
            if norm > 1.0 + FILTER_NORM_TOL {
                return Err(Error::FilterNorm(norm));
            }
        }
        Ok(Self { m1, n1 })
    }

    pub fn identity() -> Self {
        Self { m1: CMatrix2::identity(), n1: CMatrix2::identity() }
    }

    pub fn m1(&self) -> &CMatrix2 {
        &self.m1
    }

    pub fn n1(&self) -> &CMatrix2 {
        &self.n1
    }

    /// Failure elements `M2 = sqrt(1 - M1^dag M1)`, `N2 = sqrt(1 - N1^dag N1)`.
    pub fn complements(&self) -> (CMatrix2, CMatrix2) {
        let comp = |f: &CMatrix2| psd_sqrt2(&(CMatrix2::identity() - f.adjoint() * f));
        (comp(&self.m1), comp(&self.n1))
    }

    pub fn is_identity(&self) -> bool {
        let id = CMatrix2::identity();
        (self.m1 - id).iter().chain((self.n1 - id).iter()).all(|z| z.norm() < 1e-12)
    }
}

/// Post-selected state after both filters click, and the click probability.
pub fn apply_filters(state: &TwoQubitState, pair: &FilterPair) -> Result<(TwoQubitState, f64)> {
    let k = kron(&pair.m1, &pair.n1);
    let out = k * state.matrix() * k.adjoint();
    let p = out.trace().re;
    if !(p > MIN_SUCCESS) {
        return Err(Error::VanishingSuccess(p));
    }
    let rho = hermitian_part(&out) / C64::from(p);
    Ok((TwoQubitState::from_matrix(rho), p))
}

/// Filters bringing the state to its Bell-diagonal normal form, each scaled
/// to unit operator norm. States with vanishing local Bloch vectors are
/// already in normal form and get identity filters.
pub fn optimal_filters(state: &TwoQubitState) -> Result<FilterPair> {
    let state = state.clone().checked()?;
    let m = state.to_mueller();
    if m.alice_bloch().amax() < 1e-12 && m.bob_bloch().amax() < 1e-12 {
        if m.correlations().amax() < 1e-12 {
            return Err(Error::TrivialNormalForm);
        }
        return Ok(FilterPair::identity());
    }
    let nf = normal_form(&m)?;
    if let Some(params) = nf.xform_params {
        return Err(Error::XForm(params));
    }
    let m1 = lorentz_to_filter(&nf.l1.inverse())?;
    let n1 = lorentz_to_filter(&nf.l2.inverse())?;
    FilterPair::new(m1, n1)
}

/// Correlation spectrum with the derived CHSH and key quantities (two key
/// bases).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StateSummary {
    pub spectrum: CorrelationSpectrum,
    pub lam_sq_sum: f64,
    pub lam_sum: f64,
    pub s_max: f64,
    pub region: Region,
    pub key: KeyMetrics,
}

impl StateSummary {
    pub fn of(state: &TwoQubitState) -> Self {
        let spectrum = correlation_spectrum(state);
        let q = qber(&spectrum, 2).expect("two bases supported");
        Self {
            lam_sq_sum: spectrum.leading_square_sum(),
            lam_sum: spectrum.leading_sum(),
            s_max: chsh_max(&spectrum),
            region: classify(&spectrum),
            key: key_rate_symmetric(q),
            spectrum,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FilterOutcome {
    pub filters: FilterPair,
    pub filtered: TwoQubitState,
    pub p_succ: f64,
    pub before: StateSummary,
    pub after: StateSummary,
    /// `p_succ * max(0, after.key.r_min)`
    pub r_filtered: f64,
}

pub fn filtered_key_rate(state: &TwoQubitState) -> Result<FilterOutcome> {
    let filters = optimal_filters(state)?;
    let (filtered, p_succ) = if filters.is_identity() {
        (state.clone(), 1.0)
    } else {
        apply_filters(state, &filters)?
    };
    let before = StateSummary::of(state);
    let after = StateSummary::of(&filtered);
    let r_filtered = p_succ * after.key.r_min.max(0.0);
    Ok(FilterOutcome { filters, filtered, p_succ, before, after, r_filtered })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_c4, ONE, ZERO};
    use crate::states::{gisin, werner};

    #[test]
    fn identity_filters_leave_state() {
        let w = werner(0.7).unwrap();
        let (out, p) = apply_filters(&w, &FilterPair::identity()).unwrap();
        assert!((p - 1.0).abs() < 1e-15);
        assert!(max_abs_c4(&(out.matrix() - w.matrix())) < 1e-15);
    }

    #[test]
    fn oversized_filter_rejected() {
        let f = CMatrix2::new(C64::from(1.1), ZERO, ZERO, ONE);
        assert!(matches!(FilterPair::new(f, CMatrix2::identity()), Err(Error::FilterNorm(_))));
    }

    #[test]
    fn vanishing_success_rejected() {
        let p0 = CMatrix2::new(ONE, ZERO, ZERO, ZERO);
        let pair = FilterPair::new(p0, p0).unwrap();
        let singlet = TwoQubitState::singlet();
        assert!(matches!(apply_filters(&singlet, &pair), Err(Error::VanishingSuccess(_))));
    }

    #[test]
    fn complements_complete_the_povm() {
        let f = CMatrix2::new(C64::new(0.6, 0.1), C64::new(0.2, 0.0), ZERO, C64::new(0.3, -0.2));
        let pair = FilterPair::new(f / C64::from(operator_norm2(&f)), CMatrix2::identity()).unwrap();
        let (m2, _) = pair.complements();
        let sum = pair.m1().adjoint() * pair.m1() + m2.adjoint() * m2;
        assert!((sum - CMatrix2::identity()).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn bell_diagonal_gets_identity_filters() {
        let out = filtered_key_rate(&werner(0.9).unwrap()).unwrap();
        assert!(out.filters.is_identity());
        assert_eq!(out.p_succ, 1.0);
        assert_eq!(out.before, out.after);
    }

    #[test]
    fn singlet_rate_is_one() {
        let out = filtered_key_rate(&TwoQubitState::singlet()).unwrap();
        assert!((out.r_filtered - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gisin_worked_example() {
        let out = filtered_key_rate(&gisin(0.9, 0.85).unwrap()).unwrap();
        assert_eq!(out.before.region, Region::NonviolatingUnusable);
        assert!((out.after.lam_sq_sum - 1.3329).abs() < 2e-3);
        assert!((out.after.lam_sum - 1.6327).abs() < 2e-3);
        assert_eq!(out.after.region, Region::ViolatingUsable);
        // 2 mu beta^2 + (1 - mu) beta / alpha with beta derived from alpha
        let beta = 0.19_f64.sqrt();
        let expect = 2.0 * 0.85 * 0.19 + 0.15 * beta / 0.9;
        assert!((out.p_succ - expect).abs() < 1e-9, "{}", out.p_succ);
    }

    #[test]
    fn maximally_mixed_has_no_normal_form() {
        let mm = TwoQubitState::maximally_mixed();
        assert_eq!(optimal_filters(&mm), Err(Error::TrivialNormalForm));
        assert_eq!(normal_form(&mm.to_mueller()), Err(Error::TrivialNormalForm));
    }
}
