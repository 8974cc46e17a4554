use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{kron, pauli, psd_sqrt4};
use crate::metrics::binary_entropy;
use crate::states::TwoQubitState;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EntanglementReport {
    pub concurrence: f64,
    pub eof: f64,
}

impl EntanglementReport {
    pub fn of(state: &TwoQubitState) -> Self {
        let concurrence = concurrence(state);
        let eof = entanglement_of_formation(concurrence).expect("concurrence lies in [0, 1]");
        Self { concurrence, eof }
    }
}

/// Wootters concurrence. The `mu_i` are the singular values of
/// `sqrt(rho) (sy x sy) sqrt(rho)*`, i.e. the square roots of the
/// eigenvalues of `rho (sy x sy) rho* (sy x sy)`.
pub fn concurrence(state: &TwoQubitState) -> f64 {
    let root = psd_sqrt4(state.matrix());
    let yy = kron(&pauli(2), &pauli(2));
    let a = root * yy * root.map(|z| z.conj());
    let mut mu: Vec<f64> = a.singular_values().iter().copied().collect();
    mu.sort_by(|x, y| y.partial_cmp(x).unwrap());
    (mu[0] - mu[1] - mu[2] - mu[3]).clamp(0.0, 1.0)
}

/// `h((1 + sqrt(1 - C^2)) / 2)`
pub fn entanglement_of_formation(c: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&c) {
        return Err(Error::OutOfRange { name: "concurrence", value: c, range: "[0, 1]" });
    }
    Ok(binary_entropy(0.5 * (1.0 + (1.0 - c * c).sqrt())))
}
