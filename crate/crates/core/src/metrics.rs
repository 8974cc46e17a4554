//! CHSH optimisation, QBER and key-rate formulas, and the
//! (lambda_1, lambda_2) region classification.

use std::cmp::Ordering;

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::states::TwoQubitState;

const UNIT_TOL: f64 = 1e-10;
const TIE_TOL: f64 = 1e-12;

/// Singular values of the correlation block with aligned direction pairs.
///
/// `alice_dirs[i]^T T bob_dirs[i] = signs[i] * lambdas[i]`. Each direction is
/// canonicalised so its largest-magnitude component is positive; the sign of
/// the correlation is carried separately in `signs`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrelationSpectrum {
    pub lambdas: [f64; 3],
    pub alice_dirs: [Vector3<f64>; 3],
    pub bob_dirs: [Vector3<f64>; 3],
    pub signs: [f64; 3],
}

impl CorrelationSpectrum {
    pub fn from_correlations(t: &Matrix3<f64>) -> Self {
        let svd = t.svd(true, true);
        let u = svd.u.expect("svd computed with u");
        let v_t = svd.v_t.expect("svd computed with v_t");

        let mut triples: Vec<(f64, Vector3<f64>, Vector3<f64>, f64)> = (0..3)
            .map(|k| {
                let (a, sa) = canonical(u.column(k).into_owned());
                let (b, sb) = canonical(v_t.row(k).transpose());
                (svd.singular_values[k], a, b, sa * sb)
            })
            .collect();

        triples.sort_by(|x, y| {
            if (x.0 - y.0).abs() > TIE_TOL * x.0.max(y.0).max(1.0) {
                y.0.partial_cmp(&x.0).unwrap_or(Ordering::Equal)
            } else {
                lex_desc(&x.1, &y.1)
            }
        });

        let mut out = Self {
            lambdas: [0.0; 3],
            alice_dirs: [Vector3::zeros(); 3],
            bob_dirs: [Vector3::zeros(); 3],
            signs: [1.0; 3],
        };
        for (k, (l, a, b, s)) in triples.into_iter().enumerate() {
            out.lambdas[k] = l;
            out.alice_dirs[k] = a;
            out.bob_dirs[k] = b;
            out.signs[k] = s;
        }
        // tie-broken neighbours may differ by round-off in the wrong direction
        for k in 1..3 {
            out.lambdas[k] = out.lambdas[k].min(out.lambdas[k - 1]);
        }
        out
    }

    /// `lambda_1^2 + lambda_2^2`
    pub fn leading_square_sum(&self) -> f64 {
        self.lambdas[0].powi(2) + self.lambdas[1].powi(2)
    }

    /// `lambda_1 + lambda_2`
    pub fn leading_sum(&self) -> f64 {
        self.lambdas[0] + self.lambdas[1]
    }
}

fn canonical(v: Vector3<f64>) -> (Vector3<f64>, f64) {
    let pivot = v.iamax();
    if v[pivot] < 0.0 {
        (-v, -1.0)
    } else {
        (v, 1.0)
    }
}

fn lex_desc(a: &Vector3<f64>, b: &Vector3<f64>) -> Ordering {
    for k in 0..3 {
        if (a[k] - b[k]).abs() > TIE_TOL {
            return b[k].partial_cmp(&a[k]).unwrap_or(Ordering::Equal);
        }
    }
    Ordering::Equal
}

pub fn correlation_spectrum(state: &TwoQubitState) -> CorrelationSpectrum {
    CorrelationSpectrum::from_correlations(&state.to_mueller().correlations())
}

/// Maximal CHSH value over all projective settings: `2 sqrt(l1^2 + l2^2)`.
pub fn chsh_max(spec: &CorrelationSpectrum) -> f64 {
    2.0 * spec.leading_square_sum().sqrt()
}

/// Bloch directions of the two dichotomic observables on each side.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChshSettings {
    pub a0: Vector3<f64>,
    pub a1: Vector3<f64>,
    pub b0: Vector3<f64>,
    pub b1: Vector3<f64>,
}

impl ChshSettings {
    pub fn check(&self) -> Result<()> {
        for (name, v) in [("a0", &self.a0), ("a1", &self.a1), ("b0", &self.b0), ("b1", &self.b1)] {
            let norm = v.norm();
            if (norm - 1.0).abs() > UNIT_TOL {
                return Err(Error::NotUnitVector { name, norm });
            }
        }
        Ok(())
    }
}

/// Settings that attain [`chsh_max`]: Alice measures along the two leading
/// singular directions, Bob along the rotated bisectors of his.
pub fn optimal_chsh_settings(spec: &CorrelationSpectrum) -> Result<ChshSettings> {
    let norm = spec.leading_square_sum().sqrt();
    if norm <= 0.0 {
        return Err(Error::NoCorrelations);
    }
    let cos = spec.lambdas[0] / norm;
    let sin = spec.lambdas[1] / norm;
    let a0 = spec.alice_dirs[0] * spec.signs[0];
    let a1 = spec.alice_dirs[1] * spec.signs[1];
    let b0 = spec.bob_dirs[0] * cos + spec.bob_dirs[1] * sin;
    let b1 = spec.bob_dirs[0] * cos - spec.bob_dirs[1] * sin;
    Ok(ChshSettings { a0, a1, b0, b1 })
}

/// `S = a0^T T b0 + a0^T T b1 + a1^T T b0 - a1^T T b1`
pub fn chsh_value(state: &TwoQubitState, settings: &ChshSettings) -> Result<f64> {
    settings.check()?;
    Ok(chsh_from_correlations(&state.to_mueller().correlations(), settings))
}

pub(crate) fn chsh_from_correlations(t: &Matrix3<f64>, s: &ChshSettings) -> f64 {
    let e = |a: &Vector3<f64>, b: &Vector3<f64>| a.dot(&(t * b));
    e(&s.a0, &s.b0) + e(&s.a0, &s.b1) + e(&s.a1, &s.b0) - e(&s.a1, &s.b1)
}

/// QBER for `num_bases` mutually unbiased bases per party, measured along
/// the leading singular directions.
pub fn qber(spec: &CorrelationSpectrum, num_bases: u8) -> Result<f64> {
    let [l1, l2, l3] = spec.lambdas;
    match num_bases {
        2 => Ok((2.0 - l1 - l2) / 4.0),
        3 => Ok((3.0 - l1 - l2 - l3) / 6.0),
        n => Err(Error::UnsupportedBases(n)),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KeyMetrics {
    pub q: f64,
    pub r_min: f64,
    pub distillable: bool,
}

/// `h(x) = -x log2 x - (1-x) log2 (1-x)` with `0 log 0 = 0`.
pub fn binary_entropy(x: f64) -> f64 {
    let term = |p: f64| if p <= 0.0 { 0.0 } else { -p * p.log2() };
    term(x) + term(1.0 - x)
}

/// Key rate under symmetric attacks,
/// `r_min = 1 + 2(1-q) log2(1-q) + 2 q log2 q`. The input is clamped to
/// `[0, 1]`; `r_min` is reported unclamped.
pub fn key_rate_symmetric(q: f64) -> KeyMetrics {
    let q = q.clamp(0.0, 1.0);
    let r_min = 1.0 - 2.0 * binary_entropy(q);
    KeyMetrics { q, r_min, distillable: r_min > 0.0 }
}

/// `(2 - sqrt 2)/4`: QBER of the least-error states that just saturate CHSH.
pub fn q_crit() -> f64 {
    (2.0 - std::f64::consts::SQRT_2) / 4.0
}

/// Root of the symmetric-attack key rate in (0, 1/2), by bisection.
pub fn q_crit_symmetric() -> f64 {
    let (mut lo, mut hi) = (1e-6, 0.5 - 1e-6);
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if key_rate_symmetric(mid).r_min > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Region {
    /// `l1^2 + l2^2 <= 1`: no CHSH violation.
    NonviolatingUnusable,
    /// CHSH-violating but `l1 + l2 <= sqrt 2`, i.e. QBER at or above `q_crit`.
    ViolatingUnusable,
    ViolatingUsable,
}

impl Region {
    pub fn as_str(self) -> &'static str {
        match self {
            Region::NonviolatingUnusable => "NonviolatingUnusable",
            Region::ViolatingUnusable => "ViolatingUnusable",
            Region::ViolatingUsable => "ViolatingUsable",
        }
    }
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn classify_lambdas(l1: f64, l2: f64) -> Region {
    if l1 * l1 + l2 * l2 <= 1.0 {
        Region::NonviolatingUnusable
    } else if l1 + l2 <= std::f64::consts::SQRT_2 {
        Region::ViolatingUnusable
    } else {
        Region::ViolatingUsable
    }
}

pub fn classify(spec: &CorrelationSpectrum) -> Region {
    classify_lambdas(spec.lambdas[0], spec.lambdas[1])
}
