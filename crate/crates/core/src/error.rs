use thiserror::Error;

use crate::filtering::XFormParams;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter `{name}` = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("Mueller matrix must have m[0][0] = 1, got {0}")]
    MuellerNormalization(f64),

    #[error("vector `{name}` is not a unit vector (norm {norm})")]
    NotUnitVector { name: &'static str, norm: f64 },

    #[error("no correlations: the two largest singular values vanish")]
    NoCorrelations,

    #[error("number of bases must be 2 or 3, got {0}")]
    UnsupportedBases(u8),

    #[error("filter operator is singular (|det| = {0})")]
    SingularFilter(f64),

    #[error("filter operator norm {0} exceeds 1")]
    FilterNorm(f64),

    #[error("not a proper orthochronous Lorentz transform: {0}")]
    NotLorentz(String),

    #[error("normal form undefined/trivial: state has no correlations and no local Bloch vectors")]
    TrivialNormalForm,

    #[error("eigen-decomposition failed: {0}")]
    Eigen(String),

    #[error(
        "Mueller matrix only reduces to the X-form (a={a}, b={b}, c={c}, d={d}); \
         d=0 corresponds to a separable initial state",
        a = .0.a, b = .0.b, c = .0.c, d = .0.d
    )]
    XForm(XFormParams),

    #[error("filter success probability vanishes ({0})")]
    VanishingSuccess(f64),

    #[error("simulation produced no sifted key rounds")]
    NoSiftedRounds,

    #[error("invalid configuration: {0}")]
    Config(String),
}
