//! Seeded Monte Carlo simulation of the entanglement-based key
//! distribution protocol with local filtering as post-selection.
//!
//! Rounds are split into shards of [`SHARD_ROUNDS`]. Shard `k` draws from
//! ChaCha8 seeded with `seed_from_u64(seed)` on stream `k`, so a report
//! depends only on `(state, config)` and not on the number of worker
//! threads.

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filtering::{apply_filters, optimal_filters, FilterPair};
use crate::linalg::{bloch_operator, kron, CMatrix2, C64};
use crate::metrics::{
    chsh_max, correlation_spectrum, key_rate_symmetric, optimal_chsh_settings, qber, ChshSettings,
    CorrelationSpectrum,
};
use crate::states::TwoQubitState;

pub const SHARD_ROUNDS: u64 = 1 << 16;
pub const DEFAULT_CHSH_TEST_FRACTION: f64 = 0.1;
const POVM_SUM_TOL: f64 = 1e-10;
const PROB_SUM_TOL: f64 = 1e-12;

/// How the filter measurement is sampled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterSampling {
    /// Draw one of the four outcomes `{M_i (x) N_j}` and keep `(1, 1)`.
    #[default]
    Povm,
    /// Accept with the success probability directly.
    PostSelected,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub rounds: u64,
    pub seed: u64,
    pub with_filtering: bool,
    /// Fraction of accepted rounds used as CHSH test rounds.
    pub chsh_test_fraction: f64,
    #[serde(default)]
    pub sampling: FilterSampling,
}

impl SimConfig {
    pub fn new(rounds: u64, seed: u64) -> Self {
        Self {
            rounds,
            seed,
            with_filtering: false,
            chsh_test_fraction: DEFAULT_CHSH_TEST_FRACTION,
            sampling: FilterSampling::Povm,
        }
    }

    pub fn with_filtering(mut self, on: bool) -> Self {
        self.with_filtering = on;
        self
    }

    pub fn check(&self) -> Result<()> {
        if self.rounds == 0 {
            return Err(Error::Config("rounds must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.chsh_test_fraction) {
            return Err(Error::Config(format!(
                "chsh_test_fraction = {} is outside [0, 1)",
                self.chsh_test_fraction
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimReport {
    pub rounds_total: u64,
    pub rounds_filter_accepted: u64,
    pub rounds_sifted: u64,
    pub rounds_chsh: u64,
    pub errors: u64,
    pub key_bits: u64,
    pub q_emp: f64,
    /// `None` when some CHSH setting pair was never drawn.
    pub s_emp: Option<f64>,
    /// Empirical correlators `E(a_x, b_y)` in the order 00, 01, 10, 11.
    pub correlators: [Option<f64>; 4],
    pub accept_rate: f64,
    pub q_analytic: f64,
    pub s_analytic: f64,
    pub p_succ_analytic: f64,
}

/// `p(+,+), p(+,-), p(-,+), p(-,-)` for Alice measuring along `a` and Bob
/// along `b`.
pub fn born_joint_distribution(state: &TwoQubitState, a: &Vector3<f64>, b: &Vector3<f64>) -> Result<[f64; 4]> {
    for (name, v) in [("a", a), ("b", b)] {
        let norm = v.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::NotUnitVector { name, norm });
        }
    }
    let proj = |v: &Vector3<f64>, sign: f64| {
        (CMatrix2::identity() + bloch_operator(v) * C64::from(sign)) * C64::from(0.5)
    };
    let mut out = [0.0; 4];
    for (k, (sa, sb)) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)].into_iter().enumerate() {
        out[k] = (state.matrix() * kron(&proj(a, sa), &proj(b, sb))).trace().re;
    }
    Ok(out)
}

/// Four-outcome probabilities `Tr[(M_i^dag M_i (x) N_j^dag N_j) rho]` in the
/// order 11, 12, 21, 22.
pub fn filter_outcome_probabilities(state: &TwoQubitState, pair: &FilterPair) -> Result<[f64; 4]> {
    let (m2, n2) = pair.complements();
    let e = |f: &CMatrix2| f.adjoint() * f;
    let ms = [e(pair.m1()), e(&m2)];
    let ns = [e(pair.n1()), e(&n2)];
    let mut out = [0.0; 4];
    for i in 0..2 {
        for j in 0..2 {
            out[2 * i + j] = (kron(&ms[i], &ns[j]) * state.matrix()).trace().re;
        }
    }
    let sum: f64 = out.iter().sum();
    if out.iter().any(|&p| p < -POVM_SUM_TOL) || (sum - 1.0).abs() > POVM_SUM_TOL {
        return Err(Error::InvalidState(format!("filter POVM probabilities {out:?} do not sum to 1")));
    }
    Ok(out)
}

struct Tables {
    accept: Acceptance,
    chsh_fraction: f64,
    key: [[f64; 4]; 2],
    key_flip: [bool; 2],
    chsh: [[f64; 4]; 4],
}

enum Acceptance {
    Always,
    Povm([f64; 4]),
    Bernoulli(f64),
}

#[derive(Clone, Copy, Default)]
struct Counts {
    accepted: u64,
    sifted: u64,
    errors: u64,
    // [setting pair][same, different]
    chsh: [[u64; 2]; 4],
}

impl Counts {
    fn merge(mut self, o: Counts) -> Counts {
        self.accepted += o.accepted;
        self.sifted += o.sifted;
        self.errors += o.errors;
        for k in 0..4 {
            self.chsh[k][0] += o.chsh[k][0];
            self.chsh[k][1] += o.chsh[k][1];
        }
        self
    }
}

fn sample4<R: Rng>(rng: &mut R, p: &[f64; 4]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (k, &pk) in p.iter().enumerate().take(3) {
        acc += pk.max(0.0);
        if u < acc {
            return k;
        }
    }
    3
}

/// Outcome index with equal signs on both sides.
fn same_sign(k: usize) -> bool {
    k == 0 || k == 3
}

fn run_shard(tables: &Tables, seed: u64, shard: u64, rounds: u64) -> Counts {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shard);
    let mut c = Counts::default();
    for _ in 0..rounds {
        let accepted = match &tables.accept {
            Acceptance::Always => true,
            Acceptance::Povm(p) => sample4(&mut rng, p) == 0,
            Acceptance::Bernoulli(p) => rng.random::<f64>() < *p,
        };
        if !accepted {
            continue;
        }
        c.accepted += 1;
        if rng.random::<f64>() < tables.chsh_fraction {
            let pair = rng.random_range(0..4usize);
            let k = sample4(&mut rng, &tables.chsh[pair]);
            c.chsh[pair][usize::from(!same_sign(k))] += 1;
        } else {
            let x: usize = rng.random_range(0..2);
            let y: usize = rng.random_range(0..2);
            if x != y {
                continue;
            }
            c.sifted += 1;
            let k = sample4(&mut rng, &tables.key[x]);
            if same_sign(k) == tables.key_flip[x] {
                c.errors += 1;
            }
        }
    }
    c
}

fn fallback_settings() -> ChshSettings {
    ChshSettings { a0: Vector3::z(), a1: Vector3::x(), b0: Vector3::z(), b1: Vector3::x() }
}

pub fn run_protocol(state: &TwoQubitState, config: &SimConfig) -> Result<SimReport> {
    config.check()?;
    let state = state.clone().checked()?;

    let (measured, accept, p_succ) = if config.with_filtering {
        let pair = optimal_filters(&state)?;
        let povm = filter_outcome_probabilities(&state, &pair)?;
        let (filtered, p) = apply_filters(&state, &pair)?;
        let accept = match config.sampling {
            FilterSampling::Povm => Acceptance::Povm(povm),
            FilterSampling::PostSelected => Acceptance::Bernoulli(p),
        };
        (filtered, accept, p)
    } else {
        (state, Acceptance::Always, 1.0)
    };

    let spec: CorrelationSpectrum = correlation_spectrum(&measured);
    let settings = optimal_chsh_settings(&spec).unwrap_or_else(|_| fallback_settings());
    let mut key = [[0.0; 4]; 2];
    let mut key_flip = [false; 2];
    for i in 0..2 {
        key[i] = born_joint_distribution(&measured, &spec.alice_dirs[i], &spec.bob_dirs[i])?;
        key_flip[i] = spec.signs[i] < 0.0;
    }
    let a = [settings.a0, settings.a1];
    let b = [settings.b0, settings.b1];
    let mut chsh = [[0.0; 4]; 4];
    for x in 0..2 {
        for y in 0..2 {
            chsh[2 * x + y] = born_joint_distribution(&measured, &a[x], &b[y])?;
        }
    }
    for p in key.iter().chain(chsh.iter()) {
        let sum: f64 = p.iter().sum();
        debug_assert!((sum - 1.0).abs() < PROB_SUM_TOL * 10.0, "Born table sums to {sum}");
    }
    let tables = Tables { accept, chsh_fraction: config.chsh_test_fraction, key, key_flip, chsh };

    let shards = config.rounds.div_ceil(SHARD_ROUNDS);
    let counts: Vec<Counts> = (0..shards)
        .into_par_iter()
        .map(|k| {
            let len = SHARD_ROUNDS.min(config.rounds - k * SHARD_ROUNDS);
            run_shard(&tables, config.seed, k, len)
        })
        .collect();
    let total = counts.into_iter().fold(Counts::default(), Counts::merge);

    if total.sifted == 0 {
        return Err(Error::NoSiftedRounds);
    }
    let q_emp = total.errors as f64 / total.sifted as f64;
    let correlators = total.chsh.map(|[same, diff]| {
        let n = same + diff;
        (n > 0).then(|| (same as f64 - diff as f64) / n as f64)
    });
    let s_emp = match correlators {
        [Some(e00), Some(e01), Some(e10), Some(e11)] => Some(e00 + e01 + e10 - e11),
        _ => None,
    };
    let r = key_rate_symmetric(q_emp).r_min.max(0.0);
    let key_bits = (total.sifted as f64 * r).floor() as u64;

    Ok(SimReport {
        rounds_total: config.rounds,
        rounds_filter_accepted: total.accepted,
        rounds_sifted: total.sifted,
        rounds_chsh: total.chsh.iter().map(|c| c[0] + c[1]).sum(),
        errors: total.errors,
        key_bits,
        q_emp,
        s_emp,
        correlators,
        accept_rate: total.accepted as f64 / config.rounds as f64,
        q_analytic: qber(&spec, 2)?,
        s_analytic: if spec.lambdas[0] > 0.0 { chsh_max(&spec) } else { 0.0 },
        p_succ_analytic: p_succ,
    })
}
