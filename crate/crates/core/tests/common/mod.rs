#![allow(dead_code)]

use argmin::core::{CostFunction, Error as ArgminError, Executor, State};
use argmin::solver::neldermead::NelderMead;
use bellkey::filtering::{apply_filters, FilterPair};
use bellkey::linalg::{operator_norm2, pauli, CMatrix2, C64};
use bellkey::metrics::{chsh_max, correlation_spectrum};
use bellkey::states::TwoQubitState;
use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn cnormal<R: Rng>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Ginibre 2x2 with `|det|` bounded away from zero, unnormalised.
pub fn random_nonsingular<R: Rng>(rng: &mut R) -> CMatrix2 {
    loop {
        let f = CMatrix2::from_fn(|_, _| cnormal(rng));
        let s = f.singular_values();
        if s.min() > 0.05 * s.max() {
            return f;
        }
    }
}

/// Random filter scaled to unit operator norm.
pub fn random_filter<R: Rng>(rng: &mut R) -> CMatrix2 {
    let f = random_nonsingular(rng);
    f / C64::from(operator_norm2(&f))
}

pub fn random_unitary<R: Rng>(rng: &mut R) -> CMatrix2 {
    
    CMatrix2::from_fn(|_, _| cnormal(rng)).qr().q()
}

pub fn unit_vector<R: Rng>(rng: &mut R) -> Vector3<f64> {
    let v = Vector3::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
    v.normalize()
}

pub fn random_state<R: Rng>(rng: &mut R) -> TwoQubitState {
    if rng.random::<f64>() < 0.2 {
        TwoQubitState::random_pure(rng)
    } else {
        TwoQubitState::random_mixed(rng)
    }
}

/// Bell-diagonal state with correlation block `diag(t)`, kept inside the
/// tetrahedron of valid states.
pub fn random_bell_diagonal<R: Rng>(rng: &mut R) -> Vector3<f64> {
    loop {
        let t = Vector3::from_fn(|_, _| rng.random_range(-1.0..1.0));
        let s = TwoQubitState::from_pauli(&Vector3::zeros(), &Vector3::zeros(), &Matrix3::from_diagonal(&t));
        if s.validate().min_eig > 1e-3 {
            return t;
        }
    }
}

/// Largest boost rapidity explored by the filter search.
pub const MAX_RAPIDITY: f64 = 3.0;

/// `exp(v . sigma)` with `|v|` squashed smoothly below [`MAX_RAPIDITY`]:
/// positive-definite filters suffice for CHSH optimisation since local
/// unitaries leave the spectrum unchanged, and the bound keeps the search
/// away from the projective limit where every state becomes a product.
pub fn positive_filter(w: &[f64]) -> CMatrix2 {
    let raw = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
    let scale = if raw > 0.0 { MAX_RAPIDITY * (raw / MAX_RAPIDITY).tanh() / raw } else { 0.0 };
    let v = [w[0] * scale, w[1] * scale, w[2] * scale];
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    let mut f = pauli(0) * C64::from(n.cosh());
    if n > 0.0 {
        let k = n.sinh() / n;
        for i in 0..3 {
            f += pauli(i + 1) * C64::from(k * v[i]);
        }
    }
    f / C64::from(operator_norm2(&f))
}

/// CHSH maximum of the state after filters `exp(v_a . sigma) (x) exp(v_b . sigma)`.
pub fn filtered_chsh(state: &TwoQubitState, params: &[f64]) -> f64 {
    let pair = FilterPair::new(positive_filter(&params[0..3]), positive_filter(&params[3..6])).unwrap();
    match apply_filters(state, &pair) {
        Ok((out, _)) => chsh_max(&correlation_spectrum(&out)),
        Err(_) => 0.0,
    }
}

struct Negated<'a>(&'a dyn Fn(&[f64]) -> f64);

impl CostFunction for Negated<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Self::Param) -> Result<f64, ArgminError> {
        Ok(-(self.0)(p))
    }
}

/// Nelder-Mead maximisation from `start` with an axis-aligned initial simplex.
pub fn maximize(f: &dyn Fn(&[f64]) -> f64, start: &[f64], step: f64, iters: u64) -> (Vec<f64>, f64) {
    let mut simplex = vec![start.to_vec()];
    for i in 0..start.len() {
        let mut p = start.to_vec();
        p[i] += step;
        simplex.push(p);
    }
    let solver = NelderMead::new(simplex).with_sd_tolerance(1e-13).unwrap();
    let res = Executor::new(Negated(f), solver)
        .configure(|s| s.max_iters(iters))
        .run()
        .unwrap();
    let best = res.state().get_best_param().unwrap().clone();
    let value = -res.state().get_best_cost();
    (best, value)
}

/// Best of several restarts, the first at the origin and the rest at random
/// points in `[-width, width]^n`, each polished by a second pass.
pub fn multistart_maximize<R: Rng>(
    f: &dyn Fn(&[f64]) -> f64,
    dim: usize,
    starts: usize,
    width: f64,
    rng: &mut R,
) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for k in 0..starts {
        let x0: Vec<f64> =
            (0..dim).map(|_| if k == 0 { 0.0 } else { rng.random_range(-width..width) }).collect();
        let (x, _) = maximize(f, &x0, 0.3, 3000);
        let (_, v) = maximize(f, &x, 0.02, 3000);
        best = best.max(v);
    }
    best
}

pub fn cmax2(m: &CMatrix2) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn sphere(theta: f64, phi: f64) -> Vector3<f64> {
    Vector3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos())
}

/// CHSH optimum over a 40x40 angular grid for each of Alice's two settings,
/// with Bob's settings chosen optimally for each pair
/// (`|T^T(a0+a1)| + |T^T(a0-a1)|`), then refined by Nelder-Mead.
pub fn brute_force_chsh(t: &Matrix3<f64>) -> f64 {
    const N: usize = 40;
    let mut angles = Vec::with_capacity(N * N);
    for i in 0..N {
        for j in 0..N {
            let theta = std::f64::consts::PI * (i as f64 + 0.5) / N as f64;
            let phi = 2.0 * std::f64::consts::PI * j as f64 / N as f64;
            angles.push((theta, phi));
        }
    }
    let u: Vec<Vector3<f64>> = angles.iter().map(|&(th, ph)| t.transpose() * sphere(th, ph)).collect();
    let mut best = (0.0, 0, 0);
    for k in 0..u.len() {
        for l in k..u.len() {
            let v = (u[k] + u[l]).norm() + (u[k] - u[l]).norm();
            if v > best.0 {
                best = (v, k, l);
            }
        }
    }
    let value = |p: &[f64]| {
        let (a0, a1) = (sphere(p[0], p[1]), sphere(p[2], p[3]));
        (t.transpose() * (a0 + a1)).norm() + (t.transpose() * (a0 - a1)).norm()
    };
    let (k, l) = (angles[best.1], angles[best.2]);
    let (_, refined) = maximize(&value, &[k.0, k.1, l.0, l.1], 0.05, 4000);
    refined.max(best.0)
}
