//! Python bindings: states, metrics, optimal filtering, the protocol
//! simulator and the Gisin sweep.

use bellkey::filtering::{self, FilterPair, StateSummary};
use bellkey::linalg::{CMatrix2, CMatrix4, C64};
use bellkey::metrics;
use bellkey::sim::{self, FilterSampling, SimConfig};
use bellkey::states::{self, BellLabel};
use bellkey::sweep::{self, GridAxis};
use bellkey::Error;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

pyo3::create_exception!(bellkey_py, BellkeyError, PyValueError);
pyo3::create_exception!(bellkey_py, XFormError, BellkeyError);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::XForm(p) => XFormError::new_err((e.to_string(), p.a, p.b, p.c, p.d)),
        other => BellkeyError::new_err(other.to_string()),
    }
}

fn cmat2_rows(m: &CMatrix2) -> Vec<Vec<C64>> {
    (0..2).map(|i| (0..2).map(|j| m[(i, j)]).collect()).collect()
}

fn parse_bell(label: &str) -> PyResult<BellLabel> {
    match label {
        "phi+" => Ok(BellLabel::PhiPlus),
        "phi-" => Ok(BellLabel::PhiMinus),
        "psi+" => Ok(BellLabel::PsiPlus),
        "psi-" => Ok(BellLabel::PsiMinus),
        _ => Err(PyValueError::new_err(format!("unknown Bell label '{label}'; expected phi+, phi-, psi+ or psi-"))),
    }
}

/// Two-qubit density operator, basis |00>, |01>, |10>, |11>.
#[pyclass(module = "bellkey_py", name = "TwoQubitState", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyState {
    inner: states::TwoQubitState,
}

#[pymethods]
impl PyState {
    /// Validated state from a 4x4 nested list of complex numbers.
    #[staticmethod]
    fn from_matrix(rows: Vec<Vec<C64>>) -> PyResult<Self> {
        if rows.len() != 4 || rows.iter().any(|r| r.len() != 4) {
            return Err(PyValueError::new_err("density matrix must be 4x4"));
        }
        let rho = CMatrix4::from_fn(|i, j| rows[i][j]);
        let inner = states::TwoQubitState::from_matrix(rho).checked().map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn bell(label: &str) -> PyResult<Self> {
        Ok(Self { inner: states::TwoQubitState::bell(parse_bell(label)?) })
    }

    #[staticmethod]
    fn werner(p: f64) -> PyResult<Self> {
        Ok(Self { inner: states::werner(p).map_err(to_py)? })
    }

    #[staticmethod]
    fn gisin(alpha: f64, mu: f64) -> PyResult<Self> {
        Ok(Self { inner: states::gisin(alpha, mu).map_err(to_py)? })
    }

    #[staticmethod]
    fn maximally_mixed() -> Self {
        Self { inner: states::TwoQubitState::maximally_mixed() }
    }

    fn depolarize(&self, p: f64) -> PyResult<Self> {
        Ok(Self { inner: self.inner.depolarize(p).map_err(to_py)? })
    }

    fn matrix(&self) -> Vec<Vec<C64>> {
        let m = self.inner.matrix();
        (0..4).map(|i| (0..4).map(|j| m[(i, j)]).collect()).collect()
    }

    /// `M[i][j] = Tr(rho sigma_i (x) sigma_j)` with `sigma_0 = 1`.
    fn mueller(&self) -> Vec<Vec<f64>> {
        let m = self.inner.to_mueller().0;
        (0..4).map(|i| (0..4).map(|j| m[(i, j)]).collect()).collect()
    }

    fn is_valid(&self) -> bool {
        self.inner.validate().ok
    }

    fn __repr__(&self) -> String {
        let m = self.inner.to_mueller();
        let r = m.alice_bloch();
        let s = m.bob_bloch();
        format!("TwoQubitState(r=[{:.4}, {:.4}, {:.4}], s=[{:.4}, {:.4}, {:.4}])", r.x, r.y, r.z, s.x, s.y, s.z)
    }
}

/// Singular values of the correlation block, descending.
#[pyfunction]
fn correlation_spectrum(state: &PyState) -> [f64; 3] {
    metrics::correlation_spectrum(&state.inner).lambdas
}

#[pyfunction]
fn chsh_max(state: &PyState) -> f64 {
    metrics::chsh_max(&metrics::correlation_spectrum(&state.inner))
}

#[pyfunction]
#[pyo3(signature = (state, num_bases = 2))]
fn qber(state: &PyState, num_bases: u8) -> PyResult<f64> {
    metrics::qber(&metrics::correlation_spectrum(&state.inner), num_bases).map_err(to_py)
}

/// `(r_min, distillable)` under symmetric attacks.
#[pyfunction]
fn key_rate(q: f64) -> (f64, bool) {
    let k = metrics::key_rate_symmetric(q);
    (k.r_min, k.distillable)
}

#[pyfunction]
fn q_crit() -> f64 {
    metrics::q_crit()
}

#[pyfunction]
fn q_crit_symmetric() -> f64 {
    metrics::q_crit_symmetric()
}

#[pyfunction]
fn region(state: &PyState) -> &'static str {
    metrics::classify(&metrics::correlation_spectrum(&state.inner)).as_str()
}

#[pyfunction]
fn concurrence(state: &PyState) -> f64 {
    filtering::concurrence(&state.inner)
}

#[pyfunction]
fn entanglement_of_formation(c: f64) -> PyResult<f64> {
    filtering::entanglement_of_formation(c).map_err(to_py)
}

#[pyclass(module = "bellkey_py", name = "FilterOutcome", frozen, get_all)]
pub struct PyFilterOutcome {
    p_succ: f64,
    r_filtered: f64,
    m1: Vec<Vec<C64>>,
    n1: Vec<Vec<C64>>,
    identity: bool,
    filtered: PyState,
    lam_sq_sum_before: f64,
    lam_sum_before: f64,
    lam_sq_sum_after: f64,
    lam_sum_after: f64,
    region_before: &'static str,
    region_after: &'static str,
}

/// Optimal local filters and the resulting key rate. Raises `XFormError`
/// when only the X-form normal form exists.
#[pyfunction]
fn filtered_key_rate(state: &PyState) -> PyResult<PyFilterOutcome> {
    let out = filtering::filtered_key_rate(&state.inner).map_err(to_py)?;
    Ok(PyFilterOutcome {
        p_succ: out.p_succ,
        r_filtered: out.r_filtered,
        m1: cmat2_rows(out.filters.m1()),
        n1: cmat2_rows(out.filters.n1()),
        identity: out.filters.is_identity(),
        filtered: PyState { inner: out.filtered },
        lam_sq_sum_before: out.before.lam_sq_sum,
        lam_sum_before: out.before.lam_sum,
        lam_sq_sum_after: out.after.lam_sq_sum,
        lam_sum_after: out.after.lam_sum,
        region_before: out.before.region.as_str(),
        region_after: out.after.region.as_str(),
    })
}

fn parse_filter(rows: Vec<Vec<C64>>, name: &str) -> PyResult<CMatrix2> {
    if rows.len() != 2 || rows.iter().any(|r| r.len() != 2) {
        return Err(PyValueError::new_err(format!("{name} must be 2x2")));
    }
    Ok(CMatrix2::from_fn(|i, j| rows[i][j]))
}

/// Applies `m1 (x) n1` and renormalises; returns `(state, p_succ)`.
#[pyfunction]
fn apply_filters(state: &PyState, m1: Vec<Vec<C64>>, n1: Vec<Vec<C64>>) -> PyResult<(PyState, f64)> {
    let pair = FilterPair::new(parse_filter(m1, "m1")?, parse_filter(n1, "n1")?).map_err(to_py)?;
    let (inner, p) = filtering::apply_filters(&state.inner, &pair).map_err(to_py)?;
    Ok((PyState { inner }, p))
}

#[pyclass(module = "bellkey_py", name = "SimReport", frozen, get_all)]
pub struct PySimReport {
    rounds_total: u64,
    rounds_filter_accepted: u64,
    rounds_sifted: u64,
    rounds_chsh: u64,
    errors: u64,
    key_bits: u64,
    q_emp: f64,
    s_emp: Option<f64>,
    correlators: [Option<f64>; 4],
    accept_rate: f64,
    q_analytic: f64,
    s_analytic: f64,
    p_succ_analytic: f64,
}

/// Monte Carlo run of the protocol. Deterministic in `seed`.
#[pyfunction]
#[pyo3(signature = (state, rounds, seed, with_filtering = false, chsh_fraction = sim::DEFAULT_CHSH_TEST_FRACTION, post_selected = false))]
fn simulate(
    py: Python<'_>,
    state: &PyState,
    rounds: u64,
    seed: u64,
    with_filtering: bool,
    chsh_fraction: f64,
    post_selected: bool,
) -> PyResult<PySimReport> {
    let mut cfg = SimConfig::new(rounds, seed).with_filtering(with_filtering);
    cfg.chsh_test_fraction = chsh_fraction;
    cfg.sampling = if post_selected { FilterSampling::PostSelected } else { FilterSampling::Povm };
    let inner = &state.inner;
    let r = py.detach(|| sim::run_protocol(inner, &cfg)).map_err(to_py)?;
    Ok(PySimReport {
        rounds_total: r.rounds_total,
        rounds_filter_accepted: r.rounds_filter_accepted,
        rounds_sifted: r.rounds_sifted,
        rounds_chsh: r.rounds_chsh,
        errors: r.errors,
        key_bits: r.key_bits,
        q_emp: r.q_emp,
        s_emp: r.s_emp,
        correlators: r.correlators,
        accept_rate: r.accept_rate,
        q_analytic: r.q_analytic,
        s_analytic: r.s_analytic,
        p_succ_analytic: r.p_succ_analytic,
    })
}

/// Gisin-family grid as a list of tuples
/// `(alpha, mu, lam_sq_sum, lam_sum, region, filterable, p_succ,
/// lam_sq_sum_after, lam_sum_after, r_filtered)`.
#[pyfunction]
#[allow(clippy::type_complexity)]
fn gisin_sweep(
    py: Python<'_>,
    alpha: (f64, f64, usize),
    mu: (f64, f64, usize),
) -> PyResult<Vec<(f64, f64, f64, f64, &'static str, bool, f64, f64, f64, f64)>> {
    let a = GridAxis::new(alpha.0, alpha.1, alpha.2).map_err(to_py)?;
    let m = GridAxis::new(mu.0, mu.1, mu.2).map_err(to_py)?;
    let rows = py.detach(|| sweep::gisin_sweep(&a, &m)).map_err(to_py)?;
    Ok(rows
        .into_iter()
        .map(|r| {
            (
                r.alpha,
                r.mu,
                r.lam_sq_sum,
                r.lam_sum,
                r.region.as_str(),
                r.filterable,
                r.p_succ,
                r.lam_sq_sum_after,
                r.lam_sum_after,
                r.r_filtered,
            )
        })
        .collect())
}

/// `(lam_sq_sum, lam_sum, s_max, q, r_min)` for two key bases.
#[pyfunction]
fn summary(state: &PyState) -> (f64, f64, f64, f64, f64) {
    let s = StateSummary::of(&state.inner);
    (s.lam_sq_sum, s.lam_sum, s.s_max, s.key.q, s.key.r_min)
}

#[pymodule]
fn bellkey_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("BellkeyError", m.py().get_type::<BellkeyError>())?;
    m.add("XFormError", m.py().get_type::<XFormError>())?;
    m.add_class::<PyState>()?;
    m.add_class::<PyFilterOutcome>()?;
    m.add_class::<PySimReport>()?;
    m.add_function(wrap_pyfunction!(correlation_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(chsh_max, m)?)?;
    m.add_function(wrap_pyfunction!(qber, m)?)?;
    m.add_function(wrap_pyfunction!(key_rate, m)?)?;
    m.add_function(wrap_pyfunction!(q_crit, m)?)?;
    m.add_function(wrap_pyfunction!(q_crit_symmetric, m)?)?;
    m.add_function(wrap_pyfunction!(region, m)?)?;
    m.add_function(wrap_pyfunction!(concurrence, m)?)?;
    m.add_function(wrap_pyfunction!(entanglement_of_formation, m)?)?;
    m.add_function(wrap_pyfunction!(filtered_key_rate, m)?)?;
    m.add_function(wrap_pyfunction!(apply_filters, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(gisin_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(summary, m)?)?;
    Ok(())
}
