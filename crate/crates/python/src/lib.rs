//! Python bindings for the ergoloc library.

use std::collections::BTreeMap;

use ergoloc_core::models::{
    jc_analytic as jc_closed, jc_dressed_state, jc_phase_family_state, jc_system as jc_model, xxz_analytic as xxz_closed,
    xxz_bethe_state, xxz_system as xxz_model, AnalyticValues,
};
use ergoloc_core::{
    build_m_matrix, choi_cost, delta_off, global_ergotropy as global, hs_gap_bounds, optimize_local_unitary,
    polar_upper_bound, qubit_local_ergotropy, ComplexMatrix, sdp_upper_bound, switch_off_ergotropy, Error, GpoBasis, JcParams,
    OptimizerConfig, SdpSettings, Sign, XxzParams,
};
use nalgebra::DMatrix;
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

type Rows = Vec<Vec<Complex64>>;

fn shape<T>(rows: &[Vec<T>]) -> PyResult<(usize, usize)> {
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(PyValueError::new_err("matrix rows have different lengths"));
    }
    Ok((rows.len(), m))
}

fn to_matrix(rows: &Rows) -> PyResult<ComplexMatrix> {
    let (n, m) = shape(rows)?;
    Ok(ComplexMatrix::from_fn(n, m, |r, c| rows[r][c]))
}

fn to_real(rows: &[Vec<f64>]) -> PyResult<DMatrix<f64>> {
    let (n, m) = shape(rows)?;
    Ok(DMatrix::from_fn(n, m, |r, c| rows[r][c]))
}

fn from_matrix(a: &ComplexMatrix) -> Rows {
    a.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn py_err(e: Error) -> PyErr {
    match e {
        Error::NonConvergence { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn parse_sign(sign: &str) -> PyResult<Sign> {
    match sign {
        "+" | "plus" => Ok(Sign::Plus),
        "-" | "minus" => Ok(Sign::Minus),
        _ => Err(PyValueError::new_err(format!("sign must be '+' or '-', got {sign:?}"))),
    }
}

fn analytic_dict(a: &AnalyticValues) -> BTreeMap<&'static str, f64> {
    BTreeMap::from([
        ("energy", a.energy),
        ("delta_off", a.delta_off),
        ("switch_off", a.switch_off),
        ("local_ergotropy", a.local_ergotropy),
    ])
}

/// A state with `H = H_S ⊗ I + I ⊗ H_E + V` on `C^{d_s} ⊗ C^{d_e}` (S-major ordering).
#[pyclass(name = "BipartiteSystem", module = "ergoloc", frozen)]
struct PySystem {
    inner: ergoloc_core::BipartiteSystem,
}

#[pymethods]
impl PySystem {
    #[new]
    fn new(d_s: usize, d_e: usize, rho: Rows, h_s: Rows, h_e: Rows, v: Rows) -> PyResult<Self> {
        let inner = ergoloc_core::BipartiteSystem::new(
            d_s,
            d_e,
            to_matrix(&rho)?,
            to_matrix(&h_s)?,
            to_matrix(&h_e)?,
            to_matrix(&v)?,
        )
        .map_err(py_err)?;
        Ok(PySystem { inner })
    }

    /// Splits a full Hamiltonian into local parts and a coupling with `Tr_S V = 0`.
    #[staticmethod]
    fn from_total_hamiltonian(d_s: usize, d_e: usize, rho: Rows, h: Rows) -> PyResult<Self> {
        let inner = ergoloc_core::BipartiteSystem::from_total_hamiltonian(d_s, d_e, to_matrix(&rho)?, to_matrix(&h)?)
            .map_err(py_err)?;
        Ok(PySystem { inner })
    }

    #[getter]
    fn d_s(&self) -> usize {
        self.inner.d_s()
    }

    #[getter]
    fn d_e(&self) -> usize {
        self.inner.d_e()
    }

    fn energy(&self) -> f64 {
        self.inner.energy()
    }

    fn rho(&self) -> Rows {
        from_matrix(self.inner.rho())
    }

    fn rho_s(&self) -> Rows {
        from_matrix(&self.inner.rho_s())
    }

    fn rho_e(&self) -> Rows {
        from_matrix(&self.inner.rho_e())
    }

    fn h_s(&self) -> Rows {
        from_matrix(self.inner.h_s())
    }

    fn v(&self) -> Rows {
        from_matrix(self.inner.v())
    }

    fn delta_off(&self) -> f64 {
        delta_off(&self.inner)
    }

    fn switch_off(&self) -> PyResult<f64> {
        switch_off_ergotropy(&self.inner).map_err(py_err)
    }

    /// Ergotropy of the reduced state under `H_S` alone.
    fn free_ergotropy(&self) -> PyResult<f64> {
        Ok(global(&self.inner.rho_s(), self.inner.h_s()).map_err(py_err)?.value)
    }

    /// Bounds on `|E_S - free|` and `|E_S - switch_off|`.
    fn hs_gap_bounds(&self) -> (f64, f64) {
        hs_gap_bounds(&self.inner)
    }

    fn m_matrix(&self) -> Vec<Vec<f64>> {
        build_m_matrix(&self.inner).m.row_iter().map(|r| r.iter().copied().collect()).collect()
    }

    /// Closed form, qubit S only.
    fn closed_form(&self) -> PyResult<f64> {
        Ok(qubit_local_ergotropy(&build_m_matrix(&self.inner)).map_err(py_err)?.value)
    }

    fn polar_bound(&self) -> f64 {
        polar_upper_bound(&build_m_matrix(&self.inner))
    }

    #[pyo3(signature = (tol = 1e-7))]
    fn sdp_bound(&self, tol: f64) -> PyResult<f64> {
        let settings = SdpSettings::with_tol(tol);
        Ok(sdp_upper_bound(&choi_cost(&self.inner), self.inner.energy(), &settings).map_err(py_err)?.0)
    }

    /// Best local unitary found by restarted descent: `(value, unitary)`.
    #[pyo3(signature = (restarts = 32, seed = 0))]
    fn optimize(&self, restarts: usize, seed: u64) -> PyResult<(f64, Rows)> {
        let cfg = OptimizerConfig { restarts, seed, ..OptimizerConfig::default() };
        let report = optimize_local_unitary(&self.inner, &cfg).map_err(py_err)?;
        let u = report.optimal_unitary.expect("optimizer returns a unitary");
        Ok((report.value, from_matrix(&u)))
    }

    /// Local ergotropy: the closed form for a qubit S, the optimizer otherwise.
    fn local_ergotropy(&self) -> PyResult<f64> {
        if self.inner.d_s() == 2 {
            self.closed_form()
        } else {
            Ok(self.optimize(32, 0)?.0)
        }
    }

    fn __repr__(&self) -> String {
        format!("BipartiteSystem(d_s={}, d_e={})", self.inner.d_s(), self.inner.d_e())
    }
}

#[pyfunction]
fn global_ergotropy(rho: Rows, h: Rows) -> PyResult<f64> {
    Ok(global(&to_matrix(&rho)?, &to_matrix(&h)?).map_err(py_err)?.value)
}

#[pyfunction]
fn classical_ergotropy(p: Vec<f64>, eps: Vec<f64>) -> PyResult<f64> {
    ergoloc_core::classical_ergotropy(&p, &eps).map_err(py_err)
}

/// `(value, permutation)` for a joint distribution `p[s][e]` and energies `energies[s][e]`.
#[pyfunction]
fn classical_local_ergotropy(p: Vec<Vec<f64>>, energies: Vec<Vec<f64>>) -> PyResult<(f64, Vec<usize>)> {
    ergoloc_core::classical_local_ergotropy(&to_real(&p)?, &to_real(&energies)?).map_err(py_err)
}

#[pyfunction]
fn gpo_basis(d: usize) -> PyResult<Vec<Rows>> {
    let basis = GpoBasis::new(d).map_err(py_err)?;
    Ok(basis.sigmas().iter().map(from_matrix).collect())
}

fn jc_params(omega_s: f64, omega_e: f64, rabi: f64, n: usize, n_max: Option<usize>) -> JcParams {
    let p = JcParams::for_level(omega_s, omega_e, rabi, n);
    JcParams { n_max: n_max.unwrap_or(p.n_max), ..p }
}

/// Dressed state `|n, sign>` of the Jaynes-Cummings model.
#[pyfunction]
#[pyo3(signature = (omega_s, omega_e, rabi, n, sign = "+", n_max = None))]
fn jc_system(omega_s: f64, omega_e: f64, rabi: f64, n: usize, sign: &str, n_max: Option<usize>) -> PyResult<PySystem> {
    let p = jc_params(omega_s, omega_e, rabi, n, n_max);
    let psi = jc_dressed_state(&p, n, parse_sign(sign)?).map_err(py_err)?;
    let inner = jc_model(&p).and_then(|m| m.pure_system(&psi)).map_err(py_err)?;
    Ok(PySystem { inner })
}

/// `cos(alpha)|n,+> + exp(i phi) sin(alpha)|n,->`.
#[pyfunction]
#[pyo3(signature = (omega_s, omega_e, rabi, n, alpha, phi, n_max = None))]
fn jc_phase_system(
    omega_s: f64,
    omega_e: f64,
    rabi: f64,
    n: usize,
    alpha: f64,
    phi: f64,
    n_max: Option<usize>,
) -> PyResult<PySystem> {
    let p = jc_params(omega_s, omega_e, rabi, n, n_max);
    let rho = jc_phase_family_state(&p, n, alpha, phi).map_err(py_err)?;
    let inner = jc_model(&p).and_then(|m| m.system(rho)).map_err(py_err)?;
    Ok(PySystem { inner })
}

#[pyfunction]
#[pyo3(signature = (omega_s, omega_e, rabi, n, sign = "+"))]
fn jc_analytic(omega_s: f64, omega_e: f64, rabi: f64, n: usize, sign: &str) -> PyResult<BTreeMap<&'static str, f64>> {
    let p = JcParams::for_level(omega_s, omega_e, rabi, n);
    Ok(analytic_dict(&jc_closed(&p, n, parse_sign(sign)?)))
}

/// Single-magnon Bethe state `|phi_k>` on an `n_sites` ring, S = site 1.
#[pyfunction]
fn xxz_system(n_sites: usize, epsilon: f64, j: f64, j_z: f64, k: i64) -> PyResult<PySystem> {
    let p = XxzParams { n_sites, epsilon, j, j_z };
    let psi = xxz_bethe_state(&p, k).map_err(py_err)?;
    let inner = xxz_model(&p).and_then(|m| m.pure_system(&psi)).map_err(py_err)?;
    Ok(PySystem { inner })
}

#[pyfunction]
fn xxz_analytic(n_sites: usize, epsilon: f64, j: f64, j_z: f64, k: i64) -> PyResult<BTreeMap<&'static str, f64>> {
    let p = XxzParams { n_sites, epsilon, j, j_z };
    let a = xxz_closed(&p, k).map_err(py_err)?;
    let mut out = analytic_dict(&a.values);
    out.insert("regime_entry", a.regime_entry);
    Ok(out)
}

#[pymodule]
fn ergoloc(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySystem>()?;
    m.add_function(wrap_pyfunction!(global_ergotropy, m)?)?;
    m.add_function(wrap_pyfunction!(classical_ergotropy, m)?)?;
    m.add_function(wrap_pyfunction!(classical_local_ergotropy, m)?)?;
    m.add_function(wrap_pyfunction!(gpo_basis, m)?)?;
    m.add_function(wrap_pyfunction!(jc_system, m)?)?;
    m.add_function(wrap_pyfunction!(jc_phase_system, m)?)?;
    m.add_function(wrap_pyfunction!(jc_analytic, m)?)?;
    m.add_function(wrap_pyfunction!(xxz_system, m)?)?;
    m.add_function(wrap_pyfunction!(xxz_analytic, m)?)?;
    Ok(())
}
