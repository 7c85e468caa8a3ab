//! Global ergotropy, its classical analogues, switch-off energetics and closed-form bounds.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::assignment::{hungarian, permutation_cost};
use crate::error::{Error, Result};
use crate::qmat::{
    hermitian_eig, hermitize, hs_norm, identity, partial_trace, tensor_product, trace_norm,
    trace_product, validate_density, ComplexMatrix, Side, StateVector,
};
use crate::system::BipartiteSystem;

/// Probabilities summing to one within this tolerance are accepted.
pub const DISTRIBUTION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Default)]
pub struct ErgotropyReport {
    pub value: f64,
    pub optimal_unitary: Option<ComplexMatrix>,
    pub passive_state: Option<ComplexMatrix>,
    /// Bloch-space rotation for qubit closed-form results.
    pub optimal_rotation: Option<DMatrix<f64>>,
    pub diagnostics: BTreeMap<String, f64>,
}

impl ErgotropyReport {
    pub fn scalar(value: f64) -> Self {
        ErgotropyReport { value, ..Default::default() }
    }

    pub fn with_diagnostic(mut self, key: &str, value: f64) -> Self {
        self.diagnostics.insert(key.to_string(), value);
        self
    }
}

/// `Tr[rho H] - sum_i p_i^desc eps_i^asc`, with the rearranging unitary and the passive state.
pub fn global_ergotropy(rho: &ComplexMatrix, h: &ComplexMatrix) -> Result<ErgotropyReport> {
    if rho.nrows() != h.nrows() || rho.ncols() != h.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "state is {}x{}, Hamiltonian {}x{}",
            rho.nrows(),
            rho.ncols(),
            h.nrows(),
            h.ncols()
        )));
    }
    let rho = validate_density(rho)?;
    let h = hermitize(h)?;
    let d = rho.nrows();
    let er = hermitian_eig(&rho)?;
    let eh = hermitian_eig(&h)?;
    let energy = trace_product(&rho, &h).re;
    // descending populations paired with ascending energies
    let passive_energy: f64 = (0..d).map(|i| er.values[d - 1 - i] * eh.values[i]).sum();
    let mut u = ComplexMatrix::zeros(d, d);
    let mut passive = ComplexMatrix::zeros(d, d);
    for i in 0..d {
        let eps = eh.vectors.column(i);
        let r = er.vectors.column(d - 1 - i);
        u += eps * r.adjoint();
        passive += (eps * eps.adjoint()).scale(er.values[d - 1 - i].max(0.0));
    }
    Ok(ErgotropyReport {
        value: energy - passive_energy,
        optimal_unitary: Some(u),
        passive_state: Some(passive),
        optimal_rotation: None,
        diagnostics: BTreeMap::from([
            ("energy".to_string(), energy),
            ("passive_energy".to_string(), passive_energy),
        ]),
    })
}

fn check_distribution(p: &[f64]) -> Result<()> {
    if let Some(x) = p.iter().find(|x| !(**x >= 0.0) || !x.is_finite()) {
        return Err(Error::InvalidDistribution(format!("entry {x} is negative or not finite")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > DISTRIBUTION_TOL {
        return Err(Error::InvalidDistribution(format!("sum {total} != 1")));
    }
    Ok(())
}

/// `sum p_i eps_i - sum p_i^desc eps_i^asc` (rearrangement inequality).
pub fn classical_ergotropy(p: &[f64], eps: &[f64]) -> Result<f64> {
    if p.len() != eps.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} probabilities, {} energies",
            p.len(),
            eps.len()
        )));
    }
    check_distribution(p)?;
    let mut pd = p.to_vec();
    let mut ea = eps.to_vec();
    pd.sort_by(|a, b| b.total_cmp(a));
    ea.sort_by(|a, b| a.total_cmp(b));
    let before: f64 = p.iter().zip(eps).map(|(a, b)| a * b).sum();
    let after: f64 = pd.iter().zip(&ea).map(|(a, b)| a * b).sum();
    Ok(before - after)
}

/// Cost `A[i, m] = sum_j P[m, j] E[i, j]` of moving row `m` of `P` onto row `i`.
pub fn assignment_cost(p: &DMatrix<f64>, e: &DMatrix<f64>) -> DMatrix<f64> {
    let d_s = p.nrows();
    DMatrix::from_fn(d_s, d_s, |i, m| (0..p.ncols()).map(|j| p[(m, j)] * e[(i, j)]).sum())
}

/// Classical local ergotropy: rows of `P` (the S index) may be permuted, columns may not.
/// Returns the value and the minimizing permutation `pi` (row `pi[i]` of `P` moves to row `i`).
pub fn classical_local_ergotropy(p: &DMatrix<f64>, e: &DMatrix<f64>) -> Result<(f64, Vec<usize>)> {
    if p.shape() != e.shape() {
        return Err(Error::DimensionMismatch(format!(
            "P is {:?}, E is {:?}",
            p.shape(),
            e.shape()
        )));
    }
    check_distribution(p.as_slice())?;
    let cost = assignment_cost(p, e);
    let identity: Vec<usize> = (0..p.nrows()).collect();
    let perm = hungarian(&cost);
    let value = permutation_cost(&cost, &identity) - permutation_cost(&cost, &perm);
    Ok((value, perm))
}

/// Energy paid to switch the coupling off: `-Tr[rho V]`.
pub fn delta_off(system: &BipartiteSystem) -> f64 {
    -trace_product(system.rho(), system.v()).re
}

/// Switch the coupling off, then extract from `rho_S` under `H_S`.
pub fn switch_off_ergotropy(system: &BipartiteSystem) -> Result<f64> {
    let local = global_ergotropy(&system.rho_s(), system.h_s())?;
    Ok(local.value - delta_off(system))
}

/// `H_S + Tr_E[V (I ⊗ rho_E)]`.
pub fn effective_hamiltonian(
    rho_e: &ComplexMatrix,
    h_s: &ComplexMatrix,
    v: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    let (d_s, d_e) = (h_s.nrows(), rho_e.nrows());
    let lifted = v * tensor_product(&identity(d_s), rho_e);
    let contracted = partial_trace(&lifted, d_s, d_e, Side::E)?;
    hermitize(&(h_s + contracted))
}

/// Local ergotropy of a product state, which reduces to the ergotropy of `rho_S`
/// under the effective Hamiltonian.
pub fn effective_local_ergotropy_product(
    rho_s: &ComplexMatrix,
    rho_e: &ComplexMatrix,
    h_s: &ComplexMatrix,
    v: &ComplexMatrix,
) -> Result<ErgotropyReport> {
    let h_eff = effective_hamiltonian(rho_e, h_s, v)?;
    global_ergotropy(rho_s, &h_eff)
}

/// `(2 |rho|_2 |V|_2, |rho|_2 |V|_2)`: bounds on `|E_S - E(rho_S, H_S)|` and `|E_S - E_S^off|`.
pub fn hs_gap_bounds(system: &BipartiteSystem) -> (f64, f64) {
    let b = hs_norm(system.rho()) * hs_norm(system.v());
    (2.0 * b, b)
}

/// Local energy drop `Tr[H (rho - (U ⊗ I) rho (U ⊗ I)^dag)]`.
pub fn local_objective_direct(
    rho: &ComplexMatrix,
    h: &ComplexMatrix,
    u: &ComplexMatrix,
    d_e: usize,
) -> f64 {
    let big = tensor_product(u, &identity(d_e));
    let rotated = &big * rho * big.adjoint();
    trace_product(h, &(rho - rotated)).re
}

struct ShiftedSpectrum {
    /// Eigenvalues of `H - eps_max I`, ascending, all `<= 0`.
    values: Vec<f64>,
    vectors: ComplexMatrix,
}

fn shifted_spectrum(h: &ComplexMatrix) -> Result<ShiftedSpectrum> {
    let eig = hermitian_eig(h)?;
    let top = *eig.values.last().expect("non-empty spectrum");
    Ok(ShiftedSpectrum {
        values: eig.values.iter().map(|e| e - top).collect(),
        vectors: eig.vectors,
    })
}

fn h_sv(h_s: &ComplexMatrix, v: &ComplexMatrix, d_e: usize) -> Result<ComplexMatrix> {
    if v.nrows() != h_s.nrows() * d_e {
        return Err(Error::DimensionMismatch(format!(
            "V is {}x{}, expected {}",
            v.nrows(),
            v.ncols(),
            h_s.nrows() * d_e
        )));
    }
    hermitize(&(tensor_product(h_s, &identity(d_e)) + v))
}

/// `Tr_E[|a><b|]` for S-major vectors on `d_s ⊗ d_e`.
fn reduced_outer(a: &StateVector, b: &StateVector, d_s: usize, d_e: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d_s, d_s, |s, t| {
        (0..d_e).map(|e| a[s * d_e + e] * b[t * d_e + e].conj()).sum::<Complex64>()
    })
}

/// Unitary maximizing `|Tr[U N]|`: with `N = W S X^dag`, `U = X W^dag`.
pub fn trace_norm_maximizer(n: &ComplexMatrix) -> ComplexMatrix {
    let svd = n.clone().svd(true, true);
    let w = svd.u.expect("left vectors");
    let xh = svd.v_t.expect("right vectors");
    xh.adjoint() * w.adjoint()
}

/// Local ergotropy of a pure state when `H_S ⊗ I + V` has exactly two distinct levels
/// with a non-degenerate ground level `|g>` at depth `E` below the upper level:
/// `<psi|H'|psi> + E |Tr_E[|psi><g|]|_1^2` with `H'` shifted so the upper level is zero.
pub fn two_level_exact(psi: &StateVector, h_sv: &ComplexMatrix, d_s: usize, d_e: usize) -> Result<f64> {
    let n = d_s * d_e;
    if psi.len() != n || h_sv.nrows() != n || h_sv.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "state length {} and operator {}x{} for d_S={d_s}, d_E={d_e}",
            psi.len(),
            h_sv.nrows(),
            h_sv.ncols()
        )));
    }
    let norm = psi.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidState(format!("state norm {norm} != 1")));
    }
    let spec = shifted_spectrum(h_sv)?;
    let gap = -spec.values[0];
    let scale = spec.values.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let tol = 1e-9 * scale;
    if gap <= tol {
        return Err(Error::Unsupported("spectrum has a single level".into()));
    }
    if spec.values.len() > 1 && spec.values[1] + gap <= tol {
        return Err(Error::Unsupported("ground level is degenerate".into()));
    }
    if spec.values[1..].iter().any(|x| x.abs() > tol) {
        return Err(Error::Unsupported("spectrum has more than two distinct levels".into()));
    }
    let g = spec.vectors.column(0).into_owned();
    let overlap = g.dotc(psi).norm_sqr();
    let reduced = reduced_outer(psi, &g, d_s, d_e);
    let tn = trace_norm(&reduced);
    Ok(-gap * overlap + gap * tn * tn)
}

struct SpectralPieces {
    h: ComplexMatrix,
    spec: ShiftedSpectrum,
    populations: Vec<f64>,
    states: ComplexMatrix,
}

fn spectral_pieces(
    rho: &ComplexMatrix,
    h_s: &ComplexMatrix,
    v: &ComplexMatrix,
    d_e: usize,
) -> Result<SpectralPieces> {
    let h = h_sv(h_s, v, d_e)?;
    if rho.nrows() != h.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "state is {}x{}, operator {}x{}",
            rho.nrows(),
            rho.ncols(),
            h.nrows(),
            h.ncols()
        )));
    }
    let rho = validate_density(rho)?;
    let spec = shifted_spectrum(&h)?;
    let er = hermitian_eig(&rho)?;
    Ok(SpectralPieces { h, spec, populations: er.values, states: er.vectors })
}

/// Population threshold below which eigenvectors of the state are ignored.
const POPULATION_CUTOFF: f64 = 1e-12;

/// `Tr[rho H'] - sum_{k,j} p_j eps_k |N^{kj}|_1^2`, with `H' = H_S ⊗ I + V` shifted so that
/// every `eps_k <= 0` and `N^{kj} = Tr_E[|eps_k><j|]`. Each term bounds the best achievable
/// overlap separately, so the sum is an upper bound on the local ergotropy.
pub fn trace_norm_sum_bound(
    rho: &ComplexMatrix,
    h_s: &ComplexMatrix,
    v: &ComplexMatrix,
    d_e: usize,
) -> Result<f64> {
    let d_s = h_s.nrows();
    let sp = spectral_pieces(rho, h_s, v, d_e)?;
    let top = sp.spec.values.len();
    let shifted_energy: f64 = (0..top)
        .map(|k| sp.spec.values[k] * sp.spec.vectors.column(k).dotc(&(rho * sp.spec.vectors.column(k))).re)
        .sum();
    let mut total = shifted_energy;
    for (j, &p) in sp.populations.iter().enumerate() {
        if p <= POPULATION_CUTOFF {
            continue;
        }
        let state = sp.states.column(j).into_owned();
        for k in 0..top {
            let eps = sp.spec.values[k];
            if eps == 0.0 {
                continue;
            }
            let eps_vec = sp.spec.vectors.column(k).into_owned();
            let tn = trace_norm(&reduced_outer(&eps_vec, &state, d_s, d_e));
            total -= p * eps * tn * tn;
        }
    }
    Ok(total)
}

/// Lower bound on the local ergotropy: the best objective over the identity and the unitaries
/// `U*` saturating `|Tr[U N^{kj}]| = |N^{kj}|_1` for each eigenpair. Returns the value and the
/// unitary attaining it.
pub fn two_level_lower_bound(
    rho: &ComplexMatrix,
    h_s: &ComplexMatrix,
    v: &ComplexMatrix,
    d_e: usize,
) -> Result<(f64, ComplexMatrix)> {
    let d_s = h_s.nrows();
    let sp = spectral_pieces(rho, h_s, v, d_e)?;
    let mut best = (0.0, identity(d_s));
    for (j, &p) in sp.populations.iter().enumerate() {
        if p <= POPULATION_CUTOFF {
            continue;
        }
        let state = sp.states.column(j).into_owned();
        for k in 0..sp.spec.values.len() {
            let eps_vec = sp.spec.vectors.column(k).into_owned();
            let u = trace_norm_maximizer(&reduced_outer(&state, &eps_vec, d_s, d_e));
            let value = local_objective_direct(rho, &sp.h, &u, d_e);
            if value > best.0 {
                best = (value, u);
            }
        }
    }
    Ok(best)
}
