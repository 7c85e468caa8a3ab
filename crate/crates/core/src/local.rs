//! Local ergotropy: the M-matrix form, the qubit closed formula, the polar bound and a
//! restarted steepest-descent search over local unitaries.
//!
//! For a unitary `U` on S with orthogonal image `O_U` the energy drop is
//! `Tr[O_U M] - Tr[M]`, where `M_ik = -(r_i (h_k + w_k) + sum_j t_ij v_kj)`.

use nalgebra::{DMatrix, Matrix3, Vector3};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::ergotropy::{effective_hamiltonian, global_ergotropy, ErgotropyReport};
use crate::error::{Error, Result};
use crate::gpo::{orthogonal_image, BlochDecomposition, GpoBasis};
use crate::qmat::{
    expm_hermitian, haar_unitary, identity, partial_trace, tensor_product, trace_product,
    ComplexMatrix, Side, I, ONE,
};
use crate::sdp::{choi_cost, choi_vector, unitary_energy, ChoiCost};
use crate::system::BipartiteSystem;

/// Largest `d_S * d_E` accepted by the optimizer.
pub const MAX_JOINT_DIM: usize = 4096;

#[derive(Debug, Clone)]
pub struct MMatrix {
    pub m: DMatrix<f64>,
    pub d_s: usize,
}

/// Partial-trace construction `M_ik = -(r_i h_k + (1/2) Tr[rho_E^(i) V_E^(k)])`.
pub fn build_m_matrix(system: &BipartiteSystem) -> MMatrix {
    let (d_s, d_e) = (system.d_s(), system.d_e());
    let basis = GpoBasis::with_trivial(d_s);
    let id_e = identity(d_e);
    let rho_s = system.rho_s();
    let n = basis.len();
    let lifted: Vec<ComplexMatrix> = basis.sigmas().iter().map(|s| tensor_product(s, &id_e)).collect();
    let rho_e: Vec<ComplexMatrix> = lifted
        .iter()
        .map(|s| partial_trace(&(s * system.rho()), d_s, d_e, Side::S).expect("dims"))
        .collect();
    let v_e: Vec<ComplexMatrix> = lifted
        .iter()
        .map(|s| partial_trace(&(s * system.v()), d_s, d_e, Side::S).expect("dims"))
        .collect();
    let r: Vec<f64> = basis.sigmas().iter().map(|s| trace_product(s, &rho_s).re).collect();
    let h: Vec<f64> = basis.sigmas().iter().map(|s| 0.5 * trace_product(s, system.h_s()).re).collect();
    let m = DMatrix::from_fn(n, n, |i, k| {
        -(r[i] * h[k] + 0.5 * trace_product(&rho_e[i], &v_e[k]).re)
    });
    MMatrix { m, d_s }
}

impl MMatrix {
    /// Bloch-coefficient construction `M_ik = -(r_i (h_k + w_k) + sum_j t_ij v_kj)`.
    pub fn from_bloch(bd: &BlochDecomposition) -> Self {
        let n = bd.r.len();
        let tv = &bd.t * bd.v.transpose();
        let m = DMatrix::from_fn(n, n, |i, k| -(bd.r[i] * (bd.h[k] + bd.v_local[k]) + tv[(i, k)]));
        MMatrix { m, d_s: bd.d_s() }
    }

    pub fn len(&self) -> usize {
        self.m.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.m.is_empty()
    }
}

/// `Tr[O M] - Tr[M]`.
pub fn local_objective(m: &MMatrix, o: &DMatrix<f64>) -> f64 {
    (o * &m.m).trace() - m.m.trace()
}

struct PolarPieces {
    value: f64,
    rotation: DMatrix<f64>,
    sigma_min: f64,
    det_m: f64,
}

/// Maximizes `Tr[O M]` over SO(n): with `M = W S X^T`, `O = X D W^T`, `D = diag(1, .., 1, det(X W^T))`.
fn polar_pieces(m: &DMatrix<f64>) -> PolarPieces {
    let n = m.nrows();
    if n == 0 {
        return PolarPieces { value: 0.0, rotation: DMatrix::zeros(0, 0), sigma_min: 0.0, det_m: 1.0 };
    }
    let svd = m.clone().svd(true, true);
    let w = svd.u.expect("left vectors");
    let xt = svd.v_t.expect("right vectors");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sv: Vec<f64> = order.iter().map(|&k| svd.singular_values[k]).collect();
    let w = DMatrix::from_fn(n, n, |r, c| w[(r, order[c])]);
    let x = DMatrix::from_fn(n, n, |r, c| xt[(order[c], r)]);
    let sign = (&x * w.transpose()).determinant().signum();
    let mut d = DMatrix::<f64>::identity(n, n);
    d[(n - 1, n - 1)] = sign;
    let rotation = &x * d * w.transpose();
    let sigma_min = sv[n - 1];
    let mut value: f64 = sv.iter().sum::<f64>() - m.trace();
    if sign < 0.0 {
        value -= 2.0 * sigma_min;
    }
    PolarPieces { value, rotation, sigma_min, det_m: m.determinant() }
}

/// Maximum of `Tr[O M] - Tr[M]` over all of SO(d_S^2 - 1). Exact for qubits; an upper bound
/// on the local ergotropy otherwise.
pub fn polar_upper_bound(m: &MMatrix) -> f64 {
    polar_pieces(&m.m).value
}

/// Standard-orientation Pauli matrices: the Bloch basis `(x, y, z)` here is the mirror image
/// `(x, y, -z_std)` of the usual right-handed triple.
fn mirror() -> Matrix3<f64> {
    Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, -1.0))
}

/// Unit quaternion `(w, x, y, z)` of a proper rotation.
fn quaternion(r: &Matrix3<f64>) -> [f64; 4] {
    let tr = r.trace();
    let q = if tr > 0.0 {
        let s = (tr + 1.0).sqrt() * 2.0;
        [0.25 * s, (r[(2, 1)] - r[(1, 2)]) / s, (r[(0, 2)] - r[(2, 0)]) / s, (r[(1, 0)] - r[(0, 1)]) / s]
    } else if r[(0, 0)] > r[(1, 1)] && r[(0, 0)] > r[(2, 2)] {
        let s = (1.0 + r[(0, 0)] - r[(1, 1)] - r[(2, 2)]).sqrt() * 2.0;
        [(r[(2, 1)] - r[(1, 2)]) / s, 0.25 * s, (r[(0, 1)] + r[(1, 0)]) / s, (r[(0, 2)] + r[(2, 0)]) / s]
    } else if r[(1, 1)] > r[(2, 2)] {
        let s = (1.0 + r[(1, 1)] - r[(0, 0)] - r[(2, 2)]).sqrt() * 2.0;
        [(r[(0, 2)] - r[(2, 0)]) / s, (r[(0, 1)] + r[(1, 0)]) / s, 0.25 * s, (r[(1, 2)] + r[(2, 1)]) / s]
    } else {
        let s = (1.0 + r[(2, 2)] - r[(0, 0)] - r[(1, 1)]).sqrt() * 2.0;
        [(r[(1, 0)] - r[(0, 1)]) / s, (r[(0, 2)] + r[(2, 0)]) / s, (r[(1, 2)] + r[(2, 1)]) / s, 0.25 * s]
    };
    let norm = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    q.map(|x| x / norm)
}

/// A qubit unitary whose orthogonal image is the rotation `o`.
pub fn lift_rotation(o: &DMatrix<f64>) -> Result<ComplexMatrix> {
    if o.shape() != (3, 3) {
        return Err(Error::DimensionMismatch(format!("expected a 3x3 rotation, got {:?}", o.shape())));
    }
    let basis = GpoBasis::new(2)?;
    let p = mirror();
    let o3 = Matrix3::from_fn(|r, c| o[(r, c)]);
    let std = p * o3 * p;
    let [w, x, y, z] = quaternion(&std);
    let std_z = ComplexMatrix::from_row_slice(2, 2, &[ONE, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), -ONE]);
    let candidates = [1.0, -1.0].map(|sgn: f64| {
        identity(2).scale(w)
            - (basis.sigma(0).scale(x) + basis.sigma(1).scale(y) + std_z.scale(z)) * (I * sgn)
    });
    let mut best = (f64::INFINITY, candidates[0].clone());
    for u in candidates {
        let err = (orthogonal_image(&u, &basis)? - o).amax();
        if err < best.0 {
            best = (err, u);
        }
    }
    if best.0 > 1e-8 {
        return Err(Error::InvalidParameter(format!(
            "matrix is not a proper rotation (lift error {:.3e})",
            best.0
        )));
    }
    Ok(best.1)
}

/// Closed-form local ergotropy for a qubit S, with the optimal rotation and a unitary realizing it.
pub fn qubit_local_ergotropy(m: &MMatrix) -> Result<ErgotropyReport> {
    if m.d_s != 2 || m.len() != 3 {
        return Err(Error::Unsupported(format!(
            "closed formula needs d_S = 2, got d_S = {}",
            m.d_s
        )));
    }
    let pieces = polar_pieces(&m.m);
    let u = lift_rotation(&pieces.rotation)?;
    Ok(ErgotropyReport {
        value: pieces.value,
        optimal_unitary: Some(u),
        passive_state: None,
        optimal_rotation: Some(pieces.rotation),
        diagnostics: Default::default(),
    }
    .with_diagnostic("det_m", pieces.det_m)
    .with_diagnostic("sigma_min", pieces.sigma_min)
    .with_diagnostic("negative_branch", if pieces.det_m < 0.0 { 1.0 } else { 0.0 }))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule {
    Fixed { step: f64 },
    /// Armijo backtracking; each step starts from twice the last accepted length.
    Backtracking,
}

#[derive(Debug, Clone, Copy)]
pub struct OptimizerConfig {
    /// Haar-random starts, in addition to the identity and two warm starts.
    pub restarts: usize,
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub step_rule: StepRule,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            restarts: 32,
            max_iterations: 5000,
            gradient_tolerance: 1e-9,
            step_rule: StepRule::Backtracking,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    fn validate(&self) -> Result<()> {
        if self.restarts < 1 {
            return Err(Error::InvalidParameter("restarts must be >= 1".into()));
        }
        if !(self.gradient_tolerance > 0.0) {
            return Err(Error::InvalidParameter("gradient tolerance must be positive".into()));
        }
        if let StepRule::Fixed { step } = self.step_rule {
            if !(step > 0.0) {
                return Err(Error::InvalidParameter("fixed step must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Energy after `U` and the Hermitian `G` with `d/de E(exp(i e X) U) = Tr[X G]` at `e = 0`.
pub fn energy_gradient(cost: &ChoiCost, u: &ComplexMatrix) -> (f64, ComplexMatrix) {
    let d = cost.d_s;
    let w = choi_vector(u);
    let y = &cost.c * &w;
    let energy = w.dotc(&y).re;
    // Y_{ai} = y_{(i,a)}, K = U Y^dag
    let ym = ComplexMatrix::from_fn(d, d, |a, i| y[i * d + a]);
    let k = u * ym.adjoint();
    let g = (&k - k.adjoint()) * I;
    (energy, g)
}

/// Gradient of the energy drop `f(A) = Tr[H (rho - W rho W^dag)]`, `W = exp(iA) U ⊗ I`,
/// with respect to the Hermitian generator `A` at `A = 0`: `df = Tr[dA D]`.
pub fn objective_gradient(system: &BipartiteSystem, u: &ComplexMatrix) -> ComplexMatrix {
    let cost = choi_cost(system);
    -energy_gradient(&cost, u).1
}

struct RunResult {
    energy: f64,
    unitary: ComplexMatrix,
    gradient_norm: f64,
    iterations: usize,
    converged: bool,
}

/// Armijo constant.
const SUFFICIENT_DECREASE: f64 = 1e-4;

fn descend(cost: &ChoiCost, start: ComplexMatrix, cfg: &OptimizerConfig, scale: f64) -> RunResult {
    let floor = 1e-14 * scale;
    let mut u = start;
    let (mut e, mut g) = energy_gradient(cost, &u);
    let mut best = (e, u.clone());
    let mut step = match cfg.step_rule {
        StepRule::Fixed { step } => step,
        StepRule::Backtracking => 1.0 / scale.max(1e-300),
    };
    let mut iterations = 0;
    let mut gnorm = g.norm();
    let mut converged = gnorm <= cfg.gradient_tolerance;
    while !converged && iterations < cfg.max_iterations {
        iterations += 1;
        let gn2 = gnorm * gnorm;
        let next = match cfg.step_rule {
            StepRule::Fixed { step } => {
                let cand = expm_hermitian(&g, step).expect("Hermitian gradient") * &u;
                Some(cand)
            }
            StepRule::Backtracking => {
                let mut t = 2.0 * step;
                let mut accepted = None;
                while t > 1e-20 / scale.max(1e-300) {
                    let cand = expm_hermitian(&g, t).expect("Hermitian gradient") * &u;
                    let ec = unitary_energy(cost, &cand);
                    let resolved = t * gn2 > floor;
                    if ec <= e - SUFFICIENT_DECREASE * t * gn2 && resolved {
                        accepted = Some(cand);
                        step = t;
                        break;
                    }
                    // energy differences drown in roundoff here, so ask for a smaller gradient instead
                    if !resolved && ec <= e + floor {
                        let gc = energy_gradient(cost, &cand).1.norm();
                        if gc <= (1.0 - SUFFICIENT_DECREASE) * gnorm {
                            accepted = Some(cand);
                            step = t;
                            break;
                        }
                    }
                    t *= 0.5;
                }
                accepted
            }
        };
        let Some(cand) = next else { break };
        u = cand;
        let (e2, g2) = energy_gradient(cost, &u);
        e = e2;
        g = g2;
        gnorm = g.norm();
        if e < best.0 {
            best = (e, u.clone());
        }
        converged = gnorm <= cfg.gradient_tolerance;
    }
    RunResult { energy: best.0, unitary: best.1, gradient_norm: gnorm, iterations, converged }
}

fn starting_points(system: &BipartiteSystem, cfg: &OptimizerConfig) -> Result<Vec<ComplexMatrix>> {
    let d_s = system.d_s();
    let rho_s = system.rho_s();
    let free = global_ergotropy(&rho_s, system.h_s())?.optimal_unitary.expect("unitary");
    let h_eff = effective_hamiltonian(&system.rho_e(), system.h_s(), system.v())?;
    let mean_field = global_ergotropy(&rho_s, &h_eff)?.optimal_unitary.expect("unitary");
    let mut starts = vec![identity(d_s), free, mean_field];
    starts.extend((0..cfg.restarts).map(|k| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(k as u64);
        haar_unitary(d_s, &mut rng)
    }));
    Ok(starts)
}

/// Ties within this margin go to the earliest start.
const TIE_MARGIN: f64 = 1e-10;

/// Local ergotropy by steepest descent of the energy over `U(d_S)`, restarted from the identity,
/// the free and mean-field rearrangement unitaries and `cfg.restarts` Haar-random points.
pub fn optimize_local_unitary(system: &BipartiteSystem, cfg: &OptimizerConfig) -> Result<ErgotropyReport> {
    cfg.validate()?;
    let joint = system.d_s() * system.d_e();
    if joint > MAX_JOINT_DIM {
        return Err(Error::Unsupported(format!(
            "joint dimension {joint} exceeds the dense limit {MAX_JOINT_DIM}"
        )));
    }
    let cost = choi_cost(system);
    let scale = crate::qmat::norms(&cost.c).operator.max(1e-300);
    let e0 = unitary_energy(&cost, &identity(system.d_s()));
    let starts = starting_points(system, cfg)?;
    let runs: Vec<RunResult> = starts
        .into_par_iter()
        .map(|u0| descend(&cost, u0, cfg, scale))
        .collect();
    let mut best_idx = 0;
    for (k, run) in runs.iter().enumerate() {
        if run.energy < runs[best_idx].energy - TIE_MARGIN {
            best_idx = k;
        }
    }
    let best = &runs[best_idx];
    let total_iterations: usize = runs.iter().map(|r| r.iterations).sum();
    Ok(ErgotropyReport {
        value: e0 - best.energy,
        optimal_unitary: Some(best.unitary.clone()),
        passive_state: None,
        optimal_rotation: None,
        diagnostics: Default::default(),
    }
    .with_diagnostic("converged", if best.converged { 1.0 } else { 0.0 })
    .with_diagnostic("gradient_norm", best.gradient_norm)
    .with_diagnostic("iterations", best.iterations as f64)
    .with_diagnostic("total_iterations", total_iterations as f64)
    .with_diagnostic("best_start", best_idx as f64)
    .with_diagnostic("starts", runs.len() as f64))
}
