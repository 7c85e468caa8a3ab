//! Unital-channel relaxation of the local ergotropy, solved by ADMM.
//!
//! Channels on S are represented by Choi matrices on `S ⊗ S'` (input first):
//! `E = sum_ij |i><j| ⊗ Phi(|i><j|)`. Trace preservation reads `Tr_{S'} E = I`
//! and unitality `Tr_S E = I`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmat::{
    hermitian_eig, hermitize, hs_norm, identity, partial_trace, tensor_product, trace_product,
    ComplexMatrix, MatrixFile, Side, StateVector, ZERO,
};
use crate::system::BipartiteSystem;

/// Energy functional `E ↦ Tr[C E]` on Choi matrices.
#[derive(Debug, Clone)]
pub struct ChoiCost {
    pub c: ComplexMatrix,
    pub d_s: usize,
}

/// `C[(j,a),(i,b)] = sum_{e,g} rho[(i,e),(j,g)] H[(a,g),(b,e)]` with `H` the full Hamiltonian,
/// so that `Tr[C E^Phi] = Tr[H (Phi ⊗ id)(rho)]`.
pub fn choi_cost(system: &BipartiteSystem) -> ChoiCost {
    cost_from_parts(system.rho(), &system.h_total(), system.d_s(), system.d_e())
}

pub(crate) fn cost_from_parts(rho: &ComplexMatrix, h: &ComplexMatrix, d_s: usize, d_e: usize) -> ChoiCost {
    let n = d_s * d_s;
    let mut c = ComplexMatrix::zeros(n, n);
    for j in 0..d_s {
        for a in 0..d_s {
            for i in 0..d_s {
                for b in 0..d_s {
                    let mut acc = ZERO;
                    for e in 0..d_e {
                        for g in 0..d_e {
                            acc += rho[(i * d_e + e, j * d_e + g)] * h[(a * d_e + g, b * d_e + e)];
                        }
                    }
                    c[(j * d_s + a, i * d_s + b)] = acc;
                }
            }
        }
    }
    let c = (c.clone() + c.adjoint()).scale(0.5);
    ChoiCost { c, d_s }
}

/// Choi matrix of `rho ↦ sum_k K rho K^dag`.
pub fn choi_matrix_from_kraus(kraus: &[ComplexMatrix]) -> Result<ComplexMatrix> {
    let d = kraus.first().map(|k| k.nrows()).unwrap_or(0);
    if d == 0 || kraus.iter().any(|k| k.nrows() != d || k.ncols() != d) {
        return Err(Error::DimensionMismatch("Kraus operators must be square and equal-sized".into()));
    }
    let mut e = ComplexMatrix::zeros(d * d, d * d);
    for k in kraus {
        let w = choi_vector(k);
        e += &w * w.adjoint();
    }
    Ok(e)
}

/// `w_{(i,a)} = U_{ai}`, so that the Choi matrix of `U · U^dag` is `w w^dag`.
pub fn choi_vector(u: &ComplexMatrix) -> StateVector {
    let d = u.nrows();
    StateVector::from_fn(d * d, |r, _| u[(r % d, r / d)])
}

/// `Tr[C E]` for the unitary channel of `u`.
pub fn unitary_energy(cost: &ChoiCost, u: &ComplexMatrix) -> f64 {
    let w = choi_vector(u);
    w.dotc(&(&cost.c * &w)).re
}

/// Identity-channel energy `Tr[C E^id]`, equal to `Tr[rho H]`.
pub fn identity_energy(cost: &ChoiCost) -> f64 {
    let d = cost.d_s;
    let mut acc = ZERO;
    for i in 0..d {
        for j in 0..d {
            acc += cost.c[(j * d + j, i * d + i)];
        }
    }
    acc.re
}

#[derive(Debug, Clone, Copy)]
pub struct SdpSettings {
    pub tol: f64,
    pub max_iterations: usize,
    pub penalty: f64,
    pub relaxation: f64,
}

impl Default for SdpSettings {
    fn default() -> Self {
        SdpSettings {
            tol: 1e-7,
            max_iterations: 200_000,
            penalty: 1.0,
            relaxation: 1.6,
        }
    }
}

impl SdpSettings {
    pub fn with_tol(tol: f64) -> Self {
        SdpSettings { tol, ..Default::default() }
    }
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    /// Choi matrix of the optimal unital channel.
    pub choi: ComplexMatrix,
    /// `min Tr[C E]`.
    pub objective: f64,
    /// Certified lower bound on `min Tr[C E]` from a dual feasible point.
    pub dual_objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
}

/// Removes `A ⊗ I + I ⊗ B` so that both marginals of the result are `target · I`.
/// Returns the projected matrix and the removed `(A, B)`.
fn marginal_split(y: &ComplexMatrix, d: usize, target: f64) -> (ComplexMatrix, ComplexMatrix, ComplexMatrix) {
    let id = identity(d);
    let p = partial_trace(y, d, d, Side::E).expect("square") - id.scale(target);
    let q = partial_trace(y, d, d, Side::S).expect("square") - id.scale(target);
    let df = d as f64;
    let tr_p = p.trace().re;
    let a = p.scale(1.0 / df);
    let b = (q - id.scale(tr_p / df)).scale(1.0 / df);
    let x = y - tensor_product(&a, &id) - tensor_product(&id, &b);
    (x, a, b)
}

fn project_psd(y: &ComplexMatrix) -> ComplexMatrix {
    let eig = hermitian_eig(y).expect("Hermitian iterate");
    let v = &eig.vectors;
    let n = v.nrows();
    let mut out = ComplexMatrix::zeros(n, n);
    for (k, &l) in eig.values.iter().enumerate() {
        if l > 0.0 {
            let col = v.column(k);
            out += (col * col.adjoint()).scale(l);
        }
    }
    out
}

fn sym(m: ComplexMatrix) -> ComplexMatrix {
    (m.clone() + m.adjoint()).scale(0.5)
}

/// Dual value `Tr A + Tr B + d lambda_min(C - A ⊗ I - I ⊗ B)`, valid for any Hermitian `A, B`.
fn dual_value(c: &ComplexMatrix, a: &ComplexMatrix, b: &ComplexMatrix, d: usize) -> f64 {
    let id = identity(d);
    let s = sym(c - tensor_product(a, &id) - tensor_product(&id, b));
    let lmin = hermitian_eig(&s).expect("Hermitian slack").values[0];
    a.trace().re + b.trace().re + d as f64 * lmin
}

/// Minimizes `Tr[C E]` over Choi matrices of unital channels.
pub fn solve_unital(cost: &ChoiCost, settings: &SdpSettings) -> Result<SdpSolution> {
    if !(settings.tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {}", settings.tol)));
    }
    let d = cost.d_s;
    let n = d * d;
    let c = hermitize(&cost.c)?;
    if c.nrows() != n {
        return Err(Error::DimensionMismatch(format!("cost is {}x{}, expected {n}x{n}", c.nrows(), c.ncols())));
    }
    let start = identity(n).scale(1.0 / d as f64);
    let scale = hs_norm(&c);
    if scale == 0.0 {
        return Ok(SdpSolution {
            choi: start,
            objective: 0.0,
            dual_objective: 0.0,
            primal_residual: 0.0,
            dual_residual: 0.0,
            iterations: 0,
        });
    }
    let cs = c.scale(1.0 / scale);

    let (mu, tau) = (10.0, 2.0);
    let alpha = settings.relaxation;
    let mut rho = settings.penalty;
    let mut z = start;
    let mut u = ComplexMatrix::zeros(n, n);
    let (mut r_norm, mut s_norm) = (f64::INFINITY, f64::INFINITY);

    for it in 1..=settings.max_iterations {
        let y = &z - &u - cs.scale(1.0 / rho);
        let x = marginal_split(&sym(y), d, 1.0).0;
        let x_hat = x.scale(alpha) + z.scale(1.0 - alpha);
        let z_old = z;
        z = project_psd(&sym(&x_hat + &u));
        u += &x_hat - &z;
        r_norm = hs_norm(&(&x - &z));
        s_norm = rho * hs_norm(&(&z - &z_old));

        if r_norm <= settings.tol && s_norm <= settings.tol {
            let primal = trace_product(&cs, &x).re;
            let w = sym(&cs + (&x - &z + &u).scale(rho));
            let (_, a, b) = marginal_split(&w, d, 0.0);
            let dual = dual_value(&cs, &a, &b, d);
            if (primal - dual).abs() <= 10.0 * settings.tol {
                return Ok(SdpSolution {
                    choi: x,
                    objective: primal * scale,
                    dual_objective: dual * scale,
                    primal_residual: r_norm,
                    dual_residual: s_norm,
                    iterations: it,
                });
            }
        }

        if r_norm > mu * s_norm {
            rho *= tau;
            u = u.scale(1.0 / tau);
        } else if s_norm > mu * r_norm {
            rho /= tau;
            u = u.scale(tau);
        }
    }
    Err(Error::NonConvergence {
        iterations: settings.max_iterations,
        primal: r_norm,
        dual: s_norm,
    })
}

/// `rho_energy - min Tr[C E]` over unital channels, an upper bound on the local ergotropy.
pub fn sdp_upper_bound(cost: &ChoiCost, rho_energy: f64, settings: &SdpSettings) -> Result<(f64, SdpSolution)> {
    let sol = solve_unital(cost, settings)?;
    Ok((rho_energy - sol.objective, sol))
}

pub const UNITAL_BIMARGINAL: &str = "unital-bimarginal";

/// Self-contained SDP instance: minimize `Tr[cost E]` with `E ⪰ 0` and both marginals of `E`
/// equal to the identity on `C^{d_s}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SdpInstance {
    pub d_s: usize,
    pub cost: MatrixFile,
    pub constraints: String,
}

impl SdpInstance {
    pub fn from_cost(cost: &ChoiCost) -> Self {
        SdpInstance {
            d_s: cost.d_s,
            cost: MatrixFile::from_matrix(&cost.c),
            constraints: UNITAL_BIMARGINAL.to_string(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serialization")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let inst: SdpInstance = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        inst.choi_cost()?;
        Ok(inst)
    }

    pub fn choi_cost(&self) -> Result<ChoiCost> {
        if self.constraints != UNITAL_BIMARGINAL {
            return Err(Error::Parse(format!(
                "unknown constraint set {:?}, expected {UNITAL_BIMARGINAL:?}",
                self.constraints
            )));
        }
        let c = self.cost.to_matrix()?;
        let n = self.d_s * self.d_s;
        if self.d_s < 1 || c.nrows() != n || c.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "cost is {}x{}, d_s = {} needs {n}x{n}",
                c.nrows(),
                c.ncols(),
                self.d_s
            )));
        }
        Ok(ChoiCost { c: hermitize(&c)?, d_s: self.d_s })
    }

    /// `Tr[rho H]`, recovered as the identity-channel energy of the cost.
    pub fn rho_energy(&self) -> Result<f64> {
        Ok(identity_energy(&self.choi_cost()?))
    }

    pub fn solve(&self, settings: &SdpSettings) -> Result<(f64, SdpSolution)> {
        let cost = self.choi_cost()?;
        sdp_upper_bound(&cost, identity_energy(&cost), settings)
    }
}
