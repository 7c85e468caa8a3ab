//! Generalized Pauli operators and Bloch-space coordinates.
//!
//! Ordering: x-type pairs `(j, j')` with `j < j'` in lexicographic order, then
//! the y-type pairs in the same order, then the diagonal z-type operators by
//! ascending `k`. For `d = 2` this is `(sigma_x, sigma_y, sigma_z)` with
//! `sigma_z = diag(-1, +1)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qmat::{
    check_unitary, identity, tensor_product, trace_product, ComplexMatrix, I, ONE, ZERO,
};
use crate::system::BipartiteSystem;

/// Imaginary parts of expansion coefficients larger than this are treated as a bug.
const IMAG_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct GpoBasis {
    d: usize,
    sigmas: Vec<ComplexMatrix>,
}

/// Basis for dimension `d >= 2`.
pub fn gpo_basis(d: usize) -> Result<GpoBasis> {
    GpoBasis::new(d)
}

fn pairs(d: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..d).flat_map(move |j| (j + 1..d).map(move |k| (j, k)))
}

impl GpoBasis {
    pub fn new(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidParameter(format!("GPO basis needs d >= 2, got {d}")));
        }
        Ok(Self::build(d))
    }

    /// Like [`GpoBasis::new`] but also accepts `d = 1`, giving the empty basis.
    pub(crate) fn with_trivial(d: usize) -> Self {
        Self::build(d.max(1))
    }

    fn build(d: usize) -> Self {
        let mut sigmas = Vec::with_capacity(d * d - 1);
        for (j, k) in pairs(d) {
            let mut m = ComplexMatrix::zeros(d, d);
            m[(j, k)] = ONE;
            m[(k, j)] = ONE;
            sigmas.push(m);
        }
        for (j, k) in pairs(d) {
            // i(|k><j| - |j><k|)
            let mut m = ComplexMatrix::zeros(d, d);
            m[(k, j)] = I;
            m[(j, k)] = -I;
            sigmas.push(m);
        }
        for k in 0..d.saturating_sub(1) {
            let m_rest = (d - k) as f64;
            let norm = (2.0 / (m_rest * (m_rest - 1.0))).sqrt();
            let mut m = ComplexMatrix::zeros(d, d);
            m[(k, k)] = Complex64::new(norm * (1.0 - m_rest), 0.0);
            for j in k + 1..d {
                m[(j, j)] = Complex64::new(norm, 0.0);
            }
            sigmas.push(m);
        }
        GpoBasis { d, sigmas }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.sigmas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigmas.is_empty()
    }

    pub fn sigmas(&self) -> &[ComplexMatrix] {
        &self.sigmas
    }

    pub fn sigma(&self, i: usize) -> &ComplexMatrix {
        &self.sigmas[i]
    }

    /// `Tr[sigma_i A]` for every basis element.
    pub fn components(&self, a: &ComplexMatrix) -> Vec<f64> {
        self.sigmas
            .iter()
            .map(|s| {
                let z = trace_product(s, a);
                debug_assert!(
                    z.im.abs() <= IMAG_TOL * (1.0 + z.re.abs()) || !is_hermitian_like(a),
                    "complex GPO coefficient {z}"
                );
                z.re
            })
            .collect()
    }

    /// `identity * I + (1/2) sum_i x_i sigma_i`, the inverse of [`GpoBasis::components`]
    /// for `identity = Tr[A]/d`.
    pub fn reconstruct(&self, identity_coeff: f64, x: &[f64]) -> ComplexMatrix {
        let mut m = identity(self.d).scale(identity_coeff);
        for (s, &c) in self.sigmas.iter().zip(x) {
            m += s.scale(0.5 * c);
        }
        m
    }

    /// State with generalized Bloch vector `r`: `I/d + (1/2) sum r_i sigma_i`.
    pub fn state_from_bloch(&self, r: &[f64]) -> ComplexMatrix {
        self.reconstruct(1.0 / self.d as f64, r)
    }
}

fn is_hermitian_like(a: &ComplexMatrix) -> bool {
    crate::qmat::hermitian_drift(a) <= IMAG_TOL
}

/// `(O_U)_ij = Tr[sigma_i U sigma_j U^dag] / 2`.
pub fn orthogonal_image(u: &ComplexMatrix, basis: &GpoBasis) -> Result<DMatrix<f64>> {
    if u.nrows() != basis.dim() || u.ncols() != basis.dim() {
        return Err(Error::DimensionMismatch(format!(
            "unitary is {}x{}, basis dimension {}",
            u.nrows(),
            u.ncols(),
            basis.dim()
        )));
    }
    check_unitary(u, 1e-10)?;
    let n = basis.len();
    let ud = u.adjoint();
    let rotated: Vec<ComplexMatrix> = basis.sigmas.iter().map(|s| u * s * &ud).collect();
    Ok(DMatrix::from_fn(n, n, |i, j| 0.5 * trace_product(&basis.sigmas[i], &rotated[j]).re))
}

/// GPO coordinates of a bipartite system.
///
/// `rho = I/(d_S d_E) + (1/(2 d_E)) sum r_i sigma_i ⊗ I + (1/(2 d_S)) sum q_j I ⊗ sigma_j
///        + (1/4) sum t_ij sigma_i ⊗ sigma_j`,
/// `H_S = c I + sum h_i sigma_i`,
/// `V = sum v_ij sigma_i ⊗ sigma_j + sum v_local_i sigma_i ⊗ I`.
#[derive(Debug, Clone)]
pub struct BlochDecomposition {
    pub r: DVector<f64>,
    pub q: DVector<f64>,
    pub t: DMatrix<f64>,
    pub h: DVector<f64>,
    pub c: f64,
    pub v: DMatrix<f64>,
    pub v_local: DVector<f64>,
    pub basis_s: GpoBasis,
    pub basis_e: GpoBasis,
}

pub fn decompose(system: &BipartiteSystem) -> BlochDecomposition {
    let (d_s, d_e) = (system.d_s(), system.d_e());
    let basis_s = GpoBasis::with_trivial(d_s);
    let basis_e = GpoBasis::with_trivial(d_e);
    let (ns, ne) = (basis_s.len(), basis_e.len());
    let id_e = identity(d_e);

    let r = DVector::from_vec(basis_s.components(&system.rho_s()));
    let q = DVector::from_vec(basis_e.components(&system.rho_e()));
    let h = DVector::from_vec(basis_s.components(system.h_s())).scale(0.5);
    let c = system.h_s().trace().re / d_s as f64;

    let mut t = DMatrix::zeros(ns, ne);
    let mut v = DMatrix::zeros(ns, ne);
    let mut v_local = DVector::zeros(ns);
    for (i, si) in basis_s.sigmas.iter().enumerate() {
        v_local[i] = trace_product(system.v(), &tensor_product(si, &id_e)).re / (2.0 * d_e as f64);
        for (j, sj) in basis_e.sigmas.iter().enumerate() {
            let op = tensor_product(si, sj);
            t[(i, j)] = trace_product(system.rho(), &op).re;
            v[(i, j)] = 0.25 * trace_product(system.v(), &op).re;
        }
    }
    BlochDecomposition { r, q, t, h, c, v, v_local, basis_s, basis_e }
}

impl BlochDecomposition {
    pub fn d_s(&self) -> usize {
        self.basis_s.dim()
    }

    pub fn d_e(&self) -> usize {
        self.basis_e.dim()
    }

    pub fn reconstruct_rho(&self) -> ComplexMatrix {
        let (d_s, d_e) = (self.d_s(), self.d_e());
        let id_s = identity(d_s);
        let id_e = identity(d_e);
        let mut m = identity(d_s * d_e).scale(1.0 / (d_s * d_e) as f64);
        for (i, si) in self.basis_s.sigmas.iter().enumerate() {
            m += tensor_product(si, &id_e).scale(self.r[i] / (2.0 * d_e as f64));
            for (j, sj) in self.basis_e.sigmas.iter().enumerate() {
                m += tensor_product(si, sj).scale(0.25 * self.t[(i, j)]);
            }
        }
        for (j, sj) in self.basis_e.sigmas.iter().enumerate() {
            m += tensor_product(&id_s, sj).scale(self.q[j] / (2.0 * d_s as f64));
        }
        m
    }

    pub fn reconstruct_h_s(&self) -> ComplexMatrix {
        let x: Vec<f64> = self.h.iter().map(|h| 2.0 * h).collect();
        self.basis_s.reconstruct(self.c, &x)
    }

    pub fn reconstruct_v(&self) -> ComplexMatrix {
        let (d_s, d_e) = (self.d_s(), self.d_e());
        let id_e = identity(d_e);
        let mut m = ComplexMatrix::from_element(d_s * d_e, d_s * d_e, ZERO);
        for (i, si) in self.basis_s.sigmas.iter().enumerate() {
            m += tensor_product(si, &id_e).scale(self.v_local[i]);
            for (j, sj) in self.basis_e.sigmas.iter().enumerate() {
                m += tensor_product(si, sj).scale(self.v[(i, j)]);
            }
        }
        m
    }
}
