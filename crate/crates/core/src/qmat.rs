//! Dense complex linear algebra on finite tensor-product spaces.
//!
//! Every bipartite operator uses the S-major index convention: the basis
//! vector `|i_S, i_E>` sits at row `i_S * d_E + i_E`. This matches
//! `nalgebra`'s Kronecker product with the S factor on the left.
//!
//! Single-qubit conventions: `|0>` is the lower level, so
//! `sigma_z = diag(-1, +1)`, `sigma_x` and `sigma_y` are the usual Pauli
//! matrices and `sigma_+ = (sigma_x - i sigma_y) / 2 = |1><0|`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type StateVector = DVector<Complex64>;

/// Largest relative anti-Hermitian drift absorbed by symmetrization.
pub const HERMITIAN_TOL: f64 = 1e-10;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn identity(d: usize) -> ComplexMatrix {
    ComplexMatrix::identity(d, d)
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[-ONE, ZERO, ZERO, ONE])
}

/// `|1><0|`, raising the lower level.
pub fn sigma_plus() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[ZERO, ZERO, ONE, ZERO])
}

pub fn sigma_minus() -> ComplexMatrix {
    sigma_plus().adjoint()
}

pub fn real_diagonal(diag: &[f64]) -> ComplexMatrix {
    let v: Vec<Complex64> = diag.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    ComplexMatrix::from_diagonal(&DVector::from_vec(v))
}

/// Kronecker product `a ⊗ b`, `a` being the leftmost (most significant) factor.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

pub fn projector(psi: &StateVector) -> ComplexMatrix {
    psi * psi.adjoint()
}

/// Which subsystem a partial trace removes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    S,
    E,
}

fn check_bipartite(a: &ComplexMatrix, d_s: usize, d_e: usize) -> Result<()> {
    let n = d_s * d_e;
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "expected {n}x{n} operator for d_S={d_s}, d_E={d_e}, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(())
}

/// Trace over `side`, returning an operator on the other factor.
pub fn partial_trace(a: &ComplexMatrix, d_s: usize, d_e: usize, side: Side) -> Result<ComplexMatrix> {
    check_bipartite(a, d_s, d_e)?;
    Ok(match side {
        Side::E => ComplexMatrix::from_fn(d_s, d_s, |s, t| {
            (0..d_e).map(|e| a[(s * d_e + e, t * d_e + e)]).sum()
        }),
        Side::S => ComplexMatrix::from_fn(d_e, d_e, |e, f| {
            (0..d_s).map(|s| a[(s * d_e + e, s * d_e + f)]).sum()
        }),
    })
}

/// Transpose of the S index pair only.
pub fn partial_transpose_s(a: &ComplexMatrix, d_s: usize, d_e: usize) -> Result<ComplexMatrix> {
    check_bipartite(a, d_s, d_e)?;
    let n = d_s * d_e;
    Ok(ComplexMatrix::from_fn(n, n, |r, c| {
        let (s, e) = (r / d_e, r % d_e);
        let (t, f) = (c / d_e, c % d_e);
        a[(t * d_e + e, s * d_e + f)]
    }))
}

/// `Tr[a b]` without forming the product.
pub fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Complex64 {
    debug_assert_eq!(a.ncols(), b.nrows());
    debug_assert_eq!(a.nrows(), b.ncols());
    let mut acc = ZERO;
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

fn max_abs(a: &ComplexMatrix) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// Relative Hermiticity defect `max|A_ij - conj(A_ji)| / max(1, max|A_ij|)`.
pub fn hermitian_drift(a: &ComplexMatrix) -> f64 {
    if a.nrows() != a.ncols() {
        return f64::INFINITY;
    }
    let mut drift: f64 = 0.0;
    for i in 0..a.nrows() {
        for j in i..a.ncols() {
            drift = drift.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    drift / max_abs(a).max(1.0)
}

/// Symmetrize `(A + A†)/2` when the drift is below [`HERMITIAN_TOL`].
pub fn hermitize(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "Hermitian operator must be square, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let drift = hermitian_drift(a);
    if drift > HERMITIAN_TOL {
        return Err(Error::NotHermitian { drift });
    }
    Ok((a + a.adjoint()).scale(0.5))
}

#[derive(Debug, Clone)]
pub struct Eigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `values`.
    pub vectors: ComplexMatrix,
}

pub fn hermitian_eig(a: &ComplexMatrix) -> Result<Eigen> {
    let h = hermitize(a)?;
    let n = h.nrows();
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(Eigen { values, vectors })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub hilbert_schmidt: f64,
    pub trace: f64,
    pub operator: f64,
}

pub fn singular_values(a: &ComplexMatrix) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    let mut sv: Vec<f64> = a.clone().singular_values().iter().copied().collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

pub fn norms(a: &ComplexMatrix) -> Norms {
    let sv = singular_values(a);
    Norms {
        hilbert_schmidt: a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt(),
        trace: sv.iter().sum(),
        operator: sv.first().copied().unwrap_or(0.0),
    }
}

pub fn hs_norm(a: &ComplexMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn trace_norm(a: &ComplexMatrix) -> f64 {
    singular_values(a).iter().sum()
}

/// `exp(-i t G)` for Hermitian `G`, computed spectrally.
pub fn expm_hermitian(g: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(g)?;
    let phases: Vec<Complex64> = eig
        .values
        .iter()
        .map(|&l| Complex64::from_polar(1.0, -t * l))
        .collect();
    let v = &eig.vectors;
    let scaled = ComplexMatrix::from_fn(v.nrows(), v.ncols(), |r, c| v[(r, c)] * phases[c]);
    Ok(scaled * v.adjoint())
}

/// `max|U†U - I|` entrywise.
pub fn unitarity_deviation(u: &ComplexMatrix) -> f64 {
    if u.nrows() != u.ncols() {
        return f64::INFINITY;
    }
    let prod = u.adjoint() * u;
    let mut dev: f64 = 0.0;
    for i in 0..prod.nrows() {
        for j in 0..prod.ncols() {
            let target = if i == j { ONE } else { ZERO };
            dev = dev.max((prod[(i, j)] - target).norm());
        }
    }
    dev
}

pub fn check_unitary(u: &ComplexMatrix, tol: f64) -> Result<()> {
    let deviation = unitarity_deviation(u);
    if deviation > tol {
        return Err(Error::NotUnitary { deviation });
    }
    Ok(())
}

fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re * s, im * s)
    })
}

/// Haar-distributed unitary via QR of a Ginibre matrix with phase fixing.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    let qr = ginibre(d, d, rng).qr();
    let (mut q, r) = qr.unpack();
    for c in 0..d {
        let rc = r[(c, c)];
        let phase = if rc.norm() > 0.0 { rc / rc.norm() } else { ONE };
        for row in 0..d {
            q[(row, c)] *= phase;
        }
    }
    q
}

/// Uniformly random pure state.
pub fn random_state_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> StateVector {
    let g = ginibre(d, 1, rng);
    let v = DVector::from_iterator(d, g.iter().copied());
    let n = v.norm();
    v / Complex64::new(n, 0.0)
}

/// Random density matrix `G G† / Tr[G G†]` with `G` a `d x rank` Ginibre matrix.
pub fn random_density<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> ComplexMatrix {
    let g = ginibre(d, rank.max(1), rng);
    let w = &g * g.adjoint();
    let tr = w.trace().re;
    let rho = w / Complex64::new(tr, 0.0);
    (rho.clone() + rho.adjoint()).scale(0.5)
}

/// Random Hermitian matrix with i.i.d. Gaussian entries of the given scale.
pub fn random_hermitian<R: Rng + ?Sized>(d: usize, scale: f64, rng: &mut R) -> ComplexMatrix {
    let g = ginibre(d, d, rng);
    (g.clone() + g.adjoint()).scale(0.5 * scale)
}

/// Checks that `rho` is a density matrix and returns its symmetrized form.
pub fn validate_density(rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    let h = hermitize(rho).map_err(|e| match e {
        Error::NotHermitian { drift } => {
            Error::InvalidState(format!("not Hermitian (drift {drift:.3e})"))
        }
        other => other,
    })?;
    let tr = h.trace();
    if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
        return Err(Error::InvalidState(format!("trace {} != 1", tr.re)));
    }
    let eig = hermitian_eig(&h)?;
    let min = eig.values.first().copied().unwrap_or(0.0);
    if min < -1e-10 {
        return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
    }
    Ok(h)
}

/// JSON matrix format: `{"rows": n, "cols": m, "entries": [[re, im], ...]}`, row-major.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MatrixFile {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<[f64; 2]>,
}

impl MatrixFile {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        let mut entries = Vec::with_capacity(m.len());
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                let z = m[(r, c)];
                entries.push([z.re, z.im]);
            }
        }
        MatrixFile {
            rows: m.nrows(),
            cols: m.ncols(),
            entries,
        }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        if self.rows * self.cols != self.entries.len() {
            return Err(Error::Parse(format!(
                "{}x{} matrix needs {} entries, found {}",
                self.rows,
                self.cols,
                self.rows * self.cols,
                self.entries.len()
            )));
        }
        let data: Vec<Complex64> = self
            .entries
            .iter()
            .map(|[re, im]| Complex64::new(*re, *im))
            .collect();
        Ok(ComplexMatrix::from_row_slice(self.rows, self.cols, &data))
    }
}

pub fn matrix_from_json(text: &str) -> Result<ComplexMatrix> {
    let file: MatrixFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    file.to_matrix()
}

pub fn matrix_to_json(m: &ComplexMatrix) -> String {
    serde_json::to_string(&MatrixFile::from_matrix(m)).expect("matrix serialization")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn max_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
        (a - b).iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    fn bell() -> StateVector {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        StateVector::from_vec(vec![
            Complex64::new(s, 0.0),
            ZERO,
            ZERO,
            Complex64::new(s, 0.0),
        ])
    }

    #[test]
    fn kronecker_identity_and_pauli() {
        assert_eq!(tensor_product(&identity(2), &identity(2)), identity(4));
        // sigma_z here is diag(-1, 1)
        let zz = tensor_product(&pauli_z(), &identity(2));
        assert_eq!(zz, real_diagonal(&[-1.0, -1.0, 1.0, 1.0]));
        let xx = tensor_product(&pauli_x(), &pauli_x());
        let mut ket00 = StateVector::zeros(4);
        ket00[0] = ONE;
        let out = xx * ket00;
        assert_eq!(out[3], ONE);
        assert_abs_diff_eq!(out.norm(), 1.0);
    }

    #[test]
    fn partial_traces() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rs = random_density(2, 2, &mut rng);
        let re = random_density(3, 3, &mut rng);
        let prod = tensor_product(&rs, &re);
        assert!(max_diff(&partial_trace(&prod, 2, 3, Side::E).unwrap(), &rs) < 1e-12);
        assert!(max_diff(&partial_trace(&prod, 2, 3, Side::S).unwrap(), &re) < 1e-12);

        let xx = tensor_product(&pauli_x(), &pauli_x());
        assert!(max_diff(&partial_trace(&xx, 2, 2, Side::S).unwrap(), &ComplexMatrix::zeros(2, 2)) < 1e-15);

        let rho_bell = projector(&bell());
        let red = partial_trace(&rho_bell, 2, 2, Side::E).unwrap();
        assert!(max_diff(&red, &identity(2).scale(0.5)) < 1e-15);

        assert!(partial_trace(&identity(5), 2, 3, Side::E).is_err());
    }

    #[test]
    fn partial_transpose_of_bell_state() {
        let pt = partial_transpose_s(&projector(&bell()), 2, 2).unwrap();
        let eig = hermitian_eig(&pt).unwrap();
        assert_abs_diff_eq!(eig.values[0], -0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(eig.values[3], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn partial_transpose_of_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = ginibre(3, 3, &mut rng);
        let b = ginibre(2, 2, &mut rng);
        let pt = partial_transpose_s(&tensor_product(&a, &b), 3, 2).unwrap();
        assert!(max_diff(&pt, &tensor_product(&a.transpose(), &b)) < 1e-14);
        let h = random_hermitian(6, 1.0, &mut rng);
        assert!(hermitian_drift(&partial_transpose_s(&h, 3, 2).unwrap()) < 1e-15);
    }

    #[test]
    fn eigen_examples() {
        let e = hermitian_eig(&real_diagonal(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(e.values, vec![1.0, 2.0, 3.0]);
        let e = hermitian_eig(&pauli_x()).unwrap();
        assert_abs_diff_eq!(e.values[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.values[1], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn eigen_rejects_non_hermitian() {
        let a = ComplexMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]);
        assert!(matches!(hermitian_eig(&a), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn hermitize_absorbs_small_drift() {
        let mut a = pauli_x();
        a[(0, 1)] += Complex64::new(1e-12, 0.0);
        let h = hermitize(&a).unwrap();
        assert_eq!(hermitian_drift(&h), 0.0);
    }

    #[test]
    fn norm_examples() {
        let n = norms(&identity(3));
        assert_abs_diff_eq!(n.hilbert_schmidt, 3f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(n.trace, 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(n.operator, 1.0, epsilon = 1e-14);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_state_vector(4, &mut rng);
        let v = random_state_vector(4, &mut rng);
        let n = norms(&(&u * v.adjoint()));
        assert_abs_diff_eq!(n.hilbert_schmidt, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(n.trace, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(n.operator, 1.0, epsilon = 1e-12);

        // singular values of x + z are both sqrt(2)
        let n = norms(&(pauli_x() + pauli_z()));
        assert_abs_diff_eq!(n.hilbert_schmidt, 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(n.trace, 2.0 * 2f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(n.operator, 2f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn haar_and_expm_are_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for d in 1..6 {
            assert!(unitarity_deviation(&haar_unitary(d, &mut rng)) < 1e-12);
            let g = random_hermitian(d, 1.0, &mut rng);
            assert!(unitarity_deviation(&expm_hermitian(&g, 0.7).unwrap()) < 1e-12);
        }
        let u = expm_hermitian(&pauli_z(), std::f64::consts::PI).unwrap();
        assert!(max_diff(&u, &identity(2).scale(-1.0)) < 1e-14);
    }

    #[test]
    fn matrix_json_roundtrip_and_errors() {
        let m = pauli_y();
        let text = matrix_to_json(&m);
        assert_eq!(matrix_from_json(&text).unwrap(), m);
        assert!(matches!(
            matrix_from_json(r#"{"rows": 2, "cols": 2, "entries": [[1, 0]]}"#),
            Err(Error::Parse(_))
        ));
        assert!(matches!(matrix_from_json("{not json"), Err(Error::Parse(_))));
    }

    #[test]
    fn density_validation() {
        assert!(validate_density(&real_diagonal(&[0.3, 0.7])).is_ok());
        assert!(matches!(
            validate_density(&real_diagonal(&[0.5, 0.7])),
            Err(Error::InvalidState(_))
        ));
        assert!(matches!(
            validate_density(&real_diagonal(&[-0.2, 1.2])),
            Err(Error::InvalidState(_))
        ));
    }
}
