//! Bipartite state plus Hamiltonian `H = H_S ⊗ I + I ⊗ H_E + V_SE`.

use crate::error::{Error, Result};
use crate::qmat::{
    hermitize, identity, partial_trace, tensor_product, trace_product, validate_density,
    ComplexMatrix, Side,
};

/// Tolerance on the `Tr_S[V_SE] = 0` normalization.
pub const COUPLING_TRACE_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct BipartiteSystem {
    d_s: usize,
    d_e: usize,
    rho: ComplexMatrix,
    h_s: ComplexMatrix,
    h_e: ComplexMatrix,
    v: ComplexMatrix,
}

fn expect_square(name: &str, m: &ComplexMatrix, n: usize) -> Result<()> {
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "{name} must be {n}x{n}, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

impl BipartiteSystem {
    /// Validates and symmetrizes all inputs. `V_SE` must satisfy `Tr_S[V_SE] = 0`.
    pub fn new(
        d_s: usize,
        d_e: usize,
        rho: ComplexMatrix,
        h_s: ComplexMatrix,
        h_e: ComplexMatrix,
        v: ComplexMatrix,
    ) -> Result<Self> {
        if d_s < 2 {
            return Err(Error::InvalidParameter(format!("d_S must be >= 2, got {d_s}")));
        }
        if d_e < 1 {
            return Err(Error::InvalidParameter("d_E must be >= 1".into()));
        }
        let n = d_s * d_e;
        expect_square("rho_SE", &rho, n)?;
        expect_square("H_S", &h_s, d_s)?;
        expect_square("H_E", &h_e, d_e)?;
        expect_square("V_SE", &v, n)?;
        let rho = validate_density(&rho)?;
        let h_s = hermitize(&h_s)?;
        let h_e = hermitize(&h_e)?;
        let v = hermitize(&v)?;
        let tr_s = partial_trace(&v, d_s, d_e, Side::S)?;
        let defect = tr_s.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        if defect > COUPLING_TRACE_TOL {
            return Err(Error::InvalidParameter(format!(
                "Tr_S[V_SE] must vanish, max entry {defect:.3e}"
            )));
        }
        Ok(BipartiteSystem { d_s, d_e, rho, h_s, h_e, v })
    }

    /// Splits a general Hermitian `H_SE` with `H_E = Tr_S[H]/d_S`, `H_S = Tr_E[H]/d_E - (Tr H/(d_S d_E)) I`
    /// and the remainder as coupling, so that `Tr_S[V] = 0`.
    pub fn from_total_hamiltonian(
        d_s: usize,
        d_e: usize,
        rho: ComplexMatrix,
        h: ComplexMatrix,
    ) -> Result<Self> {
        let n = d_s * d_e;
        expect_square("H_SE", &h, n)?;
        let h = hermitize(&h)?;
        let scale = |m: ComplexMatrix, s: f64| m.scale(s);
        let h_e = scale(partial_trace(&h, d_s, d_e, Side::S)?, 1.0 / d_s as f64);
        let tr = h.trace().re / n as f64;
        let h_s = scale(partial_trace(&h, d_s, d_e, Side::E)?, 1.0 / d_e as f64) - identity(d_s).scale(tr);
        let v = &h - tensor_product(&h_s, &identity(d_e)) - tensor_product(&identity(d_s), &h_e);
        Self::new(d_s, d_e, rho, h_s, h_e, v)
    }

    pub fn d_s(&self) -> usize {
        self.d_s
    }

    pub fn d_e(&self) -> usize {
        self.d_e
    }

    pub fn rho(&self) -> &ComplexMatrix {
        &self.rho
    }

    pub fn h_s(&self) -> &ComplexMatrix {
        &self.h_s
    }

    pub fn h_e(&self) -> &ComplexMatrix {
        &self.h_e
    }

    pub fn v(&self) -> &ComplexMatrix {
        &self.v
    }

    pub fn rho_s(&self) -> ComplexMatrix {
        partial_trace(&self.rho, self.d_s, self.d_e, Side::E).expect("validated dims")
    }

    pub fn rho_e(&self) -> ComplexMatrix {
        partial_trace(&self.rho, self.d_s, self.d_e, Side::S).expect("validated dims")
    }

    pub fn h_total(&self) -> ComplexMatrix {
        tensor_product(&self.h_s, &identity(self.d_e))
            + tensor_product(&identity(self.d_s), &self.h_e)
            + &self.v
    }

    /// `H_S ⊗ I + V_SE`, the part of the energy a local unitary on S can change.
    pub fn h_sv(&self) -> ComplexMatrix {
        tensor_product(&self.h_s, &identity(self.d_e)) + &self.v
    }

    pub fn energy(&self) -> f64 {
        trace_product(&self.rho, &self.h_total()).re
    }

    /// Same Hamiltonian, new state.
    pub fn with_state(&self, rho: ComplexMatrix) -> Result<Self> {
        let n = self.d_s * self.d_e;
        expect_square("rho_SE", &rho, n)?;
        let rho = validate_density(&rho)?;
        Ok(BipartiteSystem { rho, ..self.clone() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::{pauli_x, pauli_z, random_density, random_hermitian, real_diagonal};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn accepts_valid_and_rejects_bad_coupling() {
        let rho = identity(4).scale(0.25);
        let v = tensor_product(&pauli_x(), &pauli_x());
        let sys = BipartiteSystem::new(2, 2, rho.clone(), pauli_z(), pauli_z(), v).unwrap();
        assert!((sys.energy()).abs() < 1e-15);

        let bad_v = tensor_product(&identity(2), &pauli_x());
        let err = BipartiteSystem::new(2, 2, rho.clone(), pauli_z(), pauli_z(), bad_v);
        assert!(matches!(err, Err(Error::InvalidParameter(_))));

        let bad_rho = real_diagonal(&[0.5, 0.5, 0.5, -0.5]);
        let err = BipartiteSystem::new(2, 2, bad_rho, pauli_z(), pauli_z(), ComplexMatrix::zeros(4, 4));
        assert!(matches!(err, Err(Error::InvalidState(_))));

        let err = BipartiteSystem::new(2, 3, rho, pauli_z(), pauli_z(), ComplexMatrix::zeros(4, 4));
        assert!(matches!(err, Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn total_hamiltonian_split_roundtrips() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let h = random_hermitian(6, 1.0, &mut rng);
        let rho = random_density(6, 6, &mut rng);
        let sys = BipartiteSystem::from_total_hamiltonian(2, 3, rho, h.clone()).unwrap();
        let diff = (sys.h_total() - h).iter().fold(0.0f64, |m, z| m.max(z.norm()));
        assert!(diff < 1e-12);
    }
}
