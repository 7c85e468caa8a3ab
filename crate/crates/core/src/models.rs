//! Jaynes–Cummings atom-cavity and XXZ ring models with closed-form reference values.
//!
//! Qubits use `|0> = down` (lower level) and `sigma_z = diag(-1, +1)`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::local::MMatrix;
use crate::qmat::{
    identity, pauli_x, pauli_y, pauli_z, projector, sigma_minus, sigma_plus, tensor_product,
    ComplexMatrix, StateVector, ZERO,
};
use crate::system::BipartiteSystem;

/// Hamiltonian pieces on `S ⊗ E` with `Tr_S[v] = 0`.
#[derive(Debug, Clone)]
pub struct ModelHamiltonian {
    pub d_s: usize,
    pub d_e: usize,
    pub h_s: ComplexMatrix,
    pub h_e: ComplexMatrix,
    pub v: ComplexMatrix,
}

impl ModelHamiltonian {
    pub fn total(&self) -> ComplexMatrix {
        tensor_product(&self.h_s, &identity(self.d_e))
            + tensor_product(&identity(self.d_s), &self.h_e)
            + &self.v
    }

    pub fn system(&self, rho: ComplexMatrix) -> Result<BipartiteSystem> {
        BipartiteSystem::new(self.d_s, self.d_e, rho, self.h_s.clone(), self.h_e.clone(), self.v.clone())
    }

    pub fn pure_system(&self, psi: &StateVector) -> Result<BipartiteSystem> {
        self.system(projector(psi))
    }
}

/// Closed-form energetics of a model state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticValues {
    pub energy: f64,
    pub delta_off: f64,
    pub switch_off: f64,
    pub local_ergotropy: f64,
}

/// Local ergotropy for a diagonal qubit M-matrix.
fn diagonal_m_value(m: [f64; 3]) -> f64 {
    let drop: f64 = m.iter().map(|x| (-x).max(0.0)).sum::<f64>() * 2.0;
    let det = m[0] * m[1] * m[2];
    if det < 0.0 {
        drop - 2.0 * m.iter().fold(f64::INFINITY, |a, x| a.min(x.abs()))
    } else {
        drop
    }
}

fn diag_m(m: [f64; 3]) -> MMatrix {
    MMatrix { m: DMatrix::from_diagonal(&DVector::from_vec(m.to_vec())), d_s: 2 }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JcParams {
    pub omega_s: f64,
    pub omega_e: f64,
    pub rabi: f64,
    /// Highest Fock level kept; the cavity dimension is `n_max + 1`.
    pub n_max: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

impl JcParams {
    /// Cutoff `n + 5` for work on the dressed level `n`.
    pub fn for_level(omega_s: f64, omega_e: f64, rabi: f64, n: usize) -> Self {
        JcParams { omega_s, omega_e, rabi, n_max: n + 5 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_max < 2 {
            return Err(Error::InvalidParameter(format!("n_max must be >= 2, got {}", self.n_max)));
        }
        if ![self.omega_s, self.omega_e, self.rabi].iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidParameter("frequencies must be finite".into()));
        }
        Ok(())
    }

    pub fn detuning(&self) -> f64 {
        self.omega_s - self.omega_e
    }

    /// `theta_n = (1/2) arctan(Omega sqrt(n+1) / delta)`, principal branch; `±pi/4` at resonance.
    pub fn mixing_angle(&self, n: usize) -> f64 {
        let num = self.rabi * ((n + 1) as f64).sqrt();
        let delta = self.detuning();
        if delta == 0.0 {
            if num == 0.0 {
                0.0
            } else {
                num.signum() * PI / 4.0
            }
        } else {
            0.5 * (num / delta).atan()
        }
    }

    /// Half the Rabi splitting of the `n`-th excitation block, `Omega sqrt(n+1) / 2`.
    pub fn coupling(&self, n: usize) -> f64 {
        0.5 * self.rabi * ((n + 1) as f64).sqrt()
    }

    fn check_level(&self, n: usize) -> Result<()> {
        self.validate()?;
        if n + 1 >= self.n_max {
            return Err(Error::InvalidParameter(format!(
                "level n = {n} needs n + 1 < n_max, got n_max = {}",
                self.n_max
            )));
        }
        Ok(())
    }
}

/// `H_S = (omega_S/2) sigma_z`, `H_E = omega_E a^dag a`, `V = (Omega/2)(sigma_+ ⊗ a + sigma_- ⊗ a^dag)`.
pub fn jc_system(p: &JcParams) -> Result<ModelHamiltonian> {
    p.validate()?;
    let d_e = p.n_max + 1;
    let a = ComplexMatrix::from_fn(d_e, d_e, |r, c| {
        if c == r + 1 {
            Complex64::new((c as f64).sqrt(), 0.0)
        } else {
            ZERO
        }
    });
    let number = ComplexMatrix::from_fn(d_e, d_e, |r, c| {
        if r == c {
            Complex64::new(r as f64, 0.0)
        } else {
            ZERO
        }
    });
    let v = (tensor_product(&sigma_plus(), &a) + tensor_product(&sigma_minus(), &a.adjoint())).scale(0.5 * p.rabi);
    Ok(ModelHamiltonian {
        d_s: 2,
        d_e,
        h_s: pauli_z().scale(0.5 * p.omega_s),
        h_e: number.scale(p.omega_e),
        v,
    })
}

/// `|n,+> = cos(theta)|1,n> + sin(theta)|0,n+1>`, `|n,-> = sin(theta)|1,n> - cos(theta)|0,n+1>`.
pub fn jc_dressed_state(p: &JcParams, n: usize, sign: Sign) -> Result<StateVector> {
    p.check_level(n)?;
    let d_e = p.n_max + 1;
    let theta = p.mixing_angle(n);
    let (c, s) = (theta.cos(), theta.sin());
    let (up, down) = match sign {
        Sign::Plus => (c, s),
        Sign::Minus => (s, -c),
    };
    let mut psi = StateVector::zeros(2 * d_e);
    psi[d_e + n] = Complex64::new(up, 0.0);
    psi[n + 1] = Complex64::new(down, 0.0);
    Ok(psi)
}

/// Eigenvalue of the labelled dressed state:
/// `omega_E (n + 1/2) ± [(delta/2) cos 2theta + g sin 2theta]`.
pub fn jc_dressed_energy(p: &JcParams, n: usize, sign: Sign) -> f64 {
    let theta = p.mixing_angle(n);
    let g = p.coupling(n);
    let split = 0.5 * p.detuning() * (2.0 * theta).cos() + g * (2.0 * theta).sin();
    p.omega_e * (n as f64 + 0.5) + sign.factor() * split
}

/// M-matrix of `|n,±>`: `±diag(-x, -x, -omega_S cos 2theta / 2)` with `x = g sin 2theta / 2`.
pub fn jc_m_matrix(p: &JcParams, n: usize, sign: Sign) -> MMatrix {
    let theta = p.mixing_angle(n);
    let x = 0.5 * p.coupling(n) * (2.0 * theta).sin();
    let z = 0.5 * p.omega_s * (2.0 * theta).cos();
    let s = sign.factor();
    diag_m([-s * x, -s * x, -s * z])
}

/// Closed-form `(Delta^off, E^off, E_S)` for a dressed state.
pub fn jc_analytic(p: &JcParams, n: usize, sign: Sign) -> AnalyticValues {
    let theta = p.mixing_angle(n);
    let s = sign.factor();
    let g = p.coupling(n);
    let delta_off = -s * g * (2.0 * theta).sin();
    let free = (s * p.omega_s * (2.0 * theta).cos()).max(0.0);
    let m = jc_m_matrix(p, n, sign);
    let local = diagonal_m_value([m.m[(0, 0)], m.m[(1, 1)], m.m[(2, 2)]]);
    AnalyticValues {
        energy: jc_dressed_energy(p, n, sign),
        delta_off,
        switch_off: free - delta_off,
        local_ergotropy: local,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseConvention {
    /// The sweep value is the relative phase itself.
    Free,
    /// The sweep value is `Omega t`; the relative phase is `(E_{n,-} - E_{n,+}) t`.
    Dynamical,
}

/// Relative phase used for sweep value `phi`.
pub fn jc_relative_phase(p: &JcParams, n: usize, phi: f64, convention: PhaseConvention) -> f64 {
    match convention {
        PhaseConvention::Free => phi,
        PhaseConvention::Dynamical => {
            let t = phi / p.rabi;
            (jc_dressed_energy(p, n, Sign::Minus) - jc_dressed_energy(p, n, Sign::Plus)) * t
        }
    }
}

/// Pure state `cos(alpha)|n,+> + exp(i phi) sin(alpha)|n,->` as a density matrix.
pub fn jc_phase_family_state(p: &JcParams, n: usize, alpha: f64, phi: f64) -> Result<ComplexMatrix> {
    Ok(projector(&jc_phase_family_vector(p, n, alpha, phi)?))
}

pub fn jc_phase_family_vector(p: &JcParams, n: usize, alpha: f64, phi: f64) -> Result<StateVector> {
    let plus = jc_dressed_state(p, n, Sign::Plus)?;
    let minus = jc_dressed_state(p, n, Sign::Minus)?;
    Ok(plus.scale(alpha.cos()) + minus * Complex64::from_polar(alpha.sin(), phi))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XxzParams {
    pub n_sites: usize,
    pub epsilon: f64,
    pub j: f64,
    pub j_z: f64,
}

/// Largest ring built densely (a `2^N` square complex matrix).
pub const XXZ_MAX_SITES: usize = 12;

impl XxzParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_sites < 3 {
            return Err(Error::InvalidParameter(format!("ring needs N >= 3 sites, got {}", self.n_sites)));
        }
        if ![self.epsilon, self.j, self.j_z].iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidParameter("couplings must be finite".into()));
        }
        Ok(())
    }

    /// Valid momenta `k` in `(-floor(N/2), floor(N/2)]`.
    pub fn momenta(&self) -> Vec<i64> {
        let h = (self.n_sites / 2) as i64;
        (-h + 1..=h).collect()
    }

    pub fn check_momentum(&self, k: i64) -> Result<()> {
        let h = (self.n_sites / 2) as i64;
        if k <= -h || k > h {
            return Err(Error::InvalidParameter(format!(
                "momentum k = {k} outside ({}, {h}] for N = {}",
                -h, self.n_sites
            )));
        }
        Ok(())
    }

    fn cos_k(&self, k: i64) -> f64 {
        (2.0 * PI * k as f64 / self.n_sites as f64).cos()
    }
}

/// Single-site operator `op` on site `i` (1-based, site 1 leftmost) of `count` sites.
fn site_operator(op: &ComplexMatrix, i: usize, count: usize) -> ComplexMatrix {
    let left = identity(1 << (i - 1));
    let right = identity(1 << (count - i));
    tensor_product(&tensor_product(&left, op), &right)
}

fn bond(i: usize, j: usize, count: usize, p: &XxzParams) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(1 << count, 1 << count);
    for (op, c) in [(pauli_x(), p.j), (pauli_y(), p.j), (pauli_z(), p.j_z)] {
        out -= (site_operator(&op, i, count) * site_operator(&op, j, count)).scale(c);
    }
    out
}

/// `H = eps sum sigma_z_i - sum [J (x_i x_{i+1} + y_i y_{i+1}) + J_z z_i z_{i+1}]` on a ring,
/// with S = site 1 and E = sites 2..N. `V` holds the bonds (1,2) and (N,1).
pub fn xxz_system(p: &XxzParams) -> Result<ModelHamiltonian> {
    p.validate()?;
    let n = p.n_sites;
    if n > XXZ_MAX_SITES {
        return Err(Error::Unsupported(format!(
            "N = {n} exceeds the dense limit of {XXZ_MAX_SITES} sites"
        )));
    }
    let m = n - 1;
    let d_e = 1 << m;
    let mut h_e = ComplexMatrix::zeros(d_e, d_e);
    for i in 1..=m {
        h_e += site_operator(&pauli_z(), i, m).scale(p.epsilon);
    }
    for i in 1..m {
        h_e += bond(i, i + 1, m, p);
    }
    let v = bond(1, 2, n, p) + bond(n, 1, n, p);
    Ok(ModelHamiltonian { d_s: 2, d_e, h_s: pauli_z().scale(p.epsilon), h_e, v })
}

/// `|phi_k> = N^{-1/2} sum_n exp(2 pi i k n / N) |up at site n>`.
pub fn xxz_bethe_state(p: &XxzParams, k: i64) -> Result<StateVector> {
    p.validate()?;
    p.check_momentum(k)?;
    let n = p.n_sites;
    let norm = 1.0 / (n as f64).sqrt();
    let mut psi = StateVector::zeros(1 << n);
    for site in 1..=n {
        let phase = 2.0 * PI * k as f64 * site as f64 / n as f64;
        psi[1 << (n - site)] = Complex64::from_polar(norm, phase);
    }
    Ok(psi)
}

/// `E_k = -[(N-2) eps + (N-4) J_z + 4 J cos(2 pi k / N)]`.
pub fn xxz_energy(p: &XxzParams, k: i64) -> f64 {
    let n = p.n_sites as f64;
    -((n - 2.0) * p.epsilon + (n - 4.0) * p.j_z + 4.0 * p.j * p.cos_k(k))
}

/// `M_k = diag(4 J c / N, 4 J c / N, (N-2) eps / N + 2 (N-4) J_z / N)`, `c = cos(2 pi k / N)`.
pub fn xxz_m_matrix(p: &XxzParams, k: i64) -> MMatrix {
    let n = p.n_sites as f64;
    let x = 4.0 * p.j * p.cos_k(k) / n;
    diag_m([x, x, xxz_regime_entry(p)])
}

/// Third diagonal entry of `M_k`; the closed local-ergotropy formula needs it nonnegative.
pub fn xxz_regime_entry(p: &XxzParams) -> f64 {
    let n = p.n_sites as f64;
    (n - 2.0) * p.epsilon / n + 2.0 * (n - 4.0) * p.j_z / n
}

/// The alternative condition `(N-1) eps / N + (2N-8) J_z / N >= 0`.
pub fn xxz_text_condition(p: &XxzParams) -> bool {
    let n = p.n_sites as f64;
    (n - 1.0) * p.epsilon / n + (2.0 * n - 8.0) * p.j_z / n >= 0.0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XxzAnalytic {
    pub values: AnalyticValues,
    pub regime_entry: f64,
    /// Whether the alternative text condition agrees with the operative one.
    pub conditions_agree: bool,
}

/// Closed-form `(Delta^off, E^off, E_S)` for `|phi_k>`. Fails with `RegimeViolation` when the
/// third diagonal entry of `M_k` is negative.
pub fn xxz_analytic(p: &XxzParams, k: i64) -> Result<XxzAnalytic> {
    p.validate()?;
    p.check_momentum(k)?;
    let n = p.n_sites as f64;
    let c = p.cos_k(k);
    let delta_off = 8.0 * p.j * c / n + (2.0 * n - 8.0) * p.j_z / n;
    let free = (-2.0 * p.epsilon * (n - 2.0) / n).max(0.0);
    let entry = xxz_regime_entry(p);
    let conditions_agree = (entry >= 0.0) == xxz_text_condition(p);
    if entry < 0.0 {
        return Err(Error::RegimeViolation(format!(
            "M_zz = {entry:.6e} < 0 for N = {}, use the numeric path",
            p.n_sites
        )));
    }
    let x = 4.0 * p.j * c / n;
    Ok(XxzAnalytic {
        values: AnalyticValues {
            energy: xxz_energy(p, k),
            delta_off,
            switch_off: free - delta_off,
            local_ergotropy: 2.0 * (x.abs() - x),
        },
        regime_entry: entry,
        conditions_agree,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ergotropy::{delta_off, switch_off_ergotropy};
    use crate::local::{build_m_matrix, qubit_local_ergotropy};
    use crate::qmat::{hermitian_eig, partial_trace, Side};
    use approx::assert_abs_diff_eq;

    fn residual(h: &ComplexMatrix, psi: &StateVector, e: f64) -> f64 {
        (h * psi - psi.scale(e)).norm()
    }

    #[test]
    fn jc_construction() {
        let p = JcParams { omega_s: 1.0, omega_e: 1.2, rabi: 0.0, n_max: 4 };
        assert_eq!(jc_system(&p).unwrap().v.camax(), 0.0);
        let p = JcParams { rabi: 0.3, ..p };
        let h = jc_system(&p).unwrap();
        let tr = partial_trace(&h.v, 2, 5, Side::S).unwrap();
        assert_eq!(tr.camax(), 0.0);
        // <1,n|V|0,n+1> = Omega sqrt(n+1) / 2
        for n in 0..4 {
            let want = 0.3 * ((n + 1) as f64).sqrt() / 2.0;
            assert_abs_diff_eq!(h.v[(5 + n, n + 1)].re, want, epsilon = 1e-15);
        }
        assert!(jc_system(&JcParams { n_max: 1, ..p }).is_err());
    }

    #[test]
    fn jc_dressed_states_are_eigenvectors() {
        for delta in [-0.5, -0.2, 0.0, 0.2, 0.5] {
            for rabi in [0.05, 0.1, 0.5, -0.3] {
                let p = JcParams { omega_s: 1.0 + delta, omega_e: 1.0, rabi, n_max: 8 };
                let h = jc_system(&p).unwrap().total();
                for n in [0, 1, 5] {
                    let plus = jc_dressed_state(&p, n, Sign::Plus).unwrap();
                    let minus = jc_dressed_state(&p, n, Sign::Minus).unwrap();
                    assert!(residual(&h, &plus, jc_dressed_energy(&p, n, Sign::Plus)) < 1e-12);
                    assert!(residual(&h, &minus, jc_dressed_energy(&p, n, Sign::Minus)) < 1e-12);
                    assert!(plus.dotc(&minus).norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn jc_spectrum_contains_dressed_energies() {
        let p = JcParams { omega_s: 1.0, omega_e: 1.2, rabi: 0.1, n_max: 6 };
        let spec = hermitian_eig(&jc_system(&p).unwrap().total()).unwrap().values;
        for n in 0..5 {
            for s in [Sign::Plus, Sign::Minus] {
                let e = jc_dressed_energy(&p, n, s);
                assert!(spec.iter().any(|x| (x - e).abs() < 1e-12));
            }
        }
    }

    #[test]
    fn jc_limits() {
        let p = JcParams { omega_s: 1.2, omega_e: 1.0, rabi: 1e-9, n_max: 5 };
        let psi = jc_dressed_state(&p, 1, Sign::Plus).unwrap();
        assert!((psi[6 + 1].re - 1.0).abs() < 1e-9);
        let p = JcParams { omega_s: 1.0, omega_e: 1.0, rabi: 0.1, n_max: 5 };
        assert_abs_diff_eq!(p.mixing_angle(3).abs(), PI / 4.0, epsilon = 1e-15);
        assert!(jc_dressed_state(&p, 4, Sign::Plus).is_err());
    }

    #[test]
    fn jc_analytic_matches_pipeline() {
        for n in [0usize, 1, 5, 10] {
            for delta in [-0.5, -0.2, 0.0, 0.2, 0.5] {
                for rabi in [0.05, 0.1, 0.5] {
                    let p = JcParams::for_level(1.0 + delta, 1.0, rabi, n);
                    let model = jc_system(&p).unwrap();
                    for s in [Sign::Plus, Sign::Minus] {
                        let sys = model.pure_system(&jc_dressed_state(&p, n, s).unwrap()).unwrap();
                        let a = jc_analytic(&p, n, s);
                        let m = build_m_matrix(&sys);
                        assert!((&m.m - &jc_m_matrix(&p, n, s).m).camax() < 1e-12);
                        assert_abs_diff_eq!(delta_off(&sys), a.delta_off, epsilon = 1e-12);
                        assert_abs_diff_eq!(switch_off_ergotropy(&sys).unwrap(), a.switch_off, epsilon = 1e-12);
                        let closed = qubit_local_ergotropy(&m).unwrap().value;
                        assert_abs_diff_eq!(closed, a.local_ergotropy, epsilon = 1e-12);
                        assert_abs_diff_eq!(sys.energy(), a.energy, epsilon = 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn jc_truncation_stability() {
        for n in [0usize, 3] {
            let base = JcParams { omega_s: 1.0, omega_e: 1.2, rabi: 0.1, n_max: n + 3 };
            let wide = JcParams { n_max: n + 6, ..base };
            let pick = |p: &JcParams| {
                let sys = jc_system(p).unwrap().pure_system(&jc_dressed_state(p, n, Sign::Plus).unwrap()).unwrap();
                (qubit_local_ergotropy(&build_m_matrix(&sys)).unwrap().value, switch_off_ergotropy(&sys).unwrap())
            };
            let (a, b) = (pick(&base), pick(&wide));
            assert!((a.0 - b.0).abs() <= 1e-10 && (a.1 - b.1).abs() <= 1e-10);
        }
    }

    #[test]
    fn jc_m_determinants() {
        for delta in [-0.5, 0.0, 0.5] {
            let p = JcParams::for_level(1.0 + delta, 1.0, 0.1, 2);
            let plus = jc_m_matrix(&p, 2, Sign::Plus).m.determinant();
            let minus = jc_m_matrix(&p, 2, Sign::Minus).m.determinant();
            assert!(plus <= 0.0 && minus >= 0.0);
            assert_abs_diff_eq!(plus, -minus, epsilon = 1e-18);
        }
    }

    #[test]
    fn phase_family_endpoints() {
        let p = JcParams::for_level(1.0, 1.2, 0.1, 10);
        let plus = projector(&jc_dressed_state(&p, 10, Sign::Plus).unwrap());
        let minus = projector(&jc_dressed_state(&p, 10, Sign::Minus).unwrap());
        assert!((jc_phase_family_state(&p, 10, 0.0, 1.3).unwrap() - plus).camax() < 1e-15);
        assert!((jc_phase_family_state(&p, 10, PI / 2.0, 0.0).unwrap() - minus).camax() < 1e-15);
        assert_eq!(jc_relative_phase(&p, 10, 0.7, PhaseConvention::Free), 0.7);
        assert_ne!(jc_relative_phase(&p, 10, 0.7, PhaseConvention::Dynamical), 0.7);
    }

    #[test]
    fn xxz_ground_and_symmetry() {
        let p = XxzParams { n_sites: 5, epsilon: 1.0, j: 0.1, j_z: 0.3 };
        let model = xxz_system(&p).unwrap();
        let h = model.total();
        let ground = h[(0, 0)].re;
        assert_abs_diff_eq!(ground, -5.0 * 1.3, epsilon = 1e-12);
        let mut sz = ComplexMatrix::zeros(32, 32);
        for i in 1..=5 {
            sz += site_operator(&pauli_z(), i, 5);
        }
        assert!((&h * &sz - &sz * &h).camax() < 1e-12);
        let ising = xxz_system(&XxzParams { n_sites: 4, j: 0.0, ..p }).unwrap().total();
        let off = ising.clone() - ComplexMatrix::from_diagonal(&ising.diagonal());
        assert_eq!(off.camax(), 0.0);
        assert!(xxz_system(&XxzParams { n_sites: 20, ..p }).is_err());
    }

    #[test]
    fn xxz_bethe_states() {
        for n in [3usize, 4, 5, 6] {
            let p = XxzParams { n_sites: n, epsilon: 1.0, j: 0.1, j_z: 0.4 };
            let model = xxz_system(&p).unwrap();
            let h = model.total();
            let ks = p.momenta();
            assert_eq!(ks.len(), 2 * (n / 2));
            for &k in &ks {
                let psi = xxz_bethe_state(&p, k).unwrap();
                assert!(residual(&h, &psi, xxz_energy(&p, k)) < 1e-10);
                let sys = model.pure_system(&psi).unwrap();
                let rs = sys.rho_s();
                assert_abs_diff_eq!(rs[(0, 0)].re, (n as f64 - 1.0) / n as f64, epsilon = 1e-12);
                assert_abs_diff_eq!(rs[(1, 1)].re, 1.0 / n as f64, epsilon = 1e-12);
                for &k2 in &ks {
                    let ov = psi.dotc(&xxz_bethe_state(&p, k2).unwrap()).norm();
                    assert_abs_diff_eq!(ov, if k == k2 { 1.0 } else { 0.0 }, epsilon = 1e-12);
                }
            }
            assert!(xxz_bethe_state(&p, ks[0] - 1).is_err());
        }
    }

    #[test]
    fn xxz_analytic_matches_pipeline() {
        for n in [4usize, 6, 8] {
            for j in [0.02, 0.1] {
                for j_z in [0.1, 0.4] {
                    let p = XxzParams { n_sites: n, epsilon: 1.0, j, j_z };
                    let model = xxz_system(&p).unwrap();
                    for k in p.momenta() {
                        let sys = model.pure_system(&xxz_bethe_state(&p, k).unwrap()).unwrap();
                        let a = xxz_analytic(&p, k).unwrap().values;
                        let m = build_m_matrix(&sys);
                        assert!((&m.m - &xxz_m_matrix(&p, k).m).camax() < 1e-12);
                        assert_abs_diff_eq!(delta_off(&sys), a.delta_off, epsilon = 1e-12);
                        assert_abs_diff_eq!(switch_off_ergotropy(&sys).unwrap(), a.switch_off, epsilon = 1e-12);
                        assert_abs_diff_eq!(qubit_local_ergotropy(&m).unwrap().value, a.local_ergotropy, epsilon = 1e-12);
                        if n >= 4 {
                            assert!(a.local_ergotropy >= a.switch_off - 1e-12);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn xxz_small_ring_reversal() {
        let p = XxzParams { n_sites: 3, epsilon: 1.0, j: 0.02, j_z: 0.2 };
        let a = xxz_analytic(&p, 0).unwrap().values;
        assert!(a.switch_off > 0.0);
        assert_eq!(a.local_ergotropy, 0.0);
    }

    #[test]
    fn xxz_regime_guard() {
        let p = XxzParams { n_sites: 3, epsilon: 0.1, j: 0.02, j_z: 1.0 };
        assert!(matches!(xxz_analytic(&p, 0), Err(Error::RegimeViolation(_))));
        assert!(xxz_analytic(&p, 5).is_err());
    }
}
