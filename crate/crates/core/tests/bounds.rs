mod common;

use common::{diagonal_instance, random_system, two_level_instance};
use ergoloc::ergotropy::local_objective_direct;
use ergoloc::local::energy_gradient;
use ergoloc::qmat::{hs_norm, random_density, tensor_product};
use ergoloc::{
    build_m_matrix, choi_cost, classical_local_ergotropy, effective_local_ergotropy_product,
    global_ergotropy, hs_gap_bounds, optimize_local_unitary, qubit_local_ergotropy, sdp_upper_bound,
    switch_off_ergotropy, trace_norm_sum_bound, two_level_exact, two_level_lower_bound,
    BipartiteSystem, OptimizerConfig, SdpSettings,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn local_value(sys: &BipartiteSystem) -> f64 {
    if sys.d_s() == 2 {
        qubit_local_ergotropy(&build_m_matrix(sys)).unwrap().value
    } else {
        optimize_local_unitary(sys, &OptimizerConfig::default()).unwrap().value
    }
}

#[test]
fn hilbert_schmidt_gap_inequalities() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for k in 0..60 {
        let d_s = 2 + k % 2;
        let d_e = 2 + k % 3;
        let coupling = [0.05, 0.3, 1.0][k % 3];
        let sys = random_system(&mut rng, d_s, d_e, coupling);
        let local = local_value(&sys);
        let free = global_ergotropy(&sys.rho_s(), sys.h_s()).unwrap().value;
        let off = switch_off_ergotropy(&sys).unwrap();
        let (b_free, b_off) = hs_gap_bounds(&sys);
        assert!(b_free - (local - free).abs() >= -1e-9, "free gap, instance {k}");
        assert!(b_off - (local - off).abs() >= -1e-9, "switch-off gap, instance {k}");
    }
}

#[test]
fn gap_bounds_vanish_without_coupling() {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let sys = random_system(&mut rng, 2, 3, 0.0);
    assert_eq!(hs_gap_bounds(&sys), (0.0, 0.0));
    let rho = tensor_product(&sys.rho_s(), &sys.rho_e());
    let sys = sys.with_state(rho).unwrap();
    let free = global_ergotropy(&sys.rho_s(), sys.h_s()).unwrap().value;
    assert!((local_value(&sys) - free).abs() < 1e-10);
}

#[test]
fn local_ergotropy_is_convex_in_the_state() {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    for _ in 0..20 {
        let sys = random_system(&mut rng, 2, 3, 0.5);
        let other = random_density(6, 6, &mut rng);
        let lambda: f64 = rng.random();
        let mix = sys.rho().scale(lambda) + other.scale(1.0 - lambda);
        let e1 = local_value(&sys);
        let e2 = local_value(&sys.with_state(other).unwrap());
        let em = local_value(&sys.with_state(mix).unwrap());
        assert!(em <= lambda * e1 + (1.0 - lambda) * e2 + 1e-6);
    }
}

#[test]
fn trace_norm_bounds_bracket_the_optimizer() {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    for k in 0..30 {
        let d_s = 2 + k % 2;
        let sys = random_system(&mut rng, d_s, 2, 0.5);
        let opt = optimize_local_unitary(&sys, &OptimizerConfig::default()).unwrap().value;
        let (lower, u) = two_level_lower_bound(sys.rho(), sys.h_s(), sys.v(), 2).unwrap();
        assert!(lower <= opt + 1e-6, "lower {lower} optimizer {opt}");
        assert!((local_objective_direct(sys.rho(), &sys.h_total(), &u, 2) - lower).abs() < 1e-10);
        let upper = trace_norm_sum_bound(sys.rho(), sys.h_s(), sys.v(), 2).unwrap();
        assert!(upper >= opt - 1e-6, "upper {upper} optimizer {opt}");
    }
}

#[test]
fn two_level_exact_matches_optimizer() {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    for k in 0..20 {
        let d_s = 2 + k % 2;
        let d_e = 2 + k % 3;
        let inst = two_level_instance(&mut rng, d_s, d_e);
        let exact = two_level_exact(&inst.psi, &inst.h, d_s, d_e).unwrap();
        let opt = optimize_local_unitary(&inst.system, &OptimizerConfig::default()).unwrap().value;
        assert!((exact - opt).abs() <= 1e-6, "exact {exact} optimizer {opt}");
    }
}

#[test]
fn product_states_reduce_to_effective_hamiltonian() {
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    for d_s in [2, 3] {
        for _ in 0..5 {
            let sys = random_system(&mut rng, d_s, 2, 0.8);
            let rho_s = random_density(d_s, d_s, &mut rng);
            let rho_e = random_density(2, 2, &mut rng);
            let prod = sys.with_state(tensor_product(&rho_s, &rho_e)).unwrap();
            let eff = effective_local_ergotropy_product(&rho_s, &rho_e, sys.h_s(), sys.v()).unwrap().value;
            let opt = optimize_local_unitary(&prod, &OptimizerConfig::default()).unwrap().value;
            assert!((eff - opt).abs() <= 1e-6, "effective {eff} optimizer {opt}");
        }
    }
}

#[test]
fn quantum_contains_classical() {
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    for k in 0..20 {
        let d_s = 2 + k % 3;
        let inst = diagonal_instance(&mut rng, d_s, 2);
        let (classical, _) = classical_local_ergotropy(&inst.p, &inst.e).unwrap();
        let opt = optimize_local_unitary(&inst.system, &OptimizerConfig::default()).unwrap().value;
        assert!(opt >= classical - 1e-6);
    }
}

#[test]
fn sdp_relaxation_dominates_optimizer() {
    let mut rng = ChaCha8Rng::seed_from_u64(108);
    let settings = SdpSettings::default();
    for k in 0..10 {
        let d_s = 2 + k % 2;
        let sys = random_system(&mut rng, d_s, 2, 0.5);
        let opt = optimize_local_unitary(&sys, &OptimizerConfig::default()).unwrap().value;
        let (bound, _) = sdp_upper_bound(&choi_cost(&sys), sys.energy(), &settings).unwrap();
        assert!(bound >= opt - 1e-6, "sdp {bound} optimizer {opt}");
    }
}

#[test]
fn optimum_is_stationary() {
    let mut rng = ChaCha8Rng::seed_from_u64(109);
    let sys = random_system(&mut rng, 3, 2, 0.5);
    let report = optimize_local_unitary(&sys, &OptimizerConfig::default()).unwrap();
    let u = report.optimal_unitary.unwrap();
    let (_, g) = energy_gradient(&choi_cost(&sys), &u);
    assert!(hs_norm(&g) < 1e-7);
    assert!(report.value <= global_ergotropy(sys.rho(), &sys.h_total()).unwrap().value + 1e-9);
}
