use std::fs;
use std::io::Write;
use std::path::Path;

use ergoloc::models::{
    jc_analytic, jc_dressed_state, jc_phase_family_state, jc_relative_phase, jc_system, xxz_analytic,
    xxz_bethe_state, xxz_energy, xxz_regime_entry, xxz_system, PhaseConvention,
};
use ergoloc::qmat::{hermitian_eig, identity, random_density, random_hermitian, MatrixFile};
use ergoloc::sdp::choi_cost;
use ergoloc::{
    build_m_matrix, delta_off, global_ergotropy, optimize_local_unitary, polar_upper_bound,
    qubit_local_ergotropy, sdp_upper_bound, switch_off_ergotropy, BipartiteSystem, ComplexMatrix,
    Error, JcParams, OptimizerConfig, SdpInstance, SdpSettings, Sign, XxzParams,
};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::parse::{num, read_matrix, write_matrix, write_text};
use crate::{CliError, ExportSdpArgs, Format, GlobalArgs, JcArgs, LocalArgs, Method, SystemArgs, XxzArgs};

/// Slack allowed when checking that an exact value sits below the polar bound.
const POLAR_SLACK: f64 = 1e-8;

fn emit(output: Option<&Path>, text: &str) -> Result<(), CliError> {
    match output {
        Some(path) => write_text(path, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Io("stdout".into(), e))
        }
    }
}

fn emit_json(output: Option<&Path>, value: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("report serialization");
    text.push('\n');
    emit(output, &text)
}

fn matrix_json(m: &ComplexMatrix) -> Value {
    serde_json::to_value(MatrixFile::from_matrix(m)).expect("matrix serialization")
}

pub fn global(a: &GlobalArgs) -> Result<(), CliError> {
    let rho = read_matrix(&a.state)?;
    let h = read_matrix(&a.hamiltonian)?;
    let report = global_ergotropy(&rho, &h)?;
    let mut populations = hermitian_eig(&rho)?.values;
    populations.reverse();
    let mut out = json!({
        "value": report.value,
        "energy": report.diagnostics["energy"],
        "passive_energy": report.diagnostics["passive_energy"],
        "passive_populations": populations.iter().map(|p| p.max(0.0)).collect::<Vec<_>>(),
    });
    if a.unitary {
        out["optimal_unitary"] = matrix_json(report.optimal_unitary.as_ref().expect("unitary"));
    }
    emit_json(a.output.as_deref(), &out)
}

fn load_system(a: &SystemArgs) -> Result<BipartiteSystem, CliError> {
    let rho = read_matrix(&a.state)?;
    let h_s = read_matrix(&a.hs)?;
    let v = read_matrix(&a.v)?;
    let h_e = match &a.he {
        Some(p) => read_matrix(p)?,
        None => ComplexMatrix::zeros(a.de, a.de),
    };
    Ok(BipartiteSystem::new(a.ds, a.de, rho, h_s, h_e, v)?)
}

fn ordering_check(lhs: &str, lhs_value: f64, rhs: &str, rhs_value: f64, slack: f64) -> Value {
    json!({
        "lhs": lhs,
        "rhs": rhs,
        "lhs_value": lhs_value,
        "rhs_value": rhs_value,
        "holds": lhs_value <= rhs_value + slack,
    })
}

pub fn local(a: &LocalArgs) -> Result<(), CliError> {
    let sys = load_system(&a.system)?;
    let d_s = sys.d_s();
    if a.method == Method::Closed && d_s != 2 {
        return Err(CliError::Input(format!("method closed needs --ds 2, got {d_s}")));
    }
    let wants = |m: Method| a.method == m || a.method == Method::All;
    let m = build_m_matrix(&sys);
    let closed = if wants(Method::Closed) && d_s == 2 { Some(qubit_local_ergotropy(&m)?.value) } else { None };
    let mut optimizer_diagnostics = Value::Null;
    let optimized = if wants(Method::Optimize) {
        let cfg = OptimizerConfig {
            restarts: a.restarts,
            max_iterations: a.max_iterations,
            seed: a.seed,
            ..OptimizerConfig::default()
        };
        let report = optimize_local_unitary(&sys, &cfg)?;
        optimizer_diagnostics = json!(report.diagnostics);
        Some(report.value)
    } else {
        None
    };
    let polar = wants(Method::Polar).then(|| polar_upper_bound(&m));
    let sdp = if wants(Method::Sdp) {
        let settings = SdpSettings { max_iterations: a.sdp_max_iterations, ..SdpSettings::with_tol(a.sdp_tol) };
        Some(sdp_upper_bound(&choi_cost(&sys), sys.energy(), &settings)?.0)
    } else {
        None
    };
    // exact or feasible values must not exceed either relaxation
    let sdp_slack = 100.0 * a.sdp_tol;
    let mut checks = Vec::new();
    for (name, value) in [("closed", closed), ("optimize", optimized)] {
        let Some(value) = value else { continue };
        if let Some(p) = polar {
            checks.push(ordering_check(name, value, "polar", p, POLAR_SLACK));
        }
        if let Some(s) = sdp {
            checks.push(ordering_check(name, value, "sdp", s, sdp_slack));
        }
    }
    let holds = checks.iter().all(|c| c["holds"] == json!(true));
    let out = json!({
        "d_s": d_s,
        "d_e": sys.d_e(),
        "energy": sys.energy(),
        "free_ergotropy": global_ergotropy(&sys.rho_s(), sys.h_s())?.value,
        "delta_off": delta_off(&sys),
        "switch_off": switch_off_ergotropy(&sys)?,
        "methods": {
            "closed": closed,
            "optimize": optimized,
            "polar": polar,
            "sdp": sdp,
        },
        "optimizer": optimizer_diagnostics,
        "ordering": { "holds": holds, "checks": checks },
    });
    emit_json(a.output.as_deref(), &out)
}

fn export_system(dir: &Path, sys: &BipartiteSystem) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(dir.display().to_string(), e))?;
    write_matrix(&dir.join("rho.json"), sys.rho())?;
    write_matrix(&dir.join("h_s.json"), sys.h_s())?;
    write_matrix(&dir.join("h_e.json"), sys.h_e())?;
    write_matrix(&dir.join("v.json"), sys.v())?;
    let dims = json!({ "d_s": sys.d_s(), "d_e": sys.d_e() });
    write_text(&dir.join("dims.json"), &dims.to_string())
}

pub fn jc(a: &JcArgs) -> Result<(), CliError> {
    let p = JcParams {
        omega_s: a.omega_s,
        omega_e: a.omega_e,
        rabi: a.rabi,
        n_max: a.n_max.unwrap_or(a.n + 5),
    };
    let model = jc_system(&p)?;
    let convention = if a.dynamical_phase { PhaseConvention::Dynamical } else { PhaseConvention::Free };
    if a.dynamical_phase && p.rabi == 0.0 {
        return Err(CliError::Input("--dynamical-phase needs a nonzero --rabi".into()));
    }
    let phis = a.sweep_phi.points();
    let system_at = |phi: f64| -> Result<BipartiteSystem, CliError> {
        let phase = jc_relative_phase(&p, a.n, phi, convention);
        Ok(model.system(jc_phase_family_state(&p, a.n, a.alpha, phase)?)?)
    };
    if let Some(dir) = &a.export_dir {
        export_system(dir, &system_at(phis[0])?)?;
    }
    let rows: Vec<[f64; 4]> = phis
        .par_iter()
        .map(|&phi| {
            let sys = system_at(phi)?;
            let local = qubit_local_ergotropy(&build_m_matrix(&sys))?.value;
            Ok([phi, local, switch_off_ergotropy(&sys)?, delta_off(&sys)])
        })
        .collect::<Result<_, CliError>>()?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["phi", "local_ergotropy", "switch_off", "delta_off"]).expect("in-memory csv");
    for row in &rows {
        w.write_record(row.iter().map(|&x| num(x))).expect("in-memory csv");
    }
    let bytes = w.into_inner().expect("in-memory csv");
    emit(a.output.as_deref(), &String::from_utf8(bytes).expect("ascii csv"))
}

struct XxzRow {
    k: i64,
    energy: f64,
    delta_off: f64,
    switch_off: f64,
    local_analytic: Option<f64>,
    local_numeric: f64,
    bethe_residual: f64,
    regime_entry: f64,
}

pub fn xxz(a: &XxzArgs) -> Result<(), CliError> {
    let p = XxzParams { n_sites: a.sites, epsilon: a.epsilon, j: a.j, j_z: a.jz };
    p.validate()?;
    let ks = match a.k {
        Some(k) => {
            p.check_momentum(k)?;
            vec![k]
        }
        None => p.momenta(),
    };
    let model = xxz_system(&p)?;
    let h = model.total();
    let rows: Vec<XxzRow> = ks
        .par_iter()
        .map(|&k| {
            let psi = xxz_bethe_state(&p, k)?;
            let energy = xxz_energy(&p, k);
            let sys = model.pure_system(&psi)?;
            let local_analytic = match xxz_analytic(&p, k) {
                Ok(an) => Some(an.values.local_ergotropy),
                Err(Error::RegimeViolation(_)) => None,
                Err(e) => return Err(e.into()),
            };
            Ok(XxzRow {
                k,
                energy,
                delta_off: delta_off(&sys),
                switch_off: switch_off_ergotropy(&sys)?,
                local_analytic,
                local_numeric: qubit_local_ergotropy(&build_m_matrix(&sys))?.value,
                bethe_residual: (&h * &psi - psi.scale(energy)).norm(),
                regime_entry: xxz_regime_entry(&p),
            })
        })
        .collect::<Result<_, CliError>>()?;
    match a.format {
        Format::Json => {
            let list: Vec<Value> = rows
                .iter()
                .map(|r| {
                    json!({
                        "k": r.k,
                        "energy": r.energy,
                        "delta_off": r.delta_off,
                        "switch_off": r.switch_off,
                        "local_analytic": r.local_analytic,
                        "local_numeric": r.local_numeric,
                        "bethe_residual": r.bethe_residual,
                        "analytic_residual": r.local_analytic.map(|x| (x - r.local_numeric).abs()),
                        "regime_entry": r.regime_entry,
                    })
                })
                .collect();
            emit_json(a.output.as_deref(), &json!({ "sites": p.n_sites, "rows": list }))
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record([
                "k",
                "energy",
                "delta_off",
                "switch_off",
                "local_analytic",
                "local_numeric",
                "bethe_residual",
                "analytic_residual",
                "regime_entry",
            ])
            .expect("in-memory csv");
            for r in &rows {
                let opt = |x: Option<f64>| x.map(num).unwrap_or_default();
                w.write_record([
                    r.k.to_string(),
                    num(r.energy),
                    num(r.delta_off),
                    num(r.switch_off),
                    opt(r.local_analytic),
                    num(r.local_numeric),
                    num(r.bethe_residual),
                    opt(r.local_analytic.map(|x| (x - r.local_numeric).abs())),
                    num(r.regime_entry),
                ])
                .expect("in-memory csv");
            }
            let bytes = w.into_inner().expect("in-memory csv");
            emit(a.output.as_deref(), &String::from_utf8(bytes).expect("ascii csv"))
        }
    }
}

pub fn export_sdp(a: &ExportSdpArgs) -> Result<(), CliError> {
    let sys = load_system(&a.system)?;
    let cost = choi_cost(&sys);
    let inst = SdpInstance::from_cost(&cost);
    write_text(&a.output, &inst.to_json())?;
    let mut out = json!({
        "path": a.output.display().to_string(),
        "d_s": inst.d_s,
        "rho_energy": inst.rho_energy()?,
    });
    if a.check {
        let settings = SdpSettings::with_tol(a.sdp_tol);
        let text = fs::read_to_string(&a.output).map_err(|e| CliError::Io(a.output.display().to_string(), e))?;
        let reread = SdpInstance::from_json(&text)?;
        let (direct, _) = sdp_upper_bound(&cost, sys.energy(), &settings)?;
        let (imported, _) = reread.solve(&settings)?;
        out["bound"] = json!(direct);
        out["reimported_bound"] = json!(imported);
        out["roundtrip_difference"] = json!((direct - imported).abs());
    }
    emit_json(None, &out)
}

struct Check {
    name: &'static str,
    error: f64,
    tol: f64,
}

fn selftest_checks() -> Result<Vec<Check>, CliError> {
    use rand::SeedableRng;
    let mut checks = Vec::new();

    let rho = ergoloc::qmat::real_diagonal(&[0.3, 0.7]);
    let h = ergoloc::qmat::real_diagonal(&[0.0, 1.0]);
    let g = global_ergotropy(&rho, &h)?.value;
    checks.push(Check { name: "qubit global ergotropy", error: (g - 0.4).abs(), tol: 1e-15 });

    let p = JcParams::for_level(1.0, 1.0, 0.1, 3);
    let sys = jc_system(&p)?.pure_system(&jc_dressed_state(&p, 3, Sign::Plus)?)?;
    let closed = jc_analytic(&p, 3, Sign::Plus).local_ergotropy;
    let pipeline = qubit_local_ergotropy(&build_m_matrix(&sys))?.value;
    checks.push(Check { name: "JC resonance closed form", error: (closed - pipeline).abs(), tol: 1e-12 });

    let ring = XxzParams { n_sites: 3, epsilon: 1.0, j: 0.02, j_z: 0.2 };
    let sys = xxz_system(&ring)?.pure_system(&xxz_bethe_state(&ring, 0)?)?;
    let off = switch_off_ergotropy(&sys)?;
    let local = qubit_local_ergotropy(&build_m_matrix(&sys))?.value;
    let reversal = if off > 1e-10 { local.abs() } else { f64::INFINITY };
    checks.push(Check { name: "small-ring reversal", error: reversal, tol: 1e-10 });

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    let n = 6;
    let raw = random_hermitian(n, 0.5, &mut rng);
    let tr = ergoloc::qmat::partial_trace(&raw, 2, 3, ergoloc::qmat::Side::S)?;
    let v = &raw - ergoloc::qmat::tensor_product(&identity(2), &tr).scale(0.5);
    let sys = BipartiteSystem::new(
        2,
        3,
        random_density(n, n, &mut rng),
        random_hermitian(2, 1.0, &mut rng),
        random_hermitian(3, 1.0, &mut rng),
        v,
    )?;
    let m = build_m_matrix(&sys);
    let closed = qubit_local_ergotropy(&m)?.value;
    let opt = optimize_local_unitary(&sys, &OptimizerConfig::default())?.value;
    checks.push(Check { name: "optimizer vs qubit formula", error: (opt - closed).abs(), tol: 1e-6 });
    checks.push(Check { name: "polar bound tight for qubits", error: (polar_upper_bound(&m) - closed).abs(), tol: 1e-10 });
    let (sdp, _) = sdp_upper_bound(&choi_cost(&sys), sys.energy(), &SdpSettings::default())?;
    checks.push(Check { name: "SDP bound vs qubit formula", error: (sdp - closed).abs(), tol: 1e-4 });
    Ok(checks)
}

pub fn selftest() -> Result<(), CliError> {
    let checks = selftest_checks()?;
    let mut failed = 0;
    for c in &checks {
        let ok = c.error <= c.tol;
        if !ok {
            failed += 1;
        }
        println!("{} {:<30} error {:.3e} (tol {:.0e})", if ok { "PASS" } else { "FAIL" }, c.name, c.error, c.tol);
    }
    if failed > 0 {
        return Err(CliError::SelfTest(failed));
    }
    Ok(())
}
