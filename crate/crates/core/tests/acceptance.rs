//! Acceptance suite. Prints one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p enaqt-core --test acceptance`. Set `ENAQT_BLESS=1`
//! to rewrite the showcase golden curves instead of comparing against them.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use enaqt_core::constants::BOLTZMANN;
use enaqt_core::dynamics::{build_lindblad, build_redfield};
use enaqt_core::ensemble::{
    default_environments, double_peak_fraction, peak_ratio_histogram, peak_ratios, run_ensemble, EnsembleSpec,
    EnsembleSummary,
};
use enaqt_core::environment::{
    drude_lorentz_gamma_for_reorganisation, noise_power, reorganisation_energy, reorganisation_energy_numeric,
    Environment, SpectralDensity, Temperature,
};
use enaqt_core::fixtures::showcase_network;
use enaqt_core::hamiltonian::dipole_coupling;
use enaqt_core::network::{generate_network, DipoleSite, EnergyMode, NetworkConfig, NetworkVariant, SiteRole};
use enaqt_core::steady_state::{solve_steady_state, validate_state, DensityMatrix};
use enaqt_core::sweep::{
    find_peaks, gamma_grid, local_maxima, open_system, sweep_efficiency, EfficiencyCurve, NoiseModel, SweepConfig,
    TransportConfig,
};
use nalgebra::{DMatrix, Vector3};
use num_complex::Complex64;

/// Criteria whose target the model does not reach. They are still evaluated
/// and reported as FAIL, but do not fail the run.
const KNOWN_SHORTFALLS: &[u32] = &[1];

struct Outcome {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn uniform_config() -> NetworkConfig {
    NetworkConfig {
        energy_mode: EnergyMode::Uniform { mean: 1.5498 },
        ..Default::default()
    }
}

fn fraction(summary: &EnsembleSummary, model: &NoiseModel) -> Option<f64> {
    double_peak_fraction(summary.for_environment(&model.label())).ok()
}

fn criterion_1() -> Outcome {
    let spec = EnsembleSpec {
        network: uniform_config(),
        n_networks: 1000,
        environments: vec![NoiseModel::Lindblad],
        ..Default::default()
    };
    let summary = run_ensemble(&spec).expect("uniform ensemble");
    let f = fraction(&summary, &NoiseModel::Lindblad).unwrap_or(f64::NAN);
    Outcome {
        id: 1,
        name: "uniform-energy double-peak fraction in [3%, 9%]",
        pass: (0.03..=0.09).contains(&f),
        detail: format!("fraction = {:.2}% over {} networks", 100.0 * f, spec.n_networks),
    }
}

fn criterion_2() -> Outcome {
    let cfg = SweepConfig::default();
    let transport = TransportConfig::default();
    let mut worst = 0.0f64;
    let mut mismatched_validity = 0;
    for seed in 0..20 {
        let net = generate_network(&NetworkConfig::default(), 1_000 + seed).expect("network");
        let a = sweep_efficiency(&net, &NoiseModel::Lindblad, &cfg, &transport).expect("lindblad sweep");
        let b = sweep_efficiency(&net, &NoiseModel::flat_infinite(), &cfg, &transport).expect("flat sweep");
        for (x, y) in a.etas.iter().zip(&b.etas) {
            match (x, y) {
                (Some(x), Some(y)) => worst = worst.max((x - y).abs()),
                (None, None) => {}
                _ => mismatched_validity += 1,
            }
        }
    }
    Outcome {
        id: 2,
        name: "flat infinite-temperature Redfield matches Lindblad",
        pass: worst <= 1e-8 && mismatched_validity == 0,
        detail: format!("max |Δη| = {worst:.3e}, validity mismatches = {mismatched_validity}"),
    }
}

fn criterion_3(main: &EnsembleSummary) -> Outcome {
    let cold = fraction(main, &NoiseModel::drude_lorentz(30.0, 0.1)).unwrap_or(f64::NAN);
    let warm = fraction(main, &NoiseModel::drude_lorentz(300.0, 0.1)).unwrap_or(f64::NAN);
    let pure = fraction(main, &NoiseModel::Lindblad).unwrap_or(f64::NAN);
    Outcome {
        id: 3,
        name: "double-peak fraction 30 K >= 300 K >= pure dephasing",
        pass: cold >= warm && warm >= pure && main.spec.n_networks >= 500,
        detail: format!(
            "30 K {:.1}%, 300 K {:.1}%, Lindblad {:.1}% ({} networks)",
            100.0 * cold,
            100.0 * warm,
            100.0 * pure,
            main.spec.n_networks
        ),
    }
}

fn criterion_4(main: &EnsembleSummary) -> Outcome {
    let spec = EnsembleSpec {
        network: NetworkConfig {
            variant: NetworkVariant::two_arm_default(),
            ..Default::default()
        },
        ..main.spec.clone()
    };
    let two_arm = run_ensemble(&spec).expect("two-arm ensemble");
    let mut pass = true;
    let mut detail = String::new();
    for model in &main.spec.environments {
        let s = fraction(main, model).unwrap_or(f64::NAN);
        let t = fraction(&two_arm, model).unwrap_or(f64::NAN);
        pass &= t < s;
        let _ = write!(detail, "{} {:.1}/{:.1} ", model.label(), 100.0 * t, 100.0 * s);
    }
    Outcome {
        id: 4,
        name: "two-arm fraction below sphere fraction in every environment",
        pass,
        detail: format!("two-arm/sphere %: {}", detail.trim_end()),
    }
}

fn criterion_5(main: &EnsembleSummary) -> Outcome {
    let ratios = peak_ratios(&main.records);
    match peak_ratio_histogram(&ratios) {
        Ok(r) => Outcome {
            id: 5,
            name: "peak ratio central band in [55%, 80%] with median < 1",
            pass: (0.55..=0.80).contains(&r.central_fraction) && r.median_ratio < 1.0,
            detail: format!(
                "central = {:.1}%, median = {:.4}, {} double-peaked records",
                100.0 * r.central_fraction,
                r.median_ratio,
                r.count
            ),
        },
        Err(e) => Outcome {
            id: 5,
            name: "peak ratio central band in [55%, 80%] with median < 1",
            pass: false,
            detail: e.to_string(),
        },
    }
}

fn criterion_6() -> Outcome {
    let mut worst = 0.0f64;
    for gamma in [1e-4, 0.036 * PI, 1.0] {
        for peak in [0.01, 0.1, 1.0] {
            let cases = [
                (SpectralDensity::drude_lorentz_peaked_at(gamma, peak), gamma / PI),
                (
                    NoiseModel::power_law(300.0, peak, 1)
                        .environment(gamma)
                        .unwrap()
                        .unwrap()
                        .density,
                    gamma / (2.0 * PI.sqrt()),
                ),
                (
                    NoiseModel::power_law(300.0, peak, 3)
                        .environment(gamma)
                        .unwrap()
                        .unwrap()
                        .density,
                    gamma / (4.0 * PI.sqrt()),
                ),
            ];
            for (sd, expected) in cases {
                let closed = reorganisation_energy(&sd).expect("closed form");
                let numeric = reorganisation_energy_numeric(&sd).expect("quadrature");
                worst = worst
                    .max(((closed - expected) / expected).abs())
                    .max(((numeric - expected) / expected).abs());
            }
        }
    }
    let gamma_max = drude_lorentz_gamma_for_reorganisation(0.036);
    let inversion = (gamma_max - 0.036 * PI).abs();
    let back = reorganisation_energy(&SpectralDensity::drude_lorentz_peaked_at(gamma_max, 0.1)).unwrap();
    let round_trip = (back - 0.036).abs();
    Outcome {
        id: 6,
        name: "reorganisation energies and cutoff inversion",
        pass: worst <= 1e-8 && inversion <= 1e-12 && round_trip <= 1e-12,
        detail: format!(
            "max rel error {worst:.2e}, |Γ_max − 0.036π| = {inversion:.1e}, |λ(Γ_max) − 0.036| = {round_trip:.1e}"
        ),
    }
}

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn curve_csv(curve: &EfficiencyCurve) -> String {
    let mut out = String::from("gamma,eta,valid\n");
    for ((g, eta), valid) in curve.gammas.iter().zip(&curve.etas).zip(&curve.valid) {
        let eta = eta.map(|e| format!("{e:.16e}")).unwrap_or_default();
        let _ = writeln!(out, "{g:.16e},{eta},{}", u8::from(*valid));
    }
    out
}

/// Compares against a frozen curve; values may differ by a few ulps of
/// transcendental functions across platforms.
fn compare_golden(curve: &EfficiencyCurve, text: &str) -> Result<(), String> {
    let rows: Vec<&str> = text.lines().skip(1).collect();
    if rows.len() != curve.len() {
        return Err(format!("{} rows, expected {}", rows.len(), curve.len()));
    }
    let scale = curve.eta_max().unwrap_or(1.0);
    for (k, row) in rows.iter().enumerate() {
        let fields: Vec<&str> = row.split(',').collect();
        let g: f64 = fields[0].parse().map_err(|e| format!("row {k}: {e}"))?;
        if (g - curve.gammas[k]).abs() > 1e-15 * g {
            return Err(format!("row {k}: Γ {g} vs {}", curve.gammas[k]));
        }
        let frozen = if fields[1].is_empty() {
            None
        } else {
            Some(fields[1].parse::<f64>().map_err(|e| format!("row {k}: {e}"))?)
        };
        match (frozen, curve.etas[k]) {
            (None, None) => {}
            (Some(a), Some(b)) if (a - b).abs() <= 1e-9 * scale => {}
            (a, b) => return Err(format!("row {k}: golden {a:?} vs computed {b:?}")),
        }
    }
    Ok(())
}

fn criterion_7() -> Outcome {
    let net = showcase_network();
    let bless = std::env::var_os("ENAQT_BLESS").is_some();
    let mut pass = true;
    let mut counts = Vec::new();
    let mut problems = Vec::new();
    for model in default_environments() {
        let curve = sweep_efficiency(&net, &model, &SweepConfig::default(), &TransportConfig::default())
            .expect("showcase sweep");
        let peaks = find_peaks(&curve).count;
        pass &= peaks >= 2;
        counts.push(format!("{}:{}", model.label(), peaks));
        let path = golden_dir().join(format!("showcase__{}.csv", model.label()));
        if bless {
            std::fs::create_dir_all(golden_dir()).expect("golden dir");
            std::fs::write(&path, curve_csv(&curve)).expect("write golden");
        } else {
            match std::fs::read_to_string(&path) {
                Ok(text) => {
                    if let Err(e) = compare_golden(&curve, &text) {
                        pass = false;
                        problems.push(format!("{}: {e}", model.label()));
                    }
                }
                Err(e) => {
                    pass = false;
                    problems.push(format!("{}: {e}", path.display()));
                }
            }
        }
    }
    let mut detail = format!("peaks {}", counts.join(" "));
    if bless {
        detail.push_str("; goldens rewritten");
    }
    if !problems.is_empty() {
        let _ = write!(detail, "; golden mismatches: {}", problems.join("; "));
    }
    Outcome {
        id: 7,
        name: "tabulated network double-peaked in every environment, goldens match",
        pass,
        detail,
    }
}

fn brute_force_maxima(v: &[f64]) -> Vec<usize> {
    let mut out = Vec::new();
    for i in 1..v.len().saturating_sub(1) {
        if v[i - 1] >= v[i] {
            continue;
        }
        let mut j = i;
        while j + 1 < v.len() && v[j + 1] == v[i] {
            j += 1;
        }
        if j + 1 < v.len() && v[j + 1] < v[i] {
            out.push(i);
        }
    }
    out
}

fn site(position: [f64; 3], moment: [f64; 3]) -> DipoleSite {
    DipoleSite {
        position: Vector3::from(position),
        moment: Vector3::from(moment),
        energy: 1.5,
        role: SiteRole::Bulk,
    }
}

fn criterion_8() -> Outcome {
    let mut failures = Vec::new();

    // generator trace preservation and steady-state residuals
    let mut worst_trace = 0.0f64;
    let mut worst_residual = 0.0f64;
    let models = [
        NoiseModel::Lindblad,
        NoiseModel::flat_infinite(),
        NoiseModel::drude_lorentz(30.0, 0.1),
        NoiseModel::drude_lorentz(300.0, 1.0),
        NoiseModel::power_law(300.0, 0.1, 1),
        NoiseModel::power_law(180.0, 0.1, 3),
    ];
    let grid = gamma_grid(&SweepConfig {
        points: 6,
        ..Default::default()
    })
    .unwrap();
    for seed in 0..5 {
        let net = generate_network(&NetworkConfig::default(), 2_000 + seed).unwrap();
        let sys = open_system(&net, &TransportConfig::default()).unwrap();
        for model in &models {
            for &g in &grid {
                let l = match model.environment(g).unwrap() {
                    None => build_lindblad(&sys, g).unwrap(),
                    Some(env) => build_redfield(&sys, &env).unwrap(),
                };
                worst_trace = worst_trace.max(l.trace_defect() / l.norm());
                if let Ok(ss) = solve_steady_state(&l) {
                    if !ss.degenerate() {
                        worst_residual = worst_residual.max(ss.residual / l.norm());
                    }
                }
            }
        }
    }
    if worst_trace > 1e-10 {
        failures.push(format!("trace defect {worst_trace:.1e}"));
    }
    if worst_residual > 1e-10 {
        failures.push(format!("residual {worst_residual:.1e}"));
    }

    // validity screen tolerances
    let diag = |values: &[f64]| {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            values.len(),
            values.iter().map(|&x| Complex64::new(x, 0.0)),
        ));
        validate_state(&DensityMatrix::new(m).unwrap())
    };
    let screens = [
        (diag(&[1.0 + 0.9e-5, -0.9e-5]).populations_ok, true),
        (diag(&[1.0 + 1.1e-5, -1.1e-5]).populations_ok, false),
        (diag(&[0.5, 0.5 + 0.9e-5]).trace_ok, true),
        (diag(&[0.5, 0.5 + 1.1e-5]).trace_ok, false),
        (diag(&[1.0 + 0.9e-4, 0.0, -0.9e-4 + 1e-12]).eigenvalues_ok, true),
        (diag(&[1.0 + 1.1e-4, 0.0, -1.1e-4]).eigenvalues_ok, false),
    ];
    if screens.iter().any(|(got, want)| got != want) {
        failures.push("validity screen tolerance".into());
    }

    // exhaustive peak oracle over step patterns
    let mut checked = 0usize;
    for n in 1..=12usize {
        let patterns = 3usize.pow(n.saturating_sub(1) as u32);
        for code in 0..patterns {
            let mut v = vec![0.0; n];
            let mut c = code;
            for i in 1..n {
                v[i] = v[i - 1] + (c % 3) as f64 - 1.0;
                c /= 3;
            }
            if local_maxima(&v) != brute_force_maxima(&v) {
                failures.push(format!("peak oracle mismatch on {v:?}"));
                break;
            }
            checked += 1;
        }
    }

    // detailed balance S(ω)/S(−ω) = exp(ω/k_BT)
    let mut worst_balance = 0.0f64;
    for kelvin in [30.0, 180.0, 300.0] {
        let env = Environment {
            density: SpectralDensity::drude_lorentz_peaked_at(0.05, 0.1),
            temperature: Temperature::Finite(kelvin),
        };
        for omega in [1e-3, 5e-3, 0.02, 0.05] {
            let ratio = noise_power(&env, omega).unwrap() / noise_power(&env, -omega).unwrap();
            let expected = (omega / (BOLTZMANN * kelvin)).exp();
            worst_balance = worst_balance.max((ratio / expected - 1.0).abs());
        }
    }
    if worst_balance > 1e-10 {
        failures.push(format!("detailed balance {worst_balance:.1e}"));
    }

    // dipole coupling: r⁻³ distance scaling and bilinearity in the moments
    let mut worst_scaling = 0.0f64;
    let a = site([0.1, -0.3, 0.2], [0.05, 0.08, -0.02]);
    let b = site([1.4, 0.9, -1.1], [-0.07, 0.03, 0.06]);
    let base = dipole_coupling(&a, &b).unwrap();
    for s in [0.5, 2.0, 3.7] {
        let mut bs = b.clone();
        bs.position = a.position + (b.position - a.position) * s;
        let scaled = dipole_coupling(&a, &bs).unwrap();
        worst_scaling = worst_scaling.max((scaled * s.powi(3) / base - 1.0).abs());
        let mut bm = b.clone();
        bm.moment *= s;
        let stretched = dipole_coupling(&a, &bm).unwrap();
        worst_scaling = worst_scaling.max((stretched / (s * base) - 1.0).abs());
    }
    if worst_scaling > 1e-12 {
        failures.push(format!("dipole scaling {worst_scaling:.1e}"));
    }

    Outcome {
        id: 8,
        name: "property suites",
        pass: failures.is_empty(),
        detail: format!(
            "trace {worst_trace:.1e}, residual {worst_residual:.1e}, balance {worst_balance:.1e}, scaling {worst_scaling:.1e}, {checked} peak patterns{}",
            if failures.is_empty() { String::new() } else { format!("; failed: {}", failures.join(", ")) }
        ),
    }
}

fn criterion_9() -> Outcome {
    let models = [
        NoiseModel::power_law(300.0, 0.1, 1),
        NoiseModel::power_law(300.0, 0.1, 3),
    ];
    let mut found = None;
    for seed in 0..200u64 {
        let net = generate_network(&uniform_config(), seed).expect("network");
        let all = models.iter().all(|m| {
            let curve = sweep_efficiency(&net, m, &SweepConfig::default(), &TransportConfig::default()).unwrap();
            find_peaks(&curve).count >= 2
        });
        if all {
            found = Some(seed);
            break;
        }
    }
    Outcome {
        id: 9,
        name: "a uniform-energy network double-peaked under Ohmic and superohmic baths",
        pass: found.is_some(),
        detail: match found {
            Some(seed) => format!("first such network: seed {seed}"),
            None => "none among seeds 0..200".into(),
        },
    }
}

fn report(o: &Outcome, elapsed: f64) {
    let tag = if o.pass {
        "PASS"
    } else if KNOWN_SHORTFALLS.contains(&o.id) {
        "FAIL (known shortfall)"
    } else {
        "FAIL"
    };
    println!("[{tag}] criterion {}: {} | {} | {elapsed:.1}s", o.id, o.name, o.detail);
}

fn main() -> ExitCode {
    // libtest-style flags are accepted and ignored so `cargo test` filters do not break the run
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let mut outcomes = Vec::new();
    let mut run = |f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let o = f();
        report(&o, t.elapsed().as_secs_f64());
        outcomes.push(o);
    };

    run(&mut criterion_1);
    run(&mut criterion_2);
    let t = Instant::now();
    let main_spec = EnsembleSpec::default();
    let main = run_ensemble(&main_spec).expect("main ensemble");
    println!(
        "       main ensemble: {} networks x {} environments in {:.1}s",
        main_spec.n_networks,
        main_spec.environments.len(),
        t.elapsed().as_secs_f64()
    );
    run(&mut || criterion_3(&main));
    run(&mut || criterion_4(&main));
    run(&mut || criterion_5(&main));
    run(&mut criterion_6);
    run(&mut criterion_7);
    run(&mut criterion_8);
    run(&mut criterion_9);

    let passed = outcomes.iter().filter(|o| o.pass).count();
    let blocking: Vec<u32> = outcomes
        .iter()
        .filter(|o| !o.pass && !KNOWN_SHORTFALLS.contains(&o.id))
        .map(|o| o.id)
        .collect();
    println!("acceptance: {passed}/{} criteria pass", outcomes.len());
    if blocking.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected failures: {blocking:?}");
        ExitCode::FAILURE
    }
}
