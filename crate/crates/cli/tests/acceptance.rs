//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Pass criterion numbers as arguments to run a subset.

use std::f64::consts::LN_2;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use scramble_cli::config::parse_config;
use scramble_cli::runner::{execute, witness_violation, RunOptions};
use scramble_core::dynamics::{
    build_liouvillian, propagate, rk4_oracle, uniform_grid, ChannelKind, DecoherenceChannel, PropagationMethod,
};
use scramble_core::models::{build_hamiltonian, initial_state, split_seed, InitialState, ModelKind, ModelSpec};
use scramble_core::observables::{entropy_components, QuantifierSeries};
use scramble_core::qcore::linalg::{max_abs_diff, trace_product};
use scramble_core::thermolab::{
    average_entropy_production, entropy_ledger, evolve_universe, generate_universe, integral_ft,
    maximal_scrambling_identity, partition_witness, ttm_distribution, CouplingPreset, SystemState, UniverseSpec,
};
use scramble_core::{CMatrix, DensityMatrix, HermitianOperator, Partition, C64};

type Check = Result<String, String>;

const SEED: u64 = 0x5eed_2024;

fn default_state(kind: ModelKind) -> InitialState {
    match kind {
        ModelKind::Xxx | ModelKind::Lmg => InitialState::Neel,
        _ => InitialState::AllUp,
    }
}

fn spec(kind: ModelKind, n: usize, index: u64) -> ModelSpec {
    ModelSpec::with_defaults(kind, n, split_seed(SEED, index)).expect("valid model")
}

fn spectral_range(h: &HermitianOperator) -> f64 {
    let (e, _) = scramble_core::qcore::eigh(h).expect("eigh");
    e.last().unwrap() - e.first().unwrap()
}

fn verdict(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn fail<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

// 1
fn propagator_matches_rk4() -> Check {
    let times = uniform_grid(5.0, 11).map_err(fail)?;
    let mut worst = 0.0_f64;
    let mut cases = 0;
    for (m, kind) in ModelKind::ALL.into_iter().enumerate() {
        let s = spec(kind, 6, m as u64);
        let h = build_hamiltonian(&s).map_err(fail)?;
        let rho0 = initial_state(default_state(kind), 6).map_err(fail)?;
        let range = spectral_range(&h);
        for channel in [ChannelKind::Computational, ChannelKind::Energy] {
            for gamma in [0.0, 0.1, 1.0] {
                let ch = DecoherenceChannel::new(&h, channel, gamma).map_err(fail)?;
                let l = build_liouvillian(&h, &ch).map_err(fail)?;
                let exact = propagate(&rho0, &l, &times).map_err(fail)?;
                let dt = 0.25 / (range + gamma).max(1.0);
                let oracle = rk4_oracle(&rho0, &h, &ch, dt, &times).map_err(|e| format!("{kind}/{channel}/{gamma}: {e}"))?;
                for (a, b) in exact.states.iter().zip(&oracle.states) {
                    worst = worst.max(max_abs_diff(a.matrix(), b.matrix()));
                }
                cases += 1;
            }
        }
    }
    verdict(worst < 1e-6, format!("{cases} cases, max |propagate - rk4| = {worst:.2e} (< 1e-6)"))
}

// 2
fn unitary_identity() -> Check {
    let times = uniform_grid(10.0, 51).map_err(fail)?;
    let part = Partition::first_qubit(6).map_err(fail)?;
    let mut worst = 0.0_f64;
    for (m, kind) in ModelKind::ALL.into_iter().enumerate() {
        let h = build_hamiltonian(&spec(kind, 6, m as u64)).map_err(fail)?;
        let rho0 = initial_state(default_state(kind), 6).map_err(fail)?;
        for channel in [ChannelKind::Computational, ChannelKind::Energy] {
            let ch = DecoherenceChannel::new(&h, channel, 0.0).map_err(fail)?;
            let traj = propagate(&rho0, &build_liouvillian(&h, &ch).map_err(fail)?, &times).map_err(fail)?;
            let (a0, b0, ab0) = entropy_components(&rho0, &part).map_err(fail)?;
            for rho in &traj.states {
                let (a, b, ab) = entropy_components(rho, &part).map_err(fail)?;
                let delta_i = (a + b - ab) - (a0 + b0 - ab0);
                worst = worst.max((delta_i - ((a - a0) + (b - b0))).abs());
            }
        }
    }
    verdict(worst < 1e-9, format!("5 models x 2 channels, max |dI - (dS_A + dS_B)| = {worst:.2e} (< 1e-9)"))
}

// 3
fn closed_form_dephasing() -> Check {
    let delta = 1.3;
    let gamma = 0.4;
    let h = HermitianOperator::new(CMatrix::from_shape_vec(
        (2, 2),
        vec![C64::new(delta / 2.0, 0.0), C64::default(), C64::default(), C64::new(-delta / 2.0, 0.0)],
    )
    .unwrap())
    .map_err(fail)?;
    let rho0 = DensityMatrix::new(
        CMatrix::from_shape_vec(
            (2, 2),
            vec![C64::new(0.7, 0.0), C64::new(0.2, -0.3), C64::new(0.2, 0.3), C64::new(0.3, 0.0)],
        )
        .unwrap(),
    )
    .map_err(fail)?;
    let ch = DecoherenceChannel::new(&h, ChannelKind::Computational, gamma).map_err(fail)?;
    let times = uniform_grid(10.0, 101).map_err(fail)?;
    let mut worst = 0.0_f64;
    for method in [PropagationMethod::Diagonal, PropagationMethod::Dense, PropagationMethod::Taylor] {
        let l = build_liouvillian(&h, &ch).map_err(fail)?.with_method(method).map_err(fail)?;
        let traj = propagate(&rho0, &l, &times).map_err(fail)?;
        for (rho, &t) in traj.states.iter().zip(&times) {
            let expected = rho0.matrix()[[0, 1]] * C64::new(-gamma * t, -delta * t).exp();
            let m = rho.matrix();
            worst = worst
                .max((m[[0, 1]] - expected).norm())
                .max((m[[0, 0]] - rho0.matrix()[[0, 0]]).norm());
        }
    }
    verdict(worst < 1e-10, format!("3 propagation methods, max |rho_01 - closed form| = {worst:.2e} (< 1e-10)"))
}

// 4
fn energy_channel_conserves_energy() -> Check {
    let times = uniform_grid(20.0, 41).map_err(fail)?;
    let rho0 = initial_state(InitialState::AllUp, 6).map_err(fail)?;
    let mut worst = 0.0_f64;
    for r in 0..5 {
        let h = build_hamiltonian(&spec(ModelKind::Syk, 6, 100 + r)).map_err(fail)?;
        let e0 = trace_product(rho0.matrix(), h.matrix()).re;
        for gamma in [0.1, 1.0] {
            let ch = DecoherenceChannel::new(&h, ChannelKind::Energy, gamma).map_err(fail)?;
            let traj = propagate(&rho0, &build_liouvillian(&h, &ch).map_err(fail)?, &times).map_err(fail)?;
            for rho in &traj.states {
                worst = worst.max((trace_product(rho.matrix(), h.matrix()).re - e0).abs());
            }
        }
    }
    verdict(worst < 1e-8, format!("5 SYK samples x 2 rates, max |<H>(t) - <H>(0)| = {worst:.2e} (< 1e-8)"))
}

// 5
fn unitality() -> Check {
    let times = uniform_grid(5.0, 11).map_err(fail)?;
    let mixed = DensityMatrix::maximally_mixed(64);
    let mut worst = 0.0_f64;
    for (m, kind) in ModelKind::ALL.into_iter().enumerate() {
        let h = build_hamiltonian(&spec(kind, 6, m as u64)).map_err(fail)?;
        for channel in [ChannelKind::Computational, ChannelKind::Energy] {
            for gamma in [0.0, 0.1, 1.0] {
                let ch = DecoherenceChannel::new(&h, channel, gamma).map_err(fail)?;
                let traj = propagate(&mixed, &build_liouvillian(&h, &ch).map_err(fail)?, &times).map_err(fail)?;
                for rho in &traj.states {
                    worst = worst.max(max_abs_diff(rho.matrix(), mixed.matrix()));
                }
            }
        }
    }
    verdict(worst < 1e-10, format!("30 generators, max |rho(t) - I/N| = {worst:.2e} (< 1e-10)"))
}

struct Universe {
    label: String,
    spec: UniverseSpec,
    gibbs: bool,
}

/// Gibbs universes over both presets, three temperatures and four register
/// sizes, plus eigenstate universes for the identities that do not need full
/// support.
fn universe_suite() -> Result<Vec<Universe>, String> {
    let kinds = [ModelKind::Syk, ModelKind::Xxx, ModelKind::Mfi, ModelKind::Lmg];
    let sizes = [(2, 2), (3, 2), (2, 3), (4, 4)];
    let mut out = Vec::new();
    let mut index = 0u64;
    for preset in [CouplingPreset::Dephasing, CouplingPreset::Dissipative] {
        for beta in [0.5, 1.0, 2.0] {
            for &(n_s, n_e) in &sizes {
                let kind = kinds[index as usize % kinds.len()];
                let lambda = if index % 2 == 0 { 0.1 } else { 0.5 };
                let h_s = build_hamiltonian(&spec(kind, n_s, 1000 + index)).map_err(fail)?;
                let u = generate_universe(h_s, n_e, preset, lambda, beta, SystemState::Gibbs, split_seed(SEED, 2000 + index))
                    .map_err(fail)?;
                out.push(Universe {
                    label: format!("{kind} N_S={n_s} N_E={n_e} {preset} beta={beta} lambda={lambda}"),
                    spec: u,
                    gibbs: true,
                });
                index += 1;
            }
        }
    }
    for (k, &(n_s, n_e)) in sizes.iter().enumerate() {
        let preset = if k % 2 == 0 { CouplingPreset::Dissipative } else { CouplingPreset::Dephasing };
        let h_s = build_hamiltonian(&spec(kinds[k], n_s, 3000 + k as u64)).map_err(fail)?;
        let u = generate_universe(h_s, n_e, preset, 0.5, 1.0, SystemState::Eigenstate(1), split_seed(SEED, 4000 + k as u64))
            .map_err(fail)?;
        out.push(Universe {
            label: format!("{} N_S={n_s} N_E={n_e} {preset} eigenstate", kinds[k]),
            spec: u,
            gibbs: false,
        });
    }
    Ok(out)
}

struct ThermoSummary {
    gibbs_universes: usize,
    ft: f64,
    ft_where: String,
    identity: f64,
    identity_universes: usize,
    ledger: f64,
    ledger_runs: usize,
    scrambling_residual: f64,
    scrambling_gap: f64,
    witness: f64,
    witness_pairs: usize,
}

fn thermo_suite() -> Result<ThermoSummary, String> {
    let universes = universe_suite()?;
    let times = uniform_grid(5.0, 6).map_err(fail)?;
    let mut s = ThermoSummary {
        gibbs_universes: 0,
        ft: 0.0,
        ft_where: String::new(),
        identity: 0.0,
        identity_universes: 0,
        ledger: 0.0,
        ledger_runs: 0,
        scrambling_residual: 0.0,
        scrambling_gap: f64::INFINITY,
        witness: 0.0,
        witness_pairs: 0,
    };
    for u in &universes {
        let ctx = |e: scramble_core::Error| format!("{}: {e}", u.label);
        let traj = evolve_universe(&u.spec, &times).map_err(ctx)?;
        for (&t, rho_t) in times.iter().zip(&traj.states).skip(1) {
            let d = ttm_distribution(&u.spec, t).map_err(ctx)?;
            if u.gibbs {
                let ft = integral_ft(&d).map_err(ctx)?;
                if ft.deviation > s.ft {
                    s.ft = ft.deviation;
                    s.ft_where = format!("{} t={t}", u.label);
                }
            }
            let (lhs, rhs) = average_entropy_production(&d, rho_t, &u.spec).map_err(ctx)?;
            s.identity = s.identity.max((lhs - rhs).abs());
        }
        s.gibbs_universes += usize::from(u.gibbs);
        s.identity_universes += 1;

        let part = Partition::first_qubit(u.spec.n_s()).map_err(fail)?;
        let ledger = entropy_ledger(&traj, &u.spec, &part).map_err(ctx)?;
        s.ledger = s.ledger.max(ledger.max_residual());
        s.ledger_runs += 1;
        for row in &ledger.rows {
            let ms = maximal_scrambling_identity(row, u.spec.n_s());
            if ms.gap < s.scrambling_gap {
                s.scrambling_gap = ms.gap;
                s.scrambling_residual = ms.residual;
            }
        }

        let n_e = u.spec.n_e();
        let prefix: Vec<Vec<usize>> = (1..=n_e).map(|k| (0..k).collect()).collect();
        let suffix: Vec<Vec<usize>> = (1..=n_e).map(|k| (n_e - k..n_e).collect()).collect();
        for chain in [prefix, suffix] {
            let rows = chain
                .into_iter()
                .map(|p| partition_witness(&traj, &u.spec, &p).map(|r| (p, r)))
                .collect::<scramble_core::Result<Vec<_>>>()
                .map_err(ctx)?;
            s.witness = s.witness.max(witness_violation(&rows));
            s.witness_pairs += rows.len() * times.len();
        }
    }
    Ok(s)
}

// 10
struct EnsembleRun {
    series: Vec<(f64, QuantifierSeries)>,
}

impl EnsembleRun {
    fn gamma(&self, g: f64) -> &QuantifierSeries {
        &self.series.iter().find(|(x, _)| *x == g).expect("rate in run").1
    }
}

fn ensemble(text: &str) -> Result<EnsembleRun, String> {
    let config = parse_config(text).map_err(fail)?.config;
    let out = execute(&config, &RunOptions::default()).map_err(fail)?;
    Ok(EnsembleRun {
        series: out.gammas.into_iter().map(|g| (g.gamma, g.series)).collect(),
    })
}

/// Mean of the values in the last 20% of the window.
fn plateau(s: &QuantifierSeries, values: &[f64]) -> f64 {
    let t_end = *s.times.last().unwrap();
    let tail: Vec<f64> = s
        .times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= 0.8 * t_end)
        .map(|(_, v)| *v)
        .collect();
    tail.iter().sum::<f64>() / tail.len() as f64
}

fn peak(values: &[f64]) -> (usize, f64) {
    values
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |a, (i, v)| if v > a.1 { (i, v) } else { a })
}

fn syk_toml(channel: &str, realizations: usize) -> String {
    format!(
        "channel = \"{channel}\"\ngammas = [0.1, 1.0]\ninitial_state = \"all_up\"\npartition_a = [0]\n\
         [model]\nkind = \"SYK\"\nn_qubits = 6\n[time]\nt_end = 60.0\nn_points = 61\n\
         [ensemble]\nn_realizations = {realizations}\nmaster_seed = 11\n"
    )
}

fn figure_shapes() -> Check {
    const R: usize = 100;
    let mut notes = Vec::new();
    let mut ok = true;
    let mut note = |name: &str, pass: bool, text: String| {
        ok &= pass;
        notes.push(format!("({name}) {} {text}", if pass { "ok" } else { "FAILED" }));
    };

    let comp = ensemble(&syk_toml("computational", R))?;
    let energy = ensemble(&syk_toml("energy", R))?;
    let (lo, hi) = (comp.gamma(0.1), comp.gamma(1.0));
    let (p_lo, p_hi) = (plateau(lo, &lo.delta_i), plateau(hi, &hi.delta_i));
    let rel = (p_lo - p_hi).abs() / p_lo.abs().max(p_hi.abs());
    let rises = peak(&lo.delta_i).1 > 0.0 && peak(&hi.delta_i).1 > 0.0;
    note("a", rel <= 0.02 && rises, format!("SYK computational plateaus {p_lo:.4}/{p_hi:.4}, rel diff {rel:.3}"));

    let worst_dc = [0.1, 1.0]
        .iter()
        .flat_map(|&g| energy.gamma(g).delta_c.clone())
        .fold(f64::NEG_INFINITY, f64::max);
    note("b", worst_dc <= 1e-9, format!("SYK energy max dC = {worst_dc:.2e}"));

    let mut c_ok = true;
    let mut c_text = Vec::new();
    for g in [0.1, 1.0] {
        let (e, c) = (energy.gamma(g), comp.gamma(g));
        let (pe, pc) = (plateau(e, &e.delta_i), plateau(c, &c.delta_i));
        c_ok &= pe > pc;
        c_text.push(format!("gamma {g}: {pe:.4} > {pc:.4}"));
    }
    note("c", c_ok, format!("energy vs computational plateau, {}", c_text.join(", ")));

    let mfi = |t_end: f64, n: usize, gammas: &str| {
        ensemble(&format!(
            "channel = \"computational\"\ngammas = {gammas}\ninitial_state = \"all_up\"\n\
             [model]\nkind = \"MFI\"\nn_qubits = 6\n[time]\nt_end = {t_end}\nn_points = {n}\n\
             [ensemble]\nn_realizations = {R}\nmaster_seed = 12\n"
        ))
    };
    let slow = mfi(30.0, 61, "[0.0, 0.1]")?;
    let fast = mfi(10.0, 41, "[1.0]")?;
    let mut d_ok = true;
    let mut d_text = Vec::new();
    for s in [slow.gamma(0.1), fast.gamma(1.0)] {
        let (i, p) = peak(&s.delta_i);
        let last = *s.delta_i.last().unwrap();
        d_ok &= i > 0 && i + 1 < s.len() && p > 0.0 && last < 0.1 * p;
        d_text.push(format!("peak {p:.3} at t={}, final {last:.4}", s.times[i]));
    }
    let p0 = peak(&slow.gamma(0.0).delta_i).1;
    d_ok &= p0 < 2.0 * LN_2;
    note("d", d_ok, format!("MFI gamma 0.1/1: {}; gamma 0 peak {p0:.3} < 2 ln 2", d_text.join("; ")));

    let lmg = ensemble(
        "channel = \"computational\"\ngammas = [0.0]\ninitial_state = \"neel\"\n\
         [model]\nkind = \"LMG\"\nn_qubits = 6\n[time]\nt_end = 25.0\nn_points = 501\n\
         [ensemble]\nn_realizations = 1\n",
    )?;
    let s = lmg.gamma(0.0);
    let (i_peak, p) = peak(&s.delta_i[..s.len() / 2]);
    let recurrence = (i_peak + 1..s.len()).find(|&k| s.delta_i[k].abs() <= 0.05 * p);
    note(
        "e",
        recurrence.is_some(),
        match recurrence {
            Some(k) => format!("LMG dI back to {:.1e} (peak {p:.3}) at t={}", s.delta_i[k], s.times[k]),
            None => format!("LMG dI never returns within 5% of zero (peak {p:.3})"),
        },
    );

    let otoc_cfg = parse_config(&format!(
        "channel = \"computational\"\ngammas = [0.0]\nobservables = [\"haar_otoc\"]\n\
         [model]\nkind = \"SYK\"\nn_qubits = 6\n[time]\nt_end = 10.0\nn_points = 21\n\
         [ensemble]\nn_realizations = {R}\nmaster_seed = 13\n[otoc]\nn_samples = 8\n"
    ))
    .map_err(fail)?
    .config;
    let out = execute(&otoc_cfg, &RunOptions::default()).map_err(fail)?;
    let s = &out.gammas[0].series;
    let mean = s.delta_otoc.as_ref().unwrap();
    let se = s.stats.as_ref().unwrap().se_otoc.as_ref().unwrap();
    let nonneg = mean.iter().zip(se).all(|(m, e)| *m >= -2.0 * e - 1e-12);
    let nondecreasing = mean
        .windows(2)
        .zip(se.windows(2))
        .all(|(m, e)| m[1] >= m[0] - 2.0 * (e[0] * e[0] + e[1] * e[1]).sqrt() - 1e-12);
    note(
        "f",
        nonneg && nondecreasing,
        format!("SYK Haar dO from {:.3} to {:.3} (se <= {:.3})", mean[1], mean[mean.len() - 1], se.iter().fold(0.0_f64, |a, b| a.max(*b))),
    );
    verdict(ok, format!("{R} realizations; {}", notes.join("; ")))
}

// 11
fn determinism() -> Check {
    let tmp = tempfile::tempdir().map_err(fail)?;
    let cfg = tmp.path().join("run.toml");
    fs::write(
        &cfg,
        "channel = \"energy\"\ngammas = [0.0, 0.2]\nobservables = [\"delta_I\", \"delta_C\", \"haar_otoc\"]\n\
         [model]\nkind = \"MQ\"\nn_qubits = 4\n[time]\nt_end = 4.0\nn_points = 21\n\
         [ensemble]\nn_realizations = 5\nmaster_seed = 3\n[otoc]\nn_samples = 4\n\
         [thermolab]\nn_env = 2\nt_end = 2.0\nn_points = 3\n",
    )
    .map_err(fail)?;
    let run = |input: &Path, out: &Path| -> Result<(), String> {
        let res = Command::new(env!("CARGO_BIN_EXE_scramble"))
            .arg("run")
            .arg(input)
            .arg("--output-dir")
            .arg(out)
            .env_remove("SCRAMBLE_INJECT_FAULT")
            .output()
            .map_err(fail)?;
        if res.status.success() {
            Ok(())
        } else {
            Err(String::from_utf8_lossy(&res.stderr).into_owned())
        }
    };
    let first = tmp.path().join("first");
    let second = tmp.path().join("second");
    run(&cfg, &first)?;
    run(&first.join("manifest.json"), &second)?;
    let csvs = |dir: &Path| -> Result<Vec<(String, Vec<u8>)>, String> {
        let mut v = Vec::new();
        for e in fs::read_dir(dir).map_err(fail)? {
            let p = e.map_err(fail)?.path();
            if p.extension().is_some_and(|x| x == "csv") {
                v.push((p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).map_err(fail)?));
            }
        }
        v.sort();
        Ok(v)
    };
    let (a, b) = (csvs(&first)?, csvs(&second)?);
    verdict(
        a == b && !a.is_empty(),
        format!("{} CSV files byte-identical after rerun from manifest", a.len()),
    )
}

fn main() {
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let wanted = |n: u32| selected.is_empty() || selected.contains(&n);
    let mut failures = 0;
    let mut report = |n: u32, name: &str, start: Instant, check: Check| {
        let secs = start.elapsed().as_secs_f64();
        match check {
            Ok(detail) => println!("PASS {n:>2} {name}: {detail} [{secs:.1} s]"),
            Err(detail) => {
                failures += 1;
                println!("FAIL {n:>2} {name}: {detail} [{secs:.1} s]");
            }
        }
    };

    let simple: [(u32, &str, fn() -> Check); 5] = [
        (1, "propagator-oracle equivalence", propagator_matches_rk4),
        (2, "unitary-limit identity", unitary_identity),
        (3, "closed-form dephasing", closed_form_dephasing),
        (4, "energy-basis channel conserves energy", energy_channel_conserves_energy),
        (5, "unitality", unitality),
    ];
    for (n, name, f) in simple {
        if wanted(n) {
            let start = Instant::now();
            report(n, name, start, f());
        }
    }

    if (6..=9).any(wanted) {
        let start = Instant::now();
        match thermo_suite() {
            Ok(s) => {
                if wanted(6) {
                    report(6, "integral fluctuation theorem", start, verdict(
                        s.ft < 1e-9 && s.gibbs_universes >= 20,
                        format!("{} universes, max |<e^-w> - 1| = {:.2e} ({}) (< 1e-9)", s.gibbs_universes, s.ft, s.ft_where),
                    ));
                }
                if wanted(7) {
                    report(7, "average entropy-production identity", start, verdict(
                        s.identity < 1e-8,
                        format!("{} universes, max |<w_S>+<w_E> - (dI + dC)| = {:.2e} (< 1e-8)", s.identity_universes, s.identity),
                    ));
                }
                if wanted(8) {
                    report(8, "entropy ledger balance", start, verdict(
                        s.ledger < 1e-8,
                        format!(
                            "{} runs, max residual {:.2e} (< 1e-8); maximal-scrambling residual {:.3e} at precondition gap {:.3e}",
                            s.ledger_runs, s.ledger, s.scrambling_residual, s.scrambling_gap
                        ),
                    ));
                }
                if wanted(9) {
                    report(9, "partition-witness monotonicity", start, verdict(
                        s.witness <= 1e-9,
                        format!("{} nested subset evaluations, max I(S:P1) - I(S:P2) = {:.2e} (<= 1e-9)", s.witness_pairs, s.witness),
                    ));
                }
            }
            Err(e) => {
                for (n, name) in [(6, "integral fluctuation theorem"), (7, "average entropy-production identity"), (8, "entropy ledger balance"), (9, "partition-witness monotonicity")] {
                    if wanted(n) {
                        report(n, name, start, Err(e.clone()));
                    }
                }
            }
        }
    }

    if wanted(10) {
        let start = Instant::now();
        report(10, "qualitative figure shapes", start, figure_shapes());
    }
    if wanted(11) {
        let start = Instant::now();
        report(11, "determinism from manifest", start, determinism());
    }

    if failures > 0 {
        std::process::exit(1);
    }
}
