//! Execution of a resolved experiment over the (realization, gamma) grid.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use scramble_core::dynamics::{build_liouvillian, propagate, uniform_grid, DecoherenceChannel, Liouvillian, Trajectory};
use scramble_core::models::{build_hamiltonian, split_seed, DisorderEnsemble, ModelSpec};
use scramble_core::observables::{
    ensemble_average, entropy_components, haar_delta_otoc, quantifier_series, QuantifierSeries,
};
use scramble_core::qcore::linalg::{hermiticity_defect, identity, max_abs, trace};
use scramble_core::thermolab::{
    average_entropy_production, entropy_ledger, evolve_universe, generate_universe, integral_ft,
    maximal_scrambling_identity, partition_witness, ttm_distribution, EntropyLedger, MaximalScrambling, WitnessRow,
};
use scramble_core::{CMatrix, DensityMatrix, Error, C64};

use crate::config::{ExperimentConfig, Observable, OtocReference};
use crate::error::{CliError, CliResult};
use crate::manifest::Residuals;

pub const WORKERS_ENV: &str = "SCRAMBLE_WORKERS";
/// Test hook: a generator corruption strength applied to every cell.
pub const FAULT_ENV: &str = "SCRAMBLE_INJECT_FAULT";

/// Number of realization-0 states kept per gamma for `verify`.
pub const STORED_STATES: usize = 6;

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub workers: Option<usize>,
    pub fault: Option<f64>,
}

impl RunOptions {
    pub fn from_env() -> CliResult<Self> {
        let workers = match std::env::var(WORKERS_ENV) {
            Ok(v) => Some(
                v.parse::<usize>()
                    .ok()
                    .filter(|&n| n > 0)
                    .ok_or_else(|| CliError::Config(format!("{WORKERS_ENV} must be a positive integer, got '{v}'")))?,
            ),
            Err(_) => None,
        };
        let fault = match std::env::var(FAULT_ENV) {
            Ok(v) => Some(
                v.parse::<f64>()
                    .map_err(|_| CliError::Config(format!("{FAULT_ENV} must be a number, got '{v}'")))?,
            ),
            Err(_) => None,
        };
        Ok(Self { workers, fault })
    }
}

/// A density matrix stored as row-major `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StoredState {
    pub t: f64,
    pub dim: usize,
    pub entries: Vec<[f64; 2]>,
    pub delta_i: f64,
    pub delta_c: f64,
}

impl StoredState {
    pub fn from_matrix(t: f64, m: &CMatrix, delta_i: f64, delta_c: f64) -> Self {
        Self {
            t,
            dim: m.nrows(),
            entries: m.iter().map(|z| [z.re, z.im]).collect(),
            delta_i,
            delta_c,
        }
    }

    pub fn matrix(&self) -> CliResult<CMatrix> {
        CMatrix::from_shape_vec(
            (self.dim, self.dim),
            self.entries.iter().map(|&[re, im]| C64::new(re, im)).collect(),
        )
        .map_err(|e| CliError::Input(format!("stored state at t = {}: {e}", self.t)))
    }
}

/// Realization-0 snapshots of one gamma, enough to re-check invariants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StoredStates {
    pub gamma: f64,
    pub realization_seed: u64,
    pub states: Vec<StoredState>,
}

#[derive(Clone, Debug)]
pub struct GammaResult {
    pub gamma: f64,
    pub series: QuantifierSeries,
    pub stored: StoredStates,
}

#[derive(Clone, Debug)]
pub struct TtmRow {
    pub t: f64,
    pub ft_value: f64,
    pub ft_deviation: f64,
    pub excluded_mass: f64,
    pub mean_omega_s: f64,
    pub mean_omega_e: f64,
    pub identity_lhs: f64,
    pub identity_rhs: f64,
}

#[derive(Clone, Debug)]
pub struct ThermolabResult {
    pub seed: u64,
    pub ledger: EntropyLedger,
    pub scrambling: Vec<MaximalScrambling>,
    pub ttm: Vec<TtmRow>,
    /// `(environment subset, rows)` for a nested chain of subsets.
    pub witness: Vec<(Vec<usize>, Vec<WitnessRow>)>,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub realization_seeds: Vec<u64>,
    pub gammas: Vec<GammaResult>,
    pub thermolab: Option<ThermolabResult>,
    pub residuals: Residuals,
    pub workers: usize,
    pub wall_clock_seconds: f64,
}

struct CellResult {
    series: QuantifierSeries,
    stored: Option<StoredStates>,
    trace: f64,
    hermiticity: f64,
    unitality: f64,
    unitary_identity: Option<f64>,
    otoc_imag: Option<f64>,
}

fn invariant(context: &str, e: Error) -> CliError {
    match e {
        Error::InvariantViolation { .. }
        | Error::NegativeEigenvalue { .. }
        | Error::TraceNotOne { .. }
        | Error::NotHermitian { .. }
        | Error::Convergence { .. }
        | Error::UndefinedEntropyFlow { .. } => CliError::Invariant(format!("{context}: {e}")),
        other => CliError::Input(format!("{context}: {other}")),
    }
}

/// Generator and initial state of one realization at one rate.
pub fn cell_setup(
    config: &ExperimentConfig,
    spec: &ModelSpec,
    gamma: f64,
    fault: Option<f64>,
) -> scramble_core::Result<(Liouvillian, DensityMatrix)> {
    let h = build_hamiltonian(spec)?;
    let ch = DecoherenceChannel::new(&h, config.channel, gamma)?;
    let mut l = build_liouvillian(&h, &ch)?;
    if let Some(kappa) = fault {
        l = l.inject_fault(kappa);
    }
    let dim = h.dim();
    let rho0 = DensityMatrix::basis_state(dim, config.initial_state.basis_index(spec.n_qubits))?;
    Ok((l, rho0))
}

/// Indices of the snapshots kept for `verify`: evenly spaced, both ends included.
pub fn stored_indices(n_points: usize) -> Vec<usize> {
    let k = STORED_STATES.min(n_points);
    let mut idx: Vec<usize> = (0..k).map(|j| j * (n_points - 1) / (k - 1).max(1)).collect();
    idx.dedup();
    idx
}

fn run_cell(
    config: &ExperimentConfig,
    spec: &ModelSpec,
    gamma_index: usize,
    times: &[f64],
    keep_states: bool,
    fault: Option<f64>,
) -> scramble_core::Result<CellResult> {
    let gamma = config.gammas[gamma_index];
    let part = scramble_core::Partition::new(spec.n_qubits, config.partition_a.iter().copied())?;
    let (l, rho0) = cell_setup(config, spec, gamma, fault)?;
    let traj: Trajectory = propagate(&rho0, &l, times)?;
    let mut series = quantifier_series(&traj, &part, l.basis())?;

    let mut trace_res = 0.0_f64;
    let mut herm = 0.0_f64;
    for s in &traj.states {
        trace_res = trace_res.max((trace(s.matrix()) - 1.0).norm());
        herm = herm.max(hermiticity_defect(s.matrix()));
    }
    let n = rho0.dim();
    let unitality = max_abs(&l.apply(&identity(n).mapv(|z| z / n as f64)));

    let unitary_identity = if gamma == 0.0 {
        let (a0, b0, _) = entropy_components(traj.initial(), &part)?;
        let mut worst = 0.0_f64;
        for (state, di) in traj.states.iter().zip(&series.delta_i) {
            let (a, b, _) = entropy_components(state, &part)?;
            worst = worst.max((di - ((a - a0) + (b - b0))).abs());
        }
        Some(worst)
    } else {
        None
    };

    let otoc_imag = if config.wants(Observable::HaarOtoc) {
        let rho_ref = match config.otoc.reference {
            OtocReference::Initial => rho0.clone(),
            OtocReference::MaximallyMixed => DensityMatrix::maximally_mixed(n),
        };
        let seed = split_seed(spec.seed, gamma_index as u64);
        let haar = haar_delta_otoc(&rho_ref, &part, &l, times, config.otoc.n_samples, seed)?;
        let imag = haar.mean_imag.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        series = series.with_otoc(haar.mean)?;
        Some(imag)
    } else {
        None
    };

    let stored = keep_states.then(|| StoredStates {
        gamma,
        realization_seed: spec.seed,
        states: stored_indices(times.len())
            .into_iter()
            .map(|k| StoredState::from_matrix(times[k], traj.states[k].matrix(), series.delta_i[k], series.delta_c[k]))
            .collect(),
    });
    Ok(CellResult {
        series,
        stored,
        trace: trace_res,
        hermiticity: herm,
        unitality,
        unitary_identity,
        otoc_imag,
    })
}

fn max_opt(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.max(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

/// Run every cell of the experiment. Cells are independent and merged in
/// (gamma, realization) order, so the output does not depend on the worker count.
pub fn execute(config: &ExperimentConfig, opts: &RunOptions) -> CliResult<RunOutput> {
    config.validate()?;
    let start = Instant::now();
    let times = uniform_grid(config.time.t_end, config.time.n_points).map_err(|e| CliError::Config(e.to_string()))?;
    let base = config.model_spec(0)?;
    let ensemble = DisorderEnsemble::new(base, config.ensemble.n_realizations, config.ensemble.master_seed);
    let specs: Vec<ModelSpec> = ensemble.realizations().collect();
    let n_gamma = config.gammas.len();
    let cells: Vec<(usize, usize)> = (0..n_gamma)
        .flat_map(|g| (0..specs.len()).map(move |r| (g, r)))
        .collect();

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = opts.workers {
        builder = builder.num_threads(w);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Input(format!("cannot start worker pool: {e}")))?;
    let workers = pool.current_num_threads();

    let results: Vec<CliResult<CellResult>> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(g, r)| {
                run_cell(config, &specs[r], g, &times, r == 0, opts.fault).map_err(|e| {
                    invariant(&format!("realization {r} (seed {}), gamma {}", specs[r].seed, config.gammas[g]), e)
                })
            })
            .collect()
    });

    let mut residuals = Residuals::default();
    let mut per_gamma: Vec<Vec<CellResult>> = (0..n_gamma).map(|_| Vec::new()).collect();
    for ((g, _), res) in cells.iter().zip(results) {
        let cell = res?;
        residuals.trace = residuals.trace.max(cell.trace);
        residuals.hermiticity = residuals.hermiticity.max(cell.hermiticity);
        residuals.unitality = residuals.unitality.max(cell.unitality);
        residuals.unitary_identity = max_opt(residuals.unitary_identity, cell.unitary_identity);
        residuals.otoc_imag = max_opt(residuals.otoc_imag, cell.otoc_imag);
        per_gamma[*g].push(cell);
    }

    let mut gammas = Vec::with_capacity(n_gamma);
    for (g, cells) in per_gamma.into_iter().enumerate() {
        let series: Vec<QuantifierSeries> = cells.iter().map(|c| c.series.clone()).collect();
        let mean = ensemble_average(&series, Some(config.ensemble.master_seed))
            .map_err(|e| CliError::Input(e.to_string()))?;
        let stored = cells
            .into_iter()
            .find_map(|c| c.stored)
            .expect("realization 0 keeps its states");
        gammas.push(GammaResult {
            gamma: config.gammas[g],
            series: mean,
            stored,
        });
    }

    let thermolab = match &config.thermolab {
        Some(_) => Some(pool.install(|| run_thermolab(config, &specs[0]))?),
        None => None,
    };
    if let Some(lab) = &thermolab {
        residuals.ledger = Some(lab.ledger.rows.iter().map(|r| r.residual.abs()).fold(0.0, f64::max));
        residuals.ledger_joint = Some(lab.ledger.rows.iter().map(|r| r.residual_joint.abs()).fold(0.0, f64::max));
        residuals.fluctuation_theorem = Some(lab.ttm.iter().map(|r| r.ft_deviation).fold(0.0, f64::max));
        residuals.average_identity = Some(
            lab.ttm
                .iter()
                .map(|r| (r.identity_lhs - r.identity_rhs).abs())
                .fold(0.0, f64::max),
        );
        residuals.witness_violation = Some(witness_violation(&lab.witness));
        residuals.maximal_scrambling_gap = lab.scrambling.last().map(|m| m.gap);
    }

    Ok(RunOutput {
        realization_seeds: specs.iter().map(|s| s.seed).collect(),
        gammas,
        thermolab,
        residuals,
        workers,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Largest `I(S:P1) - I(S:P2)` over consecutive members of a nested chain,
/// clipped at zero.
pub fn witness_violation(chain: &[(Vec<usize>, Vec<WitnessRow>)]) -> f64 {
    let mut worst = 0.0_f64;
    for pair in chain.windows(2) {
        for (small, big) in pair[0].1.iter().zip(&pair[1].1) {
            worst = worst.max(small.mutual_partial - big.mutual_partial);
        }
    }
    for (_, rows) in chain {
        for r in rows {
            worst = worst.max(r.mutual_partial - r.mutual_full);
        }
    }
    worst
}

/// Seed of the thermolab universe, derived from the master seed on a stream
/// disjoint from the realization seeds.
pub fn thermolab_seed(config: &ExperimentConfig) -> u64 {
    split_seed(config.ensemble.master_seed ^ 0x7468_6572_6d6f_6c61, 0)
}

fn run_thermolab(config: &ExperimentConfig, spec: &ModelSpec) -> CliResult<ThermolabResult> {
    let lab = config.thermolab.as_ref().expect("caller checked");
    let ctx = |e: Error| invariant("thermolab", e);
    let seed = thermolab_seed(config);
    let h_s = build_hamiltonian(spec).map_err(ctx)?;
    let u = generate_universe(h_s, lab.n_env, lab.coupling, lab.lambda, lab.beta, lab.system_state, seed).map_err(ctx)?;
    let times = uniform_grid(lab.t_end, lab.n_points).map_err(|e| CliError::Config(e.to_string()))?;
    let traj = evolve_universe(&u, &times).map_err(ctx)?;
    let part = config.partition()?;
    let ledger = entropy_ledger(&traj, &u, &part).map_err(ctx)?;
    let scrambling = ledger
        .rows
        .iter()
        .map(|r| maximal_scrambling_identity(r, u.n_s()))
        .collect();

    let ttm = times
        .par_iter()
        .zip(&traj.states)
        .map(|(&t, rho_t)| {
            let d = ttm_distribution(&u, t)?;
            let ft = integral_ft(&d)?;
            let (lhs, rhs) = average_entropy_production(&d, rho_t, &u)?;
            Ok(TtmRow {
                t,
                ft_value: ft.value,
                ft_deviation: ft.deviation,
                excluded_mass: ft.excluded_mass,
                mean_omega_s: ft.mean_omega_s,
                mean_omega_e: ft.mean_omega_e,
                identity_lhs: lhs,
                identity_rhs: rhs,
            })
        })
        .collect::<scramble_core::Result<Vec<_>>>()
        .map_err(ctx)?;

    let witness = (1..=lab.n_env)
        .map(|k| {
            let subset: Vec<usize> = (0..k).collect();
            partition_witness(&traj, &u, &subset).map(|rows| (subset, rows))
        })
        .collect::<scramble_core::Result<Vec<_>>>()
        .map_err(ctx)?;

    Ok(ThermolabResult {
        seed,
        ledger,
        scrambling,
        ttm,
        witness,
    })
}
