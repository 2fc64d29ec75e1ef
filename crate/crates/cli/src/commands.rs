//! The five experiment pipelines behind the subcommands. Each validates its
//! inputs, computes everything, and only then writes the artifact files, so
//! a failing run leaves no partial outputs.

use std::cell::Cell;
use std::fmt::Write as _;
use std::path::Path;

use kagome_vqe::ansatz::{fubini_study_full_numeric, parameter_shift_gradient, uniform_params};
use kagome_vqe::circuit::Circuit;
use kagome_vqe::executor::{Backend, HamiltonianEstimator};
use kagome_vqe::hamiltonian::{estimate_energy, exact_spectrum, heisenberg_from_lattice};
use kagome_vqe::lattice::momentum_grid;
use kagome_vqe::mitigation::{
    apply_rem, bpr_extrapolate, calibrate, energy_from_quasi, project_positive,
    singleton_partitions, QuasiDistribution, ResponseMatrix, ZnePoint, ZneSeries,
};
use kagome_vqe::observables::{
    all_pairs_ensemble, all_pairs_exact, all_pairs_from_quasi, all_pairs_sampled, similarity,
    structure_factor, subspace_fidelity, StructureFactorMap,
};
use kagome_vqe::optim::{aqngd_run, spsa_run, MetricSource, OptTrace};
use kagome_vqe::simulator::{
    derive_seed, evolve, evolve_trajectory, sample, uniform_basis, BasisLetter, NoiseModel,
    ShotTable, StateVector,
};
use crate::config::{BackendChoice, ExperimentConfig, InitChoice, OptimizerChoice};
use crate::CliError;

fn write_outputs(out: &Path, files: &[(&str, String)]) -> Result<(), CliError> {
    std::fs::create_dir_all(out)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", out.display())))?;
    for (name, content) in files {
        let path = out.join(name);
        std::fs::write(&path, content)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

fn backend_of(cfg: &ExperimentConfig, num_qubits: usize) -> Backend {
    match cfg.backend {
        BackendChoice::Exact => Backend::Exact,
        BackendChoice::Shots => Backend::Shots { shots: cfg.shots },
        BackendChoice::Noisy => Backend::Noisy {
            shots: cfg.shots,
            trajectories: cfg.trajectories,
            noise: cfg.noise_model(num_qubits),
        },
    }
}

/// Exact spectrum, ground-subspace correlations, and the exact S(q) map.
pub fn cmd_ed(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let fragment = cfg.fragment()?;
    let spectrum = exact_spectrum(&fragment)?;
    let correlations = all_pairs_ensemble(&spectrum.ground_subspace)?;
    let grid = momentum_grid(cfg.grid_resolution, cfg.grid_extent)?;
    let map = structure_factor(&correlations, &fragment, &grid)?;
    let mut ground = String::new();
    let _ = writeln!(ground, "ground_energy {}", spectrum.ground_energy);
    let _ = writeln!(ground, "degeneracy {}", spectrum.ground_subspace.len());
    write_outputs(&cfg.out, &[
        ("spectrum.csv", spectrum.eigenvalues_csv()),
        ("ground.txt", ground),
        ("correlations.csv", correlations.to_csv()),
        ("sq_exact.csv", map.to_csv()),
        ("config.resolved.txt", cfg.resolved_text()),
    ])?;
    println!(
        "ground energy {} (degeneracy {}); artifacts in {}",
        spectrum.ground_energy,
        spectrum.ground_subspace.len(),
        cfg.out.display()
    );
    Ok(())
}

fn initial_params(cfg: &ExperimentConfig, dim: usize) -> Result<Vec<f64>, CliError> {
    match &cfg.init {
        InitChoice::Explicit(values) => {
            if values.len() != dim {
                return Err(CliError::Config(format!(
                    "init has {} values, ansatz needs {dim}",
                    values.len()
                )));
            }
            Ok(values.clone())
        }
        InitChoice::Random => Ok(uniform_params(dim, derive_seed(cfg.seed, 0x1a17))),
    }
}

/// Runs the configured optimizer on the configured backend and writes the
/// convergence trace.
pub fn cmd_vqe(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let fragment = cfg.fragment()?;
    let ansatz = cfg.ansatz()?;
    let est = HamiltonianEstimator::new(heisenberg_from_lattice(&fragment));
    let backend = backend_of(cfg, ansatz.num_qubits());
    let theta0 = initial_params(cfg, ansatz.num_params())?;
    let eval_counter = Cell::new(0u64);
    let energy = |p: &[f64]| -> kagome_vqe::Result<f64> {
        eval_counter.set(eval_counter.get() + 1);
        let circuit = ansatz.circuit.bind(p)?;
        est.energy(&circuit, &backend, derive_seed(cfg.seed, eval_counter.get()))
            .map(|e| e.value)
    };
    let trace: OptTrace = match cfg.optimizer {
        OptimizerChoice::Aqngd => {
            let grad = |p: &[f64]| parameter_shift_gradient(&ansatz, p, &energy);
            let metric = MetricSource::scaled_identity(ansatz.num_params(), 0.25);
            aqngd_run(&energy, grad, metric, &theta0, &cfg.aqngd())?
        }
        OptimizerChoice::Spsa => spsa_run(
            &energy,
            &theta0,
            cfg.spsa_iters,
            &cfg.spsa_gains(),
            derive_seed(cfg.seed, 0x5b5a),
        )?,
    };
    let final_params = trace.final_params().unwrap_or(&theta0).to_vec();
    let mut params_csv = String::from("index,theta\n");
    for (i, t) in final_params.iter().enumerate() {
        let _ = writeln!(params_csv, "{i},{t}");
    }
    let mut summary = String::new();
    let _ = writeln!(summary, "final_energy {}", trace.final_energy());
    let _ = writeln!(summary, "iterations {}", trace.records.len());
    let _ = writeln!(
        summary,
        "energy_evaluations {}",
        trace.records.last().map_or(1, |r| r.evals)
    );
    let _ = writeln!(summary, "converged {}", trace.converged);
    let _ = writeln!(summary, "diverged {}", trace.diverged);
    let mut files = vec![
        ("trace.csv", trace.to_csv()),
        ("final_params.csv", params_csv),
        ("summary.txt", summary),
        ("circuit.txt", ansatz.circuit.to_text()),
        ("config.resolved.txt", cfg.resolved_text()),
    ];
    if cfg.backend == BackendChoice::Exact {
        let spectrum = exact_spectrum(&fragment)?;
        let state = ansatz.prepare(&final_params)?;
        let fid = subspace_fidelity(&state, &spectrum.ground_subspace)?;
        files.push(("fidelity.txt", format!("ground_subspace_fidelity {fid}\n")));
    }
    write_outputs(&cfg.out, &files)?;
    if trace.diverged {
        return Err(CliError::Numeric("optimization diverged; trace flagged".into()));
    }
    println!(
        "final energy {} after {} iterations ({} evaluations); artifacts in {}",
        trace.final_energy(),
        trace.records.len(),
        trace.records.last().map_or(1, |r| r.evals),
        cfg.out.display()
    );
    Ok(())
}

/// Calibration executor: runs the basis-state preparation circuits through
/// the same trajectory-plus-readout noise as the experiment.
fn calibration_executor<'a>(
    noise: &'a NoiseModel,
    num_qubits: usize,
) -> impl FnMut(&Circuit, u64, u64) -> kagome_vqe::Result<ShotTable> + 'a {
    move |circuit: &Circuit, shots: u64, seed: u64| {
        let state = evolve_trajectory(
            &StateVector::zero(num_qubits),
            circuit,
            noise,
            derive_seed(seed, 1),
        )?;
        let table = sample(&state, &uniform_basis(BasisLetter::Z, num_qubits), shots, seed)?;
        kagome_vqe::simulator::apply_readout_noise(&table, noise, derive_seed(seed, 2))
    }
}

fn rem_quasis(
    tables: &[ShotTable],
    response: &ResponseMatrix,
    positive: bool,
) -> Result<Vec<QuasiDistribution>, CliError> {
    tables
        .iter()
        .map(|t| {
            let quasi = apply_rem(t, response)?.quasi;
            Ok(if positive { project_positive(&quasi) } else { quasi })
        })
        .collect()
}

/// Raw, REM, positivity-preserving REM, and ZNE energies at fixed
/// parameters, in the Table-shaped methods CSV.
pub fn cmd_mitigate(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let fragment = cfg.fragment()?;
    let ansatz = cfg.ansatz()?;
    if cfg.backend == BackendChoice::Exact {
        return Err(CliError::Config(
            "mitigation needs a sampling backend (shots or noisy)".into(),
        ));
    }
    let n = ansatz.num_qubits();
    let est = HamiltonianEstimator::new(heisenberg_from_lattice(&fragment));
    let circuit = ansatz.circuit.bind(&cfg.bound_params()?)?;
    let backend = backend_of(cfg, n);
    let noise = match &backend {
        Backend::Noisy { noise, .. } => noise.clone(),
        _ => NoiseModel::noiseless(n),
    };

    // Calibrated response matrix over singleton partitions.
    let response = calibrate(
        calibration_executor(&noise, n),
        n,
        &singleton_partitions(n),
        cfg.calibration_shots,
        derive_seed(cfg.seed, 0xca11),
    )?;

    // Per-fold group tables; fold 1 doubles as the unmitigated estimate.
    let sum = est.hamiltonian().clone();
    let groups = est.groups().clone();
    let mut raw_points = Vec::new();
    let mut rem_points = Vec::new();
    let mut pos_points = Vec::new();
    let mut unmitigated = None;
    let mut rem_energy = None;
    let mut pos_energy = None;
    for &fold in &cfg.zne_folds {
        let folded = circuit.fold_global(fold)?;
        let tables =
            est.sample_group_tables(&folded, &backend, derive_seed(cfg.seed, u64::from(fold)))?;
        let raw = estimate_energy(&tables, &sum, &groups)?;
        let rem = energy_from_quasi(&rem_quasis(&tables, &response, false)?, &sum, &groups)?;
        let pos = energy_from_quasi(&rem_quasis(&tables, &response, true)?, &sum, &groups)?;
        raw_points.push(ZnePoint { fold, energy: raw.value, stderr: raw.stderr });
        // The inversion does not propagate shot noise; the raw standard
        // error of the same tables is used as the scale for the REM series.
        rem_points.push(ZnePoint { fold, energy: rem, stderr: raw.stderr });
        pos_points.push(ZnePoint { fold, energy: pos, stderr: raw.stderr });
        if fold == 1 {
            unmitigated = Some(raw);
            rem_energy = Some(rem);
            pos_energy = Some(pos);
        }
    }
    let unmitigated = unmitigated
        .ok_or_else(|| CliError::Config("zne_folds must include fold 1".into()))?;
    let raw_series = ZneSeries::new(raw_points)?;
    let rem_series = ZneSeries::new(rem_points)?;
    let pos_series = ZneSeries::new(pos_points)?;

    let zne1 = bpr_extrapolate(&raw_series, 1)?;
    let zne2 = bpr_extrapolate(&raw_series, 2)?;
    let rem_zne = bpr_extrapolate(&rem_series, cfg.zne_degree)?;
    let pos_zne = bpr_extrapolate(&pos_series, cfg.zne_degree)?;

    let exact_energy = est.exact_energy(&circuit)?;
    let ground = exact_spectrum(&fragment)?.ground_energy;

    let mut methods = String::from("method,value,stderr\n");
    let rem_stderr = unmitigated.stderr;
    let rows: Vec<(&str, f64, f64)> = vec![
        ("Unmitigated", unmitigated.value, unmitigated.stderr),
        ("REM", rem_energy.unwrap(), rem_stderr),
        ("REM+Positivity", pos_energy.unwrap(), rem_stderr),
        ("ZNE deg1", zne1.mean, zne1.std),
        ("ZNE deg2", zne2.mean, zne2.std),
        ("Exact", exact_energy, 0.0),
        ("Ground", ground, 0.0),
    ];
    for (name, value, stderr) in rows {
        let _ = writeln!(methods, "{name},{value},{stderr}");
    }
    let mut extrapolations = String::from("method,E0,E0_std\n");
    let rem_label = format!("rem_zne_deg{}", cfg.zne_degree);
    let pos_label = format!("rem_positive_zne_deg{}", cfg.zne_degree);
    for (name, e) in [
        ("zne_deg1", &zne1),
        ("zne_deg2", &zne2),
        (rem_label.as_str(), &rem_zne),
        (pos_label.as_str(), &pos_zne),
    ] {
        let _ = writeln!(extrapolations, "{name},{},{}", e.mean, e.std);
    }
    write_outputs(&cfg.out, &[
        ("methods.csv", methods.clone()),
        ("zne_series.csv", raw_series.to_csv()),
        ("zne_series_rem.csv", rem_series.to_csv()),
        ("zne_series_rem_positive.csv", pos_series.to_csv()),
        ("extrapolations.csv", extrapolations),
        ("config.resolved.txt", cfg.resolved_text()),
    ])?;
    print!("{methods}");
    Ok(())
}

/// Full numeric Fubini-Study metric at seeded random parameter draws.
pub fn cmd_metric(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let ansatz = cfg.ansatz()?;
    if cfg.metric_draws == 0 {
        return Err(CliError::Config("metric_draws must be positive".into()));
    }
    let mut worst = 0.0f64;
    let mut last_csv = String::new();
    for draw in 0..cfg.metric_draws {
        let params = uniform_params(
            ansatz.num_params(),
            derive_seed(derive_seed(cfg.seed, 0x3e7), draw as u64),
        );
        let g = fubini_study_full_numeric(&ansatz, &params)?;
        worst = worst.max(g.max_deviation_from_scaled_identity(0.25));
        last_csv = g.to_csv();
    }
    let report = format!("draws,max_abs_deviation\n{},{}\n", cfg.metric_draws, worst);
    write_outputs(&cfg.out, &[
        ("metric_report.csv", report),
        ("metric_matrix.csv", last_csv),
        ("config.resolved.txt", cfg.resolved_text()),
    ])?;
    println!(
        "max |G - 0.25·I| over {} draws: {worst:e}",
        cfg.metric_draws
    );
    Ok(())
}

/// S(q) of the configured pipeline, with similarity against the exact map
/// of the same prepared state on sampling backends.
pub fn cmd_structure_factor(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let fragment = cfg.fragment()?;
    let ansatz = cfg.ansatz()?;
    let n = ansatz.num_qubits();
    let est = HamiltonianEstimator::new(heisenberg_from_lattice(&fragment));
    let circuit = ansatz.circuit.bind(&cfg.bound_params()?)?;
    let grid = momentum_grid(cfg.grid_resolution, cfg.grid_extent)?;
    let ideal_state = evolve(&StateVector::zero(n), &circuit)?;
    let exact_table = all_pairs_exact(&ideal_state)?;
    let exact_map = structure_factor(&exact_table, &fragment, &grid)?;

    let (map, correlations): (StructureFactorMap, String) = match cfg.backend {
        BackendChoice::Exact => (exact_map.clone(), exact_table.to_csv()),
        _ => {
            let backend = backend_of(cfg, n);
            let tables =
                est.sample_group_tables(&circuit, &backend, derive_seed(cfg.seed, 0x50f))?;
            let table = if cfg.rem {
                let noise = match &backend {
                    Backend::Noisy { noise, .. } => noise.clone(),
                    _ => NoiseModel::noiseless(n),
                };
                let response = calibrate(
                    calibration_executor(&noise, n),
                    n,
                    &singleton_partitions(n),
                    cfg.calibration_shots,
                    derive_seed(cfg.seed, 0xca11),
                )?;
                let letters = [BasisLetter::X, BasisLetter::Y, BasisLetter::Z];
                let quasi: Vec<(BasisLetter, QuasiDistribution)> = tables
                    .iter()
                    .map(|t| {
                        let letter = *letters
                            .iter()
                            .find(|&&l| t.basis.iter().all(|&b| b == l))
                            .expect("uniform group basis");
                        let q = apply_rem(t, &response)?.quasi;
                        Ok((letter, if cfg.rem_positive { project_positive(&q) } else { q }))
                    })
                    .collect::<Result<_, CliError>>()?;
                all_pairs_from_quasi(&quasi)?
            } else {
                all_pairs_sampled(&tables)?
            };
            (structure_factor(&table, &fragment, &grid)?, table.to_csv())
        }
    };

    let mut files = vec![
        ("sq.csv", map.to_csv()),
        ("correlations.csv", correlations),
        ("config.resolved.txt", cfg.resolved_text()),
    ];
    if cfg.backend != BackendChoice::Exact {
        let (pearson, mse) = similarity(&exact_map, &map)?;
        println!("pearson {pearson} mse {mse}");
        files.push(("similarity.txt", format!("pearson {pearson}\nmse {mse}\n")));
    }
    write_outputs(&cfg.out, &files)
}
