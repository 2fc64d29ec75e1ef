//! Optimizers: Armijo backtracking line search, adaptive quantum natural
//! gradient descent, the pseudo-inverse utility, and an SPSA baseline.
//!
//! The natural-gradient step direction is g⁻¹∇f while the Armijo condition
//! keeps the Euclidean norm ‖∇f‖² as printed; for the Euclidean ansätze
//! the two differ by the constant factor 4 absorbed into α. The search is
//! capped at `k_max` and takes the last trial even when the condition never
//! held, matching runs where the rule is not fulfilled in every iteration.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Hyperparameters of the adaptive natural-gradient loop.
#[derive(Debug, Clone)]
pub struct AqngdConfig {
    /// Armijo sensitivity constant in [0, 1].
    pub alpha: f64,
    /// Maximum step size; trial steps are β/2^k.
    pub beta: f64,
    /// Maximum backtracking index searched.
    pub k_max: u32,
    /// Relative eigenvalue cutoff of the metric pseudo-inverse.
    pub pinv_tol: f64,
    /// Stop when f(θ_{i-1}) - f(θ_i) < converge_tol.
    pub converge_tol: f64,
    pub max_iters: usize,
}

impl Default for AqngdConfig {
    fn default() -> Self {
        Self {
            alpha: 0.01,
            beta: 0.5,
            k_max: 6,
            pinv_tol: 1e-15,
            converge_tol: 1e-4,
            max_iters: 100,
        }
    }
}

impl AqngdConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::InvalidArgument(format!("alpha {} outside [0,1]", self.alpha)));
        }
        if self.beta <= 0.0 {
            return Err(Error::InvalidArgument(format!("beta {} must be positive", self.beta)));
        }
        if self.pinv_tol <= 0.0 {
            return Err(Error::InvalidArgument("pinv_tol must be positive".into()));
        }
        Ok(())
    }
}

/// One optimizer step in the trace.
#[derive(Debug, Clone)]
pub struct IterationRecord {
    pub iteration: usize,
    pub energy: f64,
    pub k: u32,
    pub stepsize: f64,
    pub params: Vec<f64>,
    pub grad_norm: f64,
    /// Whether the Armijo condition held at the accepted k (false when the
    /// search ran out at k_max).
    pub armijo_satisfied: bool,
    /// Cumulative energy-evaluation count after this iteration.
    pub evals: u64,
}

/// Convergence bookkeeping for one optimization run.
#[derive(Debug, Clone)]
pub struct OptTrace {
    pub initial_energy: f64,
    pub records: Vec<IterationRecord>,
    pub converged: bool,
    /// Set when a non-finite energy aborted the run.
    pub diverged: bool,
}

impl OptTrace {
    pub fn final_energy(&self) -> f64 {
        self.records.last().map_or(self.initial_energy, |r| r.energy)
    }

    pub fn final_params(&self) -> Option<&[f64]> {
        self.records.last().map(|r| r.params.as_slice())
    }

    /// CSV with the plotted-data columns iteration,energy,k,stepsize.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,energy,k,stepsize\n");
        for r in &self.records {
            let _ = writeln!(out, "{},{},{},{}", r.iteration, r.energy, r.k, r.stepsize);
        }
        out
    }
}

/// Moore-Penrose pseudo-inverse of a real symmetric matrix via its
/// eigendecomposition; eigenvalues below `tol · max|λ|` are annihilated.
pub fn pseudo_invert(matrix: &DMatrix<f64>, tol: f64) -> Result<DMatrix<f64>> {
    if matrix.nrows() != matrix.ncols() {
        return Err(Error::DimensionMismatch("pseudo-inverse of a non-square matrix".into()));
    }
    let asym = (matrix - matrix.transpose())
        .iter()
        .map(|v| v.abs())
        .fold(0.0, f64::max);
    if asym > 1e-9 {
        return Err(Error::InvalidArgument(format!("matrix asymmetry {asym}")));
    }
    let sym = (matrix + matrix.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let max_abs = eig.eigenvalues.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let cutoff = tol * max_abs;
    let d = matrix.nrows();
    let mut inv_diag = DVector::<f64>::zeros(d);
    for k in 0..d {
        let lambda = eig.eigenvalues[k];
        inv_diag[k] = if lambda.abs() > cutoff && lambda != 0.0 {
            1.0 / lambda
        } else {
            0.0
        };
    }
    let v = &eig.eigenvectors;
    Ok(v * DMatrix::from_diagonal(&inv_diag) * v.transpose())
}

/// Outcome of one Armijo search: the chosen index, the accepted trial point,
/// and the cost there.
struct ArmijoOutcome {
    k: u32,
    next_params: Vec<f64>,
    next_cost: f64,
    evals: u64,
    satisfied: bool,
}

/// Searches k = 0, 1, ... for the largest step β/2^k whose trial point
/// θ - (β/2^k)·direction satisfies
/// f(θ) - f(trial) ≥ α (β/2^k) cond_norm_sq, capping at k_max.
fn armijo_search<F>(
    cost: &mut F,
    params: &[f64],
    direction: &[f64],
    cond_norm_sq: f64,
    f0: f64,
    cfg: &AqngdConfig,
) -> Result<ArmijoOutcome>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let mut evals = 0u64;
    let mut last: Option<(Vec<f64>, f64)> = None;
    for k in 0..=cfg.k_max {
        let step = cfg.beta / 2f64.powi(k as i32);
        let trial: Vec<f64> = params
            .iter()
            .zip(direction)
            .map(|(p, d)| p - step * d)
            .collect();
        let f_trial = cost(&trial)?;
        evals += 1;
        if f0 - f_trial >= cfg.alpha * step * cond_norm_sq {
            return Ok(ArmijoOutcome { k, next_params: trial, next_cost: f_trial, evals, satisfied: true });
        }
        last = Some((trial, f_trial));
    }
    let (next_params, next_cost) = last.expect("k_max loop ran at least once");
    Ok(ArmijoOutcome { k: cfg.k_max, next_params, next_cost, evals, satisfied: false })
}

/// Armijo backtracking: returns the chosen index k and the trial point
/// θ - (β/2^k)·grad. Evaluates f(θ) once plus one evaluation per tried k.
pub fn armijo_backtrack<F>(
    mut cost: F,
    params: &[f64],
    grad: &[f64],
    cfg: &AqngdConfig,
) -> Result<(u32, Vec<f64>)>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    cfg.validate()?;
    if grad.len() != params.len() {
        return Err(Error::DimensionMismatch("gradient/parameter length mismatch".into()));
    }
    let norm_sq: f64 = grad.iter().map(|g| g * g).sum();
    if !norm_sq.is_finite() {
        return Err(Error::Numeric("non-finite gradient".into()));
    }
    let f0 = cost(params)?;
    let outcome = armijo_search(&mut cost, params, grad, norm_sq, f0, cfg)?;
    Ok((outcome.k, outcome.next_params))
}

/// Metric supplier for the natural-gradient loop.
///
/// `Constant` is the implicit-adaptive regime: the metric is certified
/// constant, so no evaluations are spent on it. `Measured` calls back per
/// iteration.
pub enum MetricSource<'a> {
    Constant(DMatrix<f64>),
    Measured(&'a mut dyn FnMut(&[f64]) -> Result<DMatrix<f64>>),
}

impl MetricSource<'_> {
    /// Constant scaled identity s·I_d; with s = 0.25 this is the certified
    /// metric of the Euclidean ansätze.
    pub fn scaled_identity(dim: usize, scale: f64) -> Self {
        MetricSource::Constant(DMatrix::identity(dim, dim) * scale)
    }
}

/// Adaptive quantum natural gradient descent.
///
/// Per iteration: Euclidean gradient (2d energy evaluations via the
/// parameter-shift rule in `grad_fn`), metric, pseudo-inverse, natural
/// direction g⁻¹∇, Armijo index k (k+1 evaluations), update
/// θ ← θ - (β/2^k) g⁻¹∇. Stops when the energy decrease falls below
/// `converge_tol` or after `max_iters`. A non-finite energy flags the trace
/// as diverged and returns it as-is.
pub fn aqngd_run<E, G>(
    mut energy_fn: E,
    mut grad_fn: G,
    mut metric: MetricSource,
    theta0: &[f64],
    cfg: &AqngdConfig,
) -> Result<OptTrace>
where
    E: FnMut(&[f64]) -> Result<f64>,
    G: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    cfg.validate()?;
    let d = theta0.len();
    let mut theta = theta0.to_vec();
    let mut evals: u64 = 1;
    let mut f_current = energy_fn(&theta)?;
    let initial_energy = f_current;
    let mut trace = OptTrace {
        initial_energy,
        records: Vec::new(),
        converged: false,
        diverged: false,
    };
    if !f_current.is_finite() {
        trace.diverged = true;
        return Ok(trace);
    }
    for iteration in 1..=cfg.max_iters {
        let grad = grad_fn(&theta)?;
        if grad.len() != d {
            return Err(Error::DimensionMismatch("gradient length mismatch".into()));
        }
        evals += 2 * d as u64;
        let grad_norm_sq: f64 = grad.iter().map(|g| g * g).sum();
        if !grad_norm_sq.is_finite() {
            trace.diverged = true;
            return Ok(trace);
        }
        let g_matrix = match &mut metric {
            MetricSource::Constant(m) => m.clone(),
            MetricSource::Measured(f) => f(&theta)?,
        };
        let g_inv = pseudo_invert(&g_matrix, cfg.pinv_tol)?;
        let grad_vec = DVector::from_column_slice(&grad);
        let natural = &g_inv * grad_vec;
        let outcome = armijo_search(
            &mut energy_fn,
            &theta,
            natural.as_slice(),
            grad_norm_sq,
            f_current,
            cfg,
        )?;
        evals += outcome.evals;
        let f_next = outcome.next_cost;
        theta = outcome.next_params;
        trace.records.push(IterationRecord {
            iteration,
            energy: f_next,
            k: outcome.k,
            stepsize: cfg.beta / 2f64.powi(outcome.k as i32),
            params: theta.clone(),
            grad_norm: grad_norm_sq.sqrt(),
            armijo_satisfied: outcome.satisfied,
            evals,
        });
        if !f_next.is_finite() {
            trace.diverged = true;
            return Ok(trace);
        }
        let decrease = f_current - f_next;
        f_current = f_next;
        if decrease < cfg.converge_tol {
            trace.converged = true;
            break;
        }
    }
    Ok(trace)
}

/// SPSA gain schedule: a_k = a/(k+1+A)^0.602, c_k = c/(k+1)^0.101.
#[derive(Debug, Clone)]
pub struct SpsaGains {
    pub a: f64,
    pub c: f64,
    pub big_a: f64,
    pub alpha_exp: f64,
    pub gamma_exp: f64,
}

impl Default for SpsaGains {
    fn default() -> Self {
        Self { a: 0.2, c: 0.1, big_a: 10.0, alpha_exp: 0.602, gamma_exp: 0.101 }
    }
}

/// Simultaneous-perturbation stochastic approximation with Rademacher
/// perturbations; two energy evaluations per iteration, one trace record per
/// evaluation (the iteration column counts evaluations, making budget
/// comparisons against gradient-based traces direct).
pub fn spsa_run<E>(
    mut energy_fn: E,
    theta0: &[f64],
    iters: usize,
    gains: &SpsaGains,
    seed: u64,
) -> Result<OptTrace>
where
    E: FnMut(&[f64]) -> Result<f64>,
{
    if iters == 0 {
        return Err(Error::InvalidArgument("SPSA needs at least one iteration".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut theta = theta0.to_vec();
    let d = theta.len();
    let initial_energy = energy_fn(&theta)?;
    let mut trace = OptTrace {
        initial_energy,
        records: Vec::new(),
        converged: false,
        diverged: false,
    };
    let mut evals: u64 = 1;
    let record = |records: &mut Vec<IterationRecord>,
                      energy: f64,
                      a_k: f64,
                      params: &[f64],
                      evals: u64| {
        let iteration = records.len() + 1;
        records.push(IterationRecord {
            iteration,
            energy,
            k: 0,
            stepsize: a_k,
            params: params.to_vec(),
            grad_norm: f64::NAN,
            armijo_satisfied: false,
            evals,
        });
    };
    for k in 0..iters {
        let a_k = gains.a / (k as f64 + 1.0 + gains.big_a).powf(gains.alpha_exp);
        let c_k = gains.c / (k as f64 + 1.0).powf(gains.gamma_exp);
        let delta: Vec<f64> = (0..d)
            .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
            .collect();
        let plus: Vec<f64> = theta.iter().zip(&delta).map(|(t, dl)| t + c_k * dl).collect();
        let minus: Vec<f64> = theta.iter().zip(&delta).map(|(t, dl)| t - c_k * dl).collect();
        let f_plus = energy_fn(&plus)?;
        evals += 1;
        record(&mut trace.records, f_plus, a_k, &plus, evals);
        let f_minus = energy_fn(&minus)?;
        evals += 1;
        record(&mut trace.records, f_minus, a_k, &minus, evals);
        if !f_plus.is_finite() || !f_minus.is_finite() {
            trace.diverged = true;
            return Ok(trace);
        }
        let scale = (f_plus - f_minus) / (2.0 * c_k);
        for (t, dl) in theta.iter_mut().zip(&delta) {
            // Rademacher inverse equals the perturbation itself.
            *t -= a_k * scale * dl;
        }
    }
    // Final point snapshot so final_params reflects θ, not a perturbation.
    let f_final = energy_fn(&theta)?;
    evals += 1;
    record(&mut trace.records, f_final, 0.0, &theta, evals);
    Ok(trace)
}
