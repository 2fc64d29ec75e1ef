//! Readout-error mitigation and zero-noise extrapolation.
//!
//! REM models readout confusion as a tensor product of per-partition
//! column-stochastic response matrices R_{fi} = P(f|i), calibrated by
//! preparing computational basis states. Inverting the factors yields a
//! quasi-distribution that may carry negative entries; positivity can be
//! restored by exact Euclidean projection onto the probability simplex.
//!
//! ZNE evaluates the energy pipeline at global circuit folds (1, 3, 5, ...)
//! and extrapolates to fold 0, either by least-squares polynomial fit or by
//! Bayesian polynomial regression with heteroscedastic per-point noise.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::hamiltonian::EnergyEstimate;
use crate::simulator::{derive_seed, ShotTable};

/// Default truncation size for expanded quasi-distributions.
pub const DEFAULT_REM_TOP_K: usize = 1 << 14;

/// Default prior standard deviation of the Bayesian extrapolation weights.
pub const DEFAULT_BPR_PRIOR_SIGMA: f64 = 10.0;

/// Floor applied to zero standard errors in the Bayesian extrapolation.
pub const BPR_STDERR_FLOOR: f64 = 1e-9;

/// Tensor-factored response matrix over disjoint qubit partitions.
#[derive(Debug, Clone)]
pub struct ResponseMatrix {
    partitions: Vec<Vec<usize>>,
    factors: Vec<DMatrix<f64>>,
    pub calibration_shots: u64,
}

impl ResponseMatrix {
    /// Validates that partitions are disjoint, cover 0..n-1, and that each
    /// factor is column-stochastic of matching dimension.
    pub fn new(
        partitions: Vec<Vec<usize>>,
        factors: Vec<DMatrix<f64>>,
        calibration_shots: u64,
    ) -> Result<Self> {
        let num_qubits = validate_partitions(&partitions)?;
        if factors.len() != partitions.len() {
            return Err(Error::InvalidArgument(format!(
                "{} factors for {} partitions",
                factors.len(),
                partitions.len()
            )));
        }
        for (p, f) in partitions.iter().zip(&factors) {
            let dim = 1usize << p.len();
            if f.nrows() != dim || f.ncols() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "factor for partition {p:?} must be {dim}x{dim}"
                )));
            }
            for col in 0..dim {
                let sum: f64 = (0..dim).map(|row| f[(row, col)]).sum();
                if (sum - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidArgument(format!(
                        "factor column {col} sums to {sum}, expected 1"
                    )));
                }
            }
        }
        let _ = num_qubits;
        Ok(Self { partitions, factors, calibration_shots })
    }

    pub fn num_qubits(&self) -> usize {
        self.partitions.iter().map(|p| p.len()).sum()
    }

    pub fn partitions(&self) -> &[Vec<usize>] {
        &self.partitions
    }

    pub fn factors(&self) -> &[DMatrix<f64>] {
        &self.factors
    }
}

fn validate_partitions(partitions: &[Vec<usize>]) -> Result<usize> {
    if partitions.is_empty() {
        return Err(Error::InvalidArgument("no partitions given".into()));
    }
    let mut seen = std::collections::BTreeSet::new();
    for p in partitions {
        if p.is_empty() {
            return Err(Error::InvalidArgument("empty partition".into()));
        }
        for &q in p {
            if !seen.insert(q) {
                return Err(Error::InvalidArgument(format!("qubit {q} appears in two partitions")));
            }
        }
    }
    let n = seen.len();
    if *seen.iter().next_back().unwrap() != n - 1 {
        return Err(Error::InvalidArgument("partitions must cover qubits 0..n-1".into()));
    }
    Ok(n)
}

/// Singleton partitions [0], [1], ..., [n-1].
pub fn singleton_partitions(num_qubits: usize) -> Vec<Vec<usize>> {
    (0..num_qubits).map(|q| vec![q]).collect()
}

/// Calibrates a partitioned response matrix by preparing every computational
/// basis state of each partition (X gates only) and recording the observed
/// local frequencies as that factor's column. Costs Σ_p 2^|p| preparations
/// (2n for singleton partitions).
pub fn calibrate<F>(
    mut execute: F,
    num_qubits: usize,
    partitions: &[Vec<usize>],
    shots: u64,
    seed: u64,
) -> Result<ResponseMatrix>
where
    F: FnMut(&Circuit, u64, u64) -> Result<ShotTable>,
{
    let covered = validate_partitions(partitions)?;
    if covered != num_qubits {
        return Err(Error::InvalidArgument(format!(
            "partitions cover {covered} qubits, expected {num_qubits}"
        )));
    }
    if shots < 100 {
        return Err(Error::InvalidArgument(
            "calibration needs at least 100 shots per basis state".into(),
        ));
    }
    let mut factors = Vec::with_capacity(partitions.len());
    for (pi, partition) in partitions.iter().enumerate() {
        let m = partition.len();
        let dim = 1usize << m;
        let mut factor = DMatrix::<f64>::zeros(dim, dim);
        for prepared in 0..dim {
            let mut gates = Vec::new();
            for (k, &q) in partition.iter().enumerate() {
                if (prepared >> k) & 1 == 1 {
                    gates.push(Gate::X { q });
                }
            }
            let circuit = Circuit::new(num_qubits, gates)?;
            let table = execute(
                &circuit,
                shots,
                derive_seed(seed, (pi as u64) << 32 | prepared as u64),
            )?;
            for (&bits, &count) in &table.counts {
                let mut local = 0usize;
                for (k, &q) in partition.iter().enumerate() {
                    local |= ((bits >> q) & 1) << k;
                }
                factor[(local, prepared)] += count as f64;
            }
            for row in 0..dim {
                factor[(row, prepared)] /= table.shots as f64;
            }
        }
        factors.push(factor);
    }
    ResponseMatrix::new(partitions.to_vec(), factors, shots)
}

/// A signed distribution over bitstrings; entries sum to 1.
#[derive(Debug, Clone)]
pub struct QuasiDistribution {
    num_qubits: usize,
    entries: BTreeMap<usize, f64>,
}

impl QuasiDistribution {
    pub fn new(num_qubits: usize, entries: BTreeMap<usize, f64>) -> Result<Self> {
        let total: f64 = entries.values().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "quasi-distribution total {total} deviates from 1"
            )));
        }
        Ok(Self { num_qubits, entries })
    }

    /// Empirical probabilities of a shot table.
    pub fn from_shot_table(table: &ShotTable) -> Self {
        let shots = table.shots as f64;
        let entries = table
            .counts
            .iter()
            .map(|(&k, &c)| (k, c as f64 / shots))
            .collect();
        Self { num_qubits: table.num_qubits(), entries }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn entries(&self) -> &BTreeMap<usize, f64> {
        &self.entries
    }

    pub fn total(&self) -> f64 {
        self.entries.values().sum()
    }

    /// Total negative mass Σ max(0, -entry).
    pub fn negative_mass(&self) -> f64 {
        self.entries.values().map(|&v| (-v).max(0.0)).sum()
    }

    /// Signed expectation of a per-bitstring value function.
    pub fn expectation<F>(&self, mut value: F) -> f64
    where
        F: FnMut(usize) -> f64,
    {
        self.entries.iter().map(|(&k, &w)| w * value(k)).sum()
    }
}

/// Outcome of applying REM: the quasi-distribution plus a flag raised when a
/// factor was singular beyond the pseudo-inverse tolerance.
#[derive(Debug, Clone)]
pub struct RemOutcome {
    pub quasi: QuasiDistribution,
    pub singular_factor: bool,
}

/// Applies the factor-wise (pseudo-)inverse of the response matrix to the
/// empirical distribution of a shot table, truncating the expansion to the
/// `top_k` largest-magnitude entries and renormalizing to total 1.
pub fn apply_rem(table: &ShotTable, response: &ResponseMatrix) -> Result<RemOutcome> {
    apply_rem_top_k(table, response, DEFAULT_REM_TOP_K)
}

pub fn apply_rem_top_k(
    table: &ShotTable,
    response: &ResponseMatrix,
    top_k: usize,
) -> Result<RemOutcome> {
    let n = response.num_qubits();
    if table.num_qubits() != n {
        return Err(Error::DimensionMismatch(format!(
            "table over {} qubits, response over {n}",
            table.num_qubits()
        )));
    }
    if n > 20 {
        return Err(Error::SizeLimit("REM expansion limited to 20 qubits".into()));
    }
    if top_k == 0 {
        return Err(Error::InvalidArgument("top_k must be positive".into()));
    }
    let dim = 1usize << n;
    let mut dense = vec![0.0f64; dim];
    let shots = table.shots as f64;
    for (&k, &c) in &table.counts {
        dense[k] = c as f64 / shots;
    }
    let mut singular = false;
    for (partition, factor) in response.partitions.iter().zip(&response.factors) {
        let inv = invert_factor(factor, &mut singular)?;
        apply_factor_inverse(&mut dense, partition, &inv);
    }
    let mut entries: Vec<(usize, f64)> = dense
        .into_iter()
        .enumerate()
        .filter(|&(_, v)| v != 0.0)
        .collect();
    if entries.len() > top_k {
        entries.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()).then(a.0.cmp(&b.0)));
        entries.truncate(top_k);
    }
    let total: f64 = entries.iter().map(|&(_, v)| v).sum();
    if total.abs() < 1e-12 {
        return Err(Error::Numeric("quasi-distribution mass vanished under truncation".into()));
    }
    let entries: BTreeMap<usize, f64> = entries.into_iter().map(|(k, v)| (k, v / total)).collect();
    Ok(RemOutcome {
        quasi: QuasiDistribution { num_qubits: n, entries },
        singular_factor: singular,
    })
}

const FACTOR_PINV_TOL: f64 = 1e-10;

fn invert_factor(factor: &DMatrix<f64>, singular: &mut bool) -> Result<DMatrix<f64>> {
    let svd = factor.clone().svd(true, true);
    let max_sv = svd.singular_values.iter().copied().fold(0.0, f64::max);
    if svd.singular_values.iter().any(|&s| s <= FACTOR_PINV_TOL * max_sv) {
        *singular = true;
    }
    svd.pseudo_inverse(FACTOR_PINV_TOL * max_sv)
        .map_err(|e| Error::Numeric(format!("factor pseudo-inverse: {e}")))
}

/// Applies a per-partition matrix to the partition bits of a dense
/// distribution vector.
fn apply_factor_inverse(dense: &mut [f64], partition: &[usize], inv: &DMatrix<f64>) {
    let m = partition.len();
    let local_dim = 1usize << m;
    let scatter = |local: usize| -> usize {
        let mut bits = 0usize;
        for (k, &q) in partition.iter().enumerate() {
            bits |= ((local >> k) & 1) << q;
        }
        bits
    };
    let part_mask: usize = partition.iter().map(|&q| 1usize << q).sum();
    let mut local_vec = vec![0.0f64; local_dim];
    for rest in 0..dense.len() {
        if rest & part_mask != 0 {
            continue;
        }
        for (l, slot) in local_vec.iter_mut().enumerate() {
            *slot = dense[rest | scatter(l)];
        }
        for lp in 0..local_dim {
            let mut acc = 0.0;
            for (l, &v) in local_vec.iter().enumerate() {
                acc += inv[(lp, l)] * v;
            }
            dense[rest | scatter(lp)] = acc;
        }
    }
}

/// Exact Euclidean projection of the quasi-distribution onto the probability
/// simplex over its support: the minimizer of ‖t - q‖₂ subject to t ≥ 0 and
/// Σt = 1. Bitstrings outside the support keep zero mass.
pub fn project_positive(quasi: &QuasiDistribution) -> QuasiDistribution {
    let keys: Vec<usize> = quasi.entries.keys().copied().collect();
    let values: Vec<f64> = quasi.entries.values().copied().collect();
    let projected = project_onto_simplex(&values);
    let entries = keys
        .into_iter()
        .zip(projected)
        .filter(|&(_, v)| v > 0.0)
        .collect();
    QuasiDistribution { num_qubits: quasi.num_qubits, entries }
}

/// Held-style simplex projection: sort descending, find the pivot, shift and
/// clip.
fn project_onto_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut tau = 0.0;
    let mut found = false;
    for (j, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let candidate = (cumsum - 1.0) / (j as f64 + 1.0);
        if u - candidate > 0.0 {
            tau = candidate;
        } else {
            found = true;
            break;
        }
    }
    let _ = found;
    v.iter().map(|&x| (x - tau).max(0.0)).collect()
}

/// Energy from per-group quasi-distributions: the signed expectation of each
/// group's shot value, summed over groups. Used after REM, where counts have
/// been replaced by (possibly negative) pseudo-probabilities.
pub fn energy_from_quasi(
    quasis: &[QuasiDistribution],
    sum: &crate::hamiltonian::PauliSum,
    groups: &crate::hamiltonian::QwcGroups,
) -> Result<f64> {
    if quasis.len() != groups.groups.len() {
        return Err(Error::InvalidArgument(format!(
            "{} distributions for {} groups",
            quasis.len(),
            groups.groups.len()
        )));
    }
    let mut value = 0.0;
    for (quasi, group) in quasis.iter().zip(&groups.groups) {
        if quasi.num_qubits() != sum.num_qubits() {
            return Err(Error::DimensionMismatch("quasi-distribution qubit mismatch".into()));
        }
        value += quasi.expectation(|bits| crate::hamiltonian::group_shot_value(sum, group, bits));
    }
    Ok(value)
}

/// One point of a zero-noise extrapolation series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZnePoint {
    pub fold: u32,
    pub energy: f64,
    pub stderr: f64,
}

/// Energy-versus-fold series with strictly increasing odd folds.
#[derive(Debug, Clone)]
pub struct ZneSeries {
    points: Vec<ZnePoint>,
}

impl ZneSeries {
    pub fn new(points: Vec<ZnePoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("empty ZNE series".into()));
        }
        for w in points.windows(2) {
            if w[1].fold <= w[0].fold {
                return Err(Error::InvalidArgument("folds must be strictly increasing".into()));
            }
        }
        for p in &points {
            if p.fold % 2 == 0 {
                return Err(Error::InvalidArgument(format!("fold {} is even", p.fold)));
            }
            if !p.energy.is_finite() || !p.stderr.is_finite() || p.stderr < 0.0 {
                return Err(Error::Numeric(format!("bad ZNE point {p:?}")));
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[ZnePoint] {
        &self.points
    }

    /// CSV export with columns folds,energy,stderr.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("folds,energy,stderr\n");
        for p in &self.points {
            let _ = writeln!(out, "{},{},{}", p.fold, p.energy, p.stderr);
        }
        out
    }
}

/// Runs the energy pipeline on the globally folded circuit at each fold.
pub fn zne_run<F>(circuit: &Circuit, mut energy_pipeline: F, folds: &[u32]) -> Result<ZneSeries>
where
    F: FnMut(&Circuit) -> Result<EnergyEstimate>,
{
    if !circuit.is_bound() {
        return Err(Error::InvalidState("ZNE requires a bound circuit".into()));
    }
    let mut points = Vec::with_capacity(folds.len());
    for &fold in folds {
        let folded = circuit.fold_global(fold)?;
        let estimate = energy_pipeline(&folded)?;
        points.push(ZnePoint { fold, energy: estimate.value, stderr: estimate.stderr });
    }
    ZneSeries::new(points)
}

/// Least-squares polynomial fit in the fold variable, evaluated at fold 0.
pub fn polyfit_extrapolate(series: &ZneSeries, degree: usize) -> Result<f64> {
    let n = series.points.len();
    if degree >= n {
        return Err(Error::InvalidArgument(format!(
            "degree {degree} needs more than {n} points"
        )));
    }
    let phi = design_matrix(series, degree);
    let y = DVector::from_iterator(n, series.points.iter().map(|p| p.energy));
    let coeffs = phi
        .svd(true, true)
        .solve(&y, 1e-14)
        .map_err(|e| Error::Numeric(format!("polynomial fit: {e}")))?;
    Ok(coeffs[0])
}

fn design_matrix(series: &ZneSeries, degree: usize) -> DMatrix<f64> {
    let n = series.points.len();
    DMatrix::from_fn(n, degree + 1, |i, j| (series.points[i].fold as f64).powi(j as i32))
}

/// Bayesian polynomial regression result: posterior mean and standard
/// deviation of the zero-fold value, plus a flag when a zero stderr was
/// floored.
#[derive(Debug, Clone)]
pub struct BprExtrapolation {
    pub mean: f64,
    pub std: f64,
    pub stderr_floored: bool,
}

/// Bayesian linear regression on polynomial features with a zero-mean
/// Gaussian prior of variance `prior_sigma²` on each coefficient and
/// per-point Gaussian likelihoods of variance stderr_i². Returns the
/// posterior of the polynomial value at fold 0 (the intercept).
pub fn bpr_extrapolate(series: &ZneSeries, degree: usize) -> Result<BprExtrapolation> {
    bpr_extrapolate_with_prior(series, degree, DEFAULT_BPR_PRIOR_SIGMA)
}

pub fn bpr_extrapolate_with_prior(
    series: &ZneSeries,
    degree: usize,
    prior_sigma: f64,
) -> Result<BprExtrapolation> {
    let n = series.points.len();
    if degree >= n {
        return Err(Error::InvalidArgument(format!(
            "degree {degree} needs more than {n} points"
        )));
    }
    if prior_sigma <= 0.0 {
        return Err(Error::InvalidArgument("prior sigma must be positive".into()));
    }
    let mut floored = false;
    let weights: Vec<f64> = series
        .points
        .iter()
        .map(|p| {
            let s = if p.stderr < BPR_STDERR_FLOOR {
                floored = true;
                BPR_STDERR_FLOOR
            } else {
                p.stderr
            };
            1.0 / (s * s)
        })
        .collect();
    let phi = design_matrix(series, degree);
    let d = degree + 1;
    // Posterior precision A = σ_p⁻² I + Φᵀ Λ⁻¹ Φ.
    let mut a = DMatrix::<f64>::identity(d, d) / (prior_sigma * prior_sigma);
    let mut rhs = DVector::<f64>::zeros(d);
    for i in 0..n {
        let w = weights[i];
        let y = series.points[i].energy;
        for r in 0..d {
            rhs[r] += w * phi[(i, r)] * y;
            for c in 0..d {
                a[(r, c)] += w * phi[(i, r)] * phi[(i, c)];
            }
        }
    }
    let a_inv = a
        .try_inverse()
        .ok_or_else(|| Error::Numeric("singular posterior precision".into()))?;
    let mu = &a_inv * rhs;
    // Features at fold 0 are (1, 0, ..., 0): the intercept row/column.
    Ok(BprExtrapolation {
        mean: mu[0],
        std: a_inv[(0, 0)].max(0.0).sqrt(),
        stderr_floored: floored,
    })
}
