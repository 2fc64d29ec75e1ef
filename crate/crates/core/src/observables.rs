//! Ground-state characterization: spin-spin correlations, the static spin
//! structure factor over the Brillouin zone, similarity metrics, dimer-state
//! constructors, and fidelities.
//!
//! Correlations are reported in Pauli units ⟨σ_i·σ_j⟩ = ⟨XX + YY + ZZ⟩, so a
//! singlet pair reads -3 and the diagonal is 3. The spin-operator convention
//! S = (ħ/2)σ differs by a factor of 4 and is not used anywhere.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hamiltonian::{expectation_exact, pair_heisenberg};
use crate::lattice::{LatticeFragment, MomentumPoint};
use crate::mitigation::QuasiDistribution;
use crate::simulator::{BasisLetter, ShotTable, StateVector};

/// One pair's correlation value with its standard error (zero on exact and
/// quasi-distribution paths).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairCorrelation {
    pub i: usize,
    pub j: usize,
    pub value: f64,
    pub stderr: f64,
}

/// Pairwise ⟨σ_i·σ_j⟩ values; the diagonal is implicitly 3.
#[derive(Debug, Clone)]
pub struct CorrelationTable {
    num_sites: usize,
    pairs: BTreeMap<(usize, usize), (f64, f64)>,
}

impl CorrelationTable {
    pub fn new(num_sites: usize, pairs: Vec<PairCorrelation>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for p in pairs {
            if p.i >= num_sites || p.j >= num_sites || p.i == p.j {
                return Err(Error::InvalidArgument(format!("bad pair ({},{})", p.i, p.j)));
            }
            let key = (p.i.min(p.j), p.i.max(p.j));
            if map.insert(key, (p.value, p.stderr)).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate pair {key:?}")));
            }
        }
        Ok(Self { num_sites, pairs: map })
    }

    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    pub fn get(&self, i: usize, j: usize) -> Option<(f64, f64)> {
        if i == j {
            return Some((3.0, 0.0));
        }
        self.pairs.get(&(i.min(j), i.max(j))).copied()
    }

    pub fn pairs(&self) -> impl Iterator<Item = PairCorrelation> + '_ {
        self.pairs
            .iter()
            .map(|(&(i, j), &(value, stderr))| PairCorrelation { i, j, value, stderr })
    }

    pub fn is_complete(&self) -> bool {
        self.pairs.len() == self.num_sites * (self.num_sites - 1) / 2
    }

    /// CSV export with columns i,j,value,stderr.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("i,j,value,stderr\n");
        for p in self.pairs() {
            let _ = writeln!(out, "{},{},{},{}", p.i, p.j, p.value, p.stderr);
        }
        out
    }
}

/// Exact ⟨σ_i·σ_j⟩ on a statevector.
pub fn spin_correlation_exact(state: &StateVector, i: usize, j: usize) -> Result<f64> {
    let sum = pair_heisenberg(state.num_qubits(), i, j)?;
    expectation_exact(state, &sum)
}

fn pair_parity(bits: usize, i: usize, j: usize) -> f64 {
    if (bits >> i & 1) == (bits >> j & 1) {
        1.0
    } else {
        -1.0
    }
}

fn find_table<'a>(tables: &'a [ShotTable], letter: BasisLetter) -> Result<&'a ShotTable> {
    tables
        .iter()
        .find(|t| t.basis.iter().all(|&b| b == letter))
        .ok_or_else(|| {
            Error::InvalidArgument(format!(
                "no uniform {}-basis table supplied",
                letter.as_char()
            ))
        })
}

/// Sampled ⟨σ_i·σ_j⟩ from the three uniform-basis shot tables (the same
/// tables used for the grouped energy estimate). Returns (value, stderr)
/// with the per-basis empirical variances combined as independent samples.
pub fn spin_correlation_sampled(
    tables: &[ShotTable],
    i: usize,
    j: usize,
) -> Result<(f64, f64)> {
    let mut value = 0.0;
    let mut stderr_sq = 0.0;
    for letter in [BasisLetter::X, BasisLetter::Y, BasisLetter::Z] {
        let table = find_table(tables, letter)?;
        if i >= table.num_qubits() || j >= table.num_qubits() || i == j {
            return Err(Error::InvalidArgument(format!("bad pair ({i},{j})")));
        }
        if table.shots < 2 {
            return Err(Error::InvalidArgument("need at least 2 shots per basis".into()));
        }
        let shots = table.shots as f64;
        let mut mean = 0.0;
        for (&bits, &count) in &table.counts {
            mean += count as f64 * pair_parity(bits, i, j);
        }
        mean /= shots;
        let mut var = 0.0;
        for (&bits, &count) in &table.counts {
            let dev = pair_parity(bits, i, j) - mean;
            var += count as f64 * dev * dev;
        }
        var /= shots - 1.0;
        value += mean;
        stderr_sq += var / shots;
    }
    Ok((value, stderr_sq.sqrt()))
}

/// All-pairs exact correlations of a statevector.
pub fn all_pairs_exact(state: &StateVector) -> Result<CorrelationTable> {
    let n = state.num_qubits();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            pairs.push(PairCorrelation {
                i,
                j,
                value: spin_correlation_exact(state, i, j)?,
                stderr: 0.0,
            });
        }
    }
    CorrelationTable::new(n, pairs)
}

/// All-pairs correlations averaged over an orthonormal state ensemble (e.g.
/// a degenerate ground subspace with equal weights).
pub fn all_pairs_ensemble(states: &[StateVector]) -> Result<CorrelationTable> {
    if states.is_empty() {
        return Err(Error::InvalidArgument("empty ensemble".into()));
    }
    let n = states[0].num_qubits();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let mut value = 0.0;
            for s in states {
                value += spin_correlation_exact(s, i, j)?;
            }
            pairs.push(PairCorrelation { i, j, value: value / states.len() as f64, stderr: 0.0 });
        }
    }
    CorrelationTable::new(n, pairs)
}

/// All-pairs sampled correlations from the three uniform-basis tables.
pub fn all_pairs_sampled(tables: &[ShotTable]) -> Result<CorrelationTable> {
    let n = find_table(tables, BasisLetter::Z)?.num_qubits();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let (value, stderr) = spin_correlation_sampled(tables, i, j)?;
            pairs.push(PairCorrelation { i, j, value, stderr });
        }
    }
    CorrelationTable::new(n, pairs)
}

/// All-pairs correlations from per-basis quasi-distributions (the REM path);
/// stderr is not propagated through the inversion and reads 0.
pub fn all_pairs_from_quasi(
    dists: &[(BasisLetter, QuasiDistribution)],
) -> Result<CorrelationTable> {
    let get = |letter: BasisLetter| -> Result<&QuasiDistribution> {
        dists
            .iter()
            .find(|(b, _)| *b == letter)
            .map(|(_, d)| d)
            .ok_or_else(|| {
                Error::InvalidArgument(format!("no {}-basis distribution", letter.as_char()))
            })
    };
    let n = get(BasisLetter::Z)?.num_qubits();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let mut value = 0.0;
            for letter in [BasisLetter::X, BasisLetter::Y, BasisLetter::Z] {
                value += get(letter)?.expectation(|bits| pair_parity(bits, i, j));
            }
            pairs.push(PairCorrelation { i, j, value, stderr: 0.0 });
        }
    }
    CorrelationTable::new(n, pairs)
}

/// Static spin structure factor over a momentum grid.
#[derive(Debug, Clone)]
pub struct StructureFactorMap {
    points: Vec<MomentumPoint>,
    values: Vec<f64>,
}

impl StructureFactorMap {
    pub fn points(&self) -> &[MomentumPoint] {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// CSV export with columns qx,qy,S,inside_bz.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("qx,qy,S,inside_bz\n");
        for (p, v) in self.points.iter().zip(&self.values) {
            let _ = writeln!(out, "{},{},{},{}", p.q[0], p.q[1], v, u8::from(p.inside_bz));
        }
        out
    }
}

/// S(q) = (1/N) Σ_ij e^{iq·(r_i - r_j)} ⟨σ_i·σ_j⟩ with positions from the
/// fragment and the diagonal fixed at 3. Requires the complete all-pairs
/// table; the imaginary part must vanish (Hermitian correlation matrix) and
/// is checked before taking the real part.
pub fn structure_factor(
    correlations: &CorrelationTable,
    fragment: &LatticeFragment,
    grid: &[MomentumPoint],
) -> Result<StructureFactorMap> {
    let n = fragment.num_sites();
    if correlations.num_sites() != n {
        return Err(Error::DimensionMismatch(format!(
            "correlations over {} sites for a {n}-site fragment",
            correlations.num_sites()
        )));
    }
    if !correlations.is_complete() {
        return Err(Error::InvalidArgument(
            "structure factor needs all pair correlations".into(),
        ));
    }
    let positions: Vec<[f64; 2]> = fragment.sites().iter().map(|s| s.position).collect();
    let mut values = Vec::with_capacity(grid.len());
    for point in grid {
        values.push(structure_factor_at(correlations, &positions, point.q)?);
    }
    Ok(StructureFactorMap { points: grid.to_vec(), values })
}

/// S(q) at a single momentum.
pub fn structure_factor_at(
    correlations: &CorrelationTable,
    positions: &[[f64; 2]],
    q: [f64; 2],
) -> Result<f64> {
    let n = positions.len();
    let mut acc = Complex64::ZERO;
    for i in 0..n {
        for j in 0..n {
            let c = correlations
                .get(i, j)
                .ok_or_else(|| Error::InvalidArgument(format!("missing pair ({i},{j})")))?
                .0;
            let dr = [
                positions[i][0] - positions[j][0],
                positions[i][1] - positions[j][1],
            ];
            let phase = q[0] * dr[0] + q[1] * dr[1];
            acc += Complex64::from_polar(1.0, phase) * c;
        }
    }
    acc /= n as f64;
    if acc.im.abs() >= 1e-9 {
        return Err(Error::Numeric(format!(
            "structure factor has imaginary part {}",
            acc.im
        )));
    }
    Ok(acc.re)
}

/// Pearson correlation and mean-square error between two maps on identical
/// grids.
pub fn similarity(a: &StructureFactorMap, b: &StructureFactorMap) -> Result<(f64, f64)> {
    if a.points.len() != b.points.len() {
        return Err(Error::DimensionMismatch("grids of different sizes".into()));
    }
    for (pa, pb) in a.points.iter().zip(&b.points) {
        if (pa.q[0] - pb.q[0]).abs() > 1e-12 || (pa.q[1] - pb.q[1]).abs() > 1e-12 {
            return Err(Error::InvalidArgument("grids do not match".into()));
        }
    }
    let n = a.values.len() as f64;
    let mean_a = a.values.iter().sum::<f64>() / n;
    let mean_b = b.values.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    let mut mse = 0.0;
    for (&va, &vb) in a.values.iter().zip(&b.values) {
        let da = va - mean_a;
        let db = vb - mean_b;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
        mse += (va - vb) * (va - vb);
    }
    mse /= n;
    if var_a < 1e-30 || var_b < 1e-30 {
        return Err(Error::Numeric("Pearson undefined for a constant map".into()));
    }
    Ok((cov / (var_a * var_b).sqrt(), mse))
}

/// Policy for sites left out of a dimer covering.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UncoveredPolicy {
    /// Uncovered sites are set to |+⟩.
    Plus,
    /// Every site must be covered.
    Forbid,
}

/// Explicit product state of singlets [i,j] = (|0⟩_i|1⟩_j - |1⟩_i|0⟩_j)/√2
/// over a matching of fragment sites.
pub fn dimer_state(
    fragment: &LatticeFragment,
    covering: &[(usize, usize)],
    uncovered: UncoveredPolicy,
) -> Result<StateVector> {
    let n = fragment.num_sites();
    let mut used = vec![false; n];
    for &(i, j) in covering {
        if i >= n || j >= n || i == j {
            return Err(Error::InvalidArgument(format!("bad dimer pair ({i},{j})")));
        }
        if used[i] || used[j] {
            return Err(Error::InvalidArgument(format!(
                "site reused by dimer pair ({i},{j})"
            )));
        }
        used[i] = true;
        used[j] = true;
    }
    let free: Vec<usize> = (0..n).filter(|&s| !used[s]).collect();
    if uncovered == UncoveredPolicy::Forbid && !free.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "covering leaves sites {free:?} unpaired"
        )));
    }
    let dim = 1usize << n;
    let pair_amp = std::f64::consts::FRAC_1_SQRT_2;
    let mut amps = vec![Complex64::ZERO; dim];
    for (b, amp) in amps.iter_mut().enumerate() {
        let mut value = 1.0f64;
        for &(i, j) in covering {
            let bi = b >> i & 1;
            let bj = b >> j & 1;
            value *= match (bi, bj) {
                (0, 1) => pair_amp,
                (1, 0) => -pair_amp,
                _ => 0.0,
            };
            if value == 0.0 {
                break;
            }
        }
        if value != 0.0 {
            for _ in &free {
                value *= pair_amp;
            }
            *amp = Complex64::new(value, 0.0);
        }
    }
    StateVector::from_amplitudes(n, amps)
}

/// |⟨reference|state⟩|².
pub fn fidelity(state: &StateVector, reference: &StateVector) -> Result<f64> {
    Ok(reference.inner(state)?.norm_sqr())
}

/// ‖P|state⟩‖² for the projector onto the span of an orthonormal basis.
pub fn subspace_fidelity(state: &StateVector, basis: &[StateVector]) -> Result<f64> {
    if basis.is_empty() {
        return Err(Error::InvalidArgument("empty subspace basis".into()));
    }
    let mut acc = 0.0;
    for b in basis {
        acc += b.inner(state)?.norm_sqr();
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{exact_spectrum, expectation_exact, heisenberg_from_lattice};
    use crate::lattice::{build_star, build_triangle, momentum_grid};
    use approx::assert_abs_diff_eq;

    #[test]
    fn singlet_correlation_is_minus_three() {
        let tri = build_triangle();
        let state = dimer_state(&tri, &[(1, 2)], UncoveredPolicy::Plus).unwrap();
        assert_abs_diff_eq!(
            spin_correlation_exact(&state, 1, 2).unwrap(),
            -3.0,
            epsilon = 1e-12
        );
        // Pairs touching the free |+⟩ site vanish.
        assert_abs_diff_eq!(spin_correlation_exact(&state, 0, 1).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(spin_correlation_exact(&state, 2, 0).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn product_state_correlation() {
        let state = StateVector::zero(2);
        assert_abs_diff_eq!(
            spin_correlation_exact(&state, 0, 1).unwrap(),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn dimer_state_energies() {
        let tri = build_triangle();
        let tri_sum = heisenberg_from_lattice(&tri);
        let state = dimer_state(&tri, &[(1, 2)], UncoveredPolicy::Plus).unwrap();
        assert_abs_diff_eq!(expectation_exact(&state, &tri_sum).unwrap(), -3.0, epsilon = 1e-12);
        let star = build_star();
        let star_sum = heisenberg_from_lattice(&star);
        let covering: Vec<(usize, usize)> = (0..6).map(|k| (2 * k + 1, (2 * k + 2) % 12)).collect();
        let state = dimer_state(&star, &covering, UncoveredPolicy::Forbid).unwrap();
        assert_abs_diff_eq!(expectation_exact(&state, &star_sum).unwrap(), -18.0, epsilon = 1e-12);
        // The alternative covering pairs each corner with its own tip.
        let other: Vec<(usize, usize)> = (0..6).map(|k| (2 * k, 2 * k + 1)).collect();
        let state = dimer_state(&star, &other, UncoveredPolicy::Forbid).unwrap();
        assert_abs_diff_eq!(expectation_exact(&state, &star_sum).unwrap(), -18.0, epsilon = 1e-12);
    }

    #[test]
    fn dimer_state_rejects_overlap_and_uncovered() {
        let star = build_star();
        assert!(dimer_state(&star, &[(0, 1), (1, 2)], UncoveredPolicy::Plus).is_err());
        assert!(dimer_state(&star, &[(0, 1)], UncoveredPolicy::Forbid).is_err());
        // Empty covering on one site gives |+⟩.
        let single = crate::lattice::LatticeFragment::new(
            "site",
            vec![crate::lattice::Site { index: 0, position: [0.0, 0.0] }],
            vec![],
        );
        // A one-site fragment has no edges; connectivity is trivially true.
        let single = single.unwrap();
        let state = dimer_state(&single, &[], UncoveredPolicy::Plus).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(state.amplitudes()[0].re, s, epsilon = 1e-15);
        assert_abs_diff_eq!(state.amplitudes()[1].re, s, epsilon = 1e-15);
    }

    #[test]
    fn fidelity_basics() {
        let tri = build_triangle();
        let a = dimer_state(&tri, &[(1, 2)], UncoveredPolicy::Plus).unwrap();
        assert_abs_diff_eq!(fidelity(&a, &a).unwrap(), 1.0, epsilon = 1e-12);
        let b = StateVector::zero(3);
        let f = fidelity(&a, &b).unwrap();
        // The |000⟩ amplitude of |+⟩ ⊗ [1,2] vanishes.
        assert_abs_diff_eq!(f, 0.0, epsilon = 1e-12);
        // Orthogonal states.
        let x = StateVector::from_amplitudes(1, vec![Complex64::ONE, Complex64::ZERO]).unwrap();
        let y = StateVector::from_amplitudes(1, vec![Complex64::ZERO, Complex64::ONE]).unwrap();
        assert_abs_diff_eq!(fidelity(&x, &y).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn structure_factor_of_total_singlet_vanishes_at_zero_momentum() {
        let star = build_star();
        let covering: Vec<(usize, usize)> = (0..6).map(|k| (2 * k + 1, (2 * k + 2) % 12)).collect();
        let state = dimer_state(&star, &covering, UncoveredPolicy::Forbid).unwrap();
        let table = all_pairs_exact(&state).unwrap();
        let positions: Vec<[f64; 2]> = star.sites().iter().map(|s| s.position).collect();
        let s0 = structure_factor_at(&table, &positions, [0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(s0, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn diagonal_only_table_gives_constant_three() {
        let tri = build_triangle();
        let pairs = vec![
            PairCorrelation { i: 0, j: 1, value: 0.0, stderr: 0.0 },
            PairCorrelation { i: 1, j: 2, value: 0.0, stderr: 0.0 },
            PairCorrelation { i: 0, j: 2, value: 0.0, stderr: 0.0 },
        ];
        let table = CorrelationTable::new(3, pairs).unwrap();
        let grid = momentum_grid(5, 1.0).unwrap();
        let map = structure_factor(&table, &tri, &grid).unwrap();
        for &v in map.values() {
            assert_abs_diff_eq!(v, 3.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn structure_factor_requires_complete_table() {
        let tri = build_triangle();
        let table = CorrelationTable::new(
            3,
            vec![PairCorrelation { i: 0, j: 1, value: 0.0, stderr: 0.0 }],
        )
        .unwrap();
        let grid = momentum_grid(3, 1.0).unwrap();
        assert!(structure_factor(&table, &tri, &grid).is_err());
    }

    #[test]
    fn similarity_identities() {
        let star = build_star();
        let covering: Vec<(usize, usize)> = (0..6).map(|k| (2 * k + 1, (2 * k + 2) % 12)).collect();
        let state = dimer_state(&star, &covering, UncoveredPolicy::Forbid).unwrap();
        let table = all_pairs_exact(&state).unwrap();
        let grid = momentum_grid(15, 1.0).unwrap();
        let map = structure_factor(&table, &star, &grid).unwrap();
        let (pearson, mse) = similarity(&map, &map).unwrap();
        assert_abs_diff_eq!(pearson, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(mse, 0.0, epsilon = 1e-15);
        // Shift invariance of Pearson; MSE picks up the constant squared.
        let shifted = StructureFactorMap {
            points: map.points().to_vec(),
            values: map.values().iter().map(|v| v + 0.25).collect(),
        };
        let (pearson, mse) = similarity(&map, &shifted).unwrap();
        assert_abs_diff_eq!(pearson, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(mse, 0.0625, epsilon = 1e-12);
    }

    #[test]
    fn sum_rule_total_spin_positivity() {
        // Σ_{i≠j} ⟨σ_i·σ_j⟩ + 3N = ⟨(Σσ)²⟩ ≥ 0 on exact states.
        let star = build_star();
        let spectrum = exact_spectrum(&star).unwrap();
        for state in &spectrum.ground_subspace {
            let table = all_pairs_exact(state).unwrap();
            let off_diag: f64 = table.pairs().map(|p| 2.0 * p.value).sum();
            let total = off_diag + 3.0 * 12.0;
            assert!(total >= -1e-9, "sum rule violated: {total}");
            // Star ground states are total singlets: the sum rule saturates
            // at zero.
            assert_abs_diff_eq!(total, 0.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn correlation_range_on_exact_path() {
        let star = build_star();
        let spectrum = exact_spectrum(&star).unwrap();
        let table = all_pairs_ensemble(&spectrum.ground_subspace).unwrap();
        for p in table.pairs() {
            assert!((-3.0 - 1e-9..=1.0 + 1e-9).contains(&p.value), "pair {p:?}");
        }
    }

    #[test]
    fn exact_star_structure_factor_is_c6_symmetric() {
        // The ground ensemble is invariant under the C6 rotation, so S(q)
        // must equal S(Rq) pointwise.
        let star = build_star();
        let spectrum = exact_spectrum(&star).unwrap();
        let table = all_pairs_ensemble(&spectrum.ground_subspace).unwrap();
        let positions: Vec<[f64; 2]> = star.sites().iter().map(|s| s.position).collect();
        let rot = std::f64::consts::PI / 3.0;
        let (c, s) = (rot.cos(), rot.sin());
        for &q in &[[0.7, 0.2], [1.5, -0.4], [2.0, 1.0], [0.0, 2.1]] {
            let sq = structure_factor_at(&table, &positions, q).unwrap();
            let rq = [c * q[0] - s * q[1], s * q[0] + c * q[1]];
            let srq = structure_factor_at(&table, &positions, rq).unwrap();
            assert_abs_diff_eq!(sq, srq, epsilon = 1e-6);
        }
    }

    #[test]
    fn star_ground_structure_factor_pinned_at_symmetry_points() {
        // Dense-diagonalization oracle values of the ground-ensemble S(q)
        // at the zone center, corner, and edge midpoint.
        let star = build_star();
        let spectrum = exact_spectrum(&star).unwrap();
        let table = all_pairs_ensemble(&spectrum.ground_subspace).unwrap();
        let positions: Vec<[f64; 2]> = star.sites().iter().map(|s| s.position).collect();
        let k = crate::lattice::brillouin_zone_circumradius();
        let apothem = crate::lattice::reciprocal_basis_length() / 2.0;
        let m = [apothem * (3f64.sqrt() / 2.0), apothem * 0.5];
        let s_gamma = structure_factor_at(&table, &positions, [0.0, 0.0]).unwrap();
        let s_k = structure_factor_at(&table, &positions, [k, 0.0]).unwrap();
        let s_m = structure_factor_at(&table, &positions, m).unwrap();
        assert_abs_diff_eq!(s_gamma, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s_k, 2.500244379276641, epsilon = 1e-9);
        assert_abs_diff_eq!(s_m, 1.998044965786902, epsilon = 1e-9);
    }

    #[test]
    fn structure_factor_is_even_in_q() {
        let star = build_star();
        let covering: Vec<(usize, usize)> = (0..6).map(|k| (2 * k + 1, (2 * k + 2) % 12)).collect();
        let state = dimer_state(&star, &covering, UncoveredPolicy::Forbid).unwrap();
        let table = all_pairs_exact(&state).unwrap();
        let positions: Vec<[f64; 2]> = star.sites().iter().map(|s| s.position).collect();
        for &q in &[[0.9, 0.1], [1.2, -1.7]] {
            let plus = structure_factor_at(&table, &positions, q).unwrap();
            let minus = structure_factor_at(&table, &positions, [-q[0], -q[1]]).unwrap();
            assert_abs_diff_eq!(plus, minus, epsilon = 1e-10);
        }
    }
}
