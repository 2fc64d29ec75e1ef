//! Pauli-sum Hamiltonians, qubit-wise-commuting grouping, shot-based energy
//! estimation, and a dense exact-diagonalization oracle.
//!
//! The Heisenberg Hamiltonian conserves total magnetization, so the dense
//! solve proceeds per fixed-popcount sector; each sector is still a full
//! dense symmetric eigenproblem. Eigenvalues are returned ascending and
//! ground vectors carry the phase convention "first nonzero component real
//! positive".

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::LatticeFragment;
use crate::simulator::{BasisLetter, ShotTable, StateVector};

/// Per-qubit Pauli symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PauliLetter {
    I,
    X,
    Y,
    Z,
}

impl PauliLetter {
    pub fn as_char(self) -> char {
        match self {
            PauliLetter::I => 'I',
            PauliLetter::X => 'X',
            PauliLetter::Y => 'Y',
            PauliLetter::Z => 'Z',
        }
    }
}

/// A tensor product of Pauli letters with a real coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliString {
    pub letters: Vec<PauliLetter>,
    pub coefficient: f64,
}

impl PauliString {
    /// String with `letter` at the given qubits and identity elsewhere.
    pub fn at(num_qubits: usize, positions: &[(usize, PauliLetter)], coefficient: f64) -> Self {
        let mut letters = vec![PauliLetter::I; num_qubits];
        for &(q, l) in positions {
            letters[q] = l;
        }
        Self { letters, coefficient }
    }

}

/// A Hermitian sum of Pauli strings (real coefficients, merged duplicates).
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    num_qubits: usize,
    terms: Vec<PauliString>,
}

impl PauliSum {
    pub fn new(num_qubits: usize, terms: Vec<PauliString>) -> Result<Self> {
        let mut merged: Vec<PauliString> = Vec::new();
        let mut index: BTreeMap<String, usize> = BTreeMap::new();
        for term in terms {
            if term.letters.len() != num_qubits {
                return Err(Error::DimensionMismatch(format!(
                    "term of {} letters in a {num_qubits}-qubit sum",
                    term.letters.len()
                )));
            }
            if !term.coefficient.is_finite() {
                return Err(Error::InvalidArgument("non-finite coefficient".into()));
            }
            let key: String = term.letters.iter().map(|l| l.as_char()).collect();
            match index.get(&key) {
                Some(&k) => merged[k].coefficient += term.coefficient,
                None => {
                    index.insert(key, merged.len());
                    merged.push(term);
                }
            }
        }
        Ok(Self { num_qubits, terms: merged })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn terms(&self) -> &[PauliString] {
        &self.terms
    }

    /// Letters-and-coefficient text form, one term per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for t in &self.terms {
            let letters: String = t.letters.iter().map(|l| l.as_char()).collect();
            let _ = writeln!(out, "{letters} {}", t.coefficient);
        }
        out
    }
}

/// The Heisenberg Pauli sum of a fragment: J_ij (XX + YY + ZZ) per edge.
pub fn heisenberg_from_lattice(fragment: &LatticeFragment) -> PauliSum {
    let n = fragment.num_sites();
    let mut terms = Vec::with_capacity(3 * fragment.edges().len());
    for edge in fragment.edges() {
        for letter in [PauliLetter::X, PauliLetter::Y, PauliLetter::Z] {
            terms.push(PauliString::at(
                n,
                &[(edge.i, letter), (edge.j, letter)],
                edge.coupling,
            ));
        }
    }
    PauliSum::new(n, terms).expect("edge terms are well-formed")
}

/// Heisenberg pair term σ_i·σ_j for a single pair.
pub fn pair_heisenberg(num_qubits: usize, i: usize, j: usize) -> Result<PauliSum> {
    if i == j || i >= num_qubits || j >= num_qubits {
        return Err(Error::InvalidArgument(format!("bad pair ({i},{j})")));
    }
    let terms = [PauliLetter::X, PauliLetter::Y, PauliLetter::Z]
        .into_iter()
        .map(|l| PauliString::at(num_qubits, &[(i, l), (j, l)], 1.0))
        .collect();
    PauliSum::new(num_qubits, terms)
}

/// Total spin component Σ_i σ^α_i in Pauli units.
pub fn total_spin_component(num_qubits: usize, letter: PauliLetter) -> PauliSum {
    let terms = (0..num_qubits)
        .map(|q| PauliString::at(num_qubits, &[(q, letter)], 1.0))
        .collect();
    PauliSum::new(num_qubits, terms).expect("single-letter terms are well-formed")
}

/// Total spin squared (Σ_i σ_i)² = 3N·I + 2 Σ_{i<j} σ_i·σ_j in Pauli units.
pub fn total_spin_squared(num_qubits: usize) -> PauliSum {
    let mut terms = vec![PauliString { letters: vec![PauliLetter::I; num_qubits], coefficient: 3.0 * num_qubits as f64 }];
    for i in 0..num_qubits {
        for j in (i + 1)..num_qubits {
            for letter in [PauliLetter::X, PauliLetter::Y, PauliLetter::Z] {
                terms.push(PauliString::at(num_qubits, &[(i, letter), (j, letter)], 2.0));
            }
        }
    }
    PauliSum::new(num_qubits, terms).expect("spin-squared terms are well-formed")
}

/// A qubit-wise-commuting group: shared per-qubit letters plus the indices of
/// the member terms.
#[derive(Debug, Clone)]
pub struct QwcGroup {
    pub basis: Vec<PauliLetter>,
    pub members: Vec<usize>,
}

impl QwcGroup {
    /// Measurement basis for the group; untouched qubits default to Z.
    pub fn measurement_basis(&self) -> Vec<BasisLetter> {
        self.basis
            .iter()
            .map(|l| match l {
                PauliLetter::I | PauliLetter::Z => BasisLetter::Z,
                PauliLetter::X => BasisLetter::X,
                PauliLetter::Y => BasisLetter::Y,
            })
            .collect()
    }
}

/// Result of greedy qubit-wise-commuting grouping.
#[derive(Debug, Clone)]
pub struct QwcGroups {
    pub groups: Vec<QwcGroup>,
}

/// Greedy first-fit grouping of qubit-wise commuting terms. For a Heisenberg
/// sum this yields exactly three groups (all-X, all-Y, all-Z).
pub fn qwc_group(sum: &PauliSum) -> QwcGroups {
    let mut groups: Vec<QwcGroup> = Vec::new();
    'terms: for (idx, term) in sum.terms().iter().enumerate() {
        'groups: for group in groups.iter_mut() {
            for (q, &letter) in term.letters.iter().enumerate() {
                if letter == PauliLetter::I {
                    continue;
                }
                if group.basis[q] != PauliLetter::I && group.basis[q] != letter {
                    continue 'groups;
                }
            }
            for (q, &letter) in term.letters.iter().enumerate() {
                if letter != PauliLetter::I {
                    group.basis[q] = letter;
                }
            }
            group.members.push(idx);
            continue 'terms;
        }
        groups.push(QwcGroup { basis: term.letters.clone(), members: vec![idx] });
    }
    QwcGroups { groups }
}

/// Shot-estimated energy with the empirical variance of grouped sampling:
/// the per-basis sample sets are independent, so Var(H) = Σ_P Var(H_P) with
/// the N-1 denominator, and stderr = √(Σ_P Var(H_P)/N_P), which reduces to
/// √(Var(H)/N) for an equal shot split.
#[derive(Debug, Clone)]
pub struct EnergyEstimate {
    pub value: f64,
    pub variance: f64,
    pub stderr: f64,
    pub shots_per_group: Vec<u64>,
}

/// Per-shot eigenvalue of the group's member terms on measured bits:
/// Σ_members coeff · Π_{q: letter ≠ I} (1 - 2·bit_q).
pub(crate) fn group_shot_value(sum: &PauliSum, group: &QwcGroup, bits: usize) -> f64 {
    let mut value = 0.0;
    for &m in &group.members {
        let term = &sum.terms()[m];
        let mut parity = 1.0;
        for (q, &letter) in term.letters.iter().enumerate() {
            if letter != PauliLetter::I && (bits >> q) & 1 == 1 {
                parity = -parity;
            }
        }
        value += term.coefficient * parity;
    }
    value
}

/// Estimates ⟨H⟩ from one shot table per group.
pub fn estimate_energy(
    tables: &[ShotTable],
    sum: &PauliSum,
    groups: &QwcGroups,
) -> Result<EnergyEstimate> {
    if tables.len() != groups.groups.len() {
        return Err(Error::InvalidArgument(format!(
            "{} tables for {} groups",
            tables.len(),
            groups.groups.len()
        )));
    }
    let mut value = 0.0;
    let mut variance = 0.0;
    let mut stderr_sq = 0.0;
    let mut shots_per_group = Vec::with_capacity(tables.len());
    for (table, group) in tables.iter().zip(&groups.groups) {
        if table.num_qubits() != sum.num_qubits() {
            return Err(Error::DimensionMismatch(format!(
                "table over {} qubits for a {}-qubit Hamiltonian",
                table.num_qubits(),
                sum.num_qubits()
            )));
        }
        let expected = group.measurement_basis();
        for (q, &letter) in group.basis.iter().enumerate() {
            if letter != PauliLetter::I && table.basis[q] != expected[q] {
                return Err(Error::InvalidArgument(format!(
                    "table basis {:?} does not match group letter {:?} on qubit {q}",
                    table.basis[q], letter
                )));
            }
        }
        if table.shots < 2 {
            return Err(Error::InvalidArgument(
                "need at least 2 shots per group for the empirical variance".into(),
            ));
        }
        let shots = table.shots as f64;
        let mut mean = 0.0;
        for (&bits, &count) in &table.counts {
            mean += count as f64 * group_shot_value(sum, group, bits);
        }
        mean /= shots;
        let mut var = 0.0;
        for (&bits, &count) in &table.counts {
            let dev = group_shot_value(sum, group, bits) - mean;
            var += count as f64 * dev * dev;
        }
        var /= shots - 1.0;
        value += mean;
        variance += var;
        stderr_sq += var / shots;
        shots_per_group.push(table.shots);
    }
    Ok(EnergyEstimate { value, variance, stderr: stderr_sq.sqrt(), shots_per_group })
}

/// Exact expectation ⟨ψ|H|ψ⟩ via sparse Pauli application.
pub fn expectation_exact(state: &StateVector, sum: &PauliSum) -> Result<f64> {
    if state.num_qubits() != sum.num_qubits() {
        return Err(Error::DimensionMismatch(format!(
            "{}-qubit state for a {}-qubit Hamiltonian",
            state.num_qubits(),
            sum.num_qubits()
        )));
    }
    let amps = state.amplitudes();
    let mut acc = Complex64::ZERO;
    for term in sum.terms() {
        let mut term_val = Complex64::ZERO;
        for (b, &amp) in amps.iter().enumerate() {
            if amp == Complex64::ZERO {
                continue;
            }
            let (target, phase) = apply_pauli_string(term, b);
            term_val += amps[target].conj() * phase * amp;
        }
        acc += term.coefficient * term_val;
    }
    if acc.im.abs() >= 1e-10 {
        return Err(Error::Numeric(format!(
            "expectation has imaginary part {}",
            acc.im
        )));
    }
    Ok(acc.re)
}

/// Applies a Pauli string to basis index `b`: returns (target index, phase).
fn apply_pauli_string(term: &PauliString, b: usize) -> (usize, Complex64) {
    let mut target = b;
    let mut phase = Complex64::ONE;
    for (q, &letter) in term.letters.iter().enumerate() {
        let bit = (b >> q) & 1;
        match letter {
            PauliLetter::I => {}
            PauliLetter::X => target ^= 1 << q,
            PauliLetter::Y => {
                target ^= 1 << q;
                phase *= if bit == 0 {
                    Complex64::new(0.0, 1.0)
                } else {
                    Complex64::new(0.0, -1.0)
                };
            }
            PauliLetter::Z => {
                if bit == 1 {
                    phase = -phase;
                }
            }
        }
    }
    (target, phase)
}

/// H|ψ⟩ as a raw (unnormalized) amplitude vector.
pub fn apply_to_state(sum: &PauliSum, state: &StateVector) -> Result<Vec<Complex64>> {
    if state.num_qubits() != sum.num_qubits() {
        return Err(Error::DimensionMismatch("operator/state qubit mismatch".into()));
    }
    let amps = state.amplitudes();
    let mut out = vec![Complex64::ZERO; amps.len()];
    for term in sum.terms() {
        for (b, &amp) in amps.iter().enumerate() {
            if amp == Complex64::ZERO {
                continue;
            }
            let (target, phase) = apply_pauli_string(term, b);
            out[target] += term.coefficient * phase * amp;
        }
    }
    Ok(out)
}

/// Dense matrix of a Pauli sum; test oracle for small registers.
pub fn dense_matrix(sum: &PauliSum) -> Result<DMatrix<Complex64>> {
    if sum.num_qubits() > 12 {
        return Err(Error::SizeLimit("dense matrix limited to 12 qubits".into()));
    }
    let dim = 1usize << sum.num_qubits();
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for term in sum.terms() {
        for b in 0..dim {
            let (target, phase) = apply_pauli_string(term, b);
            m[(target, b)] += term.coefficient * phase;
        }
    }
    Ok(m)
}

/// Full spectrum and ground subspace of a fragment's Heisenberg Hamiltonian.
#[derive(Debug, Clone)]
pub struct Spectrum {
    /// All 2^n eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    pub ground_energy: f64,
    /// Orthonormal basis of the eigenspace within 1e-9 of the minimum.
    pub ground_subspace: Vec<StateVector>,
}

impl Spectrum {
    /// CSV export with columns index,value.
    pub fn eigenvalues_csv(&self) -> String {
        let mut out = String::from("index,value\n");
        for (i, v) in self.eigenvalues.iter().enumerate() {
            let _ = writeln!(out, "{i},{v}");
        }
        out
    }
}

const GROUND_DEGENERACY_TOL: f64 = 1e-9;

/// Dense exact diagonalization of the fragment Hamiltonian, blocked by the
/// conserved total magnetization.
pub fn exact_spectrum(fragment: &LatticeFragment) -> Result<Spectrum> {
    let n = fragment.num_sites();
    if n > 14 {
        return Err(Error::SizeLimit(format!(
            "dense diagonalization limited to 14 sites, got {n}"
        )));
    }
    let dim = 1usize << n;
    let edges: Vec<(usize, usize, f64)> = fragment
        .edges()
        .iter()
        .map(|e| (e.i, e.j, e.coupling))
        .collect();

    // Basis states grouped by popcount; H preserves the number of 1-bits.
    let mut sectors: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
    for b in 0..dim {
        sectors[b.count_ones() as usize].push(b);
    }

    let mut eigenvalues = Vec::with_capacity(dim);
    let mut ground: Vec<(f64, Vec<f64>, Vec<usize>)> = Vec::new();
    let mut min_energy = f64::INFINITY;

    for sector in &sectors {
        let d = sector.len();
        if d == 0 {
            continue;
        }
        let mut local_index = BTreeMap::new();
        for (pos, &b) in sector.iter().enumerate() {
            local_index.insert(b, pos);
        }
        let mut h = DMatrix::<f64>::zeros(d, d);
        for (pos, &b) in sector.iter().enumerate() {
            let mut diag = 0.0;
            for &(i, j, coupling) in &edges {
                let bi = (b >> i) & 1;
                let bj = (b >> j) & 1;
                if bi == bj {
                    diag += coupling;
                } else {
                    diag -= coupling;
                    // (XX + YY)|b⟩ = 2|b with bits i,j swapped⟩ when b_i ≠ b_j.
                    let flipped = b ^ (1 << i) ^ (1 << j);
                    let fpos = local_index[&flipped];
                    h[(fpos, pos)] += 2.0 * coupling;
                }
            }
            h[(pos, pos)] = diag;
        }
        let eig = h.symmetric_eigen();
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        for &k in &order {
            let lambda = eig.eigenvalues[k];
            eigenvalues.push(lambda);
            if lambda < min_energy {
                min_energy = lambda;
            }
            if lambda - min_energy <= GROUND_DEGENERACY_TOL {
                ground.push((lambda, eig.eigenvectors.column(k).iter().copied().collect(), sector.clone()));
            }
        }
    }
    eigenvalues.sort_by(f64::total_cmp);

    // Keep only vectors still within tolerance of the global minimum, embed
    // into the full register, fix the sign convention, and orthonormalize.
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for (lambda, local, sector) in ground {
        if lambda - min_energy > GROUND_DEGENERACY_TOL {
            continue;
        }
        let mut full = DVector::<f64>::zeros(dim);
        for (pos, &b) in sector.iter().enumerate() {
            full[b] = local[pos];
        }
        // Gram-Schmidt against the accepted vectors (cross-sector vectors
        // are already orthogonal; in-sector degenerate vectors come out
        // orthogonal from the solver, this guards roundoff).
        for prev in &basis {
            let overlap = prev.dot(&full);
            full -= prev * overlap;
        }
        let norm = full.norm();
        if norm < 1e-8 {
            continue;
        }
        full /= norm;
        if let Some(first) = full.iter().find(|v| v.abs() > 1e-12) {
            if *first < 0.0 {
                full = -full;
            }
        }
        basis.push(full);
    }

    let ground_subspace = basis
        .into_iter()
        .map(|v| {
            StateVector::from_amplitudes(
                n,
                v.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            )
            .expect("eigenvectors are normalized")
        })
        .collect();

    Ok(Spectrum { eigenvalues, ground_energy: min_energy, ground_subspace })
}
