//! Statevector simulation: ideal evolution, Monte-Carlo Pauli trajectories,
//! basis-rotated shot sampling, and readout-confusion injection.
//!
//! All randomness flows through seeded ChaCha streams. `derive_seed` gives
//! independent substreams for (circuit, basis, trajectory) triples, so any
//! run is reproducible bit-for-bit from its top-level seed.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::circuit::{apply_gate, Angle, Circuit, Gate};
use crate::error::{Error, Result};

const NORM_TOL: f64 = 1e-10;

/// A normalized pure state over `num_qubits` qubits. Qubit `q` is bit `q`
/// of the amplitude index.
#[derive(Debug, Clone)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// The all-zeros computational basis state.
    pub fn zero(num_qubits: usize) -> Self {
        let mut amps = vec![Complex64::ZERO; 1 << num_qubits];
        amps[0] = Complex64::ONE;
        Self { num_qubits, amps }
    }

    /// Wraps an amplitude array, checking length and normalization.
    pub fn from_amplitudes(num_qubits: usize, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != 1 << num_qubits {
            return Err(Error::DimensionMismatch(format!(
                "expected {} amplitudes for {num_qubits} qubits, got {}",
                1usize << num_qubits,
                amps.len()
            )));
        }
        let state = Self { num_qubits, amps };
        let norm = state.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidArgument(format!(
                "state norm {norm} deviates from 1"
            )));
        }
        Ok(state)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Inner product ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::DimensionMismatch(format!(
                "{} vs {} qubits",
                self.num_qubits, other.num_qubits
            )));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Probability of measuring basis index `k` in the computational basis.
    pub fn probability(&self, k: usize) -> f64 {
        self.amps[k].norm_sqr()
    }
}

/// Depolarizing-plus-readout noise model.
///
/// After every gate of a noisy trajectory, a uniformly random non-identity
/// Pauli is inserted on the touched qubit(s) with probability `p1` (one-qubit
/// gates) or `p2` (two-qubit gates). `readout[q][measured][true]` are
/// column-stochastic confusion matrices applied at sampling time.
#[derive(Debug, Clone)]
pub struct NoiseModel {
    pub p1: f64,
    pub p2: f64,
    pub readout: Vec<[[f64; 2]; 2]>,
}

impl NoiseModel {
    /// No gate noise and identity readout.
    pub fn noiseless(num_qubits: usize) -> Self {
        Self { p1: 0.0, p2: 0.0, readout: vec![[[1.0, 0.0], [0.0, 1.0]]; num_qubits] }
    }

    /// Uniform depolarizing rates with a symmetric readout flip probability.
    pub fn uniform(num_qubits: usize, p1: f64, p2: f64, flip: f64) -> Self {
        Self {
            p1,
            p2,
            readout: vec![[[1.0 - flip, flip], [flip, 1.0 - flip]]; num_qubits],
        }
    }

    pub fn validate(&self, num_qubits: usize) -> Result<()> {
        for (name, p) in [("p1", self.p1), ("p2", self.p2)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidArgument(format!("{name}={p} outside [0,1]")));
            }
        }
        if self.readout.len() != num_qubits {
            return Err(Error::DimensionMismatch(format!(
                "readout matrices for {} qubits, expected {num_qubits}",
                self.readout.len()
            )));
        }
        for (q, m) in self.readout.iter().enumerate() {
            for col in 0..2 {
                let sum = m[0][col] + m[1][col];
                if (sum - 1.0).abs() > 1e-12 || m[0][col] < 0.0 || m[1][col] < 0.0 {
                    return Err(Error::InvalidArgument(format!(
                        "confusion column {col} of qubit {q} is not stochastic"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn has_identity_readout(&self) -> bool {
        self.readout
            .iter()
            .all(|m| m[0][0] == 1.0 && m[1][1] == 1.0)
    }
}

/// Measurement basis letter for one qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisLetter {
    X,
    Y,
    Z,
}

impl BasisLetter {
    pub fn as_char(self) -> char {
        match self {
            BasisLetter::X => 'X',
            BasisLetter::Y => 'Y',
            BasisLetter::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Result<Self> {
        match c {
            'X' => Ok(BasisLetter::X),
            'Y' => Ok(BasisLetter::Y),
            'Z' => Ok(BasisLetter::Z),
            other => Err(Error::Parse(format!("bad basis letter '{other}'"))),
        }
    }
}

/// Uniform per-qubit basis of a single letter.
pub fn uniform_basis(letter: BasisLetter, num_qubits: usize) -> Vec<BasisLetter> {
    vec![letter; num_qubits]
}

/// Bitstring→count table from sampling one basis-rotated circuit.
///
/// Counts are keyed by amplitude index; `bitstring_of` renders qubit 0 as
/// the first character.
#[derive(Debug, Clone, PartialEq)]
pub struct ShotTable {
    pub basis: Vec<BasisLetter>,
    pub counts: BTreeMap<usize, u64>,
    pub shots: u64,
    pub seed: u64,
}

impl ShotTable {
    pub fn num_qubits(&self) -> usize {
        self.basis.len()
    }

    /// Renders index `k` with qubit 0 first.
    pub fn bitstring_of(&self, k: usize) -> String {
        bitstring(k, self.num_qubits())
    }

    /// Serializes to the structured text form consumed by calibration and
    /// mitigation tooling.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let basis: String = self.basis.iter().map(|b| b.as_char()).collect();
        let _ = writeln!(out, "basis {basis}");
        let _ = writeln!(out, "seed {}", self.seed);
        let _ = writeln!(out, "shots {}", self.shots);
        let _ = writeln!(out, "counts {}", self.counts.len());
        for (&k, &c) in &self.counts {
            let _ = writeln!(out, "{} {}", self.bitstring_of(k), c);
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let mut expect = |key: &str| -> Result<String> {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("missing '{key}' line")))?;
            line.strip_prefix(key)
                .map(|r| r.trim().to_string())
                .ok_or_else(|| Error::Parse(format!("expected '{key} ...', got '{line}'")))
        };
        let basis: Vec<BasisLetter> = expect("basis")?
            .chars()
            .map(BasisLetter::from_char)
            .collect::<Result<_>>()?;
        let seed: u64 = expect("seed")?
            .parse()
            .map_err(|_| Error::Parse("bad seed".into()))?;
        let shots: u64 = expect("shots")?
            .parse()
            .map_err(|_| Error::Parse("bad shots".into()))?;
        let ncounts: usize = expect("counts")?
            .parse()
            .map_err(|_| Error::Parse("bad counts".into()))?;
        let mut counts = BTreeMap::new();
        let mut total = 0u64;
        for _ in 0..ncounts {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse("truncated count list".into()))?;
            let mut it = line.split_whitespace();
            let bits = it
                .next()
                .ok_or_else(|| Error::Parse("missing bitstring".into()))?;
            if bits.len() != basis.len() {
                return Err(Error::Parse(format!(
                    "bitstring '{bits}' length does not match basis"
                )));
            }
            let k = index_of_bitstring(bits)?;
            let c: u64 = it
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::Parse(format!("bad count in '{line}'")))?;
            total += c;
            counts.insert(k, c);
        }
        if total != shots {
            return Err(Error::Parse(format!(
                "counts sum to {total} but shots is {shots}"
            )));
        }
        Ok(Self { basis, counts, shots, seed })
    }

    /// Merges counts of another table with the same basis.
    pub fn merge(&mut self, other: &ShotTable) -> Result<()> {
        if self.basis != other.basis {
            return Err(Error::InvalidArgument("merging tables with different bases".into()));
        }
        for (&k, &c) in &other.counts {
            *self.counts.entry(k).or_insert(0) += c;
        }
        self.shots += other.shots;
        Ok(())
    }
}

/// Renders amplitude index `k` as a bitstring with qubit 0 first.
pub fn bitstring(k: usize, num_qubits: usize) -> String {
    (0..num_qubits)
        .map(|q| if k >> q & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Inverse of [`bitstring`].
pub fn index_of_bitstring(bits: &str) -> Result<usize> {
    let mut k = 0usize;
    for (q, c) in bits.chars().enumerate() {
        match c {
            '0' => {}
            '1' => k |= 1 << q,
            other => return Err(Error::Parse(format!("bad bit '{other}'"))),
        }
    }
    Ok(k)
}

/// SplitMix64-style derivation of an independent substream seed.
pub fn derive_seed(base: u64, salt: u64) -> u64 {
    let mut z = base ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Applies a bound circuit to a state, returning the evolved state.
pub fn evolve(state: &StateVector, circuit: &Circuit) -> Result<StateVector> {
    if !circuit.is_bound() {
        return Err(Error::InvalidState("cannot evolve an unbound circuit".into()));
    }
    if circuit.num_qubits() != state.num_qubits() {
        return Err(Error::DimensionMismatch(format!(
            "circuit on {} qubits applied to {}-qubit state",
            circuit.num_qubits(),
            state.num_qubits()
        )));
    }
    let mut out = state.clone();
    for gate in circuit.gates() {
        apply_gate(out.amplitudes_mut(), gate)?;
    }
    debug_assert!((out.norm() - 1.0).abs() < NORM_TOL);
    Ok(out)
}

const PAULI_1Q: [char; 3] = ['X', 'Y', 'Z'];

fn apply_pauli_char(amps: &mut [Complex64], q: usize, p: char) {
    let mask = 1usize << q;
    match p {
        'X' => {
            for i in 0..amps.len() {
                if i & mask == 0 {
                    amps.swap(i, i | mask);
                }
            }
        }
        'Y' => {
            let im = Complex64::new(0.0, 1.0);
            for i in 0..amps.len() {
                if i & mask == 0 {
                    let j = i | mask;
                    let (a, b) = (amps[i], amps[j]);
                    amps[i] = -im * b;
                    amps[j] = im * a;
                }
            }
        }
        'Z' => {
            for (i, amp) in amps.iter_mut().enumerate() {
                if i & mask != 0 {
                    *amp = -*amp;
                }
            }
        }
        _ => unreachable!(),
    }
}

/// Pauli letters inserted after one gate of a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Insertion {
    pub gate_index: usize,
    pub paulis: Vec<(usize, char)>,
}

/// Draws the Pauli-insertion decisions of one trajectory without touching
/// any state: after each gate, with probability `p1` (one-qubit) or `p2`
/// (two-qubit) a uniformly random non-identity Pauli lands on the touched
/// qubits. Deterministic for a fixed seed.
pub fn draw_insertions(circuit: &Circuit, noise: &NoiseModel, seed: u64) -> Vec<Insertion> {
    let mut rng = rng_from(seed);
    let mut insertions = Vec::new();
    for (gate_index, gate) in circuit.gates().iter().enumerate() {
        let qubits = gate.qubits();
        if qubits.len() == 1 {
            if noise.p1 > 0.0 && rng.random::<f64>() < noise.p1 {
                let p = PAULI_1Q[rng.random_range(0..3)];
                insertions.push(Insertion { gate_index, paulis: vec![(qubits[0], p)] });
            }
        } else if noise.p2 > 0.0 && rng.random::<f64>() < noise.p2 {
            // Uniform over the 15 non-identity two-qubit Paulis.
            let idx = rng.random_range(1..16usize);
            let (pa, pb) = (idx / 4, idx % 4);
            let mut paulis = Vec::new();
            if pa > 0 {
                paulis.push((qubits[0], PAULI_1Q[pa - 1]));
            }
            if pb > 0 {
                paulis.push((qubits[1], PAULI_1Q[pb - 1]));
            }
            insertions.push(Insertion { gate_index, paulis });
        }
    }
    insertions
}

/// Applies a bound circuit with the given Pauli insertions spliced in after
/// the gates they decorate.
pub fn evolve_with_insertions(
    state: &StateVector,
    circuit: &Circuit,
    insertions: &[Insertion],
) -> Result<StateVector> {
    if !circuit.is_bound() {
        return Err(Error::InvalidState("cannot evolve an unbound circuit".into()));
    }
    if circuit.num_qubits() != state.num_qubits() {
        return Err(Error::DimensionMismatch(format!(
            "circuit on {} qubits applied to {}-qubit state",
            circuit.num_qubits(),
            state.num_qubits()
        )));
    }
    let mut out = state.clone();
    let mut idx = 0;
    for (gate_index, gate) in circuit.gates().iter().enumerate() {
        apply_gate(out.amplitudes_mut(), gate)?;
        while idx < insertions.len() && insertions[idx].gate_index == gate_index {
            for &(q, p) in &insertions[idx].paulis {
                apply_pauli_char(out.amplitudes_mut(), q, p);
            }
            idx += 1;
        }
    }
    Ok(out)
}

/// Applies a bound circuit with one sampled Pauli-insertion trajectory;
/// equivalent to `evolve_with_insertions(state, circuit,
/// &draw_insertions(circuit, noise, seed))`.
pub fn evolve_trajectory(
    state: &StateVector,
    circuit: &Circuit,
    noise: &NoiseModel,
    seed: u64,
) -> Result<StateVector> {
    noise.validate(state.num_qubits())?;
    let insertions = draw_insertions(circuit, noise, seed);
    evolve_with_insertions(state, circuit, &insertions)
}

/// Rotation mapping the chosen per-qubit eigenbasis onto the computational
/// basis: X uses H; Y uses Rz(-π/2) followed by H.
pub fn basis_rotation(basis: &[BasisLetter]) -> Result<Circuit> {
    let mut gates = Vec::new();
    for (q, letter) in basis.iter().enumerate() {
        match letter {
            BasisLetter::Z => {}
            BasisLetter::X => gates.push(Gate::H { q }),
            BasisLetter::Y => {
                gates.push(Gate::Rz { q, angle: Angle::Fixed(-PI / 2.0) });
                gates.push(Gate::H { q });
            }
        }
    }
    Circuit::new(basis.len().max(1), gates)
}

/// Rotates into the requested basis and samples the Z-basis distribution.
pub fn sample(
    state: &StateVector,
    basis: &[BasisLetter],
    shots: u64,
    seed: u64,
) -> Result<ShotTable> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be at least 1".into()));
    }
    if basis.len() != state.num_qubits() {
        return Err(Error::DimensionMismatch(format!(
            "basis of {} letters for {}-qubit state",
            basis.len(),
            state.num_qubits()
        )));
    }
    let rotated = evolve(state, &basis_rotation(basis)?)?;
    let counts = draw_counts(&cumulative_probabilities(&rotated), shots, seed);
    Ok(ShotTable { basis: basis.to_vec(), counts, shots, seed })
}

/// Running sums of |amplitude|² in index order.
pub fn cumulative_probabilities(state: &StateVector) -> Vec<f64> {
    let mut cumulative = Vec::with_capacity(state.amplitudes().len());
    let mut acc = 0.0f64;
    for amp in state.amplitudes() {
        acc += amp.norm_sqr();
        cumulative.push(acc);
    }
    cumulative
}

/// Draws `shots` basis indices from a cumulative distribution.
pub fn draw_counts(cumulative: &[f64], shots: u64, seed: u64) -> BTreeMap<usize, u64> {
    let total = *cumulative.last().expect("non-empty distribution");
    let mut rng = rng_from(seed);
    let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
    for _ in 0..shots {
        let u = rng.random::<f64>() * total;
        let k = cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1);
        *counts.entry(k).or_insert(0) += 1;
    }
    counts
}

/// Flips recorded bits independently per qubit according to the confusion
/// matrices of `noise`. The shot total is preserved; flips are realized with
/// binomial splits per (bitstring, qubit), which is distributionally
/// identical to flipping each shot independently.
pub fn apply_readout_noise(table: &ShotTable, noise: &NoiseModel, seed: u64) -> Result<ShotTable> {
    let n = table.num_qubits();
    noise.validate(n)?;
    if noise.has_identity_readout() {
        return Ok(table.clone());
    }
    let mut rng = rng_from(seed);
    let mut current = table.counts.clone();
    for q in 0..n {
        let m = &noise.readout[q];
        let mut next: BTreeMap<usize, u64> = BTreeMap::new();
        for (&k, &c) in &current {
            let bit = (k >> q & 1) as usize;
            // P(measured = 1-bit | true = bit)
            let p_flip = m[1 - bit][bit];
            let flipped = if p_flip <= 0.0 {
                0
            } else if p_flip >= 1.0 {
                c
            } else {
                Binomial::new(c, p_flip)
                    .map_err(|e| Error::Numeric(format!("binomial: {e}")))?
                    .sample(&mut rng)
            };
            if flipped > 0 {
                *next.entry(k ^ (1 << q)).or_insert(0) += flipped;
            }
            if c - flipped > 0 {
                *next.entry(k).or_insert(0) += c - flipped;
            }
        }
        current = next;
    }
    Ok(ShotTable {
        basis: table.basis.clone(),
        counts: current,
        shots: table.shots,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn h_on(q: usize, n: usize) -> Circuit {
        Circuit::new(n, vec![Gate::H { q }]).unwrap()
    }

    /// Bell-pair singlet (|01⟩ - |10⟩)/√2 on two qubits.
    fn singlet_pair() -> StateVector {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        StateVector::from_amplitudes(2, vec![
            Complex64::ZERO,
            Complex64::new(s, 0.0),
            Complex64::new(-s, 0.0),
            Complex64::ZERO,
        ])
        .unwrap()
    }

    #[test]
    fn h_on_zero_gives_plus() {
        let out = evolve(&StateVector::zero(1), &h_on(0, 1)).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(out.amplitudes()[0].re, s, epsilon = 1e-15);
        assert_abs_diff_eq!(out.amplitudes()[1].re, s, epsilon = 1e-15);
    }

    #[test]
    fn empty_circuit_is_identity() {
        let state = evolve(&StateVector::zero(2), &h_on(0, 2)).unwrap();
        let out = evolve(&state, &Circuit::new(2, vec![]).unwrap()).unwrap();
        assert_eq!(out.amplitudes(), state.amplitudes());
    }

    #[test]
    fn evolve_rejects_unbound_circuit() {
        let c = Circuit::new(1, vec![Gate::Ry { q: 0, angle: Angle::Slot(0) }]).unwrap();
        assert!(evolve(&StateVector::zero(1), &c).is_err());
    }

    #[test]
    fn evolve_is_linear_on_random_instances() {
        let mut rng = rng_from(11);
        for _ in 0..10 {
            let n = 3;
            let dim = 1 << n;
            let random_state = |rng: &mut ChaCha8Rng| {
                let raw: Vec<Complex64> = (0..dim)
                    .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                    .collect();
                let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                StateVector::from_amplitudes(n, raw.into_iter().map(|z| z / norm).collect())
                    .unwrap()
            };
            let psi = random_state(&mut rng);
            let phi = random_state(&mut rng);
            let alpha = Complex64::new(0.6, -0.3);
            let beta = Complex64::new(0.2, 0.7);
            let circuit = Circuit::new(n, vec![
                Gate::H { q: 0 },
                Gate::Ry { q: 1, angle: Angle::Fixed(0.8) },
                Gate::Cnot { control: 0, target: 2 },
                Gate::Rz { q: 2, angle: Angle::Fixed(-0.4) },
                Gate::Cz { a: 1, b: 2 },
            ]).unwrap();
            let mut combo: Vec<Complex64> = psi
                .amplitudes()
                .iter()
                .zip(phi.amplitudes())
                .map(|(a, b)| alpha * a + beta * b)
                .collect();
            for gate in circuit.gates() {
                apply_gate(&mut combo, gate).unwrap();
            }
            let upsi = evolve(&psi, &circuit).unwrap();
            let uphi = evolve(&phi, &circuit).unwrap();
            for k in 0..dim {
                let expect = alpha * upsi.amplitudes()[k] + beta * uphi.amplitudes()[k];
                assert!((combo[k] - expect).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn norm_preserved_after_every_gate() {
        let circuit = Circuit::new(3, vec![
            Gate::H { q: 0 },
            Gate::SqrtX { q: 1 },
            Gate::Ry { q: 2, angle: Angle::Fixed(1.1) },
            Gate::Cnot { control: 0, target: 1 },
            Gate::Cz { a: 0, b: 2 },
            Gate::Rz { q: 1, angle: Angle::Fixed(2.2) },
            Gate::X { q: 2 },
        ]).unwrap();
        let mut state = StateVector::zero(3);
        for gate in circuit.gates() {
            apply_gate(state.amplitudes_mut(), gate).unwrap();
            assert_abs_diff_eq!(state.norm(), 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn sample_deterministic_given_seed() {
        let state = evolve(&StateVector::zero(2), &h_on(0, 2)).unwrap();
        let a = sample(&state, &uniform_basis(BasisLetter::Z, 2), 5000, 7).unwrap();
        let b = sample(&state, &uniform_basis(BasisLetter::Z, 2), 5000, 7).unwrap();
        assert_eq!(a, b);
        let c = sample(&state, &uniform_basis(BasisLetter::Z, 2), 5000, 8).unwrap();
        assert_ne!(a.counts, c.counts);
    }

    #[test]
    fn sample_z_on_zero_state() {
        let t = sample(&StateVector::zero(1), &uniform_basis(BasisLetter::Z, 1), 100, 3).unwrap();
        assert_eq!(t.counts.get(&0), Some(&100));
        assert_eq!(t.counts.len(), 1);
        assert!(sample(&StateVector::zero(1), &uniform_basis(BasisLetter::Z, 1), 0, 3).is_err());
    }

    #[test]
    fn sample_x_on_plus_state() {
        let plus = evolve(&StateVector::zero(1), &h_on(0, 1)).unwrap();
        let t = sample(&plus, &uniform_basis(BasisLetter::X, 1), 100, 3).unwrap();
        assert_eq!(t.counts.get(&0), Some(&100));
    }

    #[test]
    fn sample_y_on_y_eigenstate() {
        // (|0⟩ + i|1⟩)/√2 is the +1 eigenstate of Y.
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let yplus = StateVector::from_amplitudes(1, vec![
            Complex64::new(s, 0.0),
            Complex64::new(0.0, s),
        ]).unwrap();
        let t = sample(&yplus, &uniform_basis(BasisLetter::Y, 1), 200, 5).unwrap();
        assert_eq!(t.counts.get(&0), Some(&200));
    }

    #[test]
    fn singlet_z_sampling_is_anticorrelated() {
        let t = sample(&singlet_pair(), &uniform_basis(BasisLetter::Z, 2), 100_000, 17).unwrap();
        let c01 = *t.counts.get(&0b01).unwrap_or(&0);
        let c10 = *t.counts.get(&0b10).unwrap_or(&0);
        assert_eq!(c01 + c10, 100_000);
        assert_eq!(*t.counts.get(&0b00).unwrap_or(&0), 0);
        assert_eq!(*t.counts.get(&0b11).unwrap_or(&0), 0);
        // Each outcome is Binomial(1e5, 1/2): 4σ = 4·√(1e5·0.25) ≈ 632.
        let dev = (c01 as f64 - 50_000.0).abs();
        assert!(dev < 4.0 * (100_000f64 * 0.25).sqrt(), "deviation {dev}");
    }

    #[test]
    fn trajectory_with_zero_noise_matches_ideal() {
        let circuit = Circuit::new(2, vec![
            Gate::H { q: 0 },
            Gate::Cnot { control: 0, target: 1 },
            Gate::Ry { q: 1, angle: Angle::Fixed(0.9) },
        ]).unwrap();
        let ideal = evolve(&StateVector::zero(2), &circuit).unwrap();
        let noisy = evolve_trajectory(
            &StateVector::zero(2),
            &circuit,
            &NoiseModel::noiseless(2),
            99,
        ).unwrap();
        for (a, b) in ideal.amplitudes().iter().zip(noisy.amplitudes()) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn certain_two_qubit_noise_hits_all_15_paulis_uniformly() {
        // p2 = 1 on a single CNOT: every trajectory inserts one of the 15
        // non-identity Paulis. Identify which by comparing statevectors.
        let circuit = Circuit::new(2, vec![Gate::Cnot { control: 0, target: 1 }]).unwrap();
        let base = {
            // A generic product state: no Pauli leaves it invariant, so all
            // 16 insertion outcomes are pairwise distinct.
            let prep = Circuit::new(2, vec![
                Gate::Ry { q: 0, angle: Angle::Fixed(0.7) },
                Gate::Ry { q: 1, angle: Angle::Fixed(1.2) },
                Gate::Rz { q: 0, angle: Angle::Fixed(0.4) },
                Gate::Rz { q: 1, angle: Angle::Fixed(-0.9) },
            ]).unwrap();
            evolve(&StateVector::zero(2), &prep).unwrap()
        };
        let noise = NoiseModel { p1: 0.0, p2: 1.0, readout: NoiseModel::noiseless(2).readout };
        // Precompute the 16 reference states P·CNOT|ψ⟩ for all Pauli pairs.
        let mut refs = Vec::new();
        for idx in 0..16usize {
            let mut amps = base.amplitudes().to_vec();
            apply_gate(&mut amps, &Gate::Cnot { control: 0, target: 1 }).unwrap();
            let (pa, pb) = (idx / 4, idx % 4);
            if pa > 0 {
                apply_pauli_char(&mut amps, 0, PAULI_1Q[pa - 1]);
            }
            if pb > 0 {
                apply_pauli_char(&mut amps, 1, PAULI_1Q[pb - 1]);
            }
            refs.push(amps);
        }
        for a in 0..16 {
            for b in (a + 1)..16 {
                let coincide = refs[a]
                    .iter()
                    .zip(&refs[b])
                    .all(|(x, y)| (x - y).norm() < 1e-9);
                assert!(!coincide, "references {a} and {b} coincide");
            }
        }
        let mut hits = [0u64; 16];
        let trials = 10_000u64;
        for t in 0..trials {
            let out = evolve_trajectory(&base, &circuit, &noise, derive_seed(1234, t)).unwrap();
            let which = refs
                .iter()
                .position(|r| {
                    r.iter()
                        .zip(out.amplitudes())
                        .all(|(a, b)| (a - b).norm() < 1e-12)
                })
                .expect("trajectory output matches a Pauli insertion");
            hits[which] += 1;
        }
        assert_eq!(hits[0], 0, "identity insertion must never occur at p2=1");
        // Binomial(10^4, 1/15): mean ≈ 666.7, σ ≈ 24.9.
        let sigma = (trials as f64 * (1.0 / 15.0) * (14.0 / 15.0)).sqrt();
        for (idx, &h) in hits.iter().enumerate().skip(1) {
            let dev = (h as f64 - trials as f64 / 15.0).abs();
            assert!(dev < 4.0 * sigma, "pauli {idx}: count {h} deviates {dev}");
        }
    }

    #[test]
    fn readout_identity_is_noop_and_flip_one_forces_bit() {
        let t = sample(&StateVector::zero(2), &uniform_basis(BasisLetter::Z, 2), 1000, 5).unwrap();
        let id = apply_readout_noise(&t, &NoiseModel::noiseless(2), 1).unwrap();
        assert_eq!(id.counts, t.counts);
        // P(measured 1 | true 0) = 1 on qubit 1.
        let mut noise = NoiseModel::noiseless(2);
        noise.readout[1] = [[0.0, 0.0], [1.0, 1.0]];
        let forced = apply_readout_noise(&t, &noise, 1).unwrap();
        assert_eq!(forced.counts.get(&0b10), Some(&1000));
    }

    #[test]
    fn symmetric_flip_rate_matches_binomial() {
        let t = sample(&StateVector::zero(1), &uniform_basis(BasisLetter::Z, 1), 100_000, 5).unwrap();
        let noisy = apply_readout_noise(&t, &NoiseModel::uniform(1, 0.0, 0.0, 0.05), 21).unwrap();
        let ones = *noisy.counts.get(&1).unwrap_or(&0) as f64;
        let sigma = (100_000f64 * 0.05 * 0.95).sqrt();
        assert!((ones - 5000.0).abs() < 4.0 * sigma, "ones = {ones}");
        assert_eq!(noisy.shots, 100_000);
        assert_eq!(noisy.counts.values().sum::<u64>(), 100_000);
    }

    #[test]
    fn chi_square_goodness_of_fit_across_seeds() {
        // Sampling matches |amplitude|² at 10^5 shots: χ² test on the
        // 8-outcome distribution of a 3-qubit state, 100 seeds. Critical
        // value for dof=7 at p=0.001 is 24.322; expected failures per seed
        // are 0.1%, so over 100 seeds allow up to 3 (P(>3) ≈ 4e-6).
        let circuit = Circuit::new(3, vec![
            Gate::H { q: 0 },
            Gate::Ry { q: 1, angle: Angle::Fixed(0.7) },
            Gate::Cnot { control: 0, target: 1 },
            Gate::Ry { q: 2, angle: Angle::Fixed(2.1) },
            Gate::Cnot { control: 1, target: 2 },
        ]).unwrap();
        let state = evolve(&StateVector::zero(3), &circuit).unwrap();
        let probs: Vec<f64> = (0..8).map(|k| state.probability(k)).collect();
        let shots = 100_000u64;
        let mut failures = 0;
        for seed in 0..100u64 {
            let t = sample(&state, &uniform_basis(BasisLetter::Z, 3), shots, seed).unwrap();
            let chi2: f64 = (0..8)
                .map(|k| {
                    let expected = probs[k] * shots as f64;
                    let observed = *t.counts.get(&k).unwrap_or(&0) as f64;
                    if expected > 0.0 {
                        (observed - expected).powi(2) / expected
                    } else {
                        0.0
                    }
                })
                .sum();
            if chi2 > 24.322 {
                failures += 1;
            }
        }
        assert!(failures <= 3, "{failures} of 100 seeds failed the χ² test");
    }

    #[test]
    fn shot_table_text_round_trip() {
        let state = evolve(&StateVector::zero(2), &h_on(0, 2)).unwrap();
        let t = sample(&state, &[BasisLetter::X, BasisLetter::Y], 512, 9).unwrap();
        let parsed = ShotTable::from_text(&t.to_text()).unwrap();
        assert_eq!(parsed, t);
    }
}
