//! Euclidean ansatz circuits, parameter-shift gradients, and the
//! Fubini-Study metric by two independent routes.
//!
//! Both ansätze place a single Ry per qubit, split across the two sides of
//! one entangling CNOT layer. With Ry(θ) = exp(-iθY/2) the per-slot
//! generator is Y/2, whose variance on the relevant layer states is exactly
//! 1/4, so the metric is the constant 0.25·I. The block-diagonal route
//! computes the per-layer generator covariances; the full numeric route
//! differentiates the statevector analytically and certifies that the
//! cross-layer blocks vanish.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::circuit::{Angle, Circuit, Gate};
use crate::error::{Error, Result};
use crate::hamiltonian::{PauliLetter, PauliString, PauliSum};
use crate::simulator::{evolve, StateVector};

/// Which side of the entangling layer a parameter slot sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerSide {
    PreEntangler,
    PostEntangler,
}

/// Per-slot metadata: the qubit the Ry acts on and its layer side. The
/// generator of every slot is Y/2 on that qubit.
#[derive(Debug, Clone)]
pub struct SlotInfo {
    pub qubit: usize,
    pub side: LayerSide,
}

/// A parametrized ansatz circuit plus its layer decomposition.
#[derive(Debug, Clone)]
pub struct AnsatzSpec {
    pub circuit: Circuit,
    pub slots: Vec<SlotInfo>,
}

impl AnsatzSpec {
    pub fn num_params(&self) -> usize {
        self.slots.len()
    }

    pub fn num_qubits(&self) -> usize {
        self.circuit.num_qubits()
    }

    /// Binds and evolves from |0...0⟩.
    pub fn prepare(&self, params: &[f64]) -> Result<StateVector> {
        let bound = self.circuit.bind(params)?;
        evolve(&StateVector::zero(self.num_qubits()), &bound)
    }
}

/// The three-qubit triangle ansatz: H on all qubits, Ry(θ0) on q0 and
/// Ry(θ1) on q2 before the CNOT chain 0→1→2, Ry(θ2) on q1 after it.
pub fn triangle_ansatz() -> AnsatzSpec {
    let gates = vec![
        Gate::H { q: 0 },
        Gate::H { q: 1 },
        Gate::H { q: 2 },
        Gate::Ry { q: 0, angle: Angle::Slot(0) },
        Gate::Ry { q: 2, angle: Angle::Slot(1) },
        Gate::Cnot { control: 0, target: 1 },
        Gate::Cnot { control: 1, target: 2 },
        Gate::Ry { q: 1, angle: Angle::Slot(2) },
    ];
    AnsatzSpec {
        circuit: Circuit::new(3, gates).expect("static circuit"),
        slots: vec![
            SlotInfo { qubit: 0, side: LayerSide::PreEntangler },
            SlotInfo { qubit: 2, side: LayerSide::PreEntangler },
            SlotInfo { qubit: 1, side: LayerSide::PostEntangler },
        ],
    }
}

/// The twelve-qubit star ansatz: H on all qubits; Ry(θ0..θ5) on the even
/// qubits before the entangler; CNOT chain 1→2→...→11 closed by 11→0;
/// Ry(θ6..θ11) on the odd qubits after it.
pub fn star_ansatz() -> AnsatzSpec {
    let mut gates: Vec<Gate> = (0..12).map(|q| Gate::H { q }).collect();
    let mut slots = Vec::with_capacity(12);
    for k in 0..6 {
        gates.push(Gate::Ry { q: 2 * k, angle: Angle::Slot(k) });
        slots.push(SlotInfo { qubit: 2 * k, side: LayerSide::PreEntangler });
    }
    for c in 1..11 {
        gates.push(Gate::Cnot { control: c, target: c + 1 });
    }
    gates.push(Gate::Cnot { control: 11, target: 0 });
    for k in 0..6 {
        gates.push(Gate::Ry { q: 2 * k + 1, angle: Angle::Slot(6 + k) });
        slots.push(SlotInfo { qubit: 2 * k + 1, side: LayerSide::PostEntangler });
    }
    AnsatzSpec {
        circuit: Circuit::new(12, gates).expect("static circuit"),
        slots,
    }
}

/// Rounded final parameters of the star ansatz that prepare the exact dimer
/// covering (1,2),(3,4),...,(11,0): -π/2 on the six pre-entangler slots and
/// π on the six post-entangler slots.
pub fn star_exact_params() -> Vec<f64> {
    let mut params = vec![-PI / 2.0; 6];
    params.extend(std::iter::repeat_n(PI, 6));
    params
}

/// Seeded uniform parameter draw over [0, 2π)^dim.
pub fn uniform_params(dim: usize, seed: u64) -> Vec<f64> {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..dim).map(|_| rng.random::<f64>() * 2.0 * PI).collect()
}

/// Parameter-shift gradient: ∂E/∂θ_j = [E(θ + π/2 e_j) - E(θ - π/2 e_j)]/2,
/// using 2d energy evaluations.
pub fn parameter_shift_gradient<F>(
    spec: &AnsatzSpec,
    params: &[f64],
    mut energy_fn: F,
) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    if params.len() != spec.num_params() {
        return Err(Error::InvalidArgument(format!(
            "expected {} parameters, got {}",
            spec.num_params(),
            params.len()
        )));
    }
    let mut grad = Vec::with_capacity(params.len());
    let mut shifted = params.to_vec();
    for j in 0..params.len() {
        shifted[j] = params[j] + PI / 2.0;
        let plus = energy_fn(&shifted)?;
        shifted[j] = params[j] - PI / 2.0;
        let minus = energy_fn(&shifted)?;
        shifted[j] = params[j];
        grad.push((plus - minus) / 2.0);
    }
    Ok(grad)
}

/// A d×d real symmetric metric matrix.
#[derive(Debug, Clone)]
pub struct MetricMatrix(DMatrix<f64>);

impl MetricMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch("metric must be square".into()));
        }
        let asym = (&m - m.transpose()).iter().map(|v| v.abs()).fold(0.0, f64::max);
        if asym > 1e-12 {
            return Err(Error::Numeric(format!("metric asymmetry {asym}")));
        }
        Ok(Self(m))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    /// Max |G_ij - s·δ_ij| over all entries.
    pub fn max_deviation_from_scaled_identity(&self, scale: f64) -> f64 {
        let mut max = 0.0f64;
        for i in 0..self.0.nrows() {
            for j in 0..self.0.ncols() {
                let target = if i == j { scale } else { 0.0 };
                max = max.max((self.0[(i, j)] - target).abs());
            }
        }
        max
    }

    /// CSV export, one row per line.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.0.nrows() {
            let row: Vec<String> = (0..self.0.ncols()).map(|j| format!("{}", self.0[(i, j)])).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Prefix circuit of the gates strictly before the given layer's rotations,
/// with earlier-layer rotations bound from `params`.
fn layer_prefix(spec: &AnsatzSpec, params: &[f64], side: LayerSide) -> Result<Circuit> {
    let mut gates = Vec::new();
    for gate in spec.circuit.gates() {
        match *gate {
            Gate::Ry { q, angle: Angle::Slot(s) } => {
                let slot_side = spec.slots[s].side;
                if slot_side == side {
                    // Rotations of the target layer are excluded.
                    continue;
                }
                if side == LayerSide::PostEntangler && slot_side == LayerSide::PreEntangler {
                    gates.push(Gate::Ry { q, angle: Angle::Fixed(params[s]) });
                }
                // Pre-layer prefix drops post rotations entirely (they come
                // later in the circuit anyway).
            }
            other => {
                if side == LayerSide::PreEntangler {
                    // The pre-layer state is everything before the first
                    // parametrized gate: fixed gates that appear after any
                    // entangler do not belong to the prefix.
                    if matches!(other, Gate::Cnot { .. } | Gate::Cz { .. }) {
                        break;
                    }
                }
                gates.push(other);
            }
        }
    }
    Circuit::new(spec.num_qubits(), gates)
}

/// Generator observable of a slot: Y/2 on the slot's qubit.
fn slot_generator(spec: &AnsatzSpec, slot: usize) -> PauliSum {
    PauliSum::new(
        spec.num_qubits(),
        vec![PauliString::at(spec.num_qubits(), &[(spec.slots[slot].qubit, PauliLetter::Y)], 0.5)],
    )
    .expect("generator is well-formed")
}

/// Product of two slot generators: (Y/2)(Y/2) on two qubits, or I/4 when the
/// slots share a qubit.
fn generator_product(spec: &AnsatzSpec, a: usize, b: usize) -> PauliSum {
    let n = spec.num_qubits();
    let (qa, qb) = (spec.slots[a].qubit, spec.slots[b].qubit);
    let term = if qa == qb {
        PauliString { letters: vec![PauliLetter::I; n], coefficient: 0.25 }
    } else {
        PauliString::at(n, &[(qa, PauliLetter::Y), (qb, PauliLetter::Y)], 0.25)
    };
    PauliSum::new(n, vec![term]).expect("generator product is well-formed")
}

/// Block-diagonal Fubini-Study metric: per layer l, the covariance block
/// G^l_ij = ⟨P_i P_j⟩ - ⟨P_i⟩⟨P_j⟩ in the state prepared by everything
/// before that layer's rotations; cross-layer entries are zero.
///
/// `expectation_fn` evaluates ⟨observable⟩ on the state prepared by the
/// given bound circuit, so the same code path runs on the exact backend or
/// on a shot-based executor.
pub fn fubini_study_block_diagonal<F>(
    spec: &AnsatzSpec,
    params: &[f64],
    mut expectation_fn: F,
) -> Result<MetricMatrix>
where
    F: FnMut(&Circuit, &PauliSum) -> Result<f64>,
{
    if params.len() != spec.num_params() {
        return Err(Error::InvalidArgument(format!(
            "expected {} parameters, got {}",
            spec.num_params(),
            params.len()
        )));
    }
    let d = spec.num_params();
    let mut g = DMatrix::<f64>::zeros(d, d);
    for side in [LayerSide::PreEntangler, LayerSide::PostEntangler] {
        let members: Vec<usize> = (0..d).filter(|&s| spec.slots[s].side == side).collect();
        if members.is_empty() {
            continue;
        }
        let prefix = layer_prefix(spec, params, side)?;
        let singles: Vec<f64> = members
            .iter()
            .map(|&s| expectation_fn(&prefix, &slot_generator(spec, s)))
            .collect::<Result<_>>()?;
        for (ai, &a) in members.iter().enumerate() {
            for (bi, &b) in members.iter().enumerate().skip(ai) {
                let pp = expectation_fn(&prefix, &generator_product(spec, a, b))?;
                let cov = pp - singles[ai] * singles[bi];
                g[(a, b)] = cov;
                g[(b, a)] = cov;
            }
        }
    }
    MetricMatrix::new(g)
}

/// Full numeric Fubini-Study metric from analytic statevector derivatives:
/// g_ij = Re[⟨∂_iψ|∂_jψ⟩ - ⟨∂_iψ|ψ⟩⟨ψ|∂_jψ⟩]. The derivative of Ry(θ)
/// inserts -i·Y/2 at the gate site.
pub fn fubini_study_full_numeric(spec: &AnsatzSpec, params: &[f64]) -> Result<MetricMatrix> {
    if params.len() != spec.num_params() {
        return Err(Error::InvalidArgument(format!(
            "expected {} parameters, got {}",
            spec.num_params(),
            params.len()
        )));
    }
    let d = spec.num_params();
    let psi = spec.prepare(params)?;
    let mut derivatives: Vec<Vec<Complex64>> = Vec::with_capacity(d);
    for j in 0..d {
        derivatives.push(derivative_state(spec, params, j)?);
    }
    let mut g = DMatrix::<f64>::zeros(d, d);
    let overlaps: Vec<Complex64> = derivatives
        .iter()
        .map(|dj| {
            psi.amplitudes()
                .iter()
                .zip(dj)
                .map(|(p, v)| p.conj() * v)
                .sum()
        })
        .collect();
    for i in 0..d {
        for j in i..d {
            let di_dj: Complex64 = derivatives[i]
                .iter()
                .zip(&derivatives[j])
                .map(|(a, b)| a.conj() * b)
                .sum();
            let val = (di_dj - overlaps[i].conj() * overlaps[j]).re;
            g[(i, j)] = val;
            g[(j, i)] = val;
        }
    }
    MetricMatrix::new(g)
}

/// |∂_jψ⟩: evolve |0⟩ through the bound circuit, applying -i·Y/2 on the
/// slot's qubit right after its Ry gate.
fn derivative_state(spec: &AnsatzSpec, params: &[f64], slot: usize) -> Result<Vec<Complex64>> {
    let mut state = StateVector::zero(spec.num_qubits());
    let minus_i_half = Complex64::new(0.0, -0.5);
    let mut found = false;
    for gate in spec.circuit.gates() {
        match *gate {
            Gate::Ry { q, angle: Angle::Slot(s) } => {
                crate::circuit::apply_gate(
                    state.amplitudes_mut(),
                    &Gate::Ry { q, angle: Angle::Fixed(params[s]) },
                )?;
                if s == slot {
                    apply_y_scaled(state.amplitudes_mut(), q, minus_i_half);
                    found = true;
                }
            }
            Gate::Rz { q, angle: Angle::Slot(s) } => {
                crate::circuit::apply_gate(
                    state.amplitudes_mut(),
                    &Gate::Rz { q, angle: Angle::Fixed(params[s]) },
                )?;
            }
            other => crate::circuit::apply_gate(state.amplitudes_mut(), &other)?,
        }
    }
    if !found {
        return Err(Error::InvalidArgument(format!("slot {slot} not in circuit")));
    }
    Ok(state.amplitudes().to_vec())
}

fn apply_y_scaled(amps: &mut [Complex64], q: usize, scale: Complex64) {
    let mask = 1usize << q;
    let i = Complex64::new(0.0, 1.0);
    for k in 0..amps.len() {
        if k & mask == 0 {
            let j = k | mask;
            let (a, b) = (amps[k], amps[j]);
            amps[k] = scale * (-i) * b;
            amps[j] = scale * i * a;
        }
    }
}

/// Exact-expectation closure for the metric routes: evolves |0⟩ through the
/// circuit and evaluates the observable on the statevector.
pub fn exact_expectation(circuit: &Circuit, observable: &PauliSum) -> Result<f64> {
    let state = evolve(&StateVector::zero(circuit.num_qubits()), circuit)?;
    crate::hamiltonian::expectation_exact(&state, observable)
}
