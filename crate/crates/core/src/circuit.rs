//! Gate-level circuit IR.
//!
//! Circuits are immutable ordered gate lists over `num_qubits` qubits with
//! positional parameter slots. Operations return new circuits: binding,
//! adjoint, global unitary folding for zero-noise extrapolation, and
//! compilation to the Heron native set {CZ, Rz, X, √X}. A dense unitary
//! oracle backs equivalence tests for small registers.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// A rotation angle: either a bound value in radians or a free parameter slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Angle {
    Fixed(f64),
    Slot(usize),
}

impl Angle {
    fn fixed(self) -> Result<f64> {
        match self {
            Angle::Fixed(v) => Ok(v),
            Angle::Slot(s) => Err(Error::InvalidState(format!(
                "parameter slot {s} is unbound"
            ))),
        }
    }
}

/// A single gate. Two-qubit kinds carry distinct qubit indices (validated at
/// circuit construction).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    H { q: usize },
    X { q: usize },
    SqrtX { q: usize },
    Rz { q: usize, angle: Angle },
    Ry { q: usize, angle: Angle },
    Cnot { control: usize, target: usize },
    Cz { a: usize, b: usize },
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::H { q } | Gate::X { q } | Gate::SqrtX { q } => vec![q],
            Gate::Rz { q, .. } | Gate::Ry { q, .. } => vec![q],
            Gate::Cnot { control, target } => vec![control, target],
            Gate::Cz { a, b } => vec![a, b],
        }
    }

    fn slot(&self) -> Option<usize> {
        match *self {
            Gate::Rz { angle: Angle::Slot(s), .. } | Gate::Ry { angle: Angle::Slot(s), .. } => {
                Some(s)
            }
            _ => None,
        }
    }
}

/// An ordered gate list over a fixed qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    num_qubits: usize,
    gates: Vec<Gate>,
    num_params: usize,
}

impl Circuit {
    /// Validates qubit bounds, two-qubit distinctness, and slot contiguity
    /// (every slot in `0..num_params` referenced at least once).
    pub fn new(num_qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        if num_qubits == 0 {
            return Err(Error::InvalidArgument("circuit needs at least one qubit".into()));
        }
        let mut max_slot: Option<usize> = None;
        let mut referenced = Vec::new();
        for gate in &gates {
            for q in gate.qubits() {
                if q >= num_qubits {
                    return Err(Error::InvalidArgument(format!(
                        "gate {gate:?} references qubit {q} outside register of {num_qubits}"
                    )));
                }
            }
            match *gate {
                Gate::Cnot { control: a, target: b } | Gate::Cz { a, b } if a == b => {
                    return Err(Error::InvalidArgument(format!(
                        "two-qubit gate {gate:?} needs distinct qubits"
                    )));
                }
                _ => {}
            }
            if let Some(s) = gate.slot() {
                max_slot = Some(max_slot.map_or(s, |m: usize| m.max(s)));
                if referenced.len() <= s {
                    referenced.resize(s + 1, false);
                }
                referenced[s] = true;
            }
        }
        let num_params = max_slot.map_or(0, |m| m + 1);
        if let Some(miss) = referenced.iter().position(|&r| !r) {
            return Err(Error::InvalidArgument(format!(
                "parameter slot {miss} is never referenced"
            )));
        }
        Ok(Self { num_qubits, gates, num_params })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_params(&self) -> usize {
        self.num_params
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    pub fn is_bound(&self) -> bool {
        self.num_params == 0
    }

    /// Positionally substitutes `params[s]` for every slot `s`.
    pub fn bind(&self, params: &[f64]) -> Result<Circuit> {
        if params.len() != self.num_params {
            return Err(Error::InvalidArgument(format!(
                "expected {} parameters, got {}",
                self.num_params,
                params.len()
            )));
        }
        let gates = self
            .gates
            .iter()
            .map(|g| match *g {
                Gate::Rz { q, angle: Angle::Slot(s) } => Gate::Rz { q, angle: Angle::Fixed(params[s]) },
                Gate::Ry { q, angle: Angle::Slot(s) } => Gate::Ry { q, angle: Angle::Fixed(params[s]) },
                other => other,
            })
            .collect();
        Ok(Circuit { num_qubits: self.num_qubits, gates, num_params: 0 })
    }

    /// Reverses the gate order and conjugates each gate. Requires a bound
    /// circuit (a slot angle cannot be negated symbolically). The adjoint of
    /// √X is emitted as the pair [√X, X], so circuits containing √X grow.
    pub fn adjoint(&self) -> Result<Circuit> {
        if !self.is_bound() {
            return Err(Error::InvalidState(
                "adjoint requires a fully bound circuit".into(),
            ));
        }
        let mut gates = Vec::with_capacity(self.gates.len());
        for gate in self.gates.iter().rev() {
            match *gate {
                Gate::H { .. } | Gate::X { .. } | Gate::Cnot { .. } | Gate::Cz { .. } => {
                    gates.push(*gate)
                }
                Gate::Rz { q, angle } => {
                    gates.push(Gate::Rz { q, angle: Angle::Fixed(-angle.fixed()?) })
                }
                Gate::Ry { q, angle } => {
                    gates.push(Gate::Ry { q, angle: Angle::Fixed(-angle.fixed()?) })
                }
                // √X† = √X·X = X·√X (they commute).
                Gate::SqrtX { q } => {
                    gates.push(Gate::SqrtX { q });
                    gates.push(Gate::X { q });
                }
            }
        }
        Circuit::new(self.num_qubits, gates)
    }

    /// Global unitary folding U(U†U)^((fold-1)/2) for odd `fold`.
    pub fn fold_global(&self, fold: u32) -> Result<Circuit> {
        if !self.is_bound() {
            return Err(Error::InvalidState("folding requires a bound circuit".into()));
        }
        if fold == 0 || fold % 2 == 0 {
            return Err(Error::InvalidArgument(format!(
                "fold factor must be odd and positive, got {fold}"
            )));
        }
        let adjoint = self.adjoint()?;
        let mut gates = self.gates.clone();
        for _ in 0..(fold - 1) / 2 {
            gates.extend_from_slice(adjoint.gates());
            gates.extend_from_slice(&self.gates);
        }
        Circuit::new(self.num_qubits, gates)
    }

    /// Rewrites every gate into the Heron native set {CZ, Rz, X, √X}:
    ///   H     → Rz(π/2)·√X·Rz(π/2)
    ///   Ry(θ) → Rz(3π)·√X·Rz(θ+π)·√X
    ///   CNOT  → (I ⊗ Rz(π/2)·√X) · CZ · (I ⊗ Rz(π)·√X·Rz(π/2))
    /// The output is unitary-equivalent up to global phase.
    pub fn compile_to_native(&self) -> Result<Circuit> {
        if !self.is_bound() {
            return Err(Error::InvalidState(
                "native compilation requires a bound circuit".into(),
            ));
        }
        let mut gates = Vec::with_capacity(self.gates.len() * 4);
        for gate in &self.gates {
            match *gate {
                Gate::Rz { .. } | Gate::X { .. } | Gate::SqrtX { .. } | Gate::Cz { .. } => {
                    gates.push(*gate)
                }
                Gate::H { q } => {
                    gates.push(Gate::Rz { q, angle: Angle::Fixed(PI / 2.0) });
                    gates.push(Gate::SqrtX { q });
                    gates.push(Gate::Rz { q, angle: Angle::Fixed(PI / 2.0) });
                }
                Gate::Ry { q, angle } => {
                    let theta = angle.fixed()?;
                    gates.push(Gate::SqrtX { q });
                    gates.push(Gate::Rz { q, angle: Angle::Fixed(theta + PI) });
                    gates.push(Gate::SqrtX { q });
                    gates.push(Gate::Rz { q, angle: Angle::Fixed(3.0 * PI) });
                }
                Gate::Cnot { control, target } => {
                    gates.push(Gate::Rz { q: target, angle: Angle::Fixed(PI / 2.0) });
                    gates.push(Gate::SqrtX { q: target });
                    gates.push(Gate::Rz { q: target, angle: Angle::Fixed(PI) });
                    gates.push(Gate::Cz { a: control, b: target });
                    gates.push(Gate::SqrtX { q: target });
                    gates.push(Gate::Rz { q: target, angle: Angle::Fixed(PI / 2.0) });
                }
            }
        }
        Circuit::new(self.num_qubits, gates)
    }

    /// Dense unitary of a bound circuit; limited to 12 qubits.
    pub fn unitary_of(&self) -> Result<DMatrix<Complex64>> {
        if !self.is_bound() {
            return Err(Error::InvalidState(
                "unitary oracle requires a bound circuit".into(),
            ));
        }
        if self.num_qubits > 12 {
            return Err(Error::SizeLimit(format!(
                "unitary oracle limited to 12 qubits, got {}",
                self.num_qubits
            )));
        }
        let dim = 1usize << self.num_qubits;
        let mut cols: Vec<Complex64> = Vec::with_capacity(dim * dim);
        for basis in 0..dim {
            let mut amps = vec![Complex64::ZERO; dim];
            amps[basis] = Complex64::ONE;
            for gate in &self.gates {
                apply_gate(&mut amps, gate)?;
            }
            cols.extend_from_slice(&amps);
        }
        Ok(DMatrix::from_vec(dim, dim, cols))
    }

    /// One gate per line: kind, qubits, then the angle or `@slot`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "qubits {} params {}", self.num_qubits, self.num_params);
        for gate in &self.gates {
            match *gate {
                Gate::H { q } => { let _ = writeln!(out, "h {q}"); }
                Gate::X { q } => { let _ = writeln!(out, "x {q}"); }
                Gate::SqrtX { q } => { let _ = writeln!(out, "sqrtx {q}"); }
                Gate::Rz { q, angle } => { let _ = writeln!(out, "rz {q} {}", angle_text(angle)); }
                Gate::Ry { q, angle } => { let _ = writeln!(out, "ry {q} {}", angle_text(angle)); }
                Gate::Cnot { control, target } => { let _ = writeln!(out, "cnot {control} {target}"); }
                Gate::Cz { a, b } => { let _ = writeln!(out, "cz {a} {b}"); }
            }
        }
        out
    }

    /// Parses the text form produced by [`Circuit::to_text`].
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty circuit file".into()))?;
        let mut it = header.split_whitespace();
        if it.next() != Some("qubits") {
            return Err(Error::Parse(format!("expected 'qubits ...', got '{header}'")));
        }
        let num_qubits: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Parse("bad qubit count".into()))?;
        let mut gates = Vec::new();
        for line in lines {
            let mut it = line.split_whitespace();
            let kind = it.next().unwrap();
            let mut next_usize = || -> Result<usize> {
                it.next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| Error::Parse(format!("bad gate line '{line}'")))
            };
            let gate = match kind {
                "h" => Gate::H { q: next_usize()? },
                "x" => Gate::X { q: next_usize()? },
                "sqrtx" => Gate::SqrtX { q: next_usize()? },
                "cnot" => Gate::Cnot { control: next_usize()?, target: next_usize()? },
                "cz" => Gate::Cz { a: next_usize()?, b: next_usize()? },
                "rz" | "ry" => {
                    let q = next_usize()?;
                    let tok = it
                        .next()
                        .ok_or_else(|| Error::Parse(format!("missing angle in '{line}'")))?;
                    let angle = parse_angle(tok)?;
                    if kind == "rz" {
                        Gate::Rz { q, angle }
                    } else {
                        Gate::Ry { q, angle }
                    }
                }
                other => return Err(Error::Parse(format!("unknown gate kind '{other}'"))),
            };
            gates.push(gate);
        }
        Circuit::new(num_qubits, gates)
    }
}

fn angle_text(angle: Angle) -> String {
    match angle {
        Angle::Fixed(v) => format!("{v}"),
        Angle::Slot(s) => format!("@{s}"),
    }
}

fn parse_angle(tok: &str) -> Result<Angle> {
    if let Some(rest) = tok.strip_prefix('@') {
        rest.parse::<usize>()
            .map(Angle::Slot)
            .map_err(|_| Error::Parse(format!("bad slot '{tok}'")))
    } else {
        tok.parse::<f64>()
            .map(Angle::Fixed)
            .map_err(|_| Error::Parse(format!("bad angle '{tok}'")))
    }
}

/// Applies one bound gate to a raw amplitude array. Qubit `q` is bit `q` of
/// the amplitude index (qubit 0 is the least significant bit).
pub(crate) fn apply_gate(amps: &mut [Complex64], gate: &Gate) -> Result<()> {
    match *gate {
        Gate::H { q } => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            for_each_pair(amps, q, |a, b| (s * (a + b), s * (a - b)));
        }
        Gate::X { q } => {
            for_each_pair(amps, q, |a, b| (b, a));
        }
        Gate::SqrtX { q } => {
            let p = Complex64::new(0.5, 0.5);
            let m = Complex64::new(0.5, -0.5);
            for_each_pair(amps, q, |a, b| (p * a + m * b, m * a + p * b));
        }
        Gate::Rz { q, angle } => {
            let theta = angle.fixed()?;
            let phase0 = Complex64::from_polar(1.0, -theta / 2.0);
            let phase1 = Complex64::from_polar(1.0, theta / 2.0);
            for_each_pair(amps, q, |a, b| (phase0 * a, phase1 * b));
        }
        Gate::Ry { q, angle } => {
            let theta = angle.fixed()?;
            let c = (theta / 2.0).cos();
            let s = (theta / 2.0).sin();
            for_each_pair(amps, q, |a, b| (c * a - s * b, s * a + c * b));
        }
        Gate::Cnot { control, target } => {
            let cmask = 1usize << control;
            let tmask = 1usize << target;
            for i in 0..amps.len() {
                if i & cmask != 0 && i & tmask == 0 {
                    amps.swap(i, i | tmask);
                }
            }
        }
        Gate::Cz { a, b } => {
            let mask = (1usize << a) | (1usize << b);
            for (i, amp) in amps.iter_mut().enumerate() {
                if i & mask == mask {
                    *amp = -*amp;
                }
            }
        }
    }
    Ok(())
}

/// Applies a one-qubit map to every (bit=0, bit=1) amplitude pair of qubit `q`.
fn for_each_pair<F>(amps: &mut [Complex64], q: usize, f: F)
where
    F: Fn(Complex64, Complex64) -> (Complex64, Complex64),
{
    let mask = 1usize << q;
    for i in 0..amps.len() {
        if i & mask == 0 {
            let j = i | mask;
            let (a, b) = (amps[i], amps[j]);
            let (na, nb) = f(a, b);
            amps[i] = na;
            amps[j] = nb;
        }
    }
}

/// Maximum entrywise deviation between two matrices after removing the global
/// phase, fixed from the first entry of `a` with non-negligible magnitude.
pub fn max_deviation_up_to_phase(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    let thresh = 1e-8 * a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut phase = Complex64::ONE;
    'scan: for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            let za = a[(i, j)];
            if za.norm() > thresh {
                let zb = b[(i, j)];
                if zb.norm() == 0.0 {
                    return f64::INFINITY;
                }
                phase = (za / za.norm()) * (zb / zb.norm()).conj();
                break 'scan;
            }
        }
    }
    let mut max = 0.0f64;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            max = max.max((a[(i, j)] - phase * b[(i, j)]).norm());
        }
    }
    max
}

#[cfg(test)]
mod tests {
    use super::*;
    

    fn single(g: Gate, n: usize) -> Circuit {
        Circuit::new(n, vec![g]).unwrap()
    }

    #[test]
    fn empty_circuit_unitary_is_identity() {
        let c = Circuit::new(2, vec![]).unwrap();
        let u = c.unitary_of().unwrap();
        assert_eq!(u, DMatrix::identity(4, 4));
    }

    #[test]
    fn x_gate_unitary_is_pauli_x() {
        let u = single(Gate::X { q: 0 }, 1).unitary_of().unwrap();
        let x = DMatrix::from_row_slice(2, 2, &[
            Complex64::ZERO, Complex64::ONE,
            Complex64::ONE, Complex64::ZERO,
        ]);
        assert!((u - x).iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn bind_is_positional_and_checks_length() {
        let c = Circuit::new(2, vec![
            Gate::Ry { q: 0, angle: Angle::Slot(0) },
            Gate::Ry { q: 1, angle: Angle::Slot(1) },
        ]).unwrap();
        assert_eq!(c.num_params(), 2);
        let bound = c.bind(&[0.3, 0.7]).unwrap();
        assert!(bound.is_bound());
        assert_eq!(bound.gates()[0], Gate::Ry { q: 0, angle: Angle::Fixed(0.3) });
        assert_eq!(bound.gates()[1], Gate::Ry { q: 1, angle: Angle::Fixed(0.7) });
        assert!(c.bind(&[0.1]).is_err());
        // A parameter-free circuit accepts the empty vector and is unchanged.
        let fixed = Circuit::new(1, vec![Gate::H { q: 0 }]).unwrap();
        assert_eq!(fixed.bind(&[]).unwrap(), fixed);
    }

    #[test]
    fn slot_contiguity_is_enforced() {
        let gap = Circuit::new(1, vec![Gate::Ry { q: 0, angle: Angle::Slot(1) }]);
        assert!(gap.is_err());
    }

    #[test]
    fn fold_one_is_identity_fold() {
        let c = Circuit::new(2, vec![
            Gate::H { q: 0 },
            Gate::Cnot { control: 0, target: 1 },
        ]).unwrap();
        assert_eq!(c.fold_global(1).unwrap(), c);
        assert!(c.fold_global(2).is_err());
        assert!(c.fold_global(0).is_err());
    }

    #[test]
    fn fold_preserves_unitary_and_triples_gates() {
        let c = Circuit::new(2, vec![
            Gate::H { q: 0 },
            Gate::Ry { q: 1, angle: Angle::Fixed(0.7) },
            Gate::Cnot { control: 0, target: 1 },
            Gate::Rz { q: 0, angle: Angle::Fixed(-1.2) },
        ]).unwrap();
        let u = c.unitary_of().unwrap();
        for fold in [3u32, 5] {
            let folded = c.fold_global(fold).unwrap();
            assert_eq!(folded.gate_count(), c.gate_count() * fold as usize);
            let uf = folded.unitary_of().unwrap();
            let dev = (u.clone() - uf).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(dev < 1e-10, "fold {fold} deviates by {dev}");
        }
    }

    #[test]
    fn adjoint_of_adjoint_is_structural_identity_without_sqrtx() {
        let c = Circuit::new(3, vec![
            Gate::H { q: 0 },
            Gate::Ry { q: 1, angle: Angle::Fixed(0.4) },
            Gate::Rz { q: 2, angle: Angle::Fixed(-0.9) },
            Gate::Cnot { control: 0, target: 2 },
            Gate::Cz { a: 1, b: 2 },
            Gate::X { q: 1 },
        ]).unwrap();
        assert_eq!(c.adjoint().unwrap().adjoint().unwrap(), c);
    }

    #[test]
    fn sqrtx_adjoint_inverts_unitarily() {
        let c = single(Gate::SqrtX { q: 0 }, 1);
        let mut gates = c.gates().to_vec();
        gates.extend_from_slice(c.adjoint().unwrap().gates());
        let round = Circuit::new(1, gates).unwrap().unitary_of().unwrap();
        let dev = (round - DMatrix::<Complex64>::identity(2, 2))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(dev < 1e-15);
    }

    #[test]
    fn native_h_matches_paper_sequence() {
        let h = single(Gate::H { q: 0 }, 1);
        let native = h.compile_to_native().unwrap();
        let kinds: Vec<_> = native.gates().iter().map(|g| match g {
            Gate::Rz { .. } => "rz",
            Gate::SqrtX { .. } => "sqrtx",
            _ => "other",
        }).collect();
        assert_eq!(kinds, ["rz", "sqrtx", "rz"]);
        let dev = max_deviation_up_to_phase(
            &h.unitary_of().unwrap(),
            &native.unitary_of().unwrap(),
        );
        assert!(dev < 1e-10);
    }

    #[test]
    fn native_ry_matches_up_to_phase() {
        for theta in [0.0, 0.3, PI / 2.0, 1.9, -2.4, PI] {
            let ry = single(Gate::Ry { q: 0, angle: Angle::Fixed(theta) }, 1);
            let native = ry.compile_to_native().unwrap();
            assert!(native.gates().iter().all(|g| matches!(
                g,
                Gate::Rz { .. } | Gate::SqrtX { .. } | Gate::X { .. } | Gate::Cz { .. }
            )));
            let dev = max_deviation_up_to_phase(
                &ry.unitary_of().unwrap(),
                &native.unitary_of().unwrap(),
            );
            assert!(dev < 1e-10, "theta {theta}: deviation {dev}");
        }
    }

    #[test]
    fn native_cnot_matches_up_to_phase_both_orientations() {
        for (c, t) in [(0usize, 1usize), (1, 0)] {
            let cnot = single(Gate::Cnot { control: c, target: t }, 2);
            let native = cnot.compile_to_native().unwrap();
            let dev = max_deviation_up_to_phase(
                &cnot.unitary_of().unwrap(),
                &native.unitary_of().unwrap(),
            );
            assert!(dev < 1e-10, "cnot({c},{t}) deviation {dev}");
        }
    }

    #[test]
    fn unitary_oracle_rejects_unbound() {
        let c = Circuit::new(1, vec![Gate::Ry { q: 0, angle: Angle::Slot(0) }]).unwrap();
        assert!(c.unitary_of().is_err());
    }

    #[test]
    fn text_round_trip() {
        let c = Circuit::new(3, vec![
            Gate::H { q: 0 },
            Gate::Ry { q: 2, angle: Angle::Slot(0) },
            Gate::Rz { q: 1, angle: Angle::Fixed(1.25) },
            Gate::Cnot { control: 0, target: 1 },
            Gate::Cz { a: 1, b: 2 },
            Gate::SqrtX { q: 1 },
            Gate::X { q: 0 },
        ]).unwrap();
        let parsed = Circuit::from_text(&c.to_text()).unwrap();
        assert_eq!(parsed, c);
    }

    #[test]
    fn unitary_oracle_size_limit() {
        let c = Circuit::new(13, vec![Gate::H { q: 12 }]).unwrap();
        assert!(matches!(c.unitary_of(), Err(crate::error::Error::SizeLimit(_))));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        /// Random bound gates over 3 qubits, excluding √X (whose adjoint
        /// expands structurally).
        fn arb_gate() -> impl Strategy<Value = Gate> {
            let q = 0..3usize;
            let angle = -6.3..6.3f64;
            prop_oneof![
                q.clone().prop_map(|q| Gate::H { q }),
                q.clone().prop_map(|q| Gate::X { q }),
                (q.clone(), angle.clone()).prop_map(|(q, a)| Gate::Rz { q, angle: Angle::Fixed(a) }),
                (q.clone(), angle).prop_map(|(q, a)| Gate::Ry { q, angle: Angle::Fixed(a) }),
                (0..3usize, 0..2usize).prop_map(|(c, t)| {
                    let target = (c + 1 + t) % 3;
                    Gate::Cnot { control: c, target }
                }),
                (0..3usize, 0..2usize).prop_map(|(a, o)| {
                    let b = (a + 1 + o) % 3;
                    Gate::Cz { a, b }
                }),
            ]
        }

        proptest! {
            #[test]
            fn adjoint_is_a_structural_involution(gates in prop::collection::vec(arb_gate(), 0..12)) {
                let c = Circuit::new(3, gates).unwrap();
                prop_assert_eq!(c.adjoint().unwrap().adjoint().unwrap(), c);
            }

            #[test]
            fn text_form_round_trips(gates in prop::collection::vec(arb_gate(), 0..12)) {
                let c = Circuit::new(3, gates).unwrap();
                let parsed = Circuit::from_text(&c.to_text()).unwrap();
                prop_assert_eq!(parsed, c);
            }

            #[test]
            fn folding_preserves_the_unitary(gates in prop::collection::vec(arb_gate(), 1..8)) {
                let c = Circuit::new(3, gates).unwrap();
                let u = c.unitary_of().unwrap();
                let folded = c.fold_global(3).unwrap().unitary_of().unwrap();
                let dev = (u - folded).iter().map(|z| z.norm()).fold(0.0, f64::max);
                prop_assert!(dev < 1e-10);
            }
        }
    }
}
