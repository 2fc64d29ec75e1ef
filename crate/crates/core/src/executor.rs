//! Energy-evaluation backends: exact expectation, shot sampling over the
//! qubit-wise-commuting groups, and Monte-Carlo trajectory noise with
//! optional readout confusion.
//!
//! One estimator instance owns the Hamiltonian and its grouping; the CLI and
//! the optimizers both drive it. Shot budgets are split equally across the
//! three groups. Under trajectory noise the per-group shots are spread over
//! the requested number of trajectories and the merged table is returned,
//! so downstream estimation sees the sampled mixture.

use std::collections::BTreeMap;

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::hamiltonian::{
    estimate_energy, expectation_exact, qwc_group, EnergyEstimate, PauliSum, QwcGroups,
};
use crate::simulator::{
    apply_readout_noise, basis_rotation, cumulative_probabilities, derive_seed, draw_counts,
    draw_insertions, evolve, evolve_with_insertions, sample, NoiseModel, ShotTable, StateVector,
};

/// How circuits are executed and energies estimated.
#[derive(Debug, Clone)]
pub enum Backend {
    /// Shot-free statevector expectation.
    Exact,
    /// Ideal sampling with the given number of shots per group.
    Shots { shots: u64 },
    /// Pauli-trajectory depolarizing noise plus readout confusion, with the
    /// per-group shot budget spread over `trajectories` trajectories.
    Noisy { shots: u64, trajectories: u32, noise: NoiseModel },
}

/// Hamiltonian plus its measurement grouping.
#[derive(Debug, Clone)]
pub struct HamiltonianEstimator {
    sum: PauliSum,
    groups: QwcGroups,
}

impl HamiltonianEstimator {
    pub fn new(sum: PauliSum) -> Self {
        let groups = qwc_group(&sum);
        Self { sum, groups }
    }

    pub fn hamiltonian(&self) -> &PauliSum {
        &self.sum
    }

    pub fn groups(&self) -> &QwcGroups {
        &self.groups
    }

    /// Exact ⟨H⟩ of the state prepared by the bound circuit.
    pub fn exact_energy(&self, circuit: &Circuit) -> Result<f64> {
        let state = evolve(&StateVector::zero(circuit.num_qubits()), circuit)?;
        expectation_exact(&state, &self.sum)
    }

    /// One shot table per group for the given backend.
    pub fn sample_group_tables(
        &self,
        circuit: &Circuit,
        backend: &Backend,
        seed: u64,
    ) -> Result<Vec<ShotTable>> {
        match backend {
            Backend::Exact => Err(Error::InvalidArgument(
                "the exact backend has no shot tables".into(),
            )),
            Backend::Shots { shots } => {
                let state = evolve(&StateVector::zero(circuit.num_qubits()), circuit)?;
                self.groups
                    .groups
                    .iter()
                    .enumerate()
                    .map(|(gi, group)| {
                        sample(
                            &state,
                            &group.measurement_basis(),
                            *shots,
                            derive_seed(seed, gi as u64),
                        )
                    })
                    .collect()
            }
            Backend::Noisy { shots, trajectories, noise } => {
                if *trajectories == 0 {
                    return Err(Error::InvalidArgument("need at least one trajectory".into()));
                }
                noise.validate(circuit.num_qubits())?;
                let zero = StateVector::zero(circuit.num_qubits());
                // Trajectories without any Pauli insertion all produce the
                // ideal state: cache its rotated distribution per basis.
                let ideal = evolve(&zero, circuit)?;
                let mut tables = Vec::with_capacity(self.groups.groups.len());
                for (gi, group) in self.groups.groups.iter().enumerate() {
                    let basis = group.measurement_basis();
                    let rotation = basis_rotation(&basis)?;
                    let ideal_cumulative =
                        cumulative_probabilities(&evolve(&ideal, &rotation)?);
                    let group_seed = derive_seed(seed, gi as u64);
                    let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
                    let mut total = 0u64;
                    let base = shots / u64::from(*trajectories);
                    let remainder = shots % u64::from(*trajectories);
                    for t in 0..*trajectories {
                        let chunk = base + u64::from(u64::from(t) < remainder);
                        if chunk == 0 {
                            continue;
                        }
                        let traj_seed = derive_seed(group_seed, 2 * u64::from(t));
                        let sample_seed = derive_seed(group_seed, 2 * u64::from(t) + 1);
                        let insertions = draw_insertions(circuit, noise, traj_seed);
                        let drawn = if insertions.is_empty() {
                            draw_counts(&ideal_cumulative, chunk, sample_seed)
                        } else {
                            let state = evolve_with_insertions(&zero, circuit, &insertions)?;
                            let rotated = evolve(&state, &rotation)?;
                            draw_counts(&cumulative_probabilities(&rotated), chunk, sample_seed)
                        };
                        for (k, c) in drawn {
                            *counts.entry(k).or_insert(0) += c;
                        }
                        total += chunk;
                    }
                    if total == 0 {
                        return Err(Error::InvalidArgument(
                            "zero shots across trajectories".into(),
                        ));
                    }
                    let mut table = ShotTable { basis, counts, shots: total, seed: group_seed };
                    if !noise.has_identity_readout() {
                        table = apply_readout_noise(
                            &table,
                            noise,
                            derive_seed(group_seed, u64::MAX),
                        )?;
                    }
                    tables.push(table);
                }
                Ok(tables)
            }
        }
    }

    /// Energy estimate of the bound circuit under the backend. The exact
    /// backend reports zero variance.
    pub fn energy(&self, circuit: &Circuit, backend: &Backend, seed: u64) -> Result<EnergyEstimate> {
        match backend {
            Backend::Exact => {
                let value = self.exact_energy(circuit)?;
                Ok(EnergyEstimate {
                    value,
                    variance: 0.0,
                    stderr: 0.0,
                    shots_per_group: vec![0; self.groups.groups.len()],
                })
            }
            _ => {
                let tables = self.sample_group_tables(circuit, backend, seed)?;
                estimate_energy(&tables, &self.sum, &self.groups)
            }
        }
    }
}
