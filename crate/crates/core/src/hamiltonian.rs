//! Energies of Pauli Hamiltonians: exact diagonalization, exact expectation
//! values and shot-sampled estimates.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::circuit::{CircuitError, ParameterizedCircuit};
use crate::gates::{s_dagger, GateKind};
use crate::noise::{apply_confusion, NoiseError, NoiseModel};
use crate::pauli::{PauliHamiltonian, PauliString};
use crate::state::{CMatrix, DensityMatrix, StateRef, StateVector};

/// Largest register `exact_ground_energy` will diagonalize densely.
pub const MAX_EXACT_QUBITS: usize = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HamiltonianError {
    #[error("{0} qubits exceeds the {MAX_EXACT_QUBITS}-qubit limit for exact diagonalization")]
    SizeLimit(usize),
    #[error("Hamiltonian acts on {hamiltonian} qubits, state has {state}")]
    DimensionMismatch { hamiltonian: usize, state: usize },
    #[error("shot count must be positive")]
    Shots,
    #[error("noise model covers {found} qubits, circuit needs {expected}")]
    ReadoutCoverage { expected: usize, found: usize },
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
}

#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    pub vector: StateVector,
}

/// Lowest eigenvalue and eigenvector of the dense Hamiltonian matrix.
pub fn exact_ground_state(h: &PauliHamiltonian) -> Result<GroundState, HamiltonianError> {
    let n = h.n_qubits();
    if n > MAX_EXACT_QUBITS {
        return Err(HamiltonianError::SizeLimit(n));
    }
    let eig = nalgebra::SymmetricEigen::new(h.to_matrix());
    let lowest = eig.eigenvalues.imin();
    let amplitudes = eig.eigenvectors.column(lowest).iter().copied().collect();
    let vector = StateVector::from_amplitudes(amplitudes).expect("eigenvectors are normalized");
    Ok(GroundState {
        energy: eig.eigenvalues[lowest],
        vector,
    })
}

pub fn exact_ground_energy(h: &PauliHamiltonian) -> Result<f64, HamiltonianError> {
    exact_ground_state(h).map(|g| g.energy)
}

/// `sum_a h_a <P_a>` term by term.
pub fn expectation_exact<'a>(
    h: &PauliHamiltonian,
    state: impl Into<StateRef<'a>>,
) -> Result<f64, HamiltonianError> {
    let state = state.into();
    let n = match state {
        StateRef::Pure(psi) => psi.n_qubits(),
        StateRef::Mixed(rho) => rho.n_qubits(),
    };
    if n != h.n_qubits() {
        return Err(HamiltonianError::DimensionMismatch {
            hamiltonian: h.n_qubits(),
            state: n,
        });
    }
    Ok(h.terms()
        .iter()
        .map(|t| {
            let v = match state {
                StateRef::Pure(psi) => t.pauli.expectation(psi),
                StateRef::Mixed(rho) => t.pauli.expectation_mixed(rho),
            };
            t.coefficient * v
        })
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyEstimate {
    pub value: f64,
    pub standard_error: f64,
    /// Shots per measured (non-identity) term.
    pub shots_used: usize,
}

/// Simulates `circuit(theta)` once (density matrix when `noise` is given) and
/// estimates the energy by sampling each non-identity term separately in its
/// own measurement basis.
pub fn expectation_sampled(
    h: &PauliHamiltonian,
    circuit: &ParameterizedCircuit,
    theta: &[f64],
    shots: usize,
    noise: Option<&NoiseModel>,
    seed: u64,
) -> Result<EnergyEstimate, HamiltonianError> {
    if shots == 0 {
        return Err(HamiltonianError::Shots);
    }
    if circuit.n_qubits() != h.n_qubits() {
        return Err(HamiltonianError::DimensionMismatch {
            hamiltonian: h.n_qubits(),
            state: circuit.n_qubits(),
        });
    }
    match noise {
        None => {
            let psi = circuit.simulate_ideal(theta)?;
            sample_state(h, &psi, None, shots, seed)
        }
        Some(model) => {
            let rho = circuit.simulate_noisy(theta, model)?;
            sample_state(h, &rho, Some(model), shots, seed)
        }
    }
}

/// Shot-sampled energy of a given state. With a noise model, outcome
/// distributions pass through its readout confusion before sampling.
pub fn sample_state<'a>(
    h: &PauliHamiltonian,
    state: impl Into<StateRef<'a>>,
    noise: Option<&NoiseModel>,
    shots: usize,
    seed: u64,
) -> Result<EnergyEstimate, HamiltonianError> {
    if shots == 0 {
        return Err(HamiltonianError::Shots);
    }
    let state = state.into();
    let n = match state {
        StateRef::Pure(psi) => psi.n_qubits(),
        StateRef::Mixed(rho) => rho.n_qubits(),
    };
    if n != h.n_qubits() {
        return Err(HamiltonianError::DimensionMismatch {
            hamiltonian: h.n_qubits(),
            state: n,
        });
    }
    let readout = match noise {
        Some(model) if model.readout().len() < n => {
            return Err(HamiltonianError::ReadoutCoverage {
                expected: n,
                found: model.readout().len(),
            })
        }
        Some(model) => Some(&model.readout()[..n]),
        None => None,
    };

    // one outcome distribution per measurement basis, shared by terms that
    // need the same basis change
    let mut distributions: HashMap<(u32, u32), Vec<f64>> = HashMap::new();
    let mut value = 0.0;
    let mut variance = 0.0;
    for (index, term) in h.terms().iter().enumerate() {
        if term.pauli.is_identity() {
            value += term.coefficient;
            continue;
        }
        let key = (term.pauli.x_mask(), term.pauli.x_mask() & term.pauli.z_mask());
        let dist = distributions.entry(key).or_insert_with(|| {
            let p = measurement_distribution(state, &term.pauli);
            match readout {
                Some(conf) => apply_confusion(conf, &p),
                None => p,
            }
        });
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index as u64);
        let mean = sample_parity(dist, term.pauli.support(), shots, &mut rng);
        value += term.coefficient * mean;
        variance += term.coefficient * term.coefficient * (1.0 - mean * mean) / shots as f64;
    }
    Ok(EnergyEstimate {
        value,
        standard_error: variance.max(0.0).sqrt(),
        shots_used: shots,
    })
}

/// Computational-basis outcome probabilities after rotating each qubit into
/// the eigenbasis of its Pauli factor (H for X, S-dagger then H for Y).
fn measurement_distribution(state: StateRef<'_>, pauli: &PauliString) -> Vec<f64> {
    let h = GateKind::H.matrix(None);
    let sdg = s_dagger();
    let mut rotations: Vec<(CMatrix, usize)> = Vec::new();
    for q in 0..pauli.n_qubits() {
        match pauli.letter(q) {
            'X' => rotations.push((h.clone(), q)),
            'Y' => {
                rotations.push((sdg.clone(), q));
                rotations.push((h.clone(), q));
            }
            _ => {}
        }
    }
    let mut p = match state {
        StateRef::Pure(psi) => {
            let mut rotated: StateVector = psi.clone();
            for (u, q) in &rotations {
                rotated.apply_gate_in_place(u, &[*q]);
            }
            rotated.probabilities()
        }
        StateRef::Mixed(rho) => rotated_diagonal(rho, &rotations),
    };
    for v in &mut p {
        *v = v.max(0.0);
    }
    p
}

fn rotated_diagonal(rho: &DensityMatrix, rotations: &[(CMatrix, usize)]) -> Vec<f64> {
    if rotations.is_empty() {
        rho.diagonal()
    } else {
        rho.rotated_diagonal(rotations)
    }
}

/// Mean of `(-1)^popcount(outcome & support)` over `shots` categorical draws.
fn sample_parity(dist: &[f64], support: u32, shots: usize, rng: &mut ChaCha8Rng) -> f64 {
    let mut cdf = Vec::with_capacity(dist.len());
    let mut running = 0.0;
    for p in dist {
        running += p;
        cdf.push(running);
    }
    let total = running;
    let last = dist.iter().rposition(|p| *p > 0.0).unwrap_or(0);
    let mut sum: i64 = 0;
    for _ in 0..shots {
        let u = rng.random::<f64>() * total;
        let outcome = cdf.partition_point(|c| *c <= u).min(last);
        sum += if (outcome as u32 & support).count_ones().is_multiple_of(2) { 1 } else { -1 };
    }
    sum as f64 / shots as f64
}
