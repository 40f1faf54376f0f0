//! The VQE loop: SPSA over a circuit's parameters with shot-sampled energies.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::circuit::ParameterizedCircuit;
use crate::hamiltonian::{
    expectation_exact, expectation_sampled, EnergyEstimate, HamiltonianError,
};
use crate::noise::NoiseModel;
use crate::pauli::PauliHamiltonian;
use crate::spsa::{spsa_minimize, SpsaConfig, SpsaError, TracePoint};

/// Shots per energy evaluation unless overridden.
pub const DEFAULT_SHOTS: usize = 1024;
/// The reported energy is re-estimated at the best parameters with this many
/// times the optimization shots.
pub const FINAL_SHOT_FACTOR: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VqeError {
    #[error("circuit has {circuit} qubits, Hamiltonian {hamiltonian}")]
    Width { circuit: usize, hamiltonian: usize },
    #[error("circuit has no parameters")]
    NoParameters,
    #[error("reference energy {0} is not finite")]
    Reference(f64),
    #[error(transparent)]
    Spsa(#[from] SpsaError),
    #[error(transparent)]
    Hamiltonian(#[from] HamiltonianError),
}

/// How energies are obtained inside the loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Estimator {
    Sampled { shots: usize },
    /// Exact expectation values (no shot noise).
    Exact,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VqeResult {
    pub label: String,
    pub best_theta: Vec<f64>,
    pub best_energy: f64,
    pub best_standard_error: f64,
    pub energy_difference: f64,
    pub trace: Vec<TracePoint>,
    /// Objective calls made by SPSA, excluding the final re-estimate.
    pub evaluations_used: usize,
}

/// `best_energy - reference`; positive when above the true ground state.
pub fn energy_difference(best_energy: f64, reference: f64) -> f64 {
    best_energy - reference
}

pub fn run_vqe(
    circuit: &ParameterizedCircuit,
    h: &PauliHamiltonian,
    config: &SpsaConfig,
    shots: usize,
    noise: Option<&NoiseModel>,
    reference_energy: f64,
) -> Result<VqeResult, VqeError> {
    run_vqe_with(
        circuit,
        h,
        config,
        Estimator::Sampled { shots },
        noise,
        reference_energy,
    )
}

/// Starting point: each parameter uniform in `[-pi, pi)` from the run seed.
pub fn initial_parameters(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    (0..n)
        .map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI))
        .collect()
}

pub fn run_vqe_with(
    circuit: &ParameterizedCircuit,
    h: &PauliHamiltonian,
    config: &SpsaConfig,
    estimator: Estimator,
    noise: Option<&NoiseModel>,
    reference_energy: f64,
) -> Result<VqeResult, VqeError> {
    if circuit.n_qubits() != h.n_qubits() {
        return Err(VqeError::Width {
            circuit: circuit.n_qubits(),
            hamiltonian: h.n_qubits(),
        });
    }
    if circuit.n_parameters() == 0 {
        return Err(VqeError::NoParameters);
    }
    if !reference_energy.is_finite() {
        return Err(VqeError::Reference(reference_energy));
    }
    if let Estimator::Sampled { shots: 0 } = estimator {
        return Err(HamiltonianError::Shots.into());
    }

    // every energy evaluation gets its own sampling seed from this stream
    let mut seeds = ChaCha8Rng::seed_from_u64(config.seed);
    seeds.set_stream(2);
    let evaluate = |theta: &[f64], shots_factor: usize, seed: u64| match estimator {
        Estimator::Sampled { shots } => {
            expectation_sampled(h, circuit, theta, shots * shots_factor, noise, seed)
        }
        Estimator::Exact => {
            let value = match noise {
                None => expectation_exact(h, &circuit.simulate_ideal(theta)?)?,
                Some(model) => expectation_exact(h, &circuit.simulate_noisy(theta, model)?)?,
            };
            Ok(EnergyEstimate {
                value,
                standard_error: 0.0,
                shots_used: 0,
            })
        }
    };

    let theta0 = initial_parameters(circuit.n_parameters(), config.seed);
    let outcome = spsa_minimize(
        |theta: &[f64]| {
            let seed = seeds.random::<u64>();
            evaluate(theta, 1, seed)
        },
        &theta0,
        config,
    )?;
    let final_seed = seeds.random::<u64>();
    let best = evaluate(&outcome.best_theta, FINAL_SHOT_FACTOR, final_seed)?;
    Ok(VqeResult {
        label: circuit.label().to_string(),
        best_theta: outcome.best_theta,
        best_energy: best.value,
        best_standard_error: best.standard_error,
        energy_difference: energy_difference(best.value, reference_energy),
        trace: outcome.trace,
        evaluations_used: outcome.evaluations,
    })
}
