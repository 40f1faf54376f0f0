//! Simulation and benchmarking of hardware-efficient ansatz circuits for
//! molecular VQE: state-vector and density-matrix simulation, device noise,
//! Pauli Hamiltonians from electronic-structure integrals, SPSA-driven VQE and
//! sampling-based expressibility.

pub mod bench;
pub mod circuit;
pub mod data;
pub mod expressibility;
pub mod fermion;
pub mod gates;
pub mod hamiltonian;
pub mod noise;
pub mod pauli;
pub mod spsa;
pub mod state;
pub mod vqe;
pub mod zoo;

pub use circuit::{load_circuit, CircuitError, GateSpec, ParameterizedCircuit};
pub use fermion::{jordan_wigner, IntegralSet};
pub use gates::GateKind;
pub use hamiltonian::{
    exact_ground_energy, exact_ground_state, expectation_exact, expectation_sampled,
    EnergyEstimate,
};
pub use noise::{build_noise_model, DeviceCalibration, NoiseError, NoiseModel};
pub use pauli::{PauliHamiltonian, PauliString, PauliTerm};
pub use state::{fidelity, DensityMatrix, KrausSet, StateError, StateVector};
pub use zoo::zoo_circuit;
