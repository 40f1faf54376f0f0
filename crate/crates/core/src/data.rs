//! Data files compiled into the library: the H2 reference problem and the
//! synthetic device calibrations.

use crate::fermion::{IntegralError, IntegralSet};
use crate::noise::{DeviceCalibration, NoiseError};
use crate::pauli::{PauliError, PauliHamiltonian};

pub const H2_INTEGRALS: &str = include_str!("../data/h2/h2_sto3g_0735.int");
pub const H2_HAMILTONIAN: &str = include_str!("../data/h2/h2_sto3g_0735.ham");

/// `(file stem, contents)` of the seven synthetic device calibrations, roughly
/// from least to most noisy.
pub const CALIBRATIONS: [(&str, &str); 7] = [
    ("armonk-like", include_str!("../data/calibrations/armonk-like.cal")),
    ("santiago-like", include_str!("../data/calibrations/santiago-like.cal")),
    ("athens-like", include_str!("../data/calibrations/athens-like.cal")),
    ("valencia-like", include_str!("../data/calibrations/valencia-like.cal")),
    ("vigo-like", include_str!("../data/calibrations/vigo-like.cal")),
    ("ibmqx2-like", include_str!("../data/calibrations/ibmqx2-like.cal")),
    ("melbourne-like", include_str!("../data/calibrations/melbourne-like.cal")),
];

/// Infinite T1/T2 and no gate or readout error.
pub const ZERO_CALIBRATION: &str = include_str!("../data/calibrations/zero.cal");

pub fn h2_integrals() -> Result<IntegralSet, IntegralError> {
    IntegralSet::parse(H2_INTEGRALS)
}

pub fn h2_hamiltonian() -> Result<PauliHamiltonian, PauliError> {
    PauliHamiltonian::parse(H2_HAMILTONIAN)
}

pub fn calibration(name: &str) -> Option<Result<DeviceCalibration, NoiseError>> {
    if name == "zero" {
        return Some(DeviceCalibration::parse(ZERO_CALIBRATION));
    }
    CALIBRATIONS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| DeviceCalibration::parse(text))
}

pub fn synthetic_calibrations() -> Result<Vec<DeviceCalibration>, NoiseError> {
    CALIBRATIONS
        .iter()
        .map(|(_, text)| DeviceCalibration::parse(text))
        .collect()
}
