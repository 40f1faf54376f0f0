//! The gate set used by the ansatz zoo.

use std::fmt;
use std::str::FromStr;

use crate::state::{CMatrix, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GateKind {
    H,
    X,
    RX,
    RY,
    RZ,
    CX,
    CZ,
}

impl GateKind {
    pub const ALL: [GateKind; 7] = [
        GateKind::H,
        GateKind::X,
        GateKind::RX,
        GateKind::RY,
        GateKind::RZ,
        GateKind::CX,
        GateKind::CZ,
    ];

    pub fn arity(self) -> usize {
        match self {
            GateKind::CX | GateKind::CZ => 2,
            _ => 1,
        }
    }

    pub fn is_parameterized(self) -> bool {
        matches!(self, GateKind::RX | GateKind::RY | GateKind::RZ)
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::H => "h",
            GateKind::X => "x",
            GateKind::RX => "rx",
            GateKind::RY => "ry",
            GateKind::RZ => "rz",
            GateKind::CX => "cx",
            GateKind::CZ => "cz",
        }
    }

    /// Unitary in the local basis of the gate's targets. For `CX` the first
    /// target (local bit 0) is the control. `angle` is ignored for fixed gates
    /// and treated as zero if missing on a rotation.
    pub fn matrix(self, angle: Option<f64>) -> CMatrix {
        let z = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        let theta = angle.unwrap_or(0.0);
        let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        match self {
            GateKind::H => {
                let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                CMatrix::from_row_slice(2, 2, &[h, h, h, -h])
            }
            GateKind::X => CMatrix::from_row_slice(2, 2, &[z, one, one, z]),
            GateKind::RX => CMatrix::from_row_slice(
                2,
                2,
                &[C64::new(c, 0.0), C64::new(0.0, -s), C64::new(0.0, -s), C64::new(c, 0.0)],
            ),
            GateKind::RY => CMatrix::from_row_slice(
                2,
                2,
                &[C64::new(c, 0.0), C64::new(-s, 0.0), C64::new(s, 0.0), C64::new(c, 0.0)],
            ),
            GateKind::RZ => CMatrix::from_row_slice(
                2,
                2,
                &[C64::new(c, -s), z, z, C64::new(c, s)],
            ),
            GateKind::CX => {
                let mut m = CMatrix::zeros(4, 4);
                m[(0, 0)] = one;
                m[(2, 2)] = one;
                m[(3, 1)] = one;
                m[(1, 3)] = one;
                m
            }
            GateKind::CZ => {
                let mut m = CMatrix::identity(4, 4);
                m[(3, 3)] = -one;
                m
            }
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GateKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GateKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown gate kind `{s}`"))
    }
}

/// `S^dagger`, used only for Y-basis measurement.
pub(crate) fn s_dagger() -> CMatrix {
    let mut m = CMatrix::identity(2, 2);
    m[(1, 1)] = C64::new(0.0, -1.0);
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::is_unitary;

    #[test]
    fn every_gate_is_unitary() {
        for kind in GateKind::ALL {
            assert!(is_unitary(&kind.matrix(Some(0.37)), 1e-12), "{kind}");
        }
        assert!(is_unitary(&s_dagger(), 1e-12));
    }

    #[test]
    fn parse_is_case_insensitive() {
        assert_eq!("CX".parse::<GateKind>(), Ok(GateKind::CX));
        assert_eq!("Ry".parse::<GateKind>(), Ok(GateKind::RY));
        assert!("foo".parse::<GateKind>().is_err());
    }
}
