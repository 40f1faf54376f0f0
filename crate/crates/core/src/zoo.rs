//! The twelve shipped hardware-efficient ansatz definitions.
//!
//! Definitions live in `data/circuits/*.circ` and are compiled in. Ids 1-8
//! share one layout and differ only in entangler kinds; 9-10 and 11-12 are
//! the two other layout families.

use crate::circuit::{CircuitError, ParameterizedCircuit};

pub const ZOO_SIZE: u32 = 12;

const DEFINITIONS: [&str; ZOO_SIZE as usize] = [
    include_str!("../data/circuits/circuit_01.circ"),
    include_str!("../data/circuits/circuit_02.circ"),
    include_str!("../data/circuits/circuit_03.circ"),
    include_str!("../data/circuits/circuit_04.circ"),
    include_str!("../data/circuits/circuit_05.circ"),
    include_str!("../data/circuits/circuit_06.circ"),
    include_str!("../data/circuits/circuit_07.circ"),
    include_str!("../data/circuits/circuit_08.circ"),
    include_str!("../data/circuits/circuit_09.circ"),
    include_str!("../data/circuits/circuit_10.circ"),
    include_str!("../data/circuits/circuit_11.circ"),
    include_str!("../data/circuits/circuit_12.circ"),
];

/// One-qubit H, RZ, RX circuit used to compare parameter samplers.
pub const SINGLE_QUBIT_HRZRX: &str = include_str!("../data/circuits/hrzrx.circ");

/// Loads zoo circuit `id` (1..=12). The label is the id as text.
pub fn zoo_circuit(id: u32) -> Result<ParameterizedCircuit, CircuitError> {
    if !(1..=ZOO_SIZE).contains(&id) {
        return Err(CircuitError::UnknownZooId(id));
    }
    ParameterizedCircuit::parse(DEFINITIONS[id as usize - 1], id.to_string())
}

/// Raw description text of zoo circuit `id`.
pub fn zoo_definition(id: u32) -> Option<&'static str> {
    (1..=ZOO_SIZE)
        .contains(&id)
        .then(|| DEFINITIONS[id as usize - 1])
}

/// Family name for the ids that carry one (1, 2, 9-12).
pub fn zoo_family(id: u32) -> Option<&'static str> {
    match id {
        1 => Some("RY_CX"),
        2 => Some("RY_CZ"),
        9 => Some("HRX_CX"),
        10 => Some("HRX_CZ"),
        11 => Some("RYRZ_CZ"),
        12 => Some("RYRZ_CX"),
        _ => None,
    }
}

pub fn zoo_ids() -> impl Iterator<Item = u32> {
    1..=ZOO_SIZE
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::GateKind::{self, CX, CZ};

    fn kinds(id: u32) -> Vec<GateKind> {
        zoo_circuit(id).unwrap().entangler_kinds()
    }

    #[test]
    fn entanglers_follow_the_ranking_tables() {
        let expected: [(u32, [GateKind; 4]); 8] = [
            (1, [CX, CX, CX, CX]),
            (2, [CZ, CZ, CZ, CZ]),
            (3, [CX, CZ, CX, CZ]),
            (4, [CX, CZ, CZ, CX]),
            (5, [CX, CX, CZ, CZ]),
            (6, [CZ, CX, CZ, CX]),
            (7, [CZ, CX, CX, CZ]),
            (8, [CZ, CZ, CX, CX]),
        ];
        for (id, seq) in expected {
            assert_eq!(kinds(id), seq, "circuit {id}");
        }
        assert!(kinds(9).iter().all(|&k| k == CX));
        assert!(kinds(10).iter().all(|&k| k == CZ));
        assert!(kinds(11).iter().all(|&k| k == CZ));
        assert!(kinds(12).iter().all(|&k| k == CX));
        assert_eq!(zoo_circuit(3).unwrap().gates_summary(), "CX,CZ,CX,CZ");
        assert_eq!(zoo_circuit(12).unwrap().gates_summary(), "CX");
    }

    #[test]
    fn width_four_and_one_entangling_block() {
        for id in zoo_ids() {
            let c = zoo_circuit(id).unwrap();
            assert_eq!(c.n_qubits(), 4);
            // depth one: all two-qubit gates form a single contiguous block
            let positions: Vec<usize> = c
                .gates()
                .iter()
                .enumerate()
                .filter(|(_, g)| g.kind.arity() == 2)
                .map(|(i, _)| i)
                .collect();
            let span = positions.last().unwrap() - positions.first().unwrap() + 1;
            assert_eq!(span, positions.len(), "circuit {id}");
            // every rotation layer touches each qubit exactly once
            for kind in [GateKind::RX, GateKind::RY, GateKind::RZ] {
                let count = c.gates().iter().filter(|g| g.kind == kind).count();
                assert_eq!(count % 4, 0, "circuit {id} {kind}");
            }
        }
    }

    #[test]
    fn parameter_counts() {
        let counts: Vec<usize> = zoo_ids()
            .map(|id| zoo_circuit(id).unwrap().n_parameters())
            .collect();
        assert_eq!(counts, [8, 8, 8, 8, 8, 8, 8, 8, 4, 4, 16, 16]);
        let bound = zoo_circuit(1).unwrap().bind(&[0.5; 8]).unwrap();
        assert_eq!(bound.iter().filter(|g| g.angle.is_some()).count(), 8);
    }

    #[test]
    fn out_of_range_ids() {
        assert_eq!(zoo_circuit(13), Err(CircuitError::UnknownZooId(13)));
        assert_eq!(zoo_circuit(0), Err(CircuitError::UnknownZooId(0)));
    }
}
