//! Parameterized circuits, the text description format and simulation.
//!
//! Description format, one statement per line:
//!
//! ```text
//! qubits 4          # must precede any gate
//! ry q0 p0          # rotation on qubit 0 bound to parameter slot 0
//! cx q0 q1          # control q0, target q1
//! ```
//!
//! Gate kinds are case-insensitive; `#` starts a comment.

use std::fmt;

use thiserror::Error;

use crate::gates::GateKind;
use crate::noise::{NoiseError, NoiseModel};
use crate::state::{check_targets, DensityMatrix, StateError, StateVector, MAX_QUBITS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("gate {index} ({kind}): {message}")]
    InvalidGate {
        index: usize,
        kind: GateKind,
        message: String,
    },
    #[error("parameter slot {0} is never used")]
    UnusedParameter(usize),
    #[error("expected {expected} parameters, got {found}")]
    ParameterCount { expected: usize, found: usize },
    #[error("zoo circuit id {0} is out of range 1..=12")]
    UnknownZooId(u32),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
}

/// One gate of a parameterized circuit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GateSpec {
    pub kind: GateKind,
    pub targets: Vec<usize>,
    /// Index into the parameter vector; present iff `kind` is a rotation.
    pub parameter_slot: Option<usize>,
}

impl GateSpec {
    pub fn fixed(kind: GateKind, targets: &[usize]) -> Self {
        Self {
            kind,
            targets: targets.to_vec(),
            parameter_slot: None,
        }
    }

    pub fn rotation(kind: GateKind, qubit: usize, slot: usize) -> Self {
        Self {
            kind,
            targets: vec![qubit],
            parameter_slot: Some(slot),
        }
    }
}

/// A gate with its rotation angle resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundGate {
    pub kind: GateKind,
    pub targets: Vec<usize>,
    pub angle: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParameterizedCircuit {
    n_qubits: usize,
    gates: Vec<GateSpec>,
    n_parameters: usize,
    label: String,
}

impl ParameterizedCircuit {
    /// Validates arity, parameter slots and qubit ranges. The parameter count
    /// is one past the largest slot, and every slot below it must be used.
    pub fn new(
        n_qubits: usize,
        gates: Vec<GateSpec>,
        label: impl Into<String>,
    ) -> Result<Self, CircuitError> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(StateError::TooManyQubits(n_qubits).into());
        }
        let mut used = Vec::new();
        for (index, gate) in gates.iter().enumerate() {
            let invalid = |message: String| CircuitError::InvalidGate {
                index,
                kind: gate.kind,
                message,
            };
            if gate.targets.len() != gate.kind.arity() {
                return Err(invalid(format!(
                    "expects {} qubit(s), got {}",
                    gate.kind.arity(),
                    gate.targets.len()
                )));
            }
            check_targets(&gate.targets, n_qubits).map_err(|e| invalid(e.to_string()))?;
            match (gate.kind.is_parameterized(), gate.parameter_slot) {
                (true, Some(slot)) => {
                    if used.len() <= slot {
                        used.resize(slot + 1, false);
                    }
                    used[slot] = true;
                }
                (true, None) => return Err(invalid("rotation without parameter slot".into())),
                (false, Some(_)) => return Err(invalid("fixed gate given a parameter".into())),
                (false, None) => {}
            }
        }
        if let Some(slot) = used.iter().position(|u| !u) {
            return Err(CircuitError::UnusedParameter(slot));
        }
        Ok(Self {
            n_qubits,
            gates,
            n_parameters: used.len(),
            label: label.into(),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_parameters(&self) -> usize {
        self.n_parameters
    }

    pub fn gates(&self) -> &[GateSpec] {
        &self.gates
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Two-qubit gate kinds in circuit order.
    pub fn entangler_kinds(&self) -> Vec<GateKind> {
        self.gates
            .iter()
            .filter(|g| g.kind.arity() == 2)
            .map(|g| g.kind)
            .collect()
    }

    /// Entangler summary as printed in ranking tables: a single kind when
    /// uniform (`CX`), otherwise the full sequence (`CX,CZ,CX,CZ`).
    pub fn gates_summary(&self) -> String {
        let kinds = self.entangler_kinds();
        let upper: Vec<String> = kinds.iter().map(|k| k.name().to_uppercase()).collect();
        match upper.first() {
            None => String::new(),
            Some(first) if upper.iter().all(|k| k == first) => first.clone(),
            Some(_) => upper.join(","),
        }
    }

    /// Slots consumed by gates of `kind`.
    pub fn slots_for(&self, kind: GateKind) -> Vec<usize> {
        let mut slots: Vec<usize> = self
            .gates
            .iter()
            .filter(|g| g.kind == kind)
            .filter_map(|g| g.parameter_slot)
            .collect();
        slots.sort_unstable();
        slots.dedup();
        slots
    }

    pub fn bind(&self, theta: &[f64]) -> Result<Vec<BoundGate>, CircuitError> {
        if theta.len() != self.n_parameters {
            return Err(CircuitError::ParameterCount {
                expected: self.n_parameters,
                found: theta.len(),
            });
        }
        Ok(self
            .gates
            .iter()
            .map(|g| BoundGate {
                kind: g.kind,
                targets: g.targets.clone(),
                angle: g.parameter_slot.map(|s| theta[s]),
            })
            .collect())
    }

    /// Evolves `|0...0>` through the bound circuit.
    pub fn simulate_ideal(&self, theta: &[f64]) -> Result<StateVector, CircuitError> {
        let bound = self.bind(theta)?;
        let mut psi = StateVector::zero(self.n_qubits)?;
        for gate in &bound {
            psi.apply_gate_in_place(&gate.kind.matrix(gate.angle), &gate.targets);
        }
        Ok(psi)
    }

    /// Density-matrix evolution where every gate is followed by the noise
    /// model's channels for that gate and qubit tuple.
    pub fn simulate_noisy(
        &self,
        theta: &[f64],
        noise: &NoiseModel,
    ) -> Result<DensityMatrix, CircuitError> {
        let bound = self.bind(theta)?;
        let mut rho = DensityMatrix::zero(self.n_qubits)?;
        for gate in &bound {
            let channels = noise.gate_noise(gate.kind, &gate.targets)?;
            rho.apply_gate_in_place(&gate.kind.matrix(gate.angle), &gate.targets);
            for step in channels.steps() {
                rho.apply_kraus_in_place(&step.channel, &step.targets);
            }
        }
        Ok(rho)
    }

    /// Parses the text description format.
    pub fn parse(text: &str, label: impl Into<String>) -> Result<Self, CircuitError> {
        let mut n_qubits: Option<usize> = None;
        let mut gates = Vec::new();
        for (number, raw) in text.lines().enumerate() {
            let line = number + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |message: String| CircuitError::Parse { line, message };
            let mut fields = content.split_whitespace();
            let head = fields.next().unwrap_or_default();
            if head.eq_ignore_ascii_case("qubits") {
                if n_qubits.is_some() {
                    return Err(err("duplicate `qubits` header".into()));
                }
                let n = fields
                    .next()
                    .and_then(|v| v.parse::<usize>().ok())
                    .filter(|&n| (1..=MAX_QUBITS).contains(&n))
                    .ok_or_else(|| err(format!("expected `qubits <1..={MAX_QUBITS}>`")))?;
                if fields.next().is_some() {
                    return Err(err("trailing tokens after qubit count".into()));
                }
                n_qubits = Some(n);
                continue;
            }
            let n = n_qubits.ok_or_else(|| err("gate before `qubits` header".into()))?;
            let kind: GateKind = head.parse().map_err(err)?;
            let mut targets = Vec::new();
            let mut slot = None;
            for token in fields {
                let lower = token.to_ascii_lowercase();
                if let Some(q) = lower.strip_prefix('q') {
                    let q: usize = q
                        .parse()
                        .map_err(|_| err(format!("bad qubit token `{token}`")))?;
                    if q >= n {
                        return Err(err(format!("qubit q{q} out of range for {n} qubits")));
                    }
                    if slot.is_some() {
                        return Err(err("qubits must precede the parameter".into()));
                    }
                    targets.push(q);
                } else if let Some(p) = lower.strip_prefix('p') {
                    if slot.is_some() {
                        return Err(err("more than one parameter".into()));
                    }
                    slot = Some(
                        p.parse()
                            .map_err(|_| err(format!("bad parameter token `{token}`")))?,
                    );
                } else {
                    return Err(err(format!("unexpected token `{token}`")));
                }
            }
            if targets.len() != kind.arity() {
                return Err(err(format!(
                    "`{kind}` takes {} qubit(s), got {}",
                    kind.arity(),
                    targets.len()
                )));
            }
            if kind.is_parameterized() != slot.is_some() {
                return Err(err(if slot.is_some() {
                    format!("`{kind}` takes no parameter")
                } else {
                    format!("`{kind}` needs a parameter slot")
                }));
            }
            if let Err(e) = check_targets(&targets, n) {
                return Err(err(e.to_string()));
            }
            gates.push(GateSpec {
                kind,
                targets,
                parameter_slot: slot,
            });
        }
        let n = n_qubits.ok_or(CircuitError::Parse {
            line: text.lines().count().max(1),
            message: "missing `qubits` header".into(),
        })?;
        Self::new(n, gates, label)
    }
}

/// Canonical description text: header, then one gate per line, no comments.
impl fmt::Display for ParameterizedCircuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "qubits {}", self.n_qubits)?;
        for g in &self.gates {
            write!(f, "{}", g.kind)?;
            for q in &g.targets {
                write!(f, " q{q}")?;
            }
            if let Some(p) = g.parameter_slot {
                write!(f, " p{p}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Parses a circuit description. Alias of [`ParameterizedCircuit::parse`].
pub fn load_circuit(text: &str, label: impl Into<String>) -> Result<ParameterizedCircuit, CircuitError> {
    ParameterizedCircuit::parse(text, label)
}
