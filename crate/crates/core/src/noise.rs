//! Device noise: depolarizing and thermal-relaxation channels, readout
//! confusion, calibration files and the per-gate noise model built from them.
//!
//! Calibration file format (`#` comments):
//!
//! ```text
//! device ibmqx2-like
//! qubit 0 t1 52.3 t2 41.0 ro01 0.021 ro10 0.043
//! gate ry 0 error 0.0011 duration 35.5
//! gate cx 0 1 error 0.021 duration 320
//! ```
//!
//! T1/T2 are in microseconds, durations in nanoseconds. `inf` is accepted for
//! T1 and T2.

use std::collections::BTreeMap;
use std::fmt;

use log::warn;
use thiserror::Error;

use crate::gates::GateKind;
use crate::state::{CMatrix, KrausSet, StateError, C64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NoiseError {
    #[error("probability {0} outside [0, 1]")]
    Probability(f64),
    #[error("depolarizing channel supports 1 or 2 qubits, got {0}")]
    Arity(usize),
    #[error("invalid relaxation times: T1 = {t1} us, T2 = {t2} us (need T1 > 0, 0 < T2 <= 2 T1)")]
    RelaxationTimes { t1: f64, t2: f64 },
    #[error("invalid gate duration {0} ns")]
    Duration(f64),
    #[error("confusion matrix row {row} sums to {sum}, not 1")]
    NotStochastic { row: usize, sum: f64 },
    #[error("distribution has {found} entries, expected {expected}")]
    DistributionSize { expected: usize, found: usize },
    #[error("distribution sums to {0}, not 1")]
    DistributionSum(f64),
    #[error("noise model `{model}` has no entry for {kind} on qubits {qubits:?}")]
    MissingGate {
        model: String,
        kind: GateKind,
        qubits: Vec<usize>,
    },
    #[error("noise model `{model}` has no readout entry for qubit {qubit}")]
    MissingQubit { model: String, qubit: usize },
    #[error("calibration line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("calibration `{name}`: {message}")]
    Calibration { name: String, message: String },
    #[error(transparent)]
    State(#[from] StateError),
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn pauli(index: usize) -> CMatrix {
    let (z, o, i) = (c(0.0), c(1.0), C64::new(0.0, 1.0));
    match index {
        0 => CMatrix::identity(2, 2),
        1 => CMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        2 => CMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        _ => CMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
    }
}

fn check_probability(p: f64) -> Result<(), NoiseError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(NoiseError::Probability(p))
    }
}

/// `rho -> (1 - p) rho + p I / 2^n` in Pauli-Kraus form: weight `p / 4^n` on
/// each non-identity Pauli and `1 - p + p / 4^n` on the identity.
pub fn depolarizing_channel(p: f64, n_qubits: usize) -> Result<KrausSet, NoiseError> {
    check_probability(p)?;
    if !(1..=2).contains(&n_qubits) {
        return Err(NoiseError::Arity(n_qubits));
    }
    let terms = 1usize << (2 * n_qubits);
    let weight = p / terms as f64;
    let mut operators = Vec::with_capacity(terms);
    for index in 0..terms {
        let w = if index == 0 { 1.0 - p + weight } else { weight };
        if w <= 0.0 {
            continue;
        }
        // base-4 digits: low digit acts on the low local qubit
        let mut op = pauli(index % 4);
        if n_qubits == 2 {
            op = pauli(index / 4).kronecker(&op);
        }
        operators.push(op * c(w.sqrt()));
    }
    Ok(KrausSet::new(operators)?)
}

/// Amplitude damping toward `|0>` with probability `1 - exp(-t/T1)` combined
/// with extra dephasing so that coherences decay as `exp(-t/T2)`.
pub fn thermal_relaxation_channel(
    t1_us: f64,
    t2_us: f64,
    duration_ns: f64,
) -> Result<KrausSet, NoiseError> {
    if t1_us.is_nan() || t2_us.is_nan() || t1_us <= 0.0 || t2_us <= 0.0 || t2_us > 2.0 * t1_us {
        return Err(NoiseError::RelaxationTimes {
            t1: t1_us,
            t2: t2_us,
        });
    }
    if !(duration_ns >= 0.0 && duration_ns.is_finite()) {
        return Err(NoiseError::Duration(duration_ns));
    }
    let t = duration_ns * 1e-3;
    let gamma = 1.0 - (-t / t1_us).exp();
    // remaining pure-dephasing factor after amplitude damping
    let lambda = (-t * (1.0 / t2_us - 0.5 / t1_us)).exp().min(1.0);

    let (z, one) = (c(0.0), c(1.0));
    let damp = [
        CMatrix::from_row_slice(2, 2, &[one, z, z, c((1.0 - gamma).sqrt())]),
        CMatrix::from_row_slice(2, 2, &[z, c(gamma.sqrt()), z, z]),
    ];
    let dephase = [
        CMatrix::identity(2, 2) * c(((1.0 + lambda) / 2.0).sqrt()),
        pauli(3) * c(((1.0 - lambda) / 2.0).sqrt()),
    ];
    let operators: Vec<CMatrix> = dephase
        .iter()
        .flat_map(|d| damp.iter().map(move |a| d * a))
        .filter(|k| k.norm() > 0.0)
        .collect();
    Ok(KrausSet::new(operators)?)
}

/// Row-stochastic readout matrix: `m[prepared][read]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Confusion(pub [[f64; 2]; 2]);

impl Confusion {
    pub const IDENTITY: Confusion = Confusion([[1.0, 0.0], [0.0, 1.0]]);

    /// From `p(read 1 | prepared 0)` and `p(read 0 | prepared 1)`.
    pub fn from_flips(ro01: f64, ro10: f64) -> Result<Self, NoiseError> {
        check_probability(ro01)?;
        check_probability(ro10)?;
        Ok(Confusion([[1.0 - ro01, ro01], [ro10, 1.0 - ro10]]))
    }

    pub fn validate(&self) -> Result<(), NoiseError> {
        for (row, r) in self.0.iter().enumerate() {
            for &p in r {
                check_probability(p)?;
            }
            let sum = r[0] + r[1];
            if (sum - 1.0).abs() > 1e-12 {
                return Err(NoiseError::NotStochastic { row, sum });
            }
        }
        Ok(())
    }
}

/// Pushes an outcome distribution through independent per-qubit readout
/// confusion. Bit `q` of an outcome index is qubit `q`.
pub fn readout_apply(confusion: &[Confusion], distribution: &[f64]) -> Result<Vec<f64>, NoiseError> {
    for m in confusion {
        m.validate()?;
    }
    let expected = 1usize << confusion.len();
    if distribution.len() != expected {
        return Err(NoiseError::DistributionSize {
            expected,
            found: distribution.len(),
        });
    }
    let total: f64 = distribution.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(NoiseError::DistributionSum(total));
    }
    Ok(apply_confusion(confusion, distribution))
}

pub(crate) fn apply_confusion(confusion: &[Confusion], distribution: &[f64]) -> Vec<f64> {
    let mut current = distribution.to_vec();
    for (q, m) in confusion.iter().enumerate() {
        if *m == Confusion::IDENTITY {
            continue;
        }
        let bit = 1usize << q;
        let mut next = vec![0.0; current.len()];
        for (index, &p) in current.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let prepared = (index & bit != 0) as usize;
            next[index & !bit] += p * m.0[prepared][0];
            next[index | bit] += p * m.0[prepared][1];
        }
        current = next;
    }
    current
}

#[derive(Debug, Clone, PartialEq)]
pub struct QubitCalibration {
    pub t1_us: f64,
    pub t2_us: f64,
    /// p(read 1 | prepared 0)
    pub ro01: f64,
    /// p(read 0 | prepared 1)
    pub ro10: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateCalibration {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    pub error: f64,
    pub duration_ns: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviceCalibration {
    pub name: String,
    pub qubits: Vec<QubitCalibration>,
    pub gates: Vec<GateCalibration>,
}

impl DeviceCalibration {
    pub fn parse(text: &str) -> Result<Self, NoiseError> {
        let mut name = None;
        let mut qubits: BTreeMap<usize, QubitCalibration> = BTreeMap::new();
        let mut gates = Vec::new();
        for (number, raw) in text.lines().enumerate() {
            let line = number + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |message: String| NoiseError::Parse { line, message };
            let fields: Vec<&str> = content.split_whitespace().collect();
            let number = |s: &str| -> Result<f64, NoiseError> {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| !v.is_nan())
                    .ok_or_else(|| err(format!("bad number `{s}`")))
            };
            let index = |s: &str| -> Result<usize, NoiseError> {
                s.parse::<usize>()
                    .map_err(|_| err(format!("bad qubit index `{s}`")))
            };
            match fields[0] {
                "device" => {
                    if fields.len() != 2 {
                        return Err(err("expected `device <name>`".into()));
                    }
                    name = Some(fields[1].to_string());
                }
                "qubit" => {
                    let keys = ["t1", "t2", "ro01", "ro10"];
                    if fields.len() != 10
                        || keys
                            .iter()
                            .enumerate()
                            .any(|(i, k)| fields[2 + 2 * i] != *k)
                    {
                        return Err(err(
                            "expected `qubit <i> t1 <us> t2 <us> ro01 <p> ro10 <p>`".into(),
                        ));
                    }
                    let q = index(fields[1])?;
                    let entry = QubitCalibration {
                        t1_us: number(fields[3])?,
                        t2_us: number(fields[5])?,
                        ro01: number(fields[7])?,
                        ro10: number(fields[9])?,
                    };
                    if qubits.insert(q, entry).is_some() {
                        return Err(err(format!("qubit {q} listed twice")));
                    }
                }
                "gate" => {
                    let kind: GateKind = fields
                        .get(1)
                        .ok_or_else(|| err("missing gate kind".into()))?
                        .parse()
                        .map_err(err)?;
                    let arity = kind.arity();
                    if fields.len() != 2 + arity + 4
                        || fields[2 + arity] != "error"
                        || fields[4 + arity] != "duration"
                    {
                        return Err(err(format!(
                            "expected `gate {kind} <{arity} qubit(s)> error <p> duration <ns>`"
                        )));
                    }
                    let qs = fields[2..2 + arity]
                        .iter()
                        .map(|s| index(s))
                        .collect::<Result<Vec<_>, _>>()?;
                    gates.push(GateCalibration {
                        kind,
                        qubits: qs,
                        error: number(fields[3 + arity])?,
                        duration_ns: number(fields[5 + arity])?,
                    });
                }
                other => return Err(err(format!("unknown statement `{other}`"))),
            }
        }
        let name = name.ok_or(NoiseError::Parse {
            line: 1,
            message: "missing `device <name>` header".into(),
        })?;
        let n = qubits.len();
        if let Some((_, (&q, _))) = qubits.iter().enumerate().find(|(i, (q, _))| *i != **q) {
            return Err(NoiseError::Calibration {
                name,
                message: format!("qubit indices must be 0..{n}; found {q}"),
            });
        }
        let cal = Self {
            name,
            qubits: qubits.into_values().collect(),
            gates,
        };
        cal.validate()?;
        Ok(cal)
    }

    pub fn n_qubits(&self) -> usize {
        self.qubits.len()
    }

    pub fn validate(&self) -> Result<(), NoiseError> {
        let bad = |message: String| NoiseError::Calibration {
            name: self.name.clone(),
            message,
        };
        for (i, q) in self.qubits.iter().enumerate() {
            if !(q.t1_us > 0.0 && q.t2_us > 0.0 && q.t2_us <= 2.0 * q.t1_us) {
                return Err(bad(format!(
                    "qubit {i}: T1 = {}, T2 = {} violates T1 > 0, 0 < T2 <= 2 T1",
                    q.t1_us, q.t2_us
                )));
            }
            for p in [q.ro01, q.ro10] {
                if !(0.0..=1.0).contains(&p) {
                    return Err(bad(format!("qubit {i}: readout probability {p}")));
                }
            }
        }
        for g in &self.gates {
            if g.qubits.len() != g.kind.arity() {
                return Err(bad(format!("{} on {:?}: wrong arity", g.kind, g.qubits)));
            }
            if let Err(e) = crate::state::check_targets(&g.qubits, self.n_qubits()) {
                return Err(bad(format!("{} on {:?}: {e}", g.kind, g.qubits)));
            }
            if !(0.0..=1.0).contains(&g.error) {
                return Err(bad(format!("{} on {:?}: error {}", g.kind, g.qubits, g.error)));
            }
            if !(g.duration_ns >= 0.0 && g.duration_ns.is_finite()) {
                return Err(bad(format!(
                    "{} on {:?}: duration {}",
                    g.kind, g.qubits, g.duration_ns
                )));
            }
        }
        Ok(())
    }

    /// Copy with every gate error multiplied by `factor` (capped at 1).
    pub fn scale_gate_errors(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for g in &mut out.gates {
            g.error = (g.error * factor).min(1.0);
        }
        out
    }
}

impl fmt::Display for DeviceCalibration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "device {}", self.name)?;
        for (i, q) in self.qubits.iter().enumerate() {
            writeln!(
                f,
                "qubit {i} t1 {} t2 {} ro01 {} ro10 {}",
                q.t1_us, q.t2_us, q.ro01, q.ro10
            )?;
        }
        for g in &self.gates {
            write!(f, "gate {}", g.kind)?;
            for q in &g.qubits {
                write!(f, " {q}")?;
            }
            writeln!(f, " error {} duration {}", g.error, g.duration_ns)?;
        }
        Ok(())
    }
}

/// One channel of a gate's error model, on global qubit indices.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelStep {
    pub channel: KrausSet,
    pub targets: Vec<usize>,
}

/// The channels applied after one gate, in order.
#[derive(Debug, Clone, PartialEq)]
pub struct GateNoise {
    qubits: Vec<usize>,
    depolarizing_strength: f64,
    steps: Vec<ChannelStep>,
}

impl GateNoise {
    pub fn steps(&self) -> &[ChannelStep] {
        &self.steps
    }

    pub fn qubits(&self) -> &[usize] {
        &self.qubits
    }

    pub fn depolarizing_strength(&self) -> f64 {
        self.depolarizing_strength
    }

    /// The whole error channel as a single Kraus set on the gate's qubits
    /// (local bit `j` = `qubits()[j]`).
    pub fn composed(&self) -> KrausSet {
        let mut total = KrausSet::identity(self.qubits.len());
        for step in &self.steps {
            let local = if step.targets.len() == self.qubits.len() {
                step.channel.clone()
            } else {
                // a single-qubit step inside a two-qubit gate
                let pos = self.qubits.iter().position(|q| *q == step.targets[0]).unwrap_or(0);
                if pos == 0 {
                    step.channel.tensor(&KrausSet::identity(1))
                } else {
                    KrausSet::identity(1).tensor(&step.channel)
                }
            };
            total = total.then(&local).expect("arity matches by construction");
        }
        total
    }
}

/// Gate channels keyed by `(kind, qubits)` plus per-qubit readout confusion.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    name: String,
    gates: BTreeMap<(GateKind, Vec<usize>), GateNoise>,
    readout: Vec<Confusion>,
}

fn is_identity_channel(k: &KrausSet) -> bool {
    k.operators().len() == 1 && crate::state::identity_deviation(&k.operators()[0]) < 1e-15
}

/// Depolarizing strength that brings a channel with process fidelity
/// `base_fidelity` on `d`-dimensional input to average infidelity `error`.
/// Returns `None` when the base channel alone already exceeds `error`.
pub fn solve_depolarizing_strength(base_fidelity: f64, error: f64, d: f64) -> Option<f64> {
    let target = ((d + 1.0) * (1.0 - error) - 1.0) / d;
    let p = (base_fidelity - target) / (base_fidelity - 1.0 / (d * d));
    if p < -1e-15 {
        None
    } else {
        Some(p.max(0.0))
    }
}

impl NoiseModel {
    /// Noise model with no errors, covering every gate on `n_qubits` qubits.
    pub fn ideal(n_qubits: usize) -> Self {
        Self {
            name: "ideal".into(),
            gates: BTreeMap::new(),
            readout: vec![Confusion::IDENTITY; n_qubits],
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_qubits(&self) -> usize {
        self.readout.len()
    }

    pub fn readout(&self) -> &[Confusion] {
        &self.readout
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(GateKind, Vec<usize>), &GateNoise)> {
        self.gates.iter()
    }

    /// Channels for `kind` on `qubits`. A two-qubit entry also covers the
    /// reversed orientation unless that orientation has its own entry.
    pub fn gate_noise(&self, kind: GateKind, qubits: &[usize]) -> Result<&GateNoise, NoiseError> {
        static NOISELESS: GateNoise = GateNoise {
            qubits: Vec::new(),
            depolarizing_strength: 0.0,
            steps: Vec::new(),
        };
        if self.gates.is_empty() && qubits.iter().all(|&q| q < self.n_qubits()) {
            return Ok(&NOISELESS);
        }
        if let Some(g) = self.gates.get(&(kind, qubits.to_vec())) {
            return Ok(g);
        }
        if qubits.len() == 2 {
            if let Some(g) = self.gates.get(&(kind, vec![qubits[1], qubits[0]])) {
                return Ok(g);
            }
        }
        Err(NoiseError::MissingGate {
            model: self.name.clone(),
            kind,
            qubits: qubits.to_vec(),
        })
    }
}

/// Builds per-gate channels: depolarizing noise of the strength that makes the
/// composed channel's average gate infidelity equal the calibrated error,
/// followed by thermal relaxation on every participating qubit for the gate
/// duration. Readout confusion is copied per qubit.
pub fn build_noise_model(cal: &DeviceCalibration) -> Result<NoiseModel, NoiseError> {
    cal.validate()?;
    let readout = cal
        .qubits
        .iter()
        .map(|q| Confusion::from_flips(q.ro01, q.ro10))
        .collect::<Result<Vec<_>, _>>()?;
    let mut gates = BTreeMap::new();
    for g in &cal.gates {
        let thermal = g
            .qubits
            .iter()
            .map(|&q| {
                let qc = &cal.qubits[q];
                thermal_relaxation_channel(qc.t1_us, qc.t2_us, g.duration_ns)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let base_fidelity: f64 = thermal.iter().map(KrausSet::process_fidelity).product();
        let d = (1usize << g.qubits.len()) as f64;
        let p = match solve_depolarizing_strength(base_fidelity, g.error, d) {
            Some(p) if p > 1.0 => {
                warn!(
                    "{}: {} on {:?} needs depolarizing strength {p:.4}; capped at 1",
                    cal.name, g.kind, g.qubits
                );
                1.0
            }
            Some(p) => p,
            None => {
                warn!(
                    "{}: thermal relaxation alone exceeds the calibrated error of {} on {:?}; depolarizing strength set to 0",
                    cal.name, g.kind, g.qubits
                );
                0.0
            }
        };
        let mut steps = Vec::new();
        if p > 0.0 {
            steps.push(ChannelStep {
                channel: depolarizing_channel(p, g.qubits.len())?,
                targets: g.qubits.clone(),
            });
        }
        for (channel, &q) in thermal.into_iter().zip(&g.qubits) {
            if !is_identity_channel(&channel) && channel.process_fidelity() < 1.0 {
                steps.push(ChannelStep {
                    channel,
                    targets: vec![q],
                });
            }
        }
        gates.insert(
            (g.kind, g.qubits.clone()),
            GateNoise {
                qubits: g.qubits.clone(),
                depolarizing_strength: p,
                steps,
            },
        );
    }
    Ok(NoiseModel {
        name: cal.name.clone(),
        gates,
        readout,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{DensityMatrix, StateVector};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn random_density(seed: u64, n: usize) -> DensityMatrix {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let dim = 1 << n;
        let a = CMatrix::from_fn(dim, dim, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let m = &a * a.adjoint();
        let tr = m.trace();
        DensityMatrix::from_matrix(m / tr).unwrap()
    }

    #[test]
    fn depolarizing_examples() {
        let id = depolarizing_channel(0.0, 1).unwrap();
        assert_abs_diff_eq!(id.process_fidelity(), 1.0, epsilon = 1e-15);
        let rho = random_density(3, 1);
        let out = rho.apply_kraus(&depolarizing_channel(1.0, 1).unwrap(), &[0]).unwrap();
        assert_abs_diff_eq!((out.matrix() - CMatrix::identity(2, 2) * c(0.5)).norm(), 0.0, epsilon = 1e-12);

        // formula oracle on two qubits
        let rho = random_density(5, 2);
        let p = 0.3;
        let out = rho.apply_kraus(&depolarizing_channel(p, 2).unwrap(), &[0, 1]).unwrap();
        let expect = rho.matrix() * c(1.0 - p) + CMatrix::identity(4, 4) * c(p / 4.0);
        assert_abs_diff_eq!((out.matrix() - expect).norm(), 0.0, epsilon = 1e-12);

        assert!(matches!(depolarizing_channel(1.2, 1), Err(NoiseError::Probability(_))));
        assert!(matches!(depolarizing_channel(0.1, 3), Err(NoiseError::Arity(3))));
    }

    #[test]
    fn thermal_relaxation_limits() {
        let id = thermal_relaxation_channel(50.0, 70.0, 0.0).unwrap();
        assert_abs_diff_eq!(id.process_fidelity(), 1.0, epsilon = 1e-15);

        let one = DensityMatrix::from_pure(&StateVector::basis(1, 1).unwrap());
        let full = thermal_relaxation_channel(50.0, 70.0, 50.0e3 * 1e6).unwrap();
        let out = one.apply_kraus(&full, &[0]).unwrap();
        assert_abs_diff_eq!(out.matrix()[(0, 0)].re, 1.0, epsilon = 1e-9);

        assert!(thermal_relaxation_channel(10.0, 25.0, 1.0).is_err());
        assert!(thermal_relaxation_channel(0.0, 0.0, 1.0).is_err());
        assert!(thermal_relaxation_channel(10.0, 10.0, -1.0).is_err());
        assert!(thermal_relaxation_channel(f64::INFINITY, f64::INFINITY, 100.0).is_ok());
    }

    /// Time evolution under the Lindblad generator with amplitude damping rate
    /// `1/T1` and pure dephasing rate `1/T2 - 1/(2 T1)`, via a scaled Taylor
    /// series of the 4x4 superoperator acting on row-major `vec(rho)`.
    fn lindblad_evolve(rho: &CMatrix, t1: f64, t2: f64, t: f64) -> CMatrix {
        let gamma1 = 1.0 / t1;
        let gamma_phi = 1.0 / t2 - 0.5 / t1;
        // Liouvillian on (r00, r01, r10, r11)
        let mut l = CMatrix::zeros(4, 4);
        l[(0, 3)] = c(gamma1);
        l[(3, 3)] = c(-gamma1);
        let off = -(0.5 * gamma1 + gamma_phi);
        l[(1, 1)] = c(off);
        l[(2, 2)] = c(off);
        let steps = 8;
        let a = l * c(t / f64::from(1u32 << steps));
        let mut exp = CMatrix::identity(4, 4);
        let mut term = CMatrix::identity(4, 4);
        for k in 1..20 {
            term = &term * &a / c(k as f64);
            exp += &term;
        }
        for _ in 0..steps {
            exp = &exp * &exp;
        }
        let v = CMatrix::from_row_slice(4, 1, &[rho[(0, 0)], rho[(0, 1)], rho[(1, 0)], rho[(1, 1)]]);
        let out = exp * v;
        CMatrix::from_row_slice(2, 2, &[out[0], out[1], out[2], out[3]])
    }

    #[test]
    fn thermal_relaxation_matches_lindblad_oracle() {
        let plus = CMatrix::from_element(2, 2, c(0.5));
        let pure_dephasing = thermal_relaxation_channel(1e9, 40.0, 5000.0).unwrap();
        let rho = DensityMatrix::from_matrix(plus.clone()).unwrap();
        let out = rho.apply_kraus(&pure_dephasing, &[0]).unwrap();
        let expect = lindblad_evolve(&plus, 1e9, 40.0, 5.0);
        assert_abs_diff_eq!((out.matrix() - &expect).norm(), 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(out.matrix()[(0, 1)].re, 0.5 * (-5.0f64 / 40.0).exp(), epsilon = 1e-9);

        for (t1, t2, t) in [(50.0, 30.0, 800.0), (20.0, 40.0, 3000.0), (80.0, 5.0, 120.0)] {
            let rho = random_density(t as u64, 1);
            let out = rho
                .apply_kraus(&thermal_relaxation_channel(t1, t2, t).unwrap(), &[0])
                .unwrap();
            let expect = lindblad_evolve(rho.matrix(), t1, t2, t * 1e-3);
            assert_abs_diff_eq!((out.matrix() - expect).norm(), 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn thermal_relaxation_is_continuous_in_time() {
        // max trace distance over the six Pauli eigenstates (a 2-design)
        let probes: Vec<DensityMatrix> = {
            let h = std::f64::consts::FRAC_1_SQRT_2;
            let i = C64::new(0.0, h);
            [
                [c(1.0), c(0.0)],
                [c(0.0), c(1.0)],
                [c(h), c(h)],
                [c(h), c(-h)],
                [c(h), i],
                [c(h), -i],
            ]
            .iter()
            .map(|a| DensityMatrix::from_pure(&StateVector::from_amplitudes(a.to_vec()).unwrap()))
            .collect()
        };
        let distance = |t: f64, dt: f64| -> f64 {
            let a = thermal_relaxation_channel(30.0, 45.0, t).unwrap();
            let b = thermal_relaxation_channel(30.0, 45.0, t + dt).unwrap();
            probes
                .iter()
                .map(|rho| {
                    let diff = rho.apply_kraus(&a, &[0]).unwrap().matrix()
                        - rho.apply_kraus(&b, &[0]).unwrap().matrix();
                    0.5 * crate::state::hermitian_eigenvalues(&diff)
                        .iter()
                        .map(|l| l.abs())
                        .sum::<f64>()
                })
                .fold(0.0, f64::max)
        };
        for t in [0.0, 100.0, 5000.0] {
            let d1 = distance(t, 1.0);
            let d2 = distance(t, 0.5);
            assert!(d1 < 1e-3, "t={t}: {d1}");
            // halving the step roughly halves the distance
            assert!(d2 < 0.6 * d1 + 1e-12, "t={t}: {d1} {d2}");
        }
    }

    #[test]
    fn readout_examples() {
        let uniform = vec![0.25; 4];
        let id = readout_apply(&[Confusion::IDENTITY, Confusion::IDENTITY], &uniform).unwrap();
        assert_eq!(id, uniform);

        let flip = Confusion::from_flips(1.0, 0.0).unwrap();
        let out = readout_apply(&[flip], &[1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(out[1], 1.0);

        let sym = Confusion::from_flips(0.01, 0.01).unwrap();
        let out = readout_apply(&[sym, sym], &uniform).unwrap();
        for p in out {
            assert_abs_diff_eq!(p, 0.25, epsilon = 1e-15);
        }

        let bad = Confusion([[0.9, 0.2], [0.0, 1.0]]);
        assert!(matches!(
            readout_apply(&[bad], &[1.0, 0.0]),
            Err(NoiseError::NotStochastic { row: 0, .. })
        ));
    }

    proptest! {
        #[test]
        fn readout_preserves_total(
            probs in prop::collection::vec(0.0f64..1.0, 8),
            flips in prop::collection::vec(0.0f64..0.5, 6),
        ) {
            let total: f64 = probs.iter().sum();
            prop_assume!(total > 1e-3);
            let dist: Vec<f64> = probs.iter().map(|p| p / total).collect();
            let conf: Vec<Confusion> = flips
                .chunks(2)
                .map(|f| Confusion::from_flips(f[0], f[1]).unwrap())
                .collect();
            let out = readout_apply(&conf, &dist).unwrap();
            prop_assert!((out.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(out.iter().all(|p| *p >= 0.0));
        }
    }

    const SMALL: &str = "\
device test
qubit 0 t1 50 t2 70 ro01 0.02 ro10 0.03
qubit 1 t1 40 t2 30 ro01 0.01 ro10 0.05
gate ry 0 error 0.001 duration 35
gate ry 1 error 0.002 duration 35
gate cx 0 1 error 0.02 duration 300
";

    #[test]
    fn calibration_parse_and_display_round_trip() {
        let cal = DeviceCalibration::parse(SMALL).unwrap();
        assert_eq!(cal.n_qubits(), 2);
        assert_eq!(cal.gates.len(), 3);
        let again = DeviceCalibration::parse(&cal.to_string()).unwrap();
        assert_eq!(again, cal);
    }

    #[test]
    fn calibration_rejects_invalid_files() {
        let t2_too_long = SMALL.replace("t2 70", "t2 101");
        assert!(matches!(
            DeviceCalibration::parse(&t2_too_long),
            Err(NoiseError::Calibration { .. })
        ));
        let bad_line = SMALL.replace("gate ry 1 error", "gate ry 1 err");
        assert!(matches!(
            DeviceCalibration::parse(&bad_line),
            Err(NoiseError::Parse { line: 5, .. })
        ));
        let bad_qubit = SMALL.replace("gate cx 0 1", "gate cx 0 2");
        assert!(DeviceCalibration::parse(&bad_qubit).is_err());
        assert!(DeviceCalibration::parse("qubit 0 t1 1 t2 1 ro01 0 ro10 0").is_err());
    }

    #[test]
    fn zero_error_calibration_builds_identity_channels() {
        let text = "device zero\nqubit 0 t1 inf t2 inf ro01 0 ro10 0\nqubit 1 t1 inf t2 inf ro01 0 ro10 0\n\
                    gate h 0 error 0 duration 35\ngate cz 0 1 error 0 duration 300\n";
        let model = build_noise_model(&DeviceCalibration::parse(text).unwrap()).unwrap();
        for (_, g) in model.entries() {
            assert!(g.steps().is_empty());
            assert_abs_diff_eq!(g.composed().process_fidelity(), 1.0, epsilon = 1e-15);
        }
        assert!(model.readout().iter().all(|m| *m == Confusion::IDENTITY));
    }

    #[test]
    fn depolarizing_only_calibration_gives_p_equal_two_e() {
        let e = 0.004;
        let text = format!(
            "device d\nqubit 0 t1 inf t2 inf ro01 0 ro10 0\ngate x 0 error {e} duration 0\n"
        );
        let model = build_noise_model(&DeviceCalibration::parse(&text).unwrap()).unwrap();
        let g = model.gate_noise(GateKind::X, &[0]).unwrap();
        assert_abs_diff_eq!(g.depolarizing_strength(), 2.0 * e, epsilon = 1e-12);

        // Monte-Carlo average infidelity over Haar-random pure inputs
        // (normalised complex Gaussian vectors via Box-Muller)
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut gauss = || {
            let u: f64 = 1.0 - rng.random::<f64>();
            let v: f64 = rng.random();
            let r = (-2.0 * u.ln()).sqrt();
            C64::new(r * (std::f64::consts::TAU * v).cos(), r * (std::f64::consts::TAU * v).sin())
        };
        let channel = g.composed();
        let samples = 20_000;
        let mut acc = 0.0;
        for _ in 0..samples {
            let (a, b) = (gauss(), gauss());
            let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
            let psi = StateVector::from_amplitudes(vec![a / n, b / n]).unwrap();
            let out = DensityMatrix::from_pure(&psi).apply_kraus(&channel, &[0]).unwrap();
            acc += 1.0 - crate::state::fidelity(&psi, &out).unwrap();
        }
        let estimate = acc / samples as f64;
        // depolarizing infidelity p/2 is state independent, so the estimate is tight
        assert_abs_diff_eq!(estimate, e, epsilon = 1e-9);
        assert_abs_diff_eq!(channel.average_gate_infidelity(), e, epsilon = 1e-12);
    }

    #[test]
    fn missing_entries_are_reported() {
        let model = build_noise_model(&DeviceCalibration::parse(SMALL).unwrap()).unwrap();
        assert!(model.gate_noise(GateKind::CX, &[1, 0]).is_ok());
        match model.gate_noise(GateKind::CZ, &[0, 1]) {
            Err(NoiseError::MissingGate { kind, qubits, .. }) => {
                assert_eq!(kind, GateKind::CZ);
                assert_eq!(qubits, vec![0, 1]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn built_channels_match_calibrated_error() {
        let cal = DeviceCalibration::parse(SMALL).unwrap();
        let model = build_noise_model(&cal).unwrap();
        for g in &cal.gates {
            let noise = model.gate_noise(g.kind, &g.qubits).unwrap();
            let composed = noise.composed();
            assert!(composed.completeness_error() < 1e-8);
            assert_abs_diff_eq!(composed.average_gate_infidelity(), g.error, epsilon = 1e-10);
        }
    }

    #[test]
    fn thermal_dominated_gate_clamps_to_zero() {
        let text = "device slow\nqubit 0 t1 1 t2 1 ro01 0 ro10 0\ngate x 0 error 0.0001 duration 500\n";
        let model = build_noise_model(&DeviceCalibration::parse(text).unwrap()).unwrap();
        let g = model.gate_noise(GateKind::X, &[0]).unwrap();
        assert_eq!(g.depolarizing_strength(), 0.0);
        assert!(g.composed().average_gate_infidelity() > 0.0001);
    }
}
