//! Dense pure and mixed quantum states.
//!
//! Qubit 0 is the least-significant bit of a basis-state index. Operators
//! acting on a target list `[t0, t1, ..]` use the same convention locally:
//! bit `j` of the local index refers to qubit `targets[j]`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Largest register the dense representation accepts.
pub const MAX_QUBITS: usize = 12;

pub const NORM_TOLERANCE: f64 = 1e-10;
pub const UNITARY_TOLERANCE: f64 = 1e-8;
pub const COMPLETENESS_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("qubit {qubit} is out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },
    #[error("qubit {0} is targeted more than once")]
    RepeatedTarget(usize),
    #[error("matrix is not unitary (max deviation {0:.3e})")]
    NotUnitary(f64),
    #[error("Kraus operators violate completeness (max deviation {0:.3e})")]
    NotComplete(f64),
    #[error("Kraus set is empty")]
    EmptyKraus,
    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),
    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),
    #[error("{0} qubits exceeds the dense limit of {MAX_QUBITS}")]
    TooManyQubits(usize),
}

/// A normalized pure state of `n_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<C64>,
}

/// A mixed state stored as a dense `2^n x 2^n` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    matrix: CMatrix,
}

/// A quantum channel in Kraus form acting on `arity` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    arity: usize,
    operators: Vec<CMatrix>,
}

/// Borrowed view over either kind of state, used by [`fidelity`].
#[derive(Debug, Clone, Copy)]
pub enum StateRef<'a> {
    Pure(&'a StateVector),
    Mixed(&'a DensityMatrix),
}

impl<'a> From<&'a StateVector> for StateRef<'a> {
    fn from(s: &'a StateVector) -> Self {
        StateRef::Pure(s)
    }
}

impl<'a> From<&'a DensityMatrix> for StateRef<'a> {
    fn from(s: &'a DensityMatrix) -> Self {
        StateRef::Mixed(s)
    }
}

impl StateRef<'_> {
    fn n_qubits(&self) -> usize {
        match self {
            StateRef::Pure(s) => s.n_qubits,
            StateRef::Mixed(r) => r.n_qubits,
        }
    }
}

fn check_register(n_qubits: usize) -> Result<(), StateError> {
    if n_qubits > MAX_QUBITS {
        return Err(StateError::TooManyQubits(n_qubits));
    }
    Ok(())
}

fn qubits_for_dimension(dim: usize) -> Result<usize, StateError> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(StateError::DimensionMismatch {
            expected: dim.next_power_of_two().max(1),
            found: dim,
        });
    }
    let n = dim.trailing_zeros() as usize;
    check_register(n)?;
    Ok(n)
}

pub(crate) fn check_targets(targets: &[usize], n_qubits: usize) -> Result<(), StateError> {
    for (i, &t) in targets.iter().enumerate() {
        if t >= n_qubits {
            return Err(StateError::QubitOutOfRange {
                qubit: t,
                n_qubits,
            });
        }
        if targets[..i].contains(&t) {
            return Err(StateError::RepeatedTarget(t));
        }
    }
    Ok(())
}

fn check_operator_shape(op: &CMatrix, targets: &[usize]) -> Result<(), StateError> {
    let expected = 1usize << targets.len();
    if op.nrows() != expected || op.ncols() != expected {
        return Err(StateError::DimensionMismatch {
            expected,
            found: op.nrows().max(op.ncols()),
        });
    }
    Ok(())
}

/// Max-abs deviation of `m` from the identity.
pub(crate) fn identity_deviation(m: &CMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((m[(i, j)] - C64::new(target, 0.0)).norm());
        }
    }
    worst
}

pub fn is_unitary(u: &CMatrix, tolerance: f64) -> bool {
    u.is_square() && identity_deviation(&(u.adjoint() * u)) <= tolerance
}

/// Global basis offsets for every local index of `targets`.
fn local_offsets(targets: &[usize]) -> Vec<usize> {
    (0..1usize << targets.len())
        .map(|local| {
            targets
                .iter()
                .enumerate()
                .filter(|(j, _)| local >> j & 1 == 1)
                .fold(0, |acc, (_, &t)| acc | (1 << t))
        })
        .collect()
}

/// In-place `data <- op . data` with `op` embedded on `targets`.
pub(crate) fn apply_local(data: &mut [C64], op: &CMatrix, targets: &[usize]) {
    let offsets = local_offsets(targets);
    let mask = offsets.last().copied().unwrap_or(0);
    let local_dim = offsets.len();
    let mut scratch = vec![C64::new(0.0, 0.0); local_dim];
    for base in 0..data.len() {
        if base & mask != 0 {
            continue;
        }
        for (s, &off) in scratch.iter_mut().zip(&offsets) {
            *s = data[base | off];
        }
        for (row, &off) in offsets.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for (col, s) in scratch.iter().enumerate() {
                acc += op[(row, col)] * s;
            }
            data[base | off] = acc;
        }
    }
}

/// `op . m` with `op` acting on the row index (every column updated).
fn left_apply(m: &mut CMatrix, op: &CMatrix, targets: &[usize]) {
    let dim = m.nrows();
    for column in m.as_mut_slice().chunks_mut(dim) {
        apply_local(column, op, targets);
    }
}

/// `k . m . k^dagger` for a full local operator.
fn conjugate(m: &CMatrix, k: &CMatrix, targets: &[usize]) -> CMatrix {
    let mut a = m.clone();
    left_apply(&mut a, k, targets);
    let mut b = a.adjoint();
    left_apply(&mut b, k, targets);
    b
}

impl StateVector {
    /// `|0...0>`.
    pub fn zero(n_qubits: usize) -> Result<Self, StateError> {
        check_register(n_qubits)?;
        let mut amplitudes = vec![C64::new(0.0, 0.0); 1 << n_qubits];
        amplitudes[0] = C64::new(1.0, 0.0);
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self, StateError> {
        let mut s = Self::zero(n_qubits)?;
        if index >= s.amplitudes.len() {
            return Err(StateError::DimensionMismatch {
                expected: s.amplitudes.len(),
                found: index,
            });
        }
        s.amplitudes[0] = C64::new(0.0, 0.0);
        s.amplitudes[index] = C64::new(1.0, 0.0);
        Ok(s)
    }

    /// Builds a state from explicit amplitudes, which must already be normalized.
    pub fn from_amplitudes(amplitudes: Vec<C64>) -> Result<Self, StateError> {
        let n_qubits = qubits_for_dimension(amplitudes.len())?;
        let norm_sqr: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > NORM_TOLERANCE {
            return Err(StateError::NotNormalized(norm_sqr));
        }
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<C64, StateError> {
        if self.dim() != other.dim() {
            return Err(StateError::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Applies a unitary to `targets`, returning the evolved state.
    pub fn apply_gate(&self, unitary: &CMatrix, targets: &[usize]) -> Result<Self, StateError> {
        check_targets(targets, self.n_qubits)?;
        check_operator_shape(unitary, targets)?;
        let deviation = identity_deviation(&(unitary.adjoint() * unitary));
        if deviation > UNITARY_TOLERANCE {
            return Err(StateError::NotUnitary(deviation));
        }
        Ok(self.apply_gate_unchecked(unitary, targets))
    }

    /// Same as [`apply_gate`](Self::apply_gate) for operators already known
    /// to be unitary and correctly shaped.
    pub(crate) fn apply_gate_unchecked(&self, unitary: &CMatrix, targets: &[usize]) -> Self {
        let mut out = self.clone();
        apply_local(&mut out.amplitudes, unitary, targets);
        out
    }

    pub(crate) fn apply_gate_in_place(&mut self, unitary: &CMatrix, targets: &[usize]) {
        apply_local(&mut self.amplitudes, unitary, targets);
    }
}

impl DensityMatrix {
    /// `|0...0><0...0|`.
    pub fn zero(n_qubits: usize) -> Result<Self, StateError> {
        Ok(Self::from_pure(&StateVector::zero(n_qubits)?))
    }

    pub fn maximally_mixed(n_qubits: usize) -> Result<Self, StateError> {
        check_register(n_qubits)?;
        let dim = 1 << n_qubits;
        Ok(Self {
            n_qubits,
            matrix: CMatrix::identity(dim, dim) / C64::new(dim as f64, 0.0),
        })
    }

    /// `|psi><psi|` for an already-validated state.
    pub fn from_pure(psi: &StateVector) -> Self {
        let dim = psi.dim();
        let a = &psi.amplitudes;
        let matrix = CMatrix::from_fn(dim, dim, |i, j| a[i] * a[j].conj());
        Self {
            n_qubits: psi.n_qubits,
            matrix,
        }
    }

    /// Builds and validates a density matrix (Hermitian, unit trace, PSD).
    pub fn from_matrix(matrix: CMatrix) -> Result<Self, StateError> {
        if !matrix.is_square() {
            return Err(StateError::InvalidDensity("matrix is not square".into()));
        }
        let n_qubits = qubits_for_dimension(matrix.nrows())?;
        let rho = Self { n_qubits, matrix };
        rho.validate()?;
        Ok(rho)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// `Tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re).collect()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let m = &self.matrix;
        let mut worst: f64 = 0.0;
        for i in 0..m.nrows() {
            for j in i..m.ncols() {
                worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.matrix)
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }

    /// Checks Hermiticity and trace within 1e-10 and eigenvalues >= -1e-9.
    pub fn validate(&self) -> Result<(), StateError> {
        let herm = self.hermiticity_error();
        if herm > 1e-10 {
            return Err(StateError::InvalidDensity(format!(
                "not Hermitian (deviation {herm:.3e})"
            )));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(StateError::InvalidDensity(format!("trace {tr} != 1")));
        }
        let min_eig = self.min_eigenvalue();
        if min_eig < -1e-9 {
            return Err(StateError::InvalidDensity(format!(
                "negative eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(())
    }

    /// `U rho U^dagger` on `targets`.
    pub fn apply_gate(&self, unitary: &CMatrix, targets: &[usize]) -> Result<Self, StateError> {
        check_targets(targets, self.n_qubits)?;
        check_operator_shape(unitary, targets)?;
        let deviation = identity_deviation(&(unitary.adjoint() * unitary));
        if deviation > UNITARY_TOLERANCE {
            return Err(StateError::NotUnitary(deviation));
        }
        Ok(Self {
            n_qubits: self.n_qubits,
            matrix: conjugate(&self.matrix, unitary, targets),
        })
    }

    pub(crate) fn apply_gate_in_place(&mut self, unitary: &CMatrix, targets: &[usize]) {
        self.matrix = conjugate(&self.matrix, unitary, targets);
    }

    /// `sum_i K_i rho K_i^dagger` on `targets`.
    pub fn apply_kraus(&self, channel: &KrausSet, targets: &[usize]) -> Result<Self, StateError> {
        check_targets(targets, self.n_qubits)?;
        if targets.len() != channel.arity {
            return Err(StateError::DimensionMismatch {
                expected: channel.arity,
                found: targets.len(),
            });
        }
        // Completeness is enforced by the KrausSet constructor.
        let mut out = self.clone();
        out.apply_kraus_in_place(channel, targets);
        Ok(out)
    }

    pub(crate) fn apply_kraus_in_place(&mut self, channel: &KrausSet, targets: &[usize]) {
        let dim = self.dim();
        let mut acc = CMatrix::zeros(dim, dim);
        for k in &channel.operators {
            acc += conjugate(&self.matrix, k, targets);
        }
        self.matrix = acc;
    }

    /// Diagonal of `U rho U^dagger` without forming the full product on
    /// anything but the row index.
    pub(crate) fn rotated_diagonal(&self, rotations: &[(CMatrix, usize)]) -> Vec<f64> {
        let mut m = self.matrix.clone();
        for (u, q) in rotations {
            m = conjugate(&m, u, &[*q]);
        }
        (0..self.dim()).map(|i| m[(i, i)].re).collect()
    }
}

impl KrausSet {
    /// Validates shapes and completeness `sum K^dagger K = I` within 1e-8.
    pub fn new(operators: Vec<CMatrix>) -> Result<Self, StateError> {
        let first = operators.first().ok_or(StateError::EmptyKraus)?;
        let dim = first.nrows();
        let arity = qubits_for_dimension(dim)?;
        for k in &operators {
            if k.nrows() != dim || k.ncols() != dim {
                return Err(StateError::DimensionMismatch {
                    expected: dim,
                    found: k.nrows().max(k.ncols()),
                });
            }
        }
        let set = Self { arity, operators };
        let deviation = set.completeness_error();
        if deviation > COMPLETENESS_TOLERANCE {
            return Err(StateError::NotComplete(deviation));
        }
        Ok(set)
    }

    pub fn identity(arity: usize) -> Self {
        let dim = 1 << arity;
        Self {
            arity,
            operators: vec![CMatrix::identity(dim, dim)],
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn dim(&self) -> usize {
        1 << self.arity
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.operators
    }

    pub fn completeness_error(&self) -> f64 {
        let dim = self.dim();
        let sum = self
            .operators
            .iter()
            .fold(CMatrix::zeros(dim, dim), |acc, k| acc + k.adjoint() * k);
        identity_deviation(&sum)
    }

    /// `other` applied after `self`, on the same qubits.
    pub fn then(&self, other: &KrausSet) -> Result<KrausSet, StateError> {
        if self.arity != other.arity {
            return Err(StateError::DimensionMismatch {
                expected: self.arity,
                found: other.arity,
            });
        }
        let operators = other
            .operators
            .iter()
            .flat_map(|b| self.operators.iter().map(move |a| b * a))
            .collect();
        Ok(Self {
            arity: self.arity,
            operators,
        })
    }

    /// `self` on the low local qubit, `other` on the high one(s).
    pub fn tensor(&self, other: &KrausSet) -> KrausSet {
        let operators = other
            .operators
            .iter()
            .flat_map(|b| self.operators.iter().map(move |a| b.kronecker(a)))
            .collect();
        Self {
            arity: self.arity + other.arity,
            operators,
        }
    }

    /// Choi matrix `sum_ij |i><j| (x) E(|i><j|)` (dimension `d^2`).
    pub fn choi_matrix(&self) -> CMatrix {
        let d = self.dim();
        let mut choi = CMatrix::zeros(d * d, d * d);
        for k in &self.operators {
            // vec(K) as a column: entry (i*d + a) = K[a, i]
            let v = CMatrix::from_fn(d * d, 1, |idx, _| k[(idx % d, idx / d)]);
            choi += &v * v.adjoint();
        }
        choi
    }

    /// Process (entanglement) fidelity with the identity: `sum |Tr K|^2 / d^2`.
    pub fn process_fidelity(&self) -> f64 {
        let d = self.dim() as f64;
        self.operators
            .iter()
            .map(|k| k.trace().norm_sqr())
            .sum::<f64>()
            / (d * d)
    }

    /// Average gate fidelity `(d F_pro + 1) / (d + 1)`.
    pub fn average_gate_fidelity(&self) -> f64 {
        let d = self.dim() as f64;
        (d * self.process_fidelity() + 1.0) / (d + 1.0)
    }

    pub fn average_gate_infidelity(&self) -> f64 {
        1.0 - self.average_gate_fidelity()
    }
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let eig = nalgebra::SymmetricEigen::new(m.clone());
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

/// Square root of a positive semidefinite Hermitian matrix.
fn psd_sqrt(m: &CMatrix) -> CMatrix {
    let eig = nalgebra::SymmetricEigen::new(m.clone());
    let roots = eig
        .eigenvalues
        .map(|l| C64::new(l.max(0.0).sqrt(), 0.0));
    let v = &eig.eigenvectors;
    v * CMatrix::from_diagonal(&roots) * v.adjoint()
}

fn uhlmann(rho: &CMatrix, sigma: &CMatrix) -> f64 {
    // the eigenvalue square roots amplify round-off near rank one, so
    // (numerically) pure inputs go through <psi|sigma|psi> instead
    for (a, b) in [(rho, sigma), (sigma, rho)] {
        let purity = (a * a).trace().re;
        if purity > 1.0 - 1e-10 {
            let eig = nalgebra::SymmetricEigen::new(a.clone());
            let top = eig.eigenvalues.imax();
            let v = eig.eigenvectors.column(top);
            return (v.adjoint() * b * v)[(0, 0)].re;
        }
    }
    let s = psd_sqrt(rho);
    let inner = &s * sigma * &s;
    // symmetrize against round-off before the eigen-solve
    let inner = (&inner + inner.adjoint()) * C64::new(0.5, 0.0);
    let root_trace: f64 = hermitian_eigenvalues(&inner)
        .into_iter()
        .map(|l| l.max(0.0).sqrt())
        .sum();
    root_trace * root_trace
}

fn expectation_in(rho: &DensityMatrix, psi: &StateVector) -> f64 {
    let a = psi.amplitudes();
    let m = rho.matrix();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..a.len() {
        let mut row = C64::new(0.0, 0.0);
        for j in 0..a.len() {
            row += m[(i, j)] * a[j];
        }
        acc += a[i].conj() * row;
    }
    acc.re
}

/// State fidelity: squared overlap for pure pairs, `<psi|rho|psi>` for a
/// pure/mixed pair and Uhlmann fidelity `(Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2`
/// for two mixed states. Clamped to `[0, 1]`.
pub fn fidelity<'a, 'b>(
    a: impl Into<StateRef<'a>>,
    b: impl Into<StateRef<'b>>,
) -> Result<f64, StateError> {
    let (a, b) = (a.into(), b.into());
    if a.n_qubits() != b.n_qubits() {
        return Err(StateError::DimensionMismatch {
            expected: 1 << a.n_qubits(),
            found: 1 << b.n_qubits(),
        });
    }
    let f = match (a, b) {
        (StateRef::Pure(x), StateRef::Pure(y)) => x.inner(y)?.norm_sqr(),
        (StateRef::Pure(x), StateRef::Mixed(r)) | (StateRef::Mixed(r), StateRef::Pure(x)) => {
            expectation_in(r, x)
        }
        (StateRef::Mixed(r), StateRef::Mixed(s)) => uhlmann(r.matrix(), s.matrix()),
    };
    Ok(f.clamp(0.0, 1.0))
}

/// `|psi><psi|`, rejecting unnormalized input.
pub fn pure_to_density(psi: &StateVector) -> Result<DensityMatrix, StateError> {
    let n = psi.norm_sqr();
    if (n - 1.0).abs() > NORM_TOLERANCE {
        return Err(StateError::NotNormalized(n));
    }
    Ok(DensityMatrix::from_pure(psi))
}
