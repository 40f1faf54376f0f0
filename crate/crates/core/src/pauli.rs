//! Pauli strings and weighted sums of them.
//!
//! A string's character `i` acts on qubit `i`, so `ZIII` is `Z` on qubit 0
//! (the least significant bit of a basis index).
//!
//! Hamiltonian file format: one `<coefficient> <pauli-string>` per line, `#`
//! comments, all strings of equal length.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::state::{CMatrix, DensityMatrix, StateVector, C64, MAX_QUBITS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PauliError {
    #[error("invalid Pauli character `{0}`")]
    Character(char),
    #[error("Pauli string is empty")]
    Empty,
    #[error("Pauli string of length {0} exceeds the {MAX_QUBITS}-qubit limit")]
    TooLong(usize),
    #[error("term acts on {found} qubits, Hamiltonian has {expected}")]
    Length { expected: usize, found: usize },
    #[error("coefficient {0} is not finite")]
    Coefficient(f64),
    #[error("Hamiltonian has no terms")]
    NoTerms,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Tensor product of single-qubit Paulis, stored as X and Z bit masks:
/// qubit `q` carries `I` (0,0), `X` (1,0), `Z` (0,1) or `Y` (1,1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    n_qubits: usize,
    x: u32,
    z: u32,
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Self {
        Self { n_qubits, x: 0, z: 0 }
    }

    pub fn from_masks(n_qubits: usize, x: u32, z: u32) -> Self {
        let keep = if n_qubits >= 32 { u32::MAX } else { (1u32 << n_qubits) - 1 };
        Self {
            n_qubits,
            x: x & keep,
            z: z & keep,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn x_mask(&self) -> u32 {
        self.x
    }

    pub fn z_mask(&self) -> u32 {
        self.z
    }

    /// Qubits carrying a non-identity factor.
    pub fn support(&self) -> u32 {
        self.x | self.z
    }

    pub fn is_identity(&self) -> bool {
        self.support() == 0
    }

    pub fn weight(&self) -> u32 {
        self.support().count_ones()
    }

    pub fn letter(&self, qubit: usize) -> char {
        match ((self.x >> qubit) & 1, (self.z >> qubit) & 1) {
            (0, 0) => 'I',
            (1, 0) => 'X',
            (0, _) => 'Z',
            _ => 'Y',
        }
    }

    fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    /// `P|b> = phase(b) |b ^ x>`.
    #[inline]
    pub fn phase(&self, b: usize) -> C64 {
        let exponent = self.y_count() + 2 * ((b as u32) & self.z).count_ones();
        match exponent % 4 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        }
    }

    pub fn to_matrix(&self) -> CMatrix {
        let dim = 1usize << self.n_qubits;
        let mut m = CMatrix::zeros(dim, dim);
        for b in 0..dim {
            m[(b ^ self.x as usize, b)] = self.phase(b);
        }
        m
    }

    /// `<psi|P|psi>` (real for Hermitian `P`).
    pub fn expectation(&self, psi: &StateVector) -> f64 {
        let a = psi.amplitudes();
        let x = self.x as usize;
        let mut acc = C64::new(0.0, 0.0);
        for (b, amp) in a.iter().enumerate() {
            acc += a[b ^ x].conj() * self.phase(b) * amp;
        }
        acc.re
    }

    /// `Tr(P rho)`.
    pub fn expectation_mixed(&self, rho: &DensityMatrix) -> f64 {
        let m = rho.matrix();
        let x = self.x as usize;
        let mut acc = C64::new(0.0, 0.0);
        for c in 0..rho.dim() {
            acc += self.phase(c) * m[(c, c ^ x)];
        }
        acc.re
    }
}

impl FromStr for PauliString {
    type Err = PauliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.is_empty() {
            return Err(PauliError::Empty);
        }
        let n = s.chars().count();
        if n > MAX_QUBITS {
            return Err(PauliError::TooLong(n));
        }
        let (mut x, mut z) = (0u32, 0u32);
        for (q, ch) in s.chars().enumerate() {
            let (xb, zb) = match ch.to_ascii_uppercase() {
                'I' => (0, 0),
                'X' => (1, 0),
                'Y' => (1, 1),
                'Z' => (0, 1),
                other => return Err(PauliError::Character(other)),
            };
            x |= xb << q;
            z |= zb << q;
        }
        Ok(Self { n_qubits: n, x, z })
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.n_qubits {
            write!(f, "{}", self.letter(q))?;
        }
        Ok(())
    }
}

impl PartialOrd for PauliString {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Lexicographic by letters in `I < X < Y < Z` order.
impl Ord for PauliString {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        let rank = |p: &PauliString, q: usize| match p.letter(q) {
            'I' => 0,
            'X' => 1,
            'Y' => 2,
            _ => 3,
        };
        self.n_qubits.cmp(&other.n_qubits).then_with(|| {
            (0..self.n_qubits)
                .map(|q| rank(self, q).cmp(&rank(other, q)))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliTerm {
    pub coefficient: f64,
    pub pauli: PauliString,
}

/// `sum_a h_a P_a` with real weights, one term per distinct string, sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliHamiltonian {
    n_qubits: usize,
    terms: Vec<PauliTerm>,
}

/// Coefficients below this magnitude are dropped when canonicalizing.
pub const DROP_TOLERANCE: f64 = 1e-12;

impl PauliHamiltonian {
    /// Merges duplicate strings, drops near-zero weights and sorts. An empty
    /// result is kept as the zero operator.
    pub fn new(n_qubits: usize, terms: Vec<PauliTerm>) -> Result<Self, PauliError> {
        if n_qubits == 0 {
            return Err(PauliError::Empty);
        }
        if n_qubits > MAX_QUBITS {
            return Err(PauliError::TooLong(n_qubits));
        }
        let mut merged: BTreeMap<PauliString, f64> = BTreeMap::new();
        for t in terms {
            if t.pauli.n_qubits() != n_qubits {
                return Err(PauliError::Length {
                    expected: n_qubits,
                    found: t.pauli.n_qubits(),
                });
            }
            if !t.coefficient.is_finite() {
                return Err(PauliError::Coefficient(t.coefficient));
            }
            *merged.entry(t.pauli).or_insert(0.0) += t.coefficient;
        }
        let terms = merged
            .into_iter()
            .filter(|(_, c)| c.abs() >= DROP_TOLERANCE)
            .map(|(pauli, coefficient)| PauliTerm { coefficient, pauli })
            .collect();
        Ok(Self { n_qubits, terms })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    /// Weight of the all-identity term (0 if absent).
    pub fn constant(&self) -> f64 {
        self.terms
            .iter()
            .find(|t| t.pauli.is_identity())
            .map_or(0.0, |t| t.coefficient)
    }

    /// Coefficient of `pauli`, given as text.
    pub fn coefficient(&self, pauli: &str) -> Option<f64> {
        let p: PauliString = pauli.parse().ok()?;
        self.terms.iter().find(|t| t.pauli == p).map(|t| t.coefficient)
    }

    pub fn to_matrix(&self) -> CMatrix {
        let dim = 1usize << self.n_qubits;
        let mut m = CMatrix::zeros(dim, dim);
        for t in &self.terms {
            let x = t.pauli.x_mask() as usize;
            for b in 0..dim {
                m[(b ^ x, b)] += t.pauli.phase(b) * t.coefficient;
            }
        }
        m
    }

    pub fn parse(text: &str) -> Result<Self, PauliError> {
        let mut terms = Vec::new();
        let mut n_qubits = None;
        for (number, raw) in text.lines().enumerate() {
            let line = number + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |message: String| PauliError::Parse { line, message };
            let fields: Vec<&str> = content.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(err("expected `<coefficient> <pauli-string>`".into()));
            }
            let coefficient: f64 = fields[0]
                .parse()
                .map_err(|_| err(format!("bad coefficient `{}`", fields[0])))?;
            if !coefficient.is_finite() {
                return Err(err(format!("coefficient `{}` is not finite", fields[0])));
            }
            let pauli: PauliString = fields[1].parse().map_err(|e| err(format!("{e}")))?;
            let n = *n_qubits.get_or_insert(pauli.n_qubits());
            if pauli.n_qubits() != n {
                return Err(err(format!(
                    "string `{}` has length {}, earlier terms have {n}",
                    fields[1],
                    pauli.n_qubits()
                )));
            }
            terms.push(PauliTerm { coefficient, pauli });
        }
        let n = n_qubits.ok_or(PauliError::NoTerms)?;
        Self::new(n, terms)
    }
}

impl fmt::Display for PauliHamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.terms {
            writeln!(f, "{:.16e} {}", t.coefficient, t.pauli)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    /// Kronecker product of single-qubit matrices with qubit 0 as the least
    /// significant factor.
    fn dense(letters: &str) -> CMatrix {
        let single = |ch: char| {
            let (z, o, i) = (c(0.0), c(1.0), C64::new(0.0, 1.0));
            match ch {
                'I' => CMatrix::identity(2, 2),
                'X' => CMatrix::from_row_slice(2, 2, &[z, o, o, z]),
                'Y' => CMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
                _ => CMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
            }
        };
        letters
            .chars()
            .fold(CMatrix::identity(1, 1), |acc, ch| single(ch).kronecker(&acc))
    }

    #[test]
    fn masks_round_trip_through_text() {
        let p: PauliString = "XYZI".parse().unwrap();
        assert_eq!(p.x_mask(), 0b0011);
        assert_eq!(p.z_mask(), 0b0110);
        assert_eq!(p.to_string(), "XYZI");
        assert!("XQ".parse::<PauliString>().is_err());
        assert!("".parse::<PauliString>().is_err());
    }

    #[test]
    fn matrix_matches_kronecker_products() {
        for s in ["Z", "X", "Y", "ZI", "IZ", "XY", "YZX", "YYII"] {
            let p: PauliString = s.parse().unwrap();
            assert_abs_diff_eq!((p.to_matrix() - dense(s)).norm(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn qubit_zero_is_the_leftmost_letter() {
        // Z on qubit 0 flips the sign of basis index 1 only
        let p: PauliString = "ZI".parse().unwrap();
        let psi = StateVector::basis(2, 1).unwrap();
        assert_abs_diff_eq!(p.expectation(&psi), -1.0);
        let psi = StateVector::basis(2, 2).unwrap();
        assert_abs_diff_eq!(p.expectation(&psi), 1.0);
    }

    #[test]
    fn hamiltonian_parse_merges_and_canonicalizes() {
        let h = PauliHamiltonian::parse(
            "# comment\n-0.5 ZI\n0.25 IZ\n-0.5 ZI # again\n1e-14 XX\n0.1 II\n",
        )
        .unwrap();
        assert_eq!(h.n_qubits(), 2);
        assert_eq!(h.terms().len(), 3);
        assert_eq!(h.coefficient("ZI"), Some(-1.0));
        assert_eq!(h.coefficient("XX"), None);
        assert_eq!(h.terms()[0].pauli.to_string(), "II");
        let again = PauliHamiltonian::parse(&h.to_string()).unwrap();
        assert_eq!(again, h);
    }

    #[test]
    fn hamiltonian_parse_errors() {
        assert!(matches!(
            PauliHamiltonian::parse("1.0 ZZ\n2.0 Z\n"),
            Err(PauliError::Parse { line: 2, .. })
        ));
        assert!(matches!(
            PauliHamiltonian::parse("abc ZZ\n"),
            Err(PauliError::Parse { line: 1, .. })
        ));
        assert!(matches!(PauliHamiltonian::parse("# nothing\n"), Err(PauliError::NoTerms)));
    }

    fn pauli_strategy(n: usize) -> impl Strategy<Value = PauliString> {
        (0u32..(1 << n), 0u32..(1 << n)).prop_map(move |(x, z)| PauliString::from_masks(n, x, z))
    }

    proptest! {
        #[test]
        fn expectation_matches_dense_matrix(
            p in pauli_strategy(3),
            re in prop::collection::vec(-1.0f64..1.0, 8),
            im in prop::collection::vec(-1.0f64..1.0, 8),
        ) {
            let amps: Vec<C64> = re.iter().zip(&im).map(|(a, b)| C64::new(*a, *b)).collect();
            let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            prop_assume!(norm > 1e-3);
            let psi = StateVector::from_amplitudes(amps.iter().map(|a| a / norm).collect()).unwrap();
            let v = CMatrix::from_column_slice(8, 1, psi.amplitudes());
            let dense = (v.adjoint() * p.to_matrix() * &v)[(0, 0)].re;
            prop_assert!((p.expectation(&psi) - dense).abs() < 1e-12);
            let rho = DensityMatrix::from_pure(&psi);
            prop_assert!((p.expectation_mixed(&rho) - dense).abs() < 1e-12);
        }
    }
}
