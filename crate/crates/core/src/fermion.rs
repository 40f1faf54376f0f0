//! Electronic-structure integrals and the Jordan-Wigner mapping to qubits.
//!
//! The Hamiltonian is
//! `E_nuc + sum h_pq a+_p a_q + 1/2 sum g_pqrs a+_p a+_q a_r a_s`
//! over spin orbitals, with spin orbital `p` mapped to qubit `p`.
//!
//! Integral file format (`#` comments):
//!
//! ```text
//! norb 4
//! convention physicist
//! nuc 0.7199689944
//! h 0 0 -1.2563390730
//! g 0 1 1 0 0.6757101548
//! ```
//!
//! Entries not listed are zero; every symmetry partner of a listed entry must
//! be listed too.

use std::collections::HashMap;

use thiserror::Error;

use crate::pauli::{PauliError, PauliHamiltonian, PauliString, PauliTerm};
use crate::state::C64;

/// Largest supported number of spin orbitals.
pub const MAX_SPIN_ORBITALS: usize = 12;
const SYMMETRY_TOLERANCE: f64 = 1e-10;
const IMAGINARY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegralError {
    #[error("{0} spin orbitals outside 1..={MAX_SPIN_ORBITALS}")]
    Size(usize),
    #[error("{what} has shape {found:?}, expected {expected}")]
    Shape {
        what: &'static str,
        expected: usize,
        found: Vec<usize>,
    },
    #[error("{0} is not finite")]
    NotFinite(&'static str),
    #[error("one-body integrals not symmetric: h[{p}][{q}] = {a}, h[{q}][{p}] = {b}")]
    OneBodySymmetry { p: usize, q: usize, a: f64, b: f64 },
    #[error("two-body integrals break the 8-fold symmetry at g{index:?} = {a} vs g{partner:?} = {b}")]
    TwoBodySymmetry {
        index: [usize; 4],
        partner: [usize; 4],
        a: f64,
        b: f64,
    },
    #[error("mapped operator has imaginary coefficient {imag} on {pauli}")]
    NonHermitian { pauli: String, imag: f64 },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Pauli(#[from] PauliError),
}

/// One- and two-body integrals over `n` spin orbitals plus the nuclear
/// repulsion, all in hartree.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralSet {
    n: usize,
    one_body: Vec<f64>,
    two_body: Vec<f64>,
    nuclear_repulsion: f64,
}

impl IntegralSet {
    /// `one_body` is row-major `n x n`, `two_body` row-major `n^4` indexed
    /// `[p][q][r][s]`.
    pub fn new(
        n: usize,
        one_body: Vec<f64>,
        two_body: Vec<f64>,
        nuclear_repulsion: f64,
    ) -> Result<Self, IntegralError> {
        if n == 0 || n > MAX_SPIN_ORBITALS {
            return Err(IntegralError::Size(n));
        }
        if one_body.len() != n * n {
            return Err(IntegralError::Shape {
                what: "one-body tensor",
                expected: n * n,
                found: vec![one_body.len()],
            });
        }
        if two_body.len() != n.pow(4) {
            return Err(IntegralError::Shape {
                what: "two-body tensor",
                expected: n.pow(4),
                found: vec![two_body.len()],
            });
        }
        if !nuclear_repulsion.is_finite() {
            return Err(IntegralError::NotFinite("nuclear repulsion"));
        }
        if one_body.iter().any(|v| !v.is_finite()) {
            return Err(IntegralError::NotFinite("one-body tensor"));
        }
        if two_body.iter().any(|v| !v.is_finite()) {
            return Err(IntegralError::NotFinite("two-body tensor"));
        }
        let set = Self {
            n,
            one_body,
            two_body,
            nuclear_repulsion,
        };
        set.check_symmetry()?;
        Ok(set)
    }

    /// All integrals zero.
    pub fn zeros(n: usize, nuclear_repulsion: f64) -> Result<Self, IntegralError> {
        Self::new(n, vec![0.0; n * n], vec![0.0; n.pow(4)], nuclear_repulsion)
    }

    pub fn n_spin_orbitals(&self) -> usize {
        self.n
    }

    pub fn nuclear_repulsion(&self) -> f64 {
        self.nuclear_repulsion
    }

    pub fn h(&self, p: usize, q: usize) -> f64 {
        self.one_body[p * self.n + q]
    }

    pub fn g(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        self.two_body[self.g_index([p, q, r, s])]
    }

    fn g_index(&self, [p, q, r, s]: [usize; 4]) -> usize {
        ((p * self.n + q) * self.n + r) * self.n + s
    }

    fn check_symmetry(&self) -> Result<(), IntegralError> {
        let n = self.n;
        for p in 0..n {
            for q in 0..p {
                let (a, b) = (self.h(p, q), self.h(q, p));
                if (a - b).abs() > SYMMETRY_TOLERANCE {
                    return Err(IntegralError::OneBodySymmetry { p, q, a, b });
                }
            }
        }
        // g_pqrs = (ps|qr); these three swaps generate the 8-fold group
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let a = self.g(p, q, r, s);
                        for partner in [[q, p, s, r], [s, q, r, p], [p, r, q, s]] {
                            let b = self.two_body[self.g_index(partner)];
                            if (a - b).abs() > SYMMETRY_TOLERANCE {
                                return Err(IntegralError::TwoBodySymmetry {
                                    index: [p, q, r, s],
                                    partner,
                                    a,
                                    b,
                                });
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, IntegralError> {
        let mut n = None;
        let mut convention = None;
        let mut nuc = None;
        let mut h_entries = Vec::new();
        let mut g_entries = Vec::new();
        for (number, raw) in text.lines().enumerate() {
            let line = number + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |message: String| IntegralError::Parse { line, message };
            let fields: Vec<&str> = content.split_whitespace().collect();
            let value = |s: &str| -> Result<f64, IntegralError> {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| err(format!("bad number `{s}`")))
            };
            let indices = |fs: &[&str]| -> Result<Vec<usize>, IntegralError> {
                let n = n.ok_or_else(|| err("`norb` must come first".into()))?;
                fs.iter()
                    .map(|s| {
                        s.parse::<usize>()
                            .ok()
                            .filter(|i| *i < n)
                            .ok_or_else(|| err(format!("bad orbital index `{s}`")))
                    })
                    .collect()
            };
            match (fields[0], fields.len()) {
                ("norb", 2) => {
                    let v = fields[1]
                        .parse::<usize>()
                        .map_err(|_| err(format!("bad orbital count `{}`", fields[1])))?;
                    if v == 0 || v > MAX_SPIN_ORBITALS {
                        return Err(IntegralError::Size(v));
                    }
                    n = Some(v);
                }
                ("convention", 2) => convention = Some(fields[1].to_string()),
                ("nuc", 2) => nuc = Some(value(fields[1])?),
                ("h", 4) => {
                    let i = indices(&fields[1..3])?;
                    h_entries.push(([i[0], i[1]], value(fields[3])?));
                }
                ("g", 6) => {
                    let i = indices(&fields[1..5])?;
                    g_entries.push(([i[0], i[1], i[2], i[3]], value(fields[5])?));
                }
                _ => return Err(err(format!("unrecognised line `{content}`"))),
            }
        }
        let missing = |what: &str| IntegralError::Parse {
            line: 0,
            message: format!("missing `{what}` line"),
        };
        let n = n.ok_or_else(|| missing("norb"))?;
        match convention.as_deref() {
            Some("physicist") => {}
            Some(other) => {
                return Err(IntegralError::Parse {
                    line: 0,
                    message: format!("unsupported convention `{other}` (expected `physicist`)"),
                })
            }
            None => return Err(missing("convention")),
        }
        let mut one_body = vec![0.0; n * n];
        for ([p, q], v) in h_entries {
            one_body[p * n + q] = v;
        }
        let mut two_body = vec![0.0; n.pow(4)];
        for ([p, q, r, s], v) in g_entries {
            two_body[((p * n + q) * n + r) * n + s] = v;
        }
        Self::new(n, one_body, two_body, nuc.ok_or_else(|| missing("nuc"))?)
    }
}

/// Sum of `X^x Z^z` monomials (Z applied first on each qubit) with complex
/// weights.
type Monomials = HashMap<(u32, u32), C64>;

/// `a+_p` (dagger) or `a_p` as `1/2 (X_p -+ X_p Z_p) Z_{<p}`, using
/// `X - iY = X + XZ` and `X + iY = X - XZ`.
fn ladder(p: usize, dagger: bool) -> [((u32, u32), C64); 2] {
    let below = (1u32 << p) - 1;
    let bit = 1u32 << p;
    let sign = if dagger { 0.5 } else { -0.5 };
    [
        ((bit, below), C64::new(0.5, 0.0)),
        ((bit, below | bit), C64::new(sign, 0.0)),
    ]
}

fn add_product(acc: &mut Monomials, weight: f64, ops: &[(usize, bool)]) {
    let mut current: Vec<((u32, u32), C64)> = vec![((0, 0), C64::new(weight, 0.0))];
    for &(p, dagger) in ops {
        let factor = ladder(p, dagger);
        let mut next = Vec::with_capacity(current.len() * 2);
        for &((x1, z1), c1) in &current {
            for &((x2, z2), c2) in &factor {
                // X^x1 Z^z1 X^x2 Z^z2 = (-1)^|z1 & x2| X^(x1^x2) Z^(z1^z2)
                let sign = if (z1 & x2).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                next.push(((x1 ^ x2, z1 ^ z2), c1 * c2 * sign));
            }
        }
        current = next;
    }
    for (key, c) in current {
        *acc.entry(key).or_insert(C64::new(0.0, 0.0)) += c;
    }
}

/// Maps the second-quantized Hamiltonian to Pauli strings. Like terms are
/// merged and coefficients below 1e-12 dropped; any coefficient keeping an
/// imaginary part above 1e-10 is an error.
pub fn jordan_wigner(integrals: &IntegralSet) -> Result<PauliHamiltonian, IntegralError> {
    let n = integrals.n_spin_orbitals();
    let mut acc: Monomials = HashMap::new();
    acc.insert((0, 0), C64::new(integrals.nuclear_repulsion(), 0.0));
    for p in 0..n {
        for q in 0..n {
            let h = integrals.h(p, q);
            if h != 0.0 {
                add_product(&mut acc, h, &[(p, true), (q, false)]);
            }
        }
    }
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    let g = integrals.g(p, q, r, s);
                    if g != 0.0 {
                        add_product(
                            &mut acc,
                            0.5 * g,
                            &[(p, true), (q, true), (r, false), (s, false)],
                        );
                    }
                }
            }
        }
    }
    let mut terms = Vec::with_capacity(acc.len());
    for ((x, z), c) in acc {
        // X^x Z^z = (-i)^|x & z| P since XZ = -iY on each Y qubit
        let coefficient = match (x & z).count_ones() % 4 {
            0 => c,
            1 => c * C64::new(0.0, -1.0),
            2 => -c,
            _ => c * C64::new(0.0, 1.0),
        };
        let pauli = PauliString::from_masks(n, x, z);
        if coefficient.norm() < crate::pauli::DROP_TOLERANCE {
            continue;
        }
        if coefficient.im.abs() > IMAGINARY_TOLERANCE {
            return Err(IntegralError::NonHermitian {
                pauli: pauli.to_string(),
                imag: coefficient.im,
            });
        }
        terms.push(PauliTerm {
            coefficient: coefficient.re,
            pauli,
        });
    }
    Ok(PauliHamiltonian::new(n, terms)?)
}
