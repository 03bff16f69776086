//! Exact algebra of phased Pauli strings.
//!
//! Phases are tracked as an element of the group `{+1, +i, -1, -i}` so that
//! products and commutation checks never involve floating point.

use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use num_complex::Complex64;

use crate::dense::{self, CMatrix, ONE, ZERO};
use crate::error::{Error, Result};

/// Single-qubit Pauli factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    /// `self · other = i^k · result`, returned as `(k, result)`.
    fn product(self, other: Pauli) -> (u8, Pauli) {
        use Pauli::*;
        match (self, other) {
            (I, p) | (p, I) => (0, p),
            (a, b) if a == b => (0, I),
            (X, Y) => (1, Z),
            (Y, Z) => (1, X),
            (Z, X) => (1, Y),
            (Y, X) => (3, Z),
            (Z, Y) => (3, X),
            (X, Z) => (3, Y),
            _ => unreachable!(),
        }
    }

    fn anticommutes(self, other: Pauli) -> bool {
        self != Pauli::I && other != Pauli::I && self != other
    }

    pub fn matrix(self) -> CMatrix {
        let i = dense::I;
        match self {
            Pauli::I => dense::identity(2),
            Pauli::X => dense::from_rows(&[&[ZERO, ONE], &[ONE, ZERO]]),
            Pauli::Y => dense::from_rows(&[&[ZERO, -i], &[i, ZERO]]),
            Pauli::Z => dense::from_rows(&[&[ONE, ZERO], &[ZERO, -ONE]]),
        }
    }

    fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Element `i^k` of the four-element phase group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Phase(u8);

impl Phase {
    pub const PLUS_ONE: Phase = Phase(0);
    pub const PLUS_I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_power(k: u8) -> Self {
        Phase(k % 4)
    }

    pub fn power(self) -> u8 {
        self.0
    }

    pub fn is_real(self) -> bool {
        self.0 % 2 == 0
    }

    pub fn to_complex(self) -> Complex64 {
        match self.0 {
            0 => ONE,
            1 => dense::I,
            2 => -ONE,
            _ => -dense::I,
        }
    }
}

impl Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

/// Phased tensor product of single-qubit Paulis.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    phase: Phase,
    factors: Vec<Pauli>,
}

impl PauliString {
    pub fn new(phase: Phase, factors: Vec<Pauli>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::arg("a Pauli string needs at least one qubit"));
        }
        Ok(PauliString { phase, factors })
    }

    pub fn identity(n_qubits: usize) -> Result<Self> {
        Self::new(Phase::PLUS_ONE, vec![Pauli::I; n_qubits])
    }

    /// Identity on `n_qubits` except for the listed `(qubit, factor)` pairs.
    pub fn from_sparse(n_qubits: usize, ops: &[(usize, Pauli)]) -> Result<Self> {
        let mut s = Self::identity(n_qubits)?;
        for &(q, p) in ops {
            if q >= n_qubits {
                return Err(Error::arg(format!("qubit {q} out of range for {n_qubits} qubits")));
            }
            s.factors[q] = p;
        }
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.factors.len()
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn factors(&self) -> &[Pauli] {
        &self.factors
    }

    pub fn factor(&self, qubit: usize) -> Pauli {
        self.factors[qubit]
    }

    pub fn with_phase(&self, phase: Phase) -> Self {
        PauliString {
            phase,
            factors: self.factors.clone(),
        }
    }

    /// Number of non-identity factors.
    pub fn weight(&self) -> usize {
        self.factors.iter().filter(|&&p| p != Pauli::I).count()
    }

    pub fn is_identity(&self) -> bool {
        self.weight() == 0
    }

    fn check_size(&self, other: &PauliString) -> Result<()> {
        if self.n_qubits() != other.n_qubits() {
            return Err(Error::arg(format!(
                "Pauli strings act on {} and {} qubits",
                self.n_qubits(),
                other.n_qubits()
            )));
        }
        Ok(())
    }

    /// Exact product `self · other`.
    pub fn multiply(&self, other: &PauliString) -> Result<PauliString> {
        self.check_size(other)?;
        let mut k = self.phase.0 + other.phase.0;
        let factors = self
            .factors
            .iter()
            .zip(&other.factors)
            .map(|(&a, &b)| {
                let (dk, p) = a.product(b);
                k += dk;
                p
            })
            .collect();
        Ok(PauliString {
            phase: Phase::from_power(k),
            factors,
        })
    }

    /// True iff `self · other == other · self`: an even number of positions
    /// carry anticommuting factors.
    pub fn commutes(&self, other: &PauliString) -> Result<bool> {
        self.check_size(other)?;
        let anti = self
            .factors
            .iter()
            .zip(&other.factors)
            .filter(|(a, b)| a.anticommutes(**b))
            .count();
        Ok(anti % 2 == 0)
    }

    /// Dense `2^n x 2^n` matrix, qubit 0 as the leftmost Kronecker factor.
    pub fn to_matrix(&self) -> Result<CMatrix> {
        dense::check_dense_capacity(self.n_qubits())?;
        let mut m = dense::identity(1);
        for p in &self.factors {
            m = dense::kron(&m, &p.matrix());
        }
        let phase = self.phase.to_complex();
        Ok(m.map(|z| z * phase))
    }
}

impl fmt::Display for PauliString {
    /// Text form `±[i]P0P1...`, e.g. `+XXYY` or `-iZI`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase.0 {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        f.write_str(prefix)?;
        for p in &self.factors {
            write!(f, "{}", p.letter())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (negative, rest) = match s.as_bytes().first() {
            Some(b'+') => (false, &s[1..]),
            Some(b'-') => (true, &s[1..]),
            _ => (false, s),
        };
        let (imag, rest) = match rest.strip_prefix('i') {
            Some(r) => (true, r),
            None => (false, rest),
        };
        let factors = rest
            .chars()
            .map(|c| match c {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(Error::arg(format!("unexpected Pauli letter {other:?} in {s:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        let k = (if negative { 2 } else { 0 }) + u8::from(imag);
        PauliString::new(Phase::from_power(k), factors)
    }
}

/// Real linear combination of Pauli strings in canonical form.
///
/// Canonical form folds a `-1` phase into the coefficient, merges terms with
/// identical strings and drops terms whose coefficient is exactly zero.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PauliSum {
    terms: Vec<(f64, PauliString)>,
}

impl PauliSum {
    pub fn new(terms: impl IntoIterator<Item = (f64, PauliString)>) -> Result<Self> {
        let mut merged: Vec<(f64, PauliString)> = Vec::new();
        let mut n_qubits = None;
        for (coef, string) in terms {
            match n_qubits {
                None => n_qubits = Some(string.n_qubits()),
                Some(n) if n != string.n_qubits() => {
                    return Err(Error::arg("terms of a Pauli sum act on different qubit counts"))
                }
                _ => {}
            }
            let (coef, string) = if string.phase() == Phase::MINUS_ONE || string.phase() == Phase::MINUS_I {
                (-coef, string.with_phase(Phase::from_power(string.phase().power() - 2)))
            } else {
                (coef, string)
            };
            match merged.iter_mut().find(|(_, s)| *s == string) {
                Some(entry) => entry.0 += coef,
                None => merged.push((coef, string)),
            }
        }
        merged.retain(|(c, _)| *c != 0.0);
        Ok(PauliSum { terms: merged })
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn n_qubits(&self) -> Option<usize> {
        self.terms.first().map(|(_, s)| s.n_qubits())
    }

    /// True when every pair of terms commutes.
    pub fn terms_commute(&self) -> bool {
        self.terms.iter().enumerate().all(|(i, (_, a))| {
            self.terms[i + 1..]
                .iter()
                .all(|(_, b)| a.commutes(b).unwrap_or(false))
        })
    }

    pub fn to_matrix(&self, n_qubits: usize) -> Result<CMatrix> {
        dense::check_dense_capacity(n_qubits)?;
        let dim = 1usize << n_qubits;
        let mut acc = CMatrix::zeros(dim, dim);
        for (coef, s) in &self.terms {
            if s.n_qubits() != n_qubits {
                return Err(Error::arg("Pauli sum qubit count mismatch"));
            }
            acc += s.to_matrix()? * Complex64::new(*coef, 0.0);
        }
        Ok(acc)
    }
}
