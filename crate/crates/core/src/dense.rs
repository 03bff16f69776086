//! Dense complex matrices and the comparison metrics shared by every module.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Largest register for which dense `2^n x 2^n` objects are built.
pub const MAX_DENSE_QUBITS: usize = 12;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub(crate) fn check_dense_capacity(n_qubits: usize) -> Result<()> {
    if n_qubits > MAX_DENSE_QUBITS {
        return Err(Error::Capacity(format!(
            "{n_qubits} qubits exceeds the dense limit of {MAX_DENSE_QUBITS}"
        )));
    }
    Ok(())
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub fn from_rows(rows: &[&[Complex64]]) -> CMatrix {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    CMatrix::from_fn(n, m, |r, c| rows[r][c])
}

/// Kronecker product `a ⊗ b`; `a` is the more significant factor.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Phase-invariant distance `1 - |tr(A†B)| / dim`.
///
/// Zero exactly when `B = e^{iφ} A` for unitary `A`, `B`.
pub fn phase_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "phase_distance: shape mismatch");
    let dim = a.nrows() as f64;
    let mut tr = ZERO;
    for (x, y) in a.iter().zip(b.iter()) {
        tr += x.conj() * y;
    }
    (1.0 - tr.norm() / dim).max(0.0)
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// `max |U†U - I|`.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let prod = u.adjoint() * u;
    max_abs_diff(&prod, &identity(u.nrows()))
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    max_abs_diff(m, &m.adjoint()) <= tol
}

/// Bitstring for basis index `idx` on `n` qubits, qubit 0 first.
pub fn index_to_bits(idx: usize, n: usize) -> String {
    (0..n)
        .map(|q| if idx >> (n - 1 - q) & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Inverse of [`index_to_bits`]. Returns `None` on any character other than `0`/`1`.
pub fn bits_to_index(bits: &str) -> Option<usize> {
    bits.chars().try_fold(0usize, |acc, ch| match ch {
        '0' => Some(acc << 1),
        '1' => Some(acc << 1 | 1),
        _ => None,
    })
}
