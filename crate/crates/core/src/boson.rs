//! Dual-rail mapping of the matter (m) and photon (p) modes onto qubits.
//!
//! With at most one excitation per mode each mode occupies a qubit pair:
//! mode `k` uses qubits `2k` and `2k + 1`, logical `|0⟩` is the pair state
//! `|01⟩` and logical `|1⟩` is `|10⟩`. Mode 0 is the matter oscillator,
//! mode 1 the optical field.
//!
//! The linearization conditions that justify `H = -g(b+b†)(a+a†)` (large
//! coherent amplitude, small displacement) are physics assumptions and are not
//! checked here.

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString, PauliSum};

/// Qubits needed for `n_modes` modes truncated at `n_p` excitations.
pub fn qubit_count(n_modes: usize, n_p: usize) -> Result<usize> {
    if n_modes == 0 || n_p == 0 {
        return Err(Error::arg("mode count and excitation cutoff must be positive"));
    }
    Ok(n_modes * (n_p + 1))
}

/// Mode-to-qubit assignment of the one-hot encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeEncoding {
    n_modes: usize,
    n_p: usize,
}

impl ModeEncoding {
    /// Only `n_p == 1` is implemented; larger cutoffs are a capacity error.
    pub fn new(n_modes: usize, n_p: usize) -> Result<Self> {
        qubit_count(n_modes, n_p)?;
        if n_p > 1 {
            return Err(Error::Capacity(format!(
                "only one excitation per mode is supported (got {n_p})"
            )));
        }
        Ok(ModeEncoding { n_modes, n_p })
    }

    /// The matter/photon encoding used throughout: two modes, one excitation each.
    pub fn optomechanical() -> Self {
        ModeEncoding { n_modes: 2, n_p: 1 }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn n_p(&self) -> usize {
        self.n_p
    }

    pub fn n_qubits(&self) -> usize {
        self.n_modes * (self.n_p + 1)
    }

    /// Qubit holding excitation level-slot `level` (0 or 1) of `mode`.
    pub fn qubit_of(&self, mode: usize, level: usize) -> Result<usize> {
        if mode >= self.n_modes || level > self.n_p {
            return Err(Error::arg(format!("no qubit for mode {mode}, slot {level}")));
        }
        Ok(mode * (self.n_p + 1) + level)
    }

    fn require_two_modes(&self) -> Result<()> {
        if self.n_modes != 2 || self.n_p != 1 {
            return Err(Error::Capacity(
                "only the two-mode, single-excitation encoding is supported".into(),
            ));
        }
        Ok(())
    }
}

/// A logical basis state `|m⟩_m |p⟩_p` with its physical bitstring.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubspaceState {
    pub matter: u8,
    pub photon: u8,
    /// Physical bits, qubit 0 first.
    pub bits: String,
}

impl SubspaceState {
    /// Index in the logical basis `{|00⟩, |01⟩, |10⟩, |11⟩}` (matter is the high bit).
    pub fn logical_index(&self) -> usize {
        (self.matter as usize) << 1 | self.photon as usize
    }

    pub fn label(&self) -> String {
        format!("|{}⟩_m|{}⟩_p", self.matter, self.photon)
    }
}

fn mode_bits(level: u8) -> &'static str {
    if level == 0 {
        "01"
    } else {
        "10"
    }
}

/// The four physical basis states, in logical order `|00⟩, |01⟩, |10⟩, |11⟩`.
pub fn physical_subspace(enc: &ModeEncoding) -> Result<Vec<SubspaceState>> {
    enc.require_two_modes()?;
    Ok((0..4u8)
        .map(|l| {
            let (m, p) = (l >> 1, l & 1);
            SubspaceState {
                matter: m,
                photon: p,
                bits: format!("{}{}", mode_bits(m), mode_bits(p)),
            }
        })
        .collect())
}

/// Computational-basis indices of the physical subspace in logical order.
pub fn subspace_indices() -> [usize; 4] {
    [0b0101, 0b0110, 0b1001, 0b1010]
}

/// Decodes one mode's qubit pair: `01 → 0`, `10 → 1`, anything else is unphysical.
pub fn decode_mode(first: bool, second: bool) -> Option<u8> {
    match (first, second) {
        (false, true) => Some(0),
        (true, false) => Some(1),
        _ => None,
    }
}

/// The four commuting strings of the mapped interaction, in term order 1..4:
/// `XXXX, XXYY, YYXX, YYYY`.
pub fn interaction_terms() -> [PauliString; 4] {
    use Pauli::{X, Y};
    [[X, X, X, X], [X, X, Y, Y], [Y, Y, X, X], [Y, Y, Y, Y]].map(|f| {
        PauliString::new(crate::pauli::Phase::PLUS_ONE, f.to_vec()).expect("four factors")
    })
}

/// Mapped Hamiltonian `-(g/4)(XXXX + XXYY + YYXX + YYYY)`.
pub fn mapped_hamiltonian(g: f64) -> Result<PauliSum> {
    if !g.is_finite() {
        return Err(Error::arg("coupling must be finite"));
    }
    PauliSum::new(interaction_terms().into_iter().map(|s| (-g / 4.0, s)))
}

/// X gates taking `|0000⟩` to the encoded ground state `|0101⟩`.
pub fn ground_state_prep(enc: &ModeEncoding) -> Result<Circuit> {
    enc.require_two_modes()?;
    let mut c = Circuit::new(enc.n_qubits())?;
    for mode in 0..enc.n_modes() {
        c.push(Gate::X(enc.qubit_of(mode, 1)?))?;
    }
    Ok(c)
}

/// Coupling constants. `epsilon` is always derived as `g * t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingParameters {
    g0: f64,
    alpha: f64,
    t: f64,
}

impl CouplingParameters {
    pub fn new(g0: f64, alpha: f64, t: f64) -> Result<Self> {
        if ![g0, alpha, t].iter().all(|v| v.is_finite()) {
            return Err(Error::arg("coupling parameters must be finite"));
        }
        Ok(CouplingParameters { g0, alpha, t })
    }

    pub fn g0(&self) -> f64 {
        self.g0
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// Linearized coupling `g = g0 * alpha`.
    pub fn g(&self) -> f64 {
        self.g0 * self.alpha
    }

    pub fn epsilon(&self) -> f64 {
        self.g() * self.t
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{self, is_hermitian, max_abs_diff, CMatrix, ONE, ZERO};
    use num_complex::Complex64;

    #[test]
    fn qubit_counts() {
        assert_eq!(qubit_count(2, 1).unwrap(), 4);
        assert_eq!(qubit_count(1, 1).unwrap(), 2);
        assert_eq!(qubit_count(3, 2).unwrap(), 9);
        assert!(qubit_count(0, 1).is_err());
        assert!(qubit_count(2, 0).is_err());
    }

    #[test]
    fn higher_cutoff_is_reserved() {
        assert!(matches!(ModeEncoding::new(2, 2), Err(Error::Capacity(_))));
        let three = ModeEncoding::new(3, 1).unwrap();
        assert!(matches!(physical_subspace(&three), Err(Error::Capacity(_))));
    }

    #[test]
    fn subspace_layout() {
        let sub = physical_subspace(&ModeEncoding::optomechanical()).unwrap();
        assert_eq!(sub.len(), 4);
        assert_eq!(sub[0].bits, "0101");
        assert_eq!(sub[3].bits, "1010");
        let bits: Vec<_> = sub.iter().map(|s| s.bits.as_str()).collect();
        assert_eq!(bits, ["0101", "0110", "1001", "1010"]);
        for (s, idx) in sub.iter().zip(subspace_indices()) {
            assert_eq!(dense::bits_to_index(&s.bits), Some(idx));
        }
    }

    #[test]
    fn hamiltonian_coefficients() {
        let h = mapped_hamiltonian(1.0).unwrap();
        assert_eq!(h.len(), 4);
        assert!(h.terms().iter().all(|(c, _)| *c == -0.25));
        assert!(mapped_hamiltonian(0.0).unwrap().is_empty());
        assert!(mapped_hamiltonian(f64::NAN).is_err());
        assert!(h.terms_commute());
    }

    /// `b + b†` truncated to one excitation, written in the one-hot basis
    /// directly from ladder-operator matrix elements: it maps `|01⟩ ↔ |10⟩`
    /// on a qubit pair and annihilates `|00⟩`, `|11⟩`.
    fn ladder_quadrature_pair() -> CMatrix {
        let mut m = CMatrix::zeros(4, 4);
        m[(0b10, 0b01)] = ONE;
        m[(0b01, 0b10)] = ONE;
        m
    }

    #[test]
    fn hamiltonian_matches_ladder_operators() {
        let quad = ladder_quadrature_pair();
        let product = dense::kron(&quad, &quad);
        let h = mapped_hamiltonian(1.0).unwrap().to_matrix(4).unwrap();
        assert!(max_abs_diff(&h, &product.map(|z| -z)) < 1e-15);
        assert!(is_hermitian(&h, 0.0));

        // Restricted to the subspace: -X_L ⊗ X_L, which couples |00⟩ ↔ |11⟩
        // and |01⟩ ↔ |10⟩ (logical index a ↔ 3 - a).
        let idx = subspace_indices();
        for (a, &ia) in idx.iter().enumerate() {
            for (b, &ib) in idx.iter().enumerate() {
                let want = if a + b == 3 { -ONE } else { ZERO };
                assert_eq!(h[(ia, ib)], want);
            }
        }
        // Nothing leaks out of the subspace.
        for &ib in &idx {
            for row in 0..16 {
                if !idx.contains(&row) {
                    assert_eq!(h[(row, ib)], ZERO);
                }
            }
        }
    }

    #[test]
    fn ground_state_circuit() {
        let enc = ModeEncoding::optomechanical();
        let prep = ground_state_prep(&enc).unwrap();
        assert_eq!(prep.gates(), &[Gate::X(1), Gate::X(3)]);
        assert_eq!(prep.gate_counts().single_qubit, 2);
        assert_eq!(prep.gate_counts().cnot, 0);
        let u = prep.unitary().unwrap();
        assert_eq!(u[(0b0101, 0)], ONE);
        assert_eq!(u[(0, 0)], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn epsilon_is_derived() {
        let p = CouplingParameters::new(2.0e-3, 50.0, 0.5).unwrap();
        assert_eq!(p.g(), 0.1);
        assert!((p.epsilon() - 0.05).abs() < 1e-17);
        assert!(CouplingParameters::new(f64::INFINITY, 1.0, 1.0).is_err());
    }
}
