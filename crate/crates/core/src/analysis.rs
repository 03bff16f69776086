//! Target states, fidelity, concurrence and readout error propagation.
//!
//! Logical states are written in the basis `|00⟩, |01⟩, |10⟩, |11⟩` with the
//! matter mode as the high bit.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::boson::subspace_indices;
use crate::dense::{CMatrix, ZERO};
use crate::error::{Error, Result};
use crate::pauli::PauliString;
use crate::simulator::StateVector;
use crate::tomography::Traces;

const NORM_TOLERANCE: f64 = 1e-12;
/// Beyond this |ε| the second-order state is a poor approximation.
pub const PERTURBATIVE_LIMIT: f64 = 0.3;
/// Qubits read out in every tomography setting.
pub const MEASURED_QUBITS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogicalState {
    amps: [Complex64; 4],
}

impl LogicalState {
    /// Stores the amplitudes as given; see [`LogicalState::normalized`].
    pub fn from_amplitudes(amps: [Complex64; 4]) -> Self {
        LogicalState { amps }
    }

    pub fn normalized(amps: [Complex64; 4]) -> Result<Self> {
        let n = amps.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::arg("cannot normalize a zero or non-finite state"));
        }
        Ok(LogicalState { amps: amps.map(|a| a / n) })
    }

    /// Logical part of a physical 4-qubit state and the probability outside
    /// the dual-rail subspace.
    pub fn from_physical(psi: &StateVector) -> Result<(Self, f64)> {
        if psi.n_qubits() != 4 {
            return Err(Error::arg("expected a 4-qubit state"));
        }
        let idx = subspace_indices();
        let amps = idx.map(|i| psi.amplitudes()[i]);
        let inside: f64 = amps.iter().map(Complex64::norm_sqr).sum();
        Ok((LogicalState { amps }, (psi.norm_sqr() - inside).max(0.0)))
    }

    pub fn amplitudes(&self) -> &[Complex64; 4] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(Complex64::norm_sqr).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORM_TOLERANCE
    }

    pub fn inner(&self, other: &LogicalState) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn density(&self) -> CMatrix {
        CMatrix::from_fn(4, 4, |r, c| self.amps[r] * self.amps[c].conj())
    }

    /// `⟨ψ|P|ψ⟩` for a two-factor string (matter factor first).
    pub fn expectation(&self, p: &PauliString) -> Result<f64> {
        if p.n_qubits() != 2 {
            return Err(Error::arg("logical observables act on two logical qubits"));
        }
        let m = p.to_matrix()?;
        let v = nalgebra::DVector::from_column_slice(&self.amps);
        Ok((v.adjoint() * m * v)[(0, 0)].re)
    }

    /// Reduced density matrix of the matter mode.
    pub fn reduced_matter(&self) -> [[Complex64; 2]; 2] {
        let a = &self.amps;
        let mut r = [[ZERO; 2]; 2];
        for (i, row) in r.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = (0..2).map(|p| a[2 * i + p] * a[2 * j + p].conj()).sum();
            }
        }
        r
    }

    /// Reduced density matrix of the photon mode.
    pub fn reduced_photon(&self) -> [[Complex64; 2]; 2] {
        let a = &self.amps;
        let mut r = [[ZERO; 2]; 2];
        for (i, row) in r.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = (0..2).map(|m| a[2 * m + i] * a[2 * m + j].conj()).sum();
            }
        }
        r
    }
}

/// Second-order amplitudes `(1 - ε²/2, 0, 0, iε)` before normalization.
pub fn perturbative_amplitudes(epsilon: f64) -> [Complex64; 4] {
    [
        Complex64::new(1.0 - epsilon * epsilon / 2.0, 0.0),
        ZERO,
        ZERO,
        Complex64::new(0.0, epsilon),
    ]
}

/// Second-order perturbative state, renormalized.
pub fn perturbative_state(epsilon: f64) -> LogicalState {
    if epsilon.abs() > PERTURBATIVE_LIMIT {
        log::warn!("ε = {epsilon} is outside the perturbative range |ε| ≤ {PERTURBATIVE_LIMIT}");
    }
    LogicalState::normalized(perturbative_amplitudes(epsilon)).expect("nonzero amplitudes")
}

/// `cos ε |00⟩ + i sin ε |11⟩`.
pub fn exact_state(epsilon: f64) -> LogicalState {
    LogicalState {
        amps: [
            Complex64::new(epsilon.cos(), 0.0),
            ZERO,
            ZERO,
            Complex64::new(0.0, epsilon.sin()),
        ],
    }
}

/// `C = sqrt(2 (1 - tr σ_m²))` from the matter reduced state.
///
/// For a 2×2 density matrix `1 - tr σ² = 2 det σ`; the determinant form
/// avoids the cancellation in `1 - tr σ²` for weakly entangled states.
pub fn concurrence(s: &LogicalState) -> Result<f64> {
    if !s.is_normalized() {
        return Err(Error::contract(format!("state norm² is {}", s.norm_sqr())));
    }
    let r = s.reduced_matter();
    let det = (r[0][0] * r[1][1]).re - r[0][1].norm_sqr();
    Ok(2.0 * det.max(0.0).sqrt())
}

/// The five traces of a logical pure state.
pub fn exact_traces(s: &LogicalState) -> Traces {
    let e = |p: &str| s.expectation(&p.parse().expect("valid string")).expect("two qubits");
    Traces {
        zz: e("ZZ"),
        xy: e("XY"),
        yx: e("YX"),
        iz: e("IZ"),
        zi: e("ZI"),
    }
}

/// Second-order predictions `1, 2ε, 2ε, 1 - 2ε², 1 - 2ε²`.
pub fn perturbative_traces(epsilon: f64) -> Traces {
    let e2 = epsilon * epsilon;
    Traces {
        zz: 1.0,
        xy: 2.0 * epsilon,
        yx: 2.0 * epsilon,
        iz: 1.0 - 2.0 * e2,
        zi: 1.0 - 2.0 * e2,
    }
}

/// `F = ¼[1 + tr_zz + 2ε(tr_yx + tr_xy) + (1 - 2ε²)(tr_iz + tr_zi)]`.
pub fn fidelity_from_traces(epsilon: f64, t: &Traces) -> f64 {
    let e2 = epsilon * epsilon;
    0.25 * (1.0 + t.zz + 2.0 * epsilon * (t.yx + t.xy) + (1.0 - 2.0 * e2) * (t.iz + t.zi))
}

/// A realized state to compare against a target.
#[derive(Debug, Clone, Copy)]
pub enum Realized<'a> {
    Pure(&'a LogicalState),
    Density(&'a CMatrix),
}

/// `⟨ψ|ρ|ψ⟩`, or `|⟨ψ|φ⟩|²` for a pure `φ`.
pub fn fidelity_exact(target: &LogicalState, realized: Realized<'_>) -> Result<f64> {
    match realized {
        Realized::Pure(phi) => Ok(target.inner(phi).norm_sqr()),
        Realized::Density(rho) => {
            if rho.shape() != (4, 4) {
                return Err(Error::arg(format!("density matrix is {:?}, expected 4×4", rho.shape())));
            }
            let v = nalgebra::DVector::from_column_slice(target.amplitudes());
            Ok((v.adjoint() * rho * v)[(0, 0)].re)
        }
    }
}

/// Readout uncertainty of one trace, `nλ(1 + tr)`.
pub fn trace_uncertainty(tr: f64, lambda: f64, n: usize) -> f64 {
    n as f64 * lambda * (1.0 + tr)
}

/// Propagated fidelity uncertainty
/// `¼ sqrt(Δzz² + 4ε²(Δxy² + Δyx²) + (1 - 4ε²)(Δzi² + Δiz²))`.
pub fn fidelity_error(epsilon: f64, t: &Traces, lambda: f64, n: usize) -> Result<f64> {
    if !(0.0..0.5).contains(&lambda) {
        return Err(Error::arg(format!("readout flip rate {lambda} outside [0, 0.5)")));
    }
    if n == 0 {
        return Err(Error::arg("at least one measured qubit"));
    }
    let d = t.map(|tr| trace_uncertainty(tr, lambda, n));
    let e2 = epsilon * epsilon;
    let sum = d.zz.powi(2) + 4.0 * e2 * (d.xy.powi(2) + d.yx.powi(2)) + (1.0 - 4.0 * e2) * (d.zi.powi(2) + d.iz.powi(2));
    Ok(0.25 * sum.max(0.0).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub epsilon: f64,
    /// Raw value; may exceed 1 by O(ε⁴) since the target is truncated.
    pub fidelity: f64,
    pub fidelity_err: f64,
    pub concurrence_theory: f64,
    pub traces: Traces,
}

impl FidelityReport {
    pub fn new(epsilon: f64, traces: Traces, lambda: f64) -> Result<Self> {
        Ok(FidelityReport {
            epsilon,
            fidelity: fidelity_from_traces(epsilon, &traces),
            fidelity_err: fidelity_error(epsilon, &traces, lambda, MEASURED_QUBITS)?,
            concurrence_theory: concurrence(&perturbative_state(epsilon))?,
            traces,
        })
    }

    /// Fidelity clamped to [0, 1] for display.
    pub fn displayed_fidelity(&self) -> f64 {
        self.fidelity.clamp(0.0, 1.0)
    }
}
