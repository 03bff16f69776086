use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gate and readout error rates for trajectory simulation.
///
/// Gate errors are depolarizing: after a gate, with the gate's probability a
/// uniformly random non-identity Pauli hits the gate's qubits. Readout errors
/// flip each reported bit independently with the measured qubit's `λ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Per-physical-qubit flip probability; a single entry applies to all qubits.
    pub readout_lambda: Vec<f64>,
    pub sq_depol: f64,
    pub cx_depol: f64,
    pub seed: u64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel::none(0)
    }
}

impl NoiseModel {
    pub fn none(seed: u64) -> Self {
        NoiseModel {
            readout_lambda: vec![0.0],
            sq_depol: 0.0,
            cx_depol: 0.0,
            seed,
        }
    }

    pub fn readout_only(lambda: f64, seed: u64) -> Self {
        NoiseModel {
            readout_lambda: vec![lambda],
            ..NoiseModel::none(seed)
        }
    }

    /// Average rates reported for the 5-qubit device.
    pub fn belem_like(seed: u64) -> Self {
        NoiseModel {
            readout_lambda: vec![0.0211],
            sq_depol: 2.76e-4,
            cx_depol: 8.75e-3,
            seed,
        }
    }

    /// Average rates reported for the 7-qubit device.
    pub fn nairobi_like(seed: u64) -> Self {
        NoiseModel {
            readout_lambda: vec![0.0306],
            sq_depol: 3.28e-4,
            cx_depol: 1.492e-2,
            seed,
        }
    }

    pub fn preset(name: &str, seed: u64) -> Option<Self> {
        match name {
            "none" => Some(Self::none(seed)),
            "belem-like" => Some(Self::belem_like(seed)),
            "nairobi-like" => Some(Self::nairobi_like(seed)),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.readout_lambda.is_empty() {
            return Err(Error::arg("readout_lambda needs at least one entry"));
        }
        for &l in &self.readout_lambda {
            if !(0.0..0.5).contains(&l) {
                return Err(Error::arg(format!("readout flip rate {l} outside [0, 0.5)")));
            }
        }
        for (name, p) in [("sq_depol", self.sq_depol), ("cx_depol", self.cx_depol)] {
            if !(0.0..1.0).contains(&p) {
                return Err(Error::arg(format!("{name} = {p} outside [0, 1)")));
            }
        }
        Ok(())
    }

    pub fn lambda(&self, qubit: usize) -> f64 {
        match self.readout_lambda.as_slice() {
            [l] => *l,
            ls => ls.get(qubit).copied().unwrap_or(0.0),
        }
    }

    /// Mean flip rate over `qubits`.
    pub fn mean_lambda(&self, qubits: &[usize]) -> f64 {
        if qubits.is_empty() {
            return self.lambda(0);
        }
        qubits.iter().map(|&q| self.lambda(q)).sum::<f64>() / qubits.len() as f64
    }

    pub fn has_gate_noise(&self) -> bool {
        self.sq_depol > 0.0 || self.cx_depol > 0.0
    }

    pub fn has_readout_noise(&self) -> bool {
        self.readout_lambda.iter().any(|&l| l > 0.0)
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        NoiseModel { seed, ..self.clone() }
    }
}
