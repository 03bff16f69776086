//! Gate synthesis of `U_ε = exp(iε(b+b†)(a+a†))`.
//!
//! Under the dual-rail map the exponent is `(iε/4)(XXXX + XXYY + YYXX + YYYY)`.
//! The four strings commute, so `U_ε` is the exact product of four
//! single-string exponentials and no Trotter splitting is needed. Each factor
//! is emitted as a CNOT ladder from qubit 0 conjugating a single-qubit
//! rotation, in the S/CNOT/Rx/U1 form of the reference decomposition.

use std::f64::consts::FRAC_PI_2;

use crate::boson::{self, ModeEncoding};
use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::pauli::{Pauli, Phase, PauliString};

/// Default bound on `|ε|` accepted by the synthesis entry points.
pub const DEFAULT_EPSILON_LIMIT: f64 = 1.0;

fn check_epsilon(epsilon: f64, limit: f64) -> Result<()> {
    if !epsilon.is_finite() || epsilon.abs() >= limit {
        return Err(Error::arg(format!(
            "epsilon {epsilon} outside the perturbative window |ε| < {limit}"
        )));
    }
    Ok(())
}

/// The ε-independent ladder on qubit 0 and the ε-dependent core rotation.
///
/// For term 1 the ladder is `CNOT(0,3) S0 CNOT(0,2) S0 CNOT(0,1) S0` and the
/// core is `Rx(π/2) U1(ε/2) Rx(-π/2)` on qubit 0; the full term is
/// ladder, core, ladder inverse (in application order).
#[derive(Debug, Clone, PartialEq)]
pub struct TermDecomposition {
    pub term_index: usize,
    /// `S` collars applied before the ladder (and undone after it) that turn
    /// `X` factors into `Y` factors.
    pub collars: Vec<usize>,
    pub ladder: Circuit,
    pub core: Circuit,
}

impl TermDecomposition {
    pub fn new(term_index: usize, epsilon: f64) -> Result<Self> {
        let collars = match term_index {
            1 => vec![],
            2 => vec![3, 2],
            3 => vec![1, 0],
            4 => vec![3, 2, 1, 0],
            _ => return Err(Error::arg(format!("term index {term_index} not in 1..=4"))),
        };
        let ladder = Circuit::from_gates(
            4,
            [
                Gate::cx(0, 3),
                Gate::S(0),
                Gate::cx(0, 2),
                Gate::S(0),
                Gate::cx(0, 1),
                Gate::S(0),
            ],
        )?;
        let core = Circuit::from_gates(
            4,
            [
                Gate::Rx(0, FRAC_PI_2),
                Gate::U1(0, epsilon / 2.0),
                Gate::Rx(0, -FRAC_PI_2),
            ],
        )?;
        Ok(TermDecomposition {
            term_index,
            collars,
            ladder,
            core,
        })
    }

    /// Collars, ladder, core, ladder inverse, collars inverse.
    pub fn circuit(&self) -> Result<Circuit> {
        let mut c = Circuit::new(4)?;
        for &q in &self.collars {
            c.push(Gate::S(q))?;
        }
        c.append_circuit(&self.ladder, None)?;
        c.append_circuit(&self.core, None)?;
        c.append_circuit(&self.ladder.dagger()?, None)?;
        for &q in self.collars.iter().rev() {
            c.push(Gate::Sdg(q))?;
        }
        Ok(c)
    }
}

/// Circuit for `exp(i(ε/4)P_i)`, `P_i` the i-th interaction string (1-based).
pub fn decompose_term(term_index: usize, epsilon: f64) -> Result<Circuit> {
    decompose_term_with_limit(term_index, epsilon, DEFAULT_EPSILON_LIMIT)
}

pub fn decompose_term_with_limit(term_index: usize, epsilon: f64, limit: f64) -> Result<Circuit> {
    check_epsilon(epsilon, limit)?;
    TermDecomposition::new(term_index, epsilon)?.circuit()
}

/// Terms 1..4 in index order, optionally preceded by the ground-state X gates.
/// Each term is recorded as a segment labelled `U_eps^(i)`.
pub fn build_evolution_circuit(epsilon: f64, prepend_ground_prep: bool) -> Result<Circuit> {
    build_evolution_circuit_ordered(epsilon, prepend_ground_prep, [1, 2, 3, 4])
}

/// Same as [`build_evolution_circuit`] with an explicit term order.
pub fn build_evolution_circuit_ordered(
    epsilon: f64,
    prepend_ground_prep: bool,
    order: [usize; 4],
) -> Result<Circuit> {
    check_epsilon(epsilon, DEFAULT_EPSILON_LIMIT)?;
    let mut c = Circuit::new(4)?;
    if prepend_ground_prep {
        let prep = boson::ground_state_prep(&ModeEncoding::optomechanical())?;
        c.append_circuit(&prep, Some("ground_prep"))?;
    }
    for i in order {
        let term = decompose_term(i, epsilon)?;
        c.append_circuit(&term, Some(&format!("U_eps^({i})")))?;
    }
    Ok(c)
}

/// Generic ladder synthesis of `exp(i·angle·P)` for a Hermitian Pauli string.
///
/// Convention: the pivot is the lowest-index non-identity qubit. Collars
/// rotate the pivot factor to `Y` (X: `S`, Z: `Rx(-π/2)`) and every other
/// factor to `X` (Y: `Sdg`, Z: `H`). A CNOT fan from the pivot, highest
/// target first, then folds `Y ⊗ X...` onto the pivot, where the rotation
/// `Rx(π/2) U1(-2·angle) Rx(-π/2)` implements `exp(i·angle·Y)`. Weight-one
/// strings use the native rotation instead (`Z` becomes a single `U1`).
pub fn compile_pauli_exponential(p: &PauliString, angle: f64) -> Result<Circuit> {
    if p.is_identity() {
        return Err(Error::arg("cannot synthesize the exponential of an identity string"));
    }
    let angle = match p.phase() {
        Phase::PLUS_ONE => angle,
        Phase::MINUS_ONE => -angle,
        _ => return Err(Error::arg("exponent string must be Hermitian (phase ±1)")),
    };
    let n = p.n_qubits();
    let support: Vec<usize> = (0..n).filter(|&q| p.factor(q) != Pauli::I).collect();
    let pivot = support[0];
    let mut c = Circuit::new(n)?;

    if support.len() == 1 {
        match p.factor(pivot) {
            Pauli::Z => c.push(Gate::U1(pivot, -2.0 * angle))?,
            Pauli::X => c.push(Gate::Rx(pivot, -2.0 * angle))?,
            Pauli::Y => push_y_core(&mut c, pivot, angle)?,
            Pauli::I => unreachable!(),
        }
        return Ok(c);
    }

    let mut collar = Circuit::new(n)?;
    match p.factor(pivot) {
        Pauli::X => collar.push(Gate::S(pivot))?,
        Pauli::Z => collar.push(Gate::Rx(pivot, -FRAC_PI_2))?,
        _ => {}
    }
    for &q in &support[1..] {
        match p.factor(q) {
            Pauli::Y => collar.push(Gate::Sdg(q))?,
            Pauli::Z => collar.push(Gate::H(q))?,
            _ => {}
        }
    }
    let mut fan = Circuit::new(n)?;
    for &q in support[1..].iter().rev() {
        fan.push(Gate::cx(pivot, q))?;
    }

    c.append_circuit(&collar, None)?;
    c.append_circuit(&fan, None)?;
    push_y_core(&mut c, pivot, angle)?;
    c.append_circuit(&fan.dagger()?, None)?;
    c.append_circuit(&collar.dagger()?, None)?;
    Ok(c)
}

/// `exp(i·angle·Y)` on `q` up to global phase.
fn push_y_core(c: &mut Circuit, q: usize, angle: f64) -> Result<()> {
    c.push(Gate::Rx(q, FRAC_PI_2))?;
    c.push(Gate::U1(q, -2.0 * angle))?;
    c.push(Gate::Rx(q, -FRAC_PI_2))
}
