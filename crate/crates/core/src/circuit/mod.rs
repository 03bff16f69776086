//! Gate-level circuit representation and its dense-unitary evaluator.

mod qasm;

pub use qasm::{from_qasm, to_qasm};

use std::ops::Range;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dense::{self, CMatrix, ONE, ZERO};
use crate::error::{Error, Result};

/// A gate acting on 0-based qubit indices. Angles are in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    X(usize),
    /// Square root of X, `e^{iπ/4} Rx(π/2)`.
    SX(usize),
    /// Inverse of [`Gate::SX`]; kept so that inversion stays exact.
    SXdg(usize),
    H(usize),
    S(usize),
    Sdg(usize),
    /// `exp(-i θ/2 σx)`.
    Rx(usize, f64),
    /// `exp(-i λ/2 σz)`.
    Rz(usize, f64),
    /// `diag(1, e^{iλ})`.
    U1(usize, f64),
    CX { control: usize, target: usize },
    Measure { qubit: usize, cbit: usize },
}

impl Gate {
    pub fn cx(control: usize, target: usize) -> Gate {
        Gate::CX { control, target }
    }

    pub fn measure(qubit: usize, cbit: usize) -> Gate {
        Gate::Measure { qubit, cbit }
    }

    /// Qubits touched by the gate.
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::CX { control, target } => vec![control, target],
            Gate::Measure { qubit, .. } => vec![qubit],
            _ => vec![self.single_qubit().expect("single-qubit gate")],
        }
    }

    /// The qubit of a single-qubit unitary, `None` for CNOT and Measure.
    pub fn single_qubit(&self) -> Option<usize> {
        match *self {
            Gate::X(q)
            | Gate::SX(q)
            | Gate::SXdg(q)
            | Gate::H(q)
            | Gate::S(q)
            | Gate::Sdg(q)
            | Gate::Rx(q, _)
            | Gate::Rz(q, _)
            | Gate::U1(q, _) => Some(q),
            Gate::CX { .. } | Gate::Measure { .. } => None,
        }
    }

    pub fn touches(&self, qubit: usize) -> bool {
        match *self {
            Gate::CX { control, target } => control == qubit || target == qubit,
            Gate::Measure { qubit: q, .. } => q == qubit,
            _ => self.single_qubit() == Some(qubit),
        }
    }

    pub fn is_measure(&self) -> bool {
        matches!(self, Gate::Measure { .. })
    }

    pub fn is_cx(&self) -> bool {
        matches!(self, Gate::CX { .. })
    }

    /// Same gate with every qubit index passed through `f`.
    pub fn remap(&self, f: impl Fn(usize) -> usize) -> Gate {
        match *self {
            Gate::X(q) => Gate::X(f(q)),
            Gate::SX(q) => Gate::SX(f(q)),
            Gate::SXdg(q) => Gate::SXdg(f(q)),
            Gate::H(q) => Gate::H(f(q)),
            Gate::S(q) => Gate::S(f(q)),
            Gate::Sdg(q) => Gate::Sdg(f(q)),
            Gate::Rx(q, t) => Gate::Rx(f(q), t),
            Gate::Rz(q, t) => Gate::Rz(f(q), t),
            Gate::U1(q, t) => Gate::U1(f(q), t),
            Gate::CX { control, target } => Gate::CX {
                control: f(control),
                target: f(target),
            },
            Gate::Measure { qubit, cbit } => Gate::Measure { qubit: f(qubit), cbit },
        }
    }

    /// Exact inverse. `None` for measurements.
    pub fn inverse(&self) -> Option<Gate> {
        Some(match *self {
            Gate::SX(q) => Gate::SXdg(q),
            Gate::SXdg(q) => Gate::SX(q),
            Gate::S(q) => Gate::Sdg(q),
            Gate::Sdg(q) => Gate::S(q),
            Gate::Rx(q, t) => Gate::Rx(q, -t),
            Gate::Rz(q, t) => Gate::Rz(q, -t),
            Gate::U1(q, t) => Gate::U1(q, -t),
            Gate::Measure { .. } => return None,
            g @ (Gate::X(_) | Gate::H(_) | Gate::CX { .. }) => g,
        })
    }

    /// 2x2 matrix of a single-qubit gate.
    pub fn matrix_2x2(&self) -> Option<[[Complex64; 2]; 2]> {
        let i = dense::I;
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let m = match *self {
            Gate::X(_) => [[ZERO, ONE], [ONE, ZERO]],
            Gate::SX(_) => {
                let a = Complex64::new(0.5, 0.5);
                let b = Complex64::new(0.5, -0.5);
                [[a, b], [b, a]]
            }
            Gate::SXdg(_) => {
                let a = Complex64::new(0.5, -0.5);
                let b = Complex64::new(0.5, 0.5);
                [[a, b], [b, a]]
            }
            Gate::H(_) => {
                let a = Complex64::new(h, 0.0);
                [[a, a], [a, -a]]
            }
            Gate::S(_) => [[ONE, ZERO], [ZERO, i]],
            Gate::Sdg(_) => [[ONE, ZERO], [ZERO, -i]],
            Gate::Rx(_, t) => {
                let c = Complex64::new((t / 2.0).cos(), 0.0);
                let s = Complex64::new(0.0, -(t / 2.0).sin());
                [[c, s], [s, c]]
            }
            Gate::Rz(_, t) => [
                [Complex64::from_polar(1.0, -t / 2.0), ZERO],
                [ZERO, Complex64::from_polar(1.0, t / 2.0)],
            ],
            Gate::U1(_, t) => [[ONE, ZERO], [ZERO, Complex64::from_polar(1.0, t)]],
            Gate::CX { .. } | Gate::Measure { .. } => return None,
        };
        Some(m)
    }

    /// Full `2^n x 2^n` matrix of a unitary gate, built by Kronecker products.
    fn embedded(&self, n: usize) -> CMatrix {
        let eye = dense::identity(2);
        let p0 = dense::from_rows(&[&[ONE, ZERO], &[ZERO, ZERO]]);
        let p1 = dense::from_rows(&[&[ZERO, ZERO], &[ZERO, ONE]]);
        let x = dense::from_rows(&[&[ZERO, ONE], &[ONE, ZERO]]);
        let chain = |pick: &dyn Fn(usize) -> CMatrix| {
            (0..n).fold(dense::identity(1), |acc, q| dense::kron(&acc, &pick(q)))
        };
        match *self {
            Gate::CX { control, target } => {
                let a = chain(&|q| if q == control { p0.clone() } else { eye.clone() });
                let b = chain(&|q| {
                    if q == control {
                        p1.clone()
                    } else if q == target {
                        x.clone()
                    } else {
                        eye.clone()
                    }
                });
                a + b
            }
            _ => {
                let qubit = self.single_qubit().expect("unitary gate");
                let m = self.matrix_2x2().expect("unitary gate");
                let g = dense::from_rows(&[&m[0], &m[1]]);
                chain(&|q| if q == qubit { g.clone() } else { eye.clone() })
            }
        }
    }
}

/// Totals by arity; measurements excluded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GateCounts {
    pub single_qubit: usize,
    pub cnot: usize,
}

/// A labelled range of gate indices, e.g. the gates implementing one term.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub label: String,
    pub range: Range<usize>,
}

/// Ordered gate list over `n_qubits` qubits. Measurements may only form a
/// trailing suffix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
    segments: Vec<Segment>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::arg("a circuit needs at least one qubit"));
        }
        Ok(Circuit {
            n_qubits,
            gates: Vec::new(),
            segments: Vec::new(),
        })
    }

    /// Builds a circuit from a gate list, validating each gate in order.
    pub fn from_gates(n_qubits: usize, gates: impl IntoIterator<Item = Gate>) -> Result<Self> {
        let mut c = Circuit::new(n_qubits)?;
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn has_measurements(&self) -> bool {
        self.gates.last().is_some_and(Gate::is_measure)
    }

    /// Appends `gate`, enforcing index range, `control != target`, and the
    /// trailing-measurement rule.
    pub fn push(&mut self, gate: Gate) -> Result<()> {
        for q in gate.qubits() {
            if q >= self.n_qubits {
                return Err(Error::arg(format!(
                    "qubit {q} out of range for a {}-qubit circuit",
                    self.n_qubits
                )));
            }
        }
        if let Gate::CX { control, target } = gate {
            if control == target {
                return Err(Error::arg(format!("CNOT control and target are both {control}")));
            }
        }
        if !gate.is_measure() && self.has_measurements() {
            return Err(Error::arg("unitary gate after a measurement"));
        }
        self.gates.push(gate);
        Ok(())
    }

    /// Appends every gate of `other`, recording a segment when `label` is given.
    pub fn append_circuit(&mut self, other: &Circuit, label: Option<&str>) -> Result<()> {
        if other.n_qubits > self.n_qubits {
            return Err(Error::arg("appended circuit is wider than the target"));
        }
        let start = self.gates.len();
        for &g in &other.gates {
            self.push(g)?;
        }
        let offset = |r: &Range<usize>| r.start + start..r.end + start;
        self.segments.extend(other.segments.iter().map(|s| Segment {
            label: s.label.clone(),
            range: offset(&s.range),
        }));
        if let Some(label) = label {
            self.segments.push(Segment {
                label: label.to_string(),
                range: start..self.gates.len(),
            });
        }
        Ok(())
    }

    pub fn label_segment(&mut self, label: &str, range: Range<usize>) -> Result<()> {
        if range.end > self.gates.len() || range.start > range.end {
            return Err(Error::arg("segment range outside the gate list"));
        }
        self.segments.push(Segment {
            label: label.to_string(),
            range,
        });
        Ok(())
    }

    /// Copy without the trailing measurements.
    pub fn without_measurements(&self) -> Circuit {
        let keep = self.gates.iter().take_while(|g| !g.is_measure()).count();
        Circuit {
            n_qubits: self.n_qubits,
            gates: self.gates[..keep].to_vec(),
            segments: self
                .segments
                .iter()
                .filter(|s| s.range.end <= keep)
                .cloned()
                .collect(),
        }
    }

    /// `(qubit, cbit)` pairs of the measurement suffix.
    pub fn measurements(&self) -> Vec<(usize, usize)> {
        self.gates
            .iter()
            .filter_map(|g| match *g {
                Gate::Measure { qubit, cbit } => Some((qubit, cbit)),
                _ => None,
            })
            .collect()
    }

    /// Appends `Measure(q, q)` for every qubit.
    pub fn measure_all(&mut self) -> Result<()> {
        for q in 0..self.n_qubits {
            self.push(Gate::measure(q, q))?;
        }
        Ok(())
    }

    fn require_unitary(&self, what: &str) -> Result<()> {
        if self.gates.iter().any(Gate::is_measure) {
            return Err(Error::contract(format!("{what} requires a circuit without measurements")));
        }
        Ok(())
    }

    /// Dense unitary, gates multiplied in application order.
    pub fn unitary(&self) -> Result<CMatrix> {
        self.require_unitary("unitary evaluation")?;
        dense::check_dense_capacity(self.n_qubits)?;
        let dim = 1usize << self.n_qubits;
        let mut u = dense::identity(dim);
        for g in &self.gates {
            u = g.embedded(self.n_qubits) * u;
        }
        Ok(u)
    }

    /// Inverse circuit: reversed order, each gate inverted.
    pub fn dagger(&self) -> Result<Circuit> {
        self.require_unitary("dagger")?;
        let len = self.gates.len();
        let gates = self
            .gates
            .iter()
            .rev()
            .map(|g| g.inverse().expect("no measurements"))
            .collect();
        let segments = self
            .segments
            .iter()
            .rev()
            .map(|s| Segment {
                label: s.label.clone(),
                range: len - s.range.end..len - s.range.start,
            })
            .collect();
        Ok(Circuit {
            n_qubits: self.n_qubits,
            gates,
            segments,
        })
    }

    pub fn gate_counts(&self) -> GateCounts {
        self.gates.iter().fold(GateCounts::default(), |mut acc, g| {
            if g.is_cx() {
                acc.cnot += 1;
            } else if !g.is_measure() {
                acc.single_qubit += 1;
            }
            acc
        })
    }

    /// Gates in a qubit-relabelled copy on a register of `n_qubits`.
    pub fn remapped(&self, n_qubits: usize, map: impl Fn(usize) -> usize) -> Result<Circuit> {
        let mut out = Circuit::new(n_qubits)?;
        for g in &self.gates {
            out.push(g.remap(&map))?;
        }
        out.segments = self.segments.clone();
        Ok(out)
    }

    pub(crate) fn from_parts_unchecked(n_qubits: usize, gates: Vec<Gate>) -> Circuit {
        Circuit {
            n_qubits,
            gates,
            segments: Vec::new(),
        }
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;
    use crate::dense::{max_abs_diff, phase_distance, unitarity_defect};
    use crate::pauli::PauliString;
    use proptest::prelude::*;

    #[test]
    fn append_rules() {
        let mut c = Circuit::new(1).unwrap();
        c.push(Gate::X(0)).unwrap();
        assert_eq!(c.len(), 1);

        let mut m = Circuit::new(2).unwrap();
        m.push(Gate::measure(0, 0)).unwrap();
        assert!(matches!(m.push(Gate::X(1)), Err(Error::Argument(_))));
        m.push(Gate::measure(1, 1)).unwrap();

        let mut c = Circuit::new(2).unwrap();
        assert!(matches!(c.push(Gate::cx(0, 0)), Err(Error::Argument(_))));
        assert!(matches!(c.push(Gate::X(2)), Err(Error::Argument(_))));
    }

    #[test]
    fn unitary_of_small_circuits() {
        let x = Circuit::from_gates(1, [Gate::X(0)]).unwrap().unitary().unwrap();
        assert_eq!(x, "X".parse::<PauliString>().unwrap().to_matrix().unwrap());
        let hh = Circuit::from_gates(1, [Gate::H(0), Gate::H(0)]).unwrap().unitary().unwrap();
        assert!(max_abs_diff(&hh, &dense::identity(2)) < 1e-12);
    }

    #[test]
    fn unitary_rejects_measurements_and_oversize() {
        let mut c = Circuit::new(1).unwrap();
        c.measure_all().unwrap();
        assert!(matches!(c.unitary(), Err(Error::Contract(_))));
        assert!(matches!(c.dagger(), Err(Error::Contract(_))));
        let wide = Circuit::new(13).unwrap();
        assert!(matches!(wide.unitary(), Err(Error::Capacity(_))));
    }

    #[test]
    fn fixed_gate_definitions() {
        let t = 0.37;
        let rx = Circuit::from_gates(1, [Gate::Rx(0, t)]).unwrap().unitary().unwrap();
        let x = "X".parse::<PauliString>().unwrap().to_matrix().unwrap();
        let want = dense::identity(2) * Complex64::new((t / 2.0).cos(), 0.0)
            - x * Complex64::new(0.0, (t / 2.0).sin());
        assert!(max_abs_diff(&rx, &want) < 1e-15);

        let s = Circuit::from_gates(1, [Gate::S(0)]).unwrap().unitary().unwrap();
        let u1 = Circuit::from_gates(1, [Gate::U1(0, FRAC_PI_2)]).unwrap().unitary().unwrap();
        assert!(max_abs_diff(&s, &u1) < 1e-15);

        let sx2 = Circuit::from_gates(1, [Gate::SX(0), Gate::SX(0)]).unwrap().unitary().unwrap();
        let x = Circuit::from_gates(1, [Gate::X(0)]).unwrap().unitary().unwrap();
        assert!(max_abs_diff(&sx2, &x) < 1e-15);

        let rz = Circuit::from_gates(1, [Gate::Rz(0, t)]).unwrap().unitary().unwrap();
        let u1 = Circuit::from_gates(1, [Gate::U1(0, t)]).unwrap().unitary().unwrap();
        assert!(phase_distance(&rz, &u1) < 1e-15);
    }

    #[test]
    fn cnot_uses_first_qubit_as_most_significant() {
        let u = Circuit::from_gates(2, [Gate::cx(0, 1)]).unwrap().unitary().unwrap();
        // |10> -> |11>
        assert_eq!(u[(3, 2)], ONE);
        assert_eq!(u[(0, 0)], ONE);
        let u = Circuit::from_gates(2, [Gate::cx(1, 0)]).unwrap().unitary().unwrap();
        // |01> -> |11>
        assert_eq!(u[(3, 1)], ONE);
    }

    #[test]
    fn dagger_examples() {
        let c = Circuit::from_gates(1, [Gate::S(0)]).unwrap();
        assert_eq!(c.dagger().unwrap().gates(), &[Gate::Sdg(0)]);
    }

    #[test]
    fn gate_counts_skip_measurements() {
        assert_eq!(Circuit::new(2).unwrap().gate_counts(), GateCounts::default());
        let mut c = Circuit::from_gates(2, [Gate::H(0), Gate::cx(0, 1), Gate::Rz(1, 0.2)]).unwrap();
        c.measure_all().unwrap();
        assert_eq!(c.gate_counts(), GateCounts { single_qubit: 2, cnot: 1 });
    }

    #[test]
    fn segments_survive_append_and_dagger() {
        let a = Circuit::from_gates(2, [Gate::H(0), Gate::cx(0, 1)]).unwrap();
        let mut c = Circuit::new(2).unwrap();
        c.push(Gate::X(1)).unwrap();
        c.append_circuit(&a, Some("bell")).unwrap();
        assert_eq!(c.segments()[0].range, 1..3);
        let d = c.dagger().unwrap();
        assert_eq!(d.segments()[0].range, 0..2);
        assert_eq!(d.dagger().unwrap(), c);
    }

    pub(crate) fn random_gate(n: usize) -> impl Strategy<Value = Gate> {
        let angle = -4.0f64..4.0;
        prop_oneof![
            (0..n).prop_map(Gate::X),
            (0..n).prop_map(Gate::SX),
            (0..n).prop_map(Gate::SXdg),
            (0..n).prop_map(Gate::H),
            (0..n).prop_map(Gate::S),
            (0..n).prop_map(Gate::Sdg),
            (0..n, angle.clone()).prop_map(|(q, t)| Gate::Rx(q, t)),
            (0..n, angle.clone()).prop_map(|(q, t)| Gate::Rz(q, t)),
            (0..n, angle).prop_map(|(q, t)| Gate::U1(q, t)),
            (0..n, 1..n.max(2)).prop_map(move |(c, d)| Gate::cx(c, (c + d) % n.max(2))),
        ]
    }

    fn random_circuit() -> impl Strategy<Value = Circuit> {
        (2usize..=4).prop_flat_map(|n| {
            proptest::collection::vec(random_gate(n), 0..30)
                .prop_map(move |g| Circuit::from_gates(n, g).unwrap())
        })
    }

    proptest! {
        #[test]
        fn dagger_inverts(c in random_circuit()) {
            let u = c.unitary().unwrap();
            let ud = c.dagger().unwrap().unitary().unwrap();
            prop_assert!(max_abs_diff(&(ud * &u), &dense::identity(u.nrows())) < 1e-12);
            prop_assert_eq!(c.dagger().unwrap().dagger().unwrap(), c);
        }

        #[test]
        fn evaluator_is_unitary_and_composes((a, b) in random_circuit().prop_flat_map(|a| {
            let n = a.n_qubits();
            (Just(a), proptest::collection::vec(random_gate(n), 0..20).prop_map(move |g| Circuit::from_gates(n, g).unwrap()))
        })) {
            let ua = a.unitary().unwrap();
            let ub = b.unitary().unwrap();
            prop_assert!(unitarity_defect(&ua) < 1e-12);
            let mut ab = a.clone();
            ab.append_circuit(&b, None).unwrap();
            prop_assert!(max_abs_diff(&ab.unitary().unwrap(), &(ub * ua)) < 1e-12);
        }
    }
}
