//! Peephole simplification of basis-level circuits, iterated to a fixpoint.
//!
//! Rules:
//! - adjacent `Rz` on one qubit merge; an `Rz` may slide past CNOTs whose
//!   control is that qubit, since both are diagonal there;
//! - `Rz(θ)` with `θ ≡ 0 (mod 2π)` is dropped;
//! - identical CNOT pairs cancel when no gate touches either wire between them;
//! - `X·X` and `SX·SX·SX·SX` on one qubit cancel.
//!
//! No rule adds gates, so counts never grow.

use crate::circuit::{Circuit, Gate};

use super::lower::wrap_angle;

const ZERO_ANGLE: f64 = 1e-12;

pub fn simplify(c: &Circuit) -> Circuit {
    let mut gates: Vec<Gate> = c.gates().to_vec();
    loop {
        let mut changed = false;
        changed |= merge_rz(&mut gates);
        changed |= drop_zero_rz(&mut gates);
        changed |= cancel_cx(&mut gates);
        changed |= cancel_x_pairs(&mut gates);
        changed |= cancel_sx_quads(&mut gates);
        if !changed {
            break;
        }
    }
    Circuit::from_parts_unchecked(c.n_qubits(), gates)
}

/// Index of the nearest earlier gate on `q` that the gate at `i` cannot move
/// past, skipping gates for which `passes` holds.
fn previous_on(gates: &[Gate], i: usize, q: usize, passes: impl Fn(&Gate) -> bool) -> Option<usize> {
    (0..i).rev().find(|&j| gates[j].touches(q) && !passes(&gates[j]))
}

fn merge_rz(gates: &mut Vec<Gate>) -> bool {
    let mut changed = false;
    let mut i = 0;
    while i < gates.len() {
        if let Gate::Rz(q, a) = gates[i] {
            let prev = previous_on(gates, i, q, |g| matches!(g, Gate::CX { control, .. } if *control == q));
            if let Some(j) = prev {
                if let Gate::Rz(_, b) = gates[j] {
                    gates[j] = Gate::Rz(q, wrap_angle(a + b));
                    gates.remove(i);
                    changed = true;
                    continue;
                }
            }
        }
        i += 1;
    }
    changed
}

fn drop_zero_rz(gates: &mut Vec<Gate>) -> bool {
    let before = gates.len();
    gates.retain(|g| !matches!(g, Gate::Rz(_, t) if wrap_angle(*t).abs() < ZERO_ANGLE));
    gates.len() != before
}

fn cancel_cx(gates: &mut Vec<Gate>) -> bool {
    let mut changed = false;
    let mut i = 0;
    while i < gates.len() {
        if let Gate::CX { control, target } = gates[i] {
            let blocker = (0..i).rev().find(|&j| gates[j].touches(control) || gates[j].touches(target));
            if let Some(j) = blocker {
                if gates[j] == gates[i] {
                    gates.remove(i);
                    gates.remove(j);
                    changed = true;
                    i = j;
                    continue;
                }
            }
        }
        i += 1;
    }
    changed
}

fn cancel_x_pairs(gates: &mut Vec<Gate>) -> bool {
    let mut changed = false;
    let mut i = 0;
    while i < gates.len() {
        if let Gate::X(q) = gates[i] {
            if let Some(j) = previous_on(gates, i, q, |_| false) {
                if gates[j] == Gate::X(q) {
                    gates.remove(i);
                    gates.remove(j);
                    changed = true;
                    i = j;
                    continue;
                }
            }
        }
        i += 1;
    }
    changed
}

fn cancel_sx_quads(gates: &mut Vec<Gate>) -> bool {
    let mut changed = false;
    let mut i = 0;
    while i < gates.len() {
        if let Gate::SX(q) = gates[i] {
            let mut run = vec![i];
            let mut cur = i;
            while run.len() < 4 {
                match previous_on(gates, cur, q, |_| false) {
                    Some(j) if gates[j] == Gate::SX(q) => {
                        run.push(j);
                        cur = j;
                    }
                    _ => break,
                }
            }
            if run.len() == 4 {
                // `run` is descending, so removals do not shift later entries.
                for &j in &run {
                    gates.remove(j);
                }
                changed = true;
                i = *run.last().unwrap();
                continue;
            }
        }
        i += 1;
    }
    changed
}
