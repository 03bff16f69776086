use std::f64::consts::{FRAC_PI_2, PI};

use crate::circuit::{Circuit, Gate};
use crate::error::Result;

/// `θ` reduced to `(-π, π]`.
pub(crate) fn wrap_angle(theta: f64) -> f64 {
    let mut t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    }
    t
}

fn near(a: f64, b: f64) -> bool {
    wrap_angle(a - b).abs() < 1e-12
}

/// Rewrites a single gate into `{X, SX, Rz, CX, Measure}`, equal up to global phase.
pub fn lower_gate(g: &Gate) -> Vec<Gate> {
    match *g {
        Gate::X(_) | Gate::SX(_) | Gate::Rz(..) | Gate::CX { .. } | Gate::Measure { .. } => vec![*g],
        Gate::SXdg(q) => vec![Gate::Rz(q, PI), Gate::SX(q), Gate::Rz(q, PI)],
        Gate::H(q) => vec![Gate::Rz(q, FRAC_PI_2), Gate::SX(q), Gate::Rz(q, FRAC_PI_2)],
        Gate::S(q) => vec![Gate::Rz(q, FRAC_PI_2)],
        Gate::Sdg(q) => vec![Gate::Rz(q, -FRAC_PI_2)],
        Gate::U1(q, l) => vec![Gate::Rz(q, l)],
        Gate::Rx(_, t) if near(t, 0.0) => vec![],
        Gate::Rx(q, t) if near(t, FRAC_PI_2) => vec![Gate::SX(q)],
        Gate::Rx(q, t) if near(t, -FRAC_PI_2) => vec![Gate::Rz(q, PI), Gate::SX(q), Gate::Rz(q, PI)],
        Gate::Rx(q, t) if near(t, PI) => vec![Gate::X(q)],
        Gate::Rx(q, t) => vec![
            Gate::Rz(q, FRAC_PI_2),
            Gate::SX(q),
            Gate::Rz(q, wrap_angle(t + PI)),
            Gate::SX(q),
            Gate::Rz(q, FRAC_PI_2),
        ],
    }
}

/// Lowers every gate to the device basis `{X, SX, Rz, CX}` (measurements kept).
pub fn lower_to_basis(c: &Circuit) -> Result<Circuit> {
    let mut out = Circuit::new(c.n_qubits())?;
    for g in c.gates() {
        for lowered in lower_gate(g) {
            out.push(lowered)?;
        }
    }
    Ok(out)
}

pub fn is_basis_gate(g: &Gate) -> bool {
    matches!(
        g,
        Gate::X(_) | Gate::SX(_) | Gate::Rz(..) | Gate::CX { .. } | Gate::Measure { .. }
    )
}
