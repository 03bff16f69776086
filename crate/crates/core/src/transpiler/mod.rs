//! Lowering to the device basis `{X, SX, Rz, CX}`, connectivity routing and
//! peephole simplification.

mod lower;
mod route;
mod simplify;
mod topology;

pub use lower::{is_basis_gate, lower_gate, lower_to_basis};
pub use route::{route, RoutedCircuit};
pub use simplify::simplify;
pub use topology::{Layout, Topology};

use crate::circuit::Circuit;
use crate::error::Result;

/// Lower, route, then simplify.
pub fn transpile(c: &Circuit, topo: &Topology, layout: &Layout) -> Result<RoutedCircuit> {
    let lowered = lower_to_basis(c)?;
    let mut routed = route(&lowered, topo, layout)?;
    routed.circuit = simplify(&routed.circuit);
    Ok(routed)
}
