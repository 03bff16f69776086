use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};

use super::topology::{Layout, Topology};

/// Output of [`route`].
#[derive(Debug, Clone, PartialEq)]
pub struct RoutedCircuit {
    /// Circuit on `topology.n` physical qubits.
    pub circuit: Circuit,
    /// Placement of every virtual qubit before the first gate. Entries
    /// `0..n_logical` are the logical qubits, the rest are idle ancillas.
    pub initial: Vec<usize>,
    /// Placement after the last gate; differs from `initial` when SWAPs moved qubits.
    pub final_placement: Vec<usize>,
    pub swaps: usize,
}

impl RoutedCircuit {
    /// Logical-to-physical map at the end of the circuit.
    pub fn final_layout(&self, n_logical: usize) -> Layout {
        Layout::new(self.final_placement[..n_logical].to_vec()).expect("permutation is injective")
    }
}

/// Places `c` on `topo` under `layout` and makes every CNOT act on an edge.
///
/// A CNOT between non-adjacent qubits moves its control along a breadth-first
/// shortest path with SWAPs (three CNOTs each) until it neighbours the target.
/// No swap-back is inserted: measurements read the qubit's final position,
/// so classical bits keep their logical meaning.
pub fn route(c: &Circuit, topo: &Topology, layout: &Layout) -> Result<RoutedCircuit> {
    let n_logical = c.n_qubits();
    if layout.len() != n_logical {
        return Err(Error::arg(format!(
            "layout covers {} qubits, circuit has {n_logical}",
            layout.len()
        )));
    }
    if let Some(&p) = layout.as_slice().iter().find(|&&p| p >= topo.n) {
        return Err(Error::arg(format!("layout uses physical qubit {p} outside the topology")));
    }

    // Full permutation: virtual qubit -> physical qubit, and its inverse.
    let mut placement = layout.as_slice().to_vec();
    placement.extend((0..topo.n).filter(|p| !layout.as_slice().contains(p)));
    let initial = placement.clone();
    let mut occupant = vec![0usize; topo.n];
    for (v, &p) in placement.iter().enumerate() {
        occupant[p] = v;
    }

    let mut out = Circuit::new(topo.n)?;
    let mut swaps = 0;
    for g in c.gates() {
        if let Gate::CX { control, target } = *g {
            let (pc, pt) = (placement[control], placement[target]);
            if !topo.adjacent(pc, pt) {
                let path = topo.shortest_path(pc, pt).ok_or_else(|| {
                    Error::Routing(format!("physical qubits {pc} and {pt} are not connected"))
                })?;
                for w in path.windows(2).take(path.len().saturating_sub(2)) {
                    let (a, b) = (w[0], w[1]);
                    out.push(Gate::cx(a, b))?;
                    out.push(Gate::cx(b, a))?;
                    out.push(Gate::cx(a, b))?;
                    let (va, vb) = (occupant[a], occupant[b]);
                    occupant.swap(a, b);
                    placement[va] = b;
                    placement[vb] = a;
                    swaps += 1;
                }
            }
        }
        out.push(g.remap(|q| placement[q]))?;
    }
    Ok(RoutedCircuit {
        circuit: out,
        initial,
        final_placement: placement,
        swaps,
    })
}
