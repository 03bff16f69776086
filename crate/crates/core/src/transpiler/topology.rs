//! Device connectivity graphs and logical-to-physical layouts.

use std::collections::VecDeque;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Undirected coupling graph over `n` physical qubits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topology {
    #[serde(default)]
    pub name: String,
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
}

impl Topology {
    pub fn new(name: &str, n: usize, edges: Vec<[usize; 2]>) -> Result<Self> {
        let t = Topology {
            name: name.to_string(),
            n,
            edges,
        };
        t.validate()?;
        Ok(t)
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::arg("topology needs at least one qubit"));
        }
        for &[a, b] in &self.edges {
            if a >= self.n || b >= self.n {
                return Err(Error::arg(format!("edge {a}-{b} outside {} qubits", self.n)));
            }
            if a == b {
                return Err(Error::arg(format!("self-loop on qubit {a}")));
            }
        }
        Ok(())
    }

    /// Five qubits, T-shaped: `0-1, 1-2, 1-3, 3-4`.
    pub fn belem_like() -> Self {
        Topology::new("belem-like", 5, vec![[0, 1], [1, 2], [1, 3], [3, 4]]).expect("valid preset")
    }

    /// Seven qubits, H-shaped: `0-1, 1-2, 1-3, 3-5, 4-5, 5-6`.
    pub fn nairobi_like() -> Self {
        Topology::new(
            "nairobi-like",
            7,
            vec![[0, 1], [1, 2], [1, 3], [3, 5], [4, 5], [5, 6]],
        )
        .expect("valid preset")
    }

    /// Every pair coupled.
    pub fn fully_connected(n: usize) -> Self {
        let edges = (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| [a, b]))
            .collect();
        Topology::new(&format!("full-{n}"), n, edges).expect("valid")
    }

    pub fn line(n: usize) -> Self {
        let edges = (1..n).map(|b| [b - 1, b]).collect();
        Topology::new(&format!("line-{n}"), n, edges).expect("valid")
    }

    /// `belem-like`, `nairobi-like`, `full-N` or `line-N` (N ≥ 1).
    pub fn preset(name: &str) -> Option<Self> {
        let sized = |prefix: &str| {
            name.strip_prefix(prefix)
                .and_then(|n| n.parse::<usize>().ok())
                .filter(|&n| n >= 1)
        };
        match name {
            "belem-like" => Some(Self::belem_like()),
            "nairobi-like" => Some(Self::nairobi_like()),
            _ => sized("full-")
                .map(Self::fully_connected)
                .or_else(|| sized("line-").map(Self::line)),
        }
    }

    /// Parses `{"n": int, "edges": [[a, b], ...]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let t: Topology = serde_json::from_str(text)?;
        t.validate()?;
        Ok(t)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut t = Self::from_json(&std::fs::read_to_string(path)?)?;
        if t.name.is_empty() {
            t.name = path.display().to_string();
        }
        Ok(t)
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "n": self.n, "edges": self.edges }).to_string()
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.edges
            .iter()
            .any(|&[x, y]| (x, y) == (a, b) || (x, y) == (b, a))
    }

    pub fn neighbors(&self, q: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .filter_map(|&[x, y]| match q {
                _ if x == q => Some(y),
                _ if y == q => Some(x),
                _ => None,
            })
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn degree(&self, q: usize) -> usize {
        self.neighbors(q).len()
    }

    /// Breadth-first shortest path `from ..= to`, `None` when disconnected.
    pub fn shortest_path(&self, from: usize, to: usize) -> Option<Vec<usize>> {
        let mut prev = vec![usize::MAX; self.n];
        let mut queue = VecDeque::from([from]);
        prev[from] = from;
        while let Some(u) = queue.pop_front() {
            if u == to {
                let mut path = vec![to];
                let mut cur = to;
                while cur != from {
                    cur = prev[cur];
                    path.push(cur);
                }
                path.reverse();
                return Some(path);
            }
            for v in self.neighbors(u) {
                if prev[v] == usize::MAX {
                    prev[v] = u;
                    queue.push_back(v);
                }
            }
        }
        None
    }

    /// Physical qubits in breadth-first order from `start`, ties by index.
    fn bfs_order(&self, start: usize) -> Vec<usize> {
        let mut seen = vec![false; self.n];
        let mut order = Vec::with_capacity(self.n);
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for v in self.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        order
    }
}

/// Injective map from logical to physical qubits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    logical_to_physical: Vec<usize>,
}

impl Layout {
    pub fn new(logical_to_physical: Vec<usize>) -> Result<Self> {
        let mut seen = logical_to_physical.clone();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::arg("layout maps two logical qubits to one physical qubit"));
        }
        if logical_to_physical.is_empty() {
            return Err(Error::arg("layout must map at least one qubit"));
        }
        Ok(Layout { logical_to_physical })
    }

    pub fn trivial(n: usize) -> Self {
        Layout {
            logical_to_physical: (0..n).collect(),
        }
    }

    /// Logical 0 on the highest-degree physical qubit (lowest index on ties),
    /// the remaining logical qubits on its neighbourhood in breadth-first order.
    pub fn hub(topo: &Topology, n_logical: usize) -> Result<Self> {
        if n_logical > topo.n {
            return Err(Error::arg(format!(
                "{n_logical} logical qubits do not fit on {} physical qubits",
                topo.n
            )));
        }
        let hub = (0..topo.n)
            .max_by_key(|&q| (topo.degree(q), std::cmp::Reverse(q)))
            .expect("non-empty topology");
        let order = topo.bfs_order(hub);
        if order.len() < n_logical {
            return Err(Error::Routing("hub component too small for the circuit".into()));
        }
        Layout::new(order[..n_logical].to_vec())
    }

    pub fn len(&self) -> usize {
        self.logical_to_physical.len()
    }

    pub fn is_empty(&self) -> bool {
        self.logical_to_physical.is_empty()
    }

    pub fn physical(&self, logical: usize) -> usize {
        self.logical_to_physical[logical]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.logical_to_physical
    }
}
