//! Physical circuit transpilation: basis decomposition and greedy SWAP
//! routing onto a coupling map.

use std::collections::{BTreeSet, VecDeque};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use crate::circuit::{expand_mcx, GateInstance, GateKind, GateTag, LogicalCircuit};
use crate::error::{Error, Result};

/// Undirected connectivity graph of physical qubits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CouplingMap {
    num_physical: usize,
    edges: BTreeSet<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
}

impl CouplingMap {
    pub fn new(
        num_physical: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        if num_physical == 0 {
            return Err(Error::InvalidArgument("coupling map needs a qubit".into()));
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::InvalidArgument(format!("self-loop on qubit {a}")));
            }
            if a.max(b) >= num_physical {
                return Err(Error::IndexOutOfRange {
                    qubit: a.max(b),
                    num_qubits: num_physical,
                });
            }
            set.insert((a.min(b), a.max(b)));
        }
        let mut neighbors = vec![Vec::new(); num_physical];
        for &(a, b) in &set {
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
        for n in &mut neighbors {
            n.sort_unstable();
        }
        let map = Self {
            num_physical,
            edges: set,
            neighbors,
        };
        if (1..num_physical).any(|q| map.shortest_path(0, q).is_none()) {
            return Err(Error::InvalidArgument(
                "coupling map is not connected".into(),
            ));
        }
        Ok(map)
    }

    /// Chain `0 - 1 - ... - (n-1)`.
    pub fn linear(n: usize) -> Result<Self> {
        Self::new(n, (1..n).map(|i| (i - 1, i)))
    }

    /// Complete graph; routing never inserts SWAPs.
    pub fn all_to_all(n: usize) -> Result<Self> {
        Self::new(n, (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))))
    }

    pub fn num_physical(&self) -> usize {
        self.num_physical
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn are_adjacent(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    /// Breadth-first shortest path, exploring neighbors in ascending index
    /// order so ties resolve toward lower physical indices.
    pub fn shortest_path(&self, from: usize, to: usize) -> Option<Vec<usize>> {
        let mut prev = vec![usize::MAX; self.num_physical];
        let mut seen = vec![false; self.num_physical];
        let mut queue = VecDeque::from([from]);
        seen[from] = true;
        while let Some(v) = queue.pop_front() {
            if v == to {
                let mut path = vec![to];
                let mut cur = to;
                while cur != from {
                    cur = prev[cur];
                    path.push(cur);
                }
                path.reverse();
                return Some(path);
            }
            for &w in &self.neighbors[v] {
                if !seen[w] {
                    seen[w] = true;
                    prev[w] = v;
                    queue.push_back(w);
                }
            }
        }
        None
    }
}

/// Basis-gate circuit on physical qubits with its layouts. `layout[l]` is
/// the physical position of logical qubit `l`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalCircuit {
    coupling: CouplingMap,
    circuit: LogicalCircuit,
    initial_layout: Vec<usize>,
    final_layout: Vec<usize>,
    swap_count: usize,
}

impl PhysicalCircuit {
    pub fn coupling(&self) -> &CouplingMap {
        &self.coupling
    }

    /// The gate list, indexed by physical qubit.
    pub fn circuit(&self) -> &LogicalCircuit {
        &self.circuit
    }

    pub fn gates(&self) -> &[GateInstance] {
        self.circuit.gates()
    }

    pub fn initial_layout(&self) -> &[usize] {
        &self.initial_layout
    }

    pub fn final_layout(&self) -> &[usize] {
        &self.final_layout
    }

    pub fn swap_count(&self) -> usize {
        self.swap_count
    }

    pub fn depth(&self) -> usize {
        self.circuit.depth()
    }

    pub fn cx_count(&self) -> usize {
        self.circuit.count(GateTag::Cx)
    }

    pub fn single_qubit_count(&self) -> usize {
        self.circuit
            .gates()
            .iter()
            .filter(|g| g.qubits.len() == 1 && g.kind != GateKind::Measure)
            .count()
    }
}

pub fn is_basis_gate(kind: &GateKind) -> bool {
    matches!(
        kind,
        GateKind::Rx(_)
            | GateKind::Ry(_)
            | GateKind::Rz(_)
            | GateKind::Sx
            | GateKind::X
            | GateKind::Cx
            | GateKind::Measure
    )
}

fn push_h(out: &mut LogicalCircuit, q: usize) -> Result<()> {
    out.push(GateInstance::rz(q, FRAC_PI_2))?;
    out.push(GateInstance::sx(q))?;
    out.push(GateInstance::rz(q, FRAC_PI_2))
}

/// Rewrites a bound circuit over `{RX, RY, RZ, SX, X, CX}`, preserving the
/// unitary up to global phase.
pub fn decompose_to_basis(circuit: &LogicalCircuit) -> Result<LogicalCircuit> {
    let mut out = LogicalCircuit::new(circuit.num_qubits())?;
    for g in circuit.gates() {
        if let Some(p) = g.param() {
            return Err(Error::UnboundParameter(p.to_string()));
        }
        let q = &g.qubits;
        match &g.kind {
            k if is_basis_gate(k) => out.push(g.clone())?,
            GateKind::Y => {
                out.push(GateInstance::rz(q[0], PI))?;
                out.push(GateInstance::x(q[0]))?;
            }
            GateKind::Z => out.push(GateInstance::rz(q[0], PI))?,
            GateKind::H => push_h(&mut out, q[0])?,
            GateKind::Cz => {
                push_h(&mut out, q[1])?;
                out.push(GateInstance::cx(q[0], q[1]))?;
                push_h(&mut out, q[1])?;
            }
            GateKind::Swap => {
                out.push(GateInstance::cx(q[0], q[1]))?;
                out.push(GateInstance::cx(q[1], q[0]))?;
                out.push(GateInstance::cx(q[0], q[1]))?;
            }
            GateKind::Ccx => {
                let (a, b, t) = (q[0], q[1], q[2]);
                let t_gate = |q| GateInstance::rz(q, FRAC_PI_4);
                let tdg = |q| GateInstance::rz(q, -FRAC_PI_4);
                push_h(&mut out, t)?;
                for gate in [
                    GateInstance::cx(b, t),
                    tdg(t),
                    GateInstance::cx(a, t),
                    t_gate(t),
                    GateInstance::cx(b, t),
                    tdg(t),
                    GateInstance::cx(a, t),
                    t_gate(b),
                    t_gate(t),
                ] {
                    out.push(gate)?;
                }
                push_h(&mut out, t)?;
                for gate in [
                    GateInstance::cx(a, b),
                    t_gate(a),
                    tdg(b),
                    GateInstance::cx(a, b),
                ] {
                    out.push(gate)?;
                }
            }
            GateKind::Mcx(_) => return Err(Error::UnexpandedMcx),
            _ => unreachable!("basis kinds handled above"),
        }
    }
    Ok(out)
}

/// Greedy router: before each two-qubit gate on non-adjacent qubits, SWAPs
/// (emitted as three CX) walk the first operand along a shortest path until
/// it neighbors the second. No lookahead.
pub fn route(
    circuit: &LogicalCircuit,
    coupling: &CouplingMap,
    initial_layout: Option<&[usize]>,
) -> Result<PhysicalCircuit> {
    let n_log = circuit.num_qubits();
    let n_phys = coupling.num_physical();
    if n_log > n_phys {
        return Err(Error::NotEnoughPhysicalQubits {
            needed: n_log,
            available: n_phys,
        });
    }
    let mut layout: Vec<usize> = match initial_layout {
        Some(l) => {
            if l.len() != n_log {
                return Err(Error::LengthMismatch {
                    expected: n_log,
                    got: l.len(),
                });
            }
            let distinct: BTreeSet<_> = l.iter().collect();
            if distinct.len() != l.len() || l.iter().any(|&p| p >= n_phys) {
                return Err(Error::InvalidArgument(format!("invalid layout {l:?}")));
            }
            l.to_vec()
        }
        None => (0..n_log).collect(),
    };
    let initial = layout.clone();
    let mut occupant: Vec<Option<usize>> = vec![None; n_phys];
    for (l, &p) in layout.iter().enumerate() {
        occupant[p] = Some(l);
    }

    let mut out = LogicalCircuit::new(n_phys)?;
    let mut swaps = 0;
    for g in circuit.gates() {
        match g.qubits.len() {
            1 => out.push(GateInstance::new(g.kind.clone(), vec![layout[g.qubits[0]]]))?,
            2 => {
                let (a, b) = (g.qubits[0], g.qubits[1]);
                if !coupling.are_adjacent(layout[a], layout[b]) {
                    let path = coupling
                        .shortest_path(layout[a], layout[b])
                        .expect("coupling map is connected");
                    for w in path.windows(2).take(path.len() - 2) {
                        let (p, q) = (w[0], w[1]);
                        out.push(GateInstance::cx(p, q))?;
                        out.push(GateInstance::cx(q, p))?;
                        out.push(GateInstance::cx(p, q))?;
                        swaps += 1;
                        occupant.swap(p, q);
                        for pos in [p, q] {
                            if let Some(l) = occupant[pos] {
                                layout[l] = pos;
                            }
                        }
                    }
                }
                out.push(GateInstance::new(
                    g.kind.clone(),
                    vec![layout[a], layout[b]],
                ))?;
            }
            k => {
                return Err(Error::InvalidArgument(format!(
                    "routing expects basis gates, found a {k}-qubit {}",
                    g.tag()
                )))
            }
        }
    }
    Ok(PhysicalCircuit {
        coupling: coupling.clone(),
        circuit: out,
        initial_layout: initial,
        final_layout: layout,
        swap_count: swaps,
    })
}

/// Full pipeline: optional V-chain expansion of MCX gates, basis
/// decomposition, then routing with the trivial initial layout.
pub fn transpile(
    circuit: &LogicalCircuit,
    coupling: &CouplingMap,
    expand: bool,
) -> Result<PhysicalCircuit> {
    let expanded = if expand {
        expand_mcx(circuit)?.0
    } else {
        circuit.clone()
    };
    let basis = decompose_to_basis(&expanded)?;
    route(&basis, coupling, None)
}
