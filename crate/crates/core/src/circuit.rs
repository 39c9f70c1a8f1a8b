//! Hardware-agnostic circuit representation.
//!
//! Qubit 0 is the least significant bit of every basis-state label, so the
//! basis state `|q_{n-1} ... q_1 q_0>` has index `sum q_i 2^i`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Rotation angle: either bound to a value or a reference into the
/// circuit's parameter table.
#[derive(Debug, Clone, PartialEq)]
pub enum Angle {
    Value(f64),
    Param(String),
}

impl Angle {
    pub fn value(&self) -> Option<f64> {
        match self {
            Angle::Value(v) => Some(*v),
            Angle::Param(_) => None,
        }
    }
}

impl From<f64> for Angle {
    fn from(v: f64) -> Self {
        Angle::Value(v)
    }
}

impl From<&str> for Angle {
    fn from(name: &str) -> Self {
        Angle::Param(name.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GateKind {
    X,
    Y,
    Z,
    H,
    Sx,
    Rx(Angle),
    Ry(Angle),
    Rz(Angle),
    Cx,
    Cz,
    Swap,
    Ccx,
    /// Multi-controlled X with the given number of controls (at least 2).
    Mcx(usize),
    Measure,
}

/// Payload-free gate label, used for histograms and the text format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GateTag {
    X,
    Y,
    Z,
    H,
    Sx,
    Rx,
    Ry,
    Rz,
    Cx,
    Cz,
    Swap,
    Ccx,
    Mcx,
    Measure,
}

impl GateTag {
    pub fn name(self) -> &'static str {
        match self {
            GateTag::X => "X",
            GateTag::Y => "Y",
            GateTag::Z => "Z",
            GateTag::H => "H",
            GateTag::Sx => "SX",
            GateTag::Rx => "RX",
            GateTag::Ry => "RY",
            GateTag::Rz => "RZ",
            GateTag::Cx => "CX",
            GateTag::Cz => "CZ",
            GateTag::Swap => "SWAP",
            GateTag::Ccx => "CCX",
            GateTag::Mcx => "MCX",
            GateTag::Measure => "MEASURE",
        }
    }
}

impl fmt::Display for GateTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GateTag {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.to_ascii_uppercase().as_str() {
            "X" => GateTag::X,
            "Y" => GateTag::Y,
            "Z" => GateTag::Z,
            "H" => GateTag::H,
            "SX" => GateTag::Sx,
            "RX" => GateTag::Rx,
            "RY" => GateTag::Ry,
            "RZ" => GateTag::Rz,
            "CX" => GateTag::Cx,
            "CZ" => GateTag::Cz,
            "SWAP" => GateTag::Swap,
            "CCX" => GateTag::Ccx,
            "MCX" => GateTag::Mcx,
            "MEASURE" => GateTag::Measure,
            other => return Err(format!("unknown gate `{other}`")),
        })
    }
}

impl GateKind {
    pub fn tag(&self) -> GateTag {
        match self {
            GateKind::X => GateTag::X,
            GateKind::Y => GateTag::Y,
            GateKind::Z => GateTag::Z,
            GateKind::H => GateTag::H,
            GateKind::Sx => GateTag::Sx,
            GateKind::Rx(_) => GateTag::Rx,
            GateKind::Ry(_) => GateTag::Ry,
            GateKind::Rz(_) => GateTag::Rz,
            GateKind::Cx => GateTag::Cx,
            GateKind::Cz => GateTag::Cz,
            GateKind::Swap => GateTag::Swap,
            GateKind::Ccx => GateTag::Ccx,
            GateKind::Mcx(_) => GateTag::Mcx,
            GateKind::Measure => GateTag::Measure,
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            GateKind::Cx | GateKind::Cz | GateKind::Swap => 2,
            GateKind::Ccx => 3,
            GateKind::Mcx(k) => k + 1,
            _ => 1,
        }
    }

    pub fn angle(&self) -> Option<&Angle> {
        match self {
            GateKind::Rx(a) | GateKind::Ry(a) | GateKind::Rz(a) => Some(a),
            _ => None,
        }
    }

    fn angle_mut(&mut self) -> Option<&mut Angle> {
        match self {
            GateKind::Rx(a) | GateKind::Ry(a) | GateKind::Rz(a) => Some(a),
            _ => None,
        }
    }
}

/// A gate applied to concrete qubits. For controlled gates the controls come
/// first and the target last.
#[derive(Debug, Clone, PartialEq)]
pub struct GateInstance {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
}

impl GateInstance {
    pub fn new(kind: GateKind, qubits: Vec<usize>) -> Self {
        Self { kind, qubits }
    }

    pub fn x(q: usize) -> Self {
        Self::new(GateKind::X, vec![q])
    }
    pub fn y(q: usize) -> Self {
        Self::new(GateKind::Y, vec![q])
    }
    pub fn z(q: usize) -> Self {
        Self::new(GateKind::Z, vec![q])
    }
    pub fn h(q: usize) -> Self {
        Self::new(GateKind::H, vec![q])
    }
    pub fn sx(q: usize) -> Self {
        Self::new(GateKind::Sx, vec![q])
    }
    pub fn rx(q: usize, angle: impl Into<Angle>) -> Self {
        Self::new(GateKind::Rx(angle.into()), vec![q])
    }
    pub fn ry(q: usize, angle: impl Into<Angle>) -> Self {
        Self::new(GateKind::Ry(angle.into()), vec![q])
    }
    pub fn rz(q: usize, angle: impl Into<Angle>) -> Self {
        Self::new(GateKind::Rz(angle.into()), vec![q])
    }
    pub fn cx(control: usize, target: usize) -> Self {
        Self::new(GateKind::Cx, vec![control, target])
    }
    pub fn cz(a: usize, b: usize) -> Self {
        Self::new(GateKind::Cz, vec![a, b])
    }
    pub fn swap(a: usize, b: usize) -> Self {
        Self::new(GateKind::Swap, vec![a, b])
    }
    pub fn ccx(c0: usize, c1: usize, target: usize) -> Self {
        Self::new(GateKind::Ccx, vec![c0, c1, target])
    }
    pub fn mcx(controls: &[usize], target: usize) -> Self {
        let mut qubits = controls.to_vec();
        qubits.push(target);
        Self::new(GateKind::Mcx(controls.len()), qubits)
    }
    pub fn measure(q: usize) -> Self {
        Self::new(GateKind::Measure, vec![q])
    }

    /// Controlled X with any number of controls, lowered to the narrowest
    /// gate kind: X, CX, CCX or MCX.
    pub fn controlled_x(controls: &[usize], target: usize) -> Self {
        match controls {
            [] => Self::x(target),
            [c] => Self::cx(*c, target),
            [a, b] => Self::ccx(*a, *b, target),
            _ => Self::mcx(controls, target),
        }
    }

    pub fn tag(&self) -> GateTag {
        self.kind.tag()
    }

    pub fn param(&self) -> Option<&str> {
        match self.kind.angle() {
            Some(Angle::Param(name)) => Some(name),
            _ => None,
        }
    }

    fn validate(&self, num_qubits: usize) -> Result<()> {
        if let GateKind::Mcx(k) = self.kind {
            if k < 2 {
                return Err(Error::ArityMismatch {
                    gate: "MCX".into(),
                    expected: 3,
                    got: k + 1,
                });
            }
        }
        let expected = self.kind.arity();
        if self.qubits.len() != expected {
            return Err(Error::ArityMismatch {
                gate: self.tag().name().into(),
                expected,
                got: self.qubits.len(),
            });
        }
        for (i, &q) in self.qubits.iter().enumerate() {
            if q >= num_qubits {
                return Err(Error::IndexOutOfRange {
                    qubit: q,
                    num_qubits,
                });
            }
            if self.qubits[..i].contains(&q) {
                return Err(Error::DuplicateQubit(q));
            }
        }
        Ok(())
    }
}

impl fmt::Display for GateInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ", self.tag())?;
        for (i, q) in self.qubits.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{q}")?;
        }
        match self.kind.angle() {
            Some(Angle::Value(v)) => write!(f, " {v:?}"),
            Some(Angle::Param(p)) => write!(f, " @{p}"),
            None => Ok(()),
        }
    }
}

/// Ordered gate list on an abstract register, with a positional parameter
/// table. Carries no backend information.
#[derive(Debug, Clone, PartialEq)]
pub struct LogicalCircuit {
    num_qubits: usize,
    gates: Vec<GateInstance>,
    params: Vec<String>,
}

impl LogicalCircuit {
    pub fn new(num_qubits: usize) -> Result<Self> {
        if num_qubits == 0 {
            return Err(Error::InvalidArgument(
                "circuit needs at least one qubit".into(),
            ));
        }
        Ok(Self {
            num_qubits,
            gates: Vec::new(),
            params: Vec::new(),
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[GateInstance] {
        &self.gates
    }

    pub fn parameters(&self) -> &[String] {
        &self.params
    }

    pub fn num_parameters(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    /// True when no gate references a parameter and the table is empty.
    pub fn is_bound(&self) -> bool {
        self.params.is_empty() && self.gates.iter().all(|g| g.param().is_none())
    }

    /// Returns a new circuit with `gate` appended; `self` is left untouched.
    pub fn append(&self, gate: GateInstance) -> Result<Self> {
        let mut next = self.clone();
        next.push(gate)?;
        Ok(next)
    }

    pub fn push(&mut self, gate: GateInstance) -> Result<()> {
        gate.validate(self.num_qubits)?;
        let measured = self.gates.iter().any(|g| g.kind == GateKind::Measure);
        if measured {
            if gate.kind != GateKind::Measure {
                return Err(Error::MidCircuitMeasurement(gate.tag().name().into()));
            }
            let q = gate.qubits[0];
            if self
                .gates
                .iter()
                .any(|g| g.kind == GateKind::Measure && g.qubits[0] == q)
            {
                return Err(Error::MidCircuitMeasurement("MEASURE".into()));
            }
        }
        if let Some(name) = gate.param() {
            self.declare_parameter(name);
        }
        self.gates.push(gate);
        Ok(())
    }

    /// Adds `name` to the parameter table if absent. A declared parameter
    /// need not be referenced by any gate.
    pub fn declare_parameter(&mut self, name: &str) {
        if !self.params.iter().any(|p| p == name) {
            self.params.push(name.to_string());
        }
    }

    /// Appends a terminal measurement on every qubit.
    pub fn measure_all(&mut self) -> Result<()> {
        for q in 0..self.num_qubits {
            self.push(GateInstance::measure(q))?;
        }
        Ok(())
    }

    /// Appends every gate of `other`, whose register must fit in this one.
    pub fn extend_from(&mut self, other: &LogicalCircuit) -> Result<()> {
        if other.num_qubits > self.num_qubits {
            return Err(Error::TooManyQubits {
                n: other.num_qubits,
                max: self.num_qubits,
            });
        }
        for p in &other.params {
            self.declare_parameter(p);
        }
        for g in &other.gates {
            self.push(g.clone())?;
        }
        Ok(())
    }

    /// Sequential composition: `self` followed by `other`.
    pub fn compose(&self, other: &LogicalCircuit) -> Result<Self> {
        let mut out = self.clone();
        if other.num_qubits > out.num_qubits {
            out.num_qubits = other.num_qubits;
        }
        out.extend_from(other)?;
        Ok(out)
    }

    /// Same gates on a register widened to `num_qubits`.
    pub fn widened(&self, num_qubits: usize) -> Result<Self> {
        if num_qubits < self.num_qubits {
            return Err(Error::InvalidArgument(format!(
                "cannot narrow a {}-qubit circuit to {num_qubits}",
                self.num_qubits
            )));
        }
        let mut out = self.clone();
        out.num_qubits = num_qubits;
        Ok(out)
    }

    /// Relabels qubit `q` as `mapping[q]` on a register of `num_qubits`.
    pub fn remapped(&self, mapping: &[usize], num_qubits: usize) -> Result<Self> {
        if mapping.len() < self.num_qubits {
            return Err(Error::LengthMismatch {
                expected: self.num_qubits,
                got: mapping.len(),
            });
        }
        let mut out = LogicalCircuit::new(num_qubits)?;
        for p in &self.params {
            out.declare_parameter(p);
        }
        for g in &self.gates {
            let qubits = g.qubits.iter().map(|&q| mapping[q]).collect();
            out.push(GateInstance::new(g.kind.clone(), qubits))?;
        }
        Ok(out)
    }

    /// Replaces parameter references by `theta[i]`, where `i` is the
    /// reference's position in the parameter table.
    pub fn bind_parameters(&self, theta: &[f64]) -> Result<Self> {
        if theta.len() != self.params.len() {
            return Err(Error::LengthMismatch {
                expected: self.params.len(),
                got: theta.len(),
            });
        }
        let mut gates = self.gates.clone();
        for g in &mut gates {
            if let Some(angle) = g.kind.angle_mut() {
                if let Angle::Param(name) = angle {
                    let pos = self
                        .params
                        .iter()
                        .position(|p| p == name)
                        .ok_or_else(|| Error::UnboundParameter(name.clone()))?;
                    *angle = Angle::Value(theta[pos]);
                }
            }
        }
        Ok(Self {
            num_qubits: self.num_qubits,
            gates,
            params: Vec::new(),
        })
    }

    /// Longest chain in the gate dependency DAG (gates sharing a qubit are
    /// ordered), computed by as-soon-as-possible layering.
    pub fn depth(&self) -> usize {
        let mut level = vec![0usize; self.num_qubits];
        let mut depth = 0;
        for g in &self.gates {
            let next = g.qubits.iter().map(|&q| level[q]).max().unwrap_or(0) + 1;
            for &q in &g.qubits {
                level[q] = next;
            }
            depth = depth.max(next);
        }
        depth
    }

    pub fn gate_counts(&self) -> BTreeMap<GateTag, usize> {
        let mut counts = BTreeMap::new();
        for g in &self.gates {
            *counts.entry(g.tag()).or_insert(0) += 1;
        }
        counts
    }

    pub fn count(&self, tag: GateTag) -> usize {
        self.gates.iter().filter(|g| g.tag() == tag).count()
    }

    /// Number of gates acting on two or more qubits.
    pub fn multi_qubit_count(&self) -> usize {
        self.gates.iter().filter(|g| g.qubits.len() >= 2).count()
    }
}

impl fmt::Display for LogicalCircuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "qubits {}", self.num_qubits)?;
        for g in &self.gates {
            writeln!(f, "{g}")?;
        }
        Ok(())
    }
}

impl FromStr for LogicalCircuit {
    type Err = Error;

    /// Parses the line format written by `Display`: a `qubits N` header and
    /// one `KIND q0[,q1,...] [angle|@param]` line per gate.
    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let parse_err = |line: usize, msg: String| Error::Parse { line, msg };

        let (hline, header) = lines
            .next()
            .ok_or_else(|| parse_err(1, "missing `qubits N` header".into()))?;
        let n = header
            .strip_prefix("qubits")
            .and_then(|rest| rest.trim().parse::<usize>().ok())
            .ok_or_else(|| parse_err(hline, format!("bad header `{header}`")))?;
        let mut circuit = LogicalCircuit::new(n).map_err(|e| parse_err(hline, e.to_string()))?;

        for (line, text) in lines {
            let mut fields = text.split_whitespace();
            let tag: GateTag = fields
                .next()
                .unwrap_or_default()
                .parse()
                .map_err(|e| parse_err(line, e))?;
            let qubits = fields
                .next()
                .ok_or_else(|| parse_err(line, "missing qubit list".into()))?
                .split(',')
                .map(|q| q.parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| parse_err(line, e.to_string()))?;
            let angle = match fields.next() {
                Some(a) => Some(match a.strip_prefix('@') {
                    Some(name) => Angle::Param(name.to_string()),
                    None => Angle::Value(
                        a.parse::<f64>()
                            .map_err(|e| parse_err(line, e.to_string()))?,
                    ),
                }),
                None => None,
            };
            if fields.next().is_some() {
                return Err(parse_err(line, "trailing fields".into()));
            }
            let needs_angle = matches!(tag, GateTag::Rx | GateTag::Ry | GateTag::Rz);
            if needs_angle != angle.is_some() {
                return Err(parse_err(line, format!("angle mismatch for {tag}")));
            }
            let kind = match tag {
                GateTag::X => GateKind::X,
                GateTag::Y => GateKind::Y,
                GateTag::Z => GateKind::Z,
                GateTag::H => GateKind::H,
                GateTag::Sx => GateKind::Sx,
                GateTag::Rx => GateKind::Rx(angle.unwrap()),
                GateTag::Ry => GateKind::Ry(angle.unwrap()),
                GateTag::Rz => GateKind::Rz(angle.unwrap()),
                GateTag::Cx => GateKind::Cx,
                GateTag::Cz => GateKind::Cz,
                GateTag::Swap => GateKind::Swap,
                GateTag::Ccx => GateKind::Ccx,
                GateTag::Mcx => GateKind::Mcx(qubits.len().saturating_sub(1)),
                GateTag::Measure => GateKind::Measure,
            };
            circuit
                .push(GateInstance::new(kind, qubits))
                .map_err(|e| parse_err(line, e.to_string()))?;
        }
        Ok(circuit)
    }
}

/// Multi-controlled X built from a Toffoli chain onto clean ancillae.
///
/// For `k >= 3` controls the fragment computes the conjunction of the
/// controls into `ancillae[k-2]` with `k-1` CCX gates, applies one CX onto
/// the target and uncomputes, for `2(k-1)` CCX + 1 CX in total. Ancillae must
/// start in `|0>` and are returned to `|0>`. For `k = 2` a plain CCX is
/// emitted and the ancillae are ignored.
pub fn mcx_vchain(controls: &[usize], target: usize, ancillae: &[usize]) -> Result<LogicalCircuit> {
    let k = controls.len();
    if k < 2 {
        return Err(Error::InvalidArgument(format!(
            "V-chain needs at least 2 controls, got {k}"
        )));
    }
    let used: &[usize] = if k == 2 {
        &[]
    } else if ancillae.len() < k - 1 {
        return Err(Error::InsufficientAncilla {
            controls: k,
            needed: k - 1,
            got: ancillae.len(),
        });
    } else {
        &ancillae[..k - 1]
    };

    let mut all: Vec<usize> = controls.to_vec();
    all.push(target);
    all.extend_from_slice(used);
    for (i, q) in all.iter().enumerate() {
        if all[..i].contains(q) {
            return Err(Error::IndexCollision(*q));
        }
    }
    let width = all.iter().max().copied().unwrap_or(0) + 1;
    let mut circuit = LogicalCircuit::new(width)?;
    if k == 2 {
        circuit.push(GateInstance::ccx(controls[0], controls[1], target))?;
        return Ok(circuit);
    }

    let mut compute = vec![GateInstance::ccx(controls[0], controls[1], used[0])];
    for i in 2..k {
        compute.push(GateInstance::ccx(controls[i], used[i - 2], used[i - 1]));
    }
    for g in &compute {
        circuit.push(g.clone())?;
    }
    circuit.push(GateInstance::cx(used[k - 2], target))?;
    for g in compute.iter().rev() {
        circuit.push(g.clone())?;
    }
    Ok(circuit)
}

/// Replaces every MCX gate by its V-chain expansion. Ancillae are appended
/// above the existing register; returns the expanded circuit and the number
/// of ancillae added.
pub fn expand_mcx(circuit: &LogicalCircuit) -> Result<(LogicalCircuit, usize)> {
    let max_k = circuit
        .gates()
        .iter()
        .filter_map(|g| match g.kind {
            GateKind::Mcx(k) if k >= 3 => Some(k),
            _ => None,
        })
        .max();
    let Some(max_k) = max_k else {
        return Ok((circuit.clone(), 0));
    };
    let n = circuit.num_qubits();
    let extra = max_k - 1;
    let ancillae: Vec<usize> = (n..n + extra).collect();
    let mut out = LogicalCircuit::new(n + extra)?;
    for p in circuit.parameters() {
        out.declare_parameter(p);
    }
    for g in circuit.gates() {
        match g.kind {
            GateKind::Mcx(k) => {
                let (controls, target) = g.qubits.split_at(k);
                let frag = mcx_vchain(controls, target[0], &ancillae)?;
                out.extend_from(&frag)?;
            }
            _ => out.push(g.clone())?,
        }
    }
    Ok((out, extra))
}
