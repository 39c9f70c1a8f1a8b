//! Ansatz and state-preparation factories.
//!
//! Every family uses RY rotations only, so prepared states stay real.

use std::fmt;
use std::str::FromStr;

use crate::circuit::{GateInstance, GateKind, LogicalCircuit};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AnsatzFamily {
    /// Hardware-efficient: RY layer then a CX chain.
    Hea,
    /// Linear staircase of RY⊗RY + CX blocks.
    Mps,
    /// MPS staircase entangled with CZ instead of CX.
    CustomMps,
    /// Binary tree of blocks; power-of-two registers only.
    Ttn,
    /// Tree on the largest power-of-two subset plus attachment blocks.
    TtnPlusPlus,
}

impl AnsatzFamily {
    pub const ALL: [AnsatzFamily; 5] = [
        AnsatzFamily::Hea,
        AnsatzFamily::Mps,
        AnsatzFamily::CustomMps,
        AnsatzFamily::Ttn,
        AnsatzFamily::TtnPlusPlus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AnsatzFamily::Hea => "hea",
            AnsatzFamily::Mps => "mps",
            AnsatzFamily::CustomMps => "custom-mps",
            AnsatzFamily::Ttn => "ttn",
            AnsatzFamily::TtnPlusPlus => "ttnpp",
        }
    }

    /// Number of parameters per layer on `n` qubits.
    pub fn params_per_layer(self, n: usize) -> usize {
        match self {
            AnsatzFamily::Hea => n,
            _ if n == 1 => 1,
            _ => 2 * (n - 1),
        }
    }
}

impl fmt::Display for AnsatzFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AnsatzFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AnsatzFamily::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown ansatz family `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AnsatzSpec {
    pub family: AnsatzFamily,
    pub num_qubits: usize,
    pub layers: usize,
}

impl AnsatzSpec {
    pub fn new(family: AnsatzFamily, num_qubits: usize, layers: usize) -> Result<Self> {
        if num_qubits == 0 || layers == 0 {
            return Err(Error::InvalidArgument(
                "ansatz needs at least one qubit and one layer".into(),
            ));
        }
        if family == AnsatzFamily::Ttn && !num_qubits.is_power_of_two() {
            return Err(Error::TtnRequiresPowerOfTwo(num_qubits));
        }
        Ok(Self {
            family,
            num_qubits,
            layers,
        })
    }

    pub fn num_parameters(&self) -> usize {
        self.family.params_per_layer(self.num_qubits) * self.layers
    }
}

#[derive(Clone, Copy)]
enum Entangler {
    Cx,
    Cz,
}

struct Builder {
    circuit: LogicalCircuit,
    next: usize,
}

impl Builder {
    fn ry(&mut self, q: usize) -> Result<()> {
        let name = format!("t{}", self.next);
        self.next += 1;
        self.circuit.push(GateInstance::ry(q, name.as_str()))
    }

    fn block(&mut self, a: usize, b: usize, ent: Entangler) -> Result<()> {
        self.ry(a)?;
        self.ry(b)?;
        self.circuit.push(match ent {
            Entangler::Cx => GateInstance::cx(a, b),
            Entangler::Cz => GateInstance::cz(a, b),
        })
    }
}

/// Tree blocks for a power-of-two register `0..m`, level by level from the
/// leaves. Each subtree is represented by its highest-index qubit.
fn tree_levels(m: usize) -> Vec<Vec<(usize, usize)>> {
    let mut levels = Vec::new();
    let mut size = 1;
    while size < m {
        let level = (0..m / (2 * size))
            .map(|i| {
                let start = i * 2 * size;
                (start + size - 1, start + 2 * size - 1)
            })
            .collect();
        levels.push(level);
        size *= 2;
    }
    levels
}

/// Two-qubit blocks of one layer, in emission order.
fn layer_blocks(family: AnsatzFamily, n: usize) -> Vec<(usize, usize)> {
    match family {
        AnsatzFamily::Hea => Vec::new(),
        AnsatzFamily::Mps | AnsatzFamily::CustomMps => {
            (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect()
        }
        AnsatzFamily::Ttn => tree_levels(n).into_iter().flatten().collect(),
        AnsatzFamily::TtnPlusPlus => {
            let m = 1usize << (usize::BITS - 1 - n.leading_zeros());
            let mut levels = tree_levels(m);
            let root = levels.pop();
            let mut blocks: Vec<(usize, usize)> = levels.into_iter().flatten().collect();
            // Leftover qubits attach to the closest tree qubit, m - 1,
            // before the root merge.
            blocks.extend((m..n).map(|q| (m - 1, q)));
            blocks.extend(root.into_iter().flatten());
            blocks
        }
    }
}

/// Parameterized circuit for `spec`. Parameters are named `t0, t1, ...` in
/// binding order.
pub fn build_ansatz(spec: &AnsatzSpec) -> Result<LogicalCircuit> {
    let spec = AnsatzSpec::new(spec.family, spec.num_qubits, spec.layers)?;
    let n = spec.num_qubits;
    let mut b = Builder {
        circuit: LogicalCircuit::new(n)?,
        next: 0,
    };
    let ent = match spec.family {
        AnsatzFamily::CustomMps => Entangler::Cz,
        _ => Entangler::Cx,
    };
    for _ in 0..spec.layers {
        if spec.family == AnsatzFamily::Hea {
            for q in 0..n {
                b.ry(q)?;
            }
            for q in 0..n.saturating_sub(1) {
                b.circuit.push(GateInstance::cx(q, q + 1))?;
            }
        } else if n == 1 {
            // A single site has no bond; one rotation keeps the family usable.
            b.ry(0)?;
        } else {
            for (a, c) in layer_blocks(spec.family, n) {
                b.block(a, c, ent)?;
            }
        }
    }
    debug_assert_eq!(b.circuit.num_parameters(), spec.num_parameters());
    Ok(b.circuit)
}

/// RY angles realizing the multiplexed rotation of one encoding level: for
/// each pattern `j` of the higher qubits, angle `alpha_j` splits the weight
/// between the two halves below.
fn level_angles(values: &[f64], level: usize, n: usize) -> Vec<f64> {
    // Qubit `level` is the target; higher qubits select the block.
    let block = 1usize << (level + 1);
    let half = block / 2;
    let leaf = level == 0;
    (0..(1usize << (n - level - 1)))
        .map(|j| {
            let chunk = &values[j * block..(j + 1) * block];
            if leaf {
                2.0 * chunk[1].atan2(chunk[0])
            } else {
                let lo = chunk[..half].iter().map(|v| v * v).sum::<f64>().sqrt();
                let hi = chunk[half..].iter().map(|v| v * v).sum::<f64>().sqrt();
                2.0 * hi.atan2(lo)
            }
        })
        .collect()
}

fn gray(i: usize) -> usize {
    i ^ (i >> 1)
}

/// Uniformly controlled RY on `target` with `controls` (bit `b` of the
/// pattern index is `controls[b]`), as alternating RY and CX gates.
fn uniformly_controlled_ry(
    circuit: &mut LogicalCircuit,
    alphas: &[f64],
    controls: &[usize],
    target: usize,
) -> Result<()> {
    let k = controls.len();
    let count = 1usize << k;
    debug_assert_eq!(alphas.len(), count);
    if alphas.iter().all(|a| a.abs() < 1e-15) {
        return Ok(());
    }
    if k == 0 {
        return circuit.push(GateInstance::ry(target, alphas[0]));
    }
    let scale = 1.0 / count as f64;
    for i in 0..count {
        let g = gray(i);
        let theta: f64 = alphas
            .iter()
            .enumerate()
            .map(|(j, a)| {
                if (j & g).count_ones() % 2 == 1 {
                    -a
                } else {
                    *a
                }
            })
            .sum::<f64>()
            * scale;
        if theta.abs() > 1e-15 {
            circuit.push(GateInstance::ry(target, theta))?;
        }
        let changed = (gray(i) ^ gray((i + 1) % count)).trailing_zeros() as usize;
        circuit.push(GateInstance::cx(controls[changed], target))?;
    }
    Ok(())
}

/// Prepares `f / ||f||` from `|0...0>` with real amplitudes. Norms are split
/// top-down, qubit `n-1` first, by uniformly controlled RY rotations; signs
/// are carried by the leaf-level angles.
pub fn amplitude_encode(f: &[f64], n: usize) -> Result<LogicalCircuit> {
    if n == 0 || f.len() != 1 << n {
        return Err(Error::LengthMismatch {
            expected: 1usize << n,
            got: f.len(),
        });
    }
    let norm = f.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::ZeroVector);
    }
    let values: Vec<f64> = f.iter().map(|v| v / norm).collect();
    let mut circuit = LogicalCircuit::new(n)?;
    for level in (0..n).rev() {
        let alphas = level_angles(&values, level, n);
        let controls: Vec<usize> = (level + 1..n).collect();
        uniformly_controlled_ry(&mut circuit, &alphas, &controls, level)?;
    }
    Ok(circuit)
}

/// Registered state-preparation schemes.
pub const STATE_PREPS: &[&str] = &["amplitude"];

pub fn state_prep_factory(name: &str, f: &[f64], n: usize) -> Result<LogicalCircuit> {
    match name {
        "amplitude" => amplitude_encode(f, n),
        other => Err(Error::InvalidArgument(format!(
            "unknown state preparation `{other}`"
        ))),
    }
}

/// Promotes every gate of a bound circuit to its version controlled on
/// `control`, which must lie outside the circuit's register. The result acts
/// on `max(num_qubits, control + 1)` qubits.
///
/// Supported kinds: X, Z, H, RX, RY, RZ, CX, CZ, SWAP, CCX, MCX.
pub fn controlled_version(circuit: &LogicalCircuit, control: usize) -> Result<LogicalCircuit> {
    if control < circuit.num_qubits() {
        return Err(Error::IndexCollision(control));
    }
    let mut out = LogicalCircuit::new(circuit.num_qubits().max(control + 1))?;
    for g in circuit.gates() {
        push_controlled(&mut out, g, control)?;
    }
    Ok(out)
}

fn push_controlled(out: &mut LogicalCircuit, g: &GateInstance, c: usize) -> Result<()> {
    let q = &g.qubits;
    let angle = || -> Result<f64> {
        g.kind
            .angle()
            .and_then(|a| a.value())
            .ok_or_else(|| Error::UnboundParameter(g.param().unwrap_or_default().to_string()))
    };
    match &g.kind {
        GateKind::X => out.push(GateInstance::cx(c, q[0])),
        GateKind::Cx => out.push(GateInstance::ccx(c, q[0], q[1])),
        GateKind::Ccx => out.push(GateInstance::mcx(&[c, q[0], q[1]], q[2])),
        GateKind::Mcx(k) => {
            let mut controls = vec![c];
            controls.extend_from_slice(&q[..*k]);
            out.push(GateInstance::mcx(&controls, q[*k]))
        }
        GateKind::Z => out.push(GateInstance::cz(c, q[0])),
        GateKind::Cz => {
            out.push(GateInstance::h(q[1]))?;
            out.push(GateInstance::ccx(c, q[0], q[1]))?;
            out.push(GateInstance::h(q[1]))
        }
        GateKind::Swap => {
            out.push(GateInstance::ccx(c, q[0], q[1]))?;
            out.push(GateInstance::ccx(c, q[1], q[0]))?;
            out.push(GateInstance::ccx(c, q[0], q[1]))
        }
        GateKind::Ry(_) | GateKind::Rz(_) => {
            // X R(a) X = R(-a) for rotations about Y and Z.
            let theta = angle()?;
            let make = |a: f64| match g.kind {
                GateKind::Ry(_) => GateInstance::ry(q[0], a),
                _ => GateInstance::rz(q[0], a),
            };
            out.push(make(theta / 2.0))?;
            out.push(GateInstance::cx(c, q[0]))?;
            out.push(make(-theta / 2.0))?;
            out.push(GateInstance::cx(c, q[0]))
        }
        GateKind::Rx(_) => {
            // Z RX(a) Z = RX(-a).
            let theta = angle()?;
            out.push(GateInstance::rx(q[0], theta / 2.0))?;
            out.push(GateInstance::cz(c, q[0]))?;
            out.push(GateInstance::rx(q[0], -theta / 2.0))?;
            out.push(GateInstance::cz(c, q[0]))
        }
        GateKind::H => {
            // H = X · RY(pi/2) exactly.
            push_controlled(out, &GateInstance::ry(q[0], std::f64::consts::FRAC_PI_2), c)?;
            out.push(GateInstance::cx(c, q[0]))
        }
        GateKind::Y | GateKind::Sx | GateKind::Measure => {
            Err(Error::UnsupportedGate(g.tag().name().to_string()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::GateTag;
    use crate::sim::{run_statevector, Statevector};

    #[test]
    fn hea_three_qubits() {
        let c = build_ansatz(&AnsatzSpec::new(AnsatzFamily::Hea, 3, 1).unwrap()).unwrap();
        assert_eq!(c.num_parameters(), 3);
        let tags: Vec<GateTag> = c.gates().iter().map(|g| g.tag()).collect();
        assert_eq!(
            tags,
            [
                GateTag::Ry,
                GateTag::Ry,
                GateTag::Ry,
                GateTag::Cx,
                GateTag::Cx
            ]
        );
        assert_eq!(c.gates()[3].qubits, [0, 1]);
        assert_eq!(c.gates()[4].qubits, [1, 2]);
    }

    #[test]
    fn ttn_requires_power_of_two() {
        assert_eq!(
            AnsatzSpec::new(AnsatzFamily::Ttn, 3, 1),
            Err(Error::TtnRequiresPowerOfTwo(3))
        );
        let forged = AnsatzSpec {
            family: AnsatzFamily::Ttn,
            num_qubits: 6,
            layers: 1,
        };
        assert_eq!(build_ansatz(&forged), Err(Error::TtnRequiresPowerOfTwo(6)));
    }

    #[test]
    fn ttn_four_qubit_blocks() {
        let c = build_ansatz(&AnsatzSpec::new(AnsatzFamily::Ttn, 4, 1).unwrap()).unwrap();
        assert_eq!(c.num_parameters(), 6);
        let pairs: Vec<Vec<usize>> = c
            .gates()
            .iter()
            .filter(|g| g.tag() == GateTag::Cx)
            .map(|g| g.qubits.clone())
            .collect();
        assert_eq!(pairs, [vec![0, 1], vec![2, 3], vec![1, 3]]);
    }

    #[test]
    fn ttnpp_blocks() {
        assert_eq!(layer_blocks(AnsatzFamily::TtnPlusPlus, 3), [(1, 2), (0, 1)]);
        assert_eq!(
            layer_blocks(AnsatzFamily::TtnPlusPlus, 6),
            [(0, 1), (2, 3), (3, 4), (3, 5), (1, 3)]
        );
    }

    #[test]
    fn families_parse() {
        for f in AnsatzFamily::ALL {
            assert_eq!(f.name().parse::<AnsatzFamily>().unwrap(), f);
        }
        assert!("tree".parse::<AnsatzFamily>().is_err());
    }

    #[test]
    fn encode_examples() {
        assert!(amplitude_encode(&[1.0, 0.0], 1).unwrap().is_empty());
        let c = amplitude_encode(&[1.0, 1.0], 1).unwrap();
        assert_eq!(
            c.gates(),
            [GateInstance::ry(0, std::f64::consts::FRAC_PI_2)]
        );
        let c = amplitude_encode(&[1.0; 4], 2).unwrap();
        let s: Statevector<f64> = run_statevector(&c, None).unwrap();
        for a in s.amplitudes() {
            assert!((a.re - 0.5).abs() < 1e-12 && a.im.abs() < 1e-15);
        }
        assert_eq!(amplitude_encode(&[0.0; 4], 2), Err(Error::ZeroVector));
        assert!(matches!(
            amplitude_encode(&[1.0; 3], 2),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn encode_signed_vectors() {
        let f = [0.3, -1.2, 0.0, 2.0, -0.7, 0.1, 0.5, -0.4];
        let c = amplitude_encode(&f, 3).unwrap();
        let s: Statevector<f64> = run_statevector(&c, None).unwrap();
        let norm = f.iter().map(|v| v * v).sum::<f64>().sqrt();
        for (a, v) in s.amplitudes().iter().zip(f) {
            assert!((a.re - v / norm).abs() < 1e-12, "{} vs {}", a.re, v / norm);
        }
    }

    #[test]
    fn controlled_examples() {
        let mut x = LogicalCircuit::new(1).unwrap();
        x.push(GateInstance::x(0)).unwrap();
        let cx = controlled_version(&x, 1).unwrap();
        assert_eq!(cx.gates(), [GateInstance::cx(1, 0)]);

        let empty = LogicalCircuit::new(2).unwrap();
        assert!(controlled_version(&empty, 2).unwrap().is_empty());
        assert_eq!(controlled_version(&empty, 1), Err(Error::IndexCollision(1)));

        let mut m = LogicalCircuit::new(1).unwrap();
        m.push(GateInstance::measure(0)).unwrap();
        assert_eq!(
            controlled_version(&m, 1),
            Err(Error::UnsupportedGate("MEASURE".into()))
        );
    }

    #[test]
    fn controlled_encoding_branches() {
        let enc = amplitude_encode(&[1.0, 1.0], 1).unwrap();
        let ctrl = controlled_version(&enc, 1).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        // control |1>: index 2 = |10>
        let on: Statevector<f64> = run_statevector(&ctrl, Some(&Statevector::basis(2, 2))).unwrap();
        assert!((on.amplitudes()[2].re - h).abs() < 1e-12);
        assert!((on.amplitudes()[3].re - h).abs() < 1e-12);
        let off: Statevector<f64> = run_statevector(&ctrl, None).unwrap();
        assert!((off.amplitudes()[0].re - 1.0).abs() < 1e-12);
    }
}
