//! Exact statevector and density-matrix simulation of logical circuits.

use std::collections::BTreeMap;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{GateInstance, GateKind, LogicalCircuit};
use crate::error::{Error, Result};
use crate::matrix::CMatrix;
use crate::noise::NoiseModel;
use crate::pauli::PauliSum;
use crate::scalar::Real;

/// Largest register accepted by the dense density-matrix simulator.
pub const MAX_DENSITY_QUBITS: usize = 12;
/// Largest register for which a dense unitary is reconstructed.
pub const MAX_UNITARY_QUBITS: usize = 10;

type Mat2<T> = [[Complex<T>; 2]; 2];

fn c<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(T::of(re), T::of(im))
}

fn czero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

fn bound_angle(g: &GateInstance) -> Result<f64> {
    match g.kind.angle() {
        Some(a) => a
            .value()
            .ok_or_else(|| Error::UnboundParameter(g.param().unwrap_or_default().to_string())),
        None => Ok(0.0),
    }
}

/// 2x2 matrix of a single-qubit gate kind (the target action for controlled
/// X kinds).
fn single_qubit_matrix<T: Real>(g: &GateInstance) -> Result<Mat2<T>> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Ok(match &g.kind {
        GateKind::X | GateKind::Cx | GateKind::Ccx | GateKind::Mcx(_) => {
            [[c(0., 0.), c(1., 0.)], [c(1., 0.), c(0., 0.)]]
        }
        GateKind::Y => [[c(0., 0.), c(0., -1.)], [c(0., 1.), c(0., 0.)]],
        GateKind::Z => [[c(1., 0.), c(0., 0.)], [c(0., 0.), c(-1., 0.)]],
        GateKind::H => [[c(s, 0.), c(s, 0.)], [c(s, 0.), c(-s, 0.)]],
        GateKind::Sx => [[c(0.5, 0.5), c(0.5, -0.5)], [c(0.5, -0.5), c(0.5, 0.5)]],
        GateKind::Rx(_) => {
            let t = bound_angle(g)? / 2.0;
            [
                [c(t.cos(), 0.), c(0., -t.sin())],
                [c(0., -t.sin()), c(t.cos(), 0.)],
            ]
        }
        GateKind::Ry(_) => {
            let t = bound_angle(g)? / 2.0;
            [
                [c(t.cos(), 0.), c(-t.sin(), 0.)],
                [c(t.sin(), 0.), c(t.cos(), 0.)],
            ]
        }
        GateKind::Rz(_) => {
            let t = bound_angle(g)? / 2.0;
            [
                [c(t.cos(), -t.sin()), c(0., 0.)],
                [c(0., 0.), c(t.cos(), t.sin())],
            ]
        }
        GateKind::Cz | GateKind::Swap | GateKind::Measure => {
            unreachable!("not a single-target gate")
        }
    })
}

fn apply_controlled_1q<T: Real>(
    amps: &mut [Complex<T>],
    control_mask: usize,
    target: usize,
    m: &Mat2<T>,
) {
    let tbit = 1usize << target;
    for i in 0..amps.len() {
        if i & tbit != 0 || i & control_mask != control_mask {
            continue;
        }
        let j = i | tbit;
        let (a, b) = (amps[i], amps[j]);
        amps[i] = m[0][0] * a + m[0][1] * b;
        amps[j] = m[1][0] * a + m[1][1] * b;
    }
}

/// Applies `gate` to a flat amplitude vector with every qubit index shifted
/// by `offset`; when `conjugate` is set the complex conjugate of the gate is
/// applied instead. Density matrices reuse this with the row index in the
/// high bits and the column index in the low bits.
fn apply_gate_shifted<T: Real>(
    amps: &mut [Complex<T>],
    gate: &GateInstance,
    offset: usize,
    conjugate: bool,
) -> Result<()> {
    let q = |i: usize| gate.qubits[i] + offset;
    match &gate.kind {
        GateKind::Measure => {}
        GateKind::Swap => {
            let (a, b) = (1usize << q(0), 1usize << q(1));
            for i in 0..amps.len() {
                if i & a != 0 && i & b == 0 {
                    amps.swap(i, i ^ a ^ b);
                }
            }
        }
        GateKind::Cz => {
            let mask = (1usize << q(0)) | (1usize << q(1));
            for (i, amp) in amps.iter_mut().enumerate() {
                if i & mask == mask {
                    *amp = -*amp;
                }
            }
        }
        kind => {
            let mut m = single_qubit_matrix::<T>(gate)?;
            if conjugate {
                for row in m.iter_mut() {
                    for v in row.iter_mut() {
                        *v = v.conj();
                    }
                }
            }
            let controls = match kind {
                GateKind::Cx => 1,
                GateKind::Ccx => 2,
                GateKind::Mcx(k) => *k,
                _ => 0,
            };
            let mask = (0..controls).fold(0usize, |m, i| m | (1usize << q(i)));
            apply_controlled_1q(amps, mask, q(controls), &m);
        }
    }
    Ok(())
}

fn ensure_bound(circuit: &LogicalCircuit) -> Result<()> {
    match circuit.gates().iter().find_map(|g| g.param()) {
        Some(p) => Err(Error::UnboundParameter(p.to_string())),
        None => Ok(()),
    }
}

/// Pure state on `n` qubits: `2^n` complex amplitudes with unit norm.
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector<T> {
    num_qubits: usize,
    amps: Vec<Complex<T>>,
}

impl<T: Real> Statevector<T> {
    /// `|0...0>`.
    pub fn zero(num_qubits: usize) -> Self {
        Self::basis(num_qubits, 0)
    }

    pub fn basis(num_qubits: usize, index: usize) -> Self {
        let mut amps = vec![czero(); 1 << num_qubits];
        amps[index] = c(1.0, 0.0);
        Self { num_qubits, amps }
    }

    /// Wraps amplitudes that must already be normalized.
    pub fn from_amplitudes(amps: Vec<Complex<T>>) -> Result<Self> {
        let len = amps.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::NonPowerOfTwo(len));
        }
        let norm2: T = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm2 - T::one()).abs() > T::tol() * T::of(10.0) {
            return Err(Error::InvalidArgument(format!(
                "amplitudes have squared norm {norm2}, expected 1"
            )));
        }
        Ok(Self {
            num_qubits: len.trailing_zeros() as usize,
            amps,
        })
    }

    /// Normalizes a real vector into a state.
    pub fn from_real(values: &[T]) -> Result<Self> {
        let norm = values.iter().map(|&v| v * v).sum::<T>().sqrt();
        if norm == T::zero() {
            return Err(Error::ZeroVector);
        }
        Self::from_amplitudes(
            values
                .iter()
                .map(|&v| Complex::new(v / norm, T::zero()))
                .collect(),
        )
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub fn real_parts(&self) -> Vec<T> {
        self.amps.iter().map(|a| a.re).collect()
    }

    pub fn norm(&self) -> T {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<T>().sqrt()
    }

    pub fn probabilities(&self) -> Vec<T> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Result<Complex<T>> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(self.dim(), other.dim()));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .fold(czero(), |acc, (a, b)| acc + a.conj() * b))
    }

    /// Tensor product with `high` occupying the upper qubits.
    pub fn tensor(high: &Self, low: &Self) -> Self {
        let mut amps = Vec::with_capacity(high.dim() * low.dim());
        for h in &high.amps {
            for l in &low.amps {
                amps.push(h * l);
            }
        }
        Self {
            num_qubits: high.num_qubits + low.num_qubits,
            amps,
        }
    }

    /// Applies a single bound gate in place.
    pub fn apply(&mut self, gate: &GateInstance) -> Result<()> {
        if let Some(&q) = gate.qubits.iter().find(|&&q| q >= self.num_qubits) {
            return Err(Error::IndexOutOfRange {
                qubit: q,
                num_qubits: self.num_qubits,
            });
        }
        apply_gate_shifted(&mut self.amps, gate, 0, false)
    }
}

/// Runs a fully bound circuit. Measurements are ignored: the returned state
/// is the pre-measurement state.
pub fn run_statevector<T: Real>(
    circuit: &LogicalCircuit,
    initial: Option<&Statevector<T>>,
) -> Result<Statevector<T>> {
    ensure_bound(circuit)?;
    let mut state = match initial {
        Some(s) => {
            if s.num_qubits() != circuit.num_qubits() {
                return Err(Error::DimensionMismatch(
                    s.num_qubits(),
                    circuit.num_qubits(),
                ));
            }
            s.clone()
        }
        None => Statevector::zero(circuit.num_qubits()),
    };
    for g in circuit.gates() {
        apply_gate_shifted(&mut state.amps, g, 0, false)?;
    }
    Ok(state)
}

/// Dense unitary of a bound circuit, one column per simulated basis state.
pub fn unitary_matrix<T: Real>(circuit: &LogicalCircuit) -> Result<CMatrix<T>> {
    let n = circuit.num_qubits();
    if n > MAX_UNITARY_QUBITS {
        return Err(Error::TooManyQubits {
            n,
            max: MAX_UNITARY_QUBITS,
        });
    }
    let dim = 1 << n;
    let mut u = CMatrix::zeros(dim);
    for k in 0..dim {
        let out = run_statevector(circuit, Some(&Statevector::basis(n, k)))?;
        u.set_column(k, out.amplitudes());
    }
    Ok(u)
}

/// `<psi|O|psi>` for a Hermitian Pauli sum.
pub fn expectation<T: Real>(state: &Statevector<T>, observable: &PauliSum<T>) -> Result<T> {
    if state.num_qubits() != observable.num_qubits() {
        return Err(Error::DimensionMismatch(
            state.num_qubits(),
            observable.num_qubits(),
        ));
    }
    if !observable.is_hermitian() {
        return Err(Error::NonHermitianObservable);
    }
    let value = observable
        .terms()
        .iter()
        .fold(czero::<T>(), |acc, (coef, p)| {
            acc + *coef * p.expectation(state.amplitudes())
        });
    debug_assert!(
        value.im.abs() < T::tol() * T::of(100.0) * (T::one() + value.re.abs()),
        "imaginary residue {} in Hermitian expectation",
        value.im
    );
    Ok(value.re)
}

/// Draws `shots` basis-state indices and returns per-index counts.
pub fn sample_histogram<T: Real, R: Rng>(
    state: &Statevector<T>,
    shots: usize,
    rng: &mut R,
) -> Vec<usize> {
    let mut cumulative = Vec::with_capacity(state.dim());
    let mut acc = 0.0f64;
    for p in state.probabilities() {
        acc += p.as_f64();
        cumulative.push(acc);
    }
    let total = acc;
    let mut counts = vec![0usize; state.dim()];
    for _ in 0..shots {
        let u: f64 = rng.gen::<f64>() * total;
        let idx = cumulative.partition_point(|&c| c <= u).min(state.dim() - 1);
        counts[idx] += 1;
    }
    counts
}

/// Multinomial measurement of every qubit. Keys are bitstrings written
/// `q_{n-1} ... q_0`; only observed outcomes appear.
pub fn sample_counts<T: Real>(
    state: &Statevector<T>,
    shots: usize,
    seed: u64,
) -> BTreeMap<String, usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = state.num_qubits();
    sample_histogram(state, shots, &mut rng)
        .into_iter()
        .enumerate()
        .filter(|&(_, c)| c > 0)
        .map(|(i, c)| (format!("{i:0n$b}"), c))
        .collect()
}

/// Mixed state as a dense `2^n x 2^n` matrix, stored row-major so that the
/// row index occupies the high `n` bits of the flat index.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T> {
    num_qubits: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> DensityMatrix<T> {
    pub fn from_pure(state: &Statevector<T>) -> Self {
        let amps = state.amplitudes();
        let mut data = Vec::with_capacity(amps.len() * amps.len());
        for r in amps {
            for col in amps {
                data.push(r * col.conj());
            }
        }
        Self {
            num_qubits: state.num_qubits(),
            data,
        }
    }

    pub fn maximally_mixed(num_qubits: usize) -> Self {
        let dim = 1usize << num_qubits;
        let mut data = vec![czero(); dim * dim];
        let v = T::one() / T::of_usize(dim);
        for i in 0..dim {
            data[i * dim + i] = Complex::new(v, T::zero());
        }
        Self { num_qubits, data }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.num_qubits
    }

    pub fn get(&self, row: usize, col: usize) -> Complex<T> {
        self.data[row * self.dim() + col]
    }

    pub fn to_matrix(&self) -> CMatrix<T> {
        CMatrix::from_fn(self.dim(), |r, c| self.get(r, c))
    }

    pub fn trace(&self) -> T {
        (0..self.dim()).map(|i| self.get(i, i).re).sum()
    }

    pub fn purity(&self) -> T {
        // Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho.
        self.data.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn apply(&mut self, gate: &GateInstance) -> Result<()> {
        let n = self.num_qubits;
        apply_gate_shifted(&mut self.data, gate, n, false)?;
        apply_gate_shifted(&mut self.data, gate, 0, true)
    }

    /// `rho -> (1 - p) rho + p (I/2^k ⊗ Tr_Q rho)` on the qubit set `Q`.
    pub fn depolarize(&mut self, qubits: &[usize], p: f64) {
        if p == 0.0 || qubits.is_empty() {
            return;
        }
        let n = self.num_qubits;
        let k = qubits.len();
        let sub = 1usize << k;
        let spread = |s: usize, shift: usize| {
            qubits
                .iter()
                .enumerate()
                .filter(|(b, _)| s >> b & 1 == 1)
                .fold(0usize, |acc, (_, &q)| acc | 1usize << (q + shift))
        };
        let row_off: Vec<usize> = (0..sub).map(|s| spread(s, n)).collect();
        let col_off: Vec<usize> = (0..sub).map(|s| spread(s, 0)).collect();
        let mask = row_off[sub - 1] | col_off[sub - 1];
        let keep = T::of(1.0 - p);
        let mix = T::of(p) / T::of_usize(sub);
        for base in 0..self.data.len() {
            if base & mask != 0 {
                continue;
            }
            let traced = (0..sub)
                .map(|s| self.data[base | row_off[s] | col_off[s]])
                .fold(czero::<T>(), |a, b| a + b);
            for (s, &ro) in row_off.iter().enumerate() {
                for (t, &co) in col_off.iter().enumerate() {
                    let idx = base | ro | co;
                    let mut v = self.data[idx] * keep;
                    if s == t {
                        v += traced * mix;
                    }
                    self.data[idx] = v;
                }
            }
        }
    }
}

/// Noisy density-matrix evolution: every gate is followed by a depolarizing
/// channel on its qubits with probability chosen by gate arity.
pub fn run_density_with_noise<T: Real>(
    circuit: &LogicalCircuit,
    noise: &NoiseModel,
) -> Result<DensityMatrix<T>> {
    let n = circuit.num_qubits();
    if n > MAX_DENSITY_QUBITS {
        return Err(Error::TooManyQubits {
            n,
            max: MAX_DENSITY_QUBITS,
        });
    }
    ensure_bound(circuit)?;
    let mut rho = DensityMatrix::from_pure(&Statevector::zero(n));
    for g in circuit.gates() {
        if g.kind == GateKind::Measure {
            continue;
        }
        rho.apply(g)?;
        rho.depolarize(&g.qubits, noise.eps_for_arity(g.qubits.len()));
    }
    Ok(rho)
}

/// `<psi|rho|psi>`, clamped to `[0, 1]`.
pub fn state_fidelity<T: Real>(ideal: &Statevector<T>, noisy: &DensityMatrix<T>) -> Result<T> {
    if ideal.dim() != noisy.dim() {
        return Err(Error::DimensionMismatch(ideal.dim(), noisy.dim()));
    }
    let psi = ideal.amplitudes();
    let dim = ideal.dim();
    let mut acc = czero::<T>();
    for (r, pr) in psi.iter().enumerate() {
        let row = noisy.data[r * dim..(r + 1) * dim]
            .iter()
            .zip(psi)
            .fold(czero::<T>(), |a, (&m, &p)| a + m * p);
        acc += pr.conj() * row;
    }
    Ok(acc.re.max(T::zero()).min(T::one()))
}
