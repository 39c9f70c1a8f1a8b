//! Pauli strings, weighted Pauli sums and the trace decomposition of dense
//! matrices into Pauli sums.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{GateInstance, LogicalCircuit};
use crate::error::{Error, Result};
use crate::matrix::CMatrix;
use crate::scalar::Real;
use crate::sim::{run_statevector, sample_histogram, Statevector};

/// Largest register for which `to_matrix` builds a dense matrix.
pub const MAX_DENSE_QUBITS: usize = 10;
/// Largest register accepted by the brute-force decomposition.
pub const MAX_DECOMPOSE_QUBITS: usize = 6;
/// Terms with coefficient magnitude below this are dropped on canonicalization.
pub const DROP_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    /// `self * other = phase * result`, with the phase a power of `i`
    /// encoded as 0..4.
    fn product(self, other: Pauli) -> (u8, Pauli) {
        use Pauli::*;
        match (self, other) {
            (I, p) | (p, I) => (0, p),
            (a, b) if a == b => (0, I),
            (X, Y) => (1, Z),
            (Y, X) => (3, Z),
            (Y, Z) => (1, X),
            (Z, Y) => (3, X),
            (Z, X) => (1, Y),
            (X, Z) => (3, Y),
            _ => unreachable!(),
        }
    }
}

/// Tensor product of single-qubit Paulis; position `i` acts on qubit `i`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PauliString(Vec<Pauli>);

impl PauliString {
    pub fn new(ops: Vec<Pauli>) -> Result<Self> {
        if ops.is_empty() {
            return Err(Error::InvalidArgument("empty Pauli string".into()));
        }
        Ok(Self(ops))
    }

    pub fn identity(n: usize) -> Self {
        Self(vec![Pauli::I; n])
    }

    /// Single non-identity operator `p` on qubit `q` of an `n`-qubit register.
    pub fn single(n: usize, q: usize, p: Pauli) -> Self {
        let mut ops = vec![Pauli::I; n];
        ops[q] = p;
        Self(ops)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn ops(&self) -> &[Pauli] {
        &self.0
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|&p| p == Pauli::I)
    }

    /// Bit masks `(x, z)` and the number of Y factors: with them
    /// `P|j> = i^ny (-1)^popcount(j & z) |j ^ x>`.
    pub fn masks(&self) -> (usize, usize, u32) {
        let mut x = 0;
        let mut z = 0;
        let mut ny = 0;
        for (q, p) in self.0.iter().enumerate() {
            match p {
                Pauli::I => {}
                Pauli::X => x |= 1 << q,
                Pauli::Z => z |= 1 << q,
                Pauli::Y => {
                    x |= 1 << q;
                    z |= 1 << q;
                    ny += 1;
                }
            }
        }
        (x, z, ny)
    }

    /// Qubits on which the string acts non-trivially.
    pub fn support(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &p)| p != Pauli::I)
            .map(|(q, _)| q)
            .collect()
    }

    /// `<psi|P|psi>` on raw amplitudes.
    pub fn expectation<T: Real>(&self, amps: &[Complex<T>]) -> Complex<T> {
        let (x, z, ny) = self.masks();
        let mut acc = Complex::new(T::zero(), T::zero());
        for (j, a) in amps.iter().enumerate() {
            let term = amps[j ^ x].conj() * a;
            if (j & z).count_ones() % 2 == 1 {
                acc -= term;
            } else {
                acc += term;
            }
        }
        acc * i_pow(ny)
    }

    fn multiply(&self, other: &Self) -> (u8, PauliString) {
        let mut phase = 0u8;
        let ops = self
            .0
            .iter()
            .zip(&other.0)
            .map(|(&a, &b)| {
                let (ph, p) = a.product(b);
                phase = (phase + ph) % 4;
                p
            })
            .collect();
        (phase, PauliString(ops))
    }
}

fn i_pow<T: Real>(k: u32) -> Complex<T> {
    match k % 4 {
        0 => Complex::new(T::one(), T::zero()),
        1 => Complex::new(T::zero(), T::one()),
        2 => Complex::new(-T::one(), T::zero()),
        _ => Complex::new(T::zero(), -T::one()),
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            write!(f, "{}", p.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let ops = s
            .chars()
            .map(|ch| match ch {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(Error::InvalidArgument(format!(
                    "bad Pauli symbol `{other}`"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        PauliString::new(ops)
    }
}

/// Weighted sum of `n`-qubit Pauli strings in canonical form: terms sorted
/// by label, no duplicates, no coefficient below [`DROP_TOLERANCE`].
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum<T> {
    num_qubits: usize,
    terms: Vec<(Complex<T>, PauliString)>,
}

impl<T: Real> PauliSum<T> {
    pub fn zero(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            terms: Vec::new(),
        }
    }

    pub fn identity(num_qubits: usize) -> Self {
        Self::from_terms(
            num_qubits,
            vec![(
                Complex::new(T::one(), T::zero()),
                PauliString::identity(num_qubits),
            )],
        )
        .expect("identity is well formed")
    }

    /// Builds a canonical sum; duplicate strings are merged.
    pub fn from_terms(
        num_qubits: usize,
        terms: impl IntoIterator<Item = (Complex<T>, PauliString)>,
    ) -> Result<Self> {
        let mut acc: BTreeMap<PauliString, Complex<T>> = BTreeMap::new();
        for (coef, s) in terms {
            if s.len() != num_qubits {
                return Err(Error::LengthMismatch {
                    expected: num_qubits,
                    got: s.len(),
                });
            }
            let e = acc.entry(s).or_insert(Complex::new(T::zero(), T::zero()));
            *e += coef;
        }
        Ok(Self::from_map(num_qubits, acc))
    }

    fn from_map(num_qubits: usize, map: BTreeMap<PauliString, Complex<T>>) -> Self {
        let drop = T::of(DROP_TOLERANCE);
        Self {
            num_qubits,
            terms: map
                .into_iter()
                .filter(|(_, c)| c.norm() >= drop)
                .map(|(s, c)| (c, s))
                .collect(),
        }
    }

    /// Single term from a label, e.g. `PauliSum::term(0.5, "XI")`.
    pub fn term(coef: f64, label: &str) -> Result<Self> {
        let s: PauliString = label.parse()?;
        Self::from_terms(s.len(), [(Complex::new(T::of(coef), T::zero()), s)])
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn terms(&self) -> &[(Complex<T>, PauliString)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, label: &str) -> Complex<T> {
        self.terms
            .iter()
            .find(|(_, s)| s.to_string() == label)
            .map(|(c, _)| *c)
            .unwrap_or(Complex::new(T::zero(), T::zero()))
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self::from_terms(
            self.num_qubits,
            self.terms.iter().map(|(c, p)| (*c * s, p.clone())),
        )
        .expect("same register")
    }

    pub fn scale_real(&self, s: T) -> Self {
        self.scale(Complex::new(s, T::zero()))
    }

    pub fn adjoint(&self) -> Self {
        Self {
            num_qubits: self.num_qubits,
            terms: self
                .terms
                .iter()
                .map(|(c, p)| (c.conj(), p.clone()))
                .collect(),
        }
    }

    /// True iff every coefficient is real to within the scalar tolerance.
    pub fn is_hermitian(&self) -> bool {
        self.terms.iter().all(|(c, _)| c.im.abs() < T::tol())
    }

    /// Dense matrix `sum c_P P`, qubit 0 least significant.
    pub fn to_matrix(&self) -> Result<CMatrix<T>> {
        if self.num_qubits > MAX_DENSE_QUBITS {
            return Err(Error::TooManyQubits {
                n: self.num_qubits,
                max: MAX_DENSE_QUBITS,
            });
        }
        let dim = 1usize << self.num_qubits;
        let mut m = CMatrix::zeros(dim);
        for (coef, s) in &self.terms {
            let (x, z, ny) = s.masks();
            let base = *coef * i_pow(ny);
            for j in 0..dim {
                let v = if (j & z).count_ones() % 2 == 1 {
                    -base
                } else {
                    base
                };
                m[(j ^ x, j)] += v;
            }
        }
        Ok(m)
    }

    /// Writes the text format: one `<re> <im> <LABEL>` line per term.
    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl<T: Real> fmt::Display for PauliSum<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (c, s) in &self.terms {
            writeln!(f, "{:?} {:?} {}", c.re.as_f64(), c.im.as_f64(), s)?;
        }
        Ok(())
    }
}

impl<T: Real> FromStr for PauliSum<T> {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut terms = Vec::new();
        let mut n = None;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: String| Error::Parse { line: i + 1, msg };
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [re, im, label] = fields[..] else {
                return Err(err(format!("expected `<re> <im> <LABEL>`, got `{line}`")));
            };
            let re: f64 = re.parse().map_err(|e| err(format!("{e}")))?;
            let im: f64 = im.parse().map_err(|e| err(format!("{e}")))?;
            let s: PauliString = label.parse().map_err(|e: Error| err(e.to_string()))?;
            if *n.get_or_insert(s.len()) != s.len() {
                return Err(err("inconsistent label lengths".into()));
            }
            terms.push((Complex::new(T::of(re), T::of(im)), s));
        }
        let n = n.ok_or(Error::Parse {
            line: 1,
            msg: "no terms".into(),
        })?;
        Self::from_terms(n, terms)
    }
}

impl<T: Real> Add for &PauliSum<T> {
    type Output = PauliSum<T>;

    fn add(self, rhs: &PauliSum<T>) -> PauliSum<T> {
        assert_eq!(self.num_qubits, rhs.num_qubits, "register mismatch");
        PauliSum::from_terms(
            self.num_qubits,
            self.terms.iter().chain(&rhs.terms).cloned(),
        )
        .expect("same register")
    }
}

impl<T: Real> Neg for &PauliSum<T> {
    type Output = PauliSum<T>;

    fn neg(self) -> PauliSum<T> {
        self.scale_real(-T::one())
    }
}

impl<T: Real> Sub for &PauliSum<T> {
    type Output = PauliSum<T>;

    fn sub(self, rhs: &PauliSum<T>) -> PauliSum<T> {
        self + &(-rhs)
    }
}

impl<T: Real> Mul for &PauliSum<T> {
    type Output = PauliSum<T>;

    /// Operator product, expanded term by term and recanonicalized.
    fn mul(self, rhs: &PauliSum<T>) -> PauliSum<T> {
        assert_eq!(self.num_qubits, rhs.num_qubits, "register mismatch");
        let mut acc: BTreeMap<PauliString, Complex<T>> = BTreeMap::new();
        for (a, sa) in &self.terms {
            for (b, sb) in &rhs.terms {
                let (phase, s) = sa.multiply(sb);
                let e = acc.entry(s).or_insert(Complex::new(T::zero(), T::zero()));
                *e += *a * *b * i_pow(phase as u32);
            }
        }
        PauliSum::from_map(self.num_qubits, acc)
    }
}

/// Decomposes a `2^n x 2^n` matrix as `sum_P c_P P` with
/// `c_P = Tr(P† M) / 2^n`, enumerating all `4^n` strings. Terms with
/// `|c_P| <= tolerance` are dropped.
pub fn decompose_matrix<T: Real>(m: &CMatrix<T>, tolerance: T) -> Result<PauliSum<T>> {
    let dim = m.dim();
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::NonPowerOfTwo(dim));
    }
    let n = dim.trailing_zeros() as usize;
    if n > MAX_DECOMPOSE_QUBITS {
        return Err(Error::TooManyQubits {
            n,
            max: MAX_DECOMPOSE_QUBITS,
        });
    }
    // n = 0 (1x1) has no qubit to label.
    if n == 0 {
        return Err(Error::NonPowerOfTwo(dim));
    }
    let norm = T::one() / T::of_usize(dim);
    let mut terms = Vec::new();
    for code in 0..(1usize << (2 * n)) {
        let ops: Vec<Pauli> = (0..n)
            .map(|q| match (code >> (2 * q)) & 3 {
                0 => Pauli::I,
                1 => Pauli::X,
                2 => Pauli::Y,
                _ => Pauli::Z,
            })
            .collect();
        let s = PauliString(ops);
        let (x, z, ny) = s.masks();
        // Tr(P† M) = sum_j conj(<j^x|P|j>) M[j^x, j]
        let mut tr = Complex::new(T::zero(), T::zero());
        for j in 0..dim {
            let v = m[(j ^ x, j)];
            if (j & z).count_ones() % 2 == 1 {
                tr -= v;
            } else {
                tr += v;
            }
        }
        let coef = tr * i_pow::<T>(ny).conj() * norm;
        if coef.norm() > tolerance {
            terms.push((coef, s));
        }
    }
    PauliSum::from_terms(n, terms)
}

/// One measurement setting: rotate into the Z basis, then read the parity of
/// `z_mask` weighted by `weight`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementBasis<T> {
    pub rotation: LogicalCircuit,
    pub z_string: PauliString,
    pub weight: T,
}

impl<T> MeasurementBasis<T> {
    pub fn z_mask(&self) -> usize {
        self.z_string
            .ops()
            .iter()
            .enumerate()
            .filter(|(_, &p)| p != Pauli::I)
            .fold(0, |m, (q, _)| m | 1 << q)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementPlan<T> {
    /// Coefficient of the identity term.
    pub offset: T,
    pub bases: Vec<MeasurementBasis<T>>,
}

/// One basis-change circuit per non-identity term: H maps X to Z and
/// RX(pi/2) maps Y to Z.
pub fn measurement_bases<T: Real>(ps: &PauliSum<T>) -> Result<MeasurementPlan<T>> {
    if !ps.is_hermitian() {
        return Err(Error::NonHermitianObservable);
    }
    let n = ps.num_qubits();
    let mut offset = T::zero();
    let mut bases = Vec::new();
    for (coef, s) in ps.terms() {
        if s.is_identity() {
            offset += coef.re;
            continue;
        }
        let mut rotation = LogicalCircuit::new(n)?;
        let mut z_ops = vec![Pauli::I; n];
        for (q, &p) in s.ops().iter().enumerate() {
            match p {
                Pauli::I => continue,
                Pauli::X => rotation.push(GateInstance::h(q))?,
                Pauli::Y => rotation.push(GateInstance::rx(q, std::f64::consts::FRAC_PI_2))?,
                Pauli::Z => {}
            }
            z_ops[q] = Pauli::Z;
        }
        bases.push(MeasurementBasis {
            rotation,
            z_string: PauliString(z_ops),
            weight: coef.re,
        });
    }
    Ok(MeasurementPlan { offset, bases })
}

/// Shot-based estimate of a Hermitian observable and its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShotEstimate {
    pub mean: f64,
    pub std_error: f64,
}

/// Estimates `<psi|O|psi>` by measuring each basis of `plan` with `shots`
/// fresh preparations. Per-basis sample streams are derived from `seed`.
pub fn estimate_expectation<T: Real>(
    state: &Statevector<T>,
    plan: &MeasurementPlan<T>,
    shots: usize,
    seed: u64,
) -> Result<ShotEstimate> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be positive".into()));
    }
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let mut mean = plan.offset.as_f64();
    let mut var = 0.0;
    for basis in &plan.bases {
        let rotated = run_statevector(&basis.rotation, Some(state))?;
        let mut rng = ChaCha8Rng::seed_from_u64(master.gen());
        let counts = sample_histogram(&rotated, shots, &mut rng);
        let mask = basis.z_mask();
        let parity_sum: i64 = counts
            .iter()
            .enumerate()
            .map(|(idx, &c)| {
                if (idx & mask).count_ones() % 2 == 1 {
                    -(c as i64)
                } else {
                    c as i64
                }
            })
            .sum();
        let m = parity_sum as f64 / shots as f64;
        let w = basis.weight.as_f64();
        mean += w * m;
        // Bernoulli variance of a +-1 outcome; floor at one count so a
        // deterministic outcome still reports a nonzero error.
        let p_var = (1.0 - m * m).max(1.0 / shots as f64);
        var += w * w * p_var / shots as f64;
    }
    Ok(ShotEstimate {
        mean,
        std_error: var.sqrt(),
    })
}
