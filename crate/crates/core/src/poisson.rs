//! Shift operators and discrete Laplacians for the 1D Poisson problem.
//!
//! The grid has `N = 2^n` points indexed by computational basis states. The
//! increment `S|k> = |k+1 mod N>` generates every stencil used here.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;

use crate::circuit::{mcx_vchain, GateInstance, LogicalCircuit};
use crate::error::{Error, Result};
use crate::matrix::RealMatrix;
use crate::pauli::{Pauli, PauliString, PauliSum, MAX_DENSE_QUBITS};
use crate::scalar::Real;

/// Largest register for the dense classical-side Laplacian.
pub const MAX_MATRIX_QUBITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryCondition {
    Periodic,
    Dirichlet,
    Neumann,
}

impl BoundaryCondition {
    pub fn name(self) -> &'static str {
        match self {
            BoundaryCondition::Periodic => "periodic",
            BoundaryCondition::Dirichlet => "dirichlet",
            BoundaryCondition::Neumann => "neumann",
        }
    }

    /// Periodic and Neumann operators annihilate the uniform vector.
    pub fn is_singular(self) -> bool {
        !matches!(self, BoundaryCondition::Dirichlet)
    }
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundaryCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "periodic" => Ok(BoundaryCondition::Periodic),
            "dirichlet" => Ok(BoundaryCondition::Dirichlet),
            "neumann" => Ok(BoundaryCondition::Neumann),
            other => Err(Error::InvalidArgument(format!(
                "unknown boundary condition `{other}`"
            ))),
        }
    }
}

/// Discretized `A u = f` on `2^n` grid points, where `A` is the negative
/// second-difference operator scaled by `1/h^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonProblem<T> {
    num_qubits: usize,
    boundary: BoundaryCondition,
    source: Vec<T>,
    grid_spacing: T,
}

impl<T: Real> PoissonProblem<T> {
    pub fn new(
        num_qubits: usize,
        boundary: BoundaryCondition,
        source: Vec<T>,
        grid_spacing: T,
    ) -> Result<Self> {
        if num_qubits == 0 {
            return Err(Error::InvalidArgument("need at least one qubit".into()));
        }
        let n_points = 1usize << num_qubits;
        if source.len() != n_points {
            return Err(Error::LengthMismatch {
                expected: n_points,
                got: source.len(),
            });
        }
        if grid_spacing.is_nan() || grid_spacing <= T::zero() {
            return Err(Error::InvalidArgument(
                "grid spacing must be positive".into(),
            ));
        }
        if source.iter().all(|&v| v == T::zero()) {
            return Err(Error::ZeroVector);
        }
        if boundary == BoundaryCondition::Periodic {
            let mean = source_mean(&source);
            if mean.abs() > T::tol() {
                return Err(Error::NotMeanZero(mean.as_f64()));
            }
        }
        Ok(Self {
            num_qubits,
            boundary,
            source,
            grid_spacing,
        })
    }

    /// Unit grid spacing.
    pub fn with_unit_spacing(
        num_qubits: usize,
        boundary: BoundaryCondition,
        source: Vec<T>,
    ) -> Result<Self> {
        Self::new(num_qubits, boundary, source, T::one())
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_points(&self) -> usize {
        1 << self.num_qubits
    }

    pub fn boundary(&self) -> BoundaryCondition {
        self.boundary
    }

    pub fn source(&self) -> &[T] {
        &self.source
    }

    pub fn grid_spacing(&self) -> T {
        self.grid_spacing
    }

    pub fn source_norm(&self) -> T {
        self.source.iter().map(|&v| v * v).sum::<T>().sqrt()
    }
}

pub(crate) fn source_mean<T: Real>(v: &[T]) -> T {
    v.iter().copied().sum::<T>() / T::of_usize(v.len())
}

/// Subtracts the mean so the vector lies in the range of a singular
/// periodic or Neumann Laplacian.
pub fn project_mean_zero<T: Real>(v: &[T]) -> Vec<T> {
    let mean = source_mean(v);
    v.iter().map(|&x| x - mean).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AncillaMode {
    /// Expand multi-controlled gates with a V-chain on `n - 1` ancillae.
    VChain,
    /// Keep abstract MCX gates.
    None,
}

/// Increment circuit `|k> -> |k+1 mod 2^n>`: a cascade of controlled X
/// gates with decreasing control counts, controls on the lower qubits,
/// ending with X on qubit 0.
///
/// In V-chain mode the register holds `2n - 1` qubits; qubits `n..2n-1` are
/// ancillae that start and end in `|0>`.
pub fn shift_circuit(n: usize, mode: AncillaMode) -> Result<LogicalCircuit> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one qubit".into()));
    }
    let width = match mode {
        AncillaMode::VChain => 2 * n - 1,
        AncillaMode::None => n,
    };
    let ancillae: Vec<usize> = (n..width).collect();
    let mut circuit = LogicalCircuit::new(width)?;
    for target in (1..n).rev() {
        let controls: Vec<usize> = (0..target).collect();
        if mode == AncillaMode::VChain && controls.len() >= 3 {
            circuit.extend_from(&mcx_vchain(&controls, target, &ancillae)?)?;
        } else {
            circuit.push(GateInstance::controlled_x(&controls, target))?;
        }
    }
    circuit.push(GateInstance::x(0))?;
    Ok(circuit)
}

fn one<T: Real>() -> Complex<T> {
    Complex::new(T::one(), T::zero())
}

/// Sum of single-qubit Paulis on qubit `q`, identity elsewhere.
fn local<T: Real>(n: usize, q: usize, parts: &[(Complex<T>, Pauli)]) -> PauliSum<T> {
    PauliSum::from_terms(
        n,
        parts
            .iter()
            .map(|(c, p)| (*c, PauliString::single(n, q, *p))),
    )
    .expect("well-formed local operator")
}

fn half<T: Real>() -> Complex<T> {
    Complex::new(T::of(0.5), T::zero())
}

/// `|b><b'|` on qubit `q` expanded in Paulis.
fn outer<T: Real>(n: usize, q: usize, row: u8, col: u8) -> PauliSum<T> {
    let h = half::<T>();
    let ih = Complex::new(T::zero(), T::of(0.5));
    match (row, col) {
        (0, 0) => local(n, q, &[(h, Pauli::I), (h, Pauli::Z)]),
        (1, 1) => local(n, q, &[(h, Pauli::I), (-h, Pauli::Z)]),
        (0, 1) => local(n, q, &[(h, Pauli::X), (ih, Pauli::Y)]),
        _ => local(n, q, &[(h, Pauli::X), (-ih, Pauli::Y)]),
    }
}

/// `|row><col|` on the whole register as a product of local outer products.
fn basis_outer<T: Real>(n: usize, row: usize, col: usize) -> PauliSum<T> {
    (0..n).fold(PauliSum::identity(n), |acc, q| {
        &acc * &outer(n, q, (row >> q & 1) as u8, (col >> q & 1) as u8)
    })
}

/// Pauli expansion of the increment, built from the product form
/// `X_0 · C^1X_1 · ... · C^{n-1}X_{n-1}` with each multi-controlled layer
/// written `I + |1..1><1..1| ⊗ (X - I)`.
pub fn shift_pauli<T: Real>(n: usize) -> Result<PauliSum<T>> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one qubit".into()));
    }
    if n > MAX_DENSE_QUBITS {
        return Err(Error::TooManyQubits {
            n,
            max: MAX_DENSE_QUBITS,
        });
    }
    let id = PauliSum::identity(n);
    let mut s = local(n, 0, &[(one(), Pauli::X)]);
    for target in 1..n {
        let projector = (0..target).fold(id.clone(), |acc, c| &acc * &outer(n, c, 1, 1));
        let flip = local(n, target, &[(one(), Pauli::X), (-one::<T>(), Pauli::I)]);
        let layer = &id + &(&projector * &flip);
        s = &s * &layer;
    }
    Ok(s)
}

/// `A = (2I - S - S†)/h^2` plus boundary corrections:
/// Dirichlet removes the wraparound couplings, Neumann additionally sets the
/// two corner diagonal entries to 1.
pub fn laplacian_pauli<T: Real>(problem: &PoissonProblem<T>) -> Result<PauliSum<T>> {
    laplacian_pauli_for(
        problem.num_qubits(),
        problem.boundary(),
        problem.grid_spacing(),
    )
}

pub fn laplacian_pauli_for<T: Real>(
    n: usize,
    boundary: BoundaryCondition,
    h: T,
) -> Result<PauliSum<T>> {
    let s = shift_pauli::<T>(n)?;
    let two_i = PauliSum::identity(n).scale_real(T::of(2.0));
    let mut a = &(&two_i - &s) - &s.adjoint();
    if boundary != BoundaryCondition::Periodic {
        let last = (1usize << n) - 1;
        let wrap = &basis_outer::<T>(n, 0, last) + &basis_outer::<T>(n, last, 0);
        a = &a + &wrap;
    }
    if boundary == BoundaryCondition::Neumann {
        let last = (1usize << n) - 1;
        let corners = &basis_outer::<T>(n, 0, 0) + &basis_outer::<T>(n, last, last);
        a = &a - &corners;
    }
    let scaled = a.scale_real(T::one() / (h * h));
    // Coefficients are real by construction; drop rounding residue.
    PauliSum::from_terms(
        n,
        scaled
            .terms()
            .iter()
            .map(|(c, p)| (Complex::new(c.re, T::zero()), p.clone())),
    )
}

/// Dense Laplacian assembled directly from the stencil.
pub fn laplacian_matrix<T: Real>(problem: &PoissonProblem<T>) -> Result<RealMatrix<T>> {
    laplacian_matrix_for(
        problem.num_qubits(),
        problem.boundary(),
        problem.grid_spacing(),
    )
}

pub fn laplacian_matrix_for<T: Real>(
    n: usize,
    boundary: BoundaryCondition,
    h: T,
) -> Result<RealMatrix<T>> {
    if n > MAX_MATRIX_QUBITS {
        return Err(Error::TooManyQubits {
            n,
            max: MAX_MATRIX_QUBITS,
        });
    }
    let dim = 1usize << n;
    let inv_h2 = T::one() / (h * h);
    let mut a = RealMatrix::zeros(dim);
    for i in 0..dim {
        a[(i, i)] += T::of(2.0) * inv_h2;
        match boundary {
            BoundaryCondition::Periodic => {
                a[(i, (i + 1) % dim)] -= inv_h2;
                a[(i, (i + dim - 1) % dim)] -= inv_h2;
            }
            _ => {
                if i + 1 < dim {
                    a[(i, i + 1)] -= inv_h2;
                }
                if i > 0 {
                    a[(i, i - 1)] -= inv_h2;
                }
            }
        }
    }
    if boundary == BoundaryCondition::Neumann {
        a[(0, 0)] = inv_h2;
        a[(dim - 1, dim - 1)] = inv_h2;
    }
    Ok(a)
}
