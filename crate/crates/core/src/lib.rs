//! Variational quantum solver for the one-dimensional discrete Poisson
//! equation: circuit IR, statevector and density-matrix simulation, Pauli
//! operators, ansatz families, cost estimation, derivative-free optimizers,
//! transpilation with noise proxies and a classical reference solver.
//!
//! Numeric kernels are generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`.

pub mod ansatz;
pub mod circuit;
pub mod cost;
pub mod error;
pub mod matrix;
pub mod noise;
pub mod optimize;
pub mod oracle;
pub mod pauli;
pub mod poisson;
pub mod scalar;
pub mod sim;
pub mod transpile;

pub use ansatz::{amplitude_encode, build_ansatz, controlled_version, AnsatzFamily, AnsatzSpec};
pub use circuit::{Angle, GateInstance, GateKind, GateTag, LogicalCircuit};
pub use cost::{optimal_r, CostBreakdown, CostModel, PlateauReport};
pub use error::{Error, Result};
pub use noise::NoiseModel;
pub use optimize::{Method, OptimizerConfig, OptimizerTrace};
pub use oracle::{compare_solutions, solve_classical, ClassicalSolution, Gauge};
pub use pauli::{Pauli, PauliString};
pub use poisson::{AncillaMode, BoundaryCondition};
pub use scalar::Real;
pub use transpile::{CouplingMap, PhysicalCircuit};

pub type CMatrix64 = matrix::CMatrix<f64>;
pub type RealMatrix64 = matrix::RealMatrix<f64>;
pub type Statevector64 = sim::Statevector<f64>;
pub type DensityMatrix64 = sim::DensityMatrix<f64>;
pub type PauliSum64 = pauli::PauliSum<f64>;
pub type PoissonProblem64 = poisson::PoissonProblem<f64>;
pub type CostModel64 = cost::CostModel<f64>;
