//! Variational Poisson objective
//! `E(r, theta) = r^2/2 <psi|A|psi> - r Re<f|psi>` with closed-form `r*`.
//!
//! `A` is the unit-spacing stencil and `f` is normalized; the grid spacing
//! and `||f||` are restored in [`CostModel::extract_solution`].

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ansatz::{amplitude_encode, build_ansatz, controlled_version, AnsatzFamily, AnsatzSpec};
use crate::circuit::{GateInstance, LogicalCircuit};
use crate::error::{Error, Result};
use crate::pauli::{
    estimate_expectation, measurement_bases, MeasurementPlan, Pauli, PauliString, PauliSum,
};
use crate::poisson::{laplacian_pauli_for, PoissonProblem};
use crate::scalar::Real;
use crate::sim::{expectation, run_statevector, Statevector};

/// Below this `<psi|A|psi>` the optimal `r` is undefined.
pub const DEGENERATE_A: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostBreakdown<T> {
    pub a_expectation: T,
    pub overlap: T,
    pub r: T,
    pub value: T,
    /// Standard errors, present in shot mode only.
    pub a_std_error: Option<f64>,
    pub overlap_std_error: Option<f64>,
    pub value_std_error: Option<f64>,
}

impl<T: Real> CostBreakdown<T> {
    fn exact(a: T, overlap: T, r: T) -> Self {
        Self {
            a_expectation: a,
            overlap,
            r,
            value: cost_value(a, overlap, r),
            a_std_error: None,
            overlap_std_error: None,
            value_std_error: None,
        }
    }
}

pub fn cost_value<T: Real>(a: T, overlap: T, r: T) -> T {
    T::of(0.5) * r * r * a - r * overlap
}

/// `r* = overlap / a`, the minimizer of the cost at fixed state.
pub fn optimal_r<T: Real>(a: T, overlap: T) -> Result<T> {
    if a.as_f64() <= DEGENERATE_A {
        return Err(Error::DegenerateA(a.as_f64()));
    }
    Ok(overlap / a)
}

/// Gradient-variance diagnostic over random parameter draws.
#[derive(Debug, Clone, PartialEq)]
pub struct PlateauReport {
    pub num_qubits: usize,
    pub family: Option<AnsatzFamily>,
    pub layers: usize,
    pub gradient_variance: f64,
    pub sample_size: usize,
    pub seed: u64,
}

/// Problem-bound cost evaluator. The ansatz and the source encoding are
/// built once; each evaluation binds parameters and simulates.
#[derive(Debug, Clone)]
pub struct CostModel<T> {
    problem: PoissonProblem<T>,
    ansatz: LogicalCircuit,
    operator: PauliSum<T>,
    plan: MeasurementPlan<T>,
    source_hat: Vec<T>,
    source_norm: T,
    encoder: LogicalCircuit,
}

impl<T: Real> CostModel<T> {
    pub fn new(problem: &PoissonProblem<T>, spec: &AnsatzSpec) -> Result<Self> {
        if spec.num_qubits != problem.num_qubits() {
            return Err(Error::DimensionMismatch(
                spec.num_qubits,
                problem.num_qubits(),
            ));
        }
        Self::with_circuit(problem, build_ansatz(spec)?)
    }

    /// Uses an arbitrary parameterized circuit as the ansatz.
    pub fn with_circuit(problem: &PoissonProblem<T>, ansatz: LogicalCircuit) -> Result<Self> {
        let n = problem.num_qubits();
        if ansatz.num_qubits() != n {
            return Err(Error::DimensionMismatch(ansatz.num_qubits(), n));
        }
        let operator = laplacian_pauli_for(n, problem.boundary(), T::one())?;
        let plan = measurement_bases(&operator)?;
        let source_norm = problem.source_norm();
        let source_hat: Vec<T> = problem.source().iter().map(|&v| v / source_norm).collect();
        let f64_source: Vec<f64> = source_hat.iter().map(|v| v.as_f64()).collect();
        let encoder = amplitude_encode(&f64_source, n)?;
        Ok(Self {
            problem: problem.clone(),
            ansatz,
            operator,
            plan,
            source_hat,
            source_norm,
            encoder,
        })
    }

    pub fn problem(&self) -> &PoissonProblem<T> {
        &self.problem
    }

    pub fn ansatz(&self) -> &LogicalCircuit {
        &self.ansatz
    }

    /// Unit-spacing Laplacian used by the cost.
    pub fn operator(&self) -> &PauliSum<T> {
        &self.operator
    }

    pub fn normalized_source(&self) -> &[T] {
        &self.source_hat
    }

    pub fn source_norm(&self) -> T {
        self.source_norm
    }

    pub fn num_parameters(&self) -> usize {
        self.ansatz.num_parameters()
    }

    /// `psi(theta) = U(theta)|0>`.
    pub fn state(&self, theta: &[f64]) -> Result<Statevector<T>> {
        run_statevector(&self.ansatz.bind_parameters(theta)?, None)
    }

    /// `Re<f|psi>` taken directly from the amplitudes.
    fn direct_overlap(&self, psi: &Statevector<T>) -> T {
        self.source_hat
            .iter()
            .zip(psi.amplitudes())
            .map(|(&f, a)| f * a.re)
            .sum()
    }

    /// `(|0>|f> + |1>|psi>)/sqrt(2)` assembled from amplitudes, ancilla on
    /// qubit `n`.
    fn extended_state(&self, psi: &Statevector<T>) -> Result<Statevector<T>> {
        let s = T::FRAC_1_SQRT_2();
        let amps = self
            .source_hat
            .iter()
            .map(|&f| Complex::new(f * s, T::zero()))
            .chain(psi.amplitudes().iter().map(|a| a * s))
            .collect();
        Statevector::from_amplitudes(amps)
    }

    /// Circuit preparing the extended state: the ancilla selects between the
    /// source encoder and the bound ansatz.
    pub fn extended_circuit(&self, theta: &[f64]) -> Result<LogicalCircuit> {
        let n = self.problem.num_qubits();
        let mut c = LogicalCircuit::new(n + 1)?;
        c.push(GateInstance::h(n))?;
        c.push(GateInstance::x(n))?;
        c.extend_from(&controlled_version(&self.encoder, n)?)?;
        c.push(GateInstance::x(n))?;
        c.extend_from(&controlled_version(
            &self.ansatz.bind_parameters(theta)?,
            n,
        )?)?;
        Ok(c)
    }

    fn ancilla_x(&self) -> Result<PauliSum<T>> {
        let n = self.problem.num_qubits();
        PauliSum::from_terms(
            n + 1,
            [(
                Complex::new(T::one(), T::zero()),
                PauliString::single(n + 1, n, Pauli::X),
            )],
        )
    }

    /// Ancilla-X expectation of the simulated extended-state circuit.
    pub fn extended_overlap(&self, theta: &[f64]) -> Result<T> {
        let state = run_statevector(&self.extended_circuit(theta)?, None)?;
        expectation(&state, &self.ancilla_x()?)
    }

    /// Exact `(a, overlap)` at `theta`. The overlap is cross-checked against
    /// the extended-state formulation.
    pub fn exact_terms(&self, theta: &[f64]) -> Result<(T, T)> {
        let psi = self.state(theta)?;
        let a = expectation(&psi, &self.operator)?;
        let overlap = self.direct_overlap(&psi);
        let ext = self.extended_state(&psi)?;
        let via_ext = expectation(&ext, &self.ancilla_x()?)?;
        debug_assert!(
            (via_ext - overlap).abs() <= T::tol() * T::of(10.0),
            "extended-state overlap {via_ext} != direct {overlap}"
        );
        Ok((a, overlap))
    }

    pub fn evaluate_exact(&self, theta: &[f64], r: T) -> Result<CostBreakdown<T>> {
        let (a, overlap) = self.exact_terms(theta)?;
        Ok(CostBreakdown::exact(a, overlap, r))
    }

    /// Exact breakdown at `r = r*`.
    pub fn evaluate_optimal(&self, theta: &[f64]) -> Result<CostBreakdown<T>> {
        let (a, overlap) = self.exact_terms(theta)?;
        Ok(CostBreakdown::exact(a, overlap, optimal_r(a, overlap)?))
    }

    /// Objective for the optimizer: the cost at `r*`, or 0 (`r = 0`) when
    /// the state is degenerate.
    pub fn objective(&self, theta: &[f64]) -> Result<T> {
        let (a, overlap) = self.exact_terms(theta)?;
        Ok(match optimal_r(a, overlap) {
            Ok(r) => cost_value(a, overlap, r),
            Err(_) => T::zero(),
        })
    }

    /// Shot-based breakdown: every Laplacian term is measured in its own
    /// basis and the overlap is read from the ancilla of the extended state.
    pub fn evaluate_shots(
        &self,
        theta: &[f64],
        r: T,
        shots: usize,
        seed: u64,
    ) -> Result<CostBreakdown<T>> {
        let mut master = ChaCha8Rng::seed_from_u64(seed);
        let (seed_a, seed_o): (u64, u64) = (master.gen(), master.gen());
        let psi = self.state(theta)?;
        let a = estimate_expectation(&psi, &self.plan, shots, seed_a)?;
        let ext = run_statevector(&self.extended_circuit(theta)?, None)?;
        let o_plan = measurement_bases(&self.ancilla_x()?)?;
        let o = estimate_expectation(&ext, &o_plan, shots, seed_o)?;
        let rf = r.as_f64();
        let value_se = ((0.5 * rf * rf * a.std_error).powi(2) + (rf * o.std_error).powi(2)).sqrt();
        let (a_t, o_t) = (T::of(a.mean), T::of(o.mean));
        Ok(CostBreakdown {
            a_expectation: a_t,
            overlap: o_t,
            r,
            value: cost_value(a_t, o_t, r),
            a_std_error: Some(a.std_error),
            overlap_std_error: Some(o.std_error),
            value_std_error: Some(value_se),
        })
    }

    /// Grid solution `u = r ||f|| h^2 Re psi(theta)`.
    pub fn extract_solution(&self, theta: &[f64], r: T) -> Result<Vec<T>> {
        let h = self.problem.grid_spacing();
        let scale = r * self.source_norm * h * h;
        Ok(self
            .state(theta)?
            .real_parts()
            .into_iter()
            .map(|v| v * scale)
            .collect())
    }

    /// Variance of the central difference of the cost in the first
    /// parameter, at `r = 1`, over `samples` uniform draws in `[0, 2pi)^P`.
    pub fn gradient_variance(&self, samples: usize, delta: f64, seed: u64) -> Result<f64> {
        if samples < 2 {
            return Err(Error::InvalidArgument(
                "plateau probe needs at least 2 samples".into(),
            ));
        }
        let p = self.num_parameters();
        if p == 0 {
            return Err(Error::InvalidArgument("ansatz has no parameters".into()));
        }
        if delta.is_nan() || delta <= 0.0 {
            return Err(Error::InvalidArgument(
                "finite-difference step must be positive".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tau = 2.0 * std::f64::consts::PI;
        let mut grads = Vec::with_capacity(samples);
        for _ in 0..samples {
            let mut theta: Vec<f64> = (0..p).map(|_| rng.gen::<f64>() * tau).collect();
            let t0 = theta[0];
            theta[0] = t0 + delta;
            let plus = self.evaluate_exact(&theta, T::one())?.value.as_f64();
            theta[0] = t0 - delta;
            let minus = self.evaluate_exact(&theta, T::one())?.value.as_f64();
            grads.push((plus - minus) / (2.0 * delta));
        }
        let mean = grads.iter().sum::<f64>() / samples as f64;
        Ok(grads.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / (samples - 1) as f64)
    }
}

fn check_theta(model_params: usize, theta: &[f64]) -> Result<()> {
    if theta.len() != model_params {
        return Err(Error::LengthMismatch {
            expected: model_params,
            got: theta.len(),
        });
    }
    Ok(())
}

pub fn evaluate_cost_exact<T: Real>(
    problem: &PoissonProblem<T>,
    spec: &AnsatzSpec,
    theta: &[f64],
    r: T,
) -> Result<CostBreakdown<T>> {
    check_theta(spec.num_parameters(), theta)?;
    CostModel::new(problem, spec)?.evaluate_exact(theta, r)
}

pub fn evaluate_cost_shots<T: Real>(
    problem: &PoissonProblem<T>,
    spec: &AnsatzSpec,
    theta: &[f64],
    r: T,
    shots: usize,
    seed: u64,
) -> Result<CostBreakdown<T>> {
    check_theta(spec.num_parameters(), theta)?;
    CostModel::new(problem, spec)?.evaluate_shots(theta, r, shots, seed)
}

pub fn extract_solution<T: Real>(
    problem: &PoissonProblem<T>,
    spec: &AnsatzSpec,
    theta: &[f64],
    r: T,
) -> Result<Vec<T>> {
    check_theta(spec.num_parameters(), theta)?;
    CostModel::new(problem, spec)?.extract_solution(theta, r)
}

pub fn plateau_probe<T: Real>(
    problem: &PoissonProblem<T>,
    spec: &AnsatzSpec,
    samples: usize,
    delta: f64,
    seed: u64,
) -> Result<PlateauReport> {
    let variance = CostModel::new(problem, spec)?.gradient_variance(samples, delta, seed)?;
    Ok(PlateauReport {
        num_qubits: spec.num_qubits,
        family: Some(spec.family),
        layers: spec.layers,
        gradient_variance: variance,
        sample_size: samples,
        seed,
    })
}
