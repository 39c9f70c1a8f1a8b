//! Execution sessions. Sampler settings (mode, shots, seed) and transpiler
//! settings (coupling, noise) are fixed when a session is entered; circuit
//! builders never see them.

use std::cell::Cell;

use pvqa_core::cost::{cost_value, optimal_r, CostBreakdown, CostModel, DEGENERATE_A};
use pvqa_core::noise::{fidelity_product, NoiseModel};
use pvqa_core::sim::{run_density_with_noise, run_statevector, state_fidelity, Statevector};
use pvqa_core::transpile::{transpile, CouplingMap, PhysicalCircuit};
use pvqa_core::{LogicalCircuit, Result};

use crate::config::{CouplingKind, ExecutionMode};

/// Largest physical register simulated as a density matrix.
pub const MAX_SIMULATED_FIDELITY_QUBITS: usize = 8;

pub struct SamplerSession {
    mode: ExecutionMode,
    seed: u64,
    calls: Cell<u64>,
}

impl SamplerSession {
    pub fn enter(mode: ExecutionMode, seed: u64) -> Self {
        Self {
            mode,
            seed,
            calls: Cell::new(0),
        }
    }

    pub fn mode(&self) -> ExecutionMode {
        self.mode
    }

    /// Breakdown at `r`. In shot mode every call draws a fresh stream derived
    /// from the session seed and the call index.
    pub fn evaluate(
        &self,
        model: &CostModel<f64>,
        theta: &[f64],
        r: f64,
    ) -> Result<CostBreakdown<f64>> {
        match self.mode {
            ExecutionMode::Exact => model.evaluate_exact(theta, r),
            ExecutionMode::Shots(shots) => {
                let k = self.calls.get();
                self.calls.set(k + 1);
                let seed = self.seed ^ k.wrapping_mul(0x9E37_79B9_7F4A_7C15);
                model.evaluate_shots(theta, r, shots, seed)
            }
        }
    }

    /// Cost at the closed-form `r*` of the (estimated) terms; zero when the
    /// state is degenerate.
    pub fn objective(&self, model: &CostModel<f64>, theta: &[f64]) -> Result<f64> {
        let b = self.evaluate(model, theta, 1.0)?;
        Ok(if b.a_expectation <= DEGENERATE_A {
            0.0
        } else {
            let r = optimal_r(b.a_expectation, b.overlap)?;
            cost_value(b.a_expectation, b.overlap, r)
        })
    }
}

pub struct TranspilerSession {
    coupling: CouplingKind,
    noise: NoiseModel,
}

/// Metrics of one transpiled circuit.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalMetrics {
    pub depth: usize,
    pub cx_count: usize,
    pub swap_count: usize,
    pub fidelity_proxy: f64,
    pub fidelity_simulated: Option<f64>,
}

impl TranspilerSession {
    pub fn enter(coupling: CouplingKind, noise: NoiseModel) -> Self {
        Self { coupling, noise }
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    /// Expands MCX gates, decomposes to the basis and routes onto a register
    /// sized to the expanded circuit.
    pub fn run(&self, circuit: &LogicalCircuit) -> Result<PhysicalCircuit> {
        let (expanded, _) = pvqa_core::circuit::expand_mcx(circuit)?;
        let n = expanded.num_qubits();
        let coupling = match self.coupling {
            CouplingKind::Linear => CouplingMap::linear(n)?,
            CouplingKind::AllToAll => CouplingMap::all_to_all(n)?,
        };
        transpile(&expanded, &coupling, false)
    }

    /// Transpiles a bound circuit and scores it; the density simulation is
    /// skipped above [`MAX_SIMULATED_FIDELITY_QUBITS`].
    pub fn measure(&self, circuit: &LogicalCircuit) -> Result<PhysicalMetrics> {
        let phys = self.run(circuit)?;
        let fidelity_simulated = if phys.circuit().num_qubits() <= MAX_SIMULATED_FIDELITY_QUBITS {
            let ideal: Statevector<f64> = run_statevector(phys.circuit(), None)?;
            let rho = run_density_with_noise(phys.circuit(), &self.noise)?;
            Some(state_fidelity(&ideal, &rho)?)
        } else {
            None
        };
        Ok(PhysicalMetrics {
            depth: phys.depth(),
            cx_count: phys.cx_count(),
            swap_count: phys.swap_count(),
            fidelity_proxy: fidelity_product(&phys, &self.noise),
            fidelity_simulated,
        })
    }
}
