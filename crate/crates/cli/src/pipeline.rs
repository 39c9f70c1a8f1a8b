//! End-to-end studies: solve, depth ablation, fidelity ablation and the
//! plateau sweep. Each returns plain rows; writing is left to `output`.

use std::f64::consts::TAU;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use pvqa_core::ansatz::{build_ansatz, AnsatzFamily, AnsatzSpec};
use pvqa_core::cost::{CostModel, PlateauReport};
use pvqa_core::noise::NoiseModel;
use pvqa_core::optimize::minimize;
use pvqa_core::oracle::{compare_to_reference, cost_lower_bound, solve_classical, Gauge};
use pvqa_core::pauli::measurement_bases;
use pvqa_core::poisson::{
    laplacian_pauli_for, project_mean_zero, shift_circuit, AncillaMode, BoundaryCondition,
    PoissonProblem,
};
use pvqa_core::{Error as CoreError, LogicalCircuit};

use crate::config::{CouplingKind, RunConfig};
use crate::error::{CliError, CliResult};
use crate::session::{SamplerSession, TranspilerSession};

/// One configuration's metrics. `wall_time` is last so it can be dropped
/// when comparing runs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationRecord {
    pub config_hash: String,
    pub family: String,
    pub num_qubits: usize,
    pub bc: String,
    pub mode: String,
    pub depth: usize,
    pub cx_count: usize,
    pub swap_count: usize,
    pub fidelity_proxy: f64,
    pub fidelity_simulated: Option<f64>,
    pub best_cost: f64,
    pub lower_bound: f64,
    pub r: f64,
    pub overlap_vs_oracle: f64,
    pub l2_relative_error: f64,
    pub evals_used: usize,
    pub best_restart: usize,
    pub converged: bool,
    pub wall_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionRow {
    pub grid_index: usize,
    pub u_classical: f64,
    pub u_quantum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub eval: usize,
    pub cost: f64,
}

#[derive(Debug, Clone)]
pub struct SolveOutput {
    pub record: AblationRecord,
    pub solution: Vec<SolutionRow>,
    pub trace: Vec<TraceRow>,
    pub best_theta: Vec<f64>,
}

pub fn run_solve(config: &RunConfig) -> CliResult<SolveOutput> {
    let start = Instant::now();
    let problem = config.problem()?;
    let spec = config.ansatz_spec()?;
    let reference = solve_classical(&problem)?;
    let lower_bound = cost_lower_bound(&problem)?;
    let model = CostModel::new(&problem, &spec)?;
    let sampler = SamplerSession::enter(config.mode()?, config.execution.seed);
    let opt = config.optimizer_config()?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.execution.seed);
    let x0: Vec<f64> = (0..model.num_parameters())
        .map(|_| rng.gen::<f64>() * TAU)
        .collect();
    let mut failure: Option<CoreError> = None;
    let trace = minimize(
        |theta: &[f64]| match sampler.objective(&model, theta) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::INFINITY
            }
        },
        &x0,
        &opt,
    );
    if let Some(e) = failure {
        return Err(e.into());
    }

    let best = model.evaluate_optimal(&trace.best_x).map_err(|e| match e {
        CoreError::DegenerateA(a) => CliError::Numerical(format!(
            "<psi|A|psi> = {a:e} at the best parameters after {} restarts",
            opt.restarts
        )),
        other => other.into(),
    })?;
    let mut u_quantum = model.extract_solution(&trace.best_x, best.r)?;
    if reference.gauge == Gauge::MeanZero {
        u_quantum = project_mean_zero(&u_quantum);
    }
    let comparison = compare_to_reference(&reference, &u_quantum)?;

    let transpiler = TranspilerSession::enter(config.coupling()?, config.noise_model()?);
    let bound = model.ansatz().bind_parameters(&trace.best_x)?;
    let metrics = transpiler.measure(&bound)?;

    let record = AblationRecord {
        config_hash: config.hash(),
        family: spec.family.name().to_string(),
        num_qubits: spec.num_qubits,
        bc: problem.boundary().name().to_string(),
        mode: config.execution.mode.clone(),
        depth: metrics.depth,
        cx_count: metrics.cx_count,
        swap_count: metrics.swap_count,
        fidelity_proxy: metrics.fidelity_proxy,
        fidelity_simulated: metrics.fidelity_simulated,
        best_cost: trace.best_f,
        lower_bound,
        r: best.r,
        overlap_vs_oracle: comparison.overlap,
        l2_relative_error: comparison.l2_relative_error,
        evals_used: trace.evals_used,
        best_restart: trace.best_restart,
        converged: trace.converged,
        wall_time: start.elapsed().as_secs_f64(),
    };
    let solution = reference
        .u
        .iter()
        .zip(&u_quantum)
        .enumerate()
        .map(|(i, (&c, &q))| SolutionRow {
            grid_index: i,
            u_classical: c,
            u_quantum: q,
        })
        .collect();
    let trace_rows = trace
        .history
        .iter()
        .map(|&(eval, cost)| TraceRow { eval, cost })
        .collect();
    Ok(SolveOutput {
        record,
        solution,
        trace: trace_rows,
        best_theta: trace.best_x,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DepthVariant {
    ShiftAddVchain,
    PauliTermMax,
    HeaLayer,
    TtnppLayer,
}

impl DepthVariant {
    pub const ALL: [DepthVariant; 4] = [
        DepthVariant::ShiftAddVchain,
        DepthVariant::PauliTermMax,
        DepthVariant::HeaLayer,
        DepthVariant::TtnppLayer,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DepthVariant::ShiftAddVchain => "shift-add-vchain",
            DepthVariant::PauliTermMax => "pauli-term-max",
            DepthVariant::HeaLayer => "hea-layer",
            DepthVariant::TtnppLayer => "ttnpp-layer",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DepthRow {
    pub n: usize,
    pub variant: String,
    pub depth: usize,
    pub cx_count: usize,
    pub swap_count: usize,
}

/// Basis-change-and-measure fragment of every non-identity Laplacian term.
fn term_fragments(n: usize, bc: BoundaryCondition) -> CliResult<Vec<LogicalCircuit>> {
    let plan = measurement_bases(&laplacian_pauli_for::<f64>(n, bc, 1.0)?)?;
    plan.bases
        .into_iter()
        .map(|b| {
            let mut c = b.rotation;
            c.measure_all()?;
            Ok(c)
        })
        .collect()
}

fn one_layer(family: AnsatzFamily, n: usize) -> CliResult<LogicalCircuit> {
    let spec = AnsatzSpec::new(family, n, 1).map_err(CliError::config)?;
    let theta: Vec<f64> = (0..spec.num_parameters())
        .map(|i| 0.1 * (i + 1) as f64)
        .collect();
    Ok(build_ansatz(&spec)?.bind_parameters(&theta)?)
}

pub fn depth_row(
    n: usize,
    variant: DepthVariant,
    bc: BoundaryCondition,
    coupling: CouplingKind,
) -> CliResult<DepthRow> {
    let session = TranspilerSession::enter(coupling, NoiseModel::ideal());
    let phys = match variant {
        DepthVariant::ShiftAddVchain => session.run(&shift_circuit(n, AncillaMode::VChain)?)?,
        DepthVariant::PauliTermMax => {
            let mut deepest = None;
            for frag in term_fragments(n, bc)? {
                let p = session.run(&frag)?;
                if deepest
                    .as_ref()
                    .is_none_or(|d: &pvqa_core::PhysicalCircuit| p.depth() > d.depth())
                {
                    deepest = Some(p);
                }
            }
            deepest.ok_or_else(|| CliError::Numerical("operator has no measurable terms".into()))?
        }
        DepthVariant::HeaLayer | DepthVariant::TtnppLayer => {
            let family = if variant == DepthVariant::HeaLayer {
                AnsatzFamily::Hea
            } else {
                AnsatzFamily::TtnPlusPlus
            };
            let layer = one_layer(family, n)?;
            let mut best: Option<pvqa_core::PhysicalCircuit> = None;
            for frag in term_fragments(n, bc)? {
                let p = session.run(&layer.compose(&frag)?)?;
                if best.as_ref().is_none_or(|b| p.depth() > b.depth()) {
                    best = Some(p);
                }
            }
            best.ok_or_else(|| CliError::Numerical("operator has no measurable terms".into()))?
        }
    };
    Ok(DepthRow {
        n,
        variant: variant.name().to_string(),
        depth: phys.depth(),
        cx_count: phys.cx_count(),
        swap_count: phys.swap_count(),
    })
}

pub fn depth_ablation(
    qubits: std::ops::RangeInclusive<usize>,
    variants: &[DepthVariant],
    bc: BoundaryCondition,
) -> CliResult<Vec<DepthRow>> {
    if *qubits.start() < 2 || *qubits.end() > 10 || qubits.is_empty() {
        return Err(CliError::Config(
            "depth ablation qubit range must lie within 2..=10".into(),
        ));
    }
    let mut rows = Vec::new();
    for n in qubits {
        for &v in variants {
            rows.push(depth_row(n, v, bc, CouplingKind::Linear)?);
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FidelityRow {
    pub family: String,
    pub fidelity_simulated: f64,
    pub fidelity_proxy: f64,
    pub swap_count: usize,
}

pub const FIDELITY_FAMILIES: [AnsatzFamily; 4] = [
    AnsatzFamily::Mps,
    AnsatzFamily::CustomMps,
    AnsatzFamily::Ttn,
    AnsatzFamily::TtnPlusPlus,
];

/// Transpiles each family onto a linear chain at seeded random parameters
/// and scores the noisy output against the ideal state.
pub fn fidelity_ablation(
    n: usize,
    families: &[AnsatzFamily],
    noise: &NoiseModel,
    layers: usize,
    seed: u64,
) -> CliResult<Vec<FidelityRow>> {
    if n > 8 {
        return Err(CliError::Config(
            "fidelity ablation supports at most 8 qubits".into(),
        ));
    }
    let session = TranspilerSession::enter(CouplingKind::Linear, *noise);
    families
        .iter()
        .map(|&family| {
            if !FIDELITY_FAMILIES.contains(&family) {
                return Err(CliError::Config(format!(
                    "fidelity ablation covers tensor-network families only, got `{family}`"
                )));
            }
            let spec = AnsatzSpec::new(family, n, layers).map_err(CliError::config)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let theta: Vec<f64> = (0..spec.num_parameters())
                .map(|_| rng.gen::<f64>() * TAU)
                .collect();
            let bound = build_ansatz(&spec)?.bind_parameters(&theta)?;
            let m = session.measure(&bound)?;
            Ok(FidelityRow {
                family: family.name().to_string(),
                fidelity_simulated: m.fidelity_simulated.expect("at most 8 qubits"),
                fidelity_proxy: m.fidelity_proxy,
                swap_count: m.swap_count,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlateauRow {
    pub family: String,
    pub num_qubits: usize,
    pub layers: usize,
    pub gradient_variance: f64,
    pub sample_size: usize,
    pub seed: u64,
}

impl From<PlateauReport> for PlateauRow {
    fn from(r: PlateauReport) -> Self {
        Self {
            family: r
                .family
                .map_or_else(|| "custom".to_string(), |f| f.name().to_string()),
            num_qubits: r.num_qubits,
            layers: r.layers,
            gradient_variance: r.gradient_variance,
            sample_size: r.sample_size,
            seed: r.seed,
        }
    }
}

/// Gradient-variance sweep on a Dirichlet problem with a constant source.
/// `layers = None` uses `L = n`. TTN is skipped where it is undefined.
pub fn plateau_sweep(
    families: &[AnsatzFamily],
    qubits: std::ops::RangeInclusive<usize>,
    layers: Option<usize>,
    samples: usize,
    delta: f64,
    seed: u64,
) -> CliResult<Vec<PlateauRow>> {
    let mut rows = Vec::new();
    for &family in families {
        for n in qubits.clone() {
            if family == AnsatzFamily::Ttn && !n.is_power_of_two() {
                continue;
            }
            let problem = PoissonProblem::with_unit_spacing(
                n,
                BoundaryCondition::Dirichlet,
                vec![1.0; 1 << n],
            )?;
            let spec = AnsatzSpec::new(family, n, layers.unwrap_or(n)).map_err(CliError::config)?;
            let report = pvqa_core::cost::plateau_probe(&problem, &spec, samples, delta, seed)?;
            rows.push(report.into());
        }
    }
    Ok(rows)
}
