//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pvqa_cli::pipeline::{self, DepthVariant, SolveOutput};
use pvqa_cli::RunConfig;
use pvqa_core::ansatz::{AnsatzFamily, AnsatzSpec};
use pvqa_core::circuit::{GateInstance, LogicalCircuit};
use pvqa_core::cost::{evaluate_cost_exact, optimal_r};
use pvqa_core::matrix::CMatrix;
use pvqa_core::noise::{fidelity_product_logical, noise_model_factory, NoiseModel};
use pvqa_core::optimize::{minimize, Method, OptimizerConfig};
use pvqa_core::pauli::decompose_matrix;
use pvqa_core::poisson::{
    project_mean_zero, shift_circuit, shift_pauli, AncillaMode, BoundaryCondition, PoissonProblem,
};
use pvqa_core::sim::{
    run_density_with_noise, run_statevector, state_fidelity, unitary_matrix, Statevector,
};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn core<T>(r: pvqa_core::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn cli<T>(r: pvqa_cli::CliResult<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn pauli_round_trip() -> Check {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for n in 1..=4 {
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
        for _ in 0..100 {
            let m = CMatrix::<f64>::from_fn(1 << n, |_, _| {
                Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            let back = core(core(decompose_matrix(&m, 0.0))?.to_matrix())?;
            worst = worst.max(back.max_abs_diff(&m));
        }
    }
    let elapsed = start.elapsed();
    ensure(worst <= 1e-10, format!("max error {worst:e}"))?;
    ensure(
        elapsed < Duration::from_secs(30),
        format!("took {elapsed:?}"),
    )?;
    Ok(format!(
        "max error {worst:.1e} in {:.2}s",
        elapsed.as_secs_f64()
    ))
}

fn shift_equivalence() -> Check {
    for n in 1..=4 {
        let dim = 1 << n;
        let cyclic = CMatrix::<f64>::permutation(dim, |k| (k + 1) % dim);
        let circ: CMatrix<f64> = core(unitary_matrix(&core(shift_circuit(n, AncillaMode::None))?))?;
        let ps = core(core(shift_pauli::<f64>(n))?.to_matrix())?;
        ensure(
            circ.max_abs_diff(&cyclic) <= 1e-9,
            format!("circuit differs at n={n}"),
        )?;
        ensure(
            ps.max_abs_diff(&cyclic) <= 1e-9,
            format!("operator differs at n={n}"),
        )?;
        let vchain = core(shift_circuit(n, AncillaMode::VChain))?;
        let width = vchain.num_qubits();
        for k in 0..dim {
            let out: Statevector<f64> = core(run_statevector(
                &vchain,
                Some(&Statevector::basis(width, k)),
            ))?;
            let expected = Statevector::basis(width, (k + 1) % dim);
            let amp = core(out.inner(&expected))?;
            ensure(
                (amp - Complex::new(1.0, 0.0)).norm() <= 1e-9,
                format!("v-chain differs at n={n}, k={k}"),
            )?;
        }
    }
    Ok("n = 1..4, plain and v-chain".into())
}

fn solve_config(
    n: usize,
    bc: &str,
    source: &str,
    family: &str,
    layers: usize,
    restarts: usize,
    seed: u64,
) -> String {
    format!(
        "[problem]\nqubits = {n}\nbc = \"{bc}\"\nsource = \"{source}\"\n\n\
         [ansatz]\nfamily = \"{family}\"\nlayers = {layers}\n\n\
         [optimizer]\nmethod = \"nelder-mead\"\nmax_evals = 2000\nrestarts = {restarts}\n\n\
         [execution]\nmode = \"exact\"\nseed = {seed}\n"
    )
}

fn solve(text: &str) -> Result<SolveOutput, String> {
    cli(pipeline::run_solve(&cli(RunConfig::parse(text))?))
}

fn desk_scale_convergence() -> Check {
    let mut report = Vec::new();
    for n in 1..=3 {
        let start = Instant::now();
        let out = solve(&solve_config(n, "dirichlet", "ones", "mps", n, 5, 11))?;
        let elapsed = start.elapsed();
        let overlap = out.record.overlap_vs_oracle;
        ensure(overlap >= 0.99, format!("n={n}: overlap {overlap}"))?;
        ensure(
            elapsed < Duration::from_secs(60),
            format!("n={n}: took {elapsed:?}"),
        )?;
        report.push(format!("n={n} overlap {overlap:.6}"));
    }
    Ok(report.join(", "))
}

fn pathology_reproduction() -> Check {
    let out = solve(&solve_config(4, "periodic", "alternating", "hea", 4, 10, 3))?;
    let bound = out.record.lower_bound;
    ensure(!out.trace.is_empty(), "empty trace")?;
    let below = out.trace.iter().find(|t| t.cost < bound - 1e-8);
    ensure(
        below.is_none(),
        format!("cost {:?} below bound {bound}", below.map(|t| t.cost)),
    )?;
    let mut running = f64::INFINITY;
    let mut prev = f64::INFINITY;
    for t in &out.trace {
        running = running.min(t.cost);
        ensure(running <= prev, "running minimum increased")?;
        prev = running;
    }
    ensure(
        out.record.overlap_vs_oracle.is_finite(),
        "overlap not reported",
    )?;
    Ok(format!(
        "{} evals, best {:.6} vs bound {:.6}, overlap {:.4}",
        out.trace.len(),
        out.record.best_cost,
        bound,
        out.record.overlap_vs_oracle
    ))
}

fn depth_ordering() -> Check {
    let rows = cli(pipeline::depth_ablation(
        4..=8,
        &[DepthVariant::ShiftAddVchain, DepthVariant::PauliTermMax],
        BoundaryCondition::Periodic,
    ))?;
    let depth = |n: usize, v: DepthVariant| {
        rows.iter()
            .find(|r| r.n == n && r.variant == v.name())
            .map(|r| r.depth)
            .expect("row present")
    };
    let mut shift = Vec::new();
    for n in 4..=8 {
        let s = depth(n, DepthVariant::ShiftAddVchain);
        let p = depth(n, DepthVariant::PauliTermMax);
        ensure(s > p, format!("n={n}: shift-add {s} <= per-term {p}"))?;
        shift.push(s);
    }
    ensure(
        shift.windows(2).all(|w| w[1] > w[0]),
        format!("not strictly increasing: {shift:?}"),
    )?;
    Ok(format!("shift-add depths {shift:?}"))
}

fn fidelity_ordering() -> Check {
    let noise = core(noise_model_factory("osaka-like", &[]))?;
    let families = [
        AnsatzFamily::Mps,
        AnsatzFamily::CustomMps,
        AnsatzFamily::Ttn,
        AnsatzFamily::TtnPlusPlus,
    ];
    let rows = cli(pipeline::fidelity_ablation(4, &families, &noise, 2, 0))?;
    let (chain, tree) = rows.split_at(2);
    for c in chain {
        ensure(
            c.swap_count == 0,
            format!("{} used {} swaps", c.family, c.swap_count),
        )?;
        for t in tree {
            ensure(
                c.fidelity_simulated > t.fidelity_simulated,
                format!(
                    "{} {:.4} <= {} {:.4}",
                    c.family, c.fidelity_simulated, t.family, t.fidelity_simulated
                ),
            )?;
        }
    }
    for t in tree {
        ensure(t.swap_count >= 1, format!("{} used no swaps", t.family))?;
    }
    Ok(rows
        .iter()
        .map(|r| format!("{} {:.4}", r.family, r.fidelity_simulated))
        .collect::<Vec<_>>()
        .join(", "))
}

fn quadratic_r_identity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let boundaries = [
        BoundaryCondition::Dirichlet,
        BoundaryCondition::Periodic,
        BoundaryCondition::Neumann,
    ];
    let families = [
        AnsatzFamily::Hea,
        AnsatzFamily::Mps,
        AnsatzFamily::CustomMps,
        AnsatzFamily::TtnPlusPlus,
    ];
    let mut checked = 0;
    while checked < 50 {
        let n = rng.gen_range(1..=4);
        let bc = boundaries[rng.gen_range(0..3)];
        let mut f: Vec<f64> = (0..1 << n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if bc.is_singular() {
            f = project_mean_zero(&f);
        }
        let problem = core(PoissonProblem::with_unit_spacing(n, bc, f))?;
        let spec = core(AnsatzSpec::new(
            families[rng.gen_range(0..4)],
            n,
            rng.gen_range(1..=3),
        ))?;
        let theta: Vec<f64> = (0..spec.num_parameters())
            .map(|_| rng.gen_range(0.0..6.3))
            .collect();
        let terms = core(evaluate_cost_exact(&problem, &spec, &theta, 1.0))?;
        let (a, o) = (terms.a_expectation, terms.overlap);
        let Ok(r) = optimal_r(a, o) else { continue };
        let at = core(evaluate_cost_exact(&problem, &spec, &theta, r))?.value;
        ensure(
            (at + 0.5 * o * o / a).abs() <= 1e-9,
            format!("E(r*) = {at} vs {}", -0.5 * o * o / a),
        )?;
        for dr in [-0.1, 0.1] {
            let off = core(evaluate_cost_exact(&problem, &spec, &theta, r + dr))?.value;
            ensure(at <= off, format!("E(r*) = {at} > E(r* {dr:+}) = {off}"))?;
        }
        checked += 1;
    }
    Ok("50 random cases".into())
}

fn optimizer_suite() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for method in [Method::NelderMead, Method::Powell] {
        let cfg = OptimizerConfig {
            method,
            max_evals: 2000,
            ..OptimizerConfig::default()
        };
        for d in 1..=6 {
            for _ in 0..4 {
                let b: Vec<Vec<f64>> = (0..d)
                    .map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect())
                    .collect();
                let c: Vec<f64> = (0..d).map(|_| rng.gen_range(-3.0..3.0)).collect();
                let f = |x: &[f64]| {
                    let y: Vec<f64> = x.iter().zip(&c).map(|(a, b)| a - b).collect();
                    let by: f64 = b
                        .iter()
                        .map(|row| row.iter().zip(&y).map(|(p, q)| p * q).sum::<f64>().powi(2))
                        .sum();
                    by + 0.5 * y.iter().map(|v| v * v).sum::<f64>()
                };
                let t = minimize(f, &vec![0.0; d], &cfg);
                let err = t
                    .best_x
                    .iter()
                    .zip(&c)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                ensure(err <= 1e-5, format!("{method} d={d}: error {err:e}"))?;
                ensure(
                    t.evals_used <= 2000,
                    format!("{method} d={d}: {} evals", t.evals_used),
                )?;
            }
        }
        let toy = OptimizerConfig { scale: 10.0, ..cfg };
        let t = minimize(|x: &[f64]| (x[0].abs() - 5.0).max(0.0), &[0.1], &toy);
        ensure(t.best_f == 0.0, format!("{method}: toy best {}", t.best_f))?;
        let flat = |x: &[f64]| {
            if x[0].abs() < 5.0 {
                1.0
            } else {
                (6.0 - x[0].abs()).max(0.0)
            }
        };
        let t = minimize(flat, &[0.1], &toy);
        ensure(
            t.best_f == 0.0,
            format!("{method}: flat toy best {}", t.best_f),
        )?;
    }
    Ok("quadratics d = 1..6 and plateau toys, both methods".into())
}

fn noise_sanity() -> Check {
    let mut c = LogicalCircuit::new(3).map_err(|e| e.to_string())?;
    for g in [
        GateInstance::h(0),
        GateInstance::cx(0, 1),
        GateInstance::ccx(0, 1, 2),
        GateInstance::x(2),
    ] {
        core(c.push(g))?;
    }
    let zero = core(NoiseModel::new(0.0, 0.0, 0.0))?;
    ensure(
        fidelity_product_logical(&c, &zero) == 1.0,
        "fidelity product != 1 at zero noise",
    )?;
    for p in [0.01, 0.1] {
        let mut x = core(LogicalCircuit::new(1))?;
        core(x.push(GateInstance::x(0)))?;
        let rho = core(run_density_with_noise::<f64>(
            &x,
            &core(NoiseModel::new(p, 0.0, 0.0))?,
        ))?;
        let fid = core(state_fidelity(&Statevector::basis(1, 1), &rho))?;
        ensure(
            (fid - (1.0 - p / 2.0)).abs() <= 1e-10,
            format!("p={p}: fidelity {fid}"),
        )?;
    }
    Ok("p = 0.01, 0.1".into())
}

/// CSV text with the trailing `wall_time` column removed from record files.
fn comparable(path: &Path) -> Result<String, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    if path.file_name().is_some_and(|f| f == "record.csv") {
        Ok(text
            .lines()
            .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head))
            .collect::<Vec<_>>()
            .join("\n"))
    } else {
        Ok(text)
    }
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = dir.path().join("run.toml");
    std::fs::write(
        &config,
        solve_config(3, "neumann", "alternating", "mps", 2, 2, 5),
    )
    .map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let status = Command::new(env!("CARGO_BIN_EXE_pvqa"))
            .args(["solve", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .output()
            .map_err(|e| e.to_string())?;
        ensure(
            status.status.success(),
            format!("exit {:?}", status.status.code()),
        )?;
        outputs.push(out);
    }
    for file in ["solution.csv", "trace.csv", "record.csv"] {
        let a = comparable(&outputs[0].join(file))?;
        let b = comparable(&outputs[1].join(file))?;
        ensure(a == b, format!("{file} differs"))?;
    }
    Ok("solution, trace and record identical".into())
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("pauli round-trip", pauli_round_trip),
        ("shift equivalence", shift_equivalence),
        ("desk-scale convergence", desk_scale_convergence),
        ("pathology reproduction", pathology_reproduction),
        ("depth ordering", depth_ordering),
        ("fidelity ordering", fidelity_ordering),
        ("quadratic-r identity", quadratic_r_identity),
        ("optimizer suite", optimizer_suite),
        ("noise sanity", noise_sanity),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
