use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::info;

use pvqa_core::ansatz::AnsatzFamily;
use pvqa_core::noise::noise_model_factory;
use pvqa_core::poisson::{laplacian_pauli_for, shift_pauli, BoundaryCondition};

use pvqa_cli::config::{CouplingKind, RunConfig};
use pvqa_cli::error::{CliError, CliResult};
use pvqa_cli::output;
use pvqa_cli::pipeline::{self, DepthVariant, FIDELITY_FAMILIES};

#[derive(Parser)]
#[command(
    name = "pvqa",
    version,
    about = "Variational Poisson solver and ablation harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one configured problem and write solution, trace and record CSVs.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides `execution.seed`.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Transpiled depth of the operator and ansatz building blocks.
    AblateDepth {
        #[arg(long, default_value_t = 2)]
        min_qubits: usize,
        #[arg(long, default_value_t = 8)]
        max_qubits: usize,
        #[arg(long, default_value = "periodic")]
        bc: BoundaryCondition,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Noisy fidelity of the tensor-network families on a linear chain.
    AblateFidelity {
        #[arg(long, default_value_t = 4)]
        qubits: usize,
        #[arg(long, value_delimiter = ',')]
        families: Vec<AnsatzFamily>,
        #[arg(long, default_value = "osaka-like")]
        noise: String,
        #[arg(long, value_delimiter = ',')]
        noise_params: Vec<f64>,
        #[arg(long, default_value_t = 2)]
        layers: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Gradient-variance sweep over qubit counts.
    Plateau {
        #[arg(long, value_delimiter = ',', default_value = "hea")]
        families: Vec<AnsatzFamily>,
        #[arg(long, default_value_t = 2)]
        min_qubits: usize,
        #[arg(long, default_value_t = 6)]
        max_qubits: usize,
        /// Defaults to one layer per qubit.
        #[arg(long)]
        layers: Option<usize>,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 1e-4)]
        delta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the Pauli decomposition of the shift or Laplacian operator.
    Decompose {
        #[arg(long, value_enum)]
        what: Operator,
        #[arg(long)]
        qubits: usize,
        #[arg(long, default_value = "periodic")]
        bc: BoundaryCondition,
        #[arg(long, default_value_t = 1.0)]
        grid_spacing: f64,
    },
    /// Print the transpiled depth of one building block.
    Depth {
        #[arg(long, value_enum)]
        circuit: Block,
        #[arg(long)]
        qubits: usize,
        #[arg(long, value_enum, default_value_t = Coupling::Linear)]
        coupling: Coupling,
        #[arg(long, default_value = "periodic")]
        bc: BoundaryCondition,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Operator {
    Shift,
    Laplacian,
}

#[derive(Clone, Copy, ValueEnum)]
enum Block {
    ShiftAdd,
    PauliTerm,
}

#[derive(Clone, Copy, ValueEnum)]
enum Coupling {
    Linear,
    None,
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Solve { config, out, seed } => {
            let mut cfg = RunConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.execution.seed = s;
                cfg.validate()?;
            }
            let hash = cfg.hash();
            let result = pipeline::run_solve(&cfg)?;
            let configured = cfg.output.directory.clone();
            let dir = output::resolve_dir(
                out.as_deref(),
                configured.as_deref(),
                &format!("solve-{}", &hash[..12]),
            );
            output::write_solve(&dir, &result)?;
            info!(
                "best cost {:.6e}, overlap {:.6}, written to {}",
                result.record.best_cost,
                result.record.overlap_vs_oracle,
                dir.display()
            );
            println!("{}", dir.display());
        }
        Command::AblateDepth {
            min_qubits,
            max_qubits,
            bc,
            out,
        } => {
            let rows = pipeline::depth_ablation(min_qubits..=max_qubits, &DepthVariant::ALL, bc)?;
            let dir = output::resolve_dir(out.as_deref(), None, "ablate-depth");
            output::write_csv(&dir.join(output::DEPTH_FILE), &rows)?;
            println!("{}", dir.display());
        }
        Command::AblateFidelity {
            qubits,
            families,
            noise,
            noise_params,
            layers,
            seed,
            out,
        } => {
            let families = if families.is_empty() {
                FIDELITY_FAMILIES.to_vec()
            } else {
                families
            };
            let model = noise_model_factory(&noise, &noise_params)?;
            let rows = pipeline::fidelity_ablation(qubits, &families, &model, layers, seed)?;
            let dir = output::resolve_dir(out.as_deref(), None, "ablate-fidelity");
            output::write_csv(&dir.join(output::FIDELITY_FILE), &rows)?;
            println!("{}", dir.display());
        }
        Command::Plateau {
            families,
            min_qubits,
            max_qubits,
            layers,
            samples,
            delta,
            seed,
            out,
        } => {
            let rows = pipeline::plateau_sweep(
                &families,
                min_qubits..=max_qubits,
                layers,
                samples,
                delta,
                seed,
            )?;
            let dir = output::resolve_dir(out.as_deref(), None, "plateau");
            output::write_csv(&dir.join(output::PLATEAU_FILE), &rows)?;
            println!("{}", dir.display());
        }
        Command::Decompose {
            what,
            qubits,
            bc,
            grid_spacing,
        } => {
            let sum = match what {
                Operator::Shift => shift_pauli::<f64>(qubits)?,
                Operator::Laplacian => laplacian_pauli_for::<f64>(qubits, bc, grid_spacing)?,
            };
            println!("{}", sum.to_text());
        }
        Command::Depth {
            circuit,
            qubits,
            coupling,
            bc,
        } => {
            let variant = match circuit {
                Block::ShiftAdd => DepthVariant::ShiftAddVchain,
                Block::PauliTerm => DepthVariant::PauliTermMax,
            };
            let coupling = match coupling {
                Coupling::Linear => CouplingKind::Linear,
                Coupling::None => CouplingKind::AllToAll,
            };
            let row = pipeline::depth_row(qubits, variant, bc, coupling)?;
            println!(
                "depth={} cx_count={} swap_count={}",
                row.depth, row.cx_count, row.swap_count
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::try_parse() {
        Ok(cli) => match run(cli) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(e.exit_code() as u8)
            }
        },
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() {
                CliError::Config(String::new()).exit_code()
            } else {
                0
            };
            ExitCode::from(code as u8)
        }
    }
}
