use std::path::Path;
use std::process::{Command, Output};

use proptest::prelude::*;

use pvqa_cli::output::csv_bytes;
use pvqa_cli::pipeline::{plateau_sweep, PlateauRow};
use pvqa_cli::RunConfig;
use pvqa_core::ansatz::AnsatzFamily;

const GOLDEN: &str = r#"
[problem]
qubits = 2
bc = "dirichlet"
source = "ones"

[ansatz]
family = "mps"
layers = 2

[optimizer]
max_evals = 300

[execution]
seed = 1
"#;

/// Pinned so any change to the canonical form or a default is deliberate.
const GOLDEN_HASH: &str = "34ddddadf22c17f07cf56666597d2c9810a229f0c977771f611994992ffc3261";

fn pvqa(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pvqa"))
        .args(args)
        .current_dir(dir)
        .env_remove("PVQA_OUT")
        .output()
        .expect("binary runs")
}

fn header(path: &Path) -> String {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_string()
}

#[test]
fn config_hash_is_pinned() {
    let c = RunConfig::parse(GOLDEN).unwrap();
    assert_eq!(c.hash(), GOLDEN_HASH);
    assert_eq!(RunConfig::parse(&c.emit()).unwrap().hash(), GOLDEN_HASH);
}

#[test]
fn csv_headers_are_stable() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.toml"), GOLDEN).unwrap();
    let run = |args: &[&str]| assert!(pvqa(args, dir.path()).status.success(), "{args:?}");
    run(&["solve", "--config", "run.toml", "--out", "solve"]);
    run(&[
        "ablate-depth",
        "--min-qubits",
        "2",
        "--max-qubits",
        "3",
        "--out",
        "depth",
    ]);
    run(&[
        "ablate-fidelity",
        "--qubits",
        "2",
        "--families",
        "mps,ttn",
        "--out",
        "fid",
    ]);
    run(&[
        "plateau",
        "--max-qubits",
        "3",
        "--samples",
        "4",
        "--out",
        "plateau",
    ]);
    let d = dir.path();
    assert_eq!(
        header(&d.join("solve/solution.csv")),
        "grid_index,u_classical,u_quantum"
    );
    assert_eq!(header(&d.join("solve/trace.csv")), "eval,cost");
    assert_eq!(
        header(&d.join("solve/record.csv")),
        "config_hash,family,num_qubits,bc,mode,depth,cx_count,swap_count,fidelity_proxy,\
         fidelity_simulated,best_cost,lower_bound,r,overlap_vs_oracle,l2_relative_error,\
         evals_used,best_restart,converged,wall_time"
    );
    assert_eq!(
        header(&d.join("depth/depth.csv")),
        "n,variant,depth,cx_count,swap_count"
    );
    assert_eq!(
        header(&d.join("fid/fidelity.csv")),
        "family,fidelity_simulated,fidelity_proxy,swap_count"
    );
    assert_eq!(
        header(&d.join("plateau/plateau.csv")),
        "family,num_qubits,layers,gradient_variance,sample_size,seed"
    );
    assert!(!d.join("solve/record.csv.tmp").exists());
}

#[test]
fn default_run_directory_uses_hash() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.toml"), GOLDEN).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_pvqa"))
        .args(["solve", "--config", "run.toml"])
        .current_dir(dir.path())
        .env("PVQA_OUT", "root")
        .output()
        .unwrap();
    assert!(out.status.success());
    let hash = RunConfig::parse(GOLDEN).unwrap().hash();
    assert!(dir
        .path()
        .join("root")
        .join(format!("solve-{}", &hash[..12]))
        .join("record.csv")
        .exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("bad.toml"), GOLDEN.replace("dirichlet", "robin")).unwrap();
    assert_eq!(
        pvqa(&["solve", "--config", "bad.toml"], d).status.code(),
        Some(2)
    );
    assert_eq!(
        pvqa(&["solve", "--config", "missing.toml"], d)
            .status
            .code(),
        Some(2)
    );
    let ones_periodic = GOLDEN.replace("dirichlet", "periodic");
    std::fs::write(d.join("vanish.toml"), ones_periodic).unwrap();
    assert_eq!(
        pvqa(&["solve", "--config", "vanish.toml"], d).status.code(),
        Some(2)
    );

    std::fs::write(d.join("ok.toml"), GOLDEN).unwrap();
    std::fs::write(d.join("blocker"), "").unwrap();
    assert_eq!(
        pvqa(&["solve", "--config", "ok.toml", "--out", "blocker/run"], d)
            .status
            .code(),
        Some(4)
    );
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("run.toml"), GOLDEN).unwrap();
    for (seed, out) in [("1", "a"), ("1", "b"), ("2", "c")] {
        assert!(pvqa(
            &["solve", "--config", "run.toml", "--seed", seed, "--out", out],
            d
        )
        .status
        .success());
    }
    let trace = |o: &str| std::fs::read_to_string(d.join(o).join("trace.csv")).unwrap();
    assert_eq!(trace("a"), trace("b"));
    assert_ne!(trace("a"), trace("c"));
    let huge = pvqa(
        &[
            "solve",
            "--config",
            "run.toml",
            "--seed",
            "18446744073709551615",
        ],
        d,
    );
    assert_eq!(huge.status.code(), Some(2));
}

#[test]
fn plateau_matches_baseline() {
    let rows = plateau_sweep(&[AnsatzFamily::Hea], 2..=6, None, 200, 1e-4, 0).unwrap();
    let picked: Vec<PlateauRow> = rows
        .into_iter()
        .filter(|r| r.num_qubits == 2 || r.num_qubits == 6)
        .collect();
    let fresh = String::from_utf8(csv_bytes(&picked).unwrap()).unwrap();
    let baseline = include_str!("../../../docs/plateau_baseline.csv");
    for (a, b) in fresh.lines().zip(baseline.lines()).skip(1) {
        let va: f64 = a.split(',').nth(3).unwrap().parse().unwrap();
        let vb: f64 = b.split(',').nth(3).unwrap().parse().unwrap();
        assert!((va - vb).abs() <= 1e-9 * vb.abs(), "{a} vs {b}");
    }
    assert_eq!(fresh.lines().count(), baseline.lines().count());
    assert_eq!(fresh.lines().next(), baseline.lines().next());
    assert!(picked[1].gradient_variance < picked[0].gradient_variance);
}

fn arb_config() -> impl Strategy<Value = String> {
    (
        1usize..=6,
        prop::sample::select(vec!["dirichlet", "neumann", "periodic"]),
        prop::sample::select(vec!["hea", "mps", "custom-mps", "ttnpp"]),
        1usize..=4,
        prop::sample::select(vec!["nelder-mead", "powell"]),
        (1usize..5000, 0usize..10, 1e-3f64..10.0),
        prop::option::of(0..=i64::MAX as u64),
        (prop::bool::ANY, 1usize..100_000, 0..=i64::MAX as u64),
        prop::sample::select(vec!["linear", "none"]),
        prop::sample::select(vec!["ideal", "osaka-like"]),
    )
        .prop_map(|(n, bc, family, layers, method, (evals, restarts, scale), oseed, (shots, count, seed), coupling, noise)| {
            let oseed = oseed.map_or(String::new(), |s| format!("seed = {s}\n"));
            let mode = if shots { "shots" } else { "exact" };
            format!(
                "[problem]\nqubits = {n}\nbc = \"{bc}\"\nsource = \"alternating\"\n\
                 [ansatz]\nfamily = \"{family}\"\nlayers = {layers}\n\
                 [optimizer]\nmethod = \"{method}\"\nmax_evals = {evals}\nrestarts = {restarts}\nscale = {scale}\n{oseed}\
                 [execution]\nmode = \"{mode}\"\nshots = {count}\nseed = {seed}\n\
                 [transpile]\ncoupling = \"{coupling}\"\n\
                 [noise]\nprofile = \"{noise}\"\n"
            )
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn emit_parse_is_a_fixpoint(text in arb_config()) {
        let c = RunConfig::parse(&text).unwrap();
        let emitted = c.emit();
        let again = RunConfig::parse(&emitted).unwrap();
        prop_assert_eq!(&again, &c);
        prop_assert_eq!(again.emit(), emitted);
        prop_assert_eq!(again.hash(), c.hash());
    }
}
