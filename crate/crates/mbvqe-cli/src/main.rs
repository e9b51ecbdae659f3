//! Command-line front end: compile custom states, run experiments, and
//! verify the core correctness properties.
//!
//! Exit codes: 0 success, 1 configuration/validation error, 2 property failure.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use mbvqe::exec::Strategy;
use mbvqe::graphstate::{decorated_edge_state, CustomState};
use mbvqe::mbqc::{
    compile_layers, cx_pattern, simulate_raw_pattern, single_qubit_unitary_pattern, standardize,
};
use mbvqe::models::{SchwingerParams, ToricLattice};
use mbvqe::sim::{
    expectation, fidelity, mat2_chain, simulate_circuit, simulate_pattern, ux_matrix, uz_matrix,
    SimOutcomes, StateVector,
};
use mbvqe::stabilizer::{OutcomePolicy, PauliString, StabilizerTableau, C64};
use mbvqe::vqe::{
    run_schwinger_sweep, run_toric_sweep, toric_custom_state, Method, OptimizerConfig,
};

const CSV_SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(name = "mbvqe", about = "Measurement-based VQE toolkit", version)]
struct Cli {
    /// Path to a TOML config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// RNG seed (overrides config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (overrides config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for parallel grid execution (overrides config).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile custom states and write JSON, DOT, and a resource report.
    Compile,
    /// Run the configured experiment and write CSV curves plus a JSON summary.
    Run,
    /// Run the built-in property suites.
    Verify {
        /// Suite: all, eq-s1, determinism, backend, counts, gates, stabilizer.
        #[arg(long, default_value = "all")]
        suite: String,
        /// Number of random trials where a suite is sampled.
        #[arg(long)]
        trials: Option<usize>,
        /// Inject a known fault before verifying (test fixture):
        /// "corrupted-byproducts" flips one byproduct table entry.
        #[arg(long)]
        inject_fault: Option<String>,
    },
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunConfig {
    /// Which experiment `run` executes: "toric" or "schwinger".
    #[serde(default = "default_experiment")]
    experiment: String,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_out_dir")]
    out: String,
    /// Worker threads; 0 means "let the runtime decide".
    #[serde(default)]
    jobs: usize,
    #[serde(default)]
    toric: ToricConfig,
    #[serde(default)]
    schwinger: SchwingerConfig,
    #[serde(default)]
    optimizer: OptimizerSection,
}

fn default_experiment() -> String {
    "toric".into()
}

fn default_out_dir() -> String {
    "out".into()
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            experiment: default_experiment(),
            seed: 0,
            out: default_out_dir(),
            jobs: 0,
            toric: ToricConfig::default(),
            schwinger: SchwingerConfig::default(),
            optimizer: OptimizerSection::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ToricConfig {
    nx: usize,
    ny: usize,
    /// λ scenario: "uniform" (all qubits), "gaussian" (sampled around λ),
    /// or "single" (one qubit at λ, the rest near rest_mean).
    scenario: String,
    lambda_min: f64,
    lambda_max: f64,
    points: usize,
    /// Qubit index carrying λ in the "single" scenario.
    qubit: usize,
    /// Mean of the background couplings in the "single" scenario.
    rest_mean: f64,
    /// Variance of the background couplings in the "single" scenario.
    rest_var: f64,
    /// Variance scale for the "gaussian" scenario: σ² = sigma2_scale · λ.
    sigma2_scale: f64,
}

impl Default for ToricConfig {
    fn default() -> Self {
        ToricConfig {
            nx: 2,
            ny: 2,
            scenario: "uniform".into(),
            lambda_min: 0.0,
            lambda_max: 3.0,
            points: 13,
            qubit: 0,
            rest_mean: 0.1,
            rest_var: 1e-4,
            sigma2_scale: 0.1,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SchwingerConfig {
    sites: usize,
    layers: Vec<usize>,
    mu_min: f64,
    mu_max: f64,
    points: usize,
    j: f64,
    w: f64,
}

impl Default for SchwingerConfig {
    fn default() -> Self {
        SchwingerConfig {
            sites: 4,
            layers: vec![1, 2, 3],
            mu_min: -1.5,
            mu_max: 1.0,
            points: 11,
            j: 1.0,
            w: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OptimizerSection {
    method: String,
    max_evals: usize,
    tolerance: f64,
    restarts: usize,
    init_spread: f64,
    polish: bool,
}

impl Default for OptimizerSection {
    fn default() -> Self {
        let d = OptimizerConfig::default();
        OptimizerSection {
            method: "nelder-mead".into(),
            max_evals: d.max_evals,
            tolerance: d.tolerance,
            restarts: d.restarts,
            init_spread: d.init_spread,
            polish: d.polish,
        }
    }
}

impl RunConfig {
    fn load(cli: &Cli) -> Result<Self> {
        let mut cfg = match &cli.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("cannot read config {}", path.display()))?;
                toml::from_str::<RunConfig>(&text)
                    .with_context(|| format!("invalid config {}", path.display()))?
            }
            None => RunConfig::default(),
        };
        if let Some(seed) = cli.seed {
            cfg.seed = seed;
        }
        if let Some(out) = &cli.out {
            cfg.out = out.display().to_string();
        }
        if let Some(jobs) = cli.jobs {
            cfg.jobs = jobs;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        match self.experiment.as_str() {
            "toric" | "schwinger" => {}
            other => bail!("unknown experiment {other:?} (expected \"toric\" or \"schwinger\")"),
        }
        match self.toric.scenario.as_str() {
            "uniform" | "gaussian" | "single" => {}
            other => bail!(
                "unknown toric scenario {other:?} (expected \"uniform\", \"gaussian\", or \"single\")"
            ),
        }
        if self.toric.nx < 2 || self.toric.ny < 2 {
            bail!("toric lattice must be at least 2×2");
        }
        if self.toric.points < 2 || self.schwinger.points < 2 {
            bail!("sweeps need at least 2 points");
        }
        if self.schwinger.sites < 2 {
            bail!("Schwinger chain needs at least 2 sites");
        }
        if self.schwinger.layers.is_empty() || self.schwinger.layers.iter().any(|&k| k == 0) {
            bail!("schwinger.layers must list positive layer counts");
        }
        match self.optimizer.method.as_str() {
            "nelder-mead" | "spsa" => {}
            other => bail!("unknown optimizer method {other:?}"),
        }
        Ok(())
    }

    fn optimizer(&self) -> OptimizerConfig {
        OptimizerConfig {
            method: if self.optimizer.method == "spsa" { Method::Spsa } else { Method::NelderMead },
            max_evals: self.optimizer.max_evals,
            tolerance: self.optimizer.tolerance,
            seed: self.seed,
            restarts: self.optimizer.restarts,
            init_spread: self.optimizer.init_spread,
            polish: self.optimizer.polish,
        }
    }

    /// Every field, defaulted or not, printed so nothing is silent.
    fn announce(&self) {
        eprintln!("resolved configuration:");
        for line in toml::to_string_pretty(self).expect("serializable config").lines() {
            eprintln!("  {line}");
        }
    }
}

// ---------------------------------------------------------------------------
// Shared output helpers
// ---------------------------------------------------------------------------

fn config_echo(cfg: &RunConfig) -> serde_json::Value {
    serde_json::to_value(cfg).expect("serializable config")
}

fn csv_preamble(cfg: &RunConfig, curve: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# mbvqe-csv v{CSV_SCHEMA_VERSION} curve={curve}");
    let _ = writeln!(s, "# seed={}", cfg.seed);
    let _ = writeln!(s, "# config={}", serde_json::to_string(&config_echo(cfg)).unwrap());
    s
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))?;
    let path = dir.join(name);
    std::fs::write(&path, contents)
        .with_context(|| format!("cannot write {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(path)
}

fn custom_state_dot(custom: &CustomState, title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "graph \"{title}\" {{");
    let _ = writeln!(s, "  layout=neato; node [shape=circle, fontsize=10];");
    let slot_of: BTreeMap<usize, usize> =
        custom.plan.iter().map(|m| (m.node, m.slot)).collect();
    for v in 0..custom.num_nodes {
        if custom.outputs.contains(&v) {
            let _ = writeln!(s, "  n{v} [label=\"{v}\", style=filled, fillcolor=lightblue];");
        } else if let Some(slot) = slot_of.get(&v) {
            let _ = writeln!(s, "  n{v} [label=\"{v}\\nθ{slot}\"];");
        } else {
            let _ = writeln!(s, "  n{v} [label=\"{v}\"];");
        }
    }
    for (a, b) in &custom.edges {
        let _ = writeln!(s, "  n{a} -- n{b};");
    }
    let _ = writeln!(s, "}}");
    s
}

// ---------------------------------------------------------------------------
// compile
// ---------------------------------------------------------------------------

fn cmd_compile(cfg: &RunConfig) -> Result<()> {
    let out = PathBuf::from(&cfg.out);
    let mut reports = Vec::new();

    for &k in &cfg.schwinger.layers {
        let s = cfg.schwinger.sites;
        let pattern = compile_layers(s, k).map_err(|e| anyhow::anyhow!("{e}"))?;
        let custom = standardize(&pattern).map_err(|e| anyhow::anyhow!("{e}"))?;
        let stem = format!("schwinger_s{s}_k{k}");
        write_file(&out, &format!("{stem}.json"), &custom.to_json())?;
        write_file(&out, &format!("{stem}.dot"), &custom_state_dot(&custom, &stem))?;
        reports.push(serde_json::json!({
            "name": stem,
            "qubits": custom.num_nodes,
            "rotated_measurements": custom.plan.len(),
            "parameter_slots": custom.num_slots,
            "pauli_measurements_eliminated": pattern.pauli_count(),
            "raw_pattern_nodes": pattern.num_nodes,
        }));
    }

    let lattice = ToricLattice::new(cfg.toric.nx, cfg.toric.ny);
    let custom = toric_custom_state(&lattice);
    let stem = format!("toric_{}x{}", cfg.toric.nx, cfg.toric.ny);
    write_file(&out, &format!("{stem}.json"), &custom.to_json())?;
    write_file(&out, &format!("{stem}.dot"), &custom_state_dot(&custom, &stem))?;
    reports.push(serde_json::json!({
        "name": stem,
        "qubits": custom.num_nodes,
        "rotated_measurements": custom.plan.len(),
        "parameter_slots": custom.num_slots,
        "pauli_measurements_eliminated": 0,
        "raw_pattern_nodes": custom.num_nodes,
    }));

    let report = serde_json::json!({
        "config": config_echo(cfg),
        "seed": cfg.seed,
        "states": reports,
    });
    write_file(&out, "resources.json", &serde_json::to_string_pretty(&report)?)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

fn lambda_grid(t: &ToricConfig) -> Vec<f64> {
    (0..t.points)
        .map(|i| t.lambda_min + (t.lambda_max - t.lambda_min) * i as f64 / (t.points - 1) as f64)
        .collect()
}

fn lambda_sets(t: &ToricConfig, n_qubits: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x746f_7269);
    lambda_grid(t)
        .into_iter()
        .map(|lam| match t.scenario.as_str() {
            "uniform" => vec![lam; n_qubits],
            "gaussian" => {
                let sigma = (t.sigma2_scale * lam.abs()).sqrt();
                (0..n_qubits).map(|_| lam + sigma * gaussian(&mut rng)).collect()
            }
            "single" => {
                let sigma = t.rest_var.sqrt();
                let mut ls: Vec<f64> =
                    (0..n_qubits).map(|_| t.rest_mean + sigma * gaussian(&mut rng)).collect();
                ls[t.qubit] = lam;
                ls
            }
            _ => unreachable!("validated"),
        })
        .collect()
}

/// Standard normal draw via Box–Muller.
fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn cmd_run(cfg: &RunConfig) -> Result<()> {
    let out = PathBuf::from(&cfg.out);
    let opt = cfg.optimizer();
    let strategy = if cfg.jobs == 1 { Strategy::Sequential } else { Strategy::auto() };
    let mut summary_curves = Vec::new();

    match cfg.experiment.as_str() {
        "toric" => {
            let lattice = ToricLattice::new(cfg.toric.nx, cfg.toric.ny);
            let sets = lambda_sets(&cfg.toric, lattice.num_qubits(), cfg.seed);
            let grid = lambda_grid(&cfg.toric);
            let results = run_toric_sweep(&lattice, &sets, &opt);
            let mut csv = csv_preamble(cfg, "toric");
            csv.push_str(
                "lambda,energy,exact_energy,relative_error,infidelity,ansatz_energy,polarized_energy,evaluations\n",
            );
            for (lam, r) in grid.iter().zip(&results) {
                let _ = writeln!(
                    csv,
                    "{lam:.6},{:.12},{:.12},{:.3e},{:.3e},{:.12},{:.12},{}",
                    r.energy,
                    r.exact_energy,
                    r.relative_error(),
                    r.infidelity,
                    r.ansatz_energy,
                    r.polarized_energy,
                    r.trace.evaluations,
                );
            }
            write_file(&out, "toric_sweep.csv", &csv)?;
            summary_curves.push(serde_json::json!({
                "curve": "toric",
                "scenario": cfg.toric.scenario,
                "points": grid.len(),
                "max_relative_error": results
                    .iter().map(|r| r.relative_error()).fold(0.0, f64::max),
                "max_infidelity": results
                    .iter().map(|r| r.infidelity).fold(0.0, f64::max),
            }));
        }
        "schwinger" => {
            let grid: Vec<f64> = (0..cfg.schwinger.points)
                .map(|i| {
                    cfg.schwinger.mu_min
                        + (cfg.schwinger.mu_max - cfg.schwinger.mu_min) * i as f64
                            / (cfg.schwinger.points - 1) as f64
                })
                .collect();
            let base = SchwingerParams { j: cfg.schwinger.j, w: cfg.schwinger.w, mu: 0.0 };
            for &k in &cfg.schwinger.layers {
                let results = run_schwinger_sweep(
                    cfg.schwinger.sites,
                    k,
                    &grid,
                    &base,
                    &opt,
                    strategy,
                    true,
                );
                let mut csv = csv_preamble(cfg, &format!("schwinger-k{k}"));
                csv.push_str(
                    "mu,energy,exact_energy,relative_error,infidelity,order_parameter,exact_order_parameter,evaluations\n",
                );
                for r in &results {
                    let _ = writeln!(
                        csv,
                        "{:.6},{:.12},{:.12},{:.3e},{:.3e},{:.12},{:.12},{}",
                        r.mu,
                        r.energy,
                        r.exact_energy,
                        r.relative_error(),
                        r.infidelity,
                        r.order_parameter,
                        r.exact_order_parameter,
                        r.trace.evaluations,
                    );
                }
                write_file(&out, &format!("schwinger_k{k}.csv"), &csv)?;
                summary_curves.push(serde_json::json!({
                    "curve": format!("schwinger-k{k}"),
                    "points": grid.len(),
                    "max_relative_error": results
                        .iter().map(|r| r.relative_error()).fold(0.0, f64::max),
                    "max_infidelity": results
                        .iter().map(|r| r.infidelity).fold(0.0, f64::max),
                    "max_order_parameter_error": results
                        .iter()
                        .map(|r| (r.order_parameter - r.exact_order_parameter).abs())
                        .fold(0.0, f64::max),
                }));
            }
        }
        _ => unreachable!("validated"),
    }

    let summary = serde_json::json!({
        "config": config_echo(cfg),
        "seed": cfg.seed,
        "curves": summary_curves,
    });
    write_file(&out, "summary.json", &serde_json::to_string_pretty(&summary)?)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

struct SuiteOutcome {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn gadget_state() -> CustomState {
    let mut c = CustomState::bare(2, &[(0, 1)]);
    c.decorate_edge(0, 1).expect("fresh edge");
    c
}

fn random_angles(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI)).collect()
}

fn suite_eq_s1(trials: usize, seed: u64) -> SuiteOutcome {
    let custom = gadget_state();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 1.0f64;
    for _ in 0..trials {
        let theta = random_angles(&mut rng, 4);
        let report = simulate_pattern(&custom, &theta, SimOutcomes::AllZero).expect("valid");
        let amps = decorated_edge_state(theta[0], theta[1], theta[2], theta[3]);
        let reference = StateVector { ids: report.output_state.ids.clone(), amps: amps.to_vec() };
        let fid = fidelity(&report.output_state, &reference).expect("same register");
        worst = worst.min(fid);
    }
    SuiteOutcome {
        name: "eq-s1",
        passed: worst >= 1.0 - 1e-10,
        detail: format!("{trials} random angle quadruples, worst fidelity {worst:.3e}"),
    }
}

fn branch_agreement(custom: &CustomState, theta: &[f64], branches: usize, seed: u64) -> f64 {
    let reference = simulate_pattern(custom, theta, SimOutcomes::AllZero)
        .expect("valid")
        .output_state;
    let mut worst = 1.0f64;
    let aux: Vec<usize> = custom.plan.iter().map(|m| m.node).collect();
    if aux.len() <= 4 {
        // Exhaustive over all outcome assignments.
        for bits in 0..(1u32 << aux.len()) {
            let map: BTreeMap<usize, u8> = aux
                .iter()
                .enumerate()
                .map(|(i, &n)| (n, ((bits >> i) & 1) as u8))
                .collect();
            let st = simulate_pattern(custom, theta, SimOutcomes::Fixed(&map))
                .expect("valid")
                .output_state;
            worst = worst.min(fidelity(&st, &reference).expect("same register"));
        }
    } else {
        for b in 0..branches {
            let st = simulate_pattern(custom, theta, SimOutcomes::Random(seed ^ b as u64))
                .expect("valid")
                .output_state;
            worst = worst.min(fidelity(&st, &reference).expect("same register"));
        }
    }
    worst
}

fn suite_determinism(trials: usize, seed: u64, corrupt: bool) -> SuiteOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xdead);
    let mut worst = 1.0f64;

    let mut gadget = gadget_state();
    if corrupt {
        // Fault fixture: one flipped entry in the byproduct table must break
        // outcome independence.
        let node = gadget.outputs[0];
        gadget.byproducts.get_mut(&node).expect("output tracked").z_deps.insert(2);
    }
    for _ in 0..trials.min(10).max(3) {
        let theta = random_angles(&mut rng, gadget.num_slots);
        worst = worst.min(branch_agreement(&gadget, &theta, 16, rng.gen()));
    }

    for k in 1..=2usize {
        let pattern = compile_layers(4, k).expect("valid width");
        let custom = standardize(&pattern).expect("standardizes");
        let theta = random_angles(&mut rng, custom.num_slots);
        worst = worst.min(branch_agreement(&custom, &theta, 50, rng.gen()));
    }

    SuiteOutcome {
        name: "determinism",
        passed: worst >= 1.0 - 1e-10,
        detail: format!(
            "decorated edge (exhaustive branches) and compiled S=4 K≤2 (50 branches), worst fidelity {worst:.3e}"
        ),
    }
}

fn suite_backend(trials: usize, seed: u64) -> SuiteOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xbac4);
    let mut worst = 1.0f64;
    for k in 1..=3usize {
        let pattern = compile_layers(4, k).expect("valid width");
        let custom = standardize(&pattern).expect("standardizes");
        for _ in 0..trials.min(20).max(5) {
            let theta = random_angles(&mut rng, custom.num_slots);
            let mb = simulate_pattern(&custom, &theta, SimOutcomes::AllZero)
                .expect("valid")
                .output_state;
            let mut circuit = simulate_circuit(4, k, &theta).expect("valid");
            circuit.ids = mb.ids.clone();
            worst = worst.min(fidelity(&circuit, &mb).expect("same register"));
        }
    }
    SuiteOutcome {
        name: "backend-agreement",
        passed: worst >= 1.0 - 1e-8,
        detail: format!("circuit vs standardized pattern, S=4 K∈{{1,2,3}}, worst fidelity {worst:.3e}"),
    }
}

fn suite_counts() -> SuiteOutcome {
    let mut failures = Vec::new();
    for (s, k, qubits) in [(4usize, 1usize, 12usize), (4, 2, 20), (4, 3, 28)] {
        let pattern = compile_layers(s, k).expect("valid width");
        let custom = standardize(&pattern).expect("standardizes");
        if custom.num_nodes != qubits || custom.num_nodes != s * (2 * k + 1) {
            failures.push(format!("S={s} K={k}: {} qubits, expected {qubits}", custom.num_nodes));
        }
        if custom.plan.len() != 2 * k * s {
            failures.push(format!(
                "S={s} K={k}: {} rotated measurements, expected {}",
                custom.plan.len(),
                2 * k * s
            ));
        }
    }
    let toric = toric_custom_state(&ToricLattice::new(2, 2));
    if toric.num_nodes != 44 {
        failures.push(format!("toric 2×2: {} qubits, expected 44", toric.num_nodes));
    }
    SuiteOutcome {
        name: "counts",
        passed: failures.is_empty(),
        detail: if failures.is_empty() {
            "S(2K+1) qubits and 2KS rotated measurements; toric 2×2 has 44".into()
        } else {
            failures.join("; ")
        },
    }
}

fn random_state(rng: &mut ChaCha8Rng, ids: &[usize]) -> StateVector {
    let dim = 1usize << ids.len();
    let mut amps: Vec<C64> =
        (0..dim).map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
    let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut amps {
        *a /= norm;
    }
    StateVector { ids: ids.to_vec(), amps }
}

fn suite_gates(trials: usize, seed: u64) -> SuiteOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6a7e);
    let mut worst = 1.0f64;

    let single = single_qubit_unitary_pattern();
    for _ in 0..trials {
        let theta = random_angles(&mut rng, 3);
        let input = random_state(&mut rng, &single.inputs);
        let got = simulate_raw_pattern(&single, &theta, &input, SimOutcomes::Random(rng.gen()))
            .expect("valid");
        let u = mat2_chain(&[ux_matrix(theta[0]), uz_matrix(theta[1]), ux_matrix(theta[2])]);
        let mut want = input.clone();
        want.apply1(&u, want.ids[0]);
        want.ids = got.ids.clone();
        worst = worst.min(fidelity(&got, &want).expect("same register"));
    }

    let cx = cx_pattern();
    for _ in 0..trials {
        let input = random_state(&mut rng, &cx.inputs);
        let got = simulate_raw_pattern(&cx, &[], &input, SimOutcomes::Random(rng.gen()))
            .expect("valid");
        // CX with the first register qubit as control: flip the second bit
        // on the |1x⟩ amplitudes.
        let mut want = input.clone();
        want.amps.swap(2, 3);
        want.ids = got.ids.clone();
        worst = worst.min(fidelity(&got, &want).expect("same register"));
    }

    SuiteOutcome {
        name: "gate-patterns",
        passed: worst >= 1.0 - 1e-12,
        detail: format!("{trials} random inputs each for the 5-node and 15-node patterns, worst fidelity {worst:.3e}"),
    }
}

fn suite_stabilizer(trials: usize, seed: u64) -> SuiteOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x57ab);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let n = rng.gen_range(2..=6usize);
        let mut tab = StabilizerTableau::new(n);
        let mut sv = StateVector::new();
        for q in 0..n {
            sv.add_qubit(q, Some([C64::new(1.0, 0.0), C64::new(0.0, 0.0)]));
        }
        for _ in 0..rng.gen_range(8..25) {
            match rng.gen_range(0..4) {
                0 => {
                    let q = rng.gen_range(0..n);
                    tab.h(q);
                    sv.apply_gate1(mbvqe::stabilizer::Gate::H, q);
                }
                1 => {
                    let q = rng.gen_range(0..n);
                    tab.s(q);
                    sv.apply_gate1(mbvqe::stabilizer::Gate::S, q);
                }
                2 => {
                    let q = rng.gen_range(0..n);
                    tab.x(q);
                    sv.apply_gate1(mbvqe::stabilizer::Gate::X, q);
                }
                _ => {
                    let a = rng.gen_range(0..n);
                    let b = rng.gen_range(0..n);
                    if a != b {
                        tab.cz(a, b);
                        sv.cz(a, b);
                    }
                }
            }
        }
        // Compare expectation of a few random Pauli words: the tableau says
        // ±1 or 0, the dense value must match.
        for _ in 0..6 {
            let word: String = (0..n)
                .map(|_| ['I', 'X', 'Y', 'Z'][rng.gen_range(0..4)])
                .collect();
            let p = PauliString::parse(&word).expect("valid word");
            let tableau_val = match tab.clone().measure_pauli(&p, OutcomePolicy::FixedPlus) {
                Ok((out, true)) => {
                    if out == 0 {
                        1.0
                    } else {
                        -1.0
                    }
                }
                _ => 0.0,
            };
            let mut h = mbvqe::models::Hamiltonian::new(n);
            h.add(1.0, p);
            let dense = expectation(&sv, &h).expect("same register");
            worst = worst.max((tableau_val - dense).abs());
        }
    }
    SuiteOutcome {
        name: "stabilizer-oracle",
        passed: worst <= 1e-10,
        detail: format!("{trials} random Clifford circuits on ≤6 qubits, worst deviation {worst:.3e}"),
    }
}

fn cmd_verify(cfg: &RunConfig, suite: &str, trials: Option<usize>, fault: Option<&str>) -> Result<bool> {
    let corrupt = match fault {
        None => false,
        Some("corrupted-byproducts") => true,
        Some(other) => bail!("unknown fault fixture {other:?}"),
    };
    let seed = cfg.seed;
    let run = |name: &str| suite == "all" || suite == name;
    let mut outcomes = Vec::new();
    if run("eq-s1") {
        outcomes.push(suite_eq_s1(trials.unwrap_or(100), seed));
    }
    if run("determinism") {
        outcomes.push(suite_determinism(trials.unwrap_or(50), seed, corrupt));
    }
    if run("backend") {
        outcomes.push(suite_backend(trials.unwrap_or(20), seed));
    }
    if run("counts") {
        outcomes.push(suite_counts());
    }
    if run("gates") {
        outcomes.push(suite_gates(trials.unwrap_or(50), seed));
    }
    if run("stabilizer") {
        outcomes.push(suite_stabilizer(trials.unwrap_or(200), seed));
    }
    if outcomes.is_empty() {
        bail!(
            "unknown suite {suite:?} (expected all, eq-s1, determinism, backend, counts, gates, stabilizer)"
        );
    }
    let mut all_pass = true;
    for o in &outcomes {
        let tag = if o.passed { "PASS" } else { "FAIL" };
        if o.passed {
            println!("{tag} {}: {}", o.name, o.detail);
        } else {
            eprintln!("{tag} {}: {}", o.name, o.detail);
        }
        all_pass &= o.passed;
    }
    Ok(all_pass)
}

// ---------------------------------------------------------------------------

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if jobs > 0 {
            // Must happen before the first parallel call builds the pool.
            std::env::set_var("RAYON_NUM_THREADS", jobs.to_string());
        }
    }
    let cfg = match RunConfig::load(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    cfg.announce();
    let result = match &cli.command {
        Command::Compile => cmd_compile(&cfg).map(|_| true),
        Command::Run => cmd_run(&cfg).map(|_| true),
        Command::Verify { suite, trials, inject_fault } => {
            cmd_verify(&cfg, suite, *trials, inject_fault.as_deref())
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: property verification failed");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
