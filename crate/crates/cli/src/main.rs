//! `optosim` command-line driver.
//!
//! Exit codes: 0 on success, 2 on configuration errors, 3 on runtime errors.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use optosim::circuit::{from_qasm, to_qasm, Circuit};
use optosim::digitizer::build_evolution_circuit;
use optosim::experiment::{emit_outputs, point_seed, run_point, run_sweep, ExperimentConfig, Setup};
use optosim::tomography::{analytic_confusion, calibrate_confusion, ConfusionMatrix};
use optosim::transpiler::transpile;
use optosim::Error;

#[derive(Parser, Debug)]
#[command(name = "optosim", version, about = "Digitized optomechanical interaction: circuits, noisy simulation, tomography")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run an ε sweep and write results.csv, report.json and optional QASM files.
    Sweep(Common),
    /// Build the evolution circuit for one ε and print it as OpenQASM 2.0.
    Circuit {
        #[command(flatten)]
        common: Common,
        /// Leave out the ground-state preparation.
        #[arg(long)]
        no_prep: bool,
        /// Write the QASM here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Lower, route and simplify a circuit for the configured topology.
    Transpile {
        #[command(flatten)]
        common: Common,
        /// OpenQASM 2.0 input; the evolution circuit at --epsilon when absent.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Calibrate the readout confusion matrix of the measured qubits.
    Calibrate(Common),
    /// Run the full tomography pipeline at a single ε and print the details.
    Tomography(Common),
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    /// JSON configuration file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// ε value(s), comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    epsilon: Vec<f64>,
    /// Shots per measurement setting.
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// none, belem-like or nairobi-like.
    #[arg(long)]
    noise_preset: Option<String>,
    /// belem-like, nairobi-like, full-N or line-N.
    #[arg(long)]
    topology: Option<String>,
    #[arg(long)]
    no_mitigation: bool,
    #[arg(long)]
    no_postselect: bool,
    /// Exact probabilities instead of sampling (readout noise only).
    #[arg(long)]
    analytic: bool,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    /// Also write one QASM file per ε (sweep only).
    #[arg(long)]
    export_qasm: bool,
}

impl Common {
    fn config(&self) -> optosim::Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if !self.epsilon.is_empty() {
            cfg.epsilon_values = self.epsilon.clone();
        }
        if let Some(s) = self.shots {
            cfg.shots = s;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(p) = &self.noise_preset {
            cfg.noise_preset = p.clone();
        }
        if let Some(t) = &self.topology {
            cfg.topology = t.clone();
            cfg.topology_file = None;
        }
        if self.no_mitigation {
            cfg.mitigation = false;
        }
        if self.no_postselect {
            cfg.postselection = false;
        }
        if self.analytic {
            cfg.analytic = true;
        }
        if let Some(d) = &self.out_dir {
            cfg.out_dir = d.clone();
        }
        if self.workers.is_some() {
            cfg.workers = self.workers;
        }
        if self.export_qasm {
            cfg.export_qasm = true;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// The single ε of a per-point command.
    fn single_epsilon(&self, cfg: &ExperimentConfig) -> optosim::Result<f64> {
        match cfg.epsilon_values.as_slice() {
            [e] => Ok(*e),
            _ if self.epsilon.is_empty() => Err(Error::Config {
                field: "epsilon".into(),
                msg: "this command needs exactly one --epsilon".into(),
            }),
            _ => Err(Error::Config {
                field: "epsilon".into(),
                msg: "give a single value".into(),
            }),
        }
    }
}

fn write_or_print(output: Option<&PathBuf>, text: &str) -> optosim::Result<()> {
    match output {
        Some(path) => Ok(fs::write(path, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> optosim::Result<()> {
    match cli.command {
        Command::Sweep(common) => {
            let cfg = common.config()?;
            let table = run_sweep(&cfg)?;
            let files = emit_outputs(&table, &cfg)?;
            println!(
                "{}",
                json!({
                    "points": table.rows.len(),
                    "mean_fidelity": table.mean_fidelity(),
                    "csv": files.csv,
                    "json": files.json,
                    "qasm": files.qasm,
                })
            );
        }
        Command::Circuit { common, no_prep, output } => {
            let cfg = common.config()?;
            let eps = common.single_epsilon(&cfg)?;
            let c = build_evolution_circuit(eps, !no_prep)?;
            let counts = c.gate_counts();
            log::info!("{} single-qubit gates, {} CNOTs", counts.single_qubit, counts.cnot);
            write_or_print(output.as_ref(), &to_qasm(&c))?;
        }
        Command::Transpile { common, input, output } => {
            let cfg = ExperimentConfig {
                transpile: true,
                ..common.config()?
            };
            let c: Circuit = match &input {
                Some(path) => from_qasm(&fs::read_to_string(path)?)?,
                None => build_evolution_circuit(common.single_epsilon(&cfg)?, true)?,
            };
            let topo = cfg.resolve_topology()?;
            let layout = cfg.resolve_layout(&topo)?;
            let before = c.gate_counts();
            let routed = transpile(&c, &topo, &layout)?;
            let after = routed.circuit.gate_counts();
            eprintln!(
                "{}",
                json!({
                    "topology": topo.name,
                    "layout": layout.as_slice(),
                    "final_placement": routed.final_placement,
                    "swaps": routed.swaps,
                    "before": { "single_qubit": before.single_qubit, "cnot": before.cnot },
                    "after": { "single_qubit": after.single_qubit, "cnot": after.cnot },
                })
            );
            write_or_print(output.as_ref(), &to_qasm(&routed.circuit))?;
        }
        Command::Calibrate(common) => {
            let cfg = common.config()?;
            let setup = Setup::new(&cfg)?;
            let measured: Vec<usize> = match &setup.placement {
                Some((_, layout)) => layout.as_slice().to_vec(),
                None => (0..4).collect(),
            };
            let cm = if cfg.analytic {
                analytic_confusion(&setup.noise, &measured)
            } else {
                calibrate_confusion(
                    &setup.noise,
                    &measured,
                    cfg.calibration_shots.unwrap_or(cfg.shots),
                    cfg.confusion,
                )?
            };
            let full = cm.to_full();
            let rows: Vec<Vec<f64>> = full.row_iter().map(|r| r.iter().copied().collect()).collect();
            let blocks = match &cm {
                ConfusionMatrix::PerQubit(b) => Some(b.clone()),
                ConfusionMatrix::Full(_) => None,
            };
            println!(
                "{}",
                serde_json::to_string_pretty(&json!({
                    "measured_qubits": measured,
                    "column_stochastic": cm.is_column_stochastic(1e-9),
                    "per_qubit": blocks,
                    "matrix": rows,
                }))?
            );
        }
        Command::Tomography(common) => {
            let cfg = common.config()?;
            let eps = common.single_epsilon(&cfg)?;
            let setup = Setup::new(&cfg)?;
            let p = run_point(&cfg, &setup, eps, point_seed(&cfg, 0))?;
            println!("{}", serde_json::to_string_pretty(&p)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config { .. } => ExitCode::from(2),
                _ => ExitCode::from(3),
            }
        }
    }
}
