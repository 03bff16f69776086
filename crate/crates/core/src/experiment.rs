//! End-to-end ε sweeps: build, transpile, execute the five tomography
//! settings, mitigate, post-select, and score against the perturbative target.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{exact_traces, fidelity_from_traces, FidelityReport, MEASURED_QUBITS};
use crate::circuit::{to_qasm, Circuit};
use crate::digitizer::build_evolution_circuit;
use crate::error::{Error, Result};
use crate::simulator::{derive_seed, exact_distribution, run_noisy, NoiseModel};
use crate::tomography::{
    analytic_confusion, calibrate_confusion, measurement_circuits, reconstruct, ConfusionKind, ConfusionMatrix,
    MeasurementSetting, Reconstruction, TomographyResult,
};
use crate::transpiler::{transpile, Layout, Topology};

/// Stream tag of the calibration runs within one sweep point.
const CALIBRATION_STREAM: u64 = 1000;

/// `n` log-spaced values from `lo` to `hi` inclusive.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.log10(), hi.log10());
            (0..n)
                .map(|k| 10f64.powf(a + (b - a) * k as f64 / (n - 1) as f64))
                .collect()
        }
    }
}

/// 13 points from 1e-7 to 1e-2.
pub fn default_epsilons() -> Vec<f64> {
    log_spaced(1e-7, 1e-2, 13)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub epsilon_values: Vec<f64>,
    /// Shots per tomography setting.
    pub shots: u64,
    /// Shots per prepared state when calibrating; defaults to `shots`.
    pub calibration_shots: Option<u64>,
    /// `none`, `belem-like` or `nairobi-like`; the fields below override it.
    pub noise_preset: String,
    pub readout_lambda: Option<Vec<f64>>,
    pub sq_depol: Option<f64>,
    pub cx_depol: Option<f64>,
    /// Bundled topology name, ignored when `topology_file` is set.
    pub topology: String,
    pub topology_file: Option<PathBuf>,
    /// Logical-to-physical placement; the hub layout when absent.
    pub layout: Option<Vec<usize>>,
    pub mitigation: bool,
    pub postselection: bool,
    pub transpile: bool,
    /// Exact Born probabilities with the readout channel applied in closed
    /// form instead of sampling. Requires zero gate noise.
    pub analytic: bool,
    pub confusion: ConfusionKind,
    pub seed: u64,
    pub workers: Option<usize>,
    pub out_dir: PathBuf,
    pub export_qasm: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            epsilon_values: default_epsilons(),
            shots: 100_000,
            calibration_shots: None,
            noise_preset: "belem-like".into(),
            readout_lambda: None,
            sq_depol: None,
            cx_depol: None,
            topology: "belem-like".into(),
            topology_file: None,
            layout: None,
            mitigation: true,
            postselection: true,
            transpile: true,
            analytic: false,
            confusion: ConfusionKind::Full,
            seed: 0,
            workers: None,
            out_dir: PathBuf::from("results"),
            export_qasm: false,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config("config", e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::config("config", format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn noise_model(&self) -> Result<NoiseModel> {
        let mut nm = NoiseModel::preset(&self.noise_preset, self.seed).ok_or_else(|| {
            Error::config(
                "noise_preset",
                format!("unknown preset `{}` (none, belem-like, nairobi-like)", self.noise_preset),
            )
        })?;
        if let Some(l) = &self.readout_lambda {
            nm.readout_lambda = l.clone();
        }
        if let Some(p) = self.sq_depol {
            nm.sq_depol = p;
        }
        if let Some(p) = self.cx_depol {
            nm.cx_depol = p;
        }
        nm.validate().map_err(|e| Error::config("noise", e.to_string()))?;
        Ok(nm)
    }

    pub fn resolve_topology(&self) -> Result<Topology> {
        match &self.topology_file {
            Some(path) => Topology::load(path).map_err(|e| Error::config("topology_file", e.to_string())),
            None => Topology::preset(&self.topology)
                .ok_or_else(|| Error::config("topology", format!("unknown topology `{}`", self.topology))),
        }
    }

    pub fn resolve_layout(&self, topo: &Topology) -> Result<Layout> {
        match &self.layout {
            Some(l) => {
                if l.len() != 4 {
                    return Err(Error::config("layout", "must place exactly 4 logical qubits"));
                }
                if let Some(p) = l.iter().find(|&&p| p >= topo.n) {
                    return Err(Error::config("layout", format!("physical qubit {p} not in the topology")));
                }
                Layout::new(l.clone()).map_err(|e| Error::config("layout", e.to_string()))
            }
            None => Layout::hub(topo, 4).map_err(|e| Error::config("topology", e.to_string())),
        }
    }

    /// Field-level checks; also resolves noise, topology and layout once.
    pub fn validate(&self) -> Result<()> {
        if self.epsilon_values.is_empty() {
            return Err(Error::config("epsilon_values", "needs at least one value"));
        }
        if let Some(e) = self.epsilon_values.iter().find(|e| !e.is_finite() || e.abs() >= 1.0) {
            return Err(Error::config("epsilon_values", format!("{e} is not in (-1, 1)")));
        }
        if self.shots == 0 {
            return Err(Error::config("shots", "must be at least 1"));
        }
        if self.calibration_shots == Some(0) {
            return Err(Error::config("calibration_shots", "must be at least 1"));
        }
        if self.workers == Some(0) {
            return Err(Error::config("workers", "must be at least 1"));
        }
        let nm = self.noise_model()?;
        if self.analytic && nm.has_gate_noise() {
            return Err(Error::config(
                "analytic",
                "analytic mode models readout noise only; set sq_depol and cx_depol to 0",
            ));
        }
        if self.transpile {
            let topo = self.resolve_topology()?;
            self.resolve_layout(&topo)?;
        }
        Ok(())
    }
}

/// One sweep point, in CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub fidelity: f64,
    pub fidelity_err: f64,
    pub tr_zz: f64,
    pub tr_xy: f64,
    pub tr_yx: f64,
    pub tr_iz: f64,
    pub tr_zi: f64,
    pub concurrence_theory: f64,
    pub retained_fraction_zz: f64,
    pub single_qubit_gates: usize,
    pub cnot_gates: usize,
    pub shots: u64,
    pub seed: u64,
}

pub const CSV_HEADER: [&str; 14] = [
    "epsilon",
    "fidelity",
    "fidelity_err",
    "tr_zz",
    "tr_xy",
    "tr_yx",
    "tr_iz",
    "tr_zi",
    "concurrence_theory",
    "retained_fraction_zz",
    "single_qubit_gates",
    "cnot_gates",
    "shots",
    "seed",
];

/// Everything computed for one ε.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointResult {
    pub row: SweepRow,
    pub report: FidelityReport,
    pub tomography: TomographyResult,
}

/// Resolved, validated inputs shared by all points of a sweep.
#[derive(Debug, Clone)]
pub struct Setup {
    pub noise: NoiseModel,
    /// `None` runs the logical circuits directly.
    pub placement: Option<(Topology, Layout)>,
}

impl Setup {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let placement = if cfg.transpile {
            let topo = cfg.resolve_topology()?;
            let layout = cfg.resolve_layout(&topo)?;
            Some((topo, layout))
        } else {
            None
        };
        Ok(Setup {
            noise: cfg.noise_model()?,
            placement,
        })
    }

    /// The circuit that runs on the device for a logical circuit.
    pub fn lower(&self, c: &Circuit) -> Result<Circuit> {
        match &self.placement {
            Some((topo, layout)) => Ok(transpile(c, topo, layout)?.circuit),
            None => Ok(c.clone()),
        }
    }
}

/// Runs the full pipeline at one ε with the given point seed.
pub fn run_point(cfg: &ExperimentConfig, setup: &Setup, epsilon: f64, point_seed: u64) -> Result<PointResult> {
    let base = build_evolution_circuit(epsilon, true)?;
    let counts = setup.lower(&base)?.gate_counts();
    let jobs: Vec<(MeasurementSetting, Circuit)> = measurement_circuits(&base)?
        .into_iter()
        .map(|(s, c)| Ok((s, setup.lower(&c)?)))
        .collect::<Result<_>>()?;

    // Classical bit b reads physical qubit measured[b].
    let mut meas = jobs[0].1.measurements();
    meas.sort_by_key(|&(_, b)| b);
    let measured: Vec<usize> = meas.into_iter().map(|(q, _)| q).collect();

    let raw: Vec<(MeasurementSetting, Vec<f64>)> = jobs
        .iter()
        .enumerate()
        .map(|(k, (s, c))| {
            let p = if cfg.analytic {
                exact_distribution(c, &setup.noise)?
            } else {
                let nm = setup.noise.with_seed(derive_seed(point_seed, k as u64));
                run_noisy(c, &nm, cfg.shots)?.frequencies()
            };
            Ok((*s, p))
        })
        .collect::<Result<_>>()?;

    let confusion: Option<ConfusionMatrix> = if !cfg.mitigation {
        None
    } else if cfg.analytic {
        Some(analytic_confusion(&setup.noise, &measured))
    } else {
        let nm = setup.noise.with_seed(derive_seed(point_seed, CALIBRATION_STREAM));
        Some(calibrate_confusion(
            &nm,
            &measured,
            cfg.calibration_shots.unwrap_or(cfg.shots),
            cfg.confusion,
        )?)
    };

    let lambda = setup.noise.mean_lambda(&measured);
    let shots = if cfg.analytic { 0 } else { cfg.shots };
    let tomography = reconstruct(
        &raw,
        &Reconstruction {
            confusion: confusion.as_ref(),
            postselect: cfg.postselection,
            lambda,
            n_measured: MEASURED_QUBITS,
            shots,
        },
    )?;
    let report = FidelityReport::new(epsilon, tomography.traces, lambda)?;
    let t = &tomography.traces;
    let row = SweepRow {
        epsilon,
        fidelity: report.fidelity,
        fidelity_err: report.fidelity_err,
        tr_zz: t.zz,
        tr_xy: t.xy,
        tr_yx: t.yx,
        tr_iz: t.iz,
        tr_zi: t.zi,
        concurrence_theory: report.concurrence_theory,
        retained_fraction_zz: tomography.retained_fraction.zz,
        single_qubit_gates: counts.single_qubit,
        cnot_gates: counts.cnot,
        shots,
        seed: cfg.seed,
    };
    Ok(PointResult { row, report, tomography })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn mean_fidelity(&self) -> f64 {
        self.rows.iter().map(|r| r.fidelity).sum::<f64>() / self.rows.len().max(1) as f64
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}

/// Seed of sweep point `index`.
pub fn point_seed(cfg: &ExperimentConfig, index: usize) -> u64 {
    derive_seed(cfg.seed, index as u64)
}

/// One row per ε, in configuration order. Points run in parallel on up to
/// `cfg.workers` threads; results do not depend on the thread count.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepTable> {
    let setup = Setup::new(cfg)?;
    let work = || -> Result<Vec<SweepRow>> {
        cfg.epsilon_values
            .par_iter()
            .enumerate()
            .map(|(i, &eps)| {
                log::debug!("sweep point {i}: ε = {eps:e}");
                run_point(cfg, &setup, eps, point_seed(cfg, i)).map(|p| p.row)
            })
            .collect()
    };
    let rows = match cfg.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::config("workers", e.to_string()))?
            .install(work)?,
        None => work()?,
    };
    Ok(SweepTable { rows })
}

#[derive(Debug, Serialize)]
struct Provenance {
    tool: &'static str,
    version: &'static str,
    seed: u64,
    timestamp: String,
}

#[derive(Debug, Serialize)]
struct Report<'a> {
    provenance: Provenance,
    config: &'a ExperimentConfig,
    rows: &'a [SweepRow],
    mean_fidelity: f64,
}

/// Paths written by [`emit_outputs`].
#[derive(Debug, Clone, PartialEq)]
pub struct OutputFiles {
    pub csv: PathBuf,
    pub json: PathBuf,
    pub qasm: Vec<PathBuf>,
}

/// Writes `results.csv`, `report.json` and, if enabled, one QASM file per ε
/// into `cfg.out_dir`.
pub fn emit_outputs(table: &SweepTable, cfg: &ExperimentConfig) -> Result<OutputFiles> {
    if table.rows.is_empty() {
        return Err(Error::arg("nothing to write: the table is empty"));
    }
    fs::create_dir_all(&cfg.out_dir)?;
    let csv_path = cfg.out_dir.join("results.csv");
    fs::write(&csv_path, table.to_csv()?)?;

    let report = Report {
        provenance: Provenance {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            seed: cfg.seed,
            timestamp: chrono::Utc::now().to_rfc3339(),
        },
        config: cfg,
        rows: &table.rows,
        mean_fidelity: table.mean_fidelity(),
    };
    let json_path = cfg.out_dir.join("report.json");
    fs::write(&json_path, serde_json::to_string_pretty(&report)?)?;

    let mut qasm_paths = Vec::new();
    if cfg.export_qasm {
        let dir = cfg.out_dir.join("circuits");
        fs::create_dir_all(&dir)?;
        for (i, r) in table.rows.iter().enumerate() {
            let path = dir.join(format!("evolution_{i:02}.qasm"));
            fs::write(&path, to_qasm(&build_evolution_circuit(r.epsilon, true)?))?;
            qasm_paths.push(path);
        }
    }
    Ok(OutputFiles {
        csv: csv_path,
        json: json_path,
        qasm: qasm_paths,
    })
}

/// Monte-Carlo spread of the fidelity under readout noise alone.
///
/// Runs the five logical settings `runs` times with independent seeds,
/// without mitigation or post-selection, and returns the root-mean-square
/// deviation of the resulting fidelity from its noiseless value.
pub fn bootstrap_fidelity_error(epsilon: f64, lambda: f64, shots: u64, runs: usize, seed: u64) -> Result<f64> {
    if runs == 0 || shots == 0 {
        return Err(Error::arg("bootstrap needs at least one run and one shot"));
    }
    let base = build_evolution_circuit(epsilon, true)?;
    let jobs = measurement_circuits(&base)?;
    let reference = {
        let raw: Vec<_> = jobs
            .iter()
            .map(|(s, c)| Ok((*s, exact_distribution(c, &NoiseModel::none(0))?)))
            .collect::<Result<_>>()?;
        fidelity_from_traces(epsilon, &reconstruct(&raw, &Reconstruction::default())?.traces)
    };
    let deviations: Vec<f64> = (0..runs)
        .into_par_iter()
        .map(|r| {
            let run_seed = derive_seed(seed, r as u64);
            let raw: Vec<_> = jobs
                .iter()
                .enumerate()
                .map(|(k, (s, c))| {
                    let nm = NoiseModel::readout_only(lambda, derive_seed(run_seed, k as u64));
                    Ok((*s, run_noisy(c, &nm, shots)?.frequencies()))
                })
                .collect::<Result<_>>()?;
            let t = reconstruct(&raw, &Reconstruction::default())?.traces;
            Ok((fidelity_from_traces(epsilon, &t) - reference).powi(2))
        })
        .collect::<Result<_>>()?;
    Ok((deviations.iter().sum::<f64>() / runs as f64).sqrt())
}

/// Noiseless fidelity of the exact evolution, for reference lines.
pub fn ideal_fidelity(epsilon: f64) -> f64 {
    fidelity_from_traces(epsilon, &exact_traces(&crate::analysis::exact_state(epsilon)))
}
