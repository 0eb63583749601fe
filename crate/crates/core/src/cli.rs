//! Command-line front end.
//!
//! Every run writes its results into one output directory together with a
//! `manifest.json` recording the configuration and its SHA-256 hash.
//! Exit codes: 0 success, 1 input error, 2 unsound circuit, 3 non-convergence.

use crate::coupling::{assemble_joint_condensed, split_circuit, CouplingError};
use crate::dynit::{run_dynamic_iteration_with_reference, DynitError, Scheme, WindowConfig};
use crate::netlist::{build_circuit, parse_netlist, CircuitError, CircuitGraph};
use crate::phdae::{assemble_model1, assemble_model2, energy_audit, Model, PhDae, PhDaeError};
use crate::solver::{integrate, Integrator, NewtonConfig, SolverError, TimeGrid, Waveform};
use crate::topology::{classify_coupled, classify_index, IndexReport};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::ffi::OsString;
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("unsound circuit: {0}")]
    Unsound(String),
    #[error("no convergence: {0}")]
    NonConvergence(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Input(_) => 1,
            Self::Unsound(_) => 2,
            Self::NonConvergence(_) => 3,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Input(e.to_string())
    }
}

impl From<CircuitError> for CliError {
    fn from(e: CircuitError) -> Self {
        Self::Unsound(e.to_string())
    }
}

impl From<PhDaeError> for CliError {
    fn from(e: PhDaeError) -> Self {
        match e {
            PhDaeError::UnsoundCircuit(c) => c.into(),
            other => Self::Input(other.to_string()),
        }
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::InvalidGrid(_) | SolverError::Format(_) => Self::Input(e.to_string()),
            other => Self::NonConvergence(other.to_string()),
        }
    }
}

impl From<CouplingError> for CliError {
    fn from(e: CouplingError) -> Self {
        Self::Unsound(e.to_string())
    }
}

impl From<DynitError> for CliError {
    fn from(e: DynitError) -> Self {
        match e {
            DynitError::InvalidConfig(_) | DynitError::CouplingNotAttachedToLast { .. } => Self::Input(e.to_string()),
            other => Self::NonConvergence(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelArg {
    Model1,
    Model2,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Model1 => Model::Model1,
            ModelArg::Model2 => Model::Model2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum IntegratorArg {
    Euler,
    Trapezoidal,
}

impl From<IntegratorArg> for Integrator {
    fn from(i: IntegratorArg) -> Self {
        match i {
            IntegratorArg::Euler => Integrator::ImplicitEuler,
            IntegratorArg::Trapezoidal => Integrator::Trapezoidal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeArg {
    Jacobi,
    Gs,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Jacobi => Scheme::Jacobi,
            SchemeArg::Gs => Scheme::GaussSeidel,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "phcirc", version, about = "Port-Hamiltonian circuit DAE toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Topology checks, index classification and matrix dump.
    Analyze(AnalyzeArgs),
    /// Monolithic time integration with an energy audit.
    Simulate(SimulateArgs),
    /// Windowed dynamic iteration over the netlist's partitions.
    Cosim(CosimArgs),
    /// Energy audit of a stored waveform.
    Audit(AuditArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Netlist file.
    pub netlist: PathBuf,
    #[arg(long, value_enum, default_value = "model1")]
    pub model: ModelArg,
    /// Output directory.
    #[arg(long, default_value = "phcirc-out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GridArgs {
    #[arg(long, default_value_t = 0.0)]
    pub t0: f64,
    #[arg(long = "t-end")]
    pub t_end: f64,
    #[arg(long)]
    pub h: f64,
    #[arg(long, value_enum, default_value = "trapezoidal")]
    pub integrator: IntegratorArg,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CosimArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Window length.
    #[arg(long)]
    pub window: f64,
    #[arg(long, value_enum, default_value = "jacobi")]
    pub scheme: SchemeArg,
    #[arg(long, default_value_t = 20)]
    pub lmax: usize,
    #[arg(long = "wr-tol", default_value_t = 1e-8)]
    pub wr_tol: f64,
    /// Fail with exit code 3 when a window does not converge.
    #[arg(long)]
    pub strict: bool,
    /// Also simulate the joint system monolithically and compare.
    #[arg(long)]
    pub reference: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AuditArgs {
    #[command(flatten)]
    pub common: Common,
    /// Waveform CSV produced by `simulate`.
    pub waveform: PathBuf,
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli.command) {
        Ok(summary) => {
            print!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn load(path: &Path) -> Result<(String, CircuitGraph), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let netlist = parse_netlist(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let circuit = build_circuit(&netlist)?;
    Ok((text, circuit))
}

fn assemble_with(circuit: &CircuitGraph, model: Model) -> Result<PhDae, CliError> {
    Ok(match model {
        Model::Model1 => assemble_model1(circuit)?,
        Model::Model2 => assemble_model2(circuit)?,
    })
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

struct RunDir {
    dir: PathBuf,
    outputs: Vec<String>,
}

impl RunDir {
    fn new(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), outputs: Vec::new() })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        std::fs::write(self.dir.join(name), contents)?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Input(e.to_string()))?;
        self.write(name, &(text + "\n"))
    }

    fn finish<T: Serialize>(mut self, command: &str, config: &T, netlist_text: &str) -> Result<(), CliError> {
        let config = serde_json::to_value(config).map_err(|e| CliError::Input(e.to_string()))?;
        let manifest = serde_json::json!({
            "command": command,
            "version": env!("CARGO_PKG_VERSION"),
            "config": config,
            "config_sha256": sha256_hex(config.to_string().as_bytes()),
            "netlist_sha256": sha256_hex(netlist_text.as_bytes()),
            "outputs": self.outputs,
        });
        self.json("manifest.json", &manifest)
    }
}

fn report_table(r: &IndexReport) -> String {
    let mut s = format!("{:?}: index {}\n", r.model, r.index);
    for d in &r.defects {
        s.push_str(&format!("  {:?}: edges {:?}, vertices {:?}\n", d.kind, d.edges, d.vertices));
    }
    s
}

pub fn execute(command: &Command) -> Result<String, CliError> {
    match command {
        Command::Analyze(a) => analyze(a),
        Command::Simulate(a) => simulate(a),
        Command::Cosim(a) => cosim(a),
        Command::Audit(a) => audit(a),
    }
}

fn analyze(args: &AnalyzeArgs) -> Result<String, CliError> {
    let (text, circuit) = load(&args.common.netlist)?;
    let model: Model = args.common.model.into();
    let report = classify_index(&circuit, model).map_err(|e| CliError::Unsound(e.to_string()))?;
    let sys = assemble_with(&circuit, model)?;
    let mut run = RunDir::new(&args.common.out)?;
    run.json("index.json", &report)?;
    run.json("matrices.json", &sys.matrix_dump())?;
    run.write("matrices.txt", &sys.matrix_text())?;
    let mut summary = report_table(&report);
    if circuit.n_partitions() > 1 {
        let ps = split_circuit(&circuit)?;
        let coupled = classify_coupled(&ps);
        summary.push_str(&format!(
            "coupled: monolithic index {}, input-driven index {}, with-coupling index {}\n",
            coupled.monolithic_index(),
            coupled.input_driven_index(),
            coupled.with_coupling_index()
        ));
        run.json("coupled_index.json", &coupled)?;
        run.json("split.json", &ps.to_json())?;
    }
    run.finish("analyze", args, &text)?;
    Ok(summary)
}

fn grid_of(g: &GridArgs) -> Result<TimeGrid, CliError> {
    Ok(TimeGrid::uniform(g.t0, g.t_end, g.h)?)
}

fn simulate(args: &SimulateArgs) -> Result<String, CliError> {
    let (text, circuit) = load(&args.common.netlist)?;
    let sys = assemble_with(&circuit, args.common.model.into())?;
    let grid = grid_of(&args.grid)?;
    let src = |t: f64, u: &mut [f64]| sys.source_input(t, u);
    let wave = integrate(&sys, &grid, &src, args.grid.integrator.into(), &NewtonConfig::default())?;
    let audit = energy_audit(&sys, &wave, &src).map_err(|e| CliError::Input(e.to_string()))?;
    let mut run = RunDir::new(&args.common.out)?;
    run.write("waveform.csv", &wave.to_csv())?;
    run.json("audit.json", &audit)?;
    run.finish("simulate", args, &text)?;
    let t = audit.totals;
    Ok(format!(
        "{} nodes\nH(t0) = {:.6e}, H(t_end) = {:.6e}\ndissipated {:.6e}, supplied {:.6e}, residual {:.3e}\n",
        wave.len(),
        audit.hamiltonian[0],
        audit.hamiltonian.last().unwrap(),
        t.dissipated,
        t.supplied,
        t.residual
    ))
}

fn cosim(args: &CosimArgs) -> Result<String, CliError> {
    let (text, circuit) = load(&args.common.netlist)?;
    if args.common.model != ModelArg::Model1 {
        return Err(CliError::Input("dynamic iteration uses the charge/flux formulation (model1)".into()));
    }
    let ps = split_circuit(&circuit)?;
    let report = classify_coupled(&ps);
    if report.with_coupling_index() > 1 {
        log::warn!("a subsystem with its coupling equations has index 2");
    }
    let cfg = WindowConfig {
        window: args.window,
        h: args.grid.h,
        max_sweeps: args.lmax,
        tol: args.wr_tol,
        scheme: args.scheme.into(),
        integrator: args.grid.integrator.into(),
        newton: NewtonConfig::default(),
        strict: args.strict,
        ..Default::default()
    };
    let joint = assemble_joint_condensed(&ps).system;
    let reference = if args.reference {
        let grid = grid_of(&args.grid)?;
        Some(integrate(&joint, &grid, &|t, u| joint.source_input(t, u), cfg.integrator, &cfg.newton)?)
    } else {
        None
    };
    let result = run_dynamic_iteration_with_reference(&ps, args.grid.t0, args.grid.t_end, &cfg, reference.as_ref())?;
    let stitched = result.joint_waveform(&ps).map_err(|e| CliError::NonConvergence(e.to_string()))?;
    let mut run = RunDir::new(&args.common.out)?;
    run.write("stitched.csv", &stitched.to_csv())?;
    run.json("trace.json", &result.trace)?;
    let mut summary = String::from("window  sweeps  update        defect        wall[s]\n");
    for w in &result.trace.windows {
        let last = w.sweeps.last().unwrap();
        let wall: f64 = w.sweeps.iter().map(|s| s.wall_time).sum();
        summary.push_str(&format!("{:>6}  {:>6}  {:<12.3e}  {:<12.3e}  {:.3}\n", w.window, w.sweeps.len(), last.update_norm, last.defect, wall));
    }
    if let Some(r) = &reference {
        let dev = max_deviation(&stitched, r);
        run.json("comparison.json", &serde_json::json!({ "max_abs_deviation": dev }))?;
        summary.push_str(&format!("max deviation from monolithic: {dev:.3e}\n"));
    }
    run.finish("cosim", args, &text)?;
    Ok(summary)
}

fn max_deviation(a: &Waveform, b: &Waveform) -> f64 {
    a.states.iter().zip(&b.states).map(|(x, y)| (x - y).amax()).fold(0.0, f64::max)
}

fn audit(args: &AuditArgs) -> Result<String, CliError> {
    let (text, circuit) = load(&args.common.netlist)?;
    let sys = assemble_with(&circuit, args.common.model.into())?;
    let csv = std::fs::read_to_string(&args.waveform).map_err(|e| CliError::Input(format!("{}: {e}", args.waveform.display())))?;
    let src = |t: f64, u: &mut [f64]| sys.source_input(t, u);
    let wave = Waveform::from_csv(&sys, &csv, &src)?;
    let audit = energy_audit(&sys, &wave, &src).map_err(|e| CliError::Input(e.to_string()))?;
    let mut run = RunDir::new(&args.common.out)?;
    run.json("audit.json", &audit)?;
    run.finish("audit", args, &text)?;
    let t = audit.totals;
    Ok(format!("delta H {:.6e}, dissipated {:.6e}, supplied {:.6e}, residual {:.3e}\n", t.delta_h, t.dissipated, t.supplied, t.residual))
}
