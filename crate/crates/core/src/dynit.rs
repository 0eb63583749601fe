//! Windowed dynamic iteration (waveform relaxation) over coupled subsystems.
//!
//! Within each window the subsystems are integrated repeatedly with coupling
//! signals taken from the previous sweep (Jacobi) or, for the last subsystem,
//! from the current one (Gauss–Seidel). The first sweep of a window uses the
//! coupling values at the window start held constant.
//!
//! The energy exchanged through stale coupling data is the splitting defect
//! `∫ Σ_i ŷ_iᵀ û_i dt`; it vanishes at the fixed point.

use crate::coupling::{assemble_joint_condensed, assemble_multiply_coupled, PartitionedSystem};
use crate::laws::LawError;
use crate::phdae::PhDae;
use crate::solver::{consistent_init, integrate_from, Integrator, NewtonConfig, SolverError, TimeGrid, Waveform};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::time::Instant;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DynitError {
    #[error("subsystem {subsystem} failed in window {window}, sweep {sweep}: {source}")]
    Solver { subsystem: u32, window: usize, sweep: usize, source: SolverError },
    #[error("initialization failed: {0}")]
    Init(SolverError),
    #[error("window {window} did not converge: last update {update_norm:e}")]
    NonConvergedWindow { window: usize, update_norm: f64 },
    #[error("coupling branch {name} does not touch the last subsystem, so its current is undetermined there")]
    CouplingNotAttachedToLast { name: String },
    #[error("invalid iteration settings: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Law(#[from] LawError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Jacobi,
    #[serde(rename = "gs")]
    GaussSeidel,
}

impl std::str::FromStr for Scheme {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "jacobi" => Ok(Self::Jacobi),
            "gs" | "gauss-seidel" => Ok(Self::GaussSeidel),
            other => Err(format!("unknown scheme `{other}` (expected jacobi or gs)")),
        }
    }
}

/// Execution order of independent subsystem solves within a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Schedule {
    /// One thread per subsystem.
    #[default]
    Parallel,
    Sequential,
    /// Sequential, last subsystem first.
    Reversed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowConfig {
    /// Window length.
    pub window: f64,
    /// Inner step.
    pub h: f64,
    pub max_sweeps: usize,
    /// Tolerance on the max-norm coupling update.
    pub tol: f64,
    pub scheme: Scheme,
    pub integrator: Integrator,
    pub newton: NewtonConfig,
    /// Treat a non-converged window as an error.
    pub strict: bool,
    pub schedule: Schedule,
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self {
            window: 1.0,
            h: 1e-2,
            max_sweeps: 20,
            tol: 1e-8,
            scheme: Scheme::Jacobi,
            integrator: Integrator::Trapezoidal,
            newton: NewtonConfig::default(),
            strict: false,
            schedule: Schedule::Parallel,
        }
    }
}

impl WindowConfig {
    pub fn validate(&self) -> Result<(), DynitError> {
        if !(self.h > 0.0 && self.window >= self.h) {
            return Err(DynitError::InvalidConfig(format!("need 0 < h ≤ window, got h = {}, window = {}", self.h, self.window)));
        }
        if self.max_sweeps == 0 || !(self.tol > 0.0) {
            return Err(DynitError::InvalidConfig("need at least one sweep and a positive tolerance".into()));
        }
        Ok(())
    }
}

/// Coupling samples on a window grid: `λ` and every `ŷ_i` for `i < k`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingSignals {
    pub times: Vec<f64>,
    pub lambda: Vec<DVector<f64>>,
    pub outputs: Vec<Vec<DVector<f64>>>,
}

impl CouplingSignals {
    fn port_of(sys: &PhDae, z: &DVector<f64>, n: usize) -> DVector<f64> {
        sys.output(z).rows(0, n).into_owned()
    }

    /// Signals read from subsystem waveforms.
    pub fn from_waveforms(ps: &PartitionedSystem, waves: &[Waveform]) -> Self {
        let nl = ps.n_lambda;
        let k = ps.k();
        let last = &ps.subsystems[k - 1].phdae;
        Self {
            times: waves[0].grid.times().to_vec(),
            lambda: waves[k - 1].efforts.iter().map(|z| Self::port_of(last, z, nl)).collect(),
            outputs: (0..k - 1)
                .map(|i| waves[i].efforts.iter().map(|z| Self::port_of(&ps.subsystems[i].phdae, z, nl)).collect())
                .collect(),
        }
    }

    /// `Σ_{i<k} ŷ_i` at node `n`.
    pub fn output_sum(&self, n: usize) -> DVector<f64> {
        let mut s = DVector::zeros(self.lambda[n].len());
        for y in &self.outputs {
            s += &y[n];
        }
        s
    }

    /// Largest change of `λ` and of any `ŷ_i` between two sweeps.
    pub fn update_norm(&self, previous: &Self) -> (f64, f64) {
        let dl = self.lambda.iter().zip(&previous.lambda).map(|(a, b)| (a - b).amax()).fold(0.0, f64::max);
        let dy = self
            .outputs
            .iter()
            .zip(&previous.outputs)
            .flat_map(|(a, b)| a.iter().zip(b))
            .map(|(a, b)| (a - b).amax())
            .fold(0.0, f64::max);
        (dl, dy)
    }
}

/// Constant extrapolation of the coupling values at the window start.
pub fn extrapolate(ps: &PartitionedSystem, start: &[DVector<f64>], grid: &TimeGrid) -> Result<CouplingSignals, LawError> {
    let nl = ps.n_lambda;
    let k = ps.k();
    let port = |i: usize| -> Result<DVector<f64>, LawError> {
        let sys = &ps.subsystems[i].phdae;
        Ok(CouplingSignals::port_of(sys, &sys.effort(&start[i])?, nl))
    };
    let n = grid.len();
    let lambda = port(k - 1)?;
    let mut outputs = Vec::with_capacity(k - 1);
    for i in 0..k - 1 {
        outputs.push(vec![port(i)?; n]);
    }
    Ok(CouplingSignals { times: grid.times().to_vec(), lambda: vec![lambda; n], outputs })
}

/// Piecewise-linear interpolation, exact at the sample times.
fn interpolate(times: &[f64], values: &[DVector<f64>], t: f64) -> DVector<f64> {
    let j = times.partition_point(|&s| s < t);
    if j < times.len() && times[j] == t {
        return values[j].clone();
    }
    if j == 0 {
        return values[0].clone();
    }
    if j == times.len() {
        return values[j - 1].clone();
    }
    let w = (t - times[j - 1]) / (times[j] - times[j - 1]);
    &values[j - 1] * (1.0 - w) + &values[j] * w
}

fn check_attached(ps: &PartitionedSystem) -> Result<(), DynitError> {
    let last = &ps.subsystems[ps.k() - 1].a_lambda;
    for (j, name) in ps.coupling_names.iter().enumerate() {
        if last.column(j).iter().all(|&v| v == 0) {
            return Err(DynitError::CouplingNotAttachedToLast { name: name.clone() });
        }
    }
    Ok(())
}

/// Integrates subsystem `i` over the window with coupling input `port`.
fn solve_one(
    ps: &PartitionedSystem,
    i: usize,
    x0: &DVector<f64>,
    grid: &TimeGrid,
    times: &[f64],
    port: &[DVector<f64>],
    cfg: &WindowConfig,
) -> Result<Waveform, SolverError> {
    let sys = &ps.subsystems[i].phdae;
    let nl = ps.n_lambda;
    let input = |t: f64, u: &mut [f64]| {
        sys.source_input(t, u);
        if nl > 0 {
            let v = interpolate(times, port, t);
            u[..nl].copy_from_slice(v.as_slice());
        }
    };
    integrate_from(sys, grid, x0.clone(), &input, cfg.integrator, &cfg.newton)
}

fn run_group(
    ps: &PartitionedSystem,
    members: &[usize],
    x0: &[DVector<f64>],
    grid: &TimeGrid,
    times: &[f64],
    ports: &[Vec<DVector<f64>>],
    cfg: &WindowConfig,
) -> Vec<(usize, Result<Waveform, SolverError>)> {
    let solve = |i: usize, p: &Vec<DVector<f64>>| (i, solve_one(ps, i, &x0[i], grid, times, p, cfg));
    let mut out: Vec<(usize, Result<Waveform, SolverError>)> = match cfg.schedule {
        Schedule::Parallel if members.len() > 1 => std::thread::scope(|s| {
            let handles: Vec<_> = members.iter().zip(ports).map(|(&i, p)| s.spawn(move || solve(i, p))).collect();
            handles.into_iter().map(|h| h.join().expect("subsystem solve panicked")).collect()
        }),
        Schedule::Reversed => members.iter().zip(ports).rev().map(|(&i, p)| solve(i, p)).collect(),
        _ => members.iter().zip(ports).map(|(&i, p)| solve(i, p)).collect(),
    };
    out.sort_by_key(|(i, _)| *i);
    out
}

fn negated(v: &[DVector<f64>]) -> Vec<DVector<f64>> {
    v.iter().map(|x| -x).collect()
}

fn collect(ps: &PartitionedSystem, results: Vec<(usize, Result<Waveform, SolverError>)>, sweep: usize) -> Result<Vec<Waveform>, DynitError> {
    results
        .into_iter()
        .map(|(i, r)| r.map_err(|source| DynitError::Solver { subsystem: ps.subsystems[i].id, window: 0, sweep, source }))
        .collect()
}

/// One Jacobi sweep: every subsystem uses the previous sweep's coupling data.
pub fn jacobi_sweep(ps: &PartitionedSystem, x0: &[DVector<f64>], grid: &TimeGrid, prev: &CouplingSignals, cfg: &WindowConfig) -> Result<Vec<Waveform>, DynitError> {
    let k = ps.k();
    let members: Vec<usize> = (0..k).collect();
    let mut ports: Vec<Vec<DVector<f64>>> = (0..k - 1).map(|_| negated(&prev.lambda)).collect();
    ports.push((0..prev.times.len()).map(|n| prev.output_sum(n)).collect());
    collect(ps, run_group(ps, &members, x0, grid, &prev.times, &ports, cfg), 0)
}

/// One Gauss–Seidel sweep: the last subsystem uses the current sweep's outputs.
pub fn gauss_seidel_sweep(ps: &PartitionedSystem, x0: &[DVector<f64>], grid: &TimeGrid, prev: &CouplingSignals, cfg: &WindowConfig) -> Result<Vec<Waveform>, DynitError> {
    let k = ps.k();
    let members: Vec<usize> = (0..k - 1).collect();
    let ports: Vec<Vec<DVector<f64>>> = (0..k - 1).map(|_| negated(&prev.lambda)).collect();
    let mut waves = collect(ps, run_group(ps, &members, x0, grid, &prev.times, &ports, cfg), 0)?;
    let sum: Vec<DVector<f64>> = (0..prev.times.len())
        .map(|n| {
            let mut s = DVector::zeros(ps.n_lambda);
            for (i, w) in waves.iter().enumerate() {
                s += CouplingSignals::port_of(&ps.subsystems[i].phdae, &w.efforts[n], ps.n_lambda);
            }
            s
        })
        .collect();
    let last = solve_one(ps, k - 1, &x0[k - 1], grid, &prev.times, &sum, cfg)
        .map_err(|source| DynitError::Solver { subsystem: ps.subsystems[k - 1].id, window: 0, sweep: 0, source })?;
    waves.push(last);
    Ok(waves)
}

fn trapezoid(times: &[f64], f: impl Fn(usize) -> f64) -> f64 {
    (0..times.len().saturating_sub(1)).map(|n| 0.5 * (times[n + 1] - times[n]) * (f(n) + f(n + 1))).sum()
}

/// Energy injected through stale coupling data during the sweep producing `next`.
pub fn splitting_defect(prev: &CouplingSignals, next: &CouplingSignals, scheme: Scheme) -> f64 {
    let times = &next.times;
    match scheme {
        Scheme::Jacobi => trapezoid(times, |n| {
            let dl = &next.lambda[n] - &prev.lambda[n];
            let dy: f64 = next.outputs.iter().zip(&prev.outputs).map(|(a, b)| (&a[n] - &b[n]).dot(&prev.lambda[n])).sum();
            -(dy - dl.dot(&prev.output_sum(n)))
        }),
        Scheme::GaussSeidel => trapezoid(times, |n| (&next.lambda[n] - &prev.lambda[n]).dot(&next.output_sum(n))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub sweep: usize,
    pub update_norm: f64,
    pub lambda_update: f64,
    pub output_update: f64,
    pub defect: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub err_vs_monolithic: Option<f64>,
    /// Not serialized, so that reports stay reproducible.
    #[serde(skip)]
    pub wall_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowTrace {
    pub window: usize,
    pub t0: f64,
    pub t1: f64,
    pub converged: bool,
    pub sweeps: Vec<SweepRecord>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub windows: Vec<WindowTrace>,
}

impl IterationTrace {
    pub fn all_converged(&self) -> bool {
        self.windows.iter().all(|w| w.converged)
    }

    pub fn max_sweeps(&self) -> usize {
        self.windows.iter().map(|w| w.sweeps.len()).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone)]
pub struct CosimResult {
    /// Stitched per-subsystem waveforms on the global grid.
    pub subsystems: Vec<Waveform>,
    pub trace: IterationTrace,
}

impl CosimResult {
    /// The stitched solution in the coordinates of another system, matched by state label.
    pub fn states_in(&self, target: &PhDae) -> Vec<DVector<f64>> {
        let n = self.subsystems[0].len();
        let mut states = vec![DVector::zeros(target.n_states()); n];
        for w in &self.subsystems {
            for (j, label) in w.state_labels.iter().enumerate() {
                if let Some(t) = target.state_index(label) {
                    for (x, src) in states.iter_mut().zip(&w.states) {
                        x[t] = src[j];
                    }
                }
            }
        }
        states
    }

    /// Stitched solution as a waveform of the joint condensed system.
    pub fn joint_waveform(&self, ps: &PartitionedSystem) -> Result<Waveform, LawError> {
        let joint = assemble_joint_condensed(ps).system;
        let states = self.states_in(&joint);
        Waveform::from_states(&joint, self.subsystems[0].grid.clone(), states, &|t, u| joint.source_input(t, u))
    }
}

fn state_map(ps: &PartitionedSystem, labels: &[String]) -> Vec<Vec<Option<usize>>> {
    ps.subsystems
        .iter()
        .map(|s| s.phdae.labels.state.iter().map(|l| labels.iter().position(|m| m == l)).collect())
        .collect()
}

/// Runs the windowed iteration from consistent initial values at `t0`.
pub fn run_dynamic_iteration(ps: &PartitionedSystem, t0: f64, t_end: f64, cfg: &WindowConfig) -> Result<CosimResult, DynitError> {
    run_dynamic_iteration_with_reference(ps, t0, t_end, cfg, None)
}

/// As [`run_dynamic_iteration`], recording the deviation from a reference
/// waveform (matched by state label) on the same global grid.
pub fn run_dynamic_iteration_with_reference(
    ps: &PartitionedSystem,
    t0: f64,
    t_end: f64,
    cfg: &WindowConfig,
    reference: Option<&Waveform>,
) -> Result<CosimResult, DynitError> {
    cfg.validate()?;
    check_attached(ps)?;
    let grid = TimeGrid::uniform(t0, t_end, cfg.h).map_err(DynitError::Init)?;
    let joint = assemble_joint_condensed(ps).system;
    let src = |t: f64, u: &mut [f64]| joint.source_input(t, u);
    let x0 = consistent_init(&joint, &DVector::zeros(joint.n_states()), t0, &src, &cfg.newton).map_err(DynitError::Init)?;
    let mut start: Vec<DVector<f64>> = ps
        .subsystems
        .iter()
        .map(|s| DVector::from_iterator(s.phdae.n_states(), s.phdae.labels.state.iter().map(|l| x0[joint.state_index(l).unwrap()])))
        .collect();
    let ref_map = reference.map(|r| state_map(ps, &r.state_labels));

    let steps_per_window = ((cfg.window / cfg.h).round() as usize).max(1);
    let n_nodes = grid.len();
    let mut stitched: Vec<Vec<DVector<f64>>> = start.iter().map(|x| vec![x.clone()]).collect();
    let mut trace = IterationTrace::default();
    let mut first = 0;
    let mut window = 0;
    while first + 1 < n_nodes {
        let last = (first + steps_per_window).min(n_nodes - 1);
        let wgrid = grid.slice(first, last);
        let mut prev = extrapolate(ps, &start, &wgrid)?;
        let mut sweeps = Vec::new();
        let mut converged = false;
        let mut waves = Vec::new();
        let mut update = f64::INFINITY;
        for l in 0..cfg.max_sweeps {
            let clock = Instant::now();
            let result = match cfg.scheme {
                Scheme::Jacobi => jacobi_sweep(ps, &start, &wgrid, &prev, cfg),
                Scheme::GaussSeidel => gauss_seidel_sweep(ps, &start, &wgrid, &prev, cfg),
            };
            waves = result.map_err(|e| match e {
                DynitError::Solver { subsystem, source, .. } => DynitError::Solver { subsystem, window, sweep: l + 1, source },
                other => other,
            })?;
            let next = CouplingSignals::from_waveforms(ps, &waves);
            let (dl, dy) = next.update_norm(&prev);
            update = dl.max(dy);
            let defect = splitting_defect(&prev, &next, cfg.scheme);
            let err = match (reference, &ref_map) {
                (Some(r), Some(map)) => Some(deviation(&waves, r, map, first)),
                _ => None,
            };
            sweeps.push(SweepRecord {
                sweep: l + 1,
                update_norm: update,
                lambda_update: dl,
                output_update: dy,
                defect,
                err_vs_monolithic: err,
                wall_time: clock.elapsed().as_secs_f64(),
            });
            prev = next;
            if update <= cfg.tol {
                converged = true;
                break;
            }
        }
        if !converged {
            if cfg.strict {
                return Err(DynitError::NonConvergedWindow { window, update_norm: update });
            }
            log::warn!("window {window} stopped after {} sweeps with update {update:e}", cfg.max_sweeps);
        }
        trace.windows.push(WindowTrace { window, t0: wgrid.t0(), t1: wgrid.t_end(), converged, sweeps });
        for (acc, w) in stitched.iter_mut().zip(&waves) {
            acc.extend(w.states[1..].iter().cloned());
        }
        start = waves.iter().map(|w| w.final_state().clone()).collect();
        first = last;
        window += 1;
    }

    let subsystems = ps
        .subsystems
        .iter()
        .zip(stitched)
        .map(|(s, states)| {
            let sys = &s.phdae;
            Waveform::from_states(sys, grid.clone(), states, &|t, u| sys.source_input(t, u))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CosimResult { subsystems: fill_coupling_inputs(ps, subsystems), trace })
}

/// Sets the coupling inputs to the values implied by the stitched outputs.
fn fill_coupling_inputs(ps: &PartitionedSystem, mut waves: Vec<Waveform>) -> Vec<Waveform> {
    let nl = ps.n_lambda;
    if nl == 0 {
        return waves;
    }
    let signals = CouplingSignals::from_waveforms(ps, &waves);
    let k = ps.k();
    for (i, w) in waves.iter_mut().enumerate() {
        for (n, u) in w.inputs.iter_mut().enumerate() {
            let port = if i + 1 == k { signals.output_sum(n) } else { -&signals.lambda[n] };
            u.rows_mut(0, nl).copy_from(&port);
        }
    }
    waves
}

fn deviation(waves: &[Waveform], reference: &Waveform, map: &[Vec<Option<usize>>], offset: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for (w, m) in waves.iter().zip(map) {
        for (n, x) in w.states.iter().enumerate() {
            let r = &reference.states[offset + n];
            for (j, idx) in m.iter().enumerate() {
                if let Some(t) = idx {
                    worst = worst.max((x[j] - r[*t]).abs());
                }
            }
        }
    }
    worst
}

/// Iteration-level descriptor system with extended input.
#[derive(Debug, Clone)]
pub struct IterationPhDae {
    pub scheme: Scheme,
    pub e: DMatrix<f64>,
    pub j: DMatrix<f64>,
    pub b: DMatrix<f64>,
    /// `B̂ĈB̂ᵀ` in the coordinates of the aggregated subsystems.
    pub interconnection: DMatrix<f64>,
    /// Coefficient of the coupling-current increment in the condensed
    /// Gauss–Seidel form; empty for Jacobi.
    pub increment_input: DMatrix<f64>,
}

/// Assembles the system solved by one sweep.
///
/// Jacobi: states `(x, û, w)` with
/// `J = [[J, B̂, 0], [−B̂ᵀ, 0, I], [0, −I, 0]]`, `E = diag(E, 0, 0)` and
/// `B = [[B̄, 0], [0, 0], [0, −Ĉ]]` acting on `(ū, ŷ^{(l)})`.
/// Gauss–Seidel: the condensed joint system with the extra input
/// `B̂^GS Δλ`, `B̂^GS = [Ā_λ; 0; 0; 0; 0]`.
pub fn assemble_iteration_phdae(ps: &PartitionedSystem, scheme: Scheme) -> IterationPhDae {
    let mc = assemble_multiply_coupled(ps);
    let parts: Vec<&PhDae> = mc.systems.iter().collect();
    let agg = PhDae::aggregate(&parts);
    let b_hat = block_diag(&mc.ports.iter().map(|p| &p.b_hat).collect::<Vec<_>>());
    let b_bar = block_diag(&mc.ports.iter().map(|p| &p.b_bar).collect::<Vec<_>>());
    let interconnection = &b_hat * &mc.c_hat * b_hat.transpose();
    match scheme {
        Scheme::Jacobi => {
            let (n, p, m) = (agg.n_states(), b_hat.ncols(), b_bar.ncols());
            let size = n + 2 * p;
            let mut e = DMatrix::zeros(size, size);
            e.view_mut((0, 0), (n, n)).copy_from(&agg.e);
            let mut j = DMatrix::zeros(size, size);
            j.view_mut((0, 0), (n, n)).copy_from(&agg.j);
            j.view_mut((0, n), (n, p)).copy_from(&b_hat);
            j.view_mut((n, 0), (p, n)).copy_from(&(-b_hat.transpose()));
            j.view_mut((n, n + p), (p, p)).fill_with_identity();
            j.view_mut((n + p, n), (p, p)).copy_from(&(-DMatrix::<f64>::identity(p, p)));
            let mut b = DMatrix::zeros(size, m + p);
            b.view_mut((0, 0), (n, m)).copy_from(&b_bar);
            b.view_mut((n + p, m), (p, p)).copy_from(&(-&mc.c_hat));
            IterationPhDae { scheme, e, j, b, interconnection, increment_input: DMatrix::zeros(size, 0) }
        }
        Scheme::GaussSeidel => {
            let joint = assemble_joint_condensed(ps);
            let sys = joint.system;
            let nl = ps.n_lambda;
            let k = ps.k();
            let mut inc = DMatrix::zeros(sys.n_equations(), nl);
            for s in &ps.subsystems[..k - 1] {
                for (local, name) in s.circuit.vertices.iter().enumerate() {
                    let row = sys.labels.effort.iter().position(|l| *l == format!("e({name})")).unwrap();
                    for c in 0..nl {
                        inc[(row, c)] = s.a_lambda.get(local, c) as f64;
                    }
                }
            }
            let mut b = DMatrix::zeros(sys.n_equations(), sys.n_inputs() + nl);
            b.view_mut((0, 0), sys.b.shape()).copy_from(&sys.b);
            b.view_mut((0, sys.n_inputs()), inc.shape()).copy_from(&inc);
            IterationPhDae { scheme, e: sys.e, j: sys.j, b, interconnection, increment_input: inc }
        }
    }
}

fn block_diag(blocks: &[&DMatrix<f64>]) -> DMatrix<f64> {
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut m = DMatrix::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        m.view_mut((r, c), b.shape()).copy_from(b);
        r += b.nrows();
        c += b.ncols();
    }
    m
}
