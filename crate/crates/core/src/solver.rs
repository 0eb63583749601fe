//! Fixed-step time integration of descriptor systems.
//!
//! Steps are implicit Euler or a projected trapezoidal rule: the part of
//! the right-hand side lying in the range of `E` is averaged over the step,
//! while the remaining algebraic part is enforced at the new node. Each step
//! solves its nonlinear system with a damped Newton method.

use crate::laws::LawError;
use crate::linalg::{Lu, SingularMatrix};
use crate::phdae::PhDae;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Time-dependent input `u(t)` written into the provided slice.
pub type InputFn<'a> = dyn Fn(f64, &mut [f64]) + Sync + 'a;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
    #[error("consistent initialization failed after {iterations} iterations (residual {residual:e})")]
    InitNewtonFailure { residual: f64, iterations: usize },
    #[error("Newton diverged in step {step} at t = {time}: residual {residual:e} after {iterations} iterations")]
    NewtonDivergence { step: usize, time: f64, residual: f64, iterations: usize },
    #[error(transparent)]
    Law(#[from] LawError),
    #[error("malformed waveform file: {0}")]
    Format(String),
}

/// Node sequence `t0 = t_0 < … < t_N = t_end`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    /// Uniform grid with `round((t_end − t0)/h) + 1` nodes.
    pub fn uniform(t0: f64, t_end: f64, h: f64) -> Result<Self, SolverError> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(SolverError::InvalidGrid(format!("step {h} must be positive")));
        }
        if !(t_end > t0) {
            return Err(SolverError::InvalidGrid(format!("end time {t_end} must exceed start time {t0}")));
        }
        let steps = ((t_end - t0) / h).round() as usize;
        if steps == 0 {
            return Err(SolverError::InvalidGrid(format!("step {h} exceeds the interval length")));
        }
        Ok(Self { times: (0..=steps).map(|i| t0 + i as f64 * h).collect() })
    }

    pub fn from_times(times: Vec<f64>) -> Result<Self, SolverError> {
        if times.len() < 2 || times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(SolverError::InvalidGrid("times must be strictly increasing with at least two nodes".into()));
        }
        Ok(Self { times })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }
    pub fn len(&self) -> usize {
        self.times.len()
    }
    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
    pub fn t0(&self) -> f64 {
        self.times[0]
    }
    pub fn t_end(&self) -> f64 {
        *self.times.last().unwrap()
    }
    /// First step length.
    pub fn h(&self) -> f64 {
        self.times[1] - self.times[0]
    }

    /// Nodes `first..=last`.
    pub fn slice(&self, first: usize, last: usize) -> TimeGrid {
        TimeGrid { times: self.times[first..=last].to_vec() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    #[serde(rename = "euler")]
    ImplicitEuler,
    Trapezoidal,
}

impl Integrator {
    pub fn order(self) -> u32 {
        match self {
            Self::ImplicitEuler => 1,
            Self::Trapezoidal => 2,
        }
    }
}

impl FromStr for Integrator {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "euler" => Ok(Self::ImplicitEuler),
            "trapezoidal" => Ok(Self::Trapezoidal),
            other => Err(format!("unknown integrator `{other}` (expected euler or trapezoidal)")),
        }
    }
}

impl fmt::Display for Integrator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::ImplicitEuler => "euler",
            Self::Trapezoidal => "trapezoidal",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_iter: usize,
    /// Smallest line-search factor before giving up.
    pub min_damping: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self { abs_tol: 1e-10, rel_tol: 1e-8, max_iter: 50, min_damping: 2f64.powi(-20) }
    }
}

impl NewtonConfig {
    /// Accuracy to which trajectories of the same problem are expected to agree.
    pub fn trajectory_tolerance(&self, scale: f64) -> f64 {
        10.0 * (self.abs_tol + self.rel_tol * scale)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonFailure {
    pub residual: f64,
    pub iterations: usize,
}

/// Damped Newton for `F(x) = 0`; `eval` returns `F` and its Jacobian.
pub fn newton<F>(x0: &DVector<f64>, config: &NewtonConfig, mut eval: F) -> Result<(DVector<f64>, usize), NewtonFailure>
where
    F: FnMut(&DVector<f64>) -> Result<(DVector<f64>, DMatrix<f64>), LawError>,
{
    let mut x = x0.clone();
    let (mut fx, mut jac) = eval(&x).map_err(|_| NewtonFailure { residual: f64::INFINITY, iterations: 0 })?;
    let mut norm = fx.amax();
    for it in 0..config.max_iter {
        if norm <= config.abs_tol {
            return Ok((x, it));
        }
        let lu = Lu::factor(&jac).map_err(|_: SingularMatrix| NewtonFailure { residual: norm, iterations: it })?;
        let delta = -lu.solve(&fx);
        let mut lambda = 1.0;
        loop {
            let trial = &x + lambda * &delta;
            if let Ok((ft, jt)) = eval(&trial) {
                let nt = ft.amax();
                if lambda == 1.0 && delta.amax() <= config.abs_tol + config.rel_tol * x.amax() {
                    return Ok((trial, it + 1));
                }
                if nt < norm || nt <= config.abs_tol {
                    x = trial;
                    fx = ft;
                    jac = jt;
                    norm = nt;
                    break;
                }
            }
            lambda *= 0.5;
            if lambda < config.min_damping {
                return Err(NewtonFailure { residual: norm, iterations: it + 1 });
            }
        }
    }
    if norm <= config.abs_tol {
        Ok((x, config.max_iter))
    } else {
        Err(NewtonFailure { residual: norm, iterations: config.max_iter })
    }
}

/// Splitting of equation space into the range of `E` and its orthogonal complement.
#[derive(Debug, Clone)]
struct RangeSplit {
    /// Orthogonal projector onto `range E`.
    p1: DMatrix<f64>,
    /// Orthonormal basis of `ker Eᵀ`, as columns.
    u2: DMatrix<f64>,
    /// Orthonormal basis of the row space of `E`, as columns.
    v1: DMatrix<f64>,
}

impl RangeSplit {
    fn new(e: &DMatrix<f64>) -> Self {
        let (m, n) = e.shape();
        let smax = e.amax();
        if smax == 0.0 {
            return Self { p1: DMatrix::zeros(m, m), u2: DMatrix::identity(m, m), v1: DMatrix::zeros(n, 0) };
        }
        // Full left basis via the symmetric eigendecomposition of E Eᵀ.
        let left = (e * e.transpose()).symmetric_eigen();
        let right = (e.transpose() * e).symmetric_eigen();
        let tol = (m.max(n) as f64) * f64::EPSILON * smax * smax * 100.0;
        let pick = |vals: &DVector<f64>, vecs: &DMatrix<f64>, big: bool| {
            let cols: Vec<DVector<f64>> = (0..vals.len())
                .filter(|&i| (vals[i] > tol) == big)
                .map(|i| vecs.column(i).into_owned())
                .collect();
            if cols.is_empty() {
                DMatrix::zeros(vecs.nrows(), 0)
            } else {
                DMatrix::from_columns(&cols)
            }
        };
        let u1 = pick(&left.eigenvalues, &left.eigenvectors, true);
        let u2 = pick(&left.eigenvalues, &left.eigenvectors, false);
        let v1 = pick(&right.eigenvalues, &right.eigenvectors, true);
        Self { p1: &u1 * u1.transpose(), u2, v1 }
    }
}

/// One-step map for a fixed system and integrator.
pub struct Stepper<'a> {
    sys: &'a PhDae,
    integrator: Integrator,
    config: NewtonConfig,
    split: RangeSplit,
}

impl<'a> Stepper<'a> {
    pub fn new(sys: &'a PhDae, integrator: Integrator, config: NewtonConfig) -> Self {
        Self { sys, integrator, config, split: RangeSplit::new(&sys.e) }
    }

    fn input(&self, inputs: &InputFn, t: f64) -> DVector<f64> {
        let mut u = DVector::zeros(self.sys.n_inputs());
        inputs(t, u.as_mut_slice());
        u
    }

    /// `f(x, t)` with its Jacobian.
    fn rhs(&self, x: &DVector<f64>, u: &DVector<f64>) -> Result<(DVector<f64>, DMatrix<f64>), LawError> {
        let z = self.sys.effort(x)?;
        Ok((self.sys.rhs_from_effort(&z, u), self.sys.rhs_jacobian(&z)))
    }

    /// Advances `x_n` from `t_n` to `t_{n+1}`; `step` only labels failures.
    pub fn step(&self, x_n: &DVector<f64>, t_n: f64, t_next: f64, inputs: &InputFn, step: usize) -> Result<DVector<f64>, SolverError> {
        let h = t_next - t_n;
        let u1 = self.input(inputs, t_next);
        let e = &self.sys.e;
        let ex_n = e * x_n;
        let result = match self.integrator {
            Integrator::ImplicitEuler => newton(x_n, &self.config, |x| {
                let (f, df) = self.rhs(x, &u1)?;
                Ok(((e * x - &ex_n) / h - f, e / h - df))
            }),
            Integrator::Trapezoidal => {
                let u0 = self.input(inputs, t_n);
                let (f_n, _) = self.rhs(x_n, &u0)?;
                let half = &self.split.p1 * f_n * 0.5;
                let n = self.split.p1.nrows();
                let weight = DMatrix::identity(n, n) - &self.split.p1 * 0.5;
                newton(x_n, &self.config, |x| {
                    let (f, df) = self.rhs(x, &u1)?;
                    Ok(((e * x - &ex_n) / h - &half - &weight * f, e / h - &weight * df))
                })
            }
        };
        result.map(|(x, _)| x).map_err(|f| SolverError::NewtonDivergence {
            step,
            time: t_next,
            residual: f.residual,
            iterations: f.iterations,
        })
    }

    /// Largest residual of the algebraic equations at `(x, t)`.
    pub fn algebraic_residual(&self, x: &DVector<f64>, t: f64, inputs: &InputFn) -> Result<f64, LawError> {
        let (f, _) = self.rhs(x, &self.input(inputs, t))?;
        Ok(if self.split.u2.ncols() == 0 { 0.0 } else { (self.split.u2.transpose() * f).amax() })
    }
}

/// State near `guess` satisfying the algebraic equations at `t0`; the
/// differential part of the state is held at the guess. When that square
/// system is singular (higher-index circuits) the algebraic equations are
/// solved alone by minimum-norm corrections.
pub fn consistent_init(sys: &PhDae, guess: &DVector<f64>, t0: f64, inputs: &InputFn, config: &NewtonConfig) -> Result<DVector<f64>, SolverError> {
    if sys.index.is_some_and(|i| i > 1) {
        log::warn!("initializing a system of differentiation index {}", sys.index.unwrap());
    }
    let split = RangeSplit::new(&sys.e);
    let mut u = DVector::zeros(sys.n_inputs());
    inputs(t0, u.as_mut_slice());
    let alg = |x: &DVector<f64>| -> Result<(DVector<f64>, DMatrix<f64>), LawError> {
        let z = sys.effort(x)?;
        let f = sys.rhs_from_effort(&z, &u);
        let df = sys.rhs_jacobian(&z);
        Ok((split.u2.transpose() * f, split.u2.transpose() * df))
    };
    let v1t = split.v1.transpose();
    let square = newton(guess, config, |x| {
        let (g, dg) = alg(x)?;
        let d = &v1t * (x - guess);
        let mut res = DVector::zeros(d.len() + g.len());
        res.rows_mut(0, d.len()).copy_from(&d);
        res.rows_mut(d.len(), g.len()).copy_from(&g);
        let mut jac = DMatrix::zeros(res.len(), x.len());
        jac.rows_mut(0, d.len()).copy_from(&v1t);
        jac.rows_mut(d.len(), g.len()).copy_from(&dg);
        Ok((res, jac))
    });
    match square {
        Ok((x, _)) => Ok(x),
        Err(_) => minimum_norm_init(guess, config, alg),
    }
}

fn minimum_norm_init<F>(guess: &DVector<f64>, config: &NewtonConfig, mut alg: F) -> Result<DVector<f64>, SolverError>
where
    F: FnMut(&DVector<f64>) -> Result<(DVector<f64>, DMatrix<f64>), LawError>,
{
    let mut x = guess.clone();
    let mut last = f64::INFINITY;
    for it in 0..config.max_iter {
        let (g, dg) = alg(&x)?;
        last = g.amax();
        if last <= config.abs_tol {
            return Ok(x);
        }
        let svd = dg.svd(true, true);
        let delta = svd
            .solve(&g, 1e-12 * svd.singular_values.max().max(1.0))
            .map_err(|_| SolverError::InitNewtonFailure { residual: last, iterations: it })?;
        x -= delta;
    }
    Err(SolverError::InitNewtonFailure { residual: last, iterations: config.max_iter })
}

/// Sampled trajectory with efforts, outputs and inputs at every node.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    pub grid: TimeGrid,
    pub states: Vec<DVector<f64>>,
    pub efforts: Vec<DVector<f64>>,
    pub outputs: Vec<DVector<f64>>,
    pub inputs: Vec<DVector<f64>>,
    pub state_labels: Vec<String>,
    pub output_labels: Vec<String>,
}

impl Waveform {
    /// Evaluates efforts, outputs and inputs for given state samples.
    pub fn from_states(sys: &PhDae, grid: TimeGrid, states: Vec<DVector<f64>>, inputs: &InputFn) -> Result<Self, LawError> {
        let mut efforts = Vec::with_capacity(states.len());
        let mut outputs = Vec::with_capacity(states.len());
        let mut us = Vec::with_capacity(states.len());
        for (x, &t) in states.iter().zip(grid.times()) {
            let z = sys.effort(x)?;
            outputs.push(sys.output(&z));
            efforts.push(z);
            let mut u = DVector::zeros(sys.n_inputs());
            inputs(t, u.as_mut_slice());
            us.push(u);
        }
        Ok(Self {
            grid,
            states,
            efforts,
            outputs,
            inputs: us,
            state_labels: sys.labels.state.clone(),
            output_labels: sys.labels.output.clone(),
        })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Samples of one state coordinate.
    pub fn state_series(&self, index: usize) -> Vec<f64> {
        self.states.iter().map(|x| x[index]).collect()
    }

    pub fn final_state(&self) -> &DVector<f64> {
        self.states.last().expect("waveform has nodes")
    }

    /// CSV with header `t,<states>,<outputs>` and 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for l in self.state_labels.iter().chain(&self.output_labels) {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        for (i, &t) in self.grid.times().iter().enumerate() {
            out.push_str(&format!("{t:.16e}"));
            for v in self.states[i].iter().chain(self.outputs[i].iter()) {
                out.push_str(&format!(",{v:.16e}"));
            }
            out.push('\n');
        }
        out
    }

    /// Reads states back from CSV written by [`Waveform::to_csv`] and re-evaluates the rest.
    pub fn from_csv(sys: &PhDae, text: &str, inputs: &InputFn) -> Result<Self, SolverError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: Vec<&str> = lines.next().ok_or_else(|| SolverError::Format("empty file".into()))?.split(',').collect();
        let n = sys.n_states();
        if header.len() < n + 1 || header[0] != "t" || header[1..=n] != sys.labels.state.iter().map(String::as_str).collect::<Vec<_>>()[..] {
            return Err(SolverError::Format("header does not match the system's state labels".into()));
        }
        let mut times = Vec::new();
        let mut states = Vec::new();
        for (row, line) in lines.enumerate() {
            let vals: Result<Vec<f64>, _> = line.split(',').map(|s| s.trim().parse::<f64>()).collect();
            let vals = vals.map_err(|e| SolverError::Format(format!("row {}: {e}", row + 2)))?;
            if vals.len() != header.len() {
                return Err(SolverError::Format(format!("row {} has {} fields, expected {}", row + 2, vals.len(), header.len())));
            }
            times.push(vals[0]);
            states.push(DVector::from_column_slice(&vals[1..=n]));
        }
        let grid = TimeGrid::from_times(times)?;
        Ok(Self::from_states(sys, grid, states, inputs)?)
    }
}

/// Integrates from the given initial state without re-initialization.
pub fn integrate_from(sys: &PhDae, grid: &TimeGrid, x0: DVector<f64>, inputs: &InputFn, integrator: Integrator, config: &NewtonConfig) -> Result<Waveform, SolverError> {
    let stepper = Stepper::new(sys, integrator, *config);
    let times = grid.times();
    let mut states = Vec::with_capacity(times.len());
    states.push(x0);
    for k in 1..times.len() {
        let next = stepper.step(&states[k - 1], times[k - 1], times[k], inputs, k)?;
        states.push(next);
    }
    Ok(Waveform::from_states(sys, grid.clone(), states, inputs)?)
}

/// Consistent initialization from the zero state followed by fixed steps.
pub fn integrate(sys: &PhDae, grid: &TimeGrid, inputs: &InputFn, integrator: Integrator, config: &NewtonConfig) -> Result<Waveform, SolverError> {
    integrate_with_guess(sys, grid, &DVector::zeros(sys.n_states()), inputs, integrator, config)
}

/// Like [`integrate`], starting the initialization from `guess`.
pub fn integrate_with_guess(sys: &PhDae, grid: &TimeGrid, guess: &DVector<f64>, inputs: &InputFn, integrator: Integrator, config: &NewtonConfig) -> Result<Waveform, SolverError> {
    let x0 = consistent_init(sys, guess, grid.t0(), inputs, config)?;
    integrate_from(sys, grid, x0, inputs, integrator, config)
}

pub fn step_implicit_euler(sys: &PhDae, x_n: &DVector<f64>, t_n: f64, t_next: f64, inputs: &InputFn, config: &NewtonConfig) -> Result<DVector<f64>, SolverError> {
    Stepper::new(sys, Integrator::ImplicitEuler, *config).step(x_n, t_n, t_next, inputs, 1)
}

pub fn step_trapezoidal(sys: &PhDae, x_n: &DVector<f64>, t_n: f64, t_next: f64, inputs: &InputFn, config: &NewtonConfig) -> Result<DVector<f64>, SolverError> {
    Stepper::new(sys, Integrator::Trapezoidal, *config).step(x_n, t_n, t_next, inputs, 1)
}

/// Input function reading the system's own source signals.
pub fn source_inputs(sys: &PhDae) -> impl Fn(f64, &mut [f64]) + Sync + '_ {
    move |t, u| sys.source_input(t, u)
}
