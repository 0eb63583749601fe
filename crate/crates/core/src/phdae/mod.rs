//! Port-Hamiltonian descriptor systems
//!
//! `d/dt(E x) = J z(x) − r(z(x)) + B u`, `y = Bᵀ z(x)`, with `J` skew, `r`
//! accretive on the subspace `{w | K_V w = 0}` and `∇H = Eᵀ z` there.

mod assemble;
mod audit;

pub use crate::topology::Model;
pub use assemble::{assemble, assemble_model1, assemble_model2, CouplingPort};
pub use audit::{energy_audit, AuditError, AuditInterval, AuditTotals, EnergyAudit};

use crate::laws::{CapacitorLaw, InductorLaw, LawError, ResistorLaw};
use crate::linalg::{norm_inf, skew_defect};
use crate::netlist::{CircuitError, Signal};
use crate::topology::TopologyError;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PhDaeError {
    #[error(transparent)]
    Law(#[from] LawError),
    #[error("circuit is unsound: {0}")]
    UnsoundCircuit(#[from] CircuitError),
}

impl From<TopologyError> for PhDaeError {
    fn from(e: TopologyError) -> Self {
        match e {
            TopologyError::UnsoundCircuit(c) => Self::UnsoundCircuit(c),
        }
    }
}

/// How an effort coordinate is obtained from its state coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EffortMap {
    Identity,
    /// Capacitor voltage from its charge.
    InverseCharge(CapacitorLaw),
    /// Inductor current from its flux.
    InverseFlux(InductorLaw),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Effort {
    pub state: usize,
    pub map: EffortMap,
}

/// `g(cᵀz)` contributed along the sparse column `c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResistiveTerm {
    pub support: Vec<(usize, f64)>,
    pub law: ResistorLaw,
}

impl ResistiveTerm {
    fn branch(&self, z: &DVector<f64>) -> f64 {
        self.support.iter().map(|&(i, c)| c * z[i]).sum()
    }
}

/// `r(z) = linear·z + Σ c·g(cᵀz)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dissipation {
    pub linear: DMatrix<f64>,
    pub resistive: Vec<ResistiveTerm>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EnergyTerm {
    Charge { state: usize, law: CapacitorLaw },
    Flux { state: usize, law: InductorLaw },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Labels {
    pub state: Vec<String>,
    pub effort: Vec<String>,
    pub input: Vec<String>,
    pub output: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhDae {
    pub e: DMatrix<f64>,
    pub j: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub efforts: Vec<Effort>,
    pub dissipation: Dissipation,
    pub energy: Vec<EnergyTerm>,
    /// Rows of `K_V`; the admissible efforts satisfy `K_V z = 0`.
    pub constraint: DMatrix<f64>,
    pub labels: Labels,
    /// Source waveform per input coordinate; `None` marks coupling inputs.
    pub input_signals: Vec<Option<Signal>>,
    /// Topological differentiation index, when known.
    pub index: Option<u8>,
}

impl PhDae {
    pub fn n_states(&self) -> usize {
        self.e.ncols()
    }

    pub fn n_equations(&self) -> usize {
        self.e.nrows()
    }

    pub fn n_inputs(&self) -> usize {
        self.b.ncols()
    }

    pub fn effort(&self, x: &DVector<f64>) -> Result<DVector<f64>, LawError> {
        let mut z = DVector::zeros(self.efforts.len());
        for (i, eff) in self.efforts.iter().enumerate() {
            let s = x[eff.state];
            z[i] = match eff.map {
                EffortMap::Identity => s,
                EffortMap::InverseCharge(law) => law.voltage(s)?,
                EffortMap::InverseFlux(law) => law.current(s)?,
            };
        }
        Ok(z)
    }

    /// `∂z/∂x` at a state whose efforts are `z`.
    pub fn effort_jacobian(&self, z: &DVector<f64>) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.efforts.len(), self.n_states());
        for (i, eff) in self.efforts.iter().enumerate() {
            d[(i, eff.state)] = match eff.map {
                EffortMap::Identity => 1.0,
                EffortMap::InverseCharge(law) => 1.0 / law.capacitance(z[i]),
                EffortMap::InverseFlux(law) => 1.0 / law.inductance(z[i]),
            };
        }
        d
    }

    pub fn dissipation(&self, z: &DVector<f64>) -> DVector<f64> {
        let mut r = &self.dissipation.linear * z;
        for term in &self.dissipation.resistive {
            let g = term.law.current(term.branch(z));
            for &(i, c) in &term.support {
                r[i] += c * g;
            }
        }
        r
    }

    pub fn dissipation_jacobian(&self, z: &DVector<f64>) -> DMatrix<f64> {
        let mut d = self.dissipation.linear.clone();
        for term in &self.dissipation.resistive {
            let gp = term.law.conductance(term.branch(z));
            for &(i, ci) in &term.support {
                for &(k, ck) in &term.support {
                    d[(i, k)] += ci * gp * ck;
                }
            }
        }
        d
    }

    /// Right-hand side `J z − r(z) + B u` for efforts `z`.
    pub fn rhs_from_effort(&self, z: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        &self.j * z - self.dissipation(z) + &self.b * u
    }

    /// `∂/∂x (J z(x) − r(z(x)))` at efforts `z`.
    pub fn rhs_jacobian(&self, z: &DVector<f64>) -> DMatrix<f64> {
        (&self.j - self.dissipation_jacobian(z)) * self.effort_jacobian(z)
    }

    pub fn output(&self, z: &DVector<f64>) -> DVector<f64> {
        self.b.transpose() * z
    }

    pub fn hamiltonian(&self, x: &DVector<f64>) -> Result<f64, LawError> {
        let mut h = 0.0;
        for term in &self.energy {
            h += match *term {
                EnergyTerm::Charge { state, law } => law.stored_energy(x[state])?,
                EnergyTerm::Flux { state, law } => law.stored_energy(x[state])?,
            };
        }
        Ok(h)
    }

    /// Largest deviation between a central-difference gradient of `H` and `Eᵀ z(x)`.
    pub fn hamiltonian_gradient_check(&self, x: &DVector<f64>, h: f64) -> Result<f64, LawError> {
        let etz = self.e.transpose() * self.effort(x)?;
        let mut worst: f64 = 0.0;
        let mut xp = x.clone();
        for i in 0..self.n_states() {
            xp[i] = x[i] + h;
            let up = self.hamiltonian(&xp)?;
            xp[i] = x[i] - h;
            let down = self.hamiltonian(&xp)?;
            xp[i] = x[i];
            worst = worst.max(((up - down) / (2.0 * h) - etz[i]).abs());
        }
        Ok(worst)
    }

    pub fn constraint_residual(&self, z: &DVector<f64>) -> f64 {
        if self.constraint.nrows() == 0 {
            0.0
        } else {
            (&self.constraint * z).amax()
        }
    }

    /// `‖K_V z‖∞ ≤ 1e−10·(1 + ‖z‖∞)`.
    pub fn in_subspace(&self, z: &DVector<f64>) -> bool {
        self.constraint_residual(z) <= 1e-10 * (1.0 + z.amax())
    }

    /// Moves efforts onto the admissible subspace by solving each constraint row
    /// `(·)ᵀ z − u = 0` for its capacitor-voltage coordinate `u`.
    pub fn project_effort(&self, z: &DVector<f64>) -> DVector<f64> {
        let mut out = z.clone();
        for row in 0..self.constraint.nrows() {
            let pivot = (0..self.efforts.len())
                .find(|&k| {
                    self.constraint[(row, k)] == -1.0 && matches!(self.efforts[k].map, EffortMap::InverseCharge(_))
                })
                .expect("constraint row has a capacitor-voltage pivot");
            out[pivot] = 0.0;
            out[pivot] = (self.constraint.row(row) * &out)[0];
        }
        out
    }

    /// A state whose efforts are admissible, obtained from `x` by adjusting capacitor charges.
    pub fn project_state(&self, x: &DVector<f64>) -> Result<DVector<f64>, LawError> {
        let z = self.project_effort(&self.effort(x)?);
        let mut out = x.clone();
        for (i, eff) in self.efforts.iter().enumerate() {
            if let EffortMap::InverseCharge(law) = eff.map {
                out[eff.state] = law.charge(z[i]);
            }
        }
        Ok(out)
    }

    pub fn skew_defect(&self) -> f64 {
        skew_defect(&self.j)
    }

    /// Inputs from the stored source signals; coupling inputs are zero.
    pub fn source_input(&self, t: f64, u: &mut [f64]) {
        for (slot, s) in u.iter_mut().zip(&self.input_signals) {
            *slot = s.map_or(0.0, |s| s.value(t));
        }
    }

    pub fn state_index(&self, label: &str) -> Option<usize> {
        self.labels.state.iter().position(|l| l == label)
    }

    pub fn output_index(&self, label: &str) -> Option<usize> {
        self.labels.output.iter().position(|l| l == label)
    }

    /// Block-diagonal aggregation of several systems.
    pub fn aggregate(parts: &[&PhDae]) -> PhDae {
        let bd = |get: &dyn Fn(&PhDae) -> &DMatrix<f64>| {
            let rows = parts.iter().map(|p| get(p).nrows()).sum();
            let cols = parts.iter().map(|p| get(p).ncols()).sum();
            let mut m = DMatrix::zeros(rows, cols);
            let (mut r, mut c) = (0, 0);
            for p in parts {
                let b = get(p);
                m.view_mut((r, c), b.shape()).copy_from(b);
                r += b.nrows();
                c += b.ncols();
            }
            m
        };
        let e = bd(&|p| &p.e);
        let j = bd(&|p| &p.j);
        let b = bd(&|p| &p.b);
        let linear = bd(&|p| &p.dissipation.linear);
        let constraint = bd(&|p| &p.constraint);
        let mut efforts = Vec::new();
        let mut resistive = Vec::new();
        let mut energy = Vec::new();
        let mut labels = Labels::default();
        let mut input_signals = Vec::new();
        let (mut so, mut zo) = (0, 0);
        for p in parts {
            efforts.extend(p.efforts.iter().map(|eff| Effort { state: eff.state + so, map: eff.map }));
            resistive.extend(p.dissipation.resistive.iter().map(|t| ResistiveTerm {
                support: t.support.iter().map(|&(i, c)| (i + zo, c)).collect(),
                law: t.law,
            }));
            energy.extend(p.energy.iter().map(|t| match *t {
                EnergyTerm::Charge { state, law } => EnergyTerm::Charge { state: state + so, law },
                EnergyTerm::Flux { state, law } => EnergyTerm::Flux { state: state + so, law },
            }));
            labels.state.extend(p.labels.state.iter().cloned());
            labels.effort.extend(p.labels.effort.iter().cloned());
            labels.input.extend(p.labels.input.iter().cloned());
            labels.output.extend(p.labels.output.iter().cloned());
            input_signals.extend(p.input_signals.iter().copied());
            so += p.n_states();
            zo += p.efforts.len();
        }
        let index = parts.iter().map(|p| p.index).try_fold(1u8, |acc, i| i.map(|i| acc.max(i)));
        PhDae {
            e,
            j,
            b,
            efforts,
            dissipation: Dissipation { linear, resistive },
            energy,
            constraint,
            labels,
            input_signals,
            index,
        }
    }

    /// Reorders states by `state_perm` and efforts/equations by `effort_perm`
    /// (entry `i` names the old coordinate placed at position `i`).
    pub fn permuted(&self, state_perm: &[usize], effort_perm: &[usize]) -> PhDae {
        let n = self.n_states();
        let k = self.efforts.len();
        assert_eq!(state_perm.len(), n);
        assert_eq!(effort_perm.len(), k);
        let mut new_state = vec![0; n];
        for (new, &old) in state_perm.iter().enumerate() {
            new_state[old] = new;
        }
        let mut new_effort = vec![0; k];
        for (new, &old) in effort_perm.iter().enumerate() {
            new_effort[old] = new;
        }
        let e = DMatrix::from_fn(k, n, |r, c| self.e[(effort_perm[r], state_perm[c])]);
        let j = DMatrix::from_fn(k, k, |r, c| self.j[(effort_perm[r], effort_perm[c])]);
        let b = DMatrix::from_fn(k, self.b.ncols(), |r, c| self.b[(effort_perm[r], c)]);
        let linear = DMatrix::from_fn(k, k, |r, c| self.dissipation.linear[(effort_perm[r], effort_perm[c])]);
        let constraint =
            DMatrix::from_fn(self.constraint.nrows(), k, |r, c| self.constraint[(r, effort_perm[c])]);
        let efforts = effort_perm
            .iter()
            .map(|&old| {
                let eff = self.efforts[old];
                Effort { state: new_state[eff.state], map: eff.map }
            })
            .collect();
        let resistive = self
            .dissipation
            .resistive
            .iter()
            .map(|t| ResistiveTerm { support: t.support.iter().map(|&(i, c)| (new_effort[i], c)).collect(), law: t.law })
            .collect();
        let energy = self
            .energy
            .iter()
            .map(|t| match *t {
                EnergyTerm::Charge { state, law } => EnergyTerm::Charge { state: new_state[state], law },
                EnergyTerm::Flux { state, law } => EnergyTerm::Flux { state: new_state[state], law },
            })
            .collect();
        let labels = Labels {
            state: state_perm.iter().map(|&i| self.labels.state[i].clone()).collect(),
            effort: effort_perm.iter().map(|&i| self.labels.effort[i].clone()).collect(),
            input: self.labels.input.clone(),
            output: self.labels.output.clone(),
        };
        PhDae {
            e,
            j,
            b,
            efforts,
            dissipation: Dissipation { linear, resistive },
            energy,
            constraint,
            labels,
            input_signals: self.input_signals.clone(),
            index: self.index,
        }
    }

    /// Dense matrices with coordinate labels, for reports.
    pub fn matrix_dump(&self) -> serde_json::Value {
        let rows = |m: &DMatrix<f64>| -> Vec<Vec<f64>> {
            (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
        };
        serde_json::json!({
            "states": self.labels.state,
            "efforts": self.labels.effort,
            "inputs": self.labels.input,
            "outputs": self.labels.output,
            "E": rows(&self.e),
            "J": rows(&self.j),
            "B": rows(&self.b),
            "K_V": rows(&self.constraint),
        })
    }

    /// Plain-text rendering of `E`, `J` and `B`.
    pub fn matrix_text(&self) -> String {
        let mut out = String::new();
        for (name, m, cols) in [
            ("E", &self.e, &self.labels.state),
            ("J", &self.j, &self.labels.effort),
            ("B", &self.b, &self.labels.input),
        ] {
            out.push_str(&format!("{name} ({}x{})\n{:>12}", m.nrows(), m.ncols(), ""));
            for c in cols {
                out.push_str(&format!(" {c:>10.10}"));
            }
            out.push('\n');
            for r in 0..m.nrows() {
                out.push_str(&format!("{:>12.12}", self.labels.effort[r]));
                for c in 0..m.ncols() {
                    out.push_str(&format!(" {:>10}", m[(r, c)]));
                }
                out.push('\n');
            }
            out.push('\n');
        }
        out
    }
}

/// `‖v‖∞` of a plain slice.
pub fn max_abs(v: &[f64]) -> f64 {
    norm_inf(v)
}
