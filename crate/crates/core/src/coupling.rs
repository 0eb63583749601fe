//! Splitting partitioned circuits into coupled subsystems.
//!
//! Each coupling branch joins a vertex of one partition to a vertex of
//! another through a zero-volt source whose current `λ` is exchanged as a
//! port variable. Subsystems `1..k−1` receive `û_i = −λ` as input and
//! return `ŷ_i = A_λiᵀ e_i`; the last subsystem carries `λ` as state and
//! closes the coupling equation `A_λkᵀ e_k = û_k = Σ ŷ_i`. The inputs and
//! outputs are related by `û = −Ĉ ŷ`.

use crate::linalg::IntMatrix;
use crate::netlist::{CircuitError, CircuitGraph, Edge, EdgeKind};
use crate::phdae::{assemble, CouplingPort, EffortMap, Model, PhDae};
use nalgebra::{DMatrix, DVector};
use serde_json::json;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CouplingError {
    #[error("partition {partition} is not connected to ground: {source}")]
    PartitionNotConnected { partition: u32, source: CircuitError },
    #[error("partition {partition} is unsound: {source}")]
    UnsoundPartition { partition: u32, source: CircuitError },
    #[error("partition {partition} has no vertices")]
    EmptyPartition { partition: u32 },
    #[error("coupling branch {name} must join two different partitions")]
    CouplingSpansPartitions { name: String },
    #[error("unsound circuit: {0}")]
    Unsound(#[from] CircuitError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Subsystem {
    /// Partition id, starting at 1.
    pub id: u32,
    pub circuit: CircuitGraph,
    /// Global vertex index of every local vertex.
    pub vertex_map: Vec<usize>,
    /// Coupling incidence `A_λi`, one column per coupling branch.
    pub a_lambda: IntMatrix,
    /// Port form; the first `n_λ` inputs and outputs are the coupling port.
    pub phdae: PhDae,
}

impl Subsystem {
    pub fn is_last(&self, ps: &PartitionedSystem) -> bool {
        self.id as usize == ps.subsystems.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionedSystem {
    /// The unsplit circuit including its coupling branches.
    pub merged: CircuitGraph,
    pub subsystems: Vec<Subsystem>,
    pub coupling_names: Vec<String>,
    pub n_lambda: usize,
    /// Interconnection `Ĉ`: blocks `(i,k) = I` and `(k,i) = −I` for `i < k`.
    pub c_hat: IntMatrix,
}

/// Builds the per-partition subsystems of a circuit with coupling branches.
pub fn split_circuit(circuit: &CircuitGraph) -> Result<PartitionedSystem, CouplingError> {
    circuit.check_connected()?;
    let k = circuit.n_partitions() as usize;
    let couplings = circuit.edges_of(EdgeKind::Coupling);
    let coupling_names: Vec<String> = couplings.iter().map(|&c| circuit.edges[c].name.clone()).collect();
    let n_lambda = couplings.len();
    for &c in &couplings {
        let e = &circuit.edges[c];
        let parts = (e.pos.map(|v| circuit.partition[v]), e.neg.map(|v| circuit.partition[v]));
        if !matches!(parts, (Some(a), Some(b)) if a != b) {
            return Err(CouplingError::CouplingSpansPartitions { name: e.name.clone() });
        }
    }

    let mut subsystems = Vec::with_capacity(k);
    for id in 1..=k as u32 {
        let vertex_map: Vec<usize> = (0..circuit.n_v()).filter(|&v| circuit.partition[v] == id).collect();
        if vertex_map.is_empty() {
            return Err(CouplingError::EmptyPartition { partition: id });
        }
        let local = |v: Option<usize>| v.map(|g| vertex_map.iter().position(|&m| m == g));
        let edges: Vec<Edge> = circuit
            .edges
            .iter()
            .filter(|e| e.kind() != EdgeKind::Coupling)
            .filter_map(|e| match (local(e.pos), local(e.neg)) {
                (Some(Some(p)), Some(Some(n))) => Some(Edge { pos: Some(p), neg: Some(n), ..e.clone() }),
                (Some(Some(p)), None) => Some(Edge { pos: Some(p), neg: None, ..e.clone() }),
                (None, Some(Some(n))) => Some(Edge { pos: None, neg: Some(n), ..e.clone() }),
                _ => None,
            })
            .collect();
        let sub = CircuitGraph {
            ground: circuit.ground.clone(),
            vertices: vertex_map.iter().map(|&v| circuit.vertices[v].clone()).collect(),
            partition: vec![id; vertex_map.len()],
            edges,
        };
        sub.check_connected().map_err(|source| CouplingError::PartitionNotConnected { partition: id, source })?;
        sub.check_sound().map_err(|source| CouplingError::UnsoundPartition { partition: id, source })?;
        let mut a_lambda = IntMatrix::zeros(vertex_map.len(), n_lambda);
        for (j, &c) in couplings.iter().enumerate() {
            let e = &circuit.edges[c];
            if let Some(Some(p)) = local(e.pos) {
                a_lambda.set(p, j, 1);
            }
            if let Some(Some(n)) = local(e.neg) {
                a_lambda.set(n, j, -1);
            }
        }
        let port = if id as usize == k {
            CouplingPort::State { a_lambda: a_lambda.clone(), names: coupling_names.clone() }
        } else {
            CouplingPort::Input { a_lambda: a_lambda.clone(), names: coupling_names.clone() }
        };
        let phdae = assemble(&sub, Model::Model1, &port);
        subsystems.push(Subsystem { id, circuit: sub, vertex_map, a_lambda, phdae });
    }
    Ok(PartitionedSystem { merged: circuit.clone(), subsystems, coupling_names, n_lambda, c_hat: interconnection(k, n_lambda) })
}

/// `Ĉ` for `k` subsystems with `n_λ` coupling currents each.
pub fn interconnection(k: usize, n_lambda: usize) -> IntMatrix {
    let mut c = IntMatrix::zeros(k * n_lambda, k * n_lambda);
    let last = (k - 1) * n_lambda;
    for i in 0..k.saturating_sub(1) {
        for j in 0..n_lambda {
            c.set(i * n_lambda + j, last + j, 1);
            c.set(last + j, i * n_lambda + j, -1);
        }
    }
    c
}

/// Per-subsystem port matrices `B̂_i` (coupling) and `B̄_i` (sources).
#[derive(Debug, Clone)]
pub struct PortSplit {
    pub b_hat: DMatrix<f64>,
    pub b_bar: DMatrix<f64>,
}

/// Subsystem systems with their port splits, plus `Ĉ`.
#[derive(Debug, Clone)]
pub struct MultiplyCoupled {
    pub systems: Vec<PhDae>,
    pub ports: Vec<PortSplit>,
    pub c_hat: DMatrix<f64>,
}

impl MultiplyCoupled {
    /// Sum of the subsystem Hamiltonians at stacked states.
    pub fn hamiltonian(&self, states: &[DVector<f64>]) -> Result<f64, crate::laws::LawError> {
        self.systems.iter().zip(states).map(|(s, x)| s.hamiltonian(x)).sum()
    }
}

pub fn assemble_multiply_coupled(ps: &PartitionedSystem) -> MultiplyCoupled {
    let nl = ps.n_lambda;
    let ports = ps
        .subsystems
        .iter()
        .map(|s| {
            let b = &s.phdae.b;
            PortSplit { b_hat: b.columns(0, nl).into_owned(), b_bar: b.columns(nl, b.ncols() - nl).into_owned() }
        })
        .collect();
    MultiplyCoupled { systems: ps.subsystems.iter().map(|s| s.phdae.clone()).collect(), ports, c_hat: ps.c_hat.to_f64() }
}

impl PartitionedSystem {
    pub fn k(&self) -> usize {
        self.subsystems.len()
    }

    /// Stacked `B̂` of the aggregated subsystems.
    pub fn stacked_b_hat(&self) -> DMatrix<f64> {
        let mc = assemble_multiply_coupled(self);
        let blocks: Vec<&DMatrix<f64>> = mc.ports.iter().map(|p| &p.b_hat).collect();
        block_diag(&blocks)
    }

    /// `‖Σ_i A_λiᵀ e_i‖∞` for subsystem node potentials `e_i`.
    pub fn coupling_residual(&self, potentials: &[DVector<f64>]) -> f64 {
        let mut sum = DVector::zeros(self.n_lambda);
        for (s, e) in self.subsystems.iter().zip(potentials) {
            sum += s.a_lambda.to_f64().transpose() * e;
        }
        sum.amax()
    }

    /// JSON summary: dimensions, coupling incidences and `Ĉ`.
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "couplings": self.coupling_names,
            "n_lambda": self.n_lambda,
            "subsystems": self.subsystems.iter().map(|s| json!({
                "id": s.id,
                "vertices": s.circuit.vertices,
                "n_states": s.phdae.n_states(),
                "n_inputs": s.phdae.n_inputs(),
                "a_lambda": s.a_lambda.to_rows(),
            })).collect::<Vec<_>>(),
            "c_hat": self.c_hat.to_rows(),
        })
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

/// Joint condensed system `Ĵ = J − B̂ĈB̂ᵀ` with coordinates grouped by type.
#[derive(Debug, Clone)]
pub struct JointPhDae {
    /// States `(q_C, φ_L, e, j_V, λ)`, each block stacked over subsystems.
    pub system: PhDae,
    /// `B̂ĈB̂ᵀ` in the grouped coordinates.
    pub interconnection: DMatrix<f64>,
}

fn state_group(label: &str) -> u8 {
    ["q(", "phi(", "e(", "j(", "lambda("].iter().position(|p| label.starts_with(p)).expect("known state label") as u8
}

fn effort_group(sys: &PhDae, i: usize) -> u8 {
    match sys.efforts[i].map {
        EffortMap::InverseFlux(_) => 1,
        EffortMap::InverseCharge(_) => 2,
        EffortMap::Identity => match state_group(&sys.labels.state[sys.efforts[i].state]) {
            2 => 0,
            g => g,
        },
    }
}

pub fn assemble_joint_condensed(ps: &PartitionedSystem) -> JointPhDae {
    let parts: Vec<&PhDae> = ps.subsystems.iter().map(|s| &s.phdae).collect();
    let agg = PhDae::aggregate(&parts);
    let nl = ps.n_lambda;
    let mut port_cols = Vec::new();
    let mut source_cols = Vec::new();
    let mut offset = 0;
    for p in &parts {
        port_cols.extend(offset..offset + nl);
        source_cols.extend(offset + nl..offset + p.n_inputs());
        offset += p.n_inputs();
    }
    let b_hat = agg.b.select_columns(&port_cols);
    let m = &b_hat * ps.c_hat.to_f64() * b_hat.transpose();
    let mut sys = agg.clone();
    sys.j = &agg.j - &m;
    sys.b = agg.b.select_columns(&source_cols);
    sys.input_signals = source_cols.iter().map(|&c| agg.input_signals[c]).collect();
    sys.labels.input = source_cols.iter().map(|&c| agg.labels.input[c].clone()).collect();
    sys.labels.output = source_cols.iter().map(|&c| agg.labels.output[c].clone()).collect();

    let mut state_perm: Vec<usize> = (0..sys.n_states()).collect();
    state_perm.sort_by_key(|&i| state_group(&sys.labels.state[i]));
    let mut effort_perm: Vec<usize> = (0..sys.efforts.len()).collect();
    effort_perm.sort_by_key(|&i| effort_group(&sys, i));
    let system = sys.permuted(&state_perm, &effort_perm);
    let interconnection = DMatrix::from_fn(m.nrows(), m.ncols(), |r, c| m[(effort_perm[r], effort_perm[c])]);
    JointPhDae { system, interconnection }
}
