//! Rank tests for cycles and cuts, kernel bases, and index classification.
//!
//! A set of edges `K` contains a cycle iff its incidence matrix `A_K` has a
//! nontrivial kernel, and the circuit contains a cut made only of `K` edges
//! iff the incidence of all remaining edges has a nontrivial left kernel.
//! Ranks are computed exactly on the integer incidence matrices.

use crate::coupling::PartitionedSystem;
use crate::linalg::{self, exact_rank, has_full_column_rank, kernel_basis, IntMatrix};
use crate::netlist::{CircuitError, CircuitGraph, Edge, EdgeKind, EdgeLaw, Signal};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TopologyError {
    #[error("circuit is unsound: {0}")]
    UnsoundCircuit(#[from] CircuitError),
}

/// Circuit formulation: charge/flux states only, or with capacitor currents added.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Model1,
    Model2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DefectKind {
    /// Cycle of capacitors and voltage sources containing at least one source.
    CVLoop,
    /// Cycle of capacitors only.
    CLoop,
    /// Cut of inductors and/or current sources.
    LICut,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Defect {
    pub kind: DefectKind,
    pub edges: Vec<String>,
    pub vertices: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexReport {
    pub model: Model,
    pub index: u8,
    pub defects: Vec<Defect>,
}

/// Numerical rank via column-pivoted QR with threshold `max(m,n)·ε·σ_max`.
pub fn rank(m: &DMatrix<f64>) -> usize {
    linalg::numerical_rank(m)
}

pub fn has_full_column_rank_f64(m: &DMatrix<f64>) -> bool {
    rank(m) == m.ncols()
}

/// True iff no cut consists only of `K` edges, i.e. `ker A_restᵀ = {0}`.
pub fn check_cut_free(a_rest: &IntMatrix, a_k: &IntMatrix) -> bool {
    debug_assert!(a_k.ncols() == 0 || a_k.nrows() == a_rest.nrows());
    exact_rank(a_rest) == a_rest.nrows()
}

/// True iff the edges of `A_K` contain no cycle, i.e. `ker A_K = {0}`.
pub fn check_cycle_free(a_k: &IntMatrix) -> bool {
    has_full_column_rank(a_k)
}

/// True iff every cycle in `K` consists of `L` edges only:
/// `{x | A_{K−L} x ∈ im A_L} = {0}`.
pub fn check_cycle_free_except(a_k_minus_l: &IntMatrix, a_l: &IntMatrix) -> bool {
    let joint = IntMatrix::hcat(&[a_k_minus_l, a_l]);
    exact_rank(&joint) == a_k_minus_l.ncols() + exact_rank(a_l)
}

/// `Z_C` spans `ker A_Cᵀ`, `Z'_C` spans `im A_C`, `Z_{V−C}` spans `ker A_Vᵀ Z_C`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelBases {
    pub z_c: IntMatrix,
    pub z_c_prime: IntMatrix,
    pub z_v_c: IntMatrix,
}

pub fn kernel_bases(a_c: &IntMatrix, a_v: &IntMatrix) -> KernelBases {
    let z_c = kernel_basis(&a_c.transpose());
    let z_c_prime = a_c.select_columns(&linalg::column_basis_indices(a_c));
    let z_v_c = kernel_basis(&a_v.transpose().mul(&z_c));
    KernelBases { z_c, z_c_prime, z_v_c }
}

/// Differentiation index of the circuit equations from topology alone.
///
/// Coupling branches are treated as zero-volt sources. Unsound circuits are refused.
pub fn classify_index(circuit: &CircuitGraph, model: Model) -> Result<IndexReport, TopologyError> {
    circuit.check_sound()?;
    Ok(classify_unchecked(&circuit.merged(), model))
}

pub(crate) fn classify_unchecked(c: &CircuitGraph, model: Model) -> IndexReport {
    let ic = c.edges_of(EdgeKind::Capacitor);
    let iv = c.edges_of(EdgeKind::VoltageSource);
    let crv: Vec<usize> = (0..c.edges.len())
        .filter(|&k| matches!(c.edges[k].kind(), EdgeKind::Capacitor | EdgeKind::Resistor | EdgeKind::VoltageSource))
        .collect();
    let mut defects = Vec::new();

    if let Some(w) = li_cut_potential(c, &crv) {
        let (edges, vertices) = c.cut_witness(&w);
        defects.push(Defect { kind: DefectKind::LICut, edges, vertices });
    }

    let cv: Vec<usize> = ic.iter().chain(&iv).copied().collect();
    let a_cv = c.incidence_of(&cv);
    let kernel = kernel_basis(&a_cv);
    let pick = |want_source: bool| {
        (0..kernel.ncols())
            .map(|j| kernel.column(j))
            .filter(|v| v[ic.len()..].iter().any(|&x| x != 0) == want_source)
            .min_by_key(|v| v.iter().filter(|&&x| x != 0).count())
    };
    let to_defect = |kind, v: Vec<i64>| {
        let support: Vec<usize> = cv.iter().zip(&v).filter(|(_, &x)| x != 0).map(|(&k, _)| k).collect();
        Defect {
            kind,
            edges: support.iter().map(|&k| c.edges[k].name.clone()).collect(),
            vertices: c.vertices_touched(support.iter().copied()),
        }
    };
    // Any kernel vector with a nonzero source part is a CV-loop witness and exists
    // iff ker Z_Cᵀ A_V ≠ {0}.
    let kb = kernel_bases(&c.incidence_of(&ic), &c.incidence_of(&iv));
    let cv_free = has_full_column_rank(&kb.z_c.transpose().mul(&c.incidence_of(&iv)));
    if !cv_free {
        let v = pick(true).expect("source loop has a kernel witness");
        defects.push(to_defect(DefectKind::CVLoop, v));
    }
    if model == Model::Model2 && !check_cycle_free(&c.incidence_of(&ic)) {
        let v = pick(false).expect("capacitor loop has a kernel witness");
        defects.push(to_defect(DefectKind::CLoop, v));
    }
    IndexReport { model, index: if defects.is_empty() { 1 } else { 2 }, defects }
}

fn li_cut_potential(c: &CircuitGraph, crv: &[usize]) -> Option<Vec<i64>> {
    let a = c.incidence_of(crv);
    if exact_rank(&a) == c.n_v() {
        None
    } else {
        Some(crate::netlist::cut_potential(&a))
    }
}

/// Index verdicts for the three views of a partitioned circuit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoupledIndexReport {
    /// All subsystems plus the coupling equation as one system.
    pub monolithic: IndexReport,
    /// Full column rank of the stacked `Z_{V−C}ᵀ Z_Cᵀ A_λ` blocks.
    pub auxiliary_coupling_rank: bool,
    /// Each subsystem alone with the coupling currents as given input.
    pub input_driven: Vec<IndexReport>,
    /// Each subsystem together with its coupling equations.
    pub with_coupling: Vec<IndexReport>,
}

impl CoupledIndexReport {
    pub fn monolithic_index(&self) -> u8 {
        self.monolithic.index
    }
    pub fn input_driven_index(&self) -> u8 {
        self.input_driven.iter().map(|r| r.index).max().unwrap_or(1)
    }
    pub fn with_coupling_index(&self) -> u8 {
        self.with_coupling.iter().map(|r| r.index).max().unwrap_or(1)
    }
}

/// Stacked rank conditions for the monolithic view of a partitioned system.
pub struct StackedConditions {
    pub no_li_cut: bool,
    pub no_cv_loop: bool,
    pub auxiliary: bool,
}

pub fn stacked_conditions(ps: &PartitionedSystem) -> StackedConditions {
    let subs = &ps.subsystems;
    let a_c: Vec<IntMatrix> = subs.iter().map(|s| s.circuit.a_c()).collect();
    let a_r: Vec<IntMatrix> = subs.iter().map(|s| s.circuit.a_r()).collect();
    let a_v: Vec<IntMatrix> = subs.iter().map(|s| s.circuit.a_v()).collect();
    let bd = |v: &[IntMatrix]| IntMatrix::block_diag(&v.iter().collect::<Vec<_>>());
    let a_lambda = IntMatrix::vcat(&subs.iter().map(|s| &s.a_lambda).collect::<Vec<_>>());
    let v_lambda = IntMatrix::hcat(&[&bd(&a_v), &a_lambda]);
    let first = IntMatrix::hcat(&[&bd(&a_c), &bd(&a_r), &v_lambda]);
    let no_li_cut = exact_rank(&first) == first.nrows();

    let bases: Vec<KernelBases> = a_c.iter().zip(&a_v).map(|(c, v)| kernel_bases(c, v)).collect();
    let z_c_t = bd(&bases.iter().map(|b| b.z_c.transpose()).collect::<Vec<_>>());
    let no_cv_loop = has_full_column_rank(&z_c_t.mul(&v_lambda));

    let aux_blocks: Vec<IntMatrix> = bases
        .iter()
        .zip(subs)
        .map(|(b, s)| b.z_v_c.transpose().mul(&b.z_c.transpose()).mul(&s.a_lambda))
        .collect();
    let auxiliary = has_full_column_rank(&IntMatrix::vcat(&aux_blocks.iter().collect::<Vec<_>>()));
    StackedConditions { no_li_cut, no_cv_loop, auxiliary }
}

/// Classifies the monolithic, input-driven and coupled-subsystem views.
pub fn classify_coupled(ps: &PartitionedSystem) -> CoupledIndexReport {
    let cond = stacked_conditions(ps);
    let mut monolithic = classify_unchecked(&ps.merged.merged(), Model::Model1);
    let stacked_index = if cond.no_li_cut && cond.no_cv_loop { 1 } else { 2 };
    debug_assert_eq!(stacked_index, monolithic.index);
    monolithic.index = stacked_index;

    let input_driven = ps.subsystems.iter().map(|s| classify_unchecked(&s.circuit, Model::Model1)).collect();
    let with_coupling = ps
        .subsystems
        .iter()
        .map(|s| {
            let mut c = s.circuit.clone();
            for (j, name) in ps.coupling_names.iter().enumerate() {
                let col = s.a_lambda.column(j);
                if let Some(row) = col.iter().position(|&x| x != 0) {
                    let (pos, neg) = if col[row] > 0 { (Some(row), None) } else { (None, Some(row)) };
                    c.edges.push(Edge { name: name.clone(), pos, neg, law: EdgeLaw::Voltage(Signal::Dc(0.0)) });
                }
            }
            classify_unchecked(&c, Model::Model1)
        })
        .collect();
    CoupledIndexReport { monolithic, auxiliary_coupling_rank: cond.auxiliary, input_driven, with_coupling }
}
