use super::{law_of, ElementKind, ElementValue, Netlist, Signal};
use crate::laws::{CapacitorLaw, InductorLaw, ResistorLaw};
use crate::linalg::{exact_rank, kernel_basis, min_support_kernel_vector, IntMatrix};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CircuitError {
    #[error("circuit is not connected: vertices {unreached:?} cannot reach ground")]
    NotConnected { unreached: Vec<String> },
    #[error("circuit violates soundness ({reason}): {edges:?}")]
    SoundnessViolation { reason: String, edges: Vec<String>, vertices: Vec<String> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeKind {
    Resistor,
    Capacitor,
    Inductor,
    VoltageSource,
    CurrentSource,
    Coupling,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EdgeLaw {
    Resistor(ResistorLaw),
    Capacitor(CapacitorLaw),
    Inductor(InductorLaw),
    Voltage(Signal),
    Current(Signal),
    Coupling,
}

impl EdgeLaw {
    pub fn kind(&self) -> EdgeKind {
        match self {
            Self::Resistor(_) => EdgeKind::Resistor,
            Self::Capacitor(_) => EdgeKind::Capacitor,
            Self::Inductor(_) => EdgeKind::Inductor,
            Self::Voltage(_) => EdgeKind::VoltageSource,
            Self::Current(_) => EdgeKind::CurrentSource,
            Self::Coupling => EdgeKind::Coupling,
        }
    }
}

/// A directed edge from `pos` to `neg`; `None` is the ground vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub name: String,
    pub pos: Option<usize>,
    pub neg: Option<usize>,
    pub law: EdgeLaw,
}

impl Edge {
    pub fn kind(&self) -> EdgeKind {
        self.law.kind()
    }
}

/// Grounded circuit graph with typed edges in declaration order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitGraph {
    pub ground: String,
    pub vertices: Vec<String>,
    /// Partition id of every non-ground vertex.
    pub partition: Vec<u32>,
    pub edges: Vec<Edge>,
}

impl CircuitGraph {
    pub fn n_v(&self) -> usize {
        self.vertices.len()
    }

    pub fn edges_of(&self, kind: EdgeKind) -> Vec<usize> {
        (0..self.edges.len()).filter(|&i| self.edges[i].kind() == kind).collect()
    }

    pub fn count(&self, kind: EdgeKind) -> usize {
        self.edges.iter().filter(|e| e.kind() == kind).count()
    }

    pub fn vertex_index(&self, name: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v == name)
    }

    pub fn vertex_name(&self, v: Option<usize>) -> &str {
        v.map_or(self.ground.as_str(), |i| self.vertices[i].as_str())
    }

    /// Grounded incidence matrix of the given edges (columns in the given order).
    pub fn incidence_of(&self, edges: &[usize]) -> IntMatrix {
        let mut m = IntMatrix::zeros(self.n_v(), edges.len());
        for (col, &k) in edges.iter().enumerate() {
            let e = &self.edges[k];
            if let Some(p) = e.pos {
                m.set(p, col, 1);
            }
            if let Some(n) = e.neg {
                m.set(n, col, -1);
            }
        }
        m
    }

    pub fn incidence(&self, kind: EdgeKind) -> IntMatrix {
        self.incidence_of(&self.edges_of(kind))
    }

    /// Incidence over all vertices; the ground row comes last.
    pub fn full_incidence(&self) -> IntMatrix {
        let mut m = IntMatrix::zeros(self.n_v() + 1, self.edges.len());
        let g = self.n_v();
        for (col, e) in self.edges.iter().enumerate() {
            m.set(e.pos.unwrap_or(g), col, 1);
            m.set(e.neg.unwrap_or(g), col, -1);
        }
        m
    }

    pub fn a_r(&self) -> IntMatrix {
        self.incidence(EdgeKind::Resistor)
    }
    pub fn a_c(&self) -> IntMatrix {
        self.incidence(EdgeKind::Capacitor)
    }
    pub fn a_l(&self) -> IntMatrix {
        self.incidence(EdgeKind::Inductor)
    }
    pub fn a_v(&self) -> IntMatrix {
        self.incidence(EdgeKind::VoltageSource)
    }
    pub fn a_i(&self) -> IntMatrix {
        self.incidence(EdgeKind::CurrentSource)
    }
    pub fn a_k(&self) -> IntMatrix {
        self.incidence(EdgeKind::Coupling)
    }

    pub fn names_of(&self, kind: EdgeKind) -> Vec<String> {
        self.edges_of(kind).into_iter().map(|k| self.edges[k].name.clone()).collect()
    }

    pub fn n_partitions(&self) -> u32 {
        self.partition.iter().copied().max().unwrap_or(1)
    }

    /// Monolithic view: coupling branches become zero-volt sources.
    pub fn merged(&self) -> CircuitGraph {
        let mut c = self.clone();
        for e in &mut c.edges {
            if e.law == EdgeLaw::Coupling {
                e.law = EdgeLaw::Voltage(Signal::Dc(0.0));
            }
        }
        c
    }

    /// Vertices that cannot reach ground through any edge.
    pub fn unreachable_vertices(&self) -> Vec<usize> {
        let n = self.n_v();
        let mut adj = vec![Vec::new(); n + 1];
        for e in &self.edges {
            let (a, b) = (e.pos.unwrap_or(n), e.neg.unwrap_or(n));
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut seen = vec![false; n + 1];
        let mut stack = vec![n];
        seen[n] = true;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        (0..n).filter(|&v| !seen[v]).collect()
    }

    pub fn check_connected(&self) -> Result<(), CircuitError> {
        let unreached = self.unreachable_vertices();
        if unreached.is_empty() {
            Ok(())
        } else {
            Err(CircuitError::NotConnected { unreached: unreached.iter().map(|&v| self.vertices[v].clone()).collect() })
        }
    }

    /// No cycle of voltage sources and no cut of current sources; coupling
    /// branches count as voltage sources.
    pub fn check_sound(&self) -> Result<(), CircuitError> {
        let merged = self.merged();
        let v_edges = merged.edges_of(EdgeKind::VoltageSource);
        if let Some(x) = min_support_kernel_vector(&merged.incidence_of(&v_edges)) {
            let edges: Vec<String> =
                v_edges.iter().zip(&x).filter(|(_, &c)| c != 0).map(|(&k, _)| merged.edges[k].name.clone()).collect();
            let vertices = self.vertices_touched(edges.iter().map(|n| self.edge_by_name(n)));
            return Err(CircuitError::SoundnessViolation { reason: "cycle of voltage sources".into(), edges, vertices });
        }
        let rest: Vec<usize> =
            (0..merged.edges.len()).filter(|&k| merged.edges[k].kind() != EdgeKind::CurrentSource).collect();
        let a_rest = merged.incidence_of(&rest);
        if exact_rank(&a_rest) < self.n_v() {
            let w = cut_potential(&a_rest);
            let (edges, vertices) = self.cut_witness(&w);
            return Err(CircuitError::SoundnessViolation { reason: "cut of current sources".into(), edges, vertices });
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CircuitError> {
        self.check_connected()?;
        self.check_sound()
    }

    fn edge_by_name(&self, name: &str) -> usize {
        self.edges.iter().position(|e| e.name == name).expect("known edge")
    }

    /// Names of the vertices touched by the given edges, ground included.
    pub fn vertices_touched(&self, edges: impl IntoIterator<Item = usize>) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for k in edges {
            for v in [self.edges[k].pos, self.edges[k].neg] {
                let name = self.vertex_name(v).to_string();
                if !out.contains(&name) {
                    out.push(name);
                }
            }
        }
        out
    }

    /// Edges whose endpoint weights differ (ground weighs zero) and the weighted vertices.
    pub fn cut_witness(&self, weights: &[i64]) -> (Vec<String>, Vec<String>) {
        let w = |v: Option<usize>| v.map_or(0, |i| weights[i]);
        let edges = self.edges.iter().filter(|e| w(e.pos) != w(e.neg)).map(|e| e.name.clone()).collect();
        let vertices = (0..self.n_v()).filter(|&i| weights[i] != 0).map(|i| self.vertices[i].clone()).collect();
        (edges, vertices)
    }
}

/// A nonzero vertex weighting annihilated by `a_restᵀ`, chosen with minimal support.
pub(crate) fn cut_potential(a_rest: &IntMatrix) -> Vec<i64> {
    let k = kernel_basis(&a_rest.transpose());
    (0..k.ncols())
        .map(|j| k.column(j))
        .min_by_key(|v| v.iter().filter(|&&x| x != 0).count())
        .expect("kernel is nontrivial")
}

fn graph_of(netlist: &Netlist) -> CircuitGraph {
    let vertices = netlist.vertices();
    let index = |name: &str| -> Option<usize> {
        if name == netlist.ground {
            None
        } else {
            vertices.iter().position(|v| v == name)
        }
    };
    let partition = vertices.iter().map(|v| netlist.partition_of(v)).collect();
    let mut edges = Vec::with_capacity(netlist.elements.len() + netlist.couplings.len());
    for e in &netlist.elements {
        let law = match (e.kind, e.value) {
            (ElementKind::V, ElementValue::Source(s)) => EdgeLaw::Voltage(s),
            (ElementKind::I, ElementValue::Source(s)) => EdgeLaw::Current(s),
            (kind, ElementValue::Law(spec)) => {
                let law = law_of(kind, spec);
                match kind {
                    ElementKind::R => EdgeLaw::Resistor(ResistorLaw(law)),
                    ElementKind::C => EdgeLaw::Capacitor(CapacitorLaw(law)),
                    ElementKind::L => EdgeLaw::Inductor(InductorLaw(law)),
                    _ => unreachable!("sources carry signals"),
                }
            }
            _ => unreachable!("parser pairs kinds with values"),
        };
        edges.push(Edge { name: e.name.clone(), pos: index(&e.pos), neg: index(&e.neg), law });
    }
    for k in &netlist.couplings {
        edges.push(Edge { name: k.name.clone(), pos: index(&k.pos), neg: index(&k.neg), law: EdgeLaw::Coupling });
    }
    CircuitGraph { ground: netlist.ground.clone(), vertices, partition, edges }
}

/// Builds the grounded graph of a parsed netlist and checks connectivity and soundness.
pub fn build_circuit(netlist: &Netlist) -> Result<CircuitGraph, CircuitError> {
    let graph = graph_of(netlist);
    graph.validate()?;
    Ok(graph)
}
