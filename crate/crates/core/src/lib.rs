//! Port-Hamiltonian circuit DAEs.
//!
//! Netlists are parsed into grounded circuit graphs, assembled as
//! port-Hamiltonian differential-algebraic systems in two charge/flux
//! oriented formulations, classified by differentiation index from the
//! graph topology, integrated in time, split into coupled subsystems and
//! solved by Jacobi or Gauss–Seidel dynamic iteration with energy
//! bookkeeping along the way.

pub mod cli;
pub mod corpus;
pub mod coupling;
pub mod dynit;
pub mod laws;
pub mod linalg;
pub mod netlist;
pub mod phdae;
pub mod solver;
pub mod topology;

pub use coupling::{assemble_joint_condensed, split_circuit, PartitionedSystem};
pub use laws::{CapacitorLaw, InductorLaw, ResistorLaw, ScalarLaw};
pub use netlist::{build_circuit, parse_netlist, CircuitGraph, Netlist};
pub use phdae::{assemble_model1, assemble_model2, Model, PhDae};
pub use solver::{integrate, Integrator, NewtonConfig, TimeGrid, Waveform};
pub use topology::{classify_coupled, classify_index, IndexReport};
