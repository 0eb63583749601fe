//! The system solved by one sweep, written as a port-Hamiltonian descriptor
//! system with the previous iterate as an extra input.
//!
//! ```bash
//! cargo run --example iteration_phdae
//! ```

use phcirc::corpus;
use phcirc::coupling::split_circuit;
use phcirc::dynit::{assemble_iteration_phdae, Scheme};
use phcirc::linalg::skew_defect;

fn main() {
    let ps = split_circuit(&corpus::circuit("star_three_block.cir")).unwrap();
    for scheme in [Scheme::Jacobi, Scheme::GaussSeidel] {
        let it = assemble_iteration_phdae(&ps, scheme);
        println!(
            "{scheme:?}: E {}×{}, B {}×{}, ‖J + Jᵀ‖ = {}, ‖interconnection skew defect‖ = {}",
            it.e.nrows(),
            it.e.ncols(),
            it.b.nrows(),
            it.b.ncols(),
            skew_defect(&it.j),
            skew_defect(&it.interconnection)
        );
        if scheme == Scheme::GaussSeidel {
            println!("increment input:\n{}", it.increment_input.transpose());
        }
    }
}
