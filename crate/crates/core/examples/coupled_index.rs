//! Index of partitioned circuits seen three ways: the merged circuit, each
//! block driven by its coupling inputs, and each block with its coupling
//! equations.
//!
//! ```bash
//! cargo run --example coupled_index
//! ```

use phcirc::corpus;
use phcirc::coupling::split_circuit;
use phcirc::netlist::{build_circuit, parse_netlist};
use phcirc::topology::classify_coupled;

/// Two blocks that are index 1 with their coupling equations but whose
/// merged circuit has an inductor/current-source cut.
const INDUCTOR_CUT: &str = "L1a 0 a1 L=1\nR2a a1 a2 R=1\nI3a a1 a2 SIN 1 1\nL1b b1 0 L=1\nK1 a1@1 b1@2\n.partition 2 b1\n";

fn main() {
    let mut cases: Vec<(String, phcirc::CircuitGraph)> = ["two_block_rc.cir", "star_three_block.cir", "terminal_on_capacitor.cir"]
        .into_iter()
        .map(|n| (n.to_string(), corpus::circuit(n)))
        .collect();
    cases.push(("inductor cut".into(), build_circuit(&parse_netlist(INDUCTOR_CUT).unwrap()).unwrap()));

    for (name, circuit) in cases {
        let ps = split_circuit(&circuit).unwrap();
        let r = classify_coupled(&ps);
        println!(
            "{name}: {} blocks, merged index {}, input-driven {:?}, with coupling {:?}",
            ps.k(),
            r.monolithic_index(),
            r.input_driven.iter().map(|x| x.index).collect::<Vec<_>>(),
            r.with_coupling.iter().map(|x| x.index).collect::<Vec<_>>(),
        );
        for d in r.with_coupling.iter().flat_map(|x| &x.defects) {
            println!("    {:?} through {:?}", d.kind, d.edges);
        }
    }
}
