//! Parse a netlist, print it back, and inspect the circuit graph.
//!
//! ```bash
//! cargo run --example netlist_roundtrip
//! ```

use phcirc::netlist::{build_circuit, parse_netlist, EdgeKind};

const TEXT: &str = "\
.title diode-clamped RC with a sinusoidal source
V1 in 0 SIN 2 1k 0
R1 in out R=1k
C1 out 0 C=1u
R2 out 0 G=diode:1e-12,0.025
";

fn main() {
    let netlist = parse_netlist(TEXT).expect("valid netlist");
    println!("canonical form:\n{netlist}");
    assert_eq!(parse_netlist(&netlist.to_string()).unwrap(), netlist);

    let circuit = build_circuit(&netlist).expect("sound circuit");
    println!("vertices: {:?}", circuit.vertices);
    for kind in [EdgeKind::Resistor, EdgeKind::Capacitor, EdgeKind::VoltageSource] {
        println!("{kind:?}: {:?}", circuit.names_of(kind));
    }
    println!("incidence (last row is ground):{}", circuit.full_incidence().to_f64());

    for bad in ["R1 a 0 R=1\nX1 a 0\n", "V1 a 0 DC 1\nV2 a 0 DC 2\n", "R1 a a R=1\n"] {
        let err = parse_netlist(bad).map_err(|e| e.to_string()).and_then(|n| build_circuit(&n).map(|_| ()).map_err(|e| e.to_string()));
        println!("rejected: {}", err.unwrap_err());
    }
}
