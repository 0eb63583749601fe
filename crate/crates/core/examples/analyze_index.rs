//! Topological index classification of the canonical circuits, in both
//! the charge/flux model and the model with explicit capacitor currents.
//!
//! ```bash
//! cargo run --example analyze_index
//! ```

use phcirc::corpus;
use phcirc::topology::{classify_index, Model};

fn main() {
    for name in ["series_vrc.cir", "cv_loop.cir", "li_cut.cir", "c_loop.cir", "rlc_bridge.cir"] {
        let circuit = corpus::circuit(name);
        println!("{name}");
        for model in [Model::Model1, Model::Model2] {
            let report = classify_index(&circuit, model).expect("sound circuit");
            println!("  {model:?}: index {}", report.index);
            for d in &report.defects {
                println!("    {:?} through {:?}", d.kind, d.edges);
            }
        }
    }
}
