//! Energy bookkeeping of a driven RLC circuit: stored energy change plus
//! dissipation equals supplied energy, up to a residual that shrinks with h².
//!
//! ```bash
//! cargo run --example energy_audit
//! ```

use phcirc::corpus;
use phcirc::phdae::{assemble_model1, energy_audit};
use phcirc::solver::{integrate, source_inputs, Integrator, NewtonConfig, TimeGrid};

fn main() {
    let sys = assemble_model1(&corpus::circuit("driven_rlc.cir")).unwrap();
    let inputs = source_inputs(&sys);
    let cfg = NewtonConfig { abs_tol: 1e-13, rel_tol: 1e-13, ..NewtonConfig::default() };
    println!("{:>8} {:>12} {:>12} {:>12} {:>12}", "h", "ΔH", "dissipated", "supplied", "|residual|");
    for h in [4e-2, 2e-2, 1e-2, 5e-3] {
        let grid = TimeGrid::uniform(0.0, 2.0, h).unwrap();
        let w = integrate(&sys, &grid, &inputs, Integrator::Trapezoidal, &cfg).unwrap();
        let t = energy_audit(&sys, &w, &inputs).unwrap().totals;
        println!("{h:>8} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e}", t.delta_h, t.dissipated, t.supplied, t.abs_residual);
    }
}
