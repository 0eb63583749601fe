//! Windowed dynamic iteration on two coupled RC blocks, Jacobi against
//! Gauss–Seidel, checked against the monolithic solution.
//!
//! ```bash
//! cargo run --example cosim_jacobi_gs
//! ```

use phcirc::corpus;
use phcirc::coupling::{assemble_joint_condensed, split_circuit};
use phcirc::dynit::{run_dynamic_iteration_with_reference, Scheme, WindowConfig};
use phcirc::solver::{integrate, source_inputs, TimeGrid};

fn main() {
    let ps = split_circuit(&corpus::circuit("two_block_rc.cir")).unwrap();
    let base = WindowConfig { window: 0.1, h: 0.01, tol: 1e-8, ..WindowConfig::default() };
    let joint = assemble_joint_condensed(&ps).system;
    let grid = TimeGrid::uniform(0.0, 1.0, base.h).unwrap();
    let mono = integrate(&joint, &grid, &source_inputs(&joint), base.integrator, &base.newton).unwrap();

    for scheme in [Scheme::Jacobi, Scheme::GaussSeidel] {
        let cfg = WindowConfig { scheme, ..base };
        let res = run_dynamic_iteration_with_reference(&ps, 0.0, 1.0, &cfg, Some(&mono)).unwrap();
        println!("{scheme:?}");
        let first = &res.trace.windows[0];
        println!("  window 0: sweep  update       defect       error");
        for s in &first.sweeps {
            println!("            {:>5}  {:<11.3e}  {:<11.3e}  {:.3e}", s.sweep, s.update_norm, s.defect, s.err_vs_monolithic.unwrap());
        }
        let stitched = res.states_in(&joint);
        let dev = stitched.iter().zip(&mono.states).map(|(a, b)| (a - b).amax()).fold(0.0, f64::max);
        println!("  {} windows, at most {} sweeps, deviation from monolithic {dev:.2e}", res.trace.windows.len(), res.trace.max_sweeps());
    }
}
