//! Lossless LC tank: the trapezoidal rule keeps the stored energy, implicit
//! Euler bleeds it off.
//!
//! ```bash
//! cargo run --example simulate_lc
//! ```

use nalgebra::DVector;
use phcirc::corpus;
use phcirc::phdae::assemble_model1;
use phcirc::solver::{integrate_with_guess, source_inputs, Integrator, NewtonConfig, TimeGrid};

fn main() {
    let sys = assemble_model1(&corpus::circuit("lc_oscillator.cir")).unwrap();
    let period = 2.0 * std::f64::consts::PI;
    let grid = TimeGrid::uniform(0.0, 10.0 * period, period / 200.0).unwrap();
    let mut guess = DVector::zeros(sys.n_states());
    guess[sys.state_index("q(C1)").unwrap()] = 1.0;

    for integrator in [Integrator::Trapezoidal, Integrator::ImplicitEuler] {
        let w = integrate_with_guess(&sys, &grid, &guess, &source_inputs(&sys), integrator, &NewtonConfig::default()).unwrap();
        let h0 = sys.hamiltonian(&w.states[0]).unwrap();
        let h1 = sys.hamiltonian(w.final_state()).unwrap();
        println!("{integrator:>12}: H(0) = {h0:.6}, H(10T) = {h1:.6}, relative change {:.2e}", (h1 - h0) / h0);
    }

    let w = integrate_with_guess(&sys, &grid, &guess, &source_inputs(&sys), Integrator::Trapezoidal, &NewtonConfig::default()).unwrap();
    println!("\nfirst rows of the waveform:");
    for line in w.to_csv().lines().take(4) {
        println!("  {line}");
    }
}
