//! Constitutive laws: evaluation, inversion and stored energy.
//!
//! ```bash
//! cargo run --example nonlinear_laws
//! ```

use phcirc::laws::ScalarLaw;

fn main() {
    let laws = [ScalarLaw::Linear { slope: 2.0 }, ScalarLaw::Cubic { c1: 1.0, c3: 0.5 }, ScalarLaw::Diode { is: 1e-3, vt: 0.5 }];
    for law in laws {
        println!("{law}");
        for s in [0.5, 2.0, 10.0] {
            let x = law.invert(s).unwrap();
            println!("  f⁻¹({s}) = {x:.6}, f(f⁻¹({s})) = {:.6}, energy({s}) = {:.6}", law.eval(x), law.energy(s).unwrap());
        }
    }
}
