use super::PhDae;
use crate::laws::LawError;
use crate::solver::{InputFn, Waveform};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AuditError {
    #[error("waveform does not match the system: {0}")]
    GridMismatch(String),
    #[error(transparent)]
    Law(#[from] LawError),
}

/// Energy bookkeeping over one grid interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditInterval {
    pub t0: f64,
    pub t1: f64,
    pub delta_h: f64,
    /// `∫ zᵀ r(z) dt`.
    pub dissipated: f64,
    /// `∫ yᵀ u dt`.
    pub supplied: f64,
    /// `ΔH + dissipated − supplied`.
    pub residual: f64,
    /// `supplied − ΔH`; negative values beyond quadrature error violate passivity.
    pub margin: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct AuditTotals {
    pub delta_h: f64,
    pub dissipated: f64,
    pub supplied: f64,
    pub residual: f64,
    pub margin: f64,
    /// Sum of per-interval residual magnitudes.
    pub abs_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyAudit {
    pub hamiltonian: Vec<f64>,
    pub intervals: Vec<AuditInterval>,
    pub totals: AuditTotals,
}

/// Trapezoidal energy balance of a sampled trajectory.
pub fn energy_audit(sys: &PhDae, waveform: &Waveform, inputs: &InputFn) -> Result<EnergyAudit, AuditError> {
    let n = waveform.len();
    if n != waveform.grid.len() || n < 2 {
        return Err(AuditError::GridMismatch(format!("{} samples on a grid of {} nodes", n, waveform.grid.len())));
    }
    if let Some(x) = waveform.states.iter().find(|x| x.len() != sys.n_states()) {
        return Err(AuditError::GridMismatch(format!("state dimension {} but the system has {}", x.len(), sys.n_states())));
    }
    let mut hamiltonian = Vec::with_capacity(n);
    let mut dissipation = Vec::with_capacity(n);
    let mut supply = Vec::with_capacity(n);
    for (x, &t) in waveform.states.iter().zip(waveform.grid.times()) {
        let z = sys.effort(x)?;
        let mut u = DVector::zeros(sys.n_inputs());
        inputs(t, u.as_mut_slice());
        hamiltonian.push(sys.hamiltonian(x)?);
        dissipation.push(z.dot(&sys.dissipation(&z)));
        supply.push(sys.output(&z).dot(&u));
    }
    let times = waveform.grid.times();
    let mut totals = AuditTotals::default();
    let intervals: Vec<AuditInterval> = (0..n - 1)
        .map(|i| {
            let dt = times[i + 1] - times[i];
            let delta_h = hamiltonian[i + 1] - hamiltonian[i];
            let dissipated = 0.5 * dt * (dissipation[i] + dissipation[i + 1]);
            let supplied = 0.5 * dt * (supply[i] + supply[i + 1]);
            let rec = AuditInterval {
                t0: times[i],
                t1: times[i + 1],
                delta_h,
                dissipated,
                supplied,
                residual: delta_h + dissipated - supplied,
                margin: supplied - delta_h,
            };
            totals.delta_h += rec.delta_h;
            totals.dissipated += rec.dissipated;
            totals.supplied += rec.supplied;
            totals.residual += rec.residual;
            totals.margin += rec.margin;
            totals.abs_residual += rec.residual.abs();
            rec
        })
        .collect();
    Ok(EnergyAudit { hamiltonian, intervals, totals })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{build_circuit, parse_netlist};
    use crate::phdae::assemble_model1;
    use crate::solver::{integrate, integrate_from, source_inputs, Integrator, NewtonConfig, TimeGrid};

    fn system(text: &str) -> PhDae {
        assemble_model1(&build_circuit(&parse_netlist(text).unwrap()).unwrap()).unwrap()
    }

    #[test]
    fn rc_decay_only_dissipates() {
        let sys = system("C1 n1 0 C=1\nR1 n1 0 R=1");
        let src = source_inputs(&sys);
        let cfg = NewtonConfig::default();
        let grid = TimeGrid::uniform(0.0, 2.0, 0.01).unwrap();
        let w = integrate_from(&sys, &grid, DVector::from_vec(vec![1.0, 1.0]), &src, Integrator::Trapezoidal, &cfg).unwrap();
        let a = energy_audit(&sys, &w, &src).unwrap();
        assert_eq!(a.totals.supplied, 0.0);
        assert!(a.totals.delta_h < 0.0);
        assert!(a.totals.residual.abs() < 1e-4);
    }

    #[test]
    fn driven_rc_steady_state_balances() {
        let sys = system("V1 n1 0 DC 2\nR1 n1 n2 R=4\nC1 n2 0 C=0.1\nR2 n2 0 R=4");
        let src = source_inputs(&sys);
        let grid = TimeGrid::uniform(0.0, 10.0, 0.01).unwrap();
        let w = integrate(&sys, &grid, &src, Integrator::Trapezoidal, &NewtonConfig::default()).unwrap();
        let a = energy_audit(&sys, &w, &src).unwrap();
        let last = a.intervals.last().unwrap();
        assert!(last.delta_h.abs() < 1e-12);
        // P = V²/(R1 + R2)
        assert!((last.supplied / 0.01 - 4.0 / 8.0).abs() < 1e-9);
        assert!((last.dissipated - last.supplied).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let sys = system("C1 n1 0 C=1\nR1 n1 0 R=1");
        let other = system("C1 n1 0 C=1\nL1 n1 0 L=1");
        let src = source_inputs(&sys);
        let grid = TimeGrid::uniform(0.0, 1.0, 0.1).unwrap();
        let w = integrate(&other, &grid, &source_inputs(&other), Integrator::Trapezoidal, &NewtonConfig::default()).unwrap();
        assert!(matches!(energy_audit(&sys, &w, &src), Err(AuditError::GridMismatch(_))));
    }
}
