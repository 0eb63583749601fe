mod common;

use common::circuit;
use nalgebra::DVector;
use phcirc::corpus;
use phcirc::coupling::{assemble_joint_condensed, split_circuit, PartitionedSystem};
use phcirc::dynit::{
    assemble_iteration_phdae, extrapolate, gauss_seidel_sweep, jacobi_sweep, run_dynamic_iteration,
    run_dynamic_iteration_with_reference, splitting_defect, CosimResult, CouplingSignals, DynitError, Schedule, Scheme,
    WindowConfig,
};
use phcirc::linalg::skew_defect;
use phcirc::phdae::energy_audit;
use phcirc::solver::{consistent_init, integrate, source_inputs, TimeGrid, Waveform};

fn partitioned(name: &str) -> PartitionedSystem {
    split_circuit(&corpus::circuit(name)).unwrap()
}

fn config(scheme: Scheme) -> WindowConfig {
    WindowConfig { window: 0.1, h: 0.01, tol: 1e-8, scheme, ..WindowConfig::default() }
}

fn monolithic(ps: &PartitionedSystem, cfg: &WindowConfig, t_end: f64) -> Waveform {
    let joint = assemble_joint_condensed(ps).system;
    let grid = TimeGrid::uniform(0.0, t_end, cfg.h).unwrap();
    let inputs = source_inputs(&joint);
    integrate(&joint, &grid, &inputs, cfg.integrator, &cfg.newton).unwrap()
}

fn max_deviation(a: &CosimResult, b: &CosimResult) -> f64 {
    a.subsystems
        .iter()
        .zip(&b.subsystems)
        .flat_map(|(x, y)| x.states.iter().zip(&y.states))
        .map(|(p, q)| (p - q).amax())
        .fold(0.0, f64::max)
}

/// Geometric mean contraction of the update norms after the first sweep.
fn contraction_rate(updates: &[f64]) -> f64 {
    let n = updates.len();
    assert!(n >= 4, "{updates:?}");
    (updates[n - 1] / updates[1]).powf(1.0 / (n - 2) as f64)
}

#[test]
fn update_norms_contract_in_every_window() {
    for name in ["two_block_rc.cir", "star_three_block.cir"] {
        let ps = partitioned(name);
        for scheme in [Scheme::Jacobi, Scheme::GaussSeidel] {
            let res = run_dynamic_iteration(&ps, 0.0, 1.0, &config(scheme)).unwrap();
            assert!(res.trace.all_converged(), "{name} {scheme:?}");
            for w in &res.trace.windows {
                let u: Vec<f64> = w.sweeps.iter().map(|s| s.update_norm).collect();
                // Jacobi interleaves two streams, so compare every second sweep
                let stride = if scheme == Scheme::Jacobi { 2 } else { 1 };
                for l in 1..u.len().saturating_sub(stride) {
                    assert!(u[l + stride] < u[l], "{name} {scheme:?} window {}: {u:?}", w.window);
                }
            }
        }
    }
}

#[test]
fn gauss_seidel_contracts_at_least_as_fast_as_jacobi() {
    for name in ["two_block_rc.cir", "star_three_block.cir"] {
        let ps = partitioned(name);
        let rate = |scheme| {
            let cfg = WindowConfig { tol: 1e-12, ..config(scheme) };
            let res = run_dynamic_iteration(&ps, 0.0, 0.1, &cfg).unwrap();
            let u: Vec<f64> = res.trace.windows[0].sweeps.iter().map(|s| s.update_norm).collect();
            contraction_rate(&u)
        };
        let (jacobi, gs) = (rate(Scheme::Jacobi), rate(Scheme::GaussSeidel));
        assert!(gs <= jacobi, "{name}: GS {gs} vs Jacobi {jacobi}");
        assert!(jacobi < 1.0);
    }
}

#[test]
fn both_schemes_reach_the_monolithic_fixed_point() {
    for name in ["two_block_rc.cir", "star_three_block.cir"] {
        let ps = partitioned(name);
        let jacobi = run_dynamic_iteration(&ps, 0.0, 1.0, &config(Scheme::Jacobi)).unwrap();
        let gs = run_dynamic_iteration(&ps, 0.0, 1.0, &config(Scheme::GaussSeidel)).unwrap();
        assert!(max_deviation(&jacobi, &gs) < 1e-7, "{name}");

        let cfg = config(Scheme::GaussSeidel);
        let mono = monolithic(&ps, &cfg, 1.0);
        let tracked = run_dynamic_iteration_with_reference(&ps, 0.0, 1.0, &cfg, Some(&mono)).unwrap();
        for w in &tracked.trace.windows {
            let last = w.sweeps.last().unwrap().err_vs_monolithic.unwrap();
            assert!(last < 1e-6, "{name} window {}: {last:e}", w.window);
        }
        let joint = assemble_joint_condensed(&ps).system;
        let stitched = gs.states_in(&joint);
        let err = stitched.iter().zip(&mono.states).map(|(a, b)| (a - b).amax()).fold(0.0, f64::max);
        assert!(err < 1e-6, "{name}: {err:e}");
    }
}

/// Inputs recorded in a waveform, replayed at its own grid nodes.
fn recorded_inputs(w: &Waveform) -> impl Fn(f64, &mut [f64]) + Sync + '_ {
    move |t, u| {
        let n = w.grid.times().iter().position(|&s| s == t).expect("grid node");
        u.copy_from_slice(w.inputs[n].as_slice());
    }
}

#[test]
fn splitting_defect_closes_the_energy_balance_of_a_sweep() {
    for name in ["two_block_rc.cir", "star_three_block.cir"] {
        let ps = partitioned(name);
        let nl = ps.n_lambda;
        for scheme in [Scheme::Jacobi, Scheme::GaussSeidel] {
            let cfg = config(scheme);
            let joint = assemble_joint_condensed(&ps).system;
            let src = source_inputs(&joint);
            let x0 = consistent_init(&joint, &DVector::zeros(joint.n_states()), 0.0, &src, &cfg.newton).unwrap();
            let start: Vec<DVector<f64>> = ps
                .subsystems
                .iter()
                .map(|s| DVector::from_iterator(s.phdae.n_states(), s.phdae.labels.state.iter().map(|l| x0[joint.state_index(l).unwrap()])))
                .collect();
            let grid = TimeGrid::uniform(0.0, 0.5, cfg.h).unwrap();
            let mut prev = extrapolate(&ps, &start, &grid).unwrap();
            for sweep in 0..4 {
                let waves = match scheme {
                    Scheme::Jacobi => jacobi_sweep(&ps, &start, &grid, &prev, &cfg),
                    Scheme::GaussSeidel => gauss_seidel_sweep(&ps, &start, &grid, &prev, &cfg),
                }
                .unwrap();
                let next = CouplingSignals::from_waveforms(&ps, &waves);
                let defect = splitting_defect(&prev, &next, scheme);

                let (mut internal, mut source, mut residual) = (0.0, 0.0, 0.0);
                for (s, w) in ps.subsystems.iter().zip(&waves) {
                    let a = energy_audit(&s.phdae, w, &recorded_inputs(w)).unwrap();
                    internal += a.totals.delta_h + a.totals.dissipated;
                    residual += a.totals.abs_residual;
                    let times = w.grid.times();
                    let power = |n: usize| w.outputs[n].rows(nl, w.outputs[n].len() - nl).dot(&w.inputs[n].rows(nl, w.inputs[n].len() - nl));
                    source += (0..times.len() - 1).map(|n| 0.5 * (times[n + 1] - times[n]) * (power(n) + power(n + 1))).sum::<f64>();
                }
                let gap = (internal - source - defect).abs();
                assert!(gap <= residual + 1e-12, "{name} {scheme:?} sweep {sweep}: gap {gap:e}, audit residual {residual:e}, defect {defect:e}");
                prev = next;
            }
        }
    }
}

#[test]
fn defect_vanishes_as_sweeps_converge() {
    for scheme in [Scheme::Jacobi, Scheme::GaussSeidel] {
        let res = run_dynamic_iteration(&partitioned("two_block_rc.cir"), 0.0, 1.0, &config(scheme)).unwrap();
        for w in &res.trace.windows {
            let d: Vec<f64> = w.sweeps.iter().map(|s| s.defect.abs()).collect();
            // two consecutive sweeps cover both Jacobi streams
            for l in 1..d.len().saturating_sub(2) {
                assert!(d[l + 2] < d[l], "{scheme:?} window {}: {d:?}", w.window);
            }
            assert!(*d.last().unwrap() <= 1e-10, "{scheme:?} window {}: {d:?}", w.window);
        }
    }
}

#[test]
fn subsystem_schedule_does_not_change_results() {
    for name in ["two_block_rc.cir", "star_three_block.cir"] {
        let ps = partitioned(name);
        let run = |schedule| run_dynamic_iteration(&ps, 0.0, 0.5, &WindowConfig { schedule, ..config(Scheme::Jacobi) }).unwrap();
        let parallel = run(Schedule::Parallel);
        for schedule in [Schedule::Sequential, Schedule::Reversed] {
            let other = run(schedule);
            for (a, b) in parallel.subsystems.iter().zip(&other.subsystems) {
                assert_eq!(a, b, "{name} {schedule:?}");
            }
            let json = |r: &CosimResult| serde_json::to_string(&r.trace).unwrap();
            assert_eq!(json(&parallel), json(&other), "{name} {schedule:?}");
        }
    }
}

#[test]
fn strict_mode_reports_the_first_unconverged_window() {
    let ps = partitioned("two_block_rc.cir");
    let cfg = WindowConfig { max_sweeps: 2, strict: true, ..config(Scheme::Jacobi) };
    match run_dynamic_iteration(&ps, 0.0, 1.0, &cfg) {
        Err(DynitError::NonConvergedWindow { window, update_norm }) => {
            assert_eq!(window, 0);
            assert!(update_norm > cfg.tol);
        }
        other => panic!("{other:?}"),
    }
    let lenient = run_dynamic_iteration(&ps, 0.0, 1.0, &WindowConfig { strict: false, ..cfg }).unwrap();
    assert!(!lenient.trace.all_converged());
    assert_eq!(lenient.trace.max_sweeps(), 2);
}

#[test]
fn invalid_settings_are_refused() {
    let ps = partitioned("two_block_rc.cir");
    for cfg in [
        WindowConfig { h: 0.0, ..WindowConfig::default() },
        WindowConfig { window: 0.001, h: 0.01, ..WindowConfig::default() },
        WindowConfig { max_sweeps: 0, ..WindowConfig::default() },
        WindowConfig { tol: 0.0, ..WindowConfig::default() },
    ] {
        assert!(matches!(run_dynamic_iteration(&ps, 0.0, 1.0, &cfg), Err(DynitError::InvalidConfig(_))));
    }
}

#[test]
fn unpartitioned_circuit_reduces_to_plain_integration() {
    let c = corpus::circuit("driven_rlc.cir");
    let ps = split_circuit(&c).unwrap();
    assert_eq!(ps.k(), 1);
    let cfg = config(Scheme::Jacobi);
    let res = run_dynamic_iteration(&ps, 0.0, 1.0, &cfg).unwrap();
    assert!(res.trace.windows.iter().all(|w| w.sweeps.len() == 1));
    let sys = &ps.subsystems[0].phdae;
    let x0 = consistent_init(sys, &DVector::zeros(sys.n_states()), 0.0, &source_inputs(sys), &cfg.newton).unwrap();
    let grid = TimeGrid::uniform(0.0, 1.0, cfg.h).unwrap();
    let plain = phcirc::solver::integrate_from(sys, &grid, x0, &source_inputs(sys), cfg.integrator, &cfg.newton).unwrap();
    assert_eq!(res.subsystems[0].states, plain.states);
}

#[test]
fn coupling_must_reach_the_last_subsystem() {
    let text = "V1 a 0 DC 1\nR1 a t1 R=1\nK1 t1 t2\nR2 t2 0 R=1\nR3 t2 t3 R=1\nK2 t3 t4\nR4 t4 0 R=1\n.partition 2 t2 t3\n.partition 3 t4\n";
    let ps = split_circuit(&circuit(text)).unwrap();
    let err = run_dynamic_iteration(&ps, 0.0, 1.0, &WindowConfig::default()).unwrap_err();
    assert_eq!(err, DynitError::CouplingNotAttachedToLast { name: "K1".into() });
}

#[test]
fn iteration_systems_keep_port_hamiltonian_structure() {
    for name in ["two_block_rc.cir", "star_three_block.cir"] {
        let ps = partitioned(name);
        let n: usize = ps.subsystems.iter().map(|s| s.phdae.n_states()).sum();
        let jac = assemble_iteration_phdae(&ps, Scheme::Jacobi);
        assert_eq!(skew_defect(&jac.j), 0.0, "{name}");
        assert_eq!(skew_defect(&jac.interconnection), 0.0, "{name}");
        let p = (jac.e.nrows() - n) / 2;
        assert_eq!(jac.e.nrows(), n + 2 * p);
        assert!(jac.e.rows(n, 2 * p).iter().chain(jac.e.columns(n, 2 * p).iter()).all(|&v| v == 0.0));

        let gs = assemble_iteration_phdae(&ps, Scheme::GaussSeidel);
        assert_eq!(skew_defect(&gs.j), 0.0, "{name}");
        assert_eq!(gs.increment_input.ncols(), ps.n_lambda);
        // one terminal per coupling branch outside the last subsystem
        let nonzero = gs.increment_input.iter().filter(|&&v| v != 0.0).count();
        assert_eq!(nonzero, ps.n_lambda, "{name}");
        assert!(gs.increment_input.iter().all(|v| [-1.0, 0.0, 1.0].contains(v)));
    }
}
