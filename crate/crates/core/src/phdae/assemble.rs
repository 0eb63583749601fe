use super::{Dissipation, Effort, EffortMap, EnergyTerm, Labels, PhDae, PhDaeError, ResistiveTerm};
use crate::laws::{CapacitorLaw, InductorLaw, ResistorLaw};
use crate::linalg::IntMatrix;
use crate::netlist::{CircuitGraph, EdgeKind, EdgeLaw, Signal};
use crate::topology::{classify_index, Model};
use nalgebra::DMatrix;

/// Coupling currents attached to a charge/flux subsystem.
#[derive(Debug, Clone, Default)]
pub enum CouplingPort {
    #[default]
    None,
    /// Coupling currents enter through inputs `û` with port matrix `[A_λ;0;0;0]`.
    Input { a_lambda: IntMatrix, names: Vec<String> },
    /// Coupling currents are states closed by the coupling equation `A_λᵀ e = û`,
    /// with `û` an input through `[0;0;0;0;I]`.
    State { a_lambda: IntMatrix, names: Vec<String> },
}

struct Parts {
    a_c: IntMatrix,
    a_r: IntMatrix,
    a_l: IntMatrix,
    a_v: IntMatrix,
    a_i: IntMatrix,
    c_laws: Vec<CapacitorLaw>,
    r_laws: Vec<ResistorLaw>,
    l_laws: Vec<InductorLaw>,
    v_src: Vec<Signal>,
    i_src: Vec<Signal>,
    names: [Vec<String>; 5],
}

fn parts(c: &CircuitGraph) -> Parts {
    let mut p = Parts {
        a_c: c.a_c(),
        a_r: c.a_r(),
        a_l: c.a_l(),
        a_v: c.a_v(),
        a_i: c.a_i(),
        c_laws: vec![],
        r_laws: vec![],
        l_laws: vec![],
        v_src: vec![],
        i_src: vec![],
        names: [
            c.names_of(EdgeKind::Capacitor),
            c.names_of(EdgeKind::Resistor),
            c.names_of(EdgeKind::Inductor),
            c.names_of(EdgeKind::VoltageSource),
            c.names_of(EdgeKind::CurrentSource),
        ],
    };
    for e in &c.edges {
        match e.law {
            EdgeLaw::Capacitor(l) => p.c_laws.push(l),
            EdgeLaw::Resistor(l) => p.r_laws.push(l),
            EdgeLaw::Inductor(l) => p.l_laws.push(l),
            EdgeLaw::Voltage(s) => p.v_src.push(s),
            EdgeLaw::Current(s) => p.i_src.push(s),
            EdgeLaw::Coupling => {}
        }
    }
    p
}

fn put(m: &mut DMatrix<f64>, r0: usize, c0: usize, block: &IntMatrix, sign: f64) {
    for i in 0..block.nrows() {
        for j in 0..block.ncols() {
            m[(r0 + i, c0 + j)] = sign * block.get(i, j) as f64;
        }
    }
}

fn put_t(m: &mut DMatrix<f64>, r0: usize, c0: usize, block: &IntMatrix, sign: f64) {
    put(m, r0, c0, &block.transpose(), sign);
}

fn identity(m: &mut DMatrix<f64>, r0: usize, c0: usize, n: usize, sign: f64) {
    for i in 0..n {
        m[(r0 + i, c0 + i)] = sign;
    }
}

fn resistive_terms(a_r: &IntMatrix, laws: &[ResistorLaw], e0: usize) -> Vec<ResistiveTerm> {
    laws.iter()
        .enumerate()
        .map(|(k, &law)| ResistiveTerm {
            support: a_r.column(k).iter().enumerate().filter(|(_, &v)| v != 0).map(|(i, &v)| (e0 + i, v as f64)).collect(),
            law,
        })
        .collect()
}

fn labelled<'a>(prefix: &str, names: &'a [String]) -> impl Iterator<Item = String> + 'a {
    let prefix = prefix.to_string();
    names.iter().map(move |n| format!("{prefix}({n})"))
}

/// Assembles a sound circuit without coupling edges in the chosen formulation.
pub fn assemble(circuit: &CircuitGraph, model: Model, port: &CouplingPort) -> PhDae {
    match model {
        Model::Model1 => model1(circuit, port),
        Model::Model2 => {
            assert!(matches!(port, CouplingPort::None), "coupling ports use the charge/flux formulation");
            model2(circuit)
        }
    }
}

fn model1(circuit: &CircuitGraph, port: &CouplingPort) -> PhDae {
    let p = parts(circuit);
    let nv = circuit.n_v();
    let (nc, nl, nvs, ni) = (p.a_c.ncols(), p.a_l.ncols(), p.a_v.ncols(), p.a_i.ncols());
    let (n_state_lambda, n_port) = match port {
        CouplingPort::None => (0, 0),
        CouplingPort::Input { a_lambda, .. } => (0, a_lambda.ncols()),
        CouplingPort::State { a_lambda, .. } => (a_lambda.ncols(), a_lambda.ncols()),
    };
    let n = nc + nl + nv + nvs + n_state_lambda;
    // states: q_C, φ_L, e, j_V, λ; efforts/equations: e, j_L, u_C, j_V, λ
    let (sq, sphi, se, sj, slam) = (0, nc, nc + nl, nc + nl + nv, nc + nl + nv + nvs);
    let (ze, zl, zc, zv, zlam) = (0, nv, nv + nl, nv + nl + nc, nv + nl + nc + nvs);

    let mut e = DMatrix::zeros(n, n);
    put(&mut e, ze, sq, &p.a_c, 1.0);
    identity(&mut e, zl, sphi, nl, 1.0);

    let mut j = DMatrix::zeros(n, n);
    put(&mut j, ze, zl, &p.a_l, -1.0);
    put(&mut j, ze, zv, &p.a_v, -1.0);
    put_t(&mut j, zl, ze, &p.a_l, 1.0);
    put_t(&mut j, zv, ze, &p.a_v, 1.0);

    let m = n_port + ni + nvs;
    let mut b = DMatrix::zeros(n, m);
    match port {
        CouplingPort::None => {}
        CouplingPort::Input { a_lambda, .. } => put(&mut b, ze, 0, a_lambda, 1.0),
        CouplingPort::State { a_lambda, .. } => {
            put(&mut j, ze, zlam, a_lambda, -1.0);
            put_t(&mut j, zlam, ze, a_lambda, 1.0);
            identity(&mut b, zlam, 0, n_state_lambda, 1.0);
        }
    }
    put(&mut b, ze, n_port, &p.a_i, -1.0);
    identity(&mut b, zv, n_port + ni, nvs, -1.0);

    let mut linear = DMatrix::zeros(n, n);
    put_t(&mut linear, zc, ze, &p.a_c, 1.0);
    identity(&mut linear, zc, zc, nc, -1.0);
    let mut constraint = DMatrix::zeros(nc, n);
    put_t(&mut constraint, 0, ze, &p.a_c, 1.0);
    identity(&mut constraint, 0, zc, nc, -1.0);

    let mut efforts = Vec::with_capacity(n);
    efforts.extend((0..nv).map(|i| Effort { state: se + i, map: EffortMap::Identity }));
    efforts.extend((0..nl).map(|i| Effort { state: sphi + i, map: EffortMap::InverseFlux(p.l_laws[i]) }));
    efforts.extend((0..nc).map(|i| Effort { state: sq + i, map: EffortMap::InverseCharge(p.c_laws[i]) }));
    efforts.extend((0..nvs).map(|i| Effort { state: sj + i, map: EffortMap::Identity }));
    efforts.extend((0..n_state_lambda).map(|i| Effort { state: slam + i, map: EffortMap::Identity }));

    let mut energy: Vec<EnergyTerm> =
        (0..nc).map(|i| EnergyTerm::Charge { state: sq + i, law: p.c_laws[i] }).collect();
    energy.extend((0..nl).map(|i| EnergyTerm::Flux { state: sphi + i, law: p.l_laws[i] }));

    let [cn, _, ln, vn, inames] = &p.names;
    let coupling_names: &[String] = match port {
        CouplingPort::None => &[],
        CouplingPort::Input { names, .. } | CouplingPort::State { names, .. } => names,
    };
    let mut labels = Labels::default();
    labels.state.extend(labelled("q", cn));
    labels.state.extend(labelled("phi", ln));
    labels.state.extend(labelled("e", &circuit.vertices));
    labels.state.extend(labelled("j", vn));
    labels.effort.extend(labelled("e", &circuit.vertices));
    labels.effort.extend(labelled("j", ln));
    labels.effort.extend(labelled("u", cn));
    labels.effort.extend(labelled("j", vn));
    if n_state_lambda > 0 {
        labels.state.extend(labelled("lambda", coupling_names));
        labels.effort.extend(labelled("lambda", coupling_names));
    }
    labels.input.extend(labelled("u_hat", coupling_names));
    labels.input.extend(labelled("i", inames));
    labels.input.extend(labelled("v", vn));
    labels.output.extend(labelled("y_hat", coupling_names));
    labels.output.extend(labelled("y", inames));
    labels.output.extend(labelled("y", vn));

    let mut input_signals = vec![None; n_port];
    input_signals.extend(p.i_src.iter().chain(&p.v_src).map(|&s| Some(s)));

    PhDae {
        e,
        j,
        b,
        efforts,
        dissipation: Dissipation { linear, resistive: resistive_terms(&p.a_r, &p.r_laws, ze) },
        energy,
        constraint,
        labels,
        input_signals,
        index: None,
    }
}

fn model2(circuit: &CircuitGraph) -> PhDae {
    let p = parts(circuit);
    let nv = circuit.n_v();
    let (nc, nl, nvs, ni) = (p.a_c.ncols(), p.a_l.ncols(), p.a_v.ncols(), p.a_i.ncols());
    let n = nv + 2 * nc + nl + nvs;
    // states: e, j_C, q_C, φ_L, j_V; efforts/equations: e, j_C, u_C, j_L, j_V
    let (ze, zjc, zc, zl, zv) = (0, nv, nv + nc, nv + 2 * nc, nv + 2 * nc + nl);

    let mut e = DMatrix::zeros(n, n);
    identity(&mut e, zc, zc, nc, 1.0);
    identity(&mut e, zl, zl, nl, 1.0);

    let mut j = DMatrix::zeros(n, n);
    put(&mut j, ze, zjc, &p.a_c, -1.0);
    put(&mut j, ze, zl, &p.a_l, -1.0);
    put(&mut j, ze, zv, &p.a_v, -1.0);
    put_t(&mut j, zjc, ze, &p.a_c, 1.0);
    identity(&mut j, zjc, zc, nc, -1.0);
    identity(&mut j, zc, zjc, nc, 1.0);
    put_t(&mut j, zl, ze, &p.a_l, 1.0);
    put_t(&mut j, zv, ze, &p.a_v, 1.0);

    let mut b = DMatrix::zeros(n, ni + nvs);
    put(&mut b, ze, 0, &p.a_i, -1.0);
    identity(&mut b, zv, ni, nvs, -1.0);

    let mut efforts = Vec::with_capacity(n);
    efforts.extend((0..nv + nc).map(|i| Effort { state: i, map: EffortMap::Identity }));
    efforts.extend((0..nc).map(|i| Effort { state: zc + i, map: EffortMap::InverseCharge(p.c_laws[i]) }));
    efforts.extend((0..nl).map(|i| Effort { state: zl + i, map: EffortMap::InverseFlux(p.l_laws[i]) }));
    efforts.extend((0..nvs).map(|i| Effort { state: zv + i, map: EffortMap::Identity }));

    let mut energy: Vec<EnergyTerm> = (0..nc).map(|i| EnergyTerm::Charge { state: zc + i, law: p.c_laws[i] }).collect();
    energy.extend((0..nl).map(|i| EnergyTerm::Flux { state: zl + i, law: p.l_laws[i] }));

    let [cn, _, ln, vn, inames] = &p.names;
    let mut labels = Labels::default();
    labels.state.extend(labelled("e", &circuit.vertices));
    labels.state.extend(labelled("jc", cn));
    labels.state.extend(labelled("q", cn));
    labels.state.extend(labelled("phi", ln));
    labels.state.extend(labelled("j", vn));
    labels.effort.extend(labelled("e", &circuit.vertices));
    labels.effort.extend(labelled("jc", cn));
    labels.effort.extend(labelled("u", cn));
    labels.effort.extend(labelled("j", ln));
    labels.effort.extend(labelled("j", vn));
    labels.input.extend(labelled("i", inames));
    labels.input.extend(labelled("v", vn));
    labels.output.extend(labelled("y", inames));
    labels.output.extend(labelled("y", vn));

    PhDae {
        e,
        j,
        b,
        efforts,
        dissipation: Dissipation { linear: DMatrix::zeros(n, n), resistive: resistive_terms(&p.a_r, &p.r_laws, ze) },
        energy,
        constraint: DMatrix::zeros(0, n),
        labels,
        input_signals: p.i_src.iter().chain(&p.v_src).map(|&s| Some(s)).collect(),
        index: None,
    }
}

fn assemble_checked(circuit: &CircuitGraph, model: Model) -> Result<PhDae, PhDaeError> {
    let report = classify_index(circuit, model)?;
    let mut sys = assemble(&circuit.merged(), model, &CouplingPort::None);
    sys.index = Some(report.index);
    Ok(sys)
}

/// Charge/flux formulation with states `(q_C, φ_L, e, j_V)`; coupling edges
/// are treated as zero-volt sources.
pub fn assemble_model1(circuit: &CircuitGraph) -> Result<PhDae, PhDaeError> {
    assemble_checked(circuit, Model::Model1)
}

/// Formulation with capacitor currents as extra states `(e, j_C, q_C, φ_L, j_V)`.
pub fn assemble_model2(circuit: &CircuitGraph) -> Result<PhDae, PhDaeError> {
    assemble_checked(circuit, Model::Model2)
}
