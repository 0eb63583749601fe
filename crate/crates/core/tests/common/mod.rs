//! Independent oracles shared by the integration tests.
//!
//! Graph verdicts use plain union-find reachability on edge lists and never
//! touch incidence matrices or rank computations.

#![allow(dead_code)]

use nalgebra::DVector;
use phcirc::netlist::{build_circuit, parse_netlist, CircuitGraph, EdgeKind, ElementKind, Netlist};
use phcirc::phdae::assemble_model1;
use phcirc::solver::{integrate_with_guess, source_inputs, Integrator, NewtonConfig, TimeGrid};

pub fn circuit(text: &str) -> CircuitGraph {
    build_circuit(&parse_netlist(text).expect("netlist parses")).expect("circuit is sound")
}

/// Union-find over vertices `0..=n_v`, with `n_v` standing for ground.
pub struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    pub fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    pub fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut y = x;
        while self.parent[y] != r {
            let next = self.parent[y];
            self.parent[y] = r;
            y = next;
        }
        r
    }

    /// Returns false when `a` and `b` were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

/// Plain edge list: vertices `0..n`, ground is `n`, coupling counts as a voltage source.
pub struct Graph {
    pub n: usize,
    pub edges: Vec<(usize, usize, EdgeKind)>,
}

fn voltage_like(kind: EdgeKind) -> EdgeKind {
    match kind {
        EdgeKind::Coupling => EdgeKind::VoltageSource,
        other => other,
    }
}

impl Graph {
    pub fn of_circuit(c: &CircuitGraph) -> Self {
        let g = c.n_v();
        let edges = c.edges.iter().map(|e| (e.pos.unwrap_or(g), e.neg.unwrap_or(g), voltage_like(e.kind()))).collect();
        Self { n: g, edges }
    }

    /// Graph of a parsed netlist, independent of circuit construction.
    pub fn of_netlist(nl: &Netlist) -> Self {
        let names = nl.vertices();
        let n = names.len();
        let idx = |v: &str| if v == nl.ground { n } else { names.iter().position(|m| m == v).unwrap() };
        let mut edges: Vec<(usize, usize, EdgeKind)> = nl
            .elements
            .iter()
            .map(|e| {
                let kind = match e.kind {
                    ElementKind::R => EdgeKind::Resistor,
                    ElementKind::C => EdgeKind::Capacitor,
                    ElementKind::L => EdgeKind::Inductor,
                    ElementKind::V => EdgeKind::VoltageSource,
                    ElementKind::I => EdgeKind::CurrentSource,
                };
                (idx(&e.pos), idx(&e.neg), kind)
            })
            .collect();
        edges.extend(nl.couplings.iter().map(|k| (idx(&k.pos), idx(&k.neg), EdgeKind::VoltageSource)));
        Self { n, edges }
    }

    fn dsu_of(&self, kinds: &[EdgeKind], skip: Option<usize>) -> Dsu {
        let mut dsu = Dsu::new(self.n + 1);
        for (k, &(a, b, kind)) in self.edges.iter().enumerate() {
            if Some(k) != skip && kinds.contains(&kind) {
                dsu.union(a, b);
            }
        }
        dsu
    }

    /// Does the subgraph of the given edge kinds contain a cycle?
    pub fn has_cycle(&self, kinds: &[EdgeKind]) -> bool {
        let mut dsu = Dsu::new(self.n + 1);
        self.edges.iter().filter(|e| kinds.contains(&e.2)).any(|&(a, b, _)| !dsu.union(a, b))
    }

    /// Are all vertices connected to ground using only the given kinds?
    pub fn spans(&self, kinds: &[EdgeKind]) -> bool {
        let mut dsu = self.dsu_of(kinds, None);
        let g = dsu.find(self.n);
        (0..self.n).all(|v| dsu.find(v) == g)
    }

    /// Is there a cycle in `kinds` using at least one edge of kind `through`?
    pub fn cycle_through(&self, kinds: &[EdgeKind], through: EdgeKind) -> bool {
        self.edges.iter().enumerate().filter(|(_, e)| e.2 == through).any(|(skip, &(a, b, _))| {
            let mut dsu = self.dsu_of(kinds, Some(skip));
            dsu.find(a) == dsu.find(b)
        })
    }
}

use EdgeKind::{Capacitor as C, CurrentSource as I, Inductor as L, Resistor as R, VoltageSource as V};

pub fn oracle_li_cut(g: &Graph) -> bool {
    !g.spans(&[C, R, V])
}

pub fn oracle_cv_loop(g: &Graph) -> bool {
    g.cycle_through(&[C, V], V)
}

pub fn oracle_c_loop(g: &Graph) -> bool {
    g.has_cycle(&[C])
}

pub fn oracle_connected(g: &Graph) -> bool {
    g.spans(&[R, C, L, V, I])
}

/// No loop of voltage sources and no cut of current sources.
pub fn oracle_sound(g: &Graph) -> bool {
    !g.has_cycle(&[V]) && g.spans(&[R, C, L, V])
}

/// Index of the charge/flux formulation.
pub fn oracle_index_model1(g: &Graph) -> u8 {
    if oracle_li_cut(g) || oracle_cv_loop(g) {
        2
    } else {
        1
    }
}

/// Index of the formulation with capacitor currents as extra states.
pub fn oracle_index_model2(g: &Graph) -> u8 {
    if oracle_index_model1(g) == 2 || oracle_c_loop(g) {
        2
    } else {
        1
    }
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Root of an increasing function on a bracket by plain bisection.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Composite Simpson rule with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n).map(|i| f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 }).sum();
    (f(a) + f(b) + inner) * h / 3.0
}

/// Capacitor voltage of `C1 n1 0 C=c`, `R1 n1 0 R=r` from `u0`.
pub fn rc_voltage(u0: f64, r: f64, c: f64, t: f64) -> f64 {
    u0 * (-t / (r * c)).exp()
}

/// Capacitor voltage of an undamped LC tank with `u(0) = u0`, `i_L(0) = 0`.
pub fn lc_voltage(u0: f64, l: f64, c: f64, t: f64) -> f64 {
    u0 * (t / (l * c).sqrt()).cos()
}

pub fn rc_netlist(r: f64, c: f64) -> String {
    format!("C1 n1 0 C={c}\nR1 n1 0 R={r}\n")
}

pub fn lc_netlist(l: f64, c: f64) -> String {
    format!("C1 n1 0 C={c}\nL1 n1 0 L={l}\n")
}

/// Max-norm error of the capacitor voltage against the analytic solution on
/// `[0, 2T]` for steps `h = f·T`, where `T` is the RC time constant or the
/// LC period. Returns `(steps, errors)`.
pub fn refinement_errors(oscillator: bool, integrator: Integrator, fractions: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let (r_or_l, c, u0) = (1.0, 0.5, 1.0);
    let (text, period) = if oscillator {
        (lc_netlist(r_or_l, c), 2.0 * std::f64::consts::PI * (r_or_l * c).sqrt())
    } else {
        (rc_netlist(r_or_l, c), r_or_l * c)
    };
    let sys = assemble_model1(&circuit(&text)).unwrap();
    let mut guess = DVector::zeros(sys.n_states());
    guess[sys.state_index("q(C1)").unwrap()] = c * u0;
    let e = sys.state_index("e(n1)").unwrap();
    let cfg = NewtonConfig { abs_tol: 1e-14, rel_tol: 1e-14, ..NewtonConfig::default() };
    let inputs = source_inputs(&sys);
    let mut hs = Vec::new();
    let mut errs = Vec::new();
    for &f in fractions {
        let h = f * period;
        let grid = TimeGrid::uniform(0.0, 2.0 * period, h).unwrap();
        let w = integrate_with_guess(&sys, &grid, &guess, &inputs, integrator, &cfg).unwrap();
        let err = grid
            .times()
            .iter()
            .zip(&w.states)
            .map(|(&t, x)| {
                let exact = if oscillator { lc_voltage(u0, r_or_l, c, t) } else { rc_voltage(u0, r_or_l, c, t) };
                (x[e] - exact).abs()
            })
            .fold(0.0, f64::max);
        hs.push(h);
        errs.push(err);
    }
    (hs, errs)
}

/// Step fractions of the period spanning `1e-2` to `1e-4`.
pub const REFINEMENT: [f64; 5] = [1e-2, 3.162_277_660_168_379_4e-3, 1e-3, 3.162_277_660_168_379_4e-4, 1e-4];
