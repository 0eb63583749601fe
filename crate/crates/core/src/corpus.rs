//! Bundled example netlists and a seeded generator of random sound circuits.

use crate::netlist::{build_circuit, parse_netlist, CircuitGraph};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `(file name, netlist text)` of every bundled netlist.
pub const NETLISTS: &[(&str, &str)] = &[
    ("series_vrc.cir", include_str!("../netlists/series_vrc.cir")),
    ("cv_loop.cir", include_str!("../netlists/cv_loop.cir")),
    ("li_cut.cir", include_str!("../netlists/li_cut.cir")),
    ("c_loop.cir", include_str!("../netlists/c_loop.cir")),
    ("lc_oscillator.cir", include_str!("../netlists/lc_oscillator.cir")),
    ("rc_decay.cir", include_str!("../netlists/rc_decay.cir")),
    ("driven_rlc.cir", include_str!("../netlists/driven_rlc.cir")),
    ("diode_clamp.cir", include_str!("../netlists/diode_clamp.cir")),
    ("nonlinear_tank.cir", include_str!("../netlists/nonlinear_tank.cir")),
    ("rc_ladder.cir", include_str!("../netlists/rc_ladder.cir")),
    ("rlc_bridge.cir", include_str!("../netlists/rlc_bridge.cir")),
    ("two_block_rc.cir", include_str!("../netlists/two_block_rc.cir")),
    ("star_three_block.cir", include_str!("../netlists/star_three_block.cir")),
    ("terminal_on_capacitor.cir", include_str!("../netlists/terminal_on_capacitor.cir")),
];

pub fn netlist_text(name: &str) -> Option<&'static str> {
    NETLISTS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

/// Parsed and built bundled circuit; panics if the bundled file is invalid.
pub fn circuit(name: &str) -> CircuitGraph {
    let text = netlist_text(name).unwrap_or_else(|| panic!("no bundled netlist {name}"));
    build_circuit(&parse_netlist(text).expect("bundled netlist parses")).expect("bundled netlist is sound")
}

/// Every bundled circuit, keyed by file name.
pub fn all_circuits() -> Vec<(&'static str, CircuitGraph)> {
    NETLISTS.iter().map(|(n, _)| (*n, circuit(n))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomSpec {
    /// Non-ground vertices, at least 1.
    pub max_vertices: usize,
    pub max_edges: usize,
    /// Use cubic capacitor, inductor and resistor laws.
    pub nonlinear: bool,
    /// Allow independent sources.
    pub sources: bool,
}

impl Default for RandomSpec {
    fn default() -> Self {
        Self { max_vertices: 5, max_edges: 10, nonlinear: false, sources: true }
    }
}

fn element_line(rng: &mut ChaCha8Rng, kind: char, idx: usize, a: &str, b: &str, nonlinear: bool) -> String {
    let c1: f64 = rng.gen_range(0.5..2.0);
    let c3: f64 = rng.gen_range(0.1..1.0);
    match kind {
        'R' if nonlinear => format!("R{idx} {a} {b} G=poly:{c1},{c3}"),
        'R' => format!("R{idx} {a} {b} R={c1}"),
        'C' if nonlinear => format!("C{idx} {a} {b} Q=poly:{c1},{c3}"),
        'C' => format!("C{idx} {a} {b} C={c1}"),
        'L' if nonlinear => format!("L{idx} {a} {b} PHI=poly:{c1},{c3}"),
        'L' => format!("L{idx} {a} {b} L={c1}"),
        'V' => format!("V{idx} {a} {b} DC {c1}"),
        'I' => format!("I{idx} {a} {b} SIN {c1} 1"),
        _ => unreachable!(),
    }
}

/// Netlist text of a random connected circuit; it need not be sound.
pub fn random_netlist(rng: &mut ChaCha8Rng, spec: &RandomSpec) -> String {
    let nv = rng.gen_range(1..=spec.max_vertices);
    let name = |v: usize| if v == 0 { "0".to_string() } else { format!("n{v}") };
    let kinds: &[char] = if spec.sources { &['R', 'C', 'L', 'V', 'I'] } else { &['R', 'C', 'L'] };
    let n_edges = rng.gen_range(nv..=spec.max_edges.max(nv));
    let mut lines = Vec::with_capacity(n_edges);
    // spanning tree first, then random extra edges
    for v in 1..=nv {
        let parent = rng.gen_range(0..v);
        let kind = *kinds.choose(rng).unwrap();
        let (a, b) = if rng.gen_bool(0.5) { (v, parent) } else { (parent, v) };
        lines.push(element_line(rng, kind, lines.len() + 1, &name(a), &name(b), spec.nonlinear));
    }
    while lines.len() < n_edges {
        let a = rng.gen_range(0..=nv);
        let b = rng.gen_range(0..=nv);
        if a == b {
            continue;
        }
        let kind = *kinds.choose(rng).unwrap();
        lines.push(element_line(rng, kind, lines.len() + 1, &name(a), &name(b), spec.nonlinear));
    }
    lines.join("\n") + "\n"
}

/// `count` random sound circuits from a fixed seed, with their netlist text.
pub fn random_sound_circuits(seed: u64, count: usize, spec: &RandomSpec) -> Vec<(String, CircuitGraph)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let text = random_netlist(&mut rng, spec);
        let netlist = parse_netlist(&text).expect("generated netlist parses");
        if let Ok(c) = build_circuit(&netlist) {
            out.push((text, c));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_netlists_build() {
        assert!(NETLISTS.len() >= 12);
        for (name, c) in all_circuits() {
            assert!(c.n_v() > 0, "{name}");
        }
    }

    #[test]
    fn generator_is_deterministic() {
        let a = random_sound_circuits(7, 5, &RandomSpec::default());
        let b = random_sound_circuits(7, 5, &RandomSpec::default());
        assert_eq!(a, b);
        assert!(a.iter().all(|(_, c)| c.n_v() <= 5));
    }
}
