//! Text netlists: parsing, printing and conversion into a [`CircuitGraph`].
//!
//! ```text
//! .title two-block RC
//! V1 n1 0 SIN 1 50
//! R1 n1 a R=1
//! C1 a 0 Q=poly:1,0.5
//! Kc t1@1 t2@2
//! .partition 2 t2 b
//! .end
//! ```
//!
//! One element per line, the first letter selects the kind (`R C L V I K`).
//! Lines starting with `*` or `#` are comments. Vertex `0` is ground unless
//! `.ground` names another vertex; the ground vertex is shared by every
//! partition and unannotated vertices belong to partition 1.

mod circuit;

pub use circuit::{build_circuit, CircuitError, CircuitGraph, Edge, EdgeKind, EdgeLaw};
pub(crate) use circuit::cut_potential;

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap, HashSet};
use std::f64::consts::PI;
use std::fmt;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NetlistError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("line {line}: duplicate element name `{name}`")]
    DuplicateName { line: usize, name: String },
    #[error("line {line}: unknown vertex `{vertex}`")]
    UnknownVertex { line: usize, vertex: String },
    #[error("netlist has no ground vertex `{ground}`")]
    MissingGround { ground: String },
    #[error("line {line}: element `{name}` connects vertex `{vertex}` to itself")]
    SelfLoop { line: usize, name: String, vertex: String },
    #[error("line {line}: invalid law for `{name}`: {message}")]
    InvalidLaw { line: usize, name: String, message: String },
    #[error("line {line}: vertex `{vertex}` assigned to partitions {first} and {second}")]
    PartitionConflict { line: usize, vertex: String, first: u32, second: u32 },
    #[error("line {line}: element `{name}` joins partitions {first} and {second}; only coupling branches may")]
    ElementSpansPartitions { line: usize, name: String, first: u32, second: u32 },
    #[error("line {line}: invalid coupling `{name}`: {message}")]
    InvalidCoupling { line: usize, name: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ElementKind {
    R,
    C,
    L,
    V,
    I,
}

impl ElementKind {
    fn letter(self) -> char {
        match self {
            Self::R => 'R',
            Self::C => 'C',
            Self::L => 'L',
            Self::V => 'V',
            Self::I => 'I',
        }
    }
}

/// Constitutive law as written in the netlist.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LawSpec {
    /// `R=`, `C=` or `L=` with a positive value.
    Value(f64),
    /// `G=poly:`, `Q=poly:` or `PHI=poly:`.
    Poly { c1: f64, c3: f64 },
    /// `G=diode:` (resistors only).
    Diode { is: f64, vt: f64 },
}

/// Independent source waveform. The sine phase is given in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Signal {
    Dc(f64),
    Sin { amp: f64, freq: f64, phase_deg: f64 },
}

impl Signal {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            Self::Dc(v) => v,
            Self::Sin { amp, freq, phase_deg } => amp * (2.0 * PI * freq * t + phase_deg.to_radians()).sin(),
        }
    }
}

impl fmt::Display for Signal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::Dc(v) => write!(f, "DC {v}"),
            Self::Sin { amp, freq, phase_deg } => write!(f, "SIN {amp} {freq} {phase_deg}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ElementValue {
    Law(LawSpec),
    Source(Signal),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementDecl {
    pub name: String,
    pub kind: ElementKind,
    pub pos: String,
    pub neg: String,
    pub value: ElementValue,
}

/// A coupling branch: a zero-drop virtual voltage source joining two partitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingDecl {
    pub name: String,
    pub pos: String,
    pub pos_partition: Option<u32>,
    pub neg: String,
    pub neg_partition: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Netlist {
    pub title: Option<String>,
    pub ground: String,
    pub elements: Vec<ElementDecl>,
    pub couplings: Vec<CouplingDecl>,
    /// Partition ids assigned by `.partition` directives.
    pub partitions: BTreeMap<String, u32>,
}

impl Netlist {
    /// Non-ground vertices in order of first appearance.
    pub fn vertices(&self) -> Vec<String> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        let ends = self
            .elements
            .iter()
            .flat_map(|e| [&e.pos, &e.neg])
            .chain(self.couplings.iter().flat_map(|k| [&k.pos, &k.neg]));
        for v in ends {
            if *v != self.ground && seen.insert(v.clone()) {
                out.push(v.clone());
            }
        }
        out
    }

    /// Partition of a non-ground vertex: directive, then coupling annotation, then 1.
    pub fn partition_of(&self, vertex: &str) -> u32 {
        if let Some(&p) = self.partitions.get(vertex) {
            return p;
        }
        self.couplings
            .iter()
            .find_map(|k| {
                if k.pos == vertex {
                    k.pos_partition
                } else if k.neg == vertex {
                    k.neg_partition
                } else {
                    None
                }
            })
            .unwrap_or(1)
    }
}

impl fmt::Display for Netlist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(t) = &self.title {
            writeln!(f, ".title {t}")?;
        }
        for e in &self.elements {
            write!(f, "{} {} {} ", e.name, e.pos, e.neg)?;
            match (e.kind, e.value) {
                (_, ElementValue::Source(s)) => writeln!(f, "{s}")?,
                (kind, ElementValue::Law(LawSpec::Value(v))) => writeln!(f, "{}={v}", kind.letter())?,
                (kind, ElementValue::Law(LawSpec::Poly { c1, c3 })) => {
                    let key = match kind {
                        ElementKind::R => "G",
                        ElementKind::C => "Q",
                        _ => "PHI",
                    };
                    writeln!(f, "{key}=poly:{c1},{c3}")?
                }
                (_, ElementValue::Law(LawSpec::Diode { is, vt })) => writeln!(f, "G=diode:{is},{vt}")?,
            }
        }
        let end = |v: &str, p: Option<u32>| match p {
            Some(p) => format!("{v}@{p}"),
            None => v.to_string(),
        };
        for k in &self.couplings {
            writeln!(f, "{} {} {}", k.name, end(&k.pos, k.pos_partition), end(&k.neg, k.neg_partition))?;
        }
        let mut groups: BTreeMap<u32, Vec<&str>> = BTreeMap::new();
        for (v, p) in &self.partitions {
            groups.entry(*p).or_default().push(v);
        }
        for (p, vs) in groups {
            writeln!(f, ".partition {p} {}", vs.join(" "))?;
        }
        if self.ground != "0" {
            writeln!(f, ".ground {}", self.ground)?;
        }
        writeln!(f, ".end")
    }
}

struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(Token { text: &line[s..i], column: line[..s].chars().count() + 1 });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(Token { text: &line[s..], column: line[..s].chars().count() + 1 });
    }
    out
}

/// Parses a number with an optional SPICE magnitude suffix (`f p n u m k meg g t`).
pub fn parse_number(text: &str) -> Option<f64> {
    if let Ok(v) = text.parse::<f64>() {
        return v.is_finite().then_some(v);
    }
    let lower = text.to_ascii_lowercase();
    let suffixes: [(&str, f64); 9] = [
        ("meg", 1e6),
        ("f", 1e-15),
        ("p", 1e-12),
        ("n", 1e-9),
        ("u", 1e-6),
        ("m", 1e-3),
        ("k", 1e3),
        ("g", 1e9),
        ("t", 1e12),
    ];
    for (suffix, scale) in suffixes {
        if let Some(head) = lower.strip_suffix(suffix) {
            if let Ok(v) = head.parse::<f64>() {
                let v = v * scale;
                return v.is_finite().then_some(v);
            }
        }
    }
    None
}

struct LineCtx {
    line: usize,
}

impl LineCtx {
    fn syntax(&self, column: usize, message: impl Into<String>) -> NetlistError {
        NetlistError::Syntax { line: self.line, column, message: message.into() }
    }

    fn number(&self, tok: &Token<'_>, text: &str) -> Result<f64, NetlistError> {
        parse_number(text).ok_or_else(|| self.syntax(tok.column, format!("expected a number, found `{text}`")))
    }

    fn pair(&self, tok: &Token<'_>, text: &str) -> Result<(f64, f64), NetlistError> {
        let (a, b) = text
            .split_once(',')
            .ok_or_else(|| self.syntax(tok.column, format!("expected `<a>,<b>`, found `{text}`")))?;
        Ok((self.number(tok, a)?, self.number(tok, b)?))
    }
}

fn parse_law(ctx: &LineCtx, kind: ElementKind, name: &str, tok: &Token<'_>) -> Result<LawSpec, NetlistError> {
    let (key, value) = tok
        .text
        .split_once('=')
        .ok_or_else(|| ctx.syntax(tok.column, format!("expected `key=value` law, found `{}`", tok.text)))?;
    let key = key.to_ascii_uppercase();
    let lower = value.to_ascii_lowercase();
    let spec = match (kind, key.as_str()) {
        (ElementKind::R, "R") | (ElementKind::C, "C") | (ElementKind::L, "L") => {
            LawSpec::Value(ctx.number(tok, value)?)
        }
        (ElementKind::R, "G") | (ElementKind::C, "Q") | (ElementKind::L, "PHI") => {
            if let Some(rest) = lower.strip_prefix("poly:") {
                let (c1, c3) = ctx.pair(tok, rest)?;
                LawSpec::Poly { c1, c3 }
            } else if let (ElementKind::R, Some(rest)) = (kind, lower.strip_prefix("diode:")) {
                let (is, vt) = ctx.pair(tok, rest)?;
                LawSpec::Diode { is, vt }
            } else {
                return Err(ctx.syntax(tok.column, format!("unknown law form `{value}`")));
            }
        }
        _ => {
            return Err(ctx.syntax(tok.column, format!("law key `{key}` does not fit element `{name}`")));
        }
    };
    let law = law_of(kind, spec);
    law.validate().map_err(|e| NetlistError::InvalidLaw {
        line: ctx.line,
        name: name.to_string(),
        message: e.to_string(),
    })?;
    Ok(spec)
}

/// Scalar law realizing a netlist law spec (resistances become conductances).
pub fn law_of(kind: ElementKind, spec: LawSpec) -> crate::laws::ScalarLaw {
    use crate::laws::ScalarLaw;
    match (kind, spec) {
        (ElementKind::R, LawSpec::Value(r)) => {
            if r > 0.0 {
                ScalarLaw::Linear { slope: 1.0 / r }
            } else {
                ScalarLaw::Linear { slope: f64::NAN }
            }
        }
        (_, LawSpec::Value(v)) => ScalarLaw::Linear { slope: v },
        (_, LawSpec::Poly { c1, c3 }) => ScalarLaw::Cubic { c1, c3 },
        (_, LawSpec::Diode { is, vt }) => ScalarLaw::Diode { is, vt },
    }
}

fn parse_source(ctx: &LineCtx, toks: &[Token<'_>], after: usize) -> Result<Signal, NetlistError> {
    let col = toks.last().map_or(after, |t| t.column);
    let Some(head) = toks.first() else {
        return Err(ctx.syntax(after, "expected `DC <value>` or `SIN <amp> <freq> [phase]`"));
    };
    match head.text.to_ascii_uppercase().as_str() {
        "DC" if toks.len() == 2 => Ok(Signal::Dc(ctx.number(&toks[1], toks[1].text)?)),
        "SIN" if toks.len() == 3 || toks.len() == 4 => {
            let amp = ctx.number(&toks[1], toks[1].text)?;
            let freq = ctx.number(&toks[2], toks[2].text)?;
            let phase_deg = match toks.get(3) {
                Some(t) => ctx.number(t, t.text)?,
                None => 0.0,
            };
            Ok(Signal::Sin { amp, freq, phase_deg })
        }
        "DC" | "SIN" => Err(ctx.syntax(col, format!("wrong number of arguments for `{}`", head.text))),
        other => Err(ctx.syntax(head.column, format!("unknown source form `{other}`"))),
    }
}

fn parse_endpoint(ctx: &LineCtx, tok: &Token<'_>) -> Result<(String, Option<u32>), NetlistError> {
    match tok.text.split_once('@') {
        None => Ok((tok.text.to_string(), None)),
        Some((v, p)) => {
            let id: u32 = p
                .parse()
                .ok()
                .filter(|&id| id >= 1)
                .ok_or_else(|| ctx.syntax(tok.column, format!("bad partition id `{p}`")))?;
            if v.is_empty() {
                return Err(ctx.syntax(tok.column, "missing vertex before `@`"));
            }
            Ok((v.to_string(), Some(id)))
        }
    }
}

/// Parses a netlist and checks its static invariants.
pub fn parse_netlist(text: &str) -> Result<Netlist, NetlistError> {
    let mut title = None;
    let mut ground: Option<(String, usize)> = None;
    let mut elements = Vec::new();
    let mut couplings = Vec::new();
    let mut partitions: BTreeMap<String, u32> = BTreeMap::new();
    let mut partition_lines: Vec<(String, usize)> = Vec::new();
    let mut lines_of: HashMap<String, usize> = HashMap::new();

    for (idx, raw) in text.lines().enumerate() {
        let ctx = LineCtx { line: idx + 1 };
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('*') || trimmed.starts_with('#') {
            continue;
        }
        let toks = tokenize(raw);
        let head = &toks[0];
        if let Some(directive) = head.text.strip_prefix('.') {
            match directive.to_ascii_lowercase().as_str() {
                "end" => break,
                "title" => {
                    let rest = raw[raw.find(head.text).unwrap() + head.text.len()..].trim();
                    title = Some(rest.to_string());
                }
                "ground" => {
                    if toks.len() != 2 {
                        return Err(ctx.syntax(head.column, "`.ground` takes exactly one vertex"));
                    }
                    ground = Some((toks[1].text.to_string(), ctx.line));
                }
                "partition" => {
                    if toks.len() < 3 {
                        return Err(ctx.syntax(head.column, "`.partition` needs an id and at least one vertex"));
                    }
                    let id: u32 = toks[1]
                        .text
                        .parse()
                        .ok()
                        .filter(|&id| id >= 1)
                        .ok_or_else(|| ctx.syntax(toks[1].column, format!("bad partition id `{}`", toks[1].text)))?;
                    for t in &toks[2..] {
                        let v = t.text.to_string();
                        if let Some(&prev) = partitions.get(&v) {
                            if prev != id {
                                return Err(NetlistError::PartitionConflict {
                                    line: ctx.line,
                                    vertex: v,
                                    first: prev,
                                    second: id,
                                });
                            }
                        }
                        partitions.insert(v.clone(), id);
                        partition_lines.push((v, ctx.line));
                    }
                }
                other => return Err(ctx.syntax(head.column, format!("unknown directive `.{other}`"))),
            }
            continue;
        }

        let name = head.text.to_string();
        let letter = name.chars().next().unwrap().to_ascii_uppercase();
        if lines_of.contains_key(&name) {
            return Err(NetlistError::DuplicateName { line: ctx.line, name });
        }
        if letter == 'K' {
            if toks.len() != 3 {
                return Err(ctx.syntax(head.column, "coupling lines read `K<name> <vertex>[@id] <vertex>[@id]`"));
            }
            let (pos, pos_partition) = parse_endpoint(&ctx, &toks[1])?;
            let (neg, neg_partition) = parse_endpoint(&ctx, &toks[2])?;
            if pos == neg {
                return Err(NetlistError::SelfLoop { line: ctx.line, name, vertex: pos });
            }
            lines_of.insert(name.clone(), ctx.line);
            couplings.push(CouplingDecl { name, pos, pos_partition, neg, neg_partition });
            continue;
        }
        let kind = match letter {
            'R' => ElementKind::R,
            'C' => ElementKind::C,
            'L' => ElementKind::L,
            'V' => ElementKind::V,
            'I' => ElementKind::I,
            _ => return Err(ctx.syntax(head.column, format!("unknown element kind in `{name}`"))),
        };
        if toks.len() < 4 {
            return Err(ctx.syntax(head.column, format!("element `{name}` needs two vertices and a value")));
        }
        let pos = toks[1].text.to_string();
        let neg = toks[2].text.to_string();
        for t in &toks[1..3] {
            if t.text.contains('@') {
                return Err(ctx.syntax(t.column, "partition annotations are only allowed on coupling lines"));
            }
        }
        if pos == neg {
            return Err(NetlistError::SelfLoop { line: ctx.line, name, vertex: pos });
        }
        let value = match kind {
            ElementKind::V | ElementKind::I => ElementValue::Source(parse_source(&ctx, &toks[3..], toks[2].column)?),
            _ => {
                if toks.len() != 4 {
                    return Err(ctx.syntax(toks[4].column, "unexpected trailing token"));
                }
                ElementValue::Law(parse_law(&ctx, kind, &name, &toks[3])?)
            }
        };
        lines_of.insert(name.clone(), ctx.line);
        elements.push(ElementDecl { name, kind, pos, neg, value });
    }

    let (ground, ground_line) = ground.unwrap_or_else(|| ("0".to_string(), 0));
    let netlist = Netlist { title, ground, elements, couplings, partitions };
    let touched: HashSet<&str> = netlist
        .elements
        .iter()
        .flat_map(|e| [e.pos.as_str(), e.neg.as_str()])
        .chain(netlist.couplings.iter().flat_map(|k| [k.pos.as_str(), k.neg.as_str()]))
        .collect();
    if !touched.contains(netlist.ground.as_str()) {
        return Err(if ground_line > 0 {
            NetlistError::UnknownVertex { line: ground_line, vertex: netlist.ground.clone() }
        } else {
            NetlistError::MissingGround { ground: netlist.ground.clone() }
        });
    }
    for (v, line) in &partition_lines {
        if !touched.contains(v.as_str()) {
            return Err(NetlistError::UnknownVertex { line: *line, vertex: v.clone() });
        }
        if *v == netlist.ground {
            return Err(NetlistError::Syntax {
                line: *line,
                column: 1,
                message: format!("ground vertex `{v}` belongs to every partition and cannot be assigned"),
            });
        }
    }
    check_partitions(&netlist, &lines_of)?;
    Ok(netlist)
}

fn check_partitions(n: &Netlist, lines_of: &HashMap<String, usize>) -> Result<(), NetlistError> {
    // Coupling annotations must agree with directives and with each other.
    let mut annotated: HashMap<&str, u32> = HashMap::new();
    for k in &n.couplings {
        let line = lines_of[&k.name];
        for (v, p) in [(&k.pos, k.pos_partition), (&k.neg, k.neg_partition)] {
            if *v == n.ground {
                return Err(NetlistError::InvalidCoupling {
                    line,
                    name: k.name.clone(),
                    message: "coupling branches cannot end at the shared ground".into(),
                });
            }
            let Some(p) = p else { continue };
            let known = n.partitions.get(v.as_str()).copied().or_else(|| annotated.get(v.as_str()).copied());
            if let Some(first) = known {
                if first != p {
                    return Err(NetlistError::PartitionConflict { line, vertex: v.clone(), first, second: p });
                }
            }
            annotated.insert(v, p);
        }
        let (a, b) = (n.partition_of(&k.pos), n.partition_of(&k.neg));
        if a == b {
            return Err(NetlistError::InvalidCoupling {
                line,
                name: k.name.clone(),
                message: format!("both ends lie in partition {a}"),
            });
        }
    }
    for e in &n.elements {
        if e.pos == n.ground || e.neg == n.ground {
            continue;
        }
        let (a, b) = (n.partition_of(&e.pos), n.partition_of(&e.neg));
        if a != b {
            return Err(NetlistError::ElementSpansPartitions {
                line: lines_of[&e.name],
                name: e.name.clone(),
                first: a,
                second: b,
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_netlist() {
        let n = parse_netlist("V1 n1 0 DC 1\nR1 n1 0 R=1").unwrap();
        assert_eq!(n.elements.len(), 2);
        assert_eq!(n.ground, "0");
        assert_eq!(n.vertices(), vec!["n1"]);
    }

    #[test]
    fn empty_input_has_no_ground() {
        assert!(matches!(parse_netlist(""), Err(NetlistError::MissingGround { .. })));
        assert!(matches!(parse_netlist("* only a comment\n"), Err(NetlistError::MissingGround { .. })));
    }

    #[test]
    fn self_loop_rejected() {
        assert!(matches!(parse_netlist("C1 a a C=1"), Err(NetlistError::SelfLoop { .. })));
    }

    #[test]
    fn diagnostics_are_anchored() {
        let err = parse_netlist("V1 n1 0 DC 1\nR1 n1 0 R=abc").unwrap_err();
        assert_eq!(err, NetlistError::Syntax { line: 2, column: 9, message: "expected a number, found `abc`".into() });
        assert!(matches!(parse_netlist("R1 a 0 R=1\nR1 a 0 R=2"), Err(NetlistError::DuplicateName { line: 2, .. })));
        assert!(matches!(parse_netlist("R1 a 0 R=1\n.ground zz"), Err(NetlistError::UnknownVertex { .. })));
        assert!(matches!(parse_netlist("R1 a 0 R=1\n.partition 2 q"), Err(NetlistError::UnknownVertex { .. })));
        assert!(matches!(parse_netlist("R1 a 0 R=-1"), Err(NetlistError::InvalidLaw { .. })));
        assert!(matches!(parse_netlist("C1 a 0 G=poly:1,1"), Err(NetlistError::Syntax { .. })));
        assert!(matches!(parse_netlist("X1 a 0 R=1"), Err(NetlistError::Syntax { .. })));
    }

    #[test]
    fn laws_and_sources() {
        let n = parse_netlist(
            "R1 a 0 G=poly:1,0.5\nR2 a 0 G=diode:1e-12,0.025\nC1 a 0 Q=poly:2,1\nL1 a b PHI=poly:1,0\n\
             R3 b 0 R=1k\nV1 b 0 SIN 1 50 90\nI1 a 0 DC 2m",
        )
        .unwrap();
        assert_eq!(n.elements[4].value, ElementValue::Law(LawSpec::Value(1000.0)));
        assert_eq!(n.elements[5].value, ElementValue::Source(Signal::Sin { amp: 1.0, freq: 50.0, phase_deg: 90.0 }));
        assert_eq!(n.elements[6].value, ElementValue::Source(Signal::Dc(2e-3)));
        let s = Signal::Sin { amp: 2.0, freq: 1.0, phase_deg: 90.0 };
        assert!((s.value(0.0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn partitions_and_couplings() {
        let text = "V1 a 0 DC 1\nR1 a t1 R=1\nKc t1@1 t2@2\nR2 t2 b R=1\nC2 b 0 C=1\n.partition 2 b\n.end\nR9 x y R=1";
        let n = parse_netlist(text).unwrap();
        assert_eq!(n.partition_of("t2"), 2);
        assert_eq!(n.partition_of("b"), 2);
        assert_eq!(n.partition_of("a"), 1);
        assert_eq!(n.elements.len(), 4);
        let bad = "V1 a 0 DC 1\nR1 a b R=1\n.partition 2 b";
        assert!(matches!(parse_netlist(bad), Err(NetlistError::ElementSpansPartitions { .. })));
        let same = "R1 a 0 R=1\nR2 b 0 R=1\nK1 a b";
        assert!(matches!(parse_netlist(same), Err(NetlistError::InvalidCoupling { .. })));
        let conflict = "R1 a 0 R=1\nR2 b 0 R=1\n.partition 2 b\nK1 a@1 b@3";
        assert!(matches!(parse_netlist(conflict), Err(NetlistError::PartitionConflict { .. })));
    }

    #[test]
    fn print_then_parse_is_identity() {
        let text = ".title demo\nV1 a 0 SIN 1 50\nR1 a t1 G=poly:1,0.5\nKc t1 t2@2\nR2 t2 b R=1e-3\nC2 b 0 Q=poly:1,2\n\
                    .partition 2 b\n.ground 0";
        let n = parse_netlist(text).unwrap();
        let again = parse_netlist(&n.to_string()).unwrap();
        assert_eq!(n, again);
    }
}
