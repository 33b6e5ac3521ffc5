//! The widget catalog: each gate or momentum-control element is a small fixed
//! graph behind the [`Widget`] trait, registered by name and selected at
//! runtime (CLI `--widget ...`).
//!
//! Topology conventions. The two-terminal widgets PhaseShift, Filter and
//! Separator are *decorations*: their in and out terminals share a single
//! wire vertex and the structure hangs off it. This is the layout whose
//! direct scattering solution reproduces the closed-form transmission
//! coefficients exactly (a widget drawn with its own wire stubs picks up an
//! extra e^{ik} per stub edge and a different effective length). With this
//! convention the closed forms, the effective lengths at k = -pi/4
//! (phase 1, basis change 2, filter 2, separator 4(3 - 2*sqrt(2))), and the
//! relative gate phases all come out as printed, and merged gluing composes
//! transmissions multiplicatively at zero reflection.

use crate::graph::{GraphTopology, Terminal, TerminalKind};
use crate::linalg::CMatrix;
use crate::C64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum WidgetError {
    #[error("unknown widget '{0}' (try wire:<len>, cnot, phase, basis, filter, separator)")]
    Unknown(String),
    #[error("wire length must be a positive integer, got '{0}'")]
    BadWireLength(String),
}

/// One catalog entry: a fixed topology with named terminals, and the
/// closed-form scattering coefficients where the catalog records them.
pub trait Widget: Send + Sync {
    /// Registry name ("phase", "wire:3", ...).
    fn name(&self) -> String;

    /// The widget graph with deterministic vertex numbering.
    fn build(&self) -> GraphTopology;

    /// Closed-form S-matrix entry from terminal `from` (incoming) to
    /// terminal `to` (`from == to` gives the reflection coefficient), if the
    /// catalog has a printed expression for this widget. Evaluated exactly
    /// as printed; the solver must agree with it to 1e-10.
    fn closed_form(&self, _from: &str, _to: &str, _k: f64) -> Option<C64> {
        None
    }
}

fn term(name: &str, vertex: usize, kind: TerminalKind) -> Terminal {
    Terminal {
        name: name.to_string(),
        vertex,
        kind,
    }
}

fn graph(
    n: usize,
    edges: &[(usize, usize)],
    terminals: Vec<Terminal>,
) -> GraphTopology {
    GraphTopology::new(n, edges.iter().copied(), terminals)
        .expect("catalog widget topologies are valid by construction")
}

/// Straight wire of `0.len` edges; terminals `in`/`out` at the ends.
pub struct Wire(pub usize);

impl Widget for Wire {
    fn name(&self) -> String {
        format!("wire:{}", self.0)
    }

    fn build(&self) -> GraphTopology {
        let n = self.0;
        assert!(n >= 1, "wire length must be positive");
        let edges: Vec<_> = (0..n).map(|i| (i, i + 1)).collect();
        graph(
            n + 1,
            &edges,
            vec![
                term("in", 0, TerminalKind::Input),
                term("out", n, TerminalKind::Output),
            ],
        )
    }

    fn closed_form(&self, from: &str, to: &str, k: f64) -> Option<C64> {
        let phase = (C64::i() * k * self.0 as f64).exp();
        match (from, to) {
            ("in", "out") | ("out", "in") => Some(phase),
            ("in", "in") | ("out", "out") => Some(C64::new(0.0, 0.0)),
            _ => None,
        }
    }
}

/// Controlled-not as a wire permutation: |10> and |11> exchange, one edge per
/// wire. Terminals `00_in` .. `11_out`.
pub struct Cnot;

impl Widget for Cnot {
    fn name(&self) -> String {
        "cnot".to_string()
    }

    fn build(&self) -> GraphTopology {
        // inputs 0..4 in wire order 00,01,10,11; outputs 4..8
        let perm = [0usize, 1, 3, 2];
        let edges: Vec<_> = (0..4).map(|w| (w, 4 + perm[w])).collect();
        let labels = ["00", "01", "10", "11"];
        let mut terminals = Vec::new();
        for (w, l) in labels.iter().enumerate() {
            terminals.push(term(&format!("{l}_in"), w, TerminalKind::Input));
        }
        for (w, l) in labels.iter().enumerate() {
            terminals.push(term(&format!("{l}_out"), 4 + w, TerminalKind::Output));
        }
        graph(8, &edges, terminals)
    }

    fn closed_form(&self, from: &str, to: &str, k: f64) -> Option<C64> {
        let perm = |label: &str| match label {
            "00" => Some("00"),
            "01" => Some("01"),
            "10" => Some("11"),
            "11" => Some("10"),
            _ => None,
        };
        let (fl, fs) = from.split_once('_')?;
        let (tl, ts) = to.split_once('_')?;
        let zero = Some(C64::new(0.0, 0.0));
        match (fs, ts) {
            ("in", "out") => {
                if perm(fl)? == tl {
                    Some((C64::i() * k).exp())
                } else {
                    zero
                }
            }
            ("out", "in") => {
                if perm(tl)? == fl {
                    Some((C64::i() * k).exp())
                } else {
                    zero
                }
            }
            _ => zero,
        }
    }
}

/// Phase-shift widget: a diamond (4-cycle with a pendant stalk) hung on one
/// wire vertex. T(-pi/4) = 1 and the effective length there is 1, so against
/// the unit wire on the |0> rail it applies diag(1, e^{i pi/4}).
pub struct PhaseShift;

/// T^(b)(k) = 8 / (8 + i cos 2k csc^3 k sec k).
pub fn phase_shift_transmission(k: f64) -> C64 {
    let c = (2.0 * k).cos() / (k.sin().powi(3) * k.cos());
    8.0 / (C64::new(8.0, 0.0) + C64::i() * c)
}

impl Widget for PhaseShift {
    fn name(&self) -> String {
        "phase".to_string()
    }

    fn build(&self) -> GraphTopology {
        // 0 = wire vertex (in and out), 1 = d, 2..4 = e,f,g; cycle d-e-f-g-d
        graph(
            5,
            &[(0, 1), (1, 2), (2, 3), (3, 4), (1, 4)],
            vec![
                term("in", 0, TerminalKind::Input),
                term("out", 0, TerminalKind::Output),
            ],
        )
    }

    fn closed_form(&self, from: &str, to: &str, k: f64) -> Option<C64> {
        let t = phase_shift_transmission(k);
        match (from, to) {
            ("in", "out") | ("out", "in") => Some(t),
            // Both leads meet at the wire vertex, so R = T - 1.
            ("in", "in") | ("out", "out") => Some(t - 1.0),
            _ => None,
        }
    }
}

/// Basis-changing widget: two rails of one edge each, tied by two 2-edge
/// rungs. At k = -pi/4 the transmission block is U_c exactly.
pub struct BasisChange;

fn basis_denominator(k: f64) -> C64 {
    C64::new(2.0 * k.cos(), (3.0 * k).sin() - k.sin())
}

/// T^(c) along a rail (0_in -> 0_out and 1_in -> 1_out).
pub fn basis_change_straight(k: f64) -> C64 {
    (C64::i() * k).exp() * C64::new(k.cos(), (3.0 * k).sin()) / basis_denominator(k)
}

/// T^(c) across the rails (0_in -> 1_out and 1_in -> 0_out).
pub fn basis_change_cross(k: f64) -> C64 {
    -C64::new(1.0, 0.0) / basis_denominator(k)
}

/// R^(c); also equals the input-to-input transmission T_(0_in,1_in).
pub fn basis_change_reflection(k: f64) -> C64 {
    -(C64::i() * k).exp() * (2.0 * k).cos() / basis_denominator(k)
}

impl Widget for BasisChange {
    fn name(&self) -> String {
        "basis".to_string()
    }

    fn build(&self) -> GraphTopology {
        // 0 = a1 (0_in), 1 = a2 (0_out), 2 = b1 (1_in), 3 = b2 (1_out),
        // 4 = m1, 5 = m2; rungs a1-m1-b1 and a2-m2-b2
        graph(
            6,
            &[(0, 1), (2, 3), (0, 4), (2, 4), (1, 5), (3, 5)],
            vec![
                term("0_in", 0, TerminalKind::Input),
                term("1_in", 2, TerminalKind::Input),
                term("0_out", 1, TerminalKind::Output),
                term("1_out", 3, TerminalKind::Output),
            ],
        )
    }

    fn closed_form(&self, from: &str, to: &str, k: f64) -> Option<C64> {
        // The widget is symmetric under rail swap and under in/out mirror.
        let straight = basis_change_straight(k);
        let cross = basis_change_cross(k);
        let refl = basis_change_reflection(k);
        let val = match (from, to) {
            ("0_in", "0_out") | ("0_out", "0_in") | ("1_in", "1_out") | ("1_out", "1_in") => straight,
            ("0_in", "1_out") | ("1_out", "0_in") | ("1_in", "0_out") | ("0_out", "1_in") => cross,
            ("0_in", "0_in") | ("1_in", "1_in") | ("0_out", "0_out") | ("1_out", "1_out") => refl,
            ("0_in", "1_in") | ("1_in", "0_in") | ("0_out", "1_out") | ("1_out", "0_out") => refl,
            _ => return None,
        };
        Some(val)
    }
}

/// Momentum filter: a claw and a drain line hung on one wire vertex. Fully
/// transparent at k = -pi/4 and -3pi/4; elsewhere amplitude leaks up the
/// drain or reflects.
pub struct Filter;

/// Decoration ratio y(k) = i e^{2ik} cos 2k / sin k.
pub fn filter_decoration_ratio(k: f64) -> C64 {
    C64::i() * (C64::i() * 2.0 * k).exp() * ((2.0 * k).cos() / k.sin())
}

impl Widget for Filter {
    fn name(&self) -> String {
        "filter".to_string()
    }

    fn build(&self) -> GraphTopology {
        // 0 = wire vertex (in, out), 1 = v1 (drain), 2 = w1, 3 = w2, 4 = w3
        graph(
            5,
            &[(0, 1), (1, 2), (2, 3), (2, 4)],
            vec![
                term("in", 0, TerminalKind::Input),
                term("out", 0, TerminalKind::Output),
                term("drain", 1, TerminalKind::Drain),
            ],
        )
    }
}

/// Momentum separator: pendant path plus triangle on one wire vertex. Equal
/// group velocities at -pi/4 and -3pi/4, but very different effective
/// lengths, so the two components arrive at different times.
pub struct Separator;

/// T^(e)(k) = [1 + i (cos k + cos 3k) / (sin k + 2 sin 2k + sin 3k - sin 5k)]^{-1}.
pub fn separator_transmission(k: f64) -> C64 {
    let num = k.cos() + (3.0 * k).cos();
    let den = k.sin() + 2.0 * (2.0 * k).sin() + (3.0 * k).sin() - (5.0 * k).sin();
    1.0 / (C64::new(1.0, 0.0) + C64::i() * (num / den))
}

impl Widget for Separator {
    fn name(&self) -> String {
        "separator".to_string()
    }

    fn build(&self) -> GraphTopology {
        // 0 = wire vertex (in, out), pendant path 1-2-3, apex 4 on the
        // triangle 1-2-4 (the odd cycle that breaks bipartite symmetry)
        graph(
            5,
            &[(0, 1), (1, 2), (2, 3), (1, 4), (2, 4)],
            vec![
                term("in", 0, TerminalKind::Input),
                term("out", 0, TerminalKind::Output),
            ],
        )
    }

    fn closed_form(&self, from: &str, to: &str, k: f64) -> Option<C64> {
        let t = separator_transmission(k);
        match (from, to) {
            ("in", "out") | ("out", "in") => Some(t),
            ("in", "in") | ("out", "out") => Some(t - 1.0),
            _ => None,
        }
    }
}

/// All catalog widgets (unit wire standing in for the wire family).
pub fn catalog() -> Vec<Box<dyn Widget>> {
    vec![
        Box::new(Wire(1)),
        Box::new(Cnot),
        Box::new(PhaseShift),
        Box::new(BasisChange),
        Box::new(Filter),
        Box::new(Separator),
    ]
}

/// Resolve a widget by registry name. Wires take a length suffix:
/// `wire:5` (or `wire` for length 1).
pub fn lookup(name: &str) -> Result<Box<dyn Widget>, WidgetError> {
    let name = name.trim();
    if let Some(rest) = name.strip_prefix("wire") {
        let rest = rest.trim_start_matches(':').trim();
        if rest.is_empty() {
            return Ok(Box::new(Wire(1)));
        }
        let len: usize = rest
            .parse()
            .map_err(|_| WidgetError::BadWireLength(rest.to_string()))?;
        if len == 0 {
            return Err(WidgetError::BadWireLength(rest.to_string()));
        }
        return Ok(Box::new(Wire(len)));
    }
    match name {
        "cnot" => Ok(Box::new(Cnot)),
        "phase" => Ok(Box::new(PhaseShift)),
        "basis" => Ok(Box::new(BasisChange)),
        "filter" => Ok(Box::new(Filter)),
        "separator" => Ok(Box::new(Separator)),
        other => Err(WidgetError::Unknown(other.to_string())),
    }
}

/// The phase gate realized by the phase-shift widget against a unit wire.
pub fn u_b() -> CMatrix {
    let mut m = CMatrix::zeros(2, 2);
    m[(0, 0)] = C64::new(1.0, 0.0);
    m[(1, 1)] = C64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
    m
}

/// The basis-changing gate: -(1/sqrt 2) [[i, 1], [1, i]].
pub fn u_c() -> CMatrix {
    let s = -1.0 / 2.0f64.sqrt();
    let mut m = CMatrix::zeros(2, 2);
    m[(0, 0)] = C64::new(0.0, s);
    m[(0, 1)] = C64::new(s, 0.0);
    m[(1, 0)] = C64::new(s, 0.0);
    m[(1, 1)] = C64::new(0.0, s);
    m
}

/// The Hadamard matrix.
pub fn hadamard() -> CMatrix {
    let s = 1.0 / 2.0f64.sqrt();
    let mut m = CMatrix::zeros(2, 2);
    m[(0, 0)] = C64::new(s, 0.0);
    m[(0, 1)] = C64::new(s, 0.0);
    m[(1, 0)] = C64::new(s, 0.0);
    m[(1, 1)] = C64::new(-s, 0.0);
    m
}

/// Max entrywise deviation of `a` from `b` after aligning global phase on
/// the largest entry of `a`.
pub fn phase_aligned_deviation(a: &CMatrix, b: &CMatrix) -> f64 {
    let mut best = (0, 0);
    let mut best_mag = 0.0;
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            if a[(i, j)].norm() > best_mag {
                best_mag = a[(i, j)].norm();
                best = (i, j);
            }
        }
    }
    if best_mag == 0.0 {
        return b.max_abs();
    }
    let phase = (a[best] / a[best].norm()) / (b[best] / b[best].norm());
    a.scale(phase.conj()).sub(b).max_abs()
}
