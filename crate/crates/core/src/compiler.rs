//! Lowering circuits to graphs.
//!
//! A circuit on n qubits becomes 2^n wires, one per basis string, built left
//! to right. Single-qubit gates hang their widget on the wires where the
//! target bit is 1 (U_b) or tie bit-partner wires together (U_c); CNOT
//! crosses wire pairs; untouched wires get unit-wire padding so every layer
//! adds the same effective length to every wire at k = -pi/4.
//!
//! Junction bookkeeping: a frontier vertex can carry at most 3 edges
//! counting its eventual lead. Units that need more room than the frontier
//! has left (a decoration on an already-decorated junction, or the two rail
//! edges of U_c) are preceded by a one-edge spacer on every wire, which
//! keeps the wires in step and the whole machine at maximum degree 3.

use crate::circuit::{CircuitDescription, Gate};
use crate::graph::{GraphTopology, Terminal, TerminalKind, VertexId};
use std::collections::BTreeMap;
use thiserror::Error;

/// Effective length of the separator at k = -pi/4: 4 (3 - 2 sqrt 2).
pub fn separator_effective_length() -> f64 {
    4.0 * (3.0 - 2.0 * 2.0f64.sqrt())
}

#[derive(Debug, Error)]
pub enum CompileError {
    #[error(transparent)]
    Circuit(#[from] crate::circuit::CircuitError),
    #[error(transparent)]
    Graph(#[from] crate::graph::GraphError),
    #[error(
        "unsound truncation: length {given} is below the wavefront bound 2(x + l) = {needed:.1} \
         (pass allow_unsound to override)"
    )]
    UnsoundTruncation { given: usize, needed: f64 },
    #[error("start offset x must be at least 1")]
    BadStartOffset,
}

/// Default filter count: 2 ceil(log2(m + 2)) for an m-gate circuit.
pub fn default_filter_count(gate_count: usize) -> usize {
    2 * ((gate_count + 2) as f64).log2().ceil() as usize
}

struct Builder {
    qubits: usize,
    wires: usize,
    vertex_count: usize,
    edges: Vec<(VertexId, VertexId)>,
    frontier: Vec<VertexId>,
    /// Edges already on the frontier vertex, counting the reserved lead
    /// slot on the seed.
    frontier_degree: Vec<usize>,
    seeds: Vec<VertexId>,
    drains: Vec<VertexId>,
    /// Effective length at k = -pi/4 accumulated along the input wire 0
    /// path (identical for every wire across the gate layers).
    effective_length: f64,
    layer_count: usize,
}

impl Builder {
    fn new(qubits: usize) -> Builder {
        let wires = 1usize << qubits;
        let mut b = Builder {
            qubits,
            wires,
            vertex_count: 0,
            edges: Vec::new(),
            frontier: Vec::with_capacity(wires),
            frontier_degree: Vec::with_capacity(wires),
            seeds: Vec::with_capacity(wires),
            drains: Vec::new(),
            effective_length: 0.0,
            layer_count: 0,
        };
        for _ in 0..wires {
            let v = b.new_vertex();
            b.frontier.push(v);
            b.frontier_degree.push(1); // the input lead will attach here
            b.seeds.push(v);
        }
        b
    }

    fn new_vertex(&mut self) -> VertexId {
        let v = self.vertex_count;
        self.vertex_count += 1;
        v
    }

    fn edge(&mut self, u: VertexId, v: VertexId) {
        self.edges.push((u, v));
    }

    fn bit(&self, wire: usize, qubit: usize) -> bool {
        (wire >> (self.qubits - qubit)) & 1 == 1
    }

    fn spacer_wire(&mut self, w: usize) {
        let v = self.new_vertex();
        self.edge(self.frontier[w], v);
        self.frontier[w] = v;
        self.frontier_degree[w] = 1;
    }

    fn spacer_all(&mut self) {
        for w in 0..self.wires {
            self.spacer_wire(w);
        }
        self.effective_length += 1.0;
    }

    /// Insert a spacer layer if any wire lacks the room its unit needs.
    fn make_room(&mut self, slots: impl Fn(usize) -> usize) {
        let needed = (0..self.wires).any(|w| self.frontier_degree[w] + slots(w) > 3);
        if needed {
            self.spacer_all();
        }
    }

    fn attach_diamond(&mut self, w: usize) {
        let v0 = self.frontier[w];
        let d = self.new_vertex();
        let e = self.new_vertex();
        let f = self.new_vertex();
        let g = self.new_vertex();
        self.edge(v0, d);
        self.edge(d, e);
        self.edge(e, f);
        self.edge(f, g);
        self.edge(d, g);
        self.frontier_degree[w] += 1;
    }

    fn apply_ub(&mut self, qubit: usize) {
        let shift = self.qubits - qubit;
        self.make_room(|w| if (w >> shift) & 1 == 1 { 2 } else { 1 });
        for w in 0..self.wires {
            if self.bit(w, qubit) {
                self.attach_diamond(w);
            } else {
                self.spacer_wire(w);
            }
        }
        self.effective_length += 1.0;
        self.layer_count += 1;
    }

    fn apply_uc(&mut self, qubit: usize) {
        self.make_room(|_| 2);
        for w0 in 0..self.wires {
            if self.bit(w0, qubit) {
                continue;
            }
            let w1 = w0 | (1 << (self.qubits - qubit));
            let a1 = self.frontier[w0];
            let b1 = self.frontier[w1];
            let a2 = self.new_vertex();
            let b2 = self.new_vertex();
            let m1 = self.new_vertex();
            let m2 = self.new_vertex();
            self.edge(a1, a2);
            self.edge(b1, b2);
            self.edge(a1, m1);
            self.edge(m1, b1);
            self.edge(a2, m2);
            self.edge(m2, b2);
            self.frontier[w0] = a2;
            self.frontier[w1] = b2;
            self.frontier_degree[w0] = 2;
            self.frontier_degree[w1] = 2;
        }
        self.effective_length += 2.0;
        self.layer_count += 1;
    }

    fn apply_cnot(&mut self, control: usize, target: usize) {
        self.make_room(|_| 1);
        let outs: Vec<VertexId> = (0..self.wires).map(|_| self.new_vertex()).collect();
        for w in 0..self.wires {
            let dest = if self.bit(w, control) {
                w ^ (1 << (self.qubits - target))
            } else {
                w
            };
            self.edge(self.frontier[w], outs[dest]);
        }
        for w in 0..self.wires {
            self.frontier[w] = outs[w];
            self.frontier_degree[w] = 1;
        }
        self.effective_length += 1.0;
        self.layer_count += 1;
    }

    /// Filter on wire 0 only (machine prefix).
    fn apply_filter(&mut self) {
        if self.frontier_degree[0] + 2 > 3 {
            self.spacer_wire(0);
            self.effective_length += 1.0;
        }
        let v0 = self.frontier[0];
        let v1 = self.new_vertex();
        let w1 = self.new_vertex();
        let w2 = self.new_vertex();
        let w3 = self.new_vertex();
        self.edge(v0, v1);
        self.edge(v1, w1);
        self.edge(w1, w2);
        self.edge(w1, w3);
        self.drains.push(v1);
        self.frontier_degree[0] += 1;
        self.effective_length += 2.0;
    }

    /// Separator on wire 0 only (machine prefix).
    fn apply_separator(&mut self) {
        if self.frontier_degree[0] + 2 > 3 {
            self.spacer_wire(0);
            self.effective_length += 1.0;
        }
        let v0 = self.frontier[0];
        let v1 = self.new_vertex();
        let v2 = self.new_vertex();
        let v3 = self.new_vertex();
        let u = self.new_vertex();
        self.edge(v0, v1);
        self.edge(v1, v2);
        self.edge(v2, v3);
        self.edge(v1, u);
        self.edge(v2, u);
        self.frontier_degree[0] += 1;
        self.effective_length += separator_effective_length();
    }

    fn apply_gate(&mut self, gate: Gate) {
        match gate {
            Gate::UB(q) => self.apply_ub(q),
            Gate::UC(q) => self.apply_uc(q),
            Gate::Cnot { control, target } => self.apply_cnot(control, target),
            Gate::H(_) => unreachable!("macros are expanded before lowering"),
        }
    }
}

/// A compiled circuit: the widget graph with one `<bits>_in` / `<bits>_out`
/// terminal pair per wire, before filters, separator, or truncation.
#[derive(Clone, Debug)]
pub struct CompiledCircuit {
    pub graph: GraphTopology,
    /// basis string -> (input terminal, output terminal)
    pub wire_labels: BTreeMap<String, (String, String)>,
    /// Gate layers after macro expansion (spacer edges are not layers).
    pub layer_count: usize,
    /// Effective length at k = -pi/4 of every wire through the layers.
    pub effective_length: f64,
}

pub fn compile_circuit(circuit: &CircuitDescription) -> Result<CompiledCircuit, CompileError> {
    let mut b = Builder::new(circuit.qubit_count);
    for gate in circuit.expanded() {
        b.apply_gate(gate);
    }
    let mut terminals = Vec::new();
    let mut wire_labels = BTreeMap::new();
    for w in 0..b.wires {
        let label = circuit.wire_label(w);
        let in_name = format!("{label}_in");
        let out_name = format!("{label}_out");
        terminals.push(Terminal {
            name: in_name.clone(),
            vertex: b.seeds[w],
            kind: TerminalKind::Input,
        });
        terminals.push(Terminal {
            name: out_name.clone(),
            vertex: b.frontier[w],
            kind: TerminalKind::Output,
        });
        wire_labels.insert(label, (in_name, out_name));
    }
    let graph = GraphTopology::new(b.vertex_count, b.edges.iter().copied(), terminals)?;
    Ok(CompiledCircuit {
        graph,
        wire_labels,
        layer_count: b.layer_count,
        effective_length: b.effective_length,
    })
}

/// Truncation choice for the machine leads.
#[derive(Clone, Copy, Debug)]
pub enum Truncation {
    /// ceil(2 (x + l)): the wavefront cannot reach the ends in time t.
    Auto,
    Explicit(usize),
}

#[derive(Clone, Debug)]
pub struct AssembleOptions {
    /// Start offset x of the walker on the input lead.
    pub start_offset: usize,
    /// Number of momentum filters; None picks 2 ceil(log2(m + 2)).
    pub filter_count: Option<usize>,
    pub truncation: Truncation,
    /// Accept an explicit truncation below the soundness bound.
    pub allow_unsound: bool,
}

impl Default for AssembleOptions {
    fn default() -> Self {
        AssembleOptions {
            start_offset: 400,
            filter_count: None,
            truncation: Truncation::Auto,
            allow_unsound: false,
        }
    }
}

/// The full machine: filters and a separator ahead of the circuit on wire
/// 0's input, every lead truncated to a finite path.
#[derive(Clone, Debug)]
pub struct CompiledMachine {
    pub graph: GraphTopology,
    /// basis string -> (input terminal, output terminal)
    pub wire_labels: BTreeMap<String, (String, String)>,
    /// Total effective length at k = -pi/4 from the 0 input to any output.
    pub total_effective_length: f64,
    /// Walker start distance x on the input lead.
    pub start_offset: usize,
    /// t = pi floor((x + l) / (sqrt 2 pi)): aligns the +-2 cosh kappa
    /// bound-state phases.
    pub evolution_time: f64,
    pub filter_count: usize,
    pub truncation_length: usize,
    /// True when an explicit truncation below 2 (x + l) was forced through.
    pub unsound: bool,
    pub layer_count: usize,
    /// Lead vertices by wire label, index i holding lead position x = i + 1.
    pub input_leads: BTreeMap<String, Vec<VertexId>>,
    pub output_leads: BTreeMap<String, Vec<VertexId>>,
    pub drain_leads: Vec<Vec<VertexId>>,
}

impl CompiledMachine {
    /// The all-zeros basis string.
    pub fn zero_label(&self) -> String {
        self.wire_labels
            .keys()
            .find(|l| l.chars().all(|c| c == '0'))
            .cloned()
            .expect("machine always has the zero wire")
    }
}

pub fn assemble_computer(
    circuit: &CircuitDescription,
    opts: &AssembleOptions,
) -> Result<CompiledMachine, CompileError> {
    if opts.start_offset == 0 {
        return Err(CompileError::BadStartOffset);
    }
    let expanded = circuit.expanded();
    let filter_count = opts
        .filter_count
        .unwrap_or_else(|| default_filter_count(expanded.len()));
    let mut b = Builder::new(circuit.qubit_count);
    for _ in 0..filter_count {
        b.apply_filter();
    }
    b.apply_separator();
    for gate in &expanded {
        b.apply_gate(*gate);
    }
    let ell = b.effective_length;
    let x = opts.start_offset as f64;
    let needed = 2.0 * (x + ell);
    let truncation_length = match opts.truncation {
        Truncation::Auto => needed.ceil() as usize,
        Truncation::Explicit(n) => {
            if (n as f64) < needed && !opts.allow_unsound {
                return Err(CompileError::UnsoundTruncation { given: n, needed });
            }
            n
        }
    };
    let unsound = (truncation_length as f64) < needed;
    let evolution_time = std::f64::consts::PI
        * ((x + ell) / (2.0f64.sqrt() * std::f64::consts::PI)).floor();

    // Attach the truncated leads as concrete paths.
    let attach_lead = |b: &mut Builder, start: VertexId| -> Vec<VertexId> {
        let mut prev = start;
        let mut chain = Vec::with_capacity(truncation_length);
        for _ in 0..truncation_length {
            let v = b.new_vertex();
            b.edge(prev, v);
            prev = v;
            chain.push(v);
        }
        chain
    };
    let mut input_leads = BTreeMap::new();
    let mut output_leads = BTreeMap::new();
    let mut terminals = Vec::new();
    let mut wire_labels = BTreeMap::new();
    for w in 0..b.wires {
        let label = circuit.wire_label(w);
        let seed = b.seeds[w];
        let frontier = b.frontier[w];
        let chain_in = attach_lead(&mut b, seed);
        let chain_out = attach_lead(&mut b, frontier);
        input_leads.insert(label.clone(), chain_in);
        output_leads.insert(label.clone(), chain_out);
        let in_name = format!("{label}_in");
        let out_name = format!("{label}_out");
        terminals.push(Terminal {
            name: in_name.clone(),
            vertex: seed,
            kind: TerminalKind::Input,
        });
        terminals.push(Terminal {
            name: out_name.clone(),
            vertex: frontier,
            kind: TerminalKind::Output,
        });
        wire_labels.insert(label, (in_name, out_name));
    }
    let drain_vertices = b.drains.clone();
    let mut drain_leads = Vec::new();
    for (i, &dv) in drain_vertices.iter().enumerate() {
        let chain = attach_lead(&mut b, dv);
        drain_leads.push(chain);
        terminals.push(Terminal {
            name: format!("drain{i}"),
            vertex: dv,
            kind: TerminalKind::Drain,
        });
    }
    let graph = GraphTopology::new(b.vertex_count, b.edges.iter().copied(), terminals)?;
    Ok(CompiledMachine {
        graph,
        wire_labels,
        total_effective_length: ell,
        start_offset: opts.start_offset,
        evolution_time,
        filter_count,
        truncation_length,
        unsound,
        layer_count: b.layer_count,
        input_leads,
        output_leads,
        drain_leads,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;

    fn circuit(n: usize, gates: Vec<Gate>) -> CircuitDescription {
        CircuitDescription::new(n, gates).unwrap()
    }

    fn bell() -> CircuitDescription {
        circuit(2, vec![Gate::H(2), Gate::Cnot { control: 2, target: 1 }])
    }

    fn max_degree(g: &GraphTopology) -> usize {
        (0..g.vertex_count()).map(|v| g.degree(v)).max().unwrap_or(0)
    }

    #[test]
    fn empty_circuit_yields_bare_wires() {
        let c = compile_circuit(&circuit(1, vec![])).unwrap();
        assert_eq!(c.graph.vertex_count(), 2);
        assert_eq!(c.graph.edge_count(), 0);
        assert_eq!(c.layer_count, 0);
        assert_eq!(c.effective_length, 0.0);
        let (in0, out0) = &c.wire_labels["0"];
        // zero-length wire: both terminals on the seed vertex
        assert_eq!(
            c.graph.terminal(in0).unwrap().vertex,
            c.graph.terminal(out0).unwrap().vertex
        );
    }

    #[test]
    fn single_uc_is_exactly_the_widget() {
        let c = compile_circuit(&circuit(1, vec![Gate::UC(1)])).unwrap();
        assert_eq!(c.graph.vertex_count(), 6);
        assert_eq!(c.graph.edge_count(), 6);
        assert_eq!(c.layer_count, 1);
        assert_eq!(c.effective_length, 2.0);
    }

    #[test]
    fn layer_count_counts_expanded_gates() {
        let c = compile_circuit(&bell()).unwrap();
        assert_eq!(c.layer_count, 6); // H -> 5 gates, plus the CNOT
    }

    #[test]
    fn compiled_graphs_keep_degree_three() {
        let cases = vec![
            circuit(1, vec![Gate::UB(1), Gate::UB(1), Gate::UC(1), Gate::UB(1)]),
            bell(),
            circuit(
                2,
                vec![
                    Gate::UC(1),
                    Gate::Cnot { control: 1, target: 2 },
                    Gate::UB(2),
                    Gate::UB(2),
                ],
            ),
        ];
        for c in cases {
            let compiled = compile_circuit(&c).unwrap();
            assert!(compiled.graph.max_degree_with_leads() <= 3);
        }
    }

    #[test]
    fn ub_squared_gets_a_spacer() {
        // Two diamonds cannot share a junction; the second UB layer is
        // preceded by a one-edge spacer on both wires.
        let c = compile_circuit(&circuit(1, vec![Gate::UB(1), Gate::UB(1)])).unwrap();
        assert_eq!(c.effective_length, 3.0); // 1 + spacer + 1
        assert!(c.graph.max_degree_with_leads() <= 3);
    }

    #[test]
    fn assembled_machine_satisfies_invariants() {
        let m = assemble_computer(
            &bell(),
            &AssembleOptions {
                start_offset: 40,
                filter_count: Some(3),
                truncation: Truncation::Auto,
                allow_unsound: false,
            },
        )
        .unwrap();
        assert!(max_degree(&m.graph) <= 3);
        assert_eq!(m.filter_count, 3);
        // t = pi floor((x + l) / (sqrt 2 pi))
        let want_t = std::f64::consts::PI
            * ((40.0 + m.total_effective_length)
                / (2.0f64.sqrt() * std::f64::consts::PI))
                .floor();
        assert_eq!(m.evolution_time, want_t);
        assert!(m.truncation_length as f64 >= 2.0 * (40.0 + m.total_effective_length));
        assert_eq!(m.input_leads.len(), 4);
        assert_eq!(m.output_leads.len(), 4);
        assert_eq!(m.drain_leads.len(), 3);
        for lead in m.input_leads.values().chain(m.output_leads.values()) {
            assert_eq!(lead.len(), m.truncation_length);
        }
        assert_eq!(m.zero_label(), "00");
    }

    #[test]
    fn empty_machine_effective_length_is_the_separator() {
        let m = assemble_computer(
            &circuit(1, vec![]),
            &AssembleOptions {
                start_offset: 200,
                filter_count: Some(0),
                truncation: Truncation::Auto,
                allow_unsound: false,
            },
        )
        .unwrap();
        assert!((m.total_effective_length - separator_effective_length()).abs() < 1e-12);
    }

    #[test]
    fn unsound_truncation_is_rejected_unless_forced() {
        let opts = AssembleOptions {
            start_offset: 400,
            filter_count: Some(2),
            truncation: Truncation::Explicit(10),
            allow_unsound: false,
        };
        let err = assemble_computer(&circuit(1, vec![]), &opts).unwrap_err();
        assert!(matches!(err, CompileError::UnsoundTruncation { .. }));
        let forced = assemble_computer(
            &circuit(1, vec![]),
            &AssembleOptions {
                allow_unsound: true,
                ..opts
            },
        )
        .unwrap();
        assert!(forced.unsound);
        assert_eq!(forced.truncation_length, 10);
    }

    #[test]
    fn chosen_time_aligns_bound_state_phases() {
        // t is an integer multiple of pi, so e^{+2it} and e^{-2it} agree
        // and the two bound-state energy signs pick up the same phase.
        for (x, md) in [(40usize, 3usize), (400, 8), (123, 0)] {
            let m = assemble_computer(
                &bell(),
                &AssembleOptions {
                    start_offset: x,
                    filter_count: Some(md),
                    truncation: Truncation::Auto,
                    allow_unsound: false,
                },
            )
            .unwrap();
            let t = m.evolution_time;
            let diff = 2.0 * (2.0 * t).sin().abs(); // |e^{2it} - e^{-2it}|
            assert!(diff < 1e-9, "x={x} md={md}: {diff:e}");
        }
    }

    #[test]
    fn bell_machine_at_desk_scale_keeps_degree_three() {
        let m = assemble_computer(
            &bell(),
            &AssembleOptions {
                start_offset: 400,
                filter_count: Some(8),
                truncation: Truncation::Auto,
                allow_unsound: false,
            },
        )
        .unwrap();
        assert!(max_degree(&m.graph) <= 3);
    }

    #[test]
    fn default_filter_count_rule() {
        assert_eq!(default_filter_count(0), 2);
        assert_eq!(default_filter_count(6), 6);
        assert_eq!(default_filter_count(14), 8);
    }

    #[test]
    fn filter_cascade_spacing_matches_transfer_chain() {
        // m_d filters on wire 0 must sit one edge apart so the transfer
        // analysis applies to the cascade.
        let m = assemble_computer(
            &circuit(1, vec![]),
            &AssembleOptions {
                start_offset: 20,
                filter_count: Some(4),
                truncation: Truncation::Auto,
                allow_unsound: false,
            },
        )
        .unwrap();
        // l = 2 per filter + 1 per inter-filter spacer + separator prefix
        let want = 4.0 * 2.0 + 3.0 + 1.0 + separator_effective_length();
        assert!((m.total_effective_length - want).abs() < 1e-12);
    }
}
