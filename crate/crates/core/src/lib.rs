//! Quantum circuits as graphs, analyzed by continuous-time quantum walk.
//!
//! A circuit over {CNOT, U_b, U_c} is lowered to a simple unweighted graph of
//! maximum degree 3: one wire per computational basis state, with small fixed
//! "widgets" spliced into the wires to realize the gates by scattering. The
//! crate provides
//!
//! - the widget catalog and the circuit-to-graph compiler ([`graph`],
//!   [`widgets`], [`circuit`], [`compiler`]),
//! - a scattering solver for graphs with semi-infinite leads: S-matrices,
//!   effective lengths, stationary-phase estimates, bound states
//!   ([`scattering`], [`bound`]),
//! - transfer-matrix analysis of decorated chains ([`transfer`]),
//! - channel-block composition of multi-wire scatterers ([`compose`]),
//! - time evolution on the finite truncated graphs, wave packets, propagator
//!   reconstruction, and the end-to-end computer run ([`evolve`]).

pub mod bessel;
pub mod bound;
pub mod circuit;
pub mod compiler;
pub mod compose;
pub mod evolve;
pub mod graph;
pub mod linalg;
pub mod momentum;
pub mod scattering;
pub mod transfer;
pub mod widgets;

pub use graph::{GraphTopology, Terminal, TerminalKind};
pub use momentum::Momentum;

/// Complex double used throughout.
pub type C64 = num_complex::Complex64;
