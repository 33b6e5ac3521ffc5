//! Transfer-matrix analysis of decorated chains: a line with the same
//! decoration hung on m_d consecutive vertices, one edge apart. The
//! amplitudes on the wire obey
//!
//!   (psi_{x+1}, psi_x) = M (psi_x, psi_{x-1}),
//!   M = [[2 cos k - y(k), -1], [1, 0]],
//!
//! where y(k) is the decoration's response ratio, and the chain transmission
//! follows from the entries of M^{m_d}.

use crate::graph::{GraphTopology, TerminalKind};
use crate::linalg::CMatrix;
use crate::momentum::Momentum;
use crate::C64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TransferError {
    #[error(transparent)]
    Graph(#[from] crate::graph::GraphError),
    #[error("decoration response system is singular at k = {0}")]
    SingularResponse(f64),
    #[error("chain length m_d must be at least 1")]
    EmptyChain,
}

/// The one-step transfer matrix at momentum k for decoration ratio y.
#[derive(Clone, Debug)]
pub struct TransferMatrix {
    pub entries: [[C64; 2]; 2],
    pub k: Momentum,
    pub y: C64,
}

impl TransferMatrix {
    pub fn determinant(&self) -> C64 {
        let m = &self.entries;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    /// Magnitudes of the two eigenvalues, smaller first. det M = 1, so these
    /// are reciprocal up to the complex phases.
    pub fn eigenvalue_magnitudes(&self) -> (f64, f64) {
        let m = &self.entries;
        let tr = m[0][0] + m[1][1];
        let disc = (tr * tr - 4.0).sqrt();
        let l1 = ((tr + disc) / 2.0).norm();
        let l2 = ((tr - disc) / 2.0).norm();
        if l1 <= l2 {
            (l1, l2)
        } else {
            (l2, l1)
        }
    }
}

/// The transmission of a chain of m_d decorated vertices, by the entries
/// a, b, c, d of M^{m_d}.
#[derive(Clone, Debug)]
pub struct ChainResult {
    pub m_d: usize,
    /// Entries of M^{m_d}: [[a, b], [c, d]].
    pub power: [[C64; 2]; 2],
    /// T = 2i e^{-ik m_d} sin k / (-a e^{-ik} - b + c + d e^{ik}).
    pub transmission: C64,
    /// Eigenvalue magnitudes of the single-step M, smaller first.
    pub eigenvalue_magnitudes: (f64, f64),
}

/// Response ratio of a decoration driven from its attachment vertex:
/// the sum of the decoration amplitudes adjacent to the attachment, per unit
/// attachment amplitude. Drain terminals carry outgoing waves e^{ikx}, which
/// is what lets y(k) be complex for a finite widget.
pub fn decoration_ratio(
    g: &GraphTopology,
    attachment: &str,
    k: Momentum,
) -> Result<C64, TransferError> {
    let attach = g.terminal(attachment)?.vertex;
    // Unknowns: every vertex except the attachment.
    let others: Vec<usize> = (0..g.vertex_count()).filter(|&v| v != attach).collect();
    let index_of = |v: usize| others.iter().position(|&u| u == v);
    let n = others.len();
    if n == 0 {
        return Ok(C64::new(0.0, 0.0));
    }
    let adj = g.adjacency_list();
    let e_ik = C64::from_polar(1.0, k.get());
    let energy = k.energy();
    let mut drain_counts = vec![0usize; g.vertex_count()];
    for t in g.terminals() {
        if t.kind == TerminalKind::Drain {
            drain_counts[t.vertex] += 1;
        }
    }
    let mut m = CMatrix::zeros(n, n);
    let mut rhs = vec![C64::new(0.0, 0.0); n];
    for (row, &v) in others.iter().enumerate() {
        m[(row, row)] = e_ik * drain_counts[v] as f64 - energy;
        for &u in &adj[v] {
            if u == attach {
                // attachment amplitude is the unit drive
                rhs[row] -= 1.0;
            } else if let Some(col) = index_of(u) {
                m[(row, col)] += 1.0;
            }
        }
    }
    let (psi, cond) = m
        .lu_solve(&rhs)
        .map_err(|_| TransferError::SingularResponse(k.get()))?;
    if cond > crate::scattering::COND_LIMIT {
        return Err(TransferError::SingularResponse(k.get()));
    }
    let mut y = C64::new(0.0, 0.0);
    for &u in &adj[attach] {
        if let Some(col) = index_of(u) {
            y += psi[col];
        }
    }
    Ok(y)
}

/// The displayed one-step matrix [[2 cos k - y, -1], [1, 0]].
pub fn transfer_step(y: C64, k: Momentum) -> TransferMatrix {
    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    TransferMatrix {
        entries: [[k.energy() - y, -one], [one, zero]],
        k,
        y,
    }
}

fn mat_mul(a: &[[C64; 2]; 2], b: &[[C64; 2]; 2]) -> [[C64; 2]; 2] {
    let mut out = [[C64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// Chain transmission for m_d identical decorations with ratio y, by direct
/// repeated multiplication of the transfer matrix.
pub fn chain_transmission(y: C64, m_d: usize, k: Momentum) -> Result<ChainResult, TransferError> {
    if m_d == 0 {
        return Err(TransferError::EmptyChain);
    }
    let step = transfer_step(y, k);
    let mut power = [[C64::new(1.0, 0.0), C64::new(0.0, 0.0)], [
        C64::new(0.0, 0.0),
        C64::new(1.0, 0.0),
    ]];
    for _ in 0..m_d {
        power = mat_mul(&power, &step.entries);
    }
    let (a, b, c, d) = (power[0][0], power[0][1], power[1][0], power[1][1]);
    let kk = k.get();
    let e_ik = C64::from_polar(1.0, kk);
    let e_mik = C64::from_polar(1.0, -kk);
    let phase = C64::from_polar(1.0, -kk * m_d as f64);
    let transmission =
        C64::new(0.0, 2.0 * kk.sin()) * phase / (-a * e_mik - b + c + d * e_ik);
    Ok(ChainResult {
        m_d,
        power,
        transmission,
        eigenvalue_magnitudes: step.eigenvalue_magnitudes(),
    })
}

/// Chain transmission with y computed from a decoration graph.
pub fn chain_transmission_for(
    decoration: &GraphTopology,
    attachment: &str,
    m_d: usize,
    k: Momentum,
) -> Result<ChainResult, TransferError> {
    let y = decoration_ratio(decoration, attachment, k)?;
    chain_transmission(y, m_d, k)
}

/// The chain of m_d decorated vertices as a concrete graph: decorations one
/// edge apart, in-lead at the first decorated vertex and out-lead at the
/// last. Its direct scattering transmission equals the transfer formula
/// times the geometric phase e^{ik (m_d - 1)} of the span between the leads
/// (the formula normalizes away the underlying line).
pub fn filter_chain_graph(m_d: usize) -> GraphTopology {
    use crate::graph::Terminal;
    assert!(m_d >= 1);
    let mut edges = Vec::new();
    for i in 0..m_d.saturating_sub(1) {
        edges.push((i, i + 1));
    }
    let mut terminals = vec![
        Terminal { name: "in".into(), vertex: 0, kind: TerminalKind::Input },
        Terminal { name: "out".into(), vertex: m_d - 1, kind: TerminalKind::Output },
    ];
    let mut next = m_d;
    for i in 0..m_d {
        let (v1, w1, w2, w3) = (next, next + 1, next + 2, next + 3);
        next += 4;
        edges.extend_from_slice(&[(i, v1), (v1, w1), (w1, w2), (w1, w3)]);
        terminals.push(Terminal {
            name: format!("drain{i}"),
            vertex: v1,
            kind: TerminalKind::Drain,
        });
    }
    GraphTopology::new(next, edges, terminals).expect("chain graph is valid")
}
