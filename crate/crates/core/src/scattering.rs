//! Scattering eigenstates of graphs with semi-infinite leads.
//!
//! With a lead attached at each terminal and an incoming wave
//! e^{-ikx} on lead j, the eigencondition at energy 2 cos k reduces to the
//! finite linear system
//!
//!   (A + e^{ik} P - 2 cos k) psi = 2i sin k e_{v_j},
//!
//! where P counts the leads attached at each vertex. The outgoing
//! coefficient on lead j' is then psi(v_{j'}) - delta_{j,j'}; the lead rows
//! are satisfied identically by the plane-wave ansatz.

use crate::graph::GraphTopology;
use crate::linalg::CMatrix;
use crate::momentum::{Momentum, MomentumError};
use crate::C64;
use thiserror::Error;

/// Condition-estimate threshold for rejecting a solve.
pub const COND_LIMIT: f64 = 1e12;
/// Transmission floor below which phase derivatives are meaningless.
pub const TRANSMISSION_FLOOR: f64 = 1e-6;
/// Central-difference step for first derivatives of arg T.
pub const PHASE_STEP: f64 = 1e-5;
/// Central-difference step for second derivatives of arg T.
pub const CURVATURE_STEP: f64 = 1e-4;

#[derive(Debug, Error)]
pub enum ScatterError {
    #[error(transparent)]
    Momentum(#[from] MomentumError),
    #[error(transparent)]
    Graph(#[from] crate::graph::GraphError),
    #[error("linear system ill-conditioned at k = {k} (condition estimate {cond:.3e})")]
    IllConditioned { k: f64, cond: f64 },
    #[error("linear system singular at k = {k}")]
    Singular { k: f64 },
    #[error("S-matrix failed unitarity at k = {k} (deviation {dev:.3e})")]
    NotUnitary { k: f64, dev: f64 },
    #[error("|T| = {mag:.3e} below the floor {TRANSMISSION_FLOOR:e}; effective length undefined")]
    TransmissionTooSmall { mag: f64 },
    #[error("no stationary point in the band for x+y = {sum}")]
    NoStationaryPoint { sum: f64 },
}

/// One incoming-wave solution: reflection, transmissions, and the amplitudes
/// on the graph vertices.
#[derive(Clone, Debug)]
pub struct ScatteringSolution {
    pub k: Momentum,
    pub input: String,
    pub reflection: C64,
    /// Outgoing coefficient per non-input terminal, in terminal order.
    pub transmissions: Vec<(String, C64)>,
    /// Amplitude at every graph vertex.
    pub interior: Vec<C64>,
    pub energy: f64,
}

impl ScatteringSolution {
    /// |R|^2 + sum |T|^2; unitarity makes this 1.
    pub fn flux(&self) -> f64 {
        self.reflection.norm_sqr()
            + self
                .transmissions
                .iter()
                .map(|(_, t)| t.norm_sqr())
                .sum::<f64>()
    }

    pub fn transmission_to(&self, terminal: &str) -> Option<C64> {
        if terminal == self.input {
            return Some(self.reflection);
        }
        self.transmissions
            .iter()
            .find(|(n, _)| n == terminal)
            .map(|&(_, t)| t)
    }
}

/// The full S-matrix over the graph's terminals; entry (j, j') is the
/// outgoing coefficient on lead j' for a wave incoming on lead j.
#[derive(Clone, Debug)]
pub struct SMatrix {
    pub k: Momentum,
    pub terminal_names: Vec<String>,
    pub entries: CMatrix,
}

impl SMatrix {
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.terminal_names.iter().position(|n| n == name)
    }

    pub fn entry(&self, from: &str, to: &str) -> Option<C64> {
        Some(self.entries[(self.index_of(from)?, self.index_of(to)?)])
    }

    /// Max-entry deviation of S^H S from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        let n = self.terminal_names.len();
        self.entries
            .conj_transpose()
            .mul(&self.entries)
            .sub(&CMatrix::identity(n))
            .max_abs()
    }

    /// Max-entry deviation of S from its transpose.
    pub fn reciprocity_deviation(&self) -> f64 {
        self.entries.sub(&self.entries.transpose()).max_abs()
    }
}

fn lead_system(g: &GraphTopology, k: Momentum) -> CMatrix {
    let n = g.vertex_count();
    let e_ik = C64::from_polar(1.0, k.get());
    let energy = k.energy();
    let mut m = CMatrix::zeros(n, n);
    for (u, v) in g.edges() {
        m[(u, v)] = C64::new(1.0, 0.0);
        m[(v, u)] = C64::new(1.0, 0.0);
    }
    for (v, &leads) in g.lead_counts().iter().enumerate() {
        m[(v, v)] += e_ik * leads as f64 - energy;
    }
    m
}

/// Solve for the incoming scattering state on lead `input`.
pub fn solve_scattering(
    g: &GraphTopology,
    k: Momentum,
    input: &str,
) -> Result<ScatteringSolution, ScatterError> {
    let t_in = g.terminal(input)?.clone();
    let m = lead_system(g, k);
    let mut rhs = vec![C64::new(0.0, 0.0); g.vertex_count()];
    rhs[t_in.vertex] = C64::new(0.0, 2.0 * k.get().sin());
    let (psi, cond) = m
        .lu_solve(&rhs)
        .map_err(|_| ScatterError::Singular { k: k.get() })?;
    if cond > COND_LIMIT {
        return Err(ScatterError::IllConditioned { k: k.get(), cond });
    }
    let mut reflection = C64::new(0.0, 0.0);
    let mut transmissions = Vec::new();
    for t in g.terminals() {
        if t.name == t_in.name {
            reflection = psi[t.vertex] - 1.0;
        } else {
            transmissions.push((t.name.clone(), psi[t.vertex]));
        }
    }
    Ok(ScatteringSolution {
        k,
        input: t_in.name,
        reflection,
        transmissions,
        interior: psi,
        energy: k.energy(),
    })
}

/// Assemble the S-matrix from one solve per lead and check unitarity.
pub fn s_matrix(g: &GraphTopology, k: Momentum) -> Result<SMatrix, ScatterError> {
    let names: Vec<String> = g.terminals().iter().map(|t| t.name.clone()).collect();
    let n = names.len();
    let m = lead_system(g, k);
    let rhs: Vec<Vec<C64>> = g
        .terminals()
        .iter()
        .map(|t| {
            let mut b = vec![C64::new(0.0, 0.0); g.vertex_count()];
            b[t.vertex] = C64::new(0.0, 2.0 * k.get().sin());
            b
        })
        .collect();
    let (sols, cond) = m
        .lu_solve_many(&rhs)
        .map_err(|_| ScatterError::Singular { k: k.get() })?;
    if cond > COND_LIMIT {
        return Err(ScatterError::IllConditioned { k: k.get(), cond });
    }
    let mut entries = CMatrix::zeros(n, n);
    for (j, psi) in sols.iter().enumerate() {
        for (jp, t) in g.terminals().iter().enumerate() {
            entries[(j, jp)] = psi[t.vertex] - if j == jp { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
        }
    }
    let s = SMatrix {
        k,
        terminal_names: names,
        entries,
    };
    let dev = s.unitarity_deviation();
    if dev > 1e-8 {
        return Err(ScatterError::NotUnitary { k: k.get(), dev });
    }
    Ok(s)
}

fn transmission_entry(
    g: &GraphTopology,
    from: &str,
    to: &str,
    k: f64,
) -> Result<C64, ScatterError> {
    let km = Momentum::new(k)?;
    let sol = solve_scattering(g, km, from)?;
    sol.transmission_to(to)
        .ok_or_else(|| crate::graph::GraphError::UnknownTerminal(to.to_string()).into())
}

/// Group velocity v(k) = -2 sin k.
pub fn group_velocity(k: f64) -> f64 {
    -2.0 * k.sin()
}

/// Effective length d/dk arg T_{from,to} by a central difference with a
/// local unwrap (the phase increment is read from the ratio of the two
/// transmissions, so jumps across the branch cut are harmless as long as
/// the true increment stays below pi).
pub fn effective_length(
    g: &GraphTopology,
    from: &str,
    to: &str,
    k: f64,
    h: f64,
) -> Result<f64, ScatterError> {
    let t_minus = transmission_entry(g, from, to, k - h)?;
    let t_center = transmission_entry(g, from, to, k)?;
    let t_plus = transmission_entry(g, from, to, k + h)?;
    for t in [t_minus, t_center, t_plus] {
        if t.norm() <= TRANSMISSION_FLOOR {
            return Err(ScatterError::TransmissionTooSmall { mag: t.norm() });
        }
    }
    Ok((t_plus / t_minus).arg() / (2.0 * h))
}

/// Phase curvature c(k) = 2 t cos k + d^2/dk^2 arg T_{from,to}.
pub fn curvature(
    g: &GraphTopology,
    from: &str,
    to: &str,
    k: f64,
    t: f64,
    h: f64,
) -> Result<f64, ScatterError> {
    let t_minus = transmission_entry(g, from, to, k - h)?;
    let t_center = transmission_entry(g, from, to, k)?;
    let t_plus = transmission_entry(g, from, to, k + h)?;
    for tt in [t_minus, t_center, t_plus] {
        if tt.norm() <= TRANSMISSION_FLOOR {
            return Err(ScatterError::TransmissionTooSmall { mag: tt.norm() });
        }
    }
    let second = ((t_plus / t_center).arg() - (t_center / t_minus).arg()) / (h * h);
    Ok(2.0 * t * k.cos() + second)
}

/// Predicted arrival: a momentum k* where the integrand phase is
/// stationary, x + y + l(k) = -2 t sin k, and the stationary-phase
/// amplitude |T(k*)| / sqrt(2 pi |c(k*)|), scanned on the branch between
/// -pi/2 and 0. Multi-widget chains have internal resonances where l(k)
/// spikes and the equation picks up extra roots; those sit where the
/// curvature is huge, so the dominant arrival is the root with the largest
/// predicted amplitude, which is what this returns.
pub fn stationary_phase_predict(
    g: &GraphTopology,
    from: &str,
    to: &str,
    x: f64,
    y: f64,
    t: f64,
) -> Result<(Momentum, f64), ScatterError> {
    let sum = x + y;
    let f = |k: f64| -> Result<f64, ScatterError> {
        let ell = effective_length(g, from, to, k, PHASE_STEP)?;
        Ok(-2.0 * t * k.sin() - sum - ell)
    };
    let lo = -std::f64::consts::FRAC_PI_2 + 1e-4;
    let hi = -2e-3;
    let grid = 256;
    let mut prev: Option<(f64, f64)> = None;
    let mut best: Option<(f64, f64)> = None; // (amplitude, k*)
    for i in 0..=grid {
        let k = lo + (hi - lo) * i as f64 / grid as f64;
        let val = match f(k) {
            Ok(v) => v,
            Err(_) => {
                prev = None;
                continue;
            }
        };
        if let Some((pk, pv)) = prev {
            if pv == 0.0 || pv * val < 0.0 {
                if let Ok((k_root, amp)) = refine_root(g, from, to, t, &f, pk, k) {
                    if best.map(|(a, _)| amp > a).unwrap_or(true) {
                        best = Some((amp, k_root));
                    }
                }
            }
        }
        prev = Some((k, val));
    }
    let (amplitude, k_star) = best.ok_or(ScatterError::NoStationaryPoint { sum })?;
    Ok((Momentum::new(k_star)?, amplitude))
}

fn refine_root(
    g: &GraphTopology,
    from: &str,
    to: &str,
    t: f64,
    f: &dyn Fn(f64) -> Result<f64, ScatterError>,
    mut a: f64,
    mut b: f64,
) -> Result<(f64, f64), ScatterError> {
    let mut fa = f(a)?;
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if (b - a).abs() < 1e-13 {
            break;
        }
        let fm = f(mid)?;
        if fa * fm <= 0.0 {
            b = mid;
        } else {
            a = mid;
            fa = fm;
        }
    }
    let k_star = 0.5 * (a + b);
    let t_amp = transmission_entry(g, from, to, k_star)?;
    let c = curvature(g, from, to, k_star, t, CURVATURE_STEP)?;
    let amplitude = t_amp.norm() / (2.0 * std::f64::consts::PI * c.abs()).sqrt();
    Ok((k_star, amplitude))
}
