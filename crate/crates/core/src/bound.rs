//! Bound states of graphs with leads: normalizable eigenstates decaying as
//! (+-e^{-kappa})^x down each lead, at energies +-2 cosh kappa outside the
//! scattering band.
//!
//! Eliminating the lead unknowns (the amplitude ratio per lead step is
//! +-e^{-kappa}) leaves the real system
//!
//!   M(kappa) psi = (A + s e^{-kappa} P - 2 s cosh(kappa)) psi = 0,  s = +-1,
//!
//! so bound states are roots of det M(kappa). The determinant is scanned on
//! a grid, sign changes are refined by bisection, and each root's null
//! vector is recovered by inverse iteration.

use crate::graph::GraphTopology;
use crate::linalg::{real_det_sign_log, real_solve};
use crate::C64;

/// Grid step of the kappa scan.
pub const SCAN_STEP: f64 = 1e-4;
/// Lower end of the scan; below this the state is indistinguishable from a
/// band-edge scattering state.
pub const SCAN_START: f64 = 1e-8;
/// Margin added above the cosh^{-1}(d/2) spectral bound.
pub const SCAN_MARGIN: f64 = 0.1;
/// Bisection stops when the bracket is narrower than this.
pub const ROOT_TOL: f64 = 1e-12;
/// Residual threshold for accepting a root's null vector.
pub const RESIDUAL_LIMIT: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnergySign {
    Positive,
    Negative,
}

impl EnergySign {
    pub fn factor(self) -> f64 {
        match self {
            EnergySign::Positive => 1.0,
            EnergySign::Negative => -1.0,
        }
    }
}

/// A normalized bound state.
#[derive(Clone, Debug)]
pub struct BoundState {
    pub kappa: f64,
    pub sign: EnergySign,
    /// +-2 cosh kappa.
    pub energy: f64,
    /// Amplitude at lead position x on lead j is `lead_amplitudes[j]`
    /// times (+-e^{-kappa})^x, with x = 0 at the terminal vertex.
    pub lead_amplitudes: Vec<(String, C64)>,
    /// Amplitude at every graph vertex.
    pub interior: Vec<C64>,
    /// ||M(kappa) psi|| of the normalized state.
    pub residual: f64,
}

fn boundary_matrix(g: &GraphTopology, kappa: f64, sign: f64) -> Vec<f64> {
    let n = g.vertex_count();
    let mut m = vec![0.0f64; n * n];
    for (u, v) in g.edges() {
        m[u * n + v] = 1.0;
        m[v * n + u] = 1.0;
    }
    let ratio = sign * (-kappa).exp();
    let energy = sign * 2.0 * kappa.cosh();
    for (v, &leads) in g.lead_counts().iter().enumerate() {
        m[v * n + v] += ratio * leads as f64 - energy;
    }
    m
}

fn det_sign(g: &GraphTopology, kappa: f64, sign: f64) -> f64 {
    let n = g.vertex_count();
    let m = boundary_matrix(g, kappa, sign);
    real_det_sign_log(&m, n).0
}

fn null_vector(g: &GraphTopology, kappa: f64, sign: f64) -> Option<(Vec<f64>, f64)> {
    let n = g.vertex_count();
    let m = boundary_matrix(g, kappa, sign);
    // Inverse iteration: the solve blows up the null direction of the
    // near-singular matrix.
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.31 * i as f64).collect();
    for _ in 0..3 {
        let next = real_solve(&m, &v, n).ok()?;
        let norm = next.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return None;
        }
        v = next.iter().map(|x| x / norm).collect();
    }
    let mut residual = 0.0f64;
    for i in 0..n {
        let mut acc = 0.0;
        for j in 0..n {
            acc += m[i * n + j] * v[j];
        }
        residual += acc * acc;
    }
    Some((v, residual.sqrt()))
}

/// Scan both energy signs for bound states and return them normalized
/// (including the lead tails in the norm).
pub fn find_bound_states(g: &GraphTopology) -> Vec<BoundState> {
    let mut out = Vec::new();
    let max_degree = g.max_degree_with_leads();
    if max_degree < 2 {
        return out;
    }
    // ||H|| <= d bounds the energy: 2 cosh kappa <= d.
    let kappa_max = ((max_degree as f64) / 2.0).acosh() + SCAN_MARGIN;
    for sign in [EnergySign::Positive, EnergySign::Negative] {
        let s = sign.factor();
        let steps = ((kappa_max - SCAN_START) / SCAN_STEP).ceil() as usize;
        let mut prev_kappa = SCAN_START;
        let mut prev_sign = det_sign(g, prev_kappa, s);
        for i in 1..=steps {
            let kappa = SCAN_START + SCAN_STEP * i as f64;
            let cur_sign = det_sign(g, kappa, s);
            if prev_sign != 0.0 && cur_sign != 0.0 && prev_sign != cur_sign {
                if let Some(root) = bisect_root(g, s, prev_kappa, kappa) {
                    if let Some(state) = build_state(g, root, sign) {
                        out.push(state);
                    }
                }
            }
            prev_kappa = kappa;
            prev_sign = cur_sign;
        }
    }
    out.sort_by(|a, b| {
        a.kappa
            .partial_cmp(&b.kappa)
            .unwrap()
            .then_with(|| a.energy.partial_cmp(&b.energy).unwrap())
    });
    out
}

fn bisect_root(g: &GraphTopology, s: f64, mut lo: f64, mut hi: f64) -> Option<f64> {
    let mut f_lo = det_sign(g, lo, s);
    for _ in 0..200 {
        if hi - lo < ROOT_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let f_mid = det_sign(g, mid, s);
        if f_mid == 0.0 {
            return Some(mid);
        }
        if f_mid == f_lo {
            lo = mid;
        } else {
            hi = mid;
        }
        f_lo = det_sign(g, lo, s);
    }
    Some(0.5 * (lo + hi))
}

fn build_state(g: &GraphTopology, kappa: f64, sign: EnergySign) -> Option<BoundState> {
    let s = sign.factor();
    let (raw, residual) = null_vector(g, kappa, s)?;
    if residual > RESIDUAL_LIMIT {
        return None;
    }
    // Norm including the lead tails: each lead contributes
    // |psi(v_j)|^2 sum_{x>=1} e^{-2 kappa x}.
    let tail = (-2.0 * kappa).exp() / (1.0 - (-2.0 * kappa).exp());
    let mut norm_sq: f64 = raw.iter().map(|x| x * x).sum();
    for t in g.terminals() {
        norm_sq += raw[t.vertex] * raw[t.vertex] * tail;
    }
    let scale = norm_sq.sqrt();
    // Deterministic overall sign: largest-magnitude component positive.
    let flip = raw
        .iter()
        .cloned()
        .max_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap())
        .map(|v| if v < 0.0 { -1.0 } else { 1.0 })
        .unwrap_or(1.0);
    let interior: Vec<C64> = raw
        .iter()
        .map(|&x| C64::new(flip * x / scale, 0.0))
        .collect();
    let lead_amplitudes = g
        .terminals()
        .iter()
        .map(|t| (t.name.clone(), interior[t.vertex]))
        .collect();
    Some(BoundState {
        kappa,
        sign,
        energy: s * 2.0 * kappa.cosh(),
        lead_amplitudes,
        interior,
        residual,
    })
}
