//! Channel-block algebra: a multi-wire widget at fixed momentum viewed as a
//! scatterer from N input channels to N output channels, and the series
//! composition of two such blocks by summing the internal reflections.

use crate::graph::{GraphTopology, TerminalKind};
use crate::linalg::CMatrix;
use crate::momentum::Momentum;
use crate::scattering::{s_matrix, ScatterError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ComposeError {
    #[error(transparent)]
    Scatter(#[from] ScatterError),
    #[error("channel lists must partition the non-drain terminals; {0}")]
    BadChannels(String),
    #[error("blocks disagree: {0}")]
    Mismatch(String),
    #[error("non-convergent composition: ||R2 Rbar1|| = {0} >= 1")]
    NonConvergent(f64),
}

/// The four channel matrices of a widget at one momentum, indexed
/// [source channel][target channel]:
/// forward transmission T, forward reflection R, backward transmission
/// Tbar, and backward reflection Rbar.
#[derive(Clone, Debug)]
pub struct ChannelBlock {
    pub k: Momentum,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub forward: CMatrix,
    pub reflect: CMatrix,
    pub backward: CMatrix,
    pub reflect_back: CMatrix,
    /// Per input channel, the probability lost to drain leads
    /// (1 - sum of |T|^2 - sum of |R|^2).
    pub loss: Vec<f64>,
}

impl ChannelBlock {
    pub fn channel_count(&self) -> usize {
        self.inputs.len()
    }

    /// Reassemble the S-matrix over (inputs, outputs) from the four blocks
    /// and report its deviation from unitarity. Zero loss makes it unitary.
    pub fn unitarity_deviation(&self) -> f64 {
        let n = self.channel_count();
        let mut s = CMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                s[(i, j)] = self.reflect[(i, j)];
                s[(i, n + j)] = self.forward[(i, j)];
                s[(n + i, j)] = self.backward[(i, j)];
                s[(n + i, n + j)] = self.reflect_back[(i, j)];
            }
        }
        s.conj_transpose()
            .mul(&s)
            .sub(&CMatrix::identity(2 * n))
            .max_abs()
    }
}

/// Extract the four channel matrices of `g` at momentum `k`. Inputs and
/// outputs must cover all non-drain terminals; drains appear only as loss.
pub fn extract_block(
    g: &GraphTopology,
    k: Momentum,
    inputs: &[&str],
    outputs: &[&str],
) -> Result<ChannelBlock, ComposeError> {
    if inputs.len() != outputs.len() {
        return Err(ComposeError::BadChannels(format!(
            "{} inputs vs {} outputs",
            inputs.len(),
            outputs.len()
        )));
    }
    let mut named: Vec<&str> = inputs.iter().chain(outputs.iter()).copied().collect();
    named.sort_unstable();
    named.dedup();
    if named.len() != inputs.len() + outputs.len() {
        return Err(ComposeError::BadChannels("duplicate channel name".into()));
    }
    let mut non_drain: Vec<&str> = g
        .terminals()
        .iter()
        .filter(|t| t.kind != TerminalKind::Drain)
        .map(|t| t.name.as_str())
        .collect();
    non_drain.sort_unstable();
    if named != non_drain {
        return Err(ComposeError::BadChannels(format!(
            "expected exactly the terminals {non_drain:?}"
        )));
    }
    let s = s_matrix(g, k)?;
    let n = inputs.len();
    let get = |from: &str, to: &str| s.entry(from, to).expect("terminal checked above");
    let mut forward = CMatrix::zeros(n, n);
    let mut reflect = CMatrix::zeros(n, n);
    let mut backward = CMatrix::zeros(n, n);
    let mut reflect_back = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            forward[(i, j)] = get(inputs[i], outputs[j]);
            reflect[(i, j)] = get(inputs[i], inputs[j]);
            backward[(i, j)] = get(outputs[i], inputs[j]);
            reflect_back[(i, j)] = get(outputs[i], outputs[j]);
        }
    }
    let loss = (0..n)
        .map(|i| {
            let mut kept = 0.0;
            for j in 0..n {
                kept += forward[(i, j)].norm_sqr() + reflect[(i, j)].norm_sqr();
            }
            (1.0 - kept).max(0.0)
        })
        .collect();
    Ok(ChannelBlock {
        k,
        inputs: inputs.iter().map(|s| s.to_string()).collect(),
        outputs: outputs.iter().map(|s| s.to_string()).collect(),
        forward,
        reflect,
        backward,
        reflect_back,
        loss,
    })
}

/// Series composition:
///   T12    = T1 (1 - R2 Rbar1)^{-1} T2
///   R12    = R1 + T1 (1 - R2 Rbar1)^{-1} R2 Tbar1
///   Tbar12 = Tbar2 (1 - Rbar1 R2)^{-1} Tbar1
///   Rbar12 = Rbar2 + Tbar2 (1 - Rbar1 R2)^{-1} Rbar1 T2
pub fn compose_blocks(b1: &ChannelBlock, b2: &ChannelBlock) -> Result<ChannelBlock, ComposeError> {
    if (b1.k.get() - b2.k.get()).abs() > 1e-12 {
        return Err(ComposeError::Mismatch(format!(
            "momenta differ: {} vs {}",
            b1.k, b2.k
        )));
    }
    let n = b1.channel_count();
    if n != b2.channel_count() {
        return Err(ComposeError::Mismatch(format!(
            "channel counts differ: {} vs {}",
            n,
            b2.channel_count()
        )));
    }
    let round_trip = b2.reflect.mul(&b1.reflect_back);
    let norm = round_trip.operator_norm();
    if norm >= 1.0 - 1e-9 {
        return Err(ComposeError::NonConvergent(norm));
    }
    let eye = CMatrix::identity(n);
    let inv_fwd = eye
        .sub(&round_trip)
        .inverse()
        .map_err(|_| ComposeError::NonConvergent(norm))?;
    let inv_bwd = eye
        .sub(&b1.reflect_back.mul(&b2.reflect))
        .inverse()
        .map_err(|_| ComposeError::NonConvergent(norm))?;
    let forward = b1.forward.mul(&inv_fwd).mul(&b2.forward);
    let reflect = b1
        .reflect
        .add(&b1.forward.mul(&inv_fwd).mul(&b2.reflect).mul(&b1.backward));
    let backward = b2.backward.mul(&inv_bwd).mul(&b1.backward);
    let reflect_back = b2.reflect_back.add(
        &b2.backward
            .mul(&inv_bwd)
            .mul(&b1.reflect_back)
            .mul(&b2.forward),
    );
    let loss = (0..n)
        .map(|i| {
            let mut kept = 0.0;
            for j in 0..n {
                kept += forward[(i, j)].norm_sqr() + reflect[(i, j)].norm_sqr();
            }
            (1.0 - kept).max(0.0)
        })
        .collect();
    Ok(ChannelBlock {
        k: b1.k,
        inputs: b1.inputs.clone(),
        outputs: b2.outputs.clone(),
        forward,
        reflect,
        backward,
        reflect_back,
        loss,
    })
}
