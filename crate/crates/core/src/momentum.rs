//! Momentum values for lead plane waves.

use thiserror::Error;

/// Guard on |sin k|; closer to the band edges the lead solutions degenerate.
pub const BAND_GUARD: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum MomentumError {
    #[error("momentum {0} outside the open band (-pi, 0)")]
    OutOfBand(f64),
    #[error("momentum {0} too close to a band edge (|sin k| <= {BAND_GUARD:e})")]
    BandEdge(f64),
}

/// A momentum in the open interval (-pi, 0), away from the band edges.
///
/// Incoming waves carry negative momentum; the walk energy is 2 cos k.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Momentum(f64);

impl Momentum {
    pub fn new(k: f64) -> Result<Self, MomentumError> {
        if !(-std::f64::consts::PI..0.0).contains(&k) || k == -std::f64::consts::PI {
            return Err(MomentumError::OutOfBand(k));
        }
        if k.sin().abs() <= BAND_GUARD {
            return Err(MomentumError::BandEdge(k));
        }
        Ok(Momentum(k))
    }

    pub fn get(self) -> f64 {
        self.0
    }

    /// Walk energy 2 cos k.
    pub fn energy(self) -> f64 {
        2.0 * self.0.cos()
    }
}

impl std::fmt::Display for Momentum {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn accepts_band_interior() {
        assert!(Momentum::new(-PI / 4.0).is_ok());
        assert!(Momentum::new(-PI / 2.0).is_ok());
        assert!(Momentum::new(-3.0 * PI / 4.0).is_ok());
    }

    #[test]
    fn rejects_out_of_band_and_edges() {
        assert!(Momentum::new(0.5).is_err());
        assert!(Momentum::new(0.0).is_err());
        assert!(Momentum::new(-PI).is_err());
        assert!(Momentum::new(-1e-9).is_err());
        assert!(Momentum::new(-PI + 1e-9).is_err());
    }
}
