use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Sampling and accuracy parameters shared by every stage.
///
/// `l` is the sampling rate: images live on the Cartesian grid `k/l`,
/// `k ∈ {-l..l}²`, and the bandlimit `c` may not exceed the Nyquist
/// limit `π·l`. `t` selects basis functions by their concentration
/// ratio, `theta_q` is the quadrature accuracy target, and
/// `eps_nystrom` bounds the admissible radial-eigenproblem residual.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BandParams {
    pub l: u32,
    pub c: f64,
    pub t: f64,
    pub eps_nystrom: f64,
    pub theta_q: f64,
}

impl BandParams {
    /// Standard configuration: bandlimit at the Nyquist limit `c = πL`.
    pub fn new(l: u32, c: f64, t: f64) -> Result<Self> {
        let p = BandParams {
            l,
            c,
            t,
            eps_nystrom: 1e-14,
            theta_q: 1e-15,
        };
        p.validate()?;
        Ok(p)
    }

    /// Bandlimit expressed as a fraction of Nyquist: `c = ratio·πL`.
    pub fn with_ratio(l: u32, ratio: f64, t: f64) -> Result<Self> {
        if !(ratio > 0.0 && ratio <= 1.0) {
            return Err(Error::Params(format!(
                "bandlimit ratio must lie in (0, 1], got {ratio}"
            )));
        }
        Self::new(l, ratio * std::f64::consts::PI * l as f64, t)
    }

    pub fn validate(&self) -> Result<()> {
        let nyquist = std::f64::consts::PI * self.l as f64;
        if self.l == 0 {
            return Err(Error::Params("sampling rate L must be positive".into()));
        }
        if !(self.c > 0.0 && self.c <= nyquist * (1.0 + 1e-12)) {
            return Err(Error::Params(format!(
                "bandlimit must lie in (0, πL] = (0, {nyquist:.4}], got {}",
                self.c
            )));
        }
        if !(self.t > 0.0) {
            return Err(Error::Params(format!(
                "truncation parameter must be positive, got {}",
                self.t
            )));
        }
        for (name, v) in [("eps_nystrom", self.eps_nystrom), ("theta_q", self.theta_q)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Params(format!("{name} must lie in (0, 1), got {v}")));
            }
        }
        Ok(())
    }

    /// Truncation threshold on `|λ|` equivalent to the concentration-ratio
    /// rule `|λ|/√(1-|λ|²) > T`.
    pub fn lambda_threshold(&self) -> f64 {
        self.t / (1.0 + self.t * self.t).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_band() {
        assert!(BandParams::new(16, 0.0, 1.0).is_err());
        assert!(BandParams::new(16, 16.1 * std::f64::consts::PI, 1.0).is_err());
        assert!(BandParams::new(0, 1.0, 1.0).is_err());
        assert!(BandParams::new(16, 1.0, -1.0).is_err());
        assert!(BandParams::with_ratio(16, 1.5, 1.0).is_err());
    }

    #[test]
    fn nyquist_is_admissible() {
        let p = BandParams::with_ratio(16, 1.0, 1.0).unwrap();
        assert!((p.c - 16.0 * std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn lambda_threshold_inverts_ratio_rule() {
        // |λ|/√(1-|λ|²) = T at the threshold, asserted in the
        // cancellation-free form λ²·(1+T²) = T².
        for t in [0.5, 1.0, 10.0, 1e4] {
            let p = BandParams::new(8, 1.0, t).unwrap();
            let lam = p.lambda_threshold();
            assert!((lam * lam * (1.0 + t * t) - t * t).abs() / (t * t) < 1e-12);
            assert!(lam < 1.0);
        }
    }
}
