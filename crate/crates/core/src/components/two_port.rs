use std::f64::consts::PI;

use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// 2×2 scattering matrix, `[[S11, S12], [S21, S22]]`.
pub type SMatrix2 = Matrix2<Complex64>;

const DEGENERATE: f64 = 1e-12;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// A matched through connection.
pub fn identity_two_port() -> SMatrix2 {
    Matrix2::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0))
}

/// Swap the two ports of a network.
pub fn flip(s: &SMatrix2) -> SMatrix2 {
    Matrix2::new(s[(1, 1)], s[(1, 0)], s[(0, 1)], s[(0, 0)])
}

/// Connect port 2 of `a` to port 1 of `b`.
///
/// Evaluated as the scattering star product, which is algebraically the
/// T-parameter product but stays defined when a transmission coefficient is
/// zero (stop-band of an ideal filter).
pub fn cascade(a: &SMatrix2, b: &SMatrix2) -> Result<SMatrix2> {
    let loop_gain = c(1.0, 0.0) - a[(1, 1)] * b[(0, 0)];
    if loop_gain.norm() < DEGENERATE {
        return Err(Error::Degenerate("cascade has a lossless resonant loop (1 - S22a·S11b = 0)".into()));
    }
    let inv = loop_gain.inv();
    let s11 = a[(0, 0)] + a[(0, 1)] * b[(0, 0)] * a[(1, 0)] * inv;
    let s12 = a[(0, 1)] * b[(0, 1)] * inv;
    let s21 = b[(1, 0)] * a[(1, 0)] * inv;
    let s22 = b[(1, 1)] + b[(1, 0)] * a[(1, 1)] * b[(0, 1)] * inv;
    Ok(Matrix2::new(s11, s12, s21, s22))
}

/// Largest singular value of `s`.
pub fn max_singular_value(s: &SMatrix2) -> f64 {
    // σ_max² is the largest eigenvalue of the Hermitian SᴴS.
    let h = s.adjoint() * s;
    let a = h[(0, 0)].re;
    let d = h[(1, 1)].re;
    let b = h[(0, 1)].norm_sqr();
    let mean = 0.5 * (a + d);
    let disc = (0.25 * (a - d) * (a - d) + b).sqrt();
    (mean + disc).max(0.0).sqrt()
}

pub fn is_passive(s: &SMatrix2, tol: f64) -> bool {
    max_singular_value(s) <= 1.0 + tol
}

/// Convert an ABCD matrix to S-parameters referenced to `z0`.
pub fn abcd_to_s(abcd: &Matrix2<Complex64>, z0: f64) -> Result<SMatrix2> {
    let (a, b, cc, d) = (abcd[(0, 0)], abcd[(0, 1)], abcd[(1, 0)], abcd[(1, 1)]);
    let denom = a + b / z0 + cc * z0 + d;
    if denom.norm() < DEGENERATE {
        return Err(Error::Degenerate("ABCD to S conversion is singular".into()));
    }
    let s11 = (a + b / z0 - cc * z0 - d) / denom;
    let s12 = (a * d - b * cc) * 2.0 / denom;
    let s21 = c(2.0, 0.0) / denom;
    let s22 = (-a + b / z0 - cc * z0 + d) / denom;
    Ok(Matrix2::new(s11, s12, s21, s22))
}

/// L-section matching network: series inductor, then shunt capacitor toward
/// the device.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchingNetwork {
    pub l_m: f64,
    pub c_m: f64,
}

impl MatchingNetwork {
    pub fn new(l_m: f64, c_m: f64) -> Result<Self> {
        let mn = Self { l_m, c_m };
        mn.validate()?;
        Ok(mn)
    }

    /// 280 nH / 2.73 pF.
    pub fn reference() -> Self {
        Self { l_m: 280e-9, c_m: 2.73e-12 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.l_m.is_finite() && self.l_m > 0.0) {
            return Err(Error::invalid("l_m", "must be > 0"));
        }
        if !(self.c_m.is_finite() && self.c_m > 0.0) {
            return Err(Error::invalid("c_m", "must be > 0"));
        }
        Ok(())
    }

    pub fn resonance(&self) -> f64 {
        1.0 / (2.0 * PI * (self.l_m * self.c_m).sqrt())
    }
}

/// S-parameters of the matching section at `f`, port 1 on the inductor side.
pub fn match_two_port(mn: &MatchingNetwork, f: f64, z0: f64) -> Result<SMatrix2> {
    mn.validate()?;
    if !(f.is_finite() && f >= 0.0) {
        return Err(Error::invalid("f", "must be finite and >= 0"));
    }
    if !(z0.is_finite() && z0 > 0.0) {
        return Err(Error::invalid("z0", "must be > 0"));
    }
    let w = 2.0 * PI * f;
    let series = Matrix2::new(c(1.0, 0.0), c(0.0, w * mn.l_m), c(0.0, 0.0), c(1.0, 0.0));
    let shunt = Matrix2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, w * mn.c_m), c(1.0, 0.0));
    abcd_to_s(&(series * shunt), z0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn dc_is_transparent() {
        let s = match_two_port(&MatchingNetwork::reference(), 0.0, 50.0).unwrap();
        assert_abs_diff_eq!(s[(1, 0)].re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s[(0, 0)].norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn reference_resonance() {
        assert_abs_diff_eq!(MatchingNetwork::reference().resonance(), 182.0e6, epsilon = 0.1e6);
    }

    #[test]
    fn identity_is_neutral() {
        let x = match_two_port(&MatchingNetwork::reference(), 155e6, 50.0).unwrap();
        let id = identity_two_port();
        let left = cascade(&id, &x).unwrap();
        let right = cascade(&x, &id).unwrap();
        for k in 0..4 {
            assert_abs_diff_eq!((left[k] - x[k]).norm(), 0.0, epsilon = 1e-15);
            assert_abs_diff_eq!((right[k] - x[k]).norm(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn lossless_section_is_unitary_and_reciprocal() {
        let s = match_two_port(&MatchingNetwork::reference(), 150e6, 50.0).unwrap();
        assert_abs_diff_eq!(max_singular_value(&s), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!((s[(0, 1)] - s[(1, 0)]).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(MatchingNetwork::new(0.0, 1e-12).is_err());
        assert!(match_two_port(&MatchingNetwork::reference(), 1e6, 0.0).is_err());
        let mirror = Matrix2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0));
        assert!(cascade(&mirror, &mirror).is_err());
    }
}
