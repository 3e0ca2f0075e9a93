use std::f64::consts::PI;

use nalgebra::Matrix2;
use num_complex::Complex64;
use realfft::RealFftPlanner;

use super::two_port::{cascade, flip, is_passive, match_two_port, MatchingNetwork, SMatrix2};
use crate::error::{Error, Result};

/// Default roll-off width of the ideal filters, as a fraction of the band.
pub const DEFAULT_SKIRT_FRACTION: f64 = 0.02;

/// Largest fraction of impulse-response energy allowed outside the kernel.
pub const MAX_TRUNCATION: f64 = 1e-4;

const PASSIVITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DelayLineVariant {
    IdealBandPass,
    IdealLowPass,
    Sampled,
}

/// Measured (or tabulated) two-port response.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledResponse {
    pub freqs: Vec<f64>,
    pub s: Vec<SMatrix2>,
    pub z0: f64,
}

impl SampledResponse {
    pub fn new(freqs: Vec<f64>, s: Vec<SMatrix2>, z0: f64) -> Result<Self> {
        let r = Self { freqs, s, z0 };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if self.freqs.len() != self.s.len() || self.freqs.len() < 2 {
            return Err(Error::invalid("sampled_response", "needs at least two points and one matrix per frequency"));
        }
        if self.freqs.windows(2).any(|w| !(w[1] > w[0])) || !self.freqs[0].is_finite() || self.freqs[0] < 0.0 {
            return Err(Error::invalid("sampled_response", "frequencies must be non-negative and strictly ascending"));
        }
        if !(self.z0 > 0.0) {
            return Err(Error::invalid("z0", "must be > 0"));
        }
        if let Some((i, _)) = self.s.iter().enumerate().find(|(_, s)| !is_passive(s, PASSIVITY_TOL)) {
            return Err(Error::invalid(
                "sampled_response",
                format!("not passive at {} Hz (singular value > 1)", self.freqs[i]),
            ));
        }
        Ok(())
    }

    pub fn range(&self) -> (f64, f64) {
        (self.freqs[0], *self.freqs.last().unwrap())
    }

    /// Linear interpolation of real and imaginary parts.
    pub fn interpolate(&self, f: f64) -> Result<SMatrix2> {
        let (lo, hi) = self.range();
        if !(f >= lo && f <= hi) {
            return Err(Error::OutOfRange { freq_hz: f, min_hz: lo, max_hz: hi });
        }
        let i = self.freqs.partition_point(|&x| x <= f);
        if i == 0 {
            return Ok(self.s[0]);
        }
        if i == self.freqs.len() {
            return Ok(self.s[i - 1]);
        }
        let (f0, f1) = (self.freqs[i - 1], self.freqs[i]);
        let x = (f - f0) / (f1 - f0);
        Ok(self.s[i - 1] * Complex64::new(1.0 - x, 0.0) + self.s[i] * Complex64::new(x, 0.0))
    }
}

/// Terminal behaviour of one delay line.
///
/// The ideal variants are flat (`10^(−IL/20)`) with linear phase inside
/// `[f_l, f_u]`, fall to zero over a raised-cosine skirt of width `skirt`
/// outside the band, and are matched everywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayLineModel {
    pub variant: DelayLineVariant,
    pub f_l: f64,
    pub f_u: f64,
    pub group_delay: f64,
    pub passband_il_db: f64,
    /// Roll-off width in Hz beyond each band edge (ideal variants only).
    pub skirt: f64,
    pub sampled_response: Option<SampledResponse>,
    /// Matching sections on both ends, mirrored on the output side.
    pub matching: Option<(MatchingNetwork, f64)>,
}

impl DelayLineModel {
    pub fn ideal_band_pass(f_l: f64, f_u: f64, group_delay: f64, passband_il_db: f64) -> Self {
        Self {
            variant: DelayLineVariant::IdealBandPass,
            f_l,
            f_u,
            group_delay,
            passband_il_db,
            skirt: DEFAULT_SKIRT_FRACTION * (f_u - f_l),
            sampled_response: None,
            matching: None,
        }
    }

    /// Low-pass line; `f_u = f64::INFINITY` gives a pure delay.
    pub fn ideal_low_pass(f_u: f64, group_delay: f64, passband_il_db: f64) -> Self {
        Self {
            variant: DelayLineVariant::IdealLowPass,
            f_l: 0.0,
            f_u,
            group_delay,
            passband_il_db,
            skirt: if f_u.is_finite() { DEFAULT_SKIRT_FRACTION * f_u } else { 0.0 },
            sampled_response: None,
            matching: None,
        }
    }

    /// Lossless pure delay.
    pub fn all_pass(group_delay: f64) -> Self {
        Self::ideal_low_pass(f64::INFINITY, group_delay, 0.0)
    }

    /// 4 dB / 10 MHz band-pass line centred at 155 MHz with 285 ns delay and a
    /// 5 MHz roll-off on each side.
    pub fn reference() -> Self {
        Self::ideal_band_pass(150e6, 160e6, 285e-9, 4.0).with_skirt(5e6)
    }

    /// Measured line; `f_l`/`f_u` span the table and `group_delay` is nominal.
    pub fn sampled(response: SampledResponse, group_delay: f64) -> Result<Self> {
        response.validate()?;
        let (lo, hi) = response.range();
        Ok(Self {
            variant: DelayLineVariant::Sampled,
            f_l: lo,
            f_u: hi,
            group_delay,
            passband_il_db: 0.0,
            skirt: 0.0,
            sampled_response: Some(response),
            matching: None,
        })
    }

    pub fn with_skirt(mut self, skirt: f64) -> Self {
        self.skirt = skirt;
        self
    }

    pub fn with_matching(mut self, network: MatchingNetwork, z0: f64) -> Self {
        self.matching = Some((network, z0));
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.group_delay.is_finite() && self.group_delay >= 0.0) {
            return Err(Error::invalid("group_delay", "must be finite and >= 0"));
        }
        if !(self.skirt.is_finite() && self.skirt >= 0.0) {
            return Err(Error::invalid("skirt", "must be finite and >= 0"));
        }
        if !self.passband_il_db.is_finite() || self.passband_il_db < 0.0 {
            return Err(Error::invalid("passband_il_db", "must be finite and >= 0"));
        }
        match self.variant {
            DelayLineVariant::IdealBandPass => {
                if !(self.f_l >= 0.0 && self.f_u > self.f_l && self.f_u.is_finite()) {
                    return Err(Error::invalid("f_u", "band-pass needs 0 <= f_l < f_u < inf"));
                }
            }
            DelayLineVariant::IdealLowPass => {
                if self.f_l != 0.0 || !(self.f_u > 0.0) {
                    return Err(Error::invalid("f_u", "low-pass needs f_l = 0 < f_u"));
                }
            }
            DelayLineVariant::Sampled => match &self.sampled_response {
                Some(r) => r.validate()?,
                None => return Err(Error::invalid("sampled_response", "missing for a sampled line")),
            },
        }
        if let Some((mn, z0)) = &self.matching {
            mn.validate()?;
            if !(*z0 > 0.0) {
                return Err(Error::invalid("z0", "matching reference impedance must be > 0"));
            }
        }
        Ok(())
    }

    /// Highest frequency with non-zero transmission (infinite for a pure delay).
    pub fn highest_frequency(&self) -> f64 {
        match self.variant {
            DelayLineVariant::Sampled => self.f_u,
            _ => self.f_u + self.skirt,
        }
    }

    fn shape(&self, f: f64) -> f64 {
        let (lo, hi) = match self.variant {
            DelayLineVariant::IdealLowPass => (f64::NEG_INFINITY, self.f_u),
            _ => (self.f_l, self.f_u),
        };
        if f > lo && f < hi {
            return 1.0;
        }
        let d = if f <= lo { lo - f } else { f - hi };
        if self.skirt > 0.0 && d < self.skirt {
            0.5 * (1.0 + (PI * d / self.skirt).cos())
        } else {
            0.0
        }
    }

    fn bare_response(&self, f: f64) -> Result<SMatrix2> {
        match self.variant {
            DelayLineVariant::Sampled => self.sampled_response.as_ref().unwrap().interpolate(f),
            _ => {
                let mag = self.shape(f) * 10f64.powf(-self.passband_il_db / 20.0);
                let t = Complex64::from_polar(mag, -2.0 * PI * f * self.group_delay);
                let z = Complex64::new(0.0, 0.0);
                Ok(Matrix2::new(z, t, t, z))
            }
        }
    }

    fn with_matching_sections(&self, f: f64, line: SMatrix2) -> Result<SMatrix2> {
        match &self.matching {
            None => Ok(line),
            Some((mn, z0)) => {
                let m = match_two_port(mn, f, *z0)?;
                cascade(&cascade(&m, &line)?, &flip(&m))
            }
        }
    }

    /// Response used by the engine on its DFT grid: identical to
    /// [`frequency_response`] inside a sampled table and an absorbing (zero)
    /// two-port outside it.
    pub fn response_or_stopband(&self, f: f64) -> Result<SMatrix2> {
        let line = match self.bare_response(f) {
            Err(Error::OutOfRange { .. }) => SMatrix2::zeros(),
            other => other?,
        };
        self.with_matching_sections(f, line)
    }
}

/// Two-port S-matrix of the line at `f >= 0`.
pub fn frequency_response(dl: &DelayLineModel, f: f64) -> Result<SMatrix2> {
    dl.validate()?;
    if !(f.is_finite() && f >= 0.0) {
        return Err(Error::invalid("f", "must be finite and >= 0"));
    }
    let line = dl.bare_response(f)?;
    dl.with_matching_sections(f, line)
}

/// Real tap vectors of each S-parameter path.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpulseResponse {
    pub sample_rate: f64,
    pub s11: Vec<f64>,
    pub s21: Vec<f64>,
    pub s12: Vec<f64>,
    pub s22: Vec<f64>,
}

fn taps_from_spectrum(spectrum: &mut [Complex64], n: usize) -> Vec<f64> {
    let mut planner = RealFftPlanner::<f64>::new();
    let inverse = planner.plan_fft_inverse(n);
    spectrum[0].im = 0.0;
    if n % 2 == 0 {
        spectrum[n / 2].im = 0.0;
    }
    let mut out = inverse.make_output_vec();
    inverse.process(spectrum, &mut out).expect("spectrum length matches plan");
    let scale = 1.0 / n as f64;
    out.iter_mut().for_each(|x| *x *= scale);
    out
}

fn spectra(dl: &DelayLineModel, sample_rate: f64, n: usize) -> Result<[Vec<Complex64>; 4]> {
    let bins = n / 2 + 1;
    let mut out: [Vec<Complex64>; 4] = Default::default();
    for v in out.iter_mut() {
        v.reserve(bins);
    }
    for k in 0..bins {
        let s = dl.response_or_stopband(k as f64 * sample_rate / n as f64)?;
        out[0].push(s[(0, 0)]);
        out[1].push(s[(1, 0)]);
        out[2].push(s[(0, 1)]);
        out[3].push(s[(1, 1)]);
    }
    Ok(out)
}

/// Fraction of energy of `long` outside the circular window of length `n`
/// that starts half a kernel before `centre`.
fn outside_energy(long: &[f64], n: usize, centre: usize) -> f64 {
    let total: f64 = long.iter().map(|x| x * x).sum();
    if total == 0.0 {
        return 0.0;
    }
    let m = long.len();
    let start = (centre + m - n / 2) % m;
    let inside: f64 = (0..n).map(|i| long[(start + i) % m].powi(2)).sum();
    ((total - inside) / total).max(0.0)
}

/// Inverse-DFT kernels of every S-parameter path.
///
/// The taps are the circular impulse response over `n_taps` samples (any
/// pre-cursor of a non-causal ideal filter wraps to the end of the vector).
/// Truncation is measured against a kernel four times longer; more than
/// [`MAX_TRUNCATION`] of the energy outside the window is an error.
pub fn impulse_response(dl: &DelayLineModel, sample_rate: f64, n_taps: usize) -> Result<ImpulseResponse> {
    dl.validate()?;
    if !(sample_rate.is_finite() && sample_rate > 0.0) {
        return Err(Error::invalid("sample_rate", "must be finite and > 0"));
    }
    let top = dl.highest_frequency();
    if top.is_finite() && sample_rate <= 4.0 * dl.f_u {
        return Err(Error::invalid("sample_rate", format!("must exceed 4·f_u = {} Hz", 4.0 * dl.f_u)));
    }
    if n_taps < 2 || (n_taps as f64) / sample_rate < 4.0 * dl.group_delay {
        return Err(Error::invalid("n_taps", "kernel must span at least four group delays"));
    }
    let centre = (dl.group_delay * sample_rate).round() as usize;
    let mut short = spectra(dl, sample_rate, n_taps)?;
    let mut long = spectra(dl, sample_rate, 4 * n_taps)?;
    let mut taps: Vec<Vec<f64>> = Vec::with_capacity(4);
    for (s, l) in short.iter_mut().zip(long.iter_mut()) {
        let reference = taps_from_spectrum(l, 4 * n_taps);
        let fraction = outside_energy(&reference, n_taps, centre);
        if fraction > MAX_TRUNCATION {
            return Err(Error::Truncation { fraction, n_taps });
        }
        taps.push(taps_from_spectrum(s, n_taps));
    }
    let s22 = taps.pop().unwrap();
    let s12 = taps.pop().unwrap();
    let s21 = taps.pop().unwrap();
    let s11 = taps.pop().unwrap();
    Ok(ImpulseResponse { sample_rate, s11, s21, s12, s22 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn band_pass_in_and_out_of_band() {
        let dl = DelayLineModel::ideal_band_pass(150e6, 160e6, 285e-9, 0.0);
        let s = frequency_response(&dl, 155e6).unwrap();
        assert_abs_diff_eq!(s[(1, 0)].norm(), 1.0, epsilon = 1e-12);
        let expected = Complex64::from_polar(1.0, -2.0 * PI * 155e6 * 285e-9);
        assert_abs_diff_eq!((s[(1, 0)] - expected).norm(), 0.0, epsilon = 1e-9);
        assert_eq!(s[(0, 0)].norm(), 0.0);
        assert_eq!(frequency_response(&dl, 170e6).unwrap()[(1, 0)].norm(), 0.0);
        assert_eq!(frequency_response(&dl, 100e6).unwrap()[(1, 0)].norm(), 0.0);
        // inside the 0.2 MHz skirt the response rolls off smoothly
        let edge = frequency_response(&dl, 160.1e6).unwrap()[(1, 0)].norm();
        assert_abs_diff_eq!(edge, 0.5, epsilon = 1e-9);
    }

    #[test]
    fn ideal_lines_are_reciprocal() {
        for dl in [DelayLineModel::reference(), DelayLineModel::ideal_low_pass(30e6, 1e-6, 1.0)] {
            for f in [1e6, 20e6, 151e6, 158e6] {
                let s = frequency_response(&dl, f).unwrap();
                assert_eq!(s[(0, 1)], s[(1, 0)]);
            }
        }
    }

    #[test]
    fn passband_loss() {
        let s = frequency_response(&DelayLineModel::reference(), 155e6).unwrap();
        assert_abs_diff_eq!(s[(1, 0)].norm(), 10f64.powf(-0.2), epsilon = 1e-12);
    }

    #[test]
    fn sampled_interpolation_and_range() {
        let id = super::super::two_port::identity_two_port();
        let half = id * Complex64::new(0.5, 0.0);
        let r = SampledResponse::new(vec![1e6, 2e6], vec![id, half], 50.0).unwrap();
        let dl = DelayLineModel::sampled(r, 0.0).unwrap();
        let s = frequency_response(&dl, 1.5e6).unwrap();
        assert_abs_diff_eq!(s[(1, 0)].re, 0.75, epsilon = 1e-15);
        assert!(matches!(frequency_response(&dl, 2.5e6), Err(Error::OutOfRange { .. })));
        assert_eq!(dl.response_or_stopband(2.5e6).unwrap(), SMatrix2::zeros());
    }

    #[test]
    fn sampled_rejects_active_or_unsorted_tables() {
        let id = super::super::two_port::identity_two_port();
        let gain = id * Complex64::new(1.1, 0.0);
        assert!(SampledResponse::new(vec![1e6, 2e6], vec![id, gain], 50.0).is_err());
        assert!(SampledResponse::new(vec![2e6, 1e6], vec![id, id], 50.0).is_err());
    }

    #[test]
    fn identity_line_is_unit_impulse() {
        let dl = DelayLineModel::all_pass(0.0);
        let h = impulse_response(&dl, 1e9, 64).unwrap();
        assert_abs_diff_eq!(h.s21[0], 1.0, epsilon = 1e-12);
        assert!(h.s21[1..].iter().all(|x| x.abs() < 1e-12));
        assert!(h.s11.iter().all(|x| x.abs() < 1e-15));
    }

    #[test]
    fn pure_delay_lands_on_its_sample() {
        let dl = DelayLineModel::all_pass(37e-9);
        let h = impulse_response(&dl, 1e9, 256).unwrap();
        for (i, x) in h.s21.iter().enumerate() {
            assert_abs_diff_eq!(*x, if i == 37 { 1.0 } else { 0.0 }, epsilon = 1e-9);
        }
    }

    #[test]
    fn short_kernels_are_rejected() {
        let dl = DelayLineModel::ideal_band_pass(150e6, 160e6, 285e-9, 0.0);
        assert!(impulse_response(&dl, 1e9, 1024).is_err());
        assert!(impulse_response(&dl, 500e6, 1 << 16).is_err());
    }
}
