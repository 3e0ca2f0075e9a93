//! Switch-control waveforms and their Fourier series.
//!
//! The four control signals `L1`, `R1`, `L2`, `R2` are 50 % duty square waves of
//! period `4δ`, each shifted by a further quarter period. The transmission
//! waveforms `T1`/`T2` (delay deviation) and `T3` (finite switch time) have
//! period `2δ` and describe the fraction of the carrier that ends up at the
//! through and isolated ports.
//!
//! Every waveform is evaluated as a literal sum of Heaviside steps with
//! `H(0) = 1`, over the handful of periods whose edges bracket `t`.
//!
//! # Phase reference of the closed forms
//!
//! [`fourier_coefficient`] returns the exact coefficient of the waveform that
//! [`control_value`] produces, so it agrees with a DFT of
//! [`sample_waveform`]. The magnitudes are the familiar `½·sinc(n/2)` and
//! `(1−r)·sinc(n(1−r))` forms; the phase is that of a pulse centred in its
//! on-window (for example `a₁ = −j/π`, `a₃ = −j/3π`).
//!
//! # `T3` normalisation
//!
//! `T3` is the end-to-end transmission window of a through path: both delay
//! lines together, each gated on for half the modulation period and each losing
//! `t_s` at the start of its window. Its DC value is `1 − t_s/2δ`. A *single*
//! line's gating waveform (period `4δ`) has exactly half of every even harmonic
//! of `T3`, so its DC term is `(1 − t_s/2δ)/2`. [`SeriesKind::T3C`] follows the
//! combined (two-line) convention. Extra insertion loss and tone ratios are the
//! same in either convention; see the `t3_convention` tests for the sampled
//! evidence.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default number of harmonics kept when building a [`FourierSeries`].
pub const DEFAULT_HARMONICS: usize = 200;

/// Minimum samples per `4δ` accepted by [`sample_waveform`].
pub const MIN_SAMPLES_PER_PERIOD: f64 = 64.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WaveformKind {
    L1,
    R1,
    L2,
    R2,
    /// Through-port transmission window under delay deviation.
    T1,
    /// Isolated-port leakage window under delay deviation (complement of `T1`).
    T2,
    /// Through-port transmission window under finite switch time.
    T3,
}

impl WaveformKind {
    pub fn is_control(self) -> bool {
        matches!(self, Self::L1 | Self::R1 | Self::L2 | Self::R2)
    }

    /// Offset of the on-window of a control waveform, in quarter periods.
    fn ladder_offset(self) -> f64 {
        match self {
            Self::L1 => 0.0,
            Self::R1 => 0.25,
            Self::L2 => 0.5,
            Self::R2 => 0.75,
            _ => unreachable!("transmission waveforms have no ladder offset"),
        }
    }
}

/// One periodic gating signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlWaveform {
    pub kind: WaveformKind,
    /// Quarter of the control period, seconds.
    pub delta: f64,
    /// Δδ in seconds; only `T1`/`T2` read it, and only its magnitude matters.
    pub delay_deviation: f64,
    /// Switch time `t_s` in seconds; only `T3` reads it.
    pub switch_time: f64,
    pub amplitude: f64,
}

impl ControlWaveform {
    /// A control waveform (`L1`..`R2`) or an ideal transmission window.
    pub fn new(kind: WaveformKind, delta: f64) -> Self {
        Self { kind, delta, delay_deviation: 0.0, switch_time: 0.0, amplitude: 1.0 }
    }

    pub fn with_delay_deviation(mut self, delay_deviation: f64) -> Self {
        self.delay_deviation = delay_deviation;
        self
    }

    pub fn with_switch_time(mut self, switch_time: f64) -> Self {
        self.switch_time = switch_time;
        self
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }

    pub fn period(&self) -> f64 {
        if self.kind.is_control() {
            4.0 * self.delta
        } else {
            2.0 * self.delta
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return Err(Error::invalid("delta", format!("must be finite and > 0, got {}", self.delta)));
        }
        if !self.amplitude.is_finite() {
            return Err(Error::invalid("amplitude", "must be finite"));
        }
        if !(self.delay_deviation.is_finite() && self.delay_deviation.abs() < 2.0 * self.delta) {
            return Err(Error::invalid(
                "delay_deviation",
                format!("|Δδ| must be < 2δ, got {} with δ = {}", self.delay_deviation, self.delta),
            ));
        }
        if !(self.switch_time.is_finite() && self.switch_time >= 0.0 && self.switch_time < 2.0 * self.delta) {
            return Err(Error::invalid(
                "switch_time",
                format!("t_s must lie in [0, 2δ), got {} with δ = {}", self.switch_time, self.delta),
            ));
        }
        Ok(())
    }

    /// Normalised deviation `|Δδ|/2δ`.
    pub fn dd_ratio(&self) -> f64 {
        self.delay_deviation.abs() / (2.0 * self.delta)
    }

    /// Normalised switch time `t_s/2δ`.
    pub fn ts_ratio(&self) -> f64 {
        self.switch_time / (2.0 * self.delta)
    }
}

#[inline]
fn heaviside(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Evaluate a waveform at time `t` (seconds).
pub fn control_value(w: &ControlWaveform, t: f64) -> Result<f64> {
    w.validate()?;
    if !t.is_finite() {
        return Err(Error::invalid("t", "must be finite"));
    }
    Ok(w.amplitude * unit_value(w, t))
}

/// [`control_value`] without validation or amplitude scaling.
fn unit_value(w: &ControlWaveform, t: f64) -> f64 {
    let mut acc = 0.0;
    if w.kind.is_control() {
        let u = t / (4.0 * w.delta);
        let off = w.kind.ladder_offset();
        let base = u.floor() as i64;
        for n in (base - 2)..=(base + 2) {
            let n = n as f64;
            acc += heaviside(u - n - off) - heaviside(u - n - off - 0.5);
        }
    } else {
        let v = t / (2.0 * w.delta);
        let base = v.floor() as i64;
        for n in (base - 2)..=(base + 2) {
            let n = n as f64;
            acc += match w.kind {
                WaveformKind::T1 => heaviside(v - w.dd_ratio() - n) - heaviside(v - n - 1.0),
                WaveformKind::T2 => heaviside(v - n) - heaviside(v - w.dd_ratio() - n),
                WaveformKind::T3 => heaviside(v - w.ts_ratio() - n) - heaviside(v - n - 1.0),
                _ => unreachable!(),
            };
        }
    }
    acc
}

/// Normalised sinc, `sin(πx)/(πx)`.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = PI * x;
        px.sin() / px
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SeriesKind {
    /// 50 % square wave `L1`; fundamental `f_m`.
    A,
    /// Through-port window `T1`; fundamental `2 f_m`.
    T1C,
    /// Isolated-port window `T2`; fundamental `2 f_m`.
    T2C,
    /// Switch-time window `T3` (two-line convention); fundamental `2 f_m`.
    T3C,
}

impl SeriesKind {
    pub fn waveform(self) -> WaveformKind {
        match self {
            Self::A => WaveformKind::L1,
            Self::T1C => WaveformKind::T1,
            Self::T2C => WaveformKind::T2,
            Self::T3C => WaveformKind::T3,
        }
    }
}

/// Coefficient of a pulse train with on-window `[start, start + width)`,
/// both expressed as fractions of the period.
fn pulse_coefficient(n: i64, start: f64, width: f64) -> Complex64 {
    if width == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let n = n as f64;
    let centre = start + 0.5 * width;
    Complex64::from_polar(width * sinc(n * width), -2.0 * PI * n * centre)
}

/// Closed-form Fourier coefficient `n` of the waveform family `kind`.
///
/// `delay_deviation` is read by `T1C`/`T2C`, `switch_time` by `T3C`; both are
/// ignored for `A`.
pub fn fourier_coefficient(
    kind: SeriesKind,
    n: i64,
    delta: f64,
    delay_deviation: f64,
    switch_time: f64,
) -> Result<Complex64> {
    let w = ControlWaveform::new(kind.waveform(), delta)
        .with_delay_deviation(delay_deviation)
        .with_switch_time(switch_time);
    w.validate()?;
    Ok(coefficient_unchecked(kind, n, w.dd_ratio(), w.ts_ratio()))
}

fn coefficient_unchecked(kind: SeriesKind, n: i64, dd_ratio: f64, ts_ratio: f64) -> Complex64 {
    match kind {
        SeriesKind::A => {
            if n == 0 {
                Complex64::new(0.5, 0.0)
            } else if n % 2 == 0 {
                Complex64::new(0.0, 0.0)
            } else {
                pulse_coefficient(n, 0.0, 0.5)
            }
        }
        SeriesKind::T1C => pulse_coefficient(n, dd_ratio, 1.0 - dd_ratio),
        SeriesKind::T2C => pulse_coefficient(n, 0.0, dd_ratio),
        SeriesKind::T3C => pulse_coefficient(n, ts_ratio, 1.0 - ts_ratio),
    }
}

/// `|a_n|²` of the 50 % square wave, without building a series.
pub fn square_wave_power(n: i64) -> f64 {
    if n == 0 {
        0.25
    } else if n % 2 == 0 {
        0.0
    } else {
        1.0 / (PI * PI * (n as f64) * (n as f64))
    }
}

/// `1 − Σ_{|n|≤N} 2|a_n|²` for the square wave.
pub fn parseval_residual(n_max: usize) -> f64 {
    let mut sum = 2.0 * square_wave_power(0);
    let mut n = 1i64;
    while n <= n_max as i64 {
        sum += 4.0 * square_wave_power(n);
        n += 2;
    }
    1.0 - sum
}

/// Truncated Fourier series of one waveform family.
#[derive(Debug, Clone)]
pub struct FourierSeries {
    pub kind: SeriesKind,
    pub fundamental: f64,
    pub n_max: usize,
    pub coefficients: BTreeMap<i64, Complex64>,
}

impl FourierSeries {
    pub fn new(kind: SeriesKind, delta: f64, delay_deviation: f64, switch_time: f64, n_max: usize) -> Result<Self> {
        let w = ControlWaveform::new(kind.waveform(), delta)
            .with_delay_deviation(delay_deviation)
            .with_switch_time(switch_time);
        w.validate()?;
        let n = n_max as i64;
        let coefficients = (-n..=n)
            .map(|k| (k, coefficient_unchecked(kind, k, w.dd_ratio(), w.ts_ratio())))
            .collect();
        Ok(Self { kind, fundamental: 1.0 / w.period(), n_max, coefficients })
    }

    pub fn coefficient(&self, n: i64) -> Option<Complex64> {
        self.coefficients.get(&n).copied()
    }

    /// `Σ |c_n|²` over the retained harmonics (mean-square of the waveform).
    pub fn power(&self) -> f64 {
        self.coefficients.values().map(|c| c.norm_sqr()).sum()
    }

    /// Evaluate the truncated series at `t`.
    pub fn reconstruct(&self, t: f64) -> f64 {
        let w0 = 2.0 * PI * self.fundamental * t;
        self.coefficients
            .iter()
            .map(|(&n, c)| (c * Complex64::from_polar(1.0, w0 * n as f64)).re)
            .sum()
    }
}

/// Sample a waveform at the midpoints `t_k = (k + ½)/sample_rate`.
///
/// `duration` must be an integer number of waveform periods and the rate must
/// give at least [`MIN_SAMPLES_PER_PERIOD`] samples per `4δ`.
pub fn sample_waveform(w: &ControlWaveform, sample_rate: f64, duration: f64) -> Result<Vec<f64>> {
    w.validate()?;
    if !(sample_rate.is_finite() && sample_rate > 0.0) {
        return Err(Error::invalid("sample_rate", "must be finite and > 0"));
    }
    if sample_rate * 4.0 * w.delta < MIN_SAMPLES_PER_PERIOD {
        return Err(Error::invalid(
            "sample_rate",
            format!("needs at least {MIN_SAMPLES_PER_PERIOD} samples per 4δ"),
        ));
    }
    let periods = duration / w.period();
    if !(duration > 0.0) || (periods - periods.round()).abs() > 1e-9 * periods.max(1.0) {
        return Err(Error::invalid(
            "duration",
            format!("must be a positive integer number of periods ({} s), got {duration} s", w.period()),
        ));
    }
    let n = (duration * sample_rate).round() as usize;
    Ok((0..n).map(|k| w.amplitude * unit_value(w, (k as f64 + 0.5) / sample_rate)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn l1_is_on_at_origin() {
        let w = ControlWaveform::new(WaveformKind::L1, 1.0);
        assert_eq!(control_value(&w, 0.0).unwrap(), 1.0);
        assert_eq!(control_value(&w, 2.0).unwrap(), 0.0);
        assert_eq!(control_value(&w, 4.0).unwrap(), 1.0);
    }

    #[test]
    fn r1_steps_at_delta() {
        let w = ControlWaveform::new(WaveformKind::R1, 1.0);
        assert_eq!(control_value(&w, 0.5).unwrap(), 0.0);
        assert_eq!(control_value(&w, 1.5).unwrap(), 1.0);
        assert_eq!(control_value(&w, 3.0).unwrap(), 0.0);
    }

    #[test]
    fn four_delta_periodicity() {
        let w = ControlWaveform::new(WaveformKind::L1, 1.0);
        for i in 0..400 {
            let x = -7.3 + 0.0371 * i as f64;
            assert_eq!(control_value(&w, x).unwrap(), control_value(&w, x + 4.0).unwrap(), "x = {x}");
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let w = ControlWaveform::new(WaveformKind::L1, 1.0);
        assert!(control_value(&w, f64::NAN).is_err());
        assert!(control_value(&ControlWaveform::new(WaveformKind::L1, 0.0), 0.0).is_err());
        assert!(control_value(&ControlWaveform::new(WaveformKind::L1, -1.0), 0.0).is_err());
        let t1 = ControlWaveform::new(WaveformKind::T1, 1.0).with_delay_deviation(2.0);
        assert!(control_value(&t1, 0.0).is_err());
        let t3 = ControlWaveform::new(WaveformKind::T3, 1.0).with_switch_time(-0.1);
        assert!(control_value(&t3, 0.0).is_err());
    }

    #[test]
    fn square_wave_coefficients() {
        let a0 = fourier_coefficient(SeriesKind::A, 0, 1.0, 0.0, 0.0).unwrap();
        assert_abs_diff_eq!(a0.re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(a0.im, 0.0, epsilon = 1e-15);
        let a1 = fourier_coefficient(SeriesKind::A, 1, 1.0, 0.0, 0.0).unwrap();
        assert_abs_diff_eq!(a1.re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(a1.im, -1.0 / PI, epsilon = 1e-15);
        let a2 = fourier_coefficient(SeriesKind::A, 2, 1.0, 0.0, 0.0).unwrap();
        assert_eq!(a2.norm(), 0.0);
        // magnitudes follow ½·sinc(n/2)
        for n in -15..=15i64 {
            let c = fourier_coefficient(SeriesKind::A, n, 1.0, 0.0, 0.0).unwrap();
            assert_abs_diff_eq!(c.norm(), 0.5 * sinc(n as f64 / 2.0).abs(), epsilon = 1e-15);
        }
    }

    #[test]
    fn transmission_dc_terms() {
        let t1 = fourier_coefficient(SeriesKind::T1C, 0, 1.0, 0.0, 0.0).unwrap();
        let t2 = fourier_coefficient(SeriesKind::T2C, 0, 1.0, 0.0, 0.0).unwrap();
        assert_abs_diff_eq!(t1.re, 1.0, epsilon = 1e-15);
        assert_eq!(t2.norm(), 0.0);
        // |Δδ|/2δ = 0.1
        let t1 = fourier_coefficient(SeriesKind::T1C, 0, 1.0, -0.2, 0.0).unwrap();
        assert_abs_diff_eq!(t1.re, 0.9, epsilon = 1e-15);
        let t3 = fourier_coefficient(SeriesKind::T3C, 0, 1.0, 0.0, 0.2).unwrap();
        assert_abs_diff_eq!(t3.re, 0.9, epsilon = 1e-15);
    }

    #[test]
    fn sample_mean_matches_duty() {
        let l1 = ControlWaveform::new(WaveformKind::L1, 1e-6);
        let s = sample_waveform(&l1, 64e6, 4e-6).unwrap();
        assert_abs_diff_eq!(s.iter().sum::<f64>() / s.len() as f64, 0.5, epsilon = 1e-12);

        let t1 = ControlWaveform::new(WaveformKind::T1, 1e-6).with_delay_deviation(-0.5e-6);
        let s = sample_waveform(&t1, 400e6, 2e-6).unwrap();
        assert_abs_diff_eq!(s.iter().sum::<f64>() / s.len() as f64, 0.75, epsilon = 1e-12);
    }

    #[test]
    fn sample_rejects_partial_periods_and_coarse_rates() {
        let l1 = ControlWaveform::new(WaveformKind::L1, 1e-6);
        assert!(sample_waveform(&l1, 64e6, 5e-6).is_err());
        assert!(sample_waveform(&l1, 1e6, 4e-6).is_err());
    }

    #[test]
    fn parseval_residual_at_one_thousand() {
        let r = parseval_residual(1000);
        assert!(r > 0.0 && r <= 1e-3, "{r}");
    }

    #[test]
    fn series_reconstructs_square_wave_away_from_edges() {
        let s = FourierSeries::new(SeriesKind::A, 1.0, 0.0, 0.0, 2001).unwrap();
        assert_abs_diff_eq!(s.reconstruct(1.0), 1.0, epsilon = 1e-3);
        assert_abs_diff_eq!(s.reconstruct(3.0), 0.0, epsilon = 1e-3);
        assert_abs_diff_eq!(s.fundamental, 0.25);
        let t = FourierSeries::new(SeriesKind::T1C, 1.0, 0.2, 0.0, 10).unwrap();
        assert_abs_diff_eq!(t.fundamental, 0.5);
        assert_eq!(t.coefficients.len(), 21);
    }
}
