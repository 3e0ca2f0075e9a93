//! Closed-form performance predictions.
//!
//! All functions are pure. Infinite isolation and vanishing tones are reported
//! as the saturated sentinel [`SATURATED_DB`] (or its negative) so that every
//! value stays finite in tabular output.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::Matrix4;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::signals::{self, SeriesKind};

/// Stand-in for ±∞ dB.
pub const SATURATED_DB: f64 = 300.0;

/// Largest relative power allowed in in-band tones beyond the harmonic range.
pub const MAX_DROPPED_TAIL: f64 = 1e-6;

/// Tone enumeration cap used when bounding the dropped tail of very wide bands.
const TAIL_ENUMERATION_CAP: i64 = 10_000_000;

/// `-20 log10 |x|`, saturating at [`SATURATED_DB`].
pub fn loss_db_from_amplitude(x: f64) -> f64 {
    if x.abs() <= 10f64.powf(-SATURATED_DB / 20.0) {
        SATURATED_DB
    } else {
        // `+ 0.0` turns −0 into 0
        (-20.0 * x.abs().log10()).min(SATURATED_DB) + 0.0
    }
}

/// `20 log10 |x|`, saturating at `-SATURATED_DB`.
pub fn level_db_from_amplitude(x: f64) -> f64 {
    -loss_db_from_amplitude(x)
}

/// Carrier and modulation frequencies plus the retained harmonic range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TonePlan {
    pub f_s: f64,
    pub f_m: f64,
    /// Harmonics `|n| <= harmonics` are summed explicitly.
    pub harmonics: usize,
}

impl TonePlan {
    pub fn new(f_s: f64, f_m: f64, harmonics: usize) -> Self {
        Self { f_s, f_m, harmonics }
    }

    /// Plan tied to a delay: `f_m = 1/(4δ)`.
    pub fn for_delay(f_s: f64, delta: f64, harmonics: usize) -> Self {
        Self::new(f_s, 0.25 / delta, harmonics)
    }

    fn validate(&self) -> Result<()> {
        if !(self.f_s.is_finite() && self.f_s > 0.0) {
            return Err(Error::invalid("f_s", format!("must be > 0, got {}", self.f_s)));
        }
        if !(self.f_m.is_finite() && self.f_m > 0.0) {
            return Err(Error::invalid("f_m", format!("must be > 0, got {}", self.f_m)));
        }
        if self.harmonics < 1 {
            return Err(Error::invalid("harmonics", "must be >= 1"));
        }
        Ok(())
    }

    pub fn tone(&self, n: i64) -> f64 {
        self.f_s + n as f64 * self.f_m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PassbandShape {
    BandPass,
    LowPass,
}

/// Perfect filter: unity inside the open band, zero outside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PassbandSpec {
    pub shape: PassbandShape,
    pub f_l: f64,
    pub f_u: f64,
}

impl PassbandSpec {
    pub fn band_pass(f_l: f64, f_u: f64) -> Self {
        Self { shape: PassbandShape::BandPass, f_l, f_u }
    }

    pub fn low_pass(f_u: f64) -> Self {
        Self { shape: PassbandShape::LowPass, f_l: 0.0, f_u }
    }

    fn validate(&self) -> Result<()> {
        if self.shape == PassbandShape::LowPass && self.f_l != 0.0 {
            return Err(Error::invalid("f_l", "a low-pass band starts at 0"));
        }
        if !(self.f_l >= 0.0 && self.f_u > self.f_l) || self.f_u.is_nan() {
            return Err(Error::invalid(
                "f_u",
                format!("band needs 0 <= f_l < f_u, got [{}, {}]", self.f_l, self.f_u),
            ));
        }
        Ok(())
    }

    /// Whether a (signed) tone frequency lands in the band; edges are excluded.
    pub fn admits(&self, f: f64) -> bool {
        match self.shape {
            PassbandShape::LowPass => f > -self.f_u && f < self.f_u,
            PassbandShape::BandPass => {
                let a = f.abs();
                a > self.f_l && a < self.f_u
            }
        }
    }
}

/// `Σ 2|a_n|²` over the tones `f_s + n f_m` that the band admits.
///
/// This is the carrier amplitude delivered to the through port by a
/// switched pair of perfect delay lines; [`il_filtering`] reports it on the
/// `-10 log10` scale.
pub fn filtering_sum(plan: &TonePlan, band: &PassbandSpec) -> Result<f64> {
    plan.validate()?;
    band.validate()?;
    let n_max = plan.harmonics as i64;
    let mut sum = 0.0;
    for n in -n_max..=n_max {
        if band.admits(plan.tone(n)) {
            sum += 2.0 * signals::square_wave_power(n);
        }
    }
    let tail = dropped_tail(plan, band);
    if tail > MAX_DROPPED_TAIL {
        return Err(Error::invalid(
            "harmonics",
            format!(
                "{} harmonics drop {tail:.3e} of the in-band power (limit {MAX_DROPPED_TAIL:e})",
                plan.harmonics
            ),
        ));
    }
    Ok(sum)
}

/// Power of in-band tones with `|n| > harmonics`, enumerated up to a cap and
/// bounded analytically beyond it.
fn dropped_tail(plan: &TonePlan, band: &PassbandSpec) -> f64 {
    let reach = band.f_u;
    let mut tail = 0.0;
    for sign in [1i64, -1] {
        let mut n = plan.harmonics as i64 + 1;
        loop {
            let f = plan.tone(sign * n);
            if f.abs() >= reach && (sign > 0 || f < 0.0) {
                break;
            }
            if n > TAIL_ENUMERATION_CAP {
                tail += 1.0 / (PI * PI * n as f64);
                break;
            }
            if band.admits(f) {
                tail += 2.0 * signals::square_wave_power(n);
            }
            n += 1;
        }
    }
    tail
}

/// Insertion loss from band-limited delay lines, `-10 log10 Σ 2|a_n|²[in band]`.
///
/// Returns [`SATURATED_DB`] when no tone lands in the band.
pub fn il_filtering(plan: &TonePlan, band: &PassbandSpec) -> Result<f64> {
    let sum = filtering_sum(plan, band)?;
    Ok(if sum <= 0.0 { SATURATED_DB } else { (-10.0 * sum.log10()).min(SATURATED_DB) })
}

/// Insertion loss against normalised bandwidth `BW/f_m`.
///
/// For [`PassbandShape::BandPass`] the band is centred on `plan.f_s`; for
/// [`PassbandShape::LowPass`] it is `[0, BW]`. The carrier sits at
/// `f_l + carrier_position·BW` in both cases. A zero bandwidth admits nothing.
pub fn il_curve(
    plan: &TonePlan,
    shape: PassbandShape,
    normalized_bw_grid: &[f64],
    carrier_position: f64,
) -> Result<Vec<(f64, f64)>> {
    plan.validate()?;
    if normalized_bw_grid.is_empty() {
        return Err(Error::invalid("normalized_bw_grid", "must not be empty"));
    }
    if normalized_bw_grid.windows(2).any(|w| w[1] < w[0]) || normalized_bw_grid[0] < 0.0 {
        return Err(Error::invalid("normalized_bw_grid", "must be ascending and non-negative"));
    }
    if !(0.0..=1.0).contains(&carrier_position) {
        return Err(Error::invalid("carrier_position", "must lie in [0, 1]"));
    }
    normalized_bw_grid
        .iter()
        .map(|&x| {
            let bw = x * plan.f_m;
            if bw == 0.0 {
                return Ok((x, SATURATED_DB));
            }
            let (band, f_s) = match shape {
                PassbandShape::BandPass => {
                    let f_l = plan.f_s - 0.5 * bw;
                    if f_l < 0.0 {
                        return Err(Error::invalid("normalized_bw_grid", "band-pass band extends below 0 Hz"));
                    }
                    (PassbandSpec::band_pass(f_l, f_l + bw), f_l + carrier_position * bw)
                }
                PassbandShape::LowPass => (PassbandSpec::low_pass(bw), carrier_position * bw),
            };
            let p = TonePlan { f_s, ..*plan };
            il_filtering(&p, &band).map(|il| (x, il))
        })
        .collect()
}

fn check_dd(dd_ratio: f64) -> Result<()> {
    if !(0.0..1.0).contains(&dd_ratio) {
        return Err(Error::invalid("dd_ratio", format!("must lie in [0, 1), got {dd_ratio}")));
    }
    Ok(())
}

/// Insertion loss from delay deviation, `-20 log10(1 − |Δδ|/2δ)`.
pub fn deviation_il(dd_ratio: f64) -> Result<f64> {
    check_dd(dd_ratio)?;
    Ok(loss_db_from_amplitude(1.0 - dd_ratio))
}

/// Isolation under delay deviation, `-20 log10(|Δδ|/2δ)`; saturated at zero.
pub fn deviation_isolation(dd_ratio: f64) -> Result<f64> {
    check_dd(dd_ratio)?;
    Ok(loss_db_from_amplitude(dd_ratio))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TonePort {
    Through,
    Isolated,
}

/// Level of the `n`-th intra-modulated tone (on the `2 f_m` comb) relative to
/// the main tone of the same port, in dBc.
pub fn modulated_tone_level(port: TonePort, n: i64, dd_ratio: f64) -> Result<f64> {
    check_dd(dd_ratio)?;
    if n == 0 {
        return Err(Error::invalid("n", "the main tone has no dBc level"));
    }
    let x = match port {
        TonePort::Through => signals::sinc(n as f64 * (1.0 - dd_ratio)),
        TonePort::Isolated => {
            if dd_ratio == 0.0 {
                return Err(Error::invalid("dd_ratio", "the isolated port has no main tone at zero deviation"));
            }
            signals::sinc(n as f64 * dd_ratio)
        }
    };
    Ok(level_db_from_amplitude(x))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwitchTimeEffects {
    /// Extra insertion loss relative to ideal switching.
    pub il_db: f64,
    /// Through-port tone levels `n → dBc` on the `2 f_m` comb, `1 <= |n| <= n_max`.
    pub tone_levels: BTreeMap<i64, f64>,
}

/// Main-tone loss and tone levels caused by a finite switch time.
///
/// Both follow from the `T3` coefficients as ratios (`t3_n / t3_0` and
/// `t3_0(r) / t3_0(0)`), so the one-line vs two-line normalisation cancels.
pub fn switch_time_effects(ts_ratio: f64, n_max: usize) -> Result<SwitchTimeEffects> {
    if !(0.0..1.0).contains(&ts_ratio) {
        return Err(Error::invalid("ts_ratio", format!("must lie in [0, 1), got {ts_ratio}")));
    }
    // δ = 0.5 makes 2δ = 1 so the ratio is the switch time itself.
    let t3 = |n: i64| signals::fourier_coefficient(SeriesKind::T3C, n, 0.5, 0.0, ts_ratio);
    let ideal = signals::fourier_coefficient(SeriesKind::T3C, 0, 0.5, 0.0, 0.0)?;
    let main = t3(0)?;
    let il_db = loss_db_from_amplitude(main.norm() / ideal.norm());
    let mut tone_levels = BTreeMap::new();
    for k in 1..=n_max as i64 {
        for n in [-k, k] {
            tone_levels.insert(n, level_db_from_amplitude(t3(n)?.norm() / main.norm()));
        }
    }
    Ok(SwitchTimeEffects { il_db, tone_levels })
}

/// Ideal 4-port circulation matrix (ports 0..3 map to 1..4):
/// `S21 = S32 = S43 = S14 = e^{−j2πfδ}`.
pub fn ideal_smatrix(f: f64, delta: f64) -> Result<Matrix4<Complex64>> {
    if !(f.is_finite() && f >= 0.0) {
        return Err(Error::invalid("f", "must be finite and >= 0"));
    }
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::invalid("delta", "must be finite and > 0"));
    }
    let t = Complex64::from_polar(1.0, -2.0 * PI * f * delta);
    let mut s = Matrix4::zeros();
    for j in 0..4 {
        s[((j + 1) % 4, j)] = t;
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const FM: f64 = 1e6;

    #[test]
    fn carrier_only_costs_three_db() {
        let plan = TonePlan::new(1000.0 * FM, FM, 200);
        let band = PassbandSpec::band_pass(999.9 * FM, 1000.1 * FM);
        assert_abs_diff_eq!(il_filtering(&plan, &band).unwrap(), 10.0 * 2f64.log10(), epsilon = 1e-12);
    }

    #[test]
    fn first_sideband_pair() {
        let plan = TonePlan::new(1000.0 * FM, FM, 200);
        let band = PassbandSpec::band_pass(998.5 * FM, 1001.5 * FM);
        let expected = -10.0 * (0.5 + 4.0 / (PI * PI)).log10();
        assert_abs_diff_eq!(il_filtering(&plan, &band).unwrap(), expected, epsilon = 1e-12);
        assert_abs_diff_eq!(expected, 0.432, epsilon = 1e-3);
    }

    #[test]
    fn empty_selection_saturates() {
        let plan = TonePlan::new(10.0 * FM, FM, 50);
        let band = PassbandSpec::band_pass(100.2 * FM, 100.8 * FM);
        assert_eq!(il_filtering(&plan, &band).unwrap(), SATURATED_DB);
    }

    #[test]
    fn rejects_bad_bands_and_carriers() {
        let plan = TonePlan::new(10.0 * FM, FM, 50);
        assert!(il_filtering(&plan, &PassbandSpec::band_pass(5.0, 5.0)).is_err());
        assert!(il_filtering(&plan, &PassbandSpec::band_pass(6.0, 5.0)).is_err());
        let bad = TonePlan::new(0.0, FM, 50);
        assert!(il_filtering(&bad, &PassbandSpec::low_pass(FM)).is_err());
    }

    #[test]
    fn short_harmonic_range_is_rejected_for_wide_bands() {
        let plan = TonePlan::new(3.3 * FM, FM, 20);
        assert!(il_filtering(&plan, &PassbandSpec::low_pass(1e4 * FM)).is_err());
    }

    #[test]
    fn low_pass_limit_is_lossless() {
        let plan = TonePlan::new(3.3 * FM, FM, 1_000_000);
        let il = il_filtering(&plan, &PassbandSpec::low_pass(1e12 * FM)).unwrap();
        assert!(il >= 0.0 && il < 1e-5, "{il}");
    }

    #[test]
    fn deviation_examples() {
        assert_abs_diff_eq!(deviation_il(0.1).unwrap(), 0.9151498, epsilon = 1e-6);
        assert_abs_diff_eq!(deviation_isolation(0.1).unwrap(), 20.0, epsilon = 1e-12);
        assert_eq!(deviation_il(0.0).unwrap(), 0.0);
        assert_eq!(deviation_isolation(0.0).unwrap(), SATURATED_DB);
        let six = 20.0 * 2f64.log10();
        assert_abs_diff_eq!(deviation_il(0.5).unwrap(), six, epsilon = 1e-12);
        assert_abs_diff_eq!(deviation_isolation(0.5).unwrap(), six, epsilon = 1e-12);
        assert!(deviation_il(1.0).is_err());
        assert!(deviation_isolation(-0.1).is_err());
    }

    #[test]
    fn tone_examples() {
        let through = modulated_tone_level(TonePort::Through, 1, 0.1).unwrap();
        assert_abs_diff_eq!(through, 20.0 * signals::sinc(0.9).log10(), epsilon = 1e-12);
        assert_abs_diff_eq!(through, -19.2, epsilon = 0.05);
        let iso = modulated_tone_level(TonePort::Isolated, 1, 0.1).unwrap();
        assert_abs_diff_eq!(iso, -0.14, epsilon = 0.01);
        assert_eq!(modulated_tone_level(TonePort::Through, 3, 0.0).unwrap(), -SATURATED_DB);
        assert!(modulated_tone_level(TonePort::Through, 0, 0.1).is_err());
        assert!(modulated_tone_level(TonePort::Isolated, 1, 0.0).is_err());
    }

    #[test]
    fn switch_time_examples() {
        let ideal = switch_time_effects(0.0, 3).unwrap();
        assert_eq!(ideal.il_db, 0.0);
        assert!(ideal.tone_levels.values().all(|&v| v == -SATURATED_DB));
        let e = switch_time_effects(0.1, 3).unwrap();
        assert_abs_diff_eq!(e.il_db, 0.9151498, epsilon = 1e-6);
        assert_abs_diff_eq!(e.tone_levels[&1], 20.0 * signals::sinc(0.9).log10(), epsilon = 1e-9);
        assert_abs_diff_eq!(e.tone_levels[&-1], e.tone_levels[&1], epsilon = 1e-12);
        assert!(switch_time_effects(1.0, 3).is_err());
    }

    #[test]
    fn ideal_smatrix_examples() {
        let s = ideal_smatrix(0.0, 1e-6).unwrap();
        assert_eq!(s[(1, 0)], Complex64::new(1.0, 0.0));
        assert_eq!(s[(0, 3)], Complex64::new(1.0, 0.0));
        assert_eq!(s[(0, 1)], Complex64::new(0.0, 0.0));
        let s = ideal_smatrix(0.25e6, 1e-6).unwrap();
        assert_abs_diff_eq!(s[(2, 1)].re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s[(2, 1)].im, -1.0, epsilon = 1e-15);
        assert!(s[(1, 0)] != s[(0, 1)]);
    }

    #[test]
    fn curve_steps_for_centred_carrier() {
        // the mirror tones near n = -2000 fall in the band too
        let plan = TonePlan::new(1000.0 * FM, FM, 2100);
        let grid: Vec<f64> = (0..=400).map(|i| i as f64 * 0.1).collect();
        let curve = il_curve(&plan, PassbandShape::BandPass, &grid, 0.5).unwrap();
        assert_eq!(curve[0].1, SATURATED_DB);
        assert_abs_diff_eq!(curve[1].1, 10.0 * 2f64.log10(), epsilon = 1e-12);
        assert!(curve.windows(2).all(|w| w[1].1 <= w[0].1));
        assert!(il_curve(&plan, PassbandShape::BandPass, &[], 0.5).is_err());
        assert!(il_curve(&plan, PassbandShape::BandPass, &[2.0, 1.0], 0.5).is_err());
    }
}
