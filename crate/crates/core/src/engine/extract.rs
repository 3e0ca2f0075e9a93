use std::f64::consts::PI;

use nalgebra::Matrix4;
use num_complex::Complex64;
use rayon::prelude::*;
use realfft::RealFftPlanner;

use super::config::CirculatorConfig;
use super::junction::JunctionSchedule;
use super::solver::{carrier_bin, Circuit, SimulationResult};
use crate::analytic::{level_db_from_amplitude, SATURATED_DB};
use crate::error::{Error, Result};

/// Peak amplitude in √W of a tone of `power_dbm`.
pub fn amplitude_from_dbm(power_dbm: f64) -> f64 {
    (2.0 * 10f64.powf((power_dbm - 30.0) / 10.0)).sqrt()
}

/// Power in dBm of a tone with peak amplitude `amp` in √W.
pub fn dbm_from_amplitude(amp: f64) -> f64 {
    let p = 0.5 * amp * amp;
    if p > 0.0 {
        (10.0 * p.log10() + 30.0).max(-SATURATED_DB)
    } else {
        -SATURATED_DB
    }
}

fn check_power(power_dbm: f64) -> Result<f64> {
    if !power_dbm.is_finite() {
        return Err(Error::invalid("power", "must be finite"));
    }
    Ok(amplitude_from_dbm(power_dbm))
}

/// One column of the scattering matrix: `b_i / a_source` for i = 1..4.
#[derive(Debug, Clone, PartialEq)]
pub struct SParamColumn {
    pub freq: f64,
    pub source_port: usize,
    pub s: [Complex64; 4],
}

#[derive(Debug, Clone, PartialEq)]
pub struct SParamPoint {
    pub freq: f64,
    /// `s[(i, j)]` is `S_{i+1, j+1}`.
    pub s: Matrix4<Complex64>,
}

/// Response to a drive at `source_port` for each carrier of `f_grid`.
/// Points run in parallel; the output keeps grid order.
pub fn extract_column(cfg: &CirculatorConfig, f_grid: &[f64], source_port: usize, power_dbm: f64) -> Result<Vec<SParamColumn>> {
    let amp = check_power(power_dbm)?;
    let circuit = Circuit::new(cfg)?;
    for &f in f_grid {
        circuit.carrier_bin(f)?;
    }
    f_grid
        .par_iter()
        .map(|&f| {
            let r = circuit.simulate(source_port, f, amp)?;
            Ok(SParamColumn { freq: f, source_port, s: std::array::from_fn(|i| r.transfer(i + 1)) })
        })
        .collect()
}

/// Full 4×4 scattering matrix at each carrier of `f_grid`.
pub fn extract_sparams(cfg: &CirculatorConfig, f_grid: &[f64], power_dbm: f64) -> Result<Vec<SParamPoint>> {
    let amp = check_power(power_dbm)?;
    let circuit = Circuit::new(cfg)?;
    for &f in f_grid {
        circuit.carrier_bin(f)?;
    }
    let jobs: Vec<(usize, usize)> = (0..f_grid.len()).flat_map(|i| (1..=4).map(move |p| (i, p))).collect();
    let columns: Vec<[Complex64; 4]> = jobs
        .par_iter()
        .map(|&(i, p)| {
            let r = circuit.simulate(p, f_grid[i], amp)?;
            Ok(std::array::from_fn(|k| r.transfer(k + 1)))
        })
        .collect::<Result<_>>()?;
    Ok(f_grid
        .iter()
        .enumerate()
        .map(|(i, &freq)| {
            let mut s = Matrix4::zeros();
            for j in 0..4 {
                for k in 0..4 {
                    s[(k, j)] = columns[4 * i + j][k];
                }
            }
            SParamPoint { freq, s }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ToneTag {
    Carrier,
    /// Intermodulation product at `f_s + n·f_mod`.
    Order(i64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tone {
    pub freq: f64,
    pub n: i64,
    pub tag: ToneTag,
    pub power_dbm: f64,
    pub dbc: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToneSpectrum {
    pub observe_port: usize,
    pub f_s: f64,
    pub f_mod: f64,
    /// Carrier power at the observed port.
    pub reference_dbm: f64,
    pub tones: Vec<Tone>,
}

impl ToneSpectrum {
    pub fn tone(&self, n: i64) -> Option<&Tone> {
        self.tones.iter().find(|t| t.n == n)
    }
}

/// Tones of one port's steady-state output.
pub fn spectrum_of(result: &SimulationResult, observe_port: usize, f_mod: f64, n_max: usize) -> Result<ToneSpectrum> {
    if !(1..=4).contains(&observe_port) {
        return Err(Error::invalid("observe_port", format!("must be 1..=4, got {observe_port}")));
    }
    let series = &result.reflected[observe_port - 1];
    let n = series.len();
    let mut planner = RealFftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(n);
    let mut input = series.clone();
    let mut spec = fft.make_output_vec();
    fft.process(&mut input, &mut spec).expect("buffer sizes match the plan");
    let per_mod = (f_mod * n as f64 / result.sample_rate).round() as i64;
    let amp = |bin: i64| spec[bin as usize].norm() * 2.0 / n as f64;
    let carrier = amp(result.carrier_bin as i64);
    let reference_dbm = dbm_from_amplitude(carrier);
    let mut tones = Vec::new();
    for order in -(n_max as i64)..=(n_max as i64) {
        let bin = result.carrier_bin as i64 + order * per_mod;
        if bin <= 0 || 2 * bin >= n as i64 {
            continue;
        }
        let a = amp(bin);
        let dbc = if carrier > 0.0 { level_db_from_amplitude(a / carrier) } else { SATURATED_DB };
        tones.push(Tone {
            freq: result.f_s + order as f64 * f_mod,
            n: order,
            tag: if order == 0 { ToneTag::Carrier } else { ToneTag::Order(order) },
            power_dbm: dbm_from_amplitude(a),
            dbc: if order == 0 { 0.0 } else { dbc },
        });
    }
    Ok(ToneSpectrum { observe_port, f_s: result.f_s, f_mod, reference_dbm, tones })
}

/// Drive `source_port` at `f_s` and report the tones at `observe_port` for
/// `|n| <= n_max`.
pub fn extract_spectrum(
    cfg: &CirculatorConfig,
    source_port: usize,
    f_s: f64,
    observe_port: usize,
    power_dbm: f64,
    n_max: usize,
) -> Result<ToneSpectrum> {
    let amp = check_power(power_dbm)?;
    let r = Circuit::new(cfg)?.simulate(source_port, f_s, amp)?;
    spectrum_of(&r, observe_port, cfg.f_mod, n_max)
}

/// `−dφ/dω` of a response sampled on an ascending grid.
///
/// Central differences inside, one-sided at the ends. Consecutive points
/// whose wrapped phase step reaches 0.9π make the unwrapping ambiguous.
pub fn group_delay(freqs: &[f64], response: &[Complex64]) -> Result<Vec<f64>> {
    if freqs.len() != response.len() || freqs.len() < 2 {
        return Err(Error::invalid("s_curve", "needs at least two points and one value per frequency"));
    }
    if freqs.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("f_grid", "must be strictly ascending"));
    }
    let mut phase = Vec::with_capacity(freqs.len());
    phase.push(response[0].arg());
    for i in 1..response.len() {
        if response[i].norm() == 0.0 || response[i - 1].norm() == 0.0 {
            return Err(Error::UnwrapAmbiguous { index: i - 1, next: i, dphi: f64::NAN });
        }
        let dphi = (response[i] / response[i - 1]).arg();
        if dphi.abs() >= 0.9 * PI {
            return Err(Error::UnwrapAmbiguous { index: i - 1, next: i, dphi: dphi.abs() });
        }
        phase.push(phase[i - 1] + dphi);
    }
    let n = freqs.len();
    Ok((0..n)
        .map(|i| {
            let (a, b) = match i {
                0 => (0, 1),
                _ if i == n - 1 => (n - 2, n - 1),
                _ => (i - 1, i + 1),
            };
            -(phase[b] - phase[a]) / (2.0 * PI * (freqs[b] - freqs[a]))
        })
        .collect())
}

/// Pass-band figures of a port-1 sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandSummary {
    /// Lowest `−20 log|S21|`.
    pub min_il_db: f64,
    pub f_min_il: f64,
    /// Edges of the contiguous region around the minimum where the loss stays
    /// within 3 dB of it, linearly interpolated between grid points.
    pub f_lo: f64,
    pub f_hi: f64,
    pub bandwidth: f64,
    pub centre: f64,
    /// Worst `−20 log max(|S31|, |S41|)` inside `[f_lo, f_hi]`.
    pub min_isolation_db: f64,
}

/// Summarise a sweep driven from port 1.
pub fn band_summary(columns: &[SParamColumn]) -> Result<BandSummary> {
    if columns.len() < 3 || columns.iter().any(|c| c.source_port != 1) {
        return Err(Error::invalid("columns", "need at least three points of a port-1 sweep"));
    }
    let loss = |c: &SParamColumn| crate::analytic::loss_db_from_amplitude(c.s[1].norm());
    let il: Vec<f64> = columns.iter().map(loss).collect();
    let (best, &min_il_db) = il.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    let limit = min_il_db + 3.0;
    let edge = |inside: usize, outside: usize| {
        let (f0, f1) = (columns[inside].freq, columns[outside].freq);
        let (y0, y1) = (il[inside], il[outside]);
        f0 + (f1 - f0) * (limit - y0) / (y1 - y0)
    };
    let mut lo = best;
    while lo > 0 && il[lo - 1] <= limit {
        lo -= 1;
    }
    let mut hi = best;
    while hi + 1 < il.len() && il[hi + 1] <= limit {
        hi += 1;
    }
    let f_lo = if lo > 0 { edge(lo, lo - 1) } else { columns[0].freq };
    let f_hi = if hi + 1 < il.len() { edge(hi, hi + 1) } else { columns[hi].freq };
    let min_isolation_db = columns[lo..=hi]
        .iter()
        .map(|c| crate::analytic::loss_db_from_amplitude(c.s[2].norm().max(c.s[3].norm())))
        .fold(f64::INFINITY, f64::min);
    Ok(BandSummary {
        min_il_db,
        f_min_il: columns[best].freq,
        f_lo,
        f_hi,
        bandwidth: f_hi - f_lo,
        centre: 0.5 * (f_lo + f_hi),
        min_isolation_db,
    })
}

/// Carrier transmission of one switch module on its own.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchModuleResult {
    pub transmission: Complex64,
    pub il_db: f64,
}

/// The left switch module with its line terminals loaded by `z0` instead of
/// the lines: carrier transmission from port 1 into line A's terminal.
pub fn switch_module_testbench(cfg: &CirculatorConfig, f_s: f64) -> Result<SwitchModuleResult> {
    cfg.validate()?;
    let bin = carrier_bin(cfg, f_s)?;
    let schedule = JunctionSchedule::new(cfg)?;
    let n = cfg.window_samples();
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..n {
        let idx = (bin as u128 * k as u128 % n as u128) as f64;
        let phase = 2.0 * PI * idx / n as f64;
        let b = schedule.at(super::junction::Side::Left, k)[2][0] * phase.cos();
        acc += Complex64::from_polar(b, -phase);
    }
    let transmission = acc * (2.0 / n as f64);
    Ok(SwitchModuleResult { transmission, il_db: crate::analytic::loss_db_from_amplitude(transmission.norm()) })
}
