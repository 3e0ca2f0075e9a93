//! Periodic steady-state solver.
//!
//! The circulator is linear and periodic in time, and a tone on a DFT bin of a
//! window holding a whole number of modulation periods drives it into a
//! steady state that is periodic in that window. The unknowns are the waves
//! launched by the two junctions into the four line ends over one window.
//! Lines act on them through their frequency response at the window's DFT
//! bins (circular convolution); junctions act sample by sample. The fixed
//! point is found by repeated round trips, which is the transient response
//! folded onto the window.

use std::ops::Range;
use std::sync::Arc;

use num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};

use super::config::{CirculatorConfig, Line};
use super::junction::{port_terminal, JunctionSchedule, Side};
use crate::error::{Error, Result};

/// Allowed growth of port output power over input power, in dB.
pub const ENERGY_GROWTH_LIMIT_DB: f64 = 0.1;

/// Line ends in wave-array order.
pub const LINE_ENDS: [&str; 4] = ["AL", "BL", "AR", "BR"];

struct LineBins {
    s11: Vec<Complex64>,
    s21: Vec<Complex64>,
    s12: Vec<Complex64>,
    s22: Vec<Complex64>,
}

impl LineBins {
    fn new(cfg: &CirculatorConfig, which: Line, n: usize) -> Result<Self> {
        let dl = cfg.line(which);
        let bins = n / 2 + 1;
        let mut out = LineBins {
            s11: Vec::with_capacity(bins),
            s21: Vec::with_capacity(bins),
            s12: Vec::with_capacity(bins),
            s22: Vec::with_capacity(bins),
        };
        for k in 0..bins {
            let f = k as f64 * cfg.sample_rate / n as f64;
            let mut s = dl.response_or_stopband(f)?;
            if k == 0 || 2 * k == n {
                // real signals need real DC and Nyquist responses
                s.iter_mut().for_each(|x| x.im = 0.0);
            }
            out.s11.push(s[(0, 0)]);
            out.s21.push(s[(1, 0)]);
            out.s12.push(s[(0, 1)]);
            out.s22.push(s[(1, 1)]);
        }
        Ok(out)
    }
}

/// A configured circulator ready to be driven; reusable across excitations.
pub struct Circuit {
    cfg: CirculatorConfig,
    window: usize,
    junctions: JunctionSchedule,
    line_a: LineBins,
    line_b: LineBins,
    forward: Arc<dyn RealToComplex<f64>>,
    inverse: Arc<dyn ComplexToReal<f64>>,
}

/// Waves at the four ports and the four line ends over one steady-state window.
#[derive(Debug, Clone)]
pub struct SimulationResult {
    pub sample_rate: f64,
    pub f_s: f64,
    pub source_port: usize,
    pub amplitude: f64,
    /// DFT bin of the carrier in the window.
    pub carrier_bin: usize,
    /// `a_k(t)`, indexed by port − 1.
    pub incident: [Vec<f64>; 4],
    /// `b_k(t)`, indexed by port − 1.
    pub reflected: [Vec<f64>; 4],
    /// Waves launched by the junctions into the line ends, in [`LINE_ENDS`] order.
    pub line_in: [Vec<f64>; 4],
    /// Waves arriving at the junctions from the line ends.
    pub line_out: [Vec<f64>; 4],
    /// Samples that belong to the periodic steady state (the whole window).
    pub steady_state: Range<usize>,
    pub iterations: usize,
    pub residual: f64,
}

impl SimulationResult {
    /// Complex amplitude of `series` at DFT bin `bin` (peak, not RMS).
    pub fn tone(series: &[f64], bin: usize) -> Complex64 {
        let n = series.len();
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, &x) in series.iter().enumerate() {
            let idx = (bin as u128 * k as u128 % n as u128) as f64;
            acc += Complex64::from_polar(x, -2.0 * std::f64::consts::PI * idx / n as f64);
        }
        acc * (2.0 / n as f64)
    }

    /// `b_port / a_source` at the carrier.
    pub fn transfer(&self, port: usize) -> Complex64 {
        let a = Self::tone(&self.incident[self.source_port - 1], self.carrier_bin);
        Self::tone(&self.reflected[port - 1], self.carrier_bin) / a
    }
}

impl Circuit {
    pub fn new(cfg: &CirculatorConfig) -> Result<Self> {
        cfg.validate()?;
        let window = cfg.window_samples();
        let mut planner = RealFftPlanner::<f64>::new();
        Ok(Self {
            cfg: cfg.clone(),
            window,
            junctions: JunctionSchedule::new(cfg)?,
            line_a: LineBins::new(cfg, Line::A, window)?,
            line_b: LineBins::new(cfg, Line::B, window)?,
            forward: planner.plan_fft_forward(window),
            inverse: planner.plan_fft_inverse(window),
        })
    }

    pub fn config(&self) -> &CirculatorConfig {
        &self.cfg
    }

    pub fn window(&self) -> usize {
        self.window
    }

    /// DFT bin of `f_s`, checking that the carrier and its image tones stay apart.
    pub fn carrier_bin(&self, f_s: f64) -> Result<usize> {
        carrier_bin(&self.cfg, f_s)
    }

    fn propagate(&self, u: &[Vec<f64>; 4], v: &mut [Vec<f64>; 4], spec: &mut [Vec<Complex64>; 4], scratch: &mut Vec<Complex64>) {
        let n = self.window;
        for i in 0..4 {
            let mut input = u[i].clone();
            self.forward
                .process_with_scratch(&mut input, &mut spec[i], scratch)
                .expect("buffer sizes match the plan");
        }
        let bins = n / 2 + 1;
        let mut out = vec![Complex64::new(0.0, 0.0); bins];
        // (line bins, left index, right index)
        for (line, l, r) in [(&self.line_a, 0usize, 2usize), (&self.line_b, 1, 3)] {
            for (end, from_left, from_right) in [(l, &line.s11, &line.s12), (r, &line.s21, &line.s22)] {
                for k in 0..bins {
                    out[k] = from_left[k] * spec[l][k] + from_right[k] * spec[r][k];
                }
                out[0].im = 0.0;
                if n % 2 == 0 {
                    out[bins - 1].im = 0.0;
                }
                self.inverse
                    .process_with_scratch(&mut out, &mut v[end], scratch)
                    .expect("buffer sizes match the plan");
                let scale = 1.0 / n as f64;
                v[end].iter_mut().for_each(|x| *x *= scale);
            }
        }
    }

    /// Drive `source_port` with `amplitude·cos(2π f_s t)` and solve for the
    /// periodic steady state.
    pub fn simulate(&self, source_port: usize, f_s: f64, amplitude: f64) -> Result<SimulationResult> {
        let (src_side, src_t) = port_terminal(source_port)?;
        if !(amplitude.is_finite() && amplitude > 0.0) {
            return Err(Error::invalid("amplitude", "must be finite and > 0"));
        }
        let bin = self.carrier_bin(f_s)?;
        let n = self.window;
        let a: Vec<f64> = (0..n)
            .map(|k| {
                let idx = (bin as u128 * k as u128 % n as u128) as f64;
                amplitude * (2.0 * std::f64::consts::PI * idx / n as f64).cos()
            })
            .collect();

        // Direct launch of the source into the line ends on its side.
        let mut u0: [Vec<f64>; 4] = Default::default();
        for v in u0.iter_mut() {
            *v = vec![0.0; n];
        }
        let (la, lb) = match src_side {
            Side::Left => (0, 1),
            Side::Right => (2, 3),
        };
        for k in 0..n {
            let s = self.junctions.at(src_side, k);
            u0[la][k] = s[2][src_t] * a[k];
            u0[lb][k] = s[3][src_t] * a[k];
        }
        let norm = |x: &[Vec<f64>; 4]| x.iter().flat_map(|v| v.iter()).map(|y| y * y).sum::<f64>().sqrt();
        let drive = norm(&u0);

        let mut u = u0.clone();
        let mut v: [Vec<f64>; 4] = Default::default();
        let mut spec: [Vec<Complex64>; 4] = Default::default();
        for i in 0..4 {
            v[i] = vec![0.0; n];
            spec[i] = self.forward.make_output_vec();
        }
        let mut scratch = self
            .forward
            .make_scratch_vec()
            .into_iter()
            .chain(self.inverse.make_scratch_vec())
            .collect::<Vec<_>>();

        let mut iterations = 0;
        let mut residual = f64::INFINITY;
        while iterations < self.cfg.max_iterations {
            iterations += 1;
            self.propagate(&u, &mut v, &mut spec, &mut scratch);
            let mut diff = 0.0;
            let mut total = 0.0;
            for k in 0..n {
                for (side, l, r) in [(Side::Left, 0usize, 1usize), (Side::Right, 2, 3)] {
                    let s = self.junctions.at(side, k);
                    let new_l = s[2][2] * v[l][k] + s[2][3] * v[r][k] + u0[l][k];
                    let new_r = s[3][2] * v[l][k] + s[3][3] * v[r][k] + u0[r][k];
                    diff += (new_l - u[l][k]).powi(2) + (new_r - u[r][k]).powi(2);
                    total += new_l * new_l + new_r * new_r;
                    u[l][k] = new_l;
                    u[r][k] = new_r;
                }
            }
            if !total.is_finite() || total.sqrt() > 1e6 * drive.max(f64::MIN_POSITIVE) {
                return Err(Error::Unstable(format!(
                    "line waves grew to {:.3e} times the drive after {iterations} round trips",
                    total.sqrt() / drive
                )));
            }
            residual = if total > 0.0 { (diff / total).sqrt() } else { 0.0 };
            if residual <= self.cfg.tolerance {
                break;
            }
        }
        if residual > self.cfg.tolerance {
            return Err(Error::NotConverged { iterations, residual });
        }
        self.propagate(&u, &mut v, &mut spec, &mut scratch);

        let mut incident: [Vec<f64>; 4] = Default::default();
        let mut reflected: [Vec<f64>; 4] = Default::default();
        for p in 0..4 {
            incident[p] = vec![0.0; n];
            reflected[p] = vec![0.0; n];
        }
        incident[source_port - 1] = a.clone();
        for (side, l, r) in [(Side::Left, 0usize, 1usize), (Side::Right, 2, 3)] {
            for (t, port) in side.ports().into_iter().enumerate() {
                let out = &mut reflected[port - 1];
                for k in 0..n {
                    let s = self.junctions.at(side, k);
                    let mut b = s[t][2] * v[l][k] + s[t][3] * v[r][k];
                    if side == src_side {
                        b += s[t][src_t] * a[k];
                    }
                    out[k] = b;
                }
            }
        }
        let p_in: f64 = a.iter().map(|x| x * x).sum();
        let p_out: f64 = reflected.iter().flat_map(|v| v.iter()).map(|x| x * x).sum();
        if p_out > p_in * 10f64.powf(ENERGY_GROWTH_LIMIT_DB / 10.0) {
            return Err(Error::Unstable(format!(
                "port output power exceeds the input by {:.3} dB",
                10.0 * (p_out / p_in).log10()
            )));
        }
        Ok(SimulationResult {
            sample_rate: self.cfg.sample_rate,
            f_s,
            source_port,
            amplitude,
            carrier_bin: bin,
            incident,
            reflected,
            line_in: u,
            line_out: v,
            steady_state: 0..n,
            iterations,
            residual,
        })
    }
}

/// DFT bin of `f_s` in the steady-state window of `cfg`.
///
/// The carrier must sit exactly on a bin, and its negative-frequency image
/// must not share bins with the intermodulation comb (`2 f_s / f_mod` must not
/// be an integer multiple of the window's bin spacing ratio).
pub fn carrier_bin(cfg: &CirculatorConfig, f_s: f64) -> Result<usize> {
    let n = cfg.window_samples();
    let x = f_s * n as f64 / cfg.sample_rate;
    let k = x.round();
    if !f_s.is_finite() || (x - k).abs() > 1e-6 * x.abs().max(1.0) {
        return Err(Error::invalid(
            "f_s",
            format!(
                "{f_s} Hz is not commensurate with the {n}-sample window (bin spacing {} Hz)",
                cfg.sample_rate / n as f64
            ),
        ));
    }
    let k = k as usize;
    if k == 0 || 2 * k >= n {
        return Err(Error::invalid("f_s", "must lie strictly between 0 and the Nyquist frequency"));
    }
    if (2 * k) % cfg.n_periods == 0 {
        return Err(Error::invalid(
            "f_s",
            "2·f_s is a multiple of f_mod: the carrier's image folds onto the tone comb",
        ));
    }
    Ok(k)
}

/// Closest valid carrier to `f`.
pub fn snap_frequency(cfg: &CirculatorConfig, f: f64) -> Result<f64> {
    let n = cfg.window_samples();
    let df = cfg.sample_rate / n as f64;
    let centre = (f / df).round() as i64;
    for d in 0..=(cfg.n_periods as i64) {
        for k in [centre - d, centre + d] {
            if k > 0 {
                let f = k as f64 * df;
                if carrier_bin(cfg, f).is_ok() {
                    return Ok(f);
                }
            }
        }
    }
    Err(Error::invalid("f", format!("no valid carrier near {f} Hz")))
}

/// All valid carriers in `[f_lo, f_hi]`.
pub fn carrier_grid(cfg: &CirculatorConfig, f_lo: f64, f_hi: f64) -> Vec<f64> {
    let n = cfg.window_samples();
    let df = cfg.sample_rate / n as f64;
    let lo = (f_lo / df).ceil().max(1.0) as usize;
    let hi = (f_hi / df).floor() as usize;
    (lo..=hi)
        .map(|k| k as f64 * df)
        .filter(|&f| carrier_bin(cfg, f).is_ok())
        .collect()
}

/// Drive one port of the circulator (see [`Circuit::simulate`]).
pub fn simulate_tone(cfg: &CirculatorConfig, source_port: usize, f_s: f64, amplitude: f64, n_periods: usize) -> Result<SimulationResult> {
    let cfg = CirculatorConfig { n_periods, ..cfg.clone() };
    Circuit::new(&cfg)?.simulate(source_port, f_s, amplitude)
}
