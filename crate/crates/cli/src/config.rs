//! Run configuration: a TOML file of dotted keys such as `switch.r_on_ohm = 3`.
//!
//! Every key is optional. An empty file gives the 285 ns / 877.19 kHz
//! reference circulator.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use swdl_core::components::{read_s2p, DelayLineModel, MatchingNetwork, Ramp, SwitchModel};
use swdl_core::engine::{
    CirculatorConfig, ControlAssignment, DEFAULT_MAX_ITERATIONS, DEFAULT_N_PERIODS, DEFAULT_SAMPLE_RATE,
    DEFAULT_TOLERANCE,
};

use crate::error::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawConfig {
    circulator: RawCirculator,
    switch: RawSwitch,
    delay_line: RawDelayLine,
    engine: RawEngine,
    sweep: RawSweep,
    analytic: RawAnalytic,
    spectrum: RawSpectrum,
    bounce: RawBounce,
    output: RawOutput,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawCirculator {
    delta_s: Option<f64>,
    f_mod_hz: Option<f64>,
    z0_ohm: Option<f64>,
    control: Option<String>,
    shunt_switches: Option<bool>,
    matching_l_h: Option<f64>,
    matching_c_f: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawSwitch {
    r_on_ohm: Option<f64>,
    r_off_ohm: Option<f64>,
    t_switch_s: Option<f64>,
    ramp: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawDelayLine {
    kind: Option<String>,
    f_lower_hz: Option<f64>,
    f_upper_hz: Option<f64>,
    group_delay_s: Option<f64>,
    passband_il_db: Option<f64>,
    skirt_hz: Option<f64>,
    s2p_path: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawEngine {
    sample_rate_hz: Option<f64>,
    n_periods: Option<usize>,
    max_iterations: Option<usize>,
    tolerance: Option<f64>,
    power_dbm: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawSweep {
    f_start_hz: Option<f64>,
    f_stop_hz: Option<f64>,
    f_step_hz: Option<f64>,
    dd_ratios: Option<Vec<f64>>,
    ts_ratios: Option<Vec<f64>>,
    tone_orders: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawAnalytic {
    carrier_hz: Option<f64>,
    harmonics: Option<usize>,
    bw_ratio_max: Option<f64>,
    bw_ratio_step: Option<f64>,
    carrier_positions: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawSpectrum {
    carrier_hz: Option<f64>,
    source_port: Option<usize>,
    observe_port: Option<usize>,
    n_max: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawBounce {
    source_port: Option<usize>,
    n_periods: Option<usize>,
    pulse_start_s: Option<f64>,
    pulse_width_s: Option<f64>,
    switch_time_s: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
    formats: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Svg,
}

impl Format {
    pub fn parse(s: &str) -> Result<Self, String> {
        match s.trim() {
            "csv" => Ok(Format::Csv),
            "svg" => Ok(Format::Svg),
            other => Err(format!("unknown format `{other}` (expected csv or svg)")),
        }
    }
}

/// Frequency sweep for the S-parameter commands.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencySweep {
    pub f_start: f64,
    pub f_stop: f64,
    /// Minimum spacing between kept carriers.
    pub f_step: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticSettings {
    pub carrier: f64,
    pub harmonics: usize,
    pub bw_ratio_max: f64,
    pub bw_ratio_step: f64,
    pub carrier_positions: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSettings {
    pub carrier: f64,
    pub source_port: usize,
    pub observe_port: usize,
    pub n_max: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BounceSettings {
    pub source_port: usize,
    pub n_periods: usize,
    /// `(start, width)` of a pulse; `None` drives the port continuously.
    pub pulse: Option<(f64, f64)>,
    pub switch_time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub circulator: CirculatorConfig,
    pub power_dbm: f64,
    pub sweep: FrequencySweep,
    pub dd_ratios: Vec<f64>,
    pub ts_ratios: Vec<f64>,
    pub tone_orders: usize,
    pub analytic: AnalyticSettings,
    pub spectrum: SpectrumSettings,
    pub bounce: BounceSettings,
    pub out_dir: Option<PathBuf>,
    pub formats: Vec<Format>,
}

fn invalid(key: &str, reason: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("{key}: {reason}"))
}

fn positive(key: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(invalid(key, format!("must be finite and > 0, got {v}")))
    }
}

fn port(key: &str, p: usize) -> Result<usize, CliError> {
    if (1..=4).contains(&p) {
        Ok(p)
    } else {
        Err(invalid(key, format!("must be a port number 1..=4, got {p}")))
    }
}

fn ratio_list(key: &str, list: Vec<f64>) -> Result<Vec<f64>, CliError> {
    if list.is_empty() {
        return Err(invalid(key, "must not be empty"));
    }
    for &r in &list {
        if !(0.0..1.0).contains(&r) {
            return Err(invalid(key, format!("every entry must lie in [0, 1), got {r}")));
        }
    }
    Ok(list)
}

fn grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| start + i as f64 * step).collect()
}

/// Read and validate a configuration file. `None` gives the defaults.
pub fn load(path: Option<&Path>) -> Result<RunConfig, CliError> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", p.display())))?,
        None => String::new(),
    };
    parse(&text, path.and_then(Path::parent))
}

/// Parse configuration text. Relative paths inside it resolve against `base`.
pub fn parse(text: &str, base: Option<&Path>) -> Result<RunConfig, CliError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| CliError::Validation(e.to_string()))?;
    build(raw, base)
}

fn build(raw: RawConfig, base: Option<&Path>) -> Result<RunConfig, CliError> {
    let c = raw.circulator;
    let delta = positive("circulator.delta_s", c.delta_s.unwrap_or(285e-9))?;
    let f_mod = positive("circulator.f_mod_hz", c.f_mod_hz.unwrap_or(1.0 / (4.0 * delta)))?;
    let z0 = positive("circulator.z0_ohm", c.z0_ohm.unwrap_or(50.0))?;
    let control = match c.control.as_deref().unwrap_or("forward") {
        "forward" => ControlAssignment::Forward,
        "reverse" => ControlAssignment::Reverse,
        "all-on" => ControlAssignment::AllOn,
        other => return Err(invalid("circulator.control", format!("expected forward, reverse or all-on, got `{other}`"))),
    };
    let matching = match (c.matching_l_h, c.matching_c_f) {
        (None, None) => None,
        (Some(l), Some(cap)) => {
            Some(MatchingNetwork::new(l, cap).map_err(|e| invalid("circulator.matching_l_h", e))?)
        }
        _ => return Err(invalid("circulator.matching_l_h", "matching_l_h and matching_c_f go together")),
    };

    let s = raw.switch;
    let ramp = match s.ramp.as_deref().unwrap_or("linear") {
        "linear" => Ramp::LinearImpedance,
        "instant" => Ramp::Instant,
        other => return Err(invalid("switch.ramp", format!("expected linear or instant, got `{other}`"))),
    };
    let t_switch = s.t_switch_s.unwrap_or(if ramp == Ramp::Instant { 0.0 } else { 6e-9 });
    let switch = SwitchModel::new(s.r_on_ohm.unwrap_or(3.0), s.r_off_ohm.unwrap_or(60e3), t_switch, ramp)
        .map_err(|e| invalid("switch", e))?;

    let d = raw.delay_line;
    let group_delay = positive("delay_line.group_delay_s", d.group_delay_s.unwrap_or(delta))?;
    let il = d.passband_il_db.unwrap_or(4.0);
    let line = match d.kind.as_deref().unwrap_or("band-pass") {
        "band-pass" => {
            let f_l = d.f_lower_hz.unwrap_or(150e6);
            let f_u = d.f_upper_hz.unwrap_or(160e6);
            DelayLineModel::ideal_band_pass(f_l, f_u, group_delay, il).with_skirt(d.skirt_hz.unwrap_or(5e6))
        }
        "low-pass" => {
            let f_u = d.f_upper_hz.unwrap_or(160e6);
            let dl = DelayLineModel::ideal_low_pass(f_u, group_delay, il);
            match d.skirt_hz {
                Some(sk) => dl.with_skirt(sk),
                None => dl,
            }
        }
        "all-pass" => DelayLineModel::all_pass(group_delay),
        "touchstone" => {
            let rel = d.s2p_path.ok_or_else(|| invalid("delay_line.s2p_path", "required for kind = \"touchstone\""))?;
            let path = match base {
                Some(b) if rel.is_relative() => b.join(&rel),
                _ => rel,
            };
            if !path.is_file() {
                return Err(invalid("delay_line.s2p_path", format!("{} does not exist", path.display())));
            }
            let resp = read_s2p(&path).map_err(|e| invalid("delay_line.s2p_path", e))?;
            DelayLineModel::sampled(resp, group_delay).map_err(|e| invalid("delay_line.s2p_path", e))?
        }
        other => {
            return Err(invalid(
                "delay_line.kind",
                format!("expected band-pass, low-pass, all-pass or touchstone, got `{other}`"),
            ))
        }
    };
    line.validate().map_err(|e| invalid("delay_line", e))?;

    let e = raw.engine;
    let circulator = CirculatorConfig {
        delta,
        f_mod,
        control,
        delay_line_a: line.clone(),
        delay_line_b: line,
        switch,
        shunt_switches: c.shunt_switches.unwrap_or(true),
        z0,
        sample_rate: e.sample_rate_hz.unwrap_or(DEFAULT_SAMPLE_RATE),
        n_periods: e.n_periods.unwrap_or(DEFAULT_N_PERIODS),
        matching,
        max_iterations: e.max_iterations.unwrap_or(DEFAULT_MAX_ITERATIONS),
        tolerance: e.tolerance.unwrap_or(DEFAULT_TOLERANCE),
    };
    circulator.validate().map_err(|e| invalid("circulator", e))?;
    let power_dbm = e.power_dbm.unwrap_or(0.0);
    if !power_dbm.is_finite() {
        return Err(invalid("engine.power_dbm", "must be finite"));
    }

    let sw = raw.sweep;
    let sweep = FrequencySweep {
        f_start: positive("sweep.f_start_hz", sw.f_start_hz.unwrap_or(140e6))?,
        f_stop: positive("sweep.f_stop_hz", sw.f_stop_hz.unwrap_or(172e6))?,
        f_step: positive("sweep.f_step_hz", sw.f_step_hz.unwrap_or(0.4e6))?,
    };
    if sweep.f_stop < sweep.f_start {
        return Err(invalid("sweep.f_stop_hz", "must not be below sweep.f_start_hz"));
    }
    let dd_ratios = ratio_list("sweep.dd_ratios", sw.dd_ratios.unwrap_or_else(|| grid(0.01, 0.99, 0.01)))?;
    let ts_ratios = ratio_list("sweep.ts_ratios", sw.ts_ratios.unwrap_or_else(|| grid(0.0, 0.5, 0.01)))?;
    let tone_orders = sw.tone_orders.unwrap_or(3);
    if tone_orders == 0 {
        return Err(invalid("sweep.tone_orders", "must be >= 1"));
    }

    let a = raw.analytic;
    let analytic = AnalyticSettings {
        carrier: positive("analytic.carrier_hz", a.carrier_hz.unwrap_or(155e6))?,
        harmonics: a.harmonics.unwrap_or(1000),
        bw_ratio_max: positive("analytic.bw_ratio_max", a.bw_ratio_max.unwrap_or(40.0))?,
        bw_ratio_step: positive("analytic.bw_ratio_step", a.bw_ratio_step.unwrap_or(0.01))?,
        carrier_positions: a.carrier_positions.unwrap_or_else(|| vec![0.5, 0.25]),
    };
    if analytic.harmonics == 0 {
        return Err(invalid("analytic.harmonics", "must be >= 1"));
    }
    if analytic.carrier_positions.is_empty() || analytic.carrier_positions.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(invalid("analytic.carrier_positions", "must be a non-empty list of values in [0, 1]"));
    }

    let sp = raw.spectrum;
    let spectrum = SpectrumSettings {
        carrier: positive("spectrum.carrier_hz", sp.carrier_hz.unwrap_or(155e6))?,
        source_port: port("spectrum.source_port", sp.source_port.unwrap_or(1))?,
        observe_port: port("spectrum.observe_port", sp.observe_port.unwrap_or(2))?,
        n_max: sp.n_max.unwrap_or(10),
    };

    let b = raw.bounce;
    let pulse = match (b.pulse_start_s, b.pulse_width_s) {
        (None, None) => None,
        (start, Some(w)) => Some((start.unwrap_or(0.0), positive("bounce.pulse_width_s", w)?)),
        (Some(_), None) => return Err(invalid("bounce.pulse_width_s", "required when bounce.pulse_start_s is set")),
    };
    let bounce = BounceSettings {
        source_port: port("bounce.source_port", b.source_port.unwrap_or(1))?,
        n_periods: b.n_periods.unwrap_or(3),
        pulse,
        switch_time: b.switch_time_s.unwrap_or(0.0),
    };
    if bounce.n_periods == 0 {
        return Err(invalid("bounce.n_periods", "must be >= 1"));
    }
    if !(bounce.switch_time >= 0.0 && bounce.switch_time.is_finite()) {
        return Err(invalid("bounce.switch_time_s", "must be finite and >= 0"));
    }

    let o = raw.output;
    let formats = match o.formats {
        Some(list) => {
            let parsed = list.iter().map(|s| Format::parse(s)).collect::<Result<Vec<_>, _>>();
            parsed.map_err(|e| invalid("output.formats", e))?
        }
        None => vec![Format::Csv],
    };
    let out_dir = o.dir.map(|d| match base {
        Some(b) if d.is_relative() => b.join(d),
        _ => d,
    });

    Ok(RunConfig {
        circulator,
        power_dbm,
        sweep,
        dd_ratios,
        ts_ratios,
        tone_orders,
        analytic,
        spectrum,
        bounce,
        out_dir,
        formats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_the_reference_circulator() {
        let cfg = parse("", None).unwrap();
        assert_eq!(cfg.circulator, CirculatorConfig::reference());
        assert_eq!(cfg.formats, vec![Format::Csv]);
    }

    #[test]
    fn f_mod_follows_delta() {
        let cfg = parse("circulator.delta_s = 285e-9", None).unwrap();
        assert!((cfg.circulator.f_mod - 877.19e3).abs() < 0.01e3);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = parse("switch.r_on = 3", None).unwrap_err();
        assert!(err.to_string().contains("r_on"), "{err}");
    }

    #[test]
    fn dd_ratio_of_one_is_rejected() {
        let err = parse("sweep.dd_ratios = [0.1, 1.0]", None).unwrap_err();
        assert!(err.to_string().contains("sweep.dd_ratios"), "{err}");
    }

    #[test]
    fn missing_touchstone_file_is_reported() {
        let err = parse("delay_line.kind = \"touchstone\"\ndelay_line.s2p_path = \"nope.s2p\"", None).unwrap_err();
        assert!(err.to_string().contains("delay_line.s2p_path"), "{err}");
    }
}
