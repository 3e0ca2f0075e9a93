use crate::components::{DelayLineModel, MatchingNetwork, Ramp, SwitchModel};
use crate::error::{Error, Result};

/// Assignment of the four control signals to the switch ladders.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ControlAssignment {
    /// `L1, R1, L2, R2` at offsets `0, δ, 2δ, 3δ`: circulation 1→2→3→4→1.
    Forward,
    /// `R1` and `R2` swapped: circulation 1→4→3→2→1.
    Reverse,
    /// Every switch held on (no modulation).
    AllOn,
    /// Explicit offsets of `L1, R1, L2, R2` in seconds.
    Custom([f64; 4]),
}

impl ControlAssignment {
    /// Offsets of `L1, R1, L2, R2` for control quarter-period `quarter`, or
    /// `None` when the switches are static.
    pub fn offsets(&self, quarter: f64) -> Option<[f64; 4]> {
        match self {
            ControlAssignment::Forward => Some([0.0, quarter, 2.0 * quarter, 3.0 * quarter]),
            ControlAssignment::Reverse => Some([0.0, 3.0 * quarter, 2.0 * quarter, quarter]),
            ControlAssignment::AllOn => None,
            ControlAssignment::Custom(p) => Some(*p),
        }
    }
}

/// Full description of the four-port circulator.
#[derive(Debug, Clone, PartialEq)]
pub struct CirculatorConfig {
    /// Nominal line delay δ.
    pub delta: f64,
    /// Switching frequency; `1/(4δ)` for synchronous operation.
    pub f_mod: f64,
    pub control: ControlAssignment,
    pub delay_line_a: DelayLineModel,
    pub delay_line_b: DelayLineModel,
    pub switch: SwitchModel,
    pub shunt_switches: bool,
    pub z0: f64,
    pub sample_rate: f64,
    /// Modulation periods in one steady-state window.
    pub n_periods: usize,
    /// Matching section placed on both ends of each line.
    pub matching: Option<MatchingNetwork>,
    pub max_iterations: usize,
    /// Relative change of the line waves at which the solver stops.
    pub tolerance: f64,
}

pub const DEFAULT_DELTA: f64 = 285e-9;
pub const DEFAULT_SAMPLE_RATE: f64 = 3.2e9;
pub const DEFAULT_N_PERIODS: usize = 4;
pub const DEFAULT_MAX_ITERATIONS: usize = 20_000;
pub const DEFAULT_TOLERANCE: f64 = 1e-11;

impl CirculatorConfig {
    /// 4 dB / 150–160 MHz / 285 ns lines, 3 Ω / 60 kΩ / 6 ns switches with
    /// shunt switches, synchronous 877.19 kHz control, 50 Ω ports.
    pub fn reference() -> Self {
        Self {
            delta: DEFAULT_DELTA,
            f_mod: 1.0 / (4.0 * DEFAULT_DELTA),
            control: ControlAssignment::Forward,
            delay_line_a: DelayLineModel::reference(),
            delay_line_b: DelayLineModel::reference(),
            switch: SwitchModel::reference(),
            shunt_switches: true,
            z0: 50.0,
            sample_rate: DEFAULT_SAMPLE_RATE,
            n_periods: DEFAULT_N_PERIODS,
            matching: None,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            tolerance: DEFAULT_TOLERANCE,
        }
    }

    /// Lossless all-pass lines of delay `delta` and near-ideal instant switches.
    pub fn ideal(delta: f64, sample_rate: f64) -> Self {
        Self {
            delta,
            f_mod: 1.0 / (4.0 * delta),
            delay_line_a: DelayLineModel::all_pass(delta),
            delay_line_b: DelayLineModel::all_pass(delta),
            switch: SwitchModel::ideal(),
            shunt_switches: false,
            sample_rate,
            ..Self::reference()
        }
    }

    /// Quarter period of the control waveforms, `1/(4 f_mod)`.
    pub fn control_quarter(&self) -> f64 {
        0.25 / self.f_mod
    }

    /// Samples per modulation period.
    pub fn period_samples(&self) -> usize {
        (self.sample_rate / self.f_mod).round() as usize
    }

    pub fn window_samples(&self) -> usize {
        self.period_samples() * self.n_periods
    }

    pub fn line(&self, which: Line) -> DelayLineModel {
        let dl = match which {
            Line::A => &self.delay_line_a,
            Line::B => &self.delay_line_b,
        };
        match self.matching {
            Some(mn) => dl.clone().with_matching(mn, self.z0),
            None => dl.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite_pos = |v: f64| v.is_finite() && v > 0.0;
        if !finite_pos(self.delta) {
            return Err(Error::invalid("delta", "must be finite and > 0"));
        }
        if !finite_pos(self.f_mod) {
            return Err(Error::invalid("f_mod", "must be finite and > 0"));
        }
        if !finite_pos(self.z0) {
            return Err(Error::invalid("z0", "must be finite and > 0"));
        }
        if !finite_pos(self.sample_rate) {
            return Err(Error::invalid("sample_rate", "must be finite and > 0"));
        }
        if self.n_periods == 0 {
            return Err(Error::invalid("n_periods", "must be >= 1"));
        }
        if self.max_iterations == 0 {
            return Err(Error::invalid("max_iterations", "must be >= 1"));
        }
        if !(self.tolerance > 0.0 && self.tolerance < 1.0) {
            return Err(Error::invalid("tolerance", "must lie in (0, 1)"));
        }
        self.switch.validate()?;
        if let Some(mn) = &self.matching {
            mn.validate()?;
        }
        let period = self.sample_rate / self.f_mod;
        if (period - period.round()).abs() > 1e-6 * period.max(1.0) {
            return Err(Error::invalid(
                "sample_rate",
                format!("sample_rate/f_mod = {period} must be an integer (commensurate grid)"),
            ));
        }
        if let Some(offsets) = self.control.offsets(self.control_quarter()) {
            for o in offsets {
                let k = o * self.sample_rate;
                if !k.is_finite() || (k - k.round()).abs() > 1e-6 {
                    return Err(Error::invalid(
                        "control",
                        format!("control offset {o} s does not fall on the sample grid"),
                    ));
                }
            }
        }
        if self.switch.t_switch >= 2.0 * self.control_quarter() {
            return Err(Error::invalid("t_switch", "must be shorter than half the modulation period"));
        }
        for which in [Line::A, Line::B] {
            let dl = self.line(which);
            dl.validate()?;
            let top = dl.highest_frequency();
            if top.is_finite() && self.sample_rate < 20.0 * dl.f_u {
                return Err(Error::invalid(
                    "sample_rate",
                    format!("must be at least 20·f_u = {} Hz of line {which:?}", 20.0 * dl.f_u),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Line {
    A,
    B,
}

impl Line {
    pub fn name(self) -> &'static str {
        match self {
            Line::A => "A",
            Line::B => "B",
        }
    }
}

/// Reject ramps the event-based bounce tracer cannot represent.
pub(crate) fn require_instant(sw: &SwitchModel) -> Result<()> {
    if sw.ramp != Ramp::Instant {
        return Err(Error::invalid("switch.ramp", "bounce tracing needs instant switches"));
    }
    Ok(())
}
