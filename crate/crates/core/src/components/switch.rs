use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ramp {
    /// Zero-time transitions; requires `t_switch == 0`.
    Instant,
    /// Impedance moves linearly between `r_off` and `r_on` over `t_switch`.
    LinearImpedance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SwitchPhase {
    On,
    Off,
    TurningOn,
    TurningOff,
}

/// Series switch with finite on/off resistance and a linear impedance ramp.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchModel {
    pub r_on: f64,
    pub r_off: f64,
    pub t_switch: f64,
    pub ramp: Ramp,
}

impl SwitchModel {
    pub fn new(r_on: f64, r_off: f64, t_switch: f64, ramp: Ramp) -> Result<Self> {
        let sw = Self { r_on, r_off, t_switch, ramp };
        sw.validate()?;
        Ok(sw)
    }

    /// Near-perfect switch (1 µΩ / 1 GΩ, instant).
    pub fn ideal() -> Self {
        Self { r_on: 1e-6, r_off: 1e9, t_switch: 0.0, ramp: Ramp::Instant }
    }

    /// 3 Ω on, 60 kΩ off, 6 ns linear ramp.
    pub fn reference() -> Self {
        Self { r_on: 3.0, r_off: 60e3, t_switch: 6e-9, ramp: Ramp::LinearImpedance }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_on > 0.0 && self.r_off > self.r_on && self.r_off.is_finite()) {
            return Err(Error::invalid(
                "r_on",
                format!("need 0 < r_on < r_off < inf, got r_on = {}, r_off = {}", self.r_on, self.r_off),
            ));
        }
        if !(self.t_switch.is_finite() && self.t_switch >= 0.0) {
            return Err(Error::invalid("t_switch", "must be finite and >= 0"));
        }
        if self.ramp == Ramp::Instant && self.t_switch != 0.0 {
            return Err(Error::invalid("t_switch", "an instant switch must have t_switch = 0"));
        }
        Ok(())
    }

    /// Effective transition time (zero for instant switches).
    pub fn transition_time(&self) -> f64 {
        match self.ramp {
            Ramp::Instant => 0.0,
            Ramp::LinearImpedance => self.t_switch,
        }
    }

    pub fn impedance(&self, phase: SwitchPhase, tau: f64) -> Result<f64> {
        switch_impedance(self, phase, tau)
    }
}

/// Instantaneous resistance of `sw` in `phase`, `tau` seconds after the edge.
pub fn switch_impedance(sw: &SwitchModel, phase: SwitchPhase, tau: f64) -> Result<f64> {
    sw.validate()?;
    let ts = sw.transition_time();
    match phase {
        SwitchPhase::On => Ok(sw.r_on),
        SwitchPhase::Off => Ok(sw.r_off),
        SwitchPhase::TurningOn | SwitchPhase::TurningOff => {
            if !(tau >= 0.0 && tau <= ts) {
                return Err(Error::invalid("tau", format!("must lie in [0, {ts}], got {tau}")));
            }
            let x = if ts == 0.0 { 1.0 } else { tau / ts };
            Ok(match phase {
                SwitchPhase::TurningOn => sw.r_off + (sw.r_on - sw.r_off) * x,
                _ => sw.r_on + (sw.r_off - sw.r_on) * x,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ramp_endpoints_and_midpoint() {
        let sw = SwitchModel::reference();
        assert_eq!(sw.impedance(SwitchPhase::TurningOn, 0.0).unwrap(), 60e3);
        assert_eq!(sw.impedance(SwitchPhase::TurningOn, 6e-9).unwrap(), 3.0);
        assert_eq!(sw.impedance(SwitchPhase::TurningOn, 3e-9).unwrap(), 0.5 * (3.0 + 60e3));
        assert_eq!(sw.impedance(SwitchPhase::TurningOff, 0.0).unwrap(), 3.0);
        assert_eq!(sw.impedance(SwitchPhase::TurningOff, 6e-9).unwrap(), 60e3);
        assert_eq!(sw.impedance(SwitchPhase::On, 1.0).unwrap(), 3.0);
        assert_eq!(sw.impedance(SwitchPhase::Off, 1.0).unwrap(), 60e3);
    }

    #[test]
    fn tau_outside_ramp_is_rejected() {
        let sw = SwitchModel::reference();
        assert!(sw.impedance(SwitchPhase::TurningOn, 7e-9).is_err());
        assert!(sw.impedance(SwitchPhase::TurningOff, -1e-12).is_err());
    }

    #[test]
    fn invariants() {
        assert!(SwitchModel::new(3.0, 2.0, 0.0, Ramp::Instant).is_err());
        assert!(SwitchModel::new(0.0, 2.0, 0.0, Ramp::Instant).is_err());
        assert!(SwitchModel::new(1.0, 2.0, 1e-9, Ramp::Instant).is_err());
        assert!(SwitchModel::new(1.0, 2.0, 1e-9, Ramp::LinearImpedance).is_ok());
    }
}
