//! Resistive switch junctions at each end of the delay lines.
//!
//! Each side is a four-terminal network: two circulator ports and the two
//! line ends. Every port is joined to every line end by one series switch,
//! split in two halves around a midpoint node that can be grounded by an
//! optional shunt switch driven with the complementary control. Terminals are
//! loaded by `z0`, so the junction is fully described by a real 4×4 scattering
//! matrix per sample.

use nalgebra::{SMatrix, SVector};

use super::config::CirculatorConfig;
use crate::components::{switch_impedance, SwitchModel, SwitchPhase};
use crate::error::{Error, Result};

/// Real junction scattering matrix, terminals ordered
/// `(port a, port b, line A end, line B end)`.
pub type JunctionMatrix = [[f64; 4]; 4];

/// Which end of the lines a junction sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Ports 1 and 3, controls `L1`/`L2`.
    Left,
    /// Ports 2 and 4, controls `R1`/`R2`.
    Right,
}

impl Side {
    /// Circulator port numbers of terminals 0 and 1.
    pub fn ports(self) -> [usize; 2] {
        match self {
            Side::Left => [1, 3],
            Side::Right => [2, 4],
        }
    }
}

/// Side and terminal index of a 1-based circulator port.
pub fn port_terminal(port: usize) -> Result<(Side, usize)> {
    match port {
        1 => Ok((Side::Left, 0)),
        3 => Ok((Side::Left, 1)),
        2 => Ok((Side::Right, 0)),
        4 => Ok((Side::Right, 1)),
        _ => Err(Error::invalid("port", format!("must be 1..=4, got {port}"))),
    }
}

/// Phase of a switch with on-window `[offset, offset + P/2)` (in samples,
/// period `P`) at the midpoint of sample `k`, with elapsed time since the last
/// edge in seconds.
pub fn switch_phase(k: i64, offset: i64, period: usize, t_switch: f64, sample_rate: f64) -> (SwitchPhase, f64) {
    let p = period as f64;
    let pos = (k - offset).rem_euclid(period as i64) as f64 + 0.5;
    let half = 0.5 * p;
    let (on, since_edge) = if pos < half { (true, pos) } else { (false, pos - half) };
    let tau = since_edge / sample_rate;
    match (on, tau < t_switch) {
        (true, true) => (SwitchPhase::TurningOn, tau),
        (true, false) => (SwitchPhase::On, tau),
        (false, true) => (SwitchPhase::TurningOff, tau),
        (false, false) => (SwitchPhase::Off, tau),
    }
}

fn complement(phase: SwitchPhase) -> SwitchPhase {
    match phase {
        SwitchPhase::On => SwitchPhase::Off,
        SwitchPhase::Off => SwitchPhase::On,
        SwitchPhase::TurningOn => SwitchPhase::TurningOff,
        SwitchPhase::TurningOff => SwitchPhase::TurningOn,
    }
}

fn resistance(sw: &SwitchModel, phase: SwitchPhase, tau: f64) -> Result<f64> {
    match phase {
        SwitchPhase::On | SwitchPhase::Off => switch_impedance(sw, phase, 0.0),
        _ => switch_impedance(sw, phase, tau),
    }
}

/// Scattering matrix of one junction given the series resistance of its two
/// switch families (`g1`: port a–line A and port b–line B; `g2`: the cross
/// paths) and, optionally, the shunt resistances.
pub fn junction_matrix(r1: f64, r2: f64, shunt: Option<(f64, f64)>, z0: f64) -> Result<JunctionMatrix> {
    // Nodes 0..4 are terminals, 4..8 the path midpoints.
    // Paths: (0,2) g1, (0,3) g2, (1,2) g2, (1,3) g1.
    const PATHS: [(usize, usize, usize); 4] = [(0, 2, 0), (0, 3, 1), (1, 2, 1), (1, 3, 0)];
    let mut y = SMatrix::<f64, 8, 8>::zeros();
    for t in 0..4 {
        y[(t, t)] += 1.0 / z0;
    }
    for (i, &(a, b, family)) in PATHS.iter().enumerate() {
        let r = if family == 0 { r1 } else { r2 };
        let g = 2.0 / r;
        let x = 4 + i;
        for end in [a, b] {
            y[(end, end)] += g;
            y[(x, x)] += g;
            y[(end, x)] -= g;
            y[(x, end)] -= g;
        }
        if let Some((sh1, sh2)) = shunt {
            y[(x, x)] += 1.0 / if family == 0 { sh1 } else { sh2 };
        }
    }
    let chol = y
        .cholesky()
        .ok_or_else(|| Error::Degenerate("junction admittance matrix is not positive definite".into()))?;
    let mut s = [[0.0; 4]; 4];
    for j in 0..4 {
        let mut rhs = SVector::<f64, 8>::zeros();
        rhs[j] = 1.0;
        let z = chol.solve(&rhs);
        for i in 0..4 {
            s[i][j] = 2.0 / z0 * z[i] - if i == j { 1.0 } else { 0.0 };
        }
    }
    Ok(s)
}

/// Junction matrices of both sides for every sample of one modulation period.
#[derive(Debug, Clone)]
pub struct JunctionSchedule {
    pub period: usize,
    pub left: Vec<JunctionMatrix>,
    pub right: Vec<JunctionMatrix>,
}

impl JunctionSchedule {
    pub fn new(cfg: &CirculatorConfig) -> Result<Self> {
        let period = cfg.period_samples();
        let offsets = cfg.control.offsets(cfg.control_quarter());
        let sw = &cfg.switch;
        let ts = sw.transition_time();
        let fs = cfg.sample_rate;
        let side = |a: usize, b: usize| -> Result<Vec<JunctionMatrix>> {
            let mut cache: Vec<((SwitchPhase, u64, SwitchPhase, u64), JunctionMatrix)> = Vec::new();
            (0..period as i64)
                .map(|k| {
                    let (p1, t1, p2, t2) = match offsets {
                        None => (SwitchPhase::On, 0.0, SwitchPhase::On, 0.0),
                        Some(o) => {
                            let o1 = (o[a] * fs).round() as i64;
                            let o2 = (o[b] * fs).round() as i64;
                            let (p1, t1) = switch_phase(k, o1, period, ts, fs);
                            let (p2, t2) = switch_phase(k, o2, period, ts, fs);
                            (p1, t1, p2, t2)
                        }
                    };
                    let key = (p1, t1.to_bits(), p2, t2.to_bits());
                    if let Some((_, m)) = cache.iter().find(|(c, _)| *c == key) {
                        return Ok(*m);
                    }
                    let r1 = resistance(sw, p1, t1)?;
                    let r2 = resistance(sw, p2, t2)?;
                    let shunt = if cfg.shunt_switches && offsets.is_some() {
                        Some((resistance(sw, complement(p1), t1)?, resistance(sw, complement(p2), t2)?))
                    } else {
                        None
                    };
                    let m = junction_matrix(r1, r2, shunt, cfg.z0)?;
                    cache.push((key, m));
                    Ok(m)
                })
                .collect()
        };
        // Offsets are ordered L1, R1, L2, R2.
        Ok(Self { period, left: side(0, 2)?, right: side(1, 3)? })
    }

    pub fn at(&self, side: Side, k: usize) -> &JunctionMatrix {
        let m = match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        };
        &m[k % self.period]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ideal_junction_routes_straight_through() {
        let s = junction_matrix(1e-6, 1e9, None, 50.0).unwrap();
        assert_abs_diff_eq!(s[2][0], 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(s[3][1], 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(s[0][0], 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(s[3][0], 0.0, epsilon = 1e-6);
    }

    #[test]
    fn junction_is_reciprocal_and_passive() {
        for (r1, r2) in [(3.0, 60e3), (100.0, 200.0), (30e3, 30e3)] {
            for shunt in [None, Some((60e3, 3.0))] {
                let s = junction_matrix(r1, r2, shunt, 50.0).unwrap();
                for i in 0..4 {
                    let col: f64 = (0..4).map(|r| s[r][i] * s[r][i]).sum();
                    assert!(col <= 1.0 + 1e-12);
                    for j in 0..4 {
                        assert_abs_diff_eq!(s[i][j], s[j][i], epsilon = 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn series_resistor_transmission() {
        // one path of 3 Ω between 50 Ω loads: S21 = 2·50/(100 + 3)
        let s = junction_matrix(3.0, 1e15, None, 50.0).unwrap();
        assert_abs_diff_eq!(s[2][0], 100.0 / 103.0, epsilon = 1e-9);
    }

    #[test]
    fn phase_sequence() {
        let fs = 1.0;
        assert_eq!(switch_phase(0, 0, 8, 0.0, fs).0, SwitchPhase::On);
        assert_eq!(switch_phase(3, 0, 8, 0.0, fs).0, SwitchPhase::On);
        assert_eq!(switch_phase(4, 0, 8, 0.0, fs).0, SwitchPhase::Off);
        assert_eq!(switch_phase(-1, 0, 8, 0.0, fs).0, SwitchPhase::Off);
        assert_eq!(switch_phase(0, 0, 8, 1.0, fs), (SwitchPhase::TurningOn, 0.5));
        assert_eq!(switch_phase(5, 0, 8, 2.0, fs), (SwitchPhase::TurningOff, 1.5));
    }
}
