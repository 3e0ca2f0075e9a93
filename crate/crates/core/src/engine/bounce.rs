//! Event-based bounce diagrams.
//!
//! Lines are pure delays and switches are ideal gates. A wave segment arriving
//! at a line end is cut at the switch edges there; each piece is delivered to
//! whichever port is connected at that moment, or reflected back into the line
//! when none is.

use super::config::{require_instant, CirculatorConfig, ControlAssignment, Line};
use super::junction::{port_terminal, Side};
use crate::error::{Error, Result};

/// Hard cap on the number of traced segments.
pub const MAX_SEGMENTS: usize = 200_000;

/// Segments weaker than this (relative to the source) are absorbed.
pub const AMPLITUDE_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BounceExcitation {
    /// Rectangular pulse over `[start, start + width)`.
    Pulse { start: f64, width: f64 },
    /// Source on for the whole trace.
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// From the port 1/3 side towards the port 2/4 side.
    Forward,
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fate {
    Delivered(usize),
    /// Reached a line end with no switch on and was sent back.
    Reflected,
    /// Decayed below [`AMPLITUDE_FLOOR`].
    Absorbed,
    /// Still travelling when the trace ends.
    Unresolved,
}

/// A piece of wave launched into a line over `[t_start, t_end)` that arrives
/// at the far end `delay` later.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub line: Line,
    pub direction: Direction,
    pub t_start: f64,
    pub t_end: f64,
    pub delay: f64,
    /// Amplitude at launch, relative to the source.
    pub amplitude: f64,
    pub origin_port: usize,
    pub fate: Fate,
}

impl Segment {
    pub fn arrival(&self) -> (f64, f64) {
        (self.t_start + self.delay, self.t_end + self.delay)
    }

    pub fn duration(&self) -> f64 {
        self.t_end - self.t_start
    }
}

/// Source energy turned back at the source port because no switch was on.
#[derive(Debug, Clone, PartialEq)]
pub struct PortReflection {
    pub port: usize,
    pub t_start: f64,
    pub t_end: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BounceTrace {
    pub horizon: f64,
    pub segments: Vec<Segment>,
    pub port_reflections: Vec<PortReflection>,
}

impl BounceTrace {
    pub fn delivered_to(&self, port: usize) -> impl Iterator<Item = &Segment> {
        self.segments.iter().filter(move |s| s.fate == Fate::Delivered(port))
    }
}

struct Gates {
    offsets: [f64; 4],
    period: f64,
    half: f64,
    settle: f64,
}

impl Gates {
    /// Control offset for the switch between terminal `t` of `side` and `line`.
    fn offset(&self, side: Side, t: usize, line: Line) -> f64 {
        let family_one = (t == 0) == (line == Line::A);
        // offsets are L1, R1, L2, R2
        let idx = match (side, family_one) {
            (Side::Left, true) => 0,
            (Side::Right, true) => 1,
            (Side::Left, false) => 2,
            (Side::Right, false) => 3,
        };
        self.offsets[idx]
    }

    /// Sub-intervals of `[a, b)` where the switch with `offset` is on and settled.
    fn on_pieces(&self, offset: f64, a: f64, b: f64) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        let mut m = ((a - offset) / self.period).floor() - 1.0;
        loop {
            let start = offset + m * self.period + self.settle;
            let end = offset + m * self.period + self.half;
            if start >= b {
                break;
            }
            let (lo, hi) = (start.max(a), end.min(b));
            if hi > lo {
                out.push((lo, hi));
            }
            m += 1.0;
        }
        out
    }

    /// Split `[a, b)` among the connections `(label, offset)`; pieces with no
    /// connection come back with `None`.
    fn split<T: Copy>(&self, a: f64, b: f64, conns: [(T, f64); 2]) -> Result<Vec<(f64, f64, Option<T>)>> {
        let mut pieces: Vec<(f64, f64, Option<T>)> = Vec::new();
        for (label, offset) in conns {
            pieces.extend(self.on_pieces(offset, a, b).into_iter().map(|(lo, hi)| (lo, hi, Some(label))));
        }
        pieces.sort_by(|x, y| x.0.total_cmp(&y.0));
        // edges computed from different offsets may disagree by rounding
        let eps = 1e-12 * self.period;
        let mut out = Vec::new();
        let mut cursor = a;
        for (lo, hi, label) in pieces {
            if lo < cursor - eps {
                return Err(Error::invalid("control", "two switches on the same terminal are on at once"));
            }
            if lo > cursor + eps {
                out.push((cursor, lo, None));
            }
            let lo = if (lo - cursor).abs() <= eps { cursor } else { lo };
            if hi > lo {
                out.push((lo, hi, label));
                cursor = hi;
            }
        }
        if cursor < b - eps {
            out.push((cursor, b, None));
        }
        Ok(out)
    }
}

struct Launch {
    line: Line,
    direction: Direction,
    t0: f64,
    t1: f64,
    amplitude: f64,
    origin: usize,
}

/// Trace a pulse or continuous excitation at `source_port` for `n_periods`
/// modulation periods.
///
/// `switch_time` (seconds, may be zero) models finite switching in event
/// terms: a switch only conducts from `switch_time` after its turn-on edge,
/// so waves arriving during a transition are reflected.
pub fn bounce_trace(
    cfg: &CirculatorConfig,
    source_port: usize,
    excitation: BounceExcitation,
    n_periods: usize,
    switch_time: f64,
) -> Result<BounceTrace> {
    cfg.validate()?;
    require_instant(&cfg.switch)?;
    if cfg.control == ControlAssignment::AllOn {
        return Err(Error::invalid("control", "bounce tracing needs switched (not all-on) control"));
    }
    if n_periods == 0 {
        return Err(Error::invalid("n_periods", "must be >= 1"));
    }
    let q = cfg.control_quarter();
    if !(switch_time >= 0.0 && switch_time < 2.0 * q) {
        return Err(Error::invalid("switch_time", "must lie in [0, 2δ)"));
    }
    let (src_side, src_t) = port_terminal(source_port)?;
    let horizon = n_periods as f64 * 4.0 * q;
    let (s0, s1) = match excitation {
        BounceExcitation::Pulse { start, width } => {
            if !(width > 0.0 && width <= 0.25 * cfg.delta) {
                return Err(Error::invalid("pulse_width", "must lie in (0, δ/4]"));
            }
            if !(start.is_finite() && start >= 0.0) {
                return Err(Error::invalid("pulse_start", "must be finite and >= 0"));
            }
            (start, start + width)
        }
        BounceExcitation::Continuous => (0.0, horizon),
    };
    let gates = Gates {
        offsets: cfg.control.offsets(q).expect("switched control"),
        period: 4.0 * q,
        half: 2.0 * q,
        settle: switch_time,
    };
    let delay = |line: Line| cfg.line(line).group_delay;
    let loss = |line: Line| 10f64.powf(-cfg.line(line).passband_il_db / 20.0);

    let mut trace = BounceTrace { horizon, segments: Vec::new(), port_reflections: Vec::new() };
    let mut queue: Vec<Launch> = Vec::new();
    let direction_from = |side: Side| match side {
        Side::Left => Direction::Forward,
        Side::Right => Direction::Backward,
    };
    let conns = [(Line::A, gates.offset(src_side, src_t, Line::A)), (Line::B, gates.offset(src_side, src_t, Line::B))];
    for (lo, hi, line) in gates.split(s0, s1, conns)? {
        match line {
            Some(line) => queue.push(Launch {
                line,
                direction: direction_from(src_side),
                t0: lo,
                t1: hi,
                amplitude: 1.0,
                origin: source_port,
            }),
            None => trace.port_reflections.push(PortReflection { port: source_port, t_start: lo, t_end: hi }),
        }
    }
    queue.reverse();

    while let Some(l) = queue.pop() {
        if l.t0 >= horizon {
            continue;
        }
        if trace.segments.len() >= MAX_SEGMENTS {
            return Err(Error::invalid("n_periods", format!("trace exceeds {MAX_SEGMENTS} segments")));
        }
        let d = delay(l.line);
        let segment = |t0: f64, t1: f64, fate: Fate| Segment {
            line: l.line,
            direction: l.direction,
            t_start: t0,
            t_end: t1,
            delay: d,
            amplitude: l.amplitude,
            origin_port: l.origin,
            fate,
        };
        if l.t0 + d >= horizon {
            trace.segments.push(segment(l.t0, l.t1, Fate::Unresolved));
            continue;
        }
        let far = match l.direction {
            Direction::Forward => Side::Right,
            Direction::Backward => Side::Left,
        };
        let ports = far.ports();
        // far-end gates seen in launch time, so launch windows stay exact
        let conns = [(ports[0], gates.offset(far, 0, l.line) - d), (ports[1], gates.offset(far, 1, l.line) - d)];
        let arriving = l.amplitude * loss(l.line);
        let mut echoes = Vec::new();
        for (lo, hi, port) in gates.split(l.t0, l.t1, conns)? {
            match port {
                Some(p) => trace.segments.push(segment(lo, hi, Fate::Delivered(p))),
                None if arriving < AMPLITUDE_FLOOR => trace.segments.push(segment(lo, hi, Fate::Absorbed)),
                None => {
                    trace.segments.push(segment(lo, hi, Fate::Reflected));
                    echoes.push(Launch {
                        line: l.line,
                        direction: direction_from(far),
                        t0: lo + d,
                        t1: hi + d,
                        amplitude: arriving,
                        origin: l.origin,
                    });
                }
            }
        }
        echoes.reverse();
        queue.extend(echoes);
    }
    trace.segments.sort_by(|a, b| a.t_start.total_cmp(&b.t_start).then(a.line.name().cmp(b.line.name())));
    Ok(trace)
}
