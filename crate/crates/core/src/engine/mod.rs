//! Steady-state simulation of the four-port switched delay-line circulator.
//!
//! Port 1 and port 3 sit on the left ends of delay lines A and B, ports 2 and 4
//! on the right ends. Each port reaches each line through one switch; the
//! control ladders `L1, R1, L2, R2` (offsets `0, δ, 2δ, 3δ`) steer every wave
//! so that it leaves the line at the next port in the sequence 1→2→3→4→1.

mod bounce;
mod config;
mod extract;
mod junction;
mod solver;

pub use bounce::{
    bounce_trace, BounceExcitation, BounceTrace, Direction, Fate, PortReflection, Segment, AMPLITUDE_FLOOR,
    MAX_SEGMENTS,
};
pub use config::{
    CirculatorConfig, ControlAssignment, Line, DEFAULT_DELTA, DEFAULT_MAX_ITERATIONS, DEFAULT_N_PERIODS,
    DEFAULT_SAMPLE_RATE, DEFAULT_TOLERANCE,
};
pub use extract::{
    amplitude_from_dbm, band_summary, dbm_from_amplitude, extract_column, extract_spectrum, extract_sparams, group_delay,
    spectrum_of, switch_module_testbench, BandSummary, SParamColumn, SParamPoint, SwitchModuleResult, Tone, ToneSpectrum, ToneTag,
};
pub use junction::{junction_matrix, port_terminal, switch_phase, JunctionMatrix, JunctionSchedule, Side};
pub use solver::{
    carrier_bin, carrier_grid, simulate_tone, snap_frequency, Circuit, SimulationResult, ENERGY_GROWTH_LIMIT_DB,
    LINE_ENDS,
};
