//! Terminal-behaviour models of the physical parts: switches, delay lines,
//! L-C matching sections and the Touchstone reader/writer for measured lines.

mod delay_line;
mod switch;
mod touchstone;
mod two_port;

pub use delay_line::{
    frequency_response, impulse_response, DelayLineModel, DelayLineVariant, ImpulseResponse, SampledResponse,
    DEFAULT_SKIRT_FRACTION, MAX_TRUNCATION,
};
pub use switch::{switch_impedance, Ramp, SwitchModel, SwitchPhase};
pub use touchstone::{format_s2p, parse_s2p, read_s2p, write_s2p, TouchstoneFormat};
pub use two_port::{
    abcd_to_s, cascade, flip, identity_two_port, is_passive, match_two_port, max_singular_value, MatchingNetwork,
    SMatrix2,
};
