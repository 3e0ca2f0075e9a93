//! One function per subcommand; each returns the tables to write.

use clap::ValueEnum;
use num_complex::Complex64;
use rayon::prelude::*;
use swdl_core::analytic::{
    deviation_il, deviation_isolation, il_curve, modulated_tone_level, switch_time_effects, PassbandShape, TonePlan,
    TonePort,
};
use swdl_core::components::{Ramp, SwitchModel};
use swdl_core::engine::{
    band_summary, bounce_trace, carrier_grid, extract_spectrum, extract_sparams, snap_frequency,
    switch_module_testbench, BandSummary, BounceExcitation, CirculatorConfig, Direction, Fate, SParamColumn,
    SParamPoint,
};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{Cell, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Filtering loss against normalised delay-line bandwidth.
    AnalyticIl,
    /// Loss, isolation and tone levels against delay deviation.
    AnalyticDeviation,
    /// Extra loss and tone levels against switch time.
    AnalyticSwitchtime,
    /// Full 4×4 S-parameters over the frequency sweep.
    SimSparams,
    /// Intermodulation tones at one port.
    SimSpectrum,
    /// Event trace of wave segments through the lines.
    SimBounce,
    /// Loss against bandwidth for centred and off-centre carriers.
    ReproFig5,
    /// Loss and isolation against delay deviation.
    ReproFig7,
    /// Switch-time loss, closed form next to the switch-module testbench.
    ReproFig9,
    /// S-parameters of the configured circulator with a pass-band summary.
    ReproFig17,
}

/// What a command produced: tables to write and lines to print.
pub struct Report {
    pub tables: Vec<Table>,
    pub notes: Vec<String>,
}

pub fn run(cmd: Command, cfg: &RunConfig) -> Result<Report, CliError> {
    let tables = match cmd {
        Command::AnalyticIl => vec![il_table("analytic_il", cfg, &cfg.analytic.carrier_positions, cfg.analytic.bw_ratio_max, cfg.analytic.bw_ratio_step)?],
        Command::ReproFig5 => vec![il_table("fig5", cfg, &[0.5, 0.25], 40.0, 0.01)?],
        Command::AnalyticDeviation => vec![deviation_table(cfg)?],
        Command::ReproFig7 => fig7(cfg)?,
        Command::AnalyticSwitchtime => vec![switchtime_table(cfg)?],
        Command::ReproFig9 => vec![fig9(cfg)?],
        Command::SimSparams => vec![sparams_table("sparams", &sparams(cfg)?)],
        Command::SimSpectrum => vec![spectrum(cfg)?],
        Command::SimBounce => bounce(cfg)?,
        Command::ReproFig17 => {
            let pts = sparams(cfg)?;
            let summary = summarise(&pts)?;
            let notes = vec![format!(
                "min IL {:.2} dB at {:.3} MHz, isolation {:.1} dB, bandwidth {:.2} MHz centred at {:.2} MHz",
                summary.min_il_db,
                summary.f_min_il / 1e6,
                summary.min_isolation_db,
                summary.bandwidth / 1e6,
                summary.centre / 1e6
            )];
            return Ok(Report { tables: vec![sparams_table("fig17_sparams", &pts), summary_table(&summary)], notes });
        }
    };
    Ok(Report { tables, notes: Vec::new() })
}

fn ratio_grid(max: f64, step: f64) -> Vec<f64> {
    let n = (max / step + 1e-9).floor() as usize;
    (0..=n).map(|i| i as f64 * step).collect()
}

fn il_table(name: &str, cfg: &RunConfig, positions: &[f64], max: f64, step: f64) -> Result<Table, CliError> {
    let plan = TonePlan::new(cfg.analytic.carrier, cfg.circulator.f_mod, cfg.analytic.harmonics);
    let grid = ratio_grid(max, step);
    let mut columns = vec!["bw_over_fm".to_string()];
    let mut curves = Vec::new();
    for shape in [PassbandShape::BandPass, PassbandShape::LowPass] {
        for &pos in positions {
            let label = if shape == PassbandShape::BandPass { "bandpass" } else { "lowpass" };
            columns.push(format!("il_{label}_c{pos}_db"));
            curves.push(il_curve(&plan, shape, &grid, pos)?);
        }
    }
    let mut t = Table::with_columns(name, columns);
    for (i, &x) in grid.iter().enumerate() {
        let mut row = vec![Cell::Num(x)];
        row.extend(curves.iter().map(|c| Cell::Num(c[i].1)));
        t.push(row);
    }
    let ys = (1..t.columns.len()).collect();
    Ok(t.plot("Filtering loss", 0, ys, "IL (dB)"))
}

fn deviation_table(cfg: &RunConfig) -> Result<Table, CliError> {
    let n = cfg.tone_orders as i64;
    let mut columns: Vec<String> = ["dd_ratio", "il_db", "isolation_db"].iter().map(|s| s.to_string()).collect();
    columns.extend((1..=n).map(|k| format!("through_n{k}_dbc")));
    columns.extend((1..=n).map(|k| format!("isolated_n{k}_dbc")));
    let mut t = Table::with_columns("analytic_deviation", columns);
    for &r in &cfg.dd_ratios {
        let mut row = vec![Cell::Num(r), Cell::Num(deviation_il(r)?), Cell::Num(deviation_isolation(r)?)];
        for k in 1..=n {
            row.push(Cell::Num(modulated_tone_level(TonePort::Through, k, r)?));
        }
        for k in 1..=n {
            let v = if r == 0.0 { f64::NAN } else { modulated_tone_level(TonePort::Isolated, k, r)? };
            row.push(Cell::Num(v));
        }
        t.push(row);
    }
    Ok(t.plot("Delay deviation", 0, vec![1, 2], "dB"))
}

fn fig7(cfg: &RunConfig) -> Result<Vec<Table>, CliError> {
    let mut il = Table::new("fig7_il", &["dd_ratio", "il_db"]);
    let mut iso = Table::new("fig7_isolation", &["dd_ratio", "isolation_db"]);
    for &r in &cfg.dd_ratios {
        il.push(vec![Cell::Num(r), Cell::Num(deviation_il(r)?)]);
        iso.push(vec![Cell::Num(r), Cell::Num(deviation_isolation(r)?)]);
    }
    Ok(vec![
        il.plot("Insertion loss against delay deviation", 0, vec![1], "IL (dB)"),
        iso.plot("Isolation against delay deviation", 0, vec![1], "Isolation (dB)"),
    ])
}

fn switchtime_table(cfg: &RunConfig) -> Result<Table, CliError> {
    let n = cfg.tone_orders as i64;
    let mut columns = vec!["ts_ratio".to_string(), "extra_il_db".to_string()];
    for k in 1..=n {
        columns.push(format!("tone_n{k}_dbc"));
        columns.push(format!("tone_n-{k}_dbc"));
    }
    let mut t = Table::with_columns("analytic_switchtime", columns);
    for &r in &cfg.ts_ratios {
        let e = switch_time_effects(r, cfg.tone_orders)?;
        let mut row = vec![Cell::Num(r), Cell::Num(e.il_db)];
        for k in 1..=n {
            row.push(Cell::Num(e.tone_levels[&k]));
            row.push(Cell::Num(e.tone_levels[&-k]));
        }
        t.push(row);
    }
    Ok(t.plot("Switch time", 0, vec![1], "extra IL (dB)"))
}

fn with_switch_time(cfg: &CirculatorConfig, ratio: f64) -> Result<CirculatorConfig, CliError> {
    let sw = cfg.switch;
    let (t, ramp) = if ratio == 0.0 { (0.0, Ramp::Instant) } else { (ratio * 2.0 * cfg.delta, Ramp::LinearImpedance) };
    let switch = SwitchModel::new(sw.r_on, sw.r_off, t, ramp)?;
    Ok(CirculatorConfig { switch, ..cfg.clone() })
}

fn fig9(cfg: &RunConfig) -> Result<Table, CliError> {
    let circ = &cfg.circulator;
    let f = snap_frequency(circ, cfg.analytic.carrier)?;
    let base = switch_module_testbench(&with_switch_time(circ, 0.0)?, f)?.il_db;
    let rows = cfg
        .ts_ratios
        .par_iter()
        .map(|&r| {
            let bench = switch_module_testbench(&with_switch_time(circ, r)?, f)?.il_db;
            let analytic = switch_time_effects(r, 1)?.il_db;
            Ok(vec![Cell::Num(r), Cell::Num(analytic), Cell::Num(bench), Cell::Num(bench - base)])
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut t = Table::new("fig9", &["ts_ratio", "analytic_extra_il_db", "testbench_il_db", "testbench_extra_il_db"]);
    rows.into_iter().for_each(|r| t.push(r));
    Ok(t.plot("Extra loss from switch time", 0, vec![1, 3], "extra IL (dB)"))
}

/// Carriers in the sweep range, thinned to the requested spacing.
fn sweep_grid(cfg: &RunConfig) -> Result<Vec<f64>, CliError> {
    let s = &cfg.sweep;
    let mut grid = Vec::new();
    for f in carrier_grid(&cfg.circulator, s.f_start, s.f_stop) {
        if grid.last().map_or(true, |&last: &f64| f - last >= s.f_step * (1.0 - 1e-9)) {
            grid.push(f);
        }
    }
    if grid.is_empty() {
        return Err(CliError::Validation(format!(
            "sweep: no valid carrier between {} and {} Hz",
            s.f_start, s.f_stop
        )));
    }
    Ok(grid)
}

fn sparams(cfg: &RunConfig) -> Result<Vec<SParamPoint>, CliError> {
    Ok(extract_sparams(&cfg.circulator, &sweep_grid(cfg)?, cfg.power_dbm)?)
}

fn sparams_table(name: &str, pts: &[SParamPoint]) -> Table {
    let mut columns = vec!["freq_hz".to_string()];
    for i in 1..=4 {
        for j in 1..=4 {
            columns.push(format!("s{i}{j}_db"));
            columns.push(format!("s{i}{j}_deg"));
        }
    }
    let mut t = Table::with_columns(name, columns);
    for p in pts {
        let mut row = vec![Cell::Num(p.freq)];
        for i in 0..4 {
            for j in 0..4 {
                let s: Complex64 = p.s[(i, j)];
                row.push(Cell::Num(swdl_core::analytic::level_db_from_amplitude(s.norm())));
                row.push(Cell::Num(s.arg().to_degrees()));
            }
        }
        t.push(row);
    }
    let col = |i: usize, j: usize| 1 + 2 * (4 * (i - 1) + (j - 1));
    t.plot("S-parameters", 0, vec![col(2, 1), col(1, 2), col(4, 1), col(1, 1)], "|S| (dB)")
}

fn summarise(pts: &[SParamPoint]) -> Result<BandSummary, CliError> {
    let cols: Vec<SParamColumn> = pts
        .iter()
        .map(|p| SParamColumn { freq: p.freq, source_port: 1, s: std::array::from_fn(|i| p.s[(i, 0)]) })
        .collect();
    Ok(band_summary(&cols)?)
}

fn summary_table(b: &BandSummary) -> Table {
    let mut t = Table::new(
        "fig17_summary",
        &["min_il_db", "f_min_il_hz", "f_lower_hz", "f_upper_hz", "bandwidth_hz", "centre_hz", "min_isolation_db"],
    );
    t.push(
        [b.min_il_db, b.f_min_il, b.f_lo, b.f_hi, b.bandwidth, b.centre, b.min_isolation_db]
            .into_iter()
            .map(Cell::Num)
            .collect(),
    );
    t
}

fn spectrum(cfg: &RunConfig) -> Result<Table, CliError> {
    let s = &cfg.spectrum;
    let f = snap_frequency(&cfg.circulator, s.carrier)?;
    let spec = extract_spectrum(&cfg.circulator, s.source_port, f, s.observe_port, cfg.power_dbm, s.n_max)?;
    let mut t = Table::new("spectrum", &["n", "freq_hz", "power_dbm", "dbc"]);
    for tone in &spec.tones {
        t.push(vec![Cell::Int(tone.n), Cell::Num(tone.freq), Cell::Num(tone.power_dbm), Cell::Num(tone.dbc)]);
    }
    Ok(t.plot(&format!("Tones at port {}", s.observe_port), 1, vec![2], "power (dBm)"))
}

fn bounce(cfg: &RunConfig) -> Result<Vec<Table>, CliError> {
    let b = &cfg.bounce;
    let circ = CirculatorConfig { switch: SwitchModel::ideal(), ..cfg.circulator.clone() };
    let excitation = match b.pulse {
        Some((start, width)) => BounceExcitation::Pulse { start, width },
        None => BounceExcitation::Continuous,
    };
    let trace = bounce_trace(&circ, b.source_port, excitation, b.n_periods, b.switch_time)?;
    let mut seg = Table::new(
        "bounce",
        &[
            "segment",
            "line",
            "direction",
            "t_start_s",
            "t_end_s",
            "arrival_start_s",
            "arrival_end_s",
            "amplitude",
            "origin_port",
            "fate",
        ],
    );
    for (i, s) in trace.segments.iter().enumerate() {
        let (a0, a1) = s.arrival();
        let fate = match s.fate {
            Fate::Delivered(p) => format!("delivered:{p}"),
            Fate::Reflected => "reflected".into(),
            Fate::Absorbed => "absorbed".into(),
            Fate::Unresolved => "unresolved".into(),
        };
        let dir = match s.direction {
            Direction::Forward => "forward",
            Direction::Backward => "backward",
        };
        seg.push(vec![
            Cell::Int(i as i64),
            Cell::Text(s.line.name().into()),
            Cell::Text(dir.into()),
            Cell::Num(s.t_start),
            Cell::Num(s.t_end),
            Cell::Num(a0),
            Cell::Num(a1),
            Cell::Num(s.amplitude),
            Cell::Int(s.origin_port as i64),
            Cell::Text(fate),
        ]);
    }
    let mut refl = Table::new("bounce_port_reflections", &["port", "t_start_s", "t_end_s"]);
    for r in &trace.port_reflections {
        refl.push(vec![Cell::Int(r.port as i64), Cell::Num(r.t_start), Cell::Num(r.t_end)]);
    }
    Ok(vec![seg, refl])
}
