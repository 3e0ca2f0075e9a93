use std::f64::consts::PI;

use num_complex::Complex64;
use swdl_core::analytic::{
    deviation_il, deviation_isolation, il_filtering, modulated_tone_level, PassbandSpec, TonePlan, TonePort,
};
use swdl_core::components::{DelayLineModel, SwitchModel};
use swdl_core::engine::{
    bounce_trace, carrier_grid, extract_column, extract_spectrum, extract_sparams, group_delay, simulate_tone,
    switch_module_testbench, BounceExcitation, CirculatorConfig, ControlAssignment, Fate, Line,
};

const FS: f64 = 1e9;
const QUARTER: usize = 200;

fn db(x: Complex64) -> f64 {
    20.0 * x.norm().log10()
}

/// Lossless all-pass lines, ideal switches, 200-sample control quarter.
fn ideal() -> CirculatorConfig {
    CirculatorConfig::ideal(QUARTER as f64 / FS, FS)
}

/// Lines shorter than the control quarter by `dd_ratio · 2δ`.
fn detuned(dd_ratio: f64) -> CirculatorConfig {
    let mut cfg = ideal();
    let d = (QUARTER as f64 - 2.0 * QUARTER as f64 * dd_ratio).round() / FS;
    cfg.delay_line_a = DelayLineModel::all_pass(d);
    cfg.delay_line_b = DelayLineModel::all_pass(d);
    cfg
}

fn carrier(cfg: &CirculatorConfig) -> f64 {
    carrier_grid(cfg, 100e6, 101e6)[0]
}

#[test]
fn ideal_circulation() {
    let cfg = ideal();
    let f = carrier(&cfg);
    let pts = extract_sparams(&cfg, &[f], 0.0).unwrap();
    let s = &pts[0].s;
    let expected = Complex64::from_polar(1.0, -2.0 * PI * f * cfg.delta);
    for (i, j) in [(1, 0), (2, 1), (3, 2), (0, 3)] {
        assert!(db(s[(i, j)]).abs() < 0.01, "S{}{} = {} dB", i + 1, j + 1, db(s[(i, j)]));
        assert!((s[(i, j)] / expected).arg().abs() < 1e-6);
    }
    for (i, j) in [(0, 1), (3, 0), (2, 0), (0, 0)] {
        assert!(db(s[(i, j)]) < -60.0, "S{}{} = {} dB", i + 1, j + 1, db(s[(i, j)]));
    }
}

#[test]
fn reverse_assignment_reverses_circulation() {
    let mut cfg = ideal();
    cfg.control = ControlAssignment::Reverse;
    let f = carrier(&cfg);
    let col = extract_column(&cfg, &[f], 2, 0.0).unwrap();
    assert!(db(col[0].s[0]).abs() < 0.01);
    assert!(db(col[0].s[2]) < -60.0);
}

#[test]
fn static_mode_is_reciprocal() {
    let mut cfg = ideal();
    cfg.control = ControlAssignment::AllOn;
    let f = carrier(&cfg);
    let s = &extract_sparams(&cfg, &[f], 0.0).unwrap()[0].s;
    for i in 0..4 {
        for j in 0..4 {
            let asym = (s[(i, j)] - s[(j, i)]).norm();
            assert!(asym < 1e-4, "S{}{} vs S{}{}", i + 1, j + 1, j + 1, i + 1);
        }
    }
}

#[test]
fn delay_deviation_matches_closed_forms() {
    for r in [0.1, 0.4] {
        let cfg = detuned(r);
        let f = carrier(&cfg);
        let col = extract_column(&cfg, &[f], 1, 0.0).unwrap();
        let il = -db(col[0].s[1]);
        let iso = -db(col[0].s[3]);
        assert!((il - deviation_il(r).unwrap()).abs() < 0.2, "r={r}: IL {il}");
        assert!((iso - deviation_isolation(r).unwrap()).abs() < 0.2, "r={r}: iso {iso}");
        let spec = extract_spectrum(&cfg, 1, f, 2, 0.0, 8).unwrap();
        for n in 1..=3 {
            let expected = modulated_tone_level(TonePort::Through, n, r).unwrap();
            let got = spec.tone(2 * n).unwrap().dbc;
            if expected > -60.0 {
                assert!((got - expected).abs() < 0.5, "r={r} n={n}: {got} vs {expected}");
            }
        }
    }
}

#[test]
fn narrowband_line_costs_twice_the_filtering_loss() {
    let mut cfg = ideal();
    let f = carrier_grid(&cfg, 20e6, 21e6)[0];
    let bw = 0.5 * cfg.f_mod;
    let line = DelayLineModel::ideal_band_pass(f - bw / 2.0, f + bw / 2.0, cfg.delta, 0.0).with_skirt(0.0);
    cfg.delay_line_a = line.clone();
    cfg.delay_line_b = line;
    let col = extract_column(&cfg, &[f], 1, 0.0).unwrap();
    let plan = TonePlan::new(f, cfg.f_mod, 200);
    let analytic = il_filtering(&plan, &PassbandSpec::band_pass(f - bw / 2.0, f + bw / 2.0)).unwrap();
    assert!((-db(col[0].s[1]) - 2.0 * analytic).abs() < 0.01, "{} vs {}", -db(col[0].s[1]), analytic);
}

#[test]
fn lossless_run_conserves_energy() {
    let cfg = detuned(0.2);
    let f = carrier(&cfg);
    let r = simulate_tone(&cfg, 1, f, 1.0, cfg.n_periods).unwrap();
    let p_in: f64 = r.incident[0].iter().map(|x| x * x).sum();
    let p_out: f64 = r.reflected.iter().flat_map(|v| v.iter()).map(|x| x * x).sum();
    assert!((p_out / p_in - 1.0).abs() < 1e-3, "{}", p_out / p_in);
}

#[test]
fn ideal_path_group_delay() {
    let cfg = ideal();
    let grid = carrier_grid(&cfg, 100e6, 110e6);
    let col = extract_column(&cfg, &grid, 1, 0.0).unwrap();
    let s21: Vec<Complex64> = col.iter().map(|c| c.s[1]).collect();
    for g in group_delay(&grid, &s21).unwrap() {
        assert!((g - cfg.delta).abs() < 1.0 / FS);
    }
}

#[test]
fn switch_module_dynamic_loss() {
    let cfg = ideal();
    let f = carrier(&cfg);
    let ideal_loss = switch_module_testbench(&cfg, f).unwrap().il_db;
    assert!((ideal_loss - 6.02).abs() < 0.05, "{ideal_loss}");
    let mut last = ideal_loss;
    for ts in [2e-9, 10e-9, 40e-9, 100e-9] {
        let mut c = cfg.clone();
        c.switch = SwitchModel::new(1e-6, 1e9, ts, swdl_core::components::Ramp::LinearImpedance).unwrap();
        let il = switch_module_testbench(&c, f).unwrap().il_db;
        assert!(il > last, "ts={ts}: {il} <= {last}");
        last = il;
    }
}

#[test]
fn bounce_leakage_per_half_period() {
    let q = 1.0;
    let mut cfg = CirculatorConfig::ideal(q, 64.0);
    let dd = 0.2;
    cfg.delay_line_a = DelayLineModel::all_pass(q - dd);
    cfg.delay_line_b = DelayLineModel::all_pass(q - dd);
    let n_periods = 3;
    let t = bounce_trace(&cfg, 1, BounceExcitation::Continuous, n_periods, 0.0).unwrap();
    let leaks: Vec<_> = t.delivered_to(4).filter(|s| s.arrival().1 <= t.horizon).collect();
    assert!(leaks.len() >= 2 * n_periods - 1);
    for s in &leaks {
        assert!((s.duration() / (2.0 * q) - dd / 2.0).abs() < 1e-12 || s.t_start == 0.0);
    }
    assert!(t.segments.iter().all(|s| s.fate != Fate::Reflected));
    assert!(t.segments.iter().any(|s| s.line == Line::B));
}

#[test]
fn reference_circulator_has_four_fold_symmetry() {
    let cfg = CirculatorConfig::reference();
    let f = carrier_grid(&cfg, 155e6, 156e6)[0];
    let s = &extract_sparams(&cfg, &[f], 0.0).unwrap()[0].s;
    let through: Vec<f64> = [(1, 0), (2, 1), (3, 2), (0, 3)].iter().map(|&(i, j)| db(s[(i, j)])).collect();
    let reverse: Vec<f64> = [(0, 1), (1, 2), (2, 3), (3, 0)].iter().map(|&(i, j)| db(s[(i, j)])).collect();
    for set in [through, reverse] {
        let spread = set.iter().cloned().fold(f64::MIN, f64::max) - set.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread <= 0.05, "{set:?}");
    }
}

#[test]
fn whole_period_control_shift_changes_nothing() {
    let cfg = CirculatorConfig::reference();
    let f = carrier_grid(&cfg, 152e6, 153e6)[0];
    let q = cfg.control_quarter();
    let mut shifted = cfg.clone();
    shifted.control = ControlAssignment::Custom([8.0 * q, 9.0 * q, 6.0 * q, 3.0 * q]);
    let a = extract_column(&cfg, &[f], 1, 0.0).unwrap();
    let b = extract_column(&shifted, &[f], 1, 0.0).unwrap();
    for i in 0..4 {
        assert!((a[0].s[i].norm() - b[0].s[i].norm()).abs() < 1e-12);
    }
}
