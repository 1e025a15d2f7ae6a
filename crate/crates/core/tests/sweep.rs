use std::f64::consts::PI;

use qutrit_heat::presets::{preset, standard_device};
use qutrit_heat::sweep::{
    evaluate_point, run_flux_sweep, run_map, run_q_sweep, write_csv, write_csv_to, Axis, Metric, MetricValue,
    Parameter, PassiveTemperature, SweepError, SweepSpec, TemperatureSource,
};

fn map_spec() -> SweepSpec {
    SweepSpec {
        name: "map".into(),
        device: standard_device(100.0, 1.0),
        base_temperature: 0.9,
        hot_temperature: 4.0,
        template: [TemperatureSource::Hot, TemperatureSource::Base, TemperatureSource::Base],
        passive: PassiveTemperature::Base,
        axes: vec![Axis::new(Parameter::HotTemperature, 3.0, 4.0, 3)],
        metrics: vec![Metric::Circulation],
    }
}

#[test]
fn flux_point_matches_map() {
    let map = run_map(&map_spec()).unwrap();
    let mut flux = map_spec();
    flux.axes = vec![Axis::new(Parameter::Flux, 0.0, PI / 2.0, 2)];
    let swept = run_flux_sweep(&flux).unwrap();
    let last_map = map.rows.last().unwrap();
    let last_flux = swept.rows.last().unwrap();
    assert_eq!(last_flux.axis_values, vec![PI / 2.0]);
    assert_eq!(last_map.populations, last_flux.populations);
    assert_eq!(last_map.metrics, last_flux.metrics);
    assert_eq!(evaluate_point(&flux, &[PI / 2.0]), *last_flux);
}

#[test]
fn flux_changes_the_spectrum_per_point() {
    let mut spec = map_spec();
    spec.axes = vec![Axis::new(Parameter::Flux, 0.0, 3.0, 4)];
    let res = run_flux_sweep(&spec).unwrap();
    let p0: Vec<f64> = res.rows.iter().map(|r| r.populations.unwrap()[0]).collect();
    assert!(p0.windows(2).all(|w| w[0] != w[1]));
}

#[test]
fn flux_sweep_needs_flux_axis() {
    assert!(matches!(run_flux_sweep(&map_spec()), Err(SweepError::Validation(_))));
}

#[test]
fn log_q_axis_sets_quality_factor() {
    let mut spec = map_spec();
    spec.axes = vec![Axis::new(Parameter::Log10QualityFactor, 2.0, 3.0, 2)];
    let a = run_q_sweep(&spec).unwrap();
    let mut plain = map_spec();
    plain.device = standard_device(1000.0, 1.0);
    plain.axes = vec![Axis::new(Parameter::BaseTemperature, 0.5, 0.9, 2)];
    let b = run_map(&plain).unwrap();
    assert_eq!(a.rows[1].populations, b.rows[1].populations);
    assert!(a.warnings.is_empty());
}

#[test]
fn fig7c_changes_sign() {
    let res = run_flux_sweep(&preset("fig7c").unwrap()).unwrap();
    let c: Vec<f64> = res
        .rows
        .iter()
        .filter_map(|r| match r.metrics[0] {
            MetricValue::Number(x) => Some(x),
            _ => None,
        })
        .collect();
    assert!(c.iter().any(|&x| x > 0.0) && c.iter().any(|&x| x < 0.0));
}

#[test]
fn file_and_stream_output_agree() {
    let res = run_map(&map_spec()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    write_csv(&res, &path).unwrap();
    let mut buf = Vec::new();
    write_csv_to(&res, &mut buf).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), buf);
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().next().unwrap(), "T_H,p0,p1,p2,j_a,j_b,j_c,C,residual,flags");
    // 17 significant digits
    let first = text.lines().nth(1).unwrap().split(',').nth(1).unwrap();
    assert_eq!(first.split('e').next().unwrap().len(), 18);
}

#[test]
fn unwritable_path_is_reported() {
    let res = run_map(&map_spec()).unwrap();
    let path = std::path::Path::new("/nonexistent-dir/out.csv");
    let err = write_csv(&res, path).unwrap_err();
    assert!(matches!(err, SweepError::Io { .. }));
    assert!(err.to_string().contains("/nonexistent-dir/out.csv"));
}

#[test]
fn spec_round_trips_through_json() {
    for name in qutrit_heat::presets::PRESET_NAMES {
        let spec = preset(name).unwrap();
        let text = serde_json::to_string(&spec).unwrap();
        let back: SweepSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);
    }
}
