//! Parameter maps over temperatures, flux, quality factor and leakage.
//!
//! Every grid point is solved independently. Rows come back in row-major
//! grid order (first axis slowest) whatever the execution mode, so serial and
//! parallel runs write identical files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rates::Channel;
use crate::spectrum::SpectrumError;
use crate::steady::SolveError;
use crate::transport::{
    circulation, classify_regime, rectification_2t, rectification_3t, Device, Solution, TransportError,
};

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid sweep: {0}")]
    Validation(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),
}

/// Quantity that can be varied along an axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parameter {
    BaseTemperature,
    HotTemperature,
    Flux,
    QualityFactor,
    /// `log10 Q`; the way to get logarithmic spacing in Q.
    Log10QualityFactor,
    LambdaOff,
}

impl Parameter {
    pub fn column(self) -> &'static str {
        match self {
            Parameter::BaseTemperature => "T",
            Parameter::HotTemperature => "T_H",
            Parameter::Flux => "phi",
            Parameter::QualityFactor => "Q",
            Parameter::Log10QualityFactor => "log10_Q",
            Parameter::LambdaOff => "lambda_off",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub parameter: Parameter,
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Axis {
    pub fn new(parameter: Parameter, min: f64, max: f64, points: usize) -> Self {
        Self { parameter, min, max, points }
    }

    /// Linearly spaced values; the last one is exactly `max`.
    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        (0..n)
            .map(|k| {
                if k + 1 == n {
                    self.max
                } else {
                    self.min + (self.max - self.min) * k as f64 / (n - 1) as f64
                }
            })
            .collect()
    }
}

/// Where a channel's temperature comes from at each grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemperatureSource {
    Base,
    Hot,
    /// `(T + T_H) / 2`.
    Mean,
    Fixed(f64),
}

impl TemperatureSource {
    fn resolve(self, base: f64, hot: f64) -> f64 {
        match self {
            TemperatureSource::Base => base,
            TemperatureSource::Hot => hot,
            TemperatureSource::Mean => 0.5 * (base + hot),
            TemperatureSource::Fixed(t) => t,
        }
    }
}

/// Temperature of the passive bath in three-terminal rectification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PassiveTemperature {
    #[default]
    Base,
    Mean,
    Fixed(f64),
}

/// Figures of merit available per grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Rectification { l: Channel, l_prime: Channel },
    TwoTerminalRectification { merged: [Channel; 2], single: Channel },
    Circulation,
    Regime,
}

impl Metric {
    pub fn column(&self) -> String {
        match self {
            Metric::Rectification { l, l_prime } => format!("R_{l}{l_prime}"),
            Metric::TwoTerminalRectification { merged, single } => {
                format!("R_({}{}){single}", merged[0], merged[1])
            }
            Metric::Circulation => "C".to_string(),
            Metric::Regime => "regime".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub name: String,
    pub device: Device,
    /// Base temperature `T` when it is not swept.
    pub base_temperature: f64,
    /// Hot temperature `T_H` when it is not swept.
    pub hot_temperature: f64,
    /// Per-channel temperature sources for the reported populations, currents
    /// and regime. Indexed by `Channel::index()`.
    pub template: [TemperatureSource; 3],
    #[serde(default)]
    pub passive: PassiveTemperature,
    pub axes: Vec<Axis>,
    #[serde(default)]
    pub metrics: Vec<Metric>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), SweepError> {
        let fail = |msg: String| Err(SweepError::Validation(msg));
        if self.axes.is_empty() || self.axes.len() > 2 {
            return fail(format!("{}: expected one or two axes, got {}", self.name, self.axes.len()));
        }
        if self.axes.len() == 2 && self.axes[0].parameter == self.axes[1].parameter {
            return fail(format!("axis {} listed twice", self.axes[0].parameter.column()));
        }
        let q_axes = self
            .axes
            .iter()
            .filter(|a| matches!(a.parameter, Parameter::QualityFactor | Parameter::Log10QualityFactor))
            .count();
        if q_axes > 1 {
            return fail("Q and log10 Q cannot both be swept".to_string());
        }
        for axis in &self.axes {
            let name = axis.parameter.column();
            if axis.points < 2 {
                return fail(format!("axis {name} needs at least 2 points, got {}", axis.points));
            }
            if !(axis.min.is_finite() && axis.max.is_finite() && axis.min < axis.max) {
                return fail(format!("axis {name} needs min < max, got [{}, {}]", axis.min, axis.max));
            }
            let lower_ok = match axis.parameter {
                Parameter::BaseTemperature | Parameter::HotTemperature | Parameter::LambdaOff => axis.min >= 0.0,
                Parameter::QualityFactor => axis.min > 0.0,
                Parameter::Flux | Parameter::Log10QualityFactor => true,
            };
            if !lower_ok {
                return fail(format!("axis {name} starts at an invalid value {}", axis.min));
            }
        }
        if !(self.base_temperature >= 0.0 && self.hot_temperature >= 0.0) {
            return fail("temperatures must be non-negative".to_string());
        }
        for src in self.template {
            if let TemperatureSource::Fixed(t) = src {
                if !(t >= 0.0) {
                    return fail(format!("fixed temperature {t} is negative"));
                }
            }
        }
        if let PassiveTemperature::Fixed(t) = self.passive {
            if !(t >= 0.0) {
                return fail(format!("passive temperature {t} is negative"));
            }
        }
        for (c, r) in Channel::ALL.iter().zip(&self.device.resonators) {
            if !(r.q > 0.0) || r.lambda_res < 0.0 || r.lambda_off < 0.0 {
                return fail(format!("resonator {c} has invalid Q or coupling"));
            }
            if let Some(w) = r.frequency {
                if !(w > 0.0) {
                    return fail(format!("resonator {c} frequency must be positive"));
                }
            }
        }
        for m in &self.metrics {
            match *m {
                Metric::Rectification { l, l_prime } if l == l_prime => {
                    return fail(format!("metric {} needs distinct channels", m.column()));
                }
                Metric::TwoTerminalRectification { merged, single }
                    if merged[0] == merged[1] || merged.contains(&single) =>
                {
                    return fail(format!("metric {} needs distinct channels", m.column()));
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn grid_size(&self) -> usize {
        self.axes.iter().map(|a| a.points).product()
    }

    /// Device and `(T, T_H)` at the given axis values.
    fn point_setup(&self, values: &[f64]) -> (Device, f64, f64) {
        let mut device = self.device.clone();
        let mut base = self.base_temperature;
        let mut hot = self.hot_temperature;
        for (axis, &v) in self.axes.iter().zip(values) {
            match axis.parameter {
                Parameter::BaseTemperature => base = v,
                Parameter::HotTemperature => hot = v,
                Parameter::Flux => device.circuit.phi = v,
                Parameter::QualityFactor => device.resonators.iter_mut().for_each(|r| r.q = v),
                Parameter::Log10QualityFactor => {
                    device.resonators.iter_mut().for_each(|r| r.q = 10f64.powf(v))
                }
                Parameter::LambdaOff => device.resonators.iter_mut().for_each(|r| r.lambda_off = v),
            }
        }
        (device, base, hot)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MetricValue {
    Number(f64),
    Label(String),
    /// Undefined coefficient or failed evaluation; see the row flags.
    Missing,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis_values: Vec<f64>,
    pub populations: Option<[f64; 3]>,
    pub currents: Option<[f64; 3]>,
    pub metrics: Vec<MetricValue>,
    pub residual: Option<f64>,
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub name: String,
    pub axis_names: Vec<&'static str>,
    pub metric_names: Vec<String>,
    pub rows: Vec<SweepRow>,
    /// Spec-level advisories (e.g. resonator linewidth against `ω32`).
    pub warnings: Vec<String>,
}

impl SweepResult {
    /// Number of metric cells left empty because the coefficient was 0/0.
    pub fn undefined_count(&self) -> usize {
        self.rows
            .iter()
            .flat_map(|r| r.flags.iter())
            .filter(|f| f.starts_with("undefined:"))
            .count()
    }

    pub fn failed_points(&self) -> usize {
        self.rows.iter().filter(|r| r.populations.is_none()).count()
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.metric_names.iter().position(|m| m == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

fn flag_for(err: &TransportError) -> String {
    match err {
        TransportError::Spectrum(SpectrumError::InvalidFlux { .. }) => "invalid_flux".to_string(),
        TransportError::Spectrum(_) => "invalid_spectrum".to_string(),
        TransportError::Solve(SolveError::ReducibleChain { .. }) => "reducible".to_string(),
        TransportError::Solve(_) => "solver".to_string(),
        TransportError::Rate(_) => "invalid_rates".to_string(),
        TransportError::UndefinedCoefficient => "undefined".to_string(),
        TransportError::AmbiguousExtremum(..) => "ambiguous_regime".to_string(),
        TransportError::InvalidScenario(_) => "invalid_scenario".to_string(),
    }
}

fn evaluate_metric(
    metric: Metric,
    spec: &SweepSpec,
    device: &Device,
    base: f64,
    hot: f64,
    solution: &Solution,
) -> Result<MetricValue, TransportError> {
    Ok(match metric {
        Metric::Rectification { l, l_prime } => {
            let passive = match spec.passive {
                PassiveTemperature::Base => None,
                PassiveTemperature::Mean => Some(0.5 * (base + hot)),
                PassiveTemperature::Fixed(t) => Some(t),
            };
            MetricValue::Number(rectification_3t(device, l, l_prime, base, hot, passive)?)
        }
        Metric::TwoTerminalRectification { merged, single } => {
            MetricValue::Number(rectification_2t(device, (merged[0], merged[1]), single, base, hot)?)
        }
        Metric::Circulation => MetricValue::Number(circulation(device, base, hot)?),
        Metric::Regime => {
            let cls = classify_regime(&solution.currents, &solution.temperatures)?;
            MetricValue::Label(cls.regime.to_string())
        }
    })
}

/// Evaluate a single grid point at explicit axis values.
pub fn evaluate_point(spec: &SweepSpec, values: &[f64]) -> SweepRow {
    let (device, base, hot) = spec.point_setup(values);
    let temperatures = spec.template.map(|s| s.resolve(base, hot));
    let mut row = SweepRow {
        axis_values: values.to_vec(),
        populations: None,
        currents: None,
        metrics: vec![MetricValue::Missing; spec.metrics.len()],
        residual: None,
        flags: Vec::new(),
    };
    let solution = match device.solve(temperatures) {
        Ok(s) => s,
        Err(e) => {
            row.flags.push(flag_for(&e));
            return row;
        }
    };
    row.populations = Some(solution.steady.p);
    row.currents = Some(solution.currents.j);
    row.residual = Some(solution.steady.residual);

    for (slot, &metric) in row.metrics.iter_mut().zip(&spec.metrics) {
        match evaluate_metric(metric, spec, &device, base, hot, &solution) {
            Ok(v) => *slot = v,
            Err(TransportError::UndefinedCoefficient) => row.flags.push(format!("undefined:{}", metric.column())),
            Err(e) => row.flags.push(format!("{}:{}", flag_for(&e), metric.column())),
        }
        if metric == Metric::Regime {
            if let Ok(cls) = classify_regime(&solution.currents, &solution.temperatures) {
                if cls.hybrid {
                    row.flags.push("hybrid".to_string());
                }
            }
        }
    }
    row
}

fn grid_values(spec: &SweepSpec, index: usize, axis_values: &[Vec<f64>]) -> Vec<f64> {
    let mut rem = index;
    let mut out = vec![0.0; axis_values.len()];
    for (k, vals) in axis_values.iter().enumerate().rev() {
        let n = spec.axes[k].points;
        out[k] = vals[rem % n];
        rem /= n;
    }
    out
}

pub fn run_map_with(spec: &SweepSpec, execution: Execution) -> Result<SweepResult, SweepError> {
    spec.validate()?;
    let axis_values: Vec<Vec<f64>> = spec.axes.iter().map(Axis::values).collect();
    let n = spec.grid_size();
    let eval = |i: usize| evaluate_point(spec, &grid_values(spec, i, &axis_values));
    let rows: Vec<SweepRow> = match execution {
        Execution::Serial => (0..n).map(eval).collect(),
        Execution::Parallel => (0..n).into_par_iter().map(eval).collect(),
    };
    let mut warnings = Vec::new();
    if !spec.device.circuit.is_transmon_regime() {
        warnings.push(format!(
            "E_J = {} is below 5 E_C = {}; perturbative spectrum may be inaccurate",
            spec.device.circuit.e_j,
            5.0 * spec.device.circuit.e_c
        ));
    }
    Ok(SweepResult {
        name: spec.name.clone(),
        axis_names: spec.axes.iter().map(|a| a.parameter.column()).collect(),
        metric_names: spec.metrics.iter().map(Metric::column).collect(),
        rows,
        warnings,
    })
}

/// Evaluate the whole grid in parallel.
pub fn run_map(spec: &SweepSpec) -> Result<SweepResult, SweepError> {
    run_map_with(spec, Execution::Parallel)
}

/// Map with a flux axis. Resonators left unpinned follow the spectrum at each
/// flux value; points outside `cos(φ/3) > 0` are flagged `invalid_flux`.
pub fn run_flux_sweep(spec: &SweepSpec) -> Result<SweepResult, SweepError> {
    if !spec.axes.iter().any(|a| a.parameter == Parameter::Flux) {
        return Err(SweepError::Validation(format!("{}: flux sweep without a flux axis", spec.name)));
    }
    run_map(spec)
}

/// Map with a `Q` or `log10 Q` axis. Adds a warning when the broadest
/// resonator linewidth `ω_l / Q_min` reaches the `ω32` spacing.
pub fn run_q_sweep(spec: &SweepSpec) -> Result<SweepResult, SweepError> {
    let axis = spec
        .axes
        .iter()
        .find(|a| matches!(a.parameter, Parameter::QualityFactor | Parameter::Log10QualityFactor))
        .ok_or_else(|| SweepError::Validation(format!("{}: Q sweep without a quality-factor axis", spec.name)))?;
    let q_min = match axis.parameter {
        Parameter::QualityFactor => axis.min,
        _ => 10f64.powf(axis.min),
    };
    let mut result = run_map(spec)?;
    if let Ok(spectrum) = spec.device.spectrum() {
        for c in Channel::ALL {
            let omega = spec.device.resonators[c.index()]
                .frequency
                .unwrap_or_else(|| c.resonant_transition().frequency(&spectrum));
            let width = omega / q_min;
            if width >= spectrum.omega32 {
                result.warnings.push(format!(
                    "resonator {c}: linewidth {width:.4} at Q = {q_min} reaches ω32 = {:.4}; higher levels may be populated",
                    spectrum.omega32
                ));
            }
        }
    }
    Ok(result)
}

fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write the result as CSV: axes, populations, currents, metrics, residual,
/// flags. Floats carry 17 significant digits; missing values are empty.
pub fn write_csv_to<W: Write>(result: &SweepResult, out: W) -> Result<(), SweepError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = result.axis_names.iter().map(|s| s.to_string()).collect();
    header.extend(["p0", "p1", "p2", "j_a", "j_b", "j_c"].map(String::from));
    header.extend(result.metric_names.iter().cloned());
    header.extend(["residual", "flags"].map(String::from));
    w.write_record(&header)?;

    for row in &result.rows {
        let mut rec: Vec<String> = row.axis_values.iter().map(|&v| fmt_float(v)).collect();
        let triple = |x: Option<[f64; 3]>| match x {
            Some(v) => v.map(fmt_float).to_vec(),
            None => vec![String::new(); 3],
        };
        rec.extend(triple(row.populations));
        rec.extend(triple(row.currents));
        rec.extend(row.metrics.iter().map(|m| match m {
            MetricValue::Number(x) => fmt_float(*x),
            MetricValue::Label(s) => s.clone(),
            MetricValue::Missing => String::new(),
        }));
        rec.push(row.residual.map(fmt_float).unwrap_or_default());
        rec.push(if row.flags.is_empty() { "ok".to_string() } else { row.flags.join(";") });
        w.write_record(&rec)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_csv(result: &SweepResult, destination: &Path) -> Result<(), SweepError> {
    let io_err = |source| SweepError::Io { path: destination.to_path_buf(), source };
    let file = File::create(destination).map_err(io_err)?;
    let mut buf = BufWriter::new(file);
    write_csv_to(result, &mut buf)?;
    buf.flush().map_err(io_err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::CircuitParams;
    use std::f64::consts::PI;

    fn base_spec() -> SweepSpec {
        SweepSpec {
            name: "test".into(),
            device: Device::symmetric(CircuitParams::new(5.0, 0.5, PI / 2.0).unwrap(), 100.0, 1.0, 1.0),
            base_temperature: 0.9,
            hot_temperature: 3.0,
            template: [TemperatureSource::Hot, TemperatureSource::Base, TemperatureSource::Base],
            passive: PassiveTemperature::Base,
            axes: vec![Axis::new(Parameter::HotTemperature, 1.0, 3.0, 5)],
            metrics: vec![],
        }
    }

    #[test]
    fn axis_values_hit_endpoints() {
        let v = Axis::new(Parameter::Flux, 0.0, 1.0, 11).values();
        assert_eq!(v.len(), 11);
        assert_eq!(v[0], 0.0);
        assert_eq!(v[10], 1.0);
    }

    #[test]
    fn degenerate_grid_rejected() {
        let mut spec = base_spec();
        spec.axes = vec![Axis::new(Parameter::HotTemperature, 1.0, 1.0, 1)];
        assert!(matches!(run_map(&spec), Err(SweepError::Validation(_))));
        spec.axes = vec![Axis::new(Parameter::BaseTemperature, -1.0, 1.0, 3)];
        assert!(matches!(run_map(&spec), Err(SweepError::Validation(_))));
        spec.axes = vec![];
        assert!(matches!(run_map(&spec), Err(SweepError::Validation(_))));
    }

    #[test]
    fn row_major_order() {
        let mut spec = base_spec();
        spec.axes = vec![
            Axis::new(Parameter::BaseTemperature, 0.5, 1.0, 2),
            Axis::new(Parameter::HotTemperature, 1.0, 3.0, 3),
        ];
        let res = run_map(&spec).unwrap();
        let got: Vec<Vec<f64>> = res.rows.iter().map(|r| r.axis_values.clone()).collect();
        assert_eq!(
            got,
            vec![
                vec![0.5, 1.0],
                vec![0.5, 2.0],
                vec![0.5, 3.0],
                vec![1.0, 1.0],
                vec![1.0, 2.0],
                vec![1.0, 3.0]
            ]
        );
    }

    #[test]
    fn empty_metric_list_columns() {
        let res = run_map(&base_spec()).unwrap();
        let mut buf = Vec::new();
        write_csv_to(&res, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "T_H,p0,p1,p2,j_a,j_b,j_c,residual,flags");
        assert_eq!(text.lines().count(), 6);
    }

    #[test]
    fn invalid_flux_row_kept() {
        let mut spec = base_spec();
        spec.axes = vec![Axis::new(Parameter::Flux, 4.0, 5.0, 3)];
        spec.metrics = vec![Metric::Circulation];
        let res = run_flux_sweep(&spec).unwrap();
        let last = res.rows.last().unwrap();
        assert!(last.populations.is_none());
        assert_eq!(last.flags, vec!["invalid_flux".to_string()]);
        assert_eq!(last.metrics, vec![MetricValue::Missing]);
        let mut buf = Vec::new();
        write_csv_to(&res, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().last().unwrap().ends_with(",,,,,,,,invalid_flux"));
    }

    #[test]
    fn undefined_coefficient_is_empty_field() {
        let mut spec = base_spec();
        spec.axes = vec![Axis::new(Parameter::HotTemperature, 0.9, 1.9, 2)];
        spec.metrics = vec![Metric::Rectification { l: Channel::A, l_prime: Channel::B }];
        let res = run_map(&spec).unwrap();
        assert_eq!(res.rows[0].metrics[0], MetricValue::Missing);
        assert_eq!(res.rows[0].flags, vec!["undefined:R_ab".to_string()]);
        assert_eq!(res.undefined_count(), 1);
        assert!(matches!(res.rows[1].metrics[0], MetricValue::Number(_)));
    }

    #[test]
    fn q_sweep_requires_axis_and_warns_for_broad_lines() {
        assert!(run_q_sweep(&base_spec()).is_err());
        let mut spec = base_spec();
        spec.axes = vec![Axis::new(Parameter::QualityFactor, 1.0, 10.0, 2)];
        let res = run_q_sweep(&spec).unwrap();
        assert!(res.warnings.iter().any(|w| w.contains("linewidth")));
    }

    #[test]
    fn serial_equals_parallel() {
        let mut spec = base_spec();
        spec.axes = vec![
            Axis::new(Parameter::BaseTemperature, 0.3, 1.2, 7),
            Axis::new(Parameter::HotTemperature, 0.5, 4.0, 9),
        ];
        spec.metrics = vec![Metric::Circulation, Metric::Regime];
        let a = run_map_with(&spec, Execution::Serial).unwrap();
        let b = run_map_with(&spec, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }
}
