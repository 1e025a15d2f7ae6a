//! Heat currents and the figures of merit built from them.
//!
//! Sign convention throughout: a current is positive when heat flows out of
//! the bath into the qutrit. `J_{l,(m…n)}` is the current of channel `l` when
//! the baths of `m…n` sit at the hot temperature and all others at the base
//! temperature.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use twofloat::TwoFloat;

use crate::rates::{assemble_rate_matrix, BathChannel, Channel, RateError, RateMatrix};
use crate::spectrum::{derive_spectrum, CircuitParams, QutritSpectrum, SpectrumError};
use crate::steady::{solve_steady, SolveError, SteadyState};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransportError {
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Rate(#[from] RateError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("coefficient undefined: both numerator and denominator vanish")]
    UndefinedCoefficient,
    #[error("regime undefined: baths {0} and {1} tie for the extreme temperature")]
    AmbiguousExtremum(Channel, Channel),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
}

/// Resonator settings for one channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resonator {
    /// Resonator frequency. `None` keeps it tuned to the channel's resonant
    /// transition, following the spectrum when the flux changes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequency: Option<f64>,
    pub q: f64,
    pub lambda_res: f64,
    pub lambda_off: f64,
}

/// Everything about the setup except the bath temperatures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Device {
    pub circuit: CircuitParams,
    /// Indexed by `Channel::index()`.
    pub resonators: [Resonator; 3],
    /// Reservoir each channel dissipates into; `[A, B, C]` when unmerged.
    pub baths: [Channel; 3],
}

impl Device {
    /// Identical resonators tuned to their transitions, separate baths.
    pub fn symmetric(circuit: CircuitParams, q: f64, lambda_res: f64, lambda_off: f64) -> Self {
        let resonator = Resonator { frequency: None, q, lambda_res, lambda_off };
        Self { circuit, resonators: [resonator; 3], baths: Channel::ALL }
    }

    /// Route channels `first` and `second` into the same reservoir.
    pub fn merged(mut self, first: Channel, second: Channel) -> Self {
        let bath = self.baths[first.index()].min(self.baths[second.index()]);
        self.baths[first.index()] = bath;
        self.baths[second.index()] = bath;
        self
    }

    pub fn is_merged(&self) -> bool {
        self.baths != Channel::ALL
    }

    pub fn spectrum(&self) -> Result<QutritSpectrum, SpectrumError> {
        derive_spectrum(&self.circuit)
    }

    pub fn channels(&self, spectrum: &QutritSpectrum, temperatures: [f64; 3]) -> [BathChannel; 3] {
        Channel::ALL.map(|id| {
            let r = &self.resonators[id.index()];
            BathChannel {
                id,
                omega: r.frequency.unwrap_or_else(|| id.resonant_transition().frequency(spectrum)),
                q: r.q,
                lambda_res: r.lambda_res,
                lambda_off: r.lambda_off,
                temperature: temperatures[id.index()],
                bath: self.baths[id.index()],
            }
        })
    }

    pub fn rate_matrix(&self, temperatures: [f64; 3]) -> Result<(QutritSpectrum, RateMatrix), TransportError> {
        let spectrum = self.spectrum()?;
        let rates = assemble_rate_matrix(&spectrum, &self.channels(&spectrum, temperatures))?;
        Ok((spectrum, rates))
    }

    /// Solve the steady state and currents at fixed channel temperatures.
    pub fn solve(&self, temperatures: [f64; 3]) -> Result<Solution, TransportError> {
        let (spectrum, rates) = self.rate_matrix(temperatures)?;
        let steady = solve_steady(&rates)?;
        let currents = heat_currents(&steady, &rates, &spectrum);
        Ok(Solution { temperatures, spectrum, rates, steady, currents })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub temperatures: [f64; 3],
    pub spectrum: QutritSpectrum,
    pub rates: RateMatrix,
    pub steady: SteadyState,
    pub currents: HeatCurrents,
}

/// Heat currents per channel in units of `λħω_r²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatCurrents {
    /// Indexed by `Channel::index()`.
    pub j: [f64; 3],
    pub baths: [Channel; 3],
    /// Magnitude below which a current cannot be told apart from rounding:
    /// a small multiple of machine epsilon times the gross energy throughput.
    pub resolution: f64,
}

impl HeatCurrents {
    pub fn get(&self, channel: Channel) -> f64 {
        self.j[channel.index()]
    }

    /// Current with rounding-level values snapped to exactly zero.
    pub fn resolved(&self, channel: Channel) -> f64 {
        let x = self.get(channel);
        if x.abs() <= self.resolution {
            0.0
        } else {
            x
        }
    }

    pub fn sum(&self) -> f64 {
        self.j.iter().sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.j.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Total current into each distinct reservoir, keyed by bath label.
    pub fn per_bath(&self) -> Vec<(Channel, f64)> {
        let mut out: Vec<(Channel, f64)> = Vec::with_capacity(3);
        for c in Channel::ALL {
            let bath = self.baths[c.index()];
            match out.iter_mut().find(|(b, _)| *b == bath) {
                Some((_, j)) => *j += self.get(c),
                None => out.push((bath, self.get(c))),
            }
        }
        out
    }
}

/// `J_l = Σ_{i≠j} ω_{ji} Γ^l_{ji} p_i`, evaluated link by link as
/// `ω_{ji} (Γ^l_{ji} p_i − Γ^l_{ij} p_j)` for each upward gap.
pub fn heat_currents(steady: &SteadyState, rates: &RateMatrix, spectrum: &QutritSpectrum) -> HeatCurrents {
    // Near-balanced links cancel to many digits, so the sums run in
    // double-double precision.
    let p = steady.precise();
    let e = spectrum.energies().map(TwoFloat::from);
    let mut j = [TwoFloat::from(0.0); 3];
    let mut gross = 0.0;
    for (l, per) in rates.per_channel.iter().enumerate() {
        for (lo, hi) in [(0, 1), (1, 2), (0, 2)] {
            let omega = e[hi] - e[lo];
            let up = p[lo] * per[hi][lo];
            let down = p[hi] * per[lo][hi];
            j[l] += omega * (up - down);
            gross += omega.hi() * (up.hi() + down.hi());
        }
    }
    HeatCurrents { j: j.map(|x| x.hi()), baths: rates.baths, resolution: 64.0 * f64::EPSILON * gross }
}

/// Bath temperatures for one configuration: listed channels hot, the rest at
/// the base temperature, then per-channel overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemperatureScenario {
    pub hot: Vec<Channel>,
    pub base_temperature: f64,
    pub hot_temperature: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub overrides: Vec<(Channel, f64)>,
}

impl TemperatureScenario {
    pub fn new(hot: &[Channel], base_temperature: f64, hot_temperature: f64) -> Self {
        Self { hot: hot.to_vec(), base_temperature, hot_temperature, overrides: Vec::new() }
    }

    pub fn with_override(mut self, channel: Channel, temperature: f64) -> Self {
        self.overrides.push((channel, temperature));
        self
    }

    pub fn temperatures(&self) -> Result<[f64; 3], TransportError> {
        let mut t = [self.base_temperature; 3];
        for c in &self.hot {
            t[c.index()] = self.hot_temperature;
        }
        for &(c, v) in &self.overrides {
            t[c.index()] = v;
        }
        if let Some(c) = Channel::ALL.into_iter().find(|c| !(t[c.index()] >= 0.0)) {
            return Err(TransportError::InvalidScenario(format!(
                "temperature of bath {c} is {}",
                t[c.index()]
            )));
        }
        Ok(t)
    }
}

pub fn scenario_solution(device: &Device, scenario: &TemperatureScenario) -> Result<Solution, TransportError> {
    device.solve(scenario.temperatures()?)
}

/// Current of `probe` under `scenario`.
pub fn scenario_current(
    device: &Device,
    scenario: &TemperatureScenario,
    probe: Channel,
) -> Result<f64, TransportError> {
    Ok(scenario_solution(device, scenario)?.currents.get(probe))
}

/// `−(forward − backward) / (|forward| + |backward|)`, `None` when both vanish.
pub fn rectification_coefficient(forward: f64, backward: f64) -> Option<f64> {
    let denominator = forward.abs() + backward.abs();
    if denominator == 0.0 {
        None
    } else {
        Some(-(forward - backward) / denominator)
    }
}

/// `(|cw| − |ccw|) / |cw + ccw|`, `None` when the denominator vanishes.
pub fn circulation_coefficient(clockwise: f64, counterclockwise: f64) -> Option<f64> {
    let denominator = (clockwise + counterclockwise).abs();
    if denominator == 0.0 {
        None
    } else {
        Some((clockwise.abs() - counterclockwise.abs()) / denominator)
    }
}

/// Three-terminal rectification `R_{ll'}` between channels `l` and `l'`.
///
/// The forward current is `J_{l,l'}` (bath `l'` hot), the backward one
/// `J_{l',l}`. The passive bath sits at `passive` if given, otherwise at the
/// base temperature.
pub fn rectification_3t(
    device: &Device,
    l: Channel,
    l_prime: Channel,
    base: f64,
    hot: f64,
    passive: Option<f64>,
) -> Result<f64, TransportError> {
    if l == l_prime {
        return Err(TransportError::InvalidScenario(format!("rectification needs two distinct baths, got {l}{l}")));
    }
    let third = Channel::ALL.into_iter().find(|&c| c != l && c != l_prime).unwrap();
    let scenario = |hot_channel: Channel| {
        let s = TemperatureScenario::new(&[hot_channel], base, hot);
        match passive {
            Some(t) => s.with_override(third, t),
            None => s,
        }
    };
    let forward = scenario_solution(device, &scenario(l_prime))?.currents.resolved(l);
    let backward = scenario_solution(device, &scenario(l))?.currents.resolved(l_prime);
    rectification_coefficient(forward, backward).ok_or(TransportError::UndefinedCoefficient)
}

/// Two-reservoir rectification `R_{(ll')m}`: channels `l`, `l'` share one
/// bath, `m` has its own.
///
/// Forward heats `m` and measures the merged bath; backward heats the merged
/// bath and measures `m`.
pub fn rectification_2t(
    device: &Device,
    merged: (Channel, Channel),
    single: Channel,
    base: f64,
    hot: f64,
) -> Result<f64, TransportError> {
    let (l, lp) = merged;
    if l == lp || single == l || single == lp {
        return Err(TransportError::InvalidScenario(format!(
            "two-terminal rectification needs three distinct channels, got ({l}{lp}){single}"
        )));
    }
    let device = device.clone().merged(l, lp);
    let fwd = scenario_solution(&device, &TemperatureScenario::new(&[single], base, hot))?.currents;
    let bwd = scenario_solution(&device, &TemperatureScenario::new(&[l, lp], base, hot))?.currents;
    let merged_current = fwd.get(l) + fwd.get(lp);
    let merged_current = if merged_current.abs() <= fwd.resolution { 0.0 } else { merged_current };
    rectification_coefficient(merged_current, bwd.resolved(single)).ok_or(TransportError::UndefinedCoefficient)
}

/// The six single-hot-bath currents behind the circulation coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CirculationCurrents {
    pub j_ab: f64,
    pub j_bc: f64,
    pub j_ca: f64,
    pub j_ac: f64,
    pub j_cb: f64,
    pub j_ba: f64,
}

impl CirculationCurrents {
    pub fn clockwise(&self) -> f64 {
        self.j_ab * self.j_bc * self.j_ca
    }

    pub fn counterclockwise(&self) -> f64 {
        self.j_ac * self.j_cb * self.j_ba
    }

    pub fn coefficient(&self) -> Option<f64> {
        circulation_coefficient(self.clockwise(), self.counterclockwise())
    }
}

/// Heat each bath in turn and collect the six cross currents.
pub fn circulation_currents(device: &Device, base: f64, hot: f64) -> Result<CirculationCurrents, TransportError> {
    let with_hot = |c: Channel| -> Result<HeatCurrents, TransportError> {
        Ok(scenario_solution(device, &TemperatureScenario::new(&[c], base, hot))?.currents)
    };
    let a_hot = with_hot(Channel::A)?;
    let b_hot = with_hot(Channel::B)?;
    let c_hot = with_hot(Channel::C)?;
    Ok(CirculationCurrents {
        j_ab: b_hot.resolved(Channel::A),
        j_cb: b_hot.resolved(Channel::C),
        j_bc: c_hot.resolved(Channel::B),
        j_ac: c_hot.resolved(Channel::A),
        j_ca: a_hot.resolved(Channel::C),
        j_ba: a_hot.resolved(Channel::B),
    })
}

/// Circulation coefficient `C` with every bath heated in turn from `base` to `hot`.
pub fn circulation(device: &Device, base: f64, hot: f64) -> Result<f64, TransportError> {
    circulation_currents(device, base, hot)?
        .coefficient()
        .ok_or(TransportError::UndefinedCoefficient)
}

/// Operating regime of an absorption machine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// Heat extracted from the coldest bath.
    Refrigerator(Channel),
    /// Heat injected into the hottest bath.
    HeatPump(Channel),
    None,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Regime::Refrigerator(c) => write!(f, "R_{c}"),
            Regime::HeatPump(c) => write!(f, "P_{c}"),
            Regime::None => write!(f, "none"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Classification {
    pub regime: Regime,
    /// Set when refrigeration and pumping were both detected; the regime is
    /// then reported as `None`.
    pub hybrid: bool,
}

/// Classify the operation from per-channel currents and temperatures.
///
/// Channels sharing a reservoir are summed first. Refrigeration of `l`
/// requires `l` to be strictly the coldest bath with `J_l > 0`; pumping into
/// `l` requires it to be strictly the hottest with `J_l < 0`.
pub fn classify_regime(currents: &HeatCurrents, temperatures: &[f64; 3]) -> Result<Classification, TransportError> {
    let baths: Vec<(Channel, f64, f64)> = currents
        .per_bath()
        .into_iter()
        .map(|(bath, j)| {
            let j = if j.abs() <= currents.resolution { 0.0 } else { j };
            (bath, temperatures[bath.index()], j)
        })
        .collect();

    let t_min = baths.iter().map(|b| b.1).fold(f64::INFINITY, f64::min);
    let t_max = baths.iter().map(|b| b.1).fold(f64::NEG_INFINITY, f64::max);
    if t_min == t_max {
        return Ok(Classification { regime: Regime::None, hybrid: false });
    }

    let extremum = |t_ext: f64, active: fn(f64) -> bool| -> Result<Option<Channel>, TransportError> {
        let at: Vec<&(Channel, f64, f64)> = baths.iter().filter(|b| b.1 == t_ext).collect();
        if !at.iter().any(|b| active(b.2)) {
            return Ok(None);
        }
        if at.len() > 1 {
            return Err(TransportError::AmbiguousExtremum(at[0].0, at[1].0));
        }
        Ok(Some(at[0].0))
    };
    let cooled = extremum(t_min, |j| j > 0.0)?;
    let pumped = extremum(t_max, |j| j < 0.0)?;

    Ok(match (cooled, pumped) {
        (Some(_), Some(_)) => Classification { regime: Regime::None, hybrid: true },
        (Some(c), None) => Classification { regime: Regime::Refrigerator(c), hybrid: false },
        (None, Some(c)) => Classification { regime: Regime::HeatPump(c), hybrid: false },
        (None, None) => Classification { regime: Regime::None, hybrid: false },
    })
}

/// Full single-point result.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportReport {
    pub scenario: TemperatureScenario,
    pub temperatures: [f64; 3],
    pub steady: SteadyState,
    pub currents: HeatCurrents,
    /// `Err` when the classification is undefined (tied extremum).
    pub regime: Result<Classification, TransportError>,
}

pub fn transport_report(device: &Device, scenario: &TemperatureScenario) -> Result<TransportReport, TransportError> {
    let sol = scenario_solution(device, scenario)?;
    let regime = classify_regime(&sol.currents, &sol.temperatures);
    Ok(TransportReport {
        scenario: scenario.clone(),
        temperatures: sol.temperatures,
        steady: sol.steady,
        currents: sol.currents,
        regime,
    })
}
