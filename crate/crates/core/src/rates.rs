//! Transition rates induced by each resonator-filtered bath.
//!
//! Rates are stored as `Γ[j][i]`, the rate of the transition `i → j`.
//! Excitation rates follow the Lorentzian-filtered golden-rule form
//! `λ (2ω/Q) L(ω) n_B(ω, T)`; relaxation rates use the same prefactor with
//! `1 + n_B`, which is local detailed balance written without the
//! exponential.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spectrum::QutritSpectrum;

/// Resonator channel label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    A,
    B,
    C,
}

impl Channel {
    pub const ALL: [Channel; 3] = [Channel::A, Channel::B, Channel::C];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    /// The transition this channel's resonator is tuned to.
    pub fn resonant_transition(self) -> Transition {
        match self {
            Channel::A => Transition::ZeroOne,
            Channel::B => Transition::OneTwo,
            Channel::C => Transition::ZeroTwo,
        }
    }

    pub fn label(self) -> char {
        match self {
            Channel::A => 'a',
            Channel::B => 'b',
            Channel::C => 'c',
        }
    }

    /// The two channels other than `self`, in label order.
    pub fn others(self) -> [Channel; 2] {
        match self {
            Channel::A => [Channel::B, Channel::C],
            Channel::B => [Channel::A, Channel::C],
            Channel::C => [Channel::A, Channel::B],
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

impl FromStr for Channel {
    type Err = RateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "a" => Ok(Channel::A),
            "b" => Ok(Channel::B),
            "c" => Ok(Channel::C),
            other => Err(RateError::UnknownChannel(other.to_string())),
        }
    }
}

/// One of the three qutrit transitions, named by its lower and upper level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Transition {
    ZeroOne,
    OneTwo,
    ZeroTwo,
}

impl Transition {
    pub const ALL: [Transition; 3] = [Transition::ZeroOne, Transition::OneTwo, Transition::ZeroTwo];

    /// `(lower, upper)` level indices.
    #[inline]
    pub fn levels(self) -> (usize, usize) {
        match self {
            Transition::ZeroOne => (0, 1),
            Transition::OneTwo => (1, 2),
            Transition::ZeroTwo => (0, 2),
        }
    }

    pub fn frequency(self, spectrum: &QutritSpectrum) -> f64 {
        let (lo, hi) = self.levels();
        spectrum.gap(hi, lo)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RateError {
    #[error("unknown channel label {0:?} (expected a, b or c)")]
    UnknownChannel(String),
    #[error("channel {channel}: {field} must be {requirement}, got {value}")]
    InvalidField {
        channel: Channel,
        field: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("expected exactly one channel each labelled a, b and c")]
    ChannelMismatch,
    #[error("channels {first} and {second} share bath {bath} but have temperatures {t_first} and {t_second}")]
    BathTemperatureMismatch {
        bath: Channel,
        first: Channel,
        second: Channel,
        t_first: f64,
        t_second: f64,
    },
}

/// A resonator-mediated coupling to one thermal bath.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathChannel {
    pub id: Channel,
    /// Resonator frequency `ω_l`.
    pub omega: f64,
    /// Quality factor `Q_l`.
    pub q: f64,
    pub lambda_res: f64,
    pub lambda_off: f64,
    /// `k_B T_l` in units of `ħω_r`.
    pub temperature: f64,
    /// The physical reservoir this resonator dissipates into. Channels sharing
    /// a bath must share its temperature.
    pub bath: Channel,
}

impl BathChannel {
    pub fn validate(&self) -> Result<(), RateError> {
        let check = |field, requirement, value: f64, ok: bool| {
            if ok {
                Ok(())
            } else {
                Err(RateError::InvalidField { channel: self.id, field, requirement, value })
            }
        };
        check("omega", "positive", self.omega, self.omega > 0.0 && self.omega.is_finite())?;
        check("q", "positive", self.q, self.q > 0.0 && self.q.is_finite())?;
        check("lambda_res", "non-negative", self.lambda_res, self.lambda_res >= 0.0)?;
        check("lambda_off", "non-negative", self.lambda_off, self.lambda_off >= 0.0)?;
        check(
            "temperature",
            "non-negative",
            self.temperature,
            self.temperature >= 0.0 && self.temperature.is_finite(),
        )
    }

    /// Coupling weight this channel applies to `transition`.
    pub fn lambda_for(&self, transition: Transition) -> f64 {
        if self.id.resonant_transition() == transition {
            self.lambda_res
        } else {
            self.lambda_off
        }
    }

    /// `λ (2ω/Q) L(ω)`: the part of both rates that does not depend on
    /// temperature.
    fn prefactor(&self, omega_ji: f64, lambda: f64) -> f64 {
        if lambda == 0.0 {
            return 0.0;
        }
        lambda * 2.0 * omega_ji / self.q * lorentz_filter(omega_ji, self.omega, self.q)
    }
}

/// Bose–Einstein occupation `1 / (e^{ω/T} − 1)`; exactly zero at `T = 0`.
pub fn bose_occupation(omega: f64, temperature: f64) -> f64 {
    if temperature == 0.0 {
        return 0.0;
    }
    1.0 / (omega / temperature).exp_m1()
}

/// Lorentzian suppression `[1 + Q² (ω/ω_l − ω_l/ω)²]⁻¹` of a resonator at
/// `omega_l` seen by a transition at `omega`.
pub fn lorentz_filter(omega: f64, omega_l: f64, q: f64) -> f64 {
    let detuning = omega / omega_l - omega_l / omega;
    1.0 / (1.0 + q * q * detuning * detuning)
}

/// Upward rate `Γ_{ji}` across a gap `omega_ji > 0`.
pub fn excitation_rate(channel: &BathChannel, omega_ji: f64, lambda: f64) -> f64 {
    channel.prefactor(omega_ji, lambda) * bose_occupation(omega_ji, channel.temperature)
}

/// Downward rate `Γ_{ij}`, equal to `Γ_{ji} e^{ω_{ji}/T}` but evaluated as
/// `prefactor · (1 + n_B)` so it stays finite at `T → 0`.
pub fn relaxation_rate(channel: &BathChannel, omega_ji: f64, lambda: f64) -> f64 {
    channel.prefactor(omega_ji, lambda) * (1.0 + bose_occupation(omega_ji, channel.temperature))
}

pub type Rates3 = [[f64; 3]; 3];

/// Per-channel and total transition rates. Entry `[j][i]` is the rate of
/// `i → j`; diagonals are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct RateMatrix {
    /// Indexed by `Channel::index()`.
    pub per_channel: [Rates3; 3],
    pub total: Rates3,
    /// Bath identity of each channel, indexed like `per_channel`.
    pub baths: [Channel; 3],
    /// Temperature of each channel.
    pub temperatures: [f64; 3],
}

impl RateMatrix {
    fn from_per_channel(per_channel: [Rates3; 3], baths: [Channel; 3], temperatures: [f64; 3]) -> Self {
        let mut total = [[0.0; 3]; 3];
        for rates in &per_channel {
            for j in 0..3 {
                for i in 0..3 {
                    total[j][i] += rates[j][i];
                }
            }
        }
        Self { per_channel, total, baths, temperatures }
    }

    /// Perfectly filtered rates with explicit couplings `κ_l`: bath `a` only
    /// drives `0↔1`, `b` only `1↔2`, `c` only `0↔2`, with
    /// `Γ_up = κ n_B` and `Γ_down = κ (1 + n_B)`.
    pub fn perfectly_filtered(spectrum: &QutritSpectrum, kappa: [f64; 3], temperatures: [f64; 3]) -> Self {
        let mut per_channel = [[[0.0; 3]; 3]; 3];
        for channel in Channel::ALL {
            let l = channel.index();
            let (lo, hi) = channel.resonant_transition().levels();
            let omega = spectrum.gap(hi, lo);
            let n = bose_occupation(omega, temperatures[l]);
            per_channel[l][hi][lo] = kappa[l] * n;
            per_channel[l][lo][hi] = kappa[l] * (1.0 + n);
        }
        Self::from_per_channel(per_channel, Channel::ALL, temperatures)
    }

    /// Multiply every rate by `factor` (a change of time unit).
    pub fn scaled(&self, factor: f64) -> Self {
        let mut per_channel = self.per_channel;
        for rates in per_channel.iter_mut() {
            for row in rates.iter_mut() {
                for r in row.iter_mut() {
                    *r *= factor;
                }
            }
        }
        Self::from_per_channel(per_channel, self.baths, self.temperatures)
    }

    pub fn max_rate(&self) -> f64 {
        self.total.iter().flatten().fold(0.0, |m, &r| m.max(r))
    }
}

/// Build the rate matrix for three channels (any order, labels a, b, c).
///
/// Each channel drives all three transitions; its own resonant transition
/// uses `lambda_res`, the other two `lambda_off`.
pub fn assemble_rate_matrix(
    spectrum: &QutritSpectrum,
    channels: &[BathChannel],
) -> Result<RateMatrix, RateError> {
    let mut slots: [Option<&BathChannel>; 3] = [None; 3];
    if channels.len() != 3 {
        return Err(RateError::ChannelMismatch);
    }
    for ch in channels {
        let slot = &mut slots[ch.id.index()];
        if slot.is_some() {
            return Err(RateError::ChannelMismatch);
        }
        *slot = Some(ch);
    }
    let ordered: [&BathChannel; 3] = [
        slots[0].ok_or(RateError::ChannelMismatch)?,
        slots[1].ok_or(RateError::ChannelMismatch)?,
        slots[2].ok_or(RateError::ChannelMismatch)?,
    ];
    for ch in ordered {
        ch.validate()?;
    }
    for (x, first) in ordered.iter().enumerate() {
        for second in &ordered[x + 1..] {
            if first.bath == second.bath && first.temperature != second.temperature {
                return Err(RateError::BathTemperatureMismatch {
                    bath: first.bath,
                    first: first.id,
                    second: second.id,
                    t_first: first.temperature,
                    t_second: second.temperature,
                });
            }
        }
    }

    let mut per_channel = [[[0.0; 3]; 3]; 3];
    for (l, ch) in ordered.iter().enumerate() {
        for transition in Transition::ALL {
            let (lo, hi) = transition.levels();
            let omega = spectrum.gap(hi, lo);
            let lambda = ch.lambda_for(transition);
            per_channel[l][hi][lo] = excitation_rate(ch, omega, lambda);
            per_channel[l][lo][hi] = relaxation_rate(ch, omega, lambda);
        }
    }
    Ok(RateMatrix::from_per_channel(
        per_channel,
        ordered.map(|c| c.bath),
        ordered.map(|c| c.temperature),
    ))
}
