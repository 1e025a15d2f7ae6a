//! Run configuration: flat JSON keys, each overridable from the command line.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::presets::{preset, PRESET_NAMES};
use crate::rates::Channel;
use crate::spectrum::CircuitParams;
use crate::sweep::SweepSpec;
use crate::transport::Device;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid `{field}`: {message}")]
    Field { field: &'static str, message: String },
    #[error("unknown preset `{name}`; valid presets: {}", PRESET_NAMES.join(", "))]
    UnknownPreset { name: String },
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

fn field(field: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Field { field, message: message.into() }
}

/// Everything a single run needs.
///
/// Device keys (`ej` … `lambda_off`, `merge`) describe the single-point
/// device; a `sweep` carries its own device.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Josephson energy `E_J`.
    pub ej: f64,
    /// Charging energy `E_C`.
    pub ec: f64,
    /// Reduced flux φ in radians.
    pub flux: f64,
    /// Quality factor shared by all three resonators.
    pub q: f64,
    pub lambda_res: f64,
    pub lambda_off: f64,
    pub ta: f64,
    pub tb: f64,
    pub tc: f64,
    /// Two channels sharing one bath, written `"l,l'"`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub merge: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub jumps: u64,
    /// Short human-readable numbers instead of full precision.
    pub human: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            ej: 5.0,
            ec: 0.5,
            flux: PI / 2.0,
            q: 100.0,
            lambda_res: 1.0,
            lambda_off: 1.0,
            ta: 3.0,
            tb: 1.5,
            tc: 2.0,
            merge: None,
            preset: None,
            sweep: None,
            out: None,
            seed: 0,
            jumps: 1_000_000,
            human: false,
        }
    }
}

/// Values given explicitly on the command line. `None` leaves the config
/// value alone.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub ej: Option<f64>,
    pub ec: Option<f64>,
    pub flux: Option<f64>,
    pub q: Option<f64>,
    pub lambda_res: Option<f64>,
    pub lambda_off: Option<f64>,
    pub ta: Option<f64>,
    pub tb: Option<f64>,
    pub tc: Option<f64>,
    pub merge: Option<String>,
    pub preset: Option<String>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub jumps: Option<u64>,
    pub human: bool,
}

pub fn parse_merge(text: &str) -> Result<(Channel, Channel), ConfigError> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(field("merge", format!("expected two channels `l,l'`, got `{text}`")));
    }
    let parse = |s: &str| s.parse::<Channel>().map_err(|e| field("merge", e.to_string()));
    let (l, lp) = (parse(parts[0])?, parse(parts[1])?);
    if l == lp {
        return Err(field("merge", format!("channels must differ, got `{text}`")));
    }
    Ok((l, lp))
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
        serde_json::from_str(&text).map_err(|source| ConfigError::Parse { path: path.into(), source })
    }

    /// Apply command-line values. Device flags also patch an attached sweep's
    /// device, so `--preset fig5 --q 50` runs the preset at `Q = 50`.
    pub fn apply(&mut self, o: &Overrides) -> Result<(), ConfigError> {
        macro_rules! set {
            ($($name:ident),*) => {$( if let Some(v) = o.$name.clone() { self.$name = v; } )*};
        }
        set!(ej, ec, flux, q, lambda_res, lambda_off, ta, tb, tc, seed, jumps);
        if let Some(m) = &o.merge {
            self.merge = Some(m.clone());
        }
        if let Some(p) = &o.preset {
            self.preset = Some(p.clone());
            self.sweep = None;
        }
        if let Some(out) = &o.out {
            self.out = Some(out.clone());
        }
        self.human |= o.human;

        self.resolve_preset()?;
        if let Some(sweep) = self.sweep.as_mut() {
            let d = &mut sweep.device;
            if let Some(v) = o.ej {
                d.circuit.e_j = v;
            }
            if let Some(v) = o.ec {
                d.circuit.e_c = v;
            }
            if let Some(v) = o.flux {
                d.circuit.phi = v;
            }
            for r in d.resonators.iter_mut() {
                if let Some(v) = o.q {
                    r.q = v;
                }
                if let Some(v) = o.lambda_res {
                    r.lambda_res = v;
                }
                if let Some(v) = o.lambda_off {
                    r.lambda_off = v;
                }
            }
            if let Some(m) = &o.merge {
                let (l, lp) = parse_merge(m)?;
                *d = d.clone().merged(l, lp);
            }
        }
        Ok(())
    }

    /// Replace a preset name by its sweep specification, so that the config
    /// is self-contained.
    pub fn resolve_preset(&mut self) -> Result<(), ConfigError> {
        if let Some(name) = &self.preset {
            let spec = preset(name).ok_or_else(|| ConfigError::UnknownPreset { name: name.clone() })?;
            if self.sweep.is_none() {
                self.sweep = Some(spec);
            }
            self.preset = None;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        CircuitParams::new(self.ej, self.ec, self.flux).map_err(|e| {
            let name = match e {
                crate::spectrum::SpectrumError::NonPositiveJosephson(_) => "ej",
                crate::spectrum::SpectrumError::NonPositiveCharging(_) => "ec",
                _ => "flux",
            };
            field(name, e.to_string())
        })?;
        if !(self.q > 0.0 && self.q.is_finite()) {
            return Err(field("q", format!("must be positive, got {}", self.q)));
        }
        for (name, v) in [("lambda_res", self.lambda_res), ("lambda_off", self.lambda_off)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(field(name, format!("must be non-negative, got {v}")));
            }
        }
        for (name, v) in [("ta", self.ta), ("tb", self.tb), ("tc", self.tc)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(field(name, format!("temperature must be non-negative, got {v}")));
            }
        }
        if let Some(m) = &self.merge {
            let (l, lp) = parse_merge(m)?;
            let t = self.temperatures();
            if t[l.index()] != t[lp.index()] {
                return Err(field(
                    "merge",
                    format!("merged channels {l},{lp} need equal temperatures, got {} and {}", t[l.index()], t[lp.index()]),
                ));
            }
        }
        if let Some(s) = &self.sweep {
            s.validate().map_err(|e| field("sweep", e.to_string()))?;
        }
        Ok(())
    }

    pub fn temperatures(&self) -> [f64; 3] {
        [self.ta, self.tb, self.tc]
    }

    pub fn circuit(&self) -> CircuitParams {
        CircuitParams { e_j: self.ej, e_c: self.ec, phi: self.flux }
    }

    pub fn device(&self) -> Result<Device, ConfigError> {
        let device = Device::symmetric(self.circuit(), self.q, self.lambda_res, self.lambda_off);
        match &self.merge {
            Some(m) => {
                let (l, lp) = parse_merge(m)?;
                Ok(device.merged(l, lp))
            }
            None => Ok(device),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flag_wins_over_file() {
        let mut c: RunConfig = serde_json::from_str(r#"{"q": 50, "ta": 2.5}"#).unwrap();
        c.apply(&Overrides { q: Some(200.0), ..Default::default() }).unwrap();
        assert_eq!(c.q, 200.0);
        assert_eq!(c.ta, 2.5);
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"qq": 1}"#).is_err());
    }

    #[test]
    fn negative_temperature_names_field() {
        let c = RunConfig { tb: -1.0, ..Default::default() };
        match c.validate() {
            Err(ConfigError::Field { field, .. }) => assert_eq!(field, "tb"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn merge_parsing() {
        assert_eq!(parse_merge("b, c").unwrap(), (Channel::B, Channel::C));
        assert!(parse_merge("a,a").is_err());
        assert!(parse_merge("a").is_err());
        let c = RunConfig { merge: Some("a,b".into()), ..Default::default() };
        assert!(c.validate().is_err());
    }

    #[test]
    fn preset_flag_patches_device() {
        let mut c = RunConfig::default();
        c.apply(&Overrides { preset: Some("fig5".into()), q: Some(50.0), ..Default::default() }).unwrap();
        let s = c.sweep.as_ref().unwrap();
        assert!(s.device.resonators.iter().all(|r| r.q == 50.0));
        assert!(c.preset.is_none());
    }

    #[test]
    fn unknown_preset_lists_names() {
        let mut c = RunConfig::default();
        let err = c.apply(&Overrides { preset: Some("nope".into()), ..Default::default() }).unwrap_err();
        assert!(err.to_string().contains("fig7c"));
    }

    #[test]
    fn json_round_trip() {
        let mut c = RunConfig::default();
        c.apply(&Overrides { preset: Some("fig7c".into()), merge: Some("b,c".into()), ..Default::default() })
            .unwrap();
        let text = serde_json::to_string_pretty(&c).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
    }
}
