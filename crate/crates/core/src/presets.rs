//! Named sweep specifications for the standard device (`E_J = 5`, `E_C = 0.5`,
//! `φ = π/2`, resonators pinned to their transitions).
//!
//! | name     | axes                 | content                                        |
//! |----------|----------------------|------------------------------------------------|
//! | `fig2`   | `T_a × T_b`          | operating regime, `T_c = 2`, `Q = 100`         |
//! | `fig2a`  | `T_a × T_b`          | same with `λ_off = 0`                          |
//! | `fig3`   | `log10 Q × T_a`      | currents, `T_b = 1.5`, `T_c = 2`               |
//! | `fig3c`  | `T_a`                | currents and regime at `Q = 100`               |
//! | `fig4`   | `T × T_H`            | `R_ab`, `R_ac`, `R_bc` with `λ_off = 0`         |
//! | `fig5`   | `T × T_H`            | `R_ab`, `R_ac`, `R_bc` at `Q = 100`             |
//! | `fig6`   | `T × T_H`            | `R_ab`, passive bath at `(T + T_H)/2`, `Q = 100`|
//! | `fig6a`  | `T × T_H`            | same with `λ_off = 0`                          |
//! | `rect2t` | `T × T_H`            | `R_(ab)c`, `R_(ac)b`, `R_(bc)a` at `Q = 100`    |
//! | `fig7`   | `T × T_H`            | circulation `C` at `Q = 100`                   |
//! | `fig7c`  | `φ`                  | `C` at `T = 0.9`, `T_H = 4`                    |
//! | `fig8`   | `T × T_H`            | `C` at `Q = 1000`                              |
//! | `fig8a`  | `T × T_H`            | `C` at `Q = 50`                                |
//! | `fig8d`  | `T × log10 Q`        | `C` at `T_H = 2`                               |
//!
//! For the `T_a × T_b` maps the first axis drives bath `a` and the second bath
//! `b`, through the temperature template.

use std::f64::consts::PI;

use crate::rates::Channel;
use crate::spectrum::CircuitParams;
use crate::sweep::{Axis, Metric, Parameter, PassiveTemperature, SweepSpec, TemperatureSource};
use crate::transport::Device;

pub const PRESET_NAMES: &[&str] = &[
    "fig2", "fig2a", "fig3", "fig3c", "fig4", "fig5", "fig6", "fig6a", "rect2t", "fig7", "fig7c", "fig8", "fig8a",
    "fig8d",
];

const GRID: usize = 201;

pub fn standard_circuit() -> CircuitParams {
    CircuitParams { e_j: 5.0, e_c: 0.5, phi: PI / 2.0 }
}

pub fn standard_device(q: f64, lambda_off: f64) -> Device {
    Device::symmetric(standard_circuit(), q, 1.0, lambda_off)
}

const HOT_A: [TemperatureSource; 3] = [TemperatureSource::Hot, TemperatureSource::Base, TemperatureSource::Base];

fn rectifiers() -> Vec<Metric> {
    use Channel::*;
    vec![
        Metric::Rectification { l: A, l_prime: B },
        Metric::Rectification { l: A, l_prime: C },
        Metric::Rectification { l: B, l_prime: C },
    ]
}

fn regime_map(name: &str, lambda_off: f64) -> SweepSpec {
    SweepSpec {
        name: name.into(),
        device: standard_device(100.0, lambda_off),
        base_temperature: 1.5,
        hot_temperature: 2.0,
        template: [TemperatureSource::Base, TemperatureSource::Hot, TemperatureSource::Fixed(2.0)],
        passive: PassiveTemperature::Base,
        axes: vec![
            Axis::new(Parameter::BaseTemperature, 0.5, 4.0, GRID),
            Axis::new(Parameter::HotTemperature, 0.5, 4.0, GRID),
        ],
        metrics: vec![Metric::Regime],
    }
}

fn t_th_map(name: &str, q: f64, lambda_off: f64, metrics: Vec<Metric>, th_max: f64) -> SweepSpec {
    SweepSpec {
        name: name.into(),
        device: standard_device(q, lambda_off),
        base_temperature: 0.5,
        hot_temperature: 1.0,
        template: HOT_A,
        passive: PassiveTemperature::Base,
        axes: vec![
            Axis::new(Parameter::BaseTemperature, 0.1, 2.0, GRID),
            Axis::new(Parameter::HotTemperature, 0.1, th_max, GRID),
        ],
        metrics,
    }
}

/// Look up a preset by name.
pub fn preset(name: &str) -> Option<SweepSpec> {
    let spec = match name {
        "fig2" => regime_map(name, 1.0),
        "fig2a" => regime_map(name, 0.0),
        "fig3" | "fig3c" => {
            let mut s = SweepSpec {
                name: name.into(),
                device: standard_device(100.0, 1.0),
                base_temperature: 1.5,
                hot_temperature: 3.0,
                template: [TemperatureSource::Hot, TemperatureSource::Base, TemperatureSource::Fixed(2.0)],
                passive: PassiveTemperature::Base,
                axes: vec![Axis::new(Parameter::HotTemperature, 2.0, 4.0, GRID)],
                metrics: vec![Metric::Regime],
            };
            if name == "fig3" {
                s.axes.insert(0, Axis::new(Parameter::Log10QualityFactor, 1.0, 3.0, GRID));
            }
            s
        }
        "fig4" => t_th_map(name, 100.0, 0.0, rectifiers(), 4.0),
        "fig5" => t_th_map(name, 100.0, 1.0, rectifiers(), 4.0),
        "fig6" | "fig6a" => {
            let lambda_off = if name == "fig6" { 1.0 } else { 0.0 };
            let mut s = t_th_map(name, 100.0, lambda_off, vec![Metric::Rectification { l: Channel::A, l_prime: Channel::B }], 4.0);
            s.passive = PassiveTemperature::Mean;
            s
        }
        "rect2t" => {
            use Channel::*;
            t_th_map(
                name,
                100.0,
                1.0,
                vec![
                    Metric::TwoTerminalRectification { merged: [A, B], single: C },
                    Metric::TwoTerminalRectification { merged: [A, C], single: B },
                    Metric::TwoTerminalRectification { merged: [B, C], single: A },
                ],
                6.0,
            )
        }
        "fig7" => t_th_map(name, 100.0, 1.0, vec![Metric::Circulation], 6.0),
        "fig8" => t_th_map(name, 1000.0, 1.0, vec![Metric::Circulation], 6.0),
        "fig8a" => t_th_map(name, 50.0, 1.0, vec![Metric::Circulation], 6.0),
        "fig7c" => SweepSpec {
            name: name.into(),
            device: standard_device(100.0, 1.0),
            base_temperature: 0.9,
            hot_temperature: 4.0,
            template: HOT_A,
            passive: PassiveTemperature::Base,
            axes: vec![Axis::new(Parameter::Flux, 0.0, 4.5, GRID)],
            metrics: vec![Metric::Circulation],
        },
        "fig8d" => SweepSpec {
            name: name.into(),
            device: standard_device(100.0, 1.0),
            base_temperature: 0.5,
            hot_temperature: 2.0,
            template: HOT_A,
            passive: PassiveTemperature::Base,
            axes: vec![
                Axis::new(Parameter::BaseTemperature, 0.1, 2.0, GRID),
                Axis::new(Parameter::Log10QualityFactor, 1.5, 3.0, GRID),
            ],
            metrics: vec![Metric::Circulation],
        },
        _ => return None,
    };
    Some(spec)
}
