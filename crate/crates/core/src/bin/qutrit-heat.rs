use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use qutrit_heat::config::{ConfigError, Overrides, RunConfig};
use qutrit_heat::rates::Channel;
use qutrit_heat::stochastic::{gillespie_estimate, MIN_JUMPS};
use qutrit_heat::sweep::{run_flux_sweep, run_map, run_q_sweep, write_csv, write_csv_to, Parameter, SweepError};
use qutrit_heat::transport::{classify_regime, TransportError};

const EXIT_CONFIG: u8 = 2;
const EXIT_SOLVER: u8 = 3;
const EXIT_MISMATCH: u8 = 4;
const EXIT_IO: u8 = 1;

#[derive(Parser)]
#[command(name = "qutrit-heat", version, about = "Heat transport through a three-level system coupled to three baths")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Stationary populations, heat currents and operating regime at one point.
    Steady(Common),
    /// Evaluate a parameter map and write it as CSV.
    Sweep(Common),
    /// Compare the linear solve with a stochastic jump simulation.
    Verify(Common),
}

#[derive(Args)]
struct Common {
    /// JSON configuration file; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    ej: Option<f64>,
    #[arg(long)]
    ec: Option<f64>,
    /// Reduced flux φ in radians.
    #[arg(long, allow_hyphen_values = true)]
    flux: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long = "lambda-res")]
    lambda_res: Option<f64>,
    #[arg(long = "lambda-off")]
    lambda_off: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    ta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    tb: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    tc: Option<f64>,
    /// Two channels sharing one bath, e.g. `b,c`.
    #[arg(long, value_name = "l,l'")]
    merge: Option<String>,
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    /// CSV destination for sweeps (stdout if absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    jumps: Option<u64>,
    /// Print the effective configuration as JSON and exit.
    #[arg(long = "dump-config")]
    dump_config: bool,
    /// Short numbers instead of 17 significant digits.
    #[arg(long)]
    human: bool,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            ej: self.ej,
            ec: self.ec,
            flux: self.flux,
            q: self.q,
            lambda_res: self.lambda_res,
            lambda_off: self.lambda_off,
            ta: self.ta,
            tb: self.tb,
            tc: self.tc,
            merge: self.merge.clone(),
            preset: self.preset.clone(),
            out: self.out.clone(),
            seed: self.seed,
            jumps: self.jumps,
            human: self.human,
        }
    }

    fn load(&self) -> Result<RunConfig, ConfigError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        cfg.apply(&self.overrides())?;
        cfg.validate()?;
        Ok(cfg)
    }
}

struct Fmt {
    human: bool,
}

impl Fmt {
    fn num(&self, x: f64) -> String {
        if self.human {
            format!("{x:.6}")
        } else {
            format!("{x:.16e}")
        }
    }
}

fn config_failure(e: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(EXIT_CONFIG)
}

fn transport_failure(e: TransportError) -> ExitCode {
    eprintln!("error: {e}");
    match e {
        TransportError::Solve(_) => ExitCode::from(EXIT_SOLVER),
        _ => ExitCode::from(EXIT_CONFIG),
    }
}

fn warn_device(cfg: &RunConfig) {
    let circuit = cfg.circuit();
    if !circuit.is_transmon_regime() {
        eprintln!(
            "warning: E_J = {} < 5 E_C = {}; the perturbative spectrum may be inaccurate",
            circuit.e_j,
            5.0 * circuit.e_c
        );
    }
}

fn cmd_steady(cfg: &RunConfig) -> ExitCode {
    let fmt = Fmt { human: cfg.human };
    warn_device(cfg);
    let device = match cfg.device() {
        Ok(d) => d,
        Err(e) => return config_failure(e),
    };
    let sol = match device.solve(cfg.temperatures()) {
        Ok(s) => s,
        Err(e) => return transport_failure(e),
    };
    let s = sol.spectrum;
    for c in Channel::ALL {
        let r = &device.resonators[c.index()];
        let width = r.frequency.unwrap_or_else(|| c.resonant_transition().frequency(&s)) / r.q;
        if width >= s.omega32 {
            eprintln!(
                "warning: resonator {c} linewidth {width:.4} reaches omega32 = {:.4}; higher levels may be populated",
                s.omega32
            );
        }
    }

    let mut out = String::new();
    let mut line = |k: &str, v: String| out.push_str(&format!("{k:<10} {v}\n"));
    line("omega10", fmt.num(s.omega10));
    line("omega21", fmt.num(s.omega21));
    line("omega20", fmt.num(s.omega20));
    line("omega32", fmt.num(s.omega32));
    for (k, t) in ["T_a", "T_b", "T_c"].iter().zip(sol.temperatures) {
        line(k, fmt.num(t));
    }
    for (i, p) in sol.steady.p.iter().enumerate() {
        line(&format!("p{i}"), fmt.num(*p));
    }
    for c in Channel::ALL {
        line(&format!("J_{c}"), fmt.num(sol.currents.resolved(c)));
    }
    if device.is_merged() {
        for (bath, j) in sol.currents.per_bath() {
            line(&format!("J_bath_{bath}"), fmt.num(j));
        }
    }
    line("residual", fmt.num(sol.steady.residual));
    match classify_regime(&sol.currents, &sol.temperatures) {
        Ok(cls) => {
            line("regime", cls.regime.to_string());
            if cls.hybrid {
                eprintln!("warning: both refrigeration and pumping detected; reported as none");
            }
        }
        Err(e) => {
            line("regime", "undefined".to_string());
            eprintln!("warning: {e}");
        }
    }
    print!("{out}");
    ExitCode::SUCCESS
}

fn cmd_sweep(cfg: &RunConfig) -> ExitCode {
    let Some(spec) = &cfg.sweep else {
        return config_failure("sweep needs --preset or a `sweep` section in the config");
    };
    let start = Instant::now();
    let has = |p: Parameter| spec.axes.iter().any(|a| a.parameter == p);
    let result = if has(Parameter::Flux) {
        run_flux_sweep(spec)
    } else if has(Parameter::QualityFactor) || has(Parameter::Log10QualityFactor) {
        run_q_sweep(spec)
    } else {
        run_map(spec)
    };
    let result = match result {
        Ok(r) => r,
        Err(e) => return config_failure(e),
    };
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    let written = match &cfg.out {
        Some(path) => write_csv(&result, path),
        None => write_csv_to(&result, std::io::stdout().lock()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return match e {
            SweepError::Validation(_) => ExitCode::from(EXIT_CONFIG),
            _ => ExitCode::from(EXIT_IO),
        };
    }
    eprintln!(
        "{}: {} points ({}), {} undefined coefficients, {} failed points, {:.2} s",
        result.name,
        result.rows.len(),
        spec.axes.iter().map(|a| a.points.to_string()).collect::<Vec<_>>().join("x"),
        result.undefined_count(),
        result.failed_points(),
        start.elapsed().as_secs_f64()
    );
    ExitCode::SUCCESS
}

fn z_score(deterministic: f64, estimate: f64, sigma: f64) -> f64 {
    let diff = estimate - deterministic;
    if diff == 0.0 {
        0.0
    } else {
        diff / sigma
    }
}

fn cmd_verify(cfg: &RunConfig) -> ExitCode {
    if cfg.jumps < MIN_JUMPS {
        return config_failure(format!("invalid `jumps`: at least {MIN_JUMPS} required, got {}", cfg.jumps));
    }
    let fmt = Fmt { human: cfg.human };
    let device = match cfg.device() {
        Ok(d) => d,
        Err(e) => return config_failure(e),
    };
    let sol = match device.solve(cfg.temperatures()) {
        Ok(s) => s,
        Err(e) => return transport_failure(e),
    };
    let est = match gillespie_estimate(&sol.rates, &sol.spectrum, cfg.jumps, cfg.seed) {
        Ok(e) => e,
        Err(e) => return transport_failure(e.into()),
    };

    let mut rows = Vec::new();
    for i in 0..3 {
        rows.push((format!("p{i}"), sol.steady.p[i], est.p_hat[i], est.sigma_p[i]));
    }
    for c in Channel::ALL {
        let k = c.index();
        rows.push((format!("J_{c}"), sol.currents.j[k], est.j_hat[k], est.sigma_j[k]));
    }
    let mut worst = 0.0f64;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let _ = writeln!(out, "seed {} jumps {}", est.seed, est.n_jumps);
    let _ = writeln!(out, "{:<4} {:>24} {:>24} {:>24} {:>10}", "", "deterministic", "stochastic", "sigma", "z");
    for (name, det, hat, sigma) in rows {
        let z = z_score(det, hat, sigma);
        worst = worst.max(z.abs());
        let _ = writeln!(out, "{name:<4} {:>24} {:>24} {:>24} {:>10.3}", fmt.num(det), fmt.num(hat), fmt.num(sigma), z);
    }
    if worst > 3.0 {
        let _ = writeln!(out, "mismatch: max |z| = {worst:.3} > 3");
        ExitCode::from(EXIT_MISMATCH)
    } else {
        let _ = writeln!(out, "agreement: max |z| = {worst:.3}");
        ExitCode::SUCCESS
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, run): (&Common, fn(&RunConfig) -> ExitCode) = match &cli.command {
        Command::Steady(c) => (c, cmd_steady),
        Command::Sweep(c) => (c, cmd_sweep),
        Command::Verify(c) => (c, cmd_verify),
    };
    let cfg = match common.load() {
        Ok(c) => c,
        Err(e) => return config_failure(e),
    };
    if common.dump_config {
        match serde_json::to_string_pretty(&cfg) {
            Ok(text) => {
                println!("{text}");
                return ExitCode::SUCCESS;
            }
            Err(e) => return config_failure(e),
        }
    }
    run(&cfg)
}
