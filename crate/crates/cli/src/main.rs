//! `ness`: time evolution, steady states, sweeps and validation for two
//! coupled oscillators in separate thermal baths.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ness_core::gaussian::{entropy_from_spectrum, log_negativity_from_spectrum};
use ness_core::model::Regime;
use ness_core::series::{evolve, time_grid, write_series_csv, DEFAULT_SAMPLES};
use ness_core::steady::{
    critical_temperature_curve, critical_temperature_equilibrium, steady_state_covariance,
    steady_symplectic_weak, symplectic_high_temperature, ClosedFormCheck, SteadySource,
};
use ness_core::sweep::{run_sweep, Axis, Observable, SweepSpec};
use ness_core::validate::{validate, DEFAULT_T_GRID};
use ness_core::{partial_transpose, svg, symplectic_spectrum, ConfigValues, Error, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "ness", version, about = "Coupled oscillators in two thermal baths")]
struct Cli {
    #[command(flatten)]
    globals: Globals,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Globals {
    /// Key/value configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (default: stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// `high-t` or `weak`.
    #[arg(long, global = true)]
    regime: Option<Regime>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    m: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    omega0: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    kappa: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    gamma1: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    gamma2: Option<f64>,
    #[arg(long = "T1", global = true, allow_negative_numbers = true)]
    t1: Option<f64>,
    #[arg(long = "T2", global = true, allow_negative_numbers = true)]
    t2: Option<f64>,
    /// Initial relative width.
    #[arg(long, global = true, allow_negative_numbers = true)]
    s: Option<f64>,
    /// Initial centre-of-mass width.
    #[arg(long, global = true, allow_negative_numbers = true)]
    d: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Time series of negativity, entropy and covariance as CSV.
    Evolve {
        #[arg(long, default_value_t = 100.0)]
        t_max: f64,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        /// Also write an SVG plot of the negativity.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Steady-state covariance, spectra and negativity.
    Steady {
        /// Fail if the published closed form disagrees with the Lyapunov solution.
        #[arg(long)]
        strict: bool,
    },
    /// Evaluate an observable on a two-parameter grid; CSV plus a JSON sidecar.
    Sweep {
        /// `name:min:max:count`, e.g. `T:0.01:1.2:60`.
        #[arg(long)]
        axis1: Axis,
        #[arg(long)]
        axis2: Axis,
        /// log-negativity, log-negativity-closed, entropy, symplectic-min or moment:<name>.
        #[arg(long, default_value = "log-negativity")]
        observable: Observable,
        /// Evaluate at this time instead of the steady state.
        #[arg(long)]
        time: Option<f64>,
        #[arg(long)]
        jobs: Option<usize>,
        /// Also write an SVG heatmap.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Equal-temperature critical temperature; with --T1, also the T2 boundary.
    Critical {
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
    },
    /// Cross-check analytic results against the numerical oracles.
    Validate {
        /// Comma-separated times for the transient comparison.
        #[arg(long, value_delimiter = ',')]
        t_grid: Option<Vec<f64>>,
    },
}

enum Failure {
    Core(Error),
    Breach(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Core(e.into())
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Core(e) if e.is_input_error() || matches!(e, Error::Io(_)) => 2,
            Failure::Core(Error::ClosedFormMismatch { .. }) | Failure::Breach(_) => 4,
            Failure::Core(_) => 3,
        }
    }
}

impl Globals {
    fn overrides(&self) -> ConfigValues {
        ConfigValues {
            m: self.m,
            omega0: self.omega0,
            kappa: self.kappa,
            gamma1: self.gamma1,
            gamma2: self.gamma2,
            t1: self.t1,
            t2: self.t2,
            regime: self.regime,
            s: self.s,
            d: self.d,
        }
    }

    fn file_values(&self) -> Result<ConfigValues, Error> {
        match &self.config {
            Some(path) => ConfigValues::load(path),
            None => Ok(ConfigValues::default()),
        }
    }

    fn run_config(&self) -> Result<RunConfig, Error> {
        let cfg = self.file_values()?.overridden_by(&self.overrides()).resolve()?;
        for w in cfg.params.validity_warnings() {
            eprintln!("warning: {w}");
        }
        Ok(cfg)
    }

    fn emit(&self, contents: &[u8]) -> io::Result<()> {
        match &self.out {
            Some(path) => fs::write(path, contents),
            None => io::stdout().lock().write_all(contents),
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())).into())
}

fn cmd_evolve(g: &Globals, t_max: f64, samples: usize, svg_path: Option<&Path>) -> Result<(), Failure> {
    let cfg = g.run_config()?;
    let rows = evolve(&cfg, &time_grid(t_max, samples)?)?;
    let mut buf = Vec::new();
    write_series_csv(&rows, &mut buf)?;
    g.emit(&buf)?;
    let failed = rows.iter().filter(|r| r.failure.is_some()).count();
    if failed > 0 {
        eprintln!("warning: {failed} of {} rows flagged (see status column)", rows.len());
    }
    if let Some(path) = svg_path {
        let points: Vec<_> = rows
            .iter()
            .map(|r| (r.t, r.observables.map_or(f64::NAN, |o| o.log_negativity)))
            .collect();
        write_file(path, &svg::line_plot("log negativity", "t", "L_N", &points))?;
    }
    Ok(())
}

fn matrix_block(out: &mut String, m: &ness_core::CovarianceMatrix) {
    for i in 0..4 {
        for j in 0..4 {
            let _ = write!(out, "{:>24.16e}", m.matrix()[(i, j)]);
        }
        out.push('\n');
    }
}

fn cmd_steady(g: &Globals, strict: bool) -> Result<(), Failure> {
    let cfg = g.run_config()?;
    let p = cfg.params;
    let check = if strict { ClosedFormCheck::Strict } else { ClosedFormCheck::PreferOracle };
    let steady = steady_state_covariance(&p, check)?;
    let gamma = &steady.covariance;
    let spec = symplectic_spectrum(gamma)?;
    let pt = symplectic_spectrum(&partial_transpose(gamma))?;
    let ln = log_negativity_from_spectrum(&pt);

    let mut out = String::new();
    let _ = writeln!(
        out,
        "regime {}, m = {}, omega0 = {}, kappa = {} (alpha = {}), gamma1 = {}, gamma2 = {}, T1 = {}, T2 = {}",
        p.regime, p.m, p.omega0, p.kappa, p.alpha(), p.gamma1, p.gamma2, p.t1, p.t2
    );
    let source = match steady.source {
        SteadySource::ClosedForm => "closed form (agrees with Lyapunov)",
        SteadySource::Oracle => "Lyapunov solution",
    };
    let _ = writeln!(out, "\nsteady covariance, order x1 p1 x2 p2; source: {source}");
    matrix_block(&mut out, gamma);
    if !steady.mismatches.is_empty() {
        let _ = writeln!(out, "\npublished closed form differs from the Lyapunov solution:");
        for m in &steady.mismatches {
            let _ = writeln!(
                out,
                "  <{}>: published {:.12e}, Lyapunov {:.12e} (rel dev {:.3e})",
                m.moment, m.printed, m.oracle, m.deviation
            );
        }
    }
    let _ = writeln!(out, "\nsymplectic eigenvalues: {:.12e} {:.12e}", spec.nu[0], spec.nu[1]);
    match entropy_from_spectrum(&spec) {
        Ok(s) => {
            let _ = writeln!(out, "entropy: {s:.12e}");
        }
        Err(e) => {
            let _ = writeln!(out, "entropy: undefined ({e})");
        }
    }
    let _ = writeln!(out, "\n{:<28} {:>22} {:>22}", "", "closed form", "lyapunov");
    let closed = match p.regime {
        Regime::WeakCoupling => steady_symplectic_weak(&p),
        Regime::HighTemperature => symplectic_high_temperature(p.omega0, p.alpha(), p.t1, p.t2),
    };
    match closed {
        Ok(lam) => {
            let mut sorted_closed = lam;
            sorted_closed.sort_by(f64::total_cmp);
            let closed_ln = 0.0 - 2.0 * sorted_closed.iter().map(|v| v.min(1.0).log2()).sum::<f64>();
            let mut lyap = pt.nu;
            lyap.sort_by(f64::total_cmp);
            for k in 0..2 {
                let _ = writeln!(out, "{:<28} {:>22.12e} {:>22.12e}", format!("partial-transpose nu[{k}]"), sorted_closed[k], lyap[k]);
            }
            let _ = writeln!(out, "{:<28} {:>22.12e} {:>22.12e}", "log negativity", closed_ln, ln);
            if p.regime == Regime::HighTemperature {
                let _ = writeln!(out, "(high-t closed form is the equal-friction large-T approximation)");
            }
        }
        Err(e) => {
            let _ = writeln!(out, "{:<28} {:>22} {:>22.12e}", "log negativity", format!("n/a: {}", e.name()), ln);
        }
    }
    g.emit(out.as_bytes())?;
    Ok(())
}

fn cmd_critical(g: &Globals, alpha: f64) -> Result<(), Failure> {
    let file = g.file_values()?;
    let values = file.overridden_by(&g.overrides());
    let omega = values.omega0.unwrap_or(RunConfig::default().params.omega0);
    let tc = critical_temperature_equilibrium(omega, alpha)?;
    let mut out = format!("T_c = {:.12}\n", tc.value);
    if tc.zero_coupling_limit {
        out.push_str("(alpha = 0: no entanglement at any positive temperature; 0 is the limit)\n");
    }
    if let Some(t1) = values.t1 {
        match critical_temperature_curve(omega, alpha, t1)? {
            Some(t2) => {
                let _ = writeln!(out, "T2_c(T1 = {t1}) = {t2:.12}");
            }
            None => {
                let _ = writeln!(out, "T2_c(T1 = {t1}): none, no entanglement for any T2");
            }
        }
    }
    g.emit(out.as_bytes())?;
    Ok(())
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

fn cmd_sweep(g: &Globals, spec: SweepSpec, jobs: Option<usize>, svg_path: Option<&Path>) -> Result<(), Failure> {
    let jobs = jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, usize::from));
    let result = run_sweep(&spec, jobs)?;
    let mut csv = Vec::new();
    result.write_csv(&mut csv)?;
    g.emit(&csv)?;
    if let Some(out) = &g.out {
        let mut meta = Vec::new();
        result.write_metadata(&mut meta)?;
        meta.push(b'\n');
        fs::write(sidecar_path(out), meta)?;
    }
    let failed = result.cells.len() - result.succeeded();
    if failed > 0 {
        eprintln!("warning: {failed} of {} cells failed (see status column)", result.cells.len());
    }
    if let Some(path) = svg_path {
        let (a1, a2) = (&spec.axis1, &spec.axis2);
        let svg = svg::heatmap(
            &spec.observable.name(),
            a1.param.name(),
            a2.param.name(),
            (a1.min, a1.max),
            (a2.min, a2.max),
            &result.matrix(),
        );
        write_file(path, &svg)?;
    }
    Ok(())
}

fn cmd_validate(g: &Globals, t_grid: Option<Vec<f64>>) -> Result<(), Failure> {
    let cfg = g.run_config()?;
    let grid = t_grid.unwrap_or_else(|| DEFAULT_T_GRID.to_vec());
    if let Some(bad) = grid.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(Error::InvalidParameter(format!("t-grid entries must be finite and >= 0, got {bad}")).into());
    }
    let report = validate(&cfg, &grid);
    g.emit(report.render().as_bytes())?;
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Breach("validation failed".into()))
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let g = &cli.globals;
    match cli.command {
        Command::Evolve { t_max, samples, svg } => cmd_evolve(g, t_max, samples, svg.as_deref()),
        Command::Steady { strict } => cmd_steady(g, strict),
        Command::Critical { alpha } => cmd_critical(g, alpha),
        Command::Validate { t_grid } => cmd_validate(g, t_grid),
        Command::Sweep { axis1, axis2, observable, time, jobs, svg } => {
            let spec = SweepSpec { axis1, axis2, base: g.run_config()?, observable, time };
            cmd_sweep(g, spec, jobs, svg.as_deref())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Core(e) => eprintln!("error: {e}"),
                Failure::Breach(msg) => eprintln!("error: {msg}"),
            }
            ExitCode::from(f.exit_code())
        }
    }
}
