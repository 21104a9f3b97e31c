//! `etk`: parameter sweeps, figure data, verification and time-domain runs.

mod args;
mod config;
mod error;
mod output;
mod sweep;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use etk_core::acceptance::Criterion;
use etk_core::heom::{self, PropagationConfig, Site};
use etk_core::{thermo, DEFAULT_REL_TOL};

use args::{
    Axis, Cli, Command, GridArgs, OutputArgs, PropagateArgs, RatesArgs, SiteArg, SystemArgs,
    ThermoArgs, VerifyArgs,
};
use config::Config;
use error::CliError;
use output::PlotKind;
use sweep::{Grid, Point, Spacing};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Rates(a) => cmd_rates(&a),
        Command::Thermo(a) => cmd_thermo(&a),
        Command::Verify(a) => cmd_verify(&a),
        Command::Propagate(a) => cmd_propagate(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        // A closed downstream pipe (e.g. `| head`) is not an error.
        Err(CliError::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("etk: {err}");
            if matches!(err, CliError::Usage(_)) {
                eprintln!("Run `etk --help` for usage.");
            }
            err.exit_code()
        }
    }
}

fn load_config(system: &SystemArgs) -> Result<Config, CliError> {
    system
        .config
        .as_deref()
        .map(Config::load)
        .unwrap_or_else(|| Ok(Config::default()))
}

/// Flag value, else config value, else default.
fn resolve(flag: Option<f64>, config: &Config, key: &str, default: f64) -> Result<f64, CliError> {
    Ok(match flag {
        Some(v) => v,
        None => config.number(key)?.unwrap_or(default),
    })
}

fn base_point(system: &SystemArgs, config: &Config, s: Option<f64>) -> Result<Point, CliError> {
    Ok(Point {
        e0: resolve(system.e0, config, "e0", -3.0)?,
        lambda: resolve(system.lambda, config, "lambda", 3.0)?,
        v: resolve(system.v, config, "v", 1.0)?,
        temperature: resolve(system.temp, config, "temp", 298.0)?,
        tau_l: resolve(system.tau_l, config, "tau-l", 1.0)?,
        s: resolve(s, config, "s", 0.0)?,
    })
}

fn positive(value: f64, what: &str) -> Result<f64, CliError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(CliError::Usage(format!(
            "{what} must be positive, got {value}"
        )))
    }
}

/// Axis and grid from flags or config; `suffix` selects the second axis.
fn resolve_axis(
    axis: Option<Axis>,
    log: Option<&str>,
    lin: Option<&str>,
    config: &Config,
    suffix: &str,
) -> Result<Option<(Axis, Grid)>, CliError> {
    let key = |k: &str| format!("{k}{suffix}");
    let axis = match axis {
        Some(a) => Some(a),
        None => config
            .get(&key("axis"))
            .map(|name| {
                Axis::from_name(name)
                    .ok_or_else(|| CliError::Usage(format!("unknown axis `{name}` in config")))
            })
            .transpose()?,
    };
    let (log, lin) = if log.is_some() || lin.is_some() {
        (log, lin)
    } else {
        (config.get(&key("log")), config.get(&key("lin")))
    };
    let grid = match (log, lin) {
        (Some(_), Some(_)) => {
            return Err(CliError::Usage(format!(
                "--{} and --{} are exclusive",
                key("log"),
                key("lin")
            )))
        }
        (Some(g), None) => Some(Grid::parse(g, Spacing::Log)?),
        (None, Some(g)) => Some(Grid::parse(g, Spacing::Linear)?),
        (None, None) => None,
    };
    match (axis, grid) {
        (Some(a), Some(g)) => Ok(Some((a, g))),
        (None, None) => Ok(None),
        (Some(a), None) => Err(CliError::Usage(format!(
            "axis {} needs a grid: --{} or --{} MIN:MAX:COUNT",
            a.name(),
            key("log"),
            key("lin")
        ))),
        (None, Some(_)) => Err(CliError::Usage(format!("a grid needs --{}", key("axis")))),
    }
}

fn primary_axis(grid: &GridArgs, config: &Config) -> Result<(Axis, Grid), CliError> {
    resolve_axis(
        grid.axis,
        grid.log.as_deref(),
        grid.lin.as_deref(),
        config,
        "",
    )?
    .ok_or_else(|| CliError::Usage("--axis with --log or --lin MIN:MAX:COUNT is required".into()))
}

fn threads() -> Result<Option<usize>, CliError> {
    sweep::thread_cap(std::env::var("ETK_THREADS").ok().as_deref())
}

fn write_output(
    rows: &[sweep::Row],
    out: &OutputArgs,
    kind: PlotKind,
    axis: (Axis, Spacing),
    axis2: Option<(Axis, Spacing)>,
) -> Result<(), CliError> {
    match &out.output {
        Some(path) => {
            output::write_rows(BufWriter::new(File::create(path)?), rows)?;
            if out.gnuplot {
                let script = output::gnuplot_script(path, kind, axis, axis2);
                std::fs::write(output::script_path(path), script)?;
            }
        }
        None => output::write_rows(io::stdout().lock(), rows)?,
    }
    Ok(())
}

fn cmd_rates(a: &RatesArgs) -> Result<(), CliError> {
    let config = load_config(&a.system)?;
    let base = base_point(&a.system, &config, a.s)?;
    let rel_tol = positive(
        resolve(a.rel_tol, &config, "rel-tol", DEFAULT_REL_TOL)?,
        "rel-tol",
    )?;
    let (axis, grid) = primary_axis(&a.grid, &config)?;
    let points: Vec<Point> = grid
        .values()
        .into_iter()
        .map(|x| base.with(axis, x))
        .collect();
    let rows = sweep::evaluate(&points, threads()?, |p| {
        sweep::rate_row(axis.name(), p, rel_tol)
    })?;
    write_output(
        &rows,
        &a.output,
        PlotKind::Rates,
        (axis, grid.spacing),
        None,
    )
}

fn cmd_thermo(a: &ThermoArgs) -> Result<(), CliError> {
    let config = load_config(&a.system)?;
    let base = base_point(&a.system, &config, None)?;
    let rel_tol = positive(
        resolve(a.rel_tol, &config, "rel-tol", DEFAULT_REL_TOL)?,
        "rel-tol",
    )?;
    let delta_t = positive(
        resolve(a.delta_t, &config, "delta-t", thermo::DEFAULT_DELTA_T)?,
        "delta-t",
    )?;
    let (axis, grid) = primary_axis(&a.grid, &config)?;
    let second = resolve_axis(a.axis2, a.log2.as_deref(), a.lin2.as_deref(), &config, "2")?;
    for (ax, _) in std::iter::once((axis, &grid)).chain(second.as_ref().map(|(ax, g)| (*ax, g))) {
        if ax == Axis::S {
            return Err(CliError::Usage(
                "thermodynamics uses rate constants at s = 0; axis s is not available".into(),
            ));
        }
    }
    if let Some((ax2, _)) = &second {
        if *ax2 == axis {
            return Err(CliError::Usage("--axis2 must differ from --axis".into()));
        }
    }

    let (points, name) = match &second {
        None => (
            grid.values()
                .into_iter()
                .map(|x| base.with(axis, x))
                .collect::<Vec<_>>(),
            axis.name().to_string(),
        ),
        Some((ax2, grid2)) => {
            let inner = grid2.values();
            let points = grid
                .values()
                .into_iter()
                .flat_map(|x| inner.iter().map(move |&y| base.with(axis, x).with(*ax2, y)))
                .collect();
            (points, format!("{}:{}", axis.name(), ax2.name()))
        }
    };
    let rows = sweep::evaluate(&points, threads()?, |p| {
        sweep::thermo_row(&name, p, rel_tol, delta_t)
    })?;
    write_output(
        &rows,
        &a.output,
        PlotKind::Thermo,
        (axis, grid.spacing),
        second.map(|(ax, g)| (ax, g.spacing)),
    )
}

fn cmd_verify(a: &VerifyArgs) -> Result<(), CliError> {
    let selected: Vec<Criterion> = if a.only.is_empty() {
        Criterion::ALL
            .iter()
            .copied()
            .filter(|c| a.oracle || !c.is_slow())
            .collect()
    } else {
        a.only
            .iter()
            .map(|key| {
                Criterion::from_key(key).ok_or_else(|| {
                    let keys: Vec<&str> = Criterion::ALL.iter().map(|c| c.key()).collect();
                    CliError::Usage(format!(
                        "unknown criterion `{key}` (known: {})",
                        keys.join(", ")
                    ))
                })
            })
            .collect::<Result<_, _>>()?
    };
    let mut out = io::stdout().lock();
    let mut failed = 0;
    for criterion in Criterion::ALL {
        if !selected.contains(&criterion) {
            if a.only.is_empty() {
                writeln!(
                    out,
                    "[SKIP] {:>2} {} (slow; run with --oracle)",
                    criterion.number(),
                    criterion.key()
                )?;
            }
            continue;
        }
        let report = criterion.run();
        failed += usize::from(!report.passed);
        write!(out, "{report}")?;
        out.flush()?;
    }
    if failed == 0 {
        Ok(())
    } else {
        Err(CliError::Verification(failed))
    }
}

fn cmd_propagate(a: &PropagateArgs) -> Result<(), CliError> {
    let config = load_config(&a.system)?;
    let point = base_point(&a.system, &config, None)?;
    let sys = point.system().map_err(|e| CliError::Usage(e.to_string()))?;
    let mut run = PropagationConfig::for_system(&sys, a.depth);
    run.initial = match a.site {
        SiteArg::Donor => Site::Donor,
        SiteArg::Acceptor => Site::Acceptor,
    };
    if let Some(t) = a.t_end {
        run.t_end = positive(t, "t-end")?;
    }
    if let Some(dt) = a.dt {
        run.dt = positive(dt, "dt")?;
    }
    run.sample_interval = match a.sample_interval {
        Some(h) => positive(h, "sample-interval")?,
        None => (run.t_end / 4000.0).max(run.dt),
    };
    let trace = heom::propagate(&sys, &run).map_err(|e| match e {
        etk_core::EtError::Stability(_) | etk_core::EtError::Argument(_) => {
            CliError::Usage(e.to_string())
        }
        other => CliError::Numerical(format!(
            "propagation failed for {}: {other}",
            point.describe()
        )),
    })?;
    eprintln!(
        "etk: depth {}, dt {:.3e} ps, t_end {:.4e} ps, max trace error {:.2e}",
        run.depth, run.dt, run.t_end, trace.trace_error_max
    );
    match &a.output {
        Some(path) => write_trace(&trace, path),
        None => Ok(trace.write_csv(io::stdout().lock())?),
    }
}

fn write_trace(trace: &heom::PopulationTrace, path: &Path) -> Result<(), CliError> {
    let mut out = BufWriter::new(File::create(path)?);
    trace.write_csv(&mut out)?;
    out.flush()?;
    Ok(())
}
