//! Parameter grids and their evaluation.

use etk_core::{rates, thermo, EtError, EtSystem};
use rayon::prelude::*;

use crate::args::Axis;
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl Grid {
    /// Parses `MIN:MAX:COUNT`.
    pub fn parse(text: &str, spacing: Spacing) -> Result<Self, CliError> {
        let usage =
            |why: &str| CliError::Usage(format!("grid `{text}`: {why}; expected MIN:MAX:COUNT"));
        let parts: Vec<&str> = text.split(':').collect();
        let [min, max, count] = parts.as_slice() else {
            return Err(usage("wrong number of fields"));
        };
        let min: f64 = min
            .trim()
            .parse()
            .map_err(|_| usage("MIN is not a number"))?;
        let max: f64 = max
            .trim()
            .parse()
            .map_err(|_| usage("MAX is not a number"))?;
        let count: usize = count
            .trim()
            .parse()
            .map_err(|_| usage("COUNT is not a whole number"))?;
        if !(min.is_finite() && max.is_finite()) {
            return Err(usage("bounds must be finite"));
        }
        if count < 2 {
            return Err(usage("COUNT must be at least 2"));
        }
        if spacing == Spacing::Log && !(min > 0.0 && max > 0.0) {
            return Err(usage("logarithmic grids need positive bounds"));
        }
        Ok(Self {
            min,
            max,
            count,
            spacing,
        })
    }

    /// Grid values; both endpoints are reproduced exactly.
    pub fn values(&self) -> Vec<f64> {
        let last = self.count - 1;
        let lerp = |a: f64, b: f64, i: usize| a + (b - a) * i as f64 / last as f64;
        (0..self.count)
            .map(|i| match (i, self.spacing) {
                (0, _) => self.min,
                (i, _) if i == last => self.max,
                (i, Spacing::Linear) => lerp(self.min, self.max, i),
                (i, Spacing::Log) => 10f64.powf(lerp(self.min.log10(), self.max.log10(), i)),
            })
            .collect()
    }
}

/// One parameter point: the system plus the Laplace argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub e0: f64,
    pub lambda: f64,
    pub v: f64,
    pub temperature: f64,
    pub tau_l: f64,
    pub s: f64,
}

impl Point {
    pub fn with(mut self, axis: Axis, value: f64) -> Self {
        match axis {
            Axis::TauL => self.tau_l = value,
            Axis::E0 => self.e0 = value,
            Axis::Lambda => self.lambda = value,
            Axis::V => self.v = value,
            Axis::Temperature => self.temperature = value,
            Axis::S => self.s = value,
        }
        self
    }

    pub fn system(&self) -> Result<EtSystem, EtError> {
        EtSystem::new(self.e0, self.lambda, self.v, self.temperature, self.tau_l)
    }

    pub fn describe(&self) -> String {
        format!(
            "e0={}, lambda={}, v={}, temp={}, tau_l={}, s={}",
            self.e0, self.lambda, self.v, self.temperature, self.tau_l, self.s
        )
    }
}

/// Everything a CSV row can hold; `None` is written as an empty field.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Row {
    pub axis_name: String,
    pub point: Option<Point>,
    /// Whether the `s` column applies (rate resolutions) or is left empty.
    pub has_s: bool,
    pub k_fwd: Option<f64>,
    pub k_bwd: Option<f64>,
    pub dg: Option<f64>,
    pub ds: Option<f64>,
    pub dh: Option<f64>,
    pub kappa: Option<f64>,
    pub n_used: Option<usize>,
    pub validity: Option<&'static str>,
}

pub fn validity_label(sys: &EtSystem) -> &'static str {
    if sys.semiclassical_validity().valid {
        "ok"
    } else {
        "kT_below_energy_scale"
    }
}

fn numerical(point: &Point, err: EtError) -> CliError {
    match err {
        EtError::Parameter { .. } | EtError::Argument(_) => {
            CliError::Usage(format!("invalid parameters at {}: {err}", point.describe()))
        }
        other => CliError::Numerical(format!(
            "numerical failure at {}: {other}",
            point.describe()
        )),
    }
}

pub fn rate_row(axis_name: &str, point: &Point, rel_tol: f64) -> Result<Row, CliError> {
    let sys = point.system().map_err(|e| numerical(point, e))?;
    let pair = rates::rates_at(point.s, &sys, rel_tol).map_err(|e| numerical(point, e))?;
    Ok(Row {
        axis_name: axis_name.to_string(),
        point: Some(*point),
        has_s: true,
        k_fwd: Some(pair.forward),
        k_bwd: Some(pair.backward),
        kappa: Some(thermo::kappa(&sys)),
        n_used: Some(pair.n_used),
        validity: Some(validity_label(&sys)),
        ..Row::default()
    })
}

pub fn thermo_row(
    axis_name: &str,
    point: &Point,
    rel_tol: f64,
    delta_t: f64,
) -> Result<Row, CliError> {
    let sys = point.system().map_err(|e| numerical(point, e))?;
    let pair = rates::rate_constants(&sys, rel_tol).map_err(|e| numerical(point, e))?;
    let t = thermo::entropy_enthalpy(&sys, delta_t, rel_tol).map_err(|e| numerical(point, e))?;
    Ok(Row {
        axis_name: axis_name.to_string(),
        point: Some(*point),
        has_s: false,
        k_fwd: Some(pair.forward),
        k_bwd: Some(pair.backward),
        dg: Some(t.dg),
        ds: Some(t.ds),
        dh: Some(t.dh),
        kappa: Some(thermo::kappa(&sys)),
        n_used: Some(pair.n_used),
        validity: Some(validity_label(&sys)),
    })
}

/// Worker count from `ETK_THREADS`, or `None` for rayon's default.
pub fn thread_cap(value: Option<&str>) -> Result<Option<usize>, CliError> {
    value
        .map(|v| match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(CliError::Usage(format!(
                "ETK_THREADS must be a positive integer, got `{v}`"
            ))),
        })
        .transpose()
}

/// Evaluates every point on a worker pool and returns rows in input order.
/// The first failing point (in input order) decides the error.
pub fn evaluate<F>(points: &[Point], threads: Option<usize>, eval: F) -> Result<Vec<Row>, CliError>
where
    F: Fn(&Point) -> Result<Row, CliError> + Sync,
{
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    pool.install(|| points.par_iter().map(&eval).collect::<Vec<_>>())
        .into_iter()
        .collect()
}
