//! Time-domain propagation of the truncated Debye hierarchy.
//!
//! ```text
//! dρ_n/dt = −(iL + nγ)ρ_n − iBρ_{n+1} − inAρ_{n−1},   ρ_{N+1} ≡ 0
//! L = [H, ·]/ħ,  H = (E°+λ)|b⟩⟨b| + V(|a⟩⟨b| + |b⟩⟨a|)
//! A = (2λk_BT/ħ²)[|b⟩⟨b|, ·] − i(λγ/ħ){|b⟩⟨b|, ·},  B = [|b⟩⟨b|, ·]
//! ```
//!
//! Auxiliary magnitudes grow like sqrt(n!|η|ⁿ), which overflows f64 at the
//! depths slow solvents need, so levels are stored normalized,
//! ρ̂_n = ρ_n / sqrt(n!|η|ⁿ). Level 0 is the physical reduced density matrix.
//!
//! Integration is classical fixed-step RK4. The populations obtained this
//! way cross-check the Laplace-domain rate constants of [`crate::rates`].

use std::io::{self, Write};

use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::constants::HBAR;
use crate::error::{EtError, Result};
use crate::rates;
use crate::system::EtSystem;

pub type Rho = Matrix2<Complex64>;

/// Hard cap on the number of integration steps of one propagation.
pub const MAX_STEPS: u64 = 100_000_000;

/// Trace drift at which a propagation is abandoned.
pub const STABILITY_TRACE_ERROR: f64 = 1e-6;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Site initially holding the whole population.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Site {
    Donor,
    Acceptor,
}

/// Stack of normalized hierarchy matrices ρ̂₀ … ρ̂_N at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct HierarchyState {
    pub matrices: Vec<Rho>,
    pub time: f64,
    pub depth: usize,
}

impl HierarchyState {
    /// ρ₀ = |site⟩⟨site|, all auxiliaries zero.
    pub fn initial(depth: usize, site: Site) -> Self {
        let mut matrices = vec![Rho::zeros(); depth + 1];
        let idx = match site {
            Site::Donor => 0,
            Site::Acceptor => 1,
        };
        matrices[0][(idx, idx)] = Complex64::new(1.0, 0.0);
        Self {
            matrices,
            time: 0.0,
            depth,
        }
    }

    pub fn rho(&self) -> &Rho {
        &self.matrices[0]
    }

    pub fn trace_error(&self) -> f64 {
        (self.rho().trace() - Complex64::new(1.0, 0.0)).norm()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let r = self.rho();
        let off = (r[(0, 1)] - r[(1, 0)].conj()).norm();
        off.max(r[(0, 0)].im.abs()).max(r[(1, 1)].im.abs())
    }
}

/// Per-system coefficients of the normalized hierarchy.
#[derive(Debug, Clone)]
struct Generator {
    v: f64,
    bias: f64,
    gamma: f64,
    /// sqrt((n+1)|η|), coupling of level n to n+1.
    up: Vec<f64>,
    /// Coefficients of the ab, ba and bb entries of ρ̂_{n−1} in dρ̂_n/dt:
    /// i sqrt(n/|η|) η*, −i sqrt(n/|η|) η and −2 sqrt(n/|η|) λγ/ħ.
    down: Vec<(Complex64, Complex64, f64)>,
}

impl Generator {
    fn new(sys: &EtSystem, depth: usize) -> Self {
        let eta = sys.eta();
        let scale = if eta.norm() > 0.0 { eta.norm() } else { 1.0 };
        let dissipation = sys.lambda() * sys.gamma() / HBAR;
        Self {
            v: sys.v() / HBAR,
            bias: sys.bias() / HBAR,
            gamma: sys.gamma(),
            up: (0..=depth)
                .map(|n| ((n + 1) as f64 * scale).sqrt())
                .collect(),
            down: (0..=depth)
                .map(|n| {
                    let c = (n as f64 / scale).sqrt();
                    (I * c * eta.conj(), -I * c * eta, -2.0 * c * dissipation)
                })
                .collect(),
        }
    }

    fn derivative(&self, levels: &[Rho], out: &mut [Rho]) {
        let depth = levels.len() - 1;
        let (v, e) = (self.v, self.bias);
        let zero = Rho::zeros();
        for (n, slot) in out.iter_mut().enumerate() {
            let rho = &levels[n];
            let (p, q, r, w) = (rho.m11, rho.m12, rho.m21, rho.m22);
            let damp = n as f64 * self.gamma;

            // −i[H, ρ]/ħ − nγρ
            let daa = -I * (v * (r - q)) - damp * p;
            let mut dab = -I * (v * (w - p) - e * q) - damp * q;
            let mut dba = -I * (v * (p - w) + e * r) - damp * r;
            let mut dbb = -I * (v * (q - r)) - damp * w;

            // −iBρ_{n+1}, Bρ = [[0, −q], [r, 0]]
            let next = if n < depth { &levels[n + 1] } else { &zero };
            let c = self.up[n];
            dab += Complex64::new(0.0, c) * next.m12;
            dba -= Complex64::new(0.0, c) * next.m21;

            if n > 0 {
                // −inAρ_{n−1}, Aρ = [[0, −η*q], [ηr, −2i(λγ/ħ)w]]
                let prev = &levels[n - 1];
                let (c_ab, c_ba, c_bb) = self.down[n];
                dab += c_ab * prev.m12;
                dba += c_ba * prev.m21;
                dbb += c_bb * prev.m22;
            }
            *slot = Rho::new(daa, dab, dba, dbb);
        }
    }
}

/// Time derivative of a normalized hierarchy state.
pub fn hierarchy_derivative(state: &HierarchyState, sys: &EtSystem) -> HierarchyState {
    let gen = Generator::new(sys, state.depth);
    let mut out = vec![Rho::zeros(); state.matrices.len()];
    gen.derivative(&state.matrices, &mut out);
    HierarchyState {
        matrices: out,
        time: state.time,
        depth: state.depth,
    }
}

/// Sampled donor/acceptor populations of one propagation.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationTrace {
    pub times: Vec<f64>,
    pub p_a: Vec<f64>,
    pub p_b: Vec<f64>,
    /// |tr ρ₀ − 1| at each sample.
    pub trace_err: Vec<f64>,
    /// Largest |tr ρ₀ − 1| over every integration step.
    pub trace_error_max: f64,
    /// Largest deviation of ρ₀ from Hermiticity over every integration step.
    pub hermiticity_error_max: f64,
    pub initial: Site,
}

impl PopulationTrace {
    pub fn t_end(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }

    /// Writes the trajectory as CSV with header `t_ps,p_a,p_b,trace_err`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t_ps,p_a,p_b,trace_err")?;
        for i in 0..self.times.len() {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                self.times[i], self.p_a[i], self.p_b[i], self.trace_err[i]
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationConfig {
    pub depth: usize,
    /// Final time, ps.
    pub t_end: f64,
    /// Integration step, ps. The number of steps is round(t_end/dt) and the
    /// step is adjusted to land exactly on `t_end`.
    pub dt: f64,
    /// Spacing between stored samples, ps; rounded to a whole number of steps.
    pub sample_interval: f64,
    pub initial: Site,
}

impl PropagationConfig {
    /// Configuration with the largest admissible step and default final time.
    pub fn for_system(sys: &EtSystem, depth: usize) -> Self {
        let dt = max_step(sys);
        let t_end = default_t_end(sys);
        Self {
            depth,
            t_end,
            dt,
            sample_interval: (t_end / 4000.0).max(dt),
            initial: Site::Donor,
        }
    }
}

/// Largest admissible step, min(τ_L, ħ/max(|V|, |E°+λ|, k_BT)) / 20.
pub fn max_step(sys: &EtSystem) -> f64 {
    let energy = sys.v().abs().max(sys.bias().abs()).max(sys.kbt());
    sys.tau_l().min(HBAR / energy) / 20.0
}

/// Default propagation length: 20 relaxation times estimated from the
/// Marcus rate in series with solvent control, in both directions.
pub fn default_t_end(sys: &EtSystem) -> f64 {
    let estimate = |s: &EtSystem| 1.0 / (1.0 / rates::marcus_rate(s) + s.tau_l());
    let forward = estimate(sys);
    let backward = sys
        .with_e0(-sys.e0())
        .map(|s| estimate(&s))
        .unwrap_or(forward);
    20.0 / (forward + backward)
}

/// Propagates the hierarchy from ρ(0) = |site⟩⟨site| with RK4.
pub fn propagate(sys: &EtSystem, config: &PropagationConfig) -> Result<PopulationTrace> {
    let dt_limit = max_step(sys);
    if !(config.dt > 0.0) || config.dt > dt_limit * (1.0 + 1e-12) {
        return Err(EtError::Argument(format!(
            "time step {} ps outside (0, {dt_limit:e}] ps",
            config.dt
        )));
    }
    if !(config.t_end > 0.0 && config.t_end.is_finite()) {
        return Err(EtError::Argument(format!(
            "final time must be positive, got {}",
            config.t_end
        )));
    }
    let steps = (config.t_end / config.dt).round().max(1.0);
    if steps > MAX_STEPS as f64 {
        return Err(EtError::Argument(format!(
            "{steps} steps exceed the limit of {MAX_STEPS}"
        )));
    }
    let steps = steps as u64;
    let dt = config.t_end / steps as f64;
    let stride = ((config.sample_interval / dt).round() as u64).max(1);

    let gen = Generator::new(sys, config.depth);
    let mut state = HierarchyState::initial(config.depth, config.initial);
    let len = state.matrices.len();
    let mut acc = vec![Rho::zeros(); len];
    let mut stage = vec![Rho::zeros(); len];
    let mut slope = vec![Rho::zeros(); len];

    let capacity = (steps / stride + 2) as usize;
    let mut trace = PopulationTrace {
        times: Vec::with_capacity(capacity),
        p_a: Vec::with_capacity(capacity),
        p_b: Vec::with_capacity(capacity),
        trace_err: Vec::with_capacity(capacity),
        trace_error_max: 0.0,
        hermiticity_error_max: 0.0,
        initial: config.initial,
    };
    record(&mut trace, &state);

    let real = |x: f64| Complex64::new(x, 0.0);
    let (h2, h3, h6, h) = (real(dt / 2.0), real(dt / 3.0), real(dt / 6.0), real(dt));
    let y = &mut state.matrices;
    for step in 1..=steps {
        gen.derivative(y, &mut slope);
        for i in 0..len {
            acc[i] = y[i] + slope[i] * h6;
            stage[i] = y[i] + slope[i] * h2;
        }
        gen.derivative(&stage, &mut slope);
        for i in 0..len {
            acc[i] += slope[i] * h3;
            stage[i] = y[i] + slope[i] * h2;
        }
        gen.derivative(&stage, &mut slope);
        for i in 0..len {
            acc[i] += slope[i] * h3;
            stage[i] = y[i] + slope[i] * h;
        }
        gen.derivative(&stage, &mut slope);
        for i in 0..len {
            y[i] = acc[i] + slope[i] * h6;
        }

        let rho = &y[0];
        let trace_err = (rho.trace() - Complex64::new(1.0, 0.0)).norm();
        if !(trace_err <= STABILITY_TRACE_ERROR) {
            return Err(EtError::Stability(format!(
                "trace error {trace_err:e} at t = {} ps (dt = {dt}, depth = {})",
                step as f64 * dt,
                config.depth
            )));
        }
        trace.trace_error_max = trace.trace_error_max.max(trace_err);
        let herm = (rho[(0, 1)] - rho[(1, 0)].conj())
            .norm()
            .max(rho[(0, 0)].im.abs())
            .max(rho[(1, 1)].im.abs());
        trace.hermiticity_error_max = trace.hermiticity_error_max.max(herm);

        if step % stride == 0 || step == steps {
            trace.times.push(step as f64 * dt);
            trace.p_a.push(rho[(0, 0)].re);
            trace.p_b.push(rho[(1, 1)].re);
            trace.trace_err.push(trace_err);
        }
    }
    Ok(trace)
}

fn record(trace: &mut PopulationTrace, state: &HierarchyState) {
    let rho = state.rho();
    trace.times.push(state.time);
    trace.p_a.push(rho[(0, 0)].re);
    trace.p_b.push(rho[(1, 1)].re);
    trace.trace_err.push(state.trace_error());
}

/// Thresholds of the rate extraction from population traces.
#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    /// Residuals |P_a − P_a(∞)| inside this range enter the regression.
    pub residual_window: (f64, f64),
    pub min_r_squared: f64,
    /// Maximum |P_a(t_end) − P_a(0.9 t_end)| for an equilibrated trace.
    pub steady_tolerance: f64,
    /// Trailing fraction of the trace averaged for P_a(∞).
    pub tail_fraction: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            residual_window: (1e-5, 1e-1),
            min_r_squared: 0.999,
            steady_tolerance: 1e-6,
            tail_fraction: 0.05,
        }
    }
}

/// Rate constants recovered from time-domain populations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub forward: f64,
    pub backward: f64,
    pub p_a_inf: f64,
    /// Coefficient of determination of the log-linear regression, when one was made.
    pub r_squared: Option<f64>,
}

/// Forward/backward rates from the exponential approach of P_a to equilibrium.
///
/// The total rate k+k′ is minus the slope of ln|P_a − P_a(∞)|; detailed
/// balance k/k′ = (1 − P_a(∞))/P_a(∞) splits it. Only meaningful when
/// the rate kernels decay much faster than the populations.
pub fn fit_rates(trace: &PopulationTrace, config: &FitConfig) -> Result<RateFit> {
    let p_inf = equilibrium_population(trace, config)?;
    let (lo, hi) = config.residual_window;
    let residual: Vec<f64> = trace.p_a.iter().map(|p| (p - p_inf).abs()).collect();

    // The window starts after the last excursion above `hi` and ends at the
    // first subsequent drop below `lo`.
    let start = residual.iter().rposition(|&r| r > hi).map_or(0, |i| i + 1);
    let end = residual[start..]
        .iter()
        .position(|&r| r < lo)
        .map_or(residual.len(), |i| start + i);
    let (ts, ln_r): (Vec<f64>, Vec<f64>) = (start..end)
        .filter(|&i| residual[i] > 0.0)
        .map(|i| (trace.times[i], residual[i].ln()))
        .unzip();
    if ts.len() < 3 {
        return Err(EtError::PoorFit { r_squared: 0.0 });
    }

    let (slope, r_squared) = linear_regression(&ts, &ln_r);
    if !(r_squared >= config.min_r_squared) || !(slope < 0.0) {
        return Err(EtError::PoorFit { r_squared });
    }
    let total = -slope;
    Ok(RateFit {
        forward: total * (1.0 - p_inf),
        backward: total * p_inf,
        p_a_inf: p_inf,
        r_squared: Some(r_squared),
    })
}

/// Rate constants as integrated memory kernels from a donor-start and an
/// acceptor-start trace on the same time grid.
///
/// For f(t) = P_a(t | a) − P_a(t | b) the two-site kinetic equations give
/// ∫₀^∞ f dt = 1/(k(0) + k′(0)) exactly, with or without memory, and
/// P_a(∞) = k′/(k + k′).
pub fn integrated_rates(
    from_donor: &PopulationTrace,
    from_acceptor: &PopulationTrace,
    config: &FitConfig,
) -> Result<RateFit> {
    if from_donor.initial != Site::Donor || from_acceptor.initial != Site::Acceptor {
        return Err(EtError::Argument(
            "integrated rates need one donor-start and one acceptor-start trace".into(),
        ));
    }
    if from_donor.times != from_acceptor.times {
        return Err(EtError::Argument(
            "donor and acceptor traces must share the time grid".into(),
        ));
    }
    let p_inf = 0.5
        * (equilibrium_population(from_donor, config)?
            + equilibrium_population(from_acceptor, config)?);
    let t = &from_donor.times;
    let f: Vec<f64> = from_donor
        .p_a
        .iter()
        .zip(&from_acceptor.p_a)
        .map(|(a, b)| a - b)
        .collect();
    let integral: f64 = (1..t.len())
        .map(|i| 0.5 * (t[i] - t[i - 1]) * (f[i] + f[i - 1]))
        .sum();
    if !(integral > 0.0) {
        return Err(EtError::PoorFit { r_squared: 0.0 });
    }
    let total = 1.0 / integral;
    Ok(RateFit {
        forward: total * (1.0 - p_inf),
        backward: total * p_inf,
        p_a_inf: p_inf,
        r_squared: None,
    })
}

fn equilibrium_population(trace: &PopulationTrace, config: &FitConfig) -> Result<f64> {
    let n = trace.times.len();
    if n < 2 {
        return Err(EtError::NotEquilibrated {
            drift: f64::INFINITY,
        });
    }
    let t_end = trace.t_end();
    let i90 = trace.times.partition_point(|&t| t < 0.9 * t_end).min(n - 1);
    let drift = (trace.p_a[n - 1] - trace.p_a[i90]).abs();
    if !(drift < config.steady_tolerance) {
        return Err(EtError::NotEquilibrated { drift });
    }
    let tail_start = trace
        .times
        .partition_point(|&t| t < (1.0 - config.tail_fraction) * t_end)
        .min(n - 1);
    let tail = &trace.p_a[tail_start..];
    Ok(tail.iter().sum::<f64>() / tail.len() as f64)
}

/// Least-squares slope and R² of y against x.
fn linear_regression(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (xi, yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
        syy += (yi - my) * (yi - my);
    }
    let slope = sxy / sxx;
    let r_squared = if syy > 0.0 {
        sxy * sxy / (sxx * syy)
    } else {
        1.0
    };
    (slope, r_squared)
}
