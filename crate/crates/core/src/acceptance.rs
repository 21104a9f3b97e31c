//! End-to-end verification criteria.
//!
//! Each criterion runs a complete numerical experiment and reports measured
//! against expected values. All thresholds are fixed here. The time-domain
//! oracle is slow (minutes) and flagged by [`Criterion::is_slow`].

use std::fmt;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::heom::{self, FitConfig, PropagationConfig, Site};
use crate::system::EtSystem;
use crate::{cfkernel, rates, thermo, DEFAULT_REL_TOL};

pub const KAPPA_TAU_TARGET_PS: f64 = 0.0165;
pub const KAPPA_TAU_REL_TOL: f64 = 0.01;
pub const MARCUS_LN_TOL: f64 = 0.05;
pub const TURNOVER_GRID_POINTS: usize = 60;
pub const E0_MAX_TARGET: f64 = -2.4;
pub const E0_MAX_TOL: f64 = 0.5;
pub const MARCUS_DEVIATION_FACTOR: f64 = 3.0;
pub const SYMMETRY_TOL_KJMOL: f64 = 1e-6;
pub const PLATEAU_REL_TOL: f64 = 0.02;
pub const EXTREMUM_DECADES: f64 = 1.0;
pub const CROSS_FORMALISM_REL_TOL: f64 = 1e-10;
pub const CROSS_FORMALISM_POINTS: usize = 100;
pub const ORACLE_REL_TOL: f64 = 0.05;
pub const TRACE_TOL: f64 = 1e-10;
pub const DEPTH_DOUBLING_REL_TOL: f64 = 1e-8;
pub const STEP_HALVING_TOL: f64 = 1e-8;

/// τ_L values of the thermodynamic slices, ps.
pub const SLICE_TAUS: [f64; 4] = [0.01, 0.1, 1.0, 10.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Criterion {
    KappaCalibration,
    MarcusRecovery,
    KramersTurnover,
    MarcusDeviation,
    ThermoSymmetry,
    ThermoOrdering,
    PlateauExtremum,
    CrossFormalism,
    TimeDomainOracle,
    ConvergenceRobustness,
}

impl Criterion {
    pub const ALL: [Criterion; 10] = [
        Criterion::KappaCalibration,
        Criterion::MarcusRecovery,
        Criterion::KramersTurnover,
        Criterion::MarcusDeviation,
        Criterion::ThermoSymmetry,
        Criterion::ThermoOrdering,
        Criterion::PlateauExtremum,
        Criterion::CrossFormalism,
        Criterion::TimeDomainOracle,
        Criterion::ConvergenceRobustness,
    ];

    pub fn number(self) -> usize {
        Self::ALL.iter().position(|&c| c == self).unwrap() + 1
    }

    /// Short name accepted by `etk verify --only`.
    pub fn key(self) -> &'static str {
        match self {
            Criterion::KappaCalibration => "kappa",
            Criterion::MarcusRecovery => "marcus",
            Criterion::KramersTurnover => "turnover",
            Criterion::MarcusDeviation => "marcus-deviation",
            Criterion::ThermoSymmetry => "symmetry",
            Criterion::ThermoOrdering => "ordering",
            Criterion::PlateauExtremum => "plateau",
            Criterion::CrossFormalism => "cross-formalism",
            Criterion::TimeDomainOracle => "oracle",
            Criterion::ConvergenceRobustness => "convergence",
        }
    }

    pub fn from_key(key: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|c| c.key() == key)
    }

    pub fn is_slow(self) -> bool {
        self == Criterion::TimeDomainOracle
    }

    pub fn run(self) -> CriterionReport {
        let start = Instant::now();
        let mut report = CriterionReport {
            criterion: self,
            passed: true,
            lines: Vec::new(),
            elapsed: Duration::ZERO,
        };
        let outcome = match self {
            Criterion::KappaCalibration => kappa_calibration(&mut report),
            Criterion::MarcusRecovery => marcus_recovery(&mut report),
            Criterion::KramersTurnover => kramers_turnover(&mut report),
            Criterion::MarcusDeviation => marcus_deviation(&mut report),
            Criterion::ThermoSymmetry => thermo_symmetry(&mut report),
            Criterion::ThermoOrdering => thermo_ordering(&mut report),
            Criterion::PlateauExtremum => plateau_extremum(&mut report),
            Criterion::CrossFormalism => cross_formalism(&mut report),
            Criterion::TimeDomainOracle => time_domain_oracle(&mut report),
            Criterion::ConvergenceRobustness => convergence_robustness(&mut report),
        };
        if let Err(e) = outcome {
            report.check(false, format!("numerical failure: {e}"));
        }
        report.elapsed = start.elapsed();
        report
    }
}

#[derive(Debug, Clone)]
pub struct CriterionReport {
    pub criterion: Criterion,
    pub passed: bool,
    /// One line per individual check, prefixed `ok` or `FAIL`.
    pub lines: Vec<String>,
    pub elapsed: Duration,
}

impl CriterionReport {
    fn check(&mut self, ok: bool, line: String) {
        self.passed &= ok;
        self.lines
            .push(format!("{} {line}", if ok { "ok  " } else { "FAIL" }));
    }

    fn note(&mut self, line: String) {
        self.lines.push(format!("     {line}"));
    }

    /// The one-line pass/fail summary.
    pub fn summary(&self) -> String {
        format!(
            "[{}] {:>2} {} ({:.1} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.criterion.number(),
            self.criterion.key(),
            self.elapsed.as_secs_f64()
        )
    }
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.summary())?;
        for line in &self.lines {
            writeln!(f, "       {line}")?;
        }
        Ok(())
    }
}

/// Runs the given criteria in order.
pub fn run_all(criteria: &[Criterion]) -> Vec<CriterionReport> {
    criteria.iter().map(|c| c.run()).collect()
}

pub fn linspace(min: f64, max: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![min],
        _ => (0..count)
            .map(|i| min + (max - min) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}

pub fn logspace(min: f64, max: f64, count: usize) -> Vec<f64> {
    linspace(min.log10(), max.log10(), count)
        .into_iter()
        .map(|x| 10f64.powf(x))
        .collect()
}

fn argmax(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .fold(0, |best, (i, &v)| if v > values[best] { i } else { best })
}

fn forward_rate(sys: &EtSystem) -> Result<f64> {
    Ok(rates::rate_constants(sys, DEFAULT_REL_TOL)?.forward)
}

fn kappa_calibration(r: &mut CriterionReport) -> Result<()> {
    let tau = thermo::tau_l_for_kappa(1.0, 3.0, 298.0);
    let rel = (tau - KAPPA_TAU_TARGET_PS).abs() / KAPPA_TAU_TARGET_PS;
    r.check(
        rel <= KAPPA_TAU_REL_TOL,
        format!(
            "tau_L(kappa=1) = {:.4} fs, expected 16.5 fs within 1% (rel {rel:.2e})",
            tau * 1e3
        ),
    );
    Ok(())
}

fn marcus_recovery(r: &mut CriterionReport) -> Result<()> {
    let base = EtSystem::new(0.0, 3.0, 0.01, 298.0, 10.0)?;
    let mut worst = (0.0, f64::NAN);
    for e0 in linspace(-6.0, 0.0, 21) {
        let sys = base.with_e0(e0)?;
        let dev = (forward_rate(&sys)?.ln() - rates::marcus_rate(&sys).ln()).abs();
        if !(dev <= worst.0) {
            worst = (dev, e0);
        }
    }
    r.check(
        worst.0 <= MARCUS_LN_TOL,
        format!(
            "max |ln k - ln k_Marcus| = {:.4} at E0 = {:.2} (tolerance {MARCUS_LN_TOL})",
            worst.0, worst.1
        ),
    );
    Ok(())
}

fn kramers_turnover(r: &mut CriterionReport) -> Result<()> {
    let taus = logspace(1e-3, 100.0, TURNOVER_GRID_POINTS);
    for e0 in [0.0, -1.0, -3.0, -5.0] {
        let base = EtSystem::new(e0, 3.0, 1.0, 298.0, 1.0)?;
        let ks = taus
            .iter()
            .map(|&t| forward_rate(&base.with_tau_l(t)?))
            .collect::<Result<Vec<_>>>()?;
        let i = argmax(&ks);
        let line = format!(
            "E0 = {e0}: max k = {:.4e} /ps at tau_L = {:.4e} ps (grid index {i} of {})",
            ks[i],
            taus[i],
            ks.len()
        );
        if e0 == 0.0 {
            let monotone = ks.windows(2).all(|w| w[1] <= w[0]);
            r.check(i == 0, format!("{line}; expected smallest tau_L"));
            r.note(format!("E0 = 0 monotone decreasing over grid: {monotone}"));
        } else {
            r.check(
                i > 0 && i + 1 < ks.len(),
                format!("{line}; expected interior"),
            );
        }
    }
    Ok(())
}

fn marcus_deviation(r: &mut CriterionReport) -> Result<()> {
    let base = EtSystem::new(0.0, 3.0, 1.0, 298.0, 10.0)?;
    let e0s = linspace(-6.0, 0.0, 61);
    let ks = e0s
        .iter()
        .map(|&e| forward_rate(&base.with_e0(e)?))
        .collect::<Result<Vec<_>>>()?;
    let i = argmax(&ks);
    r.check(
        (e0s[i] - E0_MAX_TARGET).abs() <= E0_MAX_TOL,
        format!(
            "E0 maximizing k at V = 1: {:.2} kJ/mol, expected {E0_MAX_TARGET} +/- {E0_MAX_TOL}",
            e0s[i]
        ),
    );
    let four_lkt = 4.0 * base.lambda() * base.kbt();
    let deviation = e0s
        .iter()
        .zip(&ks)
        .map(|(&e, &k)| ((k / ks[i]).ln() + (e + base.lambda()).powi(2) / four_lkt).abs())
        .fold(0.0, f64::max);
    let threshold = MARCUS_DEVIATION_FACTOR * MARCUS_LN_TOL;
    r.check(
        deviation > threshold,
        format!("max |ln(k/k_max) - Marcus parabola| = {deviation:.3}, required > {threshold}"),
    );
    Ok(())
}

fn thermo_symmetry(r: &mut CriterionReport) -> Result<()> {
    for tau in SLICE_TAUS {
        let base = EtSystem::new(0.0, 3.0, 1.0, 298.0, tau)?;
        let zero = thermo::gibbs(&base, DEFAULT_REL_TOL)?;
        let plus = thermo::gibbs(&base.with_e0(3.0)?, DEFAULT_REL_TOL)?;
        let minus = thermo::gibbs(&base.with_e0(-3.0)?, DEFAULT_REL_TOL)?;
        r.check(
            zero.abs() <= SYMMETRY_TOL_KJMOL && (plus + minus).abs() <= SYMMETRY_TOL_KJMOL,
            format!(
                "tau_L = {tau}: dG(0) = {zero:.2e}, dG(+3) + dG(-3) = {:.2e} (tolerance {SYMMETRY_TOL_KJMOL:e})",
                plus + minus
            ),
        );
    }
    Ok(())
}

fn thermo_ordering(r: &mut CriterionReport) -> Result<()> {
    let e0 = -3.0;
    for tau in SLICE_TAUS {
        let mut failures = Vec::new();
        let lambdas = linspace(0.5, 6.0, 12);
        for &lambda in &lambdas {
            let sys = EtSystem::new(e0, lambda, 1.0, 298.0, tau)?;
            let t = thermo::entropy_enthalpy(&sys, thermo::DEFAULT_DELTA_T, DEFAULT_REL_TOL)?;
            let signs = t.dg.signum() == e0.signum() && t.dh.signum() == e0.signum();
            let order = t.dh.abs() >= t.dg.abs() && t.dg.abs() >= e0.abs();
            if !(signs && order) {
                failures.push(format!(
                    "lambda = {lambda}: dG = {:.4}, dH = {:.4}",
                    t.dg, t.dh
                ));
            }
        }
        r.check(
            failures.is_empty(),
            format!(
                "tau_L = {tau}: sign and |dH| >= |dG| >= |E0| on {} lambda points{}",
                lambdas.len(),
                if failures.is_empty() {
                    String::new()
                } else {
                    format!("; violated at {}", failures.join(", "))
                }
            ),
        );
    }
    Ok(())
}

fn plateau_extremum(r: &mut CriterionReport) -> Result<()> {
    let fig3 = EtSystem::new(-3.0, 3.0, 1.0, 298.0, 1.0)?;
    let dg = |sys: &EtSystem, tau: f64| thermo::gibbs(&sys.with_tau_l(tau)?, DEFAULT_REL_TOL);
    for (lo, hi, label) in [(50.0, 100.0, "slow"), (1e-3, 2e-3, "fast")] {
        let (a, b) = (dg(&fig3, lo)?, dg(&fig3, hi)?);
        let rel = (a - b).abs() / a.abs().max(b.abs());
        r.check(
            rel <= PLATEAU_REL_TOL,
            format!(
                "{label} plateau: dG({lo} ps) = {a:.5}, dG({hi} ps) = {b:.5}, rel change {rel:.2e} (tolerance {PLATEAU_REL_TOL})"
            ),
        );
    }

    let taus = logspace(1e-3, 100.0, TURNOVER_GRID_POINTS);
    for lambda in linspace(0.5, 6.0, 12) {
        if lambda <= fig3.e0().abs() {
            continue;
        }
        let sys = fig3.with_lambda(lambda)?;
        let magnitudes = taus
            .iter()
            .map(|&t| dg(&sys, t).map(f64::abs))
            .collect::<Result<Vec<_>>>()?;
        let i = argmax(&magnitudes);
        let tau_kappa = thermo::tau_l_for_kappa(1.0, lambda, sys.temperature());
        let decades = (taus[i] / tau_kappa).log10();
        r.check(
            decades.abs() <= EXTREMUM_DECADES,
            format!(
                "lambda = {lambda}: max |dG| = {:.4} at tau_L = {:.3e} ps, kappa = 1 at {tau_kappa:.3e} ps ({decades:+.2} decades)",
                magnitudes[i], taus[i]
            ),
        );
    }
    Ok(())
}

fn cross_formalism(r: &mut CriterionReport) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x00e7_4a7e);
    let mut worst = 0.0f64;
    let mut worst_at = String::new();
    for _ in 0..CROSS_FORMALISM_POINTS {
        let sys = EtSystem::new(
            rng.gen_range(-6.0..6.0),
            rng.gen_range(0.2..8.0),
            rng.gen_range(0.01..2.0),
            rng.gen_range(150.0..450.0),
            10f64.powf(rng.gen_range(-3.0..2.0)),
        )?;
        let s = if rng.gen_bool(0.3) {
            0.0
        } else {
            rng.gen_range(0.0..10.0)
        };
        let kern = cfkernel::kernel_at(Complex64::new(s, 0.0), 128, &sys)?;
        let closed = rates::rate_resolutions(s, &kern, &sys)?;
        let k = rates::assemble_k(s, &kern, &sys)?;
        for (a, b) in [
            (closed.forward, -k[(0, 0)].re),
            (closed.backward, k[(0, 1)].re),
        ] {
            let rel = (a - b).abs() / a.abs().max(b.abs());
            if rel > worst {
                worst = rel;
                worst_at = format!("{sys:?}, s = {s}");
            }
        }
    }
    r.check(
        worst <= CROSS_FORMALISM_REL_TOL,
        format!(
            "{CROSS_FORMALISM_POINTS} random points: max relative difference {worst:.2e} (tolerance {CROSS_FORMALISM_REL_TOL:e})"
        ),
    );
    if !worst_at.is_empty() {
        r.note(format!("worst at {worst_at}"));
    }
    Ok(())
}

/// Time-domain run for the Fig. 3 reference system: donor and acceptor starts.
pub fn reference_oracle_config(sys: &EtSystem, depth: usize, site: Site) -> PropagationConfig {
    let dt = heom::max_step(sys);
    PropagationConfig {
        depth,
        t_end: 50.0,
        dt,
        sample_interval: dt,
        initial: site,
    }
}

fn compare_rates(
    r: &mut CriterionReport,
    label: &str,
    fitted: (f64, f64),
    reference: &rates::RatePair,
) {
    for (name, fit, exact) in [
        ("k", fitted.0, reference.forward),
        ("k'", fitted.1, reference.backward),
    ] {
        let rel = (fit - exact).abs() / exact.abs();
        r.check(
            rel <= ORACLE_REL_TOL,
            format!(
                "{label}: time-domain {name} = {fit:.5e}, Laplace {name} = {exact:.5e} (rel {rel:.2e}, tolerance {ORACLE_REL_TOL})"
            ),
        );
    }
}

fn check_trace(r: &mut CriterionReport, label: &str, trace: &heom::PopulationTrace) {
    r.check(
        trace.trace_error_max < TRACE_TOL && trace.hermiticity_error_max < TRACE_TOL,
        format!(
            "{label}: max trace error {:.2e}, max hermiticity error {:.2e} (tolerance {TRACE_TOL:e})",
            trace.trace_error_max, trace.hermiticity_error_max
        ),
    );
}

fn time_domain_oracle(r: &mut CriterionReport) -> Result<()> {
    // Fig. 3 system: strong memory, rates from the integrated population difference.
    let fig3 = EtSystem::new(-3.0, 3.0, 1.0, 298.0, 1.0)?;
    let reference = rates::rate_constants(&fig3, DEFAULT_REL_TOL)?;
    let depth = 64;
    let donor = heom::propagate(&fig3, &reference_oracle_config(&fig3, depth, Site::Donor))?;
    let acceptor = heom::propagate(
        &fig3,
        &reference_oracle_config(&fig3, depth, Site::Acceptor),
    )?;
    check_trace(r, "reference system, donor start", &donor);
    check_trace(r, "reference system, acceptor start", &acceptor);
    let fit = heom::integrated_rates(&donor, &acceptor, &FitConfig::default())?;
    compare_rates(
        r,
        "reference system",
        (fit.forward, fit.backward),
        &reference,
    );
    if let Ok(exp) = heom::fit_rates(&donor, &FitConfig::default()) {
        r.note(format!(
            "reference system: asymptotic decay rate {:.4} /ps vs k + k' = {:.4} /ps (memory-dominated)",
            exp.forward + exp.backward,
            reference.forward + reference.backward
        ));
    }

    // Weak coupling, slow solvent: Markovian populations, exponential fit.
    let weak = EtSystem::new(-3.0, 3.0, 0.01, 298.0, 10.0)?;
    let reference = rates::rate_constants(&weak, DEFAULT_REL_TOL)?;
    let config = PropagationConfig {
        depth: 300,
        t_end: 12_500.0,
        dt: heom::max_step(&weak),
        sample_interval: 1.0,
        initial: Site::Donor,
    };
    let trace = heom::propagate(&weak, &config)?;
    check_trace(r, "weak coupling", &trace);
    let fit = heom::fit_rates(&trace, &FitConfig::default())?;
    r.note(format!(
        "weak coupling: depth {}, R^2 = {:.6}",
        config.depth,
        fit.r_squared.unwrap_or(f64::NAN)
    ));
    compare_rates(r, "weak coupling", (fit.forward, fit.backward), &reference);
    let marcus = rates::marcus_rate(&weak);
    let rel = (fit.forward - marcus).abs() / marcus;
    r.check(
        rel <= ORACLE_REL_TOL,
        format!("weak coupling: time-domain k vs Marcus {marcus:.5e} (rel {rel:.2e})"),
    );
    Ok(())
}

fn convergence_robustness(r: &mut CriterionReport) -> Result<()> {
    let systems = [
        ("reference", EtSystem::new(-3.0, 3.0, 1.0, 298.0, 1.0)?),
        (
            "weak coupling",
            EtSystem::new(-3.0, 3.0, 0.01, 298.0, 10.0)?,
        ),
        ("fast solvent", EtSystem::new(-3.0, 3.0, 1.0, 298.0, 1e-3)?),
        ("slow solvent", EtSystem::new(-3.0, 3.0, 1.0, 298.0, 100.0)?),
    ];
    for (label, sys) in systems {
        let converged = rates::rate_constants(&sys, DEFAULT_REL_TOL)?;
        let depth = 2 * converged.n_used;
        let kern = cfkernel::kernel_at(Complex64::new(0.0, 0.0), depth, &sys)?;
        let doubled = rates::rate_resolutions(0.0, &kern, &sys)?;
        let rel = (doubled.forward - converged.forward).abs() / converged.forward.abs();
        r.check(
            rel < DEPTH_DOUBLING_REL_TOL,
            format!(
                "{label}: k(0) at depth {} vs {depth}: rel change {rel:.2e} (tolerance {DEPTH_DOUBLING_REL_TOL:e})",
                converged.n_used
            ),
        );
    }

    let fig3 = systems[0].1;
    let base = PropagationConfig {
        depth: 20,
        t_end: 5.0,
        dt: heom::max_step(&fig3),
        sample_interval: 0.5,
        initial: Site::Donor,
    };
    let halved = PropagationConfig {
        dt: base.dt / 2.0,
        ..base.clone()
    };
    let coarse = heom::propagate(&fig3, &base)?;
    let fine = heom::propagate(&fig3, &halved)?;
    let diff = (coarse.p_a.last().unwrap() - fine.p_a.last().unwrap()).abs();
    r.check(
        diff < STEP_HALVING_TOL,
        format!(
            "reference system: |P_a(t_end; dt) - P_a(t_end; dt/2)| = {diff:.2e} at dt = {:.3e} ps (tolerance {STEP_HALVING_TOL:e})",
            base.dt
        ),
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_round_trip() {
        for c in Criterion::ALL {
            assert_eq!(Criterion::from_key(c.key()), Some(c));
        }
        assert_eq!(Criterion::from_key("nope"), None);
        assert_eq!(Criterion::KappaCalibration.number(), 1);
        assert_eq!(Criterion::ConvergenceRobustness.number(), 10);
    }

    #[test]
    fn grids() {
        assert_eq!(linspace(-6.0, 0.0, 61)[36], -6.0 + 36.0 * 0.1);
        let g = logspace(1e-3, 100.0, 60);
        assert_eq!(g.len(), 60);
        assert!((g[0] - 1e-3).abs() < 1e-15 && (g[59] - 100.0).abs() < 1e-10);
        assert_eq!(argmax(&[1.0, 3.0, 2.0, 3.0]), 1);
    }
}
