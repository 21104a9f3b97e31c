//! Property tests of the continued-fraction kernel and rate formulas.

use etk_core::{cfkernel, rates, EtSystem, KernelElements, DEFAULT_REL_TOL};
use num_complex::Complex64;
use proptest::prelude::*;

fn complex(scale: f64) -> impl Strategy<Value = Complex64> {
    (-scale..scale, -scale..scale).prop_map(|(re, im)| Complex64::new(re, im))
}

prop_compose! {
    fn system()(
        e0 in -6.0..6.0f64,
        lambda in 0.2..8.0f64,
        v in 0.01..2.0f64,
        temperature in 150.0..450.0f64,
        log_tau in -3.0..2.0f64,
    ) -> EtSystem {
        EtSystem::new(e0, lambda, v, temperature, 10f64.powf(log_tau)).unwrap()
    }
}

fn rel_close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * a.norm().max(b.norm()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn green_inverts_dyson_block(
        sys in system(),
        s in (0.01..50.0f64, -20.0..20.0f64),
        x in complex(500.0),
        y in complex(500.0),
        z in complex(50.0),
    ) {
        let s_arg = Complex64::new(s.0, s.1);
        let kern = KernelElements { x, y, z, level: 3, s_arg };
        let g = cfkernel::green_from_kernel(s_arg, &kern, &sys).unwrap();
        let a = cfkernel::alpha(s_arg, x, &sys);
        let b = cfkernel::beta(s_arg, z, &sys);
        let unit = (a + b) * g.x - (b - y).conj() * g.y;
        let zero = (a + b).conj() * g.y - (b - y) * g.x;
        let scale = (a + b).norm() * g.x.norm() + (b - y).norm() * g.y.norm();
        prop_assert!((unit - 1.0).norm() <= 1e-12 * scale, "unit = {unit}");
        prop_assert!(zero.norm() <= 1e-12 * scale, "zero = {zero}");
        prop_assert_eq!(g.level, 3);
    }

    #[test]
    fn closed_form_rates_match_matrix_route(sys in system(), s in 0.0..20.0f64) {
        let kern = cfkernel::kernel_at(Complex64::new(s, 0.0), 64, &sys).unwrap();
        let r = rates::rate_resolutions(s, &kern, &sys).unwrap();
        let k = rates::assemble_k(s, &kern, &sys).unwrap();
        prop_assert!(rel_close(r.forward.into(), (-k[(0, 0)].re).into(), 1e-10));
        prop_assert!(rel_close(r.backward.into(), k[(0, 1)].re.into(), 1e-10));
        // Populations are conserved: every column of K sums to zero.
        for j in 0..2 {
            let column = k[(0, j)].norm() + k[(1, j)].norm();
            prop_assert!((k[(0, j)] + k[(1, j)]).norm() <= 1e-12 * column);
        }
    }

    #[test]
    fn kernel_scales_with_energy_unit(sys in system(), s in 0.0..5.0f64, c in 0.25..4.0f64) {
        let scaled = EtSystem::new(
            sys.e0() * c,
            sys.lambda() * c,
            sys.v() * c,
            sys.temperature() * c,
            sys.tau_l() / c,
        ).unwrap();
        let a = cfkernel::kernel_at(Complex64::new(s, 0.0), 32, &sys).unwrap();
        let b = cfkernel::kernel_at(Complex64::new(s * c, 0.0), 32, &scaled).unwrap();
        for (u, w) in [(a.x, b.x), (a.y, b.y), (a.z, b.z)] {
            prop_assert!(rel_close(u * c, w, 1e-10), "{u} * {c} vs {w}");
        }
    }

    #[test]
    fn kernel_vanishes_linearly_with_reorganization(sys in system(), s in 0.1..5.0f64) {
        let at = |lambda: f64| {
            let probe = sys.with_lambda(lambda).unwrap();
            cfkernel::kernel_at(Complex64::new(s, 0.0), 16, &probe).unwrap()
        };
        let (a, b) = (at(1e-6), at(2e-6));
        prop_assert!(a.x.norm() > 0.0);
        prop_assert!((b.x.norm() / a.x.norm() - 2.0).abs() < 1e-3);
    }

    #[test]
    fn valid_systems_have_positive_rates(sys in system()) {
        // Only the semiclassical regime k_B T >= sqrt(V² + E°²/4) is covered.
        prop_assume!(sys.semiclassical_validity().valid);
        let r = rates::rate_constants(&sys, DEFAULT_REL_TOL).unwrap();
        prop_assert!(r.forward > 0.0 && r.backward > 0.0, "{r:?}");
    }

    #[test]
    fn converged_kernel_is_stable_under_doubling(sys in system()) {
        let s = Complex64::new(0.0, 0.0);
        let (kern, depth) = cfkernel::kernel_converged(s, &sys, DEFAULT_REL_TOL).unwrap();
        let deeper = cfkernel::kernel_at(s, 2 * depth, &sys).unwrap();
        for (u, w) in [(kern.x, deeper.x), (kern.y, deeper.y), (kern.z, deeper.z)] {
            prop_assert!((u - w).norm() <= 1e-8 * u.norm().max(cfkernel::ABSOLUTE_FLOOR));
        }
    }
}
