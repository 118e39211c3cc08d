use proptest::prelude::*;

use dipsq::dynamics::{
    laplace_ode_oracle, root_sum_closed_form, two_mode_variance_sum, EvalPath, Instant, TwoModeEvaluator,
};
use dipsq::io::{emit_config, format_sci, parse_config, parse_sci, profile};
use dipsq::lattice::{chain_energy, equilibrium_positions};
use dipsq::quantities::{
    phonon_dispersion, shifted_trap_frequency, single_mode_coupling_at, two_mode_coupling_at, CantileverParams,
    CrystalSetup, MoleculeSpecies, Occupation, PhysicalConstants, SingleMoleculeSetup,
};

const SI: PhysicalConstants = PhysicalConstants::SI;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn cantilever(omega_c: f64, n_bar: f64) -> CantileverParams {
    CantileverParams::new(omega_c, 1e-16, 1.0, 2.1e-23, Occupation::Quanta(n_bar)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn residue_sum_ignores_root_order(c_k in 0.1f64..50.0, frac in 0.0f64..1.9, u in 0.0f64..5.0, perm in 0usize..6) {
        let d = frac * c_k;
        let ev = TwoModeEvaluator::new(c_k, d).unwrap();
        let c0 = ev.rate.real();
        let t = u / (2.0 * c0);
        let [a, b, g] = ev.roots.lambda;
        let orders = [[a, b, g], [a, g, b], [b, a, g], [b, g, a], [g, a, b], [g, b, a]];
        let (base, _) = root_sum_closed_form(&ev.roots.lambda, d, c0, t);
        let (other, _) = root_sum_closed_form(&orders[perm], d, c0, t);
        prop_assert!((base - other).norm() <= 1e-12 * base.norm().max(1.0));
    }

    #[test]
    fn sum_starts_at_two(c_k in 0.01f64..200.0, frac in 0.0f64..2.0) {
        let s = two_mode_variance_sum(c_k, frac * c_k, Instant::Time(0.0)).unwrap().sum;
        prop_assert!((s - 2.0).abs() <= 1e-9);
    }

    #[test]
    fn closed_form_matches_ode(c_k in 0.1f64..50.0, frac in 0.0f64..1.8, u in 0.05f64..4.0) {
        let d = frac * c_k;
        let ev = TwoModeEvaluator::new(c_k, d).unwrap();
        let c0 = ev.rate.real();
        let t = u / (2.0 * c0);
        let (closed, _) = root_sum_closed_form(&ev.roots.lambda, d, c0, t);
        let ode = laplace_ode_oracle(d, c0, t).unwrap();
        prop_assert!(rel(closed.re, ode) <= 1e-6);
    }

    #[test]
    fn evaluator_routes_agree(c_k in 0.1f64..50.0, frac in 0.0f64..1.8, u in 0.0f64..4.0) {
        let d = frac * c_k;
        let closed = TwoModeEvaluator::new(c_k, d).unwrap().at(Instant::Squeezing(u)).unwrap().sum;
        let oracle = TwoModeEvaluator::with_oracle(c_k, d).unwrap().at(Instant::Squeezing(u)).unwrap().sum;
        prop_assert!((closed - oracle).abs() <= 1e-6 * oracle.abs().max(1.0));
    }

    /// The residue term carries a factor C_k0, so the sum has a square-root
    /// branch at D = 2C_k; continuity is checked across the switch from the
    /// closed form to the ODE route, at the smallest D still treated as
    /// underdamped.
    #[test]
    fn continuous_across_route_switch(c_k in 0.5f64..20.0, t_scale in 0.01f64..3.0) {
        let d_crit = 2.0 * c_k;
        let t = t_scale / c_k;
        let below = 2.0 * c_k * (1.0 - 8.0 * f64::EPSILON).sqrt();
        let ev = TwoModeEvaluator::new(c_k, below).unwrap();
        let crit = TwoModeEvaluator::new(c_k, d_crit).unwrap();
        prop_assert_eq!(crit.path, EvalPath::OdeOracle);
        let a = ev.at(Instant::Time(t)).unwrap().sum;
        let b = crit.at(Instant::Time(t)).unwrap().sum;
        prop_assert!((a - b).abs() <= 1e-6, "{:?}: {a} vs {b}", ev.path);
    }

    #[test]
    fn gradient_matches_finite_differences(seed in 0u64..1000) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let sp = MoleculeSpecies::strontium_oxide();
        let l = 2e-7;
        let x: Vec<f64> = (0..8).map(|i| (i as f64 - 3.5) * l + rng.random_range(-0.3..0.3) * l).collect();
        let trap = 1e6;
        let g = chain_energy(&SI, &x, &sp, trap).unwrap().gradient;
        // Error measured against the largest component: a component that is
        // a near-cancelling sum of pair forces has no meaningful relative
        // error of its own at this step size.
        let gmax = g.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let h = 1e-12;
        for i in 0..x.len() {
            let (mut xp, mut xm) = (x.clone(), x.clone());
            xp[i] += h;
            xm[i] -= h;
            let fd = (chain_energy(&SI, &xp, &sp, trap).unwrap().energy
                - chain_energy(&SI, &xm, &sp, trap).unwrap().energy) / (2.0 * h);
            prop_assert!((fd - g[i]).abs() <= 1e-6 * gmax, "component {i}: {fd} vs {}", g[i]);
        }
    }

    #[test]
    fn dispersion_is_even_and_rising(kl in 0.0f64..std::f64::consts::PI) {
        let cr = CrystalSetup::new(MoleculeSpecies::strontium_oxide(), 2e-7, 30, 2e-6, 0.0).unwrap();
        let k = kl / cr.spacing;
        let w = phonon_dispersion(&SI, &cr, k).unwrap();
        prop_assert_eq!(w, phonon_dispersion(&SI, &cr, -k).unwrap());
        let w2 = phonon_dispersion(&SI, &cr, (k * 1.01).min(cr.zone_edge())).unwrap();
        prop_assert!(w2 >= w);
    }

    #[test]
    fn coupling_scales_as_inverse_sixth_power(r in 0.5e-6f64..10e-6, s in 1.1f64..4.0) {
        let sp = MoleculeSpecies::strontium_oxide();
        let c = cantilever(4e6, 100.0);
        let a = single_mode_coupling_at(&SI, &sp, r, &c, 2e6).unwrap();
        let b = single_mode_coupling_at(&SI, &sp, r * s, &c, 2e6).unwrap();
        prop_assert!(rel(b, a * s.powi(-6)) <= 1e-12);
        let a = two_mode_coupling_at(&SI, &sp, r, &c, 1e6).unwrap().c_k;
        let b = two_mode_coupling_at(&SI, &sp, r * s, &c, 1e6).unwrap().c_k;
        prop_assert!(rel(b, a * s.powi(-6)) <= 1e-12);
    }

    #[test]
    fn shifted_trap_decreases_with_distance(r in 0.5e-6f64..10e-6, s in 1.01f64..3.0) {
        let sp = MoleculeSpecies::strontium_oxide();
        let c = cantilever(4e6, 100.0);
        let near = SingleMoleculeSetup::new(sp.clone(), 1e5, r).unwrap();
        let far = SingleMoleculeSetup::new(sp, 1e5, r * s).unwrap();
        prop_assert!(shifted_trap_frequency(&SI, &far, &c) < shifted_trap_frequency(&SI, &near, &c));
    }

    #[test]
    fn coupling_scales_as_root_occupation(n in 0.0f64..1e4) {
        let sp = MoleculeSpecies::strontium_oxide();
        let one = single_mode_coupling_at(&SI, &sp, 2e-6, &cantilever(4e6, 1.0), 2e6).unwrap();
        let c = single_mode_coupling_at(&SI, &sp, 2e-6, &cantilever(4e6, n), 2e6).unwrap();
        prop_assert!((c - one * n.sqrt()).abs() <= 1e-12 * one * n.sqrt().max(1.0));
    }

    #[test]
    fn chain_is_reflection_symmetric(n in 2usize..40) {
        let c = equilibrium_positions(&SI, n, &MoleculeSpecies::strontium_oxide(), 1e6).unwrap();
        let mean = c.mean_spacing();
        for i in 0..n {
            prop_assert!((c.positions[i] + c.positions[n - 1 - i]).abs() <= 1e-9 * mean);
        }
    }

    #[test]
    fn config_round_trip(
        damping in 0.0f64..20.0,
        distance in 1e-7f64..1e-4,
        n_bar in 0.0f64..1e4,
        coupling in 0.01f64..100.0,
        idx in 0usize..6,
    ) {
        let (name, _, _) = dipsq::io::PROFILES[idx];
        let cfg = profile(name).unwrap()
            .with_number("cantilever.damping", damping).unwrap()
            .with_number("setup.distance", distance).unwrap()
            .with_number("cantilever.n_bar", n_bar).unwrap()
            .with_number("coupling.override", coupling).unwrap();
        prop_assert_eq!(parse_config(&emit_config(&cfg)).unwrap(), cfg);
    }

    #[test]
    fn sci_round_trip(bits in any::<u64>()) {
        let x = f64::from_bits(bits);
        let back = parse_sci(&format_sci(x)).unwrap();
        prop_assert!(back == x || (x.is_nan() && back.is_nan()));
    }
}

/// Evaluating the coupling in micrometres, milliseconds, 1e-20 kg and
/// 1e-19 C gives the SI value times the time unit.
#[test]
fn coupling_is_unit_system_independent() {
    let (l, t, m, q) = (1e-6, 1e-3, 1e-20, 1e-19);
    let hbar = SI.hbar * t / (m * l * l);
    let eps0 = SI.epsilon0 * m * l.powi(3) / (q * q * t * t);
    let other = PhysicalConstants::new(hbar, eps0, SI.k_b).unwrap();

    let sp = MoleculeSpecies::strontium_oxide();
    let c = cantilever(4e6, 100.0);
    let si = single_mode_coupling_at(&SI, &sp, 2e-6, &c, 2e6).unwrap();

    let sp2 = MoleculeSpecies::new("SrO", sp.mass / m, sp.dipole / (q * l)).unwrap();
    let c2 = CantileverParams::new(4e6 * t, 1e-16 / m, t, 2.1e-23 / (q * l), Occupation::Quanta(100.0)).unwrap();
    let scaled = single_mode_coupling_at(&other, &sp2, 2e-6 / l, &c2, 2e6 * t).unwrap();
    assert!(rel(scaled, si * t) < 1e-12, "{scaled} vs {}", si * t);

    let setup = SingleMoleculeSetup::new(sp, 1e5, 2e-6).unwrap();
    let setup2 = SingleMoleculeSetup::new(sp2, 1e5 * t, 2e-6 / l).unwrap();
    let w = shifted_trap_frequency(&SI, &setup, &c);
    let w2 = shifted_trap_frequency(&other, &setup2, &c2);
    assert!(rel(w2, w * t) < 1e-12);
}
