use std::f64::consts::PI;

use dipsq::dynamics::{entanglement_window, Instant, TwoModeEvaluator, WindowStatus};
use dipsq::fock_oracle::{
    evolve_single_mode, evolve_two_mode, mean_occupations, quadrature_variance, quantized_pump_run, PumpCutoffs,
};
use dipsq::io::{profile, sweep};
use dipsq::lattice::{equilibrium_positions, hessian_modes, lattice_sum_dispersion, trap_for_central_spacing};
use dipsq::quantities::{
    phonon_dispersion, resonance_frequency, shifted_phonon_frequency, shifted_trap_frequency, single_mode_coupling,
    thermal_occupation, two_mode_coupling, validity_window, CantileverParams, CrystalSetup, MoleculeSpecies,
    Occupation, PhysicalConstants, SingleMoleculeSetup,
};

const SI: PhysicalConstants = PhysicalConstants::SI;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn cantilever(omega_c: f64, occupation: Occupation) -> CantileverParams {
    CantileverParams::new(omega_c, 1e-16, 1.0, 2.1e-23, occupation).unwrap()
}

#[test]
fn fock_results_converged_in_cutoff() {
    for u in [0.25, 0.5, 1.0] {
        let t = u / 2.0;
        let a = quadrature_variance(&evolve_single_mode(1.0, t, 60).unwrap()).total();
        let b = quadrature_variance(&evolve_single_mode(1.0, t, 120).unwrap()).total();
        assert!(rel(a, b) < 1e-3, "single u = {u}: {a} vs {b}");
        let a = quadrature_variance(&evolve_two_mode(1.0, t, 40).unwrap()).total();
        let b = quadrature_variance(&evolve_two_mode(1.0, t, 80).unwrap()).total();
        assert!(rel(a, b) < 1e-3, "pair u = {u}: {a} vs {b}");
    }
}

/// Squeezed vacuum: n̄ = sinh² r with r = 2Ct for one mode; each mode of the
/// pair has n̄ = sinh² r with r = C_k t.
#[test]
fn fock_occupations_follow_squeezing() {
    let t = 0.4;
    let (n, _) = mean_occupations(&evolve_single_mode(1.0, t, 60).unwrap());
    assert!(rel(n, (2.0 * t).sinh().powi(2)) < 1e-6);
    let (na, nb) = mean_occupations(&evolve_two_mode(1.0, t, 40).unwrap());
    assert!(rel(na, t.sinh().powi(2)) < 1e-6);
    assert!((na - nb).abs() < 1e-12);
}

#[test]
fn pump_run_conserves_excitations() {
    let n = 9.0f64;
    let times = [0.0, 0.1, 0.2, 0.25];
    let run = quantized_pump_run(1.0 / n.sqrt(), n.sqrt(), &times, PumpCutoffs::for_occupation(n)).unwrap();
    assert!(run.conserved_drift < 1e-10, "{}", run.conserved_drift);
    assert!(!run.cutoff_limited());
    assert!((run.variances[0] - 0.25).abs() < 1e-12);
}

#[test]
fn occupation_from_temperature() {
    let omega_c = 4e6;
    let t = 100.0 * SI.hbar * omega_c / SI.k_b;
    let n = thermal_occupation(&SI, &cantilever(omega_c, Occupation::Temperature(t)));
    assert!(rel(n, 100.0) < 1e-12);
    assert_eq!(thermal_occupation(&SI, &cantilever(omega_c, Occupation::Temperature(0.0))), 0.0);
}

#[test]
fn distance_sweep_coupling_falls() {
    let out = sweep(&profile("coupling-vs-distance").unwrap()).unwrap();
    let tr = out.trace("coupling-vs-distance_sweep.csv").unwrap();
    let c = tr.column("coupling").unwrap();
    assert!(c.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn worked_example_inputs() {
    let w = validity_window(20.4, 1.0).unwrap();
    assert!(rel(w.t_min, 1.0 / 40.8) < 1e-15 && w.t_max == 1.0);
    assert_eq!(resonance_frequency(2e6).unwrap(), 4e6);

    let sp = MoleculeSpecies::strontium_oxide();
    let c = cantilever(4e6, Occupation::Quanta(100.0));
    let near = SingleMoleculeSetup::new(sp.clone(), 0.0, 2e-6).unwrap();
    let far = SingleMoleculeSetup::new(sp.clone(), 0.0, 2e-5).unwrap();
    let ratio = shifted_trap_frequency(&SI, &far, &c) / shifted_trap_frequency(&SI, &near, &c);
    assert!(rel(ratio, 10f64.powf(-2.5)) < 1e-12);
    let none = cantilever(4e6, Occupation::Quanta(0.0));
    assert_eq!(single_mode_coupling(&SI, &near, &none).unwrap(), 0.0);

    let cr = CrystalSetup::new(sp, 2e-7, 30, 2e-6, 0.0).unwrap();
    let c2 = cantilever(2e6, Occupation::Quanta(100.0));
    let edge = cr.zone_edge();
    let shift = shifted_phonon_frequency(&SI, &cr, &c2, edge).unwrap();
    assert!(shift.relative_shift < 1e-3, "{}", shift.relative_shift);
    let tm = two_mode_coupling(&SI, &cr, &c2, edge).unwrap();
    assert!(tm.c_k_prime < 0.0 && rel(tm.c_k, 10.0 * tm.c_k_prime) < 1e-15);
}

#[test]
fn undamped_window_is_open_from_zero() {
    let w = entanglement_window(6.2, 0.0).unwrap();
    assert_eq!(w.status, WindowStatus::OpenEnded);
    assert_eq!(w.t_enter, Some(0.0));
}

#[test]
fn critical_damping_closed_form() {
    // At C_k0 = 0 the sum is e^{-Dt/2}(Dt + 2).
    let (c_k, d) = (3.0, 6.0);
    let ev = TwoModeEvaluator::new(c_k, d).unwrap();
    for t in [0.1, 0.5, 2.0] {
        let s = ev.at(Instant::Time(t)).unwrap().sum;
        assert!(rel(s, (-0.5 * d * t).exp() * (d * t + 2.0)) < 1e-9);
    }
}

#[test]
fn chain_centre_is_uniform() {
    let sp = MoleculeSpecies::strontium_oxide();
    let trap = trap_for_central_spacing(&SI, 30, &sp, 2e-7).unwrap();
    let c = equilibrium_positions(&SI, 30, &sp, trap).unwrap();
    assert!(rel(c.central_spacing(), 2e-7) < 1e-9);
    let gaps = c.spacings();
    let third = c.central_third();
    let centre = &gaps[third.start..third.end - 1];
    let (lo, hi) = centre.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &g| (a.min(g), b.max(g)));
    assert!((hi - lo) / hi < 0.02, "variation {}", (hi - lo) / hi);
}

#[test]
fn small_chains_have_trap_modes() {
    let sp = MoleculeSpecies::strontium_oxide();
    let one = hessian_modes(&SI, &equilibrium_positions(&SI, 1, &sp, 7e5).unwrap()).unwrap();
    assert!(rel(one.frequencies[0], 7e5) < 1e-12);
    let two = hessian_modes(&SI, &equilibrium_positions(&SI, 2, &sp, 7e5).unwrap()).unwrap();
    assert!(rel(two.frequencies[0], 7e5) < 1e-9);
    // Breathing mode of the pair: U'' = 12K/s⁵ + mω²/2 = 5mω²/2 on the
    // reduced mass m/2.
    assert!(rel(two.frequencies[1], 5f64.sqrt() * 7e5) < 1e-9);
}

#[test]
fn top_mode_alternates_and_matches_lattice_sum() {
    let sp = MoleculeSpecies::strontium_oxide();
    let trap = trap_for_central_spacing(&SI, 30, &sp, 2e-7).unwrap();
    let c = equilibrium_positions(&SI, 30, &sp, trap).unwrap();
    let spec = hessian_modes(&SI, &c).unwrap();
    let top = spec.frequencies.len() - 1;
    let window = c.central_third().len();
    assert_eq!(spec.sign_changes[top], window - 1);
    let l = spec.central_spacing;
    let edge = lattice_sum_dispersion(&SI, &sp, l, PI / l);
    assert!(rel(spec.frequencies[top], edge) < 0.05, "{} vs {edge}", spec.frequencies[top]);
    // The nearest-neighbour band edge sits a factor sqrt 2 higher than the
    // closed-form scale predicts.
    let cr = CrystalSetup::new(sp, l, 30, 2e-6, trap).unwrap();
    let formula = phonon_dispersion(&SI, &cr, PI / l).unwrap();
    assert!(spec.frequencies[top] / formula > 1.3);
}
