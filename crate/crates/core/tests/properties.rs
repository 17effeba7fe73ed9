use std::f64::consts::{PI, TAU};

use proptest::prelude::*;
use protmeas::design::{LabParameters, HBAR};
use protmeas::dyson::first_order_amplitude;
use protmeas::oracle::{crosscheck, propagate, HamiltonianSchedule, SpinState};
use protmeas::reconstruct::{corrupted_reconstruction, fidelity, measurement_frame, reconstruct_state, ExpectationTriple};
use protmeas::{CouplingKind, CouplingProfile, MeasurementGeometry, ProfileTable, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Composite Simpson with `panels` (even) panels.
fn simpson(f: impl Fn(f64) -> C64, panels: usize) -> C64 {
    let h = 1.0 / panels as f64;
    let mut sum = f(0.0) + f(1.0);
    for k in 1..panels {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        sum += f(k as f64 * h) * w;
    }
    sum * (h / 3.0)
}

fn built_ins() -> Vec<CouplingProfile> {
    CouplingKind::BUILT_IN.iter().map(|k| CouplingProfile::built_in(*k).unwrap()).collect()
}

#[test]
fn phased_integral_matches_brute_force() {
    for profile in built_ins() {
        for x in [0.1, 1.0, TAU - 1e-6, TAU, TAU + 1e-6, 10.0, 100.0] {
            let brute = simpson(|s| C64::from_polar(profile.eval(s), x * s), 1_000_000);
            let analytic = profile.phased_integral(x);
            assert!((brute - analytic).norm() < 1e-9, "{:?} at {x}: {brute} vs {analytic}", profile.kind());
        }
    }
}

#[test]
fn raised_cosine_resonance() {
    let v = CouplingProfile::RaisedCosine.phased_integral(TAU);
    assert!((v.norm() - 0.5).abs() < 1e-14, "{v}");
}

#[test]
fn tabulated_raised_cosine_tracks_the_analytic_profile() {
    let n = 4000;
    let samples = (0..=n)
        .map(|k| {
            let s = k as f64 / n as f64;
            (s, 1.0 - (TAU * s).cos())
        })
        .collect();
    let table = CouplingProfile::Tabulated(ProfileTable::new(samples).unwrap());
    for x in [0.5, 7.0, 60.0, 400.0] {
        let d = (table.phased_integral(x) - CouplingProfile::RaisedCosine.phased_integral(x)).norm();
        assert!(d < 1e-6, "{x}: {d}");
    }
}

#[test]
fn first_order_deviation_vanishes_with_xi() {
    for profile in built_ins() {
        let rel = |xi| {
            let g = MeasurementGeometry::new(xi, 1.0, 0.4, 60.0).unwrap();
            crosscheck(&g, &profile).unwrap().first_order_relative.unwrap()
        };
        let (a, b) = (rel(1e-2), rel(1e-3));
        assert!(b < a && b < 1e-3, "{:?}: {a} {b}", profile.kind());
    }
}

#[test]
fn crosscheck_at_zero_xi_is_exact() {
    for profile in built_ins() {
        let c = crosscheck(&MeasurementGeometry::new(0.0, 1.0, 0.0, 77.0).unwrap(), &profile).unwrap();
        assert_eq!(c.first_order_deviation, 0.0);
        assert_eq!(c.first_order_relative, None);
    }
}

#[test]
fn richardson_order_is_two() {
    let g = MeasurementGeometry::new(0.4, 0.9, 1.3, 120.0).unwrap();
    for profile in [CouplingProfile::RaisedCosine, CouplingProfile::Optimized] {
        let s = HamiltonianSchedule::single(g, profile);
        let a = |n| propagate(&s, SpinState::plus(), n).unwrap().c_minus;
        let (a1, a2, a3) = (a(1024), a(2048), a(4096));
        let order = ((a1 - a2).norm() / (a2 - a3).norm()).log2();
        assert!((order - 2.0).abs() < 0.05, "{order}");
    }
}

#[test]
fn reconstruction_round_trip_over_random_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let (theta, phi) = (rng.gen_range(0.0..PI), rng.gen_range(0.0..TAU));
        let psi = SpinState::new(C64::new((theta / 2.0).cos(), 0.0), C64::from_polar((theta / 2.0).sin(), phi)).unwrap();
        let frame = measurement_frame(rng.gen_range(0.0..PI), rng.gen_range(0.0..TAU));
        let data = ExpectationTriple::of_state(&psi, frame).unwrap();
        let r = reconstruct_state(&data).unwrap();
        assert!((fidelity(&r.rho, &psi) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn flipping_a_zero_expectation_changes_nothing() {
    let data = ExpectationTriple::axes([0.6, 0.0, 0.8]).unwrap();
    let mut flipped = data;
    flipped.values[1] = -flipped.values[1];
    assert_eq!(reconstruct_state(&data).unwrap(), reconstruct_state(&flipped).unwrap());
}

proptest! {
    #[test]
    fn corrupted_fidelity_ignores_azimuth(gamma in 0.0..=PI, eta in 0.0..TAU) {
        let a = corrupted_reconstruction(gamma, eta).unwrap().fidelity;
        let b = corrupted_reconstruction(gamma, 0.0).unwrap().fidelity;
        prop_assert!((a - b).abs() < 1e-12);
        prop_assert!((a - gamma.sin()).abs() < 1e-12);
    }

    #[test]
    fn time_reversal_restores_the_state(
        xi in 0.0..2.0f64, gamma in 0.0..PI, eta in 0.0..TAU, w in 0.0..500.0f64,
        theta in 0.0..PI, phi in 0.0..TAU, kind in 0usize..3,
    ) {
        let profile = CouplingProfile::built_in(CouplingKind::BUILT_IN[kind]).unwrap();
        let g = MeasurementGeometry::new(xi, gamma, eta, w).unwrap();
        let s = HamiltonianSchedule::successive(vec![(g, profile.clone()), (g.with_omega0_t(w / 2.0).unwrap(), profile)]).unwrap();
        let psi = SpinState::new(C64::new((theta / 2.0).cos(), 0.0), C64::from_polar((theta / 2.0).sin(), phi)).unwrap();
        let fwd = propagate(&s, psi, 512).unwrap();
        let back = propagate(&s.inverse(), fwd, 512).unwrap();
        prop_assert!(back.distance(&psi) < 1e-10);
    }

    #[test]
    fn first_order_is_linear_in_xi(xi in 0.0..1.0f64, gamma in 0.0..PI, w in 0.0..1e3f64, kind in 0usize..3) {
        let profile = CouplingProfile::built_in(CouplingKind::BUILT_IN[kind]).unwrap();
        let g = MeasurementGeometry::new(xi, gamma, 0.2, w).unwrap();
        let a = first_order_amplitude(&profile, &g).amplitude;
        let b = first_order_amplitude(&profile, &g.with_xi(2.0 * xi).unwrap()).amplitude;
        prop_assert!((b - a * 2.0).norm() <= 1e-12 * (1.0 + b.norm()));
    }

    #[test]
    fn design_coupling_identity(b0 in 0.1..20.0f64, grad in 0.01..100.0f64, d in 0.01..2.0f64, t in 100.0..1500.0f64) {
        // (ω₀T/2)·ξ = μ |∇B₁| d T / ħ
        let lab = LabParameters::potassium(b0, grad, d, t, 0.3).unwrap();
        let g = lab.geometry().unwrap();
        let lhs = g.coupling_strength();
        let rhs = lab.mu * grad * d * lab.transit_time() / HBAR;
        prop_assert!((lhs / rhs - 1.0).abs() < 1e-12);
    }
}
