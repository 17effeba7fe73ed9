//! Reference propagator: integrates the two-level Schrödinger equation
//! under the full time-dependent Hamiltonian with the exponential midpoint
//! rule.
//!
//! Each step applies the exact 2×2 unitary `exp(−i H(t_mid) Δ/ħ)`, so the
//! scheme is second order in `Δ` and unitary to round-off. In units of the
//! segment duration `T` the Hamiltonian is
//! `H·T/ħ = −(ω₀T/2)[σ_z + ξ (g·T)(s) n·σ]`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::dyson::first_order_amplitude;
use crate::error::{domain, Error, Result};
use crate::exact::amplitude_exact;
use crate::model::{sinc, CouplingKind, CouplingProfile, MeasurementGeometry};

pub const DEFAULT_STEPS: usize = 1 << 14;
pub const MAX_STEPS: usize = 1 << 22;
pub const CONVERGENCE_TOL: f64 = 1e-10;
const NORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinState {
    pub c_plus: C64,
    pub c_minus: C64,
}

impl SpinState {
    pub fn new(c_plus: C64, c_minus: C64) -> Result<Self> {
        let s = Self { c_plus, c_minus };
        let n = s.norm_sqr();
        if !n.is_finite() || (n - 1.0).abs() > NORM_TOL {
            return domain(format!("spin state is not normalized: |psi|^2 = {n}"));
        }
        Ok(s)
    }

    pub fn plus() -> Self {
        Self { c_plus: C64::new(1.0, 0.0), c_minus: C64::new(0.0, 0.0) }
    }

    pub fn minus() -> Self {
        Self { c_plus: C64::new(0.0, 0.0), c_minus: C64::new(1.0, 0.0) }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.c_plus.norm_sqr() + self.c_minus.norm_sqr()
    }

    /// Largest componentwise distance to `other`.
    pub fn distance(&self, other: &SpinState) -> f64 {
        (self.c_plus - other.c_plus).norm().max((self.c_minus - other.c_minus).norm())
    }
}

/// One measurement interval: its own geometry (with `ω₀T` measured in the
/// segment's duration) and coupling profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub geom: MeasurementGeometry,
    pub profile: CouplingProfile,
    /// Propagate backwards in time under `−H`.
    #[serde(default)]
    pub reversed: bool,
}

/// Ordered measurement intervals. Segment `k` lasts `ω₀T_k/ω₀`, so the
/// duration fractions are the normalized `ω₀T_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianSchedule {
    segments: Vec<Segment>,
}

impl HamiltonianSchedule {
    pub fn single(geom: MeasurementGeometry, profile: CouplingProfile) -> Self {
        Self { segments: vec![Segment { geom, profile, reversed: false }] }
    }

    pub fn successive(parts: Vec<(MeasurementGeometry, CouplingProfile)>) -> Result<Self> {
        if parts.is_empty() {
            return domain("a schedule needs at least one segment");
        }
        let segments = parts
            .into_iter()
            .map(|(geom, profile)| Segment { geom, profile, reversed: false })
            .collect();
        Ok(Self { segments })
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn fractions(&self) -> Vec<f64> {
        let total: f64 = self.segments.iter().map(|s| s.geom.omega0_t).sum();
        let n = self.segments.len() as f64;
        self.segments
            .iter()
            .map(|s| if total > 0.0 { s.geom.omega0_t / total } else { 1.0 / n })
            .collect()
    }

    /// The schedule that undoes this one: reversed order, each segment run
    /// backwards under the negated Hamiltonian.
    pub fn inverse(&self) -> Self {
        let segments = self
            .segments
            .iter()
            .rev()
            .map(|s| Segment { reversed: !s.reversed, ..s.clone() })
            .collect();
        Self { segments }
    }
}

// exp(i (a·σ)) applied to (c+, c−).
fn rotate(state: &mut SpinState, a: [f64; 3]) {
    let angle = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    let c = angle.cos();
    let s = sinc(angle);
    let (x, y, z) = (a[0] * s, a[1] * s, a[2] * s);
    let u00 = C64::new(c, z);
    let u11 = C64::new(c, -z);
    // i(x − iy) and i(x + iy)
    let u01 = C64::new(y, x);
    let u10 = C64::new(-y, x);
    let (p, m) = (state.c_plus, state.c_minus);
    let (p, m) = (u00 * p + u01 * m, u10 * p + u11 * m);
    // Rounding in the products drifts the norm linearly in the step count;
    // the exact map is unitary, so project back onto the unit sphere.
    let norm = (p.norm_sqr() + m.norm_sqr()).sqrt();
    state.c_plus = p / norm;
    state.c_minus = m / norm;
}

fn propagate_segment(seg: &Segment, state: &mut SpinState, steps: usize) {
    let dt = 1.0 / steps as f64;
    let scale = seg.geom.half_omega0_t() * dt;
    let n = seg.geom.direction();
    let xi = seg.geom.xi;
    let sign = if seg.reversed { -1.0 } else { 1.0 };
    let mut step = |k: usize| {
        let s = (k as f64 + 0.5) * dt;
        let field = xi * seg.profile.eval(s);
        let a = [
            sign * scale * field * n[0],
            sign * scale * field * n[1],
            sign * scale * (1.0 + field * n[2]),
        ];
        rotate(state, a);
    };
    if seg.reversed {
        (0..steps).rev().for_each(&mut step);
    } else {
        (0..steps).for_each(&mut step);
    }
}

/// Propagates `psi0` through every segment with `steps` midpoint steps per
/// segment.
pub fn propagate(schedule: &HamiltonianSchedule, psi0: SpinState, steps: usize) -> Result<SpinState> {
    if steps == 0 {
        return domain("steps must be positive");
    }
    let mut state = SpinState::new(psi0.c_plus, psi0.c_minus)?;
    for seg in &schedule.segments {
        propagate_segment(seg, &mut state, steps);
    }
    Ok(state)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Converged {
    pub state: SpinState,
    pub steps: usize,
    /// Distance between the last two refinements.
    pub change: f64,
}

/// Doubles the step count from [`DEFAULT_STEPS`] until successive results
/// differ by less than `tol`, failing past [`MAX_STEPS`].
pub fn propagate_converged(schedule: &HamiltonianSchedule, psi0: SpinState, tol: f64) -> Result<Converged> {
    let mut steps = DEFAULT_STEPS;
    let mut prev = propagate(schedule, psi0, steps)?;
    loop {
        let next_steps = steps * 2;
        if next_steps > MAX_STEPS {
            return Err(Error::Convergence { steps, change: f64::NAN });
        }
        let next = propagate(schedule, psi0, next_steps)?;
        let change = next.distance(&prev);
        if change < tol {
            return Ok(Converged { state: next, steps: next_steps, change });
        }
        if next_steps == MAX_STEPS {
            return Err(Error::Convergence { steps: next_steps, change });
        }
        prev = next;
        steps = next_steps;
    }
}

/// `A₋` from `|+⟩` at the default convergence tolerance.
pub fn oracle_amplitude(schedule: &HamiltonianSchedule) -> Result<C64> {
    Ok(propagate_converged(schedule, SpinState::plus(), CONVERGENCE_TOL)?.state.c_minus)
}

/// Oracle agreement of the closed-form and first-order amplitudes at one
/// geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossCheck {
    pub oracle_amplitude: C64,
    /// `|A₋_exact − A₋_oracle|`, constant coupling only.
    pub exact_deviation: Option<f64>,
    pub first_order_deviation: f64,
    /// First-order deviation relative to the first-order coupling scale
    /// `(ω₀T/2) ξ sin γ`.
    pub first_order_relative: Option<f64>,
    pub steps: usize,
    /// Observed order from three successive step halvings.
    pub convergence_order: Option<f64>,
}

pub fn crosscheck(geom: &MeasurementGeometry, profile: &CouplingProfile) -> Result<CrossCheck> {
    let schedule = HamiltonianSchedule::single(*geom, profile.clone());
    let converged = propagate_converged(&schedule, SpinState::plus(), CONVERGENCE_TOL)?;
    let oracle = converged.state.c_minus;

    let coarse = propagate(&schedule, SpinState::plus(), converged.steps / 4)?.c_minus;
    let mid = propagate(&schedule, SpinState::plus(), converged.steps / 2)?.c_minus;
    let (d1, d2) = ((coarse - mid).norm(), (mid - oracle).norm());
    // Below ~1e-12 the differences are accumulated round-off.
    let convergence_order = (d1 > 1e-12 && d2 > 1e-12).then(|| (d1 / d2).log2());

    let exact_deviation = (profile.kind() == CouplingKind::Constant)
        .then(|| (amplitude_exact(geom).amplitude_minus - oracle).norm());
    let first_order_deviation = (first_order_amplitude(profile, geom).amplitude - oracle).norm();
    let scale = geom.coupling_strength() * geom.gamma.sin().abs();
    Ok(CrossCheck {
        oracle_amplitude: oracle,
        exact_deviation,
        first_order_deviation,
        first_order_relative: (scale > 0.0).then(|| first_order_deviation / scale),
        steps: converged.steps,
        convergence_order,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::amplitude_plus_exact;
    use std::f64::consts::PI;

    fn geom(xi: f64, gamma: f64, eta: f64, w: f64) -> MeasurementGeometry {
        MeasurementGeometry::new(xi, gamma, eta, w).unwrap()
    }

    #[test]
    fn free_precession() {
        let g = geom(0.0, 1.0, 0.0, 3.7);
        let out = propagate(&HamiltonianSchedule::single(g, CouplingProfile::Constant), SpinState::plus(), 64).unwrap();
        assert!((out.c_plus - C64::from_polar(1.0, 1.85)).norm() < 1e-13);
        assert_eq!(out.c_minus, C64::new(0.0, 0.0));
    }

    #[test]
    fn static_field_single_step_is_exact() {
        let g = geom(0.37, 1.2, 2.1, 17.0);
        let out = propagate(&HamiltonianSchedule::single(g, CouplingProfile::Constant), SpinState::plus(), 1).unwrap();
        assert!((out.c_minus - amplitude_exact(&g).amplitude_minus).norm() < 1e-12);
        assert!((out.c_plus - amplitude_plus_exact(&g)).norm() < 1e-12);
    }

    #[test]
    fn long_constant_run_matches_closed_form() {
        let g = geom(0.1, PI / 2.0, 0.0, 100.0);
        let out = propagate(&HamiltonianSchedule::single(g, CouplingProfile::Constant), SpinState::plus(), 1 << 16).unwrap();
        assert!((out.c_minus.norm() - amplitude_exact(&g).amplitude_minus.norm()).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_input() {
        let s = HamiltonianSchedule::single(geom(0.1, 1.0, 0.0, 1.0), CouplingProfile::Constant);
        assert!(propagate(&s, SpinState::plus(), 0).is_err());
        let bad = SpinState { c_plus: C64::new(1.0, 0.0), c_minus: C64::new(0.1, 0.0) };
        assert!(matches!(propagate(&s, bad, 8), Err(Error::Domain(_))));
        assert!(SpinState::new(C64::new(0.6, 0.0), C64::new(0.0, 0.8)).is_ok());
        assert!(HamiltonianSchedule::successive(vec![]).is_err());
    }

    #[test]
    fn unitarity_holds_for_many_steps() {
        let g = geom(0.8, 2.0, 1.0, 300.0);
        for profile in [CouplingProfile::Optimized, CouplingProfile::RaisedCosine] {
            let s = HamiltonianSchedule::single(g, profile);
            let out = propagate(&s, SpinState::plus(), 1 << 18).unwrap();
            assert!((out.norm_sqr() - 1.0).abs() < 1e-12, "{}", out.norm_sqr() - 1.0);
        }
    }

    #[test]
    fn midpoint_rule_is_second_order() {
        let g = geom(0.3, 1.0, 0.4, 40.0);
        let s = HamiltonianSchedule::single(g, CouplingProfile::RaisedCosine);
        let a = |n| propagate(&s, SpinState::plus(), n).unwrap().c_minus;
        let (a1, a2, a3) = (a(256), a(512), a(1024));
        let order = ((a1 - a2).norm() / (a2 - a3).norm()).log2();
        assert!((order - 2.0).abs() < 0.05, "{order}");
    }

    #[test]
    fn inverse_schedule_returns_initial_state() {
        let psi0 = SpinState::new(C64::new(0.6, 0.0), C64::new(0.0, 0.8)).unwrap();
        let s = HamiltonianSchedule::successive(vec![
            (geom(0.3, 0.5, 0.1, 50.0), CouplingProfile::Optimized),
            (geom(0.2, 1.5, 2.0, 30.0), CouplingProfile::RaisedCosine),
        ])
        .unwrap();
        let fwd = propagate(&s, psi0, 4096).unwrap();
        let back = propagate(&s.inverse(), fwd, 4096).unwrap();
        assert!(back.distance(&psi0) < 1e-10);
        let f = s.fractions();
        assert!((f.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((f[0] - 0.625).abs() < 1e-15);
    }

    #[test]
    fn converged_propagation_of_constant_coupling_is_immediate() {
        let s = HamiltonianSchedule::single(geom(0.5, 1.0, 0.0, 200.0), CouplingProfile::Constant);
        let c = propagate_converged(&s, SpinState::plus(), CONVERGENCE_TOL).unwrap();
        assert_eq!(c.steps, 2 * DEFAULT_STEPS);
    }

    #[test]
    fn impossible_tolerance_reports_convergence_failure() {
        let s = HamiltonianSchedule::single(geom(0.5, 1.0, 0.0, 5.0), CouplingProfile::Constant);
        assert!(matches!(propagate_converged(&s, SpinState::plus(), 0.0), Err(Error::Convergence { .. })));
    }

    #[test]
    fn crosscheck_examples() {
        let c = crosscheck(&geom(0.4, 0.8, 1.0, 123.0), &CouplingProfile::Constant).unwrap();
        assert!(c.exact_deviation.unwrap() < 1e-10);

        let c = crosscheck(&geom(0.0, 0.8, 1.0, 123.0), &CouplingProfile::Optimized).unwrap();
        assert_eq!(c.first_order_deviation, 0.0);
        assert_eq!(c.oracle_amplitude.norm(), 0.0);

        let c = crosscheck(&geom(1e-3, PI / 4.0, 0.0, 20.0 * PI), &CouplingProfile::RaisedCosine).unwrap();
        assert!(c.first_order_relative.unwrap() < 1e-5, "{:?}", c);
        assert!(c.exact_deviation.is_none());
    }
}
