//! First-order perturbative transition amplitude for arbitrary coupling
//! profiles, and the large-`ω₀T` envelopes of the built-in profiles.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::model::{CouplingKind, CouplingProfile, MeasurementGeometry};

/// Lower edge of the asymptotic regime for the smooth profiles.
pub const ASYMPTOTIC_MIN_OMEGA0_T: f64 = 4.0 * PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirstOrderResult {
    pub amplitude: C64,
    /// Oscillation-free upper bound on `|amplitude|`; absent for tabulated
    /// profiles.
    pub envelope_magnitude: Option<f64>,
    pub profile_kind: CouplingKind,
}

/// `A₋⁽¹⁾ = i e^{−iω₀T/2} (ω₀T/2) ξ e^{iη} sin γ ∫₀¹ e^{iω₀T s} g·T ds`.
pub fn first_order_amplitude(profile: &CouplingProfile, geom: &MeasurementGeometry) -> FirstOrderResult {
    let y = geom.half_omega0_t();
    let strength = geom.coupling_strength() * geom.gamma.sin();
    let prefactor = C64::i() * C64::from_polar(strength, geom.eta - y);
    FirstOrderResult {
        amplitude: prefactor * profile.phased_integral(geom.omega0_t),
        envelope_magnitude: decay_envelope(profile, geom),
        profile_kind: profile.kind(),
    }
}

// |sin| → 1 in two exact representations of the phased integral; both are
// upper bounds, the product form is tight asymptotically and the shifted-sum
// form stays finite at the resonances.
fn decay_envelope(profile: &CouplingProfile, geom: &MeasurementGeometry) -> Option<f64> {
    let coeffs = profile.kind().cosine_series()?;
    let x = geom.omega0_t;
    let scale = geom.xi * geom.gamma.sin();
    let product_bound = scale * profile.damping_factor(x)?.abs();

    let m = |z: f64| if z.abs() <= 2.0 { 1.0 } else { 2.0 / z.abs() };
    let shifted: f64 = coeffs
        .iter()
        .enumerate()
        .map(|(j, c)| {
            if j == 0 {
                c.abs() * m(x)
            } else {
                let shift = TAU * j as f64;
                0.5 * c.abs() * (m(x + shift) + m(x - shift))
            }
        })
        .sum();
    let sum_bound = geom.coupling_strength() * geom.gamma.sin() * shifted;
    Some(product_bound.min(sum_bound))
}

/// Large-`ω₀T` decay envelope of `|A₋⁽¹⁾|` for the built-in profiles:
/// `ξ sin γ` for constant coupling, `y ξ sin γ · π²/y³` for the raised
/// cosine and `y ξ sin γ · 4π⁴/y⁵` for the optimized profile (`y = ω₀T/2`).
pub fn envelope_closed_form(kind: CouplingKind, geom: &MeasurementGeometry) -> Result<f64> {
    let scale = geom.xi * geom.gamma.sin();
    let y = geom.half_omega0_t();
    match kind {
        CouplingKind::Constant => Ok(scale),
        CouplingKind::RaisedCosine | CouplingKind::Optimized if geom.omega0_t < ASYMPTOTIC_MIN_OMEGA0_T => domain(
            format!("{kind} envelope needs omega0T >= 4*pi, got {}", geom.omega0_t),
        ),
        CouplingKind::RaisedCosine => Ok(scale * (PI / y).powi(2)),
        CouplingKind::Optimized => Ok(scale * 4.0 * (PI / y).powi(4)),
        CouplingKind::Tabulated => Err(Error::UnsupportedProfile("tabulated")),
    }
}

/// Disturbance reduction `p₋ = P₋⁽¹⁾/P₋^const` from the envelopes:
/// `π⁴/y⁴` (raised cosine) and `16π⁸/y⁸` (optimized).
pub fn reduction_ratio(kind: CouplingKind, omega0_t: f64) -> Result<f64> {
    if !(omega0_t.is_finite() && omega0_t >= 0.0) {
        return domain(format!("omega0T must be finite and non-negative, got {omega0_t}"));
    }
    if kind == CouplingKind::Constant {
        return Ok(1.0);
    }
    let geom = MeasurementGeometry::new(1.0, PI / 2.0, 0.0, omega0_t)?;
    let ratio = envelope_closed_form(kind, &geom)? / envelope_closed_form(CouplingKind::Constant, &geom)?;
    Ok(ratio * ratio)
}
