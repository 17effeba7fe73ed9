//! Closed-form solution for constant coupling.
//!
//! With constant coupling the Hamiltonian is static: the spin precesses
//! about the tilted total field `B₀e_z + (ξB₀)n`. Everything below follows
//! from the magnitude `b = |B|/B₀` and the tilt angle `θ` of that field.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::model::{sinc, MeasurementGeometry};

/// Fields whose relative magnitude falls below this are treated as cancelled.
pub const DEGENERATE_FIELD_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TiltedField {
    /// `|B|/B₀ = √(1 + ξ² + 2ξ cos γ)`.
    pub b_ratio: f64,
    pub cos_theta: f64,
    pub sin_theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ExactSinc,
    Envelope,
    FirstOrder,
    Oracle,
}

/// Transition amplitude `A₋` for `|+⟩ → |−⟩` and its probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionResult {
    pub amplitude_minus: C64,
    pub probability_minus: f64,
    pub method: Method,
}

impl TransitionResult {
    pub fn new(amplitude_minus: C64, method: Method) -> Self {
        Self { amplitude_minus, probability_minus: amplitude_minus.norm_sqr(), method }
    }
}

// (1 + ξ cos γ, ξ sin γ): longitudinal and transverse field in units of B₀.
fn field_components(geom: &MeasurementGeometry) -> (f64, f64) {
    let (sg, cg) = geom.gamma.sin_cos();
    (1.0 + geom.xi * cg, geom.xi * sg)
}

/// `|B|/B₀`, written as a hypotenuse so it never goes negative under the root.
pub fn b_ratio(geom: &MeasurementGeometry) -> f64 {
    let (long, trans) = field_components(geom);
    long.hypot(trans)
}

pub fn tilted_field(geom: &MeasurementGeometry) -> Result<TiltedField> {
    let (long, trans) = field_components(geom);
    let b = long.hypot(trans);
    if b <= DEGENERATE_FIELD_TOL {
        return Err(Error::DegenerateField);
    }
    Ok(TiltedField { b_ratio: b, cos_theta: long / b, sin_theta: trans / b })
}

/// `A₋ = i e^{iη} (ω₀T/2) ξ sin γ · sinc((ω₀T/2)·b)`.
pub fn amplitude_exact(geom: &MeasurementGeometry) -> TransitionResult {
    let y = geom.half_omega0_t();
    let (_, trans) = field_components(geom);
    let magnitude = y * trans * sinc(y * b_ratio(geom));
    TransitionResult::new(C64::from_polar(magnitude, geom.eta) * C64::i(), Method::ExactSinc)
}

/// Survival amplitude `A₊ = cos(yb) + i cos θ sin(yb)` with `y = ω₀T/2`,
/// expressed without dividing by `b`.
pub fn amplitude_plus_exact(geom: &MeasurementGeometry) -> C64 {
    let y = geom.half_omega0_t();
    let (long, _) = field_components(geom);
    let phase = y * b_ratio(geom);
    C64::new(phase.cos(), long * y * sinc(phase))
}

/// Oscillation-free form: `sinc(x)` replaced by its `1/x` envelope.
pub fn amplitude_envelope(geom: &MeasurementGeometry) -> TransitionResult {
    let (_, trans) = field_components(geom);
    let b = b_ratio(geom);
    // ξ sin γ ≤ b always; the clamp only matters for cancelled fields.
    let ratio = if b > 0.0 { (trans / b).min(1.0) } else { 0.0 };
    TransitionResult::new(C64::from_polar(ratio, geom.eta) * C64::i(), Method::Envelope)
}

/// Second-order (in `ξ`) disturbance estimate `ξ² sin² γ`.
pub fn probability_taylor(geom: &MeasurementGeometry) -> f64 {
    let (_, trans) = field_components(geom);
    trans * trans
}

/// Largest `ξ` keeping the worst-case (γ = π/2) envelope probability at or
/// below `p_max`.
pub fn xi_bound(p_max: f64) -> Result<f64> {
    if !(p_max > 0.0 && p_max < 1.0) {
        return domain(format!("probability bound must lie in (0, 1), got {p_max}"));
    }
    Ok((p_max / (1.0 - p_max)).sqrt())
}

/// Split of the survival amplitude into the two momentum branches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurvivalSplit {
    /// Branch carrying the correct pointer shift `+Δp`.
    pub amp_correct: C64,
    /// Branch carrying the reversed shift `−Δp`.
    pub amp_reversed: C64,
}

impl SurvivalSplit {
    pub fn amplitude_plus(&self) -> C64 {
        self.amp_correct + self.amp_reversed
    }
}

// w± = (1 ± cos θ)/2, with the small one computed as sin²θ/(2(1 ± ∓cos θ))
// to avoid cancellation.
fn branch_weights(field: &TiltedField) -> (f64, f64) {
    let (c, s2) = (field.cos_theta, field.sin_theta * field.sin_theta);
    if c >= 0.0 {
        let wp = 0.5 * (1.0 + c);
        (wp, 0.25 * s2 / wp)
    } else {
        let wm = 0.5 * (1.0 - c);
        (0.25 * s2 / wm, wm)
    }
}

pub fn survival_split(geom: &MeasurementGeometry) -> Result<SurvivalSplit> {
    let field = tilted_field(geom)?;
    let (wp, wm) = branch_weights(&field);
    let phase = geom.half_omega0_t() * field.b_ratio;
    Ok(SurvivalSplit {
        amp_correct: C64::from_polar(wp, phase),
        amp_reversed: C64::from_polar(wm, -phase),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReversalProbability {
    /// Probability of the reversed shift given the outcome `|+⟩`, with the
    /// two momentum branches treated as distinguishable.
    pub exact: f64,
    /// `(ξ sin γ / 2)⁴`.
    pub leading_order: f64,
}

pub fn reversal_probability(geom: &MeasurementGeometry) -> Result<ReversalProbability> {
    let field = tilted_field(geom)?;
    let (wp, wm) = branch_weights(&field);
    let exact = wm * wm / (wp * wp + wm * wm);
    let (_, trans) = field_components(geom);
    Ok(ReversalProbability { exact, leading_order: (0.5 * trans).powi(4) })
}
