//! Three measurement fields applied at once (combined field, duration `T`)
//! versus one after another (total duration `3T`), both with constant
//! coupling.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::model::{direction_angles, max_cross_overlap, sinc, CouplingProfile, FieldSpec, MeasurementGeometry};
use crate::oracle::HamiltonianSchedule;

pub const ORTHOGONALITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiFieldConfig {
    pub fields: [FieldSpec; 3],
    pub omega0_t: f64,
    /// False when built with [`MultiFieldConfig::relaxed`] from directions
    /// that are not mutually orthogonal.
    pub orthogonal: bool,
}

impl MultiFieldConfig {
    pub fn new(fields: [FieldSpec; 3], omega0_t: f64) -> Result<Self> {
        let config = Self::relaxed(fields, omega0_t)?;
        if !config.orthogonal {
            let overlap = max_cross_overlap(&config.directions());
            return domain(format!("field directions are not orthogonal (max |n_j·n_k| = {overlap:e})"));
        }
        Ok(config)
    }

    /// Accepts any directions, recording whether they are orthogonal.
    pub fn relaxed(fields: [FieldSpec; 3], omega0_t: f64) -> Result<Self> {
        if !(omega0_t.is_finite() && omega0_t >= 0.0) {
            return domain(format!("omega0T must be finite and non-negative, got {omega0_t}"));
        }
        let dirs = [fields[0].direction(), fields[1].direction(), fields[2].direction()];
        let orthogonal = max_cross_overlap(&dirs) < ORTHOGONALITY_TOL;
        Ok(Self { fields, omega0_t, orthogonal })
    }

    pub fn directions(&self) -> [[f64; 3]; 3] {
        [self.fields[0].direction(), self.fields[1].direction(), self.fields[2].direction()]
    }

    fn half(&self) -> f64 {
        0.5 * self.omega0_t
    }

    // (ω₀T/2) ξ_k sin γ_k e^{iη_k}
    fn term(&self, field: &FieldSpec) -> C64 {
        C64::from_polar(self.half() * field.xi * field.gamma.sin(), field.eta)
    }

    /// `(ω₀T/2) ξ_k sin γ_k |sinc(ω₀T/2)|` for each field; shared by both
    /// procedures.
    pub fn term_magnitudes(&self) -> [f64; 3] {
        let s = sinc(self.half()).abs();
        self.fields.map(|f| self.term(&f).norm() * s)
    }

    /// Single measurement field `Σ_k ξ_k n_k` over duration `T`.
    pub fn combined_geometry(&self) -> Result<MeasurementGeometry> {
        let mut v = [0.0; 3];
        for f in &self.fields {
            let n = f.direction();
            for i in 0..3 {
                v[i] += f.xi * n[i];
            }
        }
        let xi = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if xi == 0.0 {
            return MeasurementGeometry::new(0.0, 0.0, 0.0, self.omega0_t);
        }
        let (gamma, eta) = direction_angles([v[0] / xi, v[1] / xi, v[2] / xi])?;
        MeasurementGeometry::new(xi, gamma, eta, self.omega0_t)
    }

    pub fn combined_schedule(&self) -> Result<HamiltonianSchedule> {
        Ok(HamiltonianSchedule::single(self.combined_geometry()?, CouplingProfile::Constant))
    }

    /// Field `k` alone on `[(k−1)T, kT]`.
    pub fn successive_schedule(&self) -> Result<HamiltonianSchedule> {
        let parts = self
            .fields
            .iter()
            .map(|f| Ok((f.geometry(self.omega0_t)?, CouplingProfile::Constant)))
            .collect::<Result<Vec<_>>>()?;
        HamiltonianSchedule::successive(parts)
    }
}

/// `i (Σ_k (ω₀T/2) ξ_k sin γ_k e^{iη_k}) sinc(ω₀T/2)`.
pub fn simultaneous_amplitude(config: &MultiFieldConfig) -> C64 {
    let sum: C64 = config.fields.iter().map(|f| config.term(f)).sum();
    C64::i() * sum * sinc(config.half())
}

/// `i (Σ_k (ω₀T/2) ξ_k sin γ_k e^{iη_k} e^{i(k−2)ω₀T}) sinc(ω₀T/2)`.
pub fn successive_amplitude(config: &MultiFieldConfig) -> C64 {
    let sum: C64 = config
        .fields
        .iter()
        .enumerate()
        .map(|(k, f)| config.term(f) * C64::from_polar(1.0, (k as f64 - 1.0) * config.omega0_t))
        .sum();
    C64::i() * sum * sinc(config.half())
}
