//! SI-unit bridge for a Stern–Gerlach style beam experiment: oven-beam
//! kinematics, the dimensionless `(ξ, ω₀T)` they imply, and the pointer
//! displacement.
//!
//! The measurement-field coordinate `q` is identified with the region
//! length `d`, so `ξ = |∇B₁| d / B₀`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::exact::{amplitude_envelope, probability_taylor, xi_bound};
use crate::model::MeasurementGeometry;

/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380649e-23;
/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054572e-34;
/// Atomic mass unit, kg.
pub const AMU: f64 = 1.66053907e-27;

pub const POTASSIUM_MU: f64 = 9.3e-24;
pub const POTASSIUM_MASS: f64 = 39.0 * AMU;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabParameters {
    /// Magnetic moment, J/T.
    pub mu: f64,
    /// Particle mass, kg.
    pub mass: f64,
    /// Protection field, T.
    pub b0: f64,
    /// Measurement-field gradient, T/m.
    pub grad_b1: f64,
    /// Length of the measurement region, m.
    pub d: f64,
    /// Oven temperature, K.
    pub t_oven: f64,
    /// Angle between the gradient direction and the protection field, rad.
    pub gamma: f64,
}

impl LabParameters {
    pub fn new(mu: f64, mass: f64, b0: f64, grad_b1: f64, d: f64, t_oven: f64, gamma: f64) -> Result<Self> {
        for (name, v) in [("mu", mu), ("mass", mass), ("b0", b0), ("grad_b1", grad_b1), ("d", d), ("t_oven", t_oven)] {
            if !(v.is_finite() && v > 0.0) {
                return domain(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if !(0.0..=std::f64::consts::PI).contains(&gamma) {
            return domain(format!("gamma must lie in [0, pi], got {gamma}"));
        }
        Ok(Self { mu, mass, b0, grad_b1, d, t_oven, gamma })
    }

    /// Potassium-39 beam with the given fields and geometry.
    pub fn potassium(b0: f64, grad_b1: f64, d: f64, t_oven: f64, gamma: f64) -> Result<Self> {
        Self::new(POTASSIUM_MU, POTASSIUM_MASS, b0, grad_b1, d, t_oven, gamma)
    }

    /// Most probable speed `√(2 k_B T_oven / m)`.
    pub fn velocity(&self) -> f64 {
        (2.0 * K_B * self.t_oven / self.mass).sqrt()
    }

    pub fn transit_time(&self) -> f64 {
        self.d / self.velocity()
    }

    /// `ω₀ = 2μB₀/ħ`.
    pub fn omega0(&self) -> f64 {
        2.0 * self.mu * self.b0 / HBAR
    }

    pub fn xi(&self) -> f64 {
        self.grad_b1 * self.d / self.b0
    }

    /// `Δs = μ |∇B₁| cos γ d² / (4 k_B T_oven)`.
    pub fn displacement(&self) -> f64 {
        self.mu * self.grad_b1 * self.gamma.cos() * self.d * self.d / (4.0 * K_B * self.t_oven)
    }

    pub fn geometry(&self) -> Result<MeasurementGeometry> {
        MeasurementGeometry::new(self.xi(), self.gamma, 0.0, self.omega0() * self.transit_time())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignReport {
    #[serde(rename = "velocity_m_per_s")]
    pub velocity: f64,
    #[serde(rename = "transit_time_s")]
    pub transit_time: f64,
    #[serde(rename = "omega0_per_s")]
    pub omega0: f64,
    pub omega0_t: f64,
    pub xi: f64,
    /// Envelope disturbance probability at `(ξ, γ)`.
    pub p_minus: f64,
    /// Second-order estimate `ξ² sin² γ`.
    pub p_minus_taylor: f64,
    #[serde(rename = "displacement_m")]
    pub displacement: f64,
}

pub fn derive_report(lab: &LabParameters) -> Result<DesignReport> {
    let geom = lab.geometry()?;
    Ok(DesignReport {
        velocity: lab.velocity(),
        transit_time: lab.transit_time(),
        omega0: lab.omega0(),
        omega0_t: geom.omega0_t,
        xi: geom.xi,
        p_minus: amplitude_envelope(&geom).probability_minus,
        p_minus_taylor: probability_taylor(&geom),
        displacement: lab.displacement(),
    })
}

/// Gradient producing displacement `target_ds` with the other lab settings
/// unchanged.
pub fn required_gradient(target_ds: f64, lab: &LabParameters) -> Result<f64> {
    if !(target_ds.is_finite() && target_ds > 0.0) {
        return domain(format!("target displacement must be positive, got {target_ds}"));
    }
    let c = lab.gamma.cos();
    if c.abs() < 1e-12 {
        return Err(Error::InfiniteGradient);
    }
    if c < 0.0 {
        return Err(Error::NoSolution(format!(
            "cos gamma = {c} < 0 displaces against the gradient"
        )));
    }
    Ok(4.0 * K_B * lab.t_oven * target_ds / (lab.mu * c * lab.d * lab.d))
}

/// Largest gradient keeping the worst-case disturbance at or below `p_max`.
/// `p_max = 1` imposes no bound and returns `+∞`.
pub fn xi_budget(p_max: f64, lab: &LabParameters) -> Result<f64> {
    if p_max == 1.0 {
        return Ok(f64::INFINITY);
    }
    Ok(xi_bound(p_max)? * lab.b0 / lab.d)
}

/// JSON configuration with unit-bearing field names. `species` fills in the
/// magnetic moment and mass when they are not given explicitly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabConfig {
    #[serde(default)]
    pub species: Option<String>,
    #[serde(default)]
    pub mu_joule_per_tesla: Option<f64>,
    #[serde(default)]
    pub mass_kg: Option<f64>,
    pub b0_tesla: f64,
    pub grad_b1_tesla_per_meter: f64,
    pub d_meter: f64,
    pub t_oven_kelvin: f64,
    pub gamma_degrees: f64,
    #[serde(default)]
    pub target_displacement_meter: Option<f64>,
    #[serde(default)]
    pub p_max: Option<f64>,
}

impl LabConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Domain(format!("invalid lab config: {e}")))
    }

    pub fn lab(&self) -> Result<LabParameters> {
        let preset = match self.species.as_deref() {
            None => None,
            Some(s) if matches!(s.to_ascii_lowercase().as_str(), "potassium" | "potassium-39" | "k39" | "k") => {
                Some((POTASSIUM_MU, POTASSIUM_MASS))
            }
            Some(other) => return domain(format!("unknown species '{other}'")),
        };
        let mu = self
            .mu_joule_per_tesla
            .or(preset.map(|p| p.0))
            .ok_or_else(|| Error::Domain("missing field `mu_joule_per_tesla` (or `species`)".into()))?;
        let mass = self
            .mass_kg
            .or(preset.map(|p| p.1))
            .ok_or_else(|| Error::Domain("missing field `mass_kg` (or `species`)".into()))?;
        LabParameters::new(
            mu,
            mass,
            self.b0_tesla,
            self.grad_b1_tesla_per_meter,
            self.d_meter,
            self.t_oven_kelvin,
            self.gamma_degrees.to_radians(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn k(b0: f64, grad: f64, d: f64, gamma: f64) -> LabParameters {
        LabParameters::potassium(b0, grad, d, 500.0, gamma).unwrap()
    }

    #[test]
    fn potassium_beam_numbers() {
        let lab = k(1.0, 20.0, 0.1, PI / 4.0);
        let v = lab.velocity();
        assert!((v / 450.0 - 1.0).abs() < 0.03, "{v}");
        let inv = 1.0 / lab.omega0();
        assert!((5e-12..7e-12).contains(&inv), "{inv}");
        let t = lab.transit_time();
        assert!((t - 2.2e-4).abs() < 0.1e-4, "{t}");
        let r = derive_report(&lab).unwrap();
        assert!((3.5e7..4.2e7).contains(&r.omega0_t), "{}", r.omega0_t);
    }

    #[test]
    fn potassium_field_ratio() {
        let r = derive_report(&k(10.0, 20.0, 0.1, PI / 4.0)).unwrap();
        assert!((r.xi - 0.2).abs() < 1e-15);
        assert!((r.p_minus_taylor - 0.02).abs() < 1e-15);
        let g = MeasurementGeometry::new(0.2, PI / 4.0, 0.0, r.omega0_t).unwrap();
        assert_eq!(r.p_minus, amplitude_envelope(&g).probability_minus);
    }

    #[test]
    fn perpendicular_field_gives_no_disturbance_along_axis() {
        let r = derive_report(&k(10.0, 20.0, 0.1, 0.0)).unwrap();
        assert_eq!(r.p_minus, 0.0);
    }

    #[test]
    fn gradient_round_trip_and_scaling() {
        let lab = k(10.0, 20.0, 0.1, PI / 4.0);
        let g = required_gradient(lab.displacement(), &lab).unwrap();
        assert!((g / 20.0 - 1.0).abs() < 1e-9);
        let far = k(10.0, 20.0, 0.2, PI / 4.0);
        let g2 = required_gradient(5e-4, &far).unwrap();
        assert!((required_gradient(5e-4, &lab).unwrap() / g2 - 4.0).abs() < 1e-12);
    }

    #[test]
    fn required_gradient_formula() {
        let lab = k(1.0, 1.0, 1.0, PI / 4.0);
        let g = required_gradient(5e-4, &lab).unwrap();
        let expected = 4.0 * K_B * 500.0 * 5e-4 / (9.3e-24 * (PI / 4.0).cos());
        assert!((g / expected - 1.0).abs() < 1e-12);
        assert!((g - 2.1).abs() < 0.05, "{g}");
    }

    #[test]
    fn required_gradient_errors() {
        assert_eq!(required_gradient(1e-3, &k(1.0, 1.0, 1.0, PI / 2.0)), Err(Error::InfiniteGradient));
        assert!(matches!(required_gradient(1e-3, &k(1.0, 1.0, 1.0, 2.0)), Err(Error::NoSolution(_))));
        assert!(required_gradient(0.0, &k(1.0, 1.0, 1.0, 0.2)).is_err());
    }

    #[test]
    fn budget_examples() {
        let b = xi_budget(0.01, &k(10.0, 1.0, 0.1, 0.3)).unwrap();
        assert!((b - 10.05).abs() < 0.001, "{b}");
        assert_eq!(xi_budget(1.0, &k(10.0, 1.0, 0.1, 0.3)).unwrap(), f64::INFINITY);
        assert!((xi_budget(0.5, &k(1.0, 1.0, 1.0, 0.3)).unwrap() - 1.0).abs() < 1e-15);
        assert!(xi_budget(0.0, &k(1.0, 1.0, 1.0, 0.3)).is_err());
    }

    #[test]
    fn lab_validation() {
        assert!(LabParameters::potassium(0.0, 1.0, 1.0, 500.0, 0.1).is_err());
        assert!(LabParameters::potassium(1.0, 1.0, 1.0, 500.0, 4.0).is_err());
    }

    #[test]
    fn config_parsing() {
        let cfg = LabConfig::from_json(
            r#"{"species": "potassium-39", "b0_tesla": 10, "grad_b1_tesla_per_meter": 20,
                "d_meter": 0.1, "t_oven_kelvin": 500, "gamma_degrees": 45}"#,
        )
        .unwrap();
        let lab = cfg.lab().unwrap();
        assert_eq!(lab.mu, POTASSIUM_MU);
        assert!((lab.xi() - 0.2).abs() < 1e-15);

        let err = LabConfig::from_json(r#"{"b0_tesla": 10}"#).unwrap_err().to_string();
        assert!(err.contains("grad_b1_tesla_per_meter"), "{err}");
        let cfg = LabConfig::from_json(
            r#"{"b0_tesla": 10, "grad_b1_tesla_per_meter": 20, "d_meter": 0.1, "t_oven_kelvin": 500, "gamma_degrees": 45}"#,
        )
        .unwrap();
        assert!(cfg.lab().unwrap_err().to_string().contains("mu_joule_per_tesla"));
    }
}
