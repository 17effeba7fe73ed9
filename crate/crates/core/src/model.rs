//! Dimensionless model parameters, measurement-field geometry and coupling
//! profiles.
//!
//! Everything here is expressed in units of the measurement time `T`: the
//! coupling is represented by `g·T` as a function of `s = t/T`, so a
//! normalized profile integrates to one over `s ∈ [0, 1]`.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quad;

/// Tolerance on `|n| = 1` for direction vectors.
pub const UNIT_TOL: f64 = 1e-12;

/// Largest tolerated normalization residual of a tabulated profile.
pub const TABLE_NORM_TOL: f64 = 1e-6;

/// Below this distance from a resonance the factored closed form of the
/// phased integral is replaced by the term-by-term sum.
const RESONANCE_GUARD: f64 = 1e-6;

/// `sin(x)/x` with the removable point at zero.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 * (1.0 - x2 / 20.0)
    } else {
        x.sin() / x
    }
}

/// The full parameter set of the constant-direction measurement model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementGeometry {
    /// Measurement-to-protection field ratio.
    pub xi: f64,
    /// Polar angle of the measurement direction relative to the protection field.
    pub gamma: f64,
    /// Azimuth of the measurement direction, in `[0, 2π)`.
    pub eta: f64,
    /// Transition frequency times measurement time.
    pub omega0_t: f64,
}

impl MeasurementGeometry {
    pub fn new(xi: f64, gamma: f64, eta: f64, omega0_t: f64) -> Result<Self> {
        if !(xi.is_finite() && xi >= 0.0) {
            return domain(format!("xi must be finite and non-negative, got {xi}"));
        }
        if !(0.0..=PI).contains(&gamma) {
            return domain(format!("gamma must lie in [0, pi], got {gamma}"));
        }
        if !eta.is_finite() {
            return domain(format!("eta must be finite, got {eta}"));
        }
        if !(omega0_t.is_finite() && omega0_t >= 0.0) {
            return domain(format!("omega0T must be finite and non-negative, got {omega0_t}"));
        }
        Ok(Self { xi, gamma, eta: normalize_azimuth(eta), omega0_t })
    }

    /// Half the adiabaticity budget, `ω₀T/2`. Also the conversion factor
    /// between `ξ` and the dimensionless coupling `μβq/ħ`.
    pub fn half_omega0_t(&self) -> f64 {
        0.5 * self.omega0_t
    }

    /// `μβq/ħ = (ω₀T/2)·ξ`.
    pub fn coupling_strength(&self) -> f64 {
        self.half_omega0_t() * self.xi
    }

    /// Cartesian unit vector of the measurement direction.
    pub fn direction(&self) -> [f64; 3] {
        polar_to_cartesian(self.gamma, self.eta)
    }

    pub fn with_xi(self, xi: f64) -> Result<Self> {
        Self::new(xi, self.gamma, self.eta, self.omega0_t)
    }

    pub fn with_omega0_t(self, omega0_t: f64) -> Result<Self> {
        Self::new(self.xi, self.gamma, self.eta, omega0_t)
    }
}

pub fn normalize_azimuth(eta: f64) -> f64 {
    let e = eta.rem_euclid(TAU);
    // rem_euclid may round up to exactly 2π for tiny negative inputs.
    if e >= TAU {
        0.0
    } else {
        e
    }
}

pub fn polar_to_cartesian(gamma: f64, eta: f64) -> [f64; 3] {
    let (sg, cg) = gamma.sin_cos();
    let (se, ce) = eta.sin_cos();
    [sg * ce, sg * se, cg]
}

/// Polar and azimuthal angles `(γ, η)` of a unit vector `n`.
pub fn direction_angles(n: [f64; 3]) -> Result<(f64, f64)> {
    let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    if !norm.is_finite() || (norm - 1.0).abs() > UNIT_TOL {
        return domain(format!("direction must be a unit vector, |n| = {norm}"));
    }
    let rho = n[0].hypot(n[1]);
    let gamma = rho.atan2(n[2]);
    let eta = if rho == 0.0 { 0.0 } else { normalize_azimuth(n[1].atan2(n[0])) };
    Ok((gamma, eta))
}

pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// One of the three measurement fields of a multi-field configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldSpec {
    /// Field strength as the ratio `ξ_k`; the dimensionless coupling is
    /// `μβ_k q_k/ħ = (ω₀T/2)·ξ_k`.
    pub xi: f64,
    pub gamma: f64,
    pub eta: f64,
    /// Label `k ∈ {1, 2, 3}`.
    pub index: u8,
}

impl FieldSpec {
    pub fn new(index: u8, xi: f64, gamma: f64, eta: f64) -> Result<Self> {
        if !(1..=3).contains(&index) {
            return domain(format!("field index must be 1, 2 or 3, got {index}"));
        }
        // Reuse the geometry checks; omega0T is irrelevant here.
        let g = MeasurementGeometry::new(xi, gamma, eta, 0.0)?;
        Ok(Self { xi: g.xi, gamma: g.gamma, eta: g.eta, index })
    }

    pub fn direction(&self) -> [f64; 3] {
        polar_to_cartesian(self.gamma, self.eta)
    }

    /// The geometry of this field alone at the given `ω₀T`.
    pub fn geometry(&self, omega0_t: f64) -> Result<MeasurementGeometry> {
        MeasurementGeometry::new(self.xi, self.gamma, self.eta, omega0_t)
    }
}

/// Largest absolute pairwise dot product among three directions.
pub fn max_cross_overlap(dirs: &[[f64; 3]; 3]) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..3 {
        for j in (i + 1)..3 {
            worst = worst.max(dot(dirs[i], dirs[j]).abs());
        }
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingKind {
    Constant,
    RaisedCosine,
    Optimized,
    Tabulated,
}

impl CouplingKind {
    pub const BUILT_IN: [CouplingKind; 3] =
        [CouplingKind::Constant, CouplingKind::RaisedCosine, CouplingKind::Optimized];

    pub fn name(self) -> &'static str {
        match self {
            CouplingKind::Constant => "constant",
            CouplingKind::RaisedCosine => "raised-cosine",
            CouplingKind::Optimized => "optimized",
            CouplingKind::Tabulated => "tabulated",
        }
    }

    /// Coefficients `c_j` of `g·T = Σ_j c_j cos(2πj s)` on `[0, 1]`.
    pub(crate) fn cosine_series(self) -> Option<&'static [f64]> {
        match self {
            CouplingKind::Constant => Some(&[1.0]),
            // 1 + cos(2π(s − ½)) = 1 − cos(2πs)
            CouplingKind::RaisedCosine => Some(&[1.0, -1.0]),
            // 1 + (4/3)cos(2π(s − ½)) + (1/3)cos(4π(s − ½))
            CouplingKind::Optimized => Some(&[1.0, -4.0 / 3.0, 1.0 / 3.0]),
            CouplingKind::Tabulated => None,
        }
    }
}

impl fmt::Display for CouplingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CouplingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "constant" | "const" => Ok(CouplingKind::Constant),
            "raised-cosine" | "raisedcosine" | "rc" => Ok(CouplingKind::RaisedCosine),
            "optimized" | "opt" => Ok(CouplingKind::Optimized),
            "tabulated" | "table" => Ok(CouplingKind::Tabulated),
            other => domain(format!("unknown coupling kind '{other}'")),
        }
    }
}

/// A piecewise-linear coupling profile sampled at ascending `s = t/T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileTable {
    samples: Vec<(f64, f64)>,
}

impl ProfileTable {
    /// Validates ordering and normalization; the table is never rescaled.
    pub fn new(samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::Table("at least two samples are required".into()));
        }
        for &(s, g) in &samples {
            if !(s.is_finite() && g.is_finite()) {
                return Err(Error::Table(format!("non-finite sample ({s}, {g})")));
            }
            if !(0.0..=1.0).contains(&s) {
                return Err(Error::Table(format!("t/T = {s} outside [0, 1]")));
            }
        }
        if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::Table("t/T must be strictly ascending".into()));
        }
        let table = Self { samples };
        let residual = (table.integral() - 1.0).abs();
        if residual > TABLE_NORM_TOL {
            return Err(Error::Table(format!(
                "profile is not normalized: |∫g - 1| = {residual:e} > {TABLE_NORM_TOL:e}"
            )));
        }
        Ok(table)
    }

    /// Parses whitespace-separated `t/T g·T` lines. Blank lines and lines
    /// starting with `#` are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut samples = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split_whitespace().collect();
            if cols.len() != 2 {
                return Err(Error::Table(format!("line {}: expected two columns", lineno + 1)));
            }
            let parse = |c: &str| {
                c.parse::<f64>()
                    .map_err(|e| Error::Table(format!("line {}: '{c}': {e}", lineno + 1)))
            };
            samples.push((parse(cols[0])?, parse(cols[1])?));
        }
        Self::new(samples)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Table(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    fn eval(&self, s: f64) -> f64 {
        let first = self.samples[0];
        let last = self.samples[self.samples.len() - 1];
        if s < first.0 || s > last.0 {
            return 0.0;
        }
        let idx = self.samples.partition_point(|&(t, _)| t <= s);
        if idx == self.samples.len() {
            return last.1;
        }
        let (t0, g0) = self.samples[idx - 1];
        let (t1, g1) = self.samples[idx];
        g0 + (g1 - g0) * (s - t0) / (t1 - t0)
    }

    // Integrates piecewise between knots so the kinks never fall inside a
    // quadrature panel.
    fn integral(&self) -> f64 {
        self.samples
            .windows(2)
            .map(|w| quad::integrate(|s| self.eval(s), w[0].0, w[1].0, 1e-15))
            .sum()
    }

    // Filon-type rule: each linear piece is integrated against e^{ixs}
    // exactly, on panels no wider than min(1/64, π/(4x)).
    fn phased_integral(&self, x: f64) -> C64 {
        let mut max_panel: f64 = 1.0 / 64.0;
        if x > 0.0 {
            max_panel = max_panel.min(PI / (4.0 * x));
        }
        let mut total = C64::new(0.0, 0.0);
        for w in self.samples.windows(2) {
            let (t0, g0) = w[0];
            let (t1, g1) = w[1];
            let slope = (g1 - g0) / (t1 - t0);
            let panels = ((t1 - t0) / max_panel).ceil().max(1.0) as usize;
            let h = (t1 - t0) / panels as f64;
            let theta = x * h;
            let (e0, e1) = linear_moments(theta);
            for p in 0..panels {
                let a = t0 + p as f64 * h;
                let ga = g0 + slope * (a - t0);
                let phase = C64::from_polar(1.0, x * a);
                total += phase * (e0 * (ga * h) + e1 * (slope * h * h));
            }
        }
        total
    }
}

// E0(θ) = ∫₀¹ e^{iθv} dv and E1(θ) = ∫₀¹ v e^{iθv} dv by power series;
// callers keep |θ| ≤ π/4.
fn linear_moments(theta: f64) -> (C64, C64) {
    let it = C64::new(0.0, theta);
    let mut term = C64::new(1.0, 0.0); // (iθ)^k / k!
    let mut e0 = C64::new(0.0, 0.0);
    let mut e1 = C64::new(0.0, 0.0);
    for k in 0..30 {
        let kf = k as f64;
        e0 += term / (kf + 1.0);
        e1 += term / (kf + 2.0);
        term = term * it / (kf + 1.0);
        if term.norm() < 1e-18 {
            break;
        }
    }
    (e0, e1)
}

/// Time dependence of the measurement field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CouplingProfile {
    Constant,
    RaisedCosine,
    Optimized,
    Tabulated(ProfileTable),
}

impl CouplingProfile {
    pub fn built_in(kind: CouplingKind) -> Result<Self> {
        match kind {
            CouplingKind::Constant => Ok(CouplingProfile::Constant),
            CouplingKind::RaisedCosine => Ok(CouplingProfile::RaisedCosine),
            CouplingKind::Optimized => Ok(CouplingProfile::Optimized),
            CouplingKind::Tabulated => domain("tabulated profiles need sample data"),
        }
    }

    pub fn kind(&self) -> CouplingKind {
        match self {
            CouplingProfile::Constant => CouplingKind::Constant,
            CouplingProfile::RaisedCosine => CouplingKind::RaisedCosine,
            CouplingProfile::Optimized => CouplingKind::Optimized,
            CouplingProfile::Tabulated(_) => CouplingKind::Tabulated,
        }
    }

    /// `g·T` at `s = t/T`; zero outside `[0, 1]`.
    pub fn eval(&self, s: f64) -> f64 {
        if !(0.0..=1.0).contains(&s) {
            return 0.0;
        }
        let c = (TAU * (s - 0.5)).cos();
        match self {
            CouplingProfile::Constant => 1.0,
            CouplingProfile::RaisedCosine => 1.0 + c,
            // 1 + (4/3)c + (1/3)(2c² − 1), factored so the endpoints are exact zeros
            CouplingProfile::Optimized => 2.0 / 3.0 * (1.0 + c) * (1.0 + c),
            CouplingProfile::Tabulated(table) => table.eval(s),
        }
    }

    /// `|∫₀¹ g·T ds − 1|` by adaptive quadrature.
    pub fn normalization_residual(&self) -> f64 {
        let integral = match self {
            CouplingProfile::Tabulated(table) => table.integral(),
            _ => quad::integrate(|s| self.eval(s), 0.0, 1.0, 1e-15),
        };
        (integral - 1.0).abs()
    }

    /// `∫₀¹ e^{i·ω₀T·s} (g·T)(s) ds`.
    pub fn phased_integral(&self, omega0_t: f64) -> C64 {
        match self {
            CouplingProfile::Tabulated(table) => table.phased_integral(omega0_t),
            other => cosine_series_phased(other.kind(), omega0_t),
        }
    }

    /// Resonant damping factor `D(ω₀T)` of a built-in profile, defined by
    /// `phased_integral = e^{iω₀T/2}·sinc(ω₀T/2)·D`. Infinite at the
    /// removable resonances; `None` for tabulated profiles.
    pub fn damping_factor(&self, omega0_t: f64) -> Option<f64> {
        let x = omega0_t;
        let r1 = 1.0 - (x / TAU).powi(2);
        let r2 = 1.0 - (x / (2.0 * TAU)).powi(2);
        match self {
            CouplingProfile::Constant => Some(1.0),
            CouplingProfile::RaisedCosine => Some(1.0 / r1),
            CouplingProfile::Optimized => Some(1.0 / (r1 * r2)),
            CouplingProfile::Tabulated(_) => None,
        }
    }
}

// ∫₀¹ e^{iys} ds
fn unit_phase_integral(y: f64) -> C64 {
    C64::from_polar(sinc(0.5 * y), 0.5 * y)
}

fn cosine_series_phased(kind: CouplingKind, x: f64) -> C64 {
    let coeffs = kind.cosine_series().expect("built-in kind");
    let near_resonance = (1..coeffs.len()).any(|j| (1.0 - (x / (TAU * j as f64)).powi(2)).abs() < RESONANCE_GUARD);
    if near_resonance {
        // Each cos(2πjs) contributes ½[I(x + 2πj) + I(x − 2πj)]; evaluating
        // the shifted terms directly keeps the resonant one finite.
        coeffs
            .iter()
            .enumerate()
            .map(|(j, &c)| {
                if j == 0 {
                    c * unit_phase_integral(x)
                } else {
                    let shift = TAU * j as f64;
                    0.5 * c * (unit_phase_integral(x + shift) + unit_phase_integral(x - shift))
                }
            })
            .sum()
    } else {
        let mut damping = 1.0;
        for j in 1..coeffs.len() {
            damping /= 1.0 - (x / (TAU * j as f64)).powi(2);
        }
        unit_phase_integral(x) * damping
    }
}
