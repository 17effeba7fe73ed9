//! State reconstruction from three measured spin expectation values, and
//! the effect of one reversed pointer shift on that reconstruction.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::model::{dot, polar_to_cartesian, UNIT_TOL};
use crate::oracle::SpinState;

const HERMITIAN_TOL: f64 = 1e-12;
const EXPECTATION_MARGIN: f64 = 1e-9;

/// A 2×2 density matrix in the `{|+⟩, |−⟩}` basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DensityMatrixRepr", into = "DensityMatrixRepr")]
pub struct DensityMatrix {
    rho: [[C64; 2]; 2],
}

impl DensityMatrix {
    pub fn new(rho: [[C64; 2]; 2]) -> Result<Self> {
        if (rho[1][0] - rho[0][1].conj()).norm() > HERMITIAN_TOL
            || rho[0][0].im.abs() > HERMITIAN_TOL
            || rho[1][1].im.abs() > HERMITIAN_TOL
        {
            return domain("density matrix must be Hermitian");
        }
        let trace = rho[0][0].re + rho[1][1].re;
        if (trace - 1.0).abs() > HERMITIAN_TOL {
            return domain(format!("density matrix must have unit trace, got {trace}"));
        }
        let det = rho[0][0].re * rho[1][1].re - rho[0][1].norm_sqr();
        if det < -HERMITIAN_TOL || rho[0][0].re < -HERMITIAN_TOL || rho[1][1].re < -HERMITIAN_TOL {
            return domain("density matrix must be positive semidefinite");
        }
        Ok(Self { rho })
    }

    /// `ρ = (I + r·σ)/2` for `|r| ≤ 1`.
    pub fn from_bloch(r: [f64; 3]) -> Result<Self> {
        let half = 0.5;
        Self::new([
            [C64::new(half * (1.0 + r[2]), 0.0), C64::new(half * r[0], -half * r[1])],
            [C64::new(half * r[0], half * r[1]), C64::new(half * (1.0 - r[2]), 0.0)],
        ])
    }

    pub fn pure(state: &SpinState) -> Result<Self> {
        let (p, m) = (state.c_plus, state.c_minus);
        Self::new([[p * p.conj(), p * m.conj()], [m * p.conj(), m * m.conj()]])
    }

    pub fn entries(&self) -> [[C64; 2]; 2] {
        self.rho
    }

    pub fn bloch(&self) -> [f64; 3] {
        [2.0 * self.rho[0][1].re, -2.0 * self.rho[0][1].im, self.rho[0][0].re - self.rho[1][1].re]
    }

    /// Diagonal `(⟨+|ρ|+⟩, ⟨−|ρ|−⟩)`.
    pub fn populations(&self) -> (f64, f64) {
        (self.rho[0][0].re, self.rho[1][1].re)
    }

    pub fn max_distance(&self, other: &DensityMatrix) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((self.rho[i][j] - other.rho[i][j]).norm());
            }
        }
        worst
    }
}

#[derive(Serialize, Deserialize)]
struct DensityMatrixRepr {
    rho00: [f64; 2],
    rho01: [f64; 2],
    rho10: [f64; 2],
    rho11: [f64; 2],
    bloch: [f64; 3],
}

impl From<DensityMatrix> for DensityMatrixRepr {
    fn from(m: DensityMatrix) -> Self {
        let pair = |c: C64| [c.re, c.im];
        Self {
            rho00: pair(m.rho[0][0]),
            rho01: pair(m.rho[0][1]),
            rho10: pair(m.rho[1][0]),
            rho11: pair(m.rho[1][1]),
            bloch: m.bloch(),
        }
    }
}

impl TryFrom<DensityMatrixRepr> for DensityMatrix {
    type Error = crate::error::Error;

    fn try_from(r: DensityMatrixRepr) -> Result<Self> {
        let c = |p: [f64; 2]| C64::new(p[0], p[1]);
        DensityMatrix::new([[c(r.rho00), c(r.rho01)], [c(r.rho10), c(r.rho11)]])
    }
}

/// Measured `⟨σ·n_k⟩` along three orthonormal directions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpectationTriple {
    pub directions: [[f64; 3]; 3],
    pub values: [f64; 3],
}

impl ExpectationTriple {
    pub fn new(directions: [[f64; 3]; 3], values: [f64; 3]) -> Result<Self> {
        for (k, n) in directions.iter().enumerate() {
            if (dot(*n, *n).sqrt() - 1.0).abs() > UNIT_TOL {
                return domain(format!("direction {} is not a unit vector", k + 1));
            }
        }
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            if dot(directions[i], directions[j]).abs() > UNIT_TOL {
                return domain(format!("directions {} and {} are not orthogonal", i + 1, j + 1));
            }
        }
        for (k, v) in values.iter().enumerate() {
            if !v.is_finite() || v.abs() > 1.0 + EXPECTATION_MARGIN {
                return domain(format!("expectation value {} = {v} outside [-1, 1]", k + 1));
            }
        }
        Ok(Self { directions, values })
    }

    /// The coordinate axes x, y, z.
    pub fn axes(values: [f64; 3]) -> Result<Self> {
        Self::new([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]], values)
    }

    /// Exact expectation values of `state` along `directions`.
    pub fn of_state(state: &SpinState, directions: [[f64; 3]; 3]) -> Result<Self> {
        let r = DensityMatrix::pure(state)?.bloch();
        Self::new(directions, directions.map(|n| dot(n, r)))
    }

    pub fn bloch(&self) -> [f64; 3] {
        let mut r = [0.0; 3];
        for (n, e) in self.directions.iter().zip(self.values) {
            for i in 0..3 {
                r[i] += e * n[i];
            }
        }
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reconstruction {
    pub rho: DensityMatrix,
    /// The raw Bloch vector lay outside the unit ball and was scaled back.
    pub clipped: bool,
}

pub fn reconstruct_state(data: &ExpectationTriple) -> Result<Reconstruction> {
    let mut r = data.bloch();
    let len = dot(r, r).sqrt();
    let clipped = len > 1.0;
    if clipped {
        r = r.map(|x| x / len);
    }
    Ok(Reconstruction { rho: DensityMatrix::from_bloch(r)?, clipped })
}

/// `√⟨ref|ρ|ref⟩`.
pub fn fidelity(rho: &DensityMatrix, reference: &SpinState) -> f64 {
    let m = rho.entries();
    let (p, q) = (reference.c_plus, reference.c_minus);
    let overlap = p.conj() * (m[0][0] * p + m[0][1] * q) + q.conj() * (m[1][0] * p + m[1][1] * q);
    overlap.re.clamp(0.0, 1.0).sqrt()
}

/// Orthonormal triple with `n₃` at `(γ, η)`; `n₁`, `n₂` are the polar and
/// azimuthal unit vectors at that point.
pub fn measurement_frame(gamma: f64, eta: f64) -> [[f64; 3]; 3] {
    let (sg, cg) = gamma.sin_cos();
    let (se, ce) = eta.sin_cos();
    [[cg * ce, cg * se, -sg], [-se, ce, 0.0], polar_to_cartesian(gamma, eta)]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorruptedReconstruction {
    pub rho: DensityMatrix,
    pub fidelity: f64,
    pub directions: [[f64; 3]; 3],
    pub values: [f64; 3],
}

/// Reconstruction of `|+⟩` when the pointer shift along `n₃` (polar angle
/// `γ`, azimuth `η`) came out reversed.
pub fn corrupted_reconstruction(gamma: f64, eta: f64) -> Result<CorruptedReconstruction> {
    if !(0.0..=std::f64::consts::PI).contains(&gamma) || !eta.is_finite() {
        return domain(format!("invalid direction angles ({gamma}, {eta})"));
    }
    let directions = measurement_frame(gamma, eta);
    let mut data = ExpectationTriple::of_state(&SpinState::plus(), directions)?;
    data.values[2] = -data.values[2];
    let rho = reconstruct_state(&data)?.rho;
    Ok(CorruptedReconstruction {
        rho,
        fidelity: fidelity(&rho, &SpinState::plus()),
        directions,
        values: data.values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    #[test]
    fn axis_reconstructions() {
        let r = reconstruct_state(&ExpectationTriple::axes([0.0, 0.0, 1.0]).unwrap()).unwrap();
        assert_eq!(r.rho.populations(), (1.0, 0.0));
        assert!(!r.clipped);
        let r = reconstruct_state(&ExpectationTriple::axes([0.0; 3]).unwrap()).unwrap();
        assert_eq!(r.rho.populations(), (0.5, 0.5));
        let r = reconstruct_state(&ExpectationTriple::axes([1.0, 0.0, 0.0]).unwrap()).unwrap();
        let m = r.rho.entries();
        for row in m {
            for c in row {
                assert!((c - C64::new(0.5, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn noisy_data_is_clipped() {
        let r = reconstruct_state(&ExpectationTriple::axes([0.8, 0.8, 0.0]).unwrap()).unwrap();
        assert!(r.clipped);
        let b = r.rho.bloch();
        assert!((dot(b, b) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bad_triples_rejected() {
        let skew = [[1.0, 0.0, 0.0], [FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0], [0.0, 0.0, 1.0]];
        assert!(ExpectationTriple::new(skew, [0.0; 3]).is_err());
        assert!(ExpectationTriple::axes([1.5, 0.0, 0.0]).is_err());
        let long = [[2.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert!(ExpectationTriple::new(long, [0.0; 3]).is_err());
    }

    #[test]
    fn density_matrix_validation() {
        let z = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        assert!(DensityMatrix::new([[one, z], [z, z]]).is_ok());
        assert!(DensityMatrix::new([[one, one], [z, z]]).is_err());
        assert!(DensityMatrix::new([[one, z], [z, one]]).is_err());
        let neg = C64::new(-0.5, 0.0);
        assert!(DensityMatrix::new([[C64::new(1.5, 0.0), z], [z, neg]]).is_err());
    }

    #[test]
    fn fidelity_examples() {
        let plus = DensityMatrix::pure(&SpinState::plus()).unwrap();
        assert_eq!(fidelity(&plus, &SpinState::plus()), 1.0);
        let mixed = DensityMatrix::from_bloch([0.0; 3]).unwrap();
        let any = SpinState::new(C64::new(0.6, 0.0), C64::new(0.0, 0.8)).unwrap();
        assert!((fidelity(&mixed, &any) - FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn corrupted_examples() {
        assert!(corrupted_reconstruction(0.0, 0.3).unwrap().fidelity.abs() < 1e-12);
        assert!((corrupted_reconstruction(PI / 2.0, 0.3).unwrap().fidelity - 1.0).abs() < 1e-12);
        let c = corrupted_reconstruction(PI / 4.0, 0.3).unwrap();
        assert!((c.fidelity - FRAC_1_SQRT_2).abs() < 1e-12);
        let (p, m) = c.rho.populations();
        assert!((p - 0.5).abs() < 1e-12 && (m - 0.5).abs() < 1e-12);
        // still a pure state
        let b = c.rho.bloch();
        assert!((dot(b, b) - 1.0).abs() < 1e-12);
        assert!(corrupted_reconstruction(-0.1, 0.0).is_err());
    }

    #[test]
    fn frame_is_orthonormal() {
        for (g, e) in [(0.0, 0.0), (0.4, 1.0), (PI / 2.0, 3.0), (PI, 5.0)] {
            let f = measurement_frame(g, e);
            assert!(ExpectationTriple::new(f, [0.0; 3]).is_ok());
        }
    }

    #[test]
    fn json_shape() {
        let rho = DensityMatrix::from_bloch([1.0, 0.0, 0.0]).unwrap();
        let v = serde_json::to_value(rho).unwrap();
        assert_eq!(v["rho01"], serde_json::json!([0.5, 0.0]));
        assert_eq!(v["bloch"], serde_json::json!([1.0, 0.0, 0.0]));
        let back: DensityMatrix = serde_json::from_value(v).unwrap();
        assert_eq!(back, rho);
        let bad = serde_json::json!({"rho00": [2.0, 0.0], "rho01": [0.0, 0.0], "rho10": [0.0, 0.0], "rho11": [0.0, 0.0], "bloch": [0.0, 0.0, 0.0]});
        assert!(serde_json::from_value::<DensityMatrix>(bad).is_err());
    }
}
