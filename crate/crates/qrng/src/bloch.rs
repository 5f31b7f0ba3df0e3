//! Bloch-sphere geometry of qubit states and two-outcome measurements.
//!
//! States and measurement operators are kept as 3-vectors throughout; 2x2
//! density matrices are never materialized. A binary POVM {F0, F1} is stored
//! as `F0 = a0*I + t/2 . sigma`, a state as its Bloch vector.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for constructor invariants.
pub const TOL_CONSTRUCT: f64 = 1e-12;
/// Tolerance for results of floating-point composition.
pub const TOL_RESULT: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let v = BlochVector { x, y, z };
        if !v.norm().is_finite() {
            return Err(Error::InvalidModel("non-finite Bloch vector".into()));
        }
        Ok(v)
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn dot(&self, other: &BlochVector) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(&self, other: &BlochVector) -> BlochVector {
        BlochVector {
            x: self.y * other.z - self.z * other.y,
            y: self.z * other.x - self.x * other.z,
            z: self.x * other.y - self.y * other.x,
        }
    }

    pub fn scale(&self, k: f64) -> BlochVector {
        BlochVector {
            x: k * self.x,
            y: k * self.y,
            z: k * self.z,
        }
    }

    pub fn sub(&self, other: &BlochVector) -> BlochVector {
        BlochVector {
            x: self.x - other.x,
            y: self.y - other.y,
            z: self.z - other.z,
        }
    }

    /// Unit vector in the same direction; errors on (near-)zero input.
    pub fn normalized(&self) -> Result<BlochVector> {
        let n = self.norm();
        if n < TOL_CONSTRUCT {
            return Err(Error::InvalidModel(
                "cannot normalize a zero Bloch vector".into(),
            ));
        }
        Ok(self.scale(1.0 / n))
    }
}

/// A qubit state, pure or mixed: Bloch vector on or inside the unit ball.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitState {
    pub bloch: BlochVector,
}

impl QubitState {
    pub fn new(bloch: BlochVector) -> Result<Self> {
        let n = bloch.norm();
        if !n.is_finite() || n > 1.0 + TOL_CONSTRUCT {
            return Err(Error::InvalidModel(format!(
                "state Bloch vector has norm {n}, outside the unit ball"
            )));
        }
        Ok(QubitState { bloch })
    }
}

/// Uncharacterized binary measurement {F0, F1} with F0 = a0*I + t/2 . sigma.
/// Positive semidefiniteness of both elements bounds |t| by 2*min(a0, 1-a0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinaryPovm {
    pub a0: f64,
    pub t: BlochVector,
}

impl BinaryPovm {
    pub fn new(a0: f64, t: BlochVector) -> Result<Self> {
        if !(0.0..=1.0).contains(&a0) {
            return Err(Error::InvalidModel(format!("a0 = {a0} outside [0,1]")));
        }
        let cap = 2.0 * a0.min(1.0 - a0);
        if t.norm() > cap + TOL_CONSTRUCT {
            return Err(Error::InvalidModel(format!(
                "|t| = {} exceeds positivity cap {cap}",
                t.norm()
            )));
        }
        Ok(BinaryPovm { a0, t })
    }
}

/// Generation state rho0 and test states rho1, rho2 with the purity ordering
/// |S0| >= |S1|, |S0| >= |S2| required by the security analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateTriple {
    pub rho0: QubitState,
    pub rho1: QubitState,
    pub rho2: QubitState,
}

impl StateTriple {
    pub fn new(rho0: QubitState, rho1: QubitState, rho2: QubitState) -> Result<Self> {
        let n0 = rho0.bloch.norm();
        if n0 < rho1.bloch.norm() - TOL_CONSTRUCT || n0 < rho2.bloch.norm() - TOL_CONSTRUCT {
            return Err(Error::InvalidModel(
                "generation state must have the longest Bloch vector".into(),
            ));
        }
        Ok(StateTriple { rho0, rho1, rho2 })
    }
}

/// Expectation g = Tr[(F0 - F1) rho] = (2 a0 - 1) + t . S.
pub fn expectation(povm: &BinaryPovm, state: &QubitState) -> Result<f64> {
    let g = (2.0 * povm.a0 - 1.0) + povm.t.dot(&state.bloch);
    if g.abs() > 1.0 + TOL_RESULT {
        return Err(Error::InvalidModel(format!(
            "expectation {g} escaped [-1,1]; inputs violate positivity"
        )));
    }
    Ok(g)
}

/// The randomness parameter C = |t x S0|.
pub fn randomness_parameter(t: &BlochVector, s0: &BlochVector) -> f64 {
    t.cross(s0).norm()
}

/// Bloch-vector length of a state carrying uniform modulation noise with
/// angular half-range theta': sin(2 theta') / (2 theta').
pub fn bloch_length_from_noise(theta_range: f64) -> Result<f64> {
    if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&theta_range) {
        return Err(Error::InvalidModel(format!(
            "noise range {theta_range} outside [0, pi/2]"
        )));
    }
    let x = 2.0 * theta_range;
    if theta_range < 1e-6 {
        // series for sin(x)/x around the removable singularity
        let x2 = x * x;
        Ok(1.0 - x2 / 6.0 + x2 * x2 / 120.0)
    } else {
        Ok(x.sin() / x)
    }
}

/// State at polar angle theta, azimuth phi, with Bloch radius in [0,1].
pub fn state_from_polar(theta: f64, phi: f64, radius: f64) -> Result<QubitState> {
    if !(0.0..=1.0).contains(&radius) {
        return Err(Error::InvalidModel(format!(
            "Bloch radius {radius} outside [0,1]"
        )));
    }
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    QubitState::new(BlochVector {
        x: radius * st * cp,
        y: radius * st * sp,
        z: radius * ct,
    })
}
