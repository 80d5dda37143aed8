use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};

/// Elliptic-cylinder free layer. All lengths in metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MagnetGeometry {
    pub semi_axis_a: f64,
    pub semi_axis_b: f64,
    pub thickness: f64,
}

impl Default for MagnetGeometry {
    /// 40 nm × 40 nm × 1.5 nm disk.
    fn default() -> Self {
        Self {
            semi_axis_a: 20e-9,
            semi_axis_b: 20e-9,
            thickness: 1.5e-9,
        }
    }
}

impl MagnetGeometry {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("semi_axis_a", self.semi_axis_a),
            ("semi_axis_b", self.semi_axis_b),
            ("thickness", self.thickness),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidGeometry(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Cross-section π·a·b, which is also the MTJ area [m²].
    pub fn area(&self) -> f64 {
        PI * self.semi_axis_a * self.semi_axis_b
    }

    pub fn volume(&self) -> f64 {
        self.area() * self.thickness
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaterialParams {
    /// Saturation magnetization [A/m].
    pub ms: f64,
    /// Gilbert damping.
    pub alpha: f64,
    /// Uniaxial perpendicular anisotropy energy density [J/m³].
    pub ku2: f64,
    /// Temperature [K].
    pub temperature: f64,
}

impl Default for MaterialParams {
    /// Ku2 is left at zero; device construction calibrates it from the barrier.
    fn default() -> Self {
        Self {
            ms: 1.0e6,
            alpha: 0.0122,
            ku2: 0.0,
            temperature: 300.0,
        }
    }
}

impl MaterialParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.ms.is_finite() && self.ms > 0.0) {
            return Err(Error::InvalidParameter(format!("ms must be > 0, got {}", self.ms)));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "temperature must be >= 0, got {}",
                self.temperature
            )));
        }
        if !self.ku2.is_finite() {
            return Err(Error::InvalidParameter("ku2 must be finite".into()));
        }
        Ok(())
    }

    /// Number of spins N_s = Ms·V/μB in the free layer.
    pub fn spin_count(&self, geom: &MagnetGeometry, c: &PhysicalConstants) -> f64 {
        self.ms * geom.volume() / c.mu_b
    }
}
