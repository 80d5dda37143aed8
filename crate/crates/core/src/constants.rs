use serde::{Deserialize, Serialize};

/// Physical constants in SI units (CODATA 2018).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// Vacuum permeability [T·m/A].
    pub mu0: f64,
    /// Bohr magneton [A·m²].
    pub mu_b: f64,
    /// Boltzmann constant [J/K].
    pub k_b: f64,
    /// Reduced Planck constant [J·s].
    pub hbar: f64,
    /// Elementary charge [C].
    pub q: f64,
}

impl PhysicalConstants {
    pub const SI: PhysicalConstants = PhysicalConstants {
        mu0: 1.256_637_062_12e-6,
        mu_b: 9.274_010_078_3e-24,
        k_b: 1.380_649e-23,
        hbar: 1.054_571_817e-34,
        q: 1.602_176_634e-19,
    };

    /// Electron gyromagnetic ratio 2·μB·μ0/ħ [m/(A·s)].
    #[inline]
    pub fn gamma(&self) -> f64 {
        2.0 * self.mu_b * self.mu0 / self.hbar
    }

    /// Thermal energy k_B·T [J].
    #[inline]
    pub fn kt(&self, temperature: f64) -> f64 {
        self.k_b * temperature
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::SI
    }
}
