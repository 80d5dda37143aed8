//! Effective-field contributions acting on the free-layer macrospin. All
//! fields are in A/m.

use rand::Rng;
use rand_distr::StandardNormal;

use super::demag::DemagTensor;
use super::params::{MagnetGeometry, MaterialParams};
use crate::constants::PhysicalConstants;
use crate::vec3::Vec3;

/// H_shape = −(N_xx m_x, N_yy m_y, N_zz m_z)·Ms.
#[inline]
pub fn shape_field(m: Vec3, ms: f64, n: &DemagTensor) -> Vec3 {
    Vec3::new(-n.nxx * m.x * ms, -n.nyy * m.y * ms, -n.nzz * m.z * ms)
}

/// First-order uniaxial anisotropy along ẑ: (2 Ku2 / (μ0 Ms))·m_z·ẑ.
#[inline]
pub fn uniaxial_field(m: Vec3, ku2: f64, ms: f64, mu0: f64) -> Vec3 {
    Vec3::new(0.0, 0.0, 2.0 * ku2 / (mu0 * ms) * m.z)
}

/// Standard deviation of each thermal-field component for a step `dt`.
pub fn thermal_sigma(
    mat: &MaterialParams,
    geom: &MagnetGeometry,
    dt: f64,
    c: &PhysicalConstants,
) -> f64 {
    if mat.temperature == 0.0 {
        return 0.0;
    }
    let a = mat.alpha;
    let ratio = 2.0 * c.k_b * mat.temperature / (c.gamma() * c.mu0 * mat.ms * geom.volume() * dt);
    (a / (1.0 + a * a) * ratio).sqrt()
}

/// One draw of the thermal fluctuation field; exactly zero when `sigma == 0`.
#[inline]
pub fn thermal_field<R: Rng + ?Sized>(sigma: f64, rng: &mut R) -> Vec3 {
    if sigma == 0.0 {
        return Vec3::ZERO;
    }
    let gx: f64 = rng.sample(StandardNormal);
    let gy: f64 = rng.sample(StandardNormal);
    let gz: f64 = rng.sample(StandardNormal);
    Vec3::new(gx, gy, gz) * sigma
}

/// H_eff = H_shape + H_Ku2 + H_a + H_thermal.
#[inline]
pub fn effective_field(
    m: Vec3,
    mat: &MaterialParams,
    n: &DemagTensor,
    applied: Vec3,
    thermal: Vec3,
    mu0: f64,
) -> Vec3 {
    shape_field(m, mat.ms, n) + uniaxial_field(m, mat.ku2, mat.ms, mu0) + applied + thermal
}
