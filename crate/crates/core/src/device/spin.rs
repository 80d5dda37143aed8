//! Charge-to-spin conversion for the clock (spin Hall) and write (MTJ) paths.

use super::params::{HeavyMetalParams, MtjParams};
use crate::magnet::{MagnetGeometry, SpinCurrent};
use crate::vec3::Vec3;

/// Spin current injected by a clock current flowing along x̂ in the heavy
/// metal: |I_s| = θ_SH (A_MTJ/A_HM) |I|, polarized along sign(I)·ŷ.
pub fn she_spin_current(i_clock: f64, hm: &HeavyMetalParams, geom: &MagnetGeometry) -> SpinCurrent {
    let beta = hm.injection_efficiency(geom);
    SpinCurrent {
        magnitude: beta * i_clock.abs(),
        sigma: if i_clock < 0.0 { -Vec3::Y } else { Vec3::Y },
    }
}

/// Spin current of a write current through the MTJ: |I_s| = P |I|.
///
/// The pinned layer points along +ẑ; a positive current drives the free
/// layer toward −ẑ (antiparallel), a negative one toward +ẑ (parallel).
pub fn mtj_spin_current(i_write: f64, mtj: &MtjParams) -> SpinCurrent {
    SpinCurrent {
        magnitude: mtj.polarization * i_write.abs(),
        sigma: if i_write < 0.0 { Vec3::Z } else { -Vec3::Z },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clock_path_examples() {
        let hm = HeavyMetalParams::default();
        let geom = MagnetGeometry::default();
        let s = she_spin_current(85e-6, &hm, &geom);
        // 0.3 · (π/4 · 1600) / 80 = 4.712
        assert!((s.magnitude - 4.712_389 * 85e-6).abs() < 1e-9);
        assert!((s.magnitude - 400.5e-6).abs() < 0.1e-6);
        assert_eq!(s.sigma, Vec3::Y);
        assert_eq!(she_spin_current(-85e-6, &hm, &geom).sigma, -Vec3::Y);
        assert_eq!(she_spin_current(0.0, &hm, &geom).vector(), Vec3::new(0.0, 0.0, 0.0));
    }

    #[test]
    fn write_path_polarity() {
        let mtj = MtjParams::default();
        let s = mtj_spin_current(4e-6, &mtj);
        assert_eq!(s.magnitude, 2e-6);
        assert_eq!(s.sigma, -Vec3::Z);
        assert_eq!(mtj_spin_current(-4e-6, &mtj).sigma, Vec3::Z);
        assert_eq!(mtj_spin_current(0.0, &mtj).magnitude, 0.0);
    }
}
