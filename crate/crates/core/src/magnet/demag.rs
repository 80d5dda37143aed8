//! Magnetometric demagnetization factors of a uniformly magnetized elliptic
//! cylinder.
//!
//! In Fourier space the shape function of a cylinder with semi-axes `a`, `b`
//! and thickness `t` factorizes into `2J1(κ)/κ · sinc(k_z t/2)`. Integrating
//! `k_z` analytically and rescaling the in-plane wave vector to the unit disk
//! leaves
//!
//! ```text
//! N_xx = (4/π) ∫₀^{π/2} dφ  cos²φ / (a² ρ²(φ)) · F(ρ(φ)·t)
//! F(c) = ∫₀^∞ J1(q)² / q · g(c·q) dq,     g(x) = 1 − (1 − e^{−x}) / x
//! ρ²(φ) = cos²φ / a² + sin²φ / b²
//! ```
//!
//! with the analogous expression for `N_yy` and `N_zz = 1 − N_xx − N_yy`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use super::params::MagnetGeometry;
use crate::error::{Error, Result};
use crate::quadrature::{bessel_j1, GaussLegendre};

/// Diagonal demagnetization tensor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DemagTensor {
    pub nxx: f64,
    pub nyy: f64,
    pub nzz: f64,
}

impl DemagTensor {
    pub fn new(nxx: f64, nyy: f64, nzz: f64) -> Self {
        Self { nxx, nyy, nzz }
    }

    pub fn trace(&self) -> f64 {
        self.nxx + self.nyy + self.nzz
    }

    pub fn is_valid(&self) -> bool {
        let in_range = |v: f64| (0.0..=1.0).contains(&v);
        (self.trace() - 1.0).abs() <= 1e-9
            && in_range(self.nxx)
            && in_range(self.nyy)
            && in_range(self.nzz)
    }

    /// Smaller of the two in-plane factors: the in-plane easy direction.
    pub fn in_plane_min(&self) -> f64 {
        self.nxx.min(self.nyy)
    }
}

const PANEL: f64 = FRAC_PI_2;
const OSCILLATORY_CUTOFF: f64 = 400.0;

fn g(x: f64) -> f64 {
    if x < 1e-6 {
        x * (0.5 - x / 6.0)
    } else {
        1.0 + (-x).exp_m1() / x
    }
}

/// F(c) = ∫₀^∞ J1(q)²/q · g(c q) dq.
fn radial_integral(c: f64, rule: &GaussLegendre, tail_rule: &GaussLegendre) -> f64 {
    let panels = (OSCILLATORY_CUTOFF / PANEL).ceil() as usize;
    let cutoff = panels as f64 * PANEL;
    let mut sum = 0.0;
    for p in 0..panels {
        let lo = p as f64 * PANEL;
        sum += rule.integrate(lo, lo + PANEL, |q| {
            let j = bessel_j1(q);
            j * j / q * g(c * q)
        });
    }
    // Beyond the cutoff J1(q)² averages to 1/(πq); substitute q = cutoff/s.
    let tail = tail_rule.integrate(0.0, 1.0, |s| g(c * cutoff / s)) / (PI * cutoff);
    sum + tail
}

pub fn demag_factors(geom: &MagnetGeometry) -> Result<DemagTensor> {
    geom.validate()?;
    let (a, b, t) = (geom.semi_axis_a, geom.semi_axis_b, geom.thickness);
    let rule = GaussLegendre::new(10);
    let tail_rule = GaussLegendre::new(32);

    let (nxx, nyy) = if a == b {
        let n = radial_integral(t / a, &rule, &tail_rule);
        (n, n)
    } else {
        let angle_rule = GaussLegendre::new(24);
        let sectors = 8;
        let width = FRAC_PI_2 / sectors as f64;
        let mut nxx = 0.0;
        let mut nyy = 0.0;
        for s in 0..sectors {
            let lo = s as f64 * width;
            // both factors share the radial integral at each angle
            for (phi, w) in angle_rule.points(lo, lo + width) {
                let cx = phi.cos().powi(2) / (a * a);
                let cy = phi.sin().powi(2) / (b * b);
                let rho2 = cx + cy;
                let f = radial_integral(rho2.sqrt() * t, &rule, &tail_rule);
                nxx += w * cx / rho2 * f;
                nyy += w * cy / rho2 * f;
            }
        }
        (4.0 / PI * nxx, 4.0 / PI * nyy)
    };

    let tensor = DemagTensor::new(nxx, nyy, 1.0 - nxx - nyy);
    if !(nxx.is_finite() && nyy.is_finite()) || !tensor.is_valid() {
        return Err(Error::InvalidGeometry(format!(
            "demagnetization quadrature produced {tensor:?} for {geom:?}"
        )));
    }
    Ok(tensor)
}
