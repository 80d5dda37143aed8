//! Stochastic Landau-Lifshitz-Gilbert integration for a single macrospin.
//!
//! The Gilbert form with a Slonczewski-like torque,
//!
//! ```text
//! dm/dt = −γ m×H + α m×dm/dt + (1/(q N_s)) m×(I_s×m)
//! ```
//!
//! is solved for dm/dt, giving the explicit form integrated here:
//!
//! ```text
//! (1+α²) dm/dt = −γ m×H − αγ m×(m×H) + τ + α m×τ,   τ = (1/(q N_s)) m×(I_s×m)
//! ```
//!
//! Noise enters through a thermal field held fixed over each step, and the
//! stochastic Heun scheme converges to the Stratonovich solution.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::demag::DemagTensor;
use super::field::{thermal_field, thermal_sigma};
use super::params::{MagnetGeometry, MaterialParams};
use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::vec3::Vec3;

/// Unit magnetization of the free layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec3", into = "Vec3")]
pub struct Magnetization(Vec3);

impl Magnetization {
    pub const UP: Magnetization = Magnetization(Vec3::Z);
    pub const DOWN: Magnetization = Magnetization(Vec3::new(0.0, 0.0, -1.0));

    pub fn new(v: Vec3) -> Result<Self> {
        v.normalized()
            .map(Magnetization)
            .ok_or_else(|| Error::InvalidParameter(format!("cannot normalize magnetization {v:?}")))
    }

    /// Polar angle from +ẑ and azimuth from +x̂, in radians.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        Magnetization(Vec3::new(
            theta.sin() * phi.cos(),
            theta.sin() * phi.sin(),
            theta.cos(),
        ))
    }

    #[inline]
    pub fn vec(self) -> Vec3 {
        self.0
    }
}

impl TryFrom<Vec3> for Magnetization {
    type Error = Error;
    fn try_from(v: Vec3) -> Result<Self> {
        Magnetization::new(v)
    }
}

impl From<Magnetization> for Vec3 {
    fn from(m: Magnetization) -> Vec3 {
        m.0
    }
}

/// Spin current injected into the free layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinCurrent {
    /// [A], non-negative.
    pub magnitude: f64,
    /// Unit polarization.
    pub sigma: Vec3,
}

impl SpinCurrent {
    pub const NONE: SpinCurrent = SpinCurrent {
        magnitude: 0.0,
        sigma: Vec3::Z,
    };

    #[inline]
    pub fn vector(&self) -> Vec3 {
        self.sigma * self.magnitude
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    /// Time step [s].
    pub dt: f64,
    pub renormalize: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            dt: 1e-13,
            renormalize: true,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be > 0, got {}", self.dt)));
        }
        Ok(())
    }

    pub fn steps_for(&self, duration: f64) -> u64 {
        (duration / self.dt).round().max(0.0) as u64
    }
}

/// Prefactors of the explicit LLG right-hand side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LlgCoefficients {
    /// γ/(1+α²)
    pub gamma_ll: f64,
    pub alpha: f64,
    /// 1/(q N_s)/(1+α²)
    pub torque_ll: f64,
    alpha_gamma_ll: f64,
    alpha_torque_ll: f64,
}

impl LlgCoefficients {
    pub fn new(mat: &MaterialParams, geom: &MagnetGeometry, c: &PhysicalConstants) -> Self {
        let a = mat.alpha;
        let pre = 1.0 / (1.0 + a * a);
        let gamma_ll = c.gamma() * pre;
        let torque_ll = pre / (c.q * mat.spin_count(geom, c));
        Self {
            gamma_ll,
            alpha: a,
            torque_ll,
            alpha_gamma_ll: a * gamma_ll,
            alpha_torque_ll: a * torque_ll,
        }
    }

    /// dm/dt for magnetization `m`, total field `h` and spin-current vector `is`.
    ///
    /// The double cross products are expanded (m×(m×h) = m(m·h) − h|m|²,
    /// m×(I×m) = I|m|² − m(m·I), m×(m×(I×m)) = |m|² m×I) so the predictor,
    /// which is not exactly unit length, is handled consistently.
    #[inline(always)]
    pub fn rhs(&self, m: Vec3, h: Vec3, is: Vec3) -> Vec3 {
        let m2 = m.dot(m);
        let mh = m.dot(h);
        let mut d = m.cross(h) * (-self.gamma_ll) - (m * mh - h * m2) * self.alpha_gamma_ll;
        if is != Vec3::ZERO {
            let mi = m.dot(is);
            d += (is * m2 - m * mi) * self.torque_ll + m.cross(is) * (self.alpha_torque_ll * m2);
        }
        d
    }
}

/// One stochastic Heun step with an m-dependent deterministic field and a
/// thermal field frozen over the step. Returns the un-normalized update.
#[inline(always)]
pub fn heun_step(
    m: Vec3,
    dt: f64,
    coeff: &LlgCoefficients,
    field: impl Fn(Vec3) -> Vec3,
    thermal: Vec3,
    is: Vec3,
) -> Vec3 {
    let k1 = coeff.rhs(m, field(m) + thermal, is);
    let predictor = m + k1 * dt;
    let k2 = coeff.rhs(predictor, field(predictor) + thermal, is);
    m + (k1 + k2) * (0.5 * dt)
}

/// Advances `m` by one step under a constant effective field `h_eff`.
pub fn llg_step(
    m: Magnetization,
    h_eff: Vec3,
    is: &SpinCurrent,
    mat: &MaterialParams,
    geom: &MagnetGeometry,
    cfg: &IntegratorConfig,
) -> Result<Magnetization> {
    let coeff = LlgCoefficients::new(mat, geom, &PhysicalConstants::SI);
    let next = heun_step(m.vec(), cfg.dt, &coeff, |_| h_eff, Vec3::ZERO, is.vector());
    if !next.is_finite() {
        return Err(Error::Diverged { step: 0, time: 0.0 });
    }
    if cfg.renormalize {
        Magnetization::new(next)
    } else {
        Ok(Magnetization(next))
    }
}

/// Integration state carried across pulses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinState {
    pub m: Vec3,
    pub t: f64,
    pub step: u64,
}

impl SpinState {
    pub fn new(m: Magnetization) -> Self {
        Self {
            m: m.vec(),
            t: 0.0,
            step: 0,
        }
    }

    pub fn magnetization(&self) -> Magnetization {
        Magnetization(self.m)
    }
}

/// Sampled trajectory point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub m: Vec3,
}

/// Records every `stride`-th step.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub stride: u64,
    pub samples: Vec<Sample>,
}

impl Trajectory {
    pub fn with_stride(stride: u64) -> Self {
        Self {
            stride: stride.max(1),
            samples: Vec::new(),
        }
    }

    fn push(&mut self, s: &SpinState) {
        self.samples.push(Sample { t: s.t, m: s.m });
    }
}

/// A free layer with all field prefactors resolved for a fixed time step.
#[derive(Debug, Clone, PartialEq)]
pub struct MacrospinModel {
    pub geometry: MagnetGeometry,
    pub material: MaterialParams,
    pub demag: DemagTensor,
    pub applied: Vec3,
    pub constants: PhysicalConstants,
    pub config: IntegratorConfig,
    coeff: LlgCoefficients,
    sigma_th: f64,
    /// Shape and uniaxial terms are diagonal in m: H = diag ⊙ m + applied.
    field_diag: Vec3,
}

impl MacrospinModel {
    pub fn new(
        geometry: MagnetGeometry,
        material: MaterialParams,
        demag: DemagTensor,
        applied: Vec3,
        constants: PhysicalConstants,
        config: IntegratorConfig,
    ) -> Result<Self> {
        geometry.validate()?;
        material.validate()?;
        config.validate()?;
        if !applied.is_finite() {
            return Err(Error::InvalidParameter("applied field must be finite".into()));
        }
        let ms = material.ms;
        let field_diag = Vec3::new(
            -demag.nxx * ms,
            -demag.nyy * ms,
            -demag.nzz * ms + 2.0 * material.ku2 / (constants.mu0 * ms),
        );
        Ok(Self {
            field_diag,
            coeff: LlgCoefficients::new(&material, &geometry, &constants),
            sigma_th: thermal_sigma(&material, &geometry, config.dt, &constants),
            geometry,
            material,
            demag,
            applied,
            constants,
            config,
        })
    }

    pub fn coefficients(&self) -> &LlgCoefficients {
        &self.coeff
    }

    pub fn thermal_sigma(&self) -> f64 {
        self.sigma_th
    }

    /// Deterministic part of H_eff (shape + uniaxial + applied).
    #[inline(always)]
    pub fn field(&self, m: Vec3) -> Vec3 {
        let d = self.field_diag;
        Vec3::new(d.x * m.x, d.y * m.y, d.z * m.z) + self.applied
    }

    /// One step with an explicit thermal field; returns the un-normalized update.
    #[inline(always)]
    pub fn raw_step(&self, m: Vec3, thermal: Vec3, is: Vec3) -> Vec3 {
        heun_step(m, self.config.dt, &self.coeff, |v| self.field(v), thermal, is)
    }

    /// Integrates for `duration` seconds under constant spin current `is`.
    pub fn integrate<R: Rng + ?Sized>(
        &self,
        state: &mut SpinState,
        duration: f64,
        is: &SpinCurrent,
        rng: &mut R,
        mut trajectory: Option<&mut Trajectory>,
    ) -> Result<()> {
        let steps = self.config.steps_for(duration);
        let is = is.vector();
        let dt = self.config.dt;
        for _ in 0..steps {
            let th = thermal_field(self.sigma_th, rng);
            let next = self.raw_step(state.m, th, is);
            state.step += 1;
            state.t += dt;
            if !next.is_finite() {
                return Err(Error::Diverged {
                    step: state.step,
                    time: state.t,
                });
            }
            state.m = if self.config.renormalize {
                next * (1.0 / next.norm())
            } else {
                next
            };
            if let Some(tr) = trajectory.as_deref_mut() {
                if state.step % tr.stride == 0 {
                    tr.push(state);
                }
            }
        }
        Ok(())
    }

    /// Lockstep integration of `L` independent trajectories, each with its own
    /// spin current and RNG stream. Every lane performs exactly the same
    /// floating-point operations as [`MacrospinModel::integrate`], so results
    /// are bit-identical to integrating the lanes one at a time; interleaving
    /// only lets the CPU overlap the lanes' dependency chains.
    pub fn integrate_lanes<R: Rng, const L: usize>(
        &self,
        states: &mut [SpinState; L],
        duration: f64,
        is: &[SpinCurrent; L],
        rngs: &mut [R; L],
    ) -> Result<()> {
        let steps = self.config.steps_for(duration);
        let is: [Vec3; L] = std::array::from_fn(|l| is[l].vector());
        let dt = self.config.dt;
        for _ in 0..steps {
            let th: [Vec3; L] = std::array::from_fn(|l| thermal_field(self.sigma_th, &mut rngs[l]));
            let next: [Vec3; L] = std::array::from_fn(|l| self.raw_step(states[l].m, th[l], is[l]));
            for l in 0..L {
                let s = &mut states[l];
                s.step += 1;
                s.t += dt;
                let n = next[l];
                if !n.is_finite() {
                    return Err(Error::Diverged {
                        step: s.step,
                        time: s.t,
                    });
                }
                s.m = if self.config.renormalize { n * (1.0 / n.norm()) } else { n };
            }
        }
        Ok(())
    }

    /// Records the current state into `trajectory` regardless of the stride.
    pub fn record(state: &SpinState, trajectory: &mut Trajectory) {
        trajectory.push(state);
    }
}
