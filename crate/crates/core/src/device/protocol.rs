//! Two-step switching: the clock current parks the free layer on the hard
//! axis (±ŷ), then the write current tips it into one of the ±ẑ wells.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::params::Device;
use super::spin::{mtj_spin_current, she_spin_current};
use crate::error::{Error, Result};
use crate::magnet::{Magnetization, SpinCurrent, SpinState, Trajectory};
use crate::vec3::Vec3;

/// Rectangular clock and write pulses, applied strictly one after another.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PulseSchedule {
    /// Clock current through the heavy metal [A].
    pub i_clock: f64,
    pub t_clock: f64,
    /// Signed synaptic current through the MTJ [A].
    pub i_write: f64,
    pub t_write: f64,
    /// Idle time between the end of the clock and the start of the write [s].
    pub gap: f64,
    /// Torque-free settling time before the state is read [s].
    pub relax: f64,
}

impl Default for PulseSchedule {
    fn default() -> Self {
        Self {
            i_clock: 85e-6,
            t_clock: 2e-9,
            i_write: 0.0,
            t_write: 1e-9,
            gap: 0.0,
            relax: 3e-9,
        }
    }
}

impl PulseSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_clock > 0.0 && self.t_write > 0.0) {
            return Err(Error::InvalidParameter("pulse widths must be > 0".into()));
        }
        if !(self.gap >= 0.0 && self.relax >= 0.0) {
            return Err(Error::InvalidParameter("gap and relax must be >= 0".into()));
        }
        if !(self.i_clock.is_finite() && self.i_write.is_finite()) {
            return Err(Error::InvalidParameter("pulse currents must be finite".into()));
        }
        Ok(())
    }

    pub fn with_currents(self, i_clock: f64, i_write: f64) -> Self {
        Self {
            i_clock,
            i_write,
            ..self
        }
    }

    pub fn total_duration(&self) -> f64 {
        self.t_clock + self.gap + self.t_write + self.relax
    }
}

/// Binary neuron output: AP is logic 1, P is logic 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NeuronState {
    #[serde(rename = "P")]
    Parallel,
    #[serde(rename = "AP")]
    AntiParallel,
}

impl NeuronState {
    /// The pinned layer points along +ẑ, so m_z < 0 is antiparallel.
    pub fn from_mz(mz: f64) -> Self {
        if mz < 0.0 {
            NeuronState::AntiParallel
        } else {
            NeuronState::Parallel
        }
    }

    /// State a write current of this sign commands; `None` for zero.
    pub fn commanded_by(i_write: f64) -> Option<Self> {
        if i_write > 0.0 {
            Some(NeuronState::AntiParallel)
        } else if i_write < 0.0 {
            Some(NeuronState::Parallel)
        } else {
            None
        }
    }

    pub fn fired(self) -> bool {
        self == NeuronState::AntiParallel
    }
}

/// Starting magnetization for a two-step run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialState {
    /// ±ẑ with equal probability, tilted by the small-angle thermal
    /// distribution of the well (exact pole at T = 0).
    RandomPole,
    Fixed(Magnetization),
}

impl InitialState {
    pub fn draw<R: Rng + ?Sized>(&self, device: &Device, rng: &mut R) -> Magnetization {
        match *self {
            InitialState::Fixed(m) => m,
            InitialState::RandomPole => {
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                let (tx, ty) = match device.thermal_stability() {
                    Some(delta) if delta > 0.0 => {
                        // E ≈ Δ θ² near a pole: each in-plane component has variance 1/(2Δ)
                        let s = (0.5 / delta).sqrt();
                        let gx: f64 = rng.sample(StandardNormal);
                        let gy: f64 = rng.sample(StandardNormal);
                        (s * gx, s * gy)
                    }
                    _ => (0.0, 0.0),
                };
                Magnetization::new(Vec3::new(tx, ty, sign)).expect("finite tilt")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoStepOutcome {
    pub initial: Magnetization,
    /// Magnetization at the end of the clock pulse.
    pub after_clock: Magnetization,
    pub final_m: Magnetization,
    pub state: NeuronState,
    pub trajectory: Option<Trajectory>,
}

impl TwoStepOutcome {
    /// |m_y| > 0.9 when the clock pulse ended.
    pub fn hard_axis_captured(&self) -> bool {
        self.after_clock.vec().y.abs() > 0.9
    }
}

/// Clock, optional gap, write, then relaxation. `record_stride` turns on
/// trajectory sampling every that many steps.
pub fn simulate_two_step<R: Rng + ?Sized>(
    schedule: &PulseSchedule,
    device: &Device,
    initial: InitialState,
    rng: &mut R,
    record_stride: Option<u64>,
) -> Result<TwoStepOutcome> {
    schedule.validate()?;
    let model = &device.model;
    let m0 = initial.draw(device, rng);
    let mut state = SpinState::new(m0);
    let mut trajectory = record_stride.map(Trajectory::with_stride);
    if let Some(tr) = trajectory.as_mut() {
        crate::magnet::MacrospinModel::record(&state, tr);
    }

    let clock = she_spin_current(schedule.i_clock, &device.params.heavy_metal, &device.params.free_layer);
    model.integrate(&mut state, schedule.t_clock, &clock, rng, trajectory.as_mut())?;
    let after_clock = state.magnetization();

    if schedule.gap > 0.0 {
        model.integrate(&mut state, schedule.gap, &SpinCurrent::NONE, rng, trajectory.as_mut())?;
    }
    let write = mtj_spin_current(schedule.i_write, &device.params.mtj);
    model.integrate(&mut state, schedule.t_write, &write, rng, trajectory.as_mut())?;
    if schedule.relax > 0.0 {
        model.integrate(&mut state, schedule.relax, &SpinCurrent::NONE, rng, trajectory.as_mut())?;
    }

    let final_m = state.magnetization();
    Ok(TwoStepOutcome {
        initial: m0,
        after_clock,
        final_m,
        state: NeuronState::from_mz(final_m.vec().z),
        trajectory,
    })
}

/// [`simulate_two_step`] for `L` trials in lockstep, one schedule and RNG
/// stream each. The schedules may differ in their currents but not in their
/// timing. Outcomes are bit-identical to running the trials one at a time;
/// no trajectory is recorded.
pub fn simulate_two_step_lanes<R: Rng, const L: usize>(
    schedules: &[PulseSchedule; L],
    device: &Device,
    initial: InitialState,
    rngs: &mut [R; L],
) -> Result<[TwoStepOutcome; L]> {
    let Some(first) = schedules.first() else {
        return Ok(std::array::from_fn(|_| unreachable!()));
    };
    for s in schedules {
        s.validate()?;
        if (s.t_clock, s.gap, s.t_write, s.relax) != (first.t_clock, first.gap, first.t_write, first.relax) {
            return Err(Error::InvalidParameter("lockstep schedules must share their timing".into()));
        }
    }
    let model = &device.model;
    let m0: [Magnetization; L] = std::array::from_fn(|l| initial.draw(device, &mut rngs[l]));
    let mut states = m0.map(SpinState::new);
    let p = &device.params;

    let clock = schedules.map(|s| she_spin_current(s.i_clock, &p.heavy_metal, &p.free_layer));
    model.integrate_lanes(&mut states, first.t_clock, &clock, rngs)?;
    let after_clock = states.map(|s| s.magnetization());
    if first.gap > 0.0 {
        model.integrate_lanes(&mut states, first.gap, &[SpinCurrent::NONE; L], rngs)?;
    }
    let write = schedules.map(|s| mtj_spin_current(s.i_write, &p.mtj));
    model.integrate_lanes(&mut states, first.t_write, &write, rngs)?;
    if first.relax > 0.0 {
        model.integrate_lanes(&mut states, first.relax, &[SpinCurrent::NONE; L], rngs)?;
    }

    Ok(std::array::from_fn(|l| {
        let final_m = states[l].magnetization();
        TwoStepOutcome {
            initial: m0[l],
            after_clock: after_clock[l],
            final_m,
            state: NeuronState::from_mz(final_m.vec().z),
            trajectory: None,
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::params::DeviceParams;
    use crate::magnet::IntegratorConfig;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cold_device() -> Device {
        let mut p = DeviceParams::default();
        p.material.temperature = 0.0;
        Device::new(p, IntegratorConfig::default()).unwrap()
    }

    #[test]
    fn positive_write_gives_antiparallel_at_zero_temperature() {
        let dev = cold_device();
        for start in [Magnetization::UP, Magnetization::DOWN] {
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            let s = PulseSchedule::default().with_currents(85e-6, 5e-6);
            let out = simulate_two_step(&s, &dev, InitialState::Fixed(start), &mut rng, None).unwrap();
            assert!(out.hard_axis_captured());
            assert_eq!(out.state, NeuronState::AntiParallel);
            let s = s.with_currents(85e-6, -5e-6);
            let out = simulate_two_step(&s, &dev, InitialState::Fixed(start), &mut rng, None).unwrap();
            assert_eq!(out.state, NeuronState::Parallel);
        }
    }

    #[test]
    fn trajectory_covers_all_phases() {
        let dev = cold_device();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = PulseSchedule::default().with_currents(85e-6, 5e-6);
        let out = simulate_two_step(&s, &dev, InitialState::Fixed(Magnetization::UP), &mut rng, Some(1000)).unwrap();
        let tr = out.trajectory.unwrap();
        // 6 ns at 0.1 ps with stride 1000, plus the initial sample
        assert_eq!(tr.samples.len(), 61);
        assert_eq!(tr.samples[0].m, Vec3::Z);
        assert!((tr.samples.last().unwrap().t - 6e-9).abs() < 1e-15);
    }

    #[test]
    fn paired_seed_sign_flip_flips_state() {
        let dev = Device::reference();
        let mut flipped = 0;
        for seed in 0..20 {
            let s = PulseSchedule::default().with_currents(85e-6, 60e-6);
            let a = simulate_two_step(&s, &dev, InitialState::RandomPole, &mut ChaCha8Rng::seed_from_u64(seed), None).unwrap();
            let s = s.with_currents(85e-6, -60e-6);
            let b = simulate_two_step(&s, &dev, InitialState::RandomPole, &mut ChaCha8Rng::seed_from_u64(seed), None).unwrap();
            assert_eq!(a.after_clock, b.after_clock);
            if a.state != b.state {
                flipped += 1;
            }
        }
        assert_eq!(flipped, 20);
    }

    #[test]
    fn lanes_match_single_trials() {
        let dev = Device::reference();
        let s = PulseSchedule {
            gap: 0.2e-9,
            relax: 0.5e-9,
            ..PulseSchedule::default().with_currents(85e-6, 3e-6)
        };
        let schedules: [PulseSchedule; 4] = std::array::from_fn(|l| s.with_currents(85e-6, (l as f64 - 1.5) * 2e-6));
        let mut rngs: [ChaCha8Rng; 4] = std::array::from_fn(|l| ChaCha8Rng::seed_from_u64(100 + l as u64));
        let lanes = simulate_two_step_lanes(&schedules, &dev, InitialState::RandomPole, &mut rngs).unwrap();
        for (l, got) in lanes.iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + l as u64);
            let want = simulate_two_step(&schedules[l], &dev, InitialState::RandomPole, &mut rng, None).unwrap();
            assert_eq!(*got, want);
        }
    }

    #[test]
    fn lanes_need_shared_timing() {
        let dev = cold_device();
        let a = PulseSchedule::default();
        let b = PulseSchedule { relax: 1e-9, ..a };
        let mut rngs: [ChaCha8Rng; 2] = std::array::from_fn(|l| ChaCha8Rng::seed_from_u64(l as u64));
        assert!(simulate_two_step_lanes(&[a, b], &dev, InitialState::RandomPole, &mut rngs).is_err());
    }

    #[test]
    fn invalid_schedule_is_rejected() {
        let dev = cold_device();
        let s = PulseSchedule {
            t_write: 0.0,
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(simulate_two_step(&s, &dev, InitialState::RandomPole, &mut rng, None).is_err());
    }
}
