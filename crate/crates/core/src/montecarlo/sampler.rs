use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::device::{simulate_two_step, simulate_two_step_lanes, Device, InitialState, NeuronState, PulseSchedule};
use crate::error::{Error, Result};

/// Trials per parallel work item.
pub const BLOCK: u64 = 256;

/// RNG for one trial. The master seed keys the generator and (point, trial)
/// selects an independent ChaCha stream, so a trial's randomness never
/// depends on which thread runs it or in what order.
pub fn trial_rng(master_seed: u64, point_index: u32, trial: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(((point_index as u64) << 32) | trial as u64);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialOutcome {
    /// The trial ended in the state its command asked for.
    pub success: bool,
    pub antiparallel: bool,
    pub captured: bool,
}

/// Integer counts, so summing blocks in any order gives the same answer.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub n: u64,
    pub successes: u64,
    pub antiparallel: u64,
    pub captured: u64,
}

impl Tally {
    fn add(&mut self, o: TrialOutcome) {
        self.n += 1;
        self.successes += o.success as u64;
        self.antiparallel += o.antiparallel as u64;
        self.captured += o.captured as u64;
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.n += other.n;
        self.successes += other.successes;
        self.antiparallel += other.antiparallel;
        self.captured += other.captured;
        self
    }
}

/// Something that can run one random trial.
pub trait TrialSampler: Sync {
    fn trial(&self, rng: &mut ChaCha8Rng) -> Result<TrialOutcome>;

    /// Four trials at once. Must agree exactly with four calls to `trial`.
    fn trial4(&self, rngs: &mut [ChaCha8Rng; 4]) -> Result<[TrialOutcome; 4]> {
        let [a, b, c, d] = rngs;
        Ok([self.trial(a)?, self.trial(b)?, self.trial(c)?, self.trial(d)?])
    }
}

/// Two-step protocol from a random pole. Success means reaching the state the
/// write current commands; a zero write counts AP as success.
pub struct TwoStepSampler<'a> {
    pub device: &'a Device,
    pub schedule: PulseSchedule,
}

impl TwoStepSampler<'_> {
    fn judge(&self, state: NeuronState, captured: bool) -> TrialOutcome {
        let target = NeuronState::commanded_by(self.schedule.i_write).unwrap_or(NeuronState::AntiParallel);
        TrialOutcome {
            success: state == target,
            antiparallel: state.fired(),
            captured,
        }
    }
}

impl TrialSampler for TwoStepSampler<'_> {
    fn trial(&self, rng: &mut ChaCha8Rng) -> Result<TrialOutcome> {
        let out = simulate_two_step(&self.schedule, self.device, InitialState::RandomPole, rng, None)?;
        Ok(self.judge(out.state, out.hard_axis_captured()))
    }

    fn trial4(&self, rngs: &mut [ChaCha8Rng; 4]) -> Result<[TrialOutcome; 4]> {
        let out = simulate_two_step_lanes(&[self.schedule; 4], self.device, InitialState::RandomPole, rngs)?;
        Ok(out.map(|o| self.judge(o.state, o.hard_axis_captured())))
    }
}

/// Trials `[start, end)` of one point.
pub(crate) fn run_block<S: TrialSampler + ?Sized>(
    sampler: &S,
    master_seed: u64,
    point_index: u32,
    start: u64,
    end: u64,
) -> Result<Tally> {
    let mut tally = Tally::default();
    let mut k = start;
    while k + 4 <= end {
        let mut rngs: [ChaCha8Rng; 4] = std::array::from_fn(|l| trial_rng(master_seed, point_index, (k + l as u64) as u32));
        for o in sampler.trial4(&mut rngs)? {
            tally.add(o);
        }
        k += 4;
    }
    for k in k..end {
        tally.add(sampler.trial(&mut trial_rng(master_seed, point_index, k as u32))?);
    }
    Ok(tally)
}

pub(crate) fn check_trials(n: u64) -> Result<()> {
    if n == 0 || n > u32::MAX as u64 {
        return Err(Error::InvalidParameter(format!("trial count {n} out of range")));
    }
    Ok(())
}

/// Runs `n` trials of `sampler` as point `point_index`, in parallel on the
/// current rayon pool.
pub fn estimate<S: TrialSampler + ?Sized>(sampler: &S, n: u64, master_seed: u64, point_index: u32) -> Result<Tally> {
    check_trials(n)?;
    let blocks = n.div_ceil(BLOCK);
    (0..blocks)
        .into_par_iter()
        .map(|b| run_block(sampler, master_seed, point_index, b * BLOCK, ((b + 1) * BLOCK).min(n)))
        .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))
}

/// Switching estimate at one (clock, write) point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointEstimate {
    pub i_clock: f64,
    pub i_write: f64,
    pub n: u64,
    /// Fraction of trials ending in the commanded state (AP for zero write).
    pub p_hat: f64,
    /// Normal-approximation 95% half-width.
    pub ci95: f64,
    /// Fraction ending antiparallel, whatever the command.
    pub p_ap: f64,
    /// Fraction with |m_y| > 0.9 when the clock ended.
    pub p_captured: f64,
}

impl PointEstimate {
    pub fn from_tally(i_clock: f64, i_write: f64, t: Tally) -> Self {
        let n = t.n as f64;
        let p = t.successes as f64 / n;
        Self {
            i_clock,
            i_write,
            n: t.n,
            p_hat: p,
            ci95: 1.96 * (p * (1.0 - p) / n).sqrt(),
            p_ap: t.antiparallel as f64 / n,
            p_captured: t.captured as f64 / n,
        }
    }
}

/// `n` two-step trials at `schedule`'s currents. Identical to point 0 of a
/// sweep with the same master seed.
pub fn switching_probability(device: &Device, schedule: &PulseSchedule, n: u64, master_seed: u64) -> Result<PointEstimate> {
    schedule.validate()?;
    let sampler = TwoStepSampler {
        device,
        schedule: *schedule,
    };
    let t = estimate(&sampler, n, master_seed, 0)?;
    Ok(PointEstimate::from_tally(schedule.i_clock, schedule.i_write, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    struct Coin(f64);

    impl TrialSampler for Coin {
        fn trial(&self, rng: &mut ChaCha8Rng) -> Result<TrialOutcome> {
            let s = rng.random::<f64>() < self.0;
            Ok(TrialOutcome {
                success: s,
                antiparallel: s,
                captured: true,
            })
        }
    }

    #[test]
    fn streams_differ_by_point_and_trial() {
        let a: u64 = trial_rng(1, 0, 0).random();
        let b: u64 = trial_rng(1, 0, 1).random();
        let c: u64 = trial_rng(1, 1, 0).random();
        let d: u64 = trial_rng(2, 0, 0).random();
        assert!(a != b && a != c && b != c && a != d);
        assert_eq!(a, trial_rng(1, 0, 0).random::<u64>());
    }

    #[test]
    fn block_split_does_not_change_tally() {
        let coin = Coin(0.3);
        let whole = run_block(&coin, 5, 2, 0, 1001).unwrap();
        let parts = [(0, 3), (3, 500), (500, 1001)]
            .iter()
            .map(|&(a, b)| run_block(&coin, 5, 2, a, b).unwrap())
            .fold(Tally::default(), Tally::merge);
        assert_eq!(whole, parts);
        assert_eq!(estimate(&coin, 1001, 5, 2).unwrap(), whole);
    }

    #[test]
    fn zero_trials_rejected() {
        assert!(estimate(&Coin(0.5), 0, 0, 0).is_err());
    }

    #[test]
    fn ci_matches_normal_approximation() {
        let t = Tally {
            n: 400,
            successes: 100,
            antiparallel: 100,
            captured: 400,
        };
        let e = PointEstimate::from_tally(0.0, 1.0, t);
        assert_eq!(e.p_hat, 0.25);
        assert!((e.ci95 - 1.96 * (0.25f64 * 0.75 / 400.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn cold_device_switches_every_time() {
        let mut p = crate::device::DeviceParams::default();
        p.material.temperature = 0.0;
        let dev = Device::new(p, crate::magnet::IntegratorConfig::default()).unwrap();
        let s = PulseSchedule::default().with_currents(85e-6, 5e-6);
        let e = switching_probability(&dev, &s, 6, 1).unwrap();
        assert_eq!(e.p_hat, 1.0);
        assert_eq!(e.ci95, 0.0);
    }
}
