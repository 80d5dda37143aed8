use serde::{Deserialize, Serialize};

use super::params::HeavyMetalParams;
use super::protocol::PulseSchedule;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClockPower {
    /// I_clock² R_HM [W].
    pub power: f64,
    /// Energy per clock event, power × t_clock [J].
    pub energy: f64,
}

pub fn clock_power(schedule: &PulseSchedule, hm: &HeavyMetalParams) -> Result<ClockPower> {
    schedule.validate()?;
    let power = schedule.i_clock * schedule.i_clock * hm.resistance()?;
    Ok(ClockPower {
        power,
        energy: power * schedule.t_clock,
    })
}
