//! The SOT neuron: heavy-metal clock path, MTJ write path, pulse protocol,
//! read circuit and clock power.

pub mod params;
pub mod power;
pub mod protocol;
pub mod read;
pub mod spin;

pub use params::{Device, DeviceParams, HeavyMetalParams, MtjParams};
pub use power::{clock_power, ClockPower};
pub use protocol::{simulate_two_step, simulate_two_step_lanes, InitialState, NeuronState, PulseSchedule, TwoStepOutcome};
pub use read::{read_voltage, ReadOut};
pub use spin::{mtj_spin_current, she_spin_current};
