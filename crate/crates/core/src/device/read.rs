use serde::{Deserialize, Serialize};

use super::params::MtjParams;
use super::protocol::NeuronState;

/// Output of the read stage feeding the next layer's input switches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReadOut {
    /// Voltage across the neuron MTJ, V_DD·R_n/(R_n + R_ref) [V].
    pub v_mid: f64,
    pub logic: bool,
    /// Inverter output [V].
    pub v_out: f64,
}

/// Resistive divider between the neuron MTJ and a reference MTJ held in the
/// AP state, followed by an ideal inverter with threshold V_DD/2.
///
/// The neuron MTJ sits on the supply side, so the inverter input is
/// V_DD − v_mid. Inverter input ≤ V_DD/2 (ties included) gives V_DD.
pub fn read_voltage(state: NeuronState, mtj: &MtjParams, v_dd: f64) -> ReadOut {
    let r_ref = mtj.r_antiparallel();
    let r_n = match state {
        NeuronState::Parallel => mtj.r_parallel,
        NeuronState::AntiParallel => mtj.r_antiparallel(),
    };
    let v_mid = v_dd * r_n / (r_n + r_ref);
    let v_in = v_dd * r_ref / (r_n + r_ref);
    let logic = v_in <= 0.5 * v_dd;
    ReadOut {
        v_mid,
        logic,
        v_out: if logic { v_dd } else { 0.0 },
    }
}
