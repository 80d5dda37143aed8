//! Column currents of a bipolar crossbar driven by binary inputs.

use super::quantize::{ConductanceLayer, ConductanceNetwork, CrossbarParams};

/// Conductance of a cell in series with its input switch.
fn with_switch(g: f64, r_switch: f64) -> f64 {
    if r_switch == 0.0 {
        g
    } else {
        g / (1.0 + g * r_switch)
    }
}

/// Voltage of the column node and the current into the neuron. Active rows
/// (x = 1) sit at ±vs, inactive rows at 0 V; every cell loads the node.
fn column(layer: &ConductanceLayer, col: usize, x: &[u8], p: &CrossbarParams) -> (f64, f64) {
    debug_assert_eq!(x.len(), layer.rows);
    let (mut num, mut den) = (0.0, 0.0);
    for (i, &xi) in x.iter().enumerate() {
        let k = layer.index(i, col);
        let gp = with_switch(layer.g_plus[k], p.r_switch);
        let gm = with_switch(layer.g_minus[k], p.r_switch);
        if xi != 0 {
            num += (gp - gm) * p.vs;
        }
        den += gp + gm;
    }
    let v = num / (p.gs + den);
    (v, p.gs * v)
}

/// Current into the neuron on column `col` for binary row inputs `x`
/// (including the always-on bias row).
pub fn synaptic_current(layer: &ConductanceLayer, col: usize, x: &[u8], p: &CrossbarParams) -> f64 {
    column(layer, col, x, p).1
}

pub fn layer_currents(layer: &ConductanceLayer, x: &[u8], p: &CrossbarParams) -> Vec<f64> {
    (0..layer.cols).map(|j| synaptic_current(layer, j, x, p)).collect()
}

/// Power drawn from the supplies by one crossbar [W]: every cell and the
/// sense path dissipate G·ΔV².
pub fn layer_static_power(layer: &ConductanceLayer, x: &[u8], p: &CrossbarParams) -> f64 {
    let mut total = 0.0;
    for j in 0..layer.cols {
        let (v, _) = column(layer, j, x, p);
        total += p.gs * v * v;
        for (i, &xi) in x.iter().enumerate() {
            let k = layer.index(i, j);
            let vi = if xi != 0 { p.vs } else { 0.0 };
            total += with_switch(layer.g_plus[k], p.r_switch) * (vi - v).powi(2);
            total += with_switch(layer.g_minus[k], p.r_switch) * (-vi - v).powi(2);
        }
    }
    total
}

/// Static crossbar power for one image, with hidden outputs taken from the
/// deterministic forward pass.
pub fn network_static_power(net: &ConductanceNetwork, image_with_bias: &[u8]) -> f64 {
    let p = &net.params;
    let mut h: Vec<u8> = layer_currents(&net.hidden, image_with_bias, p)
        .iter()
        .map(|&i| (i > 0.0) as u8)
        .collect();
    h.push(1);
    layer_static_power(&net.hidden, image_with_bias, p) + layer_static_power(&net.output, &h, p)
}
