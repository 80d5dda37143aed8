//! Mapping signed weights onto pairs of programmable conductances.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::network::{DenseLayer, FloatNetwork};
use crate::error::{Error, Result};

pub const CONDUCTANCE_SCHEMA: &str = "sotneuron.conductances/1";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CrossbarParams {
    /// Supply magnitude: active inputs drive their row pair to ±vs [V].
    pub vs: f64,
    pub g_min: f64,
    pub g_max: f64,
    pub levels: u32,
    /// Unprogrammed (off) cell conductance [S].
    pub g_off: f64,
    /// Neuron sense-path conductance [S].
    pub gs: f64,
    /// On resistance of each input switch [Ω].
    pub r_switch: f64,
}

impl Default for CrossbarParams {
    fn default() -> Self {
        let g_max = 1.0 / 8e3;
        Self {
            vs: 1.0,
            g_min: 1.0 / 160e3,
            g_max,
            levels: 32,
            g_off: g_max / 1e6,
            gs: 1.0 / 10e3,
            r_switch: 0.0,
        }
    }
}

impl CrossbarParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.g_min > 0.0 && self.g_min < self.g_max && self.g_max.is_finite()) {
            return Err(Error::InvalidParameter("need 0 < g_min < g_max".into()));
        }
        if self.levels < 2 || self.levels > i16::MAX as u32 {
            return Err(Error::InvalidParameter("levels must be in 2..32767".into()));
        }
        if !(self.g_off >= 0.0 && self.g_off < self.g_min) {
            return Err(Error::InvalidParameter("need 0 <= g_off < g_min".into()));
        }
        if !(self.gs > 0.0 && self.gs.is_finite() && self.vs.is_finite() && self.r_switch >= 0.0) {
            return Err(Error::InvalidParameter("gs must be > 0, vs finite, r_switch >= 0".into()));
        }
        Ok(())
    }

    /// Spacing of the programmable levels [S].
    pub fn level_step(&self) -> f64 {
        (self.g_max - self.g_min) / (self.levels - 1) as f64
    }

    pub fn level(&self, k: u32) -> f64 {
        if k + 1 == self.levels {
            self.g_max
        } else {
            self.g_min + k as f64 * self.level_step()
        }
    }

    /// Signed level code for target conductance `g` (sign from the weight):
    /// 0 means both cells off, ±(k+1) means level k on the plus/minus cell.
    /// Targets below half of g_min are left off.
    pub fn code_for(&self, g: f64) -> i16 {
        let mag = g.abs();
        if mag < 0.5 * self.g_min {
            return 0;
        }
        let k = ((mag - self.g_min) / self.level_step()).round().clamp(0.0, (self.levels - 1) as f64) as i16;
        if g > 0.0 {
            k + 1
        } else {
            -(k + 1)
        }
    }

    /// (G⁺, G⁻) for a level code.
    pub fn cells(&self, code: i16) -> (f64, f64) {
        match code {
            0 => (self.g_off, self.g_off),
            c if c > 0 => (self.level(c as u32 - 1), self.g_off),
            c => (self.g_off, self.level((-c) as u32 - 1)),
        }
    }
}

/// One crossbar. Rows are inputs (bias row last), columns are neurons;
/// matrices are row-major `rows × cols`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConductanceLayer {
    pub rows: usize,
    pub cols: usize,
    /// Conductance per unit weight [S].
    pub scale: f64,
    pub codes: Vec<i16>,
    pub g_plus: Vec<f64>,
    pub g_minus: Vec<f64>,
}

impl ConductanceLayer {
    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.cols + col
    }

    /// Weight the cell pair realizes, (G⁺ − G⁻)/scale.
    pub fn effective_weight(&self, row: usize, col: usize) -> f64 {
        let k = self.index(row, col);
        (self.g_plus[k] - self.g_minus[k]) / self.scale
    }

    fn validate(&self, p: &CrossbarParams) -> Result<()> {
        let n = self.rows * self.cols;
        if self.codes.len() != n || self.g_plus.len() != n || self.g_minus.len() != n {
            return Err(Error::Format(format!("crossbar {}x{} has mismatched arrays", self.rows, self.cols)));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::Format("crossbar scale must be positive".into()));
        }
        for k in 0..n {
            if self.codes[k].unsigned_abs() as u32 > p.levels {
                return Err(Error::Format(format!("level code {} out of range", self.codes[k])));
            }
            if (self.g_plus[k], self.g_minus[k]) != p.cells(self.codes[k]) {
                return Err(Error::Format(format!("cell {k} disagrees with its level code")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConductanceNetwork {
    pub schema: String,
    pub params: CrossbarParams,
    pub hidden: ConductanceLayer,
    pub output: ConductanceLayer,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<serde_json::Value>,
}

impl ConductanceNetwork {
    pub fn validate(&self) -> Result<()> {
        if self.schema != CONDUCTANCE_SCHEMA {
            return Err(Error::Format(format!("conductance schema {:?}, expected {CONDUCTANCE_SCHEMA:?}", self.schema)));
        }
        self.params.validate()?;
        self.hidden.validate(&self.params)?;
        self.output.validate(&self.params)?;
        if self.output.rows != self.hidden.cols + 1 {
            return Err(Error::Format("output crossbar rows must be hidden columns + 1".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let net: Self = serde_json::from_str(text)?;
        net.validate()?;
        Ok(net)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Quantizes one layer (bias as the last row). The largest |w| maps to g_max.
pub fn quantize_layer(layer: &DenseLayer, p: &CrossbarParams) -> Result<ConductanceLayer> {
    layer.validate()?;
    p.validate()?;
    let (rows, cols) = (layer.inputs + 1, layer.outputs);
    let wmax = (0..rows)
        .flat_map(|i| (0..cols).map(move |o| (i, o)))
        .map(|(i, o)| layer.weight(i, o).abs())
        .fold(0.0, f64::max);
    if wmax == 0.0 {
        return Err(Error::DegenerateScale("all weights are zero".into()));
    }
    let scale = p.g_max / wmax;
    let mut codes = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for o in 0..cols {
            codes.push(p.code_for(scale * layer.weight(i, o)));
        }
    }
    let (g_plus, g_minus) = codes.iter().map(|&c| p.cells(c)).unzip();
    Ok(ConductanceLayer {
        rows,
        cols,
        scale,
        codes,
        g_plus,
        g_minus,
    })
}

pub fn quantize_weights(net: &FloatNetwork, p: &CrossbarParams) -> Result<ConductanceNetwork> {
    net.validate()?;
    Ok(ConductanceNetwork {
        schema: CONDUCTANCE_SCHEMA.into(),
        params: *p,
        hidden: quantize_layer(&net.hidden, p)?,
        output: quantize_layer(&net.output, p)?,
        provenance: None,
    })
}
