use std::sync::atomic::{AtomicBool, Ordering};

use super::diagram::PhaseDiagram;
use crate::error::{Error, Result};

/// P(AP) against write current at one clock level, linear between nodes.
#[derive(Debug)]
pub struct ProbabilityCurve {
    /// Ascending write currents [A].
    pub write: Vec<f64>,
    pub p_ap: Vec<f64>,
    warned: AtomicBool,
}

impl Clone for ProbabilityCurve {
    fn clone(&self) -> Self {
        Self::new(self.write.clone(), self.p_ap.clone()).expect("already validated")
    }
}

impl ProbabilityCurve {
    pub fn new(write: Vec<f64>, p_ap: Vec<f64>) -> Result<Self> {
        if write.is_empty() || write.len() != p_ap.len() {
            return Err(Error::InvalidParameter("curve needs matching, non-empty nodes".into()));
        }
        if !write.windows(2).all(|w| w[0] < w[1]) || !p_ap.iter().all(|p| (0.0..=1.0).contains(p)) {
            return Err(Error::InvalidParameter("curve nodes must ascend and hold probabilities".into()));
        }
        Ok(Self {
            write,
            p_ap,
            warned: AtomicBool::new(false),
        })
    }

    /// Row of `diagram` at `i_clock` (matched to 1e-9 relative). Failed points
    /// are an error.
    pub fn from_diagram(diagram: &PhaseDiagram, i_clock: f64) -> Result<Self> {
        let row = diagram
            .clock_levels
            .iter()
            .position(|&c| (c - i_clock).abs() <= 1e-9 * i_clock.abs().max(1e-30))
            .ok_or_else(|| Error::InvalidParameter(format!("clock level {i_clock:e} A not in diagram")))?;
        let mut nodes = Vec::with_capacity(diagram.write_levels.len());
        for p in &diagram.points[row] {
            let e = p
                .estimate()
                .ok_or_else(|| Error::InvalidParameter(format!("point at {:e} A failed", p.currents().1)))?;
            nodes.push((e.i_write, e.p_ap));
        }
        nodes.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (write, p_ap) = nodes.into_iter().unzip();
        Self::new(write, p_ap)
    }

    /// Interpolated P(AP). Queries past either end use the end value and log
    /// one warning per curve.
    pub fn at(&self, i_write: f64) -> f64 {
        let (lo, hi) = (self.write[0], *self.write.last().unwrap());
        if !(lo..=hi).contains(&i_write) {
            if !self.warned.swap(true, Ordering::Relaxed) {
                log::warn!("write current {i_write:e} A outside lookup range [{lo:e}, {hi:e}] A; clamping");
            }
            return if i_write < lo { self.p_ap[0] } else { *self.p_ap.last().unwrap() };
        }
        let k = self.write.partition_point(|&w| w <= i_write);
        if k == self.write.len() {
            return *self.p_ap.last().unwrap();
        }
        let (w0, w1) = (self.write[k - 1], self.write[k]);
        let f = (i_write - w0) / (w1 - w0);
        (self.p_ap[k - 1] + f * (self.p_ap[k] - self.p_ap[k - 1])).clamp(0.0, 1.0)
    }
}

/// P(AP) at `i_write` on the `i_clock` row of `diagram`.
pub fn probability_lookup(diagram: &PhaseDiagram, i_clock: f64, i_write: f64) -> Result<f64> {
    Ok(ProbabilityCurve::from_diagram(diagram, i_clock)?.at(i_write))
}
