use std::io::Write;
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sampler::{check_trials, run_block, PointEstimate, Tally, TwoStepSampler, BLOCK};
use crate::device::{Device, PulseSchedule};
use crate::error::{Error, Result};

/// Clock and write levels to sweep, with the trial budget and master seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    pub clock_levels: Vec<f64>,
    pub write_levels: Vec<f64>,
    pub trials_per_point: u64,
    pub master_seed: u64,
}

fn strictly_monotone(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
        && (v.windows(2).all(|w| w[0] < w[1]) || v.windows(2).all(|w| w[0] > w[1]))
}

impl SweepGrid {
    /// `n` evenly spaced levels from `lo` to `hi` inclusive.
    pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        match n {
            0 => vec![],
            1 => vec![lo],
            _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.clock_levels.is_empty() || self.write_levels.is_empty() {
            return Err(Error::InvalidParameter("sweep levels must be non-empty".into()));
        }
        if !strictly_monotone(&self.clock_levels) || !strictly_monotone(&self.write_levels) {
            return Err(Error::InvalidParameter("sweep levels must be finite and strictly monotone".into()));
        }
        if self.clock_levels.len() * self.write_levels.len() > u32::MAX as usize {
            return Err(Error::InvalidParameter("too many grid points".into()));
        }
        check_trials(self.trials_per_point)
    }

    pub fn point_count(&self) -> usize {
        self.clock_levels.len() * self.write_levels.len()
    }

    /// Row-major index: clock level outer, write level inner.
    pub fn point_index(&self, clock: usize, write: usize) -> u32 {
        (clock * self.write_levels.len() + write) as u32
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointOutcome {
    Ok(PointEstimate),
    Failed { i_clock: f64, i_write: f64, error: String },
}

impl PointOutcome {
    pub fn estimate(&self) -> Option<&PointEstimate> {
        match self {
            PointOutcome::Ok(e) => Some(e),
            PointOutcome::Failed { .. } => None,
        }
    }

    pub fn currents(&self) -> (f64, f64) {
        match *self {
            PointOutcome::Ok(e) => (e.i_clock, e.i_write),
            PointOutcome::Failed { i_clock, i_write, .. } => (i_clock, i_write),
        }
    }
}

/// Switching estimates over a sweep grid; `points[c][w]` belongs to
/// `clock_levels[c]` and `write_levels[w]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseDiagram {
    pub clock_levels: Vec<f64>,
    pub write_levels: Vec<f64>,
    pub trials_per_point: u64,
    pub master_seed: u64,
    pub points: Vec<Vec<PointOutcome>>,
}

impl PhaseDiagram {
    pub fn failures(&self) -> impl Iterator<Item = &PointOutcome> {
        self.points.iter().flatten().filter(|p| p.estimate().is_none())
    }

    /// Long-form CSV, one row per point. Failed points carry n = 0 and NaN.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "i_clock_a,i_write_a,n,p_hat,ci95")?;
        for p in self.points.iter().flatten() {
            match p {
                PointOutcome::Ok(e) => writeln!(out, "{},{},{},{},{}", e.i_clock, e.i_write, e.n, e.p_hat, e.ci95)?,
                PointOutcome::Failed { i_clock, i_write, .. } => writeln!(out, "{i_clock},{i_write},0,NaN,NaN")?,
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// [`phase_diagram_with_progress`] without progress reports.
pub fn phase_diagram(grid: &SweepGrid, device: &Device, template: &PulseSchedule) -> Result<PhaseDiagram> {
    phase_diagram_with_progress(grid, device, template, &|_, _| {})
}

/// Runs every grid point on the current rayon pool. `template` supplies the
/// pulse widths; its currents are replaced by the grid levels. `progress` is
/// called with (trials finished, trials total) after each block. A point
/// whose trials fail is recorded as failed and the sweep carries on.
pub fn phase_diagram_with_progress(
    grid: &SweepGrid,
    device: &Device,
    template: &PulseSchedule,
    progress: &(dyn Fn(u64, u64) + Sync),
) -> Result<PhaseDiagram> {
    grid.validate()?;
    template.validate()?;
    let n = grid.trials_per_point;
    let blocks_per_point = n.div_ceil(BLOCK);
    let nw = grid.write_levels.len();
    let samplers: Vec<TwoStepSampler> = (0..grid.point_count())
        .map(|p| TwoStepSampler {
            device,
            schedule: template.with_currents(grid.clock_levels[p / nw], grid.write_levels[p % nw]),
        })
        .collect();

    let total = n * grid.point_count() as u64;
    let done = AtomicU64::new(0);
    let blocks: Vec<Result<Tally>> = (0..grid.point_count() as u64 * blocks_per_point)
        .into_par_iter()
        .map(|j| {
            let p = (j / blocks_per_point) as usize;
            let b = j % blocks_per_point;
            let (start, end) = (b * BLOCK, ((b + 1) * BLOCK).min(n));
            let r = run_block(&samplers[p], grid.master_seed, p as u32, start, end);
            let d = done.fetch_add(end - start, Ordering::Relaxed) + end - start;
            progress(d, total);
            r
        })
        .collect();

    let mut points = vec![Vec::with_capacity(nw); grid.clock_levels.len()];
    for (p, chunk) in blocks.chunks(blocks_per_point as usize).enumerate() {
        let (i_clock, i_write) = (grid.clock_levels[p / nw], grid.write_levels[p % nw]);
        let outcome = chunk
            .iter()
            .try_fold(Tally::default(), |acc, r| match r {
                Ok(t) => Ok(Tally {
                    n: acc.n + t.n,
                    successes: acc.successes + t.successes,
                    antiparallel: acc.antiparallel + t.antiparallel,
                    captured: acc.captured + t.captured,
                }),
                Err(e) => Err(e.to_string()),
            });
        points[p / nw].push(match outcome {
            Ok(t) => PointOutcome::Ok(PointEstimate::from_tally(i_clock, i_write, t)),
            Err(error) => {
                log::warn!("point ({i_clock:e} A, {i_write:e} A) failed: {error}");
                PointOutcome::Failed { i_clock, i_write, error }
            }
        });
    }
    Ok(PhaseDiagram {
        clock_levels: grid.clock_levels.clone(),
        write_levels: grid.write_levels.clone(),
        trials_per_point: n,
        master_seed: grid.master_seed,
        points,
    })
}
