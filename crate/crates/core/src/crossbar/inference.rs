//! Forward passes through the crossbars with SOT neurons, and accuracy
//! evaluation over a dataset.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::circuit::layer_currents;
use super::dataset::{Dataset, Image, CLASSES};
use super::quantize::{ConductanceLayer, ConductanceNetwork};
use crate::device::{simulate_two_step, simulate_two_step_lanes, Device, InitialState, PulseSchedule};
use crate::error::{Error, Result};
use crate::montecarlo::{trial_rng, ProbabilityCurve};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InferenceMode {
    /// Fires iff the synaptic current is positive.
    Deterministic,
    /// Fires with the switching probability looked up from a phase diagram.
    StochasticLookup,
    /// Runs the two-step protocol with the synaptic current as write current.
    StochasticFull,
}

/// How neurons turn synaptic currents into binary outputs.
#[derive(Debug, Clone, Copy)]
pub enum Neurons<'a> {
    Deterministic,
    Lookup(&'a ProbabilityCurve),
    /// `schedule` supplies the clock and timing; write currents come from the
    /// crossbar.
    Full { device: &'a Device, schedule: PulseSchedule },
}

impl Neurons<'_> {
    pub fn mode(&self) -> InferenceMode {
        match self {
            Neurons::Deterministic => InferenceMode::Deterministic,
            Neurons::Lookup(_) => InferenceMode::StochasticLookup,
            Neurons::Full { .. } => InferenceMode::StochasticFull,
        }
    }

    pub fn fire(&self, currents: &[f64], rng: &mut ChaCha8Rng) -> Result<Vec<bool>> {
        match *self {
            Neurons::Deterministic => Ok(currents.iter().map(|&i| i > 0.0).collect()),
            Neurons::Lookup(curve) => Ok(currents.iter().map(|&i| rng.random::<f64>() < curve.at(i)).collect()),
            Neurons::Full { device, schedule } => {
                // one stream per neuron so lanes can run side by side
                let mut rngs: Vec<ChaCha8Rng> = currents.iter().map(|_| ChaCha8Rng::from_rng(&mut *rng)).collect();
                let mut out = Vec::with_capacity(currents.len());
                let mut k = 0;
                while k + 4 <= currents.len() {
                    let sched: [PulseSchedule; 4] = std::array::from_fn(|l| schedule.with_currents(schedule.i_clock, currents[k + l]));
                    let lanes: &mut [ChaCha8Rng; 4] = (&mut rngs[k..k + 4]).try_into().expect("four lanes");
                    for o in simulate_two_step_lanes(&sched, device, InitialState::RandomPole, lanes)? {
                        out.push(o.state.fired());
                    }
                    k += 4;
                }
                for k in k..currents.len() {
                    let s = schedule.with_currents(schedule.i_clock, currents[k]);
                    out.push(simulate_two_step(&s, device, InitialState::RandomPole, &mut rngs[k], None)?.state.fired());
                }
                Ok(out)
            }
        }
    }
}

/// Synaptic currents and neuron outputs of one crossbar. `x` includes the
/// bias row.
pub fn layer_forward(
    x: &[u8],
    layer: &ConductanceLayer,
    net: &ConductanceNetwork,
    neurons: &Neurons,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<f64>, Vec<bool>)> {
    let currents = layer_currents(layer, x, &net.params);
    let fired = neurons.fire(&currents, rng)?;
    Ok((currents, fired))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Inference {
    pub class: usize,
    pub hidden: Vec<bool>,
    pub output: Vec<bool>,
    pub output_currents: Vec<f64>,
    /// No output neuron fired; the class came from the currents alone.
    pub no_fire: bool,
}

/// Picks the class from output firings: the one firing neuron; among several,
/// the largest |current|; with none, the largest current.
pub fn decide(fired: &[bool], currents: &[f64]) -> (usize, bool) {
    let pick = |keep: &dyn Fn(usize) -> bool, key: &dyn Fn(f64) -> f64| {
        (0..currents.len())
            .filter(|&k| keep(k))
            .fold(None, |best: Option<usize>, k| match best {
                Some(b) if key(currents[b]) >= key(currents[k]) => Some(b),
                _ => Some(k),
            })
    };
    match pick(&|k| fired[k], &f64::abs) {
        Some(c) => (c, false),
        None => (pick(&|_| true, &|i| i).unwrap_or(0), true),
    }
}

pub fn with_bias(bits: impl IntoIterator<Item = u8>) -> Vec<u8> {
    let mut v: Vec<u8> = bits.into_iter().collect();
    v.push(1);
    v
}

pub fn network_infer(image: &Image, net: &ConductanceNetwork, neurons: &Neurons, rng: &mut ChaCha8Rng) -> Result<Inference> {
    let (_, hidden) = layer_forward(&with_bias(image.iter().copied()), &net.hidden, net, neurons, rng)?;
    let h = with_bias(hidden.iter().map(|&b| b as u8));
    let (output_currents, output) = layer_forward(&h, &net.output, net, neurons, rng)?;
    let (class, no_fire) = decide(&output, &output_currents);
    Ok(Inference {
        class,
        hidden,
        output,
        output_currents,
        no_fire,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunRecord {
    pub image: usize,
    pub run: usize,
    pub label: u8,
    pub predicted: u8,
    pub no_fire: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassStats {
    pub label: u8,
    pub runs: u64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub mode: InferenceMode,
    pub images: usize,
    pub runs_per_image: usize,
    pub master_seed: u64,
    pub total_runs: u64,
    pub correct: u64,
    pub accuracy: f64,
    pub no_fire_rate: f64,
    pub per_class: Vec<ClassStats>,
    pub per_image_accuracy: Vec<f64>,
    /// `confusion[label][predicted]`.
    pub confusion: Vec<Vec<u64>>,
    #[serde(skip)]
    pub runs: Vec<RunRecord>,
}

impl AccuracyReport {
    fn from_runs(mode: InferenceMode, ds: &Dataset, runs_per_image: usize, master_seed: u64, runs: Vec<RunRecord>) -> Self {
        let mut confusion = vec![vec![0u64; CLASSES]; CLASSES];
        let mut per_image = vec![0u64; ds.len()];
        let mut no_fire = 0u64;
        for r in &runs {
            confusion[r.label as usize][r.predicted as usize] += 1;
            per_image[r.image] += (r.label == r.predicted) as u64;
            no_fire += r.no_fire as u64;
        }
        let total = runs.len() as u64;
        let correct: u64 = (0..CLASSES).map(|c| confusion[c][c]).sum();
        let per_class = (0..CLASSES)
            .map(|c| {
                let n: u64 = confusion[c].iter().sum();
                ClassStats {
                    label: c as u8,
                    runs: n,
                    accuracy: if n == 0 { f64::NAN } else { confusion[c][c] as f64 / n as f64 },
                }
            })
            .collect();
        Self {
            mode,
            images: ds.len(),
            runs_per_image,
            master_seed,
            total_runs: total,
            correct,
            accuracy: correct as f64 / total.max(1) as f64,
            no_fire_rate: no_fire as f64 / total.max(1) as f64,
            per_class,
            per_image_accuracy: per_image.iter().map(|&c| c as f64 / runs_per_image as f64).collect(),
            confusion,
            runs,
        }
    }

    pub fn write_runs_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "image,run,label,predicted,correct,no_fire")?;
        for r in &self.runs {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.image,
                r.run,
                r.label,
                r.predicted,
                (r.label == r.predicted) as u8,
                r.no_fire as u8
            )?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Classifies every image `runs_per_image` times on the current rayon pool.
/// Run `r` of image `k` draws from its own stream keyed by (seed, k, r).
pub fn evaluate(
    ds: &Dataset,
    net: &ConductanceNetwork,
    neurons: &Neurons,
    runs_per_image: usize,
    master_seed: u64,
) -> Result<AccuracyReport> {
    if runs_per_image == 0 {
        return Err(Error::InvalidParameter("runs_per_image must be >= 1".into()));
    }
    net.validate()?;
    let runs = (0..ds.len() * runs_per_image)
        .into_par_iter()
        .map(|j| {
            let (k, r) = (j / runs_per_image, j % runs_per_image);
            let mut rng = trial_rng(master_seed, k as u32, r as u32);
            let inf = network_infer(&ds.images[k], net, neurons, &mut rng)?;
            Ok(RunRecord {
                image: k,
                run: r,
                label: ds.labels[k],
                predicted: inf.class as u8,
                no_fire: inf.no_fire,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AccuracyReport::from_runs(neurons.mode(), ds, runs_per_image, master_seed, runs))
}
