//! Experiment configuration file (TOML). Every key is optional; unknown keys
//! are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sotneuron::crossbar::{CrossbarParams, InferenceMode, TrainParams};
use sotneuron::device::{Device, DeviceParams, PulseSchedule};
use sotneuron::magnet::IntegratorConfig;
use sotneuron::montecarlo::SweepGrid;

use crate::error::CliError;

/// Current levels, either listed or as an evenly spaced range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Levels {
    List(Vec<f64>),
    Range(Range),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Levels {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Levels::List(v) => v.clone(),
            Levels::Range(r) => SweepGrid::linspace(r.min, r.max, r.count),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Start {
    /// ±ẑ at random with a thermal tilt.
    Random,
    Up,
    Down,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SwitchConfig {
    pub repeats: u32,
    /// Record every this many integration steps.
    pub record_stride: u64,
    pub initial: Start,
}

impl Default for SwitchConfig {
    fn default() -> Self {
        Self {
            repeats: 1,
            record_stride: 100,
            initial: Start::Random,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// Clock currents [A].
    pub clock: Levels,
    /// Write currents [A].
    pub write: Levels,
    pub trials_per_point: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            clock: Levels::Range(Range {
                min: 0.0,
                max: 120e-6,
                count: 20,
            }),
            write: Levels::Range(Range {
                min: -10e-6,
                max: 10e-6,
                count: 20,
            }),
            trials_per_point: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub train_images: PathBuf,
    pub train_labels: PathBuf,
    pub test_images: PathBuf,
    pub test_labels: PathBuf,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            train_images: "data/train-images-idx3-ubyte.gz".into(),
            train_labels: "data/train-labels-idx1-ubyte.gz".into(),
            test_images: "data/t10k-images-idx3-ubyte.gz".into(),
            test_labels: "data/t10k-labels-idx1-ubyte.gz".into(),
        }
    }
}

/// Switching curve used by the lookup neurons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LookupConfig {
    /// Existing phase-diagram JSON to read instead of simulating.
    pub diagram: Option<PathBuf>,
    /// Write currents to simulate at the operating clock [A].
    pub write: Levels,
    pub trials_per_point: u64,
}

impl Default for LookupConfig {
    fn default() -> Self {
        let ua = [
            -100.0, -50.0, -30.0, -20.0, -15.0, -10.0, -7.0, -5.0, -3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0, 5.0, 7.0, 10.0,
            15.0, 20.0, 30.0, 50.0, 100.0,
        ];
        Self {
            diagram: None,
            write: Levels::List(ua.iter().map(|x| x * 1e-6).collect()),
            trials_per_point: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkConfig {
    /// Weight file written by `train` and read by `quantize`.
    pub weights: Option<PathBuf>,
    /// Conductance file read by `infer`, `evaluate` and `power`.
    pub conductances: Option<PathBuf>,
    pub mode: InferenceMode,
    pub runs_per_image: usize,
    /// Evaluate only the first this many images (all when absent).
    pub images: Option<usize>,
    /// Image index for `infer` and `power`.
    pub image: usize,
    pub lookup: LookupConfig,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            weights: None,
            conductances: None,
            mode: InferenceMode::StochasticLookup,
            runs_per_image: 100,
            images: None,
            image: 0,
            lookup: LookupConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    /// Output directory. Not echoed into artifacts.
    #[serde(skip_serializing)]
    pub out: PathBuf,
    /// Worker threads, 0 for all cores. Not echoed into artifacts.
    #[serde(skip_serializing)]
    pub threads: usize,
    pub device: DeviceParams,
    pub integrator: IntegratorConfig,
    /// Clock and write pulses; the sweep replaces the currents.
    pub schedule: PulseSchedule,
    pub switch: SwitchConfig,
    pub sweep: SweepConfig,
    pub data: DataConfig,
    pub train: TrainParams,
    pub crossbar: CrossbarParams,
    pub network: NetworkConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            out: "out".into(),
            threads: 0,
            device: DeviceParams::default(),
            integrator: IntegratorConfig::default(),
            schedule: PulseSchedule::default(),
            switch: SwitchConfig::default(),
            sweep: SweepConfig::default(),
            data: DataConfig::default(),
            train: TrainParams::default(),
            crossbar: CrossbarParams::default(),
            network: NetworkConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Checks everything that does not need input files.
    pub fn validate(&self) -> Result<(), CliError> {
        let cfg = |e: sotneuron::Error| CliError::Config(e.to_string());
        self.integrator.validate().map_err(cfg)?;
        self.schedule.validate().map_err(cfg)?;
        self.grid().validate().map_err(cfg)?;
        self.crossbar.validate().map_err(cfg)?;
        if self.switch.repeats == 0 || self.switch.record_stride == 0 {
            return Err(CliError::Config("switch.repeats and switch.record_stride must be >= 1".into()));
        }
        if self.network.runs_per_image == 0 {
            return Err(CliError::Config("network.runs_per_image must be >= 1".into()));
        }
        if self.network.lookup.diagram.is_none() {
            let g = SweepGrid {
                clock_levels: vec![self.schedule.i_clock],
                write_levels: self.network.lookup.write.values(),
                trials_per_point: self.network.lookup.trials_per_point,
                master_seed: self.seed,
            };
            g.validate().map_err(|e| CliError::Config(format!("network.lookup: {e}")))?;
        }
        Ok(())
    }

    pub fn device(&self) -> Result<Device, CliError> {
        Device::new(self.device.clone(), self.integrator).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn grid(&self) -> SweepGrid {
        SweepGrid {
            clock_levels: self.sweep.clock.values(),
            write_levels: self.sweep.write.values(),
            trials_per_point: self.sweep.trials_per_point,
            master_seed: self.seed,
        }
    }

    /// The resolved configuration as TOML, without `out` and `threads`.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
