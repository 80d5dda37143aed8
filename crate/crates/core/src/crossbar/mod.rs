//! Resistive-crossbar network of SOT neurons: data ingestion, offline
//! training, weight quantization, and stochastic inference.

mod circuit;
mod dataset;
pub mod idx;
mod inference;
mod network;
mod quantize;

pub use circuit::{layer_currents, layer_static_power, network_static_power, synaptic_current};
pub use dataset::{downscale, ingest_mnist, preprocess, Dataset, Image, CLASSES, EVAL_IMAGES, PIXELS, SIDE};
pub use inference::{
    decide, evaluate, layer_forward, network_infer, with_bias, AccuracyReport, ClassStats, Inference, InferenceMode,
    Neurons, RunRecord,
};
pub use network::{train_offline, DenseLayer, FloatNetwork, Surrogate, TrainParams, WEIGHTS_SCHEMA};
pub use quantize::{
    quantize_layer, quantize_weights, ConductanceLayer, ConductanceNetwork, CrossbarParams, CONDUCTANCE_SCHEMA,
};
