//! Switching statistics over many independent two-step trials.

mod diagram;
mod lookup;
mod sampler;

pub use diagram::{phase_diagram, phase_diagram_with_progress, PhaseDiagram, PointOutcome, SweepGrid};
pub use lookup::{probability_lookup, ProbabilityCurve};
pub use sampler::{
    estimate, switching_probability, trial_rng, PointEstimate, Tally, TrialOutcome, TrialSampler, TwoStepSampler,
    BLOCK,
};
