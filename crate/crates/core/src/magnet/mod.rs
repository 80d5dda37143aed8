//! Macrospin free-layer physics: demagnetization, effective field, energy and
//! stochastic LLG integration.

pub mod demag;
pub mod energy;
pub mod field;
pub mod llg;
pub mod params;
pub mod trajectory;

pub use demag::{demag_factors, DemagTensor};
pub use energy::{calibrate_anisotropy, energy_barrier, magnetic_energy, Energy};
pub use field::{effective_field, shape_field, thermal_field, thermal_sigma, uniaxial_field};
pub use llg::{
    llg_step, IntegratorConfig, LlgCoefficients, MacrospinModel, Magnetization, Sample,
    SpinCurrent, SpinState, Trajectory,
};
pub use params::{MagnetGeometry, MaterialParams};
