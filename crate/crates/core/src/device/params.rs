use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::magnet::{
    calibrate_anisotropy, demag_factors, DemagTensor, IntegratorConfig, MacrospinModel,
    MagnetGeometry, MaterialParams,
};
use crate::vec3::Vec3;

/// Heavy-metal strip under the free layer. Charge current flows along its length (x̂).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HeavyMetalParams {
    pub width: f64,
    pub length: f64,
    pub thickness: f64,
    /// [Ω·m]
    pub resistivity: f64,
    pub spin_hall_angle: f64,
}

impl Default for HeavyMetalParams {
    /// 40 × 40 × 2 nm³, 200 μΩ·cm, θ_SH = 0.3.
    fn default() -> Self {
        Self {
            width: 40e-9,
            length: 40e-9,
            thickness: 2e-9,
            resistivity: 200e-8,
            spin_hall_angle: 0.3,
        }
    }
}

impl HeavyMetalParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("width", self.width),
            ("length", self.length),
            ("thickness", self.thickness),
            ("resistivity", self.resistivity),
            ("spin_hall_angle", self.spin_hall_angle),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "heavy_metal.{name} must be > 0, got {v}"
                )));
            }
        }
        Ok(())
    }

    pub fn cross_section(&self) -> f64 {
        self.width * self.thickness
    }

    /// R_HM = ρ·L/A [Ω].
    pub fn resistance(&self) -> Result<f64> {
        self.validate()?;
        Ok(self.resistivity * self.length / self.cross_section())
    }

    /// Spin injection efficiency θ_SH·A_MTJ/A_HM.
    pub fn injection_efficiency(&self, geom: &MagnetGeometry) -> f64 {
        self.spin_hall_angle * geom.area() / self.cross_section()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MtjParams {
    /// Parallel-state resistance [Ω].
    pub r_parallel: f64,
    /// (R_AP − R_P)/R_P
    pub tmr: f64,
    /// Spin polarization of the write current.
    pub polarization: f64,
    /// MgO thickness [m]; informational.
    pub oxide_thickness: f64,
}

impl Default for MtjParams {
    fn default() -> Self {
        Self {
            r_parallel: 8e3,
            tmr: 1.0,
            polarization: 0.5,
            oxide_thickness: 1e-9,
        }
    }
}

impl MtjParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_parallel.is_finite() && self.r_parallel > 0.0) {
            return Err(Error::InvalidParameter(format!("mtj.r_parallel must be > 0, got {}", self.r_parallel)));
        }
        if !(self.tmr.is_finite() && self.tmr > 0.0) {
            return Err(Error::InvalidParameter(format!("mtj.tmr must be > 0, got {}", self.tmr)));
        }
        if !(self.polarization > 0.0 && self.polarization <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "mtj.polarization must lie in (0, 1], got {}",
                self.polarization
            )));
        }
        Ok(())
    }

    pub fn r_antiparallel(&self) -> f64 {
        self.r_parallel * (1.0 + self.tmr)
    }
}

/// Complete device description; the on-disk parameter file is this struct
/// in TOML. Every key is optional and defaults to the reference device.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeviceParams {
    /// Thermal barrier in k_B·T used to calibrate Ku2 when `material.ku2` is 0.
    pub barrier_kt: f64,
    /// External field H_a [A/m].
    pub applied_field: [f64; 3],
    pub free_layer: MagnetGeometry,
    pub material: MaterialParams,
    pub heavy_metal: HeavyMetalParams,
    pub mtj: MtjParams,
}

impl Default for DeviceParams {
    fn default() -> Self {
        Self {
            barrier_kt: 31.44,
            applied_field: [0.0; 3],
            free_layer: MagnetGeometry::default(),
            material: MaterialParams::default(),
            heavy_metal: HeavyMetalParams::default(),
            mtj: MtjParams::default(),
        }
    }
}

impl DeviceParams {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Format(e.to_string()))
    }
}

/// A device with derived quantities resolved and a ready-to-run macrospin model.
#[derive(Debug, Clone, PartialEq)]
pub struct Device {
    pub params: DeviceParams,
    pub demag: DemagTensor,
    pub model: MacrospinModel,
    /// Spin injection efficiency of the clock path.
    pub beta: f64,
    pub r_hm: f64,
}

impl Device {
    pub fn new(params: DeviceParams, cfg: IntegratorConfig) -> Result<Self> {
        params.free_layer.validate()?;
        params.material.validate()?;
        params.mtj.validate()?;
        let r_hm = params.heavy_metal.resistance()?;
        let c = PhysicalConstants::SI;
        let demag = demag_factors(&params.free_layer)?;
        let mut material = params.material;
        if material.ku2 == 0.0 {
            // Ku2 is defined by the barrier at the reference temperature; T = 0
            // runs keep the landscape of the 300 K device.
            let reference = MaterialParams {
                temperature: if material.temperature > 0.0 { material.temperature } else { 300.0 },
                ..material
            };
            material.ku2 = calibrate_anisotropy(params.barrier_kt, &reference, &params.free_layer, &demag, &c)?;
        }
        let model = MacrospinModel::new(
            params.free_layer,
            material,
            demag,
            Vec3::from(params.applied_field),
            c,
            cfg,
        )?;
        Ok(Self {
            beta: params.heavy_metal.injection_efficiency(&params.free_layer),
            r_hm,
            demag,
            model,
            params,
        })
    }

    /// Reference device at its default temperature and time step.
    pub fn reference() -> Self {
        Self::new(DeviceParams::default(), IntegratorConfig::default())
            .expect("reference parameters are valid")
    }

    pub fn material(&self) -> &MaterialParams {
        &self.model.material
    }

    /// Barrier height Δ/(k_B T) of the resolved landscape; `None` at T = 0.
    pub fn thermal_stability(&self) -> Option<f64> {
        let m = self.material();
        (m.temperature > 0.0).then(|| {
            crate::magnet::energy_barrier(m, &self.params.free_layer, &self.demag, &self.model.constants)
                / self.model.constants.kt(m.temperature)
        })
    }
}
