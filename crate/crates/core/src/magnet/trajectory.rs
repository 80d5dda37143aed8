use std::io::Write;

use serde::Serialize;

use super::demag::DemagTensor;
use super::energy::magnetic_energy;
use super::llg::Trajectory;
use super::params::{MagnetGeometry, MaterialParams};
use crate::constants::PhysicalConstants;
use crate::error::Result;

/// Writes `t_s,mx,my,mz,E_kT` rows preceded by `#`-prefixed TOML echoing
/// `params`. E_kT is `NaN` at T = 0.
pub fn write_trajectory_csv<W: Write, P: Serialize>(
    mut out: W,
    params: &P,
    trajectory: &Trajectory,
    mat: &MaterialParams,
    geom: &MagnetGeometry,
    demag: &DemagTensor,
    c: &PhysicalConstants,
) -> Result<()> {
    write_comment_header(&mut out, params)?;
    writeln!(out, "t_s,mx,my,mz,E_kT")?;
    for s in &trajectory.samples {
        let e = magnetic_energy(s.m, mat, geom, demag, c).kt.unwrap_or(f64::NAN);
        writeln!(out, "{:e},{},{},{},{}", s.t, s.m.x, s.m.y, s.m.z, e)?;
    }
    Ok(())
}

/// Serializes `params` as TOML with every line prefixed by `# `.
pub fn write_comment_header<W: Write, P: Serialize>(out: &mut W, params: &P) -> Result<()> {
    let text = toml::to_string(params)
        .map_err(|e| crate::error::Error::Format(format!("cannot serialize parameters: {e}")))?;
    for line in text.lines() {
        writeln!(out, "# {line}")?;
    }
    Ok(())
}
