//! Run configuration, read from TOML.
//!
//! Every table rejects unknown keys. See the README for the full grammar.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use trsw_core::testcases::{PerturbationForm, PlanetParams};
use trsw_core::{Coriolis, FluxConfig, Variant};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub testcase: TestCaseConfig,
    pub mesh: MeshConfig,
    #[serde(default)]
    pub planet: PlanetConfig,
    #[serde(default)]
    pub scheme: SchemeSection,
    pub time: TimeConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum TestCaseConfig {
    Williamson2,
    Galewsky {
        #[serde(default)]
        perturbation: PerturbationForm,
        /// Replace the buoyancy by the constant `g`.
        #[serde(default)]
        constant_b: bool,
    },
    Rest {
        depth: f64,
        /// Buoyancy, defaults to `g`.
        #[serde(default)]
        b: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeshConfig {
    CubedSphere {
        n: usize,
        p: usize,
    },
    PeriodicPlane {
        nx: usize,
        ny: usize,
        lx: f64,
        ly: f64,
        p: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanetConfig {
    #[serde(default = "default_radius")]
    pub radius: f64,
    #[serde(default = "default_g")]
    pub g: f64,
    #[serde(default = "default_omega")]
    pub omega: f64,
}

fn default_radius() -> f64 {
    PlanetParams::default().radius
}

fn default_g() -> f64 {
    PlanetParams::default().g
}

fn default_omega() -> f64 {
    PlanetParams::default().omega
}

impl Default for PlanetConfig {
    fn default() -> Self {
        let p = PlanetParams::default();
        Self {
            radius: p.radius,
            g: p.g,
            omega: p.omega,
        }
    }
}

impl PlanetConfig {
    pub fn params(&self) -> PlanetParams {
        PlanetParams {
            radius: self.radius,
            g: self.g,
            omega: self.omega,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSection {
    #[serde(default = "default_variant")]
    pub variant: Variant,
    #[serde(default)]
    pub flux: FluxConfig,
    /// Defaults to the planet's rotation on the sphere and to none on the plane.
    #[serde(default)]
    pub coriolis: Option<Coriolis>,
}

fn default_variant() -> Variant {
    Variant::Full
}

impl Default for SchemeSection {
    fn default() -> Self {
        Self {
            variant: Variant::Full,
            flux: FluxConfig::default(),
            coriolis: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    #[serde(default)]
    pub duration_days: Option<f64>,
    #[serde(default)]
    pub duration_seconds: Option<f64>,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default)]
    pub fixed_dt: Option<f64>,
}

fn default_cfl() -> f64 {
    0.8
}

impl TimeConfig {
    pub fn duration(&self) -> f64 {
        self.duration_seconds
            .unwrap_or_else(|| self.duration_days.unwrap_or(0.0) * 86400.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnapshotField {
    U1,
    U2,
    H,
    Hb,
    B,
    Vorticity,
    RelVorticity,
    Ux,
    Uy,
    Uz,
}

impl SnapshotField {
    pub fn name(self) -> &'static str {
        match self {
            SnapshotField::U1 => "u1",
            SnapshotField::U2 => "u2",
            SnapshotField::H => "h",
            SnapshotField::Hb => "hb",
            SnapshotField::B => "b",
            SnapshotField::Vorticity => "vorticity",
            SnapshotField::RelVorticity => "rel_vorticity",
            SnapshotField::Ux => "ux",
            SnapshotField::Uy => "uy",
            SnapshotField::Uz => "uz",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub dir: Option<PathBuf>,
    /// Diagnostics row cadence in steps; the first and last step are always written.
    #[serde(default = "default_diag_every")]
    pub diagnostics_every: usize,
    /// Snapshot cadence in steps, 0 for initial and final only.
    #[serde(default)]
    pub snapshot_every: usize,
    #[serde(default = "default_fields")]
    pub snapshot_fields: Vec<SnapshotField>,
    #[serde(default = "default_true")]
    pub write_mesh: bool,
}

fn default_diag_every() -> usize {
    10
}

fn default_fields() -> Vec<SnapshotField> {
    vec![
        SnapshotField::U1,
        SnapshotField::U2,
        SnapshotField::H,
        SnapshotField::Hb,
    ]
}

fn default_true() -> bool {
    true
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: None,
            diagnostics_every: default_diag_every(),
            snapshot_every: 0,
            snapshot_fields: default_fields(),
            write_mesh: true,
        }
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| invalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        match self.mesh {
            MeshConfig::CubedSphere { n, p } => {
                if n == 0 || p == 0 {
                    return Err(invalid("mesh.n and mesh.p must be at least 1"));
                }
            }
            MeshConfig::PeriodicPlane { nx, ny, lx, ly, p } => {
                if nx == 0 || ny == 0 || p == 0 {
                    return Err(invalid("mesh.nx, mesh.ny and mesh.p must be at least 1"));
                }
                positive("mesh.lx", lx)?;
                positive("mesh.ly", ly)?;
                if !matches!(self.testcase, TestCaseConfig::Rest { .. }) {
                    return Err(invalid(
                        "only the `rest` test case runs on a periodic plane",
                    ));
                }
            }
        }
        positive("planet.radius", self.planet.radius)?;
        positive("planet.g", self.planet.g)?;
        if !(self.planet.omega >= 0.0) {
            return Err(invalid("planet.omega must be non-negative"));
        }
        if let TestCaseConfig::Rest { depth, b } = self.testcase {
            positive("testcase.depth", depth)?;
            if let Some(b) = b {
                positive("testcase.b", b)?;
            }
        }
        self.scheme
            .flux
            .validate()
            .map_err(|e| invalid(format!("scheme.flux: {e}")))?;
        let t = &self.time;
        match (t.duration_days, t.duration_seconds) {
            (Some(_), Some(_)) => {
                return Err(invalid(
                    "give only one of time.duration_days and time.duration_seconds",
                ))
            }
            (None, None) => {
                return Err(invalid(
                    "time.duration_days or time.duration_seconds is required",
                ))
            }
            (Some(d), None) => positive("time.duration_days", d)?,
            (None, Some(s)) => positive("time.duration_seconds", s)?,
        }
        positive("time.cfl", t.cfl)?;
        if let Some(dt) = t.fixed_dt {
            positive("time.fixed_dt", dt)?;
        }
        if self.output.diagnostics_every == 0 {
            return Err(invalid("output.diagnostics_every must be at least 1"));
        }
        Ok(())
    }

    pub fn coriolis(&self) -> Coriolis {
        self.scheme.coriolis.unwrap_or(match self.mesh {
            MeshConfig::CubedSphere { .. } => Coriolis::Rotating {
                omega: self.planet.omega,
            },
            MeshConfig::PeriodicPlane { .. } => Coriolis::None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"
[testcase]
name = "galewsky"

[mesh]
kind = "cubed_sphere"
n = 8
p = 3

[scheme]
variant = "full"
flux = { mode = "dissipative" }

[time]
duration_days = 1.5

[output]
diagnostics_every = 5
snapshot_fields = ["h", "vorticity"]
"#;

    #[test]
    fn parses_a_full_config() {
        let c = RunConfig::from_toml(GOOD).unwrap();
        assert_eq!(
            c.testcase,
            TestCaseConfig::Galewsky {
                perturbation: PerturbationForm::ClassicSquared,
                constant_b: false
            }
        );
        assert_eq!(c.mesh, MeshConfig::CubedSphere { n: 8, p: 3 });
        assert_eq!(c.time.duration(), 1.5 * 86400.0);
        assert_eq!(c.time.cfl, 0.8);
        assert_eq!(c.output.diagnostics_every, 5);
        assert_eq!(c.coriolis(), Coriolis::Rotating { omega: 7.292e-5 });
    }

    fn err_of(text: &str) -> String {
        RunConfig::from_toml(text).unwrap_err().to_string()
    }

    #[test]
    fn unknown_keys_are_named() {
        let e = err_of(&GOOD.replace("n = 8", "n = 8\nresolution = 3"));
        assert!(e.contains("resolution"), "{e}");
        let e = err_of(&GOOD.replace("duration_days", "duration_dayz"));
        assert!(e.contains("duration_dayz"), "{e}");
        let e = err_of(&format!("{GOOD}\n[extra]\nx = 1\n"));
        assert!(e.contains("extra"), "{e}");
        let e = err_of(&GOOD.replace("name = \"galewsky\"", "name = \"galewsky\"\nwidth = 2"));
        assert!(e.contains("width"), "{e}");
    }

    #[test]
    fn invalid_values() {
        assert!(err_of(&GOOD.replace("n = 8", "n = 0")).contains("mesh.n"));
        assert!(
            err_of(&GOOD.replace("duration_days = 1.5", "duration_days = -1.0"))
                .contains("duration_days")
        );
        assert!(err_of(&GOOD.replace("duration_days = 1.5", "")).contains("required"));
        assert!(err_of(&GOOD.replace("\"full\"", "\"half\"")).contains("half"));
        let plane = GOOD.replace(
            "kind = \"cubed_sphere\"\nn = 8",
            "kind = \"periodic_plane\"\nnx = 2\nny = 2\nlx = 1.0\nly = 1.0",
        );
        assert!(err_of(&plane).contains("periodic plane"));
    }
}
