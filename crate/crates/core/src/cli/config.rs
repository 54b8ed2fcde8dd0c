use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{ABMetric, PhiSpec};
use crate::ode::{self, IvpOptions, OdeSpec, PhiSolution};
use crate::s3::{make_berger, BergerSphere};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricConfig {
    pub preset: String,
    #[serde(default = "one")]
    pub epsilon: f64,
}

fn one() -> f64 {
    1.0
}

/// A profile given either by name (`randers`, `ode:k0`, `file:sol.json`, ...)
/// or as a full profile object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PhiChoice {
    Named(String),
    Spec(PhiSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleCounts {
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default = "default_directions")]
    pub directions: usize,
    #[serde(default = "default_flags")]
    pub flags: usize,
}

fn default_points() -> usize {
    20
}
fn default_directions() -> usize {
    12
}
fn default_flags() -> usize {
    200
}

impl Default for SampleCounts {
    fn default() -> Self {
        Self {
            points: default_points(),
            directions: default_directions(),
            flags: default_flags(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub json: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub metric: MetricConfig,
    pub phi: PhiChoice,
    #[serde(default)]
    pub samples: SampleCounts,
    #[serde(default = "one_u64")]
    pub seed: u64,
    /// Slope `phi'(0)` used for `ode:*` profiles.
    #[serde(default = "default_dphi0")]
    pub dphi0: f64,
    /// Global tolerance override for every upper-bound check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// Per-check tolerance overrides, keyed by check name.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub outputs: Outputs,
}

fn one_u64() -> u64 {
    1
}
fn default_dphi0() -> f64 {
    0.3
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            metric: MetricConfig {
                preset: "s3-berger".into(),
                epsilon: 1.0,
            },
            phi: PhiChoice::Named("randers".into()),
            samples: SampleCounts::default(),
            seed: 1,
            dphi0: default_dphi0(),
            tol: None,
            tolerances: BTreeMap::new(),
            outputs: Outputs::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.samples;
        if s.points == 0 || s.directions == 0 || s.flags == 0 {
            return Err(Error::Invalid("sample counts must be at least 1".into()));
        }
        for t in self.tol.iter().chain(self.tolerances.values()) {
            if !(*t >= f64::EPSILON) {
                return Err(Error::Invalid(format!("tolerance {t} is below machine epsilon")));
            }
        }
        Ok(())
    }

    pub fn sphere(&self) -> Result<BergerSphere> {
        match self.metric.preset.as_str() {
            "s3-berger" => make_berger(self.metric.epsilon),
            other => Err(Error::Invalid(format!("unknown preset '{other}' (available: s3-berger)"))),
        }
    }

    pub fn build(&self) -> Result<ABMetric<BergerSphere>> {
        let sphere = self.sphere()?;
        let phi = resolve_phi(&self.phi, sphere.b, self.dphi0)?;
        Ok(sphere.with_phi(phi))
    }
}

/// Einstein sign for `ode:k1`, `ode:k0`, `ode:km1` (also `ode:+1`, `ode:-1`, ...).
fn ode_sign(tag: &str) -> Option<i8> {
    match tag {
        "k1" | "+1" | "1" => Some(1),
        "k0" | "0" => Some(0),
        "km1" | "-1" => Some(-1),
        _ => None,
    }
}

pub fn resolve_phi(choice: &PhiChoice, b: f64, dphi0: f64) -> Result<PhiSpec> {
    let name = match choice {
        PhiChoice::Spec(p) => return Ok(p.clone()),
        PhiChoice::Named(n) => n.as_str(),
    };
    if let Some(tag) = name.strip_prefix("ode:") {
        let k = ode_sign(tag).ok_or_else(|| Error::Invalid(format!("unknown ODE profile '{name}' (use ode:k1, ode:k0, ode:km1)")))?;
        if !(b > 0.0) {
            return Err(Error::Invalid("ODE profiles need b > 0 (epsilon > 0)".into()));
        }
        let sol = ode::solve_phi_ivp(OdeSpec::sphere(k, b)?, 1.0, dphi0, IvpOptions::default())?;
        return Ok(PhiSpec::Numeric(Arc::new(sol)));
    }
    if let Some(path) = name.strip_prefix("file:") {
        return load_phi_file(Path::new(path));
    }
    match name {
        "riemannian" => Ok(PhiSpec::Riemannian),
        "randers" => Ok(PhiSpec::Randers),
        "kropina" => Ok(PhiSpec::Kropina { sign: 1.0 }),
        other => Err(Error::Invalid(format!(
            "unknown profile '{other}' (riemannian, randers, kropina, ode:k1|k0|km1, file:PATH)"
        ))),
    }
}

/// Reads either a solution written by `solve-phi` or a profile object.
pub fn load_phi_file(path: &Path) -> Result<PhiSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?;
    if let Ok(sol) = serde_json::from_str::<PhiSolution>(&text) {
        return Ok(PhiSpec::Numeric(Arc::new(sol)));
    }
    serde_json::from_str::<PhiSpec>(&text).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_config() {
        let c: RunConfig = serde_json::from_str(r#"{"metric":{"preset":"s3-berger","epsilon":0.5},"phi":"randers"}"#).unwrap();
        assert_eq!(c.samples, SampleCounts::default());
        assert!(c.validate().is_ok());
        assert!((c.sphere().unwrap().b.powi(2) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn parses_profile_object() {
        let c: RunConfig = serde_json::from_str(
            r#"{"metric":{"preset":"s3-berger"},"phi":{"kind":"randers_type","params":[1,0.5,0.2]}}"#,
        )
        .unwrap();
        assert!(matches!(c.build().unwrap().phi, PhiSpec::RandersType { .. }));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"metric":{"preset":"s3-berger"},"phi":"randers","bogus":1}"#).is_err());
        let mut c = RunConfig::default();
        c.tol = Some(1e-20);
        assert!(c.validate().is_err());
        c.tol = None;
        c.metric.preset = "torus".into();
        assert!(c.build().is_err());
        c.metric.preset = "s3-berger".into();
        c.metric.epsilon = 0.0;
        c.phi = PhiChoice::Named("ode:k1".into());
        assert!(c.build().is_err());
    }
}
