//! Experiment configuration: a TOML document with strict key checking.
//! Every field has a default, so an empty file is a valid configuration.

use std::path::PathBuf;

use serde::Deserialize;

use crate::embedding::ScanConfig;
use crate::error::{GeomError, Result};
use crate::modelspace::{ModelKind, ModelParams};
use crate::spaceform::Curvature;

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub experiment: String,
    /// Report file stem; defaults to the experiment name.
    pub name: Option<String>,
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Whether to write the CSV tables next to the JSON report.
    pub tables: bool,
    pub model: ModelSection,
    pub scan: ScanSection,
    pub embed_scan: EmbedScanOptions,
    pub strain: StrainOptions,
    pub fiber: FiberOptions,
    pub volcomp: VolcompOptions,
    pub gh: GhOptions,
    pub dist_oracle: DistOracleOptions,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: "embed-scan".into(),
            name: None,
            seed: 0,
            out_dir: PathBuf::from("out"),
            tables: true,
            model: ModelSection::default(),
            scan: ScanSection::default(),
            embed_scan: EmbedScanOptions::default(),
            strain: StrainOptions::default(),
            fiber: FiberOptions::default(),
            volcomp: VolcompOptions::default(),
            gh: GhOptions::default(),
            dist_oracle: DistOracleOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub n: usize,
    pub k: i32,
    pub r: f64,
    pub kind: String,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection { n: 2, k: 1, r: 1.0, kind: "double-disk".into() }
    }
}

/// Overrides of [`ScanConfig`]; unset fields take the radius-scaled defaults.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanSection {
    pub d: Option<f64>,
    pub eta: Option<f64>,
    pub mc_samples: Option<usize>,
    pub fd_step: Option<f64>,
    pub nu: Option<f64>,
    pub rho: Option<f64>,
    pub strain_delta: Option<f64>,
    pub strain_radius: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EmbedScanOptions {
    pub pairs: usize,
    pub points: usize,
    pub dirs_per_point: usize,
    /// Use the smoothed fields in the injectivity scan instead of `Φ`.
    pub injectivity_smoothed: bool,
    pub equicontinuity: bool,
    pub equicontinuity_points: usize,
}

impl Default for EmbedScanOptions {
    fn default() -> Self {
        EmbedScanOptions {
            pairs: 10_000,
            points: 1000,
            dirs_per_point: 16,
            injectivity_smoothed: false,
            equicontinuity: false,
            equicontinuity_points: 400,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StrainOptions {
    pub delta: f64,
    pub anchors: usize,
    /// Anchors lie at distance in `[R, 2R]` from the centre; default `r/4`.
    pub anchor_radius: Option<f64>,
    pub probes: usize,
    /// Chart distortion is measured on probes within this radius; default `r/40`.
    pub probe_radius: Option<f64>,
    pub max_distortion: f64,
    pub sphere_points: usize,
    pub amplitudes: Vec<f64>,
}

impl Default for StrainOptions {
    fn default() -> Self {
        StrainOptions {
            delta: 0.05,
            anchors: 64,
            anchor_radius: None,
            probes: 64,
            probe_radius: None,
            max_distortion: 0.2,
            sphere_points: 200,
            amplitudes: vec![0.0, 0.01, 0.02],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FiberOptions {
    pub targets_per_axis: usize,
    /// Targets span `[-extent, extent]·R` per axis, `R` the image radius.
    pub extent: f64,
    /// Rejection tolerance as a fraction of `R`.
    pub tol: f64,
    pub grid_resolution: usize,
    pub link_radius: Option<f64>,
    pub length_tolerance: f64,
    pub epsilon: f64,
    pub submersion_points: usize,
    pub dirs_per_point: usize,
}

impl Default for FiberOptions {
    fn default() -> Self {
        FiberOptions {
            targets_per_axis: 5,
            extent: 0.6,
            tol: 0.1,
            grid_resolution: 30,
            link_radius: None,
            length_tolerance: 0.05,
            epsilon: 0.3,
            submersion_points: 100,
            dirs_per_point: 8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VolcompOptions {
    pub samples: usize,
    /// Radii of the ball checks; default eight even steps up to the diameter.
    pub rho_grid: Option<Vec<f64>>,
    pub kappa_points: usize,
    pub radius_kind: String,
    pub radius_samples: usize,
}

impl Default for VolcompOptions {
    fn default() -> Self {
        VolcompOptions {
            samples: 100_000,
            rho_grid: None,
            kappa_points: 25,
            radius_kind: "crosscap".into(),
            radius_samples: 400,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GhOptions {
    pub random_pairs: usize,
    pub max_points: usize,
    pub amplitude: f64,
}

impl Default for GhOptions {
    fn default() -> Self {
        GhOptions { random_pairs: 100, max_points: 6, amplitude: 0.01 }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DistOracleOptions {
    pub pairs: usize,
    /// Net resolution as a fraction of `r`: `ε = r / net_fraction`.
    pub net_fraction: f64,
    pub tolerance: f64,
    /// Draw pairs with endpoints on different sheets.
    pub cross_sheet: bool,
}

impl Default for DistOracleOptions {
    fn default() -> Self {
        DistOracleOptions { pairs: 100, net_fraction: 200.0, tolerance: 0.02, cross_sheet: true }
    }
}

/// A configuration with the model and scan parameters validated.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub config: ExperimentConfig,
    pub params: ModelParams,
    pub kind: ModelKind,
    pub scan: ScanConfig,
}

impl Resolved {
    pub fn name(&self) -> &str {
        self.config.name.as_deref().unwrap_or(&self.config.experiment)
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| GeomError::Parse(e.to_string()))
    }

    pub fn resolve(self) -> Result<Resolved> {
        let m = &self.model;
        let params = ModelParams::new(m.n, Curvature::from_value(m.k)?, m.r)?;
        let kind: ModelKind = m.kind.parse()?;
        let d = ScanConfig::defaults(params);
        let s = &self.scan;
        let scan = ScanConfig {
            d: s.d.unwrap_or(d.d),
            eta: s.eta.unwrap_or(d.eta),
            mc_samples: s.mc_samples.unwrap_or(d.mc_samples),
            fd_step: s.fd_step.unwrap_or(d.fd_step),
            nu: s.nu.unwrap_or(d.nu),
            rho: s.rho.unwrap_or(d.rho),
            seed: self.seed,
            strain_delta: s.strain_delta.unwrap_or(d.strain_delta),
            strain_radius: s.strain_radius.unwrap_or(d.strain_radius),
        };
        scan.validate(params)?;
        Ok(Resolved { config: self, params, kind, scan })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_the_default() {
        assert_eq!(ExperimentConfig::from_toml("").unwrap(), ExperimentConfig::default());
        let r = ExperimentConfig::default().resolve().unwrap();
        assert_eq!(r.name(), "embed-scan");
        assert_eq!(r.kind, ModelKind::DoubleDisk);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(ExperimentConfig::from_toml("bogus = 1"), Err(GeomError::Parse(_))));
        assert!(ExperimentConfig::from_toml("[model]\nradius = 1.0").is_err());
        assert!(ExperimentConfig::from_toml("[scan]\nd = 0.001\nmc = 3").is_err());
    }

    #[test]
    fn model_invariants_are_checked() {
        let c = ExperimentConfig::from_toml("[model]\nk = 1\nr = 1.5707963267948966").unwrap();
        assert!(matches!(c.resolve(), Err(GeomError::Domain(_))));
        let c = ExperimentConfig::from_toml("[model]\nkind = \"torus\"").unwrap();
        assert!(matches!(c.resolve(), Err(GeomError::Parse(_))));
    }

    #[test]
    fn overrides_apply() {
        let c = ExperimentConfig::from_toml("seed = 7\n[scan]\nmc_samples = 0\nd = 0.005").unwrap();
        let r = c.resolve().unwrap();
        assert_eq!((r.scan.seed, r.scan.mc_samples, r.scan.d), (7, 0, 0.005));
    }
}
