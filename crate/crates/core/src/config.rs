//! Run configuration files (TOML).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::FwerConfig;
use crate::kernel::GaussianKernel;
use crate::lattice::PresetName;

/// Smoothing kernel as written in a run config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    #[serde(rename = "type", default = "gaussian")]
    pub kind: String,
    /// One FWHM per axis.
    pub fwhm: Vec<f64>,
    #[serde(default)]
    pub truncation: Option<f64>,
}

fn gaussian() -> String {
    "gaussian".into()
}

impl KernelConfig {
    pub fn build(&self) -> Result<GaussianKernel> {
        if self.kind != "gaussian" {
            return Err(Error::Config(format!("kernel.type: unsupported kernel `{}`", self.kind)));
        }
        let k = GaussianKernel::new(self.fwhm.clone())?;
        match self.truncation {
            Some(r) => k.with_truncation(r),
            None => Ok(k),
        }
    }
}

/// Parameters of a simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub preset: PresetName,
    pub fwhm: f64,
    #[serde(default = "defaults::n_subjects")]
    pub n_subjects: usize,
    #[serde(default = "defaults::n_reps")]
    pub n_reps: usize,
    #[serde(default = "defaults::alpha")]
    pub alpha: f64,
    #[serde(default = "defaults::one")]
    pub r_scan: u32,
    #[serde(default = "defaults::one")]
    pub r_lkc: u32,
    #[serde(default = "defaults::starts")]
    pub starts: usize,
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; 0 uses every core.
    #[serde(default)]
    pub threads: usize,
}

mod defaults {
    pub fn n_subjects() -> usize {
        50
    }
    pub fn n_reps() -> usize {
        500
    }
    pub fn alpha() -> f64 {
        0.05
    }
    pub fn one() -> u32 {
        1
    }
    pub fn starts() -> usize {
        10
    }
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let c: RunConfig = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        c.fwer().validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path)?;
        Self::from_toml_str(&s).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn fwer(&self) -> FwerConfig {
        FwerConfig {
            preset: self.preset,
            fwhm: self.fwhm,
            n_subjects: self.n_subjects,
            n_reps: self.n_reps,
            alpha: self.alpha,
            r_lkc: self.r_lkc,
            r_scan: self.r_scan,
            starts: self.starts,
            seed: self.seed,
        }
    }
}
