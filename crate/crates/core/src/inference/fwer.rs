//! Monte-Carlo estimate of the familywise error rate of the EEC threshold.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::JetSource;
use crate::kernel::GaussianKernel;
use crate::lattice::{make_domain_preset, sample_ensemble, DomainPreset, FieldEnsemble, PresetName, RngSpec};
use crate::lkc::{lkc_on_grid, LkcOptions, LkcVector};
use crate::manifold::{RefinedGrid, VoxelManifold};
use crate::surf::PointEvaluator;

use super::ec::FieldType;
use super::maxima::{count_local_maxima_above, local_maxima, top_local_maxima};
use super::optimize::{ascend, t_from_moments, t_on_grid, AscentOptions};
use super::threshold::threshold;

/// Parameters of one FWER experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FwerConfig {
    pub preset: PresetName,
    pub fwhm: f64,
    pub n_subjects: usize,
    pub n_reps: usize,
    pub alpha: f64,
    /// Added resolution of the LKC estimates.
    pub r_lkc: u32,
    /// Added resolution of the grid whose maxima start the continuous maximization.
    pub r_scan: u32,
    /// Number of grid maxima the continuous maximization starts from.
    pub starts: usize,
    pub seed: u64,
}

impl Default for FwerConfig {
    fn default() -> Self {
        FwerConfig {
            preset: PresetName::Stat2d,
            fwhm: 3.0,
            n_subjects: 50,
            n_reps: 500,
            alpha: 0.05,
            r_lkc: 1,
            r_scan: 1,
            starts: 10,
            seed: 0,
        }
    }
}

impl FwerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_reps == 0 {
            return Err(Error::InvalidArgument("n_reps must be at least 1".into()));
        }
        if self.n_subjects < 3 {
            return Err(Error::InvalidArgument("n_subjects must be at least 3".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidArgument(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if !(self.fwhm > 0.0 && self.fwhm.is_finite()) {
            return Err(Error::InvalidArgument(format!("fwhm must be positive, got {}", self.fwhm)));
        }
        if self.r_lkc == 0 || self.r_lkc.is_multiple_of(2) {
            return Err(Error::EvenResolution(self.r_lkc));
        }
        if self.r_scan == 0 || self.r_scan.is_multiple_of(2) {
            return Err(Error::EvenResolution(self.r_scan));
        }
        if self.starts == 0 {
            return Err(Error::InvalidArgument("starts must be at least 1".into()));
        }
        Ok(())
    }
}

/// Resolution at which the maximum of the t-field is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResolutionMode {
    /// Voxel centres.
    #[serde(rename = "0")]
    Lattice,
    /// The refined grid with added resolution 1.
    #[serde(rename = "1")]
    Refined,
    /// The whole manifold.
    #[serde(rename = "inf")]
    Continuous,
}

impl ResolutionMode {
    pub const ALL: [ResolutionMode; 3] = [ResolutionMode::Lattice, ResolutionMode::Refined, ResolutionMode::Continuous];

    pub fn as_str(&self) -> &'static str {
        match self {
            ResolutionMode::Lattice => "0",
            ResolutionMode::Refined => "1",
            ResolutionMode::Continuous => "inf",
        }
    }
}

/// Outcome of one replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Replication {
    pub index: u64,
    pub threshold: f64,
    pub lkcs: Vec<f64>,
    /// Maximum of the t-field per resolution mode.
    pub maxima: [f64; 3],
    /// Local maxima above the threshold per resolution mode.
    pub exceedances: [usize; 3],
}

/// Summary for one resolution mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSummary {
    pub mode: ResolutionMode,
    pub fwer: f64,
    /// Binomial standard error of `fwer`.
    pub se: f64,
    /// Mean number of local maxima above the threshold.
    pub eec: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationFailure {
    pub index: u64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FwerReport {
    pub config: FwerConfig,
    pub modes: Vec<ModeSummary>,
    /// Replications that entered the estimates.
    pub completed: usize,
    pub failures: Vec<ReplicationFailure>,
    pub mean_threshold: f64,
    pub replications: Vec<Replication>,
}

impl FwerReport {
    pub fn mode(&self, mode: ResolutionMode) -> &ModeSummary {
        self.modes.iter().find(|m| m.mode == mode).expect("all modes are reported")
    }
}

/// Fixed per-experiment state shared by the replications.
struct Setup {
    preset: DomainPreset,
    manifold: VoxelManifold,
    kernel: GaussianKernel,
    fine: RefinedGrid,
    /// Scan grid when it differs from `fine`.
    scan: Option<RefinedGrid>,
    centres: RefinedGrid,
    /// Fine-grid point of each voxel centre.
    centre_ids: Vec<usize>,
}

impl Setup {
    fn new(config: &FwerConfig) -> Result<Self> {
        let preset = make_domain_preset(config.preset.as_str(), config.fwhm)?;
        let manifold = VoxelManifold::new(preset.domain.clone())?;
        let kernel = GaussianKernel::isotropic(manifold.dim(), config.fwhm)?;
        let fine = manifold.refined_grid(1)?;
        let centres = manifold.refined_grid(0)?;
        let centre_ids = centres
            .points()
            .iter()
            .map(|p| {
                let j = std::array::from_fn(|d| 2 * p.index[d]);
                fine.lookup(j).expect("voxel centres are on the refined grid")
            })
            .collect();
        let scan = if config.r_scan == 1 { None } else { Some(manifold.refined_grid(config.r_scan)?) };
        Ok(Setup { preset, manifold, kernel, fine, scan, centres, centre_ids })
    }
}

fn run_replication(setup: &Setup, config: &FwerConfig, b: u64) -> Result<Replication> {
    let dim = setup.manifold.dim();
    let ensemble: FieldEnsemble =
        sample_ensemble(setup.preset.data.clone(), config.n_subjects, RngSpec::new(config.seed, b), None)?;
    let source = JetSource::Ensemble(&ensemble);
    let t_at = |slab: &crate::jets::GramSlab, local: usize| {
        t_from_moments(&[], slab.fields, slab.means[0][local], slab.get(local, 0, 0))
    };
    let (lkcs, fine_t): (LkcVector, Vec<f64>) = if config.r_lkc == 1 {
        lkc_on_grid(source, &setup.kernel, &setup.manifold, &setup.fine, LkcOptions::default(), t_at)?
    } else {
        let grid = setup.manifold.refined_grid(config.r_lkc)?;
        let (l, _) = lkc_on_grid(source, &setup.kernel, &setup.manifold, &grid, LkcOptions::default(), |_, _| Ok(()))?;
        let (_, t) = lkc_on_grid(source, &setup.kernel, &setup.manifold, &setup.fine, LkcOptions::default(), t_at)?;
        (l, t)
    };
    let field = FieldType::student_t((config.n_subjects - 1) as f64)?;
    let u = threshold(&lkcs, field, config.alpha)?;

    let centre_t: Vec<f64> = setup.centre_ids.iter().map(|&i| fine_t[i]).collect();
    let max0 = centre_t.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let max1 = fine_t.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let count0 = count_local_maxima_above(&setup.centres, &centre_t, u);
    let count1 = count_local_maxima_above(&setup.fine, &fine_t, u);

    // Continuous maxima: ascend from the highest grid maxima and from every
    // grid maximum above the threshold.
    let above: Vec<usize> = local_maxima(&setup.fine, &fine_t).into_iter().filter(|&i| fine_t[i] > u).collect();
    let mut starts: Vec<Vec<f64>> = Vec::new();
    match &setup.scan {
        None => {
            for i in top_local_maxima(&setup.fine, &fine_t, config.starts.max(above.len())) {
                starts.push(setup.fine.points()[i].coord[..dim].to_vec());
            }
        }
        Some(scan) => {
            let scan_t = t_on_grid(&ensemble, &setup.kernel, scan)?;
            for i in top_local_maxima(scan, &scan_t, config.starts) {
                starts.push(scan.points()[i].coord[..dim].to_vec());
            }
            for i in above {
                starts.push(setup.fine.points()[i].coord[..dim].to_vec());
            }
        }
    }
    let eval = PointEvaluator::new(setup.kernel.clone(), &ensemble)?;
    let tol = 1e-3 * setup.manifold.spacing().iter().cloned().fold(f64::INFINITY, f64::min);
    let mut max_inf = max1;
    let mut found: Vec<Vec<f64>> = Vec::new();
    for x0 in starts {
        let a = ascend(&eval, &setup.manifold, &x0, &AscentOptions::default())?;
        max_inf = max_inf.max(a.value);
        if a.value > u && !found.iter().any(|p| p.iter().zip(&a.point).all(|(x, y)| (x - y).abs() < tol)) {
            found.push(a.point);
        }
    }
    Ok(Replication {
        index: b,
        threshold: u,
        lkcs: lkcs.values,
        maxima: [max0, max1, max_inf],
        exceedances: [count0, count1, found.len()],
    })
}

/// Runs the experiment; replications run in parallel and are aggregated in
/// index order, so the report does not depend on the number of threads.
pub fn fwer_experiment(config: &FwerConfig) -> Result<FwerReport> {
    config.validate()?;
    let setup = Setup::new(config)?;
    let outcomes: Vec<Result<Replication>> =
        (0..config.n_reps as u64).into_par_iter().map(|b| run_replication(&setup, config, b)).collect();
    let mut replications = Vec::new();
    let mut failures = Vec::new();
    for (b, o) in outcomes.into_iter().enumerate() {
        match o {
            Ok(r) => replications.push(r),
            Err(e) => failures.push(ReplicationFailure { index: b as u64, message: e.to_string() }),
        }
    }
    let n = replications.len() as f64;
    let modes = ResolutionMode::ALL
        .iter()
        .enumerate()
        .map(|(k, &mode)| {
            let hits = replications.iter().filter(|r| r.maxima[k] > r.threshold).count() as f64;
            let fwer = if n > 0.0 { hits / n } else { f64::NAN };
            let eec = replications.iter().map(|r| r.exceedances[k] as f64).sum::<f64>() / n;
            ModeSummary { mode, fwer, se: (fwer * (1.0 - fwer) / n).sqrt(), eec }
        })
        .collect();
    let mean_threshold = replications.iter().map(|r| r.threshold).sum::<f64>() / n;
    Ok(FwerReport {
        config: config.clone(),
        modes,
        completed: replications.len(),
        failures,
        mean_threshold,
        replications,
    })
}
