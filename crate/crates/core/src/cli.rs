//! The `surf` command-line interface.
//!
//! Every command writes a JSON manifest holding the resolved configuration
//! and its result, and a CSV table. Without `--out` the one selected by
//! `--format` goes to standard output; CSV output starts with `#` comment
//! lines carrying the configuration.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::inference::{
    fwer_experiment, nondegeneracy_check, threshold, FieldType, FwerConfig, FwerReport, NondegeneracyReport,
};
use crate::io::{self, FieldFile};
use crate::jets::JetSource;
use crate::kernel::{GaussianKernel, Order};
use crate::lattice::{make_domain_preset, sample_ensemble, FieldEnsemble, PresetName, RngSpec, VoxelSet};
use crate::lkc::{lkc_compute, lkc_stationary_closed_form, LkcOptions, LkcSource, LkcVector};
use crate::manifold::VoxelManifold;
use crate::surf::SurfSpec;

/// Version reported in manifests.
pub const VERSION: &str = match option_env!("SURF_GIT_DESCRIBE") {
    Some(v) if !v.is_empty() => v,
    _ => env!("CARGO_PKG_VERSION"),
};

#[derive(Debug, Parser)]
#[command(name = "surf", version = VERSION, about = "Super-resolution fields, LKC estimation and EEC thresholds")]
pub struct Cli {
    /// Output format on standard output.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Master seed of every random stream.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (0 uses every core).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Directory receiving `<command>.json` and `<command>.csv`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Print the resolved plan without running it.
    #[arg(long, global = true)]
    pub dry_run: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lipschitz-Killing curvatures of a domain.
    Lkc(LkcArgs),
    /// EEC threshold for given LKCs.
    Threshold(ThresholdArgs),
    /// Monte-Carlo FWER experiment.
    FwerSim(FwerArgs),
    /// Boundary strata and Euler characteristic of a domain.
    Census(DomainArgs),
    /// Voxel-manifold commands.
    Manifold {
        #[command(subcommand)]
        command: ManifoldCommand,
    },
    /// Rank check of the stacked kernel jets.
    CheckNondegeneracy(NondegeneracyArgs),
    /// SuRF commands.
    Surf {
        #[command(subcommand)]
        command: SurfCommand,
    },
    /// Draws a Gaussian ensemble on a preset's data lattice and saves it.
    Sample(SampleArgs),
}

#[derive(Debug, Subcommand)]
pub enum ManifoldCommand {
    /// Boundary strata and Euler characteristic of a domain.
    Census(DomainArgs),
}

#[derive(Debug, Subcommand)]
pub enum SurfCommand {
    /// Evaluates a SuRF or the t-field at points read from a CSV file.
    Eval(EvalArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DomainArgs {
    /// Simulation domain preset.
    #[arg(long)]
    pub preset: Option<PresetName>,
    /// FWHM, which sets the data padding of the stationary presets.
    #[arg(long, default_value_t = 3.0)]
    pub fwhm: f64,
    /// Voxels of the manifold (SRF1 or CSV); overrides the preset domain.
    #[arg(long)]
    pub domain: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceArg {
    WhiteNoise,
    Ensemble,
    ClosedForm,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LkcArgs {
    #[command(flatten)]
    pub domain: DomainArgs,
    #[arg(long, value_enum, default_value_t = SourceArg::WhiteNoise)]
    pub source: SourceArg,
    /// Added resolution.
    #[arg(long, default_value_t = 1)]
    pub r: u32,
    /// Ensemble size when sampling.
    #[arg(long, default_value_t = 50)]
    pub n: usize,
    /// Data file (SRF1 or CSV): the ensemble, or the lattice for white noise.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Adds the face integral to the three-dimensional L1.
    #[arg(long)]
    pub face_term: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldArg {
    Gaussian,
    T,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ThresholdArgs {
    /// CSV with columns L0..LD, as written by `lkc`.
    #[arg(long, conflicts_with = "values")]
    pub lkc: Option<PathBuf>,
    /// Comma-separated L0,L1,...
    #[arg(long, value_delimiter = ',')]
    pub values: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = FieldArg::Gaussian)]
    pub field: FieldArg,
    /// Degrees of freedom of the t-field.
    #[arg(long)]
    pub df: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FwerArgs {
    /// TOML run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub preset: Option<PresetName>,
    #[arg(long)]
    pub fwhm: Option<f64>,
    #[arg(long)]
    pub n_subjects: Option<usize>,
    #[arg(long)]
    pub n_reps: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub r_scan: Option<u32>,
    #[arg(long)]
    pub r_lkc: Option<u32>,
    #[arg(long)]
    pub starts: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct NondegeneracyArgs {
    #[command(flatten)]
    pub domain: DomainArgs,
    /// Data lattice (SRF1 or CSV); defaults to the preset data.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Point `x1,...,xD`; repeatable. Defaults to every voxel centre of the domain.
    #[arg(long, value_delimiter = ',', num_args = 1.., action = clap::ArgAction::Append)]
    pub point: Vec<f64>,
    /// Kernel truncation radius.
    #[arg(long)]
    pub truncation: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderArg {
    Value,
    Gradient,
    Hessian,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvalArgs {
    /// Ensemble file (SRF1 or CSV).
    #[arg(long)]
    pub data: PathBuf,
    /// CSV of query points, one per row, with a header.
    #[arg(long)]
    pub points: PathBuf,
    #[arg(long)]
    pub fwhm: f64,
    #[arg(long)]
    pub truncation: Option<f64>,
    /// Divides by the pointwise standard deviation of white noise.
    #[arg(long)]
    pub normalized: bool,
    /// Evaluates the t-field of all fields instead of one field.
    #[arg(long, conflicts_with = "field_index")]
    pub t_field: bool,
    #[arg(long, default_value_t = 0)]
    pub field_index: usize,
    #[arg(long, value_enum, default_value_t = OrderArg::Value)]
    pub order: OrderArg,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SampleArgs {
    #[arg(long)]
    pub preset: PresetName,
    #[arg(long, default_value_t = 3.0)]
    pub fwhm: f64,
    #[arg(long, default_value_t = 20)]
    pub n: usize,
    /// Replication stream.
    #[arg(long, default_value_t = 0)]
    pub stream: u64,
    /// Output file; `.csv` selects CSV, anything else SRF1.
    #[arg(long)]
    pub file: PathBuf,
}

/// A table for CSV output.
struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }
}

/// What a command produced.
struct Output {
    name: &'static str,
    config: Value,
    result: Value,
    table: Table,
    /// Exit status once the artifacts are written.
    status: i32,
}

fn num(x: f64) -> String {
    format!("{x:?}")
}

/// Runs the CLI on `args` and returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(status) => status,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn execute(cli: &Cli) -> Result<i32> {
    let threads = cli.threads.unwrap_or(match &cli.command {
        Command::FwerSim(a) => match &a.config {
            Some(p) => RunConfig::load(p)?.threads,
            None => 0,
        },
        _ => 0,
    });
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let output = pool.install(|| dispatch(cli))?;
    emit(cli, output)
}

fn dispatch(cli: &Cli) -> Result<Output> {
    let seed = cli.seed.unwrap_or(0);
    match &cli.command {
        Command::Lkc(a) => cmd_lkc(a, seed, cli.dry_run),
        Command::Threshold(a) => cmd_threshold(a, cli.dry_run),
        Command::FwerSim(a) => cmd_fwer(a, cli.seed, cli.dry_run),
        Command::Census(a) | Command::Manifold { command: ManifoldCommand::Census(a) } => cmd_census(a, cli.dry_run),
        Command::CheckNondegeneracy(a) => cmd_nondegeneracy(a, cli.dry_run),
        Command::Surf { command: SurfCommand::Eval(a) } => cmd_eval(a, cli.dry_run),
        Command::Sample(a) => cmd_sample(a, seed, cli.dry_run),
    }
}

fn emit(cli: &Cli, out: Output) -> Result<i32> {
    let manifest = json!({
        "tool": "surf",
        "version": VERSION,
        "command": out.name,
        "config": out.config,
        "result": out.result,
    });
    let json_text = serde_json::to_string_pretty(&manifest)? + "\n";
    let mut csv_text = format!("# surf {} {}\n# config: {}\n", VERSION, out.name, serde_json::to_string(&out.config)?);
    {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&out.table.header)?;
        for r in &out.table.rows {
            w.write_record(r)?;
        }
        csv_text
            .push_str(&String::from_utf8(w.into_inner().map_err(|e| Error::Format(e.to_string()))?).expect("utf-8"));
    }
    match &cli.out {
        Some(dir) if !cli.dry_run => {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join(format!("{}.json", out.name)), &json_text)?;
            std::fs::write(dir.join(format!("{}.csv", out.name)), &csv_text)?;
        }
        _ => {
            let text = match cli.format {
                Format::Json => json_text,
                Format::Csv => csv_text,
            };
            std::io::stdout().write_all(text.as_bytes())?;
        }
    }
    Ok(out.status)
}

fn plan(name: &'static str, config: Value, steps: &str) -> Output {
    Output {
        name,
        config,
        result: json!({ "dry_run": true, "plan": steps }),
        table: Table::new(&["dry_run", "plan"]),
        status: 0,
    }
}

/// The manifold domain and data lattice selected by the arguments.
fn resolve_domain(a: &DomainArgs) -> Result<(Arc<VoxelSet>, Arc<VoxelSet>)> {
    match (&a.domain, a.preset) {
        (Some(path), _) => {
            let dom = Arc::new(io::load(path)?.domain);
            let data = match a.preset {
                Some(p) => make_domain_preset(p.as_str(), a.fwhm)?.data,
                None => dom.clone(),
            };
            Ok((dom, data))
        }
        (None, Some(p)) => {
            let preset = make_domain_preset(p.as_str(), a.fwhm)?;
            Ok((preset.domain, preset.data))
        }
        (None, None) => Err(Error::InvalidArgument("either --preset or --domain is required".into())),
    }
}

fn lkc_table(l: &LkcVector, fwhm: f64) -> Table {
    let mut t = Table::new(&["source", "D", "f", "r", "L0", "L1", "L2", "L3"]);
    let mut row = vec![
        l.source.as_str().to_string(),
        l.dim.to_string(),
        num(fwhm),
        l.r.map(|r| r.to_string()).unwrap_or_default(),
    ];
    for d in 0..=3 {
        row.push(l.values.get(d).map(|&v| num(v)).unwrap_or_default());
    }
    t.rows.push(row);
    t
}

/// Side lengths of a domain that is a full box.
fn box_sides(domain: &VoxelSet) -> Result<Vec<f64>> {
    let lat = domain.lattice()?;
    let ext = lat.extent();
    let count: usize = ext[..domain.dim()].iter().product();
    if count != domain.len() {
        return Err(Error::InvalidArgument("the closed form needs a box-shaped domain".into()));
    }
    Ok((0..domain.dim()).map(|d| ext[d] as f64 * lat.spacing()[d]).collect())
}

fn cmd_lkc(a: &LkcArgs, seed: u64, dry_run: bool) -> Result<Output> {
    let mut config = serde_json::to_value(a)?;
    config["seed"] = json!(seed);
    if dry_run {
        return Ok(plan("lkc", config, "compute LKCs on the refined grid of the domain"));
    }
    let (domain, preset_data) = resolve_domain(&a.domain)?;
    let dim = domain.dim();
    let f = a.domain.fwhm;
    let l = match a.source {
        SourceArg::ClosedForm => lkc_stationary_closed_form(&box_sides(&domain)?, f)?,
        SourceArg::WhiteNoise | SourceArg::Ensemble => {
            let manifold = VoxelManifold::new(domain)?;
            let kernel = GaussianKernel::isotropic(dim, f)?;
            let options = LkcOptions { face_term: a.face_term };
            let file = a.data.as_deref().map(io::load).transpose()?;
            match a.source {
                SourceArg::WhiteNoise => {
                    let data = file.map(|f| Arc::new(f.domain)).unwrap_or(preset_data);
                    lkc_compute(JetSource::WhiteNoise(&data), &kernel, &manifold, a.r, options)?
                }
                _ => {
                    let ens: FieldEnsemble = match file {
                        Some(f) => f.into_ensemble()?,
                        None => sample_ensemble(preset_data, a.n, RngSpec::new(seed, 0), None)?,
                    };
                    lkc_compute(JetSource::Ensemble(&ens), &kernel, &manifold, a.r, options)?
                }
            }
        }
    };
    Ok(Output { name: "lkc", config, result: serde_json::to_value(&l)?, table: lkc_table(&l, f), status: 0 })
}

/// Reads `L0..LD` from the first data row of an LKC CSV.
fn read_lkc_csv(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header = r.headers()?.clone();
    let cols: Vec<usize> = (0..=3).filter_map(|d| header.iter().position(|h| h.trim() == format!("L{d}"))).collect();
    if cols.is_empty() || header.iter().position(|h| h.trim() == "L0") != Some(cols[0]) {
        return Err(Error::Format(format!("{}: expected columns L0..LD", path.display())));
    }
    let rec = r.records().next().ok_or_else(|| Error::Format(format!("{}: no data row", path.display())))??;
    let mut values = Vec::new();
    for c in cols {
        let s = rec.get(c).unwrap_or("").trim();
        if s.is_empty() {
            break;
        }
        values.push(s.parse::<f64>().map_err(|e| Error::Format(format!("{}: {e}", path.display())))?);
    }
    Ok(values)
}

fn cmd_threshold(a: &ThresholdArgs, dry_run: bool) -> Result<Output> {
    let config = serde_json::to_value(a)?;
    if dry_run {
        return Ok(plan("threshold", config, "solve EEC(u) = alpha"));
    }
    let values = match (&a.lkc, &a.values) {
        (Some(p), _) => read_lkc_csv(p)?,
        (None, Some(v)) => v.clone(),
        (None, None) => return Err(Error::InvalidArgument("either --lkc or --values is required".into())),
    };
    let lkcs = LkcVector::from_values(values, LkcSource::Estimate)?;
    let field = match a.field {
        FieldArg::Gaussian => FieldType::Gaussian,
        FieldArg::T => {
            FieldType::student_t(a.df.ok_or_else(|| Error::InvalidArgument("--df is required for t-fields".into()))?)?
        }
    };
    let u = threshold(&lkcs, field, a.alpha)?;
    let mut table = Table::new(&["alpha", "field", "df", "u_alpha"]);
    table.rows.push(vec![
        num(a.alpha),
        format!("{:?}", a.field).to_lowercase(),
        a.df.map(num).unwrap_or_default(),
        num(u),
    ]);
    Ok(Output { name: "threshold", config, result: json!({ "lkcs": lkcs.values, "u_alpha": u }), table, status: 0 })
}

/// Resolves the FWER configuration: file, then flags, then the global seed.
pub fn resolve_fwer(a: &FwerArgs, seed: Option<u64>) -> Result<RunConfig> {
    let mut c = match &a.config {
        Some(p) => RunConfig::load(p)?,
        None => {
            let d = FwerConfig::default();
            RunConfig {
                preset: d.preset,
                fwhm: d.fwhm,
                n_subjects: d.n_subjects,
                n_reps: d.n_reps,
                alpha: d.alpha,
                r_scan: d.r_scan,
                r_lkc: d.r_lkc,
                starts: d.starts,
                seed: d.seed,
                threads: 0,
            }
        }
    };
    if let Some(v) = a.preset {
        c.preset = v;
    }
    if let Some(v) = a.fwhm {
        c.fwhm = v;
    }
    if let Some(v) = a.n_subjects {
        c.n_subjects = v;
    }
    if let Some(v) = a.n_reps {
        c.n_reps = v;
    }
    if let Some(v) = a.alpha {
        c.alpha = v;
    }
    if let Some(v) = a.r_scan {
        c.r_scan = v;
    }
    if let Some(v) = a.r_lkc {
        c.r_lkc = v;
    }
    if let Some(v) = a.starts {
        c.starts = v;
    }
    if let Some(s) = seed {
        c.seed = s;
    }
    c.fwer().validate()?;
    Ok(c)
}

fn fwer_table(r: &FwerReport) -> Table {
    let mut t = Table::new(&[
        "preset",
        "fwhm",
        "n_subjects",
        "n_reps",
        "alpha",
        "r_mode",
        "fwer",
        "se",
        "eec",
        "completed",
        "failures",
    ]);
    for m in &r.modes {
        t.rows.push(vec![
            r.config.preset.to_string(),
            num(r.config.fwhm),
            r.config.n_subjects.to_string(),
            r.config.n_reps.to_string(),
            num(r.config.alpha),
            m.mode.as_str().to_string(),
            num(m.fwer),
            num(m.se),
            num(m.eec),
            r.completed.to_string(),
            r.failures.len().to_string(),
        ]);
    }
    t
}

fn cmd_fwer(a: &FwerArgs, seed: Option<u64>, dry_run: bool) -> Result<Output> {
    let rc = resolve_fwer(a, seed)?;
    // The thread count is an execution detail and does not change results.
    let mut config = serde_json::to_value(&rc)?;
    config.as_object_mut().expect("object").remove("threads");
    if dry_run {
        let steps = format!(
            "{} replications of {} subjects on {} (f = {}): LKCs at r = {}, t({}) threshold at alpha = {}, maxima for r in {{0, 1, inf}}",
            rc.n_reps, rc.n_subjects, rc.preset, rc.fwhm, rc.r_lkc, rc.n_subjects - 1, rc.alpha
        );
        return Ok(plan("fwer-sim", config, &steps));
    }
    let report = fwer_experiment(&rc.fwer())?;
    let status = if report.failures.is_empty() { 0 } else { 1 };
    Ok(Output { name: "fwer-sim", config, result: serde_json::to_value(&report)?, table: fwer_table(&report), status })
}

fn cmd_census(a: &DomainArgs, dry_run: bool) -> Result<Output> {
    let config = serde_json::to_value(a)?;
    if dry_run {
        return Ok(plan("census", config, "classify the boundary strata of the domain"));
    }
    let (domain, _) = resolve_domain(a)?;
    let m = VoxelManifold::new(domain)?;
    let census = m.classify_boundary();
    let chi = m.euler_characteristic();
    let mut table = Table::new(&["stratum", "axis", "type", "count"]);
    for (n, c) in census.faces.iter().enumerate() {
        table.rows.push(vec!["face".into(), n.to_string(), String::new(), c.to_string()]);
    }
    for e in &census.edges {
        for (kind, c) in [("convex", e.convex), ("double-convex", e.double_convex), ("concave", e.concave)] {
            table.rows.push(vec!["edge".into(), e.tangent.to_string(), kind.into(), c.to_string()]);
        }
    }
    table.rows.push(vec!["vertex".into(), String::new(), String::new(), census.vertices.to_string()]);
    table.rows.push(vec!["euler".into(), String::new(), String::new(), chi.to_string()]);
    Ok(Output {
        name: "census",
        config,
        result: json!({ "census": census, "euler_characteristic": chi, "voxels": m.domain().len() }),
        table,
        status: 0,
    })
}

fn cmd_nondegeneracy(a: &NondegeneracyArgs, dry_run: bool) -> Result<Output> {
    let config = serde_json::to_value(a)?;
    if dry_run {
        return Ok(plan("check-nondegeneracy", config, "numeric rank of stacked kernel jets at each point"));
    }
    let (domain, preset_data) = resolve_domain(&a.domain)?;
    let dim = domain.dim();
    let data = match &a.data {
        Some(p) => Arc::new(io::load(p)?.domain),
        None => preset_data,
    };
    let mut kernel = GaussianKernel::isotropic(dim, a.domain.fwhm)?;
    if let Some(r) = a.truncation {
        kernel = kernel.with_truncation(r)?;
    }
    let points: Vec<Vec<f64>> = if a.point.is_empty() {
        domain.points().map(<[f64]>::to_vec).collect()
    } else {
        if !a.point.len().is_multiple_of(dim) {
            return Err(Error::InvalidArgument(format!("--point values must come in groups of {dim}")));
        }
        a.point.chunks(dim).map(<[f64]>::to_vec).collect()
    };
    let reports: Vec<NondegeneracyReport> =
        points.iter().map(|x| nondegeneracy_check(&kernel, &data, x)).collect::<Result<_>>()?;
    let passed = reports.iter().filter(|r| r.pass).count();
    let mut table = Table::new(&["point", "rank", "required", "pass"]);
    for r in &reports {
        let p: Vec<String> = r.point.iter().map(|&v| num(v)).collect();
        table.rows.push(vec![p.join(" "), r.rank.to_string(), r.required.to_string(), r.pass.to_string()]);
    }
    Ok(Output {
        name: "check-nondegeneracy",
        config,
        result: json!({ "points": reports.len(), "passed": passed, "all_pass": passed == reports.len(), "reports": reports }),
        table,
        // A failed check is a valid answer but is flagged in the exit status.
        status: if passed == reports.len() { 0 } else { 3 },
    })
}

fn cmd_eval(a: &EvalArgs, dry_run: bool) -> Result<Output> {
    let config = serde_json::to_value(a)?;
    if dry_run {
        return Ok(plan("surf-eval", config, "evaluate the field at the listed points"));
    }
    let ens = Arc::new(io::load(&a.data)?.into_ensemble()?);
    let dim = ens.domain().dim();
    let mut kernel = GaussianKernel::isotropic(dim, a.fwhm)?;
    if let Some(r) = a.truncation {
        kernel = kernel.with_truncation(r)?;
    }
    let spec = SurfSpec::new(ens, kernel, a.normalized)?;
    let points = io::read_points_csv(std::fs::File::open(&a.points)?)?;
    let order = match a.order {
        OrderArg::Value => Order::Value,
        OrderArg::Gradient => Order::Gradient,
        OrderArg::Hessian => Order::Hessian,
    };
    let mut header: Vec<String> = (1..=dim).map(|d| format!("x{d}")).collect();
    header.push("value".into());
    if order >= Order::Gradient {
        header.extend((1..=dim).map(|d| format!("g{d}")));
    }
    if order >= Order::Hessian && !a.t_field {
        header.extend((1..=dim).flat_map(|d| (1..=dim).map(move |e| format!("h{d}{e}"))));
    }
    let mut table = Table { header, rows: Vec::new() };
    let mut values = Vec::new();
    for x in &points {
        let v = if a.t_field { spec.t_field(x, order)? } else { spec.eval(x, order, a.field_index)? };
        let mut row: Vec<String> = x.iter().map(|&c| num(c)).collect();
        row.push(num(v.value));
        row.extend(v.gradient.iter().map(|&g| num(g)));
        row.extend(v.hessian.iter().map(|&h| num(h)));
        table.rows.push(row);
        values.push(v);
    }
    let result: Vec<Value> = points
        .iter()
        .zip(&values)
        .map(|(x, v)| json!({ "point": x, "value": v.value, "gradient": v.gradient, "hessian": v.hessian }))
        .collect();
    Ok(Output { name: "surf-eval", config, result: Value::Array(result), table, status: 0 })
}

fn cmd_sample(a: &SampleArgs, seed: u64, dry_run: bool) -> Result<Output> {
    let mut config = serde_json::to_value(a)?;
    config["seed"] = json!(seed);
    if dry_run {
        return Ok(plan("sample", config, "draw a standard Gaussian ensemble on the preset data lattice"));
    }
    let preset = make_domain_preset(a.preset.as_str(), a.fwhm)?;
    let ens = sample_ensemble(preset.data, a.n, RngSpec::new(seed, a.stream), None)?;
    let file = FieldFile::from_ensemble(&ens);
    io::save(&a.file, &file)?;
    let mut table = Table::new(&["file", "voxels", "fields"]);
    table.rows.push(vec![a.file.display().to_string(), file.domain.len().to_string(), file.fields.len().to_string()]);
    Ok(Output {
        name: "sample",
        config,
        result: json!({ "file": a.file, "voxels": file.domain.len(), "fields": file.fields.len() }),
        table,
        status: 0,
    })
}
