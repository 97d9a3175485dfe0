//! Batch runner: config, reports, and the five subcommands.
//!
//! Every subcommand writes `<name>.csv` (records) and `<name>_summary.json`
//! into the output directory. Exit codes: 0 success, 1 tolerance breach,
//! 2 construction failure, 64 usage error.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::fields::{default_f0, gaussian_oracle, gaussian_radon, unbalanced_f0, GridField2D, ScalarField};
use crate::geometry::{
    classify_intersection, frame_on_hyperplane, is_degenerate, Direction, Hyperplane, IntersectionKind,
    DEGENERATE_TOL, PLANE_OFFSET_TOL,
};
use crate::nullpair::{
    aligned_grid, build_null_pair_2d, generic_grid, lift_to_dimension, verify_lifted_pair, verify_null_pair_2d,
    BuildOptions, LiftRules, LineFamily2D, Mode, NullPair2D, PATH_FAMILY, PATH_FLOORED, PATH_OFFGRID,
};
use crate::quadrature::{FiberRule, HyperplaneRule};
use crate::transforms::{
    radon_direct, radon_via_rays, separable_control_weight, weight_from_ray_weight, RadonWeight, RayWeight,
};
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_TOLERANCE: i32 = 1;
pub const EXIT_CONSTRUCTION: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

/// Upper limit on integrand evaluations a single run may schedule.
pub const EVALUATION_BUDGET: f64 = 4e9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub s: f64,
    pub theta: Vec<f64>,
    pub value: f64,
    pub normalized: f64,
    pub path: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub max: f64,
    pub mean: f64,
    pub normalization: f64,
    pub weight_min: f64,
    pub weight_max: f64,
    pub wall_time_s: f64,
    #[serde(default)]
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub records: Vec<Record>,
    pub summary: Summary,
}

fn max_mean<'a>(vals: impl Iterator<Item = &'a f64>) -> (f64, f64) {
    let (mut mx, mut sum, mut n) = (0.0f64, 0.0, 0usize);
    for v in vals {
        mx = mx.max(*v);
        sum += v;
        n += 1;
    }
    (mx, if n > 0 { sum / n as f64 } else { 0.0 })
}

impl ResidualReport {
    pub fn new(records: Vec<Record>, normalization: f64, bounds: (f64, f64), wall_time_s: f64) -> Self {
        let (max, mean) = max_mean(records.iter().map(|r| &r.normalized));
        Self {
            records,
            summary: Summary {
                max,
                mean,
                normalization,
                weight_min: bounds.0,
                weight_max: bounds.1,
                wall_time_s,
                skipped: 0,
            },
        }
    }

    /// Max normalized value over records with the given path tag.
    pub fn max_for(&self, path: &str) -> f64 {
        self.records
            .iter()
            .filter(|r| r.path == path)
            .map(|r| r.normalized)
            .fold(0.0, f64::max)
    }

    pub fn count_for(&self, path: &str) -> usize {
        self.records.iter().filter(|r| r.path == path).count()
    }

    /// Columns: path, s, theta_1..theta_d, value, normalized.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), Error> {
        let d = self.records.iter().map(|r| r.theta.len()).max().unwrap_or(0);
        let mut wr = csv::WriterBuilder::new().from_writer(w);
        let mut head = vec!["path".to_string(), "s".to_string()];
        head.extend((1..=d).map(|i| format!("theta_{i}")));
        head.push("value".into());
        head.push("normalized".into());
        wr.write_record(&head)?;
        for r in &self.records {
            let mut row = vec![r.path.clone(), r.s.to_string()];
            row.extend((0..d).map(|i| r.theta.get(i).map(|v| v.to_string()).unwrap_or_default()));
            row.push(r.value.to_string());
            row.push(r.normalized.to_string());
            wr.write_record(&row)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(r: R) -> Result<Vec<Record>, Error> {
        let mut rd = csv::Reader::from_reader(r);
        let head = rd.headers()?.clone();
        let d = head.len().saturating_sub(4);
        let num = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse(format!("{s:?}: {e}")));
        let mut out = Vec::new();
        for rec in rd.records() {
            let rec = rec?;
            let theta = (0..d)
                .filter(|i| !rec[2 + i].is_empty())
                .map(|i| num(&rec[2 + i]))
                .collect::<Result<Vec<_>, _>>()?;
            out.push(Record {
                path: rec[0].to_string(),
                s: num(&rec[1])?,
                theta,
                value: num(&rec[2 + d])?,
                normalized: num(&rec[3 + d])?,
            });
        }
        Ok(out)
    }

    /// Reads records and summary back; max and mean are recomputed from the records.
    pub fn load(csv_path: &Path, summary_path: &Path) -> Result<Self, Error> {
        let records = Self::read_csv(BufReader::new(File::open(csv_path)?))?;
        let stored: serde_json::Value = serde_json::from_reader(BufReader::new(File::open(summary_path)?))?;
        let mut summary: Summary = serde_json::from_value(
            stored
                .get("summary")
                .cloned()
                .ok_or_else(|| Error::Parse("summary file lacks a summary object".into()))?,
        )?;
        let (max, mean) = max_mean(records.iter().map(|r| &r.normalized));
        summary.max = max;
        summary.mean = mean;
        Ok(Self { records, summary })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum F0Choice {
    Default,
    Unbalanced,
    /// Path to a GridField2D CSV.
    Grid(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dimension: usize,
    /// Offsets per direction in generic hyperplane grids.
    pub n_s: usize,
    /// Random directions in generic grids (special directions are added).
    pub n_theta: usize,
    /// Nodes per axis for hyperplane rules and ray fibers.
    pub quad_n: usize,
    pub family_n_phi: usize,
    pub family_n_s: usize,
    pub line_nodes: usize,
    /// Random (s, θ) samples for verify-reduction.
    pub samples: usize,
    pub offgrid_lines: usize,
    pub tolerance: Option<f64>,
    pub direct_tolerance: Option<f64>,
    pub aligned_tolerance: Option<f64>,
    pub f0: F0Choice,
    pub enforce_weight_bound: bool,
    pub out: PathBuf,
    pub seed: u64,
    pub convergence_n: Vec<usize>,
    pub convergence_family: Vec<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dimension: 3,
            n_s: 7,
            n_theta: 16,
            quad_n: 64,
            family_n_phi: 64,
            family_n_s: 64,
            line_nodes: 128,
            samples: 100,
            offgrid_lines: 400,
            tolerance: None,
            direct_tolerance: None,
            aligned_tolerance: None,
            f0: F0Choice::Default,
            enforce_weight_bound: true,
            out: PathBuf::from("out"),
            seed: 0,
            convergence_n: vec![8, 16, 32, 64, 128],
            convergence_family: vec![32, 64, 128],
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Construction(String),
    Runtime(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::WeightBoundViolation { .. } | Error::DegenerateF0 | Error::WeightBounds(_) => {
                CliError::Construction(e.to_string())
            }
            other => CliError::Runtime(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(Error::Io(e))
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if !(2..=6).contains(&self.dimension) {
            return Err(CliError::Usage(format!("dimension must be in [2, 6], got {}", self.dimension)));
        }
        let sizes = [
            ("n_s", self.n_s),
            ("n_theta", self.n_theta),
            ("quad_n", self.quad_n),
            ("family_n_phi", self.family_n_phi),
            ("family_n_s", self.family_n_s),
            ("line_nodes", self.line_nodes),
            ("samples", self.samples),
        ];
        for (name, v) in sizes {
            if v < 2 {
                return Err(CliError::Usage(format!("{name} must be >= 2, got {v}")));
            }
        }
        for (name, t) in [
            ("tolerance", self.tolerance),
            ("direct_tolerance", self.direct_tolerance),
            ("aligned_tolerance", self.aligned_tolerance),
        ] {
            if let Some(t) = t {
                if !(t > 0.0) {
                    return Err(CliError::Usage(format!("{name} must be > 0, got {t}")));
                }
            }
        }
        if self.convergence_n.iter().chain(&self.convergence_family).any(|&n| n < 2) {
            return Err(CliError::Usage("convergence sizes must be >= 2".into()));
        }
        Ok(())
    }

    pub fn f0_field(&self) -> Result<(ScalarField, String), CliError> {
        Ok(match &self.f0 {
            F0Choice::Default => (default_f0(), "default".into()),
            F0Choice::Unbalanced => (unbalanced_f0(), "unbalanced".into()),
            F0Choice::Grid(p) => {
                let g = GridField2D::read_csv(BufReader::new(File::open(p)?))
                    .map_err(|e| CliError::Usage(format!("cannot read f0 grid {}: {e}", p.display())))?;
                (g.into_field(), format!("grid:{}", p.display()))
            }
        })
    }

    fn build_options(&self) -> BuildOptions {
        BuildOptions {
            weight_bound_limit: if self.enforce_weight_bound {
                BuildOptions::default().weight_bound_limit
            } else {
                None
            },
            ..Default::default()
        }
    }

    pub fn family(&self, n_phi: usize, n_s: usize) -> Result<LineFamily2D, CliError> {
        LineFamily2D::new(n_phi, n_s, 1.0, self.line_nodes).map_err(|e| CliError::Usage(e.to_string()))
    }
}

#[derive(Debug, Parser)]
#[command(name = "wradon", about = "Weighted Radon transforms, dimension reduction and lifted null pairs")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// JSON config; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub dim: Option<usize>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Copy, Subcommand, PartialEq, Eq)]
pub enum Command {
    /// Direct vs ray-decomposition agreement on control weights.
    VerifyReduction,
    /// Build, verify and export the 2D null pair.
    NullPair,
    /// Lift the pair to R^d and check R_W f = 0 on both paths.
    LiftVerify,
    /// Line / plane / empty classification table.
    Classify,
    /// Error against quadrature and family resolution.
    Convergence,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::VerifyReduction => "verify-reduction",
            Command::NullPair => "null-pair",
            Command::LiftVerify => "lift-verify",
            Command::Classify => "classify",
            Command::Convergence => "convergence",
        }
    }
}

pub fn load_config(common: &CommonArgs) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &common.config {
        Some(p) => {
            let f = File::open(p).map_err(|e| CliError::Usage(format!("cannot open config {}: {e}", p.display())))?;
            serde_json::from_reader(BufReader::new(f))
                .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", p.display())))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(d) = common.dim {
        cfg.dimension = d;
    }
    if let Some(o) = &common.out {
        cfg.out = o.clone();
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if common.tolerance.is_some() {
        cfg.tolerance = common.tolerance;
    }
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Debug, Serialize)]
struct SummaryFile<'a, E: Serialize> {
    command: &'a str,
    config: &'a ExperimentConfig,
    summary: &'a Summary,
    passed: bool,
    details: E,
}

fn write_outputs<E: Serialize>(
    cfg: &ExperimentConfig,
    name: &str,
    report: &ResidualReport,
    passed: bool,
    details: E,
) -> Result<(), CliError> {
    std::fs::create_dir_all(&cfg.out)?;
    let stem = name.replace('-', "_");
    report.write_csv(BufWriter::new(File::create(cfg.out.join(format!("{stem}.csv")))?))?;
    let file = SummaryFile {
        command: name,
        config: cfg,
        summary: &report.summary,
        passed,
        details,
    };
    let mut w = BufWriter::new(File::create(cfg.out.join(format!("{stem}_summary.json")))?);
    serde_json::to_writer_pretty(&mut w, &file).map_err(Error::from)?;
    w.flush()?;
    Ok(())
}

fn check_budget(evals: f64) -> Result<(), CliError> {
    if evals > EVALUATION_BUDGET {
        return Err(CliError::Usage(format!(
            "requested grid needs about {evals:.2e} integrand evaluations, above the budget of {EVALUATION_BUDGET:.0e}; reduce quad_n or the grid"
        )));
    }
    Ok(())
}

/// Random non-degenerate directions from a seeded stream.
pub fn random_nondegenerate(d: usize, rng: &mut ChaCha8Rng) -> Direction {
    loop {
        let t = Direction::random(d, rng);
        if d < 3 || !is_degenerate(&t, 1e-3).unwrap_or(false) {
            return t;
        }
    }
}

pub struct Outcome {
    pub report: ResidualReport,
    pub passed: bool,
}

/// Direct vs ray-decomposition agreement, relative to 1 + |direct|, plus
/// seed-0 vs seed-1 frame invariance of the decomposition.
pub fn cmd_verify_reduction(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let d = cfg.dimension;
    if d < 3 {
        return Err(CliError::Usage("verify-reduction needs dimension >= 3".into()));
    }
    let tol = cfg.tolerance.unwrap_or(1e-8);
    let n = cfg.quad_n;
    check_budget(3.0 * 2.0 * cfg.samples as f64 * (n as f64).powi(d as i32 - 1))?;
    let start = Instant::now();
    let r = 6.0;
    let f = gaussian_oracle(d, r)?;
    let hrule = HyperplaneRule::uniform(d, n, r)?;
    let fiber = FiberRule::uniform(d - 2, n, r)?;
    let line = crate::quadrature::gauss_legendre_rule(n, r)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let planes: Vec<Hyperplane> = (0..cfg.samples)
        .map(|_| {
            let s = 4.0 * rng.gen::<f64>() - 2.0;
            Hyperplane::new(s, random_nondegenerate(d, &mut rng))
        })
        .collect();
    let controls = [("unit", RayWeight::unit(d)), ("separable", separable_control_weight(d))];
    let mut records = Vec::new();
    for (tag, w) in &controls {
        let big = weight_from_ray_weight(w, |_| 1.0, r).or_else(|_| {
            let c = w.lower;
            weight_from_ray_weight(w, move |_| c, r)
        })?;
        let rows: Vec<Result<(f64, f64, f64), Error>> = planes
            .par_iter()
            .map(|p| {
                let direct = radon_direct(&big, &f, p, &hrule)?;
                let f0 = frame_on_hyperplane(&p.theta, 0)?;
                let f1 = frame_on_hyperplane(&p.theta, 1)?;
                let rays0 = radon_via_rays(w, &f, p, &f0, &fiber, &line)?;
                let rays1 = radon_via_rays(w, &f, p, &f1, &fiber, &line)?;
                Ok((direct, rays0, rays1))
            })
            .collect();
        for (p, row) in planes.iter().zip(rows) {
            let (direct, rays0, rays1) = row?;
            records.push(Record {
                s: p.s,
                theta: p.theta.as_slice().to_vec(),
                value: rays0 - direct,
                normalized: (rays0 - direct).abs() / (1.0 + direct.abs()),
                path: format!("cross-path:{tag}"),
            });
            records.push(Record {
                s: p.s,
                theta: p.theta.as_slice().to_vec(),
                value: rays1 - rays0,
                normalized: (rays1 - rays0).abs() / (1.0 + rays0.abs()),
                path: format!("frame-invariance:{tag}"),
            });
        }
    }
    let report = ResidualReport::new(records, 1.0, (0.875, 2.25), start.elapsed().as_secs_f64());
    let passed = report.summary.max <= tol;
    write_outputs(cfg, Command::VerifyReduction.name(), &report, passed, serde_json::json!({ "tolerance": tol }))?;
    Ok(Outcome { report, passed })
}

pub fn build_pair(cfg: &ExperimentConfig, n_phi: usize, n_s: usize) -> Result<NullPair2D, CliError> {
    let (f0, name) = cfg.f0_field()?;
    let fam = cfg.family(n_phi, n_s)?;
    Ok(build_null_pair_2d(&f0, &name, &fam, cfg.build_options())?)
}

#[derive(Debug, Serialize)]
struct NullPairDetails {
    tolerance: f64,
    family_max: f64,
    floored_lines: usize,
    floored_max_abs: f64,
    floor_bound: f64,
    offgrid_max: f64,
    sup_lambda_f0: f64,
    rescale: f64,
    roundtrip_identical: bool,
}

pub fn cmd_null_pair(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let tol = cfg.tolerance.unwrap_or(1e-13);
    let pair = build_pair(cfg, cfg.family_n_phi, cfg.family_n_s)?;
    let report = verify_null_pair_2d(&pair, cfg.offgrid_lines, cfg.seed);
    std::fs::create_dir_all(&cfg.out)?;
    let hp = cfg.out.join("pair_header.json");
    let tp = cfg.out.join("lambda.csv");
    pair.export(BufWriter::new(File::create(&hp)?), BufWriter::new(File::create(&tp)?))?;
    let back = NullPair2D::import(
        &pair.f0,
        BufReader::new(File::open(&hp)?),
        BufReader::new(File::open(&tp)?),
    )?;
    let again = verify_null_pair_2d(&back, cfg.offgrid_lines, cfg.seed);
    let roundtrip_identical = again.records == report.records && back.lambda == pair.lambda;
    let floored_max_abs = report
        .records
        .iter()
        .filter(|r| r.path == PATH_FLOORED)
        .map(|r| r.value.abs())
        .fold(0.0, f64::max);
    let details = NullPairDetails {
        tolerance: tol,
        family_max: report.max_for(PATH_FAMILY),
        floored_lines: report.count_for(PATH_FLOORED),
        floored_max_abs,
        floor_bound: pair.floor_bound(),
        offgrid_max: report.max_for(PATH_OFFGRID),
        sup_lambda_f0: pair.sup_lambda_f0,
        rescale: pair.rescale,
        roundtrip_identical,
    };
    let passed = details.family_max <= tol && floored_max_abs <= details.floor_bound && roundtrip_identical;
    write_outputs(cfg, Command::NullPair.name(), &report, passed, &details)?;
    Ok(Outcome { report, passed })
}

#[derive(Debug, Serialize)]
struct LiftDetails {
    aligned_max: f64,
    aligned_tolerance: f64,
    reduction_max: f64,
    reduction_tolerance: f64,
    direct_max: f64,
    direct_tolerance: f64,
    degenerate_direct_max: f64,
    degenerate_weight_max_abs_diff: f64,
    weight_bounds: (f64, f64),
    lifted_weight_bounds: (f64, f64),
    positive_weight: bool,
}

/// Direct residuals restricted to θ in the degenerate set.
fn degenerate_rows(rep: &ResidualReport) -> f64 {
    rep.records
        .iter()
        .filter(|r| r.theta.len() >= 3 && r.theta[0].abs() <= DEGENERATE_TOL && r.theta[1].abs() <= DEGENERATE_TOL)
        .map(|r| r.normalized)
        .fold(0.0, f64::max)
}

pub fn cmd_lift_verify(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let d = cfg.dimension;
    if d < 3 {
        return Err(CliError::Usage("lift-verify needs dimension >= 3".into()));
    }
    let red_tol = cfg.tolerance.unwrap_or(1e-4);
    let dir_tol = cfg.direct_tolerance.unwrap_or(1e-3);
    let ali_tol = cfg.aligned_tolerance.unwrap_or(1e-12);
    let start = Instant::now();
    let pair = Arc::new(build_pair(cfg, cfg.family_n_phi, cfg.family_n_s)?);
    let lp = lift_to_dimension(pair.clone(), d)?;
    let rules = LiftRules {
        direct_n: cfg.quad_n,
        fiber_n: cfg.quad_n,
    };
    let aligned = aligned_grid(&pair.family, d, (cfg.family_n_phi / 8).max(1), (cfg.family_n_s / 16).max(1));
    let generic = generic_grid(d, cfg.n_s, cfg.n_theta, 2f64.sqrt(), cfg.seed);
    let n = cfg.quad_n as f64;
    let per_plane = n.powi(d as i32 - 1) + n.powi(d as i32 - 2) * cfg.line_nodes as f64;
    check_budget(2.0 * per_plane * (aligned.len() + 2 * generic.len()) as f64)?;
    let ra = verify_lifted_pair(&lp, &aligned, Mode::Reduction, rules)?;
    let rg = verify_lifted_pair(&lp, &generic, Mode::Reduction, rules)?;
    let dg = verify_lifted_pair(&lp, &generic, Mode::Direct, rules)?;
    // W on the degenerate set against w₀((x₁,x₂), e₁)
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x2e3);
    let mut degenerate_weight: f64 = 0.0;
    let e3 = Direction::basis(d, 2);
    for _ in 0..1000 {
        let x: Vec<f64> = (0..d).map(|_| 2.0 * rng.gen::<f64>() - 1.0).collect();
        let got = lp.big_w.evaluate(&x, e3.as_slice());
        let want = pair.eval_w0(&x[..2], &[1.0, 0.0]);
        degenerate_weight = degenerate_weight.max((got - want).abs());
    }
    let details = LiftDetails {
        aligned_max: ra.summary.max,
        aligned_tolerance: ali_tol,
        reduction_max: rg.summary.max,
        reduction_tolerance: red_tol,
        direct_max: dg.summary.max,
        direct_tolerance: dir_tol,
        degenerate_direct_max: degenerate_rows(&dg),
        degenerate_weight_max_abs_diff: degenerate_weight,
        weight_bounds: pair.bounds,
        lifted_weight_bounds: (lp.big_w.lower, lp.big_w.upper),
        positive_weight: lp.big_w.is_positive(),
    };
    let mut records = Vec::new();
    for (rep, tag) in [(&ra, "reduction-aligned"), (&rg, "reduction-generic"), (&dg, "direct-generic")] {
        records.extend(rep.records.iter().cloned().map(|mut r| {
            r.path = tag.to_string();
            r
        }));
    }
    records.push(Record {
        s: 0.0,
        theta: e3.as_slice().to_vec(),
        value: degenerate_weight,
        normalized: degenerate_weight,
        path: "degenerate-weight".into(),
    });
    let mut report = ResidualReport::new(records, dg.summary.normalization, pair.bounds, start.elapsed().as_secs_f64());
    report.summary.skipped = rg.summary.skipped;
    let passed = details.aligned_max <= ali_tol
        && details.reduction_max <= red_tol
        && details.direct_max <= dir_tol
        && degenerate_weight == 0.0
        && details.positive_weight;
    write_outputs(cfg, Command::LiftVerify.name(), &report, passed, &details)?;
    Ok(Outcome { report, passed })
}

/// Classification table over seeded and special (s, θ) with the iff check.
pub fn cmd_classify(cfg: &ExperimentConfig) -> Result<(Outcome, String), CliError> {
    let d = cfg.dimension;
    if d < 3 {
        return Err(CliError::Usage("classify needs dimension >= 3".into()));
    }
    let start = Instant::now();
    let mut planes = vec![
        Hyperplane::new(0.7, Direction::basis(d, 0)),
        Hyperplane::new(0.0, Direction::basis(d, 2)),
        Hyperplane::new(1.0, Direction::basis(d, 2)),
        Hyperplane::new(-0.3, Direction::basis(d, 1).neg()),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for k in 0..cfg.samples {
        let theta = if k % 3 == 0 {
            let mut v = vec![0.0; d];
            for c in v.iter_mut().skip(2) {
                *c = rng.gen::<f64>() - 0.5;
            }
            Direction::normalized(v).map_err(CliError::Runtime)?
        } else {
            Direction::random(d, &mut rng)
        };
        let s = if k % 2 == 0 { 0.0 } else { 2.0 * rng.gen::<f64>() - 1.0 };
        planes.push(Hyperplane::new(s, theta));
    }
    let mut table = format!("{:>10}  {:>8}  {:<40}\n", "s", "kind", "theta");
    let mut records = Vec::new();
    let mut mismatches = 0usize;
    for p in &planes {
        let kind = classify_intersection(p)?;
        let degenerate = is_degenerate(&p.theta, DEGENERATE_TOL)?;
        let expect = match (degenerate, p.s.abs() <= PLANE_OFFSET_TOL) {
            (false, _) => IntersectionKind::Line,
            (true, true) => IntersectionKind::Plane,
            (true, false) => IntersectionKind::Empty,
        };
        let bad = kind != expect;
        mismatches += bad as usize;
        let th: Vec<String> = p.theta.as_slice().iter().map(|v| format!("{v:.4}")).collect();
        table.push_str(&format!("{:>10.4}  {:>8}  ({})\n", p.s, format!("{kind:?}"), th.join(", ")));
        records.push(Record {
            s: p.s,
            theta: p.theta.as_slice().to_vec(),
            value: if bad { 1.0 } else { 0.0 },
            normalized: if bad { 1.0 } else { 0.0 },
            path: format!("{kind:?}").to_lowercase(),
        });
    }
    table.push_str(&format!("{} rows, {} mismatches\n", planes.len(), mismatches));
    let report = ResidualReport::new(records, 1.0, (1.0, 1.0), start.elapsed().as_secs_f64());
    let passed = mismatches == 0;
    write_outputs(cfg, Command::Classify.name(), &report, passed, serde_json::json!({ "mismatches": mismatches }))?;
    Ok((Outcome { report, passed }, table))
}

/// Rows: Gaussian error vs nodes per axis, off-family null-pair residual vs
/// family resolution, and a zero-field control.
///
/// The null-pair rows study interpolation order only, so the weight bound is
/// not enforced here.
pub fn cmd_convergence(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let d = cfg.dimension;
    let start = Instant::now();
    let r = 6.0;
    let f = gaussian_oracle(d, r)?;
    let ns: Vec<usize> = cfg.convergence_n.clone();
    check_budget(ns.iter().map(|&n| 8.0 * (n as f64).powi(d as i32 - 1)).sum())?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let thetas: Vec<Direction> = (0..2).map(|_| Direction::random(d, &mut rng)).collect();
    let mut records = Vec::new();
    for &n in &ns {
        let rule = HyperplaneRule::uniform(d, n, r)?;
        let mut err: f64 = 0.0;
        for t in &thetas {
            for s in [0.0, 0.5, 1.0, 2.0] {
                let v = radon_direct(&RadonWeight::unit(d), &f, &Hyperplane::new(s, t.clone()), &rule)?;
                let exact = gaussian_radon(d, s);
                err = err.max((v - exact).abs() / exact);
            }
        }
        records.push(Record {
            s: n as f64,
            theta: vec![],
            value: err,
            normalized: err,
            path: "gaussian".into(),
        });
    }
    let zero = ScalarField::new(d, 1.0, crate::fields::Smoothness::Analytic, |_| 0.0);
    for &n in &ns {
        let rule = HyperplaneRule::uniform(d, n, 1.0)?;
        let v = radon_direct(&RadonWeight::unit(d), &zero, &Hyperplane::new(0.0, thetas[0].clone()), &rule)?;
        records.push(Record {
            s: n as f64,
            theta: vec![],
            value: v,
            normalized: v.abs(),
            path: "zero-field".into(),
        });
    }
    let mut opts = cfg.clone();
    opts.enforce_weight_bound = false;
    for &m in &cfg.convergence_family {
        let pair = build_pair(&opts, m, m)?;
        let rep = verify_null_pair_2d(&pair, cfg.offgrid_lines, cfg.seed);
        let v = rep.max_for(PATH_OFFGRID);
        records.push(Record {
            s: m as f64,
            theta: vec![],
            value: v,
            normalized: v,
            path: "null-pair-offgrid".into(),
        });
    }
    let report = ResidualReport::new(records, 1.0, (0.0, 0.0), start.elapsed().as_secs_f64());
    write_outputs(cfg, Command::Convergence.name(), &report, true, serde_json::json!({}))?;
    Ok(Outcome { report, passed: true })
}

/// Runs one subcommand and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let cfg = match load_config(&cli.common) {
        Ok(c) => c,
        Err(e) => return report_error(e),
    };
    let res = match cli.command {
        Command::VerifyReduction => cmd_verify_reduction(&cfg),
        Command::NullPair => cmd_null_pair(&cfg),
        Command::LiftVerify => cmd_lift_verify(&cfg),
        Command::Classify => cmd_classify(&cfg).map(|(o, table)| {
            print!("{table}");
            o
        }),
        Command::Convergence => cmd_convergence(&cfg),
    };
    match res {
        Ok(o) => {
            println!(
                "{}: max {:.3e} over {} records ({})",
                cli.command.name(),
                o.report.summary.max,
                o.report.records.len(),
                if o.passed { "ok" } else { "tolerance breach" }
            );
            if o.passed {
                EXIT_OK
            } else {
                EXIT_TOLERANCE
            }
        }
        Err(e) => report_error(e),
    }
}

fn report_error(e: CliError) -> i32 {
    match e {
        CliError::Usage(m) => {
            eprintln!("usage error: {m}");
            EXIT_USAGE
        }
        CliError::Construction(m) => {
            eprintln!("construction failed: {m}");
            EXIT_CONSTRUCTION
        }
        CliError::Runtime(e) => {
            eprintln!("error: {e}");
            EXIT_TOLERANCE
        }
    }
}
