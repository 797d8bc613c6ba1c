//! Experiment configuration and dispatch for the `gharm` binary.
//!
//! A run is described by a TOML [`ExperimentConfig`]; every operation
//! writes its artifacts below `out_dir`. CSV tables follow [`crate::table`].

pub mod checks;

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::QuadratureConfig;
use crate::field::{io, FieldError, Grid, SampledField};
use crate::fracops::{self, FracError, FracRoute};
use crate::group::GroupSpec;
use crate::heat::cache::KernelCache;
use crate::heat::{HeatError, HeatKind, HeatModel, PdeSettings};
use crate::meanvalue::{MeanValueError, VerificationReport};
use crate::quad::QuadError;
use crate::specfun::{phi_alpha_euclidean, SpecFunError};
use crate::squarefn::{self, SquareFnError, SquareFnResult};
use crate::strichartz::{self, DifferenceOrder, StrichartzError, StrichartzParams};
use crate::table::{Cell, Table};

pub use checks::{CheckContext, CHECK_NAMES};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error("usage: {0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl HarnessError {
    /// 1 for usage, configuration and file problems, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Numerical(_) => 2,
            _ => 1,
        }
    }

    fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        HarnessError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        }
    }
}

impl From<FieldError> for HarnessError {
    fn from(e: FieldError) -> Self {
        match e {
            FieldError::Io(_) | FieldError::Format(_) | FieldError::Grid(_) => HarnessError::Usage(e.to_string()),
            other => HarnessError::Numerical(other.to_string()),
        }
    }
}

macro_rules! numerical_from {
    ($($t:ty),*) => {$(
        impl From<$t> for HarnessError {
            fn from(e: $t) -> Self {
                HarnessError::Numerical(e.to_string())
            }
        }
    )*};
}

numerical_from!(
    HeatError,
    FracError,
    SquareFnError,
    StrichartzError,
    MeanValueError,
    SpecFunError,
    QuadError
);

/// Square-function route of the `gfun` operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GfunRoute {
    /// g_α with `exponent` = α.
    GAlpha,
    /// G_s with `exponent` = s.
    GS,
    /// g_φ with φ = φ_α, `exponent` = α.
    GPhiAlpha,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Operation {
    /// h_t sampled on the configured grid.
    Kernel { t: f64, output: String },
    Fracpow {
        alpha: f64,
        route: FracRoute,
        input: PathBuf,
        output: String,
    },
    Gfun {
        route: GfunRoute,
        exponent: f64,
        input: PathBuf,
        output: String,
    },
    Strichartz {
        order: DifferenceOrder,
        s: f64,
        p: f64,
        inputs: Vec<PathBuf>,
        output: String,
        #[serde(default = "default_spread")]
        spread_bound: f64,
    },
    /// (r, φ_α(r)) on ℝⁿ.
    Figure {
        n: usize,
        alpha: f64,
        r_max: f64,
        points: usize,
        output: String,
    },
    /// Named checks, or `all`.
    Verify { checks: Vec<String> },
}

fn default_spread() -> f64 {
    10.0
}

fn default_group() -> String {
    "R1".into()
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("gharm-out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Built-in name (`R<n>`, `H1`) or path to a group description file.
    #[serde(default = "default_group")]
    pub group: String,
    /// `origin:spacing:count` per axis; defaults depend on the group.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<String>,
    /// Defaults to the explicit kernel on ℝⁿ and the quadrature kernel on H¹.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heat: Option<HeatKind>,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default)]
    pub pde: PdeSettings,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    /// Directory for cached H¹ kernels.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cache_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operation: Option<Operation>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            group: default_group(),
            grid: None,
            heat: None,
            quadrature: QuadratureConfig::default(),
            pde: PdeSettings::default(),
            seed: 0,
            out_dir: default_out_dir(),
            cache_dir: None,
            operation: None,
        }
    }
}

/// Default grid per built-in group: 4096 nodes on ℝ¹, 256² on ℝ², 64³ on H¹.
pub fn default_grid_spec(group: &str) -> Option<&'static str> {
    match group {
        "R1" => Some("-20.475:0.01:4096"),
        "R2" => Some("-12.75:0.1:256,-12.75:0.1:256"),
        "H1" => Some("-4.725:0.15:64,-4.725:0.15:64,-9.45:0.3:64"),
        _ => None,
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            HarnessError::Config(m) => HarnessError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Fails for seeds above `i64::MAX`, which TOML integers cannot hold.
    pub fn to_toml_string(&self) -> Result<String, HarnessError> {
        toml::to_string(self).map_err(|e| HarnessError::Config(format!("cannot write config: {e}")))
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        self.quadrature
            .validate()
            .map_err(|e| HarnessError::Config(format!("quadrature: {}", e.0)))
    }

    pub fn resolve_group(&self) -> Result<Arc<GroupSpec<f64>>, HarnessError> {
        if let Some(g) = GroupSpec::builtin(&self.group) {
            return Ok(Arc::new(g));
        }
        let path = Path::new(&self.group);
        let text = fs::read_to_string(path).map_err(|e| {
            HarnessError::Config(format!(
                "group `{}` is neither built in nor a readable file ({e})",
                self.group
            ))
        })?;
        GroupSpec::from_text(&text)
            .map(Arc::new)
            .map_err(|e| HarnessError::Config(format!("group file {}: {e}", path.display())))
    }

    pub fn resolve_grid(&self, group: &GroupSpec<f64>) -> Result<Grid<f64>, HarnessError> {
        let spec = match &self.grid {
            Some(s) => s.as_str(),
            None => default_grid_spec(group.name())
                .ok_or_else(|| HarnessError::Config(format!("key `grid` is required for group `{}`", group.name())))?,
        };
        Grid::parse_spec(spec).map_err(|e| HarnessError::Config(format!("grid: {e}")))
    }

    pub fn heat_model(&self, group: Arc<GroupSpec<f64>>) -> Result<HeatModel<f64>, HarnessError> {
        let m = match self.heat {
            Some(kind) => HeatModel::new(group, kind, self.quadrature.clone()),
            None => HeatModel::default_for(group, self.quadrature.clone()),
        }
        .map_err(|e| HarnessError::Config(format!("heat: {e}")))?;
        Ok(m.with_pde_settings(self.pde.clone()))
    }

    fn out_path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    pub fn check_context(&self) -> CheckContext {
        CheckContext {
            seed: self.seed,
            cfg: self.quadrature.clone(),
            pde: self.pde.clone(),
        }
    }
}

/// Artifacts written by a run and the reports of any checks.
#[derive(Debug, Default)]
pub struct RunSummary {
    pub artifacts: Vec<PathBuf>,
    pub reports: Vec<VerificationReport<f64>>,
}

impl RunSummary {
    pub fn failures(&self) -> usize {
        self.reports.iter().filter(|r| !r.pass).count()
    }
}

fn write_table(path: &Path, t: &Table) -> Result<(), HarnessError> {
    fs::write(path, t.to_csv_string()).map_err(|e| HarnessError::io(path, e))
}

fn save_field(path: &Path, f: &SampledField<f64>) -> Result<(), HarnessError> {
    io::save(f, path).map_err(|e| HarnessError::io(path, e))
}

fn load_field(path: &Path, group: &Arc<GroupSpec<f64>>) -> Result<SampledField<f64>, HarnessError> {
    io::load(path, Some(group.clone())).map_err(|e| HarnessError::io(path, e))
}

/// `<stem>_<suffix>.csv` next to an output name.
fn sibling(name: &str, suffix: &str) -> String {
    let stem = Path::new(name).file_stem().and_then(|s| s.to_str()).unwrap_or(name);
    format!("{stem}_{suffix}.csv")
}

/// Executes the configured operation.
pub fn run(cfg: &ExperimentConfig) -> Result<RunSummary, HarnessError> {
    let op = cfg
        .operation
        .as_ref()
        .ok_or_else(|| HarnessError::Usage("no operation given".into()))?;
    fs::create_dir_all(&cfg.out_dir).map_err(|e| HarnessError::io(&cfg.out_dir, e))?;
    let mut out = RunSummary::default();
    match op {
        Operation::Figure {
            n,
            alpha,
            r_max,
            points,
            output,
        } => {
            if *points < 2 || !(*r_max > 0.0) {
                return Err(HarnessError::Usage("figure needs points ≥ 2 and r_max > 0".into()));
            }
            let mut t = Table::new(&["r", "phi_alpha"]);
            for i in 0..*points {
                let r = r_max * i as f64 / (*points - 1) as f64;
                t.push(vec![r.into(), phi_alpha_euclidean(*n, *alpha, r)?.into()]);
            }
            let path = cfg.out_path(output);
            write_table(&path, &t)?;
            out.artifacts.push(path);
        }
        Operation::Kernel { t, output } => {
            let g = cfg.resolve_group()?;
            let grid = cfg.resolve_grid(&g)?;
            let m = cfg.heat_model(g)?;
            let field = match &cfg.cache_dir {
                Some(dir) => {
                    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
                    KernelCache::new(dir).kernel_field(&m, *t, &grid)?
                }
                None => m.kernel_field(*t, &grid)?,
            };
            let path = cfg.out_path(output);
            save_field(&path, &field)?;
            out.artifacts.push(path);
        }
        Operation::Fracpow {
            alpha,
            route,
            input,
            output,
        } => {
            let g = cfg.resolve_group()?;
            let m = cfg.heat_model(g.clone())?;
            let f = load_field(input, &g)?;
            let mut diag = Table::new(&["route", "alpha", "quantity", "value"]);
            let field = match route {
                FracRoute::Spectral => fracops::frac_power_spectral(&m, &f, *alpha)?,
                FracRoute::Pointwise => {
                    let (field, change) = fracops::frac_power_pointwise_field(&m, &f, *alpha, &cfg.quadrature)?;
                    diag.push(vec![
                        route.name().into(),
                        (*alpha).into(),
                        "eps_change".into(),
                        change.into(),
                    ]);
                    field
                }
                FracRoute::Balakrishnan => {
                    let r = fracops::frac_power_balakrishnan(&m, &f, *alpha, &cfg.quadrature)?;
                    for (k, v) in [
                        ("residual", r.residual),
                        ("exact_until", r.exact_until),
                        ("tail_bound", r.tail_bound),
                    ] {
                        diag.push(vec![route.name().into(), (*alpha).into(), k.into(), v.into()]);
                    }
                    r.field
                }
            };
            diag.push(vec![
                route.name().into(),
                (*alpha).into(),
                "l2_norm".into(),
                field.lp_norm(2.0)?.into(),
            ]);
            let path = cfg.out_path(output);
            save_field(&path, &field)?;
            let dpath = cfg.out_path(&sibling(output, "diagnostics"));
            write_table(&dpath, &diag)?;
            out.artifacts.extend([path, dpath]);
        }
        Operation::Gfun {
            route,
            exponent,
            input,
            output,
        } => {
            let g = cfg.resolve_group()?;
            let m = cfg.heat_model(g.clone())?;
            let f = load_field(input, &g)?;
            let r = match route {
                GfunRoute::GAlpha => squarefn::g_alpha(&m, &f, *exponent, &cfg.quadrature)?,
                GfunRoute::GS => squarefn::g_s(&m, &f, *exponent, &cfg.quadrature)?,
                GfunRoute::GPhiAlpha => {
                    let phi = squarefn::PhiAlpha::new(&m, *exponent, &cfg.quadrature)?;
                    squarefn::g_phi(&f, &|x: &[f64]| phi.eval(x), &cfg.quadrature)?
                }
            };
            let path = cfg.out_path(output);
            save_field(&path, &r.field)?;
            let dpath = cfg.out_path(&sibling(output, "diagnostics"));
            write_table(&dpath, &gfun_diagnostics(&r))?;
            out.artifacts.extend([path, dpath]);
        }
        Operation::Strichartz {
            order,
            s,
            p,
            inputs,
            output,
            spread_bound,
        } => {
            if inputs.is_empty() {
                return Err(HarnessError::Usage("strichartz needs at least one input field".into()));
            }
            let g = cfg.resolve_group()?;
            let m = cfg.heat_model(g.clone())?;
            let prm = StrichartzParams::new(*order, *s, *p).map_err(|e| HarnessError::Usage(e.to_string()))?;
            let mut family = Vec::new();
            for input in inputs {
                let f = load_field(input, &g)?;
                let label = input
                    .file_stem()
                    .and_then(|s| s.to_str())
                    .unwrap_or("field")
                    .to_string();
                let sf = strichartz::strichartz_field(&f, &prm)?;
                let path = cfg.out_path(&format!(
                    "{}_{label}.{}",
                    Path::new(output).file_stem().and_then(|s| s.to_str()).unwrap_or(output),
                    extension_of(output)
                ));
                save_field(&path, &sf.field)?;
                out.artifacts.push(path);
                family.push((label, f));
            }
            let report = strichartz::equivalence_report(&m, &family, &prm, *spread_bound);
            let rpath = cfg.out_path(&sibling(output, "equivalence"));
            write_table(&rpath, &samples_table(std::slice::from_ref(&report)))?;
            out.artifacts.push(rpath);
            out.reports.push(report);
        }
        Operation::Verify { checks } => {
            let ctx = cfg.check_context();
            let names = checks::expand(checks)?;
            for name in &names {
                out.reports.extend(checks::run_check(name, &ctx)?);
            }
            let spath = cfg.out_path("verify_samples.csv");
            write_table(&spath, &samples_table(&out.reports))?;
            let mpath = cfg.out_path("verify_summary.csv");
            write_table(&mpath, &summary_table(&out.reports))?;
            out.artifacts.extend([spath, mpath]);
        }
    }
    Ok(out)
}

fn extension_of(name: &str) -> &str {
    Path::new(name).extension().and_then(|e| e.to_str()).unwrap_or("ghf")
}

fn gfun_diagnostics(r: &SquareFnResult<f64>) -> Table {
    let mut t = Table::new(&["quantity", "t", "value"]);
    for (start, mass) in &r.diagnostics.decade_mass {
        t.push(vec!["decade_mass".into(), (*start).into(), (*mass).into()]);
    }
    let first = r.t_grid.first().copied().unwrap_or(0.0);
    let last = r.t_grid.last().copied().unwrap_or(0.0);
    t.push(vec!["tail_low".into(), first.into(), r.diagnostics.tail_low.into()]);
    t.push(vec!["tail_high".into(), last.into(), r.diagnostics.tail_high.into()]);
    t.push(vec![
        "total".into(),
        Cell::Text(String::new()),
        r.diagnostics.total.into(),
    ]);
    t.push(vec!["l2_norm".into(), Cell::Text(String::new()), r.lp.into()]);
    t
}

/// One row per (check, sample).
pub fn samples_table(reports: &[VerificationReport<f64>]) -> Table {
    let mut t = Table::new(&["check", "sample", "ratio"]);
    for r in reports {
        for s in &r.samples {
            t.push(vec![
                r.check_name.clone().into(),
                s.label.clone().into(),
                s.ratio.into(),
            ]);
        }
    }
    t
}

/// One row per check.
pub fn summary_table(reports: &[VerificationReport<f64>]) -> Table {
    let mut t = Table::new(&[
        "check",
        "family",
        "samples",
        "empirical_constant",
        "stability",
        "metrics",
        "criterion",
        "status",
    ]);
    for r in reports {
        let metrics = r
            .metrics
            .iter()
            .map(|(k, v)| format!("{k}={}", crate::table::fmt_num(*v)))
            .collect::<Vec<_>>()
            .join(";");
        t.push(vec![
            r.check_name.clone().into(),
            r.family_descriptor.clone().into(),
            r.samples.len().into(),
            r.empirical_constant.into(),
            r.stability.map_or(Cell::Text(String::new()), Cell::Num),
            metrics.into(),
            r.criterion.describe().into(),
            r.pass.into(),
        ]);
    }
    t
}
