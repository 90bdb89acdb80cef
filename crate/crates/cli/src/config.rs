//! Preset, config-file, and flag resolution. Precedence: preset defaults,
//! then config-file entries, then command-line flags.

use crate::{AppError, CommonArgs};
use stabspde::chebyshev::MethodKind;
use stabspde::experiments::{EquationPreset, ExperimentPlan};
use stabspde::verify::{ScanConfig, ScanMethod};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy)]
pub enum Kind {
    Simulate,
    Converge,
    Verify,
    StabilityCurve,
}

/// Merged preset/config/flag values before a subcommand interprets them.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub preset: Option<String>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub grid: Option<usize>,
    pub eta: Option<f64>,
    pub sigma: Option<f64>,
    pub methods: Option<String>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub stages: Option<u32>,
    pub t_final: Option<f64>,
    pub tau: Option<f64>,
    pub j_min: Option<u32>,
    pub j_max: Option<u32>,
    pub j_ref: Option<u32>,
    pub decay_exponent: Option<f64>,
    pub reference: Option<String>,
    pub snapshots: Option<usize>,
    pub s_max: Option<u32>,
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, AppError> {
    value
        .parse()
        .map_err(|_| AppError::Usage(format!("config key '{key}': cannot parse '{value}'")))
}

impl Overrides {
    /// Reads a flat `key = value` file; `#` starts a comment, blank lines
    /// are skipped, unknown keys are usage errors.
    pub fn from_file(path: &Path) -> Result<Self, AppError> {
        let text = std::fs::read_to_string(path).map_err(|source| AppError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut ov = Overrides::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(AppError::Usage(format!(
                    "{}:{}: expected 'key = value', got '{raw}'",
                    path.display(),
                    lineno + 1
                )));
            };
            let (key, value) = (key.trim(), value.trim());
            match key {
                "preset" => ov.preset = Some(value.to_string()),
                "seed" => ov.seed = Some(parse_num(key, value)?),
                "samples" => ov.samples = Some(parse_num(key, value)?),
                "grid" => ov.grid = Some(parse_num(key, value)?),
                "eta" => ov.eta = Some(parse_num(key, value)?),
                "sigma" => ov.sigma = Some(parse_num(key, value)?),
                "methods" => ov.methods = Some(value.to_string()),
                "out" => ov.out = Some(PathBuf::from(value)),
                "threads" => ov.threads = Some(parse_num(key, value)?),
                "stages" => ov.stages = Some(parse_num(key, value)?),
                "t_final" => ov.t_final = Some(parse_num(key, value)?),
                "tau" => ov.tau = Some(parse_num(key, value)?),
                "j_min" => ov.j_min = Some(parse_num(key, value)?),
                "j_max" => ov.j_max = Some(parse_num(key, value)?),
                "j_ref" => ov.j_ref = Some(parse_num(key, value)?),
                "decay_exponent" => ov.decay_exponent = Some(parse_num(key, value)?),
                "reference" => ov.reference = Some(value.to_string()),
                "snapshots" => ov.snapshots = Some(parse_num(key, value)?),
                "s_max" => ov.s_max = Some(parse_num(key, value)?),
                other => {
                    return Err(AppError::Usage(format!(
                        "{}:{}: unknown config key '{other}'",
                        path.display(),
                        lineno + 1
                    )))
                }
            }
        }
        Ok(ov)
    }

    /// File entries overlaid with command-line flags (flags win).
    pub fn resolve(args: &CommonArgs) -> Result<Self, AppError> {
        let mut ov = match &args.config {
            Some(path) => Self::from_file(path)?,
            None => Overrides::default(),
        };
        macro_rules! lay {
            ($($field:ident),*) => {
                $(if args.$field.is_some() { ov.$field = args.$field.clone(); })*
            };
        }
        lay!(preset, seed, samples, grid, eta, methods, out, threads, stages);
        Ok(ov)
    }
}

pub fn parse_method_list(list: &str) -> Result<Vec<MethodKind>, AppError> {
    list.split(',')
        .map(|m| m.trim().parse::<MethodKind>().map_err(AppError::Usage))
        .collect()
}

fn parse_scan_methods(list: &str) -> Result<Vec<ScanMethod>, AppError> {
    list.split(',')
        .map(|m| m.trim().parse::<ScanMethod>().map_err(AppError::Usage))
        .collect()
}

const DEFAULT_OUT: &str = "out";

/// Resolved `converge` run.
#[derive(Debug, Clone)]
pub struct ConvergeSetup {
    pub preset: String,
    pub plan: ExperimentPlan,
    pub spatial: bool,
    pub out: PathBuf,
}

impl ConvergeSetup {
    pub fn resolve(ov: &Overrides) -> Result<Self, AppError> {
        let preset = ov.preset.clone().unwrap_or_else(|| "fig2a".to_string());
        let (mut plan, spatial) = match preset.as_str() {
            "fig2a" => (ExperimentPlan::desk_scale(EquationPreset::AdditiveHeat), false),
            "fig2b" => (
                ExperimentPlan::desk_scale(EquationPreset::MultiplicativeHeat),
                false,
            ),
            "det-time" => (ExperimentPlan::desk_scale(EquationPreset::Deterministic), false),
            "det-space" => (ExperimentPlan::desk_scale_spatial(), true),
            "regular-noise" => (ExperimentPlan::desk_scale(EquationPreset::RegularNoise), false),
            other => {
                return Err(AppError::Usage(format!(
                    "unknown converge preset '{other}' (expected fig2a, fig2b, det-time, det-space, regular-noise)"
                )))
            }
        };
        if let Some(seed) = ov.seed {
            plan.master_seed = seed;
        }
        if let Some(samples) = ov.samples {
            plan.samples = samples;
        }
        if let Some(grid) = ov.grid {
            plan.grid = grid;
        }
        if let Some(eta) = ov.eta {
            plan.eta = eta;
        }
        if let Some(sigma) = ov.sigma {
            plan.sigma = sigma;
        }
        if let Some(t) = ov.t_final {
            plan.t_final = t;
        }
        if let Some(j) = ov.j_min {
            plan.j_min = j;
        }
        if let Some(j) = ov.j_max {
            plan.j_max = j;
        }
        if let Some(j) = ov.j_ref {
            plan.j_ref = j;
        }
        if let Some(r) = ov.decay_exponent {
            plan.decay_exponent = r;
        }
        if let Some(tau) = ov.tau {
            plan.fixed_tau = tau;
        }
        if let Some(list) = &ov.methods {
            plan.methods = parse_method_list(list)?;
        }
        if let Some(name) = &ov.reference {
            plan.reference = name.parse::<MethodKind>().map_err(AppError::Usage)?;
        }
        Ok(ConvergeSetup {
            preset,
            plan,
            spatial,
            out: ov.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
        })
    }
}

/// Resolved `simulate` run.
#[derive(Debug, Clone)]
pub struct SimulateSetup {
    pub preset: String,
    pub grid: usize,
    pub tau: f64,
    pub t_final: f64,
    pub eta: f64,
    pub sigma: f64,
    pub multiplicative: bool,
    pub methods: Vec<MethodKind>,
    pub seed: u64,
    pub snapshots: usize,
    pub out: PathBuf,
}

impl SimulateSetup {
    pub fn resolve(ov: &Overrides) -> Result<Self, AppError> {
        let preset = ov.preset.clone().unwrap_or_else(|| "heat-additive".to_string());
        let (sigma, multiplicative) = match preset.as_str() {
            "heat-additive" => (1.0, false),
            "heat-multiplicative" => (1.0, true),
            "deterministic" => (0.0, false),
            other => {
                return Err(AppError::Usage(format!(
                    "unknown simulate preset '{other}' (expected heat-additive, heat-multiplicative, deterministic)"
                )))
            }
        };
        let methods = match &ov.methods {
            Some(list) => parse_method_list(list)?,
            None => vec![MethodKind::SkRock, MethodKind::Variant, MethodKind::ImplicitEuler],
        };
        let snapshots = ov.snapshots.unwrap_or(51);
        if snapshots < 2 {
            return Err(AppError::Usage("snapshots must be at least 2".into()));
        }
        Ok(SimulateSetup {
            preset,
            grid: ov.grid.unwrap_or(100),
            tau: ov.tau.unwrap_or(0.01),
            t_final: ov.t_final.unwrap_or(1.0),
            eta: ov.eta.unwrap_or(0.05),
            sigma: ov.sigma.unwrap_or(sigma),
            multiplicative,
            methods,
            seed: ov.seed.unwrap_or(948_217_003),
            snapshots,
            out: ov.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
        })
    }
}

/// Resolved `verify` run.
#[derive(Debug, Clone)]
pub struct VerifySetup {
    pub methods: Vec<ScanMethod>,
    pub eta: f64,
    pub scan: ScanConfig,
    pub out: PathBuf,
}

impl VerifySetup {
    pub fn resolve(ov: &Overrides) -> Result<Self, AppError> {
        let methods = match &ov.methods {
            Some(list) => parse_scan_methods(list)?,
            None => ScanMethod::all().to_vec(),
        };
        let mut scan = ScanConfig::default();
        if let Some(s_max) = ov.s_max {
            scan.s_max = s_max;
        }
        Ok(VerifySetup {
            methods,
            eta: ov.eta.unwrap_or(0.05),
            scan,
            out: ov.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
        })
    }
}

/// Resolved `stability-curve` run.
#[derive(Debug, Clone)]
pub struct CurveSetup {
    pub stages: u32,
    pub eta: f64,
    pub out: PathBuf,
}

impl CurveSetup {
    pub fn resolve(ov: &Overrides) -> Result<Self, AppError> {
        Ok(CurveSetup {
            stages: ov.stages.unwrap_or(7),
            eta: ov.eta.unwrap_or(0.05),
            out: ov.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
        })
    }
}
