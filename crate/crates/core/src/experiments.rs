//! Monte Carlo strong-convergence studies with coupled reference solutions.
//!
//! Every trajectory draws one noise path at the reference resolution; every
//! method and every step size on the ladder consumes pairwise sums of those
//! same fine increments, so the measured root-mean-square distance to the
//! reference solution is a strong error. Trajectories are independent work
//! items; reduction runs in canonical trajectory order, so reports do not
//! depend on the thread count.

use crate::chebyshev::MethodKind;
use crate::integrators::{IntegrateError, StagePolicy, Stepper};
use crate::noise::{NoiseError, NoiseGenerator, NoisePath, NoiseSpec};
use crate::spatial::{norm, DiscreteOperator, SpatialError};
use rayon::prelude::*;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid experiment plan: {0}")]
    InvalidPlan(String),
    #[error("degenerate slope fit: {0}")]
    DegenerateFit(String),
    #[error("abort rate {aborts}/{samples} exceeds 1% for {method} at tau = {tau}")]
    TooManyAborts {
        method: MethodKind,
        tau: f64,
        aborts: usize,
        samples: usize,
    },
    #[error(transparent)]
    Integrate(#[from] IntegrateError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Spatial(#[from] SpatialError),
}

/// Equation presets of the convergence studies. All of them live on
/// `(0, 1)` with homogeneous Dirichlet conditions and the initial profile
/// `sin(2 pi x)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquationPreset {
    /// Semilinear heat equation, drift `f(u) = -u - sin u`, additive
    /// space-time white noise.
    AdditiveHeat,
    /// Same drift with multiplicative white noise, `g(u) = u`.
    MultiplicativeHeat,
    /// `sigma = 0`; isolates the deterministic orders (one in time, two in
    /// space).
    Deterministic,
    /// Zero drift with spectrally colored additive noise
    /// (`q_m = lambda_m^{-r}`); the higher-order regime.
    RegularNoise,
}

impl EquationPreset {
    pub fn name(self) -> &'static str {
        match self {
            EquationPreset::AdditiveHeat => "additive-heat",
            EquationPreset::MultiplicativeHeat => "multiplicative-heat",
            EquationPreset::Deterministic => "deterministic",
            EquationPreset::RegularNoise => "regular-noise",
        }
    }
}

fn drift_semilinear(u: f64) -> f64 {
    -u - u.sin()
}

fn drift_zero(_: f64) -> f64 {
    0.0
}

fn initial_profile(x: f64) -> f64 {
    (2.0 * std::f64::consts::PI * x).sin()
}

/// One convergence study: equation preset, grid, time horizon, dyadic
/// step-size ladder `tau_j = T 2^{-j}` with a strictly finer reference
/// level, sample count, and the methods under comparison.
#[derive(Debug, Clone)]
pub struct ExperimentPlan {
    pub preset: EquationPreset,
    /// Grid intervals `N` (so `h = 1/N`); for spatial studies this field is
    /// unused and the ladder exponents index the grids instead.
    pub grid: usize,
    pub t_final: f64,
    pub j_min: u32,
    pub j_max: u32,
    /// Reference exponent; must exceed `j_max`.
    pub j_ref: u32,
    pub samples: usize,
    pub methods: Vec<MethodKind>,
    /// Scheme generating the coupled reference solution.
    pub reference: MethodKind,
    pub eta: f64,
    pub sigma: f64,
    /// Spectral decay exponent `r` of the regular-noise preset.
    pub decay_exponent: f64,
    pub master_seed: u64,
    /// Fixed small time step of the spatial study.
    pub fixed_tau: f64,
}

impl ExperimentPlan {
    /// Desk-scale defaults for the temporal studies: `n = 100`, `T = 0.1`,
    /// ladder `j = 4..9` against a reference at `j_ref = 12`, 2000 samples
    /// for the white-noise presets and 1000 for the regular-noise preset.
    pub fn desk_scale(preset: EquationPreset) -> Self {
        let (samples, sigma, methods): (usize, f64, Vec<MethodKind>) = match preset {
            EquationPreset::AdditiveHeat | EquationPreset::MultiplicativeHeat => (
                2000,
                1.0,
                vec![MethodKind::SkRock, MethodKind::Variant, MethodKind::ImplicitEuler],
            ),
            EquationPreset::Deterministic => (
                1,
                0.0,
                vec![MethodKind::SkRock, MethodKind::Variant, MethodKind::ImplicitEuler],
            ),
            EquationPreset::RegularNoise => {
                (1000, 1.0, vec![MethodKind::SkRock, MethodKind::ImplicitEuler])
            }
        };
        ExperimentPlan {
            preset,
            grid: 100,
            t_final: 0.1,
            j_min: 4,
            j_max: 9,
            j_ref: 12,
            samples,
            methods,
            reference: MethodKind::SkRock,
            eta: 0.05,
            sigma,
            decay_exponent: 1.0,
            master_seed: 948_217_003,
            fixed_tau: 1e-5,
        }
    }

    /// Desk-scale spatial study: deterministic problem on nested grids
    /// `N = 2^j`, `j = 3..7`, reference grid `2^9`, fixed `tau = 1e-5`.
    pub fn desk_scale_spatial() -> Self {
        ExperimentPlan {
            preset: EquationPreset::Deterministic,
            grid: 0,
            t_final: 0.1,
            j_min: 3,
            j_max: 7,
            j_ref: 9,
            samples: 1,
            methods: vec![MethodKind::SkRock],
            reference: MethodKind::SkRock,
            eta: 0.05,
            sigma: 0.0,
            decay_exponent: 1.0,
            master_seed: 948_217_003,
            fixed_tau: 1e-5,
        }
    }

    pub fn drift(&self) -> fn(f64) -> f64 {
        match self.preset {
            EquationPreset::RegularNoise => drift_zero,
            _ => drift_semilinear,
        }
    }

    pub fn noise_spec(&self) -> NoiseSpec {
        match self.preset {
            EquationPreset::AdditiveHeat => NoiseSpec::additive_white(self.sigma),
            EquationPreset::MultiplicativeHeat => NoiseSpec::multiplicative_white(self.sigma),
            EquationPreset::Deterministic => NoiseSpec::additive_white(0.0),
            EquationPreset::RegularNoise => NoiseSpec::spectral(self.sigma, self.decay_exponent),
        }
    }

    fn validate(&self) -> Result<(), ExperimentError> {
        if self.j_ref <= self.j_max || self.j_min > self.j_max {
            return Err(ExperimentError::InvalidPlan(format!(
                "need j_min <= j_max < j_ref, got {} <= {} < {}",
                self.j_min, self.j_max, self.j_ref
            )));
        }
        if self.j_ref > 30 {
            return Err(ExperimentError::InvalidPlan(format!(
                "reference exponent {} too large",
                self.j_ref
            )));
        }
        if self.methods.is_empty() {
            return Err(ExperimentError::InvalidPlan("no methods selected".into()));
        }
        if !(self.t_final > 0.0) {
            return Err(ExperimentError::InvalidPlan("t_final must be positive".into()));
        }
        Ok(())
    }
}

/// One `(method, step or mesh size)` cell of a convergence table.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceCell {
    pub method: MethodKind,
    pub tau: f64,
    pub h: f64,
    pub rms_error: f64,
    /// Monte Carlo standard error of the RMS value (delta method).
    pub mc_stderr: f64,
    pub n_samples: usize,
    pub n_aborts: usize,
    pub wall_seconds: f64,
}

/// Least-squares slope of one method across the ladder; `None` when the
/// ladder is degenerate (fewer than two usable points), never fabricated.
#[derive(Debug, Clone, PartialEq)]
pub struct SlopeFit {
    pub method: MethodKind,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub r2: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub cells: Vec<ConvergenceCell>,
    pub fits: Vec<SlopeFit>,
}

impl ConvergenceReport {
    pub fn fit_for(&self, method: MethodKind) -> Option<&SlopeFit> {
        self.fits.iter().find(|f| f.method == method)
    }

    /// Checks that RMS errors are nonincreasing along the ladder up to
    /// `k` combined Monte Carlo standard errors.
    pub fn monotone_within(&self, k: f64) -> bool {
        for fit in &self.fits {
            let cells: Vec<&ConvergenceCell> = self
                .cells
                .iter()
                .filter(|c| c.method == fit.method)
                .collect();
            for pair in cells.windows(2) {
                let slack = k * (pair[0].mc_stderr.powi(2) + pair[1].mc_stderr.powi(2)).sqrt();
                if pair[1].rms_error > pair[0].rms_error + slack {
                    return false;
                }
            }
        }
        true
    }
}

/// Ordinary least squares on `(log x, log y)`. Returns
/// `(slope, intercept, r^2)`; degenerate input (fewer than two points,
/// non-positive coordinates) is an error, never a made-up value.
pub fn fit_slope(points: &[(f64, f64)]) -> Result<(f64, f64, f64), ExperimentError> {
    if points.len() < 2 {
        return Err(ExperimentError::DegenerateFit(format!(
            "{} point(s), need at least 2",
            points.len()
        )));
    }
    for &(x, y) in points {
        if !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite()) {
            return Err(ExperimentError::DegenerateFit(format!(
                "non-positive or non-finite point ({x}, {y})"
            )));
        }
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(ExperimentError::DegenerateFit("all abscissae equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ly.iter().map(|v| (v - my) * (v - my)).sum();
    let ss_res: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(a, b)| {
            let r = b - (intercept + slope * a);
            r * r
        })
        .sum();
    let r2 = if ss_tot <= f64::EPSILON * my.abs().max(1.0) {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };
    Ok((slope, intercept, r2))
}

enum CellOutcome {
    Error { err_sq: f64, wall: f64 },
    Abort,
}

struct TrajectoryOutcome {
    cells: Vec<CellOutcome>,
}

/// Strong-convergence study in time: for each trajectory, one fine noise
/// path feeds a reference solve at `tau_ref = T 2^{-j_ref}` and every
/// `(method, tau_j)` solve on summed coarse increments; squared
/// discrete-L2 distances at the final time are accumulated and fitted.
pub fn run_strong_convergence(plan: &ExperimentPlan) -> Result<ConvergenceReport, ExperimentError> {
    plan.validate()?;
    if plan.grid < 2 {
        return Err(ExperimentError::InvalidPlan(format!(
            "grid = {} too small",
            plan.grid
        )));
    }
    let op = DiscreteOperator::laplacian(plan.grid)?;
    let spec = plan.noise_spec();
    let drift = plan.drift();
    let generator = if spec.is_deterministic() {
        None
    } else {
        Some(NoiseGenerator::new(&spec, &op)?)
    };

    let n_fine = 1usize << plan.j_ref;
    let tau_ref = plan.t_final / n_fine as f64;
    let ladder: Vec<u32> = (plan.j_min..=plan.j_max).collect();
    let coarsenings: Vec<u32> = std::iter::once(0)
        .chain(ladder.iter().map(|j| plan.j_ref - j))
        .collect();

    let reference = Stepper::new(
        plan.reference,
        tau_ref,
        plan.eta,
        StagePolicy::Auto,
        op.lambda_max_bound,
    )?;
    let mut steppers = Vec::new();
    for &method in &plan.methods {
        for &j in &ladder {
            let tau = plan.t_final / (1u64 << j) as f64;
            steppers.push((
                method,
                j,
                Stepper::new(method, tau, plan.eta, StagePolicy::Auto, op.lambda_max_bound)?,
            ));
        }
    }

    let m_eff = if spec.is_deterministic() { 1 } else { plan.samples.max(1) };
    let u0 = op.sample(initial_profile);

    let outcomes: Vec<TrajectoryOutcome> = (0..m_eff)
        .into_par_iter()
        .map(|traj| -> Result<TrajectoryOutcome, ExperimentError> {
            let levels = match &generator {
                Some(generator) => {
                    let path = NoisePath::new(
                        plan.master_seed,
                        traj as u64,
                        tau_ref,
                        n_fine,
                        generator.components(),
                    );
                    Some(generator.materialize_levels(&path, &coarsenings)?)
                }
                None => None,
            };
            let ref_final = reference.run(
                &op,
                u0.clone(),
                &drift,
                &spec,
                levels.as_ref().map(|l| l[0].as_slice()),
                n_fine,
            );
            let ref_final = match ref_final {
                Ok(state) => state,
                // a dead reference invalidates the whole trajectory
                Err(IntegrateError::Blowup { .. }) => {
                    return Ok(TrajectoryOutcome {
                        cells: steppers.iter().map(|_| CellOutcome::Abort).collect(),
                    });
                }
                Err(e) => return Err(e.into()),
            };
            let mut cells = Vec::with_capacity(steppers.len());
            for (idx, (_, j, stepper)) in steppers.iter().enumerate() {
                let _ = idx;
                let level_idx = (j - plan.j_min) as usize + 1;
                let n_steps = 1usize << j;
                let started = Instant::now();
                let outcome = stepper.run(
                    &op,
                    u0.clone(),
                    &drift,
                    &spec,
                    levels.as_ref().map(|l| l[level_idx].as_slice()),
                    n_steps,
                );
                let wall = started.elapsed().as_secs_f64();
                match outcome {
                    Ok(state) => {
                        let diff: Vec<f64> = state
                            .iter()
                            .zip(&ref_final)
                            .map(|(a, b)| a - b)
                            .collect();
                        let e = norm(op.h, &diff);
                        cells.push(CellOutcome::Error { err_sq: e * e, wall });
                    }
                    Err(IntegrateError::Blowup { .. }) => cells.push(CellOutcome::Abort),
                    Err(e) => return Err(e.into()),
                }
            }
            Ok(TrajectoryOutcome { cells })
        })
        .collect::<Result<Vec<_>, _>>()?;

    // canonical reduction in trajectory order
    let mut cells = Vec::with_capacity(steppers.len());
    for (slot, (method, j, _)) in steppers.iter().enumerate() {
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        let mut n_ok = 0usize;
        let mut n_aborts = 0usize;
        let mut wall = 0.0;
        for outcome in &outcomes {
            match outcome.cells[slot] {
                CellOutcome::Error { err_sq, wall: w } => {
                    sum += err_sq;
                    sum_sq += err_sq * err_sq;
                    n_ok += 1;
                    wall += w;
                }
                CellOutcome::Abort => n_aborts += 1,
            }
        }
        let tau = plan.t_final / (1u64 << j) as f64;
        if n_aborts * 100 > m_eff {
            return Err(ExperimentError::TooManyAborts {
                method: *method,
                tau,
                aborts: n_aborts,
                samples: m_eff,
            });
        }
        let mean = sum / n_ok as f64;
        let rms = mean.sqrt();
        let mc_stderr = if n_ok > 1 && rms > 0.0 {
            let var = (sum_sq / n_ok as f64 - mean * mean).max(0.0);
            (var / n_ok as f64).sqrt() / (2.0 * rms)
        } else {
            0.0
        };
        cells.push(ConvergenceCell {
            method: *method,
            tau,
            h: op.h,
            rms_error: rms,
            mc_stderr,
            n_samples: n_ok,
            n_aborts,
            wall_seconds: wall,
        });
    }

    let fits = fit_ladder(&plan.methods, &cells, |c| c.tau);
    Ok(ConvergenceReport { cells, fits })
}

/// Spatial convergence of the deterministic problem on nested dyadic grids,
/// with the reference solution restricted to the coarse nodes (shared
/// exactly between nested uniform grids). The fixed time step and the stage
/// count resolved on the reference grid are common to every grid, so the
/// one-step map is the same function of `tau Lambda_h` everywhere and the
/// time-discretization error cancels in the comparison.
pub fn run_spatial_convergence(plan: &ExperimentPlan) -> Result<ConvergenceReport, ExperimentError> {
    plan.validate()?;
    if plan.preset != EquationPreset::Deterministic {
        return Err(ExperimentError::InvalidPlan(
            "spatial study requires the deterministic preset".into(),
        ));
    }
    let tau = plan.fixed_tau;
    let steps_f = plan.t_final / tau;
    let n_steps = steps_f.round() as usize;
    if n_steps == 0 || (steps_f - n_steps as f64).abs() > 1e-6 * steps_f {
        return Err(ExperimentError::InvalidPlan(format!(
            "t_final = {} not an integral number of steps of fixed_tau = {tau}",
            plan.t_final
        )));
    }
    let spec = NoiseSpec::additive_white(0.0);
    let drift = plan.drift();
    let n_ref = 1usize << plan.j_ref;
    let op_ref = DiscreteOperator::laplacian(n_ref)?;

    let mut cells = Vec::new();
    for &method in &plan.methods {
        let reference = Stepper::new(method, tau, plan.eta, StagePolicy::Auto, op_ref.lambda_max_bound)?;
        let shared_policy = StagePolicy::Fixed(reference.stages());
        let ref_final = reference.run(
            &op_ref,
            op_ref.sample(initial_profile),
            &drift,
            &spec,
            None,
            n_steps,
        )?;
        for j in plan.j_min..=plan.j_max {
            let n_j = 1usize << j;
            let op_j = DiscreteOperator::laplacian(n_j)?;
            let stepper = Stepper::new(method, tau, plan.eta, shared_policy, op_j.lambda_max_bound)?;
            let started = Instant::now();
            let outcome = stepper.run(
                &op_j,
                op_j.sample(initial_profile),
                &drift,
                &spec,
                None,
                n_steps,
            );
            let wall = started.elapsed().as_secs_f64();
            let (rms, aborts) = match outcome {
                Ok(state) => {
                    let ratio = n_ref / n_j;
                    let mut acc = 0.0;
                    for (i, v) in state.iter().enumerate() {
                        let fine = ref_final[(i + 1) * ratio - 1];
                        acc += (v - fine) * (v - fine);
                    }
                    ((op_j.h * acc).sqrt(), 0)
                }
                Err(IntegrateError::Blowup { .. }) => (f64::NAN, 1),
                Err(e) => return Err(e.into()),
            };
            if aborts > 0 {
                return Err(ExperimentError::TooManyAborts {
                    method,
                    tau,
                    aborts,
                    samples: 1,
                });
            }
            cells.push(ConvergenceCell {
                method,
                tau,
                h: op_j.h,
                rms_error: rms,
                mc_stderr: 0.0,
                n_samples: 1,
                n_aborts: 0,
                wall_seconds: wall,
            });
        }
    }
    let fits = fit_ladder(&plan.methods, &cells, |c| c.h);
    Ok(ConvergenceReport { cells, fits })
}

/// Strong convergence for the spatially regular noise regime (zero drift,
/// spectral covariance); identical machinery to the white-noise study.
pub fn run_regular_noise(plan: &ExperimentPlan) -> Result<ConvergenceReport, ExperimentError> {
    if plan.preset != EquationPreset::RegularNoise {
        return Err(ExperimentError::InvalidPlan(
            "regular-noise study requires the regular-noise preset".into(),
        ));
    }
    run_strong_convergence(plan)
}

fn fit_ladder(
    methods: &[MethodKind],
    cells: &[ConvergenceCell],
    x: impl Fn(&ConvergenceCell) -> f64,
) -> Vec<SlopeFit> {
    methods
        .iter()
        .map(|&method| {
            let points: Vec<(f64, f64)> = cells
                .iter()
                .filter(|c| c.method == method && c.rms_error.is_finite())
                .map(|c| (x(c), c.rms_error))
                .collect();
            match fit_slope(&points) {
                Ok((slope, intercept, r2)) => SlopeFit {
                    method,
                    slope: Some(slope),
                    intercept: Some(intercept),
                    r2: Some(r2),
                },
                Err(_) => SlopeFit {
                    method,
                    slope: None,
                    intercept: None,
                    r2: None,
                },
            }
        })
        .collect()
}
