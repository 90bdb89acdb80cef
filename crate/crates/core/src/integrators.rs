//! Time steppers: the SK-ROCK stage recursion, its variant, and the linear
//! implicit / explicit Euler references, plus automatic stage selection
//! under the stability condition `tau * lambda_max <= L_s`.
//!
//! Both stabilized steppers realize the one-step map
//! `u_{n+1} = A_s(tau Lambda_h) u_n + B_s(tau Lambda_h) G_n` through the
//! three-term stage recursion, never by forming the high-degree polynomials;
//! drift and noise share the single stabilized slot
//! `G_n = tau F(u_n) + sigma g(u_n) dW_n`, with the diffusion evaluated at
//! the start of the step.

use crate::chebyshev::{ChebyshevError, ChebyshevParams, MethodKind};
use crate::noise::{apply_diffusion, NoiseError, NoiseGenerator, NoisePath, NoiseSpec};
use crate::spatial::DiscreteOperator;
use thiserror::Error;

/// Pointwise drift `f(u)`, applied as a Nemytskii operator on the grid.
pub type DriftFn = dyn Fn(f64) -> f64 + Sync;

/// Magnitude treated as numerical blow-up. Entries beyond this would
/// overflow the squared-norm accumulators long before reaching infinity, so
/// the trajectory is aborted here instead of propagating garbage.
pub const BLOWUP_THRESHOLD: f64 = 1e100;

fn state_is_sane(u: &[f64]) -> bool {
    u.iter().all(|x| x.is_finite() && x.abs() <= BLOWUP_THRESHOLD)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegrateError {
    #[error("numerical blow-up: non-finite state after step {step}")]
    Blowup { step: usize },
    #[error("invalid solve configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Chebyshev(#[from] ChebyshevError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
}

/// How the stage count of the stabilized methods is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StagePolicy {
    /// Minimal `s >= 1` with `tau * lambda_max_bound <= L_s`.
    Auto,
    Fixed(u32),
}

/// One solver run: method, step size, damping, horizon, stage policy, seed,
/// initial profile, and the times at which snapshots are retained.
#[derive(Clone)]
pub struct SolveConfig {
    pub method: MethodKind,
    pub tau: f64,
    pub eta: f64,
    pub t_final: f64,
    pub stage_policy: StagePolicy,
    pub master_seed: u64,
    pub initial_condition: fn(f64) -> f64,
    /// Times to retain, snapped to the nearest step; the final state is
    /// always kept. Full trajectories are streamed, never accumulated.
    pub snapshot_times: Vec<f64>,
}

impl std::fmt::Debug for SolveConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SolveConfig")
            .field("method", &self.method)
            .field("tau", &self.tau)
            .field("eta", &self.eta)
            .field("t_final", &self.t_final)
            .field("stage_policy", &self.stage_policy)
            .field("master_seed", &self.master_seed)
            .field("snapshot_times", &self.snapshot_times)
            .finish()
    }
}

/// Recursion coefficients of the stabilized stage loops. `mu[0] = omega1/omega0`;
/// for `i >= 2`, `mu_i = 2 omega1 T_{i-1}(omega0) / T_i(omega0)`,
/// `nu_i = 2 omega0 T_{i-1}(omega0) / T_i(omega0)` and `kappa_i = 1 - nu_i`.
/// The first-stage extras `nu_1 = s omega1 / 2` and `kappa_1 = s mu_1` are
/// used by the SK-ROCK stage only.
#[derive(Debug, Clone, PartialEq)]
pub struct StageCoefficients {
    pub mu: Vec<f64>,
    pub nu: Vec<f64>,
    pub kappa: Vec<f64>,
}

impl StageCoefficients {
    pub fn new(params: &ChebyshevParams) -> Self {
        let s = params.stages as usize;
        let (omega0, omega1) = (params.omega0, params.omega1);
        let mut mu = Vec::with_capacity(s);
        let mut nu = Vec::with_capacity(s);
        let mut kappa = Vec::with_capacity(s);
        mu.push(omega1 / omega0);
        nu.push(params.stages as f64 * omega1 / 2.0);
        kappa.push(params.stages as f64 * mu[0]);
        // forward recursion for T_i(omega0)
        let mut t_prev = 1.0; // T_0
        let mut t_cur = omega0; // T_1
        for _ in 2..=s {
            let t_next = 2.0 * omega0 * t_cur - t_prev;
            mu.push(2.0 * omega1 * t_cur / t_next);
            let nu_i = 2.0 * omega0 * t_cur / t_next;
            nu.push(nu_i);
            kappa.push(1.0 - nu_i);
            t_prev = t_cur;
            t_cur = t_next;
        }
        StageCoefficients { mu, nu, kappa }
    }

    pub fn stages(&self) -> u32 {
        self.mu.len() as u32
    }
}

/// Minimal stage count `s >= 1` whose stability length covers
/// `tau * lambda_max`, found by incrementing `s` from 1 (`L_s` is increasing
/// in `s`). Panics on non-positive or non-finite inputs and on damping
/// outside the admissible range; those are caller contract violations.
pub fn select_stages(tau: f64, lambda_max: f64, eta: f64) -> u32 {
    assert!(
        tau > 0.0 && tau.is_finite() && lambda_max > 0.0 && lambda_max.is_finite(),
        "select_stages needs positive finite tau and lambda_max"
    );
    let target = tau * lambda_max;
    let mut s = 1u32;
    loop {
        let params = ChebyshevParams::new(s, eta).expect("damping validated by caller");
        if target <= params.stability_length {
            return s;
        }
        s += 1;
    }
}

/// One SK-ROCK step: `K_0 = u_n`, `K_1 = K_0 + tau mu_1 Lambda (K_0 + nu_1 g) + kappa_1 g`,
/// then `K_i = mu_i tau Lambda K_{i-1} + nu_i K_{i-1} + kappa_i K_{i-2}` for
/// `i = 2..s`. Returns `K_s`. The forcing `g = tau F(u_n) + noise` is
/// assembled by the caller.
pub fn step_skrock(
    op: &DiscreteOperator,
    coeffs: &StageCoefficients,
    u: &[f64],
    g: &[f64],
    tau: f64,
) -> Vec<f64> {
    let m = op.n_interior;
    assert_eq!(u.len(), m, "dimension mismatch");
    assert_eq!(g.len(), m, "dimension mismatch");
    let s = coeffs.mu.len();
    let (mu1, nu1, kappa1) = (coeffs.mu[0], coeffs.nu[0], coeffs.kappa[0]);

    let mut work = vec![0.0; m];
    let staged: Vec<f64> = u.iter().zip(g).map(|(ui, gi)| ui + nu1 * gi).collect();
    op.apply_into(&staged, &mut work);
    let mut prev: Vec<f64> = u.to_vec(); // K_{i-2}
    let mut cur: Vec<f64> = u
        .iter()
        .zip(&work)
        .zip(g)
        .map(|((ui, wi), gi)| ui + tau * mu1 * wi + kappa1 * gi)
        .collect(); // K_1
    for i in 1..s {
        op.apply_into(&cur, &mut work);
        let (mu_i, nu_i) = (coeffs.mu[i], coeffs.nu[i]);
        let a = mu_i * tau;
        // kappa_i = 1 - nu_i, written so a vanishing update leaves the
        // state bit-identical
        for j in 0..m {
            prev[j] += nu_i * (cur[j] - prev[j]) + a * work[j];
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    cur
}

/// One step of the variant recursion: `K_1 = K_0 + mu_1 (tau Lambda K_0 + g)`,
/// `K_i = mu_i (tau Lambda K_{i-1} + g) + nu_i K_{i-1} + kappa_i K_{i-2}`.
pub fn step_variant(
    op: &DiscreteOperator,
    coeffs: &StageCoefficients,
    u: &[f64],
    g: &[f64],
    tau: f64,
) -> Vec<f64> {
    let m = op.n_interior;
    assert_eq!(u.len(), m, "dimension mismatch");
    assert_eq!(g.len(), m, "dimension mismatch");
    let s = coeffs.mu.len();
    let mu1 = coeffs.mu[0];

    let mut work = vec![0.0; m];
    op.apply_into(u, &mut work);
    let mut prev: Vec<f64> = u.to_vec();
    let mut cur: Vec<f64> = u
        .iter()
        .zip(&work)
        .zip(g)
        .map(|((ui, wi), gi)| ui + mu1 * (tau * wi + gi))
        .collect();
    for i in 1..s {
        op.apply_into(&cur, &mut work);
        let (mu_i, nu_i) = (coeffs.mu[i], coeffs.nu[i]);
        for j in 0..m {
            prev[j] += nu_i * (cur[j] - prev[j]) + mu_i * (tau * work[j] + g[j]);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    cur
}

/// Linear implicit Euler: solves `(I - tau Lambda_h) u_{n+1} = u_n + g` by
/// tridiagonal elimination.
pub fn step_implicit_euler(op: &DiscreteOperator, u: &[f64], g: &[f64], tau: f64) -> Vec<f64> {
    assert_eq!(u.len(), op.n_interior, "dimension mismatch");
    assert_eq!(g.len(), op.n_interior, "dimension mismatch");
    let rhs: Vec<f64> = u.iter().zip(g).map(|(a, b)| a + b).collect();
    op.solve_shifted(tau, &rhs)
}

/// Explicit Euler, `u_n + tau Lambda_h u_n + g`. The caller is responsible
/// for `tau * lambda_max < 2`.
pub fn step_explicit_euler(op: &DiscreteOperator, u: &[f64], g: &[f64], tau: f64) -> Vec<f64> {
    assert_eq!(u.len(), op.n_interior, "dimension mismatch");
    assert_eq!(g.len(), op.n_interior, "dimension mismatch");
    let lu = op.apply(u);
    u.iter()
        .zip(&lu)
        .zip(g)
        .map(|((ui, li), gi)| ui + tau * li + gi)
        .collect()
}

/// A method with its stage coefficients resolved for one step size.
#[derive(Debug, Clone)]
pub struct Stepper {
    method: MethodKind,
    tau: f64,
    coeffs: Option<StageCoefficients>,
}

impl Stepper {
    /// Resolves the stage count for `tau` against `lambda_max_bound` (the
    /// Euler methods carry no stages and ignore the policy).
    pub fn new(
        method: MethodKind,
        tau: f64,
        eta: f64,
        policy: StagePolicy,
        lambda_max_bound: f64,
    ) -> Result<Self, IntegrateError> {
        let coeffs = if method.is_stabilized() {
            let stages = match policy {
                StagePolicy::Auto => select_stages(tau, lambda_max_bound, eta),
                StagePolicy::Fixed(s) => s,
            };
            Some(StageCoefficients::new(&ChebyshevParams::new(stages, eta)?))
        } else {
            None
        };
        Ok(Stepper { method, tau, coeffs })
    }

    pub fn method(&self) -> MethodKind {
        self.method
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Stage count per step; 1 for the Euler methods.
    pub fn stages(&self) -> u32 {
        self.coeffs.as_ref().map_or(1, |c| c.stages())
    }

    /// Advances one step with the assembled forcing `g`.
    pub fn step(&self, op: &DiscreteOperator, u: &[f64], g: &[f64]) -> Vec<f64> {
        match (self.method, &self.coeffs) {
            (MethodKind::SkRock, Some(c)) => step_skrock(op, c, u, g, self.tau),
            (MethodKind::Variant, Some(c)) => step_variant(op, c, u, g, self.tau),
            (MethodKind::ImplicitEuler, _) => step_implicit_euler(op, u, g, self.tau),
            (MethodKind::ExplicitEuler, _) => step_explicit_euler(op, u, g, self.tau),
            _ => unreachable!("stabilized stepper without coefficients"),
        }
    }

    /// Runs `n_steps` steps from `u0` with pre-materialized Wiener
    /// increments (one per step; `None` for the deterministic problem).
    /// Aborts with the offending step index as soon as the state stops
    /// being finite.
    pub fn run(
        &self,
        op: &DiscreteOperator,
        u0: Vec<f64>,
        drift: &DriftFn,
        spec: &NoiseSpec,
        increments: Option<&[Vec<f64>]>,
        n_steps: usize,
    ) -> Result<Vec<f64>, IntegrateError> {
        if let Some(inc) = increments {
            assert_eq!(inc.len(), n_steps, "one increment per step");
        }
        let mut u = u0;
        for step in 0..n_steps {
            let g = assemble_forcing(self.tau, drift, &u, spec, increments.map(|inc| &inc[step]));
            u = self.step(op, &u, &g);
            if !state_is_sane(&u) {
                return Err(IntegrateError::Blowup { step });
            }
        }
        Ok(u)
    }
}

fn assemble_forcing(
    tau: f64,
    drift: &DriftFn,
    u: &[f64],
    spec: &NoiseSpec,
    dw: Option<&Vec<f64>>,
) -> Vec<f64> {
    match dw {
        Some(dw) => {
            let noise = apply_diffusion(spec, u, dw);
            u.iter()
                .zip(&noise)
                .map(|(ui, ni)| tau * drift(*ui) + ni)
                .collect()
        }
        None => u.iter().map(|ui| tau * drift(*ui)).collect(),
    }
}

/// Solver output: retained snapshots plus the final state.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub snapshots: Vec<Vec<f64>>,
    pub final_state: Vec<f64>,
    pub stages: u32,
    pub steps: usize,
}

/// Integrates the semilinear problem to `t_final` with the configured
/// method, assembling `G_n = tau f(u_n) + sigma g(u_n) dW_n` each step.
/// The noise path is derived from `(master_seed, trajectory 0)` at the
/// solver's own step size, so different methods run on the same realization.
pub fn integrate(
    config: &SolveConfig,
    op: &DiscreteOperator,
    spec: &NoiseSpec,
    drift: &DriftFn,
) -> Result<Trajectory, IntegrateError> {
    if !(config.tau > 0.0 && config.tau <= 1.0) {
        return Err(IntegrateError::InvalidConfig(format!(
            "tau = {} outside (0, 1]",
            config.tau
        )));
    }
    if !(config.t_final > 0.0) {
        return Err(IntegrateError::InvalidConfig(format!(
            "t_final = {} must be positive",
            config.t_final
        )));
    }
    let steps_f = config.t_final / config.tau;
    let n_steps = steps_f.round() as usize;
    if n_steps == 0 || (steps_f - n_steps as f64).abs() > 1e-9 * steps_f.max(1.0) {
        return Err(IntegrateError::InvalidConfig(format!(
            "t_final = {} is not an integral number of steps of tau = {}",
            config.t_final, config.tau
        )));
    }

    let stepper = Stepper::new(
        config.method,
        config.tau,
        config.eta,
        config.stage_policy,
        op.lambda_max_bound,
    )?;

    let noise = if spec.is_deterministic() {
        None
    } else {
        let generator = NoiseGenerator::new(spec, op)?;
        let path = NoisePath::new(config.master_seed, 0, config.tau, n_steps, generator.components());
        Some((generator, path))
    };

    // snapshot step indices, deduplicated and sorted
    let mut snap_steps: Vec<usize> = config
        .snapshot_times
        .iter()
        .map(|&t| ((t / config.tau).round() as usize).min(n_steps))
        .collect();
    snap_steps.sort_unstable();
    snap_steps.dedup();

    let mut u = op.sample(config.initial_condition);
    let mut times = Vec::new();
    let mut snapshots = Vec::new();
    let mut snap_iter = snap_steps.iter().peekable();
    if snap_iter.peek() == Some(&&0) {
        times.push(0.0);
        snapshots.push(u.clone());
        snap_iter.next();
    }
    for step in 0..n_steps {
        let dw = match &noise {
            Some((generator, path)) => Some(generator.fine_increment(path, step)?),
            None => None,
        };
        let g = assemble_forcing(config.tau, drift, &u, spec, dw.as_ref());
        u = stepper.step(op, &u, &g);
        if !state_is_sane(&u) {
            return Err(IntegrateError::Blowup { step });
        }
        if snap_iter.peek() == Some(&&(step + 1)) {
            times.push((step + 1) as f64 * config.tau);
            snapshots.push(u.clone());
            snap_iter.next();
        }
    }

    Ok(Trajectory {
        times,
        snapshots,
        final_state: u,
        stages: stepper.stages(),
        steps: n_steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spatial::norm;
    use approx::assert_relative_eq;

    fn scalar_op(lambda: f64) -> DiscreteOperator {
        DiscreteOperator {
            n_interior: 1,
            h: 1.0,
            sub: vec![],
            diag: vec![-lambda],
            sup: vec![],
            lambda_max_bound: lambda,
        }
    }

    #[test]
    fn coefficient_relations() {
        let params = ChebyshevParams::new(9, 0.05).unwrap();
        let c = StageCoefficients::new(&params);
        assert_eq!(c.stages(), 9);
        assert_relative_eq!(c.mu[0], params.omega1 / params.omega0, max_relative = 1e-15);
        assert_relative_eq!(c.nu[0], 9.0 * params.omega1 / 2.0, max_relative = 1e-15);
        assert_relative_eq!(c.kappa[0], 9.0 * c.mu[0], max_relative = 1e-15);
        // against direct Chebyshev evaluations at omega0
        for i in 2..=9u32 {
            let t_i = crate::chebyshev::cheb_t(i, params.omega0);
            let t_im1 = crate::chebyshev::cheb_t(i - 1, params.omega0);
            let t_im2 = crate::chebyshev::cheb_t(i - 2, params.omega0);
            let k = (i - 1) as usize;
            assert_relative_eq!(c.mu[k], 2.0 * params.omega1 * t_im1 / t_i, max_relative = 1e-13);
            assert_relative_eq!(c.nu[k], 2.0 * params.omega0 * t_im1 / t_i, max_relative = 1e-13);
            assert_relative_eq!(c.kappa[k], -t_im2 / t_i, epsilon = 1e-13);
            assert_eq!(c.kappa[k], 1.0 - c.nu[k]);
        }
    }

    #[test]
    fn scalar_recursions_match_stability_functions() {
        // the defining identity: one step = A_s(-tau lambda) u + B_s(-tau lambda) g
        for s in [1u32, 2, 3, 7, 20] {
            for eta in [0.05, 0.5] {
                let params = ChebyshevParams::new(s, eta).unwrap();
                let lambda = 3.7;
                let tau = 0.9 * params.stability_length / lambda;
                let z = -tau * lambda;
                let op = scalar_op(lambda);
                let coeffs = StageCoefficients::new(&params);
                let (u, g) = (0.83, -0.41);

                let got = step_skrock(&op, &coeffs, &[u], &[g], tau)[0];
                let want = params.stability_a(z) * u + params.stability_b(MethodKind::SkRock, z) * g;
                assert_relative_eq!(got, want, max_relative = 1e-10);

                let got = step_variant(&op, &coeffs, &[u], &[g], tau)[0];
                let want = params.stability_a(z) * u + params.stability_b(MethodKind::Variant, z) * g;
                assert_relative_eq!(got, want, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn variant_limit_at_zero_stiffness() {
        // lambda -> 0 with u = 0, g = 1 gives B_s(0) = 1
        let params = ChebyshevParams::new(5, 0.05).unwrap();
        let coeffs = StageCoefficients::new(&params);
        let op = scalar_op(1e-14);
        let got = step_variant(&op, &coeffs, &[0.0], &[1.0], 0.01)[0];
        assert_relative_eq!(got, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn zero_step_leaves_state_unchanged() {
        let params = ChebyshevParams::new(6, 0.05).unwrap();
        let coeffs = StageCoefficients::new(&params);
        let op = DiscreteOperator::laplacian(10).unwrap();
        let u: Vec<f64> = (0..9).map(|i| 0.1 * i as f64 + 0.3).collect();
        let g = vec![0.0; 9];
        assert_eq!(step_skrock(&op, &coeffs, &u, &g, 0.0), u);
        assert_eq!(step_variant(&op, &coeffs, &u, &g, 0.0), u);
        assert_eq!(step_implicit_euler(&op, &u, &g, 0.0), u);
    }

    #[test]
    fn drift_propagation_on_eigenvectors() {
        // with g = 0 an eigenvector picks up exactly A_s(-tau lambda_m)
        let op = DiscreteOperator::laplacian(50).unwrap();
        let dec = op.decompose().unwrap();
        let params = ChebyshevParams::new(12, 0.05).unwrap();
        let coeffs = StageCoefficients::new(&params);
        let tau = params.stability_length / op.lambda_max_bound;
        for m in [0usize, 3, 30] {
            let e = dec.eigenvectors[m].clone();
            let factor = params.stability_a(-tau * dec.eigenvalues[m]);
            let g = vec![0.0; e.len()];
            let got = step_skrock(&op, &coeffs, &e, &g, tau);
            for (gi, ei) in got.iter().zip(&e) {
                assert_relative_eq!(gi, &(factor * ei), epsilon = 1e-9 * factor.abs().max(1e-3));
            }
        }
    }

    #[test]
    fn skrock_and_variant_share_the_drift_polynomial() {
        let op = DiscreteOperator::laplacian(40).unwrap();
        let params = ChebyshevParams::new(8, 0.05).unwrap();
        let coeffs = StageCoefficients::new(&params);
        let tau = 0.8 * params.stability_length / op.lambda_max_bound;
        let u = op.sample(|x| (std::f64::consts::PI * x).sin() + 0.2 * (9.0 * x).cos());
        let g = vec![0.0; u.len()];
        let a = step_skrock(&op, &coeffs, &u, &g, tau);
        let b = step_variant(&op, &coeffs, &u, &g, tau);
        let scale = norm(op.h, &a);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn implicit_euler_scalar_and_contractivity() {
        let op = scalar_op(4.0);
        let got = step_implicit_euler(&op, &[1.2], &[0.6], 0.5)[0];
        assert_relative_eq!(got, (1.2 + 0.6) / 3.0, max_relative = 1e-14);

        // unconditional contraction with g = 0, even for enormous tau
        let grid = DiscreteOperator::laplacian(30).unwrap();
        let mut u = grid.sample(|x| (5.0 * x).sin());
        let g = vec![0.0; u.len()];
        for _ in 0..20 {
            let next = step_implicit_euler(&grid, &u, &g, 50.0);
            assert!(norm(grid.h, &next) <= norm(grid.h, &u) * (1.0 + 1e-12));
            u = next;
        }
    }

    #[test]
    fn explicit_euler_scalar_and_instability() {
        let op = scalar_op(3.0);
        let got = step_explicit_euler(&op, &[2.0], &[0.5], 0.1)[0];
        assert_relative_eq!(got, (1.0 - 0.3) * 2.0 + 0.5, max_relative = 1e-14);

        // tau lambda > 2 blows up geometrically on the top eigenvector
        let grid = DiscreteOperator::laplacian(20).unwrap();
        let dec = grid.decompose().unwrap();
        let lambda_top = *dec.eigenvalues.last().unwrap();
        let tau = 2.5 / lambda_top;
        let mut u = dec.eigenvectors.last().unwrap().clone();
        let g = vec![0.0; u.len()];
        let n0 = norm(grid.h, &u);
        for _ in 0..60 {
            u = step_explicit_euler(&grid, &u, &g, tau);
        }
        assert!(norm(grid.h, &u) > 1e6 * n0);
    }

    #[test]
    fn explicit_euler_first_order_in_time() {
        // Richardson against the spectral exponential
        let op = DiscreteOperator::laplacian(12).unwrap();
        let dec = op.decompose().unwrap();
        let u0 = op.sample(|x| x * (1.0 - x));
        let t = 0.004;
        let exact = dec.apply_function(|z| (t * z).exp(), &u0);
        let mut errs = Vec::new();
        for n_steps in [64usize, 128, 256] {
            let tau = t / n_steps as f64;
            let mut u = u0.clone();
            let g = vec![0.0; u.len()];
            for _ in 0..n_steps {
                u = step_explicit_euler(&op, &u, &g, tau);
            }
            let diff: Vec<f64> = u.iter().zip(&exact).map(|(a, b)| a - b).collect();
            errs.push(norm(op.h, &diff));
        }
        let r1 = errs[0] / errs[1];
        let r2 = errs[1] / errs[2];
        assert!((r1 - 2.0).abs() < 0.2, "ratio {r1}");
        assert!((r2 - 2.0).abs() < 0.2, "ratio {r2}");
    }

    #[test]
    fn stage_selection_examples() {
        assert_eq!(select_stages(0.1, 1.0, 0.05), 1);
        // l_7 = 94.83 < 98 <= l_8 = 123.9
        assert_eq!(select_stages(1.0, 98.0, 0.05), 8);
        // against a direct scan of make_params
        let target = 2000.0;
        let s = select_stages(1.0, target, 0.05);
        let p = ChebyshevParams::new(s, 0.05).unwrap();
        assert!(p.stability_length >= target);
        if s > 1 {
            let q = ChebyshevParams::new(s - 1, 0.05).unwrap();
            assert!(q.stability_length < target);
        }
    }

    #[test]
    fn stage_count_scaling() {
        // s stays within ceil(sqrt(tau lambda / (2 - 4 eta/3))) + 1
        let eta = 0.05;
        for target in [0.5, 3.0, 50.0, 977.0, 31_413.0] {
            let s = select_stages(1.0, target, eta);
            let cap = (target / (2.0 - 4.0 * eta / 3.0)).sqrt().ceil() as u32 + 1;
            assert!(s <= cap, "target {target}: s = {s} > cap {cap}");
        }
    }

    #[test]
    fn contractivity_under_the_stability_condition() {
        let op = DiscreteOperator::assemble(35, |x| 1.0 + 0.5 * x).unwrap();
        let u0 = op.sample(|x| (7.3 * x).sin() - 0.4 * x);
        let g = vec![0.0; u0.len()];
        for method in [
            MethodKind::SkRock,
            MethodKind::Variant,
            MethodKind::ImplicitEuler,
            MethodKind::ExplicitEuler,
        ] {
            let tau = match method {
                MethodKind::ExplicitEuler => 1.9 / op.lambda_max_bound,
                _ => 120.0 / op.lambda_max_bound,
            };
            let stepper =
                Stepper::new(method, tau, 0.05, StagePolicy::Auto, op.lambda_max_bound).unwrap();
            let mut u = u0.clone();
            for _ in 0..30 {
                let next = stepper.step(&op, &u, &g);
                assert!(
                    norm(op.h, &next) <= norm(op.h, &u) * (1.0 + 1e-12),
                    "{method} expanded the norm"
                );
                u = next;
            }
        }
    }

    #[test]
    fn integrate_decays_an_eigenvector() {
        let op = DiscreteOperator::laplacian(40).unwrap();
        let dec = op.decompose().unwrap();
        let lambda1 = dec.eigenvalues[0];
        let tau = 0.0125;
        let config = SolveConfig {
            method: MethodKind::SkRock,
            tau,
            eta: 0.05,
            t_final: 0.5,
            stage_policy: StagePolicy::Auto,
            master_seed: 0,
            initial_condition: |x| (std::f64::consts::PI * x).sin(),
            snapshot_times: vec![],
        };
        let spec = NoiseSpec::additive_white(0.0);
        let traj = integrate(&config, &op, &spec, &|_| 0.0).unwrap();
        let params = ChebyshevParams::new(traj.stages, 0.05).unwrap();
        let factor = params.stability_a(-tau * lambda1).powi(traj.steps as i32);
        let expected: Vec<f64> = op
            .sample(|x| (std::f64::consts::PI * x).sin())
            .iter()
            .map(|v| v * factor)
            .collect();
        // the grid sine is the exact discrete eigenvector for a = 1
        let diff: Vec<f64> = traj
            .final_state
            .iter()
            .zip(&expected)
            .map(|(a, b)| a - b)
            .collect();
        assert!(norm(op.h, &diff) <= 1e-8 * norm(op.h, &expected).max(1e-8));
        assert!(norm(op.h, &traj.final_state) < norm(op.h, &expected) / factor);
    }

    #[test]
    fn integrate_zero_stays_zero() {
        let op = DiscreteOperator::laplacian(16).unwrap();
        let config = SolveConfig {
            method: MethodKind::Variant,
            tau: 0.01,
            eta: 0.05,
            t_final: 0.2,
            stage_policy: StagePolicy::Auto,
            master_seed: 5,
            initial_condition: |_| 0.0,
            snapshot_times: vec![0.0, 0.1],
        };
        let spec = NoiseSpec::additive_white(0.0);
        let traj = integrate(&config, &op, &spec, &|_| 0.0).unwrap();
        assert!(traj.final_state.iter().all(|&v| v == 0.0));
        assert_eq!(traj.times, vec![0.0, 0.1]);
        assert_eq!(traj.snapshots.len(), 2);
    }

    #[test]
    fn integrate_rejects_bad_config() {
        let op = DiscreteOperator::laplacian(8).unwrap();
        let spec = NoiseSpec::additive_white(0.0);
        let mut config = SolveConfig {
            method: MethodKind::SkRock,
            tau: 0.013,
            eta: 0.05,
            t_final: 0.1,
            stage_policy: StagePolicy::Auto,
            master_seed: 0,
            initial_condition: |_| 0.0,
            snapshot_times: vec![],
        };
        assert!(matches!(
            integrate(&config, &op, &spec, &|_| 0.0),
            Err(IntegrateError::InvalidConfig(_))
        ));
        config.tau = 1.5;
        assert!(matches!(
            integrate(&config, &op, &spec, &|_| 0.0),
            Err(IntegrateError::InvalidConfig(_))
        ));
    }

    #[test]
    fn integrate_reports_blowup() {
        let op = DiscreteOperator::laplacian(100).unwrap();
        let config = SolveConfig {
            method: MethodKind::ExplicitEuler,
            tau: 0.01, // tau lambda_max = 400 >> 2
            eta: 0.05,
            t_final: 1.0,
            stage_policy: StagePolicy::Auto,
            master_seed: 1,
            initial_condition: |x| (2.0 * std::f64::consts::PI * x).sin(),
            snapshot_times: vec![],
        };
        let spec = NoiseSpec::additive_white(1.0);
        match integrate(&config, &op, &spec, &|u: f64| -u - u.sin()) {
            Err(IntegrateError::Blowup { step }) => assert!(step < 100),
            other => panic!("expected blow-up, got {other:?}"),
        }
    }
}
