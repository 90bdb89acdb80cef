//! Numerical scans of the abstract stability conditions behind the
//! convergence theory, for every method kind over dense `(s, z)` grids.
//!
//! "Finite supremum" is not machine checkable, so each unbounded condition
//! is operationalized as a no-growth-trend criterion: the empirical supremum
//! over the upper part of the scanned range must stay within a factor 2 of
//! the supremum over the lower part. The damping condition has a genuine
//! threshold (`sup |A_s| <= 1 - 1e-4` away from the origin). Reported
//! suprema, witnesses, and analytic comparators are attached to every
//! report; the pass flag is always a pure function of the scanned values and
//! the documented rule.

use crate::chebyshev::{cheb_t, cheb_u, ChebyshevParams, MethodKind};
use num_complex::Complex64;
use rayon::prelude::*;

/// Damping values scanned by the full condition suite. The theory
/// quantifies over every `delta` in `(0, 1]`; this fixed list is the
/// documented restriction.
pub const DAMPING_DELTAS: [f64; 4] = [1.0, 1e-1, 1e-2, 1e-3];

/// Margin below 1 demanded from the damping supremum. For the scanned
/// deltas the stabilized methods keep a margin above 1e-3; a rational
/// method whose `|A(z)|` creeps back to 1 at infinite stiffness lands above
/// `1 - 1e-4` on the truncated grid and fails.
pub const DAMPING_MARGIN: f64 = 1e-4;

/// Trend factor of the no-growth criterion.
pub const TREND_FACTOR: f64 = 2.0;

/// Stability length scanned for the explicit Euler method (the theory
/// admits any value strictly below 2).
pub const EXPLICIT_EULER_LENGTH: f64 = 1.9;

/// Methods the verifier can scan. Extends the production
/// [`MethodKind`] with Crank-Nicolson, which exists here purely as the
/// negative example for the damping condition (A-stable but not L-stable).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScanMethod {
    SkRock,
    Variant,
    ImplicitEuler,
    ExplicitEuler,
    CrankNicolson,
}

impl ScanMethod {
    pub fn name(self) -> &'static str {
        match self {
            ScanMethod::SkRock => "sk-rock",
            ScanMethod::Variant => "variant",
            ScanMethod::ImplicitEuler => "implicit-euler",
            ScanMethod::ExplicitEuler => "explicit-euler",
            ScanMethod::CrankNicolson => "crank-nicolson",
        }
    }

    pub fn all() -> [ScanMethod; 5] {
        [
            ScanMethod::SkRock,
            ScanMethod::Variant,
            ScanMethod::ImplicitEuler,
            ScanMethod::ExplicitEuler,
            ScanMethod::CrankNicolson,
        ]
    }

    /// The two families whose stability functions depend on the stage count.
    pub fn is_chebyshev(self) -> bool {
        matches!(self, ScanMethod::SkRock | ScanMethod::Variant)
    }
}

impl From<MethodKind> for ScanMethod {
    fn from(kind: MethodKind) -> Self {
        match kind {
            MethodKind::SkRock => ScanMethod::SkRock,
            MethodKind::Variant => ScanMethod::Variant,
            MethodKind::ImplicitEuler => ScanMethod::ImplicitEuler,
            MethodKind::ExplicitEuler => ScanMethod::ExplicitEuler,
        }
    }
}

impl std::fmt::Display for ScanMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ScanMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sk-rock" | "skrock" => Ok(ScanMethod::SkRock),
            "variant" => Ok(ScanMethod::Variant),
            "implicit-euler" | "implicit" => Ok(ScanMethod::ImplicitEuler),
            "explicit-euler" | "explicit" => Ok(ScanMethod::ExplicitEuler),
            "crank-nicolson" | "cn" => Ok(ScanMethod::CrankNicolson),
            other => Err(format!("unknown method '{other}'")),
        }
    }
}

/// Identifiers of the scanned conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConditionId {
    /// Consistency values `A_s(0) = A_s'(0) = B_s(0) = 1`.
    Values,
    /// `(1 + |z|) B_s(z)^2` bounded on `[-L_s, 0]` uniformly in `s`.
    BoundB,
    /// `sup |A_s(z)| < 1` on `[-L_s, -delta]` uniformly in `s`.
    Damping,
    /// `|A_s| + |B_s|` bounded on a complex disc around the origin.
    Disc,
    /// `min(1, |z|) / (1 - A_s(z)^2)` bounded (higher-order noise regime).
    NewAssump,
    /// `n |A_s(z)^n - e^{nz}|` bounded uniformly in `n`, `s`, `z`.
    Semigroup,
    /// Chebyshev identity `T_s^2 + U_{s-1}^2 (1 - x^2) = 1`.
    Identity,
}

impl ConditionId {
    pub fn code(self) -> &'static str {
        match self {
            ConditionId::Values => "C-values",
            ConditionId::BoundB => "C-boundB",
            ConditionId::Damping => "C-damping",
            ConditionId::Disc => "C-disc",
            ConditionId::NewAssump => "C-newassump",
            ConditionId::Semigroup => "C-semigroup",
            ConditionId::Identity => "C-identity",
        }
    }
}

impl std::fmt::Display for ConditionId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.code())
    }
}

/// Grid resolutions of the scans. Defaults follow the documented
/// operationalization: stages up to 200, 10^4 points per stability
/// interval, 360 boundary angles, powers of two up to 1000 for the
/// semigroup power index, and truncation at 10^6 for the methods with an
/// unbounded stability domain.
#[derive(Debug, Clone, Copy)]
pub struct ScanConfig {
    pub s_max: u32,
    pub z_points: usize,
    pub disc_angles: usize,
    pub n_max: u32,
    pub truncation: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            s_max: 200,
            z_points: 10_000,
            disc_angles: 360,
            n_max: 1000,
            truncation: 1e6,
        }
    }
}

impl ScanConfig {
    /// A reduced-resolution configuration for quick checks.
    pub fn coarse() -> Self {
        ScanConfig {
            s_max: 60,
            z_points: 1500,
            disc_angles: 90,
            n_max: 200,
            truncation: 1e5,
        }
    }
}

/// Outcome of one condition scan. The pass flag is a pure function of the
/// recorded suprema and the condition's documented rule (`criterion`).
#[derive(Debug, Clone)]
pub struct ConditionReport {
    pub id: ConditionId,
    /// Scanned method; `None` for the method-independent identity check.
    pub method: Option<ScanMethod>,
    pub eta: f64,
    /// Damping offset for [`ConditionId::Damping`], unused otherwise.
    pub delta: Option<f64>,
    pub s_min: u32,
    pub s_max: u32,
    pub grid_points: usize,
    /// Empirical supremum of the scanned quantity.
    pub supremum: f64,
    /// Supremum restricted to the lower part of the range (trend rule).
    pub low_range_supremum: f64,
    /// Supremum restricted to the upper part of the range (trend rule).
    pub high_range_supremum: f64,
    pub witness_s: u32,
    /// Location of the supremum: `z` for interval scans, `x` for the
    /// identity, the boundary angle in radians for the disc scan.
    pub witness_z: f64,
    pub pass: bool,
    /// Human-readable pass rule.
    pub criterion: &'static str,
    /// Analytic value printed alongside where the theory provides one.
    pub comparator: Option<f64>,
}

struct Scanner {
    method: ScanMethod,
    params: Option<ChebyshevParams>,
}

impl Scanner {
    fn new(method: ScanMethod, stages: u32, eta: f64) -> Self {
        let params = if method.is_chebyshev() {
            Some(ChebyshevParams::new(stages, eta).expect("scan damping validated by caller"))
        } else {
            None
        };
        Scanner { method, params }
    }

    fn a(&self, z: f64) -> f64 {
        match self.method {
            ScanMethod::SkRock | ScanMethod::Variant => self.params.as_ref().unwrap().stability_a(z),
            ScanMethod::ImplicitEuler => 1.0 / (1.0 - z),
            ScanMethod::ExplicitEuler => 1.0 + z,
            ScanMethod::CrankNicolson => (1.0 + 0.5 * z) / (1.0 - 0.5 * z),
        }
    }

    fn b(&self, z: f64) -> f64 {
        match self.method {
            ScanMethod::SkRock => self.params.as_ref().unwrap().stability_b(MethodKind::SkRock, z),
            ScanMethod::Variant => self.params.as_ref().unwrap().stability_b(MethodKind::Variant, z),
            ScanMethod::ImplicitEuler => 1.0 / (1.0 - z),
            ScanMethod::ExplicitEuler => 1.0,
            ScanMethod::CrankNicolson => 1.0 / (1.0 - 0.5 * z),
        }
    }

    fn a_complex(&self, z: Complex64) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        match self.method {
            ScanMethod::SkRock | ScanMethod::Variant => {
                self.params.as_ref().unwrap().stability_a_complex(z)
            }
            ScanMethod::ImplicitEuler => one / (one - z),
            ScanMethod::ExplicitEuler => one + z,
            ScanMethod::CrankNicolson => (one + z * 0.5) / (one - z * 0.5),
        }
    }

    fn b_complex(&self, z: Complex64) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        match self.method {
            ScanMethod::SkRock => self
                .params
                .as_ref()
                .unwrap()
                .stability_b_complex(MethodKind::SkRock, z),
            ScanMethod::Variant => self
                .params
                .as_ref()
                .unwrap()
                .stability_b_complex(MethodKind::Variant, z),
            ScanMethod::ImplicitEuler => one / (one - z),
            ScanMethod::ExplicitEuler => one,
            ScanMethod::CrankNicolson => one / (one - z * 0.5),
        }
    }

    /// End of the scanned stability interval `[-L, 0]`.
    fn interval_length(&self, cfg: &ScanConfig) -> f64 {
        match self.method {
            ScanMethod::SkRock | ScanMethod::Variant => {
                self.params.as_ref().unwrap().stability_length
            }
            ScanMethod::ExplicitEuler => EXPLICIT_EULER_LENGTH,
            // L = infinity for the rational methods; scan a truncation
            ScanMethod::ImplicitEuler | ScanMethod::CrankNicolson => cfg.truncation,
        }
    }

    /// Radius of the scanned complex disc. The implicit Euler function has
    /// its pole at `z = 1`, on the unit circle; its disc condition holds for
    /// any radius below 1, so that method scans `|z| = 1/2`.
    fn disc_radius(&self) -> f64 {
        match self.method {
            ScanMethod::ImplicitEuler => 0.5,
            _ => 1.0,
        }
    }
}

fn linear_grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(move |k| if k == n - 1 { hi } else { lo + step * k as f64 })
}

/// Log-spaced points `-hi_abs ..= -lo_abs` (negative z, decreasing |z|).
fn log_grid(lo_abs: f64, hi_abs: f64, n: usize) -> impl Iterator<Item = f64> {
    let ratio = (hi_abs / lo_abs).ln() / (n - 1) as f64;
    (0..n).map(move |k| {
        if k == 0 {
            -hi_abs
        } else if k == n - 1 {
            -lo_abs
        } else {
            -hi_abs * (-(ratio * k as f64)).exp()
        }
    })
}

fn uses_log_grid(method: ScanMethod) -> bool {
    matches!(method, ScanMethod::ImplicitEuler | ScanMethod::CrankNicolson)
}

#[derive(Clone, Copy)]
struct SupWitness {
    sup: f64,
    s: u32,
    z: f64,
}

impl SupWitness {
    fn empty() -> Self {
        SupWitness { sup: f64::NEG_INFINITY, s: 0, z: 0.0 }
    }

    fn update(&mut self, value: f64, s: u32, z: f64) {
        if value > self.sup {
            self.sup = value;
            self.s = s;
            self.z = z;
        }
    }

    fn merge(self, other: Self) -> Self {
        // deterministic regardless of reduction order: ties resolved by (s, z)
        if other.sup > self.sup
            || (other.sup == self.sup && (other.s, other.z) < (self.s, self.z))
        {
            other
        } else {
            self
        }
    }
}

/// Scans `value(s, z)` over all stages and the method's interval, returning
/// the global witness plus the low/high stage-range suprema used by the
/// trend rule.
fn scan_over_stages(
    method: ScanMethod,
    eta: f64,
    cfg: &ScanConfig,
    grid: impl Fn(&Scanner, &ScanConfig) -> Vec<f64> + Sync,
    value: impl Fn(&Scanner, f64) -> f64 + Sync,
) -> (SupWitness, f64, f64) {
    let s_lo = (cfg.s_max / 4).max(1);
    let s_hi = (cfg.s_max / 2).max(1);
    let per_s: Vec<(u32, SupWitness)> = (1..=cfg.s_max)
        .into_par_iter()
        .map(|s| {
            let scanner = Scanner::new(method, s, eta);
            let mut w = SupWitness::empty();
            for z in grid(&scanner, cfg) {
                w.update(value(&scanner, z), s, z);
            }
            (s, w)
        })
        .collect();
    let mut total = SupWitness::empty();
    let mut low = f64::NEG_INFINITY;
    let mut high = f64::NEG_INFINITY;
    for (s, w) in per_s {
        total = total.merge(w);
        if s <= s_lo {
            low = low.max(w.sup);
        }
        if s >= s_hi {
            high = high.max(w.sup);
        }
    }
    (total, low, high)
}

/// Consistency values: `|A_s(0) - 1|` and `|B_s(0) - 1|` within 1e-12 and
/// `|A_s'(0) - 1|` within 1e-6 (centered difference, absolute step 1e-6).
/// The supremum is normalized by the per-quantity tolerance, so the pass
/// rule is `sup <= 1`.
pub fn check_values(method: ScanMethod, eta: f64, cfg: &ScanConfig) -> ConditionReport {
    let (w, low, high) = scan_over_stages(
        method,
        eta,
        cfg,
        |_, _| vec![0.0],
        |scanner, _| {
            let dev_a = (scanner.a(0.0) - 1.0).abs() / 1e-12;
            let dev_b = (scanner.b(0.0) - 1.0).abs() / 1e-12;
            let d = 1e-6;
            let slope = (scanner.a(d) - scanner.a(-d)) / (2.0 * d);
            let dev_a1 = (slope - 1.0).abs() / 1e-6;
            dev_a.max(dev_b).max(dev_a1)
        },
    );
    ConditionReport {
        id: ConditionId::Values,
        method: Some(method),
        eta,
        delta: None,
        s_min: 1,
        s_max: cfg.s_max,
        grid_points: 1,
        supremum: w.sup,
        low_range_supremum: low,
        high_range_supremum: high,
        witness_s: w.s,
        witness_z: w.z,
        pass: w.sup <= 1.0,
        criterion: "tolerance-normalized deviation of A(0), B(0), A'(0) from 1 at most 1",
        comparator: None,
    }
}

/// Noise-function bound: `(1 + |z|) B_s(z)^2` over `[-L_s, 0]`, pass if the
/// supremum over `s >= s_max/2` stays within a factor 2 of the supremum over
/// `s <= s_max/4`.
pub fn check_bound_b(method: ScanMethod, eta: f64, cfg: &ScanConfig) -> ConditionReport {
    let (w, low, high) = scan_over_stages(
        method,
        eta,
        cfg,
        |scanner, cfg| {
            let length = scanner.interval_length(cfg);
            if uses_log_grid(method) {
                log_grid(1e-9, length, cfg.z_points - 1).chain([0.0]).collect()
            } else {
                linear_grid(-length, 0.0, cfg.z_points).collect()
            }
        },
        |scanner, z| {
            let b = scanner.b(z);
            (1.0 + z.abs()) * b * b
        },
    );
    ConditionReport {
        id: ConditionId::BoundB,
        method: Some(method),
        eta,
        delta: None,
        s_min: 1,
        s_max: cfg.s_max,
        grid_points: cfg.z_points,
        supremum: w.sup,
        low_range_supremum: low,
        high_range_supremum: high,
        witness_s: w.s,
        witness_z: w.z,
        pass: high <= TREND_FACTOR * low,
        criterion: "no growth in s: sup over s >= s_max/2 within 2x of sup over s <= s_max/4",
        comparator: None,
    }
}

/// Damping away from the origin: `sup |A_s(z)|` over `[-L_s, -delta]`, pass
/// if the supremum keeps a margin of [`DAMPING_MARGIN`] below 1. For the
/// stabilized methods the large-s limit from the hyperbolic asymptotics is
/// attached as comparator (with the radicand clamped at zero, where the
/// oscillation envelope `1 / cosh(sqrt(2 eta))` takes over).
pub fn check_damping(method: ScanMethod, eta: f64, delta: f64, cfg: &ScanConfig) -> ConditionReport {
    assert!(delta > 0.0 && delta <= 1.0, "delta must be in (0, 1]");
    let (w, low, high) = scan_over_stages(
        method,
        eta,
        cfg,
        |scanner, cfg| {
            let length = scanner.interval_length(cfg);
            log_grid(delta, length.max(delta * (1.0 + 1e-12)), cfg.z_points).collect()
        },
        |scanner, z| scanner.a(z).abs(),
    );
    let comparator = match method {
        ScanMethod::SkRock | ScanMethod::Variant => {
            let u = (2.0 * eta).sqrt();
            let omega1_s2_limit = u / u.tanh();
            let radicand = (2.0 * (eta - delta * omega1_s2_limit)).max(0.0);
            Some(radicand.sqrt().cosh() / u.cosh())
        }
        ScanMethod::ImplicitEuler => Some(1.0 / (1.0 + delta)),
        ScanMethod::ExplicitEuler => Some((1.0 - delta).max(EXPLICIT_EULER_LENGTH - 1.0)),
        ScanMethod::CrankNicolson => Some(1.0),
    };
    ConditionReport {
        id: ConditionId::Damping,
        method: Some(method),
        eta,
        delta: Some(delta),
        s_min: 1,
        s_max: cfg.s_max,
        grid_points: cfg.z_points,
        supremum: w.sup,
        low_range_supremum: low,
        high_range_supremum: high,
        witness_s: w.s,
        witness_z: w.z,
        pass: w.sup <= 1.0 - DAMPING_MARGIN,
        criterion: "sup |A| on [-L, -delta] at most 1 - 1e-4",
        comparator,
    }
}

/// Complex disc bound: `|A_s| + |B_s|` on the boundary circle (the maximum
/// principle reduces the disc to its boundary). Radius 1 except for the
/// implicit Euler method, whose pole sits at `z = 1`. Trend rule in `s`;
/// the analytic bound `e^{eta + e^eta}` for `|A_s|` alone is attached as
/// comparator for the stabilized methods.
pub fn check_disc(method: ScanMethod, eta: f64, cfg: &ScanConfig) -> ConditionReport {
    let angles = cfg.disc_angles;
    let (w, low, high) = scan_over_stages(
        method,
        eta,
        cfg,
        |scanner, cfg| {
            let _ = scanner;
            (0..cfg.disc_angles)
                .map(|k| std::f64::consts::TAU * k as f64 / cfg.disc_angles as f64)
                .collect()
        },
        |scanner, angle| {
            let z = Complex64::from_polar(scanner.disc_radius(), angle);
            scanner.a_complex(z).norm() + scanner.b_complex(z).norm()
        },
    );
    let comparator = if method.is_chebyshev() {
        Some((eta + eta.exp()).exp())
    } else {
        None
    };
    ConditionReport {
        id: ConditionId::Disc,
        method: Some(method),
        eta,
        delta: None,
        s_min: 1,
        s_max: cfg.s_max,
        grid_points: angles,
        supremum: w.sup,
        low_range_supremum: low,
        high_range_supremum: high,
        witness_s: w.s,
        witness_z: w.z,
        pass: high <= TREND_FACTOR * low,
        criterion: "no growth in s of sup(|A| + |B|) on the disc boundary",
        comparator,
    }
}

/// Higher-order noise condition: `min(1, |z|) / (1 - A_s(z)^2)` on
/// `[-L_s, -1e-6]` (the origin is removable). Trend rule in `s`.
pub fn check_newassump(method: ScanMethod, eta: f64, cfg: &ScanConfig) -> ConditionReport {
    let (w, low, high) = scan_over_stages(
        method,
        eta,
        cfg,
        |scanner, cfg| {
            let length = scanner.interval_length(cfg);
            log_grid(1e-6, length, cfg.z_points).collect()
        },
        |scanner, z| {
            let a = scanner.a(z);
            z.abs().min(1.0) / (1.0 - a * a)
        },
    );
    ConditionReport {
        id: ConditionId::NewAssump,
        method: Some(method),
        eta,
        delta: None,
        s_min: 1,
        s_max: cfg.s_max,
        grid_points: cfg.z_points,
        supremum: w.sup,
        low_range_supremum: low,
        high_range_supremum: high,
        witness_s: w.s,
        witness_z: w.z,
        pass: high <= TREND_FACTOR * low && w.sup.is_finite() && w.sup > 0.0,
        criterion: "no growth in s of sup min(1,|z|) / (1 - A^2)",
        comparator: None,
    }
}

/// Semigroup approximation: `n |A_s(z)^n - e^{nz}|` over a power ladder
/// `n = 1, 2, 4, ...` and the interval grid. Pass requires no growth along
/// both the stage range and the power ladder.
pub fn check_semigroup(method: ScanMethod, eta: f64, n_max: u32, cfg: &ScanConfig) -> ConditionReport {
    assert!(n_max as usize <= 10_000, "semigroup power budget exceeded");
    let mut powers: Vec<u32> = std::iter::successors(Some(1u32), |n| n.checked_mul(2))
        .take_while(|&n| n < n_max)
        .collect();
    powers.push(n_max);
    let s_cap = cfg.s_max.min(100);
    let cfg_sem = ScanConfig { s_max: s_cap, z_points: (cfg.z_points / 5).max(500), ..*cfg };

    // per (s, n) suprema so the trend can be read along both axes
    let per_s: Vec<(u32, Vec<SupWitness>)> = (1..=s_cap)
        .into_par_iter()
        .map(|s| {
            let scanner = Scanner::new(method, s, eta);
            let length = scanner.interval_length(&cfg_sem);
            let grid: Vec<f64> = if uses_log_grid(method) {
                log_grid(1e-9, length, cfg_sem.z_points - 1).chain([0.0]).collect()
            } else {
                linear_grid(-length, 0.0, cfg_sem.z_points).collect()
            };
            let mut by_n = vec![SupWitness::empty(); powers.len()];
            for &z in &grid {
                let a = scanner.a(z);
                for (slot, &n) in by_n.iter_mut().zip(&powers) {
                    let v = n as f64 * (a.powi(n as i32) - (n as f64 * z).exp()).abs();
                    slot.update(v, s, z);
                }
            }
            (s, by_n)
        })
        .collect();

    let s_lo = (s_cap / 4).max(1);
    let s_hi = (s_cap / 2).max(1);
    let half = powers.len() / 2;
    let mut total = SupWitness::empty();
    let (mut s_low, mut s_high) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    let (mut n_low, mut n_high) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for (s, by_n) in per_s {
        for (idx, w) in by_n.iter().enumerate() {
            total = total.merge(*w);
            if s <= s_lo {
                s_low = s_low.max(w.sup);
            }
            if s >= s_hi {
                s_high = s_high.max(w.sup);
            }
            if idx < half {
                n_low = n_low.max(w.sup);
            } else {
                n_high = n_high.max(w.sup);
            }
        }
    }
    let pass = s_high <= TREND_FACTOR * s_low && n_high <= TREND_FACTOR * n_low;
    ConditionReport {
        id: ConditionId::Semigroup,
        method: Some(method),
        eta,
        delta: None,
        s_min: 1,
        s_max: s_cap,
        grid_points: cfg_sem.z_points * powers.len(),
        supremum: total.sup,
        low_range_supremum: n_low,
        high_range_supremum: n_high,
        witness_s: total.s,
        witness_z: total.z,
        pass,
        criterion: "no growth of sup n|A^n - e^{nz}| along either the s range or the n ladder",
        comparator: None,
    }
}

/// Chebyshev identity scan: `|T_s(x)^2 + U_{s-1}(x)^2 (1 - x^2) - 1|` on a
/// uniform grid in `[-1, 1]`, `s` up to `s_max`; threshold 1e-12.
pub fn check_identity(s_max: u32) -> ConditionReport {
    let points = 1000usize;
    let per_s: Vec<SupWitness> = (1..=s_max)
        .into_par_iter()
        .map(|s| {
            let mut w = SupWitness::empty();
            for x in linear_grid(-1.0, 1.0, points + 1) {
                let t = cheb_t(s, x);
                let u = cheb_u(s - 1, x);
                w.update((t * t + u * u * (1.0 - x * x) - 1.0).abs(), s, x);
            }
            w
        })
        .collect();
    let total = per_s.into_iter().fold(SupWitness::empty(), SupWitness::merge);
    ConditionReport {
        id: ConditionId::Identity,
        method: None,
        eta: f64::NAN,
        delta: None,
        s_min: 1,
        s_max,
        grid_points: points + 1,
        supremum: total.sup,
        low_range_supremum: total.sup,
        high_range_supremum: total.sup,
        witness_s: total.s,
        witness_z: total.z,
        pass: total.sup <= 1e-12,
        criterion: "max identity deviation at most 1e-12",
        comparator: None,
    }
}

/// Runs the full condition suite for one method: values, noise bound,
/// damping at every delta in [`DAMPING_DELTAS`], disc bound, higher-order
/// condition, and the semigroup scan.
pub fn run_all(method: ScanMethod, eta: f64, cfg: &ScanConfig) -> Vec<ConditionReport> {
    let mut reports = vec![
        check_values(method, eta, cfg),
        check_bound_b(method, eta, cfg),
    ];
    for delta in DAMPING_DELTAS {
        reports.push(check_damping(method, eta, delta, cfg));
    }
    reports.push(check_disc(method, eta, cfg));
    reports.push(check_newassump(method, eta, cfg));
    reports.push(check_semigroup(method, eta, cfg.n_max, cfg));
    reports
}
