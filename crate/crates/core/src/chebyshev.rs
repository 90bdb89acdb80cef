//! Chebyshev polynomials and the stability functions of the stabilized
//! integrators.
//!
//! The drift stability function shared by both stabilized methods is the
//! shifted, damped first-kind Chebyshev polynomial
//!
//! ```text
//! A_s(z) = T_s(omega0 + omega1 * z) / T_s(omega0),
//! omega0 = 1 + eta / s^2,   omega1 = T_s(omega0) / T_s'(omega0),
//! ```
//!
//! where `eta > 0` is the damping parameter. The noise stability function
//! `B_s` comes in two flavours: the SK-ROCK choice built from second-kind
//! Chebyshev polynomials, and the variant `(A_s(z) - 1) / z`.
//!
//! Everything here is evaluated by the forward three-term recursion
//! `P_{k+1} = 2x P_k - P_{k-1}` in double precision. The trigonometric and
//! hyperbolic closed forms are used only as independent oracles in tests.

use num_complex::Complex64;
use std::ops::{Add, Mul, Sub};
use thiserror::Error;

/// Supremum of the admissible damping range, estimated numerically as the
/// fixed point of `eta = tanh(sqrt(2 eta)) / sqrt(2 eta)`. Treated as a hard
/// constant; we do not recompute it.
pub const ETA_MAX: f64 = 0.7001;

/// Default damping parameter.
pub const DEFAULT_ETA: f64 = 0.05;

/// Empirical supremum of `(1 + |z|) * B_s(z)^2` for the SK-ROCK noise
/// function with `eta = 0.05`, over `s <= 200` and `z` in `[-L_s, 0]`
/// (measured value 1.016; rounded up with headroom). The scans in
/// [`crate::verify`] recompute this quantity; the constant is only used to
/// sanity-check single evaluations.
pub const SKROCK_NOISE_ENVELOPE: f64 = 2.0;

/// Time stepping methods covered by the solver and the verifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MethodKind {
    /// Stabilized method with `B_s` built from second-kind Chebyshev
    /// polynomials; the noise enters through the first internal stage.
    SkRock,
    /// Stabilized method with `B_s(z) = (A_s(z) - 1) / z`; the noise is
    /// injected at every internal stage.
    Variant,
    /// Linear implicit Euler, `A(z) = B(z) = 1 / (1 - z)`.
    ImplicitEuler,
    /// Explicit Euler, `A(z) = 1 + z`, `B(z) = 1`; stable only for
    /// `tau * lambda_max < 2`.
    ExplicitEuler,
}

impl MethodKind {
    /// Kebab-case name used in CSV output and on the command line.
    pub fn name(self) -> &'static str {
        match self {
            MethodKind::SkRock => "sk-rock",
            MethodKind::Variant => "variant",
            MethodKind::ImplicitEuler => "implicit-euler",
            MethodKind::ExplicitEuler => "explicit-euler",
        }
    }

    /// True for the two Chebyshev-stabilized methods (they share `A_s`).
    pub fn is_stabilized(self) -> bool {
        matches!(self, MethodKind::SkRock | MethodKind::Variant)
    }
}

impl std::fmt::Display for MethodKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for MethodKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sk-rock" | "skrock" => Ok(MethodKind::SkRock),
            "variant" => Ok(MethodKind::Variant),
            "implicit-euler" | "implicit" => Ok(MethodKind::ImplicitEuler),
            "explicit-euler" | "explicit" => Ok(MethodKind::ExplicitEuler),
            other => Err(format!("unknown method '{other}'")),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChebyshevError {
    #[error("damping parameter eta = {0} outside the admissible range (0, {ETA_MAX})")]
    DampingOutOfRange(f64),
    #[error("stage count must be at least 1")]
    ZeroStages,
}

fn three_term<T>(degree: u32, x: T, p0: T, p1: T) -> T
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<Output = T>,
{
    if degree == 0 {
        return p0;
    }
    let two_x = x + x;
    let mut prev = p0;
    let mut cur = p1;
    for _ in 1..degree {
        let next = two_x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// First-kind Chebyshev polynomial `T_s(x)` by forward recursion from
/// `T_0 = 1`, `T_1 = x`.
pub fn cheb_t(s: u32, x: f64) -> f64 {
    three_term(s, x, 1.0, x)
}

/// Second-kind Chebyshev polynomial `U_s(x)` by forward recursion from
/// `U_0 = 1`, `U_1 = 2x`.
pub fn cheb_u(s: u32, x: f64) -> f64 {
    three_term(s, x, 1.0, 2.0 * x)
}

/// `T_s` continued to complex arguments; used by the disc-bound scan.
pub fn cheb_t_complex(s: u32, x: Complex64) -> Complex64 {
    three_term(s, x, Complex64::new(1.0, 0.0), x)
}

/// `U_s` continued to complex arguments.
pub fn cheb_u_complex(s: u32, x: Complex64) -> Complex64 {
    three_term(s, x, Complex64::new(1.0, 0.0), x + x)
}

/// One instance of the stabilized method family: stage count, damping, and
/// the derived stability parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChebyshevParams {
    /// Stage count `s >= 1`.
    pub stages: u32,
    /// Damping parameter `eta` in `(0, ETA_MAX)`.
    pub damping: f64,
    /// `omega0 = 1 + eta / s^2`.
    pub omega0: f64,
    /// `omega1 = T_s(omega0) / T_s'(omega0)`.
    pub omega1: f64,
    /// Stability length `L_s = 2 / omega1` used in the step-size condition
    /// `tau * lambda_max <= L_s`. This is the conservative value; see
    /// [`ChebyshevParams::full_stability_length`].
    pub stability_length: f64,
    t_at_omega0: f64,
    u_at_omega0: f64,
}

impl ChebyshevParams {
    /// Builds the parameter set for `stages >= 1` and damping in
    /// `(0, ETA_MAX)`. `omega0` is exact, `omega1` is obtained from the
    /// recursion evaluations `T_s(omega0)` and `T_s'(omega0) = s U_{s-1}(omega0)`.
    pub fn new(stages: u32, damping: f64) -> Result<Self, ChebyshevError> {
        if stages == 0 {
            return Err(ChebyshevError::ZeroStages);
        }
        if !(damping > 0.0 && damping < ETA_MAX) {
            return Err(ChebyshevError::DampingOutOfRange(damping));
        }
        let s2 = (stages as f64) * (stages as f64);
        let omega0 = 1.0 + damping / s2;
        let t_at_omega0 = cheb_t(stages, omega0);
        let u_at_omega0 = cheb_u(stages - 1, omega0);
        let t_prime = stages as f64 * u_at_omega0;
        let omega1 = t_at_omega0 / t_prime;
        Ok(ChebyshevParams {
            stages,
            damping,
            omega0,
            omega1,
            stability_length: 2.0 / omega1,
            t_at_omega0,
            u_at_omega0,
        })
    }

    /// `T_s(omega0)`, the normalization of the drift stability function.
    /// The interior oscillation envelope of `A_s` is `1 / T_s(omega0)`.
    pub fn t_at_omega0(&self) -> f64 {
        self.t_at_omega0
    }

    /// `U_{s-1}(omega0)`, the normalization of the SK-ROCK noise function.
    pub fn u_at_omega0(&self) -> f64 {
        self.u_at_omega0
    }

    /// Length of the maximal interval `[-L, 0]` on which `|A_s| <= 1`,
    /// namely `(1 + omega0) / omega1`. The near-optimality bound
    /// `(2 - 4 eta / 3) s^2` applies to this exact length; the conservative
    /// `stability_length = 2 / omega1` used for step-size control undershoots
    /// it by `eta / (s^2 omega1)` and violates the bound for `s <= 3`.
    pub fn full_stability_length(&self) -> f64 {
        (1.0 + self.omega0) / self.omega1
    }

    /// Drift stability function `A_s(z) = T_s(omega0 + omega1 z) / T_s(omega0)`.
    ///
    /// Defined for all real `z`; the stability condition makes it meaningful
    /// on `[-L_s, 0]`, where `A_s(0) = 1` and `A_s'(0) = 1`.
    pub fn stability_a(&self, z: f64) -> f64 {
        cheb_t(self.stages, self.omega0 + self.omega1 * z) / self.t_at_omega0
    }

    /// `A_s` continued to complex arguments.
    pub fn stability_a_complex(&self, z: Complex64) -> Complex64 {
        let x = z * self.omega1 + self.omega0;
        cheb_t_complex(self.stages, x) / self.t_at_omega0
    }

    /// Noise stability function `B_s(z)` of the requested stabilized method.
    ///
    /// SK-ROCK: `U_{s-1}(omega0 + omega1 z) / U_{s-1}(omega0) * (1 + omega1 z / 2)`.
    /// Variant: `(A_s(z) - 1) / z`, with a series branch for `|z| < 1e-8` to
    /// avoid the cancellation in the quotient near the removable singularity.
    ///
    /// Panics if `kind` is not one of the two stabilized methods.
    pub fn stability_b(&self, kind: MethodKind, z: f64) -> f64 {
        match kind {
            MethodKind::SkRock => {
                let x = self.omega0 + self.omega1 * z;
                cheb_u(self.stages - 1, x) / self.u_at_omega0 * (1.0 + 0.5 * self.omega1 * z)
            }
            MethodKind::Variant => {
                if z.abs() < 1e-8 {
                    // B_s(z) = 1 + A_s''(0) z / 2 + O(z^2); A_s''(0) by a
                    // centered second difference with absolute step 1e-4.
                    let d = 1e-4;
                    let a2 = (self.stability_a(d) - 2.0 + self.stability_a(-d)) / (d * d);
                    1.0 + 0.5 * a2 * z
                } else {
                    (self.stability_a(z) - 1.0) / z
                }
            }
            other => panic!("stability_b is defined for SK-ROCK and the variant, not {other}"),
        }
    }

    /// `B_s` continued to complex arguments (same branch structure as the
    /// real version).
    pub fn stability_b_complex(&self, kind: MethodKind, z: Complex64) -> Complex64 {
        match kind {
            MethodKind::SkRock => {
                let x = z * self.omega1 + self.omega0;
                cheb_u_complex(self.stages - 1, x) / self.u_at_omega0
                    * (z * (0.5 * self.omega1) + 1.0)
            }
            MethodKind::Variant => {
                if z.norm() < 1e-8 {
                    let d = 1e-4;
                    let a2 = (self.stability_a(d) - 2.0 + self.stability_a(-d)) / (d * d);
                    z * (0.5 * a2) + 1.0
                } else {
                    (self.stability_a_complex(z) - 1.0) / z
                }
            }
            other => panic!("stability_b is defined for SK-ROCK and the variant, not {other}"),
        }
    }
}

/// Convenience wrapper matching the operation name used throughout the
/// module documentation.
pub fn make_params(stages: u32, damping: f64) -> Result<ChebyshevParams, ChebyshevError> {
    ChebyshevParams::new(stages, damping)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn first_kind_base_cases() {
        assert_eq!(cheb_t(0, 0.7), 1.0);
        assert_eq!(cheb_t(1, -0.3), -0.3);
        // T_3(cos 60deg) = cos 180deg
        assert_relative_eq!(cheb_t(3, 0.5), -1.0, max_relative = 1e-14);
        // T_s(1) = 1 for all s (exact in floating point)
        assert_eq!(cheb_t(7, 1.0), 1.0);
        assert_eq!(cheb_t(100, 1.0), 1.0);
    }

    #[test]
    fn second_kind_base_cases() {
        assert_eq!(cheb_u(0, 0.3), 1.0);
        assert_eq!(cheb_u(1, 0.3), 0.6);
        // U_{s-1}(1) = s, from T_s'(1) = s^2
        assert_eq!(cheb_u(6, 1.0), 7.0);
    }

    #[test]
    fn trig_oracle_on_the_interval() {
        // Independent closed forms: T_s(cos t) = cos(s t), U_{s-1}(cos t) sin t = sin(s t).
        for s in [1u32, 2, 5, 13, 40] {
            for k in 0..=20 {
                let theta = std::f64::consts::PI * k as f64 / 20.0;
                let x = theta.cos();
                assert_relative_eq!(
                    cheb_t(s, x),
                    (s as f64 * theta).cos(),
                    epsilon = 1e-11,
                    max_relative = 1e-11
                );
                if theta.sin() > 1e-3 {
                    assert_relative_eq!(
                        cheb_u(s - 1, x),
                        (s as f64 * theta).sin() / theta.sin(),
                        epsilon = 1e-10,
                        max_relative = 1e-10
                    );
                }
            }
        }
    }

    #[test]
    fn hyperbolic_oracle_above_one() {
        // T_s(cosh t) = cosh(s t) for arguments > 1, the regime of omega0.
        for s in [1u32, 7, 50] {
            for t in [1e-3_f64, 0.05, 0.3] {
                let x = t.cosh();
                assert_relative_eq!(
                    cheb_t(s, x),
                    (s as f64 * t).cosh(),
                    max_relative = 1e-11
                );
            }
        }
    }

    #[test]
    fn params_small_stage_counts() {
        let p = ChebyshevParams::new(7, 0.05).unwrap();
        assert_relative_eq!(p.omega0, 1.0 + 0.05 / 49.0, max_relative = 1e-15);
        // l_7 = 2/omega1 = 94.83 for eta = 0.05, inside the near-optimality
        // bracket [ (2 - 4 eta/3) 49, 2*49 ] = [94.733, 98].
        assert!(p.stability_length >= (2.0 - 4.0 * 0.05 / 3.0) * 49.0);
        assert!(p.stability_length <= 98.0);
        assert_relative_eq!(p.stability_length, 94.826, max_relative = 1e-3);

        // s = 1 degenerates to omega1 = omega0, hence A_1(z) = 1 + z.
        let p1 = ChebyshevParams::new(1, 0.05).unwrap();
        assert_relative_eq!(p1.omega1, p1.omega0, max_relative = 1e-15);
        assert_relative_eq!(p1.stability_a(-0.4), 0.6, max_relative = 1e-14);
    }

    #[test]
    fn params_asymptotic_limit() {
        // Closed-form limit of omega1 * s^2 from the hyperbolic asymptotics:
        // sqrt(2 eta) / tanh(sqrt(2 eta)).
        let eta = 0.05;
        let p = ChebyshevParams::new(1000, eta).unwrap();
        let u = (2.0 * eta).sqrt();
        let limit = u / u.tanh();
        let ratio = p.omega1 * 1_000_000.0 / limit;
        assert!((ratio - 1.0).abs() <= 0.01, "ratio = {ratio}");
    }

    #[test]
    fn params_domain_errors() {
        assert!(matches!(
            ChebyshevParams::new(7, 0.7001),
            Err(ChebyshevError::DampingOutOfRange(_))
        ));
        assert!(matches!(
            ChebyshevParams::new(7, 0.0),
            Err(ChebyshevError::DampingOutOfRange(_))
        ));
        assert!(matches!(
            ChebyshevParams::new(7, -0.1),
            Err(ChebyshevError::DampingOutOfRange(_))
        ));
        assert!(matches!(
            ChebyshevParams::new(0, 0.05),
            Err(ChebyshevError::ZeroStages)
        ));
    }

    #[test]
    fn stability_a_consistency() {
        for s in [1u32, 3, 7, 25] {
            let p = ChebyshevParams::new(s, 0.05).unwrap();
            assert_eq!(p.stability_a(0.0), 1.0);
            // A_s'(0) = 1 by construction of omega1.
            let d = 1e-6;
            let slope = (p.stability_a(d) - p.stability_a(-d)) / (2.0 * d);
            assert!((slope - 1.0).abs() < 1e-6, "s = {s}, slope = {slope}");
        }
    }

    #[test]
    fn stability_a_oscillation_envelope() {
        // Interior oscillation extrema of T_s sit at x = cos(k pi / s); there
        // |A_s| = 1 / T_s(omega0) which is close to 1 - eta for small eta.
        let p = ChebyshevParams::new(7, 0.05).unwrap();
        let envelope = 1.0 / p.t_at_omega0();
        assert!((envelope - 0.95).abs() < 0.01);
        for k in 1..7 {
            let x = (k as f64 * std::f64::consts::PI / 7.0).cos();
            let z = (x - p.omega0) / p.omega1;
            assert_relative_eq!(p.stability_a(z).abs(), envelope, max_relative = 1e-9);
        }
    }

    #[test]
    fn stability_b_consistency_and_bounds() {
        for kind in [MethodKind::SkRock, MethodKind::Variant] {
            for s in [1u32, 7, 25] {
                let p = ChebyshevParams::new(s, 0.05).unwrap();
                assert_eq!(p.stability_b(kind, 0.0), 1.0, "{kind} s={s}");
            }
        }
        // |z| B^2 at the middle of the stability interval stays inside the
        // measured envelope of the (1 + |z|) B^2 scan.
        let p = ChebyshevParams::new(7, 0.05).unwrap();
        let z = -0.5 * p.stability_length;
        let b = p.stability_b(MethodKind::SkRock, z);
        assert!(z.abs() * b * b <= SKROCK_NOISE_ENVELOPE);
    }

    #[test]
    fn variant_b_matches_quotient() {
        let p = ChebyshevParams::new(1, 0.05).unwrap();
        let direct = (p.stability_a(-1.0) - 1.0) / -1.0;
        assert_relative_eq!(p.stability_b(MethodKind::Variant, -1.0), direct, max_relative = 1e-14);

        // The series branch agrees with the quotient across the switchover.
        let p7 = ChebyshevParams::new(7, 0.05).unwrap();
        for z in [-1e-7, -2e-8, 2e-8, 1e-7] {
            let quotient = (p7.stability_a(z) - 1.0) / z;
            let b = p7.stability_b(MethodKind::Variant, z);
            assert!((b - quotient).abs() < 1e-6, "z = {z}");
        }
    }

    #[test]
    fn complex_evaluation_agrees_on_the_real_axis() {
        let p = ChebyshevParams::new(9, 0.05).unwrap();
        for z in [-30.0, -2.5, -0.1, 0.2] {
            let zc = Complex64::new(z, 0.0);
            assert_relative_eq!(p.stability_a_complex(zc).re, p.stability_a(z), max_relative = 1e-12);
            for kind in [MethodKind::SkRock, MethodKind::Variant] {
                assert_relative_eq!(
                    p.stability_b_complex(kind, zc).re,
                    p.stability_b(kind, z),
                    max_relative = 1e-12
                );
            }
        }
    }

    #[test]
    fn classical_identity() {
        // T_s(x)^2 + U_{s-1}(x)^2 (1 - x^2) = 1 on [-1, 1].
        let mut worst: f64 = 0.0;
        for s in 1..=100u32 {
            for k in 0..=1000 {
                let x = -1.0 + 2.0 * k as f64 / 1000.0;
                let t = cheb_t(s, x);
                let u = cheb_u(s - 1, x);
                worst = worst.max((t * t + u * u * (1.0 - x * x) - 1.0).abs());
            }
        }
        assert!(worst <= 1e-12, "worst deviation {worst}");
    }

    #[test]
    fn identity_holds_beyond_the_interval() {
        // Algebraic identity, so it also holds for x > 1 where 1 - x^2 < 0.
        let p = ChebyshevParams::new(7, 0.05).unwrap();
        let x = p.omega0;
        let t = cheb_t(7, x);
        let u = cheb_u(6, x);
        assert!((t * t + u * u * (1.0 - x * x) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn derivative_identity() {
        // T_s'(x) = s U_{s-1}(x), with T_s' evaluated by differentiating the
        // recursion: T'_{k+1} = 2 T_k + 2x T'_k - T'_{k-1}.
        for s in 1..=100u32 {
            for k in 0..=200 {
                let x = -1.0 + 2.01 * k as f64 / 200.0;
                let mut t_prev = 1.0;
                let mut t_cur = x;
                let mut dt_prev = 0.0;
                let mut dt_cur = 1.0;
                for _ in 1..s {
                    let t_next = 2.0 * x * t_cur - t_prev;
                    let dt_next = 2.0 * t_cur + 2.0 * x * dt_cur - dt_prev;
                    t_prev = t_cur;
                    t_cur = t_next;
                    dt_prev = dt_cur;
                    dt_cur = dt_next;
                }
                let lhs = if s == 0 { 0.0 } else { dt_cur };
                let rhs = s as f64 * cheb_u(s - 1, x);
                let scale = 1.0_f64.max(lhs.abs());
                assert!(
                    (lhs - rhs).abs() <= 1e-10 * scale,
                    "s = {s}, x = {x}: {lhs} vs {rhs}"
                );
            }
        }
    }

    #[test]
    fn derivatives_at_one_product_formula() {
        // T_s^(k)(1) = prod_{j<k} (s^2 - j^2) / (2j + 1), checked by
        // differentiating the recursion k times; exact in f64 for s <= 30.
        for s in 1..=30u32 {
            // rows: value, first, second, third derivative sequences
            let mut p = [1.0_f64, 0.0, 0.0, 0.0]; // degree s-1 column at x=1
            let mut c = [1.0_f64, 1.0, 0.0, 0.0]; // degree s column starts at T_1
            if s >= 2 {
                for _ in 1..s {
                    let x = 1.0_f64;
                    let next = [
                        2.0 * x * c[0] - p[0],
                        2.0 * c[0] + 2.0 * x * c[1] - p[1],
                        4.0 * c[1] + 2.0 * x * c[2] - p[2],
                        6.0 * c[2] + 2.0 * x * c[3] - p[3],
                    ];
                    p = c;
                    c = next;
                }
            }
            let s2 = (s as f64) * (s as f64);
            let expected = [
                1.0,
                s2,
                s2 * (s2 - 1.0) / 3.0,
                s2 * (s2 - 1.0) * (s2 - 4.0) / 15.0,
            ];
            for k in 0..4 {
                let scale = 1.0_f64.max(expected[k].abs());
                assert!(
                    (c[k] - expected[k]).abs() <= 1e-10 * scale,
                    "s = {s}, k = {k}: {} vs {}",
                    c[k],
                    expected[k]
                );
                if k >= 1 {
                    assert!(expected[k] <= s2.powi(k as i32) + 1e-9);
                }
            }
        }
    }

    #[test]
    fn stability_length_montone_in_stages() {
        for eta in [0.05, 0.5] {
            let mut prev = 0.0;
            for s in 1..=200u32 {
                let p = ChebyshevParams::new(s, eta).unwrap();
                assert!(
                    p.stability_length > prev,
                    "l_s not increasing at s = {s}, eta = {eta}"
                );
                prev = p.stability_length;
            }
        }
    }

    #[test]
    fn omega1_s_squared_bounded_by_exp_eta() {
        for eta in [0.05_f64, 0.5] {
            let bound = eta.exp();
            for s in 1..=10_000u32 {
                let p = ChebyshevParams::new(s, eta).unwrap();
                let v = p.omega1 * (s as f64) * (s as f64);
                assert!(v <= bound, "omega1 s^2 = {v} > e^eta at s = {s}");
                assert!(v > 0.0);
            }
        }
    }

    #[test]
    fn near_optimality_bound_on_the_full_interval() {
        // The exact stability-interval length (1 + omega0)/omega1 satisfies
        // (2 - 4 eta/3) s^2 for all s; the conservative 2/omega1 does not for
        // s <= 3.
        for eta in [0.05, 0.1, 0.5] {
            let bound = 2.0 - 4.0 * eta / 3.0;
            for s in 1..=100u32 {
                let p = ChebyshevParams::new(s, eta).unwrap();
                let s2 = (s as f64) * (s as f64);
                assert!(
                    p.full_stability_length() >= bound * s2,
                    "s = {s}, eta = {eta}"
                );
            }
        }
        let p1 = ChebyshevParams::new(1, 0.05).unwrap();
        assert!(p1.stability_length < (2.0 - 4.0 * 0.05 / 3.0));
    }
}
