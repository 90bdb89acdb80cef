//! Finite-difference discretization of `Lambda u = (a(x) u')'` on `(0, 1)`
//! with homogeneous Dirichlet boundary conditions on a uniform grid.
//!
//! The operator is assembled in flux form with the coefficient sampled at
//! half-integer nodes, which keeps the matrix symmetric and negative
//! definite. The dense spectral decomposition exposed here feeds the
//! spectral-calculus oracle `phi(Lambda_h)` and the noise sampler; the
//! production steppers never touch it.

use nalgebra::{DMatrix, SymmetricEigen};
use thiserror::Error;

/// Grid sizes beyond this refuse to run the dense eigendecomposition.
pub const DENSE_DECOMPOSE_BUDGET: usize = 2048;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpatialError {
    #[error("grid must have at least 2 intervals, got {0}")]
    GridTooSmall(usize),
    #[error("coefficient sample a({x}) = {value} is not strictly positive")]
    NonPositiveCoefficient { x: f64, value: f64 },
    #[error("dense decomposition budget exceeded: {0} interior nodes > {DENSE_DECOMPOSE_BUDGET}")]
    DecomposeBudgetExceeded(usize),
}

/// Tridiagonal discretization of the diffusion operator, with Dirichlet rows
/// eliminated. All three bands carry units of 1/length^2; `sub[i]` couples
/// interior nodes `i` and `i+1` and equals `sup[i]` on the uniform mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteOperator {
    /// Number of interior nodes, `N - 1` for `N` grid intervals.
    pub n_interior: usize,
    /// Mesh width `h = 1 / N`.
    pub h: f64,
    /// Sub-diagonal, length `n_interior - 1`.
    pub sub: Vec<f64>,
    /// Main diagonal, length `n_interior`; strictly negative entries.
    pub diag: Vec<f64>,
    /// Super-diagonal, length `n_interior - 1`; equal to `sub`.
    pub sup: Vec<f64>,
    /// Gershgorin upper bound on the spectral radius of `-Lambda_h`.
    pub lambda_max_bound: f64,
}

impl DiscreteOperator {
    /// Assembles the operator on `n >= 2` intervals with diffusion
    /// coefficient `a`, sampled at the half-integer nodes `(i + 1/2) h`.
    /// Rejects non-positive coefficient samples (ellipticity).
    pub fn assemble(n: usize, a: impl Fn(f64) -> f64) -> Result<Self, SpatialError> {
        if n < 2 {
            return Err(SpatialError::GridTooSmall(n));
        }
        let h = 1.0 / n as f64;
        let inv_h2 = 1.0 / (h * h);
        // a_{i+1/2} for i = 0..n-1 (one sample per interval)
        let mut half: Vec<f64> = Vec::with_capacity(n);
        for i in 0..n {
            let x = (i as f64 + 0.5) * h;
            let v = a(x);
            if !(v > 0.0) {
                return Err(SpatialError::NonPositiveCoefficient { x, value: v });
            }
            half.push(v);
        }
        let m = n - 1;
        let mut diag = Vec::with_capacity(m);
        let mut off = Vec::with_capacity(m - 1);
        for j in 0..m {
            // interior node j+1 couples intervals j and j+1
            diag.push(-(half[j] + half[j + 1]) * inv_h2);
            if j + 1 < m {
                off.push(half[j + 1] * inv_h2);
            }
        }
        let mut bound: f64 = 0.0;
        for j in 0..m {
            let left = if j > 0 { off[j - 1] } else { 0.0 };
            let right = if j < m - 1 { off[j] } else { 0.0 };
            bound = bound.max(diag[j].abs() + left + right);
        }
        Ok(DiscreteOperator {
            n_interior: m,
            h,
            sub: off.clone(),
            diag,
            sup: off,
            lambda_max_bound: bound,
        })
    }

    /// The constant-coefficient Laplacian stencil `(u_{i+1} - 2 u_i + u_{i-1}) / h^2`.
    pub fn laplacian(n: usize) -> Result<Self, SpatialError> {
        Self::assemble(n, |_| 1.0)
    }

    /// Interior node coordinates `x_i = i h`, `i = 1..N-1`.
    pub fn interior_nodes(&self) -> Vec<f64> {
        (1..=self.n_interior).map(|i| i as f64 * self.h).collect()
    }

    /// Samples a function of `x` on the interior nodes.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (1..=self.n_interior).map(|i| f(i as f64 * self.h)).collect()
    }

    /// Tridiagonal matrix-vector product. Panics on dimension mismatch.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_interior];
        self.apply_into(u, &mut out);
        out
    }

    /// In-place variant of [`DiscreteOperator::apply`] for the stage loops.
    pub fn apply_into(&self, u: &[f64], out: &mut [f64]) {
        let m = self.n_interior;
        assert_eq!(u.len(), m, "dimension mismatch: vector {} vs operator {m}", u.len());
        assert_eq!(out.len(), m);
        if m == 1 {
            out[0] = self.diag[0] * u[0];
            return;
        }
        out[0] = self.diag[0] * u[0] + self.sup[0] * u[1];
        for j in 1..m - 1 {
            out[j] = self.sub[j - 1] * u[j - 1] + self.diag[j] * u[j] + self.sup[j] * u[j + 1];
        }
        out[m - 1] = self.sub[m - 2] * u[m - 2] + self.diag[m - 1] * u[m - 1];
    }

    /// Solves `(I - tau Lambda_h) x = rhs` by the Thomas algorithm. The
    /// system is strictly diagonally dominant for every `tau > 0`, so no
    /// pivoting is needed.
    pub fn solve_shifted(&self, tau: f64, rhs: &[f64]) -> Vec<f64> {
        let m = self.n_interior;
        assert_eq!(rhs.len(), m, "dimension mismatch: rhs {} vs operator {m}", rhs.len());
        let mut c_prime = vec![0.0; m];
        let mut x = vec![0.0; m];
        let mut denom = 1.0 - tau * self.diag[0];
        x[0] = rhs[0] / denom;
        for j in 1..m {
            c_prime[j - 1] = -tau * self.sup[j - 1] / denom;
            denom = (1.0 - tau * self.diag[j]) - (-tau * self.sub[j - 1]) * c_prime[j - 1];
            x[j] = (rhs[j] - (-tau * self.sub[j - 1]) * x[j - 1]) / denom;
        }
        for j in (0..m - 1).rev() {
            x[j] -= c_prime[j] * x[j + 1];
        }
        x
    }

    /// Full dense eigendecomposition. Budgeted at
    /// [`DENSE_DECOMPOSE_BUDGET`] interior nodes; used by oracles, the
    /// verifier, and the spectrally colored noise sampler only.
    pub fn decompose(&self) -> Result<SpectralDecomposition, SpatialError> {
        let m = self.n_interior;
        if m > DENSE_DECOMPOSE_BUDGET {
            return Err(SpatialError::DecomposeBudgetExceeded(m));
        }
        let mat = DMatrix::from_fn(m, m, |r, c| {
            if r == c {
                self.diag[r]
            } else if c + 1 == r {
                self.sub[c]
            } else if r + 1 == c {
                self.sup[r]
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(mat);
        // eigenvalues of Lambda_h are negative; store lambda_m = -eig ascending
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&i, &j| {
            (-eig.eigenvalues[i])
                .partial_cmp(&(-eig.eigenvalues[j]))
                .unwrap()
        });
        let inv_sqrt_h = 1.0 / self.h.sqrt();
        let mut eigenvalues = Vec::with_capacity(m);
        let mut eigenvectors = Vec::with_capacity(m);
        for &idx in &order {
            eigenvalues.push(-eig.eigenvalues[idx]);
            let col = eig.eigenvectors.column(idx);
            // normalize in the h-weighted inner product and fix the sign of
            // the largest-magnitude component for determinism
            let mut v: Vec<f64> = col.iter().map(|&c| c * inv_sqrt_h).collect();
            let lead = v
                .iter()
                .cloned()
                .fold(0.0_f64, |acc, c| if c.abs() > acc.abs() { c } else { acc });
            if lead < 0.0 {
                for c in &mut v {
                    *c = -*c;
                }
            }
            eigenvectors.push(v);
        }
        Ok(SpectralDecomposition {
            h: self.h,
            eigenvalues,
            eigenvectors,
        })
    }
}

/// Eigenpairs of `-Lambda_h`: ascending positive eigenvalues and grid
/// eigenvectors orthonormal in the discrete inner product `<u,v> = h sum u_i v_i`.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub h: f64,
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<f64>>,
}

impl SpectralDecomposition {
    /// Applies `phi(Lambda_h) u = sum_m phi(-lambda_m) <u, e_m> e_m`. Note
    /// the function receives the (non-positive) eigenvalues of `Lambda_h`
    /// itself. This is the oracle for `A_s(tau Lambda_h)`, `B_s(tau Lambda_h)`
    /// and `exp(t Lambda_h)`.
    pub fn apply_function(&self, phi: impl Fn(f64) -> f64, u: &[f64]) -> Vec<f64> {
        let m = self.eigenvalues.len();
        assert_eq!(u.len(), m, "dimension mismatch");
        let mut out = vec![0.0; m];
        for (lambda, e) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            let coeff = phi(-lambda) * inner(self.h, u, e);
            for (o, &ei) in out.iter_mut().zip(e) {
                *o += coeff * ei;
            }
        }
        out
    }
}

/// Discrete `L^2(0,1)` inner product with the `h` weight.
pub fn inner(h: f64, u: &[f64], v: &[f64]) -> f64 {
    debug_assert_eq!(u.len(), v.len());
    h * u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>()
}

/// Discrete `L^2(0,1)` norm, `sqrt(h sum u_i^2)`.
pub fn norm(h: f64, u: &[f64]) -> f64 {
    inner(h, u, u).sqrt()
}
