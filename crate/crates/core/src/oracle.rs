//! Finite-difference reference solver and solution metrics.
//!
//! The stencil is read from [`laplacian_matrix`] so both sides of a
//! comparison share one operator definition.

use crate::error::{Error, Result};
use crate::poisson::{
    laplacian_matrix, project_mean_zero, source_mean, BoundaryCondition, PoissonProblem,
};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gauge {
    None,
    /// Representative with zero mean, for singular operators.
    MeanZero,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalSolution<T> {
    pub u: Vec<T>,
    /// `||A u - f||_2`.
    pub residual_norm: T,
    pub gauge: Gauge,
}

/// Solves `A u = f`. Singular boundary conditions require mean-zero `f` and
/// return the mean-zero solution.
pub fn solve_classical<T: Real>(problem: &PoissonProblem<T>) -> Result<ClassicalSolution<T>> {
    let m = laplacian_matrix(problem)?;
    let n = m.dim();
    let f = problem.source();
    let singular = problem.boundary().is_singular();
    if singular {
        let mean = source_mean(f);
        let scale = f.iter().fold(T::one(), |acc, v| acc.max(v.abs()));
        if mean.abs() > T::tol() * scale {
            return Err(Error::SingularSystem(format!(
                "{} operator needs a mean-zero source, mean is {mean}",
                problem.boundary().name()
            )));
        }
    }

    let mut lower = vec![T::zero(); n];
    let mut diag = vec![T::zero(); n];
    let mut upper = vec![T::zero(); n];
    for i in 0..n {
        diag[i] = m[(i, i)];
        if i > 0 {
            lower[i] = m[(i, i - 1)];
        }
        if i + 1 < n {
            upper[i] = m[(i, i + 1)];
        }
    }
    // With two points the wrap-around entry coincides with the off-diagonal.
    let (corner_lo, corner_hi) = if n > 2 {
        (m[(n - 1, 0)], m[(0, n - 1)])
    } else {
        (T::zero(), T::zero())
    };

    let u = if singular {
        // (A + e0 e0^T) u = f is nonsingular, and summing rows shows u0 = 0
        // for mean-zero f, so A u = f as well.
        diag[0] += T::one();
        let raw = if problem.boundary() == BoundaryCondition::Periodic && n > 2 {
            solve_cyclic(&lower, &diag, &upper, corner_lo, corner_hi, f)?
        } else {
            solve_tridiagonal(&lower, &diag, &upper, f)?
        };
        project_mean_zero(&raw)
    } else {
        solve_tridiagonal(&lower, &diag, &upper, f)?
    };

    let au = m.mul_vec(&u);
    let residual_norm = au
        .iter()
        .zip(f)
        .map(|(&a, &b)| (a - b) * (a - b))
        .sum::<T>()
        .sqrt();
    Ok(ClassicalSolution {
        u,
        residual_norm,
        gauge: if singular {
            Gauge::MeanZero
        } else {
            Gauge::None
        },
    })
}

/// Thomas algorithm; `lower[0]` and `upper[n-1]` are ignored.
fn solve_tridiagonal<T: Real>(lower: &[T], diag: &[T], upper: &[T], rhs: &[T]) -> Result<Vec<T>> {
    let n = diag.len();
    let mut c = vec![T::zero(); n];
    let mut d = vec![T::zero(); n];
    let mut pivot = diag[0];
    for i in 0..n {
        if i > 0 {
            pivot = diag[i] - lower[i] * c[i - 1];
        }
        if pivot.abs() < T::epsilon() * T::of(1e3) * diag[i].abs().max(T::one()) {
            return Err(Error::SingularSystem(format!("zero pivot at row {i}")));
        }
        c[i] = if i + 1 < n {
            upper[i] / pivot
        } else {
            T::zero()
        };
        d[i] = if i == 0 {
            rhs[0] / pivot
        } else {
            (rhs[i] - lower[i] * d[i - 1]) / pivot
        };
    }
    let mut x = d;
    for i in (0..n.saturating_sub(1)).rev() {
        let next = x[i + 1];
        x[i] -= c[i] * next;
    }
    Ok(x)
}

/// Cyclic tridiagonal solve by Sherman-Morrison; `alpha` is the bottom-left
/// and `beta` the top-right corner.
fn solve_cyclic<T: Real>(
    lower: &[T],
    diag: &[T],
    upper: &[T],
    alpha: T,
    beta: T,
    rhs: &[T],
) -> Result<Vec<T>> {
    let n = diag.len();
    let gamma = -diag[0];
    let mut bb = diag.to_vec();
    bb[0] = diag[0] - gamma;
    bb[n - 1] = diag[n - 1] - alpha * beta / gamma;
    let x = solve_tridiagonal(lower, &bb, upper, rhs)?;
    let mut u = vec![T::zero(); n];
    u[0] = gamma;
    u[n - 1] = alpha;
    let z = solve_tridiagonal(lower, &bb, upper, &u)?;
    let fact = (x[0] + beta * x[n - 1] / gamma) / (T::one() + z[0] + beta * z[n - 1] / gamma);
    Ok(x.iter().zip(&z).map(|(&xi, &zi)| xi - fact * zi).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolutionComparison<T> {
    /// Squared cosine between the two vectors.
    pub overlap: T,
    /// `||u_c - u_q|| / ||u_c||`.
    pub l2_relative_error: T,
}

pub fn compare_solutions<T: Real>(
    u_classical: &[T],
    u_quantum: &[T],
) -> Result<SolutionComparison<T>> {
    if u_classical.len() != u_quantum.len() {
        return Err(Error::LengthMismatch {
            expected: u_classical.len(),
            got: u_quantum.len(),
        });
    }
    let norm = |v: &[T]| v.iter().map(|&x| x * x).sum::<T>().sqrt();
    let (nc, nq) = (norm(u_classical), norm(u_quantum));
    if nc == T::zero() || nq == T::zero() {
        return Err(Error::ZeroVector);
    }
    let dot: T = u_classical
        .iter()
        .zip(u_quantum)
        .map(|(&a, &b)| a * b)
        .sum();
    let cos = dot / (nc * nq);
    let diff: Vec<T> = u_classical
        .iter()
        .zip(u_quantum)
        .map(|(&a, &b)| a - b)
        .collect();
    Ok(SolutionComparison {
        overlap: cos * cos,
        l2_relative_error: norm(&diff) / nc,
    })
}

/// Compares against a reference, first moving `u_quantum` into the
/// reference's gauge.
pub fn compare_to_reference<T: Real>(
    reference: &ClassicalSolution<T>,
    u_quantum: &[T],
) -> Result<SolutionComparison<T>> {
    match reference.gauge {
        Gauge::None => compare_solutions(&reference.u, u_quantum),
        Gauge::MeanZero => compare_solutions(&reference.u, &project_mean_zero(u_quantum)),
    }
}

/// `-<f|A^+|f>/2` for the unit-spacing operator and normalized `f`: the
/// smallest value the variational cost can reach.
pub fn cost_lower_bound<T: Real>(problem: &PoissonProblem<T>) -> Result<T> {
    let norm = problem.source_norm();
    let f_hat: Vec<T> = problem.source().iter().map(|&v| v / norm).collect();
    let unit =
        PoissonProblem::with_unit_spacing(problem.num_qubits(), problem.boundary(), f_hat.clone())?;
    let u = solve_classical(&unit)?.u;
    Ok(-T::of(0.5) * f_hat.iter().zip(&u).map(|(&a, &b)| a * b).sum::<T>())
}
