//! Companion matrices and the Lyapunov equation `A'P + PA = -Q`.

use super::ControlError;
use nalgebra::{Complex, DMatrix};

/// Companion realization of `s^n + k[0]*s^(n-1) + ... + k[n-1]`.
///
/// Ones on the superdiagonal; last row `-(k[n-1], ..., k[0])`. Its
/// eigenvalues are the roots of that polynomial.
pub fn companion_matrix(k: &[f64]) -> DMatrix<f64> {
    let n = k.len();
    assert!(n >= 1, "gain vector must be non-empty");
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n - 1 {
        a[(i, i + 1)] = 1.0;
    }
    for j in 0..n {
        a[(n - 1, j)] = -k[n - 1 - j];
    }
    a
}

/// Maximum absolute row sum.
pub fn inf_norm(m: &DMatrix<f64>) -> f64 {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)].abs()).sum())
        .fold(0.0, f64::max)
}

/// Errors unless every eigenvalue of `a` has a strictly negative real part.
/// The error names the worst offender so callers can report which mode is
/// unstable.
pub fn require_hurwitz(a: &DMatrix<f64>) -> Result<(), ControlError> {
    let worst = worst_eigenvalue(a);
    if worst.re >= 0.0 {
        return Err(ControlError::NotHurwitz {
            re: worst.re,
            im: worst.im,
        });
    }
    Ok(())
}

/// Eigenvalue of `a` with the largest real part.
pub fn worst_eigenvalue(a: &DMatrix<f64>) -> Complex<f64> {
    a.complex_eigenvalues()
        .iter()
        .copied()
        .max_by(|x, y| x.re.total_cmp(&y.re))
        .expect("non-empty matrix")
}

const RESIDUAL_BOUND: f64 = 1e-8;

/// Residual `A'P + PA + Q` of a candidate solution.
pub fn lyapunov_residual(a: &DMatrix<f64>, q: &DMatrix<f64>, p: &DMatrix<f64>) -> DMatrix<f64> {
    a.transpose() * p + p * a + q
}

/// Solves `A'P + PA = -Q` for symmetric positive definite `P`.
///
/// `A` must be Hurwitz and `Q` symmetric positive definite; both are
/// checked. The symmetric unknowns `p_ij` (i <= j) are stacked into an
/// `n(n+1)/2` linear system solved by LU. The result is verified: residual
/// below `1e-8 * |Q|_inf` and `P` positive definite.
pub fn solve_lyapunov(a: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>, ControlError> {
    let n = a.nrows();
    if a.ncols() != n || q.nrows() != n || q.ncols() != n {
        return Err(ControlError::DimensionMismatch {
            what: "solve_lyapunov expects square A and Q of equal size",
        });
    }
    check_spd(q, "Q")?;
    require_hurwitz(a)?;

    let unknowns = n * (n + 1) / 2;
    // Unknown (r, s), r <= s, lives at row-major triangular offset.
    let idx = |r: usize, s: usize| -> usize {
        let (r, s) = if r <= s { (r, s) } else { (s, r) };
        r * (2 * n - r + 1) / 2 + (s - r)
    };

    let mut m = DMatrix::zeros(unknowns, unknowns);
    let mut rhs = nalgebra::DVector::zeros(unknowns);
    for i in 0..n {
        for j in i..n {
            let row = idx(i, j);
            rhs[row] = -q[(i, j)];
            // (A'P)_ij = sum_k a_ki p_kj ; (PA)_ij = sum_k p_ik a_kj.
            for k in 0..n {
                m[(row, idx(k, j))] += a[(k, i)];
                m[(row, idx(i, k))] += a[(k, j)];
            }
        }
    }

    let sol = m
        .lu()
        .solve(&rhs)
        .ok_or(ControlError::SingularLyapunovSystem)?;

    let mut p = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            p[(i, j)] = sol[idx(i, j)];
            p[(j, i)] = sol[idx(i, j)];
        }
    }

    let residual = inf_norm(&lyapunov_residual(a, q, &p));
    let bound = RESIDUAL_BOUND * inf_norm(q);
    if !(residual <= bound) {
        return Err(ControlError::ResidualTooLarge { residual, bound });
    }
    check_spd(&p, "P")?;
    Ok(p)
}

/// Symmetry within rounding plus positive definiteness (via Cholesky).
pub(crate) fn check_spd(m: &DMatrix<f64>, name: &'static str) -> Result<(), ControlError> {
    let scale = inf_norm(m).max(f64::MIN_POSITIVE);
    let asym = inf_norm(&(m - m.transpose()));
    if asym > 1e-9 * scale {
        return Err(ControlError::NotSymmetric { name, asym });
    }
    if m.clone().cholesky().is_none() {
        let min_eig = m
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        return Err(ControlError::NotPositiveDefinite { name, min_eig });
    }
    Ok(())
}

/// Public wrapper used for diagnostics on fixed matrices: returns all
/// violations as human-readable strings instead of failing.
pub fn spd_warnings(m: &DMatrix<f64>, name: &str) -> Vec<String> {
    let mut out = Vec::new();
    let scale = inf_norm(m).max(f64::MIN_POSITIVE);
    let asym = inf_norm(&(m - m.transpose()));
    if asym > 1e-9 * scale {
        out.push(format!(
            "{name} is not symmetric (asymmetry {asym:.3e}); proceeding with it as given"
        ));
    }
    let min_eig = m
        .clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if min_eig <= 0.0 {
        out.push(format!(
            "{name} is not symmetric positive definite (smallest symmetric-part eigenvalue {min_eig:.4e})"
        ));
    }
    out
}
