//! Dense complex kernels: SVD-based numerical rank, least-squares solves and
//! unitary column compression.
//!
//! All routines are pure functions of their arguments. Rank decisions use a
//! single cutoff `max(tol_abs, tol_rel * sigma_max)` so that the rank reported
//! by [`numerical_rank`] and the width produced by [`column_compress`] always
//! agree.

use nalgebra::{DMatrix, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex matrix in double precision.
pub type ComplexMatrix = DMatrix<Complex64>;

/// Unit roundoff of `f64` as used throughout the crate.
pub const MACHINE_EPS: f64 = f64::EPSILON;

/// Rank cutoff policy.
///
/// `rel == None` selects the dimension-dependent default `max(rows, cols) * eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: Option<f64>,
    pub abs: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rel: None,
            abs: 0.0,
        }
    }
}

impl Tolerance {
    pub fn relative(rel: f64) -> Self {
        Tolerance {
            rel: Some(rel),
            abs: 0.0,
        }
    }

    pub fn rel_for(&self, rows: usize, cols: usize) -> f64 {
        self.rel
            .unwrap_or_else(|| rows.max(cols).max(1) as f64 * MACHINE_EPS)
    }

    /// Absolute singular value cutoff for a `rows x cols` matrix whose scale is `reference`.
    pub fn cutoff(&self, rows: usize, cols: usize, reference: f64) -> f64 {
        self.abs.max(self.rel_for(rows, cols) * reference)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankResult {
    pub rank: usize,
    /// Nonincreasing.
    pub singular_values: Vec<f64>,
    pub tolerance_used: f64,
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn zeros(rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::zeros(rows, cols)
}

/// Builds a matrix from a row-major list of real entries.
pub fn from_real_rows(rows: usize, cols: usize, data: &[f64]) -> ComplexMatrix {
    assert_eq!(data.len(), rows * cols);
    ComplexMatrix::from_fn(rows, cols, |i, j| Complex64::new(data[i * cols + j], 0.0))
}

pub fn is_finite(a: &ComplexMatrix) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

fn ensure_finite(a: &ComplexMatrix) -> Result<()> {
    if is_finite(a) {
        Ok(())
    } else {
        Err(Error::NonFiniteInput)
    }
}

pub fn frobenius(a: &ComplexMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Singular values in nonincreasing order.
pub fn singular_values(a: &ComplexMatrix) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let svd = SVD::new(a.clone(), false, false);
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Numerical rank with cutoff `max(tol.abs, tol_rel * sigma_max)`.
pub fn numerical_rank(a: &ComplexMatrix, tol: Tolerance) -> Result<RankResult> {
    ensure_finite(a)?;
    let singular_values = singular_values(a);
    let smax = singular_values.first().copied().unwrap_or(0.0);
    let cutoff = tol.cutoff(a.nrows(), a.ncols(), smax);
    Ok(rank_with_cutoff(singular_values, cutoff))
}

/// Numerical rank with a caller-supplied absolute cutoff.
pub fn rank_above(a: &ComplexMatrix, cutoff: f64) -> Result<RankResult> {
    ensure_finite(a)?;
    Ok(rank_with_cutoff(singular_values(a), cutoff))
}

fn rank_with_cutoff(singular_values: Vec<f64>, cutoff: f64) -> RankResult {
    let rank = singular_values.iter().filter(|&&s| s > cutoff).count();
    RankResult {
        rank,
        singular_values,
        tolerance_used: cutoff,
    }
}

/// Minimum-norm least-squares solution `Z = L^+ B` for full column rank `L`.
///
/// Solved through a Householder QR factorization of `L`.
pub fn least_squares_solve(l: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    least_squares_solve_tol(l, b, Tolerance::default())
}

/// [`least_squares_solve`] with an explicit policy for the full-rank check on `L`.
pub fn least_squares_solve_tol(
    l: &ComplexMatrix,
    b: &ComplexMatrix,
    tol: Tolerance,
) -> Result<ComplexMatrix> {
    if l.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "least squares: L has {} rows, B has {}",
            l.nrows(),
            b.nrows()
        )));
    }
    ensure_finite(l)?;
    ensure_finite(b)?;
    let cols = l.ncols();
    if cols == 0 {
        return Ok(zeros(0, b.ncols()));
    }
    let rank = numerical_rank(l, tol)?.rank;
    if rank < cols {
        return Err(Error::RankDeficientL { rank, cols });
    }
    Ok(qr_solve(l, b))
}

fn qr_solve(l: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let qr = l.clone().qr();
    let q = qr.q();
    let r = qr.r();
    let rhs = q.adjoint() * b;
    r.solve_upper_triangular(&rhs)
        .expect("triangular factor of a full column rank matrix is nonsingular")
}

/// Unitary `Q` with `A Q = [A' 0]`, `A'` of full column rank `rank`.
///
/// `Q` holds the right singular vectors of `A` ordered by decreasing singular
/// value, so the independent directions come first. When no column survives
/// the cutoff `Q` is the identity.
pub fn column_compress(a: &ComplexMatrix, tol: Tolerance) -> Result<(ComplexMatrix, usize)> {
    ensure_finite(a)?;
    let smax = singular_values(a).first().copied().unwrap_or(0.0);
    let cutoff = tol.cutoff(a.nrows(), a.ncols(), smax);
    column_compress_above(a, cutoff)
}

/// [`column_compress`] with an absolute singular value cutoff.
pub fn column_compress_above(a: &ComplexMatrix, cutoff: f64) -> Result<(ComplexMatrix, usize)> {
    ensure_finite(a)?;
    let n = a.ncols();
    if n == 0 || a.nrows() == 0 {
        return Ok((identity(n), 0));
    }
    // zero rows keep the right singular vectors but make V_t square
    let m = a.nrows().max(n);
    let mut padded = zeros(m, n);
    padded.rows_mut(0, a.nrows()).copy_from(a);
    let svd = SVD::new(padded, false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");

    let mut order: Vec<usize> = (0..n).collect();
    let sv = &svd.singular_values;
    order.sort_by(|&i, &j| sv[j].total_cmp(&sv[i]));
    let rank = order.iter().filter(|&&i| sv[i] > cutoff).count();
    if rank == 0 {
        return Ok((identity(n), 0));
    }
    let mut q = zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let row = v_t.row(src);
        for k in 0..n {
            q[(k, dst)] = row[k].conj();
        }
    }
    Ok((q, rank))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn identity_has_full_rank() {
        let r = numerical_rank(&identity(3), Tolerance::default()).unwrap();
        assert_eq!(r.rank, 3);
        assert_eq!(r.singular_values.len(), 3);
    }

    #[test]
    fn zero_matrix_has_rank_zero() {
        let r = numerical_rank(&zeros(2, 2), Tolerance::default()).unwrap();
        assert_eq!(r.rank, 0);
    }

    #[test]
    fn nearly_singular_two_by_two() {
        let a = from_real_rows(2, 2, &[1.0, 1.0, 1.0, 1.0 + 1e-15]);
        // closed form: s1^2 + s2^2 = |A|_F^2 and s1 s2 = |det A|
        let f2 = a.iter().map(|z| z.norm_sqr()).sum::<f64>();
        let det = (a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)]).norm();
        let s1 = ((f2 + (f2 * f2 - 4.0 * det * det).sqrt()) / 2.0).sqrt();
        let s2 = det / s1;
        assert!(s2 < 1e-15 && s2 > 1e-16);

        let r = numerical_rank(&a, Tolerance::relative(4.0 * MACHINE_EPS)).unwrap();
        assert_eq!(r.rank, 1);
        assert!(r.singular_values[1] < r.tolerance_used);
        assert!((r.singular_values[0] - s1).abs() < 1e-14);
    }

    #[test]
    fn rejects_nan() {
        let mut a = identity(2);
        a[(0, 1)] = Complex64::new(f64::NAN, 0.0);
        assert_eq!(
            numerical_rank(&a, Tolerance::default()),
            Err(Error::NonFiniteInput)
        );
        assert_eq!(
            column_compress(&a, Tolerance::default()).map(|x| x.1),
            Err(Error::NonFiniteInput)
        );
    }

    #[test]
    fn least_squares_identity() {
        let b = from_real_rows(2, 3, &[1.0, -2.0, 3.0, 0.5, 0.0, 7.0]);
        let z = least_squares_solve(&identity(2), &b).unwrap();
        assert!(frobenius(&(z - b)) < 1e-15);
    }

    #[test]
    fn least_squares_projection() {
        let l = from_real_rows(2, 1, &[1.0, 0.0]);
        let b = from_real_rows(2, 1, &[3.0, 4.0]);
        let z = least_squares_solve(&l, &b).unwrap();
        assert!((z[(0, 0)] - c(3.0)).norm() < 1e-15);
    }

    #[test]
    fn least_squares_normal_equations() {
        let l = from_real_rows(2, 1, &[1.0, 1.0]);
        let b = from_real_rows(2, 1, &[1.0, 0.0]);
        let z = least_squares_solve(&l, &b).unwrap();
        assert!((z[(0, 0)] - c(0.5)).norm() < 1e-15);
    }

    #[test]
    fn least_squares_rejects_rank_deficient() {
        let l = from_real_rows(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        let b = identity(2);
        assert_eq!(
            least_squares_solve(&l, &b),
            Err(Error::RankDeficientL { rank: 1, cols: 2 })
        );
    }

    #[test]
    fn compress_zero_is_identity() {
        let (q, rank) = column_compress(&zeros(3, 2), Tolerance::default()).unwrap();
        assert_eq!(rank, 0);
        assert_eq!(q, identity(2));
    }

    #[test]
    fn compress_orthonormal_columns() {
        let a = from_real_rows(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        let (q, rank) = column_compress(&a, Tolerance::default()).unwrap();
        assert_eq!(rank, 2);
        assert!(frobenius(&(q.adjoint() * &q - identity(2))) < 10.0 * MACHINE_EPS);
    }

    #[test]
    fn compress_dependent_columns() {
        let a = from_real_rows(2, 2, &[1.0, 2.0, 0.0, 0.0]);
        let tol = Tolerance::default();
        let (q, rank) = column_compress(&a, tol).unwrap();
        assert_eq!(rank, 1);
        let aq = &a * &q;
        let cutoff = tol.cutoff(2, 2, 5f64.sqrt());
        assert!(aq.column(1).norm() <= cutoff);
        assert!((aq.column(0).norm() - 5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn compress_wide_matrix_gives_full_q() {
        let a = from_real_rows(1, 3, &[1.0, 1.0, 1.0]);
        let (q, rank) = column_compress(&a, Tolerance::default()).unwrap();
        assert_eq!(rank, 1);
        assert_eq!(q.shape(), (3, 3));
        assert!(frobenius(&(q.adjoint() * &q - identity(3))) < 10.0 * MACHINE_EPS);
        let aq = &a * &q;
        assert!(aq.columns(1, 2).norm() < 1e-15);
    }
}
