//! Matrix-valued Laurent series about an expansion point.
//!
//! A [`LaurentMatrix`] stores coefficients in the shifted basis
//! `(λ - λ₀)^k`, starting at exponent `lowest`. A series is either exact (a
//! finite Laurent polynomial) or a truncated window whose unknown tail starts
//! right after the last stored coefficient.

use num_complex::Complex64;

use crate::densela::{self, ComplexMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LaurentMatrix {
    rows: usize,
    cols: usize,
    point: Complex64,
    lowest: i64,
    coeffs: Vec<ComplexMatrix>,
    exact: bool,
}

/// A [`LaurentMatrix`] with `lowest >= 0` and `exact == true`.
pub type PolyMatrix = LaurentMatrix;

impl LaurentMatrix {
    /// `coeffs[t]` multiplies `(λ - point)^(lowest + t)`.
    pub fn new(
        point: Complex64,
        lowest: i64,
        coeffs: Vec<ComplexMatrix>,
        exact: bool,
    ) -> Result<Self> {
        let first = coeffs
            .first()
            .ok_or_else(|| Error::DimensionMismatch("empty coefficient list".into()))?;
        let (rows, cols) = first.shape();
        if let Some(bad) = coeffs.iter().find(|c| c.shape() != (rows, cols)) {
            return Err(Error::DimensionMismatch(format!(
                "coefficient of shape {:?} in a {}x{} series",
                bad.shape(),
                rows,
                cols
            )));
        }
        if !coeffs.iter().all(densela::is_finite) || !(point.re.is_finite() && point.im.is_finite())
        {
            return Err(Error::NonFiniteInput);
        }
        Ok(LaurentMatrix {
            rows,
            cols,
            point,
            lowest,
            coeffs,
            exact,
        })
    }

    /// Exact polynomial `Σ coeffs[t] (λ - point)^t`.
    pub fn polynomial(point: Complex64, coeffs: Vec<ComplexMatrix>) -> Result<Self> {
        Self::new(point, 0, coeffs, true)
    }

    pub fn constant(point: Complex64, a: ComplexMatrix) -> Self {
        Self::polynomial(point, vec![a]).expect("single finite coefficient")
    }

    pub fn zero(rows: usize, cols: usize, point: Complex64) -> Self {
        LaurentMatrix {
            rows,
            cols,
            point,
            lowest: 0,
            coeffs: vec![densela::zeros(rows, cols)],
            exact: true,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn point(&self) -> Complex64 {
        self.point
    }

    pub fn lowest(&self) -> i64 {
        self.lowest
    }

    pub fn coeffs(&self) -> &[ComplexMatrix] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<ComplexMatrix> {
        self.coeffs
    }

    pub fn exact(&self) -> bool {
        self.exact
    }

    /// Exponent of the last stored coefficient. For a truncated series this is
    /// the order through which the series is known.
    pub fn highest(&self) -> i64 {
        self.lowest + self.coeffs.len() as i64 - 1
    }

    /// `ℓ`, the order of the pole at the expansion point implied by `lowest`.
    pub fn pole_order(&self) -> usize {
        (-self.lowest).max(0) as usize
    }

    pub fn is_polynomial(&self) -> bool {
        self.exact && self.lowest >= 0
    }

    /// Coefficient of `(λ - λ₀)^exp`; zero outside the stored window of an
    /// exact series, an error past the known window of a truncated one.
    pub fn coeff(&self, exp: i64) -> Result<ComplexMatrix> {
        if exp > self.highest() && !self.exact {
            return Err(Error::InsufficientSeriesOrder {
                required: exp,
                available: self.highest(),
            });
        }
        if exp < self.lowest || exp > self.highest() {
            return Ok(densela::zeros(self.rows, self.cols));
        }
        Ok(self.coeffs[(exp - self.lowest) as usize].clone())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs
            .iter()
            .all(|c| c.iter().all(|z| *z == Complex64::new(0.0, 0.0)))
    }

    /// Evaluates the (truncated) series at `lambda` by Horner's rule.
    pub fn eval(&self, lambda: Complex64) -> Result<ComplexMatrix> {
        let h = lambda - self.point;
        if self.lowest < 0 && h == Complex64::new(0.0, 0.0) {
            return Err(Error::EvalAtPole);
        }
        let mut acc = densela::zeros(self.rows, self.cols);
        for c in self.coeffs.iter().rev() {
            acc *= h;
            acc += c;
        }
        Ok(acc * h.powi(self.lowest as i32))
    }

    /// Multiplies by the scalar monomial `(λ - λ₀)^s`.
    pub fn shift(&self, s: i64) -> Self {
        let mut out = self.clone();
        out.lowest += s;
        out
    }

    /// Re-expands an exact polynomial about `new_point` (Taylor shift).
    ///
    /// Coefficient `t` of the result is the `t`-th derivative at `new_point`
    /// divided by `t!`.
    pub fn reexpand(&self, new_point: Complex64) -> Result<Self> {
        if !self.is_polynomial() {
            return Err(Error::DimensionMismatch(
                "re-expansion requires an exact polynomial".into(),
            ));
        }
        let delta = new_point - self.point;
        let mut c: Vec<ComplexMatrix> = (0..self.lowest)
            .map(|_| densela::zeros(self.rows, self.cols))
            .chain(self.coeffs.iter().cloned())
            .collect();
        let d = c.len() - 1;
        // repeated synthetic division by (λ - new_point)
        for k in 0..d {
            for j in (k..d).rev() {
                let next = c[j + 1].clone() * delta;
                c[j] += next;
            }
        }
        let mut out = LaurentMatrix::new(new_point, 0, c, true)?;
        out.trim_trailing();
        Ok(out)
    }

    /// Cauchy product. For truncated factors the result is cut to the window
    /// that is fully determined by the known coefficients.
    pub fn mul(&self, other: &LaurentMatrix) -> Result<LaurentMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "product of {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        if self.point != other.point {
            return Err(Error::PointMismatch(self.point, other.point));
        }
        let (la, lb) = (self.coeffs.len(), other.coeffs.len());
        let mut out = vec![densela::zeros(self.rows, other.cols); la + lb - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        let lowest = self.lowest + other.lowest;
        let exact = self.exact && other.exact;
        if !exact {
            let mut known = i64::MAX;
            if !self.exact {
                known = known.min(self.highest() + other.lowest);
            }
            if !other.exact {
                known = known.min(other.highest() + self.lowest);
            }
            let keep = (known - lowest + 1).max(0) as usize;
            if keep == 0 {
                return Err(Error::InsufficientSeriesOrder {
                    required: lowest,
                    available: known,
                });
            }
            out.truncate(keep);
        }
        Ok(LaurentMatrix {
            rows: self.rows,
            cols: other.cols,
            point: self.point,
            lowest,
            coeffs: out,
            exact,
        })
    }

    /// `self - other`, aligned on exponents.
    pub fn sub(&self, other: &LaurentMatrix) -> Result<LaurentMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "difference of {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        if self.point != other.point {
            return Err(Error::PointMismatch(self.point, other.point));
        }
        let lowest = self.lowest.min(other.lowest);
        let mut highest = self.highest().max(other.highest());
        let exact = self.exact && other.exact;
        if !self.exact {
            highest = highest.min(self.highest());
        }
        if !other.exact {
            highest = highest.min(other.highest());
        }
        if highest < lowest {
            return Err(Error::InsufficientSeriesOrder {
                required: lowest,
                available: highest,
            });
        }
        let coeffs = (lowest..=highest)
            .map(|e| Ok(self.coeff(e)? - other.coeff(e)?))
            .collect::<Result<Vec<_>>>()?;
        Ok(LaurentMatrix {
            rows: self.rows,
            cols: self.cols,
            point: self.point,
            lowest,
            coeffs,
            exact,
        })
    }

    /// Scales entry `(j, k)` by `(λ - λ₀)^(col_exp[k] - row_exp[j])`.
    ///
    /// Fails when a nonzero entry would need a negative power.
    pub fn monomial_scale(&self, row_exp: &[i64], col_exp: &[i64]) -> Result<LaurentMatrix> {
        if row_exp.len() != self.rows || col_exp.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "{} row and {} column exponents for a {}x{} matrix",
                row_exp.len(),
                col_exp.len(),
                self.rows,
                self.cols
            )));
        }
        let zero = Complex64::new(0.0, 0.0);
        let mut max_shift = 0i64;
        let mut min_shift = i64::MAX;
        for (j, &rj) in row_exp.iter().enumerate() {
            for (k, &ck) in col_exp.iter().enumerate() {
                let e = ck - rj;
                min_shift = min_shift.min(e);
                if e < 0 {
                    if self.coeffs.iter().any(|c| c[(j, k)] != zero) {
                        return Err(Error::NegativeShiftOnNonzeroEntry { row: j, col: k });
                    }
                } else {
                    max_shift = max_shift.max(e);
                }
            }
        }
        let len = self.coeffs.len() + max_shift as usize;
        let mut coeffs = vec![densela::zeros(self.rows, self.cols); len];
        for (t, c) in self.coeffs.iter().enumerate() {
            for j in 0..self.rows {
                for k in 0..self.cols {
                    let e = col_exp[k] - row_exp[j];
                    if e >= 0 {
                        coeffs[t + e as usize][(j, k)] = c[(j, k)];
                    }
                }
            }
        }
        if !self.exact {
            let keep = (self.coeffs.len() as i64 + min_shift).max(1) as usize;
            coeffs.truncate(keep);
        }
        let mut out = LaurentMatrix {
            rows: self.rows,
            cols: self.cols,
            point: self.point,
            lowest: self.lowest,
            coeffs,
            exact: self.exact,
        };
        if out.exact {
            out.trim_trailing();
        }
        Ok(out)
    }

    /// `‖[C_lowest, …, C_highest]‖_F`.
    pub fn frob_norm(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    }

    /// Drops exactly-zero leading coefficients (and trailing ones for exact
    /// series) so that `lowest` is tight.
    pub fn trim_leading(&self) -> Result<LaurentMatrix> {
        self.trim_leading_tol(0.0)
    }

    /// Like [`trim_leading`](Self::trim_leading) but treats leading blocks
    /// with Frobenius norm `<= tol_abs` as zero.
    pub fn trim_leading_tol(&self, tol_abs: f64) -> Result<LaurentMatrix> {
        let negligible = |c: &ComplexMatrix| {
            if tol_abs == 0.0 {
                c.iter().all(|z| *z == Complex64::new(0.0, 0.0))
            } else {
                densela::frobenius(c) <= tol_abs
            }
        };
        let Some(first) = self.coeffs.iter().position(|c| !negligible(c)) else {
            return Err(if self.exact {
                Error::ZeroFunction
            } else {
                Error::InsufficientSeriesOrder {
                    required: self.highest() + 1,
                    available: self.highest(),
                }
            });
        };
        let mut out = LaurentMatrix {
            rows: self.rows,
            cols: self.cols,
            point: self.point,
            lowest: self.lowest + first as i64,
            coeffs: self.coeffs[first..].to_vec(),
            exact: self.exact,
        };
        if out.exact {
            out.trim_trailing();
        }
        Ok(out)
    }

    fn trim_trailing(&mut self) {
        let zero = Complex64::new(0.0, 0.0);
        while self.coeffs.len() > 1
            && self
                .coeffs
                .last()
                .is_some_and(|c| c.iter().all(|z| *z == zero))
        {
            self.coeffs.pop();
        }
    }

    /// Degree of an exact polynomial after trimming trailing zeros.
    pub fn degree(&self) -> i64 {
        let mut t = self.clone();
        t.trim_trailing();
        t.highest()
    }

    /// Keeps coefficients through exponent `order` and marks the series truncated.
    pub fn truncate(&self, order: i64) -> Result<LaurentMatrix> {
        if order < self.lowest {
            return Err(Error::InsufficientSeriesOrder {
                required: self.lowest,
                available: order,
            });
        }
        if !self.exact && order > self.highest() {
            return Err(Error::InsufficientSeriesOrder {
                required: order,
                available: self.highest(),
            });
        }
        let coeffs = (self.lowest..=order)
            .map(|e| self.coeff(e))
            .collect::<Result<Vec<_>>>()?;
        Ok(LaurentMatrix {
            coeffs,
            exact: false,
            ..self.clone()
        })
    }

    /// Same series stored with explicit zero coefficients from exponent `lowest`.
    pub fn with_lowest(&self, lowest: i64) -> Result<LaurentMatrix> {
        if lowest > self.lowest {
            return Err(Error::DimensionMismatch(format!(
                "cannot start at {lowest}, coefficient {} is stored",
                self.lowest
            )));
        }
        let pad = (self.lowest - lowest) as usize;
        let coeffs = std::iter::repeat_n(densela::zeros(self.rows, self.cols), pad)
            .chain(self.coeffs.iter().cloned())
            .collect();
        Ok(LaurentMatrix {
            lowest,
            coeffs,
            ..self.clone()
        })
    }

    pub fn transpose(&self) -> LaurentMatrix {
        LaurentMatrix {
            rows: self.cols,
            cols: self.rows,
            coeffs: self.coeffs.iter().map(|c| c.transpose()).collect(),
            ..self.clone()
        }
    }

    /// Columns `start..start + count`.
    pub fn columns(&self, start: usize, count: usize) -> LaurentMatrix {
        LaurentMatrix {
            cols: count,
            coeffs: self
                .coeffs
                .iter()
                .map(|c| c.columns(start, count).into_owned())
                .collect(),
            ..self.clone()
        }
    }

    /// Multiplies every coefficient on the left by a constant matrix.
    pub fn left_mul_const(&self, a: &ComplexMatrix) -> Result<LaurentMatrix> {
        if a.ncols() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "constant {}x{} times {}x{} series",
                a.nrows(),
                a.ncols(),
                self.rows,
                self.cols
            )));
        }
        Ok(LaurentMatrix {
            rows: a.nrows(),
            coeffs: self.coeffs.iter().map(|c| a * c).collect(),
            ..self.clone()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densela::{from_real_rows, identity};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn scalar_poly(point: f64, coeffs: &[f64]) -> LaurentMatrix {
        LaurentMatrix::polynomial(
            c(point),
            coeffs.iter().map(|&x| from_real_rows(1, 1, &[x])).collect(),
        )
        .unwrap()
    }

    fn values(m: &LaurentMatrix) -> Vec<f64> {
        m.coeffs().iter().map(|x| x[(0, 0)].re).collect()
    }

    fn diag_1_lambda() -> LaurentMatrix {
        LaurentMatrix::polynomial(
            c(0.0),
            vec![
                from_real_rows(2, 2, &[1.0, 0.0, 0.0, 0.0]),
                from_real_rows(2, 2, &[0.0, 0.0, 0.0, 1.0]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn eval_constant_identity() {
        let p = LaurentMatrix::constant(c(0.3), identity(3));
        assert_eq!(p.eval(Complex64::new(-1.0, 2.0)).unwrap(), identity(3));
    }

    #[test]
    fn eval_diag() {
        let v = diag_1_lambda().eval(c(2.0)).unwrap();
        assert_eq!(v, from_real_rows(2, 2, &[1.0, 0.0, 0.0, 2.0]));
    }

    #[test]
    fn eval_laurent() {
        let r = LaurentMatrix::new(c(0.0), -1, vec![identity(1)], true).unwrap();
        assert!((r.eval(c(0.5)).unwrap()[(0, 0)] - c(2.0)).norm() < 1e-15);
        assert_eq!(r.eval(c(0.0)), Err(Error::EvalAtPole));
    }

    #[test]
    fn reexpand_linear() {
        let p = scalar_poly(0.0, &[0.0, 1.0]).reexpand(c(1.0)).unwrap();
        assert_eq!(values(&p), vec![1.0, 1.0]);
        assert_eq!(p.point(), c(1.0));
    }

    #[test]
    fn reexpand_square() {
        let p = scalar_poly(0.0, &[0.0, 0.0, 1.0]).reexpand(c(2.0)).unwrap();
        assert_eq!(values(&p), vec![4.0, 4.0, 1.0]);
    }

    #[test]
    fn reexpand_at_same_point_is_identity() {
        let p = scalar_poly(0.0, &[1.0, -2.0, 3.0]);
        assert_eq!(p.reexpand(c(0.0)).unwrap(), p);
    }

    #[test]
    fn mul_identity_and_difference_of_squares() {
        let p = diag_1_lambda();
        let i = LaurentMatrix::constant(c(0.0), identity(2));
        assert_eq!(p.mul(&i).unwrap(), p);

        let a = scalar_poly(0.0, &[1.0, 1.0]);
        let b = scalar_poly(0.0, &[1.0, -1.0]);
        assert_eq!(values(&a.mul(&b).unwrap()), vec![1.0, 0.0, -1.0]);
    }

    #[test]
    fn mul_diagonals() {
        let a = diag_1_lambda();
        let b = LaurentMatrix::polynomial(
            c(0.0),
            vec![
                from_real_rows(2, 2, &[0.0, 0.0, 0.0, 1.0]),
                from_real_rows(2, 2, &[1.0, 0.0, 0.0, 0.0]),
            ],
        )
        .unwrap();
        let p = a.mul(&b).unwrap();
        assert_eq!(p.coeffs()[0], densela::zeros(2, 2));
        assert_eq!(p.coeffs()[1], identity(2));
    }

    #[test]
    fn mul_errors() {
        let a = scalar_poly(0.0, &[1.0]);
        let b = scalar_poly(1.0, &[1.0]);
        assert!(matches!(a.mul(&b), Err(Error::PointMismatch(..))));
        assert!(matches!(
            diag_1_lambda().mul(&a),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn mul_truncated_window() {
        // known through λ^2, times the exact 1 + λ: only through λ^2 is determined
        let a = LaurentMatrix::new(
            c(0.0),
            0,
            vec![identity(1), identity(1), identity(1)],
            false,
        )
        .unwrap();
        let b = scalar_poly(0.0, &[1.0, 1.0]);
        let p = a.mul(&b).unwrap();
        assert!(!p.exact());
        assert_eq!(values(&p), vec![1.0, 2.0, 2.0]);
        assert!(p.coeff(3).is_err());
    }

    #[test]
    fn monomial_scale_cases() {
        let p = diag_1_lambda();
        assert_eq!(p.monomial_scale(&[0, 0], &[0, 0]).unwrap(), p);

        let k = LaurentMatrix::constant(c(0.0), from_real_rows(1, 1, &[3.0]));
        assert_eq!(
            values(&k.monomial_scale(&[0], &[2]).unwrap()),
            vec![0.0, 0.0, 3.0]
        );
    }

    #[test]
    fn monomial_scale_matches_conjugation() {
        // Λ^{-1} N Λ with Λ = diag(1, λ) and N = [[1, z], [0, 1]]
        let z = 0.7;
        let n = LaurentMatrix::constant(c(0.0), from_real_rows(2, 2, &[1.0, z, 0.0, 1.0]));
        let scaled = n.monomial_scale(&[0, 1], &[0, 1]).unwrap();
        // dense check: Λ · scaled == N · Λ
        let lam = diag_1_lambda();
        let lhs = lam.mul(&scaled).unwrap();
        let rhs = n.mul(&lam).unwrap();
        assert!(lhs.sub(&rhs).unwrap().frob_norm() < 1e-15);
        assert_eq!(scaled.coeffs()[1][(0, 1)], c(z));
        assert_eq!(scaled.coeffs()[0][(0, 1)], c(0.0));
    }

    #[test]
    fn monomial_scale_negative_shift_fails() {
        let n = LaurentMatrix::constant(c(0.0), from_real_rows(2, 2, &[1.0, 0.0, 0.5, 1.0]));
        assert_eq!(
            n.monomial_scale(&[0, 1], &[0, 1]),
            Err(Error::NegativeShiftOnNonzeroEntry { row: 1, col: 0 })
        );
    }

    #[test]
    fn frob_norm_cases() {
        assert_eq!(LaurentMatrix::zero(2, 3, c(0.0)).frob_norm(), 0.0);
        assert_eq!(scalar_poly(0.0, &[3.0, 4.0]).frob_norm(), 5.0);
        let p = LaurentMatrix::polynomial(c(0.0), vec![identity(2), identity(2)]).unwrap();
        assert_eq!(p.frob_norm(), 2.0);
    }

    #[test]
    fn trim_leading_cases() {
        let a = from_real_rows(1, 1, &[2.0]);
        let r =
            LaurentMatrix::new(c(0.0), -1, vec![densela::zeros(1, 1), a.clone()], true).unwrap();
        let t = r.trim_leading().unwrap();
        assert_eq!(t.lowest(), 0);
        assert_eq!(t.coeffs(), &[a]);

        let p = diag_1_lambda();
        assert_eq!(p.trim_leading().unwrap(), p);

        let z = LaurentMatrix::zero(2, 2, c(0.0));
        assert_eq!(z.trim_leading(), Err(Error::ZeroFunction));
    }

    #[test]
    fn trim_with_tolerance() {
        let r = LaurentMatrix::new(
            c(0.0),
            -1,
            vec![from_real_rows(1, 1, &[1e-14]), identity(1)],
            true,
        )
        .unwrap();
        assert_eq!(r.trim_leading().unwrap().lowest(), -1);
        assert_eq!(r.trim_leading_tol(1e-12).unwrap().lowest(), 0);
    }

    #[test]
    fn coeff_past_truncation_is_an_error() {
        let r = LaurentMatrix::new(c(0.0), 0, vec![identity(1)], false).unwrap();
        assert!(matches!(
            r.coeff(1),
            Err(Error::InsufficientSeriesOrder {
                required: 1,
                available: 0
            })
        ));
    }
}
