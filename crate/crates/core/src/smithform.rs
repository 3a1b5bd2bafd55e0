//! Compact local Smith-McMillan decomposition assembled from a rank search.
//!
//! For a rational matrix `R(λ)` of normal rank `r` the decomposition satisfies
//!
//! ```text
//! R(λ) N_r(λ) = M̂_r(λ) diag((λ-λ₀)^σ_1, …, (λ-λ₀)^σ_r)
//! ```
//!
//! with `N_r` the first `r` columns of a unimodular `N(λ)` and `M̂_r(λ₀)` of
//! full column rank. Poles are handled by running the search on
//! `(λ-λ₀)^ℓ R(λ)` and shifting the indices back by `ℓ`.

use nalgebra::SVD;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::densela::{self, Tolerance};
use crate::error::{Error, Result};
use crate::polymat::{LaurentMatrix, PolyMatrix};
use crate::ranksearch::{self, RankSearchTrace, SearchOptions};

/// Seed used for normal-rank sampling when the caller does not pick one.
pub const DEFAULT_SEED: u64 = 0x5eed_5717;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecomposeOptions {
    /// Normal rank; `None` estimates it by sampling.
    pub normal_rank: Option<usize>,
    pub search: SearchOptions,
    pub rank_trials: usize,
    pub seed: u64,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        DecomposeOptions {
            normal_rank: None,
            search: SearchOptions::default(),
            rank_trials: 5,
            seed: DEFAULT_SEED,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    /// `‖R N_r - M̂_r Λ‖ / ‖R‖` on the known window.
    pub res_rel: f64,
    pub norm_input: f64,
    /// Norm of the full unimodular factor `N(λ)`.
    pub norm_n: f64,
    /// Smallest singular value of `M̂_r(λ₀)`.
    pub mr_sigma_min: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompactDecomposition {
    pub point: Complex64,
    /// `ℓ`, the pole order used for scaling.
    pub pole_order: usize,
    pub normal_rank: usize,
    /// Structural indices, nondecreasing.
    pub indices: Vec<i64>,
    /// `multiplicities[t]` indices equal `t - ℓ`.
    pub multiplicities: Vec<usize>,
    /// `ρ_0, …, ρ_{d'}` of the scaled search.
    pub ranks: Vec<usize>,
    /// `d'` of the scaled search.
    pub stop_order: usize,
    /// `N_r(λ)`, n x r polynomial about λ₀.
    pub nr: PolyMatrix,
    /// `M̂_r(λ)`, m x r; truncated when the input is.
    pub mr_hat: LaurentMatrix,
    /// The full unimodular `N(λ)`, n x n.
    pub n_full: PolyMatrix,
    /// `columns[i]` is the column of `N_r` that carries `indices[i]`.
    pub columns: Vec<usize>,
    pub diagnostics: Diagnostics,
}

impl CompactDecomposition {
    /// Decomposition of the zero function: no indices, empty factors.
    pub fn empty(rows: usize, cols: usize, point: Complex64) -> Self {
        let empty = |r: usize, c: usize| {
            LaurentMatrix::polynomial(point, vec![densela::zeros(r, c)]).expect("finite")
        };
        CompactDecomposition {
            point,
            pole_order: 0,
            normal_rank: 0,
            indices: Vec::new(),
            multiplicities: Vec::new(),
            ranks: Vec::new(),
            stop_order: 0,
            nr: empty(cols, 0),
            mr_hat: empty(rows, 0),
            n_full: LaurentMatrix::constant(point, densela::identity(cols)),
            columns: Vec::new(),
            diagnostics: Diagnostics::default(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.normal_rank == 0
    }

    /// Largest structural index, `d' - ℓ`.
    pub fn max_index(&self) -> Option<i64> {
        self.indices.last().copied()
    }
}

/// Computes the compact local Smith-McMillan form of `m` at its expansion point.
pub fn decompose(m: &LaurentMatrix, opts: &DecomposeOptions) -> Result<CompactDecomposition> {
    let trimmed = match m.trim_leading() {
        Ok(t) => t,
        Err(Error::ZeroFunction) => {
            return Ok(CompactDecomposition::empty(m.rows(), m.cols(), m.point()))
        }
        Err(e) => return Err(e),
    };
    let ell = trimmed.pole_order();
    let taylor = trimmed.shift(ell as i64).with_lowest(0)?;
    let r = match opts.normal_rank {
        Some(r) => r,
        None if !trimmed.exact() => return Err(Error::NormalRankRequired),
        None => ranksearch::estimate_normal_rank(
            &trimmed,
            opts.rank_trials,
            opts.search.tol,
            opts.seed,
        )?,
    };
    if r == 0 {
        return Err(Error::DimensionMismatch(
            "normal rank estimated as 0 for a nonzero function".into(),
        ));
    }
    let trace = ranksearch::search_scaled(&taylor, ell, r, &opts.search)?;
    from_trace(m, &trace)
}

/// Builds the decomposition (and its diagnostics) from a finished trace.
pub fn from_trace(m: &LaurentMatrix, trace: &RankSearchTrace) -> Result<CompactDecomposition> {
    let r = trace.normal_rank;
    let ell = trace.pole_order as i64;
    let n_full = assemble_unimodular(trace)?;
    let nr = n_full.columns(0, r);
    let indices: Vec<i64> = trace.col_shifts[..r].iter().map(|c| c - ell).collect();
    // Dividing R̂ N_r by Λ directly avoids the rounding that the stack
    // updates accumulate when Z is large.
    let scaled = m.trim_leading()?.shift(ell).with_lowest(0)?;
    let product = scaled.mul(&nr)?;
    let mr_hat = divide_columns(&product, &trace.col_shifts[..r])?;
    let mut d = CompactDecomposition {
        point: trace.point,
        pole_order: trace.pole_order,
        normal_rank: r,
        indices,
        multiplicities: trace.multiplicities(),
        ranks: trace.ranks(),
        stop_order: trace.stop_order,
        nr,
        mr_hat,
        n_full,
        columns: (0..r).collect(),
        diagnostics: Diagnostics::default(),
    };
    let report = residual_report(m, &d)?;
    let mr0 = d.mr_hat.coeff(0)?;
    d.diagnostics = Diagnostics {
        res_rel: report.res_rel,
        norm_input: report.norm_input,
        norm_n: report.norm_n,
        mr_sigma_min: densela::singular_values(&mr0)
            .last()
            .copied()
            .unwrap_or(0.0),
    };
    Ok(d)
}

/// Drops the first `exps[j]` coefficients of column `j` and shifts the rest
/// down. A truncated input keeps the window common to all columns.
fn divide_columns(m: &LaurentMatrix, exps: &[i64]) -> Result<LaurentMatrix> {
    let len = m.coeffs().len() as i64;
    let base = m.lowest();
    let max_e = exps.iter().copied().max().unwrap_or(0);
    let out_len = if m.exact() {
        (len - exps.iter().copied().min().unwrap_or(0)).max(1)
    } else {
        len - max_e
    };
    if out_len < 1 {
        return Err(Error::InsufficientSeriesOrder {
            required: base + max_e,
            available: m.highest(),
        });
    }
    let coeffs = (0..out_len)
        .map(|t| {
            let mut c = densela::zeros(m.rows(), m.cols());
            for (j, &e) in exps.iter().enumerate() {
                if let Some(src) = m.coeffs().get((t + e) as usize) {
                    c.column_mut(j).copy_from(&src.column(j));
                }
            }
            c
        })
        .collect();
    LaurentMatrix::new(m.point(), base, coeffs, m.exact())
}

/// Rebuilds `N(λ) = N_0 Λ_0⁻¹ N_1 Λ_1⁻¹ ⋯ N_{d'} Λ_{d'}⁻¹ Λ(λ)` from a trace.
///
/// Each `N_i` is conjugated by the column shifts accumulated before step `i`,
/// which only ever multiplies entries by nonnegative powers.
pub fn assemble_unimodular(trace: &RankSearchTrace) -> Result<PolyMatrix> {
    let n = trace.col_shifts.len();
    let point = trace.point;
    let mut u = LaurentMatrix::constant(point, densela::identity(n));
    let mut shifts = vec![0i64; n];
    for (k, step) in trace.steps.iter().enumerate() {
        let ni = LaurentMatrix::constant(point, step.transformation());
        let conj = ni.monomial_scale(&shifts, &shifts)?;
        u = u.mul(&conj)?;
        if k + 1 < trace.steps.len() {
            for s in shifts.iter_mut().skip(step.rank) {
                *s += 1;
            }
        }
    }
    debug_assert_eq!(shifts, trace.col_shifts);
    Ok(u)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub res_rel: f64,
    pub norm_input: f64,
    pub norm_n: f64,
}

/// `R N_r - M̂_r Λ_(r)` for the decomposition `d` of `m`.
pub fn residual(m: &LaurentMatrix, d: &CompactDecomposition) -> Result<LaurentMatrix> {
    let scaled = m.shift(d.pole_order as i64);
    let exps: Vec<i64> = d.indices.iter().map(|s| s + d.pole_order as i64).collect();
    let lambda_cols = d.mr_hat.monomial_scale(&vec![0; d.mr_hat.rows()], &exps)?;
    let lhs = scaled.mul(&d.nr)?;
    lhs.sub(&lambda_cols)
}

/// Relative residual `‖R N_r - M̂_r Λ_(r)‖ / ‖R‖` together with `‖R‖` and `‖N‖`.
pub fn residual_report(m: &LaurentMatrix, d: &CompactDecomposition) -> Result<ResidualReport> {
    let norm_input = m.frob_norm();
    let norm_n = d.n_full.frob_norm();
    if d.is_empty() {
        return Ok(ResidualReport {
            res_rel: 0.0,
            norm_input,
            norm_n,
        });
    }
    let res = residual(m, d)?;
    Ok(ResidualReport {
        res_rel: res.frob_norm() / norm_input,
        norm_input,
        norm_n,
    })
}

/// Relative spread `max |det N(λ_k) - det N(λ_0)| / |det N(λ_0)|` over
/// `samples` random points; zero for an exactly unimodular factor.
pub fn determinant_spread(n_full: &PolyMatrix, samples: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dets = (0..samples.max(1))
        .map(|_| {
            let radius = rng.random_range(0.5..=2.0);
            let angle = rng.random_range(0.0..std::f64::consts::TAU);
            let lambda = n_full.point() + Complex64::from_polar(radius, angle);
            Ok(n_full.eval(lambda)?.determinant())
        })
        .collect::<Result<Vec<_>>>()?;
    let base = dets[0];
    if base.norm() == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(dets
        .iter()
        .map(|d| (d - base).norm() / base.norm())
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RootVector {
    /// Position in the index list.
    pub position: usize,
    pub order: i64,
    /// `x_i(λ)`, n x 1 polynomial.
    pub x: PolyMatrix,
    /// `v_i(λ)`, m x 1.
    pub v: LaurentMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RootRankReport {
    /// Rank of `[N(λ₀)[0; I_{n-r}], x_j(λ₀), …, x_r(λ₀)]` and its width.
    pub x_rank: usize,
    pub x_cols: usize,
    /// Rank of `[v_j(λ₀), …, v_r(λ₀)]` and its width.
    pub v_rank: usize,
    pub v_cols: usize,
    /// `dim ker R(λ₀)`, only defined when λ₀ is not a pole.
    pub kernel_dim: Option<usize>,
}

impl RootRankReport {
    pub fn passes(&self) -> bool {
        self.x_rank == self.x_cols
            && self.v_rank == self.v_cols
            && self.kernel_dim.is_none_or(|k| k == self.x_cols)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RootVectorSet {
    /// `j`, first position with a positive index.
    pub threshold: usize,
    pub vectors: Vec<RootVector>,
    pub report: RootRankReport,
}

/// Root polynomials / root vectors: the columns of `N_r` and `M̂_r` that carry
/// a positive index, with the full-rank conditions at λ₀ checked.
pub fn extract_root_vectors(
    m: &LaurentMatrix,
    d: &CompactDecomposition,
    tol: Tolerance,
) -> Result<RootVectorSet> {
    let threshold = d
        .indices
        .iter()
        .position(|&s| s >= 1)
        .ok_or(Error::NoZeroAtPoint)?;
    let r = d.normal_rank;
    let n = d.n_full.cols();
    let vectors = (threshold..r)
        .map(|i| RootVector {
            position: i,
            order: d.indices[i],
            x: d.nr.columns(i, 1),
            v: d.mr_hat.columns(i, 1),
        })
        .collect();

    // N(λ₀) columns j..n hold x_j(λ₀), …, x_r(λ₀) and the null-space block
    let n0 = d.n_full.coeff(0)?;
    let x_block = n0.columns(threshold, n - threshold).into_owned();
    let v_block = d
        .mr_hat
        .coeff(0)?
        .columns(threshold, r - threshold)
        .into_owned();
    let kernel_dim = if m.trim_leading()?.lowest() >= 0 {
        let r0 = m.coeff(0)?;
        Some(n - densela::numerical_rank(&r0, tol)?.rank)
    } else {
        None
    };
    let report = RootRankReport {
        x_rank: densela::numerical_rank(&x_block, tol)?.rank,
        x_cols: x_block.ncols(),
        v_rank: densela::numerical_rank(&v_block, tol)?.rank,
        v_cols: v_block.ncols(),
        kernel_dim,
    };
    Ok(RootVectorSet {
        threshold,
        vectors,
        report,
    })
}

/// `‖R x_i - v_i (λ-λ₀)^σ_i‖ / (‖R‖ ‖x_i‖)` on the known window.
pub fn root_vector_residual(m: &LaurentMatrix, rv: &RootVector) -> Result<f64> {
    let lhs = m.mul(&rv.x)?;
    let rhs = rv.v.shift(rv.order);
    let res = lhs.sub(&rhs)?;
    Ok(res.frob_norm() / (m.frob_norm() * rv.x.frob_norm()))
}

/// Left-sided compact form `M_ℓ(λ) R(λ) = Λ(λ) N̂_ℓ(λ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LeftDecomposition {
    pub indices: Vec<i64>,
    /// `M_ℓ(λ)`, r x m polynomial.
    pub ml: PolyMatrix,
    /// `N̂_ℓ(λ)`, r x n.
    pub n_hat: LaurentMatrix,
}

/// The left form, obtained from the right form of the transpose.
pub fn decompose_left(m: &LaurentMatrix, opts: &DecomposeOptions) -> Result<LeftDecomposition> {
    let d = decompose(&m.transpose(), opts)?;
    Ok(LeftDecomposition {
        indices: d.indices,
        ml: d.nr.transpose(),
        n_hat: d.mr_hat.transpose(),
    })
}

/// Smallest singular value of a constant matrix, used as a rank certificate.
pub fn sigma_min(a: &densela::ComplexMatrix) -> f64 {
    if a.ncols() == 0 {
        return f64::INFINITY;
    }
    SVD::new(a.clone(), false, false)
        .singular_values
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}
