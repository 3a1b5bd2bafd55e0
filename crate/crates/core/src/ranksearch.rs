//! Toeplitz rank search with tracked column transformations.
//!
//! The search works on the coefficient stack `P_0, P_1, …` of a Taylor series
//! about λ₀. At step `i` the columns split into `ρ_{i-1}` frozen columns `L`
//! and `ν_{i-1}` trailing columns whose constant block is `R`. The step
//!
//! 1. eliminates `R` against `L` with `Z_i = -L⁺R`,
//! 2. compresses the remainder `(I - LL⁺)R` with a unitary `Q_i`, freezing its
//!    independent directions,
//! 3. divides the remaining trailing columns by `(λ - λ₀)`.
//!
//! Every coefficient receives the same column operation
//! `N_i = [[I, Z_i Q_i], [0, Q_i]]`, so the recorded steps are enough to
//! rebuild the unimodular right factor. The search stops as soon as the
//! frozen width reaches the normal rank.

use nalgebra::SVD;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::densela::{self, ComplexMatrix, Tolerance};
use crate::error::{Error, Result};
use crate::polymat::LaurentMatrix;
use crate::toeplitz_oracle;

/// Reference magnitude for the per-step rank cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum RankScale {
    /// Largest singular value of the current constant block.
    Local,
    /// Frobenius norm of the whole input stack.
    #[default]
    Global,
}

/// Default relative cutoff factor for [`RankScale::Global`], in units of
/// `max(m, n) * eps`.
pub const GLOBAL_REL_FACTOR: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SearchOptions {
    /// `rel == None` picks `GLOBAL_REL_FACTOR * max(m, n) * eps` for the
    /// global scale and the plain dense default for the local one.
    pub tol: Tolerance,
    pub scale: RankScale,
    /// Cap on the stop order; `None` derives one from the input.
    pub max_order: Option<usize>,
}

/// One step of the search.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    /// `ρ_{i-1}`, width of the frozen block before the step.
    pub frozen_before: usize,
    /// `ρ_i`.
    pub rank: usize,
    /// `ν_i = n - ρ_i`.
    pub nullity: usize,
    /// `ρ_{i-1} x ν_{i-1}`.
    pub z: ComplexMatrix,
    /// `ν_{i-1} x ν_{i-1}`, unitary.
    pub q: ComplexMatrix,
    pub cutoff: f64,
    /// Singular values of the projected trailing block that was compressed.
    pub residual_singular_values: Vec<f64>,
}

impl StepRecord {
    /// Columns frozen by this step, `ρ_i - ρ_{i-1}`.
    pub fn added(&self) -> usize {
        self.rank - self.frozen_before
    }

    /// The constant transformation `N_i = [[I, Z Q], [0, Q]]` (n x n).
    pub fn transformation(&self) -> ComplexMatrix {
        let f = self.frozen_before;
        let nu = self.q.ncols();
        let mut n = densela::identity(f + nu);
        n.view_mut((0, f), (f, nu)).copy_from(&(&self.z * &self.q));
        n.view_mut((f, f), (nu, nu)).copy_from(&self.q);
        n
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankSearchTrace {
    pub point: Complex64,
    /// `ℓ` used to scale the input to a Taylor series.
    pub pole_order: usize,
    pub normal_rank: usize,
    pub steps: Vec<StepRecord>,
    /// `d'` in scaled numbering.
    pub stop_order: usize,
    /// `P^{(d')}` (or the truncated window of `R^{(d')}`), lowest exponent 0.
    pub final_stack: LaurentMatrix,
    /// Number of divisions by `(λ - λ₀)` applied to each column.
    pub col_shifts: Vec<i64>,
}

impl RankSearchTrace {
    /// `ρ_0, …, ρ_{d'}`.
    pub fn ranks(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.rank).collect()
    }

    /// Partial sums `Σ_{i<=k} ρ_i`, which equal the Toeplitz ranks `r_k`.
    pub fn cumulative_ranks(&self) -> Vec<usize> {
        self.steps
            .iter()
            .scan(0, |acc, s| {
                *acc += s.rank;
                Some(*acc)
            })
            .collect()
    }

    /// `e_i = ρ_i - ρ_{i-1}` in scaled numbering.
    pub fn multiplicities(&self) -> Vec<usize> {
        self.steps.iter().map(StepRecord::added).collect()
    }
}

/// Applies one step's column operation to every coefficient and, unless
/// `shift` is false, divides the trailing columns (those past `new_frozen`)
/// by `(λ - λ₀)`.
///
/// Exact stacks grow explicit zeros at the top of shifted columns; truncated
/// stacks lose their last coefficient.
pub fn apply_step_to_stack(
    stack: &LaurentMatrix,
    frozen: usize,
    z: &ComplexMatrix,
    q: &ComplexMatrix,
    new_frozen: usize,
    shift: bool,
) -> Result<LaurentMatrix> {
    let n = stack.cols();
    let nu = n - frozen;
    if z.shape() != (frozen, nu) || q.shape() != (nu, nu) || new_frozen < frozen || new_frozen > n {
        return Err(Error::DimensionMismatch(format!(
            "step with Z {:?}, Q {:?} on {} frozen of {} columns",
            z.shape(),
            q.shape(),
            frozen,
            n
        )));
    }
    let mut coeffs: Vec<ComplexMatrix> = stack
        .coeffs()
        .iter()
        .map(|c| {
            let mut c = c.clone();
            let mut trailing = c.columns(frozen, nu).into_owned();
            if frozen > 0 {
                trailing += c.columns(0, frozen) * z;
            }
            c.columns_mut(frozen, nu).copy_from(&(trailing * q));
            c
        })
        .collect();

    if shift && new_frozen < n {
        let width = n - new_frozen;
        for t in 0..coeffs.len() {
            let next = match coeffs.get(t + 1) {
                Some(c) => c.columns(new_frozen, width).into_owned(),
                None => densela::zeros(stack.rows(), width),
            };
            coeffs[t].columns_mut(new_frozen, width).copy_from(&next);
        }
        if !stack.exact() {
            coeffs.pop();
            if coeffs.is_empty() {
                return Err(Error::InsufficientSeriesOrder {
                    required: stack.highest() + 1,
                    available: stack.highest(),
                });
            }
        }
    }
    let out = LaurentMatrix::new(stack.point(), stack.lowest(), coeffs, stack.exact())?;
    Ok(if out.exact() {
        trim_zero_tail(out)
    } else {
        out
    })
}

fn trim_zero_tail(m: LaurentMatrix) -> LaurentMatrix {
    let zero = Complex64::new(0.0, 0.0);
    let (point, lowest, exact) = (m.point(), m.lowest(), m.exact());
    let mut coeffs = m.into_coeffs();
    while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.iter().all(|z| *z == zero)) {
        coeffs.pop();
    }
    LaurentMatrix::new(point, lowest, coeffs, exact).expect("nonempty finite stack")
}

/// Runs the rank search on a series whose lowest exponent is 0.
pub fn search(
    m: &LaurentMatrix,
    normal_rank: usize,
    opts: &SearchOptions,
) -> Result<RankSearchTrace> {
    search_scaled(m, 0, normal_rank, opts)
}

/// Like [`search`] on a series already multiplied by `(λ - λ₀)^ℓ`; `pole_order`
/// is recorded in the trace.
pub(crate) fn search_scaled(
    m: &LaurentMatrix,
    pole_order: usize,
    normal_rank: usize,
    opts: &SearchOptions,
) -> Result<RankSearchTrace> {
    if m.lowest() != 0 {
        return Err(Error::DimensionMismatch(format!(
            "rank search needs a Taylor series, lowest exponent is {}",
            m.lowest()
        )));
    }
    let (rows, n) = (m.rows(), m.cols());
    if normal_rank == 0 || normal_rank > rows.min(n) {
        return Err(Error::DimensionMismatch(format!(
            "normal rank {normal_rank} for a {rows}x{n} matrix"
        )));
    }
    let known = (!m.exact()).then(|| m.highest() as usize);
    let max_order = opts
        .max_order
        .or(known)
        .unwrap_or_else(|| toeplitz_oracle::default_max_order(m));
    let global_ref = m.frob_norm();
    let step_tol = match (opts.scale, opts.tol.rel) {
        (RankScale::Global, None) => Tolerance {
            rel: Some(GLOBAL_REL_FACTOR * rows.max(n) as f64 * densela::MACHINE_EPS),
            abs: opts.tol.abs,
        },
        _ => opts.tol,
    };

    let mut stack = m.clone();
    let mut frozen = 0usize;
    let mut col_shifts = vec![0i64; n];
    let mut steps = Vec::new();

    for i in 0.. {
        if i > max_order {
            return Err(match known {
                Some(k) if i > k => Error::InsufficientSeriesOrder {
                    required: i as i64,
                    available: k as i64,
                },
                _ => Error::MaxOrderExceeded {
                    max_order,
                    normal_rank,
                    reached: frozen,
                },
            });
        }
        let c0 = stack.coeffs()[0].clone();
        let reference = match opts.scale {
            RankScale::Local => densela::singular_values(&c0)
                .first()
                .copied()
                .unwrap_or(0.0),
            RankScale::Global => global_ref,
        };
        let cutoff = step_tol.cutoff(rows, n, reference);

        let nu = n - frozen;
        let l = c0.columns(0, frozen).into_owned();
        let r = c0.columns(frozen, nu).into_owned();
        // Z = -L⁺R. An iterative refinement of Z would go here.
        let z = if frozen == 0 {
            densela::zeros(0, nu)
        } else {
            // the frozen columns were admitted above the same cutoff
            let l_tol = Tolerance {
                rel: Some(0.0),
                abs: 0.5 * cutoff,
            };
            -densela::least_squares_solve_tol(&l, &r, l_tol).map_err(|e| match e {
                Error::RankDeficientL { rank, cols } => Error::RankDecrease {
                    step: i,
                    expected: cols,
                    found: rank,
                },
                other => other,
            })?
        };
        let projected = if frozen == 0 { r } else { r + &l * &z };
        let residual_singular_values = densela::singular_values(&projected);
        let (q, added) = densela::column_compress_above(&projected, cutoff)?;
        // never freeze more than the normal rank allows; keep the strongest
        let rank = (frozen + added).min(normal_rank);
        let done = rank == normal_rank;
        stack = apply_step_to_stack(&stack, frozen, &z, &q, rank, false)?;
        // the dropped directions are below the cutoff; make them exact zeros
        let mut coeffs = stack.clone().into_coeffs();
        coeffs[0]
            .columns_mut(rank, n - rank)
            .fill(Complex64::new(0.0, 0.0));
        stack = LaurentMatrix::new(stack.point(), 0, coeffs, stack.exact())?;
        steps.push(StepRecord {
            step: i,
            frozen_before: frozen,
            rank,
            nullity: n - rank,
            z,
            q,
            cutoff,
            residual_singular_values,
        });
        if done {
            return Ok(RankSearchTrace {
                point: m.point(),
                pole_order,
                normal_rank,
                steps,
                stop_order: i,
                final_stack: stack,
                col_shifts,
            });
        }
        let ident = densela::identity(n - rank);
        let none = densela::zeros(rank, n - rank);
        stack = apply_step_to_stack(&stack, rank, &none, &ident, rank, true)?;
        for c in col_shifts.iter_mut().skip(rank) {
            *c += 1;
        }
        frozen = rank;
    }
    unreachable!("loop exits through return")
}

/// Normal rank estimate: the largest numerical rank of the series evaluated
/// at `trials` random points on the annulus `0.5 <= |λ - λ₀| <= 2`.
///
/// A truncated series cannot be evaluated away from λ₀, so for those the
/// surplus rank of the largest available Toeplitz matrix is used instead.
pub fn estimate_normal_rank(
    m: &LaurentMatrix,
    trials: usize,
    tol: Tolerance,
    seed: u64,
) -> Result<usize> {
    let m = match m.trim_leading() {
        Ok(m) => m,
        Err(Error::ZeroFunction) => return Ok(0),
        Err(e) => return Err(e),
    };
    if !m.exact() {
        let top = m.highest();
        let rank_at = |k: i64| -> Result<usize> {
            if k < m.lowest() {
                return Ok(0);
            }
            Ok(densela::numerical_rank(&toeplitz_oracle::build_toeplitz(&m, k)?, tol)?.rank)
        };
        return Ok(rank_at(top)? - rank_at(top - 1)?);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0;
    for _ in 0..trials.max(1) {
        let radius = rng.random_range(0.5..=2.0);
        let angle = rng.random_range(0.0..std::f64::consts::TAU);
        let lambda = m.point() + Complex64::from_polar(radius, angle);
        let value = m.eval(lambda)?;
        // rounding in the evaluation scales with the terms, not with the sum
        let h = radius;
        let magnitude: f64 = m
            .coeffs()
            .iter()
            .enumerate()
            .map(|(t, c)| densela::frobenius(c) * h.powi((m.lowest() + t as i64) as i32))
            .sum();
        let cutoff = tol.cutoff(m.rows(), m.cols(), magnitude);
        best = best.max(densela::rank_above(&value, cutoff)?.rank);
    }
    Ok(best)
}

/// Smallest singular value of the final frozen block; a certificate that
/// `L_0^{(d')}` has full column rank.
pub fn frozen_block_sigma_min(trace: &RankSearchTrace) -> f64 {
    let c0 = trace.final_stack.coeffs()[0]
        .columns(0, trace.normal_rank)
        .into_owned();
    SVD::new(c0, false, false)
        .singular_values
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}
