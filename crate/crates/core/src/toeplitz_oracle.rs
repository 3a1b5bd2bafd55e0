//! Brute-force reference for structural indices.
//!
//! Builds the block Toeplitz matrices `T_k` of a Laurent series explicitly,
//! ranks each one with an SVD, and reads the indices off the rank increments.
//! Nothing here shares code with the rank search beyond the dense rank kernel.

use serde::{Deserialize, Serialize};

use crate::densela::{self, ComplexMatrix, Tolerance};
use crate::error::{Error, Result};
use crate::polymat::LaurentMatrix;

/// Upper block-triangular Toeplitz matrix with blocks `R_lowest … R_k`.
///
/// Block `(p, q)` holds `R_{lowest + q - p}` for `q >= p`.
pub fn build_toeplitz(m: &LaurentMatrix, k: i64) -> Result<ComplexMatrix> {
    if k < m.lowest() {
        return Err(Error::DimensionMismatch(format!(
            "Toeplitz order {k} below lowest exponent {}",
            m.lowest()
        )));
    }
    if !m.exact() && k > m.highest() {
        return Err(Error::InsufficientSeriesOrder {
            required: k,
            available: m.highest(),
        });
    }
    let blocks = (k - m.lowest() + 1) as usize;
    let (rows, cols) = (m.rows(), m.cols());
    let coeffs = (0..blocks)
        .map(|t| m.coeff(m.lowest() + t as i64))
        .collect::<Result<Vec<_>>>()?;
    let mut t = densela::zeros(rows * blocks, cols * blocks);
    for p in 0..blocks {
        for q in p..blocks {
            t.view_mut((p * rows, q * cols), (rows, cols))
                .copy_from(&coeffs[q - p]);
        }
    }
    Ok(t)
}

/// Toeplitz ranks and derived counts, indexed by the scaled order
/// `t = k + ℓ >= 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToeplitzProfile {
    pub pole_order: usize,
    pub normal_rank: usize,
    /// `ranks[t] = rank T_{t - ℓ}`.
    pub ranks: Vec<usize>,
    /// `increments[t] = ranks[t] - ranks[t - 1]`.
    pub increments: Vec<usize>,
    /// `multiplicities[t]` indices are equal to `t - ℓ`.
    pub multiplicities: Vec<usize>,
    /// Stop order `d'` in scaled numbering, or `None` if the increments never
    /// reached the normal rank.
    pub stop_order: Option<usize>,
}

impl ToeplitzProfile {
    pub fn indices(&self) -> Result<Vec<i64>> {
        indices_from_profile(self, self.pole_order)
    }

    /// `d'` in the original (unscaled) numbering.
    pub fn max_index(&self) -> Option<i64> {
        self.stop_order.map(|t| t as i64 - self.pole_order as i64)
    }
}

/// Default order cap `ℓ + min(m, n) (d + ℓ) + 1` for an exact series.
pub fn default_max_order(m: &LaurentMatrix) -> usize {
    let ell = m.pole_order() as i64;
    let d = m.highest();
    let cap = ell + (m.rows().min(m.cols()) as i64) * (d + ell).max(0) + 1;
    cap.max(0) as usize
}

/// Ranks `T_k` for `k = lowest, lowest + 1, …` until the surplus rank equals
/// `normal_rank`.
///
/// `max_order` caps the scaled order; `None` picks [`default_max_order`] for
/// exact input and the known window for truncated input.
pub fn oracle_profile(
    m: &LaurentMatrix,
    normal_rank: usize,
    tol: Tolerance,
    max_order: Option<usize>,
) -> Result<ToeplitzProfile> {
    let m = m.trim_leading()?;
    // a Taylor series still counts orders from 0
    let m = m.with_lowest(m.lowest().min(0))?;
    if normal_rank == 0 || normal_rank > m.rows().min(m.cols()) {
        return Err(Error::DimensionMismatch(format!(
            "normal rank {normal_rank} for a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    let ell = m.pole_order();
    let known = if m.exact() {
        None
    } else {
        Some((m.highest() + ell as i64) as usize)
    };
    let cap = max_order.unwrap_or_else(|| known.unwrap_or_else(|| default_max_order(&m)));

    let mut profile = ToeplitzProfile {
        pole_order: ell,
        normal_rank,
        ranks: Vec::new(),
        increments: Vec::new(),
        multiplicities: Vec::new(),
        stop_order: None,
    };
    for t in 0..=cap {
        if known.is_some_and(|k| t > k) {
            return Err(Error::InsufficientSeriesOrder {
                required: t as i64 - ell as i64,
                available: m.highest(),
            });
        }
        let k = t as i64 + m.lowest();
        let tk = build_toeplitz(&m, k)?;
        let rank = densela::numerical_rank(&tk, tol)?.rank;
        let prev_rank = profile.ranks.last().copied().unwrap_or(0);
        let inc = rank.saturating_sub(prev_rank);
        let prev_inc = profile.increments.last().copied().unwrap_or(0);
        profile.ranks.push(rank);
        profile.increments.push(inc);
        profile.multiplicities.push(inc.saturating_sub(prev_inc));
        if inc > normal_rank {
            return Err(Error::RankExceedsNormalRank {
                step: t,
                found: inc,
                normal_rank,
            });
        }
        if inc == normal_rank {
            profile.stop_order = Some(t);
            return Ok(profile);
        }
    }
    Err(Error::MaxOrderExceeded {
        max_order: cap,
        normal_rank,
        reached: profile.increments.last().copied().unwrap_or(0),
    })
}

/// Multiset `{t - ℓ with multiplicity e_t}`, sorted.
pub fn indices_from_profile(p: &ToeplitzProfile, pole_order: usize) -> Result<Vec<i64>> {
    let total: usize = p.multiplicities.iter().sum();
    if p.stop_order.is_none() || total != p.normal_rank {
        return Err(Error::IncompleteProfile);
    }
    Ok(p.multiplicities
        .iter()
        .enumerate()
        .flat_map(|(t, &e)| std::iter::repeat_n(t as i64 - pole_order as i64, e))
        .collect())
}
