//! Random test instances with planted local Smith structure at λ₀ = 0, and
//! the two accuracy experiments (growing dynamic range, growing degree).

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::densela::{self, ComplexMatrix, Tolerance};
use crate::error::{Error, Result};
use crate::polymat::{LaurentMatrix, PolyMatrix};
use crate::ranksearch;
use crate::smithform::{self, DecomposeOptions};

/// `P(λ) = M(λ) diag(λ^e_1, …, λ^e_r, 0, …) N(λ)` with random `M`, `N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub rows: usize,
    pub cols: usize,
    /// Planted exponents; their count is the normal rank.
    pub exponents: Vec<usize>,
    /// Degree of the random transforms `M(λ)` and `N(λ)`.
    pub transform_degree: usize,
    /// Entries are `g^power` for standard normal `g`.
    pub power: i32,
    pub seed: u64,
    /// Draw real and imaginary parts independently.
    pub complex: bool,
    /// Use `M = N = I` instead of random transforms.
    pub identity_transforms: bool,
}

impl InstanceSpec {
    pub fn new(rows: usize, cols: usize, exponents: Vec<usize>, transform_degree: usize) -> Self {
        InstanceSpec {
            rows,
            cols,
            exponents,
            transform_degree,
            power: 1,
            seed: 0,
            complex: false,
            identity_transforms: false,
        }
    }

    pub fn normal_rank(&self) -> usize {
        self.exponents.len()
    }

    fn validate(&self) -> Result<()> {
        if self.exponents.is_empty() || self.normal_rank() > self.rows.min(self.cols) {
            return Err(Error::InvalidSpec(format!(
                "{} exponents for a {}x{} matrix",
                self.exponents.len(),
                self.rows,
                self.cols
            )));
        }
        if self.exponents.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidSpec("exponents must be nondecreasing".into()));
        }
        if self.power < 1 {
            return Err(Error::InvalidSpec("power must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub matrix: PolyMatrix,
    pub indices: Vec<i64>,
    /// Seed of the draw that was accepted.
    pub seed: u64,
}

const MAX_ATTEMPTS: usize = 5;

fn draw(rng: &mut ChaCha8Rng, power: i32, complex: bool) -> Complex64 {
    let mut g = || -> f64 {
        let x: f64 = rng.sample(StandardNormal);
        x.powi(power)
    };
    let re = g();
    let im = if complex { g() } else { 0.0 };
    Complex64::new(re, im)
}

fn random_poly(
    rng: &mut ChaCha8Rng,
    size: usize,
    degree: usize,
    power: i32,
    complex: bool,
) -> PolyMatrix {
    let coeffs = (0..=degree)
        .map(|_| ComplexMatrix::from_fn(size, size, |_, _| draw(rng, power, complex)))
        .collect();
    LaurentMatrix::polynomial(Complex64::new(0.0, 0.0), coeffs).expect("finite draws")
}

fn planted_diagonal(spec: &InstanceSpec) -> PolyMatrix {
    let deg = spec.exponents.iter().copied().max().unwrap_or(0);
    let coeffs = (0..=deg)
        .map(|t| {
            let mut c = densela::zeros(spec.rows, spec.cols);
            for (i, &e) in spec.exponents.iter().enumerate() {
                if e == t {
                    c[(i, i)] = Complex64::new(1.0, 0.0);
                }
            }
            c
        })
        .collect();
    LaurentMatrix::polynomial(Complex64::new(0.0, 0.0), coeffs).expect("finite")
}

/// Draws `P(λ)` for `spec`; retries with a derived seed when the draw is
/// degenerate (normal rank differs from the planted one, or a transform is
/// singular at λ₀).
pub fn gen_instance(spec: &InstanceSpec) -> Result<Instance> {
    spec.validate()?;
    let diag = planted_diagonal(spec);
    let indices: Vec<i64> = spec.exponents.iter().map(|&e| e as i64).collect();
    if spec.identity_transforms {
        return Ok(Instance {
            matrix: diag,
            indices,
            seed: spec.seed,
        });
    }
    for attempt in 0..MAX_ATTEMPTS {
        let seed = spec
            .seed
            .wrapping_add((attempt as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_poly(
            &mut rng,
            spec.rows,
            spec.transform_degree,
            spec.power,
            spec.complex,
        );
        let n = random_poly(
            &mut rng,
            spec.cols,
            spec.transform_degree,
            spec.power,
            spec.complex,
        );
        let invertible_at_zero = |t: &PolyMatrix| {
            densela::numerical_rank(&t.coeffs()[0], Tolerance::default())
                .is_ok_and(|r| r.rank == t.rows())
        };
        if !invertible_at_zero(&m) || !invertible_at_zero(&n) {
            continue;
        }
        let p = m.mul(&diag)?.mul(&n)?;
        let r = ranksearch::estimate_normal_rank(&p, 5, Tolerance::default(), seed)?;
        if r == spec.normal_rank() {
            return Ok(Instance {
                matrix: p,
                indices,
                seed,
            });
        }
    }
    Err(Error::DegenerateDraw {
        attempts: MAX_ATTEMPTS,
    })
}

/// One line of an experiment table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    /// Power `i` (dynamic range) or degree parameter `k`.
    pub param: usize,
    pub degree: i64,
    pub norm_p: f64,
    pub res_rel: f64,
    pub norm_n: f64,
    pub indices: Vec<i64>,
    pub expected: Vec<i64>,
    pub indices_ok: bool,
}

fn row_seed(seed: u64, param: usize) -> u64 {
    seed.wrapping_mul(1_000_003).wrapping_add(param as u64)
}

fn run_row(spec: InstanceSpec, param: usize, opts: &DecomposeOptions) -> Result<TableRow> {
    let inst = gen_instance(&spec)?;
    let d = smithform::decompose(&inst.matrix, opts)?;
    Ok(TableRow {
        param,
        degree: inst.matrix.degree(),
        norm_p: d.diagnostics.norm_input,
        res_rel: d.diagnostics.res_rel,
        norm_n: d.diagnostics.norm_n,
        indices_ok: d.indices == inst.indices,
        indices: d.indices,
        expected: inst.indices,
    })
}

/// 4x5 matrices of normal rank 3 with indices (0, 1, 3), degree-2 transforms,
/// entries drawn as the `i`-th power of a standard normal, `i = 1..=10`.
pub fn run_table1(seed: u64, opts: &DecomposeOptions) -> Result<Vec<TableRow>> {
    (1..=10usize)
        .into_par_iter()
        .map(|i| {
            let spec = InstanceSpec {
                power: i as i32,
                seed: row_seed(seed, i),
                ..InstanceSpec::new(4, 5, vec![0, 1, 3], 2)
            };
            run_row(spec, i, opts)
        })
        .collect()
}

/// Indices (0, k+1, k+2) with degree-10 transforms, `k = 1..=10`.
pub fn run_table2(seed: u64, opts: &DecomposeOptions) -> Result<Vec<TableRow>> {
    (1..=10usize)
        .into_par_iter()
        .map(|k| {
            let spec = InstanceSpec {
                seed: row_seed(seed, k),
                ..InstanceSpec::new(4, 5, vec![0, k + 1, k + 2], 10)
            };
            run_row(spec, k, opts)
        })
        .collect()
}

/// Small random instance with an optional pole: sizes up to 6x6, planted
/// exponents up to 4, transform degree up to 3, then scaled by `λ^{-s}` with
/// `s <= 2`.
pub fn gen_small_random(seed: u64) -> Result<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = rng.random_range(1..=6);
    let cols = rng.random_range(1..=6);
    let r = rng.random_range(1..=rows.min(cols));
    let mut exponents: Vec<usize> = (0..r).map(|_| rng.random_range(0..=4)).collect();
    exponents.sort_unstable();
    let spec = InstanceSpec {
        seed: rng.random(),
        complex: rng.random_bool(0.5),
        ..InstanceSpec::new(rows, cols, exponents, rng.random_range(0..=3))
    };
    let s: i64 = rng.random_range(0..=2);
    let inst = gen_instance(&spec)?;
    Ok(Instance {
        matrix: inst.matrix.shift(-s),
        indices: inst.indices.iter().map(|e| e - s).collect(),
        seed: inst.seed,
    })
}

/// Aligned text in the layout `param  ‖P‖  ‖ResP‖/‖P‖  ‖N‖  indices`.
pub fn format_table(label: &str, rows: &[TableRow]) -> String {
    let mut out = format!(
        "{:>3}  {:>11}  {:>11}  {:>11}  {}\n",
        label, "|P|", "|ResP|/|P|", "|N|", "indices"
    );
    for row in rows {
        let idx: Vec<String> = row.indices.iter().map(|s| s.to_string()).collect();
        out.push_str(&format!(
            "{:>3}  {:>11.4e}  {:>11.4e}  {:>11.4e}  {}{}\n",
            row.param,
            row.norm_p,
            row.res_rel,
            row.norm_n,
            idx.join(" "),
            if row.indices_ok { "" } else { "  (MISMATCH)" }
        ));
    }
    out
}
