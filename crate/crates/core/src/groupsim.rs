//! Cosine of a vector against a group, and similarity of two groups.
//!
//! `cos(b, A) = |p| / |b|` where `p` is the orthogonal projection of `b` onto
//! span(A). A group-to-group cosine averages that over the rows of one group,
//! and [`sim_symmetric`] averages both directions:
//!
//! ```text
//! SIM(A, B) = ( mean_j cos(b_j, A) + mean_i cos(a_i, B) ) / 2
//! ```
//!
//! Each group is orthonormalized once into a [`Projector`]; after that every
//! query costs `O(rank · dim)`, so SIM over groups of `n` and `m` rows takes
//! exactly `n + m` vector-vs-group evaluations.

use std::cell::Cell;
use std::fmt;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::{self, GramFactorization, OrthonormalBasis, VectorGroup, DEFAULT_TOLERANCE};

thread_local! {
    static GROUP_COSINES: Cell<u64> = const { Cell::new(0) };
}

/// Number of vector-vs-group cosine evaluations made so far on the current
/// thread.
pub fn group_cosines_on_this_thread() -> u64 {
    GROUP_COSINES.with(Cell::get)
}

fn count_evaluation() {
    GROUP_COSINES.with(|c| c.set(c.get() + 1));
}

/// SHA-256 over the group's shape and its components rounded to 1e-12.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fingerprint([u8; 32]);

impl Fingerprint {
    pub fn of(group: &VectorGroup) -> Self {
        let mut hasher = Sha256::new();
        hasher.update((group.dim() as u64).to_le_bytes());
        hasher.update((group.len() as u64).to_le_bytes());
        for &x in group.as_flat() {
            let q = (x * 1e12).round() as i64;
            hasher.update(q.to_le_bytes());
        }
        Fingerprint(hasher.finalize().into())
    }

    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }
}

impl fmt::Display for Fingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|b| write!(f, "{b:02x}"))
    }
}

impl fmt::Debug for Fingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fingerprint({self})")
    }
}

/// Precomputed orthogonal projection onto the span of a group.
///
/// Immutable once built, so one projector can serve any number of threads.
#[derive(Debug, Clone)]
pub struct Projector {
    basis: OrthonormalBasis,
    fingerprint: Fingerprint,
}

impl Projector {
    pub fn basis(&self) -> &OrthonormalBasis {
        &self.basis
    }

    pub fn rank(&self) -> usize {
        self.basis.rank()
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// Fingerprint of the group the projector was built from.
    pub fn fingerprint(&self) -> Fingerprint {
        self.fingerprint
    }
}

/// Orthonormalizes `group` once.
pub fn build_projector(group: &VectorGroup, tol: f64) -> Result<Projector> {
    Ok(Projector {
        basis: linalg::orthonormalize(group, tol)?,
        fingerprint: Fingerprint::of(group),
    })
}

/// Anything that can report `cos(b, A)` for a fixed group `A`.
pub trait GroupCosine {
    fn dim(&self) -> usize;

    /// `|p| / |b|` in `[0, 1]`.
    fn cos_to_group(&self, b: &[f64]) -> Result<f64>;
}

impl GroupCosine for Projector {
    fn dim(&self) -> usize {
        self.basis.dim()
    }

    fn cos_to_group(&self, b: &[f64]) -> Result<f64> {
        let b_norm = checked_norm(b, self.basis.dim())?;
        count_evaluation();
        if self.basis.is_empty() {
            return Ok(0.0);
        }
        let coefficients = self.basis.coefficients(b)?;
        let p_norm = linalg::norm(&coefficients);
        Ok((p_norm / b_norm).clamp(0.0, 1.0))
    }
}

impl GroupCosine for GramFactorization {
    fn dim(&self) -> usize {
        self.rows().dim()
    }

    /// `sqrt(b·Aᵀ(A·Aᵀ)⁻¹·A·bᵀ) / |b|`.
    fn cos_to_group(&self, b: &[f64]) -> Result<f64> {
        let b_norm = checked_norm(b, self.rows().dim())?;
        count_evaluation();
        let p_sq = self.projected_norm_squared(b)?;
        Ok((p_sq.sqrt() / b_norm).clamp(0.0, 1.0))
    }
}

fn checked_norm(b: &[f64], dim: usize) -> Result<f64> {
    if b.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: b.len(),
        });
    }
    let n = linalg::norm(b);
    if n == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(n)
}

/// Cosine of `b` against the group behind `projector`. A rank-0 projector
/// (all-zero group) gives 0.
pub fn cos_to_group(b: &[f64], projector: &Projector) -> Result<f64> {
    projector.cos_to_group(b)
}

/// Mean over the rows `x` of `group` of `cos(x, other)`.
pub fn cos_group_to_group(group: &VectorGroup, other: &impl GroupCosine) -> Result<f64> {
    let sum = directional_sum(group, other)?;
    Ok((sum / group.len() as f64).clamp(0.0, 1.0))
}

fn directional_sum(group: &VectorGroup, other: &impl GroupCosine) -> Result<f64> {
    if group.dim() != other.dim() {
        return Err(Error::DimensionMismatch {
            expected: other.dim(),
            actual: group.dim(),
        });
    }
    let mut sum = 0.0;
    for row in group.rows() {
        sum += other.cos_to_group(row)?;
    }
    Ok(sum)
}

/// Which route computes `cos(b, A)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Variant {
    /// Orthonormal basis of span(A); total.
    #[default]
    Basis,
    /// Explicit Gram solve; fails on dependent rows.
    Gram,
}

/// How each direction of SIM combines its per-row cosines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Aggregation {
    /// Mean per direction; SIM stays in `[0, 1]`.
    #[default]
    Mean,
    /// Raw sums per direction, halved. Grows with group size.
    RawSum,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    pub tolerance: f64,
    pub variant: Variant,
    pub aggregation: Aggregation,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            tolerance: DEFAULT_TOLERANCE,
            variant: Variant::Basis,
            aggregation: Aggregation::Mean,
        }
    }
}

/// Result of [`sim_symmetric`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityValue {
    pub value: f64,
    /// Rows of B against span(A).
    pub b_to_a: f64,
    /// Rows of A against span(B).
    pub a_to_b: f64,
    /// Vector-vs-group cosine evaluations performed (`n + m`).
    pub evaluations: usize,
    /// Group factorizations performed (one per group).
    pub factorizations: usize,
}

/// Symmetrized group similarity with default options.
pub fn sim_symmetric(a: &VectorGroup, b: &VectorGroup) -> Result<SimilarityValue> {
    sim_symmetric_with(a, b, &SimOptions::default())
}

pub fn sim_symmetric_with(
    a: &VectorGroup,
    b: &VectorGroup,
    options: &SimOptions,
) -> Result<SimilarityValue> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            actual: b.dim(),
        });
    }
    reject_zero_rows(a)?;
    reject_zero_rows(b)?;

    // B→A first, then A→B; each in row order.
    let (sum_ba, sum_ab) = match options.variant {
        Variant::Basis => {
            let pa = build_projector(a, options.tolerance)?;
            let pb = build_projector(b, options.tolerance)?;
            (directional_sum(b, &pa)?, directional_sum(a, &pb)?)
        }
        Variant::Gram => {
            let ga = GramFactorization::new(a, options.tolerance)?;
            let gb = GramFactorization::new(b, options.tolerance)?;
            (directional_sum(b, &ga)?, directional_sum(a, &gb)?)
        }
    };

    let (b_to_a, a_to_b) = match options.aggregation {
        Aggregation::Mean => (
            (sum_ba / b.len() as f64).clamp(0.0, 1.0),
            (sum_ab / a.len() as f64).clamp(0.0, 1.0),
        ),
        Aggregation::RawSum => (sum_ba, sum_ab),
    };

    Ok(SimilarityValue {
        value: (b_to_a + a_to_b) / 2.0,
        b_to_a,
        a_to_b,
        evaluations: a.len() + b.len(),
        factorizations: 2,
    })
}

fn reject_zero_rows(group: &VectorGroup) -> Result<()> {
    if group.rows().any(|r| r.iter().all(|&x| x == 0.0)) {
        Err(Error::ZeroVector)
    } else {
        Ok(())
    }
}

/// Mean of all `n·m` pairwise cosines. Lies in `[-1, 1]`.
pub fn pairwise_mean_cosine(a: &VectorGroup, b: &VectorGroup) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            actual: b.dim(),
        });
    }
    let mut sum = 0.0;
    for x in a.rows() {
        for y in b.rows() {
            sum += linalg::cosine(x, y)?;
        }
    }
    Ok((sum / (a.len() * b.len()) as f64).clamp(-1.0, 1.0))
}
