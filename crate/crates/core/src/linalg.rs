//! Dense vector primitives and orthogonal projection onto the span of a
//! group of vectors.
//!
//! Two routes to the projection are provided:
//!
//! - the basis route: [`orthonormalize`] the group once (modified
//!   Gram–Schmidt with re-orthogonalization, rank revealing), then
//!   [`project_onto_basis`]. Total: works for any group, including
//!   rank-deficient and all-zero ones.
//! - the Gram route: solve the normal equations `λ·(A·Aᵀ) = b·Aᵀ` with a
//!   pivoted LU factorization and form `p = λ·A` ([`project_via_gram`],
//!   [`GramFactorization`]). Only defined when the rows are linearly
//!   independent; fails with [`Error::SingularGram`] otherwise.
//!
//! The basis route is the one the rest of the crate uses. The Gram route
//! exists as an independent check.

use std::cell::Cell;
use std::ops::Deref;

use crate::error::{Error, Result};

/// Relative tolerance used for rank decisions when the caller has no
/// better value.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

thread_local! {
    static ORTHONORMALIZATIONS: Cell<u64> = const { Cell::new(0) };
}

/// Number of [`orthonormalize`] calls made so far on the current thread.
///
/// Used to check that projectors are built once and reused.
pub fn orthonormalizations_on_this_thread() -> u64 {
    ORTHONORMALIZATIONS.with(Cell::get)
}

/// A real vector of dimension ≥ 1 with finite components.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Empty("vector has no components"));
        }
        check_finite(&components)?;
        Ok(Vector(components))
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "vector dimension must be positive");
        Vector(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for Vector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Vector::new(v)
    }
}

/// An ordered, nonempty collection of equal-dimension vectors, stored row
/// major. Rows may be linearly dependent.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorGroup {
    dim: usize,
    data: Vec<f64>,
}

impl VectorGroup {
    pub fn from_rows<R: AsRef<[f64]>>(rows: impl IntoIterator<Item = R>) -> Result<Self> {
        let mut rows = rows.into_iter();
        let first = rows
            .next()
            .ok_or(Error::Empty("vector group has no rows"))?;
        let first = first.as_ref();
        if first.is_empty() {
            return Err(Error::Empty("vector has no components"));
        }
        let mut group = VectorGroup {
            dim: first.len(),
            data: Vec::new(),
        };
        group.push(first)?;
        for row in rows {
            group.push(row.as_ref())?;
        }
        Ok(group)
    }

    /// Builds a group from `data.len() / dim` rows laid out contiguously.
    pub fn from_flat(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Empty("vector has no components"));
        }
        if data.is_empty() {
            return Err(Error::Empty("vector group has no rows"));
        }
        if !data.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: data.len() % dim,
            });
        }
        check_finite(&data)?;
        Ok(VectorGroup { dim, data })
    }

    /// Appends a row.
    pub fn push(&mut self, row: &[f64]) -> Result<()> {
        check_dim(self.dim, row.len())?;
        check_finite(row)?;
        self.data.extend_from_slice(row);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of rows.
    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    /// Always false; groups are nonempty by construction.
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }
}

/// Orthonormal basis of the span of a [`VectorGroup`].
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalBasis {
    dim: usize,
    data: Vec<f64>,
    tolerance: f64,
}

impl OrthonormalBasis {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn vector(&self, k: usize) -> &[f64] {
        &self.data[k * self.dim..(k + 1) * self.dim]
    }

    pub fn vectors(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    /// Coordinates `b·q_k` of the projection of `b` in this basis.
    pub fn coefficients(&self, b: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, b.len())?;
        Ok(self.vectors().map(|q| dot_unchecked(b, q)).collect())
    }
}

fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual })
    }
}

fn check_finite(xs: &[f64]) -> Result<()> {
    match xs.iter().position(|x| !x.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

fn check_tolerance(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidTolerance(tol))
    }
}

#[inline]
pub(crate) fn dot_unchecked(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// `Σ uᵢ·vᵢ`.
pub fn dot(u: &[f64], v: &[f64]) -> Result<f64> {
    check_dim(u.len(), v.len())?;
    Ok(dot_unchecked(u, v))
}

/// Euclidean length.
pub fn norm(v: &[f64]) -> f64 {
    dot_unchecked(v, v).sqrt()
}

/// Cosine of the angle between two nonzero vectors, clamped to `[-1, 1]`.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    let uv = dot(u, v)?;
    let nu = norm(u);
    let nv = norm(v);
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok((uv / (nu * nv)).clamp(-1.0, 1.0))
}

/// Rank-revealing orthonormalization of the rows of `group`.
///
/// Modified Gram–Schmidt, two passes per row. A row is kept when its
/// residual after removing the current basis exceeds `tol` times its
/// original norm. Zero rows are never kept; an all-zero group gives an
/// empty basis.
pub fn orthonormalize(group: &VectorGroup, tol: f64) -> Result<OrthonormalBasis> {
    check_tolerance(tol)?;
    ORTHONORMALIZATIONS.with(|c| c.set(c.get() + 1));

    let dim = group.dim();
    let max_rank = group.len().min(dim);
    let mut basis: Vec<f64> = Vec::with_capacity(max_rank * dim);
    let mut w = vec![0.0; dim];

    for row in group.rows() {
        if basis.len() == max_rank * dim {
            break;
        }
        let original = norm(row);
        if original == 0.0 {
            continue;
        }
        w.copy_from_slice(row);
        for _pass in 0..2 {
            for q in basis.chunks_exact(dim) {
                let c = dot_unchecked(&w, q);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
        }
        let residual = norm(&w);
        if residual > tol * original {
            basis.extend(w.iter().map(|x| x / residual));
        }
    }

    Ok(OrthonormalBasis {
        dim,
        data: basis,
        tolerance: tol,
    })
}

/// `p = Σ (b·q_k) q_k`. An empty basis projects everything to zero.
pub fn project_onto_basis(b: &[f64], basis: &OrthonormalBasis) -> Result<Vector> {
    let coefficients = basis.coefficients(b)?;
    let mut p = vec![0.0; basis.dim()];
    for (c, q) in coefficients.iter().zip(basis.vectors()) {
        for (pi, qi) in p.iter_mut().zip(q) {
            *pi += c * qi;
        }
    }
    Ok(Vector(p))
}

/// Projection through the normal equations, `p = b·Aᵀ(A·Aᵀ)⁻¹·A`, with the
/// default tolerance.
pub fn project_via_gram(b: &[f64], group: &VectorGroup) -> Result<Vector> {
    GramFactorization::new(group, DEFAULT_TOLERANCE)?.project(b)
}

/// LU factorization (partial pivoting) of the Gram matrix `A·Aᵀ` of a group
/// with linearly independent rows.
///
/// Holds everything that depends only on the group, so repeated queries do
/// not refactor.
#[derive(Debug, Clone)]
pub struct GramFactorization {
    rows: VectorGroup,
    gram: Vec<f64>,
    lu: Vec<f64>,
    pivots: Vec<usize>,
    condition: f64,
}

impl GramFactorization {
    /// Fails with [`Error::SingularGram`] when a pivot vanishes or the
    /// 1-norm condition number of `A·Aᵀ` exceeds `1 / tol`.
    pub fn new(group: &VectorGroup, tol: f64) -> Result<Self> {
        check_tolerance(tol)?;
        let n = group.len();
        let mut gram = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let g = dot_unchecked(group.row(i), group.row(j));
                gram[i * n + j] = g;
                gram[j * n + i] = g;
            }
        }

        let mut lu = gram.clone();
        let mut pivots = vec![0usize; n];
        for k in 0..n {
            let (p, max) = (k..n)
                .map(|i| (i, lu[i * n + k].abs()))
                .fold(
                    (k, -1.0),
                    |best, cur| if cur.1 > best.1 { cur } else { best },
                );
            if max == 0.0 {
                return Err(Error::SingularGram {
                    condition: f64::INFINITY,
                });
            }
            pivots[k] = p;
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
            }
            let pivot = lu[k * n + k];
            for i in k + 1..n {
                let l = lu[i * n + k] / pivot;
                lu[i * n + k] = l;
                for j in k + 1..n {
                    lu[i * n + j] -= l * lu[k * n + j];
                }
            }
        }

        let mut fact = GramFactorization {
            rows: group.clone(),
            gram,
            lu,
            pivots,
            condition: 0.0,
        };
        fact.condition = fact.condition_1norm();
        if fact.condition.is_nan() || fact.condition > 1.0 / tol {
            return Err(Error::SingularGram {
                condition: fact.condition,
            });
        }
        Ok(fact)
    }

    /// `‖G‖₁·‖G⁻¹‖₁`, with the inverse formed column by column from the LU
    /// factors.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    fn condition_1norm(&self) -> f64 {
        let n = self.rows.len();
        let col_norm_max = |m: &dyn Fn(usize, usize) -> f64| {
            (0..n)
                .map(|j| (0..n).map(|i| m(i, j).abs()).sum::<f64>())
                .fold(0.0, f64::max)
        };
        let g_norm = col_norm_max(&|i, j| self.gram[i * n + j]);
        let mut inv_norm: f64 = 0.0;
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|x| *x = 0.0);
            e[j] = 1.0;
            let col = self.lu_solve(&e);
            let s: f64 = col.iter().map(|x| x.abs()).sum();
            if !s.is_finite() {
                return f64::INFINITY;
            }
            inv_norm = inv_norm.max(s);
        }
        g_norm * inv_norm
    }

    fn lu_solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.rows.len();
        let mut x = rhs.to_vec();
        for k in 0..n {
            x.swap(k, self.pivots[k]);
        }
        for i in 0..n {
            let s: f64 = (0..i).map(|j| self.lu[i * n + j] * x[j]).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| self.lu[i * n + j] * x[j]).sum();
            x[i] = (x[i] - s) / self.lu[i * n + i];
        }
        x
    }

    /// Solves `G·λ = rhs` with one step of iterative refinement.
    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.rows.len();
        let mut x = self.lu_solve(rhs);
        let residual: Vec<f64> = (0..n)
            .map(|i| rhs[i] - dot_unchecked(&self.gram[i * n..(i + 1) * n], &x))
            .collect();
        let dx = self.lu_solve(&residual);
        for (xi, di) in x.iter_mut().zip(dx) {
            *xi += di;
        }
        x
    }

    /// `b·Aᵀ`, the right-hand side of the normal equations.
    fn rhs(&self, b: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.rows.dim(), b.len())?;
        Ok(self.rows.rows().map(|a| dot_unchecked(b, a)).collect())
    }

    /// Coefficients `λ = b·Aᵀ(A·Aᵀ)⁻¹` of the projection in terms of the rows.
    pub fn coefficients(&self, b: &[f64]) -> Result<Vec<f64>> {
        let rhs = self.rhs(b)?;
        Ok(self.solve(&rhs))
    }

    /// `p = λ·A`.
    pub fn project(&self, b: &[f64]) -> Result<Vector> {
        let lambda = self.coefficients(b)?;
        let mut p = vec![0.0; self.rows.dim()];
        for (l, a) in lambda.iter().zip(self.rows.rows()) {
            for (pi, ai) in p.iter_mut().zip(a) {
                *pi += l * ai;
            }
        }
        Ok(Vector(p))
    }

    /// Squared projection length as the quadratic form `b·Aᵀ(A·Aᵀ)⁻¹·A·bᵀ`.
    pub fn projected_norm_squared(&self, b: &[f64]) -> Result<f64> {
        let rhs = self.rhs(b)?;
        let lambda = self.solve(&rhs);
        Ok(dot_unchecked(&lambda, &rhs).max(0.0))
    }

    pub fn rows(&self) -> &VectorGroup {
        &self.rows
    }
}
