use std::collections::BTreeMap;

use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::scalar::{Coeff, LogCoeff, Rat};

use super::dims::Dims;
use super::multi_index::MultiIndex;

/// An element of the k-th exterior power of R^{dim}, sparse over the
/// lexicographically ordered multi-index basis. The norm is the sup-norm of
/// the coefficients throughout.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtVector<C> {
    dim: usize,
    k: usize,
    coeffs: BTreeMap<MultiIndex, C>,
}

pub type ExtVectorQ = ExtVector<Rat>;
pub type ExtVectorF = ExtVector<f64>;
pub type ExtVectorL = ExtVector<LogCoeff>;

impl<C: Coeff> ExtVector<C> {
    pub fn zero(dim: usize, k: usize) -> Self {
        ExtVector {
            dim,
            k,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn basis(dim: usize, indices: &[usize]) -> Self {
        let mut v = Self::zero(dim, indices.len());
        v.coeffs.insert(MultiIndex::from_indices(indices), unit::<C>());
        v
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn grade(&self) -> usize {
        self.k
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn get(&self, idx: MultiIndex) -> Option<&C> {
        self.coeffs.get(&idx)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, &C)> {
        self.coeffs.iter()
    }

    pub fn set(&mut self, idx: MultiIndex, c: C) {
        debug_assert_eq!(idx.len(), self.k);
        if c.is_zero() {
            self.coeffs.remove(&idx);
        } else {
            self.coeffs.insert(idx, c);
        }
    }

    pub fn neg(&self) -> Self {
        ExtVector {
            dim: self.dim,
            k: self.k,
            coeffs: self.coeffs.iter().map(|(j, c)| (*j, c.neg())).collect(),
        }
    }

    /// ln of the sup-norm (-inf for the zero vector).
    pub fn sup_norm_ln(&self) -> f64 {
        self.coeffs
            .values()
            .map(|c| c.ln_abs())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Keeps exactly the coefficients whose multi-index has `i` entries in
    /// coordinates 0..=d.
    pub fn project_block(&self, dims: Dims, i: usize) -> Result<Self> {
        let (lo, hi) = dims.block_range(self.k);
        if i < lo || i > hi {
            return Err(Error::BadProjection { i, lo, hi });
        }
        Ok(self.filter(|j| j.count_in(dims.perp_mask()) == i))
    }

    /// Projection onto the fixed block: the i=0 and i=d+1 components.
    pub fn project_fix(&self, dims: Dims) -> Self {
        let mask = dims.perp_mask();
        let d = dims.d();
        self.filter(|j| {
            let c = j.count_in(mask);
            c == 0 || c == d + 1
        })
    }

    /// Splits a vector supported inside coordinates 0..=d into the components
    /// whose multi-index contains 0 (plus) and does not (minus).
    pub fn project_pm(&self, dims: Dims) -> Result<(Self, Self)> {
        let mask = dims.perp_mask();
        if self.coeffs.keys().any(|j| j.mask() & !mask != 0) {
            return Err(Error::BadSupport);
        }
        Ok((self.filter(|j| j.contains(0)), self.filter(|j| !j.contains(0))))
    }

    fn filter(&self, keep: impl Fn(&MultiIndex) -> bool) -> Self {
        ExtVector {
            dim: self.dim,
            k: self.k,
            coeffs: self
                .coeffs
                .iter()
                .filter(|(j, _)| keep(j))
                .map(|(j, c)| (*j, c.clone()))
                .collect(),
        }
    }

    /// ln of the sup-norm of each block projection, plus the fixed part.
    pub fn proj_norms(&self, dims: Dims) -> ProjNorms {
        let mask = dims.perp_mask();
        let d = dims.d();
        let mut by_i = vec![f64::NEG_INFINITY; d + 2];
        for (j, c) in &self.coeffs {
            let i = j.count_in(mask);
            by_i[i] = by_i[i].max(c.ln_abs());
        }
        let ln_fix = by_i[0].max(if self.k >= d + 1 { by_i[d + 1] } else { f64::NEG_INFINITY });
        ProjNorms { ln_by_i: by_i, ln_fix }
    }

    /// Rescales each basis coefficient in the log domain by `dln(J)`.
    pub fn scale_indexed_ln(&self, dln: impl Fn(MultiIndex) -> f64) -> ExtVector<LogCoeff>
    where
        C: IntoLog,
    {
        ExtVector {
            dim: self.dim,
            k: self.k,
            coeffs: self
                .coeffs
                .iter()
                .map(|(j, c)| (*j, c.to_log().scaled(dln(*j))))
                .collect(),
        }
    }
}

/// ln sup-norms of the block projections of a vector; all height-function
/// evaluation flows through this summary.
#[derive(Debug, Clone)]
pub struct ProjNorms {
    /// Indexed by the number of entries of the multi-index in 0..=d.
    pub ln_by_i: Vec<f64>,
    pub ln_fix: f64,
}

impl ProjNorms {
    pub fn ln_sup(&self) -> f64 {
        self.ln_by_i.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

fn unit<C: Coeff>() -> C {
    C::one()
}

impl<C: Coeff> ExtVector<C> {
    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!((self.dim, self.k), (other.dim, other.k));
        let mut out = self.clone();
        for (j, c) in &other.coeffs {
            let merged = match out.coeffs.remove(j) {
                Some(existing) => existing + c.clone(),
                None => c.clone(),
            };
            if !merged.is_zero() {
                out.coeffs.insert(*j, merged);
            }
        }
        out
    }

    pub fn scale(&self, factor: C) -> Self {
        if factor.is_zero() {
            return Self::zero(self.dim, self.k);
        }
        ExtVector {
            dim: self.dim,
            k: self.k,
            coeffs: self
                .coeffs
                .iter()
                .map(|(j, c)| (*j, c.clone() * factor.clone()))
                .collect(),
        }
    }

    /// Wedge with a grade-1 vector given by its coordinates.
    pub fn wedge_vec(&self, v: &[C]) -> Self {
        debug_assert_eq!(v.len(), self.dim);
        let mut out = Self::zero(self.dim, self.k + 1);
        for (j, c) in &self.coeffs {
            for (i, a) in v.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                if let Some((merged, sign)) = j.wedge_with(i) {
                    let mut term = c.clone() * a.clone();
                    if sign < 0 {
                        term = term.neg();
                    }
                    let acc = match out.coeffs.remove(&merged) {
                        Some(existing) => existing + term,
                        None => term,
                    };
                    if !acc.is_zero() {
                        out.coeffs.insert(merged, acc);
                    }
                }
            }
        }
        out
    }
}

/// Multilinear alternating expansion of v_1 /\ ... /\ v_k; zero iff the
/// vectors are linearly dependent.
pub fn wedge<C: Coeff>(dim: usize, vectors: &[Vec<C>]) -> Result<ExtVector<C>> {
    let k = vectors.len();
    if k == 0 || k > dim {
        return Err(Error::BadGrade { k, dim });
    }
    if vectors.iter().any(|v| v.len() != dim) {
        return Err(Error::ShapeMismatch {
            expected: format!("{dim}"),
            got: "vector length".into(),
        });
    }
    let mut acc = ExtVector::<C> {
        dim,
        k: 0,
        coeffs: BTreeMap::from([(MultiIndex::EMPTY, C::one())]),
    };
    for v in vectors {
        acc = acc.wedge_vec(v);
    }
    Ok(acc)
}

/// Induced action of a square matrix on the k-th exterior power:
/// Lambda^k(m) e_J = (column j_1 of m) /\ ... /\ (column j_k of m).
pub fn act_mat<C: Coeff>(m: &[Vec<C>], v: &ExtVector<C>) -> Result<ExtVector<C>> {
    let dim = v.dim();
    if m.len() != dim || m.iter().any(|r| r.len() != dim) {
        return Err(Error::ShapeMismatch {
            expected: format!("{dim}x{dim}"),
            got: "matrix".into(),
        });
    }
    let mut out = ExtVector::zero(dim, v.grade());
    for (j, c) in v.iter() {
        let cols: Vec<Vec<C>> = j.indices().map(|col| (0..dim).map(|r| m[r][col].clone()).collect()).collect();
        let image = wedge(dim, &cols)?;
        out = out.add(&image.scale(c.clone()));
    }
    Ok(out)
}

/// One-way conversion into the signed log-magnitude backend.
pub trait IntoLog {
    fn to_log(&self) -> LogCoeff;
}

impl IntoLog for Rat {
    fn to_log(&self) -> LogCoeff {
        LogCoeff::from_rat(self)
    }
}

impl IntoLog for f64 {
    fn to_log(&self) -> LogCoeff {
        LogCoeff::from_f64(*self)
    }
}

impl IntoLog for LogCoeff {
    fn to_log(&self) -> LogCoeff {
        *self
    }
}

impl ExtVector<Rat> {
    pub fn to_log(&self) -> ExtVectorL {
        self.scale_indexed_ln(|_| 0.0)
    }

    pub fn to_f64(&self) -> ExtVectorF {
        let mut out = ExtVector::zero(self.dim, self.k);
        for (j, c) in self.iter() {
            out.set(*j, c.to_f64().unwrap_or(f64::NAN));
        }
        out
    }
}
