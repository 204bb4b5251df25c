use std::collections::BTreeMap;

use itertools::Itertools;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::algebra::{is_decomposable, wedge, ExtVectorL, ExtVectorQ};
use crate::error::{Error, Result};
use crate::scalar::{Budget, Rat};

use super::enumerate::enumerate_short_vectors;
use super::word::LatticePoint;

/// A normalized integral decomposable vector: the wedge of k independent
/// integer vectors with content divided out and the leading (lexicographically
/// first) coefficient positive.
#[derive(Debug, Clone)]
pub struct IntegralDecomposable {
    pub k: usize,
    pub generators: Vec<Vec<Rat>>,
    pub v: ExtVectorQ,
}

impl IntegralDecomposable {
    pub fn new(generators: Vec<Vec<Rat>>, dim: usize) -> Result<Self> {
        let k = generators.len();
        let raw = wedge(dim, &generators)?;
        if raw.is_zero() {
            return Err(Error::Invalid("dependent generators".into()));
        }
        debug_assert!(is_decomposable(&raw).unwrap_or(false));
        Ok(IntegralDecomposable {
            k,
            generators,
            v: normalize(&raw),
        })
    }

    /// Image of v under the lattice presentation g (log backend).
    pub fn evaluated(&self, y: &LatticePoint) -> Result<ExtVectorL> {
        y.evaluated().act_exterior(&self.v)
    }

    /// Dedup key: the sparse coefficient list of the normalized wedge.
    pub fn key(&self) -> Vec<(u32, Rat)> {
        self.v.iter().map(|(j, c)| (j.mask(), c.clone())).collect()
    }
}

/// Content-and-sign normalization of an integer-coefficient wedge.
fn normalize(v: &ExtVectorQ) -> ExtVectorQ {
    let mut content = BigInt::zero();
    for (_, c) in v.iter() {
        debug_assert!(c.is_integer());
        content = content.gcd(&c.numer().clone());
    }
    if content.is_zero() {
        return v.clone();
    }
    let mut divided = ExtVectorQ::zero(v.dim(), v.grade());
    for (j, c) in v.iter() {
        divided.set(*j, c / Rat::from(content.clone()));
    }
    let leading_negative = divided
        .iter()
        .next()
        .map(|(_, c)| c.is_negative())
        .unwrap_or(false);
    if leading_negative {
        divided.neg()
    } else {
        divided
    }
}

/// All normalized y-integral decomposables of grade k whose evaluated image
/// has sup-norm at most `cutoff`, realized by wedging k-subsets of the short
/// vectors of y (searched out to twice the cutoff) and deduplicating.
pub fn enumerate_decomposables(
    y: &LatticePoint,
    k: usize,
    cutoff: f64,
    budget: &mut Budget,
) -> Result<Vec<IntegralDecomposable>> {
    let dims = y.dims();
    if k < 1 || k > dims.n() {
        return Err(Error::BadGrade { k, dim: dims.n() });
    }
    let vector_radius = 2.0 * cutoff.max(1.0);
    let shorts = enumerate_short_vectors(y, vector_radius, budget)?;
    let ln_cut = cutoff.ln() + 1e-9;
    let mut seen: BTreeMap<Vec<(u32, Rat)>, IntegralDecomposable> = BTreeMap::new();
    for subset in shorts.iter().combinations(k) {
        budget.charge(1)?;
        let gens: Vec<Vec<Rat>> = subset.into_iter().cloned().collect();
        let Ok(dec) = IntegralDecomposable::new(gens, dims.ambient()) else {
            continue;
        };
        if dec.evaluated(y)?.sup_norm_ln() > ln_cut {
            continue;
        }
        seen.entry(dec.key()).or_insert(dec);
    }
    Ok(seen.into_values().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{Dims, MultiIndex};
    use crate::scalar::rat_i;

    fn standard(n: usize, d: usize) -> LatticePoint {
        LatticePoint::standard(Dims::new(n, d).unwrap())
    }

    #[test]
    fn grade_one_unit_cutoff_is_primitive_short_vectors() {
        let y = standard(2, 1);
        let mut budget = Budget::default();
        let found = enumerate_decomposables(&y, 1, 1.0, &mut budget).unwrap();
        // primitive {−1,0,1}-vectors up to sign: 13 total, all primitive.
        assert_eq!(found.len(), 13);
        for dec in &found {
            assert!(is_decomposable(&dec.v).unwrap());
            assert!(dec.evaluated(&y).unwrap().sup_norm_ln() <= 1e-12);
        }
        // e_0 present, sign-canonical.
        assert!(found
            .iter()
            .any(|d| d.v == ExtVectorQ::basis(3, &[0])));
    }

    #[test]
    fn grade_two_unit_cutoff_matches_exhaustive_oracle() {
        let y = standard(2, 1);
        let mut budget = Budget::default();
        let found = enumerate_decomposables(&y, 2, 1.0, &mut budget).unwrap();
        // Oracle: all wedges of pairs from the cube of radius 3, normalized,
        // with norm <= 1.
        let mut oracle: BTreeMap<Vec<(u32, Rat)>, ()> = BTreeMap::new();
        let range = -3i64..=3;
        let mut cube = Vec::new();
        for a in range.clone() {
            for b in range.clone() {
                for c in range.clone() {
                    if (a, b, c) != (0, 0, 0) {
                        cube.push(vec![rat_i(a), rat_i(b), rat_i(c)]);
                    }
                }
            }
        }
        for pair in cube.iter().combinations(2) {
            if let Ok(dec) =
                IntegralDecomposable::new(pair.into_iter().cloned().collect(), 3)
            {
                if dec.v.sup_norm_ln() <= 1e-12 {
                    oracle.insert(dec.key(), ());
                }
            }
        }
        let found_keys: Vec<_> = found.iter().map(|d| d.key()).collect();
        assert_eq!(found_keys.len(), oracle.len());
        for k in oracle.keys() {
            assert!(found_keys.contains(k));
        }
        // the three coordinate bivectors are among them.
        for idx in [[0, 1], [0, 2], [1, 2]] {
            let b = ExtVectorQ::basis(3, &idx);
            assert!(found.iter().any(|d| d.v == b));
        }
    }

    #[test]
    fn small_cutoff_is_empty() {
        let y = standard(2, 1);
        let mut budget = Budget::default();
        let found = enumerate_decomposables(&y, 2, 0.5, &mut budget).unwrap();
        assert!(found.is_empty());
    }

    #[test]
    fn monotone_in_cutoff() {
        let y = standard(2, 1);
        let mut budget = Budget::default();
        let small = enumerate_decomposables(&y, 2, 1.0, &mut budget).unwrap();
        let large = enumerate_decomposables(&y, 2, 2.0, &mut budget).unwrap();
        assert!(large.len() >= small.len());
        let large_keys: Vec<_> = large.iter().map(|d| d.key()).collect();
        for d in &small {
            assert!(large_keys.contains(&d.key()));
        }
    }

    #[test]
    fn normalization_is_canonical() {
        // Two generator sets spanning the same plane give the same wedge.
        let a = IntegralDecomposable::new(
            vec![
                vec![rat_i(1), rat_i(0), rat_i(1)],
                vec![rat_i(0), rat_i(1), rat_i(1)],
            ],
            3,
        )
        .unwrap();
        let b = IntegralDecomposable::new(
            vec![
                vec![rat_i(1), rat_i(1), rat_i(2)],
                vec![rat_i(-1), rat_i(1), rat_i(0)],
            ],
            3,
        )
        .unwrap();
        assert_eq!(a.v, b.v);
        // doubled generators normalize back to the primitive wedge.
        let c = IntegralDecomposable::new(
            vec![
                vec![rat_i(2), rat_i(0), rat_i(2)],
                vec![rat_i(0), rat_i(1), rat_i(1)],
            ],
            3,
        )
        .unwrap();
        assert_eq!(a.v, c.v);
        // leading coefficient is positive.
        let first = a.v.iter().next().unwrap();
        assert!(!first.1.is_negative());
        let _ = MultiIndex::EMPTY;
    }
}
