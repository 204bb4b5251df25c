
use crate::error::Result;
use crate::scalar::Coeff;

use super::ext_vector::ExtVector;
use super::multi_index::MultiIndex;

/// Evaluates all Grassmann-Plucker relations for a grade-k vector:
/// sum_{l=1}^{k+1} (-1)^l C_{I j_l} C_{J \ j_l} over every ordered pair
/// (I, J) with |I| = k-1, |J| = k+1. Returns the relations that fail
/// (empty means exactly decomposable).
pub fn plucker_residuals<C: Coeff>(v: &ExtVector<C>) -> Result<Vec<(MultiIndex, MultiIndex, C)>> {
    let dim = v.dim();
    let k = v.grade();
    let mut failures = Vec::new();
    if k <= 1 || k >= dim {
        return Ok(failures);
    }
    let is = MultiIndex::all(dim, k - 1);
    let js = MultiIndex::all(dim, k + 1);
    for &i_idx in &is {
        for &j_idx in &js {
            let mut acc = C::zero();
            for jl in j_idx.indices() {
                // rem_sign is (-1)^{l-1}, the alternation of the relation.
                let (j_rest, rem_sign) = j_idx.remove(jl);
                // C_{I j_l}: wedge j_l onto I; zero if already present.
                let Some((i_ext, ins_sign)) = i_idx.wedge_with(jl) else {
                    continue;
                };
                let (Some(a), Some(b)) = (v.get(i_ext), v.get(j_rest)) else {
                    continue;
                };
                let mut term = a.clone() * b.clone();
                if ins_sign * rem_sign < 0 {
                    term = term.neg();
                }
                acc = acc + term;
            }
            if !acc.is_zero() {
                failures.push((i_idx, j_idx, acc));
            }
        }
    }
    Ok(failures)
}

/// True iff every Plucker relation vanishes, i.e. the vector is decomposable
/// (or zero). Exact over rationals; over floats this is exact-zero equality,
/// so use it only on exactly-representable inputs.
pub fn is_decomposable<C: Coeff>(v: &ExtVector<C>) -> Result<bool> {
    Ok(plucker_residuals(v)?.is_empty())
}
