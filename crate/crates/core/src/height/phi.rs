use crate::algebra::{Dims, ExtVectorL};
use crate::scalar::ExtendedReal;

/// The grade weight delta_k = (n+1-k) k.
pub fn delta_k(k: usize, n: usize) -> f64 {
    ((n + 1 - k) * k) as f64
}

/// Height of a nonzero grade-k vector from the ln sup-norms of its blocks:
/// 0 when the fixed part is at least eps^{delta_k}; otherwise
/// min_{1<=i<=d} eps^{((d+1)/(d+1-i)) delta_k} ||pi_i||^{-(d+1)/(d+1-i)},
/// where a vanishing pi_i contributes +inf (so the result is +inf exactly
/// when every middle block vanishes and the fixed part is small).
pub fn phi_from_lns(ln_by_i: &[f64], ln_fix: f64, k: usize, dims: Dims, eps: f64) -> ExtendedReal {
    let dk = delta_k(k, dims.n());
    let ln_eps = eps.ln();
    if ln_fix >= dk * ln_eps {
        return ExtendedReal::Zero;
    }
    let d = dims.d();
    let mut best = f64::INFINITY;
    for i in 1..=d {
        let ln_pi = if i < ln_by_i.len() {
            ln_by_i[i]
        } else {
            f64::NEG_INFINITY
        };
        if ln_pi == f64::NEG_INFINITY {
            continue;
        }
        let p = (d as f64 + 1.0) / (d as f64 + 1.0 - i as f64);
        let ln_val = p * (dk * ln_eps - ln_pi);
        best = best.min(ln_val);
    }
    ExtendedReal::from_ln(best)
}

/// Height of an evaluated exterior vector.
pub fn phi_eps(v: &ExtVectorL, dims: Dims, eps: f64) -> ExtendedReal {
    debug_assert!(!v.is_zero());
    let norms = v.proj_norms(dims);
    phi_from_lns(&norms.ln_by_i, norms.ln_fix, v.grade(), dims, eps)
}
