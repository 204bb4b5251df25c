use itertools::Itertools;

use crate::algebra::{wedge, Dims, MultiIndex};
use crate::error::Result;
use crate::lattice::{enumerate_lattice_sup_ball, LatticePoint, ShortVector};
use num_traits::ToPrimitive;

use crate::scalar::{Budget, ExtendedReal, Rat};

use super::phi::{delta_k, phi_eps, phi_from_lns};
use super::HeightParams;

/// The maximizer behind an alpha value: k integer generator vectors (in the
/// standard basis of Z^{n+1}) whose evaluated wedge attains the max.
#[derive(Debug, Clone)]
pub struct Witness {
    pub k: usize,
    pub generators: Vec<Vec<Rat>>,
    pub phi: ExtendedReal,
}

#[derive(Debug, Clone)]
pub struct AlphaResult {
    /// max over y-integral decomposables of phi_eps(v)^theta.
    pub value: ExtendedReal,
    pub witness: Option<Witness>,
    /// Upper bound on phi^theta over every decomposable excluded by the
    /// enumeration cutoff.
    pub excluded_bound: f64,
}

/// ln of the phi^theta bound for vectors with some block norm above R.
fn excluded_bound_ln(dims: Dims, params: &HeightParams) -> f64 {
    let ln_eps = params.epsilon.ln();
    let ln_r = params.cutoff_r.ln();
    let d = dims.d() as f64;
    let mut best = f64::NEG_INFINITY;
    for k in 1..=dims.n() {
        let dk = delta_k(k, dims.n());
        for i in 1..=dims.d() {
            let p = (d + 1.0) / (d + 1.0 - i as f64);
            best = best.max(params.theta * p * (dk * ln_eps - ln_r));
        }
    }
    best
}

/// k x k minor of the mantissa columns at the rows of `j`.
fn minor_det(mants: &[Vec<f64>], combo: &[usize], j: MultiIndex) -> f64 {
    let rows: Vec<usize> = j.indices().collect();
    let k = rows.len();
    let mut m: Vec<f64> = Vec::with_capacity(k * k);
    for &r in &rows {
        for &c in combo {
            m.push(mants[c][r]);
        }
    }
    let mut det = 1.0;
    for col in 0..k {
        let (pivot, pval) = (col..k)
            .map(|r| (r, m[r * k + col].abs()))
            .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap();
        if pval == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for cc in 0..k {
                m.swap(pivot * k + cc, col * k + cc);
            }
            det = -det;
        }
        let piv = m[col * k + col];
        det *= piv;
        for r in col + 1..k {
            let f = m[r * k + col] / piv;
            for cc in col..k {
                m[r * k + cc] -= f * m[col * k + cc];
            }
        }
    }
    det
}

/// Exact height of the wedge of integer generators, used when floating minors
/// sit below the noise floor and "tiny" cannot be told from "zero".
fn exact_phi(
    y: &LatticePoint,
    generators: &[Vec<Rat>],
    dims: Dims,
    eps: f64,
) -> Result<Option<ExtendedReal>> {
    let v = wedge(dims.ambient(), generators)?;
    if v.is_zero() {
        return Ok(None);
    }
    let moved = y.evaluated().act_exterior(&v)?;
    Ok(Some(phi_eps(&moved, dims, eps)))
}

/// max_{v} phi_eps(v)^theta over nonzero y-integral decomposables, scanned in
/// floating point over wedges of the short vectors of y (out to twice the
/// cutoff), with exact rational rechecks near the noise floor. +infinity
/// propagates; the witness is the maximizing generator set.
pub fn alpha(y: &LatticePoint, params: &HeightParams, budget: &mut Budget) -> Result<AlphaResult> {
    let dims = y.dims();
    let ev = y.evaluated();
    let m = dims.ambient();
    let ln_eps = params.epsilon.ln();
    let vector_radius = 2.0 * params.cutoff_r.max(1.0);
    // Primitive generators suffice: a wedge of generators m_1 w_1, ..,
    // m_k w_k scales every block of the primitive wedge by the same integer
    // m_1 .. m_k >= 1, which can only lower phi (and preserves both the
    // zero branch and the infinite branch).
    let shorts: Vec<ShortVector> = enumerate_lattice_sup_ball(ev, vector_radius, budget)?;
    // Exact mantissas from the enumeration: converting U w to f64 only after
    // the exact product avoids catastrophic cancellation for relation-like
    // vectors with huge integer coordinates.
    let mants: Vec<Vec<f64>> = shorts
        .iter()
        .map(|sv| {
            sv.mantissa
                .iter()
                .map(|x| x.to_f64().unwrap_or(f64::NAN))
                .collect()
        })
        .collect();

    let excluded = excluded_bound_ln(dims, params).exp();
    let mut best_ln = f64::NEG_INFINITY;
    let mut best: Option<Witness> = None;
    for k in 1..=dims.n() {
        let all_j = MultiIndex::all(m, k);
        let meta: Vec<(usize, f64)> = all_j
            .iter()
            .map(|j| {
                (
                    j.count_in(dims.perp_mask()),
                    j.indices().map(|i| ev.sigma[i]).sum(),
                )
            })
            .collect();
        let dk = delta_k(k, dims.n());
        for combo in (0..shorts.len()).combinations(k) {
            budget.charge(1)?;
            let mut scale = 0.0f64;
            for &c in &combo {
                for v in &mants[c] {
                    scale = scale.max(v.abs());
                }
            }
            if scale == 0.0 {
                continue;
            }
            // Relative noise floor of a k x k floating minor.
            let ln_noise = k as f64 * scale.ln() - 26.0;
            let mut ln_by_i = vec![f64::NEG_INFINITY; dims.d() + 2];
            let mut any_nonzero = false;
            let mut near_noise = false;
            for (jpos, j) in all_j.iter().enumerate() {
                let det = minor_det(&mants, &combo, *j);
                let (icount, sj) = meta[jpos];
                if det == 0.0 {
                    continue;
                }
                let ln_det = det.abs().ln();
                if ln_det < ln_noise {
                    near_noise = true;
                }
                any_nonzero = true;
                ln_by_i[icount] = ln_by_i[icount].max(ln_det + sj);
            }
            if !any_nonzero {
                continue;
            }
            let ln_fix = ln_by_i[0].max(if k >= dims.d() + 1 {
                ln_by_i[dims.d() + 1]
            } else {
                f64::NEG_INFINITY
            });
            let phi = if near_noise && ln_fix < dk * ln_eps {
                // The zero-vs-tiny distinction matters here; settle it exactly.
                let gens: Vec<Vec<Rat>> = combo
                    .iter()
                    .map(|&c| shorts[c].coords_rat())
                    .collect();
                match exact_phi(y, &gens, dims, params.epsilon)? {
                    Some(p) => p,
                    None => continue,
                }
            } else {
                phi_from_lns(&ln_by_i, ln_fix, k, dims, params.epsilon)
            };
            if phi.is_infinite() {
                return Ok(AlphaResult {
                    value: ExtendedReal::Infinite,
                    witness: Some(Witness {
                        k,
                        generators: combo.iter().map(|&c| shorts[c].coords_rat()).collect(),
                        phi,
                    }),
                    excluded_bound: excluded,
                });
            }
            let ln_pow = params.theta * phi.ln_value();
            if ln_pow > best_ln {
                best_ln = ln_pow;
                best = Some(Witness {
                    k,
                    generators: combo.iter().map(|&c| shorts[c].coords_rat()).collect(),
                    phi,
                });
            }
        }
    }
    Ok(AlphaResult {
        value: ExtendedReal::from_ln(best_ln),
        witness: best,
        excluded_bound: excluded,
    })
}
