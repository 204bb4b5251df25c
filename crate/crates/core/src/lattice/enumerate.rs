use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::scalar::{rat_i, Budget, Rat};

use super::word::{Evaluated, LatticePoint};

/// Comparison slack for membership at the ball boundary: flow times are
/// floats, so boundary cases are admitted rather than dropped.
const LN_TOL: f64 = 1e-9;

/// Gram-Schmidt data of a column basis: orthogonal vectors and mu
/// coefficients.
fn gram_schmidt(cols: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let k = cols.len();
    let mut bstar: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut mu = vec![vec![0.0; k]; k];
    for i in 0..k {
        let mut v = cols[i].clone();
        for j in 0..i {
            let denom = dot(&bstar[j], &bstar[j]);
            let m = if denom > 0.0 {
                dot(&cols[i], &bstar[j]) / denom
            } else {
                0.0
            };
            mu[i][j] = m;
            for (vc, bc) in v.iter_mut().zip(&bstar[j]) {
                *vc -= m * bc;
            }
        }
        bstar.push(v);
    }
    (bstar, mu)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Floating-point LLL (delta = 0.99) on columns, tracking the integer change
/// of basis: returns T with reduced = original * T.
fn lll_reduce(cols: &mut Vec<Vec<f64>>, max_rounds: usize) -> Vec<Vec<i128>> {
    let k = cols.len();
    let mut t: Vec<Vec<i128>> = (0..k)
        .map(|j| (0..k).map(|i| i128::from(i == j)).collect())
        .collect();
    if k <= 1 {
        return t;
    }
    let delta = 0.99;
    let mut idx = 1;
    let mut rounds = 0;
    while idx < k && rounds < max_rounds {
        rounds += 1;
        let (bstar, mu) = gram_schmidt(cols);
        // Size-reduce column idx.
        for j in (0..idx).rev() {
            let m = mu[idx][j].round();
            if m != 0.0 && m.abs() < 9e18 {
                let mi = m as i128;
                let mut updated: Vec<i128> = Vec::with_capacity(k);
                for r in 0..k {
                    match mi
                        .checked_mul(t[j][r])
                        .and_then(|p| t[idx][r].checked_sub(p))
                    {
                        Some(v) => updated.push(v),
                        // The in-pass transform would overflow i128: stop the
                        // pass; callers that iterate (refined_basis) fold the
                        // partial transform exactly and run another pass.
                        // Overflow needs accumulated entries ~1e19, so the
                        // pass has already made progress and iteration
                        // cannot stall.
                        None => return t,
                    }
                }
                for r in 0..cols[idx].len() {
                    let sub = m * cols[j][r];
                    cols[idx][r] -= sub;
                }
                t[idx] = updated;
            }
        }
        let (bstar2, mu2) = (gram_schmidt(cols).0, gram_schmidt(cols).1);
        let lhs = dot(&bstar2[idx], &bstar2[idx]);
        let rhs = (delta - mu2[idx][idx - 1] * mu2[idx][idx - 1]) * dot(&bstar[idx - 1], &bstar[idx - 1]);
        if lhs >= rhs {
            idx += 1;
        } else {
            cols.swap(idx, idx - 1);
            t.swap(idx, idx - 1);
            idx = idx.max(2) - 1;
        }
    }
    t
}

fn gcd_slice(x: &[i64]) -> i64 {
    x.iter().fold(0i64, |g, &c| num_integer::gcd(g, c.abs()))
}

/// All *primitive* nonzero coefficient vectors x (up to global sign) with
/// ||cols * x||_2 <= radius, by Fincke-Pohst over the Gram-Schmidt cone.
/// Restricting to gcd-1 vectors keeps deep-cusp lattices tractable: a ball
/// many times wider than the first minimum contains long arithmetic
/// progressions of multiples, and the leaf level prunes those progressions
/// to +-1 instead of walking them.
fn enumerate_l2(cols: &[Vec<f64>], radius: f64, budget: &mut Budget) -> Result<Vec<Vec<i64>>> {
    let k = cols.len();
    let (bstar, mu) = gram_schmidt(cols);
    let norms2: Vec<f64> = bstar.iter().map(|b| dot(b, b)).collect();
    let r2 = radius * radius * (1.0 + 1e-12);
    let mut out = Vec::new();
    let mut x = vec![0i64; k];
    // centers[j] = sum_{i>j} mu[i][j] x[i]
    fn rec(
        j: usize,
        rem: f64,
        x: &mut Vec<i64>,
        norms2: &[f64],
        mu: &[Vec<f64>],
        out: &mut Vec<Vec<i64>>,
        budget: &mut Budget,
        nonzero_seen: bool,
    ) -> Result<()> {
        budget.charge(1)?;
        let k = x.len();
        if norms2[j] <= 0.0 {
            // Degenerate direction: only x_j = 0 stays in any finite ball.
            x[j] = 0;
            if j == 0 {
                if nonzero_seen {
                    out.push(x.clone());
                }
                return Ok(());
            }
            return rec(j - 1, rem, x, norms2, mu, out, budget, nonzero_seen);
        }
        let center: f64 = (j + 1..k).map(|i| mu[i][j] * x[i] as f64).sum();
        let half_width = (rem / norms2[j]).sqrt();
        let mut lo = (-center - half_width).ceil() as i64;
        let mut hi = (-center + half_width).floor() as i64;
        // Up to sign: when no nonzero coordinate has been fixed yet, only the
        // nonnegative side is scanned, and at the leaf only +-1 can still be
        // primitive.
        if !nonzero_seen {
            lo = lo.max(0);
            if j == 0 {
                hi = hi.min(1);
            }
        }
        for v in lo..=hi {
            x[j] = v;
            let term = (v as f64 + center) * (v as f64 + center) * norms2[j];
            if term > rem * (1.0 + 1e-12) + 1e-300 {
                continue;
            }
            let nz = nonzero_seen || v != 0;
            if j == 0 {
                if nz && gcd_slice(x) == 1 {
                    budget.charge(1)?;
                    if out.len() >= 20_000_000 {
                        // Defensive cap: an ill-conditioned basis must fail
                        // loudly rather than exhaust memory.
                        return Err(Error::Invalid(
                            "short-vector enumeration exploded; basis too ill-conditioned".into(),
                        ));
                    }
                    out.push(x.clone());
                }
            } else {
                rec(j - 1, rem - term, x, norms2, mu, out, budget, nz)?;
            }
        }
        x[j] = 0;
        Ok(())
    }
    if k > 0 {
        rec(k - 1, r2, &mut x, &norms2, &mu, &mut out, budget, false)?;
    }
    Ok(out)
}

/// All primitive nonzero integer coefficient vectors (up to sign) whose image
/// under the column basis lies in the closed sup-norm ball. The l2 search
/// radius is sqrt(m) times the sup radius; candidates are filtered back to
/// the cube.
pub fn enumerate_sup_ball(
    cols: &[Vec<f64>],
    radius: f64,
    budget: &mut Budget,
) -> Result<Vec<Vec<i64>>> {
    let m = cols.first().map_or(0, Vec::len);
    let mut reduced = cols.to_vec();
    let t = lll_reduce(&mut reduced, 10_000);
    let l2 = radius * (m as f64).sqrt();
    let mut out = Vec::new();
    for x in enumerate_l2(&reduced, l2, budget)? {
        // Map back to original coefficients: orig coeff = T x.
        let coeff: Vec<i64> = (0..cols.len())
            .map(|r| {
                (0..cols.len())
                    .map(|c| t[c][r] * x[c] as i128)
                    .sum::<i128>() as i64
            })
            .collect();
        let image: Vec<f64> = (0..m)
            .map(|r| {
                (0..cols.len())
                    .map(|c| cols[c][r] * coeff[c] as f64)
                    .sum::<f64>()
            })
            .collect();
        if image.iter().all(|v| v.abs() <= radius * (1.0 + 1e-9) + 1e-300) {
            out.push(canonical_sign_i64(coeff));
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

fn canonical_sign_i64(mut v: Vec<i64>) -> Vec<i64> {
    if let Some(first) = v.iter().find(|&&c| c != 0) {
        if *first < 0 {
            for c in &mut v {
                *c = -*c;
            }
        }
    }
    v
}

/// A short lattice vector: its primitive integer coordinates w in Z^{n+1}
/// (up to sign, BigInt because deep-cusp relation vectors overflow i64) and
/// the exact rational mantissa U w, so callers never recompute the heavily
/// cancelling product in floating point.
#[derive(Debug, Clone)]
pub struct ShortVector {
    pub coords: Vec<BigInt>,
    pub mantissa: Vec<Rat>,
}

impl ShortVector {
    fn canonical(mut coords: Vec<BigInt>, mut mantissa: Vec<Rat>) -> Self {
        if let Some(first) = coords.iter().find(|c| !c.is_zero()) {
            if first.is_negative() {
                for c in &mut coords {
                    *c = -c.clone();
                }
                for c in &mut mantissa {
                    *c = -c.clone();
                }
            }
        }
        ShortVector { coords, mantissa }
    }

    pub fn coords_rat(&self) -> Vec<Rat> {
        self.coords.iter().map(|c| Rat::from(c.clone())).collect()
    }
}

/// Scale-robust short-vector search on an evaluated word D U: LLL passes are
/// iterated with the mantissa matrix recomputed *exactly* between passes, so
/// floating Gram-Schmidt only ever sees one pass worth of skew instead of the
/// full dynamic range of e^{sigma} (which can exceed f64 cancellation limits
/// deep in the cusp). Returns nonzero integer vectors w (up to sign) with
/// ||D U w||_inf <= radius, membership settled exactly.
pub fn enumerate_lattice_sup_ball(
    ev: &Evaluated,
    radius: f64,
    budget: &mut Budget,
) -> Result<Vec<ShortVector>> {
    let (mant, t_acc) = refined_basis(ev, budget)?;
    enumerate_refined(ev, &mant, &t_acc, radius, budget)
}

/// Iterated exact-mantissa LLL: columns of the reduced mantissa matrix and
/// the unimodular transform expressing them in the original columns.
fn refined_basis(
    ev: &Evaluated,
    budget: &mut Budget,
) -> Result<(Vec<Vec<Rat>>, Vec<Vec<BigInt>>)> {
    let m = ev.u.rows();
    // Columns of the exact mantissa matrix and the integer transform so far:
    // current basis = D * (original U columns combined by T).
    let mut mant: Vec<Vec<Rat>> = (0..m)
        .map(|c| (0..m).map(|r| ev.u[(r, c)].clone()).collect())
        .collect();
    let mut t_acc: Vec<Vec<BigInt>> = (0..m)
        .map(|c| (0..m).map(|r| BigInt::from(u64::from(r == c))).collect())
        .collect();
    for _ in 0..24 {
        budget.charge((m * m * m) as u64)?;
        let mut cols = refined_cols_f64(ev, &mant);
        let t = lll_reduce(&mut cols, 10_000);
        let identity = t
            .iter()
            .enumerate()
            .all(|(c, row)| row.iter().enumerate().all(|(r, &v)| v == i128::from(r == c)));
        if identity {
            break;
        }
        let new_mant: Vec<Vec<Rat>> = (0..m)
            .map(|c2| {
                (0..m)
                    .map(|r| {
                        (0..m)
                            .map(|c| &mant[c][r] * rat_i(t[c2][c] as i64))
                            .fold(Rat::zero(), |a, b| a + b)
                    })
                    .collect()
            })
            .collect();
        let new_t: Vec<Vec<BigInt>> = (0..m)
            .map(|c2| {
                (0..m)
                    .map(|r| {
                        (0..m)
                            .map(|c| &t_acc[c][r] * BigInt::from(t[c2][c]))
                            .fold(BigInt::zero(), |a, b| a + b)
                    })
                    .collect()
            })
            .collect();
        mant = new_mant;
        t_acc = new_t;
    }
    Ok((mant, t_acc))
}

fn refined_cols_f64(ev: &Evaluated, mant: &[Vec<Rat>]) -> Vec<Vec<f64>> {
    mant.iter()
        .map(|col| {
            col.iter()
                .zip(&ev.sigma)
                .map(|(x, s)| x.to_f64().unwrap_or(f64::NAN) * s.exp())
                .collect()
        })
        .collect()
}

/// ln sup-norm of reduced column `c` under the diagonal scales, exactly.
fn refined_col_ln_sup(ev: &Evaluated, mant: &[Vec<Rat>], c: usize) -> f64 {
    mant[c]
        .iter()
        .zip(&ev.sigma)
        .map(|(x, s)| crate::scalar::ln_rat(x) + s)
        .fold(f64::NEG_INFINITY, f64::max)
}

fn enumerate_refined(
    ev: &Evaluated,
    mant: &[Vec<Rat>],
    t_acc: &[Vec<BigInt>],
    radius: f64,
    budget: &mut Budget,
) -> Result<Vec<ShortVector>> {
    let m = ev.u.rows();
    let ln_r = radius.ln();
    let l2 = radius * (m as f64).sqrt();
    let mut out: Vec<ShortVector> = Vec::new();
    for x in enumerate_l2(&refined_cols_f64(ev, mant), l2, budget)? {
        // Exact image under the reduced exact basis: U w, before the
        // diagonal scales.
        let img: Vec<Rat> = (0..m)
            .map(|r| {
                (0..m)
                    .map(|c| &mant[c][r] * rat_i(x[c]))
                    .fold(Rat::zero(), |a, b| a + b)
            })
            .collect();
        let inside = (0..m).all(|r| crate::scalar::ln_rat(&img[r]) + ev.sigma[r] <= ln_r + LN_TOL);
        if !inside {
            continue;
        }
        let coords: Vec<BigInt> = (0..m)
            .map(|r| {
                (0..m)
                    .map(|c| &t_acc[c][r] * BigInt::from(x[c]))
                    .fold(BigInt::zero(), |a, b| a + b)
            })
            .collect();
        out.push(ShortVector::canonical(coords, img));
    }
    out.sort_by(|a, b| a.coords.cmp(&b.coords));
    out.dedup_by(|a, b| a.coords == b.coords);
    Ok(out)
}

fn canonical_sign_rat(mut v: Vec<Rat>) -> Vec<Rat> {
    if let Some(first) = v.iter().find(|c| !c.is_zero()) {
        if first.is_negative() {
            for c in &mut v {
                *c = -c.clone();
            }
        }
    }
    v
}

/// All w in Z^{n+1} \ {0}, up to sign, with ||g w||_inf <= radius, where
/// y = g Z^{n+1}. Candidates come from a reduced floating search; membership
/// is settled with the exact rational part of the word.
pub fn enumerate_short_vectors(
    y: &LatticePoint,
    radius: f64,
    budget: &mut Budget,
) -> Result<Vec<Vec<Rat>>> {
    let ev = y.evaluated();
    let mut out = BTreeSet::new();
    for sv in enumerate_lattice_sup_ball(ev, radius, budget)? {
        out.insert(canonical_sign_rat(sv.coords_rat()));
    }
    Ok(out.into_iter().collect())
}

/// lambda_1(y) in the sup-norm: the shortest nonzero vector length. The
/// initial search radius is the shortest *reduced basis* column, which is
/// within a bounded factor of the minimum; starting from the Minkowski bound
/// 1 instead would walk exponentially many lattice points when the lattice
/// sits deep in the cusp.
pub fn systole(y: &LatticePoint, budget: &mut Budget) -> Result<(f64, Vec<Rat>)> {
    let ev = y.evaluated();
    let (mant, t_acc) = refined_basis(ev, budget)?;
    let m = ev.u.rows();
    let ln_guess = (0..m)
        .map(|c| refined_col_ln_sup(ev, &mant, c))
        .fold(f64::INFINITY, f64::min);
    let mut radius = ln_guess.exp() * (1.0 + 1e-9);
    loop {
        let found = enumerate_refined(ev, &mant, &t_acc, radius, budget)?;
        if let Some((ln, sv)) = found
            .into_iter()
            .map(|sv| {
                let ln = sv
                    .mantissa
                    .iter()
                    .zip(&ev.sigma)
                    .map(|(x, s)| crate::scalar::ln_rat(x) + s)
                    .fold(f64::NEG_INFINITY, f64::max);
                (ln, sv)
            })
            .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
        {
            return Ok((ln.exp(), sv.coords_rat()));
        }
        radius *= 2.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{unipotent_x, Dims, FlowKind};
    use crate::lattice::word::{Factor, FlowWord};

    fn standard(n: usize, d: usize) -> LatticePoint {
        LatticePoint::standard(Dims::new(n, d).unwrap())
    }

    #[test]
    fn unit_cube_of_standard_lattice() {
        // {-1,0,1}^{n+1} minus zero, up to sign.
        for n in [2usize, 3] {
            let y = standard(n, 1);
            let mut budget = Budget::default();
            let found = enumerate_short_vectors(&y, 1.0, &mut budget).unwrap();
            let expected = (3usize.pow(n as u32 + 1) - 1) / 2;
            assert_eq!(found.len(), expected);
        }
    }

    #[test]
    fn radius_below_first_minimum_is_empty() {
        let y = standard(2, 1);
        let mut budget = Budget::default();
        assert!(enumerate_short_vectors(&y, 0.5, &mut budget)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn standard_systole_is_one() {
        let y = standard(3, 2);
        let mut budget = Budget::default();
        let (lambda1, _) = systole(&y, &mut budget).unwrap();
        assert!((lambda1 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn diagonal_flow_contracts_e2() {
        // y = g_t u(x) Z^3 with x = 0, t = 3: systole = e^{-1} at e_2.
        let dims = Dims::new(2, 1).unwrap();
        let ux = unipotent_x(&[rat_i(0), rat_i(0)], dims).unwrap();
        let word = FlowWord::new(
            dims,
            vec![
                Factor::Flow {
                    kind: FlowKind::G,
                    t: 3.0,
                },
                Factor::Mat(ux),
            ],
        )
        .unwrap();
        let y = LatticePoint::new(word).unwrap();
        let mut budget = Budget::default();
        let (lambda1, w) = systole(&y, &mut budget).unwrap();
        assert!((lambda1 - (-1.0f64).exp()).abs() < 1e-9);
        // witness is e_1 or e_2 (both contracted equally).
        assert!(w[0].is_zero());

        // the contracted images of e_1, e_2 appear at radius e^{-1}
        // (along with their {0,±1}-combinations).
        let found = enumerate_short_vectors(&y, (-1.0f64).exp() * (1.0 + 1e-12), &mut budget).unwrap();
        assert!(found.contains(&vec![rat_i(0), rat_i(1), rat_i(0)]));
        assert!(found.contains(&vec![rat_i(0), rat_i(0), rat_i(1)]));
        assert_eq!(found.len(), 4);
    }

    #[test]
    fn budget_error_on_huge_radius() {
        let y = standard(3, 1);
        let mut budget = Budget::new(1000);
        assert!(matches!(
            enumerate_short_vectors(&y, 50.0, &mut budget),
            Err(crate::error::Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn lll_handles_skewed_basis() {
        // Heavily skewed 2d basis still finds the short vector (1,0).
        let cols = vec![vec![1.0, 0.0], vec![1000.0, 1.0]];
        let mut budget = Budget::default();
        let found = enumerate_sup_ball(&cols, 1.0, &mut budget).unwrap();
        assert!(found.contains(&vec![1, 0]));
        // image of (−1000, 1) is (0,1): also in the unit cube.
        assert!(found.contains(&vec![1000, -1]) || found.contains(&vec![-1000, 1]));
    }
}
