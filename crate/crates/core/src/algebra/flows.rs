use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::scalar::{Coeff, Rat, Rat64};

use super::dims::Dims;
use super::ext_vector::{ExtVector, ExtVectorL, IntoLog};
use super::matrix::QMat;
use super::multi_index::MultiIndex;

/// The three one-parameter diagonal subgroups. `g_t = b_t c_t` holds exactly
/// at the level of the rational exponent weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FlowKind {
    /// diag(e^{n t/(n+1)}, e^{-t/(n+1)} I_n)
    G,
    /// diag(e^{(n-d)t/((d+1)(n+1))} I_{d+1}, e^{-t/(n+1)} I_{n-d})
    B,
    /// diag(e^{d t/(d+1)}, e^{-t/(d+1)} I_d, I_{n-d})
    C,
}

/// Exact exponent weight of coordinate `i` under the flow (per unit time).
pub fn coord_weight(kind: FlowKind, i: usize, dims: Dims) -> Rat64 {
    let n = dims.n() as i64;
    let d = dims.d() as i64;
    match kind {
        FlowKind::G => {
            if i == 0 {
                Rat64::new(n, n + 1)
            } else {
                Rat64::new(-1, n + 1)
            }
        }
        FlowKind::B => {
            if i <= dims.d() {
                Rat64::new(n - d, (d + 1) * (n + 1))
            } else {
                Rat64::new(-1, n + 1)
            }
        }
        FlowKind::C => {
            if i == 0 {
                Rat64::new(d, d + 1)
            } else if i <= dims.d() {
                Rat64::new(-1, d + 1)
            } else {
                Rat64::zero()
            }
        }
    }
}

/// Exact exponent weight of a basis multi-index under the induced action on
/// the exterior power.
pub fn index_weight(kind: FlowKind, j: MultiIndex, dims: Dims) -> Rat64 {
    j.indices().map(|i| coord_weight(kind, i, dims)).sum()
}

/// Exact block-scaling weight of b_t on the pi_i block of grade k:
/// i/(d+1) - k/(n+1).
pub fn b_block_weight(i: usize, k: usize, dims: Dims) -> Rat64 {
    Rat64::new(i as i64, dims.d() as i64 + 1) - Rat64::new(k as i64, dims.n() as i64 + 1)
}

/// Induced flow action on an exterior vector, in the log domain.
pub fn act_flow<C>(kind: FlowKind, t: f64, v: &ExtVector<C>, dims: Dims) -> ExtVectorL
where
    C: Coeff + IntoLog,
{
    v.scale_indexed_ln(|j| t * index_weight(kind, j, dims).to_f64().unwrap())
}

/// u(s): the inner unipotent of the H_d block, adding s_j e_0 to e_j for
/// 1 <= j <= d.
pub fn unipotent_s(s: &[Rat], dims: Dims) -> Result<QMat> {
    if s.len() != dims.d() {
        return Err(Error::ShapeMismatch {
            expected: format!("{}", dims.d()),
            got: format!("{}", s.len()),
        });
    }
    let mut m = QMat::identity(dims.ambient());
    for (j, sj) in s.iter().enumerate() {
        m[(0, j + 1)] = sj.clone();
    }
    Ok(m)
}

/// u(x): top-row unipotent over all of R^n (the Dani correspondence chart).
pub fn unipotent_x(x: &[Rat], dims: Dims) -> Result<QMat> {
    if x.len() != dims.n() {
        return Err(Error::ShapeMismatch {
            expected: format!("{}", dims.n()),
            got: format!("{}", x.len()),
        });
    }
    let mut m = QMat::identity(dims.ambient());
    for (j, xj) in x.iter().enumerate() {
        m[(0, j + 1)] = xj.clone();
    }
    Ok(m)
}

/// u_A: block unipotent [[I_{d+1}, A], [0, I_{n-d}]].
pub fn unipotent_a(a: &QMat, dims: Dims) -> Result<QMat> {
    check_a_shape(a, dims)?;
    let mut m = QMat::identity(dims.ambient());
    for i in 0..=dims.d() {
        for j in 0..dims.n() - dims.d() {
            m[(i, dims.d() + 1 + j)] = a[(i, j)].clone();
        }
    }
    Ok(m)
}

/// z_A: [[1,0,0],[0,I_d,-A_2],[0,0,I_{n-d}]] where A_2 is the lower d rows
/// of A; commutes with g_t.
pub fn unipotent_z(a: &QMat, dims: Dims) -> Result<QMat> {
    check_a_shape(a, dims)?;
    let mut m = QMat::identity(dims.ambient());
    for i in 1..=dims.d() {
        for j in 0..dims.n() - dims.d() {
            m[(i, dims.d() + 1 + j)] = -a[(i, j)].clone();
        }
    }
    Ok(m)
}

fn check_a_shape(a: &QMat, dims: Dims) -> Result<()> {
    if a.rows() != dims.d() + 1 || a.cols() != dims.n() - dims.d() {
        return Err(Error::ShapeMismatch {
            expected: format!("{}x{}", dims.d() + 1, dims.n() - dims.d()),
            got: format!("{}x{}", a.rows(), a.cols()),
        });
    }
    Ok(())
}

/// An element of SL_{n+1}(R): either an exact rational matrix or a diagonal
/// flow held symbolically.
#[derive(Debug, Clone)]
pub enum GroupElement {
    Mat(QMat),
    Flow { kind: FlowKind, t: f64 },
}

impl GroupElement {
    pub fn mat(m: QMat) -> Result<Self> {
        if m.is_unimodular() {
            Ok(GroupElement::Mat(m))
        } else {
            Err(Error::NotUnimodular)
        }
    }

    /// Induced action on the exterior power, producing a log-backend vector.
    pub fn act_exterior(&self, v: &ExtVector<Rat>, dims: Dims) -> Result<ExtVectorL> {
        match self {
            GroupElement::Mat(m) => {
                let rows = (0..m.rows()).map(|i| m.row(i).to_vec()).collect::<Vec<_>>();
                Ok(super::ext_vector::act_mat(&rows, v)?.to_log())
            }
            GroupElement::Flow { kind, t } => Ok(act_flow(*kind, *t, v, dims)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, rat_i};

    #[test]
    fn g_equals_b_times_c_exactly() {
        for (n, d) in [(2, 1), (3, 1), (3, 2), (4, 2), (6, 3)] {
            let dims = Dims::new(n, d).unwrap();
            for i in 0..dims.ambient() {
                let g = coord_weight(FlowKind::G, i, dims);
                let b = coord_weight(FlowKind::B, i, dims);
                let c = coord_weight(FlowKind::C, i, dims);
                assert_eq!(g, b + c, "coordinate {i} of n={n},d={d}");
            }
        }
    }

    #[test]
    fn flows_are_traceless() {
        for (n, d) in [(2, 1), (4, 2), (5, 3)] {
            let dims = Dims::new(n, d).unwrap();
            for kind in [FlowKind::G, FlowKind::B, FlowKind::C] {
                let total: Rat64 = (0..dims.ambient()).map(|i| coord_weight(kind, i, dims)).sum();
                assert!(total.is_zero());
            }
        }
    }

    #[test]
    fn b_weights_match_n2_d1() {
        let dims = Dims::new(2, 1).unwrap();
        assert_eq!(coord_weight(FlowKind::B, 0, dims), Rat64::new(1, 6));
        assert_eq!(coord_weight(FlowKind::B, 1, dims), Rat64::new(1, 6));
        assert_eq!(coord_weight(FlowKind::B, 2, dims), Rat64::new(-1, 3));
    }

    #[test]
    fn b_block_weight_matches_index_weight() {
        for (n, d) in [(2, 1), (3, 1), (4, 2)] {
            let dims = Dims::new(n, d).unwrap();
            for k in 1..=n {
                let (lo, hi) = dims.block_range(k);
                for j in MultiIndex::all(dims.ambient(), k) {
                    let i = j.count_in(dims.perp_mask());
                    assert!(i >= lo && i <= hi);
                    assert_eq!(index_weight(FlowKind::B, j, dims), b_block_weight(i, k, dims));
                }
            }
        }
    }

    #[test]
    fn c_acts_on_pm_blocks() {
        // c_t scales V_+ by e^{(d+1-i)/(d+1) t} and V_- by e^{-i/(d+1) t}.
        let dims = Dims::new(4, 2).unwrap();
        let i = 2;
        let plus = MultiIndex::from_indices(&[0, 1]);
        let minus = MultiIndex::from_indices(&[1, 2]);
        assert_eq!(
            index_weight(FlowKind::C, plus, dims),
            Rat64::new((dims.d() as i64 + 1) - i, dims.d() as i64 + 1)
        );
        assert_eq!(
            index_weight(FlowKind::C, minus, dims),
            Rat64::new(-i, dims.d() as i64 + 1)
        );
    }

    #[test]
    fn factored_unipotent_identity() {
        // u(x) = z_A u(s) u_A for x = (s, s~A), exact in rational arithmetic.
        let dims = Dims::new(2, 1).unwrap();
        let a = QMat::from_rows(vec![vec![rat(2, 3)], vec![rat(-1, 5)]]).unwrap();
        let s = vec![rat(4, 7)];
        // s~ = (1, s); x = (s, s~ A)
        let sa = &a[(0, 0)] + &s[0] * &a[(1, 0)];
        let x = vec![s[0].clone(), sa];
        let ux = unipotent_x(&x, dims).unwrap();
        let z = unipotent_z(&a, dims).unwrap();
        let us = unipotent_s(&s, dims).unwrap();
        let ua = unipotent_a(&a, dims).unwrap();
        let product = z.mul(&us).unwrap().mul(&ua).unwrap();
        assert_eq!(ux, product);
        assert_eq!(unipotent_x(&[rat_i(0), rat_i(0)], dims).unwrap(), QMat::identity(3));
    }

    #[test]
    fn z_commutes_with_g_weights() {
        // z_A only mixes coordinates with equal g-weight.
        let dims = Dims::new(3, 1).unwrap();
        let a = QMat::from_rows(vec![
            vec![rat_i(1), rat_i(2)],
            vec![rat_i(3), rat_i(4)],
        ])
        .unwrap();
        let z = unipotent_z(&a, dims).unwrap();
        for i in 0..dims.ambient() {
            for j in 0..dims.ambient() {
                if i != j && !z[(i, j)].is_zero() {
                    assert_eq!(
                        coord_weight(FlowKind::G, i, dims),
                        coord_weight(FlowKind::G, j, dims)
                    );
                }
            }
        }
    }
}
