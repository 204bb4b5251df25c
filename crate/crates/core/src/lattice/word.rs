use num_traits::Zero;

use crate::algebra::{coord_weight, index_weight, Dims, ExtVectorL, ExtVectorQ, FlowKind, QMat};
use crate::error::{Error, Result};
use crate::scalar::{ln_rat, Rat};

/// One factor of a group word.
#[derive(Debug, Clone)]
pub enum Factor {
    Flow { kind: FlowKind, t: f64 },
    Mat(QMat),
}

/// An ordered product of flow and rational-matrix factors, applied left to
/// right: g = f_1 f_2 ... f_m. Evaluation never exponentiates a matrix in
/// floating point; instead the word is rewritten as (diagonal log-scale) x
/// (exact rational matrix).
#[derive(Debug, Clone)]
pub struct FlowWord {
    dims: Dims,
    factors: Vec<Factor>,
}

/// Canonical form g = D * U with D = diag(e^{sigma_i}) and U exact rational.
#[derive(Debug, Clone)]
pub struct Evaluated {
    pub u: QMat,
    pub sigma: Vec<f64>,
}

impl FlowWord {
    pub fn new(dims: Dims, factors: Vec<Factor>) -> Result<Self> {
        for f in &factors {
            if let Factor::Mat(m) = f {
                if m.rows() != dims.ambient() || m.cols() != dims.ambient() {
                    return Err(Error::ShapeMismatch {
                        expected: format!("{0}x{0}", dims.ambient()),
                        got: format!("{}x{}", m.rows(), m.cols()),
                    });
                }
            }
        }
        Ok(FlowWord { dims, factors })
    }

    pub fn identity(dims: Dims) -> Self {
        FlowWord {
            dims,
            factors: Vec::new(),
        }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    /// Returns the word with `factor` appended on the right.
    pub fn then(&self, factor: Factor) -> Self {
        let mut factors = self.factors.clone();
        factors.push(factor);
        FlowWord {
            dims: self.dims,
            factors,
        }
    }

    /// Returns the word with `factor` prepended on the left.
    pub fn before(&self, factor: Factor) -> Self {
        let mut factors = vec![factor];
        factors.extend(self.factors.iter().cloned());
        FlowWord {
            dims: self.dims,
            factors,
        }
    }

    /// Rewrites the word as D * U by commuting every flow factor leftward
    /// past the rational factors. A flow commutes with U exactly when every
    /// off-diagonal entry of U couples coordinates of equal flow weight;
    /// words that mix incompatibly are rejected rather than approximated.
    pub fn canonical(&self) -> Result<Evaluated> {
        let m = self.dims.ambient();
        let mut u = QMat::identity(m);
        let mut sigma = vec![0.0; m];
        for f in &self.factors {
            match f {
                Factor::Mat(mat) => {
                    u = u.mul(mat)?;
                }
                Factor::Flow { kind, t } => {
                    for i in 0..m {
                        for j in 0..m {
                            if i != j
                                && !u[(i, j)].is_zero()
                                && coord_weight(*kind, i, self.dims)
                                    != coord_weight(*kind, j, self.dims)
                            {
                                return Err(Error::WordShape);
                            }
                        }
                    }
                    for (i, s) in sigma.iter_mut().enumerate() {
                        *s += t * rat64_f64(coord_weight(*kind, i, self.dims));
                    }
                }
            }
        }
        Ok(Evaluated { u, sigma })
    }
}

fn rat64_f64(r: crate::scalar::Rat64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

impl Evaluated {
    /// Exact rational image U w together with the per-coordinate log scales.
    pub fn apply(&self, w: &[Rat]) -> Result<Vec<Rat>> {
        self.u.mul_vec(w)
    }

    /// ln of the sup-norm of g w = D U w.
    pub fn ln_sup_norm(&self, w: &[Rat]) -> Result<f64> {
        let uw = self.apply(w)?;
        Ok(uw
            .iter()
            .zip(&self.sigma)
            .map(|(x, s)| ln_rat(x) + s)
            .fold(f64::NEG_INFINITY, f64::max))
    }

    /// Image of g w as floats (coordinates scaled by e^{sigma_i}).
    pub fn apply_f64(&self, w: &[Rat]) -> Result<Vec<f64>> {
        use num_traits::ToPrimitive;
        let uw = self.apply(w)?;
        Ok(uw
            .iter()
            .zip(&self.sigma)
            .map(|(x, s)| x.to_f64().unwrap_or(f64::NAN) * s.exp())
            .collect())
    }

    /// The columns of D U as floats; the j-th column is the image of e_j.
    pub fn basis_f64(&self) -> Vec<Vec<f64>> {
        use num_traits::ToPrimitive;
        let m = self.u.rows();
        (0..m)
            .map(|j| {
                (0..m)
                    .map(|i| self.u[(i, j)].to_f64().unwrap_or(f64::NAN) * self.sigma[i].exp())
                    .collect()
            })
            .collect()
    }

    /// Induced action on a grade-k exterior vector: exact rational action of
    /// U, then diagonal log rescaling by the flow part.
    pub fn act_exterior(&self, v: &ExtVectorQ) -> Result<ExtVectorL> {
        let m = self.u.rows();
        let rows: Vec<Vec<Rat>> = (0..m).map(|i| self.u.row(i).to_vec()).collect();
        let moved = crate::algebra::act_mat(&rows, v)?;
        Ok(moved.scale_indexed_ln(|j| j.indices().map(|i| self.sigma[i]).sum()))
    }
}

/// A unimodular lattice y = g Z^{n+1} presented by a word for g.
#[derive(Debug, Clone)]
pub struct LatticePoint {
    word: FlowWord,
    evaluated: Evaluated,
}

impl LatticePoint {
    pub fn new(word: FlowWord) -> Result<Self> {
        let evaluated = word.canonical()?;
        if !evaluated.u.is_unimodular() {
            return Err(Error::NotUnimodular);
        }
        Ok(LatticePoint { word, evaluated })
    }

    pub fn standard(dims: Dims) -> Self {
        LatticePoint::new(FlowWord::identity(dims)).expect("identity word")
    }

    pub fn word(&self) -> &FlowWord {
        &self.word
    }

    pub fn dims(&self) -> Dims {
        self.word.dims
    }

    pub fn evaluated(&self) -> &Evaluated {
        &self.evaluated
    }

    /// The lattice translated by a further left factor: g' = f * g.
    pub fn translated(&self, factor: Factor) -> Result<Self> {
        LatticePoint::new(self.word.before(factor))
    }
}

/// Sum of flow index weights over a multi-index, as a float multiplier of t.
pub fn index_weight_f64(kind: FlowKind, j: crate::algebra::MultiIndex, dims: Dims) -> f64 {
    rat64_f64(index_weight(kind, j, dims))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{unipotent_a, unipotent_s, unipotent_x, unipotent_z};
    use crate::scalar::{rat, rat_i};

    fn dims21() -> Dims {
        Dims::new(2, 1).unwrap()
    }

    #[test]
    fn flow_then_unipotent_canonicalizes() {
        // g_t u(x): the flow is already on the left.
        let dims = dims21();
        let ux = unipotent_x(&[rat(1, 3), rat_i(0)], dims).unwrap();
        let w = FlowWord::new(
            dims,
            vec![
                Factor::Flow {
                    kind: FlowKind::G,
                    t: 3.0,
                },
                Factor::Mat(ux.clone()),
            ],
        )
        .unwrap();
        let ev = w.canonical().unwrap();
        assert_eq!(ev.u, ux);
        assert!((ev.sigma[0] - 2.0).abs() < 1e-12);
        assert!((ev.sigma[1] + 1.0).abs() < 1e-12);
        let y = LatticePoint::new(w).unwrap();
        // e_2 is fixed by u(x) here and contracted by e^{-t/3}.
        let ln = y
            .evaluated()
            .ln_sup_norm(&[rat_i(0), rat_i(0), rat_i(1)])
            .unwrap();
        assert!((ln + 1.0).abs() < 1e-12);
    }

    #[test]
    fn incompatible_bubbling_rejected() {
        // u(x) g_t cannot be rewritten with the flow on the left when x mixes
        // coordinates of different g-weight.
        let dims = dims21();
        let ux = unipotent_x(&[rat_i(1), rat_i(0)], dims).unwrap();
        let w = FlowWord::new(
            dims,
            vec![
                Factor::Mat(ux),
                Factor::Flow {
                    kind: FlowKind::G,
                    t: 1.0,
                },
            ],
        )
        .unwrap();
        assert!(matches!(w.canonical(), Err(Error::WordShape)));
    }

    #[test]
    fn b_flow_commutes_past_inner_unipotent() {
        // b_t fixes H_d pointwise, so u(s) b_t = b_t u(s) is a legal word.
        let dims = dims21();
        let us = unipotent_s(&[rat(1, 2)], dims).unwrap();
        let w = FlowWord::new(
            dims,
            vec![
                Factor::Mat(us.clone()),
                Factor::Flow {
                    kind: FlowKind::B,
                    t: 2.0,
                },
            ],
        )
        .unwrap();
        let ev = w.canonical().unwrap();
        assert_eq!(ev.u, us);
    }

    #[test]
    fn z_commutes_past_g() {
        let dims = dims21();
        let a = QMat::from_rows(vec![vec![rat(1, 7)], vec![rat(3, 4)]]).unwrap();
        let z = unipotent_z(&a, dims).unwrap();
        let w = FlowWord::new(
            dims,
            vec![
                Factor::Mat(z),
                Factor::Flow {
                    kind: FlowKind::G,
                    t: 5.0,
                },
            ],
        )
        .unwrap();
        assert!(w.canonical().is_ok());
    }

    #[test]
    fn non_unimodular_rejected() {
        let dims = dims21();
        let m = QMat::from_rows(vec![
            vec![rat_i(2), rat_i(0), rat_i(0)],
            vec![rat_i(0), rat_i(1), rat_i(0)],
            vec![rat_i(0), rat_i(0), rat_i(1)],
        ])
        .unwrap();
        let w = FlowWord::new(dims, vec![Factor::Mat(m)]).unwrap();
        assert!(matches!(LatticePoint::new(w), Err(Error::NotUnimodular)));
    }

    #[test]
    fn exterior_action_matches_vector_action() {
        let dims = dims21();
        let a = QMat::from_rows(vec![vec![rat(2, 3)], vec![rat(-1, 4)]]).unwrap();
        let ua = unipotent_a(&a, dims).unwrap();
        let w = FlowWord::new(
            dims,
            vec![
                Factor::Flow {
                    kind: FlowKind::B,
                    t: 1.5,
                },
                Factor::Mat(ua),
            ],
        )
        .unwrap();
        let ev = w.canonical().unwrap();
        // grade-1 exterior action must agree with the direct vector image.
        let e2 = ExtVectorQ::basis(3, &[2]);
        let moved = ev.act_exterior(&e2).unwrap();
        let direct = ev.apply_f64(&[rat_i(0), rat_i(0), rat_i(1)]).unwrap();
        for (j, c) in moved.iter() {
            let i = j.indices().next().unwrap();
            assert!((c.value() - direct[i]).abs() < 1e-12, "coordinate {i}");
        }
    }
}
