use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::algebra::QMat;
use crate::error::{Error, Result};
use crate::scalar::{round_rat, Rat};

use super::approx::AffineParam;

/// A rational hyperplane Q = {x : x . v_Q = 0}, held by its primitive
/// integral normal vector. The height is the Euclidean norm of v_Q.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalHyperplane {
    v: Vec<BigInt>,
}

impl RationalHyperplane {
    pub fn new(mut v: Vec<BigInt>) -> Result<Self> {
        let mut g = BigInt::zero();
        for c in &v {
            g = g.gcd(c);
        }
        if g.is_zero() {
            return Err(Error::Invalid("zero normal vector".into()));
        }
        for c in &mut v {
            *c = &*c / &g;
        }
        if let Some(first) = v.iter().find(|c| !c.is_zero()) {
            if first.is_negative() {
                for c in &mut v {
                    *c = -&*c;
                }
            }
        }
        Ok(RationalHyperplane { v })
    }

    pub fn normal(&self) -> &[BigInt] {
        &self.v
    }

    pub fn height(&self) -> f64 {
        self.v
            .iter()
            .map(|c| c.to_f64().unwrap_or(f64::INFINITY).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// Projective distance d(W_A, Q): the Euclidean norm of the orthogonal
/// projection of the unit normal v_Q / |v_Q| onto the span of the rows of
/// [I_{d+1} | A]. Computed exactly as a rational square, then rooted.
pub fn proj_distance(a: &AffineParam, q: &RationalHyperplane) -> Result<f64> {
    let sq = proj_distance_sq(a, q)?;
    Ok(sq.to_f64().unwrap_or(f64::NAN).sqrt())
}

fn proj_distance_sq(a: &AffineParam, q: &RationalHyperplane) -> Result<Rat> {
    let dims = a.dims();
    let m = dims.ambient();
    if q.v.len() != m {
        return Err(Error::ShapeMismatch {
            expected: format!("{m}"),
            got: format!("{}", q.v.len()),
        });
    }
    // B: (d+1) x (n+1) with rows spanning W_A.
    let mut b = QMat::zeros(dims.d() + 1, m);
    for i in 0..=dims.d() {
        b[(i, i)] = Rat::one();
        for j in 0..dims.n() - dims.d() {
            b[(i, dims.d() + 1 + j)] = a.matrix()[(i, j)].clone();
        }
    }
    let v: Vec<Rat> = q.v.iter().map(|c| Rat::from(c.clone())).collect();
    let bt = b.transpose();
    let gram = b.mul(&bt)?;
    let w = b.mul_vec(&v)?;
    let z = gram.solve(&w)?;
    let proj_sq: Rat = w.iter().zip(&z).map(|(a, b)| a * b).sum();
    let v_sq: Rat = v.iter().map(|c| c * c).sum();
    Ok(proj_sq / v_sq)
}

/// A record in the geometric exponent scan: a hyperplane improving the
/// running minimum of d(W_A, Q) over increasing height.
#[derive(Debug, Clone)]
pub struct GeomRecord {
    pub plane: RationalHyperplane,
    pub height: f64,
    pub distance: f64,
    /// -ln d(W_A, Q) / ln H(Q) - 1.
    pub exponent: f64,
}

#[derive(Debug, Clone)]
pub struct OmegaGeometric {
    /// +inf when some enumerated hyperplane contains W_A exactly.
    pub omega: f64,
    pub records: Vec<GeomRecord>,
    pub containing_plane: Option<RationalHyperplane>,
}

/// Geometric exponent scan: candidate normals v_Q = (-round(A q''), q'')
/// over q'' in Z^{n-d} with ||q''||_inf <= h_max (other normals stay at
/// distance ~1 and never set records). Exponents are read from records with
/// height in the upper window [sqrt(h_max), h_max].
pub fn omega_geometric(a: &AffineParam, h_max: u64) -> Result<OmegaGeometric> {
    if h_max < 2 {
        return Err(Error::Invalid("h_max must be at least 2".into()));
    }
    let dims = a.dims();
    let cols = dims.n() - dims.d();
    let mut records: Vec<GeomRecord> = Vec::new();
    let mut best = f64::INFINITY;
    let window_lo = (h_max as f64).sqrt();
    let mut omega = f64::NEG_INFINITY;

    let mut q = vec![0i64; cols];
    for h in 1..=h_max as i64 {
        let mut shell = Vec::new();
        super::approx::shell_points(h, cols, &mut q, &mut shell);
        for qv in shell {
            // v = (-round(A q''), q'') made primitive.
            let mut v: Vec<BigInt> = Vec::with_capacity(dims.ambient());
            for r in 0..=dims.d() {
                let s: Rat = (0..cols)
                    .map(|c| &a.matrix()[(r, c)] * Rat::from(BigInt::from(qv[c])))
                    .sum();
                v.push(-round_rat(&s));
            }
            for &c in &qv {
                v.push(BigInt::from(c));
            }
            let plane = RationalHyperplane::new(v)?;
            let height = plane.height();
            let dist = proj_distance(a, &plane)?;
            if dist == 0.0 {
                return Ok(OmegaGeometric {
                    omega: f64::INFINITY,
                    records,
                    containing_plane: Some(plane),
                });
            }
            if dist < best && height > 1.0 {
                best = dist;
                let exponent = -dist.ln() / height.ln() - 1.0;
                if height >= window_lo {
                    omega = omega.max(exponent);
                }
                records.push(GeomRecord {
                    plane,
                    height,
                    distance: dist,
                    exponent,
                });
            }
        }
    }
    if omega == f64::NEG_INFINITY {
        if let Some(last) = records.last() {
            omega = -last.distance.ln() / window_lo.max(2.0).ln() - 1.0;
        }
    }
    Ok(OmegaGeometric {
        omega,
        records,
        containing_plane: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Dims;
    use crate::scalar::{rat, rat_i};

    fn dims21() -> Dims {
        Dims::new(2, 1).unwrap()
    }

    fn param(c0: Rat, c1: Rat) -> AffineParam {
        AffineParam::new(QMat::from_rows(vec![vec![c0], vec![c1]]).unwrap(), dims21()).unwrap()
    }

    #[test]
    fn contained_plane_has_distance_zero() {
        // A = 0: W_A = span(e_0, e_1); the plane x_2 = 0 contains it.
        let a = param(rat_i(0), rat_i(0));
        let q = RationalHyperplane::new(vec![
            BigInt::zero(),
            BigInt::zero(),
            BigInt::one(),
        ])
        .unwrap();
        assert_eq!(proj_distance(&a, &q).unwrap(), 0.0);
        let out = omega_geometric(&a, 5).unwrap();
        assert!(out.omega.is_infinite());
        assert!(out.containing_plane.is_some());
    }

    #[test]
    fn normal_inside_subspace_gives_one() {
        // v_Q = e_0 lies in W_A for A = 0: distance 1.
        let a = param(rat_i(0), rat_i(0));
        let q = RationalHyperplane::new(vec![BigInt::one(), BigInt::zero(), BigInt::zero()])
            .unwrap();
        assert!((proj_distance(&a, &q).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn distance_matches_grid_oracle() {
        // Brute-force the sup over [x] in W_A on a dense parameter grid.
        let a = param(rat(2, 7), rat(-3, 5));
        let q = RationalHyperplane::new(vec![
            BigInt::from(2),
            BigInt::from(-1),
            BigInt::from(3),
        ])
        .unwrap();
        let fast = proj_distance(&a, &q).unwrap();
        let af = a.matrix().to_f64();
        let rows = [
            [1.0, 0.0, af[0][0]],
            [0.0, 1.0, af[1][0]],
        ];
        let vq = [2.0, -1.0, 3.0];
        let vq_norm = (14.0f64).sqrt();
        let mut sup: f64 = 0.0;
        let steps = 4000;
        for i in 0..=steps {
            // x = cos(t) row0 + sin(t) row1 sweeps the projective span.
            let t = std::f64::consts::PI * i as f64 / steps as f64;
            let (c, s) = (t.cos(), t.sin());
            let x: Vec<f64> = (0..3).map(|j| c * rows[0][j] + s * rows[1][j]).collect();
            let xn = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let dot: f64 = x.iter().zip(&vq).map(|(a, b)| a * b).sum();
            sup = sup.max(dot.abs() / (xn * vq_norm));
        }
        assert!((fast - sup).abs() < 1e-6, "fast {fast} oracle {sup}");
    }

    #[test]
    fn dirichlet_floor_geometric() {
        let a = AffineParam::from_f64(
            &[
                vec![std::f64::consts::SQRT_2 - 1.0],
                vec![3f64.sqrt() - 1.0],
            ],
            dims21(),
        )
        .unwrap();
        let out = omega_geometric(&a, 2_000).unwrap();
        assert!(out.omega >= 0.4, "omega {}", out.omega);
    }

    #[test]
    fn geometric_agrees_with_approx() {
        // The two formulations estimate the same exponent.
        let a = AffineParam::from_f64(
            &[
                vec![std::f64::consts::SQRT_2 - 1.0],
                vec![3f64.sqrt() - 1.0],
            ],
            dims21(),
        )
        .unwrap();
        let geo = omega_geometric(&a, 3_000).unwrap();
        let arith = super::super::approx::omega_estimate(&a, 3_000).unwrap();
        assert!(
            (geo.omega - arith.omega).abs() <= 0.15,
            "geo {} arith {}",
            geo.omega,
            arith.omega
        );
    }
}
