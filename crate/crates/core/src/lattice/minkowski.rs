use crate::algebra::wedge;
use crate::error::{Error, Result};
use crate::scalar::{Budget, Rat};

use super::enumerate::enumerate_sup_ball;
use super::word::LatticePoint;

/// Shortest-vector certificate for a rank-k sublattice of y: in the sup norm
/// the first minimum never exceeds covol^{1/k} (cube-slicing bound), so
/// `ok = false` flags a computation bug, not a mathematical possibility.
#[derive(Debug, Clone)]
pub struct MinkowskiCertificate {
    pub lambda1: f64,
    pub covol: f64,
    pub ok: bool,
}

/// Computes the covolume of the sublattice spanned by the evaluated
/// generators (Euclidean norm of their wedge) and its shortest nonzero vector
/// in the sup norm, by enumeration inside the guaranteed ball.
pub fn minkowski_certificate(
    generators: &[Vec<Rat>],
    y: &LatticePoint,
    budget: &mut Budget,
) -> Result<MinkowskiCertificate> {
    let k = generators.len();
    let ev = y.evaluated();
    let v = wedge(y.dims().ambient(), generators)?;
    if v.is_zero() {
        return Err(Error::Invalid("dependent generators".into()));
    }
    // ln of the l2 norm of the evaluated wedge = ln sqrt(det Gram).
    let moved = ev.act_exterior(&v)?;
    let ln_max = moved.sup_norm_ln();
    let sum: f64 = moved
        .iter()
        .map(|(_, c)| (2.0 * (c.ln - ln_max)).exp())
        .sum();
    let ln_covol = ln_max + 0.5 * sum.ln();
    let covol = ln_covol.exp();

    // Shortest vector of the sublattice: enumerate coefficient vectors over
    // the evaluated generator columns, growing from the certified radius.
    let cols: Vec<Vec<f64>> = generators
        .iter()
        .map(|g| ev.apply_f64(g))
        .collect::<Result<_>>()?;
    let mut radius = (ln_covol / k as f64).exp();
    let ln_lambda1 = loop {
        let found = enumerate_sup_ball(&cols, radius * (1.0 + 1e-9), budget)?;
        let best = found
            .iter()
            .map(|coeff| {
                let w: Vec<Rat> = (0..generators[0].len())
                    .map(|r| {
                        coeff
                            .iter()
                            .zip(generators)
                            .map(|(&c, g)| Rat::from_integer(c.into()) * &g[r])
                            .sum()
                    })
                    .collect();
                ev.ln_sup_norm(&w).unwrap()
            })
            .fold(f64::INFINITY, f64::min);
        if best.is_finite() {
            break best;
        }
        radius *= 2.0;
    };
    let lambda1 = ln_lambda1.exp();
    Ok(MinkowskiCertificate {
        lambda1,
        covol,
        ok: ln_lambda1 <= ln_covol / k as f64 + 1e-9,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{unipotent_a, Dims, FlowKind, QMat};
    use crate::lattice::word::{Factor, FlowWord};
    use crate::scalar::{rat, rat_i};
    use rand::{Rng, SeedableRng};

    #[test]
    fn standard_block_is_tight() {
        let y = LatticePoint::standard(Dims::new(2, 1).unwrap());
        let gens = vec![
            vec![rat_i(1), rat_i(0), rat_i(0)],
            vec![rat_i(0), rat_i(1), rat_i(0)],
        ];
        let mut budget = Budget::default();
        let cert = minkowski_certificate(&gens, &y, &mut budget).unwrap();
        assert!((cert.lambda1 - 1.0).abs() < 1e-9);
        assert!((cert.covol - 1.0).abs() < 1e-9);
        assert!(cert.ok);
    }

    #[test]
    fn stretched_generator() {
        let y = LatticePoint::standard(Dims::new(2, 1).unwrap());
        let gens = vec![
            vec![rat_i(0), rat_i(2), rat_i(0)],
            vec![rat_i(0), rat_i(0), rat_i(1)],
        ];
        let mut budget = Budget::default();
        let cert = minkowski_certificate(&gens, &y, &mut budget).unwrap();
        assert!((cert.covol - 2.0).abs() < 1e-9);
        assert!((cert.lambda1 - 1.0).abs() < 1e-9);
        assert!(cert.ok);
    }

    #[test]
    fn random_sublattices_of_flowed_lattice() {
        // 200 random rank-2 sublattices of b_t u_A Z^3: the bound always holds.
        let dims = Dims::new(2, 1).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for trial in 0..200 {
            let a = QMat::from_rows(vec![
                vec![rat(rng.gen_range(-20..20), 13)],
                vec![rat(rng.gen_range(-20..20), 13)],
            ])
            .unwrap();
            let t = rng.gen_range(0.0..3.0);
            let word = FlowWord::new(
                dims,
                vec![
                    Factor::Flow {
                        kind: FlowKind::B,
                        t,
                    },
                    Factor::Mat(unipotent_a(&a, dims).unwrap()),
                ],
            )
            .unwrap();
            let y = LatticePoint::new(word).unwrap();
            let g1: Vec<Rat> = (0..3).map(|_| rat_i(rng.gen_range(-3..=3))).collect();
            let g2: Vec<Rat> = (0..3).map(|_| rat_i(rng.gen_range(-3..=3))).collect();
            let gens = vec![g1, g2];
            if wedge(3, &gens).unwrap().is_zero() {
                continue;
            }
            let mut budget = Budget::default();
            let cert = minkowski_certificate(&gens, &y, &mut budget).unwrap();
            assert!(cert.ok, "trial {trial}: {cert:?}");
        }
    }
}
