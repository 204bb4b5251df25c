use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{unipotent_s, FlowKind};
use crate::dioph::AffineParam;
use crate::error::{Error, Result};
use crate::height::{alpha_tilde, HeightParams};
use crate::lattice::{Factor, FlowWord, LatticePoint};
use crate::scalar::{Budget, Rat};

/// Excursion statistics of the orbit segments (g_{lt} u(s) y_A)_{l=1..N}
/// over random s in I^d: the smoothed-height hitting sequences, the
/// empirical measures of the high-excursion sets
/// Z(M, N, t, eta) = {s : #{l <= N : alpha~(g_{lt} u(s) y_A) > M} > eta N},
/// and counts of maximal excursion blocks (runs above the threshold that
/// start right after a sub-threshold time).
#[derive(Debug, Clone)]
pub struct ExcursionStats {
    pub t: f64,
    pub n_steps: usize,
    pub m_threshold: f64,
    /// Per-sample smoothed-height values along the orbit; +inf marks samples
    /// that are outside every compact sublevel set.
    pub hitting: Vec<Vec<f64>>,
    /// (eta, empirical |Z(M, N, t, eta)|), over the requested eta grid.
    pub z_measures: Vec<(f64, f64)>,
    /// run_histogram[L-1] = number of maximal excursion blocks of length L.
    pub run_histogram: Vec<usize>,
}

/// Empirical measure of Z(M, N, t, eta) from stored hitting sequences.
pub fn z_measure(hitting: &[Vec<f64>], m: f64, eta: f64) -> f64 {
    if hitting.is_empty() {
        return 0.0;
    }
    let n = hitting[0].len();
    let hits = hitting
        .iter()
        .filter(|seq| seq.iter().filter(|&&v| v > m).count() as f64 > eta * n as f64)
        .count();
    hits as f64 / hitting.len() as f64
}

fn run_histogram(hitting: &[Vec<f64>], m: f64, n_steps: usize) -> Vec<usize> {
    let mut hist = vec![0usize; n_steps];
    for seq in hitting {
        let mut run = 0usize;
        let mut preceded = false; // a sub-threshold time was seen before the run
        for &v in seq {
            if v >= m {
                run += 1;
            } else {
                if run > 0 && preceded {
                    hist[run - 1] += 1;
                }
                run = 0;
                preceded = true;
            }
        }
        if run > 0 && preceded {
            hist[run - 1] += 1;
        }
    }
    hist
}

/// Uniform draw from I = [-1/2, 1/2) as an exact dyadic rational; the 2^-21
/// quantization is far below every scale the statistics resolve.
pub(crate) fn sample_interval(rng: &mut ChaCha8Rng) -> Rat {
    let num: i64 = rng.gen_range(-(1 << 20)..(1 << 20));
    Rat::new(num.into(), (1i64 << 21).into())
}

pub fn excursion_stats(
    a: &AffineParam,
    params: &HeightParams,
    t: f64,
    n_steps: usize,
    m_threshold: Option<f64>,
    eta_grid: &[f64],
    samples: usize,
    seed: u64,
    budget: &mut Budget,
) -> Result<ExcursionStats> {
    let dims = a.dims();
    params.validate(dims)?;
    if t <= 0.0 || n_steps < 1 || samples < 1 {
        return Err(Error::Invalid("need t > 0, n_steps >= 1, samples >= 1".into()));
    }
    if eta_grid.iter().any(|&e| !(0.0..=1.0).contains(&e)) {
        return Err(Error::Invalid("eta values must lie in [0, 1]".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let orbit_values = |s: &[Rat], len: usize, budget: &mut Budget| -> Result<Vec<f64>> {
        let base = FlowWord::new(
            dims,
            vec![
                Factor::Mat(unipotent_s(s, dims)?),
                Factor::Mat(crate::algebra::unipotent_a(a.matrix(), dims)?),
            ],
        )?;
        let y = LatticePoint::new(base)?;
        (1..=len)
            .map(|l| {
                let pushed = y.translated(Factor::Flow {
                    kind: FlowKind::G,
                    t: l as f64 * t,
                })?;
                Ok(alpha_tilde(&pushed, params, budget)?.value.value())
            })
            .collect()
    };

    // Threshold heuristic when none is given: four times the 90th percentile
    // of the smoothed height over a pilot sample of base points u(s) y_A.
    let m = match m_threshold {
        Some(m) if m > 0.0 => m,
        Some(m) => return Err(Error::Invalid(format!("threshold {m} must be positive"))),
        None => {
            let pilot = samples.clamp(32, 200);
            let mut vals = Vec::with_capacity(pilot);
            for _ in 0..pilot {
                let s: Vec<Rat> = (0..dims.d()).map(|_| sample_interval(&mut rng)).collect();
                let word = FlowWord::new(
                    dims,
                    vec![
                        Factor::Mat(unipotent_s(&s, dims)?),
                        Factor::Mat(crate::algebra::unipotent_a(a.matrix(), dims)?),
                    ],
                )?;
                let v = alpha_tilde(&LatticePoint::new(word)?, params, budget)?
                    .value
                    .value();
                if v.is_finite() {
                    vals.push(v);
                }
            }
            if vals.is_empty() {
                return Err(Error::Invalid(
                    "pilot run found no finite smoothed heights; supply a threshold".into(),
                ));
            }
            vals.sort_by(|x, y| x.partial_cmp(y).unwrap());
            4.0 * vals[(vals.len() * 9 / 10).min(vals.len() - 1)]
        }
    };

    let mut hitting = Vec::with_capacity(samples);
    for _ in 0..samples {
        let s: Vec<Rat> = (0..dims.d()).map(|_| sample_interval(&mut rng)).collect();
        hitting.push(orbit_values(&s, n_steps, budget)?);
    }
    let z_measures = eta_grid
        .iter()
        .map(|&eta| (eta, z_measure(&hitting, m, eta)))
        .collect();
    let hist = run_histogram(&hitting, m, n_steps);
    Ok(ExcursionStats {
        t,
        n_steps,
        m_threshold: m,
        hitting,
        z_measures,
        run_histogram: hist,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{Dims, QMat};
    use crate::scalar::rat;

    fn params() -> HeightParams {
        HeightParams {
            epsilon: 0.1,
            theta: 0.4,
            delta: 0.02,
            cutoff_r: 1.0,
            t_max: 8.0,
            h: 0.5,
        }
    }

    fn param21(c0: Rat, c1: Rat) -> AffineParam {
        let dims = Dims::new(2, 1).unwrap();
        AffineParam::new(QMat::from_rows(vec![vec![c0], vec![c1]]).unwrap(), dims).unwrap()
    }

    #[test]
    fn z_measure_monotonicity_is_structural() {
        let hitting = vec![
            vec![1.0, 5.0, 5.0, 0.5],
            vec![0.2, 0.3, 9.0, 0.1],
            vec![7.0, 7.0, 7.0, 7.0],
        ];
        for m in [0.5, 2.0, 6.0] {
            let mut prev = f64::INFINITY;
            for eta in [0.0, 0.25, 0.5, 0.75, 1.0] {
                let z = z_measure(&hitting, m, eta);
                assert!(z <= prev && (0.0..=1.0).contains(&z));
                prev = z;
            }
        }
        for eta in [0.0, 0.5] {
            assert!(z_measure(&hitting, 2.0, eta) <= z_measure(&hitting, 0.5, eta));
            assert!(z_measure(&hitting, 6.0, eta) <= z_measure(&hitting, 2.0, eta));
        }
    }

    #[test]
    fn rational_subspace_excursions_never_end() {
        // For rational A the relation vector is shared by every fiber, so
        // past the escape time every sample sits outside all compact parts:
        // the Z-measure is a step function of eta.
        let a = param21(rat(1, 2), rat(1, 2));
        let mut budget = Budget::new(2_000_000_000);
        let out = excursion_stats(
            &a,
            &params(),
            1.5,
            8,
            None,
            &[0.0, 0.25, 0.9],
            12,
            42,
            &mut budget,
        )
        .unwrap();
        assert_eq!(out.z_measures[0].1, 1.0, "every sample has excursions");
        assert_eq!(out.z_measures[2].1, 0.0, "no sample exceeds 90% excursion time");
        let mut prev = f64::INFINITY;
        for &(_, z) in &out.z_measures {
            assert!(z <= prev);
            prev = z;
        }
        // Tail excursions are genuinely infinite values.
        assert!(out
            .hitting
            .iter()
            .all(|seq| seq.last().unwrap().is_infinite()));
    }

    #[test]
    fn histogram_counts_preceded_runs_only() {
        let hitting = vec![
            vec![9.0, 9.0, 0.1, 9.0, 0.1, 9.0, 9.0], // leading run not counted
        ];
        let hist = run_histogram(&hitting, 1.0, 7);
        assert_eq!(hist[0], 1); // the single 9.0 at index 3
        assert_eq!(hist[1], 1); // the final run of two
        assert_eq!(hist.iter().sum::<usize>(), 2);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let a = param21(
            Rat::from_float(0.4142135).unwrap(),
            Rat::from_float(0.7320508).unwrap(),
        );
        let mut p = params();
        p.t_max = 4.0;
        let mut b1 = Budget::new(2_000_000_000);
        let mut b2 = Budget::new(2_000_000_000);
        let r1 = excursion_stats(&a, &p, 1.0, 4, Some(5.0), &[0.0, 0.5], 6, 9, &mut b1).unwrap();
        let r2 = excursion_stats(&a, &p, 1.0, 4, Some(5.0), &[0.0, 0.5], 6, 9, &mut b2).unwrap();
        assert_eq!(r1.hitting, r2.hitting);
        assert_eq!(r1.z_measures, r2.z_measures);
    }
}
