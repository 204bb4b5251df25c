use crate::algebra::{unipotent_x, FlowKind};
use crate::dioph::AffineParam;
use crate::error::{Error, Result};
use crate::lattice::{systole, Factor, FlowWord, LatticePoint};
use crate::scalar::{lsq_slope, rat_i, Budget, Rat};

/// Divergence-on-average flag from a finite return sequence. `returns[l-1]`
/// records whether the orbit point at time l*t lies in the compact window
/// {systole >= sigma}. The flag demands a low return fraction over every
/// dyadic lookback window (c/2, c] for checkpoints c = N, N/2, N/4, ...
/// down to `l_min`. Doubling the horizon adds one checkpoint on top of the
/// existing ones, so along doubling horizons the flagged set is nested
/// downward by construction.
pub fn divergence_flag(returns: &[bool], threshold: f64, l_min: usize) -> bool {
    let n = returns.len();
    let mut c = n;
    while c >= l_min.max(2) {
        let lo = c / 2; // window (lo, c]
        let hits = returns[lo..c].iter().filter(|&&r| r).count();
        if hits as f64 > threshold * (c - lo) as f64 {
            return false;
        }
        c /= 2;
    }
    true
}

/// Classified grid over the parameter cube I^d of an affine subspace, with
/// dyadic box counts of the flagged set. Finite horizons over-count the
/// divergent-on-average set, so the dimension estimate is an upper-set
/// estimate by construction.
#[derive(Debug, Clone)]
pub struct EaSample {
    pub resolution: usize,
    pub t: f64,
    pub n_steps: usize,
    pub sigma: f64,
    pub threshold: f64,
    /// Row-major over the d-dimensional cell grid.
    pub flagged: Vec<bool>,
    pub flagged_fraction: f64,
    /// (boxes per side, number of boxes meeting the flagged set).
    pub box_counts: Vec<(usize, usize)>,
    /// Log-log slope of the box counts, clamped to [0, d].
    pub dim_estimate: f64,
    pub caveat: &'static str,
}

/// Center of grid cell `idx` (per-axis index) at `resolution` cells per side
/// of I = [-1/2, 1/2]: (2 idx + 1 - resolution) / (2 resolution).
fn cell_center(idx: usize, resolution: usize) -> Rat {
    rat_i(2 * idx as i64 + 1 - resolution as i64) / rat_i(2 * resolution as i64)
}

pub fn sample_ea(
    a: &AffineParam,
    resolution: usize,
    t: f64,
    n_steps: usize,
    sigma: f64,
    threshold: f64,
    budget: &mut Budget,
) -> Result<EaSample> {
    let dims = a.dims();
    let d = dims.d();
    if resolution < 1 || !resolution.is_power_of_two() {
        return Err(Error::Invalid(format!(
            "resolution {resolution} must be a power of two"
        )));
    }
    if !(sigma > 0.0 && sigma <= 1.0) || !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::Invalid("need sigma in (0,1] and threshold in (0,1)".into()));
    }
    if t <= 0.0 || n_steps < 4 {
        return Err(Error::Invalid("need t > 0 and n_steps >= 4".into()));
    }
    let cells = resolution.pow(d as u32);
    let mut flagged = Vec::with_capacity(cells);
    let mut idx = vec![0usize; d];
    for _ in 0..cells {
        let s: Vec<Rat> = idx.iter().map(|&i| cell_center(i, resolution)).collect();
        // x = (s, s~ A) with s~ = (1, s).
        let mut stilde = vec![rat_i(1)];
        stilde.extend(s.iter().cloned());
        let am = a.matrix();
        let mut x = s.clone();
        for j in 0..dims.n() - d {
            let mut acc = rat_i(0);
            for (i, si) in stilde.iter().enumerate() {
                acc += si * &am[(i, j)];
            }
            x.push(acc);
        }
        let word = FlowWord::new(dims, vec![Factor::Mat(unipotent_x(&x, dims)?)])?;
        let y = LatticePoint::new(word)?;
        let mut returns = Vec::with_capacity(n_steps);
        for l in 1..=n_steps {
            let pushed = y.translated(Factor::Flow {
                kind: FlowKind::G,
                t: l as f64 * t,
            })?;
            returns.push(systole(&pushed, budget)?.0 >= sigma);
        }
        flagged.push(divergence_flag(&returns, threshold, 4));
        // advance the multi-index
        for ax in (0..d).rev() {
            idx[ax] += 1;
            if idx[ax] < resolution {
                break;
            }
            idx[ax] = 0;
        }
    }
    let flagged_fraction = flagged.iter().filter(|&&f| f).count() as f64 / cells as f64;

    // Dyadic coarsening: a coarse box is counted when it contains a flagged
    // fine cell.
    let mut box_counts = Vec::new();
    let levels = resolution.trailing_zeros() as usize;
    for j in 0..=levels {
        let side = 1usize << j; // boxes per side at this level
        let shrink = resolution / side;
        let mut seen = vec![false; side.pow(d as u32)];
        let mut fine = vec![0usize; d];
        for flag in &flagged {
            if *flag {
                let mut coarse = 0usize;
                for &f in &fine {
                    coarse = coarse * side + f / shrink;
                }
                seen[coarse] = true;
            }
            for ax in (0..d).rev() {
                fine[ax] += 1;
                if fine[ax] < resolution {
                    break;
                }
                fine[ax] = 0;
            }
        }
        box_counts.push((side, seen.iter().filter(|&&s| s).count()));
    }
    let pts: Vec<(f64, f64)> = box_counts
        .iter()
        .filter(|(_, c)| *c > 0)
        .map(|&(side, c)| ((side as f64).ln(), (c as f64).ln()))
        .collect();
    let dim_estimate = if pts.len() >= 2 {
        let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
        lsq_slope(&xs, &ys).clamp(0.0, d as f64)
    } else {
        0.0
    };
    Ok(EaSample {
        resolution,
        t,
        n_steps,
        sigma,
        threshold,
        flagged,
        flagged_fraction,
        box_counts,
        dim_estimate,
        caveat: "finite-horizon upper-set",
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{Dims, QMat};
    use crate::scalar::rat;

    fn param21(c0: Rat, c1: Rat) -> AffineParam {
        let dims = Dims::new(2, 1).unwrap();
        AffineParam::new(QMat::from_rows(vec![vec![c0], vec![c1]]).unwrap(), dims).unwrap()
    }

    #[test]
    fn flag_is_nested_along_doubling_horizons() {
        // Doubling the horizon only adds checkpoints, so a flag set at 2N
        // implies the flag at N, for any return pattern.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let returns: Vec<bool> = (0..40).map(|_| rng.gen_bool(0.4)).collect();
            let f10 = divergence_flag(&returns[..10], 0.5, 4);
            let f20 = divergence_flag(&returns[..20], 0.5, 4);
            let f40 = divergence_flag(&returns, 0.5, 4);
            assert!(!f40 || f20, "40 flagged but 20 not: {returns:?}");
            assert!(!f20 || f10, "20 flagged but 10 not: {returns:?}");
        }
        assert!(divergence_flag(&[false; 10], 0.5, 4));
        assert!(!divergence_flag(&[true; 10], 0.5, 4));
    }

    #[test]
    fn rational_subspace_is_mostly_flagged() {
        // Rational A: every fiber is singular, so a coarse grid at a
        // moderate horizon flags most cells.
        let a = param21(rat(1, 2), rat(1, 2));
        let mut budget = Budget::new(1_000_000_000);
        let out = sample_ea(&a, 4, 2.0, 30, 0.3, 0.5, &mut budget).unwrap();
        assert!(
            out.flagged_fraction >= 0.75,
            "fraction {}",
            out.flagged_fraction
        );
        assert!(out.dim_estimate >= 0.0 && out.dim_estimate <= 1.0);
    }

    #[test]
    fn generic_fraction_decreases_with_horizon() {
        let a = param21(
            Rat::from_float(0.3183098861).unwrap(),
            Rat::from_float(0.5772156649).unwrap(),
        );
        let mut budget = Budget::new(4_000_000_000);
        let mut prev = f64::INFINITY;
        for n_steps in [10usize, 20, 40] {
            let out = sample_ea(&a, 8, 2.0, n_steps, 0.3, 0.5, &mut budget).unwrap();
            assert!(
                out.flagged_fraction <= prev + 1e-12,
                "fraction rose at N={n_steps}: {} > {prev}",
                out.flagged_fraction
            );
            prev = out.flagged_fraction;
            assert!(out.dim_estimate >= 0.0 && out.dim_estimate <= 1.0);
        }
    }

    #[test]
    fn resolution_must_be_power_of_two() {
        let a = param21(rat(1, 3), rat(1, 7));
        let mut budget = Budget::default();
        assert!(sample_ea(&a, 3, 1.0, 10, 0.3, 0.5, &mut budget).is_err());
        assert!(sample_ea(&a, 4, 0.0, 10, 0.3, 0.5, &mut budget).is_err());
    }
}
