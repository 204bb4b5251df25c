use num_traits::{FromPrimitive, Num};

use crate::algebra::Dims;
use crate::error::{Error, Result};

/// Scalar bound on the numeric types the bound formulas run over: doubles
/// for everyday use, exact rationals for the symbolic identity checks.
pub trait BoundScalar: Clone + Num + FromPrimitive + PartialOrd {}
impl<T: Clone + Num + FromPrimitive + PartialOrd> BoundScalar for T {}

fn c<T: BoundScalar>(x: usize) -> T {
    T::from_usize(x).expect("small integer fits")
}

/// Dirichlet floor (n-d)/(d+1), below which no omega is admissible.
pub fn dirichlet_floor<T: BoundScalar>(dims: Dims) -> T {
    c::<T>(dims.n() - dims.d()) / c::<T>(dims.d() + 1)
}

/// The dimension upper bound as a function of omega:
///   omega <  n-1 : d^2/(d+1) + n d (omega - floor) / ((1 + (d+1) omega - (n-d)) (n+1))
///   n-1 <= omega < n : d^2/(d+1) + (omega - floor) / (n+1)
///   omega >= n   : d
/// Infinite omega is accepted through `dim_bound_inf`.
pub fn dim_bound<T: BoundScalar>(omega: T, dims: Dims) -> Result<T> {
    let n = dims.n();
    let d = dims.d();
    let floor: T = dirichlet_floor(dims);
    if omega < floor {
        return Err(Error::Invalid("omega below the Dirichlet floor".into()));
    }
    let base = c::<T>(d * d) / c::<T>(d + 1);
    let excess = omega.clone() - floor;
    if omega >= c::<T>(n) {
        Ok(c::<T>(d))
    } else if omega < c::<T>(n - 1) {
        let den = (c::<T>(1) + c::<T>(d + 1) * omega - c::<T>(n - d)) * c::<T>(n + 1);
        Ok(base + c::<T>(n * d) * excess / den)
    } else {
        Ok(base + excess / c::<T>(n + 1))
    }
}

/// dim_bound at omega = +infinity.
pub fn dim_bound_inf<T: BoundScalar>(dims: Dims) -> T {
    c::<T>(dims.d())
}

/// The exponent bound rho(y_A) <= rho_bound(omega, theta) for omega < n:
///   omega <  n-1 : theta n (d+1)(omega - floor) / ((1 + (d+1) omega - (n-d)) (n+1))
///   n-1 <= omega < n : theta (omega - floor)(d+1) / (d (n+1))
pub fn rho_bound<T: BoundScalar>(omega: T, theta: T, dims: Dims) -> Result<T> {
    let n = dims.n();
    let d = dims.d();
    let floor: T = dirichlet_floor(dims);
    if omega < floor || omega >= c::<T>(n) {
        return Err(Error::Invalid("omega out of [floor, n)".into()));
    }
    let excess = omega.clone() - floor;
    if omega < c::<T>(n - 1) {
        let den = (c::<T>(1) + c::<T>(d + 1) * omega - c::<T>(n - d)) * c::<T>(n + 1);
        Ok(theta * c::<T>(n * (d + 1)) * excess / den)
    } else {
        Ok(theta * excess * c::<T>(d + 1) / c::<T>(d * (n + 1)))
    }
}

/// The three case-by-case lower bounds on omega recovered from a measured
/// exponent rho0 < theta, combined by taking their minimum. Cases whose
/// denominator is nonpositive impose no constraint and are skipped.
pub fn omega_lower_from_rho<T: BoundScalar>(rho0: T, theta: T, dims: Dims) -> Result<T> {
    if rho0 < T::zero() || !(rho0 < theta) {
        return Err(Error::Invalid("need 0 <= rho0 < theta".into()));
    }
    let n = dims.n();
    let d = dims.d();
    let floor: T = dirichlet_floor(dims);
    let r = rho0 / theta; // theta^{-1} rho0
    let rn1 = r.clone() * c::<T>(n + 1);

    // Case 1.2 is always defined.
    let case12 = floor.clone() + c::<T>(d) * rn1.clone() / c::<T>(d + 1);
    let mut best = case12;

    // Case 1.1: floor + rn1 / ((n-d) - rn1), requires (n-d) > rn1.
    let den11 = c::<T>(n - d) - rn1.clone();
    if den11 > T::zero() {
        let case11 = floor.clone() + rn1.clone() / den11;
        if case11 < best {
            best = case11;
        }
    }

    // Case 2: floor + rn1 / ((d+1)(n - rn1)), requires n > rn1.
    let den2 = c::<T>(n) - rn1.clone();
    if den2 > T::zero() {
        let case2 = floor + rn1 / (c::<T>(d + 1) * den2);
        if case2 < best {
            best = case2;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, rat_i, Rat};
    use rand::{Rng, SeedableRng};

    fn dims(n: usize, d: usize) -> Dims {
        Dims::new(n, d).unwrap()
    }

    #[test]
    fn endpoint_values() {
        let d21 = dims(2, 1);
        // omega = floor -> d^2/(d+1).
        let v = dim_bound(rat(1, 2), d21).unwrap();
        assert_eq!(v, rat(1, 2));
        // omega = n - 1 = 1: both case formulas give 2/3.
        let v1 = dim_bound(rat_i(1), d21).unwrap();
        assert_eq!(v1, rat(2, 3));
        // omega >= n -> d.
        assert_eq!(dim_bound(rat_i(5), d21).unwrap(), rat_i(1));
        assert_eq!(dim_bound_inf::<Rat>(d21), rat_i(1));
        assert_eq!(dim_bound(f64::INFINITY, d21).unwrap(), 1.0);
    }

    #[test]
    fn continuity_at_case_boundary() {
        // Exact agreement of the two case formulas at omega = n-1.
        for (n, d) in [(2usize, 1usize), (3, 1), (3, 2), (4, 2), (5, 3)] {
            let dm = dims(n, d);
            let omega = rat_i(n as i64 - 1);
            let base = rat((d * d) as i64, (d + 1) as i64);
            let excess = &omega - dirichlet_floor::<Rat>(dm);
            let case1 = &base
                + rat((n * d) as i64, 1) * &excess
                    / ((rat_i(1) + rat_i((d + 1) as i64) * &omega - rat_i((n - d) as i64))
                        * rat_i((n + 1) as i64));
            let case2 = &base + &excess / rat_i((n + 1) as i64);
            assert_eq!(case1, case2, "n={n} d={d}");
        }
    }

    #[test]
    fn monotone_and_in_range_on_grid() {
        for (n, d) in [(2usize, 1usize), (3, 2), (4, 2)] {
            let dm = dims(n, d);
            let floor: f64 = dirichlet_floor(dm);
            let lo = d as f64 * d as f64 / (d as f64 + 1.0);
            let mut prev = -1.0f64;
            for i in 0..=10_000 {
                let omega = floor + (n as f64 + 1.0 - floor) * i as f64 / 10_000.0;
                let v: f64 = dim_bound(omega, dm).unwrap();
                assert!(v >= prev - 1e-12, "not monotone at omega={omega}");
                assert!(v >= lo - 1e-12 && v <= d as f64 + 1e-12);
                prev = v;
            }
        }
    }

    #[test]
    fn rho_bound_below_theta() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let (n, d) = *[(2usize, 1usize), (3, 1), (3, 2), (4, 2), (5, 3)]
                .iter()
                .nth(rng.gen_range(0..5))
                .unwrap();
            let dm = dims(n, d);
            let floor: f64 = dirichlet_floor(dm);
            let omega = floor + (n as f64 - floor) * rng.gen_range(0.0..0.999);
            let theta = rng.gen_range(0.05..d as f64 / (d as f64 + 1.0));
            let rho = rho_bound(omega, theta, dm).unwrap();
            assert!(rho < theta, "rho {rho} theta {theta}");
            assert!(rho >= -1e-12);
        }
    }

    #[test]
    fn inverse_round_trip() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let (n, d) = *[(2usize, 1usize), (3, 1), (3, 2), (4, 2)]
                .iter()
                .nth(rng.gen_range(0..4))
                .unwrap();
            let dm = dims(n, d);
            let floor: f64 = dirichlet_floor(dm);
            let omega = floor + (n as f64 - floor) * rng.gen_range(0.0..0.999);
            let theta = rng.gen_range(0.05..d as f64 / (d as f64 + 1.0));
            let rho = rho_bound(omega, theta, dm).unwrap();
            let back = omega_lower_from_rho(rho, theta, dm).unwrap();
            assert!(
                (back - omega).abs() < 1e-9,
                "omega {omega} back {back} (n={n}, d={d})"
            );
        }
    }

    #[test]
    fn case_crossover_identity() {
        // At rho0 = (dn-1) theta / (d(n+1)), cases 1.2 and 2 agree.
        for (n, d) in [(2usize, 1usize), (3, 2), (4, 2), (5, 3)] {
            let dm = dims(n, d);
            let theta = rat(2, 5);
            let rho0 = rat((d * n - 1) as i64, (d * (n + 1)) as i64) * &theta;
            let floor = dirichlet_floor::<Rat>(dm);
            let r = &rho0 / &theta;
            let rn1 = &r * rat_i((n + 1) as i64);
            let case12 = &floor + rat_i(d as i64) * &rn1 / rat_i((d + 1) as i64);
            let den2 = rat_i(n as i64) - &rn1;
            let case2 = &floor + &rn1 / (rat_i((d + 1) as i64) * den2);
            assert_eq!(case12, case2, "n={n} d={d}");
        }
    }

    #[test]
    fn case2_dominates_case11() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let (n, d) = *[(2usize, 1usize), (3, 1), (3, 2), (4, 2)]
                .iter()
                .nth(rng.gen_range(0..4))
                .unwrap();
            let dm = dims(n, d);
            let theta = rng.gen_range(0.1..d as f64 / (d as f64 + 1.0));
            let rho0 = rng.gen_range(0.0..theta * 0.999);
            let r = rho0 / theta;
            let rn1 = r * (n as f64 + 1.0);
            let floor: f64 = dirichlet_floor(dm);
            let den11 = (n - d) as f64 - rn1;
            let den2 = n as f64 - rn1;
            if den11 > 1e-9 && den2 > 1e-9 {
                let case11 = floor + rn1 / den11;
                let case2 = floor + rn1 / ((d as f64 + 1.0) * den2);
                assert!(case2 < case11 + 1e-12);
            }
        }
    }

    #[test]
    fn rho_zero_gives_floor() {
        let dm = dims(3, 2);
        let v = omega_lower_from_rho(rat_i(0), rat(1, 2), dm).unwrap();
        assert_eq!(v, dirichlet_floor::<Rat>(dm));
    }
}
