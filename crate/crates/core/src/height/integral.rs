use crate::algebra::FlowKind;
use crate::error::{Error, Result};
use crate::lattice::{Factor, LatticePoint};
use crate::scalar::{lsq_slope, Budget, ExtendedReal};

use super::alpha::alpha;
use super::HeightParams;

/// Smoothed height: a quadrature of int_0^{T_max} e^{-delta t} alpha(b_t y) dt
/// with an explicit error estimate (step-halving difference plus tail bound).
#[derive(Debug, Clone)]
pub struct AlphaTilde {
    pub value: ExtendedReal,
    pub quadrature_error: f64,
    /// Flow time at which alpha was found infinite, if it was.
    pub blew_up_at: Option<f64>,
}

pub fn alpha_tilde(
    y: &LatticePoint,
    params: &HeightParams,
    budget: &mut Budget,
) -> Result<AlphaTilde> {
    params.validate(y.dims())?;
    let mut steps = (params.t_max / params.h).round() as usize;
    if steps % 2 == 1 {
        steps += 1;
    }
    let steps = steps.max(2);
    let h = params.t_max / steps as f64;
    let mut f = Vec::with_capacity(steps + 1);
    let mut max_alpha: f64 = 0.0;
    for j in 0..=steps {
        let t = j as f64 * h;
        let pushed = y.translated(Factor::Flow {
            kind: FlowKind::B,
            t,
        })?;
        let a = alpha(&pushed, params, budget)?.value;
        if a.is_infinite() {
            return Ok(AlphaTilde {
                value: ExtendedReal::Infinite,
                quadrature_error: 0.0,
                blew_up_at: Some(t),
            });
        }
        let av = a.value();
        max_alpha = max_alpha.max(av);
        f.push((-params.delta * t).exp() * av);
    }
    let trap = |stride: usize| -> f64 {
        let hh = h * stride as f64;
        let pts: Vec<f64> = f.iter().copied().step_by(stride).collect();
        let inner: f64 = pts[1..pts.len() - 1].iter().sum();
        hh * (0.5 * pts[0] + inner + 0.5 * pts[pts.len() - 1])
    };
    let fine = trap(1);
    let coarse = trap(2);
    let tail = (-params.delta * params.t_max).exp() * max_alpha / params.delta;
    Ok(AlphaTilde {
        value: ExtendedReal::from_value(fine + tail),
        quadrature_error: (fine - coarse).abs() + tail,
        blew_up_at: None,
    })
}

/// Finite-horizon reading of rho(y) = limsup_t log alpha(b_t y) / t: the max
/// of log alpha / t over the upper half of the sample grid, with the
/// least-squares slope of log alpha against t reported alongside.
#[derive(Debug, Clone)]
pub struct RhoEstimate {
    /// The estimated growth rate itself (may be negative); +infinity when
    /// alpha blew up inside the horizon.
    pub rho: f64,
    pub slope_fit: f64,
    /// (t, ln alpha(b_t y)) samples; ln is -inf where alpha = 0.
    pub samples: Vec<(f64, f64)>,
}

pub fn rho_estimate(
    y: &LatticePoint,
    params: &HeightParams,
    horizon: f64,
    grid: usize,
    budget: &mut Budget,
) -> Result<RhoEstimate> {
    if horizon <= 0.0 || grid < 8 {
        return Err(Error::Invalid("need horizon > 0 and grid >= 8".into()));
    }
    let mut samples = Vec::with_capacity(grid);
    for i in 1..=grid {
        let t = horizon * i as f64 / grid as f64;
        let pushed = y.translated(Factor::Flow {
            kind: FlowKind::B,
            t,
        })?;
        let a = alpha(&pushed, params, budget)?.value;
        if a.is_infinite() {
            samples.push((t, f64::INFINITY));
            return Ok(RhoEstimate {
                rho: f64::INFINITY,
                slope_fit: f64::INFINITY,
                samples,
            });
        }
        samples.push((t, a.ln_value()));
    }
    let upper = &samples[grid / 2..];
    let rho_max = upper
        .iter()
        .map(|(t, ln_a)| ln_a / t)
        .fold(f64::NEG_INFINITY, f64::max);
    let finite: Vec<(f64, f64)> = samples
        .iter()
        .copied()
        .filter(|(_, ln_a)| ln_a.is_finite())
        .collect();
    let slope = if finite.len() >= 2 {
        let xs: Vec<f64> = finite.iter().map(|s| s.0).collect();
        let ys: Vec<f64> = finite.iter().map(|s| s.1).collect();
        lsq_slope(&xs, &ys)
    } else {
        f64::NAN
    };
    Ok(RhoEstimate {
        rho: rho_max,
        slope_fit: slope,
        samples,
    })
}
