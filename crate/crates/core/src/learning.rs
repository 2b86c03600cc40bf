//! Adaptive dynamics of a population sharing the linear bidding strategy
//! `b(v) = alpha (v - x) + x`.
//!
//! The intercept `x` follows the payoff gradient of a marginal deviant,
//! `dx/dt = eta * dw(x', x)/dx' |_{x'=x}`, which pulls `x` towards the
//! equilibrium intercept `v_m` at a rate proportional to `1 / (n (n-1) dv)`.

use crate::error::{Error, Result};
use crate::model::{AuctionConfig, ValueDistribution};

/// Shared strategy intercept at simulation time `t`. Never clamped to the
/// current support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearnerState {
    pub x: f64,
    pub t: f64,
}

impl LearnerState {
    pub fn new(x: f64, t: f64) -> Self {
        Self { x, t }
    }
}

/// Learning-rate multiplier and RK4 step size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicsConfig {
    eta: f64,
    h: f64,
}

impl DynamicsConfig {
    pub const DEFAULT_ETA: f64 = 2.0e3;
    pub const DEFAULT_STEP: f64 = 1.0e-3;

    pub fn new(eta: f64, h: f64) -> Result<Self> {
        if !(eta.is_finite() && eta > 0.0) {
            return Err(Error::param(
                "eta",
                format!("must be positive and finite, got {eta}"),
            ));
        }
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::param(
                "h",
                format!("must be positive and finite, got {h}"),
            ));
        }
        Ok(Self { eta, h })
    }

    #[inline]
    pub fn eta(&self) -> f64 {
        self.eta
    }

    #[inline]
    pub fn h(&self) -> f64 {
        self.h
    }
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        Self {
            eta: Self::DEFAULT_ETA,
            h: Self::DEFAULT_STEP,
        }
    }
}

/// Expected payoff `w(x', x)` of one bidder using intercept `x_dev` against
/// `n - 1` opponents using `x_pop`.
///
/// The deviant with value `v'` beats an opponent with value `v` iff
/// `v < v' + (x_dev - x_pop) / (n - 1)`, so its win probability is the
/// clamped cdf of that shifted value raised to `n - 1`. The integral over
/// `v'` splits into a region where the clamp is inactive (polynomial
/// antiderivative) and a region of certain wins; both are evaluated in closed
/// form. Valid for any real `x_dev`, `x_pop`.
pub fn deviant_payoff(cfg: &AuctionConfig, d: &ValueDistribution, x_dev: f64, x_pop: f64) -> f64 {
    let n = cfg.nf();
    let (v_min, v_max, width) = (d.v_min(), d.v_max(), d.width());
    let shift = (x_dev - x_pop) / (n - 1.0);

    let mut total = 0.0;

    let lo = (v_min - shift).max(v_min);
    let hi = (v_max - shift).min(v_max);
    if hi > lo {
        // v' = v_m - shift + width * s, with s the opponents' cdf level.
        let offset = v_min - shift - x_dev;
        let exp = cfg.n() as i32;
        let antiderivative =
            |s: f64| width * width * s.powi(exp + 1) / (n + 1.0) + offset * width * s.powi(exp) / n;
        let s_lo = ((lo + shift - v_min) / width).clamp(0.0, 1.0);
        let s_hi = ((hi + shift - v_min) / width).clamp(0.0, 1.0);
        total += antiderivative(s_hi) - antiderivative(s_lo);
    }

    let sure_lo = (v_max - shift).max(v_min);
    if v_max > sure_lo {
        total += ((v_max - x_dev).powi(2) - (sure_lo - x_dev).powi(2)) / 2.0;
    }

    total / (n * width)
}

/// Raw gradient `dw(x', x)/dx'` at `x' = x`, without the learning rate.
#[inline]
pub fn payoff_gradient(cfg: &AuctionConfig, d: &ValueDistribution, x: f64) -> f64 {
    let n = cfg.nf();
    -(x - d.v_min()) / (n * (n - 1.0) * d.width())
}

/// Per-bidder payoff `w(x, x)` when every bidder uses intercept `x`.
#[inline]
pub fn homogeneous_payoff(cfg: &AuctionConfig, d: &ValueDistribution, x: f64) -> f64 {
    let n = cfg.nf();
    d.width() / (n * (n + 1.0)) - (x - d.v_min()) / (n * n)
}

/// Per-bidder equilibrium payoff, equal to the expected second-price payoff.
#[inline]
pub fn equilibrium_payoff(cfg: &AuctionConfig, d: &ValueDistribution) -> f64 {
    let n = cfg.nf();
    d.width() / (n * (n + 1.0))
}

/// Decay rate of `x - v_m` under the accelerated dynamics.
pub fn relaxation_rate(
    cfg: &AuctionConfig,
    dynamics: &DynamicsConfig,
    d: &ValueDistribution,
) -> f64 {
    let n = cfg.nf();
    dynamics.eta() / (n * (n - 1.0) * d.width())
}

/// One classical RK4 step of `dx/dt = eta * g(x)` with `d` held fixed.
pub fn rk4_step(
    cfg: &AuctionConfig,
    dynamics: &DynamicsConfig,
    state: LearnerState,
    d: &ValueDistribution,
) -> LearnerState {
    rk4_step_with_payoff(cfg, dynamics, state, d).0
}

/// Payoff integrals over one RK4 step, using the step's stage weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepPayoff {
    /// Integral of `w†(x(t))`.
    pub dagger: f64,
    /// Integral of `w†(x(t)) - w*`, accumulated from `-(x - v_m) / n^2`
    /// directly so that it carries no cancellation error.
    pub excess: f64,
}

/// RK4 step that also integrates `w†(x(t))` over the step with the same
/// stage weights.
///
/// Because `w†(x) - w*` is proportional to `g(x)`, the excess satisfies
/// `excess = alpha dv (x_next - x) / eta` up to rounding.
pub fn rk4_step_with_payoff(
    cfg: &AuctionConfig,
    dynamics: &DynamicsConfig,
    state: LearnerState,
    d: &ValueDistribution,
) -> (LearnerState, StepPayoff) {
    let h = dynamics.h();
    let eta = dynamics.eta();
    let rhs = |x: f64| eta * payoff_gradient(cfg, d, x);

    let x1 = state.x;
    let k1 = rhs(x1);
    let x2 = x1 + 0.5 * h * k1;
    let k2 = rhs(x2);
    let x3 = x1 + 0.5 * h * k2;
    let k3 = rhs(x3);
    let x4 = x1 + h * k3;
    let k4 = rhs(x4);

    let x_next = x1 + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    let w = |x: f64| homogeneous_payoff(cfg, d, x);
    let dagger = h / 6.0 * (w(x1) + 2.0 * w(x2) + 2.0 * w(x3) + w(x4));
    let n2 = cfg.nf() * cfg.nf();
    let below = |x: f64| -(x - d.v_min()) / n2;
    let excess = h / 6.0 * (below(x1) + 2.0 * below(x2) + 2.0 * below(x3) + below(x4));

    (
        LearnerState::new(x_next, state.t + h),
        StepPayoff { dagger, excess },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg(n: usize) -> AuctionConfig {
        AuctionConfig::new(n).unwrap()
    }

    fn dist(a: f64, b: f64) -> ValueDistribution {
        ValueDistribution::new(a, b).unwrap()
    }

    #[test]
    fn deviant_payoff_examples() {
        let d = dist(10.0, 20.0);
        let c = cfg(10);
        assert!((deviant_payoff(&c, &d, 10.0, 10.0) - 10.0 / 110.0).abs() < 1e-15);
        let w = deviant_payoff(&c, &d, 15.0, 15.0);
        assert!((w - (10.0 / 110.0 - 5.0 / 100.0)).abs() < 1e-14);
        assert!((w - 0.040909).abs() < 1e-6);
    }

    #[test]
    fn deviant_payoff_extremes() {
        let c = cfg(4);
        let d = dist(0.0, 1.0);
        // Always wins: payoff is E[(v - x_dev)] / n.
        let always = deviant_payoff(&c, &d, 50.0, 0.0);
        assert!((always - (0.5 - 50.0) / 4.0).abs() < 1e-12);
        // Never wins.
        assert_eq!(deviant_payoff(&c, &d, -50.0, 0.0), 0.0);
    }

    #[test]
    fn gradient_examples() {
        let c = cfg(10);
        let d = dist(10.0, 20.0);
        assert_eq!(payoff_gradient(&c, &d, 10.0), 0.0);
        assert!((payoff_gradient(&c, &d, 15.0) + 1.0 / 180.0).abs() < 1e-16);
        assert!((payoff_gradient(&c, &d, 5.0) - 1.0 / 180.0).abs() < 1e-16);
    }

    #[test]
    fn homogeneous_and_equilibrium_examples() {
        let c = cfg(10);
        let d = dist(10.0, 20.0);
        assert_eq!(homogeneous_payoff(&c, &d, 10.0), equilibrium_payoff(&c, &d));
        assert!((homogeneous_payoff(&c, &d, 15.0) - 0.040909).abs() < 1e-6);
        assert!((homogeneous_payoff(&c, &dist(20.0, 40.0), 20.0) - 20.0 / 110.0).abs() < 1e-15);
        assert!((equilibrium_payoff(&c, &d) - 1.0 / 11.0).abs() < 1e-16);
        assert!((equilibrium_payoff(&c, &dist(20.0, 40.0)) - 2.0 / 11.0).abs() < 1e-16);
        assert_eq!(
            equilibrium_payoff(&c, &dist(0.0, 10.0)),
            equilibrium_payoff(&c, &dist(10.0, 20.0))
        );
    }

    #[test]
    fn rk4_fixed_point() {
        let c = cfg(10);
        let d = dist(10.0, 20.0);
        let s = rk4_step(
            &c,
            &DynamicsConfig::default(),
            LearnerState::new(10.0, 0.0),
            &d,
        );
        assert_eq!(s.x, 10.0);
        assert_eq!(s.t, 1e-3);
    }

    #[test]
    fn rk4_matches_exponential_solution() {
        let c = cfg(10);
        let d = dist(10.0, 20.0);
        let dy = DynamicsConfig::default();
        let lambda = relaxation_rate(&c, &dy, &d);
        assert!((lambda - 20.0 / 9.0).abs() < 1e-14);
        let s = rk4_step(&c, &dy, LearnerState::new(15.0, 0.0), &d);
        let exact = 10.0 + 5.0 * (-lambda * dy.h()).exp();
        assert!(((s.x - exact) / exact).abs() <= 1e-10);
    }

    #[test]
    fn rk4_two_half_steps_vs_one_full_step() {
        let c = cfg(10);
        let d = dist(10.0, 20.0);
        let small = DynamicsConfig::new(2000.0, 1e-3).unwrap();
        let big = DynamicsConfig::new(2000.0, 2e-3).unwrap();
        let s0 = LearnerState::new(15.0, 0.0);
        let two = rk4_step(&c, &small, rk4_step(&c, &small, s0, &d), &d);
        let one = rk4_step(&c, &big, s0, &d);
        // Local error of RK4 is O(h^5); with lambda*h ~ 4e-3 this is ~1e-14 here.
        let z: f64 = relaxation_rate(&c, &big, &d) * big.h();
        assert!((two.x - one.x).abs() <= 5.0 * z.powi(5));
        assert!((two.t - one.t).abs() < 1e-15);
    }

    #[test]
    fn stage_weighted_payoff_telescopes() {
        let c = cfg(10);
        let d = dist(20.0, 40.0);
        let dy = DynamicsConfig::default();
        let (next, p) = rk4_step_with_payoff(&c, &dy, LearnerState::new(12.0, 0.0), &d);
        let lhs = p.dagger - dy.h() * equilibrium_payoff(&c, &d);
        let rhs = c.alpha() * d.width() * (next.x - 12.0) / dy.eta();
        assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs(), "{lhs} vs {rhs}");
        assert!(
            (p.excess - rhs).abs() <= 1e-12 * rhs.abs(),
            "{} vs {rhs}",
            p.excess
        );

        let (_, p) = rk4_step_with_payoff(&c, &dy, LearnerState::new(20.0, 0.0), &d);
        assert_eq!(p.excess, 0.0);
    }

    #[test]
    fn trajectory_contracts_exponentially() {
        let c = cfg(10);
        let d = dist(10.0, 20.0);
        let dy = DynamicsConfig::default();
        let lambda = relaxation_rate(&c, &dy, &d);
        for &x0 in &[25.0, 10.5, -3.0] {
            let mut s = LearnerState::new(x0, 0.0);
            for k in 1..=5000 {
                s = rk4_step(&c, &dy, s, &d);
                let t = k as f64 * dy.h();
                let envelope = (x0 - 10.0_f64).abs() * (-lambda * t).exp() * (1.0 + 1e-6);
                assert!((s.x - 10.0).abs() <= envelope, "x0={x0} k={k}");
            }
        }
    }

    proptest! {
        #[test]
        fn continuity_across_diagonal(
            n in 2usize..30,
            v_min in -20.0f64..50.0,
            width in 0.1f64..50.0,
            xf in -1.0f64..2.0,
        ) {
            let c = cfg(n);
            let d = dist(v_min, v_min + width);
            let x = v_min + xf * width;
            let eps = 1e-9 * width;
            let at = deviant_payoff(&c, &d, x, x);
            let left = deviant_payoff(&c, &d, x - eps, x);
            let right = deviant_payoff(&c, &d, x + eps, x);
            let slope_bound = 1.0 / (n as f64) * (1.0 + xf.abs());
            prop_assert!((left - at).abs() <= 1e-12 + 2.0 * slope_bound * eps);
            prop_assert!((right - at).abs() <= 1e-12 + 2.0 * slope_bound * eps);
            prop_assert!((at - homogeneous_payoff(&c, &d, x)).abs() <= 1e-12 * (1.0 + at.abs()));
        }

        #[test]
        fn payoff_gap_identity(
            n in 2usize..50,
            v_min in -20.0f64..50.0,
            width in 0.1f64..50.0,
            xf in -2.0f64..3.0,
        ) {
            let c = cfg(n);
            let d = dist(v_min, v_min + width);
            let x = v_min + xf * width;
            let nf = n as f64;
            let lhs = homogeneous_payoff(&c, &d, x) - equilibrium_payoff(&c, &d);
            let via_gradient = c.alpha() * d.width() * payoff_gradient(&c, &d, x);
            let direct = -(x - v_min) / (nf * nf);
            let tol = 1e-12 * (1.0 + direct.abs() + equilibrium_payoff(&c, &d));
            prop_assert!((lhs - direct).abs() <= tol);
            prop_assert!((via_gradient - direct).abs() <= tol);
        }

        #[test]
        fn gradient_points_towards_equilibrium(
            n in 2usize..50,
            v_min in -20.0f64..50.0,
            width in 0.1f64..50.0,
            xf in -2.0f64..3.0,
        ) {
            let c = cfg(n);
            let d = dist(v_min, v_min + width);
            let x = v_min + xf * width;
            let g = payoff_gradient(&c, &d, x);
            prop_assert!(g * (x - v_min) <= 0.0);
            if x != v_min {
                prop_assert!(g * (x - v_min) < 0.0);
            } else {
                prop_assert!(g == 0.0);
            }
        }
    }
}
