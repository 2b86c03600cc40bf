//! Static auction mathematics for i.i.d. uniform private values.
//!
//! Every bidder draws its value from `U[v_m, v_M]`. At the symmetric
//! equilibrium of a first-price auction each bidder bids the expected
//! second-highest value conditional on winning, which is also the expected
//! payment of a second-price winner:
//!
//! ```text
//! f(v) = alpha * (v - v_m) + v_m,    alpha = (n - 1) / n
//! ```

use crate::error::{Error, Result};

/// Uniform value distribution on `[v_min, v_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValueDistribution {
    v_min: f64,
    v_max: f64,
}

impl ValueDistribution {
    pub fn new(v_min: f64, v_max: f64) -> Result<Self> {
        if !(v_min.is_finite() && v_max.is_finite() && v_max > v_min) {
            return Err(Error::InvalidDistribution { v_min, v_max });
        }
        Ok(Self { v_min, v_max })
    }

    /// Skips validation; callers guarantee `v_max > v_min`.
    pub(crate) fn new_unchecked(v_min: f64, v_max: f64) -> Self {
        debug_assert!(v_max > v_min);
        Self { v_min, v_max }
    }

    #[inline]
    pub fn v_min(&self) -> f64 {
        self.v_min
    }

    #[inline]
    pub fn v_max(&self) -> f64 {
        self.v_max
    }

    /// Support width `v_M - v_m`.
    #[inline]
    pub fn width(&self) -> f64 {
        self.v_max - self.v_min
    }

    #[inline]
    pub fn contains(&self, v: f64) -> bool {
        v >= self.v_min && v <= self.v_max
    }

    pub fn pdf(&self, v: f64) -> f64 {
        if self.contains(v) {
            1.0 / self.width()
        } else {
            0.0
        }
    }

    /// Clamped to `[0, 1]` outside the support.
    pub fn cdf(&self, v: f64) -> f64 {
        ((v - self.v_min) / self.width()).clamp(0.0, 1.0)
    }

    fn check_support(&self, v: f64) -> Result<()> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(Error::ValueOutOfSupport {
                value: v,
                v_min: self.v_min,
                v_max: self.v_max,
            })
        }
    }
}

/// Number of symmetric bidders and the derived equilibrium bid slope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuctionConfig {
    n: usize,
    alpha: f64,
}

impl AuctionConfig {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewBidders(n));
        }
        Ok(Self {
            n,
            alpha: (n - 1) as f64 / n as f64,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    #[inline]
    pub(crate) fn nf(&self) -> f64 {
        self.n as f64
    }

    /// Expected payment `f(v)` of a winner with value `v`; also the
    /// equilibrium first-price bid.
    pub fn expected_payment(&self, d: &ValueDistribution, v: f64) -> Result<f64> {
        d.check_support(v)?;
        Ok(self.alpha * (v - d.v_min) + d.v_min)
    }

    /// Expected payoff `u(v) = v - f(v) = (v - v_m) / n` of a winner with value `v`.
    pub fn expected_winner_payoff(&self, d: &ValueDistribution, v: f64) -> Result<f64> {
        d.check_support(v)?;
        Ok((v - d.v_min) / self.nf())
    }

    /// Unconditional expected payment `G(v) = P(v)^(n-1) f(v)` of a bidder
    /// holding value `v`.
    pub fn expected_total_payment(&self, d: &ValueDistribution, v: f64) -> Result<f64> {
        let f = self.expected_payment(d, v)?;
        Ok(d.cdf(v).powi(self.n as i32 - 1) * f)
    }

    /// Equilibrium first-price bid, identical to [`Self::expected_payment`].
    pub fn equilibrium_bid(&self, d: &ValueDistribution, v: f64) -> Result<f64> {
        self.expected_payment(d, v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dist(a: f64, b: f64) -> ValueDistribution {
        ValueDistribution::new(a, b).unwrap()
    }

    #[test]
    fn pdf_examples() {
        assert!((dist(10.0, 20.0).pdf(15.0) - 0.1).abs() < 1e-15);
        assert_eq!(dist(10.0, 20.0).pdf(25.0), 0.0);
        assert_eq!(dist(0.0, 1.0).pdf(0.3), 1.0);
    }

    #[test]
    fn cdf_examples() {
        let d = dist(10.0, 20.0);
        assert_eq!(d.cdf(10.0), 0.0);
        assert_eq!(d.cdf(20.0), 1.0);
        assert_eq!(d.cdf(15.0), 0.5);
        assert_eq!(d.cdf(-3.0), 0.0);
        assert_eq!(d.cdf(99.0), 1.0);
    }

    #[test]
    fn rejects_degenerate_support() {
        assert!(ValueDistribution::new(20.0, 10.0).is_err());
        assert!(ValueDistribution::new(5.0, 5.0).is_err());
        assert!(ValueDistribution::new(0.0, f64::INFINITY).is_err());
        assert!(ValueDistribution::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn config_requires_two_bidders() {
        assert_eq!(AuctionConfig::new(1), Err(Error::TooFewBidders(1)));
        let c = AuctionConfig::new(10).unwrap();
        assert_eq!(c.alpha(), 0.9);
        assert_eq!(AuctionConfig::new(2).unwrap().alpha(), 0.5);
    }

    #[test]
    fn expected_payment_examples() {
        let c2 = AuctionConfig::new(2).unwrap();
        let c10 = AuctionConfig::new(10).unwrap();
        assert_eq!(c2.expected_payment(&dist(0.0, 1.0), 0.5).unwrap(), 0.25);
        assert_eq!(c10.expected_payment(&dist(10.0, 20.0), 10.0).unwrap(), 10.0);
        assert!((c10.expected_payment(&dist(10.0, 20.0), 20.0).unwrap() - 19.0).abs() < 1e-12);
        assert!(matches!(
            c10.expected_payment(&dist(10.0, 20.0), 21.0),
            Err(Error::ValueOutOfSupport { .. })
        ));
    }

    #[test]
    fn winner_payoff_examples() {
        let c2 = AuctionConfig::new(2).unwrap();
        let c10 = AuctionConfig::new(10).unwrap();
        assert_eq!(
            c10.expected_winner_payoff(&dist(10.0, 20.0), 10.0).unwrap(),
            0.0
        );
        assert_eq!(
            c10.expected_winner_payoff(&dist(10.0, 20.0), 20.0).unwrap(),
            1.0
        );
        assert_eq!(
            c2.expected_winner_payoff(&dist(0.0, 1.0), 1.0).unwrap(),
            0.5
        );
        assert!(c2.expected_winner_payoff(&dist(0.0, 1.0), -0.1).is_err());
    }

    #[test]
    fn total_payment_examples() {
        let c2 = AuctionConfig::new(2).unwrap();
        let c10 = AuctionConfig::new(10).unwrap();
        assert_eq!(
            c10.expected_total_payment(&dist(10.0, 20.0), 10.0).unwrap(),
            0.0
        );
        assert_eq!(
            c2.expected_total_payment(&dist(0.0, 1.0), 1.0).unwrap(),
            0.5
        );
        let g = c10.expected_total_payment(&dist(10.0, 20.0), 15.0).unwrap();
        assert!((g - 0.5f64.powi(9) * 14.5).abs() < 1e-15);
        assert!((g - 0.02832).abs() < 1e-5);
        assert!(c10.expected_total_payment(&dist(10.0, 20.0), 9.0).is_err());
    }

    /// Composite Simpson rule; test-only quadrature oracle.
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
        assert!(intervals.is_multiple_of(2));
        let h = (b - a) / intervals as f64;
        let mut s = f(a) + f(b);
        for i in 1..intervals {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn equilibrium_payoff_matches_quadrature() {
        for &(n, a, b) in &[
            (2, 0.0, 1.0),
            (3, 0.0, 1.0),
            (10, 10.0, 20.0),
            (7, 20.0, 40.0),
        ] {
            let c = AuctionConfig::new(n).unwrap();
            let d = dist(a, b);
            let integrand = |v: f64| {
                c.expected_winner_payoff(&d, v).unwrap() * d.cdf(v).powi(n as i32 - 1) * d.pdf(v)
            };
            // Per-bidder payoff: win with probability P(v)^(n-1), then earn u(v).
            let q = simpson(integrand, a, b, 4000);
            let closed = d.width() / (c.nf() * (c.nf() + 1.0));
            assert!(
                ((q - closed) / closed).abs() < 1e-10,
                "n={n} q={q} closed={closed}"
            );
            // Summed over the n bidders: the expected winner payoff per auction.
            let per_auction = c.nf() * q;
            assert!((per_auction - d.width() / (c.nf() + 1.0)).abs() < 1e-10 * per_auction);
        }
    }

    proptest! {
        #[test]
        fn payment_and_payoff_identities(
            n in 2usize..40,
            v_min in -50.0f64..50.0,
            width in 1e-3f64..100.0,
            frac in 0.0f64..=1.0,
        ) {
            let c = AuctionConfig::new(n).unwrap();
            let d = dist(v_min, v_min + width);
            let v = (v_min + frac * width).min(d.v_max());
            let f = c.expected_payment(&d, v).unwrap();
            let u = c.expected_winner_payoff(&d, v).unwrap();
            let scale = v.abs().max(1.0);
            prop_assert!(f >= d.v_min() - 1e-12 * scale && f <= v + 1e-12 * scale);
            prop_assert!((u + f - v).abs() <= 1e-12 * scale);
            prop_assert!(u >= 0.0);
            let g = c.expected_total_payment(&d, v).unwrap();
            prop_assert!((g - d.cdf(v).powi(n as i32 - 1) * f).abs() <= 1e-15 * scale);
            if frac < 0.999 {
                let v2 = v + 1e-3 * width;
                prop_assert!(c.expected_payment(&d, v2).unwrap() > f);
            }
        }

        #[test]
        fn cdf_is_monotone_and_bounded(a in -10.0f64..10.0, w in 0.01f64..10.0, x in -30.0f64..30.0, dx in 0.0f64..5.0) {
            let d = dist(a, a + w);
            let (p, q) = (d.cdf(x), d.cdf(x + dx));
            prop_assert!((0.0..=1.0).contains(&p));
            prop_assert!(q >= p);
        }
    }
}
