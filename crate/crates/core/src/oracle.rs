//! Monte-Carlo auction simulator.
//!
//! Draws private values, applies bidding strategies, clears each auction
//! bid by bid and averages the outcomes. Nothing here uses the closed-form
//! payoff formulas, so estimates can be compared against them.
//!
//! Samples are processed in fixed-size blocks, each with its own random
//! substream, and block statistics are merged in block order. Estimates are
//! therefore identical for any thread count.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{AuctionConfig, ValueDistribution};
use crate::rng::{stream, Purpose, SimRng};
use crate::stats::RunningStats;

/// Smallest sample count accepted by the estimators.
pub const MIN_SAMPLES: u64 = 10_000;

const BLOCK: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuctionKind {
    FirstPrice,
    SecondPrice,
}

/// Outcome of one auction. Losers receive zero payoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Clearing {
    pub winner: usize,
    pub payment: f64,
    pub winner_payoff: f64,
}

/// Clears a sealed-bid auction; ties for the highest bid are broken
/// uniformly at random.
pub fn clear_auction<R: Rng + ?Sized>(
    kind: AuctionKind,
    bids: &[f64],
    values: &[f64],
    rng: &mut R,
) -> Result<Clearing> {
    if bids.len() != values.len() {
        return Err(Error::LengthMismatch {
            bids: bids.len(),
            values: values.len(),
        });
    }
    if bids.len() < 2 {
        return Err(Error::TooFewBidders(bids.len()));
    }
    Ok(clear_unchecked(kind, bids, values, rng))
}

#[inline]
fn clear_unchecked<R: Rng + ?Sized>(
    kind: AuctionKind,
    bids: &[f64],
    values: &[f64],
    rng: &mut R,
) -> Clearing {
    let mut best = f64::NEG_INFINITY;
    let mut second = f64::NEG_INFINITY;
    let mut winner = 0;
    let mut tied = 0u32;
    for (i, &b) in bids.iter().enumerate() {
        if b > best {
            second = best;
            best = b;
            winner = i;
            tied = 1;
        } else {
            if b == best {
                tied += 1;
                if rng.random_range(0..tied) == 0 {
                    winner = i;
                }
            }
            if b > second {
                second = b;
            }
        }
    }
    let payment = match kind {
        AuctionKind::FirstPrice => best,
        AuctionKind::SecondPrice => second,
    };
    Clearing {
        winner,
        payment,
        winner_payoff: values[winner] - payment,
    }
}

/// Bidding strategies of all `n` bidders.
#[derive(Debug, Clone, PartialEq)]
pub enum StrategyProfile {
    /// `b_i(v) = slope (v - x_i) + x_i` with a per-bidder intercept.
    LinearFirstPrice { x_values: Vec<f64> },
    /// `b(v) = v`.
    Truthful,
}

impl StrategyProfile {
    pub fn linear(cfg: &AuctionConfig, x_values: Vec<f64>) -> Result<Self> {
        if x_values.len() != cfg.n() {
            return Err(Error::param(
                "x_values",
                format!("expected {} intercepts, got {}", cfg.n(), x_values.len()),
            ));
        }
        Ok(StrategyProfile::LinearFirstPrice { x_values })
    }

    pub fn homogeneous(cfg: &AuctionConfig, x: f64) -> Self {
        StrategyProfile::LinearFirstPrice {
            x_values: vec![x; cfg.n()],
        }
    }

    #[inline]
    pub fn bid(&self, slope: f64, bidder: usize, value: f64) -> f64 {
        match self {
            StrategyProfile::LinearFirstPrice { x_values } => {
                let x = x_values[bidder];
                slope * (value - x) + x
            }
            StrategyProfile::Truthful => value,
        }
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: u64,
}

impl McEstimate {
    fn from_stats(stats: &RunningStats) -> Self {
        Self {
            mean: stats.mean(),
            std_error: stats.std_error(),
            n_samples: stats.count(),
        }
    }

    /// Standardised distance from a reference value.
    pub fn z_score(&self, expected: f64) -> f64 {
        let diff = self.mean - expected;
        if self.std_error > 0.0 {
            diff / self.std_error
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY * diff.signum()
        }
    }

    /// Standardised difference between two independent estimates.
    pub fn combined_z(&self, other: &McEstimate) -> f64 {
        let se = self.std_error.hypot(other.std_error);
        let diff = self.mean - other.mean;
        if se > 0.0 {
            diff / se
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY * diff.signum()
        }
    }

    pub fn within(&self, expected: f64, k: f64) -> bool {
        self.z_score(expected).abs() <= k
    }
}

fn check_samples(samples: u64) -> Result<()> {
    if samples < MIN_SAMPLES {
        return Err(Error::TooFewSamples {
            min: MIN_SAMPLES,
            got: samples,
        });
    }
    Ok(())
}

/// Runs `samples` draws split into fixed blocks; `body` fills one block.
fn run_blocks<T, F>(samples: u64, seed: u64, purpose: Purpose, body: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut SimRng, u64) -> T + Sync,
{
    let blocks = samples.div_ceil(BLOCK);
    (0..blocks)
        .into_par_iter()
        .map(|b| {
            let count = BLOCK.min(samples - b * BLOCK);
            let mut rng = stream(seed, purpose, b);
            body(&mut rng, count)
        })
        .collect()
}

fn merged(parts: &[RunningStats]) -> RunningStats {
    let mut total = RunningStats::default();
    for p in parts {
        total.merge(p);
    }
    total
}

#[inline]
fn draw_values(rng: &mut SimRng, d: &ValueDistribution, out: &mut [f64]) {
    let (lo, width) = (d.v_min(), d.width());
    for v in out.iter_mut() {
        *v = lo + width * rng.random::<f64>();
    }
}

/// Which per-auction quantity an estimator averages.
#[derive(Debug, Clone, Copy)]
enum Observable {
    /// Seller revenue (the payment).
    Revenue,
    /// Winner payoff divided by `n`: per-bidder payoff under symmetry.
    PerBidderPayoff,
    /// Payoff of bidder 0.
    FocalPayoff,
}

#[allow(clippy::too_many_arguments)]
fn estimate(
    n: usize,
    slope: f64,
    d: &ValueDistribution,
    kind: AuctionKind,
    profile: &StrategyProfile,
    observable: Observable,
    samples: u64,
    seed: u64,
    purpose: Purpose,
) -> McEstimate {
    let parts = run_blocks(samples, seed, purpose, |rng, count| {
        let mut values = vec![0.0; n];
        let mut bids = vec![0.0; n];
        let mut stats = RunningStats::default();
        for _ in 0..count {
            draw_values(rng, d, &mut values);
            for (i, (b, &v)) in bids.iter_mut().zip(&values).enumerate() {
                *b = profile.bid(slope, i, v);
            }
            let c = clear_unchecked(kind, &bids, &values, rng);
            let sample = match observable {
                Observable::Revenue => c.payment,
                Observable::PerBidderPayoff => c.winner_payoff / n as f64,
                Observable::FocalPayoff => {
                    if c.winner == 0 {
                        c.winner_payoff
                    } else {
                        0.0
                    }
                }
            };
            stats.push(sample);
        }
        stats
    });
    McEstimate::from_stats(&merged(&parts))
}

/// Expected seller revenue with an explicit bid slope for linear strategies.
pub fn estimate_revenue(
    cfg: &AuctionConfig,
    slope: f64,
    d: &ValueDistribution,
    kind: AuctionKind,
    profile: &StrategyProfile,
    samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    check_samples(samples)?;
    let purpose = match kind {
        AuctionKind::FirstPrice => Purpose::FirstPrice,
        AuctionKind::SecondPrice => Purpose::SecondPrice,
    };
    Ok(estimate(
        cfg.n(),
        slope,
        d,
        kind,
        profile,
        Observable::Revenue,
        samples,
        seed,
        purpose,
    ))
}

/// Per-bidder first-price payoff when everyone bids `alpha (v - x) + x`.
pub fn estimate_homogeneous_payoff(
    cfg: &AuctionConfig,
    d: &ValueDistribution,
    x: f64,
    samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    check_samples(samples)?;
    let profile = StrategyProfile::homogeneous(cfg, x);
    Ok(estimate(
        cfg.n(),
        cfg.alpha(),
        d,
        AuctionKind::FirstPrice,
        &profile,
        Observable::PerBidderPayoff,
        samples,
        seed,
        Purpose::Homogeneous,
    ))
}

/// First-price payoff of one bidder using `x_dev` against `n - 1` bidders
/// using `x_pop`.
pub fn estimate_deviant_payoff(
    cfg: &AuctionConfig,
    d: &ValueDistribution,
    x_dev: f64,
    x_pop: f64,
    samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    check_samples(samples)?;
    let mut x_values = vec![x_pop; cfg.n()];
    x_values[0] = x_dev;
    let profile = StrategyProfile::LinearFirstPrice { x_values };
    Ok(estimate(
        cfg.n(),
        cfg.alpha(),
        d,
        AuctionKind::FirstPrice,
        &profile,
        Observable::FocalPayoff,
        samples,
        seed,
        Purpose::Deviant,
    ))
}

/// Payoff of bidder 0 under arbitrary bid functions for it and the others.
pub fn estimate_focal_payoff<F, G>(
    cfg: &AuctionConfig,
    d: &ValueDistribution,
    kind: AuctionKind,
    focal_bid: F,
    others_bid: G,
    samples: u64,
    seed: u64,
) -> Result<McEstimate>
where
    F: Fn(f64) -> f64 + Sync,
    G: Fn(f64) -> f64 + Sync,
{
    check_samples(samples)?;
    let n = cfg.n();
    let parts = run_blocks(samples, seed, Purpose::Focal, |rng, count| {
        let mut values = vec![0.0; n];
        let mut bids = vec![0.0; n];
        let mut stats = RunningStats::default();
        for _ in 0..count {
            draw_values(rng, d, &mut values);
            bids[0] = focal_bid(values[0]);
            for i in 1..n {
                bids[i] = others_bid(values[i]);
            }
            let c = clear_unchecked(kind, &bids, &values, rng);
            stats.push(if c.winner == 0 { c.winner_payoff } else { 0.0 });
        }
        stats
    });
    Ok(McEstimate::from_stats(&merged(&parts)))
}

/// Revenue under first-price equilibrium bidding and second-price truthful
/// bidding, from independent streams.
pub fn check_static_revenue_equivalence(
    cfg: &AuctionConfig,
    d: &ValueDistribution,
    samples: u64,
    seed: u64,
) -> Result<(McEstimate, McEstimate)> {
    check_static_revenue_equivalence_with_slope(cfg, cfg.alpha(), d, samples, seed)
}

/// As [`check_static_revenue_equivalence`] but with the first-price bid
/// slope supplied by the caller (used for fault injection).
pub fn check_static_revenue_equivalence_with_slope(
    cfg: &AuctionConfig,
    slope: f64,
    d: &ValueDistribution,
    samples: u64,
    seed: u64,
) -> Result<(McEstimate, McEstimate)> {
    let equilibrium = StrategyProfile::homogeneous(cfg, d.v_min());
    let first = estimate_revenue(
        cfg,
        slope,
        d,
        AuctionKind::FirstPrice,
        &equilibrium,
        samples,
        seed,
    )?;
    let second = estimate_revenue(
        cfg,
        slope,
        d,
        AuctionKind::SecondPrice,
        &StrategyProfile::Truthful,
        samples,
        seed,
    )?;
    Ok((first, second))
}

/// Second-price payments grouped by the winner's value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PaymentBin {
    pub lo: f64,
    pub hi: f64,
    pub payment: McEstimate,
    /// Paired residual `payment - f(v_winner)`; zero-mean when the
    /// conditional payment formula holds.
    pub residual: McEstimate,
}

/// Truthful second-price auctions binned into `bins` equal-width bins of the
/// winner's value; `expected_payment` is the formula under test.
pub fn conditional_payment_bins<F>(
    cfg: &AuctionConfig,
    d: &ValueDistribution,
    bins: usize,
    expected_payment: F,
    samples: u64,
    seed: u64,
) -> Result<Vec<PaymentBin>>
where
    F: Fn(f64) -> f64 + Sync,
{
    check_samples(samples)?;
    if bins == 0 {
        return Err(Error::param("bins", "must be at least 1"));
    }
    let n = cfg.n();
    let (lo, width) = (d.v_min(), d.width());
    let parts = run_blocks(samples, seed, Purpose::PaymentBins, |rng, count| {
        let mut values = vec![0.0; n];
        let mut pay = vec![RunningStats::default(); bins];
        let mut res = vec![RunningStats::default(); bins];
        for _ in 0..count {
            draw_values(rng, d, &mut values);
            let c = clear_unchecked(AuctionKind::SecondPrice, &values, &values, rng);
            let v = values[c.winner];
            let bin = (((v - lo) / width * bins as f64) as usize).min(bins - 1);
            pay[bin].push(c.payment);
            res[bin].push(c.payment - expected_payment(v));
        }
        (pay, res)
    });
    let mut pay = vec![RunningStats::default(); bins];
    let mut res = vec![RunningStats::default(); bins];
    for (p, r) in &parts {
        for b in 0..bins {
            pay[b].merge(&p[b]);
            res[b].merge(&r[b]);
        }
    }
    let step = width / bins as f64;
    Ok((0..bins)
        .map(|b| PaymentBin {
            lo: lo + b as f64 * step,
            hi: lo + (b + 1) as f64 * step,
            payment: McEstimate::from_stats(&pay[b]),
            residual: McEstimate::from_stats(&res[b]),
        })
        .collect())
}
