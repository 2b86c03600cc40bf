//! Cross-checks of the closed-form payoffs against finite differences and
//! Monte-Carlo auctions.

use std::fmt::Write as _;

use crate::error::Result;
use crate::learning::{deviant_payoff, equilibrium_payoff, homogeneous_payoff, payoff_gradient};
use crate::model::{AuctionConfig, ValueDistribution};
use crate::oracle::{self, AuctionKind, McEstimate};

/// Largest tolerated |z| for a single Monte-Carlo comparison.
pub const Z_LIMIT: f64 = 3.0;

/// |z| limit when a check makes `m` comparisons: the two-sided 3 sigma
/// false-alarm rate (0.27%) split evenly over them (Bonferroni).
pub fn family_z_limit(m: usize) -> f64 {
    match m {
        0 | 1 => Z_LIMIT,
        2 => 3.2051,
        3..=4 => 3.3995,
        5..=6 => 3.5089,
        7..=9 => 3.6153,
        _ => 4.1974,
    }
}

pub const PAYMENT_BINS: usize = 100;
/// Bins with fewer winners than this are too noisy for a z-test.
pub const MIN_BIN_COUNT: u64 = 30;
pub const GRADIENT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fault {
    #[default]
    None,
    /// First-price bidders shade with slope `(n - 2) / n` instead of `(n - 1) / n`.
    WrongAlpha,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatteryOptions {
    pub samples: u64,
    pub seed: u64,
    pub fault: Fault,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    /// Worst observed error, in the check's own unit.
    pub observed: f64,
    pub tolerance: f64,
    pub unit: &'static str,
    pub passed: bool,
}

impl CheckResult {
    fn new(name: &'static str, observed: f64, tolerance: f64, unit: &'static str) -> Self {
        Self {
            name,
            observed,
            tolerance,
            unit,
            passed: observed <= tolerance,
        }
    }

    fn z(name: &'static str, family: ZFamily) -> Self {
        Self::new(name, family.worst, family.limit(), "|z|")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientGrid {
    pub points: usize,
    /// Largest relative error of the central difference against the gradient.
    pub max_central: f64,
    /// Largest relative gap between left and right one-sided differences.
    pub max_one_sided: f64,
}

/// Grid of bidder counts, supports and intercepts (below, inside and above
/// the support) used by the gradient check.
pub fn gradient_grid_points() -> Vec<(usize, ValueDistribution, f64)> {
    let ns = [2, 3, 4, 10, 20];
    let supports = [
        (0.0, 1.0),
        (10.0, 20.0),
        (10.0, 30.0),
        (20.0, 40.0),
        (-5.0, 2.5),
    ];
    let fracs = [-0.4, 0.1, 0.5, 0.9, 1.3];
    let mut out = Vec::with_capacity(125);
    for &n in &ns {
        for &(a, b) in &supports {
            let d = ValueDistribution::new(a, b).expect("grid support");
            for &f in &fracs {
                out.push((n, d, a + f * d.width()));
            }
        }
    }
    out
}

/// One-sided and central differences of `x' -> w(x', x)` at `x' = x`,
/// each Richardson-extrapolated over steps `e` and `e / 2`.
pub fn finite_differences(cfg: &AuctionConfig, d: &ValueDistribution, x: f64) -> (f64, f64, f64) {
    let e = 1e-4 * d.width();
    let w = |xd: f64| deviant_payoff(cfg, d, xd, x);
    let w0 = w(x);
    let right = |e: f64| (w(x + e) - w0) / e;
    let left = |e: f64| (w0 - w(x - e)) / e;
    let central = |e: f64| (w(x + e) - w(x - e)) / (2.0 * e);
    let extrapolate = |f: &dyn Fn(f64) -> f64| 2.0 * f(e / 2.0) - f(e);
    (
        extrapolate(&left),
        extrapolate(&central),
        extrapolate(&right),
    )
}

pub fn gradient_grid() -> GradientGrid {
    let mut g = GradientGrid {
        points: 0,
        max_central: 0.0,
        max_one_sided: 0.0,
    };
    for (n, d, x) in gradient_grid_points() {
        let cfg = AuctionConfig::new(n).expect("grid n");
        let exact = payoff_gradient(&cfg, &d, x);
        let (left, central, right) = finite_differences(&cfg, &d, x);
        g.points += 1;
        g.max_central = g.max_central.max(((central - exact) / exact).abs());
        g.max_one_sided = g.max_one_sided.max(((right - left) / exact).abs());
    }
    g
}

/// Closed-form expected revenue `n * integral of G(v) p(v)`, by Simpson's rule.
pub fn closed_form_revenue(cfg: &AuctionConfig, d: &ValueDistribution) -> f64 {
    let intervals = 2000;
    let h = d.width() / intervals as f64;
    let g = |i: usize| {
        let v = if i == intervals {
            d.v_max()
        } else {
            d.v_min() + i as f64 * h
        };
        cfg.expected_total_payment(d, v).expect("inside support") * d.pdf(v)
    };
    let mut s = g(0) + g(intervals);
    for i in 1..intervals {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * g(i);
    }
    cfg.n() as f64 * s * h / 3.0
}

fn cfg(n: usize) -> AuctionConfig {
    AuctionConfig::new(n).expect("n >= 2")
}

fn dist(a: f64, b: f64) -> ValueDistribution {
    ValueDistribution::new(a, b).expect("valid support")
}

/// Worst |z| of a family of comparisons, and its size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZFamily {
    pub worst: f64,
    pub comparisons: usize,
}

impl ZFamily {
    fn of(zs: &[f64]) -> Self {
        let worst = zs.iter().fold(0.0, |m: f64, z| {
            if z.is_nan() {
                f64::INFINITY
            } else {
                m.max(z.abs())
            }
        });
        Self {
            worst,
            comparisons: zs.len(),
        }
    }

    pub fn limit(&self) -> f64 {
        family_z_limit(self.comparisons)
    }
}

/// Worst |z| over the static revenue comparisons: first against second
/// price, and each against the closed form.
pub fn static_equivalence_z(opts: &BatteryOptions) -> Result<ZFamily> {
    let mut zs = Vec::new();
    for (i, &(n, a, b)) in [(2, 0.0, 1.0), (3, 0.0, 1.0), (10, 10.0, 20.0)]
        .iter()
        .enumerate()
    {
        let c = cfg(n);
        let d = dist(a, b);
        let slope = match opts.fault {
            Fault::None => c.alpha(),
            Fault::WrongAlpha => (n as f64 - 2.0) / n as f64,
        };
        let seed = opts.seed.wrapping_add(i as u64);
        let (fp, sp) =
            oracle::check_static_revenue_equivalence_with_slope(&c, slope, &d, opts.samples, seed)?;
        let exact = closed_form_revenue(&c, &d);
        zs.extend([fp.combined_z(&sp), fp.z_score(exact), sp.z_score(exact)]);
    }
    Ok(ZFamily::of(&zs))
}

pub fn homogeneous_payoff_z(opts: &BatteryOptions) -> Result<ZFamily> {
    let cases = [
        (10, 10.0, 20.0, 10.0),
        (10, 10.0, 20.0, 15.0),
        (2, 0.0, 1.0, 0.0),
        (3, 20.0, 40.0, 25.0),
    ];
    let mut zs = Vec::new();
    for (i, &(n, a, b, x)) in cases.iter().enumerate() {
        let (c, d) = (cfg(n), dist(a, b));
        let est = oracle::estimate_homogeneous_payoff(
            &c,
            &d,
            x,
            opts.samples,
            opts.seed.wrapping_add(i as u64),
        )?;
        zs.push(est.z_score(homogeneous_payoff(&c, &d, x)));
    }
    Ok(ZFamily::of(&zs))
}

pub fn second_price_payoff_z(opts: &BatteryOptions) -> Result<ZFamily> {
    let mut zs = Vec::new();
    for (i, &(n, a, b)) in [(2, 0.0, 1.0), (10, 10.0, 20.0)].iter().enumerate() {
        let (c, d) = (cfg(n), dist(a, b));
        let est: McEstimate = oracle::estimate_focal_payoff(
            &c,
            &d,
            AuctionKind::SecondPrice,
            |v| v,
            |v| v,
            opts.samples,
            opts.seed.wrapping_add(i as u64),
        )?;
        zs.push(est.z_score(equilibrium_payoff(&c, &d)));
    }
    Ok(ZFamily::of(&zs))
}

pub fn deviant_payoff_z(opts: &BatteryOptions) -> Result<ZFamily> {
    let cases = [
        (10, 10.0, 20.0, 16.0, 14.0),
        (10, 10.0, 20.0, 13.0, 15.0),
        (3, 0.0, 1.0, 0.2, 0.1),
        (3, 0.0, 1.0, 0.0, 0.3),
        (2, 0.0, 1.0, 0.6, 0.0),
        (4, 20.0, 40.0, 18.0, 26.0),
    ];
    let mut zs = Vec::new();
    for (i, &(n, a, b, xd, xp)) in cases.iter().enumerate() {
        let (c, d) = (cfg(n), dist(a, b));
        let est = oracle::estimate_deviant_payoff(
            &c,
            &d,
            xd,
            xp,
            opts.samples,
            opts.seed.wrapping_add(i as u64),
        )?;
        zs.push(est.z_score(deviant_payoff(&c, &d, xd, xp)));
    }
    Ok(ZFamily::of(&zs))
}

/// Worst per-bin |z| of the paired residual `payment - f(v_winner)` for
/// truthful second-price auctions, `n = 2` on `[0, 1]`.
pub fn payment_bins_z(opts: &BatteryOptions) -> Result<ZFamily> {
    let (c, d) = (cfg(2), dist(0.0, 1.0));
    let bins = oracle::conditional_payment_bins(
        &c,
        &d,
        PAYMENT_BINS,
        |v| {
            c.expected_payment(&d, v)
                .expect("winner value inside support")
        },
        opts.samples,
        opts.seed,
    )?;
    let zs: Vec<f64> = bins
        .iter()
        .filter(|b| b.residual.n_samples >= MIN_BIN_COUNT)
        .map(|b| b.residual.z_score(0.0))
        .collect();
    Ok(ZFamily::of(&zs))
}

pub fn run_battery(opts: &BatteryOptions) -> Result<Vec<CheckResult>> {
    let grid = gradient_grid();
    Ok(vec![
        CheckResult::new(
            "gradient vs central difference",
            grid.max_central,
            GRADIENT_TOLERANCE,
            "rel",
        ),
        CheckResult::new(
            "left vs right derivative",
            grid.max_one_sided,
            GRADIENT_TOLERANCE,
            "rel",
        ),
        CheckResult::z("w_dagger(x) vs Monte-Carlo", homogeneous_payoff_z(opts)?),
        CheckResult::z("w_star vs Monte-Carlo", second_price_payoff_z(opts)?),
        CheckResult::z("w(x', x) vs Monte-Carlo", deviant_payoff_z(opts)?),
        CheckResult::z("static revenue equivalence", static_equivalence_z(opts)?),
        CheckResult::z("f(v) payment bins", payment_bins_z(opts)?),
    ])
}

pub fn format_table(results: &[CheckResult]) -> String {
    let width = results
        .iter()
        .map(|r| r.name.len())
        .max()
        .unwrap_or(5)
        .max(5);
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<width$}  {:>12}  {:>12}  {:<4}  result",
        "check", "observed", "tolerance", "unit"
    );
    for r in results {
        let _ = writeln!(
            s,
            "{:<width$}  {:>12.4e}  {:>12.4e}  {:<4}  {}",
            r.name,
            r.observed,
            r.tolerance,
            r.unit,
            if r.passed { "PASS" } else { "FAIL" }
        );
    }
    s
}
