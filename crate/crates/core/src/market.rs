//! Deterministic demand and profit for a given pair of locations and prices.
//!
//! Two firms sit on the unit line. Each owns a unit mass of captive buyers at
//! its own endpoint (firm 1 at 0, firm 2 at 1) and competes for a unit mass of
//! informed consumers spread uniformly over the line. Every consumer has
//! reservation utility 1 and pays linear transport cost at rate 1; a consumer
//! whose best utility is exactly 0 still buys.

use crate::error::{Error, Result};

/// Normalized model constants. All of them are fixed at 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelConstants {
    pub reservation: f64,
    pub transport_rate: f64,
    pub captive_mass: f64,
    pub informed_mass: f64,
}

impl ModelConstants {
    pub const NORMALIZED: ModelConstants = ModelConstants {
        reservation: 1.0,
        transport_rate: 1.0,
        captive_mass: 1.0,
        informed_mass: 1.0,
    };
}

impl Default for ModelConstants {
    fn default() -> Self {
        Self::NORMALIZED
    }
}

const RESERVATION: f64 = ModelConstants::NORMALIZED.reservation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Firm {
    One,
    Two,
}

impl Firm {
    pub fn other(self) -> Firm {
        match self {
            Firm::One => Firm::Two,
            Firm::Two => Firm::One,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Firm::One => 1,
            Firm::Two => 2,
        }
    }
}

impl std::fmt::Display for Firm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "firm {}", self.index())
    }
}

/// Which limit of a firm's own price is meant: `p`, `p−0` or `p+0`.
///
/// Demand jumps where the rival price sits exactly at `p ± δ`; one-sided
/// limits resolve those jumps without perturbing `p` numerically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Limit {
    #[default]
    Exact,
    Left,
    Right,
}

/// Firm locations in canonical orientation `0 ≤ z1 ≤ z2 ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocationPair {
    z1: f64,
    z2: f64,
}

impl LocationPair {
    pub fn new(z1: f64, z2: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&z1) || !(0.0..=1.0).contains(&z2) {
            return Err(Error::InvalidInput(format!(
                "locations ({z1}, {z2}) must lie in [0, 1]"
            )));
        }
        if z1 > z2 {
            return Err(Error::InvalidInput(format!(
                "locations ({z1}, {z2}) are not in canonical order z1 <= z2"
            )));
        }
        Ok(Self { z1, z2 })
    }

    pub fn z1(&self) -> f64 {
        self.z1
    }

    pub fn z2(&self) -> f64 {
        self.z2
    }

    /// Distance between the firms.
    pub fn delta(&self) -> f64 {
        self.z2 - self.z1
    }

    /// Mirror image `(1 − z2, 1 − z1)`; the firms trade roles under it.
    pub fn reflect(&self) -> LocationPair {
        LocationPair {
            z1: 1.0 - self.z2,
            z2: 1.0 - self.z1,
        }
    }

    pub fn location(&self, firm: Firm) -> f64 {
        match firm {
            Firm::One => self.z1,
            Firm::Two => self.z2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PricePair {
    pub p1: f64,
    pub p2: f64,
}

impl PricePair {
    pub fn new(p1: f64, p2: f64) -> Result<Self> {
        if !(p1 >= 0.0 && p2 >= 0.0) || !p1.is_finite() || !p2.is_finite() {
            return Err(Error::InvalidInput(format!(
                "prices ({p1}, {p2}) must be finite and nonnegative"
            )));
        }
        Ok(Self { p1, p2 })
    }

    pub fn of(&self, firm: Firm) -> f64 {
        match firm {
            Firm::One => self.p1,
            Firm::Two => self.p2,
        }
    }

    pub fn with(firm: Firm, own: f64, rival: f64) -> PricePair {
        match firm {
            Firm::One => PricePair { p1: own, p2: rival },
            Firm::Two => PricePair { p1: rival, p2: own },
        }
    }

    pub fn swapped(&self) -> PricePair {
        PricePair {
            p1: self.p2,
            p2: self.p1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemandBreakdown {
    pub captive1: f64,
    pub captive2: f64,
    pub informed1: f64,
    pub informed2: f64,
}

impl DemandBreakdown {
    pub fn total(&self, firm: Firm) -> f64 {
        match firm {
            Firm::One => self.captive1 + self.informed1,
            Firm::Two => self.captive2 + self.informed2,
        }
    }
}

/// How the informed market splits, keyed on `c = p2 − p1` against `δ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Regime {
    /// `c > δ`: every informed consumer prefers firm 1.
    Firm1Takes,
    /// `c = δ`: consumers on `[z2, 1]` are indifferent; they split equally.
    TieRight,
    /// `|c| < δ`: an indifferent consumer lies strictly between the firms.
    Interior,
    /// `c = −δ`: consumers on `[0, z1]` are indifferent.
    TieLeft,
    Firm2Takes,
}

/// `nudge` moves `c` by an infinitesimal: +1 for `c+0`, −1 for `c−0`.
pub(crate) fn regime(delta: f64, c: f64, nudge: i8) -> Regime {
    let above = |edge: f64| c > edge || (c == edge && nudge > 0);
    let below = |edge: f64| c < edge || (c == edge && nudge < 0);
    if above(delta) {
        Regime::Firm1Takes
    } else if !below(delta) {
        Regime::TieRight
    } else if below(-delta) {
        Regime::Firm2Takes
    } else if !above(-delta) {
        Regime::TieLeft
    } else {
        Regime::Interior
    }
}

/// Nudge applied to `c = p2 − p1` when `firm`'s own price is taken as a limit.
fn nudge_for(firm: Firm, limit: Limit) -> i8 {
    match (firm, limit) {
        (_, Limit::Exact) => 0,
        (Firm::One, Limit::Left) | (Firm::Two, Limit::Right) => 1,
        (Firm::One, Limit::Right) | (Firm::Two, Limit::Left) => -1,
    }
}

/// Consumers on `[0, 1]` for whom buying from a firm at `z` for price `p`
/// leaves nonnegative utility.
fn reach(z: f64, p: f64) -> (f64, f64) {
    let r = RESERVATION - p;
    if r < 0.0 {
        (1.0, 0.0)
    } else {
        ((z - r).max(0.0), (z + r).min(1.0))
    }
}

fn overlap(a: (f64, f64), lo: f64, hi: f64) -> f64 {
    (a.1.min(hi) - a.0.max(lo)).max(0.0)
}

pub(crate) fn shares_in_regime(z: &LocationPair, p: &PricePair, regime: Regime) -> (f64, f64) {
    let (z1, z2) = (z.z1, z.z2);
    let reach1 = reach(z1, p.p1);
    let reach2 = reach(z2, p.p2);
    match regime {
        Regime::Firm1Takes => (overlap(reach1, 0.0, 1.0), 0.0),
        Regime::Firm2Takes => (0.0, overlap(reach2, 0.0, 1.0)),
        Regime::Interior => {
            let t = marginal_position(z, p);
            (overlap(reach1, 0.0, t), overlap(reach2, t, 1.0))
        }
        Regime::TieRight => {
            let tied = overlap(reach1, z2, 1.0);
            (overlap(reach1, 0.0, z2) + 0.5 * tied, 0.5 * tied)
        }
        Regime::TieLeft => {
            let tied = overlap(reach2, 0.0, z1);
            (0.5 * tied, overlap(reach2, z1, 1.0) + 0.5 * tied)
        }
    }
}

fn marginal_position(z: &LocationPair, p: &PricePair) -> f64 {
    0.5 * (z.z1 + z.z2 + p.p2 - p.p1)
}

/// Position of the informed consumer indifferent between the two firms.
pub fn marginal_consumer(z: &LocationPair, p: &PricePair) -> Result<f64> {
    let delta = z.delta();
    if (p.p1 - p.p2).abs() >= delta {
        return Err(Error::Regime(format!(
            "|p1 - p2| = {} is not below z2 - z1 = {delta}; no interior indifferent consumer",
            (p.p1 - p.p2).abs()
        )));
    }
    Ok(marginal_position(z, p))
}

/// Informed demand of each firm, a measure on `[0, 1]`.
pub fn informed_shares(z: &LocationPair, p: &PricePair) -> (f64, f64) {
    shares_in_regime(z, p, regime(z.delta(), p.p2 - p.p1, 0))
}

/// Informed demand of `firm` with its own price taken as the given limit.
pub fn informed_share_limit(firm: Firm, z: &LocationPair, p: &PricePair, limit: Limit) -> f64 {
    let reg = regime(z.delta(), p.p2 - p.p1, nudge_for(firm, limit));
    let (s1, s2) = shares_in_regime(z, p, reg);
    match firm {
        Firm::One => s1,
        Firm::Two => s2,
    }
}

/// Captive demand: 1 when the captive buyer can afford the firm's product.
pub fn captive_demand(firm: Firm, z: &LocationPair, price: f64) -> f64 {
    captive_demand_limit(firm, z, price, Limit::Exact)
}

pub fn captive_demand_limit(firm: Firm, z: &LocationPair, price: f64, limit: Limit) -> f64 {
    let ceiling = captive_ceiling(firm, z);
    let buys = match limit {
        Limit::Exact | Limit::Left => price <= ceiling,
        Limit::Right => price < ceiling,
    };
    if buys {
        ModelConstants::NORMALIZED.captive_mass
    } else {
        0.0
    }
}

/// Highest price the firm's captive buyer accepts: `1 − z1` or `z2`.
pub fn captive_ceiling(firm: Firm, z: &LocationPair) -> f64 {
    match firm {
        Firm::One => RESERVATION - z.z1,
        Firm::Two => RESERVATION - (1.0 - z.z2),
    }
}

pub fn demand(z: &LocationPair, p: &PricePair) -> DemandBreakdown {
    let (informed1, informed2) = informed_shares(z, p);
    DemandBreakdown {
        captive1: captive_demand(Firm::One, z, p.p1),
        captive2: captive_demand(Firm::Two, z, p.p2),
        informed1,
        informed2,
    }
}

/// Profits `(π1, π2)` with zero production cost.
pub fn profit_pair(z: &LocationPair, p: &PricePair) -> (f64, f64) {
    let d = demand(z, p);
    (p.p1 * d.total(Firm::One), p.p2 * d.total(Firm::Two))
}

/// Profit of `firm` charging `own` against a rival charging `rival`.
pub fn profit_of(firm: Firm, z: &LocationPair, own: f64, rival: f64, limit: Limit) -> f64 {
    let p = PricePair::with(firm, own, rival);
    own * (captive_demand_limit(firm, z, own, limit) + informed_share_limit(firm, z, &p, limit))
}

/// Rival prices at which `firm`'s informed share (as a function of the rival
/// price, own price fixed) jumps or changes slope.
///
/// Between consecutive breakpoints the share is affine in the rival price.
pub fn share_breakpoints(firm: Firm, z: &LocationPair, own: f64) -> Vec<f64> {
    let (z1, z2) = (z.z1, z.z2);
    let delta = z.delta();
    let sum = z1 + z2;
    let mut points = vec![own - delta, own + delta];
    match firm {
        Firm::One => {
            // t* = (z1 + z2 + q − own)/2 meets the ends of firm 1's reach.
            let (lo, hi) = reach(z1, own);
            if lo <= hi {
                for edge in [lo, hi] {
                    points.push(2.0 * edge - sum + own);
                }
            }
        }
        Firm::Two => {
            // t* = (z1 + z2 + own − q)/2 meets the ends of firm 2's reach.
            let (lo, hi) = reach(z2, own);
            if lo <= hi {
                for edge in [lo, hi] {
                    points.push(sum + own - 2.0 * edge);
                }
            }
        }
    }
    points.sort_by(f64::total_cmp);
    points.dedup();
    points
}
