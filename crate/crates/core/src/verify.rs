//! Numerical audit of equilibria.
//!
//! A firm's expected profit at price `p` against the rival's mixed strategy
//! is `p·(captive + ∫ share(p, q) dF(q))`, where the Stieltjes integral is
//! split into atoms and continuous pieces. Each continuous segment is cut at
//! the rival prices where the share jumps or kinks, and Gauss–Kronrod
//! quadrature of `share × density` runs on the pieces in between.

use crate::error::{Error, Result};
use crate::market::{
    captive_demand, captive_demand_limit, informed_share_limit, profit_of, share_breakpoints, Firm,
    Limit, LocationPair, PricePair,
};
use crate::mixed::{CdfSpec, MixedEquilibrium, MixedKind};
use crate::pure::PureEquilibrium;
use crate::quad::{try_integrate, GkTolerance};

pub fn expected_profit(firm: Firm, p: f64, opponent: &CdfSpec, limit: Limit) -> Result<f64> {
    expected_profit_with(firm, p, opponent, limit, &GkTolerance::default())
}

pub fn expected_profit_with(
    firm: Firm,
    p: f64,
    opponent: &CdfSpec,
    limit: Limit,
    tol: &GkTolerance,
) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::InvalidInput(format!("expected profit needs p > 0, got {p}")));
    }
    let ctx = opponent.context();
    let z = ctx.z();
    let share = |q: f64| informed_share_limit(firm, z, &PricePair::with(firm, p, q), limit);

    let mut informed = 0.0;
    for atom in opponent.atoms() {
        informed += atom.mass * share(atom.at);
    }
    let breaks = share_breakpoints(firm, z, p);
    for seg in opponent.segments() {
        if seg.piece.is_constant() {
            continue;
        }
        let mut cuts = vec![seg.lo];
        cuts.extend(breaks.iter().copied().filter(|&q| q > seg.lo && q < seg.hi));
        cuts.push(seg.hi);
        for pair in cuts.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let s_lo = share(a + 0.25 * (b - a));
            let s_hi = share(a + 0.75 * (b - a));
            if s_lo == s_hi {
                if s_lo != 0.0 {
                    let mass = seg.piece.value(ctx, b)? - seg.piece.value(ctx, a)?;
                    informed += s_lo * mass;
                }
                continue;
            }
            // The share is affine on (a, b); extend it to the closed piece.
            let slope = 2.0 * (s_hi - s_lo) / (b - a);
            let at_a = s_lo - 0.25 * (b - a) * slope;
            informed += try_integrate(
                |q| Ok((at_a + slope * (q - a)) * seg.piece.density(ctx, q)?),
                a,
                b,
                tol,
            )?;
        }
    }
    Ok(p * (captive_demand_limit(firm, z, p, limit) + informed))
}

/// `E[p·captive]` under the firm's own strategy.
pub fn expected_captive_revenue(firm: Firm, own: &CdfSpec, tol: &GkTolerance) -> Result<f64> {
    let ctx = own.context();
    let z = ctx.z();
    let mut total: f64 = own
        .atoms()
        .iter()
        .map(|a| a.at * a.mass * captive_demand(firm, z, a.at))
        .sum();
    for seg in own.segments() {
        if seg.piece.is_constant() {
            continue;
        }
        let ceiling = crate::market::captive_ceiling(firm, z);
        let hi = seg.hi.min(ceiling);
        if hi <= seg.lo {
            continue;
        }
        total += try_integrate(|q| Ok(q * seg.piece.density(ctx, q)?), seg.lo, hi, tol)?;
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditConfig {
    pub price_step: f64,
    pub tol_on: f64,
    pub tol_off: f64,
    pub quad: GkTolerance,
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self {
            price_step: 0.001,
            tol_on: 1e-9,
            tol_off: 1e-9,
            quad: GkTolerance::default(),
        }
    }
}

impl AuditConfig {
    pub fn with_step(price_step: f64) -> Self {
        Self {
            price_step,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditReport {
    pub max_on_support_deviation: f64,
    /// Largest `E[π] − π*` over off-support prices; negative when all lose.
    pub max_off_support_excess: f64,
    pub scanned_points: usize,
    pub worst_price: f64,
    pub worst_firm: Firm,
    pub tol_on: f64,
    pub tol_off: f64,
}

impl AuditReport {
    pub fn passes(&self) -> bool {
        self.max_on_support_deviation <= self.tol_on && self.max_off_support_excess <= self.tol_off
    }
}

impl std::fmt::Display for AuditReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "max_on_support_deviation {:.6e}", self.max_on_support_deviation)?;
        writeln!(f, "max_off_support_excess {:.6e}", self.max_off_support_excess)?;
        writeln!(f, "scanned_points {}", self.scanned_points)?;
        writeln!(f, "worst_price {:.15} ({})", self.worst_price, self.worst_firm)?;
        write!(f, "result {}", if self.passes() { "pass" } else { "FAIL" })
    }
}

#[derive(Debug, Clone, Copy)]
struct Probe {
    price: f64,
    limit: Limit,
    on_support: bool,
}

struct Tracker {
    on: f64,
    off: f64,
    count: usize,
    worst: (f64, f64, Firm),
    tol_on: f64,
    tol_off: f64,
}

impl Tracker {
    fn new(tol_on: f64, tol_off: f64) -> Self {
        Self {
            on: 0.0,
            off: f64::NEG_INFINITY,
            count: 0,
            worst: (f64::NEG_INFINITY, f64::NAN, Firm::One),
            tol_on,
            tol_off,
        }
    }

    fn record(&mut self, firm: Firm, probe: &Probe, diff: f64) {
        self.count += 1;
        let score = if probe.on_support {
            self.on = self.on.max(diff.abs());
            diff.abs() / self.tol_on
        } else {
            self.off = self.off.max(diff);
            diff / self.tol_off
        };
        if score > self.worst.0 {
            self.worst = (score, probe.price, firm);
        }
    }

    fn finish(self) -> Result<AuditReport> {
        if self.count == 0 {
            return Err(Error::InvalidInput("audit scanned no prices".into()));
        }
        Ok(AuditReport {
            max_on_support_deviation: self.on,
            max_off_support_excess: self.off,
            scanned_points: self.count,
            worst_price: self.worst.1,
            worst_firm: self.worst.2,
            tol_on: self.tol_on,
            tol_off: self.tol_off,
        })
    }
}

fn check_step(step: f64) -> Result<()> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::InvalidInput(format!("price step must be positive, got {step}")));
    }
    Ok(())
}

/// Grid points `lo + k·step`, `k ≥ 1`, strictly inside `(lo, hi)`.
fn open_grid(lo: f64, hi: f64, step: f64) -> impl Iterator<Item = f64> {
    (1..)
        .map(move |k| lo + k as f64 * step)
        .take_while(move |&p| p < hi)
}

/// Prices at which `firm`'s mixed strategy is checked.
fn mixed_probes(eq: &MixedEquilibrium, firm: Firm, step: f64) -> Vec<Probe> {
    let z = eq.context().z();
    let (z1, z2) = (z.z1(), z.z2());
    let w = eq.w;
    let top = 1.0 - 2.0 * z1 + z2;
    let own = match firm {
        Firm::One => &eq.f1,
        Firm::Two => &eq.f2,
    };
    let mut off: Vec<(f64, f64)> = match (eq.kind, firm) {
        (MixedKind::M1, Firm::One) => vec![(0.0, z1 - w), (z1, 1.0 - z1)],
        (MixedKind::M1, Firm::Two) => vec![(0.0, z2 - w)],
        (_, Firm::One) => vec![(0.0, 1.0 - z1 - w)],
        (_, Firm::Two) => vec![(0.0, top - w)],
    };
    if eq.kind == MixedKind::M3 && firm == Firm::Two {
        off.push((top, z2));
    }
    let mut probes = Vec::new();
    for &(lo, hi) in &off {
        probes.extend(open_grid(lo, hi, step).map(|price| Probe {
            price,
            limit: Limit::Exact,
            on_support: false,
        }));
        let kink = 1.0 - z2;
        if firm == Firm::Two && kink > lo && kink < hi {
            probes.push(Probe {
                price: kink,
                limit: Limit::Left,
                on_support: false,
            });
        }
    }
    for seg in own.segments().iter().filter(|s| !s.piece.is_constant()) {
        let on = |price, limit| Probe {
            price,
            limit,
            on_support: true,
        };
        probes.push(on(seg.lo, Limit::Exact));
        probes.extend(open_grid(seg.lo, seg.hi, step).map(|p| on(p, Limit::Exact)));
        probes.push(on(seg.hi, Limit::Left));
        if own.atom_at(seg.hi) == 0.0 {
            probes.push(Probe {
                price: seg.hi,
                limit: Limit::Exact,
                on_support: false,
            });
        }
    }
    for atom in own.atoms() {
        probes.push(Probe {
            price: atom.at,
            limit: Limit::Exact,
            on_support: true,
        });
    }
    probes
}

/// Checks constant expected profit on each firm's support and no gain
/// off it, on a price grid of the configured step.
pub fn audit_mixed(eq: &MixedEquilibrium, cfg: &AuditConfig) -> Result<AuditReport> {
    check_step(cfg.price_step)?;
    let mut tracker = Tracker::new(cfg.tol_on, cfg.tol_off);
    for firm in [Firm::One, Firm::Two] {
        let (rival, target) = match firm {
            Firm::One => (&eq.f2, eq.profits.0),
            Firm::Two => (&eq.f1, eq.profits.1),
        };
        for probe in mixed_probes(eq, firm, cfg.price_step) {
            let e = expected_profit_with(firm, probe.price, rival, probe.limit, &cfg.quad)?;
            tracker.record(firm, &probe, e - target);
        }
    }
    tracker.finish()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureAuditConfig {
    pub price_step: f64,
    pub price_max: f64,
    pub tol: f64,
}

impl Default for PureAuditConfig {
    fn default() -> Self {
        Self {
            price_step: 0.001,
            price_max: 1.5,
            tol: 1e-9,
        }
    }
}

/// Unilateral deviation scan over `(0, price_max]` with the rival held at
/// its equilibrium price.
pub fn audit_pure(eq: &PureEquilibrium, z: &LocationPair, cfg: &PureAuditConfig) -> Result<AuditReport> {
    check_step(cfg.price_step)?;
    let mut tracker = Tracker::new(cfg.tol, cfg.tol);
    for firm in [Firm::One, Firm::Two] {
        let own = eq.prices.of(firm);
        let rival = eq.prices.of(firm.other());
        let target = match firm {
            Firm::One => eq.profits.0,
            Firm::Two => eq.profits.1,
        };
        let at_eq = Probe {
            price: own,
            limit: Limit::Exact,
            on_support: true,
        };
        tracker.record(firm, &at_eq, profit_of(firm, z, own, rival, Limit::Exact) - target);
        let n = (cfg.price_max / cfg.price_step + 1e-9).floor() as usize;
        for k in 1..=n {
            let probe = Probe {
                price: k as f64 * cfg.price_step,
                limit: Limit::Exact,
                on_support: false,
            };
            tracker.record(firm, &probe, profit_of(firm, z, probe.price, rival, Limit::Exact) - target);
        }
    }
    tracker.finish()
}
