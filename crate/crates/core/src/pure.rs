//! Pure-strategy equilibria P1–P4 and the location conditions that admit them.

use crate::error::{Error, Result};
use crate::market::{LocationPair, PricePair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PureKind {
    P1,
    P2,
    P3,
    P4,
}

impl PureKind {
    pub const ALL: [PureKind; 4] = [PureKind::P1, PureKind::P2, PureKind::P3, PureKind::P4];

    pub fn check(self, z: &LocationPair) -> bool {
        match self {
            PureKind::P1 => check_p1(z),
            PureKind::P2 => check_p2(z),
            PureKind::P3 => check_p3(z),
            PureKind::P4 => check_p4(z),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PureKind::P1 => "P1",
            PureKind::P2 => "P2",
            PureKind::P3 => "P3",
            PureKind::P4 => "P4",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureEquilibrium {
    pub kind: PureKind,
    pub prices: PricePair,
    pub profits: (f64, f64),
}

/// `2(√2 − 1)`, the P3/P4 split in `z1`.
pub fn p3_p4_split() -> f64 {
    2.0 * (std::f64::consts::SQRT_2 - 1.0)
}

/// Both firms price at their captive ceilings, sharing the informed market.
pub fn check_p1(z: &LocationPair) -> bool {
    let (z1, z2) = (z.z1(), z.z2());
    z1 < z2
        && z2 <= z1 + 0.5
        && (1.0 - z1) * (0.5 + z1 + z2) >= 2.0 * z1
        && z2 * (2.5 - z1 - z2) >= 2.0 * (1.0 - z2)
}

/// Firms far enough apart that neither reaches the other's informed flank.
pub fn check_p2(z: &LocationPair) -> bool {
    let (z1, z2) = (z.z1(), z.z2());
    z1 < z2 && z2 >= z1 + 0.5
}

/// Firm 1 takes the whole informed market at its captive ceiling.
pub fn check_p3(z: &LocationPair) -> bool {
    let (z1, z2) = (z.z1(), z.z2());
    z1 < z2
        && (1.0 - 2.0 * z1 + z2) * (2.0 - z2) <= z2
        && z1 <= p3_p4_split()
        && z2 >= 2.0 / 3.0
}

/// Firm 1 gives up part of its captive reach and prices at `1 − z1/2`.
pub fn check_p4(z: &LocationPair) -> bool {
    let (z1, z2) = (z.z1(), z.z2());
    z1 < z2 && (1.0 + 0.5 * z1 - z2) * (2.0 - 0.5 * z1) <= z2 && z1 > p3_p4_split()
}

pub fn build_pure(z: &LocationPair, kind: PureKind) -> Result<PureEquilibrium> {
    if !kind.check(z) {
        return Err(Error::Condition {
            kind: kind.name(),
            z1: z.z1(),
            z2: z.z2(),
        });
    }
    let (z1, z2) = (z.z1(), z.z2());
    let (prices, profits) = match kind {
        PureKind::P1 => (
            PricePair { p1: 1.0 - z1, p2: z2 },
            ((1.0 - z1) * (z1 + z2 + 0.5), z2 * (2.5 - z1 - z2)),
        ),
        PureKind::P2 => (
            PricePair { p1: 1.0 - z1, p2: z2 },
            ((1.0 - z1) * (1.0 + 2.0 * z1), z2 * (3.0 - 2.0 * z2)),
        ),
        PureKind::P3 => (PricePair { p1: 1.0 - z1, p2: z2 }, (2.0 * (1.0 - z1), z2)),
        PureKind::P4 => {
            let p1 = 1.0 - 0.5 * z1;
            (PricePair { p1, p2: z2 }, (p1 * p1, z2))
        }
    };
    Ok(PureEquilibrium {
        kind,
        prices,
        profits,
    })
}

/// First pure kind whose condition holds, in P1..P4 order.
pub fn first_pure(z: &LocationPair) -> Option<PureEquilibrium> {
    PureKind::ALL
        .iter()
        .find(|k| k.check(z))
        .map(|&k| build_pure(z, k).expect("condition just checked"))
}
