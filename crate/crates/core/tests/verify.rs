use captiveeq::market::{profit_of, Firm, Limit, LocationPair};
use captiveeq::mixed::{build_mixed, solve_w, CdfSpec, MixedContext, MixedEquilibrium, MixedKind};
use captiveeq::verify::{audit_mixed, expected_profit, AuditConfig};

const LANDMARKS: [(f64, f64, MixedKind); 3] = [
    (0.48, 0.6, MixedKind::M1),
    (0.52, 0.65, MixedKind::M2),
    (0.57, 0.67, MixedKind::M3),
];

fn equilibrium(z1: f64, z2: f64, kind: MixedKind) -> MixedEquilibrium {
    let c = MixedContext::new(LocationPair::new(z1, z2).unwrap()).unwrap();
    let w = solve_w(&c, kind).unwrap().w;
    build_mixed(&c, kind, w).unwrap()
}

/// Informed shares from first principles: split (0, 1) wherever any
/// utility or the utility gap changes slope or sign, then read each piece's
/// owner off its midpoint.
fn share_oracle(z1: f64, z2: f64, p1: f64, p2: f64) -> (f64, f64) {
    let u1 = |x: f64| 1.0 - p1 - (x - z1).abs();
    let u2 = |x: f64| 1.0 - p2 - (x - z2).abs();
    let mut cuts = vec![0.0, 1.0, z1, z2, z1 - (1.0 - p1), z1 + (1.0 - p1), z2 - (1.0 - p2), z2 + (1.0 - p2)];
    // Equal utility on each slope pair: x = (z1 + z2 ± (p2 − p1)) / 2.
    cuts.push(0.5 * (z1 + z2 + p2 - p1));
    cuts.push(0.5 * (z1 + z2 - p2 + p1));
    cuts.retain(|&x| (0.0..=1.0).contains(&x));
    cuts.sort_by(f64::total_cmp);
    let (mut s1, mut s2) = (0.0, 0.0);
    for pair in cuts.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if b <= a {
            continue;
        }
        let m = 0.5 * (a + b);
        let (v1, v2) = (u1(m), u2(m));
        if v1 < 0.0 && v2 < 0.0 {
            continue;
        }
        let gap = v1 - v2;
        if gap.abs() < 1e-12 {
            s1 += 0.5 * (b - a);
            s2 += 0.5 * (b - a);
        } else if gap > 0.0 {
            s1 += b - a;
        } else {
            s2 += b - a;
        }
    }
    (s1, s2)
}

/// Expected profit against `opponent` with its continuous part replaced by
/// `n` atoms per segment at cell midpoints, cells cut where the share jumps.
fn discretized_profit(firm: Firm, p: f64, opponent: &CdfSpec, n: usize) -> f64 {
    let ctx = opponent.context();
    let (z1, z2, d) = (ctx.z1(), ctx.z2(), ctx.delta());
    let share = |q: f64| match firm {
        Firm::One => share_oracle(z1, z2, p, q).0,
        Firm::Two => share_oracle(z1, z2, q, p).1,
    };
    let mut informed: f64 = opponent.atoms().iter().map(|a| a.mass * share(a.at)).sum();
    for seg in opponent.segments() {
        let mut cuts = vec![seg.lo, seg.hi];
        cuts.extend([p - d, p + d].into_iter().filter(|&q| q > seg.lo && q < seg.hi));
        cuts.sort_by(f64::total_cmp);
        for pair in cuts.windows(2) {
            let h = (pair[1] - pair[0]) / n as f64;
            for k in 0..n {
                let a = pair[0] + k as f64 * h;
                let mass = seg.piece.value(ctx, a + h).unwrap() - seg.piece.value(ctx, a).unwrap();
                informed += mass * share(a + 0.5 * h);
            }
        }
    }
    let captive = match firm {
        Firm::One => (p <= 1.0 - z1) as u8 as f64,
        Firm::Two => (p <= z2) as u8 as f64,
    };
    p * (captive + informed)
}

#[test]
fn share_oracle_agrees_with_library_profits() {
    let z = LocationPair::new(0.3, 0.75).unwrap();
    for (p1, p2) in [(0.2, 0.9), (0.7, 0.2), (0.5, 0.5), (0.6, 0.3), (0.95, 0.9)] {
        let (s1, s2) = share_oracle(0.3, 0.75, p1, p2);
        let lib1 = profit_of(Firm::One, &z, p1, p2, Limit::Exact) / p1 - (p1 <= 0.7) as u8 as f64;
        let lib2 = profit_of(Firm::Two, &z, p2, p1, Limit::Exact) / p2 - (p2 <= 0.75) as u8 as f64;
        assert!((lib1 - s1).abs() < 1e-12, "{p1} {p2}: {lib1} vs {s1}");
        assert!((lib2 - s2).abs() < 1e-12, "{p1} {p2}: {lib2} vs {s2}");
    }
}

#[test]
fn expected_profit_matches_discretized_opponent() {
    let n = 10_000;
    for (z1, z2, kind) in LANDMARKS {
        let eq = equilibrium(z1, z2, kind);
        for firm in [Firm::One, Firm::Two] {
            let rival = match firm {
                Firm::One => &eq.f2,
                Firm::Two => &eq.f1,
            };
            for p in [0.137, 0.3, 0.4123, 0.47, 0.5311, 0.6017, 0.7, 0.83] {
                let lib = expected_profit(firm, p, rival, Limit::Exact).unwrap();
                let oracle = discretized_profit(firm, p, rival, n);
                assert!(
                    (lib - oracle).abs() < 1e-6,
                    "{kind:?} {firm} p={p}: {lib} vs {oracle}"
                );
            }
        }
    }
}

#[test]
fn degenerate_opponent_is_a_pure_price() {
    let z = LocationPair::new(0.52, 0.65).unwrap();
    let ctx = MixedContext::new(z).unwrap();
    for q in [0.1, 0.4, 0.65, 0.9] {
        let f = CdfSpec::point_mass(ctx, q).unwrap();
        for firm in [Firm::One, Firm::Two] {
            for p in [0.05, 0.3, 0.48, 0.77, 1.2] {
                let e = expected_profit(firm, p, &f, Limit::Exact).unwrap();
                assert_eq!(e, profit_of(firm, &z, p, q, Limit::Exact));
            }
        }
    }
}

#[test]
fn refining_the_grid_never_lowers_the_worst_case() {
    let eq = equilibrium(0.48, 0.6, MixedKind::M1);
    let coarse = audit_mixed(&eq, &AuditConfig::with_step(0.02)).unwrap();
    let fine = audit_mixed(&eq, &AuditConfig::with_step(0.01)).unwrap();
    assert!(fine.scanned_points > coarse.scanned_points);
    assert!(fine.max_on_support_deviation + 1e-15 >= coarse.max_on_support_deviation);
    assert!(fine.max_off_support_excess + 1e-12 >= coarse.max_off_support_excess);
    assert!(coarse.passes() && fine.passes());
}

#[test]
fn coarse_audits_pass_at_landmark_points() {
    for (z1, z2, kind) in LANDMARKS {
        let eq = equilibrium(z1, z2, kind);
        let r = audit_mixed(&eq, &AuditConfig::with_step(0.01)).unwrap();
        assert!(r.passes(), "{kind:?}\n{r}");
        assert!(r.max_off_support_excess < 0.0);
    }
}
