use super::{in_gate, Atom, CdfSpec, MixedContext, MixedKind, Piece, Segment};
use crate::error::{Error, Result};

pub const PRESCAN_SAMPLES: usize = 1000;

/// Widths at or below this are treated as no solution.
const MIN_WIDTH: f64 = 1e-10;

/// Root of the width equation for one mixed kind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WidthRoot {
    pub w: f64,
    /// Number of sign changes seen in the prescan.
    pub roots_found: usize,
    pub residual: f64,
}

/// Left side minus right side of the width equation at `w`.
///
/// M1: `h(z2; z2−w)/(2λ) + z1 + z2 + 1/2 − 2w/z1 − 2(z1−w)/(1−z1)`.
/// M2: `h(B; B−w) − 1` with `B = 1 − 2z1 + z2`.
/// M3: `g0(1−z1−w; 1−z1) − z2·gπ(1−z1−w; 1−z1)`.
pub fn width_residual(ctx: &MixedContext, kind: MixedKind, w: f64) -> Result<f64> {
    let (z1, z2) = (ctx.z1(), ctx.z2());
    match kind {
        MixedKind::M1 => Ok(ctx.eval_h(z2, z2 - w)? / (2.0 * ctx.lambda()) + z1 + z2 + 0.5
            - 2.0 * w / z1
            - 2.0 * (z1 - w) / (1.0 - z1)),
        MixedKind::M2 => {
            let top = 1.0 - 2.0 * z1 + z2;
            Ok(ctx.eval_h(top, top - w)? - 1.0)
        }
        MixedKind::M3 => {
            let b = 1.0 - z1;
            Ok(ctx.eval_g0(b - w, b)? - z2 * ctx.eval_gpi(b - w, b)?)
        }
    }
}

pub fn solve_w(ctx: &MixedContext, kind: MixedKind) -> Result<WidthRoot> {
    solve_w_with(ctx, kind, PRESCAN_SAMPLES)
}

/// Smallest root of the width equation in `(0, bound)`: sign-change scan on
/// `samples` interior points, then bisection of the first bracket.
pub fn solve_w_with(ctx: &MixedContext, kind: MixedKind, samples: usize) -> Result<WidthRoot> {
    if !in_gate(ctx.z(), kind) {
        return Err(Error::Condition {
            kind: kind.name(),
            z1: ctx.z1(),
            z2: ctx.z2(),
        });
    }
    let bound = kind.width_bound(ctx.z());
    let f = |w: f64| width_residual(ctx, kind, w);
    let grid: Vec<f64> = (1..=samples)
        .map(|i| bound * i as f64 / (samples + 1) as f64)
        .collect();
    let values: Vec<Option<f64>> = grid.iter().map(|&w| f(w).ok()).collect();

    let mut brackets = Vec::new();
    for i in 0..samples.saturating_sub(1) {
        if let (Some(a), Some(b)) = (values[i], values[i + 1]) {
            if a == 0.0 {
                brackets.push((grid[i], grid[i]));
            } else if a * b < 0.0 {
                brackets.push((grid[i], grid[i + 1]));
            }
        }
    }
    if let Some(Some(last)) = values.last() {
        if *last == 0.0 {
            brackets.push((grid[samples - 1], grid[samples - 1]));
        }
    }
    let Some(&(mut lo, mut hi)) = brackets.first() else {
        return Err(Error::NoRoot {
            kind: kind.name(),
            upper: bound,
        });
    };
    if brackets.len() > 1 {
        log::warn!(
            "{} width equation at ({}, {}) has {} sign changes; using the smallest root",
            kind.name(),
            ctx.z1(),
            ctx.z2(),
            brackets.len()
        );
    }
    // Bisect down to adjacent floats; steep residuals near z2 = 1 need
    // more than a 1e-14 bracket to bring the residual under 1e-12.
    let mut f_lo = f(lo)?;
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    let w = 0.5 * (lo + hi);
    if !(w > MIN_WIDTH) {
        return Err(Error::NoRoot {
            kind: kind.name(),
            upper: bound,
        });
    }
    Ok(WidthRoot {
        w,
        roots_found: brackets.len(),
        residual: f(w)?,
    })
}

/// `g0/gπ` at `(p; b)`, the rival profit that makes `g(p; b, π)` vanish.
fn profit_ratio(ctx: &MixedContext, p: f64, b: f64) -> Result<f64> {
    Ok(ctx.eval_g0(p, b)? / ctx.eval_gpi(p, b)?)
}

/// Margins of the kind's side inequalities, each nonnegative when it holds.
pub fn side_margins(ctx: &MixedContext, kind: MixedKind, w: f64) -> Result<Vec<f64>> {
    let (z1, z2) = (ctx.z1(), ctx.z2());
    let top = 1.0 - 2.0 * z1 + z2;
    match kind {
        MixedKind::M1 => {
            let pi2 = profit_ratio(ctx, z1 - w, z1)?;
            let c = 1.5 - z2;
            let lhs = 2.0 - 0.5 * w - c * ctx.eval_g0(z1, z1)?
                + (w / (z2 * (z2 - w)) + c * ctx.eval_gpi(z1, z1)? - 1.0 / (1.0 - z2)) * pi2;
            Ok(vec![-lhs])
        }
        MixedKind::M2 => {
            let pi2 = profit_ratio(ctx, 1.0 - z1 - w, 1.0 - z1)?;
            let lhs = z1 - (1.0 - z2) * (z2 - z1) + 0.5 * (1.0 - z2) * w;
            let rhs = (z1 / top + (1.0 - z2) / (top - w) - 1.0) * pi2;
            Ok(vec![lhs - rhs, pi2 - z2])
        }
        MixedKind::M3 => {
            let h_top = ctx.eval_h(top, top - w)?;
            let b = (z2 - z1) * z2 + 2.0 * z1 + 0.5 * (1.0 - z2) * w
                - z1 * z2 / top
                - (1.0 - z2) * z2 / (top - w);
            Ok(vec![1.0 - h_top, b])
        }
    }
}

/// True iff every side inequality of `kind` holds at `w`.
pub fn side_conditions(ctx: &MixedContext, kind: MixedKind, w: f64) -> bool {
    match side_margins(ctx, kind, w) {
        Ok(m) => m.iter().all(|&v| v >= 0.0),
        Err(_) => false,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixedEquilibrium {
    pub kind: MixedKind,
    pub w: f64,
    pub f1: CdfSpec,
    pub f2: CdfSpec,
    pub profits: (f64, f64),
}

impl MixedEquilibrium {
    pub fn context(&self) -> &MixedContext {
        self.f1.context()
    }
}

pub fn build_mixed(ctx: &MixedContext, kind: MixedKind, w: f64) -> Result<MixedEquilibrium> {
    if !side_conditions(ctx, kind, w) {
        return Err(Error::Condition {
            kind: kind.name(),
            z1: ctx.z1(),
            z2: ctx.z2(),
        });
    }
    let (z1, z2) = (ctx.z1(), ctx.z2());
    let top = 1.0 - 2.0 * z1 + z2;
    let wrap = |e: Error| match e {
        Error::Construction { reason, .. } => Error::Construction {
            kind: kind.name(),
            reason,
        },
        other => other,
    };
    let (f1, f2, profits) = match kind {
        MixedKind::M1 => {
            let pi2 = profit_ratio(ctx, z1 - w, z1)?;
            let g_top = ctx.eval_g(z1, z1, pi2)?;
            let mut segs = vec![Segment {
                lo: z1 - w,
                hi: z1,
                piece: Piece::G { b: z1, pi2 },
            }];
            if z1 < 1.0 - z1 {
                segs.push(Segment {
                    lo: z1,
                    hi: 1.0 - z1,
                    piece: Piece::Const { v: g_top },
                });
            }
            let f1 = CdfSpec::new(*ctx, segs, vec![Atom { at: 1.0 - z1, mass: 1.0 - g_top }]);
            let h_top = ctx.eval_h(z2, z2 - w)?;
            let f2 = CdfSpec::new(
                *ctx,
                vec![Segment {
                    lo: z2 - w,
                    hi: z2,
                    piece: Piece::H { a: z2 - w },
                }],
                vec![Atom { at: z2, mass: 1.0 - h_top }],
            );
            (f1, f2, (2.0 * (z1 - w), pi2))
        }
        MixedKind::M2 | MixedKind::M3 => {
            let b = 1.0 - z1;
            let pi2 = match kind {
                MixedKind::M2 => profit_ratio(ctx, b - w, b)?,
                _ => z2,
            };
            let g_top = ctx.eval_g(b, b, pi2)?;
            let f1 = CdfSpec::new(
                *ctx,
                vec![Segment {
                    lo: b - w,
                    hi: b,
                    piece: Piece::G { b, pi2 },
                }],
                vec![Atom { at: b, mass: 1.0 - g_top }],
            );
            let mut segs = vec![Segment {
                lo: top - w,
                hi: top,
                piece: Piece::H { a: top - w },
            }];
            let mut atoms = Vec::new();
            if kind == MixedKind::M3 {
                let h_top = ctx.eval_h(top, top - w)?;
                if top < z2 {
                    segs.push(Segment {
                        lo: top,
                        hi: z2,
                        piece: Piece::Const { v: h_top },
                    });
                }
                atoms.push(Atom { at: z2, mass: 1.0 - h_top });
            }
            let f2 = CdfSpec::new(*ctx, segs, atoms);
            (f1, f2, (2.0 * (b - w), pi2))
        }
    };
    Ok(MixedEquilibrium {
        kind,
        w,
        f1: f1.map_err(wrap)?,
        f2: f2.map_err(wrap)?,
        profits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::LocationPair;
    use approx::assert_relative_eq;

    fn ctx(z1: f64, z2: f64) -> MixedContext {
        MixedContext::new(LocationPair::new(z1, z2).unwrap()).unwrap()
    }

    // Widths and profits below come from a 40-digit re-implementation of
    // the kernels with an independent Ei and root finder.

    #[test]
    fn m1_at_lower_centre_point() {
        let c = ctx(0.48, 0.6);
        let root = solve_w(&c, MixedKind::M1).unwrap();
        assert_eq!(root.roots_found, 1);
        assert_relative_eq!(root.w, 0.072_877_669_531_896_14, max_relative = 1e-11);
        assert!(root.residual.abs() <= 1e-12);
        let eq = build_mixed(&c, MixedKind::M1, root.w).unwrap();
        assert_relative_eq!(eq.profits.0, 0.814_244_660_936_207_7, max_relative = 1e-11);
        assert_relative_eq!(eq.profits.1, 0.760_258_646_230_666_9, max_relative = 1e-10);
        assert_relative_eq!(eq.f1.atom_at(0.52), 0.635_947_008_851_852_9, max_relative = 1e-10);
        assert_relative_eq!(eq.f2.atom_at(0.6), 0.276_219_816_080_211_6, max_relative = 1e-10);
    }

    #[test]
    fn m2_holds_and_m3_fails_at_052_065() {
        let c = ctx(0.52, 0.65);
        let root = solve_w(&c, MixedKind::M2).unwrap();
        assert_relative_eq!(root.w, 0.089_907_881_407_899_93, max_relative = 1e-11);
        let eq = build_mixed(&c, MixedKind::M2, root.w).unwrap();
        assert_relative_eq!(eq.profits.0, 0.780_184_237_184_200_1, max_relative = 1e-11);
        assert_relative_eq!(eq.profits.1, 0.719_573_927_452_078_4, max_relative = 1e-10);
        assert!(eq.f2.atoms().is_empty());
        assert_relative_eq!(eq.f1.atom_at(0.48), 0.513_226_826_473_435_1, max_relative = 1e-10);

        let w3 = solve_w(&c, MixedKind::M3).unwrap().w;
        assert_relative_eq!(w3, 0.142_491_127_598_715_2, max_relative = 1e-11);
        assert!(!side_conditions(&c, MixedKind::M3, w3));
    }

    #[test]
    fn m3_holds_and_m2_fails_at_057_067() {
        let c = ctx(0.57, 0.67);
        let w2 = solve_w(&c, MixedKind::M2).unwrap().w;
        assert_relative_eq!(w2, 0.075_352_810_152_242_78, max_relative = 1e-11);
        assert!(!side_conditions(&c, MixedKind::M2, w2));
        let root = solve_w(&c, MixedKind::M3).unwrap();
        assert_relative_eq!(root.w, 0.031_553_380_174_083_3, max_relative = 1e-10);
        let eq = build_mixed(&c, MixedKind::M3, root.w).unwrap();
        assert_relative_eq!(eq.profits.0, 0.796_893_239_651_833_5, max_relative = 1e-11);
        assert_eq!(eq.profits.1, 0.67);
        assert_relative_eq!(eq.f1.atom_at(1.0 - 0.57), 0.800_457_404_230_988_5, max_relative = 1e-10);
    }

    #[test]
    fn outside_gate_is_a_condition_error() {
        let c = ctx(0.4, 0.7);
        for kind in MixedKind::ALL {
            assert!(matches!(solve_w(&c, kind), Err(Error::Condition { .. })));
        }
    }

    #[test]
    fn build_rejects_failing_side_conditions() {
        let c = ctx(0.52, 0.65);
        let w3 = solve_w(&c, MixedKind::M3).unwrap().w;
        assert!(matches!(build_mixed(&c, MixedKind::M3, w3), Err(Error::Condition { .. })));
    }

    #[test]
    fn finer_prescan_is_stable() {
        let c = ctx(0.48, 0.6);
        let coarse = solve_w(&c, MixedKind::M1).unwrap().w;
        let fine = solve_w_with(&c, MixedKind::M1, 10 * PRESCAN_SAMPLES).unwrap().w;
        assert!((coarse - fine).abs() < 1e-10);
    }
}
