use super::MixedContext;
use crate::error::{Error, Result};

/// Shape of the continuous part of a CDF over one segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Piece {
    /// `g(p; b, π2)`.
    G { b: f64, pi2: f64 },
    /// `h(p; a)`.
    H { a: f64 },
    Const { v: f64 },
}

impl Piece {
    pub fn value(&self, ctx: &MixedContext, p: f64) -> Result<f64> {
        match *self {
            Piece::G { b, pi2 } => ctx.eval_g(p, b, pi2),
            Piece::H { a } => ctx.eval_h(p, a),
            Piece::Const { v } => Ok(v),
        }
    }

    pub fn density(&self, ctx: &MixedContext, p: f64) -> Result<f64> {
        match *self {
            Piece::G { b, pi2 } => ctx.density_g(p, b, pi2),
            Piece::H { a } => ctx.density_h(p, a),
            Piece::Const { .. } => Ok(0.0),
        }
    }

    /// Value and density together, sharing the kernel evaluation.
    pub fn value_and_density(&self, ctx: &MixedContext, p: f64) -> Result<(f64, f64)> {
        match *self {
            Piece::G { b, pi2 } => {
                let g = ctx.eval_g(p, b, pi2)?;
                Ok((g, ctx.density_g_from(p, g, pi2)))
            }
            Piece::H { a } => {
                let h = ctx.eval_h(p, a)?;
                Ok((h, ctx.density_h_from(p, h, a)))
            }
            Piece::Const { v } => Ok((v, 0.0)),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Piece::Const { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
    pub piece: Piece,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub at: f64,
    pub mass: f64,
}

const MASS_TOLERANCE: f64 = 1e-12;
const DENSITY_SAMPLES: usize = 64;

/// A price CDF made of continuous segments plus point masses.
///
/// `F(x) = C(x) + Σ_{atoms at ≤ x} mass`, where the continuous part `C`
/// follows the segment pieces, is 0 below the first segment and is held
/// constant between and after segments. `F` is right-continuous.
#[derive(Debug, Clone, PartialEq)]
pub struct CdfSpec {
    ctx: MixedContext,
    segments: Vec<Segment>,
    tops: Vec<f64>,
    atoms: Vec<Atom>,
}

impl CdfSpec {
    /// Builds and validates a CDF. Fails on overlapping segments, atom
    /// masses outside `[0, 1]`, negative sampled density, a continuous part
    /// that does not start at 0 or jumps at a join, or total mass ≠ 1.
    pub fn new(ctx: MixedContext, segments: Vec<Segment>, mut atoms: Vec<Atom>) -> Result<Self> {
        let fail = |reason: String| Error::Construction { kind: "cdf", reason };
        atoms.sort_by(|a, b| a.at.total_cmp(&b.at));
        for atom in &atoms {
            if !(0.0..=1.0).contains(&atom.mass) {
                return Err(fail(format!("atom at {} has mass {}", atom.at, atom.mass)));
            }
        }
        let mut tops = Vec::with_capacity(segments.len());
        let mut prev_top = 0.0;
        for (i, seg) in segments.iter().enumerate() {
            if !(seg.lo < seg.hi) {
                return Err(fail(format!("empty or reversed segment [{}, {}]", seg.lo, seg.hi)));
            }
            if i > 0 && seg.lo < segments[i - 1].hi {
                return Err(fail(format!("segment starting at {} overlaps its predecessor", seg.lo)));
            }
            let start = seg.piece.value(&ctx, seg.lo)?;
            if (start - prev_top).abs() > MASS_TOLERANCE {
                return Err(fail(format!(
                    "continuous part jumps from {prev_top} to {start} at {}",
                    seg.lo
                )));
            }
            for k in 0..=DENSITY_SAMPLES {
                let p = seg.lo + (seg.hi - seg.lo) * k as f64 / DENSITY_SAMPLES as f64;
                let d = seg.piece.density(&ctx, p)?;
                if d < -MASS_TOLERANCE {
                    return Err(fail(format!("negative density {d} at {p}")));
                }
            }
            prev_top = seg.piece.value(&ctx, seg.hi)?;
            tops.push(prev_top);
        }
        let cdf = Self {
            ctx,
            segments,
            tops,
            atoms,
        };
        let total = cdf.total_mass();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(fail(format!("total mass {total} differs from 1")));
        }
        Ok(cdf)
    }

    /// Unit mass at `q`.
    pub fn point_mass(ctx: MixedContext, q: f64) -> Result<Self> {
        Self::new(ctx, Vec::new(), vec![Atom { at: q, mass: 1.0 }])
    }

    pub fn context(&self) -> &MixedContext {
        &self.ctx
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn continuous_mass(&self) -> f64 {
        self.tops.last().copied().unwrap_or(0.0)
    }

    pub fn total_mass(&self) -> f64 {
        self.continuous_mass() + self.atoms.iter().map(|a| a.mass).sum::<f64>()
    }

    /// Smallest and largest points of the support.
    pub fn support_bounds(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for s in &self.segments {
            lo = lo.min(s.lo);
            hi = hi.max(s.hi);
        }
        for a in &self.atoms {
            lo = lo.min(a.at);
            hi = hi.max(a.at);
        }
        (lo, hi)
    }

    /// Continuous part `C(x)`.
    pub fn continuous(&self, x: f64) -> Result<f64> {
        let mut value = 0.0;
        for (seg, &top) in self.segments.iter().zip(&self.tops) {
            if x < seg.lo {
                break;
            }
            if x >= seg.hi {
                value = top;
                continue;
            }
            return seg.piece.value(&self.ctx, x);
        }
        Ok(value)
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let atoms: f64 = self.atoms.iter().filter(|a| a.at <= x).map(|a| a.mass).sum();
        Ok(self.continuous(x)? + atoms)
    }

    /// `F(x − 0)`.
    pub fn left_limit(&self, x: f64) -> Result<f64> {
        let atoms: f64 = self.atoms.iter().filter(|a| a.at < x).map(|a| a.mass).sum();
        Ok(self.continuous(x)? + atoms)
    }

    /// Density of the continuous part; 0 off the segments.
    pub fn density(&self, x: f64) -> Result<f64> {
        match self.segments.iter().find(|s| s.lo <= x && x < s.hi) {
            Some(s) => s.piece.density(&self.ctx, x),
            None => Ok(0.0),
        }
    }

    pub fn atom_at(&self, x: f64) -> f64 {
        self.atoms.iter().filter(|a| a.at == x).map(|a| a.mass).sum()
    }
}
