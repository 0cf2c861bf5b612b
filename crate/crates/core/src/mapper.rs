//! Classification of location pairs and grid sweeps over the `(z1, z2)` plane.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::market::{captive_demand, Firm, LocationPair};
use crate::mixed::{
    build_mixed, in_gate, side_conditions, solve_w_with, MixedContext, MixedEquilibrium, MixedKind,
    PRESCAN_SAMPLES,
};
use crate::par::{self, Execution};
use crate::pure::{first_pure, PureEquilibrium, PureKind};
use crate::specfun::QuadTolerance;
use crate::verify::{audit_mixed, expected_captive_revenue, AuditConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegionCode {
    P1,
    P2,
    P3,
    P4,
    M1,
    M2,
    M3,
    Unresolved,
}

impl RegionCode {
    pub const ALL: [RegionCode; 8] = [
        RegionCode::P1,
        RegionCode::P2,
        RegionCode::P3,
        RegionCode::P4,
        RegionCode::M1,
        RegionCode::M2,
        RegionCode::M3,
        RegionCode::Unresolved,
    ];

    pub fn code(self) -> i32 {
        match self {
            RegionCode::P1 => 1,
            RegionCode::P2 => 2,
            RegionCode::P3 => 3,
            RegionCode::P4 => 4,
            RegionCode::M1 => 17,
            RegionCode::M2 => 18,
            RegionCode::M3 => 19,
            RegionCode::Unresolved => -1,
        }
    }

    pub fn from_code(code: i32) -> Option<RegionCode> {
        RegionCode::ALL.into_iter().find(|r| r.code() == code)
    }

    pub fn is_mixed(self) -> bool {
        matches!(self, RegionCode::M1 | RegionCode::M2 | RegionCode::M3)
    }
}

impl From<PureKind> for RegionCode {
    fn from(k: PureKind) -> Self {
        match k {
            PureKind::P1 => RegionCode::P1,
            PureKind::P2 => RegionCode::P2,
            PureKind::P3 => RegionCode::P3,
            PureKind::P4 => RegionCode::P4,
        }
    }
}

impl From<MixedKind> for RegionCode {
    fn from(k: MixedKind) -> Self {
        match k {
            MixedKind::M1 => RegionCode::M1,
            MixedKind::M2 => RegionCode::M2,
            MixedKind::M3 => RegionCode::M3,
        }
    }
}

/// One classified grid point, in the caller's orientation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionRecord {
    pub z1: f64,
    pub z2: f64,
    pub region: RegionCode,
    /// Support width; 0 for pure and unresolved points.
    pub w: f64,
    pub pi1: f64,
    pub pi2: f64,
    /// `π* − E[p·captive]` per firm, when requested.
    pub informed: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum Equilibrium {
    Pure(PureEquilibrium),
    Mixed(MixedEquilibrium),
    Unresolved,
}

impl Equilibrium {
    pub fn region(&self) -> RegionCode {
        match self {
            Equilibrium::Pure(e) => e.kind.into(),
            Equilibrium::Mixed(e) => e.kind.into(),
            Equilibrium::Unresolved => RegionCode::Unresolved,
        }
    }

    /// Profits in canonical orientation.
    pub fn profits(&self) -> (f64, f64) {
        match self {
            Equilibrium::Pure(e) => e.profits,
            Equilibrium::Mixed(e) => e.profits,
            Equilibrium::Unresolved => (0.0, 0.0),
        }
    }

    pub fn width(&self) -> f64 {
        match self {
            Equilibrium::Mixed(e) => e.w,
            _ => 0.0,
        }
    }
}

/// Equilibrium of a location pair together with the map back to the
/// caller's orientation.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub z1: f64,
    pub z2: f64,
    pub canonical: LocationPair,
    /// True when the caller's firm 1 is canonical firm 2.
    pub swapped: bool,
    pub equilibrium: Equilibrium,
}

/// Maps `(z1, z2)` to `0 ≤ z1 ≤ z2`, `z1 + z2 ≥ 1`.
///
/// Ordering the pair relabels the firms; reflecting `z ↦ 1 − z` also
/// relabels them, because the left firm becomes the right one.
pub fn canonicalize(z1: f64, z2: f64) -> Result<(LocationPair, bool)> {
    let (mut a, mut b, mut swapped) = if z1 > z2 { (z2, z1, true) } else { (z1, z2, false) };
    if a + b < 1.0 {
        (a, b) = (1.0 - b, 1.0 - a);
        swapped = !swapped;
    }
    Ok((LocationPair::new(a, b)?, swapped))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyConfig {
    pub quad: QuadTolerance,
    /// Audit run on every mixed candidate before it is accepted.
    pub audit: AuditConfig,
    pub prescan_samples: usize,
    pub informed_profits: bool,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self {
            quad: QuadTolerance::default(),
            audit: AuditConfig::with_step(0.01),
            prescan_samples: PRESCAN_SAMPLES,
            informed_profits: false,
        }
    }
}

fn validate_point(z1: f64, z2: f64) -> Result<()> {
    for z in [z1, z2] {
        if !(z > 0.0 && z < 1.0) {
            return Err(Error::InvalidInput(format!(
                "locations must lie strictly inside (0, 1), got ({z1}, {z2})"
            )));
        }
    }
    Ok(())
}

fn try_mixed(ctx: &MixedContext, kind: MixedKind, cfg: &ClassifyConfig) -> Option<MixedEquilibrium> {
    if !in_gate(ctx.z(), kind) {
        return None;
    }
    let attempt = || -> Result<Option<MixedEquilibrium>> {
        let root = solve_w_with(ctx, kind, cfg.prescan_samples)?;
        if !side_conditions(ctx, kind, root.w) {
            return Ok(None);
        }
        let eq = build_mixed(ctx, kind, root.w)?;
        let report = audit_mixed(&eq, &cfg.audit)?;
        if !report.passes() {
            log::warn!(
                "{} candidate at ({}, {}) fails its audit:\n{report}",
                kind.name(),
                ctx.z1(),
                ctx.z2()
            );
            return Ok(None);
        }
        Ok(Some(eq))
    };
    match attempt() {
        Ok(eq) => eq,
        Err(e) => {
            log::debug!("{} rejected at ({}, {}): {e}", kind.name(), ctx.z1(), ctx.z2());
            None
        }
    }
}

fn m3_side_conditions_hold(ctx: &MixedContext, cfg: &ClassifyConfig) -> bool {
    solve_w_with(ctx, MixedKind::M3, cfg.prescan_samples)
        .map(|r| side_conditions(ctx, MixedKind::M3, r.w))
        .unwrap_or(false)
}

/// Classifies in canonical orientation: P1–P4 first, then M1, M2, M3.
fn classify_canonical(z: &LocationPair, cfg: &ClassifyConfig) -> Equilibrium {
    if let Some(e) = first_pure(z) {
        return Equilibrium::Pure(e);
    }
    let Ok(ctx) = MixedContext::with_tolerance(*z, cfg.quad) else {
        return Equilibrium::Unresolved;
    };
    for kind in MixedKind::ALL {
        if let Some(eq) = try_mixed(&ctx, kind, cfg) {
            if kind == MixedKind::M2 && m3_side_conditions_hold(&ctx, cfg) {
                log::warn!(
                    "M2 and M3 side conditions both hold at ({}, {}); keeping M2",
                    z.z1(),
                    z.z2()
                );
            }
            return Equilibrium::Mixed(eq);
        }
    }
    Equilibrium::Unresolved
}

pub fn solve_point(z1: f64, z2: f64) -> Result<Solution> {
    solve_point_with(z1, z2, &ClassifyConfig::default())
}

pub fn solve_point_with(z1: f64, z2: f64, cfg: &ClassifyConfig) -> Result<Solution> {
    validate_point(z1, z2)?;
    let (canonical, swapped) = canonicalize(z1, z2)?;
    let equilibrium = if z1 == z2 {
        Equilibrium::Unresolved
    } else {
        classify_canonical(&canonical, cfg)
    };
    Ok(Solution {
        z1,
        z2,
        canonical,
        swapped,
        equilibrium,
    })
}

/// `π* − E[p·captive]` per firm, canonical orientation.
fn informed_profits(eq: &Equilibrium, z: &LocationPair, cfg: &ClassifyConfig) -> Result<(f64, f64)> {
    match eq {
        Equilibrium::Pure(e) => {
            let (p1, p2) = (e.prices.p1, e.prices.p2);
            Ok((
                e.profits.0 - p1 * captive_demand(Firm::One, z, p1),
                e.profits.1 - p2 * captive_demand(Firm::Two, z, p2),
            ))
        }
        Equilibrium::Mixed(e) => Ok((
            e.profits.0 - expected_captive_revenue(Firm::One, &e.f1, &cfg.audit.quad)?,
            e.profits.1 - expected_captive_revenue(Firm::Two, &e.f2, &cfg.audit.quad)?,
        )),
        Equilibrium::Unresolved => Ok((0.0, 0.0)),
    }
}

impl Solution {
    pub fn record(&self, cfg: &ClassifyConfig) -> Result<RegionRecord> {
        let (mut pi1, mut pi2) = self.equilibrium.profits();
        let mut informed = if cfg.informed_profits {
            Some(informed_profits(&self.equilibrium, &self.canonical, cfg)?)
        } else {
            None
        };
        if self.swapped {
            std::mem::swap(&mut pi1, &mut pi2);
            informed = informed.map(|(a, b)| (b, a));
        }
        Ok(RegionRecord {
            z1: self.z1,
            z2: self.z2,
            region: self.equilibrium.region(),
            w: self.equilibrium.width(),
            pi1,
            pi2,
            informed,
        })
    }
}

pub fn classify_point(z1: f64, z2: f64) -> Result<RegionRecord> {
    classify_point_with(z1, z2, &ClassifyConfig::default())
}

pub fn classify_point_with(z1: f64, z2: f64, cfg: &ClassifyConfig) -> Result<RegionRecord> {
    solve_point_with(z1, z2, cfg)?.record(cfg)
}

/// Midpoint grid over a rectangle of the location plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    pub z1_range: (f64, f64),
    pub z2_range: (f64, f64),
    pub z1_spacing: f64,
    pub z2_spacing: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self::with_spacing(0.002)
    }
}

impl GridConfig {
    /// `(0, 1) × (1/2, 1)` at a uniform spacing.
    pub fn with_spacing(spacing: f64) -> Self {
        Self {
            z1_range: (0.0, 1.0),
            z2_range: (0.5, 1.0),
            z1_spacing: spacing,
            z2_spacing: spacing,
        }
    }

    /// Blow-up of the mixed-strategy band: `z1 ∈ (0.42, 0.6)` at 0.0005.
    pub fn fine_window() -> Self {
        Self {
            z1_range: (0.42, 0.6),
            z2_range: (0.5, 1.0),
            z1_spacing: 0.0005,
            z2_spacing: 0.002,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, (lo, hi), step) in [
            ("z1", self.z1_range, self.z1_spacing),
            ("z2", self.z2_range, self.z2_spacing),
        ] {
            if !(step > 0.0) || !step.is_finite() {
                return Err(Error::InvalidInput(format!("{name} spacing must be positive, got {step}")));
            }
            if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
                return Err(Error::InvalidInput(format!("{name} range ({lo}, {hi}) must lie within [0, 1]")));
            }
        }
        Ok(())
    }

    fn axis(range: (f64, f64), step: f64) -> Vec<f64> {
        let n = ((range.1 - range.0) / step).round() as usize;
        (0..n).map(|i| range.0 + (i as f64 + 0.5) * step).collect()
    }

    pub fn dims(&self) -> (usize, usize) {
        (
            Self::axis(self.z1_range, self.z1_spacing).len(),
            Self::axis(self.z2_range, self.z2_spacing).len(),
        )
    }

    /// Grid points row by row, `z1` varying fastest.
    pub fn points(&self) -> Result<Vec<(f64, f64)>> {
        self.validate()?;
        let xs = Self::axis(self.z1_range, self.z1_spacing);
        let ys = Self::axis(self.z2_range, self.z2_spacing);
        Ok(ys.iter().flat_map(|&y| xs.iter().map(move |&x| (x, y))).collect())
    }
}

pub fn scan_grid(grid: &GridConfig, cfg: &ClassifyConfig, exec: Execution) -> Result<Vec<RegionRecord>> {
    let points = grid.points()?;
    par::map(&points, exec, |&(z1, z2)| classify_point_with(z1, z2, cfg))
        .into_iter()
        .collect()
}

const MAP_HEADER: &str = "# z1 z2 region w pi1 pi2 | region codes: 1=P1 2=P2 3=P3 4=P4 17=M1 18=M2 19=M3 -1=unresolved";

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// One map row without the trailing newline.
pub fn format_record(r: &RegionRecord, extra_columns: bool) -> Result<String> {
    let mut row = format!(
        "{:.15} {:.15} {} {:.15} {:.15} {:.15}",
        r.z1,
        r.z2,
        r.region.code(),
        r.w,
        r.pi1,
        r.pi2
    );
    if extra_columns {
        let (a, b) = r.informed.ok_or_else(|| {
            Error::InvalidInput(format!("record ({}, {}) lacks informed profits", r.z1, r.z2))
        })?;
        write!(row, " {a:.15} {b:.15}").expect("writing to a String");
    }
    Ok(row)
}

/// Renders map rows. With `extra_columns`, two more columns carry the
/// informed-market share of each firm's profit.
pub fn format_map(records: &[RegionRecord], extra_columns: bool) -> Result<String> {
    let mut out = String::from(MAP_HEADER);
    if extra_columns {
        out.push_str(" | extra: informed_pi1 informed_pi2");
    }
    out.push('\n');
    for r in records {
        out.push_str(&format_record(r, extra_columns)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn emit_map(records: &[RegionRecord], path: &Path, extra_columns: bool) -> Result<()> {
    if records.is_empty() {
        return Err(Error::InvalidInput("no records to write".into()));
    }
    write_file(path, &format_map(records, extra_columns)?)
}

/// Price grid `lo, lo + step, …, hi` shared by both CDF columns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceGrid {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Default for PriceGrid {
    fn default() -> Self {
        Self {
            lo: 0.0,
            hi: 1.0,
            step: 0.001,
        }
    }
}

impl PriceGrid {
    pub fn points(&self) -> Result<Vec<f64>> {
        if !(self.step > 0.0) || !(self.lo <= self.hi) {
            return Err(Error::InvalidInput(format!(
                "price grid needs step > 0 and lo <= hi, got {self:?}"
            )));
        }
        let n = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize;
        Ok((0..=n).map(|k| self.lo + k as f64 * self.step).collect())
    }
}

pub fn format_cdf(eq: &MixedEquilibrium, grid: &PriceGrid) -> Result<String> {
    let mut out = String::from("# p1 F1(p1) p2 F2(p2)\n");
    for p in grid.points()? {
        let (a, b) = (eq.f1.eval(p)?, eq.f2.eval(p)?);
        writeln!(out, "{p:.15} {a:.15} {p:.15} {b:.15}").expect("writing to a String");
    }
    Ok(out)
}

pub fn emit_cdf(eq: &MixedEquilibrium, grid: &PriceGrid, path: &Path) -> Result<()> {
    write_file(path, &format_cdf(eq, grid)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn region_codes_round_trip() {
        for r in RegionCode::ALL {
            assert_eq!(RegionCode::from_code(r.code()), Some(r));
        }
        assert_eq!(RegionCode::from_code(5), None);
    }

    #[test]
    fn canonicalize_swaps_and_reflects() {
        let (z, s) = canonicalize(0.7, 0.4).unwrap();
        assert_eq!((z.z1(), z.z2(), s), (0.4, 0.7, true));
        let (z, s) = canonicalize(0.25, 0.5).unwrap();
        assert_eq!((z.z1(), z.z2(), s), (0.5, 0.75, true));
        let (z, s) = canonicalize(0.5, 0.25).unwrap();
        assert_eq!((z.z1(), z.z2(), s), (0.5, 0.75, false));
    }

    #[test]
    fn landmark_points() {
        let cases = [
            ((0.4, 0.7), RegionCode::P1),
            ((0.25, 0.85), RegionCode::P2),
            ((0.7, 0.8), RegionCode::P3),
            ((0.84, 0.9), RegionCode::P4),
            ((0.48, 0.6), RegionCode::M1),
            ((0.52, 0.65), RegionCode::M2),
            ((0.57, 0.67), RegionCode::M3),
        ];
        for ((z1, z2), want) in cases {
            assert_eq!(classify_point(z1, z2).unwrap().region, want, "({z1}, {z2})");
        }
    }

    #[test]
    fn coincident_and_central_points_are_unresolved() {
        assert_eq!(classify_point(0.7, 0.7).unwrap().region, RegionCode::Unresolved);
        assert_eq!(classify_point(0.49, 0.51).unwrap().region, RegionCode::Unresolved);
    }

    #[test]
    fn reflected_point_swaps_profits() {
        let a = classify_point(0.4, 0.7).unwrap();
        let b = classify_point(0.3, 0.6).unwrap();
        assert_eq!(a.region, b.region);
        assert_abs_diff_eq!(a.pi1, b.pi2, epsilon = 1e-12);
        assert_abs_diff_eq!(a.pi2, b.pi1, epsilon = 1e-12);
    }

    #[test]
    fn grid_dimensions() {
        assert_eq!(GridConfig::default().dims(), (500, 250));
        assert_eq!(GridConfig::fine_window().dims(), (360, 250));
        let empty = GridConfig {
            z1_range: (0.3, 0.3),
            ..GridConfig::default()
        };
        assert!(empty.points().unwrap().is_empty());
        assert!(GridConfig::with_spacing(0.0).points().is_err());
    }

    #[test]
    fn grid_order_is_z1_fastest() {
        let g = GridConfig::with_spacing(0.25);
        let pts = g.points().unwrap();
        assert_eq!(pts, vec![(0.125, 0.625), (0.375, 0.625), (0.625, 0.625), (0.875, 0.625),
                             (0.125, 0.875), (0.375, 0.875), (0.625, 0.875), (0.875, 0.875)]);
    }

    #[test]
    fn map_row_format() {
        let r = classify_point(0.4, 0.7).unwrap();
        let text = format_map(&[r], false).unwrap();
        let row = text.lines().nth(1).unwrap();
        let cols: Vec<&str> = row.split_whitespace().collect();
        assert_eq!(cols.len(), 6);
        assert_eq!(cols[2], "1");
        assert_eq!(cols[3].parse::<f64>().unwrap(), 0.0);
        assert!((cols[4].parse::<f64>().unwrap() - 0.96).abs() < 1e-12);
        assert!(format_map(&[r], true).is_err());
    }

    #[test]
    fn cdf_rows_below_and_above_support() {
        let sol = solve_point(0.48, 0.6).unwrap();
        let Equilibrium::Mixed(eq) = sol.equilibrium else {
            panic!("expected a mixed equilibrium");
        };
        let text = format_cdf(&eq, &PriceGrid::default()).unwrap();
        let rows: Vec<Vec<f64>> = text
            .lines()
            .skip(1)
            .map(|l| l.split_whitespace().map(|c| c.parse().unwrap()).collect())
            .collect();
        assert_eq!(rows.len(), 1001);
        assert!(rows.iter().all(|r| r.len() == 4));
        assert_eq!(rows[0][1], 0.0);
        assert_eq!(rows[0][3], 0.0);
        assert!((rows[1000][1] - 1.0).abs() < 1e-12);
        assert!((rows[1000][3] - 1.0).abs() < 1e-12);
    }
}
