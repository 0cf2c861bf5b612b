//! Adaptive 7/15-point Gauss–Kronrod integration for smooth integrands.

use std::cell::RefCell;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

// Gauss weights for nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_INTERVALS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GkTolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Default for GkTolerance {
    fn default() -> Self {
        Self { abs: 1e-14, rel: 1e-12 }
    }
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for (j, (&x, &wk)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = h * x;
        let s = f(c - dx) + f(c + dx);
        k += wk * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Integrates `f` over `[a, b]`, repeatedly bisecting the subinterval with
/// the largest Kronrod/Gauss error estimate until the summed estimate meets
/// `max(abs, rel·|I|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: &GkTolerance) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (v, e) = kronrod(&f, a, b);
    let mut parts = vec![(a, b, v, e)];
    let (mut total, mut err) = (v, e);
    loop {
        if err <= tol.abs.max(tol.rel * total.abs()) {
            return Ok(total);
        }
        let worst = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .expect("at least one interval");
        let (lo, hi, v, e) = parts[worst];
        let mid = 0.5 * (lo + hi);
        if parts.len() >= MAX_INTERVALS || mid <= lo.min(hi) || mid >= lo.max(hi) {
            return Err(Error::NoConvergence {
                lo: a,
                hi: b,
                refinements: parts.len() as u32,
            });
        }
        let (lv, le) = kronrod(&f, lo, mid);
        let (rv, re) = kronrod(&f, mid, hi);
        parts[worst] = (lo, mid, lv, le);
        parts.push((mid, hi, rv, re));
        total += lv + rv - v;
        err += le + re - e;
    }
}

/// [`integrate`] for an integrand that can fail; the first failure wins.
pub fn try_integrate<F: Fn(f64) -> Result<f64>>(f: F, a: f64, b: f64, tol: &GkTolerance) -> Result<f64> {
    let failure = RefCell::new(None);
    let v = integrate(
        |x| match f(x) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        a,
        b,
        tol,
    );
    match failure.into_inner() {
        Some(e) => Err(e),
        None => v,
    }
}
