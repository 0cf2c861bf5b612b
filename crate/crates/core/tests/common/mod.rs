//! Oracles shared by the integration tests. None of them call into the
//! library's numerics.

#![allow(dead_code)]

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `Ei(x)` for `x ≠ 0`: power series for `x > 0` and `−1 ≤ x < 0`,
/// continued fraction for `E1(−x)` when `x < −1`.
pub fn ei_oracle(x: f64) -> f64 {
    assert!(x != 0.0);
    if x > 0.0 || x >= -1.0 {
        let mut term = 1.0;
        let mut sum = 0.0;
        for n in 1..400 {
            let n = n as f64;
            term *= x / n;
            let add = term / n;
            sum += add;
            if add.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        EULER_GAMMA + x.abs().ln() + sum
    } else {
        -e1_continued_fraction(-x)
    }
}

/// `E1(x)` for `x > 1` by the modified Lentz algorithm.
fn e1_continued_fraction(x: f64) -> f64 {
    let tiny = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..1000 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h * (-x).exp()
}

/// Composite Simpson rule with `n` (even) panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let x = a + i as f64 * h;
        s += if i % 2 == 1 { 4.0 * f(x) } else { 2.0 * f(x) };
    }
    s * h / 3.0
}

/// Informed demand by brute force over `n` equal consumer cells. Each cell
/// buys from the firm with the higher utility `1 − p − |x − z|`, splits on
/// a tie, and abstains when both utilities are negative.
pub fn brute_shares(z1: f64, z2: f64, p1: f64, p2: f64, n: usize) -> (f64, f64) {
    let (mut s1, mut s2) = (0.0, 0.0);
    let cell = 1.0 / n as f64;
    for i in 0..n {
        let x = (i as f64 + 0.5) * cell;
        let u1 = 1.0 - p1 - (x - z1).abs();
        let u2 = 1.0 - p2 - (x - z2).abs();
        if u1 < 0.0 && u2 < 0.0 {
            continue;
        }
        if u1 > u2 {
            s1 += cell;
        } else if u2 > u1 {
            s2 += cell;
        } else {
            s1 += 0.5 * cell;
            s2 += 0.5 * cell;
        }
    }
    (s1, s2)
}

/// `h(p; a)` from its integral form `4λ(a−δ) ∫_a^p e^{−λ(p−s)}/(s−δ)² ds`,
/// the solution of `h + h'/λ = 4(a−δ)/(p−δ)²` with `h(a) = 0`.
pub fn h_integral(z1: f64, z2: f64, p: f64, a: f64) -> f64 {
    let (l, d) = (1.0 / (2.0 * (1.0 - z2)), z2 - z1);
    4.0 * l * (a - d) * simpson(|s| (-l * (p - s)).exp() / ((s - d) * (s - d)), a, p, 20_000)
}

/// `g(p; b, π)` by integrating `g' = λ(g − 1 + 2π/(p+δ)²)` backwards from
/// its closed-form value at `p = b`.
pub fn g_integral(z1: f64, z2: f64, p: f64, b: f64, pi: f64) -> f64 {
    let (l, d) = (1.0 / (2.0 * (1.0 - z2)), z2 - z1);
    let k = 3.0 - z1 - 2.0 * z2 - b;
    let g_b = ((5.0 - z1 - 2.0 * z2 - b) - 2.0 * pi / (b + d)) / k;
    let r = |s: f64| 1.0 - 2.0 * pi / ((s + d) * (s + d));
    (-l * (b - p)).exp() * g_b + l * simpson(|s| (-l * (s - p)).exp() * r(s), p, b, 20_000)
}

/// Profit of a firm at `own` against a rival at `rival` by brute-force
/// consumer counting, captive buyer included.
pub fn brute_profit(firm: u8, z1: f64, z2: f64, own: f64, rival: f64, n: usize) -> f64 {
    let (p1, p2) = if firm == 1 { (own, rival) } else { (rival, own) };
    let (s1, s2) = brute_shares(z1, z2, p1, p2, n);
    if firm == 1 {
        own * (if p1 <= 1.0 - z1 { 1.0 } else { 0.0 } + s1)
    } else {
        own * (if p2 <= z2 { 1.0 } else { 0.0 } + s2)
    }
}
