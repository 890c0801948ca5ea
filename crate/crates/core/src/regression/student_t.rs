//! Two-tailed Student-t critical values by inverting the regularized
//! incomplete beta function.
//!
//! For `T ~ t(v)`, `P(|T| > t) = I_x(v/2, 1/2)` with `x = v / (v + t^2)`.
//! We solve in the complementary variable `y = t^2 / (v + t^2)`, which stays
//! well away from 1 even for very large `v`, so `t = sqrt(v y / (1 - y))` keeps
//! full relative precision.

use crate::error::{Error, Result};

/// Two-sided significance levels used when starring coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SignificanceLevel {
    FivePercent,
    TenPercent,
}

impl SignificanceLevel {
    pub fn alpha(self) -> f64 {
        match self {
            SignificanceLevel::FivePercent => 0.05,
            SignificanceLevel::TenPercent => 0.10,
        }
    }
}

/// Critical value `c` with `P(|T| >= c) = level` for `df` degrees of freedom.
pub fn t_critical(df: usize, level: SignificanceLevel) -> Result<f64> {
    t_critical_alpha(df, level.alpha())
}

/// Same as [`t_critical`] for an arbitrary two-sided level in `(0, 1)`.
pub fn t_critical_alpha(df: usize, alpha: f64) -> Result<f64> {
    if df < 1 {
        return Err(Error::DegreesOfFreedom(df));
    }
    assert!(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
    let v = df as f64;
    // P(|T| <= t) = I_y(1/2, v/2) = 1 - alpha
    let y = inverse_beta_reg(0.5, 0.5 * v, 1.0 - alpha);
    Ok((v * y / (1.0 - y)).sqrt())
}

/// Two-sided p-value `P(|T| >= |t|)`.
pub fn two_sided_p(t: f64, df: usize) -> Result<f64> {
    if df < 1 {
        return Err(Error::DegreesOfFreedom(df));
    }
    let v = df as f64;
    if !t.is_finite() {
        return Ok(0.0);
    }
    Ok(beta_reg(0.5 * v, 0.5, v / (v + t * t)))
}

/// `ln Γ(x)` for `x > 0`, Lanczos approximation (g = 7, 9 terms).
pub(crate) fn ln_gamma(x: f64) -> f64 {
    const COEFFS: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEFFS[0];
    for (i, c) in COEFFS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// `x^a (1-x)^b / (a B(a,b))`, the prefactor of the continued fraction.
fn front(a: f64, b: f64, x: f64) -> f64 {
    (a * x.ln() + b * (-x).ln_1p() - ln_beta(a, b)).exp() / a
}

/// Regularized incomplete beta `I_x(a, b)`.
pub(crate) fn beta_reg(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    if x < (a + 1.0) / (a + b + 2.0) {
        front(a, b, x) * beta_cf(a, b, x)
    } else {
        1.0 - front(b, a, 1.0 - x) * beta_cf(b, a, 1.0 - x)
    }
}

/// Continued fraction for the incomplete beta, modified Lentz.
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=100_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Solves `I_x(a, b) = p` for `x`; safeguarded Newton inside a bisection bracket.
fn inverse_beta_reg(a: f64, b: f64, p: f64) -> f64 {
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let ln_b = ln_beta(a, b);
    let mut x = 0.5;
    for _ in 0..200 {
        let f = beta_reg(a, b, x) - p;
        if f == 0.0 {
            return x;
        }
        if f < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let density = ((a - 1.0) * x.ln() + (b - 1.0) * (-x).ln_1p() - ln_b).exp();
        let newton = x - f / density;
        let next = if density.is_finite() && density > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= 1e-15 * x.max(1e-300) {
            return next;
        }
        x = next;
    }
    x
}
