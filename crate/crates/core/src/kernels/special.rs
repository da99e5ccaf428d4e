//! Special functions: log-gamma, regularized incomplete beta, Student-t CDF.
//!
//! `ln_gamma` uses the Stirling series with Bernoulli-number corrections and
//! a compensated evaluation of the leading term, which keeps the relative
//! error of `exp(ln_gamma(z))` below 1e-12 across `[1e-3, 1e3]`. The
//! incomplete beta uses the Lentz continued fraction, and the Student-t CDF
//! is reduced to the incomplete beta so that it stays accurate far into the
//! tails, where the posterior probabilities of large performance deltas live.

use crate::error::{Error, Result};

const LN_2PI_HALF: f64 = 0.918_938_533_204_672_7; // ln(2*pi)/2

/// Bernoulli correction coefficients B_{2j} / (2j (2j-1)) for the Stirling
/// series, j = 1..=8. With the series started at z >= 10 the truncation
/// error is below 2e-18.
const STIRLING_COEFFS: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

/// Error-free sum: returns (fl(a+b), rounding error).
#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

/// Error-free product via Dekker splitting: returns (fl(a*b), rounding error).
#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    #[inline]
    fn split(x: f64) -> (f64, f64) {
        let c = 134_217_729.0 * x; // 2^27 + 1
        let hi = c - (c - x);
        (hi, x - hi)
    }
    let p = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    let err = ((ah * bh - p) + ah * bl + al * bh) + al * bl;
    (p, err)
}

/// Leading Stirling term (z - 1/2) ln z - z + ln(2 pi)/2 with compensated
/// arithmetic. The naive evaluation alone loses ~1e-12 at z ~ 1e3.
#[inline]
fn stirling_leading(z: f64) -> f64 {
    let (p, pe) = two_prod(z - 0.5, z.ln());
    let (s, se) = two_sum(p, -z);
    let (t, te) = two_sum(s, LN_2PI_HALF);
    t + (pe + se + te)
}

/// Natural log of the gamma function for positive arguments.
///
/// Guarantees `|exp(ln_gamma(z)) - Γ(z)| / Γ(z) < 1e-12` on `[1e-3, 1e3]`.
pub fn ln_gamma(z: f64) -> Result<f64> {
    if z.is_nan() || z <= 0.0 || !z.is_finite() {
        return Err(Error::domain(format!(
            "ln_gamma requires z > 0, got {z}"
        )));
    }
    Ok(ln_gamma_unchecked(z))
}

pub(crate) fn ln_gamma_unchecked(z: f64) -> f64 {
    // Lift small arguments with the recurrence Γ(z+1) = z Γ(z).
    let mut shift = 0.0;
    let mut shift_c = 0.0; // Kahan compensation for the log sum
    let mut zz = z;
    while zz < 10.0 {
        let y = zz.ln() - shift_c;
        let t = shift + y;
        shift_c = (t - shift) - y;
        shift = t;
        zz += 1.0;
    }
    let w = 1.0 / zz;
    let w2 = w * w;
    let mut corr = 0.0;
    let mut term = w;
    for c in STIRLING_COEFFS {
        corr += c * term;
        term *= w2;
    }
    stirling_leading(zz) + corr - shift
}

/// ln B(a, b) = lnΓ(a) + lnΓ(b) - lnΓ(a+b).
pub fn ln_beta(a: f64, b: f64) -> Result<f64> {
    if a.is_nan() || b.is_nan() || a <= 0.0 || b <= 0.0 {
        return Err(Error::domain(format!(
            "ln_beta requires a, b > 0, got a={a}, b={b}"
        )));
    }
    Ok(ln_gamma_unchecked(a) + ln_gamma_unchecked(b) - ln_gamma_unchecked(a + b))
}

/// Regularized incomplete beta function I_x(a, b).
///
/// Monotone nondecreasing in `x` with I_0 = 0 and I_1 = 1 exactly.
pub fn reg_inc_beta(x: f64, a: f64, b: f64) -> Result<f64> {
    if a.is_nan() || b.is_nan() || a <= 0.0 || b <= 0.0 || !a.is_finite() || !b.is_finite() {
        return Err(Error::domain(format!(
            "reg_inc_beta requires a, b > 0, got a={a}, b={b}"
        )));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain(format!(
            "reg_inc_beta requires x in [0, 1], got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    let ln_prefactor = ln_gamma_unchecked(a + b)
        - ln_gamma_unchecked(a)
        - ln_gamma_unchecked(b)
        + a * x.ln()
        + b * (1.0 - x).ln();
    let front = ln_prefactor.exp();
    // Continued fraction converges fastest on x < (a+1)/(a+b+2); use the
    // symmetry I_x(a,b) = 1 - I_{1-x}(b,a) on the other side.
    let v = if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cont_frac(a, b, x) / a
    } else {
        1.0 - front * beta_cont_frac(b, a, 1.0 - x) / b
    };
    Ok(v.clamp(0.0, 1.0))
}

/// Lentz's algorithm for the incomplete beta continued fraction.
fn beta_cont_frac(a: f64, b: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 500;
    const EPS: f64 = 1e-16;
    const TINY: f64 = 1e-300;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;

    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;

    for m in 1..=MAX_ITER {
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
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// CDF of the standardized Student-t distribution with `dof` degrees of
/// freedom, evaluated at `z`.
///
/// Returns exactly 0.5 at z = 0 and satisfies cdf(-z) = 1 - cdf(z).
pub fn student_t_cdf(z: f64, dof: f64) -> Result<f64> {
    if dof.is_nan() || dof < 1.0 || !dof.is_finite() {
        return Err(Error::domain(format!(
            "student_t_cdf requires dof >= 1, got {dof}"
        )));
    }
    if z.is_nan() {
        return Err(Error::domain("student_t_cdf received NaN".to_string()));
    }
    if z == 0.0 {
        return Ok(0.5);
    }
    if z.is_infinite() {
        return Ok(if z > 0.0 { 1.0 } else { 0.0 });
    }
    let h = dof / (dof + z * z);
    let half_tail = 0.5 * reg_inc_beta(h, 0.5 * dof, 0.5)?;
    Ok(if z < 0.0 { half_tail } else { 1.0 - half_tail })
}
