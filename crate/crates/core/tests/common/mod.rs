//! Independent numerical oracles used only by the acceptance suite.
//!
//! These deliberately avoid the crate's special-function code paths:
//! log-gamma comes from quadrature of Binet's integral, the incomplete beta
//! from adaptive Simpson on the (normalized) density, and the Student-t CDF
//! from quadrature after a tangent substitution. Helper arithmetic is
//! re-implemented here rather than imported so a defect in the crate cannot
//! hide itself.

const LN_2PI_HALF: f64 = 0.918_938_533_204_672_7;

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    fn split(x: f64) -> (f64, f64) {
        let c = 134_217_729.0 * x;
        let hi = c - (c - x);
        (hi, x - hi)
    }
    let p = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    (p, ((ah * bh - p) + ah * bl + al * bh) + al * bl)
}

fn stirling_leading(z: f64) -> f64 {
    let (p, pe) = two_prod(z - 0.5, z.ln());
    let (s, se) = two_sum(p, -z);
    let (t, te) = two_sum(s, LN_2PI_HALF);
    t + (pe + se + te)
}

/// Composite Simpson rule with 2n panels.
fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, half_panels: usize) -> f64 {
    let n = 2 * half_panels;
    let h = (b - a) / n as f64;
    let mut s4 = 0.0;
    for i in 0..half_panels {
        s4 += f(a + (2 * i + 1) as f64 * h);
    }
    let mut s2 = 0.0;
    for i in 1..half_panels {
        s2 += f(a + (2 * i) as f64 * h);
    }
    (f(a) + f(b) + 4.0 * s4 + 2.0 * s2) * h / 3.0
}

/// log Gamma via Binet's second integral, lifted to z >= 8 by the
/// recurrence. The correction integral decays like exp(-2 pi t), so
/// truncation at t = 12 is far below double precision.
pub fn ln_gamma_oracle(z: f64) -> f64 {
    assert!(z > 0.0);
    let mut shift = 0.0;
    let mut zz = z;
    while zz < 8.0 {
        shift += zz.ln();
        zz += 1.0;
    }
    let integrand = |t: f64| {
        if t == 0.0 {
            1.0 / (2.0 * std::f64::consts::PI * zz)
        } else {
            (t / zz).atan() / (2.0 * std::f64::consts::PI * t).exp_m1()
        }
    };
    let correction = 2.0 * simpson(&integrand, 0.0, 12.0, 1 << 14);
    stirling_leading(zz) + correction - shift
}

/// Adaptive Simpson with a forced minimum depth so narrow bumps cannot slip
/// between probe points.
fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, eps: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        eps: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth >= 42 || (depth >= 9 && delta.abs() <= 15.0 * eps) {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, eps / 2.0, depth + 1)
            + rec(f, m, b, fm, frm, fb, right, eps / 2.0, depth + 1)
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, eps, 0)
}

/// Unnormalized Beta(a, b) mass on [0, x], rescaled so the density peak is
/// O(1). Endpoint singularities (exponent < 1) are removed by the power
/// substitutions t = u^(1/a) and 1 - t = v^(1/b).
fn beta_mass(x: f64, a: f64, b: f64, ln_scale: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let mut total = 0.0;
    let mut lo = 0.0;
    let mut hi = x.min(1.0);

    if a < 1.0 {
        let t0 = hi.min(0.125);
        let g = |u: f64| {
            if u <= 0.0 {
                (-ln_scale).exp()
            } else {
                (1.0 - u.powf(1.0 / a)).max(0.0).powf(b - 1.0) * (-ln_scale).exp()
            }
        };
        total += adaptive_simpson(&g, 0.0, t0.powf(a), 1e-13) / a;
        lo = t0;
    }
    if b < 1.0 && hi > 0.875 {
        let t1 = lo.max(0.875);
        if hi > t1 {
            let g = |v: f64| {
                if v <= 0.0 {
                    (-ln_scale).exp()
                } else {
                    (1.0 - v.powf(1.0 / b)).max(0.0).powf(a - 1.0) * (-ln_scale).exp()
                }
            };
            total += adaptive_simpson(&g, (1.0 - hi).powf(b), (1.0 - t1).powf(b), 1e-13) / b;
            hi = t1;
        }
    }
    if hi > lo {
        let f = |t: f64| {
            if t <= 0.0 || t >= 1.0 {
                if (t <= 0.0 && a > 1.0) || (t >= 1.0 && b > 1.0) {
                    0.0
                } else {
                    ((a - 1.0) * t.max(f64::MIN_POSITIVE).ln()
                        + (b - 1.0) * (1.0 - t).max(f64::MIN_POSITIVE).ln()
                        - ln_scale)
                        .exp()
                }
            } else {
                ((a - 1.0) * t.ln() + (b - 1.0) * (1.0 - t).ln() - ln_scale).exp()
            }
        };
        total += adaptive_simpson(&f, lo, hi, 1e-13);
    }
    total
}

/// Regularized incomplete beta by quadrature: the ratio of the partial to
/// the total mass, so no gamma-function evaluation is involved.
pub fn reg_inc_beta_oracle(x: f64, a: f64, b: f64) -> f64 {
    assert!((0.0..=1.0).contains(&x) && a > 0.0 && b > 0.0);
    if x == 0.0 {
        return 0.0;
    }
    if x == 1.0 {
        return 1.0;
    }
    // Rescale by the interior density peak when it exists; otherwise the
    // integral is O(1) already.
    let ln_scale = if a >= 1.0 && b >= 1.0 && a + b > 2.0 {
        let mode = (a - 1.0) / (a + b - 2.0);
        if mode > 0.0 && mode < 1.0 {
            (a - 1.0) * mode.ln() + (b - 1.0) * (1.0 - mode).ln()
        } else {
            0.0
        }
    } else {
        0.0
    };
    let den = beta_mass(1.0, a, b, ln_scale);
    let num = beta_mass(x, a, b, ln_scale);
    (num / den).clamp(0.0, 1.0)
}

/// Student-t CDF by quadrature. The substitution t = sqrt(dof) tan(theta)
/// turns both the normalizer and the partial integral into integrals of
/// cos(theta)^(dof - 1) over bounded intervals.
pub fn student_t_cdf_oracle(z: f64, dof: f64) -> f64 {
    assert!(dof >= 1.0);
    let g = |theta: f64| theta.cos().powf(dof - 1.0);
    let half = std::f64::consts::FRAC_PI_2;
    let normalizer = simpson(&g, -half, half, 1 << 13);
    let upper = (z / dof.sqrt()).atan();
    let partial = if z >= 0.0 {
        simpson(&g, 0.0, upper, 1 << 13)
    } else {
        -simpson(&g, upper, 0.0, 1 << 13)
    };
    (0.5 + partial / normalizer).clamp(0.0, 1.0)
}
