//! Student-t and standard normal distribution functions.
//!
//! Everything here is built on two primitives: the regularized incomplete
//! beta function (continued fraction, modified Lentz) and the regularized
//! incomplete gamma function, which supplies `erfc`.

use crate::error::{Error, Result};

/// Degrees of freedom above which the t distribution is replaced by the
/// standard normal.
pub const NORMAL_DOF_CAP: u64 = 1_000_000;

const LN_SQRT_PI: f64 = 0.572_364_942_924_700_1;
const CF_EPS: f64 = 1e-16;
const CF_TINY: f64 = 1e-300;
const CF_MAX_ITER: usize = 20_000;

/// A validated request for a t tail probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailQuery {
    dof: u64,
    threshold: f64,
}

impl TailQuery {
    pub fn new(dof: u64, threshold: f64) -> Result<Self> {
        if dof == 0 {
            return Err(Error::param("degrees of freedom must be at least 1"));
        }
        if !(threshold >= 0.0) {
            return Err(Error::param(format!(
                "tail threshold must be a nonnegative number, got {threshold}"
            )));
        }
        Ok(Self { dof, threshold })
    }

    pub fn dof(&self) -> u64 {
        self.dof
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }
}

/// `P[|t_dof| > threshold]`.
pub fn t_two_sided_tail(q: TailQuery) -> f64 {
    two_sided_tail(q.dof, q.threshold)
}

/// Unchecked two-sided tail; `dof >= 1` and `c` may be any real (its sign
/// is ignored).
pub(crate) fn two_sided_tail(dof: u64, c: f64) -> f64 {
    let c = c.abs();
    if c == 0.0 {
        return 1.0;
    }
    if c.is_infinite() {
        return 0.0;
    }
    if dof > NORMAL_DOF_CAP {
        return erfc(c / std::f64::consts::SQRT_2);
    }
    let nu = dof as f64;
    let c2 = c * c;
    // x = nu / (nu + c^2), 1 - x = c^2 / (nu + c^2); both formed directly.
    let x = nu / (nu + c2);
    let y = c2 / (nu + c2);
    inc_beta(0.5 * nu, 0.5, x, y)
}

/// `P[t_dof <= q]`.
pub fn t_cdf(dof: u64, q: f64) -> Result<f64> {
    if dof == 0 {
        return Err(Error::param("degrees of freedom must be at least 1"));
    }
    if q.is_nan() {
        return Err(Error::param("t_cdf argument is NaN"));
    }
    let half = 0.5 * two_sided_tail(dof, q);
    Ok(if q > 0.0 { 1.0 - half } else { half })
}

/// Density of the t distribution.
pub fn t_pdf(dof: u64, q: f64) -> f64 {
    if dof > NORMAL_DOF_CAP {
        return normal_pdf(q);
    }
    let nu = dof as f64;
    let log_norm = ln_gamma(0.5 * (nu + 1.0)) - ln_gamma(0.5 * nu) - 0.5 * nu.ln() - LN_SQRT_PI;
    (log_norm - 0.5 * (nu + 1.0) * (q * q / nu).ln_1p()).exp()
}

/// Quantile of the t distribution: returns `q` with `P[t_dof <= q] = p`.
pub fn t_quantile(dof: u64, p: f64) -> Result<f64> {
    if dof == 0 {
        return Err(Error::param("degrees of freedom must be at least 1"));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::param(format!("probability must lie in (0, 1), got {p}")));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    if dof > NORMAL_DOF_CAP {
        return normal_quantile(p);
    }
    // Solve on the upper half using the two-sided tail: tail(q) = 2 min(p, 1 - p).
    let (upper, sign) = if p > 0.5 { (1.0 - p, 1.0) } else { (p, -1.0) };
    let target = 2.0 * upper;
    let q = match dof {
        1 => (std::f64::consts::FRAC_PI_2 * (1.0 - target)).tan(),
        2 => {
            // Closed form: tail(q) = 1 - q / sqrt(2 + q^2).
            let a = 1.0 - target;
            a * (2.0 / (1.0 - a * a)).sqrt()
        }
        _ => solve_upper_t(dof, target)?,
    };
    Ok(sign * q)
}

/// Finds `q > 0` with `P[|t_dof| > q] = target` by safeguarded Newton on
/// the log tail.
fn solve_upper_t(dof: u64, target: f64) -> Result<f64> {
    let ln_target = target.ln();
    let f = |q: f64| two_sided_tail(dof, q).ln() - ln_target;

    // Cornish-Fisher start from the normal quantile.
    let z = normal_quantile(1.0 - 0.5 * target)?;
    let nu = dof as f64;
    let z3 = z * z * z;
    let z5 = z3 * z * z;
    let mut q = z + (z3 + z) / (4.0 * nu) + (5.0 * z5 + 16.0 * z3 + 3.0 * z) / (96.0 * nu * nu);
    if !(q > 0.0) || !q.is_finite() {
        q = z.max(1e-3);
    }

    let mut lo = 0.0;
    let mut hi = q;
    while f(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::NumericalFailure {
                context: "t_quantile",
                detail: format!("no upper bracket for tail {target} at dof {dof}"),
            });
        }
    }
    q = q.clamp(lo, hi);
    for _ in 0..200 {
        let fq = f(q);
        if fq == 0.0 {
            return Ok(q);
        }
        if fq > 0.0 {
            lo = q;
        } else {
            hi = q;
        }
        let tail = two_sided_tail(dof, q);
        // d/dq ln tail(q) = -2 pdf(q) / tail(q)
        let slope = -2.0 * t_pdf(dof, q) / tail;
        let mut next = q - fq / slope;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - q).abs() <= 1e-15 * q.max(1.0) || hi - lo <= 1e-15 * q.max(1.0) {
            return Ok(next);
        }
        q = next;
    }
    Ok(q)
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Standard normal quantile: Acklam's rational approximation polished by
/// one Halley step against `erfc`.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::param(format!("probability must lie in (0, 1), got {p}")));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    if p > 0.5 {
        return normal_quantile(1.0 - p).map(|q| -q);
    }
    let mut x = acklam(p);
    for _ in 0..2 {
        let e = normal_cdf(x) - p;
        let u = e * (2.0 * std::f64::consts::PI).sqrt() * (0.5 * x * x).exp();
        x -= u / (1.0 + 0.5 * x * u);
    }
    Ok(x)
}

fn acklam(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.02425;
    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

/// Complementary error function via the regularized upper incomplete gamma
/// function, `erfc(x) = Q(1/2, x^2)` for `x >= 0`.
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x == 0.0 {
        return 1.0;
    }
    let z = x * x;
    if z > 750.0 {
        return 0.0;
    }
    if z < 1.5 {
        1.0 - lower_gamma_series(0.5, z)
    } else {
        upper_gamma_cf(0.5, z)
    }
}

/// Regularized lower incomplete gamma `P(a, x)` by its power series.
fn lower_gamma_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut del = 1.0 / a;
    let mut sum = del;
    for _ in 0..CF_MAX_ITER {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * CF_EPS {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

/// Regularized upper incomplete gamma `Q(a, x)` by continued fraction.
fn upper_gamma_cf(a: f64, x: f64) -> f64 {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / CF_TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..CF_MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < CF_TINY {
            d = CF_TINY;
        }
        c = b + an / c;
        if c.abs() < CF_TINY {
            c = CF_TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < CF_EPS {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma(a)).exp() * h
}

/// Regularized incomplete beta `I_x(a, b)`; `y = 1 - x` is passed
/// separately so callers can form it without cancellation.
pub(crate) fn inc_beta(a: f64, b: f64, x: f64, y: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if y <= 0.0 {
        return 1.0;
    }
    let ln_front = a * x.ln() + b * y.ln() - ln_beta(a, b);
    if x < (a + 1.0) / (a + b + 2.0) {
        ln_front.exp() * beta_cf(a, b, x) / a
    } else {
        1.0 - ln_front.exp() * beta_cf(b, a, y) / b
    }
}

fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < CF_TINY {
        d = CF_TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < CF_TINY {
            d = CF_TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < CF_TINY {
            c = CF_TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < CF_TINY {
            d = CF_TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < CF_TINY {
            c = CF_TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < CF_EPS {
            break;
        }
    }
    h
}

fn ln_beta(a: f64, b: f64) -> f64 {
    // The t distribution always has b = 1/2; for large a the difference of
    // log-gammas cancels badly, so use the asymptotic ratio instead.
    if b == 0.5 && a >= 200.0 {
        return LN_SQRT_PI - ln_gamma_half_ratio(a);
    }
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// `ln(Gamma(a + 1/2) / Gamma(a))` for large `a`.
fn ln_gamma_half_ratio(a: f64) -> f64 {
    let inv = 1.0 / a;
    let inv2 = inv * inv;
    // ln of sqrt(a) * (1 - 1/(8a) + 1/(128a^2) + 5/(1024a^3) - 21/(32768a^4))
    0.5 * a.ln()
        + (-inv / 8.0 + inv2 / 128.0 + 5.0 * inv2 * inv / 1024.0 - 21.0 * inv2 * inv2 / 32768.0)
            .ln_1p()
}

/// Natural log of the gamma function for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
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
        // Reflection.
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}
