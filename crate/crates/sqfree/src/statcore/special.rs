use crate::error::{arg, Result};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

fn check_gamma_args(a: f64, z: f64) -> Result<()> {
    if !(a > 0.0) || !a.is_finite() {
        return arg(format!("incomplete gamma needs a > 0, got {a}"));
    }
    if !(z >= 0.0) {
        return arg(format!("incomplete gamma needs z >= 0, got {z}"));
    }
    Ok(())
}

/// Regularized upper incomplete gamma `Q(a, z) = Γ(a, z) / Γ(a)`.
pub fn incomplete_gamma_q(a: f64, z: f64) -> Result<f64> {
    check_gamma_args(a, z)?;
    if z == 0.0 {
        return Ok(1.0);
    }
    if z.is_infinite() {
        return Ok(0.0);
    }
    Ok(statrs::function::gamma::gamma_ur(a, z))
}

/// Regularized lower incomplete gamma `P(a, z) = 1 - Q(a, z)`.
pub fn incomplete_gamma_p(a: f64, z: f64) -> Result<f64> {
    check_gamma_args(a, z)?;
    if z == 0.0 {
        return Ok(0.0);
    }
    if z.is_infinite() {
        return Ok(1.0);
    }
    Ok(statrs::function::gamma::gamma_lr(a, z))
}

pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// Complementary error function, evaluated as `Q(1/2, x²)` for full relative
/// accuracy deep in the tail.
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
    statrs::function::gamma::gamma_ur(0.5, x * x)
}

pub fn erf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x == 0.0 {
        return 0.0;
    }
    let p = statrs::function::gamma::gamma_lr(0.5, x * x);
    if x < 0.0 {
        -p
    } else {
        p
    }
}

/// Standard normal distribution function Φ(x).
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Exponential integral `E1(x) = ∫_x^∞ e^{-t}/t dt` for `x > 0`.
pub fn expint_e1(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return arg(format!("E1 needs x > 0, got {x}"));
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    if x <= 1.0 {
        // power series
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..200 {
            let kf = k as f64;
            term *= -x / kf;
            let add = term / kf;
            sum += add;
            if add.abs() < 1e-17 * sum.abs().max(1e-300) {
                break;
            }
        }
        return Ok(-EULER_GAMMA - x.ln() - sum);
    }
    // continued fraction, modified Lentz
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            return Ok(h * (-x).exp());
        }
    }
    Err(crate::Error::Invariant(format!("E1 continued fraction did not converge at {x}")))
}

const BERNOULLI_2K: [f64; 8] =
    [1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0, -691.0 / 2730.0, 7.0 / 6.0, -3617.0 / 510.0];

/// Riemann zeta at real `s > 1` by Euler–Maclaurin summation.
pub fn zeta(s: f64) -> Result<f64> {
    if !(s > 1.0) {
        return arg(format!("zeta is only evaluated for real s > 1, got {s}"));
    }
    if s > 60.0 {
        return Ok(1.0 + 2f64.powf(-s) + 3f64.powf(-s));
    }
    const N: u32 = 12;
    let n = N as f64;
    let mut sum: f64 = (1..N).map(|k| (k as f64).powf(-s)).sum();
    sum += n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s);
    // rising factorial s (s+1) ... (s+2k-2) over (2k)!
    let mut coef = s / 2.0;
    let mut npow = n.powf(-s - 1.0);
    for (k, b) in BERNOULLI_2K.iter().enumerate() {
        sum += b * coef * npow;
        let j = 2 * k as u32 + 1;
        coef *= (s + j as f64) * (s + j as f64 + 1.0) / (((j + 2) * (j + 3)) as f64);
        npow /= n * n;
    }
    Ok(sum)
}
