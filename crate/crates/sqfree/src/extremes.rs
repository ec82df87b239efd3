//! Times of the extremes of the restricted Mertens walk on segments of
//! length `T`: the arcsine law of `t_min/T` (and `t_max/T`) and the scaling
//! law `f(τ/T)/T` of the separation `τ = t_max − t_min`.

use std::f64::consts::PI;
use std::io::Write;

use serde::Serialize;

use crate::error::{arg, Error, Result};
use crate::numth::csv_err;
use crate::par;
use crate::seqgen::{BitSequence, SqfCursor};
use crate::statcore::quad::gauss_kronrod;
use crate::statcore::{chi2_pvalue, zeta, PValue};

/// Extremes of the walk `W_0 = 0, W_k = μ̂(s) + … + μ̂(s+k−1)` for `k ≤ T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SegmentExtremes {
    pub segment_start: u64,
    pub t: u64,
    pub t_min: u64,
    pub t_max: u64,
    pub tau: i64,
}

impl SegmentExtremes {
    pub fn x_min(&self) -> f64 {
        self.t_min as f64 / self.t as f64
    }

    pub fn x_max(&self) -> f64 {
        self.t_max as f64 / self.t as f64
    }

    pub fn tau_scaled(&self) -> f64 {
        self.tau as f64 / self.t as f64
    }
}

/// First-attainment times `(t_min, t_max)` of the walk driven by `bits`.
pub fn walk_extremes(bits: &[u8]) -> (u64, u64) {
    let (mut w, mut lo, mut hi) = (0i64, 0i64, 0i64);
    let (mut t_min, mut t_max) = (0u64, 0u64);
    for (k, &b) in bits.iter().enumerate() {
        w += if b != 0 { 1 } else { -1 };
        if w < lo {
            lo = w;
            t_min = k as u64 + 1;
        } else if w > hi {
            hi = w;
            t_max = k as u64 + 1;
        }
    }
    (t_min, t_max)
}

fn from_bits(segment_start: u64, bits: &[u8]) -> SegmentExtremes {
    let (t_min, t_max) = walk_extremes(bits);
    SegmentExtremes { segment_start, t: bits.len() as u64, t_min, t_max, tau: t_max as i64 - t_min as i64 }
}

/// Extremes on the segment of `t` ordinals starting at `segment_start`.
pub fn segment_extremes(seq: &BitSequence, segment_start: u64, t: u64) -> Result<SegmentExtremes> {
    if t == 0 {
        return arg("segment length must be >= 1");
    }
    Ok(from_bits(segment_start, &seq.unpack(segment_start, t)?))
}

/// Segments per cursor in [`sieved_extremes`].
const SEGMENT_GROUP: u64 = 2000;

/// Extremes of `n` consecutive segments of length `t` starting at `start`,
/// sieving the ordinals on the fly.
pub fn sieved_extremes(start: u64, t: u64, n: u64) -> Result<Vec<SegmentExtremes>> {
    if t == 0 || start == 0 {
        return arg("segments start at ordinal >= 1 and have length >= 1");
    }
    let groups = n.div_ceil(SEGMENT_GROUP) as usize;
    let parts = par::try_map_range(groups, |g| {
        let first = g as u64 * SEGMENT_GROUP;
        let count = SEGMENT_GROUP.min(n - first);
        let mut cur = SqfCursor::at_ordinal(start + first * t)?;
        let mut out = Vec::with_capacity(count as usize);
        for i in 0..count {
            let bits = cur.take_unpacked(t)?;
            out.push(from_bits(start + (first + i) * t, &bits));
        }
        Ok::<_, Error>(out)
    })?;
    Ok(parts.concat())
}

/// Extremes of the consecutive length-`t` segments of a stored sequence,
/// from `start` for `n` segments.
pub fn stored_extremes(seq: &BitSequence, start: u64, t: u64, n: u64) -> Result<Vec<SegmentExtremes>> {
    if t == 0 {
        return arg("segment length must be >= 1");
    }
    let need = n.checked_mul(t).ok_or_else(|| Error::Resource("segment span overflows".into()))?;
    if start < seq.start_ordinal() || start + need > seq.end_ordinal() {
        return Err(Error::Coverage(format!(
            "{n} segments of {t} from {start} need ordinals up to {}, sequence holds [{}, {})",
            start + need,
            seq.start_ordinal(),
            seq.end_ordinal()
        )));
    }
    par::try_map_range(n as usize, |i| segment_extremes(seq, start + i as u64 * t, t))
}

/// Observed against expected counts in one histogram bin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistBin {
    pub lo: f64,
    pub hi: f64,
    pub observed: u64,
    pub expected: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentCheck {
    pub order: u32,
    pub sample: f64,
    pub exact: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistributionFit {
    pub samples: usize,
    pub bins: Vec<HistBin>,
    pub chi2: f64,
    pub dof: u32,
    pub p_value: PValue,
    pub moments: Vec<MomentCheck>,
}

pub const MIN_SAMPLES: usize = 1000;
pub const ARCSINE_BINS: usize = 50;
pub const TAU_BINS: usize = 40;

/// `F(x) = (2/π) arcsin √x`, the arcsine distribution function.
pub fn arcsine_cdf(x: f64) -> f64 {
    2.0 / PI * x.clamp(0.0, 1.0).sqrt().asin()
}

/// `1/(π √(x(1−x)))` on `(0, 1)`.
pub fn arcsine_density(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    1.0 / (PI * (x * (1.0 - x)).sqrt())
}

/// `⟨x^k⟩ = C(2k, k) / 4^k` under the arcsine law.
pub fn arcsine_moment(k: u32) -> f64 {
    (0..k).map(|j| (2 * j + 1) as f64 / (2 * j + 2) as f64).product()
}

fn sample_moment(xs: &[f64], k: u32) -> f64 {
    xs.iter().map(|x| x.abs().powi(k as i32)).sum::<f64>() / xs.len() as f64
}

/// χ² over the bins after merging neighbours until every expected count is at least 5.
fn fit(
    xs: &[f64],
    edges: &[f64],
    mass: impl Fn(f64, f64) -> Result<f64>,
    moments: Vec<MomentCheck>,
) -> Result<DistributionFit> {
    let n = xs.len() as f64;
    let nb = edges.len() - 1;
    let mut counts = vec![0u64; nb];
    for &x in xs {
        let i = edges.partition_point(|&e| e <= x).clamp(1, nb) - 1;
        counts[i] += 1;
    }
    let mut bins: Vec<HistBin> = Vec::new();
    let mut pending: Option<HistBin> = None;
    for i in 0..nb {
        let b = HistBin {
            lo: edges[i],
            hi: edges[i + 1],
            observed: counts[i],
            expected: n * mass(edges[i], edges[i + 1])?,
        };
        let mut cur = match pending.take() {
            Some(p) => {
                HistBin { lo: p.lo, hi: b.hi, observed: p.observed + b.observed, expected: p.expected + b.expected }
            }
            None => b,
        };
        if cur.expected >= 5.0 {
            bins.push(cur);
        } else if i + 1 == nb {
            if let Some(last) = bins.last_mut() {
                last.hi = cur.hi;
                last.observed += cur.observed;
                last.expected += cur.expected;
            } else {
                bins.push(cur);
            }
        } else {
            cur.hi = b.hi;
            pending = Some(cur);
        }
    }
    if bins.len() < 2 {
        return Err(Error::Degenerate("fewer than two usable histogram bins".into()));
    }
    let chi2: f64 = bins.iter().map(|b| (b.observed as f64 - b.expected).powi(2) / b.expected).sum();
    let dof = bins.len() as u32 - 1;
    Ok(DistributionFit { samples: xs.len(), bins, chi2, dof, p_value: chi2_pvalue(chi2, dof)?, moments })
}

/// Compares samples of `t_min/T` (or `t_max/T`) with the arcsine law over
/// [`ARCSINE_BINS`] equal-width bins; moments of order 1–6 are reported.
pub fn arcsine_compare(xs: &[f64]) -> Result<DistributionFit> {
    arcsine_compare_binned(xs, ARCSINE_BINS)
}

pub fn arcsine_compare_binned(xs: &[f64], bins: usize) -> Result<DistributionFit> {
    if xs.len() < MIN_SAMPLES {
        return arg(format!("need at least {MIN_SAMPLES} samples, got {}", xs.len()));
    }
    if xs.iter().any(|x| !(0.0..=1.0).contains(x)) {
        return arg("arcsine samples must lie in [0, 1]");
    }
    let edges: Vec<f64> = (0..=bins).map(|i| i as f64 / bins as f64).collect();
    let moments =
        (1..=6).map(|k| MomentCheck { order: k, sample: sample_moment(xs, k), exact: arcsine_moment(k) }).collect();
    fit(xs, &edges, |a, b| Ok(arcsine_cdf(b) - arcsine_cdf(a)), moments)
}

/// Scaling function of `τ/T`:
/// `f(x) = (2(1−|x|)/x²) Σ_{m∈ℤ} (2m+1)/sinh((2m+1) π √((1−|x|)/|x|))`.
///
/// Near `|x| = 1` the series is summed in its Poisson-dual form
/// `f(x) = (1/(2|x|)) [1 + 2 Σ_{k≥1} (−1)^k sech²(π² k / (2a))]`.
/// Returns 0 for `|x| < 10⁻⁶`.
pub fn mori_f(x: f64) -> Result<f64> {
    let ax = x.abs();
    if !(ax > 0.0 && ax < 1.0) {
        return arg(format!("mori_f is defined for 0 < |x| < 1, got {x}"));
    }
    if ax < 1e-6 {
        return Ok(0.0);
    }
    let a = PI * ((1.0 - ax) / ax).sqrt();
    if a >= 1.0 {
        let mut s = 0.0;
        for m in 0.. {
            let k = (2 * m + 1) as f64;
            if k * a > 700.0 {
                break;
            }
            let t = k / (k * a).sinh();
            s += t;
            if t < 1e-16 * s {
                break;
            }
        }
        Ok(4.0 * (1.0 - ax) / (ax * ax) * s)
    } else {
        let mut s = 1.0;
        for k in 1.. {
            let y = PI * PI * k as f64 / (2.0 * a);
            if y > 350.0 {
                break;
            }
            let t = 2.0 / y.cosh().powi(2);
            s += if k % 2 == 0 { t } else { -t };
            if t < 1e-16 {
                break;
            }
        }
        Ok(s / (2.0 * ax))
    }
}

/// `∫_a^b f(x) dx` for `0 ≤ a < b ≤ 1`.
fn mori_mass_positive(a: f64, b: f64) -> Result<f64> {
    gauss_kronrod(
        |x| if x <= 0.0 || x >= 1.0 { density_limit(x) } else { mori_f(x).unwrap_or(0.0) },
        a,
        b,
        1e-13,
        1e-12,
    )
}

fn density_limit(x: f64) -> f64 {
    if x >= 1.0 {
        0.5
    } else {
        0.0
    }
}

/// Probability that `τ/T` falls in `[a, b]`, for `−1 ≤ a < b ≤ 1`.
pub fn mori_mass(a: f64, b: f64) -> Result<f64> {
    if !(a < b && a >= -1.0 && b <= 1.0) {
        return arg(format!("bad interval [{a}, {b}]"));
    }
    if a >= 0.0 {
        mori_mass_positive(a, b)
    } else if b <= 0.0 {
        mori_mass_positive(-b, -a)
    } else {
        Ok(mori_mass_positive(0.0, -a)? + mori_mass_positive(0.0, b)?)
    }
}

/// `⟨|x|^n⟩ = 2 ∫_0^1 x^n f(x) dx`.
pub fn tau_moment(n: u32) -> Result<f64> {
    let knots = [0.0, 0.25, 0.5, 0.75, 1.0];
    let mut total = 0.0;
    for w in knots.windows(2) {
        total += gauss_kronrod(
            |x| {
                if x <= 0.0 || x >= 1.0 {
                    x.powi(n as i32) * density_limit(x)
                } else {
                    x.powi(n as i32) * mori_f(x).unwrap_or(0.0)
                }
            },
            w[0],
            w[1],
            1e-14,
            1e-13,
        )?;
    }
    Ok(2.0 * total)
}

/// Closed forms of the first four absolute moments of `τ/T`.
pub fn tau_moment_closed(n: u32) -> Option<f64> {
    let z3 = zeta(3.0).ok()?;
    let z5 = zeta(5.0).ok()?;
    Some(match n {
        1 => (4.0 * 2f64.ln() - 1.0) / 3.0,
        2 => (7.0 * z3 - 2.0) / 16.0,
        3 => (147.0 * z3 - 34.0) / 480.0,
        4 => (1701.0 * z3 - 930.0 * z5 - 182.0) / 3840.0,
        _ => return None,
    })
}

/// Four-decimal values of `⟨|τ/T|^n⟩`, `n = 1..10`, as tabulated for the random walk.
pub const TAU_MOMENTS_4DP: [f64; 10] = [0.5908, 0.4009, 0.2972, 0.2339, 0.1918, 0.1621, 0.1401, 0.1233, 0.1100, 0.0992];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TauMoment {
    pub order: u32,
    pub quadrature: f64,
    pub tabulated: Option<f64>,
    pub closed_form: Option<f64>,
}

pub fn tau_moment_table(max_order: u32) -> Result<Vec<TauMoment>> {
    (1..=max_order)
        .map(|n| {
            Ok(TauMoment {
                order: n,
                quadrature: tau_moment(n)?,
                tabulated: TAU_MOMENTS_4DP.get(n as usize - 1).copied(),
                closed_form: tau_moment_closed(n),
            })
        })
        .collect()
}

/// Compares samples of `τ/T` with the scaling law over [`TAU_BINS`]
/// equal-width bins on `[−1, 1]`; absolute moments of order 1–10 are reported.
pub fn tau_compare(xs: &[f64]) -> Result<DistributionFit> {
    tau_compare_binned(xs, TAU_BINS)
}

pub fn tau_compare_binned(xs: &[f64], bins: usize) -> Result<DistributionFit> {
    if xs.len() < MIN_SAMPLES {
        return arg(format!("need at least {MIN_SAMPLES} samples, got {}", xs.len()));
    }
    if xs.iter().any(|x| !(-1.0..=1.0).contains(x)) {
        return arg("tau samples must lie in [-1, 1]");
    }
    let edges: Vec<f64> = (0..=bins).map(|i| -1.0 + 2.0 * i as f64 / bins as f64).collect();
    let moments = (1..=10)
        .map(|k| Ok(MomentCheck { order: k, sample: sample_moment(xs, k), exact: tau_moment(k)? }))
        .collect::<Result<Vec<_>>>()?;
    fit(xs, &edges, mori_mass, moments)
}

/// Histogram CSV with both count and density normalisations:
/// `x_lo,x_hi,count_observed,count_expected,density_observed,density_expected`.
pub fn write_fit_csv<W: Write>(fit: &DistributionFit, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x_lo", "x_hi", "count_observed", "count_expected", "density_observed", "density_expected"])
        .map_err(csv_err)?;
    let n = fit.samples as f64;
    for b in &fit.bins {
        let width = b.hi - b.lo;
        w.write_record([
            b.lo.to_string(),
            b.hi.to_string(),
            b.observed.to_string(),
            format!("{:.6}", b.expected),
            format!("{:.8}", b.observed as f64 / (n * width)),
            format!("{:.8}", b.expected / (n * width)),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Per-segment CSV: `segment_start,t,t_min,t_max,tau`.
pub fn write_extremes_csv<W: Write>(ext: &[SegmentExtremes], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for e in ext {
        w.serialize(e).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// `order,quadrature,tabulated,closed_form`, empty where not available.
pub fn write_tau_moments_csv<W: Write>(rows: &[TauMoment], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Summary of an extreme-time experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtremesSummary {
    pub segments: usize,
    pub t: u64,
    pub arcsine_min: DistributionFit,
    pub arcsine_max: DistributionFit,
    pub tau: DistributionFit,
}

pub fn summarize(ext: &[SegmentExtremes]) -> Result<ExtremesSummary> {
    let t = ext.first().map(|e| e.t).unwrap_or(0);
    let xs_min: Vec<f64> = ext.iter().map(SegmentExtremes::x_min).collect();
    let xs_max: Vec<f64> = ext.iter().map(SegmentExtremes::x_max).collect();
    let taus: Vec<f64> = ext.iter().map(SegmentExtremes::tau_scaled).collect();
    Ok(ExtremesSummary {
        segments: ext.len(),
        t,
        arcsine_min: arcsine_compare(&xs_min)?,
        arcsine_max: arcsine_compare(&xs_max)?,
        tau: tau_compare(&taus)?,
    })
}
