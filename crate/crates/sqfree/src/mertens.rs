//! The restricted Mertens walk `M̂(n) = Σ_{k≤n} μ̂(k)`, block variables over
//! ensembles of disjoint blocks, and diagnostics against a fair walk.

use std::collections::BTreeMap;
use std::io::Write;

use rand::Rng;
use serde::Serialize;

use crate::error::{arg, Error, Result};
use crate::numth::csv_err;
use crate::par;
use crate::rng::{fair_bits, substream};
use crate::seqgen::{for_each_segment, nth_squarefree, par_fold_segments, BitSequence, SieveConfig, SqfCursor};

/// Ordinals `[start, start + len)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BlockSpec {
    pub start: u64,
    pub len: u64,
}

impl BlockSpec {
    pub fn end(&self) -> u64 {
        self.start + self.len
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GapPolicy {
    /// Every block is followed by `H` skipped ordinals.
    Fixed(u64),
    /// Gaps drawn uniformly from `[mean/2, 3 mean/2]`.
    Random { mean: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Ensemble {
    pub blocks: Vec<BlockSpec>,
    /// Gap following each block.
    pub gaps: Vec<u64>,
    pub gap_policy: GapPolicy,
    pub seed: Option<u64>,
    /// Ordinal bounds `[L1, L2)`.
    pub bounds: (u64, u64),
}

impl Ensemble {
    /// `N·L + Σ H_i`.
    pub fn span(&self) -> u64 {
        self.blocks.iter().map(|b| b.len).sum::<u64>() + self.gaps.iter().sum::<u64>()
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Smallest ordinal range holding every block.
    pub fn covering(&self) -> Option<BlockSpec> {
        let first = self.blocks.first()?;
        let last = self.blocks.last()?;
        Some(BlockSpec { start: first.start, len: last.end() - first.start })
    }
}

/// `N` blocks of length `L` laid out from `L1`, each followed by a gap.
pub fn build_ensemble(
    l1: u64,
    l2: u64,
    n: usize,
    l: u64,
    gap_policy: GapPolicy,
    seed: Option<u64>,
) -> Result<Ensemble> {
    if l1 == 0 || l == 0 {
        return arg("blocks start at ordinal >= 1 and have length >= 1");
    }
    if l2 <= l1 {
        return arg(format!("empty bounds [{l1}, {l2})"));
    }
    let d = l2 - l1;
    if (n as u128) * (l as u128) > d as u128 {
        return arg(format!("{n} blocks of {l} do not fit in {d} ordinals"));
    }
    let gaps: Vec<u64> = match gap_policy {
        GapPolicy::Fixed(h) => vec![h; n],
        GapPolicy::Random { mean } => {
            let seed = seed.ok_or_else(|| Error::Argument("random gaps need a seed".into()))?;
            let lo = mean.div_ceil(2);
            let hi = mean + mean / 2;
            (0..n).map(|i| substream(seed, i as u64).random_range(lo..=hi)).collect()
        }
    };
    let span = n as u128 * l as u128 + gaps.iter().map(|&g| g as u128).sum::<u128>();
    if span > d as u128 {
        return arg(format!("blocks and gaps need {span} ordinals, bounds allow {d}"));
    }
    let mut blocks = Vec::with_capacity(n);
    let mut at = l1;
    for g in &gaps {
        blocks.push(BlockSpec { start: at, len: l });
        at += l + g;
    }
    Ok(Ensemble { blocks, gaps, gap_policy, seed, bounds: (l1, l2) })
}

/// Where block bits come from: a stored sequence, the sieve, or a seeded
/// fair coin used to validate the tests themselves.
pub trait BlockSource: Sync {
    /// Unpacked `0`/`1` bits of block number `index`.
    fn block_bits(&self, index: usize, spec: BlockSpec) -> Result<Vec<u8>>;

    /// Block variables `B_L(ℓ)` for every block, in order.
    fn block_sums(&self, blocks: &[BlockSpec]) -> Result<Vec<i64>> {
        par::try_map_range(blocks.len(), |i| {
            let bits = self.block_bits(i, blocks[i])?;
            Ok(2 * bits.iter().map(|&b| b as i64).sum::<i64>() - bits.len() as i64)
        })
    }
}

impl BlockSource for BitSequence {
    fn block_bits(&self, _index: usize, spec: BlockSpec) -> Result<Vec<u8>> {
        self.unpack(spec.start, spec.len)
    }

    fn block_sums(&self, blocks: &[BlockSpec]) -> Result<Vec<i64>> {
        blocks.iter().map(|b| self.sum_mu_hat(b.start, b.len)).collect()
    }
}

/// Sieves each block on demand.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sieved;

/// Consecutive blocks handled by one forward cursor in [`Sieved::block_sums`].
const SIEVED_GROUP: usize = 2048;

impl BlockSource for Sieved {
    fn block_bits(&self, _index: usize, spec: BlockSpec) -> Result<Vec<u8>> {
        SqfCursor::at_ordinal(spec.start)?.take_unpacked(spec.len)
    }

    fn block_sums(&self, blocks: &[BlockSpec]) -> Result<Vec<i64>> {
        check_ordered(blocks)?;
        let groups = blocks.len().div_ceil(SIEVED_GROUP);
        let parts = par::try_map_range(groups, |g| {
            let chunk = &blocks[g * SIEVED_GROUP..((g + 1) * SIEVED_GROUP).min(blocks.len())];
            let mut cur = SqfCursor::at_ordinal(chunk[0].start)?;
            let mut out = Vec::with_capacity(chunk.len());
            for b in chunk {
                cur.skip(b.start - cur.ordinal())?;
                out.push(cur.sum_mu_hat(b.len)?);
            }
            Ok::<_, Error>(out)
        })?;
        Ok(parts.concat())
    }
}

fn check_ordered(blocks: &[BlockSpec]) -> Result<()> {
    if blocks.windows(2).any(|w| w[1].start < w[0].end()) {
        return arg("blocks must be ordered and disjoint");
    }
    Ok(())
}

/// I.i.d. fair bits; block `i` uses substream `(seed, i)`.
#[derive(Debug, Clone, Copy)]
pub struct FairCoin {
    pub seed: u64,
}

impl BlockSource for FairCoin {
    fn block_bits(&self, index: usize, spec: BlockSpec) -> Result<Vec<u8>> {
        Ok(fair_bits(&mut substream(self.seed, index as u64), spec.len as usize))
    }
}

/// `M̂(n)` by direct summation over `sqf_1 .. sqf_n`.
pub fn mertens_restricted(n: u64) -> Result<i64> {
    if n == 0 {
        return Ok(0);
    }
    let top = nth_squarefree(n)?;
    par_fold_segments(
        1,
        top + 1,
        &SieveConfig::default(),
        |_, om| {
            om.iter()
                .map(|&o| match o {
                    o if o < 0 => 0i64,
                    o if o & 1 == 0 => 1,
                    _ => -1,
                })
                .sum::<i64>()
        },
        0,
        |a, b| a + b,
    )
}

/// `B_L(ℓ)` from a stored sequence.
pub fn block_variable(spec: BlockSpec, seq: &BitSequence) -> Result<i64> {
    seq.sum_mu_hat(spec.start, spec.len)
}

pub fn block_values(ens: &Ensemble, source: &dyn BlockSource) -> Result<Vec<i64>> {
    source.block_sums(&ens.blocks)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentReport {
    pub l: u64,
    pub n: usize,
    /// `⟨B_L^k⟩` over the ensemble.
    pub moments: BTreeMap<u32, f64>,
    /// Gaussian leading order `L^{k/2} (k-1)!!` (zero for odd `k`).
    pub reference: BTreeMap<u32, f64>,
    /// Exact moments of a fair ±1 walk of `L` steps.
    pub exact_walk: BTreeMap<u32, f64>,
}

pub fn moment_estimates(ens: &Ensemble, source: &dyn BlockSource, max_order: u32) -> Result<MomentReport> {
    if max_order == 0 || max_order > 8 {
        return arg("moment order must lie in 1..=8");
    }
    let l = ens.blocks.first().map(|b| b.len).unwrap_or(0);
    if ens.blocks.iter().any(|b| b.len != l) {
        return arg("moments need blocks of equal length");
    }
    let values = block_values(ens, source)?;
    Ok(moments_from_values(&values, l, max_order))
}

pub fn moments_from_values(values: &[i64], l: u64, max_order: u32) -> MomentReport {
    let n = values.len();
    let mut moments = BTreeMap::new();
    for k in 1..=max_order {
        let m = values.iter().map(|&v| (v as f64).powi(k as i32)).sum::<f64>() / n.max(1) as f64;
        moments.insert(k, m);
    }
    let exact = walk_moments(l, max_order);
    let mut reference = BTreeMap::new();
    let mut exact_walk = BTreeMap::new();
    for k in 1..=max_order {
        let g = if k % 2 == 1 { 0.0 } else { (l as f64).powi(k as i32 / 2) * double_factorial(k - 1) };
        reference.insert(k, g);
        exact_walk.insert(k, exact[k as usize]);
    }
    MomentReport { l, n, moments, reference, exact_walk }
}

fn double_factorial(k: u32) -> f64 {
    (1..=k).rev().step_by(2).map(|i| i as f64).product()
}

/// `E[S_L^k]` for `k ≤ max` of a fair ±1 walk, from the cumulants
/// `κ_{2j} = L · 2^{2j}(2^{2j}-1) B_{2j} / (2j)` via the moment recursion.
fn walk_moments(l: u64, max: u32) -> Vec<f64> {
    let lf = l as f64;
    // cumulants of a single ±1 step
    let step = [0.0, 0.0, 1.0, 0.0, -2.0, 0.0, 16.0, 0.0, -272.0];
    let kappa: Vec<f64> = step.iter().map(|c| c * lf).collect();
    let max = max as usize;
    let mut m = vec![0.0; max + 1];
    m[0] = 1.0;
    for n in 1..=max {
        let mut s = 0.0;
        let mut binom = 1.0; // C(n-1, j-1)
        for j in 1..=n {
            s += binom * kappa[j] * m[n - j];
            binom = binom * (n - j) as f64 / j as f64;
        }
        m[n] = s;
    }
    m
}

/// `B_L / √L` for each block value.
pub fn normalized(values: &[i64], l: u64) -> Vec<f64> {
    let s = (l as f64).sqrt();
    values.iter().map(|&v| v as f64 / s).collect()
}

pub fn write_z_csv<W: Write>(z: &[f64], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["z"]).map_err(csv_err)?;
    for v in z {
        w.write_record([format!("{v}")]).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LilProfile {
    /// `(n, M̂(n) / √(2 n ln ln n))` every `stride` ordinals from 16.
    pub points: Vec<(u64, f64)>,
    /// Largest `|ratio|` over every `n` in `[16, n_max]`.
    pub running_max: f64,
    pub argmax: u64,
}

/// Iterated-logarithm profile of `M̂(n)`; `seq` must start at ordinal 1.
pub fn lil_profile(seq: &BitSequence, n_max: u64, stride: u64) -> Result<LilProfile> {
    if n_max < 16 {
        return arg("the iterated-log ratio is used from n = 16");
    }
    if stride == 0 {
        return arg("stride must be >= 1");
    }
    if seq.start_ordinal() != 1 || seq.end_ordinal() <= n_max {
        return Err(Error::Coverage(format!("profile to {n_max} needs a sequence from ordinal 1 covering it")));
    }
    let mut m = 0i64;
    let mut points = Vec::new();
    let mut running_max = 0.0f64;
    let mut argmax = 16;
    for n in 1..=n_max {
        m += seq.mu_hat(n - 1) as i64;
        if n >= 16 {
            let nf = n as f64;
            let r = m as f64 / (2.0 * nf * nf.ln().ln()).sqrt();
            if r.abs() > running_max {
                running_max = r.abs();
                argmax = n;
            }
            if (n - 16) % stride == 0 {
                points.push((n, r));
            }
        }
    }
    Ok(LilProfile { points, running_max, argmax })
}

pub fn write_lil_csv<W: Write>(profile: &LilProfile, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "ratio"]).map_err(csv_err)?;
    for (n, r) in &profile.points {
        w.write_record([n.to_string(), format!("{r}")]).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// `R(0..=n)`: partial sums of seeded fair ±1 steps, `R(0) = 0`.
pub fn reference_random_walk(seed: u64, n: usize) -> Vec<i64> {
    let bits = fair_bits(&mut substream(seed, 0), n);
    let mut out = Vec::with_capacity(n + 1);
    let mut s = 0i64;
    out.push(0);
    for b in bits {
        s += 2 * b as i64 - 1;
        out.push(s);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartialSumReport {
    pub x_max: u64,
    /// Largest `|Σ_{m≤x} μ(m)/m|` seen.
    pub max_abs_partial: f64,
    pub argmax: u64,
    /// `(x, M(x), M(x)/x)` at powers of ten and at `x_max`.
    pub checkpoints: Vec<(u64, i64, f64)>,
}

/// Guard band on the bound `|Σ μ(m)/m| ≤ 1` for accumulated rounding.
pub const PARTIAL_SUM_GUARD: f64 = 1e-12;

/// Scans `m ≤ x_max`, asserting `|Σ_{m≤x} μ(m)/m| ≤ 1` at every `x` and
/// recording the unrestricted Mertens function at checkpoints.
pub fn mean_and_partial_sum_checks(x_max: u64) -> Result<PartialSumReport> {
    if x_max == 0 {
        return arg("x_max must be >= 1");
    }
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    let mut mx = 0i64;
    let mut worst = 0.0f64;
    let mut argmax = 1;
    let mut checkpoints = Vec::new();
    let mut next_cp = 1u64;
    let mut violation = None;
    for_each_segment(1, x_max + 1, &SieveConfig::default(), |lo, om| {
        for (i, &o) in om.iter().enumerate() {
            let m = lo + i as u64;
            if o >= 0 {
                let mu = if o & 1 == 0 { 1 } else { -1 };
                mx += mu;
                // Neumaier summation
                let t = mu as f64 / m as f64;
                let s = sum + t;
                comp += if sum.abs() >= t.abs() { (sum - s) + t } else { (t - s) + sum };
                sum = s;
            }
            let v = (sum + comp).abs();
            if v > worst {
                worst = v;
                argmax = m;
            }
            if v > 1.0 + PARTIAL_SUM_GUARD && violation.is_none() {
                violation = Some((m, v));
            }
            if m == next_cp || m == x_max {
                checkpoints.push((m, mx, mx as f64 / m as f64));
                if m == next_cp {
                    next_cp = next_cp.saturating_mul(10);
                }
            }
        }
        Ok(())
    })?;
    if let Some((m, v)) = violation {
        return Err(Error::Invariant(format!("|Σ μ(m)/m| = {v} > 1 at x = {m}")));
    }
    Ok(PartialSumReport { x_max, max_abs_partial: worst, argmax, checkpoints })
}
