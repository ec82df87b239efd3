use std::sync::{Arc, OnceLock, RwLock};

use crate::error::{arg, Error, Result};
use crate::par;

pub const DEFAULT_SEGMENT_LEN: usize = 1 << 22;
const MIN_TILE: usize = 1 << 17;

/// Limits applied to sieving.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SieveConfig {
    /// Integers per segment (the unit of parallel work).
    pub segment_len: usize,
    /// Largest window [`mobius_range_with`] will materialize.
    pub window_budget: u64,
    /// Largest base prime the sieve may generate, bounding `√hi`.
    pub max_base_prime: u64,
}

impl Default for SieveConfig {
    fn default() -> Self {
        SieveConfig { segment_len: DEFAULT_SEGMENT_LEN, window_budget: 1 << 30, max_base_prime: 200_000_000 }
    }
}

/// Base primes with their fixed-point logarithm weights.
#[derive(Debug)]
pub struct PrimeTable {
    pub primes: Vec<u32>,
    weights: Vec<u8>,
}

impl PrimeTable {
    fn new(limit: u64) -> Self {
        let primes = simple_primes(limit);
        let weights = primes.iter().map(|&p| (LOG_SCALE * (p as f64).log2()).round() as u8).collect();
        PrimeTable { primes, weights }
    }
}

struct PrimeCache {
    limit: u64,
    primes: Arc<PrimeTable>,
}

static PRIMES: OnceLock<RwLock<PrimeCache>> = OnceLock::new();

fn simple_primes(limit: u64) -> Vec<u32> {
    // odd-only Eratosthenes
    let limit = limit as usize;
    if limit < 2 {
        return Vec::new();
    }
    let half = (limit - 1) / 2; // index i is 2i+3
    let mut comp = vec![false; half];
    let mut i = 0;
    while (2 * i + 3) * (2 * i + 3) <= limit {
        if !comp[i] {
            let p = 2 * i + 3;
            let mut j = (p * p - 3) / 2;
            while j < half {
                comp[j] = true;
                j += p;
            }
        }
        i += 1;
    }
    let mut out = Vec::with_capacity(half / 8 + 1);
    out.push(2);
    out.extend(comp.iter().enumerate().filter(|(_, &c)| !c).map(|(i, _)| (2 * i + 3) as u32));
    out
}

/// All primes `≤ limit` (possibly more), from a process-wide cache that
/// grows on demand.
pub fn base_primes(limit: u64) -> Arc<PrimeTable> {
    let cache =
        PRIMES.get_or_init(|| RwLock::new(PrimeCache { limit: 1 << 16, primes: Arc::new(PrimeTable::new(1 << 16)) }));
    {
        let c = cache.read().unwrap();
        if c.limit >= limit {
            return Arc::clone(&c.primes);
        }
    }
    let mut c = cache.write().unwrap();
    if c.limit < limit {
        let new_limit = limit.max(c.limit.saturating_mul(2)).min(u32::MAX as u64);
        c.primes = Arc::new(PrimeTable::new(new_limit));
        c.limit = new_limit;
    }
    Arc::clone(&c.primes)
}

fn primes_for(hi: u64, cfg: &SieveConfig) -> Result<Arc<PrimeTable>> {
    let root = (hi - 1).isqrt();
    if root > cfg.max_base_prime {
        return Err(Error::Resource(format!(
            "sieving up to {hi} needs base primes to {root}, budget is {}",
            cfg.max_base_prime
        )));
    }
    Ok(base_primes(root))
}

/// Scratch buffers reused across segments.
#[derive(Default)]
pub(crate) struct Scratch {
    prod: Vec<u64>,
    packed: Vec<u16>,
}

/// Tiles below this start use exact prime products; above it a scaled
/// logarithm sum is enough to detect the cofactor.
const LOG_PATH_FROM: u64 = 1 << 24;
/// Fixed-point scale for `log2 p` in the logarithm path.
const LOG_SCALE: f64 = 3.0;

/// Writes `ω(m)` for square-free `m` and `-1` otherwise, for `m` in
/// `[lo, lo + out.len())`. `table` must cover `√(lo + out.len() - 1)`;
/// `lo ≥ 1`.
pub(crate) fn omega_segment(lo: u64, out: &mut [i8], table: &PrimeTable, scratch: &mut Scratch) {
    let len = out.len();
    if len == 0 {
        return;
    }
    let last = lo + len as u64 - 1;
    let root = last.isqrt();
    let tile = MIN_TILE.max((root as usize).next_power_of_two()).min(len);
    let mut t0 = 0;
    while t0 < len {
        let tlen = tile.min(len - t0);
        let tlo = lo + t0 as u64;
        let om = &mut out[t0..t0 + tlen];
        if tlo >= LOG_PATH_FROM {
            scratch.packed.resize(tlen, 0);
            omega_tile_log(tlo, om, table, &mut scratch.packed[..tlen]);
        } else {
            scratch.prod.resize(tlen, 0);
            omega_tile_exact(tlo, om, &table.primes, &mut scratch.prod[..tlen]);
        }
        t0 += tlen;
    }
}

const WHEEL_PRIMES: [u64; 4] = [2, 3, 5, 7];
/// 2²·3²·5²·7²: the period of divisibility by the wheel primes and squares.
const WHEEL: u64 = 44_100;

/// Sieve state of the wheel primes over one period, copied into each tile
/// in place of sieving them.
struct Wheel {
    omega: Vec<i8>,
    prod: Vec<u64>,
    packed: Vec<u16>,
}

static WHEEL_TABLE: OnceLock<Wheel> = OnceLock::new();

fn wheel() -> &'static Wheel {
    WHEEL_TABLE.get_or_init(|| {
        let n = WHEEL as usize;
        let mut omega = vec![0i8; n];
        let mut prod = vec![1u64; n];
        let mut packed = vec![0u16; n];
        for (i, ((o, pr), a)) in omega.iter_mut().zip(&mut prod).zip(&mut packed).enumerate() {
            for &p in &WHEEL_PRIMES {
                let i = i as u64;
                if i % (p * p) == 0 {
                    *o = i8::MIN;
                    *a |= SQUARE_FLAG;
                } else if i % p == 0 {
                    *o += 1;
                }
                if i % p == 0 {
                    *pr *= p;
                    *a += packed_weight((LOG_SCALE * (p as f64).log2()).round() as u8);
                }
            }
        }
        Wheel { omega, prod, packed }
    })
}

fn fill_cyclic<T: Copy>(dst: &mut [T], pat: &[T], start: usize) {
    let mut k = 0;
    let mut s = start;
    while k < dst.len() {
        let take = (pat.len() - s).min(dst.len() - k);
        dst[k..k + take].copy_from_slice(&pat[s..s + take]);
        k += take;
        s = 0;
    }
}

fn mark_squares(lo: u64, om: &mut [i8], p2: u64) {
    let mut j = lo.div_ceil(p2) * p2 - lo;
    while j < om.len() as u64 {
        om[j as usize] = i8::MIN;
        j += p2;
    }
}

fn omega_tile_exact(lo: u64, om: &mut [i8], primes: &[u32], prod: &mut [u64]) {
    let len = om.len();
    let last = lo + len as u64 - 1;
    let w = wheel();
    let start = (lo % WHEEL) as usize;
    fill_cyclic(om, &w.omega, start);
    fill_cyclic(prod, &w.prod, start);
    for &p in &primes[WHEEL_PRIMES.len()..] {
        let p = p as u64;
        let p2 = p * p;
        if p2 > last {
            break;
        }
        let mut j = (lo.div_ceil(p) * p - lo) as usize;
        let step = p as usize;
        while j < len {
            prod[j] *= p;
            om[j] += 1;
            j += step;
        }
        mark_squares(lo, om, p2);
    }
    for (i, (o, &pr)) in om.iter_mut().zip(prod.iter()).enumerate() {
        if *o < 0 {
            *o = -1;
        } else if pr != lo + i as u64 {
            *o += 1;
        }
    }
}

// Packed per-integer state for the logarithm path: bits 0-3 count the
// distinct primes found (at most 15 for any u64), bits 4-11 hold the sum of
// rounded LOG_SCALE·log2 p (at most 192), bit 15 flags a square factor.
const SQUARE_FLAG: u16 = 1 << 15;

#[inline]
fn packed_weight(lp: u8) -> u16 {
    ((lp as u16) << 4) | 1
}

// The rounded weights put the sum within 7.5 of LOG_SCALE·log2 P. A
// cofactor q > √last lowers it by at least LOG_SCALE·log2(lo)/2 ≥ 36.
fn omega_tile_log(lo: u64, om: &mut [i8], table: &PrimeTable, acc: &mut [u16]) {
    let len = om.len();
    let last = lo + len as u64 - 1;
    let start = (lo % WHEEL) as usize;
    fill_cyclic(acc, &wheel().packed, start);
    let k = WHEEL_PRIMES.len();
    for (&p, &lp) in table.primes[k..].iter().zip(&table.weights[k..]) {
        let p = p as u64;
        let p2 = p * p;
        if p2 > last {
            break;
        }
        let first = (lo.div_ceil(p) * p - lo) as usize;
        if first < len {
            let add = packed_weight(lp);
            for a in acc[first..].iter_mut().step_by(p as usize) {
                *a += add;
            }
        }
        let first = lo.div_ceil(p2) * p2 - lo;
        if first < len as u64 {
            for a in acc[first as usize..].iter_mut().step_by(p2 as usize) {
                *a |= SQUARE_FLAG;
            }
        }
    }
    let full = (LOG_SCALE * (lo as f64).log2()).floor() as u16;
    let cut = full - 8;
    for (o, &a) in om.iter_mut().zip(acc.iter()) {
        *o = if a & SQUARE_FLAG != 0 {
            -1
        } else {
            let count = (a & 0xf) as i8;
            let logsum = (a >> 4) & 0xff;
            count + (logsum < cut) as i8
        };
    }
}

/// Streams `[lo, hi)` segment by segment, passing each segment's first
/// integer and its ω table (`-1` for non-square-free) to `f`.
pub fn for_each_segment<F>(lo: u64, hi: u64, cfg: &SieveConfig, mut f: F) -> Result<()>
where
    F: FnMut(u64, &[i8]) -> Result<()>,
{
    if lo == 0 {
        return arg("sieve windows start at 1");
    }
    if lo >= hi {
        return Ok(());
    }
    let primes = primes_for(hi, cfg)?;
    let mut buf = vec![0i8; cfg.segment_len.min((hi - lo) as usize)];
    let mut scratch = Scratch::default();
    let mut s = lo;
    while s < hi {
        let n = (cfg.segment_len as u64).min(hi - s) as usize;
        omega_segment(s, &mut buf[..n], &primes, &mut scratch);
        f(s, &buf[..n])?;
        s += n as u64;
    }
    Ok(())
}

/// Maps every segment of `[lo, hi)` in parallel through `map` and folds the
/// per-segment results in ascending order with `fold`.
pub fn par_fold_segments<R, M, A, G>(lo: u64, hi: u64, cfg: &SieveConfig, map: M, init: A, mut fold: G) -> Result<A>
where
    R: Send,
    M: Fn(u64, &[i8]) -> R + Sync + Send,
    G: FnMut(A, R) -> A,
{
    if lo == 0 {
        return arg("sieve windows start at 1");
    }
    if lo >= hi {
        return Ok(init);
    }
    let primes = primes_for(hi, cfg)?;
    let seg = cfg.segment_len as u64;
    let nseg = (hi - lo).div_ceil(seg) as usize;
    // bounded batches keep memory flat when the range is long
    let batch = (4 * par::threads()).max(1);
    let mut acc = init;
    let mut first = 0;
    while first < nseg {
        let count = batch.min(nseg - first);
        let parts = par::map_range(count, |k| {
            let s = lo + (first + k) as u64 * seg;
            let n = seg.min(hi - s) as usize;
            let mut buf = vec![0i8; n];
            let mut scratch = Scratch::default();
            omega_segment(s, &mut buf, &primes, &mut scratch);
            map(s, &buf)
        });
        for r in parts {
            acc = fold(acc, r);
        }
        first += count;
    }
    Ok(acc)
}

/// Exact Möbius values on `[lo, hi)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MobiusWindow {
    pub lo: u64,
    pub hi: u64,
    pub values: Vec<i8>,
}

impl MobiusWindow {
    pub fn get(&self, m: u64) -> Option<i8> {
        (m >= self.lo && m < self.hi).then(|| self.values[(m - self.lo) as usize])
    }
}

pub fn mobius_range(lo: u64, hi: u64) -> Result<MobiusWindow> {
    mobius_range_with(lo, hi, &SieveConfig::default())
}

pub fn mobius_range_with(lo: u64, hi: u64, cfg: &SieveConfig) -> Result<MobiusWindow> {
    if lo >= hi {
        return arg(format!("empty window [{lo}, {hi})"));
    }
    if lo == 0 {
        return arg("μ is defined for m ≥ 1");
    }
    if hi - lo > cfg.window_budget {
        return Err(Error::Resource(format!("window of {} integers exceeds budget {}", hi - lo, cfg.window_budget)));
    }
    let mut values = Vec::with_capacity((hi - lo) as usize);
    for_each_segment(lo, hi, cfg, |_, om| {
        values.extend(om.iter().map(|&w| omega_to_mu(w)));
        Ok(())
    })?;
    Ok(MobiusWindow { lo, hi, values })
}

#[inline]
pub(crate) fn omega_to_mu(w: i8) -> i8 {
    if w < 0 {
        0
    } else if w & 1 == 0 {
        1
    } else {
        -1
    }
}

struct MuCache {
    limit: u64,
    mu: Arc<Vec<i8>>,
}

static MU: OnceLock<RwLock<MuCache>> = OnceLock::new();

/// `μ(d)` for `0 ≤ d ≤ limit` (index 0 holds 0), cached and grown on demand.
pub fn mu_table(limit: u64) -> Result<Arc<Vec<i8>>> {
    let cache = MU.get_or_init(|| RwLock::new(MuCache { limit: 0, mu: Arc::new(vec![0]) }));
    {
        let c = cache.read().unwrap();
        if c.limit >= limit {
            return Ok(Arc::clone(&c.mu));
        }
    }
    let mut c = cache.write().unwrap();
    if c.limit < limit {
        let new_limit = limit.max(c.limit.saturating_mul(2)).max(1024);
        let cfg = SieveConfig::default();
        let mut mu = Vec::with_capacity(new_limit as usize + 1);
        mu.push(0);
        for_each_segment(1, new_limit + 1, &cfg, |_, om| {
            mu.extend(om.iter().map(|&w| omega_to_mu(w)));
            Ok(())
        })?;
        c.mu = Arc::new(mu);
        c.limit = new_limit;
    }
    Ok(Arc::clone(&c.mu))
}
