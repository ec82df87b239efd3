use super::sieve::{for_each_segment, mu_table, SieveConfig};
use crate::error::{arg, Result};

/// `Q(x)`, the number of square-free integers in `[1, x]`, from
/// `Σ_{d ≤ √x} μ(d) ⌊x/d²⌋`.
pub fn squarefree_count(x: u64) -> Result<u64> {
    if x == 0 {
        return Ok(0);
    }
    let r = x.isqrt();
    let mu = mu_table(r)?;
    let mut acc: i64 = 0;
    for d in 1..=r {
        let m = mu[d as usize];
        if m != 0 {
            let t = (x / (d * d)) as i64;
            acc += if m > 0 { t } else { -t };
        }
    }
    Ok(acc as u64)
}

/// The `n`-th square-free number, with `sqf_1 = 1`.
///
/// Seeds with `x ≈ (π²/6) n`, counts exactly with [`squarefree_count`] and
/// then walks to the target by sieving a short window.
pub fn nth_squarefree(n: u64) -> Result<u64> {
    if n == 0 {
        return arg("ordinals start at 1");
    }
    if n <= 3 {
        return Ok(n);
    }
    let cfg = SieveConfig::default();
    let scale = std::f64::consts::PI.powi(2) / 6.0;
    let mut x = ((n as f64) * scale).round().max(1.0) as u64;
    loop {
        let c = squarefree_count(x)?;
        if c == n {
            // step back to the largest square-free ≤ x
            if let Some(v) = last_squarefree_at_or_below(x, 1, &cfg)? {
                return Ok(v);
            }
        } else if c > n {
            // sqf numbers in (lo, x] carry ordinals c, c-1, ...; want ordinal n
            let need = c - n;
            let w = ((need as f64) * 1.7) as u64 + 256;
            let lo = x.saturating_sub(w).max(1);
            let mut found = None;
            let mut seen = 0u64;
            let mut vals = Vec::new();
            for_each_segment(lo, x + 1, &cfg, |s, om| {
                for (i, &o) in om.iter().enumerate() {
                    if o >= 0 {
                        vals.push(s + i as u64);
                    }
                }
                Ok(())
            })?;
            for &v in vals.iter().rev() {
                if seen == need {
                    found = Some(v);
                    break;
                }
                seen += 1;
            }
            if let Some(v) = found {
                return Ok(v);
            }
            x = lo - 1;
        } else {
            // ordinals c+1, c+2, ... start after x
            let need = n - c;
            let w = ((need as f64) * 1.7) as u64 + 256;
            let mut seen = 0u64;
            let mut found = None;
            for_each_segment(x + 1, x + 1 + w, &cfg, |s, om| {
                if found.is_some() {
                    return Ok(());
                }
                for (i, &o) in om.iter().enumerate() {
                    if o >= 0 {
                        seen += 1;
                        if seen == need {
                            found = Some(s + i as u64);
                            break;
                        }
                    }
                }
                Ok(())
            })?;
            if let Some(v) = found {
                return Ok(v);
            }
            x += w;
        }
    }
}

fn last_squarefree_at_or_below(x: u64, floor: u64, cfg: &SieveConfig) -> Result<Option<u64>> {
    let mut hi = x + 1;
    while hi > floor {
        let lo = hi.saturating_sub(64).max(floor);
        let mut best = None;
        for_each_segment(lo, hi, cfg, |s, om| {
            if let Some(i) = om.iter().rposition(|&o| o >= 0) {
                best = Some(s + i as u64);
            }
            Ok(())
        })?;
        if best.is_some() {
            return Ok(best);
        }
        hi = lo;
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_sqf(mut m: u64) -> bool {
        let mut p = 2;
        while p * p <= m {
            if m % (p * p) == 0 {
                return false;
            }
            if m % p == 0 {
                m /= p;
            }
            p += 1;
        }
        true
    }

    #[test]
    fn counts_small() {
        assert_eq!(squarefree_count(1).unwrap(), 1);
        assert_eq!(squarefree_count(10).unwrap(), 7);
        let mut c = 0;
        for x in 1..=3000u64 {
            if is_sqf(x) {
                c += 1;
            }
            assert_eq!(squarefree_count(x).unwrap(), c, "x = {x}");
        }
    }

    #[test]
    fn nth_small_enumeration() {
        let list: Vec<u64> = (1..5000u64).filter(|&m| is_sqf(m)).collect();
        for (i, &v) in list.iter().enumerate() {
            assert_eq!(nth_squarefree(i as u64 + 1).unwrap(), v);
        }
        assert_eq!(nth_squarefree(7).unwrap(), 10);
    }

    #[test]
    fn million_scale() {
        assert_eq!(squarefree_count(1_000_000).unwrap(), 607_926);
        // 999999 = 3³·7·11·13·37 and 999998 = 2·31·127² are not square-free
        assert_eq!(nth_squarefree(607_926).unwrap(), 999_997);
        assert_eq!(nth_squarefree(1_000_000).unwrap(), 1_644_918);
    }

    #[test]
    fn large_offsets_round_trip() {
        for &n in &[1_000_000_007u64, 123_456_789_012, 1_000_000_000_000] {
            let v = nth_squarefree(n).unwrap();
            assert!(is_sqf(v));
            assert_eq!(squarefree_count(v).unwrap(), n);
        }
    }
}
