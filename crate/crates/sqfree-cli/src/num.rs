//! Integer arguments written as `1000000`, `1_000_000`, `1e6` or `2.5e7`.

pub fn parse_count(s: &str) -> Result<u64, String> {
    let t: String = s.trim().chars().filter(|&c| c != '_').collect();
    if t.is_empty() {
        return Err("empty number".into());
    }
    let (mant, exp) = match t.find(['e', 'E']) {
        Some(i) => {
            let e: u32 = t[i + 1..].trim_start_matches('+').parse().map_err(|_| format!("bad exponent in {s:?}"))?;
            (&t[..i], e)
        }
        None => (t.as_str(), 0),
    };
    let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
    if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(format!("not a non-negative integer: {s:?}"));
    }
    let frac = frac.trim_end_matches('0');
    let shift = exp.checked_sub(frac.len() as u32).ok_or_else(|| format!("{s:?} is not an integer"))?;
    let digits = format!("{int}{frac}");
    let base: u64 = if digits.is_empty() { 0 } else { digits.parse().map_err(|_| format!("{s:?} is too large"))? };
    10u64.checked_pow(shift).and_then(|p| base.checked_mul(p)).ok_or_else(|| format!("{s:?} is too large"))
}

/// Comma-separated counts, kept as one clap value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counts(pub Vec<u64>);

pub fn parse_list(s: &str) -> Result<Counts, String> {
    s.split(',').map(parse_count).collect::<Result<_, _>>().map(Counts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forms() {
        assert_eq!(parse_count("1e6"), Ok(1_000_000));
        assert_eq!(parse_count("5E7"), Ok(50_000_000));
        assert_eq!(parse_count("2.5e7"), Ok(25_000_000));
        assert_eq!(parse_count("1_403_202"), Ok(1_403_202));
        assert_eq!(parse_count("1.0e3"), Ok(1000));
        assert_eq!(parse_count("0"), Ok(0));
        assert_eq!(parse_list("1e6,2e6"), Ok(Counts(vec![1_000_000, 2_000_000])));
    }

    #[test]
    fn rejects() {
        for bad in ["", "-1", "1.5", "1e", "abc", "1e30", "2.25e1"] {
            assert!(parse_count(bad).is_err(), "{bad}");
        }
    }
}
