use std::fmt;
use std::str::FromStr;

/// Inclusive prime range written `lo..hi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct PrimeRange {
    pub lo: u64,
    pub hi: u64,
}

impl FromStr for PrimeRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (lo, hi) = s
            .split_once("..")
            .ok_or_else(|| format!("expected lo..hi, got {s:?}"))?;
        let lo: u64 = lo.trim().parse().map_err(|e| format!("bad lower bound: {e}"))?;
        let hi: u64 = hi
            .trim()
            .trim_start_matches('=')
            .parse()
            .map_err(|e| format!("bad upper bound: {e}"))?;
        if lo > hi {
            return Err(format!("empty range {lo}..{hi}"));
        }
        Ok(PrimeRange { lo, hi })
    }
}

impl fmt::Display for PrimeRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.lo, self.hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses() {
        assert_eq!("5..50".parse(), Ok(PrimeRange { lo: 5, hi: 50 }));
        assert_eq!("5..=7".parse(), Ok(PrimeRange { lo: 5, hi: 7 }));
        assert!("50..5".parse::<PrimeRange>().is_err());
        assert!("5-50".parse::<PrimeRange>().is_err());
    }
}
