//! Floating-point views of exact counts.

use num_traits::{ToPrimitive, Zero};

use crate::counter::BigCount;

/// Largest bit length converted directly; above it both operands are shifted
/// down to 64-bit mantissas first.
const DIRECT_BITS: u64 = 1000;

/// `num / den` as a float with relative error below `2^-52`.
///
/// # Panics
///
/// If `den` is zero.
pub fn ratio(num: &BigCount, den: &BigCount) -> f64 {
    assert!(!den.is_zero(), "ratio with zero denominator");
    let top = num.bits().max(den.bits());
    if top <= DIRECT_BITS {
        return num.to_f64().unwrap_or(f64::INFINITY) / den.to_f64().unwrap_or(f64::INFINITY);
    }
    let shift = top - 64;
    let n = (num >> shift).to_f64().unwrap_or(0.0);
    let d = (den >> shift).to_f64().unwrap_or(0.0);
    n / d
}

/// `log2(n)` for a positive count, accurate for counts of any size.
///
/// # Panics
///
/// If `n` is zero.
pub fn log2(n: &BigCount) -> f64 {
    assert!(!n.is_zero(), "log of zero");
    let bits = n.bits();
    if bits <= DIRECT_BITS {
        return n.to_f64().unwrap_or(f64::INFINITY).log2();
    }
    let shift = bits - 64;
    (n >> shift).to_f64().unwrap_or(0.0).log2() + shift as f64
}

/// `-p · log2(p)`, with `0 · log 0 = 0`.
pub fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_ratios() {
        assert_eq!(ratio(&3u32.into(), &4u32.into()), 0.75);
        assert_eq!(ratio(&0u32.into(), &4u32.into()), 0.0);
    }

    #[test]
    fn huge_ratios() {
        let den: BigCount = BigCount::from(3u32) << 2000u32;
        let num: BigCount = BigCount::from(1u32) << 2000u32;
        assert!((ratio(&num, &den) - 1.0 / 3.0).abs() < 1e-15);
        assert!((log2(&den) - (2000.0 + 3f64.log2())).abs() < 1e-9);
    }

    #[test]
    fn plogp_edges() {
        assert_eq!(plogp(0.0), 0.0);
        assert_eq!(plogp(1.0), 0.0);
        assert!((plogp(0.5) - 0.5).abs() < 1e-15);
    }
}
