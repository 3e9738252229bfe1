//! Digit-sum kernels in arbitrary bases.
//!
//! Everything downstream reduces to the functions in this module:
//! full and truncated digit sums, the difference `f(n) = s2(n) - s3(n)`
//! whose zeros are the collisions, block counting in binary/base-4
//! expansions, and the carry-counting form of the valuation identities
//! `v2(binom(2n,n)) = s2(n)` and `v3(binom(2n,n)) = s3(n) - s3(2n)/2`
//! (Kummer's theorem).
//!
//! All operations are pure; values are immutable after construction
//! and safe to share across threads.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision nonnegative integer, the universal number type
/// for shifts, moduli, class representatives and candidates.
pub type BigNat = BigUint;

/// Above this size, base conversion for digit sums switches to
/// divide-and-conquer splitting.
const SPLIT_THRESHOLD_BITS: u64 = 4096;

/// A positional expansion: little-endian digits in a fixed base.
///
/// Invariant: no trailing (most-significant) zero digit; zero is the
/// empty digit string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DigitString {
    base: u32,
    digits: Vec<u8>,
}

impl DigitString {
    /// Expands `n` in the given base (2..=256).
    pub fn digits_of(n: &BigNat, base: u32) -> Result<Self> {
        check_base(base)?;
        if base > 256 {
            return Err(Error::InvalidBase(base));
        }
        let digits = if n.is_zero() { Vec::new() } else { n.to_radix_le(base) };
        Ok(DigitString { base, digits })
    }

    pub fn from_parts(base: u32, digits: Vec<u8>) -> Result<Self> {
        check_base(base)?;
        if base > 256 || digits.iter().any(|&d| d as u32 >= base) {
            return Err(Error::InvalidInput(format!(
                "digit out of range for base {base}"
            )));
        }
        let mut digits = digits;
        while digits.last() == Some(&0) {
            digits.pop();
        }
        Ok(DigitString { base, digits })
    }

    /// Reassembles the integer; exact inverse of [`Self::digits_of`].
    pub fn from_digits(&self) -> BigNat {
        BigNat::from_radix_le(&self.digits, self.base).expect("digits validated on construction")
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    /// Little-endian digit slice (empty for zero).
    pub fn digits(&self) -> &[u8] {
        &self.digits
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    pub fn digit_sum(&self) -> u64 {
        self.digits.iter().map(|&d| d as u64).sum()
    }
}

impl std::fmt::Display for DigitString {
    /// Most-significant digit first, no separators: `"100100"`.
    /// Digits above 9 use lowercase letters, as in common radix
    /// notation up to base 36.
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.digits.is_empty() {
            return f.write_str("0");
        }
        for &d in self.digits.iter().rev() {
            let c = std::char::from_digit(d as u32, 36).unwrap_or('?');
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

fn check_base(base: u32) -> Result<()> {
    if base < 2 {
        Err(Error::InvalidBase(base))
    } else {
        Ok(())
    }
}

/// Binary digit sum (population count).
pub fn s2(n: &BigNat) -> u64 {
    n.iter_u64_digits().map(|limb| limb.count_ones() as u64).sum()
}

/// Ternary digit sum.
pub fn s3(n: &BigNat) -> u64 {
    digit_sum_generic(n, 3)
}

/// Difference of binary and ternary digit sums; zero exactly on
/// collisions.
pub fn f_value(n: &BigNat) -> i64 {
    s2(n) as i64 - s3(n) as i64
}

/// Sum of base-`base` digits of `n`.
///
/// Satisfies `digit_sum(b*n, b) = digit_sum(n, b)`.
pub fn digit_sum(n: &BigNat, base: u32) -> Result<u64> {
    check_base(base)?;
    Ok(match base {
        2 => s2(n),
        b if b.is_power_of_two() && b <= 256 => {
            n.to_radix_le(b).iter().map(|&d| d as u64).sum()
        }
        b => digit_sum_generic(n, b),
    })
}

/// Repeated division with divide-and-conquer splitting: halve the
/// expected digit count, recurse on quotient and remainder. Base
/// conversion dominates the cost of digit sums for huge integers, and
/// the split keeps each division against a divisor of matching size.
fn digit_sum_generic(n: &BigNat, base: u32) -> u64 {
    debug_assert!(base >= 2);
    if n.bits() <= SPLIT_THRESHOLD_BITS {
        if let Some(small) = n.to_u64() {
            return digit_sum_u64(small, base);
        }
        return n.to_radix_le(base).iter().map(|&d| d as u64).sum();
    }
    let digits_est = (n.bits() as f64 / (base as f64).log2()).ceil() as u32;
    let half = BigNat::from(base).pow(digits_est / 2);
    let (hi, lo) = n.div_rem(&half);
    digit_sum_generic(&hi, base) + digit_sum_generic(&lo, base)
}

/// Digit sum of a machine word; the hot path for enumeration oracles.
pub fn digit_sum_u64(mut n: u64, base: u32) -> u64 {
    debug_assert!(base >= 2);
    if base == 2 {
        return n.count_ones() as u64;
    }
    let b = base as u64;
    let mut sum = 0;
    while n > 0 {
        sum += n % b;
        n /= b;
    }
    sum
}

/// Truncated digit sum: only the lowest `level` digits count,
/// `digit_sum(n mod base^level, base)`.
pub fn digit_sum_trunc(n: &BigNat, base: u32, level: u32) -> Result<u64> {
    check_base(base)?;
    if level == 0 {
        return Ok(0);
    }
    if base == 2 {
        return Ok(s2_trunc(n, level));
    }
    let modulus = BigNat::from(base).pow(level);
    digit_sum(&(n % modulus), base)
}

/// Truncated binary digit sum, `s2(n mod 2^level)`.
pub fn s2_trunc(n: &BigNat, level: u32) -> u64 {
    if n.bits() <= level as u64 {
        return s2(n);
    }
    let level = level as usize;
    let mut sum = 0u64;
    for (i, limb) in n.iter_u64_digits().enumerate() {
        let lo = i * 64;
        if lo >= level {
            break;
        }
        let take = (level - lo).min(64);
        let mask = if take == 64 { u64::MAX } else { (1u64 << take) - 1 };
        sum += (limb & mask).count_ones() as u64;
    }
    sum
}

/// Number of maximal runs of 1-digits in the binary expansion, and
/// number of digits equal to 1 in the base-4 expansion.
///
/// A block's least-significant bit is a 1 whose lower neighbour is 0,
/// so the run count is `popcount(n) - popcount(n & (n >> 1))`. Both
/// quantities are zero for `n = 0` (empty expansion).
pub fn count_blocks(n: &BigNat) -> (u64, u64) {
    if n.is_zero() {
        return (0, 0);
    }
    let overlapped = n & &(n >> 1u32);
    let one_blocks = s2(n) - s2(&overlapped);
    let base4_ones = n.to_radix_le(4).iter().filter(|&&d| d == 1).count() as u64;
    (one_blocks, base4_ones)
}

/// Outcome of [`binomial_valuation_check`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValuationCheck {
    /// Carry count of the base-2 addition n + n; equals v2(binom(2n,n))
    /// by Kummer's theorem.
    pub v2: u64,
    /// Twice the carry count of the base-3 addition n + n; equals
    /// 2*v3(binom(2n,n)).
    pub v3_twice: u64,
    /// True iff `v2 = s2(n)` and `v3_twice = 2*s3(n) - s3(2n)`.
    pub identities_hold: bool,
}

/// Counts carries of the additions n + n in bases 2 and 3 and checks
/// them against the digit-sum identities.
pub fn binomial_valuation_check(n: &BigNat) -> Result<ValuationCheck> {
    if n.is_zero() {
        return Err(Error::InvalidInput(
            "binomial valuation check requires n >= 1".into(),
        ));
    }
    let v2 = addition_carries(n, 2);
    let v3 = addition_carries(n, 3);
    let two_n = n << 1u32;
    let identities_hold =
        v2 == s2(n) && 2 * v3 == 2 * s3(n) - s3(&two_n);
    Ok(ValuationCheck {
        v2,
        v3_twice: 2 * v3,
        identities_hold,
    })
}

/// Carry count of the doubling n + n in the given base, by direct
/// digit-array simulation.
fn addition_carries(n: &BigNat, base: u32) -> u64 {
    let digits = if n.is_zero() { Vec::new() } else { n.to_radix_le(base) };
    let mut carry = 0u32;
    let mut carries = 0u64;
    for &d in &digits {
        let s = 2 * d as u32 + carry;
        carry = s / base;
        if carry > 0 {
            carries += 1;
        }
    }
    carries
}

/// Base-2 logarithm of a big natural, accurate to f64 precision
/// regardless of size: bit length plus a correction from the top 64
/// bits.
pub fn log2_of(n: &BigNat) -> f64 {
    let bits = n.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    if bits <= 64 {
        return (n.to_u64().unwrap() as f64).log2();
    }
    let top: BigNat = n >> (bits - 64);
    (top.to_u64().unwrap() as f64).log2() + (bits - 64) as f64
}

/// Natural logarithm of a big natural.
pub fn ln_of(n: &BigNat) -> f64 {
    log2_of(n) * std::f64::consts::LN_2
}

/// Base-3 logarithm of a big natural.
pub fn log3_of(n: &BigNat) -> f64 {
    log2_of(n) / 3f64.log2()
}

/// 2^k as a big natural.
pub fn pow2(k: u64) -> BigNat {
    BigNat::one() << k
}

/// 3^k as a big natural.
pub fn pow3(k: u32) -> BigNat {
    BigNat::from(3u32).pow(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn big(n: u64) -> BigNat {
        BigNat::from(n)
    }

    #[test]
    fn digit_sum_known_values() {
        // 36 = 100100 in binary, 1100 in ternary; 21 = 210 in ternary.
        assert_eq!(digit_sum(&big(36), 2).unwrap(), 2);
        assert_eq!(digit_sum(&big(0), 3).unwrap(), 0);
        assert_eq!(digit_sum(&big(21), 3).unwrap(), 3);
        assert_eq!(digit_sum(&big(36), 3).unwrap(), 2);
    }

    #[test]
    fn digit_sum_rejects_bad_base() {
        assert!(matches!(digit_sum(&big(5), 1), Err(Error::InvalidBase(1))));
        assert!(matches!(digit_sum(&big(5), 0), Err(Error::InvalidBase(0))));
    }

    #[test]
    fn truncated_digit_sum_examples() {
        // 13 mod 8 = 5 = 101_2.
        assert_eq!(digit_sum_trunc(&big(13), 2, 3).unwrap(), 2);
        assert_eq!(digit_sum_trunc(&big(12345), 7, 0).unwrap(), 0);
        // 5 mod 3 = 2.
        assert_eq!(digit_sum_trunc(&big(5), 3, 1).unwrap(), 2);
    }

    #[test]
    fn truncation_recursion() {
        // s2^(L+1)(2n) = s2^(L)(n) and s2^(L+1)(2n+1) = s2^(L)(n) + 1.
        for n in 0u64..200 {
            for level in 0u32..8 {
                let lhs_even = digit_sum_trunc(&big(2 * n), 2, level + 1).unwrap();
                let lhs_odd = digit_sum_trunc(&big(2 * n + 1), 2, level + 1).unwrap();
                let rhs = digit_sum_trunc(&big(n), 2, level).unwrap();
                assert_eq!(lhs_even, rhs);
                assert_eq!(lhs_odd, rhs + 1);
            }
        }
    }

    #[test]
    fn f_value_examples() {
        assert_eq!(f_value(&big(36)), 0);
        assert_eq!(f_value(&big(0)), 0);
        assert_eq!(f_value(&big(5)), -1);
    }

    #[test]
    fn count_blocks_examples() {
        // 182 = 10110110_2 has three blocks of 1s; 2312_4... its base-4
        // expansion 2312 contains a single digit 1.
        assert_eq!(count_blocks(&big(182)), (3, 1));
        assert_eq!(count_blocks(&big(0)), (0, 0));
        // 5 = 101_2 = 11_4.
        assert_eq!(count_blocks(&big(5)), (2, 2));
    }

    #[test]
    fn count_blocks_matches_scan() {
        for n in 0u64..4096 {
            let mut blocks = 0;
            let mut prev = false;
            for i in 0..64 {
                let bit = (n >> i) & 1 == 1;
                if bit && !prev {
                    blocks += 1;
                }
                prev = bit;
            }
            assert_eq!(count_blocks(&big(n)).0, blocks, "n = {n}");
        }
    }

    #[test]
    fn valuation_check_examples() {
        // binom(8,4) = 70 = 2*5*7, binom(10,5) = 252 = 2^2*3^2*7,
        // binom(2,1) = 2.
        let c4 = binomial_valuation_check(&big(4)).unwrap();
        assert_eq!((c4.v2, c4.v3_twice, c4.identities_hold), (1, 0, true));
        let c5 = binomial_valuation_check(&big(5)).unwrap();
        assert_eq!((c5.v2, c5.v3_twice, c5.identities_hold), (2, 4, true));
        let c1 = binomial_valuation_check(&big(1)).unwrap();
        assert_eq!((c1.v2, c1.v3_twice, c1.identities_hold), (1, 0, true));
        assert!(binomial_valuation_check(&big(0)).is_err());
    }

    #[test]
    fn valuation_matches_factorization_oracle() {
        // Exact binomial coefficient plus trial division, maintained
        // incrementally: binom(2n+2, n+1) = binom(2n, n) * 2(2n+1)/(n+1).
        let mut binom = BigNat::from(2u32); // binom(2, 1)
        for n in 1u64..=2000 {
            let check = binomial_valuation_check(&big(n)).unwrap();
            assert!(check.identities_hold, "identities fail at n = {n}");
            assert_eq!(check.v2, p_adic_valuation(&binom, 2), "v2 at n = {n}");
            assert_eq!(check.v3_twice, 2 * p_adic_valuation(&binom, 3), "v3 at n = {n}");
            binom = binom * big(2 * (2 * n + 1)) / big(n + 1);
        }
    }

    fn p_adic_valuation(n: &BigNat, p: u32) -> u64 {
        let p = BigNat::from(p);
        let mut m = n.clone();
        let mut v = 0;
        loop {
            let (q, r) = m.div_rem(&p);
            if !r.is_zero() {
                return v;
            }
            v += 1;
            m = q;
        }
    }

    #[test]
    fn base_shift_invariance_exhaustive() {
        for base in [2u32, 3] {
            let b = BigNat::from(base);
            for n in 0u64..100_000 {
                let n = big(n);
                assert_eq!(
                    digit_sum(&(&n * &b), base).unwrap(),
                    digit_sum(&n, base).unwrap()
                );
            }
        }
    }

    #[test]
    fn column_sum_identity() {
        // Sum over n < b^L of digit_sum(n, b) equals L * b^L * (b-1) / 2.
        for base in [2u64, 3] {
            for level in 0u32..=10 {
                let count = (base as u128).pow(level);
                if count > 1 << 22 {
                    continue;
                }
                let total: u64 = (0..count as u64)
                    .map(|n| digit_sum_u64(n, base as u32))
                    .sum();
                let expected = level as u128 * count * (base as u128 - 1) / 2;
                assert_eq!(total as u128, expected, "base {base}, L {level}");
            }
        }
    }

    #[test]
    fn digit_string_display_and_roundtrip() {
        let ds = DigitString::digits_of(&big(36), 2).unwrap();
        assert_eq!(ds.to_string(), "100100");
        assert_eq!(ds.from_digits(), big(36));
        assert_eq!(ds.digit_sum(), 2);

        let zero = DigitString::digits_of(&BigNat::zero(), 3).unwrap();
        assert_eq!(zero.to_string(), "0");
        assert!(zero.is_empty());
        assert_eq!(zero.from_digits(), BigNat::zero());
    }

    #[test]
    fn split_path_agrees_with_plain_conversion() {
        // Force the divide-and-conquer path with a ~20k-bit number.
        let n = (BigNat::one() << 20_011u32) + BigNat::from(987_654_321u64) * (BigNat::one() << 9_973u32)
            + BigNat::from(12_345u64);
        let via_split = digit_sum(&n, 3).unwrap();
        let plain: u64 = n.to_radix_le(3).iter().map(|&d| d as u64).sum();
        assert_eq!(via_split, plain);
    }

    #[test]
    fn log_helpers_accuracy() {
        let n = BigNat::from(3u32).pow(100);
        assert!((log3_of(&n) - 100.0).abs() < 1e-9);
        let m = BigNat::one() << 1000u32;
        assert!((log2_of(&m) - 1000.0).abs() < 1e-9);
        assert!((ln_of(&m) - 1000.0 * std::f64::consts::LN_2).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn subadditivity(a in 0u64..u64::MAX / 2, b in 0u64..u64::MAX / 2, base in prop::sample::select(vec![2u32, 3, 10])) {
            let (a, b) = (big(a), big(b));
            let joint = digit_sum(&(&a + &b), base).unwrap();
            let split = digit_sum(&a, base).unwrap() + digit_sum(&b, base).unwrap();
            prop_assert!(joint <= split);
        }

        #[test]
        fn trunc_consistency(n in 0u64..u64::MAX, base in prop::sample::select(vec![2u32, 3, 10])) {
            let n = big(n);
            // Once the level covers the whole expansion, truncation is a no-op.
            let level = 80u32;
            prop_assert_eq!(
                digit_sum_trunc(&n, base, level).unwrap(),
                digit_sum(&n, base).unwrap()
            );
        }

    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]
        #[test]
        fn digit_roundtrip(words in prop::collection::vec(any::<u32>(), 1..32), base in prop::sample::select(vec![2u32, 3, 7, 10, 255])) {
            let n = BigNat::new(words.clone());
            let ds = DigitString::digits_of(&n, base).unwrap();
            prop_assert_eq!(ds.from_digits(), n);
        }
    }
}
