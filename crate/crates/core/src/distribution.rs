//! Distribution of truncated binary digit-sum differences.
//!
//! For a shift `t` and a truncation level `L`, let
//!
//! ```text
//! phi(j, t, L) = 2^-L * #{ 0 <= n < 2^L : s2((n+t) mod 2^L) - s2(n mod 2^L) = j }.
//! ```
//!
//! This module computes `phi` exactly (integer counts over a common
//! denominator `2^L`), its characteristic function
//! `omega_t(theta, L) = sum_j phi(j,t,L) e(j theta)`, and the first two
//! moments, either by brute force over all residues or through the
//! recurrences
//!
//! ```text
//! phi(j, 2t,   L+1) = phi(j, t, L)
//! phi(j, 2t+1, L+1) = phi(j-1, t, L)/2 + phi(j+1, t+1, L)/2
//! ```
//!
//! seeded by the closed form at `t = 1`. The recurrences branch into
//! `(t, t+1)` on odd steps, but the reachable set per level is a
//! window of at most two consecutive shifts, so a memo table keeps the
//! whole computation at `O(L)` nodes per query.
//!
//! Everything here is a pure function; tables are immutable once
//! returned.

use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_rational::{BigRational, Ratio};
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::digits::{self, BigNat};
use crate::error::{Error, Result};

/// Largest level accepted by brute-force mode (cost `2^L`).
pub const BRUTEFORCE_LEVEL_LIMIT: u32 = 40;

/// Largest `nu` accepted by the exhaustive second-moment sweep.
pub const M2_SWEEP_LIMIT: u32 = 16;

/// How `phi` tables are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhiMode {
    Recurrence,
    BruteForce,
}

/// How `omega` values are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OmegaMode {
    /// Complex-valued recursion on (t, L).
    Recurrence,
    /// Direct sum over an exact `phi` table.
    Direct,
}

/// Exact occurrence counts of `s2^(L)(n+t) - s2^(L)(n)` over `n < 2^L`.
///
/// `counts[j] / 2^L = phi(j, t, L)`. Total mass is exactly `2^L` and
/// the first moment vanishes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistTable {
    #[serde(rename = "t", with = "crate::serde_util::bignat")]
    pub shift: BigNat,
    #[serde(rename = "L")]
    pub level: u32,
    #[serde(with = "crate::serde_util::bignat_map")]
    pub counts: BTreeMap<i64, BigNat>,
}

impl DistTable {
    /// Total mass; equals `2^L` for every well-formed table.
    pub fn total(&self) -> BigNat {
        self.counts.values().sum()
    }

    /// Probability `phi(j, t, L)` as an exact rational.
    pub fn phi(&self, j: i64) -> BigRational {
        let num = self.counts.get(&j).cloned().unwrap_or_else(BigUint::zero);
        Ratio::new(
            BigInt::from(num),
            BigInt::from(digits::pow2(self.level as u64)),
        )
    }

    /// Exact k-th moment `sum_j j^k phi(j, t, L)`.
    pub fn moment(&self, k: u32) -> BigRational {
        let mut num = BigInt::zero();
        for (&j, c) in &self.counts {
            num += BigInt::from(j).pow(k) * BigInt::from(c.clone());
        }
        Ratio::new(num, BigInt::from(digits::pow2(self.level as u64)))
    }

    /// Checks total mass `2^L` and vanishing first moment.
    pub fn validate(&self) -> Result<()> {
        if self.total() != digits::pow2(self.level as u64) {
            return Err(Error::InvalidInput(format!(
                "distribution table mass differs from 2^{}",
                self.level
            )));
        }
        if !self.moment(1).is_zero() {
            return Err(Error::InvalidInput(
                "distribution table has non-vanishing first moment".into(),
            ));
        }
        Ok(())
    }
}

/// A characteristic-function evaluation `omega_t(theta, L)` bundled
/// with its arguments, mainly for serialization.
#[derive(Debug, Clone, Serialize)]
pub struct CharacteristicQuery {
    #[serde(rename = "t", with = "crate::serde_util::bignat")]
    pub shift: BigNat,
    pub theta: f64,
    #[serde(rename = "L")]
    pub level: u32,
    pub re: f64,
    pub im: f64,
    pub abs: f64,
}

impl CharacteristicQuery {
    pub fn evaluate(shift: &BigNat, theta: f64, level: u32, mode: OmegaMode) -> Self {
        let value = omega(shift, theta, level, mode);
        CharacteristicQuery {
            shift: shift.clone(),
            theta,
            level,
            re: value.re,
            im: value.im,
            abs: value.norm(),
        }
    }
}

/// First and second moment of `phi(., t, L)`, exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MomentPair {
    pub m1: BigRational,
    pub m2: BigRational,
}

/// Computes the occurrence-count table of `phi(., t, L)`.
pub fn phi_table(shift: &BigNat, level: u32, mode: PhiMode) -> Result<DistTable> {
    let counts = match mode {
        PhiMode::BruteForce => {
            if level > BRUTEFORCE_LEVEL_LIMIT {
                return Err(Error::ResourceLimit(format!(
                    "brute-force phi requires L <= {BRUTEFORCE_LEVEL_LIMIT} (cost 2^L), got {level}"
                )));
            }
            phi_bruteforce(shift, level)
        }
        PhiMode::Recurrence => {
            let mut memo = PhiMemo::new();
            let table = phi_recurrence(shift, level, &mut memo);
            table.as_ref().clone()
        }
    };
    let table = DistTable {
        shift: shift.clone(),
        level,
        counts,
    };
    table.validate()?;
    Ok(table)
}

fn phi_bruteforce(shift: &BigNat, level: u32) -> BTreeMap<i64, BigNat> {
    if level == 0 {
        return BTreeMap::from([(0i64, BigNat::one())]);
    }
    let mask: u64 = if level == 64 { u64::MAX } else { (1u64 << level) - 1 };
    let t = (shift % digits::pow2(level as u64))
        .to_u64()
        .expect("shift reduced below 2^L <= 2^40");
    // Offset histogram over the full range of achievable differences.
    let width = level as usize;
    let mut hist = vec![0u64; 2 * width + 1];
    for n in 0..=mask {
        let j = ((n.wrapping_add(t)) & mask).count_ones() as i64 - n.count_ones() as i64;
        hist[(j + width as i64) as usize] += 1;
    }
    hist.into_iter()
        .enumerate()
        .filter(|&(_, c)| c > 0)
        .map(|(i, c)| (i as i64 - width as i64, BigNat::from(c)))
        .collect()
}

type CountTable = Rc<BTreeMap<i64, BigNat>>;

struct PhiMemo {
    tables: HashMap<(u32, BigUint), CountTable>,
}

impl PhiMemo {
    fn new() -> Self {
        PhiMemo {
            tables: HashMap::new(),
        }
    }
}

/// Counts with denominator `2^level`. The shift is reduced modulo
/// `2^level` first: the difference only sees `(n + t) mod 2^L`.
fn phi_recurrence(shift: &BigNat, level: u32, memo: &mut PhiMemo) -> CountTable {
    let t = shift % digits::pow2(level as u64);
    if let Some(hit) = memo.tables.get(&(level, t.clone())) {
        return Rc::clone(hit);
    }
    let result: BTreeMap<i64, BigNat> = if t.is_zero() {
        // Point mass: shifting by a multiple of 2^L changes nothing.
        BTreeMap::from([(0i64, digits::pow2(level as u64))])
    } else if t.is_one() {
        phi_shift_one(level)
    } else if (&t % 2u32).is_zero() {
        let inner = phi_recurrence(&(&t >> 1u32), level - 1, memo);
        inner.iter().map(|(&j, c)| (j, c << 1u32)).collect()
    } else {
        // counts(j, 2u+1, L) = counts(j-1, u, L-1) + counts(j+1, u+1, L-1)
        let u = &t >> 1u32;
        let left = phi_recurrence(&u, level - 1, memo);
        let right = phi_recurrence(&(u + 1u32), level - 1, memo);
        let mut merged: BTreeMap<i64, BigNat> = BTreeMap::new();
        for (&j, c) in left.iter() {
            *merged.entry(j + 1).or_insert_with(BigUint::zero) += c;
        }
        for (&j, c) in right.iter() {
            *merged.entry(j - 1).or_insert_with(BigUint::zero) += c;
        }
        merged
    };
    let rc = Rc::new(result);
    memo.tables.insert((level, t), Rc::clone(&rc));
    rc
}

/// Closed form for shift 1: counts[j] = 2^(L+j-2) for -L+2 <= j <= 1,
/// plus a single wrap-around event at j = -L.
fn phi_shift_one(level: u32) -> BTreeMap<i64, BigNat> {
    debug_assert!(level >= 1);
    let l = level as i64;
    let mut counts = BTreeMap::new();
    counts.insert(-l, BigNat::one());
    for j in (-l + 2)..=1 {
        counts.insert(j, digits::pow2((l + j - 2) as u64));
    }
    counts
}

/// Evaluates `omega_t(theta, L)`.
///
/// theta is taken modulo 1. Recurrence mode never materializes a
/// table; direct mode sums `phi(j) e(j theta)` over the exact
/// recurrence table, so the two modes share no floating-point path.
pub fn omega(shift: &BigNat, theta: f64, level: u32, mode: OmegaMode) -> Complex64 {
    let theta = theta.rem_euclid(1.0);
    match mode {
        OmegaMode::Direct => {
            let mut memo = PhiMemo::new();
            let table = phi_recurrence(shift, level, &mut memo);
            let denom = 2f64.powi(-(level as i32));
            table
                .iter()
                .map(|(&j, c)| unit(j as f64 * theta) * (big_to_f64(c) * denom))
                .sum()
        }
        OmegaMode::Recurrence => {
            let mut memo: HashMap<(u32, BigUint), Complex64> = HashMap::new();
            omega_recurrence(shift, theta, level, &mut memo)
        }
    }
}

fn omega_recurrence(
    shift: &BigNat,
    theta: f64,
    level: u32,
    memo: &mut HashMap<(u32, BigUint), Complex64>,
) -> Complex64 {
    let t = shift % digits::pow2(level as u64);
    if let Some(&hit) = memo.get(&(level, t.clone())) {
        return hit;
    }
    let value = if t.is_zero() {
        Complex64::new(1.0, 0.0)
    } else if t.is_one() {
        omega_shift_one(theta, level)
    } else if (&t % 2u32).is_zero() {
        omega_recurrence(&(&t >> 1u32), theta, level - 1, memo)
    } else {
        let u = &t >> 1u32;
        let a = omega_recurrence(&u, theta, level - 1, memo);
        let b = omega_recurrence(&(u + 1u32), theta, level - 1, memo);
        unit(theta) * 0.5 * a + unit(-theta) * 0.5 * b
    };
    memo.insert((level, t), value);
    value
}

/// omega_1 from the closed-form phi: 2^-L e(-L theta) plus the
/// geometric tail sum_{j<=1} 2^(j-2) e(j theta). Terms below f64
/// resolution are dropped, which keeps the evaluation O(1) even for
/// very large L.
fn omega_shift_one(theta: f64, level: u32) -> Complex64 {
    let l = level as i64;
    let mut acc = Complex64::new(0.0, 0.0);
    if level <= 1070 {
        acc += unit(-(l as f64) * theta) * 2f64.powi(-(level as i32));
    }
    for j in ((-l + 2)..=1).rev() {
        let weight = 2f64.powi((j - 2) as i32);
        if weight < 1e-20 {
            break;
        }
        acc += unit(j as f64 * theta) * weight;
    }
    acc
}

fn unit(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, std::f64::consts::TAU * x)
}

fn big_to_f64(n: &BigNat) -> f64 {
    n.to_f64().unwrap_or(f64::INFINITY)
}

/// Exact first and second moments of `phi(., t, L)` by the moment
/// recurrence `m2(2t+1, L+1) = (m2(t, L) + m2(t+1, L))/2 + 1` with
/// `m2(2t, L+1) = m2(t, L)`; `m1` vanishes identically.
pub fn moments(shift: &BigNat, level: u32) -> MomentPair {
    let mut memo: HashMap<(u32, BigUint), BigRational> = HashMap::new();
    MomentPair {
        m1: BigRational::zero(),
        m2: m2_recurrence(shift, level, &mut memo),
    }
}

fn m2_recurrence(
    shift: &BigNat,
    level: u32,
    memo: &mut HashMap<(u32, BigUint), BigRational>,
) -> BigRational {
    let t = shift % digits::pow2(level as u64);
    if t.is_zero() {
        return BigRational::zero();
    }
    if let Some(hit) = memo.get(&(level, t.clone())) {
        return hit.clone();
    }
    let value = if (&t % 2u32).is_zero() {
        m2_recurrence(&(&t >> 1u32), level - 1, memo)
    } else {
        let u = &t >> 1u32;
        let a = m2_recurrence(&u, level - 1, memo);
        let b = m2_recurrence(&(&u + 1u32), level - 1, memo);
        (a + b) / BigRational::from_integer(2.into()) + BigRational::one()
    };
    memo.insert((level, t), value.clone());
    value
}

/// Result of the exhaustive second-moment bound sweep.
#[derive(Debug, Clone, Serialize)]
pub struct M2BoundReport {
    pub nu: u32,
    /// Largest m2(t, nu) observed, as an exact fraction string.
    pub max_m2: String,
    pub max_m2_float: f64,
    #[serde(with = "crate::serde_util::bignat")]
    pub witness_t: BigNat,
    /// Whether m2(t, nu) <= 2 nu held for every 1 <= t < 2^nu.
    pub holds: bool,
}

/// Checks `m2(t, nu) <= 2 nu` for every `1 <= t < 2^nu`, exactly.
///
/// Works bottom-up one level at a time; the odd-shift rule wraps
/// `t + 1 = 2^level` around to the zero shift, whose second moment
/// vanishes. Numerators stay below `2 nu * 2^nu`, so 128-bit rationals
/// suffice.
pub fn check_m2_bound(nu: u32) -> Result<M2BoundReport> {
    if nu < 1 {
        return Err(Error::Precondition("m2 bound sweep requires nu >= 1".into()));
    }
    if nu > M2_SWEEP_LIMIT {
        return Err(Error::ResourceLimit(format!(
            "exhaustive m2 sweep requires nu <= {M2_SWEEP_LIMIT}, got {nu}"
        )));
    }
    let mut level_table: Vec<Ratio<i128>> = vec![Ratio::zero()]; // level 0: only t = 0
    for level in 1..=nu {
        let size = 1usize << level;
        let mut next = vec![Ratio::zero(); size];
        for (t, slot) in next.iter_mut().enumerate().skip(1) {
            *slot = if t % 2 == 0 {
                level_table[t / 2]
            } else {
                let a = level_table[t / 2];
                let b = level_table.get(t / 2 + 1).copied().unwrap_or_else(Ratio::zero);
                (a + b) / 2 + 1
            };
        }
        level_table = next;
        let _ = level;
    }

    let bound = Ratio::from_integer(2 * nu as i128);
    let mut max_m2: Ratio<i128> = Ratio::zero();
    let mut witness = 1usize;
    let mut holds = true;
    for (t, &m2) in level_table.iter().enumerate().skip(1) {
        if m2 > max_m2 {
            max_m2 = m2;
            witness = t;
        }
        if m2 > bound {
            holds = false;
        }
    }
    Ok(M2BoundReport {
        nu,
        max_m2: format!("{}/{}", max_m2.numer(), max_m2.denom()),
        max_m2_float: max_m2.to_f64().unwrap_or(f64::NAN),
        witness_t: BigNat::from(witness as u64),
        holds,
    })
}

/// Outcome of the block-count decay bound check.
#[derive(Debug, Clone, Serialize)]
pub struct BlockBoundCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// Exponent used: largest B with 2B + 1 <= number of 1-blocks of t.
    pub b: u64,
    pub holds: bool,
}

/// Verifies `|omega_t(theta, L)| <= (1 - ||theta||^2 / 2)^B`, where
/// `||.||` is the distance to the nearest integer and `B` is the
/// largest integer with `2B + 1` at most the number of 1-blocks in the
/// binary expansion of `t`.
pub fn check_omega_block_bound(shift: &BigNat, theta: f64, level: u32) -> Result<BlockBoundCheck> {
    if shift.bits() > level as u64 {
        return Err(Error::Precondition(format!(
            "block bound check requires t < 2^L (t has {} bits, L = {level})",
            shift.bits()
        )));
    }
    let blocks = digits::count_blocks(shift).0;
    let b = blocks.saturating_sub(1) / 2;
    let frac = theta.rem_euclid(1.0);
    let dist = frac.min(1.0 - frac);
    let base = 1.0 - dist * dist / 2.0;
    let rhs = base.powi(b as i32);
    let lhs = omega(shift, theta, level, OmegaMode::Recurrence).norm();
    Ok(BlockBoundCheck {
        lhs,
        rhs,
        b,
        holds: lhs <= rhs + 1e-12,
    })
}
