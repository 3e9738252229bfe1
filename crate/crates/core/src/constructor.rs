//! Residue-class construction with prescribed digit-sum responses.
//!
//! The goal: a residue class `L + 2^nu 3^beta N` together with shifts
//! `d_j` (for `-J <= j <= J`) such that
//!
//! ```text
//! f(n + d_j) - f(n) = j*m + xi_j        for every n in the class,
//! ```
//!
//! where `f(n) = s2(n) - s3(n)` and each `xi_j` is 0 or 1. Adding the
//! right shift then moves any `f`-value in `m*{-J..J}` to 0 or 1.
//!
//! The parts, in build order:
//!
//! 1. [`build_shifts`] — `d_j` is the ternary numeral `1...10` with
//!    `(j+1+J)*eta` ones; all `d_j` are multiples of 12 and stay below
//!    `2^(nu-1)`.
//! 2. [`find_anchor`] — a binary residue `a = 1 mod 4`, `a < 2^(nu-1)`,
//!    is sampled until every binary deviation
//!    `delta_j = s2^(nu)(a + d_j) - s2^(nu)(a)` is small. Since
//!    `a + d_j` never carries past bit `nu`, the deviation is the exact
//!    response of `s2` to the shift on the whole class `a + 2^nu N`.
//! 3. [`assemble_blocks`] / [`build_ternary_key`] — four-digit ternary
//!    blocks (`0200`, `0202`, `0112`) each absorb +2, 0, or -2 of
//!    ternary digit-sum change under addition of `1111`, without
//!    carrying out of the block. Concatenating `eta`-digit segments of
//!    such blocks produces `K < 3^beta`, `K = 0 mod 3`, with
//!    `s3(K + d_j) - s3(K) = -j*m + delta_j - xi_j` for all `j`.
//! 4. [`intersect_classes`] — CRT glues the binary and ternary classes
//!    into `L`; `a = 1 mod 4` and `K = 0 mod 3` force `L = 9 mod 12`.
//! 5. [`choose_zeta`] — the rarefaction exponent for the finite
//!    progression `(L + 2^nu 3^(beta+zeta) N) intersect [N, 2N)`, tuned
//!    so that `f` concentrates around zero along the progression.
//!
//! [`ShiftFamily::build`] runs steps 1-4 with a retry loop: anchors
//! whose deviation chain would push a block-assembly target out of
//! range are rejected and the search continues, so desk-scale
//! parameter choices still converge where a single blind draw would
//! fail the assembler.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::digits::{self, pow2, pow3, BigNat};
use crate::error::{Error, Result};

/// The parameter bundle. `beta` and `nu` are always derived:
/// `beta = (2J+1)*eta + 1` and `nu` minimal with `2^(nu-1) >= 3^beta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub eta: u64,
    pub m: u64,
    #[serde(rename = "J")]
    pub j_max: u64,
    pub beta: u64,
    pub nu: u64,
    #[serde(flatten)]
    pub mode: ParamsMode,
}

/// Where the knobs came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum ParamsMode {
    /// eta, m, J supplied directly.
    Manual,
    /// Derived from N by the floor scheme
    /// `lambda0 = ln N`, `eta = 4*floor(lambda0^(3/4)/4)`,
    /// `f0 = (ln lambda0)^(1/2+eps)`, `m = floor(lambda0^(1/2)/f0)`,
    /// `J = floor(f0^2)`.
    Paper {
        lambda: u64,
        fineness: u64,
        epsilon: f64,
    },
}

/// Request shape for [`make_params`].
#[derive(Debug, Clone)]
pub enum ParamsRequest {
    Manual { eta: u64, m: u64, j_max: u64 },
    Paper { n: BigNat, epsilon: f64 },
}

/// Builds a parameter bundle from either a manual or an asymptotic-scheme
/// request.
pub fn make_params(request: &ParamsRequest) -> Result<Params> {
    match request {
        ParamsRequest::Manual { eta, m, j_max } => make_params_manual(*eta, *m, *j_max),
        ParamsRequest::Paper { n, epsilon } => make_params_paper(n, *epsilon),
    }
}

/// Manual parameters: `eta` a positive multiple of 4, `m >= 1`.
/// `J = 0` is permitted (a single-shift family, handy for smoke
/// tests).
pub fn make_params_manual(eta: u64, m: u64, j_max: u64) -> Result<Params> {
    if eta < 4 || !eta.is_multiple_of(4) {
        return Err(Error::InvalidParams(format!(
            "eta must be a positive multiple of 4, got {eta}"
        )));
    }
    if m < 1 {
        return Err(Error::InvalidParams("m must be at least 1".into()));
    }
    if (2 * j_max + 1).saturating_mul(eta) > u32::MAX as u64 / 2 {
        return Err(Error::InvalidParams(
            "eta * (2J+1) too large to materialize".into(),
        ));
    }
    let (beta, nu) = derive_beta_nu(eta, j_max);
    Ok(Params {
        eta,
        m,
        j_max,
        beta,
        nu,
        mode: ParamsMode::Manual,
    })
}

/// Asymptotic-scheme parameters for a target size `N` (natural
/// logarithm throughout). `epsilon` is a free exponent knob with
/// default 0.1; any positive value works.
pub fn make_params_paper(n: &BigNat, epsilon: f64) -> Result<Params> {
    if n < &BigNat::from(4u32) {
        return Err(Error::InvalidParams("asymptotic scheme requires N >= 4".into()));
    }
    if epsilon <= 0.0 {
        return Err(Error::InvalidParams("epsilon must be positive".into()));
    }
    let lambda0 = digits::ln_of(n);
    let lambda = lambda0.floor() as u64;
    let eta = 4 * (lambda0.powf(0.75) / 4.0).floor() as u64;
    let f0 = lambda0.ln().powf(0.5 + epsilon);
    let fineness = f0.floor() as u64;
    let m = (lambda0.sqrt() / f0).floor() as u64;
    let j_max = (f0 * f0).floor() as u64;
    if eta < 4 {
        return Err(Error::InvalidParams(format!(
            "N too small for the asymptotic scheme (eta would be {eta})"
        )));
    }
    if m < 1 {
        return Err(Error::InvalidParams(
            "N too small for the asymptotic scheme (m would be 0)".into(),
        ));
    }
    if (2 * j_max + 1).saturating_mul(eta) > u32::MAX as u64 / 2 {
        return Err(Error::InvalidParams(
            "eta * (2J+1) too large to materialize".into(),
        ));
    }
    let (beta, nu) = derive_beta_nu(eta, j_max);
    Ok(Params {
        eta,
        m,
        j_max,
        beta,
        nu,
        mode: ParamsMode::Paper {
            lambda,
            fineness,
            epsilon,
        },
    })
}

/// `beta = (2J+1)*eta + 1`; `nu - 1` is the bit length of `3^beta`,
/// the least exponent with `2^(nu-1) >= 3^beta` (a power of three is
/// never a power of two).
fn derive_beta_nu(eta: u64, j_max: u64) -> (u64, u64) {
    let beta = (2 * j_max + 1) * eta + 1;
    let nu = pow3(beta as u32).bits() + 1;
    (beta, nu)
}

/// Desk-scale default for the anchor deviation bound:
/// `max(4, 2*ceil(sqrt(2 nu)))`. Chebychev with the second-moment
/// bound `m2(t, nu) <= 2 nu` makes each draw succeed with probability
/// at least 3/4 per shift.
pub fn default_deviation_bound(nu: u64) -> u64 {
    4u64.max(2 * (2.0 * nu as f64).sqrt().ceil() as u64)
}

/// The constructed family: shifts, anchor, deviations, parities,
/// ternary key, and the CRT class representative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftFamily {
    pub params: Params,
    #[serde(rename = "d", with = "crate::serde_util::bignat_map")]
    pub shifts: BTreeMap<i64, BigNat>,
    #[serde(rename = "a", with = "crate::serde_util::bignat")]
    pub anchor: BigNat,
    #[serde(rename = "delta")]
    pub deviations: BTreeMap<i64, i64>,
    #[serde(rename = "xi")]
    pub parities: BTreeMap<i64, u8>,
    #[serde(rename = "K", with = "crate::serde_util::bignat")]
    pub ternary_key: BigNat,
    #[serde(rename = "L", with = "crate::serde_util::bignat")]
    pub class_rep: BigNat,
}

impl ShiftFamily {
    /// Runs the full pipeline for the given parameters. Anchors are
    /// drawn with the default deviation bound; candidates whose
    /// deviation chain cannot be absorbed by the block assembler are
    /// skipped. Deterministic for a fixed seed.
    pub fn build(params: &Params, seed: u64, budget: u64) -> Result<Self> {
        let shifts = build_shifts(params);
        let bound = default_deviation_bound(params.nu);
        let (anchor, deviations) = search_anchor(params, &shifts, bound, budget, seed, |deltas| {
            target_chain(params, deltas).is_ok()
        })?;
        Self::assemble(params.clone(), shifts, anchor, deviations)
    }

    /// Builds the ternary key and class representative on top of an
    /// already-chosen anchor.
    pub fn assemble(
        params: Params,
        shifts: BTreeMap<i64, BigNat>,
        anchor: BigNat,
        deviations: BTreeMap<i64, i64>,
    ) -> Result<Self> {
        let (ternary_key, parities) = build_ternary_key(&params, &shifts, &deviations)?;
        let class_rep = intersect_classes(&anchor, params.nu, &ternary_key, params.beta);
        let family = ShiftFamily {
            params,
            shifts,
            anchor,
            deviations,
            parities,
            ternary_key,
            class_rep,
        };
        family.check_difference_at_base()?;
        Ok(family)
    }

    /// Common difference of the unrarefied class, `2^nu * 3^beta`.
    pub fn residue_modulus(&self) -> BigNat {
        pow2(self.params.nu) * pow3(self.params.beta as u32)
    }

    /// The prescribed response `j*m + xi_j` of `f` to shift `d_j`.
    pub fn expected_response(&self, j: i64) -> i64 {
        j * self.params.m as i64 + self.parities[&j] as i64
    }

    /// Exact check of the difference property at the class
    /// representative itself (the `k = 0` element).
    fn check_difference_at_base(&self) -> Result<()> {
        let base = digits::f_value(&self.class_rep);
        for (&j, d) in &self.shifts {
            let got = digits::f_value(&(&self.class_rep + d)) - base;
            if got != self.expected_response(j) {
                return Err(Error::InvalidParams(format!(
                    "difference property fails at j = {j}: got {got}, expected {}",
                    self.expected_response(j)
                )));
            }
        }
        Ok(())
    }
}

/// The shifts `d_j = 3*(3^((j+1+J)*eta) - 1)/2`, i.e. the ternary
/// numerals `1^((j+1+J)*eta) 0`. Every `d_j` is divisible by 12
/// (`1111_3 = 40`) and `d_J < 3^beta / 2 <= 2^(nu-2)`.
pub fn build_shifts(params: &Params) -> BTreeMap<i64, BigNat> {
    let j_max = params.j_max as i64;
    let mut shifts = BTreeMap::new();
    for j in -j_max..=j_max {
        let ones = (j + 1 + j_max) as u32 * params.eta as u32;
        let d = BigNat::from(3u32) * (pow3(ones) - BigNat::one()) / BigNat::from(2u32);
        debug_assert!((&d % BigNat::from(12u32)).is_zero());
        debug_assert!(d.bits() < params.nu);
        shifts.insert(j, d);
    }
    shifts
}

/// Samples anchors `a = 1 mod 4`, `a < 2^(nu-1)` until all deviations
/// satisfy `|delta_j| <= bound`. Returns the first success;
/// deterministic for a fixed seed. On exhaustion reports the best
/// candidate seen.
pub fn find_anchor(
    params: &Params,
    shifts: &BTreeMap<i64, BigNat>,
    bound: u64,
    budget: u64,
    seed: u64,
) -> Result<(BigNat, BTreeMap<i64, i64>)> {
    if bound < 1 {
        return Err(Error::Precondition("deviation bound must be >= 1".into()));
    }
    search_anchor(params, shifts, bound, budget, seed, |_| true)
}

/// Shared sampling loop behind [`find_anchor`] and
/// [`ShiftFamily::build`]. `accept` sees the deviation map of each
/// in-bound candidate and may reject it (used to pre-validate the
/// block-assembly target chain).
fn search_anchor(
    params: &Params,
    shifts: &BTreeMap<i64, BigNat>,
    bound: u64,
    budget: u64,
    seed: u64,
    accept: impl Fn(&BTreeMap<i64, i64>) -> bool,
) -> Result<(BigNat, BTreeMap<i64, i64>)> {
    let nu = params.nu;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut best: Option<(u64, BigNat)> = None;

    // With nu <= 63 the whole candidate fits in a machine word; the
    // sweep over small parameter cells runs millions of draws, so this
    // path matters.
    if nu <= 63 {
        let shifts_small: Vec<(i64, u64)> = shifts
            .iter()
            .map(|(&j, d)| (j, d.to_u64().expect("d_j < 2^(nu-1) <= 2^62")))
            .collect();
        let y_range = 1u64 << (nu - 3);
        for _ in 0..budget {
            let a = 4 * rng.gen_range(0..y_range) + 1;
            let s2_a = a.count_ones() as i64;
            let mut worst = 0u64;
            let mut deltas = Vec::with_capacity(shifts_small.len());
            for &(j, d) in &shifts_small {
                let delta = (a + d).count_ones() as i64 - s2_a;
                worst = worst.max(delta.unsigned_abs());
                deltas.push((j, delta));
            }
            if worst <= bound {
                let map: BTreeMap<i64, i64> = deltas.into_iter().collect();
                if accept(&map) {
                    return Ok((BigNat::from(a), map));
                }
            }
            if best.as_ref().is_none_or(|(w, _)| worst < *w) {
                best = Some((worst, BigNat::from(a)));
            }
        }
    } else {
        use num_bigint::RandBigInt;
        let y_bound = pow2(nu - 3);
        for _ in 0..budget {
            let a: BigNat = (rng.gen_biguint_below(&y_bound) << 2u32) + BigNat::one();
            let s2_a = digits::s2(&a) as i64;
            let mut worst = 0u64;
            let mut deltas = Vec::with_capacity(shifts.len());
            for (&j, d) in shifts {
                let delta = digits::s2(&(&a + d)) as i64 - s2_a;
                worst = worst.max(delta.unsigned_abs());
                deltas.push((j, delta));
            }
            if worst <= bound {
                let map: BTreeMap<i64, i64> = deltas.into_iter().collect();
                if accept(&map) {
                    return Ok((a, map));
                }
            }
            if best.as_ref().is_none_or(|(w, _)| worst < *w) {
                best = Some((worst, a));
            }
        }
    }

    let detail = match best {
        Some((worst, a)) => format!(
            "no anchor with max |delta_j| <= {bound} and a feasible target chain; best candidate a = {a} with max |delta_j| = {worst}"
        ),
        None => "no candidates drawn (budget 0)".into(),
    };
    Err(Error::SearchFailure {
        attempts: budget,
        detail,
    })
}

/// Four-digit ternary addition patterns under `+1111`:
/// `0112 -> 2000` (digit sum -2), `0202 -> 2020` (0),
/// `0200 -> 2011` (+2). Digits little-endian.
const BLOCK_MINUS: [u8; 4] = [2, 1, 1, 0];
const BLOCK_NEUTRAL: [u8; 4] = [2, 0, 2, 0];
const BLOCK_PLUS: [u8; 4] = [0, 0, 2, 0];

/// Builds `a < 3^(eta-1)` from four-digit blocks so that adding the
/// repunit `b = (3^eta - 1)/2` changes the ternary digit sum by
/// exactly `target - xi`, with `xi = target mod 2`.
///
/// Each block contributes -2, 0, or +2 and never carries into its
/// neighbour (every block's top digit is 0), so `|target| <= eta/2` is
/// the representable range. The signed blocks sit at the
/// most-significant end; any placement works, fixing one makes the
/// output deterministic.
pub fn assemble_blocks(target: i64, eta: u64) -> Result<(BigNat, u8)> {
    if eta < 4 || !eta.is_multiple_of(4) {
        return Err(Error::InvalidParams(format!(
            "block assembly needs eta a positive multiple of 4, got {eta}"
        )));
    }
    if target.unsigned_abs() > eta / 2 {
        return Err(Error::TargetOutOfRange {
            target,
            max: eta / 2,
        });
    }
    let xi = target.rem_euclid(2) as u8;
    let signed_total = target - xi as i64; // even
    let copies = (signed_total.unsigned_abs() / 2) as usize;
    let blocks = (eta / 4) as usize;
    debug_assert!(copies <= blocks);
    let pattern = if signed_total >= 0 { BLOCK_PLUS } else { BLOCK_MINUS };

    let mut digits_le = Vec::with_capacity(blocks * 4);
    for _ in 0..blocks - copies {
        digits_le.extend_from_slice(&BLOCK_NEUTRAL);
    }
    for _ in 0..copies {
        digits_le.extend_from_slice(&pattern);
    }
    let a = BigNat::from_radix_le(&digits_le, 3).expect("valid ternary digits");

    debug_assert!(a < pow3(eta as u32 - 1));
    debug_assert_eq!(
        digits::s3(&(&a + repunit3(eta))) as i64 - digits::s3(&a) as i64,
        target - xi as i64
    );
    Ok((a, xi))
}

/// The ternary repunit `1^eta = (3^eta - 1)/2`.
fn repunit3(eta: u64) -> BigNat {
    (pow3(eta as u32) - BigNat::one()) / BigNat::from(2u32)
}

/// Block-assembly targets for the whole family, with their parities.
///
/// The leftmost segment absorbs `J*m + delta_{-J}`; each subsequent
/// segment absorbs `-m - delta_{j-1} + xi_{j-1} + delta_j`, so the
/// telescoped ternary response at shift `d_j` comes out as
/// `-j*m + delta_j - xi_j`. Fails if any target exceeds the block
/// capacity `eta/2`.
fn target_chain(params: &Params, deviations: &BTreeMap<i64, i64>) -> Result<Vec<(i64, i64, u8)>> {
    let j_max = params.j_max as i64;
    let m = params.m as i64;
    let cap = params.eta / 2;
    let mut chain = Vec::with_capacity(deviations.len());
    let mut prev_delta = 0i64;
    let mut prev_xi = 0i64;
    for j in -j_max..=j_max {
        let delta = deviations[&j];
        let target = if j == -j_max {
            j_max * m + delta
        } else {
            -m - prev_delta + prev_xi + delta
        };
        if target.unsigned_abs() > cap {
            return Err(Error::TargetOutOfRange {
                target,
                max: cap,
            });
        }
        let xi = target.rem_euclid(2) as u8;
        chain.push((j, target, xi));
        prev_delta = delta;
        prev_xi = xi as i64;
    }
    Ok(chain)
}

/// Concatenates one assembled `eta`-digit segment per shift into the
/// ternary key `K < 3^beta`, `K = 0 mod 3`, and verifies
/// `s3(K + d_j) - s3(K) = -j*m + delta_j - xi_j` for every `j` by
/// direct recomputation before returning.
pub fn build_ternary_key(
    params: &Params,
    shifts: &BTreeMap<i64, BigNat>,
    deviations: &BTreeMap<i64, i64>,
) -> Result<(BigNat, BTreeMap<i64, u8>)> {
    let chain = target_chain(params, deviations)?;
    let j_max = params.j_max as i64;
    let mut key = BigNat::zero();
    let mut parities = BTreeMap::new();
    for (j, target, _) in &chain {
        let (a_frak, xi) = assemble_blocks(*target, params.eta)?;
        if *j == -j_max {
            key = BigNat::from(3u32) * a_frak;
        } else {
            let exponent = ((j + j_max) as u32) * params.eta as u32 + 1;
            key += pow3(exponent) * a_frak;
        }
        parities.insert(*j, xi);
    }

    debug_assert!(key < pow3(params.beta as u32));
    debug_assert!((&key % BigNat::from(3u32)).is_zero());

    let s3_key = digits::s3(&key) as i64;
    for (&j, d) in shifts {
        let got = digits::s3(&(&key + d)) as i64 - s3_key;
        let expected = -j * params.m as i64 + deviations[&j] - parities[&j] as i64;
        if got != expected {
            return Err(Error::InvalidParams(format!(
                "ternary response check failed at j = {j}: got {got}, expected {expected}"
            )));
        }
    }
    Ok((key, parities))
}

/// Chinese-remainder intersection: the unique `L < 2^nu * 3^beta` with
/// `L = a mod 2^nu` and `L = K mod 3^beta`. Both congruences are
/// re-verified on every call.
pub fn intersect_classes(a: &BigNat, nu: u64, key: &BigNat, beta: u64) -> BigNat {
    let m2 = BigInt::from(pow2(nu));
    let m3 = BigInt::from(pow3(beta as u32));
    let gcd = m2.extended_gcd(&m3);
    assert!(gcd.gcd.is_one(), "moduli 2^nu and 3^beta must be coprime");
    let inv = gcd.x.mod_floor(&m3); // 2^nu inverse modulo 3^beta
    let a_int = BigInt::from(a.clone());
    let diff = (BigInt::from(key.clone()) - &a_int).mod_floor(&m3);
    let steps = (diff * inv).mod_floor(&m3);
    let class = (&a_int + &m2 * steps)
        .to_biguint()
        .expect("CRT representative is nonnegative");

    assert_eq!(&class % pow2(nu), a % pow2(nu));
    assert_eq!(&class % pow3(beta as u32), key % pow3(beta as u32));
    class
}

/// The chosen rarefaction exponent and its unclamped value.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ZetaChoice {
    pub zeta: u64,
    pub zeta0: f64,
    pub clamped: bool,
}

/// Rarefaction exponent
/// `zeta0 = log3(N) * (1 - log(3)/log(4)) + s3(L) - s2(r2) + nu/2 - beta`,
/// floored, and clamped at zero (with a flag) when desk-scale
/// parameters drive it negative. Asymptotically
/// `zeta ~ 0.207... * log3(N)`.
pub fn choose_zeta(n: &BigNat, class_rep: &BigNat, nu: u64, beta: u64, r2: &BigNat) -> ZetaChoice {
    let coeff = 1.0 - 3f64.ln() / 4f64.ln();
    let zeta0 = digits::log3_of(n) * coeff + digits::s3(class_rep) as f64
        - digits::s2(r2) as f64
        + nu as f64 / 2.0
        - beta as f64;
    if zeta0 < 0.0 {
        ZetaChoice {
            zeta: 0,
            zeta0,
            clamped: true,
        }
    } else {
        ZetaChoice {
            zeta: zeta0.floor() as u64,
            zeta0,
            clamped: false,
        }
    }
}

/// The rarefied finite progression
/// `(L + 2^nu 3^(beta+zeta) N) intersect [N, 2N)` with its sampling
/// interval `I = [k_lo, k_hi)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProgressionSpec {
    pub family: ShiftFamily,
    #[serde(rename = "N", with = "crate::serde_util::bignat")]
    pub n_lo: BigNat,
    pub zeta: u64,
    pub zeta0: f64,
    pub zeta_clamped: bool,
    #[serde(with = "crate::serde_util::bignat")]
    pub modulus: BigNat,
    #[serde(with = "crate::serde_util::bignat")]
    pub k_lo: BigNat,
    #[serde(with = "crate::serde_util::bignat")]
    pub k_hi: BigNat,
    /// `L mod 2^nu`.
    #[serde(with = "crate::serde_util::bignat")]
    pub r2: BigNat,
    /// `floor(L / 2^nu)`.
    #[serde(with = "crate::serde_util::bignat")]
    pub b2: BigNat,
}

impl ProgressionSpec {
    /// Builds the progression over `[N, 2N)` with `zeta` from
    /// [`choose_zeta`].
    pub fn new(family: ShiftFamily, n_lo: BigNat) -> Result<Self> {
        let r2 = &family.class_rep % pow2(family.params.nu);
        let choice = choose_zeta(
            &n_lo,
            &family.class_rep,
            family.params.nu,
            family.params.beta,
            &r2,
        );
        Self::with_choice(family, n_lo, choice)
    }

    /// Same, but with an explicit rarefaction exponent (used to study
    /// deliberately off-center progressions).
    pub fn with_zeta(family: ShiftFamily, n_lo: BigNat, zeta: u64) -> Result<Self> {
        let choice = ZetaChoice {
            zeta,
            zeta0: zeta as f64,
            clamped: false,
        };
        Self::with_choice(family, n_lo, choice)
    }

    fn with_choice(family: ShiftFamily, n_lo: BigNat, choice: ZetaChoice) -> Result<Self> {
        let nu = family.params.nu;
        let exponent = family.params.beta + choice.zeta;
        if exponent > u32::MAX as u64 {
            return Err(Error::InvalidParams("beta + zeta too large".into()));
        }
        let modulus = pow2(nu) * pow3(exponent as u32);
        if modulus > n_lo {
            return Err(Error::EmptyInterval);
        }
        let r2 = &family.class_rep % pow2(nu);
        let b2 = &family.class_rep >> nu;
        let class_rep = family.class_rep.clone();
        let k_lo = ceil_div(&(&n_lo - &class_rep), &modulus);
        let k_hi = ceil_div(&(&n_lo + &n_lo - &class_rep), &modulus);
        if k_lo >= k_hi {
            return Err(Error::EmptyInterval);
        }
        Ok(ProgressionSpec {
            family,
            n_lo,
            zeta: choice.zeta,
            zeta0: choice.zeta0,
            zeta_clamped: choice.clamped,
            modulus,
            k_lo,
            k_hi,
            r2,
            b2,
        })
    }

    /// Number of progression elements in `[N, 2N)`.
    pub fn interval_len(&self) -> BigNat {
        &self.k_hi - &self.k_lo
    }

    /// The progression element `L + modulus * k`.
    pub fn element(&self, k: &BigNat) -> BigNat {
        &self.family.class_rep + &self.modulus * k
    }

    /// `f` evaluated at the `k`-th element.
    pub fn f_at(&self, k: &BigNat) -> i64 {
        digits::f_value(&self.element(k))
    }

    /// Uniform sample from `[k_lo, k_hi)`.
    pub fn sample_k<R: Rng>(&self, rng: &mut R) -> BigNat {
        use num_bigint::RandBigInt;
        &self.k_lo + rng.gen_biguint_below(&self.interval_len())
    }
}

fn ceil_div(a: &BigNat, b: &BigNat) -> BigNat {
    (a + b - BigNat::one()) / b
}

/// Outcome of a randomized difference-property verification.
#[derive(Debug, Clone, Serialize)]
pub struct DifferenceReport {
    pub samples: u64,
    pub passed: bool,
    pub failure: Option<DifferenceFailure>,
}

/// First counterexample found, if any.
#[derive(Debug, Clone, Serialize)]
pub struct DifferenceFailure {
    #[serde(with = "crate::serde_util::bignat")]
    pub k: BigNat,
    pub j: i64,
    pub expected: i64,
    pub actual: i64,
}

/// Draws random elements `n = L + 2^nu 3^beta k` (64-bit k) and checks
/// `f(n + d_j) - f(n) = j*m + xi_j` exactly for every `j`. Must pass
/// for every family produced by [`ShiftFamily::build`].
pub fn verify_difference_property(
    family: &ShiftFamily,
    samples: u64,
    seed: u64,
) -> DifferenceReport {
    let modulus = family.residue_modulus();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let k = BigNat::from(rng.gen::<u64>());
        let n = &family.class_rep + &modulus * &k;
        let f_n = digits::f_value(&n);
        for (&j, d) in &family.shifts {
            let actual = digits::f_value(&(&n + d)) - f_n;
            let expected = family.expected_response(j);
            if actual != expected {
                return DifferenceReport {
                    samples,
                    passed: false,
                    failure: Some(DifferenceFailure {
                        k,
                        j,
                        expected,
                        actual,
                    }),
                };
            }
        }
    }
    DifferenceReport {
        samples,
        passed: true,
        failure: None,
    }
}
