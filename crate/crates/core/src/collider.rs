//! Collision enumeration and the collision factory.
//!
//! Enumeration keeps one digit array per base and updates it with
//! carry propagation on every `+1`, so a step costs amortized
//! constant work instead of a fresh base conversion. Ranges are
//! processed in chunks of [`CHUNK_SIZE`]; each chunk seeds its digit
//! arrays from the chunk base, chunks run in parallel, and results
//! are delivered strictly in order, so the output is identical for
//! any thread count.
//!
//! The factory ([`forge_collision`]) makes the existence argument
//! constructive by rejection sampling: draw `k` from the rarefied
//! progression, read `v = f(L + modulus*k)`, and when `v = -j*m` for
//! some `|j| <= J` apply the shift `d_j` to move `f` to `xi_j` (0 or
//! 1). A residual 1 is cleared by `n + 1`, valid because the class
//! was pinned to `9 mod 12`, where `+1` raises the ternary digit sum
//! by one and leaves the binary digit sum alone. Every output is
//! re-verified from scratch and carries a replayable certificate.

use std::collections::BTreeSet;
use std::io::BufRead;

use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constructor::{Params, ProgressionSpec, ShiftFamily};
use crate::digits::{self, BigNat};
use crate::error::{Error, Result};

/// Enumeration chunk size; reseeding a digit array costs O(log n),
/// amortized to well under 1% of the per-step work at this size.
pub const CHUNK_SIZE: u64 = 1 << 20;

/// Default anchor-search budget used when the factory has to build a
/// family from raw parameters.
pub const DEFAULT_BUILD_BUDGET: u64 = 10_000_000;

/// Which integers to emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CollisionKind {
    /// `s2(n) = s3(n)`.
    Exact,
    /// `s2(n) - s3(n)` is 0 or 1.
    Almost,
}

impl CollisionKind {
    #[inline]
    fn matches(self, s2: u64, s3: u64) -> bool {
        match self {
            CollisionKind::Exact => s2 == s3,
            CollisionKind::Almost => s2 == s3 || s2 == s3 + 1,
        }
    }
}

/// One enumerated (or forged) integer together with both digit sums.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollisionRecord {
    #[serde(with = "crate::serde_util::bignat")]
    pub n: BigNat,
    pub s2: u64,
    pub s3: u64,
    pub kind: CollisionKind,
}

impl CollisionRecord {
    /// Recomputes both digit sums and re-checks the kind invariant.
    pub fn is_valid(&self) -> bool {
        let s2 = digits::s2(&self.n);
        let s3 = digits::s3(&self.n);
        s2 == self.s2 && s3 == self.s3 && self.kind.matches(s2, s3)
    }
}

/// Incremental digit counter: digit array plus running digit sum,
/// advanced by carry propagation.
#[derive(Debug, Clone)]
pub struct DigitTally {
    base: u8,
    digits: Vec<u8>,
    sum: u64,
}

impl DigitTally {
    pub fn new(base: u32, start: u64) -> Self {
        debug_assert!((2..=255).contains(&base));
        let digits = if start == 0 {
            Vec::new()
        } else {
            BigNat::from(start).to_radix_le(base)
        };
        let sum = digits.iter().map(|&d| d as u64).sum();
        DigitTally {
            base: base as u8,
            digits,
            sum,
        }
    }

    #[inline]
    pub fn sum(&self) -> u64 {
        self.sum
    }

    /// Advances the counter by one.
    #[inline]
    pub fn step(&mut self) {
        let top = self.base - 1;
        for d in self.digits.iter_mut() {
            if *d == top {
                *d = 0;
                self.sum -= top as u64;
            } else {
                *d += 1;
                self.sum += 1;
                return;
            }
        }
        self.digits.push(1);
        self.sum += 1;
    }
}

/// Scans `[lo, hi)` with incremental counters, invoking `hit` for
/// every match.
fn scan_range(lo: u64, hi: u64, kind: CollisionKind, mut hit: impl FnMut(u64, u64, u64)) {
    let mut tally2 = DigitTally::new(2, lo);
    let mut tally3 = DigitTally::new(3, lo);
    for n in lo..hi {
        let (s2, s3) = (tally2.sum(), tally3.sum());
        if kind.matches(s2, s3) {
            hit(n, s2, s3);
        }
        tally2.step();
        tally3.step();
    }
}

fn limit_to_u64(limit: &BigNat) -> Result<u64> {
    limit.to_u64().ok_or_else(|| {
        Error::ResourceLimit("enumeration limit must fit in 64 bits".into())
    })
}

fn pool(threads: usize) -> Result<rayon::ThreadPool> {
    if threads == 0 {
        return Err(Error::InvalidParams("threads must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidParams(format!("thread pool: {e}")))
}

/// Streams every match below `limit` in increasing order into `sink`.
///
/// Chunks are scanned in parallel in bounded waves and handed to the
/// sink strictly in chunk order; output is byte-identical for every
/// thread count.
pub fn for_each_collision(
    limit: &BigNat,
    kind: CollisionKind,
    threads: usize,
    mut sink: impl FnMut(CollisionRecord),
) -> Result<()> {
    let limit = limit_to_u64(limit)?;
    let pool = pool(threads)?;
    let chunk_starts: Vec<u64> = (0..limit).step_by(CHUNK_SIZE as usize).collect();
    // Bounded wave of chunks in flight keeps memory proportional to
    // threads, not to the whole range.
    let wave = threads.max(1) * 4;
    for starts in chunk_starts.chunks(wave) {
        let buffers: Vec<Vec<(u64, u64, u64)>> = pool.install(|| {
            starts
                .par_iter()
                .map(|&lo| {
                    let hi = (lo + CHUNK_SIZE).min(limit);
                    let mut buf = Vec::new();
                    scan_range(lo, hi, kind, |n, s2, s3| buf.push((n, s2, s3)));
                    buf
                })
                .collect()
        });
        for buf in buffers {
            for (n, s2, s3) in buf {
                sink(CollisionRecord {
                    n: BigNat::from(n),
                    s2,
                    s3,
                    kind,
                });
            }
        }
    }
    Ok(())
}

/// Collects every match below `limit` in increasing order.
pub fn enumerate_collisions(
    limit: &BigNat,
    kind: CollisionKind,
    threads: usize,
) -> Result<Vec<CollisionRecord>> {
    let mut out = Vec::new();
    for_each_collision(limit, kind, threads, |r| out.push(r))?;
    Ok(out)
}

/// Exact collision counts below each checkpoint, in one enumeration
/// pass. Checkpoints must be strictly increasing and at most `limit`.
pub fn count_collisions(
    limit: &BigNat,
    checkpoints: &[BigNat],
    threads: usize,
) -> Result<Vec<(BigNat, u64)>> {
    let limit = limit_to_u64(limit)?;
    let mut marks = Vec::with_capacity(checkpoints.len());
    for c in checkpoints {
        let c = limit_to_u64(c)?;
        if c > limit {
            return Err(Error::Precondition(format!(
                "checkpoint {c} exceeds limit {limit}"
            )));
        }
        if let Some(&prev) = marks.last() {
            if c <= prev {
                return Err(Error::Precondition(
                    "checkpoints must be strictly increasing".into(),
                ));
            }
        }
        marks.push(c);
    }
    let pool = pool(threads)?;
    let chunk_starts: Vec<u64> = (0..limit).step_by(CHUNK_SIZE as usize).collect();
    // Per chunk: how many hits fall below each checkpoint.
    let partials: Vec<Vec<u64>> = pool.install(|| {
        chunk_starts
            .par_iter()
            .map(|&lo| {
                let hi = (lo + CHUNK_SIZE).min(limit);
                let mut counts = vec![0u64; marks.len()];
                scan_range(lo, hi, CollisionKind::Exact, |n, _, _| {
                    for (slot, &mark) in counts.iter_mut().zip(&marks) {
                        if n < mark {
                            *slot += 1;
                        }
                    }
                });
                counts
            })
            .collect()
    });
    let mut totals = vec![0u64; marks.len()];
    for partial in partials {
        for (t, p) in totals.iter_mut().zip(partial) {
            *t += p;
        }
    }
    Ok(marks
        .into_iter()
        .map(BigNat::from)
        .zip(totals)
        .collect())
}

/// Finds all `n < limit` whose window `{v in [0, window) : f(n+v) = 0}`
/// equals `offsets` exactly.
pub fn find_patterns(
    limit: &BigNat,
    window: u64,
    offsets: &BTreeSet<u64>,
) -> Result<Vec<BigNat>> {
    if window < 1 {
        return Err(Error::Precondition("window must be at least 1".into()));
    }
    if offsets.iter().any(|&v| v >= window) {
        return Err(Error::Precondition(
            "offsets must lie inside [0, window)".into(),
        ));
    }
    let limit = limit_to_u64(limit)?;
    let window = window as usize;
    let wanted: Vec<bool> = (0..window).map(|v| offsets.contains(&(v as u64))).collect();
    let want_zeros = offsets.len();

    let mut ring = vec![false; window];
    let mut zeros_in_ring = 0usize;
    let mut tally2 = DigitTally::new(2, 0);
    let mut tally3 = DigitTally::new(3, 0);
    let mut matches = Vec::new();
    let total = limit + window as u64 - 1;
    for m in 0..total {
        let slot = (m % window as u64) as usize;
        // Ring holds the zero-flags for [m - window + 1, m].
        if ring[slot] {
            zeros_in_ring -= 1;
        }
        let is_zero = tally2.sum() == tally3.sum();
        ring[slot] = is_zero;
        zeros_in_ring += usize::from(is_zero);
        tally2.step();
        tally3.step();

        if m + 1 >= window as u64 {
            let start = m + 1 - window as u64;
            if start >= limit {
                break;
            }
            if zeros_in_ring == want_zeros {
                let base = (start % window as u64) as usize;
                let ok = (0..window).all(|v| ring[(base + v) % window] == wanted[v]);
                if ok {
                    matches.push(BigNat::from(start));
                }
            }
        }
    }
    Ok(matches)
}

/// Replayable proof of how a forged collision was assembled:
/// `n = L + modulus*k + d_j (+1)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Certificate {
    pub record: CollisionRecord,
    #[serde(with = "crate::serde_util::bignat")]
    pub k: BigNat,
    pub j: i64,
    pub used_plus_one: bool,
    pub spec: ProgressionSpec,
}

impl Certificate {
    /// Recomputes both digit sums and replays the arithmetic trail.
    pub fn verify(&self) -> bool {
        let mut n = self.spec.element(&self.k) + &self.spec.family.shifts[&self.j];
        if self.used_plus_one {
            let before = &n % BigNat::from(12u32);
            if before != BigNat::from(9u32) {
                return false;
            }
            n += 1u32;
        }
        n == self.record.n && self.record.is_valid() && self.record.s2 == self.record.s3
    }
}

/// Input to the factory: a prebuilt family or raw parameters.
pub enum ForgeInput<'a> {
    Params(&'a Params),
    Family(&'a ShiftFamily),
}

/// Manufactures a verified collision in `[N, 2N)`.
///
/// Samples are drawn in deterministic batches; with several threads
/// the batches race but the returned certificate is always the one
/// with the smallest batch index, so output depends only on the seed.
pub fn forge_collision(
    input: ForgeInput<'_>,
    n_lo: &BigNat,
    budget: u64,
    seed: u64,
    threads: usize,
) -> Result<Certificate> {
    let family = match input {
        ForgeInput::Family(f) => f.clone(),
        ForgeInput::Params(p) => ShiftFamily::build(p, seed, DEFAULT_BUILD_BUDGET)?,
    };
    let spec = ProgressionSpec::new(family, n_lo.clone())?;
    forge_with_spec(&spec, budget, seed, threads)
}

/// The sampling stage of the factory, on an explicit progression.
pub fn forge_with_spec(
    spec: &ProgressionSpec,
    budget: u64,
    seed: u64,
    threads: usize,
) -> Result<Certificate> {
    if budget == 0 {
        return Err(Error::SearchFailure {
            attempts: 0,
            detail: "sampling budget is zero".into(),
        });
    }
    let pool = pool(threads)?;
    let params = &spec.family.params;
    let m = params.m as i64;
    let span = (params.j_max * params.m) as i64;

    const BATCH: u64 = 64;
    let batches = budget.div_ceil(BATCH);
    let found = pool.install(|| {
        (0..batches)
            .into_par_iter()
            .find_map_first(|batch| -> Option<Certificate> {
                let mut rng = ChaCha12Rng::seed_from_u64(seed);
                rng.set_stream(batch + 1);
                let in_batch = BATCH.min(budget - batch * BATCH);
                for _ in 0..in_batch {
                    let k = spec.sample_k(&mut rng);
                    let v = spec.f_at(&k);
                    if v.abs() <= span && v % m == 0 {
                        let j = -v / m;
                        return Some(finish(spec, k, j));
                    }
                }
                None
            })
    });
    match found {
        Some(cert) => {
            if !cert.verify() {
                return Err(Error::InvalidInput(
                    "internal error: forged certificate failed re-verification".into(),
                ));
            }
            Ok(cert)
        }
        None => {
            let est = hit_rate_estimate(spec);
            Err(Error::SearchFailure {
                attempts: budget,
                detail: format!(
                    "no f(n) in m*{{-J..J}} found; Gaussian local-limit hit-rate estimate {est:.3e} \
                     (expected draws per hit {:.1e}); consider a larger budget or different parameters",
                    1.0 / est.max(1e-300)
                ),
            })
        }
    }
}

/// Applies the chosen shift and, when the parity bit is set, the
/// final `+1` step on the `9 mod 12` class.
fn finish(spec: &ProgressionSpec, k: BigNat, j: i64) -> Certificate {
    let shifted = spec.element(&k) + &spec.family.shifts[&j];
    let xi = spec.family.parities[&j];
    let n = if xi == 0 { shifted } else { shifted + 1u32 };
    let record = CollisionRecord {
        s2: digits::s2(&n),
        s3: digits::s3(&n),
        n,
        kind: CollisionKind::Exact,
    };
    Certificate {
        record,
        k,
        j,
        used_plus_one: xi == 1,
        spec: spec.clone(),
    }
}

/// Advisory density estimate for the failure report: a Gaussian local
/// limit for `f` on the progression, summed over the accepted values
/// `-J*m, ..., J*m`. The drift constant `1/log 3 - 1/log 4 = 0.18889`
/// governs unrarefied progressions; here the rarefaction has already
/// re-centered `f`, so the center comes from the expected digit-sum
/// levels.
fn hit_rate_estimate(spec: &ProgressionSpec) -> f64 {
    let params = &spec.family.params;
    let log2n = digits::log2_of(&spec.n_lo);
    let log3n = digits::log3_of(&spec.n_lo);
    let e2 = 0.5 * log2n - params.nu as f64 / 2.0;
    let e3 = log3n - params.beta as f64 - spec.zeta as f64;
    let center = e2 - e3 + digits::s2(&spec.r2) as f64 - digits::s3(&spec.family.class_rep) as f64;
    let var = 0.25 * (log2n - params.nu as f64)
        + (2.0 / 3.0) * (log3n - params.beta as f64 - spec.zeta as f64);
    if var <= 0.0 {
        return 0.0;
    }
    let sigma = var.sqrt();
    let j_max = params.j_max as i64;
    let mut rate = 0.0;
    for j in -j_max..=j_max {
        let x = (-j * params.m as i64) as f64;
        let z = (x - center) / sigma;
        rate += (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt());
    }
    rate
}

/// Comparison of an enumerated prefix against a local OEIS b-file.
#[derive(Debug, Clone, Serialize)]
pub struct BfileReport {
    /// Entries checked (1-based b-file indexing, offset a(1) = 0).
    pub compared: u64,
    pub file_terms: u64,
    pub enumerated_terms: u64,
    pub mismatch: Option<BfileMismatch>,
}

impl BfileReport {
    pub fn agrees(&self) -> bool {
        self.mismatch.is_none()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BfileMismatch {
    pub index: u64,
    pub file_value: String,
    pub enumerated: String,
}

/// Parses b-file lines `index value`, skipping blanks and `#`
/// comments. Indices must increase by one.
pub fn parse_bfile<R: BufRead>(reader: R) -> Result<Vec<(u64, BigNat)>> {
    let mut entries: Vec<(u64, BigNat)> = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut parts = trimmed.split_whitespace();
        let (Some(idx), Some(value)) = (parts.next(), parts.next()) else {
            return Err(Error::BadBfile {
                line: lineno + 1,
                detail: "expected `index value`".into(),
            });
        };
        let idx: u64 = idx.parse().map_err(|_| Error::BadBfile {
            line: lineno + 1,
            detail: format!("bad index {idx:?}"),
        })?;
        let value = BigNat::parse_bytes(value.as_bytes(), 10).ok_or(Error::BadBfile {
            line: lineno + 1,
            detail: format!("bad value {value:?}"),
        })?;
        if let Some(&(prev, _)) = entries.last() {
            if idx != prev + 1 {
                return Err(Error::BadBfile {
                    line: lineno + 1,
                    detail: format!("index {idx} does not follow {prev}"),
                });
            }
        }
        entries.push((idx, value));
    }
    Ok(entries)
}

/// Diffs the enumerated collision sequence against b-file entries
/// whose values are below `limit`. Positions are matched by rank:
/// the b-file's first index corresponds to the first enumerated term.
pub fn compare_bfile<R: BufRead>(
    reader: R,
    limit: &BigNat,
    threads: usize,
) -> Result<BfileReport> {
    let entries = parse_bfile(reader)?;
    let ours = enumerate_collisions(limit, CollisionKind::Exact, threads)?;
    let first_index = entries.first().map(|&(i, _)| i).unwrap_or(1);
    let mut compared = 0;
    let mut mismatch = None;
    for (pos, (idx, value)) in entries.iter().enumerate() {
        if value >= limit && pos >= ours.len() {
            break;
        }
        match ours.get(pos) {
            Some(record) if &record.n == value => compared += 1,
            Some(record) => {
                mismatch = Some(BfileMismatch {
                    index: *idx,
                    file_value: value.to_str_radix(10),
                    enumerated: record.n.to_str_radix(10),
                });
                break;
            }
            None => {
                if value < limit {
                    mismatch = Some(BfileMismatch {
                        index: *idx,
                        file_value: value.to_str_radix(10),
                        enumerated: "<missing>".into(),
                    });
                }
                break;
            }
        }
    }
    let _ = first_index;
    Ok(BfileReport {
        compared,
        file_terms: entries.len() as u64,
        enumerated_terms: ours.len() as u64,
        mismatch,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructor::make_params_manual;
    use std::io::Cursor;

    fn big(n: u64) -> BigNat {
        BigNat::from(n)
    }

    /// Independent per-n oracle: direct digit sums, no incremental
    /// state.
    fn naive_list(limit: u64, kind: CollisionKind) -> Vec<u64> {
        (0..limit)
            .filter(|&n| {
                kind.matches(digits::digit_sum_u64(n, 2), digits::digit_sum_u64(n, 3))
            })
            .collect()
    }

    #[test]
    fn first_collision_table() {
        let records = enumerate_collisions(&big(37), CollisionKind::Exact, 1).unwrap();
        let ns: Vec<u64> = records.iter().map(|r| r.n.to_u64().unwrap()).collect();
        assert_eq!(ns, vec![0, 1, 6, 7, 10, 11, 12, 13, 18, 19, 21, 36]);
        for r in &records {
            assert!(r.is_valid());
            assert_eq!(r.s2, r.s3);
        }
    }

    #[test]
    fn single_element_range() {
        let records = enumerate_collisions(&big(1), CollisionKind::Exact, 1).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].n, big(0));
    }

    #[test]
    fn limits_beyond_u64_are_rejected() {
        let huge = digits::pow2(70);
        assert!(matches!(
            enumerate_collisions(&huge, CollisionKind::Exact, 1),
            Err(Error::ResourceLimit(_))
        ));
        assert!(matches!(
            count_collisions(&huge, &[big(10)], 1),
            Err(Error::ResourceLimit(_))
        ));
        assert!(matches!(
            enumerate_collisions(&big(10), CollisionKind::Exact, 0),
            Err(Error::InvalidParams(_))
        ));
    }

    #[test]
    fn enumerator_matches_oracle() {
        let limit = 300_000;
        let ours: Vec<u64> = enumerate_collisions(&big(limit), CollisionKind::Exact, 2)
            .unwrap()
            .iter()
            .map(|r| r.n.to_u64().unwrap())
            .collect();
        assert_eq!(ours, naive_list(limit, CollisionKind::Exact));

        let almost: Vec<u64> = enumerate_collisions(&big(limit), CollisionKind::Almost, 2)
            .unwrap()
            .iter()
            .map(|r| r.n.to_u64().unwrap())
            .collect();
        assert_eq!(almost, naive_list(limit, CollisionKind::Almost));
    }

    #[test]
    fn thread_count_invariance() {
        let limit = big(3_000_000);
        let base = enumerate_collisions(&limit, CollisionKind::Exact, 1).unwrap();
        for threads in [2, 4, 8] {
            let other = enumerate_collisions(&limit, CollisionKind::Exact, threads).unwrap();
            assert_eq!(base, other, "threads = {threads}");
        }
    }

    #[test]
    fn tally_matches_fresh_recomputation() {
        let mut tally2 = DigitTally::new(2, 0);
        let mut tally3 = DigitTally::new(3, 0);
        for n in 0u64..200_000 {
            if n % (1 << 16) == 0 {
                assert_eq!(tally2.sum(), digits::digit_sum_u64(n, 2), "n = {n}");
                assert_eq!(tally3.sum(), digits::digit_sum_u64(n, 3), "n = {n}");
            }
            tally2.step();
            tally3.step();
        }
        // Seeding mid-range agrees with stepping from zero.
        let seeded = DigitTally::new(3, 123_456_789);
        assert_eq!(seeded.sum(), digits::digit_sum_u64(123_456_789, 3));
    }

    #[test]
    fn counts_at_checkpoints() {
        let counts = count_collisions(&big(37), &[big(37)], 1).unwrap();
        assert_eq!(counts, vec![(big(37), 12)]);
        let counts = count_collisions(&big(1), &[big(1)], 1).unwrap();
        assert_eq!(counts, vec![(big(1), 1)]);

        let limit = 2_000_000;
        let marks = [big(500_000), big(1_000_000), big(2_000_000)];
        let counts = count_collisions(&big(limit), &marks, 4).unwrap();
        let oracle = naive_list(limit, CollisionKind::Exact);
        for (mark, count) in &counts {
            let mark = mark.to_u64().unwrap();
            let expected = oracle.iter().filter(|&&n| n < mark).count() as u64;
            assert_eq!(*count, expected, "checkpoint {mark}");
        }
        // Monotone in the checkpoint.
        assert!(counts.windows(2).all(|w| w[0].1 <= w[1].1));

        assert!(count_collisions(&big(10), &[big(5), big(5)], 1).is_err());
        assert!(count_collisions(&big(10), &[big(11)], 1).is_err());
    }

    #[test]
    fn pattern_searches() {
        // n = 13 realizes offsets {0, 5, 6, 8, 23} inside a 24-window.
        let offsets: BTreeSet<u64> = [0, 5, 6, 8, 23].into_iter().collect();
        let hits = find_patterns(&big(100), 24, &offsets).unwrap();
        assert!(hits.contains(&big(13)), "hits: {hits:?}");

        // The run (10, 11, 12, 13).
        let run: BTreeSet<u64> = [0, 1, 2, 3].into_iter().collect();
        let hits = find_patterns(&big(100), 4, &run).unwrap();
        assert!(hits.contains(&big(10)));

        // No run of length five anywhere (s3 takes two up-steps while
        // s2 cannot rise twice across five consecutive integers).
        let run5: BTreeSet<u64> = [0, 1, 2, 3, 4].into_iter().collect();
        let hits = find_patterns(&big(1_000_000), 5, &run5).unwrap();
        assert!(hits.is_empty());

        assert!(find_patterns(&big(10), 4, &[4u64].into_iter().collect()).is_err());
        assert!(find_patterns(&big(10), 0, &BTreeSet::new()).is_err());
    }

    #[test]
    fn pattern_window_matches_naive_filter() {
        let window = 6u64;
        let offsets: BTreeSet<u64> = [1, 3].into_iter().collect();
        let limit = 20_000u64;
        let fast = find_patterns(&big(limit), window, &offsets).unwrap();
        let slow: Vec<BigNat> = (0..limit)
            .filter(|&n| {
                (0..window).all(|v| {
                    let zero = digits::digit_sum_u64(n + v, 2) == digits::digit_sum_u64(n + v, 3);
                    zero == offsets.contains(&v)
                })
            })
            .map(BigNat::from)
            .collect();
        assert_eq!(fast, slow);
    }

    #[test]
    fn forge_produces_verified_certificates() {
        let params = make_params_manual(48, 4, 2).unwrap();
        let n_lo = digits::pow2(2000);
        let cert =
            forge_collision(ForgeInput::Params(&params), &n_lo, 20_000, 7, 2).unwrap();
        assert!(cert.verify());
        assert_eq!(cert.record.s2, cert.record.s3);
        assert!(cert.record.n.bits() >= 2000);
        assert!(cert.j.unsigned_abs() <= params.j_max);
        // Replay the trail by hand.
        let mut n = cert.spec.element(&cert.k) + &cert.spec.family.shifts[&cert.j];
        if cert.used_plus_one {
            assert_eq!(&n % big(12), big(9));
            assert_eq!(digits::f_value(&n), 1);
            n += 1u32;
        }
        assert_eq!(n, cert.record.n);
    }

    #[test]
    fn forge_reports_failure_statistics() {
        let params = make_params_manual(48, 4, 2).unwrap();
        let family = ShiftFamily::build(&params, 7, DEFAULT_BUILD_BUDGET).unwrap();
        let spec = ProgressionSpec::new(family, digits::pow2(2000)).unwrap();
        let err = forge_with_spec(&spec, 0, 7, 1).unwrap_err();
        assert!(matches!(err, Error::SearchFailure { attempts: 0, .. }));
    }

    #[test]
    fn forge_is_deterministic_across_threads() {
        let params = make_params_manual(48, 4, 2).unwrap();
        let family = ShiftFamily::build(&params, 11, DEFAULT_BUILD_BUDGET).unwrap();
        let spec = ProgressionSpec::new(family, digits::pow2(2000)).unwrap();
        let a = forge_with_spec(&spec, 50_000, 13, 1).unwrap();
        let b = forge_with_spec(&spec, 50_000, 13, 4).unwrap();
        assert_eq!(a.record.n, b.record.n);
        assert_eq!(a.k, b.k);
    }

    #[test]
    fn empty_interval_is_rejected() {
        let params = make_params_manual(48, 4, 2).unwrap();
        let err = forge_collision(ForgeInput::Params(&params), &big(1000), 100, 7, 1);
        assert!(matches!(err, Err(Error::EmptyInterval)));
    }

    #[test]
    fn bfile_parse_and_compare() {
        let text = "# A-file comment\n1 0\n2 1\n3 6\n4 7\n5 10\n";
        let entries = parse_bfile(Cursor::new(text)).unwrap();
        assert_eq!(entries.len(), 5);
        assert_eq!(entries[4], (5, big(10)));

        let report = compare_bfile(Cursor::new(text), &big(37), 1).unwrap();
        assert!(report.agrees());
        assert_eq!(report.compared, 5);

        let bad = "1 0\n2 2\n";
        let report = compare_bfile(Cursor::new(bad), &big(37), 1).unwrap();
        assert!(!report.agrees());
        let mismatch = report.mismatch.unwrap();
        assert_eq!(mismatch.index, 2);
        assert_eq!(mismatch.file_value, "2");
        assert_eq!(mismatch.enumerated, "1");

        assert!(parse_bfile(Cursor::new("1 0\n3 6\n")).is_err());
        assert!(parse_bfile(Cursor::new("zz\n")).is_err());
    }
}
