//! Empirical and exact verification of the probabilistic machinery.
//!
//! The asymptotic statements behind the construction (concentration of
//! `f` along the rarefied progression, the fair share of each residue
//! class mod m, tail bounds) involve unspecified constants, so they
//! are checked here as reproducible experiments: seeded Monte-Carlo
//! sampling against configurable thresholds, plus exact identities
//! (orthogonality, Hoeffding via binomial sums) where desk-scale
//! ranges allow full evaluation.
//!
//! Sampling loops parallelize over independent RNG streams derived
//! from the master seed by counter-mode splitting; reductions are
//! commutative sums, so results are identical for every thread count.

use std::collections::BTreeMap;

use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::collider::DigitTally;
use crate::constructor::ProgressionSpec;
use crate::digits::{self, BigNat};
use crate::error::{Error, Result};

/// Samples per RNG stream; the stream index is the counter.
const SAMPLE_CHUNK: u64 = 1024;

fn pool(threads: usize) -> Result<rayon::ThreadPool> {
    if threads == 0 {
        return Err(Error::InvalidParams("threads must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidParams(format!("thread pool: {e}")))
}

/// Histogram of `f` along the rarefied progression.
#[derive(Debug, Clone, Serialize)]
pub struct ConcentrationReport {
    pub samples: u64,
    /// Observed `f` values and their multiplicities.
    pub histogram: BTreeMap<i64, u64>,
    /// Fraction of samples with `|f| <= J*m`.
    pub inside_fraction: f64,
    /// Expected binary digit-sum level `E2 = log2(N)/2 - nu/2`.
    pub e2: f64,
    /// Expected ternary digit-sum level `E3 = log3(N) - beta - zeta`.
    pub e3: f64,
    pub jm: u64,
    pub mean: f64,
    pub std_dev: f64,
    pub zeta: u64,
    pub zeta_clamped: bool,
}

/// Draws `samples` uniform elements of the progression and histograms
/// `f`. Bit-reproducible for a fixed seed, regardless of threads.
pub fn sample_concentration(
    spec: &ProgressionSpec,
    samples: u64,
    seed: u64,
    threads: usize,
) -> Result<ConcentrationReport> {
    if samples < 1 {
        return Err(Error::Precondition("samples must be at least 1".into()));
    }
    let histogram = sample_f_histogram(spec, samples, seed, threads)?;
    let params = &spec.family.params;
    let jm = params.j_max * params.m;
    let inside: u64 = histogram
        .iter()
        .filter(|(&v, _)| v.unsigned_abs() <= jm)
        .map(|(_, &c)| c)
        .sum();
    let total: u64 = histogram.values().sum();
    debug_assert_eq!(total, samples);
    let mean = histogram
        .iter()
        .map(|(&v, &c)| v as f64 * c as f64)
        .sum::<f64>()
        / samples as f64;
    let var = histogram
        .iter()
        .map(|(&v, &c)| (v as f64 - mean).powi(2) * c as f64)
        .sum::<f64>()
        / samples as f64;
    let log2n = digits::log2_of(&spec.n_lo);
    let log3n = digits::log3_of(&spec.n_lo);
    Ok(ConcentrationReport {
        samples,
        histogram,
        inside_fraction: inside as f64 / samples as f64,
        e2: 0.5 * log2n - params.nu as f64 / 2.0,
        e3: log3n - params.beta as f64 - spec.zeta as f64,
        jm,
        mean,
        std_dev: var.sqrt(),
        zeta: spec.zeta,
        zeta_clamped: spec.zeta_clamped,
    })
}

fn sample_f_histogram(
    spec: &ProgressionSpec,
    samples: u64,
    seed: u64,
    threads: usize,
) -> Result<BTreeMap<i64, u64>> {
    let pool = pool(threads)?;
    let chunks = samples.div_ceil(SAMPLE_CHUNK);
    let partials: Vec<BTreeMap<i64, u64>> = pool.install(|| {
        (0..chunks)
            .into_par_iter()
            .map(|chunk| {
                let mut rng = ChaCha12Rng::seed_from_u64(seed);
                rng.set_stream(chunk + 1);
                let in_chunk = SAMPLE_CHUNK.min(samples - chunk * SAMPLE_CHUNK);
                let mut hist = BTreeMap::new();
                for _ in 0..in_chunk {
                    let k = spec.sample_k(&mut rng);
                    *hist.entry(spec.f_at(&k)).or_insert(0u64) += 1;
                }
                hist
            })
            .collect()
    });
    let mut histogram = BTreeMap::new();
    for partial in partials {
        for (v, c) in partial {
            *histogram.entry(v).or_insert(0) += c;
        }
    }
    Ok(histogram)
}

/// Observed share of progression elements with `f(n) = 0 mod m`.
#[derive(Debug, Clone, Serialize)]
pub struct FairShareReport {
    pub samples: u64,
    pub hits: u64,
    pub ratio: f64,
    pub expected: f64,
    pub modulus: u64,
}

/// Estimates the density of `{n in A'' : f(n) = 0 mod m}` by uniform
/// sampling; the heuristic answer is `1/m`.
pub fn fair_share(
    spec: &ProgressionSpec,
    m: u64,
    samples: u64,
    seed: u64,
    threads: usize,
) -> Result<FairShareReport> {
    if m < 1 {
        return Err(Error::Precondition("modulus must be at least 1".into()));
    }
    if samples < 1 {
        return Err(Error::Precondition("samples must be at least 1".into()));
    }
    let histogram = sample_f_histogram(spec, samples, seed, threads)?;
    let hits: u64 = histogram
        .iter()
        .filter(|(&v, _)| v.rem_euclid(m as i64) == 0)
        .map(|(_, &c)| c)
        .sum();
    Ok(FairShareReport {
        samples,
        hits,
        ratio: hits as f64 / samples as f64,
        expected: 1.0 / m as f64,
        modulus: m,
    })
}

/// Direct class count vs. its character-sum reconstruction.
#[derive(Debug, Clone, Serialize)]
pub struct OrthogonalityCheck {
    pub interval_len: u64,
    pub p_direct: u64,
    pub p_reconstructed: f64,
    pub difference: f64,
}

/// Counts `k in [i_lo, i_hi)` with
/// `s2(b2 + modulus3*k) - s3(modulus2*k) = t mod m` directly, and
/// reconstructs the same count as
/// `|I|/m + (1/m) sum_{0<b<m} e(-bt/m) S0(b/m)` with the exponential
/// sum `S0` evaluated exactly. The two agree up to floating error.
pub fn exp_sum_orthogonality(
    class_rep: &BigNat,
    modulus2: &BigNat,
    modulus3: &BigNat,
    i_lo: u64,
    i_hi: u64,
    m: u64,
    t: i64,
) -> Result<OrthogonalityCheck> {
    if m < 1 {
        return Err(Error::Precondition("modulus must be at least 1".into()));
    }
    if i_hi < i_lo {
        return Err(Error::Precondition("require i_lo <= i_hi".into()));
    }
    let len = i_hi - i_lo;
    if len > 1_000_000 {
        return Err(Error::ResourceLimit(
            "exact summation is limited to intervals of length <= 1e6".into(),
        ));
    }
    let b2 = class_rep / modulus2;
    // Classes of s2 - s3 mod m, filled with running values so each
    // step is one addition per base instead of a multiplication.
    let mut class_counts = vec![0u64; m as usize];
    let mut v2 = &b2 + modulus3 * BigNat::from(i_lo);
    let mut v3 = modulus2 * BigNat::from(i_lo);
    for _ in i_lo..i_hi {
        let diff = digits::s2(&v2) as i64 - digits::s3(&v3) as i64;
        class_counts[diff.rem_euclid(m as i64) as usize] += 1;
        v2 += modulus3;
        v3 += modulus2;
    }
    let t_class = t.rem_euclid(m as i64) as usize;
    let p_direct = class_counts[t_class];

    // S0(b/m) = sum_tau counts[tau] e(b tau / m); the b = 0 term is
    // |I|/m.
    let mut recon = len as f64 / m as f64;
    for b in 1..m {
        let mut s0 = num_complex::Complex64::new(0.0, 0.0);
        for (tau, &count) in class_counts.iter().enumerate() {
            let phase = std::f64::consts::TAU * (b as f64 * tau as f64 / m as f64);
            s0 += num_complex::Complex64::from_polar(count as f64, phase);
        }
        let back = std::f64::consts::TAU * (b as f64 * t_class as f64 / m as f64);
        recon += (num_complex::Complex64::from_polar(1.0, -back) * s0).re / m as f64;
    }
    Ok(OrthogonalityCheck {
        interval_len: len,
        p_direct,
        p_reconstructed: recon,
        difference: (p_direct as f64 - recon).abs(),
    })
}

/// Exact binomial tail mass vs. the Hoeffding bound.
#[derive(Debug, Clone, Serialize)]
pub struct HoeffdingCheck {
    pub t_len: u32,
    pub threshold: f64,
    /// `2^-T * #{n < 2^T : |s2(n) - T/2| >= t}` as an exact fraction.
    pub empirical: String,
    pub empirical_float: f64,
    /// `2 exp(-2 t^2 / T)`.
    pub bound: f64,
    pub holds: bool,
}

/// Compares the exact tail of the binary digit-sum distribution on
/// `[0, 2^T)` with the sub-Gaussian bound `2 exp(-2t^2/T)`.
pub fn hoeffding_tail(t_len: u32, threshold: f64) -> Result<HoeffdingCheck> {
    if !(1..=40).contains(&t_len) {
        return Err(Error::Precondition(format!(
            "exact binomial summation requires 1 <= T <= 40, got {t_len}"
        )));
    }
    if threshold < 0.0 {
        return Err(Error::Precondition("threshold must be nonnegative".into()));
    }
    // Binomial row C(T, k) fits u128 comfortably for T <= 40.
    let mut coeff: u128 = 1;
    let mut tail: u128 = 0;
    let half = t_len as f64 / 2.0;
    for k in 0..=t_len {
        if (k as f64 - half).abs() >= threshold {
            tail += coeff;
        }
        coeff = coeff * (t_len - k) as u128 / (k + 1) as u128;
    }
    let denom = 1u128 << t_len;
    let empirical_float = tail as f64 / denom as f64;
    let bound = 2.0 * (-2.0 * threshold * threshold / t_len as f64).exp();
    Ok(HoeffdingCheck {
        t_len,
        threshold,
        // Unreduced, over the natural denominator 2^T.
        empirical: format!("{tail}/{denom}"),
        empirical_float,
        bound,
        holds: empirical_float <= bound,
    })
}

/// Joint residue counts of `(s2(n) mod m1, s3(n) mod m2)`.
#[derive(Debug, Clone, Serialize)]
pub struct GelfondReport {
    pub limit: u64,
    pub m1: u64,
    pub m2: u64,
    /// `counts[r1][r2]` over all `n < limit`.
    pub counts: Vec<Vec<u64>>,
    /// Uniform target `limit / (m1 m2)`.
    pub expected: f64,
    pub max_rel_deviation: f64,
    /// Set when `gcd(m2, 2) != 1`: `s3(n) = n mod 2`, so even `m2`
    /// cannot equidistribute. Counts are still reported.
    pub condition_violated: bool,
}

/// Exact joint class counts of the two digit sums below `limit`.
pub fn gelfond_counts(limit: &BigNat, m1: u64, m2: u64, threads: usize) -> Result<GelfondReport> {
    if m1 < 1 || m2 < 1 {
        return Err(Error::Precondition("moduli must be at least 1".into()));
    }
    let limit = limit
        .to_u64()
        .filter(|&l| l <= 1_000_000_000)
        .ok_or_else(|| Error::ResourceLimit("gelfond counts require limit <= 1e9".into()))?;
    let pool = pool(threads)?;
    let chunk = crate::collider::CHUNK_SIZE;
    let starts: Vec<u64> = (0..limit).step_by(chunk as usize).collect();
    let partials: Vec<Vec<u64>> = pool.install(|| {
        starts
            .par_iter()
            .map(|&lo| {
                let hi = (lo + chunk).min(limit);
                let mut counts = vec![0u64; (m1 * m2) as usize];
                let mut tally2 = DigitTally::new(2, lo);
                let mut tally3 = DigitTally::new(3, lo);
                for _ in lo..hi {
                    let r1 = tally2.sum() % m1;
                    let r2 = tally3.sum() % m2;
                    counts[(r1 * m2 + r2) as usize] += 1;
                    tally2.step();
                    tally3.step();
                }
                counts
            })
            .collect()
    });
    let mut flat = vec![0u64; (m1 * m2) as usize];
    for partial in partials {
        for (t, p) in flat.iter_mut().zip(partial) {
            *t += p;
        }
    }
    let expected = limit as f64 / (m1 * m2) as f64;
    let max_rel_deviation = flat
        .iter()
        .map(|&c| (c as f64 - expected).abs() / expected)
        .fold(0.0, f64::max);
    let counts = flat.chunks(m2 as usize).map(|row| row.to_vec()).collect();
    Ok(GelfondReport {
        limit,
        m1,
        m2,
        counts,
        expected,
        max_rel_deviation,
        condition_violated: m2.is_multiple_of(2),
    })
}

/// Least-squares fit of `log count` against `log N`.
#[derive(Debug, Clone, Serialize)]
pub struct FitResult {
    /// The fitted points `(ln N, ln count)`.
    pub points: Vec<(f64, f64)>,
    /// Empirical density exponent.
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Fits `count ~ c * N^eta` through checkpoints with positive counts.
pub fn fit_exponent(checkpoints: &[(BigNat, u64)]) -> Result<FitResult> {
    let points: Vec<(f64, f64)> = checkpoints
        .iter()
        .filter(|(_, count)| *count > 0)
        .map(|(n, count)| (digits::ln_of(n), (*count as f64).ln()))
        .collect();
    if points.len() < 2 {
        return Err(Error::DegenerateFit(
            "need at least two checkpoints with positive counts".into(),
        ));
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit(
            "checkpoints share a single N value".into(),
        ));
    }
    let sxy: f64 = points
        .iter()
        .map(|p| (p.0 - mean_x) * (p.1 - mean_y))
        .sum();
    let syy: f64 = points.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(FitResult {
        points,
        slope,
        intercept,
        r_squared,
    })
}
