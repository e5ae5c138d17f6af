//! Deterministic, two-source and seeded extractors with worst-case oracles.
//!
//! Worst-case distances are maximized over flat sources only. For one-bit
//! extractors the inner maximization over one source is solved exactly by
//! sorting, so only the other source's flats are enumerated.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{mat_vec, rank, Gf2n};
use crate::sources::{binomial, bits_to_index, index_to_bits, subsets};

/// Largest number of flat sources (or flat pairs) an exhaustive sweep visits.
pub const SWEEP_CAP: u128 = 1_000_000;

/// Largest `n` handled by sweeps.
pub const MAX_SWEEP_BITS: usize = 6;

/// Keeps `X_{2i}` for every pair with `X_{2i-1} ≠ X_{2i}`.
pub fn von_neumann(bits: &[u8]) -> Vec<u8> {
    bits.chunks_exact(2)
        .filter(|p| p[0] != p[1])
        .map(|p| p[1])
        .collect()
}

fn same_len(x: &[u8], y: &[u8]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::Shape(format!("length mismatch: {} vs {}", x.len(), y.len())));
    }
    Ok(())
}

pub fn hadamard(x: &[u8], y: &[u8]) -> Result<u8> {
    same_len(x, y)?;
    Ok(x.iter().zip(y).fold(0, |acc, (a, b)| acc ^ (a & b & 1)))
}

/// `x_1 + y_1 + Σ_{i≥2} x_i y_i` mod 2.
pub fn bpp(x: &[u8], y: &[u8]) -> Result<u8> {
    same_len(x, y)?;
    if x.is_empty() {
        return Err(Error::Shape("bpp needs at least one bit".into()));
    }
    Ok((x[0] ^ y[0] ^ hadamard(&x[1..], &y[1..])?) & 1)
}

/// DEOR extractor with `A_i` the multiplication by `α^{i-1}` in GF(2^n).
#[derive(Debug, Clone)]
pub struct Deor {
    n: usize,
    matrices: Vec<Vec<u64>>,
}

impl Deor {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if m == 0 || m > n {
            return Err(Error::Parameter(format!("need 1 <= m <= n, got m = {m}, n = {n}")));
        }
        let field = Gf2n::new(n)?;
        let matrices = (0..m).map(|i| field.mul_matrix(field.pow_alpha(i))).collect();
        Ok(Self { n, matrices })
    }

    pub fn matrices(&self) -> &[Vec<u64>] {
        &self.matrices
    }

    /// Nonempty subsets (as bitmasks over the matrices) whose sum is singular.
    pub fn singular_subset_sums(&self) -> Vec<u64> {
        let k = self.matrices.len();
        (1u64..1 << k)
            .filter(|mask| {
                let sum: Vec<u64> = (0..self.n)
                    .map(|r| {
                        (0..k)
                            .filter(|i| mask >> i & 1 == 1)
                            .fold(0, |acc, i| acc ^ self.matrices[i][r])
                    })
                    .collect();
                rank(&sum) < self.n
            })
            .collect()
    }

    /// Bit `j` of the result (most significant first) is `Had(A_j x, y)`.
    pub fn eval_index(&self, x: u64, y: u64) -> u64 {
        self.matrices.iter().fold(0, |acc, a| {
            (acc << 1) | u64::from((mat_vec(a, x) & y).count_ones() & 1)
        })
    }

    pub fn extract(&self, x: &[u8], y: &[u8]) -> Result<Vec<u8>> {
        same_len(x, y)?;
        if x.len() != self.n {
            return Err(Error::Shape(format!("expected {}-bit inputs", self.n)));
        }
        let out = self.eval_index(bits_to_index(x), bits_to_index(y));
        Ok(index_to_bits(out, self.matrices.len()))
    }
}

pub fn deor(x: &[u8], y: &[u8], m: usize) -> Result<Vec<u8>> {
    Deor::new(x.len(), m)?.extract(x, y)
}

/// `h_s(x)`: the top `l` bits of `s1·x + s2` in GF(2^n).
pub fn universal_hash(n: usize, s1: u64, s2: u64, x: u64, l: usize) -> Result<u64> {
    if l >= n {
        return Err(Error::Parameter(format!("output length {l} must be below n = {n}")));
    }
    let f = Gf2n::new(n)?;
    Ok((f.mul(s1, x) ^ s2) >> (n - l))
}

/// Returns `seed ∘ h_seed(x)`.
pub fn universal_hash_extract(x: &[u8], seed: &[u8], l: usize) -> Result<Vec<u8>> {
    let n = x.len();
    if seed.len() != 2 * n {
        return Err(Error::Shape(format!("seed must have {} bits", 2 * n)));
    }
    let s1 = bits_to_index(&seed[..n]);
    let s2 = bits_to_index(&seed[n..]);
    let h = universal_hash(n, s1, s2, bits_to_index(x), l)?;
    let mut out = seed.to_vec();
    out.extend(index_to_bits(h, l));
    Ok(out)
}

/// `½ Σ |p(x) − q(x)|`.
pub fn statistical_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::Shape("distributions live on different domains".into()));
    }
    Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TwoSourceExtractor {
    Hadamard,
    Bpp,
    Deor { m: usize },
}

impl TwoSourceExtractor {
    pub fn name(&self) -> String {
        match self {
            TwoSourceExtractor::Hadamard => "hadamard".into(),
            TwoSourceExtractor::Bpp => "bpp".into(),
            TwoSourceExtractor::Deor { m } => format!("deor(m={m})"),
        }
    }

    pub fn output_bits(&self) -> usize {
        match self {
            TwoSourceExtractor::Deor { m } => *m,
            _ => 1,
        }
    }

    /// Claimed error for flat `(n, k_x)` and `(n, k_y)` sources.
    pub fn claimed_bound(&self, n: usize, k_x: usize, k_y: usize) -> f64 {
        let (n, kx, ky) = (n as f64, k_x as f64, k_y as f64);
        let e = match self {
            TwoSourceExtractor::Hadamard => (n - kx - ky - 1.0) / 2.0,
            TwoSourceExtractor::Bpp => (n - kx - ky - 3.0) / 2.0,
            TwoSourceExtractor::Deor { m } => (n + *m as f64 - kx - ky - 1.0) / 2.0,
        };
        2f64.powf(e)
    }

    /// Output table indexed by `x · 2^n + y`.
    pub fn table(&self, n: usize) -> Result<Vec<u64>> {
        if n == 0 || n > MAX_SWEEP_BITS {
            return Err(Error::Parameter(format!("tables need 1 <= n <= {MAX_SWEEP_BITS}")));
        }
        let size = 1u64 << n;
        let deor = match self {
            TwoSourceExtractor::Deor { m } => Some(Deor::new(n, *m)?),
            _ => None,
        };
        let mut out = Vec::with_capacity((size * size) as usize);
        for x in 0..size {
            for y in 0..size {
                let v = match (self, &deor) {
                    (_, Some(d)) => d.eval_index(x, y),
                    (TwoSourceExtractor::Hadamard, _) => u64::from((x & y).count_ones() & 1),
                    _ => {
                        let top = 1 << (n - 1);
                        u64::from(((x & top != 0) ^ (y & top != 0)) as u32 ^ ((x & y & !top).count_ones() & 1))
                    }
                };
                out.push(v);
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SweepMode {
    Exhaustive,
    /// Random flat sources drawn with a fixed seed.
    Sampled { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractorReport {
    pub extractor: String,
    pub n: usize,
    pub k_x: usize,
    pub k_y: Option<usize>,
    pub seed_bits: Option<usize>,
    pub output_bits: usize,
    pub measured: f64,
    pub claimed: f64,
    pub pass: bool,
    pub sampled: bool,
    pub flats_examined: u64,
}

fn flats(
    n: usize,
    k: usize,
    mode: SweepMode,
    rng: &mut ChaCha20Rng,
    exhaustive_limit: u128,
) -> Result<Vec<Vec<u64>>> {
    let universe = 1u64 << n;
    let size = 1usize << k;
    match mode {
        SweepMode::Exhaustive => {
            let count = binomial(universe, size as u64);
            if count > exhaustive_limit {
                return Err(Error::EnumerationCap {
                    required: count,
                    cap: exhaustive_limit,
                });
            }
            Ok(subsets(universe, size))
        }
        SweepMode::Sampled { samples, .. } => Ok((0..samples)
            .map(|_| {
                sample(rng, universe as usize, size)
                    .into_iter()
                    .map(|v| v as u64)
                    .collect()
            })
            .collect()),
    }
}

/// Maximum distance from uniform of `Ext(X, Y)` over independent flat
/// `(n, k_x)` and `(n, k_y)` sources.
pub fn worst_case_distance(
    ext: TwoSourceExtractor,
    n: usize,
    k_x: usize,
    k_y: usize,
    mode: SweepMode,
) -> Result<ExtractorReport> {
    if k_x > n || k_y > n {
        return Err(Error::Parameter("min-entropy cannot exceed n".into()));
    }
    let table = ext.table(n)?;
    let size = 1usize << n;
    let m = ext.output_bits();
    let seed = match mode {
        SweepMode::Sampled { seed, .. } => seed,
        SweepMode::Exhaustive => 0,
    };
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let (measured, examined) = if m == 1 {
        // Enumerate the side with fewer flats; optimize the other by sorting.
        let swap = binomial(size as u64, 1 << k_x) < binomial(size as u64, 1 << k_y);
        let (k_enum, k_sort) = if swap { (k_x, k_y) } else { (k_y, k_x) };
        let at = |e: usize, s: usize| if swap { table[e * size + s] } else { table[s * size + e] };
        let enumerated = flats(n, k_enum, mode, &mut rng, SWEEP_CAP)?;
        let kk = 1usize << k_sort;
        let mut worst: f64 = 0.0;
        let mut f = vec![0i64; size];
        for set in &enumerated {
            for (s, fs) in f.iter_mut().enumerate() {
                *fs = set
                    .iter()
                    .map(|&e| if at(e as usize, s) == 0 { 1 } else { -1 })
                    .sum();
            }
            f.sort_unstable();
            let low: i64 = f[..kk].iter().sum();
            let high: i64 = f[size - kk..].iter().sum();
            let best = high.max(-low) as f64;
            worst = worst.max(best / (2.0 * kk as f64 * set.len() as f64));
        }
        (worst, enumerated.len() as u64)
    } else {
        let xs = flats(n, k_x, mode, &mut rng, SWEEP_CAP)?;
        let ys = flats(n, k_y, mode, &mut rng, SWEEP_CAP)?;
        let pairs = xs.len() as u128 * ys.len() as u128;
        if matches!(mode, SweepMode::Exhaustive) && pairs > SWEEP_CAP {
            return Err(Error::EnumerationCap {
                required: pairs,
                cap: SWEEP_CAP,
            });
        }
        let outs = 1usize << m;
        let target = 1.0 / outs as f64;
        let mut worst: f64 = 0.0;
        let mut counts = vec![0u64; outs];
        let mut visit = |x: &[u64], y: &[u64]| {
            counts.iter_mut().for_each(|c| *c = 0);
            for &a in x {
                for &b in y {
                    counts[table[a as usize * size + b as usize] as usize] += 1;
                }
            }
            let total = (x.len() * y.len()) as f64;
            let d = 0.5 * counts.iter().map(|&c| (c as f64 / total - target).abs()).sum::<f64>();
            worst = worst.max(d);
        };
        match mode {
            SweepMode::Exhaustive => {
                for x in &xs {
                    for y in &ys {
                        visit(x, y);
                    }
                }
            }
            SweepMode::Sampled { .. } => {
                for (x, y) in xs.iter().zip(&ys) {
                    visit(x, y);
                }
            }
        }
        let examined = match mode {
            SweepMode::Exhaustive => pairs as u64,
            SweepMode::Sampled { samples, .. } => samples as u64,
        };
        (worst, examined)
    };
    let claimed = ext.claimed_bound(n, k_x, k_y);
    Ok(ExtractorReport {
        extractor: ext.name(),
        n,
        k_x,
        k_y: Some(k_y),
        seed_bits: None,
        output_bits: m,
        measured,
        claimed,
        pass: measured <= claimed + 1e-12,
        sampled: matches!(mode, SweepMode::Sampled { .. }),
        flats_examined: examined,
    })
}

/// Distance of `(S, h_S(X))` from uniform, maximized over flat `(n, k)`
/// sources, against the leftover-hash bound `½·2^{(l−k)/2}`.
pub fn universal_hash_report(n: usize, k: usize, l: usize) -> Result<ExtractorReport> {
    if k > n {
        return Err(Error::Parameter("min-entropy cannot exceed n".into()));
    }
    if n > MAX_SWEEP_BITS {
        return Err(Error::Parameter(format!("sweeps need n <= {MAX_SWEEP_BITS}")));
    }
    let field = Gf2n::new(n)?;
    if l >= n {
        return Err(Error::Parameter(format!("output length {l} must be below n = {n}")));
    }
    let size = 1u64 << n;
    let outs = 1usize << l;
    let mut rng = ChaCha20Rng::seed_from_u64(0);
    let sets = flats(n, k, SweepMode::Exhaustive, &mut rng, SWEEP_CAP)?;
    let seeds = (size * size) as f64;
    let mut worst: f64 = 0.0;
    let mut counts = vec![0u64; outs];
    for set in &sets {
        let mut d = 0.0;
        for s1 in 0..size {
            for s2 in 0..size {
                counts.iter_mut().for_each(|c| *c = 0);
                for &x in set {
                    counts[((field.mul(s1, x) ^ s2) >> (n - l)) as usize] += 1;
                }
                let total = set.len() as f64;
                d += 0.5
                    * counts
                        .iter()
                        .map(|&c| (c as f64 / total - 1.0 / outs as f64).abs())
                        .sum::<f64>();
            }
        }
        worst = worst.max(d / seeds);
    }
    let claimed = 0.5 * 2f64.powf((l as f64 - k as f64) / 2.0);
    Ok(ExtractorReport {
        extractor: "universal_hash".into(),
        n,
        k_x: k,
        k_y: None,
        seed_bits: Some(2 * n),
        output_bits: l,
        measured: worst,
        claimed,
        pass: worst <= claimed + 1e-12,
        sampled: false,
        flats_examined: sets.len() as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn b(s: &str) -> Vec<u8> {
        s.bytes().map(|c| c - b'0').collect()
    }

    #[test]
    fn von_neumann_examples() {
        assert_eq!(von_neumann(&b("01")), b("1"));
        assert_eq!(von_neumann(&b("0011")), b(""));
        assert_eq!(von_neumann(&b("011010")), b("100"));
        assert_eq!(von_neumann(&b("101")), b("0"));
    }

    #[test]
    fn von_neumann_output_is_exactly_uniform() {
        for eps in [0.1f64, 0.25, 0.4] {
            for len in 0..=10usize {
                // mass[L][y] accumulates P(output = y) over inputs with output length L.
                let mut mass = vec![vec![0.0f64; 1 << (len / 2)]; len / 2 + 1];
                for x in 0..1u64 << len {
                    let bits = index_to_bits(x, len);
                    let zeros = bits.iter().filter(|&&v| v == 0).count() as i32;
                    let p = eps.powi(zeros) * (1.0 - eps).powi(len as i32 - zeros);
                    let out = von_neumann(&bits);
                    mass[out.len()][bits_to_index(&out) as usize] += p;
                }
                for (l, row) in mass.iter().enumerate() {
                    let total: f64 = row[..1 << l].iter().sum();
                    for &v in &row[..1 << l] {
                        assert!((v / total - 1.0 / (1u64 << l) as f64).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn hadamard_and_bpp_examples() {
        assert_eq!(hadamard(&b("000"), &b("111")).unwrap(), 0);
        assert_eq!(hadamard(&b("111"), &b("111")).unwrap(), 1);
        assert_eq!(hadamard(&b("101"), &b("110")).unwrap(), 1);
        assert!(hadamard(&b("10"), &b("110")).is_err());
        assert_eq!(bpp(&b("0000"), &b("0000")).unwrap(), 0);
        assert_eq!(bpp(&b("10"), &b("01")).unwrap(), 1);
        assert!(bpp(&[], &[]).is_err());
    }

    #[test]
    fn tables_match_bit_functions() {
        for n in 1..=4 {
            let had = TwoSourceExtractor::Hadamard.table(n).unwrap();
            let bp = TwoSourceExtractor::Bpp.table(n).unwrap();
            for x in 0..1u64 << n {
                for y in 0..1u64 << n {
                    let (xb, yb) = (index_to_bits(x, n), index_to_bits(y, n));
                    let i = (x * (1 << n) + y) as usize;
                    assert_eq!(had[i], u64::from(hadamard(&xb, &yb).unwrap()));
                    assert_eq!(bp[i], u64::from(bpp(&xb, &yb).unwrap()));
                }
            }
        }
    }

    #[test]
    fn deor_examples() {
        for n in 1..=6 {
            for x in 0..1u64 << n {
                for y in 0..1u64 << n {
                    let (xb, yb) = (index_to_bits(x, n), index_to_bits(y, n));
                    assert_eq!(deor(&xb, &yb, 1).unwrap(), vec![hadamard(&xb, &yb).unwrap()]);
                }
            }
            assert_eq!(deor(&vec![0; n], &vec![1; n], n).unwrap(), vec![0; n]);
        }
        assert!(deor(&b("101"), &b("011"), 4).is_err());
    }

    #[test]
    fn deor_subset_sums_have_full_rank() {
        for n in 1..=6 {
            let d = Deor::new(n, n).unwrap();
            assert_eq!(d.singular_subset_sums(), Vec::<u64>::new(), "n={n}");
        }
    }

    #[test]
    fn universal_family_is_pairwise_uniform() {
        for (n, l) in [(3, 1), (3, 2), (4, 1), (4, 3), (2, 1)] {
            let size = 1u64 << n;
            for w1 in 0..size {
                for w2 in 0..size {
                    if w1 == w2 {
                        continue;
                    }
                    let mut hits = vec![0u64; 1 << (2 * l)];
                    for s1 in 0..size {
                        for s2 in 0..size {
                            let h1 = universal_hash(n, s1, s2, w1, l).unwrap();
                            let h2 = universal_hash(n, s1, s2, w2, l).unwrap();
                            hits[(h1 << l | h2) as usize] += 1;
                        }
                    }
                    let expect = size * size >> (2 * l);
                    assert!(hits.iter().all(|&h| h == expect), "n={n} l={l}");
                }
            }
        }
    }

    #[test]
    fn universal_hash_extract_layout() {
        let seed = vec![0; 6];
        assert_eq!(universal_hash_extract(&b("101"), &seed, 2).unwrap(), vec![0; 8]);
        assert_eq!(universal_hash_extract(&b("000"), &b("110101"), 1).unwrap(), b("1101011"));
        assert!(universal_hash_extract(&b("101"), &seed, 3).is_err());
        assert!(universal_hash_extract(&b("101"), &seed[..5], 1).is_err());
    }

    #[test]
    fn universal_hash_report_n3_k2() {
        let r = universal_hash_report(3, 2, 1).unwrap();
        assert_eq!(r.flats_examined, 70);
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn statistical_distance_examples() {
        assert_eq!(statistical_distance(&[0.3, 0.7], &[0.3, 0.7]).unwrap(), 0.0);
        assert_eq!(statistical_distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
        assert_eq!(statistical_distance(&[0.75, 0.25], &[0.5, 0.5]).unwrap(), 0.25);
        assert!(statistical_distance(&[1.0], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn hadamard_and_bpp_n3_k2() {
        let h = worst_case_distance(TwoSourceExtractor::Hadamard, 3, 2, 2, SweepMode::Exhaustive).unwrap();
        assert_eq!(h.flats_examined, 70);
        assert!(h.pass && h.measured <= 0.5, "{h:?}");
        let p = worst_case_distance(TwoSourceExtractor::Bpp, 3, 2, 2, SweepMode::Exhaustive).unwrap();
        assert!(p.pass && p.measured <= 0.25, "{p:?}");
    }

    #[test]
    fn sorting_matches_pair_sweep() {
        // Brute force over all 70 × 70 flat pairs.
        let table = TwoSourceExtractor::Hadamard.table(3).unwrap();
        let sets = subsets(8, 4);
        let mut worst: f64 = 0.0;
        for x in &sets {
            for y in &sets {
                let ones: u64 = x
                    .iter()
                    .flat_map(|&a| y.iter().map(move |&b| (a, b)))
                    .map(|(a, b)| table[(a * 8 + b) as usize])
                    .sum();
                worst = worst.max((ones as f64 / 16.0 - 0.5).abs());
            }
        }
        let r = worst_case_distance(TwoSourceExtractor::Hadamard, 3, 2, 2, SweepMode::Exhaustive).unwrap();
        assert_eq!(r.measured, worst);
    }

    #[test]
    fn hadamard_fails_on_uniform_sources() {
        for n in 1..=4 {
            let r = worst_case_distance(TwoSourceExtractor::Hadamard, n, n, n, SweepMode::Exhaustive).unwrap();
            assert_eq!(r.measured, 2f64.powi(-(n as i32) - 1));
        }
    }

    #[test]
    fn bounds_hold_for_all_small_parameters() {
        for n in 1..=4 {
            for kx in 0..=n {
                for ky in 0..=n {
                    for ext in [TwoSourceExtractor::Hadamard, TwoSourceExtractor::Bpp] {
                        let r = worst_case_distance(ext, n, kx, ky, SweepMode::Exhaustive).unwrap();
                        assert!(r.pass, "{r:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn bpp_is_unbiased_when_either_source_is_uniform() {
        for n in 1..=4 {
            for k in 0..=n {
                for (kx, ky) in [(n, k), (k, n)] {
                    let r = worst_case_distance(TwoSourceExtractor::Bpp, n, kx, ky, SweepMode::Exhaustive).unwrap();
                    assert_eq!(r.measured, 0.0, "n={n} kx={kx} ky={ky}");
                }
            }
        }
    }

    #[test]
    fn deor_bound_n3() {
        for m in 1..=3 {
            for kx in 0..=3 {
                for ky in 0..=3 {
                    let r = worst_case_distance(TwoSourceExtractor::Deor { m }, 3, kx, ky, SweepMode::Exhaustive).unwrap();
                    assert!(r.pass, "{r:?}");
                }
            }
        }
    }

    #[test]
    fn sampled_sweep_is_labelled_and_reproducible() {
        let mode = SweepMode::Sampled { samples: 300, seed: 5 };
        let a = worst_case_distance(TwoSourceExtractor::Hadamard, 5, 3, 3, mode).unwrap();
        let b = worst_case_distance(TwoSourceExtractor::Hadamard, 5, 3, 3, mode).unwrap();
        assert!(a.sampled && a.pass);
        assert_eq!(a, b);
        assert!(matches!(
            worst_case_distance(TwoSourceExtractor::Hadamard, 5, 3, 3, SweepMode::Exhaustive),
            Err(Error::EnumerationCap { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn deor_sampled_sweeps_respect_bound(
            m in 1usize..=2, kx in 2usize..=4, ky in 2usize..=4, seed in any::<u64>()
        ) {
            let mode = SweepMode::Sampled { samples: 200, seed };
            let r = worst_case_distance(TwoSourceExtractor::Deor { m }, 4, kx, ky, mode).unwrap();
            prop_assert!(r.pass, "{:?}", r);
        }

        #[test]
        fn von_neumann_output_length(bits in prop::collection::vec(0u8..=1, 0..64)) {
            let unequal = bits.chunks_exact(2).filter(|p| p[0] != p[1]).count();
            prop_assert_eq!(von_neumann(&bits).len(), unequal);
        }

        #[test]
        fn statistical_distance_is_symmetric(
            raw in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 1..16)
        ) {
            let (p, q): (Vec<f64>, Vec<f64>) = raw.into_iter().unzip();
            let d1 = statistical_distance(&p, &q).unwrap();
            let d2 = statistical_distance(&q, &p).unwrap();
            prop_assert_eq!(d1, d2);
        }
    }
}
