//! Weak random sources: models, samplers and exhaustive checkers.
//!
//! Bit strings are `Vec<u8>` with entries 0/1. Explicit distributions are
//! indexed by the integer value of the string, bit 1 most significant.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{Direction, LinearProgram, LpOutcome, Relation};

/// Largest string length stored densely.
pub const MAX_EXPLICIT_BITS: usize = 20;

/// Cap on the number of flats enumerated by [`flat_decomposition`].
pub const FLAT_ENUMERATION_CAP: u128 = 200_000;

pub fn bits_to_index(bits: &[u8]) -> u64 {
    bits.iter().fold(0, |acc, &b| (acc << 1) | u64::from(b & 1))
}

pub fn index_to_bits(index: u64, n: usize) -> Vec<u8> {
    (0..n).rev().map(|i| ((index >> i) & 1) as u8).collect()
}

/// A probability table over `n`-bit strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Distribution {
    n: usize,
    probs: Vec<f64>,
}

impl TryFrom<Vec<f64>> for Distribution {
    type Error = Error;
    fn try_from(probs: Vec<f64>) -> Result<Self> {
        Distribution::new(probs)
    }
}

impl From<Distribution> for Vec<f64> {
    fn from(d: Distribution) -> Self {
        d.probs
    }
}

impl Distribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() || !probs.len().is_power_of_two() {
            return Err(Error::Shape("distribution length must be a power of two".into()));
        }
        let n = probs.len().trailing_zeros() as usize;
        if n > MAX_EXPLICIT_BITS {
            return Err(Error::Shape(format!("explicit distributions need n <= {MAX_EXPLICIT_BITS}")));
        }
        let total: f64 = probs.iter().sum();
        if probs.iter().any(|&p| p < -1e-12 || !p.is_finite()) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::Parameter("not a probability distribution".into()));
        }
        Ok(Self { n, probs })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(vec![1.0 / (1u64 << n) as f64; 1 << n])
    }

    /// Uniform over `support`; duplicates are rejected.
    pub fn flat(n: usize, support: &[u64]) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::Parameter("flat source needs a nonempty support".into()));
        }
        if n > MAX_EXPLICIT_BITS {
            return Err(Error::Shape(format!("explicit distributions need n <= {MAX_EXPLICIT_BITS}")));
        }
        let mut probs = vec![0.0; 1 << n];
        let w = 1.0 / support.len() as f64;
        for &s in support {
            let slot = probs
                .get_mut(s as usize)
                .ok_or_else(|| Error::Shape(format!("{s} is not an {n}-bit string")))?;
            if *slot != 0.0 {
                return Err(Error::Parameter(format!("duplicate support element {s}")));
            }
            *slot = w;
        }
        Self::new(probs)
    }

    /// Independent bits with `P(bit = 0) = p0`.
    pub fn iid(n: usize, p0: f64) -> Result<Self> {
        let probs = (0..1u64 << n)
            .map(|x| {
                let ones = x.count_ones() as i32;
                (1.0 - p0).powi(ones) * p0.powi(n as i32 - ones)
            })
            .collect();
        Self::new(probs)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn support(&self) -> Vec<u64> {
        (0..self.probs.len() as u64)
            .filter(|&x| self.probs[x as usize] > 0.0)
            .collect()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let r: f64 = rng.gen();
        let mut acc = 0.0;
        for (x, &p) in self.probs.iter().enumerate() {
            acc += p;
            if r < acc {
                return x as u64;
            }
        }
        // Rounding left a sliver of mass at the top; return the last supported string.
        self.probs.iter().rposition(|&p| p > 0.0).unwrap_or(0) as u64
    }
}

/// `-log2 max_x P(x)`.
pub fn min_entropy(d: &Distribution) -> f64 {
    let pmax = d.probs.iter().cloned().fold(0.0, f64::max);
    -pmax.log2()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SvReport {
    pub passes: bool,
    /// Largest `|P(X_i = 0 | prefix) - 1/2|` over positive-probability prefixes.
    pub worst_bias: f64,
}

/// Checks every conditional bit probability against the band `[1/2 - ε, 1/2 + ε]`.
pub fn sv_check(d: &Distribution, epsilon: f64) -> SvReport {
    // levels[i][prefix] is the mass of strings starting with the i-bit prefix.
    let mut levels = vec![d.probs.clone()];
    for _ in 0..d.n {
        let last = levels.last().expect("nonempty");
        let up: Vec<f64> = last.chunks(2).map(|c| c[0] + c[1]).collect();
        levels.push(up);
    }
    levels.reverse();
    let mut worst: f64 = 0.0;
    for i in 0..d.n {
        for (prefix, &mass) in levels[i].iter().enumerate() {
            if mass <= 1e-15 {
                continue;
            }
            let p0 = levels[i + 1][2 * prefix] / mass;
            worst = worst.max((p0 - 0.5).abs());
        }
    }
    SvReport {
        passes: worst <= epsilon + 1e-12,
        worst_bias: worst,
    }
}

/// Adversarial SV bias: maps the history to the desired `P(next bit = 0)`,
/// which the sampler clamps into the allowed band.
pub type BiasProgram = dyn Fn(&[u8]) -> f64 + Send + Sync;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SourceModel {
    /// Independent bits with `P(X_i = 0) = epsilon`.
    VonNeumann { epsilon: f64 },
    /// Santha-Vazirani source with conditional biases bounded by `epsilon`.
    Sv { epsilon: f64 },
    /// Consecutive `n`-bit blocks, each with conditional min-entropy at least `k`.
    Block { n: usize, k: usize },
    MinEntropy { n: usize, k: usize },
    Flat { n: usize, support: Vec<u64> },
    Explicit { distribution: Distribution },
}

impl SourceModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            SourceModel::VonNeumann { epsilon } => {
                if !(0.0..=1.0).contains(epsilon) {
                    return Err(Error::Parameter("von Neumann bias must lie in [0, 1]".into()));
                }
            }
            SourceModel::Sv { epsilon } => {
                if !(0.0..=0.5).contains(epsilon) {
                    return Err(Error::Parameter("SV parameter must lie in [0, 1/2]".into()));
                }
            }
            SourceModel::Block { n, k } | SourceModel::MinEntropy { n, k } => {
                if *n == 0 || k > n || *n > 64 {
                    return Err(Error::Parameter("need 0 <= k <= n and 1 <= n <= 64".into()));
                }
            }
            SourceModel::Flat { n, support } => {
                Distribution::flat(*n, support)?;
            }
            SourceModel::Explicit { .. } => {}
        }
        Ok(())
    }

    /// Honest sample of `length` bits.
    ///
    /// Block sources need a multiple of `n`; fixed-width models need exactly `n`.
    pub fn sample<R: Rng + ?Sized>(&self, length: usize, rng: &mut R) -> Result<Vec<u8>> {
        self.validate()?;
        let width = |n: usize| {
            if length != n {
                Err(Error::Shape(format!("this source emits exactly {n} bits")))
            } else {
                Ok(())
            }
        };
        match self {
            SourceModel::VonNeumann { epsilon } => {
                Ok((0..length).map(|_| u8::from(!rng.gen_bool(*epsilon))).collect())
            }
            SourceModel::Sv { epsilon } => {
                Ok(sample_sv(*epsilon, length, rng, &|_: &[u8]| f64::NAN))
            }
            SourceModel::Block { n, .. } => {
                if length % n != 0 {
                    return Err(Error::Shape(format!("block source emits multiples of {n} bits")));
                }
                Ok((0..length).map(|_| rng.gen_range(0..=1u8)).collect())
            }
            SourceModel::MinEntropy { n, .. } => {
                width(*n)?;
                Ok((0..length).map(|_| rng.gen_range(0..=1u8)).collect())
            }
            SourceModel::Flat { n, support } => {
                width(*n)?;
                let x = support[rng.gen_range(0..support.len())];
                Ok(index_to_bits(x, *n))
            }
            SourceModel::Explicit { distribution } => {
                width(distribution.n)?;
                Ok(index_to_bits(distribution.sample(rng), distribution.n))
            }
        }
    }
}

/// SV sampler. When the program returns NaN the conditional bias is drawn
/// uniformly from the band; otherwise the program's value is clamped into it.
pub fn sample_sv<R: Rng + ?Sized>(
    epsilon: f64,
    length: usize,
    rng: &mut R,
    program: &BiasProgram,
) -> Vec<u8> {
    let mut out = Vec::with_capacity(length);
    for _ in 0..length {
        let p0 = sv_conditional(epsilon, &out, rng, program);
        let bit = u8::from(rng.gen::<f64>() >= p0);
        out.push(bit);
    }
    out
}

fn sv_conditional<R: Rng + ?Sized>(epsilon: f64, history: &[u8], rng: &mut R, program: &BiasProgram) -> f64 {
    let want = program(history);
    if want.is_nan() {
        if epsilon == 0.0 {
            0.5
        } else {
            rng.gen_range(0.5 - epsilon..=0.5 + epsilon)
        }
    } else {
        want.clamp(0.5 - epsilon, 0.5 + epsilon)
    }
}

/// Block sampler whose `i`-th block is uniform on `subsets[i % len]`, each a
/// flat set of `2^k` strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatBlockAdversary {
    pub n: usize,
    pub k: usize,
    pub subsets: Vec<Vec<u64>>,
}

impl FlatBlockAdversary {
    pub fn new(n: usize, k: usize, subsets: Vec<Vec<u64>>) -> Result<Self> {
        if subsets.is_empty() || k > n || n > 63 {
            return Err(Error::Parameter("need at least one subset and k <= n < 64".into()));
        }
        for s in &subsets {
            let mut sorted = s.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != 1 << k || sorted.iter().any(|&x| x >= 1 << n) {
                return Err(Error::Parameter(format!(
                    "each designated subset must hold 2^{k} distinct {n}-bit strings"
                )));
            }
        }
        Ok(Self { n, k, subsets })
    }

    pub fn block<R: Rng + ?Sized>(&self, index: usize, rng: &mut R) -> u64 {
        let s = &self.subsets[index % self.subsets.len()];
        s[rng.gen_range(0..s.len())]
    }

    pub fn sample<R: Rng + ?Sized>(&self, blocks: usize, rng: &mut R) -> Vec<u8> {
        (0..blocks)
            .flat_map(|i| index_to_bits(self.block(i, rng), self.n))
            .collect()
    }
}

pub(crate) fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// All `size`-subsets of `0..universe` in lexicographic order.
pub(crate) fn subsets(universe: u64, size: usize) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    let mut cur: Vec<u64> = (0..size as u64).collect();
    if size as u64 > universe {
        return out;
    }
    loop {
        out.push(cur.clone());
        let mut i = size;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < universe - (size - i) as u64 {
                cur[i] += 1;
                for j in i + 1..size {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
        if size == 0 {
            return out;
        }
    }
}

/// Writes an `(n, k)` distribution as a convex combination of flat sources on
/// `2^k` strings.
pub fn flat_decomposition(d: &Distribution, k: usize) -> Result<Vec<(Vec<u64>, f64)>> {
    let n = d.n;
    if k > n {
        return Err(Error::Parameter("k exceeds n".into()));
    }
    if min_entropy(d) < k as f64 - 1e-9 {
        return Err(Error::Infeasible(format!(
            "min-entropy {:.6} is below k = {k}",
            min_entropy(d)
        )));
    }
    let count = binomial(1 << n, 1 << k);
    if count > FLAT_ENUMERATION_CAP {
        return Err(Error::EnumerationCap {
            required: count,
            cap: FLAT_ENUMERATION_CAP,
        });
    }
    let flats = subsets(1 << n, 1 << k);
    let w = 1.0 / (1u64 << k) as f64;
    let mut lp = LinearProgram::<f64>::new(flats.len(), Direction::Minimize);
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); 1 << n];
    for (f, set) in flats.iter().enumerate() {
        for &x in set {
            rows[x as usize].push((f, w));
        }
    }
    for (x, coeffs) in rows.into_iter().enumerate() {
        lp.add_constraint(coeffs, Relation::Eq, d.probs[x]);
    }
    lp.add_constraint((0..flats.len()).map(|f| (f, 1.0)).collect(), Relation::Eq, 1.0);
    match lp.solve()? {
        LpOutcome::Optimal { point, .. } => Ok(flats
            .into_iter()
            .zip(point)
            .filter(|(_, v)| *v > 1e-12)
            .collect()),
        _ => Err(Error::Infeasible("no flat decomposition found".into())),
    }
}

/// Flat source on `n` bits (n even) in which no 2-bit pair equals `11`.
///
/// Under the single-device input map `(r1, r2) -> (r1, r2, r1 ⊕ r2 ⊕ 1)` the
/// pattern `11` is the only one producing the GHZ input `111`, so every
/// remaining input can be won by a fixed strategy.
pub fn ghz_blocking_source(n: usize) -> Result<SourceModel> {
    if n % 2 != 0 || n == 0 || n > MAX_EXPLICIT_BITS {
        return Err(Error::Parameter("need an even n between 2 and 20".into()));
    }
    let support = (0..1u64 << n)
        .filter(|&x| (0..n / 2).all(|p| (x >> (2 * p)) & 0b11 != 0b11))
        .collect();
    Ok(SourceModel::Flat { n, support })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn min_entropy_examples() {
        assert_eq!(min_entropy(&Distribution::uniform(5).unwrap()), 5.0);
        assert_eq!(min_entropy(&Distribution::flat(3, &[0, 3, 5, 6]).unwrap()), 2.0);
        let d = Distribution::new(vec![0.4, 0.3, 0.2, 0.1]).unwrap();
        assert!((min_entropy(&d) - 1.321928).abs() < 1e-6);
    }

    #[test]
    fn sv_check_examples() {
        assert!(sv_check(&Distribution::uniform(4).unwrap(), 0.0).passes);
        let c = Distribution::flat(3, &[5]).unwrap();
        assert!(!sv_check(&c, 0.49).passes);
        assert_eq!(sv_check(&c, 0.5).worst_bias, 0.5);
        let iid = Distribution::iid(4, 0.75).unwrap();
        assert!(sv_check(&iid, 0.25).passes);
        assert!(!sv_check(&iid, 0.2).passes);
    }

    #[test]
    fn flat_samples_stay_in_support() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let src = SourceModel::Flat {
            n: 4,
            support: vec![1, 7, 12],
        };
        for _ in 0..200 {
            let x = bits_to_index(&src.sample(4, &mut rng).unwrap());
            assert!([1, 7, 12].contains(&x));
        }
    }

    #[test]
    fn sv_zero_matches_uniform_sampler() {
        // With ε = 0 every conditional is exactly 1/2, so each bit is a fair
        // comparison of one uniform draw against 1/2.
        let mut a = ChaCha20Rng::seed_from_u64(9);
        let mut b = ChaCha20Rng::seed_from_u64(9);
        let s = SourceModel::Sv { epsilon: 0.0 }.sample(64, &mut a).unwrap();
        let t: Vec<u8> = (0..64).map(|_| u8::from(b.gen::<f64>() >= 0.5)).collect();
        assert_eq!(s, t);
    }

    #[test]
    fn flat_block_adversary_respects_subsets() {
        let adv = FlatBlockAdversary::new(3, 2, vec![vec![0, 1, 2, 3], vec![4, 5, 6, 7]]).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let bits = adv.sample(10, &mut rng);
        for (i, block) in bits.chunks(3).enumerate() {
            let x = bits_to_index(block);
            assert!(adv.subsets[i % 2].contains(&x));
        }
        assert!(FlatBlockAdversary::new(3, 2, vec![vec![0, 1, 2]]).is_err());
    }

    #[test]
    fn sv_empirical_conditionals_stay_in_band() {
        let eps = 0.2;
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        // Adversary pushes toward 0 after a 1 and toward 1 after a 0.
        let prog = |h: &[u8]| if h.last() == Some(&1) { 1.0 } else { 0.0 };
        let bits = sample_sv(eps, 1_000_000, &mut rng, &prog);
        let mut counts = [[0u64; 2]; 2];
        for w in bits.windows(2) {
            counts[w[0] as usize][w[1] as usize] += 1;
        }
        for prev in 0..2 {
            let n = (counts[prev][0] + counts[prev][1]) as f64;
            let p0 = counts[prev][0] as f64 / n;
            let sigma = (0.25 / n).sqrt();
            assert!(p0 >= 0.5 - eps - 3.0 * sigma && p0 <= 0.5 + eps + 3.0 * sigma);
        }
        let mut rng = ChaCha20Rng::seed_from_u64(12);
        let honest = SourceModel::Sv { epsilon: eps }.sample(1_000_000, &mut rng).unwrap();
        let zeros = honest.iter().filter(|&&b| b == 0).count() as f64 / 1e6;
        assert!((zeros - 0.5).abs() < eps + 3.0 * (0.25f64 / 1e6).sqrt());
    }

    #[test]
    fn flat_decomposition_examples() {
        let d = Distribution::flat(2, &[1, 2]).unwrap();
        let parts = flat_decomposition(&d, 1).unwrap();
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[0].0, vec![1, 2]);
        assert!((parts[0].1 - 1.0).abs() < 1e-12);

        let u = Distribution::uniform(2).unwrap();
        let parts = flat_decomposition(&u, 1).unwrap();
        let mut back = [0.0; 4];
        for (set, w) in &parts {
            for &x in set {
                back[x as usize] += w / 2.0;
            }
        }
        assert!(back.iter().all(|&p| (p - 0.25).abs() < 1e-9));

        let low = Distribution::new(vec![0.27, 0.25, 0.24, 0.24, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(min_entropy(&low) < 2.0 && min_entropy(&low) > 1.85);
        assert!(matches!(flat_decomposition(&low, 2), Err(Error::Infeasible(_))));
    }

    #[test]
    fn ghz_blocking_source_counts() {
        let SourceModel::Flat { support, .. } = ghz_blocking_source(2).unwrap() else {
            unreachable!()
        };
        assert_eq!(support.len(), 3);
        let SourceModel::Flat { n, support } = ghz_blocking_source(4).unwrap() else {
            unreachable!()
        };
        assert_eq!(support.len(), 9);
        let d = Distribution::flat(n, &support).unwrap();
        assert!((min_entropy(&d) / 4.0 - 3f64.log2() / 2.0).abs() < 1e-12);
        assert!(ghz_blocking_source(3).is_err());
    }

    #[test]
    fn blocking_source_lets_a_fixed_strategy_win() {
        let SourceModel::Flat { support, .. } = ghz_blocking_source(6).unwrap() else {
            unreachable!()
        };
        for x in support {
            let bits = index_to_bits(x, 6);
            for pair in bits.chunks(2) {
                let (r1, r2) = (pair[0], pair[1]);
                let z = r1 ^ r2 ^ 1;
                // All-zero outputs win whenever the input is not 111.
                assert_eq!(0, r1 & r2 & z);
            }
        }
    }

    #[test]
    fn explicit_json_layout() {
        let d = Distribution::new(vec![0.5, 0.25, 0.25, 0.0]).unwrap();
        assert_eq!(serde_json::to_string(&d).unwrap(), "[0.5,0.25,0.25,0.0]");
        assert!(serde_json::from_str::<Distribution>("[0.5,0.25,0.25]").is_err());
    }

    proptest! {
        #[test]
        fn flat_min_entropy_is_log_of_support(mask in 1u32..=u32::MAX) {
            let support: Vec<u64> = (0..32).filter(|i| mask >> i & 1 == 1).collect();
            let d = Distribution::flat(5, &support).unwrap();
            prop_assert!((min_entropy(&d) - (support.len() as f64).log2()).abs() < 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn flat_decomposition_round_trip(raw in prop::collection::vec(0.0f64..1.0, 8)) {
            // Cap every mass at 1/4 so the distribution is a (3, 2) source.
            let total: f64 = raw.iter().sum();
            prop_assume!(total > 1e-6);
            let mut p: Vec<f64> = raw.iter().map(|v| v / total).collect();
            for _ in 0..50 {
                let over: f64 = p.iter().map(|&v| (v - 0.25).max(0.0)).sum();
                if over <= 0.0 { break; }
                let free = p.iter().filter(|&&v| v < 0.25).count() as f64;
                for v in p.iter_mut() {
                    if *v > 0.25 { *v = 0.25 } else { *v += over / free }
                }
            }
            prop_assume!(p.iter().all(|&v| v <= 0.25 + 1e-12));
            let s: f64 = p.iter().sum();
            let d = Distribution::new(p.iter().map(|v| v / s).collect()).unwrap();
            prop_assume!(min_entropy(&d) >= 2.0 - 1e-12);
            let parts = flat_decomposition(&d, 2).unwrap();
            let mut back = vec![0.0; 8];
            let mut wsum = 0.0;
            for (set, w) in &parts {
                wsum += w;
                for &x in set { back[x as usize] += w / 4.0; }
            }
            prop_assert!((wsum - 1.0).abs() < 1e-7);
            for x in 0..8 {
                prop_assert!((back[x] - d.probs()[x]).abs() < 1e-7);
            }
        }
    }
}
