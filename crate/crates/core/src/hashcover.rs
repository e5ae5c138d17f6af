//! Covering hash families `{0,1}^n → {0,1}^2` and the s-wise δ-dependence check.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sources::binomial;

/// Largest `n` verified over every quadruple; beyond this verification samples.
pub const MAX_EXHAUSTIVE_COVER_BITS: usize = 6;

pub const MAX_COVER_BITS: usize = 8;

/// Candidate members tried by [`construct_cover`] before giving up.
pub const CANDIDATE_BUDGET: usize = 10_000;

/// Candidates drawn per greedy step.
const CANDIDATES_PER_STEP: usize = 8;

/// Cap on subsets visited exhaustively by [`check_swise_delta`].
pub const SUBSET_CAP: u128 = 1_000_000;

/// GHZ input triple assigned to each two-bit hash value.
pub const GHZ_INPUT_MAP: [[u8; 3]; 4] = [[1, 1, 1], [1, 0, 0], [0, 1, 0], [0, 0, 1]];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawFamily")]
pub struct HashFamily {
    pub n: usize,
    pub members: Vec<Vec<u8>>,
}

#[derive(Deserialize)]
struct RawFamily {
    n: usize,
    members: Vec<Vec<u8>>,
}

impl TryFrom<RawFamily> for HashFamily {
    type Error = Error;
    fn try_from(r: RawFamily) -> Result<Self> {
        HashFamily::new(r.n, r.members)
    }
}

impl HashFamily {
    pub fn new(n: usize, members: Vec<Vec<u8>>) -> Result<Self> {
        if n > MAX_COVER_BITS {
            return Err(Error::Parameter(format!("hash families need n <= {MAX_COVER_BITS}")));
        }
        for m in &members {
            if m.len() != 1 << n || m.iter().any(|&v| v > 3) {
                return Err(Error::Shape(format!(
                    "each member must map all 2^{n} strings into {{0,1,2,3}}"
                )));
            }
        }
        Ok(Self { n, members })
    }

    /// Builds members `h(i) = 2 X_i + Y_i` from paired sample points.
    pub fn from_sequences(n: usize, xs: &[Vec<u8>], ys: &[Vec<u8>]) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::Shape("need as many X sequences as Y sequences".into()));
        }
        let members = xs
            .iter()
            .zip(ys)
            .map(|(x, y)| {
                if x.len() != y.len() {
                    return Err(Error::Shape("sequence lengths differ".into()));
                }
                Ok(x.iter().zip(y).map(|(a, b)| 2 * (a & 1) + (b & 1)).collect())
            })
            .collect::<Result<_>>()?;
        Self::new(n, members)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn injective_on(&self, member: usize, quad: [u64; 4]) -> bool {
        injective(&self.members[member], quad)
    }
}

fn injective(h: &[u8], q: [u64; 4]) -> bool {
    let mask = q.iter().fold(0u8, |m, &x| m | 1 << h[x as usize]);
    mask == 0b1111
}

fn for_each_quadruple(size: u64, mut f: impl FnMut([u64; 4]) -> bool) {
    for a in 0..size {
        for b in a + 1..size {
            for c in b + 1..size {
                for d in c + 1..size {
                    if !f([a, b, c, d]) {
                        return;
                    }
                }
            }
        }
    }
}

fn random_quadruple<R: Rng + ?Sized>(size: u64, rng: &mut R) -> [u64; 4] {
    let v = rand::seq::index::sample(rng, size as usize, 4);
    let mut q = [0u64; 4];
    for (slot, x) in q.iter_mut().zip(v) {
        *slot = x as u64;
    }
    q.sort_unstable();
    q
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverVerdict {
    pub counterexample: Option<[u64; 4]>,
    pub quadruples_checked: u64,
    pub sampled: bool,
}

impl CoverVerdict {
    pub fn is_ok(&self) -> bool {
        self.counterexample.is_none()
    }
}

/// Exhaustive for `n ≤ 6`.
pub fn verify_cover(f: &HashFamily) -> Result<CoverVerdict> {
    if f.n > MAX_EXHAUSTIVE_COVER_BITS {
        return Err(Error::EnumerationCap {
            required: binomial(1 << f.n, 4),
            cap: binomial(1 << MAX_EXHAUSTIVE_COVER_BITS, 4),
        });
    }
    let mut verdict = CoverVerdict {
        counterexample: None,
        quadruples_checked: 0,
        sampled: false,
    };
    for_each_quadruple(1 << f.n, |q| {
        verdict.quadruples_checked += 1;
        if f.members.iter().any(|h| injective(h, q)) {
            true
        } else {
            verdict.counterexample = Some(q);
            false
        }
    });
    Ok(verdict)
}

/// Checks `samples` random quadruples.
pub fn verify_cover_sampled<R: Rng + ?Sized>(f: &HashFamily, samples: u64, rng: &mut R) -> CoverVerdict {
    let size = 1u64 << f.n;
    let mut verdict = CoverVerdict {
        counterexample: None,
        quadruples_checked: 0,
        sampled: true,
    };
    if size < 4 {
        return verdict;
    }
    for _ in 0..samples {
        let q = random_quadruple(size, rng);
        verdict.quadruples_checked += 1;
        if !f.members.iter().any(|h| injective(h, q)) {
            verdict.counterexample = Some(q);
            break;
        }
    }
    verdict
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DependenceReport {
    pub passes: bool,
    /// Largest L1 distance from uniform over the subsets examined.
    pub worst: f64,
    pub subsets_checked: u64,
    pub sampled: bool,
}

/// Each sequence is one equally likely sample point of `N` binary variables;
/// every subset of at most `s` variables must have an L1 distance at most
/// `delta` from uniform. Subsets are sampled when there are more than
/// [`SUBSET_CAP`].
pub fn check_swise_delta<R: Rng + ?Sized>(
    sequences: &[Vec<u8>],
    s: usize,
    delta: f64,
    rng: &mut R,
    samples: u64,
) -> Result<DependenceReport> {
    let Some(first) = sequences.first() else {
        return Err(Error::Shape("need at least one sample point".into()));
    };
    let len = first.len();
    if sequences.iter().any(|q| q.len() != len) {
        return Err(Error::Shape("sequences differ in length".into()));
    }
    if s == 0 || s > len || s > 16 {
        return Err(Error::Parameter("need 1 <= s <= min(N, 16)".into()));
    }
    let total: u128 = (1..=s).map(|t| binomial(len as u64, t as u64)).sum();
    let mut report = DependenceReport {
        passes: true,
        worst: 0.0,
        subsets_checked: 0,
        sampled: total > SUBSET_CAP,
    };
    let pts = sequences.len() as f64;
    let mut counts = vec![0u64; 1 << s];
    let mut measure = |subset: &[usize], report: &mut DependenceReport| {
        let cells = 1usize << subset.len();
        counts[..cells].iter_mut().for_each(|c| *c = 0);
        for q in sequences {
            let idx = subset.iter().fold(0, |acc, &i| acc << 1 | usize::from(q[i] & 1));
            counts[idx] += 1;
        }
        let u = 1.0 / cells as f64;
        let d: f64 = counts[..cells].iter().map(|&c| (c as f64 / pts - u).abs()).sum();
        report.worst = report.worst.max(d);
        report.subsets_checked += 1;
    };
    if report.sampled {
        for _ in 0..samples {
            let t = rng.gen_range(1..=s);
            let mut subset = rand::seq::index::sample(rng, len, t).into_vec();
            subset.sort_unstable();
            measure(&subset, &mut report);
        }
    } else {
        for t in 1..=s {
            for subset in crate::sources::subsets(len as u64, t) {
                let subset: Vec<usize> = subset.into_iter().map(|v| v as usize).collect();
                measure(&subset, &mut report);
            }
        }
    }
    report.passes = report.worst <= delta + 1e-12;
    Ok(report)
}

/// Failure of [`construct_cover`], carrying the best partial family.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("cover construction stopped with {uncovered} quadruples uncovered: {reason}")]
pub struct CoverFailure {
    pub partial: HashFamily,
    pub uncovered: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverConstruction {
    pub family: HashFamily,
    pub target_size: Option<usize>,
    pub candidates_tried: usize,
    pub verdict: CoverVerdict,
}

/// Greedy randomized cover: each step draws candidates that are injective on
/// the first uncovered quadruple and keeps the one covering the most others.
pub fn construct_cover<R: Rng + ?Sized>(
    n: usize,
    rng: &mut R,
    target_size: Option<usize>,
) -> std::result::Result<CoverConstruction, CoverFailure> {
    let fail = |partial: HashFamily, uncovered: u64, reason: String| CoverFailure {
        partial,
        uncovered,
        reason,
    };
    if !(2..=MAX_EXHAUSTIVE_COVER_BITS).contains(&n) {
        return Err(fail(
            HashFamily { n, members: vec![] },
            0,
            format!("construction supports 2 <= n <= {MAX_EXHAUSTIVE_COVER_BITS}"),
        ));
    }
    let size = 1u64 << n;
    let mut open: Vec<[u64; 4]> = Vec::new();
    for_each_quadruple(size, |q| {
        open.push(q);
        true
    });
    let mut family = HashFamily { n, members: vec![] };
    let mut tried = 0;
    while let Some(&anchor) = open.first() {
        if target_size.is_some_and(|t| family.len() >= t) {
            return Err(fail(family, open.len() as u64, "target size reached".into()));
        }
        let mut best: Option<(Vec<u8>, usize)> = None;
        for _ in 0..CANDIDATES_PER_STEP {
            if tried == CANDIDATE_BUDGET {
                break;
            }
            tried += 1;
            let mut h: Vec<u8> = (0..size).map(|_| rng.gen_range(0..4)).collect();
            let mut labels = [0u8, 1, 2, 3];
            labels.shuffle(rng);
            for (x, v) in anchor.iter().zip(labels) {
                h[*x as usize] = v;
            }
            let covered = open.iter().filter(|&&q| injective(&h, q)).count();
            if best.as_ref().map_or(true, |(_, c)| covered > *c) {
                best = Some((h, covered));
            }
        }
        let Some((h, _)) = best else {
            return Err(fail(family, open.len() as u64, "candidate budget exhausted".into()));
        };
        open.retain(|&q| !injective(&h, q));
        family.members.push(h);
    }
    let verdict = verify_cover(&family).expect("n is within the exhaustive range");
    Ok(CoverConstruction {
        family,
        target_size,
        candidates_tried: tried,
        verdict,
    })
}
