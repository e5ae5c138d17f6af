use std::f64::consts::SQRT_2;

use rand::Rng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{Device, DeviceModel, Round, SeedLedger, SeedPurpose, SeedTape, Streams, Verdict};
use crate::bell::{confidence_epsilon, estimate_chsh, total_entropy_bound, CountTable};
use crate::error::{Error, Result};
use crate::extractors::universal_hash;
use crate::scenario::Scenario;
use crate::sources::{bits_to_index, index_to_bits};

/// Field width used for blockwise hashing of raw outputs.
const HASH_CHUNK: usize = 8;

/// Upper limit on simulated device rounds for one run.
pub const MAX_SIMULATED_ROUNDS: u64 = 2_000_000_000;

fn quarter() -> f64 {
    0.25
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticConfig {
    pub n: u64,
    pub delta: f64,
    /// Probability of each non-default setting; the default `(0,0)` gets `1 − 3q`.
    #[serde(default = "quarter")]
    pub q: f64,
    /// Quantum maximum of the test; defaults to `2√2`.
    #[serde(default)]
    pub i_q: Option<f64>,
    #[serde(default)]
    pub record_transcript: bool,
}

impl QuadraticConfig {
    pub fn new(n: u64, delta: f64, q: f64) -> Self {
        Self {
            n,
            delta,
            q,
            i_q: None,
            record_transcript: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Parameter("need at least one round".into()));
        }
        if !(self.q > 0.0 && self.q <= 1.0 / 3.0) {
            return Err(Error::Parameter(format!("q = {} outside (0, 1/3]", self.q)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Parameter("delta must lie in (0, 1)".into()));
        }
        Ok(())
    }

    fn input_distribution(&self) -> Vec<f64> {
        vec![1.0 - 3.0 * self.q, self.q, self.q, self.q]
    }
}

fn require_pair(model: &DeviceModel, inputs_per_party: usize) -> Result<()> {
    if model.parties() != 2 {
        return Err(Error::Shape(format!(
            "expansion needs a pair of devices, got {} components",
            model.parties()
        )));
    }
    model.check(&Scenario::new(vec![inputs_per_party; 2], vec![2, 2])?)
}

/// Input settings `0..4` (encoded `2x + y`) for `n` rounds.
fn draw_quadratic_inputs(tape: &mut SeedTape, n: u64, q: f64) -> Result<Vec<u8>> {
    if q == 0.25 {
        return (0..n)
            .map(|_| Ok(tape.bits(2, SeedPurpose::Inputs)? as u8))
            .collect();
    }
    let mut inputs = vec![0u8; n as usize];
    let mut pos = 0u64;
    loop {
        pos += tape.geometric(3.0 * q, SeedPurpose::Inputs)?;
        if pos >= n {
            break;
        }
        inputs[pos as usize] = 1 + tape.uniform_below(3, SeedPurpose::Inputs)? as u8;
        pos += 1;
    }
    Ok(inputs)
}

/// Hashes `raw` in 8-bit chunks with one GF(2^8) hash `s1·x + s2`, keeping
/// `floor(target)` output bits spread evenly over the chunks.
fn blockwise_hash(raw: &[u8], s1: u64, s2: u64, target: u64) -> Result<Vec<u8>> {
    let chunks: Vec<&[u8]> = raw.chunks(HASH_CHUNK).collect();
    let c = chunks.len() as u64;
    let mut out = Vec::new();
    for (j, chunk) in chunks.iter().enumerate() {
        let j = j as u64;
        let l = (((j + 1) * target / c) - (j * target / c)).min(HASH_CHUNK as u64 - 1) as usize;
        if l == 0 {
            continue;
        }
        let mut padded = chunk.to_vec();
        padded.resize(HASH_CHUNK, 0);
        let h = universal_hash(HASH_CHUNK, s1, s2, bits_to_index(&padded), l)?;
        out.extend(index_to_bits(h, l));
    }
    Ok(out)
}

/// Core of the quadratic protocol. Inputs come from `tape`, the extractor
/// seed from `extractor_tape` when given and from `tape` otherwise.
fn quadratic_core(
    cfg: &QuadraticConfig,
    device: &mut Device,
    tape: &mut SeedTape,
    extractor_tape: Option<&mut SeedTape>,
    rng: &mut ChaCha20Rng,
) -> Result<Verdict> {
    cfg.validate()?;
    let mut v = Verdict::new("quadratic_expansion");
    let inputs = draw_quadratic_inputs(tape, cfg.n, cfg.q)?;
    let mut counts = CountTable::new(Scenario::binary(2, 2)?, cfg.input_distribution())?;
    let mut raw = Vec::with_capacity(2 * inputs.len());
    let mut transcript = cfg.record_transcript.then(Vec::new);
    for &i in &inputs {
        let x = [usize::from(i >> 1), usize::from(i & 1)];
        let a = device.play(&x, rng)?;
        counts.record(i as usize, a[0] * 2 + a[1]);
        raw.push(a[0] as u8);
        raw.push(a[1] as u8);
        if let Some(t) = transcript.as_mut() {
            t.push(Round {
                inputs: x.to_vec(),
                outputs: a,
            });
        }
    }
    let s_raw = estimate_chsh(&counts)?;
    let s_max = 2.0 * SQRT_2;
    let s_obs = s_raw.clamp(-s_max, s_max);
    let q_max = (1.0 - 3.0 * cfg.q).max(cfg.q);
    let eps = confidence_epsilon(cfg.n, q_max, cfg.i_q.unwrap_or(s_max), cfg.delta)?;
    let entropy = total_entropy_bound(cfg.n, s_obs, eps);
    v.rounds_played = cfg.n;
    v.s_obs = Some(s_obs);
    v.s_obs_raw = Some(s_raw);
    v.epsilon = Some(eps);
    v.certified_entropy = Some(entropy);
    v.transcript = transcript;
    v.flags.push("blockwise-gf256-hash".into());
    let target = entropy.floor() as u64;
    if target == 0 {
        v = v.abort("no certified entropy: S_obs - epsilon does not exceed the local bound");
    } else {
        let seed_tape = extractor_tape.unwrap_or(tape);
        let s1 = seed_tape.bits(HASH_CHUNK, SeedPurpose::ExtractorSeed)?;
        let s2 = seed_tape.bits(HASH_CHUNK, SeedPurpose::ExtractorSeed)?;
        v.output = blockwise_hash(&raw, s1, s2, target)?;
        v.accepted = true;
    }
    v.details = json!({
        "n": cfg.n,
        "q": cfg.q,
        "q_max": q_max,
        "delta": cfg.delta,
        "raw_bits": raw.len(),
        "non_default_rounds": inputs.iter().filter(|&&i| i != 0).count(),
    });
    Ok(v)
}

/// Runs the quadratic expansion protocol on a pair of devices.
///
/// Every seed bit comes from a fresh tape derived from `rng`; the verdict's
/// output is the extracted string `r̄` (the full protocol output is the
/// seed followed by `r̄`).
pub fn run_quadratic_expansion<R: Rng + ?Sized>(
    cfg: &QuadraticConfig,
    device: &DeviceModel,
    rng: &mut R,
) -> Result<Verdict> {
    require_pair(device, 2)?;
    let mut s = Streams::new(rng);
    let mut d = Device::new(device.clone());
    let mut v = quadratic_core(cfg, &mut d, &mut s.tape, None, &mut s.device)?;
    v.ledger = s.tape.ledger();
    v.ledger.produced = v.output.len() as u64;
    Ok(v)
}

fn hundred() -> f64 {
    100.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VvConfig {
    pub n: u64,
    pub delta: f64,
    #[serde(default = "hundred")]
    pub c: f64,
    /// Overrides; any override marks the run as scaled.
    #[serde(default)]
    pub ell: Option<u64>,
    #[serde(default)]
    pub k: Option<u64>,
    #[serde(default)]
    pub m: Option<u64>,
    #[serde(default)]
    pub record_transcript: bool,
}

impl VvConfig {
    pub fn new(n: u64, delta: f64) -> Self {
        Self {
            n,
            delta,
            c: 100.0,
            ell: None,
            k: None,
            m: None,
            record_transcript: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockParameters {
    pub ell: u64,
    pub k: u64,
    pub m: u64,
    /// Expected number of Bell blocks, `m / ℓ`.
    pub expected_bell_blocks: f64,
    pub scaled: bool,
}

fn log2_ceil_inv(delta: f64) -> f64 {
    (1.0 / delta).log2().ceil()
}

fn block_length(ell: u64) -> u64 {
    (10.0 * (ell as f64).log2().powi(2)).ceil().max(1.0) as u64
}

fn check_security(n: u64, delta: f64) -> Result<()> {
    if n == 0 || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Parameter("need n >= 1 and 0 < delta < 1".into()));
    }
    Ok(())
}

fn finish_parameters(ell: u64, k: u64, m: u64, scaled: bool) -> Result<BlockParameters> {
    if ell == 0 || k == 0 || m == 0 {
        return Err(Error::Parameter("block parameters must be positive".into()));
    }
    if m.saturating_mul(k) > MAX_SIMULATED_ROUNDS {
        return Err(Error::Parameter(format!(
            "{m} blocks of {k} rounds exceed the simulation limit; override ell, k or m"
        )));
    }
    Ok(BlockParameters {
        ell,
        k,
        m,
        expected_bell_blocks: m as f64 / ell as f64,
        scaled,
    })
}

impl VvConfig {
    /// `ℓ = Cn`, `Δ = 1000⌈log(1/δ)⌉`, `k = ⌈10 log² ℓ⌉`, `m = Δℓ`, with overrides applied.
    pub fn parameters(&self) -> Result<BlockParameters> {
        check_security(self.n, self.delta)?;
        let ell = self.ell.unwrap_or((self.c * self.n as f64).ceil() as u64);
        let big_delta = 1000 * log2_ceil_inv(self.delta) as u64;
        let k = self.k.unwrap_or_else(|| block_length(ell));
        let m = self.m.unwrap_or(big_delta.saturating_mul(ell));
        let scaled = self.ell.is_some() || self.k.is_some() || self.m.is_some() || self.c != 100.0;
        finish_parameters(ell, k, m, scaled)
    }
}

/// Blocks chosen as Bell blocks: each independently with probability `1/ℓ`,
/// drawn as geometric gaps.
fn draw_bell_blocks(tape: &mut SeedTape, m: u64, ell: u64) -> Result<Vec<u64>> {
    let p = 1.0 / ell as f64;
    let mut out = Vec::new();
    let mut pos = 0u64;
    loop {
        pos += tape.geometric(p, SeedPurpose::Inputs)?;
        if pos >= m {
            return Ok(out);
        }
        out.push(pos);
        pos += 1;
    }
}

struct BlockRun {
    a: Vec<u8>,
    b: Vec<u8>,
}

fn play_block(
    device: &mut Device,
    x: usize,
    y: usize,
    k: u64,
    rng: &mut ChaCha20Rng,
    transcript: &mut Option<Vec<Round>>,
) -> Result<BlockRun> {
    let mut run = BlockRun {
        a: Vec::with_capacity(k as usize),
        b: Vec::with_capacity(k as usize),
    };
    for _ in 0..k {
        let out = device.play(&[x, y], rng)?;
        run.a.push(out[0] as u8);
        run.b.push(out[1] as u8);
        if let Some(t) = transcript.as_mut() {
            t.push(Round {
                inputs: vec![x, y],
                outputs: out,
            });
        }
    }
    Ok(run)
}

fn ceil_frac(f: f64, k: u64) -> u64 {
    (f * k as f64).ceil() as u64
}

/// Exponential expansion: default `(0,0)` blocks and uniformly random Bell
/// blocks, each allowed at most `⌈0.16k⌉` CHSH losses.
pub fn run_vv_exponential<R: Rng + ?Sized>(
    cfg: &VvConfig,
    device: &DeviceModel,
    rng: &mut R,
) -> Result<Verdict> {
    require_pair(device, 2)?;
    let params = cfg.parameters()?;
    let mut s = Streams::new(rng);
    let mut d = Device::new(device.clone());
    let mut v = Verdict::new("vv_exponential");
    if params.scaled {
        v.flags.push("scaled".into());
    }
    let tolerance = ceil_frac(0.16, params.k);
    let bell = draw_bell_blocks(&mut s.tape, params.m, params.ell)?;
    let mut transcript = cfg.record_transcript.then(Vec::new);
    let mut next_bell = bell.iter().peekable();
    let mut passed = 0u64;
    let mut bell_played = 0u64;
    let mut abort = None;
    for i in 0..params.m {
        let is_bell = next_bell.next_if(|&&b| b == i).is_some();
        let (x, y) = if is_bell {
            bell_played += 1;
            let x = s.tape.bit(SeedPurpose::Inputs)? as usize;
            let y = s.tape.bit(SeedPurpose::Inputs)? as usize;
            (x, y)
        } else {
            (0, 0)
        };
        let run = play_block(&mut d, x, y, params.k, &mut s.device, &mut transcript)?;
        v.output.extend_from_slice(&run.b);
        let target = (x & y) as u8;
        let losses = run.a.iter().zip(&run.b).filter(|(a, b)| (*a ^ *b) != target).count() as u64;
        if losses > tolerance {
            abort = Some(format!(
                "{} block {i} with inputs ({x},{y}) lost {losses} > {tolerance} rounds",
                if is_bell { "Bell" } else { "default" }
            ));
            break;
        }
        passed += 1;
    }
    v.rounds_played = d.rounds_played();
    v.transcript = transcript;
    v.details = json!({
        "parameters": params,
        "bell_blocks_selected": bell.len(),
        "bell_blocks_played": bell_played,
        "blocks_passed": passed,
        "loss_tolerance": tolerance,
        "claimed_min_entropy": cfg.n,
    });
    v = match abort {
        Some(r) => v.abort(r),
        None => Verdict { accepted: true, ..v },
    };
    v.ledger = s.tape.ledger();
    v.ledger.produced = v.output.len() as u64;
    Ok(v)
}

/// Setting labels of the four-setting game.
pub const LABEL_A0: usize = 0;
pub const LABEL_A1: usize = 1;
pub const LABEL_B0: usize = 2;
pub const LABEL_B1: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VvQuantumConfig {
    pub n: u64,
    pub delta: f64,
    /// Defaults to `1/(10 + 8α)` with `α = log(1/δ)`.
    #[serde(default)]
    pub gamma: Option<f64>,
    /// Defaults to `⌈100α⌉`.
    #[serde(default)]
    pub c: Option<f64>,
    #[serde(default)]
    pub ell: Option<u64>,
    #[serde(default)]
    pub k: Option<u64>,
    #[serde(default)]
    pub m: Option<u64>,
    #[serde(default)]
    pub record_transcript: bool,
}

impl VvQuantumConfig {
    pub fn new(n: u64, delta: f64) -> Self {
        Self {
            n,
            delta,
            gamma: None,
            c: None,
            ell: None,
            k: None,
            m: None,
            record_transcript: false,
        }
    }

    /// `ℓ = n^{1/γ}`, `k = ⌈10 log² ℓ⌉`, `m = Cℓ log² ℓ`, with overrides applied.
    pub fn parameters(&self) -> Result<BlockParameters> {
        check_security(self.n, self.delta)?;
        let alpha = (1.0 / self.delta).log2();
        let gamma = self.gamma.unwrap_or(1.0 / (10.0 + 8.0 * alpha));
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::Parameter(format!("gamma must lie in (0, 1], got {gamma}")));
        }
        let c = self.c.unwrap_or((100.0 * alpha).ceil());
        let ell = match self.ell {
            Some(l) => l,
            None => {
                let l = (self.n as f64).powf(1.0 / gamma);
                if !l.is_finite() || l > u64::MAX as f64 {
                    return Err(Error::Parameter(format!(
                        "ell = n^(1/gamma) = {l:e} is not simulable; override ell"
                    )));
                }
                l.ceil() as u64
            }
        };
        let k = self.k.unwrap_or_else(|| block_length(ell));
        let log2l = (ell as f64).log2();
        let m = self
            .m
            .unwrap_or((c * ell as f64 * log2l * log2l).ceil().max(1.0) as u64);
        let scaled = self.gamma.is_some() || self.c.is_some() || self.ell.is_some() || self.k.is_some() || self.m.is_some();
        finish_parameters(ell, k, m, scaled)
    }
}

/// Acceptance test of one block of the four-setting game.
fn quantum_block_check(x: usize, y: usize, a: &[u8], b: &[u8]) -> std::result::Result<(), String> {
    let k = a.len() as u64;
    let differ = a.iter().zip(b).filter(|(p, q)| p != q).count() as u64;
    if x == y {
        return if differ == 0 {
            Ok(())
        } else {
            Err(format!("equal settings disagreed in {differ} positions"))
        };
    }
    if y == LABEL_B0 {
        // x ∧ y is 0 for both of Alice's A settings.
        let agree = k - differ;
        let need = ceil_frac(0.84, k);
        return if agree > need {
            Ok(())
        } else {
            Err(format!("CHSH condition held in {agree} <= {need} positions"))
        };
    }
    if x == LABEL_A1 && y == LABEL_A0 {
        let (lo, hi) = (ceil_frac(0.49, k), ceil_frac(0.51, k));
        return if (lo..=hi).contains(&differ) {
            Ok(())
        } else {
            Err(format!("outputs differ in {differ} positions, outside [{lo}, {hi}]"))
        };
    }
    Err(format!("setting pair ({x},{y}) does not occur in the protocol"))
}

/// Exponential expansion against quantum adversaries, over the four labelled
/// settings `(A,0), (A,1), (B,0), (B,1)` encoded `0..4`.
pub fn run_vv_quantum_secure<R: Rng + ?Sized>(
    cfg: &VvQuantumConfig,
    device: &DeviceModel,
    rng: &mut R,
) -> Result<Verdict> {
    require_pair(device, 4)?;
    let params = cfg.parameters()?;
    let mut s = Streams::new(rng);
    let mut d = Device::new(device.clone());
    let mut v = Verdict::new("vv_quantum_secure");
    if params.scaled {
        v.flags.push("scaled".into());
    }
    let bell = draw_bell_blocks(&mut s.tape, params.m, params.ell)?;
    let mut transcript = cfg.record_transcript.then(Vec::new);
    let mut next_bell = bell.iter().peekable();
    let mut passed = 0u64;
    let mut abort = None;
    for i in 0..params.m {
        let (x, y) = if next_bell.next_if(|&&b| b == i).is_some() {
            let x = [LABEL_A0, LABEL_A1][s.tape.bit(SeedPurpose::Inputs)? as usize];
            let y = [LABEL_A0, LABEL_B0][s.tape.bit(SeedPurpose::Inputs)? as usize];
            (x, y)
        } else {
            (LABEL_A0, LABEL_A0)
        };
        let run = play_block(&mut d, x, y, params.k, &mut s.device, &mut transcript)?;
        v.output.extend_from_slice(&run.b);
        if let Err(reason) = quantum_block_check(x, y, &run.a, &run.b) {
            abort = Some(format!("block {i}: {reason}"));
            break;
        }
        passed += 1;
    }
    v.rounds_played = d.rounds_played();
    v.transcript = transcript;
    v.details = json!({
        "parameters": params,
        "bell_blocks_selected": bell.len(),
        "blocks_passed": passed,
        "claimed_min_entropy": cfg.n,
    });
    v = match abort {
        Some(r) => v.abort(r),
        None => Verdict { accepted: true, ..v },
    };
    v.ledger = s.tape.ledger();
    v.ledger.produced = v.output.len() as u64;
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    /// Inputs recycle the previous output; extractor seeds come from a
    /// reserve drawn from the original seed.
    FehrAlternation,
    /// Inputs and extractor seeds both recycle the previous output.
    InputSecureAlternation,
}

fn two() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcatConfig {
    pub schedule: Schedule,
    pub stages: usize,
    /// Inner protocol; `inner.n` is the round count of stage 0.
    pub inner: QuadraticConfig,
    /// Round count ratio between consecutive stages.
    #[serde(default = "two")]
    pub growth: f64,
    /// Extractor-seed reserve for the Fehr schedule; defaults to 16 bits per later stage.
    #[serde(default)]
    pub reserve_bits: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub stage: usize,
    pub device: usize,
    pub rounds: u64,
    /// Bits consumed by this stage, from whichever tapes fed it.
    pub ledger: SeedLedger,
    /// Bits taken from the original seed (including the reserve).
    pub fresh_bits: u64,
    pub output_bits: u64,
    pub accepted: bool,
}

/// Alternates the quadratic protocol over a device pool, feeding each
/// stage's output to the next stage as its seed.
pub fn run_concatenated_expansion<R: Rng + ?Sized>(
    cfg: &ConcatConfig,
    pool: &[DeviceModel],
    rng: &mut R,
) -> Result<Verdict> {
    if pool.len() < 2 {
        return Err(Error::Shape("alternation needs at least two devices".into()));
    }
    if cfg.stages == 0 || !(cfg.growth >= 1.0) {
        return Err(Error::Parameter("need stages >= 1 and growth >= 1".into()));
    }
    for m in pool {
        require_pair(m, 2)?;
    }
    let mut s = Streams::new(rng);
    let mut devices: Vec<Device> = pool.iter().cloned().map(Device::new).collect();
    let mut v = Verdict::new("concatenated_expansion");
    let mut reserve = match cfg.schedule {
        Schedule::FehrAlternation => {
            let bits = cfg
                .reserve_bits
                .unwrap_or(2 * HASH_CHUNK as u64 * (cfg.stages as u64 - 1));
            Some(SeedTape::from_bits(s.tape.bit_vec(bits as usize, SeedPurpose::ExtractorSeed)?))
        }
        Schedule::InputSecureAlternation => None,
    };
    let mut stages = Vec::new();
    let mut previous: Vec<u8> = Vec::new();
    let mut total_rounds = 0;
    for stage in 0..cfg.stages {
        let rounds = (cfg.inner.n as f64 * cfg.growth.powi(stage as i32)).round() as u64;
        let inner = QuadraticConfig {
            n: rounds,
            ..cfg.inner.clone()
        };
        let idx = stage % pool.len();
        let d = &mut devices[idx];
        let played = if stage == 0 {
            let before = s.tape.ledger();
            let out = quadratic_core(&inner, d, &mut s.tape, None, &mut s.device)?;
            let l = s.tape.ledger().since(&before);
            Ok((out, l, l.drawn))
        } else {
            let mut recycled = SeedTape::from_bits(std::mem::take(&mut previous));
            match reserve.as_mut() {
                Some(r) => {
                    let before = r.ledger();
                    quadratic_core(&inner, d, &mut recycled, Some(r), &mut s.device).map(|out| {
                        let used = r.ledger().since(&before);
                        let mut l = recycled.ledger();
                        l.absorb(&used);
                        (out, l, used.drawn)
                    })
                }
                None => quadratic_core(&inner, d, &mut recycled, None, &mut s.device)
                    .map(|out| (out, recycled.ledger(), 0)),
            }
        };
        let (out, ledger, fresh) = match played {
            Ok(p) => p,
            Err(Error::SeedExhausted { drawn }) => {
                v = v.abort(format!("stage {stage}: seed exhausted after {drawn} bits"));
                break;
            }
            Err(e) => return Err(e),
        };
        total_rounds += out.rounds_played;
        let mut ledger = ledger;
        ledger.produced = out.output.len() as u64;
        stages.push(StageReport {
            stage,
            device: idx,
            rounds,
            ledger,
            fresh_bits: fresh,
            output_bits: out.output.len() as u64,
            accepted: out.accepted,
        });
        if !out.accepted {
            v = v.abort(format!(
                "stage {stage}: {}",
                out.abort_reason.unwrap_or_default()
            ));
            break;
        }
        previous = out.output;
    }
    v.rounds_played = total_rounds;
    v.flags.push("blockwise-gf256-hash".into());
    if v.abort_reason.is_none() {
        v.accepted = true;
        v.output = previous;
    }
    v.ledger = s.tape.ledger();
    v.ledger.produced = v.output.len() as u64;
    let fresh: u64 = v.ledger.drawn;
    v.details = json!({
        "schedule": cfg.schedule,
        "stages": stages,
        "fresh_seed_bits": fresh,
        "expanded": v.accepted && v.ledger.produced > fresh,
    });
    Ok(v)
}
