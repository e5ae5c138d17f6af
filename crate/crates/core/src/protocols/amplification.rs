use rand::Rng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{Device, DeviceModel, Round, Streams, Verdict};
use crate::bell::BellExpression;
use crate::error::{Error, Result};
use crate::extractors::{hadamard, Deor};
use crate::hashcover::{verify_cover, HashFamily, GHZ_INPUT_MAP, MAX_EXHAUSTIVE_COVER_BITS};
use crate::scenario::Scenario;
use crate::sources::{bits_to_index, min_entropy, sample_sv, BiasProgram, SourceModel};

fn no_bias(_: &[u8]) -> f64 {
    f64::NAN
}

fn check_sv(eps: f64) -> Result<()> {
    if !(0.0..0.5).contains(&eps) {
        return Err(Error::Parameter(format!("SV parameter {eps} outside [0, 1/2)")));
    }
    Ok(())
}

fn log2_exact(n: usize, what: &str) -> Result<usize> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::Parameter(format!("{what} = {n} must be a power of two")));
    }
    Ok(n.trailing_zeros() as usize)
}

fn parity(a: &[usize]) -> usize {
    a.iter().sum::<usize>() & 1
}

/// Per-round penalty table of a built-in expression, in behavior layout.
struct Penalty {
    scenario: Scenario,
    coefficients: Vec<f64>,
}

impl Penalty {
    fn new(name: &str) -> Result<Self> {
        let e = BellExpression::<f64>::builtin(name)?;
        Ok(Self {
            scenario: e.scenario,
            coefficients: e.coefficients,
        })
    }

    fn of(&self, x: &[usize], a: &[usize]) -> f64 {
        let cell = self
            .scenario
            .cell(self.scenario.encode_inputs(x), self.scenario.encode_outputs(a));
        self.coefficients[cell]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GallegoConfig {
    /// Number of quintuplets `N`.
    pub n: usize,
    pub n_b: usize,
    pub n_d: usize,
    pub sv_epsilon: f64,
    #[serde(default)]
    pub record_transcript: bool,
}

/// Many-device SV amplification with the five-party inequality. Fresh
/// devices are cloned from `device` for every quintuplet; the distillation
/// function is the identity on the majority bits.
pub fn run_gallego_amplification<R: Rng + ?Sized>(
    cfg: &GallegoConfig,
    device: &DeviceModel,
    rng: &mut R,
) -> Result<Verdict> {
    run_gallego_amplification_with(cfg, device, &no_bias, rng)
}

/// As [`run_gallego_amplification`] with an adversarial SV bias program.
pub fn run_gallego_amplification_with<R: Rng + ?Sized>(
    cfg: &GallegoConfig,
    device: &DeviceModel,
    bias: &BiasProgram,
    rng: &mut R,
) -> Result<Verdict> {
    check_sv(cfg.sv_epsilon)?;
    let choice_bits = log2_exact(cfg.n_b, "N_b")?;
    if cfg.n == 0 || cfg.n_d == 0 {
        return Err(Error::Parameter("need N >= 1 and N_d >= 1".into()));
    }
    let penalty = Penalty::new("mermin5")?;
    device.check(&penalty.scenario)?;
    let mut s = Streams::new(rng);
    let source_len = 5 * cfg.n + choice_bits;
    let sv = sample_sv(cfg.sv_epsilon, source_len, &mut s.source, bias);
    let template = Device::new(device.clone());
    let mut v = Verdict::new("gallego_amplification");
    v.source_bits = source_len as u64;
    v.flags.push("undistilled".into());

    let mut quintuplets = Vec::with_capacity(cfg.n);
    for j in 0..cfg.n {
        let x: Vec<usize> = sv[5 * j..5 * j + 5].iter().map(|&b| b as usize).collect();
        let a = template.clone().play(&x, &mut s.device)?;
        quintuplets.push(Round { inputs: x, outputs: a });
    }
    v.rounds_played = cfg.n as u64;
    let valid: Vec<&Round> = quintuplets.iter().filter(|r| parity(&r.inputs) == 1).collect();
    let needed = cfg.n_b * cfg.n_d;
    let mut details = json!({
        "valid": valid.len(),
        "needed": needed,
    });
    let outcome = (|| {
        if 3 * valid.len() < cfg.n {
            return Err(format!("only {} of {} quintuplets are valid (< N/3)", valid.len(), cfg.n));
        }
        if valid.len() < needed {
            return Err(format!("{} valid quintuplets cannot fill {} blocks of {}", valid.len(), cfg.n_b, cfg.n_d));
        }
        let chosen = bits_to_index(&sv[5 * cfg.n..]) as usize;
        details["distillation_block"] = json!(chosen);
        for (b, block) in valid[..needed].chunks(cfg.n_d).enumerate() {
            if b == chosen {
                continue;
            }
            if let Some(r) = block.iter().find(|r| penalty.of(&r.inputs, &r.outputs) != 0.0) {
                return Err(format!(
                    "block {b} misses the maximal violation on input {:?}",
                    r.inputs
                ));
            }
        }
        Ok(valid[chosen * cfg.n_d..(chosen + 1) * cfg.n_d]
            .iter()
            .map(|r| u8::from(r.outputs[..3].iter().sum::<usize>() >= 2))
            .collect::<Vec<u8>>())
    })();
    match outcome {
        Ok(bits) => {
            v.accepted = true;
            v.output = bits;
        }
        Err(reason) => v = v.abort(reason),
    }
    v.ledger.produced = v.output.len() as u64;
    v.details = details;
    if cfg.record_transcript {
        v.transcript = Some(quintuplets);
    }
    Ok(v)
}

fn gallego_constant(eps: f64, beta: f64) -> f64 {
    32.0 * beta * (0.5 - eps).powi(-5)
}

fn check_gallego(n_d: u64, eps: f64, alpha: f64, beta: f64) -> Result<()> {
    if n_d == 0 {
        return Err(Error::Parameter("N_d must be at least 1".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0 && beta > 1.0) {
        return Err(Error::Parameter("need 0 < alpha < 1 < beta".into()));
    }
    check_sv(eps)
}

fn gallego_from_log_nb(ln_n_b: f64, n_d: u64, eps: f64, alpha: f64, beta: f64) -> f64 {
    let nd = n_d as f64;
    let first = alpha.powf(nd);
    let ln_second = 2f64.ln() + (0.5 + eps).log2() * ln_n_b + nd * gallego_constant(eps, beta).ln();
    0.5 + 1.5 * nd.sqrt() * (first + ln_second.exp())
}

/// Upper bound on the adversary's guessing probability,
/// `½ + (3√N_d/2)[α^{N_d} + 2 N_b^{log(½+ε)} (32β(½−ε)^{−5})^{N_d}]`.
pub fn gallego_bias_bound(n_b: f64, n_d: u64, eps: f64, alpha: f64, beta: f64) -> Result<f64> {
    check_gallego(n_d, eps, alpha, beta)?;
    if !(n_b >= 1.0) {
        return Err(Error::Parameter("N_b must be at least 1".into()));
    }
    Ok(gallego_from_log_nb(n_b.ln(), n_d, eps, alpha, beta))
}

/// `ln N_b` for `N_b = (32β(½−ε)^{−5})^{2N_d/|log(½+ε)|}`.
pub fn gallego_schedule_ln_nb(n_d: u64, eps: f64, beta: f64) -> f64 {
    2.0 * n_d as f64 / (0.5 + eps).log2().abs() * gallego_constant(eps, beta).ln()
}

/// The bound with `N_b` on the schedule, evaluated in logarithms.
pub fn gallego_bias_bound_on_schedule(n_d: u64, eps: f64, alpha: f64, beta: f64) -> Result<f64> {
    check_gallego(n_d, eps, alpha, beta)?;
    Ok(gallego_from_log_nb(gallego_schedule_ln_nb(n_d, eps, beta), n_d, eps, alpha, beta))
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrandaoConfig {
    /// Rounds per block.
    pub n: usize,
    /// Blocks on the first and second device (powers of two).
    pub n1: usize,
    pub n2: usize,
    pub sv_epsilon: f64,
    pub eps_const: f64,
    pub mu_const: f64,
    /// Output bits of the substitute extractor per 8-bit chunk.
    #[serde(default = "one")]
    pub deor_m: usize,
    #[serde(default)]
    pub record_transcript: bool,
}

/// `(½ − ε_sv)^4 · (ε/2) · (1 − μ)`.
pub fn brandao_threshold(sv_epsilon: f64, eps_const: f64, mu_const: f64) -> f64 {
    (0.5 - sv_epsilon).powi(4) * (eps_const / 2.0) * (1.0 - mu_const)
}

/// Eight-device SV amplification with the four-party inequality. The two
/// chosen blocks are combined by DEOR over 8-bit chunks in place of the
/// non-explicit extractor.
pub fn run_brandao_amplification<R: Rng + ?Sized>(
    cfg: &BrandaoConfig,
    devices: &[DeviceModel],
    rng: &mut R,
) -> Result<Verdict> {
    run_brandao_amplification_with(cfg, devices, &no_bias, rng)
}

pub fn run_brandao_amplification_with<R: Rng + ?Sized>(
    cfg: &BrandaoConfig,
    devices: &[DeviceModel],
    bias: &BiasProgram,
    rng: &mut R,
) -> Result<Verdict> {
    check_sv(cfg.sv_epsilon)?;
    if devices.len() != 2 {
        return Err(Error::Shape(format!("need two devices, got {}", devices.len())));
    }
    if cfg.n == 0 || cfg.n % 2 == 1 {
        return Err(Error::Parameter("block length must be even and positive".into()));
    }
    if !(cfg.eps_const > 0.0 && cfg.mu_const >= 0.0 && cfg.mu_const < 1.0) {
        return Err(Error::Parameter("need eps > 0 and 0 <= mu < 1".into()));
    }
    let c1 = log2_exact(cfg.n1, "N_1")?;
    let c2 = log2_exact(cfg.n2, "N_2")?;
    let deor = Deor::new(8, cfg.deor_m)?;
    let penalty = Penalty::new("brandao4")?;
    for d in devices {
        d.check(&penalty.scenario)?;
    }
    let mut s = Streams::new(rng);
    let counts = [cfg.n * cfg.n1, cfg.n * cfg.n2];
    let source_len = 4 * (counts[0] + counts[1]) + c1 + c2;
    let sv = sample_sv(cfg.sv_epsilon, source_len, &mut s.source, bias);
    let threshold = brandao_threshold(cfg.sv_epsilon, cfg.eps_const, cfg.mu_const);
    let mut v = Verdict::new("brandao_amplification");
    v.source_bits = source_len as u64;
    v.flags.push("deor-substitute".into());

    let mut offset = 0;
    let mut runs: [Vec<Round>; 2] = [Vec::new(), Vec::new()];
    for (j, model) in devices.iter().enumerate() {
        let mut d = Device::new(model.clone());
        for _ in 0..counts[j] {
            let u: Vec<usize> = sv[offset..offset + 4].iter().map(|&b| b as usize).collect();
            offset += 4;
            let x = d.play(&u, &mut s.device)?;
            runs[j].push(Round { inputs: u, outputs: x });
        }
    }
    let b1 = bits_to_index(&sv[offset..offset + c1]) as usize;
    let b2 = bits_to_index(&sv[offset + c1..offset + c1 + c2]) as usize;
    let chosen = [b1, b2];
    let mut l = [0.0; 2];
    let mut blocks: [Vec<u8>; 2] = [Vec::new(), Vec::new()];
    for j in 0..2 {
        let block = &runs[j][chosen[j] * cfg.n..(chosen[j] + 1) * cfg.n];
        l[j] = block.iter().map(|r| penalty.of(&r.inputs, &r.outputs)).sum::<f64>() / cfg.n as f64;
        blocks[j] = block
            .iter()
            .flat_map(|r| r.outputs.iter().map(|&o| o as u8))
            .collect();
    }
    v.rounds_played = (counts[0] + counts[1]) as u64;
    v.details = json!({
        "chosen_blocks": chosen,
        "l": l,
        "threshold": threshold,
    });
    if l.iter().all(|&lj| lj <= threshold) {
        v.accepted = true;
        for (x, y) in blocks[0].chunks(8).zip(blocks[1].chunks(8)) {
            v.output.extend(deor.extract(x, y)?);
        }
    } else {
        v = v.abort(format!("Bell averages {l:?} exceed threshold {threshold}"));
    }
    v.ledger.produced = v.output.len() as u64;
    if cfg.record_transcript {
        let [a, b] = runs;
        v.transcript = Some(a.into_iter().chain(b).collect());
    }
    Ok(v)
}

/// Smallest `l` with `l > log γ / log f`.
pub fn bouda_rounds(gamma: f64, f: f64) -> Result<usize> {
    if !(gamma > 0.0 && gamma < 1.0 && f > 0.0 && f < 1.0) {
        return Err(Error::Parameter("need gamma and f in (0, 1)".into()));
    }
    Ok((gamma.ln() / f.ln()).floor() as usize + 1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoudaConfig {
    /// Repetitions `l`, each with a fresh block and fresh devices.
    pub rounds: usize,
    #[serde(default)]
    pub record_transcript: bool,
}

fn check_block_source(source: &SourceModel, n: usize) -> Result<()> {
    source.validate()?;
    let width = match source {
        SourceModel::Block { n, k } | SourceModel::MinEntropy { n, k } => {
            if *k < 2 {
                return Err(Error::Parameter("block sources need min-entropy k >= 2".into()));
            }
            *n
        }
        SourceModel::Flat { n, support } => {
            if support.len() < 4 {
                return Err(Error::Parameter("flat sources need at least four strings".into()));
            }
            *n
        }
        SourceModel::Explicit { distribution } => {
            if min_entropy(distribution) < 2.0 - 1e-12 {
                return Err(Error::Parameter("source min-entropy is below 2".into()));
            }
            distribution.n()
        }
        _ => return Err(Error::Shape("amplification needs a block source".into())),
    };
    if width != n {
        return Err(Error::Shape(format!("source emits {width}-bit blocks, family expects {n}")));
    }
    Ok(())
}

/// GHZ input triple for a two-bit hash value.
pub fn ghz_inputs(h: u8) -> [usize; 3] {
    GHZ_INPUT_MAP[h as usize].map(usize::from)
}

/// Block-source amplification: every hash member feeds one fresh GHZ device
/// per round; the output is the XOR of all first-party bits.
///
/// `devices` holds one model shared by every member, or one per member.
pub fn run_bouda_block_amplification<R: Rng + ?Sized>(
    cfg: &BoudaConfig,
    family: &HashFamily,
    devices: &[DeviceModel],
    source: &SourceModel,
    rng: &mut R,
) -> Result<Verdict> {
    if family.is_empty() || cfg.rounds == 0 {
        return Err(Error::Parameter("need a non-empty family and at least one round".into()));
    }
    if devices.len() != 1 && devices.len() != family.len() {
        return Err(Error::Shape(format!(
            "need one device model or {} (one per member), got {}",
            family.len(),
            devices.len()
        )));
    }
    check_block_source(source, family.n)?;
    let ghz = Scenario::binary(3, 2)?;
    for d in devices {
        d.check(&ghz)?;
    }
    let mut v = Verdict::new("bouda_block_amplification");
    if family.n <= MAX_EXHAUSTIVE_COVER_BITS {
        if let Some(q) = verify_cover(family)?.counterexample {
            return Err(Error::Parameter(format!("family does not cover quadruple {q:?}")));
        }
    } else {
        v.flags.push("cover-unverified".into());
    }
    let mut s = Streams::new(rng);
    let templates: Vec<Device> = devices.iter().cloned().map(Device::new).collect();
    let mut transcript = cfg.record_transcript.then(Vec::new);
    let mut bit = 0u8;
    let mut abort = None;
    let mut played = 0;
    'rounds: for t in 0..cfg.rounds {
        let r = bits_to_index(&source.sample(family.n, &mut s.source)?) as usize;
        v.source_bits += family.n as u64;
        for (i, member) in family.members.iter().enumerate() {
            let x = ghz_inputs(member[r]);
            let mut d = templates[i % templates.len()].clone();
            let a = d.play(&x, &mut s.device)?;
            played += 1;
            let won = parity(&a) == (x[0] & x[1] & x[2]);
            if let Some(tr) = transcript.as_mut() {
                tr.push(Round {
                    inputs: x.to_vec(),
                    outputs: a.clone(),
                });
            }
            if !won {
                abort = Some(format!("round {t}: device {i} lost the GHZ test"));
                break 'rounds;
            }
            bit ^= a[0] as u8;
        }
    }
    v.rounds_played = played;
    v.transcript = transcript;
    v.details = json!({ "members": family.len(), "rounds": cfg.rounds });
    match abort {
        Some(r) => v = v.abort(r),
        None => {
            v.accepted = true;
            v.output = vec![bit];
        }
    }
    v.ledger.produced = v.output.len() as u64;
    Ok(v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SingleDeviceSource {
    /// Any fixed-width source emitting the `2n` input bits.
    Model(SourceModel),
    /// Flat source on the paths of the optimal repeat tree: each round pair
    /// is uniform over the ten pairs `(r, r')` with `r' = 11` if `r = 11`
    /// and `r' ∈ {00, 01, 10}` otherwise.
    RepeatTree,
}

impl SingleDeviceSource {
    fn sample(&self, n: usize, rng: &mut ChaCha20Rng) -> Result<Vec<u8>> {
        match self {
            SingleDeviceSource::Model(m) => m.sample(2 * n, rng),
            SingleDeviceSource::RepeatTree => {
                if n % 2 == 1 {
                    return Err(Error::Parameter("repeat-tree sources need an even round count".into()));
                }
                let mut out = Vec::with_capacity(2 * n);
                for _ in 0..n / 2 {
                    let pair = rng.gen_range(0..10u8);
                    let (first, second) = if pair == 9 { (3, 3) } else { (pair / 3, pair % 3) };
                    out.extend([first >> 1, first & 1, second >> 1, second & 1]);
                }
                Ok(out)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleDeviceConfig {
    pub n: usize,
    #[serde(default)]
    pub record_transcript: bool,
}

/// Single-device min-entropy amplification: `n` GHZ rounds with inputs
/// `(R₁, R₂, R₁⊕R₂⊕1)` and output `Had(A, B)`.
pub fn run_single_device_protocol<R: Rng + ?Sized>(
    cfg: &SingleDeviceConfig,
    device: &DeviceModel,
    source: &SingleDeviceSource,
    rng: &mut R,
) -> Result<Verdict> {
    if cfg.n == 0 {
        return Err(Error::Parameter("need at least one round".into()));
    }
    device.check(&Scenario::binary(3, 2)?)?;
    let mut s = Streams::new(rng);
    let bits = source.sample(cfg.n, &mut s.source)?;
    if bits.len() != 2 * cfg.n {
        return Err(Error::Shape(format!("source must emit {} bits", 2 * cfg.n)));
    }
    let mut v = Verdict::new("single_device");
    v.source_bits = bits.len() as u64;
    let mut d = Device::new(device.clone());
    let (mut a, mut b) = (Vec::with_capacity(cfg.n), Vec::with_capacity(cfg.n));
    let mut transcript = cfg.record_transcript.then(Vec::new);
    let mut abort = None;
    for (i, pair) in bits.chunks(2).enumerate() {
        let x = [pair[0] as usize, pair[1] as usize, (pair[0] ^ pair[1] ^ 1) as usize];
        let out = d.play(&x, &mut s.device)?;
        if let Some(t) = transcript.as_mut() {
            t.push(Round {
                inputs: x.to_vec(),
                outputs: out.clone(),
            });
        }
        if parity(&out) != (x[0] & x[1] & x[2]) {
            abort = Some(format!("round {i} lost the GHZ test"));
            break;
        }
        a.push(out[0] as u8);
        b.push(out[1] as u8);
    }
    v.rounds_played = d.rounds_played();
    v.transcript = transcript;
    match abort {
        Some(r) => v = v.abort(r),
        None => {
            v.accepted = true;
            v.output = vec![hadamard(&a, &b)?];
        }
    }
    v.ledger.produced = v.output.len() as u64;
    Ok(v)
}
