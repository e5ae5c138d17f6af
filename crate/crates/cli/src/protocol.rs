use anyhow::{bail, Result};
use dirand::hashcover::{construct_cover, HashFamily};
use dirand::protocols::{
    run_bouda_block_amplification, run_brandao_amplification, run_concatenated_expansion,
    run_gallego_amplification, run_quadratic_expansion, run_single_device_protocol, run_vv_exponential,
    run_vv_quantum_secure, single_device_bounds, BoudaConfig, BrandaoConfig, ConcatConfig, DeviceModel,
    DeviceSpec, GallegoConfig, QuadraticConfig, SeedLedger, SingleDeviceConfig, SingleDeviceSource, Verdict,
    VvConfig, VvQuantumConfig,
};
use dirand::sources::SourceModel;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::report::{bits_hex, trial_rng};

/// Stream reserved for one-off randomness shared by all trials.
const SETUP_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FamilySpec {
    Construct { construct: usize },
    Explicit(HashFamily),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "protocol", rename_all = "snake_case")]
pub enum ProtocolConfig {
    Quadratic {
        config: QuadraticConfig,
        device: DeviceSpec,
    },
    VvExponential {
        config: VvConfig,
        device: DeviceSpec,
    },
    VvQuantumSecure {
        config: VvQuantumConfig,
        device: DeviceSpec,
    },
    Concatenated {
        config: ConcatConfig,
        devices: Vec<DeviceSpec>,
    },
    Gallego {
        config: GallegoConfig,
        device: DeviceSpec,
    },
    Brandao {
        config: BrandaoConfig,
        devices: Vec<DeviceSpec>,
    },
    Bouda {
        config: BoudaConfig,
        family: FamilySpec,
        devices: Vec<DeviceSpec>,
        source: SourceModel,
    },
    SingleDevice {
        config: SingleDeviceConfig,
        device: DeviceSpec,
        source: SingleDeviceSource,
    },
    /// Deterministic bounds table; ignores the trial count.
    SingleDeviceBounds { n: usize, rates: Vec<f64> },
}

#[derive(Debug, Serialize)]
struct TrialRecord {
    trial: u64,
    accepted: bool,
    abort_reason: Option<String>,
    rounds_played: u64,
    source_bits: u64,
    ledger: SeedLedger,
    certified_entropy: Option<f64>,
    s_obs: Option<f64>,
    epsilon: Option<f64>,
    output_bits: usize,
    output_hex: String,
    flags: Vec<String>,
    details: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    transcript: Option<Value>,
}

impl TrialRecord {
    fn new(trial: u64, v: Verdict) -> Result<Self> {
        Ok(Self {
            trial,
            accepted: v.accepted,
            abort_reason: v.abort_reason,
            rounds_played: v.rounds_played,
            source_bits: v.source_bits,
            ledger: v.ledger,
            certified_entropy: v.certified_entropy,
            s_obs: v.s_obs,
            epsilon: v.epsilon,
            output_bits: v.output.len(),
            output_hex: bits_hex(&v.output),
            flags: v.flags,
            details: v.details,
            transcript: v.transcript.map(serde_json::to_value).transpose()?,
        })
    }
}

/// One line of the CSV summary.
#[derive(Debug, Serialize)]
pub struct CsvRow {
    trial: u64,
    accepted: bool,
    abort_reason: Option<String>,
    rounds_played: u64,
    source_bits: u64,
    seed_drawn: u64,
    seed_produced: u64,
    certified_entropy: Option<f64>,
    s_obs: Option<f64>,
    output_bits: usize,
}

impl From<&TrialRecord> for CsvRow {
    fn from(r: &TrialRecord) -> Self {
        Self {
            trial: r.trial,
            accepted: r.accepted,
            abort_reason: r.abort_reason.clone(),
            rounds_played: r.rounds_played,
            source_bits: r.source_bits,
            seed_drawn: r.ledger.drawn,
            seed_produced: r.ledger.produced,
            certified_entropy: r.certified_entropy,
            s_obs: r.s_obs,
            output_bits: r.output_bits,
        }
    }
}

fn build(specs: &[DeviceSpec]) -> Result<Vec<DeviceModel>> {
    Ok(specs.iter().map(DeviceSpec::build).collect::<dirand::Result<_>>()?)
}

type Runner = Box<dyn Fn(&mut ChaCha20Rng) -> dirand::Result<Verdict> + Send + Sync>;

fn runner(cfg: ProtocolConfig, seed: u64) -> Result<Runner> {
    Ok(match cfg {
        ProtocolConfig::Quadratic { config, device } => {
            let d = device.build()?;
            Box::new(move |rng| run_quadratic_expansion(&config, &d, rng))
        }
        ProtocolConfig::VvExponential { config, device } => {
            let d = device.build()?;
            Box::new(move |rng| run_vv_exponential(&config, &d, rng))
        }
        ProtocolConfig::VvQuantumSecure { config, device } => {
            let d = device.build()?;
            Box::new(move |rng| run_vv_quantum_secure(&config, &d, rng))
        }
        ProtocolConfig::Concatenated { config, devices } => {
            let pool = build(&devices)?;
            Box::new(move |rng| run_concatenated_expansion(&config, &pool, rng))
        }
        ProtocolConfig::Gallego { config, device } => {
            let d = device.build()?;
            Box::new(move |rng| run_gallego_amplification(&config, &d, rng))
        }
        ProtocolConfig::Brandao { config, devices } => {
            let pool = build(&devices)?;
            Box::new(move |rng| run_brandao_amplification(&config, &pool, rng))
        }
        ProtocolConfig::Bouda {
            config,
            family,
            devices,
            source,
        } => {
            let family = match family {
                FamilySpec::Explicit(f) => f,
                FamilySpec::Construct { construct } => {
                    construct_cover(construct, &mut trial_rng(seed, SETUP_STREAM), None)?.family
                }
            };
            let pool = build(&devices)?;
            Box::new(move |rng| run_bouda_block_amplification(&config, &family, &pool, &source, rng))
        }
        ProtocolConfig::SingleDevice {
            config,
            device,
            source,
        } => {
            let d = device.build()?;
            Box::new(move |rng| run_single_device_protocol(&config, &d, &source, rng))
        }
        ProtocolConfig::SingleDeviceBounds { .. } => unreachable!("handled by the caller"),
    })
}

/// Runs `trials` independent trials; trial `i` uses stream `i` of the seed.
/// Returns the payload and the CSV rows.
pub fn run(cfg: ProtocolConfig, seed: u64, trials: u64) -> Result<(Value, Vec<CsvRow>)> {
    if let ProtocolConfig::SingleDeviceBounds { n, rates } = &cfg {
        let bounds = rates
            .iter()
            .map(|&r| single_device_bounds(r, *n))
            .collect::<dirand::Result<Vec<_>>>()?;
        return Ok((json!({ "bounds": bounds }), Vec::new()));
    }
    if trials == 0 {
        bail!("--trials must be at least 1");
    }
    let run_one = runner(cfg, seed)?;
    let records = (0..trials)
        .into_par_iter()
        .map(|i| {
            let v = run_one(&mut trial_rng(seed, i))?;
            TrialRecord::new(i, v)
        })
        .collect::<Result<Vec<_>>>()?;
    let accepted = records.iter().filter(|r| r.accepted).count();
    let entropies: Vec<f64> = records.iter().filter_map(|r| r.certified_entropy).collect();
    let abort_rate = 1.0 - accepted as f64 / trials as f64;
    let rows = records.iter().map(CsvRow::from).collect();
    let payload = json!({
        "trials": trials,
        "accepted": accepted,
        "abort_rate": abort_rate,
        "abort_rate_stderr": (abort_rate * (1.0 - abort_rate) / trials as f64).sqrt(),
        "mean_certified_entropy": (!entropies.is_empty())
            .then(|| entropies.iter().sum::<f64>() / entropies.len() as f64),
        "ledger_balanced": records.iter().all(|r| r.ledger.balanced()),
        "runs": records,
    });
    Ok((payload, rows))
}
