use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;
use serde_json::Value;

/// What every command prints to stdout.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub config: Value,
    pub seed: u64,
    pub payload: Value,
    /// Seconds; excluded from the reproducibility guarantee.
    pub wall_time: f64,
}

/// Random stream for trial `index`: ChaCha20 keyed by the run seed, with the
/// trial index as the stream number. Streams never overlap, so trials are
/// independent and each one is reproducible on its own.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub struct Timer(Instant);

impl Timer {
    pub fn start() -> Self {
        Self(Instant::now())
    }

    pub fn finish(self, command: &str, config: Value, seed: u64, payload: Value) -> RunReport {
        RunReport {
            command: command.to_string(),
            config,
            seed,
            payload,
            wall_time: self.0.elapsed().as_secs_f64(),
        }
    }
}

/// Pack bits (most significant first) into a hex string.
pub fn bits_hex(bits: &[u8]) -> String {
    let bytes: Vec<u8> = bits
        .chunks(8)
        .map(|c| c.iter().enumerate().fold(0u8, |acc, (i, &b)| acc | (b & 1) << (7 - i)))
        .collect();
    hex::encode(bytes)
}
