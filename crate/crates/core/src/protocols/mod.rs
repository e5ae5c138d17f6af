//! Expansion and amplification protocols run against pluggable devices.
//!
//! Every runner draws its seed through a [`SeedTape`], whose ledger counts
//! each bit exactly once, and derives device randomness from a separate
//! stream so that runs are reproducible from a single RNG seed.

mod amplification;
mod device;
mod expansion;
mod tape;
mod trees;

pub use amplification::*;
pub use device::*;
pub use expansion::*;
pub use tape::*;
pub use trees::*;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

/// Outcome of one protocol run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub protocol: String,
    pub accepted: bool,
    pub abort_reason: Option<String>,
    /// Device rounds played before acceptance or abort.
    pub rounds_played: u64,
    pub ledger: SeedLedger,
    /// Weak-source bits consumed (amplification protocols).
    pub source_bits: u64,
    /// Certified min-entropy of the raw outputs, when the protocol computes one.
    pub certified_entropy: Option<f64>,
    /// CHSH estimate projected onto `[−2√2, 2√2]`.
    pub s_obs: Option<f64>,
    pub s_obs_raw: Option<f64>,
    pub epsilon: Option<f64>,
    pub output: Vec<u8>,
    /// Deviations from the textbook protocol that affect this run.
    pub flags: Vec<String>,
    pub details: serde_json::Value,
    pub transcript: Option<Vec<Round>>,
}

impl Verdict {
    fn new(protocol: &str) -> Self {
        Self {
            protocol: protocol.into(),
            accepted: false,
            abort_reason: None,
            rounds_played: 0,
            ledger: SeedLedger::default(),
            source_bits: 0,
            certified_entropy: None,
            s_obs: None,
            s_obs_raw: None,
            epsilon: None,
            output: Vec::new(),
            flags: Vec::new(),
            details: serde_json::Value::Null,
            transcript: None,
        }
    }

    fn abort(mut self, reason: impl Into<String>) -> Self {
        self.accepted = false;
        self.abort_reason = Some(reason.into());
        self
    }
}

/// Independent streams derived from the caller's RNG: the perfect seed, the
/// devices' internal randomness and the weak source.
struct Streams {
    tape: SeedTape,
    device: ChaCha20Rng,
    source: ChaCha20Rng,
}

impl Streams {
    fn new<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let tape = SeedTape::from_rng(rng);
        let device = ChaCha20Rng::seed_from_u64(rng.gen());
        let source = ChaCha20Rng::seed_from_u64(rng.gen());
        Self { tape, device, source }
    }
}
