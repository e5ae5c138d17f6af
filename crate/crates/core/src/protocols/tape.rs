use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SeedPurpose {
    Inputs,
    ExtractorSeed,
}

/// Exact count of seed bits, split by purpose.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedLedger {
    pub drawn: u64,
    pub inputs: u64,
    pub extractor: u64,
    pub produced: u64,
}

impl SeedLedger {
    pub fn balanced(&self) -> bool {
        self.drawn == self.inputs + self.extractor
    }

    /// Bits counted after `earlier` was taken.
    pub fn since(&self, earlier: &SeedLedger) -> SeedLedger {
        SeedLedger {
            drawn: self.drawn - earlier.drawn,
            inputs: self.inputs - earlier.inputs,
            extractor: self.extractor - earlier.extractor,
            produced: self.produced - earlier.produced,
        }
    }

    pub fn absorb(&mut self, other: &SeedLedger) {
        self.drawn += other.drawn;
        self.inputs += other.inputs;
        self.extractor += other.extractor;
        self.produced += other.produced;
    }
}

#[derive(Debug, Clone)]
enum Source {
    Rng(ChaCha20Rng),
    Bits { bits: Vec<u8>, pos: usize },
}

/// A stream of perfectly random seed bits with exact accounting.
#[derive(Debug, Clone)]
pub struct SeedTape {
    source: Source,
    ledger: SeedLedger,
}

impl SeedTape {
    pub fn from_rng<R: RngCore + ?Sized>(rng: &mut R) -> Self {
        let mut key = [0u8; 32];
        rng.fill_bytes(&mut key);
        Self {
            source: Source::Rng(ChaCha20Rng::from_seed(key)),
            ledger: SeedLedger::default(),
        }
    }

    /// A finite tape; drawing past its end fails with [`Error::SeedExhausted`].
    pub fn from_bits(bits: Vec<u8>) -> Self {
        Self {
            source: Source::Bits { bits, pos: 0 },
            ledger: SeedLedger::default(),
        }
    }

    pub fn ledger(&self) -> SeedLedger {
        self.ledger
    }

    pub fn remaining(&self) -> Option<usize> {
        match &self.source {
            Source::Rng(_) => None,
            Source::Bits { bits, pos } => Some(bits.len() - pos),
        }
    }

    pub fn bit(&mut self, purpose: SeedPurpose) -> Result<u8> {
        let b = match &mut self.source {
            Source::Rng(r) => r.gen_range(0..=1u8),
            Source::Bits { bits, pos } => {
                let Some(&b) = bits.get(*pos) else {
                    return Err(Error::SeedExhausted {
                        drawn: self.ledger.drawn,
                    });
                };
                *pos += 1;
                b & 1
            }
        };
        self.ledger.drawn += 1;
        match purpose {
            SeedPurpose::Inputs => self.ledger.inputs += 1,
            SeedPurpose::ExtractorSeed => self.ledger.extractor += 1,
        }
        Ok(b)
    }

    /// `k` bits as an integer, first bit most significant.
    pub fn bits(&mut self, k: usize, purpose: SeedPurpose) -> Result<u64> {
        (0..k).try_fold(0u64, |acc, _| Ok(acc << 1 | u64::from(self.bit(purpose)?)))
    }

    pub fn bit_vec(&mut self, k: usize, purpose: SeedPurpose) -> Result<Vec<u8>> {
        (0..k).map(|_| self.bit(purpose)).collect()
    }

    /// Uniform value in `0..k` by rejection on `⌈log2 k⌉`-bit draws.
    pub fn uniform_below(&mut self, k: u64, purpose: SeedPurpose) -> Result<u64> {
        if k <= 1 {
            return Ok(0);
        }
        let width = 64 - (k - 1).leading_zeros() as usize;
        loop {
            let v = self.bits(width, purpose)?;
            if v < k {
                return Ok(v);
            }
        }
    }

    /// Failures before the first success of a Bernoulli(`p`) sequence, by
    /// inversion of a uniform value with `⌈log2(1/p)⌉ + 8` bits of precision.
    pub fn geometric(&mut self, p: f64, purpose: SeedPurpose) -> Result<u64> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::Parameter(format!("geometric parameter {p} outside (0, 1]")));
        }
        if p == 1.0 {
            return Ok(0);
        }
        let width = ((1.0 / p).log2().ceil() as usize + 8).min(63);
        let v = self.bits(width, purpose)?;
        let u = (v as f64 + 0.5) / (1u64 << width) as f64;
        Ok((u.ln() / (1.0 - p).ln()).floor() as u64)
    }
}
