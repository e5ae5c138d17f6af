use std::path::Path;

use anyhow::Result;
use dirand::hashcover::{construct_cover, verify_cover, verify_cover_sampled, HashFamily, MAX_EXHAUSTIVE_COVER_BITS};
use serde_json::{json, Value};

use crate::{read_json, report::trial_rng};

pub fn verify(path: &Path, samples: u64, seed: u64) -> Result<Value> {
    let family: HashFamily = read_json(path)?;
    let verdict = if family.n <= MAX_EXHAUSTIVE_COVER_BITS {
        verify_cover(&family)?
    } else {
        verify_cover_sampled(&family, samples, &mut trial_rng(seed, 0))
    };
    Ok(json!({
        "n": family.n,
        "members": family.len(),
        "covers": verdict.is_ok(),
        "verdict": verdict,
    }))
}

pub fn construct(n: usize, target: Option<usize>, seed: u64) -> Result<Value> {
    let c = construct_cover(n, &mut trial_rng(seed, 0), target)?;
    Ok(json!({
        "n": n,
        "members": c.family.len(),
        "candidates_tried": c.candidates_tried,
        "verdict": c.verdict,
        "family": c.family,
    }))
}
