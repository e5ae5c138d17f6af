use anyhow::{bail, Result};
use clap::ValueEnum;
use dirand::extractors::{
    universal_hash_report, worst_case_distance, Deor, ExtractorReport, SweepMode, TwoSourceExtractor,
};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExtractorKind {
    Hadamard,
    Bpp,
    Deor,
    UniversalHash,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepArgs {
    pub extractor: ExtractorKind,
    pub n: usize,
    pub k_x: Option<usize>,
    pub k_y: Option<usize>,
    pub m: usize,
    pub l: usize,
    pub samples: Option<usize>,
    pub rank_check: bool,
}

fn range(k: Option<usize>, n: usize) -> Vec<usize> {
    k.map_or_else(|| (1..=n).collect(), |k| vec![k])
}

/// Worst-case sweeps over flat sources; every `k` left unset ranges over `1..=n`.
pub fn sweep(args: &SweepArgs, seed: u64) -> Result<Value> {
    if args.rank_check {
        if args.extractor != ExtractorKind::Deor {
            bail!("--rank-check applies to deor only");
        }
        let d = Deor::new(args.n, args.n)?;
        let singular = d.singular_subset_sums();
        return Ok(json!({
            "extractor": "deor",
            "n": args.n,
            "subsets_checked": (1u64 << args.n) - 1,
            "singular_subsets": singular,
            "pass": singular.is_empty(),
        }));
    }
    let mode = match args.samples {
        Some(samples) => SweepMode::Sampled { samples, seed },
        None => SweepMode::Exhaustive,
    };
    let reports: Vec<ExtractorReport> = match args.extractor {
        ExtractorKind::UniversalHash => range(args.k_x, args.n)
            .into_par_iter()
            .map(|k| universal_hash_report(args.n, k, args.l))
            .collect::<dirand::Result<_>>()?,
        kind => {
            let ext = match kind {
                ExtractorKind::Hadamard => TwoSourceExtractor::Hadamard,
                ExtractorKind::Bpp => TwoSourceExtractor::Bpp,
                _ => TwoSourceExtractor::Deor { m: args.m },
            };
            let pairs: Vec<(usize, usize)> = range(args.k_x, args.n)
                .into_iter()
                .flat_map(|kx| range(args.k_y, args.n).into_iter().map(move |ky| (kx, ky)))
                .collect();
            pairs
                .into_par_iter()
                .map(|(kx, ky)| worst_case_distance(ext, args.n, kx, ky, mode))
                .collect::<dirand::Result<_>>()?
        }
    };
    Ok(json!({
        "pass": reports.iter().all(|r| r.pass),
        "sampled": matches!(mode, SweepMode::Sampled { .. }),
        "reports": reports,
    }))
}
