use anyhow::Result;
use dirand::protocols::{
    rate_threshold, single_device_bounds, tree_max_leaves, tree_max_repeat_leaves, tree_rate,
};
use serde_json::{json, Value};

/// Leaf counts for depths `1..=max_depth` plus a bounds table over `rates`.
/// Leaf counts are decimal strings since they overflow JSON integers.
pub fn report(max_depth: usize, rates: &[f64], rounds: usize) -> Result<Value> {
    let mut trees = Vec::with_capacity(max_depth);
    for n in 1..=max_depth {
        let leaves = tree_max_leaves(n)?;
        let repeat = (n % 2 == 0).then(|| tree_max_repeat_leaves(n)).transpose()?;
        trees.push(json!({
            "n": n,
            "max_leaves": leaves.to_string(),
            "rate": tree_rate(leaves, n),
            "repeat_leaves": repeat.map(|r| r.to_string()),
            "repeat_rate": repeat.map(|r| tree_rate(r, n)),
        }));
    }
    let bounds = rates
        .iter()
        .map(|&r| single_device_bounds(r, rounds))
        .collect::<dirand::Result<Vec<_>>>()?;
    Ok(json!({
        "threshold": rate_threshold(),
        "trees": trees,
        "rounds": rounds,
        "bounds": bounds,
    }))
}
