//! Cheating trees for the single-device protocol.
//!
//! A vertex is a round. Honest rounds branch on all four two-bit inputs;
//! dishonest rounds are won deterministically and therefore branch on at
//! most three.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_TREE_DEPTH: usize = 40;

/// Min-entropy rate below which the repetition attack cheats without risk.
pub fn rate_threshold() -> f64 {
    12f64.log2() / 4.0
}

fn check_depth(n: usize) -> Result<()> {
    if n > MAX_TREE_DEPTH {
        return Err(Error::Parameter(format!("tree depth {n} exceeds {MAX_TREE_DEPTH}")));
    }
    Ok(())
}

/// Largest leaf count of a depth-`n` tree in which every root path has, at
/// every prefix, no more honest than dishonest vertices.
pub fn tree_max_leaves(n: usize) -> Result<u128> {
    check_depth(n)?;
    // best[c]: leaves below a vertex with `d` rounds left and credit `c`.
    let mut best = vec![1u128; n + 2];
    for _ in 0..n {
        let next = (0..n + 1)
            .map(|c| {
                let dishonest = 3 * best[c + 1];
                if c == 0 {
                    dishonest
                } else {
                    dishonest.max(4 * best[c - 1])
                }
            })
            .chain([0])
            .collect();
        best = next;
    }
    Ok(best[0])
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Parent {
    Dishonest,
    Ordinary,
    Eleven,
}

/// Largest leaf count when dishonest rounds repeat their honest parent:
/// a dishonest vertex must hang below an honest one, and has one child
/// after a `11` edge and three otherwise. Every root path must end with
/// no more honest than dishonest vertices.
pub fn tree_max_repeat_leaves(n: usize) -> Result<u128> {
    check_depth(n)?;
    if n % 2 == 1 {
        return Err(Error::Parameter("repeat trees need an even number of rounds".into()));
    }
    let offset = n as i64;
    let width = 2 * n + 1;
    let idx = |p: Parent| match p {
        Parent::Dishonest => 0,
        Parent::Ordinary => 1,
        Parent::Eleven => 2,
    };
    // memo[d][credit + offset][parent]
    let mut memo: Vec<Vec<[Option<u128>; 3]>> = vec![vec![[None; 3]; width]; n + 1];
    for c in 0..width {
        let ok = c as i64 - offset >= 0;
        memo[0][c] = [if ok { Some(1) } else { None }; 3];
    }
    for d in 1..=n {
        for c in 0..width {
            let credit = c as i64 - offset;
            for parent in [Parent::Dishonest, Parent::Ordinary, Parent::Eleven] {
                let below = |credit: i64, p: Parent| -> Option<u128> {
                    let k = credit + offset;
                    if k < 0 || k >= width as i64 {
                        return None;
                    }
                    memo[d - 1][k as usize][idx(p)]
                };
                let honest = match (below(credit - 1, Parent::Ordinary), below(credit - 1, Parent::Eleven)) {
                    (Some(a), Some(b)) => Some(3 * a + b),
                    _ => None,
                };
                let dishonest = match parent {
                    Parent::Dishonest => None,
                    Parent::Ordinary => below(credit + 1, Parent::Dishonest).map(|v| 3 * v),
                    Parent::Eleven => below(credit + 1, Parent::Dishonest),
                };
                memo[d][c][idx(parent)] = honest.max(dishonest);
            }
        }
    }
    memo[n][offset as usize][idx(Parent::Dishonest)]
        .ok_or_else(|| Error::Infeasible(format!("no repeat tree of depth {n}")))
}

/// `log2(leaves) / (2n)`: the min-entropy rate of the flat source on the tree's paths.
pub fn tree_rate(leaves: u128, n: usize) -> f64 {
    (leaves as f64).log2() / (2 * n) as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "snake_case")]
pub enum SingleDeviceBounds {
    /// `R` below the threshold: a repetition attack wins with certainty.
    FullCheating { rate: f64, threshold: f64 },
    Bounded {
        rate: f64,
        epsilon: f64,
        p_cheat: f64,
        bias: f64,
    },
}

/// `p_cheat ≤ 2^{−2εn}` and `bias ≤ 2^{−(2εn+1)}` with `ε = R − log2(12)/4`.
pub fn single_device_bounds(rate: f64, n: usize) -> Result<SingleDeviceBounds> {
    if !(0.0..=1.0).contains(&rate) || n == 0 {
        return Err(Error::Parameter("need 0 <= R <= 1 and n >= 1".into()));
    }
    let threshold = rate_threshold();
    if rate < threshold {
        return Ok(SingleDeviceBounds::FullCheating { rate, threshold });
    }
    let epsilon = rate - threshold;
    let p_cheat = (-2.0 * epsilon * n as f64).exp2();
    Ok(SingleDeviceBounds::Bounded {
        rate,
        epsilon,
        p_cheat,
        bias: p_cheat / 2.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_trees() {
        assert_eq!(tree_max_leaves(0).unwrap(), 1);
        assert_eq!(tree_max_leaves(1).unwrap(), 3);
        assert_eq!(tree_max_leaves(2).unwrap(), 12);
        assert_eq!(tree_max_leaves(4).unwrap(), 144);
        assert!(tree_max_leaves(41).is_err());
    }

    #[test]
    fn even_depths_match_closed_form() {
        for n in (0..=20).step_by(2) {
            assert_eq!(tree_max_leaves(n).unwrap(), 12u128.pow(n as u32 / 2), "n={n}");
            assert_eq!(tree_max_repeat_leaves(n).unwrap(), 10u128.pow(n as u32 / 2), "n={n}");
        }
        assert!((tree_rate(144, 4) - rate_threshold()).abs() < 1e-15);
        assert!((tree_rate(100, 4) - 10f64.log2() / 4.0).abs() < 1e-15);
    }

    #[test]
    fn odd_depths() {
        for n in (1..20).step_by(2) {
            assert_eq!(tree_max_leaves(n).unwrap(), 3 * 12u128.pow(n as u32 / 2), "n={n}");
        }
        assert!(tree_max_repeat_leaves(3).is_err());
    }

    #[test]
    fn bounds_examples() {
        let rh = rate_threshold();
        assert_eq!(
            single_device_bounds(rh, 10).unwrap(),
            SingleDeviceBounds::Bounded { rate: rh, epsilon: 0.0, p_cheat: 1.0, bias: 0.5 }
        );
        match single_device_bounds(rh + 0.05, 100).unwrap() {
            SingleDeviceBounds::Bounded { p_cheat, bias, .. } => {
                assert!((p_cheat - 2f64.powi(-10)).abs() < 1e-15);
                assert!((bias - 2f64.powi(-11)).abs() < 1e-15);
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            single_device_bounds(0.5, 10).unwrap(),
            SingleDeviceBounds::FullCheating { .. }
        ));
        assert!(single_device_bounds(1.5, 10).is_err());
    }

    proptest! {
        #[test]
        fn dyadic_bounds_are_exact(k in 4u32..=6, n in 1usize..200) {
            let eps = 2f64.powi(-(k as i32));
            let r = rate_threshold() + eps;
            prop_assume!(r - rate_threshold() == eps);
            let e = 2.0 * eps * n as f64;
            match single_device_bounds(r, n).unwrap() {
                SingleDeviceBounds::Bounded { p_cheat, bias, .. } => {
                    prop_assert_eq!(p_cheat, (-e).exp2());
                    prop_assert_eq!(bias, (-(e + 1.0)).exp2());
                }
                other => prop_assert!(false, "{:?}", other),
            }
        }

        #[test]
        fn leaves_grow_with_depth(n in 0usize..39) {
            prop_assert!(tree_max_leaves(n + 1).unwrap() >= tree_max_leaves(n).unwrap());
        }
    }
}
