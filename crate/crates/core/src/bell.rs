//! Bell expressions, their reference values, and finite-statistics estimates.

use std::f64::consts::{FRAC_PI_8, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::scenario::{check_cap, Behavior, DeterministicIter, DeterministicPoint, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    /// Larger values violate the local bound.
    MaximizeViolation,
    /// Smaller values violate the local bound.
    MinimizeValue,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceBounds {
    pub local: f64,
    pub quantum: f64,
    pub algebraic: f64,
}

/// Linear functional `Σ_x w(x) Σ_a c(a, x) p(a|x)` on behaviors.
///
/// `coefficients` uses the behavior layout. Without an input distribution
/// every input tuple has weight 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de> + Scalar"))]
pub struct BellExpression<T: Scalar> {
    pub name: String,
    pub scenario: Scenario,
    pub coefficients: Vec<T>,
    pub input_distribution: Option<Vec<T>>,
    pub sense: Sense,
    pub reference_bounds: ReferenceBounds,
}

pub const BUILTIN_NAMES: [&str; 5] = ["chsh", "chsh_game", "ghz_game", "mermin5", "brandao4"];

fn bit<T: Scalar>(cond: bool) -> T {
    if cond {
        T::one()
    } else {
        T::zero()
    }
}

fn parity(bits: &[usize]) -> usize {
    bits.iter().fold(0, |acc, &b| acc ^ (b & 1))
}

fn weight(bits: &[usize]) -> usize {
    bits.iter().sum()
}

impl<T: Scalar> BellExpression<T> {
    pub fn new(
        name: impl Into<String>,
        scenario: Scenario,
        coefficients: Vec<T>,
        input_distribution: Option<Vec<T>>,
        sense: Sense,
        reference_bounds: ReferenceBounds,
    ) -> Result<Self> {
        if coefficients.len() != scenario.table_len() {
            return Err(Error::Shape("coefficient tensor does not match scenario".into()));
        }
        if let Some(d) = &input_distribution {
            if d.len() != scenario.num_input_tuples() {
                return Err(Error::Shape("input distribution length mismatch".into()));
            }
            let sum = d.iter().fold(T::zero(), |a, &v| a + v);
            if d.iter().any(|&v| v < T::zero()) || (sum - T::one()).abs() > T::tolerance() {
                return Err(Error::Parameter("input distribution is not a distribution".into()));
            }
        }
        Ok(Self {
            name: name.into(),
            scenario,
            coefficients,
            input_distribution,
            sense,
            reference_bounds,
        })
    }

    /// One of [`BUILTIN_NAMES`].
    pub fn builtin(name: &str) -> Result<Self> {
        let one = T::one();
        let quarter = one / T::from_usize_lossy(4);
        let (scenario, coefficients, dist, sense, bounds) = match name {
            "chsh" => {
                let s = Scenario::binary(2, 2)?;
                let c = Behavior::<T>::from_fn(s.clone(), |x, a| {
                    let sign = if (a[0] ^ a[1]) == 1 { -one } else { one };
                    if x[0] == 1 && x[1] == 1 {
                        -sign
                    } else {
                        sign
                    }
                });
                let b = ReferenceBounds {
                    local: 2.0,
                    quantum: 2.0 * SQRT_2,
                    algebraic: 4.0,
                };
                (s, c, None, Sense::MaximizeViolation, b)
            }
            "chsh_game" => {
                let s = Scenario::binary(2, 2)?;
                let c = Behavior::<T>::from_fn(s.clone(), |x, a| bit((a[0] ^ a[1]) == (x[0] & x[1])));
                let q = FRAC_PI_8.cos().powi(2);
                let b = ReferenceBounds {
                    local: 0.75,
                    quantum: q,
                    algebraic: 1.0,
                };
                (s, c, Some(vec![quarter; 4]), Sense::MaximizeViolation, b)
            }
            "ghz_game" => {
                let s = Scenario::binary(3, 2)?;
                let valid = |x: &[usize]| parity(x) == 1;
                let c = Behavior::<T>::from_fn(s.clone(), |x, a| {
                    bit(valid(x) && parity(a) == (x[0] & x[1] & x[2]))
                });
                let d = (0..8)
                    .map(|i| if valid(&s.decode_inputs(i)) { quarter } else { T::zero() })
                    .collect();
                let b = ReferenceBounds {
                    local: 0.75,
                    quantum: 1.0,
                    algebraic: 1.0,
                };
                (s, c, Some(d), Sense::MaximizeViolation, b)
            }
            "mermin5" => {
                let s = Scenario::binary(5, 2)?;
                let c = Behavior::<T>::from_fn(s.clone(), |x, a| {
                    let w = weight(x);
                    let p = parity(a);
                    if w == 1 || w == 5 {
                        bit(p == 1)
                    } else if w == 3 {
                        bit(p == 0)
                    } else {
                        T::zero()
                    }
                });
                let b = ReferenceBounds {
                    local: 6.0,
                    quantum: 0.0,
                    algebraic: 0.0,
                };
                (s, c, None, Sense::MinimizeValue, b)
            }
            "brandao4" => {
                let s = Scenario::binary(4, 2)?;
                let c = Behavior::<T>::from_fn(s.clone(), |u, x| {
                    let w = weight(u);
                    let p = parity(x);
                    bit((w == 1 && p == 0) || (w == 3 && p == 1))
                });
                let b = ReferenceBounds {
                    local: 2.0,
                    quantum: 0.0,
                    algebraic: 0.0,
                };
                (s, c, None, Sense::MinimizeValue, b)
            }
            other => return Err(Error::UnknownName(other.to_string())),
        };
        Self::new(name, scenario, coefficients.into_table(), dist, sense, bounds)
    }

    /// Weight of input tuple `i` in the functional.
    pub fn input_weight(&self, i: usize) -> T {
        self.input_distribution
            .as_ref()
            .map_or(T::one(), |d| d[i])
    }

    /// Dense coefficient vector including input weights, in behavior layout.
    pub fn weighted_coefficients(&self) -> Vec<T> {
        let n_out = self.scenario.num_output_tuples();
        self.coefficients
            .iter()
            .enumerate()
            .map(|(k, &c)| c * self.input_weight(k / n_out))
            .collect()
    }

    pub fn evaluate(&self, b: &Behavior<T>) -> Result<T> {
        if b.scenario() != &self.scenario {
            return Err(Error::Shape(format!(
                "expression `{}` and behavior use different scenarios",
                self.name
            )));
        }
        let n_out = self.scenario.num_output_tuples();
        Ok(self
            .coefficients
            .iter()
            .zip(b.table())
            .enumerate()
            .fold(T::zero(), |acc, (k, (&c, &p))| {
                acc + self.input_weight(k / n_out) * c * p
            }))
    }

    /// Value on a deterministic point without building its table.
    pub fn evaluate_point(&self, d: &DeterministicPoint) -> T {
        let n_out = self.scenario.num_output_tuples();
        (0..self.scenario.num_input_tuples()).fold(T::zero(), |acc, i| {
            acc + self.input_weight(i) * self.coefficients[i * n_out + d.output_index(i)]
        })
    }

    /// Best local value (max or min according to the sense) and a vertex attaining it.
    pub fn local_bound(&self, cap: u128) -> Result<(T, DeterministicPoint)> {
        check_cap(&self.scenario, cap)?;
        let mut best: Option<(T, DeterministicPoint)> = None;
        for d in DeterministicIter::new(&self.scenario) {
            let v = self.evaluate_point(&d);
            let better = match &best {
                None => true,
                Some((bv, _)) => match self.sense {
                    Sense::MaximizeViolation => v > *bv,
                    Sense::MinimizeValue => v < *bv,
                },
            };
            if better {
                best = Some((v, d));
            }
        }
        Ok(best.expect("scenarios have at least one vertex"))
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> BellExpression<U> {
        BellExpression {
            name: self.name.clone(),
            scenario: self.scenario.clone(),
            coefficients: self.coefficients.iter().map(|&c| f(c)).collect(),
            input_distribution: self
                .input_distribution
                .as_ref()
                .map(|d| d.iter().map(|&v| f(v)).collect()),
            sense: self.sense,
            reference_bounds: self.reference_bounds,
        }
    }
}

/// Observed counts `N(a|x)` over `n` rounds in behavior layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountTable {
    pub scenario: Scenario,
    pub counts: Vec<u64>,
    pub n: u64,
    pub input_distribution: Vec<f64>,
}

impl CountTable {
    pub fn new(scenario: Scenario, input_distribution: Vec<f64>) -> Result<Self> {
        if input_distribution.len() != scenario.num_input_tuples() {
            return Err(Error::Shape("input distribution length mismatch".into()));
        }
        Ok(Self {
            counts: vec![0; scenario.table_len()],
            scenario,
            n: 0,
            input_distribution,
        })
    }

    pub fn record(&mut self, input_index: usize, output_index: usize) {
        self.counts[self.scenario.cell(input_index, output_index)] += 1;
        self.n += 1;
    }

    fn check(&self) -> Result<()> {
        if self.counts.len() != self.scenario.table_len() {
            return Err(Error::Shape("count table does not match scenario".into()));
        }
        if self.counts.iter().sum::<u64>() != self.n {
            return Err(Error::Shape("counts do not sum to n".into()));
        }
        Ok(())
    }
}

/// Plug-in CHSH estimate `Σ_xy s_xy Σ_ab (-1)^{a+b} N(ab|xy) / (n p(xy))`.
pub fn estimate_chsh(ct: &CountTable) -> Result<f64> {
    ct.check()?;
    if ct.scenario != Scenario::binary(2, 2)? {
        return Err(Error::Shape("CHSH estimate needs the 2x2x2 scenario".into()));
    }
    if ct.n == 0 {
        return Err(Error::Parameter("no rounds recorded".into()));
    }
    let mut s = 0.0;
    for i in 0..4 {
        let p = ct.input_distribution[i];
        let row = &ct.counts[i * 4..i * 4 + 4];
        let total: u64 = row.iter().sum();
        if p <= 0.0 {
            if total > 0 {
                return Err(Error::Parameter(format!(
                    "setting {i} has probability 0 but {total} counts"
                )));
            }
            continue;
        }
        let corr = (row[0] as f64 - row[1] as f64 - row[2] as f64 + row[3] as f64)
            / (ct.n as f64 * p);
        s += if i == 3 { -corr } else { corr };
    }
    Ok(s)
}

/// `ε = (1/q + I_q) √(2 ln(1/δ) / n)`.
pub fn confidence_epsilon(n: u64, q: f64, i_q: f64, delta: f64) -> Result<f64> {
    if n == 0 || !(q > 0.0 && q <= 1.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Parameter(format!(
            "need n >= 1, 0 < q <= 1, 0 < delta < 1 (got n={n}, q={q}, delta={delta})"
        )));
    }
    Ok((1.0 / q + i_q) * (2.0 * (1.0 / delta).ln() / n as f64).sqrt())
}

/// `f(S) = 1 − log2(1 + √(2 − S²/4))`; zero for `S ≤ 2`.
pub fn min_entropy_rate_bound(s: f64) -> Result<f64> {
    let smax = 2.0 * SQRT_2;
    if s > smax + 1e-12 {
        return Err(Error::Parameter(format!("S = {s} exceeds 2√2")));
    }
    if s <= 2.0 {
        return Ok(0.0);
    }
    let s = s.min(smax);
    let inner = (2.0 - s * s / 4.0).max(0.0);
    Ok((1.0 - (1.0 + inner.sqrt()).log2()).clamp(0.0, 1.0))
}

/// `n f(S_obs − ε)`, with the argument clamped into `[2, 2√2]`.
pub fn total_entropy_bound(n: u64, s_obs: f64, eps: f64) -> f64 {
    let s = (s_obs - eps).clamp(2.0, 2.0 * SQRT_2);
    n as f64 * min_entropy_rate_bound(s).expect("clamped into range")
}
