//! Measurement scenarios, behaviors and deterministic strategies.
//!
//! A behavior is stored as one dense row-major table. The row is the input
//! tuple and the column is the output tuple, both encoded mixed-radix with
//! party 0 as the most significant digit:
//!
//! ```text
//! index = input_index * num_output_tuples + output_index
//! ```
//!
//! so outputs vary fastest. The JSON form `{scenario, table}` uses exactly
//! this order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default enumeration cap for deterministic strategies.
pub const DEFAULT_ENUMERATION_CAP: u128 = 10_000_000;

/// Default tolerance for probability checks on `f64` data.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawScenario")]
pub struct Scenario {
    parties: usize,
    inputs: Vec<usize>,
    outputs: Vec<usize>,
}

#[derive(Deserialize)]
struct RawScenario {
    parties: usize,
    inputs: Vec<usize>,
    outputs: Vec<usize>,
}

impl TryFrom<RawScenario> for Scenario {
    type Error = Error;
    fn try_from(raw: RawScenario) -> Result<Self> {
        if raw.inputs.len() != raw.parties || raw.outputs.len() != raw.parties {
            return Err(Error::Shape(format!(
                "scenario declares {} parties but lists {} input and {} output counts",
                raw.parties,
                raw.inputs.len(),
                raw.outputs.len()
            )));
        }
        Scenario::new(raw.inputs, raw.outputs)
    }
}

/// Mixed-radix encoding with digit 0 most significant.
pub(crate) fn encode_radix(digits: &[usize], radix: &[usize]) -> usize {
    digits
        .iter()
        .zip(radix)
        .fold(0, |acc, (&d, &r)| acc * r + d)
}

pub(crate) fn decode_radix(mut index: usize, radix: &[usize]) -> Vec<usize> {
    let mut digits = vec![0; radix.len()];
    for (slot, &r) in digits.iter_mut().zip(radix).rev() {
        *slot = index % r;
        index /= r;
    }
    digits
}

impl Scenario {
    pub fn new(inputs: Vec<usize>, outputs: Vec<usize>) -> Result<Self> {
        if inputs.is_empty() || inputs.len() != outputs.len() {
            return Err(Error::Shape(
                "need at least one party and equally many input and output counts".into(),
            ));
        }
        if inputs.iter().chain(&outputs).any(|&c| c == 0) {
            return Err(Error::Shape("all input and output counts must be >= 1".into()));
        }
        Ok(Self {
            parties: inputs.len(),
            inputs,
            outputs,
        })
    }

    /// `parties` parties, each with `inputs` settings and binary outcomes.
    pub fn binary(parties: usize, inputs: usize) -> Result<Self> {
        Self::new(vec![inputs; parties], vec![2; parties])
    }

    pub fn parties(&self) -> usize {
        self.parties
    }

    pub fn inputs(&self) -> &[usize] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[usize] {
        &self.outputs
    }

    pub fn num_input_tuples(&self) -> usize {
        self.inputs.iter().product()
    }

    pub fn num_output_tuples(&self) -> usize {
        self.outputs.iter().product()
    }

    pub fn table_len(&self) -> usize {
        self.num_input_tuples() * self.num_output_tuples()
    }

    pub fn is_binary_output(&self) -> bool {
        self.outputs.iter().all(|&m| m == 2)
    }

    pub fn encode_inputs(&self, x: &[usize]) -> usize {
        encode_radix(x, &self.inputs)
    }

    pub fn decode_inputs(&self, index: usize) -> Vec<usize> {
        decode_radix(index, &self.inputs)
    }

    pub fn encode_outputs(&self, a: &[usize]) -> usize {
        encode_radix(a, &self.outputs)
    }

    pub fn decode_outputs(&self, index: usize) -> Vec<usize> {
        decode_radix(index, &self.outputs)
    }

    /// Flat table index of `(input tuple, output tuple)` given their encoded indices.
    pub fn cell(&self, input_index: usize, output_index: usize) -> usize {
        input_index * self.num_output_tuples() + output_index
    }

    /// Stride of `party`'s digit in the output encoding.
    pub(crate) fn output_stride(&self, party: usize) -> usize {
        self.outputs[party + 1..].iter().product()
    }

    pub(crate) fn input_stride(&self, party: usize) -> usize {
        self.inputs[party + 1..].iter().product()
    }

    /// Number of deterministic strategies, `prod_p outputs_p ^ inputs_p`.
    pub fn deterministic_count(&self) -> u128 {
        self.inputs
            .iter()
            .zip(&self.outputs)
            .fold(1u128, |acc, (&mi, &mo)| {
                acc.saturating_mul((mo as u128).saturating_pow(mi as u32))
            })
    }
}

/// A conditional probability table `p(outputs | inputs)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "RawBehavior<T>",
    bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de> + Scalar")
)]
pub struct Behavior<T: Scalar> {
    scenario: Scenario,
    table: Vec<T>,
}

#[derive(Deserialize)]
struct RawBehavior<T> {
    scenario: Scenario,
    table: Vec<T>,
}

impl<T: Scalar> TryFrom<RawBehavior<T>> for Behavior<T> {
    type Error = Error;
    fn try_from(raw: RawBehavior<T>) -> Result<Self> {
        Behavior::new(raw.scenario, raw.table)
    }
}

impl<T: Scalar> Behavior<T> {
    pub fn new(scenario: Scenario, table: Vec<T>) -> Result<Self> {
        if table.len() != scenario.table_len() {
            return Err(Error::Shape(format!(
                "table has {} entries, scenario needs {}",
                table.len(),
                scenario.table_len()
            )));
        }
        Ok(Self { scenario, table })
    }

    /// Build a table from `f(input tuple, output tuple)`.
    pub fn from_fn(scenario: Scenario, mut f: impl FnMut(&[usize], &[usize]) -> T) -> Self {
        let n_in = scenario.num_input_tuples();
        let n_out = scenario.num_output_tuples();
        let outs: Vec<Vec<usize>> = (0..n_out).map(|o| scenario.decode_outputs(o)).collect();
        let mut table = Vec::with_capacity(n_in * n_out);
        for i in 0..n_in {
            let x = scenario.decode_inputs(i);
            for a in &outs {
                table.push(f(&x, a));
            }
        }
        Self { scenario, table }
    }

    /// Uniformly random outputs for every input.
    pub fn uniform(scenario: Scenario) -> Self {
        let w = T::one() / T::from_usize_lossy(scenario.num_output_tuples());
        Self::from_fn(scenario, |_, _| w)
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn table(&self) -> &[T] {
        &self.table
    }

    pub fn into_table(self) -> Vec<T> {
        self.table
    }

    pub fn prob(&self, x: &[usize], a: &[usize]) -> T {
        let s = &self.scenario;
        self.table[s.cell(s.encode_inputs(x), s.encode_outputs(a))]
    }

    /// Row of probabilities for one encoded input tuple.
    pub fn row(&self, input_index: usize) -> &[T] {
        let n_out = self.scenario.num_output_tuples();
        &self.table[input_index * n_out..(input_index + 1) * n_out]
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> Behavior<U> {
        Behavior {
            scenario: self.scenario.clone(),
            table: self.table.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        if self.scenario != other.scenario {
            return Err(Error::Shape("behaviors live in different scenarios".into()));
        }
        Ok(self
            .table
            .iter()
            .zip(&other.table)
            .fold(T::zero(), |m, (&a, &b)| m.max_of((a - b).abs())))
    }
}

/// A local deterministic strategy: one output per (party, input).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DeterministicPoint {
    pub scenario: Scenario,
    /// `assignment[party][input]` is the output.
    pub assignment: Vec<Vec<usize>>,
}

impl DeterministicPoint {
    pub fn new(scenario: Scenario, assignment: Vec<Vec<usize>>) -> Result<Self> {
        if assignment.len() != scenario.parties() {
            return Err(Error::Shape("one assignment row per party required".into()));
        }
        for (p, row) in assignment.iter().enumerate() {
            if row.len() != scenario.inputs()[p] || row.iter().any(|&o| o >= scenario.outputs()[p])
            {
                return Err(Error::Shape(format!("bad assignment for party {p}")));
            }
        }
        Ok(Self {
            scenario,
            assignment,
        })
    }

    /// Encoded output tuple produced on the encoded input tuple.
    pub fn output_index(&self, input_index: usize) -> usize {
        let x = self.scenario.decode_inputs(input_index);
        let a: Vec<usize> = x
            .iter()
            .enumerate()
            .map(|(p, &xi)| self.assignment[p][xi])
            .collect();
        self.scenario.encode_outputs(&a)
    }

    pub fn behavior<T: Scalar>(&self) -> Behavior<T> {
        let s = &self.scenario;
        let mut table = vec![T::zero(); s.table_len()];
        for i in 0..s.num_input_tuples() {
            table[s.cell(i, self.output_index(i))] = T::one();
        }
        Behavior {
            scenario: s.clone(),
            table,
        }
    }
}

/// Streams every deterministic point of a scenario in mixed-radix order.
pub struct DeterministicIter {
    scenario: Scenario,
    // One digit per (party, input), flattened; party 0 first.
    digits: Vec<usize>,
    radix: Vec<usize>,
    done: bool,
}

impl DeterministicIter {
    pub fn new(scenario: &Scenario) -> Self {
        let radix: Vec<usize> = scenario
            .inputs()
            .iter()
            .zip(scenario.outputs())
            .flat_map(|(&mi, &mo)| std::iter::repeat(mo).take(mi))
            .collect();
        Self {
            scenario: scenario.clone(),
            digits: vec![0; radix.len()],
            radix,
            done: false,
        }
    }
}

impl Iterator for DeterministicIter {
    type Item = DeterministicPoint;

    fn next(&mut self) -> Option<DeterministicPoint> {
        if self.done {
            return None;
        }
        let mut assignment = Vec::with_capacity(self.scenario.parties());
        let mut k = 0;
        for &mi in self.scenario.inputs() {
            assignment.push(self.digits[k..k + mi].to_vec());
            k += mi;
        }
        // Advance, last digit fastest.
        let mut pos = self.digits.len();
        loop {
            if pos == 0 {
                self.done = true;
                break;
            }
            pos -= 1;
            self.digits[pos] += 1;
            if self.digits[pos] < self.radix[pos] {
                break;
            }
            self.digits[pos] = 0;
        }
        Some(DeterministicPoint {
            scenario: self.scenario.clone(),
            assignment,
        })
    }
}

pub(crate) fn check_cap(scenario: &Scenario, cap: u128) -> Result<u128> {
    let required = scenario.deterministic_count();
    if required > cap {
        return Err(Error::EnumerationCap { required, cap });
    }
    Ok(required)
}

/// All deterministic points, refusing when the count exceeds `cap`.
pub fn enumerate_deterministic(scenario: &Scenario, cap: u128) -> Result<Vec<DeterministicPoint>> {
    check_cap(scenario, cap)?;
    Ok(DeterministicIter::new(scenario).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Violation<T: Scalar> {
    Negative {
        input: Vec<usize>,
        output: Vec<usize>,
        value: T,
    },
    Normalization {
        input: Vec<usize>,
        total: T,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport<T: Scalar> {
    pub violations: Vec<Violation<T>>,
}

impl<T: Scalar> ValidationReport<T> {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Lists negative entries and badly normalized rows.
pub fn validate_behavior<T: Scalar>(b: &Behavior<T>, tol: T) -> ValidationReport<T> {
    let s = b.scenario();
    let mut violations = Vec::new();
    for i in 0..s.num_input_tuples() {
        let row = b.row(i);
        for (o, &v) in row.iter().enumerate() {
            if v < -tol {
                violations.push(Violation::Negative {
                    input: s.decode_inputs(i),
                    output: s.decode_outputs(o),
                    value: v,
                });
            }
        }
        let total = row.iter().fold(T::zero(), |acc, &v| acc + v);
        if (total - T::one()).abs() > tol {
            violations.push(Violation::Normalization {
                input: s.decode_inputs(i),
                total,
            });
        }
    }
    ValidationReport { violations }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoSignalingReport<T: Scalar> {
    pub no_signaling: bool,
    pub worst_violation: T,
}

/// Checks that summing out any one party removes all dependence on that
/// party's input. Applied to every party this gives no-signaling for every
/// subset of parties.
pub fn is_no_signaling<T: Scalar>(b: &Behavior<T>, tol: T) -> NoSignalingReport<T> {
    let s = b.scenario();
    let n_out = s.num_output_tuples();
    let mut worst = T::zero();
    for party in 0..s.parties() {
        let in_stride = s.input_stride(party);
        let out_stride = s.output_stride(party);
        let m_in = s.inputs()[party];
        let m_out = s.outputs()[party];
        for i in 0..s.num_input_tuples() {
            let xj = (i / in_stride) % m_in;
            if xj == 0 {
                continue;
            }
            let base_i = i - xj * in_stride;
            for o in 0..n_out {
                if (o / out_stride) % m_out != 0 {
                    continue;
                }
                let marg = |ii: usize| {
                    (0..m_out).fold(T::zero(), |acc, aj| acc + b.table()[ii * n_out + o + aj * out_stride])
                };
                let d = (marg(i) - marg(base_i)).abs();
                worst = worst.max_of(d);
            }
        }
    }
    NoSignalingReport {
        no_signaling: worst <= tol,
        worst_violation: worst,
    }
}

/// Entrywise convex combination of behaviors.
pub fn mix<T: Scalar>(items: &[Behavior<T>], weights: &[T], tol: T) -> Result<Behavior<T>> {
    if items.is_empty() || items.len() != weights.len() {
        return Err(Error::Parameter("need one weight per behavior".into()));
    }
    if weights.iter().any(|&w| w < -tol) {
        return Err(Error::Parameter("negative mixture weight".into()));
    }
    let sum = weights.iter().fold(T::zero(), |acc, &w| acc + w);
    if (sum - T::one()).abs() > tol {
        return Err(Error::Parameter(format!("weights sum to {sum}, not 1")));
    }
    let scenario = items[0].scenario().clone();
    let mut table = vec![T::zero(); scenario.table_len()];
    for (b, &w) in items.iter().zip(weights) {
        if b.scenario() != &scenario {
            return Err(Error::Shape("mixture of behaviors from different scenarios".into()));
        }
        for (t, &v) in table.iter_mut().zip(b.table()) {
            *t = *t + w * v;
        }
    }
    Behavior::new(scenario, table)
}

/// Mixture of deterministic points.
pub fn mix_points<T: Scalar>(points: &[DeterministicPoint], weights: &[T], tol: T) -> Result<Behavior<T>> {
    let behaviors: Vec<Behavior<T>> = points.iter().map(|p| p.behavior()).collect();
    mix(&behaviors, weights, tol)
}

/// The PR box: `p(ab|xy) = 1/2` iff `a xor b = x and y`.
pub fn pr_box<T: Scalar>() -> Behavior<T> {
    let half = T::one() / (T::one() + T::one());
    Behavior::from_fn(Scenario::binary(2, 2).expect("valid"), |x, a| {
        if (a[0] ^ a[1]) == (x[0] & x[1]) {
            half
        } else {
            T::zero()
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;
    use proptest::prelude::*;

    fn chsh() -> Scenario {
        Scenario::binary(2, 2).unwrap()
    }

    #[test]
    fn layout_is_outputs_fastest_party_zero_most_significant() {
        let s = Scenario::new(vec![2, 3], vec![2, 2]).unwrap();
        assert_eq!(s.encode_inputs(&[1, 2]), 5);
        assert_eq!(s.decode_inputs(5), vec![1, 2]);
        assert_eq!(s.encode_outputs(&[1, 0]), 2);
        assert_eq!(s.cell(5, 2), 5 * 4 + 2);
    }

    #[test]
    fn pr_box_is_valid_and_no_signaling() {
        let b: Behavior<f64> = pr_box();
        assert!(validate_behavior(&b, 1e-9).is_ok());
        let ns = is_no_signaling(&b, 1e-9);
        assert!(ns.no_signaling);
        assert_eq!(ns.worst_violation, 0.0);
    }

    #[test]
    fn negative_entry_is_listed() {
        let mut t = Behavior::<f64>::uniform(chsh()).into_table();
        t[0] = -0.1;
        t[1] = 0.6;
        let r = validate_behavior(&Behavior::new(chsh(), t).unwrap(), 1e-9);
        assert_eq!(r.violations.len(), 1);
        assert!(matches!(r.violations[0], Violation::Negative { value, .. } if value == -0.1));
    }

    #[test]
    fn all_zero_table_fails_every_row() {
        let b = Behavior::new(chsh(), vec![0.0; 16]).unwrap();
        let r = validate_behavior(&b, 1e-9);
        assert_eq!(r.violations.len(), 4);
        assert!(r
            .violations
            .iter()
            .all(|v| matches!(v, Violation::Normalization { .. })));
    }

    #[test]
    fn wrong_table_length_is_structural_error() {
        assert!(matches!(
            Behavior::new(chsh(), vec![0.25; 15]),
            Err(Error::Shape(_))
        ));
        let json = r#"{"scenario":{"parties":2,"inputs":[2,2],"outputs":[2,2]},"table":[0.5]}"#;
        assert!(serde_json::from_str::<Behavior<f64>>(json).is_err());
    }

    #[test]
    fn signaling_table_is_detected() {
        // Bob outputs 0 exactly when Alice's input is 0.
        let b = Behavior::<f64>::from_fn(chsh(), |x, a| {
            let bob = if x[0] == 0 { 0 } else { 1 };
            if a[1] == bob && a[0] == 0 {
                1.0
            } else {
                0.0
            }
        });
        assert!(validate_behavior(&b, 1e-9).is_ok());
        let ns = is_no_signaling(&b, 1e-9);
        assert!(!ns.no_signaling);
        assert_eq!(ns.worst_violation, 1.0);
    }

    #[test]
    fn deterministic_counts() {
        assert_eq!(enumerate_deterministic(&chsh(), DEFAULT_ENUMERATION_CAP).unwrap().len(), 16);
        let ghz = Scenario::binary(3, 2).unwrap();
        assert_eq!(enumerate_deterministic(&ghz, DEFAULT_ENUMERATION_CAP).unwrap().len(), 64);
        let one = Scenario::new(vec![1], vec![2]).unwrap();
        assert_eq!(enumerate_deterministic(&one, DEFAULT_ENUMERATION_CAP).unwrap().len(), 2);
        assert!(matches!(
            enumerate_deterministic(&ghz, 10),
            Err(Error::EnumerationCap { required: 64, cap: 10 })
        ));
    }

    #[test]
    fn enumeration_has_no_duplicates() {
        let s = Scenario::new(vec![2, 1, 3], vec![2, 3, 2]).unwrap();
        let pts = enumerate_deterministic(&s, DEFAULT_ENUMERATION_CAP).unwrap();
        let set: std::collections::HashSet<_> = pts.iter().cloned().collect();
        assert_eq!(set.len() as u128, s.deterministic_count());
        assert_eq!(pts.len(), 4 * 3 * 8);
    }

    #[test]
    fn uniform_mixture_of_chsh_vertices_is_uniform() {
        let pts = enumerate_deterministic(&chsh(), DEFAULT_ENUMERATION_CAP).unwrap();
        let w = vec![Rational64::new(1, 16); 16];
        let b = mix_points(&pts, &w, Rational64::from_integer(0)).unwrap();
        assert!(b.table().iter().all(|&v| v == Rational64::new(1, 4)));
    }

    #[test]
    fn single_point_mixture_and_two_point_mixture() {
        let pts = enumerate_deterministic(&chsh(), DEFAULT_ENUMERATION_CAP).unwrap();
        let one = mix_points::<f64>(&pts[3..4], &[1.0], 1e-9).unwrap();
        assert_eq!(one, pts[3].behavior());
        // Points 0 and 1 differ only in Bob's output on input 1.
        assert_eq!(pts[0].assignment[1], vec![0, 0]);
        assert_eq!(pts[1].assignment[1], vec![0, 1]);
        let two = mix_points::<f64>(&pts[0..2], &[0.5, 0.5], 1e-9).unwrap();
        for i in 0..4 {
            let x = chsh().decode_inputs(i);
            let row = two.row(i);
            if x[1] == 1 {
                assert_eq!(row, &[0.5, 0.5, 0.0, 0.0]);
            } else {
                assert_eq!(row, &[1.0, 0.0, 0.0, 0.0]);
            }
        }
    }

    #[test]
    fn mix_rejects_bad_weights() {
        let b = Behavior::<f64>::uniform(chsh());
        assert!(mix(&[b.clone(), b.clone()], &[1.5, -0.5], 1e-9).is_err());
        assert!(mix(&[b.clone(), b], &[0.5, 0.6], 1e-9).is_err());
    }

    #[test]
    fn json_roundtrip_keeps_layout() {
        let b: Behavior<f64> = pr_box();
        let s = serde_json::to_string(&b).unwrap();
        assert!(s.starts_with(r#"{"scenario":{"parties":2,"inputs":[2,2],"outputs":[2,2]},"table":[0.5,0.0,0.0,0.5"#));
        let back: Behavior<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, b);
    }

    fn small_scenario() -> impl Strategy<Value = Scenario> {
        (1usize..=5)
            .prop_flat_map(|n| (prop::collection::vec(1usize..=2, n), prop::collection::vec(1usize..=2, n)))
            .prop_map(|(i, o)| Scenario::new(i, o).unwrap())
    }

    proptest! {
        #[test]
        fn deterministic_count_matches_formula(s in small_scenario()) {
            let formula: u128 = s
                .inputs()
                .iter()
                .zip(s.outputs())
                .map(|(&mi, &mo)| (mo as u128).pow(mi as u32))
                .product();
            let pts = enumerate_deterministic(&s, DEFAULT_ENUMERATION_CAP).unwrap();
            prop_assert_eq!(pts.len() as u128, formula);
            let distinct: std::collections::HashSet<_> = pts.iter().map(|p| p.assignment.clone()).collect();
            prop_assert_eq!(distinct.len(), pts.len());
        }

        #[test]
        fn vertices_are_exactly_no_signaling(s in small_scenario()) {
            for p in DeterministicIter::new(&s).take(256) {
                let r = is_no_signaling(&p.behavior::<Rational64>(), Rational64::from_integer(0));
                prop_assert!(r.no_signaling);
                prop_assert_eq!(r.worst_violation, Rational64::from_integer(0));
            }
        }

        #[test]
        fn random_mixtures_stay_no_signaling(
            s in small_scenario(),
            picks in prop::collection::vec((any::<prop::sample::Index>(), 1u32..100), 1..6),
        ) {
            let pts = enumerate_deterministic(&s, DEFAULT_ENUMERATION_CAP).unwrap();
            let mut items: Vec<Behavior<f64>> = vec![pr_box(), Behavior::uniform(chsh())];
            let chosen: Vec<DeterministicPoint> = picks.iter().map(|(i, _)| pts[i.index(pts.len())].clone()).collect();
            let total: u32 = picks.iter().map(|(_, w)| w).sum();
            let weights: Vec<f64> = picks.iter().map(|(_, w)| f64::from(*w) / f64::from(total)).collect();
            let b = mix_points::<f64>(&chosen, &weights, 1e-9).unwrap();
            prop_assert!(validate_behavior(&b, 1e-9).is_ok());
            prop_assert!(is_no_signaling(&b, 1e-12).no_signaling);
            // Mixtures of non-vertex no-signaling behaviors as well.
            let w = weights[0];
            items.push(mix(&items.clone(), &[w, 1.0 - w], 1e-9).unwrap());
            for it in &items {
                prop_assert!(is_no_signaling(it, 1e-12).no_signaling);
            }
        }
    }
}
