//! Local and no-signaling polytope programs built on the simplex core.
//!
//! Every bound produced here over the no-signaling set is a relaxation of the
//! corresponding quantum bound: `L ⊂ Q ⊂ NS`.

use serde::{Deserialize, Serialize};

use super::simplex::{Constraint, Direction, LinearProgram, LpOutcome, Relation};
use crate::bell::BellExpression;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::scenario::{check_cap, Behavior, DeterministicIter, DeterministicPoint, Scenario};

/// Label attached to every bound computed over the no-signaling set.
pub const RELAXATION_LABEL: &str = "no-signaling relaxation";

fn output_bit(scenario: &Scenario, o: usize, party: usize) -> usize {
    (o / scenario.output_stride(party)) % scenario.outputs()[party]
}

/// Equality rows over the behavior table that, with `p >= 0`, cut out the
/// no-signaling polytope.
///
/// Binary outputs use the correlator form: for each party subset `S` the
/// correlator `Σ_a (-1)^{a_S} p(a|x)` may depend only on `x_S`. These rows are
/// linearly independent. Other scenarios fall back to marginal equalities,
/// which contain redundant rows.
pub fn ns_constraints<T: Scalar>(scenario: &Scenario) -> Vec<Constraint<T>> {
    let n_in = scenario.num_input_tuples();
    let n_out = scenario.num_output_tuples();
    let parties = scenario.parties();
    let one = T::one();
    let mut rows = Vec::new();
    for i in 0..n_in {
        rows.push(Constraint {
            coeffs: (0..n_out).map(|o| (i * n_out + o, one)).collect(),
            relation: Relation::Eq,
            rhs: T::one(),
        });
    }
    if scenario.is_binary_output() {
        for mask in 1usize..(1 << parties) {
            let sign = |o: usize| {
                let par = (0..parties)
                    .filter(|&p| mask >> p & 1 == 1)
                    .fold(0, |acc, p| acc ^ output_bit(scenario, o, p));
                if par == 1 {
                    -one
                } else {
                    one
                }
            };
            let signs: Vec<T> = (0..n_out).map(sign).collect();
            for i in 0..n_in {
                let mut x = scenario.decode_inputs(i);
                let mut moved = false;
                for (p, xp) in x.iter_mut().enumerate() {
                    if mask >> p & 1 == 0 && *xp != 0 {
                        *xp = 0;
                        moved = true;
                    }
                }
                if !moved {
                    continue;
                }
                let rep = scenario.encode_inputs(&x);
                let mut coeffs = Vec::with_capacity(2 * n_out);
                for o in 0..n_out {
                    coeffs.push((i * n_out + o, signs[o]));
                    coeffs.push((rep * n_out + o, -signs[o]));
                }
                rows.push(Constraint {
                    coeffs,
                    relation: Relation::Eq,
                    rhs: T::zero(),
                });
            }
        }
    } else {
        for party in 0..parties {
            let in_stride = scenario.input_stride(party);
            let out_stride = scenario.output_stride(party);
            let m_in = scenario.inputs()[party];
            let m_out = scenario.outputs()[party];
            for i in 0..n_in {
                let xj = (i / in_stride) % m_in;
                if xj == 0 {
                    continue;
                }
                let base = i - xj * in_stride;
                for o in 0..n_out {
                    if (o / out_stride) % m_out != 0 {
                        continue;
                    }
                    let mut coeffs = Vec::with_capacity(2 * m_out);
                    for aj in 0..m_out {
                        coeffs.push((i * n_out + o + aj * out_stride, one));
                        coeffs.push((base * n_out + o + aj * out_stride, -one));
                    }
                    rows.push(Constraint {
                        coeffs,
                        relation: Relation::Eq,
                        rhs: T::zero(),
                    });
                }
            }
        }
    }
    rows
}

/// LP over the behavior table restricted to the no-signaling polytope.
pub fn ns_program<T: Scalar>(scenario: &Scenario, direction: Direction) -> LinearProgram<T> {
    let mut lp = LinearProgram::new(scenario.table_len(), direction);
    lp.constraints = ns_constraints(scenario);
    lp
}

fn solved<T: Scalar>(lp: &LinearProgram<T>, what: &str) -> Result<(T, Vec<T>)> {
    match lp.solve()? {
        LpOutcome::Optimal { value, point } => Ok((value, point)),
        LpOutcome::Infeasible => Err(Error::Infeasible(what.to_string())),
        LpOutcome::Unbounded => Err(Error::Numerical(format!("{what}: unbounded"))),
    }
}

/// Optimum of the expression over the no-signaling polytope and a behavior attaining it.
pub fn ns_optimize<T: Scalar>(
    expr: &BellExpression<T>,
    direction: Direction,
) -> Result<(T, Behavior<T>)> {
    let mut lp = ns_program(&expr.scenario, direction);
    lp.objective = expr.weighted_coefficients();
    let (value, point) = solved(&lp, "no-signaling optimization")?;
    Ok((value, Behavior::new(expr.scenario.clone(), point)?))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Membership<T: Scalar> {
    /// Convex weights over deterministic points (zero weights omitted).
    Inside {
        weights: Vec<(DeterministicPoint, T)>,
    },
    /// A functional `s` (behavior layout, entries in `[-1, 1]`) whose value on
    /// the behavior exceeds its maximum over every deterministic point.
    Outside {
        functional: Vec<T>,
        value: T,
        local_max: T,
    },
}

/// Decides whether `b` is a mixture of deterministic points.
pub fn local_membership<T: Scalar>(b: &Behavior<T>, cap: u128) -> Result<Membership<T>> {
    let s = b.scenario();
    check_cap(s, cap)?;
    let points: Vec<DeterministicPoint> = DeterministicIter::new(s).collect();
    let n_in = s.num_input_tuples();
    let n_out = s.num_output_tuples();
    let cells: Vec<Vec<usize>> = points
        .iter()
        .map(|d| (0..n_in).map(|i| i * n_out + d.output_index(i)).collect())
        .collect();
    let one = T::one();

    let mut lp = LinearProgram::<T>::new(points.len(), Direction::Minimize);
    let mut rows: Vec<Vec<(usize, T)>> = vec![Vec::new(); s.table_len()];
    for (l, c) in cells.iter().enumerate() {
        for &k in c {
            rows[k].push((l, one));
        }
    }
    for (k, coeffs) in rows.into_iter().enumerate() {
        lp.add_constraint(coeffs, Relation::Eq, b.table()[k]);
    }
    lp.add_constraint((0..points.len()).map(|l| (l, one)).collect(), Relation::Eq, one);
    if let LpOutcome::Optimal { point, .. } = lp.solve()? {
        let weights = points
            .into_iter()
            .zip(point)
            .filter(|(_, w)| *w > T::tolerance())
            .collect();
        return Ok(Membership::Inside { weights });
    }

    // Separating functional: max s·p − c subject to s·d ≤ c for every vertex.
    let nv = s.table_len();
    let mut sep = LinearProgram::<T>::new(nv + 1, Direction::Maximize);
    for k in 0..nv {
        sep.objective[k] = b.table()[k];
        sep.set_bounds(k, Some(-one), Some(one));
    }
    sep.objective[nv] = -one;
    sep.set_bounds(nv, None, None);
    for c in &cells {
        let mut coeffs: Vec<(usize, T)> = c.iter().map(|&k| (k, one)).collect();
        coeffs.push((nv, -one));
        sep.add_constraint(coeffs, Relation::Le, T::zero());
    }
    let (_, point) = solved(&sep, "separating functional")?;
    let functional = point[..nv].to_vec();
    let value = functional
        .iter()
        .zip(b.table())
        .fold(T::zero(), |acc, (&f, &p)| acc + f * p);
    let local_max = cells
        .iter()
        .map(|c| c.iter().fold(T::zero(), |acc, &k| acc + functional[k]))
        .fold(None, |m: Option<T>, v| Some(m.map_or(v, |m| m.max_of(v))))
        .expect("at least one vertex");
    Ok(Membership::Outside {
        functional,
        value,
        local_max,
    })
}

/// Boolean functions of a subset of outputs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OutputFunction {
    Majority { parties: Vec<usize> },
    Parity { parties: Vec<usize> },
}

impl OutputFunction {
    pub fn eval(&self, outputs: &[usize]) -> usize {
        match self {
            OutputFunction::Majority { parties } => {
                let ones = parties.iter().filter(|&&p| outputs[p] == 1).count();
                usize::from(2 * ones > parties.len())
            }
            OutputFunction::Parity { parties } => {
                parties.iter().fold(0, |acc, &p| acc ^ (outputs[p] & 1))
            }
        }
    }

    fn parties(&self) -> &[usize] {
        match self {
            OutputFunction::Majority { parties } | OutputFunction::Parity { parties } => parties,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GuessTarget {
    /// `p(output | input)` for one full output tuple.
    Output { input: Vec<usize>, output: Vec<usize> },
    /// `P[f(outputs) = guess | input]`.
    Function {
        input: Vec<usize>,
        function: OutputFunction,
        guess: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GuessingQuery<T: Scalar> {
    pub expression: BellExpression<T>,
    pub fixed_value: T,
    pub target: GuessTarget,
}

/// Largest target probability over no-signaling behaviors whose expression
/// value equals `fixed_value`.
pub fn guessing_probability_bound<T: Scalar>(q: &GuessingQuery<T>) -> Result<T> {
    let s = &q.expression.scenario;
    let (input, cells): (&[usize], Vec<usize>) = match &q.target {
        GuessTarget::Output { input, output } => {
            check_tuple(input, s.inputs())?;
            check_tuple(output, s.outputs())?;
            (input, vec![s.encode_outputs(output)])
        }
        GuessTarget::Function {
            input,
            function,
            guess,
        } => {
            check_tuple(input, s.inputs())?;
            if function.parties().iter().any(|&p| p >= s.parties()) {
                return Err(Error::Shape("function refers to a missing party".into()));
            }
            let cells = (0..s.num_output_tuples())
                .filter(|&o| function.eval(&s.decode_outputs(o)) == *guess)
                .collect();
            (input, cells)
        }
    };
    let i = s.encode_inputs(input);
    let n_out = s.num_output_tuples();
    let mut lp = ns_program::<T>(s, Direction::Maximize);
    for o in cells {
        lp.objective[i * n_out + o] = T::one();
    }
    let w = q.expression.weighted_coefficients();
    lp.add_constraint(
        w.iter()
            .enumerate()
            .filter(|(_, &c)| c != T::zero())
            .map(|(k, &c)| (k, c))
            .collect(),
        Relation::Eq,
        q.fixed_value,
    );
    match lp.solve()? {
        LpOutcome::Optimal { value, .. } => Ok(value),
        LpOutcome::Infeasible => Err(Error::Infeasible(format!(
            "no no-signaling behavior has {} value {}",
            q.expression.name, q.fixed_value
        ))),
        LpOutcome::Unbounded => Err(Error::Numerical("guessing LP unbounded".into())),
    }
}

fn check_tuple(t: &[usize], radix: &[usize]) -> Result<()> {
    if t.len() != radix.len() || t.iter().zip(radix).any(|(&v, &r)| v >= r) {
        return Err(Error::Shape(format!("tuple {t:?} does not fit {radix:?}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{behavior_from_quantum, canonical_strategy};
    use crate::scenario::{enumerate_deterministic, is_no_signaling, mix_points, pr_box, DEFAULT_ENUMERATION_CAP};
    use num_rational::Rational64;
    use proptest::prelude::*;
    use std::f64::consts::SQRT_2;

    const CAP: u128 = DEFAULT_ENUMERATION_CAP;

    #[test]
    fn ns_row_counts() {
        let rows = ns_constraints::<f64>(&Scenario::binary(5, 2).unwrap());
        assert_eq!(rows.len(), 782);
        let rows = ns_constraints::<f64>(&Scenario::binary(2, 2).unwrap());
        assert_eq!(rows.len(), 4 + 2 + 2);
    }

    #[test]
    fn chsh_ns_max_is_four_exactly() {
        let e = BellExpression::<Rational64>::builtin("chsh").unwrap();
        let (v, b) = ns_optimize(&e, Direction::Maximize).unwrap();
        assert_eq!(v, Rational64::from_integer(4));
        assert!(is_no_signaling(&b, Rational64::from_integer(0)).no_signaling);
    }

    #[test]
    fn chsh_ns_max_in_floating_point() {
        let e = BellExpression::<f64>::builtin("chsh").unwrap();
        let (v, b) = ns_optimize(&e, Direction::Maximize).unwrap();
        assert!((v - 4.0).abs() < 1e-9);
        assert!(is_no_signaling(&b, 1e-7).no_signaling);
        let (v, _) = ns_optimize(&e, Direction::Minimize).unwrap();
        assert!((v + 4.0).abs() < 1e-9);
    }

    #[test]
    fn brandao_ns_min_is_zero() {
        let e = BellExpression::<f64>::builtin("brandao4").unwrap();
        let (v, b) = ns_optimize(&e, Direction::Minimize).unwrap();
        assert!(v.abs() < 1e-7);
        assert!(is_no_signaling(&b, 1e-7).no_signaling);
    }

    #[test]
    fn inclusion_chain_for_small_expressions() {
        for name in ["chsh", "chsh_game", "ghz_game", "brandao4"] {
            let e = BellExpression::<f64>::builtin(name).unwrap();
            let (l, _) = e.local_bound(CAP).unwrap();
            let q = e.reference_bounds.quantum;
            match e.sense {
                crate::bell::Sense::MaximizeViolation => {
                    let (ns, _) = ns_optimize(&e, Direction::Maximize).unwrap();
                    assert!(l <= q + 1e-12 && q <= ns + 1e-9, "{name}");
                }
                crate::bell::Sense::MinimizeValue => {
                    let (ns, _) = ns_optimize(&e, Direction::Minimize).unwrap();
                    assert!(l >= q - 1e-12 && q >= ns - 1e-9, "{name}");
                }
            }
        }
    }

    #[test]
    fn uniform_behavior_is_local() {
        let b = Behavior::<f64>::uniform(Scenario::binary(2, 2).unwrap());
        match local_membership(&b, CAP).unwrap() {
            Membership::Inside { weights } => {
                let total: f64 = weights.iter().map(|(_, w)| w).sum();
                assert!((total - 1.0).abs() < 1e-9);
            }
            other => panic!("expected inside, got {other:?}"),
        }
    }

    #[test]
    fn deterministic_point_is_its_own_decomposition() {
        let pts = enumerate_deterministic(&Scenario::binary(2, 2).unwrap(), CAP).unwrap();
        let b: Behavior<Rational64> = pts[9].behavior();
        match local_membership(&b, CAP).unwrap() {
            Membership::Inside { weights } => {
                assert_eq!(weights.len(), 1);
                assert_eq!(weights[0].0, pts[9]);
                assert_eq!(weights[0].1, Rational64::from_integer(1));
            }
            other => panic!("expected inside, got {other:?}"),
        }
    }

    #[test]
    fn quantum_chsh_behavior_is_separated() {
        let b = behavior_from_quantum(&canonical_strategy("chsh").unwrap());
        match local_membership(&b, CAP).unwrap() {
            Membership::Outside {
                functional,
                value,
                local_max,
            } => {
                assert!(functional.iter().all(|&f| (-1.0 - 1e-12..=1.0 + 1e-12).contains(&f)));
                // The CHSH functional itself is feasible with gap 2√2 − 2.
                assert!(value - local_max >= 2.0 * SQRT_2 - 2.0 - 1e-6);
            }
            other => panic!("expected outside, got {other:?}"),
        }
    }

    #[test]
    fn pr_box_is_outside() {
        let b: Behavior<f64> = pr_box();
        assert!(matches!(local_membership(&b, CAP).unwrap(), Membership::Outside { .. }));
    }

    #[test]
    fn chsh_guessing_examples() {
        let e = BellExpression::<f64>::builtin("chsh").unwrap();
        for (x, a) in [([0, 0], [0, 0]), ([1, 1], [0, 1]), ([0, 1], [1, 1])] {
            let q = GuessingQuery {
                expression: e.clone(),
                fixed_value: 4.0,
                target: GuessTarget::Output {
                    input: x.to_vec(),
                    output: a.to_vec(),
                },
            };
            assert!((guessing_probability_bound(&q).unwrap() - 0.5).abs() < 1e-7);
            let q2 = GuessingQuery {
                fixed_value: 2.0,
                ..q
            };
            assert!((guessing_probability_bound(&q2).unwrap() - 1.0).abs() < 1e-7);
        }
    }

    #[test]
    fn impossible_value_is_infeasible() {
        let q = GuessingQuery {
            expression: BellExpression::<f64>::builtin("chsh").unwrap(),
            fixed_value: 4.5,
            target: GuessTarget::Output {
                input: vec![0, 0],
                output: vec![0, 0],
            },
        };
        assert!(matches!(guessing_probability_bound(&q), Err(Error::Infeasible(_))));
    }

    #[test]
    fn guessing_bound_is_monotone_toward_local_value() {
        let e = BellExpression::<f64>::builtin("chsh").unwrap();
        let mut prev = 0.0;
        for v in [4.0, 3.5, 3.0, 2.5, 2.0] {
            let q = GuessingQuery {
                expression: e.clone(),
                fixed_value: v,
                target: GuessTarget::Output {
                    input: vec![0, 0],
                    output: vec![0, 0],
                },
            };
            let g = guessing_probability_bound(&q).unwrap();
            assert!(g >= prev - 1e-9, "bound fell from {prev} to {g} at {v}");
            prev = g;
        }
    }

    #[test]
    fn non_binary_scenario_uses_marginal_rows() {
        let s = Scenario::new(vec![2, 2], vec![3, 2]).unwrap();
        let rows = ns_constraints::<f64>(&s);
        assert!(rows.len() > 4);
        let mut lp = ns_program::<f64>(&s, Direction::Maximize);
        lp.objective[0] = 1.0;
        let (v, _) = lp.solve().unwrap().optimal().unwrap();
        assert!((v - 1.0).abs() < 1e-9);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn mixtures_round_trip(raw in prop::collection::vec(0.0f64..1.0, 16)) {
            let s = Scenario::binary(2, 2).unwrap();
            let pts = enumerate_deterministic(&s, CAP).unwrap();
            let total: f64 = raw.iter().sum();
            prop_assume!(total > 1e-3);
            let w: Vec<f64> = raw.iter().map(|v| v / total).collect();
            let b = mix_points(&pts, &w, 1e-9).unwrap();
            match local_membership(&b, CAP).unwrap() {
                Membership::Inside { weights } => {
                    let (ps, ws): (Vec<_>, Vec<_>) = weights.into_iter().unzip();
                    let sum: f64 = ws.iter().sum();
                    let ws: Vec<f64> = ws.iter().map(|w| w / sum).collect();
                    let back = mix_points(&ps, &ws, 1e-6).unwrap();
                    prop_assert!(back.max_abs_diff(&b).unwrap() < 1e-7);
                }
                Membership::Outside { .. } => prop_assert!(false, "mixture reported outside"),
            }
        }
    }
}
