use dirand::bell::BellExpression;
use dirand::lp::{guessing_probability_bound, ns_optimize, Direction, GuessTarget, GuessingQuery, OutputFunction};
use dirand::scenario::is_no_signaling;

#[test]
fn mermin5_ns_minimum_is_zero() {
    let e = BellExpression::<f64>::builtin("mermin5").unwrap();
    let (v, b) = ns_optimize(&e, Direction::Minimize).unwrap();
    assert!(v.abs() < 1e-6, "{v}");
    assert!(is_no_signaling(&b, 1e-7).no_signaling);
}

#[test]
fn majority_of_first_three_is_three_quarters_predictable() {
    let e = BellExpression::<f64>::builtin("mermin5").unwrap();
    for (input, guess) in [(vec![1, 0, 0, 0, 0], 0), (vec![0, 0, 1, 1, 1], 1), (vec![1, 1, 1, 1, 1], 0)] {
        let q = GuessingQuery {
            expression: e.clone(),
            fixed_value: 0.0,
            target: GuessTarget::Function {
                input,
                function: OutputFunction::Majority { parties: vec![0, 1, 2] },
                guess,
            },
        };
        let g = guessing_probability_bound(&q).unwrap();
        assert!((g - 0.75).abs() < 1e-6, "{g}");
    }
}
