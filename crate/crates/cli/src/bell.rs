use std::path::Path;

use anyhow::{bail, Context, Result};
use dirand::bell::{BellExpression, Sense, BUILTIN_NAMES};
use dirand::lp::{
    guessing_probability_bound, ns_optimize, Direction, GuessTarget, GuessingQuery, OutputFunction,
    RELAXATION_LABEL,
};
use dirand::quantum::{behavior_from_quantum, canonical_strategy};
use dirand::scenario::{validate_behavior, DEFAULT_ENUMERATION_CAP, DEFAULT_TOLERANCE};
use dirand::Behavior;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::read_json;

/// A built-in name, or a path to a JSON expression.
pub fn load_expression(spec: &str) -> Result<BellExpression<f64>> {
    if BUILTIN_NAMES.contains(&spec) {
        return Ok(BellExpression::builtin(spec)?);
    }
    let path = Path::new(spec);
    if path.exists() {
        return read_json(path);
    }
    bail!("`{spec}` is neither a built-in expression ({}) nor a file", BUILTIN_NAMES.join(", "))
}

fn quantum_attained(e: &BellExpression<f64>) -> Option<f64> {
    let name = if e.name == "chsh_game" { "chsh" } else { e.name.as_str() };
    let s = canonical_strategy(name).ok()?;
    let b = behavior_from_quantum(&s);
    e.evaluate(&b).ok()
}

pub fn eval(expression: &str, behavior: &Path) -> Result<Value> {
    let e = load_expression(expression)?;
    let b: Behavior = read_json(behavior)?;
    let report = validate_behavior(&b, DEFAULT_TOLERANCE);
    if !report.is_ok() {
        bail!("{} is not a valid behavior: {:?}", behavior.display(), report.violations);
    }
    let value = e.evaluate(&b)?;
    let violates = match e.sense {
        Sense::MaximizeViolation => value > e.reference_bounds.local + DEFAULT_TOLERANCE,
        Sense::MinimizeValue => value < e.reference_bounds.local - DEFAULT_TOLERANCE,
    };
    Ok(json!({
        "expression": e.name,
        "value": value,
        "violates_local_bound": violates,
        "reference_bounds": e.reference_bounds,
    }))
}

pub fn bounds(expression: &str, skip_lp: bool) -> Result<Value> {
    let e = load_expression(expression)?;
    let (local, vertex) = e.local_bound(DEFAULT_ENUMERATION_CAP)?;
    let ns = if skip_lp {
        None
    } else {
        let direction = match e.sense {
            Sense::MaximizeViolation => Direction::Maximize,
            Sense::MinimizeValue => Direction::Minimize,
        };
        Some(ns_optimize(&e, direction)?.0)
    };
    Ok(json!({
        "expression": e.name,
        "local": local,
        "local_vertex": vertex.assignment,
        "quantum": e.reference_bounds.quantum,
        "quantum_attained": quantum_attained(&e),
        "ns": ns,
        "ns_label": RELAXATION_LABEL,
    }))
}

pub struct GuessArgs {
    pub expression: String,
    pub value: f64,
    pub input: Option<Vec<usize>>,
    pub output: Option<Vec<usize>>,
    pub function: Option<OutputFunction>,
    pub guess: Option<usize>,
}

/// Maximum over every target left unspecified. Unspecified inputs range
/// over the tuples the expression constrains.
pub fn guess(args: &GuessArgs) -> Result<Value> {
    let e = load_expression(&args.expression)?;
    let s = e.scenario.clone();
    let inputs: Vec<Vec<usize>> = match &args.input {
        Some(x) => vec![x.clone()],
        None => (0..s.num_input_tuples())
            .filter(|&i| {
                let row = &e.coefficients[i * s.num_output_tuples()..(i + 1) * s.num_output_tuples()];
                row.iter().any(|&c| c != 0.0)
            })
            .map(|i| s.decode_inputs(i))
            .collect(),
    };
    let mut targets = Vec::new();
    for x in &inputs {
        match &args.function {
            Some(f) => {
                let guesses = args.guess.map_or(vec![0, 1], |g| vec![g]);
                for g in guesses {
                    targets.push(GuessTarget::Function {
                        input: x.clone(),
                        function: f.clone(),
                        guess: g,
                    });
                }
            }
            None => {
                let outputs = match &args.output {
                    Some(a) => vec![a.clone()],
                    None => (0..s.num_output_tuples()).map(|o| s.decode_outputs(o)).collect(),
                };
                for a in outputs {
                    targets.push(GuessTarget::Output {
                        input: x.clone(),
                        output: a,
                    });
                }
            }
        }
    }
    if targets.is_empty() {
        bail!("no targets to evaluate");
    }
    let values = targets
        .par_iter()
        .map(|t| {
            guessing_probability_bound(&GuessingQuery {
                expression: e.clone(),
                fixed_value: args.value,
                target: t.clone(),
            })
        })
        .collect::<dirand::Result<Vec<f64>>>()
        .context("guessing-probability LP")?;
    let (best, value) = values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    Ok(json!({
        "expression": e.name,
        "fixed_value": args.value,
        "bound": value,
        "attained_at": targets[best],
        "targets_evaluated": targets.len(),
        "label": RELAXATION_LABEL,
    }))
}
