use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::fmt::Debug;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bell::BellExpression;
use crate::error::{Error, Result};
use crate::quantum::{behavior_from_quantum, canonical_strategy, ghz_state, Measurement, QuantumStrategy};
use crate::scenario::{Behavior, Scenario, DEFAULT_ENUMERATION_CAP};

/// One use of a multi-component device.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Round {
    pub inputs: Vec<usize>,
    pub outputs: Vec<usize>,
}

/// A classical adversarial program with memory.
///
/// Each component answers through [`MemoryProgram::respond`] seeing the
/// shared past and only its own current input, so programs cannot signal
/// within a round.
pub trait MemoryProgram: Send + Sync + Debug {
    /// Whether the components play the honest quantum strategy this round.
    fn honest_round(&self, _past: &[Round], _lambda: u64) -> bool {
        false
    }

    fn respond(&self, party: usize, input: usize, past: &[Round], lambda: u64) -> usize;
}

/// Honest in even rounds; in odd rounds every component repeats its output
/// from the previous round regardless of input.
#[derive(Debug, Clone, Copy, Default)]
pub struct RepeatAttack;

impl MemoryProgram for RepeatAttack {
    fn honest_round(&self, past: &[Round], _lambda: u64) -> bool {
        past.len() % 2 == 0
    }

    fn respond(&self, party: usize, _input: usize, past: &[Round], _lambda: u64) -> usize {
        past.last().map_or(0, |r| r.outputs[party])
    }
}

#[derive(Debug, Clone)]
pub enum DeviceModel {
    /// Samples the Born-rule behavior, then flips each output bit
    /// independently with probability `noise`.
    HonestQuantum { strategy: QuantumStrategy, noise: f64 },
    /// `rounds[t % len][party][input]` is the output in round `t`.
    DeterministicTable { rounds: Vec<Vec<Vec<usize>>> },
    Memory {
        program: Arc<dyn MemoryProgram>,
        honest: Option<QuantumStrategy>,
        parties: usize,
        lambda: u64,
    },
}

impl DeviceModel {
    pub fn parties(&self) -> usize {
        match self {
            DeviceModel::HonestQuantum { strategy, .. } => strategy.parties(),
            DeviceModel::DeterministicTable { rounds } => rounds.first().map_or(0, Vec::len),
            DeviceModel::Memory { parties, .. } => *parties,
        }
    }

    /// Constant table reproducing a local deterministic strategy.
    pub fn fixed(assignment: Vec<Vec<usize>>) -> Self {
        DeviceModel::DeterministicTable {
            rounds: vec![assignment],
        }
    }

    pub fn repeat_attack() -> Result<Self> {
        Ok(DeviceModel::Memory {
            program: Arc::new(RepeatAttack),
            honest: Some(canonical_strategy("ghz3")?),
            parties: 3,
            lambda: 0,
        })
    }

    /// Checks the model against the scenario a protocol plays.
    pub fn check(&self, scenario: &Scenario) -> Result<()> {
        if self.parties() != scenario.parties() {
            return Err(Error::Shape(format!(
                "device has {} components, protocol needs {}",
                self.parties(),
                scenario.parties()
            )));
        }
        let fits = |s: &QuantumStrategy| {
            s.measurements()
                .iter()
                .zip(scenario.inputs())
                .all(|(m, &k)| m.len() >= k)
        };
        match self {
            DeviceModel::HonestQuantum { strategy, noise } => {
                if !(0.0..=1.0).contains(noise) {
                    return Err(Error::Parameter(format!("noise {noise} outside [0, 1]")));
                }
                if !fits(strategy) {
                    return Err(Error::Shape("strategy has too few measurement settings".into()));
                }
            }
            DeviceModel::DeterministicTable { rounds } => {
                if rounds.is_empty() {
                    return Err(Error::Shape("deterministic table has no rounds".into()));
                }
                for t in rounds {
                    if t.len() != scenario.parties() {
                        return Err(Error::Shape("table round has the wrong party count".into()));
                    }
                    for (p, row) in t.iter().enumerate() {
                        if row.len() < scenario.inputs()[p]
                            || row.iter().any(|&o| o >= scenario.outputs()[p])
                        {
                            return Err(Error::Shape(format!("bad table row for party {p}")));
                        }
                    }
                }
            }
            DeviceModel::Memory { honest, .. } => {
                if let Some(s) = honest {
                    if s.parties() != scenario.parties() || !fits(s) {
                        return Err(Error::Shape("honest strategy does not fit the scenario".into()));
                    }
                }
            }
        }
        Ok(())
    }
}

/// A device instance: a model plus its history.
#[derive(Debug, Clone)]
pub struct Device {
    model: DeviceModel,
    behavior: Option<Behavior<f64>>,
    history: Vec<Round>,
    rounds: u64,
}

impl Device {
    pub fn new(model: DeviceModel) -> Self {
        let behavior = match &model {
            DeviceModel::HonestQuantum { strategy, .. } => Some(behavior_from_quantum(strategy)),
            DeviceModel::Memory { honest: Some(s), .. } => Some(behavior_from_quantum(s)),
            _ => None,
        };
        Self {
            model,
            behavior,
            history: Vec::new(),
            rounds: 0,
        }
    }

    pub fn model(&self) -> &DeviceModel {
        &self.model
    }

    pub fn rounds_played(&self) -> u64 {
        self.rounds
    }

    /// Rounds remembered by a memory device (empty for memoryless models).
    pub fn history(&self) -> &[Round] {
        &self.history
    }

    pub fn play<R: Rng + ?Sized>(&mut self, inputs: &[usize], rng: &mut R) -> Result<Vec<usize>> {
        if inputs.len() != self.model.parties() {
            return Err(Error::Shape(format!(
                "{} inputs for a {}-component device",
                inputs.len(),
                self.model.parties()
            )));
        }
        let outputs = match &self.model {
            DeviceModel::HonestQuantum { noise, .. } => {
                let mut a = sample_behavior(self.behavior.as_ref().expect("cached"), inputs, rng);
                if *noise > 0.0 {
                    for o in &mut a {
                        if rng.gen_bool(*noise) {
                            *o ^= 1;
                        }
                    }
                }
                a
            }
            DeviceModel::DeterministicTable { rounds } => {
                let t = &rounds[(self.rounds % rounds.len() as u64) as usize];
                inputs.iter().enumerate().map(|(p, &x)| t[p][x]).collect()
            }
            DeviceModel::Memory {
                program, lambda, ..
            } => {
                if program.honest_round(&self.history, *lambda) {
                    let Some(b) = self.behavior.as_ref() else {
                        return Err(Error::Parameter(
                            "program requested an honest round but has no strategy".into(),
                        ));
                    };
                    sample_behavior(b, inputs, rng)
                } else {
                    inputs
                        .iter()
                        .enumerate()
                        .map(|(p, &x)| program.respond(p, x, &self.history, *lambda))
                        .collect()
                }
            }
        };
        if matches!(self.model, DeviceModel::Memory { .. }) {
            self.history.push(Round {
                inputs: inputs.to_vec(),
                outputs: outputs.clone(),
            });
        }
        self.rounds += 1;
        Ok(outputs)
    }
}

fn sample_behavior<R: Rng + ?Sized>(b: &Behavior<f64>, inputs: &[usize], rng: &mut R) -> Vec<usize> {
    let s = b.scenario();
    let row = b.row(s.encode_inputs(inputs));
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut pick = row.len() - 1;
    for (i, &p) in row.iter().enumerate() {
        acc += p;
        if u < acc {
            pick = i;
            break;
        }
    }
    s.decode_outputs(pick)
}

/// Φ⁺ strategy over the four labelled settings `(A,0), (A,1), (B,0), (B,1)`.
///
/// Equal labels give perfectly correlated outputs, `(A,1)` against `(A,0)`
/// is uncorrelated, and Alice's `(A,x)` against Bob's `(B,y)` reproduces the
/// CHSH correlators.
pub fn vv_labelled_strategy() -> QuantumStrategy {
    let eq = Measurement::Equatorial;
    QuantumStrategy::unflagged(
        ghz_state(2),
        vec![
            vec![eq(0.0), eq(FRAC_PI_2), eq(FRAC_PI_4), eq(-FRAC_PI_4)],
            vec![eq(0.0), eq(-FRAC_PI_2), eq(-FRAC_PI_4), eq(FRAC_PI_4)],
        ],
    )
    .expect("valid strategy")
}

/// `vv4` or any name accepted by [`canonical_strategy`].
pub fn strategy_by_name(name: &str) -> Result<QuantumStrategy> {
    match name {
        "vv4" => Ok(vv_labelled_strategy()),
        other => canonical_strategy(other),
    }
}

/// Deterministic device attaining the local optimum of a built-in expression;
/// `vv4` maps to the all-zero device.
pub fn best_classical(expression: &str) -> Result<DeviceModel> {
    if expression == "vv4" {
        return Ok(DeviceModel::fixed(vec![vec![0; 4]; 2]));
    }
    let e = BellExpression::<f64>::builtin(expression)?;
    let (_, point) = e.local_bound(DEFAULT_ENUMERATION_CAP)?;
    Ok(DeviceModel::fixed(point.assignment))
}

/// Serializable device description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DeviceSpec {
    Honest {
        strategy: String,
        #[serde(default)]
        noise: f64,
    },
    Custom {
        strategy: QuantumStrategy,
        #[serde(default)]
        noise: f64,
    },
    Deterministic {
        rounds: Vec<Vec<Vec<usize>>>,
    },
    BestClassical {
        expression: String,
    },
    RepeatAttack,
}

impl DeviceSpec {
    pub fn build(&self) -> Result<DeviceModel> {
        match self {
            DeviceSpec::Honest { strategy, noise } => Ok(DeviceModel::HonestQuantum {
                strategy: strategy_by_name(strategy)?,
                noise: *noise,
            }),
            DeviceSpec::Custom { strategy, noise } => Ok(DeviceModel::HonestQuantum {
                strategy: strategy.clone(),
                noise: *noise,
            }),
            DeviceSpec::Deterministic { rounds } => Ok(DeviceModel::DeterministicTable {
                rounds: rounds.clone(),
            }),
            DeviceSpec::BestClassical { expression } => best_classical(expression),
            DeviceSpec::RepeatAttack => DeviceModel::repeat_attack(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn labelled_strategy_correlations() {
        let b = behavior_from_quantum(&vv_labelled_strategy());
        let same = |x: usize, y: usize| {
            let row = b.row(b.scenario().encode_inputs(&[x, y]));
            row[0] + row[3]
        };
        for x in 0..4 {
            assert!((same(x, x) - 1.0).abs() < 1e-12);
        }
        assert!((same(1, 0) - 0.5).abs() < 1e-12);
        let win = (std::f64::consts::PI / 8.0).cos().powi(2);
        assert!((same(0, 2) - win).abs() < 1e-12);
        assert!((same(1, 2) - win).abs() < 1e-12);
    }

    #[test]
    fn honest_device_matches_behavior() {
        let model = DeviceModel::HonestQuantum {
            strategy: canonical_strategy("chsh").unwrap(),
            noise: 0.0,
        };
        let mut d = Device::new(model);
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let n = 20_000;
        let agree = (0..n)
            .filter(|_| {
                let a = d.play(&[1, 1], &mut rng).unwrap();
                a[0] != a[1]
            })
            .count() as f64
            / n as f64;
        let expect = (std::f64::consts::PI / 8.0).cos().powi(2);
        assert!((agree - expect).abs() < 0.015, "{agree}");
        assert_eq!(d.rounds_played(), n as u64);
        assert!(d.history().is_empty());
    }

    #[test]
    fn full_noise_flips_every_bit() {
        let model = DeviceModel::HonestQuantum {
            strategy: canonical_strategy("ghz3").unwrap(),
            noise: 1.0,
        };
        let mut d = Device::new(model);
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        for _ in 0..100 {
            let a = d.play(&[1, 0, 0], &mut rng).unwrap();
            // Three flips change the parity, so the flipped device always loses.
            assert_eq!(a.iter().sum::<usize>() % 2, 1);
        }
    }

    #[test]
    fn tables_cycle_per_round() {
        let model = DeviceModel::DeterministicTable {
            rounds: vec![vec![vec![0, 1], vec![1, 1]], vec![vec![1, 1], vec![0, 0]]],
        };
        let mut d = Device::new(model);
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        assert_eq!(d.play(&[1, 0], &mut rng).unwrap(), vec![1, 1]);
        assert_eq!(d.play(&[1, 0], &mut rng).unwrap(), vec![1, 0]);
        assert_eq!(d.play(&[0, 0], &mut rng).unwrap(), vec![0, 1]);
        assert!(d.play(&[0], &mut rng).is_err());
    }

    #[test]
    fn repeat_attack_echoes() {
        let mut d = Device::new(DeviceModel::repeat_attack().unwrap());
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        for _ in 0..50 {
            let first = d.play(&[1, 1, 1], &mut rng).unwrap();
            let second = d.play(&[0, 0, 1], &mut rng).unwrap();
            assert_eq!(first, second);
        }
        assert_eq!(d.history().len(), 100);
    }

    #[derive(Debug)]
    struct Snoop;

    impl MemoryProgram for Snoop {
        fn respond(&self, party: usize, input: usize, past: &[Round], lambda: u64) -> usize {
            let h: usize = past.iter().flat_map(|r| r.inputs.iter().chain(&r.outputs)).sum();
            (party + input + h + lambda as usize) % 2
        }
    }

    fn counterfactual_replay(model: DeviceModel, seed: u64) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let parties = model.parties();
        let mut d = Device::new(model);
        for _ in 0..40 {
            let x: Vec<usize> = (0..parties).map(|_| rng.gen_range(0..2)).collect();
            let before = d.clone();
            let honest = match d.model() {
                DeviceModel::Memory { program, lambda, .. } => program.honest_round(d.history(), *lambda),
                _ => true,
            };
            let out = d.play(&x, &mut rng).unwrap();
            if honest {
                continue;
            }
            for p in 0..parties {
                for flip in 0..1usize << parties {
                    let mut y = x.clone();
                    for (q, v) in y.iter_mut().enumerate() {
                        if q != p && flip >> q & 1 == 1 {
                            *v ^= 1;
                        }
                    }
                    let mut replay = before.clone();
                    let alt = replay.play(&y, &mut rng).unwrap();
                    assert_eq!(alt[p], out[p], "party {p} saw another party's input");
                }
            }
        }
    }

    #[test]
    fn memory_programs_cannot_signal() {
        counterfactual_replay(DeviceModel::repeat_attack().unwrap(), 6);
        counterfactual_replay(
            DeviceModel::Memory {
                program: Arc::new(Snoop),
                honest: None,
                parties: 3,
                lambda: 7,
            },
            7,
        );
    }

    #[test]
    fn best_classical_devices() {
        for (name, parties) in [("chsh", 2), ("ghz_game", 3), ("mermin5", 5), ("brandao4", 4), ("vv4", 2)] {
            let m = best_classical(name).unwrap();
            assert_eq!(m.parties(), parties, "{name}");
        }
        let spec: DeviceSpec = serde_json::from_str(r#"{"kind":"honest","strategy":"vv4"}"#).unwrap();
        let m = spec.build().unwrap();
        m.check(&Scenario::new(vec![4, 4], vec![2, 2]).unwrap()).unwrap();
        assert!(m.check(&Scenario::binary(3, 2).unwrap()).is_err());
    }
}
