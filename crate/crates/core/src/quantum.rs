//! Pure multi-qubit states with binary measurements, one qubit per party.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, FRAC_PI_8};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::{Behavior, Scenario};

/// Largest supported party count (state dimension 64).
pub const MAX_PARTIES: usize = 6;

type Mat2 = [[Complex64; 2]; 2];

/// A ±1-valued observable on one qubit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Measurement {
    /// `cos θ σx + sin θ σy`.
    Equatorial(f64),
    /// Row-major matrix of `[re, im]` pairs.
    Matrix([[[f64; 2]; 2]; 2]),
}

impl Measurement {
    pub fn sigma_x() -> Self {
        Measurement::Equatorial(0.0)
    }

    pub fn sigma_y() -> Self {
        Measurement::Equatorial(FRAC_PI_2)
    }

    pub fn sigma_z() -> Self {
        Measurement::Matrix([[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [-1.0, 0.0]]])
    }

    pub fn matrix(&self) -> Mat2 {
        match self {
            Measurement::Equatorial(t) => {
                let off = Complex64::new(t.cos(), -t.sin());
                [[Complex64::new(0.0, 0.0), off], [off.conj(), Complex64::new(0.0, 0.0)]]
            }
            Measurement::Matrix(m) => {
                let c = |e: [f64; 2]| Complex64::new(e[0], e[1]);
                [[c(m[0][0]), c(m[0][1])], [c(m[1][0]), c(m[1][1])]]
            }
        }
    }

    fn check(&self) -> Result<()> {
        let m = self.matrix();
        let tol = 1e-9;
        let herm = (0..2).all(|i| (0..2).all(|j| (m[i][j] - m[j][i].conj()).norm() <= tol));
        if !herm {
            return Err(Error::Parameter("observable is not Hermitian".into()));
        }
        // Hermitian with M^2 = I means eigenvalues are exactly ±1.
        for i in 0..2 {
            for j in 0..2 {
                let sq = m[i][0] * m[0][j] + m[i][1] * m[1][j];
                let id = if i == j { 1.0 } else { 0.0 };
                if (sq - Complex64::new(id, 0.0)).norm() > tol {
                    return Err(Error::Parameter("observable does not square to identity".into()));
                }
            }
        }
        Ok(())
    }
}

/// Shared pure state plus per-party, per-input observables.
///
/// Outcome 0 is the +1 eigenspace unless the relabel flag for that
/// (party, input) is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawStrategy", into = "RawStrategy")]
pub struct QuantumStrategy {
    parties: usize,
    state: Vec<Complex64>,
    measurements: Vec<Vec<Measurement>>,
    flags: Vec<Vec<bool>>,
}

#[derive(Serialize, Deserialize)]
struct RawStrategy {
    state: Vec<[f64; 2]>,
    parties: usize,
    measurements: Vec<Vec<Measurement>>,
    #[serde(default)]
    flags: Vec<Vec<bool>>,
}

impl TryFrom<RawStrategy> for QuantumStrategy {
    type Error = Error;
    fn try_from(raw: RawStrategy) -> Result<Self> {
        let state = raw.state.iter().map(|p| Complex64::new(p[0], p[1])).collect();
        let flags = if raw.flags.is_empty() {
            raw.measurements.iter().map(|m| vec![false; m.len()]).collect()
        } else {
            raw.flags
        };
        let s = QuantumStrategy::new(state, raw.measurements, flags)?;
        if s.parties != raw.parties {
            return Err(Error::Shape("party count disagrees with state dimension".into()));
        }
        Ok(s)
    }
}

impl From<QuantumStrategy> for RawStrategy {
    fn from(s: QuantumStrategy) -> Self {
        RawStrategy {
            state: s.state.iter().map(|c| [c.re, c.im]).collect(),
            parties: s.parties,
            measurements: s.measurements,
            flags: s.flags,
        }
    }
}

impl QuantumStrategy {
    pub fn new(
        state: Vec<Complex64>,
        measurements: Vec<Vec<Measurement>>,
        flags: Vec<Vec<bool>>,
    ) -> Result<Self> {
        let parties = measurements.len();
        if parties == 0 || parties > MAX_PARTIES {
            return Err(Error::Shape(format!("need 1..={MAX_PARTIES} parties")));
        }
        if state.len() != 1 << parties {
            return Err(Error::Shape(format!(
                "state has dimension {}, expected {}",
                state.len(),
                1 << parties
            )));
        }
        let norm: f64 = state.iter().map(|c| c.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::Parameter(format!("state norm squared is {norm}")));
        }
        if flags.len() != parties || flags.iter().zip(&measurements).any(|(f, m)| f.len() != m.len())
        {
            return Err(Error::Shape("one relabel flag per (party, input) required".into()));
        }
        for m in measurements.iter().flatten() {
            m.check()?;
        }
        if measurements.iter().any(|m| m.is_empty()) {
            return Err(Error::Shape("every party needs at least one input".into()));
        }
        Ok(Self {
            parties,
            state,
            measurements,
            flags,
        })
    }

    /// Strategy without relabelling.
    pub fn unflagged(state: Vec<Complex64>, measurements: Vec<Vec<Measurement>>) -> Result<Self> {
        let flags = measurements.iter().map(|m| vec![false; m.len()]).collect();
        Self::new(state, measurements, flags)
    }

    pub fn parties(&self) -> usize {
        self.parties
    }

    pub fn state(&self) -> &[Complex64] {
        &self.state
    }

    pub fn flags(&self) -> &[Vec<bool>] {
        &self.flags
    }

    pub fn measurements(&self) -> &[Vec<Measurement>] {
        &self.measurements
    }

    pub fn set_flag(&mut self, party: usize, input: usize, value: bool) {
        self.flags[party][input] = value;
    }

    pub fn scenario(&self) -> Scenario {
        Scenario::new(
            self.measurements.iter().map(|m| m.len()).collect(),
            vec![2; self.parties],
        )
        .expect("validated on construction")
    }

    /// `<ψ| ⊗_p M_p(x_p) |ψ>`, sign-adjusted for relabel flags.
    pub fn parity_expectation(&self, inputs: &[usize]) -> f64 {
        let mut phi = self.state.clone();
        let mut sign = 1.0;
        for (p, &x) in inputs.iter().enumerate() {
            phi = apply_qubit(&phi, self.parties, p, &self.measurements[p][x].matrix());
            if self.flags[p][x] {
                sign = -sign;
            }
        }
        let inner: Complex64 = self.state.iter().zip(&phi).map(|(a, b)| a.conj() * b).sum();
        sign * inner.re
    }
}

/// Applies a 2x2 operator to the qubit of `party` (party 0 is the most
/// significant bit of the basis index).
fn apply_qubit(state: &[Complex64], parties: usize, party: usize, m: &Mat2) -> Vec<Complex64> {
    let bit = 1 << (parties - 1 - party);
    let mut out = vec![Complex64::new(0.0, 0.0); state.len()];
    for i in 0..state.len() {
        if i & bit != 0 {
            continue;
        }
        let (a0, a1) = (state[i], state[i | bit]);
        out[i] = m[0][0] * a0 + m[0][1] * a1;
        out[i | bit] = m[1][0] * a0 + m[1][1] * a1;
    }
    out
}

fn projector(m: &Mat2, outcome_sign: f64) -> Mat2 {
    let h = Complex64::new(0.5, 0.0);
    let s = Complex64::new(0.5 * outcome_sign, 0.0);
    [
        [h + s * m[0][0], s * m[0][1]],
        [s * m[1][0], h + s * m[1][1]],
    ]
}

/// Born-rule behavior of the strategy.
pub fn behavior_from_quantum(qs: &QuantumStrategy) -> Behavior<f64> {
    let scenario = qs.scenario();
    let n = qs.parties;
    let n_out = scenario.num_output_tuples();
    let mut table = Vec::with_capacity(scenario.table_len());
    for i in 0..scenario.num_input_tuples() {
        let x = scenario.decode_inputs(i);
        let mut row = vec![0.0; n_out];
        project_outcomes(qs, &x, 0, qs.state.clone(), 0, &mut row, n);
        table.extend(row);
    }
    Behavior::new(scenario, table).expect("dimensions follow the scenario")
}

fn project_outcomes(
    qs: &QuantumStrategy,
    x: &[usize],
    party: usize,
    phi: Vec<Complex64>,
    prefix: usize,
    row: &mut [f64],
    n: usize,
) {
    if party == n {
        row[prefix] = phi.iter().map(|c| c.norm_sqr()).sum();
        return;
    }
    let m = qs.measurements[party][x[party]].matrix();
    let flip = qs.flags[party][x[party]];
    for a in 0..2 {
        let eigen = if (a == 1) != flip { -1.0 } else { 1.0 };
        let next = apply_qubit(&phi, n, party, &projector(&m, eigen));
        project_outcomes(qs, x, party + 1, next, prefix * 2 + a, row, n);
    }
}

/// `(|0…0> + |1…1>)/√2` on `parties` qubits.
pub fn ghz_state(parties: usize) -> Vec<Complex64> {
    let mut s = vec![Complex64::new(0.0, 0.0); 1 << parties];
    s[0] = Complex64::new(FRAC_1_SQRT_2, 0.0);
    s[(1 << parties) - 1] = Complex64::new(FRAC_1_SQRT_2, 0.0);
    s
}

/// Closed form of the parity expectation of equatorial measurements on the
/// GHZ state: `cos(Σθ)`.
pub fn ghz_parity_expectation(angles: &[f64]) -> f64 {
    angles.iter().sum::<f64>().cos()
}

/// Named strategies reaching the quantum values of the built-in expressions.
pub fn canonical_strategy(name: &str) -> Result<QuantumStrategy> {
    let eq = Measurement::Equatorial;
    match name {
        "chsh" | "chsh_game" => QuantumStrategy::unflagged(
            ghz_state(2),
            vec![vec![eq(0.0), eq(FRAC_PI_2)], vec![eq(-FRAC_PI_4), eq(FRAC_PI_4)]],
        ),
        "ghz3" | "ghz_game" => {
            // Input 0 measures σy, input 1 measures σx; party 0 relabels every outcome.
            let m = vec![eq(FRAC_PI_2), eq(0.0)];
            QuantumStrategy::new(
                ghz_state(3),
                vec![m.clone(), m.clone(), m],
                vec![vec![true, true], vec![false, false], vec![false, false]],
            )
        }
        "mermin5" => QuantumStrategy::unflagged(ghz_state(5), vec![vec![eq(FRAC_PI_2), eq(0.0)]; 5]),
        "brandao4" => QuantumStrategy::unflagged(
            ghz_state(4),
            vec![vec![eq(3.0 * FRAC_PI_8), eq(-FRAC_PI_8)]; 4],
        ),
        other => Err(Error::UnknownName(other.to_string())),
    }
}
