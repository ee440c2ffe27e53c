//! Decision rules for agents.
//!
//! These rules are the deterministic (or seeded-stochastic) stand-in for a
//! conversational backend: averaging with or without one's own state,
//! adopting the most common observed position, refusing to move, or
//! occasionally hallucinating a target.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;
use crate::state::State;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StrategyError {
    #[error("invalid observation: {0}")]
    InvalidObservation(String),
    #[error("invalid strategy spec: {0}")]
    InvalidSpec(String),
}

/// The decision rule an agent runs each round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    /// Move to the mean of own state and all observed states.
    AverageIncludeSelf,
    /// Move to the mean of observed states only.
    AverageExcludeSelf,
    /// Adopt the most frequent observed state.
    Suggestible,
    /// Never move.
    Stubborn,
    /// Sometimes pick a random target instead of the wrapped rule.
    Erroneous,
}

/// A decision rule plus its noise and hallucination parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct StrategySpec<S> {
    pub kind: StrategyKind,
    /// Standard deviation of additive Gaussian perturbation, in state units.
    #[serde(default = "zero")]
    pub noise_sigma: S,
    /// Probability of hallucinating a uniform random target (Erroneous only).
    #[serde(default)]
    pub hallucination_rate: f64,
    /// Rule Erroneous falls back to when not hallucinating.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wrapped: Option<StrategyKind>,
}

fn zero<S: Scalar>() -> S {
    S::zero()
}

/// Hallucinated targets are drawn uniformly from the problem's state range.
pub const HALLUCINATION_RANGE: (f64, f64) = (0.0, 100.0);

impl<S: Scalar> StrategySpec<S> {
    pub fn new(kind: StrategyKind) -> Self {
        Self {
            kind,
            noise_sigma: S::zero(),
            hallucination_rate: 0.0,
            wrapped: None,
        }
    }

    pub fn with_noise(mut self, sigma: S) -> Self {
        self.noise_sigma = sigma;
        self
    }

    pub fn erroneous(wrapped: StrategyKind, rate: f64) -> Self {
        Self {
            kind: StrategyKind::Erroneous,
            noise_sigma: S::zero(),
            hallucination_rate: rate,
            wrapped: Some(wrapped),
        }
    }

    pub fn validate(&self) -> Result<(), StrategyError> {
        if !(self.noise_sigma >= S::zero() && self.noise_sigma.is_finite()) {
            return Err(StrategyError::InvalidSpec(format!(
                "noise_sigma must be finite and >= 0, got {}",
                self.noise_sigma
            )));
        }
        if !(0.0..=1.0).contains(&self.hallucination_rate) {
            return Err(StrategyError::InvalidSpec(format!(
                "hallucination_rate must be in [0, 1], got {}",
                self.hallucination_rate
            )));
        }
        match (self.kind, self.wrapped) {
            (StrategyKind::Erroneous, None) => Err(StrategyError::InvalidSpec(
                "erroneous strategy requires a wrapped rule".into(),
            )),
            (StrategyKind::Erroneous, Some(StrategyKind::Erroneous)) => Err(
                StrategyError::InvalidSpec("erroneous cannot wrap itself".into()),
            ),
            (StrategyKind::Erroneous, Some(_)) => Ok(()),
            (_, Some(_)) => Err(StrategyError::InvalidSpec(
                "wrapped rule is only meaningful for the erroneous strategy".into(),
            )),
            (_, None) => Ok(()),
        }
    }
}

/// What an agent sees at the start of a round: its own state and the states
/// of the agents it observes, ordered by ascending agent index.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation<S> {
    pub self_state: State<S>,
    pub neighbor_states: Vec<State<S>>,
    pub round: usize,
}

impl<S: Scalar> Observation<S> {
    pub fn validate(&self) -> Result<(), StrategyError> {
        if !self.self_state.is_finite() {
            return Err(StrategyError::InvalidObservation(
                "own state is not finite".into(),
            ));
        }
        let dim = self.self_state.dimension();
        for (i, s) in self.neighbor_states.iter().enumerate() {
            if !s.is_finite() {
                return Err(StrategyError::InvalidObservation(format!(
                    "neighbor state {i} is not finite"
                )));
            }
            if s.dimension() != dim {
                return Err(StrategyError::InvalidObservation(format!(
                    "neighbor state {i} has dimension {} but own state has {}",
                    s.dimension().size(),
                    dim.size()
                )));
            }
        }
        Ok(())
    }
}

/// Outcome of one decision: the chosen state and the rule that produced it
/// (for Erroneous, whichever branch actually ran).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrategyDecision<S> {
    pub position: State<S>,
    pub applied: StrategyKind,
}

/// Run one decision. With `noise_sigma = 0` and a non-erroneous rule this is
/// a pure function of the observation; the RNG is only touched for noise and
/// hallucination draws.
pub fn decide<S: Scalar, R: Rng + ?Sized>(
    spec: &StrategySpec<S>,
    obs: &Observation<S>,
    rng: &mut R,
) -> Result<State<S>, StrategyError> {
    decide_detailed(spec, obs, rng).map(|d| d.position)
}

pub fn decide_detailed<S: Scalar, R: Rng + ?Sized>(
    spec: &StrategySpec<S>,
    obs: &Observation<S>,
    rng: &mut R,
) -> Result<StrategyDecision<S>, StrategyError> {
    spec.validate()?;
    obs.validate()?;

    let (raw, applied) = match spec.kind {
        StrategyKind::AverageIncludeSelf => (
            State::mean_of(std::iter::once(&obs.self_state).chain(&obs.neighbor_states))
                .expect("at least own state present"),
            StrategyKind::AverageIncludeSelf,
        ),
        StrategyKind::AverageExcludeSelf => (
            State::mean_of(&obs.neighbor_states).unwrap_or(obs.self_state),
            StrategyKind::AverageExcludeSelf,
        ),
        StrategyKind::Suggestible => (modal_state(obs), StrategyKind::Suggestible),
        StrategyKind::Stubborn => {
            // Stubbornness means no movement: no noise, state returned as-is.
            return Ok(StrategyDecision {
                position: obs.self_state,
                applied: StrategyKind::Stubborn,
            });
        }
        StrategyKind::Erroneous => {
            let wrapped = spec.wrapped.expect("validated above");
            if rng.gen::<f64>() < spec.hallucination_rate {
                let low = S::from_f64(HALLUCINATION_RANGE.0).unwrap();
                let high = S::from_f64(HALLUCINATION_RANGE.1).unwrap();
                let target = obs.self_state.map(|_| S::sample_uniform(rng, low, high));
                (target, StrategyKind::Erroneous)
            } else {
                let inner = StrategySpec {
                    kind: wrapped,
                    noise_sigma: spec.noise_sigma,
                    hallucination_rate: 0.0,
                    wrapped: None,
                };
                return decide_detailed(&inner, obs, rng);
            }
        }
    };

    let position = if spec.noise_sigma > S::zero() {
        raw.map(|v| v + spec.noise_sigma * S::sample_std_normal(rng))
    } else {
        raw
    };
    Ok(StrategyDecision { position, applied })
}

/// Componentwise modal value of the observed states. Ties go to the candidate
/// nearest the agent's own component, then to the smallest value.
fn modal_state<S: Scalar>(obs: &Observation<S>) -> State<S> {
    if obs.neighbor_states.is_empty() {
        return obs.self_state;
    }
    let dim = obs.self_state.dimension();
    let parts: Vec<S> = obs
        .self_state
        .components()
        .iter()
        .enumerate()
        .map(|(axis, &own)| {
            let mut values: Vec<S> = obs
                .neighbor_states
                .iter()
                .map(|s| s.components()[axis])
                .collect();
            values.sort_by(|a, b| a.partial_cmp(b).expect("states validated finite"));
            modal_component(&values, own)
        })
        .collect();
    State::from_components(dim, &parts)
}

fn modal_component<S: Scalar>(sorted: &[S], own: S) -> S {
    let mut best: Option<(usize, S)> = None; // (count, value)
    let mut i = 0;
    while i < sorted.len() {
        let value = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == value {
            j += 1;
        }
        let count = j - i;
        let replace = match best {
            None => true,
            Some((best_count, best_value)) => {
                count > best_count
                    || (count == best_count && {
                        let d_new = (value - own).abs();
                        let d_best = (best_value - own).abs();
                        d_new < d_best || (d_new == d_best && value < best_value)
                    })
            }
        };
        if replace {
            best = Some((count, value));
        }
        i = j;
    }
    best.expect("non-empty neighbor list").1
}

/// One-line reasoning the strategy backend reports for each rule.
pub fn reasoning_sentence(kind: StrategyKind) -> &'static str {
    match kind {
        StrategyKind::AverageIncludeSelf => {
            "Moving to the average of my position and the positions I can observe."
        }
        StrategyKind::AverageExcludeSelf => "Moving to the average of the positions I can observe.",
        StrategyKind::Suggestible => {
            "Moving to the position where most of the agents I can observe are."
        }
        StrategyKind::Stubborn => "Staying at my current position.",
        StrategyKind::Erroneous => "Moving to where I believe the other agents will gather.",
    }
}

/// Canonical two-part reply format shared by the strategy backend and the
/// offline mock endpoint, so both produce identical records.
pub fn canonical_reply<S: Scalar>(sentence: &str, position: &State<S>) -> String {
    format!("Reasoning: {sentence}\nPosition: {position}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn obs(self_state: f64, neighbors: &[f64]) -> Observation<f64> {
        Observation {
            self_state: State::Scalar(self_state),
            neighbor_states: neighbors.iter().map(|&v| State::Scalar(v)).collect(),
            round: 0,
        }
    }

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(42)
    }

    #[test]
    fn average_include_self() {
        let spec = StrategySpec::new(StrategyKind::AverageIncludeSelf);
        let got = decide(&spec, &obs(20.0, &[80.0]), &mut rng()).unwrap();
        assert_eq!(got, State::Scalar(50.0));

        // isolated agent keeps its state
        let got = decide(&spec, &obs(33.0, &[]), &mut rng()).unwrap();
        assert_eq!(got, State::Scalar(33.0));
    }

    #[test]
    fn average_exclude_self() {
        let spec = StrategySpec::new(StrategyKind::AverageExcludeSelf);
        let got = decide(&spec, &obs(10.0, &[30.0, 50.0]), &mut rng()).unwrap();
        assert_eq!(got, State::Scalar(40.0));

        let got = decide(&spec, &obs(10.0, &[]), &mut rng()).unwrap();
        assert_eq!(got, State::Scalar(10.0));
    }

    #[test]
    fn suggestible_majority_and_swap() {
        let spec = StrategySpec::new(StrategyKind::Suggestible);
        let got = decide(&spec, &obs(0.0, &[70.0, 70.0, 20.0]), &mut rng()).unwrap();
        assert_eq!(got, State::Scalar(70.0));

        // two-agent case adopts the other state
        let got = decide(&spec, &obs(10.0, &[90.0]), &mut rng()).unwrap();
        assert_eq!(got, State::Scalar(90.0));
        let got = decide(&spec, &obs(90.0, &[10.0]), &mut rng()).unwrap();
        assert_eq!(got, State::Scalar(10.0));
    }

    #[test]
    fn suggestible_tie_breaks() {
        let spec = StrategySpec::new(StrategyKind::Suggestible);
        // all counts equal: nearest to self wins
        let got = decide(&spec, &obs(24.0, &[10.0, 20.0, 90.0]), &mut rng()).unwrap();
        assert_eq!(got, State::Scalar(20.0));
        // equal distance: smaller value wins
        let got = decide(&spec, &obs(50.0, &[40.0, 60.0]), &mut rng()).unwrap();
        assert_eq!(got, State::Scalar(40.0));
    }

    #[test]
    fn stubborn_identity_ignores_noise() {
        let spec = StrategySpec::new(StrategyKind::Stubborn).with_noise(5.0);
        let got = decide(&spec, &obs(33.0, &[1.0, 2.0, 3.0]), &mut rng()).unwrap();
        assert_eq!(got, State::Scalar(33.0));
    }

    #[test]
    fn erroneous_rate_zero_matches_wrapped() {
        let spec = StrategySpec::erroneous(StrategyKind::AverageIncludeSelf, 0.0);
        let wrapped = StrategySpec::new(StrategyKind::AverageIncludeSelf);
        let a = decide(&spec, &obs(20.0, &[80.0]), &mut rng()).unwrap();
        let b = decide(&wrapped, &obs(20.0, &[80.0]), &mut rng()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn erroneous_rate_one_is_uniform() {
        // chi-square over 20 equal bins, 10_000 draws, 1% significance.
        // Critical value for 19 degrees of freedom at p = 0.01 is 36.191.
        let spec = StrategySpec::erroneous(StrategyKind::AverageIncludeSelf, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut bins = [0usize; 20];
        let observation = obs(50.0, &[10.0, 90.0]);
        for _ in 0..10_000 {
            let State::Scalar(v) = decide(&spec, &observation, &mut rng).unwrap() else {
                panic!("scalar expected");
            };
            assert!((0.0..=100.0).contains(&v));
            let bin = ((v / 5.0) as usize).min(19);
            bins[bin] += 1;
        }
        let expected = 10_000.0 / 20.0;
        let chi2: f64 = bins
            .iter()
            .map(|&o| {
                let d = o as f64 - expected;
                d * d / expected
            })
            .sum();
        assert!(chi2 < 36.191, "chi-square statistic too large: {chi2}");
    }

    #[test]
    fn planar_rules_apply_componentwise() {
        let spec = StrategySpec::new(StrategyKind::AverageIncludeSelf);
        let observation = Observation {
            self_state: State::Planar([0.0, 10.0]),
            neighbor_states: vec![State::Planar([10.0, 30.0])],
            round: 0,
        };
        let got = decide(&spec, &observation, &mut rng()).unwrap();
        assert_eq!(got, State::Planar([5.0, 20.0]));
    }

    #[test]
    fn non_finite_observation_rejected() {
        let spec = StrategySpec::new(StrategyKind::AverageIncludeSelf);
        let bad = obs(f64::NAN, &[1.0]);
        assert!(matches!(
            decide(&spec, &bad, &mut rng()),
            Err(StrategyError::InvalidObservation(_))
        ));
    }

    #[test]
    fn spec_validation() {
        let mut spec = StrategySpec::<f64>::new(StrategyKind::Erroneous);
        assert!(spec.validate().is_err());
        spec.wrapped = Some(StrategyKind::Erroneous);
        assert!(spec.validate().is_err());
        spec.wrapped = Some(StrategyKind::Stubborn);
        assert!(spec.validate().is_ok());

        let bad_noise = StrategySpec::new(StrategyKind::Stubborn).with_noise(-1.0);
        assert!(bad_noise.validate().is_err());
    }

    #[test]
    fn sigma_zero_is_pure() {
        let spec = StrategySpec::new(StrategyKind::AverageExcludeSelf);
        let observation = obs(12.5, &[40.0, 41.0, 40.0]);
        let a = decide(&spec, &observation, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let b = decide(&spec, &observation, &mut ChaCha8Rng::seed_from_u64(999)).unwrap();
        assert_eq!(a, b);
    }
}
