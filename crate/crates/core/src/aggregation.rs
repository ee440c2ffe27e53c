//! Planar multi-robot aggregation: a slow consensus planner feeding targets
//! to a fast proportional tracking controller over single-integrator robots.

use rand::SeedableRng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::{AgentBackend, BackendFactory};
use crate::config::{BackendSpec, ConfigError};
use crate::scalar::Scalar;
use crate::seed;
use crate::state::State;
use crate::strategy::Observation;
use crate::topology::{TopologyError, TopologySpec};

#[derive(Debug, Error)]
pub enum AggregationError {
    #[error("robot count must be at least 1")]
    NoRobots,
    #[error(
        "planner list has {got} entries but there are {robots} robots (fields: planners, robots)"
    )]
    PlannerCount { got: usize, robots: usize },
    #[error("initial_positions has {got} entries but there are {robots} robots (fields: initial_positions, robots)")]
    InitialPositionCount { got: usize, robots: usize },
    #[error("timing invalid: {0}")]
    Timing(String),
    #[error("controller gains invalid: {0}")]
    Gains(String),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("robot {robot}: planner backend could not be created: {source}")]
    PlannerCreation {
        robot: usize,
        source: crate::backend::BackendError,
    },
}

/// Kinematic state of one robot plus its current planner output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotState<S> {
    pub position: [S; 2],
    pub target: [S; 2],
    pub velocity_command: [S; 2],
}

/// Loop periods for the planner (slow) and controller (fast).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimTimingConfig<S> {
    /// Seconds between planner updates.
    pub planner_period: S,
    /// Seconds between controller updates.
    pub controller_period: S,
    /// Total simulated duration in seconds.
    pub t_end: S,
}

impl<S: Scalar> SimTimingConfig<S> {
    /// Controller steps per planner tick; errors unless the planner period is
    /// an integer multiple of the controller period.
    pub fn steps_per_planner_tick(&self) -> Result<usize, AggregationError> {
        let zero = S::zero();
        if !(self.controller_period > zero && self.controller_period.is_finite()) {
            return Err(AggregationError::Timing(
                "controller_period must be positive and finite".into(),
            ));
        }
        if self.planner_period < self.controller_period {
            return Err(AggregationError::Timing(
                "planner_period must be at least controller_period".into(),
            ));
        }
        if !(self.t_end > zero && self.t_end.is_finite()) {
            return Err(AggregationError::Timing("t_end must be positive".into()));
        }
        let ratio = self.planner_period / self.controller_period;
        let steps = ratio.round();
        let tolerance = S::from_f64(1e-9).unwrap() * ratio;
        if (ratio - steps).abs() > tolerance {
            return Err(AggregationError::Timing(format!(
                "planner_period ({}) must be an integer multiple of controller_period ({})",
                self.planner_period, self.controller_period
            )));
        }
        Ok(steps.to_usize().expect("small step ratio"))
    }

    pub fn total_steps(&self) -> Result<usize, AggregationError> {
        self.steps_per_planner_tick()?;
        let steps = (self.t_end / self.controller_period + S::from_f64(1e-9).unwrap()).floor();
        Ok(steps.to_usize().expect("bounded step count"))
    }
}

/// One proportional control update with speed saturation over a single
/// integrator: `v = k_p (target - position)` clipped to `v_max`, then
/// `position += v dt`.
pub fn controller_step<S: Scalar>(state: &RobotState<S>, k_p: S, v_max: S, dt: S) -> RobotState<S> {
    let mut v = [
        k_p * (state.target[0] - state.position[0]),
        k_p * (state.target[1] - state.position[1]),
    ];
    let speed = (v[0] * v[0] + v[1] * v[1]).sqrt();
    if speed > v_max {
        let scale = v_max / speed;
        v = [v[0] * scale, v[1] * scale];
    }
    RobotState {
        position: [state.position[0] + v[0] * dt, state.position[1] + v[1] * dt],
        target: state.target,
        velocity_command: v,
    }
}

/// One sampled point of the trajectory log, at controller resolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint<S> {
    pub time: S,
    pub robot: usize,
    pub x: S,
    pub y: S,
    pub target_x: S,
    pub target_y: S,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct AggregationConfig<S> {
    pub robots: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_positions: Option<Vec<[S; 2]>>,
    /// Range initial positions are drawn from when not given explicitly.
    pub init_range: [S; 2],
    /// One planner backend per robot.
    pub planners: Vec<BackendSpec<S>>,
    pub timing: SimTimingConfig<S>,
    #[serde(default)]
    pub topology: TopologySpec,
    pub seed: u64,
    /// Proportional gain, 1/second.
    pub k_p: S,
    /// Speed cap, units/second.
    pub v_max: S,
}

impl<S: Scalar> AggregationConfig<S> {
    pub fn validate(&self) -> Result<(), AggregationError> {
        if self.robots == 0 {
            return Err(AggregationError::NoRobots);
        }
        if self.planners.len() != self.robots {
            return Err(AggregationError::PlannerCount {
                got: self.planners.len(),
                robots: self.robots,
            });
        }
        if let Some(positions) = &self.initial_positions {
            if positions.len() != self.robots {
                return Err(AggregationError::InitialPositionCount {
                    got: positions.len(),
                    robots: self.robots,
                });
            }
        }
        if !(self.k_p > S::zero() && self.k_p.is_finite()) {
            return Err(AggregationError::Gains(
                "k_p must be positive and finite".into(),
            ));
        }
        if !(self.v_max > S::zero()) {
            return Err(AggregationError::Gains("v_max must be positive".into()));
        }
        self.timing.total_steps()?;
        self.topology.build(self.robots)?;
        Ok(())
    }
}

/// Run the aggregation simulation and return the trajectory log sampled on
/// the controller grid `{0, dt, 2dt, ...}`.
///
/// The planner re-targets every planner period, reading the positions all
/// robots hold at that instant; between ticks targets are constant. A planner
/// failure leaves that robot's previous target in place.
pub fn run_aggregation<S: Scalar>(
    config: &AggregationConfig<S>,
    factory: &dyn BackendFactory<S>,
) -> Result<Vec<TrajectoryPoint<S>>, AggregationError> {
    config.validate()?;
    let topology = config.topology.build(config.robots)?;
    let steps_per_tick = config.timing.steps_per_planner_tick()?;
    let total_steps = config.timing.total_steps()?;
    let dt = config.timing.controller_period;

    let run_seed = seed::experiment_seed(config.seed, 0);
    let mut planners: Vec<Box<dyn AgentBackend<S>>> = config
        .planners
        .iter()
        .enumerate()
        .map(|(k, spec)| {
            factory
                .create(k, spec, seed::agent_seed(run_seed, k))
                .map_err(|source| AggregationError::PlannerCreation { robot: k, source })
        })
        .collect::<Result<_, _>>()?;

    let initial_positions: Vec<[S; 2]> = match &config.initial_positions {
        Some(positions) => positions.clone(),
        None => {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed::init_seed(run_seed));
            let [low, high] = config.init_range;
            (0..config.robots)
                .map(|_| {
                    let x = S::sample_uniform(&mut rng, low, high);
                    let y = S::sample_uniform(&mut rng, low, high);
                    [x, y]
                })
                .collect()
        }
    };

    let mut robots: Vec<RobotState<S>> = initial_positions
        .iter()
        .map(|&p| RobotState {
            position: p,
            target: p,
            velocity_command: [S::zero(), S::zero()],
        })
        .collect();

    let mut log = Vec::with_capacity((total_steps + 1) * config.robots);
    let mut tick = 0usize;
    for step in 0..=total_steps {
        if step % steps_per_tick == 0 {
            let snapshot: Vec<State<S>> =
                robots.iter().map(|r| State::Planar(r.position)).collect();
            let targets: Vec<[S; 2]> = planners
                .iter_mut()
                .enumerate()
                .map(|(k, planner)| {
                    let obs = Observation {
                        self_state: snapshot[k],
                        neighbor_states: topology.neighbors_of(k).map(|j| snapshot[j]).collect(),
                        round: tick,
                    };
                    match planner.decide(&obs) {
                        Ok(decision) => match decision.position {
                            State::Planar(p) => p,
                            State::Scalar(v) => [v, v],
                        },
                        Err(_) => robots[k].target,
                    }
                })
                .collect();
            for (robot, target) in robots.iter_mut().zip(targets) {
                robot.target = target;
            }
            tick += 1;
        }

        let time = S::of_usize(step) * dt;
        for (k, robot) in robots.iter().enumerate() {
            log.push(TrajectoryPoint {
                time,
                robot: k,
                x: robot.position[0],
                y: robot.position[1],
                target_x: robot.target[0],
                target_y: robot.target[1],
            });
        }

        if step < total_steps {
            for robot in robots.iter_mut() {
                *robot = controller_step(robot, config.k_p, config.v_max, dt);
            }
        }
    }
    Ok(log)
}
