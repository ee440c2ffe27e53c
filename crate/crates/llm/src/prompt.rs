//! Prompt templates for the conversational agents.
//!
//! Three templates: a role prompt with an optional personality clause, the
//! opening request (round 0), and the follow-up request for later rounds.
//! The opening and follow-up each have a two-agent and a many-agent variant;
//! the two-agent wording is used exactly when the agent observes a single
//! neighbor. Values are substituted with their shortest decimal form, planar
//! states as `[x, y]`.

use consensus_core::{Observation, Personality, Scalar, State};

pub const ROLE_BASE: &str = "You are an agent moving in a one-dimensional space.";

pub const PERSONALITY_STUBBORN: &str =
    "You are an extremely stubborn person, prefer to remain stationary.";

pub const PERSONALITY_SUGGESTIBLE: &str =
    "You are an extremely suggestible person, prefer to move to someone else's position.";

/// Render the role (system) prompt. An empty personality leaves no trailing
/// placeholder or whitespace behind.
pub fn render_role_prompt(personality: Personality) -> String {
    match personality {
        Personality::None => ROLE_BASE.to_string(),
        Personality::Stubborn => format!("{ROLE_BASE} {PERSONALITY_STUBBORN}"),
        Personality::Suggestible => format!("{ROLE_BASE} {PERSONALITY_SUGGESTIBLE}"),
    }
}

fn format_state_list<S: Scalar>(states: &[State<S>]) -> String {
    let inner = states
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
        .join(", ");
    format!("[{inner}]")
}

/// Render the per-round user prompt from what the agent observes.
pub fn render_round_prompt<S: Scalar>(obs: &Observation<S>) -> String {
    let own = obs.self_state.to_string();
    let two_agent = obs.neighbor_states.len() == 1;
    if obs.round == 0 {
        if two_agent {
            let other = obs.neighbor_states[0].to_string();
            format!(
                "Another agent is present in the space, and you need to gather. \
                 Your position is: {own} and the other agent's position is: {other}. \
                 You need to choose a position to move to in order to gather, and \
                 briefly explain the reasoning behind your decision."
            )
        } else {
            let others = format_state_list(&obs.neighbor_states);
            format!(
                "There are many other agents in the space, you all need to gather at \
                 the same position, your position is: {own}, other people's positions \
                 are: {others}. You need to choose a position to move to in order to \
                 gather, and briefly explain the reasoning behind your decision."
            )
        }
    } else if two_agent {
        let other = obs.neighbor_states[0].to_string();
        format!(
            "You have moved to {own}, and the latest position of another agent is: \
             {other}, please choose the position you want to move to next."
        )
    } else {
        let others = format_state_list(&obs.neighbor_states);
        format!(
            "You have now moved to {own}, the positions of other agents are {others}, \
             please choose the position you want to move to next"
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obs(round: usize, own: f64, neighbors: &[f64]) -> Observation<f64> {
        Observation {
            self_state: State::Scalar(own),
            neighbor_states: neighbors.iter().map(|&v| State::Scalar(v)).collect(),
            round,
        }
    }

    #[test]
    fn role_prompt_variants() {
        assert_eq!(
            render_role_prompt(Personality::None),
            "You are an agent moving in a one-dimensional space."
        );
        assert!(render_role_prompt(Personality::Stubborn).ends_with("prefer to remain stationary."));
        assert!(render_role_prompt(Personality::Suggestible)
            .ends_with("prefer to move to someone else's position."));
        assert!(!render_role_prompt(Personality::None).contains('['));
    }

    #[test]
    fn opening_two_agent_substitution() {
        let text = render_round_prompt(&obs(0, 20.0, &[80.0]));
        assert!(text.contains("Your position is: 20"));
        assert!(text.contains("the other agent's position is: 80"));
    }

    #[test]
    fn later_multi_agent_substitution() {
        let text = render_round_prompt(&obs(2, 50.0, &[40.0, 60.0, 70.0]));
        assert!(text.contains("You have now moved to 50"));
        assert!(text.contains("positions of other agents are [40, 60, 70]"));
    }

    #[test]
    fn variant_selection_follows_neighbor_count() {
        assert!(render_round_prompt(&obs(0, 1.0, &[2.0])).starts_with("Another agent"));
        assert!(render_round_prompt(&obs(0, 1.0, &[2.0, 3.0]))
            .starts_with("There are many other agents"));
        assert!(render_round_prompt(&obs(3, 1.0, &[2.0])).starts_with("You have moved to"));
        assert!(render_round_prompt(&obs(3, 1.0, &[2.0, 3.0])).starts_with("You have now moved to"));
    }

    #[test]
    fn planar_states_render_bracketed() {
        let observation = Observation {
            self_state: State::Planar([1.5f64, 2.0]),
            neighbor_states: vec![State::Planar([3.0, 4.0]), State::Planar([5.0, 6.5])],
            round: 1,
        };
        let text = render_round_prompt(&observation);
        assert!(text.contains("You have now moved to [1.5, 2]"));
        assert!(text.contains("are [[3, 4], [5, 6.5]]"));
    }
}
