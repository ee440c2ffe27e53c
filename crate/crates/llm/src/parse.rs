//! Extracting the chosen position from free-text replies.
//!
//! Replies are expected in the two-part "Reasoning / Position" form, but the
//! parser tolerates prose: it prefers the last "Position" declaration that is
//! followed by enough numbers, and otherwise falls back to the trailing
//! number (or number pair in 2-D) anywhere in the reply.

use std::sync::OnceLock;

use regex::Regex;
use thiserror::Error;

use consensus_core::{Dimension, Scalar, State};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("reply contains no usable number")]
    NoNumber,
    #[error("reply contains a non-finite number")]
    NonFinite,
}

fn number_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?").expect("valid regex")
    })
}

fn position_label_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)position").expect("valid regex"))
}

/// All decimal literals in a text, in order of appearance.
pub(crate) fn extract_numbers(text: &str) -> Vec<f64> {
    number_regex()
        .find_iter(text)
        .filter_map(|m| m.as_str().parse().ok())
        .collect()
}

fn parse_numbers<S: Scalar>(text: &str, take: usize) -> Option<Vec<S>> {
    let mut out = Vec::with_capacity(take);
    for m in number_regex().find_iter(text) {
        if out.len() == take {
            break;
        }
        let value: S = m.as_str().parse().ok()?;
        out.push(value);
    }
    (out.len() == take).then_some(out)
}

/// Extract the state declared in a reply.
pub fn parse_position<S: Scalar>(
    reply: &str,
    dimension: Dimension,
) -> Result<State<S>, ParseError> {
    let needed = dimension.size();

    // Last "Position" mention that has enough numbers after it wins.
    let labels: Vec<_> = position_label_regex().find_iter(reply).collect();
    for label in labels.iter().rev() {
        if let Some(parts) = parse_numbers::<S>(&reply[label.end()..], needed) {
            return finish(parts, dimension);
        }
    }

    // Fallback: trailing numbers anywhere in the reply.
    let all: Vec<&str> = number_regex()
        .find_iter(reply)
        .map(|m| m.as_str())
        .collect();
    if all.len() < needed {
        return Err(ParseError::NoNumber);
    }
    let parts: Option<Vec<S>> = all[all.len() - needed..]
        .iter()
        .map(|s| s.parse().ok())
        .collect();
    match parts {
        Some(parts) => finish(parts, dimension),
        None => Err(ParseError::NoNumber),
    }
}

fn finish<S: Scalar>(parts: Vec<S>, dimension: Dimension) -> Result<State<S>, ParseError> {
    if parts.iter().any(|v| !v.is_finite()) {
        return Err(ParseError::NonFinite);
    }
    Ok(State::from_components(dimension, &parts))
}
