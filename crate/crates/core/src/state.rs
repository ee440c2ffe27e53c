//! Agent state values: a scalar position or a point in the plane.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Dimensionality of the state space. The negotiation protocol is the same
/// in both cases; planar states are handled componentwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Dimension {
    One,
    Two,
}

impl Dimension {
    pub fn size(self) -> usize {
        match self {
            Dimension::One => 1,
            Dimension::Two => 2,
        }
    }
}

impl TryFrom<u8> for Dimension {
    type Error = String;

    fn try_from(value: u8) -> Result<Self, Self::Error> {
        match value {
            1 => Ok(Dimension::One),
            2 => Ok(Dimension::Two),
            other => Err(format!("dimension must be 1 or 2, got {other}")),
        }
    }
}

impl From<Dimension> for u8 {
    fn from(d: Dimension) -> u8 {
        d.size() as u8
    }
}

/// Position of an agent: a bare number in 1-D, an `[x, y]` pair in 2-D.
///
/// Serializes untagged, so 1-D states appear as plain JSON numbers and 2-D
/// states as two-element arrays.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum State<S> {
    Scalar(S),
    Planar([S; 2]),
}

impl<S: Scalar> State<S> {
    pub fn dimension(&self) -> Dimension {
        match self {
            State::Scalar(_) => Dimension::One,
            State::Planar(_) => Dimension::Two,
        }
    }

    pub fn components(&self) -> &[S] {
        match self {
            State::Scalar(v) => std::slice::from_ref(v),
            State::Planar(p) => p.as_slice(),
        }
    }

    /// Build a state of the given dimension from a component slice.
    ///
    /// Panics if the slice length does not match; callers validate dimensions
    /// before constructing states.
    pub fn from_components(dim: Dimension, parts: &[S]) -> Self {
        match (dim, parts) {
            (Dimension::One, [v]) => State::Scalar(*v),
            (Dimension::Two, [x, y]) => State::Planar([*x, *y]),
            _ => panic!(
                "component count {} does not match dimension {}",
                parts.len(),
                dim.size()
            ),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.components().iter().all(|v| v.is_finite())
    }

    pub fn map(self, mut f: impl FnMut(S) -> S) -> Self {
        match self {
            State::Scalar(v) => State::Scalar(f(v)),
            State::Planar([x, y]) => State::Planar([f(x), f(y)]),
        }
    }

    /// Componentwise combination of two states of the same dimension.
    pub fn zip_map(self, other: Self, mut f: impl FnMut(S, S) -> S) -> Self {
        match (self, other) {
            (State::Scalar(a), State::Scalar(b)) => State::Scalar(f(a, b)),
            (State::Planar([ax, ay]), State::Planar([bx, by])) => {
                State::Planar([f(ax, bx), f(ay, by)])
            }
            (a, b) => panic!(
                "dimension mismatch: {} vs {}",
                a.dimension().size(),
                b.dimension().size()
            ),
        }
    }

    pub fn clamp_to(self, low: S, high: S) -> Self {
        self.map(|v| {
            if v < low {
                low
            } else if v > high {
                high
            } else {
                v
            }
        })
    }

    /// Componentwise mean, summing in iteration order.
    pub fn mean_of<'a, I>(states: I) -> Option<Self>
    where
        I: IntoIterator<Item = &'a Self>,
        S: 'a,
    {
        let mut iter = states.into_iter();
        let first = *iter.next()?;
        let (sum, count) = iter.fold((first, 1usize), |(acc, n), s| {
            (acc.zip_map(*s, |a, b| a + b), n + 1)
        });
        let denom = S::of_usize(count);
        Some(sum.map(|v| v / denom))
    }

    /// Euclidean norm of the state treated as a vector.
    pub fn norm(&self) -> S {
        self.components()
            .iter()
            .fold(S::zero(), |acc, v| acc + *v * *v)
            .sqrt()
    }

    /// Largest absolute componentwise difference to `other`.
    pub fn linf_distance(&self, other: &Self) -> S {
        let diff = self.zip_map(*other, |a, b| (a - b).abs());
        diff.components()
            .iter()
            .fold(S::zero(), |acc, v| if *v > acc { *v } else { acc })
    }
}

impl<S: Scalar> fmt::Display for State<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            State::Scalar(v) => write!(f, "{v}"),
            State::Planar([x, y]) => write!(f, "[{x}, {y}]"),
        }
    }
}

/// Largest componentwise range (max − min) over a set of states.
pub fn spread<S: Scalar>(states: &[State<S>]) -> S {
    let Some(first) = states.first() else {
        return S::zero();
    };
    let mut lo = *first;
    let mut hi = *first;
    for s in &states[1..] {
        lo = lo.zip_map(*s, |a, b| if b < a { b } else { a });
        hi = hi.zip_map(*s, |a, b| if b > a { b } else { a });
    }
    hi.zip_map(lo, |a, b| a - b)
        .components()
        .iter()
        .fold(S::zero(), |acc, v| if *v > acc { *v } else { acc })
}
