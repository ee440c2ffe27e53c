//! Observation graph between agents.
//!
//! Entry `(i, j)` of the connectivity matrix being true means agent `i` can
//! observe agent `j`'s state. Self-observation is implicit (every agent knows
//! its own state), so diagonals are always false.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TopologyError {
    #[error("agent count must be at least 1")]
    InvalidSize,
    #[error("leader index {leader} out of range for {n} agents")]
    LeaderOutOfRange { leader: usize, n: usize },
    #[error("agent index {index} out of range for {n} agents")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("edge ({i}, {j}) is invalid: self-edges are not representable")]
    InvalidEdge { i: usize, j: usize },
    #[error("explicit grid must be {expected}x{expected}, row {row} has {got} entries")]
    NotSquare {
        expected: usize,
        row: usize,
        got: usize,
    },
    #[error("explicit grid has {rows} rows but the experiment has {agents} agents")]
    GridSizeMismatch { rows: usize, agents: usize },
    #[error("explicit grid entries must be 0 or 1, found {value} at ({i}, {j})")]
    NonBooleanEntry { value: u8, i: usize, j: usize },
    #[error("explicit grid has a self-loop at agent {index}; diagonals must be 0")]
    SelfLoop { index: usize },
}

/// Boolean n×n observation matrix. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectivityMatrix {
    n: usize,
    entries: Vec<bool>,
}

impl ConnectivityMatrix {
    fn empty(n: usize) -> Result<Self, TopologyError> {
        if n == 0 {
            return Err(TopologyError::InvalidSize);
        }
        Ok(Self {
            n,
            entries: vec![false; n * n],
        })
    }

    /// Every agent observes every other agent.
    pub fn fully_connected(n: usize) -> Result<Self, TopologyError> {
        let mut m = Self::empty(n)?;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    m.entries[i * n + j] = true;
                }
            }
        }
        Ok(m)
    }

    /// Every non-leader observes only the leader; the leader observes no one.
    pub fn leader_follower(n: usize, leader: usize) -> Result<Self, TopologyError> {
        let mut m = Self::empty(n)?;
        if leader >= n {
            return Err(TopologyError::LeaderOutOfRange { leader, n });
        }
        for i in 0..n {
            if i != leader {
                m.entries[i * n + leader] = true;
            }
        }
        Ok(m)
    }

    /// Directed path: agent k+1 observes agent k.
    pub fn chain(n: usize) -> Result<Self, TopologyError> {
        let mut m = Self::empty(n)?;
        for k in 0..n.saturating_sub(1) {
            m.entries[(k + 1) * n + k] = true;
        }
        Ok(m)
    }

    /// Build from an explicit row-major 0/1 grid.
    pub fn from_grid(grid: &[Vec<u8>]) -> Result<Self, TopologyError> {
        let n = grid.len();
        let mut m = Self::empty(n)?;
        for (i, row) in grid.iter().enumerate() {
            if row.len() != n {
                return Err(TopologyError::NotSquare {
                    expected: n,
                    row: i,
                    got: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                match v {
                    0 => {}
                    1 if i == j => return Err(TopologyError::SelfLoop { index: i }),
                    1 => m.entries[i * n + j] = true,
                    other => return Err(TopologyError::NonBooleanEntry { value: other, i, j }),
                }
            }
        }
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn observes(&self, i: usize, j: usize) -> bool {
        self.entries[i * self.n + j]
    }

    /// Indices observed by agent `i`, in ascending order.
    pub fn neighbors_of(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        let row = &self.entries[i * self.n..(i + 1) * self.n];
        row.iter()
            .enumerate()
            .filter_map(|(j, &set)| set.then_some(j))
    }

    pub fn edge_count(&self) -> usize {
        self.entries.iter().filter(|&&e| e).count()
    }

    /// Copy with edge `(i, j)` removed; with `symmetric` also removes `(j, i)`.
    /// Removing an absent edge is a no-op.
    pub fn remove_edge(&self, i: usize, j: usize, symmetric: bool) -> Result<Self, TopologyError> {
        if i == j {
            return Err(TopologyError::InvalidEdge { i, j });
        }
        for index in [i, j] {
            if index >= self.n {
                return Err(TopologyError::IndexOutOfRange { index, n: self.n });
            }
        }
        let mut m = self.clone();
        m.entries[i * self.n + j] = false;
        if symmetric {
            m.entries[j * self.n + i] = false;
        }
        Ok(m)
    }

    pub fn is_undirected(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| self.observes(i, j) == self.observes(j, i)))
    }

    /// Lowest-index agent whose information can reach every agent, if any.
    ///
    /// Agent `i` receives information from `j` when `i` observes `j`, so a
    /// root `r` is an agent every other agent can reach by following
    /// observation edges.
    pub fn has_rooted_spanning_path(&self) -> Option<usize> {
        for r in 0..self.n {
            // Grow the set of agents that can reach r.
            let mut reaches = vec![false; self.n];
            reaches[r] = true;
            let mut changed = true;
            while changed {
                changed = false;
                for i in 0..self.n {
                    if reaches[i] {
                        continue;
                    }
                    if self.neighbors_of(i).any(|j| reaches[j]) {
                        reaches[i] = true;
                        changed = true;
                    }
                }
            }
            if reaches.iter().all(|&x| x) {
                return Some(r);
            }
        }
        None
    }
}

fn default_true() -> bool {
    true
}

/// Serializable description of a topology: a named builder with parameters,
/// or an explicit row-major 0/1 grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TopologySpec {
    Full {
        /// Edges to delete after building, as `(i, j)` pairs.
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        remove: Vec<(usize, usize)>,
        #[serde(default = "default_true")]
        symmetric: bool,
    },
    LeaderFollower {
        leader: usize,
    },
    Chain,
    Explicit {
        grid: Vec<Vec<u8>>,
    },
}

impl Default for TopologySpec {
    fn default() -> Self {
        TopologySpec::Full {
            remove: Vec::new(),
            symmetric: true,
        }
    }
}

impl TopologySpec {
    pub fn build(&self, n: usize) -> Result<ConnectivityMatrix, TopologyError> {
        match self {
            TopologySpec::Full { remove, symmetric } => {
                let mut m = ConnectivityMatrix::fully_connected(n)?;
                for &(i, j) in remove {
                    m = m.remove_edge(i, j, *symmetric)?;
                }
                Ok(m)
            }
            TopologySpec::LeaderFollower { leader } => {
                ConnectivityMatrix::leader_follower(n, *leader)
            }
            TopologySpec::Chain => ConnectivityMatrix::chain(n),
            TopologySpec::Explicit { grid } => {
                if grid.len() != n {
                    return Err(TopologyError::GridSizeMismatch {
                        rows: grid.len(),
                        agents: n,
                    });
                }
                ConnectivityMatrix::from_grid(grid)
            }
        }
    }
}
