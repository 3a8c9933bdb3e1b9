//! Coalitions as bitmasks: agent `l` (1-based) is bit `l - 1`.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Largest agent count any coalition-indexed table supports.
pub const MAX_AGENTS: usize = 20;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Coalition(pub u32);

impl Coalition {
    pub const EMPTY: Coalition = Coalition(0);

    pub fn grand(num_agents: usize) -> Self {
        debug_assert!(num_agents <= MAX_AGENTS);
        Coalition(((1u64 << num_agents) - 1) as u32)
    }

    /// Coalition of the given 1-based agent ids.
    pub fn from_agents<I: IntoIterator<Item = usize>>(agents: I) -> Self {
        Coalition(agents.into_iter().fold(0, |m, a| m | 1 << (a - 1)))
    }

    pub fn singleton(agent: usize) -> Self {
        Coalition(1 << (agent - 1))
    }

    #[inline]
    pub fn bits(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn contains(self, agent: usize) -> bool {
        self.0 >> (agent - 1) & 1 == 1
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn with(self, agent: usize) -> Self {
        Coalition(self.0 | 1 << (agent - 1))
    }

    pub fn without(self, agent: usize) -> Self {
        Coalition(self.0 & !(1 << (agent - 1)))
    }

    pub fn union(self, other: Self) -> Self {
        Coalition(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        Coalition(self.0 & other.0)
    }

    pub fn difference(self, other: Self) -> Self {
        Coalition(self.0 & !other.0)
    }

    pub fn is_disjoint(self, other: Self) -> bool {
        self.0 & other.0 == 0
    }

    pub fn is_subset_of(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    /// Complement within a game of `num_agents` players.
    pub fn complement(self, num_agents: usize) -> Self {
        Coalition(!self.0 & Coalition::grand(num_agents).0)
    }

    /// Members as ascending 1-based agent ids.
    pub fn members(self) -> impl Iterator<Item = usize> {
        let bits = self.0;
        (0..32).filter(move |b| bits >> b & 1 == 1).map(|b| b + 1)
    }

    /// All subsets of `self`, the empty set first and `self` last.
    pub fn subsets(self) -> impl Iterator<Item = Coalition> {
        let full = self.0;
        let mut next = Some(0u32);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == full {
                None
            } else {
                Some((cur.wrapping_sub(full)) & full)
            };
            Some(Coalition(cur))
        })
    }

    /// Every coalition of a `num_agents`-player game in bitmask order.
    pub fn all(num_agents: usize) -> impl Iterator<Item = Coalition> {
        (0..1u32 << num_agents).map(Coalition)
    }
}

impl fmt::Debug for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, a) in self.members().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str("}")
    }
}
