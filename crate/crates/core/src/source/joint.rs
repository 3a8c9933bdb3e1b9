use std::collections::HashMap;

use crate::coalition::{Coalition, MAX_AGENTS};
use crate::error::{Error, Result};
use crate::scalar::{xlog2x, Scalar};

/// A set of source components: some agents, optionally `X₀`, optionally `Z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct VarSet {
    pub agents: Coalition,
    pub x0: bool,
    pub z: bool,
}

impl VarSet {
    pub const EMPTY: VarSet = VarSet { agents: Coalition::EMPTY, x0: false, z: false };
    pub const X0: VarSet = VarSet { agents: Coalition::EMPTY, x0: true, z: false };
    pub const Z: VarSet = VarSet { agents: Coalition::EMPTY, x0: false, z: true };

    pub fn agents(agents: Coalition) -> Self {
        VarSet { agents, ..Self::EMPTY }
    }

    pub fn union(self, other: VarSet) -> VarSet {
        VarSet {
            agents: self.agents.union(other.agents),
            x0: self.x0 || other.x0,
            z: self.z || other.z,
        }
    }

    pub fn with_x0(mut self) -> Self {
        self.x0 = true;
        self
    }

    pub fn with_z(mut self) -> Self {
        self.z = true;
        self
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty() && !self.x0 && !self.z
    }
}

/// `H(a | given)` or `I(a; b | given)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EntropyQuery {
    pub a: VarSet,
    pub b: VarSet,
    pub given: VarSet,
}

impl EntropyQuery {
    pub fn entropy(a: VarSet) -> Self {
        EntropyQuery { a, ..Default::default() }
    }

    pub fn mutual(a: VarSet, b: VarSet) -> Self {
        EntropyQuery { a, b, given: VarSet::EMPTY }
    }

    pub fn given(mut self, given: VarSet) -> Self {
        self.given = given;
        self
    }
}

/// Dense joint distribution of `(X₀, X₁…X_L, Z)` with binary `X`'s.
///
/// Table layout: `index = x₀ | (x₁…x_L) << 1 | z << (L + 1)`, where agent `l`
/// sits at bit `l` of the index (bit `l − 1` of the coalition mask).
#[derive(Debug, Clone, PartialEq)]
pub struct JointSource<T> {
    num_agents: usize,
    z_card: Option<usize>,
    prob: Vec<T>,
    markov_degraded: bool,
}

impl<T: Scalar> JointSource<T> {
    /// Builds a table from a callback `(x₀, agent bits, z) -> probability`.
    pub fn from_fn<F>(num_agents: usize, z_card: Option<usize>, mut f: F) -> Result<Self>
    where
        F: FnMut(u8, u32, usize) -> T,
    {
        check_size(num_agents, z_card)?;
        let zc = z_card.unwrap_or(1);
        let stride = 1usize << (num_agents + 1);
        let mut prob = Vec::with_capacity(stride * zc);
        for z in 0..zc {
            for idx in 0..stride {
                prob.push(f((idx & 1) as u8, (idx >> 1) as u32, z));
            }
        }
        Self::from_table(num_agents, z_card, prob)
    }

    /// Wraps an explicit table laid out as described on the type.
    pub fn from_table(num_agents: usize, z_card: Option<usize>, prob: Vec<T>) -> Result<Self> {
        check_size(num_agents, z_card)?;
        let expected = (1usize << (num_agents + 1)) * z_card.unwrap_or(1);
        if prob.len() != expected {
            return Err(Error::validation(
                "prob",
                format!("table has {} entries, expected {expected}", prob.len()),
            ));
        }
        if let Some(i) = prob.iter().position(|&p| !(p >= T::zero()) || !p.is_finite()) {
            return Err(Error::validation("prob", format!("entry {i} is negative or not finite")));
        }
        let total: T = prob.iter().copied().sum();
        if (total - T::one()).abs() > T::SLACK {
            return Err(Error::validation("prob", format!("total mass {total} is not 1")));
        }
        Ok(JointSource { num_agents, z_card, prob, markov_degraded: false })
    }

    pub fn num_agents(&self) -> usize {
        self.num_agents
    }

    pub fn z_cardinality(&self) -> Option<usize> {
        self.z_card
    }

    pub fn has_z(&self) -> bool {
        self.z_card.is_some()
    }

    /// Cardinalities of `X₀, X₁…X_L` and, when present, `Z`.
    pub fn alphabet_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![2; self.num_agents + 1];
        sizes.extend(self.z_card);
        sizes
    }

    pub fn probabilities(&self) -> &[T] {
        &self.prob
    }

    pub fn is_markov_verified(&self) -> bool {
        self.markov_degraded
    }

    pub fn grand(&self) -> Coalition {
        Coalition::grand(self.num_agents)
    }

    fn mask_of(&self, set: VarSet) -> usize {
        let mut m = set.agents.index() << 1;
        if set.x0 {
            m |= 1;
        }
        if set.z && self.has_z() {
            m |= !0usize << (self.num_agents + 1);
        }
        m
    }

    /// Joint entropy `H(set)`.
    pub fn joint_entropy(&self, set: VarSet) -> T {
        let mask = self.mask_of(set);
        if mask == 0 {
            return T::zero();
        }
        if mask & (self.prob.len() - 1) == self.prob.len() - 1 && !(set.z ^ self.has_z()) {
            return self.prob.iter().map(|&p| -xlog2x(p)).sum();
        }
        let mut marg = vec![T::zero(); self.prob.len()];
        for (i, &p) in self.prob.iter().enumerate() {
            marg[i & mask] += p;
        }
        marg.into_iter().map(|p| -xlog2x(p)).sum()
    }

    /// `H(a | given)` in bits.
    pub fn entropy(&self, q: &EntropyQuery) -> Result<T> {
        check_agents(q, self.num_agents)?;
        let h = self.joint_entropy(q.a.union(q.given)) - self.joint_entropy(q.given);
        clamp_nonneg(h, "conditional entropy")
    }

    /// `I(a; b | given) = H(a | given) − H(a | b, given)`, clamped at 0.
    pub fn mutual_information(&self, q: &EntropyQuery) -> Result<T> {
        check_agents(q, self.num_agents)?;
        if q.a.is_empty() {
            return Err(Error::Domain("mutual information needs a nonempty first argument".into()));
        }
        let c = q.given;
        let i = self.joint_entropy(q.a.union(c)) + self.joint_entropy(q.b.union(c))
            - self.joint_entropy(q.a.union(q.b).union(c))
            - self.joint_entropy(c);
        clamp_nonneg(i, "mutual information")
    }

    /// `I(X_S; X₀ | X_T, [Z])`, the quantity behind every coalition value.
    pub fn coalition_information(&self, s: Coalition, given: Coalition, with_z: bool) -> Result<T> {
        if s.is_empty() {
            return Ok(T::zero());
        }
        let mut given = VarSet::agents(given);
        given.z = with_z;
        self.mutual_information(&EntropyQuery::mutual(VarSet::agents(s), VarSet::X0).given(given))
    }

    /// Checks `X_S − X₀ − (X_T, Z)` for all disjoint `S`, `T`.
    ///
    /// Over all disjoint pairs this is equivalent to the full factorisation
    /// `p(x_ℒ, z | x₀) = ∏ p(x_l | x₀) · p(z | x₀)`, which is what is tested,
    /// entrywise within `tol`, wherever `p(x₀) > 0`.
    pub fn verify_markov(&self, tol: T) -> bool {
        let l = self.num_agents;
        let zc = self.z_card.unwrap_or(1);
        let stride = 1usize << (l + 1);
        let mut p_x0 = [T::zero(); 2];
        // p_agent[l][x0][xl]
        let mut p_agent = vec![[[T::zero(); 2]; 2]; l];
        let mut p_z = vec![[T::zero(); 2]; zc];
        for (idx, &p) in self.prob.iter().enumerate() {
            let x0 = idx & 1;
            p_x0[x0] += p;
            for (a, pa) in p_agent.iter_mut().enumerate() {
                pa[x0][idx >> (a + 1) & 1] += p;
            }
            p_z[idx / stride][x0] += p;
        }
        for (idx, &p) in self.prob.iter().enumerate() {
            let x0 = idx & 1;
            let px0 = p_x0[x0];
            if px0 <= T::zero() {
                continue;
            }
            let mut prod = p_z[idx / stride][x0] / px0;
            for (a, pa) in p_agent.iter().enumerate() {
                prod *= pa[x0][idx >> (a + 1) & 1] / px0;
            }
            if (p / px0 - prod).abs() > tol {
                return false;
            }
        }
        true
    }

    /// Runs [`verify_markov`](Self::verify_markov) and records the outcome.
    pub fn mark_markov_verified(&mut self, tol: T) -> bool {
        self.markov_degraded = self.verify_markov(tol);
        self.markov_degraded
    }

    /// Projects onto the agents in `keep` (renumbered in ascending order) and
    /// folds the agents in `eavesdropped` into `Z`. Everyone else is
    /// marginalised out. An existing `Z` is kept as the low-order part of the
    /// new one.
    pub fn project(&self, keep: Coalition, eavesdropped: Coalition) -> Result<JointSource<T>> {
        let grand = self.grand();
        if !keep.is_subset_of(grand) || !eavesdropped.is_subset_of(grand) {
            return Err(Error::Domain("projection refers to agents outside the source".into()));
        }
        if !keep.is_disjoint(eavesdropped) {
            return Err(Error::Domain("kept and eavesdropped agents overlap".into()));
        }
        let kept: Vec<usize> = keep.members().collect();
        let eve: Vec<usize> = eavesdropped.members().collect();
        let old_zc = self.z_card.unwrap_or(1);
        let new_z_card = if self.z_card.is_none() && eve.is_empty() {
            None
        } else {
            Some(old_zc << eve.len())
        };
        let new_l = kept.len();
        check_size(new_l, new_z_card)?;
        let stride = 1usize << (self.num_agents + 1);
        let new_stride = 1usize << (new_l + 1);
        let mut prob = vec![T::zero(); new_stride * new_z_card.unwrap_or(1)];
        for (idx, &p) in self.prob.iter().enumerate() {
            let x0 = idx & 1;
            let mut agents = 0usize;
            for (k, &a) in kept.iter().enumerate() {
                agents |= (idx >> a & 1) << k;
            }
            let mut z = idx / stride;
            for (k, &a) in eve.iter().enumerate() {
                z |= (idx >> a & 1) * (old_zc << k);
            }
            prob[x0 | agents << 1 | z * new_stride] += p;
        }
        Ok(JointSource { num_agents: new_l, z_card: new_z_card, prob, markov_degraded: false })
    }
}

fn check_size(num_agents: usize, z_card: Option<usize>) -> Result<()> {
    if num_agents > MAX_AGENTS {
        return Err(Error::Capacity(format!(
            "{num_agents} agents exceed the dense-table limit of {MAX_AGENTS}"
        )));
    }
    match z_card {
        Some(0) => Err(Error::validation("z_card", "Z alphabet must be nonempty")),
        Some(z) if z.checked_shl((num_agents + 1) as u32).is_none_or(|t| t > 1 << 28) => {
            Err(Error::Capacity("joint table too large".into()))
        }
        _ => Ok(()),
    }
}

fn check_agents(q: &EntropyQuery, num_agents: usize) -> Result<()> {
    let grand = Coalition::grand(num_agents);
    for set in [q.a, q.b, q.given] {
        if !set.agents.is_subset_of(grand) {
            return Err(Error::Domain(format!("coalition {} is outside {grand}", set.agents)));
        }
    }
    Ok(())
}

fn clamp_nonneg<T: Scalar>(x: T, what: &str) -> Result<T> {
    if x >= T::zero() {
        Ok(x)
    } else if x >= -T::SLACK {
        Ok(T::zero())
    } else {
        Err(Error::Consistency(format!("{what} is negative: {x}")))
    }
}

/// Memoised joint entropies keyed by component set.
pub(crate) struct EntropyMemo<'a, T> {
    src: &'a JointSource<T>,
    memo: HashMap<VarSet, T>,
}

impl<'a, T: Scalar> EntropyMemo<'a, T> {
    pub(crate) fn new(src: &'a JointSource<T>) -> Self {
        EntropyMemo { src, memo: HashMap::new() }
    }

    pub(crate) fn h(&mut self, set: VarSet) -> T {
        let src = self.src;
        *self.memo.entry(set).or_insert_with(|| src.joint_entropy(set))
    }

    /// `I(a; b | c)` clamped as in [`JointSource::mutual_information`].
    pub(crate) fn mi(&mut self, a: VarSet, b: VarSet, c: VarSet) -> Result<T> {
        if a.is_empty() || b.is_empty() {
            return Ok(T::zero());
        }
        let i = self.h(a.union(c)) + self.h(b.union(c)) - self.h(a.union(b).union(c)) - self.h(c);
        clamp_nonneg(i, "mutual information")
    }
}
