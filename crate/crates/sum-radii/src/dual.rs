//! Dual solutions, tightness predicates, component structure over pair sets,
//! and coverage bookkeeping.

use crate::error::{Error, Result};
use crate::instance::{MetricInstance, PairUniverse};
use crate::pointset::PointSet;
use crate::rat::Rat;
use num_traits::Zero;

/// A dual solution: the multiplier λ, the outlier cap γ (outlier mode only)
/// and one α per point (meaningful on X' only; zero elsewhere).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualSolution {
    /// Lagrangian multiplier λ ≥ 0.
    pub lambda: Rat,
    /// Per-point cap γ; present iff outlier mode.
    pub gamma: Option<Rat>,
    /// α_j per point id.
    pub alpha: Vec<Rat>,
}

impl DualSolution {
    /// All-zero dual (no outlier mode).
    pub fn zero(n: usize) -> Self {
        DualSolution { lambda: Rat::zero(), gamma: None, alpha: vec![Rat::zero(); n] }
    }

    /// Constraint slack of one pair: `r + λ − Σ_{j ∈ B(i,r) ∩ X'} α_j`.
    pub fn slack(&self, radius: &Rat, active_ball: &PointSet) -> Rat {
        let covered: Rat = active_ball.iter().map(|j| self.alpha[j].clone()).sum();
        radius + &self.lambda - covered
    }

    /// True iff the pair's slack is at most μ (closed boundary).
    pub fn is_almost_tight(&self, radius: &Rat, active_ball: &PointSet, mu: &Rat) -> Result<bool> {
        if mu < &Rat::zero() {
            return Err(Error::Usage("negative almost-tightness tolerance".into()));
        }
        Ok(self.slack(radius, active_ball) <= *mu)
    }

    /// Dual objective: `Σ α_j − k'·λ` plus `− m·γ` in outlier mode.
    pub fn objective(&self, instance: &MetricInstance, k_res: usize, m: usize) -> Result<Rat> {
        let total: Rat = instance.active().iter().map(|j| self.alpha[j].clone()).sum();
        let mut value = total - crate::rat::rat_int(k_res as i64) * &self.lambda;
        if m > 0 {
            match &self.gamma {
                Some(gamma) => value -= crate::rat::rat_int(m as i64) * gamma,
                None => {
                    return Err(Error::Usage("outlier-mode objective requires gamma".into()));
                }
            }
        }
        Ok(value)
    }

    /// Exhaustive feasibility check over the whole universe; returns the first
    /// violated pair index, if any. In outlier mode also checks `α_j ≤ γ`.
    pub fn feasibility_violation(
        &self,
        instance: &MetricInstance,
        universe: &PairUniverse,
    ) -> Option<usize> {
        if let Some(gamma) = &self.gamma {
            for j in instance.active().iter() {
                if &self.alpha[j] > gamma {
                    return Some(usize::MAX);
                }
            }
        }
        (0..universe.len()).find(|&idx| {
            let cp = universe.pair(idx);
            self.slack(&cp.pair.radius, &cp.active_ball) < Rat::zero()
        })
    }
}

/// Partition of a pair set into components: two pairs are connected iff their
/// balls share a point (transitively closed).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentPartition {
    /// Components, each a set of universe indices; components ordered by their
    /// smallest member in B-order, members sorted in B-order.
    pub components: Vec<Vec<usize>>,
}

impl ComponentPartition {
    /// Number of components.
    pub fn len(&self) -> usize {
        self.components.len()
    }

    /// True iff there are no components.
    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }
}

/// Computes the component partition of a set of universe pair indices.
///
/// Ball intersection is tested on materialized point sets (the full balls over
/// X, matching the component definition), not by distance arithmetic. Pairs
/// with identical balls but different radii stay distinct members.
pub fn components(universe: &PairUniverse, pair_idxs: &[usize]) -> ComponentPartition {
    let mut parent: Vec<usize> = (0..pair_idxs.len()).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for a in 0..pair_idxs.len() {
        for b in (a + 1)..pair_idxs.len() {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra == rb {
                continue;
            }
            if universe.pair(pair_idxs[a]).ball.intersects(&universe.pair(pair_idxs[b]).ball) {
                parent[ra] = rb;
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for a in 0..pair_idxs.len() {
        let root = find(&mut parent, a);
        groups.entry(root).or_default().push(pair_idxs[a]);
    }
    let mut components: Vec<Vec<usize>> = groups
        .into_values()
        .map(|mut v| {
            v.sort_unstable();
            v
        })
        .collect();
    components.sort_by_key(|c| c[0]);
    ComponentPartition { components }
}

/// Active points covered by none of the given pairs: `out(B') = X' \ X'(B')`.
pub fn uncovered(instance: &MetricInstance, universe: &PairUniverse, pair_idxs: &[usize]) -> PointSet {
    let mut out = instance.active().clone();
    for &idx in pair_idxs {
        out.subtract(&universe.pair(idx).active_ball);
    }
    out
}

/// Union of the pairs' balls over all of X (the component's point set X(C)).
pub fn covered_points(universe: &PairUniverse, pair_idxs: &[usize]) -> PointSet {
    let mut set = PointSet::new(
        universe.pairs.first().map_or(0, |cp| cp.ball.universe()),
    );
    for &idx in pair_idxs {
        set.union_with(&universe.pair(idx).ball);
    }
    set
}
