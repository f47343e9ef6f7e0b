//! Dual-raising algorithm without outliers: λ is raised as a dual variable
//! together with the α of an independent point set, until the almost-tight
//! pairs form at most k' components; the result is a structured pair set.

use crate::dual::{components, uncovered, DualSolution};
use crate::error::{Error, Result};
use crate::instance::{MetricInstance, PairUniverse};
use crate::pointset::PointSet;
use crate::rat::{rat_int, Rat};

/// A structured set of pairs: ordered pair set B' whose last element is the
/// special pair (i*, r*), plus the witnessing dual.
///
/// Invariants (asserted on construction):
/// - SP1: every pair of B' is almost tight;
/// - SP2: B' without the special pair covers X';
/// - SP3: |comp(B' \ {(i*,r*)})| > k' ≥ |comp(B')|.
#[derive(Clone, Debug)]
pub struct StructuredPairs {
    /// B' in insertion order; the special pair is the last entry.
    pub order: Vec<usize>,
    /// Witnessing dual solution.
    pub dual: DualSolution,
}

impl StructuredPairs {
    /// Universe index of the special pair (i*, r*).
    pub fn special(&self) -> usize {
        *self.order.last().expect("structured set is nonempty")
    }

    /// Radius r* of the special pair.
    pub fn special_radius<'a>(&self, universe: &'a PairUniverse) -> &'a Rat {
        &universe.pair(self.special()).pair.radius
    }
}

/// One row of the per-iteration raise trace.
#[derive(Clone, Debug)]
pub struct RaiseRow {
    /// Raise amount δ of this iteration.
    pub delta: Rat,
    /// Size of the independent set X''.
    pub independent: usize,
    /// Component count of the almost-tight set at the iteration start.
    pub component_count: usize,
    /// Dual objective after the raise.
    pub objective: Rat,
}

/// Result of the raising loop.
#[derive(Clone, Debug)]
pub enum RaiseOutcome {
    /// Normal termination: final dual plus the almost-tight sets at the start
    /// (B₀, more than k' components) and end (B₁, at most k') of the final
    /// iteration.
    Raised {
        /// Final dual solution.
        dual: DualSolution,
        /// Almost-tight set at the start of the final iteration.
        b0: Vec<usize>,
        /// Almost-tight set at the end of the final iteration.
        b1: Vec<usize>,
        /// Per-iteration trace.
        trace: Vec<RaiseRow>,
    },
    /// The initial almost-tight set (the radius-0 pairs and anything of
    /// radius ≤ μ) already forms at most k' components; no raising happened.
    /// Carries that set and the all-zero dual.
    Degenerate {
        /// The initial almost-tight set.
        pairs: Vec<usize>,
        /// The all-zero dual.
        dual: DualSolution,
    },
}

fn almost_tight_set(
    universe: &PairUniverse,
    dual: &DualSolution,
    mu: &Rat,
) -> Vec<usize> {
    (0..universe.len())
        .filter(|&idx| {
            let cp = universe.pair(idx);
            dual.slack(&cp.pair.radius, &cp.active_ball) <= *mu
        })
        .collect()
}

/// Greedy maximal independent point set: scan X' in id order and insert j iff
/// no almost-tight pair covering j already covers a chosen point. Every
/// almost-tight pair ends up covering at most one chosen point.
pub fn select_independent_points(
    instance: &MetricInstance,
    universe: &PairUniverse,
    almost_tight: &[usize],
) -> PointSet {
    let mut chosen = PointSet::new(instance.len());
    for j in instance.active().iter() {
        let blocked = almost_tight.iter().any(|&idx| {
            let ball = &universe.pair(idx).active_ball;
            ball.contains(j) && ball.intersects(&chosen)
        });
        if !blocked {
            chosen.insert(j);
        }
    }
    chosen
}

/// One raise step: δ is the largest uniform increment of λ and of α_j for
/// j ∈ X'' that keeps (D) feasible; the minimizing pair becomes exactly tight.
pub fn raise_step(
    universe: &PairUniverse,
    dual: &DualSolution,
    independent: &PointSet,
    mu: &Rat,
) -> Result<(Rat, DualSolution)> {
    let mut delta: Option<Rat> = None;
    for idx in 0..universe.len() {
        let cp = universe.pair(idx);
        let slack = dual.slack(&cp.pair.radius, &cp.active_ball);
        if slack <= *mu {
            continue; // almost tight: covers ≤ 1 point of X'' by construction
        }
        let count = cp.active_ball.intersection_len(independent);
        if count < 2 {
            continue; // raising changes this slack by δ(1 − count) ≥ 0
        }
        let bound = slack / rat_int(count as i64 - 1);
        if delta.as_ref().is_none_or(|d| bound < *d) {
            delta = Some(bound);
        }
    }
    let delta = delta.ok_or_else(|| {
        // No remaining constraint can bind along the raise direction: λ and
        // the independent α may grow forever and the objective with them, so
        // no fractional k'-ball cover exists under the radius cap.
        Error::Infeasible(format!(
            "dual raising is unbounded (independent set {:?}); \
             no solution with the cluster budget fits under the radius cap",
            independent
        ))
    })?;
    let mut next = dual.clone();
    next.lambda += &delta;
    for j in independent.iter() {
        next.alpha[j] += &delta;
    }
    Ok((delta, next))
}

/// Iteration hard cap: the analysis bounds iterations by O(|X|⁴); exceeding
/// this signals an arithmetic bug, not an input property.
fn iteration_cap(n: usize) -> usize {
    4 * n * n * n * n + 16
}

/// Runs the raising loop until the almost-tight pairs form at most k'
/// components. Requires |X'| > k'.
pub fn raise_duals(
    instance: &MetricInstance,
    universe: &PairUniverse,
    k_res: usize,
    mu: &Rat,
) -> Result<RaiseOutcome> {
    if instance.active_len() <= k_res {
        return Err(Error::Usage(format!(
            "raising requires |X'| > k' (got |X'| = {}, k' = {})",
            instance.active_len(),
            k_res
        )));
    }
    let mut dual = DualSolution::zero(instance.len());
    let mut current = almost_tight_set(universe, &dual, mu);
    if components(universe, &current).len() <= k_res {
        return Ok(RaiseOutcome::Degenerate { pairs: current, dual });
    }
    let mut trace = Vec::new();
    for _ in 0..iteration_cap(instance.len()) {
        let comp_count = components(universe, &current).len();
        let independent = select_independent_points(instance, universe, &current);
        let (delta, next) = raise_step(universe, &dual, &independent, mu)?;
        if let Some(idx) = next.feasibility_violation(instance, universe) {
            return Err(Error::internal(
                "raise step produced an infeasible dual",
                format!("violated pair index {idx}, delta {delta}"),
            ));
        }
        dual = next;
        let objective = dual.objective(instance, k_res, 0)?;
        trace.push(RaiseRow {
            delta,
            independent: independent.len(),
            component_count: comp_count,
            objective,
        });
        let next_set = almost_tight_set(universe, &dual, mu);
        if components(universe, &next_set).len() <= k_res {
            return Ok(RaiseOutcome::Raised { dual, b0: current, b1: next_set, trace });
        }
        current = next_set;
    }
    Err(Error::internal(
        "raise loop exceeded the iteration cap",
        format!("cap {} reached; {} trace rows", iteration_cap(instance.len()), trace.len()),
    ))
}

/// Builds the structured set from B₀ and B₁: start from B₀ ∩ B₁ and add pairs
/// of B₁ \ B₀ in B-order until at most k' components remain; the last added
/// pair is the special pair. SP1–SP3 are asserted before returning.
pub fn build_structured_pairs(
    instance: &MetricInstance,
    universe: &PairUniverse,
    dual: &DualSolution,
    b0: &[usize],
    b1: &[usize],
    k_res: usize,
    mu: &Rat,
) -> Result<StructuredPairs> {
    let b0_set: std::collections::BTreeSet<usize> = b0.iter().copied().collect();
    let b1_set: std::collections::BTreeSet<usize> = b1.iter().copied().collect();
    let mut order: Vec<usize> = b1.iter().copied().filter(|i| b0_set.contains(i)).collect();
    order.sort_unstable();
    if components(universe, &order).len() <= k_res {
        return Err(Error::internal(
            "structured-pair seed B0 ∩ B1 already has ≤ k' components",
            format!("seed {order:?}, k' {k_res}"),
        ));
    }
    let additions: Vec<usize> = b1_set.iter().copied().filter(|i| !b0_set.contains(i)).collect();
    let mut done = false;
    for idx in additions {
        order.push(idx);
        if components(universe, &order).len() <= k_res {
            done = true;
            break;
        }
    }
    if !done {
        return Err(Error::internal(
            "structured-pair construction never reached ≤ k' components",
            format!("B0 {b0:?}, B1 {b1:?}"),
        ));
    }
    let sp = StructuredPairs { order, dual: dual.clone() };
    check_structured(instance, universe, &sp, k_res, mu)?;
    Ok(sp)
}

/// Asserts SP1–SP3 verbatim; used both at construction and as the acceptance
/// invariant check.
pub fn check_structured(
    instance: &MetricInstance,
    universe: &PairUniverse,
    sp: &StructuredPairs,
    k_res: usize,
    mu: &Rat,
) -> Result<()> {
    let without_special = &sp.order[..sp.order.len() - 1];
    for &idx in &sp.order {
        let cp = universe.pair(idx);
        if !sp.dual.is_almost_tight(&cp.pair.radius, &cp.active_ball, mu)? {
            return Err(Error::internal(
                "SP1 violated: pair in B' is not almost tight",
                format!("pair index {idx}, slack {}", sp.dual.slack(&cp.pair.radius, &cp.active_ball)),
            ));
        }
    }
    if !uncovered(instance, universe, without_special).is_empty() {
        return Err(Error::internal(
            "SP2 violated: B' minus the special pair does not cover X'",
            format!("uncovered: {:?}", uncovered(instance, universe, without_special)),
        ));
    }
    let comps_without = components(universe, without_special).len();
    let comps_with = components(universe, &sp.order).len();
    if !(comps_without > k_res && k_res >= comps_with) {
        return Err(Error::internal(
            "SP3 violated: component counts out of range",
            format!("without special: {comps_without}, with: {comps_with}, k': {k_res}"),
        ));
    }
    Ok(())
}
