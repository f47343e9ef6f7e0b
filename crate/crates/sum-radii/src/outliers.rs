//! Outlier-mode machinery: the fixed-λ covering subroutine, the bisection
//! search over λ driven by exact phase-end envelopes, and the mixing step that
//! turns two adjacent runs into an orderly structured pair set.

use crate::dual::{components, uncovered, DualSolution};
use crate::envelope::{lower_envelope, AffineFn, PiecewiseAffine};
use crate::error::{Error, Result};
use crate::instance::{MetricInstance, PairUniverse};
use crate::pointset::PointSet;
use crate::rat::{rat_int, Rat};
use num_traits::Zero;
use std::collections::{BTreeMap, BTreeSet};

/// One phase of a subroutine run: the raising point set, the absolute end
/// time (the common α value of still-raising points when the phase ends) and
/// the pairs picked at the phase end, in B-order (possibly cut short by the
/// mid-batch stop rule).
#[derive(Clone, Debug)]
pub struct PhaseTrace {
    /// Points whose α was raised during this phase.
    pub raising: PointSet,
    /// Absolute time at which the phase ended.
    pub end_time: Rat,
    /// Universe indices appended to P at the phase end, in B-order.
    pub batch: Vec<usize>,
}

/// A complete run of the covering subroutine at a fixed λ.
#[derive(Clone, Debug)]
pub struct SubroutineRun {
    /// The λ the run was executed at.
    pub lambda: Rat,
    /// Picked pairs P in pick order.
    pub picked: Vec<usize>,
    /// The dual the run produced (γ = final time, α = per-point raise totals).
    pub dual: DualSolution,
    /// Per-phase trace.
    pub phases: Vec<PhaseTrace>,
}

impl SubroutineRun {
    /// Component count of the picked set.
    pub fn component_count(&self, universe: &PairUniverse) -> usize {
        components(universe, &self.picked).len()
    }

    /// Last picked pair.
    pub fn last_pick(&self) -> usize {
        *self.picked.last().expect("subroutine picked at least one pair")
    }
}

/// Runs the covering subroutine at a fixed λ: phases raise α uniformly for
/// all points not covered by P; each phase ends when at least one unpicked
/// pair becomes tight, and the simultaneously tight pairs are appended to P
/// in B-order, stopping (possibly mid-batch) once at most m active points are
/// uncovered.
pub fn run_subroutine(
    instance: &MetricInstance,
    universe: &PairUniverse,
    lambda: &Rat,
    m: usize,
) -> Result<SubroutineRun> {
    if lambda < &Rat::zero() {
        return Err(Error::Usage(format!("subroutine requires λ ≥ 0, got {lambda}")));
    }
    let mut dual = DualSolution::zero(instance.len());
    dual.lambda = lambda.clone();
    dual.gamma = Some(Rat::zero());
    let mut picked: Vec<usize> = Vec::new();
    let mut picked_set: BTreeSet<usize> = BTreeSet::new();
    let mut phases: Vec<PhaseTrace> = Vec::new();
    let mut elapsed = Rat::zero();
    let mut out = uncovered(instance, universe, &picked);

    let phase_cap = universe.len() + 2;
    for _ in 0..phase_cap {
        if out.len() <= m {
            dual.gamma = Some(elapsed.clone());
            return Ok(SubroutineRun { lambda: lambda.clone(), picked, dual, phases });
        }
        let raising = out.clone();

        // Pairs already tight at the phase start form an immediate batch of
        // duration zero (only possible before any raising, e.g. radius-0
        // pairs at λ = 0).
        let mut batch: Vec<usize> = (0..universe.len())
            .filter(|idx| !picked_set.contains(idx))
            .filter(|&idx| {
                let cp = universe.pair(idx);
                dual.slack(&cp.pair.radius, &cp.active_ball).is_zero()
            })
            .collect();
        if batch.is_empty() {
            // Advance time until the earliest unpicked pair becomes tight.
            let mut step: Option<Rat> = None;
            for idx in 0..universe.len() {
                if picked_set.contains(&idx) {
                    continue;
                }
                let cp = universe.pair(idx);
                let count = cp.active_ball.intersection_len(&raising);
                if count == 0 {
                    continue;
                }
                let slack = dual.slack(&cp.pair.radius, &cp.active_ball);
                let bound = slack / rat_int(count as i64);
                if step.as_ref().is_none_or(|s| bound < *s) {
                    step = Some(bound);
                }
            }
            let step = step.ok_or_else(|| {
                Error::Infeasible(format!(
                    "{} uncovered points (budget {m}) cannot be reached by any candidate pair",
                    out.len()
                ))
            })?;
            elapsed += &step;
            for j in raising.iter() {
                dual.alpha[j] += &step;
            }
            batch = (0..universe.len())
                .filter(|idx| !picked_set.contains(idx))
                .filter(|&idx| {
                    let cp = universe.pair(idx);
                    dual.slack(&cp.pair.radius, &cp.active_ball).is_zero()
                })
                .collect();
            if batch.is_empty() {
                return Err(Error::internal(
                    "phase advanced by the minimum step but no pair became tight",
                    format!("λ = {lambda}, elapsed = {elapsed}"),
                ));
            }
        }

        // Append the batch in B-order, stopping once ≤ m points are uncovered.
        let mut appended: Vec<usize> = Vec::new();
        for idx in batch {
            picked.push(idx);
            picked_set.insert(idx);
            appended.push(idx);
            out.subtract(&universe.pair(idx).active_ball);
            if out.len() <= m {
                break;
            }
        }
        phases.push(PhaseTrace { raising, end_time: elapsed.clone(), batch: appended });
    }
    Err(Error::internal(
        "subroutine exceeded the phase cap",
        format!("λ = {lambda}, cap {phase_cap}"),
    ))
}

/// One recorded phase-end envelope from the λ search, kept for diagnostics:
/// on `[lo, hi]` the envelope gives the exact end time of phase `phase` as a
/// function of λ.
#[derive(Clone, Debug)]
pub struct EnvelopeRecord {
    /// 1-based phase index the envelope describes.
    pub phase: usize,
    /// The envelope, with domain `[lo, hi]` of the search interval it was
    /// built on.
    pub envelope: PiecewiseAffine,
}

/// Result of the λ search: either the λ = 0 run already has few enough
/// components, or a bracket of two adjacent λ values whose runs straddle the
/// component threshold.
#[derive(Clone, Debug)]
pub enum SearchOutcome {
    /// `|comp(P)| ≤ k'` already at λ = 0.
    Degenerate {
        /// The λ = 0 run.
        run: SubroutineRun,
    },
    /// A bracket `[b_l, b_r]` with `|comp(P_l)| > k' ≥ |comp(P_r)|` and the
    /// run at the bracket midpoint.
    Bracket(Box<Bracket>),
}

/// Final bracket of the λ search.
#[derive(Clone, Debug)]
pub struct Bracket {
    /// Left endpoint (component count above k').
    pub b_l: Rat,
    /// Right endpoint (component count at most k').
    pub b_r: Rat,
    /// Run at `b_l`.
    pub run_l: SubroutineRun,
    /// Run at `b_r`.
    pub run_r: SubroutineRun,
    /// Run at the midpoint of `[b_l, b_r]`.
    pub run_m: SubroutineRun,
    /// Phase-end envelopes recorded during the search.
    pub envelopes: Vec<EnvelopeRecord>,
}

/// Number of points covered by a pair's ball among a raising set.
fn raising_count(universe: &PairUniverse, idx: usize, raising: &PointSet) -> usize {
    universe.pair(idx).active_ball.intersection_len(raising)
}

/// Rebuilds the affine phase-end functions G_1..G_upto (of λ) from a run's
/// trace: a pair picked at the end of phase t satisfies
/// `r + λ = Σ_{t' ≤ t} |B ∩ A_{t'}|·Δ_{t'}(λ)`, which determines Δ_t given
/// Δ_1..Δ_{t-1}. Returns the cumulative functions G_t.
fn phase_end_functions(
    universe: &PairUniverse,
    run: &SubroutineRun,
    upto: usize,
) -> Result<Vec<AffineFn>> {
    let mut cumulative: Vec<AffineFn> = Vec::with_capacity(upto);
    let mut deltas: Vec<AffineFn> = Vec::with_capacity(upto);
    for t in 0..upto {
        let phase = &run.phases[t];
        let &witness = phase.batch.first().ok_or_else(|| {
            Error::internal("phase with empty batch in trace", format!("phase {}", t + 1))
        })?;
        let count = raising_count(universe, witness, &phase.raising);
        if count == 0 {
            return Err(Error::internal(
                "picked pair covers no raising point; phase-end function undefined",
                format!("phase {}, pair index {witness}", t + 1),
            ));
        }
        // r + λ − Σ_{t' < t} count_{t'}·Δ_{t'}
        let mut remaining =
            AffineFn::new(rat_int(1), universe.pair(witness).pair.radius.clone());
        for (t_prev, delta) in deltas.iter().enumerate() {
            let c = raising_count(universe, witness, &run.phases[t_prev].raising);
            remaining = remaining.sub(&delta.scale(&rat_int(c as i64)));
        }
        let delta = remaining.scale(&rat_int(count as i64).recip());
        let g = match cumulative.last() {
            Some(prev) => prev.add(&delta),
            None => delta.clone(),
        };
        deltas.push(delta);
        cumulative.push(g);
    }
    Ok(cumulative)
}

/// Candidate phase-end lines for the next phase of a run: one line per pair
/// not yet picked whose ball meets the phase's raising set.
fn next_phase_lines(
    universe: &PairUniverse,
    run: &SubroutineRun,
    cumulative: &[AffineFn],
    phase: usize,
) -> Result<Vec<AffineFn>> {
    let already: BTreeSet<usize> =
        run.phases[..phase - 1].iter().flat_map(|p| p.batch.iter().copied()).collect();
    let raising = &run.phases[phase - 1].raising;
    let prev = if phase >= 2 {
        cumulative[phase - 2].clone()
    } else {
        AffineFn::constant(Rat::zero())
    };
    let mut deltas: Vec<AffineFn> = Vec::with_capacity(phase - 1);
    for t in 0..phase - 1 {
        let d = if t == 0 {
            cumulative[0].clone()
        } else {
            cumulative[t].sub(&cumulative[t - 1])
        };
        deltas.push(d);
    }
    let mut lines = Vec::new();
    for idx in 0..universe.len() {
        if already.contains(&idx) {
            continue;
        }
        let count = raising_count(universe, idx, raising);
        if count == 0 {
            continue;
        }
        let mut remaining = AffineFn::new(rat_int(1), universe.pair(idx).pair.radius.clone());
        for (t, delta) in deltas.iter().enumerate() {
            let c = raising_count(universe, idx, &run.phases[t].raising);
            remaining = remaining.sub(&delta.scale(&rat_int(c as i64)));
        }
        lines.push(prev.add(&remaining.scale(&rat_int(count as i64).recip())));
    }
    if lines.is_empty() {
        return Err(Error::internal(
            "no candidate line for the next phase",
            format!("phase {phase}"),
        ));
    }
    Ok(lines)
}

/// Upper end of the λ search interval: beyond it a single maximal ball is
/// always picked first, so the component count is at most k'.
fn search_upper_bound(instance: &MetricInstance, k_res: usize, radius_cap: &Rat) -> Rat {
    rat_int(2 * instance.active_len() as i64 * k_res.max(1) as i64) * radius_cap + rat_int(1)
}

/// Searches for adjacent λ values straddling the component threshold, keeping
/// the first phases' pick structure stable on ever smaller intervals.
/// Envelopes of phase-end times are exact, so the bracket is exact.
pub fn search_lambda(
    instance: &MetricInstance,
    universe: &PairUniverse,
    k_res: usize,
    m: usize,
) -> Result<SearchOutcome> {
    let zero_run = run_subroutine(instance, universe, &Rat::zero(), m)?;
    if zero_run.component_count(universe) <= k_res {
        return Ok(SearchOutcome::Degenerate { run: zero_run });
    }
    let b_t = search_upper_bound(instance, k_res, &universe.radius_cap);
    let top_run = run_subroutine(instance, universe, &b_t, m)?;
    if top_run.component_count(universe) > k_res {
        // Even at the top of the search interval the picked pairs form more
        // than k' components: no k'-ball solution exists within the radius
        // cap (the capped balls cannot merge further however large λ grows).
        return Err(Error::Infeasible(format!(
            "picked pairs form {} components > k' = {k_res} even at λ = {b_t}; \
             no solution with {k_res} balls fits under the radius cap",
            top_run.component_count(universe)
        )));
    }

    let mut cache: BTreeMap<Rat, SubroutineRun> = BTreeMap::new();
    cache.insert(Rat::zero(), zero_run);
    cache.insert(b_t.clone(), top_run);
    let mut b_l = Rat::zero();
    let mut b_r = b_t;
    let mut envelopes: Vec<EnvelopeRecord> = Vec::new();
    let two = rat_int(2);

    for phase in 1..=universe.len() + 1 {
        let mid = (&b_l + &b_r) / &two;
        let run_m = run_subroutine(instance, universe, &mid, m)?;
        if run_m.phases.len() <= phase - 1 {
            let run_l = cache.get(&b_l).expect("left endpoint run cached").clone();
            let run_r = cache.get(&b_r).expect("right endpoint run cached").clone();
            return Ok(SearchOutcome::Bracket(Box::new(Bracket {
                b_l,
                b_r,
                run_l,
                run_r,
                run_m,
                envelopes,
            })));
        }
        let cumulative = phase_end_functions(universe, &run_m, phase - 1)?;
        let lines = next_phase_lines(universe, &run_m, &cumulative, phase)?;
        let envelope = lower_envelope(&lines, &b_l, &b_r);
        let expected = envelope.eval(&mid);
        if expected != run_m.phases[phase - 1].end_time {
            return Err(Error::internal(
                "phase-end envelope disagrees with the run it was built from",
                format!(
                    "phase {phase}, λ = {mid}: envelope {expected}, run {}",
                    run_m.phases[phase - 1].end_time
                ),
            ));
        }

        // Bisect over the envelope breakpoints, keeping the component-count
        // labels (above k' on the left, at most k' on the right).
        let mut points: Vec<Rat> = Vec::with_capacity(envelope.breakpoints.len());
        points.push(b_l.clone());
        points.extend(envelope.interior_breakpoints().iter().cloned());
        points.push(b_r.clone());
        let mut lo = 0usize;
        let mut hi = points.len() - 1;
        while hi - lo > 1 {
            let probe = (lo + hi) / 2;
            let run = match cache.get(&points[probe]) {
                Some(run) => run.clone(),
                None => {
                    let run = run_subroutine(instance, universe, &points[probe], m)?;
                    cache.insert(points[probe].clone(), run.clone());
                    run
                }
            };
            if run.component_count(universe) > k_res {
                lo = probe;
            } else {
                hi = probe;
            }
        }
        envelopes.push(EnvelopeRecord { phase, envelope });
        b_l = points[lo].clone();
        b_r = points[hi].clone();
        if !cache.contains_key(&b_l) || !cache.contains_key(&b_r) {
            return Err(Error::internal(
                "bracket endpoint without a cached run",
                format!("[{b_l}, {b_r}]"),
            ));
        }
    }
    Err(Error::internal(
        "λ search exceeded the phase bound",
        format!("more than {} phases", universe.len()),
    ))
}

/// An orderly structured set: ordered pair set B' whose last element is the
/// special pair, the prefix indices ℓ (everything but the special pair) and
/// ℓ', and the witnessing dual from the bracket endpoint run.
///
/// Invariants (asserted on construction):
/// - OS1: all points of out(B'_ℓ') have α = γ, and every pair of B' is tight;
/// - OS2: |out(B'_h)| > m for h < ℓ, and |out(B'_h' ∪ {special})| ≤ m for
///   ℓ' ≤ h' ≤ ℓ;
/// - OS3: |comp(B'_ℓ)| > k' ≥ |comp(B'_ℓ' ∪ {special})|.
#[derive(Clone, Debug)]
pub struct OrderlyStructured {
    /// B' in order; the special pair is the last entry.
    pub order: Vec<usize>,
    /// Number of non-special pairs (= order.len() − 1).
    pub ell: usize,
    /// Prefix index ℓ' ≤ ℓ.
    pub ell_prime: usize,
    /// Witnessing dual (from the endpoint run).
    pub dual: DualSolution,
}

impl OrderlyStructured {
    /// Universe index of the special pair.
    pub fn special(&self) -> usize {
        *self.order.last().expect("orderly set is nonempty")
    }

    /// Radius r* of the special pair.
    pub fn special_radius<'a>(&self, universe: &'a PairUniverse) -> &'a Rat {
        &universe.pair(self.special()).pair.radius
    }

    /// The prefix B'_h.
    pub fn prefix(&self, h: usize) -> &[usize] {
        &self.order[..h]
    }
}

/// Runs the covering procedure: starting from the seed, append pairs from the
/// sequence (skipping ones already present) until at most m active points are
/// uncovered. Returns the resulting ordered set, or None if the sequence runs
/// out first.
fn covering(
    instance: &MetricInstance,
    universe: &PairUniverse,
    seed: &[usize],
    sequence: &[usize],
    m: usize,
) -> Option<Vec<usize>> {
    let mut result: Vec<usize> = seed.to_vec();
    let mut present: BTreeSet<usize> = seed.iter().copied().collect();
    let mut out = uncovered(instance, universe, &result);
    if out.len() <= m {
        return Some(result);
    }
    for &idx in sequence {
        if !present.insert(idx) {
            continue;
        }
        result.push(idx);
        out.subtract(&universe.pair(idx).active_ball);
        if out.len() <= m {
            return Some(result);
        }
    }
    None
}

/// Mixes the bracket's runs into an orderly structured set.
///
/// One of the two runs adjacent to the midpoint run has a component count on
/// the other side of k'; the picks exclusive to each run (plus both last
/// picks) are replayed in interleaved orders on top of the shared seed, and
/// the first ordering index where the component count crosses k' yields B',
/// ℓ and ℓ', with the special pair taken from the lower-count side.
pub fn mix_orderly_structured(
    instance: &MetricInstance,
    universe: &PairUniverse,
    bracket: &Bracket,
    k_res: usize,
    m: usize,
) -> Result<OrderlyStructured> {
    let mid_comps = bracket.run_m.component_count(universe);
    // The run whose picks exceed k' components plays the "more" role and the
    // other the "less" role; the witnessing dual is the bracket endpoint run
    // on the "more" side's end of the interval.
    let (more_run, less_run, endpoint_run) = if mid_comps <= k_res {
        (&bracket.run_l, &bracket.run_m, &bracket.run_l)
    } else {
        (&bracket.run_m, &bracket.run_r, &bracket.run_r)
    };
    if more_run.component_count(universe) <= k_res {
        return Err(Error::internal(
            "mixing requires the left role to exceed k' components",
            format!("components {}", more_run.component_count(universe)),
        ));
    }
    if less_run.component_count(universe) > k_res {
        return Err(Error::internal(
            "mixing requires the right role to have at most k' components",
            format!("components {}", less_run.component_count(universe)),
        ));
    }
    let more_last = more_run.last_pick();
    let less_last = less_run.last_pick();
    let more_set: BTreeSet<usize> = more_run.picked.iter().copied().collect();
    let less_set: BTreeSet<usize> = less_run.picked.iter().copied().collect();

    // Shared seed: picks of both runs, except the two last picks.
    let seed: Vec<usize> = more_run
        .picked
        .iter()
        .copied()
        .filter(|&p| p != more_last && p != less_last && less_set.contains(&p))
        .collect();
    // Picks exclusive to one run (minus its last pick), in pick order, with
    // the last pick appended.
    let mut more_seq: Vec<usize> = more_run
        .picked
        .iter()
        .copied()
        .filter(|&p| p != more_last && !less_set.contains(&p))
        .collect();
    more_seq.push(more_last);
    let mut less_seq: Vec<usize> = less_run
        .picked
        .iter()
        .copied()
        .filter(|&p| p != less_last && !more_set.contains(&p))
        .collect();
    less_seq.push(less_last);

    // Q^(i) covers with the suffix of the "less" sequence from i followed by
    // the whole "more" sequence; Q^(s'+1) uses the "more" sequence alone.
    let steps = less_seq.len();
    let mut orderings: Vec<Option<Vec<usize>>> = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        let mut sequence: Vec<usize> = less_seq[i..].to_vec();
        sequence.extend_from_slice(&more_seq);
        orderings.push(covering(instance, universe, &seed, &sequence, m));
    }
    let counts: Vec<Option<usize>> = orderings
        .iter()
        .map(|q| q.as_ref().map(|q| components(universe, q).len()))
        .collect();

    // Crossing index: adjacent orderings below/above k', preferring one whose
    // special pair is absent from the larger side.
    let mut chosen: Option<(usize, &Vec<usize>)> = None;
    for i in 0..steps {
        let (Some(below), Some(above)) = (counts[i], counts[i + 1]) else { continue };
        if below <= k_res && above > k_res {
            let special = less_seq[i];
            let q_above = orderings[i + 1].as_ref().expect("count implies ordering");
            if !q_above.contains(&special) {
                chosen = Some((i, q_above));
                break;
            }
        }
    }
    let Some((crossing, q_above)) = chosen else {
        return Err(Error::internal(
            "no usable crossing between the interleaved orderings",
            format!("component counts {counts:?}"),
        ));
    };
    let special = less_seq[crossing];
    let q_at = orderings[crossing].as_ref().expect("crossing ordering exists");

    let mut order: Vec<usize> = q_above.clone();
    let ell = order.len();
    order.push(special);
    let &q_at_last = q_at.last().ok_or_else(|| {
        Error::internal("crossing ordering is empty", format!("index {crossing}"))
    })?;
    let ell_prime = if q_at_last == special {
        // Q^(i*) is the seed plus the special pair alone; the prefix matching
        // it without the special pair is the seed itself.
        seed.len()
    } else {
        match order[..ell].iter().position(|&p| p == q_at_last) {
            Some(pos) => pos + 1,
            None => {
                return Err(Error::internal(
                    "last pair of the crossing ordering is missing from B'",
                    format!("pair index {q_at_last}"),
                ));
            }
        }
    };

    let os = OrderlyStructured {
        order,
        ell,
        ell_prime,
        dual: endpoint_run.dual.clone(),
    };
    check_orderly(instance, universe, &os, k_res, m)?;
    Ok(os)
}

/// Asserts OS1–OS3 verbatim; used both at construction and as the acceptance
/// invariant check.
pub fn check_orderly(
    instance: &MetricInstance,
    universe: &PairUniverse,
    os: &OrderlyStructured,
    k_res: usize,
    m: usize,
) -> Result<()> {
    if os.ell + 1 != os.order.len() || os.ell_prime > os.ell {
        return Err(Error::internal(
            "orderly indices out of range",
            format!("ℓ = {}, ℓ' = {}, |B'| = {}", os.ell, os.ell_prime, os.order.len()),
        ));
    }
    let gamma = os.dual.gamma.as_ref().ok_or_else(|| {
        Error::internal("orderly dual lacks γ", String::new())
    })?;

    // OS1: points uncovered by B'_ℓ' are raised to γ; all pairs of B' tight.
    for j in uncovered(instance, universe, os.prefix(os.ell_prime)).iter() {
        if &os.dual.alpha[j] != gamma {
            return Err(Error::internal(
                "OS1 violated: point outside B'_ℓ' with α < γ",
                format!("point {j}, α = {}, γ = {gamma}", os.dual.alpha[j]),
            ));
        }
    }
    for &idx in &os.order {
        let cp = universe.pair(idx);
        let slack = os.dual.slack(&cp.pair.radius, &cp.active_ball);
        if !slack.is_zero() {
            return Err(Error::internal(
                "OS1 violated: pair of B' is not tight",
                format!("pair index {idx}, slack {slack}"),
            ));
        }
    }

    // OS2: prefixes below ℓ leave more than m uncovered; prefixes from ℓ'
    // on, together with the special pair, leave at most m uncovered.
    for h in 0..os.ell {
        let count = uncovered(instance, universe, os.prefix(h)).len();
        if count <= m {
            return Err(Error::internal(
                "OS2 violated: short prefix already within the outlier budget",
                format!("h = {h}, uncovered {count}, m = {m}"),
            ));
        }
    }
    for h in os.ell_prime..=os.ell {
        let mut with_special: Vec<usize> = os.prefix(h).to_vec();
        with_special.push(os.special());
        let count = uncovered(instance, universe, &with_special).len();
        if count > m {
            return Err(Error::internal(
                "OS2 violated: prefix with the special pair exceeds the outlier budget",
                format!("h' = {h}, uncovered {count}, m = {m}"),
            ));
        }
    }

    // OS3: component counts straddle k'.
    let comps_ell = components(universe, os.prefix(os.ell)).len();
    let mut short_with_special: Vec<usize> = os.prefix(os.ell_prime).to_vec();
    short_with_special.push(os.special());
    let comps_short = components(universe, &short_with_special).len();
    if !(comps_ell > k_res && k_res >= comps_short) {
        return Err(Error::internal(
            "OS3 violated: component counts out of range",
            format!("comp(B'_ℓ) = {comps_ell}, comp(B'_ℓ' + special) = {comps_short}, k' = {k_res}"),
        ));
    }
    Ok(())
}

/// Diagnostics for the envelope records of a bracket: re-runs the subroutine
/// at evenly spaced interior λ samples of each recorded envelope and compares
/// the actual phase-end time with the envelope value.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EnvelopeCheck {
    /// Samples where the envelope matched the run exactly.
    pub matched: usize,
    /// Samples where the run finished before reaching the phase.
    pub skipped: usize,
    /// Samples where the values differed.
    pub mismatched: usize,
}

/// Samples every recorded envelope of a bracket at `samples` evenly spaced
/// interior points and checks pointwise equality against fresh runs.
pub fn check_envelope_samples(
    instance: &MetricInstance,
    universe: &PairUniverse,
    bracket: &Bracket,
    m: usize,
    samples: usize,
) -> Result<EnvelopeCheck> {
    let mut report = EnvelopeCheck::default();
    for record in &bracket.envelopes {
        let (lo, hi) = record.envelope.domain();
        let width = hi - lo;
        for t in 1..=samples {
            let x = lo + &width * crate::rat::rat(t as i64, samples as i64 + 1);
            let run = run_subroutine(instance, universe, &x, m)?;
            if run.phases.len() < record.phase {
                report.skipped += 1;
                continue;
            }
            if run.phases[record.phase - 1].end_time == record.envelope.eval(&x) {
                report.matched += 1;
            } else {
                report.mismatched += 1;
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::MetricInstance;
    use crate::rat::{rat, rat_int, Dist};

    fn line_instance(n: usize, k: usize, m: usize) -> MetricInstance {
        let mut dist = Vec::new();
        for i in 0..n {
            for j in 0..n {
                dist.push(Dist::Finite(rat_int((i as i64 - j as i64).abs())));
            }
        }
        MetricInstance::from_matrix(dist, k, m, None).expect("valid line instance")
    }

    #[test]
    fn zero_lambda_picks_singletons_and_stops_mid_batch() {
        let inst = line_instance(4, 1, 1);
        let cap = inst.max_finite_distance();
        let universe = inst.candidate_pairs(&cap);
        let run = run_subroutine(&inst, &universe, &rat_int(0), 1).unwrap();
        // Radius-0 pairs are tight immediately; B-order keeps centers 0,1,2
        // and stops with point 3 as the single outlier.
        assert_eq!(run.phases.len(), 1);
        assert_eq!(run.dual.gamma, Some(rat_int(0)));
        let picked_pairs: Vec<(usize, Rat)> = run
            .picked
            .iter()
            .map(|&i| (universe.pair(i).pair.center, universe.pair(i).pair.radius.clone()))
            .collect();
        assert_eq!(
            picked_pairs,
            vec![(0, rat_int(0)), (1, rat_int(0)), (2, rat_int(0))]
        );
        assert_eq!(run.component_count(&universe), 3);
    }

    #[test]
    fn large_lambda_picks_one_covering_ball() {
        let inst = line_instance(4, 1, 1);
        let cap = inst.max_finite_distance();
        let universe = inst.candidate_pairs(&cap);
        let run = run_subroutine(&inst, &universe, &rat_int(25), 1).unwrap();
        assert_eq!(run.component_count(&universe), 1);
        // First tight pair is the radius-2 ball around point 1 at time 27/4.
        assert_eq!(run.picked.len(), 1);
        let cp = universe.pair(run.picked[0]);
        assert_eq!((cp.pair.center, cp.pair.radius.clone()), (1, rat_int(2)));
        assert_eq!(run.dual.gamma, Some(rat(27, 4)));
    }

    #[test]
    fn search_brackets_the_component_threshold() {
        let inst = line_instance(4, 1, 1);
        let cap = inst.max_finite_distance();
        let universe = inst.candidate_pairs(&cap);
        let outcome = search_lambda(&inst, &universe, 1, 1).unwrap();
        let SearchOutcome::Bracket(bracket) = outcome else {
            panic!("expected a bracket, not a degenerate start");
        };
        assert!(bracket.b_l < bracket.b_r);
        assert!(bracket.run_l.component_count(&universe) > 1);
        assert!(bracket.run_r.component_count(&universe) <= 1);
        let os = mix_orderly_structured(&inst, &universe, &bracket, 1, 1).unwrap();
        check_orderly(&inst, &universe, &os, 1, 1).unwrap();

        let report = check_envelope_samples(&inst, &universe, &bracket, 1, 7).unwrap();
        assert_eq!(report.mismatched, 0);
        assert!(report.matched > 0);
    }

    #[test]
    fn infeasible_when_no_pair_reaches_an_isolated_point() {
        // Two clusters at mutual distance ∞; cap excludes nothing, but an
        // unreachable point cannot be covered from the other side.
        let dist = vec![
            Dist::Finite(rat_int(0)),
            Dist::Unreachable,
            Dist::Unreachable,
            Dist::Finite(rat_int(0)),
        ];
        let mut inst = MetricInstance::from_matrix(dist, 1, 0, None).unwrap();
        let mut active = crate::pointset::PointSet::new(2);
        active.insert(1);
        inst.set_active(active);
        let cap = rat_int(1);
        let universe = inst.candidate_pairs(&cap);
        // Only pair (1, 0) exists; covering succeeds with m = 0 trivially.
        let run = run_subroutine(&inst, &universe, &rat_int(0), 0).unwrap();
        assert_eq!(run.picked.len(), 1);
    }
}
