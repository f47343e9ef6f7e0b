//! Rounding: per-component single-ball covers, replacement of tight pair
//! sets by covers, solution assembly for the plain, outlier and lower-bound
//! pipelines, and per-component diagnostics (disjoint subsets and component
//! graphs).

use crate::dual::{components, covered_points, DualSolution};
use crate::error::{Error, Result};
use crate::instance::{MetricInstance, Pair, PairUniverse};
use crate::no_outliers::StructuredPairs;
use crate::outliers::OrderlyStructured;
use crate::pointset::PointSet;
use crate::rat::{rat_int, Dist, Rat};
use num_traits::Zero;

/// How replacement covers choose their centers: any point of X, or only
/// centers already used by the component's pairs (required under generalized
/// lower bounds).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoverMode {
    /// Any point of X may serve as the cover center.
    AnyCenter,
    /// Only centers of the component's own pairs may serve.
    Colocated,
}

/// A component together with its replacement cover and, in colocated mode,
/// the witness: the component's own smallest-radius pair at the chosen
/// center (its ball is contained in the cover ball).
#[derive(Clone, Debug)]
pub struct CoveredComponent {
    /// Universe indices of the component's pairs, in B-order.
    pub members: Vec<usize>,
    /// The replacement cover.
    pub cover: Pair,
    /// Witness inner pair (colocated mode only).
    pub witness: Option<Pair>,
}

/// Maximum finite distance from a center to every point of a set; None if
/// some point is unreachable.
fn enclosing_radius(instance: &MetricInstance, center: usize, points: &PointSet) -> Option<Rat> {
    let mut max = Rat::zero();
    for j in points.iter() {
        match instance.dist(center, j) {
            Dist::Finite(d) => {
                if *d > max {
                    max = d.clone();
                }
            }
            Dist::Unreachable => return None,
        }
    }
    Some(max)
}

/// Chooses the cheapest single ball covering all points of a component:
/// the minimum-radius (center, radius) with X(C) ⊆ B(center, radius), over
/// the mode's candidate centers, with the radius floored at the center's
/// minimum feasible radius under lower bounds. Ties break by (radius,
/// center id).
pub fn cover_component(
    instance: &MetricInstance,
    universe: &PairUniverse,
    members: &[usize],
    mode: CoverMode,
) -> Result<CoveredComponent> {
    if members.is_empty() {
        return Err(Error::Usage("cannot cover an empty component".into()));
    }
    let points = covered_points(universe, members);
    let candidates: Vec<usize> = match mode {
        CoverMode::AnyCenter => (0..instance.len()).collect(),
        CoverMode::Colocated => {
            let mut centers: Vec<usize> =
                members.iter().map(|&idx| universe.pair(idx).pair.center).collect();
            centers.sort_unstable();
            centers.dedup();
            centers
        }
    };
    let mut best: Option<(Rat, usize)> = None;
    for center in candidates {
        let Some(mut radius) = enclosing_radius(instance, center, &points) else {
            continue;
        };
        if instance.lb.is_some() {
            match instance.min_feasible_radius(center) {
                Some(floor) => {
                    if floor > radius {
                        radius = floor;
                    }
                }
                None => continue,
            }
        }
        let better = match &best {
            None => true,
            Some((r, c)) => (&radius, &center) < (r, c),
        };
        if better {
            best = Some((radius, center));
        }
    }
    let Some((radius, center)) = best else {
        return Err(Error::internal(
            "no candidate center can cover the component",
            format!("members {members:?}"),
        ));
    };
    let witness = match mode {
        CoverMode::AnyCenter => None,
        CoverMode::Colocated => members
            .iter()
            .map(|&idx| &universe.pair(idx).pair)
            .filter(|p| p.center == center)
            .min_by(|a, b| a.radius.cmp(&b.radius))
            .cloned(),
    };
    if mode == CoverMode::Colocated && witness.is_none() {
        return Err(Error::internal(
            "colocated cover chose a center without a component pair",
            format!("center {center}, members {members:?}"),
        ));
    }
    Ok(CoveredComponent { members: members.to_vec(), cover: Pair { center, radius }, witness })
}

/// Replaces each component of the pair set with its cheapest cover.
pub fn creplaced(
    instance: &MetricInstance,
    universe: &PairUniverse,
    pair_idxs: &[usize],
    mode: CoverMode,
) -> Result<Vec<CoveredComponent>> {
    components(universe, pair_idxs)
        .components
        .iter()
        .map(|c| cover_component(instance, universe, c, mode))
        .collect()
}

/// One chosen ball of a solution with the points assigned to it.
#[derive(Clone, Debug)]
pub struct SolutionBall {
    /// The chosen (center, radius).
    pub pair: Pair,
    /// Witness inner pair, when produced by a colocated cover.
    pub witness: Option<Pair>,
    /// Active points assigned to this ball.
    pub assigned: PointSet,
}

/// A feasible solution: chosen balls with an assignment of every non-outlier
/// active point, the outlier set, and the total cost Σ radii.
#[derive(Clone, Debug)]
pub struct Solution {
    /// Chosen balls.
    pub balls: Vec<SolutionBall>,
    /// Active points assigned to no ball.
    pub outliers: PointSet,
    /// Sum of the chosen radii.
    pub cost: Rat,
}

impl Solution {
    /// Builds a solution from chosen pairs by assigning every active point
    /// to the first ball containing it.
    pub fn from_pairs(instance: &MetricInstance, pairs: &[(Pair, Option<Pair>)]) -> Solution {
        let mut balls: Vec<SolutionBall> = pairs
            .iter()
            .map(|(pair, witness)| SolutionBall {
                pair: pair.clone(),
                witness: witness.clone(),
                assigned: PointSet::new(instance.len()),
            })
            .collect();
        let mut outliers = PointSet::new(instance.len());
        for j in instance.active().iter() {
            let home = balls.iter().position(|b| {
                instance.dist(b.pair.center, j).le_rat(&b.pair.radius)
            });
            match home {
                Some(h) => balls[h].assigned.insert(j),
                None => outliers.insert(j),
            }
        }
        let cost = balls.iter().map(|b| b.pair.radius.clone()).sum();
        Solution { balls, outliers, cost }
    }

    /// Builds a solution from component covers.
    pub fn from_covers(instance: &MetricInstance, covers: &[CoveredComponent]) -> Solution {
        let pairs: Vec<(Pair, Option<Pair>)> =
            covers.iter().map(|c| (c.cover.clone(), c.witness.clone())).collect();
        Solution::from_pairs(instance, &pairs)
    }
}

/// Rounds a structured set: one ball per component of B' (the special pair's
/// component merges with everything it touches). At most k' balls by SP3;
/// full coverage of X' by SP2.
pub fn assemble_no_outliers(
    instance: &MetricInstance,
    universe: &PairUniverse,
    sp: &StructuredPairs,
    k_res: usize,
    mode: CoverMode,
) -> Result<Solution> {
    let covers = creplaced(instance, universe, &sp.order, mode)?;
    if covers.len() > k_res {
        return Err(Error::internal(
            "structured rounding produced more than k' balls",
            format!("{} balls, k' = {k_res}", covers.len()),
        ));
    }
    let solution = Solution::from_covers(instance, &covers);
    if !solution.outliers.is_empty() {
        return Err(Error::internal(
            "structured rounding left active points uncovered",
            format!("uncovered {:?}", solution.outliers),
        ));
    }
    Ok(solution)
}

/// Which branch of the outlier assembly produced the solution.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutlierAssembly {
    /// ℓ' = ℓ: round the whole ordered set.
    FullPrefix,
    /// ℓ' = ℓ−1: round B'_{ℓ−1} plus the special pair.
    ShortPrefix,
    /// ℓ' ≤ ℓ−2 with too many components at ℓ: round the crossing prefix h.
    Scanned(usize),
    /// ℓ' ≤ ℓ−2 with few components at ℓ: round B'_ℓ plus the special pair.
    Extended,
}

/// Result of the outlier assembly: the solution, the dispatch branch taken,
/// and the tight pair set that was rounded (for diagnostics).
#[derive(Clone, Debug)]
pub struct OutlierRounding {
    /// The rounded solution.
    pub solution: Solution,
    /// Dispatch branch taken.
    pub case: OutlierAssembly,
    /// Universe indices of the rounded set.
    pub rounded: Vec<usize>,
}

/// Rounds an orderly structured set by the prefix-selection dispatch: every
/// branch rounds a prefix of B' together with the special pair, chosen so
/// that the cover count stays within k' and the uncovered count within m.
pub fn assemble_outliers(
    instance: &MetricInstance,
    universe: &PairUniverse,
    os: &OrderlyStructured,
    k_res: usize,
    m: usize,
    mode: CoverMode,
) -> Result<OutlierRounding> {
    let with_special = |h: usize| -> Vec<usize> {
        let mut set: Vec<usize> = os.prefix(h).to_vec();
        set.push(os.special());
        set
    };
    let comp_count =
        |set: &[usize]| -> usize { components(universe, set).len() };

    let (set, case) = if os.ell_prime == os.ell {
        (with_special(os.ell), OutlierAssembly::FullPrefix)
    } else if os.ell_prime + 1 == os.ell {
        (with_special(os.ell - 1), OutlierAssembly::ShortPrefix)
    } else if comp_count(&with_special(os.ell)) > k_res {
        let mut chosen = None;
        for h in os.ell_prime..os.ell {
            if comp_count(&with_special(h)) <= k_res && comp_count(&with_special(h + 1)) > k_res {
                chosen = Some(h);
                break;
            }
        }
        let h = chosen.ok_or_else(|| {
            Error::internal(
                "no crossing prefix in the outlier assembly scan",
                format!("ℓ' = {}, ℓ = {}", os.ell_prime, os.ell),
            )
        })?;
        (with_special(h), OutlierAssembly::Scanned(h))
    } else {
        (with_special(os.ell), OutlierAssembly::Extended)
    };

    let covers = creplaced(instance, universe, &set, mode)?;
    let solution = Solution::from_covers(instance, &covers);
    if covers.len() > k_res || solution.outliers.len() > m {
        return Err(Error::internal(
            "outlier assembly produced an infeasible solution",
            format!(
                "case {case:?}: {} balls (k' = {k_res}), {} outliers (m = {m})",
                covers.len(),
                solution.outliers.len()
            ),
        ));
    }
    Ok(OutlierRounding { solution, case, rounded: set })
}

/// Rounds a plain pair set (the degenerate branches where no search was
/// needed): one ball per component, validated against the budgets.
pub fn assemble_degenerate(
    instance: &MetricInstance,
    universe: &PairUniverse,
    pair_idxs: &[usize],
    k_res: usize,
    m: usize,
    mode: CoverMode,
) -> Result<Solution> {
    let covers = creplaced(instance, universe, pair_idxs, mode)?;
    let solution = Solution::from_covers(instance, &covers);
    if covers.len() > k_res || solution.outliers.len() > m {
        return Err(Error::internal(
            "degenerate rounding produced an infeasible solution",
            format!(
                "{} balls (k' = {k_res}), {} outliers (m = {m})",
                covers.len(),
                solution.outliers.len()
            ),
        ));
    }
    Ok(solution)
}

/// Builds the final assignment under generalized lower bounds from the
/// residual solution pairs (with their witness inner pairs) and the guessed
/// pairs, by the three-stage procedure:
/// 1. each witness ball's points go to its center (witness balls are
///    pairwise disjoint and allowed);
/// 2. guessed-pair components touching a solution pair merge into its
///    center, consuming the guessed pairs involved;
/// 3. remaining guessed components go to their own first center.
/// Unassigned points become outliers. The cost is the sum of the enclosing
/// radii of the assigned sets and is checked against sr(P) + 2·sr(P_g).
pub fn glb_assign(
    instance: &MetricInstance,
    solution_pairs: &[(Pair, Pair)],
    guessed: &[Pair],
    m: usize,
) -> Result<Solution> {
    let n = instance.len();
    // Witness balls must be pairwise disjoint.
    let witness_balls: Vec<PointSet> = solution_pairs
        .iter()
        .map(|(_, w)| instance.ball(w.center, &w.radius))
        .collect();
    for a in 0..witness_balls.len() {
        for b in (a + 1)..witness_balls.len() {
            if witness_balls[a].intersects(&witness_balls[b]) {
                return Err(Error::internal(
                    "witness balls are not pairwise disjoint",
                    format!(
                        "pairs {:?} and {:?}",
                        solution_pairs[a].1, solution_pairs[b].1
                    ),
                ));
            }
        }
    }

    let mut assigned_to: Vec<Option<usize>> = vec![None; n]; // center per point
    // Stage 1: witness balls.
    for ((pair, _), ball) in solution_pairs.iter().zip(&witness_balls) {
        for j in ball.iter() {
            assigned_to[j] = Some(pair.center);
        }
    }

    // Stage 2: merge guessed components touching each solution pair.
    let guessed_balls: Vec<PointSet> =
        guessed.iter().map(|p| instance.ball(p.center, &p.radius)).collect();
    let mut remaining: Vec<usize> = (0..guessed.len()).collect();
    for (pair, _) in solution_pairs {
        let pair_ball = instance.ball(pair.center, &pair.radius);
        // Component of the solution pair within {pair} ∪ remaining guesses.
        let mut component: Vec<usize> = Vec::new();
        let mut reach = pair_ball.clone();
        loop {
            let mut grew = false;
            for &g in &remaining {
                if !component.contains(&g) && guessed_balls[g].intersects(&reach) {
                    component.push(g);
                    reach.union_with(&guessed_balls[g]);
                    grew = true;
                }
            }
            if !grew {
                break;
            }
        }
        for j in reach.iter() {
            if assigned_to[j].is_none() {
                assigned_to[j] = Some(pair.center);
            }
        }
        // Consume exactly the guessed pairs merged into this component;
        // guesses touching other solution pairs stay for their own pass.
        remaining.retain(|g| !component.contains(g));
    }

    // Stage 3: remaining guessed components go to their first center.
    while let Some(&first) = remaining.first() {
        let mut component: Vec<usize> = vec![first];
        let mut reach = guessed_balls[first].clone();
        loop {
            let mut grew = false;
            for &g in &remaining {
                if !component.contains(&g) && guessed_balls[g].intersects(&reach) {
                    component.push(g);
                    reach.union_with(&guessed_balls[g]);
                    grew = true;
                }
            }
            if !grew {
                break;
            }
        }
        let center = guessed[first].center;
        for j in reach.iter() {
            if assigned_to[j].is_none() {
                assigned_to[j] = Some(center);
            }
        }
        remaining.retain(|g| !component.contains(g));
    }

    // Collect per-center assignments and enclosing radii.
    let mut centers: Vec<usize> = assigned_to.iter().flatten().copied().collect();
    centers.sort_unstable();
    centers.dedup();
    let mut balls: Vec<SolutionBall> = Vec::new();
    for center in centers {
        let mut assigned = PointSet::new(n);
        for (j, c) in assigned_to.iter().enumerate() {
            if *c == Some(center) {
                assigned.insert(j);
            }
        }
        let radius = enclosing_radius(instance, center, &assigned).ok_or_else(|| {
            Error::internal(
                "assigned point unreachable from its center",
                format!("center {center}"),
            )
        })?;
        if let Some(lb) = &instance.lb {
            if !lb.allows(instance, center, &assigned) {
                return Err(Error::internal(
                    "assigned set violates the center's lower bound",
                    format!("center {center}, assigned {assigned:?}"),
                ));
            }
        }
        let witness = solution_pairs
            .iter()
            .find(|(p, _)| p.center == center)
            .map(|(_, w)| w.clone());
        balls.push(SolutionBall { pair: Pair { center, radius }, witness, assigned });
    }

    let mut outliers = PointSet::new(n);
    for j in instance.active().iter() {
        if assigned_to[j].is_none() {
            outliers.insert(j);
        }
    }
    if outliers.len() > m {
        return Err(Error::internal(
            "lower-bound assignment exceeds the outlier budget",
            format!("{} outliers, m = {m}", outliers.len()),
        ));
    }

    let cost: Rat = balls.iter().map(|b| b.pair.radius.clone()).sum();
    let bound: Rat = solution_pairs.iter().map(|(p, _)| p.radius.clone()).sum::<Rat>()
        + rat_int(2) * guessed.iter().map(|p| p.radius.clone()).sum::<Rat>();
    if cost > bound {
        return Err(Error::internal(
            "lower-bound assignment cost exceeds sr(P) + 2·sr(P_g)",
            format!("cost {cost}, bound {bound}"),
        ));
    }
    Ok(Solution { balls, outliers, cost })
}

/// Vertex of a component graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GraphVertex {
    /// A point of X(C).
    Point(usize),
    /// A ball of the maximal antichain, by position in `antichain`.
    Ball(usize),
    /// The frontier pendant of an antichain ball.
    Frontier(usize),
}

/// The weighted component graph: one point vertex per point of X(C), one
/// ball vertex and one frontier vertex per pair of a maximal antichain of
/// the component under ball inclusion; point–ball edges of weight r for
/// containment, ball–frontier pendant edges of weight r.
#[derive(Clone, Debug)]
pub struct ComponentGraph {
    /// Vertices; index = position.
    pub vertices: Vec<GraphVertex>,
    /// Antichain pairs (dominated pairs dropped; their points remain).
    pub antichain: Vec<Pair>,
    /// Pairwise shortest-path distances (None = unreachable).
    pub dist: Vec<Vec<Option<Rat>>>,
}

/// Builds the component graph of a component's pair set.
pub fn component_graph(
    _instance: &MetricInstance,
    universe: &PairUniverse,
    members: &[usize],
) -> ComponentGraph {
    // Maximal antichain under ball inclusion: scan by descending ball size
    // (B-order tie-break) and keep pairs whose ball is not contained in a
    // kept ball.
    let mut by_size: Vec<usize> = members.to_vec();
    by_size.sort_by_key(|&idx| (usize::MAX - universe.pair(idx).ball.len(), idx));
    let mut kept: Vec<usize> = Vec::new();
    for idx in by_size {
        let ball = &universe.pair(idx).ball;
        if !kept.iter().any(|&k| ball.is_subset(&universe.pair(k).ball)) {
            kept.push(idx);
        }
    }
    kept.sort_unstable();
    let antichain: Vec<Pair> = kept.iter().map(|&idx| universe.pair(idx).pair.clone()).collect();

    let points: Vec<usize> = covered_points(universe, members).iter().collect();
    let mut vertices: Vec<GraphVertex> = points.iter().map(|&j| GraphVertex::Point(j)).collect();
    for b in 0..antichain.len() {
        vertices.push(GraphVertex::Ball(b));
        vertices.push(GraphVertex::Frontier(b));
    }
    let v = vertices.len();
    let mut dist: Vec<Vec<Option<Rat>>> = vec![vec![None; v]; v];
    for (i, row) in dist.iter_mut().enumerate() {
        row[i] = Some(Rat::zero());
    }
    let ball_vertex = |b: usize| points.len() + 2 * b;
    let frontier_vertex = |b: usize| points.len() + 2 * b + 1;
    let connect = |dist: &mut Vec<Vec<Option<Rat>>>, a: usize, b: usize, w: &Rat| {
        if dist[a][b].as_ref().is_none_or(|d| w < d) {
            dist[a][b] = Some(w.clone());
            dist[b][a] = Some(w.clone());
        }
    };
    for (b, (pair, &idx)) in antichain.iter().zip(&kept).enumerate() {
        connect(&mut dist, ball_vertex(b), frontier_vertex(b), &pair.radius);
        for (p, &j) in points.iter().enumerate() {
            if universe.pair(idx).ball.contains(j) {
                connect(&mut dist, ball_vertex(b), p, &pair.radius);
            }
        }
    }
    // Floyd–Warshall.
    for via in 0..v {
        for a in 0..v {
            let Some(d1) = dist[a][via].clone() else { continue };
            for b in 0..v {
                let Some(d2) = &dist[via][b] else { continue };
                let candidate = &d1 + d2;
                if dist[a][b].as_ref().is_none_or(|d| candidate < *d) {
                    dist[a][b] = Some(candidate);
                }
            }
        }
    }
    ComponentGraph { vertices, antichain, dist }
}

impl ComponentGraph {
    /// Eccentricity of a vertex; None if the graph is disconnected from it.
    pub fn eccentricity(&self, vertex: usize) -> Option<Rat> {
        let mut max = Rat::zero();
        for other in 0..self.vertices.len() {
            match &self.dist[vertex][other] {
                Some(d) => {
                    if *d > max {
                        max = d.clone();
                    }
                }
                None => return None,
            }
        }
        Some(max)
    }

    /// The graph radius and a center achieving it, with frontier vertices
    /// excluded as centers (they are never strictly better).
    pub fn radius(&self) -> Result<(usize, Rat)> {
        let mut best: Option<(usize, Rat)> = None;
        for (vertex, kind) in self.vertices.iter().enumerate() {
            if matches!(kind, GraphVertex::Frontier(_)) {
                continue;
            }
            let Some(ecc) = self.eccentricity(vertex) else {
                return Err(Error::internal(
                    "component graph is disconnected",
                    format!("vertex {vertex}"),
                ));
            };
            let better = match &best {
                None => true,
                Some((_, r)) => ecc < *r,
            };
            if better {
                best = Some((vertex, ecc));
            }
        }
        best.ok_or_else(|| Error::internal("component graph has no center candidates", String::new()))
    }
}

/// Maximum-Σr subset of a component with pairwise disjoint balls. Exact by
/// branch and bound up to 20 pairs; greedy by descending radius above that,
/// with the flag reporting whether the result is exact.
pub fn max_disjoint_subset(universe: &PairUniverse, members: &[usize]) -> (Vec<usize>, bool) {
    const EXACT_LIMIT: usize = 20;
    if members.len() <= EXACT_LIMIT {
        // Order by descending radius so pruning on the remaining sum bites.
        let mut order: Vec<usize> = members.to_vec();
        order.sort_by(|&a, &b| {
            universe.pair(b).pair.radius.cmp(&universe.pair(a).pair.radius).then(a.cmp(&b))
        });
        let mut suffix_sum: Vec<Rat> = vec![Rat::zero(); order.len() + 1];
        for i in (0..order.len()).rev() {
            suffix_sum[i] = &suffix_sum[i + 1] + &universe.pair(order[i]).pair.radius;
        }
        let mut best: Vec<usize> = Vec::new();
        let mut best_sum = Rat::zero();
        let mut chosen: Vec<usize> = Vec::new();
        fn explore(
            universe: &PairUniverse,
            order: &[usize],
            suffix_sum: &[Rat],
            pos: usize,
            sum: Rat,
            chosen: &mut Vec<usize>,
            best: &mut Vec<usize>,
            best_sum: &mut Rat,
        ) {
            if &sum > best_sum {
                *best_sum = sum.clone();
                *best = chosen.clone();
            }
            if pos == order.len() || &sum + &suffix_sum[pos] <= *best_sum {
                return;
            }
            let idx = order[pos];
            let disjoint = chosen
                .iter()
                .all(|&c| !universe.pair(c).ball.intersects(&universe.pair(idx).ball));
            if disjoint {
                chosen.push(idx);
                let next = &sum + &universe.pair(idx).pair.radius;
                explore(universe, order, suffix_sum, pos + 1, next, chosen, best, best_sum);
                chosen.pop();
            }
            explore(universe, order, suffix_sum, pos + 1, sum, chosen, best, best_sum);
        }
        explore(
            universe,
            &order,
            &suffix_sum,
            0,
            Rat::zero(),
            &mut chosen,
            &mut best,
            &mut best_sum,
        );
        if best.is_empty() && !members.is_empty() {
            // All radii zero: any single pair is a maximum.
            best.push(members[0]);
        }
        best.sort_unstable();
        (best, true)
    } else {
        let mut order: Vec<usize> = members.to_vec();
        order.sort_by(|&a, &b| {
            universe.pair(b).pair.radius.cmp(&universe.pair(a).pair.radius).then(a.cmp(&b))
        });
        let mut chosen: Vec<usize> = Vec::new();
        for idx in order {
            if chosen
                .iter()
                .all(|&c| !universe.pair(c).ball.intersects(&universe.pair(idx).ball))
            {
                chosen.push(idx);
            }
        }
        chosen.sort_unstable();
        (chosen, false)
    }
}

/// Checks the disjoint-tight-set bound: for pairwise-disjoint tight pairs B'
/// and a set U of uncovered points with α = γ,
/// `sr(B') ≤ Σ_{j∈X'} α_j − |B'|·λ − |U|·γ + |B'|·slack_allowance`
/// (the allowance accommodates almost-tight pairs with slack up to μ).
pub fn check_disjoint_tight_bound(
    instance: &MetricInstance,
    universe: &PairUniverse,
    dual: &DualSolution,
    disjoint: &[usize],
    tight_uncovered: &PointSet,
    slack_allowance: &Rat,
) -> Result<()> {
    let sr: Rat = disjoint.iter().map(|&idx| universe.pair(idx).pair.radius.clone()).sum();
    let alpha_total: Rat = instance.active().iter().map(|j| dual.alpha[j].clone()).sum();
    let gamma = dual.gamma.clone().unwrap_or_else(Rat::zero);
    let bound = alpha_total
        - rat_int(disjoint.len() as i64) * &dual.lambda
        - rat_int(tight_uncovered.len() as i64) * gamma
        + rat_int(disjoint.len() as i64) * slack_allowance;
    if sr > bound {
        return Err(Error::internal(
            "disjoint tight set exceeds the dual bound",
            format!("sr = {sr}, bound = {bound}"),
        ));
    }
    Ok(())
}

/// Per-component diagnostics: the chosen cover radius against the exact (or
/// greedy) disjoint-subset mass and the component-graph radius.
#[derive(Clone, Debug)]
pub struct CoverDiagnostic {
    /// Radius of the chosen cover.
    pub cover_radius: Rat,
    /// Σr over the max disjoint subset.
    pub disjoint_sum: Rat,
    /// Whether the disjoint subset is exact.
    pub disjoint_exact: bool,
    /// Component-graph radius.
    pub graph_rad: Rat,
}

/// Computes the cover diagnostics of one component.
pub fn cover_diagnostics(
    instance: &MetricInstance,
    universe: &PairUniverse,
    members: &[usize],
    mode: CoverMode,
) -> Result<CoverDiagnostic> {
    let cover = cover_component(instance, universe, members, mode)?;
    let (disjoint, exact) = max_disjoint_subset(universe, members);
    let disjoint_sum = disjoint.iter().map(|&idx| universe.pair(idx).pair.radius.clone()).sum();
    let graph = component_graph(instance, universe, members);
    let (_, graph_rad) = graph.radius()?;
    Ok(CoverDiagnostic {
        cover_radius: cover.cover.radius,
        disjoint_sum,
        disjoint_exact: exact,
        graph_rad,
    })
}

/// Validates a solution against the instance and budgets; returns the list
/// of violations (empty = feasible).
pub fn validate_solution(
    instance: &MetricInstance,
    solution: &Solution,
    k: usize,
    m: usize,
) -> Vec<String> {
    let mut violations = Vec::new();
    if solution.balls.len() > k {
        violations.push(format!("{} balls exceed the budget k = {k}", solution.balls.len()));
    }
    if solution.outliers.len() > m {
        violations.push(format!(
            "{} outliers exceed the budget m = {m}",
            solution.outliers.len()
        ));
    }
    let mut seen = solution.outliers.clone();
    for (b, ball) in solution.balls.iter().enumerate() {
        for j in ball.assigned.iter() {
            if seen.contains(j) {
                violations.push(format!("point {j} assigned more than once"));
            }
            seen.insert(j);
            if !instance.dist(ball.pair.center, j).le_rat(&ball.pair.radius) {
                violations.push(format!(
                    "point {j} lies outside its assigned ball {b} (center {})",
                    ball.pair.center
                ));
            }
        }
        if let Some(lb) = &instance.lb {
            if !lb.allows(instance, ball.pair.center, &ball.assigned) {
                violations.push(format!(
                    "ball {b} (center {}) violates its lower bound",
                    ball.pair.center
                ));
            }
        }
    }
    for j in instance.active().iter() {
        if !seen.contains(j) {
            violations.push(format!("active point {j} neither assigned nor an outlier"));
        }
    }
    let cost: Rat = solution.balls.iter().map(|b| b.pair.radius.clone()).sum();
    if cost != solution.cost {
        violations.push(format!("stored cost {} differs from Σ radii {cost}", solution.cost));
    }
    violations
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat_int;

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
    fn cover_of_singleton_component_is_no_worse_than_the_pair() {
        let inst = line_instance(4, 1, 0);
        let cap = inst.max_finite_distance();
        let universe = inst.candidate_pairs(&cap);
        // Find the pair (1, 1): ball {0, 1, 2}.
        let idx = (0..universe.len())
            .find(|&i| {
                universe.pair(i).pair.center == 1 && universe.pair(i).pair.radius == rat_int(1)
            })
            .unwrap();
        let cover = cover_component(&inst, &universe, &[idx], CoverMode::AnyCenter).unwrap();
        assert!(cover.cover.radius <= rat_int(1));
        assert_eq!(cover.cover, Pair { center: 1, radius: rat_int(1) });
    }

    #[test]
    fn graph_radius_of_single_pair_with_points() {
        let inst = line_instance(3, 1, 0);
        let cap = inst.max_finite_distance();
        let universe = inst.candidate_pairs(&cap);
        let idx = (0..universe.len())
            .find(|&i| {
                universe.pair(i).pair.center == 1 && universe.pair(i).pair.radius == rat_int(1)
            })
            .unwrap();
        let graph = component_graph(&inst, &universe, &[idx]);
        let (center, rad) = graph.radius().unwrap();
        assert_eq!(rad, rat_int(1));
        assert!(matches!(graph.vertices[center], GraphVertex::Ball(_) | GraphVertex::Point(_)));
    }

    #[test]
    fn disjoint_subset_of_nested_balls_is_the_largest() {
        let inst = line_instance(5, 1, 0);
        let cap = inst.max_finite_distance();
        let universe = inst.candidate_pairs(&cap);
        // Pairs (2,1) and (2,2): nested balls around the middle point.
        let inner = (0..universe.len())
            .find(|&i| {
                universe.pair(i).pair.center == 2 && universe.pair(i).pair.radius == rat_int(1)
            })
            .unwrap();
        let outer = (0..universe.len())
            .find(|&i| {
                universe.pair(i).pair.center == 2 && universe.pair(i).pair.radius == rat_int(2)
            })
            .unwrap();
        let (best, exact) = max_disjoint_subset(&universe, &[inner, outer]);
        assert!(exact);
        assert_eq!(best, vec![outer]);
    }

    #[test]
    fn validate_flags_excess_outliers() {
        let inst = line_instance(3, 1, 0);
        let solution = Solution::from_pairs(&inst, &[]);
        let violations = validate_solution(&inst, &solution, 1, 0);
        assert!(violations.iter().any(|v| v.contains("outliers")));
    }

    #[test]
    fn assignment_without_lower_bounds_covers_every_point() {
        let inst = line_instance(4, 2, 0);
        let pairs = vec![
            (Pair { center: 0, radius: rat_int(1) }, None),
            (Pair { center: 3, radius: rat_int(1) }, None),
        ];
        let solution = Solution::from_pairs(&inst, &pairs);
        assert!(solution.outliers.is_empty());
        assert_eq!(solution.cost, rat_int(2));
        assert!(validate_solution(&inst, &solution, 2, 0).is_empty());
    }
}
