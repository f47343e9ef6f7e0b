//! Ground truth and experiment fabric: brute-force exact solver, the tight
//! instance family, seeded random instance generation, diameter-cost
//! evaluation and ratio reporting.

use crate::error::{Error, Result};
use crate::instance::{LowerBoundSpec, MetricInstance, Pair};
use crate::pointset::PointSet;
use crate::rat::{rat, rat_int, Dist, Rat};
use num_traits::Zero;
use serde::Serialize;

/// An optimal solution found by exhaustive search.
#[derive(Clone, Debug)]
pub struct OracleSolution {
    /// Minimum total radius.
    pub cost: Rat,
    /// The chosen pairs.
    pub pairs: Vec<Pair>,
    /// Active points left uncovered.
    pub outliers: PointSet,
}

/// Candidate ball for the exhaustive search.
struct OracleCandidate {
    pair: Pair,
    ball: PointSet,
}

/// Per-center candidates: one pair per distinct ball, at the smallest radius
/// that produces it (floored at the minimum feasible radius under lower
/// bounds; centers with no feasible radius are dropped).
fn oracle_candidates(instance: &MetricInstance) -> Vec<OracleCandidate> {
    let mut candidates = Vec::new();
    for center in 0..instance.len() {
        let floor = if instance.lb.is_some() {
            match instance.min_feasible_radius(center) {
                Some(f) => Some(f),
                None => continue,
            }
        } else {
            None
        };
        let mut radii: Vec<Rat> = (0..instance.len())
            .filter_map(|j| match instance.dist(center, j) {
                Dist::Finite(d) => Some(d.clone()),
                Dist::Unreachable => None,
            })
            .collect();
        if let Some(f) = &floor {
            radii.retain(|r| r >= f);
            radii.push(f.clone());
        }
        radii.sort();
        radii.dedup();
        let mut last_ball: Option<PointSet> = None;
        for radius in radii {
            let ball = instance.ball(center, &radius);
            if last_ball.as_ref() == Some(&ball) {
                continue;
            }
            last_ball = Some(ball.clone());
            candidates.push(OracleCandidate { pair: Pair { center, radius }, ball });
        }
    }
    candidates
}

/// Finds an assignment of covered active points to chosen balls that
/// satisfies the instance's lower bounds: nearest-feasible assignment first,
/// exhaustive assignment for up to 12 covered points as a fallback. Returns
/// the per-point chosen-ball index; None if no feasible assignment was found.
pub fn assign_with_lower_bounds(
    instance: &MetricInstance,
    balls: &[PointSet],
    centers: &[usize],
) -> Option<Vec<Option<usize>>> {
    let n = instance.len();
    let Some(lb) = &instance.lb else {
        // Without lower bounds, first-fit is always feasible.
        let mut assigned: Vec<Option<usize>> = vec![None; n];
        for j in instance.active().iter() {
            assigned[j] = balls.iter().position(|b| b.contains(j));
        }
        return Some(assigned);
    };
    // Nearest covering center per point.
    let mut assigned: Vec<Option<usize>> = vec![None; n];
    for j in instance.active().iter() {
        let mut best: Option<(Rat, usize)> = None;
        for (c, ball) in balls.iter().enumerate() {
            if !ball.contains(j) {
                continue;
            }
            let Dist::Finite(d) = instance.dist(centers[c], j) else { continue };
            let better = match &best {
                None => true,
                Some((bd, _)) => d < bd,
            };
            if better {
                best = Some((d.clone(), c));
            }
        }
        assigned[j] = best.map(|(_, c)| c);
    }
    let feasible = |assigned: &[Option<usize>]| -> bool {
        centers.iter().enumerate().all(|(c, &center)| {
            let mut set = PointSet::new(n);
            for (j, a) in assigned.iter().enumerate() {
                if *a == Some(c) {
                    set.insert(j);
                }
            }
            set.is_empty() || lb.allows(instance, center, &set)
        })
    };
    if feasible(&assigned) {
        return Some(assigned);
    }
    // Exhaustive fallback over the covered points' ball choices.
    let covered: Vec<usize> = instance
        .active()
        .iter()
        .filter(|&j| balls.iter().any(|b| b.contains(j)))
        .collect();
    if covered.len() > 12 {
        return None;
    }
    let options: Vec<Vec<usize>> = covered
        .iter()
        .map(|&j| (0..balls.len()).filter(|&c| balls[c].contains(j)).collect())
        .collect();
    let mut pick = vec![0usize; covered.len()];
    loop {
        let mut assigned: Vec<Option<usize>> = vec![None; n];
        for (idx, &j) in covered.iter().enumerate() {
            assigned[j] = Some(options[idx][pick[idx]]);
        }
        if feasible(&assigned) {
            return Some(assigned);
        }
        // Advance the mixed-radix counter.
        let mut pos = 0;
        loop {
            if pos == covered.len() {
                return None;
            }
            pick[pos] += 1;
            if pick[pos] < options[pos].len() {
                break;
            }
            pick[pos] = 0;
            pos += 1;
        }
    }
}

/// Checks whether the chosen balls admit an assignment satisfying the
/// instance's lower bounds.
fn lb_assignable(instance: &MetricInstance, chosen: &[&OracleCandidate]) -> bool {
    if instance.lb.is_none() {
        return true;
    }
    let balls: Vec<PointSet> = chosen.iter().map(|c| c.ball.clone()).collect();
    let centers: Vec<usize> = chosen.iter().map(|c| c.pair.center).collect();
    assign_with_lower_bounds(instance, &balls, &centers).is_some()
}

/// Default enumeration budget: number of subsets the search may visit.
pub const DEFAULT_ORACLE_BUDGET: u64 = 10_000_000;

fn subset_count(candidates: usize, k: usize) -> u64 {
    let mut total: u64 = 0;
    for t in 0..=k {
        let mut c: u64 = 1;
        for i in 0..t {
            c = match c.checked_mul((candidates - i) as u64) {
                Some(v) => v / (i as u64 + 1),
                None => return u64::MAX,
            };
        }
        total = total.saturating_add(c);
    }
    total
}

fn brute_force_with_order(
    instance: &MetricInstance,
    budget: u64,
    reverse: bool,
) -> Result<Option<OracleSolution>> {
    let mut candidates = oracle_candidates(instance);
    if reverse {
        candidates.reverse();
    }
    if subset_count(candidates.len(), instance.k) > budget {
        return Ok(None);
    }
    let required = instance.active_len().saturating_sub(instance.m);
    let mut best: Option<OracleSolution> = None;

    // Depth-first over subsets of size ≤ k, by ascending start index.
    let mut chosen: Vec<&OracleCandidate> = Vec::new();
    fn explore<'a>(
        instance: &MetricInstance,
        candidates: &'a [OracleCandidate],
        start: usize,
        chosen: &mut Vec<&'a OracleCandidate>,
        covered: &PointSet,
        cost: &Rat,
        required: usize,
        best: &mut Option<OracleSolution>,
    ) {
        if covered.intersection_len(instance.active()) >= required
            && lb_assignable(instance, chosen)
        {
            let better = match best {
                None => true,
                Some(b) => *cost < b.cost,
            };
            if better {
                let mut outliers = instance.active().clone();
                outliers.subtract(covered);
                *best = Some(OracleSolution {
                    cost: cost.clone(),
                    pairs: chosen.iter().map(|c| c.pair.clone()).collect(),
                    outliers,
                });
            }
        }
        if chosen.len() == instance.k {
            return;
        }
        for idx in start..candidates.len() {
            if let Some(b) = best {
                if cost + &candidates[idx].pair.radius >= b.cost {
                    // Radii only grow the cost; this branch cannot improve
                    // unless a cheaper candidate follows, so keep scanning.
                    continue;
                }
            }
            chosen.push(&candidates[idx]);
            let mut next_covered = covered.clone();
            next_covered.union_with(&candidates[idx].ball);
            let next_cost = cost + &candidates[idx].pair.radius;
            explore(
                instance,
                candidates,
                idx + 1,
                chosen,
                &next_covered,
                &next_cost,
                required,
                best,
            );
            chosen.pop();
        }
    }
    explore(
        instance,
        &candidates,
        0,
        &mut chosen,
        &PointSet::new(instance.len()),
        &Rat::zero(),
        required,
        &mut best,
    );
    match best {
        Some(solution) => Ok(Some(solution)),
        None => Err(Error::Infeasible(format!(
            "no subset of at most {} balls covers all but {} points",
            instance.k, instance.m
        ))),
    }
}

/// Exhaustive optimum over subsets of at most k candidate balls with at most
/// m uncovered active points (and, under lower bounds, an existing feasible
/// assignment). Returns None when the enumeration would exceed the budget.
pub fn brute_force_opt(
    instance: &MetricInstance,
    budget: Option<u64>,
) -> Result<Option<OracleSolution>> {
    brute_force_with_order(instance, budget.unwrap_or(DEFAULT_ORACLE_BUDGET), false)
}

/// The same search with the candidate enumeration reversed; the optimum cost
/// must not depend on the order.
pub fn brute_force_opt_reversed(
    instance: &MetricInstance,
    budget: Option<u64>,
) -> Result<Option<OracleSolution>> {
    brute_force_with_order(instance, budget.unwrap_or(DEFAULT_ORACLE_BUDGET), true)
}

/// Builds the tight instance family: k disjoint copies of the graph on
/// points u_1..u_h and w_{ij} (i, j ∈ [h]) with unit edges {u_c, w_{ij}} for
/// every c ≠ i, under the shortest-path metric; points of different copies
/// are mutually unreachable.
pub fn tight_instance(h: usize, k: usize) -> Result<MetricInstance> {
    if h < 3 {
        return Err(Error::Usage(format!("tight family requires h ≥ 3, got {h}")));
    }
    if k == 0 {
        return Err(Error::Usage("tight family requires k ≥ 1".into()));
    }
    let per_copy = h + h * h;
    let n = k * per_copy;
    let mut dist = vec![Dist::Unreachable; n * n];
    // Breadth-first search inside one copy; local index: c in 0..h are the
    // hub points, h + i*h + j is w_{ij}.
    let adjacency: Vec<Vec<usize>> = {
        let mut adj = vec![Vec::new(); per_copy];
        for c in 0..h {
            for i in 0..h {
                if i == c {
                    continue;
                }
                for j in 0..h {
                    let w = h + i * h + j;
                    adj[c].push(w);
                    adj[w].push(c);
                }
            }
        }
        adj
    };
    let mut local = vec![vec![usize::MAX; per_copy]; per_copy];
    for (start, row) in local.iter_mut().enumerate() {
        row[start] = 0;
        let mut queue = std::collections::VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &next in &adjacency[v] {
                if row[next] == usize::MAX {
                    row[next] = row[v] + 1;
                    queue.push_back(next);
                }
            }
        }
    }
    for copy in 0..k {
        let base = copy * per_copy;
        for a in 0..per_copy {
            for b in 0..per_copy {
                if local[a][b] != usize::MAX {
                    dist[(base + a) * n + (base + b)] =
                        Dist::Finite(rat_int(local[a][b] as i64));
                }
            }
        }
    }
    MetricInstance::from_matrix(dist, k, 0, None)
}

/// A deterministic, portable 64-bit generator (documented constants; output
/// identical on every platform).
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    /// Seeds the generator.
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    /// Next 64-bit value.
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// A rational uniform in [0, 1) with 32-bit resolution.
    pub fn next_unit(&mut self) -> Rat {
        rat((self.next_u64() >> 32) as i64, 1) / rat_int(1i64 << 32)
    }

    /// A value in 0..bound.
    pub fn next_below(&mut self, bound: usize) -> usize {
        (self.next_u64() % bound as u64) as usize
    }
}

/// Generates a random instance: n points uniform in the unit cube, with
/// Euclidean distances rationalized onto the standard grid. Deterministic in
/// the seed.
pub fn random_instance(
    n: usize,
    dim: usize,
    k: usize,
    m: usize,
    lb: Option<LowerBoundSpec>,
    seed: u64,
) -> Result<MetricInstance> {
    let mut rng = SplitMix64::new(seed);
    let points: Vec<Vec<Rat>> =
        (0..n).map(|_| (0..dim).map(|_| rng.next_unit()).collect()).collect();
    MetricInstance::from_points(&points, crate::instance::DEFAULT_SQRT_GRID_LOG2, k, m, lb)
}

/// Sum over clusters of the maximum pairwise distance among assigned points;
/// outliers excluded.
pub fn diameter_cost(
    instance: &MetricInstance,
    solution: &crate::rounding::Solution,
) -> Result<Rat> {
    let mut total = Rat::zero();
    for ball in &solution.balls {
        let members: Vec<usize> = ball.assigned.iter().collect();
        let mut diameter = Rat::zero();
        for (ai, &a) in members.iter().enumerate() {
            for &b in &members[ai + 1..] {
                match instance.dist(a, b) {
                    Dist::Finite(d) => {
                        if *d > diameter {
                            diameter = d.clone();
                        }
                    }
                    Dist::Unreachable => {
                        return Err(Error::internal(
                            "unreachable points assigned to one cluster",
                            format!("points {a} and {b}"),
                        ));
                    }
                }
            }
        }
        total += diameter;
    }
    Ok(total)
}

/// One row of a benchmark report.
#[derive(Clone, Debug, Serialize)]
pub struct BenchRow {
    /// Instance digest.
    pub digest: String,
    /// Mode the solver ran in.
    pub mode: String,
    /// Solver cost (rational string).
    pub solver_cost: String,
    /// Oracle cost, when the oracle ran.
    pub oracle_cost: Option<String>,
    /// Dual objective, when available.
    pub dual_objective: Option<String>,
    /// solver cost / oracle cost, exact, when the oracle ran.
    pub ratio: Option<String>,
    /// Wall time in milliseconds.
    pub wall_ms: u128,
}

/// A benchmark report: per-instance rows plus aggregate statistics.
#[derive(Clone, Debug, Default, Serialize)]
pub struct BenchReport {
    /// Per-instance rows, in batch order.
    pub rows: Vec<BenchRow>,
    /// Number of rows with an oracle value.
    pub oracle_rows: usize,
    /// Maximum ratio over rows with an oracle value (rational string).
    pub max_ratio: Option<String>,
}

impl BenchReport {
    /// Assembles the aggregates from the rows.
    pub fn finalize(rows: Vec<BenchRow>) -> BenchReport {
        let oracle_rows = rows.iter().filter(|r| r.oracle_cost.is_some()).count();
        let max_ratio = rows
            .iter()
            .filter_map(|r| r.ratio.as_ref())
            .filter_map(|r| crate::rat::parse_rat(r))
            .max()
            .map(|r| crate::rat::format_rat(&r));
        BenchReport { rows, oracle_rows, max_ratio }
    }

    /// Plain-text table for standard output.
    pub fn table(&self) -> String {
        let mut out = String::from("digest\tmode\tsolver\toracle\tdual\tratio\twall_ms\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                row.digest,
                row.mode,
                row.solver_cost,
                row.oracle_cost.as_deref().unwrap_or("-"),
                row.dual_objective.as_deref().unwrap_or("-"),
                row.ratio.as_deref().unwrap_or("-"),
                row.wall_ms
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tight_family_distances_match_the_construction() {
        let inst = tight_instance(3, 1).unwrap();
        assert_eq!(inst.len(), 12);
        // Hub to its own column leaf: 3; hub to another column's leaf: 1.
        let v1 = 0;
        let w11 = 3; // h + 0*h + 0
        let w21 = 6; // h + 1*h + 0
        assert_eq!(inst.dist(v1, w11), &Dist::Finite(rat_int(3)));
        assert_eq!(inst.dist(v1, w21), &Dist::Finite(rat_int(1)));
        // Ball sizes from the construction: |B(u_1, 1)| = h²−h+1 and
        // |B(w_{11}, 2)| = h²+h−1.
        assert_eq!(inst.ball(v1, &rat_int(1)).len(), 7);
        assert_eq!(inst.ball(w11, &rat_int(2)).len(), 11);
        assert!(inst.verify_metric().is_empty());
    }

    #[test]
    fn tight_family_copies_are_unreachable() {
        let inst = tight_instance(3, 2).unwrap();
        assert_eq!(inst.len(), 24);
        assert_eq!(inst.dist(0, 12), &Dist::Unreachable);
    }

    #[test]
    fn tight_family_rejects_small_h() {
        assert!(tight_instance(2, 1).is_err());
    }

    #[test]
    fn oracle_cost_on_tight_family_is_three_per_copy() {
        for k in 1..=2 {
            let inst = tight_instance(3, k).unwrap();
            let opt = brute_force_opt(&inst, None).unwrap().unwrap();
            assert_eq!(opt.cost, rat_int(3 * k as i64));
            let rev = brute_force_opt_reversed(&inst, None).unwrap().unwrap();
            assert_eq!(rev.cost, opt.cost);
        }
    }

    #[test]
    fn random_instances_are_deterministic_in_the_seed() {
        let a = random_instance(6, 2, 2, 0, None, 42).unwrap();
        let b = random_instance(6, 2, 2, 0, None, 42).unwrap();
        let c = random_instance(6, 2, 2, 0, None, 43).unwrap();
        assert_eq!(
            crate::instance::instance_digest(&a),
            crate::instance::instance_digest(&b)
        );
        assert_ne!(
            crate::instance::instance_digest(&a),
            crate::instance::instance_digest(&c)
        );
        assert!(a.verify_metric().is_empty());
    }

    #[test]
    fn diameter_cost_is_at_most_twice_radius_cost() {
        let inst = random_instance(8, 2, 2, 0, None, 7).unwrap();
        let opt = brute_force_opt(&inst, None).unwrap().unwrap();
        let pairs: Vec<(Pair, Option<Pair>)> =
            opt.pairs.iter().map(|p| (p.clone(), None)).collect();
        let solution = crate::rounding::Solution::from_pairs(&inst, &pairs);
        let diam = diameter_cost(&inst, &solution).unwrap();
        assert!(diam <= rat_int(2) * &solution.cost);
    }
}
