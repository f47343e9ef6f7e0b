//! Instance model: metric space, balls, the candidate-pair universe,
//! per-center lower-bound families, and guess enumeration.

use crate::error::{Error, Result};
use crate::pointset::PointSet;
use crate::rat::{format_rat, parse_rat, sqrt_ceil_to_grid, Dist, Rat};
use num_traits::Zero;
use serde_json::{json, Value};

/// Default power-of-two grid (denominator `2^32`) for rationalized square roots.
pub const DEFAULT_SQRT_GRID_LOG2: u32 = 32;

/// A candidate cluster: center point id plus an exact radius.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pair {
    /// Center point id.
    pub center: usize,
    /// Nonnegative exact radius.
    pub radius: Rat,
}

/// Per-center lower-bound families; every family is superset-closed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LowerBoundSpec {
    /// Center i must be assigned at least `required[i]` points (itself included).
    Cardinality {
        /// Minimum assigned-set size per center.
        required: Vec<usize>,
    },
    /// Center i needs, for every color c, assigned weight at least `minimums[i][c]`.
    ColoredWeight {
        /// Color index per point.
        colors: Vec<usize>,
        /// Weight per point.
        weights: Vec<Rat>,
        /// Minimum total weight per center per color.
        minimums: Vec<Vec<Rat>>,
    },
    /// Center i must be assigned a superset of its ball of radius `radii[i]`.
    ExplicitRadius {
        /// Mandatory inner radius per center.
        radii: Vec<Rat>,
    },
}

impl LowerBoundSpec {
    /// True iff `set` is an allowed assigned set for `center`.
    pub fn allows(&self, instance: &MetricInstance, center: usize, set: &PointSet) -> bool {
        match self {
            LowerBoundSpec::Cardinality { required } => set.len() >= required[center],
            LowerBoundSpec::ColoredWeight { colors, weights, minimums } => {
                let num_colors = minimums[center].len();
                let mut totals = vec![Rat::zero(); num_colors];
                for p in set.iter() {
                    if colors[p] < num_colors {
                        totals[colors[p]] += &weights[p];
                    }
                }
                totals.iter().zip(&minimums[center]).all(|(have, need)| have >= need)
            }
            LowerBoundSpec::ExplicitRadius { radii } => {
                instance.ball(center, &radii[center]).is_subset(set)
            }
        }
    }
}

/// A metric clustering instance.
///
/// Points are ids `0..n`. The active set X' holds the points that must be
/// covered; centers may be any point of X. Distances are exact rationals with
/// an unreachable sentinel for disconnected parts.
#[derive(Clone, Debug)]
pub struct MetricInstance {
    n: usize,
    dist: Vec<Dist>,
    /// Cluster budget k (positive).
    pub k: usize,
    /// Outlier budget m (uncovered active points allowed).
    pub m: usize,
    /// Optional per-center lower-bound families.
    pub lb: Option<LowerBoundSpec>,
    active: PointSet,
}

/// A single violation found by [`MetricInstance::verify_metric`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MetricViolation {
    /// `d(i,i)` is not zero.
    NonzeroDiagonal(usize),
    /// `d(i,j) != d(j,i)`.
    Asymmetric(usize, usize),
    /// `d(i,k) > d(i,j) + d(j,k)` on a finite triple.
    Triangle(usize, usize, usize),
    /// A distance is negative.
    Negative(usize, usize),
}

impl MetricInstance {
    /// Builds an instance from a full distance matrix (row-major, n×n).
    pub fn from_matrix(
        dist: Vec<Dist>,
        k: usize,
        m: usize,
        lb: Option<LowerBoundSpec>,
    ) -> Result<Self> {
        let n = (dist.len() as f64).sqrt() as usize;
        if n * n != dist.len() {
            return Err(Error::Usage(format!("distance matrix length {} is not square", dist.len())));
        }
        if k == 0 {
            return Err(Error::Usage("budget k must be positive".into()));
        }
        for i in 0..n {
            for j in 0..n {
                if dist[i * n + j] != dist[j * n + i] {
                    return Err(Error::Parse(format!("matrix not symmetric at ({i},{j})")));
                }
            }
        }
        Ok(MetricInstance { n, dist, k, m, lb, active: PointSet::full(n) })
    }

    /// Builds an instance from exact rational coordinates with Euclidean
    /// distances rationalized onto the `2^-grid_log2` grid (squares computed
    /// exactly, square roots rounded up onto the grid).
    pub fn from_points(
        points: &[Vec<Rat>],
        grid_log2: u32,
        k: usize,
        m: usize,
        lb: Option<LowerBoundSpec>,
    ) -> Result<Self> {
        let n = points.len();
        let mut dist = vec![Dist::Finite(Rat::zero()); n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                if points[i].len() != points[j].len() {
                    return Err(Error::Parse("points have mixed dimensions".into()));
                }
                let sq: Rat = points[i]
                    .iter()
                    .zip(&points[j])
                    .map(|(a, b)| {
                        let d = a - b;
                        &d * &d
                    })
                    .sum();
                let d = Dist::Finite(sqrt_ceil_to_grid(&sq, grid_log2));
                dist[i * n + j] = d.clone();
                dist[j * n + i] = d;
            }
        }
        Self::from_matrix(dist, k, m, lb)
    }

    /// Number of points |X|.
    pub fn len(&self) -> usize {
        self.n
    }

    /// True iff the instance has no points.
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Distance between two points.
    pub fn dist(&self, i: usize, j: usize) -> &Dist {
        &self.dist[i * self.n + j]
    }

    /// The active set X' (points that must be covered).
    pub fn active(&self) -> &PointSet {
        &self.active
    }

    /// Number of active points |X'|.
    pub fn active_len(&self) -> usize {
        self.active.len()
    }

    /// Replaces the active set (used when building residual instances).
    pub fn set_active(&mut self, active: PointSet) {
        assert_eq!(active.universe(), self.n);
        self.active = active;
    }

    /// The ball B(center, radius): all points of X within the radius.
    pub fn ball(&self, center: usize, radius: &Rat) -> PointSet {
        assert!(center < self.n, "invalid point id {center}");
        let mut set = PointSet::new(self.n);
        for j in 0..self.n {
            if self.dist(center, j).le_rat(radius) {
                set.insert(j);
            }
        }
        set
    }

    /// Largest finite distance in the matrix (zero for a single point).
    pub fn max_finite_distance(&self) -> Rat {
        let mut best = Rat::zero();
        for d in &self.dist {
            if let Dist::Finite(r) = d {
                if *r > best {
                    best = r.clone();
                }
            }
        }
        best
    }

    /// The almost-tightness tolerance: `radius_cap / |X|^2`.
    pub fn mu(&self, radius_cap: &Rat) -> Rat {
        radius_cap / crate::rat::rat_int((self.n * self.n) as i64)
    }

    /// Distinct finite distances from `center`, ascending (always includes 0).
    fn sorted_radii_from(&self, center: usize) -> Vec<Rat> {
        let mut radii: Vec<Rat> = (0..self.n)
            .filter_map(|j| self.dist(center, j).finite().cloned())
            .collect();
        radii.push(Rat::zero());
        radii.sort();
        radii.dedup();
        radii
    }

    /// Smallest radius whose ball is an allowed assigned set for `center`;
    /// `None` when no finite radius satisfies the family (such centers are
    /// excluded from the pair universe).
    pub fn min_feasible_radius(&self, center: usize) -> Option<Rat> {
        let lb = self.lb.as_ref()?;
        for r in self.sorted_radii_from(center) {
            if lb.allows(self, center, &self.ball(center, &r)) {
                return Some(r);
            }
        }
        None
    }

    /// Checks symmetry, zero diagonal, nonnegativity and the triangle
    /// inequality over finite triples; returns every violation found.
    pub fn verify_metric(&self) -> Vec<MetricViolation> {
        let mut report = Vec::new();
        for i in 0..self.n {
            if self.dist(i, i) != &Dist::Finite(Rat::zero()) {
                report.push(MetricViolation::NonzeroDiagonal(i));
            }
            for j in (i + 1)..self.n {
                if self.dist(i, j) != self.dist(j, i) {
                    report.push(MetricViolation::Asymmetric(i, j));
                }
                if let Dist::Finite(d) = self.dist(i, j) {
                    if d < &Rat::zero() {
                        report.push(MetricViolation::Negative(i, j));
                    }
                }
            }
        }
        for i in 0..self.n {
            for j in 0..self.n {
                for l in 0..self.n {
                    if let (Dist::Finite(ij), Dist::Finite(jl), Dist::Finite(il)) =
                        (self.dist(i, j), self.dist(j, l), self.dist(i, l))
                    {
                        if il > &(ij + jl) {
                            report.push(MetricViolation::Triangle(i, j, l));
                        }
                    }
                }
            }
        }
        report
    }
}

/// One candidate pair with its cached balls.
#[derive(Clone, Debug)]
pub struct CandidatePair {
    /// The (center, radius) pair.
    pub pair: Pair,
    /// Smallest active point at exactly the pair's radius (order tie-break).
    pub defining: usize,
    /// Ball over all of X.
    pub ball: PointSet,
    /// Ball restricted to X'.
    pub active_ball: PointSet,
}

/// The ordered candidate-pair universe B.
///
/// Order is (radius, center id, defining point id); this fixed total order is
/// the tie-break source for every downstream "arbitrary order".
#[derive(Clone, Debug)]
pub struct PairUniverse {
    /// Pairs in B-order.
    pub pairs: Vec<CandidatePair>,
    /// Radius cap the universe was built with.
    pub radius_cap: Rat,
}

impl PairUniverse {
    /// Number of candidate pairs |B|.
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    /// True iff the universe is empty.
    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Pair at a universe index.
    pub fn pair(&self, idx: usize) -> &CandidatePair {
        &self.pairs[idx]
    }
}

impl MetricInstance {
    /// Enumerates the candidate universe: pairs `(i, d(i,j))` with `i ∈ X`,
    /// `j ∈ X'`, radius at most `radius_cap` (and at least the center's
    /// minimum feasible radius under a lower-bound family), deduplicated and
    /// sorted by (radius, center, defining point).
    pub fn candidate_pairs(&self, radius_cap: &Rat) -> PairUniverse {
        let mut pairs: Vec<CandidatePair> = Vec::new();
        for center in 0..self.n {
            let floor = match &self.lb {
                Some(_) => match self.min_feasible_radius(center) {
                    Some(r) => Some(r),
                    None => continue, // infeasible center: excluded
                },
                None => None,
            };
            let mut radii: Vec<(Rat, usize)> = Vec::new();
            for j in self.active.iter() {
                if let Dist::Finite(r) = self.dist(center, j) {
                    radii.push((r.clone(), j));
                }
            }
            radii.sort();
            radii.dedup_by(|a, b| a.0 == b.0); // keeps the smallest defining point
            for (radius, defining) in radii {
                if &radius > radius_cap {
                    continue;
                }
                if let Some(floor) = &floor {
                    if &radius < floor {
                        continue;
                    }
                }
                let ball = self.ball(center, &radius);
                let mut active_ball = ball.clone();
                active_ball.intersect_with(&self.active);
                if active_ball.is_empty() {
                    continue;
                }
                pairs.push(CandidatePair {
                    pair: Pair { center, radius },
                    defining,
                    ball,
                    active_ball,
                });
            }
        }
        pairs.sort_by(|a, b| {
            (&a.pair.radius, a.pair.center, a.defining).cmp(&(&b.pair.radius, b.pair.center, b.defining))
        });
        PairUniverse { pairs, radius_cap: radius_cap.clone() }
    }
}

/// One guessed prefix: the assumed largest-radius pairs of OPT plus the
/// residual instance they induce.
#[derive(Clone, Debug)]
pub struct Residual {
    /// The guessed pairs (empty at depth 0).
    pub guessed: Vec<Pair>,
    /// Sum of guessed radii, `sr(P_g)`.
    pub guessed_cost: Rat,
    /// Residual instance: active set minus guessed balls, `k` reduced.
    pub instance: MetricInstance,
    /// Radius cap for the residual universe (minimum guessed radius).
    pub radius_cap: Rat,
}

/// Enumerates all size-`g` guesses (duplicate pairs skipped) with their
/// residual instances. Depth 0 yields one residual equal to the input with
/// the cap at the maximum finite distance.
pub fn guess_prefixes(instance: &MetricInstance, g: usize) -> Result<Vec<Residual>> {
    if g > instance.k {
        return Err(Error::Usage(format!("guess depth {} exceeds k = {}", g, instance.k)));
    }
    let max_dist = instance.max_finite_distance();
    if g == 0 {
        return Ok(vec![Residual {
            guessed: Vec::new(),
            guessed_cost: Rat::zero(),
            instance: instance.clone(),
            radius_cap: max_dist,
        }]);
    }
    let universe = instance.candidate_pairs(&max_dist);
    let mut out = Vec::new();
    let mut chosen: Vec<usize> = Vec::with_capacity(g);
    enumerate_guesses(instance, &universe, g, 0, &mut chosen, &mut out);
    Ok(out)
}

fn enumerate_guesses(
    instance: &MetricInstance,
    universe: &PairUniverse,
    g: usize,
    start: usize,
    chosen: &mut Vec<usize>,
    out: &mut Vec<Residual>,
) {
    if chosen.len() == g {
        let guessed: Vec<Pair> = chosen.iter().map(|&i| universe.pair(i).pair.clone()).collect();
        let guessed_cost: Rat = guessed.iter().map(|p| p.radius.clone()).sum();
        let radius_cap = guessed.iter().map(|p| p.radius.clone()).min().expect("g >= 1");
        let mut residual = instance.clone();
        let mut active = residual.active().clone();
        for &i in chosen.iter() {
            active.subtract(&universe.pair(i).ball);
        }
        residual.set_active(active);
        residual.k = instance.k - g;
        out.push(Residual { guessed, guessed_cost, instance: residual, radius_cap });
        return;
    }
    for i in start..universe.len() {
        chosen.push(i);
        enumerate_guesses(instance, universe, g, i + 1, chosen, out);
        chosen.pop();
    }
}

// ---------------------------------------------------------------------------
// Instance file format
// ---------------------------------------------------------------------------

fn rat_value(v: &Value, what: &str) -> Result<Rat> {
    let text = v.as_str().ok_or_else(|| Error::Parse(format!("{what}: expected rational string")))?;
    parse_rat(text).ok_or_else(|| Error::Parse(format!("{what}: bad rational {text:?}")))
}

fn usize_value(v: &Value, what: &str) -> Result<usize> {
    v.as_u64().map(|u| u as usize).ok_or_else(|| Error::Parse(format!("{what}: expected integer")))
}

/// Parses the self-describing instance document.
///
/// The document is JSON with fields `k`, `m`, either `points` (+ `"metric":
/// "euclidean"`, optional `sqrt_grid_log2`) or `distances` (matrix of `"p/q"`
/// strings, `"inf"` for unreachable), optional `active` (point id list) and
/// optional `lower_bounds` (`{"variant": ...}`).
pub fn parse_instance(text: &str) -> Result<MetricInstance> {
    let doc: Value =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("invalid JSON: {e}")))?;
    let k = usize_value(doc.get("k").unwrap_or(&json!(1)), "k")?;
    let m = usize_value(doc.get("m").unwrap_or(&json!(0)), "m")?;

    let lb = match doc.get("lower_bounds") {
        None | Some(Value::Null) => None,
        Some(obj) => Some(parse_lower_bounds(obj)?),
    };

    let mut instance = if let Some(points) = doc.get("points") {
        match doc.get("metric").and_then(Value::as_str) {
            Some("euclidean") => {}
            other => return Err(Error::Parse(format!("unsupported metric {other:?} for points"))),
        }
        let grid = match doc.get("sqrt_grid_log2") {
            Some(v) => usize_value(v, "sqrt_grid_log2")? as u32,
            None => DEFAULT_SQRT_GRID_LOG2,
        };
        let rows = points.as_array().ok_or_else(|| Error::Parse("points: expected array".into()))?;
        let mut coords = Vec::with_capacity(rows.len());
        for (i, row) in rows.iter().enumerate() {
            let row = row
                .as_array()
                .ok_or_else(|| Error::Parse(format!("points[{i}]: expected array")))?;
            let mut point = Vec::with_capacity(row.len());
            for c in row {
                point.push(rat_value(c, "coordinate")?);
            }
            coords.push(point);
        }
        MetricInstance::from_points(&coords, grid, k, m, lb)?
    } else if let Some(matrix) = doc.get("distances") {
        let rows =
            matrix.as_array().ok_or_else(|| Error::Parse("distances: expected array".into()))?;
        let n = rows.len();
        let mut dist = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            let row = row
                .as_array()
                .ok_or_else(|| Error::Parse(format!("distances[{i}]: expected array")))?;
            if row.len() != n {
                return Err(Error::Parse(format!("distances[{i}]: expected {n} entries")));
            }
            for v in row {
                if v.as_str() == Some("inf") {
                    dist.push(Dist::Unreachable);
                } else {
                    dist.push(Dist::Finite(rat_value(v, "distance")?));
                }
            }
        }
        MetricInstance::from_matrix(dist, k, m, lb)?
    } else {
        return Err(Error::Parse("instance needs either points or distances".into()));
    };

    if let Some(active) = doc.get("active") {
        let ids =
            active.as_array().ok_or_else(|| Error::Parse("active: expected array".into()))?;
        let mut set = PointSet::new(instance.len());
        for v in ids {
            let p = usize_value(v, "active id")?;
            if p >= instance.len() {
                return Err(Error::Parse(format!("active id {p} out of range")));
            }
            set.insert(p);
        }
        instance.set_active(set);
    }
    Ok(instance)
}

fn parse_lower_bounds(obj: &Value) -> Result<LowerBoundSpec> {
    match obj.get("variant").and_then(Value::as_str) {
        Some("cardinality") => {
            let values = obj
                .get("required")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Parse("lower_bounds.required: expected array".into()))?;
            let required =
                values.iter().map(|v| usize_value(v, "required")).collect::<Result<_>>()?;
            Ok(LowerBoundSpec::Cardinality { required })
        }
        Some("colored_weight") => {
            let colors = obj
                .get("colors")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Parse("lower_bounds.colors: expected array".into()))?
                .iter()
                .map(|v| usize_value(v, "color"))
                .collect::<Result<_>>()?;
            let weights = obj
                .get("weights")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Parse("lower_bounds.weights: expected array".into()))?
                .iter()
                .map(|v| rat_value(v, "weight"))
                .collect::<Result<_>>()?;
            let minimums = obj
                .get("minimums")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Parse("lower_bounds.minimums: expected array".into()))?
                .iter()
                .map(|row| {
                    row.as_array()
                        .ok_or_else(|| Error::Parse("minimums row: expected array".into()))?
                        .iter()
                        .map(|v| rat_value(v, "minimum weight"))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<_>>()?;
            Ok(LowerBoundSpec::ColoredWeight { colors, weights, minimums })
        }
        Some("explicit_radius") => {
            let radii = obj
                .get("radii")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Parse("lower_bounds.radii: expected array".into()))?
                .iter()
                .map(|v| rat_value(v, "radius"))
                .collect::<Result<_>>()?;
            Ok(LowerBoundSpec::ExplicitRadius { radii })
        }
        other => Err(Error::Parse(format!("unknown lower_bounds variant {other:?}"))),
    }
}

/// Serializes an instance to the canonical document (distance-matrix form,
/// deterministic field order).
pub fn write_instance(instance: &MetricInstance) -> String {
    let n = instance.len();
    let matrix: Vec<Vec<Value>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| match instance.dist(i, j) {
                    Dist::Finite(r) => json!(format_rat(r)),
                    Dist::Unreachable => json!("inf"),
                })
                .collect()
        })
        .collect();
    let mut doc = json!({
        "k": instance.k,
        "m": instance.m,
        "distances": matrix,
    });
    if instance.active_len() != n {
        doc["active"] = json!(instance.active().iter().collect::<Vec<_>>());
    }
    if let Some(lb) = &instance.lb {
        doc["lower_bounds"] = match lb {
            LowerBoundSpec::Cardinality { required } => json!({
                "variant": "cardinality",
                "required": required,
            }),
            LowerBoundSpec::ColoredWeight { colors, weights, minimums } => json!({
                "variant": "colored_weight",
                "colors": colors,
                "weights": weights.iter().map(format_rat).collect::<Vec<_>>(),
                "minimums": minimums
                    .iter()
                    .map(|row| row.iter().map(format_rat).collect::<Vec<_>>())
                    .collect::<Vec<_>>(),
            }),
            LowerBoundSpec::ExplicitRadius { radii } => json!({
                "variant": "explicit_radius",
                "radii": radii.iter().map(format_rat).collect::<Vec<_>>(),
            }),
        };
    }
    serde_json::to_string_pretty(&doc).expect("serialization cannot fail")
}

/// FNV-1a 64-bit digest of the canonical serialization; portable across
/// implementations of the same format.
pub fn instance_digest(instance: &MetricInstance) -> String {
    let text = write_instance(instance);
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in text.as_bytes() {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{hash:016x}")
}
