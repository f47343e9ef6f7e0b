//! End-to-end solver pipelines: mode dispatch, guess enumeration, residual
//! solving, rounding, lower-bound assignment and merged-result assembly.

use crate::dual::components;
use crate::error::{Error, Result};
use crate::instance::{guess_prefixes, MetricInstance, Pair, PairUniverse, Residual};
use crate::no_outliers::{build_structured_pairs, raise_duals, RaiseOutcome};
use crate::oracle::{assign_with_lower_bounds, brute_force_opt};
use crate::outliers::{
    check_envelope_samples, check_orderly, mix_orderly_structured, search_lambda, EnvelopeCheck,
    SearchOutcome,
};
use crate::pointset::PointSet;
use crate::rat::Rat;
use crate::rounding::{
    assemble_degenerate, assemble_no_outliers, assemble_outliers, check_disjoint_tight_bound,
    cover_diagnostics, max_disjoint_subset, validate_solution, CoverDiagnostic, CoverMode,
    OutlierAssembly, Solution, SolutionBall,
};
use num_traits::Zero;

/// Solver mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Cover every active point; no lower bounds.
    Plain,
    /// Allow up to m uncovered active points; no lower bounds.
    Outliers,
    /// Generalized lower bounds, full coverage.
    Glb,
    /// Generalized lower bounds with up to m uncovered active points.
    GlbOutliers,
}

impl Mode {
    /// True iff the mode requires a lower-bound family on the instance.
    pub fn needs_lower_bounds(self) -> bool {
        matches!(self, Mode::Glb | Mode::GlbOutliers)
    }

    /// True iff the mode admits outliers.
    pub fn allows_outliers(self) -> bool {
        matches!(self, Mode::Outliers | Mode::GlbOutliers)
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Mode::Plain => "plain",
            Mode::Outliers => "outliers",
            Mode::Glb => "glb",
            Mode::GlbOutliers => "glb-outliers",
        };
        f.write_str(name)
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(text: &str) -> Result<Mode> {
        match text {
            "plain" => Ok(Mode::Plain),
            "outliers" => Ok(Mode::Outliers),
            "glb" => Ok(Mode::Glb),
            "glb-outliers" => Ok(Mode::GlbOutliers),
            other => Err(Error::Usage(format!(
                "unknown mode {other:?} (expected plain, outliers, glb or glb-outliers)"
            ))),
        }
    }
}

/// Configuration of one solver run.
#[derive(Clone, Debug)]
pub struct SolveConfig {
    /// Solver mode.
    pub mode: Mode,
    /// Guess depth g: number of assumed largest-radius optimal pairs.
    pub guess_depth: usize,
    /// Interior sample count for the per-phase envelope cross-check
    /// (0 disables the check).
    pub envelope_samples: usize,
    /// Whether to compute per-component cover diagnostics.
    pub collect_diagnostics: bool,
    /// Enumeration budget for the exhaustive short-circuit (k ≤ g).
    pub oracle_budget: Option<u64>,
}

impl SolveConfig {
    /// Default configuration for a mode: no guessing, no envelope sampling,
    /// diagnostics on.
    pub fn new(mode: Mode) -> SolveConfig {
        SolveConfig {
            mode,
            guess_depth: 0,
            envelope_samples: 0,
            collect_diagnostics: true,
            oracle_budget: None,
        }
    }
}

/// Result of a solver run: the merged solution over the full instance plus
/// the witnessing quantities of the winning guess.
#[derive(Clone, Debug)]
pub struct SolveReport {
    /// Mode the run executed in.
    pub mode: Mode,
    /// Merged solution over the full instance.
    pub solution: Solution,
    /// Guessed pairs of the winning guess (empty at depth 0).
    pub guessed: Vec<Pair>,
    /// Sum of guessed radii.
    pub guessed_cost: Rat,
    /// Residual solution cost (before merging).
    pub residual_cost: Rat,
    /// Dual objective of the winning residual, when a dual was produced.
    pub dual_objective: Option<Rat>,
    /// Radius r* of the special pair of the winning residual, when one exists.
    pub special_radius: Option<Rat>,
    /// Almost-tightness tolerance μ of the winning residual.
    pub mu: Option<Rat>,
    /// Dispatch branch of the outlier assembly, when it ran.
    pub assembly: Option<OutlierAssembly>,
    /// Envelope cross-check tallies, when sampling was enabled and a
    /// breakpoint search ran.
    pub envelope_check: Option<EnvelopeCheck>,
    /// Per-component cover diagnostics of the winning residual.
    pub diagnostics: Vec<CoverDiagnostic>,
    /// Number of structured/orderly invariant suites verified.
    pub structured_checks: usize,
    /// True iff the exhaustive short-circuit (k ≤ g) produced the solution.
    pub oracle_shortcut: bool,
}

/// Outcome of solving one residual instance.
struct ResidualSolve {
    solution: Solution,
    dual_objective: Option<Rat>,
    special_radius: Option<Rat>,
    mu: Option<Rat>,
    assembly: Option<OutlierAssembly>,
    envelope_check: Option<EnvelopeCheck>,
    diagnostics: Vec<CoverDiagnostic>,
    structured_checks: usize,
}

fn validate_config(instance: &MetricInstance, config: &SolveConfig) -> Result<()> {
    if config.mode.needs_lower_bounds() && instance.lb.is_none() {
        return Err(Error::Usage(format!(
            "mode {} requires a lower-bound family on the instance",
            config.mode
        )));
    }
    if !config.mode.needs_lower_bounds() && instance.lb.is_some() {
        return Err(Error::Usage(format!(
            "mode {} does not support lower bounds; use glb or glb-outliers",
            config.mode
        )));
    }
    if !config.mode.allows_outliers() && instance.m != 0 {
        return Err(Error::Usage(format!(
            "mode {} requires m = 0 (instance has m = {})",
            config.mode, instance.m
        )));
    }
    Ok(())
}

/// Runs the configured pipeline: validates the configuration, short-circuits
/// to exhaustive search when k ≤ g, and otherwise enumerates guesses, solves
/// each residual, merges with the guessed pairs and keeps the cheapest
/// feasible merged solution.
pub fn solve(instance: &MetricInstance, config: &SolveConfig) -> Result<SolveReport> {
    validate_config(instance, config)?;
    if instance.k <= config.guess_depth {
        return solve_exhaustive(instance, config);
    }
    let residuals = guess_prefixes(instance, config.guess_depth)?;
    let mut best: Option<SolveReport> = None;
    for residual in residuals {
        let solved = match solve_residual(&residual, config) {
            Ok(solved) => solved,
            Err(Error::Infeasible(_)) => continue,
            Err(err) => return Err(err),
        };
        let report = merge_residual(instance, &residual, solved, config)?;
        let better = match &best {
            None => true,
            Some(current) => report.solution.cost < current.solution.cost,
        };
        if better {
            best = Some(report);
        }
    }
    best.ok_or_else(|| {
        Error::Infeasible(format!(
            "no guess of depth {} admits a feasible solution",
            config.guess_depth
        ))
    })
}

/// Exhaustive short-circuit for k ≤ g: the optimum over at most k balls.
fn solve_exhaustive(instance: &MetricInstance, config: &SolveConfig) -> Result<SolveReport> {
    let opt = brute_force_opt(instance, config.oracle_budget)?.ok_or_else(|| {
        Error::Usage(
            "exhaustive short-circuit exceeded the enumeration budget; lower k or the guess depth"
                .into(),
        )
    })?;
    let n = instance.len();
    let balls: Vec<PointSet> =
        opt.pairs.iter().map(|p| instance.ball(p.center, &p.radius)).collect();
    let centers: Vec<usize> = opt.pairs.iter().map(|p| p.center).collect();
    let assigned = assign_with_lower_bounds(instance, &balls, &centers).ok_or_else(|| {
        Error::internal(
            "exhaustive optimum admits no lower-bound assignment",
            format!("pairs {:?}", opt.pairs),
        )
    })?;
    let mut solution_balls: Vec<SolutionBall> = opt
        .pairs
        .iter()
        .map(|p| SolutionBall { pair: p.clone(), witness: None, assigned: PointSet::new(n) })
        .collect();
    let mut outliers = PointSet::new(n);
    for j in instance.active().iter() {
        match assigned[j] {
            Some(ball) => solution_balls[ball].assigned.insert(j),
            None => outliers.insert(j),
        }
    }
    // An optimal ball left empty by the assignment must have radius zero
    // (otherwise dropping it would beat the optimum); drop such balls.
    solution_balls.retain(|b| !b.assigned.is_empty());
    let cost: Rat = solution_balls.iter().map(|b| b.pair.radius.clone()).sum();
    if cost != opt.cost {
        return Err(Error::internal(
            "dropping empty optimal balls changed the cost",
            format!("kept cost {cost}, optimum {}", opt.cost),
        ));
    }
    let solution = Solution { balls: solution_balls, outliers, cost };
    let violations = validate_solution(instance, &solution, instance.k, instance.m);
    if !violations.is_empty() {
        return Err(Error::internal(
            "exhaustive short-circuit produced an invalid solution",
            violations.join("; "),
        ));
    }
    Ok(SolveReport {
        mode: config.mode,
        residual_cost: solution.cost.clone(),
        solution,
        guessed: Vec::new(),
        guessed_cost: Rat::zero(),
        dual_objective: None,
        special_radius: None,
        mu: None,
        assembly: None,
        envelope_check: None,
        diagnostics: Vec::new(),
        structured_checks: 0,
        oracle_shortcut: true,
    })
}

fn solve_residual(residual: &Residual, config: &SolveConfig) -> Result<ResidualSolve> {
    match config.mode {
        Mode::Plain => solve_plain_residual(residual, config),
        Mode::Outliers => {
            solve_outlier_residual(residual, residual.instance.m, CoverMode::AnyCenter, config)
        }
        Mode::Glb => solve_outlier_residual(residual, 0, CoverMode::Colocated, config),
        Mode::GlbOutliers => {
            solve_outlier_residual(residual, residual.instance.m, CoverMode::Colocated, config)
        }
    }
}

/// Solves a residual without outliers: dual raising, structured-pair
/// construction and per-component replacement covers.
fn solve_plain_residual(residual: &Residual, config: &SolveConfig) -> Result<ResidualSolve> {
    let inst = &residual.instance;
    let k_res = inst.k;
    if inst.active_len() <= k_res {
        // One zero-radius ball per remaining active point.
        let pairs: Vec<(Pair, Option<Pair>)> = inst
            .active()
            .iter()
            .map(|j| (Pair { center: j, radius: Rat::zero() }, None))
            .collect();
        return Ok(ResidualSolve {
            solution: Solution::from_pairs(inst, &pairs),
            dual_objective: Some(Rat::zero()),
            special_radius: None,
            mu: None,
            assembly: None,
            envelope_check: None,
            diagnostics: Vec::new(),
            structured_checks: 0,
        });
    }
    let mu = inst.mu(&residual.radius_cap);
    let universe = inst.candidate_pairs(&residual.radius_cap);
    let unreachable =
        crate::dual::uncovered(inst, &universe, &(0..universe.len()).collect::<Vec<_>>());
    if !unreachable.is_empty() {
        return Err(Error::Infeasible(format!(
            "active points {unreachable:?} lie outside every candidate ball under the radius cap"
        )));
    }
    let (solution, dual, rounded, special_radius, structured_checks) =
        match raise_duals(inst, &universe, k_res, &mu)? {
            RaiseOutcome::Degenerate { pairs, dual } => {
                let solution =
                    assemble_degenerate(inst, &universe, &pairs, k_res, 0, CoverMode::AnyCenter)?;
                (solution, dual, pairs, None, 0)
            }
            RaiseOutcome::Raised { dual, b0, b1, trace: _ } => {
                let sp = build_structured_pairs(inst, &universe, &dual, &b0, &b1, k_res, &mu)?;
                let solution =
                    assemble_no_outliers(inst, &universe, &sp, k_res, CoverMode::AnyCenter)?;
                let special = sp.special_radius(&universe).clone();
                (solution, sp.dual.clone(), sp.order, Some(special), 1)
            }
        };
    let diagnostics = check_rounded_set(
        inst,
        &universe,
        &dual,
        &rounded,
        CoverMode::AnyCenter,
        &mu,
        config.collect_diagnostics,
    )?;
    Ok(ResidualSolve {
        solution,
        dual_objective: Some(dual.objective(inst, k_res, 0)?),
        special_radius,
        mu: Some(mu),
        assembly: None,
        envelope_check: None,
        diagnostics,
        structured_checks,
    })
}

/// Solves a residual through the outlier machinery (also used for the
/// lower-bound modes, with colocated covers): λ search, mixing into an
/// orderly structured set, and prefix-dispatch rounding.
fn solve_outlier_residual(
    residual: &Residual,
    m_eff: usize,
    cover_mode: CoverMode,
    config: &SolveConfig,
) -> Result<ResidualSolve> {
    let inst = &residual.instance;
    let k_res = inst.k;
    if inst.active_len() <= m_eff {
        // Everything may stay uncovered.
        return Ok(ResidualSolve {
            solution: Solution::from_pairs(inst, &[]),
            dual_objective: Some(Rat::zero()),
            special_radius: None,
            mu: None,
            assembly: None,
            envelope_check: None,
            diagnostics: Vec::new(),
            structured_checks: 0,
        });
    }
    let mu = inst.mu(&residual.radius_cap);
    let universe = inst.candidate_pairs(&residual.radius_cap);
    let (solution, dual, rounded, special_radius, assembly, envelope_check, structured_checks) =
        match search_lambda(inst, &universe, k_res, m_eff)? {
            SearchOutcome::Degenerate { run } => {
                let solution = assemble_degenerate(
                    inst, &universe, &run.picked, k_res, m_eff, cover_mode,
                )?;
                let special = run
                    .picked
                    .iter()
                    .map(|&idx| universe.pair(idx).pair.radius.clone())
                    .max();
                (solution, run.dual, run.picked, special, None, None, 0)
            }
            SearchOutcome::Bracket(bracket) => {
                let os = mix_orderly_structured(inst, &universe, &bracket, k_res, m_eff)?;
                check_orderly(inst, &universe, &os, k_res, m_eff)?;
                let rounding =
                    assemble_outliers(inst, &universe, &os, k_res, m_eff, cover_mode)?;
                let envelope_check = if config.envelope_samples > 0 {
                    Some(check_envelope_samples(
                        inst,
                        &universe,
                        &bracket,
                        m_eff,
                        config.envelope_samples,
                    )?)
                } else {
                    None
                };
                let special = os.special_radius(&universe).clone();
                (
                    rounding.solution,
                    os.dual,
                    rounding.rounded,
                    Some(special),
                    Some(rounding.case),
                    envelope_check,
                    1,
                )
            }
        };
    let diagnostics = check_rounded_set(
        inst,
        &universe,
        &dual,
        &rounded,
        cover_mode,
        &Rat::zero(),
        config.collect_diagnostics,
    )?;
    Ok(ResidualSolve {
        solution,
        dual_objective: Some(dual.objective(inst, k_res, m_eff)?),
        special_radius,
        mu: Some(mu),
        assembly,
        envelope_check,
        diagnostics,
        structured_checks,
    })
}

/// Asserts the disjoint-tight-set dual bound on the rounded set and, when
/// requested, collects the per-component cover diagnostics.
fn check_rounded_set(
    inst: &MetricInstance,
    universe: &PairUniverse,
    dual: &crate::dual::DualSolution,
    rounded: &[usize],
    cover_mode: CoverMode,
    slack_allowance: &Rat,
    collect: bool,
) -> Result<Vec<CoverDiagnostic>> {
    let partition = components(universe, rounded);
    let mut diagnostics = Vec::new();
    let mut disjoint_union: Vec<usize> = Vec::new();
    for component in &partition.components {
        if collect {
            diagnostics.push(cover_diagnostics(inst, universe, component, cover_mode)?);
        }
        let (disjoint, _) = max_disjoint_subset(universe, component);
        disjoint_union.extend(disjoint);
    }
    // U: uncovered points whose α reached the cap γ (outlier mode only).
    let mut tight_uncovered = PointSet::new(inst.len());
    if let Some(gamma) = &dual.gamma {
        let mut covered = PointSet::new(inst.len());
        for &idx in &disjoint_union {
            covered.union_with(&universe.pair(idx).active_ball);
        }
        for j in inst.active().iter() {
            if &dual.alpha[j] == gamma && !covered.contains(j) {
                tight_uncovered.insert(j);
            }
        }
    }
    check_disjoint_tight_bound(
        inst,
        universe,
        dual,
        &disjoint_union,
        &tight_uncovered,
        slack_allowance,
    )?;
    Ok(diagnostics)
}

/// Merges a residual solution with its guessed pairs over the full instance
/// and validates the result against the full budgets.
fn merge_residual(
    instance: &MetricInstance,
    residual: &Residual,
    solved: ResidualSolve,
    config: &SolveConfig,
) -> Result<SolveReport> {
    let merged = if config.mode.needs_lower_bounds() {
        let solution_pairs: Vec<(Pair, Pair)> = solved
            .solution
            .balls
            .iter()
            .map(|b| {
                let witness = b.witness.clone().ok_or_else(|| {
                    Error::internal(
                        "lower-bound merge needs a witness pair on every ball",
                        format!("ball {:?}", b.pair),
                    )
                })?;
                Ok((b.pair.clone(), witness))
            })
            .collect::<Result<_>>()?;
        crate::rounding::glb_assign(instance, &solution_pairs, &residual.guessed, instance.m)?
    } else {
        let mut pairs: Vec<(Pair, Option<Pair>)> =
            residual.guessed.iter().map(|p| (p.clone(), None)).collect();
        pairs.extend(solved.solution.balls.iter().map(|b| (b.pair.clone(), b.witness.clone())));
        Solution::from_pairs(instance, &pairs)
    };
    let violations = validate_solution(instance, &merged, instance.k, instance.m);
    if !violations.is_empty() {
        return Err(Error::internal(
            "merged solution failed validation",
            violations.join("; "),
        ));
    }
    Ok(SolveReport {
        mode: config.mode,
        solution: merged,
        guessed: residual.guessed.clone(),
        guessed_cost: residual.guessed_cost.clone(),
        residual_cost: solved.solution.cost.clone(),
        dual_objective: solved.dual_objective,
        special_radius: solved.special_radius,
        mu: solved.mu,
        assembly: solved.assembly,
        envelope_check: solved.envelope_check,
        diagnostics: solved.diagnostics,
        structured_checks: solved.structured_checks,
        oracle_shortcut: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::LowerBoundSpec;
    use crate::oracle::{brute_force_opt, random_instance, tight_instance};
    use crate::rat::{rat, rat_int, Dist};

    fn line_instance(n: usize, k: usize, m: usize, lb: Option<LowerBoundSpec>) -> MetricInstance {
        let mut dist = Vec::new();
        for i in 0..n {
            for j in 0..n {
                dist.push(Dist::Finite(rat_int((i as i64 - j as i64).abs())));
            }
        }
        MetricInstance::from_matrix(dist, k, m, lb).expect("valid line instance")
    }

    #[test]
    fn plain_mode_on_the_tight_family_hits_the_exact_values() {
        let inst = tight_instance(3, 1).unwrap();
        let report = solve(&inst, &SolveConfig::new(Mode::Plain)).unwrap();
        assert_eq!(report.solution.cost, rat_int(3));
        assert_eq!(report.dual_objective, Some(rat(11, 6)));
        assert!(validate_solution(&inst, &report.solution, 1, 0).is_empty());
        assert_eq!(report.structured_checks, 1);
    }

    #[test]
    fn outlier_mode_respects_both_budgets() {
        let inst = line_instance(7, 2, 2, None);
        let config = SolveConfig {
            envelope_samples: 5,
            ..SolveConfig::new(Mode::Outliers)
        };
        let report = solve(&inst, &config).unwrap();
        assert!(report.solution.balls.len() <= 2);
        assert!(report.solution.outliers.len() <= 2);
        assert!(validate_solution(&inst, &report.solution, 2, 2).is_empty());
        if let Some(check) = &report.envelope_check {
            assert_eq!(check.mismatched, 0);
        }
    }

    #[test]
    fn lower_bound_mode_produces_allowed_assignments() {
        let lb = LowerBoundSpec::Cardinality { required: vec![2; 6] };
        let inst = line_instance(6, 2, 0, Some(lb));
        let config = SolveConfig { guess_depth: 1, ..SolveConfig::new(Mode::Glb) };
        let report = solve(&inst, &config).unwrap();
        assert!(validate_solution(&inst, &report.solution, 2, 0).is_empty());
        let opt = brute_force_opt(&inst, None).unwrap().unwrap();
        assert!(report.solution.cost >= opt.cost);
    }

    #[test]
    fn shortcut_matches_the_exhaustive_optimum() {
        let inst = random_instance(7, 2, 2, 1, None, 11).unwrap();
        let config = SolveConfig { guess_depth: 2, ..SolveConfig::new(Mode::Outliers) };
        let report = solve(&inst, &config).unwrap();
        assert!(report.oracle_shortcut);
        let opt = brute_force_opt(&inst, None).unwrap().unwrap();
        assert_eq!(report.solution.cost, opt.cost);
    }

    #[test]
    fn mode_validation_rejects_mismatched_configurations() {
        let inst = line_instance(4, 1, 0, None);
        assert!(matches!(
            solve(&inst, &SolveConfig::new(Mode::Glb)),
            Err(Error::Usage(_))
        ));
        let lb = LowerBoundSpec::Cardinality { required: vec![1; 4] };
        let with_lb = line_instance(4, 1, 0, Some(lb));
        assert!(matches!(
            solve(&with_lb, &SolveConfig::new(Mode::Plain)),
            Err(Error::Usage(_))
        ));
        let with_m = line_instance(4, 1, 1, None);
        assert!(matches!(
            solve(&with_m, &SolveConfig::new(Mode::Plain)),
            Err(Error::Usage(_))
        ));
    }
}
