//! Acceptance gate: one test running all nine exit criteria, printing one
//! pass/fail line per criterion and failing if any criterion fails.

use std::time::Instant;

use num_traits::{Signed, Zero};
use sum_radii::instance::{LowerBoundSpec, MetricInstance};
use sum_radii::oracle::{
    brute_force_opt, brute_force_opt_reversed, diameter_cost, random_instance, tight_instance,
};
use sum_radii::outliers::run_subroutine;
use sum_radii::pipeline::{solve, Mode, SolveConfig, SolveReport};
use sum_radii::rat::{rat, rat_int, Rat};
use sum_radii::rounding::{validate_solution, CoverMode};

/// One solved instance kept for the aggregate criteria.
struct Outcome {
    instance: MetricInstance,
    report: SolveReport,
    cover_mode: CoverMode,
}

fn oracle_cost(instance: &MetricInstance) -> Result<Rat, String> {
    match brute_force_opt(instance, None) {
        Ok(Some(opt)) => Ok(opt.cost),
        Ok(None) => Err("oracle budget exceeded".into()),
        Err(err) => Err(format!("oracle failed: {err}")),
    }
}

/// Criterion 1: exact dual/primal/ratio values on the tight family.
fn criterion_tight_family(outcomes: &mut Vec<Outcome>) -> Result<String, String> {
    let mut slowest = 0.0_f64;
    for h in 3..=6_usize {
        for copies in 1..=3_usize {
            let started = Instant::now();
            let instance =
                tight_instance(h, copies).map_err(|e| format!("h={h}, k={copies}: {e}"))?;
            let report = solve(&instance, &SolveConfig::new(Mode::Plain))
                .map_err(|e| format!("h={h}, k={copies}: {e}"))?;
            let elapsed = started.elapsed().as_secs_f64();
            slowest = slowest.max(elapsed);
            if elapsed >= 10.0 {
                return Err(format!("h={h}, k={copies} took {elapsed:.1}s (limit 10s)"));
            }
            let hh = (h * h) as i64;
            let h_int = h as i64;
            let expected_dual =
                rat_int(copies as i64) * rat(hh + h_int - 1, hh - h_int);
            let expected_cost = rat_int(3 * copies as i64);
            let expected_ratio = rat_int(3) * rat(hh - h_int, hh + h_int - 1);
            if report.solution.cost != expected_cost {
                return Err(format!(
                    "h={h}, k={copies}: cost {} != {expected_cost}",
                    report.solution.cost
                ));
            }
            let dual = report
                .dual_objective
                .clone()
                .ok_or_else(|| format!("h={h}, k={copies}: no dual objective"))?;
            if dual != expected_dual {
                return Err(format!("h={h}, k={copies}: dual {dual} != {expected_dual}"));
            }
            if &report.solution.cost / &dual != expected_ratio {
                return Err(format!(
                    "h={h}, k={copies}: ratio {} != {expected_ratio}",
                    &report.solution.cost / &dual
                ));
            }
            outcomes.push(Outcome { instance, report, cover_mode: CoverMode::AnyCenter });
        }
    }
    Ok(format!("12 runs exact, slowest {slowest:.2}s"))
}

/// Criterion 2: the k ≤ g short-circuit equals the exhaustive optimum.
fn criterion_oracle_shortcut() -> Result<String, String> {
    for seed in 200..250_u64 {
        let n = 5 + (seed % 5) as usize; // 5..=9
        let k = 1 + (seed % 2) as usize; // 1..=2
        let m = (seed % 2) as usize; // 0..=1
        let instance =
            random_instance(n, 2, k, m, None, seed).map_err(|e| format!("seed {seed}: {e}"))?;
        let mode = if m > 0 { Mode::Outliers } else { Mode::Plain };
        let config = SolveConfig { guess_depth: k, ..SolveConfig::new(mode) };
        let report = solve(&instance, &config).map_err(|e| format!("seed {seed}: {e}"))?;
        if !report.oracle_shortcut {
            return Err(format!("seed {seed}: short-circuit did not engage"));
        }
        let forward = brute_force_opt(&instance, None)
            .map_err(|e| format!("seed {seed}: {e}"))?
            .ok_or_else(|| format!("seed {seed}: oracle budget exceeded"))?;
        let reversed = brute_force_opt_reversed(&instance, None)
            .map_err(|e| format!("seed {seed}: {e}"))?
            .ok_or_else(|| format!("seed {seed}: oracle budget exceeded"))?;
        if report.solution.cost != forward.cost || forward.cost != reversed.cost {
            return Err(format!(
                "seed {seed}: shortcut {} vs oracle {} / reversed {}",
                report.solution.cost, forward.cost, reversed.cost
            ));
        }
    }
    Ok("50 instances, exact equality (both enumeration orders)".into())
}

/// Criterion 3: plain-mode cost bound 3·OPT + 3·r* + 3·|X|·μ.
fn criterion_plain_bound(outcomes: &mut Vec<Outcome>) -> Result<String, String> {
    for seed in 300..400_u64 {
        let n = 6 + (seed % 5) as usize; // 6..=10
        let k = 2 + (seed % 2) as usize; // 2..=3
        let instance =
            random_instance(n, 2, k, 0, None, seed).map_err(|e| format!("seed {seed}: {e}"))?;
        let report = solve(&instance, &SolveConfig::new(Mode::Plain))
            .map_err(|e| format!("seed {seed}: {e}"))?;
        let violations = validate_solution(&instance, &report.solution, k, 0);
        if !violations.is_empty() {
            return Err(format!("seed {seed}: {}", violations.join("; ")));
        }
        let opt = oracle_cost(&instance).map_err(|e| format!("seed {seed}: {e}"))?;
        let r_star = report.special_radius.clone().unwrap_or_else(Rat::zero);
        let mu = report.mu.clone().unwrap_or_else(Rat::zero);
        let bound = rat_int(3) * (&opt + &r_star + rat_int(n as i64) * &mu);
        if report.solution.cost > bound {
            return Err(format!(
                "seed {seed}: cost {} > 3·OPT + 3·r* + 3·|X|·μ = {bound}",
                report.solution.cost
            ));
        }
        outcomes.push(Outcome { instance, report, cover_mode: CoverMode::AnyCenter });
    }
    Ok("100 instances feasible and within the bound".into())
}

/// Criterion 4: outlier-mode cost bound 3·OPT + 3·r* (with envelope sampling
/// enabled for criterion 7).
fn criterion_outlier_bound(outcomes: &mut Vec<Outcome>) -> Result<String, String> {
    for seed in 400..500_u64 {
        let n = 6 + (seed % 5) as usize; // 6..=10
        let k = 2 + (seed % 2) as usize; // 2..=3
        let m = 1 + (seed % 2) as usize; // 1..=2
        let instance =
            random_instance(n, 2, k, m, None, seed).map_err(|e| format!("seed {seed}: {e}"))?;
        let config = SolveConfig { envelope_samples: 50, ..SolveConfig::new(Mode::Outliers) };
        let report = solve(&instance, &config).map_err(|e| format!("seed {seed}: {e}"))?;
        let violations = validate_solution(&instance, &report.solution, k, m);
        if !violations.is_empty() {
            return Err(format!("seed {seed}: {}", violations.join("; ")));
        }
        let opt = oracle_cost(&instance).map_err(|e| format!("seed {seed}: {e}"))?;
        let r_star = report.special_radius.clone().unwrap_or_else(Rat::zero);
        let bound = rat_int(3) * (&opt + &r_star);
        if report.solution.cost > bound {
            return Err(format!(
                "seed {seed}: cost {} > 3·OPT + 3·r* = {bound}",
                report.solution.cost
            ));
        }
        outcomes.push(Outcome { instance, report, cover_mode: CoverMode::AnyCenter });
    }
    Ok("100 instances feasible and within the bound".into())
}

/// Criterion 5: lower-bound mode cost bound 3.5·OPT + 3.5·r* + 3.5·|X|·μ +
/// 2·sr(P_g) with all assignments satisfying the per-center minimums.
fn criterion_lower_bound(outcomes: &mut Vec<Outcome>) -> Result<String, String> {
    for seed in 500..550_u64 {
        let n = 6 + (seed % 5) as usize; // 6..=10
        let k = 2 + (seed % 2) as usize; // 2..=3
        let minimum = 2 + (seed % 2) as usize; // L ∈ {2, 3}
        let lb = LowerBoundSpec::Cardinality { required: vec![minimum; n] };
        let instance = random_instance(n, 2, k, 0, Some(lb), seed)
            .map_err(|e| format!("seed {seed}: {e}"))?;
        let config = SolveConfig { guess_depth: 1, ..SolveConfig::new(Mode::Glb) };
        let report = solve(&instance, &config).map_err(|e| format!("seed {seed}: {e}"))?;
        let violations = validate_solution(&instance, &report.solution, k, 0);
        if !violations.is_empty() {
            return Err(format!("seed {seed}: {}", violations.join("; ")));
        }
        let opt = oracle_cost(&instance).map_err(|e| format!("seed {seed}: {e}"))?;
        let r_star = report.special_radius.clone().unwrap_or_else(Rat::zero);
        let mu = report.mu.clone().unwrap_or_else(Rat::zero);
        let bound = rat(7, 2) * (&opt + &r_star + rat_int(n as i64) * &mu)
            + rat_int(2) * &report.guessed_cost;
        if report.solution.cost > bound {
            return Err(format!(
                "seed {seed}: cost {} > 3.5·(OPT + r* + |X|·μ) + 2·sr(P_g) = {bound}",
                report.solution.cost
            ));
        }
        outcomes.push(Outcome { instance, report, cover_mode: CoverMode::Colocated });
    }
    Ok("50 instances, lower bounds satisfied, within the bound".into())
}

/// Criterion 6: structural invariant suites verified with zero failures.
/// The invariants are asserted inside the pipeline (violations surface as
/// internal errors, which fail criteria 1–5); this tallies the suites run.
fn criterion_structural(outcomes: &[Outcome]) -> Result<String, String> {
    let suites: usize = outcomes.iter().map(|o| o.report.structured_checks).sum();
    if suites == 0 {
        return Err("no structured/orderly invariant suites were exercised".into());
    }
    Ok(format!("{suites} invariant suites verified, 0 failures"))
}

/// Criterion 7: envelope cross-checks from the criterion-4 runs.
fn criterion_envelopes(outcomes: &[Outcome]) -> Result<String, String> {
    let mut matched = 0_usize;
    let mut mismatched = 0_usize;
    let mut runs = 0_usize;
    for outcome in outcomes {
        if let Some(check) = &outcome.report.envelope_check {
            runs += 1;
            matched += check.matched;
            mismatched += check.mismatched;
        }
    }
    if runs == 0 {
        return Err("no envelope checks ran".into());
    }
    if mismatched > 0 {
        return Err(format!("{mismatched} envelope samples differed from the subroutine"));
    }
    Ok(format!("{runs} searches, {matched} samples matched exactly"))
}

/// Criterion 8: dual continuity |α'_j − α_j| ≤ δ·2^|X'| for δ = 10⁻⁶.
fn criterion_continuity() -> Result<String, String> {
    let delta = rat(1, 1_000_000);
    for seed in 800..820_u64 {
        let n = 6 + (seed % 7) as usize; // 6..=12
        let instance =
            random_instance(n, 2, 2, 1, None, seed).map_err(|e| format!("seed {seed}: {e}"))?;
        let cap = instance.max_finite_distance();
        let universe = instance.candidate_pairs(&cap);
        let limit = &delta * rat_int(1_i64 << instance.active_len());
        for numer in [0_i64, 1, 3] {
            let lambda = rat(numer, 4);
            let base = run_subroutine(&instance, &universe, &lambda, 1)
                .map_err(|e| format!("seed {seed}, λ={lambda}: {e}"))?;
            let shifted = run_subroutine(&instance, &universe, &(&lambda + &delta), 1)
                .map_err(|e| format!("seed {seed}, λ={lambda}+δ: {e}"))?;
            for j in instance.active().iter() {
                let diff = (&shifted.dual.alpha[j] - &base.dual.alpha[j]).abs();
                if diff > limit {
                    return Err(format!(
                        "seed {seed}, λ={lambda}, point {j}: |α'−α| = {diff} > {limit}"
                    ));
                }
            }
        }
    }
    Ok("20 instances × 3 λ values within δ·2^|X'|".into())
}

/// Criterion 9: cover-radius diagnostics and the diameter evaluation.
fn criterion_diagnostics(outcomes: &[Outcome]) -> Result<String, String> {
    let mut components = 0_usize;
    for outcome in outcomes {
        let factor = match outcome.cover_mode {
            CoverMode::AnyCenter => rat_int(3),
            CoverMode::Colocated => rat(7, 2),
        };
        for diag in &outcome.report.diagnostics {
            if !diag.disjoint_exact {
                continue;
            }
            components += 1;
            if diag.disjoint_sum.is_zero() {
                // Zero-radius components: the cover is a single point ball.
                if !diag.cover_radius.is_zero() {
                    return Err(format!(
                        "zero-mass component covered with radius {}",
                        diag.cover_radius
                    ));
                }
                continue;
            }
            if diag.cover_radius > &factor * &diag.disjoint_sum {
                return Err(format!(
                    "cover radius {} exceeds {factor}·sr(C_d) = {}",
                    diag.cover_radius,
                    &factor * &diag.disjoint_sum
                ));
            }
        }
        let diameter = diameter_cost(&outcome.instance, &outcome.report.solution)
            .map_err(|e| format!("diameter evaluation failed: {e}"))?;
        if diameter > rat_int(2) * &outcome.report.solution.cost {
            return Err(format!(
                "diameter cost {diameter} exceeds twice the radius cost {}",
                outcome.report.solution.cost
            ));
        }
    }
    if components == 0 {
        return Err("no exactly-diagnosed components were produced".into());
    }
    Ok(format!("{components} components within the radius factors; diameters ≤ 2·cost"))
}

#[test]
fn acceptance_criteria() {
    let mut failures = Vec::new();
    let mut outcomes: Vec<Outcome> = Vec::new();

    let run = |name: &str, result: Result<String, String>, failures: &mut Vec<String>| {
        match result {
            Ok(detail) => println!("{name}: PASS — {detail}"),
            Err(detail) => {
                println!("{name}: FAIL — {detail}");
                failures.push(format!("{name}: {detail}"));
            }
        }
    };

    run(
        "criterion 1 (tight-family exactness)",
        criterion_tight_family(&mut outcomes),
        &mut failures,
    );
    run("criterion 2 (exhaustive short-circuit)", criterion_oracle_shortcut(), &mut failures);
    run("criterion 3 (plain cost bound)", criterion_plain_bound(&mut outcomes), &mut failures);
    run(
        "criterion 4 (outlier cost bound)",
        criterion_outlier_bound(&mut outcomes),
        &mut failures,
    );
    run("criterion 5 (lower-bound cost bound)", criterion_lower_bound(&mut outcomes), &mut failures);
    run("criterion 6 (structural invariants)", criterion_structural(&outcomes), &mut failures);
    run("criterion 7 (envelope correctness)", criterion_envelopes(&outcomes), &mut failures);
    run("criterion 8 (dual continuity)", criterion_continuity(), &mut failures);
    run("criterion 9 (cover diagnostics)", criterion_diagnostics(&outcomes), &mut failures);

    assert!(failures.is_empty(), "acceptance failures:\n{}", failures.join("\n"));
}
