//! Success tables, the 2x2 chi-square test, and cumulative success curves.

use std::collections::BTreeMap;

use serde::Serialize;
use statrs::function::erf::erfc;

use super::RunSummary;
use crate::engine::Outcome;

/// Significance level for success-rate comparisons.
pub const ALPHA: f64 = 0.05;

/// Pearson chi-square on a 2x2 success/failure table, 1 degree of freedom,
/// no continuity correction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub p_value: f64,
    pub significant: bool,
}

/// Compares two arms' success counts. A degenerate table (every run in one
/// outcome class) yields statistic 0 and p = 1.
pub fn chi_square_2x2(a_success: u64, a_total: u64, b_success: u64, b_total: u64) -> ChiSquare {
    assert!(a_total > 0 && b_total > 0, "totals must be positive");
    assert!(a_success <= a_total && b_success <= b_total);
    let a = a_success as f64;
    let b = (a_total - a_success) as f64;
    let c = b_success as f64;
    let d = (b_total - b_success) as f64;
    let n = a + b + c + d;
    let margins = [a + b, c + d, a + c, b + d];
    if margins.iter().any(|&m| m == 0.0) {
        return ChiSquare {
            statistic: 0.0,
            p_value: 1.0,
            significant: false,
        };
    }
    let statistic = n * (a * d - b * c).powi(2) / margins.iter().product::<f64>();
    // Chi-square(1) survival function: P(X > x) = erfc(sqrt(x / 2)).
    let p_value = erfc((statistic / 2.0).sqrt());
    ChiSquare {
        statistic,
        p_value,
        significant: p_value < ALPHA,
    }
}

/// Successes and run totals per (problem, variant) arm.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ArmCount {
    pub successes: u64,
    pub total: u64,
}

/// Aggregates run summaries into per-arm success counts. A run is a success
/// exactly when its training solution generalized.
pub fn success_table(rows: &[RunSummary]) -> BTreeMap<(String, String), ArmCount> {
    let mut table: BTreeMap<(String, String), ArmCount> = BTreeMap::new();
    for row in rows {
        let entry = table
            .entry((row.problem.clone(), row.variant.clone()))
            .or_default();
        entry.total += 1;
        if row.outcome == Outcome::TrainSolutionGeneralized.as_str() {
            entry.successes += 1;
        }
    }
    table
}

/// A per-problem comparison of two arms.
#[derive(Clone, Debug)]
pub struct Comparison {
    pub problem: String,
    pub arm_a: String,
    pub a: ArmCount,
    pub arm_b: String,
    pub b: ArmCount,
    pub chi: ChiSquare,
}

/// Chi-square comparisons of `arm_a` vs `arm_b` for every problem carrying
/// both arms.
pub fn compare_arms(rows: &[RunSummary], arm_a: &str, arm_b: &str) -> Vec<Comparison> {
    let table = success_table(rows);
    let problems: Vec<String> = {
        let mut p: Vec<String> = table.keys().map(|(prob, _)| prob.clone()).collect();
        p.dedup();
        p
    };
    problems
        .into_iter()
        .filter_map(|problem| {
            let a = *table.get(&(problem.clone(), arm_a.to_string()))?;
            let b = *table.get(&(problem.clone(), arm_b.to_string()))?;
            let chi = chi_square_2x2(a.successes, a.total, b.successes, b.total);
            Some(Comparison {
                problem,
                arm_a: arm_a.to_string(),
                a,
                arm_b: arm_b.to_string(),
                b,
                chi,
            })
        })
        .collect()
}

/// One step of a cumulative success curve.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    pub problem: String,
    pub variant: String,
    pub executions: u64,
    pub cumulative_successes: u64,
}

/// Per-arm step series of (executions of the run at its solution, cumulative
/// successes), non-decreasing by construction. Every arm starts at (0, 0);
/// arms without successes stay flat.
pub fn cumulative_success_curves(rows: &[RunSummary]) -> Vec<CurvePoint> {
    let mut arms: BTreeMap<(String, String), Vec<u64>> = BTreeMap::new();
    for row in rows {
        let entry = arms
            .entry((row.problem.clone(), row.variant.clone()))
            .or_default();
        if row.outcome == Outcome::TrainSolutionGeneralized.as_str() {
            if let Some(x) = row.executions_at_solution {
                entry.push(x);
            }
        }
    }
    let mut points = Vec::new();
    for ((problem, variant), mut solved_at) in arms {
        solved_at.sort_unstable();
        points.push(CurvePoint {
            problem: problem.clone(),
            variant: variant.clone(),
            executions: 0,
            cumulative_successes: 0,
        });
        for (i, x) in solved_at.iter().enumerate() {
            points.push(CurvePoint {
                problem: problem.clone(),
                variant: variant.clone(),
                executions: *x,
                cumulative_successes: (i + 1) as u64,
            });
        }
    }
    points
}

/// Writes curve points as CSV.
pub fn write_curves(w: &mut impl std::io::Write, points: &[CurvePoint]) -> std::io::Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    for p in points {
        csv.serialize(p)?;
    }
    csv.flush()
}
