//! Brute-force optimizer for small exact instances.
//!
//! Every entry either keeps its score or moves to some complement score at
//! or above it; all `(m + 1)^n` such assignments are tried. Scores are
//! scaled to integers and utilities are exact rationals, so the result is
//! free of float tolerances.

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::model::{ComplementModel, ReinforcedSet, SupportedSet};

pub const MAX_SUPPORTED: usize = 6;
pub const MAX_COMPLEMENT: usize = 8;
const MAX_DECIMALS: u32 = 9;

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    pub best_utility: Ratio<i64>,
    pub best_plans: Vec<ReinforcedSet>,
    pub explored: u64,
}

/// Smallest power of ten making every value an integer.
fn scale_for(values: &[f64]) -> Result<i64> {
    for k in 0..=MAX_DECIMALS {
        let s = 10f64.powi(k as i32);
        if values.iter().all(|v| {
            let x = v * s;
            (x - x.round()).abs() <= 1e-9 * x.abs().max(1.0)
        }) {
            return Ok(10i64.pow(k));
        }
    }
    Err(Error::InvalidInput(format!(
        "scores need more than {MAX_DECIMALS} decimal places"
    )))
}

fn scaled(v: f64, s: i64) -> i64 {
    (v * s as f64).round() as i64
}

/// `(1 / (n m)) * sum sign(a - c)` with `sign(0) = +1`.
pub fn sign_sum_utility(a_scores: &[f64], c_scores: &[f64]) -> Result<Ratio<i64>> {
    if a_scores.is_empty() {
        return Err(Error::EmptySupported);
    }
    if c_scores.is_empty() {
        return Err(Error::EmptyComplement);
    }
    let mut acc: i64 = 0;
    for &a in a_scores {
        for &c in c_scores {
            acc += if a >= c { 1 } else { -1 };
        }
    }
    Ok(Ratio::new(acc, (a_scores.len() * c_scores.len()) as i64))
}

fn sign_sum_scaled(a: &[i64], c: &[i64]) -> Ratio<i64> {
    let mut acc: i64 = 0;
    for &x in a {
        acc += c.iter().map(|&y| if x >= y { 1 } else { -1 }).sum::<i64>();
    }
    Ratio::new(acc, (a.len() * c.len()) as i64)
}

/// Exhaustive optimum over complement-score targets.
pub fn oracle_solve(
    supported: &SupportedSet,
    complement: &ComplementModel,
    budget_total: f64,
) -> Result<OracleResult> {
    let comp = complement
        .as_empirical()
        .ok_or(Error::OracleNeedsEmpirical)?;
    let mut targets = comp.distinct();
    if comp.len() > MAX_COMPLEMENT {
        return Err(Error::OracleTooLarge(format!(
            "complement has {} scores, limit {MAX_COMPLEMENT}",
            comp.len()
        )));
    }
    targets.dedup();
    search(supported, comp.scores(), &targets, budget_total)
}

/// Like `oracle_solve`, with the midpoints between consecutive distinct
/// complement scores offered as extra targets.
pub fn oracle_solve_with_midpoints(
    supported: &SupportedSet,
    complement: &ComplementModel,
    budget_total: f64,
) -> Result<OracleResult> {
    let comp = complement
        .as_empirical()
        .ok_or(Error::OracleNeedsEmpirical)?;
    let d = comp.distinct();
    let mut targets = d.clone();
    targets.extend(d.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    targets.sort_by(f64::total_cmp);
    search(supported, comp.scores(), &targets, budget_total)
}

fn search(
    supported: &SupportedSet,
    complement: &[f64],
    targets: &[f64],
    budget_total: f64,
) -> Result<OracleResult> {
    let n = supported.len();
    if n > MAX_SUPPORTED {
        return Err(Error::OracleTooLarge(format!(
            "supported set has {n} entries, limit {MAX_SUPPORTED}"
        )));
    }
    if !(budget_total.is_finite() && budget_total >= 0.0) {
        return Err(Error::InvalidInput(format!("budget {budget_total}")));
    }
    let mut all: Vec<f64> = supported.scores().to_vec();
    all.extend_from_slice(complement);
    all.extend_from_slice(targets);
    all.push(budget_total);
    let s = scale_for(&all)?;
    let a: Vec<i64> = supported.scores().iter().map(|&v| scaled(v, s)).collect();
    let c: Vec<i64> = complement.iter().map(|&v| scaled(v, s)).collect();
    let t: Vec<i64> = targets.iter().map(|&v| scaled(v, s)).collect();
    let budget = scaled(budget_total, s);

    // own score first, then every target; targets below the entry are
    // enumerated but infeasible
    let choices: Vec<Vec<i64>> = a
        .iter()
        .map(|&r| std::iter::once(r).chain(t.iter().copied()).collect())
        .collect();

    let mut idx = vec![0usize; n];
    let mut current = vec![0i64; n];
    let mut best: Option<Ratio<i64>> = None;
    let mut plans: Vec<Vec<i64>> = Vec::new();
    let mut explored = 0u64;
    loop {
        explored += 1;
        let mut cost = 0i64;
        let mut dominated = true;
        for i in 0..n {
            current[i] = choices[i][idx[i]];
            cost += current[i] - a[i];
            dominated &= current[i] >= a[i];
        }
        if dominated && cost <= budget {
            let u = sign_sum_scaled(&current, &c);
            match best {
                Some(b) if u < b => {}
                Some(b) if u == b => {
                    if !plans.contains(&current) {
                        plans.push(current.clone());
                    }
                }
                _ => {
                    best = Some(u);
                    plans.clear();
                    plans.push(current.clone());
                }
            }
        }
        let mut i = 0;
        loop {
            if i == n {
                let best_plans = plans
                    .into_iter()
                    .map(|p| {
                        ReinforcedSet::new(
                            supported
                                .scores()
                                .iter()
                                .zip(p)
                                .map(|(&from, to)| {
                                    (
                                        from,
                                        if to == scaled(from, s) {
                                            from
                                        } else {
                                            to as f64 / s as f64
                                        },
                                    )
                                })
                                .collect(),
                        )
                    })
                    .collect::<Result<Vec<_>>>()?;
                return Ok(OracleResult {
                    best_utility: best.expect("identity assignment is always feasible"),
                    best_plans,
                    explored,
                });
            }
            idx[i] += 1;
            if idx[i] < choices[i].len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}
