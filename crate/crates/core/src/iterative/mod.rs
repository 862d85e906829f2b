//! Budget-constrained reinforcement by search over the chord gradient.
//!
//! Spent budget is a non-increasing function of the gradient, so the
//! search keeps a bracket `lower < upper` where the solution at `upper`
//! fits the budget and the one at `lower` does not. For exact complements
//! the budget is a step function and the bracket closes on the step where
//! it jumps past the limit; entries sitting at collinear scores at that
//! gradient then absorb the residual by moving up the shared chord line.
//! Analytic complements are searched on the log-gradient, since the
//! densities involved easily underflow.

mod knapsack;

use serde::{Deserialize, Serialize};

pub use knapsack::{bounded_knapsack, fill as knapsack_fill, ItemType, KnapsackInstance};
use knapsack::{multiple_choice_fill, ChoiceGroup};

use crate::basic::{
    fits, AlphaSolution, CollinearScore, Gradient, Prepared, Qualify, Sweep, TraceRule,
};
use crate::error::{Error, Result};
use crate::model::{utility, BudgetSpec, ComplementModel, ReinforcedSet, Segment, SupportedSet};

const SEARCH_NODE_LIMIT: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Iterative,
    Unimodal,
    Oracle,
}

/// `count` entries moved from score `from` to score `to` after the sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Promotion {
    pub from: f64,
    pub to: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReinforcementPlan {
    pub assignments: ReinforcedSet,
    pub budget_total: f64,
    pub budget_used: f64,
    /// Final gradient; `+inf` when no gradient was involved. May underflow
    /// to 0 for analytic tails, see `ln_alpha_final`.
    pub alpha_final: f64,
    pub ln_alpha_final: f64,
    pub utility_before: f64,
    pub utility_after: f64,
    pub targets: Vec<f64>,
    pub segments: Vec<Segment>,
    pub collinear: Vec<CollinearScore>,
    pub collinear_promotions: Vec<Promotion>,
    pub solver: SolverKind,
}

impl ReinforcementPlan {
    pub fn slack(&self) -> f64 {
        (self.budget_total - self.budget_used).max(0.0)
    }
}

/// Gradient-derived parts of a plan.
pub(crate) struct Structure {
    pub gradient: Option<Gradient>,
    pub targets: Vec<f64>,
    pub segments: Vec<Segment>,
    pub collinear: Vec<CollinearScore>,
    pub promotions: Vec<Promotion>,
}

pub(crate) fn assemble(
    supported: &SupportedSet,
    model: &ComplementModel,
    budget_total: f64,
    assignments: ReinforcedSet,
    structure: Structure,
    solver: SolverKind,
) -> Result<ReinforcementPlan> {
    let budget_used = assignments.cost();
    if !fits(budget_used, budget_total) {
        return Err(Error::Invariant(format!(
            "plan spends {budget_used} of a {budget_total} budget"
        )));
    }
    let utility_before = utility(&ReinforcedSet::identity(supported), model)?;
    let utility_after = utility(&assignments, model)?;
    let (alpha_final, ln_alpha_final) = structure
        .gradient
        .map_or((f64::INFINITY, f64::INFINITY), |g| (g.value, g.ln));
    Ok(ReinforcementPlan {
        assignments,
        budget_total,
        budget_used,
        alpha_final,
        ln_alpha_final,
        utility_before,
        utility_after,
        targets: structure.targets,
        segments: structure.segments,
        collinear: structure.collinear,
        collinear_promotions: structure.promotions,
        solver,
    })
}

/// Distance from collinear score `y` to the first non-collinear target
/// above it, following the chain of segments that start at collinear scores.
pub fn promotion_step_size(solution: &AlphaSolution, y: f64) -> Result<f64> {
    let chain = collinear_chain(solution, y)?;
    Ok(chain[chain.len() - 1] - y)
}

/// Scores reachable from collinear `y` along its chord line, ascending;
/// the last one is the non-collinear top of the chain.
fn collinear_chain(solution: &AlphaSolution, y: f64) -> Result<Vec<f64>> {
    if !solution.is_collinear(y) {
        return Err(Error::NotCollinear(y));
    }
    let mut chain = Vec::new();
    let mut at = y;
    loop {
        let seg = solution.segment_starting_at(at).ok_or_else(|| {
            Error::Invariant(format!("no segment starts at collinear score {at}"))
        })?;
        at = seg.high;
        chain.push(at);
        if !solution.is_collinear(at) {
            return Ok(chain);
        }
    }
}

/// Entries that may move by one of a few steps, with their destinations.
struct PromotionGroup {
    from: f64,
    entries: Vec<usize>,
    dests: Vec<f64>,
}

/// Spends up to `residual` by moving entries of the groups up; entries are
/// taken in input order. `grain` sizes the fallback DP.
fn promote(
    plan: &mut ReinforcedSet,
    groups: &[PromotionGroup],
    residual: f64,
    grain: f64,
) -> Vec<Promotion> {
    if groups.is_empty() || residual <= 0.0 {
        return Vec::new();
    }
    let tol = 1e-9 * residual.max(1.0);
    let everything: f64 = groups
        .iter()
        .map(|g| g.entries.len() as f64 * (g.dests[g.dests.len() - 1] - g.from))
        .sum();
    let counts: Vec<Vec<usize>> = if everything <= residual + tol {
        groups
            .iter()
            .map(|g| {
                let mut v = vec![0; g.dests.len()];
                v[g.dests.len() - 1] = g.entries.len();
                v
            })
            .collect()
    } else if groups.len() == 1 && groups[0].dests.len() == 1 {
        let g = &groups[0];
        let step = g.dests[0] - g.from;
        let k = ((residual + tol) / step).floor() as usize;
        vec![vec![k.min(g.entries.len())]]
    } else {
        let single = groups.iter().all(|g| g.dests.len() == 1);
        let choice: Vec<ChoiceGroup> = groups
            .iter()
            .map(|g| ChoiceGroup {
                count: g.entries.len(),
                sizes: g.dests.iter().map(|d| d - g.from).collect(),
            })
            .collect();
        let searched = if single {
            None
        } else {
            multiple_choice_fill(&choice, residual, SEARCH_NODE_LIMIT)
        };
        searched.unwrap_or_else(|| {
            // only the full step to the top of each chain
            let types = groups
                .iter()
                .map(|g| ItemType {
                    size: g.dests[g.dests.len() - 1] - g.from,
                    count: g.entries.len(),
                })
                .collect();
            let inst = KnapsackInstance::new(residual, types).and_then(|k| k.with_grain(grain));
            let picked = inst
                .map(|k| bounded_knapsack(&k))
                .unwrap_or_else(|_| vec![0; groups.len()]);
            groups
                .iter()
                .zip(picked)
                .map(|(g, k)| {
                    let mut v = vec![0; g.dests.len()];
                    v[g.dests.len() - 1] = k;
                    v
                })
                .collect()
        })
    };
    let pairs = plan.pairs_mut();
    let mut out = Vec::new();
    for (g, per_dest) in groups.iter().zip(counts) {
        let mut entries = g.entries.iter();
        for (&dest, k) in g.dests.iter().zip(per_dest) {
            if k == 0 {
                continue;
            }
            for &i in entries.by_ref().take(k) {
                pairs[i].1 = dest;
            }
            out.push(Promotion {
                from: g.from,
                to: dest,
                count: k,
            });
        }
    }
    out
}

/// Budget-constrained optimal reinforcement. `epsilon` is the gradient
/// tolerance of the bisection; 0 asks for the exact answer, which only
/// exact complements support.
pub fn iterative_solve(
    supported: &SupportedSet,
    model: &ComplementModel,
    budget: BudgetSpec,
    epsilon: f64,
) -> Result<ReinforcementPlan> {
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(Error::Domain(format!(
            "epsilon must be non-negative, got {epsilon}"
        )));
    }
    let prepared = Prepared::new(supported, model);
    let limit = budget.value();
    if prepared.is_exact() {
        solve_exact(&prepared, limit, epsilon)
    } else {
        if epsilon == 0.0 {
            return Err(Error::EpsilonRequired);
        }
        solve_analytic(&prepared, limit, epsilon)
    }
}

fn solve_exact(p: &Prepared, limit: f64, epsilon: f64) -> Result<ReinforcementPlan> {
    let sweep = |a: f64| {
        p.sweep(
            Gradient::new(a).expect("positive gradient"),
            Qualify::Inclusive,
            TraceRule::EntryScores,
        )
    };
    let strict = |g: Gradient| p.sweep(g, Qualify::Strict, TraceRule::EntryScores);

    let start = sweep(1.0 / p.exact_range());
    let (mut lower, mut upper);
    if fits(start.budget, limit) {
        let mut u = start;
        loop {
            let a = u.gradient.value / 2.0;
            if u.saturated || a < f64::MIN_POSITIVE {
                return finish_exact(p, limit, &u);
            }
            let s = sweep(a);
            if fits(s.budget, limit) {
                u = s;
            } else {
                lower = s;
                upper = u;
                break;
            }
        }
    } else {
        let mut l = start;
        loop {
            let s = sweep(l.gradient.value * 2.0);
            if fits(s.budget, limit) {
                upper = s;
                lower = l;
                break;
            }
            l = s;
        }
    }

    loop {
        // budget just below the upper bracket decides whether it is the jump
        let below = if upper.collinear.is_empty() {
            None
        } else {
            Some(strict(upper.gradient))
        };
        let (below_budget, next) = below
            .as_ref()
            .map_or((upper.budget, upper.structural_next), |b| {
                (b.budget, b.structural_next)
            });
        if !fits(below_budget, limit) {
            break;
        }
        if next > lower.gradient.value {
            let s = sweep(next);
            if fits(s.budget, limit) {
                upper = s;
            }
        }
        let (lo, hi) = (lower.gradient.value, upper.gradient.value);
        if epsilon > 0.0 && hi - lo <= epsilon {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) {
            break;
        }
        let s = sweep(mid);
        if fits(s.budget, limit) {
            upper = s;
        } else {
            lower = s;
        }
    }
    finish_exact(p, limit, &upper)
}

fn finish_exact(p: &Prepared, limit: f64, at: &Sweep) -> Result<ReinforcementPlan> {
    let solution = p.solution(at);
    let mut plan = solution.plan.clone();
    let residual = limit - at.budget;
    let mut groups = Vec::new();
    let mut seen: Vec<f64> = Vec::new();
    for c in &solution.collinear {
        if seen.contains(&c.score) {
            continue;
        }
        seen.push(c.score);
        let entries: Vec<usize> = plan
            .pairs()
            .iter()
            .enumerate()
            .filter(|(_, pr)| pr.1 == c.score)
            .map(|(i, _)| i)
            .collect();
        if entries.is_empty() {
            continue;
        }
        groups.push(PromotionGroup {
            from: c.score,
            entries,
            dests: collinear_chain(&solution, c.score)?,
        });
    }
    let promotions = promote(&mut plan, &groups, residual, p.resolution() / 2.0);
    assemble(
        p.supported,
        p.model,
        limit,
        plan,
        Structure {
            gradient: Some(at.gradient),
            targets: solution.targets,
            segments: solution.segments,
            collinear: solution.collinear,
            promotions,
        },
        SolverKind::Iterative,
    )
}

fn solve_analytic(p: &Prepared, limit: f64, epsilon: f64) -> Result<ReinforcementPlan> {
    let peak = p.model.peak_density();
    if !(peak.is_finite() && peak > 0.0) {
        return Err(Error::InvalidModel(format!("peak density {peak}")));
    }
    let sweep = |theta: f64| -> Result<Sweep> {
        Ok(p.sweep(
            Gradient::from_ln(theta)?,
            Qualify::Inclusive,
            TraceRule::Geometric,
        ))
    };
    let width = epsilon / peak;
    // budgets vary continuously here, so the bracket test is exact

    let start = sweep((peak / 2.0).ln())?;
    let (mut lower, mut upper);
    let mut step = 1.0;
    if start.budget <= limit {
        let mut u = start;
        loop {
            if u.saturated {
                return finish_analytic(p, limit, &u, None);
            }
            let s = sweep(u.gradient.ln - step)?;
            if s.budget <= limit {
                u = s;
            } else {
                lower = s;
                upper = u;
                break;
            }
            step *= 2.0;
        }
    } else {
        let mut l = start;
        loop {
            let s = sweep(l.gradient.ln + step)?;
            if s.budget <= limit {
                upper = s;
                lower = l;
                break;
            }
            l = s;
            step *= 2.0;
        }
    }

    while upper.gradient.ln - lower.gradient.ln > width {
        let mid = 0.5 * (upper.gradient.ln + lower.gradient.ln);
        if !(mid > lower.gradient.ln && mid < upper.gradient.ln) {
            break;
        }
        let s = sweep(mid)?;
        if s.budget <= limit {
            upper = s;
        } else {
            lower = s;
        }
    }
    finish_analytic(p, limit, &upper, Some(&lower))
}

fn finish_analytic(
    p: &Prepared,
    limit: f64,
    upper: &Sweep,
    lower: Option<&Sweep>,
) -> Result<ReinforcementPlan> {
    let solution = p.solution(upper);
    let mut plan = solution.plan.clone();
    let mut groups: Vec<PromotionGroup> = Vec::new();
    if let Some(lower) = lower {
        let below = lower.plan(p.supported);
        for (i, (u, l)) in plan.pairs().iter().zip(below.pairs()).enumerate() {
            if l.1 > u.1 {
                match groups
                    .iter_mut()
                    .find(|g| g.from == u.1 && g.dests[0] == l.1)
                {
                    Some(g) => g.entries.push(i),
                    None => groups.push(PromotionGroup {
                        from: u.1,
                        entries: vec![i],
                        dests: vec![l.1],
                    }),
                }
            }
        }
    }
    let grain = groups
        .iter()
        .map(|g| g.dests[0] - g.from)
        .fold(f64::INFINITY, f64::min)
        / 2.0;
    let promotions = promote(&mut plan, &groups, limit - upper.budget, grain);
    assemble(
        p.supported,
        p.model,
        limit,
        plan,
        Structure {
            gradient: Some(upper.gradient),
            targets: solution.targets,
            segments: solution.segments,
            collinear: solution.collinear,
            promotions,
        },
        SolverKind::Iterative,
    )
}
