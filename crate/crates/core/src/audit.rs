//! Post-condition checks on solver output. Each check returns a list of
//! human-readable violations; an empty list means the output is sound.

use std::collections::HashMap;

use crate::basic::{AlphaSolution, COLLINEAR_TOL};
use crate::iterative::{Promotion, ReinforcementPlan};
use crate::model::{utility, ComplementModel, ReinforcedSet, Segment, SupportedSet};

fn rel_tol(x: f64) -> f64 {
    1e-9 * x.abs().max(1.0)
}

/// Cardinality, per-entry dominance and the first-order dominance of the
/// reinforced c.d.f. at every breakpoint.
pub fn check_assignments(supported: &SupportedSet, plan: &ReinforcedSet) -> Vec<String> {
    let mut out = Vec::new();
    if plan.len() != supported.len() {
        out.push(format!(
            "plan has {} entries, supported set {}",
            plan.len(),
            supported.len()
        ));
        return out;
    }
    let mut originals: Vec<f64> = plan.originals().collect();
    originals.sort_by(f64::total_cmp);
    if originals != supported.scores() {
        out.push("plan originals differ from the supported scores".into());
    }
    for &(from, to) in plan.pairs() {
        if to < from || to.is_nan() {
            out.push(format!("entry {from} lowered to {to}"));
        }
    }
    let mut after: Vec<f64> = plan.reinforced().collect();
    after.sort_by(f64::total_cmp);
    for x in originals.iter().chain(&after) {
        let fa = after.partition_point(|&v| v <= *x);
        let fo = originals.partition_point(|&v| v <= *x);
        if fa > fo {
            out.push(format!("reinforced c.d.f. exceeds the original at {x}"));
            break;
        }
    }
    out
}

/// Budget use, expectation identity and utility bookkeeping of a plan.
pub fn check_plan(
    supported: &SupportedSet,
    model: &ComplementModel,
    plan: &ReinforcementPlan,
) -> Vec<String> {
    let mut out = check_assignments(supported, &plan.assignments);
    let cost = plan.assignments.cost();
    if (cost - plan.budget_used).abs() > rel_tol(cost) {
        out.push(format!(
            "budget_used {} but assignments cost {cost}",
            plan.budget_used
        ));
    }
    if plan.budget_used > plan.budget_total + rel_tol(plan.budget_total) {
        out.push(format!(
            "budget_used {} exceeds total {}",
            plan.budget_used, plan.budget_total
        ));
    }
    let n = supported.len() as f64;
    let lift = plan.assignments.expectation() - supported.expectation();
    if (lift - plan.budget_used / n).abs() > rel_tol(plan.budget_used) {
        out.push(format!(
            "expectation lift {lift} but budget per entry {}",
            plan.budget_used / n
        ));
    }
    if plan.utility_after < plan.utility_before - 1e-12 {
        out.push(format!(
            "utility fell from {} to {}",
            plan.utility_before, plan.utility_after
        ));
    }
    match utility(&plan.assignments, model) {
        Ok(u) if (u - plan.utility_after).abs() <= 1e-12 => {}
        Ok(u) => out.push(format!(
            "utility_after {} but recomputed {u}",
            plan.utility_after
        )),
        Err(e) => out.push(format!("utility recomputation failed: {e}")),
    }
    out.extend(check_chords(model, plan.alpha_final, &plan.segments));
    out.extend(check_membership(
        &plan.assignments,
        &plan.segments,
        &plan.collinear_promotions,
    ));
    out
}

/// Post-conditions of a single-gradient solution.
pub fn check_solution(
    supported: &SupportedSet,
    model: &ComplementModel,
    sol: &AlphaSolution,
) -> Vec<String> {
    let mut out = check_assignments(supported, &sol.plan);
    let cost = sol.plan.cost();
    if (cost - sol.budget_used).abs() > rel_tol(cost) {
        out.push(format!(
            "budget_used {} but plan costs {cost}",
            sol.budget_used
        ));
    }
    if !(sol.next_alpha == 0.0 || sol.next_alpha < sol.alpha) {
        out.push(format!(
            "next gradient {} is not below {}",
            sol.next_alpha, sol.alpha
        ));
    }
    for a in &sol.segments {
        if !sol.targets.contains(&a.high) {
            out.push(format!("segment top {} is not a target", a.high));
        }
    }
    let mut sorted = sol.segments.clone();
    sorted.sort_by(|a, b| a.low.total_cmp(&b.low));
    for w in sorted.windows(2) {
        if w[1].low < w[0].high {
            out.push(format!(
                "segments [{}, {}) and [{}, {}) overlap",
                w[0].low, w[0].high, w[1].low, w[1].high
            ));
        }
    }
    out.extend(check_chords(model, sol.alpha, &sol.segments));
    out.extend(check_membership(&sol.plan, &sol.segments, &[]));
    out
}

/// Inside each segment the c.d.f. stays on or below the chord line through
/// the segment's top. Exact complements are checked at every step top,
/// analytic ones on a grid.
pub fn check_chords(model: &ComplementModel, alpha: f64, segments: &[Segment]) -> Vec<String> {
    let mut out = Vec::new();
    if !alpha.is_finite() {
        return out;
    }
    let distinct = model.as_empirical().map(|e| e.distinct());
    for seg in segments {
        let y = seg.high;
        let fy = model.cdf_at(y);
        let above = |w: f64| {
            let line = fy - alpha * (y - w);
            model.cdf_at(w) > line + COLLINEAR_TOL * alpha * (y - w) + 1e-12
        };
        let bad = match &distinct {
            Some(d) => {
                let lo = d.partition_point(|&w| w < seg.low);
                let hi = d.partition_point(|&w| w < y);
                d[lo..hi.max(lo)].iter().copied().find(|&w| above(w))
            }
            None => (0..64)
                .map(|k| seg.low + (y - seg.low) * k as f64 / 64.0)
                .find(|&w| above(w) && model.cdf_at(w) - (fy - alpha * (y - w)) > 1e-9),
        };
        if let Some(w) = bad {
            out.push(format!(
                "c.d.f. above the chord of segment [{}, {y}) at {w}",
                seg.low
            ));
        }
    }
    out
}

/// Every reinforced entry starts inside the run of contiguous segments that
/// ends at its new score. Promoted entries are checked by count only, and
/// must start at or below the score they were promoted from.
fn check_membership(
    plan: &ReinforcedSet,
    segments: &[Segment],
    promotions: &[Promotion],
) -> Vec<String> {
    let mut out = Vec::new();
    let by_high: HashMap<u64, f64> = segments.iter().map(|s| (s.high.to_bits(), s.low)).collect();
    let mut run_low: HashMap<u64, f64> = HashMap::new();
    let mut promoted: Vec<(f64, f64, usize)> =
        promotions.iter().map(|p| (p.from, p.to, p.count)).collect();
    let mut take_promoted = |from: f64, to: f64| match promoted
        .iter_mut()
        .find(|p| p.1 == to && from <= p.0 && p.2 > 0)
    {
        Some(p) => {
            p.2 -= 1;
            true
        }
        None => false,
    };
    for &(from, to) in plan.pairs() {
        if to == from {
            continue;
        }
        let low = by_high.get(&to.to_bits()).map(|&first| {
            *run_low.entry(to.to_bits()).or_insert_with(|| {
                let mut low = first;
                while let Some(&l) = by_high.get(&low.to_bits()) {
                    low = l;
                }
                low
            })
        });
        let inside = low.is_some_and(|low| from >= low - rel_tol(to) && from < to);
        if !inside && !take_promoted(from, to) {
            match low {
                Some(low) => out.push(format!(
                    "entry {from} moved to {to} from outside [{low}, {to})"
                )),
                None => out.push(format!("entry {from} moved to {to}, which tops no segment")),
            }
        }
    }
    out
}
