//! Fast path for analytic complements with a single-peaked density.
//!
//! With one density peak at `M` every gradient has a single target `h >= M`
//! and its trace `l` is where the tangent at `h` re-enters the c.d.f. on
//! the convex side, if it does at all. The budget is then a function of `h`
//! alone, searched directly. A decreasing density (`M = 0`) has a concave
//! c.d.f. and reduces to water-filling the lowest entries.

use crate::basic::{CollinearKind, CollinearScore, Gradient};
use crate::error::{Error, Result};
use crate::iterative::{assemble, Promotion, ReinforcementPlan, SolverKind, Structure};
use crate::model::{BudgetSpec, ComplementModel, ReinforcedSet, Segment, SupportedSet};

const BISECT_ITERS: usize = 200;

#[derive(Clone, Debug, PartialEq)]
pub struct UnimodalProfile<'a> {
    pub mode: f64,
    pub density_at_mode: f64,
    pub model: &'a ComplementModel,
}

impl<'a> UnimodalProfile<'a> {
    pub fn new(model: &'a ComplementModel) -> Result<Self> {
        match model {
            ComplementModel::Exponential { .. } | ComplementModel::LogNormal { .. } => Ok(Self {
                mode: model.mode().unwrap_or(0.0),
                density_at_mode: model.peak_density(),
                model,
            }),
            _ => Err(Error::NotUnimodal),
        }
    }

    pub fn is_decreasing(&self) -> bool {
        self.mode == 0.0
    }
}

fn pdf(model: &ComplementModel, x: f64) -> f64 {
    model.pdf(x).unwrap_or(0.0)
}

/// Trace of `h` at the gradient equal to the density at `h`: the unique
/// `l` in `(0, M)` where the tangent at `h` meets the c.d.f., or 0.
pub fn solve_chord_tangency(model: &ComplementModel, h: f64) -> Result<f64> {
    let profile = UnimodalProfile::new(model)?;
    if !(h.is_finite() && h > profile.mode) {
        return Err(Error::Domain(format!(
            "tangency point {h} must lie above the mode {}",
            profile.mode
        )));
    }
    if profile.is_decreasing() {
        return Ok(0.0);
    }
    let fh = model.cdf_at(h);
    let dh = pdf(model, h);
    // c.d.f. minus tangent line; positive at the origin iff the line
    // crosses zero before reaching it
    let gap = |l: f64| model.cdf_at(l) - fh + dh * (h - l);
    if gap(0.0) <= 0.0 {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0, profile.mode);
    for _ in 0..BISECT_ITERS {
        if hi - lo <= 1e-10 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if gap(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Trace for a candidate target of a unimodal model; `h` at or below the
/// mode gives the empty segment.
pub(crate) fn tangency_trace(model: &ComplementModel, h: f64) -> f64 {
    match model.mode() {
        Some(m) if h > m => solve_chord_tangency(model, h).unwrap_or(0.0),
        Some(0.0) => 0.0,
        _ => h,
    }
}

/// Largest `h` whose tangent re-enters the c.d.f. at a positive score.
/// Above it every trace is 0.
pub fn tangency_threshold(model: &ComplementModel) -> Result<f64> {
    let profile = UnimodalProfile::new(model)?;
    if profile.is_decreasing() {
        return Ok(0.0);
    }
    // h f(h) - F(h) is positive just above the mode and negative far out
    let excess = |h: f64| h * pdf(model, h) - model.cdf_at(h);
    let mut lo = profile.mode;
    let mut hi = 2.0 * profile.mode.max(1.0);
    while excess(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..BISECT_ITERS {
        if hi - lo <= 1e-14 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if excess(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Water-filling for a decreasing complement density: the lowest `m`
/// entries are raised to a common level `h` that exhausts the budget. The
/// plan does not depend on which decreasing density is used; `model` only
/// supplies the utilities and the final gradient.
pub fn solve_decreasing(
    supported: &SupportedSet,
    model: &ComplementModel,
    budget: BudgetSpec,
) -> Result<ReinforcementPlan> {
    let profile = UnimodalProfile::new(model)?;
    if !profile.is_decreasing() {
        return Err(Error::NotUnimodal);
    }
    let r = supported.scores();
    let b = budget.value();
    let n = r.len();
    let mut m = n;
    let mut below = 0.0; // sum over i <= k of r_k - r_i, k = current level
    for k in 0..n - 1 {
        // raise levels 0..=k from r[k] to r[k + 1]
        let next = below + (k + 1) as f64 * (r[k + 1] - r[k]);
        if next > b {
            m = k + 1;
            break;
        }
        below = next;
    }
    let h = r[m - 1] + (b - below) / m as f64;
    let mut assignments = ReinforcedSet::identity(supported);
    if b > 0.0 {
        for p in &mut assignments.pairs_mut()[..m] {
            p.1 = h;
        }
    }
    let (gradient, targets, segments) = if b > 0.0 {
        (
            Some(Gradient::from_ln(model.ln_pdf(h).unwrap_or(f64::MIN))?),
            vec![h],
            vec![Segment { low: 0.0, high: h }],
        )
    } else {
        (None, Vec::new(), Vec::new())
    };
    assemble(
        supported,
        model,
        b,
        assignments,
        Structure {
            gradient,
            targets,
            segments,
            collinear: Vec::new(),
            promotions: Vec::new(),
        },
        SolverKind::Unimodal,
    )
}

/// Plan with single target `h` and trace `l`; entries strictly inside are raised.
struct Level {
    h: f64,
    l: f64,
    cost: f64,
}

fn level(supported: &SupportedSet, model: &ComplementModel, h: f64) -> Level {
    let l = tangency_trace(model, h);
    let r = supported.scores();
    let lo = r.partition_point(|&x| x <= l);
    let hi = r.partition_point(|&x| x < h);
    let cost = r[lo..hi.max(lo)].iter().map(|&x| h - x).sum();
    Level { h, l, cost }
}

/// Single-target solution for a unimodal complement.
pub fn solve_unimodal(
    supported: &SupportedSet,
    model: &ComplementModel,
    budget: BudgetSpec,
) -> Result<ReinforcementPlan> {
    let profile = UnimodalProfile::new(model)?;
    if profile.is_decreasing() {
        return solve_decreasing(supported, model, budget);
    }
    let b = budget.value();
    if b == 0.0 {
        return assemble(
            supported,
            model,
            b,
            ReinforcedSet::identity(supported),
            Structure {
                gradient: None,
                targets: Vec::new(),
                segments: Vec::new(),
                collinear: Vec::new(),
                promotions: Vec::new(),
            },
            SolverKind::Unimodal,
        );
    }

    // cost(h) is non-decreasing; bracket the budget between lo and hi
    let r = supported.scores();
    let mode = profile.mode;
    let mut lo = level(supported, model, mode);
    let mut hi = level(supported, model, mode + b + r[r.len() - 1]);
    while hi.cost <= b {
        lo = hi;
        hi = level(supported, model, mode + 2.0 * (lo.h - mode));
    }
    for _ in 0..BISECT_ITERS {
        if hi.h - lo.h <= 1e-13 * hi.h {
            break;
        }
        let mid = level(supported, model, 0.5 * (lo.h + hi.h));
        if mid.cost <= b {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    // entries whose inclusion makes the budget jump between lo and hi
    let jump_lo = r.partition_point(|&x| x <= hi.l);
    let jump_hi = r.partition_point(|&x| x <= lo.l);
    let mut assignments = ReinforcedSet::identity(supported);
    let mut collinear = Vec::new();
    let mut promotions = Vec::new();
    let h;
    if jump_lo < jump_hi {
        let y = r[jump_hi - 1];
        h = jump_target(model, y, lo.h, hi.h);
        let first = r.partition_point(|&x| x <= y);
        let last = r.partition_point(|&x| x < h);
        let used: f64 = r[first..last].iter().map(|&x| h - x).sum();
        for p in &mut assignments.pairs_mut()[first..last] {
            p.1 = h;
        }
        let at_y = r.partition_point(|&x| x < y)..first;
        let step = h - y;
        let residual = b - used;
        let k = ((residual + 1e-9 * residual.abs().max(1.0)) / step)
            .floor()
            .max(0.0) as usize;
        let k = k.min(at_y.len());
        for p in &mut assignments.pairs_mut()[at_y.start..at_y.start + k] {
            p.1 = h;
        }
        collinear.push(CollinearScore {
            score: y,
            kind: CollinearKind::Source,
        });
        if k > 0 {
            promotions.push(Promotion {
                from: y,
                to: h,
                count: k,
            });
        }
    } else {
        // continuous case: the budget is met exactly by the common level
        let first = r.partition_point(|&x| x <= hi.l);
        let mut last = r.partition_point(|&x| x < hi.h);
        let mut level_h = hi.h;
        while last > first {
            let sum: f64 = r[first..last].iter().sum();
            level_h = (b + sum) / (last - first) as f64;
            let fitted = r.partition_point(|&x| x < level_h);
            if fitted >= last {
                break;
            }
            last = fitted;
        }
        h = level_h;
        for p in &mut assignments.pairs_mut()[first..last] {
            p.1 = h;
        }
    }
    let l = tangency_trace(model, h);
    let gradient = Gradient::from_ln(model.ln_pdf(h).unwrap_or(f64::MIN))?;
    assemble(
        supported,
        model,
        b,
        assignments,
        Structure {
            gradient: Some(gradient),
            targets: vec![h],
            segments: if l < h {
                vec![Segment { low: l, high: h }]
            } else {
                Vec::new()
            },
            collinear,
            promotions,
        },
        SolverKind::Unimodal,
    )
}

/// The `h` in `[lo, hi]` whose tangent passes through the c.d.f. at `y`:
/// `y <= l(h)` exactly when `F(y) >= F(h) - f(h) (h - y)`.
fn jump_target(model: &ComplementModel, y: f64, mut lo: f64, mut hi: f64) -> f64 {
    let above = |h: f64| model.cdf_at(y) - model.cdf_at(h) + pdf(model, h) * (h - y) >= 0.0;
    for _ in 0..BISECT_ITERS {
        if hi - lo <= 1e-15 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if above(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}
