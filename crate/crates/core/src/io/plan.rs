//! Plan files written by `solve` and read back by `plot`.

use serde::{Deserialize, Serialize};

use crate::basic::CollinearScore;
use crate::error::{Error, Result};
use crate::io::json;
use crate::iterative::{Promotion, ReinforcementPlan, SolverKind};
use crate::model::{ReinforcedSet, Segment};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Assignment {
    pub from: f64,
    pub to: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanFile {
    pub assignments: Vec<Assignment>,
    pub budget_total: f64,
    pub budget_used: f64,
    pub slack: f64,
    /// `null` when no gradient was involved.
    pub alpha_final: Option<f64>,
    pub log_alpha_final: Option<f64>,
    pub targets: Vec<f64>,
    pub segments: Vec<Segment>,
    pub collinear: Vec<CollinearScore>,
    pub promotions: Vec<Promotion>,
    pub utility_before: f64,
    pub utility_after: f64,
    pub solver: SolverKind,
    pub instance_sha256: String,
}

impl PlanFile {
    pub fn new(plan: &ReinforcementPlan, instance_sha256: String) -> Self {
        let mut assignments: Vec<Assignment> = plan
            .assignments
            .pairs()
            .iter()
            .map(|&(from, to)| Assignment { from, to })
            .collect();
        assignments.sort_by(|a, b| a.from.total_cmp(&b.from).then(a.to.total_cmp(&b.to)));
        let finite = |v: f64| v.is_finite().then_some(v);
        Self {
            assignments,
            budget_total: plan.budget_total,
            budget_used: plan.budget_used,
            slack: plan.slack(),
            alpha_final: finite(plan.alpha_final),
            log_alpha_final: finite(plan.ln_alpha_final),
            targets: plan.targets.clone(),
            segments: plan.segments.clone(),
            collinear: plan.collinear.clone(),
            promotions: plan.collinear_promotions.clone(),
            utility_before: plan.utility_before,
            utility_after: plan.utility_after,
            solver: plan.solver,
            instance_sha256,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("plan: {e}")))
    }

    pub fn to_json(&self) -> String {
        json::to_string(self).expect("plan serializes")
    }

    pub fn reinforced_set(&self) -> Result<ReinforcedSet> {
        ReinforcedSet::new(self.assignments.iter().map(|a| (a.from, a.to)).collect())
    }
}
