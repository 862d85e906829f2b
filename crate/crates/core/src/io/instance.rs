//! Problem instance files.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::io::json;
use crate::model::{BudgetSpec, ComplementModel, SupportedSet};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ComplementSpec {
    Empirical(Vec<f64>),
    Exponential { lambda: f64 },
    Lognormal { mu: f64, sigma: f64 },
    PiecewiseLinearCdf { points: Vec<[f64; 2]> },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum BudgetField {
    Total(f64),
    PerEntry(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub supported: Vec<f64>,
    pub complement: ComplementSpec,
    pub budget: BudgetField,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

/// Validated contents of an instance file.
#[derive(Clone, Debug)]
pub struct Instance {
    pub supported: SupportedSet,
    pub model: ComplementModel,
    pub budget: BudgetSpec,
    pub epsilon: Option<f64>,
}

impl InstanceFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("instance: {e}")))
    }

    pub fn to_json(&self) -> String {
        json::to_string(self).expect("instance serializes")
    }

    /// Hash of the canonical serialization, used to pair plans with instances.
    pub fn sha256(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }

    pub fn validate(&self) -> Result<Instance> {
        let supported = SupportedSet::new(self.supported.clone())
            .map_err(|e| Error::InvalidInput(format!("supported: {e}")))?;
        let model = match &self.complement {
            ComplementSpec::Empirical(scores) => ComplementModel::empirical(scores.clone()),
            ComplementSpec::Exponential { lambda } => ComplementModel::exponential(*lambda),
            ComplementSpec::Lognormal { mu, sigma } => ComplementModel::log_normal(*mu, *sigma),
            ComplementSpec::PiecewiseLinearCdf { points } => {
                ComplementModel::piecewise_linear(points.iter().map(|p| (p[0], p[1])).collect())
            }
        }
        .map_err(|e| match e {
            Error::EmptyComplement => e,
            other => Error::InvalidInput(format!("complement: {other}")),
        })?;
        let budget = match self.budget {
            BudgetField::Total(t) => BudgetSpec::total(t),
            BudgetField::PerEntry(p) => BudgetSpec::from_per_entry(p, supported.len()),
        }
        .map_err(|e| Error::InvalidInput(format!("budget: {e}")))?;
        if let Some(eps) = self.epsilon {
            if !(eps.is_finite() && eps >= 0.0) {
                return Err(Error::InvalidInput(format!(
                    "epsilon: must be non-negative, got {eps}"
                )));
            }
        }
        Ok(Instance {
            supported,
            model,
            budget,
            epsilon: self.epsilon,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_each_complement_family() {
        let cases = [
            r#"{"supported":[1],"complement":{"empirical":[2,3]},"budget":{"total":1}}"#,
            r#"{"supported":[1],"complement":{"exponential":{"lambda":0.8}},"budget":{"per_entry":1}}"#,
            r#"{"supported":[1],"complement":{"lognormal":{"mu":0,"sigma":1}},"budget":{"total":1},"epsilon":1e-9}"#,
            r#"{"supported":[1],"complement":{"piecewise_linear_cdf":{"points":[[0,0],[2,1]]}},"budget":{"total":1}}"#,
        ];
        for c in cases {
            let f = InstanceFile::from_json(c).unwrap();
            f.validate().unwrap();
            assert_eq!(InstanceFile::from_json(&f.to_json()).unwrap(), f);
        }
    }

    #[test]
    fn per_entry_budget_scales_with_n() {
        let f = InstanceFile::from_json(
            r#"{"supported":[1,2,3],"complement":{"empirical":[5]},"budget":{"per_entry":2}}"#,
        )
        .unwrap();
        assert_eq!(f.validate().unwrap().budget.value(), 6.0);
    }

    #[test]
    fn diagnostics_name_the_field() {
        let e = InstanceFile::from_json(
            r#"{"supported":[1],"complement":{"empirical":[2]},"budget":{"total":1},"extra":1}"#,
        )
        .unwrap_err();
        assert!(e.to_string().contains("extra"), "{e}");
        let e = InstanceFile::from_json(r#"{"supported":[1],"complement":{"empirical":[2]}}"#)
            .unwrap_err();
        assert!(e.to_string().contains("budget"), "{e}");
        let e = InstanceFile::from_json(r#"{"supported":[1],"complement":{"empirical":[2]},"budget":{"total":1,"per_entry":1}}"#)
            .unwrap_err();
        assert!(e.to_string().contains("instance"), "{e}");
        let f = InstanceFile::from_json(
            r#"{"supported":[1],"complement":{"empirical":[]},"budget":{"total":1}}"#,
        )
        .unwrap();
        assert_eq!(f.validate().unwrap_err().to_string(), "empty complement");
        let f = InstanceFile::from_json(
            r#"{"supported":[-1],"complement":{"empirical":[2]},"budget":{"total":1}}"#,
        )
        .unwrap();
        assert!(f.validate().unwrap_err().to_string().contains("supported"));
    }

    #[test]
    fn hash_is_stable_and_content_sensitive() {
        let a = InstanceFile::from_json(
            r#"{"supported":[1],"complement":{"empirical":[2]},"budget":{"total":1}}"#,
        )
        .unwrap();
        let b = InstanceFile::from_json(
            r#"{ "budget":{"total":1.0}, "supported":[1.0],"complement":{"empirical":[2]}}"#,
        )
        .unwrap();
        let c = InstanceFile::from_json(
            r#"{"supported":[1],"complement":{"empirical":[2]},"budget":{"total":2}}"#,
        )
        .unwrap();
        assert_eq!(a.sha256(), b.sha256());
        assert_ne!(a.sha256(), c.sha256());
    }
}
