pub mod cli;
pub mod instance;
pub mod json;
pub mod plan;
pub mod svg;

pub use instance::{BudgetField, ComplementSpec, Instance, InstanceFile};
pub use plan::{Assignment, PlanFile};
