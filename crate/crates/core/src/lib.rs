//! Multi-agent planning from grouped signal temporal logic specifications.
//!
//! The crate turns a [`spec::GlobalSpec`] over a heterogeneous [`spec::Fleet`]
//! into a mixed-integer linear program, solves it, and checks the resulting
//! trajectories against an independent evaluator in [`oracle`].

pub mod dynamics;
pub mod groups;
pub mod milp;
pub mod oracle;
pub mod par;
pub mod pipeline;
pub mod solver;
pub mod spec;

pub use dynamics::{AgentModel, ControlSequence, TeamTrajectory, Trajectory};
pub use groups::{enumerate_groups, enumerate_spec, AgentGroup, GroupSet, SpecGroups};
pub use oracle::{monitor, rho_sync_global, sat_global, MonitorReport, Robustness};
pub use spec::{Fleet, Formula, GlobalSpec, SyncTask, Task};
