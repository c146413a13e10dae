//! Scenario assembly, the deterministic closed-loop stepping engine with
//! envelope/constraint monitors, and independent verification of the
//! analytic error dynamics.

mod dynamics;
mod engine;
mod scenario;

pub use dynamics::{
    error_dynamics_rhs, finite_difference_audit, AuditError, AuditReport, BiDiagonal,
    ChannelResidual, ErrorRates, VectorFormState,
};
pub use engine::{
    decentralization_audit, run, AuditMismatch, ChannelCounter, Engine, FollowerRecord,
    HaltDiagnostic, HaltReason, PairRange, RunReport, SimResult, Trace, TraceRow,
};
pub use scenario::{
    poses_from_triples, BreachPolicy, InitialTriple, Scenario, ScenarioError, ScenarioIssue,
};
