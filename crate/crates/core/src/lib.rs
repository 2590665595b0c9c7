//! Partition refinement for bisimulation, instrumented: every refinement
//! step is costed and checked for validity.
//!
//! The crate provides labelled transition systems with an initial
//! partition ([`Lts`]), generators for adversarial families
//! ([`families`]), sequential refinement engines ([`engine`]), Roberts'
//! linear algorithm for deterministic one-action systems ([`roberts`]),
//! refinement with an end-structure oracle ([`oracle_es`]), round-based
//! parallel refinement ([`parallel`]), and brute-force oracles
//! ([`oracle`]) to check all of the above.

pub mod engine;
pub mod error;
pub mod families;
pub mod lts;
pub mod oracle;
pub mod oracle_es;
pub mod parallel;
pub mod partition;
pub mod roberts;
pub mod trace;

pub use engine::{
    refine_step, run_from, run_to_stable, trace_costs, verify_trace, BoundCheck, CostReport,
    StepOutcome, Strategy, TraceFailure,
};
pub use error::{Error, Result};
pub use families::Family;
pub use lts::{is_stable, is_stable_under, is_valid_refinement, ActionId, Lts, Transition};
pub use oracle::{bisimilarity_oracle, min_irc_bruteforce};
pub use partition::{common_refinement, is_refinement, refinement_cost, BlockId, Partition, State};
pub use trace::{RefinementTrace, Splitter};
