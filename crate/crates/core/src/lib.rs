//! Parallel net routing on grid graphs.
//!
//! Routes a set of nets across a weighted 4-neighbor grid while driving the
//! number of nets per edge under a channel-width budget. Capacity
//! constraints are relaxed into per-edge Lagrange multipliers updated by a
//! primal-dual sub-gradient step; nets are routed independently (and in
//! parallel) as Steiner trees under the effective costs; the budget is
//! tightened whenever an iteration is feasible; and a final repair pass
//! diverts residual overflows onto admissible alternate paths.
//!
//! Module map:
//! - [`grid`]: graph and instance model, synthetic generation
//! - [`format`]: instance and routes text formats
//! - [`steiner`]: per-net routing kernel
//! - [`lagrange`]: multipliers and the sub-gradient update
//! - [`repair`]: capacity-violation repair
//! - [`engine`]: the outer loop and parallel orchestration
//! - [`metrics`]: reported quantities
//! - [`oracle`]: exhaustive reference solver for tiny instances (test use)

pub mod engine;
pub mod error;
pub mod format;
pub mod grid;
pub mod lagrange;
pub mod metrics;
pub mod oracle;
pub mod repair;
pub mod steiner;

pub use engine::{run_engine, EngineConfig, IterationRecord, RepairMode, RunOutcome, Solution};
pub use error::Error;
pub use grid::{generate_synthetic, EdgeId, GridGraph, Instance, Net, VertexId};
pub use lagrange::{LagrangeState, UsageCounts};
pub use metrics::{compute_metrics, geo_mean, MetricsReport};
pub use repair::{RepairConfig, RepairOutcome, RepairReport};
pub use steiner::{CostView, RouteTree};

pub type Result<T> = std::result::Result<T, Error>;
