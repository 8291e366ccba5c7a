//! The outer optimization loop.
//!
//! Each iteration routes every net independently against a frozen cost view
//! (in parallel, one task per net), then sequentially updates the Lagrange
//! multipliers from the resulting usage and tightens the channel-width
//! budget whenever the iteration was feasible. After the loop the repair
//! pass converts residual capacity violations into feasible routes where
//! admissible detours exist.
//!
//! Results are bit-identical for any thread count: the routing phase reads
//! shared immutable state and writes only its own net's slot, and every
//! reduction happens in a single-threaded barrier phase.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Error;
use crate::grid::{GridGraph, Instance, Net};
use crate::lagrange::{update_multipliers, LagrangeState, UsageCounts};
use crate::repair::{repair_all, RepairConfig, RepairReport};
use crate::steiner::{route_net, CostView, RouteTree};
use crate::Result;

/// When the repair pass runs relative to the outer loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RepairMode {
    /// Once, after the loop converges (the default).
    Post,
    /// After every iteration's multiplier update.
    PerIteration,
    /// Never.
    Off,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EngineConfig {
    /// Iteration cap for the outer loop.
    pub max_iter: usize,
    /// Initial budget is ceil(width_factor * W_min), never below 1.
    pub width_factor: f64,
    /// Worker threads for the routing phase.
    pub threads: usize,
    /// Seed for triple sampling on very large terminal sets.
    pub seed: u64,
    pub repair_mode: RepairMode,
    pub repair: RepairConfig,
    /// Recompute Steiner candidates every iteration instead of only once.
    pub recompute_steiner: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            max_iter: 50,
            width_factor: 1.2,
            threads: 1,
            seed: 0,
            repair_mode: RepairMode::Post,
            repair: RepairConfig::default(),
            recompute_steiner: false,
        }
    }
}

/// One outer-loop iteration: total violation and wire length at the width
/// in effect during the iteration, plus the step size applied to the
/// multipliers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub violation: u64,
    pub wire_length: u64,
    pub step: f64,
}

/// The routing result: one tree per net plus derived bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    /// Route trees in instance net order.
    pub route_trees: Vec<RouteTree>,
    pub usage: UsageCounts,
    /// Current channel-width budget.
    pub width: u32,
    /// Budget the run started from.
    pub initial_width: u32,
    /// Tightest budget at which an iteration was feasible.
    pub best_feasible_width: Option<u32>,
    pub history: Vec<IterationRecord>,
}

impl Solution {
    pub fn total_wire_length(&self) -> u64 {
        self.route_trees.iter().map(|t| t.edges.len() as u64).sum()
    }

    pub fn total_violation(&self) -> u64 {
        self.usage.total_violation(self.width)
    }
}

pub struct RunOutcome {
    pub solution: Solution,
    pub repair: RepairReport,
}

/// Width schedule: on a feasible iteration record the current budget and
/// tighten below the observed peak usage; hold otherwise. Never drops
/// below 1.
pub fn width_schedule(max_usage: u32, current: u32) -> (bool, u32) {
    if max_usage <= current {
        (true, max_usage.saturating_sub(1).max(1))
    } else {
        (false, current)
    }
}

/// Run the full pipeline on an instance.
pub fn run_engine(instance: &Instance, config: &EngineConfig) -> Result<RunOutcome> {
    if config.max_iter == 0 {
        return Err(Error::invalid("max_iter must be at least 1"));
    }
    if !config.width_factor.is_finite() || config.width_factor < 1.0 {
        return Err(Error::invalid("width_factor must be at least 1.0"));
    }
    if config.threads == 0 {
        return Err(Error::invalid("threads must be at least 1"));
    }

    let graph = &instance.graph;
    let m = graph.edge_count();
    let pool = if config.threads > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(config.threads)
                .build()
                .map_err(|e| Error::invalid(format!("thread pool: {e}")))?,
        )
    } else {
        None
    };

    let mut nets = instance.nets.clone();
    let mut state = LagrangeState::new(m);

    // The lambda = 0 routing doubles as iteration 1 and as the width
    // estimate when the instance declares no budget.
    let zero = vec![0.0; m];
    let first_trees = route_all(pool.as_ref(), graph, &zero, &mut nets, true, config.seed);
    let w_min = instance.initial_width.unwrap_or_else(|| {
        UsageCounts::from_trees(m, &first_trees).max_usage().max(1)
    });
    let start_width = initial_width(config.width_factor, w_min);

    let mut solution = Solution {
        route_trees: Vec::new(),
        usage: UsageCounts::new(m),
        width: start_width,
        initial_width: start_width,
        best_feasible_width: None,
        history: Vec::new(),
    };
    let mut pending = Some(first_trees);
    let mut repair_report = RepairReport::default();
    let mut stalled = 0u32;

    for iter in 1..=config.max_iter {
        solution.route_trees = pending.take().unwrap_or_else(|| {
            route_all(
                pool.as_ref(),
                graph,
                &state.lambda,
                &mut nets,
                config.recompute_steiner,
                config.seed,
            )
        });
        let _ = iter;
        solution.usage = UsageCounts::from_trees(m, &solution.route_trees);

        update_multipliers(&mut state, &solution.usage, solution.width);

        if config.repair_mode == RepairMode::PerIteration {
            let report = repair_all(&mut solution, instance, &state.lambda, &config.repair);
            repair_report.entries.extend(report.entries);
        }

        let violation = solution.total_violation();
        solution.history.push(IterationRecord {
            violation,
            wire_length: solution.total_wire_length(),
            step: state.last_step,
        });

        let width_before = solution.width;
        let (feasible, new_width) = width_schedule(solution.usage.max_usage(), solution.width);
        if feasible {
            solution.best_feasible_width = Some(
                solution
                    .best_feasible_width
                    .map_or(width_before, |b| b.min(width_before)),
            );
        }
        solution.width = new_width;
        stalled = if new_width == width_before { stalled + 1 } else { 0 };

        // Feasible and nothing left to tighten: the budget is at its floor
        // or the schedule has stopped moving.
        if violation == 0 && (width_before == 1 || stalled >= 2) {
            break;
        }
    }

    if config.repair_mode == RepairMode::Post {
        repair_report = repair_all(&mut solution, instance, &state.lambda, &config.repair);
    }

    Ok(RunOutcome {
        solution,
        repair: repair_report,
    })
}

fn initial_width(factor: f64, w_min: u32) -> u32 {
    ((factor * w_min as f64) - 1e-9).ceil().max(1.0) as u32
}

fn route_all(
    pool: Option<&rayon::ThreadPool>,
    graph: &GridGraph,
    lambda: &[f64],
    nets: &mut [Net],
    compute_steiner: bool,
    seed: u64,
) -> Vec<RouteTree> {
    let view = CostView::new(graph, lambda);
    let work = |net: &mut Net| {
        let net_seed = seed ^ (net.id as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        route_net(&view, net, compute_steiner, net_seed)
    };
    match pool {
        // Coarse splits keep work-stealing overhead down when the pool is
        // wider than the machine.
        Some(pool) => pool.install(|| nets.par_iter_mut().with_min_len(8).map(work).collect()),
        None => nets.iter_mut().map(work).collect(),
    }
}
