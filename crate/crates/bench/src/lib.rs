//! Shared fixtures for the criterion benchmarks.

use gridroute::engine::{run_engine, EngineConfig, RepairMode, Solution};
use gridroute::grid::{generate_synthetic, Instance};

pub fn instance(rows: usize, cols: usize, nets: usize, terminals: usize, seed: u64) -> Instance {
    generate_synthetic(rows, cols, nets, terminals, seed).expect("valid bench configuration")
}

/// A tightly budgeted instance routed with repair disabled, leaving
/// violations for the repair benchmarks to work on.
pub fn congested(rows: usize, cols: usize, nets: usize, seed: u64) -> (Instance, Solution) {
    let mut inst = instance(rows, cols, nets, 3, seed);
    inst.initial_width = Some(2);
    let config = EngineConfig {
        max_iter: 4,
        width_factor: 1.0,
        repair_mode: RepairMode::Off,
        ..EngineConfig::default()
    };
    let out = run_engine(&inst, &config).expect("bench instance routes");
    (inst, out.solution)
}
