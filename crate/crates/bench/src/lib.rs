//! Shared fixtures for the criterion benchmarks in `benches/`.

use owc_core::channel::compute_channel_matrix;
use owc_core::scene::builtin_scenario;
use owc_core::{AllocationProblem, ChannelMatrix, ScenarioConfig, Scene, TraceParams};

/// Trace a built-in scenario and build its allocation problem.
pub fn traced(name: &str) -> (ScenarioConfig, ChannelMatrix, AllocationProblem) {
    let config = builtin_scenario(name).expect("built-in scenario");
    let scene = Scene::build(config.clone()).expect("valid scene");
    let matrix = compute_channel_matrix(&scene, &TraceParams::default()).expect("trace");
    let problem = AllocationProblem::from_channel(&config, &matrix).expect("problem");
    (config, matrix, problem)
}
