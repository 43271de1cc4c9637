//! Fixtures shared by the benchmarks.

use ugtrack::io::parse_config;
use ugtrack::simulator::{parse_scenario, ScenarioConfig};
use ugtrack::TrackerConfig;

pub fn shipped_config() -> TrackerConfig {
    parse_config(include_str!("../../../config/default.conf"), "default.conf").expect("shipped config parses")
}

pub fn benchmark_scenes() -> Vec<ScenarioConfig> {
    parse_scenario(include_str!("../../../scenarios/benchmark.toml"), "benchmark.toml").expect("shipped scenario parses")
}
