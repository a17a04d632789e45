//! Configuration, Monte Carlo sweeps and result emission.

pub mod config;
pub mod emit;
pub mod scenario;
pub mod sweep;

pub use config::{load_config, parse_config, DesignSpec, Preset, ScenarioConfig, SweepAxis, RECIPES};
pub use emit::{emit_results, Format};
pub use sweep::{run_sweep, SweepResult};
