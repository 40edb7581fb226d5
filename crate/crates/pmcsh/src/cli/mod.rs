//! Scenario configuration, execution, sweeps, and report artifacts.

pub mod config;
pub mod run;

pub use config::{
    load_scenario, parse_config, parse_config_str, preset_text, ConfigError, ControlMode,
    Scenario, PRESET_NAMES,
};
pub use run::{
    execute_scenario, fmt_float, run_scenario, sweep, LinkReport, RunOutput, SweepAxis,
    SweepPoint,
};
