//! Configuration, Monte Carlo sweep and result output.

mod config;
mod output;
mod sweep;

pub use config::{
    dbm_to_watts, load_config, load_config_str, parse_methods, parse_power_range, parse_se_mode, ConfigError,
    ScenarioConfig,
};
pub use output::{
    comparison_text, csv_string, emit_csv, emit_plot_data, method_series_text, parse_csv, parse_csv_str, sig9,
    write_csv, OutputError, CSV_HEADER,
};
pub use sweep::{
    mean_std, realization_rng, run_samples, run_sweep, RealizationDraw, SeRow, SweepContext, SweepError, SweepResult,
    SweepSamples, UeLabel,
};
