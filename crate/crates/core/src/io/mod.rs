//! Config files, trace CSVs, SVG plots, shipped profiles and sweeps.

mod config;
mod run;
mod svg;
mod trace_file;

pub use config::{
    emit_config, parse_config, resolve_axis, OracleSpec, OutputSpec, References, RunConfig, Scenario, SweepSpec,
    SweepTarget, NUMERIC_KEYS,
};
pub use run::{
    profile, profile_text, run_scenario, single_mode_couplings, sweep, two_mode_couplings, RunOutput, PROFILES,
};
pub use svg::emit_svg;
pub use trace_file::{
    format_sci, from_trace_header, parse_sci, Column, PlotHint, Report, ReportRow, TraceFile, ARTIFACT_VERSION,
};
