use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::{parse_config, RunConfig, Scenario, SweepTarget};
use super::svg::emit_svg;
use super::trace_file::{format_sci, Column, PlotHint, Report, ReportRow, TraceFile};
use crate::dynamics::{
    c_k0, entanglement_window, optimal_single_mode_squeezing, single_mode_trace, single_mode_variance,
    two_mode_trace, two_mode_variance_sum, DampingRegime, GridAxis, Instant, TwoModeEvaluator, WindowStatus,
    VACUUM_VARIANCE, VACUUM_VARIANCE_SUM,
};
use crate::error::{Error, Result};
use crate::fock_oracle::{
    evolve_single_mode, evolve_two_mode, odd_population, off_diagonal_population, quadrature_variance,
    quantized_pump_run, PumpCutoffs, NORM_TOLERANCE, TAIL_THRESHOLD,
};
use crate::lattice::{dispersion_compare, equilibrium_positions, hessian_modes, trap_for_central_spacing};
use crate::quantities::{
    phonon_frequency_scale, shifted_phonon_frequency, shifted_trap_frequency, single_mode_coupling_at,
    thermal_occupation, two_mode_coupling_at, validity_window, PhysicalConstants, Validity, UNIT_CONVENTION,
};

const SI: PhysicalConstants = PhysicalConstants::SI;

const FIG2: &str = "\
# Single molecule 2 um from the tip; cantilever driven at twice the shifted trap frequency.
scenario = single-mode
cantilever.omega_c = 4e6
cantilever.mass = 1e-16
cantilever.damping = 1
cantilever.dipole = 2.1e-23
cantilever.n_bar = 100
setup.distance = 2e-6
setup.trap_omega = 0
setup.trap_omega_shifted = 2e6
setup.spacing = 2e-7
coupling.override = 20.4
grid.axis = u
grid.min = 0
grid.max = 3
grid.points = 301
reference.coupling = 20.4
reference.omega_shifted = 2e6
reference.omega0 = 4e6
output.name = fig2
";

const FIG3: &str = "\
# Dipolar chain 2 um from the tip; cantilever resonant with the zone-edge phonon pair.
scenario = two-mode
cantilever.omega_c = 2e6
cantilever.mass = 1e-16
cantilever.damping = 1
cantilever.dipole = 2.1e-23
cantilever.n_bar = 100
setup.distance = 2e-6
setup.spacing = 2e-7
setup.count = 30
setup.phonon_omega_shifted = 1e6
coupling.override = 6.2
grid.axis = u
grid.min = 0
grid.max = 6
grid.points = 301
reference.coupling = 6.2
reference.omega0 = 4e6
output.name = fig3
";

const LATTICE_N30: &str = "\
# 30 molecules in a harmonic trap tuned to a 200 nm central spacing.
scenario = lattice
setup.count = 30
setup.spacing = 2e-7
setup.trap_omega = 0
output.name = lattice-n30
";

const ORACLE: &str = "\
# Truncated Fock-space evolution against the undamped closed forms.
scenario = oracle
coupling.override = 1
cantilever.damping = 0
grid.axis = u
grid.min = 0
grid.max = 1
grid.points = 11
oracle.n_max = 60
oracle.pair_n_max = 40
oracle.pump_occupations = 4, 9, 16
oracle.pump_u = 0.5
oracle.pump_points = 5
output.name = oracle
";

const WINDOW_VS_DAMPING: &str = "\
# Entanglement window of the fig3 pair as the damping grows past 2 C_k.
scenario = sweep
cantilever.omega_c = 2e6
cantilever.n_bar = 100
setup.spacing = 2e-7
setup.phonon_omega_shifted = 1e6
coupling.override = 6.2
sweep.axis = cantilever.damping
sweep.min = 0
sweep.max = 18.6
sweep.points = 187
sweep.target = two-mode
output.name = window-vs-damping
";

const COUPLING_VS_DISTANCE: &str = "\
# Single-molecule coupling with the shifted trap frequency recomputed at each distance.
scenario = sweep
cantilever.omega_c = 4e6
cantilever.n_bar = 100
sweep.axis = setup.distance
sweep.min = 1e-6
sweep.max = 4e-6
sweep.points = 31
sweep.target = single-mode
output.name = coupling-vs-distance
";

/// Shipped profiles: (name, description, config text).
pub const PROFILES: &[(&str, &str, &str)] = &[
    ("fig2", "single-molecule squeezing, C = 20.4 /s, D = 1 /s, with the D = 0 companion", FIG2),
    ("fig3", "two-mode variance sum, C_k = 6.2 /s, D = 1 /s, with the D = 0 companion", FIG3),
    ("lattice-n30", "equilibrium and normal modes of a 30-molecule chain", LATTICE_N30),
    ("oracle", "exact truncated Fock evolution and quantised-pump runs", ORACLE),
    ("window-vs-damping", "sweep of the two-mode entanglement window over D", WINDOW_VS_DAMPING),
    ("coupling-vs-distance", "sweep of the single-molecule coupling over R", COUPLING_VS_DISTANCE),
];

pub fn profile_text(name: &str) -> Result<&'static str> {
    PROFILES
        .iter()
        .find(|(n, _, _)| *n == name)
        .map(|(_, _, text)| *text)
        .ok_or_else(|| Error::validation(format!("unknown profile `{name}`")))
}

pub fn profile(name: &str) -> Result<RunConfig> {
    parse_config(profile_text(name)?)
}

/// Everything a run produces, before anything touches the filesystem.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunOutput {
    pub traces: Vec<TraceFile>,
    pub reports: Vec<Report>,
    /// (file name, document).
    pub svgs: Vec<(String, String)>,
    /// Some Fock run left more than the allowed probability near its cutoff.
    pub cutoff_limited: bool,
    /// Short human-readable lines for the terminal.
    pub summary: Vec<String>,
}

impl RunOutput {
    pub fn trace(&self, file_name: &str) -> Option<&TraceFile> {
        self.traces.iter().find(|t| t.file_name == file_name)
    }

    pub fn report(&self, file_name: &str) -> Option<&Report> {
        self.reports.iter().find(|r| r.file_name == file_name)
    }

    /// Writes every file into `dir`, creating it if needed.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut paths = Vec::new();
        for t in &self.traces {
            paths.push(t.write(dir)?);
        }
        for r in &self.reports {
            let p = dir.join(&r.file_name);
            std::fs::write(&p, r.render())?;
            paths.push(p);
        }
        for (name, doc) in &self.svgs {
            let p = dir.join(name);
            std::fs::write(&p, doc)?;
            paths.push(p);
        }
        Ok(paths)
    }
}

/// Runs the configured scenario.
pub fn run_scenario(cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let mut out = match cfg.scenario {
        Scenario::SingleMode => run_single_mode(cfg)?,
        Scenario::TwoMode => run_two_mode(cfg)?,
        Scenario::Lattice => run_lattice(cfg)?,
        Scenario::Oracle => run_oracle(cfg)?,
        Scenario::Sweep => sweep(cfg)?,
    };
    if cfg.output.svg {
        for t in out.traces.iter().filter(|t| t.plot.is_some()) {
            let name = t.file_name.trim_end_matches(".csv").to_string() + ".svg";
            out.svgs.push((name, emit_svg(t)?));
        }
    }
    Ok(out)
}

fn validity_code(v: Validity) -> usize {
    match v {
        Validity::Valid => 0,
        Validity::Marginal => 1,
        Validity::Violated => 2,
    }
}

fn common_notes(cfg: &RunConfig) -> Vec<String> {
    vec![
        format!("unit convention: {UNIT_CONVENTION}"),
        format!(
            "species {}: mass {} kg, dipole {} C m (pinned value, overridable)",
            cfg.species.name,
            format_sci(cfg.species.mass),
            format_sci(cfg.species.dipole)
        ),
        "reference values are worked-example figures; their source does not state the molecular dipole \
         moment or the bare trap frequency, so agreement is expected only in order of magnitude"
            .into(),
        "ratio = computed / reference".into(),
    ]
}

/// Single-mode couplings: (ω_t′ computed, ω_t′ used, C at computed ω_t′, C at used ω_t′, C fed to dynamics).
pub fn single_mode_couplings(cfg: &RunConfig) -> Result<(f64, f64, f64, f64, f64)> {
    let setup = cfg.single_setup()?;
    let omega_computed = shifted_trap_frequency(&SI, &setup, &cfg.cantilever);
    let omega_used = cfg.trap_omega_shifted.unwrap_or(omega_computed);
    let at = |w: f64| single_mode_coupling_at(&SI, &cfg.species, cfg.distance, &cfg.cantilever, w);
    let c_computed = at(omega_computed)?;
    let c_configured = at(omega_used)?;
    let used = cfg.coupling_override.unwrap_or(c_configured);
    Ok((omega_computed, omega_used, c_computed, c_configured, used))
}

fn run_single_mode(cfg: &RunConfig) -> Result<RunOutput> {
    let (omega_computed, omega_used, c_computed, c_configured, c) = single_mode_couplings(cfg)?;
    if c <= 0.0 {
        return Err(Error::validation("single-mode coupling is zero (no pump quanta or no tip dipole)"));
    }
    let d = cfg.cantilever.damping;
    let damped = single_mode_trace(c, d, &cfg.grid)?;
    let free = single_mode_trace(c, 0.0, &cfg.grid)?;
    let optimum = optimal_single_mode_squeezing(c, d)?;
    let window = validity_window(c, d)?;
    let name = cfg.name();

    let trace = TraceFile::new(
        format!("{name}.csv"),
        cfg,
        vec![
            Column::real("u", damped.points.iter().map(|p| p.u).collect()),
            Column::real("t_s", damped.points.iter().map(|p| p.t).collect()),
            Column::real("variance_D", damped.values()),
            Column::real("variance_D0", free.values()),
            Column::flag("validity_flag", damped.points.iter().map(|p| p.flag)),
        ],
    )
    .with_meta("coupling", format_sci(c))
    .with_meta("u_star", format_sci(optimum.u_star))
    .with_meta("min_variance", format_sci(optimum.min_variance))
    .with_meta(
        "threshold_crossings_t",
        damped.threshold_crossings.iter().map(|&t| format_sci(t)).collect::<Vec<_>>().join(" "),
    )
    .with_plot(PlotHint {
        x: "u".into(),
        solid: "variance_D".into(),
        dashed: "variance_D0".into(),
        threshold: VACUUM_VARIANCE,
        x_label: "squeezing parameter u".into(),
        y_label: "variance of x1".into(),
    });

    let setup = cfg.single_setup()?;
    let rf = &cfg.reference;
    let mut rows = vec![
        ReportRow::new("n_bar", "1", thermal_occupation(&SI, &cfg.cantilever)),
        ReportRow::new("trap_omega_shifted_computed", "rad/s", omega_computed)
            .against(rf.omega_shifted)
            .note(format!("from bare trap {} rad/s", format_sci(cfg.trap_omega))),
        ReportRow::new("trap_omega_shifted_used", "rad/s", omega_used).against(rf.omega_shifted),
        ReportRow::new("coupling_at_computed_omega", "1/s", c_computed).against(rf.coupling),
        ReportRow::new("coupling_at_used_omega", "1/s", c_configured).against(rf.coupling),
        ReportRow::new("coupling_used", "1/s", c)
            .against(rf.coupling)
            .note(if cfg.coupling_override.is_some() { "coupling.override" } else { "computed" }),
        ReportRow::new("omega0", "rad/s", phonon_frequency_scale(&SI, &cfg.species, cfg.spacing))
            .against(rf.omega0)
            .note(format!("at spacing {} m", format_sci(cfg.spacing))),
        ReportRow::new("cantilever_detuning", "rad/s", cfg.cantilever.omega_c - 2.0 * omega_used)
            .note("omega_c - 2 omega_t'"),
        ReportRow::new("hierarchy_ratio", "1", setup.hierarchy_ratio(&SI, &cfg.cantilever))
            .note(setup.hierarchy(&SI, &cfg.cantilever).as_str()),
        ReportRow::new("validity_t_min", "s", window.t_min),
        ReportRow::new("validity_t_max", "s", window.t_max),
        ReportRow::new("u_star", "1", optimum.u_star),
        ReportRow::new("t_star", "s", optimum.t_star),
        ReportRow::new("min_variance", "1", optimum.min_variance),
    ];
    rows.retain(|r| r.computed.is_finite() || r.quantity.starts_with("validity") || r.quantity.ends_with("star"));

    let summary = vec![
        format!("C = {c:.4} /s (computed {c_computed:.4} /s at omega_t' = {omega_computed:.4e} rad/s)"),
        format!("optimum u* = {:.4}, min variance {:.5}", optimum.u_star, optimum.min_variance),
    ];
    Ok(RunOutput {
        traces: vec![trace],
        reports: vec![Report { file_name: format!("{name}_constants.csv"), notes: common_notes(cfg), rows }],
        svgs: Vec::new(),
        cutoff_limited: false,
        summary,
    })
}

/// Two-mode couplings: (ω_k′ computed at the zone edge, |C_k| at it,
/// |C_k| at the configured ω_k′ if any, rate fed to the dynamics).
pub fn two_mode_couplings(cfg: &RunConfig) -> Result<(f64, f64, Option<f64>, f64)> {
    let cr = cfg.crystal_setup()?;
    let shift = shifted_phonon_frequency(&SI, &cr, &cfg.cantilever, cr.zone_edge())?;
    let at = |w: f64| two_mode_coupling_at(&SI, &cfg.species, cfg.distance, &cfg.cantilever, w);
    let computed = at(shift.shifted)?.rate();
    let configured = cfg.phonon_omega_shifted.map(at).transpose()?.map(|c| c.rate());
    let used = cfg.coupling_override.or(configured).unwrap_or(computed);
    Ok((shift.shifted, computed, configured, used))
}

fn run_two_mode(cfg: &RunConfig) -> Result<RunOutput> {
    let cr = cfg.crystal_setup()?;
    let k = cr.zone_edge();
    let shift = shifted_phonon_frequency(&SI, &cr, &cfg.cantilever, k)?;
    let signed = two_mode_coupling_at(&SI, &cfg.species, cfg.distance, &cfg.cantilever, shift.shifted)?;
    let (_, c_computed, c_configured, c_k) = two_mode_couplings(cfg)?;
    if c_k <= 0.0 {
        return Err(Error::validation("two-mode coupling is zero (no pump quanta or no tip dipole)"));
    }
    let d = cfg.cantilever.damping;
    let damped = two_mode_trace(c_k, d, &cfg.grid)?;
    let free = two_mode_trace(c_k, 0.0, &cfg.grid)?;
    let window = entanglement_window(c_k, d)?;
    let rate = c_k0(c_k, d)?;
    let name = cfg.name();

    let trace = TraceFile::new(
        format!("{name}.csv"),
        cfg,
        vec![
            Column::real("u", damped.points.iter().map(|p| p.u).collect()),
            Column::real("t_s", damped.points.iter().map(|p| p.t).collect()),
            Column::real("sum_D", damped.values()),
            Column::real("sum_D0", free.values()),
            Column::flag("entangled_flag", damped.points.iter().map(|p| p.flag)),
        ],
    )
    .with_meta("coupling", format_sci(c_k))
    .with_meta("c_k0", format_sci(rate.real()))
    .with_meta("t_s_refers_to", "damped curve; on a u grid the D = 0 curve uses t = u/(2 C_k)")
    .with_meta("window_status", format!("{:?}", window.status))
    .with_meta("window_t_enter", window.t_enter.map(format_sci).unwrap_or_default())
    .with_meta("window_t_exit", window.t_exit.map(format_sci).unwrap_or_default())
    .with_plot(PlotHint {
        x: "u".into(),
        solid: "sum_D".into(),
        dashed: "sum_D0".into(),
        threshold: VACUUM_VARIANCE_SUM,
        x_label: "squeezing parameter u".into(),
        y_label: "variance s1 + variance s2".into(),
    });

    let rf = &cfg.reference;
    let omega0 = phonon_frequency_scale(&SI, &cfg.species, cfg.spacing);
    let u_of = |t: Option<f64>| t.map(|t| 2.0 * rate.real() * t).unwrap_or(f64::NAN);
    let mut rows = vec![
        ReportRow::new("n_bar", "1", thermal_occupation(&SI, &cfg.cantilever)),
        ReportRow::new("omega0", "rad/s", omega0).against(rf.omega0).note(format!("at spacing {} m", format_sci(cfg.spacing))),
        ReportRow::new("omega_k_zone_edge", "rad/s", shift.omega),
        ReportRow::new("phonon_shift_relative", "1", shift.relative_shift).note(shift.status.as_str()),
        ReportRow::new("omega_k_shifted_computed", "rad/s", shift.shifted).against(rf.omega_shifted),
        ReportRow::new("c_k_prime_computed", "1/s", signed.c_k_prime),
        ReportRow::new("c_k_computed", "1/s", c_computed).against(rf.coupling).note("at computed omega_k'"),
    ];
    if let (Some(w), Some(ck)) = (cfg.phonon_omega_shifted, c_configured) {
        rows.push(ReportRow::new("omega_k_shifted_used", "rad/s", w).against(rf.omega_shifted));
        rows.push(ReportRow::new("c_k_at_used_omega", "1/s", ck).against(rf.coupling));
    }
    let omega_used = cfg.phonon_omega_shifted.unwrap_or(shift.shifted);
    rows.extend([
        ReportRow::new("c_k_used", "1/s", c_k)
            .against(rf.coupling)
            .note(if cfg.coupling_override.is_some() { "coupling.override" } else { "computed" }),
        ReportRow::new("c_k0", "1/s", rate.real()).note(format!("{:?}", rate.regime)),
        ReportRow::new("cantilever_detuning", "rad/s", cfg.cantilever.omega_c - 2.0 * omega_used)
            .note("omega_c - 2 omega_k'"),
        ReportRow::new("extent_ratio", "1", cr.extent_ratio()).note("N l / R"),
        ReportRow::new("displacement_ratio", "1", cr.displacement_ratio(&SI))
            .note(format!("x / l; crystal hierarchy {}", cr.hierarchy(&SI).as_str())),
        ReportRow::new("window_u_enter", "1", u_of(window.t_enter)),
        ReportRow::new("window_u_exit", "1", u_of(window.t_exit)).note(format!("{:?}", window.status)),
        ReportRow::new("min_sum_on_grid", "1", damped.min_value()),
    ]);

    let summary = vec![
        format!("C_k = {c_k:.4} /s (computed {c_computed:.4} /s at omega_k' = {:.4e} rad/s)", shift.shifted),
        format!("entanglement window {:?}: u in [{:.4}, {:.4}]", window.status, u_of(window.t_enter), u_of(window.t_exit)),
    ];
    Ok(RunOutput {
        traces: vec![trace],
        reports: vec![Report { file_name: format!("{name}_constants.csv"), notes: common_notes(cfg), rows }],
        svgs: Vec::new(),
        cutoff_limited: false,
        summary,
    })
}

fn run_lattice(cfg: &RunConfig) -> Result<RunOutput> {
    let trap = if cfg.trap_omega > 0.0 {
        cfg.trap_omega
    } else {
        trap_for_central_spacing(&SI, cfg.count, &cfg.species, cfg.spacing)?
    };
    let chain = equilibrium_positions(&SI, cfg.count, &cfg.species, trap)?;
    let spectrum = hessian_modes(&SI, &chain)?;
    let report = dispersion_compare(&SI, &spectrum, &chain);
    let name = cfg.name();

    let n = chain.len();
    let gaps = chain.spacings();
    let positions = TraceFile::new(
        format!("{name}_positions.csv"),
        cfg,
        vec![
            Column::integer("index", 0..n),
            Column::real("x_m", chain.positions.clone()),
            Column::real("gap_to_next_m", (0..n).map(|i| gaps.get(i).copied().unwrap_or(f64::NAN)).collect()),
        ],
    )
    .with_meta("trap_omega", format_sci(trap))
    .with_meta("central_spacing", format_sci(chain.central_spacing()))
    .with_meta("gradient_norm", format_sci(chain.gradient_norm))
    .with_meta("iterations", chain.iterations.to_string());

    let m = &report.modes;
    let modes = TraceFile::new(
        format!("{name}_modes.csv"),
        cfg,
        vec![
            Column::integer("index", m.iter().map(|c| c.index)),
            Column::real("omega", m.iter().map(|c| c.omega_numeric).collect()),
            Column::real("k_eff", m.iter().map(|c| c.k_eff).collect()),
            Column::real("kl", m.iter().map(|c| c.k_eff * report.spacing).collect()),
            Column::integer("sign_changes", spectrum.sign_changes.iter().copied()),
            Column::real("central_weight", spectrum.central_weight.clone()),
            Column::real("omega_formula", m.iter().map(|c| c.omega_formula).collect()),
            Column::real("rel_error", m.iter().map(|c| c.rel_error).collect()),
            Column::real("omega_lattice_sum", m.iter().map(|c| c.omega_lattice_sum).collect()),
            Column::real("rel_error_lattice_sum", m.iter().map(|c| c.rel_error_lattice_sum).collect()),
            Column::flag("included", m.iter().map(|c| c.included)),
            Column::flag("upper_half", m.iter().map(|c| c.upper_half)),
        ],
    )
    .with_meta("omega0", format_sci(report.omega0))
    .with_meta("spacing", format_sci(report.spacing))
    .with_meta("max_upper_error", format_sci(report.max_upper_error()))
    .with_meta("max_upper_error_lattice_sum", format_sci(report.max_upper_error_lattice_sum()))
    .with_meta("upper_modes", report.upper_count().to_string());

    let summary = vec![
        format!("N = {n}, trap {trap:.4e} rad/s, central spacing {:.4e} m", chain.central_spacing()),
        format!(
            "upper half-band: max error {:.2}% vs 2 omega0 |sin(kl/2)|, {:.2}% vs all-pairs lattice sum ({} modes)",
            100.0 * report.max_upper_error(),
            100.0 * report.max_upper_error_lattice_sum(),
            report.upper_count()
        ),
    ];
    Ok(RunOutput { traces: vec![positions, modes], summary, ..Default::default() })
}

struct OraclePoint {
    u: f64,
    t: f64,
    fock_variance: f64,
    fock_sum: f64,
    odd: f64,
    off_diagonal: f64,
    norm_deficit: f64,
    tail: f64,
}

fn run_oracle(cfg: &RunConfig) -> Result<RunOutput> {
    let c = match cfg.coupling_override {
        Some(c) => c,
        None => single_mode_couplings(cfg)?.4,
    };
    if c <= 0.0 {
        return Err(Error::validation("oracle needs a positive coupling"));
    }
    let o = &cfg.oracle;
    let grid = cfg.grid.values();
    let points = grid
        .par_iter()
        .map(|&v| -> Result<OraclePoint> {
            let (t, u) = match cfg.grid.axis {
                GridAxis::U => (v / (2.0 * c), v),
                GridAxis::T => (v, 2.0 * c * v),
            };
            let single = evolve_single_mode(c, t, o.n_max)?;
            let pair = evolve_two_mode(c, t, o.pair_n_max)?;
            Ok(OraclePoint {
                u,
                t,
                fock_variance: quadrature_variance(&single).total(),
                fock_sum: quadrature_variance(&pair).total(),
                odd: odd_population(&single),
                off_diagonal: off_diagonal_population(&pair),
                norm_deficit: single.norm_deficit.max(pair.norm_deficit),
                tail: single.tail_mass.max(pair.tail_mass),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if let Some(p) = points.iter().find(|p| p.norm_deficit > NORM_TOLERANCE) {
        return Err(Error::StepControl { t: p.t, reason: "Fock propagation lost norm beyond tolerance" });
    }
    let closed_sum = points
        .iter()
        .map(|p| two_mode_variance_sum(c, 0.0, Instant::Time(p.t)).map(|q| q.sum))
        .collect::<Result<Vec<_>>>()?;
    let closed_var = points
        .iter()
        .map(|p| single_mode_variance(c, 0.0, Instant::Time(p.t)).map(|q| q.variance))
        .collect::<Result<Vec<_>>>()?;
    let name = cfg.name();
    let mut cutoff_limited = points.iter().any(|p| p.tail >= TAIL_THRESHOLD);

    let fock = TraceFile::new(
        format!("{name}.csv"),
        cfg,
        vec![
            Column::real("u", points.iter().map(|p| p.u).collect()),
            Column::real("t_s", points.iter().map(|p| p.t).collect()),
            Column::real("fock_variance", points.iter().map(|p| p.fock_variance).collect()),
            Column::real("closed_variance", closed_var),
            Column::real("fock_sum", points.iter().map(|p| p.fock_sum).collect()),
            Column::real("closed_sum_D0", closed_sum),
            Column::real("squeezed_vacuum_sum", points.iter().map(|p| 2.0 * (-p.u).exp()).collect()),
            Column::real("odd_population", points.iter().map(|p| p.odd).collect()),
            Column::real("off_diagonal_population", points.iter().map(|p| p.off_diagonal).collect()),
            Column::real("norm_deficit", points.iter().map(|p| p.norm_deficit).collect()),
            Column::real("tail_mass", points.iter().map(|p| p.tail).collect()),
        ],
    )
    .with_meta("coupling", format_sci(c));

    let max_n = o.pump_occupations.iter().copied().fold(0.0, f64::max);
    let cutoffs = PumpCutoffs::for_occupation(max_n);
    let us: Vec<f64> = (0..=o.pump_points).map(|i| o.pump_u * i as f64 / o.pump_points as f64).collect();
    let times: Vec<f64> = us.iter().map(|u| u / (2.0 * c)).collect();
    let runs = o
        .pump_occupations
        .par_iter()
        .map(|&n| quantized_pump_run(c / n.sqrt(), n.sqrt(), &times, cutoffs))
        .collect::<Result<Vec<_>>>()?;
    let mut cols: [Vec<f64>; 8] = Default::default();
    let mut drift = Vec::new();
    for (run, &n) in runs.iter().zip(&o.pump_occupations) {
        if run.norm_deficit > NORM_TOLERANCE {
            return Err(Error::StepControl { t: *times.last().unwrap_or(&0.0), reason: "pump run lost norm beyond tolerance" });
        }
        cutoff_limited |= run.cutoff_limited();
        drift.push(format!("{}:{}", n, format_sci(run.conserved_drift)));
        for (i, &u) in us.iter().enumerate() {
            let classical = 0.25 * (-2.0 * u).exp();
            let row = [
                n,
                u,
                times[i],
                run.variances[i],
                classical,
                (run.variances[i] - classical).abs() / classical,
                run.pump_occupation[i],
                run.molecule_occupation[i],
            ];
            for (col, v) in cols.iter_mut().zip(row) {
                col.push(v);
            }
        }
    }
    let [n_col, u_col, t_col, vq, vc, dev, pump_occ, mol_occ] = cols;
    let pump = TraceFile::new(
        format!("{name}_pump.csv"),
        cfg,
        vec![
            Column::real("n_bar", n_col),
            Column::real("u", u_col),
            Column::real("t_s", t_col),
            Column::real("variance_quantum", vq),
            Column::real("variance_classical", vc),
            Column::real("rel_deviation", dev),
            Column::real("pump_occupation", pump_occ),
            Column::real("molecule_occupation", mol_occ),
        ],
    )
    .with_meta("conserved_drift", drift.join(" "))
    .with_meta("pump_cutoff", cutoffs.pump.to_string())
    .with_meta("molecule_cutoff", cutoffs.molecule.to_string());

    let last = points.last().expect("grid has at least two points");
    let summary = vec![
        format!(
            "u = {:.3}: Fock variance {:.6} vs closed {:.6}; Fock pair sum {:.6} vs closed D = 0 sum {:.6}",
            last.u,
            last.fock_variance,
            0.25 * (-2.0 * last.u).exp(),
            last.fock_sum,
            fock.column("closed_sum_D0").map_or(f64::NAN, |c| c[c.len() - 1])
        ),
        format!("cutoff limited: {cutoff_limited}"),
    ];
    Ok(RunOutput { traces: vec![fock, pump], cutoff_limited, summary, ..Default::default() })
}

impl SweepTarget {
    /// Default observables for a config's scenario.
    pub fn for_scenario(s: Scenario) -> Self {
        if s == Scenario::TwoMode {
            SweepTarget::TwoMode
        } else {
            SweepTarget::SingleMode
        }
    }
}

fn window_code(s: WindowStatus) -> usize {
    match s {
        WindowStatus::Bounded => 0,
        WindowStatus::OpenEnded => 1,
        WindowStatus::Empty => 2,
    }
}

fn single_mode_row(cfg: &RunConfig) -> Result<Vec<f64>> {
    let (_, _, _, _, c) = single_mode_couplings(cfg)?;
    let d = cfg.cantilever.damping;
    let opt = optimal_single_mode_squeezing(c, d)?;
    let w = validity_window(c, d)?;
    let hierarchy = cfg.single_setup()?.hierarchy(&SI, &cfg.cantilever);
    Ok(vec![
        c,
        opt.u_star,
        opt.t_star,
        opt.min_variance,
        w.t_min,
        w.t_max,
        if w.is_empty() { 1.0 } else { 0.0 },
        validity_code(hierarchy) as f64,
    ])
}

const SINGLE_COLUMNS: &[&str] =
    &["coupling", "u_star", "t_star", "min_variance", "window_t_min", "window_t_max", "window_empty", "hierarchy"];
const TWO_COLUMNS: &[&str] =
    &["c_k", "c_k0", "regime", "window_status", "t_enter", "t_exit", "u_enter", "u_exit", "min_sum", "u_at_min"];
const INTEGER_COLUMNS: &[&str] = &["window_empty", "hierarchy", "regime", "window_status"];

const MIN_SCAN_POINTS: usize = 2000;
const MIN_SCAN_U: f64 = 12.0;

fn two_mode_row(cfg: &RunConfig) -> Result<Vec<f64>> {
    let (_, _, _, c_k) = two_mode_couplings(cfg)?;
    let d = cfg.cantilever.damping;
    let rate = c_k0(c_k, d)?;
    let regime = match rate.regime {
        DampingRegime::Underdamped => 0.0,
        DampingRegime::Critical => 1.0,
        DampingRegime::Overdamped => 2.0,
    };
    let w = entanglement_window(c_k, d)?;
    let r = 2.0 * rate.real();
    let u_of = |t: Option<f64>| match (t, rate.regime) {
        (Some(t), DampingRegime::Underdamped) => r * t,
        _ => f64::NAN,
    };
    let (min_sum, u_at_min) = if rate.regime == DampingRegime::Overdamped {
        (f64::NAN, f64::NAN)
    } else {
        let ev = TwoModeEvaluator::new(c_k, d)?;
        let horizon = MIN_SCAN_U / r.max(0.5 * d);
        let times: Vec<f64> = (0..=MIN_SCAN_POINTS).map(|i| horizon * i as f64 / MIN_SCAN_POINTS as f64).collect();
        let pts = ev.at_times(&times)?;
        let best = pts.iter().min_by(|a, b| a.sum.total_cmp(&b.sum)).expect("non-empty scan");
        (best.sum, if r > 0.0 { r * best.t } else { f64::NAN })
    };
    Ok(vec![
        c_k,
        if rate.regime == DampingRegime::Overdamped { f64::NAN } else { rate.real() },
        regime,
        window_code(w.status) as f64,
        w.t_enter.unwrap_or(f64::NAN),
        w.t_exit.unwrap_or(f64::NAN),
        u_of(w.t_enter),
        u_of(w.t_exit),
        min_sum,
        u_at_min,
    ])
}

/// One row of summary observables per axis value, evaluated concurrently
/// and emitted in axis order.
pub fn sweep(cfg: &RunConfig) -> Result<RunOutput> {
    let spec = cfg.sweep.as_ref().ok_or_else(|| Error::validation("config has no sweep axis"))?;
    let n = spec.points - 1;
    let values: Vec<f64> = (0..=n)
        .map(|i| if i == n { spec.max } else { spec.min + (spec.max - spec.min) * i as f64 / n as f64 })
        .collect();
    let rows = values
        .par_iter()
        .map(|&v| {
            let point = cfg.with_number(&spec.axis, v)?;
            match spec.target {
                SweepTarget::SingleMode => single_mode_row(&point),
                SweepTarget::TwoMode => two_mode_row(&point),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let names = match spec.target {
        SweepTarget::SingleMode => SINGLE_COLUMNS,
        SweepTarget::TwoMode => TWO_COLUMNS,
    };
    let mut columns = vec![Column::real(&spec.axis, values.clone())];
    for (j, &col) in names.iter().enumerate() {
        let vals: Vec<f64> = rows.iter().map(|r| r[j]).collect();
        columns.push(Column { name: col.into(), values: vals, integer: INTEGER_COLUMNS.contains(&col) });
    }
    let name = cfg.name();
    let trace = TraceFile::new(format!("{name}_sweep.csv"), cfg, columns)
        .with_meta("codes", "regime 0/1/2 = under/critical/over; window_status 0/1/2 = bounded/open/empty; hierarchy 0/1/2 = valid/marginal/violated");
    let summary = vec![format!("{} rows over {} in [{}, {}]", values.len(), spec.axis, spec.min, spec.max)];
    Ok(RunOutput { traces: vec![trace], summary, ..Default::default() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_profile_parses() {
        for (name, _, _) in PROFILES {
            let cfg = profile(name).unwrap();
            assert_eq!(cfg.name(), *name);
        }
        assert!(profile("nope").is_err());
    }

    #[test]
    fn fig2_columns() {
        let out = run_scenario(&profile("fig2").unwrap()).unwrap();
        let t = out.trace("fig2.csv").unwrap();
        let names: Vec<&str> = t.columns.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, ["u", "t_s", "variance_D", "variance_D0", "validity_flag"]);
        assert_eq!(t.rows(), 301);
        assert!(out.report("fig2_constants.csv").is_some());
    }

    #[test]
    fn sweep_rows_in_axis_order() {
        let mut cfg = profile("coupling-vs-distance").unwrap();
        cfg.sweep.as_mut().unwrap().points = 5;
        let out = sweep(&cfg).unwrap();
        let t = &out.traces[0];
        let axis = t.column("setup.distance").unwrap();
        assert!(axis.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(axis[4], 4e-6);
    }
}
