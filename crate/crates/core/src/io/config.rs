use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use crate::dynamics::{Grid, GridAxis};
use crate::error::{Error, Result};
use crate::fock_oracle::{DEFAULT_SINGLE_CUTOFF, DEFAULT_TWO_MODE_CUTOFF};
use crate::quantities::{CantileverParams, CrystalSetup, MoleculeSpecies, Occupation, SingleMoleculeSetup};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    SingleMode,
    TwoMode,
    Lattice,
    Oracle,
    Sweep,
}

impl Scenario {
    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::SingleMode => "single-mode",
            Scenario::TwoMode => "two-mode",
            Scenario::Lattice => "lattice",
            Scenario::Oracle => "oracle",
            Scenario::Sweep => "sweep",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "single-mode" => Scenario::SingleMode,
            "two-mode" => Scenario::TwoMode,
            "lattice" => Scenario::Lattice,
            "oracle" => Scenario::Oracle,
            "sweep" => Scenario::Sweep,
            _ => return None,
        })
    }
}

/// Which observables a sweep reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepTarget {
    SingleMode,
    TwoMode,
}

impl SweepTarget {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepTarget::SingleMode => "single-mode",
            SweepTarget::TwoMode => "two-mode",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// Full config key of the swept parameter.
    pub axis: String,
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub target: SweepTarget,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSpec {
    pub n_max: usize,
    pub pair_n_max: usize,
    /// N̄ values for the quantised-pump comparison.
    pub pump_occupations: Vec<f64>,
    /// Final u = 2g·sqrt(N̄)·t of the pump runs.
    pub pump_u: f64,
    pub pump_points: usize,
}

impl Default for OracleSpec {
    fn default() -> Self {
        OracleSpec {
            n_max: DEFAULT_SINGLE_CUTOFF,
            pair_n_max: DEFAULT_TWO_MODE_CUTOFF,
            pump_occupations: vec![4.0, 9.0, 16.0],
            pump_u: 0.5,
            pump_points: 6,
        }
    }
}

/// Reference values that computed quantities are compared against.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct References {
    pub coupling: Option<f64>,
    pub omega_shifted: Option<f64>,
    pub omega0: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OutputSpec {
    pub dir: Option<PathBuf>,
    pub svg: bool,
    pub name: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub cantilever: CantileverParams,
    pub species: MoleculeSpecies,
    /// Tip–molecule (or tip–chain) distance R (m).
    pub distance: f64,
    /// Bare trap frequency ω_t (rad/s).
    pub trap_omega: f64,
    /// Use this ω_t′ instead of deriving it from ω_t.
    pub trap_omega_shifted: Option<f64>,
    pub spacing: f64,
    pub count: usize,
    /// Use this ω_k′ instead of deriving it at the zone edge.
    pub phonon_omega_shifted: Option<f64>,
    /// Rate fed to the dynamics instead of the computed C or |C_k|.
    pub coupling_override: Option<f64>,
    pub grid: Grid,
    pub sweep: Option<SweepSpec>,
    pub oracle: OracleSpec,
    pub reference: References,
    pub output: OutputSpec,
}

impl RunConfig {
    pub fn single_setup(&self) -> Result<SingleMoleculeSetup> {
        SingleMoleculeSetup::new(self.species.clone(), self.trap_omega, self.distance)
    }

    pub fn crystal_setup(&self) -> Result<CrystalSetup> {
        CrystalSetup::new(self.species.clone(), self.spacing, self.count, self.distance, self.trap_omega)
    }

    /// Base name for output files.
    pub fn name(&self) -> String {
        self.output.name.clone().unwrap_or_else(|| self.scenario.as_str().to_string())
    }

    pub fn validate(&self) -> Result<()> {
        self.cantilever.validate()?;
        self.species.validate()?;
        self.grid.validate()?;
        positive("setup.distance", self.distance)?;
        positive("setup.spacing", self.spacing)?;
        if !(self.trap_omega.is_finite() && self.trap_omega >= 0.0) {
            return Err(Error::validation("setup.trap_omega must be finite and >= 0"));
        }
        for (key, v) in [
            ("setup.trap_omega_shifted", self.trap_omega_shifted),
            ("setup.phonon_omega_shifted", self.phonon_omega_shifted),
            ("coupling.override", self.coupling_override),
        ] {
            if let Some(v) = v {
                positive(key, v)?;
            }
        }
        if self.count < 1 {
            return Err(Error::validation("setup.count must be at least 1"));
        }
        if self.oracle.n_max < 2 || self.oracle.pair_n_max < 1 {
            return Err(Error::validation("oracle cutoffs too small"));
        }
        if self.oracle.pump_points < 1 || !(self.oracle.pump_u.is_finite() && self.oracle.pump_u > 0.0) {
            return Err(Error::validation("oracle.pump_u must be > 0 and oracle.pump_points >= 1"));
        }
        if self.oracle.pump_occupations.iter().any(|&n| !(n.is_finite() && n > 0.0)) {
            return Err(Error::validation("oracle.pump_occupations must all be > 0"));
        }
        match (&self.sweep, self.scenario) {
            (None, Scenario::Sweep) => return Err(Error::validation("sweep scenario needs sweep.axis")),
            (Some(s), _) => {
                if !NUMERIC_KEYS.contains(&s.axis.as_str()) {
                    return Err(Error::validation(format!("sweep axis `{}` is not a numeric parameter", s.axis)));
                }
                if s.points < 2 {
                    return Err(Error::validation("sweep.points must be at least 2"));
                }
                if !(s.min.is_finite() && s.max.is_finite() && s.min < s.max) {
                    return Err(Error::validation("sweep range must be finite and ordered"));
                }
            }
            _ => {}
        }
        if let Some(name) = &self.output.name {
            if name.is_empty() || name.contains(['/', '\\']) {
                return Err(Error::validation("output.name must be a plain file stem"));
            }
        }
        Ok(())
    }

    /// Returns a copy with the numeric parameter `key` set to `value`.
    pub fn with_number(&self, key: &str, value: f64) -> Result<RunConfig> {
        let key = resolve_axis(key)?;
        let mut entries = self.entries();
        if key == "setup.count" {
            if value.fract() != 0.0 || value < 1.0 {
                return Err(Error::validation(format!("setup.count must be a positive integer (got {value})")));
            }
            entries.insert(key.to_string(), format!("{}", value as usize));
        } else {
            entries.insert(key.to_string(), format!("{value:e}"));
        }
        if key == "cantilever.n_bar" {
            entries.remove("cantilever.temperature");
        } else if key == "cantilever.temperature" {
            entries.remove("cantilever.n_bar");
        }
        let text: String = entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
        parse_config(&text)
    }

    /// Current value of a numeric parameter.
    pub fn number(&self, key: &str) -> Result<f64> {
        let key = resolve_axis(key)?;
        let entries = self.entries();
        match entries.get(key) {
            Some(v) => v.parse::<f64>().map_err(|_| Error::validation(format!("`{key}` is not numeric"))),
            None => Ok(f64::NAN),
        }
    }

    fn entries(&self) -> BTreeMap<String, String> {
        emit_pairs(self, true).into_iter().collect()
    }
}

/// Keys a sweep may vary.
pub const NUMERIC_KEYS: &[&str] = &[
    "cantilever.omega_c",
    "cantilever.mass",
    "cantilever.damping",
    "cantilever.dipole",
    "cantilever.n_bar",
    "cantilever.temperature",
    "species.mass",
    "species.dipole",
    "setup.distance",
    "setup.trap_omega",
    "setup.trap_omega_shifted",
    "setup.spacing",
    "setup.count",
    "setup.phonon_omega_shifted",
    "coupling.override",
];

/// Maps short axis names (R, D, N_bar, ...) to config keys.
pub fn resolve_axis(name: &str) -> Result<&'static str> {
    let alias = match name {
        "R" | "distance" => "setup.distance",
        "D" | "damping" => "cantilever.damping",
        "N_bar" | "n_bar" | "N" => "cantilever.n_bar",
        "T_c" | "temperature" => "cantilever.temperature",
        "omega_c" => "cantilever.omega_c",
        "m_c" => "cantilever.mass",
        "d_c" => "cantilever.dipole",
        "d_m" => "species.dipole",
        "l" | "spacing" => "setup.spacing",
        "omega_t" => "setup.trap_omega",
        "C" | "C_k" => "coupling.override",
        other => other,
    };
    NUMERIC_KEYS
        .iter()
        .find(|&&k| k == alias)
        .copied()
        .ok_or_else(|| Error::UnknownKey(name.to_string()))
}

fn positive(key: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::validation(format!("{key} must be finite and > 0 (got {v})")))
    }
}

struct Entry {
    line: usize,
    value: String,
}

struct Fields(BTreeMap<String, Entry>);

impl Fields {
    fn take_str(&mut self, key: &str) -> Option<(usize, String)> {
        self.0.remove(key).map(|e| (e.line, e.value))
    }

    fn take_f64(&mut self, key: &str) -> Result<Option<f64>> {
        match self.take_str(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse::<f64>()
                .map(Some)
                .map_err(|_| Error::Parse { line, message: format!("`{key}` expects a number, got `{v}`") }),
        }
    }

    fn f64_or(&mut self, key: &str, default: f64) -> Result<f64> {
        Ok(self.take_f64(key)?.unwrap_or(default))
    }

    fn take_usize(&mut self, key: &str) -> Result<Option<usize>> {
        match self.take_str(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse::<usize>()
                .map(Some)
                .map_err(|_| Error::Parse { line, message: format!("`{key}` expects a non-negative integer, got `{v}`") }),
        }
    }

    fn usize_or(&mut self, key: &str, default: usize) -> Result<usize> {
        Ok(self.take_usize(key)?.unwrap_or(default))
    }

    fn take_bool(&mut self, key: &str) -> Result<Option<bool>> {
        match self.take_str(key) {
            None => Ok(None),
            Some((_, v)) if v == "true" => Ok(Some(true)),
            Some((_, v)) if v == "false" => Ok(Some(false)),
            Some((line, v)) => Err(Error::Parse { line, message: format!("`{key}` expects true or false, got `{v}`") }),
        }
    }

    fn take_list(&mut self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.take_str(key) {
            None => Ok(None),
            Some((line, v)) => v
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Parse { line, message: format!("`{key}` expects numbers, got `{s}`") })
                })
                .collect::<Result<Vec<_>>>()
                .map(Some),
        }
    }
}

/// Parses the flat `section.key = value` format. `#` starts a comment.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(Error::Parse { line, message: format!("expected `key = value`, got `{content}`") });
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(Error::Parse { line, message: "empty key".into() });
        }
        if map.insert(key.to_string(), Entry { line, value: value.to_string() }).is_some() {
            return Err(Error::Parse { line, message: format!("duplicate key `{key}`") });
        }
    }
    let mut f = Fields(map);

    let scenario = match f.take_str("scenario") {
        None => return Err(Error::validation("scenario is missing")),
        Some((_, s)) if s.is_empty() => return Err(Error::validation("scenario is empty")),
        Some((line, s)) => Scenario::parse(&s).ok_or_else(|| Error::Parse {
            line,
            message: format!("unknown scenario `{s}` (expected single-mode, two-mode, lattice, oracle or sweep)"),
        })?,
    };

    let n_bar = f.take_f64("cantilever.n_bar")?;
    let temperature = f.take_f64("cantilever.temperature")?;
    let occupation = match (n_bar, temperature) {
        (Some(_), Some(_)) => {
            return Err(Error::validation("give either cantilever.n_bar or cantilever.temperature, not both"))
        }
        (_, Some(t)) => Occupation::Temperature(t),
        (n, None) => Occupation::Quanta(n.unwrap_or(100.0)),
    };
    let cantilever = CantileverParams {
        omega_c: f.f64_or("cantilever.omega_c", 4.0e6)?,
        mass: f.f64_or("cantilever.mass", 1.0e-16)?,
        damping: f.f64_or("cantilever.damping", 1.0)?,
        dipole: f.f64_or("cantilever.dipole", 2.1e-23)?,
        occupation,
    };

    let default_species = MoleculeSpecies::strontium_oxide();
    let species = MoleculeSpecies {
        name: f.take_str("species.name").map(|(_, s)| s).unwrap_or(default_species.name),
        mass: f.f64_or("species.mass", default_species.mass)?,
        dipole: f.f64_or("species.dipole", default_species.dipole)?,
    };

    let distance = f.f64_or("setup.distance", 2.0e-6)?;
    let trap_omega = f.f64_or("setup.trap_omega", 0.0)?;
    let trap_omega_shifted = f.take_f64("setup.trap_omega_shifted")?;
    let spacing = f.f64_or("setup.spacing", 200e-9)?;
    let count = f.usize_or("setup.count", 30)?;
    let phonon_omega_shifted = f.take_f64("setup.phonon_omega_shifted")?;
    let coupling_override = f.take_f64("coupling.override")?;

    let axis = match f.take_str("grid.axis") {
        None => GridAxis::U,
        Some((_, a)) if a == "u" => GridAxis::U,
        Some((_, a)) if a == "t" => GridAxis::T,
        Some((line, a)) => return Err(Error::Parse { line, message: format!("grid.axis must be u or t, got `{a}`") }),
    };
    let grid = Grid {
        axis,
        min: f.f64_or("grid.min", 0.0)?,
        max: f.f64_or("grid.max", 3.0)?,
        points: f.usize_or("grid.points", 301)?,
    };

    let sweep_axis = f.take_str("sweep.axis");
    let sweep_min = f.take_f64("sweep.min")?;
    let sweep_max = f.take_f64("sweep.max")?;
    let sweep_points = f.take_usize("sweep.points")?;
    let sweep_target = match f.take_str("sweep.target") {
        None => SweepTarget::SingleMode,
        Some((_, t)) if t == "single-mode" => SweepTarget::SingleMode,
        Some((_, t)) if t == "two-mode" => SweepTarget::TwoMode,
        Some((line, t)) => {
            return Err(Error::Parse { line, message: format!("sweep.target must be single-mode or two-mode, got `{t}`") })
        }
    };
    let sweep = match sweep_axis {
        None => None,
        Some((_, axis)) => Some(SweepSpec {
            axis: resolve_axis(&axis)?.to_string(),
            min: sweep_min.ok_or_else(|| Error::validation("sweep.min is missing"))?,
            max: sweep_max.ok_or_else(|| Error::validation("sweep.max is missing"))?,
            points: sweep_points.ok_or_else(|| Error::validation("sweep.points is missing"))?,
            target: sweep_target,
        }),
    };

    let d = OracleSpec::default();
    let oracle = OracleSpec {
        n_max: f.usize_or("oracle.n_max", d.n_max)?,
        pair_n_max: f.usize_or("oracle.pair_n_max", d.pair_n_max)?,
        pump_occupations: f.take_list("oracle.pump_occupations")?.unwrap_or(d.pump_occupations),
        pump_u: f.f64_or("oracle.pump_u", d.pump_u)?,
        pump_points: f.usize_or("oracle.pump_points", d.pump_points)?,
    };

    let reference = References {
        coupling: f.take_f64("reference.coupling")?,
        omega_shifted: f.take_f64("reference.omega_shifted")?,
        omega0: f.take_f64("reference.omega0")?,
    };

    let output = OutputSpec {
        dir: f.take_str("output.dir").map(|(_, s)| PathBuf::from(s)),
        svg: f.take_bool("output.svg")?.unwrap_or(false),
        name: f.take_str("output.name").map(|(_, s)| s),
    };

    if let Some(key) = f.0.keys().next() {
        return Err(Error::UnknownKey(key.clone()));
    }

    let config = RunConfig {
        scenario,
        cantilever,
        species,
        distance,
        trap_omega,
        trap_omega_shifted,
        spacing,
        count,
        phonon_omega_shifted,
        coupling_override,
        grid,
        sweep,
        oracle,
        reference,
        output,
    };
    config.validate()?;
    Ok(config)
}

fn num(v: f64) -> String {
    format!("{v:e}")
}

/// Key/value pairs in emission order. Output keys are optional so that
/// trace headers carry only the parameters that determine the data.
pub(crate) fn emit_pairs(c: &RunConfig, with_output: bool) -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = Vec::new();
    let mut put = |k: &str, v: String| out.push((k.to_string(), v));
    put("scenario", c.scenario.as_str().into());
    put("cantilever.omega_c", num(c.cantilever.omega_c));
    put("cantilever.mass", num(c.cantilever.mass));
    put("cantilever.damping", num(c.cantilever.damping));
    put("cantilever.dipole", num(c.cantilever.dipole));
    match c.cantilever.occupation {
        Occupation::Quanta(n) => put("cantilever.n_bar", num(n)),
        Occupation::Temperature(t) => put("cantilever.temperature", num(t)),
    }
    put("species.name", c.species.name.clone());
    put("species.mass", num(c.species.mass));
    put("species.dipole", num(c.species.dipole));
    put("setup.distance", num(c.distance));
    put("setup.trap_omega", num(c.trap_omega));
    if let Some(v) = c.trap_omega_shifted {
        put("setup.trap_omega_shifted", num(v));
    }
    put("setup.spacing", num(c.spacing));
    put("setup.count", c.count.to_string());
    if let Some(v) = c.phonon_omega_shifted {
        put("setup.phonon_omega_shifted", num(v));
    }
    if let Some(v) = c.coupling_override {
        put("coupling.override", num(v));
    }
    put("grid.axis", c.grid.axis.as_str().into());
    put("grid.min", num(c.grid.min));
    put("grid.max", num(c.grid.max));
    put("grid.points", c.grid.points.to_string());
    if let Some(s) = &c.sweep {
        put("sweep.axis", s.axis.clone());
        put("sweep.min", num(s.min));
        put("sweep.max", num(s.max));
        put("sweep.points", s.points.to_string());
        put("sweep.target", s.target.as_str().into());
    }
    put("oracle.n_max", c.oracle.n_max.to_string());
    put("oracle.pair_n_max", c.oracle.pair_n_max.to_string());
    put(
        "oracle.pump_occupations",
        c.oracle.pump_occupations.iter().map(|&v| num(v)).collect::<Vec<_>>().join(", "),
    );
    put("oracle.pump_u", num(c.oracle.pump_u));
    put("oracle.pump_points", c.oracle.pump_points.to_string());
    for (k, v) in [
        ("reference.coupling", c.reference.coupling),
        ("reference.omega_shifted", c.reference.omega_shifted),
        ("reference.omega0", c.reference.omega0),
    ] {
        if let Some(v) = v {
            put(k, num(v));
        }
    }
    if with_output {
        if let Some(dir) = &c.output.dir {
            put("output.dir", dir.display().to_string());
        }
        put("output.svg", c.output.svg.to_string());
        if let Some(name) = &c.output.name {
            put("output.name", name.clone());
        }
    }
    out
}

/// Serialises a config so that `parse_config(&emit_config(c)) == c`.
pub fn emit_config(c: &RunConfig) -> String {
    let mut s = String::new();
    for (k, v) in emit_pairs(c, true) {
        let _ = writeln!(s, "{k} = {v}");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config("scenario = single-mode\n").unwrap();
        assert_eq!(c.cantilever.omega_c, 4.0e6);
        assert_eq!(c.species.name, "SrO");
        assert_eq!(c.grid.points, 301);
        assert_eq!(c.name(), "single-mode");
    }

    #[test]
    fn missing_or_empty_scenario() {
        assert!(matches!(parse_config("cantilever.mass = 1e-16"), Err(Error::Validation(_))));
        assert!(matches!(parse_config("scenario =\n"), Err(Error::Validation(_))));
    }

    #[test]
    fn unknown_key_is_named() {
        match parse_config("scenario = two-mode\ncantilever.colour = 3\n") {
            Err(Error::UnknownKey(k)) => assert_eq!(k, "cantilever.colour"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parse_errors_carry_line() {
        match parse_config("scenario = lattice\n# note\nsetup.count = many\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        match parse_config("scenario = lattice\njust words\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn comments_and_whitespace() {
        let c = parse_config("  scenario = oracle   # exact check\n\n  grid.max=1.0\n").unwrap();
        assert_eq!(c.scenario, Scenario::Oracle);
        assert_eq!(c.grid.max, 1.0);
    }

    #[test]
    fn occupation_exclusive() {
        assert!(parse_config("scenario = single-mode\ncantilever.n_bar = 4\ncantilever.temperature = 1\n").is_err());
        let c = parse_config("scenario = single-mode\ncantilever.temperature = 0.5\n").unwrap();
        assert_eq!(c.cantilever.occupation, Occupation::Temperature(0.5));
    }

    #[test]
    fn round_trip() {
        let text = "scenario = sweep\nsweep.axis = R\nsweep.min = 1e-6\nsweep.max = 4e-6\nsweep.points = 31\n\
                    coupling.override = 20.4\noutput.name = r-scan\noutput.dir = out/x\noracle.pump_occupations = 1, 2.5\n";
        let c = parse_config(text).unwrap();
        assert_eq!(c.sweep.as_ref().unwrap().axis, "setup.distance");
        assert_eq!(parse_config(&emit_config(&c)).unwrap(), c);
    }

    #[test]
    fn with_number_updates_and_validates() {
        let c = parse_config("scenario = single-mode\ncantilever.temperature = 2\n").unwrap();
        let d = c.with_number("N_bar", 9.0).unwrap();
        assert_eq!(d.cantilever.occupation, Occupation::Quanta(9.0));
        assert_eq!(d.number("cantilever.n_bar").unwrap(), 9.0);
        assert!(c.with_number("setup.count", 2.5).is_err());
        assert!(c.with_number("cantilever.mass", -1.0).is_err());
        assert!(matches!(c.with_number("nonsense", 1.0), Err(Error::UnknownKey(_))));
    }
}
