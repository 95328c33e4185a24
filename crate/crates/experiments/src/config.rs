//! Run configuration and its plain-text `key = value` file format.
//!
//! Lines are `key = value`; `#` starts a comment; blank lines are ignored.
//! Keys are the [`RunConfig`] field names. Lists are comma separated.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use shortpulse::{build_grid, Dimension, Grid, Nonlinearity, Profile, Pulse, PulseSpec, Resolution, Symmetry};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("invalid value for `{key}`: {message}")]
    Value { key: String, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    SingleRun,
    DeltaSweep,
    Convergence,
    Prop61,
    FocusingContrast,
    SobolevAudit,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::SingleRun,
        Experiment::DeltaSweep,
        Experiment::Convergence,
        Experiment::Prop61,
        Experiment::FocusingContrast,
        Experiment::SobolevAudit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::SingleRun => "single-run",
            Experiment::DeltaSweep => "delta-sweep",
            Experiment::Convergence => "convergence",
            Experiment::Prop61 => "prop61",
            Experiment::FocusingContrast => "focusing-contrast",
            Experiment::SobolevAudit => "sobolev-audit",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| format!("unknown experiment `{s}`"))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub u0: f64,
    pub u_end: f64,
    /// Pulse width of single runs and energy audits.
    pub delta: f64,
    /// Cells along `u` across the slab, fixed for every delta.
    pub n_u: usize,
    /// Cells along `ub` across the pulse, fixed for every delta.
    pub n_ub: usize,
    /// Angular samples in 2D (ignored in 3D).
    pub n_theta: usize,
    pub dim: Dimension,
    pub profile: Profile,
    pub amplitude: f64,
    /// `cos(m theta)` modulation in 2D; must be 0 in 3D.
    pub angular_mode: u32,
    pub nonlinearity: Nonlinearity,
    /// Strictly decreasing pulse widths for sweeps.
    pub delta_list: Vec<f64>,
    /// When set, the amplitude is chosen so the data energy reaches this value.
    pub energy_target: Option<f64>,
    /// Allowed spread of `q / delta^p` over a sweep.
    pub headroom: f64,
    pub slope_tolerance: f64,
    /// Tolerance of slopes that have closed forms.
    pub equality_tolerance: f64,
    /// Dyadic resolution levels of convergence studies.
    pub levels: usize,
    pub order_tolerance: f64,
    pub energy_tolerance: f64,
    /// Allowed relative change of Sobolev ratios under refinement.
    pub refinement_tolerance: f64,
    /// Keep every `csv_stride`-th node in each direction of the norm CSV.
    pub csv_stride: usize,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            experiment: Experiment::SingleRun,
            u0: -4.0,
            u_end: -1.0,
            delta: 0.01,
            n_u: 300,
            n_ub: 64,
            n_theta: 32,
            dim: Dimension::Three,
            profile: Profile::Sin4,
            amplitude: 1.0,
            angular_mode: 0,
            nonlinearity: Nonlinearity::Power {
                k: 3,
                sign: shortpulse::Sign::Defocusing,
            },
            delta_list: vec![0.04, 0.02, 0.01, 0.005],
            energy_target: None,
            headroom: 3.0,
            slope_tolerance: 0.1,
            equality_tolerance: 0.05,
            levels: 4,
            order_tolerance: 0.1,
            energy_tolerance: 0.01,
            refinement_tolerance: 0.1,
            csv_stride: 10,
            out: PathBuf::from("out"),
        }
    }
}

pub const KEYS: [&str; 25] = [
    "experiment",
    "u0",
    "u_end",
    "delta",
    "n_u",
    "n_ub",
    "n_theta",
    "dim",
    "profile",
    "amplitude",
    "angular_mode",
    "nonlinearity",
    "delta_list",
    "energy_target",
    "headroom",
    "slope_tolerance",
    "equality_tolerance",
    "levels",
    "order_tolerance",
    "energy_tolerance",
    "refinement_tolerance",
    "csv_stride",
    "out",
    "symmetry",
    "resolution_coupling",
];

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    value.parse::<T>().map_err(|e| ConfigError::Value {
        key: key.into(),
        message: e.to_string(),
    })
}

impl RunConfig {
    /// Defaults of an experiment: the last-cone check uses the smooth bump
    /// profile with 128 cells per pulse (second derivatives on the last cone
    /// are not resolved by 64), and the focusing contrast a cubic focusing pulse with
    /// `delta = 0.005` and data energy 1000.
    pub fn for_experiment(experiment: Experiment) -> Self {
        let mut c = Self {
            experiment,
            ..Self::default()
        };
        match experiment {
            Experiment::Prop61 => {
                c.profile = Profile::Bump;
                c.n_ub = 128;
            }
            Experiment::FocusingContrast => {
                c.nonlinearity = Nonlinearity::Power {
                    k: 3,
                    sign: shortpulse::Sign::Focusing,
                };
                c.delta = 0.005;
                c.energy_target = Some(1000.0);
            }
            _ => {}
        }
        c
    }

    /// Sets one field from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let value = value.trim();
        let bad = |message: String| ConfigError::Value {
            key: key.into(),
            message,
        };
        match key {
            "experiment" => self.experiment = value.parse().map_err(bad)?,
            "u0" => self.u0 = parse_num(key, value)?,
            "u_end" => self.u_end = parse_num(key, value)?,
            "delta" => self.delta = parse_num(key, value)?,
            "n_u" => self.n_u = parse_num(key, value)?,
            "n_ub" => self.n_ub = parse_num(key, value)?,
            "n_theta" => self.n_theta = parse_num(key, value)?,
            "dim" => {
                self.dim = Dimension::from_usize(parse_num(key, value)?).map_err(|e| bad(e.to_string()))?;
            }
            "profile" => self.profile = Profile::from_name(value).map_err(|e| bad(e.to_string()))?,
            "amplitude" => self.amplitude = parse_num(key, value)?,
            "angular_mode" => self.angular_mode = parse_num(key, value)?,
            "nonlinearity" => self.nonlinearity = Nonlinearity::parse(value).map_err(|e| bad(e.to_string()))?,
            "delta_list" => {
                self.delta_list = value
                    .split(',')
                    .map(|s| parse_num::<f64>(key, s.trim()))
                    .collect::<Result<_, _>>()?;
            }
            "energy_target" => {
                self.energy_target = match value {
                    "" | "none" => None,
                    v => Some(parse_num(key, v)?),
                }
            }
            "headroom" => self.headroom = parse_num(key, value)?,
            "slope_tolerance" => self.slope_tolerance = parse_num(key, value)?,
            "equality_tolerance" => self.equality_tolerance = parse_num(key, value)?,
            "levels" => self.levels = parse_num(key, value)?,
            "order_tolerance" => self.order_tolerance = parse_num(key, value)?,
            "energy_tolerance" => self.energy_tolerance = parse_num(key, value)?,
            "refinement_tolerance" => self.refinement_tolerance = parse_num(key, value)?,
            "csv_stride" => self.csv_stride = parse_num(key, value)?,
            "out" => self.out = PathBuf::from(value),
            // Derived from `dim`; accepted when consistent.
            "symmetry" => {
                let expected = match self.dim {
                    Dimension::Three => "spherical",
                    Dimension::Two => "full-angular",
                };
                if value != expected {
                    return Err(bad(format!("dimension {} uses `{expected}`", self.dim.as_usize())));
                }
            }
            // Only fixed cells per pulse is supported.
            "resolution_coupling" => {
                if value != "fixed-per-pulse" {
                    return Err(bad("only `fixed-per-pulse` is supported".into()));
                }
            }
            _ => return Err(ConfigError::UnknownKey(key.into())),
        }
        Ok(())
    }

    /// Applies every `key = value` line of `text` on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: n + 1,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            self.set(key.trim(), value).map_err(|e| match e {
                ConfigError::UnknownKey(k) => ConfigError::Syntax {
                    line: n + 1,
                    message: format!("unknown key `{k}`"),
                },
                other => other,
            })?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self, ConfigError> {
        let mut c = Self::default();
        c.apply_text(text)?;
        Ok(c)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_text(&text)
    }

    /// Canonical `key = value` rendering; parsing it gives back `self`.
    pub fn to_text(&self) -> String {
        self.entries()
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    pub fn entries(&self) -> BTreeMap<&'static str, String> {
        let mut m = BTreeMap::new();
        m.insert("experiment", self.experiment.name().to_string());
        m.insert("u0", self.u0.to_string());
        m.insert("u_end", self.u_end.to_string());
        m.insert("delta", self.delta.to_string());
        m.insert("n_u", self.n_u.to_string());
        m.insert("n_ub", self.n_ub.to_string());
        m.insert("n_theta", self.n_theta.to_string());
        m.insert("dim", self.dim.as_usize().to_string());
        m.insert("profile", self.profile.name().to_string());
        m.insert("amplitude", self.amplitude.to_string());
        m.insert("angular_mode", self.angular_mode.to_string());
        m.insert("nonlinearity", self.nonlinearity.label());
        m.insert(
            "delta_list",
            self.delta_list.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(","),
        );
        m.insert(
            "energy_target",
            self.energy_target.map_or("none".to_string(), |e| e.to_string()),
        );
        m.insert("headroom", self.headroom.to_string());
        m.insert("slope_tolerance", self.slope_tolerance.to_string());
        m.insert("equality_tolerance", self.equality_tolerance.to_string());
        m.insert("levels", self.levels.to_string());
        m.insert("order_tolerance", self.order_tolerance.to_string());
        m.insert("energy_tolerance", self.energy_tolerance.to_string());
        m.insert("refinement_tolerance", self.refinement_tolerance.to_string());
        m.insert("csv_stride", self.csv_stride.to_string());
        m.insert("out", self.out.display().to_string());
        m
    }

    /// Checks the cross-field invariants.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.dim == Dimension::Three && self.angular_mode != 0 {
            return bad("angular_mode must be 0 in 3D spherical mode".into());
        }
        if self.dim == Dimension::Two && self.n_theta < 2 {
            return bad("2D runs need n_theta >= 2".into());
        }
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return bad(format!("amplitude {} must be finite and non-negative", self.amplitude));
        }
        if let Some(e) = self.energy_target {
            if !(e > 0.0 && e.is_finite()) {
                return bad(format!("energy_target {e} must be positive"));
            }
        }
        if self.nonlinearity == Nonlinearity::ExpFocusing && self.dim == Dimension::Three {
            return bad("exp-focusing is the 2D nonlinearity".into());
        }
        let sweeping = matches!(
            self.experiment,
            Experiment::DeltaSweep | Experiment::Prop61 | Experiment::SobolevAudit
        );
        if sweeping {
            if self.delta_list.len() < 3 {
                return bad("delta_list needs at least 3 entries for slope fits".into());
            }
            if self.delta_list.windows(2).any(|w| !(w[1] < w[0])) {
                return bad("delta_list must be strictly decreasing".into());
            }
        }
        if self.delta_list.iter().any(|&d| !(d > 0.0)) {
            return bad("delta_list entries must be positive".into());
        }
        if self.levels < 3 {
            return bad("convergence studies need at least 3 levels".into());
        }
        if self.csv_stride == 0 {
            return bad("csv_stride must be at least 1".into());
        }
        self.grid(self.delta).map(|_| ()).map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn symmetry(&self) -> Symmetry {
        match self.dim {
            Dimension::Three => Symmetry::Spherical,
            Dimension::Two => Symmetry::FullAngular,
        }
    }

    pub fn resolution(&self) -> Resolution {
        let n_theta = match self.dim {
            Dimension::Three => 1,
            Dimension::Two => self.n_theta,
        };
        Resolution::new(self.n_u, self.n_ub, n_theta)
    }

    pub fn grid(&self, delta: f64) -> shortpulse::Result<Grid> {
        self.grid_at(delta, self.resolution())
    }

    pub fn grid_at(&self, delta: f64, resolution: Resolution) -> shortpulse::Result<Grid> {
        build_grid(self.u0, self.u_end, delta, resolution, self.dim, self.symmetry())
    }

    pub fn pulse(&self, delta: f64) -> shortpulse::Result<Pulse> {
        PulseSpec::new(self.profile.clone(), self.amplitude, delta, self.angular_mode)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn text_round_trip() {
        let mut c = RunConfig::default();
        c.experiment = Experiment::DeltaSweep;
        c.dim = Dimension::Two;
        c.angular_mode = 2;
        c.nonlinearity = Nonlinearity::ExpFocusing;
        c.energy_target = Some(250.0);
        c.delta_list = vec![0.1, 0.05, 0.025];
        let back = RunConfig::from_text(&c.to_text()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn comments_and_blank_lines() {
        let c = RunConfig::from_text("# sweep\n\n delta = 0.02  # narrow\nnonlinearity = focusing:7\n").unwrap();
        assert_eq!(c.delta, 0.02);
        assert_eq!(c.nonlinearity, Nonlinearity::focusing(7).unwrap());
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(matches!(
            RunConfig::from_text("seed = 4"),
            Err(ConfigError::Syntax { line: 1, .. })
        ));
        assert!(RunConfig::from_text("n_u = many").is_err());
        assert!(RunConfig::from_text("delta").is_err());
        assert!(RunConfig::from_text("symmetry = full-angular").is_err());
    }

    #[test]
    fn sweep_lists_must_decrease() {
        let mut c = RunConfig {
            experiment: Experiment::DeltaSweep,
            ..Default::default()
        };
        c.delta_list = vec![0.01, 0.02, 0.04];
        assert!(c.validate().is_err());
        c.delta_list = vec![0.04, 0.02];
        assert!(c.validate().is_err());
    }

    #[test]
    fn angular_mode_needs_two_dimensions() {
        let c = RunConfig {
            angular_mode: 1,
            ..Default::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn experiment_defaults_are_valid() {
        for e in Experiment::ALL {
            let c = RunConfig::for_experiment(e);
            assert_eq!(c.experiment, e);
            c.validate().unwrap();
        }
        assert_eq!(RunConfig::for_experiment(Experiment::Prop61).profile, Profile::Bump);
        assert!(RunConfig::for_experiment(Experiment::FocusingContrast).nonlinearity.is_focusing());
    }
}
