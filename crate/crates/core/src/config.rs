//! Scenario parameters, the distance-based path-loss model and config files.
//!
//! All powers are carried in milliwatts. Decibel-milliwatt values appear only
//! when parsing config files (`"-50 dBm"`) or CLI flags.

use std::fmt;
use std::path::Path;

use serde::Deserialize;

use crate::error::ConfigError;

/// Converts a dBm value to milliwatts.
pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

pub fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

/// Large-scale attenuation `(d / d0)^(-alpha)`.
pub fn path_loss(distance_m: f64, reference_m: f64, exponent: f64) -> Result<f64, ConfigError> {
    if !(distance_m > 0.0) || !distance_m.is_finite() {
        return Err(ConfigError::InvalidArgument(format!(
            "distance must be positive, got {distance_m}"
        )));
    }
    if !(reference_m > 0.0) {
        return Err(ConfigError::InvalidArgument(format!(
            "reference distance must be positive, got {reference_m}"
        )));
    }
    Ok((distance_m / reference_m).powf(-exponent))
}

/// Every parameter of one femtocell scenario.
///
/// Per-user quantities are stored per user even when the scenario is
/// homogeneous, so heterogeneous settings stay expressible.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// FBS antenna count `T`.
    pub antennas: usize,
    /// Number of information-receiving femto users `J`.
    pub ir_users: usize,
    /// Number of energy-receiving femto users `K` (potential eavesdroppers).
    pub er_users: usize,
    /// Number of macrocell users `N`.
    pub macro_users: usize,
    pub p_max_mw: f64,
    pub noise_ir_mw: Vec<f64>,
    pub noise_er_mw: Vec<f64>,
    /// Energy-harvesting efficiency per ER user, in (0, 1].
    pub efficiency: Vec<f64>,
    /// Harvested-power thresholds per ER user.
    pub eh_threshold_mw: Vec<f64>,
    /// Interference thresholds per macrocell user.
    pub mu_threshold_mw: Vec<f64>,
    /// Macrocell interference received by each IR user.
    pub mbs_interference_ir_mw: Vec<f64>,
    /// Macrocell interference received by each ER user.
    pub mbs_interference_er_mw: Vec<f64>,
    pub reference_distance_m: f64,
    pub path_loss_exponent: f64,
    pub distance_er_m: f64,
    pub distance_ir_m: f64,
    pub distance_mu_m: f64,
    pub rng_seed: u64,
}

/// Shared per-class values used by [`SystemConfig::homogeneous`].
#[derive(Debug, Clone, PartialEq)]
pub struct Homogeneous {
    pub antennas: usize,
    pub ir_users: usize,
    pub er_users: usize,
    pub macro_users: usize,
    pub p_max_mw: f64,
    pub noise_mw: f64,
    pub efficiency: f64,
    pub eh_threshold_mw: f64,
    pub mu_threshold_mw: f64,
    pub mbs_interference_mw: f64,
    pub reference_distance_m: f64,
    pub path_loss_exponent: f64,
    pub distance_er_m: f64,
    pub distance_ir_m: f64,
    pub distance_mu_m: f64,
    pub rng_seed: u64,
}

impl Homogeneous {
    /// The reference simulation scenario: T=6, J=K=N=2, -50 dBm noise,
    /// efficiency 0.5, MU threshold 100 noise powers, MBS interference
    /// 20 noise powers, 6/12/30 m distances, exponent 3.5, P_max 30 dBm and a
    /// 1 mW harvesting threshold.
    pub fn reference() -> Self {
        let noise = dbm_to_mw(-50.0);
        Self {
            antennas: 6,
            ir_users: 2,
            er_users: 2,
            macro_users: 2,
            p_max_mw: dbm_to_mw(30.0),
            noise_mw: noise,
            efficiency: 0.5,
            eh_threshold_mw: 1.0,
            mu_threshold_mw: 100.0 * noise,
            mbs_interference_mw: 20.0 * noise,
            reference_distance_m: 1.0,
            path_loss_exponent: 3.5,
            distance_er_m: 6.0,
            distance_ir_m: 12.0,
            distance_mu_m: 30.0,
            rng_seed: 0,
        }
    }

    pub fn build(&self) -> SystemConfig {
        SystemConfig {
            antennas: self.antennas,
            ir_users: self.ir_users,
            er_users: self.er_users,
            macro_users: self.macro_users,
            p_max_mw: self.p_max_mw,
            noise_ir_mw: vec![self.noise_mw; self.ir_users],
            noise_er_mw: vec![self.noise_mw; self.er_users],
            efficiency: vec![self.efficiency; self.er_users],
            eh_threshold_mw: vec![self.eh_threshold_mw; self.er_users],
            mu_threshold_mw: vec![self.mu_threshold_mw; self.macro_users],
            mbs_interference_ir_mw: vec![self.mbs_interference_mw; self.ir_users],
            mbs_interference_er_mw: vec![self.mbs_interference_mw; self.er_users],
            reference_distance_m: self.reference_distance_m,
            path_loss_exponent: self.path_loss_exponent,
            distance_er_m: self.distance_er_m,
            distance_ir_m: self.distance_ir_m,
            distance_mu_m: self.distance_mu_m,
            rng_seed: self.rng_seed,
        }
    }
}

/// One failed invariant, reported by [`SystemConfig::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: &'static str,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

impl SystemConfig {
    pub fn homogeneous(params: &Homogeneous) -> Self {
        params.build()
    }

    /// The reference scenario with P_max = 30 dBm and a 1 mW EH threshold.
    pub fn reference() -> Self {
        Homogeneous::reference().build()
    }

    pub fn path_loss(&self, distance_m: f64) -> Result<f64, ConfigError> {
        path_loss(distance_m, self.reference_distance_m, self.path_loss_exponent)
    }

    /// Sets every ER user's harvesting threshold.
    pub fn with_eh_threshold(mut self, mw: f64) -> Self {
        self.eh_threshold_mw = vec![mw; self.er_users];
        self
    }

    pub fn with_p_max_dbm(mut self, dbm: f64) -> Self {
        self.p_max_mw = dbm_to_mw(dbm);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    /// Checks only that every per-user vector matches its user count.
    ///
    /// This is the precondition of every algorithm in the crate. The full
    /// [`validate`](Self::validate) additionally enforces the scenario
    /// invariants (antenna surplus, distance ordering, positivity).
    pub fn check_dimensions(&self) -> Result<(), ConfigError> {
        let checks: [(&'static str, usize, usize); 8] = [
            ("noise_ir", self.noise_ir_mw.len(), self.ir_users),
            ("mbs_interference_ir", self.mbs_interference_ir_mw.len(), self.ir_users),
            ("noise_er", self.noise_er_mw.len(), self.er_users),
            ("efficiency", self.efficiency.len(), self.er_users),
            ("eh_threshold", self.eh_threshold_mw.len(), self.er_users),
            ("mbs_interference_er", self.mbs_interference_er_mw.len(), self.er_users),
            ("mu_threshold", self.mu_threshold_mw.len(), self.macro_users),
            ("antennas", self.antennas.min(1), 1),
        ];
        for (field, got, expected) in checks {
            if got != expected {
                return Err(ConfigError::Length { field, expected, got });
            }
        }
        if self.ir_users == 0 {
            return Err(ConfigError::InvalidArgument("at least one IR user is required".into()));
        }
        Ok(())
    }

    /// Returns every invariant violation; empty iff the config is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut push = |field: &'static str, message: String| out.push(Violation { field, message });

        if let Err(e) = self.check_dimensions() {
            push("dimensions", e.to_string());
        }
        if self.antennas <= self.ir_users + self.er_users {
            push(
                "antennas",
                format!(
                    "T must exceed J+K (T={}, J+K={})",
                    self.antennas,
                    self.ir_users + self.er_users
                ),
            );
        }
        if !(self.distance_er_m < self.distance_ir_m) {
            push(
                "distance_er",
                format!(
                    "ER users must be nearer than IR users ({} m >= {} m)",
                    self.distance_er_m, self.distance_ir_m
                ),
            );
        }
        let positive = [
            ("p_max", self.p_max_mw),
            ("reference_distance", self.reference_distance_m),
            ("path_loss_exponent", self.path_loss_exponent),
            ("distance_er", self.distance_er_m),
            ("distance_ir", self.distance_ir_m),
            ("distance_mu", self.distance_mu_m),
        ];
        for (field, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                push(field, format!("must be positive and finite, got {v}"));
            }
        }
        let lists: [(&'static str, &[f64]); 7] = [
            ("noise_ir", &self.noise_ir_mw),
            ("noise_er", &self.noise_er_mw),
            ("eh_threshold", &self.eh_threshold_mw),
            ("mu_threshold", &self.mu_threshold_mw),
            ("mbs_interference_ir", &self.mbs_interference_ir_mw),
            ("mbs_interference_er", &self.mbs_interference_er_mw),
            ("efficiency", &self.efficiency),
        ];
        for (field, values) in lists {
            for (i, &v) in values.iter().enumerate() {
                if !(v > 0.0) || !v.is_finite() {
                    push(field, format!("entry {i} must be positive and finite, got {v}"));
                }
            }
        }
        for (i, &xi) in self.efficiency.iter().enumerate() {
            if xi > 1.0 {
                push("efficiency", format!("efficiency in (0,1] required, entry {i} is {xi}"));
            }
        }
        out
    }

    pub fn ensure_valid(&self) -> Result<(), ConfigError> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(v))
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let file: ConfigFile = toml::from_str(text)?;
        file.into_config()
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|source| ConfigError::Io {
            path: path.as_ref().display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    /// Renders the config in the same TOML layout [`from_toml_str`](Self::from_toml_str) reads.
    pub fn to_toml_string(&self) -> String {
        fn list(v: &[f64]) -> String {
            let items: Vec<String> = v.iter().map(|x| format!("\"{x:e} mW\"")).collect();
            format!("[{}]", items.join(", "))
        }
        fn plain(v: &[f64]) -> String {
            let items: Vec<String> = v.iter().map(|x| format!("{x:e}")).collect();
            format!("[{}]", items.join(", "))
        }
        let mut s = String::new();
        s += &format!("antennas = {}\n", self.antennas);
        s += &format!("ir_users = {}\n", self.ir_users);
        s += &format!("er_users = {}\n", self.er_users);
        s += &format!("macro_users = {}\n", self.macro_users);
        s += &format!("p_max = \"{:e} mW\"\n", self.p_max_mw);
        s += &format!("noise_ir = {}\n", list(&self.noise_ir_mw));
        s += &format!("noise_er = {}\n", list(&self.noise_er_mw));
        s += &format!("efficiency = {}\n", plain(&self.efficiency));
        s += &format!("eh_threshold = {}\n", list(&self.eh_threshold_mw));
        s += &format!("mu_threshold = {}\n", list(&self.mu_threshold_mw));
        s += &format!("mbs_interference_ir = {}\n", list(&self.mbs_interference_ir_mw));
        s += &format!("mbs_interference_er = {}\n", list(&self.mbs_interference_er_mw));
        s += &format!("reference_distance_m = {:e}\n", self.reference_distance_m);
        s += &format!("path_loss_exponent = {:e}\n", self.path_loss_exponent);
        s += &format!("distance_er_m = {:e}\n", self.distance_er_m);
        s += &format!("distance_ir_m = {:e}\n", self.distance_ir_m);
        s += &format!("distance_mu_m = {:e}\n", self.distance_mu_m);
        s += &format!("seed = {}\n", self.rng_seed);
        s
    }
}

/// A power given either as a bare number (milliwatts) or a string with a unit
/// suffix: `"-50 dBm"`, `"1e-5 mW"`, `"0.2 W"`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum PowerSpec {
    Milliwatts(f64),
    WithUnit(String),
}

impl PowerSpec {
    fn to_mw(&self) -> Result<f64, ConfigError> {
        match self {
            PowerSpec::Milliwatts(v) => Ok(*v),
            PowerSpec::WithUnit(s) => parse_power(s),
        }
    }
}

/// Parses `"<number> <unit>"` where unit is one of dBm, mW, W (case-insensitive).
pub fn parse_power(text: &str) -> Result<f64, ConfigError> {
    let t = text.trim();
    let lower = t.to_ascii_lowercase();
    let (num, unit) = if let Some(n) = lower.strip_suffix("dbm") {
        (n, "dbm")
    } else if let Some(n) = lower.strip_suffix("mw") {
        (n, "mw")
    } else if let Some(n) = lower.strip_suffix('w') {
        (n, "w")
    } else {
        (lower.as_str(), "mw")
    };
    let value: f64 = num
        .trim()
        .parse()
        .map_err(|_| ConfigError::Unit(text.to_string()))?;
    Ok(match unit {
        "dbm" => dbm_to_mw(value),
        "w" => value * 1e3,
        _ => value,
    })
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum PerUser<T> {
    Each(Vec<T>),
    Uniform(T),
}

impl<T: Clone> PerUser<T> {
    fn expand(&self, field: &'static str, count: usize) -> Result<Vec<T>, ConfigError> {
        match self {
            PerUser::Uniform(v) => Ok(vec![v.clone(); count]),
            PerUser::Each(v) if v.len() == count => Ok(v.clone()),
            PerUser::Each(v) => Err(ConfigError::Length { field, expected: count, got: v.len() }),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    antennas: usize,
    ir_users: usize,
    er_users: usize,
    macro_users: usize,
    p_max: PowerSpec,
    noise_ir: PerUser<PowerSpec>,
    noise_er: PerUser<PowerSpec>,
    efficiency: PerUser<f64>,
    eh_threshold: PerUser<PowerSpec>,
    mu_threshold: PerUser<PowerSpec>,
    mbs_interference_ir: PerUser<PowerSpec>,
    mbs_interference_er: PerUser<PowerSpec>,
    #[serde(default = "default_d0")]
    reference_distance_m: f64,
    #[serde(default = "default_alpha")]
    path_loss_exponent: f64,
    distance_er_m: f64,
    distance_ir_m: f64,
    distance_mu_m: f64,
    #[serde(default)]
    seed: u64,
}

fn default_d0() -> f64 {
    1.0
}

fn default_alpha() -> f64 {
    3.5
}

fn powers(spec: &PerUser<PowerSpec>, field: &'static str, n: usize) -> Result<Vec<f64>, ConfigError> {
    spec.expand(field, n)?.iter().map(PowerSpec::to_mw).collect()
}

impl ConfigFile {
    fn into_config(self) -> Result<SystemConfig, ConfigError> {
        let (j, k, n) = (self.ir_users, self.er_users, self.macro_users);
        Ok(SystemConfig {
            antennas: self.antennas,
            ir_users: j,
            er_users: k,
            macro_users: n,
            p_max_mw: self.p_max.to_mw()?,
            noise_ir_mw: powers(&self.noise_ir, "noise_ir", j)?,
            noise_er_mw: powers(&self.noise_er, "noise_er", k)?,
            efficiency: self.efficiency.expand("efficiency", k)?,
            eh_threshold_mw: powers(&self.eh_threshold, "eh_threshold", k)?,
            mu_threshold_mw: powers(&self.mu_threshold, "mu_threshold", n)?,
            mbs_interference_ir_mw: powers(&self.mbs_interference_ir, "mbs_interference_ir", j)?,
            mbs_interference_er_mw: powers(&self.mbs_interference_er, "mbs_interference_er", k)?,
            reference_distance_m: self.reference_distance_m,
            path_loss_exponent: self.path_loss_exponent,
            distance_er_m: self.distance_er_m,
            distance_ir_m: self.distance_ir_m,
            distance_mu_m: self.distance_mu_m,
            rng_seed: self.seed,
        })
    }
}
