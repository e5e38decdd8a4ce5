//! Scenario configuration: defaults, validation and the key-value file format.
//!
//! The file is a flat TOML document. Every key is optional; omitted keys keep
//! their defaults.
//!
//! ```text
//! M = 32
//! N = 64
//! powerSweepDbm = [0, 10, 20, 30]
//! methods = ["PIB", "FIB"]
//! seMode = "determinant"
//! ```

use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::channel::{ArraySpec, ChannelParams};
use crate::metrics::{NoiseModel, SeMode};
use crate::scene::{build_geometry, Layout};
use crate::txrx::MethodId;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { key: String, line: usize },
    #[error("{}: invalid `{key}`: {message}", line_label(*line))]
    Invalid { key: &'static str, line: Option<usize>, message: String },
    #[error("cannot read config {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

fn line_label(line: Option<usize>) -> String {
    match line {
        Some(l) => format!("line {l}"),
        None => "default".into(),
    }
}

/// Everything a sweep needs.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// M
    pub bs_antennas: usize,
    /// N
    pub irs_elements: usize,
    /// P
    pub ue2_antennas: usize,
    /// Q
    pub ue1_antennas: usize,
    /// Ns, per UE
    pub streams: usize,
    pub fc_ghz: f64,
    pub layout: Layout,
    /// Receiver noise power per UE, dBm.
    pub noise_dbm: [f64; 2],
    pub power_sweep_dbm: Vec<f64>,
    pub realizations: usize,
    pub seed: u64,
    pub ray_count: usize,
    pub methods: Vec<MethodId>,
    pub se_mode: SeMode,
    pub freeze_large_scale: bool,
    pub noise_model: NoiseModel,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            bs_antennas: 32,
            irs_elements: 64,
            ue2_antennas: 8,
            ue1_antennas: 8,
            streams: 2,
            fc_ghz: 28.0,
            layout: Layout::default(),
            noise_dbm: [-80.0, -80.0],
            power_sweep_dbm: (0..=15).map(|i| 2.0 * i as f64).collect(),
            realizations: 10_000,
            seed: 1,
            ray_count: 64,
            methods: MethodId::ALL.to_vec(),
            se_mode: SeMode::Determinant,
            freeze_large_scale: false,
            noise_model: NoiseModel::Combined,
        }
    }
}

/// `10^((dBm − 30)/10)` watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

impl ScenarioConfig {
    pub fn channel_params(&self) -> ChannelParams {
        ChannelParams {
            bs_antennas: self.bs_antennas,
            irs_array: ArraySpec::square_ura(self.irs_elements),
            ue1_antennas: self.ue1_antennas,
            ue2_antennas: self.ue2_antennas,
            fc_ghz: self.fc_ghz,
            rays: self.ray_count,
        }
    }

    pub fn noise_watts(&self) -> [f64; 2] {
        self.noise_dbm.map(dbm_to_watts)
    }

    /// Checks every invariant; errors name the offending key.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.validate_with(&|_| None)
    }

    fn validate_with(&self, line_of: &dyn Fn(&str) -> Option<usize>) -> Result<(), ConfigError> {
        let bad = |key: &'static str, message: String| ConfigError::Invalid { key, line: line_of(key), message };
        for (key, v) in [
            ("M", self.bs_antennas),
            ("N", self.irs_elements),
            ("P", self.ue2_antennas),
            ("Q", self.ue1_antennas),
            ("Ns", self.streams),
            ("realizations", self.realizations),
            ("rayCount", self.ray_count),
        ] {
            if v == 0 {
                return Err(bad(key, "must be at least 1".into()));
            }
        }
        let pq = self.ue1_antennas + self.ue2_antennas;
        if self.bs_antennas < pq {
            return Err(bad("M", format!("M = {} is below P + Q = {pq}", self.bs_antennas)));
        }
        let min_pq = self.ue1_antennas.min(self.ue2_antennas);
        if self.streams > min_pq {
            return Err(bad("Ns", format!("Ns = {} exceeds min(P, Q) = {min_pq}", self.streams)));
        }
        if !(self.fc_ghz.is_finite() && self.fc_ghz > 0.0) {
            return Err(bad("fcGHz", format!("must be positive, got {}", self.fc_ghz)));
        }
        if self.noise_dbm.iter().any(|x| !x.is_finite()) {
            return Err(bad("noiseDbm", "must be finite".into()));
        }
        let p = &self.power_sweep_dbm;
        if p.is_empty() {
            return Err(bad("powerSweepDbm", "must not be empty".into()));
        }
        if p.iter().any(|x| !x.is_finite()) || p.windows(2).any(|w| w[0] >= w[1]) {
            return Err(bad("powerSweepDbm", "must be finite and strictly ascending".into()));
        }
        for (i, m) in self.methods.iter().enumerate() {
            if self.methods[..i].contains(m) {
                return Err(bad("methods", format!("{m} listed twice")));
            }
        }
        build_geometry(&self.layout).map_err(|e| bad("layout", e.to_string()))?;
        Ok(())
    }
}

/// Parses `start:step:stop` (inclusive of `stop` up to rounding).
pub fn parse_power_range(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, c] = parts.as_slice() else {
        return Err(format!("expected start:step:stop, got `{s}`"));
    };
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
    let (start, step, stop) = (num(a)?, num(b)?, num(c)?);
    if !(step > 0.0) || !start.is_finite() || !stop.is_finite() || stop < start {
        return Err(format!("`{s}` does not describe an ascending range"));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| start + step * i as f64).collect())
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Seed {
    Int(i64),
    Text(String),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum NoisePair {
    Both(f64),
    PerUe([f64; 2]),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
struct RawConfig {
    M: Option<usize>,
    N: Option<usize>,
    P: Option<usize>,
    Q: Option<usize>,
    Ns: Option<usize>,
    fcGHz: Option<f64>,
    heightBsM: Option<f64>,
    heightIrsM: Option<f64>,
    heightUeM: Option<f64>,
    d2dBsIrsM: Option<f64>,
    d2dBsUe1M: Option<f64>,
    d2dBsUe2M: Option<f64>,
    d2dIrsUe1M: Option<f64>,
    d2dIrsUe2M: Option<f64>,
    noiseDbm: Option<NoisePair>,
    noiseDbmUe1: Option<f64>,
    noiseDbmUe2: Option<f64>,
    powerSweepDbm: Option<Vec<f64>>,
    realizations: Option<usize>,
    seed: Option<Seed>,
    rayCount: Option<usize>,
    methods: Option<Vec<String>>,
    seMode: Option<String>,
    freezeLargeScale: Option<bool>,
    noiseModel: Option<String>,
}

fn line_at(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn key_line(text: &str, key: &str) -> Option<usize> {
    text.lines().position(|l| {
        let l = l.trim_start();
        l.strip_prefix(key).is_some_and(|rest| rest.trim_start().starts_with('='))
    })
    .map(|i| i + 1)
}

pub fn parse_se_mode(s: &str) -> Result<SeMode, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "det" | "determinant" => Ok(SeMode::Determinant),
        "scalar" => Ok(SeMode::Scalar),
        _ => Err(format!("expected `determinant` or `scalar`, got `{s}`")),
    }
}

fn parse_noise_model(s: &str) -> Result<NoiseModel, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "combined" => Ok(NoiseModel::Combined),
        "identity" => Ok(NoiseModel::Identity),
        _ => Err(format!("expected `combined` or `identity`, got `{s}`")),
    }
}

pub fn parse_methods(list: &[impl AsRef<str>]) -> Result<Vec<MethodId>, String> {
    list.iter().map(|s| s.as_ref().parse()).collect()
}

/// Parses and validates a config document.
pub fn load_config_str(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| line_at(text, s.start)).unwrap_or(1);
        let msg = e.message().to_string();
        match msg.strip_prefix("unknown field `").and_then(|r| r.split('`').next()) {
            Some(key) => ConfigError::UnknownKey { key: key.to_string(), line },
            None => ConfigError::Syntax { line, message: msg },
        }
    })?;
    let line_of = |key: &str| key_line(text, key);
    let bad = |key: &'static str, message: String| ConfigError::Invalid { key, line: line_of(key), message };

    let mut cfg = ScenarioConfig::default();
    let set = |dst: &mut usize, v: Option<usize>| {
        if let Some(v) = v {
            *dst = v;
        }
    };
    set(&mut cfg.bs_antennas, raw.M);
    set(&mut cfg.irs_elements, raw.N);
    set(&mut cfg.ue2_antennas, raw.P);
    set(&mut cfg.ue1_antennas, raw.Q);
    set(&mut cfg.streams, raw.Ns);
    set(&mut cfg.realizations, raw.realizations);
    set(&mut cfg.ray_count, raw.rayCount);
    let setf = |dst: &mut f64, v: Option<f64>| {
        if let Some(v) = v {
            *dst = v;
        }
    };
    setf(&mut cfg.fc_ghz, raw.fcGHz);
    let l = &mut cfg.layout;
    setf(&mut l.height_bs_m, raw.heightBsM);
    setf(&mut l.height_irs_m, raw.heightIrsM);
    setf(&mut l.height_ue_m, raw.heightUeM);
    setf(&mut l.d2d_bs_irs_m, raw.d2dBsIrsM);
    setf(&mut l.d2d_bs_ue1_m, raw.d2dBsUe1M);
    setf(&mut l.d2d_bs_ue2_m, raw.d2dBsUe2M);
    setf(&mut l.d2d_irs_ue1_m, raw.d2dIrsUe1M);
    setf(&mut l.d2d_irs_ue2_m, raw.d2dIrsUe2M);
    match raw.noiseDbm {
        Some(NoisePair::Both(x)) => cfg.noise_dbm = [x, x],
        Some(NoisePair::PerUe(p)) => cfg.noise_dbm = p,
        None => {}
    }
    setf(&mut cfg.noise_dbm[0], raw.noiseDbmUe1);
    setf(&mut cfg.noise_dbm[1], raw.noiseDbmUe2);
    if let Some(p) = raw.powerSweepDbm {
        cfg.power_sweep_dbm = p;
    }
    match raw.seed {
        Some(Seed::Int(s)) => cfg.seed = u64::try_from(s).map_err(|_| bad("seed", format!("{s} is negative")))?,
        Some(Seed::Text(s)) => cfg.seed = s.trim().parse().map_err(|e| bad("seed", format!("`{s}`: {e}")))?,
        None => {}
    }
    if let Some(m) = raw.methods {
        cfg.methods = parse_methods(&m).map_err(|e| bad("methods", e))?;
    }
    if let Some(s) = raw.seMode {
        cfg.se_mode = parse_se_mode(&s).map_err(|e| bad("seMode", e))?;
    }
    if let Some(b) = raw.freezeLargeScale {
        cfg.freeze_large_scale = b;
    }
    if let Some(s) = raw.noiseModel {
        cfg.noise_model = parse_noise_model(&s).map_err(|e| bad("noiseModel", e))?;
    }
    cfg.validate_with(&line_of)?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
    load_config_str(&text)
}
