//! Seeded Monte Carlo sweep over methods and transmit power.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use super::config::{dbm_to_watts, ScenarioConfig};
use crate::channel::{draw_channel_set, draw_direct_ue1, ChannelSet, FrozenLargeScale};
use crate::irs::{design_phase, PhaseProfile};
use crate::matgebra::{CMatrix, LinalgError};
use crate::metrics::{evaluate, LinkMetrics, MetricSettings, MetricsError};
use crate::scalar::Real;
use crate::scene::{build_geometry, GeometryError, NodeGeometry};
use crate::txrx::{build_combiners, build_precoders, DesignError, EffectiveChannels, MethodId, PrecoderSet};

/// Stream reserved for the frozen large-scale draw; realization streams count up from 0.
const FROZEN_STREAM: u64 = u64::MAX;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("realization {realization}: {source}")]
    Phase { realization: usize, source: LinalgError },
    #[error("{method}, realization {realization}{}: {source}", power_label(*power_dbm))]
    Design { method: MethodId, realization: usize, power_dbm: Option<f64>, source: DesignError },
    #[error("{method}, realization {realization}, {power_dbm} dBm: {source}")]
    Metric { method: MethodId, realization: usize, power_dbm: f64, source: MetricsError },
    #[error("worker pool: {0}")]
    Pool(String),
}

fn power_label(p: Option<f64>) -> String {
    p.map(|p| format!(", {p} dBm")).unwrap_or_default()
}

/// Random stream of realization `index`.
pub fn realization_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Everything drawn for one realization, shared by all methods and powers.
#[derive(Debug, Clone)]
pub struct RealizationDraw<T: Real> {
    pub channels: ChannelSet<T>,
    /// BS → UE1 direct channel; only drawn when the no-IRS benchmark runs.
    pub h1_direct: Option<CMatrix<T>>,
    pub phase: PhaseProfile<T>,
}

impl<T: Real> RealizationDraw<T> {
    pub fn effective(&self, method: MethodId) -> Result<EffectiveChannels<T>, LinalgError> {
        match (method.uses_irs(), &self.h1_direct) {
            (false, Some(h1)) => Ok(EffectiveChannels::without_irs(h1, &self.channels.h2)),
            _ => EffectiveChannels::with_irs(&self.channels, &self.phase),
        }
    }
}

/// Fixed per-sweep state: geometry, optional frozen large-scale terms.
#[derive(Debug, Clone)]
pub struct SweepContext {
    pub config: ScenarioConfig,
    pub geometry: NodeGeometry,
    pub frozen: Option<FrozenLargeScale>,
}

impl SweepContext {
    pub fn new(config: &ScenarioConfig) -> Result<Self, SweepError> {
        let geometry = build_geometry(&config.layout)?;
        let frozen = if config.freeze_large_scale {
            let mut rng = realization_rng(config.seed, FROZEN_STREAM);
            Some(FrozenLargeScale::draw(&config.channel_params(), &geometry, &mut rng)?)
        } else {
            None
        };
        Ok(Self { config: config.clone(), geometry, frozen })
    }

    /// Draws J, H2, G1, G2 (then the direct UE1 channel when needed) and
    /// designs the IRS phase.
    pub fn draw<T: Real>(&self, index: usize) -> Result<RealizationDraw<T>, SweepError> {
        let cfg = &self.config;
        let params = cfg.channel_params();
        let mut rng = realization_rng(cfg.seed, index as u64);
        let channels: ChannelSet<T> = draw_channel_set(&params, &self.geometry, self.frozen.as_ref(), &mut rng)?;
        let h1_direct = if cfg.methods.contains(&MethodId::NoIrsBd) {
            Some(draw_direct_ue1(&params, &self.geometry, self.frozen.as_ref(), &mut rng)?)
        } else {
            None
        };
        let phase = design_phase(&channels.j, &channels.g1)
            .map_err(|source| SweepError::Phase { realization: index, source })?;
        Ok(RealizationDraw { channels, h1_direct, phase })
    }

    fn settings<T: Real>(&self) -> MetricSettings<T> {
        let [a, b] = self.config.noise_watts();
        MetricSettings { noise_var: [T::lit(a), T::lit(b)], se_mode: self.config.se_mode, noise_model: self.config.noise_model }
    }

    /// Designs the method once at unit power.
    pub fn design<T: Real>(
        &self,
        draw: &RealizationDraw<T>,
        method: MethodId,
        index: usize,
    ) -> Result<(EffectiveChannels<T>, PrecoderSet<T>), SweepError> {
        let design_err = |source: DesignError| SweepError::Design { method, realization: index, power_dbm: None, source };
        let eff = draw.effective(method).map_err(|e| design_err(e.into()))?;
        let base = build_precoders(method, &eff, &draw.channels.j, self.config.streams, T::one()).map_err(design_err)?;
        Ok((eff, base))
    }

    /// Metrics of one method at every sweep power.
    pub fn evaluate_method<T: Real>(
        &self,
        draw: &RealizationDraw<T>,
        method: MethodId,
        index: usize,
    ) -> Result<Vec<LinkMetrics>, SweepError> {
        let (eff, base) = self.design(draw, method, index)?;
        let settings = self.settings::<T>();
        self.config
            .power_sweep_dbm
            .iter()
            .map(|&dbm| {
                let design_err =
                    |source: DesignError| SweepError::Design { method, realization: index, power_dbm: Some(dbm), source };
                let pre = base.rescaled(T::lit(dbm_to_watts(dbm))).map_err(design_err)?;
                let comb = build_combiners(&eff, &pre).map_err(design_err)?;
                evaluate(&eff, &pre, &comb, &settings)
                    .map_err(|source| SweepError::Metric { method, realization: index, power_dbm: dbm, source })
            })
            .collect()
    }

    /// `[method][power]` metrics of realization `index`.
    pub fn run_realization<T: Real>(&self, index: usize) -> Result<Vec<Vec<LinkMetrics>>, SweepError> {
        let draw = self.draw::<T>(index)?;
        self.config.methods.iter().map(|&m| self.evaluate_method(&draw, m, index)).collect()
    }
}

/// Per-realization outcomes in realization order.
#[derive(Debug, Clone)]
pub struct SweepSamples {
    pub methods: Vec<MethodId>,
    pub power_dbm: Vec<f64>,
    /// `[realization][method][power]`
    pub metrics: Vec<Vec<Vec<LinkMetrics>>>,
}

/// Which SE a row reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum UeLabel {
    Ue1,
    Ue2,
    Sum,
}

impl UeLabel {
    pub const ALL: [UeLabel; 3] = [UeLabel::Ue1, UeLabel::Ue2, UeLabel::Sum];

    pub fn as_str(self) -> &'static str {
        match self {
            UeLabel::Ue1 => "1",
            UeLabel::Ue2 => "2",
            UeLabel::Sum => "sum",
        }
    }

    pub fn pick(self, m: &LinkMetrics) -> f64 {
        match self {
            UeLabel::Ue1 => m.se1,
            UeLabel::Ue2 => m.se2,
            UeLabel::Sum => m.se_sum,
        }
    }
}

impl fmt::Display for UeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for UeLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        UeLabel::ALL.into_iter().find(|u| u.as_str() == s).ok_or_else(|| format!("unknown ue `{s}`"))
    }
}

/// Mean SE with normal-approximation confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeRow {
    pub method: MethodId,
    pub power_dbm: f64,
    pub ue: UeLabel,
    pub mean_se: f64,
    pub std_se: f64,
    pub ci95: f64,
    pub realizations: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepResult {
    /// Sorted by (method name, power, ue).
    pub rows: Vec<SeRow>,
}

impl SweepResult {
    pub fn sort(&mut self) {
        self.rows.sort_by(|a, b| {
            a.method
                .name()
                .cmp(b.method.name())
                .then(a.power_dbm.total_cmp(&b.power_dbm))
                .then(a.ue.cmp(&b.ue))
        });
    }

    pub fn get(&self, method: MethodId, power_dbm: f64, ue: UeLabel) -> Option<&SeRow> {
        self.rows.iter().find(|r| r.method == method && r.power_dbm == power_dbm && r.ue == ue)
    }

    /// `(power, row)` series of one method and UE, ascending in power.
    pub fn series(&self, method: MethodId, ue: UeLabel) -> Vec<&SeRow> {
        let mut s: Vec<&SeRow> = self.rows.iter().filter(|r| r.method == method && r.ue == ue).collect();
        s.sort_by(|a, b| a.power_dbm.total_cmp(&b.power_dbm));
        s
    }

    pub fn methods(&self) -> Vec<MethodId> {
        let mut m: Vec<MethodId> = self.rows.iter().map(|r| r.method).collect();
        m.sort_by_key(|m| m.name());
        m.dedup();
        m
    }
}

/// Sample mean and (n − 1) standard deviation, summed in slice order.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

impl SweepSamples {
    pub fn realizations(&self) -> usize {
        self.metrics.len()
    }

    /// Values of one (method, power) cell across realizations.
    pub fn column(&self, method: usize, power: usize) -> impl Iterator<Item = &LinkMetrics> + '_ {
        self.metrics.iter().map(move |r| &r[method][power])
    }

    pub fn method_index(&self, method: MethodId) -> Option<usize> {
        self.methods.iter().position(|&m| m == method)
    }

    pub fn power_index(&self, dbm: f64) -> Option<usize> {
        self.power_dbm.iter().position(|&p| p == dbm)
    }

    pub fn aggregate(&self) -> SweepResult {
        let n = self.realizations();
        let mut rows = Vec::new();
        for (mi, &method) in self.methods.iter().enumerate() {
            for (pi, &power_dbm) in self.power_dbm.iter().enumerate() {
                for ue in UeLabel::ALL {
                    let xs: Vec<f64> = self.column(mi, pi).map(|m| ue.pick(m)).collect();
                    let (mean_se, std_se) = mean_std(&xs);
                    rows.push(SeRow {
                        method,
                        power_dbm,
                        ue,
                        mean_se,
                        std_se,
                        ci95: 1.96 * std_se / (n as f64).sqrt(),
                        realizations: n,
                    });
                }
            }
        }
        let mut r = SweepResult { rows };
        r.sort();
        r
    }
}

/// Runs every realization on `workers` threads. Results depend only on the
/// config, never on scheduling.
pub fn run_samples<T: Real>(config: &ScenarioConfig, workers: usize) -> Result<SweepSamples, SweepError> {
    let ctx = SweepContext::new(config)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| SweepError::Pool(e.to_string()))?;
    let outcomes: Vec<Result<_, SweepError>> =
        pool.install(|| (0..config.realizations).into_par_iter().map(|r| ctx.run_realization::<T>(r)).collect());
    // first failure in realization order, whatever finished first
    let metrics = outcomes.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(SweepSamples { methods: config.methods.clone(), power_dbm: config.power_sweep_dbm.clone(), metrics })
}

pub fn run_sweep<T: Real>(config: &ScenarioConfig, workers: usize) -> Result<SweepResult, SweepError> {
    Ok(run_samples::<T>(config, workers)?.aggregate())
}
