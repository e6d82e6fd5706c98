//! Scenario documents: JSON experiment manifests resolved into validated runs.
//!
//! A document names the analysis, the SNR grid and one base system; an
//! optional `schemes` list adds one run per entry, each overriding fields of
//! the base. Every default is filled in at parse time so the resolved
//! scenario can be echoed verbatim.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::channel::validate_gain_targets;
use crate::codebook::{binomial, spatial_bits};
use crate::config::{CellEdgeModel, Combining, PowerModel, Scheme, SystemConfig, DEFAULT_MIMO_NOMA_TX_ANTENNAS};
use crate::error::{Error, Result};
use crate::montecarlo::{ChannelMode, Metric, SweepSpec};

pub const DEFAULT_TRIALS: u64 = 100_000;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_BOUND_DRAWS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Analysis {
    #[default]
    Sweep,
    CapacityVsAntennas,
    Table1,
}

/// SNR points in dB: a single value, an explicit list, or an inclusive range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SnrGrid {
    Single(f64),
    List(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl SnrGrid {
    pub fn points(&self) -> Result<Vec<f64>> {
        match self {
            SnrGrid::Single(v) => Ok(vec![*v]),
            SnrGrid::List(v) => Ok(v.clone()),
            SnrGrid::Range { start, stop, step } => {
                if !(*step > 0.0 && step.is_finite() && start.is_finite() && stop.is_finite() && stop >= start) {
                    return Err(Error::Validation(format!(
                        "snr_db range needs finite start <= stop and step > 0, got {start}..{stop} step {step}"
                    )));
                }
                let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
                Ok((0..count).map(|i| start + step * i as f64).collect())
            }
        }
    }
}

/// System fields as written in a document; absent fields take defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFields {
    pub label: Option<String>,
    pub scheme: Option<Scheme>,
    pub m_t: Option<usize>,
    pub m_a: Option<usize>,
    pub m_r: Option<usize>,
    pub n_noma: Option<usize>,
    pub k_spatial: Option<usize>,
    pub total_power: Option<f64>,
    pub mod_order: Option<usize>,
    pub ftpa_beta: Option<f64>,
    pub gain_targets: Option<Vec<f64>>,
    pub power_model: Option<PowerModel>,
    pub cell_edge_model: Option<CellEdgeModel>,
    pub combining: Option<Combining>,
}

impl SystemFields {
    fn overlay(&self, over: &SystemFields) -> SystemFields {
        macro_rules! pick {
            ($($f:ident),*) => {
                SystemFields { $($f: over.$f.clone().or_else(|| self.$f.clone()),)* }
            };
        }
        pick!(
            label, scheme, m_t, m_a, m_r, n_noma, k_spatial, total_power, mod_order, ftpa_beta, gain_targets,
            power_model, cell_edge_model, combining
        )
    }

    fn resolve(&self) -> Result<SystemConfig> {
        let scheme = self
            .scheme
            .ok_or_else(|| Error::Validation("every run needs a `scheme`".into()))?;
        let need = |v: Option<usize>, name: &str| {
            v.ok_or_else(|| Error::Validation(format!("{scheme} needs `{name}`")))
        };
        let mut c = match scheme {
            Scheme::NomaGssk => SystemConfig::noma_gssk(need(self.m_t, "m_t")?, need(self.m_a, "m_a")?),
            Scheme::NomaSsk => SystemConfig::noma_ssk(need(self.m_t, "m_t")?),
            Scheme::MimoNoma => SystemConfig::mimo_noma(self.m_t.unwrap_or(DEFAULT_MIMO_NOMA_TX_ANTENNAS)),
        };
        if let Some(v) = self.m_a {
            c.m_a = v;
        }
        if let Some(v) = self.m_r {
            c.m_r = v;
        }
        if let Some(v) = self.n_noma {
            c.n_noma = v;
        }
        if let Some(v) = self.k_spatial {
            c.k_spatial = v;
        }
        if let Some(v) = self.total_power {
            c.total_power = v;
        }
        if let Some(v) = self.mod_order {
            c.mod_order = v;
        }
        if let Some(v) = self.ftpa_beta {
            c.ftpa_beta = v;
        }
        if let Some(v) = &self.gain_targets {
            c.gain_targets = Some(v.clone());
        }
        if let Some(v) = self.power_model {
            c.power_model = v;
        }
        if let Some(v) = self.cell_edge_model {
            c.cell_edge_model = v;
        }
        if let Some(v) = self.combining {
            c.combining = v;
        }
        Ok(c)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    name: String,
    #[serde(default)]
    analysis: Analysis,
    metric: Option<Metric>,
    snr_db: Option<SnrGrid>,
    trials: Option<u64>,
    seed: Option<u64>,
    #[serde(default)]
    channel_mode: ChannelMode,
    #[serde(default)]
    system: SystemFields,
    #[serde(default)]
    schemes: Vec<SystemFields>,
    m_t_grid: Option<Vec<usize>>,
    bound_draws: Option<usize>,
    output: Option<PathBuf>,
    format: Option<OutputFormat>,
}

/// One resolved system with its codebook size echoed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeRun {
    pub label: String,
    pub config: SystemConfig,
    pub n_h: Option<usize>,
    pub b_h: Option<usize>,
}

impl SchemeRun {
    fn new(label: Option<String>, mut config: SystemConfig) -> Self {
        config.gain_targets = Some(config.effective_gain_targets());
        let (n_h, b_h) = if config.scheme.is_spatial() && config.m_a >= 1 && config.m_a <= config.m_t {
            let b = spatial_bits(config.m_t, config.m_a);
            (Some(1usize << b), Some(b))
        } else {
            (None, None)
        };
        Self {
            label: label.unwrap_or_else(|| config.scheme.name().to_string()),
            config,
            n_h,
            b_h,
        }
    }
}

/// A fully resolved, validated scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub analysis: Analysis,
    pub metric: Option<Metric>,
    pub snr_grid_db: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    pub channel_mode: ChannelMode,
    pub runs: Vec<SchemeRun>,
    pub m_t_grid: Vec<usize>,
    pub bound_draws: usize,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
}

/// Parses and validates a scenario document.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let file: ScenarioFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let runs = if file.analysis == Analysis::Table1 {
        Vec::new()
    } else if file.schemes.is_empty() {
        vec![SchemeRun::new(file.system.label.clone(), file.system.resolve()?)]
    } else {
        file.schemes
            .iter()
            .map(|s| {
                let merged = file.system.overlay(s);
                Ok(SchemeRun::new(merged.label.clone(), merged.resolve()?))
            })
            .collect::<Result<Vec<_>>>()?
    };
    let format = file.format.unwrap_or_else(|| match &file.output {
        Some(p) if p.extension().is_some_and(|e| e == "json") => OutputFormat::Json,
        _ => OutputFormat::Csv,
    });
    let scenario = Scenario {
        name: file.name,
        analysis: file.analysis,
        metric: match file.analysis {
            Analysis::CapacityVsAntennas => Some(file.metric.unwrap_or(Metric::CapacityVsAntennas)),
            _ => file.metric,
        },
        snr_grid_db: match &file.snr_db {
            Some(g) => g.points()?,
            None => Vec::new(),
        },
        trials: file.trials.unwrap_or(DEFAULT_TRIALS),
        seed: file.seed.unwrap_or(DEFAULT_SEED),
        channel_mode: file.channel_mode,
        runs,
        m_t_grid: file.m_t_grid.unwrap_or_default(),
        bound_draws: file.bound_draws.unwrap_or(DEFAULT_BOUND_DRAWS),
        output: file.output,
        format,
    };
    scenario.validate()?;
    Ok(scenario)
}

fn invariant(e: Error) -> Error {
    match e {
        Error::Validation(_) => e,
        other => Error::Validation(other.to_string()),
    }
}

impl Scenario {
    /// Checks every invariant; failures are reported as [`Error::Validation`].
    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::Validation("name must be non-empty".into()));
        }
        if self.analysis == Analysis::Table1 {
            return Ok(());
        }
        if self.trials == 0 {
            return Err(Error::Validation("trials must be positive".into()));
        }
        for run in &self.runs {
            if run.config.m_a == 0 || run.config.m_a > run.config.m_t {
                return Err(Error::Validation(format!(
                    "{}: m_a <= m_t violated (m_a={}, m_t={})",
                    run.label, run.config.m_a, run.config.m_t
                )));
            }
        }
        match self.analysis {
            Analysis::Sweep => {
                let metric = self
                    .metric
                    .ok_or_else(|| Error::Validation("sweep analysis needs `metric`".into()))?;
                if metric == Metric::CapacityVsAntennas {
                    return Err(Error::Validation(
                        "metric capacity_vs_antennas needs analysis capacity_vs_antennas".into(),
                    ));
                }
                for spec in self.sweep_specs() {
                    spec.1.validate().map_err(invariant)?;
                }
            }
            Analysis::CapacityVsAntennas => {
                if self.snr_grid_db.is_empty() || self.snr_grid_db.iter().any(|s| !s.is_finite()) {
                    return Err(Error::Validation("snr_db must hold at least one finite value".into()));
                }
                if self.m_t_grid.is_empty() {
                    return Err(Error::Validation("capacity analysis needs a non-empty `m_t_grid`".into()));
                }
                if self.bound_draws == 0 {
                    return Err(Error::Validation("bound_draws must be positive".into()));
                }
                for run in &self.runs {
                    let c = &run.config;
                    if c.n_noma < 3 {
                        return Err(Error::Validation(format!(
                            "{}: closed-form capacity needs n_noma >= 3, got {}",
                            run.label, c.n_noma
                        )));
                    }
                    for &m_t in &self.m_t_grid {
                        if c.m_a > m_t {
                            return Err(Error::Validation(format!(
                                "{}: m_a <= m_t violated on the grid (m_a={}, m_t={m_t})",
                                run.label, c.m_a
                            )));
                        }
                    }
                    let probe = SystemConfig {
                        scheme: Scheme::NomaGssk,
                        m_t: self.m_t_grid.iter().copied().max().unwrap_or(c.m_t),
                        k_spatial: c.k_spatial.max(1),
                        ..c.clone()
                    };
                    if binomial(probe.m_t, probe.m_a) >= 2 {
                        validate_gain_targets(&probe, &probe.effective_gain_targets()).map_err(invariant)?;
                    }
                }
            }
            Analysis::Table1 => {}
        }
        Ok(())
    }

    /// One sweep specification per run.
    pub fn sweep_specs(&self) -> Vec<(String, SweepSpec)> {
        self.runs
            .iter()
            .map(|run| {
                (
                    run.label.clone(),
                    SweepSpec {
                        config: run.config.clone(),
                        snr_grid_db: self.snr_grid_db.clone(),
                        trials_per_point: self.trials,
                        master_seed: self.seed,
                        metric: self.metric.unwrap_or(Metric::CellEdgeBer),
                        channel_mode: self.channel_mode,
                    },
                )
            })
            .collect()
    }

    /// Applies command-line overrides and revalidates.
    pub fn apply_overrides(
        &mut self,
        seed: Option<u64>,
        trials: Option<u64>,
        output: Option<PathBuf>,
        format: Option<OutputFormat>,
    ) -> Result<()> {
        if let Some(s) = seed {
            self.seed = s;
        }
        if let Some(t) = trials {
            self.trials = t;
        }
        if let Some(o) = output {
            self.output = Some(o);
        }
        if let Some(f) = format {
            self.format = f;
        }
        self.validate()
    }

    /// The resolved scenario as pretty JSON, defaults included.
    pub fn echo(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }
}
