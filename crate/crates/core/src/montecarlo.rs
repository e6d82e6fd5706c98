//! Seeded Monte Carlo campaigns: cell-edge BER, spectral efficiency, energy
//! efficiency, and closed-form capacity against the antenna count.
//!
//! Every trial draws from its own ChaCha stream keyed by
//! `(master_seed, point index, trial index)`. Trials run in fixed-size
//! batches whose partial sums are reduced in batch order, so results are
//! bit-identical for any number of worker threads.

use std::time::Instant;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{self, CapacityReport};
use crate::channel::{apply_channel, sample_user_channels, validate_gain_targets, NoiseSpec, UserChannel};
use crate::codebook::{binomial, build_codebook, spatial_bits, AntennaSetCodebook};
use crate::config::{CellEdgeModel, Scheme, SystemConfig};
use crate::error::{Error, Result};
use crate::power::{energy_spent_alphas, superpose, PowerPlan};
use crate::receivers::{SetDetector, SicDetector};
use crate::transmit::{place_on_set, TransmitVector};

const BATCH: u64 = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    CellEdgeBer,
    SpectralEfficiency,
    EnergyEfficiency,
    CapacityVsAntennas,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::CellEdgeBer => "cell_edge_ber",
            Metric::SpectralEfficiency => "spectral_efficiency",
            Metric::EnergyEfficiency => "energy_efficiency",
            Metric::CapacityVsAntennas => "capacity_vs_antennas",
        }
    }
}

/// Whether each trial draws fresh channels or all trials share one realization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ChannelMode {
    #[default]
    PerTrial,
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub config: SystemConfig,
    pub snr_grid_db: Vec<f64>,
    pub trials_per_point: u64,
    pub master_seed: u64,
    pub metric: Metric,
    #[serde(default)]
    pub channel_mode: ChannelMode,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        validate_gain_targets(&self.config, &self.config.effective_gain_targets())?;
        if self.snr_grid_db.is_empty() {
            return Err(Error::InvalidConfig("empty SNR grid".into()));
        }
        if self.snr_grid_db.iter().any(|s| !s.is_finite()) || self.snr_grid_db.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(format!(
                "SNR grid must be finite and strictly increasing: {:?}",
                self.snr_grid_db
            )));
        }
        if self.trials_per_point == 0 {
            return Err(Error::InvalidConfig("trials_per_point must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub snr_db: f64,
    pub value: f64,
    pub stderr: f64,
    pub trials: u64,
    /// Bits counted for BER points, zero otherwise.
    #[serde(default)]
    pub bits: u64,
    /// Bit error rate of each power-domain user that is not the cell-edge user.
    #[serde(default)]
    pub noma_ber: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub scheme: Scheme,
    pub metric: Metric,
    pub config: SystemConfig,
    pub seed: u64,
    pub channel_mode: ChannelMode,
    pub wall_time_s: f64,
    pub points: Vec<SweepPoint>,
}

/// Independent stream for one `(point, trial)` pair.
pub fn trial_rng(master_seed: u64, point: u64, trial: u64) -> ChaCha8Rng {
    stream_rng(master_seed, point, trial, 0)
}

fn stream_rng(master_seed: u64, point: u64, trial: u64, domain: u64) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    seed[..8].copy_from_slice(&master_seed.to_le_bytes());
    seed[8..16].copy_from_slice(&point.to_le_bytes());
    seed[16..24].copy_from_slice(&trial.to_le_bytes());
    seed[24..].copy_from_slice(&domain.to_le_bytes());
    ChaCha8Rng::from_seed(seed)
}

/// The channel realization shared by every trial in [`ChannelMode::Fixed`].
pub fn fixed_channels(spec: &SweepSpec) -> Result<Vec<UserChannel>> {
    let mut rng = stream_rng(spec.master_seed, u64::MAX, u64::MAX, 1);
    sample_user_channels(&spec.config, &spec.config.effective_gain_targets(), &mut rng)
}

/// SNR seen by the cell-edge set detector: the radiated share of the total power.
pub fn cell_edge_snr(config: &SystemConfig, snr_linear: f64) -> Result<f64> {
    let plan = PowerPlan::for_config(config)?;
    Ok(snr_linear * plan.radiated_power / config.total_power)
}

#[derive(Debug, Clone, Default)]
struct Tally {
    edge_errors: u64,
    edge_bits: u64,
    noma_errors: Vec<u64>,
    noma_bits: Vec<u64>,
    sum: f64,
    sum_sq: f64,
    trials: u64,
}

impl Tally {
    fn merge(&mut self, other: &Tally) {
        self.edge_errors += other.edge_errors;
        self.edge_bits += other.edge_bits;
        if self.noma_errors.len() < other.noma_errors.len() {
            self.noma_errors.resize(other.noma_errors.len(), 0);
            self.noma_bits.resize(other.noma_bits.len(), 0);
        }
        for (i, (e, b)) in other.noma_errors.iter().zip(&other.noma_bits).enumerate() {
            self.noma_errors[i] += e;
            self.noma_bits[i] += b;
        }
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        self.trials += other.trials;
    }
}

/// Everything a trial needs that does not change within one SNR point.
struct Link {
    config: SystemConfig,
    gains: Vec<f64>,
    plan: PowerPlan,
    amplitudes: Vec<f64>,
    codebook: Option<AntennaSetCodebook>,
    sic: SicDetector,
    payloads: Vec<Complex64>,
    noise: NoiseSpec,
    edge_snr: f64,
    fixed: Option<Vec<UserChannel>>,
}

struct TrialOutcome {
    edge_errors: u64,
    edge_bits: u64,
    noma_errors: Vec<u64>,
    bits_per_symbol: u64,
}

impl Link {
    fn new(spec: &SweepSpec, snr_db: f64) -> Result<Self> {
        let config = spec.config.clone();
        let plan = PowerPlan::for_config(&config)?;
        let codebook = if config.scheme.is_spatial() {
            Some(build_codebook(config.m_t, config.m_a)?)
        } else {
            None
        };
        let sic = SicDetector::new(&plan.layers, plan.radiated_power, config.mod_order, config.combining)?;
        let payloads = sic.superposed_points();
        let noise = NoiseSpec::from_snr_db(snr_db, config.total_power)?;
        let edge_snr = noise.snr_linear * plan.radiated_power / config.total_power;
        let fixed = match spec.channel_mode {
            ChannelMode::Fixed => Some(fixed_channels(spec)?),
            ChannelMode::PerTrial => None,
        };
        Ok(Self {
            gains: config.effective_gain_targets(),
            amplitudes: plan.layer_amplitudes(),
            config,
            plan,
            codebook,
            sic,
            payloads,
            noise,
            edge_snr,
            fixed,
        })
    }

    fn channels<R: Rng>(&self, rng: &mut R) -> Result<Vec<UserChannel>> {
        match &self.fixed {
            Some(ch) => Ok(ch.clone()),
            None => sample_user_channels(&self.config, &self.gains, rng),
        }
    }

    /// Channel from the superposed symbol to a receiver for the chosen transmit layout.
    fn symbol_channel(&self, ch: &UserChannel, set: Option<usize>) -> Result<DVector<Complex64>> {
        let direction = match (set, &self.codebook) {
            (Some(j), Some(cb)) => place_on_set(Complex64::new(1.0, 0.0), j, cb, self.config.m_t)?,
            _ => TransmitVector::broadcast(Complex64::new(1.0, 0.0), self.config.m_t),
        };
        ch.response(&direction)
    }

    /// Bit positions of the spatial label delivered to edge user `k`.
    fn edge_share(&self, k: usize, b_h: usize) -> impl Iterator<Item = usize> {
        let users = self.config.k_spatial.max(1);
        (0..b_h).filter(move |p| p % users == k)
    }

    /// Decides the antenna set at one cell-edge user.
    fn detect_edge_set<R: Rng>(
        &self,
        ch: &UserChannel,
        set: usize,
        tx: &TransmitVector,
        rng: &mut R,
    ) -> Result<usize> {
        let cb = self.codebook.as_ref().expect("spatial scheme");
        let det = SetDetector::new(cb, ch)?;
        match self.config.cell_edge_model {
            CellEdgeModel::ConstantEnvelope => {
                let signature = place_on_set(Complex64::new(self.plan.radiated_power.sqrt(), 0.0), set, cb, self.config.m_t)?;
                let y = apply_channel(&signature, ch, &self.noise, rng)? * Complex64::new(self.noise.unit_scale(), 0.0);
                Ok(det.detect(&y, self.edge_snr)?.set_index)
            }
            CellEdgeModel::SuperposedPayload => {
                let y = apply_channel(tx, ch, &self.noise, rng)?;
                Ok(det.detect_joint(&y, &self.payloads)?.0.set_index)
            }
        }
    }

    fn ber_trial<R: Rng>(&self, rng: &mut R) -> Result<TrialOutcome> {
        let chans = self.channels(rng)?;
        let n = self.config.n_noma;
        let m = self.config.mod_order;
        let bps = self.config.bits_per_symbol() as u64;
        let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..m)).collect();
        let cons = self.sic.constellation();
        let symbols: Vec<Complex64> = labels.iter().map(|&l| cons.point(l)).collect();
        let x = superpose(&symbols, &self.plan.layers, self.plan.radiated_power)?.value;
        let set = self.codebook.as_ref().map(|cb| rng.random_range(0..cb.n_h()));
        let tx = match (set, &self.codebook) {
            (Some(j), Some(cb)) => place_on_set(x, j, cb, self.config.m_t)?,
            _ => TransmitVector::broadcast(x, self.config.m_t),
        };

        let mut noma_errors = Vec::with_capacity(n);
        let mut edge_errors = 0u64;
        let mut edge_bits = 0u64;
        for (i, ch) in chans.iter().take(n).enumerate() {
            let y = apply_channel(&tx, ch, &self.noise, rng)?;
            let decided_set = match &self.codebook {
                Some(cb) => Some(SetDetector::new(cb, ch)?.detect_joint(&y, &self.payloads)?.0.set_index),
                None => None,
            };
            let h = self.symbol_channel(ch, decided_set)?;
            let trace = self.sic.detect(&y, &h, i + 1)?;
            let errors = (trace.own_label ^ labels[i]).count_ones() as u64;
            if !self.config.scheme.is_spatial() && i + 1 == n {
                edge_errors += errors;
                edge_bits += bps;
            } else {
                noma_errors.push(errors);
            }
        }
        if let (Some(j), Some(cb)) = (set, &self.codebook) {
            for (k, ch) in chans.iter().skip(n).enumerate() {
                let decided = self.detect_edge_set(ch, j, &tx, rng)?;
                let wrong = decided ^ j;
                for p in self.edge_share(k, cb.b_h()) {
                    edge_errors += ((wrong >> (cb.b_h() - 1 - p)) & 1) as u64;
                    edge_bits += 1;
                }
            }
        }
        Ok(TrialOutcome {
            edge_errors,
            edge_bits,
            noma_errors,
            bits_per_symbol: bps,
        })
    }

    /// Empirical sum rate of one trial: SIC-ordered Shannon rates of the
    /// power-domain layers plus the spatial bits delivered without set error.
    fn se_trial<R: Rng>(&self, rng: &mut R) -> Result<f64> {
        let chans = self.channels(rng)?;
        let n = self.config.n_noma;
        let set = self.codebook.as_ref().map(|cb| rng.random_range(0..cb.n_h()));
        let mut rate = 0.0;
        for (i, ch) in chans.iter().take(n).enumerate() {
            let h = self.symbol_channel(ch, set)?;
            let g: f64 = h.iter().map(|v| v.norm_sqr()).sum();
            let own = self.amplitudes[i].powi(2) * g;
            let interference: f64 = self.amplitudes[..i].iter().map(|a| a * a * g).sum();
            rate += (1.0 + own / (interference + self.noise.variance)).log2();
        }
        if let (Some(j), Some(cb)) = (set, &self.codebook) {
            // the payload only matters to the joint detector
            let tx = place_on_set(Complex64::new(self.plan.radiated_power.sqrt(), 0.0), j, cb, self.config.m_t)?;
            for (k, ch) in chans.iter().skip(n).enumerate() {
                let decided = self.detect_edge_set(ch, j, &tx, rng)?;
                if decided == j {
                    rate += self.edge_share(k, cb.b_h()).count() as f64;
                }
            }
        }
        Ok(rate)
    }
}

fn run_batches<F>(spec: &SweepSpec, point: u64, trial_fn: F) -> Result<Tally>
where
    F: Fn(&mut ChaCha8Rng, &mut Tally) -> Result<()> + Sync,
{
    let batches = spec.trials_per_point.div_ceil(BATCH);
    let partials: Vec<Result<Tally>> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut tally = Tally::default();
            let start = b * BATCH;
            let end = (start + BATCH).min(spec.trials_per_point);
            for t in start..end {
                let mut rng = trial_rng(spec.master_seed, point, t);
                trial_fn(&mut rng, &mut tally)?;
                tally.trials += 1;
            }
            Ok(tally)
        })
        .collect();
    let mut total = Tally::default();
    for p in partials {
        total.merge(&p?);
    }
    Ok(total)
}

fn finish(spec: &SweepSpec, started: Instant, points: Vec<SweepPoint>) -> SweepResult {
    SweepResult {
        scheme: spec.config.scheme,
        metric: spec.metric,
        config: spec.config.clone(),
        seed: spec.master_seed,
        channel_mode: spec.channel_mode,
        wall_time_s: started.elapsed().as_secs_f64(),
        points,
    }
}

fn require_metric(spec: &SweepSpec, metric: Metric) -> Result<()> {
    if spec.metric != metric {
        return Err(Error::ConfigMismatch(format!(
            "spec asks for {}, runner computes {}",
            spec.metric.name(),
            metric.name()
        )));
    }
    spec.validate()
}

/// Cell-edge bit error rate against SNR.
pub fn run_ber_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    require_metric(spec, Metric::CellEdgeBer)?;
    let started = Instant::now();
    let mut points = Vec::with_capacity(spec.snr_grid_db.len());
    for (pi, &snr_db) in spec.snr_grid_db.iter().enumerate() {
        let link = Link::new(spec, snr_db)?;
        let tally = run_batches(spec, pi as u64, |rng, tally| {
            let out = link.ber_trial(rng)?;
            tally.edge_errors += out.edge_errors;
            tally.edge_bits += out.edge_bits;
            if tally.noma_errors.len() < out.noma_errors.len() {
                tally.noma_errors.resize(out.noma_errors.len(), 0);
                tally.noma_bits.resize(out.noma_errors.len(), 0);
            }
            for (i, e) in out.noma_errors.iter().enumerate() {
                tally.noma_errors[i] += e;
                tally.noma_bits[i] += out.bits_per_symbol;
            }
            Ok(())
        })?;
        let bits = tally.edge_bits.max(1) as f64;
        let p = tally.edge_errors as f64 / bits;
        points.push(SweepPoint {
            snr_db,
            value: p,
            stderr: (p * (1.0 - p) / bits).sqrt(),
            trials: tally.trials,
            bits: tally.edge_bits,
            noma_ber: tally
                .noma_errors
                .iter()
                .zip(&tally.noma_bits)
                .map(|(&e, &b)| e as f64 / b.max(1) as f64)
                .collect(),
        });
    }
    Ok(finish(spec, started, points))
}

fn rate_points(spec: &SweepSpec, scale: f64) -> Result<Vec<SweepPoint>> {
    let mut points = Vec::with_capacity(spec.snr_grid_db.len());
    for (pi, &snr_db) in spec.snr_grid_db.iter().enumerate() {
        let link = Link::new(spec, snr_db)?;
        let tally = run_batches(spec, pi as u64, |rng, tally| {
            let r = link.se_trial(rng)?;
            tally.sum += r;
            tally.sum_sq += r * r;
            Ok(())
        })?;
        let n = tally.trials as f64;
        let mean = tally.sum / n;
        let var = if tally.trials > 1 {
            ((tally.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        points.push(SweepPoint {
            snr_db,
            value: mean * scale,
            stderr: (var / n).sqrt() * scale,
            trials: tally.trials,
            bits: 0,
            noma_ber: Vec::new(),
        });
    }
    Ok(points)
}

/// Empirical sum rate (bit/s/Hz) against SNR.
pub fn run_se_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    require_metric(spec, Metric::SpectralEfficiency)?;
    let started = Instant::now();
    let points = rate_points(spec, 1.0)?;
    Ok(finish(spec, started, points))
}

/// Empirical sum rate per unit of spent power against SNR.
pub fn run_ee_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    require_metric(spec, Metric::EnergyEfficiency)?;
    let started = Instant::now();
    let plan = PowerPlan::for_config(&spec.config)?;
    let spent = energy_spent_alphas(&spec.config, &plan);
    let scale = analysis::energy_efficiency(1.0, &spent, spec.config.total_power)?;
    let points = rate_points(spec, scale)?;
    Ok(finish(spec, started, points))
}

/// Dispatches on `spec.metric`.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    match spec.metric {
        Metric::CellEdgeBer => run_ber_sweep(spec),
        Metric::SpectralEfficiency => run_se_sweep(spec),
        Metric::EnergyEfficiency => run_ee_sweep(spec),
        Metric::CapacityVsAntennas => Err(Error::ConfigMismatch(
            "capacity against antennas is not an SNR sweep; use run_capacity_vs_antennas".into(),
        )),
    }
}

/// One closed-form row of the capacity-versus-antennas table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityRow {
    pub m_t: usize,
    pub scheme: Scheme,
    pub rate_bps: f64,
    pub energy_eff: f64,
    pub spatial_bits: usize,
    pub p_e: f64,
}

/// Closed-form capacities for every `m_t` in the grid. `P_e` comes from the
/// union bound of the NOMA-GSSK codebook `(m_t, config.m_a)`, averaged over
/// `bound_draws` cell-edge channel realizations, and is shared by the
/// spatial terms of both NOMA-SSK and NOMA-GSSK. Where `C(m_t, m_a) < 2`
/// NOMA-GSSK falls back to a single active antenna, which is NOMA-SSK.
pub fn run_capacity_vs_antennas(
    config: &SystemConfig,
    snr_linear: f64,
    m_t_grid: &[usize],
    bound_draws: usize,
    seed: u64,
) -> Result<Vec<CapacityRow>> {
    if !(snr_linear > 0.0 && snr_linear.is_finite()) {
        return Err(Error::InvalidSnr(snr_linear));
    }
    let n = config.n_noma;
    let k = config.k_spatial.max(1);
    let gains: Vec<f64> = {
        let g = SystemConfig {
            k_spatial: k,
            scheme: Scheme::NomaGssk,
            ..config.clone()
        }
        .effective_gain_targets();
        g.iter().map(|v| v * v).collect()
    };
    let alphas = crate::power::ftpa_allocate(&gains, config.ftpa_beta)?;
    let mut rows = Vec::with_capacity(3 * m_t_grid.len());
    for (gi, &m_t) in m_t_grid.iter().enumerate() {
        if m_t == 0 || config.m_a == 0 || config.m_a > m_t {
            return Err(Error::InvalidAntennaConfig(format!(
                "m_t={m_t} cannot host m_a={} active antennas",
                config.m_a
            )));
        }
        let m_a = if binomial(m_t, config.m_a) >= 2 { config.m_a } else { 1 };
        let p_e = if binomial(m_t, m_a) >= 2 {
            let cb = build_codebook(m_t, m_a)?;
            let bound_cfg = SystemConfig {
                scheme: Scheme::NomaGssk,
                m_t,
                m_a,
                k_spatial: k,
                gain_targets: None,
                ..config.clone()
            };
            let mut rng = stream_rng(seed, gi as u64, 0, 2);
            analysis::fading_averaged_bound(&bound_cfg, &cb, snr_linear, bound_draws, &mut rng)?
        } else {
            0.0
        };
        let report = CapacityReport::evaluate(snr_linear, n, k, m_t, m_t, m_a, p_e, alphas.alphas(), config.total_power)?;
        let ssk_bits = (m_t as f64).log2().floor() as usize;
        for (scheme, rate, ee, bits) in [
            (Scheme::MimoNoma, report.rate_mimo_noma, report.ee_mimo_noma, 0),
            (Scheme::NomaSsk, report.rate_noma_ssk, report.ee_noma_ssk, ssk_bits),
            (Scheme::NomaGssk, report.rate_noma_gssk, report.ee_noma_gssk, spatial_bits(m_t, m_a)),
        ] {
            rows.push(CapacityRow {
                m_t,
                scheme,
                rate_bps: rate,
                energy_eff: ee,
                spatial_bits: bits,
                p_e,
            });
        }
    }
    Ok(rows)
}
