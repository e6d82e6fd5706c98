//! Rayleigh flat-fading user channels and the AWGN link `y = H x + n`.
//!
//! SNR convention: for a radiated power `P` and linear SNR `snr`, the noise is
//! circularly-symmetric complex Gaussian with `E|n|^2 = P / (2 snr)`. Under
//! this convention the pairwise error probability between two unit-power
//! hypotheses at distance `d` is `Q(sqrt(snr) d)`, which is the argument used
//! by the union bound in [`crate::analysis`].

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::transmit::TransmitVector;

pub const CELL_CENTER_MIN_GAIN: f64 = 0.6;
pub const CELL_EDGE_MAX_GAIN: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainClass {
    CellCenter,
    CellEdge,
}

impl GainClass {
    pub fn classify(gain: f64) -> Option<Self> {
        if (CELL_CENTER_MIN_GAIN..=1.0).contains(&gain) {
            Some(GainClass::CellCenter)
        } else if gain > 0.0 && gain <= CELL_EDGE_MAX_GAIN {
            Some(GainClass::CellEdge)
        } else {
            None
        }
    }
}

/// `m_r x m_t` channel of one user.
#[derive(Debug, Clone, PartialEq)]
pub struct UserChannel {
    pub matrix: DMatrix<Complex64>,
    pub gain_class: GainClass,
    /// RMS magnitude the entries were drawn with.
    pub avg_gain: f64,
}

impl UserChannel {
    pub fn new(matrix: DMatrix<Complex64>, avg_gain: f64) -> Result<Self> {
        let gain_class = GainClass::classify(avg_gain).ok_or_else(|| {
            Error::InvalidGainTargets(format!(
                "gain {avg_gain} is neither cell-center (>= 0.6) nor cell-edge (<= 0.4)"
            ))
        })?;
        if matrix.iter().any(|h| !h.re.is_finite() || !h.im.is_finite()) {
            return Err(Error::DimensionMismatch("channel has non-finite entries".into()));
        }
        Ok(Self {
            matrix,
            gain_class,
            avg_gain,
        })
    }

    pub fn m_r(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn m_t(&self) -> usize {
        self.matrix.ncols()
    }

    /// Received signal direction for a transmit vector, `H x`.
    pub fn response(&self, tx: &TransmitVector) -> Result<DVector<Complex64>> {
        if tx.len() != self.m_t() {
            return Err(Error::DimensionMismatch(format!(
                "transmit vector has {} entries, channel has {} columns",
                tx.len(),
                self.m_t()
            )));
        }
        Ok(&self.matrix * &tx.entries)
    }
}

/// Noise level of the link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// `E|n|^2` per complex receive entry.
    pub variance: f64,
    pub snr_linear: f64,
}

impl NoiseSpec {
    pub fn from_snr(snr_linear: f64, total_power: f64) -> Result<Self> {
        if !(snr_linear > 0.0 && snr_linear.is_finite()) {
            return Err(Error::InvalidSnr(snr_linear));
        }
        Ok(Self {
            variance: total_power / (2.0 * snr_linear),
            snr_linear,
        })
    }

    pub fn from_snr_db(snr_db: f64, total_power: f64) -> Result<Self> {
        Self::from_snr(10f64.powf(snr_db / 10.0), total_power)
    }

    /// Noiseless link, used for the zero-noise limit.
    pub fn silent() -> Self {
        Self {
            variance: 0.0,
            snr_linear: f64::INFINITY,
        }
    }

    /// Scale that maps a received vector onto units where a signal of power
    /// `p` appears with amplitude `sqrt(snr * p / P)`.
    pub fn unit_scale(&self) -> f64 {
        (2.0 * self.variance).sqrt().recip()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        let sd = (self.variance / 2.0).sqrt();
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re * sd, im * sd)
    }
}

/// Draws a standard circularly-symmetric complex Gaussian, `E|z|^2 = 1`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn check_gain_targets(config: &SystemConfig, gain_targets: &[f64]) -> Result<()> {
    if gain_targets.len() != config.total_users() {
        return Err(Error::InvalidGainTargets(format!(
            "expected {} targets, got {}",
            config.total_users(),
            gain_targets.len()
        )));
    }
    if gain_targets.iter().any(|&g| !(g > 0.0 && g <= 1.0)) {
        return Err(Error::InvalidGainTargets(format!(
            "targets must lie in (0, 1]: {gain_targets:?}"
        )));
    }
    if gain_targets.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::InvalidGainTargets(format!(
            "targets must be non-increasing: {gain_targets:?}"
        )));
    }
    let edge_from = config.total_users() - config.edge_users();
    for (i, &g) in gain_targets.iter().enumerate() {
        let expected = if i >= edge_from {
            GainClass::CellEdge
        } else {
            GainClass::CellCenter
        };
        if GainClass::classify(g) != Some(expected) {
            return Err(Error::InvalidGainTargets(format!(
                "user {} with gain {g} should be {expected:?}",
                i + 1
            )));
        }
    }
    Ok(())
}

/// Checks gain targets against the user layout of `config`.
pub fn validate_gain_targets(config: &SystemConfig, gain_targets: &[f64]) -> Result<()> {
    check_gain_targets(config, gain_targets)
}

/// One `m_r x m_t` Rayleigh channel per user, strongest first. Entries are
/// `CN(0, g^2)` so their RMS magnitude equals the user's gain target.
pub fn sample_user_channels<R: Rng + ?Sized>(
    config: &SystemConfig,
    gain_targets: &[f64],
    rng: &mut R,
) -> Result<Vec<UserChannel>> {
    check_gain_targets(config, gain_targets)?;
    gain_targets
        .iter()
        .map(|&g| {
            let matrix = DMatrix::from_fn(config.m_r, config.m_t, |_, _| complex_gaussian(rng) * g);
            UserChannel::new(matrix, g)
        })
        .collect()
}

/// `y = H x + n`.
pub fn apply_channel<R: Rng + ?Sized>(
    tx: &TransmitVector,
    ch: &UserChannel,
    noise: &NoiseSpec,
    rng: &mut R,
) -> Result<DVector<Complex64>> {
    let mut y = ch.response(tx)?;
    if noise.variance > 0.0 {
        for v in y.iter_mut() {
            *v += noise.sample(rng);
        }
    }
    Ok(y)
}

/// Sum of the channel columns named by `antenna_set` (1-based indices).
pub fn effective_channel(ch: &UserChannel, antenna_set: &[usize]) -> Result<DVector<Complex64>> {
    let mut eff = DVector::from_element(ch.m_r(), Complex64::new(0.0, 0.0));
    for &a in antenna_set {
        if a == 0 || a > ch.m_t() {
            return Err(Error::IndexOutOfRange {
                index: a,
                limit: ch.m_t(),
            });
        }
        eff += ch.matrix.column(a - 1);
    }
    Ok(eff)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cfg(m_r: usize, m_t: usize) -> SystemConfig {
        SystemConfig {
            m_r,
            ..SystemConfig::noma_gssk(m_t, 1)
        }
    }

    #[test]
    fn rejects_bad_targets() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let c = cfg(2, 4);
        for bad in [vec![1.0, 0.8, 0.0], vec![0.8, 1.0, 0.4], vec![1.0, 0.8], vec![1.0, 0.5, 0.4], vec![1.0, 0.8, 0.7]] {
            assert!(matches!(
                sample_user_channels(&c, &bad, &mut rng),
                Err(Error::InvalidGainTargets(_))
            ));
        }
    }

    #[test]
    fn fixed_seed_reproduces_channels() {
        let c = cfg(4, 5);
        let g = c.effective_gain_targets();
        let a = sample_user_channels(&c, &g, &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
        let b = sample_user_channels(&c, &g, &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[2].gain_class, GainClass::CellEdge);
        assert_eq!(a[0].gain_class, GainClass::CellCenter);
    }

    #[test]
    fn unit_gain_entries_have_unit_power() {
        let c = SystemConfig {
            gain_targets: Some(vec![1.0, 1.0, 0.4]),
            ..cfg(4, 8)
        };
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut acc = 0.0;
        let mut n = 0usize;
        while n < 200_000 {
            let chans = sample_user_channels(&c, &[1.0, 1.0, 0.4], &mut rng).unwrap();
            acc += chans[0].matrix.iter().map(|h| h.norm_sqr()).sum::<f64>();
            n += chans[0].matrix.len();
        }
        let mean = acc / n as f64;
        assert!((mean - 1.0).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn noiseless_identity_channel() {
        let ch = UserChannel::new(
            DMatrix::from_row_slice(1, 2, &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]),
            1.0,
        )
        .unwrap();
        let tx = TransmitVector {
            entries: DVector::from_vec(vec![Complex64::new(2.0, 0.0), Complex64::new(0.0, 0.0)]),
            active_set_index: Some(0),
        };
        let y = apply_channel(&tx, &ch, &NoiseSpec::silent(), &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(y[0], Complex64::new(2.0, 0.0));

        let short = TransmitVector::broadcast(Complex64::new(1.0, 0.0), 3);
        assert!(matches!(
            apply_channel(&short, &ch, &NoiseSpec::silent(), &mut ChaCha8Rng::seed_from_u64(1)),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn zero_input_gives_noise_of_requested_variance() {
        let ch = UserChannel::new(DMatrix::from_element(1, 2, Complex64::new(0.5, 0.1)), 0.4).unwrap();
        let tx = TransmitVector::broadcast(Complex64::new(0.0, 0.0), 2);
        let noise = NoiseSpec::from_snr(2.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 200_000;
        let acc: f64 = (0..n)
            .map(|_| apply_channel(&tx, &ch, &noise, &mut rng).unwrap()[0].norm_sqr())
            .sum();
        let var = acc / n as f64;
        assert!((var - 0.25).abs() < 0.01 * 0.25 * 3.0, "variance {var}");
    }

    #[test]
    fn effective_channel_sums_columns() {
        let m = DMatrix::from_fn(2, 3, |r, c| Complex64::new(r as f64 + 1.0, c as f64));
        let ch = UserChannel::new(m, 1.0).unwrap();
        let e2 = effective_channel(&ch, &[2]).unwrap();
        assert_eq!(e2, ch.matrix.column(1).into_owned());
        let e12 = effective_channel(&ch, &[1, 2]).unwrap();
        assert_eq!(e12, ch.matrix.column(0) + ch.matrix.column(1));
        let e3 = effective_channel(&ch, &[3]).unwrap();
        assert_eq!(effective_channel(&ch, &[1, 2, 3]).unwrap(), e12 + e3);
        assert!(matches!(
            effective_channel(&ch, &[4]),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            effective_channel(&ch, &[0]),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn noiseless_link_is_linear() {
        let c = cfg(3, 4);
        let g = c.effective_gain_targets();
        let chans = sample_user_channels(&c, &g, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let tx = TransmitVector::broadcast(Complex64::new(0.4, -1.1), 4);
        let a = Complex64::new(-2.0, 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let y = apply_channel(&tx, &chans[1], &NoiseSpec::silent(), &mut rng).unwrap();
        let ya = apply_channel(&tx.scaled(a), &chans[1], &NoiseSpec::silent(), &mut rng).unwrap();
        assert!((ya - y * a).norm() < 1e-12);
    }
}
