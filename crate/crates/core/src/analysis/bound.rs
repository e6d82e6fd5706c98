use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;

use super::q_function;
use crate::channel::{effective_channel, sample_user_channels, UserChannel};
use crate::codebook::AntennaSetCodebook;
use crate::config::SystemConfig;
use crate::error::{Error, Result};

fn check(codebook: &AntennaSetCodebook, ch: &UserChannel, snr: f64, m_a: usize) -> Result<Vec<DVector<Complex64>>> {
    if !(snr > 0.0 && snr.is_finite()) {
        return Err(Error::InvalidSnr(snr));
    }
    if m_a != codebook.m_a() {
        return Err(Error::InvalidAntennaConfig(format!(
            "bound requested for m_a={m_a}, codebook has m_a={}",
            codebook.m_a()
        )));
    }
    codebook.sets().iter().map(|s| effective_channel(ch, s)).collect()
}

fn pairwise_sum(n_h: usize, b_h: usize, pep: impl Fn(usize, usize) -> f64) -> f64 {
    let mut acc = 0.0;
    for j in 0..n_h {
        for k in 0..n_h {
            if k != j {
                acc += (j ^ k).count_ones() as f64 * pep(j, k);
            }
        }
    }
    (acc / (n_h as f64 * b_h as f64)).clamp(0.0, 1.0)
}

/// Union bound on the bit error probability of the antenna-set detector:
///
/// `P_e <= 1/(N_H b_H) sum_j sum_{k != j} d_H(j, k) Q(sqrt(snr/m_a * ||eff_j - eff_k||^2))`
///
/// with the squared distance taken over all receive branches, which matches
/// the vector ML detector. Clamped to `[0, 1]`.
pub fn ber_union_bound(codebook: &AntennaSetCodebook, ch: &UserChannel, avg_snr_linear: f64, m_a: usize) -> Result<f64> {
    let eff = check(codebook, ch, avg_snr_linear, m_a)?;
    let scale = avg_snr_linear / m_a as f64;
    Ok(pairwise_sum(codebook.n_h(), codebook.b_h(), |j, k| {
        let d2: f64 = eff[j].iter().zip(eff[k].iter()).map(|(a, b)| (a - b).norm_sqr()).sum();
        q_function((scale * d2).sqrt())
    }))
}

/// Single-branch bound averaged over the receive branches.
pub fn ber_union_bound_per_branch(
    codebook: &AntennaSetCodebook,
    ch: &UserChannel,
    avg_snr_linear: f64,
    m_a: usize,
) -> Result<f64> {
    let eff = check(codebook, ch, avg_snr_linear, m_a)?;
    let scale = avg_snr_linear / m_a as f64;
    let m_r = ch.m_r();
    let total: f64 = (0..m_r)
        .map(|r| {
            pairwise_sum(codebook.n_h(), codebook.b_h(), |j, k| {
                q_function((scale * (eff[j][r] - eff[k][r]).norm_sqr()).sqrt())
            })
        })
        .sum();
    Ok(total / m_r as f64)
}

/// Mean of [`ber_union_bound`] over `draws` independent channels of the
/// weakest user of `config`.
pub fn fading_averaged_bound<R: Rng + ?Sized>(
    config: &SystemConfig,
    codebook: &AntennaSetCodebook,
    avg_snr_linear: f64,
    draws: usize,
    rng: &mut R,
) -> Result<f64> {
    if draws == 0 {
        return Err(Error::InvalidConfig("need at least one channel draw".into()));
    }
    let gains = config.effective_gain_targets();
    let mut acc = 0.0;
    for _ in 0..draws {
        let chans = sample_user_channels(config, &gains, rng)?;
        let edge = chans.last().expect("at least one user");
        acc += ber_union_bound(codebook, edge, avg_snr_linear, codebook.m_a())?;
    }
    Ok(acc / draws as f64)
}
