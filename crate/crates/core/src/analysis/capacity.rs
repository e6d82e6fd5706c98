use serde::{Deserialize, Serialize};

use crate::codebook::spatial_bits;
use crate::error::{Error, Result};

/// `R_K = (1 - p_e) floor(log2 C(m_t, m_a))`.
pub fn cell_edge_sum_rate(p_e: f64, m_t: usize, m_a: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&p_e) {
        return Err(Error::DomainError(format!("p_e must lie in [0, 1], got {p_e}")));
    }
    Ok((1.0 - p_e) * spatial_bits(m_t, m_a) as f64)
}

/// Power-domain term `log2(snr log2(log2 users))`, defined only for three or more users.
fn noma_term(snr_linear: f64, users: usize) -> Result<f64> {
    if !(snr_linear > 0.0 && snr_linear.is_finite()) {
        return Err(Error::InvalidSnr(snr_linear));
    }
    let arg = snr_linear * (users as f64).log2().log2();
    if arg.is_nan() || arg <= 1e-300 {
        return Err(Error::DomainError(format!(
            "log2(snr * log2(log2 {users})) is undefined (argument {arg})"
        )));
    }
    Ok(arg.log2())
}

pub fn capacity_mimo_noma(snr_linear: f64, n_plus_k: usize) -> Result<f64> {
    noma_term(snr_linear, n_plus_k)
}

pub fn capacity_noma_ssk(snr_linear: f64, n: usize, m_t: usize, p_e: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p_e) {
        return Err(Error::DomainError(format!("p_e must lie in [0, 1], got {p_e}")));
    }
    let spatial = if m_t == 0 { 0.0 } else { (m_t as f64).log2().floor() };
    Ok(noma_term(snr_linear, n)? + (1.0 - p_e) * spatial)
}

pub fn capacity_noma_gssk(snr_linear: f64, n: usize, r_k: f64) -> Result<f64> {
    if !(r_k >= 0.0) {
        return Err(Error::DomainError(format!("r_k must be >= 0, got {r_k}")));
    }
    Ok(noma_term(snr_linear, n)? + r_k)
}

/// `eta = R / (sum(alphas_spent) P)`.
pub fn energy_efficiency(rate_bps: f64, alphas_spent: &[f64], total_power: f64) -> Result<f64> {
    if !(rate_bps >= 0.0) {
        return Err(Error::DomainError(format!("rate must be >= 0, got {rate_bps}")));
    }
    let spent = alphas_spent.iter().sum::<f64>() * total_power;
    if !(spent > 0.0) || alphas_spent.iter().any(|&a| a < 0.0) {
        return Err(Error::ZeroPower);
    }
    Ok(rate_bps / spent)
}

/// Closed-form rates and energy efficiencies of the three schemes at one operating point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityReport {
    pub snr_linear: f64,
    pub p_e: f64,
    pub r_k: f64,
    pub rate_mimo_noma: f64,
    pub rate_noma_ssk: f64,
    pub rate_noma_gssk: f64,
    pub ee_mimo_noma: f64,
    pub ee_noma_ssk: f64,
    pub ee_noma_gssk: f64,
}

impl CapacityReport {
    /// Evaluates every closed form with one FTPA allocation `alphas` over
    /// the `n + k` users; the spatial schemes spend only the first `n` shares.
    #[allow(clippy::too_many_arguments)]
    pub fn evaluate(
        snr_linear: f64,
        n: usize,
        k: usize,
        m_t_ssk: usize,
        m_t_gssk: usize,
        m_a: usize,
        p_e: f64,
        alphas: &[f64],
        total_power: f64,
    ) -> Result<Self> {
        if alphas.len() != n + k {
            return Err(Error::LengthMismatch {
                expected: n + k,
                got: alphas.len(),
            });
        }
        let r_k = cell_edge_sum_rate(p_e, m_t_gssk, m_a)?;
        let rate_mimo_noma = capacity_mimo_noma(snr_linear, n + k)?;
        let rate_noma_ssk = capacity_noma_ssk(snr_linear, n, m_t_ssk, p_e)?;
        let rate_noma_gssk = capacity_noma_gssk(snr_linear, n, r_k)?;
        Ok(Self {
            snr_linear,
            p_e,
            r_k,
            ee_mimo_noma: energy_efficiency(rate_mimo_noma.max(0.0), alphas, total_power)?,
            ee_noma_ssk: energy_efficiency(rate_noma_ssk.max(0.0), &alphas[..n], total_power)?,
            ee_noma_gssk: energy_efficiency(rate_noma_gssk.max(0.0), &alphas[..n], total_power)?,
            rate_mimo_noma,
            rate_noma_ssk,
            rate_noma_gssk,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // log2(100 log2(log2 3)) to 40 digits: 6.054085928913937079853940884825135346357
    const CAP_100_3: f64 = 6.054085928913937;

    #[test]
    fn cell_edge_rate_examples() {
        assert_eq!(cell_edge_sum_rate(0.0, 4, 1).unwrap(), 2.0);
        assert_eq!(cell_edge_sum_rate(1.0, 7, 3).unwrap(), 0.0);
        assert!((cell_edge_sum_rate(0.1, 5, 2).unwrap() - 2.7).abs() < 1e-12);
        assert!(cell_edge_sum_rate(1.5, 5, 2).is_err());
    }

    #[test]
    fn mimo_noma_examples() {
        assert!((capacity_mimo_noma(100.0, 3).unwrap() - CAP_100_3).abs() < 1e-12);
        assert!(matches!(capacity_mimo_noma(100.0, 2), Err(Error::DomainError(_))));
        assert!(matches!(capacity_mimo_noma(100.0, 1), Err(Error::DomainError(_))));
        let unit = 1.0 / 4f64.log2().log2();
        assert!(capacity_mimo_noma(unit, 4).unwrap().abs() < 1e-12);
    }

    #[test]
    fn ssk_and_gssk_examples() {
        assert!((capacity_noma_ssk(100.0, 3, 4, 0.0).unwrap() - (CAP_100_3 + 2.0)).abs() < 1e-12);
        assert!((capacity_noma_ssk(100.0, 3, 4, 1.0).unwrap() - CAP_100_3).abs() < 1e-12);
        assert!(matches!(capacity_noma_ssk(100.0, 2, 4, 0.0), Err(Error::DomainError(_))));
        assert!((capacity_noma_gssk(100.0, 3, 2.7).unwrap() - (CAP_100_3 + 2.7)).abs() < 1e-12);
        assert_eq!(capacity_noma_gssk(42.0, 5, 0.0).unwrap(), capacity_mimo_noma(42.0, 5).unwrap());
        let p_e = 0.23;
        let r_k = cell_edge_sum_rate(p_e, 8, 1).unwrap();
        assert!(
            (capacity_noma_gssk(30.0, 4, r_k).unwrap() - capacity_noma_ssk(30.0, 4, 8, p_e).unwrap()).abs() < 1e-12
        );
    }

    #[test]
    fn energy_efficiency_examples() {
        assert_eq!(energy_efficiency(8.0, &[1.0], 2.0).unwrap(), 4.0);
        assert_eq!(energy_efficiency(5.0, &[0.2, 0.3, 0.5], 3.0).unwrap(), 5.0 / 3.0);
        assert_eq!(
            energy_efficiency(3.0, &[0.5], 1.0).unwrap(),
            energy_efficiency(3.0, &[0.25, 0.25], 1.0).unwrap()
        );
        assert!(matches!(energy_efficiency(1.0, &[], 1.0), Err(Error::ZeroPower)));
        assert!(matches!(energy_efficiency(1.0, &[0.5], 0.0), Err(Error::ZeroPower)));
    }

    #[test]
    fn report_books_spatial_schemes_on_power_users() {
        let r = CapacityReport::evaluate(100.0, 3, 1, 4, 4, 2, 0.0, &[0.2, 0.3, 0.5], 1.0);
        assert!(r.is_err(), "length mismatch expected");
        let r = CapacityReport::evaluate(100.0, 3, 1, 4, 8, 2, 0.0, &[0.1, 0.2, 0.3, 0.4], 1.0).unwrap();
        assert!((r.ee_noma_gssk - r.rate_noma_gssk / 0.6).abs() < 1e-12);
        assert!((r.ee_mimo_noma - r.rate_mimo_noma).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn capacity_difference_is_spatial_difference(
            snr in 0.5f64..1e4, n in 3usize..12, m_t in 1usize..64, p_e in 0.0f64..=1.0, r_k in 0.0f64..10.0
        ) {
            let diff = capacity_noma_gssk(snr, n, r_k).unwrap() - capacity_noma_ssk(snr, n, m_t, p_e).unwrap();
            let expected = r_k - (1.0 - p_e) * (m_t as f64).log2().floor();
            prop_assert!((diff - expected).abs() < 1e-9);
        }
    }
}
