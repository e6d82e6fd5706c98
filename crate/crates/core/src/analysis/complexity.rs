//! Add-compare operation counts of the SIC/ML receivers.

use serde::{Deserialize, Serialize};

use crate::codebook::binomial;
use crate::config::Scheme;
use crate::error::{Error, Result};

/// ML decoding cost `4 M_r M_t M + 2 M_r M^M_t`.
fn ml_decode_cost(m_r: usize, m_t: usize, m: usize) -> f64 {
    let exact = (m as u128)
        .checked_pow(m_t as u32)
        .and_then(|p| p.checked_mul(2 * m_r as u128))
        .and_then(|p| p.checked_add(4 * (m_r * m_t * m) as u128));
    match exact {
        Some(v) => v as f64,
        None => 4.0 * (m_r * m_t * m) as f64 + 2.0 * m_r as f64 * (m as f64).powi(m_t as i32),
    }
}

/// Cost for the user at SIC position `j` (1 = nearest) among `n_plus_k` users.
pub fn complexity_mimo_noma_user(n_plus_k: usize, j: usize, m_r: usize, m_t: usize, m: usize) -> Result<f64> {
    if j == 0 || j > n_plus_k {
        return Err(Error::RankOutOfRange { rank: j, max: n_plus_k });
    }
    Ok(ml_decode_cost(m_r, m_t, m) * (n_plus_k - j + 1) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexityParams {
    pub n: usize,
    pub k: usize,
    pub m_r: usize,
    pub m_t_noma: usize,
    pub m_t_gssk: usize,
    pub m_a: usize,
    pub m: usize,
}

/// Totals over all users. The spatial-scheme totals come in two forms: as
/// printed (with the trailing factor `N` on the SIC term) and without it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub mimo_noma: f64,
    pub noma_ssk: f64,
    pub noma_gssk: f64,
    pub noma_ssk_corrected: f64,
    pub noma_gssk_corrected: f64,
    pub params: ComplexityParams,
}

pub fn complexity_totals(
    n: usize,
    k: usize,
    m_r: usize,
    m_t_noma: usize,
    m_t_gssk: usize,
    m_a: usize,
    m: usize,
) -> Result<ComplexityReport> {
    if n == 0 || m_r == 0 || m_t_noma == 0 || m_t_gssk == 0 || m == 0 {
        return Err(Error::InvalidAntennaConfig("arguments must be positive".into()));
    }
    if m_a == 0 || m_a > m_t_gssk || binomial(m_t_gssk, m_a) < 2 {
        return Err(Error::InvalidAntennaConfig(format!(
            "C({m_t_gssk}, {m_a}) must be at least 2"
        )));
    }
    let users = (n + k) as f64;
    let mimo_noma = users * (2.0 + users - 1.0) / 2.0 * ml_decode_cost(m_r, m_t_noma, m);
    let sic_pairs = n as f64 * (2.0 + n as f64 - 1.0) / 2.0;
    let ssk_sic = sic_pairs * ml_decode_cost(m_r, m_t_noma, m);
    let ssk_edge = (k * m_r * m) as f64;
    let gssk_sic = sic_pairs * ml_decode_cost(m_r, m_t_gssk, m);
    let gssk_edge = (k * m_a * m_r) as f64 * (binomial(m_t_gssk, m_a) as f64).log2();
    Ok(ComplexityReport {
        mimo_noma,
        noma_ssk: ssk_sic * n as f64 + ssk_edge,
        noma_gssk: gssk_sic * n as f64 + gssk_edge,
        noma_ssk_corrected: ssk_sic + ssk_edge,
        noma_gssk_corrected: gssk_sic + gssk_edge,
        params: ComplexityParams {
            n,
            k,
            m_r,
            m_t_noma,
            m_t_gssk,
            m_a,
            m,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    /// The formula as printed reproduces the published value.
    Match,
    /// Only the variant without the trailing factor `N` reproduces it.
    MatchCorrected,
    Mismatch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Cell {
    pub scheme: Scheme,
    pub published: f64,
    pub verbatim: f64,
    pub corrected: Option<f64>,
    pub status: CellStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub params: ComplexityParams,
    pub cells: Vec<Table1Cell>,
}

fn cell(scheme: Scheme, published: f64, verbatim: f64, corrected: Option<f64>) -> Table1Cell {
    let status = if verbatim == published {
        CellStatus::Match
    } else if corrected == Some(published) {
        CellStatus::MatchCorrected
    } else {
        CellStatus::Mismatch
    };
    Table1Cell {
        scheme,
        published,
        verbatim,
        corrected,
        status,
    }
}

/// The two published complexity rows, recomputed.
pub fn table1_rows() -> Vec<Table1Row> {
    // (N, K, M_r, M_t noma/ssk, M_t gssk, M_a, M, published mimo, ssk, gssk)
    const ROWS: [(usize, usize, usize, usize, usize, usize, usize, f64, f64, f64); 2] = [
        (3, 2, 4, 4, 4, 1, 2, 3_840.0, 1_024.0, 1_024.0),
        (3, 2, 4, 8, 5, 2, 3, 793_080.0, 317_256.0, 5_072.0),
    ];
    ROWS.iter()
        .map(|&(n, k, m_r, m_t, m_t_g, m_a, m, p_mimo, p_ssk, p_gssk)| {
            let r = complexity_totals(n, k, m_r, m_t, m_t_g, m_a, m).expect("published parameters are valid");
            Table1Row {
                params: r.params,
                cells: vec![
                    cell(Scheme::MimoNoma, p_mimo, r.mimo_noma, None),
                    cell(Scheme::NomaSsk, p_ssk, r.noma_ssk, Some(r.noma_ssk_corrected)),
                    cell(Scheme::NomaGssk, p_gssk, r.noma_gssk, Some(r.noma_gssk_corrected)),
                ],
            }
        })
        .collect()
}
