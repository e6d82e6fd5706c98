//! CSV and JSON writers for sweep results, capacity tables and the complexity table.

use serde::{Deserialize, Serialize};

use crate::analysis::{CellStatus, Table1Row};
use crate::error::{Error, Result};
use crate::montecarlo::{CapacityRow, Metric, SweepResult};

pub const SWEEP_HEADER: &str = "snr_db,scheme,metric,value,stderr,trials,seed";
pub const CAPACITY_HEADER: &str = "snr_db,m_t,scheme,rate_bps,energy_efficiency,spatial_bits,p_e";
pub const TABLE1_HEADER: &str = "row,scheme,published,verbatim,corrected,status";

const SIG: usize = 10;

/// `x` in plain decimal notation with ten significant digits.
pub fn fmt_decimal(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return format!("0.{}", "0".repeat(SIG - 1));
    }
    let sci = format!("{:.*e}", SIG - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let body = if exp >= (SIG as i32 - 1) {
        format!("{digits}{}", "0".repeat((exp - (SIG as i32 - 1)) as usize))
    } else if exp >= 0 {
        let split = exp as usize + 1;
        format!("{}.{}", &digits[..split], &digits[split..])
    } else {
        format!("0.{}{digits}", "0".repeat((-exp - 1) as usize))
    };
    if negative {
        format!("-{body}")
    } else {
        body
    }
}

/// `x` in scientific notation with ten significant digits.
pub fn fmt_scientific(x: f64) -> String {
    format!("{:.*e}", SIG - 1, x)
}

fn fmt_metric(metric: Metric, x: f64) -> String {
    match metric {
        Metric::CellEdgeBer => fmt_scientific(x),
        _ => fmt_decimal(x),
    }
}

/// A sweep result tagged with the run label it was produced for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelledResult {
    pub label: String,
    #[serde(flatten)]
    pub result: SweepResult,
}

/// Sweep rows under [`SWEEP_HEADER`], runs in the given order.
pub fn sweep_csv(results: &[LabelledResult]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in results {
        for p in &r.result.points {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                fmt_decimal(p.snr_db),
                r.label,
                r.result.metric.name(),
                fmt_metric(r.result.metric, p.value),
                fmt_metric(r.result.metric, p.stderr),
                p.trials,
                r.result.seed
            ));
        }
    }
    out
}

pub fn sweep_json(results: &[LabelledResult]) -> String {
    serde_json::to_string_pretty(results).expect("results serialize")
}

pub fn parse_sweep_json(text: &str) -> Result<Vec<LabelledResult>> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

/// Capacity rows computed at one SNR.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityTable {
    pub snr_db: f64,
    pub rows: Vec<CapacityRow>,
}

pub fn capacity_csv(tables: &[CapacityTable]) -> String {
    let mut out = String::from(CAPACITY_HEADER);
    out.push('\n');
    for t in tables {
        for r in &t.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                fmt_decimal(t.snr_db),
                r.m_t,
                r.scheme.name(),
                fmt_decimal(r.rate_bps),
                fmt_decimal(r.energy_eff),
                r.spatial_bits,
                fmt_scientific(r.p_e)
            ));
        }
    }
    out
}

pub fn capacity_json(tables: &[CapacityTable]) -> String {
    serde_json::to_string_pretty(tables).expect("tables serialize")
}

pub fn status_label(status: CellStatus) -> &'static str {
    match status {
        CellStatus::Match => "MATCH",
        CellStatus::MatchCorrected => "MATCH(corrected)",
        CellStatus::Mismatch => "MISMATCH",
    }
}

pub fn table1_csv(rows: &[Table1Row]) -> String {
    let mut out = String::from(TABLE1_HEADER);
    out.push('\n');
    for (i, row) in rows.iter().enumerate() {
        for c in &row.cells {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                i + 1,
                c.scheme.name(),
                fmt_decimal(c.published),
                fmt_decimal(c.verbatim),
                c.corrected.map(fmt_decimal).unwrap_or_default(),
                status_label(c.status)
            ));
        }
    }
    out
}

pub fn table1_json(rows: &[Table1Row]) -> String {
    serde_json::to_string_pretty(rows).expect("rows serialize")
}

/// Human-readable complexity table with published values and match flags.
pub fn table1_report(rows: &[Table1Row]) -> String {
    let mut out = String::new();
    for (i, row) in rows.iter().enumerate() {
        let p = &row.params;
        out.push_str(&format!(
            "row {}: N={} K={} M_r={} M_t(MIMO-NOMA)={} M_t(GSSK)={} M_a={} M={}\n",
            i + 1,
            p.n,
            p.k,
            p.m_r,
            p.m_t_noma,
            p.m_t_gssk,
            p.m_a,
            p.m
        ));
        out.push_str(&format!(
            "  {:<10} {:>14} {:>20} {:>20}  {}\n",
            "scheme", "published", "computed", "corrected", "status"
        ));
        for c in &row.cells {
            out.push_str(&format!(
                "  {:<10} {:>14} {:>20} {:>20}  {}\n",
                c.scheme.name(),
                fmt_decimal(c.published),
                fmt_decimal(c.verbatim),
                c.corrected.map(fmt_decimal).unwrap_or_else(|| "-".into()),
                status_label(c.status)
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SystemConfig;
    use crate::montecarlo::{ChannelMode, SweepPoint};

    #[test]
    fn ten_significant_digits() {
        assert_eq!(fmt_decimal(3840.0), "3840.000000");
        assert_eq!(fmt_decimal(793080.0), "793080.0000");
        assert_eq!(fmt_decimal(0.022750131948179207), "0.02275013195");
        assert_eq!(fmt_decimal(-2.5), "-2.500000000");
        assert_eq!(fmt_decimal(0.0), "0.000000000");
        assert_eq!(fmt_decimal(12345678901234.0), "12345678900000");
        assert_eq!(fmt_decimal(9.99999999999), "10.00000000");
        assert_eq!(fmt_scientific(1.0e-5), "1.000000000e-5");
    }

    #[test]
    fn csv_header_and_json_round_trip() {
        let result = SweepResult {
            scheme: crate::Scheme::NomaGssk,
            metric: Metric::CellEdgeBer,
            config: SystemConfig::noma_gssk(4, 2),
            seed: 7,
            channel_mode: ChannelMode::PerTrial,
            wall_time_s: 0.5,
            points: vec![SweepPoint {
                snr_db: 10.0,
                value: 0.0123,
                stderr: 1.0e-4,
                trials: 100,
                bits: 200,
                noma_ber: vec![0.1, 0.2],
            }],
        };
        let runs = vec![LabelledResult {
            label: "gssk".into(),
            result,
        }];
        let csv = sweep_csv(&runs);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(SWEEP_HEADER));
        assert_eq!(
            lines.next(),
            Some("10.00000000,gssk,cell_edge_ber,1.230000000e-2,1.000000000e-4,100,7")
        );
        assert_eq!(parse_sweep_json(&sweep_json(&runs)).unwrap(), runs);
    }
}
