//! Closed-form evaluation: union bound on the cell-edge bit error rate,
//! capacities, energy efficiency and detector complexity.

mod bound;
mod capacity;
mod complexity;

pub use bound::{ber_union_bound, ber_union_bound_per_branch, fading_averaged_bound};
pub use capacity::{
    capacity_mimo_noma, capacity_noma_gssk, capacity_noma_ssk, cell_edge_sum_rate, energy_efficiency,
    CapacityReport,
};
pub use complexity::{
    complexity_mimo_noma_user, complexity_totals, CellStatus, table1_rows, ComplexityParams, ComplexityReport, Table1Cell,
    Table1Row,
};

/// Gaussian tail probability `Q(x) = P(Z > x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}
