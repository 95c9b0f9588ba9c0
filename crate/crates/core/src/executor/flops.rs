use crate::jobgraph::JobGraph;
use crate::multidouble::{OpCostTable, Precision};
use crate::pseries::Mode;

/// Double operations of one evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FlopCount {
    /// Coefficient products inside convolutions.
    pub conv_products: u64,
    /// Coefficient additions inside convolutions.
    pub conv_sums: u64,
    /// Coefficient additions of the addition stage.
    pub add_sums: u64,
}

impl FlopCount {
    pub fn total(&self) -> u64 {
        self.conv_products + self.conv_sums + self.add_sums
    }

    pub fn convolution_stage(&self) -> u64 {
        self.conv_products + self.conv_sums
    }

    /// Operations spent in multiple-double multiplications.
    pub fn product_part(&self) -> u64 {
        self.conv_products
    }

    /// Operations spent in multiple-double additions, in both stages.
    pub fn sum_part(&self) -> u64 {
        self.conv_sums + self.add_sums
    }
}

/// Counts double operations from the job counts: each convolution does
/// `(d+1)^2` coefficient products and `d(d+1)` coefficient additions, and
/// each addition job `d+1` coefficient additions. A complex coefficient
/// product costs four products and two additions; a complex addition two
/// additions. Copies and term scales are free.
pub fn flop_count(
    graph: &JobGraph,
    degree: usize,
    precision: Precision,
    mode: Mode,
    table: &OpCostTable,
) -> FlopCount {
    let cost = table.get(precision);
    let (prod, sum) = match mode {
        Mode::Real => (cost.mul, cost.add),
        Mode::Complex => (4 * cost.mul + 2 * cost.add, 2 * cost.add),
    };
    let n = degree as u64 + 1;
    let conv_jobs = graph.conv_job_count() as u64;
    let add_jobs = graph.add_job_count() as u64;
    FlopCount {
        conv_products: conv_jobs * n * n * prod,
        conv_sums: conv_jobs * (n - 1) * n * sum,
        add_sums: add_jobs * n * sum,
    }
}
