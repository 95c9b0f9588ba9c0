//! Benchmark records, CSV output and markdown tables.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io;

use crate::jobgraph::JobGraph;

/// One benchmark cell: the median of the repeats at one degree and
/// precision.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchRecord {
    pub polynomial: String,
    pub degree: usize,
    pub limbs: usize,
    pub mode: String,
    pub workers: usize,
    pub conv_jobs: usize,
    pub add_jobs: usize,
    pub conv_ms: f64,
    pub add_ms: f64,
    /// `conv_ms + add_ms`.
    pub sum_ms: f64,
    pub wall_ms: f64,
    pub double_op_count: u64,
    /// `double_op_count / wall time`, in 10^9 operations per second.
    pub gflops: f64,
}

pub const CSV_HEADER: [&str; 13] = [
    "polynomial",
    "degree",
    "precision",
    "mode",
    "workers",
    "conv_jobs",
    "add_jobs",
    "conv_ms",
    "add_ms",
    "sum_ms",
    "wall_ms",
    "double_op_count",
    "gflops",
];

impl BenchRecord {
    pub fn csv_row(&self) -> [String; 13] {
        [
            self.polynomial.clone(),
            self.degree.to_string(),
            self.limbs.to_string(),
            self.mode.clone(),
            self.workers.to_string(),
            self.conv_jobs.to_string(),
            self.add_jobs.to_string(),
            format!("{:.3}", self.conv_ms),
            format!("{:.3}", self.add_ms),
            format!("{:.3}", self.sum_ms),
            format!("{:.3}", self.wall_ms),
            self.double_op_count.to_string(),
            format!("{:.4}", self.gflops),
        ]
    }
}

pub fn write_csv<W: io::Write>(records: &[BenchRecord], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record(r.csv_row())?;
    }
    w.flush()?;
    Ok(())
}

/// Times in milliseconds, one block of `cnv`, `add`, `sum` and `wall`
/// rows per precision and one column per degree.
pub fn markdown_table(records: &[BenchRecord]) -> String {
    let degrees: BTreeSet<usize> = records.iter().map(|r| r.degree).collect();
    let limbs: BTreeSet<usize> = records.iter().map(|r| r.limbs).collect();
    let mut out = String::new();
    out.push_str("| m | stage |");
    for d in &degrees {
        write!(out, " {d} |").unwrap();
    }
    out.push_str("\n|---|---|");
    for _ in &degrees {
        out.push_str("---:|");
    }
    out.push('\n');
    type Field = fn(&BenchRecord) -> f64;
    let rows: [(&str, Field); 4] = [
        ("cnv", |r| r.conv_ms),
        ("add", |r| r.add_ms),
        ("sum", |r| r.sum_ms),
        ("wall", |r| r.wall_ms),
    ];
    for m in &limbs {
        for (label, field) in rows {
            write!(out, "| {m}d | {label} |").unwrap();
            for d in &degrees {
                match records.iter().find(|r| r.limbs == *m && r.degree == *d) {
                    Some(r) => write!(out, " {:.2} |", field(r)).unwrap(),
                    None => out.push_str("  |"),
                }
            }
            out.push('\n');
        }
    }
    out
}

/// Job counts per layer of both stages.
pub fn launch_listing(graph: &JobGraph) -> String {
    let join = |v: Vec<usize>| v.iter().map(usize::to_string).collect::<Vec<_>>().join(", ");
    format!(
        "convolution jobs: {} in {} layers ({})\naddition jobs: {} in {} layers ({})\n",
        graph.conv_job_count(),
        graph.conv_layers.len(),
        join(graph.conv_layer_sizes()),
        graph.add_job_count(),
        graph.add_layers.len(),
        join(graph.add_layer_sizes()),
    )
}
