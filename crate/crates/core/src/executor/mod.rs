//! Layer-by-layer execution of a job graph on a flat coefficient arena.

mod flops;

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rayon::prelude::*;

pub use flops::{flop_count, FlopCount};

use crate::error::{Error, Result};
use crate::jobgraph::{
    build_jobgraph, fold_exponents, AddJob, ConvJob, CopyJob, JobGraph, Layout, Polynomial,
};
use crate::multidouble::{expansion, OpCostTable, Precision};
use crate::pseries::{kernel, Mode, Series};
use crate::with_limbs;

/// All series of one evaluation: one slab per limb and part, each holding
/// `total_slots * (d + 1)` doubles with slot `s` at offset `s * (d + 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DataArray {
    degree: usize,
    precision: Precision,
    mode: Mode,
    total_slots: usize,
    slabs: Vec<Vec<f64>>,
}

impl DataArray {
    pub fn new(total_slots: usize, degree: usize, precision: Precision, mode: Mode) -> Self {
        let len = total_slots * (degree + 1);
        let count = precision.limbs() * mode.parts();
        DataArray {
            degree,
            precision,
            mode,
            total_slots,
            slabs: vec![vec![0.0; len]; count],
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn total_slots(&self) -> usize {
        self.total_slots
    }

    /// Slab of limb `limb` of part `part` (0 real, 1 imaginary).
    pub fn slab(&self, part: usize, limb: usize) -> &[f64] {
        &self.slabs[part * self.precision.limbs() + limb]
    }

    pub fn read_slot(&self, slot: usize) -> Series {
        let m = self.precision.limbs();
        let n = self.degree + 1;
        let part = |p: usize| {
            let mut buf = vec![0.0; n * m];
            for l in 0..m {
                let slab = &self.slab(p, l)[slot * n..(slot + 1) * n];
                for (k, &v) in slab.iter().enumerate() {
                    buf[k * m + l] = v;
                }
            }
            buf
        };
        let im = (self.mode == Mode::Complex).then(|| part(1));
        Series::from_limbs(self.degree, self.precision, part(0), im).expect("slot shape")
    }

    pub fn write_slot(&mut self, slot: usize, series: &Series) -> Result<()> {
        if slot >= self.total_slots {
            return Err(Error::InvalidInput(format!(
                "slot {slot} out of range ({} slots)",
                self.total_slots
            )));
        }
        let template = Series::zero(self.degree, self.precision, self.mode);
        template.check_compatible(series)?;
        let m = self.precision.limbs();
        let n = self.degree + 1;
        let parts = [Some(series.re_limbs()), series.im_limbs()];
        for (p, buf) in parts.into_iter().enumerate() {
            let Some(buf) = buf else { continue };
            for l in 0..m {
                let slab = &mut self.slabs[p * m + l][slot * n..(slot + 1) * n];
                for (k, v) in slab.iter_mut().enumerate() {
                    *v = buf[k * m + l];
                }
            }
        }
        Ok(())
    }

    fn gather<const M: usize>(&self, part: usize, slot: usize) -> Vec<[f64; M]> {
        let n = self.degree + 1;
        let base = part * M;
        let range = slot * n..(slot + 1) * n;
        let mut out = vec![[0.0; M]; n];
        for l in 0..M {
            for (o, &v) in out.iter_mut().zip(&self.slabs[base + l][range.clone()]) {
                o[l] = v;
            }
        }
        out
    }

    fn scatter<const M: usize>(&mut self, part: usize, slot: usize, values: &[[f64; M]]) {
        let n = self.degree + 1;
        let base = part * M;
        for l in 0..M {
            let slab = &mut self.slabs[base + l][slot * n..(slot + 1) * n];
            for (s, v) in slab.iter_mut().zip(values) {
                *s = v[l];
            }
        }
    }
}

/// Loads the constant, the coefficients and the inputs into the static
/// slots. Coefficients of monomials with exponents above one are folded
/// first.
pub fn stage(poly: &Polynomial, z: &[Series]) -> Result<DataArray> {
    poly.check_inputs(z)?;
    let folded;
    let poly = if poly.is_multilinear() {
        poly
    } else {
        folded = fold_exponents(poly, z)?;
        &folded
    };
    let layout = Layout::from_shapes(poly.num_vars(), &poly.shapes());
    let mut data = DataArray::new(
        layout.total_slots(),
        poly.degree(),
        poly.precision(),
        poly.mode(),
    );
    data.write_slot(layout.constant_slot(), poly.constant())?;
    for (k0, mono) in poly.monomials().iter().enumerate() {
        data.write_slot(layout.coeff_slot(k0 + 1), &mono.coeff)?;
    }
    for (i0, zi) in z.iter().enumerate() {
        data.write_slot(layout.input_slot(i0 + 1), zi)?;
    }
    Ok(data)
}

/// Value, gradient and timings of one run.
#[derive(Clone, Debug)]
pub struct RunReport {
    pub value: Series,
    pub gradient: Vec<Series>,
    pub conv_layer_times: Vec<Duration>,
    pub add_layer_times: Vec<Duration>,
    /// Time spent applying term scales between the stages.
    pub scale_time: Duration,
    pub wall_time: Duration,
    pub conv_jobs: usize,
    pub copy_jobs: usize,
    pub add_jobs: usize,
    /// Double operations by the reference cost table.
    pub double_op_count: u64,
}

impl RunReport {
    pub fn conv_time(&self) -> Duration {
        self.conv_layer_times.iter().sum()
    }

    pub fn add_time(&self) -> Duration {
        self.add_layer_times.iter().sum()
    }
}

/// The reference cost table, measured once per process.
pub fn reference_costs() -> &'static OpCostTable {
    static TABLE: OnceLock<OpCostTable> = OnceLock::new();
    TABLE.get_or_init(OpCostTable::reference)
}

/// Runs every job in order on the calling thread.
pub fn run_sequential(graph: &JobGraph, data: &mut DataArray) -> Result<RunReport> {
    run(graph, data, None)
}

/// Runs each layer on a pool of `workers` threads. Results are bitwise
/// identical to [`run_sequential`].
pub fn run_parallel(graph: &JobGraph, data: &mut DataArray, workers: usize) -> Result<RunReport> {
    if workers == 0 {
        return Err(Error::InvalidInput("at least one worker is required".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    run(graph, data, Some(&pool))
}

/// Compiles, stages and runs `poly` at `z`.
pub fn evaluate(poly: &Polynomial, z: &[Series], workers: usize) -> Result<RunReport> {
    let graph = build_jobgraph(poly)?;
    let mut data = stage(poly, z)?;
    if workers <= 1 {
        run_sequential(&graph, &mut data)
    } else {
        run_parallel(&graph, &mut data, workers)
    }
}

/// Reads the value and gradient after both stages, applying the
/// per-variable multipliers.
pub fn extract(graph: &JobGraph, data: &DataArray) -> (Series, Vec<Series>) {
    let value = data.read_slot(graph.value_slot);
    let gradient = graph
        .gradient_slots
        .iter()
        .zip(&graph.multipliers)
        .map(|(slot, &e)| match slot {
            Some(s) => data.read_slot(*s).scale_int(e as i64),
            None => Series::zero(data.degree, data.precision, data.mode),
        })
        .collect();
    (value, gradient)
}

fn run(graph: &JobGraph, data: &mut DataArray, pool: Option<&rayon::ThreadPool>) -> Result<RunReport> {
    if data.total_slots != graph.total_slots() {
        return Err(Error::InvalidInput(format!(
            "data array has {} slots, graph needs {}",
            data.total_slots,
            graph.total_slots()
        )));
    }
    let start = Instant::now();
    let mut conv_layer_times = Vec::with_capacity(graph.conv_layers.len());
    let mut add_layer_times = Vec::with_capacity(graph.add_layers.len());
    let scale_time;
    with_limbs!(data.precision, M => {
        for (l0, layer) in graph.conv_layers.iter().enumerate() {
            let t = Instant::now();
            let copies: &[CopyJob] = if l0 == 0 { &graph.copies } else { &[] };
            run_layer::<M, _>(data, copies, pool, copy_output::<M>);
            run_layer::<M, _>(data, layer, pool, conv_output::<M>);
            conv_layer_times.push(t.elapsed());
        }
        if graph.conv_layers.is_empty() && !graph.copies.is_empty() {
            let t = Instant::now();
            run_layer::<M, _>(data, &graph.copies, pool, copy_output::<M>);
            conv_layer_times.push(t.elapsed());
        }
        let t = Instant::now();
        for ts in &graph.term_scales {
            for part in 0..data.mode.parts() {
                let mut v = data.gather::<M>(part, ts.slot);
                for x in &mut v {
                    *x = expansion::mul_scalar(x, ts.factor as f64);
                }
                data.scatter::<M>(part, ts.slot, &v);
            }
        }
        scale_time = t.elapsed();
        for layer in &graph.add_layers {
            let t = Instant::now();
            run_layer::<M, _>(data, layer, pool, add_output::<M>);
            add_layer_times.push(t.elapsed());
        }
    });
    let wall_time = start.elapsed();
    let (value, gradient) = extract(graph, data);
    let double_op_count = flop_count(
        graph,
        data.degree,
        data.precision,
        data.mode,
        reference_costs(),
    )
    .total();
    Ok(RunReport {
        value,
        gradient,
        conv_layer_times,
        add_layer_times,
        scale_time,
        wall_time,
        conv_jobs: graph.conv_job_count(),
        copy_jobs: graph.copies.len(),
        add_jobs: graph.add_job_count(),
        double_op_count,
    })
}

/// Result of one job: the target slot and its new contents per part.
struct Output<const M: usize> {
    slot: usize,
    parts: Vec<Vec<[f64; M]>>,
}

fn run_layer<const M: usize, J: Sync>(
    data: &mut DataArray,
    jobs: &[J],
    pool: Option<&rayon::ThreadPool>,
    compute: impl Fn(&DataArray, &J) -> Output<M> + Sync,
) {
    match pool {
        None => {
            for job in jobs {
                let out = compute(data, job);
                store(data, out);
            }
        }
        Some(pool) => {
            let shared: &DataArray = data;
            let outs: Vec<Output<M>> =
                pool.install(|| jobs.par_iter().map(|j| compute(shared, j)).collect());
            for out in outs {
                store(data, out);
            }
        }
    }
}

fn store<const M: usize>(data: &mut DataArray, out: Output<M>) {
    for (part, values) in out.parts.iter().enumerate() {
        data.scatter::<M>(part, out.slot, values);
    }
}

fn copy_output<const M: usize>(data: &DataArray, job: &CopyJob) -> Output<M> {
    Output {
        slot: job.dst,
        parts: (0..data.mode.parts())
            .map(|p| data.gather::<M>(p, job.src))
            .collect(),
    }
}

fn conv_output<const M: usize>(data: &DataArray, job: &ConvJob) -> Output<M> {
    let n = data.degree + 1;
    let xr = data.gather::<M>(0, job.in1);
    let yr = data.gather::<M>(0, job.in2);
    let mut zr = vec![[0.0; M]; n];
    let parts = match data.mode {
        Mode::Real => {
            kernel::conv_real(&xr, &yr, &mut zr);
            vec![zr]
        }
        Mode::Complex => {
            let xi = data.gather::<M>(1, job.in1);
            let yi = data.gather::<M>(1, job.in2);
            let mut zi = vec![[0.0; M]; n];
            kernel::conv_complex(&xr, &xi, &yr, &yi, &mut zr, &mut zi);
            vec![zr, zi]
        }
    };
    Output {
        slot: job.out,
        parts,
    }
}

fn add_output<const M: usize>(data: &DataArray, job: &AddJob) -> Output<M> {
    let n = data.degree + 1;
    let parts = (0..data.mode.parts())
        .map(|p| {
            let dst = data.gather::<M>(p, job.dst);
            let src = data.gather::<M>(p, job.src);
            let mut out = vec![[0.0; M]; n];
            kernel::add_series(&dst, &src, &mut out);
            out
        })
        .collect();
    Output {
        slot: job.dst,
        parts,
    }
}
