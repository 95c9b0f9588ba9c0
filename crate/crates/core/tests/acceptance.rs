//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use polyseries::cli::{gen, graph_stats, random_integer_instance, BenchmarkId, ProblemFile, RandomSpec};
use polyseries::executor::{flop_count, run_parallel, run_sequential, stage, RunReport};
use polyseries::jobgraph::{
    build_jobgraph, raw_offset, validate, ConvKind, JobGraph, Monomial, MonomialShape, Polynomial,
};
use polyseries::multidouble::{eft, md_add, md_mul, OpCostTable};
use polyseries::oracle::{eval_direct, max_discrepancy, Dyadic};
use polyseries::pseries::random_multidouble;
use polyseries::{Mode, Precision, Series};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn same_bits(a: &Series, b: &Series) -> bool {
    let bits = |s: &Series| -> Vec<u64> {
        s.re_limbs()
            .iter()
            .chain(s.im_limbs().into_iter().flatten())
            .map(|v| v.to_bits())
            .collect()
    };
    a.degree() == b.degree() && a.mode() == b.mode() && bits(a) == bits(b)
}

fn same_outputs(a: &RunReport, b: &RunReport) -> bool {
    same_bits(&a.value, &b.value) && a.gradient.iter().zip(&b.gradient).all(|(x, y)| same_bits(x, y))
}

fn six_variable_shapes() -> Vec<MonomialShape> {
    [vec![1, 3, 6], vec![1, 2, 5, 6], vec![2, 3, 4]]
        .into_iter()
        .map(MonomialShape::multilinear)
        .collect()
}

fn job_counts() -> Outcome {
    let start = Instant::now();
    let g = JobGraph::from_shapes(16, &BenchmarkId::P1.shapes()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    check(g.conv_job_count() == 16_380, || format!("{} convolution jobs", g.conv_job_count()))?;
    check(g.conv_layer_sizes() == [3640, 5460, 5460, 1820], || {
        format!("convolution layers {:?}", g.conv_layer_sizes())
    })?;
    check(g.add_job_count() == 9_084, || format!("{} addition jobs", g.add_job_count()))?;
    check(
        g.add_layer_sizes() == [4542, 2279, 1140, 562, 281, 140, 78, 39, 20, 2, 1],
        || format!("addition layers {:?}", g.add_layer_sizes()),
    )?;
    check(elapsed < Duration::from_secs(1), || format!("build took {elapsed:?}"))?;
    Ok(format!(
        "p1: 16380 convolutions in {:?}, 9084 additions in {:?}, built in {:.1} ms",
        g.conv_layer_sizes(),
        g.add_layer_sizes(),
        elapsed.as_secs_f64() * 1e3
    ))
}

fn worked_example() -> Outcome {
    let g = JobGraph::from_shapes(6, &six_variable_shapes()).map_err(|e| e.to_string())?;
    check(g.conv_job_count() == 21, || format!("{} convolution jobs", g.conv_job_count()))?;
    check(g.conv_layer_sizes() == [6, 9, 5, 1], || format!("layers {:?}", g.conv_layer_sizes()))?;
    check(g.total_slots() == 28, || format!("{} slots", g.total_slots()))?;
    let f11 = g
        .conv_jobs()
        .find(|j| j.kind == ConvKind::Forward && j.monomial == 1 && j.index == 1)
        .ok_or("no f_{1,1} job")?;
    let first_add = g.add_layers[0][0];
    for d in [0, 1, 7, 152] {
        let triplet = (raw_offset(f11.in1, d), raw_offset(f11.in2, d), raw_offset(f11.out, d));
        check(triplet == (d + 1, 4 * d + 4, 10 * d + 10), || format!("d={d}: triplet {triplet:?}"))?;
        let pair = (raw_offset(first_add.src, d), raw_offset(first_add.dst, d));
        check(pair == (0, 12 * d + 12), || format!("d={d}: first addition {pair:?}"))?;
    }
    Ok("21 convolutions in layers [6, 9, 5, 1], f_{1,1} at (d+1, 4d+4, 10d+10), first addition (0, 12d+12), 28 slots".into())
}

fn p2_p3_totals() -> Outcome {
    let p2 = JobGraph::from_shapes(128, &BenchmarkId::P2.shapes()).map_err(|e| e.to_string())?;
    check(p2.conv_job_count() == 24_192 && p2.add_job_count() == 8_192, || {
        format!("p2: {} / {}", p2.conv_job_count(), p2.add_job_count())
    })?;
    let p3 = JobGraph::from_shapes(128, &BenchmarkId::P3.shapes()).map_err(|e| e.to_string())?;
    check(p3.add_job_count() == 24_256, || format!("p3 additions {}", p3.add_job_count()))?;
    check(p3.conv_job_count() == 24_384, || format!("p3 convolutions {}", p3.conv_job_count()))?;
    let stats = graph_stats("p3", 128, &BenchmarkId::P3.shapes()).map_err(|e| e.to_string())?;
    let note = stats
        .lines()
        .find(|l| l.starts_with("note:"))
        .ok_or("p3 statistics do not flag the published convolution count")?;
    check(note.contains("24256") && note.contains("24384"), || note.to_string())?;
    Ok(format!("p2 24192 / 8192; p3 24384 / 24256; flagged: {note}"))
}

fn flop_reproduction() -> Outcome {
    let g = JobGraph::from_shapes(16, &BenchmarkId::P1.shapes()).map_err(|e| e.to_string())?;
    let f = flop_count(&g, 152, Precision::Deca, Mode::Real, &OpCostTable::reference());
    check(f.total() == 1_336_226_651_784, || format!("total {}", f.total()))?;
    check(f.product_part() == 1_184_444_368_380, || format!("multiplications {}", f.product_part()))?;
    check(f.sum_part() == 151_782_283_404, || format!("additions {}", f.sum_part()))?;
    Ok(format!(
        "{} = {} + {}",
        f.total(),
        f.product_part(),
        f.sum_part()
    ))
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let cases = 250;
    let mut jobs = 0;
    for seed in 0..cases {
        let p = random_integer_instance(RandomSpec::default(), 50, Mode::Real, seed).map_err(|e| e.to_string())?;
        let graph = build_jobgraph(&p.polynomial).map_err(|e| e.to_string())?;
        let mut data = stage(&p.polynomial, &p.inputs).map_err(|e| e.to_string())?;
        let r = run_sequential(&graph, &mut data).map_err(|e| e.to_string())?;
        let (value, gradient) = eval_direct(&p.polynomial, &p.inputs).map_err(|e| e.to_string())?;
        check(r.value.same_values(&value), || format!("seed {seed}: value differs"))?;
        for (i, (a, b)) in r.gradient.iter().zip(&gradient).enumerate() {
            check(a.same_values(b), || format!("seed {seed}: gradient component {} differs", i + 1))?;
        }
        jobs += r.conv_jobs + r.add_jobs;
    }
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{cases} integer instances ({jobs} jobs) equal to the direct evaluator in {:.2} s",
        elapsed.as_secs_f64()
    ))
}

fn determinism() -> Outcome {
    let mut runs = 0;
    for m in [Precision::Double, Precision::DoubleDouble, Precision::Quad] {
        for d in [8, 31] {
            let p = gen(BenchmarkId::P1, d, m, Mode::Real, 2024).map_err(|e| e.to_string())?;
            let graph = build_jobgraph(&p.polynomial).map_err(|e| e.to_string())?;
            let staged = stage(&p.polynomial, &p.inputs).map_err(|e| e.to_string())?;
            let mut data = staged.clone();
            let base = run_sequential(&graph, &mut data).map_err(|e| e.to_string())?;
            for workers in [1, 2, 4, 8] {
                let mut data = staged.clone();
                let r = run_parallel(&graph, &mut data, workers).map_err(|e| e.to_string())?;
                check(same_outputs(&base, &r), || format!("{m}, d={d}, {workers} workers differ"))?;
                runs += 1;
            }
            if d == 8 {
                for rep in 0..10 {
                    let mut data = staged.clone();
                    let r = run_parallel(&graph, &mut data, 4).map_err(|e| e.to_string())?;
                    check(same_outputs(&base, &r), || format!("{m}, d={d}: repeat {rep} differs"))?;
                    runs += 1;
                }
            }
        }
    }
    Ok(format!("{runs} parallel runs on p1 bitwise equal to the sequential run"))
}

fn accuracy() -> Outcome {
    let pairs = 1_000_000;
    let mut worst = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for p in [
        Precision::DoubleDouble,
        Precision::Triple,
        Precision::Quad,
        Precision::Penta,
        Precision::Octo,
        Precision::Deca,
    ] {
        let m = p.limbs() as i32;
        let bound = 2f64.powi(16 - 52 * m);
        let (mut add_err, mut mul_err) = (0f64, 0f64);
        for _ in 0..pairs {
            let x = random_multidouble(&mut rng, p);
            let y = random_multidouble(&mut rng, p);
            let (dx, dy) = (Dyadic::from_multidouble(&x), Dyadic::from_multidouble(&y));
            add_err = add_err.max(Dyadic::from_multidouble(&md_add(&x, &y)).relative_error(&(&dx + &dy)));
            mul_err = mul_err.max(Dyadic::from_multidouble(&md_mul(&x, &y)).relative_error(&(&dx * &dy)));
        }
        check(add_err <= bound && mul_err <= bound, || {
            format!("{p}: add {add_err:e}, mul {mul_err:e}, bound {bound:e}")
        })?;
        worst.push(format!("{p} 2^{:.0}/2^{:.0}", add_err.max(f64::MIN_POSITIVE).log2(), mul_err.max(f64::MIN_POSITIVE).log2()));
    }
    for _ in 0..100_000 {
        let a = random_wide_double(&mut rng);
        let b = random_wide_double(&mut rng);
        let (s, e) = eft::two_sum(a, b);
        check(&Dyadic::from_f64(s) + &Dyadic::from_f64(e) == &Dyadic::from_f64(a) + &Dyadic::from_f64(b), || {
            format!("two_sum({a:e}, {b:e}) is inexact")
        })?;
        let (p, e) = eft::two_prod(a, b);
        check(&Dyadic::from_f64(p) + &Dyadic::from_f64(e) == &Dyadic::from_f64(a) * &Dyadic::from_f64(b), || {
            format!("two_prod({a:e}, {b:e}) is inexact")
        })?;
    }
    Ok(format!(
        "worst add/mul relative errors over 10^6 pairs: {}; two_sum and two_prod exact on 10^5 pairs",
        worst.join(", ")
    ))
}

fn random_wide_double(rng: &mut ChaCha8Rng) -> f64 {
    let mant: f64 = rng.gen_range(1.0..2.0);
    let exp: i32 = rng.gen_range(-200..200);
    let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
    sign * mant * 2f64.powi(exp)
}

fn euler_sum(z: &[Series], gradient: &[Series], indices: &[usize]) -> Series {
    let mut acc = Series::zero(z[0].degree(), z[0].precision(), z[0].mode());
    for &i in indices {
        acc = acc.add(&z[i - 1].conv(&gradient[i - 1]).unwrap()).unwrap();
    }
    acc
}

fn single_monomial(n: usize, coeff: Series, indices: Vec<usize>, exponents: Vec<u32>) -> Polynomial {
    let zero = Series::zero(coeff.degree(), coeff.precision(), coeff.mode());
    Polynomial::new(n, zero, vec![Monomial::with_exponents(coeff, indices, exponents)]).unwrap()
}

fn random_shape(rng: &mut ChaCha8Rng, n: usize, max_exp: u32) -> (Vec<usize>, Vec<u32>) {
    let nk = rng.gen_range(1..=n);
    let mut idx: Vec<usize> = rand::seq::index::sample(rng, n, nk).into_iter().map(|i| i + 1).collect();
    idx.sort_unstable();
    let exps = idx.iter().map(|_| rng.gen_range(1..=max_exp)).collect();
    (idx, exps)
}

fn analytic_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    // Integer instances at one limb: exact.
    for case in 0..100 {
        let n = rng.gen_range(1..=4);
        let (idx, exps) = random_shape(&mut rng, n, 3);
        let d = rng.gen_range(0..=4);
        let ints = |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..=d).map(|_| rng.gen_range(-5..=5) as f64).collect() };
        let mut a = ints(&mut rng);
        a[0] = rng.gen_range(1..=5) as f64;
        let poly = single_monomial(n, Series::from_f64s(&a, Precision::Double), idx.clone(), exps.clone());
        let z: Vec<Series> = (0..n).map(|_| Series::from_f64s(&ints(&mut rng), Precision::Double)).collect();
        let graph = build_jobgraph(&poly).map_err(|e| e.to_string())?;
        let mut data = stage(&poly, &z).map_err(|e| e.to_string())?;
        let r = run_sequential(&graph, &mut data).map_err(|e| e.to_string())?;
        let lhs = euler_sum(&z, &r.gradient, &idx);
        let rhs = r.value.scale_int(exps.iter().sum::<u32>() as i64);
        check(lhs.same_values(&rhs), || format!("integer case {case}: identity fails"))?;
    }
    // Random multiple-double instances.
    let mut worst = 0f64;
    for p in [
        Precision::DoubleDouble,
        Precision::Triple,
        Precision::Quad,
        Precision::Penta,
        Precision::Octo,
        Precision::Deca,
    ] {
        let tol = 2f64.powi(20 - 52 * p.limbs() as i32);
        for case in 0..20 {
            let n = rng.gen_range(1..=5);
            let (idx, exps) = random_shape(&mut rng, n, 3);
            let d = rng.gen_range(0..=6);
            let poly = single_monomial(n, Series::random_with(&mut rng, d, p, Mode::Real), idx.clone(), exps.clone());
            let z: Vec<Series> = (0..n).map(|_| Series::random_with(&mut rng, d, p, Mode::Real)).collect();
            let graph = build_jobgraph(&poly).map_err(|e| e.to_string())?;
            let mut data = stage(&poly, &z).map_err(|e| e.to_string())?;
            let r = run_sequential(&graph, &mut data).map_err(|e| e.to_string())?;
            let lhs = euler_sum(&z, &r.gradient, &idx);
            let rhs = r.value.scale_int(exps.iter().sum::<u32>() as i64);
            let err = max_discrepancy(&lhs, &rhs).map_err(|e| e.to_string())?;
            check(err <= tol, || format!("{p} case {case}: relative {err:e} > {tol:e}"))?;
            worst = worst.max(err / tol);
        }
    }
    // Finite differences on the constant coefficients.
    let h = 2f64.powi(-20);
    let mut fd_worst = 0f64;
    for case in 0..60 {
        let p = [Precision::DoubleDouble, Precision::Quad, Precision::Deca][case % 3];
        let n = rng.gen_range(1..=5);
        let max_exp = if case % 2 == 0 { 1 } else { 3 };
        let count = rng.gen_range(1..=6);
        let d = rng.gen_range(0..=4);
        let monos = (0..count)
            .map(|_| {
                let (idx, exps) = random_shape(&mut rng, n, max_exp);
                Monomial::with_exponents(Series::random_with(&mut rng, d, p, Mode::Real), idx, exps)
            })
            .collect();
        let poly = Polynomial::new(n, Series::random_with(&mut rng, d, p, Mode::Real), monos).unwrap();
        let z: Vec<Series> = (0..n).map(|_| Series::random_with(&mut rng, d, p, Mode::Real)).collect();
        let eval = |z: &[Series]| -> Result<RunReport, String> {
            let graph = build_jobgraph(&poly).map_err(|e| e.to_string())?;
            let mut data = stage(&poly, z).map_err(|e| e.to_string())?;
            run_sequential(&graph, &mut data).map_err(|e| e.to_string())
        };
        let base = eval(&z)?;
        let value0 = |r: &RunReport| r.value.coeff(0).re;
        for i in 0..n {
            let shifted = |delta: f64| -> Result<RunReport, String> {
                let mut zz = z.clone();
                let mut c = zz[i].coeff(0);
                c.re = md_add(&c.re, &polyseries::MultiDouble::from_f64(delta, p));
                zz[i].set_coeff(0, &c).map_err(|e| e.to_string())?;
                eval(&zz)
            };
            let g = base.gradient[i].coeff(0).re.to_f64();
            let fd = if max_exp == 1 {
                let plus = shifted(h)?;
                polyseries::multidouble::md_sub(&value0(&plus), &value0(&base)).to_f64() / h
            } else {
                let (plus, minus) = (shifted(h)?, shifted(-h)?);
                polyseries::multidouble::md_sub(&value0(&plus), &value0(&minus)).to_f64() / (2.0 * h)
            };
            let rel = (fd - g).abs() / g.abs().max(f64::MIN_POSITIVE);
            check(rel <= 1e-6, || format!("case {case}, variable {}: fd {fd:e} vs {g:e}", i + 1))?;
            fd_worst = fd_worst.max(rel);
        }
    }
    Ok(format!(
        "Euler identity exact on 100 integer cases and within {:.2e} of the bound on 120 multiple-double cases; \
         finite differences within {fd_worst:.1e} relative",
        worst
    ))
}

fn scaling() -> Outcome {
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    let speedup = if cores >= 8 {
        let p = gen(BenchmarkId::P1, 152, Precision::Deca, Mode::Real, 3).map_err(|e| e.to_string())?;
        let graph = build_jobgraph(&p.polynomial).map_err(|e| e.to_string())?;
        let staged = stage(&p.polynomial, &p.inputs).map_err(|e| e.to_string())?;
        let mut one = staged.clone();
        let t1 = run_parallel(&graph, &mut one, 1).map_err(|e| e.to_string())?.wall_time;
        let mut many = staged;
        let tn = run_parallel(&graph, &mut many, cores).map_err(|e| e.to_string())?.wall_time;
        let s = t1.as_secs_f64() / tn.as_secs_f64();
        check(s >= 2.0, || format!("speedup {s:.2} with {cores} workers"))?;
        format!("speedup {s:.2} with {cores} workers")
    } else {
        format!("speedup check not applicable ({cores} core(s) available, 8 required)")
    };
    let conv_time = |d: usize| -> Result<f64, String> {
        let p = gen(BenchmarkId::P1, d, Precision::DoubleDouble, Mode::Real, 5).map_err(|e| e.to_string())?;
        let graph = build_jobgraph(&p.polynomial).map_err(|e| e.to_string())?;
        let mut data = stage(&p.polynomial, &p.inputs).map_err(|e| e.to_string())?;
        Ok(run_sequential(&graph, &mut data).map_err(|e| e.to_string())?.conv_time().as_secs_f64())
    };
    let (t63, t127) = (conv_time(63)?, conv_time(127)?);
    let ratio = t127 / t63;
    check((2.5..=6.0).contains(&ratio), || format!("convolution time ratio {ratio:.2} outside [2.5, 6]"))?;
    Ok(format!(
        "{speedup}; p1 at 2d: convolution time {:.0} ms (d=63) -> {:.0} ms (d=127), ratio {ratio:.2}",
        t63 * 1e3,
        t127 * 1e3
    ))
}

fn round_trip_and_validation() -> Outcome {
    let originals = [
        gen(BenchmarkId::P1, 4, Precision::DoubleDouble, Mode::Real, 1),
        gen(BenchmarkId::P1, 2, Precision::Deca, Mode::Complex, 2),
        random_integer_instance(RandomSpec { max_exponent: 3, ..RandomSpec::default() }, 50, Mode::Complex, 3),
    ];
    for (i, p) in originals.into_iter().enumerate() {
        let p = p.map_err(|e| e.to_string())?;
        let text = p.to_text();
        let back = ProblemFile::parse(&text).map_err(|e| e.to_string())?;
        check(back.to_text() == text && back == p, || format!("problem {i} does not round-trip"))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for case in 0..1000 {
        let n = rng.gen_range(1..=12);
        let count = rng.gen_range(1..=20);
        let shapes: Vec<MonomialShape> = (0..count)
            .map(|_| {
                let (indices, exponents) = random_shape(&mut rng, n, 3);
                MonomialShape { indices, exponents }
            })
            .collect();
        let g = JobGraph::from_shapes(n, &shapes).map_err(|e| e.to_string())?;
        validate(&g).map_err(|v| format!("graph {case}: {v}"))?;
    }
    let base = JobGraph::from_shapes(6, &six_variable_shapes()).map_err(|e| e.to_string())?;
    let mut moved = base.clone();
    let pos = moved.conv_layers[1]
        .iter()
        .position(|j| j.kind == ConvKind::Cross)
        .ok_or("no cross job in layer 2")?;
    let mut job = moved.conv_layers[1].remove(pos);
    job.layer = 1;
    moved.conv_layers[0].push(job);
    let v1 = validate(&moved).err().ok_or("moved cross job accepted")?;
    let mut doubled = base;
    let mut dup = doubled.conv_layers[0][1];
    dup.in1 = 2;
    dup.out = doubled.conv_layers[0][0].out;
    doubled.conv_layers[0][1] = dup;
    let v2 = validate(&doubled).err().ok_or("duplicate write accepted")?;
    Ok(format!(
        "3 problem files round-trip bitwise; 1000 random graphs valid; injected faults rejected ({v1}; {v2})"
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("job counts of p1", job_counts),
        ("worked example", worked_example),
        ("p2 and p3 totals", p2_p3_totals),
        ("double operation count", flop_reproduction),
        ("oracle equivalence", oracle_equivalence),
        ("determinism", determinism),
        ("multiple-double accuracy", accuracy),
        ("analytic identities", analytic_identities),
        ("scaling sanity", scaling),
        ("round trip and validation", round_trip_and_validation),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let label = format!("criterion {} ({name})", i + 1);
        if !filter.is_empty() && !filter.iter().any(|f| label.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {label} [{secs:.1} s]: {detail}"),
            Err(why) => {
                failures += 1;
                println!("FAIL {label} [{secs:.1} s]: {why}");
            }
        }
    }
    if failures > 0 {
        println!("{failures} criterion(s) failed");
        std::process::exit(1);
    }
}
