use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, Context, Result};

use polyproj_core::instance::{generate, Instance};
use polyproj_core::methods::{
    run, violation, AccuracySchedule, Method, SolverConfig, Trace,
};

use crate::svg;
use crate::UsageError;

pub const CSV_HEADER: &str = "method,m,n,seed,iterations,wall_seconds,violation,termination";

/// Solver settings shared by run, bench, and trace2d.
#[derive(Clone, Copy, Debug)]
pub struct RunOptions {
    pub eps: f64,
    pub accuracy: f64,
    pub max_iters: usize,
    pub max_seconds: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            eps: 1e-8,
            accuracy: 0.5,
            max_iters: 100_000,
            max_seconds: 600.0,
        }
    }
}

impl RunOptions {
    fn config(&self, method: Method) -> SolverConfig {
        let mut cfg = SolverConfig::new(method);
        cfg.eps_stop = self.eps;
        cfg.accuracy = AccuracySchedule::Constant(self.accuracy);
        cfg.max_iters = self.max_iters;
        cfg.max_wall_seconds = self.max_seconds;
        cfg
    }
}

pub fn parse_methods(list: &str) -> Result<Vec<Method>, UsageError> {
    if list.eq_ignore_ascii_case("all") {
        return Ok(Method::ALL.to_vec());
    }
    list.split(',')
        .map(str::trim)
        .map(|name| {
            Method::parse(name).ok_or_else(|| {
                let known: Vec<&str> = Method::ALL.iter().map(|m| m.name()).collect();
                UsageError(format!(
                    "unknown method '{name}' (known: {})",
                    known.join(", ")
                ))
            })
        })
        .collect()
}

/// "3x10,10x50" -> [(3, 10), (10, 50)]
pub fn parse_sizes(list: &str) -> Result<Vec<(usize, usize)>, UsageError> {
    list.split(',')
        .map(str::trim)
        .map(|item| {
            let (m, n) = item
                .split_once('x')
                .ok_or_else(|| UsageError(format!("size '{item}' is not of the form MxN")))?;
            let parse = |s: &str| {
                s.parse::<usize>()
                    .ok()
                    .filter(|&v| v >= 1)
                    .ok_or_else(|| UsageError(format!("size '{item}' needs integers >= 1")))
            };
            Ok((parse(m)?, parse(n)?))
        })
        .collect()
}

fn append_csv(path: &Path, rows: &[String]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .with_context(|| format!("creating {}", parent.display()))?;
        }
    }
    let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .with_context(|| format!("opening {}", path.display()))?;
    if fresh {
        writeln!(file, "{CSV_HEADER}")?;
    }
    for row in rows {
        writeln!(file, "{row}")?;
    }
    Ok(())
}

struct RunOutcome {
    trace: Trace,
    wall_seconds: f64,
    final_violation: f64,
}

fn run_on_instance(inst: &Instance, method: Method, opts: &RunOptions) -> Result<RunOutcome> {
    let cfg = opts.config(method);
    let started = Instant::now();
    let trace = run(&inst.sets, &inst.x0, &cfg)?;
    let wall_seconds = started.elapsed().as_secs_f64();
    let final_violation = violation(&inst.sets, trace.final_iterate(), opts.eps);
    Ok(RunOutcome {
        trace,
        wall_seconds,
        final_violation,
    })
}

fn bench_row(method: Method, inst: &Instance, outcome: &RunOutcome) -> String {
    format!(
        "{},{},{},{},{},{:.6},{},{}",
        method.name(),
        inst.m,
        inst.n,
        inst.seed,
        outcome.trace.iterations(),
        outcome.wall_seconds,
        outcome.final_violation,
        outcome.trace.termination.as_str()
    )
}

pub fn cmd_generate(m: usize, n: usize, seed: u64, out: Option<PathBuf>) -> Result<PathBuf> {
    let inst = generate(m, n, seed)?;
    let path = out.unwrap_or_else(|| {
        PathBuf::from("instances").join(format!("m{m}-n{n}-seed{seed}.json"))
    });
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .with_context(|| format!("creating {}", parent.display()))?;
        }
    }
    inst.save(&path)
        .with_context(|| format!("writing {}", path.display()))?;
    println!("generated {} (m={m}, n={n}, seed={seed})", path.display());
    Ok(path)
}

pub fn cmd_run(
    instance_path: &Path,
    method: Method,
    opts: &RunOptions,
    out: &Path,
    trace_path: Option<&Path>,
) -> Result<()> {
    let inst = Instance::load(instance_path)
        .with_context(|| format!("loading {}", instance_path.display()))?;
    let outcome = run_on_instance(&inst, method, opts)?;
    append_csv(out, &[bench_row(method, &inst, &outcome)])?;

    if let Some(tp) = trace_path {
        let mut text = String::from("k,violation,max_set_distance,step_seconds\n");
        for (k, rec) in outcome.trace.per_iter.iter().enumerate() {
            text.push_str(&format!(
                "{},{},{},{:.6}\n",
                k + 1,
                rec.violation,
                rec.max_set_distance,
                rec.step_seconds
            ));
        }
        std::fs::write(tp, text).with_context(|| format!("writing {}", tp.display()))?;
    }

    println!(
        "{} on {}: {} after {} iterations, violation {:.3e}",
        method.name(),
        instance_path.display(),
        outcome.trace.termination.as_str(),
        outcome.trace.iterations(),
        outcome.final_violation
    );
    Ok(())
}

/// Full grid of sizes x methods x repeats. Each cell appends its raw
/// rows (instance seed = base seed + repeat index) followed by one
/// summary row carrying arithmetic means, the repeat count in the seed
/// column, and SUMMARY as the termination tag.
pub fn cmd_bench(
    sizes: &str,
    methods: &str,
    repeats: usize,
    seed_base: u64,
    opts: &RunOptions,
    out: &Path,
) -> Result<()> {
    if repeats == 0 {
        return Err(UsageError("--repeats must be at least 1".into()).into());
    }
    let sizes = parse_sizes(sizes)?;
    let methods = parse_methods(methods)?;

    for &(m, n) in &sizes {
        for &method in &methods {
            let mut rows = Vec::with_capacity(repeats + 1);
            let mut sum_iters = 0.0;
            let mut sum_wall = 0.0;
            let mut sum_violation = 0.0;
            for rep in 0..repeats {
                let inst = generate(m, n, seed_base + rep as u64)?;
                let outcome = run_on_instance(&inst, method, opts)?;
                sum_iters += outcome.trace.iterations() as f64;
                sum_wall += outcome.wall_seconds;
                sum_violation += outcome.final_violation;
                rows.push(bench_row(method, &inst, &outcome));
            }
            let r = repeats as f64;
            rows.push(format!(
                "{},{},{},{},{},{:.6},{},SUMMARY",
                method.name(),
                m,
                n,
                repeats,
                sum_iters / r,
                sum_wall / r,
                sum_violation / r
            ));
            append_csv(out, &rows)?;
            println!(
                "bench {} m={m} n={n}: mean {} iterations over {repeats} runs",
                method.name(),
                sum_iters / r
            );
        }
    }
    Ok(())
}

pub fn cmd_trace2d(
    instance_path: &Path,
    method: Method,
    opts: &RunOptions,
    out: &Path,
) -> Result<()> {
    let inst = Instance::load(instance_path)
        .with_context(|| format!("loading {}", instance_path.display()))?;
    if inst.n != 2 {
        return Err(anyhow!(
            "instance dimension is {}, the 2-D trajectory plot needs n = 2",
            inst.n
        ));
    }
    let outcome = run_on_instance(&inst, method, opts)?;
    let drawing = svg::render(&inst, &outcome.trace.iterates);
    std::fs::write(out, drawing).with_context(|| format!("writing {}", out.display()))?;
    println!(
        "traced {} iterations of {} into {}",
        outcome.trace.iterations(),
        method.name(),
        out.display()
    );
    Ok(())
}
