use std::fmt::Write as _;
use std::process::ExitCode;

use anyhow::{bail, Result};
use lll_core::branching::{compare_with_closed_forms, Process, TreeComparison};
use lll_core::conditions::{
    mu_from_x, uniform_mu_search, x_from_mu, ConditionKind, ConditionReport, MuVector, XVector,
};
use lll_core::engine::default_max_steps;
use lll_core::stats::summarize;
use lll_core::{bundled, DependencyGraph, Engine, ExecutionLog, SelectionPolicy};
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{BranchingArgs, CheckArgs, ExperimentArgs, ProcessArg, SolveArgs};
use crate::input::{load_instance, mu_vector, read_values, resolve, InstanceInfo, Loaded, MuSource};
use crate::report::{emit, SCHEMA_VERSION};

pub const EXIT_UNSATISFIED: u8 = 2;
pub const EXIT_NOT_TERMINATED: u8 = 3;

#[derive(Serialize)]
struct CheckReport<'a> {
    schema_version: u32,
    command: &'static str,
    instance: &'a InstanceInfo,
    condition: ConditionKind,
    parameter_source: &'static str,
    uniform_mu: Option<f64>,
    mu: Option<&'a [f64]>,
    satisfied: bool,
    report: Option<&'a ConditionReport>,
}

#[derive(Serialize)]
struct CheckRow {
    event: usize,
    probability: f64,
    mu: f64,
    bound: f64,
    slack: f64,
    satisfied: bool,
}

pub fn check(args: &CheckArgs) -> Result<ExitCode> {
    let loaded = load_instance(&args.instance)?;
    let p = &args.params;
    let resolved = resolve(&loaded, p.condition, p.mu.as_deref(), p.x.as_deref())?;
    let mu = resolved.mu.as_ref().map(MuVector::as_slice);
    let report = CheckReport {
        schema_version: SCHEMA_VERSION,
        command: "check",
        instance: &loaded.info,
        condition: p.condition,
        parameter_source: resolved.source,
        uniform_mu: resolved.uniform_mu,
        mu,
        satisfied: resolved.satisfied(),
        report: resolved.report.as_ref(),
    };
    let rows: Vec<CheckRow> = match (&resolved.report, mu) {
        (Some(r), Some(mu)) => r
            .per_event
            .iter()
            .map(|e| CheckRow {
                event: e.event,
                probability: e.probability,
                mu: mu[e.event],
                bound: e.bound,
                slack: e.slack,
                satisfied: e.satisfied,
            })
            .collect(),
        _ => Vec::new(),
    };
    let mut summary = String::new();
    match &resolved.report {
        Some(r) => {
            let verdict = if r.satisfied { "satisfied" } else { "not satisfied" };
            let _ = writeln!(summary, "{} condition {verdict}", p.condition);
            let _ = writeln!(
                summary,
                "{:>6} {:>12} {:>12} {:>12}  ok",
                "event", "p", "bound", "slack"
            );
            for e in &r.per_event {
                let _ = writeln!(
                    summary,
                    "{:>6} {:>12.6e} {:>12.6e} {:>12.4e}  {}",
                    e.event, e.probability, e.bound, e.slack, e.satisfied
                );
            }
            let _ = writeln!(summary, "total bound {}", r.total_bound);
        }
        None => {
            let _ = writeln!(summary, "{} condition: no uniform parameter works", p.condition);
        }
    }
    emit(&args.output, &report, &rows, &summary)?;
    Ok(if resolved.satisfied() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_UNSATISFIED)
    })
}

#[derive(Serialize)]
struct SolveReport<'a> {
    schema_version: u32,
    command: &'static str,
    instance: &'a InstanceInfo,
    policy: SelectionPolicy,
    seed: u64,
    max_steps: u64,
    log: &'a ExecutionLog,
}

#[derive(Serialize)]
struct CountRow {
    event: usize,
    resamples: u64,
}

/// Step budget: explicit, else sized from mu when one is known.
fn step_budget(explicit: Option<u64>, mu: Option<&MuVector>) -> u64 {
    explicit.unwrap_or_else(|| default_max_steps(mu.map_or(0.0, MuVector::total)))
}

pub fn solve(args: &SolveArgs) -> Result<ExitCode> {
    let loaded = load_instance(&args.instance)?;
    let mu = match args.mu.as_deref().map(MuSource::parse) {
        None => None,
        Some(MuSource::Uniform) => uniform_mu_search(&loaded.instance, &loaded.graph, ConditionKind::Cluster)?
            .map(|s| MuVector::uniform(loaded.instance.num_events(), s.mu))
            .transpose()?,
        Some(source) => Some(mu_vector(&source, loaded.instance.num_events())?),
    };
    let max_steps = step_budget(args.run.max_steps, mu.as_ref());
    let log = Engine::new(&loaded.instance).run_trial(args.run.policy, args.run.seed, 0, max_steps)?;
    let report = SolveReport {
        schema_version: SCHEMA_VERSION,
        command: "solve",
        instance: &loaded.info,
        policy: args.run.policy,
        seed: args.run.seed,
        max_steps,
        log: &log,
    };
    let rows: Vec<CountRow> = log
        .counts
        .iter()
        .enumerate()
        .map(|(event, &resamples)| CountRow { event, resamples })
        .collect();
    let mut summary = format!("terminated {}, {} steps\n", log.terminated, log.steps_used);
    let _ = writeln!(
        summary,
        "resamples per event: {}",
        log.counts.iter().map(u64::to_string).collect::<Vec<_>>().join(" ")
    );
    emit(&args.output, &report, &rows, &summary)?;
    if !log.terminated {
        eprintln!("step budget of {max_steps} exhausted; partial log written");
        return Ok(ExitCode::from(EXIT_NOT_TERMINATED));
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct EventStats {
    event: String,
    mu: Option<f64>,
    mean: f64,
    std_err: f64,
    max: f64,
    /// `mean <= mu + 3 SE`; null when the condition does not hold.
    bound_holds: Option<bool>,
}

#[derive(Serialize)]
struct ExperimentReport<'a> {
    schema_version: u32,
    command: &'static str,
    instance: &'a InstanceInfo,
    condition: ConditionKind,
    parameter_source: &'static str,
    condition_satisfied: bool,
    forced: bool,
    policy: SelectionPolicy,
    seed: u64,
    trials: u64,
    max_steps: u64,
    events: &'a [EventStats],
    total: &'a EventStats,
    non_terminating_trials: &'a [u64],
}

struct Trial {
    counts: Vec<u64>,
    steps: u64,
    terminated: bool,
}

fn stats_row(event: String, samples: impl Iterator<Item = f64>, mu: Option<f64>, applicable: bool) -> EventStats {
    let s = summarize(samples);
    EventStats {
        event,
        mu,
        mean: s.mean,
        std_err: s.std_err,
        max: s.max,
        bound_holds: mu.filter(|_| applicable).map(|m| s.mean <= m + 3.0 * s.std_err),
    }
}

pub fn experiment(args: &ExperimentArgs) -> Result<ExitCode> {
    let loaded: Loaded = load_instance(&args.instance)?;
    let p = &args.params;
    let resolved = resolve(&loaded, p.condition, p.mu.as_deref(), p.x.as_deref())?;
    let satisfied = resolved.satisfied();
    if !satisfied && !args.force {
        eprintln!(
            "the {} condition does not hold; pass --force to run anyway",
            p.condition
        );
        return Ok(ExitCode::from(EXIT_UNSATISFIED));
    }
    let max_steps = step_budget(args.run.max_steps, resolved.mu.as_ref());
    let engine = Engine::new(&loaded.instance);
    let (policy, seed) = (args.run.policy, args.run.seed);
    let trials: Vec<Trial> = (0..args.trials)
        .into_par_iter()
        .map(|t| {
            engine.run_trial(policy, seed, t, max_steps).map(|log| Trial {
                counts: log.counts,
                steps: log.steps_used,
                terminated: log.terminated,
            })
        })
        .collect::<lll_core::Result<_>>()?;
    let mu = resolved.mu.as_ref().map(MuVector::as_slice);
    let events: Vec<EventStats> = (0..loaded.instance.num_events())
        .map(|e| {
            stats_row(
                e.to_string(),
                trials.iter().map(|t| t.counts[e] as f64),
                mu.map(|m| m[e]),
                satisfied,
            )
        })
        .collect();
    let total = stats_row(
        "total".into(),
        trials.iter().map(|t| t.steps as f64),
        resolved.mu.as_ref().map(MuVector::total),
        satisfied,
    );
    let non_terminating: Vec<u64> = (0..args.trials).filter(|&t| !trials[t as usize].terminated).collect();
    if !non_terminating.is_empty() {
        eprintln!("{} trial(s) hit the step budget of {max_steps}", non_terminating.len());
    }
    let report = ExperimentReport {
        schema_version: SCHEMA_VERSION,
        command: "experiment",
        instance: &loaded.info,
        condition: p.condition,
        parameter_source: resolved.source,
        condition_satisfied: satisfied,
        forced: args.force,
        policy,
        seed,
        trials: args.trials,
        max_steps,
        events: &events,
        total: &total,
        non_terminating_trials: &non_terminating,
    };
    let mut summary = format!(
        "{} trials, mean total steps {:.4} (sum mu {})\n",
        args.trials,
        total.mean,
        total.mu.map_or("n/a".into(), |m| m.to_string())
    );
    let failing = events.iter().filter(|e| e.bound_holds == Some(false)).count();
    let _ = writeln!(summary, "events above mu + 3 SE: {failing}");
    let rows: Vec<&EventStats> = events.iter().chain(std::iter::once(&total)).collect();
    emit(&args.output, &report, &rows, &summary)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct MassRow {
    max_nodes: usize,
    closed_form_mass: f64,
    observed_mass: f64,
}

#[derive(Serialize)]
struct BranchingReport<'a> {
    schema_version: u32,
    command: &'static str,
    graph: String,
    process: &'static str,
    root: usize,
    max_nodes: usize,
    trials: u64,
    seed: u64,
    /// x for the Moser-Tardos process, mu for the improved one.
    parameters: &'a [f64],
    trees: &'a [TreeComparison],
    mass_by_size: &'a [MassRow],
    truncated_fraction: f64,
    rejection_rounds: u64,
    max_abs_z: f64,
}

pub fn branching(args: &BranchingArgs) -> Result<ExitCode> {
    let (graph, name, loaded): (DependencyGraph, String, Option<Loaded>) = match &args.graph {
        Some(name) => match bundled::test_graph(name) {
            Some(g) => (g, name.clone(), None),
            None => bail!(
                "unknown graph {name:?}; expected one of {}",
                bundled::TEST_GRAPH_NAMES.join(", ")
            ),
        },
        None => {
            let loaded = load_instance(&args.instance)?;
            (loaded.graph.clone(), loaded.info.source.clone(), Some(loaded))
        }
    };
    let n = graph.num_vertices();
    if args.root >= n {
        bail!("root {} out of range for {n} events", args.root);
    }
    let x = match &args.x {
        Some(path) => Some(XVector::allowing_zero(read_values(path, n)?)?),
        None => None,
    };
    let mu = match (&x, MuSource::parse(args.mu.as_deref().unwrap_or("1"))) {
        (Some(x), _) => match args.process {
            ProcessArg::Improved => Some(mu_from_x(x)?),
            ProcessArg::MoserTardos => None,
        },
        (None, MuSource::Uniform) => {
            let Some(loaded) = &loaded else {
                bail!("`--mu uniform` needs an instance");
            };
            match uniform_mu_search(&loaded.instance, &graph, ConditionKind::Cluster)? {
                Some(s) => Some(MuVector::uniform(n, s.mu)?),
                None => bail!("no uniform mu satisfies the cluster condition"),
            }
        }
        (None, source) => Some(mu_vector(&source, n)?),
    };
    let x = match x {
        Some(x) => x,
        None => x_from_mu(mu.as_ref().expect("mu resolved without --x")),
    };
    let (process, label, params) = match args.process {
        ProcessArg::MoserTardos => (Process::MoserTardos(&x), "moser-tardos", x.as_slice()),
        ProcessArg::Improved => {
            let mu = mu.as_ref().expect("improved process has mu");
            (Process::Improved(mu), "improved", mu.as_slice())
        }
    };
    let max_nodes = args.max_nodes as usize;
    let (rows, tally) = compare_with_closed_forms(&graph, process, args.root, max_nodes, args.trials, args.seed)?;
    let mass: Vec<MassRow> = (1..=max_nodes)
        .map(|k| MassRow {
            max_nodes: k,
            closed_form_mass: rows.iter().filter(|r| r.nodes <= k).map(|r| r.closed_form).sum(),
            observed_mass: rows.iter().filter(|r| r.nodes <= k).map(|r| r.frequency).sum(),
        })
        .collect();
    let max_abs_z = rows.iter().map(|r| r.z_score.abs()).fold(0.0, f64::max);
    let report = BranchingReport {
        schema_version: SCHEMA_VERSION,
        command: "branching",
        graph: name,
        process: label,
        root: args.root,
        max_nodes,
        trials: args.trials,
        seed: args.seed,
        parameters: params,
        trees: &rows,
        mass_by_size: &mass,
        truncated_fraction: tally.truncation_fraction(),
        rejection_rounds: tally.rejection_rounds,
        max_abs_z,
    };
    let mut summary = format!("{} trees, max |z| {max_abs_z:.3}\n", rows.len());
    for r in &rows {
        let _ = writeln!(
            summary,
            "{:<24} closed form {:.6} observed {:.6} z {:+.2}",
            r.encoding, r.closed_form, r.frequency, r.z_score
        );
    }
    emit(&args.output, &report, &rows, &summary)?;
    Ok(ExitCode::SUCCESS)
}
