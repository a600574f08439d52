use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use lll_core::conditions::{
    check_condition, mu_from_x, uniform_mu_search, ConditionKind, ConditionReport, MuVector, XVector,
};
use lll_core::encodings::{cnf_to_instance, hypergraph_to_instance, parse_dimacs, parse_hypergraph};
use lll_core::params::{parse_parameters, parse_value};
use lll_core::{bundled, DependencyGraph, Instance};
use serde::Serialize;

use crate::args::{Bundled, Format, InstanceArgs};

pub struct Loaded {
    pub instance: Instance,
    pub graph: DependencyGraph,
    pub info: InstanceInfo,
}

#[derive(Clone, Debug, Serialize)]
pub struct InstanceInfo {
    pub source: String,
    pub format: &'static str,
    pub variables: usize,
    pub events: usize,
    pub dependency_edges: usize,
    pub max_degree: usize,
}

pub fn load_instance(args: &InstanceArgs) -> Result<Loaded> {
    let (instance, source, format) = match (&args.instance, args.bundled) {
        (Some(path), _) => {
            let text = read(path)?;
            let instance = match args.format {
                Format::Dimacs => {
                    let f = parse_dimacs(&text).with_context(|| format!("{}", path.display()))?;
                    cnf_to_instance(&f)
                }
                Format::Hypergraph => {
                    let h = parse_hypergraph(&text).with_context(|| format!("{}", path.display()))?;
                    hypergraph_to_instance(&h, args.colors)?
                }
            };
            let format = match args.format {
                Format::Dimacs => "dimacs",
                Format::Hypergraph => "hypergraph",
            };
            (instance, path.display().to_string(), format)
        }
        (None, Some(b)) => match b {
            Bundled::Random3Sat => (bundled::random_3sat(), "bundled:random-3sat".into(), "dimacs"),
            Bundled::Hypergraph60 => (
                bundled::hypergraph_2coloring(),
                "bundled:hypergraph-60".into(),
                "hypergraph",
            ),
            Bundled::FiveCycle => (bundled::five_cycle(), "bundled:five-cycle".into(), "builtin"),
        },
        (None, None) => bail!("an instance is required: pass --instance <file> or --bundled <name>"),
    };
    let graph = DependencyGraph::from_instance(&instance);
    let info = InstanceInfo {
        source,
        format,
        variables: instance.num_variables(),
        events: instance.num_events(),
        dependency_edges: graph.num_edges(),
        max_degree: graph.max_degree(),
    };
    Ok(Loaded { instance, graph, info })
}

pub fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

/// Per-event values from a parameter file, checked against the event count.
pub fn read_values(path: &Path, events: usize) -> Result<Vec<f64>> {
    let values = parse_parameters(&read(path)?).with_context(|| format!("{}", path.display()))?;
    if values.len() != events {
        bail!("{}: expected {events} values, found {}", path.display(), values.len());
    }
    Ok(values)
}

pub enum MuSource<'a> {
    Uniform,
    Constant(f64),
    File(&'a Path),
}

impl<'a> MuSource<'a> {
    pub fn parse(arg: &'a str) -> Self {
        if arg == "uniform" {
            MuSource::Uniform
        } else if let Some(v) = parse_value(arg) {
            MuSource::Constant(v)
        } else {
            MuSource::File(Path::new(arg))
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            MuSource::Uniform => "uniform-search",
            MuSource::Constant(_) => "constant",
            MuSource::File(_) => "mu-file",
        }
    }
}

/// Parameters after resolution. `mu` is `None` only when a uniform search
/// found nothing.
pub struct Resolved {
    pub source: &'static str,
    pub uniform_mu: Option<f64>,
    pub mu: Option<MuVector>,
    pub report: Option<ConditionReport>,
}

impl Resolved {
    pub fn satisfied(&self) -> bool {
        self.report.as_ref().is_some_and(|r| r.satisfied)
    }
}

pub fn mu_vector(source: &MuSource<'_>, events: usize) -> Result<MuVector> {
    Ok(match source {
        MuSource::Uniform => bail!("`uniform` is not valid here"),
        MuSource::Constant(v) => MuVector::uniform(events, *v)?,
        MuSource::File(path) => MuVector::new(read_values(path, events)?)?,
    })
}

pub fn resolve(loaded: &Loaded, condition: ConditionKind, mu: Option<&str>, x: Option<&Path>) -> Result<Resolved> {
    let n = loaded.instance.num_events();
    if let Some(path) = x {
        let mu = mu_from_x(&XVector::new(read_values(path, n)?)?)?;
        let report = check_condition(condition, &loaded.instance, &loaded.graph, &mu)?;
        return Ok(Resolved {
            source: "x-file",
            uniform_mu: None,
            mu: Some(mu),
            report: Some(report),
        });
    }
    let source = MuSource::parse(mu.unwrap_or("uniform"));
    if let MuSource::Uniform = source {
        let found = uniform_mu_search(&loaded.instance, &loaded.graph, condition)?;
        return Ok(match found {
            Some(s) => Resolved {
                source: source.label(),
                uniform_mu: Some(s.mu),
                mu: Some(MuVector::uniform(n, s.mu)?),
                report: Some(s.report),
            },
            None => Resolved {
                source: source.label(),
                uniform_mu: None,
                mu: None,
                report: None,
            },
        });
    }
    let mu = mu_vector(&source, n)?;
    let report = check_condition(condition, &loaded.instance, &loaded.graph, &mu)?;
    Ok(Resolved {
        source: source.label(),
        uniform_mu: None,
        mu: Some(mu),
        report: Some(report),
    })
}
