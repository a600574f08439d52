//! Problem encodings: CNF formulas (DIMACS), hypergraph 2-coloring, and
//! seeded random generators for both.
//!
//! # Hypergraph format
//!
//! One edge per line as whitespace-separated vertex ids. Text after `#` is a
//! comment, blank lines are ignored. A comment of the form `# vertices N`
//! fixes the vertex count; otherwise it is one more than the largest id.

use std::collections::HashSet;
use std::fmt::Write as _;

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, ParseError, ParseErrorKind, Result};
use crate::model::{Event, Instance, Predicate, VarSpec};
use crate::rng;

const GENERATOR_RETRIES: usize = 1000;

/// Largest variable or vertex count the parsers accept. Every variable
/// becomes an allocated slot in the instance.
pub const MAX_PARSED_COUNT: usize = 1 << 24;

fn check_count(what: &'static str, value: usize) -> std::result::Result<usize, ParseErrorKind> {
    if value > MAX_PARSED_COUNT {
        Err(ParseErrorKind::TooLarge {
            what,
            value,
            max: MAX_PARSED_COUNT,
        })
    } else {
        Ok(value)
    }
}

/// A CNF formula with 1-based signed literals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CnfFormula {
    num_vars: usize,
    clauses: Vec<Vec<i64>>,
}

impl CnfFormula {
    pub fn new(num_vars: usize, clauses: Vec<Vec<i64>>) -> Result<Self> {
        for (i, clause) in clauses.iter().enumerate() {
            validate_clause(clause, num_vars).map_err(|kind| Error::InvalidArgument(format!("clause {i}: {kind}")))?;
        }
        Ok(CnfFormula { num_vars, clauses })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Vec<i64>] {
        &self.clauses
    }

    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.num_vars, self.clauses.len());
        for clause in &self.clauses {
            for lit in clause {
                let _ = write!(out, "{lit} ");
            }
            out.push_str("0\n");
        }
        out
    }

    /// Number of clauses each variable (0-based) occurs in.
    pub fn occurrences(&self) -> Vec<usize> {
        let mut occ = vec![0; self.num_vars];
        for clause in &self.clauses {
            for lit in clause {
                occ[lit.unsigned_abs() as usize - 1] += 1;
            }
        }
        occ
    }
}

fn validate_clause(clause: &[i64], num_vars: usize) -> std::result::Result<(), ParseErrorKind> {
    if clause.is_empty() {
        return Err(ParseErrorKind::EmptyClause);
    }
    let mut seen: Vec<i64> = Vec::with_capacity(clause.len());
    for &lit in clause {
        if lit == 0 || lit.unsigned_abs() as usize > num_vars {
            return Err(ParseErrorKind::LiteralOutOfRange { literal: lit, num_vars });
        }
        if seen.contains(&lit) {
            return Err(ParseErrorKind::DuplicateLiteral(lit));
        }
        if seen.contains(&-lit) {
            return Err(ParseErrorKind::Tautology(lit.unsigned_abs() as usize));
        }
        seen.push(lit);
    }
    Ok(())
}

/// Parses DIMACS CNF: `c` comment lines, one `p cnf <vars> <clauses>`
/// header, then literals terminated by `0`. Clauses may span lines.
pub fn parse_dimacs(text: &str) -> std::result::Result<CnfFormula, ParseError> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses: Vec<Vec<i64>> = Vec::new();
    let mut current: Vec<i64> = Vec::new();
    let mut current_start = 0;
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(ParseError::new(line_no, ParseErrorKind::DuplicateHeader));
            }
            header = Some(parse_header(line).map_err(|k| ParseError::new(line_no, k))?);
            continue;
        }
        let Some((num_vars, _)) = header else {
            return Err(ParseError::new(line_no, ParseErrorKind::MissingHeader));
        };
        for token in line.split_whitespace() {
            let lit: i64 = token
                .parse()
                .map_err(|_| ParseError::new(line_no, ParseErrorKind::InvalidToken(token.to_string())))?;
            if lit == 0 {
                validate_clause(&current, num_vars).map_err(|k| ParseError::new(current_start.max(1), k))?;
                clauses.push(std::mem::take(&mut current));
                continue;
            }
            if current.is_empty() {
                current_start = line_no;
            }
            if lit.unsigned_abs() as usize > num_vars {
                return Err(ParseError::new(
                    line_no,
                    ParseErrorKind::LiteralOutOfRange { literal: lit, num_vars },
                ));
            }
            current.push(lit);
        }
    }
    let Some((num_vars, declared)) = header else {
        return Err(ParseError::new(last_line.max(1), ParseErrorKind::MissingHeader));
    };
    if !current.is_empty() {
        return Err(ParseError::new(last_line, ParseErrorKind::UnterminatedClause));
    }
    if clauses.len() != declared {
        return Err(ParseError::new(
            last_line.max(1),
            ParseErrorKind::ClauseCountMismatch {
                declared,
                found: clauses.len(),
            },
        ));
    }
    Ok(CnfFormula { num_vars, clauses })
}

fn parse_header(line: &str) -> std::result::Result<(usize, usize), ParseErrorKind> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    let bad = || ParseErrorKind::MalformedHeader(line.to_string());
    if fields.len() != 4 || fields[0] != "p" || fields[1] != "cnf" {
        return Err(bad());
    }
    let vars = fields[2].parse().map_err(|_| bad())?;
    let clauses = fields[3].parse().map_err(|_| bad())?;
    Ok((check_count("variable count", vars)?, clauses))
}

/// One fair binary variable per CNF variable and one event per clause,
/// violated iff every literal is false.
pub fn cnf_to_instance(formula: &CnfFormula) -> Instance {
    let variables = vec![VarSpec::fair_coin(); formula.num_vars];
    let events = formula
        .clauses
        .iter()
        .map(|clause| {
            let vbl = clause.iter().map(|l| l.unsigned_abs() as usize - 1).collect();
            let signs = clause.iter().map(|&l| l > 0).collect();
            Event::new(vbl, Predicate::Clause(signs)).expect("validated clause")
        })
        .collect();
    Instance::new(variables, events).expect("validated formula")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hypergraph {
    num_vertices: usize,
    edges: Vec<Vec<usize>>,
}

impl Hypergraph {
    pub fn new(num_vertices: usize, edges: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = HashSet::new();
        for edge in &edges {
            validate_edge(edge, num_vertices, &mut seen).map_err(|k| Error::InvalidArgument(k.to_string()))?;
        }
        Ok(Hypergraph { num_vertices, edges })
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.num_vertices];
        for e in &self.edges {
            for &v in e {
                deg[v] += 1;
            }
        }
        deg
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("# vertices {}\n", self.num_vertices);
        for e in &self.edges {
            let line: Vec<String> = e.iter().map(|v| v.to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

fn validate_edge(
    edge: &[usize],
    num_vertices: usize,
    seen: &mut HashSet<Vec<usize>>,
) -> std::result::Result<(), ParseErrorKind> {
    if edge.len() < 2 {
        return Err(ParseErrorKind::EdgeTooSmall(edge.len()));
    }
    if let Some(&v) = edge.iter().find(|&&v| v >= num_vertices) {
        return Err(ParseErrorKind::VertexOutOfRange {
            vertex: v,
            num_vertices,
        });
    }
    let mut sorted = edge.to_vec();
    sorted.sort_unstable();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(ParseErrorKind::RepeatedVertex(w[0]));
    }
    if !seen.insert(sorted) {
        return Err(ParseErrorKind::DuplicateEdge);
    }
    Ok(())
}

pub fn parse_hypergraph(text: &str) -> std::result::Result<Hypergraph, ParseError> {
    let mut declared: Option<(usize, usize)> = None;
    let mut edges: Vec<(usize, Vec<usize>)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let (content, comment) = match raw.find('#') {
            Some(i) => (&raw[..i], Some(&raw[i + 1..])),
            None => (raw, None),
        };
        if let Some(comment) = comment {
            let words: Vec<&str> = comment.split_whitespace().collect();
            if words.first() == Some(&"vertices") {
                let n = match words.as_slice() {
                    [_, n] => n.parse::<usize>().ok(),
                    _ => None,
                }
                .ok_or_else(|| ParseError::new(line_no, ParseErrorKind::MalformedHeader(raw.trim().to_string())))?;
                if declared.is_some() {
                    return Err(ParseError::new(line_no, ParseErrorKind::DuplicateHeader));
                }
                check_count("vertex count", n).map_err(|k| ParseError::new(line_no, k))?;
                declared = Some((n, line_no));
            }
        }
        let edge = content
            .split_whitespace()
            .map(|t| {
                let v = t
                    .parse::<usize>()
                    .map_err(|_| ParseError::new(line_no, ParseErrorKind::InvalidToken(t.to_string())))?;
                // Ids at or past the limit would imply a vertex count above it.
                check_count("vertex id", v.saturating_add(1)).map_err(|k| ParseError::new(line_no, k))?;
                Ok(v)
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        if !edge.is_empty() {
            edges.push((line_no, edge));
        }
    }
    let inferred = edges.iter().flat_map(|(_, e)| e.iter()).max().map_or(0, |&m| m + 1);
    let num_vertices = declared.map_or(inferred, |(n, _)| n);
    let mut seen = HashSet::new();
    for (line_no, edge) in &edges {
        validate_edge(edge, num_vertices, &mut seen).map_err(|k| ParseError::new(*line_no, k))?;
    }
    Ok(Hypergraph {
        num_vertices,
        edges: edges.into_iter().map(|(_, e)| e).collect(),
    })
}

/// One uniform `colors`-valued variable per vertex and one event per edge,
/// violated iff the edge is monochromatic.
pub fn hypergraph_to_instance(h: &Hypergraph, colors: usize) -> Result<Instance> {
    if colors < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 colors, got {colors}")));
    }
    let variables = vec![VarSpec::uniform(colors)?; h.num_vertices];
    let events = h
        .edges
        .iter()
        .map(|e| Event::new(e.clone(), Predicate::Monochromatic))
        .collect::<Result<Vec<_>>>()?;
    Instance::new(variables, events)
}

/// Picks `k` distinct items uniformly from those whose load is below `cap`.
fn pick_bounded<R: Rng + ?Sized>(rng: &mut R, load: &[usize], cap: usize, k: usize) -> Option<Vec<usize>> {
    let available: Vec<usize> = (0..load.len()).filter(|&v| load[v] < cap).collect();
    if available.len() < k {
        return None;
    }
    Some(
        index::sample(rng, available.len(), k)
            .into_iter()
            .map(|i| available[i])
            .collect(),
    )
}

/// Random k-CNF where no variable occurs in more than `max_var_occurrence`
/// clauses. Whole formulas are redrawn when a clause cannot be completed.
pub fn random_ksat(
    n_vars: usize,
    n_clauses: usize,
    k: usize,
    max_var_occurrence: usize,
    seed: u64,
) -> Result<CnfFormula> {
    if n_vars == 0 || k == 0 || max_var_occurrence == 0 {
        return Err(Error::InvalidArgument("parameters must be positive".into()));
    }
    if k > n_vars || n_clauses * k > n_vars * max_var_occurrence {
        return Err(Error::Infeasible(format!(
            "{n_clauses} clauses of width {k} need more than {max_var_occurrence} occurrences of {n_vars} variables"
        )));
    }
    let mut rng = rng::stream(seed, 0);
    'attempt: for _ in 0..GENERATOR_RETRIES {
        let mut load = vec![0usize; n_vars];
        let mut clauses = Vec::with_capacity(n_clauses);
        for _ in 0..n_clauses {
            let Some(mut vars) = pick_bounded(&mut rng, &load, max_var_occurrence, k) else {
                continue 'attempt;
            };
            vars.sort_unstable();
            let clause = vars
                .iter()
                .map(|&v| {
                    load[v] += 1;
                    let lit = v as i64 + 1;
                    if rng.random::<bool>() {
                        lit
                    } else {
                        -lit
                    }
                })
                .collect();
            clauses.push(clause);
        }
        return Ok(CnfFormula {
            num_vars: n_vars,
            clauses,
        });
    }
    Err(Error::Infeasible(format!(
        "no formula found in {GENERATOR_RETRIES} attempts"
    )))
}

/// Random k-uniform hypergraph with distinct edges and vertex degree at most
/// `max_degree`.
pub fn random_hypergraph(
    n_vertices: usize,
    n_edges: usize,
    k: usize,
    max_degree: usize,
    seed: u64,
) -> Result<Hypergraph> {
    if n_vertices == 0 || max_degree == 0 || k < 2 {
        return Err(Error::InvalidArgument(
            "need positive vertex count and degree, and edge size at least 2".into(),
        ));
    }
    if k > n_vertices || n_edges * k > n_vertices * max_degree {
        return Err(Error::Infeasible(format!(
            "{n_edges} edges of size {k} exceed degree {max_degree} on {n_vertices} vertices"
        )));
    }
    let mut rng = rng::stream(seed, 0);
    'attempt: for _ in 0..GENERATOR_RETRIES {
        let mut load = vec![0usize; n_vertices];
        let mut seen = HashSet::new();
        let mut edges = Vec::with_capacity(n_edges);
        for _ in 0..n_edges {
            let Some(mut edge) = pick_bounded(&mut rng, &load, max_degree, k) else {
                continue 'attempt;
            };
            edge.sort_unstable();
            if !seen.insert(edge.clone()) {
                continue 'attempt;
            }
            for &v in &edge {
                load[v] += 1;
            }
            edges.push(edge);
        }
        return Ok(Hypergraph {
            num_vertices: n_vertices,
            edges,
        });
    }
    Err(Error::Infeasible(format!(
        "no hypergraph found in {GENERATOR_RETRIES} attempts"
    )))
}
