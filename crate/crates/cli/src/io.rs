//! Edge-list, exposure and cost files.
//!
//! All three are whitespace-separated text with `#` comments and blank lines
//! ignored. Node ids are arbitrary tokens, numbered densely in order of first
//! appearance in the edge list.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use divmax_core::{Exposure, Graph, Instance};

use crate::error::{read_file, HarnessError, Result};

/// An instance together with the original node ids.
#[derive(Debug, Clone)]
pub struct LoadedInstance {
    pub instance: Instance,
    pub ids: Vec<String>,
}

impl LoadedInstance {
    /// Labels nodes `1..=n`.
    pub fn with_numeric_ids(instance: Instance) -> Self {
        let ids = (1..=instance.node_count()).map(|i| i.to_string()).collect();
        LoadedInstance { instance, ids }
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(no, line)| {
        let line = line.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then(|| (no + 1, line.split_whitespace().collect()))
    })
}

fn parse_err(source_name: &str, line: usize, message: impl Into<String>) -> HarnessError {
    HarnessError::Parse { source_name: source_name.to_string(), line, message: message.into() }
}

fn parse_number(source_name: &str, line: usize, token: &str) -> Result<f64> {
    token
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| parse_err(source_name, line, format!("'{token}' is not a finite number")))
}

/// Parses the three file bodies. `costs` may be `None` for unit costs; nodes
/// missing from a cost file also cost one.
pub fn parse_instance(
    edges: (&str, &str),
    exposure: (&str, &str),
    costs: Option<(&str, &str)>,
    budget: f64,
) -> Result<LoadedInstance> {
    let (edge_name, edge_text) = edges;
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut ids: Vec<String> = Vec::new();
    let mut triples = Vec::new();
    let mut lines_of = Vec::new();
    for (no, fields) in data_lines(edge_text) {
        if !(2..=3).contains(&fields.len()) {
            return Err(parse_err(edge_name, no, format!("expected 'src dst [weight]', found {} fields", fields.len())));
        }
        let mut node = |tok: &str| {
            *index.entry(tok.to_string()).or_insert_with(|| {
                ids.push(tok.to_string());
                ids.len() - 1
            })
        };
        let (u, v) = (node(fields[0]), node(fields[1]));
        let w = match fields.get(2) {
            Some(t) => parse_number(edge_name, no, t)?,
            None => 1.0,
        };
        triples.push((u, v, w));
        lines_of.push(no);
    }
    let n = ids.len();
    let graph = Graph::from_edges(n, triples.iter().copied()).map_err(|e| {
        let line = match e {
            divmax_core::GraphError::DuplicateEdge(a, b) => triples
                .iter()
                .zip(&lines_of)
                .filter(|((u, v, _), _)| (*u, *v) == (a, b) || (*u, *v) == (b, a))
                .nth(1)
                .map_or(0, |(_, &l)| l),
            divmax_core::GraphError::SelfLoop(a) => {
                triples.iter().zip(&lines_of).find(|((u, v, _), _)| *u == a && *v == a).map_or(0, |(_, &l)| l)
            }
            _ => 0,
        };
        parse_err(edge_name, line, e.to_string())
    })?;

    let (exp_name, exp_text) = exposure;
    let mut values: Vec<Option<f64>> = vec![None; n];
    for (no, fields) in data_lines(exp_text) {
        if fields.len() != 2 {
            return Err(parse_err(exp_name, no, format!("expected 'id value', found {} fields", fields.len())));
        }
        let &i = index.get(fields[0]).ok_or_else(|| HarnessError::UnknownNode {
            source_name: exp_name.to_string(),
            line: no,
            id: fields[0].to_string(),
        })?;
        let value = parse_number(exp_name, no, fields[1])?;
        if value != 1.0 && value != -1.0 {
            return Err(HarnessError::NonBinaryExposure { source_name: exp_name.to_string(), line: no, value });
        }
        values[i] = Some(value);
    }
    let values: Vec<f64> = values
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| HarnessError::MissingExposure(ids[i].clone())))
        .collect::<Result<_>>()?;
    let exposure = Exposure::from_values(&values)?;

    let mut cost_vec = vec![1.0; n];
    if let Some((cost_name, cost_text)) = costs {
        for (no, fields) in data_lines(cost_text) {
            if fields.len() != 2 {
                return Err(parse_err(cost_name, no, format!("expected 'id cost', found {} fields", fields.len())));
            }
            let &i = index.get(fields[0]).ok_or_else(|| HarnessError::UnknownNode {
                source_name: cost_name.to_string(),
                line: no,
                id: fields[0].to_string(),
            })?;
            let c = parse_number(cost_name, no, fields[1])?;
            if c < 0.0 {
                return Err(parse_err(cost_name, no, format!("negative cost {c}")));
            }
            cost_vec[i] = c;
        }
    }
    let instance = Instance::new(graph, exposure, cost_vec, budget)?;
    Ok(LoadedInstance { instance, ids })
}

/// Reads an instance from disk with budget `budget`.
pub fn load_instance(
    edge_path: &Path,
    exposure_path: &Path,
    cost_path: Option<&Path>,
    budget: f64,
) -> Result<LoadedInstance> {
    let edges = read_file(edge_path)?;
    let exposure = read_file(exposure_path)?;
    let costs = cost_path.map(read_file).transpose()?;
    let edge_name = edge_path.display().to_string();
    let exp_name = exposure_path.display().to_string();
    let cost_name = cost_path.map(|p| p.display().to_string());
    parse_instance(
        (&edge_name, &edges),
        (&exp_name, &exposure),
        cost_name.as_deref().zip(costs.as_deref()),
        budget,
    )
}

fn fmt_num(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

pub fn format_edges(loaded: &LoadedInstance) -> String {
    let mut out = String::new();
    for &(u, v, w) in loaded.instance.graph().edges() {
        if w == 1.0 {
            let _ = writeln!(out, "{} {}", loaded.ids[u], loaded.ids[v]);
        } else {
            let _ = writeln!(out, "{} {} {}", loaded.ids[u], loaded.ids[v], fmt_num(w));
        }
    }
    out
}

pub fn format_exposure(loaded: &LoadedInstance) -> String {
    let mut out = String::new();
    for (id, &s) in loaded.ids.iter().zip(loaded.instance.exposure().signs()) {
        let _ = writeln!(out, "{id} {s}");
    }
    out
}

pub fn format_costs(loaded: &LoadedInstance) -> String {
    let mut out = String::new();
    for (id, &c) in loaded.ids.iter().zip(loaded.instance.costs()) {
        let _ = writeln!(out, "{id} {}", fmt_num(c));
    }
    out
}
