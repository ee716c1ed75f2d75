//! Dataset loaders.
//!
//! Two layouts are understood:
//! - benchmark triples: `<name>-nverts.txt` holds one simplex size per line
//!   and `<name>-simplices.txt` the flattened, 1-based node ids;
//! - plain edge lists: one hyperedge per line, ids separated by whitespace
//!   or commas, `#` starts a comment.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Hypergraph, HypergraphError, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetFormat {
    Benchmark,
    EdgeList,
}

impl DatasetFormat {
    pub fn load(self, path: &Path) -> Result<Hypergraph, HypergraphError> {
        match self {
            DatasetFormat::Benchmark => read_benchmark(path),
            DatasetFormat::EdgeList => read_edge_list(path),
        }
    }
}

fn read(path: &Path) -> Result<String, HypergraphError> {
    fs::read_to_string(path)
        .map_err(|e| HypergraphError::Io { path: path.display().to_string(), message: e.to_string() })
}

fn parse_id(token: &str, line: usize) -> Result<usize, HypergraphError> {
    token.parse::<usize>().map_err(|_| HypergraphError::Parse {
        line,
        message: format!("expected a non-negative integer, found {token:?}"),
    })
}

/// Parses a plain edge list with 0-based ids.
pub fn parse_edge_list(text: &str) -> Result<Hypergraph, HypergraphError> {
    let mut edges = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("");
        let ids = content
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| parse_id(t, i + 1))
            .collect::<Result<Vec<NodeId>, _>>()?;
        if !ids.is_empty() {
            edges.push(ids);
        }
    }
    Hypergraph::from_edge_list(edges)
}

pub fn read_edge_list(path: &Path) -> Result<Hypergraph, HypergraphError> {
    parse_edge_list(&read(path)?)
}

/// Parses the benchmark pair of files. Ids are shifted to 0-based and the
/// universe is sized by the largest id seen.
pub fn parse_benchmark(nverts: &str, simplices: &str) -> Result<Hypergraph, HypergraphError> {
    let mut ids = Vec::new();
    for (i, line) in simplices.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let id = parse_id(t, i + 1)?;
        if id == 0 {
            return Err(HypergraphError::Parse { line: i + 1, message: "node ids are 1-based".into() });
        }
        ids.push(id - 1);
    }
    let mut edges = Vec::new();
    let mut offset = 0;
    for (i, line) in nverts.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let size = parse_id(t, i + 1)?;
        if offset + size > ids.len() {
            return Err(HypergraphError::Parse {
                line: i + 1,
                message: format!("simplex sizes exceed the {} listed node ids", ids.len()),
            });
        }
        edges.push(ids[offset..offset + size].to_vec());
        offset += size;
    }
    if offset != ids.len() {
        return Err(HypergraphError::Parse {
            line: nverts.lines().count(),
            message: format!("{} node ids left over after the last simplex", ids.len() - offset),
        });
    }
    let universe = ids.iter().max().map_or(0, |m| m + 1);
    Hypergraph::with_universe(edges, universe)
}

/// Resolves `<dir>/<dir name>-{nverts,simplices}.txt`, or treats `path` as
/// the `<prefix>` of `<prefix>-nverts.txt`.
fn benchmark_files(path: &Path) -> (PathBuf, PathBuf) {
    let prefix = if path.is_dir() {
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        path.join(name)
    } else {
        path.to_path_buf()
    };
    let with_suffix = |suffix: &str| {
        let mut s = prefix.as_os_str().to_owned();
        s.push(suffix);
        PathBuf::from(s)
    };
    (with_suffix("-nverts.txt"), with_suffix("-simplices.txt"))
}

pub fn read_benchmark(path: &Path) -> Result<Hypergraph, HypergraphError> {
    let (nverts, simplices) = benchmark_files(path);
    parse_benchmark(&read(&nverts)?, &read(&simplices)?)
}
