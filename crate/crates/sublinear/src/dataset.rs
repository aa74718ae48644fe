//! Labeled graph collections and the JSON Lines dataset format.
//!
//! One graph per line:
//!
//! ```json
//! {"id": "g0", "class": "A", "nodes": [[1.0], [2.0]], "edges": [[0, 1, [1.0]]]}
//! ```
//!
//! Node indices are 0-based and each undirected edge is listed once with
//! `i < j`. A dataset directory holds `train.jsonl`, `validation.jsonl` and
//! `test.jsonl` (any subset) plus an optional `dataset.json` manifest with
//! the name, class list and provenance.

use std::collections::HashSet;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sublinear_core::{AttributedGraph, LabeledExample};

use crate::error::{validation, Error, Result};

pub const SPLIT_NAMES: [&str; 3] = ["train", "validation", "test"];
const MANIFEST: &str = "dataset.json";

#[derive(Debug, Clone, PartialEq)]
pub struct GraphRecord {
    pub id: String,
    /// Index into [`Dataset::classes`].
    pub class: usize,
    pub graph: AttributedGraph,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub name: String,
    pub records: Vec<GraphRecord>,
}

impl Split {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn examples(&self) -> Vec<LabeledExample<usize>> {
        self.records
            .iter()
            .map(|r| LabeledExample::new(r.graph.clone(), r.class))
            .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// `jsonl`, `gxl` or `synthetic`.
    pub source: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub paths: Vec<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub standardized: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub attr_dim: usize,
    pub classes: Vec<String>,
    pub splits: Vec<Split>,
    pub provenance: Provenance,
}

impl Dataset {
    pub fn split(&self, name: &str) -> Option<&Split> {
        self.splits.iter().find(|s| s.name == name)
    }

    pub fn require_split(&self, name: &str) -> Result<&Split> {
        self.split(name)
            .ok_or_else(|| validation(format!("dataset '{}' has no '{name}' split", self.name)))
    }

    /// Checks shared attribute dimension, class indices, unique split names
    /// and unique ids.
    pub fn validate(&self) -> Result<()> {
        let mut names = HashSet::new();
        let mut ids = HashSet::new();
        for s in &self.splits {
            if !names.insert(s.name.as_str()) {
                return Err(validation(format!("duplicate split name '{}'", s.name)));
            }
            for r in &s.records {
                if r.graph.attr_dim() != self.attr_dim {
                    return Err(validation(format!(
                        "graph '{}' has attribute dimension {}, dataset uses {}",
                        r.id,
                        r.graph.attr_dim(),
                        self.attr_dim
                    )));
                }
                if r.class >= self.classes.len() {
                    return Err(validation(format!("graph '{}' has unknown class", r.id)));
                }
                if !ids.insert(r.id.as_str()) {
                    return Err(validation(format!("duplicate graph id '{}'", r.id)));
                }
            }
        }
        Ok(())
    }

    /// Rescales every attribute dimension of node vectors to zero mean and
    /// unit variance, using statistics of the `train` split.
    pub fn standardize_nodes(&mut self) -> Result<()> {
        let d = self.attr_dim;
        let train = self.require_split("train")?;
        let mut sum = vec![0.0; d];
        let mut sq = vec![0.0; d];
        let mut count = 0.0;
        for r in &train.records {
            for i in 0..r.graph.order() {
                for (k, v) in r.graph.node(i).iter().enumerate() {
                    sum[k] += v;
                    sq[k] += v * v;
                }
                count += 1.0;
            }
        }
        if count == 0.0 {
            return Err(validation("cannot standardize: training split has no nodes"));
        }
        let mean: Vec<f64> = sum.iter().map(|s| s / count).collect();
        let sd: Vec<f64> = sq
            .iter()
            .zip(&mean)
            .map(|(q, m)| (q / count - m * m).max(0.0).sqrt())
            .map(|s| if s > 0.0 { s } else { 1.0 })
            .collect();
        for split in &mut self.splits {
            for r in &mut split.records {
                for i in 0..r.graph.order() {
                    let v: Vec<f64> = r
                        .graph
                        .node(i)
                        .iter()
                        .enumerate()
                        .map(|(k, v)| (v - mean[k]) / sd[k])
                        .collect();
                    r.graph.set_node(i, &v)?;
                }
            }
        }
        self.provenance.standardized = true;
        Ok(())
    }

    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for s in &self.splits {
            write_jsonl(&s.records, &self.classes, &dir.join(format!("{}.jsonl", s.name)))?;
        }
        let manifest = Manifest {
            name: self.name.clone(),
            attr_dim: self.attr_dim,
            classes: self.classes.clone(),
            splits: self.splits.iter().map(|s| s.name.clone()).collect(),
            provenance: self.provenance.clone(),
        };
        let path = dir.join(MANIFEST);
        let text = serde_json::to_string_pretty(&manifest)?;
        fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))
    }

    /// Reads a dataset directory. Without a manifest the standard split
    /// files that exist are loaded and classes are numbered by first
    /// appearance.
    pub fn read_dir(dir: &Path) -> Result<Self> {
        let manifest_path = dir.join(MANIFEST);
        let manifest: Option<Manifest> = if manifest_path.exists() {
            let text = fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
            Some(serde_json::from_str(&text)?)
        } else {
            None
        };
        let split_names: Vec<String> = match &manifest {
            Some(m) => m.splits.clone(),
            None => SPLIT_NAMES
                .iter()
                .filter(|s| dir.join(format!("{s}.jsonl")).exists())
                .map(|s| s.to_string())
                .collect(),
        };
        if split_names.is_empty() {
            return Err(validation(format!("{} contains no split files", dir.display())));
        }
        let mut builder = Builder::new(manifest.as_ref().map(|m| m.classes.clone()));
        let mut paths = Vec::new();
        for name in &split_names {
            let path = dir.join(format!("{name}.jsonl"));
            let lines = read_jsonl(&path)?;
            builder.push_split(name, lines, &path)?;
            paths.push(path);
        }
        let name = manifest
            .as_ref()
            .map(|m| m.name.clone())
            .unwrap_or_else(|| dir_name(dir));
        let provenance = manifest.map(|m| m.provenance).unwrap_or_else(|| Provenance {
            source: "jsonl".into(),
            paths,
            ..Provenance::default()
        });
        builder.finish(name, provenance)
    }

    /// Loads a single JSON Lines file as one split.
    pub fn read_file(path: &Path, split: &str) -> Result<Self> {
        let mut builder = Builder::new(None);
        builder.push_split(split, read_jsonl(path)?, path)?;
        builder.finish(
            dir_name(path),
            Provenance {
                source: "jsonl".into(),
                paths: vec![path.to_path_buf()],
                ..Provenance::default()
            },
        )
    }
}

fn dir_name(p: &Path) -> String {
    p.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into())
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    name: String,
    attr_dim: usize,
    classes: Vec<String>,
    splits: Vec<String>,
    provenance: Provenance,
}

/// One line of the dataset format, as it appears on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphLine {
    pub id: String,
    pub class: String,
    pub nodes: Vec<Vec<f64>>,
    #[serde(default)]
    pub edges: Vec<(usize, usize, Vec<f64>)>,
}

impl GraphLine {
    pub fn to_graph(&self) -> sublinear_core::Result<AttributedGraph> {
        let d = self.nodes.first().map(Vec::len).unwrap_or_else(|| {
            self.edges.first().map(|e| e.2.len()).unwrap_or(1)
        });
        AttributedGraph::from_parts(d, &self.nodes, &self.edges)
    }

    pub fn from_graph(id: &str, class: &str, g: &AttributedGraph) -> Self {
        Self {
            id: id.to_string(),
            class: class.to_string(),
            nodes: (0..g.order()).map(|i| g.node(i).to_vec()).collect(),
            edges: g.edges().map(|(i, j, a)| (i, j, a.to_vec())).collect(),
        }
    }
}

pub fn read_jsonl(path: &Path) -> Result<Vec<GraphLine>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: GraphLine = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: n + 1,
            message: e.to_string(),
        })?;
        out.push(parsed);
    }
    Ok(out)
}

pub fn write_jsonl(records: &[GraphRecord], classes: &[String], path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for r in records {
        let line = GraphLine::from_graph(&r.id, &classes[r.class], &r.graph);
        serde_json::to_writer(&mut w, &line)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Accumulates splits while assigning class indices and checking
/// dimensions.
pub(crate) struct Builder {
    classes: Vec<String>,
    fixed_classes: bool,
    attr_dim: Option<usize>,
    splits: Vec<Split>,
}

impl Builder {
    pub(crate) fn new(classes: Option<Vec<String>>) -> Self {
        Self {
            fixed_classes: classes.is_some(),
            classes: classes.unwrap_or_default(),
            attr_dim: None,
            splits: Vec::new(),
        }
    }

    pub(crate) fn class_index(&mut self, class: &str) -> Result<usize> {
        if let Some(i) = self.classes.iter().position(|c| c == class) {
            return Ok(i);
        }
        if self.fixed_classes {
            return Err(validation(format!("class '{class}' is not in the manifest")));
        }
        self.classes.push(class.to_string());
        Ok(self.classes.len() - 1)
    }

    pub(crate) fn push_split(&mut self, name: &str, lines: Vec<GraphLine>, path: &Path) -> Result<()> {
        let mut records = Vec::with_capacity(lines.len());
        for (n, line) in lines.into_iter().enumerate() {
            let graph = line.to_graph().map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: n + 1,
                message: e.to_string(),
            })?;
            let class = self.class_index(&line.class)?;
            records.push(GraphRecord {
                id: line.id,
                class,
                graph,
            });
        }
        self.push_records(name, records)
    }

    pub(crate) fn push_records(&mut self, name: &str, records: Vec<GraphRecord>) -> Result<()> {
        for r in &records {
            match self.attr_dim {
                None => self.attr_dim = Some(r.graph.attr_dim()),
                Some(d) if d != r.graph.attr_dim() => {
                    return Err(validation(format!(
                        "graph '{}' has attribute dimension {}, expected {d}",
                        r.id,
                        r.graph.attr_dim()
                    )))
                }
                _ => {}
            }
        }
        self.splits.push(Split {
            name: name.to_string(),
            records,
        });
        Ok(())
    }

    pub(crate) fn finish(self, name: String, provenance: Provenance) -> Result<Dataset> {
        let ds = Dataset {
            name,
            attr_dim: self.attr_dim.unwrap_or(1),
            classes: self.classes,
            splits: self.splits,
            provenance,
        };
        ds.validate()?;
        Ok(ds)
    }
}
