//! Reader for the GXL/CXL subset used by the IAM graph database.
//!
//! A GXL document holds one `graph` element with `node` and `edge`
//! children; attributes are `<attr name="..."><float>..</float></attr>`
//! (also `int`, `double` or numeric `string`). A CXL collection lists
//! `(file, class)` pairs on elements carrying both attributes.
//!
//! Attribute vectors are laid out as the configured node keys, then the
//! configured edge keys, then the optional edge flag. Undeclared attributes
//! are ignored.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use roxmltree::{Document, Node};
use serde::{Deserialize, Serialize};
use sublinear_core::AttributedGraph;

use crate::dataset::{Builder, Dataset, GraphRecord, Provenance, SPLIT_NAMES};
use crate::error::{validation, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GxlAttrConfig {
    pub node_attr_names: Vec<String>,
    #[serde(default)]
    pub edge_attr_names: Vec<String>,
    /// Defaults to `true` when there are no edge attributes.
    #[serde(default)]
    pub append_edge_flag: Option<bool>,
}

impl GxlAttrConfig {
    /// Letter datasets: node coordinates `x`, `y`, unattributed edges.
    pub fn letter() -> Self {
        serde_json::from_str(include_str!("../presets/letter.json")).expect("valid preset")
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "letter" => Some(Self::letter()),
            _ => None,
        }
    }

    pub fn edge_flag(&self) -> bool {
        self.append_edge_flag
            .unwrap_or(self.edge_attr_names.is_empty())
    }

    pub fn attr_dim(&self) -> usize {
        self.node_attr_names.len() + self.edge_attr_names.len() + usize::from(self.edge_flag())
    }
}

fn numeric_attrs(el: Node, wanted: &[String], what: &str) -> Result<Vec<f64>> {
    let mut found: HashMap<&str, f64> = HashMap::new();
    for attr in el.children().filter(|c| c.has_tag_name("attr")) {
        let Some(name) = attr.attribute("name") else { continue };
        if !wanted.iter().any(|w| w == name) {
            continue;
        }
        let text = attr
            .children()
            .find(|c| c.is_element())
            .and_then(|v| v.text())
            .unwrap_or("")
            .trim();
        let value: f64 = text
            .parse()
            .map_err(|_| validation(format!("{what}: attribute '{name}' is not numeric: '{text}'")))?;
        found.insert(name, value);
    }
    wanted
        .iter()
        .map(|w| {
            found
                .get(w.as_str())
                .copied()
                .ok_or_else(|| validation(format!("{what}: missing attribute '{w}'")))
        })
        .collect()
}

/// Parses one GXL document into a graph with nodes in document order.
pub fn parse_gxl(doc: &str, cfg: &GxlAttrConfig) -> Result<AttributedGraph> {
    let d = cfg.attr_dim();
    if d == 0 {
        return Err(validation("attribute configuration yields dimension 0"));
    }
    let doc = Document::parse(doc).map_err(|e| validation(format!("xml: {e}")))?;
    let graph = doc
        .descendants()
        .find(|n| n.has_tag_name("graph"))
        .ok_or_else(|| validation("no graph element"))?;

    let (kn, ke) = (cfg.node_attr_names.len(), cfg.edge_attr_names.len());
    let mut ids: HashMap<&str, usize> = HashMap::new();
    let mut nodes = Vec::new();
    for node in graph.children().filter(|c| c.has_tag_name("node")) {
        let id = node.attribute("id").ok_or_else(|| validation("node without id"))?;
        let mut v = numeric_attrs(node, &cfg.node_attr_names, &format!("node '{id}'"))?;
        v.resize(d, 0.0);
        if ids.insert(id, nodes.len()).is_some() {
            return Err(validation(format!("duplicate node id '{id}'")));
        }
        nodes.push(v);
    }

    let mut g = AttributedGraph::from_nodes(d, &nodes)?;
    for edge in graph.children().filter(|c| c.has_tag_name("edge")) {
        let end = |key: &str| -> Result<usize> {
            let id = edge
                .attribute(key)
                .ok_or_else(|| validation(format!("edge without '{key}'")))?;
            ids.get(id)
                .copied()
                .ok_or_else(|| validation(format!("edge references unknown node '{id}'")))
        };
        let (i, j) = (end("from")?, end("to")?);
        if i == j {
            return Err(validation(format!("self-loop on node {i}")));
        }
        if g.edge(i, j).is_some() {
            continue;
        }
        let attrs = numeric_attrs(edge, &cfg.edge_attr_names, &format!("edge ({i}, {j})"))?;
        let mut v = vec![0.0; d];
        v[kn..kn + ke].copy_from_slice(&attrs);
        if cfg.edge_flag() {
            v[d - 1] = 1.0;
        }
        g.add_edge(i, j, &v)?;
    }
    Ok(g)
}

/// `(file, class)` pairs listed by a CXL collection, in document order.
pub fn parse_cxl_listing(doc: &str) -> Result<Vec<(String, String)>> {
    let doc = Document::parse(doc).map_err(|e| validation(format!("xml: {e}")))?;
    let entries: Vec<(String, String)> = doc
        .descendants()
        .filter_map(|n| Some((n.attribute("file")?.to_string(), n.attribute("class")?.to_string())))
        .collect();
    if entries.is_empty() {
        return Err(validation("collection lists no graphs"));
    }
    Ok(entries)
}

pub struct CxlEntry {
    pub file: String,
    pub class: String,
    pub graph: AttributedGraph,
}

/// Parses a collection and every GXL file it references, relative to
/// `base_dir`.
pub fn parse_cxl(doc: &str, base_dir: &Path, cfg: &GxlAttrConfig) -> Result<Vec<CxlEntry>> {
    parse_cxl_listing(doc)?
        .into_iter()
        .map(|(file, class)| {
            let path = base_dir.join(&file);
            let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            let graph = parse_gxl(&text, cfg).map_err(|e| validation(format!("{}: {e}", path.display())))?;
            Ok(CxlEntry { file, class, graph })
        })
        .collect()
}

/// Loads an IAM-style directory holding `train.cxl`, `validation.cxl` and
/// `test.cxl` next to the referenced GXL files.
pub fn read_iam_dir(dir: &Path, cfg: &GxlAttrConfig) -> Result<Dataset> {
    let mut builder = Builder::new(None);
    let mut paths: Vec<PathBuf> = Vec::new();
    for split in SPLIT_NAMES {
        let path = dir.join(format!("{split}.cxl"));
        if !path.exists() {
            continue;
        }
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let mut records = Vec::new();
        for e in parse_cxl(&text, dir, cfg)? {
            let class = builder.class_index(&e.class)?;
            records.push(GraphRecord {
                id: format!("{split}/{}", e.file),
                class,
                graph: e.graph,
            });
        }
        builder.push_records(split, records)?;
        paths.push(path);
    }
    if paths.is_empty() {
        return Err(validation(format!("{} contains no .cxl split files", dir.display())));
    }
    let name = dir
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "iam".into());
    builder.finish(
        name,
        Provenance {
            source: "gxl".into(),
            paths,
            notes: Some(serde_json::to_value(cfg)?),
            ..Provenance::default()
        },
    )
}
