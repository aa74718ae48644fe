//! Versioned JSON documents for trained models.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sublinear_core::{MatcherConfig, OvaModel, Representation, SublinearModel};

use crate::error::{validation, Error, Result};

pub const FORMAT_VERSION: u32 = 1;

/// One binary sublinear model. `weight_cells` is the row-major
/// `order x order x attr_dim` weight representation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDoc {
    pub format_version: u32,
    pub attr_dim: usize,
    pub order: usize,
    pub weight_cells: Vec<f64>,
    pub bias: f64,
    pub matcher_config: MatcherConfig,
    #[serde(default)]
    pub training_metadata: serde_json::Value,
}

impl ModelDoc {
    pub fn from_model(m: &SublinearModel, training_metadata: serde_json::Value) -> Self {
        let rep = m.weight_rep();
        Self {
            format_version: FORMAT_VERSION,
            attr_dim: rep.attr_dim(),
            order: rep.order(),
            weight_cells: rep.as_slice().to_vec(),
            bias: m.bias(),
            matcher_config: *m.matcher(),
            training_metadata,
        }
    }

    pub fn to_model(&self) -> Result<SublinearModel> {
        if self.format_version != FORMAT_VERSION {
            return Err(validation(format!(
                "unsupported model format version {}",
                self.format_version
            )));
        }
        let rep = Representation::from_cells(self.order, self.attr_dim, self.weight_cells.clone())?;
        Ok(SublinearModel::new(rep, self.bias, self.matcher_config)?)
    }
}

/// What `train` writes: a binary model whose positive class is
/// `classes[0]`, or a one-against-all ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelFile {
    Binary {
        classes: Vec<String>,
        model: ModelDoc,
    },
    OneVsAll {
        format_version: u32,
        classes: Vec<String>,
        members: Vec<ModelDoc>,
    },
}

/// A loaded model ready for prediction.
#[derive(Debug, Clone)]
pub enum Classifier {
    Binary {
        classes: Vec<String>,
        model: SublinearModel,
    },
    OneVsAll(OvaModel),
}

impl Classifier {
    pub fn classes(&self) -> &[String] {
        match self {
            Classifier::Binary { classes, .. } => classes,
            Classifier::OneVsAll(m) => m.classes(),
        }
    }

    /// Predicted class index.
    pub fn predict(
        &self,
        x: &sublinear_core::AttributedGraph,
        stats: Option<&sublinear_core::MatchStats>,
    ) -> Result<usize> {
        Ok(match self {
            Classifier::Binary { model, .. } => {
                usize::from(model.evaluate_tracked(x, stats)? < 0.0)
            }
            Classifier::OneVsAll(m) => m.predict_tracked(x, stats)?,
        })
    }

    pub fn with_matcher(self, matcher: MatcherConfig) -> Self {
        match self {
            Classifier::Binary { classes, model } => Classifier::Binary {
                classes,
                model: model.with_matcher(matcher),
            },
            Classifier::OneVsAll(m) => {
                let members = m.members().iter().cloned().map(|x| x.with_matcher(matcher)).collect();
                Classifier::OneVsAll(OvaModel::new(m.classes().to_vec(), members).expect("same shape"))
            }
        }
    }

    pub fn to_file(&self, metadata: serde_json::Value) -> ModelFile {
        match self {
            Classifier::Binary { classes, model } => ModelFile::Binary {
                classes: classes.clone(),
                model: ModelDoc::from_model(model, metadata),
            },
            Classifier::OneVsAll(m) => ModelFile::OneVsAll {
                format_version: FORMAT_VERSION,
                classes: m.classes().to_vec(),
                members: m
                    .members()
                    .iter()
                    .map(|x| ModelDoc::from_model(x, metadata.clone()))
                    .collect(),
            },
        }
    }

    pub fn from_file(file: &ModelFile) -> Result<Self> {
        match file {
            ModelFile::Binary { classes, model } => {
                if classes.len() != 2 {
                    return Err(validation("binary model needs exactly two class names"));
                }
                Ok(Classifier::Binary {
                    classes: classes.clone(),
                    model: model.to_model()?,
                })
            }
            ModelFile::OneVsAll {
                format_version,
                classes,
                members,
            } => {
                if *format_version != FORMAT_VERSION {
                    return Err(validation(format!("unsupported model format version {format_version}")));
                }
                let members = members.iter().map(ModelDoc::to_model).collect::<Result<Vec<_>>>()?;
                Ok(Classifier::OneVsAll(OvaModel::new(classes.clone(), members)?))
            }
        }
    }
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use sublinear_core::AttributedGraph;

    #[test]
    fn model_round_trip_is_exact() {
        let g = AttributedGraph::from_parts(
            2,
            &[[0.1, 1.0 / 3.0], [2.0f64.sqrt(), -1e-300]],
            &[(0, 1, vec![std::f64::consts::PI, 0.0])],
        )
        .unwrap();
        let m = SublinearModel::from_graph(&g, 0.1 + 0.2, MatcherConfig::graduated());
        let c = Classifier::Binary {
            classes: vec!["a".into(), "b".into()],
            model: m.clone(),
        };
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.json");
        write_json(&c.to_file(serde_json::json!({"epochs": 3})), &p).unwrap();
        let back = Classifier::from_file(&read_json(&p).unwrap()).unwrap();
        match back {
            Classifier::Binary { model, .. } => assert_eq!(model, m),
            _ => panic!("wrong kind"),
        }
    }

    #[test]
    fn rejects_unknown_version() {
        let g = AttributedGraph::from_nodes(1, &[[1.0]]).unwrap();
        let mut doc = ModelDoc::from_model(
            &SublinearModel::from_graph(&g, 0.0, MatcherConfig::exact()),
            serde_json::Value::Null,
        );
        doc.format_version = 99;
        assert!(doc.to_model().is_err());
    }
}
