use std::collections::BTreeMap;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::complex_model::{ComplexMultisetModel, Head};
use super::deepsets::{Activation, DeepSetsBaseline};
use super::{Model, TrainConfig, Value};
use crate::error::{Error, Result};

/// Architecture description, enough to rebuild a model from its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Complex {
        vocab: usize,
        k: usize,
        head: Head,
        learn_lambda: bool,
    },
    Deepsets {
        vocab: usize,
        embed_dim: usize,
        hidden: usize,
        activation: Activation,
    },
}

/// Either model family, behind one [`Model`] implementation.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyModel {
    Complex(ComplexMultisetModel),
    DeepSets(DeepSetsBaseline),
}

impl AnyModel {
    pub fn spec(&self) -> ModelSpec {
        match self {
            AnyModel::Complex(m) => ModelSpec::Complex {
                vocab: m.vocab(),
                k: m.k(),
                head: m.head(),
                learn_lambda: m.learn_lambda(),
            },
            AnyModel::DeepSets(m) => ModelSpec::Deepsets {
                vocab: m.vocab(),
                embed_dim: m.embed_dim(),
                hidden: m.hidden(),
                activation: m.activation(),
            },
        }
    }

    pub fn from_spec(spec: &ModelSpec, params: Vec<f64>) -> Result<Self> {
        Ok(match *spec {
            ModelSpec::Complex {
                vocab,
                k,
                head,
                learn_lambda,
            } => AnyModel::Complex(ComplexMultisetModel::from_params(
                vocab,
                k,
                head,
                learn_lambda,
                params,
            )?),
            ModelSpec::Deepsets {
                vocab,
                embed_dim,
                hidden,
                activation,
            } => AnyModel::DeepSets(DeepSetsBaseline::from_params(
                vocab, embed_dim, hidden, activation, params,
            )?),
        })
    }

    fn param_count(spec: &ModelSpec) -> usize {
        match *spec {
            ModelSpec::Complex {
                vocab,
                k,
                head,
                learn_lambda,
            } => ComplexMultisetModel::param_count(vocab, k, head, learn_lambda),
            ModelSpec::Deepsets {
                vocab,
                embed_dim,
                hidden,
                ..
            } => DeepSetsBaseline::param_count(vocab, embed_dim, hidden),
        }
    }
}

macro_rules! delegate {
    ($self:ident, $m:ident => $e:expr) => {
        match $self {
            AnyModel::Complex($m) => $e,
            AnyModel::DeepSets($m) => $e,
        }
    };
}

impl Model for AnyModel {
    fn vocab(&self) -> usize {
        delegate!(self, m => m.vocab())
    }

    fn params(&self) -> &[f64] {
        delegate!(self, m => m.params())
    }

    fn params_mut(&mut self) -> &mut [f64] {
        delegate!(self, m => m.params_mut())
    }

    fn param_groups(&self) -> Vec<(&'static str, Range<usize>)> {
        delegate!(self, m => m.param_groups())
    }

    fn predict(&self, seq: &[usize]) -> Result<Value> {
        delegate!(self, m => m.predict(seq))
    }

    fn accumulate_gradient(
        &self,
        seq: &[usize],
        target: Value,
        scale: f64,
        grad: &mut [f64],
    ) -> Result<f64> {
        delegate!(self, m => m.accumulate_gradient(seq, target, scale, grad))
    }
}

/// A saved model: architecture, named parameter arrays and training state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub config: Option<TrainConfig>,
    pub model: ModelSpec,
    pub parameters: BTreeMap<String, Vec<f64>>,
    pub epoch: usize,
    pub dev_metric: Option<f64>,
}

impl Checkpoint {
    pub fn new(
        model: &AnyModel,
        config: Option<TrainConfig>,
        epoch: usize,
        dev_metric: Option<f64>,
    ) -> Self {
        let parameters = model
            .param_groups()
            .into_iter()
            .map(|(name, range)| (name.to_string(), model.params()[range].to_vec()))
            .collect();
        Self {
            config,
            model: model.spec(),
            parameters,
            epoch,
            dev_metric,
        }
    }

    pub fn to_model(&self) -> Result<AnyModel> {
        let mut flat = vec![0.0; AnyModel::param_count(&self.model)];
        let layout = AnyModel::from_spec(&self.model, flat.clone())?;
        let groups = layout.param_groups();
        if groups.len() != self.parameters.len() {
            return Err(Error::Dimension(format!(
                "checkpoint has {} parameter groups, model expects {}",
                self.parameters.len(),
                groups.len()
            )));
        }
        for (name, range) in groups {
            let values = self.parameters.get(name).ok_or_else(|| {
                Error::InvalidArgument(format!("checkpoint lacks parameter group {name}"))
            })?;
            if values.len() != range.len() {
                return Err(Error::Dimension(format!(
                    "group {name} has {} values, expected {}",
                    values.len(),
                    range.len()
                )));
            }
            flat[range].copy_from_slice(values);
        }
        AnyModel::from_spec(&self.model, flat)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
