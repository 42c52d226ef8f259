//! Versioned JSON envelope for fitted models.
//!
//! Floats are written in shortest round-trip form and parsed with exact
//! rounding, so a reloaded model predicts bit-for-bit like the original.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::baselines::{KafModel, WienerModel};
use crate::error::{FwfError, Result};
use crate::fwf::{FittedConfig, FwfModel};
use crate::linalg::Matrix;

pub const FORMAT: &str = "fwf-model";
pub const VERSION: u32 = 1;

/// Any fitted filter.
#[derive(Debug, Clone)]
pub enum AnyModel {
    Fwf(FwfModel),
    Wiener(WienerModel),
    Kaf(KafModel),
}

impl AnyModel {
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        match self {
            AnyModel::Fwf(m) => m.predict(x),
            AnyModel::Wiener(m) => m.predict(x),
            AnyModel::Kaf(m) => m.predict(x),
        }
    }

    pub fn method(&self) -> &'static str {
        match self {
            AnyModel::Fwf(_) => "fwf",
            AnyModel::Wiener(_) => "wiener",
            AnyModel::Kaf(m) => match m.variant {
                crate::baselines::KafVariant::Klms => "klms",
                crate::baselines::KafVariant::Krls => "krls",
                crate::baselines::KafVariant::Krr => "krr",
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct FwfParts {
    weights: Vec<f64>,
    partners: Matrix,
    train_windows: Matrix,
    bias: f64,
    config: FittedConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
enum StoredModel {
    Fwf(FwfParts),
    Wiener(WienerModel),
    Kaf(KafModel),
}

/// A model with the embedding it was trained on.
#[derive(Debug, Clone)]
pub struct ModelFile {
    pub order: usize,
    pub horizon: usize,
    pub training_mse: f64,
    pub model: AnyModel,
}

#[derive(Serialize, Deserialize)]
struct Envelope {
    format: String,
    version: u32,
    order: usize,
    horizon: usize,
    training_mse: f64,
    model: StoredModel,
}

impl ModelFile {
    pub fn write<W: Write>(&self, w: W) -> Result<()> {
        let model = match &self.model {
            AnyModel::Fwf(m) => StoredModel::Fwf(FwfParts {
                weights: m.weights().to_vec(),
                partners: m.partners().clone(),
                train_windows: m.train_windows().clone(),
                bias: m.bias(),
                config: *m.config(),
            }),
            AnyModel::Wiener(m) => StoredModel::Wiener(m.clone()),
            AnyModel::Kaf(m) => StoredModel::Kaf(m.clone()),
        };
        let env = Envelope {
            format: FORMAT.into(),
            version: VERSION,
            order: self.order,
            horizon: self.horizon,
            training_mse: self.training_mse,
            model,
        };
        serde_json::to_writer(w, &env)?;
        Ok(())
    }

    pub fn read<R: Read>(r: R) -> Result<Self> {
        let env: Envelope = serde_json::from_reader(r)?;
        if env.format != FORMAT {
            return Err(FwfError::Degenerate(format!(
                "not a model file (format `{}`)",
                env.format
            )));
        }
        if env.version != VERSION {
            return Err(FwfError::Degenerate(format!(
                "unsupported model version {} (expected {VERSION})",
                env.version
            )));
        }
        let model = match env.model {
            StoredModel::Fwf(p) => AnyModel::Fwf(FwfModel::from_parts(
                p.weights,
                p.partners,
                p.train_windows,
                p.bias,
                p.config,
                env.training_mse,
            )?),
            StoredModel::Wiener(m) => AnyModel::Wiener(m),
            StoredModel::Kaf(m) => AnyModel::Kaf(KafModel::new(
                m.centers,
                m.coefficients,
                m.sigma,
                m.variant,
            )?),
        };
        Ok(ModelFile {
            order: env.order,
            horizon: env.horizon,
            training_mse: env.training_mse,
            model,
        })
    }
}
