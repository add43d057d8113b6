//! Seeded benchmark generators and the versioned instance document.

pub mod fairness;
pub mod np;
pub mod qcnp;
pub mod quad;

use serde::{Deserialize, Serialize};

pub use fairness::{fairness_generate, Fairness, FairnessData, FairnessParams};
pub use np::{np_generate, NeymanPearson, NpData, NpParams};
pub use qcnp::{qcnp_generate, Qcnp, QcnpData, QcnpParams};
pub use quad::{DiagQuadratic, QuadData, QuadProblem};

use crate::error::{Error, Result};
use crate::problem::StochasticProblem;

pub const INSTANCE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone)]
pub enum ProblemInstance {
    Qcnp(Qcnp),
    NeymanPearson(NeymanPearson),
    Fairness(Fairness),
    Quad(QuadProblem),
}

#[derive(Serialize, Deserialize)]
struct InstanceDocument {
    schema_version: u32,
    family: String,
    data: serde_json::Value,
}

impl ProblemInstance {
    pub fn as_problem(&self) -> &dyn StochasticProblem {
        match self {
            ProblemInstance::Qcnp(p) => p,
            ProblemInstance::NeymanPearson(p) => p,
            ProblemInstance::Fairness(p) => p,
            ProblemInstance::Quad(p) => p,
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            ProblemInstance::Qcnp(_) => "qcnp",
            ProblemInstance::NeymanPearson(_) => "np",
            ProblemInstance::Fairness(_) => "fairness",
            ProblemInstance::Quad(_) => "quad",
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let data = match self {
            ProblemInstance::Qcnp(p) => serde_json::to_value(p.data()),
            ProblemInstance::NeymanPearson(p) => serde_json::to_value(p.data()),
            ProblemInstance::Fairness(p) => serde_json::to_value(p.data()),
            ProblemInstance::Quad(p) => serde_json::to_value(p.data()),
        }
        .map_err(|e| Error::Instance(e.to_string()))?;
        let doc = InstanceDocument {
            schema_version: INSTANCE_SCHEMA_VERSION,
            family: self.family().to_string(),
            data,
        };
        serde_json::to_string(&doc).map_err(|e| Error::Instance(e.to_string()))
    }

    /// Parses and validates an instance document.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: InstanceDocument =
            serde_json::from_str(text).map_err(|e| Error::Instance(e.to_string()))?;
        if doc.schema_version != INSTANCE_SCHEMA_VERSION {
            return Err(Error::Instance(format!(
                "unsupported schema_version {} (expected {INSTANCE_SCHEMA_VERSION})",
                doc.schema_version
            )));
        }
        fn decode<T: serde::de::DeserializeOwned>(v: serde_json::Value) -> Result<T> {
            serde_json::from_value(v).map_err(|e| Error::Instance(e.to_string()))
        }
        match doc.family.as_str() {
            "qcnp" => Ok(ProblemInstance::Qcnp(Qcnp::new(decode(doc.data)?)?)),
            "np" => Ok(ProblemInstance::NeymanPearson(NeymanPearson::new(decode(
                doc.data,
            )?)?)),
            "fairness" => Ok(ProblemInstance::Fairness(Fairness::new(decode(doc.data)?)?)),
            "quad" => Ok(ProblemInstance::Quad(QuadProblem::new(decode(doc.data)?)?)),
            other => Err(Error::Instance(format!("unknown family `{other}`"))),
        }
    }
}
