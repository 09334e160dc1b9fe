use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid neuron parameters: {0}")]
    InvalidParams(String),

    #[error("invalid spike train: {0}")]
    InvalidSpikeTrain(String),

    #[error("weight vector has {weights} entries but the pattern has {inputs} inputs")]
    LengthMismatch { weights: usize, inputs: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("target generation infeasible after {attempts} rejections: {constraint}")]
    Infeasible { constraint: String, attempts: usize },

    #[error("weight {synapse} diverged to {value} at epoch {epoch}")]
    Divergence { epoch: usize, synapse: usize, value: f64 },

    #[error("performance of an empty outcome list is undefined")]
    EmptyOutcomes,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("config parse error: {0}")]
    Toml(#[from] toml::de::Error),
}
