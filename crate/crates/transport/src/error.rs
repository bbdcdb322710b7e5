use thiserror::Error;

#[derive(Debug, Error)]
pub enum TransportError {
    #[error(transparent)]
    Cross(#[from] ttrel_cross::CrossError),

    #[error(transparent)]
    Tensor(#[from] ttrel_core::TtError),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("reference coordinate {0} must lie strictly inside (0, 1)")]
    BoundaryU(f64),

    #[error("invalid tempering schedule: {0}")]
    InvalidSchedule(String),

    #[error("layer {layer} build failed after {built} layers: {source}")]
    LayerBuild {
        layer: usize,
        built: usize,
        #[source]
        source: Box<TransportError>,
    },

    #[error("layer normalization is not positive")]
    NonPositiveNorm,

    #[error("snapshot parse error: {0}")]
    Parse(String),
}
