use thiserror::Error;

use crate::channels::ChannelError;
use crate::experiments::ExperimentError;
use crate::model::ModelError;
use crate::optimizer::OptimizerError;
use crate::sdp::SdpError;
use crate::srocr::SrocrError;

/// Crate-level error.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Sdp(#[from] SdpError),
    #[error(transparent)]
    Srocr(#[from] SrocrError),
    #[error(transparent)]
    Optimizer(#[from] OptimizerError),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
}
