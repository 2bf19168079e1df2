//! Scale functions for upwards skip-free random walks (the compound binomial
//! risk model) and the first-passage, ruin and dividend problems they solve.

pub mod dividends;
pub mod embedding;
pub mod error;
pub mod golden;
pub mod lundberg;
pub mod mc;
pub mod model;
pub mod passage;
pub mod scale;
pub mod verify;

pub use dividends::{BarrierResult, LemmaCase, Objective};
pub use embedding::{LevyChainParams, LevyScale};
pub use error::{Error, Result};
pub use mc::{Functional, McConfig, McEstimate, Policy};
pub use model::{ClaimDistribution, ClaimKind, DiscountedModel, ModelSpec};
pub use scale::{ScaleTable, ZwTable};
