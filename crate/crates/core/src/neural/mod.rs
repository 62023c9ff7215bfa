//! Small dense networks trained with explicit backpropagation and Adam.
//!
//! Three architectures are supported, all ending in a ReLU hidden layer and a
//! linear output layer:
//!
//! - [`Variant::SelfContained`]: token ids, a learned 64-dim embedding per
//!   token, average pooling over the non-padding positions, then the dense
//!   stack. Output is the tag vocabulary.
//! - [`Variant::EmbedToTags`]: a text embedding into the dense stack, output
//!   is the tag vocabulary.
//! - [`Variant::EmbedToEmbed`]: a text embedding in, an embedding of the
//!   exhibition's concatenated artwork metadata out.
//!
//! All arithmetic is `f64`. Parameters live in one flat buffer in declaration
//! order (token table, hidden weights, hidden bias, output weights, output
//! bias) so the optimizer and checkpoints can treat them uniformly.

mod adam;
mod model;
mod train;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use model::{mse_loss, Model, ModelInput, ModelSpec, Variant, DEFAULT_EMBED_DIM, DEFAULT_HIDDEN_DIM};
pub use train::{train, Example, EpochLoss, TrainOutcome, TrainingConfig};

use crate::corpus::TagProbabilityVector;
use crate::Result;

/// Tag probabilities for a prompt: raw linear outputs clamped below at zero.
pub fn predict_tags(model: &Model, input: &ModelInput) -> Result<TagProbabilityVector> {
    if model.spec().variant == Variant::EmbedToEmbed {
        return Err(crate::Error::WrongVariant {
            expected: "tag-output",
            actual: model.spec().variant.tag(),
        });
    }
    let raw = model.forward(input)?;
    Ok(TagProbabilityVector::from_raw_clamped(&raw))
}
