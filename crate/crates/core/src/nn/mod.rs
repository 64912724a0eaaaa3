//! Small networks with hand-written reverse-mode gradients.

mod classifier;
mod mlp;
mod objective;
mod sgd;

pub use classifier::{train_classifier, Classifier, ClassifierConfig, ClassifierKind};
pub use mlp::{Activation, ForwardCache, Mlp, OutputNorm};
pub use objective::{objective_and_grad, train_feature_extractor, ObjectiveSpec, ObjectiveValue};
pub use sgd::{learning_rate_at, train_loop, Schedule, SgdConfig, StepOutput};
