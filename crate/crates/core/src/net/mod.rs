//! Fully-connected sub-networks, the per-node bundle, and the jet engine that
//! supplies spatial derivatives and parameter gradients through them.

mod activation;
mod batch;
mod bundle;
mod mlp;

pub use activation::Activation;
pub use batch::{BatchJets, JetLayout, Tape};
pub use bundle::{spatial_inputs, NetworkBundle, Normalization};
pub use mlp::{init_network, Jet2, Mlp};
