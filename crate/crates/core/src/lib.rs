//! Zero-training abductive question answering over a commonsense semantic
//! network.
//!
//! A question's context and each candidate answer are grounded to network
//! concepts, every answer is turned into an energy-scored configuration
//! linking it to the context (directly or through intermediate cue
//! concepts), and answers are ranked by energy. Softened rankings can be
//! written out as training targets for a student model.

pub mod contextualize;
pub mod extract;
pub mod fixtures;
pub mod harness;
pub mod ibe;
pub mod kb;
pub mod pt;
