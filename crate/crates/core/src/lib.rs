//! Pauli/GF(2) algebra, surface-code layouts, noisy memory circuits, Pauli-frame
//! sampling and detector error models.

pub mod circuit;
pub mod code;
pub mod dem;
pub mod distance;
pub mod error;
pub mod gf2;
pub mod layout;
pub mod pauli;
pub mod sampler;

pub use error::{Error, Result};
