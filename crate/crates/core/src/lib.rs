//! Single-photon BB84 key distribution: a link simulator and the complete
//! classical post-processing chain.

pub mod bits;
pub mod experiment;
pub mod hashing;
pub mod ldpc;
pub mod protocol;
pub mod security;
pub mod session;
pub mod sim;
