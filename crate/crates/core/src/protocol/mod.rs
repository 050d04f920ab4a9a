//! From click records to post-processing frames: squashing of multi-clicks,
//! basis sifting, frame assembly and finite-sample QBER estimation.

mod estimate;
mod frame;
mod sifting;

use thiserror::Error;

pub use estimate::{estimate_qber, qber_upper_bound};
pub use frame::{sample_count, sample_positions, split_frame, FrameBuffer, RawFrame, SiftedFrame, DEFAULT_FRAME_LEN};
pub use sifting::{match_bases, resolve_clicks, sift, sift_with_source, Detection, SiftedPair};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error("synchronisation error: {0}")]
    Sync(String),
    #[error("estimation error: {0}")]
    Estimation(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
