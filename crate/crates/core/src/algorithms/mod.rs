//! Circuit generators and estimators for phase estimation, amplitude
//! estimation and distribution loading.

pub mod distribution;
pub mod mlae;
pub mod qae;
pub mod qft;
pub mod qpe;
